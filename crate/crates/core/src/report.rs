//! Serializable reports and plot emitters.
//!
//! The structs here are the interchange layer: plain data with stable field
//! names, built from solver results and parsed back by the command-line
//! front end. Emitters produce strings only; callers decide where they go.
//! All output is deterministic for a fixed input: JSON field order follows
//! the struct declarations, numbers print in Rust's shortest round-trip
//! form, and the SVG carries no timestamps or external references.

use serde::{Deserialize, Serialize};

use crate::correlation::C3Probe;
use crate::error::{Error, Result};
use crate::expectation::FaceDescriptor;
use crate::faces::CurveProbe;
use crate::linalg::{C64, ComplexMatrix};
use crate::maxent::{ContinuityReport, MaxEntSolution, ProbeVerdict, SolveStatus};
use crate::numerical_range::{
    BoundaryAtlas, DiscontinuityCandidates, PlanarReport, RoundDegeneracy,
};
use crate::states::{DensityMatrix, PureStateVector, binary_entropy};

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Matrix interchange format: row-major entries, one `[re, im]` pair each.
/// Serves for density matrices and for general square matrices alike.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl StateJson {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self::from_matrix(rho.matrix())
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let d = m.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = m.get(i, j);
                entries.push([z.re, z.im]);
            }
        }
        Self { dim: d, entries }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.dim == 0 || self.entries.len() != self.dim * self.dim {
            return Err(Error::MalformedInput(format!(
                "{} entries do not fill a {}x{} matrix",
                self.entries.len(),
                self.dim,
                self.dim
            )));
        }
        let mut m = ComplexMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let [re, im] = self.entries[i * self.dim + j];
                m.set(i, j, C64::new(re, im));
            }
        }
        Ok(m)
    }

    /// Validates the parsed matrix as a density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?)
    }
}

/// Pure-state interchange format: one `[re, im]` pair per amplitude.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorJson {
    pub dim: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl VectorJson {
    pub fn from_vector(v: &PureStateVector) -> Self {
        Self {
            dim: v.dim(),
            amplitudes: v.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Parses and normalizes; rejects the zero vector.
    pub fn to_vector(&self) -> Result<PureStateVector> {
        if self.dim == 0 || self.amplitudes.len() != self.dim {
            return Err(Error::MalformedInput(format!(
                "{} amplitudes for dimension {}",
                self.amplitudes.len(),
                self.dim
            )));
        }
        let amps: Vec<C64> = self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        PureStateVector::normalized(amps)
    }
}

pub fn status_label(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Interior => "interior",
        SolveStatus::FaceCompressed => "face-compressed",
        SolveStatus::SingletonFiber => "singleton-fiber",
    }
}

pub fn verdict_label(verdict: ProbeVerdict) -> &'static str {
    match verdict {
        ProbeVerdict::Continuous => "continuous",
        ProbeVerdict::Discontinuous => "discontinuous",
        ProbeVerdict::Inconclusive => "inconclusive",
    }
}

/// Face data of a solution: support rank, affine dimension, and the chain of
/// exposing directions that reached the face.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaceReport {
    pub rank: usize,
    pub dim: usize,
    pub exposure_chain: Vec<Vec<f64>>,
}

impl FaceReport {
    pub fn from_face(face: &FaceDescriptor) -> Self {
        Self {
            rank: face.projection().rank(),
            dim: face.dim(),
            exposure_chain: face.exposure_chain().to_vec(),
        }
    }
}

/// Full record of one inference run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionReport {
    pub alpha: Vec<f64>,
    pub state: StateJson,
    pub status: String,
    pub face: FaceReport,
    pub constraint_residual: f64,
    pub iterations: usize,
    pub entropy: f64,
}

impl SolutionReport {
    pub fn new(alpha: &[f64], sol: &MaxEntSolution) -> Self {
        Self {
            alpha: alpha.to_vec(),
            state: StateJson::from_density(sol.state()),
            status: status_label(sol.status()).to_string(),
            face: FaceReport::from_face(sol.face()),
            constraint_residual: sol.constraint_residual(),
            iterations: sol.iterations(),
            entropy: sol.entropy(),
        }
    }
}

/// Continuity probe record along a target path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuityJson {
    pub schedule: Vec<f64>,
    pub distances_to_limit: Vec<f64>,
    pub successive_distances: Vec<f64>,
    pub settled_defect: f64,
    pub gap: f64,
    pub entropy_path_end: f64,
    pub entropy_at_limit: f64,
    pub entropy_jump: f64,
    pub verdict: String,
}

impl ContinuityJson {
    pub fn from_report(rep: &ContinuityReport) -> Self {
        Self {
            schedule: rep.schedule.clone(),
            distances_to_limit: rep.distances_to_limit.clone(),
            successive_distances: rep.successive_distances.clone(),
            settled_defect: rep.settled_defect,
            gap: rep.gap,
            entropy_path_end: rep.entropy_path_end,
            entropy_at_limit: rep.entropy_at_limit,
            entropy_jump: (rep.entropy_at_limit - rep.entropy_path_end).abs(),
            verdict: verdict_label(rep.verdict).to_string(),
        }
    }
}

/// Face-dimension probe record along a target curve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveProbeJson {
    pub schedule: Vec<f64>,
    pub dims_along: Vec<usize>,
    pub dim_at_limit: usize,
    pub lsc_violated: bool,
}

impl CurveProbeJson {
    pub fn from_probe(probe: &CurveProbe) -> Self {
        Self {
            schedule: probe.schedule.clone(),
            dims_along: probe.dims_along.clone(),
            dim_at_limit: probe.dim_at_limit,
            lsc_violated: probe.lsc_violated,
        }
    }
}

/// Correlation probe record: per-angle values against the closed-form limit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct C3ProbeJson {
    pub population: f64,
    pub gammas: Vec<f64>,
    pub values: Vec<f64>,
    /// Solver value at the limit state itself.
    pub limit: f64,
    /// Binary entropy of the population, the closed form the limit must hit.
    pub reference: f64,
}

impl C3ProbeJson {
    pub fn new(population: f64, probe: &C3Probe) -> Result<Self> {
        Ok(Self {
            population,
            gammas: probe.gammas.clone(),
            values: probe.values.clone(),
            limit: probe.limit,
            reference: binary_entropy(population)?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateJson {
    pub angle: f64,
    pub point: [f64; 2],
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlatJson {
    pub angle: f64,
    pub endpoints: [[f64; 2]; 2],
    pub length: f64,
}

/// Fiber data over a discontinuity point of a planar inference map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberJson {
    pub point: [f64; 2],
    pub support_rank: usize,
    pub fiber_affine_dim: usize,
}

/// Classification record of a planar sweep: reducibility, flats,
/// discontinuity candidates, and (for 3x3 inputs) the shape verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NrReport {
    pub dim: usize,
    pub resolution: usize,
    pub irreducible: bool,
    pub whole_circle: bool,
    pub candidates: Vec<CandidateJson>,
    pub flat_segments: Vec<FlatJson>,
    pub shape: Option<String>,
    pub continuous: Option<bool>,
    pub fiber: Option<FiberJson>,
    pub notes: Vec<String>,
}

impl NrReport {
    pub fn new(atlas: &BoundaryAtlas, scan: &DiscontinuityCandidates) -> Self {
        Self {
            dim: atlas.matrix().dim(),
            resolution: atlas.resolution(),
            irreducible: scan.irreducible,
            whole_circle: scan.whole_circle,
            candidates: scan
                .points
                .iter()
                .map(|r| CandidateJson {
                    angle: r.angle,
                    point: [r.point.re, r.point.im],
                    multiplicity: r.multiplicity,
                })
                .collect(),
            flat_segments: atlas
                .flat_segments()
                .iter()
                .map(|f| FlatJson {
                    angle: f.angle,
                    endpoints: [
                        [f.endpoints.0.re, f.endpoints.0.im],
                        [f.endpoints.1.re, f.endpoints.1.im],
                    ],
                    length: f.length(),
                })
                .collect(),
            shape: None,
            continuous: None,
            fiber: None,
            notes: scan.notes.clone(),
        }
    }

    /// Folds a 3x3 shape verdict into the record.
    pub fn with_planar(mut self, rep: &PlanarReport) -> Self {
        self.shape = Some(rep.shape.as_str().to_string());
        self.continuous = Some(rep.continuous);
        if let Some(f) = &rep.exceptional {
            self.fiber = Some(FiberJson {
                point: [f.point.re, f.point.im],
                support_rank: f.support_rank,
                fiber_affine_dim: f.fiber_affine_dim,
            });
        }
        self.notes.extend(rep.notes.iter().cloned());
        self
    }
}

/// Cheap per-angle taxonomy from the sweep data alone: an angle exposing two
/// points sits on a flat; an exposed point shared with a neighboring angle
/// is a corner; anything else is round. (Point classification with golden
/// refinement lives in the sweep module; this serves the bulk emitters.)
fn grid_class(atlas: &BoundaryAtlas, k: usize) -> &'static str {
    let pts = atlas.points();
    let n = pts.len();
    if pts[k].len() > 1 {
        return "flat-endpoint";
    }
    let z = pts[k][0];
    let tol_pt = 1e-9 * (1.0 + z.norm());
    let prev = *pts[(k + n - 1) % n].last().unwrap();
    let next = pts[(k + 1) % n][0];
    if (z - prev).norm() <= tol_pt || (z - next).norm() <= tol_pt {
        "corner"
    } else {
        "round"
    }
}

/// CSV of the sweep: `theta,h,re,im,class`, one row per exposed point (grid
/// angles across a flat carry two rows).
pub fn atlas_csv(atlas: &BoundaryAtlas) -> String {
    let mut out = String::from("theta,h,re,im,class\n");
    for k in 0..atlas.resolution() {
        let theta = atlas.angles()[k];
        let h = atlas.support_values()[k];
        let class = grid_class(atlas, k);
        for z in &atlas.points()[k] {
            out.push_str(&format!("{theta},{h},{},{},{class}\n", z.re, z.im));
        }
    }
    out
}

struct SvgFrame {
    min_x: f64,
    min_y: f64,
    scale: f64,
    height: f64,
}

impl SvgFrame {
    const SIZE: f64 = 640.0;
    const MARGIN: f64 = 40.0;

    fn around(points: impl Iterator<Item = C64>) -> Self {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for z in points {
            min_x = min_x.min(z.re);
            max_x = max_x.max(z.re);
            min_y = min_y.min(z.im);
            max_y = max_y.max(z.im);
        }
        if !min_x.is_finite() {
            (min_x, max_x, min_y, max_y) = (-1.0, 1.0, -1.0, 1.0);
        }
        // Degenerate spans (segments, points) still get a visible frame.
        if max_x - min_x < 1e-9 {
            min_x -= 0.5;
            max_x += 0.5;
        }
        if max_y - min_y < 1e-9 {
            min_y -= 0.5;
            max_y += 0.5;
        }
        let span = Self::SIZE - 2.0 * Self::MARGIN;
        let scale = (span / (max_x - min_x)).min(span / (max_y - min_y));
        Self { min_x, min_y, scale, height: Self::SIZE }
    }

    // The complex plane has y pointing up; SVG has it pointing down.
    fn x(&self, z: C64) -> f64 {
        Self::MARGIN + (z.re - self.min_x) * self.scale
    }

    fn y(&self, z: C64) -> f64 {
        self.height - Self::MARGIN - (z.im - self.min_y) * self.scale
    }

    fn point(&self, z: C64) -> (f64, f64) {
        (self.x(z), self.y(z))
    }
}

fn svg_class_color(class: &str) -> &'static str {
    match class {
        "corner" => "#7c3aed",
        "flat-endpoint" => "#d97706",
        _ => "#2b6cb0",
    }
}

/// Self-contained SVG of the swept boundary: filled boundary path, flat
/// segments re-stroked, per-angle classification dots (decimated on dense
/// grids), and discontinuity candidates as crossed circles.
pub fn atlas_svg(atlas: &BoundaryAtlas, candidates: &[RoundDegeneracy]) -> String {
    let hull = atlas.hull_points();
    let frame = SvgFrame::around(
        hull.iter().copied().chain(candidates.iter().map(|c| c.point)),
    );
    let size = SvgFrame::SIZE;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {size} {size}\" \
         width=\"{size}\" height=\"{size}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{size}\" height=\"{size}\" fill=\"#ffffff\"/>\n"
    ));

    if !hull.is_empty() {
        let mut path = String::new();
        for (i, &z) in hull.iter().enumerate() {
            let (x, y) = frame.point(z);
            path.push_str(if i == 0 { "M" } else { " L" });
            path.push_str(&format!("{x:.3} {y:.3}"));
        }
        path.push_str(" Z");
        out.push_str(&format!(
            "  <path d=\"{path}\" fill=\"#eef4fb\" stroke=\"#1f3a5f\" stroke-width=\"1.5\"/>\n"
        ));
    }

    for f in atlas.flat_segments() {
        let (x1, y1) = frame.point(f.endpoints.0);
        let (x2, y2) = frame.point(f.endpoints.1);
        out.push_str(&format!(
            "  <line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" \
             stroke=\"#d97706\" stroke-width=\"3\" stroke-linecap=\"round\"/>\n"
        ));
    }

    let n = atlas.resolution();
    let stride = (n / 256).max(1);
    for k in (0..n).step_by(stride) {
        let class = grid_class(atlas, k);
        let color = svg_class_color(class);
        for &z in &atlas.points()[k] {
            let (x, y) = frame.point(z);
            out.push_str(&format!(
                "  <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2\" fill=\"{color}\"/>\n"
            ));
        }
    }

    for c in candidates {
        let (x, y) = frame.point(c.point);
        out.push_str(&format!(
            "  <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"6\" fill=\"none\" \
             stroke=\"#dc2626\" stroke-width=\"2\"/>\n"
        ));
        out.push_str(&format!(
            "  <line x1=\"{:.3}\" y1=\"{y:.3}\" x2=\"{:.3}\" y2=\"{y:.3}\" \
             stroke=\"#dc2626\" stroke-width=\"2\"/>\n",
            x - 9.0,
            x + 9.0
        ));
    }

    out.push_str("</svg>\n");
    out
}
