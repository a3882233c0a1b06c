//! Faces of the convex support: the face through a point, dimension
//! semicontinuity probes along curves, image-face inclusion checks, planar
//! gauge functions, and one hand-built convex body that falsifies naive
//! continuity assumptions.

use crate::error::{Error, Result};
use crate::expectation::{ExpectedValue, FaceDescriptor, ObservableSet};
use crate::linalg::{C64, ComplexMatrix, Projection, hermitian_eig};
use crate::maxent::{SolverOptions, maxent};
use crate::numerical_range::{BoundaryAtlas, golden_min};
use crate::states::DensityMatrix;
use crate::tol;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// The unique face of the convex support containing `alpha` in its relative
/// interior, computed by the solver's exposure recursion: interior targets
/// get the whole body, boundary targets the certified exposed face.
pub fn face_of(set: &ObservableSet, alpha: &ExpectedValue) -> Result<FaceDescriptor> {
    face_of_with(set, alpha, &SolverOptions::default())
}

/// [`face_of`] with explicit solver options.
pub fn face_of_with(
    set: &ObservableSet,
    alpha: &ExpectedValue,
    opts: &SolverOptions,
) -> Result<FaceDescriptor> {
    Ok(maxent(set, alpha, opts)?.face().clone())
}

/// Face dimensions recorded along a curve in the convex support.
///
/// `lsc_violated` is the finite-sample surrogate of lower semicontinuity
/// failure: the dimension at the limit exceeds the smallest dimension on the
/// eventual (closest to the limit) half of the schedule.
#[derive(Clone, Debug)]
pub struct CurveProbe {
    pub schedule: Vec<f64>,
    pub dims_along: Vec<usize>,
    pub dim_at_limit: usize,
    pub lsc_violated: bool,
}

/// Evaluates [`face_of`] along `curve(eps)` for each scheduled `eps` and at
/// the limit `curve(0)`.
pub fn lsc_probe(
    set: &ObservableSet,
    curve: impl Fn(f64) -> ExpectedValue,
    schedule: &[f64],
) -> Result<CurveProbe> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty probe schedule".into()));
    }
    let mut dims = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        dims.push(face_of(set, &curve(eps))?.dim());
    }
    let dim_at_limit = face_of(set, &curve(0.0))?.dim();
    Ok(CurveProbe {
        schedule: schedule.to_vec(),
        dims_along: dims.clone(),
        dim_at_limit,
        lsc_violated: lsc_verdict(&dims, dim_at_limit),
    })
}

fn lsc_verdict(dims_along: &[usize], dim_at_limit: usize) -> bool {
    let tail = dims_along.len().div_ceil(2);
    let eventual_min = dims_along[dims_along.len() - tail..]
        .iter()
        .copied()
        .min()
        .unwrap_or(usize::MAX);
    dim_at_limit > eventual_min
}

/// Outcome of checking that the image of a state's face lands inside the
/// face of its expected-value tuple.
#[derive(Clone, Debug)]
pub struct InclusionReport {
    /// `||(1 - p) q||_F` for `q` the state's support and `p` the face
    /// support at the target; zero iff the supports nest.
    pub support_residual: f64,
    /// Worst violation of the supporting hyperplanes in the exposure chain
    /// by sampled extreme points of the image face.
    pub hyperplane_defect: f64,
    pub samples: usize,
    pub inclusion: bool,
    /// For a state that is itself the maximum-entropy state of its target:
    /// whether the image face dimension equals the face dimension. Absent
    /// otherwise.
    pub dims_equal: Option<bool>,
}

/// Verifies that the expected values of the face of `rho` (the states
/// supported on `rho`'s support) stay inside the face of `E(rho)`, and, when
/// `rho` is the maximum-entropy state there, that the dimensions agree.
pub fn image_face_inclusion_check(set: &ObservableSet, rho: &DensityMatrix) -> Result<InclusionReport> {
    let w = set.expected_values(rho)?;
    let sol = maxent(set, &w, &SolverOptions::default())?;
    let face = sol.face();
    let p = face.projection().matrix();

    let q = support_projection(rho);
    let pq = p.mul(q.matrix())?;
    let support_residual = q.matrix().sub(&pq)?.frobenius_norm();

    let basis = q.orthonormal_basis();
    let k = basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1c1a5);
    let mut defect: f64 = 0.0;
    let samples = 32;
    for _ in 0..samples {
        let coeffs = crate::fixtures::random_unit_vector(&mut rng, k);
        let v = basis.embed_vector(&coeffs);
        let pure = DensityMatrix::new(ComplexMatrix::outer(&v))?;
        let e = set.expected_values(&pure)?;
        for lambda in face.exposure_chain() {
            let d = (e.dot(lambda) - w.dot(lambda)).abs();
            defect = defect.max(d);
        }
    }
    let scale = 1.0 + w.coords().iter().map(|x| x.abs()).fold(0.0, f64::max);
    let inclusion = support_residual <= 1e-7 && defect <= 1e-7 * scale;

    let dims_equal = if crate::states::trace_distance(rho, sol.state())? <= 1e-7 {
        let image_dim = set.face_dimension(&q)?;
        Some(image_dim == face.dim())
    } else {
        None
    };
    Ok(InclusionReport {
        support_residual,
        hyperplane_defect: defect,
        samples,
        inclusion,
        dims_equal,
    })
}

fn support_projection(rho: &DensityMatrix) -> Projection {
    let dec = hermitian_eig(&crate::linalg::HermitianMatrix::with_tolerance(
        rho.matrix().clone(),
        1e-9,
    )
    .unwrap());
    let cols: Vec<Vec<C64>> = dec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > tol::SUPPORT_RANK)
        .map(|(k, _)| dec.column(k))
        .collect();
    Projection::from_orthonormal_columns(rho.dim(), &cols)
}

/// Value of the planar gauge of `L - w` at `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gauge {
    Finite(f64),
    /// `v` leaves the body immediately: it points outside `pos(L - w)`.
    Infinite,
}

impl Gauge {
    pub fn finite(self) -> Option<f64> {
        match self {
            Gauge::Finite(x) => Some(x),
            Gauge::Infinite => None,
        }
    }
}

/// Gauge (Minkowski functional) of `L - w` evaluated at `v`, via the exit
/// time `t* = sup{t >= 0: w + t v in W}`: the gauge is `1/t*`, infinite when
/// the ray leaves immediately.
///
/// The exit time is the minimum over supporting lines of
/// `(h(theta) - Re(e^{-i theta} w)) / Re(e^{-i theta} v)` over angles with a
/// positive denominator, minimized on the atlas grid and then refined with
/// exact support evaluations, so tangent rays at smooth boundary points
/// drive the exit time to zero instead of inheriting grid resolution.
pub fn gauge_2d(atlas: &BoundaryAtlas, w: C64, v: C64) -> Result<Gauge> {
    if v.norm() == 0.0 {
        return Err(Error::InvalidArgument("gauge direction must be nonzero".into()));
    }
    let gap = atlas.support_gap(w);
    if gap > 1e-8 {
        return Err(Error::OutOfRange(format!(
            "gauge base point {w} lies outside the body by {gap:e}"
        )));
    }
    let ratio_at = |theta: f64, h: f64| -> f64 {
        let n = C64::from_polar(1.0, -theta);
        let den = (v * n).re;
        if den <= 1e-12 {
            return f64::INFINITY;
        }
        let num = (h - (w * n).re).max(0.0);
        num / den
    };
    let mut best = f64::INFINITY;
    let mut best_theta = 0.0;
    for (k, &theta) in atlas.angles().iter().enumerate() {
        let r = ratio_at(theta, atlas.support_values()[k]);
        if r < best {
            best = r;
            best_theta = theta;
        }
    }
    if !best.is_finite() {
        return Ok(Gauge::Infinite);
    }
    let step = TAU / atlas.resolution() as f64;
    let (_, t_star) = golden_min(
        |t| ratio_at(t, atlas.support_at(t)),
        best_theta - step,
        best_theta + step,
        80,
    );
    let t_star = t_star.min(best).max(0.0);
    if t_star <= 1e-9 {
        return Ok(Gauge::Infinite);
    }
    Ok(Gauge::Finite(1.0 / t_star))
}

/// Verdict of scanning the gauge over boundary directions.
#[derive(Clone, Debug)]
pub struct GaugeScan {
    pub max_gauge: f64,
    /// Direction achieving `max_gauge`.
    pub witness: Option<C64>,
    /// Set when the gauge exceeds the unboundedness threshold.
    pub unbounded: bool,
    pub sampled: usize,
}

/// Samples the gauge of `L - w` over `n_directions` unit directions and
/// refines around the largest finite value, since a gauge blowing up toward
/// a tangent direction is visible on a uniform grid only as a growing finite
/// ridge. Reports unbounded when the refined maximum passes the threshold.
pub fn gauge_boundedness_scan(atlas: &BoundaryAtlas, w: C64, n_directions: usize) -> Result<GaugeScan> {
    if n_directions < 8 {
        return Err(Error::InvalidArgument("scan needs at least 8 directions".into()));
    }
    let gap = atlas.support_gap(w);
    if gap > 1e-8 {
        return Err(Error::OutOfRange(format!(
            "scan base point {w} lies outside the body by {gap:e}"
        )));
    }
    let gauge_at = |phi: f64| -> f64 {
        match gauge_2d(atlas, w, C64::from_polar(1.0, phi)) {
            Ok(Gauge::Finite(g)) => g,
            _ => 0.0,
        }
    };
    let mut max_gauge: f64 = 0.0;
    let mut best_phi = 0.0;
    for j in 0..n_directions {
        let phi = TAU * j as f64 / n_directions as f64;
        let g = gauge_at(phi);
        if g > max_gauge {
            max_gauge = g;
            best_phi = phi;
        }
        if max_gauge > tol::GAUGE_UNBOUNDED {
            return Ok(GaugeScan {
                max_gauge,
                witness: Some(C64::from_polar(1.0, phi)),
                unbounded: true,
                sampled: j + 1,
            });
        }
    }
    if max_gauge == 0.0 {
        return Ok(GaugeScan { max_gauge, witness: None, unbounded: false, sampled: n_directions });
    }
    // Chase the ridge: golden ascent of the gauge around the grid maximum,
    // stopping as soon as the threshold is passed.
    let step = TAU / n_directions as f64;
    let mut lo = best_phi - step;
    let mut hi = best_phi + step;
    for _ in 0..200 {
        let (phi, neg) = golden_min(|p| -gauge_at(p), lo, hi, 8);
        let g = -neg;
        if g > max_gauge {
            max_gauge = g;
            best_phi = phi;
        }
        if max_gauge > tol::GAUGE_UNBOUNDED {
            return Ok(GaugeScan {
                max_gauge,
                witness: Some(C64::from_polar(1.0, best_phi)),
                unbounded: true,
                sampled: n_directions,
            });
        }
        let width = hi - lo;
        if width < 1e-12 {
            break;
        }
        lo = best_phi - 0.25 * width;
        hi = best_phi + 0.25 * width;
    }
    Ok(GaugeScan {
        max_gauge,
        witness: Some(C64::from_polar(1.0, best_phi)),
        unbounded: false,
        sampled: n_directions,
    })
}

/// Membership in the skewed cone body: the convex hull of the circle
/// `(s-1)^2 + t^2 = 1` in the `z = 0` plane and the two apexes `(0, 0, +-1)`.
/// Cross-sections are the disks of center `1 - |z|` and radius `1 - |z|`.
pub fn skew_cone_contains(x: f64, y: f64, z: f64) -> bool {
    membership_excess(x, y, z) <= 1e-9
}

/// How far outside the body the point sits (zero inside, positive outside).
fn membership_excess(x: f64, y: f64, z: f64) -> f64 {
    if z.abs() > 1.0 {
        return z.abs() - 1.0;
    }
    let r = 1.0 - z.abs();
    let d = ((x - r).powi(2) + y * y).sqrt();
    (d - r).max(0.0)
}

/// Analytic face dimension of a point of the skewed cone.
///
/// The extreme points are the circle points with `s != 0` and the two
/// apexes; `(0, 0, 0)` is an interior point of the vertical segment between
/// the apexes, so its face has dimension 1 even though every neighborhood on
/// the circle consists of extreme points: dimension is not lower
/// semicontinuous there. The boundary otherwise consists of slant segments
/// (dimension 1); there are no two-dimensional faces.
pub fn skew_cone_face_dim(x: f64, y: f64, z: f64) -> Result<usize> {
    let tol_m = 1e-9;
    if membership_excess(x, y, z) > tol_m {
        return Err(Error::OutOfRange(format!(
            "({x}, {y}, {z}) is outside the skewed cone"
        )));
    }
    let r = 1.0 - z.abs();
    let boundary_disk = {
        let d = ((x - r).powi(2) + y * y).sqrt();
        (d - r).abs() <= tol_m
    };
    if z.abs() < 1.0 - tol_m && !boundary_disk {
        return Ok(3);
    }
    if z.abs() >= 1.0 - tol_m {
        return Ok(0);
    }
    if x * x + y * y <= tol_m * tol_m {
        return Ok(1);
    }
    if z.abs() <= tol_m {
        return Ok(0);
    }
    Ok(1)
}

/// Point of the extreme circle at angle `phi`: `(1 + cos phi, sin phi, 0)`.
pub fn skew_cone_circle_point(phi: f64) -> (f64, f64, f64) {
    (1.0 + phi.cos(), phi.sin(), 0.0)
}

/// Face dimensions along the extreme circle approaching the origin,
/// compared with the dimension at the origin itself.
pub fn skew_cone_probe(schedule: &[f64]) -> Result<CurveProbe> {
    let mut dims = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let (x, y, z) = skew_cone_circle_point(std::f64::consts::PI - eps);
        dims.push(skew_cone_face_dim(x, y, z)?);
    }
    let dim_at_limit = skew_cone_face_dim(0.0, 0.0, 0.0)?;
    Ok(CurveProbe {
        schedule: schedule.to_vec(),
        dims_along: dims.clone(),
        dim_at_limit,
        lsc_violated: lsc_verdict(&dims, dim_at_limit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numerical_range::boundary_sweep;

    #[test]
    fn face_of_segment_and_its_idempotence() {
        let set = fixtures::segment_triple();
        let mid = face_of(&set, &fixtures::segment_triple_target(0.0)).unwrap();
        assert_eq!(mid.dim(), 1);
        assert_eq!(mid.projection().rank(), 2);
        // Another relative-interior point of the same segment.
        let off = ExpectedValue::new(vec![1.0, 1.0, 0.3]);
        let again = face_of(&set, &off).unwrap();
        let d = mid
            .projection()
            .matrix()
            .sub(again.projection().matrix())
            .unwrap()
            .frobenius_norm();
        assert!(d < 1e-8, "projections differ by {d:e}");

        let exposed = face_of(&set, &fixtures::segment_triple_target(0.1)).unwrap();
        assert_eq!(exposed.dim(), 0);

        let interior = face_of(&set, &ExpectedValue::new(vec![0.1, 0.1, 0.05])).unwrap();
        assert!(interior.is_whole_body());
    }

    #[test]
    fn lsc_probe_flags_the_segment_curve_and_not_the_circle() {
        let set = fixtures::segment_triple();
        let schedule: Vec<f64> = (1..=6).map(|k| 0.4_f64.powi(k)).collect();
        let probe = lsc_probe(&set, fixtures::segment_triple_target, &schedule).unwrap();
        assert!(probe.dims_along.iter().all(|&d| d == 0));
        assert_eq!(probe.dim_at_limit, 1);
        assert!(probe.lsc_violated);

        let pair = fixtures::disk_with_eigenvalue_pair();
        let circle = |eps: f64| ExpectedValue::new(vec![eps.cos(), eps.sin()]);
        let probe = lsc_probe(&pair, circle, &schedule).unwrap();
        assert!(probe.dims_along.iter().all(|&d| d == 0));
        assert_eq!(probe.dim_at_limit, 0);
        assert!(!probe.lsc_violated);

        let inner = |eps: f64| ExpectedValue::new(vec![0.1 + eps, 0.05]);
        let probe = lsc_probe(&pair, inner, &schedule).unwrap();
        assert!(probe.dims_along.iter().all(|&d| d == 2));
        assert_eq!(probe.dim_at_limit, 2);
        assert!(!probe.lsc_violated);
    }

    #[test]
    fn inclusion_check_on_face_center_and_fiber_mates() {
        let set = fixtures::segment_triple();
        let center = fixtures::segment_face_center();
        let rep = image_face_inclusion_check(&set, &center).unwrap();
        assert!(rep.inclusion, "center report: {rep:?}");
        assert_eq!(rep.dims_equal, Some(true));

        // A rank-one member of the same fiber: inclusion must hold, the
        // dimension comparison does not apply (it is not the entropy
        // maximizer).
        let v = crate::states::PureStateVector::normalized(vec![
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let pure = DensityMatrix::from_vector(&v);
        let e = set.expected_values(&pure).unwrap();
        assert!((e.coords()[2] - 0.5).abs() < 1e-12, "fiber mate has target {e:?}");
        let rep = image_face_inclusion_check(&set, &pure).unwrap();
        assert!(rep.inclusion, "pure report: {rep:?}");
        assert_eq!(rep.dims_equal, None);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let full = fixtures::random_density(&mut rng, 3);
        let rep = image_face_inclusion_check(&set, &full).unwrap();
        assert!(rep.inclusion);
    }

    #[test]
    fn gauge_on_the_disk() {
        let disk = ComplexMatrix::from_real(2, &[0., 2., 0., 0.]).unwrap();
        let atlas = boundary_sweep(&disk, 2048).unwrap();
        // Center: gauge is the Euclidean norm, 1 on unit vectors.
        for phi in [0.0, 0.7, 2.1] {
            let g = gauge_2d(&atlas, C64::new(0.0, 0.0), C64::from_polar(1.0, phi))
                .unwrap()
                .finite()
                .unwrap();
            assert!((g - 1.0).abs() < 1e-5, "gauge at center: {g}");
        }
        // Boundary point, tangent direction: immediate exit.
        let w = C64::new(1.0, 0.0);
        assert_eq!(gauge_2d(&atlas, w, C64::new(0.0, 1.0)).unwrap(), Gauge::Infinite);
        // Boundary point, inward: chord of length 2.
        let g = gauge_2d(&atlas, w, C64::new(-1.0, 0.0)).unwrap().finite().unwrap();
        assert!((g - 0.5).abs() < 1e-6, "diameter gauge: {g}");
        // Degree-one homogeneity.
        let g1 = gauge_2d(&atlas, w, C64::new(-0.3, 0.2)).unwrap().finite().unwrap();
        let g3 = gauge_2d(&atlas, w, C64::new(-0.9, 0.6)).unwrap().finite().unwrap();
        assert!((g3 - 3.0 * g1).abs() < 1e-8 * g3.max(1.0), "homogeneity: {g1} vs {g3}");
        // Outside point rejected.
        assert!(gauge_2d(&atlas, C64::new(1.1, 0.0), C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn gauge_on_the_square() {
        let atlas = boundary_sweep(&fixtures::square_matrix(), 2048).unwrap();
        let vertex = C64::new(1.0, 1.0);
        let g = gauge_2d(&atlas, vertex, C64::new(-1.0, 0.0)).unwrap().finite().unwrap();
        assert!((g - 0.5).abs() < 1e-6, "edge gauge: {g}");
        let g = gauge_2d(&atlas, vertex, C64::new(-1.0, -1.0)).unwrap().finite().unwrap();
        assert!((g - 0.5).abs() < 1e-6, "diagonal gauge: {g}");
    }

    #[test]
    fn boundedness_scan_separates_vertex_disk_and_interior() {
        let atlas = boundary_sweep(&fixtures::square_matrix(), 2048).unwrap();
        let scan = gauge_boundedness_scan(&atlas, C64::new(1.0, 1.0), 256).unwrap();
        assert!(!scan.unbounded, "square vertex scan: {scan:?}");

        let disk = ComplexMatrix::from_real(2, &[0., 2., 0., 0.]).unwrap();
        let atlas = boundary_sweep(&disk, 2048).unwrap();
        let scan = gauge_boundedness_scan(&atlas, C64::new(1.0, 0.0), 256).unwrap();
        assert!(scan.unbounded, "disk boundary scan: {scan:?}");
        assert!(scan.witness.is_some());

        let scan = gauge_boundedness_scan(&atlas, C64::new(0.2, -0.1), 64).unwrap();
        assert!(!scan.unbounded);
    }

    #[test]
    fn skew_cone_membership_and_dimensions() {
        assert_eq!(skew_cone_face_dim(2.0, 0.0, 0.0).unwrap(), 0);
        assert_eq!(skew_cone_face_dim(0.0, 0.0, 0.0).unwrap(), 1);
        assert_eq!(skew_cone_face_dim(0.0, 0.0, 1.0).unwrap(), 0);
        assert_eq!(skew_cone_face_dim(0.0, 0.0, -1.0).unwrap(), 0);
        assert_eq!(skew_cone_face_dim(0.0, 0.0, 0.4).unwrap(), 1);
        assert_eq!(skew_cone_face_dim(1.0, 0.0, 0.2).unwrap(), 3);
        // Slant surface point: midpoint of the segment from the apex
        // (0,0,1) to the circle point (2,0,0).
        assert_eq!(skew_cone_face_dim(1.0, 0.0, 0.5).unwrap(), 1);
        assert!(skew_cone_face_dim(2.5, 0.0, 0.0).is_err());
        assert!(skew_cone_contains(1.0, 0.9, 0.0));
        assert!(!skew_cone_contains(1.0, 0.9, 0.5));
    }

    #[test]
    fn skew_cone_probe_shows_the_dimension_jump_at_the_origin() {
        let schedule: Vec<f64> = (1..=8).map(|k| 0.5_f64.powi(k)).collect();
        let probe = skew_cone_probe(&schedule).unwrap();
        assert!(probe.dims_along.iter().all(|&d| d == 0));
        assert_eq!(probe.dim_at_limit, 1);
        assert!(probe.lsc_violated);
    }
}
