//! Boundary geometry of the planar numerical range `W(u1 + i u2)`.
//!
//! A supporting-line sweep writes down, for a grid of angles, the support
//! value `h(theta) = lambda_max(cos(theta) u1 + sin(theta) u2)` and the
//! boundary points attained there. Degenerate top eigenvalues between grid
//! angles are hunted down by golden-section refinement, since a flat facet
//! or a multiply generated round point exposed strictly between two grid
//! angles leaves only an indirect trace on the grid: a jump of the exposed
//! point or a dip of the spectral gap.
//!
//! On top of the sweep sit the boundary-point taxonomy (corner, flat, round,
//! singly or multiply generated), unitary reducibility splitting, the scan
//! for discontinuity candidates of the inference map, and the full planar
//! classification for 3x3 matrices.

use crate::error::{Error, Result};
use crate::expectation::ObservableSet;
use crate::linalg::{
    C64, ComplexMatrix, HermitianMatrix, OrthonormalBasis, SpectralDecomposition, commutant_basis,
    hermitian_eig,
};
use crate::maxent::{SolverOptions, maxent};
use crate::states::DensityMatrix;
use crate::tol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Splits a matrix into its Hermitian and anti-Hermitian-over-i parts, the
/// two observables with `a = u1 + i u2`.
pub fn pair_from_matrix(a: &ComplexMatrix) -> Result<ObservableSet> {
    let astar = a.adjoint();
    let u1 = a.add(&astar)?.scale(C64::new(0.5, 0.0));
    let u2 = a.sub(&astar)?.scale(C64::new(0.0, -0.5));
    ObservableSet::new(vec![HermitianMatrix::new(u1)?, HermitianMatrix::new(u2)?])
}

/// Rebuilds `u1 + i u2` from the first two observables of a set.
pub fn matrix_from_pair(set: &ObservableSet) -> Result<ComplexMatrix> {
    if set.len() < 2 {
        return Err(Error::InvalidArgument(
            "a planar sweep needs two observables".into(),
        ));
    }
    set.observable(0)
        .matrix()
        .add(&set.observable(1).matrix().scale(C64::new(0.0, 1.0)))
}

fn hermitian_parts(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let astar = a.adjoint();
    let u1 = a.add(&astar).unwrap().scale(C64::new(0.5, 0.0));
    let u2 = a.sub(&astar).unwrap().scale(C64::new(0.0, -0.5));
    (u1, u2)
}

/// `cos(theta) u1 + sin(theta) u2`, the Hermitian part of `e^{-i theta} a`.
fn rotated_real(u1: &ComplexMatrix, u2: &ComplexMatrix, theta: f64) -> HermitianMatrix {
    let m = u1
        .scale(C64::new(theta.cos(), 0.0))
        .add(&u2.scale(C64::new(theta.sin(), 0.0)))
        .unwrap();
    HermitianMatrix::with_tolerance(m, 1e-10).unwrap()
}

/// `-sin(theta) u1 + cos(theta) u2`, the imaginary part of `e^{-i theta} a`.
fn rotated_imag(u1: &ComplexMatrix, u2: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    u1.scale(C64::new(-theta.sin(), 0.0))
        .add(&u2.scale(C64::new(theta.cos(), 0.0)))
        .unwrap()
}

/// Golden-section minimizer for a continuous function on a bracket.
pub(crate) fn golden_min(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 { (x1, f1) } else { (x2, f2) }
}

/// One angle of the sweep: support value, exposed points, degeneracy data.
struct AngleSample {
    h: f64,
    /// Exposed boundary points in traversal order (one, or a flat's two
    /// endpoints ordered by increasing rotated imaginary part).
    points: Vec<C64>,
    /// Dimension of the merged top eigenspace.
    multiplicity: usize,
    /// Spectral width of the compressed imaginary part on that eigenspace.
    width: f64,
}

fn sample_angle(u1: &ComplexMatrix, u2: &ComplexMatrix, theta: f64) -> AngleSample {
    let dec = hermitian_eig(&rotated_real(u1, u2, theta));
    let d = dec.eigenvalues.len();
    let h = dec.eigenvalues[d - 1];
    let gap_tol = tol::DEGENERACY * (1.0 + h.abs());
    let k0 = dec.eigenvalues.partition_point(|&x| x < h - gap_tol);
    let mult = d - k0;
    let phase = C64::from_polar(1.0, theta);
    if mult == 1 {
        let v = dec.column(d - 1);
        let m = rotated_imag(u1, u2, theta).sandwich(&v, &v).re;
        return AngleSample {
            h,
            points: vec![phase * C64::new(h, m)],
            multiplicity: 1,
            width: 0.0,
        };
    }
    let cols: Vec<Vec<C64>> = (k0..d).map(|k| dec.column(k)).collect();
    let basis = OrthonormalBasis::new(d, cols).unwrap();
    let compressed = basis.compress(&rotated_imag(u1, u2, theta)).unwrap();
    let im_dec = hermitian_eig(&HermitianMatrix::with_tolerance(compressed, 1e-9).unwrap());
    let m_lo = im_dec.eigenvalues[0];
    let m_hi = im_dec.eigenvalues[mult - 1];
    let width = m_hi - m_lo;
    let points = if width > tol::FLAT_WIDTH {
        vec![phase * C64::new(h, m_lo), phase * C64::new(h, m_hi)]
    } else {
        vec![phase * C64::new(h, 0.5 * (m_lo + m_hi))]
    };
    AngleSample { h, points, multiplicity: mult, width }
}

fn top_gap(u1: &ComplexMatrix, u2: &ComplexMatrix, theta: f64) -> f64 {
    let dec = hermitian_eig(&rotated_real(u1, u2, theta));
    let d = dec.eigenvalues.len();
    dec.eigenvalues[d - 1] - dec.eigenvalues[d - 2]
}

/// A maximal line segment in the boundary, exposed at a single angle.
#[derive(Clone, Debug)]
pub struct FlatSegment {
    /// Angle of the outward normal.
    pub angle: f64,
    /// Endpoints ordered by boundary traversal (increasing angle).
    pub endpoints: (C64, C64),
}

impl FlatSegment {
    pub fn length(&self) -> f64 {
        (self.endpoints.1 - self.endpoints.0).norm()
    }
}

/// A boundary point where the supporting pencil has a degenerate top
/// eigenvalue but the exposed set is still a single point: a multiply
/// generated round point, the discontinuity suspects of the inference map.
#[derive(Clone, Debug)]
pub struct RoundDegeneracy {
    pub angle: f64,
    pub point: C64,
    pub multiplicity: usize,
}

/// Supporting-line description of `W(u1 + i u2)` on an angle grid.
#[derive(Clone, Debug)]
pub struct BoundaryAtlas {
    matrix: ComplexMatrix,
    angles: Vec<f64>,
    support_values: Vec<f64>,
    points: Vec<Vec<C64>>,
    flat_segments: Vec<FlatSegment>,
    resolution: usize,
}

impl BoundaryAtlas {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn support_values(&self) -> &[f64] {
        &self.support_values
    }

    /// Exposed boundary points per grid angle (two entries across a flat).
    pub fn points(&self) -> &[Vec<C64>] {
        &self.points
    }

    pub fn flat_segments(&self) -> &[FlatSegment] {
        &self.flat_segments
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Exact support value at an arbitrary angle (fresh eigensolve, not an
    /// interpolation).
    pub fn support_at(&self, theta: f64) -> f64 {
        let (u1, u2) = hermitian_parts(&self.matrix);
        let dec = hermitian_eig(&rotated_real(&u1, &u2, theta));
        dec.eigenvalues[dec.eigenvalues.len() - 1]
    }

    /// Boundary polyline in traversal order, grid points interleaved with
    /// refined flat endpoints.
    pub fn hull_points(&self) -> Vec<C64> {
        let step = TAU / self.resolution as f64;
        let mut refined: Vec<&FlatSegment> = self
            .flat_segments
            .iter()
            .filter(|f| {
                let k = (f.angle / step).round();
                (f.angle - k * step).abs() > 1e-9
            })
            .collect();
        refined.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        let mut out = Vec::with_capacity(self.resolution + 2 * refined.len());
        let mut r = 0;
        for (k, pts) in self.points.iter().enumerate() {
            let theta = k as f64 * step;
            while r < refined.len() && refined[r].angle < theta {
                out.push(refined[r].endpoints.0);
                out.push(refined[r].endpoints.1);
                r += 1;
            }
            out.extend_from_slice(pts);
        }
        for f in &refined[r..] {
            out.push(f.endpoints.0);
            out.push(f.endpoints.1);
        }
        out
    }

    /// `max_theta Re(e^{-i theta} z) - h(theta)`, refined around the grid
    /// argmax. Negative inside, zero on the boundary, positive outside.
    pub fn support_gap(&self, z: C64) -> f64 {
        let (u1, u2) = hermitian_parts(&self.matrix);
        let g = |theta: f64| {
            let dec = hermitian_eig(&rotated_real(&u1, &u2, theta));
            let h = dec.eigenvalues[dec.eigenvalues.len() - 1];
            (z * C64::from_polar(1.0, -theta)).re - h
        };
        let n = self.resolution;
        let step = TAU / n as f64;
        let mut best_k = 0;
        let mut best = f64::NEG_INFINITY;
        for k in 0..n {
            let v = (z * C64::from_polar(1.0, -self.angles[k])).re - self.support_values[k];
            if v > best {
                best = v;
                best_k = k;
            }
        }
        let center = best_k as f64 * step;
        let (_, neg_max) = golden_min(|t| -g(t), center - step, center + step, 60);
        -neg_max
    }

    /// Largest inward turn of the boundary polyline, in units of the local
    /// edge lengths. Zero (up to rounding) certifies convexity.
    pub fn convexity_defect(&self) -> f64 {
        let pts = self.hull_points();
        let n = pts.len();
        if n < 3 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        let min_edge = 1e-12;
        let mut hull: Vec<C64> = Vec::with_capacity(n);
        for p in pts {
            if hull.last().map_or(true, |q| (p - q).norm() > min_edge) {
                hull.push(p);
            }
        }
        let m = hull.len();
        if m < 3 {
            return 0.0;
        }
        for i in 0..m {
            let a = hull[i];
            let b = hull[(i + 1) % m];
            let c = hull[(i + 2) % m];
            let e1 = b - a;
            let e2 = c - b;
            let cross = e1.re * e2.im - e1.im * e2.re;
            let scale = e1.norm() * e2.norm();
            if scale > 0.0 {
                worst = worst.max(-cross / scale);
            }
        }
        worst
    }
}

struct SweepData {
    atlas: BoundaryAtlas,
    round_degeneracies: Vec<RoundDegeneracy>,
    degenerate_grid_angles: usize,
}

fn sweep_core(a: &ComplexMatrix, resolution: usize) -> Result<SweepData> {
    if a.dim() < 2 {
        return Err(Error::InvalidArgument(
            "numerical range sweeps need dimension at least 2".into(),
        ));
    }
    if resolution < 8 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} below the minimum of 8"
        )));
    }
    let (u1, u2) = hermitian_parts(a);
    let n = resolution;
    let step = TAU / n as f64;
    let samples: Vec<AngleSample> = (0..n).map(|k| sample_angle(&u1, &u2, k as f64 * step)).collect();

    let mut flats: Vec<FlatSegment> = Vec::new();
    let mut rounds: Vec<RoundDegeneracy> = Vec::new();
    let mut degenerate_grid = 0usize;
    for (k, s) in samples.iter().enumerate() {
        if s.multiplicity >= 2 {
            degenerate_grid += 1;
            let theta = k as f64 * step;
            if s.width > tol::FLAT_WIDTH {
                flats.push(FlatSegment { angle: theta, endpoints: (s.points[0], s.points[1]) });
            } else {
                rounds.push(RoundDegeneracy {
                    angle: theta,
                    point: s.points[0],
                    multiplicity: s.multiplicity,
                });
            }
        }
    }

    // When the grid is degenerate almost everywhere (direct sums of copies),
    // per-bracket refinement would only rediscover grid points.
    let saturated = degenerate_grid * 2 >= n;

    if !saturated {
        // Off-grid degeneracies announce themselves in one of two ways: the
        // exposed point jumps across a bracket (a flat seen edge-on), or the
        // spectral gap dips at a grid angle without closing (a tangential
        // contact, the signature of a multiply generated round point).
        let spacings: Vec<f64> = (0..n)
            .map(|k| {
                let p = *samples[k].points.last().unwrap();
                let q = samples[(k + 1) % n].points[0];
                (q - p).norm()
            })
            .collect();
        let mut sorted = spacings.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[n / 2];
        let jump_tol = (10.0 * median).max(1e-6);

        let mut brackets: Vec<(f64, f64)> = Vec::new();
        for (k, &sp) in spacings.iter().enumerate() {
            if sp > jump_tol {
                let lo = k as f64 * step;
                brackets.push((lo, lo + step));
            }
        }
        if a.dim() >= 2 {
            let gaps: Vec<f64> = (0..n).map(|k| top_gap(&u1, &u2, k as f64 * step)).collect();
            for k in 0..n {
                let prev = gaps[(k + n - 1) % n];
                let next = gaps[(k + 1) % n];
                let h = samples[k].h.abs();
                let trigger = 1e-2 * (1.0 + h);
                if gaps[k] < trigger
                    && gaps[k] <= prev
                    && gaps[k] <= next
                    && samples[k].multiplicity == 1
                {
                    let c = k as f64 * step;
                    brackets.push((c - step, c + step));
                }
            }
        }

        for (lo, hi) in brackets {
            let (theta_star, gap) = golden_min(|t| top_gap(&u1, &u2, t), lo, hi, 80);
            let s = sample_angle(&u1, &u2, theta_star);
            let gap_tol = tol::DEGENERACY * (1.0 + s.h.abs());
            if gap > gap_tol || s.multiplicity < 2 {
                continue;
            }
            if s.width > tol::FLAT_WIDTH {
                let dup = flats.iter().any(|f| {
                    angle_distance(f.angle, theta_star) < 1e-6
                        || (f.endpoints.0 - s.points[0]).norm() < 1e-6
                });
                if !dup {
                    flats.push(FlatSegment {
                        angle: normalize_angle(theta_star),
                        endpoints: (s.points[0], s.points[1]),
                    });
                }
            } else {
                let dup = rounds.iter().any(|r| (r.point - s.points[0]).norm() < 1e-6);
                if !dup {
                    rounds.push(RoundDegeneracy {
                        angle: normalize_angle(theta_star),
                        point: s.points[0],
                        multiplicity: s.multiplicity,
                    });
                }
            }
        }
    }

    flats.sort_by(|x, y| x.angle.total_cmp(&y.angle));
    rounds.sort_by(|x, y| x.angle.total_cmp(&y.angle));

    let atlas = BoundaryAtlas {
        matrix: a.clone(),
        angles: (0..n).map(|k| k as f64 * step).collect(),
        support_values: samples.iter().map(|s| s.h).collect(),
        points: samples.into_iter().map(|s| s.points).collect(),
        flat_segments: flats,
        resolution: n,
    };
    Ok(SweepData { atlas, round_degeneracies: rounds, degenerate_grid_angles: degenerate_grid })
}

fn normalize_angle(t: f64) -> f64 {
    let mut x = t % TAU;
    if x < 0.0 {
        x += TAU;
    }
    x
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (normalize_angle(a) - normalize_angle(b)).abs();
    d.min(TAU - d)
}

/// Sweeps the boundary of `W(a)` over `resolution` equispaced angles,
/// recording support values, exposed points, and flat segments (including
/// flats exposed strictly between grid angles).
pub fn boundary_sweep(a: &ComplexMatrix, resolution: usize) -> Result<BoundaryAtlas> {
    Ok(sweep_core(a, resolution)?.atlas)
}

/// Taxonomy of a boundary point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryClass {
    /// Lies on more than one supporting line.
    Corner,
    /// Interior to a flat segment of the boundary.
    FlatInterior,
    /// Endpoint of a flat segment.
    FlatEndpoint,
    /// Neither corner nor on a flat.
    Round,
}

/// How many linearly independent unit vectors attain the boundary value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorCount {
    Singly,
    /// At least two independent generators; `dim` is the dimension of the
    /// generating eigenspace slice (the merged top eigenspace for round
    /// points, the extreme eigenspace of the compressed imaginary part for
    /// flat endpoints, and 2 as a floor for flat interiors).
    Multiply { dim: usize },
}

/// Classification report for one boundary point.
#[derive(Clone, Debug)]
pub struct PointReport {
    pub class: BoundaryClass,
    /// Simplicial points (corners, flat points) admit a local simplicial
    /// cover, so the inference map is continuous there; round points do not.
    pub simplicial: bool,
    pub generators: GeneratorCount,
    /// Angle of a supporting line through the point.
    pub exposing_angle: f64,
}

/// Locates the angle whose supporting line passes through `z`, by grid
/// argmax of `Re(e^{-i theta} z) - h(theta)` plus golden refinement.
fn exposing_angle(atlas: &BoundaryAtlas, z: C64) -> f64 {
    let (u1, u2) = hermitian_parts(&atlas.matrix);
    let n = atlas.resolution;
    let step = TAU / n as f64;
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        let v = (z * C64::from_polar(1.0, -atlas.angles[k])).re - atlas.support_values[k];
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let center = best_k as f64 * step;
    let f = |t: f64| {
        let dec = hermitian_eig(&rotated_real(&u1, &u2, t));
        let h = dec.eigenvalues[dec.eigenvalues.len() - 1];
        h - (z * C64::from_polar(1.0, -t)).re
    };
    let (theta, _) = golden_min(f, center - step, center + step, 60);
    normalize_angle(theta)
}

/// Counts independent generators of the boundary value `z` of `W(a)`.
pub fn generator_count(a: &ComplexMatrix, z: C64, atlas: &BoundaryAtlas) -> Result<GeneratorCount> {
    let theta = exposing_angle(atlas, z);
    let (u1, u2) = hermitian_parts(a);
    let dec = hermitian_eig(&rotated_real(&u1, &u2, theta));
    let d = dec.eigenvalues.len();
    let h = dec.eigenvalues[d - 1];
    let gap_tol = tol::DEGENERACY * (1.0 + h.abs());
    let k0 = dec.eigenvalues.partition_point(|&x| x < h - gap_tol);
    let mult = d - k0;
    if mult == 1 {
        return Ok(GeneratorCount::Singly);
    }
    let cols: Vec<Vec<C64>> = (k0..d).map(|k| dec.column(k)).collect();
    let basis = OrthonormalBasis::new(d, cols).unwrap();
    let compressed = basis.compress(&rotated_imag(&u1, &u2, theta))?;
    let im_dec = hermitian_eig(&HermitianMatrix::with_tolerance(compressed, 1e-9)?);
    let m_lo = im_dec.eigenvalues[0];
    let m_hi = im_dec.eigenvalues[mult - 1];
    if m_hi - m_lo <= tol::FLAT_WIDTH {
        return Ok(GeneratorCount::Multiply { dim: mult });
    }
    let m_z = (z * C64::from_polar(1.0, -theta)).im;
    let im_tol = tol::DEGENERACY * (1.0 + m_hi.abs().max(m_lo.abs()));
    if (m_z - m_hi).abs() < 1e-6 {
        let count = im_dec.eigenvalues.iter().filter(|&&x| x >= m_hi - im_tol).count();
        return Ok(if count == 1 { GeneratorCount::Singly } else { GeneratorCount::Multiply { dim: count } });
    }
    if (m_z - m_lo).abs() < 1e-6 {
        let count = im_dec.eigenvalues.iter().filter(|&&x| x <= m_lo + im_tol).count();
        return Ok(if count == 1 { GeneratorCount::Singly } else { GeneratorCount::Multiply { dim: count } });
    }
    Ok(GeneratorCount::Multiply { dim: 2 })
}

fn point_segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * C64::new(t, 0.0))).norm()
}

/// Classifies a boundary point of the swept range.
pub fn classify_point(atlas: &BoundaryAtlas, z: C64) -> Result<PointReport> {
    let gap = atlas.support_gap(z);
    if gap.abs() > 1e-6 {
        return Err(Error::OutOfRange(format!(
            "point {z} is not on the boundary: support gap {gap:e}"
        )));
    }
    let expose_tol = 1e-7 * (1.0 + z.norm());
    let exposed_bins = atlas
        .angles
        .iter()
        .zip(&atlas.support_values)
        .filter(|(t, h)| (z * C64::from_polar(1.0, -**t)).re - **h >= -expose_tol)
        .count();
    let theta = exposing_angle(atlas, z);
    let generators = generator_count(&atlas.matrix, z, atlas)?;

    let class = if exposed_bins > 3 {
        BoundaryClass::Corner
    } else {
        let mut on_flat = None;
        for f in &atlas.flat_segments {
            if point_segment_distance(z, f.endpoints.0, f.endpoints.1) <= 1e-6 {
                let at_end = (z - f.endpoints.0).norm() <= 1e-6 || (z - f.endpoints.1).norm() <= 1e-6;
                on_flat = Some(at_end);
                break;
            }
        }
        match on_flat {
            Some(true) => BoundaryClass::FlatEndpoint,
            Some(false) => BoundaryClass::FlatInterior,
            None => BoundaryClass::Round,
        }
    };
    Ok(PointReport {
        class,
        simplicial: class != BoundaryClass::Round,
        generators,
        exposing_angle: theta,
    })
}

/// Result of the unitary block-diagonalization attempt.
#[derive(Clone, Debug)]
pub enum Reducibility {
    Irreducible,
    Reducible {
        /// Diagonal blocks, each itself irreducible, in conjugator order.
        blocks: Vec<ComplexMatrix>,
        /// Unitary `U` with `U* A U = blkdiag(blocks)`.
        conjugator: ComplexMatrix,
    },
}

impl Reducibility {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Reducibility::Irreducible)
    }
}

/// Splits `a` into unitarily irreducible blocks via the commutant of
/// `{a, a*}`: eigenspaces of a generic Hermitian commutant element are
/// invariant, and recursion on the compressions exhausts the splitting.
pub fn unitary_reducibility(a: &ComplexMatrix) -> Result<Reducibility> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (blocks, conjugator) = split_blocks(a, &mut rng)?;
    if blocks.len() == 1 {
        return Ok(Reducibility::Irreducible);
    }
    let mut rebuilt = ComplexMatrix::zeros(a.dim());
    let mut off = 0;
    for b in &blocks {
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                rebuilt.set(off + i, off + j, b.get(i, j));
            }
        }
        off += b.dim();
    }
    let conj = conjugator.adjoint().mul(a)?.mul(&conjugator)?;
    let residual = conj.sub(&rebuilt)?.frobenius_norm();
    if residual > tol::BLOCK_RESIDUAL * (1.0 + a.frobenius_norm()) {
        return Err(Error::SolverFailure(format!(
            "block split residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(Reducibility::Reducible { blocks, conjugator })
}

fn split_blocks(a: &ComplexMatrix, rng: &mut ChaCha8Rng) -> Result<(Vec<ComplexMatrix>, ComplexMatrix)> {
    let d = a.dim();
    if d == 1 {
        return Ok((vec![a.clone()], ComplexMatrix::identity(1)));
    }
    let comm = commutant_basis(&[a.clone()])?;
    if comm.len() == 1 {
        return Ok((vec![a.clone()], ComplexMatrix::identity(d)));
    }
    // A generic Hermitian commutant element has non-scalar spectrum; redraw
    // in the unlucky cases.
    let mut split: Option<SpectralDecomposition> = None;
    for _ in 0..16 {
        let mut y = ComplexMatrix::zeros(d);
        for b in &comm {
            let w = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            y = y.add(&b.scale(w))?;
        }
        let c = y.add(&y.adjoint())?.scale(C64::new(0.5, 0.0));
        let dec = hermitian_eig(&HermitianMatrix::with_tolerance(c, 1e-9)?);
        let spread = dec.eigenvalues[d - 1] - dec.eigenvalues[0];
        if spread > 1e-6 * (1.0 + dec.eigenvalues[d - 1].abs()) {
            split = Some(dec);
            break;
        }
    }
    let dec = split.ok_or_else(|| {
        Error::SolverFailure("commutant is non-trivial but no splitting element found".into())
    })?;
    let cluster_tol = 1e-8 * (1.0 + dec.eigenvalues[d - 1].abs() + dec.eigenvalues[0].abs());
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..d {
        match clusters.last_mut() {
            Some(c) if dec.eigenvalues[k] - dec.eigenvalues[c[0]] <= cluster_tol => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    let mut blocks = Vec::new();
    let mut columns: Vec<Vec<C64>> = Vec::new();
    for cluster in clusters {
        let cols: Vec<Vec<C64>> = cluster.iter().map(|&k| dec.column(k)).collect();
        let basis = OrthonormalBasis::new(d, cols)?;
        let sub = basis.compress(a)?;
        let (sub_blocks, sub_conj) = split_blocks(&sub, rng)?;
        let m = basis.len();
        for t in 0..m {
            let coeffs: Vec<C64> = (0..m).map(|s| sub_conj.get(s, t)).collect();
            columns.push(basis.embed_vector(&coeffs));
        }
        blocks.extend(sub_blocks);
    }
    let mut conj = ComplexMatrix::zeros(d);
    for (j, col) in columns.iter().enumerate() {
        for i in 0..d {
            conj.set(i, j, col[i]);
        }
    }
    Ok((blocks, conj))
}

/// Multiply generated round boundary points found by the sweep, the only
/// places where the planar inference map can fail to be open.
#[derive(Clone, Debug)]
pub struct DiscontinuityCandidates {
    pub points: Vec<RoundDegeneracy>,
    /// Set when the grid is degenerate almost everywhere, as happens for
    /// direct sums of two copies of one block: the whole circle of boundary
    /// points is multiply generated.
    pub whole_circle: bool,
    pub irreducible: bool,
    pub notes: Vec<String>,
}

/// Scans the boundary for multiply generated round points. For a unitarily
/// irreducible matrix of dimension `d <= 5` the count is bounded by
/// `max(0, d - 3)`; exceeding the bound means the resolution failed to
/// separate candidates and is reported as an error.
pub fn discontinuity_candidates(a: &ComplexMatrix, resolution: usize) -> Result<DiscontinuityCandidates> {
    let data = sweep_core(a, resolution)?;
    let irreducible = unitary_reducibility(a)?.is_irreducible();
    let mut notes = Vec::new();
    if data.degenerate_grid_angles * 2 >= resolution {
        if !irreducible {
            notes.push(
                "every swept angle is degenerate: the whole boundary circle is multiply \
                 generated; the map can nevertheless be open for such reducible forms"
                    .into(),
            );
        } else {
            notes.push("every swept angle is degenerate".into());
        }
        return Ok(DiscontinuityCandidates {
            points: data.round_degeneracies,
            whole_circle: true,
            irreducible,
            notes,
        });
    }
    let d = a.dim();
    let points = data.round_degeneracies;
    if irreducible && d <= 5 {
        let bound = d.saturating_sub(3);
        if points.len() > bound {
            return Err(Error::OutOfRange(format!(
                "found {} multiply generated round points for an irreducible {d}x{d} matrix \
                 (bound {bound}); the resolution {resolution} did not separate candidates",
                points.len()
            )));
        }
    }
    Ok(DiscontinuityCandidates { points, whole_circle: false, irreducible, notes })
}

/// Shape of a 3x3 numerical range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeTag {
    Ellipse,
    Ovular,
    FlatPortion,
    Triangle,
    Segment,
    Point,
    EllipseReducible,
    ConvEllipsePlusExteriorPoint,
    DiskWithBoundaryEigenvalue,
}

impl ShapeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ShapeTag::Ellipse => "ellipse",
            ShapeTag::Ovular => "ovular",
            ShapeTag::FlatPortion => "flat-portion",
            ShapeTag::Triangle => "triangle",
            ShapeTag::Segment => "segment",
            ShapeTag::Point => "point",
            ShapeTag::EllipseReducible => "ellipse-reducible",
            ShapeTag::ConvEllipsePlusExteriorPoint => "conv-ellipse-plus-exterior-point",
            ShapeTag::DiskWithBoundaryEigenvalue => "disk-with-boundary-eigenvalue",
        }
    }
}

/// The fiber over the one bad boundary point of a 3x3 range: a compressed
/// Bloch ball on which the inference map is open only at one pure state.
#[derive(Clone, Debug)]
pub struct ExceptionalFiber {
    pub point: C64,
    pub support_rank: usize,
    pub fiber_affine_dim: usize,
    /// Maximum-entropy state over the point, the center of the fiber ball.
    pub center: DensityMatrix,
    /// Limit of the unique nearby boundary generators: the only state of the
    /// fiber at which the inference map is open.
    pub open_point: DensityMatrix,
}

/// Full planar classification of a 3x3 pair.
#[derive(Clone, Debug)]
pub struct PlanarReport {
    pub shape: ShapeTag,
    /// The ellipse / ovular distinction rests on a least-squares conic fit,
    /// a numerical stand-in without an exact counterpart.
    pub shape_heuristic: bool,
    pub continuous: bool,
    pub exceptional: Option<ExceptionalFiber>,
    pub candidates: Vec<RoundDegeneracy>,
    pub notes: Vec<String>,
}

fn conic_fit_residual(points: &[C64]) -> f64 {
    let n = points.len();
    if n < 6 {
        return f64::INFINITY;
    }
    let cx = points.iter().map(|z| z.re).sum::<f64>() / n as f64;
    let cy = points.iter().map(|z| z.im).sum::<f64>() / n as f64;
    let scale = points
        .iter()
        .map(|z| ((z.re - cx).powi(2) + (z.im - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n as f64;
    let s = if scale > 0.0 { scale } else { 1.0 };
    let mut gram = vec![0.0f64; 36];
    for z in points {
        let x = (z.re - cx) / s;
        let y = (z.im - cy) / s;
        let row = [x * x, x * y, y * y, x, y, 1.0];
        for i in 0..6 {
            for j in 0..6 {
                gram[6 * i + j] += row[i] * row[j];
            }
        }
    }
    for g in gram.iter_mut() {
        *g /= n as f64;
    }
    let h = HermitianMatrix::from_real(6, &gram).unwrap();
    let dec = hermitian_eig(&h);
    dec.eigenvalues[0].max(0.0).sqrt()
}

/// W(B) of a non-normal 2x2 block is an ellipse; returns (focus1, focus2,
/// major semi-axis).
fn block_ellipse(b: &ComplexMatrix) -> (C64, C64, f64) {
    let tr = b.trace();
    let det = b.get(0, 0) * b.get(1, 1) - b.get(0, 1) * b.get(1, 0);
    let disc = tr * tr - det * C64::new(4.0, 0.0);
    let root = disc.sqrt();
    let l1 = (tr + root) * C64::new(0.5, 0.0);
    let l2 = (tr - root) * C64::new(0.5, 0.0);
    let frob2 = b.frobenius_norm().powi(2);
    let minor2 = (frob2 - l1.norm_sqr() - l2.norm_sqr()).max(0.0);
    let major = 0.5 * (minor2 + (l1 - l2).norm_sqr()).sqrt();
    (l1, l2, major)
}

fn is_normal(m: &ComplexMatrix) -> bool {
    let comm = m
        .mul(&m.adjoint())
        .unwrap()
        .sub(&m.adjoint().mul(m).unwrap())
        .unwrap();
    comm.frobenius_norm() <= 1e-10 * (1.0 + m.frobenius_norm().powi(2))
}

fn hull_shape_of_points(zs: &[C64]) -> ShapeTag {
    let scale = 1.0 + zs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol_pt = 1e-9 * scale;
    let mut distinct: Vec<C64> = Vec::new();
    for &z in zs {
        if distinct.iter().all(|w| (z - w).norm() > tol_pt) {
            distinct.push(z);
        }
    }
    match distinct.len() {
        1 => ShapeTag::Point,
        2 => ShapeTag::Segment,
        _ => {
            let (a, b, c) = (distinct[0], distinct[1], distinct[2]);
            let area = ((b - a).re * (c - a).im - (b - a).im * (c - a).re).abs();
            if area <= 1e-9 * scale * scale {
                ShapeTag::Segment
            } else {
                ShapeTag::Triangle
            }
        }
    }
}

/// Classifies the numerical range of a 3x3 pair and decides whether the
/// planar inference map is continuous, reporting the exceptional fiber when
/// it is not.
pub fn analyze_3x3(u1: &HermitianMatrix, u2: &HermitianMatrix) -> Result<PlanarReport> {
    if u1.dim() != 3 || u2.dim() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "planar 3x3 analysis got dimensions {} and {}",
            u1.dim(),
            u2.dim()
        )));
    }
    let a = u1.matrix().add(&u2.matrix().scale(C64::new(0.0, 1.0)))?;
    let resolution = 2048;
    let reducibility = unitary_reducibility(&a)?;
    let mut notes = Vec::new();

    match &reducibility {
        Reducibility::Irreducible => {
            let scan = discontinuity_candidates(&a, resolution)?;
            let atlas = boundary_sweep(&a, resolution)?;
            let shape = if !atlas.flat_segments().is_empty() {
                ShapeTag::FlatPortion
            } else if conic_fit_residual(&atlas.hull_points()) <= tol::ELLIPSE_FIT {
                ShapeTag::Ellipse
            } else {
                ShapeTag::Ovular
            };
            let heuristic = shape != ShapeTag::FlatPortion;
            if heuristic {
                notes.push("ellipse vs ovular decided by a conic-fit heuristic".into());
            }
            Ok(PlanarReport {
                shape,
                shape_heuristic: heuristic,
                continuous: scan.points.is_empty(),
                exceptional: None,
                candidates: scan.points,
                notes,
            })
        }
        Reducibility::Reducible { blocks, .. } => {
            let mut sizes: Vec<usize> = blocks.iter().map(|b| b.dim()).collect();
            sizes.sort_unstable();
            if sizes == [1, 1, 1] {
                let zs: Vec<C64> = blocks.iter().map(|b| b.get(0, 0)).collect();
                return Ok(PlanarReport {
                    shape: hull_shape_of_points(&zs),
                    shape_heuristic: false,
                    continuous: true,
                    exceptional: None,
                    candidates: Vec::new(),
                    notes,
                });
            }
            let (two, one): (&ComplexMatrix, &ComplexMatrix) = if blocks[0].dim() == 2 {
                (&blocks[0], &blocks[1])
            } else {
                (&blocks[1], &blocks[0])
            };
            let z = one.get(0, 0);
            if is_normal(two) {
                let l = hermitian_eig_pair_eigenvalues(two);
                let zs = vec![l.0, l.1, z];
                return Ok(PlanarReport {
                    shape: hull_shape_of_points(&zs),
                    shape_heuristic: false,
                    continuous: true,
                    exceptional: None,
                    candidates: Vec::new(),
                    notes,
                });
            }
            let (f1, f2, major) = block_ellipse(two);
            let focal_sum = (z - f1).norm() + (z - f2).norm();
            let scale = 1.0 + a.frobenius_norm();
            if focal_sum < 2.0 * major - 1e-7 * scale {
                Ok(PlanarReport {
                    shape: ShapeTag::EllipseReducible,
                    shape_heuristic: false,
                    continuous: true,
                    exceptional: None,
                    candidates: Vec::new(),
                    notes,
                })
            } else if focal_sum > 2.0 * major + 1e-7 * scale {
                Ok(PlanarReport {
                    shape: ShapeTag::ConvEllipsePlusExteriorPoint,
                    shape_heuristic: false,
                    continuous: true,
                    exceptional: None,
                    candidates: Vec::new(),
                    notes,
                })
            } else {
                let exceptional = exceptional_fiber(u1, u2, &a, z, resolution)?;
                notes.push(format!(
                    "inference on the 3x3 state space is discontinuous exactly over {z}; \
                     within its fiber the map is open only at the recorded pure state"
                ));
                Ok(PlanarReport {
                    shape: ShapeTag::DiskWithBoundaryEigenvalue,
                    shape_heuristic: false,
                    continuous: false,
                    exceptional: Some(exceptional),
                    candidates: vec![RoundDegeneracy { angle: 0.0, point: z, multiplicity: 2 }],
                    notes,
                })
            }
        }
    }
}

fn hermitian_eig_pair_eigenvalues(b: &ComplexMatrix) -> (C64, C64) {
    // Normal 2x2: eigenvalues from trace and determinant.
    let tr = b.trace();
    let det = b.get(0, 0) * b.get(1, 1) - b.get(0, 1) * b.get(1, 0);
    let disc = tr * tr - det * C64::new(4.0, 0.0);
    let root = disc.sqrt();
    ((tr + root) * C64::new(0.5, 0.0), (tr - root) * C64::new(0.5, 0.0))
}

fn exceptional_fiber(
    u1: &HermitianMatrix,
    u2: &HermitianMatrix,
    a: &ComplexMatrix,
    z: C64,
    resolution: usize,
) -> Result<ExceptionalFiber> {
    let set = ObservableSet::new(vec![u1.clone(), u2.clone()])?;
    let target = crate::expectation::ExpectedValue::new(vec![z.re, z.im]);
    let sol = maxent(&set, &target, &SolverOptions::default())?;
    let support_rank = sol.face().projection().rank();
    let face_dim = sol.face().dim();
    let fiber_affine_dim = support_rank * support_rank - 1 - face_dim;

    let atlas = boundary_sweep(a, resolution)?;
    let theta = exposing_angle(&atlas, z);
    let (p1, p2) = hermitian_parts(a);
    let open_point = {
        let delta = 1e-5;
        let dec = hermitian_eig(&rotated_real(&p1, &p2, theta + delta));
        let v = dec.column(dec.eigenvalues.len() - 1);
        DensityMatrix::new(ComplexMatrix::outer(&v))?
    };
    Ok(ExceptionalFiber {
        point: z,
        support_rank,
        fiber_affine_dim,
        center: sol.state().clone(),
        open_point,
    })
}

/// One verified proper face of a 3x3 convex support with positive dimension.
#[derive(Clone, Debug)]
pub struct FacetFiberEntry {
    pub exposing_direction: Vec<f64>,
    pub support_rank: usize,
    pub face_dim: usize,
    /// Affine dimension of the fiber ball over relative-interior points.
    pub ball_dim: usize,
    pub boundary_samples: usize,
    pub singleton_confirmed: usize,
}

/// For each detected proper exposed face of positive dimension: confirms the
/// pre-image is a compressed Bloch ball (rank-2 support) and that sampled
/// relative-boundary points of the face have singleton fibers.
pub fn facet_fibers_3x3(set: &ObservableSet, directions: usize) -> Result<Vec<FacetFiberEntry>> {
    if set.dim() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "facet fiber analysis needs dimension 3, got {}",
            set.dim()
        )));
    }
    let whole = set.whole_body_face()?;
    let body_dim = whole.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0xface);
    let mut entries: Vec<FacetFiberEntry> = Vec::new();
    let mut seen: Vec<ComplexMatrix> = Vec::new();
    let r = set.len();
    let mut lambdas: Vec<Vec<f64>> = Vec::new();
    for i in 0..r {
        let mut e = vec![0.0; r];
        e[i] = 1.0;
        lambdas.push(e.clone());
        e[i] = -1.0;
        lambdas.push(e);
    }
    for _ in 0..directions {
        lambdas.push(crate::fixtures::random_direction(&mut rng, r));
    }
    for lambda in &lambdas {
        let face = set.exposed_face(lambda, tol::DEGENERACY)?;
        let rank = face.projection().rank();
        if rank != 2 {
            continue;
        }
        let dim = face.dim();
        if dim == 0 || dim >= body_dim {
            continue;
        }
        let pm = face.projection().matrix();
        if seen.iter().any(|q| q.sub(pm).unwrap().frobenius_norm() < 1e-6) {
            continue;
        }
        seen.push(pm.clone());

        let basis = face.projection().orthonormal_basis();
        let compressed = set.compress(&basis)?;
        let mut samples = 0usize;
        let mut confirmed = 0usize;
        for _ in 0..8 {
            let mu = crate::fixtures::random_direction(&mut rng, r);
            let pencil = compressed.pencil(&mu)?;
            let dec = hermitian_eig(&pencil);
            if dec.eigenvalues[1] - dec.eigenvalues[0] < 1e-6 {
                continue;
            }
            let v = dec.column(1);
            let full = basis.embed_vector(&v);
            let pure = DensityMatrix::new(ComplexMatrix::outer(&full))?;
            let alpha = set.expected_values(&pure)?;
            samples += 1;
            let sol = maxent(set, &alpha, &SolverOptions::default())?;
            let spectrum = sol.state().spectrum();
            let rank1 = spectrum.iter().filter(|&&x| x > tol::SUPPORT_RANK).count() == 1;
            let close = crate::states::trace_distance(sol.state(), &pure)? <= 1e-6;
            if rank1 && close {
                confirmed += 1;
            }
        }
        entries.push(FacetFiberEntry {
            exposing_direction: lambda.clone(),
            support_rank: rank,
            face_dim: dim,
            ball_dim: 3,
            boundary_samples: samples,
            singleton_confirmed: confirmed,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn unit_disk_matrix() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0., 2., 0., 0.]).unwrap()
    }

    #[test]
    fn disk_sweep_has_unit_support_and_no_flats() {
        let atlas = boundary_sweep(&unit_disk_matrix(), 720).unwrap();
        assert!(atlas.support_values().iter().all(|h| (h - 1.0).abs() < 1e-9));
        assert!(atlas.flat_segments().is_empty());
        assert!(atlas.convexity_defect() < 1e-7);
    }

    #[test]
    fn triangle_sweep_finds_three_flats_and_corners() {
        let atlas = boundary_sweep(&fixtures::triangle_matrix(), 720).unwrap();
        assert_eq!(atlas.flat_segments().len(), 3);
        for (v, n_adjacent) in [
            (C64::new(1.0, 0.0), 2),
            (C64::new(0.0, 1.0), 2),
            (C64::new(0.0, 0.0), 2),
        ] {
            let report = classify_point(&atlas, v).unwrap();
            assert_eq!(report.class, BoundaryClass::Corner);
            assert!(report.simplicial);
            let adjacent = atlas
                .flat_segments()
                .iter()
                .filter(|f| {
                    (f.endpoints.0 - v).norm() < 1e-6 || (f.endpoints.1 - v).norm() < 1e-6
                })
                .count();
            assert_eq!(adjacent, n_adjacent);
        }
        let mid = C64::new(0.5, 0.5);
        let report = classify_point(&atlas, mid).unwrap();
        assert_eq!(report.class, BoundaryClass::FlatInterior);
    }

    #[test]
    fn rotated_segment_flat_is_caught_between_grid_angles() {
        // Normal matrix with two eigenvalues: the range is the segment
        // between them; its normal direction is far from any grid angle.
        let z1 = C64::new(0.3, -0.2);
        let z2 = C64::new(-0.5, 0.7);
        let atlas = boundary_sweep(&fixtures::normal_matrix(&[z1, z2]), 64).unwrap();
        let flats = atlas.flat_segments();
        assert!(!flats.is_empty(), "segment flat not detected");
        let longest = flats
            .iter()
            .max_by(|a, b| a.length().total_cmp(&b.length()))
            .unwrap();
        assert!((longest.length() - (z2 - z1).norm()).abs() < 1e-6);
    }

    #[test]
    fn disk_plus_point_has_two_tangent_flats_and_a_corner() {
        let atlas = boundary_sweep(&fixtures::disk_plus_point_matrix(), 720).unwrap();
        assert_eq!(atlas.flat_segments().len(), 2);
        let corner = classify_point(&atlas, C64::new(1.0, 0.0)).unwrap();
        assert_eq!(corner.class, BoundaryClass::Corner);
        let adjacent = atlas
            .flat_segments()
            .iter()
            .filter(|f| {
                (f.endpoints.0 - C64::new(1.0, 0.0)).norm() < 1e-6
                    || (f.endpoints.1 - C64::new(1.0, 0.0)).norm() < 1e-6
            })
            .count();
        assert_eq!(adjacent, 2);
        // Top of the disk part is an ordinary round point.
        let round = classify_point(&atlas, C64::new(0.0, 0.5)).unwrap();
        assert_eq!(round.class, BoundaryClass::Round);
        assert!(!round.simplicial);
        assert_eq!(round.generators, GeneratorCount::Singly);
    }

    #[test]
    fn interior_and_exterior_points_are_rejected() {
        let atlas = boundary_sweep(&unit_disk_matrix(), 720).unwrap();
        assert!(classify_point(&atlas, C64::new(0.2, 0.0)).is_err());
        assert!(classify_point(&atlas, C64::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn disk_with_eigenvalue_candidates_and_generators() {
        let a = fixtures::disk_with_eigenvalue_matrix();
        let scan = discontinuity_candidates(&a, 2048).unwrap();
        assert!(!scan.irreducible, "the matrix is a direct sum");
        assert!(!scan.whole_circle);
        assert_eq!(scan.points.len(), 1);
        assert!((scan.points[0].point - C64::new(1.0, 0.0)).norm() < 1e-7);
        let atlas = boundary_sweep(&a, 2048).unwrap();
        let at_one = classify_point(&atlas, C64::new(1.0, 0.0)).unwrap();
        assert_eq!(at_one.class, BoundaryClass::Round);
        assert_eq!(at_one.generators, GeneratorCount::Multiply { dim: 2 });
        let at_i = classify_point(&atlas, C64::new(0.0, 1.0)).unwrap();
        assert_eq!(at_i.class, BoundaryClass::Round);
        assert_eq!(at_i.generators, GeneratorCount::Singly);
    }

    #[test]
    fn rotated_disk_with_eigenvalue_candidate_found_off_grid() {
        // Conjugating by a rotation in the plane moves the bad point away
        // from every grid angle; the gap-dip refinement must still find it.
        let a = fixtures::disk_with_eigenvalue_matrix();
        let phi = 0.317;
        let rotated = a.scale(C64::from_polar(1.0, phi));
        let scan = discontinuity_candidates(&rotated, 2048).unwrap();
        assert_eq!(scan.points.len(), 1);
        let expect = C64::from_polar(1.0, phi);
        assert!((scan.points[0].point - expect).norm() < 1e-6);
    }

    #[test]
    fn double_disk_flags_whole_circle() {
        let scan = discontinuity_candidates(&fixtures::double_disk_matrix(), 512).unwrap();
        assert!(scan.whole_circle);
        assert!(!scan.irreducible);
        assert!(!scan.notes.is_empty());
    }

    #[test]
    fn reducibility_splits_direct_sums_and_certifies_blocks() {
        let a = fixtures::disk_with_eigenvalue_matrix();
        match unitary_reducibility(&a).unwrap() {
            Reducibility::Reducible { blocks, .. } => {
                let mut dims: Vec<usize> = blocks.iter().map(|b| b.dim()).collect();
                dims.sort_unstable();
                assert_eq!(dims, vec![1, 2]);
            }
            Reducibility::Irreducible => panic!("direct sum not split"),
        }
        assert!(unitary_reducibility(&unit_disk_matrix()).unwrap().is_irreducible());
    }

    #[test]
    fn reducible_sweep_matches_hull_of_block_sweeps() {
        let a = fixtures::disk_plus_point_matrix();
        let whole = boundary_sweep(&a, 512).unwrap();
        let blocks = match unitary_reducibility(&a).unwrap() {
            Reducibility::Reducible { blocks, .. } => blocks,
            _ => panic!("expected reducible"),
        };
        // Hausdorff check via support functions: for each angle, the max of
        // the block supports must match the whole support.
        for (k, &theta) in whole.angles().iter().enumerate() {
            let h_blocks = blocks
                .iter()
                .map(|b| {
                    if b.dim() == 1 {
                        (b.get(0, 0) * C64::from_polar(1.0, -theta)).re
                    } else {
                        boundary_sweep(b, 8).unwrap().support_at(theta)
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((whole.support_values()[k] - h_blocks).abs() < 1e-6);
        }
    }

    #[test]
    fn shape_tags_for_normal_and_reducible_forms() {
        let tri = analyze_3x3(
            &HermitianMatrix::from_real(3, &[1., 0., 0., 0., 0., 0., 0., 0., 0.]).unwrap(),
            &HermitianMatrix::from_real(3, &[0., 0., 0., 0., 1., 0., 0., 0., 0.]).unwrap(),
        )
        .unwrap();
        assert_eq!(tri.shape, ShapeTag::Triangle);
        assert!(tri.continuous);

        let seg = analyze_3x3(
            &HermitianMatrix::from_real(3, &[1., 0., 0., 0., -1., 0., 0., 0., 0.]).unwrap(),
            &HermitianMatrix::from_real(3, &[2., 0., 0., 0., -2., 0., 0., 0., 0.]).unwrap(),
        )
        .unwrap();
        assert_eq!(seg.shape, ShapeTag::Segment);

        // [[0,1],[0,0]] + [z]: z = 0.1 inside the radius-1/2 disk; z = 1 outside.
        let mut inside = ComplexMatrix::zeros(3);
        inside.set(0, 1, C64::new(1.0, 0.0));
        inside.set(2, 2, C64::new(0.1, 0.0));
        let rep = analyze_3x3(
            &pair_from_matrix(&inside).unwrap().observable(0).clone(),
            &pair_from_matrix(&inside).unwrap().observable(1).clone(),
        )
        .unwrap();
        assert_eq!(rep.shape, ShapeTag::EllipseReducible);
        assert!(rep.continuous);

        let outside = fixtures::disk_plus_point_matrix();
        let set = pair_from_matrix(&outside).unwrap();
        let rep = analyze_3x3(&set.observable(0).clone(), &set.observable(1).clone()).unwrap();
        assert_eq!(rep.shape, ShapeTag::ConvEllipsePlusExteriorPoint);
        assert!(rep.continuous);
    }

    #[test]
    fn disk_with_boundary_eigenvalue_is_flagged_discontinuous() {
        let set = fixtures::disk_with_eigenvalue_pair();
        let rep = analyze_3x3(&set.observable(0).clone(), &set.observable(1).clone()).unwrap();
        assert_eq!(rep.shape, ShapeTag::DiskWithBoundaryEigenvalue);
        assert!(!rep.continuous);
        let fiber = rep.exceptional.expect("exceptional fiber expected");
        assert_eq!(fiber.support_rank, 2);
        assert_eq!(fiber.fiber_affine_dim, 3);
        let d = crate::states::trace_distance(&fiber.center, &fixtures::disk_with_eigenvalue_center())
            .unwrap();
        assert!(d < 1e-7, "fiber center off by {d:e}");
        let v1 = crate::states::PureStateVector::normalized(vec![
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let open_expect = DensityMatrix::from_vector(&v1);
        let d = crate::states::trace_distance(&fiber.open_point, &open_expect).unwrap();
        assert!(d < 1e-4, "open point off by {d:e}");
    }

    #[test]
    fn segment_triple_pair_restriction_is_another_boundary_eigenvalue_case() {
        // u1 + i u2 of the segment triple splits as B + [1+i] with 1+i
        // exactly on the boundary ellipse of W(B): |z-l1| + |z-l2| squares
        // to 8 + 4 sqrt(2) = (2a)^2. So the two-observable restriction is
        // itself discontinuous, at the projection (1,1) of the triple's bad
        // target (1,1,1/2).
        let set = fixtures::segment_triple();
        let rep = analyze_3x3(&set.observable(0).clone(), &set.observable(1).clone()).unwrap();
        assert_eq!(rep.shape, ShapeTag::DiskWithBoundaryEigenvalue);
        assert!(!rep.continuous);
        assert_eq!(rep.candidates.len(), 1);
        assert!((rep.candidates[0].point - C64::new(1.0, 1.0)).norm() < 1e-7);
        let scan = discontinuity_candidates(
            &matrix_from_pair(&set).unwrap(),
            2048,
        )
        .unwrap();
        assert_eq!(scan.points.len(), 1);
        assert!((scan.points[0].point - C64::new(1.0, 1.0)).norm() < 1e-7);
    }

    #[test]
    fn ellipse_conic_fit_accepts_true_ellipse() {
        // Non-normal 2x2 blocks have elliptic ranges; pad to 3x3 with a
        // far-inside eigenvalue to keep the boundary the ellipse itself.
        let mut m = ComplexMatrix::zeros(3);
        m.set(0, 1, C64::new(1.0, 0.0));
        m.set(0, 0, C64::new(0.2, 0.1));
        m.set(1, 1, C64::new(-0.1, -0.2));
        m.set(2, 2, C64::new(0.05, -0.05));
        let set = pair_from_matrix(&m).unwrap();
        let rep = analyze_3x3(&set.observable(0).clone(), &set.observable(1).clone()).unwrap();
        assert_eq!(rep.shape, ShapeTag::EllipseReducible);
    }

    #[test]
    fn facet_fibers_on_segment_triple() {
        let set = fixtures::segment_triple();
        let entries = facet_fibers_3x3(&set, 40).unwrap();
        assert!(!entries.is_empty(), "the segment face must be detected");
        for e in &entries {
            assert_eq!(e.support_rank, 2);
            assert!(e.face_dim >= 1 && e.face_dim <= 3);
            assert_eq!(e.boundary_samples, e.singleton_confirmed);
        }
        assert!(entries.iter().any(|e| e.face_dim == 1));
    }
}
