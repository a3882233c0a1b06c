//! Built-in observable families and reference states used by tests, the
//! command line, and the reproduction reports.
//!
//! Each family is small enough to state in closed form. Where a family has a
//! distinguished target curve or a known inference limit, those are provided
//! as functions of the curve parameter so callers can probe continuity
//! without rebuilding the algebra.

use crate::error::{Error, Result};
use crate::expectation::{ExpectedValue, ObservableSet};
use crate::linalg::{C64, ComplexMatrix, HermitianMatrix, commutant_basis};
use crate::states::{DensityMatrix, PureStateVector, pauli, tensor};
use rand::Rng;

/// The Pauli triple on one qubit. Its convex support is the closed unit ball
/// in R^3.
pub fn pauli_triple() -> ObservableSet {
    let obs = vec![pauli(1).unwrap(), pauli(2).unwrap(), pauli(3).unwrap()];
    ObservableSet::new(obs).unwrap()
}

/// The first two Paulis; their convex support is the closed unit disk.
pub fn pauli_pair() -> ObservableSet {
    let obs = vec![pauli(1).unwrap(), pauli(2).unwrap()];
    ObservableSet::new(obs).unwrap()
}

/// Three real symmetric observables on C^3 whose convex support has a
/// segment face `s` with a non-exposed relative interior point. The curve
/// [`segment_triple_target`] converges to the midpoint of `s` while the
/// inferred states converge to a pure state instead of the rank-two center,
/// so the inference map is discontinuous there.
pub fn segment_triple() -> ObservableSet {
    let u1 = HermitianMatrix::from_real(3, &[1., 0., 0., 0., 1., 0., 0., 0., -1.]).unwrap();
    let u2 = HermitianMatrix::from_real(3, &[1., 0., 1., 0., 1., 1., 1., 1., -1.]).unwrap();
    let u3 = HermitianMatrix::from_real(3, &[1., 0., 1., 0., 0., 1., 1., 1., -1.]).unwrap();
    ObservableSet::new(vec![u1, u2, u3]).unwrap()
}

// Rationalized from (xi + eps - 1) / eps^2 to avoid cancellation near 0.
fn segment_triple_x(eps: f64) -> f64 {
    let xi = (1.0 - 2.0 * eps + 3.0 * eps * eps).sqrt();
    2.0 / (xi + 1.0 - eps)
}

/// Target curve of the segment triple. `eps = 0` gives the midpoint
/// `(1, 1, 1/2)` of the segment face.
pub fn segment_triple_target(eps: f64) -> ExpectedValue {
    let x = segment_triple_x(eps);
    let c = x / (2.0 - (1.0 - eps) * x);
    let last = 1.0 / (2.0 + (eps * x) * (eps * x));
    ExpectedValue::new(vec![
        c * (1.0 - eps),
        c * (1.0 - 3.0 * eps) - 0.0,
        c * (1.0 - 3.0 * eps) - last,
    ])
}

/// The unique state over `segment_triple_target(eps)` for `eps > 0`: the
/// normalized projector onto `(1, 1, -eps x(eps))`. At `eps = 0` this is the
/// limit state, the projector onto `(1, 1, 0)/sqrt(2)`, which differs from
/// the maximum-entropy state at the limit target.
pub fn segment_triple_state(eps: f64) -> DensityMatrix {
    let x = segment_triple_x(eps);
    let v = PureStateVector::normalized(vec![
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-eps * x, 0.0),
    ])
    .unwrap();
    DensityMatrix::from_vector(&v)
}

/// Center of the segment face: half the rank-two projector onto the span of
/// the first two coordinates. This is the maximum-entropy state at
/// `segment_triple_target(0)`.
pub fn segment_face_center() -> DensityMatrix {
    let m = ComplexMatrix::from_real(3, &[0.5, 0., 0., 0., 0.5, 0., 0., 0., 0.]).unwrap();
    DensityMatrix::new(m).unwrap()
}

/// The matrix `[[0, 2], [0, 0]] + [1]` (direct sum). Its numerical range is
/// the closed unit disk and the eigenvalue 1 sits on the boundary circle,
/// the configuration in which inference on C^3 is discontinuous.
pub fn disk_with_eigenvalue_matrix() -> ComplexMatrix {
    ComplexMatrix::from_real(3, &[0., 2., 0., 0., 0., 0., 0., 0., 1.]).unwrap()
}

/// Real and imaginary observables of [`disk_with_eigenvalue_matrix`]:
/// `sigma_1 + [1]` and `sigma_2 + [0]` (direct sums).
pub fn disk_with_eigenvalue_pair() -> ObservableSet {
    let u1 = HermitianMatrix::from_real(3, &[0., 1., 0., 1., 0., 0., 0., 0., 1.]).unwrap();
    let mut m2 = ComplexMatrix::zeros(3);
    m2.set(0, 1, C64::new(0.0, -1.0));
    m2.set(1, 0, C64::new(0.0, 1.0));
    let u2 = HermitianMatrix::new(m2).unwrap();
    ObservableSet::new(vec![u1, u2]).unwrap()
}

/// Maximum-entropy state of [`disk_with_eigenvalue_pair`] at the target
/// `(1, 0)`: the center of the fiber over the boundary point 1.
pub fn disk_with_eigenvalue_center() -> DensityMatrix {
    let m =
        ComplexMatrix::from_real(3, &[0.25, 0.25, 0., 0.25, 0.25, 0., 0., 0., 0.5]).unwrap();
    DensityMatrix::new(m).unwrap()
}

/// Maximum-entropy state of [`disk_with_eigenvalue_pair`] at a circle target
/// `(cos phi, sin phi)` with `phi != 0 (mod 2 pi)`: the unique state there,
/// a pure state supported on the upper 2x2 block.
pub fn disk_with_eigenvalue_circle_state(phi: f64) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(3);
    m.set(0, 0, C64::new(0.5, 0.0));
    m.set(1, 1, C64::new(0.5, 0.0));
    m.set(0, 1, C64::from_polar(0.5, -phi));
    m.set(1, 0, C64::from_polar(0.5, phi));
    DensityMatrix::new(m).unwrap()
}

/// Two copies of the disk block: `1_2 (x) [[0, 2], [0, 0]]`. Every boundary
/// point of its (unit disk) numerical range is multiply generated, yet the
/// expected-value map stays open thanks to the reducible structure.
pub fn double_disk_matrix() -> ComplexMatrix {
    let block = ComplexMatrix::from_real(2, &[0., 2., 0., 0.]).unwrap();
    tensor(&ComplexMatrix::identity(2), &block)
}

/// Real and imaginary observables of [`double_disk_matrix`]:
/// `1_2 (x) sigma_1` and `1_2 (x) sigma_2`.
pub fn double_disk_pair() -> ObservableSet {
    let id = ComplexMatrix::identity(2);
    let u1 = HermitianMatrix::new(tensor(&id, pauli(1).unwrap().matrix())).unwrap();
    let u2 = HermitianMatrix::new(tensor(&id, pauli(2).unwrap().matrix())).unwrap();
    ObservableSet::new(vec![u1, u2]).unwrap()
}

/// Diagonal (hence normal) matrix with the given eigenvalues; its numerical
/// range is their convex hull.
pub fn normal_matrix(eigenvalues: &[C64]) -> ComplexMatrix {
    let d = eigenvalues.len();
    let mut m = ComplexMatrix::zeros(d);
    for (k, z) in eigenvalues.iter().enumerate() {
        m.set(k, k, *z);
    }
    m
}

/// Normal 3x3 matrix with eigenvalues `1, i, 0`; numerical range a triangle.
pub fn triangle_matrix() -> ComplexMatrix {
    normal_matrix(&[C64::new(1., 0.), C64::new(0., 1.), C64::new(0., 0.)])
}

/// Normal 4x4 matrix whose numerical range is the square `[-1, 1]^2`.
pub fn square_matrix() -> ComplexMatrix {
    normal_matrix(&[
        C64::new(1., 1.),
        C64::new(1., -1.),
        C64::new(-1., 1.),
        C64::new(-1., -1.),
    ])
}

/// `[[0, 1], [0, 0]] + [1]` (direct sum): numerical range is the convex hull
/// of the disk of radius one half and the exterior point 1, with two tangent
/// flat segments meeting in a corner at 1.
pub fn disk_plus_point_matrix() -> ComplexMatrix {
    ComplexMatrix::from_real(3, &[0., 1., 0., 0., 0., 0., 0., 0., 1.]).unwrap()
}

/// Hermitian matrix with independent uniform entries in `[-scale, scale]`
/// (real diagonal, complex upper triangle).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        m.set(i, i, C64::new(rng.gen_range(-scale..scale), 0.0));
        for j in (i + 1)..dim {
            let v = C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            m.set(i, j, v);
            m.set(j, i, v.conj());
        }
    }
    HermitianMatrix::new(m).unwrap()
}

/// Observable set of `r` independent random Hermitian matrices.
pub fn random_observable_set<R: Rng + ?Sized>(rng: &mut R, dim: usize, r: usize) -> ObservableSet {
    let obs = (0..r).map(|_| random_hermitian(rng, dim, 1.0)).collect();
    ObservableSet::new(obs).unwrap()
}

/// Full-rank random state `G G* / tr(G G*)` with uniform complex `G`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let mut g = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            g.set(i, j, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    let w = g.mul(&g.adjoint()).unwrap();
    let t = w.trace().re;
    DensityMatrix::new(w.scale(C64::new(1.0 / t, 0.0))).unwrap()
}

/// Random unit vector with uniform complex entries, rejected below norm 1e-6.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Random unit direction in R^r.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R, r: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Random matrix redrawn until its commutant with the adjoint is trivial,
/// i.e. until it is unitarily irreducible.
pub fn random_irreducible_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<ComplexMatrix> {
    for _ in 0..64 {
        let mut a = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                a.set(i, j, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        if commutant_basis(&[a.clone()])?.len() == 1 {
            return Ok(a);
        }
    }
    Err(Error::InvalidArgument(
        "could not draw an irreducible matrix in 64 attempts".into(),
    ))
}
