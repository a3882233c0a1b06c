//! Dense complex linear algebra sized for operator-algebra work.
//!
//! Everything here targets small square matrices (dimension at most 64),
//! stored row-major as `Complex<f64>`. The eigensolver is a cyclic Jacobi
//! iteration chosen for determinism rather than speed: identical input bits
//! give identical eigenpairs, eigenvalues come back ascending, and each
//! eigenvector's largest-modulus entry is rotated to the positive real axis.

mod algebra;
mod eig;

pub use algebra::{algebra_membership_residual, commutant_basis, generated_star_algebra_dim};
pub use eig::hermitian_eig_unchecked;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::tol;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a `dim x dim` matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim} x {dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} real entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self {
            dim,
            entries: entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        })
    }

    /// Builds the rank-one matrix `v v*`.
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, v[i] * v[j].conj());
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { dim: self.dim, entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { dim: self.dim, entries })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `conj(transpose)`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let dev = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); d];
        for i in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `<u, A v>` with the convention that the left argument is conjugated.
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let av = self.apply(v);
        u.iter().zip(av.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions {} and {} differ",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

/// Hermitian matrix, validated entrywise on construction and stored
/// exactly symmetrized so downstream code never sees roundoff skew.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    mat: ComplexMatrix,
}

impl HermitianMatrix {
    /// Validates `|a[j][k] - conj(a[k][j])| <= tol` entrywise, then stores
    /// the exactly Hermitian average `(a + a*)/2`.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, tol::HERMITICITY)
    }

    pub fn with_tolerance(mat: ComplexMatrix, tolerance: f64) -> Result<Self> {
        let defect = mat.hermiticity_defect();
        if defect > tolerance {
            return Err(Error::NotHermitian { deviation: defect, tol: tolerance });
        }
        Ok(Self { mat: symmetrize(&mat) })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(dim, entries)?)
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }
}

fn symmetrize(a: &ComplexMatrix) -> ComplexMatrix {
    let d = a.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        out.set(i, i, C64::new(a.get(i, i).re, 0.0));
        for j in (i + 1)..d {
            let v = (a.get(i, j) + a.get(j, i).conj()) * C64::new(0.5, 0.0);
            out.set(i, j, v);
            out.set(j, i, v.conj());
        }
    }
    out
}

/// Eigenvalues ascending with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose `k`-th column is the eigenvector of
    /// `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// Eigenvector for index `k` as an owned column.
    pub fn column(&self, k: usize) -> Vec<C64> {
        let d = self.eigenvectors.dim();
        (0..d).map(|i| self.eigenvectors.get(i, k)).collect()
    }

    /// Reassembles `V diag(f(lambda)) V*`.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.eigenvectors.dim();
        let mut out = ComplexMatrix::zeros(d);
        for k in 0..d {
            let w = f(self.eigenvalues[k]);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let vik = self.eigenvectors.get(i, k);
                for j in 0..d {
                    let v = out.get(i, j) + vik * self.eigenvectors.get(j, k).conj() * w;
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// Diagonalizes a Hermitian matrix with the cyclic Jacobi iteration.
///
/// Deterministic: fixed sweep order, ascending eigenvalue sort with original
/// index as tie-break, and each eigenvector phased so its largest-modulus
/// entry is real positive (smallest index wins ties).
pub fn hermitian_eig(h: &HermitianMatrix) -> SpectralDecomposition {
    eig::hermitian_eig_unchecked(h.matrix())
}

/// `exp(h)` through the spectral decomposition.
pub fn matrix_exp_hermitian(h: &HermitianMatrix) -> HermitianMatrix {
    let dec = hermitian_eig(h);
    let m = dec.assemble(f64::exp);
    HermitianMatrix { mat: symmetrize(&m) }
}

/// Von Neumann entropy of a probability spectrum, in nats.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; anything more negative,
/// or a sum away from one by more than `1e-8`, is rejected.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    let mut h = 0.0;
    for &lambda in eigenvalues {
        if lambda < -tol::ENTROPY_CLAMP {
            return Err(Error::InvalidArgument(format!(
                "spectrum entry {lambda:e} is below the -1e-10 clamp floor"
            )));
        }
        let lambda = lambda.max(0.0);
        sum += lambda;
        if lambda > 0.0 {
            h -= lambda * lambda.ln();
        }
    }
    if (sum - 1.0).abs() > tol::ENTROPY_SUM {
        return Err(Error::InvalidArgument(format!(
            "spectrum sums to {sum}, expected 1 within 1e-8"
        )));
    }
    Ok(h)
}

/// Orthogonal projection, stored with its rank.
#[derive(Clone, Debug)]
pub struct Projection {
    mat: ComplexMatrix,
    rank: usize,
}

impl Projection {
    /// Builds the projection `sum v_k v_k*` from orthonormal columns.
    pub fn from_orthonormal_columns(dim: usize, columns: &[Vec<C64>]) -> Self {
        let mut mat = ComplexMatrix::zeros(dim);
        for v in columns {
            for i in 0..dim {
                for j in 0..dim {
                    let val = mat.get(i, j) + v[i] * v[j].conj();
                    mat.set(i, j, val);
                }
            }
        }
        Projection { mat: symmetrize(&mat), rank: columns.len() }
    }

    pub fn identity(dim: usize) -> Self {
        Projection { mat: ComplexMatrix::identity(dim), rank: dim }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Deterministic orthonormal basis of the range: eigenvectors of the
    /// projection with eigenvalue above one half, in the eigensolver's
    /// (eigenvalue, index) order.
    pub fn orthonormal_basis(&self) -> OrthonormalBasis {
        let dec = eig::hermitian_eig_unchecked(&self.mat);
        let cols: Vec<Vec<C64>> = (0..self.mat.dim())
            .filter(|&k| dec.eigenvalues[k] > 0.5)
            .map(|k| dec.column(k))
            .collect();
        OrthonormalBasis { dim: self.mat.dim(), columns: cols }
    }

    /// Largest entrywise deviation from `p = p* = p^2`.
    pub fn idempotency_defect(&self) -> f64 {
        let sq = self.mat.mul(&self.mat).expect("same dim");
        let herm = self.mat.hermiticity_defect();
        sq.sub(&self.mat).expect("same dim").max_abs_entry().max(herm)
    }
}

/// Ordered orthonormal columns spanning a subspace of `C^dim`.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    dim: usize,
    columns: Vec<Vec<C64>>,
}

impl OrthonormalBasis {
    pub fn new(dim: usize, columns: Vec<Vec<C64>>) -> Result<Self> {
        for v in &columns {
            if v.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "basis vector length {} does not match dimension {dim}",
                    v.len()
                )));
            }
        }
        Ok(Self { dim, columns })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, k: usize) -> &[C64] {
        &self.columns[k]
    }

    /// Compresses `a` to the subspace: the `k x k` matrix `B* a B`.
    pub fn compress(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot compress a {} x {} matrix with a basis of C^{}",
                a.dim(),
                a.dim(),
                self.dim
            )));
        }
        let k = self.columns.len();
        let mut out = ComplexMatrix::zeros(k);
        for (j, col) in self.columns.iter().enumerate() {
            let acol = a.apply(col);
            for (i, row) in self.columns.iter().enumerate() {
                let v: C64 = row.iter().zip(acol.iter()).map(|(r, x)| r.conj() * x).sum();
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Embeds a `k x k` matrix back into the full space: `B a B*`.
    pub fn embed(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let k = self.columns.len();
        if a.dim() != k {
            return Err(Error::DimensionMismatch(format!(
                "cannot embed a {} x {} matrix through a rank-{k} basis",
                a.dim(),
                a.dim()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim);
        for p in 0..k {
            for q in 0..k {
                let apq = a.get(p, q);
                if apq.norm_sqr() == 0.0 {
                    continue;
                }
                for i in 0..self.dim {
                    let left = self.columns[p][i] * apq;
                    for j in 0..self.dim {
                        let v = out.get(i, j) + left * self.columns[q][j].conj();
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Maps a coefficient vector in the subspace to a full-space vector.
    pub fn embed_vector(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (c, col) in coeffs.iter().zip(&self.columns) {
            for i in 0..self.dim {
                out[i] += c * col[i];
            }
        }
        out
    }

    /// Composes with a basis of the compressed space, producing the basis of
    /// the corresponding subspace of the full space.
    pub fn compose(&self, inner: &OrthonormalBasis) -> Result<OrthonormalBasis> {
        if inner.dim != self.columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "inner basis lives in C^{}, outer basis has {} columns",
                inner.dim,
                self.columns.len()
            )));
        }
        let columns = inner
            .columns
            .iter()
            .map(|c| self.embed_vector(c))
            .collect();
        Ok(OrthonormalBasis { dim: self.dim, columns })
    }

    /// The projection onto the spanned subspace.
    pub fn projection(&self) -> Projection {
        Projection::from_orthonormal_columns(self.dim, &self.columns)
    }
}

/// Projection onto the span of eigenvectors within `tol` of the maximal
/// eigenvalue.
pub fn spectral_projection_max(h: &HermitianMatrix, tol: f64) -> Projection {
    spectral_projection_max_unchecked(h.matrix(), tol)
}

pub(crate) fn spectral_projection_max_unchecked(m: &ComplexMatrix, tol: f64) -> Projection {
    let dec = eig::hermitian_eig_unchecked(m);
    let top = *dec.eigenvalues.last().expect("nonempty spectrum");
    let cols: Vec<Vec<C64>> = (0..m.dim())
        .filter(|&k| dec.eigenvalues[k] >= top - tol)
        .map(|k| dec.column(k))
        .collect();
    Projection::from_orthonormal_columns(m.dim(), &cols)
}

/// Compresses `a` by the projection `p`: the matrix of `p a p` on the
/// deterministic orthonormal basis of `range(p)`.
pub fn compress(a: &ComplexMatrix, p: &Projection) -> Result<ComplexMatrix> {
    p.orthonormal_basis().compress(a)
}

/// Rank of a set of real row vectors. Gram-Schmidt with re-orthogonalization;
/// a row counts when its residual exceeds `tol * max(1, largest row norm)`.
pub fn real_row_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = rows.iter().map(|r| norm(r)).fold(1.0_f64, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
        }
        let r = norm(&v);
        if r >= tol * scale {
            for x in &mut v {
                *x /= r;
            }
            basis.push(v);
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn real_row_rank_detects_dependence() {
        let rows = vec![
            vec![1.0, 0.0, 2.0],
            vec![0.0, 1.0, -1.0],
            vec![1.0, 1.0, 1.0],
            vec![0.0, 0.0, 1e-12],
        ];
        assert_eq!(real_row_rank(&rows, 1e-8), 2);
        assert_eq!(real_row_rank(&[], 1e-8), 0);
    }

    #[test]
    fn rejects_wrong_entry_count() {
        assert!(ComplexMatrix::new(2, vec![c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn hermitian_validation_catches_skew() {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, c(1.0, 0.0));
        m.set(1, 0, c(1.0, 1e-6));
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn hermitian_storage_is_exactly_symmetric() {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, c(1.0, 1e-13));
        m.set(1, 0, c(1.0, -2e-13));
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.matrix().hermiticity_defect(), 0.0);
    }

    #[test]
    fn entropy_of_spectrum_handles_clamp_and_rejects() {
        // Maximally mixed pair: ln 2.
        let h = entropy_of_spectrum(&[0.5, 0.5]).unwrap();
        assert!((h - std::f64::consts::LN_2).abs() < 1e-15);
        // Slightly negative entry within the clamp is treated as zero.
        let h = entropy_of_spectrum(&[1.0, -5e-11, 5e-11]).unwrap();
        assert!(h >= 0.0 && h < 1e-8);
        // Pure state has zero entropy.
        assert_eq!(entropy_of_spectrum(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(entropy_of_spectrum(&[1.0, -1e-9]).is_err());
        assert!(entropy_of_spectrum(&[0.6, 0.6]).is_err());
    }

    #[test]
    fn exp_of_diagonal_matches_scalar_exp() {
        let h = HermitianMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        let e = matrix_exp_hermitian(&h);
        assert!((e.matrix().get(0, 0).re - 1f64.exp()).abs() < 1e-12);
        assert!((e.matrix().get(1, 1).re - (-1f64).exp()).abs() < 1e-12);
        assert!(e.matrix().get(0, 1).norm() < 1e-14);
    }

    #[test]
    fn exp_matches_power_series_on_dense_hermitian() {
        // Independent oracle: truncated power series.
        let m = ComplexMatrix::new(
            3,
            vec![
                c(0.3, 0.0), c(0.2, 0.5), c(-0.1, 0.2),
                c(0.2, -0.5), c(-0.4, 0.0), c(0.7, -0.3),
                c(-0.1, -0.2), c(0.7, 0.3), c(0.1, 0.0),
            ],
        )
        .unwrap();
        let h = HermitianMatrix::new(m.clone()).unwrap();
        let e = matrix_exp_hermitian(&h);

        let mut series = ComplexMatrix::identity(3);
        let mut term = ComplexMatrix::identity(3);
        for k in 1..40 {
            term = term.mul(&m).unwrap().scale(c(1.0 / k as f64, 0.0));
            series = series.add(&term).unwrap();
        }
        let defect = e.matrix().sub(&series).unwrap().max_abs_entry();
        assert!(defect < 1e-12, "power series mismatch {defect:e}");
    }

    #[test]
    fn spectral_projection_max_picks_degenerate_top() {
        let h = HermitianMatrix::from_real(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0])
            .unwrap();
        let p = spectral_projection_max(&h, 1e-8);
        assert_eq!(p.rank(), 2);
        assert!(p.idempotency_defect() < 1e-12);
        assert!((p.matrix().trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn compress_projects_block_onto_leading_coordinates() {
        // Two identical Jordan-type blocks; compressing by the projection
        // onto the first two coordinates recovers one block.
        let mut a = ComplexMatrix::zeros(4);
        a.set(0, 1, c(2.0, 0.0));
        a.set(2, 3, c(2.0, 0.0));
        let p = Projection::from_orthonormal_columns(
            4,
            &[
                vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            ],
        );
        let b = compress(&a, &p).unwrap();
        assert_eq!(b.dim(), 2);
        assert!((b.get(0, 1) - c(2.0, 0.0)).norm() < 1e-12);
        assert!(b.get(0, 0).norm() < 1e-12);
        assert!(b.get(1, 0).norm() < 1e-12);
        assert!(b.get(1, 1).norm() < 1e-12);
    }

    #[test]
    fn embed_then_compress_round_trips() {
        let basis = OrthonormalBasis::new(
            3,
            vec![
                vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
            ],
        )
        .unwrap();
        let small = ComplexMatrix::new(2, vec![c(0.5, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.5, 0.0)])
            .unwrap();
        let big = basis.embed(&small).unwrap();
        let back = basis.compress(&big).unwrap();
        assert!(back.sub(&small).unwrap().max_abs_entry() < 1e-14);
    }
}
