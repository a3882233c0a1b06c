//! Density matrices, pure states, tensor products, and entropies.
//!
//! Multi-factor systems use the leftmost-slowest index convention: the basis
//! vector `|a b c>` of a three-factor system sits at index
//! `(a * d_b + b) * d_c + c`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix, HermitianMatrix, hermitian_eig_unchecked};
use crate::tol;

/// Density matrix: Hermitian, unit trace, positive semidefinite within
/// documented slack (trace within `1e-10`, eigenvalues above `-1e-9`).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let herm = mat.hermiticity_defect();
        if herm > tol::HERMITICITY {
            return Err(Error::NotHermitian { deviation: herm, tol: tol::HERMITICITY });
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > tol::DENSITY_TRACE || trace.im.abs() > tol::DENSITY_TRACE {
            return Err(Error::NotDensity(format!(
                "trace {trace} deviates from one beyond 1e-10"
            )));
        }
        let herm = HermitianMatrix::new(mat)?;
        let dec = hermitian_eig_unchecked(herm.matrix());
        let min = dec.eigenvalues.first().copied().unwrap_or(0.0);
        if min < tol::DENSITY_EIG_FLOOR {
            return Err(Error::NotDensity(format!(
                "minimal eigenvalue {min:e} is below the -1e-9 floor"
            )));
        }
        Ok(Self { mat: herm.into_matrix() })
    }

    /// Maximally mixed state `1/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        Self { mat }
    }

    /// Rank-one state `v v*` from a unit vector.
    pub fn from_vector(v: &PureStateVector) -> Self {
        Self { mat: ComplexMatrix::outer(v.amplitudes()) }
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

    /// Ascending eigenvalues.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eig_unchecked(&self.mat).eigenvalues
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> Result<f64> {
        crate::linalg::entropy_of_spectrum(&self.spectrum())
    }
}

/// Unit vector in `C^d`.
#[derive(Clone, Debug)]
pub struct PureStateVector {
    amplitudes: Vec<C64>,
}

impl PureStateVector {
    /// Validates unit norm within `1e-12`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr.sqrt() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "state vector norm {} is not one within 1e-12",
                norm_sqr.sqrt()
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let norm = norm_sqr.sqrt();
        if norm < 1e-150 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// Factor dimensions of a tensor-product system, leftmost slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemDims {
    factors: Vec<usize>,
}

impl SystemDims {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|&f| f == 0) {
            return Err(Error::InvalidArgument(
                "factor dimensions must be nonempty and positive".into(),
            ));
        }
        Ok(Self { factors })
    }

    pub fn qubits(n: usize) -> Self {
        Self { factors: vec![2; n] }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }
}

/// Kronecker product with the left factor slowest.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let d = da * db;
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..da {
        for k in 0..da {
            let aik = a.get(i, k);
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..db {
                for l in 0..db {
                    out.set(i * db + j, k * db + l, aik * b.get(j, l));
                }
            }
        }
    }
    out
}

/// Kronecker product of a list, left to right.
pub fn tensor_all(ms: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut iter = ms.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?;
    let mut acc = (*first).clone();
    for m in iter {
        acc = tensor(&acc, m);
    }
    Ok(acc)
}

/// Partial trace keeping the listed factors (sorted, unique, zero-based).
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: &SystemDims,
    keep: &[usize],
) -> Result<DensityMatrix> {
    let n = dims.factors().len();
    if dims.total() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} does not match factor product {}",
            rho.dim(),
            dims.total()
        )));
    }
    if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) || keep[keep.len() - 1] >= n {
        return Err(Error::InvalidArgument(
            "keep list must be sorted, unique, and within the factor count".into(),
        ));
    }

    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let kd: usize = keep.iter().map(|&i| dims.factors()[i]).product();
    let td: usize = traced.iter().map(|&i| dims.factors()[i]).product();

    // Flat index from per-factor digits, leftmost slowest.
    let encode = |digits: &[usize]| -> usize {
        digits
            .iter()
            .zip(dims.factors())
            .fold(0usize, |acc, (&d, &f)| acc * f + d)
    };
    let unrank = |mut r: usize, which: &[usize]| -> Vec<usize> {
        let mut digits = vec![0usize; which.len()];
        for (slot, &i) in which.iter().enumerate().rev() {
            digits[slot] = r % dims.factors()[i];
            r /= dims.factors()[i];
        }
        digits
    };

    let mut out = ComplexMatrix::zeros(kd);
    for row_k in 0..kd {
        let row_digits = unrank(row_k, keep);
        for col_k in 0..kd {
            let col_digits = unrank(col_k, keep);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..td {
                let t_digits = unrank(t, &traced);
                let mut full_row = vec![0usize; n];
                let mut full_col = vec![0usize; n];
                for (slot, &i) in keep.iter().enumerate() {
                    full_row[i] = row_digits[slot];
                    full_col[i] = col_digits[slot];
                }
                for (slot, &i) in traced.iter().enumerate() {
                    full_row[i] = t_digits[slot];
                    full_col[i] = t_digits[slot];
                }
                acc += rho.matrix().get(encode(&full_row), encode(&full_col));
            }
            out.set(row_k, col_k, acc);
        }
    }
    DensityMatrix::new(out)
}

/// Pauli matrix by index: 1 -> x, 2 -> y, 3 -> z.
pub fn pauli(index: usize) -> Result<HermitianMatrix> {
    let mat = match index {
        1 => ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])?,
        2 => {
            let mut m = ComplexMatrix::zeros(2);
            m.set(0, 1, Complex::new(0.0, -1.0));
            m.set(1, 0, Complex::new(0.0, 1.0));
            m
        }
        3 => ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "pauli index {index} outside 1..=3"
            )));
        }
    };
    HermitianMatrix::new(mat)
}

/// Binary entropy `H(p) = -p ln p - (1-p) ln(1-p)` in nats.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "binary entropy argument {p} outside [0, 1]"
        )));
    }
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.ln();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).ln();
    }
    Ok(h)
}

/// Trace distance `0.5 * || rho - sigma ||_1`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(
            "trace distance needs equal dimensions".into(),
        ));
    }
    let diff = rho.matrix().sub(sigma.matrix())?;
    let dec = hermitian_eig_unchecked(&diff);
    Ok(0.5 * dec.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn density_validation_rejects_bad_trace_and_negativity() {
        let m = ComplexMatrix::from_real(2, &[0.7, 0.0, 0.0, 0.7]).unwrap();
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotDensity(_))));
        let m = ComplexMatrix::from_real(2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotDensity(_))));
        // Tiny negative eigenvalue within the floor is accepted.
        let m = ComplexMatrix::from_real(2, &[1.0 + 5e-10, 0.0, 0.0, -5e-10]).unwrap();
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn entropy_of_pure_and_mixed() {
        let v = PureStateVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let pure = DensityMatrix::from_vector(&v);
        assert!(pure.entropy().unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((mixed.entropy().unwrap() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tensor_uses_leftmost_slowest_layout() {
        let z = pauli(3).unwrap();
        let x = pauli(1).unwrap();
        let zx = tensor(z.matrix(), x.matrix());
        // (z (x) x)[0][1] couples |00> with |01>: z diagonal +1, x flip.
        assert!((zx.get(0, 1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((zx.get(2, 3) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(zx.get(0, 2).norm() < 1e-15);
    }

    #[test]
    fn three_qubit_basis_index_of_111_is_7() {
        // |111> = e_1 (x) e_1 (x) e_1 with the left factor slowest.
        let e1 = ComplexMatrix::from_real(2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        let triple = tensor_all(&[&e1, &e1, &e1]).unwrap();
        assert!((triple.get(7, 7) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(triple.get(0, 0).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_state_recovers_factors() {
        let up = DensityMatrix::new(
            ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, 0.0]).unwrap(),
        )
        .unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        let joint = DensityMatrix::new(tensor(up.matrix(), mixed.matrix())).unwrap();
        let dims = SystemDims::qubits(2);
        let a = partial_trace(&joint, &dims, &[0]).unwrap();
        let b = partial_trace(&joint, &dims, &[1]).unwrap();
        assert!(a.matrix().sub(up.matrix()).unwrap().max_abs_entry() < 1e-12);
        assert!(b.matrix().sub(mixed.matrix()).unwrap().max_abs_entry() < 1e-12);
    }

    #[test]
    fn partial_trace_of_ghz_marginal_is_classical_mixture() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[0] = c(s, 0.0);
        amps[7] = c(s, 0.0);
        let ghz = DensityMatrix::from_vector(&PureStateVector::new(amps).unwrap());
        let dims = SystemDims::qubits(3);
        let ab = partial_trace(&ghz, &dims, &[0, 1]).unwrap();
        // Mixture of |00> and |11>, no coherences.
        assert!((ab.matrix().get(0, 0).re - 0.5).abs() < 1e-12);
        assert!((ab.matrix().get(3, 3).re - 0.5).abs() < 1e-12);
        assert!(ab.matrix().get(0, 3).norm() < 1e-12);
        assert!((ab.entropy().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_keep_middle_factor() {
        let up = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let down = ComplexMatrix::from_real(2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        let plus = ComplexMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let joint =
            DensityMatrix::new(tensor_all(&[&up, &plus, &down]).unwrap()).unwrap();
        let dims = SystemDims::qubits(3);
        let mid = partial_trace(&joint, &dims, &[1]).unwrap();
        assert!(mid.matrix().sub(&plus).unwrap().max_abs_entry() < 1e-12);
    }

    #[test]
    fn binary_entropy_endpoints_and_peak() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let e0 = PureStateVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e1 = PureStateVector::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let d = trace_distance(
            &DensityMatrix::from_vector(&e0),
            &DensityMatrix::from_vector(&e1),
        )
        .unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_hand_oracle_2x2() {
        // rho = diag(3/4, 1/4), sigma = 1/2: difference diag(1/4, -1/4),
        // trace distance 1/4.
        let rho = DensityMatrix::new(
            ComplexMatrix::from_real(2, &[0.75, 0.0, 0.0, 0.25]).unwrap(),
        )
        .unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let d = trace_distance(&rho, &sigma).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
    }
}
