//! Three-qubit correlation quantities built on the inference solver.
//!
//! The two-local observable family (Pauli words touching at most two sites)
//! fixes all pair marginals of a three-qubit state. The gap between the
//! entropy of the inferred state and the entropy of the actual state measures
//! correlation invisible to any two-site observer.

use crate::error::{Error, Result};
use crate::expectation::{ExpectedValue, ObservableSet};
use crate::linalg::{C64, ComplexMatrix, HermitianMatrix};
use crate::maxent::{MaxEntSolution, SolverOptions, maxent};
use crate::states::{
    DensityMatrix, PureStateVector, SystemDims, partial_trace, pauli, tensor_all,
};

/// Probe angles used by the discontinuity demonstrations.
pub const PROBE_GAMMAS: [f64; 4] = [0.3, 0.1, 0.03, 0.01];

fn site_factor(letter: usize) -> ComplexMatrix {
    // Letter 0 is the identity; 1..=3 are the Pauli letters.
    match letter {
        0 => ComplexMatrix::identity(2),
        k => pauli(k).expect("letter in 1..=3").into_matrix(),
    }
}

fn word(letters: [usize; 3]) -> HermitianMatrix {
    let factors: Vec<ComplexMatrix> = letters.iter().map(|&l| site_factor(l)).collect();
    let refs: Vec<&ComplexMatrix> = factors.iter().collect();
    let mat = tensor_all(&refs).expect("three factors");
    HermitianMatrix::new(mat).expect("pauli words are hermitian")
}

/// The thirty-six Pauli words of weight one and two on three qubits, as one
/// observable set on dimension eight. Single-site words come first, then the
/// site pairs, each block in site-then-letter order.
pub fn two_local_basis() -> ObservableSet {
    let mut words = Vec::with_capacity(36);
    for site in 0..3 {
        for letter in 1..=3 {
            let mut l = [0usize; 3];
            l[site] = letter;
            words.push(word(l));
        }
    }
    for lo in 0..3 {
        for hi in lo + 1..3 {
            for a in 1..=3 {
                for b in 1..=3 {
                    let mut l = [0usize; 3];
                    l[lo] = a;
                    l[hi] = b;
                    words.push(word(l));
                }
            }
        }
    }
    ObservableSet::new(words).expect("words share dimension eight")
}

/// Two-qubit reductions of a three-qubit state, one per site pair.
#[derive(Clone, Debug)]
pub struct MarginalTriple {
    pub ab: DensityMatrix,
    pub ac: DensityMatrix,
    pub bc: DensityMatrix,
}

/// Partial traces of an eight-dimensional state onto the three site pairs.
pub fn marginal_triple(rho: &DensityMatrix) -> Result<MarginalTriple> {
    let dims = SystemDims::qubits(3);
    if rho.dim() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "marginal triple needs an 8-dimensional state, got {}",
            rho.dim()
        )));
    }
    Ok(MarginalTriple {
        ab: partial_trace(rho, &dims, &[0, 1])?,
        ac: partial_trace(rho, &dims, &[0, 2])?,
        bc: partial_trace(rho, &dims, &[1, 2])?,
    })
}

/// Inference from the two-local expected values of `rho`: the maximum-entropy
/// state sharing all pair marginals with `rho`.
pub fn two_local_inference(rho: &DensityMatrix) -> Result<MaxEntSolution> {
    let set = two_local_basis();
    let alpha = set.expected_values(rho)?;
    let opts = SolverOptions { tol: 1e-9, ..SolverOptions::default() };
    maxent(&set, &alpha, &opts)
}

/// Irreducible three-party correlation: the entropy the two-local inference
/// concedes beyond the entropy of the state itself. Nonnegative up to solver
/// error, and zero exactly when the pair marginals already determine `rho`.
pub fn c3(rho: &DensityMatrix) -> Result<f64> {
    Ok(two_local_inference(rho)?.entropy() - rho.entropy()?)
}

/// State supported on span{|000>, |111>} with Bloch coordinates `(x, y, z)`:
/// populations `(1 +- z)/2` and coherence `(x - iy)/2`. These are exactly the
/// states sharing all pair marginals with a GHZ-diagonal mixture, so the
/// coordinates must lie in the closed unit ball.
pub fn ghz_fiber_state(x: f64, y: f64, z: f64) -> Result<DensityMatrix> {
    let r = (x * x + y * y + z * z).sqrt();
    if r > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(format!(
            "bloch radius {r} exceeds one"
        )));
    }
    let mut m = ComplexMatrix::zeros(8);
    m.set(0, 0, C64::new((1.0 + z) / 2.0, 0.0));
    m.set(7, 7, C64::new((1.0 - z) / 2.0, 0.0));
    m.set(0, 7, C64::new(x / 2.0, -y / 2.0));
    m.set(7, 0, C64::new(x / 2.0, y / 2.0));
    DensityMatrix::new(m)
}

/// `sqrt(p)|000> + sqrt(1-p)|111>`.
pub fn ghz_pure(population: f64) -> Result<PureStateVector> {
    if !(0.0..=1.0).contains(&population) {
        return Err(Error::InvalidArgument(format!(
            "population {population} outside [0, 1]"
        )));
    }
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    amps[0] = C64::new(population.sqrt(), 0.0);
    amps[7] = C64::new((1.0 - population).sqrt(), 0.0);
    PureStateVector::normalized(amps)
}

/// `sqrt(p)|000> + cos(gamma) sqrt(1-p)|111> + sin(gamma) sqrt(1-p)|001>`.
/// Closes on the weighted GHZ vector as `gamma -> 0` while staying generic:
/// for `gamma` in `(0, pi/2)` the pair marginals determine the state.
pub fn ghz_probe_vector(population: f64, gamma: f64) -> Result<PureStateVector> {
    if !(0.0..=1.0).contains(&population) {
        return Err(Error::InvalidArgument(format!(
            "population {population} outside [0, 1]"
        )));
    }
    let beta = (1.0 - population).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    amps[0] = C64::new(population.sqrt(), 0.0);
    amps[7] = C64::new(gamma.cos() * beta, 0.0);
    amps[1] = C64::new(gamma.sin() * beta, 0.0);
    PureStateVector::normalized(amps)
}

/// Correlation along the probe family against its value at the limit point.
#[derive(Clone, Debug)]
pub struct C3Probe {
    pub gammas: Vec<f64>,
    pub values: Vec<f64>,
    /// Correlation of the weighted GHZ state the family closes on.
    pub limit: f64,
}

/// Evaluates [`c3`] along [`ghz_probe_vector`] at the given angles and at the
/// GHZ limit itself. The values stay near zero while the limit carries the
/// binary entropy of the populations, exhibiting the discontinuity.
pub fn c3_discontinuity_probe(population: f64, gammas: &[f64]) -> Result<C3Probe> {
    let mut values = Vec::with_capacity(gammas.len());
    for &g in gammas {
        let v = ghz_probe_vector(population, g)?;
        values.push(c3(&DensityMatrix::from_vector(&v))?);
    }
    let limit = c3(&DensityMatrix::from_vector(&ghz_pure(population)?))?;
    Ok(C3Probe { gammas: gammas.to_vec(), values, limit })
}

/// Transverse-field model data at coupling `eps > 0`: the Hamiltonian is the
/// sum of the three `zz` pair words plus `eps` times the three single-site
/// `x` words.
#[derive(Clone, Debug)]
pub struct HEpsilonModel {
    pub hamiltonian: HermitianMatrix,
    /// Largest eigenvalue, `1 + eps + 2 sqrt(1 - eps + eps^2)`.
    pub lambda: f64,
    /// Weight-one amplitude `(lambda - 3) / (3 eps)` of the top eigenvector.
    pub s: f64,
    /// Top eigenvector `(1, s, s, s, s, s, s, 1)`, normalized.
    pub top_state: PureStateVector,
    /// Two-qubit reduction of the top eigenvector; rank two.
    pub marginal_ab: DensityMatrix,
}

/// Closed-form spectral data of the transverse-field model.
pub fn h_epsilon_model(eps: f64) -> Result<HEpsilonModel> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "coupling {eps} must be positive"
        )));
    }
    let zz = [[3usize, 3, 0], [3, 0, 3], [0, 3, 3]];
    let xs = [[1usize, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut acc = ComplexMatrix::zeros(8);
    for l in zz {
        acc = acc.add(word(l).matrix())?;
    }
    for l in xs {
        acc = acc.add(&word(l).matrix().scale(C64::new(eps, 0.0)))?;
    }
    let hamiltonian = HermitianMatrix::new(acc)?;

    let root = (1.0 - eps + eps * eps).sqrt();
    let lambda = 1.0 + eps + 2.0 * root;
    let s = (lambda - 3.0) / (3.0 * eps);
    let mut amps = vec![C64::new(s, 0.0); 8];
    amps[0] = C64::new(1.0, 0.0);
    amps[7] = C64::new(1.0, 0.0);
    let top_state = PureStateVector::normalized(amps)?;

    // Reduction of w w* / (2 + 6 s^2) over any site pair; the eigenvector is
    // symmetric under site permutations, so one pair serves for all three.
    let n = 2.0 + 6.0 * s * s;
    let q = s + s * s;
    let d = 2.0 * s * s;
    #[rustfmt::skip]
    let entries = [
        1.0 + s * s, q,       q,       2.0 * s,
        q,           d,       d,       q,
        q,           d,       d,       q,
        2.0 * s,     q,       q,       1.0 + s * s,
    ];
    let marginal_ab = DensityMatrix::new(
        ComplexMatrix::from_real(4, &entries)?.scale(C64::new(1.0 / n, 0.0)),
    )?;

    Ok(HEpsilonModel { hamiltonian, lambda, s, top_state, marginal_ab })
}

/// Nonzero eigenvalues of the pair reduction, `(s-1)^2 / (2(3s^2+1))` below
/// `(5s^2 + 2s + 1) / (2(3s^2+1))`.
pub fn h_epsilon_marginal_eigenvalues(s: f64) -> (f64, f64) {
    let n = 2.0 * (3.0 * s * s + 1.0);
    ((s - 1.0) * (s - 1.0) / n, (5.0 * s * s + 2.0 * s + 1.0) / n)
}

/// Two-local expected values of the top eigenstate at coupling `eps`,
/// continued to the balanced GHZ point at `eps = 0` (the limit of the
/// eigenvector as the coupling vanishes).
pub fn h_epsilon_curve(set: &ObservableSet, eps: f64) -> Result<ExpectedValue> {
    let rho = if eps == 0.0 {
        DensityMatrix::from_vector(&ghz_pure(0.5)?)
    } else {
        DensityMatrix::from_vector(&h_epsilon_model(eps)?.top_state)
    };
    set.expected_values(&rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faces::lsc_probe;
    use crate::linalg::hermitian_eig;
    use crate::states::{binary_entropy, trace_distance};

    #[test]
    fn two_local_words_are_traceless_orthogonal_involutions() {
        let set = two_local_basis();
        assert_eq!(set.len(), 36);
        assert_eq!(set.dim(), 8);
        let words = set.observables();
        for (i, a) in words.iter().enumerate() {
            assert!(a.matrix().trace().norm() <= 1e-12);
            let sq = a.matrix().mul(a.matrix()).unwrap();
            let defect = sq.sub(&ComplexMatrix::identity(8)).unwrap().frobenius_norm();
            assert!(defect <= 1e-12, "word {i} does not square to one");
            for (j, b) in words.iter().enumerate().skip(i + 1) {
                let overlap = a.matrix().mul(b.matrix()).unwrap().trace().norm();
                assert!(overlap <= 1e-12, "words {i} and {j} overlap");
            }
        }
    }

    #[test]
    fn ghz_marginals_are_the_classical_pair_mixture() {
        let rho = DensityMatrix::from_vector(&ghz_pure(0.5).unwrap());
        let m = marginal_triple(&rho).unwrap();
        #[rustfmt::skip]
        let expected = DensityMatrix::new(ComplexMatrix::from_real(4, &[
            0.5, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.5,
        ]).unwrap()).unwrap();
        for pair in [&m.ab, &m.ac, &m.bc] {
            assert!(trace_distance(pair, &expected).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn transverse_model_closed_forms_match_the_spectral_data() {
        let unit = h_epsilon_model(1.0).unwrap();
        assert!((unit.lambda - 4.0).abs() <= 1e-12);
        assert!((unit.s - 1.0 / 3.0).abs() <= 1e-12);

        for eps in [0.1, 0.5, 1.0] {
            let model = h_epsilon_model(eps).unwrap();
            let dec = hermitian_eig(&model.hamiltonian);
            let top = *dec.eigenvalues.last().unwrap();
            assert!((top - model.lambda).abs() <= 1e-9);

            // Zero energy variance certifies the eigenvector.
            let rho = DensityMatrix::from_vector(&model.top_state);
            let h = model.hamiltonian.matrix();
            let mean = h.mul(rho.matrix()).unwrap().trace().re;
            let second = h.mul(h).unwrap().mul(rho.matrix()).unwrap().trace().re;
            assert!((mean - model.lambda).abs() <= 1e-9);
            assert!((second - model.lambda * model.lambda).abs() <= 1e-8);

            let m = marginal_triple(&rho).unwrap();
            assert!(trace_distance(&m.ab, &model.marginal_ab).unwrap() <= 1e-9);
            assert!(trace_distance(&m.ab, &m.ac).unwrap() <= 1e-12);
            assert!(trace_distance(&m.ab, &m.bc).unwrap() <= 1e-12);

            let (lo, hi) = h_epsilon_marginal_eigenvalues(model.s);
            let spec = model.marginal_ab.spectrum();
            assert!(spec[0].abs() <= 1e-12 && spec[1].abs() <= 1e-12);
            assert!((spec[2] - lo).abs() <= 1e-9);
            assert!((spec[3] - hi).abs() <= 1e-9);
        }
    }

    #[test]
    fn c3_of_weighted_ghz_is_the_binary_entropy_of_the_weights() {
        for p in [0.25, 0.5] {
            let rho = DensityMatrix::from_vector(&ghz_pure(p).unwrap());
            let got = c3(&rho).unwrap();
            let want = binary_entropy(p).unwrap();
            assert!((got - want).abs() <= 1e-6, "p = {p}: {got} vs {want}");
            assert!(got >= -1e-8);
        }
    }

    #[test]
    fn inference_from_pair_marginals_keeps_only_the_population_axis() {
        let rho = ghz_fiber_state(0.3, 0.2, 0.4).unwrap();
        let sol = two_local_inference(&rho).unwrap();
        let center = ghz_fiber_state(0.0, 0.0, 0.4).unwrap();
        assert!(trace_distance(sol.state(), &center).unwrap() <= 1e-7);

        let r = (0.3f64 * 0.3 + 0.2 * 0.2 + 0.4 * 0.4).sqrt();
        let oracle = binary_entropy(0.7).unwrap() - binary_entropy((1.0 + r) / 2.0).unwrap();
        assert!((c3(&rho).unwrap() - oracle).abs() <= 1e-6);
    }

    #[test]
    fn probe_family_shows_the_correlation_jump() {
        let probe = c3_discontinuity_probe(0.5, &[0.3, 0.1]).unwrap();
        assert!((probe.limit - 2.0f64.ln()).abs() <= 1e-6);
        for (g, v) in probe.gammas.iter().zip(&probe.values) {
            assert!(v.abs() <= 1e-4, "gamma = {g}: c3 = {v}");
        }
    }

    #[test]
    fn coupling_curve_face_collapses_at_the_uncoupled_limit() {
        let set = two_local_basis();
        let schedule = [0.5, 0.25, 0.1, 0.05];
        let probe =
            lsc_probe(&set, |e| h_epsilon_curve(&set, e).unwrap(), &schedule).unwrap();
        assert_eq!(probe.dims_along, vec![0, 0, 0, 0]);
        assert_eq!(probe.dim_at_limit, 1);
        assert!(probe.lsc_violated);
    }
}
