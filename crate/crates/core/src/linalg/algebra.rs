//! Dimension and commutant computations for generated *-algebras.

use super::{C64, ComplexMatrix, eig};
use crate::error::{Error, Result};

/// Dimension of the unital *-algebra generated by `gens`, by span closure.
///
/// Vectorizes matrices into `C^(d^2)`, seeds the span with the identity, the
/// generators, and their adjoints, then multiplies basis representatives
/// until the span stops growing (or hits the full `d^2`). An empty generator
/// list spans the scalars, dimension one.
pub fn generated_star_algebra_dim(gens: &[ComplexMatrix]) -> Result<usize> {
    if gens.is_empty() {
        return Ok(1);
    }
    let d = gens[0].dim();
    for g in gens {
        if g.dim() != d {
            return Err(Error::DimensionMismatch(
                "generators must share one dimension".into(),
            ));
        }
    }

    let mut span = Span::new(d);
    let mut reps: Vec<ComplexMatrix> = Vec::new();
    let mut seeds = vec![ComplexMatrix::identity(d)];
    for g in gens {
        seeds.push(g.clone());
        seeds.push(g.adjoint());
    }
    for s in seeds {
        if let Some(rep) = span.insert(&s) {
            reps.push(rep);
        }
    }

    // Multiply fresh representatives against everything until stable.
    let mut frontier: Vec<ComplexMatrix> = reps.clone();
    while !frontier.is_empty() && span.len() < d * d {
        let mut fresh = Vec::new();
        for f in &frontier {
            for r in &reps {
                for prod in [f.mul(r)?, r.mul(f)?] {
                    if let Some(rep) = span.insert(&prod) {
                        fresh.push(rep);
                    }
                    if span.len() == d * d {
                        return Ok(d * d);
                    }
                }
            }
        }
        reps.extend(fresh.iter().cloned());
        frontier = fresh;
    }
    Ok(span.len())
}

/// Residual Frobenius norm of projecting `m` out of the algebra span of
/// `gens`, after normalizing `m`. Zero (tiny) means membership.
pub fn algebra_membership_residual(gens: &[ComplexMatrix], m: &ComplexMatrix) -> Result<f64> {
    if gens.is_empty() {
        return Err(Error::InvalidArgument("need at least one generator".into()));
    }
    let d = gens[0].dim();
    if m.dim() != d {
        return Err(Error::DimensionMismatch(
            "membership candidate has the wrong dimension".into(),
        ));
    }
    let mut span = Span::new(d);
    let mut reps: Vec<ComplexMatrix> = Vec::new();
    let mut seeds = vec![ComplexMatrix::identity(d)];
    for g in gens {
        seeds.push(g.clone());
        seeds.push(g.adjoint());
    }
    for s in seeds {
        if let Some(rep) = span.insert(&s) {
            reps.push(rep);
        }
    }
    let mut frontier: Vec<ComplexMatrix> = reps.clone();
    while !frontier.is_empty() && span.len() < d * d {
        let mut fresh = Vec::new();
        for f in &frontier {
            for r in &reps {
                for prod in [f.mul(r)?, r.mul(f)?] {
                    if let Some(rep) = span.insert(&prod) {
                        fresh.push(rep);
                    }
                }
            }
        }
        reps.extend(fresh.iter().cloned());
        frontier = fresh;
    }
    Ok(span.residual_norm(m))
}

/// Orthonormal basis (Frobenius inner product) of the joint commutant
/// `{x : x g = g x and x g* = g* x for every generator g}`.
///
/// Found as the null space of a positive semidefinite operator on
/// `C^(d^2)`, so the result is deterministic. The span always contains the
/// identity.
pub fn commutant_basis(gens: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    if gens.is_empty() {
        return Err(Error::InvalidArgument(
            "commutant of an empty set is the full algebra; pass the identity instead".into(),
        ));
    }
    let d = gens[0].dim();
    for g in gens {
        if g.dim() != d {
            return Err(Error::DimensionMismatch(
                "generators must share one dimension".into(),
            ));
        }
    }
    let n = d * d;

    // Accumulate A = sum_G T_G^* T_G over generators and adjoints, where
    // T_G x = x G - G x acts on vectorized matrices. Null(A) = commutant.
    let mut big = ComplexMatrix::zeros(n);
    for g in gens {
        for gg in [g.clone(), g.adjoint()] {
            let t = commutator_operator(&gg);
            let tt = t.adjoint().mul(&t)?;
            big = big.add(&tt)?;
        }
    }

    let dec = eig::hermitian_eig_unchecked(&big);
    let top = dec.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let cut = 1e-9 * (1.0 + top);
    let mut basis = Vec::new();
    for k in 0..n {
        if dec.eigenvalues[k].abs() <= cut {
            let col = dec.column(k);
            basis.push(unvectorize(d, &col));
        }
    }
    Ok(basis)
}

/// Matrix of `x -> x g - g x` on row-major vectorized `x`.
fn commutator_operator(g: &ComplexMatrix) -> ComplexMatrix {
    let d = g.dim();
    let n = d * d;
    let mut t = ComplexMatrix::zeros(n);
    for j in 0..d {
        for k in 0..d {
            let row = j * d + k;
            for m in 0..d {
                // (x g)[j][k] draws on x[j][m] with weight g[m][k].
                let col = j * d + m;
                let v = t.get(row, col) + g.get(m, k);
                t.set(row, col, v);
                // (g x)[j][k] draws on x[m][k] with weight g[j][m].
                let col = m * d + k;
                let v = t.get(row, col) - g.get(j, m);
                t.set(row, col, v);
            }
        }
    }
    t
}

fn unvectorize(d: usize, v: &[C64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d);
    for j in 0..d {
        for k in 0..d {
            m.set(j, k, v[j * d + k]);
        }
    }
    m
}

/// Incremental orthonormal span of vectorized matrices.
struct Span {
    d: usize,
    basis: Vec<Vec<C64>>,
}

impl Span {
    fn new(d: usize) -> Self {
        Span { d, basis: Vec::new() }
    }

    fn len(&self) -> usize {
        self.basis.len()
    }

    /// Adds the normalized matrix if it enlarges the span; returns the
    /// orthonormal representative as a matrix.
    fn insert(&mut self, m: &ComplexMatrix) -> Option<ComplexMatrix> {
        let norm = m.frobenius_norm();
        if norm < 1e-14 {
            return None;
        }
        let mut v: Vec<C64> = m.entries().iter().map(|&x| x / norm).collect();
        for b in &self.basis {
            let overlap: C64 = b.iter().zip(v.iter()).map(|(a, x)| a.conj() * x).sum();
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi -= overlap * bi;
            }
        }
        let res: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if res <= 1e-9 {
            return None;
        }
        for x in v.iter_mut() {
            *x /= res;
        }
        let rep = unvectorize(self.d, &v);
        self.basis.push(v);
        Some(rep)
    }

    /// Norm of the component of `m` (normalized) outside the span.
    fn residual_norm(&self, m: &ComplexMatrix) -> f64 {
        let norm = m.frobenius_norm();
        if norm < 1e-14 {
            return 0.0;
        }
        let mut v: Vec<C64> = m.entries().iter().map(|&x| x / norm).collect();
        for b in &self.basis {
            let overlap: C64 = b.iter().zip(v.iter()).map(|(a, x)| a.conj() * x).sum();
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi -= overlap * bi;
            }
        }
        v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sigma_y() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, c(0.0, -1.0));
        m.set(1, 0, c(0.0, 1.0));
        m
    }

    /// Real/imaginary parts of [[0,2],[0,0]] + [1]: a 2x2 block plus a
    /// 1x1 block.
    fn block_pair() -> (ComplexMatrix, ComplexMatrix) {
        let u1 = ComplexMatrix::from_real(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
            .unwrap();
        let mut u2 = ComplexMatrix::zeros(3);
        u2.set(0, 1, c(0.0, -1.0));
        u2.set(1, 0, c(0.0, 1.0));
        (u1, u2)
    }

    #[test]
    fn pauli_pair_generates_full_2x2_algebra() {
        assert_eq!(
            generated_star_algebra_dim(&[sigma_x(), sigma_y()]).unwrap(),
            4
        );
    }

    #[test]
    fn block_pair_generates_block_algebra() {
        let (u1, u2) = block_pair();
        assert_eq!(generated_star_algebra_dim(&[u1, u2]).unwrap(), 5);
    }

    #[test]
    fn empty_generators_span_scalars() {
        assert_eq!(generated_star_algebra_dim(&[]).unwrap(), 1);
    }

    /// Independent oracle: enumerate all words up to a fixed length and
    /// Gram-Schmidt the word list directly.
    #[test]
    fn span_closure_agrees_with_word_enumeration() {
        let (u1, u2) = block_pair();
        let gens = [u1, u2];
        let d = 3;
        let mut words: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(d)];
        let mut letters: Vec<ComplexMatrix> = Vec::new();
        for g in &gens {
            letters.push(g.clone());
            letters.push(g.adjoint());
        }
        let mut layer = vec![ComplexMatrix::identity(d)];
        for _ in 0..6 {
            let mut next = Vec::new();
            for w in &layer {
                for l in &letters {
                    next.push(w.mul(l).unwrap());
                }
            }
            words.extend(next.iter().cloned());
            layer = next;
        }
        let mut span = Span::new(d);
        for w in &words {
            span.insert(w);
        }
        assert_eq!(span.len(), generated_star_algebra_dim(&gens).unwrap());
    }

    #[test]
    fn commutant_of_irreducible_pair_is_scalars() {
        let basis = commutant_basis(&[sigma_x(), sigma_y()]).unwrap();
        assert_eq!(basis.len(), 1);
        // The one basis element is proportional to the identity.
        let m = &basis[0];
        let off = m.get(0, 1).norm() + m.get(1, 0).norm();
        assert!(off < 1e-10);
        assert!((m.get(0, 0) - m.get(1, 1)).norm() < 1e-10);
    }

    #[test]
    fn commutant_of_doubled_block_has_dimension_four() {
        // 1_2 (x) [[0,2],[0,0]] laid out with the doubling outermost.
        let mut a = ComplexMatrix::zeros(4);
        a.set(0, 1, c(2.0, 0.0));
        a.set(2, 3, c(2.0, 0.0));
        let basis = commutant_basis(&[a.clone()]).unwrap();
        assert_eq!(basis.len(), 4);
        for x in &basis {
            let xa = x.mul(&a).unwrap();
            let ax = a.mul(x).unwrap();
            assert!(xa.sub(&ax).unwrap().max_abs_entry() < 1e-9);
            let astar = a.adjoint();
            let xa = x.mul(&astar).unwrap();
            let ax = astar.mul(x).unwrap();
            assert!(xa.sub(&ax).unwrap().max_abs_entry() < 1e-9);
        }
    }

    #[test]
    fn commutant_of_identity_is_everything() {
        let basis = commutant_basis(&[ComplexMatrix::identity(3)]).unwrap();
        assert_eq!(basis.len(), 9);
    }

    #[test]
    fn commutant_span_contains_identity() {
        let (u1, u2) = block_pair();
        let basis = commutant_basis(&[u1, u2]).unwrap();
        assert_eq!(basis.len(), 2);
        let mut span = Span::new(3);
        for b in &basis {
            span.insert(b);
        }
        assert!(span.residual_norm(&ComplexMatrix::identity(3)) < 1e-9);
    }
}
