//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Pivot order, sort order, and eigenvector phases are all fixed, so the
//! decomposition is a deterministic function of the input bits. Accuracy is
//! ample for the dimensions used here (at most 64).

use super::{C64, ComplexMatrix, SpectralDecomposition};

/// Maximum number of full sweeps before the iteration stops regardless.
const MAX_SWEEPS: usize = 64;

/// Diagonalizes a matrix assumed Hermitian (validated upstream).
///
/// Eigenvalues ascend; ties keep the pre-sort column order. Each eigenvector
/// is phased so its largest-modulus entry (smallest index on ties) is real
/// positive.
pub fn hermitian_eig_unchecked(a: &ComplexMatrix) -> SpectralDecomposition {
    let d = a.dim();
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(d);

    let scale = w.max_abs_entry().max(1.0);
    let stop = 1e-15 * scale;

    for _ in 0..MAX_SWEEPS {
        if max_offdiag(&w) <= stop {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut w, &mut v, p, q, stop);
            }
        }
    }

    // Sort ascending; stable sort keeps index order on ties.
    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|k| w.get(k, k).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = ComplexMatrix::zeros(d);
    for (new_col, &old_col) in order.iter().enumerate() {
        let mut col: Vec<C64> = (0..d).map(|i| v.get(i, old_col)).collect();
        fix_phase(&mut col);
        for (i, &x) in col.iter().enumerate() {
            vectors.set(i, new_col, x);
        }
    }

    SpectralDecomposition { eigenvalues, eigenvectors: vectors }
}

fn max_offdiag(w: &ComplexMatrix) -> f64 {
    let d = w.dim();
    let mut worst = 0.0f64;
    for p in 0..d {
        for q in (p + 1)..d {
            worst = worst.max(w.get(p, q).norm());
        }
    }
    worst
}

/// One Jacobi rotation zeroing `w[p][q]`.
///
/// With `alpha = w[p][p]`, `gamma = w[q][q]`, `beta = w[p][q] = b e^{i phi}`,
/// the unitary acting on coordinates (p, q) is
/// `[[c, -s e^{i phi}], [s e^{-i phi}, c]]` where `tan(2 theta) = 2b / (alpha - gamma)`.
fn rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, skip: f64) {
    let beta = w.get(p, q);
    let b = beta.norm();
    if b <= skip {
        return;
    }
    let phase = beta / b;
    let alpha = w.get(p, p).re;
    let gamma = w.get(q, q).re;
    let tau = (gamma - alpha) / (2.0 * b);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let d = w.dim();
    let se_pos = phase * s; // s e^{i phi}
    let se_neg = phase.conj() * s; // s e^{-i phi}

    // Rows p and q: W <- R* W.
    for j in 0..d {
        let wpj = w.get(p, j);
        let wqj = w.get(q, j);
        w.set(p, j, wpj * c + wqj * se_pos);
        w.set(q, j, wqj * c - wpj * se_neg);
    }
    // Columns p and q: W <- W R, and accumulate V <- V R.
    for i in 0..d {
        let wip = w.get(i, p);
        let wiq = w.get(i, q);
        w.set(i, p, wip * c + wiq * se_neg);
        w.set(i, q, wiq * c - wip * se_pos);

        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, vip * c + viq * se_neg);
        v.set(i, q, viq * c - vip * se_pos);
    }

    // Clean the pivot pair against roundoff drift.
    let wpq = w.get(p, q);
    if wpq.norm() < 1e-14 * (1.0 + b) {
        w.set(p, q, C64::new(0.0, 0.0));
        w.set(q, p, C64::new(0.0, 0.0));
    }
}

fn fix_phase(col: &mut [C64]) {
    let mut best = 0usize;
    let mut best_norm = -1.0f64;
    for (i, x) in col.iter().enumerate() {
        let n = x.norm();
        if n > best_norm + 1e-300 && n > best_norm {
            best_norm = n;
            best = i;
        }
    }
    if best_norm <= 0.0 {
        return;
    }
    let u = col[best] / best_norm;
    for x in col.iter_mut() {
        *x *= u.conj();
    }
    // Force the pivot entry exactly real.
    col[best] = C64::new(col[best].norm(), 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            m.set(i, i, c(rng.gen_range(-1.0..1.0), 0.0));
            for j in (i + 1)..d {
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m.set(i, j, v);
                m.set(j, i, v.conj());
            }
        }
        m
    }

    fn reconstruction_defect(a: &ComplexMatrix, dec: &SpectralDecomposition) -> f64 {
        let rebuilt = dec.assemble(|x| x);
        rebuilt.sub(a).unwrap().frobenius_norm() / a.frobenius_norm().max(1.0)
    }

    fn unitarity_defect(dec: &SpectralDecomposition) -> f64 {
        let v = &dec.eigenvectors;
        let gram = v.adjoint().mul(v).unwrap();
        gram.sub(&ComplexMatrix::identity(v.dim())).unwrap().max_abs_entry()
    }

    #[test]
    fn diagonal_input_keeps_index_order_on_ties() {
        let m = ComplexMatrix::from_real(
            4,
            &[
                1.0, 0.0, 0.0, 0.0,
                0.0, 1.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        let dec = hermitian_eig_unchecked(&m);
        assert_eq!(dec.eigenvalues, vec![0.0, 0.0, 1.0, 1.0]);
        // Eigenvalue-then-index order: columns e2, e3, e0, e1.
        for (k, expect) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            let col = dec.column(k);
            assert!((col[expect].re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_y_eigenvectors_are_phase_fixed() {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, c(0.0, -1.0));
        m.set(1, 0, c(0.0, 1.0));
        let dec = hermitian_eig_unchecked(&m);
        assert!((dec.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((dec.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..2 {
            let col = dec.column(k);
            // Both entries tie in modulus; the first must be real positive.
            assert!((col[0] - c(s, 0.0)).norm() < 1e-12);
            assert!((col[1].norm() - s).abs() < 1e-12);
        }
        assert!((dec.column(0)[1] - c(0.0, -1.0) * s).norm() < 1e-12);
        assert!((dec.column(1)[1] - c(0.0, 1.0) * s).norm() < 1e-12);
    }

    #[test]
    fn random_spectra_reconstruct_and_stay_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &d in &[2usize, 3, 5, 8, 16] {
            for _ in 0..4 {
                let m = random_hermitian(d, &mut rng);
                let dec = hermitian_eig_unchecked(&m);
                assert!(reconstruction_defect(&m, &dec) < 1e-13);
                assert!(unitarity_defect(&dec) < 1e-13);
                for k in 1..d {
                    assert!(dec.eigenvalues[k] >= dec.eigenvalues[k - 1]);
                }
            }
        }
    }

    #[test]
    fn dimension_64_meets_reconstruction_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hermitian(64, &mut rng);
        let dec = hermitian_eig_unchecked(&m);
        assert!(reconstruction_defect(&m, &dec) < 1e-10);
        assert!(unitarity_defect(&dec) < 1e-11);
    }

    #[test]
    fn determinism_across_repeated_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(6, &mut rng);
        let a = hermitian_eig_unchecked(&m);
        let b = hermitian_eig_unchecked(&m);
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    /// Independent oracle: largest root of the characteristic polynomial of
    /// a real symmetric 3x3, found by sign bisection on det(A - t I).
    fn charpoly_max_root(m: &ComplexMatrix) -> f64 {
        assert_eq!(m.dim(), 3);
        let det = |t: f64| -> f64 {
            let a = |i: usize, j: usize| m.get(i, j).re - if i == j { t } else { 0.0 };
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        };
        // det(A - tI) -> -t^3, so it is negative beyond the top eigenvalue.
        let bound = 3.0 * m.max_abs_entry() + 1.0;
        let mut lo = -bound;
        let mut hi = bound;
        assert!(det(hi) < 0.0);
        // Walk down until the sign flips, then bisect the last bracket.
        let steps = 20_000;
        let mut prev = hi;
        for k in 0..=steps {
            let t = hi - (hi - prev) * 0.0 - (2.0 * bound) * k as f64 / steps as f64;
            if det(t) > 0.0 {
                lo = t;
                hi = prev;
                break;
            }
            prev = t;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if det(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn pencil_top_eigenvalue_matches_charpoly_oracle() {
        // u1 - 0.1 u2 for the worked 3x3 observable triple; the top
        // eigenvalue is sqrt(0.81 + 0.02).
        let u1 = ComplexMatrix::from_real(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0])
            .unwrap();
        let u2 = ComplexMatrix::from_real(3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, -1.0])
            .unwrap();
        let pencil = u1.add(&u2.scale(c(-0.1, 0.0))).unwrap();
        let dec = hermitian_eig_unchecked(&pencil);
        let top = *dec.eigenvalues.last().unwrap();
        let expect = (0.81f64 + 0.02).sqrt();
        assert!((top - expect).abs() < 1e-12, "top {top} vs {expect}");
        let oracle = charpoly_max_root(&pencil);
        assert!((top - oracle).abs() < 1e-9, "top {top} vs oracle {oracle}");
    }
}
