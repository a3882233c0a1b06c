//! Maximum-entropy inference under expected-value constraints.
//!
//! Given observables `u_1, ..., u_r` and a target tuple `alpha`, the solver
//! finds the entropy-maximizing state among all states with
//! `tr(rho u_i) = alpha_i`. Interior targets are solved by a damped Newton
//! iteration on the dual function `ln tr exp(sum_i theta_i u_i) - theta . alpha`,
//! which is smooth and convex. Targets on the boundary of the expected-value
//! body make the dual infimum unattained; the solver then identifies the face
//! carrying the target, compresses every observable to the face's support,
//! and recurses. Infeasible targets are certified by a separating direction.

use crate::error::{Error, Result};
use crate::expectation::{ExpectedValue, FaceDescriptor, ObservableSet};
use crate::linalg::{
    C64, ComplexMatrix, HermitianMatrix, OrthonormalBasis, Projection, hermitian_eig,
    spectral_projection_max,
};
use crate::states::DensityMatrix;
use crate::tol;

/// Knobs for the dual Newton iteration and the face recursion.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Gradient norm below which the dual iteration counts as converged.
    pub tol: f64,
    /// Dual norm above which the iteration is declared to escape to infinity.
    pub theta_max: f64,
    /// Relative eigenvalue gap that merges pencil eigenvalues into one face.
    pub degeneracy_tol: f64,
    /// State eigenvalues below this threshold do not belong to the support.
    pub rank_tol: f64,
    /// Newton iteration budget per level.
    pub max_iter: usize,
    /// Bound on the number of face compressions; `None` means the space
    /// dimension, which always suffices since each step drops the rank.
    pub max_face_depth: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: tol::NEWTON_GRAD,
            theta_max: tol::THETA_MAX,
            degeneracy_tol: tol::DEGENERACY,
            rank_tol: tol::SUPPORT_RANK,
            max_iter: 400,
            max_face_depth: None,
        }
    }
}

/// Value, gradient, and Hessian of `theta -> ln tr exp(sum_i theta_i u_i)`.
///
/// The Hessian is the covariance of the observables in the Gibbs state,
/// assembled from divided differences of the exponential in the pencil's
/// eigenbasis, so it stays accurate through eigenvalue collisions.
#[derive(Clone, Debug)]
pub struct LogPartition {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

pub fn log_partition(set: &ObservableSet, theta: &[f64]) -> Result<LogPartition> {
    log_partition_with_state(set, theta).map(|(lp, _)| lp)
}

/// Gibbs state `exp(sum_i theta_i u_i) / Z`.
pub fn gibbs_state(set: &ObservableSet, theta: &[f64]) -> Result<DensityMatrix> {
    log_partition_with_state(set, theta).map(|(_, state)| state)
}

fn log_partition_with_state(
    set: &ObservableSet,
    theta: &[f64],
) -> Result<(LogPartition, DensityMatrix)> {
    let r = set.len();
    let d = set.dim();
    let pencil = set.pencil(theta)?;
    let dec = hermitian_eig(&pencil);
    let shift = *dec.eigenvalues.last().expect("nonempty spectrum");
    let weights: Vec<f64> = dec.eigenvalues.iter().map(|l| (l - shift).exp()).collect();
    let mass: f64 = weights.iter().sum();
    let value = shift + mass.ln();
    let state = DensityMatrix::new(dec.assemble(|l| (l - shift).exp() / mass))?;

    // Observables rotated into the pencil's eigenbasis.
    let rotated: Vec<ComplexMatrix> = set
        .observables()
        .iter()
        .map(|u| {
            dec.eigenvectors
                .adjoint()
                .mul(u.matrix())?
                .mul(&dec.eigenvectors)
        })
        .collect::<Result<_>>()?;

    let gradient: Vec<f64> = rotated
        .iter()
        .map(|x| {
            (0..d)
                .map(|a| weights[a] / mass * x.get(a, a).re)
                .sum::<f64>()
        })
        .collect();

    // Divided differences of exp(. - shift); the midpoint form takes over
    // when an eigenvalue difference is too small to divide by safely.
    let mut phi = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            let (la, lb) = (dec.eigenvalues[a], dec.eigenvalues[b]);
            phi[a][b] = if (la - lb).abs() <= 1e-7 * (1.0 + la.abs() + lb.abs()) {
                (0.5 * (la + lb) - shift).exp()
            } else {
                (weights[a] - weights[b]) / (la - lb)
            };
        }
    }

    let mut hessian = vec![vec![0.0; r]; r];
    for i in 0..r {
        for j in i..r {
            let mut s = 0.0;
            for a in 0..d {
                for b in 0..d {
                    s += phi[a][b] * (rotated[i].get(a, b).conj() * rotated[j].get(a, b)).re;
                }
            }
            let h = s / mass - gradient[i] * gradient[j];
            hessian[i][j] = h;
            hessian[j][i] = h;
        }
    }

    Ok((LogPartition { value, gradient, hessian }, state))
}

/// How a solve terminated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// The dual converged at full rank: the target lies in the relative
    /// interior of the expected-value body.
    Interior,
    /// One or more face compressions were needed; the final level converged
    /// at full rank within the face's support.
    FaceCompressed,
    /// The recursion reached a one-dimensional support: the fiber over the
    /// target is a single state.
    SingletonFiber,
}

/// Dual certificate attached to a solution when a Newton solve produced it.
/// The multipliers apply to the observables compressed onto the face support
/// recorded in the solution's face descriptor.
#[derive(Clone, Debug)]
pub struct DualInfo {
    pub theta: Vec<f64>,
    pub gradient_norm: f64,
}

/// Entropy-maximizing state over the fiber of a target tuple.
#[derive(Clone, Debug)]
pub struct MaxEntSolution {
    state: DensityMatrix,
    status: SolveStatus,
    face: FaceDescriptor,
    dual: Option<DualInfo>,
    constraint_residual: f64,
    iterations: usize,
    entropy: f64,
}

impl MaxEntSolution {
    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn status(&self) -> SolveStatus {
        self.status
    }

    /// Smallest face of the expected-value body containing the target.
    pub fn face(&self) -> &FaceDescriptor {
        &self.face
    }

    pub fn dual(&self) -> Option<&DualInfo> {
        self.dual.as_ref()
    }

    /// Largest deviation `|tr(rho u_i) - alpha_i|`, measured with the
    /// original uncompressed observables.
    pub fn constraint_residual(&self) -> f64 {
        self.constraint_residual
    }

    /// Newton iterations summed over all face levels.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }
}

struct InteriorSolve {
    theta: Vec<f64>,
    state: DensityMatrix,
    gradient_norm: f64,
    iterations: usize,
}

enum InteriorOutcome {
    Converged(InteriorSolve),
    Escaped { direction: Vec<f64>, iterations: usize },
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cholesky solve of `(h + reg) x = -b`; `None` when a pivot fails.
fn solve_regularized(h: &[Vec<f64>], reg: f64, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i][j] + if i == j { reg } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = -b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

/// Damped Newton iteration on the dual. Converges for targets with an
/// attained dual optimum; otherwise reports the normalized direction along
/// which the multipliers run off to infinity.
fn maxent_interior(
    set: &ObservableSet,
    alpha: &[f64],
    opts: &SolverOptions,
) -> Result<InteriorOutcome> {
    let r = set.len();
    let mut theta = vec![0.0; r];
    let mut history: Vec<f64> = Vec::new();

    let (mut lp, mut state) = log_partition_with_state(set, &theta)?;
    for it in 0..opts.max_iter {
        let grad: Vec<f64> = lp.gradient.iter().zip(alpha).map(|(g, a)| g - a).collect();
        let gnorm = norm2(&grad);
        let tnorm = norm2(&theta);

        if gnorm <= opts.tol {
            return Ok(InteriorOutcome::Converged(InteriorSolve {
                theta,
                state,
                gradient_norm: gnorm,
                iterations: it,
            }));
        }
        history.push(gnorm);
        let stalled = history.len() > 10
            && tnorm >= 10.0
            && gnorm > (1.0 - 1e-3) * history[history.len() - 11];
        if tnorm > opts.theta_max || stalled {
            let direction = theta.iter().map(|t| t / tnorm).collect();
            return Ok(InteriorOutcome::Escaped { direction, iterations: it });
        }

        let scale = 1.0 + lp.hessian.iter().enumerate().map(|(i, row)| row[i].abs()).fold(0.0, f64::max);
        let step = solve_regularized(&lp.hessian, 1e-12 * scale, &grad)
            .or_else(|| solve_regularized(&lp.hessian, 1e-6 * scale, &grad))
            .ok_or_else(|| Error::SolverFailure("dual Hessian factorization failed".into()))?;

        // Armijo backtracking on the dual value.
        let value0 = lp.value - theta.iter().zip(alpha).map(|(t, a)| t * a).sum::<f64>();
        let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        if slope >= 0.0 {
            return Err(Error::SolverFailure(
                "Newton direction is not a descent direction".into(),
            ));
        }
        // The descent test carries a rounding allowance: near the optimum the
        // predicted decrease sinks below the precision of the dual value, and
        // a strict test would reject sound steps on evaluation noise.
        let rounding = 1e-15 * (1.0 + value0.abs());
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(x, s)| x + t * s).collect();
            let (lp_trial, state_trial) = log_partition_with_state(set, &trial)?;
            let value =
                lp_trial.value - trial.iter().zip(alpha).map(|(x, a)| x * a).sum::<f64>();
            if value <= value0 + 1e-4 * t * slope + rounding {
                theta = trial;
                lp = lp_trial;
                state = state_trial;
                break;
            }
            t *= 0.5;
            if t < 2f64.powi(-40) {
                // The dual value cannot be improved at double precision. Large
                // multipliers mean the optimum sits at infinity; small ones
                // mean a genuine numerical failure.
                if norm2(&theta) >= 10.0 {
                    let tn = norm2(&theta);
                    let direction = theta.iter().map(|x| x / tn).collect();
                    return Ok(InteriorOutcome::Escaped { direction, iterations: it });
                }
                return Err(Error::SolverFailure(
                    "dual line search exhausted at an interior point".into(),
                ));
            }
        }
    }

    let tnorm = norm2(&theta);
    if tnorm >= 10.0 {
        let direction = theta.iter().map(|t| t / tnorm).collect();
        return Ok(InteriorOutcome::Escaped { direction, iterations: opts.max_iter });
    }
    Err(Error::SolverFailure(format!(
        "dual iteration did not converge in {} steps",
        opts.max_iter
    )))
}

/// Projection onto the eigenvectors of a state with eigenvalue at least
/// `threshold`.
fn support_projection(state: &DensityMatrix, threshold: f64) -> Projection {
    let dec = hermitian_eig(&crate::linalg::HermitianMatrix::with_tolerance(
        state.matrix().clone(),
        1e-10,
    )
    .expect("density matrices are Hermitian"));
    let cols: Vec<_> = (0..state.dim())
        .filter(|&k| dec.eigenvalues[k] >= threshold)
        .map(|k| dec.column(k))
        .collect();
    Projection::from_orthonormal_columns(state.dim(), &cols)
}

/// Maximum-entropy state over the fiber of `alpha`, with the face of the
/// expected-value body that carries the target.
pub fn maxent(
    set: &ObservableSet,
    alpha: &ExpectedValue,
    opts: &SolverOptions,
) -> Result<MaxEntSolution> {
    let mut checkpoint = None;
    let result = maxent_drive(set, alpha, opts, &mut checkpoint);
    let Some(cp) = checkpoint else { return result };
    match result {
        // A speculative face snap only counts when the sharper face kept the
        // constraints; otherwise the checkpointed interior solution stands.
        Ok(sol) if sol.constraint_residual <= tol::CONSTRAINT_RESIDUAL.max(cp.constraint_residual) => {
            Ok(sol)
        }
        _ => Ok(cp),
    }
}

fn maxent_drive(
    set: &ObservableSet,
    alpha: &ExpectedValue,
    opts: &SolverOptions,
    checkpoint: &mut Option<MaxEntSolution>,
) -> Result<MaxEntSolution> {
    if alpha.len() != set.len() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} coordinates for {} observables",
            alpha.len(),
            set.len()
        )));
    }
    let depth_cap = opts.max_face_depth.unwrap_or(set.dim());
    let mut level = set.clone();
    let mut carrier: Option<OrthonormalBasis> = None;
    let mut chain: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0usize;
    let mut compressions = 0usize;

    loop {
        if level.dim() == 1 {
            let values: Vec<f64> = level
                .observables()
                .iter()
                .map(|u| u.matrix().get(0, 0).re)
                .collect();
            let (worst, deviation) = values
                .iter()
                .zip(alpha.coords())
                .map(|(v, a)| (v - a).abs())
                .enumerate()
                .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
            if deviation > tol::FACE_CONSISTENCY {
                return infeasibility_verdict(set, alpha, singleton_direction(&values, alpha, worst), deviation);
            }
            let state = embed_state(&DensityMatrix::maximally_mixed(1), &carrier)?;
            return finish(
                set, alpha, state, SolveStatus::SingletonFiber, None, &carrier, chain,
                iterations,
            );
        }

        match maxent_interior(&level, alpha.coords(), opts)? {
            InteriorOutcome::Converged(solve) => {
                iterations += solve.iterations;
                let spectrum = solve.state.spectrum();
                let min_eig = spectrum.first().copied().unwrap_or(0.0);
                if min_eig >= opts.rank_tol {
                    let status = if compressions == 0 {
                        SolveStatus::Interior
                    } else {
                        SolveStatus::FaceCompressed
                    };
                    let snap = if min_eig < tol::SUSPICIOUS_EIG {
                        snap_face(&level, alpha, &solve.theta, opts)?
                    } else {
                        None
                    };
                    let dual = DualInfo {
                        theta: solve.theta,
                        gradient_norm: solve.gradient_norm,
                    };
                    let state = embed_state(&solve.state, &carrier)?;
                    let here = finish(
                        set, alpha, state, status, Some(dual), &carrier, chain.clone(), iterations,
                    )?;
                    let Some((lambda, p)) = snap else { return Ok(here) };
                    if checkpoint.is_none() {
                        *checkpoint = Some(here);
                    }
                    chain.push(lambda);
                    descend(&mut level, &mut carrier, &p)?;
                } else {
                    // Converged with vanished eigenvalues: either a genuine
                    // landing on the face that carries the target, where the
                    // support of the Gibbs state is that face, or a phantom
                    // dip of the gradient near a bigger face, where the
                    // leftover support is tilted off every face. The match
                    // residual of the support tells the two apart; when the
                    // support cannot reach the target the multiplier is sent
                    // through the escape pipeline instead, and the better of
                    // the two clusters wins.
                    let tn = norm2(&solve.theta);
                    let p_support = support_projection(&solve.state, opts.rank_tol);
                    let proper =
                        p_support.rank() > 0 && p_support.rank() < level.dim();
                    let support_viability = if proper {
                        subspace_match_residual(&level, &p_support.orthonormal_basis(), alpha)
                            .map(|(_, rn)| rn)
                            .unwrap_or(f64::INFINITY)
                    } else {
                        f64::INFINITY
                    };
                    let scale =
                        1.0 + alpha.coords().iter().map(|a| a.abs()).fold(0.0, f64::max);
                    if support_viability <= 1e-13 * scale {
                        descend(&mut level, &mut carrier, &p_support)?;
                    } else if tn >= 1.0 {
                        let lambda: Vec<f64> = solve.theta.iter().map(|t| t / tn).collect();
                        match certified_escape(set, &level, alpha, lambda, opts) {
                            Ok((direction, p)) => {
                                let escape_viability = subspace_match_residual(
                                    &level,
                                    &p.orthonormal_basis(),
                                    alpha,
                                )
                                .map(|(_, rn)| rn)
                                .unwrap_or(f64::INFINITY);
                                if support_viability <= escape_viability {
                                    descend(&mut level, &mut carrier, &p_support)?;
                                } else {
                                    chain.push(direction);
                                    descend(&mut level, &mut carrier, &p)?;
                                }
                            }
                            Err(e @ Error::Infeasible { .. }) => return Err(e),
                            Err(e) => {
                                if support_viability <= tol::FACE_CONSISTENCY {
                                    descend(&mut level, &mut carrier, &p_support)?;
                                } else {
                                    return Err(e);
                                }
                            }
                        }
                    } else if proper {
                        descend(&mut level, &mut carrier, &p_support)?;
                    } else {
                        return Err(Error::FaceCertification(format!(
                            "support detection kept rank {} of {}",
                            p_support.rank(),
                            level.dim()
                        )));
                    }
                }
            }
            InteriorOutcome::Escaped { direction, iterations: its } => {
                iterations += its;
                let (direction, p) = certified_escape(set, &level, alpha, direction, opts)?;
                chain.push(direction);
                descend(&mut level, &mut carrier, &p)?;
            }
        }

        compressions += 1;
        if compressions > depth_cap {
            return Err(Error::FaceCertification(format!(
                "face recursion exceeded depth {depth_cap}"
            )));
        }
    }
}

/// Sharpens an escape direction by maximizing the slack
/// `alpha . lambda - h(lambda)` over the unit sphere.
///
/// The raw direction of a capped dual iterate is off the true exposing
/// direction by roughly `1 / theta_max`, and against a smoothly curved
/// boundary that error shifts the exposed face enough to make the compressed
/// level miss the target. Two phases:
///
/// 1. Supergradient ascent on the slack (a supergradient of `-h` is `-E` of
///    any top-eigenspace state of the pencil). This is globally safe and, for
///    infeasible targets, strengthens the separating direction, but it bottoms
///    out where slack differences drown in rounding, leaving the exposed
///    point off the target by the square root of machine precision.
/// 2. Newton on the residual `alpha - E(top eigenvector)` with the
///    eigenvector perturbation Jacobian. The residual is measurable to full
///    precision, so boundary targets with a simple exposing eigenvalue come
///    out exact; it shuts off on degenerate pencils, where phase 1 has
///    already stalled inside the normal cone of a flat face and any of its
///    directions exposes a face containing the target.
fn polish_escape_direction(
    level: &ObservableSet,
    alpha: &ExpectedValue,
    direction: Vec<f64>,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let scale = 1.0 + alpha.coords().iter().map(|a| a.abs()).fold(0.0, f64::max);
    let slack_of = |lambda: &[f64]| -> Result<f64> {
        Ok(alpha.dot(lambda) - level.support_function(lambda)?)
    };
    let exposed_values = |lambda: &[f64]| -> Result<Vec<f64>> {
        let pencil = level.pencil(lambda)?;
        let top = *hermitian_eig(&pencil).eigenvalues.last().expect("nonempty");
        let p = spectral_projection_max(&pencil, opts.degeneracy_tol * (1.0 + top.abs()));
        let k = p.rank() as f64;
        level
            .observables()
            .iter()
            .map(|u| u.matrix().mul(p.matrix()).map(|m| m.trace().re / k))
            .collect()
    };
    let tangent_residual = |lambda: &[f64], e: &[f64]| -> (Vec<f64>, f64) {
        let raw: Vec<f64> = alpha.coords().iter().zip(e).map(|(a, v)| a - v).collect();
        let radial: f64 = raw.iter().zip(lambda).map(|(d, l)| d * l).sum();
        let tangent: Vec<f64> = raw.iter().zip(lambda).map(|(d, l)| d - radial * l).collect();
        let tnorm = norm2(&tangent);
        (tangent, tnorm)
    };

    let mut lambda = direction;
    let mut best = slack_of(&lambda)?;
    for _ in 0..80 {
        let e = exposed_values(&lambda)?;
        let (tangent, tnorm) = tangent_residual(&lambda, &e);
        if tnorm <= 1e-12 * scale {
            break;
        }
        let mut t = 1.0;
        let mut improved = false;
        while t >= 2f64.powi(-45) {
            let trial: Vec<f64> = lambda.iter().zip(&tangent).map(|(l, d)| l + t * d).collect();
            let n = norm2(&trial);
            let trial: Vec<f64> = trial.iter().map(|x| x / n).collect();
            let value = slack_of(&trial)?;
            if value > best + 1e-4 * t * tnorm * tnorm {
                best = value;
                lambda = trial;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }

    // A certified violation must not be traded away: for separating
    // directions the refinement is kept only when it improves the slack.
    if best > tol::FACE_CONSISTENCY {
        if let Some(cand) = refine_exposing_direction(level, alpha, &lambda, opts)? {
            if slack_of(&cand)? >= best {
                return Ok(cand);
            }
        }
        return Ok(lambda);
    }

    // Boundary target: choose the direction whose exposed cluster keeps the
    // target reachable after compression. The single-eigenvector refinement
    // handles simple exposing pencils; the cluster refinements take over
    // when the top eigenvalue splits below eigenvector resolution.
    let mut chosen = lambda.clone();
    let mut score = descend_viability(level, alpha, &lambda, opts);
    if let Some(cand) = refine_exposing_direction(level, alpha, &lambda, opts)? {
        let s = descend_viability(level, alpha, &cand, opts);
        if s < score {
            chosen = cand;
            score = s;
        }
    }
    for k in 2..=(level.dim() - 1).min(4) {
        if score <= 1e-13 * scale {
            break;
        }
        if let Some(cand) = refine_cluster_direction(level, alpha, &lambda, k)? {
            let s = descend_viability(level, alpha, &cand, opts);
            if s < score {
                chosen = cand;
                score = s;
            }
        }
    }
    Ok(chosen)
}

/// Newton iteration on `alpha - E(top eigenvector of the pencil)` over the
/// unit sphere of directions. Returns the iterate of smallest residual, or
/// `None` when the starting pencil's top eigenvalue is too degenerate for
/// the perturbation Jacobian.
fn refine_exposing_direction(
    level: &ObservableSet,
    alpha: &ExpectedValue,
    start: &[f64],
    opts: &SolverOptions,
) -> Result<Option<Vec<f64>>> {
    let r = level.len();
    let scale = 1.0 + alpha.coords().iter().map(|a| a.abs()).fold(0.0, f64::max);

    // Residual and Jacobian at a direction with a simple top eigenvalue:
    // e_i = <T| u_i |T> and  J_ij = 2 Re sum_{k != T} <T|u_i|k><k|u_j|T> / (mu_T - mu_k).
    let eval = |lambda: &[f64]| -> Result<Option<(Vec<f64>, Vec<Vec<f64>>)>> {
        let pencil = level.pencil(lambda)?;
        let dec = hermitian_eig(&pencil);
        let n = dec.eigenvalues.len();
        let top = dec.eigenvalues[n - 1];
        let gap = if n > 1 { top - dec.eigenvalues[n - 2] } else { f64::INFINITY };
        if gap <= opts.degeneracy_tol * (1.0 + top.abs()) {
            return Ok(None);
        }
        let t = dec.column(n - 1);
        let e: Vec<f64> = level
            .observables()
            .iter()
            .map(|u| u.matrix().sandwich(&t, &t).re)
            .collect();
        let mut j = vec![vec![0.0; r]; r];
        for k in 0..n - 1 {
            let vk = dec.column(k);
            let w = 1.0 / (top - dec.eigenvalues[k]);
            let couplings: Vec<crate::linalg::C64> = level
                .observables()
                .iter()
                .map(|u| u.matrix().sandwich(&t, &vk))
                .collect();
            for a in 0..r {
                for b in 0..r {
                    j[a][b] += 2.0 * w * (couplings[a] * couplings[b].conj()).re;
                }
            }
        }
        Ok(Some((e, j)))
    };

    let residual_of = |lambda: &[f64], e: &[f64]| -> f64 {
        let raw: Vec<f64> = alpha.coords().iter().zip(e).map(|(a, v)| a - v).collect();
        let radial: f64 = raw.iter().zip(lambda).map(|(d, l)| d * l).sum();
        norm2(&raw.iter().zip(lambda).map(|(d, l)| d - radial * l).collect::<Vec<_>>())
    };

    let mut lambda = start.to_vec();
    let Some((mut e, mut jac)) = eval(&lambda)? else {
        return Ok(None);
    };
    let mut res = residual_of(&lambda, &e);
    let mut best = (lambda.clone(), res);
    for _ in 0..40 {
        if res <= 1e-14 * scale {
            break;
        }
        let raw: Vec<f64> = alpha.coords().iter().zip(&e).map(|(a, v)| a - v).collect();
        let Some(step) = pinv_solve(&jac, &raw) else {
            break;
        };
        let mut accepted = false;
        let mut t = 1.0;
        while t >= 2f64.powi(-20) {
            let trial: Vec<f64> = lambda.iter().zip(&step).map(|(l, s)| l + t * s).collect();
            let n = norm2(&trial);
            if n == 0.0 {
                break;
            }
            let trial: Vec<f64> = trial.iter().map(|x| x / n).collect();
            if let Some((e_t, j_t)) = eval(&trial)? {
                let r_t = residual_of(&trial, &e_t);
                if r_t < res * (1.0 - 1e-4 * t) {
                    lambda = trial;
                    e = e_t;
                    jac = j_t;
                    res = r_t;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if res < best.1 {
            best = (lambda.clone(), res);
        }
    }
    Ok(Some(best.0))
}

/// Least-squares solve of a small symmetric positive semidefinite system by
/// spectral pseudoinverse.
fn pinv_solve(mat: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let r = mat.len();
    let mut entries = Vec::with_capacity(r * r);
    for row in mat {
        for &x in row {
            entries.push(crate::linalg::C64::new(x, 0.0));
        }
    }
    let complex = ComplexMatrix::new(r, entries).ok()?;
    let dec = hermitian_eig(&crate::linalg::HermitianMatrix::with_tolerance(complex, 1e-8).ok()?);
    let top = dec.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if top == 0.0 {
        return None;
    }
    let cutoff = 1e-12 * top;
    let mut out = vec![0.0; r];
    for k in 0..r {
        let mu = dec.eigenvalues[k];
        if mu <= cutoff {
            continue;
        }
        let v = dec.column(k);
        let coeff: f64 = v.iter().zip(rhs).map(|(c, b)| c.re * b).sum();
        for (o, c) in out.iter_mut().zip(&v) {
            *o += coeff / mu * c.re;
        }
    }
    Some(out)
}

/// Best least-squares match of the target by a state supported on the given
/// subspace, returned as the residual vector `E(rho) - alpha` and its norm.
///
/// The match solves a linear system in the traceless Hermitian parameters of
/// the compressed state and shrinks toward the normalized trace when the
/// unconstrained optimum leaves the positive cone. Every state of the
/// target's fiber must survive a face compression, so this residual measures
/// descent viability directly, and it stays well conditioned even where
/// individual eigenvectors of a clustered pencil are not.
fn subspace_match_residual(
    level: &ObservableSet,
    basis: &OrthonormalBasis,
    alpha: &ExpectedValue,
) -> Result<(Vec<f64>, f64)> {
    let compressed = level.compress(basis)?;
    let k = basis.len();
    let r = level.len();
    let n_params = k * k - 1;

    // Linear map from traceless Hermitian parameters to expected-value
    // shifts, with the maximally mixed state on the subspace as base point.
    let mut m = vec![vec![0.0; n_params]; r];
    let mut rhs = vec![0.0; r];
    for (i, u) in compressed.observables().iter().enumerate() {
        let um = u.matrix();
        let mut col = 0usize;
        for a in 0..k {
            for b in (a + 1)..k {
                m[i][col] = 2.0 * um.get(a, b).re;
                m[i][col + 1] = 2.0 * um.get(a, b).im;
                col += 2;
            }
        }
        for a in 0..k.saturating_sub(1) {
            m[i][col] = um.get(a, a).re - um.get(a + 1, a + 1).re;
            col += 1;
        }
        let tr: f64 = (0..k).map(|a| um.get(a, a).re).sum();
        rhs[i] = alpha.coords()[i] - tr / k as f64;
    }

    let mut gram = vec![vec![0.0; n_params]; n_params];
    let mut proj = vec![0.0; n_params];
    for p in 0..n_params {
        for q in 0..n_params {
            gram[p][q] = (0..r).map(|i| m[i][p] * m[i][q]).sum();
        }
        proj[p] = (0..r).map(|i| m[i][p] * rhs[i]).sum();
    }
    let y = pinv_solve(&gram, &proj).unwrap_or_else(|| vec![0.0; n_params]);

    let mut delta = ComplexMatrix::zeros(k);
    let mut col = 0usize;
    for a in 0..k {
        for b in (a + 1)..k {
            delta.set(a, b, C64::new(y[col], y[col + 1]));
            delta.set(b, a, C64::new(y[col], -y[col + 1]));
            col += 2;
        }
    }
    for a in 0..k.saturating_sub(1) {
        let v = y[col];
        let da = delta.get(a, a).re;
        let db = delta.get(a + 1, a + 1).re;
        delta.set(a, a, C64::new(da + v, 0.0));
        delta.set(a + 1, a + 1, C64::new(db - v, 0.0));
        col += 1;
    }
    let mut state = ComplexMatrix::zeros(k);
    for a in 0..k {
        state.set(a, a, C64::new(1.0 / k as f64, 0.0));
    }
    let state = state.add(&delta)?;
    let dec = hermitian_eig(&HermitianMatrix::with_tolerance(state, 1e-8)?);
    let mu_min = dec.eigenvalues.first().copied().unwrap_or(0.0);
    let tau = if mu_min < 0.0 {
        let base = 1.0 / k as f64;
        (base / (base - mu_min)) * (1.0 - 1e-12)
    } else {
        1.0
    };
    let resid: Vec<f64> = (0..r)
        .map(|i| {
            let shift: f64 = (0..n_params).map(|p| m[i][p] * y[p]).sum();
            tau * shift - rhs[i]
        })
        .collect();
    let norm = norm2(&resid);
    Ok((resid, norm))
}

/// Orthonormal basis of the top-`k` eigenvectors of the pencil along
/// `lambda`. The individual vectors may be arbitrary within a degenerate
/// cluster; only the span is used.
fn top_cluster_basis(level: &ObservableSet, lambda: &[f64], k: usize) -> Result<OrthonormalBasis> {
    let pencil = level.pencil(lambda)?;
    let dec = hermitian_eig(&pencil);
    let d = level.dim();
    let cols: Vec<Vec<C64>> = (d - k..d).map(|j| dec.column(j)).collect();
    OrthonormalBasis::new(d, cols)
}

/// Gauss-Newton iteration on the subspace-match residual of the top-`k`
/// eigenvalue cluster, over the unit sphere of directions.
///
/// Close to a bigger face, the exposing direction of a small face can have a
/// top eigenvalue that splits only at the scale of the target's distance to
/// that bigger face, far below eigenvector resolution, which disables the
/// single-eigenvector refinement. The cluster subspace is still perfectly
/// conditioned, and the fiber must sit inside it at the true direction, so
/// the match residual vanishes there and is measurable to full precision.
/// The Jacobian comes from finite differences; the systems are tiny.
fn refine_cluster_direction(
    level: &ObservableSet,
    alpha: &ExpectedValue,
    start: &[f64],
    k: usize,
) -> Result<Option<Vec<f64>>> {
    let d = level.dim();
    if k == 0 || k >= d {
        return Ok(None);
    }
    let r = level.len();
    let scale = 1.0 + alpha.coords().iter().map(|a| a.abs()).fold(0.0, f64::max);
    let eval = |lambda: &[f64]| -> Result<(Vec<f64>, f64)> {
        subspace_match_residual(level, &top_cluster_basis(level, lambda, k)?, alpha)
    };

    let start_norm = norm2(start);
    if start_norm == 0.0 {
        return Ok(None);
    }
    let mut lambda: Vec<f64> = start.iter().map(|x| x / start_norm).collect();
    let (mut rv, mut rn) = eval(&lambda)?;
    let mut best = (lambda.clone(), rn);
    // Marquardt damping: the finite-difference Jacobian picks up noise in the
    // sphere-radial direction and along flat tangents, so an undamped normal
    // step can point anywhere. The damping floor keeps those components out
    // while leaving the measurable descent direction at full Newton length.
    let mut mu = 1e-3;
    for _ in 0..25 {
        if rn <= 1e-14 * scale {
            break;
        }
        let h = 1e-7;
        let mut jt: Vec<Vec<f64>> = Vec::with_capacity(r);
        for j in 0..r {
            let mut probe = lambda.clone();
            probe[j] += h;
            let n = norm2(&probe);
            let probe: Vec<f64> = probe.iter().map(|x| x / n).collect();
            let (rj, _) = eval(&probe)?;
            jt.push(rj.iter().zip(&rv).map(|(a, b)| (a - b) / h).collect());
        }
        let mut gram = vec![vec![0.0; r]; r];
        let mut jtr = vec![0.0; r];
        for p in 0..r {
            for q in 0..r {
                gram[p][q] = jt[p].iter().zip(&jt[q]).map(|(x, y)| x * y).sum();
            }
            jtr[p] = jt[p].iter().zip(&rv).map(|(x, y)| x * y).sum::<f64>();
        }
        let gtop = (0..r).map(|p| gram[p][p]).fold(0.0f64, f64::max);
        if gtop <= 0.0 || !gtop.is_finite() {
            break;
        }
        let mut accepted = false;
        for _ in 0..12 {
            let Some(step) = solve_regularized(&gram, mu * gtop, &jtr) else {
                mu *= 8.0;
                continue;
            };
            let trial: Vec<f64> = lambda.iter().zip(&step).map(|(l, s)| l + s).collect();
            let n = norm2(&trial);
            if n == 0.0 {
                mu *= 8.0;
                continue;
            }
            let trial: Vec<f64> = trial.iter().map(|x| x / n).collect();
            let (rv_t, rn_t) = eval(&trial)?;
            if rn_t < rn {
                lambda = trial;
                rv = rv_t;
                rn = rn_t;
                accepted = true;
                mu = (mu * 0.3).max(1e-9);
                break;
            }
            mu *= 8.0;
        }
        if !accepted {
            break;
        }
        if rn < best.1 {
            best = (lambda.clone(), rn);
        }
    }
    Ok(Some(best.0))
}

/// How well the target survives compressing onto the cluster a direction
/// exposes; infinite when the direction exposes no proper face at all.
fn descend_viability(
    level: &ObservableSet,
    alpha: &ExpectedValue,
    lambda: &[f64],
    opts: &SolverOptions,
) -> f64 {
    let Ok(p) = escape_cluster(level, lambda, opts) else {
        return f64::INFINITY;
    };
    match subspace_match_residual(level, &p.orthonormal_basis(), alpha) {
        Ok((_, rn)) => rn,
        Err(_) => f64::INFINITY,
    }
}

/// Polishes a raw escape direction and certifies the face descent it gives:
/// a genuine violation becomes an infeasibility verdict, a hyperplane that
/// misses the target without a viable cluster is a certification failure,
/// and otherwise the cluster projection is returned for the descent.
fn certified_escape(
    set: &ObservableSet,
    level: &ObservableSet,
    alpha: &ExpectedValue,
    raw: Vec<f64>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Projection)> {
    let direction = polish_escape_direction(level, alpha, raw, opts)?;
    let level_h = level.support_function(&direction)?;
    let slack = alpha.dot(&direction) - level_h;
    if slack > tol::FACE_CONSISTENCY {
        infeasibility_verdict(set, alpha, direction, slack)?;
        unreachable!("the infeasibility verdict always errs");
    }
    let p = escape_cluster(level, &direction, opts)?;
    if slack < -tol::FACE_CONSISTENCY {
        // The supporting hyperplane passes above the target. The descent can
        // still be sound when the cluster keeps the target reachable, which
        // happens when the direction resolves a face too small for its own
        // hyperplane to be located at full precision.
        let (_, viability) = subspace_match_residual(level, &p.orthonormal_basis(), alpha)?;
        if viability > tol::FACE_CONSISTENCY {
            return Err(Error::FaceCertification(format!(
                "escape direction undershoots the target by {:e}",
                -slack
            )));
        }
    }
    Ok((direction, p))
}

/// Face snap test for a dual that converged with a near-vanishing state
/// eigenvalue.
///
/// Such a weight can be a phantom: near a short face, the gradient tolerance
/// can fire through error cancellation while the multipliers are actually
/// running off to infinity, and the leftover weight then sits above the rank
/// threshold without belonging to the fiber. The converged multiplier
/// direction tells the two cases apart: when it exposes a proper face whose
/// supporting hyperplane passes through the target, descending into that
/// face is consistent; the caller checkpoints the interior answer and falls
/// back to it if the descent fails or worsens the constraints.
fn snap_face(
    level: &ObservableSet,
    alpha: &ExpectedValue,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<Option<(Vec<f64>, Projection)>> {
    let tn = norm2(theta);
    if tn < 1.0 {
        return Ok(None);
    }
    let lambda: Vec<f64> = theta.iter().map(|t| t / tn).collect();
    let Ok(p) = escape_cluster(level, &lambda, opts) else {
        return Ok(None);
    };
    let slack = alpha.dot(&lambda) - level.support_function(&lambda)?;
    if slack.abs() > tol::FACE_CONSISTENCY {
        return Ok(None);
    }
    Ok(Some((lambda, p)))
}

/// Top eigenvalue cluster of the pencil along an escape direction. The merge
/// width combines the configured degeneracy tolerance with the resolution
/// limit of the dual iteration: eigenvalues closer than
/// `ln(1/tol) / theta_max` cannot be told apart by multipliers that were
/// capped at `theta_max`, so they must be kept together.
fn escape_cluster(
    level: &ObservableSet,
    direction: &[f64],
    opts: &SolverOptions,
) -> Result<Projection> {
    let pencil = level.pencil(direction)?;
    let top = *hermitian_eig(&pencil).eigenvalues.last().expect("nonempty");
    let resolution = (1.0 / opts.tol).ln() / opts.theta_max;
    let generous = opts.degeneracy_tol.max(resolution) * (1.0 + top.abs());
    let mut p = spectral_projection_max(&pencil, generous);
    if p.rank() >= level.dim() {
        let strict = opts.degeneracy_tol * (1.0 + top.abs());
        p = spectral_projection_max(&pencil, strict);
    }
    if p.rank() >= level.dim() {
        return Err(Error::FaceCertification(
            "escape direction exposes no proper face".into(),
        ));
    }
    Ok(p)
}

/// Compress the level onto `range(p)` and extend the carrier basis.
fn descend(
    level: &mut ObservableSet,
    carrier: &mut Option<OrthonormalBasis>,
    p: &Projection,
) -> Result<()> {
    let basis = p.orthonormal_basis();
    *level = level.compress(&basis)?;
    *carrier = Some(match carrier {
        Some(outer) => outer.compose(&basis)?,
        None => basis,
    });
    Ok(())
}

fn embed_state(state: &DensityMatrix, carrier: &Option<OrthonormalBasis>) -> Result<DensityMatrix> {
    match carrier {
        Some(basis) => DensityMatrix::new(basis.embed(state.matrix())?),
        None => Ok(state.clone()),
    }
}

fn singleton_direction(values: &[f64], alpha: &ExpectedValue, worst: usize) -> Vec<f64> {
    let mut dir = vec![0.0; values.len()];
    dir[worst] = if alpha.coords()[worst] > values[worst] { 1.0 } else { -1.0 };
    dir
}

/// An escape or singleton mismatch certifies infeasibility only against the
/// full observables; a compressed level can also mismatch because an earlier
/// face was cut too small, which is an internal failure, not infeasibility.
fn infeasibility_verdict(
    set: &ObservableSet,
    alpha: &ExpectedValue,
    direction: Vec<f64>,
    level_violation: f64,
) -> Result<MaxEntSolution> {
    let full_h = set.support_function(&direction)?;
    let violation = alpha.dot(&direction) - full_h;
    if violation > tol::FACE_CONSISTENCY {
        return Err(Error::Infeasible { direction, violation });
    }
    Err(Error::FaceCertification(format!(
        "level violation {level_violation:e} not confirmed by the full problem"
    )))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    set: &ObservableSet,
    alpha: &ExpectedValue,
    state: DensityMatrix,
    status: SolveStatus,
    dual: Option<DualInfo>,
    carrier: &Option<OrthonormalBasis>,
    chain: Vec<Vec<f64>>,
    iterations: usize,
) -> Result<MaxEntSolution> {
    let projection = match carrier {
        Some(basis) => basis.projection(),
        None => Projection::identity(set.dim()),
    };
    let dim = set.face_dimension(&projection)?;
    let face = FaceDescriptor {
        projection,
        exposing_direction: chain.last().cloned(),
        dim,
        exposure_chain: chain,
    };
    let achieved = set.expected_values(&state)?;
    let constraint_residual = achieved
        .coords()
        .iter()
        .zip(alpha.coords())
        .map(|(e, a)| (e - a).abs())
        .fold(0.0, f64::max);
    let entropy = state.entropy()?;
    Ok(MaxEntSolution {
        state,
        status,
        face,
        dual,
        constraint_residual,
        iterations,
        entropy,
    })
}

/// Verdict of a continuity probe along a parametrized target path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeVerdict {
    /// The path states settle and land on the state at the limit target.
    Continuous,
    /// The path states settle at positive distance from the limit state.
    Discontinuous,
    /// The path states do not settle within the schedule.
    Inconclusive,
}

/// Record of solving along `path(t_k)` for a dyadic schedule `t_k -> 0` and
/// comparing against the solution at `path(0)`.
#[derive(Clone, Debug)]
pub struct ContinuityReport {
    pub schedule: Vec<f64>,
    pub distances_to_limit: Vec<f64>,
    pub successive_distances: Vec<f64>,
    pub settled_defect: f64,
    pub gap: f64,
    pub entropy_path_end: f64,
    pub entropy_at_limit: f64,
    pub verdict: ProbeVerdict,
}

/// Probes whether the inference map is continuous along a target path as
/// `t -> 0`. The path is sampled on `t = 2^-k`, `k = 3..=20`; the tail must
/// be a Cauchy sequence before the probe compares it with the limit target's
/// own solution.
pub fn continuity_probe(
    set: &ObservableSet,
    path: impl Fn(f64) -> ExpectedValue,
    opts: &SolverOptions,
) -> Result<ContinuityReport> {
    let schedule: Vec<f64> = (3..=20).map(|k| 2f64.powi(-k)).collect();
    let limit = maxent(set, &path(0.0), opts)?;
    let mut states = Vec::with_capacity(schedule.len());
    for &t in &schedule {
        states.push(maxent(set, &path(t), opts)?);
    }
    let distances_to_limit: Vec<f64> = states
        .iter()
        .map(|s| crate::states::trace_distance(s.state(), limit.state()))
        .collect::<Result<_>>()?;
    let successive_distances: Vec<f64> = states
        .windows(2)
        .map(|w| crate::states::trace_distance(w[0].state(), w[1].state()))
        .collect::<Result<_>>()?;
    // Remaining movement past the end of the schedule. A geometrically
    // decaying tail is summable, so its defect is the geometric-sum bound;
    // without decay evidence the defect is the raw tail movement itself.
    let d_last = successive_distances[successive_distances.len() - 1];
    let d_prev = successive_distances[successive_distances.len() - 2];
    let settled_defect = if d_last < 0.9 * d_prev {
        let r = d_last / d_prev;
        d_last * r / (1.0 - r)
    } else {
        d_last.max(d_prev)
    };
    let gap = *distances_to_limit.last().expect("nonempty schedule");
    let verdict = if settled_defect >= tol::CAUCHY {
        ProbeVerdict::Inconclusive
    } else if gap > tol::GAP {
        ProbeVerdict::Discontinuous
    } else {
        ProbeVerdict::Continuous
    };
    Ok(ContinuityReport {
        schedule,
        distances_to_limit,
        successive_distances,
        settled_defect,
        gap,
        entropy_path_end: states.last().expect("nonempty").entropy(),
        entropy_at_limit: limit.entropy(),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, HermitianMatrix};
    use crate::states::pauli;

    #[test]
    fn segment_targets_resolve_down_to_the_dyadic_tail() {
        // Near the short edge of the body the exposing pencil's top gap
        // shrinks like the square of the offset, which once drove the dual
        // into a false interior convergence and a tilted support. The whole
        // dyadic schedule must come back as the exact pure state.
        use crate::fixtures::{segment_triple, segment_triple_state, segment_triple_target};
        let set = segment_triple();
        let opts = SolverOptions::default();
        for k in [3, 8, 13, 17, 20] {
            let t = 2f64.powi(-k);
            let sol = maxent(&set, &segment_triple_target(t), &opts).unwrap();
            assert_eq!(sol.face().dim(), 0, "k={k} fiber should be a point");
            assert_eq!(sol.face().projection().rank(), 1, "k={k} support should be pure");
            let truth = segment_triple_state(t);
            let td = crate::states::trace_distance(sol.state(), &truth).unwrap();
            assert!(td < 1e-6, "k={k} solved state off by {td:e}");
            assert!(sol.entropy().abs() < 1e-9, "k={k} entropy {:e}", sol.entropy());
        }
    }

    fn pauli_set(indices: &[usize]) -> ObservableSet {
        ObservableSet::new(indices.iter().map(|&i| pauli(i).unwrap()).collect()).unwrap()
    }

    fn block_set() -> ObservableSet {
        // u1 = (pauli x) (+) [1], u2 = (pauli y) (+) [0].
        let mut u1 = ComplexMatrix::zeros(3);
        u1.set(0, 1, C64::new(1.0, 0.0));
        u1.set(1, 0, C64::new(1.0, 0.0));
        u1.set(2, 2, C64::new(1.0, 0.0));
        let mut u2 = ComplexMatrix::zeros(3);
        u2.set(0, 1, C64::new(0.0, -1.0));
        u2.set(1, 0, C64::new(0.0, 1.0));
        ObservableSet::new(vec![
            HermitianMatrix::new(u1).unwrap(),
            HermitianMatrix::new(u2).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn log_partition_gradient_matches_finite_differences() {
        let set = block_set();
        let theta = [0.37, -0.61];
        let lp = log_partition(&set, &theta).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut up = theta.to_vec();
            let mut dn = theta.to_vec();
            up[i] += h;
            dn[i] -= h;
            let fd = (log_partition(&set, &up).unwrap().value
                - log_partition(&set, &dn).unwrap().value)
                / (2.0 * h);
            assert!(
                (lp.gradient[i] - fd).abs() < 1e-6,
                "gradient {i}: {} vs {fd}",
                lp.gradient[i]
            );
        }
    }

    #[test]
    fn log_partition_hessian_matches_finite_differences() {
        let set = pauli_set(&[1, 2, 3]);
        let theta = [0.2, -0.4, 0.15];
        let lp = log_partition(&set, &theta).unwrap();
        let h = 1e-5;
        for j in 0..3 {
            let mut up = theta.to_vec();
            let mut dn = theta.to_vec();
            up[j] += h;
            dn[j] -= h;
            let gu = log_partition(&set, &up).unwrap().gradient;
            let gd = log_partition(&set, &dn).unwrap().gradient;
            for i in 0..3 {
                let fd = (gu[i] - gd[i]) / (2.0 * h);
                assert!(
                    (lp.hessian[i][j] - fd).abs() < 1e-5,
                    "hessian {i}{j}: {} vs {fd}",
                    lp.hessian[i][j]
                );
            }
        }
    }

    #[test]
    fn hessian_divided_differences_survive_degenerate_pencils() {
        // theta = 0 makes the pencil zero: every eigenvalue collides.
        let set = pauli_set(&[1, 3]);
        let lp = log_partition(&set, &[0.0, 0.0]).unwrap();
        // Covariance of x and z in the maximally mixed qubit is the identity.
        assert!((lp.hessian[0][0] - 1.0).abs() < 1e-12);
        assert!((lp.hessian[1][1] - 1.0).abs() < 1e-12);
        assert!(lp.hessian[0][1].abs() < 1e-12);
        assert!((lp.value - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn central_target_returns_maximally_mixed_at_zero_multipliers() {
        let set = pauli_set(&[1, 2]);
        let sol = maxent(&set, &ExpectedValue::new(vec![0.0, 0.0]), &SolverOptions::default())
            .unwrap();
        assert_eq!(sol.status(), SolveStatus::Interior);
        assert_eq!(sol.iterations(), 0);
        assert!(sol.constraint_residual() < 1e-12);
        assert!((sol.entropy() - 2f64.ln()).abs() < 1e-12);
        assert!(sol.face().is_whole_body());
        assert_eq!(sol.face().dim(), 2);
        let diff = sol
            .state()
            .matrix()
            .sub(DensityMatrix::maximally_mixed(2).matrix())
            .unwrap();
        assert!(diff.max_abs_entry() < 1e-12);
    }

    #[test]
    fn single_observable_recovers_the_tanh_profile() {
        let set = pauli_set(&[3]);
        let target = (0.3f64).tanh();
        let sol = maxent(&set, &ExpectedValue::new(vec![target]), &SolverOptions::default())
            .unwrap();
        assert_eq!(sol.status(), SolveStatus::Interior);
        let dual = sol.dual().unwrap();
        assert!((dual.theta[0] - 0.3).abs() < 1e-8);
        assert!((sol.state().matrix().get(0, 0).re - (1.0 + target) / 2.0).abs() < 1e-10);
        assert!(sol.constraint_residual() < 1e-9);
    }

    #[test]
    fn extreme_target_compresses_to_a_singleton() {
        let set = pauli_set(&[3]);
        let sol = maxent(&set, &ExpectedValue::new(vec![1.0]), &SolverOptions::default())
            .unwrap();
        assert_eq!(sol.status(), SolveStatus::SingletonFiber);
        assert!((sol.state().matrix().get(0, 0).re - 1.0).abs() < 1e-8);
        assert!(sol.state().matrix().get(1, 1).norm() < 1e-8);
        assert!(sol.entropy().abs() < 1e-8);
        assert_eq!(sol.face().dim(), 0);
        assert_eq!(sol.face().projection().rank(), 1);
        assert!(sol.constraint_residual() < 1e-8);
    }

    #[test]
    fn infeasible_target_is_certified_by_a_direction() {
        let set = pauli_set(&[3]);
        let err = maxent(&set, &ExpectedValue::new(vec![1.5]), &SolverOptions::default())
            .unwrap_err();
        match err {
            Error::Infeasible { direction, violation } => {
                assert!((direction[0] - 1.0).abs() < 1e-9);
                assert!((violation - 0.5).abs() < 1e-6);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_two_observable_target_is_rejected() {
        let err = maxent(
            &block_set(),
            &ExpectedValue::new(vec![1.0, 0.5]),
            &SolverOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn flat_face_target_maximizes_entropy_on_the_support() {
        // The face of the block example over (1, 0) carries a full qubit of
        // states; the inference picks its maximally mixed point.
        let set = block_set();
        let sol = maxent(&set, &ExpectedValue::new(vec![1.0, 0.0]), &SolverOptions::default())
            .unwrap();
        assert_eq!(sol.status(), SolveStatus::FaceCompressed);
        assert_eq!(sol.face().projection().rank(), 2);
        assert_eq!(sol.face().dim(), 0);
        assert!((sol.entropy() - 2f64.ln()).abs() < 1e-7);
        assert!(sol.constraint_residual() < 1e-7);
        // Embedded support: span{(e0 + e1)/sqrt 2, e2}.
        let m = sol.state().matrix();
        assert!((m.get(0, 0).re - 0.25).abs() < 1e-7);
        assert!((m.get(0, 1).re - 0.25).abs() < 1e-7);
        assert!((m.get(2, 2).re - 0.5).abs() < 1e-7);
        assert!(m.get(0, 2).norm() < 1e-7);
    }

    #[test]
    fn diagonal_observables_reduce_to_the_classical_problem() {
        let mut u1 = ComplexMatrix::zeros(3);
        u1.set(0, 0, C64::new(1.0, 0.0));
        let mut u2 = ComplexMatrix::zeros(3);
        u2.set(1, 1, C64::new(1.0, 0.0));
        let set = ObservableSet::new(vec![
            HermitianMatrix::new(u1).unwrap(),
            HermitianMatrix::new(u2).unwrap(),
        ])
        .unwrap();
        let sol = maxent(
            &set,
            &ExpectedValue::new(vec![0.2, 0.3]),
            &SolverOptions::default(),
        )
        .unwrap();
        let m = sol.state().matrix();
        assert!((m.get(0, 0).re - 0.2).abs() < 1e-9);
        assert!((m.get(1, 1).re - 0.3).abs() < 1e-9);
        assert!((m.get(2, 2).re - 0.5).abs() < 1e-9);
        assert!(m.get(0, 1).norm() < 1e-9);
        let want = -(0.2f64.ln() * 0.2 + 0.3f64.ln() * 0.3 + 0.5f64.ln() * 0.5);
        assert!((sol.entropy() - want).abs() < 1e-9);
    }

    #[test]
    fn probe_along_an_interior_path_is_continuous() {
        let set = pauli_set(&[1, 3]);
        let report = continuity_probe(
            &set,
            |t| ExpectedValue::new(vec![0.3 * (1.0 - t), 0.1 * t]),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, ProbeVerdict::Continuous);
        assert!(report.gap < 1e-6);
        assert!(report.settled_defect < tol::CAUCHY);
    }

    #[test]
    fn probe_flags_the_segment_jump_with_its_entropy_drop() {
        // Along this path the solutions stay pure, but the limit target's
        // fiber is a whole segment whose center carries entropy ln 2. The
        // probe must see the tail settle away from that center.
        use crate::fixtures::{segment_triple, segment_triple_target};
        let set = segment_triple();
        let report =
            continuity_probe(&set, segment_triple_target, &SolverOptions::default()).unwrap();
        assert_eq!(report.verdict, ProbeVerdict::Discontinuous);
        assert!((report.gap - 0.5).abs() < 1e-4, "gap {:e}", report.gap);
        let jump = report.entropy_at_limit - report.entropy_path_end;
        assert!((jump - 2f64.ln()).abs() < 1e-6, "entropy jump {jump:e}");
    }
}
