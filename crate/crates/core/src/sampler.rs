//! Independence Metropolis-Hastings chains driven by RML proposals.
//!
//! [`run_chain_augmented`] carries the augmented state `(x, d)` and needs only
//! the Jacobian of the inverse map. [`run_chain_legacy_1d`] keeps `x` alone
//! and integrates the joint proposal density over the data variable, which is
//! only practical for scalar problems; it serves as a cross-check.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{log_target_marginal, HyperParams};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::optimizer::{minimize, OptSettings};
use crate::proposal::{propose, CandidateState, JacobianMode};
use crate::rng::{acceptance_stream, proposal_stream};

/// Consecutive optimizer failures tolerated while looking for a start state.
pub const MAX_INIT_FAILURES: usize = 100;

/// Proposals generated per parallel batch.
const PROPOSAL_BATCH: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub x: DVector<f64>,
    pub d: DVector<f64>,
    pub log_pi_joint: f64,
    pub log_q: f64,
    pub step_index: usize,
}

impl ChainState {
    fn from_candidate(c: &CandidateState, step_index: usize) -> Self {
        Self {
            x: c.x_star.clone(),
            d: c.d_star.clone(),
            log_pi_joint: c.log_pi_joint,
            log_q: c.log_q,
            step_index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Augmented,
    #[serde(rename = "legacy-1d")]
    Legacy1d,
}

/// Settings a chain was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub problem: String,
    pub algorithm: Algorithm,
    pub rho: f64,
    pub gamma: f64,
    pub jacobian_mode: JacobianMode,
    pub n_steps: usize,
    pub optimizer: OptSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub initial: ChainState,
    /// State after each step; `states[i].step_index == i + 1`.
    pub states: Vec<ChainState>,
    pub accept_flags: Vec<bool>,
    pub n_proposed: usize,
    pub n_accepted: usize,
    /// Proposals rejected because the optimizer failed or the candidate was
    /// degenerate.
    pub n_optfail: usize,
    pub seed: u64,
    pub config: ChainConfig,
}

impl ChainRecord {
    pub fn acceptance_rate(&self) -> f64 {
        self.n_accepted as f64 / self.n_proposed as f64
    }

    /// Acceptance among proposals that produced a valid candidate.
    pub fn acceptance_rate_converged(&self) -> f64 {
        let valid = self.n_proposed - self.n_optfail;
        if valid == 0 {
            0.0
        } else {
            self.n_accepted as f64 / valid as f64
        }
    }

    pub fn xs(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.states.iter().map(|s| &s.x)
    }

    /// Model-space samples after dropping the first `discard` states.
    pub fn samples(&self, discard: usize) -> Vec<DVector<f64>> {
        self.states.iter().skip(discard).map(|s| s.x.clone()).collect()
    }
}

/// `min(1, π(new) q(cur) / (π(cur) q(new)))`, evaluated in log space.
pub fn mh_accept_prob(log_pi_new: f64, log_q_new: f64, log_pi_cur: f64, log_q_cur: f64) -> f64 {
    if log_pi_new == f64::NEG_INFINITY {
        return 0.0;
    }
    if log_pi_cur == f64::NEG_INFINITY {
        return 1.0;
    }
    let log_ratio = log_pi_new + log_q_cur - log_pi_cur - log_q_new;
    if log_ratio.is_nan() {
        return 0.0;
    }
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

fn proposal_k(p: &ProblemSpec, h: &HyperParams, s: &OptSettings, seed: u64, k: u64, mode: JacobianMode) -> Result<CandidateState> {
    let mut rng = proposal_stream(seed, k);
    propose(p, h, s, &mut rng, mode)
}

/// Source of proposals indexed by their substream, optionally precomputed in
/// parallel batches. Results are identical either way.
struct ProposalFeed<'a> {
    p: &'a ProblemSpec,
    h: &'a HyperParams,
    s: &'a OptSettings,
    seed: u64,
    mode: JacobianMode,
    next: u64,
    batch: usize,
    buffer: std::collections::VecDeque<CandidateState>,
}

impl<'a> ProposalFeed<'a> {
    fn next(&mut self) -> Result<CandidateState> {
        if self.buffer.is_empty() {
            let start = self.next;
            let batch = self.batch.max(1) as u64;
            let out: Vec<Result<CandidateState>> = if batch == 1 {
                vec![proposal_k(self.p, self.h, self.s, self.seed, start, self.mode)]
            } else {
                (start..start + batch)
                    .into_par_iter()
                    .map(|k| proposal_k(self.p, self.h, self.s, self.seed, k, self.mode))
                    .collect()
            };
            for c in out {
                self.buffer.push_back(c?);
            }
            self.next += batch;
        }
        Ok(self.buffer.pop_front().expect("buffer refilled above"))
    }
}

fn init_from_feed(feed: &mut ProposalFeed<'_>) -> Result<ChainState> {
    for _ in 0..MAX_INIT_FAILURES {
        let c = feed.next()?;
        if c.is_valid() {
            return Ok(ChainState::from_candidate(&c, 0));
        }
    }
    Err(Error::Initialization(MAX_INIT_FAILURES))
}

/// First valid candidate, adopted unconditionally as the chain's start.
pub fn init_state(p: &ProblemSpec, h: &HyperParams, s: &OptSettings, seed: u64) -> Result<ChainState> {
    let mut feed = ProposalFeed {
        p,
        h,
        s,
        seed,
        mode: JacobianMode::Full,
        next: 0,
        batch: 1,
        buffer: Default::default(),
    };
    init_from_feed(&mut feed)
}

/// Augmented-state independence sampler, proposals precomputed in parallel.
pub fn run_chain_augmented(
    p: &ProblemSpec,
    h: &HyperParams,
    s: &OptSettings,
    n_steps: usize,
    seed: u64,
    mode: JacobianMode,
) -> Result<ChainRecord> {
    run_augmented_batched(p, h, s, n_steps, seed, mode, PROPOSAL_BATCH)
}

/// Same chain as [`run_chain_augmented`], generating one proposal at a time.
pub fn run_chain_augmented_serial(
    p: &ProblemSpec,
    h: &HyperParams,
    s: &OptSettings,
    n_steps: usize,
    seed: u64,
    mode: JacobianMode,
) -> Result<ChainRecord> {
    run_augmented_batched(p, h, s, n_steps, seed, mode, 1)
}

fn run_augmented_batched(
    p: &ProblemSpec,
    h: &HyperParams,
    s: &OptSettings,
    n_steps: usize,
    seed: u64,
    mode: JacobianMode,
    batch: usize,
) -> Result<ChainRecord> {
    if n_steps < 1 {
        return Err(Error::InvalidParameter {
            name: "n_steps",
            reason: "must be at least 1".into(),
        });
    }
    s.validate()?;
    let mut feed = ProposalFeed {
        p,
        h,
        s,
        seed,
        mode,
        next: 0,
        batch,
        buffer: Default::default(),
    };
    let initial = init_from_feed(&mut feed)?;
    let mut uniforms = acceptance_stream(seed);

    let mut current = initial.clone();
    let mut states = Vec::with_capacity(n_steps);
    let mut accept_flags = Vec::with_capacity(n_steps);
    let (mut n_accepted, mut n_optfail) = (0, 0);

    for step in 1..=n_steps {
        let c = feed.next()?;
        let alpha = if !c.is_valid() {
            n_optfail += 1;
            0.0
        } else if mode == JacobianMode::None {
            1.0
        } else {
            mh_accept_prob(c.log_pi_joint, c.log_q, current.log_pi_joint, current.log_q)
        };
        let u: f64 = uniforms.random();
        let accepted = c.is_valid() && u <= alpha;
        if accepted {
            current = ChainState::from_candidate(&c, step);
            n_accepted += 1;
        } else {
            current.step_index = step;
        }
        states.push(current.clone());
        accept_flags.push(accepted);
    }

    Ok(ChainRecord {
        initial,
        states,
        accept_flags,
        n_proposed: n_steps,
        n_accepted,
        n_optfail,
        seed,
        config: ChainConfig {
            problem: p.name.clone(),
            algorithm: Algorithm::Augmented,
            rho: h.rho(),
            gamma: h.gamma(),
            jacobian_mode: mode,
            n_steps,
            optimizer: *s,
        },
    })
}

/// Quadrature over the unconditional data variable for the marginal
/// proposal density of the legacy sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    /// Half-width of the integration interval in observation standard deviations.
    pub half_width_sigmas: f64,
    /// Trapezoid nodes, endpoints included.
    pub nodes: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            half_width_sigmas: 8.0,
            nodes: 4097,
        }
    }
}

/// `log q_m(x*)` for a scalar problem: the joint density of `(x*, d_uc)`
/// integrated over `d_uc` where `∂x_uc/∂x* > 0`. Returns `None` when that
/// region carries no mass.
pub fn legacy_log_marginal_proposal(p: &ProblemSpec, x_star: f64, quad: &QuadSettings) -> Result<Option<f64>> {
    check_scalar(p)?;
    let x = DVector::from_element(1, x_star);
    let gx = p.g(&x)?[0];
    let g1 = p.jacobian(&x)?[(0, 0)];
    let g2 = match p.forward.second_derivative(&x) {
        Some(h) => h?.slices[0][(0, 0)],
        None => crate::model::finite_difference_second_derivative(p.forward.as_ref(), &x)?.slices[0][(0, 0)],
    };
    let cx = p.prior_cov.matrix()[(0, 0)];
    let cd = p.obs_cov.matrix()[(0, 0)];
    let mu = p.prior_mean[0];
    let dobs = p.obs[0];
    let sd = cd.sqrt();
    let lo = dobs - quad.half_width_sigmas * sd;
    let hi = dobs + quad.half_width_sigmas * sd;
    let n = quad.nodes.max(2);
    let step = (hi - lo) / (n - 1) as f64;

    // log-sum-exp over the trapezoid terms
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        let t = lo + step * k as f64;
        let jac = 1.0 + cx / cd * (g1 * g1 + g2 * (gx - t));
        if jac <= 0.0 {
            continue;
        }
        let x_uc = x_star + cx * g1 * (gx - t) / cd;
        let w: f64 = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let log_f = -0.5 * (x_uc - mu).powi(2) / cx - 0.5 * (t - dobs).powi(2) / cd;
        terms.push(log_f + jac.ln() + w.ln());
    }
    if terms.is_empty() {
        return Ok(None);
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(None);
    }
    let sum: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    Ok(Some(m + sum.ln() + step.ln()))
}

fn check_scalar(p: &ProblemSpec) -> Result<()> {
    if p.dim_x() != 1 || p.dim_d() != 1 {
        return Err(Error::UnsupportedDimension(format!(
            "the marginal sampler needs dim_x = dim_d = 1, got {} and {}",
            p.dim_x(),
            p.dim_d()
        )));
    }
    Ok(())
}

struct LegacyCandidate {
    x: DVector<f64>,
    d_uc: DVector<f64>,
    log_pi: f64,
    log_q: Option<f64>,
    converged: bool,
}

fn legacy_candidate(p: &ProblemSpec, s: &OptSettings, quad: &QuadSettings, seed: u64, k: u64) -> Result<LegacyCandidate> {
    let mut rng = proposal_stream(seed, k);
    let (x_uc, d_uc) = p.draw_unconditional(&mut rng);
    // ρ does not affect x*; any interior value works
    let h = HyperParams::new(0.5, 0.5)?;
    let opt = match minimize(p, &h, s, &x_uc, &d_uc) {
        Ok(o) => o,
        Err(Error::Evaluation(_)) => {
            return Ok(LegacyCandidate {
                x: x_uc,
                d_uc,
                log_pi: f64::NEG_INFINITY,
                log_q: None,
                converged: false,
            })
        }
        Err(e) => return Err(e),
    };
    if !opt.converged {
        return Ok(LegacyCandidate {
            x: opt.x_star,
            d_uc,
            log_pi: f64::NEG_INFINITY,
            log_q: None,
            converged: false,
        });
    }
    let log_q = legacy_log_marginal_proposal(p, opt.x_star[0], quad)?;
    if log_q.is_none() {
        log::warn!(
            "zero marginal proposal density at x* = {}; candidate rejected",
            opt.x_star[0]
        );
    }
    Ok(LegacyCandidate {
        log_pi: log_target_marginal(p, &opt.x_star)?,
        x: opt.x_star,
        d_uc,
        log_q,
        converged: true,
    })
}

/// Marginal-state RML sampler for scalar problems.
///
/// Chain states carry `d = d_uc` of the accepted candidate; `log_pi_joint`
/// holds the marginal target and `log_q` the quadrature proposal density.
pub fn run_chain_legacy_1d(
    p: &ProblemSpec,
    s: &OptSettings,
    n_steps: usize,
    seed: u64,
    quad: QuadSettings,
) -> Result<ChainRecord> {
    check_scalar(p)?;
    s.validate()?;
    if n_steps < 1 {
        return Err(Error::InvalidParameter {
            name: "n_steps",
            reason: "must be at least 1".into(),
        });
    }
    let batch = PROPOSAL_BATCH as u64;
    let mut buffer: std::collections::VecDeque<LegacyCandidate> = Default::default();
    let mut next = 0u64;
    let mut pull = |buffer: &mut std::collections::VecDeque<LegacyCandidate>| -> Result<LegacyCandidate> {
        if buffer.is_empty() {
            let out: Vec<Result<LegacyCandidate>> = (next..next + batch)
                .into_par_iter()
                .map(|k| legacy_candidate(p, s, &quad, seed, k))
                .collect();
            for c in out {
                buffer.push_back(c?);
            }
            next += batch;
        }
        Ok(buffer.pop_front().expect("refilled"))
    };

    let mut initial = None;
    for _ in 0..MAX_INIT_FAILURES {
        let c = pull(&mut buffer)?;
        if let (true, Some(lq)) = (c.converged, c.log_q) {
            initial = Some(ChainState {
                x: c.x,
                d: c.d_uc,
                log_pi_joint: c.log_pi,
                log_q: lq,
                step_index: 0,
            });
            break;
        }
    }
    let initial = initial.ok_or(Error::Initialization(MAX_INIT_FAILURES))?;

    let mut uniforms = acceptance_stream(seed);
    let mut current = initial.clone();
    let mut states = Vec::with_capacity(n_steps);
    let mut accept_flags = Vec::with_capacity(n_steps);
    let (mut n_accepted, mut n_optfail) = (0, 0);
    for step in 1..=n_steps {
        let c = pull(&mut buffer)?;
        let alpha = match (c.converged, c.log_q) {
            (true, Some(lq)) => mh_accept_prob(c.log_pi, lq, current.log_pi_joint, current.log_q),
            (false, _) => {
                n_optfail += 1;
                0.0
            }
            (true, None) => 0.0,
        };
        let u: f64 = uniforms.random();
        let accepted = alpha > 0.0 && u <= alpha;
        if accepted {
            current = ChainState {
                x: c.x,
                d: c.d_uc,
                log_pi_joint: c.log_pi,
                log_q: c.log_q.expect("accepted candidates have a density"),
                step_index: step,
            };
            n_accepted += 1;
        } else {
            current.step_index = step;
        }
        states.push(current.clone());
        accept_flags.push(accepted);
    }
    Ok(ChainRecord {
        initial,
        states,
        accept_flags,
        n_proposed: n_steps,
        n_accepted,
        n_optfail,
        seed,
        config: ChainConfig {
            problem: p.name.clone(),
            algorithm: Algorithm::Legacy1d,
            rho: f64::NAN,
            gamma: f64::NAN,
            jacobian_mode: JacobianMode::Full,
            n_steps,
            optimizer: *s,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example1, example2, gauss_linear_toy};
    use approx::assert_abs_diff_eq;

    #[test]
    fn accept_prob_examples() {
        assert_eq!(mh_accept_prob(-3.0, 1.0, -3.0, 1.0), 1.0);
        assert_abs_diff_eq!(mh_accept_prob(-2.0, 0.5, -1.0, 0.5), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(mh_accept_prob(f64::NEG_INFINITY, 0.0, -1.0, 0.0), 0.0);
        assert_eq!(mh_accept_prob(-5.0, 0.0, f64::NEG_INFINITY, 0.0), 1.0);
    }

    #[test]
    fn detailed_balance_identity() {
        let (lpa, lqa, lpb, lqb) = (-1.3, 0.4, -0.2, 2.1);
        let ab = mh_accept_prob(lpb, lqb, lpa, lqa);
        let ba = mh_accept_prob(lpa, lqa, lpb, lqb);
        // flow a→b under the independence kernel: π(a) q(b) α(a→b)
        let lhs = ab * (lpa + lqb).exp();
        let rhs = ba * (lpb + lqa).exp();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-14);
    }

    #[test]
    fn init_state_is_deterministic() {
        let h = HyperParams::new(0.01, 0.65).unwrap();
        let s = OptSettings::default();
        let a = init_state(&example1(), &h, &s, 42).unwrap();
        let b = init_state(&example1(), &h, &s, 42).unwrap();
        assert_eq!(a, b);
        let toy = init_state(&gauss_linear_toy(), &h, &s, 1).unwrap();
        assert!(toy.log_pi_joint.is_finite() && toy.log_q.is_finite());
    }

    #[test]
    fn parallel_and_serial_chains_agree() {
        let p = example2();
        let h = HyperParams::new(0.01, 0.35).unwrap();
        let s = OptSettings::default();
        let a = run_chain_augmented(&p, &h, &s, 700, 9, JacobianMode::Full).unwrap();
        let b = run_chain_augmented_serial(&p, &h, &s, 700, 9, JacobianMode::Full).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn record_bookkeeping() {
        let h = HyperParams::new(0.01, 0.65).unwrap();
        let r = run_chain_augmented(&example1(), &h, &OptSettings::default(), 300, 5, JacobianMode::Full).unwrap();
        assert_eq!(r.states.len(), 300);
        assert_eq!(r.n_accepted, r.accept_flags.iter().filter(|a| **a).count());
        for (i, st) in r.states.iter().enumerate() {
            assert_eq!(st.step_index, i + 1);
        }
        // cached values agree with recomputation
        for st in r.states.iter().step_by(17) {
            let lp = crate::densities::log_target_joint(&example1(), &h, &st.x, &st.d).unwrap();
            let (lq, _) = crate::proposal::log_proposal_density(&example1(), &h, &st.x, &st.d, JacobianMode::Full).unwrap();
            assert_abs_diff_eq!(lp, st.log_pi_joint, epsilon = 1e-10);
            assert_abs_diff_eq!(lq, st.log_q, epsilon = 1e-10);
        }
    }

    #[test]
    fn legacy_rejects_vector_problems() {
        let r = run_chain_legacy_1d(&example2(), &OptSettings::default(), 10, 1, QuadSettings::default());
        assert!(matches!(r, Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn legacy_zero_density_region() {
        // a quadrature window far from any positive-Jacobian region
        let p = example1();
        let c = 2.0 * std::f64::consts::PI / 3.0;
        let q = QuadSettings {
            half_width_sigmas: 1e-3,
            nodes: 5,
        };
        // at the vertex, J = 1 + (C_x/C_d)(0 − 9(1 − t)); with t ≈ 0.8, J = 1 − 18 < 0
        assert_eq!(legacy_log_marginal_proposal(&p, c, &q).unwrap(), None);
    }

    #[test]
    fn zero_steps_rejected() {
        let h = HyperParams::new(0.01, 0.5).unwrap();
        assert!(run_chain_augmented(&example1(), &h, &OptSettings::default(), 0, 1, JacobianMode::Full).is_err());
    }
}
