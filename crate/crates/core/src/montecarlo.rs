//! Sampling estimators used to check the analytic results.
//!
//! Every trial `i` draws from substream `i` of a seeded [`StreamFamily`], and
//! trials are reduced in fixed-size chunks in index order, so estimates are
//! bit-identical for a given seed whatever the thread count.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{downlink_sinrs, uplink_snr, Beamformer, ChannelPair, SystemConfig};
use crate::control::{steady_state_variance, variance_trajectory, LinkQuality, Plant};
use crate::error::{domain, Result};
use crate::outage::{
    comm_thresholds, draw_requirements, mrt_split_interval, zf_split_interval, GainDraw, OutageSpec,
};
use crate::pareto::Scheme;
use crate::rng::StreamFamily;

/// Trials per reduction chunk.
const CHUNK: u64 = 4096;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Proportion estimate with binomial standard error `√(p̂(1−p̂)/n)`.
    pub fn proportion(hits: u64, trials: u64, seed: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self { value: p, std_error: (p * (1.0 - p) / trials as f64).sqrt(), trials, seed }
    }
}

fn chunk_ranges(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(trials))).collect()
}

/// Counts trials for which `fail` returns true.
fn count_failures<F>(trials: u64, family: &StreamFamily, fail: F) -> u64
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync,
{
    chunk_ranges(trials)
        .into_par_iter()
        .map(|(lo, hi)| (lo..hi).filter(|&i| fail(&mut family.stream(i))).count() as u64)
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(domain("need at least one trial"));
    }
    Ok(())
}

fn cn<R: Rng + ?Sized>(var: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Empirical state variance of the closed loop, step by step.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopRun {
    /// Mean `|x_n|²` over trials still running at step `n`.
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Trials still running at step `n`.
    pub alive: Vec<u64>,
    pub diverged: u64,
    /// Estimate at the last step.
    pub terminal: McEstimate,
}

/// `|x|²` beyond which a trial is stopped and counted as diverged, as a
/// multiple of `σ_w²` (of `V_0` when the plant is noiseless).
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// Closed loop under the link qualities of a given channel and beam pair.
pub fn simulate_closed_loop(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    bf: &Beamformer,
    v0: f64,
    n_steps: usize,
    trials: u64,
    seed: u64,
) -> Result<ClosedLoopRun> {
    let sinr = downlink_sinrs(ch, bf, cfg.sigma_dn2()).cd;
    let q = LinkQuality::from_rates(uplink_snr(cfg, ch), cfg.alpha_up(), sinr, cfg.alpha_dn())?;
    simulate_closed_loop_with_quality(&cfg.plant, &q, v0, n_steps, trials, seed)
}

/// Closed loop with the sensing report and the command each passed through
/// a Gaussian test channel sized to the rate-distortion bound.
///
/// The CD's state `x_n` is reported as `x̂ = c·x + n` with distortion
/// `D_up = V_n/S_α`, the controller issues `d = −(a/b)x̂`, which reaches the
/// actuator as `d̂` with distortion `D_dn` computed the same way, and the plant
/// advances with `u = d̂`. Distortions are sized from the analytic `V_n`.
pub fn simulate_closed_loop_with_quality(
    plant: &Plant,
    q: &LinkQuality,
    v0: f64,
    n_steps: usize,
    trials: u64,
    seed: u64,
) -> Result<ClosedLoopRun> {
    check_trials(trials)?;
    let analytic = variance_trajectory(v0, n_steps, plant, q)?.values;
    let (a, b) = (plant.a, plant.b);
    let ratio = -a / b;
    let limit = DIVERGENCE_FACTOR * if plant.sigma_w2 > 0.0 { plant.sigma_w2 } else { v0.max(f64::MIN_POSITIVE) };
    let family = StreamFamily::new(seed).fork(1);

    // Per step: (sum |x|², sum |x|⁴, alive), reduced chunk by chunk in order.
    let partials: Vec<Vec<(f64, f64, u64)>> = chunk_ranges(trials)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = vec![(0.0, 0.0, 0u64); n_steps + 1];
            for i in lo..hi {
                let rng = &mut family.stream(i);
                let mut x = cn(v0, rng);
                for (n, slot) in acc.iter_mut().enumerate() {
                    let e = x.norm_sqr();
                    if !(e <= limit) {
                        break;
                    }
                    slot.0 += e;
                    slot.1 += e * e;
                    slot.2 += 1;
                    if n == n_steps {
                        break;
                    }
                    let v = analytic[n];
                    if !v.is_finite() {
                        break;
                    }
                    let d_up = v / q.s_alpha;
                    let c_up = if v > 0.0 { 1.0 - d_up / v } else { 1.0 };
                    let x_hat = x * c_up + cn(c_up * d_up, rng);
                    let d = ratio * x_hat;
                    let c_dn = 1.0 - 1.0 / q.gamma_alpha;
                    let v_d = plant.a2() / plant.b2() * (v - d_up);
                    let d_hat = d * c_dn + cn(c_dn * v_d / q.gamma_alpha, rng);
                    x = a * x + b * d_hat + cn(plant.sigma_w2, rng);
                }
            }
            acc
        })
        .collect();

    let mut sum = vec![(0.0, 0.0, 0u64); n_steps + 1];
    for part in partials {
        for (s, p) in sum.iter_mut().zip(part) {
            s.0 += p.0;
            s.1 += p.1;
            s.2 += p.2;
        }
    }
    let mut mean = Vec::with_capacity(n_steps + 1);
    let mut std_error = Vec::with_capacity(n_steps + 1);
    let mut alive = Vec::with_capacity(n_steps + 1);
    for (s1, s2, k) in sum {
        if k == 0 {
            mean.push(f64::NAN);
            std_error.push(f64::NAN);
        } else {
            let m = s1 / k as f64;
            let var = if k > 1 { ((s2 - k as f64 * m * m) / (k - 1) as f64).max(0.0) } else { 0.0 };
            mean.push(m);
            std_error.push((var / k as f64).sqrt());
        }
        alive.push(k);
    }
    let last = alive[n_steps];
    let terminal = McEstimate { value: mean[n_steps], std_error: std_error[n_steps], trials: last, seed };
    Ok(ClosedLoopRun { mean, std_error, alive, diverged: trials - last, terminal })
}

/// Fraction of channel draws whose full-power CU SINR misses `γ_U^req`.
pub fn estimate_comm_outage(spec: &OutageSpec, cfg: &SystemConfig, trials: u64, seed: u64) -> Result<McEstimate> {
    check_trials(trials)?;
    let th = comm_thresholds(spec, cfg);
    let family = StreamFamily::new(seed);
    let fails = count_failures(trials, &family, |rng| {
        let ch = ChannelPair::sample(cfg, rng);
        cfg.p_dn * ch.g_u() / cfg.sigma_dn2() < th.gamma_u_req
    });
    Ok(McEstimate::proportion(fails, trials, seed))
}

/// Fraction of channel draws for which full-power control misses `V_req`,
/// judged directly from the steady-state variance of each realization.
pub fn estimate_control_outage(spec: &OutageSpec, cfg: &SystemConfig, trials: u64, seed: u64) -> Result<McEstimate> {
    check_trials(trials)?;
    let family = StreamFamily::new(seed);
    let fails = count_failures(trials, &family, |rng| {
        let ch = ChannelPair::sample(cfg, rng);
        let sinr = cfg.p_dn * ch.g_d() / cfg.sigma_dn2();
        let Ok(q) = LinkQuality::from_rates(uplink_snr(cfg, &ch), cfg.alpha_up(), sinr, cfg.alpha_dn()) else {
            return true;
        };
        match steady_state_variance(&cfg.plant, &q).value() {
            Some(v) => v > spec.v_req(),
            None => true,
        }
    });
    Ok(McEstimate::proportion(fails, trials, seed))
}

/// Whether some split of the downlink power meets both requirements for
/// one realization.
pub fn joint_feasible(scheme: Scheme, d: &GainDraw, spec: &OutageSpec, cfg: &SystemConfig) -> Result<bool> {
    let req = draw_requirements(d.x, spec, cfg);
    if !req.gamma_d_req.is_finite() {
        return Ok(false);
    }
    let (lo, hi) = match scheme {
        Scheme::Mrt => mrt_split_interval(d, &req, cfg),
        Scheme::Zf => zf_split_interval(d, &req, cfg),
        other => return Err(domain(format!("joint feasibility is defined for MRT and ZF, not {other}"))),
    };
    Ok(lo <= hi)
}

/// Normalized gains and correlation of a sampled pair.
pub fn gain_draw(ch: &ChannelPair, cfg: &SystemConfig) -> GainDraw {
    GainDraw { x: ch.g_d() / cfg.beta_d(), y: ch.g_u() / cfg.beta_u(), r: ch.rho() }
}

/// Fraction of channel draws for which no MRT/ZF power split meets both
/// the delay and the variance requirement.
pub fn estimate_joint_outage(
    scheme: Scheme,
    spec: &OutageSpec,
    cfg: &SystemConfig,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    if !matches!(scheme, Scheme::Mrt | Scheme::Zf) {
        return Err(domain(format!("joint outage is defined for MRT and ZF, not {scheme}")));
    }
    let family = StreamFamily::new(seed);
    let fails = count_failures(trials, &family, |rng| {
        let ch = ChannelPair::sample(cfg, rng);
        !joint_feasible(scheme, &gain_draw(&ch, cfg), spec, cfg).unwrap_or(false)
    });
    Ok(McEstimate::proportion(fails, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::dbm_to_watts;
    use crate::outage::{comm_only_outage, control_only_outage, joint_outage_mrt, joint_outage_zf};

    fn spec(cfg: &SystemConfig, tau: f64, v_mult: f64) -> OutageSpec {
        OutageSpec::new(tau, v_mult * cfg.plant.sigma_w2, &cfg.plant).unwrap()
    }

    #[test]
    fn noiseless_perfect_loop_is_dead_after_one_step() {
        let p = Plant { sigma_w2: 0.0, ..Plant::default() };
        let q = LinkQuality::new(f64::INFINITY, f64::INFINITY).unwrap();
        let run = simulate_closed_loop_with_quality(&p, &q, 1.0, 5, 100, 1).unwrap();
        assert!(run.mean[0] > 0.0);
        for n in 1..=5 {
            assert!(run.mean[n] < 1e-28, "step {n}: {}", run.mean[n]);
        }
    }

    #[test]
    fn stable_loop_tracks_analytic_trajectory() {
        let p = Plant::default();
        let q = LinkQuality::new(10.0, 10.0).unwrap();
        let run = simulate_closed_loop_with_quality(&p, &q, 1.0, 50, 10_000, 7).unwrap();
        let analytic = variance_trajectory(1.0, 50, &p, &q).unwrap().values;
        for n in 0..=50 {
            let z = (run.mean[n] - analytic[n]).abs() / run.std_error[n];
            assert!(z < 4.0, "step {n}: {} vs {} ({z} σ)", run.mean[n], analytic[n]);
        }
        assert_eq!(run.diverged, 0);
    }

    #[test]
    fn unstable_loop_grows() {
        let p = Plant { a: Complex64::new(5.0, 6.0), ..Plant::default() };
        let q = LinkQuality::new(4.0, 4.0).unwrap();
        let run = simulate_closed_loop_with_quality(&p, &q, 1.0, 20, 2000, 3).unwrap();
        let observed: Vec<f64> = (0..=20).filter(|&n| run.alive[n] > 0).map(|n| run.mean[n]).collect();
        assert!(observed.windows(2).all(|w| w[1] > w[0]));
        assert!(observed.last().unwrap() > &(1e3 * p.sigma_w2));
        assert!(run.diverged > 0);
    }

    #[test]
    fn estimates_are_deterministic_across_pools() {
        let cfg = SystemConfig::default();
        let sp = spec(&cfg, 0.01, 3.0);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_joint_outage(Scheme::Mrt, &sp, &cfg, 20_000, 42).unwrap());
        let b = four.install(|| estimate_joint_outage(Scheme::Mrt, &sp, &cfg, 20_000, 42).unwrap());
        assert_eq!(a, b);
        let q = LinkQuality::new(10.0, 10.0).unwrap();
        let a = one.install(|| simulate_closed_loop_with_quality(&cfg.plant, &q, 1.0, 10, 9000, 5).unwrap());
        let b = four.install(|| simulate_closed_loop_with_quality(&cfg.plant, &q, 1.0, 10, 9000, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn impossible_delay_always_fails() {
        let cfg = SystemConfig::default();
        let sp = spec(&cfg, 1e-6, 3.0);
        assert_eq!(estimate_comm_outage(&sp, &cfg, 1000, 1).unwrap().value, 1.0);
    }

    #[test]
    fn estimates_agree_with_analytic_values() {
        let cfg = SystemConfig::default().with_p_dn(dbm_to_watts(-25.0));
        let sp = spec(&cfg, 0.01, 3.0);
        let n = 200_000;
        let pairs = [
            (estimate_comm_outage(&sp, &cfg, n, 11).unwrap(), comm_only_outage(&sp, &cfg)),
            (estimate_control_outage(&sp, &cfg, n, 12).unwrap(), control_only_outage(&sp, &cfg).unwrap()),
            (estimate_joint_outage(Scheme::Mrt, &sp, &cfg, n, 13).unwrap(), joint_outage_mrt(&sp, &cfg).unwrap()),
            (estimate_joint_outage(Scheme::Zf, &sp, &cfg, n, 14).unwrap(), joint_outage_zf(&sp, &cfg).unwrap()),
        ];
        for (mc, exact) in pairs {
            assert!((mc.value - exact).abs() <= (4.0 * mc.std_error).max(5e-3), "{mc:?} vs {exact}");
        }
    }

    #[test]
    fn loose_delay_reduces_joint_to_control_only() {
        let cfg = SystemConfig::default().with_p_dn(dbm_to_watts(-30.0));
        let sp = spec(&cfg, 1e6, 3.0);
        let joint = estimate_joint_outage(Scheme::Mrt, &sp, &cfg, 50_000, 3).unwrap();
        let ctrl = estimate_control_outage(&sp, &cfg, 50_000, 3).unwrap();
        assert!((joint.value - ctrl.value).abs() <= 3.0 * joint.std_error.max(ctrl.std_error) + 1e-4);
    }

    #[test]
    fn doubling_trials_shrinks_error_by_root_two() {
        let cfg = SystemConfig::default();
        let sp = spec(&cfg, 0.01, 3.0);
        let a = estimate_comm_outage(&sp, &cfg, 100_000, 9).unwrap();
        let b = estimate_comm_outage(&sp, &cfg, 200_000, 9).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.05);
    }
}
