//! The acceptance criteria, each reduced to a list of [`Check`]s.

use jdcc_core::channel::{
    dbm_to_watts, downlink_sinrs, gamma_cdf, linear_to_db, ChannelPair, SystemConfig,
};
use jdcc_core::control::{
    asymptotic_variance, control_threshold, is_stable, min_stabilizing_sinr, quality, steady_state_variance,
    LinkQuality, Plant, Regime,
};
use jdcc_core::linalg;
use jdcc_core::montecarlo::{estimate_comm_outage, estimate_control_outage, estimate_joint_outage};
use jdcc_core::outage::{
    comm_only_outage, comm_thresholds, control_only_outage, joint_outage_mrt, joint_outage_zf, OutageSpec,
};
use jdcc_core::pareto::{
    comm_delay, gamma_d_max, gamma_d_min, log_gamma_grid, mrt_region_point, mrt_zf_crossover_power, pareto_point,
    uplink_quality, zf_region_point, Metric, TradeoffPoint, KKT_TOL,
};
use jdcc_core::rng::StreamFamily;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::oracles::{brute_force_gamma_u, iterated_variance, stability_boundary, variance_path};
use crate::report::Check;
use crate::Result;

/// Dimensionless relative error, zero when both sides vanish and infinite
/// when either is NaN (so a running `max` cannot swallow it).
fn rel_err(observed: f64, reference: f64) -> f64 {
    if observed == reference {
        return 0.0;
    }
    let e = (observed - reference).abs() / reference.abs();
    if e.is_nan() {
        f64::INFINITY
    } else {
        e
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn real_plant(a2: f64, b2: f64, sigma_w2: f64) -> Result<Plant> {
    Ok(Plant::new(Complex64::new(a2.sqrt(), 0.0), Complex64::new(b2.sqrt(), 0.0), sigma_w2)?)
}

/// Explicit distortion recursion against the closed-form steady state on
/// random stable `(|a|², |b|², σ_w², S_α, Γ_α)`.
pub fn fixed_point(seed: u64) -> Result<Vec<Check>> {
    const TUPLES: usize = 1000;
    let mut rng = StreamFamily::new(seed).stream(0);
    let mut worst: f64 = 0.0;
    let mut unsettled = 0;
    for _ in 0..TUPLES {
        let a2 = rng.random_range(1.01..8.0);
        let b2 = log_uniform(&mut rng, 0.1, 10.0);
        let sigma_w2 = log_uniform(&mut rng, 1e-4, 1.0);
        let s = a2 * log_uniform(&mut rng, 1.05, 1e3);
        let g = stability_boundary(a2, s) * (1.0 + log_uniform(&mut rng, 1e-3, 1e3));
        let plant = real_plant(a2, b2, sigma_w2)?;
        let closed = steady_state_variance(&plant, &LinkQuality::new(s, g)?);
        match (closed.value(), iterated_variance(a2, b2, sigma_w2, s, g, 10_000_000)) {
            (Some(v), Some(it)) => worst = worst.max(rel_err(v, it)),
            _ => unsettled += 1,
        }
    }
    Ok(vec![
        Check::within(1, "tuples without a settled finite limit", unsettled as f64, 0.0, 0.0),
        Check::at_most(1, "max relative error iterated vs closed-form V_inf", worst, 0.0, 1e-9),
    ])
}

/// Classification and empirical behaviour just either side of the stability
/// boundary.
pub fn stability_sharpness(seed: u64) -> Result<Vec<Check>> {
    const TUPLES: usize = 50;
    const STEPS: usize = 10_000;
    let mut rng = StreamFamily::new(seed).stream(0);
    let mut worst_boundary: f64 = 0.0;
    let (mut misclassified, mut misbehaved) = (0, 0);
    for _ in 0..TUPLES {
        let a2 = rng.random_range(1.2..6.0);
        let s = a2 * rng.random_range(1.5..50.0);
        let alpha_dn = rng.random_range(0.5..4.0);
        let b2 = log_uniform(&mut rng, 0.1, 10.0);
        let plant = real_plant(a2, b2, 0.01)?;
        let boundary = stability_boundary(a2, s);
        let lib = (1.0 + min_stabilizing_sinr(s, &plant, alpha_dn)?).powf(alpha_dn);
        worst_boundary = worst_boundary.max(rel_err(lib, boundary));
        for (factor, stable) in [(1.0 - 1e-6, false), (1.0 + 1e-6, true)] {
            let g = boundary * factor;
            if is_stable(&plant, &LinkQuality::new(s, g)?) != stable {
                misclassified += 1;
            }
            let path = variance_path(a2, b2, plant.sigma_w2, s, g, STEPS);
            let first = path[1] - path[0];
            let last = path[STEPS - 1] - path[STEPS - 2];
            if (last > first) == stable {
                misbehaved += 1;
            }
        }
    }
    Ok(vec![
        Check::at_most(2, "max relative error of the library boundary", worst_boundary, 0.0, 1e-12),
        Check::within(2, "misclassified points at boundary x (1 +- 1e-6)", misclassified as f64, 0.0, 0.0),
        Check::within(2, "points whose 1e4-step recursion disagrees with the class", misbehaved as f64, 0.0, 0.0),
    ])
}

/// One-sided quality `1e12` against the three limiting formulas.
pub fn asymptotic_limits() -> Result<Vec<Check>> {
    const HIGH: f64 = 1e12;
    let mut worst = [0.0f64; 3];
    let mut worst_formula: f64 = 0.0;
    for a2 in [1.5, 2.88, 6.0] {
        for sigma_w2 in [0.01, 1.0] {
            let plant = real_plant(a2, 1.0, sigma_w2)?;
            for q in [1.5 * a2, 20.0, 1e3] {
                let cases = [
                    (Regime::UplinkHigh, LinkQuality::new(HIGH, q)?, sigma_w2 * q / (q - a2)),
                    (Regime::DownlinkHigh, LinkQuality::new(q, HIGH)?, sigma_w2 * q / (q - a2)),
                    (Regime::BothHigh, LinkQuality::new(HIGH, HIGH)?, sigma_w2),
                ];
                for (k, (regime, lq, formula)) in cases.into_iter().enumerate() {
                    let v = steady_state_variance(&plant, &lq).value().unwrap_or(f64::NAN);
                    worst[k] = worst[k].max(rel_err(v, formula));
                    worst_formula = worst_formula.max(rel_err(asymptotic_variance(regime, &plant, q)?, formula));
                }
            }
        }
    }
    Ok(vec![
        Check::at_most(3, "uplink quality 1e12 vs sigma_w2 G/(G - |a|^2)", worst[0], 0.0, 1e-6),
        Check::at_most(3, "downlink quality 1e12 vs sigma_w2 S/(S - |a|^2)", worst[1], 0.0, 1e-6),
        Check::at_most(3, "both qualities 1e12 vs sigma_w2", worst[2], 0.0, 1e-6),
        Check::at_most(3, "library limit formulas vs direct evaluation", worst_formula, 0.0, 1e-14),
    ])
}

/// Threshold then steady state returns the target.
pub fn threshold_round_trip() -> Result<Vec<Check>> {
    let plant = Plant::default();
    let alpha_dn = SystemConfig::default().alpha_dn();
    let (mut worst_v, mut worst_sinr): (f64, f64) = (0.0, 0.0);
    let mut points = 0;
    for ratio in log_space(1.05, 100.0, 10) {
        let v_th = ratio * plant.sigma_w2;
        let s_min = plant.a2() * v_th / (v_th - plant.sigma_w2);
        for factor in log_space(1.001, 1e4, 10) {
            let s = s_min * factor;
            let th = control_threshold(v_th, s, &plant, alpha_dn)?;
            let v = steady_state_variance(&plant, &LinkQuality::new(s, th.gamma_alpha)?).value().unwrap_or(f64::NAN);
            worst_v = worst_v.max(rel_err(v, v_th));
            worst_sinr = worst_sinr.max(rel_err(quality(th.gamma_d, alpha_dn), th.gamma_alpha));
            points += 1;
        }
    }
    Ok(vec![
        Check::within(4, "grid points", points as f64, 100.0, 0.0),
        Check::at_most(4, "max relative error of V_inf at the threshold", worst_v, 0.0, 1e-8),
        Check::at_most(4, "max relative error of (1 + gamma_d)^alpha vs Gamma_alpha", worst_sinr, 0.0, 1e-12),
    ])
}

/// Sampled pair whose draw index is `k`, for every criterion that needs
/// channels from the default scenario.
fn channel(cfg: &SystemConfig, family: &StreamFamily, k: u64) -> ChannelPair {
    ChannelPair::sample(cfg, &mut family.stream(k))
}

/// At `γ_D = γ_max` all power goes to the CD and the exact `Γ_U` is zero, so
/// relative gaps are undefined there. Endpoint values must instead stay below
/// this fraction of the full-power CU SINR `P g_U/σ²`.
pub const ENDPOINT_RESIDUE: f64 = 1e-12;

#[derive(Default)]
struct ParetoTally {
    problems: usize,
    errors: usize,
    worst_vs_baseline: f64,
    worst_vs_brute: f64,
    worst_kkt: f64,
    worst_endpoint: f64,
}

fn pareto_channel(cfg: &SystemConfig, ch: &ChannelPair, per_channel: usize) -> ParetoTally {
    let mut t = ParetoTally { worst_vs_baseline: f64::INFINITY, ..Default::default() };
    let s_alpha = uplink_quality(cfg, ch);
    let (lo, hi) = (gamma_d_min(cfg, s_alpha).unwrap_or(f64::NAN), gamma_d_max(cfg, ch));
    let s2 = cfg.sigma_dn2();
    let full = cfg.p_dn * ch.g_u() / s2;
    for g in log_gamma_grid(lo, hi, per_channel) {
        t.problems += 1;
        let Ok((point, report)) = pareto_point(g, cfg, ch, s_alpha) else {
            t.errors += 1;
            continue;
        };
        let baseline = [mrt_region_point(g, cfg, ch, s_alpha), zf_region_point(g, cfg, ch, s_alpha)]
            .into_iter()
            .filter_map(|r| r.ok().map(|p| p.gamma_u))
            .fold(0.0, f64::max);
        let Some(bf) = brute_force_gamma_u(ch.h_d(), ch.h_u(), cfg.p_dn, s2, g, 200, 10) else {
            t.errors += 1;
            continue;
        };
        if g == hi {
            let residue = point.gamma_u.abs().max(baseline.abs()).max(bf.gamma_u.abs()) / full;
            t.worst_endpoint = t.worst_endpoint.max(if residue.is_nan() { f64::INFINITY } else { residue });
        } else {
            let excess = (point.gamma_u - baseline) / baseline;
            t.worst_vs_baseline = t.worst_vs_baseline.min(if excess.is_nan() { f64::NEG_INFINITY } else { excess });
            t.worst_vs_brute = t.worst_vs_brute.max(rel_err(point.gamma_u, bf.gamma_u));
        }
        let (r0, r1) = report.kkt_residuals;
        t.worst_kkt = if r0.is_nan() || r1.is_nan() { f64::INFINITY } else { t.worst_kkt.max(r0).max(r1) };
    }
    t
}

/// Optimal beamforming against MRT/ZF and an exhaustive subspace search.
pub fn pareto_optimality(seed: u64) -> Result<Vec<Check>> {
    const CHANNELS: usize = 100;
    const PER_CHANNEL: usize = 20;
    let cfg = SystemConfig::default();
    let family = StreamFamily::new(seed);
    // Channels whose uplink cannot stabilize the loop or whose full-power
    // SINR is below the stability floor have an empty region; skip them.
    let mut usable = Vec::with_capacity(CHANNELS);
    let mut k = 0;
    while usable.len() < CHANNELS {
        let ch = channel(&cfg, &family, k);
        k += 1;
        let s_alpha = uplink_quality(&cfg, &ch);
        if gamma_d_min(&cfg, s_alpha).is_ok_and(|lo| gamma_d_max(&cfg, &ch) > lo) {
            usable.push(ch);
        }
    }
    let tallies: Vec<ParetoTally> = usable.par_iter().map(|ch| pareto_channel(&cfg, ch, PER_CHANNEL)).collect();
    let problems: usize = tallies.iter().map(|t| t.problems).sum();
    let errors: usize = tallies.iter().map(|t| t.errors).sum();
    let fold = |f: fn(&ParetoTally) -> f64, init: f64, op: fn(f64, f64) -> f64| tallies.iter().map(f).fold(init, op);
    Ok(vec![
        Check::within(5, "problems solved", problems as f64, (CHANNELS * PER_CHANNEL) as f64, 0.0),
        Check::within(5, "solver or search failures", errors as f64, 0.0, 0.0),
        Check::at_least(
            5,
            "min relative excess of optimal Gamma_U over max(MRT, ZF)",
            fold(|t| t.worst_vs_baseline, f64::INFINITY, f64::min),
            0.0,
            1e-6,
        ),
        Check::at_most(
            5,
            "max relative gap to brute-force subspace search",
            fold(|t| t.worst_vs_brute, 0.0, f64::max),
            0.0,
            1e-4,
        ),
        Check::at_most(5, "max KKT equality residual", fold(|t| t.worst_kkt, 0.0, f64::max), 0.0, KKT_TOL),
        Check::at_most(
            5,
            "max Gamma_U at gamma_max over the full-power CU SINR",
            fold(|t| t.worst_endpoint, 0.0, f64::max),
            0.0,
            ENDPOINT_RESIDUE,
        ),
    ])
}

/// Delay of a region point measured from its beams, `+∞` when infeasible.
fn measured_delay(point: jdcc_core::Result<TradeoffPoint>, ch: &ChannelPair, cfg: &SystemConfig) -> f64 {
    let Ok(point) = point else { return f64::INFINITY };
    let Some(beams) = point.beams else { return f64::INFINITY };
    match comm_delay(downlink_sinrs(ch, &beams, cfg.sigma_dn2()).cu, cfg) {
        Metric::Finite(t) => t,
        Metric::Unbounded => f64::INFINITY,
    }
}

struct CrossoverSweep {
    sign_changes: usize,
    /// MRT had the shorter delay below the crossing.
    mrt_below: bool,
    offset_db: f64,
}

/// Sweeps two decades of power around the root, shifted by `shift`
/// decades so the root does not sit at a fixed grid position.
fn crossover_sweep(cfg: &SystemConfig, ch: &ChannelPair, gamma_d: f64, shift: f64) -> Result<CrossoverSweep> {
    const POINTS: usize = 1000;
    let root = mrt_zf_crossover_power(gamma_d, ch, cfg.sigma_dn2())?.ok_or_else(|| {
        jdcc_core::Error::DegenerateGeometry("sampled channel has no crossover".into())
    })?;
    let centre = root * 10f64.powf(shift);
    let powers = log_space(centre / 10.0, centre * 10.0, POINTS);
    let mut prev: Option<(f64, bool)> = None;
    let mut sign_changes = 0;
    let mut offset_db = f64::NAN;
    let mut mrt_below = false;
    for p in powers {
        let c = cfg.clone().with_p_dn(p);
        let tau_mrt = measured_delay(mrt_region_point(gamma_d, &c, ch, f64::INFINITY), ch, &c);
        let tau_zf = measured_delay(zf_region_point(gamma_d, &c, ch, f64::INFINITY), ch, &c);
        let diff = tau_mrt - tau_zf;
        if diff.is_nan() || diff == 0.0 {
            continue;
        }
        let zf_better = diff > 0.0;
        if let Some((p_prev, was)) = prev {
            if was != zf_better {
                sign_changes += 1;
                mrt_below = zf_better;
                let mid_db = 0.5 * (linear_to_db(p_prev) + linear_to_db(p));
                offset_db = mid_db - linear_to_db(root);
            }
        }
        prev = Some((p, zf_better));
    }
    Ok(CrossoverSweep { sign_changes, mrt_below, offset_db })
}

/// Closed-form MRT/ZF crossover power against a dense power sweep.
pub fn crossover(seed: u64) -> Result<Vec<Check>> {
    const CHANNELS: usize = 50;
    let cfg = SystemConfig::default();
    let family = StreamFamily::new(seed);
    let mut cases = Vec::with_capacity(CHANNELS);
    let mut k = 0;
    while cases.len() < CHANNELS {
        let ch = channel(&cfg, &family, k);
        k += 1;
        if (0.2..=0.8).contains(&ch.rho()) {
            let mut rng = family.fork(1).stream(k);
            let gamma_d = rng.random_range(1.0..10.0);
            let shift = rng.random_range(-0.5..0.5);
            cases.push((ch, gamma_d, shift));
        }
    }
    let sweeps = cases
        .par_iter()
        .map(|(ch, g, shift)| crossover_sweep(&cfg, ch, *g, *shift))
        .collect::<Result<Vec<_>>>()?;
    let not_single = sweeps.iter().filter(|s| s.sign_changes != 1).count();
    let zf_below = sweeps.iter().filter(|s| !s.mrt_below).count();
    let worst_db = sweeps
        .iter()
        .map(|s| if s.offset_db.is_nan() { f64::INFINITY } else { s.offset_db.abs() })
        .fold(0.0, f64::max);
    Ok(vec![
        Check::within(6, "channels without exactly one sign change", not_single as f64, 0.0, 0.0),
        Check::within(6, "channels where ZF wins below the crossing", zf_below as f64, 0.0, 0.0),
        Check::at_most(6, "max |sweep crossing - closed-form root| (dB)", worst_db, 0.0, 0.1),
    ])
}

/// Orthogonal users: optimal, MRT and ZF give the same point.
pub fn orthogonal_coincidence(seed: u64) -> Result<Vec<Check>> {
    const CHANNELS: u64 = 20;
    const PER_CHANNEL: usize = 10;
    let cfg = SystemConfig::default();
    let family = StreamFamily::new(seed);
    let mut pairs = Vec::new();
    for k in 0..CHANNELS {
        let mut rng = family.stream(k);
        if k % 2 == 0 {
            let g_d = cfg.beta_d() * rng.random_range(0.5..4.0);
            let g_u = cfg.beta_u() * rng.random_range(0.5..4.0);
            pairs.push(ChannelPair::synthetic(cfg.antennas, g_d, g_u, 0.0)?);
        } else {
            let ch = ChannelPair::sample(&cfg, &mut rng);
            let h_u = linalg::project_out(ch.h_u(), ch.h_d());
            pairs.push(ChannelPair::new(ch.h_d().to_vec(), h_u)?);
        }
    }
    let (mut worst_gamma, mut worst_split, mut worst_endpoint): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut compared = 0;
    for ch in &pairs {
        let s_alpha = uplink_quality(&cfg, ch);
        let full = cfg.p_dn * ch.g_u() / cfg.sigma_dn2();
        let Ok(lo) = gamma_d_min(&cfg, s_alpha) else { continue };
        let hi = gamma_d_max(&cfg, ch);
        for g in log_gamma_grid(lo, hi, PER_CHANNEL) {
            let (opt, _) = pareto_point(g, &cfg, ch, s_alpha)?;
            let mrt = mrt_region_point(g, &cfg, ch, s_alpha)?;
            let zf = zf_region_point(g, &cfg, ch, s_alpha)?;
            for other in [&mrt, &zf] {
                worst_split = worst_split.max(rel_err(other.power_split.0, opt.power_split.0));
            }
            if g == hi {
                let residue = [&opt, &mrt, &zf].iter().map(|p| p.gamma_u.abs() / full).fold(0.0, f64::max);
                worst_endpoint = worst_endpoint.max(if residue.is_nan() { f64::INFINITY } else { residue });
            } else {
                for (x, y) in [(&mrt, &opt), (&zf, &opt), (&mrt, &zf)] {
                    worst_gamma = worst_gamma.max(rel_err(x.gamma_u, y.gamma_u));
                }
            }
            compared += 1;
        }
    }
    Ok(vec![
        Check::at_least(7, "operating points compared", compared as f64, 100.0, 0.0),
        Check::at_most(7, "max relative spread of Gamma_U across schemes", worst_gamma, 0.0, 1e-10),
        Check::at_most(7, "max relative spread of the CD power", worst_split, 0.0, 1e-10),
        Check::at_most(7, "max Gamma_U at gamma_max over the full-power CU SINR", worst_endpoint, 0.0, ENDPOINT_RESIDUE),
    ])
}

/// Downlink powers (dBm) of the outage grid.
pub const OUTAGE_POWERS_DBM: [f64; 5] = [-40.0, -35.0, -30.0, -25.0, -20.0];
/// Antenna counts of the outage grid.
pub const OUTAGE_ANTENNAS: [usize; 2] = [4, 6];

/// Analytic outage of every kind at one grid point, with its sampled
/// counterpart. Order: comm-only, control-only, joint MRT, joint ZF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageCell {
    pub antennas: usize,
    pub p_dbm: f64,
    pub analytic: [f64; 4],
    pub sampled: [f64; 4],
    pub std_error: [f64; 4],
    /// Control-only outage in the limit of unlimited downlink power.
    pub control_floor: f64,
}

pub const OUTAGE_KINDS: [&str; 4] = ["comm-only", "control-only", "joint MRT", "joint ZF"];

/// Evaluates one outage grid point; all four estimators share `seed` and
/// therefore the same channel draws.
pub fn outage_cell(antennas: usize, p_dbm: f64, trials: u64, seed: u64) -> Result<OutageCell> {
    let cfg = SystemConfig::default().with_antennas(antennas).with_p_dn(dbm_to_watts(p_dbm));
    let spec = OutageSpec::new(10e-3, 3.0 * cfg.plant.sigma_w2, &cfg.plant)?;
    let analytic = [
        comm_only_outage(&spec, &cfg),
        control_only_outage(&spec, &cfg)?,
        joint_outage_mrt(&spec, &cfg)?,
        joint_outage_zf(&spec, &cfg)?,
    ];
    let est = [
        estimate_comm_outage(&spec, &cfg, trials, seed)?,
        estimate_control_outage(&spec, &cfg, trials, seed)?,
        estimate_joint_outage(jdcc_core::pareto::Scheme::Mrt, &spec, &cfg, trials, seed)?,
        estimate_joint_outage(jdcc_core::pareto::Scheme::Zf, &spec, &cfg, trials, seed)?,
    ];
    let th = comm_thresholds(&spec, &cfg);
    Ok(OutageCell {
        antennas,
        p_dbm,
        analytic,
        sampled: est.map(|e| e.value),
        std_error: est.map(|e| e.std_error),
        control_floor: gamma_cdf(antennas as u32, th.eta_v),
    })
}

/// Analytic outage probabilities against Monte Carlo, plus the floor and
/// ordering facts.
pub fn outage_oracles(seed: u64, trials: u64) -> Result<Vec<Check>> {
    let family = StreamFamily::new(seed);
    let mut cells = Vec::new();
    for (i, &m) in OUTAGE_ANTENNAS.iter().enumerate() {
        for (j, &p) in OUTAGE_POWERS_DBM.iter().enumerate() {
            cells.push(outage_cell(m, p, trials, family.fork((i * OUTAGE_POWERS_DBM.len() + j) as u64).seed())?);
        }
    }
    let mut checks = Vec::new();
    for c in &cells {
        for k in 0..4 {
            checks.push(Check::within(
                8,
                format!("{} outage, M={}, P={} dBm", OUTAGE_KINDS[k], c.antennas, c.p_dbm),
                c.sampled[k],
                c.analytic[k],
                (3.0 * c.std_error[k]).max(5e-3),
            ));
        }
    }
    let min_gap = |vals: fn(&OutageCell) -> [f64; 4]| {
        cells
            .iter()
            .map(|c| {
                let v = vals(c);
                v[2].min(v[3]) - v[0].max(v[1])
            })
            .fold(f64::INFINITY, f64::min)
    };
    checks.push(Check::at_least(8, "analytic joint minus max single outage (min over grid)", min_gap(|c| c.analytic), 0.0, 1e-6));
    checks.push(Check::at_least(8, "sampled joint minus max single outage (min over grid)", min_gap(|c| c.sampled), 0.0, 0.0));

    let ctrl = |m: usize, p: f64| {
        cells.iter().find(|c| c.antennas == m && c.p_dbm == p).map(|c| (c.analytic[1], c.control_floor))
    };
    let (c4_hi, floor4) = ctrl(4, -20.0).expect("grid holds M=4 at -20 dBm");
    let (c4_prev, _) = ctrl(4, -25.0).expect("grid holds M=4 at -25 dBm");
    let (c6_hi, _) = ctrl(6, -20.0).expect("grid holds M=6 at -20 dBm");
    checks.push(Check::at_least(8, "M=4 control outage ratio over the last 5 dB step", c4_hi / c4_prev, 0.5, 0.0));
    checks.push(Check::at_most(8, "M=4 control outage at -20 dBm over its high-power limit", c4_hi / floor4, 1.25, 0.0));
    checks.push(Check::at_most(8, "M=6 control outage at -20 dBm over the M=4 floor", c6_hi / floor4, 0.1, 0.0));
    Ok(checks)
}

/// Frozen numeric anchors, each also recomputed by an oracle.
pub fn anchors() -> Result<Vec<Check>> {
    let cfg = SystemConfig::default();
    let spec = OutageSpec::new(10e-3, 3.0 * cfg.plant.sigma_w2, &cfg.plant)?;
    let th = comm_thresholds(&spec, &cfg);
    let plant = Plant::default();
    let v_inf = steady_state_variance(&plant, &LinkQuality::new(10.0, 10.0)?).value().unwrap_or(f64::NAN);
    let v_iter = iterated_variance(plant.a2(), plant.b2(), plant.sigma_w2, 10.0, 10.0, 1_000_000).unwrap_or(f64::NAN);
    // Direct arithmetic from the raw scenario values.
    let gamma_u_req = 2f64.powf(cfg.payload_bits / (cfg.b_dn * 10e-3)) - 1.0;
    let sigma2 = cfg.n0 * cfg.b_dn;
    let gbar_u = cfg.p_dn * cfg.c0 * cfg.d_u.powf(-cfg.path_loss_exponent) / sigma2;
    Ok(vec![
        Check::within(9, "F_G(4) at M=4", gamma_cdf(4, 4.0), 0.56653, 1e-5),
        Check::within(9, "F_G(4) at M=4, Simpson oracle", crate::oracles::gamma_cdf_simpson(4, 4.0, 20_000), 0.56653, 1e-5),
        Check::within(9, "gamma_U_req at tau_req = 10 ms", th.gamma_u_req, 31.0, 1e-9),
        Check::within(9, "gamma_U_req, direct arithmetic", gamma_u_req, 31.0, 1e-9),
        Check::within(9, "eta_U at tau_req = 10 ms", th.eta_u, 6.2, 1e-9),
        Check::within(9, "eta_U, direct arithmetic", gamma_u_req / gbar_u, 6.2, 1e-9),
        Check::within(9, "V_inf at S = G = 10", v_inf, 0.0220848, 1e-6),
        Check::within(9, "V_inf at S = G = 10, iterated", v_iter, 0.0220848, 1e-6),
    ])
}
