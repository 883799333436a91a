//! One function per subcommand, each returning the tables it produces.

use jdcc_core::channel::{db_to_linear, dbm_to_watts, watts_to_dbm};
use jdcc_core::control::{
    asymptotic_variance, min_stabilizing_sinr, quality, steady_state_variance, variance_trajectory, LinkQuality,
    Regime, SteadyState,
};
use jdcc_core::montecarlo::{
    estimate_comm_outage, estimate_control_outage, estimate_joint_outage, simulate_closed_loop_with_quality,
};
use jdcc_core::outage::{comm_only_outage, control_only_outage, joint_outage_mrt, joint_outage_zf, OutageSpec};
use jdcc_core::pareto::{
    comm_only_point, control_only_point, gamma_d_max, gamma_d_min, log_gamma_grid, mrt_region_point,
    mrt_zf_crossover_power, sweep_boundary, uplink_quality, zf_region_point, Scheme, TradeoffPoint,
};
use jdcc_core::rng::StreamFamily;
use jdcc_core::Error;

use crate::error::{CliError, Result};
use crate::output::{num, Table};
use crate::scenario::Scenario;

fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    lin_space(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

fn variance(s: SteadyState) -> String {
    num(s.value().unwrap_or(f64::INFINITY))
}

/// Analytic and simulated variance over time: `n, V_analytic, V_mc, V_mc_stderr`.
pub fn trajectory(sc: &Scenario) -> Result<Vec<Table>> {
    let t = &sc.file.trajectory;
    let cfg = &sc.system;
    let q = LinkQuality::from_rates(db_to_linear(t.snr_up_db), cfg.alpha_up(), db_to_linear(t.sinr_dn_db), cfg.alpha_dn())?;
    let analytic = variance_trajectory(t.v0, t.steps, &cfg.plant, &q)?.values;
    let run = simulate_closed_loop_with_quality(&cfg.plant, &q, t.v0, t.steps, sc.trials(), sc.seed())?;

    let mut table = Table::new("trajectory", &["n", "V_analytic", "V_mc", "V_mc_stderr"]);
    table
        .meta("snr_up_db", t.snr_up_db)
        .meta("sinr_dn_db", t.sinr_dn_db)
        .meta("s_alpha", q.s_alpha)
        .meta("gamma_alpha", q.gamma_alpha)
        .meta("v_inf", steady_state_variance(&cfg.plant, &q))
        .meta("trials", sc.trials())
        .meta("diverged_trials", run.diverged);
    for n in 0..=t.steps {
        table.push(vec![n.to_string(), num(analytic[n]), num(run.mean[n]), num(run.std_error[n])]);
    }
    Ok(vec![table])
}

/// Steady-state variance over an uplink-SNR × downlink-SINR grid, plus the
/// minimum stabilizing downlink SINR for each uplink SNR.
pub fn stability_map(sc: &Scenario) -> Result<Vec<Table>> {
    let m = &sc.file.stability_map;
    let cfg = &sc.system;
    let n = sc.grid();
    let snrs = lin_space(m.snr_up_db[0], m.snr_up_db[1], n);
    let sinrs = lin_space(m.sinr_dn_db[0], m.sinr_dn_db[1], n);

    let mut map = Table::new(
        "stability_map",
        &["snr_up_db", "sinr_dn_db", "s_alpha", "gamma_alpha", "v_inf", "stable"],
    );
    map.meta("snr_up_db_range", format!("{:?}", m.snr_up_db))
        .meta("sinr_dn_db_range", format!("{:?}", m.sinr_dn_db))
        .meta("alpha_up", cfg.alpha_up())
        .meta("alpha_dn", cfg.alpha_dn());
    let mut boundary = Table::new("stability_boundary", &["snr_up_db", "s_alpha", "sinr_dn_min_db"]);
    boundary.meta("note", "sinr_dn_min_db is inf where no downlink SINR stabilizes the loop");

    for &snr_db in &snrs {
        let s = quality(db_to_linear(snr_db), cfg.alpha_up());
        for &sinr_db in &sinrs {
            let g = quality(db_to_linear(sinr_db), cfg.alpha_dn());
            let v = steady_state_variance(&cfg.plant, &LinkQuality::new(s, g)?);
            map.push(vec![num(snr_db), num(sinr_db), num(s), num(g), variance(v), v.is_stable().to_string()]);
        }
        let min_db = match min_stabilizing_sinr(s, &cfg.plant, cfg.alpha_dn()) {
            Ok(g) => num(10.0 * g.log10()),
            Err(Error::Domain(_)) => num(f64::INFINITY),
            Err(e) => return Err(e.into()),
        };
        boundary.push(vec![num(snr_db), num(s), min_db]);
    }
    Ok(vec![map, boundary])
}

/// Variance as one quality grows with the other fixed, and the limits it
/// approaches.
pub fn asymptotics(sc: &Scenario) -> Result<Vec<Table>> {
    let a = &sc.file.asymptotics;
    let plant = &sc.system.plant;
    let fixed = a.fixed_quality;
    let lim_up = asymptotic_variance(Regime::UplinkHigh, plant, fixed)?;
    let lim_dn = asymptotic_variance(Regime::DownlinkHigh, plant, fixed)?;
    let lim_both = asymptotic_variance(Regime::BothHigh, plant, fixed)?;

    let mut table = Table::new(
        "asymptotics",
        &[
            "quality",
            "v_inf_uplink_swept",
            "v_inf_downlink_swept",
            "v_inf_both_swept",
            "limit_uplink_swept",
            "limit_downlink_swept",
            "limit_both_swept",
        ],
    );
    table.meta("fixed_quality", fixed).meta("quality_range", format!("[1, {}]", a.max_quality));
    for q in log_space(1.0, a.max_quality, sc.grid()) {
        let v = |s, g| -> Result<String> { Ok(variance(steady_state_variance(plant, &LinkQuality::new(s, g)?))) };
        table.push(vec![num(q), v(q, fixed)?, v(fixed, q)?, v(q, q)?, num(lim_up), num(lim_dn), num(lim_both)]);
    }
    Ok(vec![table])
}

fn point_row(p: &TradeoffPoint) -> Vec<String> {
    vec![
        p.scheme.to_string(),
        num(p.gamma_d),
        num(p.gamma_u),
        p.tau_u.to_string(),
        p.v_inf.to_string(),
        num(p.power_split.0),
        num(p.power_split.1),
    ]
}

/// Delay/variance boundaries of the optimal, MRT and ZF designs on the
/// scenario channel, plus the two single-function endpoints.
pub fn regions(sc: &Scenario) -> Result<Vec<Table>> {
    let cfg = &sc.system;
    let ch = sc.channel()?;
    let s_alpha = uplink_quality(cfg, &ch);
    let lo = gamma_d_min(cfg, s_alpha)?;
    let hi = gamma_d_max(cfg, &ch);
    if !(hi > lo) {
        return Err(CliError::input(format!(
            "channel cannot stabilize the loop: full-power control SINR {hi} is below the minimum {lo}"
        )));
    }
    let grid = log_gamma_grid(lo, hi, sc.grid());

    let mut table = Table::new("regions", &["scheme", "gamma_d", "gamma_u", "tau_u", "v_inf", "p_d", "p_u"]);
    table
        .meta("rho", ch.rho())
        .meta("g_d_over_beta_d", ch.g_d() / cfg.beta_d())
        .meta("g_u_over_beta_u", ch.g_u() / cfg.beta_u())
        .meta("s_alpha", s_alpha)
        .meta("gamma_d_range", format!("({lo}, {hi}]"));
    for scheme in [Scheme::Pareto, Scheme::Mrt, Scheme::Zf] {
        for r in sweep_boundary(scheme, &grid, cfg, &ch, s_alpha) {
            match r {
                Ok(p) => table.push(point_row(&p)),
                Err(Error::InfeasibleTarget(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    table.push(point_row(&comm_only_point(cfg, &ch)));
    table.push(point_row(&control_only_point(cfg, &ch, s_alpha)?));
    Ok(vec![table])
}

fn delay(r: jdcc_core::Result<TradeoffPoint>) -> Result<f64> {
    match r {
        Ok(p) => Ok(p.tau_u.value()),
        Err(Error::InfeasibleTarget(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

/// MRT and ZF delay over downlink power at a fixed control SINR, plus the
/// closed-form power at which they cross.
pub fn crossover(sc: &Scenario) -> Result<Vec<Table>> {
    let c = &sc.file.crossover;
    let ch = sc.channel()?;
    let s_alpha = uplink_quality(&sc.system, &ch);
    let lo = gamma_d_min(&sc.system, s_alpha)?;
    if !(c.gamma_d > lo) {
        return Err(CliError::input(format!(
            "crossover.gamma_d: must exceed the minimum stabilizing SINR {lo} (got {})",
            c.gamma_d
        )));
    }
    let threshold = mrt_zf_crossover_power(c.gamma_d, &ch, sc.system.sigma_dn2())?;
    let threshold_dbm = threshold.map(watts_to_dbm);

    let mut table = Table::new("crossover", &["p_dn_dbm", "tau_mrt", "tau_zf", "better"]);
    table
        .meta("gamma_d", c.gamma_d)
        .meta("rho", ch.rho())
        .meta("p_dn_dbm_range", format!("{:?}", c.p_dn_dbm))
        .meta("threshold_dbm", threshold_dbm.map_or("none".to_string(), num));
    for p_dbm in lin_space(c.p_dn_dbm[0], c.p_dn_dbm[1], sc.grid()) {
        let cfg = sc.system.clone().with_p_dn(dbm_to_watts(p_dbm));
        let t_mrt = delay(mrt_region_point(c.gamma_d, &cfg, &ch, s_alpha))?;
        let t_zf = delay(zf_region_point(c.gamma_d, &cfg, &ch, s_alpha))?;
        let better = if t_mrt.is_infinite() && t_zf.is_infinite() {
            "none"
        } else if t_mrt < t_zf {
            "mrt"
        } else if t_zf < t_mrt {
            "zf"
        } else {
            "tie"
        };
        table.push(vec![num(p_dbm), num(t_mrt), num(t_zf), better.to_string()]);
    }

    let mut th = Table::new("crossover_threshold", &["gamma_d", "rho", "p_threshold_w", "p_threshold_dbm"]);
    th.push(vec![
        num(c.gamma_d),
        num(ch.rho()),
        threshold.map_or("none".to_string(), num),
        threshold_dbm.map_or("none".to_string(), num),
    ]);
    Ok(vec![table, th])
}

/// Comm-only and control-only outage over antennas and downlink power.
pub fn outage_single(sc: &Scenario) -> Result<Vec<Table>> {
    let o = &sc.file.outage;
    let family = StreamFamily::new(sc.seed());
    let mut table = Table::new("outage_single", &["antennas", "p_dn_dbm", "kind", "analytic", "mc", "mc_stderr"]);
    table.meta("tau_req_s", o.tau_req_s).meta("v_req", o.v_req_factor * sc.system.plant.sigma_w2).meta("trials", sc.trials());
    let mut cell = 0;
    for &m in &o.antennas {
        for &p in &o.p_dn_dbm {
            let cfg = sc.system.clone().with_antennas(m).with_p_dn(dbm_to_watts(p));
            let spec = OutageSpec::new(o.tau_req_s, o.v_req_factor * cfg.plant.sigma_w2, &cfg.plant)?;
            let seed = family.fork(cell).seed();
            cell += 1;
            let comm = estimate_comm_outage(&spec, &cfg, sc.trials(), seed)?;
            let ctrl = estimate_control_outage(&spec, &cfg, sc.trials(), seed)?;
            for (kind, analytic, est) in
                [("comm", comm_only_outage(&spec, &cfg), comm), ("control", control_only_outage(&spec, &cfg)?, ctrl)]
            {
                table.push(vec![
                    m.to_string(),
                    num(p),
                    kind.to_string(),
                    num(analytic),
                    num(est.value),
                    num(est.std_error),
                ]);
            }
        }
    }
    Ok(vec![table])
}

/// Joint outage of MRT and ZF over a (delay, variance) requirement grid.
pub fn outage_joint(sc: &Scenario) -> Result<Vec<Table>> {
    let o = &sc.file.outage;
    let cfg = &sc.system;
    let family = StreamFamily::new(sc.seed());
    let taus = log_space(o.joint_tau_s[0], o.joint_tau_s[1], o.joint_points);
    let factors = log_space(o.joint_v_factor[0], o.joint_v_factor[1], o.joint_points);
    let mut table = Table::new("outage_joint", &["tau_req_s", "v_req", "scheme", "analytic", "mc", "mc_stderr"]);
    table
        .meta("antennas", cfg.antennas)
        .meta("p_dn_dbm", sc.file.system.p_dn_dbm)
        .meta("tau_req_range_s", format!("{:?}", o.joint_tau_s))
        .meta("v_req_range_sigma_w2", format!("{:?}", o.joint_v_factor))
        .meta("trials", sc.trials());
    let mut cell = 0;
    for &tau in &taus {
        for &f in &factors {
            let spec = OutageSpec::new(tau, f * cfg.plant.sigma_w2, &cfg.plant)?;
            let seed = family.fork(cell).seed();
            cell += 1;
            for (scheme, analytic) in
                [(Scheme::Mrt, joint_outage_mrt(&spec, cfg)?), (Scheme::Zf, joint_outage_zf(&spec, cfg)?)]
            {
                let est = estimate_joint_outage(scheme, &spec, cfg, sc.trials(), seed)?;
                table.push(vec![
                    num(tau),
                    num(spec.v_req()),
                    scheme.to_string(),
                    num(analytic),
                    num(est.value),
                    num(est.std_error),
                ]);
            }
        }
    }
    Ok(vec![table])
}
