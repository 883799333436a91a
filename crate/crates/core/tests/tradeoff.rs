use jdcc_core::channel::{dbm_to_watts, downlink_sinrs, ChannelPair, SystemConfig};
use jdcc_core::control::Plant;
use jdcc_core::outage::{comm_only_outage, control_only_outage, joint_outage_mrt, joint_outage_zf, OutageSpec};
use jdcc_core::pareto::{gamma_d_max, gamma_d_min, log_gamma_grid, sweep_boundary, uplink_quality, Scheme};
use proptest::prelude::*;

fn boundaries(cfg: &SystemConfig, ch: &ChannelPair) -> [Vec<(f64, f64)>; 3] {
    let s_alpha = uplink_quality(cfg, ch);
    let lo = gamma_d_min(cfg, s_alpha).unwrap();
    let grid = log_gamma_grid(lo, gamma_d_max(cfg, ch), 8);
    [Scheme::Pareto, Scheme::Mrt, Scheme::Zf].map(|s| {
        sweep_boundary(s, &grid, cfg, ch, s_alpha)
            .into_iter()
            .zip(&grid)
            .map(|(r, &g)| (g, r.map(|p| p.gamma_u).unwrap_or(f64::NAN)))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimal_boundary_dominates_and_meets_targets(
        m in 2usize..7,
        rho in 0.0f64..0.95,
        xd in 0.5f64..8.0,
        xu in 0.5f64..8.0,
    ) {
        let cfg = SystemConfig::default().with_antennas(m);
        let ch = ChannelPair::synthetic(m, xd * cfg.beta_d(), xu * cfg.beta_d(), rho).unwrap();
        let [opt, mrt, zf] = boundaries(&cfg, &ch);
        let scale = cfg.p_dn * ch.g_u() / cfg.sigma_dn2();
        for i in 0..opt.len() {
            let (g, o) = opt[i];
            prop_assert!(o.is_finite(), "optimal point missing at gamma_d {g}");
            for other in [mrt[i].1, zf[i].1].into_iter().filter(|v| v.is_finite()) {
                prop_assert!(o >= other - 1e-6 * scale, "gamma_d {g}: {o} < {other}");
            }
            if i > 0 {
                prop_assert!(o <= opt[i - 1].1 + 1e-9 * scale, "boundary not decreasing at {g}");
            }
        }
    }
}

#[test]
fn optimal_beams_deliver_reported_sinrs() {
    let cfg = SystemConfig::default();
    let ch = ChannelPair::synthetic(4, 3.0 * cfg.beta_d(), 5.0 * cfg.beta_d(), 0.6).unwrap();
    let s_alpha = uplink_quality(&cfg, &ch);
    let grid = log_gamma_grid(gamma_d_min(&cfg, s_alpha).unwrap(), gamma_d_max(&cfg, &ch), 5);
    for p in sweep_boundary(Scheme::Pareto, &grid, &cfg, &ch, s_alpha).into_iter().take(4) {
        let p = p.unwrap();
        let bf = p.beams.as_ref().expect("optimal point carries its beams");
        assert!(bf.p_d() + bf.p_u() <= cfg.p_dn * (1.0 + 1e-9));
        let s = downlink_sinrs(&ch, bf, cfg.sigma_dn2());
        assert!(s.cd >= p.gamma_d * (1.0 - 1e-7), "{} < {}", s.cd, p.gamma_d);
        assert!((s.cu - p.gamma_u).abs() <= 1e-9 * p.gamma_u.max(1.0));
    }
}

#[test]
fn joint_outage_is_bounded_and_falls_with_power() {
    let plant = Plant::default();
    let spec = OutageSpec::new(0.01, 3.0 * plant.sigma_w2, &plant).unwrap();
    let mut last = [1.0f64; 2];
    for dbm in [-30.0, -25.0, -20.0, -15.0] {
        let cfg = SystemConfig::default().with_p_dn(dbm_to_watts(dbm));
        let floor = comm_only_outage(&spec, &cfg).max(control_only_outage(&spec, &cfg).unwrap());
        let joint = [joint_outage_mrt(&spec, &cfg).unwrap(), joint_outage_zf(&spec, &cfg).unwrap()];
        for (k, j) in joint.into_iter().enumerate() {
            assert!((0.0..=1.0).contains(&j));
            assert!(j >= floor - 1e-6, "{dbm} dBm: joint {j} below single-requirement outage {floor}");
            assert!(j <= last[k] + 1e-9, "{dbm} dBm: outage rose from {} to {j}", last[k]);
            last[k] = j;
        }
    }
}
