//! Delay/variance trade-off for one CU and one CD sharing the downlink.
//!
//! For a control-SINR target `γ_D` the CU gets the largest SINR `Γ_U` the
//! remaining resources allow. That pair maps to a delay `τ_U` and a
//! steady-state variance `V_∞`. Three beamforming schemes are covered:
//! the optimal (Pareto) design, MRT and ZF.
//!
//! The optimal beams lie in `span{h_D, h_U}` and have the regularized form
//! `(I + μ h h^H)^{-1} h_target`. With `t = κ/(1+κ)`, `κ = μ‖h‖²`, the
//! direction is `h_target − t·P h_target` (P the projector onto `h`), so
//! `t = 0` is MRT and `t = 1` is ZF. The solver searches `(t_D, t_U)` over
//! the unit square; for each pair the two active constraints fix the power
//! split in closed form.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{downlink_sinrs, Beamformer, ChannelPair, SystemConfig};
use crate::control::{min_stabilizing_sinr, quality, steady_state_variance, LinkQuality, SteadyState};
use crate::error::{domain, infeasible, Error, Result};
use crate::linalg;

/// A delay or variance that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Finite(f64),
    Unbounded,
}

impl Metric {
    /// The value, with `Unbounded` mapped to `+∞`.
    pub fn value(self) -> f64 {
        match self {
            Metric::Finite(v) => v,
            Metric::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Metric::Finite(_))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Finite(v) => write!(f, "{v}"),
            Metric::Unbounded => f.write_str("inf"),
        }
    }
}

impl From<SteadyState> for Metric {
    fn from(s: SteadyState) -> Self {
        match s {
            SteadyState::Stable(v) => Metric::Finite(v),
            SteadyState::Unstable => Metric::Unbounded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Pareto,
    Mrt,
    Zf,
    CommOnly,
    CtrlOnly,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Pareto => "pareto",
            Scheme::Mrt => "mrt",
            Scheme::Zf => "zf",
            Scheme::CommOnly => "comm-only",
            Scheme::CtrlOnly => "ctrl-only",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One operating point of the delay/variance region.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    /// Control SINR delivered to the CD.
    pub gamma_d: f64,
    /// Resulting CU SINR.
    pub gamma_u: f64,
    pub tau_u: Metric,
    pub v_inf: Metric,
    pub scheme: Scheme,
    /// `(p_D, p_U)` in watts.
    pub power_split: (f64, f64),
    pub beams: Option<Beamformer>,
}

/// Diagnostics of the optimal-beamforming solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoSolverReport {
    pub gamma_u_star: f64,
    /// Weight on the CU channel in the CD beam (`+∞` means exact nulling).
    pub mu_u: f64,
    /// Weight on the CD channel in the CU beam.
    pub mu_d: f64,
    /// Power multiplier from projecting the stationarity conditions on the beams.
    pub nu: f64,
    /// Control-SINR multiplier from the same projection.
    pub lambda: f64,
    /// `(|p_D + p_U − P|/P, |Γ_D − γ_D|/γ_D)` at the returned beams.
    pub kkt_residuals: (f64, f64),
    /// Objective evaluations spent in the search.
    pub iterations: usize,
}

/// Residual bound both active constraints must meet.
pub const KKT_TOL: f64 = 1e-8;

/// `Q_U / (B_dn log2(1 + Γ_U))`; unbounded at zero SINR.
pub fn comm_delay(gamma_u: f64, cfg: &SystemConfig) -> Metric {
    if !(gamma_u > 0.0) {
        return Metric::Unbounded;
    }
    let rate = cfg.b_dn * gamma_u.ln_1p() / std::f64::consts::LN_2;
    if rate > 0.0 {
        Metric::Finite(cfg.payload_bits / rate)
    } else {
        Metric::Unbounded
    }
}

/// Uplink quality `S_α = (1 + SNR_up)^{α_up}` of a channel realization.
pub fn uplink_quality(cfg: &SystemConfig, ch: &ChannelPair) -> f64 {
    quality(crate::channel::uplink_snr(cfg, ch), cfg.alpha_up())
}

/// Largest control SINR, all power on an MRT beam to the CD.
pub fn gamma_d_max(cfg: &SystemConfig, ch: &ChannelPair) -> f64 {
    cfg.p_dn * ch.g_d() / cfg.sigma_dn2()
}

/// Largest control SINR reachable with a ZF beam.
pub fn gamma_d_max_zf(cfg: &SystemConfig, ch: &ChannelPair) -> f64 {
    (1.0 - ch.rho()) * gamma_d_max(cfg, ch)
}

/// Smallest control SINR that keeps the loop stable.
pub fn gamma_d_min(cfg: &SystemConfig, s_alpha: f64) -> Result<f64> {
    min_stabilizing_sinr(s_alpha, &cfg.plant, cfg.alpha_dn())
}

fn variance_at(gamma_d: f64, cfg: &SystemConfig, s_alpha: f64) -> Result<Metric> {
    let q = LinkQuality::new(s_alpha, quality(gamma_d, cfg.alpha_dn()))?;
    Ok(steady_state_variance(&cfg.plant, &q).into())
}

fn require_stable(gamma_d: f64, cfg: &SystemConfig, s_alpha: f64) -> Result<Metric> {
    let v = variance_at(gamma_d, cfg, s_alpha)?;
    if !v.is_finite() {
        return Err(infeasible(format!("control SINR {gamma_d} does not stabilize the loop at S_α = {s_alpha}")));
    }
    Ok(v)
}

fn unit_or_zero(h: &[Complex64]) -> Vec<Complex64> {
    linalg::normalized(h).unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); h.len()])
}

/// All power on an MRT beam to the CU.
pub fn comm_only_point(cfg: &SystemConfig, ch: &ChannelPair) -> TradeoffPoint {
    let gamma_u = cfg.p_dn * ch.g_u() / cfg.sigma_dn2();
    let zero = vec![Complex64::new(0.0, 0.0); ch.antennas()];
    let beams = Beamformer::from_directions(&zero, 0.0, &unit_or_zero(ch.h_u()), cfg.p_dn, cfg.p_dn).ok();
    TradeoffPoint {
        gamma_d: 0.0,
        gamma_u,
        tau_u: comm_delay(gamma_u, cfg),
        v_inf: Metric::Unbounded,
        scheme: Scheme::CommOnly,
        power_split: (0.0, cfg.p_dn),
        beams,
    }
}

/// All power on an MRT beam to the CD.
pub fn control_only_point(cfg: &SystemConfig, ch: &ChannelPair, s_alpha: f64) -> Result<TradeoffPoint> {
    let gamma_d = gamma_d_max(cfg, ch);
    let v_inf = variance_at(gamma_d, cfg, s_alpha)?;
    if !v_inf.is_finite() {
        return Err(infeasible(format!(
            "full-power control SINR {gamma_d} cannot stabilize the loop at S_α = {s_alpha}"
        )));
    }
    let zero = vec![Complex64::new(0.0, 0.0); ch.antennas()];
    let beams = Beamformer::from_directions(&unit_or_zero(ch.h_d()), cfg.p_dn, &zero, 0.0, cfg.p_dn).ok();
    Ok(TradeoffPoint {
        gamma_d,
        gamma_u: 0.0,
        tau_u: Metric::Unbounded,
        v_inf,
        scheme: Scheme::CtrlOnly,
        power_split: (cfg.p_dn, 0.0),
        beams,
    })
}

fn check_target(gamma_d: f64, max: f64, what: &str) -> Result<()> {
    if !(gamma_d > 0.0) {
        return Err(infeasible(format!("control SINR target must be > 0, got {gamma_d}")));
    }
    if gamma_d > max * (1.0 + 1e-12) {
        return Err(infeasible(format!("control SINR {gamma_d} exceeds the {what} maximum {max}")));
    }
    Ok(())
}

/// Power split under MRT beams with the control SINR met exactly.
pub fn mrt_power_allocation(gamma_d: f64, cfg: &SystemConfig, ch: &ChannelPair) -> Result<(f64, f64)> {
    if ch.g_d() == 0.0 {
        return Err(infeasible("CD channel is zero"));
    }
    check_target(gamma_d, gamma_d_max(cfg, ch), "MRT")?;
    let (p, s2, rho, g) = (cfg.p_dn, cfg.sigma_dn2(), ch.rho(), ch.g_d());
    let p_d = (gamma_d * (p * rho * g + s2) / (g * (1.0 + gamma_d * rho))).min(p);
    Ok((p_d, p - p_d))
}

/// Power split under ZF beams with the control SINR met exactly.
pub fn zf_power_allocation(gamma_d: f64, cfg: &SystemConfig, ch: &ChannelPair) -> Result<(f64, f64)> {
    if ch.g_d() == 0.0 {
        return Err(infeasible("CD channel is zero"));
    }
    if !(ch.rho() < 1.0) {
        return Err(Error::DegenerateGeometry("ZF needs non-parallel channels".into()));
    }
    check_target(gamma_d, gamma_d_max_zf(cfg, ch), "ZF")?;
    let p_d = (gamma_d * cfg.sigma_dn2() / (ch.g_d() * (1.0 - ch.rho()))).min(cfg.p_dn);
    Ok((p_d, cfg.p_dn - p_d))
}

/// MRT beams `√p·h/‖h‖`.
pub fn mrt_beams(ch: &ChannelPair, p_d: f64, p_u: f64, budget: f64) -> Result<Beamformer> {
    Beamformer::from_directions(&unit_or_zero(ch.h_d()), p_d, &unit_or_zero(ch.h_u()), p_u, budget)
}

/// ZF beams: each user's channel projected off the other user's channel.
pub fn zf_beams(ch: &ChannelPair, p_d: f64, p_u: f64, budget: f64) -> Result<Beamformer> {
    let u_d = unit_or_zero(&linalg::project_out(ch.h_d(), ch.h_u()));
    let u_u = unit_or_zero(&linalg::project_out(ch.h_u(), ch.h_d()));
    Beamformer::from_directions(&u_d, p_d, &u_u, p_u, budget)
}

fn region_point(
    scheme: Scheme,
    gamma_d: f64,
    gamma_u: f64,
    split: (f64, f64),
    beams: Beamformer,
    cfg: &SystemConfig,
    s_alpha: f64,
) -> Result<TradeoffPoint> {
    let v_inf = require_stable(gamma_d, cfg, s_alpha)?;
    Ok(TradeoffPoint {
        gamma_d,
        gamma_u,
        tau_u: comm_delay(gamma_u, cfg),
        v_inf,
        scheme,
        power_split: split,
        beams: Some(beams),
    })
}

/// Region point under MRT: `Γ_U = p_U g_U / (p_D ρ g_U + σ²)`.
pub fn mrt_region_point(gamma_d: f64, cfg: &SystemConfig, ch: &ChannelPair, s_alpha: f64) -> Result<TradeoffPoint> {
    let (p_d, p_u) = mrt_power_allocation(gamma_d, cfg, ch)?;
    let gamma_u = p_u * ch.g_u() / (p_d * ch.rho() * ch.g_u() + cfg.sigma_dn2());
    let beams = mrt_beams(ch, p_d, p_u, cfg.p_dn)?;
    region_point(Scheme::Mrt, gamma_d, gamma_u, (p_d, p_u), beams, cfg, s_alpha)
}

/// Region point under ZF: `Γ_U = p_U g_U (1 − ρ) / σ²`.
pub fn zf_region_point(gamma_d: f64, cfg: &SystemConfig, ch: &ChannelPair, s_alpha: f64) -> Result<TradeoffPoint> {
    let (p_d, p_u) = zf_power_allocation(gamma_d, cfg, ch)?;
    let gamma_u = p_u * ch.g_u() * (1.0 - ch.rho()) / cfg.sigma_dn2();
    let beams = zf_beams(ch, p_d, p_u, cfg.p_dn)?;
    region_point(Scheme::Zf, gamma_d, gamma_u, (p_d, p_u), beams, cfg, s_alpha)
}

/// Unit vector along `(I + μ h_i h_i^H)^{-1} h_t`, using
/// `(I + μhh^H)^{-1} = I − μhh^H/(1 + μ‖h‖²)`. `μ = +∞` gives the ZF direction.
pub fn regularized_direction(h_target: &[Complex64], h_interf: &[Complex64], mu: f64) -> Result<Vec<Complex64>> {
    if !(mu >= 0.0) {
        return Err(domain(format!("regularization weight must be >= 0, got {mu}")));
    }
    if h_target.len() != h_interf.len() {
        return Err(domain("channel vectors differ in length"));
    }
    if linalg::norm_sqr(h_target) == 0.0 {
        return Err(domain("target channel is zero"));
    }
    let g_i = linalg::norm_sqr(h_interf);
    let v = if mu.is_infinite() {
        linalg::project_out(h_target, h_interf)
    } else {
        let c = linalg::dot(h_interf, h_target) * (mu / (1.0 + mu * g_i));
        linalg::sub_scaled(h_target, c, h_interf)
    };
    linalg::normalized(&v)
        .ok_or_else(|| Error::DegenerateGeometry("target lies in the span of the nulled channel".into()))
}

/// Direction `h_t − t·P_i h_t` in the normalized parameter `t ∈ [0, 1]`.
fn direction_t(h_target: &[Complex64], h_interf: &[Complex64], t: f64) -> Vec<Complex64> {
    let g_i = linalg::norm_sqr(h_interf);
    if g_i == 0.0 || t == 0.0 {
        return h_target.to_vec();
    }
    let c = linalg::dot(h_interf, h_target) * (t / g_i);
    linalg::sub_scaled(h_target, c, h_interf)
}

/// `μ = κ/‖h‖²` with `κ = t/(1 − t)`.
fn mu_of_t(t: f64, g_interf: f64) -> f64 {
    if t >= 1.0 {
        f64::INFINITY
    } else if g_interf == 0.0 {
        0.0
    } else {
        t / ((1.0 - t) * g_interf)
    }
}

/// Scalar model of the beam pair as a function of `(t_D, t_U)`.
struct SplitModel {
    p: f64,
    s2: f64,
    gamma: f64,
    g_d: f64,
    g_u: f64,
    rho: f64,
}

struct SplitEval {
    p_d: f64,
    p_u: f64,
    gamma_u: f64,
}

impl SplitModel {
    /// Normalized beam gains `(own, leak)`: own-user gain and gain at the
    /// other user, for a beam with parameter `t` toward a user of gain `g_own`.
    fn gains(&self, t: f64, g_own: f64, g_other: f64) -> (f64, f64) {
        let rho = self.rho;
        let den = (1.0 - t) * (1.0 - t) * rho + (1.0 - rho);
        if den <= 0.0 {
            // Parallel channels: every direction is the same.
            return (g_own, rho * g_other);
        }
        let own = g_own * (1.0 - t * rho) * (1.0 - t * rho) / den;
        let leak = rho * g_other * (1.0 - t) * (1.0 - t) / den;
        (own, leak)
    }

    fn eval(&self, t_d: f64, t_u: f64) -> SplitEval {
        let (a_dd, a_ud) = self.gains(t_d, self.g_d, self.g_u);
        let (a_uu, a_du) = self.gains(t_u, self.g_u, self.g_d);
        let p_d = self.gamma * (self.p * a_du + self.s2) / (a_dd + self.gamma * a_du);
        let p_u = self.p - p_d;
        let gamma_u = if p_u >= 0.0 { p_u * a_uu / (p_d * a_ud + self.s2) } else { 0.0 };
        SplitEval { p_d, p_u, gamma_u }
    }

    /// Objective to maximize: `Γ_U` when the split is feasible, otherwise a
    /// negative penalty proportional to the power shortfall.
    fn objective(&self, t_d: f64, t_u: f64) -> f64 {
        let e = self.eval(t_d, t_u);
        if e.p_u >= 0.0 {
            e.gamma_u
        } else {
            e.p_u / self.p
        }
    }
}

const GRID: usize = 64;
const NM_TOL: f64 = 1e-10;
const NM_MAX_ITER: usize = 10_000;
const NM_STARTS: usize = 4;

/// Bound-constrained Nelder–Mead maximization on `[0, hi]²`.
fn nelder_mead(f: &impl Fn(f64, f64) -> f64, start: [f64; 2], step: f64, hi: f64, evals: &mut usize) -> ([f64; 2], f64) {
    let clamp = |x: [f64; 2]| [x[0].clamp(0.0, hi), x[1].clamp(0.0, hi)];
    let mut eval = |x: [f64; 2]| {
        *evals += 1;
        -f(x[0], x[1])
    };
    let mut simplex: Vec<([f64; 2], f64)> = [start, [start[0] + step, start[1]], [start[0], start[1] + step]]
        .into_iter()
        .map(|x| {
            let x = clamp(x);
            (x, eval(x))
        })
        .collect();
    for _ in 0..NM_MAX_ITER {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let size = simplex[1..]
            .iter()
            .map(|v| (v.0[0] - simplex[0].0[0]).abs().max((v.0[1] - simplex[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if size < NM_TOL {
            break;
        }
        let (best, worst) = (simplex[0], simplex[2]);
        let c = [(simplex[0].0[0] + simplex[1].0[0]) / 2.0, (simplex[0].0[1] + simplex[1].0[1]) / 2.0];
        let along = |k: f64| clamp([c[0] + k * (c[0] - worst.0[0]), c[1] + k * (c[1] - worst.0[1])]);
        let xr = along(1.0);
        let fr = eval(xr);
        if fr < best.1 {
            let xe = along(2.0);
            let fe = eval(xe);
            simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[1].1 {
            simplex[2] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let x = along(0.5);
            (x, eval(x))
        } else {
            let x = along(-0.5);
            (x, eval(x))
        };
        if fc < worst.1.min(fr) {
            simplex[2] = (xc, fc);
            continue;
        }
        for v in simplex.iter_mut().skip(1) {
            let x = clamp([best.0[0] + 0.5 * (v.0[0] - best.0[0]), best.0[1] + 0.5 * (v.0[1] - best.0[1])]);
            *v = (x, eval(x));
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, -simplex[0].1)
}

/// Optimal beamforming for control-SINR target `γ_D`: maximizes `Γ_U`
/// subject to `Γ_D ≥ γ_D` and the sum-power budget.
pub fn pareto_point(
    gamma_d: f64,
    cfg: &SystemConfig,
    ch: &ChannelPair,
    s_alpha: f64,
) -> Result<(TradeoffPoint, ParetoSolverReport)> {
    if ch.g_d() == 0.0 {
        return Err(infeasible("CD channel is zero"));
    }
    let g_max = gamma_d_max(cfg, ch);
    check_target(gamma_d, g_max, "full-power")?;
    let v_inf = require_stable(gamma_d, cfg, s_alpha)?;
    let (p, s2) = (cfg.p_dn, cfg.sigma_dn2());

    if gamma_d >= g_max * (1.0 - 1e-12) {
        let mut point = control_only_point(cfg, ch, s_alpha)?;
        point.scheme = Scheme::Pareto;
        point.gamma_d = gamma_d;
        let report = ParetoSolverReport {
            gamma_u_star: 0.0,
            mu_u: 0.0,
            mu_d: 0.0,
            nu: f64::NAN,
            lambda: f64::NAN,
            kkt_residuals: (0.0, (g_max - gamma_d).abs() / gamma_d),
            iterations: 0,
        };
        return Ok((point, report));
    }

    let model = SplitModel { p, s2, gamma: gamma_d, g_d: ch.g_d(), g_u: ch.g_u(), rho: ch.rho() };
    let hi = if ch.rho() < 1.0 - 1e-9 { 1.0 } else { 1.0 - 1e-6 };
    let f = |a: f64, b: f64| model.objective(a, b);

    let mut evals = 0;
    let node = |i: usize| hi * i as f64 / (GRID - 1) as f64;
    let mut cells: Vec<(f64, [f64; 2])> = Vec::with_capacity(GRID * GRID);
    for i in 0..GRID {
        for j in 0..GRID {
            let x = [node(i), node(j)];
            cells.push((f(x[0], x[1]), x));
        }
    }
    evals += cells.len();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = (cells[0].1, cells[0].0);
    for &(_, start) in cells.iter().take(NM_STARTS) {
        let (x, v) = nelder_mead(&f, start, hi / (GRID - 1) as f64, hi, &mut evals);
        if v > best.1 {
            best = (x, v);
        }
    }
    let [t_d, t_u] = best.0;
    let e = model.eval(t_d, t_u);
    if e.p_u < 0.0 {
        return Err(infeasible(format!("no beam pair meets control SINR {gamma_d} within the power budget")));
    }

    let u_d = linalg::normalized(&direction_t(ch.h_d(), ch.h_u(), t_d))
        .ok_or_else(|| Error::DegenerateGeometry("CD beam collapsed".into()))?;
    let u_u = unit_or_zero(&direction_t(ch.h_u(), ch.h_d(), t_u));
    let beams = Beamformer::from_directions(&u_d, e.p_d, &u_u, e.p_u, p)?;
    let sinrs = downlink_sinrs(ch, &beams, s2);
    let power_slack = (beams.p_d() + beams.p_u() - p).abs() / p;
    let sinr_slack = (sinrs.cd - gamma_d).abs() / gamma_d;
    if power_slack > KKT_TOL || sinr_slack > KKT_TOL {
        return Err(Error::SolverFailure { iterations: evals, power_slack, sinr_slack });
    }

    let (nu, lambda) = multipliers(ch, &beams, s2, sinrs.cu, gamma_d);
    let report = ParetoSolverReport {
        gamma_u_star: sinrs.cu,
        mu_u: mu_of_t(t_d, ch.g_u()),
        mu_d: mu_of_t(t_u, ch.g_d()),
        nu,
        lambda,
        kkt_residuals: (power_slack, sinr_slack),
        iterations: evals,
    };
    let point = TradeoffPoint {
        gamma_d,
        gamma_u: sinrs.cu,
        tau_u: comm_delay(sinrs.cu, cfg),
        v_inf,
        scheme: Scheme::Pareto,
        power_split: (e.p_d, e.p_u),
        beams: Some(beams),
    };
    Ok((point, report))
}

/// `(ν, λ)` from the Lagrangian stationarity conditions projected onto each
/// beam:
/// `ν p_D = λγ_D − Γ_U c_UD` and `ν p_U = Γ_U − λγ_D c_DU`, where `c_XY` is
/// the leakage of beam Y at user X over that user's interference-plus-noise.
pub fn multipliers(ch: &ChannelPair, bf: &Beamformer, sigma_dn2: f64, gamma_u: f64, gamma_d: f64) -> (f64, f64) {
    let leak_u = linalg::dot(ch.h_u(), bf.w_d()).norm_sqr();
    let leak_d = linalg::dot(ch.h_d(), bf.w_u()).norm_sqr();
    let c_ud = leak_u / (leak_u + sigma_dn2);
    let c_du = leak_d / (leak_d + sigma_dn2);
    let nu = gamma_u * (1.0 - c_du * c_ud) / (bf.p_u() + c_du * bf.p_d());
    let lambda = (nu * bf.p_d() + gamma_u * c_ud) / gamma_d;
    (nu, lambda)
}

/// Regularization weights implied by given multipliers:
/// `μ_U = Γ_U / (ν(|h_U^H w_D|² + σ²))`, `μ_D = λγ_D / (ν(|h_D^H w_U|² + σ²))`.
pub fn implied_weights(
    ch: &ChannelPair,
    bf: &Beamformer,
    sigma_dn2: f64,
    gamma_u: f64,
    gamma_d: f64,
    nu: f64,
    lambda: f64,
) -> (f64, f64) {
    let i_u = linalg::dot(ch.h_u(), bf.w_d()).norm_sqr() + sigma_dn2;
    let i_d = linalg::dot(ch.h_d(), bf.w_u()).norm_sqr() + sigma_dn2;
    (gamma_u / (nu * i_u), lambda * gamma_d / (nu * i_d))
}

/// Evaluates one scheme on each grid value; failures stay in place.
pub fn sweep_boundary(
    scheme: Scheme,
    gamma_d_grid: &[f64],
    cfg: &SystemConfig,
    ch: &ChannelPair,
    s_alpha: f64,
) -> Vec<Result<TradeoffPoint>> {
    gamma_d_grid
        .par_iter()
        .map(|&g| match scheme {
            Scheme::Pareto => pareto_point(g, cfg, ch, s_alpha).map(|(p, _)| p),
            Scheme::Mrt => mrt_region_point(g, cfg, ch, s_alpha),
            Scheme::Zf => zf_region_point(g, cfg, ch, s_alpha),
            other => Err(domain(format!("{other} is a single point, not a sweepable scheme"))),
        })
        .collect()
}

/// `n` values of `γ_D` in `(lo, hi]`, equally spaced in `log(1 + γ_D)`.
pub fn log_gamma_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 0 || !(hi > lo) {
        return Vec::new();
    }
    let (a, b) = ((1.0 + lo).ln(), (1.0 + hi).ln());
    let mut grid: Vec<f64> = (1..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp() - 1.0).collect();
    grid[n - 1] = hi;
    grid
}

/// Power at which MRT and ZF give equal delay for target `γ_D`. MRT wins
/// below it, ZF above. `None` for orthogonal channels, where the two schemes
/// coincide.
pub fn mrt_zf_crossover_power(gamma_d: f64, ch: &ChannelPair, sigma_dn2: f64) -> Result<Option<f64>> {
    if !(gamma_d > 0.0) {
        return Err(domain(format!("control SINR must be > 0, got {gamma_d}")));
    }
    let (rho, gd, gu, s2) = (ch.rho(), ch.g_d(), ch.g_u(), sigma_dn2);
    if rho == 0.0 {
        return Ok(None);
    }
    if !(rho < 1.0) {
        return Err(Error::DegenerateGeometry("parallel channels leave ZF undefined".into()));
    }
    let g = gamma_d;
    let c2 = g * rho * rho * (1.0 - rho) * gd * gd * gu;
    let c1 = s2 * gd * rho * (g * gu * (1.0 - rho - g * rho) + gd * (g - g * rho - 1.0));
    let c0 = -g * g * s2 * s2 * rho * (gd + gu);
    if !(c2 > 0.0) {
        return Err(Error::DegenerateGeometry("leading crossover coefficient vanishes".into()));
    }
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    let root = if c1 >= 0.0 { -2.0 * c0 / (c1 + disc) } else { (-c1 + disc) / (2.0 * c2) };
    Ok(Some(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channel;
    use crate::rng::StreamFamily;
    use approx::assert_relative_eq;

    fn cfg() -> SystemConfig {
        SystemConfig::default()
    }

    /// Synthetic channel at the reference scale: gains `4β`.
    fn scaled_pair(rho: f64) -> ChannelPair {
        let c = cfg();
        ChannelPair::synthetic(4, 4.0 * c.beta_d(), 4.0 * c.beta_u(), rho).unwrap()
    }

    fn random_pair(seed: u64) -> ChannelPair {
        let c = cfg();
        let mut rng = StreamFamily::new(seed).stream(0);
        ChannelPair::new(sample_channel(4, c.beta_d(), &mut rng), sample_channel(4, c.beta_u(), &mut rng)).unwrap()
    }

    #[test]
    fn comm_delay_examples() {
        let c = cfg();
        assert_relative_eq!(comm_delay(1.0, &c).value(), 0.05, max_relative = 1e-14);
        assert_relative_eq!(comm_delay(31.0, &c).value(), 0.01, max_relative = 1e-14);
        assert_eq!(comm_delay(0.0, &c), Metric::Unbounded);
        assert_eq!(Metric::Unbounded.to_string(), "inf");
    }

    #[test]
    fn comm_only_examples() {
        let c = cfg();
        let ch = scaled_pair(0.3);
        let pt = comm_only_point(&c, &ch);
        assert_relative_eq!(pt.gamma_u, 20.0, max_relative = 1e-12);
        assert_eq!(pt.tau_u, comm_delay(pt.gamma_u, &c));
        assert_eq!(pt.v_inf, Metric::Unbounded);
        let zero_u = ChannelPair::synthetic(4, 1e-9, 0.0, 0.0).unwrap();
        let pt = comm_only_point(&c, &zero_u);
        assert_eq!((pt.tau_u, pt.v_inf), (Metric::Unbounded, Metric::Unbounded));
    }

    #[test]
    fn control_only_examples() {
        let c = cfg();
        let ch = scaled_pair(0.3);
        // (1 + γ_max)² = 50 with α_dn = 2
        let g_d = (50f64.sqrt() - 1.0) * c.sigma_dn2() / c.p_dn;
        let ch50 = ChannelPair::synthetic(4, g_d, ch.g_u(), 0.3).unwrap();
        let pt = control_only_point(&c, &ch50, 100.0).unwrap();
        assert_relative_eq!(pt.v_inf.value(), 0.01 * 5000.0 / (5000.0 - 2.88 * 149.0), max_relative = 1e-12);
        assert!((pt.v_inf.value() - 0.010938).abs() < 1e-6);
        assert_eq!(pt.tau_u, Metric::Unbounded);

        let huge = ChannelPair::synthetic(4, 1.0, 1.0, 0.3).unwrap();
        let pt = control_only_point(&c, &huge, 10.0).unwrap();
        assert_relative_eq!(pt.v_inf.value(), 0.01 * 10.0 / (10.0 - 2.88), max_relative = 1e-9);

        assert!(matches!(control_only_point(&c, &ch50, 2.0), Err(Error::InfeasibleTarget(_))));
    }

    #[test]
    fn mrt_allocation_examples() {
        let c = cfg();
        let orth = scaled_pair(0.0);
        let (p_d, p_u) = mrt_power_allocation(2.0, &c, &orth).unwrap();
        assert_relative_eq!(p_d, 2.0 * c.sigma_dn2() / orth.g_d(), max_relative = 1e-14);
        assert_relative_eq!(p_d + p_u, c.p_dn, max_relative = 1e-15);

        let ch = scaled_pair(0.4);
        let g_max = gamma_d_max(&c, &ch);
        let (p_d, p_u) = mrt_power_allocation(g_max, &c, &ch).unwrap();
        assert_relative_eq!(p_d, c.p_dn, max_relative = 1e-12);
        assert!(p_u.abs() <= 1e-12 * c.p_dn);
        assert!(mrt_power_allocation(g_max * 1.01, &c, &ch).is_err());
    }

    #[test]
    fn mrt_allocation_meets_target_exactly() {
        let c = cfg();
        for seed in 0..20 {
            let ch = random_pair(seed);
            let g = 0.6 * gamma_d_max(&c, &ch);
            let (p_d, p_u) = mrt_power_allocation(g, &c, &ch).unwrap();
            let s = downlink_sinrs(&ch, &mrt_beams(&ch, p_d, p_u, c.p_dn).unwrap(), c.sigma_dn2());
            assert!((s.cd - g).abs() <= 1e-10 * g);
            let pt = mrt_region_point(g, &c, &ch, 1e3).unwrap();
            assert!((pt.gamma_u - s.cu).abs() <= 1e-10 * s.cu);
        }
    }

    #[test]
    fn zf_allocation_meets_target_and_nulls() {
        let c = cfg();
        for seed in 0..20 {
            let ch = random_pair(100 + seed);
            let g = 0.5 * gamma_d_max_zf(&c, &ch);
            let (p_d, p_u) = zf_power_allocation(g, &c, &ch).unwrap();
            let bf = zf_beams(&ch, p_d, p_u, c.p_dn).unwrap();
            let s = downlink_sinrs(&ch, &bf, c.sigma_dn2());
            assert!((s.cd - g).abs() <= 1e-10 * g);
            let leak_u = linalg::dot(ch.h_u(), bf.w_d()).norm();
            let leak_d = linalg::dot(ch.h_d(), bf.w_u()).norm();
            assert!(leak_u <= 1e-12 * (p_d * ch.g_u()).sqrt());
            assert!(leak_d <= 1e-12 * (p_u * ch.g_d()).sqrt());
            let pt = zf_region_point(g, &c, &ch, 1e3).unwrap();
            assert!((pt.gamma_u - s.cu).abs() <= 1e-10 * s.cu);
        }
    }

    #[test]
    fn zf_limits() {
        let c = cfg();
        let ch = scaled_pair(0.5);
        let zf_max = gamma_d_max_zf(&c, &ch);
        let (_, p_u) = zf_power_allocation(zf_max, &c, &ch).unwrap();
        assert!(p_u.abs() <= 1e-12 * c.p_dn);
        // Between the ZF and MRT maxima only MRT is feasible.
        let g = 0.5 * (zf_max + gamma_d_max(&c, &ch));
        assert!(matches!(zf_power_allocation(g, &c, &ch), Err(Error::InfeasibleTarget(_))));
        assert!(mrt_power_allocation(g, &c, &ch).is_ok());
        let orth = scaled_pair(0.0);
        assert_eq!(zf_power_allocation(3.0, &c, &orth).unwrap(), mrt_power_allocation(3.0, &c, &orth).unwrap());
    }

    #[test]
    fn region_endpoints_and_monotonicity() {
        let c = cfg();
        let ch = scaled_pair(0.5);
        let s_alpha = uplink_quality(&c, &ch);
        let g_max = gamma_d_max(&c, &ch);
        let pt = mrt_region_point(g_max, &c, &ch, s_alpha).unwrap();
        assert_eq!(pt.tau_u, Metric::Unbounded);
        assert_relative_eq!(pt.v_inf.value(), control_only_point(&c, &ch, s_alpha).unwrap().v_inf.value());

        let lo = gamma_d_min(&c, s_alpha).unwrap();
        for (scheme, hi) in [(Scheme::Mrt, g_max), (Scheme::Zf, gamma_d_max_zf(&c, &ch)), (Scheme::Pareto, g_max)] {
            let pts: Vec<_> = sweep_boundary(scheme, &log_gamma_grid(lo, hi, 40), &c, &ch, s_alpha)
                .into_iter()
                .map(|r| r.unwrap())
                .collect();
            for w in pts.windows(2) {
                assert!(w[1].tau_u.value() >= w[0].tau_u.value() * (1.0 - 1e-9), "{scheme}");
                assert!(w[1].v_inf.value() <= w[0].v_inf.value() * (1.0 + 1e-12), "{scheme}");
            }
        }
    }

    #[test]
    fn orthogonal_channels_make_all_schemes_coincide() {
        let c = cfg();
        let ch = scaled_pair(0.0);
        let s_alpha = uplink_quality(&c, &ch);
        let g = 0.5 * gamma_d_max(&c, &ch);
        let m = mrt_region_point(g, &c, &ch, s_alpha).unwrap();
        let z = zf_region_point(g, &c, &ch, s_alpha).unwrap();
        let (p, _) = pareto_point(g, &c, &ch, s_alpha).unwrap();
        let expected = (c.p_dn - g * c.sigma_dn2() / ch.g_d()) * ch.g_u() / c.sigma_dn2();
        for x in [m.gamma_u, z.gamma_u, p.gamma_u] {
            assert!((x - expected).abs() <= 1e-10 * expected);
        }
    }

    #[test]
    fn regularized_direction_endpoints() {
        let mut rng = StreamFamily::new(4).stream(0);
        let ht = sample_channel(4, 1.0, &mut rng);
        let hi = sample_channel(4, 1.0, &mut rng);
        let mrt = regularized_direction(&ht, &hi, 0.0).unwrap();
        let expect = linalg::normalized(&ht).unwrap();
        for (a, b) in mrt.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-15);
        }
        let zf = linalg::normalized(&linalg::project_out(&ht, &hi)).unwrap();
        let big = regularized_direction(&ht, &hi, 1e12).unwrap();
        let cos = linalg::dot(&zf, &big).norm().min(1.0);
        assert!(cos.acos() < 1e-5);
        let inf = regularized_direction(&ht, &hi, f64::INFINITY).unwrap();
        assert!((linalg::dot(&zf, &inf).norm() - 1.0).abs() < 1e-14);
        assert!((linalg::norm_sqr(&big) - 1.0).abs() < 1e-12);
        assert!(regularized_direction(&vec![Complex64::new(0.0, 0.0); 4], &hi, 1.0).is_err());
    }

    /// Gaussian elimination with partial pivoting on a dense complex system.
    fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
                let v = b[col];
                b[row] -= f * v;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for row in (0..n).rev() {
            let mut s = b[row];
            for k in row + 1..n {
                s -= a[row][k] * x[k];
            }
            x[row] = s / a[row][row];
        }
        x
    }

    #[test]
    fn regularized_direction_matches_dense_solve() {
        let mut rng = StreamFamily::new(8).stream(0);
        for mu in [0.3, 2.0, 17.0] {
            let ht = sample_channel(4, 1.0, &mut rng);
            let hi = sample_channel(4, 1.0, &mut rng);
            let a: Vec<Vec<Complex64>> = (0..4)
                .map(|r| {
                    (0..4)
                        .map(|k| {
                            let id = if r == k { 1.0 } else { 0.0 };
                            Complex64::new(id, 0.0) + hi[r] * hi[k].conj() * mu
                        })
                        .collect()
                })
                .collect();
            let x = linalg::normalized(&dense_solve(a, ht.clone())).unwrap();
            let d = regularized_direction(&ht, &hi, mu).unwrap();
            for (p, q) in x.iter().zip(&d) {
                assert!((p - q).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn parametric_direction_matches_weight() {
        let mut rng = StreamFamily::new(12).stream(0);
        let ht = sample_channel(4, 2.0, &mut rng);
        let hi = sample_channel(4, 0.5, &mut rng);
        let gi = linalg::norm_sqr(&hi);
        for t in [0.0, 0.2, 0.7, 0.999] {
            let a = linalg::normalized(&direction_t(&ht, &hi, t)).unwrap();
            let b = regularized_direction(&ht, &hi, mu_of_t(t, gi)).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_gains_match_vectors() {
        let ch = random_pair(77);
        let model = SplitModel { p: 1.0, s2: 1.0, gamma: 1.0, g_d: ch.g_d(), g_u: ch.g_u(), rho: ch.rho() };
        for t in [0.0, 0.35, 1.0] {
            let u = linalg::normalized(&direction_t(ch.h_d(), ch.h_u(), t)).unwrap();
            let (own, leak) = model.gains(t, ch.g_d(), ch.g_u());
            assert_relative_eq!(own, linalg::dot(ch.h_d(), &u).norm_sqr(), max_relative = 1e-10);
            assert!((leak - linalg::dot(ch.h_u(), &u).norm_sqr()).abs() <= 1e-10 * ch.g_u());
        }
    }

    #[test]
    fn pareto_point_dominates_and_is_tight() {
        let c = cfg();
        for seed in 0..30 {
            let ch = random_pair(500 + seed);
            let s_alpha = uplink_quality(&c, &ch);
            let Ok(lo) = gamma_d_min(&c, s_alpha) else { continue };
            let hi = gamma_d_max(&c, &ch);
            if hi <= lo {
                continue;
            }
            for g in log_gamma_grid(lo, hi, 6) {
                let (pt, rep) = pareto_point(g, &c, &ch, s_alpha).unwrap();
                assert!(rep.kkt_residuals.0 <= KKT_TOL && rep.kkt_residuals.1 <= KKT_TOL);
                if let Ok(m) = mrt_region_point(g, &c, &ch, s_alpha) {
                    assert!(pt.gamma_u >= m.gamma_u * (1.0 - 1e-6) - 1e-12);
                }
                if let Ok(z) = zf_region_point(g, &c, &ch, s_alpha) {
                    assert!(pt.gamma_u >= z.gamma_u * (1.0 - 1e-6) - 1e-12);
                }
            }
        }
    }

    #[test]
    fn pareto_delay_stays_above_comm_only() {
        let c = cfg();
        for seed in 0..10 {
            let ch = random_pair(900 + seed);
            let s_alpha = uplink_quality(&c, &ch);
            let Ok(lo) = gamma_d_min(&c, s_alpha) else { continue };
            if gamma_d_max(&c, &ch) <= lo * (1.0 + 1e-3) {
                continue;
            }
            let (pt, _) = pareto_point(lo * (1.0 + 1e-3), &c, &ch, s_alpha).unwrap();
            assert!(pt.tau_u.value() > comm_only_point(&c, &ch).tau_u.value());
        }
    }

    #[test]
    fn pareto_endpoint_is_control_only() {
        let c = cfg();
        let ch = scaled_pair(0.5);
        let s_alpha = uplink_quality(&c, &ch);
        let (pt, _) = pareto_point(gamma_d_max(&c, &ch), &c, &ch, s_alpha).unwrap();
        assert_eq!(pt.tau_u, Metric::Unbounded);
        assert_eq!(pt.v_inf, control_only_point(&c, &ch, s_alpha).unwrap().v_inf);
        let sweep = sweep_boundary(Scheme::Pareto, &[gamma_d_max(&c, &ch)], &c, &ch, s_alpha);
        assert_eq!(sweep[0].as_ref().unwrap().tau_u, Metric::Unbounded);
    }

    #[test]
    fn multipliers_reproduce_solver_weights() {
        let c = cfg();
        let ch = scaled_pair(0.5);
        let s_alpha = uplink_quality(&c, &ch);
        let lo = gamma_d_min(&c, s_alpha).unwrap();
        let hi = gamma_d_max(&c, &ch);
        for g in log_gamma_grid(lo, hi, 5).into_iter().take(4) {
            let (pt, rep) = pareto_point(g, &c, &ch, s_alpha).unwrap();
            let bf = pt.beams.unwrap();
            assert!(rep.nu > 0.0 && rep.lambda > 0.0);
            let (mu_u, mu_d) = implied_weights(&ch, &bf, c.sigma_dn2(), pt.gamma_u, g, rep.nu, rep.lambda);
            assert!((mu_u - rep.mu_u).abs() <= 1e-3 * rep.mu_u, "{mu_u} vs {}", rep.mu_u);
            assert!((mu_d - rep.mu_d).abs() <= 1e-3 * rep.mu_d, "{mu_d} vs {}", rep.mu_d);
        }
    }

    #[test]
    fn crossover_examples() {
        let c = cfg();
        assert_eq!(mrt_zf_crossover_power(2.0, &scaled_pair(0.0), c.sigma_dn2()).unwrap(), None);
        let ch = scaled_pair(0.5);
        let p = mrt_zf_crossover_power(2.0, &ch, c.sigma_dn2()).unwrap().unwrap();
        assert!(p > 0.0);
        let tau = |scheme: Scheme, pw: f64| {
            let cc = c.clone().with_p_dn(pw);
            let r = match scheme {
                Scheme::Mrt => mrt_region_point(2.0, &cc, &ch, 1e6),
                _ => zf_region_point(2.0, &cc, &ch, 1e6),
            };
            r.map(|pt| pt.tau_u.value()).unwrap_or(f64::INFINITY)
        };
        assert!(tau(Scheme::Mrt, p * 0.9) < tau(Scheme::Zf, p * 0.9));
        assert!(tau(Scheme::Mrt, p * 1.1) > tau(Scheme::Zf, p * 1.1));
    }

    #[test]
    fn log_grid_shape() {
        let g = log_gamma_grid(0.5, 20.0, 10);
        assert_eq!(g.len(), 10);
        assert!(g[0] > 0.5);
        assert_eq!(g[9], 20.0);
        let r: Vec<f64> = g.windows(2).map(|w| (1.0 + w[1]) / (1.0 + w[0])).collect();
        for x in &r {
            assert!((x - r[0]).abs() < 1e-12);
        }
    }
}
