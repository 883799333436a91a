//! Outage probabilities under i.i.d. Rayleigh fading.
//!
//! Gains are normalized by their path loss, `G_D = ‖h_D‖²/β_D` and
//! `G_U = ‖h_U‖²/β_U`, both Gamma(M, 1), and the channel correlation `ρ` is
//! Beta(1, M − 1), all independent. A delay requirement `τ_req` becomes a CU
//! SINR requirement `γ_U^req`; a variance requirement `V_req` becomes a CD
//! SINR requirement `γ_D^req(G_D)` that depends on the uplink gain through
//! the sensing report.

use crate::channel::{gamma_cdf, gamma_pdf, gamma_sf, corr_pdf, SystemConfig};
use crate::control::{control_threshold, Plant};
use crate::error::{domain, Result};
use crate::quadrature::integrate;
use crate::roots::{bisect, expand_upward};

/// Joint requirement on CU delay and CD steady-state variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageSpec {
    tau_req: f64,
    v_req: f64,
}

impl OutageSpec {
    /// Rejects variance targets at or below the noise floor, which no link
    /// quality can reach.
    pub fn new(tau_req: f64, v_req: f64, plant: &Plant) -> Result<Self> {
        if !(tau_req > 0.0) {
            return Err(domain(format!("delay requirement must be > 0, got {tau_req}")));
        }
        if !(v_req > plant.sigma_w2) || v_req.is_nan() {
            return Err(domain(format!(
                "variance requirement {v_req} must exceed the process noise {}",
                plant.sigma_w2
            )));
        }
        Ok(Self { tau_req, v_req })
    }

    pub fn tau_req(&self) -> f64 {
        self.tau_req
    }

    pub fn v_req(&self) -> f64 {
        self.v_req
    }
}

/// Normalized-gain thresholds shared by every outage expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageThresholds {
    /// `2^{Q_U/(B_dn τ_req)} − 1`
    pub gamma_u_req: f64,
    /// CU gain needed at full power, `γ_U^req/γ̄_u`.
    pub eta_u: f64,
    /// CD gain below which no downlink quality meets `V_req`.
    pub eta_v: f64,
    /// `P_up β_D/σ_up²`
    pub gbar_up: f64,
    /// `P_dn β_D/σ_dn²`
    pub gbar_d: f64,
    /// `P_dn β_U/σ_dn²`
    pub gbar_u: f64,
}

pub fn comm_thresholds(spec: &OutageSpec, cfg: &SystemConfig) -> OutageThresholds {
    let gamma_u_req = (cfg.payload_bits / (cfg.b_dn * spec.tau_req)).exp2() - 1.0;
    let gbar_u = cfg.p_dn * cfg.beta_u() / cfg.sigma_dn2();
    let gbar_up = cfg.gbar_up();
    let a2 = cfg.plant.a2();
    let v = spec.v_req;
    let s_needed = a2 * v / (v - cfg.plant.sigma_w2);
    let eta_v = (s_needed.powf(1.0 / cfg.alpha_up()) - 1.0) / gbar_up;
    OutageThresholds {
        gamma_u_req,
        eta_u: gamma_u_req / gbar_u,
        eta_v,
        gbar_up,
        gbar_d: cfg.gbar_d(),
        gbar_u,
    }
}

fn shape(cfg: &SystemConfig) -> u32 {
    cfg.antennas as u32
}

/// `Pr(G_U < η_U)` with all downlink power on the CU.
pub fn comm_only_outage(spec: &OutageSpec, cfg: &SystemConfig) -> f64 {
    gamma_cdf(shape(cfg), comm_thresholds(spec, cfg).eta_u)
}

/// Downlink SINR the CD needs to meet `V_req` when its normalized gain is `x`.
pub fn gamma_d_req_of_gain(x: f64, spec: &OutageSpec, cfg: &SystemConfig) -> Result<f64> {
    let th = comm_thresholds(spec, cfg);
    if !(x > th.eta_v) {
        return Err(domain(format!("gain {x} must exceed the control feasibility threshold {}", th.eta_v)));
    }
    let s_alpha = (1.0 + th.gbar_up * x).powf(cfg.alpha_up());
    Ok(control_threshold(spec.v_req, s_alpha, &cfg.plant, cfg.alpha_dn())?.gamma_d)
}

/// `γ_D^req(x)`, or `+∞` where the uplink cannot support the target
/// (including the rounding band just above `η_V`).
fn gamma_d_req_or_inf(x: f64, th: &OutageThresholds, spec: &OutageSpec, cfg: &SystemConfig) -> f64 {
    if !(x > th.eta_v) {
        return f64::INFINITY;
    }
    let s_alpha = (1.0 + th.gbar_up * x).powf(cfg.alpha_up());
    control_threshold(spec.v_req, s_alpha, &cfg.plant, cfg.alpha_dn())
        .map(|t| t.gamma_d)
        .unwrap_or(f64::INFINITY)
}

/// Unique crossing of `γ̄_d x` (increasing) and `γ_D^req(x)` (decreasing).
pub fn eta_ctrl(spec: &OutageSpec, cfg: &SystemConfig) -> Result<f64> {
    let th = comm_thresholds(spec, cfg);
    let h = |x: f64| th.gbar_d * x - gamma_d_req_or_inf(x, &th, spec, cfg);
    let start = if th.eta_v > 0.0 { 2.0 * th.eta_v } else { 1.0 };
    let hi = expand_upward(start, |x| h(x) > 0.0, 2000)?;
    bisect(h, th.eta_v, hi, 1e-15, 400)
}

/// `Pr(G_D < η_ctrl)` with all downlink power on the CD.
pub fn control_only_outage(spec: &OutageSpec, cfg: &SystemConfig) -> Result<f64> {
    Ok(gamma_cdf(shape(cfg), eta_ctrl(spec, cfg)?))
}

/// Absolute error targets of the nested quadrature.
pub const INNER_TOL: f64 = 1e-7;
pub const OUTER_TOL: f64 = 1e-6;
/// Probability mass of `G_D` discarded beyond the outer limit.
pub const TAIL_MASS: f64 = 1e-10;
const INNER_SEGMENTS: usize = 200;
const OUTER_SEGMENTS: usize = 1000;

/// Upper end of the outer integral: smallest doubling with tail mass below `tail`.
pub fn outer_limit(m: u32, from: f64, tail: f64) -> Result<f64> {
    expand_upward(from.max(m as f64), |x| gamma_sf(m, x) < tail, 200)
}

/// Inner success region under MRT for CD gain `x`: `r ∈ [0, r_hi)` where
/// `x(1 − γ_U γ_D r²) > η_f(1 + γ_U r)`. Returns `None` if the region is empty.
fn mrt_r_upper(x: f64, eta_f: f64, g_u: f64, g_d: f64) -> Option<f64> {
    if !(x > eta_f) {
        return None;
    }
    let (a, b, c) = (x * g_u * g_d, eta_f * g_u, x - eta_f);
    let r = 2.0 * c / (b + (b * b + 4.0 * a * c).sqrt());
    Some(r.min(1.0))
}

/// `ψ(x, r)`: CU gain needed for MRT joint success.
fn mrt_psi(x: f64, r: f64, eta_f: f64, eta_u: f64, g_u: f64, g_d: f64) -> f64 {
    let den = x * (1.0 - g_u * g_d * r * r) - eta_f * (1.0 + g_u * r);
    if den > 0.0 {
        eta_u * x * (1.0 + g_d * r) / den
    } else {
        f64::INFINITY
    }
}

/// `φ(x, r)`: CU gain needed for ZF joint success.
fn zf_phi(x: f64, r: f64, eta_f: f64, eta_u: f64) -> f64 {
    let den = (1.0 - r) * x - eta_f;
    if den > 0.0 {
        eta_u * x / den
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Copy)]
enum Joint {
    Mrt,
    Zf,
}

fn joint_outage(kind: Joint, spec: &OutageSpec, cfg: &SystemConfig) -> Result<f64> {
    let m = shape(cfg);
    let th = comm_thresholds(spec, cfg);
    let lo = eta_ctrl(spec, cfg)?;
    let hi = outer_limit(m, 2.0 * lo, TAIL_MASS)?;
    if hi <= lo {
        return Ok(1.0);
    }
    let (g_u, eta_u) = (th.gamma_u_req, th.eta_u);
    let mut inner_error = Ok(());
    let outer = integrate(
        |x| {
            let g_d = gamma_d_req_or_inf(x, &th, spec, cfg);
            let eta_f = g_d / th.gbar_d;
            let upper = match kind {
                Joint::Mrt => mrt_r_upper(x, eta_f, g_u, g_d),
                Joint::Zf => Some(1.0 - eta_f / x).filter(|u| *u > 0.0),
            };
            let Some(upper) = upper else { return 0.0 };
            let inner = integrate(
                |r| {
                    let need = match kind {
                        Joint::Mrt => mrt_psi(x, r, eta_f, eta_u, g_u, g_d),
                        Joint::Zf => zf_phi(x, r, eta_f, eta_u),
                    };
                    corr_pdf(m, r) * gamma_sf(m, need)
                },
                0.0,
                upper,
                INNER_TOL,
                0.0,
                INNER_SEGMENTS,
            );
            match inner {
                Ok(v) => gamma_pdf(m, x) * v.value,
                Err(e) => {
                    inner_error = Err(e);
                    0.0
                }
            }
        },
        lo,
        hi,
        OUTER_TOL,
        0.0,
        OUTER_SEGMENTS,
    )?;
    inner_error?;
    Ok((1.0 - outer.value).clamp(0.0, 1.0))
}

/// Joint outage with MRT beams and the best power split per realization.
pub fn joint_outage_mrt(spec: &OutageSpec, cfg: &SystemConfig) -> Result<f64> {
    joint_outage(Joint::Mrt, spec, cfg)
}

/// Joint outage with ZF beams and the best power split per realization.
pub fn joint_outage_zf(spec: &OutageSpec, cfg: &SystemConfig) -> Result<f64> {
    joint_outage(Joint::Zf, spec, cfg)
}

/// Normalized channel state of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainDraw {
    /// `‖h_D‖²/β_D`
    pub x: f64,
    /// `‖h_U‖²/β_U`
    pub y: f64,
    /// Channel correlation.
    pub r: f64,
}

/// Per-realization requirements, computed once per draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawRequirements {
    pub gamma_u_req: f64,
    /// `+∞` when the uplink cannot support `V_req`.
    pub gamma_d_req: f64,
}

pub fn draw_requirements(x: f64, spec: &OutageSpec, cfg: &SystemConfig) -> DrawRequirements {
    let th = comm_thresholds(spec, cfg);
    DrawRequirements { gamma_u_req: th.gamma_u_req, gamma_d_req: gamma_d_req_or_inf(x, &th, spec, cfg) }
}

/// Feasible interval `[p_min, p_max]` for the CD power share (fraction of
/// `P_dn`) under MRT, from the two SINR constraints in physical units.
pub fn mrt_split_interval(d: &GainDraw, req: &DrawRequirements, cfg: &SystemConfig) -> (f64, f64) {
    let (p, s2) = (cfg.p_dn, cfg.sigma_dn2());
    let (bd, bu) = (cfg.beta_d(), cfg.beta_u());
    let (gd, gu) = (req.gamma_d_req, req.gamma_u_req);
    let p_min = gd * (p * bd * d.r * d.x + s2) / (bd * d.x * (1.0 + gd * d.r));
    let p_max = (p * bu * d.y - gu * s2) / (bu * d.y * (1.0 + gu * d.r));
    (p_min / p, p_max / p)
}

/// Same as [`mrt_split_interval`] for ZF beams.
pub fn zf_split_interval(d: &GainDraw, req: &DrawRequirements, cfg: &SystemConfig) -> (f64, f64) {
    let (p, s2) = (cfg.p_dn, cfg.sigma_dn2());
    let p_min = req.gamma_d_req * s2 / (cfg.beta_d() * (1.0 - d.r) * d.x);
    let p_max = p - req.gamma_u_req * s2 / (cfg.beta_u() * (1.0 - d.r) * d.y);
    (p_min / p, p_max / p)
}
