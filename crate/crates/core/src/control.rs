//! Scalar plant and the rate-distortion view of the sensing/actuation loop.
//!
//! The uplink report and the downlink command are each modelled as an ideal
//! Gaussian source code, so per interval the loop sees
//! `D_up = V/S_α` and `D_dn = (|a|²/|b|²)(V − D_up)/Γ_α`, and the state
//! variance follows the affine map `V ↦ c·V + σ_w²` with
//! `c = |a|²(1/S_α + 1/Γ_α − 1/(S_α Γ_α))`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{domain, infeasible, Result};

/// `x_{n+1} = a·x_n + b·u_n + w_n` with `w_n ~ CN(0, σ_w²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plant {
    pub a: Complex64,
    pub b: Complex64,
    /// Process-noise variance. Zero is accepted so that noiseless loops can be
    /// simulated; every analytic threshold still needs a positive value.
    pub sigma_w2: f64,
}

impl Default for Plant {
    fn default() -> Self {
        Self { a: Complex64::new(1.2, 1.2), b: Complex64::new(1.0, 0.0), sigma_w2: 1e-2 }
    }
}

impl Plant {
    pub fn new(a: Complex64, b: Complex64, sigma_w2: f64) -> Result<Self> {
        let p = Self { a, b, sigma_w2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.norm_sqr() > 1.0) || !self.a.norm_sqr().is_finite() {
            return Err(domain(format!("plant needs finite |a| > 1, got a = {}", self.a)));
        }
        if !(self.b.norm_sqr() > 0.0) || !self.b.norm_sqr().is_finite() {
            return Err(domain(format!("plant needs finite nonzero b, got b = {}", self.b)));
        }
        if !(self.sigma_w2 >= 0.0 && self.sigma_w2.is_finite()) {
            return Err(domain(format!("process noise variance must be finite and >= 0, got {}", self.sigma_w2)));
        }
        Ok(())
    }

    /// `|a|²`
    pub fn a2(&self) -> f64 {
        self.a.norm_sqr()
    }

    /// `|b|²`
    pub fn b2(&self) -> f64 {
        self.b.norm_sqr()
    }
}

/// Per-interval link qualities `S_α = (1+SNR_up)^{α_up}` and
/// `Γ_α = (1+SINR_dn)^{α_dn}`. Either may be `+∞` (an ideal link).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkQuality {
    pub s_alpha: f64,
    pub gamma_alpha: f64,
}

impl LinkQuality {
    pub fn new(s_alpha: f64, gamma_alpha: f64) -> Result<Self> {
        if !(s_alpha >= 1.0) || !(gamma_alpha >= 1.0) {
            return Err(domain(format!("link qualities must be >= 1, got ({s_alpha}, {gamma_alpha})")));
        }
        Ok(Self { s_alpha, gamma_alpha })
    }

    /// Builds the qualities from linear SNR/SINR and channel-use exponents.
    pub fn from_rates(snr_up: f64, alpha_up: f64, sinr_dn: f64, alpha_dn: f64) -> Result<Self> {
        if !(snr_up >= 0.0 && sinr_dn >= 0.0 && alpha_up > 0.0 && alpha_dn > 0.0) {
            return Err(domain(format!(
                "need SNR, SINR >= 0 and exponents > 0, got ({snr_up}, {sinr_dn}, {alpha_up}, {alpha_dn})"
            )));
        }
        Self::new(quality(snr_up, alpha_up), quality(sinr_dn, alpha_dn))
    }
}

/// `(1 + snr)^alpha`
pub fn quality(snr: f64, alpha: f64) -> f64 {
    (1.0 + snr).powf(alpha)
}

/// Uplink reconstruction error `V/S_α`.
pub fn uplink_distortion(v: f64, s_alpha: f64) -> f64 {
    v / s_alpha
}

/// Downlink command error `(|a|²/|b|²)(V − D_up)/Γ_α`.
pub fn downlink_distortion(v: f64, d_up: f64, plant: &Plant, gamma_alpha: f64) -> Result<f64> {
    if !(d_up >= 0.0 && d_up <= v) {
        return Err(domain(format!("uplink distortion {d_up} must lie in [0, {v}]")));
    }
    Ok(plant.a2() / plant.b2() * (v - d_up) / gamma_alpha)
}

/// Slope of the variance map, `|a|²(1/S_α + 1/Γ_α − 1/(S_α Γ_α))`.
pub fn contraction_factor(plant: &Plant, q: &LinkQuality) -> f64 {
    let is = 1.0 / q.s_alpha;
    let ig = 1.0 / q.gamma_alpha;
    plant.a2() * (is + ig - is * ig)
}

/// One interval of the variance recursion.
pub fn variance_step(v: f64, plant: &Plant, q: &LinkQuality) -> f64 {
    contraction_factor(plant, q) * v + plant.sigma_w2
}

/// Mean-square stability, strict: `S_α Γ_α > |a|²(S_α + Γ_α − 1)`.
pub fn is_stable(plant: &Plant, q: &LinkQuality) -> bool {
    let (s, g) = (q.s_alpha, q.gamma_alpha);
    let a2 = plant.a2();
    match (s.is_finite(), g.is_finite()) {
        (true, true) => s * g > a2 * (s + g - 1.0),
        (true, false) => s > a2,
        (false, true) => g > a2,
        (false, false) => true,
    }
}

/// Limit of the variance recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteadyState {
    Stable(f64),
    Unstable,
}

impl SteadyState {
    pub fn value(self) -> Option<f64> {
        match self {
            SteadyState::Stable(v) => Some(v),
            SteadyState::Unstable => None,
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, SteadyState::Stable(_))
    }
}

impl fmt::Display for SteadyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SteadyState::Stable(v) => write!(f, "{v}"),
            SteadyState::Unstable => f.write_str("unstable"),
        }
    }
}

/// `σ_w² S_α Γ_α / (S_α Γ_α − |a|²(S_α + Γ_α − 1))` when stable.
pub fn steady_state_variance(plant: &Plant, q: &LinkQuality) -> SteadyState {
    if !is_stable(plant, q) {
        return SteadyState::Unstable;
    }
    let (s, g) = (q.s_alpha, q.gamma_alpha);
    let (sw, a2) = (plant.sigma_w2, plant.a2());
    let v = match (s.is_finite(), g.is_finite()) {
        (true, true) => sw * s * g / (s * g - a2 * (s + g - 1.0)),
        (true, false) => sw * s / (s - a2),
        (false, true) => sw * g / (g - a2),
        (false, false) => sw,
    };
    SteadyState::Stable(v)
}

/// Which link is taken to be ideal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    BothHigh,
    /// Ideal uplink; the finite quality is `Γ_α`.
    UplinkHigh,
    /// Ideal downlink; the finite quality is `S_α`.
    DownlinkHigh,
}

/// Steady-state variance with one or both links ideal.
pub fn asymptotic_variance(regime: Regime, plant: &Plant, finite_quality: f64) -> Result<f64> {
    match regime {
        Regime::BothHigh => Ok(plant.sigma_w2),
        Regime::UplinkHigh | Regime::DownlinkHigh => {
            if !(finite_quality > plant.a2()) {
                return Err(domain(format!(
                    "finite link quality {finite_quality} must exceed |a|² = {}",
                    plant.a2()
                )));
            }
            Ok(plant.sigma_w2 * finite_quality / (finite_quality - plant.a2()))
        }
    }
}

/// Downlink requirement that pins the steady-state variance to a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlThreshold {
    /// Required `Γ_α`.
    pub gamma_alpha: f64,
    /// Required downlink SINR `(Γ_α)^{1/α_dn} − 1`.
    pub gamma_d: f64,
}

/// Smallest downlink quality achieving `V_∞ = v_th` for uplink quality
/// `s_alpha` (which may be `+∞`).
pub fn control_threshold(v_th: f64, s_alpha: f64, plant: &Plant, alpha_dn: f64) -> Result<ControlThreshold> {
    if !(alpha_dn > 0.0) {
        return Err(domain(format!("alpha_dn must be > 0, got {alpha_dn}")));
    }
    let sw = plant.sigma_w2;
    if !(v_th > sw) {
        return Err(infeasible(format!("variance target {v_th} is not above the noise floor {sw}")));
    }
    let a2 = plant.a2();
    let slack = v_th - sw;
    if !(s_alpha > a2 * v_th / slack) {
        return Err(infeasible(format!(
            "uplink quality {s_alpha} cannot support variance {v_th}; need more than {}",
            a2 * v_th / slack
        )));
    }
    let gamma_alpha = if s_alpha.is_finite() {
        a2 * v_th * (s_alpha - 1.0) / (s_alpha * slack - a2 * v_th)
    } else {
        a2 * v_th / slack
    };
    Ok(ControlThreshold { gamma_alpha, gamma_d: gamma_alpha.powf(1.0 / alpha_dn) - 1.0 })
}

/// Downlink SINR below which no finite variance is reachable.
pub fn min_stabilizing_sinr(s_alpha: f64, plant: &Plant, alpha_dn: f64) -> Result<f64> {
    let a2 = plant.a2();
    if !(s_alpha > a2) {
        return Err(domain(format!("uplink quality {s_alpha} must exceed |a|² = {a2}")));
    }
    if !(alpha_dn > 0.0) {
        return Err(domain(format!("alpha_dn must be > 0, got {alpha_dn}")));
    }
    let ratio = if s_alpha.is_finite() { a2 * (s_alpha - 1.0) / (s_alpha - a2) } else { a2 };
    Ok(ratio.powf(1.0 / alpha_dn) - 1.0)
}

/// `V_0, V_1, …, V_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTrajectory {
    pub values: Vec<f64>,
}

pub fn variance_trajectory(v0: f64, n: usize, plant: &Plant, q: &LinkQuality) -> Result<VarianceTrajectory> {
    if !(v0 >= 0.0) || n == 0 {
        return Err(domain(format!("need V0 >= 0 and at least one step, got ({v0}, {n})")));
    }
    let mut values = Vec::with_capacity(n + 1);
    let mut v = v0;
    values.push(v);
    for _ in 0..n {
        v = variance_step(v, plant, q);
        values.push(v);
    }
    Ok(VarianceTrajectory { values })
}

/// Result of iterating the variance map until it settles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub value: f64,
    pub steps: usize,
    pub converged: bool,
}

pub const FIXED_POINT_REL_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_STEPS: usize = 1_000_000;

/// Iterates until the relative change drops below 1e-12 or 10⁶ steps pass.
pub fn iterate_to_fixed_point(v0: f64, plant: &Plant, q: &LinkQuality) -> FixedPoint {
    let mut v = v0;
    for step in 1..=FIXED_POINT_MAX_STEPS {
        let next = variance_step(v, plant, q);
        if !next.is_finite() {
            return FixedPoint { value: next, steps: step, converged: false };
        }
        if (next - v).abs() <= FIXED_POINT_REL_TOL * next.abs() {
            return FixedPoint { value: next, steps: step, converged: true };
        }
        v = next;
    }
    FixedPoint { value: v, steps: FIXED_POINT_MAX_STEPS, converged: false }
}
