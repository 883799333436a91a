//! Physical layer: path loss, Rayleigh channel draws, link SNR/SINR and the
//! Gamma(M, 1) / Beta(1, M-1) laws of the normalized gains and correlation.
//!
//! Every quantity here is linear (watts, hertz, seconds). Decibel inputs are
//! converted once, when a scenario is ingested.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::control::Plant;
use crate::error::{domain, Result};
use crate::linalg;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

/// Physical scenario parameters, all linear.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antenna count `M`.
    pub antennas: usize,
    /// Downlink sum-power budget (W).
    pub p_dn: f64,
    /// CD uplink transmit power (W).
    pub p_up: f64,
    /// Downlink bandwidth (Hz).
    pub b_dn: f64,
    /// Uplink state-reporting bandwidth (Hz).
    pub b_up: f64,
    /// Control sampling period (s).
    pub t_s: f64,
    /// Noise power spectral density (W/Hz).
    pub n0: f64,
    /// Communication payload (bits).
    pub payload_bits: f64,
    /// BS-to-CU distance (m).
    pub d_u: f64,
    /// BS-to-CD distance (m).
    pub d_d: f64,
    /// Path gain at the 1 m reference distance (linear).
    pub c0: f64,
    pub path_loss_exponent: f64,
    pub plant: Plant,
}

impl Default for SystemConfig {
    /// Reference scenario: 4 antennas, -30 dBm on both links, 20/10 kHz,
    /// 0.1 ms sampling, -174 dBm/Hz, 1000-bit payload, CU at 100 m, CD at
    /// 120 m, C0 = -30 dB, exponent 3.2, a = 1.2+1.2i, b = 1, σ_w² = 1e-2.
    fn default() -> Self {
        Self {
            antennas: 4,
            p_dn: dbm_to_watts(-30.0),
            p_up: dbm_to_watts(-30.0),
            b_dn: 20e3,
            b_up: 10e3,
            t_s: 0.1e-3,
            n0: dbm_to_watts(-174.0),
            payload_bits: 1000.0,
            d_u: 100.0,
            d_d: 120.0,
            c0: db_to_linear(-30.0),
            path_loss_exponent: 3.2,
            plant: Plant::default(),
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.antennas < 2 {
            return Err(domain(format!("antennas must be at least 2, got {}", self.antennas)));
        }
        let positive = [
            ("p_dn", self.p_dn),
            ("p_up", self.p_up),
            ("b_dn", self.b_dn),
            ("b_up", self.b_up),
            ("t_s", self.t_s),
            ("n0", self.n0),
            ("payload_bits", self.payload_bits),
            ("d_u", self.d_u),
            ("d_d", self.d_d),
            ("c0", self.c0),
            ("path_loss_exponent", self.path_loss_exponent),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        self.plant.validate()
    }

    /// Downlink noise power `N0·B_dn`.
    pub fn sigma_dn2(&self) -> f64 {
        self.n0 * self.b_dn
    }

    /// Uplink noise power `N0·B_up`.
    pub fn sigma_up2(&self) -> f64 {
        self.n0 * self.b_up
    }

    /// Uplink channel uses per control interval, `B_up·T_s`.
    pub fn alpha_up(&self) -> f64 {
        self.b_up * self.t_s
    }

    /// Downlink channel uses per control interval, `B_dn·T_s`.
    pub fn alpha_dn(&self) -> f64 {
        self.b_dn * self.t_s
    }

    pub fn beta_u(&self) -> f64 {
        self.c0 * self.d_u.powf(-self.path_loss_exponent)
    }

    pub fn beta_d(&self) -> f64 {
        self.c0 * self.d_d.powf(-self.path_loss_exponent)
    }

    /// Mean uplink SNR per unit normalized gain, `P_up·β_D/σ_up²`.
    pub fn gbar_up(&self) -> f64 {
        self.p_up * self.beta_d() / self.sigma_up2()
    }

    /// Mean full-power downlink SNR at the CD per unit normalized gain.
    pub fn gbar_d(&self) -> f64 {
        self.p_dn * self.beta_d() / self.sigma_dn2()
    }

    pub fn with_p_dn(mut self, p_dn: f64) -> Self {
        self.p_dn = p_dn;
        self
    }

    pub fn with_antennas(mut self, m: usize) -> Self {
        self.antennas = m;
        self
    }

    pub fn with_plant(mut self, plant: Plant) -> Self {
        self.plant = plant;
        self
    }
}

/// Large-scale gain `C0·d^(-alpha)`.
pub fn path_loss(d: f64, c0: f64, alpha_pl: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(domain(format!("distance must be > 0, got {d}")));
    }
    if !(c0 > 0.0 && alpha_pl > 0.0) {
        return Err(domain(format!("need C0 > 0 and exponent > 0, got ({c0}, {alpha_pl})")));
    }
    Ok(c0 * d.powf(-alpha_pl))
}

/// `M` i.i.d. CN(0, beta) entries.
pub fn sample_channel<R: Rng + ?Sized>(m: usize, beta: f64, rng: &mut R) -> Vec<Complex64> {
    let s = (0.5 * beta).sqrt();
    (0..m)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        })
        .collect()
}

/// `|x^H y|² / (‖x‖²‖y‖²)`.
pub fn correlation(h_d: &[Complex64], h_u: &[Complex64]) -> Result<f64> {
    if h_d.len() != h_u.len() {
        return Err(domain("channel vectors differ in length"));
    }
    let gd = linalg::norm_sqr(h_d);
    let gu = linalg::norm_sqr(h_u);
    if gd == 0.0 || gu == 0.0 {
        return Err(domain("correlation of a zero vector is undefined"));
    }
    let c = linalg::dot(h_d, h_u).norm_sqr();
    Ok((c / (gd * gu)).clamp(0.0, 1.0))
}

/// One realization of the CD and CU channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    h_d: Vec<Complex64>,
    h_u: Vec<Complex64>,
    g_d: f64,
    g_u: f64,
    rho: f64,
}

impl ChannelPair {
    /// Builds a pair and caches gains and correlation. A zero vector is
    /// allowed and gets correlation 0.
    pub fn new(h_d: Vec<Complex64>, h_u: Vec<Complex64>) -> Result<Self> {
        if h_d.len() != h_u.len() || h_d.is_empty() {
            return Err(domain(format!(
                "channel vectors must be non-empty and equal length, got {} and {}",
                h_d.len(),
                h_u.len()
            )));
        }
        if h_d.iter().chain(&h_u).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(domain("channel entries must be finite"));
        }
        let g_d = linalg::norm_sqr(&h_d);
        let g_u = linalg::norm_sqr(&h_u);
        let rho = if g_d > 0.0 && g_u > 0.0 { correlation(&h_d, &h_u)? } else { 0.0 };
        Ok(Self { h_d, h_u, g_d, g_u, rho })
    }

    /// Independent Rayleigh draw with the configured path losses.
    pub fn sample<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Self {
        let h_d = sample_channel(cfg.antennas, cfg.beta_d(), rng);
        let h_u = sample_channel(cfg.antennas, cfg.beta_u(), rng);
        Self::new(h_d, h_u).expect("sampled channels are finite and equal length")
    }

    /// Real-valued pair with prescribed gains and correlation:
    /// `h_D = √g_D·e1`, `h_U = √g_U·(√ρ·e1 + √(1-ρ)·e2)`.
    pub fn synthetic(m: usize, g_d: f64, g_u: f64, rho: f64) -> Result<Self> {
        if m < 2 {
            return Err(domain("synthetic pair needs at least 2 antennas"));
        }
        if !(0.0..=1.0).contains(&rho) || !(g_d >= 0.0) || !(g_u >= 0.0) {
            return Err(domain(format!("invalid synthetic gains/correlation ({g_d}, {g_u}, {rho})")));
        }
        let mut h_d = vec![Complex64::new(0.0, 0.0); m];
        let mut h_u = h_d.clone();
        h_d[0] = Complex64::new(g_d.sqrt(), 0.0);
        h_u[0] = Complex64::new((g_u * rho).sqrt(), 0.0);
        h_u[1] = Complex64::new((g_u * (1.0 - rho)).sqrt(), 0.0);
        Self::new(h_d, h_u)
    }

    pub fn h_d(&self) -> &[Complex64] {
        &self.h_d
    }

    pub fn h_u(&self) -> &[Complex64] {
        &self.h_u
    }

    /// `‖h_D‖²`
    pub fn g_d(&self) -> f64 {
        self.g_d
    }

    /// `‖h_U‖²`
    pub fn g_u(&self) -> f64 {
        self.g_u
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn antennas(&self) -> usize {
        self.h_d.len()
    }
}

/// Downlink beam pair under a sum-power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    w_d: Vec<Complex64>,
    w_u: Vec<Complex64>,
    power_budget: f64,
}

impl Beamformer {
    pub fn new(w_d: Vec<Complex64>, w_u: Vec<Complex64>, power_budget: f64) -> Result<Self> {
        if w_d.len() != w_u.len() {
            return Err(domain("beam vectors differ in length"));
        }
        let used = linalg::norm_sqr(&w_d) + linalg::norm_sqr(&w_u);
        if !(used <= power_budget * (1.0 + 1e-9)) {
            return Err(domain(format!("beams use {used:e} W, budget is {power_budget:e} W")));
        }
        Ok(Self { w_d, w_u, power_budget })
    }

    /// Beams `√p_D·u_D` and `√p_U·u_U` from unit directions.
    pub fn from_directions(
        u_d: &[Complex64],
        p_d: f64,
        u_u: &[Complex64],
        p_u: f64,
        power_budget: f64,
    ) -> Result<Self> {
        let w_d = linalg::scale(u_d, Complex64::new(p_d.max(0.0).sqrt(), 0.0));
        let w_u = linalg::scale(u_u, Complex64::new(p_u.max(0.0).sqrt(), 0.0));
        Self::new(w_d, w_u, power_budget)
    }

    pub fn w_d(&self) -> &[Complex64] {
        &self.w_d
    }

    pub fn w_u(&self) -> &[Complex64] {
        &self.w_u
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn p_d(&self) -> f64 {
        linalg::norm_sqr(&self.w_d)
    }

    pub fn p_u(&self) -> f64 {
        linalg::norm_sqr(&self.w_u)
    }
}

/// Uplink SNR of the CD report after MRC, `P_up·‖h_D‖²/σ_up²`.
pub fn uplink_snr(cfg: &SystemConfig, ch: &ChannelPair) -> f64 {
    cfg.p_up * ch.g_d() / cfg.sigma_up2()
}

/// Downlink SINRs with cross-signals treated as noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownlinkSinrs {
    /// SINR at the communication user, `Γ_U`.
    pub cu: f64,
    /// SINR at the controllable device, `Γ_D`.
    pub cd: f64,
}

pub fn downlink_sinrs(ch: &ChannelPair, bf: &Beamformer, sigma_dn2: f64) -> DownlinkSinrs {
    let hu_wu = linalg::dot(ch.h_u(), bf.w_u()).norm_sqr();
    let hu_wd = linalg::dot(ch.h_u(), bf.w_d()).norm_sqr();
    let hd_wd = linalg::dot(ch.h_d(), bf.w_d()).norm_sqr();
    let hd_wu = linalg::dot(ch.h_d(), bf.w_u()).norm_sqr();
    DownlinkSinrs {
        cu: hu_wu / (hu_wd + sigma_dn2),
        cd: hd_wd / (hd_wu + sigma_dn2),
    }
}

/// `e^{-x}·x^n/n!` built as a running product, so nothing overflows for the
/// shapes of interest (validated for M ≤ 20; beyond ~170 the factor itself
/// underflows).
fn poisson_term(n: u32, x: f64) -> f64 {
    let mut t = (-x).exp();
    for k in 1..=n {
        t *= x / k as f64;
    }
    t
}

/// Upper tail `1 - F_G(x) = e^{-x} Σ_{k<M} x^k/k!`, summed directly.
fn gamma_upper_sum(m: u32, x: f64) -> f64 {
    let mut term = (-x).exp();
    let mut acc = term;
    for k in 1..m {
        term *= x / k as f64;
        acc += term;
    }
    acc
}

/// Lower tail `F_G(x) = e^{-x} Σ_{k≥M} x^k/k!`, for `x` not much larger than `M`.
fn gamma_lower_series(m: u32, x: f64) -> f64 {
    let mut term = poisson_term(m, x);
    let mut acc = term;
    let mut k = m;
    loop {
        k += 1;
        term *= x / k as f64;
        acc += term;
        if term <= 1e-17 * acc || k > m + 2000 {
            return acc;
        }
    }
}

/// CDF of Gamma(M, 1): `1 - e^{-x} Σ_{k=0}^{M-1} x^k/k!`, clamped to [0, 1].
pub fn gamma_cdf(m: u32, x: f64) -> f64 {
    assert!(m >= 1, "gamma shape must be at least 1");
    if !(x > 0.0) {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let v = if x < m as f64 + 1.0 { gamma_lower_series(m, x) } else { 1.0 - gamma_upper_sum(m, x) };
    v.clamp(0.0, 1.0)
}

/// Survival function `1 - F_G(x)` without cancellation in the upper tail.
pub fn gamma_sf(m: u32, x: f64) -> f64 {
    assert!(m >= 1, "gamma shape must be at least 1");
    if !(x > 0.0) {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let v = if x < m as f64 + 1.0 { 1.0 - gamma_lower_series(m, x) } else { gamma_upper_sum(m, x) };
    v.clamp(0.0, 1.0)
}

/// Density of Gamma(M, 1): `x^{M-1} e^{-x} / (M-1)!`.
pub fn gamma_pdf(m: u32, x: f64) -> f64 {
    assert!(m >= 1, "gamma shape must be at least 1");
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if m == 1 { 1.0 } else { 0.0 };
    }
    poisson_term(m - 1, x)
}

/// Density of the correlation of two independent isotropic vectors in C^M,
/// Beta(1, M-1): `(M-1)(1-r)^{M-2}`. For M = 2 this is uniform.
pub fn corr_pdf(m: u32, r: f64) -> f64 {
    assert!(m >= 2, "correlation density needs M >= 2");
    if !(0.0..=1.0).contains(&r) {
        return 0.0;
    }
    if m == 2 {
        return 1.0;
    }
    (m - 1) as f64 * (1.0 - r).powi(m as i32 - 2)
}

/// CDF of the correlation law, `1 - (1-r)^{M-1}`.
pub fn corr_cdf(m: u32, r: f64) -> f64 {
    assert!(m >= 2, "correlation law needs M >= 2");
    if r <= 0.0 {
        0.0
    } else if r >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - r).powi(m as i32 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFamily;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_distance_returns_c0() {
        assert_relative_eq!(path_loss(1.0, 1e-3, 3.2).unwrap(), 1e-3, max_relative = 1e-15);
    }

    #[test]
    fn path_loss_at_scenario_distances() {
        // 1e-3 · 100^-3.2 = 10^-9.4 ; 1e-3 · 120^-3.2 from a 30-digit evaluation
        assert_relative_eq!(path_loss(100.0, 1e-3, 3.2).unwrap(), 3.981_071_705_534_972_5e-10, max_relative = 1e-13);
        assert_relative_eq!(path_loss(120.0, 1e-3, 3.2).unwrap(), 2.221_365_449_290_379e-10, max_relative = 1e-13);
    }

    #[test]
    fn path_loss_rejects_non_positive_distance() {
        assert!(path_loss(0.0, 1e-3, 3.2).is_err());
        assert!(path_loss(-5.0, 1e-3, 3.2).is_err());
    }

    #[test]
    fn default_config_derived_values() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert_relative_eq!(cfg.alpha_up(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(cfg.alpha_dn(), 2.0, max_relative = 1e-12);
        // σ_dn²/(P_dn·β_U) = 2e4 · 10^-20.4 / (1e-6 · 10^-9.4) = 0.2
        assert_relative_eq!(cfg.sigma_dn2() / (cfg.p_dn * cfg.beta_u()), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn config_rejects_single_antenna() {
        let cfg = SystemConfig { antennas: 1, ..SystemConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let fam = StreamFamily::new(3);
        let a = sample_channel(4, 1.0, &mut fam.stream(0));
        let b = sample_channel(4, 1.0, &mut fam.stream(0));
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_gain_moments_match_gamma() {
        let fam = StreamFamily::new(11);
        let n = 100_000;
        let beta = 2.5e-10;
        let g: Vec<f64> = (0..n)
            .map(|i| linalg::norm_sqr(&sample_channel(4, beta, &mut fam.stream(i))) / beta)
            .collect();
        let mean = g.iter().sum::<f64>() / n as f64;
        let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 4.0).abs() < 0.05, "mean {mean}");
        assert!((var - 4.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn correlation_examples() {
        let h = vec![c(0.3, -1.0), c(2.0, 0.5), c(-0.7, 0.1)];
        assert_relative_eq!(correlation(&h, &h).unwrap(), 1.0, max_relative = 1e-15);
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let e2 = vec![c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(correlation(&e1, &e2).unwrap(), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let diag = vec![c(s, 0.0), c(s, 0.0)];
        assert_relative_eq!(correlation(&diag, &e1).unwrap(), 0.5, max_relative = 1e-15);
        assert!(correlation(&e1, &[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn pair_invariant_rho_times_gains() {
        let fam = StreamFamily::new(5);
        for i in 0..50 {
            let ch = ChannelPair::sample(&SystemConfig::default(), &mut fam.stream(i));
            let lhs = ch.rho() * ch.g_d() * ch.g_u();
            let rhs = linalg::dot(ch.h_d(), ch.h_u()).norm_sqr();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn synthetic_pair_has_requested_geometry() {
        let ch = ChannelPair::synthetic(4, 2.0, 3.0, 0.5).unwrap();
        assert_relative_eq!(ch.g_d(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(ch.g_u(), 3.0, max_relative = 1e-15);
        assert_relative_eq!(ch.rho(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn uplink_snr_at_reference_scale() {
        let cfg = SystemConfig::default();
        let g_d = 4.0 * cfg.beta_d();
        let ch = ChannelPair::synthetic(4, g_d, 1.0, 0.0).unwrap();
        // 1e-6 · 4 · 2.2213654e-10 / (10^-20.4 · 1e4), evaluated at 30 digits
        assert_relative_eq!(uplink_snr(&cfg, &ch), 22.319_270_925_986_67, max_relative = 1e-12);
        let doubled = SystemConfig { p_up: 2.0 * cfg.p_up, ..cfg.clone() };
        assert_relative_eq!(uplink_snr(&doubled, &ch), 2.0 * uplink_snr(&cfg, &ch), max_relative = 1e-15);
        let zero = ChannelPair::synthetic(4, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(uplink_snr(&cfg, &zero), 0.0);
    }

    #[test]
    fn sinrs_without_cu_beam_or_interference() {
        let ch = ChannelPair::synthetic(3, 2.0, 5.0, 0.0).unwrap();
        let zero = vec![c(0.0, 0.0); 3];
        let u_d = linalg::normalized(ch.h_d()).unwrap();
        let u_u = linalg::normalized(ch.h_u()).unwrap();
        let bf = Beamformer::new(linalg::scale(&u_d, c(1.0, 0.0)), zero, 1.0).unwrap();
        assert_eq!(downlink_sinrs(&ch, &bf, 0.1).cu, 0.0);

        let bf = Beamformer::from_directions(&u_d, 0.3, &u_u, 0.7, 1.0).unwrap();
        let s = downlink_sinrs(&ch, &bf, 0.1);
        assert_relative_eq!(s.cu, 0.7 * 5.0 / 0.1, max_relative = 1e-14);
        assert_relative_eq!(s.cd, 0.3 * 2.0 / 0.1, max_relative = 1e-14);
    }

    #[test]
    fn sinrs_match_raw_inner_products() {
        let fam = StreamFamily::new(9);
        let mut rng = fam.stream(0);
        let ch = ChannelPair::new(sample_channel(4, 1.0, &mut rng), sample_channel(4, 1.0, &mut rng)).unwrap();
        let w_d = sample_channel(4, 0.1, &mut rng);
        let w_u = sample_channel(4, 0.1, &mut rng);
        let bf = Beamformer::new(w_d.clone(), w_u.clone(), 10.0).unwrap();
        let ip = |h: &[Complex64], w: &[Complex64]| -> f64 {
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..h.len() {
                re += h[k].re * w[k].re + h[k].im * w[k].im;
                im += h[k].re * w[k].im - h[k].im * w[k].re;
            }
            re * re + im * im
        };
        let s2 = 0.05;
        let s = downlink_sinrs(&ch, &bf, s2);
        assert_relative_eq!(s.cu, ip(ch.h_u(), &w_u) / (ip(ch.h_u(), &w_d) + s2), max_relative = 1e-12);
        assert_relative_eq!(s.cd, ip(ch.h_d(), &w_d) / (ip(ch.h_d(), &w_u) + s2), max_relative = 1e-12);
    }

    #[test]
    fn beamformer_budget_enforced() {
        let w = vec![c(1.0, 0.0), c(0.0, 0.0)];
        assert!(Beamformer::new(w.clone(), w.clone(), 1.5).is_err());
        assert!(Beamformer::new(w.clone(), w, 2.0).is_ok());
    }

    #[test]
    fn gamma_cdf_examples() {
        assert_eq!(gamma_cdf(4, 0.0), 0.0);
        for x in [0.01, 0.5, 2.0, 7.0] {
            assert_relative_eq!(gamma_cdf(1, x), 1.0 - (-x as f64).exp(), max_relative = 1e-13);
        }
        // ∫_0^4 x³e^{-x}/6 dx by adaptive quadrature
        let oracle = crate::quadrature::integrate(|x| x.powi(3) * (-x).exp() / 6.0, 0.0, 4.0, 1e-14, 0.0, 100)
            .unwrap()
            .value;
        assert!((gamma_cdf(4, 4.0) - oracle).abs() < 1e-12);
        assert!((gamma_cdf(4, 4.0) - 0.56653).abs() < 1e-5);
    }

    #[test]
    fn gamma_cdf_tail_and_monotonicity() {
        for m in 1..=8 {
            assert!(gamma_cdf(m, 50.0) >= 1.0 - 1e-12);
            let mut prev = 0.0;
            for i in 0..=400 {
                let v = gamma_cdf(m, i as f64 * 0.1);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn cdf_and_sf_are_complementary() {
        for m in [1, 2, 4, 6, 12, 20] {
            for x in [1e-6, 0.3, 3.0, m as f64 + 0.5, 25.0, 60.0] {
                assert!((gamma_cdf(m, x) + gamma_sf(m, x) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn densities_normalize() {
        let g = crate::quadrature::integrate(|x| gamma_pdf(4, x), 0.0, 80.0, 1e-12, 0.0, 200).unwrap();
        assert!((g.value - 1.0).abs() < 1e-8);
        let r = crate::quadrature::integrate(|r| corr_pdf(4, r), 0.0, 1.0, 1e-13, 0.0, 50).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert_eq!(corr_pdf(2, 0.0), 1.0);
        assert_eq!(corr_pdf(2, 1.0), 1.0);
    }

    /// Two-sample Kolmogorov–Smirnov distance against an analytic CDF.
    fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn sampled_correlation_follows_beta_law() {
        let fam = StreamFamily::new(21);
        let fixed = vec![c(0.2, 1.0), c(-1.0, 0.4), c(0.0, 0.3), c(2.0, -0.5)];
        let rs: Vec<f64> = (0..100_000)
            .map(|i| correlation(&sample_channel(4, 1.0, &mut fam.stream(i)), &fixed).unwrap())
            .collect();
        assert!(ks(rs, |r| corr_cdf(4, r)) < 0.01);
    }

    #[test]
    fn sampled_gain_cdf_matches_gamma_cdf() {
        for m in [2u32, 4, 6] {
            let fam = StreamFamily::new(100 + m as u64);
            let g: Vec<f64> = (0..100_000)
                .map(|i| linalg::norm_sqr(&sample_channel(m as usize, 3.0, &mut fam.stream(i))) / 3.0)
                .collect();
            assert!(ks(g, |x| gamma_cdf(m, x)) < 0.01, "M = {m}");
        }
    }

    use proptest::prelude::*;

    fn cvec(m: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| c(a, b)), m)
    }

    proptest! {
        #[test]
        fn correlation_ignores_complex_scaling(
            h in cvec(4), g in cvec(4),
            s1 in (0.1..10.0f64, -3.0..3.0f64), s2 in (0.1..10.0f64, -3.0..3.0f64)
        ) {
            prop_assume!(linalg::norm_sqr(&h) > 1e-3 && linalg::norm_sqr(&g) > 1e-3);
            let r = correlation(&h, &g).unwrap();
            let hs = linalg::scale(&h, Complex64::from_polar(s1.0, s1.1));
            let gs = linalg::scale(&g, Complex64::from_polar(s2.0, s2.1));
            let rs = correlation(&hs, &gs).unwrap();
            prop_assert!((r - rs).abs() <= 1e-12 * r.max(1e-300) + 1e-15);
            prop_assert!((0.0..=1.0).contains(&r));
        }

        #[test]
        fn sinrs_scale_with_power_and_noise(
            hd in cvec(3), hu in cvec(3), wd in cvec(3), wu in cvec(3), k in 0.01..100.0f64
        ) {
            let ch = ChannelPair::new(hd, hu).unwrap();
            let bf = Beamformer::new(wd.clone(), wu.clone(), 1e3).unwrap();
            let s = downlink_sinrs(&ch, &bf, 0.3);
            let root = Complex64::new(k.sqrt(), 0.0);
            let bf2 = Beamformer::new(linalg::scale(&wd, root), linalg::scale(&wu, root), 1e3 * k).unwrap();
            let s2 = downlink_sinrs(&ch, &bf2, 0.3 * k);
            prop_assert!((s.cu - s2.cu).abs() <= 1e-12 * s.cu.abs().max(1e-300));
            prop_assert!((s.cd - s2.cd).abs() <= 1e-12 * s.cd.abs().max(1e-300));
        }
    }
}
