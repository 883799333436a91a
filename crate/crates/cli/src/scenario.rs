//! Scenario files.
//!
//! A scenario is a TOML document with one table per concern. Every key is
//! optional; missing keys take the reference-scenario value and unknown keys
//! are rejected. Powers and gains given in dB/dBm are converted to linear
//! units once, in [`Scenario::resolve`].
//!
//! ```toml
//! [system]
//! antennas = 6
//! p_dn_dbm = -25.0
//!
//! [channel]
//! source = "synthetic"
//! rho = 0.0
//!
//! [run]
//! seed = 7
//! ```

use std::path::Path;

use jdcc_core::channel::{db_to_linear, dbm_to_watts, ChannelPair, SystemConfig};
use jdcc_core::control::Plant;
use jdcc_core::rng::StreamFamily;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub antennas: usize,
    pub p_dn_dbm: f64,
    pub p_up_dbm: f64,
    pub b_dn_hz: f64,
    pub b_up_hz: f64,
    pub t_s: f64,
    pub n0_dbm_per_hz: f64,
    pub payload_bits: f64,
    pub d_u_m: f64,
    pub d_d_m: f64,
    pub c0_db: f64,
    pub path_loss_exponent: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            antennas: 4,
            p_dn_dbm: -30.0,
            p_up_dbm: -30.0,
            b_dn_hz: 20e3,
            b_up_hz: 10e3,
            t_s: 0.1e-3,
            n0_dbm_per_hz: -174.0,
            payload_bits: 1000.0,
            d_u_m: 100.0,
            d_d_m: 120.0,
            c0_db: -30.0,
            path_loss_exponent: 3.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    /// `[re, im]`
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub sigma_w2: f64,
}

impl Default for PlantSection {
    fn default() -> Self {
        Self { a: [1.2, 1.2], b: [1.0, 0.0], sigma_w2: 1e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSource {
    /// Canonical vectors with the given normalized gains and correlation.
    Synthetic,
    /// One Rayleigh draw from the run seed.
    Random,
    /// Components listed in `h_d` / `h_u`.
    Explicit,
}

/// Channel for the single-realization experiments. Gains and vector
/// components are normalized by the large-scale gain of each user, so
/// `g_d = 4` means `‖h_D‖² = 4 β_D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub source: ChannelSource,
    pub rho: f64,
    pub g_d: f64,
    pub g_u: f64,
    /// `[[re, im], …]`, one entry per antenna, in units of `√β_D`.
    pub h_d: Vec<[f64; 2]>,
    /// Same for the CU, in units of `√β_U`.
    pub h_u: Vec<[f64; 2]>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { source: ChannelSource::Synthetic, rho: 0.5, g_d: 4.0, g_u: 4.0, h_d: Vec::new(), h_u: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Monte Carlo trials per estimate.
    pub trials: u64,
    /// Points per axis of the swept experiments.
    pub grid: usize,
    pub out: String,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 42, trials: 100_000, grid: 50, out: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub snr_up_db: f64,
    pub sinr_dn_db: f64,
    pub v0: f64,
    pub steps: usize,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self { snr_up_db: 10.0, sinr_dn_db: 10.0, v0: 1.0, steps: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityMapSection {
    /// `[lo, hi]` in dB.
    pub snr_up_db: [f64; 2],
    pub sinr_dn_db: [f64; 2],
}

impl Default for StabilityMapSection {
    fn default() -> Self {
        Self { snr_up_db: [-5.0, 30.0], sinr_dn_db: [-5.0, 30.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsSection {
    /// Quality held fixed while the other one is swept.
    pub fixed_quality: f64,
    /// Largest swept quality.
    pub max_quality: f64,
}

impl Default for AsymptoticsSection {
    fn default() -> Self {
        Self { fixed_quality: 10.0, max_quality: 1e6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossoverSection {
    pub gamma_d: f64,
    /// `[lo, hi]` downlink power in dBm.
    pub p_dn_dbm: [f64; 2],
}

impl Default for CrossoverSection {
    fn default() -> Self {
        Self { gamma_d: 3.0, p_dn_dbm: [-45.0, -15.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutageSection {
    pub tau_req_s: f64,
    /// `V_req` as a multiple of `σ_w²`.
    pub v_req_factor: f64,
    pub antennas: Vec<usize>,
    pub p_dn_dbm: Vec<f64>,
    /// `[lo, hi]` of the joint-outage delay axis (s).
    pub joint_tau_s: [f64; 2],
    /// `[lo, hi]` of the joint-outage variance axis, in units of `σ_w²`.
    pub joint_v_factor: [f64; 2],
    /// Points per joint-outage axis.
    pub joint_points: usize,
}

impl Default for OutageSection {
    fn default() -> Self {
        Self {
            tau_req_s: 10e-3,
            v_req_factor: 3.0,
            antennas: vec![4, 6],
            p_dn_dbm: vec![-40.0, -35.0, -30.0, -25.0, -20.0],
            joint_tau_s: [5e-3, 50e-3],
            joint_v_factor: [1.5, 10.0],
            joint_points: 6,
        }
    }
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: SystemSection,
    pub plant: PlantSection,
    pub channel: ChannelSection,
    pub run: RunSection,
    pub trajectory: TrajectorySection,
    pub stability_map: StabilityMapSection,
    pub asymptotics: AsymptoticsSection,
    pub crossover: CrossoverSection,
    pub outage: OutageSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub grid: Option<usize>,
    pub out: Option<String>,
}

/// Validated scenario with linear-unit system parameters.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub system: SystemConfig,
    /// SHA-256 of the canonical TOML form of `file`.
    pub hash: String,
}

fn invalid(field: &str, constraint: &str, got: impl std::fmt::Debug) -> CliError {
    CliError::input(format!("{field}: {constraint} (got {got:?})"))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be finite and > 0", v))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be finite", v))
    }
}

fn range(field: &str, r: [f64; 2]) -> Result<()> {
    if r.iter().all(|v| v.is_finite()) && r[0] < r[1] {
        Ok(())
    } else {
        Err(invalid(field, "must be [lo, hi] with finite lo < hi", r))
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::input(format!("scenario parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        if let Some(trials) = o.trials {
            self.run.trials = trials;
        }
        if let Some(grid) = o.grid {
            self.run.grid = grid;
        }
        if let Some(out) = &o.out {
            self.run.out = out.clone();
        }
    }

    /// Checks every constraint the experiments rely on, naming the first
    /// offending field.
    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if s.antennas < 2 {
            return Err(invalid("system.antennas", "must be at least 2", s.antennas));
        }
        for (f, v) in [("system.p_dn_dbm", s.p_dn_dbm), ("system.p_up_dbm", s.p_up_dbm)] {
            finite(f, v)?;
        }
        finite("system.n0_dbm_per_hz", s.n0_dbm_per_hz)?;
        finite("system.c0_db", s.c0_db)?;
        for (f, v) in [
            ("system.b_dn_hz", s.b_dn_hz),
            ("system.b_up_hz", s.b_up_hz),
            ("system.t_s", s.t_s),
            ("system.payload_bits", s.payload_bits),
            ("system.d_u_m", s.d_u_m),
            ("system.d_d_m", s.d_d_m),
            ("system.path_loss_exponent", s.path_loss_exponent),
        ] {
            positive(f, v)?;
        }

        let p = &self.plant;
        let a2 = p.a[0] * p.a[0] + p.a[1] * p.a[1];
        if !(a2 > 1.0) || !a2.is_finite() {
            return Err(invalid("plant.a", "must satisfy |a| > 1", p.a));
        }
        let b2 = p.b[0] * p.b[0] + p.b[1] * p.b[1];
        if !(b2 > 0.0) || !b2.is_finite() {
            return Err(invalid("plant.b", "must be nonzero", p.b));
        }
        positive("plant.sigma_w2", p.sigma_w2)?;

        let c = &self.channel;
        if !(0.0..=1.0).contains(&c.rho) {
            return Err(invalid("channel.rho", "must lie in [0, 1]", c.rho));
        }
        positive("channel.g_d", c.g_d)?;
        positive("channel.g_u", c.g_u)?;
        if c.source == ChannelSource::Explicit {
            for (f, h) in [("channel.h_d", &c.h_d), ("channel.h_u", &c.h_u)] {
                if h.len() != s.antennas {
                    return Err(invalid(f, "needs one [re, im] entry per antenna", h.len()));
                }
                if h.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid(f, "components must be finite", h));
                }
                if h.iter().all(|z| z[0] == 0.0 && z[1] == 0.0) {
                    return Err(invalid(f, "must not be the zero vector", h));
                }
            }
        } else if !c.h_d.is_empty() || !c.h_u.is_empty() {
            return Err(invalid("channel.source", "must be \"explicit\" when h_d/h_u are given", c.source));
        }

        let r = &self.run;
        if r.trials == 0 {
            return Err(invalid("run.trials", "must be at least 1", r.trials));
        }
        if r.grid < 2 {
            return Err(invalid("run.grid", "must be at least 2", r.grid));
        }
        if r.out.is_empty() {
            return Err(invalid("run.out", "must be a directory path", &r.out));
        }

        let t = &self.trajectory;
        finite("trajectory.snr_up_db", t.snr_up_db)?;
        finite("trajectory.sinr_dn_db", t.sinr_dn_db)?;
        if !(t.v0 >= 0.0 && t.v0.is_finite()) {
            return Err(invalid("trajectory.v0", "must be finite and >= 0", t.v0));
        }
        if t.steps == 0 {
            return Err(invalid("trajectory.steps", "must be at least 1", t.steps));
        }

        range("stability_map.snr_up_db", self.stability_map.snr_up_db)?;
        range("stability_map.sinr_dn_db", self.stability_map.sinr_dn_db)?;

        let a = &self.asymptotics;
        if !(a.fixed_quality > a2) || !a.fixed_quality.is_finite() {
            return Err(invalid("asymptotics.fixed_quality", "must be finite and exceed |a|^2", a.fixed_quality));
        }
        if !(a.max_quality > 1.0) || !a.max_quality.is_finite() {
            return Err(invalid("asymptotics.max_quality", "must be finite and > 1", a.max_quality));
        }

        positive("crossover.gamma_d", self.crossover.gamma_d)?;
        range("crossover.p_dn_dbm", self.crossover.p_dn_dbm)?;

        let o = &self.outage;
        positive("outage.tau_req_s", o.tau_req_s)?;
        if !(o.v_req_factor > 1.0) || !o.v_req_factor.is_finite() {
            return Err(invalid("outage.v_req_factor", "must be finite and > 1", o.v_req_factor));
        }
        if o.antennas.is_empty() || o.antennas.iter().any(|&m| m < 2) {
            return Err(invalid("outage.antennas", "must be a non-empty list of values >= 2", &o.antennas));
        }
        if o.p_dn_dbm.is_empty() || o.p_dn_dbm.iter().any(|v| !v.is_finite()) {
            return Err(invalid("outage.p_dn_dbm", "must be a non-empty list of finite values", &o.p_dn_dbm));
        }
        range("outage.joint_tau_s", o.joint_tau_s)?;
        if !(o.joint_tau_s[0] > 0.0) {
            return Err(invalid("outage.joint_tau_s", "must be positive", o.joint_tau_s));
        }
        range("outage.joint_v_factor", o.joint_v_factor)?;
        if !(o.joint_v_factor[0] > 1.0) {
            return Err(invalid("outage.joint_v_factor", "must lie above 1", o.joint_v_factor));
        }
        if o.joint_points < 2 {
            return Err(invalid("outage.joint_points", "must be at least 2", o.joint_points));
        }
        Ok(())
    }

    fn system_config(&self) -> SystemConfig {
        let s = &self.system;
        let p = &self.plant;
        SystemConfig {
            antennas: s.antennas,
            p_dn: dbm_to_watts(s.p_dn_dbm),
            p_up: dbm_to_watts(s.p_up_dbm),
            b_dn: s.b_dn_hz,
            b_up: s.b_up_hz,
            t_s: s.t_s,
            n0: dbm_to_watts(s.n0_dbm_per_hz),
            payload_bits: s.payload_bits,
            d_u: s.d_u_m,
            d_d: s.d_d_m,
            c0: db_to_linear(s.c0_db),
            path_loss_exponent: s.path_loss_exponent,
            plant: Plant {
                a: Complex64::new(p.a[0], p.a[1]),
                b: Complex64::new(p.b[0], p.b[1]),
                sigma_w2: p.sigma_w2,
            },
        }
    }

    /// Canonical TOML text; two files that parse to the same values give the
    /// same text.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// Stream-family tag reserved for drawing the random channel.
const CHANNEL_TAG: u64 = 0xC4A7;

impl Scenario {
    /// Applies overrides, validates, and converts to linear units.
    pub fn resolve(mut file: ScenarioFile, overrides: &Overrides) -> Result<Self> {
        file.apply(overrides);
        file.validate()?;
        let system = file.system_config();
        system.validate()?;
        // The output directory does not affect results, so it is left out of the hash.
        let hashed = ScenarioFile { run: RunSection { out: String::new(), ..file.run.clone() }, ..file.clone() };
        let hash = Sha256::digest(hashed.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self { file, system, hash })
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let file = match path {
            Some(p) => ScenarioFile::load(p)?,
            None => ScenarioFile::default(),
        };
        Self::resolve(file, overrides)
    }

    pub fn seed(&self) -> u64 {
        self.file.run.seed
    }

    pub fn trials(&self) -> u64 {
        self.file.run.trials
    }

    pub fn grid(&self) -> usize {
        self.file.run.grid
    }

    /// Channel for the single-realization experiments.
    pub fn channel(&self) -> Result<ChannelPair> {
        let c = &self.file.channel;
        let cfg = &self.system;
        let scaled = |h: &[[f64; 2]], beta: f64| -> Vec<Complex64> {
            h.iter().map(|z| Complex64::new(z[0], z[1]) * beta.sqrt()).collect()
        };
        Ok(match c.source {
            ChannelSource::Synthetic => {
                ChannelPair::synthetic(cfg.antennas, c.g_d * cfg.beta_d(), c.g_u * cfg.beta_u(), c.rho)?
            }
            ChannelSource::Random => {
                ChannelPair::sample(cfg, &mut StreamFamily::new(self.seed()).fork(CHANNEL_TAG).stream(0))
            }
            ChannelSource::Explicit => ChannelPair::new(scaled(&c.h_d, cfg.beta_d()), scaled(&c.h_u, cfg.beta_u()))?,
        })
    }

    /// Human-readable summary including derived quantities.
    pub fn echo(&self) -> String {
        let s = &self.file.system;
        let cfg = &self.system;
        let p = &self.file.plant;
        let mut lines = vec![
            format!("scenario {}", &self.hash[..16]),
            format!("  antennas            {}", s.antennas),
            format!("  p_dn                {} dBm", s.p_dn_dbm),
            format!("  p_up                {} dBm", s.p_up_dbm),
            format!("  b_dn, b_up          {} Hz, {} Hz", s.b_dn_hz, s.b_up_hz),
            format!("  t_s                 {} s", s.t_s),
            format!("  n0                  {} dBm/Hz", s.n0_dbm_per_hz),
            format!("  payload             {} bits", s.payload_bits),
            format!("  d_u, d_d            {} m, {} m", s.d_u_m, s.d_d_m),
            format!("  c0, exponent        {} dB, {}", s.c0_db, s.path_loss_exponent),
            format!("  plant a, b          {}{:+}i, {}{:+}i", p.a[0], p.a[1], p.b[0], p.b[1]),
            format!("  sigma_w2            {}", p.sigma_w2),
            format!("  channel             {:?}", self.file.channel.source).to_lowercase(),
            format!("  seed, trials, grid  {}, {}, {}", self.seed(), self.trials(), self.grid()),
            "derived".to_string(),
            format!("  alpha_up            {}", cfg.alpha_up()),
            format!("  alpha_dn            {}", cfg.alpha_dn()),
            format!("  |a|^2               {}", cfg.plant.a2()),
            format!("  beta_u, beta_d      {:e}, {:e}", cfg.beta_u(), cfg.beta_d()),
            format!("  sigma_dn^2          {:e} W", cfg.sigma_dn2()),
            format!("  mean-gain SNR_up    {}", cfg.gbar_up()),
            format!("  mean-gain SINR_d    {}", cfg.gbar_d()),
        ];
        lines.push(String::new());
        lines.join("\n")
    }
}
