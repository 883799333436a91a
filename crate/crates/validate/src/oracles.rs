//! Reference computations that share no code path with the library routines
//! they check.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

/// Variance recursion run until the iterate stops moving in floating point,
/// with the two distortions written out explicitly:
/// `D_up = V/S`, `D_dn = (|a|²/|b|²)(V − D_up)/Γ`,
/// `V' = |a|² D_up + |b|² D_dn + σ_w²`.
///
/// Returns `None` if the iterate has not settled after `max_steps`.
pub fn iterated_variance(a2: f64, b2: f64, sigma_w2: f64, s: f64, g: f64, max_steps: usize) -> Option<f64> {
    let mut v = 0.0;
    for _ in 0..max_steps {
        let d_up = v / s;
        let d_dn = a2 / b2 * (v - d_up) / g;
        let next = a2 * d_up + b2 * d_dn + sigma_w2;
        if !next.is_finite() {
            return None;
        }
        if (next - v).abs() <= 2.0 * f64::EPSILON * next {
            return Some(next);
        }
        v = next;
    }
    None
}

/// `V_1 … V_n` of the same recursion from `V_0 = 0`.
pub fn variance_path(a2: f64, b2: f64, sigma_w2: f64, s: f64, g: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut v = 0.0;
    for _ in 0..n {
        let d_up = v / s;
        v = a2 * d_up + b2 * (a2 / b2 * (v - d_up) / g) + sigma_w2;
        out.push(v);
    }
    out
}

/// Downlink quality at which the variance map has unit slope, solved from
/// `|a|²(1/S + 1/Γ − 1/(SΓ)) = 1`.
pub fn stability_boundary(a2: f64, s: f64) -> f64 {
    (a2 - a2 / s) / (1.0 - a2 / s)
}

/// `P(G ≤ x)` for `G ~ Gamma(m, 1)` by composite Simpson quadrature of the
/// density on `n` (even) panels.
pub fn gamma_cdf_simpson(m: u32, x: f64, n: usize) -> f64 {
    let ln_norm: f64 = (1..m).map(|k| (k as f64).ln()).sum();
    let pdf = |t: f64| {
        if t <= 0.0 {
            if m == 1 {
                1.0
            } else {
                0.0
            }
        } else {
            ((m as f64 - 1.0) * t.ln() - t - ln_norm).exp()
        }
    };
    let n = n + n % 2;
    let h = x / n as f64;
    let mut acc = pdf(0.0) + pdf(x);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(i as f64 * h);
    }
    acc * h / 3.0
}

fn inner(h: &[Complex64], u: &[Complex64]) -> Complex64 {
    h.iter().zip(u).map(|(a, b)| a.conj() * b).sum()
}

fn norm(h: &[Complex64]) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit beams in `span{h_t, h_i}` parameterized by one angle:
/// `u(θ) = cos θ ê_t − sin θ e^{jα} ê_⊥`, where `ê_⊥` is the unit component
/// of `h_i` orthogonal to `h_t` and `α` aligns the two leakage terms so that
/// they cancel. Any other phase gives the same gain on `h_t` with at least as
/// much leakage onto `h_i`, so the family holds every undominated beam.
#[derive(Debug, Clone)]
pub struct BeamFamily {
    e_t: Vec<Complex64>,
    e_p: Option<Vec<Complex64>>,
}

impl BeamFamily {
    pub fn new(h_t: &[Complex64], h_i: &[Complex64]) -> Self {
        let nt = norm(h_t);
        let e_t: Vec<Complex64> = h_t.iter().map(|z| z / nt).collect();
        let c = inner(&e_t, h_i);
        let perp: Vec<Complex64> = h_i.iter().zip(&e_t).map(|(hi, et)| hi - et * c).collect();
        let np = norm(&perp);
        if np <= 1e-12 * norm(h_i).max(f64::MIN_POSITIVE) {
            return Self { e_t, e_p: None };
        }
        let mut e_p: Vec<Complex64> = perp.iter().map(|z| z / np).collect();
        let along = inner(h_i, &e_t);
        let across = inner(h_i, &e_p);
        if across.norm() > 0.0 && along.norm() > 0.0 {
            let phase = (along / along.norm()) / (across / across.norm());
            e_p.iter_mut().for_each(|z| *z *= phase);
        }
        Self { e_t, e_p: Some(e_p) }
    }

    pub fn beam(&self, theta: f64) -> Vec<Complex64> {
        match &self.e_p {
            Some(e_p) => self.e_t.iter().zip(e_p).map(|(a, b)| a * theta.cos() - b * theta.sin()).collect(),
            None => self.e_t.clone(),
        }
    }

    /// `(|h_t^H u|², |h_i^H u|²)` at angle `θ`.
    pub fn gains(&self, theta: f64, h_t: &[Complex64], h_i: &[Complex64]) -> (f64, f64) {
        let u = self.beam(theta);
        (inner(h_t, &u).norm_sqr(), inner(h_i, &u).norm_sqr())
    }
}

/// Result of the exhaustive beam search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForce {
    pub gamma_u: f64,
    pub theta_d: f64,
    pub theta_u: f64,
    pub evaluations: usize,
}

/// Grid search over both beam angles followed by repeated local refinement.
///
/// For a fixed beam pair the smallest power that meets `Γ_D = γ_D` goes to
/// the CD and the rest to the CU. Pairs that cannot meet the target within
/// `p_total` are skipped. `None` means no grid pair was feasible.
pub fn brute_force_gamma_u(
    h_d: &[Complex64],
    h_u: &[Complex64],
    p_total: f64,
    sigma2: f64,
    gamma_d: f64,
    grid: usize,
    zoom_levels: usize,
) -> Option<BruteForce> {
    let fam_d = BeamFamily::new(h_d, h_u);
    let fam_u = BeamFamily::new(h_u, h_d);
    let objective = |d: (f64, f64), u: (f64, f64)| -> Option<f64> {
        let (a_dd, a_ud) = d;
        let (a_uu, a_du) = u;
        let den = a_dd + gamma_d * a_du;
        if !(den > 0.0) {
            return None;
        }
        let p_d = gamma_d * (p_total * a_du + sigma2) / den;
        if p_d > p_total {
            return None;
        }
        Some((p_total - p_d) * a_uu / (p_d * a_ud + sigma2))
    };

    let mut evaluations = 0;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut search = |thetas_d: &[f64], thetas_u: &[f64], best: &mut Option<(f64, f64, f64)>| {
        let gd: Vec<_> = thetas_d.iter().map(|&t| fam_d.gains(t, h_d, h_u)).collect();
        let gu: Vec<_> = thetas_u.iter().map(|&t| fam_u.gains(t, h_u, h_d)).collect();
        for (i, &d) in gd.iter().enumerate() {
            for (j, &u) in gu.iter().enumerate() {
                evaluations += 1;
                if let Some(v) = objective(d, u) {
                    if best.is_none_or(|b| v > b.0) {
                        *best = Some((v, thetas_d[i], thetas_u[j]));
                    }
                }
            }
        }
    };

    let nodes: Vec<f64> = (0..grid).map(|i| FRAC_PI_2 * i as f64 / (grid - 1) as f64).collect();
    search(&nodes, &nodes, &mut best);
    let mut h = FRAC_PI_2 / (grid - 1) as f64;
    for _ in 0..zoom_levels {
        let (_, td, tu) = best?;
        let around = |c: f64| -> Vec<f64> {
            (0..=10).map(|k| (c - h + 0.2 * h * k as f64).clamp(0.0, FRAC_PI_2)).collect()
        };
        search(&around(td), &around(tu), &mut best);
        h *= 0.2;
    }
    best.map(|(gamma_u, theta_d, theta_u)| BruteForce { gamma_u, theta_d, theta_u, evaluations })
}
