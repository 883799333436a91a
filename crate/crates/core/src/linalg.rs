//! Small dense complex-vector kernels.
//!
//! Vectors are plain `[Complex64]` slices (interleaved re/im in memory). All
//! reductions use Neumaier compensated summation so that gains stay accurate
//! for arrays up to a few thousand antennas.

use num_complex::Complex64;

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a sequence of reals.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Hermitian inner product `x^H y`.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (a, b) in x.iter().zip(y) {
        let p = a.conj() * b;
        re.add(p.re);
        im.add(p.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Squared Euclidean norm `‖x‖²`.
pub fn norm_sqr(x: &[Complex64]) -> f64 {
    sum(x.iter().map(|z| z.norm_sqr()))
}

pub fn scale(x: &[Complex64], c: Complex64) -> Vec<Complex64> {
    x.iter().map(|z| z * c).collect()
}

/// `x - c·y`
pub fn sub_scaled(x: &[Complex64], c: Complex64, y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(a, b)| a - c * b).collect()
}

/// Returns `x / ‖x‖`, or `None` for the zero vector.
pub fn normalized(x: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = norm_sqr(x).sqrt();
    if n > 0.0 && n.is_finite() {
        Some(scale(x, Complex64::new(1.0 / n, 0.0)))
    } else {
        None
    }
}

/// Component of `x` orthogonal to `dir`: `(I - dir dir^H / ‖dir‖²) x`.
pub fn project_out(x: &[Complex64], dir: &[Complex64]) -> Vec<Complex64> {
    let d2 = norm_sqr(dir);
    if d2 == 0.0 {
        return x.to_vec();
    }
    let c = dot(dir, x) / d2;
    sub_scaled(x, c, dir)
}
