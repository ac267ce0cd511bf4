//! Spectral multipliers `F` and joint multipliers `H(λ⃗, η)`.

mod discrete;
mod joint;
mod norms;

pub use discrete::*;
pub use joint::*;
pub use norms::*;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1, C^∞, built from `e^{−1/x}`.
pub fn smooth_step(x: f64) -> f64 {
    let f = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let (a, b) = (f(x), f(1.0 - x));
        a / (a + b)
    }
}

/// Multiplier families. JSON form: `{"family": "<name>", <params>, "support": [lo, hi]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `e^{−(λ−center)²/width}` times a smooth window that equals 1 on
    /// the window shrunk by 1/16 of its length at each end.
    GaussianBump { center: f64, width: f64, window: [f64; 2] },
    /// `((λ−a)(b−λ))₊^p`, normalized to maximum 1.
    PolyBump { p: f64, a: f64, b: f64 },
    /// `e^{−Tλ}` on `[0, Λ]`, smoothly cut off on `[Λ − Λ/16, Λ]`. Differs
    /// from the heat multiplier on the positive half-line by at most
    /// `e^{−T(Λ − Λ/16)}`.
    Heat { t: f64, cutoff: f64 },
    /// Natural cubic spline through `(x_i, y_i)`, zero outside `[x_0, x_n]`.
    Table { x: Vec<f64>, y: Vec<f64> },
    /// `e^{iωλ} · base(λ)`.
    Oscillating { omega: f64, base: Box<Family> },
    /// `base(c·λ)`, c > 0.
    Dilated { c: f64, base: Box<Family> },
    /// The zero multiplier.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Smooth,
    /// In `W_2^s` for every `s` below the given order.
    SobolevBelow(f64),
}

/// A compactly supported spectral multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    #[serde(flatten)]
    pub family: Family,
    pub support: [f64; 2],
    #[serde(default = "default_smoothness", skip_serializing)]
    pub smoothness: Smoothness,
}

fn default_smoothness() -> Smoothness {
    Smoothness::Smooth
}

impl Family {
    fn natural_support(&self) -> [f64; 2] {
        match self {
            Family::GaussianBump { window, .. } => *window,
            Family::PolyBump { a, b, .. } => [*a, *b],
            Family::Heat { cutoff, .. } => [0.0, *cutoff],
            Family::Table { x, .. } => [x[0], *x.last().unwrap()],
            Family::Oscillating { base, .. } => base.natural_support(),
            Family::Dilated { c, base } => {
                let [lo, hi] = base.natural_support();
                [lo / c, hi / c]
            }
            Family::Zero => [0.0, 0.0],
        }
    }

    fn smoothness(&self) -> Smoothness {
        match self {
            Family::Heat { .. } => Smoothness::SobolevBelow(0.5),
            Family::Table { .. } => Smoothness::SobolevBelow(2.5),
            Family::PolyBump { p, .. } => Smoothness::SobolevBelow(p + 0.5),
            Family::Oscillating { base, .. } | Family::Dilated { base, .. } => base.smoothness(),
            _ => Smoothness::Smooth,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Family::GaussianBump { width, window, .. } => {
                if *width <= 0.0 || window[1] <= window[0] || window[0] < 0.0 {
                    return Err(Error::invalid("gaussian_bump needs width > 0 and 0 <= lo < hi"));
                }
            }
            Family::PolyBump { p, a, b } => {
                if *p <= 0.0 || b <= a || *a < 0.0 {
                    return Err(Error::invalid("poly_bump needs p > 0 and 0 <= a < b"));
                }
            }
            Family::Heat { t, cutoff } => {
                if *t <= 0.0 || *cutoff <= 0.0 {
                    return Err(Error::invalid("heat needs T > 0 and a positive cutoff"));
                }
            }
            Family::Table { x, y } => {
                if x.len() < 2 || x.len() != y.len() || x.windows(2).any(|w| w[1] <= w[0]) || x[0] < 0.0 {
                    return Err(Error::invalid("table needs >= 2 increasing nonnegative nodes and matching values"));
                }
            }
            Family::Oscillating { base, .. } => base.validate()?,
            Family::Dilated { c, base } => {
                if *c <= 0.0 {
                    return Err(Error::invalid("dilation factor must be positive"));
                }
                base.validate()?
            }
            Family::Zero => {}
        }
        Ok(())
    }

    pub fn eval(&self, lam: f64) -> Complex64 {
        match self {
            Family::GaussianBump { center, width, window } => {
                let d = lam - center;
                Complex64::new((-d * d / width).exp() * window_fn(lam, window[0], window[1]), 0.0)
            }
            Family::PolyBump { p, a, b } => {
                let v = (lam - a) * (b - lam);
                if v <= 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let half = 0.5 * (b - a);
                    Complex64::new((v / (half * half)).powf(*p), 0.0)
                }
            }
            Family::Heat { t, cutoff } => {
                if lam < 0.0 || lam > *cutoff {
                    Complex64::new(0.0, 0.0)
                } else {
                    let d = cutoff / 16.0;
                    Complex64::new((-t * lam).exp() * smooth_step((cutoff - lam) / d), 0.0)
                }
            }
            Family::Table { x, y } => Complex64::new(spline_eval(x, y, lam), 0.0),
            Family::Oscillating { omega, base } => base.eval(lam) * Complex64::from_polar(1.0, omega * lam),
            Family::Dilated { c, base } => base.eval(c * lam),
            Family::Zero => Complex64::new(0.0, 0.0),
        }
    }
}

/// 1 on `[lo + δ, hi − δ]`, 0 outside `[lo, hi]`, smooth, δ = (hi − lo)/16.
pub fn window_fn(lam: f64, lo: f64, hi: f64) -> f64 {
    let d = (hi - lo) / 16.0;
    smooth_step((lam - lo) / d) * smooth_step((hi - lam) / d)
}

impl Multiplier {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Multiplier {
            support: family.natural_support(),
            smoothness: family.smoothness(),
            family,
        })
    }

    pub fn gaussian_bump(center: f64, width: f64, window: [f64; 2]) -> Result<Self> {
        Self::new(Family::GaussianBump { center, width, window })
    }

    pub fn poly_bump(p: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(Family::PolyBump { p, a, b })
    }

    pub fn heat(t: f64, cutoff: f64) -> Result<Self> {
        Self::new(Family::Heat { t, cutoff })
    }

    pub fn table(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(Family::Table { x, y })
    }

    pub fn zero() -> Self {
        Self::new(Family::Zero).unwrap()
    }

    pub fn oscillating(self, omega: f64) -> Result<Self> {
        Self::new(Family::Oscillating {
            omega,
            base: Box::new(self.family),
        })
    }

    /// `F(c·)`.
    pub fn dilated(self, c: f64) -> Result<Self> {
        Self::new(Family::Dilated {
            c,
            base: Box::new(self.family),
        })
    }

    /// Parses the JSON form; a `support` given in the file must contain the
    /// family's own support.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(flatten)]
            family: Family,
            support: Option<[f64; 2]>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        let m = Self::new(raw.family)?;
        if let Some([lo, hi]) = raw.support {
            if lo < 0.0 || lo > m.support[0] + 1e-12 || hi < m.support[1] - 1e-12 {
                return Err(Error::invalid(format!(
                    "declared support [{lo}, {hi}] does not contain the family support {:?}",
                    m.support
                )));
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("multiplier serializes")
    }

    pub fn eval(&self, lam: f64) -> Complex64 {
        if lam < self.support[0] || lam > self.support[1] {
            return Complex64::new(0.0, 0.0);
        }
        self.family.eval(lam)
    }

    pub fn k_lo(&self) -> f64 {
        self.support[0]
    }

    pub fn k_hi(&self) -> f64 {
        self.support[1]
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, Family::Zero)
    }

    /// Short name for reports.
    pub fn tag(&self) -> String {
        fn name(f: &Family) -> String {
            match f {
                Family::GaussianBump { center, width, .. } => format!("gaussian_bump(c={center},w={width})"),
                Family::PolyBump { p, a, b } => format!("poly_bump(p={p},[{a},{b}])"),
                Family::Heat { t, cutoff } => format!("heat(T={t},cut={cutoff})"),
                Family::Table { x, .. } => format!("table({} nodes)", x.len()),
                Family::Oscillating { omega, base } => format!("exp(i{omega}l)*{}", name(base)),
                Family::Dilated { c, base } => format!("{}({c}l)", name(base)),
                Family::Zero => "zero".into(),
            }
        }
        name(&self.family)
    }
}

fn spline_eval(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t < x[0] || t > x[n - 1] {
        return 0.0;
    }
    let m = natural_spline_moments(x, y);
    let i = match x.partition_point(|&v| v <= t) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let h = x[i + 1] - x[i];
    let (a, b) = ((x[i + 1] - t) / h, (t - x[i]) / h);
    a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
}

// Second derivatives of the natural cubic spline (tridiagonal solve).
fn natural_spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let cc = h1 / 6.0;
        let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c[i - 1];
        c[i] = cc / denom;
        d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}

#[cfg(test)]
mod tests;
