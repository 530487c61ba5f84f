//! Roof functions with a logarithmic singularity at the origin.
//!
//! `r(x) = -log_coeff * ln|x| + r1(x)` with a bounded smooth part `r1`.
//! For the flow-derived roof the coefficient is `1/lambda_u` (the passage
//! time through the origin's neighbourhood) and `r1` models the bounded
//! flight back to the section, for which no formula is available; the
//! default is the constant 1.

use crate::error::{Error, Result};
use crate::flow::OriginSpectrum;

/// Bounded smooth summand of a roof function.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum SmoothPart {
    Constant(f64),
    /// `base + amplitude * cos(pi x)`.
    Cosine { base: f64, amplitude: f64 },
}

impl SmoothPart {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SmoothPart::Constant(c) => c,
            SmoothPart::Cosine { base, amplitude } => {
                base + amplitude * (std::f64::consts::PI * x).cos()
            }
        }
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            SmoothPart::Constant(c) => c * (b - a),
            SmoothPart::Cosine { base, amplitude } => {
                let pi = std::f64::consts::PI;
                base * (b - a) + amplitude * ((pi * b).sin() - (pi * a).sin()) / pi
            }
        }
    }

    pub fn min_value(&self) -> f64 {
        match *self {
            SmoothPart::Constant(c) => c,
            SmoothPart::Cosine { base, amplitude } => base - amplitude.abs(),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            SmoothPart::Constant(_) => 0.0,
            SmoothPart::Cosine { amplitude, .. } => std::f64::consts::PI * amplitude.abs(),
        }
    }
}

/// `r(x) = -log_coeff ln|x| + r1(x)` on `[-1,1] \ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RoofFunction {
    log_coeff: f64,
    smooth: SmoothPart,
    /// Constant for the log-modulus estimate
    /// `|r(x) - r(y)| <= C |ln|x| - ln|y||` on each side of 0.
    log_modulus: f64,
}

impl RoofFunction {
    pub fn new(log_coeff: f64, smooth: SmoothPart) -> Result<Self> {
        if !(log_coeff >= 0.0) || !log_coeff.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "log coefficient must be finite and nonnegative, got {log_coeff}"
            )));
        }
        if smooth.min_value() < 0.0 {
            return Err(Error::InvalidParameter(
                "smooth part must be nonnegative so the roof stays positive".into(),
            ));
        }
        if log_coeff == 0.0 && smooth.min_value() <= 0.0 {
            return Err(Error::InvalidParameter(
                "roof would vanish: need a log part or a positive smooth part".into(),
            ));
        }
        // |r1(x)-r1(y)| <= L |x-y| <= L max(|x|,|y|) |ln|x|-ln|y|| and
        // max |x| <= 1 on the domain.
        let log_modulus = log_coeff + smooth.lipschitz();
        Ok(Self {
            log_coeff,
            smooth,
            log_modulus,
        })
    }

    /// `-ln|x| + 1`: the unit-normalised model roof.
    pub fn standard() -> Self {
        Self::new(1.0, SmoothPart::Constant(1.0)).unwrap()
    }

    /// `-ln|x|` alone, handy for closed-form oracles.
    pub fn pure_log() -> Self {
        Self::new(1.0, SmoothPart::Constant(0.0)).unwrap()
    }

    /// Constant roof of height `c` (suspensions over it are never weak
    /// mixing; used as the degenerate control case).
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "constant roof must be positive, got {c}"
            )));
        }
        Self::new(0.0, SmoothPart::Constant(c))
    }

    /// Roof with the flow-derived coefficient `1/lambda_u` and `r1 = 1`.
    pub fn from_spectrum(spec: &OriginSpectrum) -> Self {
        Self::new(1.0 / spec.lambda_u, SmoothPart::Constant(1.0)).unwrap()
    }

    pub fn log_coeff(&self) -> f64 {
        self.log_coeff
    }

    pub fn smooth_part(&self) -> &SmoothPart {
        &self.smooth
    }

    pub fn log_modulus(&self) -> f64 {
        self.log_modulus
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::SingularPoint(x));
        }
        if !(x.abs() <= 1.0) {
            return Err(Error::Domain(format!("|{x}| > 1")));
        }
        Ok(-self.log_coeff * x.abs().ln() + self.smooth.eval(x))
    }

    /// Exact integral of the roof over a bin `[a, b]` lying on one side of
    /// the origin (`0 <= a < b` or `a < b <= 0`). The log part uses the
    /// closed form of `-x ln x + x`, so bins touching the singularity are
    /// handled analytically.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if a >= b {
            return Err(Error::InvalidParameter(format!("empty bin [{a}, {b}]")));
        }
        if a < 0.0 && b > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bin [{a}, {b}] straddles the singularity; split it first"
            )));
        }
        // Work with moduli: the log part is even.
        let (lo, hi) = if b <= 0.0 { (-b, -a) } else { (a, b) };
        let anti = |x: f64| if x == 0.0 { 0.0 } else { x - x * x.ln() };
        let log_part = self.log_coeff * (anti(hi) - anti(lo));
        Ok(log_part + self.smooth.integral(a, b))
    }

    /// Largest sampled quotient `|r(x) - r(y)| / |ln|x| - ln|y||` over
    /// same-sign pairs, together with the stored constant it must not
    /// exceed.
    pub fn log_modulus_defect(&self, pairs: usize, seed: u64) -> (f64, f64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut done = 0;
        while done < pairs {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            // Log-uniform moduli so near-singular pairs are exercised.
            let x = sign * (-30.0 * rng.gen::<f64>()).exp2();
            let y = sign * (-30.0 * rng.gen::<f64>()).exp2();
            let denom = (x.abs().ln() - y.abs().ln()).abs();
            if denom < 1e-12 {
                continue;
            }
            let num = (self.eval(x).unwrap() - self.eval(y).unwrap()).abs();
            worst = worst.max(num / denom);
            done += 1;
        }
        (worst, self.log_modulus)
    }
}
