//! Passage through the linearised neighbourhood of the origin.
//!
//! In linearising coordinates the flow is
//! `(x1, x2, x3) -> (e^{lu t} x1, e^{lss t} x2, e^{ls t} x3)` on the cube
//! `[-1,1]^3`. The first-hit map from the top face `x3 = 1` to the side
//! faces `x1 = ±1` has the closed form
//! `(x1, x2, 1) -> (sgn x1, |x1|^b x2, |x1|^a)` with flight time
//! `-ln|x1| / lu`, where `a = |ls|/lu` in (0,1) and `b = |lss|/lu > 0`.

use crate::error::{Error, Result};
use crate::flow::OriginSpectrum;

/// The two power-law exponents of the passage map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageExponents {
    /// `|lambda_s| / lambda_u`, necessarily in (0,1) for expanding flows.
    pub alpha: f64,
    /// `|lambda_ss| / lambda_u`, positive.
    pub beta: f64,
}

/// Exponents derived from a saddle spectrum. Fails when the expansion
/// condition `lambda_u > |lambda_s|` does not hold (alpha >= 1).
pub fn passage_exponents(spec: &OriginSpectrum) -> Result<PassageExponents> {
    let alpha = spec.lambda_s.abs() / spec.lambda_u;
    let beta = spec.lambda_ss.abs() / spec.lambda_u;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ExpansionFailure(format!(
            "alpha = |lambda_s|/lambda_u = {alpha} is not in (0,1)"
        )));
    }
    if !(beta > 0.0) {
        return Err(Error::ExpansionFailure(format!("beta = {beta} must be positive")));
    }
    Ok(PassageExponents { alpha, beta })
}

/// Exit-face coordinates `(sgn x1, |x1|^beta x2, |x1|^alpha)` for an entry
/// point `(x1, x2, 1)` of the top face. `x1 = 0` is the stable manifold and
/// has no exit.
pub fn passage_map(x1: f64, x2: f64, e: &PassageExponents) -> Result<(f64, f64, f64)> {
    if x1 == 0.0 {
        return Err(Error::SingularPoint(x1));
    }
    if !(x1.abs() <= 1.0 && x2.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "entry point ({x1}, {x2}) outside the unit face"
        )));
    }
    let a = x1.abs();
    Ok((x1.signum(), a.powf(e.beta) * x2, a.powf(e.alpha)))
}

/// Time of flight `-ln|x1| / lambda_u` from the top face to a side face.
/// Diverges logarithmically as `x1 -> 0`.
pub fn passage_time(x1: f64, spec: &OriginSpectrum) -> Result<f64> {
    if x1 == 0.0 {
        return Err(Error::SingularPoint(x1));
    }
    if x1.abs() > 1.0 {
        return Err(Error::Domain(format!("|x1| = {} exceeds the cube", x1.abs())));
    }
    Ok(-x1.abs().ln() / spec.lambda_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{integrate, IntegratorConfig, LorenzParams};

    fn default_spectrum() -> OriginSpectrum {
        OriginSpectrum::for_params(&LorenzParams::default()).unwrap()
    }

    #[test]
    fn exponents_match_spectrum_oracle() {
        let e = passage_exponents(&default_spectrum()).unwrap();
        let lu = (-11.0 + 1201f64.sqrt()) / 2.0;
        assert!((e.alpha - (8.0 / 3.0) / lu).abs() < 1e-12);
        assert!((e.beta - ((11.0 + 1201f64.sqrt()) / 2.0) / lu).abs() < 1e-12);
        assert!((e.alpha - 0.2254).abs() < 1e-4);
        assert!((e.beta - 1.9300).abs() < 1e-4);
    }

    #[test]
    fn exponents_from_ratio_definition() {
        let spec = OriginSpectrum::from_values(-2.0, -1.0, 2.0).unwrap();
        let e = passage_exponents(&spec).unwrap();
        assert_eq!(e.alpha, 0.5);
        assert_eq!(e.beta, 1.0);
    }

    #[test]
    fn boundary_of_expansion_condition_fails() {
        // lambda_s = -lambda_u violates lambda_u > |lambda_s| at spectrum
        // construction already.
        assert!(OriginSpectrum::from_values(-3.0, -2.0, 2.0).is_err());
    }

    #[test]
    fn unit_entry_fixes_both_powers() {
        let e = passage_exponents(&default_spectrum()).unwrap();
        assert_eq!(passage_map(1.0, 0.7, &e).unwrap(), (1.0, 0.7, 1.0));
        assert_eq!(passage_map(-1.0, 0.3, &e).unwrap(), (-1.0, 0.3, 1.0));
    }

    #[test]
    fn power_law_inverts_by_hand() {
        let e = passage_exponents(&default_spectrum()).unwrap();
        let x1 = 2f64.powf(-1.0 / e.alpha);
        let (_, _, z) = passage_map(x1, 0.0, &e).unwrap();
        assert!((z - 0.5).abs() < 1e-12);
    }

    #[test]
    fn passage_time_boundary_and_inversion() {
        let spec = default_spectrum();
        assert_eq!(passage_time(1.0, &spec).unwrap(), 0.0);
        assert_eq!(passage_time(-1.0, &spec).unwrap(), 0.0);
        let x = (-spec.lambda_u).exp();
        assert!((passage_time(x, &spec).unwrap() - 1.0).abs() < 1e-12);
        let t = passage_time(1e-6, &spec).unwrap();
        assert!((t - 1e6f64.ln() / spec.lambda_u).abs() < 1e-12);
        assert!((t - 1.168).abs() < 1e-3);
    }

    #[test]
    fn singular_entry_is_rejected() {
        let spec = default_spectrum();
        let e = passage_exponents(&spec).unwrap();
        assert!(passage_map(0.0, 0.5, &e).is_err());
        assert!(passage_time(0.0, &spec).is_err());
    }

    #[test]
    fn passage_time_is_strictly_decreasing_in_modulus() {
        let spec = default_spectrum();
        let mut prev = passage_time(1e-8, &spec).unwrap();
        for k in 1..200 {
            let x = 1e-8 + k as f64 * (1.0 - 1e-8) / 200.0;
            let t = passage_time(x, &spec).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn map_is_equivariant_under_sign_flip() {
        let e = passage_exponents(&default_spectrum()).unwrap();
        for (x1, x2) in [(0.3, 0.8), (0.9, -0.2), (0.01, 0.5)] {
            let (s, y, z) = passage_map(x1, x2, &e).unwrap();
            let (sm, ym, zm) = passage_map(-x1, -x2, &e).unwrap();
            assert_eq!(sm, -s);
            assert_eq!(ym, -y);
            assert_eq!(zm, z);
        }
    }

    #[test]
    fn integrated_linear_flow_reproduces_the_closed_form() {
        // Flow the linear system for the closed-form flight time and compare
        // with the passage map; this is the independent route through the
        // integrator.
        let spec = default_spectrum();
        let e = passage_exponents(&spec).unwrap();
        let sys = move |_t: f64, y: &[f64; 3], dy: &mut [f64; 3]| {
            dy[0] = spec.lambda_u * y[0];
            dy[1] = spec.lambda_ss * y[1];
            dy[2] = spec.lambda_s * y[2];
        };
        let cfg = IntegratorConfig {
            rtol: 1e-12,
            atol: 1e-14,
            ..IntegratorConfig::default()
        };
        for (x1, x2) in [(0.5, 0.25), (-0.7, 0.9), (0.037, -0.66)] {
            let t = passage_time(x1, &spec).unwrap();
            let (s, y2, y3) = passage_map(x1, x2, &e).unwrap();
            let end = integrate(&sys, [x1, x2, 1.0], t, cfg).unwrap().last().1;
            assert!((end[0] - s).abs() < 1e-10);
            assert!((end[1] - y2).abs() < 1e-10);
            assert!((end[2] - y3).abs() < 1e-10);
        }
    }
}
