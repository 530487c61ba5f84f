//! The Lorenz vector field and the eigenstructure of the origin.

use crate::error::{Error, Result};

/// A point of the 3D phase space.
pub type State3 = [f64; 3];

/// Coefficients of the Lorenz system
/// `x' = sigma (y - x), y' = rho x - y - x z, z' = x y - beta z`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }
}

impl LorenzParams {
    pub fn new(sigma: f64, rho: f64, beta: f64) -> Result<Self> {
        if !(sigma > 0.0 && rho > 0.0 && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma, rho, beta must be positive, got ({sigma}, {rho}, {beta})"
            )));
        }
        Ok(Self { sigma, rho, beta })
    }
}

/// Right-hand side of the Lorenz system at `s`.
pub fn lorenz_vector_field(s: &State3, p: &LorenzParams) -> State3 {
    let [x, y, z] = *s;
    [
        p.sigma * (y - x),
        p.rho * x - y - x * z,
        x * y - p.beta * z,
    ]
}

/// Jacobian matrix of the vector field at `s`, row-major.
pub fn lorenz_jacobian(s: &State3, p: &LorenzParams) -> [[f64; 3]; 3] {
    let [x, y, z] = *s;
    [
        [-p.sigma, p.sigma, 0.0],
        [p.rho - z, -1.0, -x],
        [y, x, -p.beta],
    ]
}

/// Eigenvalues of the linearisation at the origin, ordered
/// `lambda_ss < lambda_s < 0 < lambda_u` with `lambda_u > |lambda_s|`.
///
/// The (x, y) block decouples from z and yields the pair
/// `(-(sigma+1) ± sqrt((sigma+1)^2 + 4 sigma (rho-1))) / 2`; the z direction
/// contributes `-beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginSpectrum {
    pub lambda_ss: f64,
    pub lambda_s: f64,
    pub lambda_u: f64,
}

impl OriginSpectrum {
    /// Compute the spectrum for `p`, rejecting parameter sets where the
    /// saddle ordering fails (e.g. `rho <= 1`, no unstable direction).
    pub fn for_params(p: &LorenzParams) -> Result<Self> {
        let tr = -(p.sigma + 1.0);
        let disc = (p.sigma + 1.0).powi(2) + 4.0 * p.sigma * (p.rho - 1.0);
        if disc <= 0.0 {
            return Err(Error::NonSaddleSpectrum(format!(
                "complex (x,y)-block eigenvalues, discriminant {disc}"
            )));
        }
        let root = disc.sqrt();
        let plus = (tr + root) / 2.0;
        let minus = (tr - root) / 2.0;
        let spec = Self::from_values(minus, -p.beta, plus)?;
        Ok(spec)
    }

    /// Build a spectrum from raw eigenvalues, sorting and validating the
    /// saddle ordering and the expansion condition `lambda_u > |lambda_s|`.
    pub fn from_values(a: f64, b: f64, c: f64) -> Result<Self> {
        let mut v = [a, b, c];
        v.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let [lambda_ss, lambda_s, lambda_u] = v;
        if !(lambda_ss < lambda_s && lambda_s < 0.0 && 0.0 < lambda_u) {
            return Err(Error::NonSaddleSpectrum(format!(
                "ordering lambda_ss < lambda_s < 0 < lambda_u fails for ({lambda_ss}, {lambda_s}, {lambda_u})"
            )));
        }
        if lambda_u <= lambda_s.abs() {
            return Err(Error::NonSaddleSpectrum(format!(
                "lambda_u = {lambda_u} does not dominate |lambda_s| = {}",
                lambda_s.abs()
            )));
        }
        Ok(Self {
            lambda_ss,
            lambda_s,
            lambda_u,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_an_equilibrium() {
        let f = lorenz_vector_field(&[0.0, 0.0, 0.0], &LorenzParams::default());
        assert_eq!(f, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn field_matches_direct_substitution() {
        let p = LorenzParams::default();
        let f = lorenz_vector_field(&[1.0, 1.0, 1.0], &p);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 26.0);
        assert!((f[2] - (-5.0 / 3.0)).abs() < 1e-15);

        let g = lorenz_vector_field(&[1.0, 0.0, 0.0], &p);
        assert_eq!(g, [-10.0, 28.0, 0.0]);
    }

    #[test]
    fn field_is_equivariant_under_sign_flip() {
        let p = LorenzParams::default();
        for s in [[0.3, -1.7, 12.0], [5.0, 5.0, 5.0], [-2.0, 0.1, 30.0]] {
            let f = lorenz_vector_field(&s, &p);
            let fs = lorenz_vector_field(&[-s[0], -s[1], s[2]], &p);
            assert_eq!(fs[0], -f[0]);
            assert_eq!(fs[1], -f[1]);
            assert_eq!(fs[2], f[2]);
        }
    }

    #[test]
    fn spectrum_matches_quadratic_formula() {
        let spec = OriginSpectrum::for_params(&LorenzParams::default()).unwrap();
        let root = 1201f64.sqrt();
        assert!((spec.lambda_u - (-11.0 + root) / 2.0).abs() < 1e-12);
        assert!((spec.lambda_ss - (-11.0 - root) / 2.0).abs() < 1e-12);
        assert!((spec.lambda_s - (-8.0 / 3.0)).abs() < 1e-12);
        // trace identity
        let trace = spec.lambda_ss + spec.lambda_s + spec.lambda_u;
        assert!((trace - (-41.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn spectrum_satisfies_characteristic_polynomial() {
        let p = LorenzParams::default();
        let spec = OriginSpectrum::for_params(&p).unwrap();
        // (x,y)-block polynomial for the two planar eigenvalues.
        for lam in [spec.lambda_u, spec.lambda_ss] {
            let val = lam * lam + (p.sigma + 1.0) * lam - p.sigma * (p.rho - 1.0);
            assert!(val.abs() / (lam * lam).max(1.0) < 1e-12);
        }
        assert!((spec.lambda_s + p.beta).abs() < 1e-12);
    }

    #[test]
    fn non_saddle_parameters_are_flagged() {
        let p = LorenzParams::new(1.0, 0.5, 1.0).unwrap();
        assert!(matches!(
            OriginSpectrum::for_params(&p),
            Err(Error::NonSaddleSpectrum(_))
        ));
    }
}
