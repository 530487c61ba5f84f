//! Expanding interval maps with a singular point at the origin.
//!
//! The parametric family is `f(x) = sgn(x) (theta |x|^alpha - 1)` on
//! `[-1,1] \ {0}`. Branch limits are `f(0+) = -1`, `f(0-) = +1`, both
//! branches are strictly increasing and odd-symmetric, and the derivative
//! `theta alpha |x|^{alpha-1}` blows up like a power law at the origin.
//! The piecewise-linear member `2x - sgn(x)` (alpha = 1, theta = 2) serves
//! as a sanity case with closed-form everything.

use crate::error::{Error, Result};

/// An interval map on `[-1, 1]` that is continuous and monotone on each
/// side of a singular point at 0, with one-sided limits there.
pub trait IntervalMap {
    fn eval(&self, x: f64) -> Result<f64>;
    /// `lim_{x -> 0-} f(x)`.
    fn limit_from_left(&self) -> f64;
    /// `lim_{x -> 0+} f(x)`.
    fn limit_from_right(&self) -> f64;

    /// Image of an open interval `(u, v)` lying in one branch (`v <= 0` or
    /// `u >= 0`). Endpoints at 0 use the one-sided limits. Returned as
    /// `(lo, hi)` regardless of branch orientation.
    fn interval_image(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        let fu = if u == 0.0 {
            self.limit_from_right()
        } else {
            self.eval(u)?
        };
        let fv = if v == 0.0 {
            self.limit_from_left()
        } else {
            self.eval(v)?
        };
        Ok(if fu <= fv { (fu, fv) } else { (fv, fu) })
    }
}

/// Member of the branch family `sgn(x) (theta |x|^alpha - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LorenzLikeMap {
    alpha: f64,
    theta: f64,
}

impl Default for LorenzLikeMap {
    fn default() -> Self {
        // Chosen so that f(1) = 0.95 lies in (0,1) and the pointwise
        // expansion theta * alpha = 1.4625 exceeds sqrt(2).
        Self {
            alpha: 0.75,
            theta: 1.95,
        }
    }
}

impl LorenzLikeMap {
    /// Family member with singularity exponent `alpha` in (0,1) and branch
    /// amplitude `theta` with `f(1) = theta - 1` in (0,1).
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,1), got {alpha}"
            )));
        }
        if !(theta > 1.0 && theta < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (1,2) so that f(1) is interior, got {theta}"
            )));
        }
        Ok(Self { alpha, theta })
    }

    /// The piecewise-linear sanity member `f(x) = 2x - sgn(x)`: full
    /// branches, constant slope 2, Lebesgue measure invariant.
    pub fn doubling() -> Self {
        Self {
            alpha: 1.0,
            theta: 2.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Branch derivative `theta alpha |x|^{alpha-1}`, positive on both
    /// branches.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.theta * self.alpha * x.abs().powf(self.alpha - 1.0))
    }

    /// Inverse of the right branch: solves `theta x^alpha - 1 = y` for
    /// `x` in (0, 1], valid for `y` in `(-1, f(1)]`.
    pub fn invert_right(&self, y: f64) -> Result<f64> {
        let f1 = self.theta - 1.0;
        if !(y > -1.0 && y <= f1) {
            return Err(Error::Domain(format!(
                "{y} is outside the right-branch image (-1, {f1}]"
            )));
        }
        Ok(((y + 1.0) / self.theta).powf(1.0 / self.alpha))
    }

    /// Inverse of the left branch, valid for `y` in `[f(-1), 1)`.
    pub fn invert_left(&self, y: f64) -> Result<f64> {
        let fm1 = 1.0 - self.theta;
        if !(y >= fm1 && y < 1.0) {
            return Err(Error::Domain(format!(
                "{y} is outside the left-branch image [{fm1}, 1)"
            )));
        }
        Ok(-((1.0 - y) / self.theta).powf(1.0 / self.alpha))
    }

    /// Forward orbit `x, f(x), ..., f^n(x)`.
    pub fn forward_orbit(&self, x0: f64, n: usize) -> Result<Vec<f64>> {
        let mut orbit = Vec::with_capacity(n + 1);
        let mut x = x0;
        orbit.push(x);
        for _ in 0..n {
            x = self.eval(x)?;
            orbit.push(x);
        }
        Ok(orbit)
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if x == 0.0 {
            return Err(Error::SingularPoint(x));
        }
        if !(x.abs() <= 1.0) {
            return Err(Error::Domain(format!("|{x}| > 1")));
        }
        Ok(())
    }
}

impl IntervalMap for LorenzLikeMap {
    fn eval(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        // sgn(x) * (theta |x|^alpha - 1); this form negates exactly under
        // x -> -x, so odd symmetry holds bit for bit.
        Ok(x.signum() * (self.theta * x.abs().powf(self.alpha) - 1.0))
    }

    fn limit_from_left(&self) -> f64 {
        1.0
    }

    fn limit_from_right(&self) -> f64 {
        -1.0
    }
}

/// Numerical verification of the branch-family conditions: pointwise
/// derivative bounds, the power-law envelope of `f'`, and iterated
/// derivative growth `|(f^n)'| >= c tau^n`.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub grid_size: usize,
    pub n_max: usize,
    /// Pointwise minimum of `|f'|` over the grid.
    pub min_deriv: f64,
    /// `min_products[n-1]` = minimum over grid orbits of `|(f^n)'|`.
    pub min_products: Vec<f64>,
    /// Constants with `min |(f^n)'| >= c tau^n` on the tested range.
    pub c: f64,
    pub tau: f64,
    /// True when tau > 1.
    pub expanding: bool,
    /// True when the pointwise bound already certifies expansion with c = 1.
    pub pointwise_regime: bool,
    /// Two-sided power-law constant: `C^{-1} |x|^{alpha-1} <= f' <= C |x|^{alpha-1}`.
    pub ratio_constant: f64,
    pub f_at_one: f64,
    pub f_one_in_range: bool,
}

impl ExpansionReport {
    /// Sufficient condition for the covering property: pointwise
    /// `min |f'| > sqrt(2)` (so c = 1, tau > sqrt(2)).
    pub fn leo_sufficient(&self) -> bool {
        self.min_deriv > std::f64::consts::SQRT_2
    }
}

/// Scan a symmetric grid for the expansion conditions of the family.
pub fn check_conditions(
    map: &LorenzLikeMap,
    grid_size: usize,
    n_max: usize,
) -> Result<ExpansionReport> {
    if grid_size < 1000 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be at least 1000, got {grid_size}"
        )));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be positive".into()));
    }

    let mut min_deriv = f64::INFINITY;
    let mut ratio_sup = f64::NEG_INFINITY;
    let mut ratio_inf = f64::INFINITY;
    let mut min_products = vec![f64::INFINITY; n_max];

    for k in 0..grid_size {
        let x = -1.0 + 2.0 * k as f64 / (grid_size - 1) as f64;
        if x.abs() < 1e-12 {
            continue;
        }
        let d = map.deriv(x)?;
        min_deriv = min_deriv.min(d);
        let ratio = d / x.abs().powf(map.alpha() - 1.0);
        ratio_sup = ratio_sup.max(ratio);
        ratio_inf = ratio_inf.min(ratio);

        let mut y = x;
        let mut product = 1.0f64;
        for slot in min_products.iter_mut() {
            product *= map.deriv(y)?;
            *slot = slot.min(product);
            y = map.eval(y)?;
            if y == 0.0 {
                break;
            }
        }
    }

    let ratio_constant = ratio_sup.max(1.0 / ratio_inf);

    let (c, tau, pointwise_regime) = if min_deriv > 1.0 {
        // Chain rule: |(f^n)'| >= (min |f'|)^n, so c = 1 works.
        (1.0, min_deriv, true)
    } else {
        // Least squares on log(min_n) vs n, then shrink c so the bound
        // holds at every tested n.
        let n = min_products.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for (i, p) in min_products.iter().enumerate() {
            let xi = (i + 1) as f64;
            let yi = p.ln();
            sx += xi;
            sy += yi;
            sxx += xi * xi;
            sxy += xi * yi;
        }
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let tau = slope.exp();
        let c = min_products
            .iter()
            .enumerate()
            .map(|(i, p)| p / tau.powi(i as i32 + 1))
            .fold(f64::INFINITY, f64::min);
        (c, tau, false)
    };

    let f_at_one = map.eval(1.0)?;
    Ok(ExpansionReport {
        grid_size,
        n_max,
        min_deriv,
        min_products,
        c,
        tau,
        expanding: tau > 1.0,
        pointwise_regime,
        ratio_constant,
        f_at_one,
        f_one_in_range: f_at_one > 0.0 && f_at_one < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_satisfy_branch_values() {
        let m = LorenzLikeMap::default();
        assert!((m.eval(1.0).unwrap() - 0.95).abs() < 1e-15);
        assert!((m.eval(-1.0).unwrap() + 0.95).abs() < 1e-15);
        // direct evaluation oracle: 1.95 * 0.5^0.75 - 1
        let expect = 1.95 * 0.5f64.powf(0.75) - 1.0;
        assert!((m.eval(0.5).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.1594769).abs() < 1e-6);
    }

    #[test]
    fn branch_limits_are_approached() {
        let m = LorenzLikeMap::default();
        assert!((m.eval(1e-12).unwrap() - (-1.0)).abs() < 1e-8);
        assert!((m.eval(-1e-12).unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(m.limit_from_right(), -1.0);
        assert_eq!(m.limit_from_left(), 1.0);
    }

    #[test]
    fn singular_point_is_rejected() {
        let m = LorenzLikeMap::default();
        assert!(matches!(m.eval(0.0), Err(Error::SingularPoint(_))));
        assert!(m.deriv(0.0).is_err());
        assert!(m.eval(1.5).is_err());
    }

    #[test]
    fn odd_symmetry_is_exact() {
        let m = LorenzLikeMap::default();
        for k in 1..500 {
            let x = k as f64 / 500.0;
            assert_eq!(m.eval(-x).unwrap(), -m.eval(x).unwrap());
        }
    }

    #[test]
    fn branches_are_strictly_increasing() {
        for m in [
            LorenzLikeMap::default(),
            LorenzLikeMap::new(0.3, 1.5).unwrap(),
            LorenzLikeMap::doubling(),
        ] {
            let mut prev = m.eval(1e-9).unwrap();
            for k in 1..=400 {
                let x = k as f64 / 400.0;
                let y = m.eval(x).unwrap();
                assert!(y > prev);
                prev = y;
            }
        }
    }

    #[test]
    fn branch_inverses_round_trip() {
        let m = LorenzLikeMap::default();
        for k in 1..100 {
            let x = k as f64 / 100.0;
            let rt = m.invert_right(m.eval(x).unwrap()).unwrap();
            assert!((rt - x).abs() < 1e-14);
            let lt = m.invert_left(m.eval(-x).unwrap()).unwrap();
            assert!((lt + x).abs() < 1e-14);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(LorenzLikeMap::new(0.0, 1.5).is_err());
        assert!(LorenzLikeMap::new(1.0, 1.5).is_err());
        assert!(LorenzLikeMap::new(0.5, 1.0).is_err());
        assert!(LorenzLikeMap::new(0.5, 2.0).is_err());
        assert!(LorenzLikeMap::new(0.5, 1.5).is_ok());
    }

    #[test]
    fn default_conditions_report() {
        let m = LorenzLikeMap::default();
        let rep = check_conditions(&m, 10_000, 20).unwrap();
        // min |f'| = theta * alpha attained at |x| = 1
        assert!((rep.min_deriv - 1.4625).abs() < 1e-12);
        assert_eq!(rep.c, 1.0);
        assert!(rep.tau >= 1.4625 - 1e-12);
        assert!(rep.pointwise_regime);
        assert!(rep.expanding);
        assert!(rep.leo_sufficient());
        assert!(rep.f_one_in_range);
        assert!((rep.f_at_one - 0.95).abs() < 1e-15);
        // power-law ratio is exactly theta*alpha for the family
        assert!((rep.ratio_constant - 1.4625).abs() < 1e-9);
        // n-step products dominate c tau^n
        for (i, p) in rep.min_products.iter().enumerate() {
            assert!(*p >= rep.c * rep.tau.powi(i as i32 + 1) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn weakly_contracting_member_flags_eventual_expansion() {
        let m = LorenzLikeMap::new(0.75, 1.2).unwrap();
        let rep = check_conditions(&m, 10_000, 20).unwrap();
        assert!((rep.min_deriv - 0.9).abs() < 1e-12);
        assert!(!rep.pointwise_regime);
        assert!(!rep.leo_sufficient());
        // products still grow: eventual expansion
        assert!(rep.expanding, "tau = {}", rep.tau);
        assert!(rep.tau > 1.0);
        assert!(rep.c < 1.0);
        for (i, p) in rep.min_products.iter().enumerate() {
            assert!(*p >= rep.c * rep.tau.powi(i as i32 + 1) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn doubling_map_has_constant_slope_two() {
        let m = LorenzLikeMap::doubling();
        let rep = check_conditions(&m, 1000, 8).unwrap();
        assert!((rep.min_deriv - 2.0).abs() < 1e-12);
        assert!(rep.leo_sufficient());
        // f(1) = 1 sits on the boundary, outside (0,1)
        assert!(!rep.f_one_in_range);
        for (i, p) in rep.min_products.iter().enumerate() {
            assert!((p - 2f64.powi(i as i32 + 1)).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_size_precondition() {
        let m = LorenzLikeMap::default();
        assert!(check_conditions(&m, 999, 5).is_err());
    }
}
