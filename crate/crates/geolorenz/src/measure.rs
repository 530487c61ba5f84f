//! Absolutely continuous invariant measure via Ulam discretisation.
//!
//! The transfer operator is discretised on a uniform partition of `[-1,1]`:
//! entry (i, j) is the fraction of bin i whose image lands in bin j,
//! computed per monotone branch with the closed-form branch inverse (no
//! sampling noise). The stationary vector of the row-stochastic matrix is
//! found by power iteration; an independent Birkhoff (orbit-histogram)
//! estimator cross-validates it. Bins adjacent to the singular point get
//! analytic treatment when integrating the log-singular roof.

use crate::error::{Error, Result};
use crate::map::{IntervalMap, LorenzLikeMap};
use crate::roof::RoofFunction;
use rayon::prelude::*;

/// Row-stochastic Ulam matrix in sparse row form.
#[derive(Debug, Clone)]
pub struct UlamMatrix {
    pub n_bins: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl UlamMatrix {
    pub fn bin_width(&self) -> f64 {
        2.0 / self.n_bins as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        -1.0 + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|(_, w)| w).sum()
    }

    /// Push a probability vector through the matrix: `out_j = sum_i p_i P_ij`.
    /// Fixed-order chunked reduction keeps the result independent of the
    /// thread count.
    pub fn propagate(&self, p: &[f64]) -> Vec<f64> {
        const CHUNK: usize = 512;
        let partials: Vec<Vec<f64>> = (0..self.n_bins.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut out = vec![0.0; self.n_bins];
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(self.n_bins);
                for i in lo..hi {
                    let pi = p[i];
                    if pi == 0.0 {
                        continue;
                    }
                    for &(j, w) in &self.rows[i] {
                        out[j as usize] += pi * w;
                    }
                }
                out
            })
            .collect();
        let mut out = vec![0.0; self.n_bins];
        for part in partials {
            for (o, v) in out.iter_mut().zip(part) {
                *o += v;
            }
        }
        out
    }
}

/// Assemble the Ulam matrix for a family map by exact branch inversion.
pub fn ulam_matrix(map: &LorenzLikeMap, n_bins: usize) -> Result<UlamMatrix> {
    if n_bins < 16 {
        return Err(Error::InvalidParameter(format!(
            "need at least 16 bins, got {n_bins}"
        )));
    }
    let w = 2.0 / n_bins as f64;
    let edge = |i: usize| -1.0 + i as f64 * w;

    let rows: Vec<Vec<(u32, f64)>> = (0..n_bins)
        .into_par_iter()
        .map(|i| -> Result<Vec<(u32, f64)>> {
            let (u, v) = (edge(i), edge(i + 1));
            let mut row: Vec<(u32, f64)> = Vec::new();
            let mut add = |j: usize, mass: f64| {
                if mass <= 0.0 {
                    return;
                }
                let j = j.min(n_bins - 1) as u32;
                match row.iter_mut().find(|(k, _)| *k == j) {
                    Some((_, acc)) => *acc += mass,
                    None => row.push((j, mass)),
                }
            };

            // Left-branch part of the bin: [u, v] intersected with [-1, 0].
            let (lu, lv) = (u.min(0.0), v.min(0.0));
            if lv > lu {
                let ia = if lu <= -1.0 {
                    map.eval(-1.0)?
                } else {
                    map.eval(lu)?
                };
                let ib = if lv == 0.0 {
                    map.limit_from_left()
                } else {
                    map.eval(lv)?
                };
                distribute(&mut add, ia, ib, w, n_bins, |y| map.invert_left(y))?;
            }
            // Right-branch part: [u, v] intersected with [0, 1].
            let (ru, rv) = (u.max(0.0), v.max(0.0));
            if rv > ru {
                let ia = if ru == 0.0 {
                    map.limit_from_right()
                } else {
                    map.eval(ru)?
                };
                let ib = map.eval(rv)?;
                distribute(&mut add, ia, ib, w, n_bins, |y| map.invert_right(y))?;
            }
            for (_, m) in row.iter_mut() {
                *m /= v - u;
            }
            row.sort_by_key(|(j, _)| *j);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(UlamMatrix { n_bins, rows })
}

/// Spread the preimage mass of the image interval `(ia, ib)` over target
/// bins, measuring preimage lengths with the branch inverse.
fn distribute<F, A>(
    add: &mut A,
    ia: f64,
    ib: f64,
    w: f64,
    n_bins: usize,
    invert: F,
) -> Result<()>
where
    F: Fn(f64) -> Result<f64>,
    A: FnMut(usize, f64),
{
    let (lo, hi) = if ia <= ib { (ia, ib) } else { (ib, ia) };
    let j_lo = (((lo + 1.0) / w).floor() as isize).clamp(0, n_bins as isize - 1) as usize;
    let j_hi = (((hi + 1.0) / w).floor() as isize).clamp(0, n_bins as isize - 1) as usize;
    let mut y_prev = lo;
    let mut x_prev = invert(clamp_into(lo, hi, y_prev))?;
    for j in j_lo..=j_hi {
        let y_next = if j == j_hi { hi } else { -1.0 + (j as f64 + 1.0) * w };
        if y_next > y_prev {
            let x_next = invert(clamp_into(lo, hi, y_next))?;
            add(j, (x_next - x_prev).abs());
            x_prev = x_next;
        }
        y_prev = y_next;
    }
    Ok(())
}

/// Nudge boundary values into the valid inverse domain.
fn clamp_into(lo: f64, hi: f64, y: f64) -> f64 {
    // The open image ends (-1 and 1 limits) are approached by the inverse
    // domain; step one ulp inward where needed.
    let y = y.max(lo).min(hi);
    if y <= -1.0 {
        -1.0 + f64::EPSILON
    } else if y >= 1.0 {
        1.0 - f64::EPSILON
    } else {
        y
    }
}

/// Discretised invariant density.
#[derive(Debug, Clone)]
pub struct UlamDensity {
    pub n_bins: usize,
    /// Bin densities (probability mass divided by bin width).
    pub densities: Vec<f64>,
    /// L1 distance between the last two iterates of the probability vector.
    pub residual: f64,
    pub iterations: usize,
}

impl UlamDensity {
    pub fn bin_width(&self) -> f64 {
        2.0 / self.n_bins as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        -1.0 + (i as f64 + 0.5) * self.bin_width()
    }

    /// Probability mass per bin.
    pub fn masses(&self) -> Vec<f64> {
        let w = self.bin_width();
        self.densities.iter().map(|d| d * w).collect()
    }

    /// `sum |rho - rho(-x)|` in L1; zero for an even density.
    pub fn symmetry_defect(&self) -> f64 {
        let w = self.bin_width();
        let n = self.densities.len();
        (0..n)
            .map(|i| (self.densities[i] - self.densities[n - 1 - i]).abs() * w)
            .sum::<f64>()
            / 2.0
    }
}

/// L1 distance between two densities on the same partition.
pub fn l1_distance(a: &[f64], b: &[f64], bin_width: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() * bin_width)
        .sum()
}

/// Power-iterate the Ulam matrix to its stationary density, starting from
/// the uniform vector.
pub fn stationary_density(matrix: &UlamMatrix, tol: f64) -> Result<UlamDensity> {
    let start = vec![1.0 / matrix.n_bins as f64; matrix.n_bins];
    stationary_density_from(matrix, &start, tol)
}

/// Same, from a caller-supplied start vector (used for uniqueness checks).
pub fn stationary_density_from(
    matrix: &UlamMatrix,
    start: &[f64],
    tol: f64,
) -> Result<UlamDensity> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if start.len() != matrix.n_bins {
        return Err(Error::InvalidParameter(format!(
            "start vector has {} entries for {} bins",
            start.len(),
            matrix.n_bins
        )));
    }
    let total: f64 = start.iter().sum();
    if !(total > 0.0) || start.iter().any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidParameter(
            "start vector must be nonnegative with positive mass".into(),
        ));
    }
    let mut p: Vec<f64> = start.iter().map(|v| v / total).collect();
    const MAX_ITERS: usize = 200_000;
    for it in 1..=MAX_ITERS {
        let mut next = matrix.propagate(&p);
        let mass: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= mass;
        }
        let residual: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if residual < tol {
            let w = 2.0 / matrix.n_bins as f64;
            return Ok(UlamDensity {
                n_bins: matrix.n_bins,
                densities: p.iter().map(|m| m / w).collect(),
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence(MAX_ITERS))
}

/// Occupation histogram of a long orbit, normalised to a density.
#[derive(Debug, Clone)]
pub struct BirkhoffEstimate {
    pub n_bins: usize,
    pub densities: Vec<f64>,
    pub n_iter: usize,
    /// Orbit restarts forced by hitting the singular point exactly.
    pub restarts: usize,
}

/// Iterate the map from `x0` and histogram the orbit.
///
/// If the orbit lands exactly on the singular point it is restarted from a
/// fresh position drawn from a stream seeded by `x0`, and the event is
/// reported. (For the piecewise-linear member this is routine: doubling is
/// a binary shift, so every double-precision orbit reaches 0 once the
/// mantissa is exhausted.)
pub fn birkhoff_histogram(
    map: &LorenzLikeMap,
    x0: f64,
    n_iter: usize,
    n_bins: usize,
) -> Result<BirkhoffEstimate> {
    use rand::{Rng, SeedableRng};
    if n_iter < 100_000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1e5 iterations for a usable histogram, got {n_iter}"
        )));
    }
    if x0 == 0.0 || x0.abs() > 1.0 {
        return Err(Error::InvalidParameter(format!("bad start {x0}")));
    }
    let mut restart_rng = rand_chacha::ChaCha8Rng::seed_from_u64(x0.to_bits());
    // A point on the 2^-12 dyadic grid has almost no binary entropy left:
    // under the piecewise-linear member its remaining orbit is a finite
    // shift ladder through coarse dyadics ending at 0, which would pile
    // counts onto bin centers. Treat such points like 0-hits.
    let degenerate = |x: f64| x == 0.0 || (x * 4096.0) == (x * 4096.0).round();
    let w = 2.0 / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    let mut x = x0;
    let mut restarts = 0usize;
    for _ in 0..n_iter {
        let j = (((x + 1.0) / w) as usize).min(n_bins - 1);
        counts[j] += 1;
        x = match map.eval(x) {
            Ok(y) if !degenerate(y) => y,
            _ => {
                restarts += 1;
                if restarts > n_iter / 10 {
                    return Err(Error::SingularOrbit(
                        "orbit keeps hitting the singular point".into(),
                    ));
                }
                loop {
                    let draw = restart_rng.gen_range(-1.0..1.0);
                    if !degenerate(draw) {
                        break draw;
                    }
                }
            }
        };
    }
    let norm = 1.0 / (n_iter as f64 * w);
    Ok(BirkhoffEstimate {
        n_bins,
        densities: counts.iter().map(|c| *c as f64 * norm).collect(),
        n_iter,
        restarts,
    })
}

/// The suspension normaliser `integral of r d(mu)`.
#[derive(Debug, Clone, Copy)]
pub struct SuspensionNormalizer {
    pub integral_r: f64,
}

/// Integrate a roof against an Ulam density, using the analytic closed
/// form of the log part in every bin (the two bins touching 0 included).
pub fn roof_integral(density: &UlamDensity, roof: &RoofFunction) -> Result<SuspensionNormalizer> {
    let w = density.bin_width();
    let mut total = 0.0;
    for (i, rho) in density.densities.iter().enumerate() {
        let a = -1.0 + i as f64 * w;
        let b = a + w;
        // Bins straddling 0 (odd bin counts) split at the singularity.
        let integral = if a < 0.0 && b > 0.0 {
            roof.integral(a, 0.0)? + roof.integral(0.0, b)?
        } else {
            roof.integral(a, b)?
        };
        total += rho * integral;
    }
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::Domain(format!(
            "roof integral {total} is not positive and finite"
        )));
    }
    Ok(SuspensionNormalizer { integral_r: total })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_rows_are_two_halves() {
        let m = LorenzLikeMap::doubling();
        let mat = ulam_matrix(&m, 64).unwrap();
        for i in 0..64 {
            let row = mat.row(i);
            assert_eq!(row.len(), 2, "row {i}: {row:?}");
            for (_, v) in row {
                assert!((v - 0.5).abs() < 1e-12);
            }
            assert!((mat.row_sum(i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn default_family_rows_are_stochastic() {
        let m = LorenzLikeMap::default();
        let mat = ulam_matrix(&m, 1024).unwrap();
        for i in 0..mat.n_bins {
            assert!(
                (mat.row_sum(i) - 1.0).abs() < 1e-12,
                "row {i} sums to {}",
                mat.row_sum(i)
            );
        }
    }

    #[test]
    fn odd_bin_count_splits_the_straddling_bin() {
        let m = LorenzLikeMap::default();
        let mat = ulam_matrix(&m, 33).unwrap();
        // the middle bin straddles 0; its image spreads over both branch
        // images, which reach toward both ends of [-1,1]
        let row = mat.row(16);
        assert!((mat.row_sum(16) - 1.0).abs() < 1e-12);
        let has_low = row.iter().any(|(j, _)| *j < 8);
        let has_high = row.iter().any(|(j, _)| *j > 24);
        assert!(has_low && has_high, "row {row:?}");
    }

    #[test]
    fn doubling_density_is_uniform() {
        let m = LorenzLikeMap::doubling();
        for n_bins in [64usize, 256, 1024] {
            let mat = ulam_matrix(&m, n_bins).unwrap();
            let d = stationary_density(&mat, 1e-12).unwrap();
            let uniform = vec![0.5; n_bins];
            assert!(l1_distance(&d.densities, &uniform, d.bin_width()) < 1e-10);
        }
    }

    #[test]
    fn default_density_is_symmetric_and_reproducible() {
        let m = LorenzLikeMap::default();
        let mat = ulam_matrix(&m, 1024).unwrap();
        let d = stationary_density(&mat, 1e-12).unwrap();
        assert!(d.symmetry_defect() < 1e-3);
        let mass: f64 = d.masses().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);

        // Any start vector reaches the same fixed point.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let start: Vec<f64> = (0..1024).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let d2 = stationary_density_from(&mat, &start, 1e-12).unwrap();
            assert!(
                l1_distance(&d.densities, &d2.densities, d.bin_width()) < 2e-12 * 1024.0,
                "fixed point depends on the start"
            );
        }
    }

    #[test]
    fn birkhoff_agrees_with_ulam() {
        let m = LorenzLikeMap::default();
        let mat = ulam_matrix(&m, 512).unwrap();
        let d = stationary_density(&mat, 1e-12).unwrap();
        let b = birkhoff_histogram(&m, 0.437, 2_000_000, 512).unwrap();
        let dist = l1_distance(&d.densities, &b.densities, d.bin_width());
        assert!(dist < 0.05, "L1 distance {dist}");
        assert_eq!(b.restarts, 0);
    }

    #[test]
    fn doubling_birkhoff_is_uniform() {
        // Every f64 orbit of the doubling map reaches 0 after ~50 shifts,
        // so this exercises the restart path heavily and still must land
        // on the uniform density.
        let m = LorenzLikeMap::doubling();
        let b = birkhoff_histogram(&m, 1.0 / std::f64::consts::PI, 1_000_000, 32).unwrap();
        assert!(b.restarts > 1000, "expected many restarts, got {}", b.restarts);
        let uniform = vec![0.5; 32];
        let dist = l1_distance(&b.densities, &uniform, 2.0 / 32.0);
        assert!(dist < 0.02, "L1 distance {dist}");
    }

    #[test]
    fn pushforward_residual_matches_report() {
        let m = LorenzLikeMap::default();
        for n_bins in [1024usize, 2048] {
            let mat = ulam_matrix(&m, n_bins).unwrap();
            let d = stationary_density(&mat, 1e-11).unwrap();
            let masses = d.masses();
            let pushed = mat.propagate(&masses);
            let defect: f64 = pushed
                .iter()
                .zip(&masses)
                .map(|(a, b)| (a - b).abs())
                .sum();
            assert!(defect <= 2.0 * 1e-11, "defect {defect}");
        }
    }

    #[test]
    fn density_positive_on_the_support_core() {
        // All bins meeting f^2(Y) for Y = (-0.5, 0.5) carry positive mass.
        let m = LorenzLikeMap::default();
        let mat = ulam_matrix(&m, 512).unwrap();
        let d = stationary_density(&mat, 1e-12).unwrap();
        let f = |x: f64| m.eval(x).unwrap();
        // f(Y) = (-1, f(-0.5)) U (f(0.5), 1); f^2(Y) covers at least
        // (f(-1), 1) U (-1, f(f(0.5))).
        let lo = f(-1.0);
        let hi = f(f(0.5));
        for (i, rho) in d.densities.iter().enumerate() {
            let c = d.bin_center(i);
            if (c > lo && c < 1.0) || (c > -1.0 && c < hi) {
                assert!(*rho > 0.0, "bin {i} at {c} has zero density");
            }
        }
    }

    #[test]
    fn roof_integral_oracles() {
        // r == 1 integrates to 1 against any probability density.
        let m = LorenzLikeMap::default();
        let mat = ulam_matrix(&m, 256).unwrap();
        let d = stationary_density(&mat, 1e-12).unwrap();
        let one = RoofFunction::constant(1.0).unwrap();
        assert!((roof_integral(&d, &one).unwrap().integral_r - 1.0).abs() < 1e-12);

        // -ln|x| against the uniform density integrates to exactly 1.
        let uniform = UlamDensity {
            n_bins: 256,
            densities: vec![0.5; 256],
            residual: 0.0,
            iterations: 0,
        };
        let log_roof = RoofFunction::pure_log();
        assert!(
            (roof_integral(&uniform, &log_roof).unwrap().integral_r - 1.0).abs() < 1e-10
        );

        //

        // Linearity: standard roof = pure log + 1.
        let std_roof = RoofFunction::standard();
        let a = roof_integral(&d, &std_roof).unwrap().integral_r;
        let b = roof_integral(&d, &log_roof).unwrap().integral_r;
        assert!((a - (b + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn matrix_requires_enough_bins() {
        let m = LorenzLikeMap::default();
        assert!(ulam_matrix(&m, 8).is_err());
    }
}
