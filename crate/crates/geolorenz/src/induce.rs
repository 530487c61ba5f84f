//! Full-branch inducing scheme on an interval around the singularity.
//!
//! Starting from an open interval `Y` containing 0, the branch partition is
//! refined under iteration: a monotone piece whose image covers `Y` donates
//! the sub-piece mapping exactly onto `Y` as a scheme branch (with its
//! return depth), pieces whose image straddles 0 are split at the preimage
//! of 0 (never accepted, which enforces the separation condition
//! structurally), and everything else advances one iterate. Refinement
//! stops at a depth cap; the uncovered remainder is reported, not fatal.

use crate::error::{Error, Result};
use crate::map::{IntervalMap, LorenzLikeMap};
use rayon::prelude::*;

/// One branch `omega = (left, right)` with `f^R` mapping it onto `Y`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SchemeBranch {
    pub left: f64,
    pub right: f64,
    pub return_time: usize,
}

impl SchemeBranch {
    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

/// The inducing scheme: branches, their return times, and how much of `Y`
/// they cover.
#[derive(Debug, Clone)]
pub struct InducedScheme {
    pub y_left: f64,
    pub y_right: f64,
    pub branches: Vec<SchemeBranch>,
    pub depth_cap: usize,
    pub covered_fraction: f64,
    pub uncovered_length: f64,
    /// Covered fraction reached the completeness threshold (default 0.99).
    pub complete: bool,
}

impl InducedScheme {
    pub fn y_length(&self) -> f64 {
        self.y_right - self.y_left
    }

    /// Lebesgue masses `Leb{R = n}` for `n = 1..=depth_cap`.
    pub fn mass_by_return_time(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.depth_cap];
        for b in &self.branches {
            mass[b.return_time - 1] += b.length();
        }
        mass
    }
}

/// Completeness threshold on the covered fraction.
pub const COVERAGE_THRESHOLD: f64 = 0.99;

/// Iterate `f` n times, failing if the orbit lands exactly on the
/// singular point.
fn eval_iter(map: &LorenzLikeMap, mut x: f64, n: usize) -> Result<f64> {
    for _ in 0..n {
        x = map.eval(x)?;
    }
    Ok(x)
}

/// Monotone bisection for `f^depth(c) = target` on `(a, b)`, where the
/// iterate is strictly increasing with image `(im_lo, im_hi)` containing
/// `target`.
fn bisect_preimage(
    map: &LorenzLikeMap,
    a: f64,
    b: f64,
    depth: usize,
    target: f64,
) -> Result<f64> {
    let mut lo = a;
    let mut hi = b;
    for _ in 0..200 {
        let scale = lo.abs().max(hi.abs()).max(1e-3);
        if hi - lo <= 2.0 * f64::EPSILON * scale {
            break;
        }
        let mut mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let mut g = eval_iter(map, mid, depth);
        if g.is_err() {
            // Orbit of the midpoint hit 0 exactly; nudge one step.
            mid = mid + (hi - lo) * 1e-3;
            g = eval_iter(map, mid, depth);
        }
        if g? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    depth: usize,
    im_lo: f64,
    im_hi: f64,
}

/// Build the inducing scheme for `map` on `y = (y_left, y_right)`.
///
/// Requires `y_left < 0 < y_right` and `[y_left, y_right]` inside `[-1, 1]`.
pub fn build_scheme(
    map: &LorenzLikeMap,
    y: (f64, f64),
    depth_cap: usize,
) -> Result<InducedScheme> {
    let (yl, yr) = y;
    if !(yl < 0.0 && 0.0 < yr) {
        return Err(Error::InvalidParameter(format!(
            "Y = ({yl}, {yr}) must contain 0"
        )));
    }
    if yl < -1.0 || yr > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Y = ({yl}, {yr}) must lie inside [-1, 1]"
        )));
    }
    if depth_cap == 0 {
        return Err(Error::InvalidParameter("depth cap must be positive".into()));
    }

    const WIDTH_FLOOR: f64 = 1e-15;
    let mut branches: Vec<SchemeBranch> = Vec::new();
    let mut uncovered = 0.0;
    let mut stack = vec![
        Piece {
            a: yl,
            b: 0.0,
            depth: 0,
            im_lo: yl,
            im_hi: 0.0,
        },
        Piece {
            a: 0.0,
            b: yr,
            depth: 0,
            im_lo: 0.0,
            im_hi: yr,
        },
    ];

    while let Some(p) = stack.pop() {
        if p.b - p.a < WIDTH_FLOOR {
            uncovered += (p.b - p.a).max(0.0);
            continue;
        }
        if p.depth >= 1 && p.im_lo <= yl && p.im_hi >= yr {
            // The piece covers Y; carve out the branch mapping onto it.
            let c_l = if p.im_lo == yl {
                p.a
            } else {
                bisect_preimage(map, p.a, p.b, p.depth, yl)?
            };
            let c_r = if p.im_hi == yr {
                p.b
            } else {
                bisect_preimage(map, p.a, p.b, p.depth, yr)?
            };
            if c_r - c_l >= WIDTH_FLOOR {
                branches.push(SchemeBranch {
                    left: c_l,
                    right: c_r,
                    return_time: p.depth,
                });
            } else {
                uncovered += (c_r - c_l).max(0.0);
            }
            // The side remainders miss Y on one side each and never
            // contain 0 in their images.
            stack.push(Piece {
                a: p.a,
                b: c_l,
                depth: p.depth,
                im_lo: p.im_lo,
                im_hi: yl,
            });
            stack.push(Piece {
                a: c_r,
                b: p.b,
                depth: p.depth,
                im_lo: yr,
                im_hi: p.im_hi,
            });
            continue;
        }
        if p.im_lo < 0.0 && 0.0 < p.im_hi {
            // Split at the preimage of the singular point.
            let c = bisect_preimage(map, p.a, p.b, p.depth, 0.0)?;
            stack.push(Piece {
                a: p.a,
                b: c,
                depth: p.depth,
                im_lo: p.im_lo,
                im_hi: 0.0,
            });
            stack.push(Piece {
                a: c,
                b: p.b,
                depth: p.depth,
                im_lo: 0.0,
                im_hi: p.im_hi,
            });
            continue;
        }
        if p.depth >= depth_cap {
            uncovered += p.b - p.a;
            continue;
        }
        // Advance one iterate; endpoints sitting on the singular point use
        // the one-sided branch limits.
        let im_lo = if p.im_lo == 0.0 {
            map.limit_from_right()
        } else {
            map.eval(p.im_lo)?
        };
        let im_hi = if p.im_hi == 0.0 {
            map.limit_from_left()
        } else {
            map.eval(p.im_hi)?
        };
        debug_assert!(im_lo < im_hi);
        stack.push(Piece {
            a: p.a,
            b: p.b,
            depth: p.depth + 1,
            im_lo,
            im_hi,
        });
    }

    branches.sort_by(|p, q| p.left.partial_cmp(&q.left).unwrap());
    let covered: f64 = branches.iter().map(|b| b.length()).sum();
    let y_len = yr - yl;
    let covered_fraction = covered / y_len;
    Ok(InducedScheme {
        y_left: yl,
        y_right: yr,
        branches,
        depth_cap,
        covered_fraction,
        uncovered_length: uncovered,
        complete: covered_fraction >= COVERAGE_THRESHOLD,
    })
}

/// Numerical report on the Gibbs-Markov conditions of a scheme.
#[derive(Debug, Clone)]
pub struct GibbsMarkovReport {
    /// Minimum of `|DF|` over branches (condition: > 1).
    pub lambda_min: f64,
    /// Exponent used for the distortion quotients.
    pub holder_exponent: f64,
    /// Largest sampled quotient `|log g(u) - log g(v)| / |u - v|^eps`.
    pub holder_constant: f64,
    /// `Leb{R >= n}` for `n = 1..=depth_cap`.
    pub tail: Vec<f64>,
    /// Partial sums of `n * Leb{R = n}`.
    pub return_integral_partial: Vec<f64>,
    /// Last five partial sums agree to within 1%.
    pub tail_converged: bool,
    /// Branches whose pre-return images touch the singular point.
    pub condition_d_violations: usize,
    /// Smallest distance of any pre-return image to the singular point.
    pub min_distance_to_singularity: f64,
    /// Largest endpoint mismatch of `f^R(omega)` against `Y`.
    pub onto_defect: f64,
    /// Accepted mismatch: 1e-9, widened to the double-precision floor
    /// `|DF| * ulp` when a branch is thin enough that forward iteration of
    /// a one-ulp endpoint perturbation already exceeds 1e-9.
    pub onto_tolerance: f64,
    pub disjointness_violations: usize,
    pub branch_count: usize,
}

impl GibbsMarkovReport {
    pub fn passes(&self) -> bool {
        self.lambda_min > 1.0
            && self.condition_d_violations == 0
            && self.disjointness_violations == 0
            && self.onto_defect <= self.onto_tolerance
            && self.tail_converged
    }
}

/// Check conditions (a)-(d) on a built scheme by sampling each branch.
pub fn verify_gibbs_markov(
    scheme: &InducedScheme,
    map: &LorenzLikeMap,
    holder_exponent: f64,
    samples_per_branch: usize,
) -> Result<GibbsMarkovReport> {
    if scheme.branches.is_empty() {
        return Err(Error::InsufficientData("scheme has no branches".into()));
    }
    if !(holder_exponent > 0.0 && holder_exponent <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Holder exponent must lie in (0, 1], got {holder_exponent}"
        )));
    }
    let m = samples_per_branch.max(4);

    struct BranchStats {
        df_min: f64,
        holder: f64,
        d_violation: bool,
        min_dist: f64,
        onto_defect: f64,
    }

    let per_branch: Vec<Result<BranchStats>> = scheme
        .branches
        .par_iter()
        .map(|br| -> Result<BranchStats> {
            let r = br.return_time;
            // Interior sample points plus near-endpoint probes.
            let mut dfs = Vec::with_capacity(m);
            let mut images = Vec::with_capacity(m);
            for i in 0..m {
                let t = (i as f64 + 0.5) / m as f64;
                let x0 = br.left + t * br.length();
                let mut x = x0;
                let mut df = 1.0f64;
                for _ in 0..r {
                    df *= map.deriv(x)?;
                    x = map.eval(x)?;
                }
                dfs.push(df);
                images.push(x);
            }
            let df_min = dfs.iter().copied().fold(f64::INFINITY, f64::min);

            // Distortion quotients of log g = -log |DF o F^{-1}| over the
            // sampled image pairs.
            let mut holder: f64 = 0.0;
            for i in 0..m {
                for j in (i + 1)..m {
                    let dy = (images[i] - images[j]).abs();
                    if dy < 1e-14 {
                        continue;
                    }
                    let dl = (dfs[i].ln() - dfs[j].ln()).abs();
                    holder = holder.max(dl / dy.powf(holder_exponent));
                }
            }

            // Separation from the singularity before return.
            let mut d_violation = false;
            let mut min_dist = f64::INFINITY;
            let mut lo = br.left;
            let mut hi = br.right;
            for _ in 0..r {
                if lo <= 0.0 && 0.0 <= hi {
                    d_violation = true;
                    min_dist = 0.0;
                    break;
                }
                min_dist = min_dist.min(lo.abs().min(hi.abs()));
                lo = map.eval(lo)?;
                hi = map.eval(hi)?;
            }
            // After r steps (lo, hi) is the image on Y; endpoint match:
            let onto_defect = if d_violation {
                f64::INFINITY
            } else {
                (lo - scheme.y_left)
                    .abs()
                    .max((hi - scheme.y_right).abs())
            };
            Ok(BranchStats {
                df_min,
                holder,
                d_violation,
                min_dist,
                onto_defect,
            })
        })
        .collect();

    let mut lambda_min = f64::INFINITY;
    let mut holder_constant: f64 = 0.0;
    let mut condition_d_violations = 0;
    let mut min_distance = f64::INFINITY;
    let mut onto_defect: f64 = 0.0;
    for s in per_branch {
        let s = s?;
        lambda_min = lambda_min.min(s.df_min);
        holder_constant = holder_constant.max(s.holder);
        if s.d_violation {
            condition_d_violations += 1;
        } else {
            min_distance = min_distance.min(s.min_dist);
            onto_defect = onto_defect.max(s.onto_defect);
        }
    }

    let mut disjointness_violations = 0;
    for w in scheme.branches.windows(2) {
        if w[1].left < w[0].right - 1e-12 {
            disjointness_violations += 1;
        }
    }

    // Mean-value bound on the largest branch derivative, used for the
    // representability floor of the onto check.
    let df_mean_max = scheme
        .branches
        .iter()
        .map(|b| scheme.y_length() / b.length())
        .fold(0.0f64, f64::max);
    let onto_tolerance = (8.0 * f64::EPSILON * df_mean_max).max(1e-9);

    let (tail, _integral) = return_time_tail(scheme);
    let mass = scheme.mass_by_return_time();
    let mut partial = Vec::with_capacity(mass.len());
    let mut acc = 0.0;
    for (i, lm) in mass.iter().enumerate() {
        acc += (i + 1) as f64 * lm;
        partial.push(acc);
    }
    let tail_converged = if partial.len() >= 6 {
        let last = *partial.last().unwrap();
        let earlier = partial[partial.len() - 6];
        last > 0.0 && (last - earlier) <= 0.01 * last
    } else {
        false
    };

    Ok(GibbsMarkovReport {
        lambda_min,
        holder_exponent,
        holder_constant,
        tail,
        return_integral_partial: partial,
        tail_converged,
        condition_d_violations,
        min_distance_to_singularity: min_distance,
        onto_defect,
        onto_tolerance,
        disjointness_violations,
        branch_count: scheme.branches.len(),
    })
}

/// Tail masses `Leb{R >= n}` for `n = 1..=depth_cap` and their sum, which
/// equals the integral of `R` over the covered part of `Y`.
pub fn return_time_tail(scheme: &InducedScheme) -> (Vec<f64>, f64) {
    if scheme.branches.is_empty() {
        return (Vec::new(), 0.0);
    }
    let mass = scheme.mass_by_return_time();
    let mut tail = vec![0.0; mass.len()];
    let mut acc = 0.0;
    for n in (0..mass.len()).rev() {
        acc += mass[n];
        tail[n] = acc;
    }
    let integral: f64 = tail.iter().sum();
    (tail, integral)
}
