//! Poincaré section events at successive z-maxima.
//!
//! The section is the surface `z' = x y - beta z = 0` crossed downward
//! (`z'' < 0`), i.e. local maxima of the z coordinate. This is well defined
//! without linearising coordinates and reproduces the classical
//! one-dimensional return data of the flow. Crossing times are refined on
//! the dense output by bisection plus a secant polish.

use super::integrate::{DenseSegment, Dopri5, IntegratorConfig, OdeSystem};
use super::lorenz::{lorenz_vector_field, LorenzParams, State3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// Section function decreasing through zero (a z-maximum).
    Downward,
    /// Section function increasing through zero (a z-minimum).
    Upward,
}

/// One crossing of the section.
#[derive(Debug, Clone, Copy)]
pub struct SectionEvent {
    /// Absolute crossing time along the integration.
    pub t_cross: f64,
    /// State on the section.
    pub point: State3,
    /// Time elapsed since the previous event (or the initial condition).
    pub flight_time: f64,
    pub direction: CrossingDirection,
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SectionConfig {
    /// Give up if no crossing is found within this much time
    /// (signals proximity to the stable manifold of the origin).
    pub time_cap: f64,
    /// Crossing time refinement tolerance.
    pub time_tol: f64,
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self {
            time_cap: 200.0,
            time_tol: 1e-10,
        }
    }
}

struct LorenzSys {
    p: LorenzParams,
}

impl OdeSystem<3> for LorenzSys {
    fn eval(&self, _t: f64, y: &[f64; 3], dydt: &mut [f64; 3]) {
        *dydt = lorenz_vector_field(y, &self.p);
    }
}

fn zdot(s: &State3, p: &LorenzParams) -> f64 {
    s[0] * s[1] - p.beta * s[2]
}

/// Scan one dense segment for the earliest strict + -> - sign change of
/// `z'`. Returns the refined crossing time if found.
fn scan_segment(seg: &DenseSegment<3>, p: &LorenzParams, time_tol: f64) -> Option<f64> {
    const SAMPLES: usize = 8;
    let mut prev_t = seg.t0;
    let mut prev_g = zdot(&seg.eval(seg.t0), p);
    for i in 1..=SAMPLES {
        let t = seg.t0 + (seg.t1 - seg.t0) * i as f64 / SAMPLES as f64;
        let g = zdot(&seg.eval(t), p);
        if prev_g > 0.0 && g <= 0.0 {
            return Some(refine(seg, p, prev_t, t, prev_g, g, time_tol));
        }
        prev_t = t;
        prev_g = g;
    }
    None
}

fn refine(
    seg: &DenseSegment<3>,
    p: &LorenzParams,
    mut a: f64,
    mut b: f64,
    mut ga: f64,
    mut gb: f64,
    time_tol: f64,
) -> f64 {
    // Bisect to a narrow bracket, then polish with secant steps.
    for _ in 0..90 {
        if b - a <= time_tol * 1e-3 {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = zdot(&seg.eval(m), p);
        if gm > 0.0 {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
    }
    let mut t = if gb != ga { b - gb * (b - a) / (gb - ga) } else { 0.5 * (a + b) };
    for _ in 0..3 {
        let g = zdot(&seg.eval(t), p);
        let dt = 1e-8 * (seg.t1 - seg.t0).abs().max(1e-12);
        let gd = (zdot(&seg.eval(t + dt), p) - g) / dt;
        if gd.abs() > 0.0 {
            let t_new = (t - g / gd).clamp(a, b);
            if (t_new - t).abs() < time_tol * 1e-3 {
                t = t_new;
                break;
            }
            t = t_new;
        }
    }
    t
}

/// First future z-maximum crossing from `s0`. A crossing at the start
/// itself does not count: the bracket must open with `z' > 0` strictly.
pub fn next_section_crossing(
    s0: State3,
    p: &LorenzParams,
    int_cfg: IntegratorConfig,
    cfg: SectionConfig,
) -> Result<SectionEvent> {
    let sys = LorenzSys { p: *p };
    let mut stepper = Dopri5::new(&sys, 0.0, s0, int_cfg)?;
    loop {
        if stepper.t > cfg.time_cap {
            return Err(Error::CrossingTimeout {
                time_cap: cfg.time_cap,
            });
        }
        let seg = stepper.step()?;
        if let Some(t_cross) = scan_segment(&seg, p, cfg.time_tol) {
            if t_cross > 0.0 {
                let point = seg.eval(t_cross);
                return Ok(SectionEvent {
                    t_cross,
                    point,
                    flight_time: t_cross,
                    direction: CrossingDirection::Downward,
                });
            }
        }
    }
}

/// Stream of successive z-maximum events along one orbit.
///
/// `burn_in` events are discarded before collecting `count` events; flight
/// times are the gaps between consecutive kept crossings.
pub fn section_events(
    s0: State3,
    count: usize,
    burn_in: usize,
    p: &LorenzParams,
    int_cfg: IntegratorConfig,
    cfg: SectionConfig,
) -> Result<Vec<SectionEvent>> {
    let sys = LorenzSys { p: *p };
    let mut stepper = Dopri5::new(&sys, 0.0, s0, int_cfg)?;
    let mut events = Vec::with_capacity(count);
    let mut found = 0usize;
    let mut t_prev_event = 0.0;
    let mut t_last_check = 0.0;
    while events.len() < count {
        if stepper.t - t_last_check > cfg.time_cap {
            return Err(Error::CrossingTimeout {
                time_cap: cfg.time_cap,
            });
        }
        let seg = stepper.step()?;
        if let Some(t_cross) = scan_segment(&seg, p, cfg.time_tol) {
            t_last_check = t_cross;
            found += 1;
            if found > burn_in {
                events.push(SectionEvent {
                    t_cross,
                    point: seg.eval(t_cross),
                    flight_time: t_cross - t_prev_event,
                    direction: CrossingDirection::Downward,
                });
            }
            t_prev_event = t_cross;
        }
    }
    Ok(events)
}
