//! Adaptive embedded Runge-Kutta integration with dense output.
//!
//! The scheme is the classical Dormand-Prince 5(4) pair (7 stages, FSAL)
//! with the standard quartic interpolant for continuous output. Flight
//! times near the stable manifold of the origin are long, so the default
//! relative tolerance is tight (1e-10) to keep error from accumulating
//! across slow passages.

use crate::error::{Error, Result};

/// A first-order ODE system of fixed dimension `N`.
pub trait OdeSystem<const N: usize> {
    fn eval(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]);
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    fn eval(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]) {
        self(t, y, dydt)
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct IntegratorConfig {
    /// Relative tolerance per step.
    pub rtol: f64,
    /// Absolute tolerance per step.
    pub atol: f64,
    /// Initial step size; chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Largest step size allowed.
    pub h_max: f64,
    /// Cap on accepted steps per call.
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive, got rtol = {}, atol = {}",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// b_high - b_low, applied to k1..k7 for the embedded error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Quartic dense-output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Continuous (quartic) representation of one accepted step.
#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    /// Evaluate the interpolant at `t` in `[t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let theta1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + theta1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + theta1 * self.rcont[4][i])));
        }
        out
    }
}

/// Stepper state for one integration run.
pub struct Dopri5<'a, S, const N: usize> {
    sys: &'a S,
    cfg: IntegratorConfig,
    pub t: f64,
    pub y: [f64; N],
    k1: [f64; N], // FSAL derivative at (t, y)
    h: f64,
    steps: usize,
    rejected_in_a_row: usize,
    pub max_err_estimate: f64,
}

impl<'a, S: OdeSystem<N>, const N: usize> Dopri5<'a, S, N> {
    pub fn new(sys: &'a S, t0: f64, y0: [f64; N], cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        for v in &y0 {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite initial state component {v}"
                )));
            }
        }
        let mut k1 = [0.0; N];
        sys.eval(t0, &y0, &mut k1);
        let h = match cfg.h_init {
            Some(h) => h,
            None => initial_step(sys, t0, &y0, &k1, &cfg),
        };
        Ok(Self {
            sys,
            cfg,
            t: t0,
            y: y0,
            k1,
            h: h.min(cfg.h_max),
            steps: 0,
            rejected_in_a_row: 0,
            max_err_estimate: 0.0,
        })
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Take one accepted step (retrying rejected ones internally) and
    /// return its dense segment.
    pub fn step(&mut self) -> Result<DenseSegment<N>> {
        loop {
            if self.steps >= self.cfg.max_steps {
                return Err(Error::MaxStepsExceeded(self.cfg.max_steps));
            }
            let h = self.h.min(self.cfg.h_max);
            if !(h > self.t.abs().max(1.0) * 1e-14) || !h.is_finite() {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }

            let mut k = [[0.0; N]; 7];
            k[0] = self.k1;
            let mut y_stage = [0.0; N];
            for s in 1..7 {
                for i in 0..N {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    y_stage[i] = self.y[i] + h * acc;
                }
                self.sys.eval(self.t + C[s] * h, &y_stage, &mut k[s]);
            }
            // Stage 7 uses the 5th-order weights, so y_stage is the new y.
            let y_new = y_stage;
            let k_new = k[6];

            let mut err_sq = 0.0;
            for i in 0..N {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let sc = self.cfg.atol + self.cfg.rtol * self.y[i].abs().max(y_new[i].abs());
                let q = h * e / sc;
                err_sq += q * q;
            }
            let err = (err_sq / N as f64).sqrt();

            let fac = 0.9 * err.powf(-0.2);
            let facmax = if self.rejected_in_a_row > 0 { 1.0 } else { 10.0 };
            let scale = fac.clamp(0.2, facmax);

            if err <= 1.0 {
                let mut seg = DenseSegment {
                    t0: self.t,
                    t1: self.t + h,
                    rcont: [[0.0; N]; 5],
                };
                for i in 0..N {
                    let ydiff = y_new[i] - self.y[i];
                    let bspl = h * k[0][i] - ydiff;
                    seg.rcont[0][i] = self.y[i];
                    seg.rcont[1][i] = ydiff;
                    seg.rcont[2][i] = bspl;
                    seg.rcont[3][i] = ydiff - h * k_new[i] - bspl;
                    let mut dsum = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        dsum += D[j] * kj[i];
                    }
                    seg.rcont[4][i] = h * dsum;
                }

                self.t += h;
                self.y = y_new;
                self.k1 = k_new;
                self.h = h * scale;
                self.steps += 1;
                self.rejected_in_a_row = 0;
                self.max_err_estimate = self.max_err_estimate.max(err);
                return Ok(seg);
            }

            self.rejected_in_a_row += 1;
            if self.rejected_in_a_row > 200 {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            self.h = h * scale;
        }
    }

    /// Integrate to exactly `t_end`, returning the state there.
    /// The final partial step is evaluated on the dense output.
    pub fn run_to(&mut self, t_end: f64) -> Result<[f64; N]> {
        while self.t < t_end {
            let seg = self.step()?;
            if seg.t1 >= t_end {
                return Ok(seg.eval(t_end));
            }
        }
        Ok(self.y)
    }
}

/// Hairer-style automatic initial step size.
fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    cfg: &IntegratorConfig,
) -> f64 {
    let sc = |i: usize| cfg.atol + cfg.rtol * y0[i].abs();
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        d0 += (y0[i] / sc(i)).powi(2);
        d1 += (f0[i] / sc(i)).powi(2);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let mut f1 = [0.0; N];
    sys.eval(t0 + h0, &y1, &mut f1);
    let mut d2 = 0.0;
    for i in 0..N {
        d2 += ((f1[i] - f0[i]) / sc(i)).powi(2);
    }
    d2 = (d2 / N as f64).sqrt() / h0;
    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.h_max)
}

/// A sampled orbit of a 3D flow, with integrator metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 3]>,
    pub steps: usize,
    /// Largest scaled local error estimate among accepted steps (<= 1).
    pub max_error_estimate: f64,
}

impl Trajectory {
    pub fn last(&self) -> (f64, [f64; 3]) {
        (*self.times.last().unwrap(), *self.states.last().unwrap())
    }
}

/// Integrate a 3D system for `duration`, sampling at accepted steps and at
/// the exact final time.
pub fn integrate<S: OdeSystem<3>>(
    sys: &S,
    s0: [f64; 3],
    duration: f64,
    cfg: IntegratorConfig,
) -> Result<Trajectory> {
    integrate_sampled(sys, s0, duration, None, cfg)
}

/// Integrate a 3D system, sampling the dense output every `dt` when given
/// (accepted steps otherwise).
pub fn integrate_sampled<S: OdeSystem<3>>(
    sys: &S,
    s0: [f64; 3],
    duration: f64,
    dt: Option<f64>,
    cfg: IntegratorConfig,
) -> Result<Trajectory> {
    if !(duration > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let mut stepper = Dopri5::new(sys, 0.0, s0, cfg)?;
    let mut times = vec![0.0];
    let mut states = vec![s0];
    match dt {
        None => {
            while stepper.t < duration {
                let seg = stepper.step()?;
                if seg.t1 >= duration {
                    times.push(duration);
                    states.push(seg.eval(duration));
                    break;
                }
                times.push(seg.t1);
                states.push(stepper.y);
            }
        }
        Some(dt) => {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "sample spacing must be positive, got {dt}"
                )));
            }
            let mut next = dt;
            while stepper.t < duration {
                let seg = stepper.step()?;
                while next <= seg.t1 && next <= duration {
                    times.push(next);
                    states.push(seg.eval(next));
                    next += dt;
                }
                if seg.t1 >= duration {
                    if *times.last().unwrap() < duration {
                        times.push(duration);
                        states.push(seg.eval(duration));
                    }
                    break;
                }
            }
        }
    }
    Ok(Trajectory {
        times,
        states,
        steps: stepper.steps_taken(),
        max_error_estimate: stepper.max_err_estimate,
    })
}
