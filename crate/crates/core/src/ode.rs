//! Embedded Runge–Kutta 5(4) integrator (Dormand–Prince coefficients) with
//! cubic Hermite dense output.
//!
//! The step controller is deterministic: the same system, initial data and
//! options always produce the same accepted step sequence.

use crate::error::{Error, Result};

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

/// Adapts a closure into an [`OdeSystem`].
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> FnSystem<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64])> OdeSystem for FnSystem<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.f)(t, y, dy)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    /// Absolute and relative tolerance on the local error estimate.
    pub tol: f64,
    /// Initial step; estimated from the field when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Options {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            h0: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

/// Returned by an observer to stop the integration early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Accepted step endpoints with their derivatives; enough for Hermite
/// interpolation anywhere in `[t_start, t_final]`.
#[derive(Clone, Debug)]
pub struct Solution {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
    /// Set when an observer stopped the run before `t_end`.
    pub stopped_early: bool,
    pub rejected_steps: usize,
}

impl Solution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("solution has the initial point")
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    fn deriv(&self, k: usize) -> &[f64] {
        &self.derivs[k * self.dim..(k + 1) * self.dim]
    }

    /// Dense output at `t`, clamped to the integrated interval.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.len();
        if n == 1 || t <= self.times[0] {
            return self.state(0).to_vec();
        }
        if t >= self.t_final() {
            return self.final_state().to_vec();
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let (y0, y1) = (self.state(k), self.state(k + 1));
        let (d0, d1) = (self.deriv(k), self.deriv(k + 1));
        (0..self.dim)
            .map(|i| h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i])
            .collect()
    }

    /// Dense output at each requested time.
    pub fn sample(&self, times: &[f64]) -> Vec<Vec<f64>> {
        times.iter().map(|&t| self.eval(t)).collect()
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
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
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates from `t0` to `t_end`.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Options,
) -> Result<Solution> {
    integrate_observed(sys, t0, y0, t_end, opts, |_, _| Control::Continue)
}

/// Integrates from `t0` to `t_end`, calling `observe` after every accepted
/// step. The observer may stop the run.
pub fn integrate_observed<S, O>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Options,
    mut observe: O,
) -> Result<Solution>
where
    S: OdeSystem + ?Sized,
    O: FnMut(f64, &[f64]) -> Control,
{
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "initial state has length {}, system dimension is {n}",
            y0.len()
        )));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidArgument("t_end must exceed t0".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }

    let mut k = vec![vec![0.0; n]; 7];
    let mut y = y0.to_vec();
    let mut t = t0;
    sys.rhs(t, &y, &mut k[0]);
    check_finite(&k[0], t)?;

    let mut sol = Solution {
        dim: n,
        times: vec![t0],
        states: y.clone(),
        derivs: k[0].clone(),
        stopped_early: false,
        rejected_steps: 0,
    };
    if observe(t, &y) == Control::Stop {
        sol.stopped_early = true;
        return Ok(sol);
    }

    let span = t_end - t0;
    let mut h = opts
        .h0
        .unwrap_or_else(|| initial_step(sys, t0, &y, &k[0], opts.tol, span))
        .min(opts.h_max)
        .min(span);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut steps = 0usize;

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        for s in 1..7 {
            for i in 0..n {
                let acc: f64 = (0..s).map(|j| A[s][j] * k[j][i]).sum();
                stage[i] = y[i] + h * acc;
            }
            sys.rhs(t + C[s] * h, &stage, &mut k[s]);
        }
        // Stage 7 is evaluated at the fifth-order solution (FSAL).
        for i in 0..n {
            y_new[i] = y[i] + h * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>();
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let e = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
            let scale = opts.tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            // Treat as a failed step; shrink hard.
            sol.rejected_steps += 1;
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y.copy_from_slice(&y_new);
            // FSAL: k[6] is f(t + h, y_new).
            let fsal = k[6].clone();
            check_finite(&fsal, t)?;
            k[0].copy_from_slice(&fsal);
            sol.times.push(t);
            sol.states.extend_from_slice(&y);
            sol.derivs.extend_from_slice(&k[0]);
            steps += 1;
            if observe(t, &y) == Control::Stop {
                sol.stopped_early = t < t_end;
                break;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(opts.h_max);
        } else {
            sol.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(sol)
}

fn check_finite(v: &[f64], t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("derivative at t = {t}")))
    }
}

/// Starting step from the usual two-evaluation estimate.
fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    tol: f64,
    span: f64,
) -> f64 {
    let n = y0.len();
    let scale: Vec<f64> = y0.iter().map(|y| tol * (1.0 + y.abs())).collect();
    let norm = |v: &[f64]| {
        (v.iter()
            .zip(&scale)
            .map(|(x, s)| (x / s).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).max(1e-12 * span)
}
