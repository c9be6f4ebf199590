//! Adaptive Dormand–Prince 5(4) integrator with exact landing on output
//! points and an optional step-acceptance monitor.

use serde::Serialize;

use crate::error::{invalid, Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Upper bound on the step size.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

/// Step statistics of one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Rejections requested by the monitor.
    pub monitor_rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate y' = f(t, y) from `t0` and return the state at every time in
/// `outputs` (non-decreasing, ≥ t0).
///
/// `monitor(h, previous, candidate)` may veto an otherwise acceptable step of
/// size `h`; the step is then halved.
pub fn integrate<F, M>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
    mut monitor: M,
) -> Result<(Vec<Vec<f64>>, StepStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    M: FnMut(f64, &[f64], &[f64]) -> bool,
{
    if !(opts.rtol > 0.0) || !(opts.atol >= 0.0) {
        return Err(invalid("tolerance", "rtol must be positive and atol non-negative"));
    }
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(invalid("outputs", "must be non-decreasing and not before t0"));
    }
    let n = y0.len();
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut out = Vec::with_capacity(outputs.len());

    let t_end = outputs.last().copied().unwrap_or(t0);
    if t_end == t0 {
        out.extend(outputs.iter().map(|_| y.clone()));
        return Ok((out, stats));
    }

    rhs(t, &y, &mut k[0])?;
    stats.rhs_evals += 1;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => initial_step(&mut rhs, t, &y, &k[0], opts, t_end - t0, &mut stats)?,
    }
    .min(opts.h_max);

    for &target in outputs {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(SimError::TooManySteps {
                    t,
                    max_steps: opts.max_steps,
                });
            }
            let remaining = target - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            let h_step = if landing { remaining } else { h };
            if h_step <= 1e-14 * t.abs().max(1e-300) || !h_step.is_finite() {
                return Err(SimError::StepUnderflow { t, h: h_step });
            }

            macro_rules! stage {
                ($dst:expr, $c:expr, $($a:expr => $ki:expr),+) => {{
                    for i in 0..n {
                        tmp[i] = y[i] + h_step * (0.0 $(+ $a * k[$ki][i])+);
                    }
                    let (_, rest) = k.split_at_mut($dst);
                    rhs(t + $c * h_step, &tmp, &mut rest[0])?;
                    stats.rhs_evals += 1;
                }};
            }
            stage!(1, C2, A21 => 0);
            stage!(2, C3, A31 => 0, A32 => 1);
            stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
            stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
            stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
            for i in 0..n {
                ynew[i] = y[i]
                    + h_step
                        * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
            }
            let t_new = if landing { target } else { t + h_step };
            {
                let (_, rest) = k.split_at_mut(6);
                rhs(t_new, &ynew, &mut rest[0])?;
                stats.rhs_evals += 1;
            }
            let mut err = 0.0;
            for i in 0..n {
                let e = h_step
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                        + E7 * k[6][i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                stats.rejected += 1;
                h = 0.25 * h_step;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                if !monitor(h_step, &y, &ynew) {
                    stats.rejected += 1;
                    stats.monitor_rejected += 1;
                    h = 0.5 * h_step;
                    continue;
                }
                stats.accepted += 1;
                t = t_new;
                std::mem::swap(&mut y, &mut ynew);
                k.swap(0, 6);
                let proposal = (h_step * factor).min(opts.h_max);
                h = if landing { proposal.max(h.min(opts.h_max)) } else { proposal };
            } else {
                stats.rejected += 1;
                h = h_step * factor.min(1.0);
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    opts: &OdeOptions,
    span: f64,
    stats: &mut StepStats,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm = |v: &[f64]| {
        (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; n];
    rhs(t + h0, &y1, &mut f1)?;
    stats.rhs_evals += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (1e-6f64).max(h0 * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}
