// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

use crate::error::{QslError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

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

/// Adaptive stepper carrying its step-size suggestion between calls.
#[derive(Debug, Clone)]
pub struct DormandPrince {
    pub tol: Tolerance,
    pub h_min: f64,
    h: f64,
}

impl DormandPrince {
    pub fn new(tol: Tolerance, h_init: f64) -> Self {
        Self {
            tol,
            h_min: 1e-14,
            h: h_init,
        }
    }

    /// One trial step. Returns the fifth-order solution and the scaled error norm.
    fn trial<const N: usize, F>(&self, f: &mut F, t: f64, y: &[f64; N], h: f64) -> Result<([f64; N], f64)>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let mut k = [[0.0; N]; 7];
        k[0] = f(t, y)?;
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        let mut y5 = *y;
        let mut err = 0.0;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y5[i].abs());
            let e = h * (d5 - d4) / sc;
            err += e * e;
        }
        Ok((y5, (err / N as f64).sqrt()))
    }

    /// Integrates from `(t0, y0)` to exactly `t1 > t0`.
    pub fn integrate_to<const N: usize, F>(&mut self, f: &mut F, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let mut t = t0;
        let mut y = y0;
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(y);
        }
        let mut h = self.h.min(span);
        loop {
            let remaining = t1 - t;
            if remaining <= span * 1e-15 {
                break;
            }
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let (y_new, err) = self.trial(f, t, &y, step)?;
            if err <= 1.0 {
                t = if last { t1 } else { t + step };
                y = y_new;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // keep the suggestion from a truncated final step
                if !last {
                    h = step * grow;
                } else {
                    h = h.max(step * grow);
                }
                if last {
                    break;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.h_min {
                    return Err(QslError::StepSizeUnderflow { t, h });
                }
            }
        }
        self.h = h;
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let mut dp = DormandPrince::new(Tolerance::default(), 1e-2);
        let mut f = |_t: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        let y = dp
            .integrate_to(&mut f, 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn exponential_decay_chunks() {
        let mut dp = DormandPrince::new(Tolerance::default(), 1e-3);
        let mut f = |_t: f64, y: &[f64; 1]| Ok([-3.0 * y[0]]);
        let mut y = [1.0];
        let mut t = 0.0;
        for _ in 0..100 {
            y = dp.integrate_to(&mut f, t, y, t + 0.01).unwrap();
            t += 0.01;
        }
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn rhs_errors_propagate() {
        let mut dp = DormandPrince::new(Tolerance::default(), 1e-3);
        let mut f = |t: f64, _y: &[f64; 1]| {
            if t > 0.5 {
                Err(QslError::Unsupported("stop".into()))
            } else {
                Ok([1.0])
            }
        };
        assert!(dp.integrate_to(&mut f, 0.0, [0.0], 1.0).is_err());
    }
}
