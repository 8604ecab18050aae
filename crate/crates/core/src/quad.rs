// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! One-dimensional quadrature and scalar search helpers.

use crate::error::{contract, Result};

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`.
///
/// Handles integrable endpoint singularities such as `1/sqrt(b - x)`. Nodes
/// never touch the endpoints. Refines by halving the step until two successive
/// levels agree to `rel_tol`.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (lo, hi) = (a.min(b), a.max(b));
    tanh_sinh_with_gaps(|x, _, _| if x > lo && x < hi { f(x) } else { Ok(0.0) }, a, b, rel_tol)
}

/// As [`tanh_sinh`], but also passes `x − a` and `b − x` computed without
/// cancellation, so integrands singular at an endpoint can keep full
/// precision where `x` itself rounds onto the endpoint.
pub fn tanh_sinh_with_gaps<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64, f64, f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return ts_core(&mut |x, l, r| f(x, r, l), b, a, rel_tol).map(|v| -v);
    }
    ts_core(&mut f, a, b, rel_tol)
}

fn ts_core(f: &mut dyn FnMut(f64, f64, f64) -> Result<f64>, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let t_max = 3.5_f64;
    let pi2 = std::f64::consts::FRAC_PI_2;

    // One node pair at abscissa parameter t: returns weight * (f(left) + f(right)).
    let mut pair = |t: f64| -> Result<f64> {
        let u = pi2 * t.sinh();
        let cosh_u = u.cosh();
        let w = pi2 * t.cosh() / (cosh_u * cosh_u);
        // distance of the node from the nearest endpoint, in units of `half`
        let delta = 2.0 / ((2.0 * u).exp() + 1.0);
        if delta == 0.0 || w == 0.0 {
            return Ok(0.0);
        }
        let gap = half * delta;
        if gap <= 0.0 {
            return Ok(0.0);
        }
        let far = 2.0 * half - gap;
        let mut s = f(a + gap, gap, far)?;
        if t != 0.0 {
            s += f(b - gap, far, gap)?;
        }
        Ok(w * s)
    };

    let mut h = 0.5;
    let mut sum = pair(0.0)?;
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += pair(k as f64 * h)?;
        k += 1;
    }
    let mut estimate = half * h * sum;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        let mut add = 0.0;
        while (k as f64) * h <= t_max {
            add += pair(k as f64 * h)?;
            k += 2;
        }
        sum += add;
        let next = half * h * sum;
        let converged = (next - estimate).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE);
        estimate = next;
        if converged {
            break;
        }
    }
    Ok(estimate)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive 15-point Gauss-Kronrod quadrature.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate falls below `max(abs_tol, rel_tol * |I|)`.
pub fn gauss_kronrod<F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(contract("quadrature limits must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut segments = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = segments.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
    Ok(segments.iter().map(|s| s.2).sum())
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    while (b - a) > rel_tol * scale {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection root of `f` on a bracketing interval `[a, b]`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, abs_tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(contract("bisection interval does not bracket a root"));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= abs_tol || m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // ∫_0^1 dx / sqrt(1 - x^2) = π/2
        let v = tanh_sinh_with_gaps(|x, _, r| Ok(1.0 / (r * (1.0 + x)).sqrt()), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12, "{v}");
        // without the gap the rounding of x onto 1 costs about sqrt(eps)
        let v = tanh_sinh(|x| Ok(1.0 / ((1.0 - x) * (1.0 + x)).sqrt()), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn tanh_sinh_reversed_limits() {
        let v = tanh_sinh(|x| Ok(x * x), 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_kronrod_smooth() {
        let v = gauss_kronrod(|x| x.sin(), 0.0, PI, 1e-14, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = gauss_kronrod(|x| (-x * x).exp(), -10.0, 10.0, 1e-14, 1e-14).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn golden_and_bisect() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && (fx - 2.0).abs() < 1e-12);
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-9).is_err());
    }
}
