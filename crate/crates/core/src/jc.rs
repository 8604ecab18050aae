// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Damped Jaynes-Cummings qubit in a Lorentzian reservoir at zero temperature.
//!
//! The excited population obeys `ρ₁₁ = G²` with `G = e^{−λ₀t/2} h(t)`,
//! `D = √|λ₀² − 2γ₀λ₀|`, `x = Dt/2` and
//!
//! ```text
//! weak     (γ₀ < λ₀/2):  h = cosh x + (λ₀/D) sinh x
//! critical (γ₀ = λ₀/2):  h = 1 + λ₀t/2
//! strong   (γ₀ > λ₀/2):  h = cos x + (λ₀/D) sin x
//! ```
//!
//! The decay rate is `γ = −d ln ρ₁₁/dt` and the backflow rate is
//! `σ = ∂ₜρ₁₁ = −2γ₀λ₀ e^{−λ₀t} h s` with `s = sinh x/D`, `t/2`, `sin x/D`.
//! In the strong regime `h` first vanishes at `t_end = 2(π − atan(D/λ₀))/D`;
//! `γ` is positive before that point and only turns negative beyond it.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::Trajectory;
use crate::error::{contract, QslError, Result};
use crate::geometry::{ChartPoint, ChartTangent, MixedStateParam, ParameterChart};
use crate::par;
use crate::quad::{bisect, gauss_kronrod, golden_max};

/// Below `CRITICAL_RATIO · λ₀` the critical-regime limits are used.
pub const CRITICAL_RATIO: f64 = 1e-6;
const SCAN_POINTS: usize = 10_000;
const PSD_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Weak,
    Critical,
    Strong,
}

/// Reservoir parameters. `ω₀` only enters the spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JcParams {
    pub gamma0: f64,
    pub lambda0: f64,
    pub omega0: f64,
}

impl JcParams {
    pub fn new(gamma0: f64, lambda0: f64, omega0: f64) -> Result<Self> {
        if !(gamma0 > 0.0 && gamma0.is_finite()) || !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(contract(format!(
                "need gamma0 > 0 and lambda0 > 0, got {gamma0} and {lambda0}"
            )));
        }
        if !omega0.is_finite() {
            return Err(contract("omega0 must be finite"));
        }
        Ok(Self {
            gamma0,
            lambda0,
            omega0,
        })
    }

    /// `D = √|λ₀² − 2γ₀λ₀|`.
    pub fn d(&self) -> f64 {
        (self.lambda0 * (self.lambda0 - 2.0 * self.gamma0)).abs().sqrt()
    }

    pub fn regime(&self) -> Regime {
        if self.d() < CRITICAL_RATIO * self.lambda0 {
            Regime::Critical
        } else if 2.0 * self.gamma0 < self.lambda0 {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }

    /// First zero of `ρ₁₁` (strong regime only).
    pub fn domain_end(&self) -> Option<f64> {
        match self.regime() {
            Regime::Strong => {
                let d = self.d();
                Some(2.0 * (PI - (d / self.lambda0).atan()) / d)
            }
            _ => None,
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(contract(format!("time must be finite and non-negative, got {t}")));
        }
        Ok(())
    }

    /// `(e^{−λ₀t/2} h, e^{−λ₀t/2} s)` evaluated without overflow.
    fn damped_parts(&self, t: f64) -> (f64, f64) {
        let l = self.lambda0;
        match self.regime() {
            Regime::Critical => {
                let e = (-0.5 * l * t).exp();
                (e * (1.0 + 0.5 * l * t), e * 0.5 * t)
            }
            Regime::Weak => {
                let d = self.d();
                let grow = (0.5 * (d - l) * t).exp();
                let one_minus = -(-d * t).exp_m1();
                let one_plus = 2.0 - one_minus;
                let h = 0.5 * grow * (one_plus + (l / d) * one_minus);
                (h, 0.5 * grow * one_minus / d)
            }
            Regime::Strong => {
                let d = self.d();
                let e = (-0.5 * l * t).exp();
                let (s, c) = (0.5 * d * t).sin_cos();
                (e * (c + (l / d) * s), e * s / d)
            }
        }
    }
}

/// `γ(t)`, or `None` where `ρ₁₁` vanishes and the rate is singular.
///
/// Defined for all `t ≥ 0` through `γ = λ₀ − 2h′/h`; in the strong regime it is
/// negative on parts of every interval past [`JcParams::domain_end`].
pub fn decay_rate(t: f64, params: &JcParams) -> Option<f64> {
    if !(t >= 0.0) {
        return None;
    }
    let (g0, l) = (params.gamma0, params.lambda0);
    let value = match params.regime() {
        Regime::Critical => 2.0 * g0 * l * t / (2.0 + l * t),
        Regime::Weak => {
            let d = params.d();
            let th = (0.5 * d * t).tanh();
            2.0 * g0 * l * th / (d + l * th)
        }
        Regime::Strong => {
            let d = params.d();
            let (s, c) = (0.5 * d * t).sin_cos();
            let den = d * c + l * s;
            if den == 0.0 {
                return None;
            }
            2.0 * g0 * l * s / den
        }
    };
    value.is_finite().then_some(value)
}

/// Closed-form `ρ₁₁(t)`, valid for every `t ≥ 0`.
pub fn rho11_closed_form(t: f64, params: &JcParams) -> Result<f64> {
    params.check_time(t)?;
    let (g, _) = params.damped_parts(t);
    Ok(g * g)
}

/// `ρ₁₁ = exp(−∫₀ᵗ γ)` by adaptive quadrature.
///
/// Errors with [`QslError::BeyondDomain`] past the first zero of `ρ₁₁`.
pub fn rho11(t: f64, params: &JcParams) -> Result<f64> {
    params.check_time(t)?;
    if let Some(t_end) = params.domain_end() {
        if t > t_end {
            return Err(QslError::BeyondDomain { t, t_end });
        }
        if t == t_end {
            return Ok(0.0);
        }
    }
    let integral = gauss_kronrod(|s| decay_rate(s, params).unwrap_or(f64::INFINITY), 0.0, t, 1e-14, 1e-13)?;
    Ok((-integral).exp())
}

/// Backflow rate `σ = ∂ₜρ₁₁`, from the closed form (valid for every `t ≥ 0`).
pub fn sigma_backflow(t: f64, params: &JcParams) -> Result<f64> {
    params.check_time(t)?;
    let (g, s) = params.damped_parts(t);
    Ok(-2.0 * params.gamma0 * params.lambda0 * g * s)
}

/// Bloch `z = 2ρ₁₁ − 1`.
pub fn bloch_z(rho11: f64) -> f64 {
    2.0 * rho11 - 1.0
}

/// Lorentzian `J(ω) = γ₀λ₀ / 2π[(ω − ω₀)² + λ₀²]`.
pub fn lorentzian_spectral_density(omega: f64, params: &JcParams) -> f64 {
    let l = params.lambda0;
    params.gamma0 * l / (2.0 * PI * ((omega - params.omega0).powi(2) + l * l))
}

/// Decay rates at the start, midpoint and end of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRates {
    pub start: f64,
    pub mid: f64,
    pub end: f64,
}

impl StageRates {
    pub fn constant(gamma: f64) -> Self {
        Self {
            start: gamma,
            mid: gamma,
            end: gamma,
        }
    }
}

/// 2×2 density matrix in the basis `(|excited⟩, |ground⟩)`.
pub type Density = Matrix2<Complex64>;

/// `|excited⟩⟨excited|`.
pub fn excited_state() -> Density {
    Density::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
}

fn dissipator(rho: &Density, gamma: f64) -> Density {
    // σ₋ρσ₊ − ½{σ₊σ₋, ρ} with σ₋ = |g⟩⟨e|
    let ee = rho[(0, 0)];
    let coh = rho[(0, 1)];
    Density::new(-ee, -0.5 * coh, -0.5 * coh.conj(), ee) * Complex64::new(gamma, 0.0)
}

/// One classical Runge-Kutta step of `dρ/dt = γ(t)[σ₋ρσ₊ − ½{σ₊σ₋, ρ}]`.
pub fn lindblad_step(rho: &Density, rates: StageRates, dt: f64) -> Result<Density> {
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let k1 = dissipator(rho, rates.start);
    let k2 = dissipator(&(rho + k1 * half), rates.mid);
    let k3 = dissipator(&(rho + k2 * half), rates.mid);
    let k4 = dissipator(&(rho + k3 * full), rates.end);
    let next = rho + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
    check_density(&next)?;
    Ok(next)
}

fn check_density(rho: &Density) -> Result<()> {
    let a = rho[(0, 0)].re;
    let b = rho[(1, 1)].re;
    let off = rho[(0, 1)].norm();
    // smaller eigenvalue of a Hermitian 2×2
    let min_eig = 0.5 * (a + b) - (0.25 * (a - b).powi(2) + off * off).sqrt();
    if !min_eig.is_finite() || min_eig < PSD_FLOOR {
        return Err(QslError::IntegrationTolerance(format!(
            "density matrix lost positivity (min eigenvalue {min_eig})"
        )));
    }
    Ok(())
}

/// Evolves `rho0` from `t = 0` on a uniform step `dt`, returning `(t, ρ)` at
/// every step up to `t_max`. Stops short of a singular rate.
pub fn evolve_lindblad(params: &JcParams, rho0: &Density, t_max: f64, dt: f64) -> Result<Vec<(f64, Density)>> {
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(contract("need dt > 0 and t_max >= 0"));
    }
    let rate = |t: f64| {
        decay_rate(t, params).ok_or_else(|| QslError::IntegrationTolerance(format!("decay rate singular at t = {t}")))
    };
    let steps = (t_max / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut rho = *rho0;
    out.push((0.0, rho));
    for k in 0..steps {
        let t = k as f64 * dt;
        let rates = StageRates {
            start: rate(t)?,
            mid: rate(t + 0.5 * dt)?,
            end: rate(t + dt)?,
        };
        rho = lindblad_step(&rho, rates, dt)?;
        out.push(((k + 1) as f64 * dt, rho));
    }
    Ok(out)
}

/// Non-Markovianity `N = Σ ∫_{σ>0} σ dt` on `[0, t_max]`, i.e. the summed
/// increases of `ρ₁₁` over its backflow intervals.
pub fn non_markovianity(params: &JcParams, t_max: f64) -> Result<f64> {
    params.check_time(t_max)?;
    if t_max == 0.0 {
        return Ok(0.0);
    }
    let sigma = |t: f64| sigma_backflow(t, params).unwrap_or(0.0);
    // resolve every oscillation of h with many grid points
    let scale = params.d().max(params.lambda0);
    let h = (t_max / SCAN_POINTS as f64).min(PI / (16.0 * scale));
    let n = (t_max / h).ceil() as usize;
    let grid = |k: usize| (k as f64 * h).min(t_max);
    let mut total = 0.0;
    let mut rise_start: Option<f64> = None;
    let mut prev_t = grid(1).min(t_max);
    let mut prev = sigma(prev_t);
    if prev > 0.0 {
        rise_start = Some(0.0);
    }
    for k in 2..=n {
        let t = grid(k);
        let s = sigma(t);
        if prev <= 0.0 && s > 0.0 {
            rise_start = Some(bisect(sigma, prev_t, t, 1e-14)?);
        } else if prev > 0.0 && s <= 0.0 {
            let end = bisect(sigma, prev_t, t, 1e-14)?;
            if let Some(a) = rise_start.take() {
                total += rho11_closed_form(end, params)? - rho11_closed_form(a, params)?;
            }
        }
        prev_t = t;
        prev = s;
    }
    if let Some(a) = rise_start {
        total += rho11_closed_form(t_max, params)? - rho11_closed_form(a, params)?;
    }
    Ok(total.max(0.0))
}

/// Window searched for `|σ|_max`.
pub fn sigma_search_window(params: &JcParams) -> f64 {
    match params.regime() {
        Regime::Strong => params.domain_end().expect("strong regime has a domain end"),
        Regime::Weak => 10.0 / (params.lambda0 - params.d()).min(params.lambda0),
        Regime::Critical => 50.0 / params.lambda0,
    }
}

/// `(t*, |σ|_max)` on `[0, t_window]`: coarse scan, then golden-section refinement.
pub fn sigma_max(params: &JcParams, t_window: f64) -> Result<(f64, f64)> {
    params.check_time(t_window)?;
    let abs_sigma = |t: f64| sigma_backflow(t, params).map(f64::abs).unwrap_or(0.0);
    let h = t_window / SCAN_POINTS as f64;
    let (mut k_best, mut best) = (0, 0.0);
    for k in 0..=SCAN_POINTS {
        let v = abs_sigma(k as f64 * h);
        if v > best {
            best = v;
            k_best = k;
        }
    }
    let lo = (k_best.saturating_sub(1)) as f64 * h;
    let hi = ((k_best + 1).min(SCAN_POINTS)) as f64 * h;
    let (t_star, refined) = golden_max(abs_sigma, lo, hi, 1e-10);
    Ok(if refined >= best {
        (t_star, refined)
    } else {
        (k_best as f64 * h, best)
    })
}

/// Bound summary for the decaying qubit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JcQsl {
    pub regime: Regime,
    /// Always zero: the metric is singular at `ρ₁₁ = 1`, so the global speed
    /// diverges at `t = 0`.
    pub global_bound: f64,
    pub global_speed_diverged: bool,
    /// `1/|σ|_max` for the full decay `ρ₁₁: 1 → 0`.
    pub local_bound: f64,
    /// Same bound through the chart `z = 2ρ₁₁ − 1`: `2 / (2|σ|_max)`.
    pub z_chart_bound: f64,
    pub sigma_max: f64,
    pub t_sigma_max: f64,
    pub tau_qsl: f64,
    /// `1/γ₀`.
    pub tau_weak_formula: f64,
    /// `2/√(2γ₀λ₀ − λ₀²)`, strong regime only.
    pub tau_strong_formula: Option<f64>,
    pub domain_end: Option<f64>,
}

pub fn weak_formula(params: &JcParams) -> f64 {
    1.0 / params.gamma0
}

pub fn strong_formula(params: &JcParams) -> Option<f64> {
    let arg = 2.0 * params.gamma0 * params.lambda0 - params.lambda0 * params.lambda0;
    (arg > 0.0).then(|| 2.0 / arg.sqrt())
}

/// `τ_QSL = max(0, 1/|σ|_max)` with the asymptotic formulas attached.
pub fn qsl_jc(params: &JcParams) -> Result<JcQsl> {
    let (t_star, smax) = sigma_max(params, sigma_search_window(params))?;
    let local = 1.0 / smax;
    Ok(JcQsl {
        regime: params.regime(),
        global_bound: 0.0,
        global_speed_diverged: true,
        local_bound: local,
        z_chart_bound: 2.0 / (2.0 * smax),
        sigma_max: smax,
        t_sigma_max: t_star,
        tau_qsl: local,
        tau_weak_formula: weak_formula(params),
        tau_strong_formula: strong_formula(params),
        domain_end: params.domain_end(),
    })
}

/// `π min_t √(ρ₁₁(1 − ρ₁₁)) / |σ|` over `n` grid points on `[eps, t_window]`.
///
/// This is the global-branch candidate once the singular point `t = 0` is
/// cut away. Its `eps → 0` limit is `π/√(2γ₀λ₀)`, not zero.
pub fn global_branch_candidate(params: &JcParams, eps: f64, t_window: f64, n: usize) -> Result<f64> {
    if !(eps > 0.0 && t_window > eps) || n < 2 {
        return Err(contract("need 0 < eps < t_window and at least two points"));
    }
    let mut best = f64::INFINITY;
    for k in 0..n {
        let t = eps + (t_window - eps) * k as f64 / (n - 1) as f64;
        let r = rho11_closed_form(t, params)?;
        let s = sigma_backflow(t, params)?.abs();
        // 1 − ρ₁₁ by integrating σ avoids cancellation near ρ₁₁ = 1
        let lost = if r > 0.5 {
            -gauss_kronrod(|u| sigma_backflow(u, params).unwrap_or(0.0), 0.0, t, 0.0, 1e-13)?
        } else {
            1.0 - r
        };
        if s > 0.0 {
            best = best.min(PI * (r * lost).max(0.0).sqrt() / s);
        }
    }
    Ok(best)
}

/// One row of a coupling sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JcSweepRow {
    pub gamma0: f64,
    pub lambda0: f64,
    pub tau_qsl: f64,
    pub tau_weak_formula: f64,
    pub tau_strong_formula: Option<f64>,
    #[serde(rename = "N")]
    pub n: f64,
}

/// `τ_QSL` and `N` on the grid `gamma0s × lambda0s`, rows ordered by
/// `λ₀` then `γ₀`.
pub fn sweep_qsl(gamma0s: &[f64], lambda0s: &[f64], t_max: f64) -> Result<Vec<JcSweepRow>> {
    let points: Vec<(f64, f64)> = lambda0s
        .iter()
        .flat_map(|&l| gamma0s.iter().map(move |&g| (g, l)))
        .collect();
    par::map(&points, |&(g, l)| -> Result<JcSweepRow> {
        let p = JcParams::new(g, l, 0.0)?;
        let q = qsl_jc(&p)?;
        Ok(JcSweepRow {
            gamma0: g,
            lambda0: l,
            tau_qsl: q.tau_qsl,
            tau_weak_formula: q.tau_weak_formula,
            tau_strong_formula: q.tau_strong_formula,
            n: non_markovianity(&p, t_max)?,
        })
    })
    .into_iter()
    .collect()
}

/// Diagonal qubit charted by its excited population `ρ₁₁`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rho11Chart;

impl ParameterChart for Rho11Chart {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, lambda: &[f64]) -> Result<ChartPoint> {
        let p = lambda[0].clamp(0.0, 1.0);
        Ok(ChartPoint::Mixed(MixedStateParam::diagonal(vec![p, 1.0 - p])?))
    }

    fn analytic_tangent(&self, _lambda: &[f64], _mu: usize) -> Option<Result<ChartTangent>> {
        Some(Ok(diagonal_tangent(1.0)))
    }
}

/// Diagonal qubit charted by its Bloch coordinate `z = 2ρ₁₁ − 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BlochZChart;

impl ParameterChart for BlochZChart {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, lambda: &[f64]) -> Result<ChartPoint> {
        let p = (0.5 * (1.0 + lambda[0])).clamp(0.0, 1.0);
        Ok(ChartPoint::Mixed(MixedStateParam::diagonal(vec![p, 1.0 - p])?))
    }

    fn analytic_tangent(&self, _lambda: &[f64], _mu: usize) -> Option<Result<ChartTangent>> {
        Some(Ok(diagonal_tangent(0.5)))
    }
}

fn diagonal_tangent(rate: f64) -> ChartTangent {
    let zero = vec![Complex64::new(0.0, 0.0); 2];
    ChartTangent::Mixed {
        dp: vec![rate, -rate],
        dvectors: vec![zero.clone(), zero],
    }
}

/// Which coordinate a sampled trajectory records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcCoordinate {
    Rho11,
    Z,
}

/// Closed-form path on `times` with exact rates attached.
pub fn trajectory(params: &JcParams, times: &[f64], coordinate: JcCoordinate) -> Result<Trajectory> {
    let (scale, shift, name) = match coordinate {
        JcCoordinate::Rho11 => (1.0, 0.0, "rho11"),
        JcCoordinate::Z => (2.0, -1.0, "z"),
    };
    let mut samples = Vec::with_capacity(times.len());
    let mut speeds = Vec::with_capacity(times.len());
    for &t in times {
        samples.push(vec![scale * rho11_closed_form(t, params)? + shift]);
        speeds.push(vec![scale * sigma_backflow(t, params)?]);
    }
    Trajectory::new(times.to_vec(), samples, vec![name.into()])?.with_speeds(speeds)
}

/// `n + 1` uniform times on `[0, t_max]`.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_max * k as f64 / n.max(1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{evaluate_bounds, verify_bound, EndpointMetric};

    fn p(g: f64, l: f64) -> JcParams {
        JcParams::new(g, l, 0.0).unwrap()
    }

    #[test]
    fn params_validate_and_classify() {
        assert!(JcParams::new(0.0, 1.0, 0.0).is_err());
        assert!(JcParams::new(1.0, -1.0, 0.0).is_err());
        assert_eq!(p(0.1, 1.0).regime(), Regime::Weak);
        assert_eq!(p(0.5, 1.0).regime(), Regime::Critical);
        assert_eq!(p(3.0, 1.0).regime(), Regime::Strong);
        let q = p(50.0, 1.0);
        assert!((q.d() - 99f64.sqrt()).abs() < 1e-14);
        assert!((p(0.01, 1.0).d() - 0.98f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn decay_rate_examples() {
        for q in [p(0.01, 1.0), p(0.5, 1.0), p(50.0, 1.0)] {
            assert_eq!(decay_rate(0.0, &q), Some(0.0));
        }
        let q = p(0.01, 1.0);
        let g = decay_rate(50.0, &q).unwrap();
        let limit = 2.0 * 0.01 / (q.d() + 1.0);
        assert!((g - limit).abs() / limit < 1e-2);
        assert!((limit - 0.01).abs() / 0.01 < 1e-2);
        // sign change appears only past the first zero of ρ₁₁
        let q = p(50.0, 1.0);
        let t_end = q.domain_end().unwrap();
        for k in 1..1000 {
            assert!(decay_rate(t_end * k as f64 / 1000.0, &q).unwrap() > 0.0);
        }
        let negative = (1..2000).any(|k| decay_rate(t_end * (1.0 + k as f64 / 1000.0), &q).is_some_and(|g| g < 0.0));
        assert!(negative);
    }

    #[test]
    fn weak_rate_never_negative() {
        let q = p(0.3, 1.0);
        for k in 0..5000 {
            assert!(decay_rate(k as f64 * 0.05, &q).unwrap() >= 0.0);
            assert!(sigma_backflow(k as f64 * 0.05, &q).unwrap() <= 0.0);
        }
    }

    #[test]
    fn rho11_routes_agree() {
        for q in [p(0.01, 1.0), p(0.3, 1.0), p(0.5, 1.0), p(3.0, 1.0), p(50.0, 1.0)] {
            let t_top = q.domain_end().unwrap_or(30.0);
            for k in 0..=50 {
                let t = t_top * k as f64 / 50.0;
                let a = rho11(t, &q).unwrap();
                let b = rho11_closed_form(t, &q).unwrap();
                assert!((a - b).abs() < 1e-8, "{q:?} t={t}: {a} vs {b}");
            }
        }
        assert_eq!(rho11(0.0, &p(1.0, 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn first_zero_of_strong_population() {
        let q = p(3.0, 1.0);
        let t_end = q.domain_end().unwrap();
        assert!(rho11_closed_form(t_end, &q).unwrap() < 1e-28);
        assert!(matches!(rho11(t_end * 1.01, &q), Err(QslError::BeyondDomain { .. })));
    }

    #[test]
    fn markovian_limit() {
        let q = p(0.01, 1.0);
        for k in 0..=100 {
            let t = k as f64;
            let exact = (-0.01 * t).exp();
            assert!((rho11(t, &q).unwrap() - exact).abs() / exact < 0.02);
        }
    }

    #[test]
    fn sigma_is_minus_gamma_rho() {
        for q in [p(0.2, 1.0), p(0.5, 1.0), p(7.0, 1.0)] {
            for k in 0..40 {
                let t = 0.05 * k as f64;
                let s = sigma_backflow(t, &q).unwrap();
                let g = decay_rate(t, &q).unwrap();
                let r = rho11_closed_form(t, &q).unwrap();
                assert!((s + g * r).abs() < 1e-12, "{q:?} {t}");
            }
        }
        assert_eq!(sigma_backflow(0.0, &p(50.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn sigma_matches_numerical_derivative() {
        let q = p(4.0, 1.3);
        for k in 1..30 {
            let t = 0.1 * k as f64;
            let h = 1e-6;
            let fd = (rho11_closed_form(t + h, &q).unwrap() - rho11_closed_form(t - h, &q).unwrap()) / (2.0 * h);
            assert!((fd - sigma_backflow(t, &q).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn lindblad_examples() {
        let ground = Density::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        let next = lindblad_step(&ground, StageRates::constant(3.0), 0.1).unwrap();
        assert_eq!(next, ground);

        let mut rho = excited_state();
        let dt = 1e-3;
        for _ in 0..2000 {
            rho = lindblad_step(&rho, StageRates::constant(0.7), dt).unwrap();
        }
        assert!((rho[(0, 0)].re - (-1.4f64).exp()).abs() < 1e-8);
        assert!(((rho[(0, 0)] + rho[(1, 1)]).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lindblad_keeps_coherence_decay_and_positivity() {
        let h = Complex64::new(0.5, 0.0);
        let plus = Density::new(h, h, h, h);
        let mut rho = plus;
        for _ in 0..1000 {
            rho = lindblad_step(&rho, StageRates::constant(2.0), 1e-3).unwrap();
        }
        assert!((rho[(0, 1)].re - 0.5 * (-1.0f64).exp()).abs() < 1e-9);
        check_density(&rho).unwrap();
        let bad = Density::new(h, Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0), h);
        assert!(matches!(
            lindblad_step(&bad, StageRates::constant(0.0), 1e-3),
            Err(QslError::IntegrationTolerance(_))
        ));
    }

    #[test]
    fn lindblad_route_matches_rho11() {
        for q in [p(0.2, 1.0), p(5.0, 1.0)] {
            let t_max = q.domain_end().map_or(10.0, |t| 0.9 * t);
            let path = evolve_lindblad(&q, &excited_state(), t_max, 1e-4).unwrap();
            for (t, rho) in path.iter().step_by(100) {
                assert!((rho[(0, 0)].re - rho11(*t, &q).unwrap()).abs() < 1e-7);
                assert!(((rho[(0, 0)] + rho[(1, 1)]).re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_markovianity_threshold() {
        for g in [0.1, 0.4, 0.5] {
            assert_eq!(non_markovianity(&p(g, 1.0), 50.0).unwrap(), 0.0);
        }
        for g in [1.0, 10.0] {
            assert!(non_markovianity(&p(g, 1.0), 20.0).unwrap() > 1e-3);
        }
        let q = p(2.0, 1.0);
        let mut last = 0.0;
        for k in 1..40 {
            let n = non_markovianity(&q, 0.5 * k as f64).unwrap();
            assert!(n >= last - 1e-15);
            last = n;
        }
    }

    #[test]
    fn non_markovianity_matches_revival_height() {
        // at γ₀ = λ₀ the first revival peaks at t = 2π with ρ₁₁ = e^{−2π}
        let n = non_markovianity(&p(1.0, 1.0), 2.0 * PI + 0.5).unwrap();
        assert!((n - (-2.0 * PI).exp()).abs() < 1e-10, "{n}");
    }

    #[test]
    fn qsl_limits() {
        let weak = qsl_jc(&p(0.01, 1.0)).unwrap();
        assert_eq!(weak.global_bound, 0.0);
        assert!((weak.tau_qsl - 100.0).abs() / 100.0 < 0.05);
        let strong = qsl_jc(&p(100.0, 1.0)).unwrap();
        let formula = strong.tau_strong_formula.unwrap();
        assert!((formula - 2.0 / 199f64.sqrt()).abs() < 1e-15);
        assert!((strong.tau_qsl - formula).abs() / formula < 0.05);
        assert!((strong.z_chart_bound - strong.local_bound).abs() < 1e-12);
        assert!(qsl_jc(&p(0.5, 1.0)).unwrap().tau_strong_formula.is_none());
    }

    #[test]
    fn sampled_route_reproduces_local_bound() {
        let q = p(10.0, 1.0);
        let t_end = q.domain_end().unwrap();
        let times = uniform_times(t_end, 20_000);
        let a = trajectory(&q, &times, JcCoordinate::Rho11).unwrap();
        let b = trajectory(&q, &times, JcCoordinate::Z).unwrap();
        let ra = evaluate_bounds(&a, &Rho11Chart, EndpointMetric::Mixed).unwrap();
        let rb = evaluate_bounds(&b, &BlochZChart, EndpointMetric::Mixed).unwrap();
        assert!(ra.global_speed_diverged && ra.global_bound == 0.0);
        assert!((ra.local_bounds[0] - rb.local_bounds[0]).abs() < 1e-12);
        let exact = qsl_jc(&q).unwrap().tau_qsl;
        assert!((ra.tau_qsl - exact).abs() / exact < 1e-6);
        assert!(verify_bound(&a, &ra).holds);
    }

    #[test]
    fn global_branch_limit_is_finite() {
        for g in [0.3, 5.0, 50.0] {
            let q = p(g, 1.0);
            let v = global_branch_candidate(&q, 1e-6, 2e-6, 2).unwrap();
            let limit = PI / (2.0 * g).sqrt();
            assert!((v - limit).abs() / limit < 1e-4, "{v} vs {limit}");
        }
    }

    #[test]
    fn spectral_density_shape() {
        let q = JcParams::new(0.3, 0.7, 2.0).unwrap();
        let peak = lorentzian_spectral_density(2.0, &q);
        assert!((peak - 0.3 / (2.0 * PI * 0.7)).abs() < 1e-15);
        assert!((lorentzian_spectral_density(2.4, &q) - lorentzian_spectral_density(1.6, &q)).abs() < 1e-15);
        assert!((lorentzian_spectral_density(2.7, &q) - 0.5 * peak).abs() < 1e-15);
    }

    #[test]
    fn sweep_is_ordered_and_monotone() {
        let gammas = [0.01, 0.1, 0.4, 1.0, 5.0, 20.0];
        let rows = sweep_qsl(&gammas, &[0.5, 1.0], 20.0).unwrap();
        assert_eq!(rows.len(), 12);
        for chunk in rows.chunks(6) {
            for w in chunk.windows(2) {
                assert!(w[0].gamma0 < w[1].gamma0);
                assert!(w[0].tau_qsl > w[1].tau_qsl);
            }
        }
        assert!((rows[6].tau_qsl - 100.0).abs() / 100.0 < 0.05);
    }
}
