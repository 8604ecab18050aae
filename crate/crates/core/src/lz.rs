// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Nonlinear Landau-Zener two-mode model on the Bloch sphere.
//!
//! With `H = ½[Γ(t) + c(|ψ₂|² − |ψ₁|²)] σ_z + ½ v σ_x` and the Bloch angles
//! `η = cos χ = |ψ₁|² − |ψ₂|²`, `φ = φ₂ − φ₁`, the dynamics reduce to
//!
//! ```text
//! dχ/dt = −v sin φ
//! dφ/dt = Γ − cos χ (c + v cos φ / sin χ)
//! ```
//!
//! and every solution keeps `sin χ (c + f) + 2v cos φ = 0` with
//! `f = (2F + C₀)/sin²χ`, `F = ∫_{η₀}^{η} Γ dη′`,
//! `C₀ = −2v sin χ₀ cos φ₀ − c(1 − η₀²)`.
//!
//! The brachistochrone holds `φ = ∓π/2` fixed, moves χ at the full rate `v`,
//! and needs the feedback bias `Γ = c cos χ` between two instantaneous phase
//! kicks.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::bounds::Trajectory;
use crate::error::{contract, QslError, Result};
use crate::ode::{DormandPrince, Tolerance};
use crate::quad::{bisect, tanh_sinh_with_gaps};

/// Distance from the poles at which χ is clamped during integration.
pub const POLE_CLAMP: f64 = 1e-9;
const POLE_SIN: f64 = 1e-12;
const POLE_COS_PHI: f64 = 1e-9;

/// Bias schedule `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Protocol {
    Constant(f64),
    /// `Γ = c cos χ`, evaluated on the current state.
    OptimalFeedback,
    /// Piecewise-linear in time, held constant outside the table.
    TimeSeries {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Protocol {
    pub fn time_series(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(contract("time series needs matching, non-empty time and value columns"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(contract("time series times must be strictly increasing"));
        }
        Ok(Protocol::TimeSeries { times, values })
    }

    /// Linear ramp `Γ(t) = start + slope·t` on `[0, t_end]`.
    pub fn ramp(start: f64, slope: f64, t_end: f64) -> Result<Self> {
        Self::time_series(vec![0.0, t_end], vec![start, start + slope * t_end])
    }

    pub fn gamma(&self, t: f64, chi: f64, c: f64) -> f64 {
        match self {
            Protocol::Constant(g) => *g,
            Protocol::OptimalFeedback => c * chi.cos(),
            Protocol::TimeSeries { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let k = times.partition_point(|&x| x <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
        }
    }

    /// `F(η) = ∫_{η₀}^{η} Γ dη′` for protocols that are functions of η.
    pub fn eta_integral(&self, eta0: f64, eta: f64, c: f64) -> Result<f64> {
        match self {
            Protocol::Constant(g) => Ok(g * (eta - eta0)),
            Protocol::OptimalFeedback => Ok(0.5 * c * (eta * eta - eta0 * eta0)),
            Protocol::TimeSeries { .. } => Err(QslError::Unsupported(
                "a time-series bias has no closed integral over eta; integrate the dynamics instead".into(),
            )),
        }
    }
}

/// Model parameters plus the optional phase kicks and arrival target.
#[derive(Debug, Clone, PartialEq)]
pub struct LzParams {
    pub v: f64,
    pub c: f64,
    pub protocol: Protocol,
    /// Phase set instantaneously before the first step.
    pub kick_start: Option<f64>,
    /// Phase set instantaneously after arrival (or the last step).
    pub kick_end: Option<f64>,
    /// Stop integrating when χ reaches this value.
    pub target_chi: Option<f64>,
}

impl LzParams {
    pub fn new(v: f64, c: f64, protocol: Protocol) -> Result<Self> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(contract(format!("coupling v must be positive, got {v}")));
        }
        if !c.is_finite() {
            return Err(contract("interaction c must be finite"));
        }
        Ok(Self {
            v,
            c,
            protocol,
            kick_start: None,
            kick_end: None,
            target_chi: None,
        })
    }

    pub fn with_target(mut self, chi: f64) -> Self {
        self.target_chi = Some(chi);
        self
    }
}

/// Point on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub chi: f64,
    pub phi: f64,
    pub t: f64,
}

impl BlochState {
    /// Builds a state with φ wrapped to `(−π, π]`.
    pub fn new(chi: f64, phi: f64, t: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&chi) {
            return Err(contract(format!("polar angle {chi} outside [0, π]")));
        }
        Ok(Self {
            chi,
            phi: wrap_phase(phi),
            t,
        })
    }

    pub fn eta(&self) -> f64 {
        self.chi.cos()
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// `(dχ/dt, dφ/dt)` at a state.
pub fn bloch_rhs(state: &BlochState, params: &LzParams) -> Result<(f64, f64)> {
    rates(state.t, state.chi, state.phi, params)
}

fn rates(t: f64, chi: f64, phi: f64, params: &LzParams) -> Result<(f64, f64)> {
    let (sin_phi, cos_phi) = phi.sin_cos();
    let (sin_chi, cos_chi) = chi.sin_cos();
    let drift = if sin_chi.abs() < POLE_SIN {
        if cos_phi.abs() > POLE_COS_PHI {
            return Err(QslError::Pole { chi, cos_phi });
        }
        0.0
    } else {
        params.v * cos_phi / sin_chi
    };
    let gamma = params.protocol.gamma(t, chi, params.c);
    Ok((-params.v * sin_phi, gamma - cos_chi * (params.c + drift)))
}

/// Integration constant `C₀ = −2v sin χ₀ cos φ₀ − c(1 − η₀²)`.
pub fn integration_constant(params: &LzParams, chi0: f64, phi0: f64) -> f64 {
    let eta0 = chi0.cos();
    -2.0 * params.v * chi0.sin() * phi0.cos() - params.c * (1.0 - eta0 * eta0)
}

/// Integrated Bloch path. φ is stored unwrapped (continuous).
#[derive(Debug, Clone, PartialEq)]
pub struct LzTrajectory {
    pub times: Vec<f64>,
    pub chi: Vec<f64>,
    pub phi: Vec<f64>,
    pub chi_rate: Vec<f64>,
    pub phi_rate: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `F = ∫ Γ dη` accumulated along the path.
    pub gamma_eta_integral: Vec<f64>,
    /// Phase before the start kick was applied.
    pub phi_initial: f64,
    /// Phase after the end kick, when one was applied.
    pub phi_final: Option<f64>,
    /// Time at which χ reached the target, if it did.
    pub arrival_time: Option<f64>,
}

impl LzTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn elapsed(&self) -> f64 {
        self.times[self.len() - 1] - self.times[0]
    }

    pub fn eta(&self, k: usize) -> f64 {
        self.chi[k].cos()
    }

    /// `𝒱 = ½ √(χ̇² + sin²χ φ̇²)` from the Bures-angle metric.
    pub fn global_speed(&self, k: usize) -> f64 {
        0.5 * (self.chi_rate[k].powi(2) + (self.chi[k].sin() * self.phi_rate[k]).powi(2)).sqrt()
    }

    /// Parameter path `(χ, φ)` with the exact rates attached.
    pub fn to_trajectory(&self) -> Result<Trajectory> {
        let samples = self.chi.iter().zip(&self.phi).map(|(&c, &p)| vec![c, p]).collect();
        let speeds = self
            .chi_rate
            .iter()
            .zip(&self.phi_rate)
            .map(|(&c, &p)| vec![c, p])
            .collect();
        Trajectory::new(self.times.clone(), samples, vec!["chi".into(), "phi".into()])?.with_speeds(speeds)
    }

    /// Conserved-relation residual at every sample.
    pub fn residuals(&self, params: &LzParams, chi0: f64, phi0: f64) -> Vec<f64> {
        let c0 = integration_constant(params, chi0, phi0);
        (0..self.len())
            .map(|k| {
                let s = self.chi[k].sin();
                let f = (2.0 * self.gamma_eta_integral[k] + c0) / (s * s);
                (s * (params.c + f) + 2.0 * params.v * self.phi[k].cos()).abs()
            })
            .collect()
    }
}

/// Integrates the Bloch equations from `(χ₀, φ₀)`, recording a sample every
/// `dt` up to `t_max`, or up to arrival at `params.target_chi`.
///
/// The start kick replaces φ₀ before the first step; the end kick is recorded
/// in [`LzTrajectory::phi_final`] and not sampled, so kicks never enter the
/// speed statistics.
pub fn integrate(params: &LzParams, chi0: f64, phi0: f64, t_max: f64, dt: f64) -> Result<LzTrajectory> {
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(contract("need dt > 0 and t_max >= 0"));
    }
    if !(0.0..=PI).contains(&chi0) {
        return Err(contract(format!("chi0 = {chi0} outside [0, π]")));
    }
    let phi_start = params.kick_start.unwrap_or(phi0);
    let mut rhs = |t: f64, y: &[f64; 3]| -> Result<[f64; 3]> {
        let mut chi = y[0];
        if !(POLE_CLAMP..=PI - POLE_CLAMP).contains(&chi) {
            let cos_phi = y[1].cos();
            if cos_phi.abs() > POLE_COS_PHI {
                return Err(QslError::Pole { chi, cos_phi });
            }
            chi = chi.clamp(POLE_CLAMP, PI - POLE_CLAMP);
        }
        let (dchi, dphi) = rates(t, chi, y[1], params)?;
        let gamma = params.protocol.gamma(t, chi, params.c);
        Ok([dchi, dphi, -gamma * chi.sin() * dchi])
    };

    let mut out = LzTrajectory {
        times: Vec::new(),
        chi: Vec::new(),
        phi: Vec::new(),
        chi_rate: Vec::new(),
        phi_rate: Vec::new(),
        gamma: Vec::new(),
        gamma_eta_integral: Vec::new(),
        phi_initial: phi0,
        phi_final: None,
        arrival_time: None,
    };
    let record = |out: &mut LzTrajectory, t: f64, y: &[f64; 3]| -> Result<()> {
        let chi = y[0].clamp(0.0, PI);
        let (dchi, dphi) = rates(t, chi, y[1], params)?;
        out.times.push(t);
        out.chi.push(chi);
        out.phi.push(y[1]);
        out.chi_rate.push(dchi);
        out.phi_rate.push(dphi);
        out.gamma.push(params.protocol.gamma(t, chi, params.c));
        out.gamma_eta_integral.push(y[2]);
        Ok(())
    };

    let mut y = [chi0, phi_start, 0.0];
    record(&mut out, 0.0, &y)?;
    let target = params.target_chi;
    if target == Some(chi0) {
        out.arrival_time = Some(0.0);
        out.phi_final = params.kick_end;
        return Ok(out);
    }
    let side = |chi: f64| target.map(|tc| (chi - tc).signum());
    let start_side = side(chi0);

    let mut stepper = DormandPrince::new(Tolerance::default(), dt);
    let steps = (t_max / dt).ceil() as usize;
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = (k as f64 * dt).min(t_max);
        if t_next <= t {
            break;
        }
        let y_next = stepper.integrate_to(&mut rhs, t, y, t_next)?;
        if let (Some(tc), Some(s0)) = (target, start_side) {
            if side(y_next[0]) != Some(s0) {
                let (t_a, y_a) = (t, y);
                let mut locator = DormandPrince::new(Tolerance::default(), dt);
                let t_hit = bisect(
                    |s| match locator.integrate_to(&mut rhs, t_a, y_a, s) {
                        Ok(ys) => ys[0] - tc,
                        Err(_) => f64::NAN,
                    },
                    t_a,
                    t_next,
                    1e-14,
                )?;
                let y_hit = if t_hit > t_a {
                    stepper.integrate_to(&mut rhs, t_a, y_a, t_hit)?
                } else {
                    y_a
                };
                if t_hit > t_a {
                    record(&mut out, t_hit, &y_hit)?;
                }
                out.arrival_time = Some(t_hit);
                out.phi_final = params.kick_end;
                return Ok(out);
            }
        }
        t = t_next;
        y = y_next;
        record(&mut out, t, &y)?;
    }
    out.phi_final = params.kick_end;
    Ok(out)
}

/// Largest conserved-relation residual `|sin χ (c + f) + 2v cos φ|` along a
/// trajectory started (after any kick) at `(χ₀, φ₀)`.
pub fn conserved_residual(traj: &LzTrajectory, params: &LzParams, chi0: f64, phi0: f64) -> f64 {
    traj.residuals(params, chi0, phi0).into_iter().fold(0.0, f64::max)
}

/// Transit time `∫ dη / (v √(1 − η² − B²/4v²))` with
/// `B = c(1 − η²) + 2F(η) + C₀`.
///
/// Valid while η moves monotonically between the limits. A negative radicand
/// inside the interval is reported as [`QslError::Infeasible`].
pub fn transit_time_quadrature(params: &LzParams, eta0: f64, eta_tau: f64, c0: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&eta0) || !(-1.0..=1.0).contains(&eta_tau) {
        return Err(contract("eta limits must lie in [-1, 1]"));
    }
    let v = params.v;
    let c = params.c;
    // reject time-series protocols before quadrature starts
    params.protocol.eta_integral(eta0, eta0, c)?;
    let (lo, hi) = (eta0.min(eta_tau), eta0.max(eta_tau));
    // 1 − η² from the exact distances to the limits, so poles at η = ±1 keep precision
    let integrand = |eta: f64, gap_lo: f64, gap_hi: f64| -> Result<f64> {
        let f = params.protocol.eta_integral(eta0, eta, c)?;
        let one_minus = ((1.0 - hi) + gap_hi) * ((1.0 + lo) + gap_lo);
        let bracket = c * one_minus + 2.0 * f + c0;
        let radicand = one_minus - bracket * bracket / (4.0 * v * v);
        if radicand < -1e-10 {
            return Err(QslError::Infeasible { eta, radicand });
        }
        if radicand <= 0.0 {
            return Ok(0.0);
        }
        Ok(1.0 / (v * radicand.sqrt()))
    };
    tanh_sinh_with_gaps(integrand, lo, hi, 1e-12)
}

/// Instantaneous phase jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseKick {
    pub from: f64,
    pub to: f64,
}

/// Time-optimal schedule between two polar angles.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalProtocol {
    pub params: LzParams,
    pub start: PhaseKick,
    pub end: PhaseKick,
}

/// Feedback bias `Γ = c cos χ` between a start kick to `φ = −sgn(χ_τ − χ₀) π/2`
/// and an end kick to the requested final phase (`base.kick_end`, or no
/// change when unset).
pub fn optimal_protocol(base: &LzParams, chi0: f64, chi_tau: f64, phi0: f64) -> Result<OptimalProtocol> {
    if chi0 == chi_tau {
        return Err(contract("optimal protocol needs distinct chi0 and chi_tau"));
    }
    let on_path = if chi_tau > chi0 { -FRAC_PI_2 } else { FRAC_PI_2 };
    let final_phase = base.kick_end.unwrap_or(on_path);
    let mut params = LzParams::new(base.v, base.c, Protocol::OptimalFeedback)?;
    params.kick_start = Some(on_path);
    params.kick_end = Some(final_phase);
    params.target_chi = Some(chi_tau);
    Ok(OptimalProtocol {
        params,
        start: PhaseKick {
            from: phi0,
            to: on_path,
        },
        end: PhaseKick {
            from: on_path,
            to: final_phase,
        },
    })
}

/// `τ_QSL = |χ_τ − χ₀| / v`, independent of `c`.
pub fn qsl_time_lz(v: f64, chi0: f64, chi_tau: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(contract(format!("coupling v must be positive, got {v}")));
    }
    Ok((chi_tau - chi0).abs() / v)
}
