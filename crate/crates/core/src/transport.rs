// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Atom transport in a moving conveyor-belt lattice.
//!
//! A wavepacket on a uniform periodic grid evolves under
//! `H = p̂²/2m + U₀ cos²(k(x − x_control(t)))`, `k = 2π/λ`, by Strang
//! split-step Fourier propagation (ħ = 1). The lattice minima sit at
//! `x_control + λ/4 + nλ/2`; the packet is loaded into the well at
//! `x_control + λ/4`, which is what "trap center" means below.
//!
//! Two bound routes are provided: closed formulas (global
//! `√(mλ²d / 4π²U₀Δx)`, local `√(mλ²/2π²U₀)`) and the simulated route,
//! where the largest measured Fubini-Study speed of a driven packet is
//! inserted into `τ = (d/2Δx) / V_max`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{contract, QslError, Result};
use crate::par;

/// Largest tolerated probability in the outer 2% of the grid on each side.
pub const BOUNDARY_DENSITY_LIMIT: f64 = 1e-8;
const BOUNDARY_FRACTION: f64 = 0.02;
const NORM_TOL: f64 = 1e-10;
/// Above this `dt · max|U|` the split-step phase error is flagged.
pub const STIFFNESS_WARNING: f64 = 0.1;

/// Wavefunction on the grid `x_j = x_min + j dx`, `j < N`, N a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction1D {
    x_min: f64,
    dx: f64,
    mass: f64,
    psi: Vec<Complex64>,
}

impl Wavefunction1D {
    /// Wraps amplitudes that already satisfy `Σ|ψ|² dx = 1` (within 1e-10).
    pub fn new(x_min: f64, dx: f64, mass: f64, psi: Vec<Complex64>) -> Result<Self> {
        check_grid(psi.len(), dx, mass)?;
        let w = Self { x_min, dx, mass, psi };
        let norm = w.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(contract(format!("wavefunction norm {norm} differs from 1")));
        }
        Ok(w)
    }

    /// Samples `f` on the grid and normalizes.
    pub fn from_fn(x_min: f64, dx: f64, n: usize, mass: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_grid(n, dx, mass)?;
        let psi = (0..n).map(|j| f(x_min + j as f64 * dx)).collect();
        let mut w = Self { x_min, dx, mass, psi };
        if w.norm() == 0.0 {
            return Err(contract("wavefunction vanishes on the grid"));
        }
        w.normalize();
        Ok(w)
    }

    /// Gaussian packet `exp(−(x−x₀)²/4σ² + ik₀x)`, so `Δx = σ`.
    pub fn gaussian(x_min: f64, dx: f64, n: usize, mass: f64, x0: f64, sigma: f64, k0: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(contract("Gaussian width must be positive"));
        }
        Self::from_fn(x_min, dx, n, mass, |x| {
            Complex64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), k0 * x)
        })
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.psi
    }

    /// `Σ |ψ_j|² dx`.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx
    }

    fn normalize(&mut self) {
        let s = 1.0 / self.norm().sqrt();
        self.psi.iter_mut().for_each(|z| *z *= s);
    }

    /// `⟨self|other⟩ = Σ ψ̄ φ dx`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.dx
    }

    /// Probability in the outer `BOUNDARY_FRACTION` of the grid on each side.
    pub fn boundary_density(&self) -> f64 {
        let n = self.psi.len();
        let edge = ((n as f64 * BOUNDARY_FRACTION).ceil() as usize).max(1);
        let lo: f64 = self.psi[..edge].iter().map(|z| z.norm_sqr()).sum();
        let hi: f64 = self.psi[n - edge..].iter().map(|z| z.norm_sqr()).sum();
        (lo + hi) * self.dx
    }

    fn check_boundary(&self) -> Result<()> {
        let b = self.boundary_density();
        if b > BOUNDARY_DENSITY_LIMIT {
            return Err(QslError::GridTooSmall { boundary_density: b });
        }
        Ok(())
    }
}

fn check_grid(n: usize, dx: f64, mass: f64) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(contract(format!("grid size {n} is not a power of two")));
    }
    if !(dx > 0.0) || !(mass > 0.0) {
        return Err(contract("need dx > 0 and mass > 0"));
    }
    Ok(())
}

/// Momentum of FFT bin `j` on an `n`-point grid of spacing `dx`.
fn momentum(j: usize, n: usize, dx: f64) -> f64 {
    let dk = 2.0 * PI / (n as f64 * dx);
    if j < n / 2 {
        j as f64 * dk
    } else {
        (j as f64 - n as f64) * dk
    }
}

/// Lattice translation `t ↦ x_control(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlSchedule {
    Static {
        position: f64,
    },
    /// `x = start + d (10s³ − 15s⁴ + 6s⁵)`, `s = t/T` clamped to `[0, 1]`.
    MinimumJerk {
        start: f64,
        distance: f64,
        duration: f64,
    },
    /// Piecewise linear, held constant outside the table.
    Table {
        times: Vec<f64>,
        positions: Vec<f64>,
    },
}

impl ControlSchedule {
    pub fn minimum_jerk(start: f64, distance: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(contract("schedule duration must be positive"));
        }
        Ok(Self::MinimumJerk {
            start,
            distance,
            duration,
        })
    }

    pub fn table(times: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != positions.len() {
            return Err(contract("schedule table needs matching, non-empty columns"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(contract("schedule times must be strictly increasing"));
        }
        Ok(Self::Table { times, positions })
    }

    pub fn position(&self, t: f64) -> f64 {
        match self {
            Self::Static { position } => *position,
            Self::MinimumJerk {
                start,
                distance,
                duration,
            } => {
                let s = (t / duration).clamp(0.0, 1.0);
                start + distance * s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
            }
            Self::Table { times, positions } => {
                let n = times.len();
                if t <= times[0] {
                    return positions[0];
                }
                if t >= times[n - 1] {
                    return positions[n - 1];
                }
                let k = times.partition_point(|&x| x <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                positions[k] + w * (positions[k + 1] - positions[k])
            }
        }
    }
}

/// `U(x, t) = U₀ cos²(k(x − x_control(t)))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConveyorPotential {
    pub u0: f64,
    pub wavelength: f64,
    pub schedule: ControlSchedule,
}

impl ConveyorPotential {
    /// `u0 = 0` gives a free particle.
    pub fn new(u0: f64, wavelength: f64, schedule: ControlSchedule) -> Result<Self> {
        if !(u0 >= 0.0) || !u0.is_finite() {
            return Err(contract(format!("trap depth must be non-negative, got {u0}")));
        }
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(contract(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Self {
            u0,
            wavelength,
            schedule,
        })
    }

    pub fn k(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn x_control(&self, t: f64) -> f64 {
        self.schedule.position(t)
    }

    /// Minimum of the well the packet is loaded into.
    pub fn trap_center(&self, t: f64) -> f64 {
        self.x_control(t) + 0.25 * self.wavelength
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.u0 * (self.k() * (x - self.x_control(t))).cos().powi(2)
    }
}

/// Strang split-step propagator:
/// `e^{−iU(t+dt)dt/2} e^{−iT dt} e^{−iU(t)dt/2}`.
pub struct SplitStep {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    kinetic: Vec<Complex64>,
    dt: f64,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(n: usize, dx: f64, mass: f64, dt: f64) -> Result<Self> {
        check_grid(n, dx, mass)?;
        if !(dt > 0.0) {
            return Err(contract("time step must be positive"));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let kinetic = (0..n)
            .map(|j| {
                let p = momentum(j, n, dx);
                Complex64::from_polar(1.0 / n as f64, -p * p / (2.0 * mass) * dt)
            })
            .collect();
        let scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        Ok(Self {
            fwd,
            inv,
            kinetic,
            dt,
            scratch,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `psi` from `t` to `t + dt`.
    pub fn step(&mut self, psi: &mut Wavefunction1D, pot: &ConveyorPotential, t: f64) {
        let half = 0.5 * self.dt;
        let (x_min, dx) = (psi.x_min, psi.dx);
        for (j, z) in psi.psi.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -pot.value(x_min + j as f64 * dx, t) * half);
        }
        self.fwd.process_with_scratch(&mut psi.psi, &mut self.scratch);
        for (z, k) in psi.psi.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        self.inv.process_with_scratch(&mut psi.psi, &mut self.scratch);
        for (j, z) in psi.psi.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -pot.value(x_min + j as f64 * dx, t + self.dt) * half);
        }
    }
}

/// Split-step evolution from `t0`, returning `(t, ψ)` after every
/// `snapshot_every` steps (and at the start).
///
/// Fails with [`QslError::GridTooSmall`] when probability reaches the grid
/// edges.
pub fn propagate(
    psi: &Wavefunction1D,
    pot: &ConveyorPotential,
    t0: f64,
    dt: f64,
    steps: usize,
    snapshot_every: usize,
) -> Result<Vec<(f64, Wavefunction1D)>> {
    let every = snapshot_every.max(1);
    let mut stepper = SplitStep::new(psi.len(), psi.dx, psi.mass, dt)?;
    let mut state = psi.clone();
    state.check_boundary()?;
    let mut out = vec![(t0, state.clone())];
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        stepper.step(&mut state, pot, t);
        state.check_boundary()?;
        if (k + 1) % every == 0 {
            out.push((t0 + (k + 1) as f64 * dt, state.clone()));
        }
    }
    Ok(out)
}

/// Imaginary-time relaxation in the potential frozen at `t`, starting from
/// `guess`. Stops when the energy changes by less than `1e-13` relative.
pub fn relax_ground_state(
    guess: &Wavefunction1D,
    pot: &ConveyorPotential,
    t: f64,
    dtau: f64,
) -> Result<Wavefunction1D> {
    let n = guess.len();
    let (dx, mass) = (guess.dx, guess.mass);
    check_grid(n, dx, mass)?;
    if !(dtau > 0.0) {
        return Err(contract("imaginary time step must be positive"));
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let kinetic: Vec<f64> = (0..n)
        .map(|j| {
            let p = momentum(j, n, dx);
            (-p * p / (2.0 * mass) * dtau).exp() / n as f64
        })
        .collect();
    let half_pot: Vec<f64> = (0..n).map(|j| (-pot.value(guess.x(j), t) * 0.5 * dtau).exp()).collect();
    let mut state = guess.clone();
    let mut energy = f64::INFINITY;
    for iter in 0..200_000 {
        for (z, w) in state.psi.iter_mut().zip(&half_pot) {
            *z *= w;
        }
        fwd.process(&mut state.psi);
        for (z, w) in state.psi.iter_mut().zip(&kinetic) {
            *z *= w;
        }
        inv.process(&mut state.psi);
        for (z, w) in state.psi.iter_mut().zip(&half_pot) {
            *z *= w;
        }
        state.normalize();
        if iter % 50 == 49 {
            let e = mean_energy(&state, pot, t);
            if (e - energy).abs() <= 1e-13 * e.abs().max(1.0) {
                return Ok(state);
            }
            energy = e;
        }
    }
    Err(QslError::IntegrationTolerance(
        "imaginary-time relaxation did not converge".into(),
    ))
}

fn mean_energy(psi: &Wavefunction1D, pot: &ConveyorPotential, t: f64) -> f64 {
    let m = momentum_moments(psi);
    let u: f64 = (0..psi.len())
        .map(|j| psi.psi[j].norm_sqr() * pot.value(psi.x(j), t))
        .sum::<f64>()
        * psi.dx;
    m.p2 / (2.0 * psi.mass) + u
}

struct MomentumMoments {
    p1: f64,
    p2: f64,
    k2: f64,
}

fn momentum_moments(psi: &Wavefunction1D) -> MomentumMoments {
    let n = psi.len();
    let mut buf = psi.psi.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    let (mut p1, mut p2, mut k2) = (0.0, 0.0, 0.0);
    for (j, z) in buf.iter().enumerate() {
        let w = z.norm_sqr() / total;
        let p = momentum(j, n, psi.dx);
        let kin = p * p / (2.0 * psi.mass);
        p1 += w * p;
        p2 += w * p * p;
        k2 += w * kin * kin;
    }
    MomentumMoments { p1, p2, k2 }
}

/// Moments of a state in the potential at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    /// `⟨(p̂²/2m)²⟩`.
    pub k2: f64,
    /// `√(⟨U²⟩ − ⟨U⟩²)`.
    pub delta_u: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    pub mean_x: f64,
    pub mean_p: f64,
}

impl Observables {
    /// `√(⟨K²⟩ + ΔU²)`.
    pub fn speed_formula(&self) -> f64 {
        (self.k2 + self.delta_u * self.delta_u).sqrt()
    }
}

/// Kinetic moments by spectral differentiation, position and potential
/// moments by direct sums.
pub fn observables(psi: &Wavefunction1D, pot: &ConveyorPotential, t: f64) -> Observables {
    let (mut x1, mut x2, mut u1, mut u2) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..psi.len() {
        let w = psi.psi[j].norm_sqr() * psi.dx;
        let x = psi.x(j);
        let u = pot.value(x, t);
        x1 += w * x;
        x2 += w * x * x;
        u1 += w * u;
        u2 += w * u * u;
    }
    let m = momentum_moments(psi);
    Observables {
        k2: m.k2,
        delta_u: (u2 - u1 * u1).max(0.0).sqrt(),
        delta_x: (x2 - x1 * x1).max(0.0).sqrt(),
        delta_p: (m.p2 - m.p1 * m.p1).max(0.0).sqrt(),
        mean_x: x1,
        mean_p: m.p1,
    }
}

/// Bures-angle rate `arccos|⟨ψ_t|ψ_{t+dt}⟩| / dt`, evaluated as
/// `atan2(‖b − ⟨a|b⟩a‖, |⟨a|b⟩|)` so small angles keep full precision.
pub fn fs_speed_direct(a: &Wavefunction1D, b: &Wavefunction1D, dt: f64) -> Result<f64> {
    if a.len() != b.len() || a.dx != b.dx {
        return Err(contract("states live on different grids"));
    }
    if !(dt > 0.0) {
        return Err(contract("time step must be positive"));
    }
    let overlap = a.inner(b);
    let orth = a
        .psi
        .iter()
        .zip(&b.psi)
        .map(|(x, y)| (y - overlap * x).norm_sqr())
        .sum::<f64>()
        * a.dx;
    Ok(orth.sqrt().atan2(overlap.norm()) / dt)
}

/// Global transport bound `(d/2Δx) / V_max`.
pub fn qsl_transport_global(d: f64, delta_x: f64, speed_max: f64) -> Result<f64> {
    if !(d > 0.0 && delta_x > 0.0 && speed_max > 0.0) {
        return Err(contract("distance, width and speed must be positive"));
    }
    Ok(d / (2.0 * delta_x) / speed_max)
}

fn positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(contract(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// `√(mλ²d / (4π²U₀Δx))`.
pub fn qsl_conveyor(mass: f64, wavelength: f64, u0: f64, delta_x: f64, d: f64) -> Result<f64> {
    positive(&[
        ("mass", mass),
        ("wavelength", wavelength),
        ("U0", u0),
        ("delta_x", delta_x),
        ("d", d),
    ])?;
    Ok((mass * wavelength * wavelength * d / (4.0 * PI * PI * u0 * delta_x)).sqrt())
}

/// Local bound `√(mλ² / (2π²U₀))` for emptying one site.
pub fn local_bound_transport(mass: f64, wavelength: f64, u0: f64) -> Result<f64> {
    positive(&[("mass", mass), ("wavelength", wavelength), ("U0", u0)])?;
    Ok((mass * wavelength * wavelength / (2.0 * PI * PI * u0)).sqrt())
}

/// `ω_HO = 2π √(2U₀/(mλ²))`.
pub fn harmonic_frequency(u0: f64, mass: f64, wavelength: f64) -> Result<f64> {
    positive(&[("mass", mass), ("wavelength", wavelength), ("U0", u0)])?;
    Ok(2.0 * PI * (2.0 * u0 / (mass * wavelength * wavelength)).sqrt())
}

/// `τ_HO = 2π/ω_HO`.
pub fn harmonic_period(u0: f64, mass: f64, wavelength: f64) -> Result<f64> {
    Ok(2.0 * PI / harmonic_frequency(u0, mass, wavelength)?)
}

/// `√(λ / (8πΔx))`, the coefficient in `τ = √(λ/8πΔx) √(2n/π) τ_HO`.
pub fn conveyor_prefactor(wavelength: f64, delta_x: f64) -> Result<f64> {
    positive(&[("wavelength", wavelength), ("delta_x", delta_x)])?;
    Ok((wavelength / (8.0 * PI * delta_x)).sqrt())
}

/// `√(λ/8πΔx) √(2n/π) τ_HO` with `n = 2d/λ` lattice sites; equal to
/// [`qsl_conveyor`] once `τ_HO` is expressed through `U₀`.
pub fn conveyor_estimate(wavelength: f64, delta_x: f64, d: f64, tau_ho: f64) -> Result<f64> {
    positive(&[("d", d), ("tau_HO", tau_ho)])?;
    let n = 2.0 * d / wavelength;
    Ok(conveyor_prefactor(wavelength, delta_x)? * (2.0 * n / PI).sqrt() * tau_ho)
}

/// Experimental presets, in nanometres.
pub mod presets {
    pub const WAVELENGTH_NM: f64 = 866.0;
    pub const DELTA_X_NM: f64 = 25.0;
}

/// Solves `τ = (d/2Δx) / √((k²U₀τ/2m)² + ΔU_max²)` by damped fixed-point
/// iteration. With `ΔU_max = 0` the root is [`qsl_conveyor`].
pub fn self_consistent_bound(
    mass: f64,
    wavelength: f64,
    u0: f64,
    delta_x: f64,
    d: f64,
    delta_u_max: f64,
) -> Result<f64> {
    positive(&[
        ("mass", mass),
        ("wavelength", wavelength),
        ("U0", u0),
        ("delta_x", delta_x),
        ("d", d),
    ])?;
    if !(delta_u_max >= 0.0) {
        return Err(contract("delta_u_max must be non-negative"));
    }
    let k = 2.0 * PI / wavelength;
    let a = k * k * u0 / (2.0 * mass);
    let geodesic = d / (2.0 * delta_x);
    let g = |tau: f64| geodesic / ((a * tau).powi(2) + delta_u_max * delta_u_max).sqrt();
    let mut tau = (geodesic / a).sqrt();
    for _ in 0..10_000 {
        let next = 0.5 * tau + 0.5 * g(tau);
        if (next - tau).abs() <= 1e-10 * next {
            return Ok(next);
        }
        tau = next;
    }
    Err(QslError::IntegrationTolerance(
        "self-consistent bound did not converge".into(),
    ))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(contract("need at least two matching points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(contract("log-log fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Driven-transport simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportConfig {
    pub mass: f64,
    pub wavelength: f64,
    pub u0: f64,
    /// Transport distance `d`.
    pub distance: f64,
    pub n_grid: usize,
    /// Extra lattice wavelengths added to the domain beyond `d`.
    pub padding_wavelengths: f64,
    /// Time step as a fraction of `τ_HO`.
    pub dt_over_tau_ho: f64,
    /// Schedule duration; `None` uses `duration_factor · τ_conveyor(d)`.
    pub duration: Option<f64>,
    pub duration_factor: f64,
    /// Record observables every this many steps.
    pub snapshot_every: usize,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            wavelength: 1.0,
            u0: 2000.0,
            distance: 10.0,
            n_grid: 4096,
            padding_wavelengths: 16.0,
            dt_over_tau_ho: 1e-3,
            duration: None,
            duration_factor: 4.0,
            snapshot_every: 10,
        }
    }
}

impl TransportConfig {
    pub fn validate(&self) -> Result<()> {
        positive(&[
            ("mass", self.mass),
            ("wavelength", self.wavelength),
            ("U0", self.u0),
            ("distance", self.distance),
            ("padding_wavelengths", self.padding_wavelengths),
            ("dt_over_tau_ho", self.dt_over_tau_ho),
            ("duration_factor", self.duration_factor),
        ])?;
        if let Some(t) = self.duration {
            positive(&[("duration", t)])?;
        }
        check_grid(self.n_grid, 1.0, 1.0)?;
        if self.snapshot_every == 0 {
            return Err(contract("snapshot_every must be at least 1"));
        }
        Ok(())
    }
}

/// One recorded instant of a driven run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub x_control: f64,
    pub trap_center: f64,
    pub mean_x: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    pub k2: f64,
    pub delta_u: f64,
    /// Bures-angle rate over the step ending at `t` (zero at `t = 0`).
    pub fs_speed_direct: f64,
    pub fs_speed_formula: f64,
}

/// Bounds and spreads of one driven run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportReport {
    pub d: f64,
    /// Spreads of the loaded ground state.
    pub delta_x: f64,
    pub delta_p: f64,
    /// Largest `⟨K²⟩` and `ΔU` over the snapshots.
    pub k2_max: f64,
    pub delta_u_max: f64,
    pub omega_ho: f64,
    pub tau_ho: f64,
    pub duration: f64,
    pub dt: f64,
    pub steps: usize,
    /// Largest measured Bures-angle rate over every step.
    pub speed_max_direct: f64,
    /// Largest `√(⟨K²⟩ + ΔU²)` over the snapshots.
    pub speed_max_formula: f64,
    /// `(d/2Δx) / speed_max_direct`.
    pub tau_global: f64,
    /// `(d/2Δx) / speed_max_formula`.
    pub tau_global_formula_speed: f64,
    /// `√(mλ²d / 4π²U₀Δx)`.
    pub tau_conveyor: f64,
    pub tau_local: f64,
    /// `max(tau_global, tau_local)`.
    pub tau_qsl: f64,
    /// Largest `|⟨x⟩ − trap center|` over the snapshots.
    pub max_lag: f64,
    pub warnings: Vec<String>,
}

/// Result of [`run_transport`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransportRun {
    pub report: TransportReport,
    pub snapshots: Vec<Snapshot>,
}

/// Loads the trap ground state, drives the lattice over `d` with a
/// minimum-jerk schedule and records speeds and bounds.
pub fn run_transport(cfg: &TransportConfig) -> Result<TransportRun> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let omega = harmonic_frequency(cfg.u0, cfg.mass, cfg.wavelength)?;
    let tau_ho = 2.0 * PI / omega;
    let lambda = cfg.wavelength;
    let start_center = 0.25 * lambda;
    let length = cfg.distance + cfg.padding_wavelengths * lambda;
    let dx = length / cfg.n_grid as f64;
    let x_min = start_center - 0.5 * cfg.padding_wavelengths * lambda;

    let static_pot = ConveyorPotential::new(cfg.u0, lambda, ControlSchedule::Static { position: 0.0 })?;
    let sigma_ho = 1.0 / (2.0 * cfg.mass * omega).sqrt();
    let guess = Wavefunction1D::gaussian(x_min, dx, cfg.n_grid, cfg.mass, start_center, sigma_ho, 0.0)?;
    // relaxing below the real-time step keeps the loaded state stationary
    // under the split-step propagator to O(dt²)
    let ground = relax_ground_state(&guess, &static_pot, 0.0, 0.3 * cfg.dt_over_tau_ho * tau_ho)?;
    let obs0 = observables(&ground, &static_pot, 0.0);

    let tau_conveyor = qsl_conveyor(cfg.mass, lambda, cfg.u0, obs0.delta_x, cfg.distance)?;
    let duration = cfg.duration.unwrap_or(cfg.duration_factor * tau_conveyor);
    let steps = (duration / (cfg.dt_over_tau_ho * tau_ho)).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    if dt * cfg.u0 > STIFFNESS_WARNING {
        warnings.push(format!("dt * U0 = {:.3} exceeds {STIFFNESS_WARNING}", dt * cfg.u0));
    }
    let pot = ConveyorPotential::new(
        cfg.u0,
        lambda,
        ControlSchedule::minimum_jerk(0.0, cfg.distance, duration)?,
    )?;

    let snapshot = |psi: &Wavefunction1D, t: f64, direct: f64| {
        let o = observables(psi, &pot, t);
        Snapshot {
            t,
            x_control: pot.x_control(t),
            trap_center: pot.trap_center(t),
            mean_x: o.mean_x,
            delta_x: o.delta_x,
            delta_p: o.delta_p,
            k2: o.k2,
            delta_u: o.delta_u,
            fs_speed_direct: direct,
            fs_speed_formula: o.speed_formula(),
        }
    };

    let mut stepper = SplitStep::new(cfg.n_grid, dx, cfg.mass, dt)?;
    let mut psi = ground.clone();
    let mut prev = ground;
    let mut snapshots = vec![snapshot(&psi, 0.0, 0.0)];
    let mut speed_max_direct = 0.0_f64;
    for k in 0..steps {
        let t = k as f64 * dt;
        stepper.step(&mut psi, &pot, t);
        psi.check_boundary()?;
        let v = fs_speed_direct(&prev, &psi, dt)?;
        speed_max_direct = speed_max_direct.max(v);
        if (k + 1) % cfg.snapshot_every == 0 || k + 1 == steps {
            snapshots.push(snapshot(&psi, (k + 1) as f64 * dt, v));
        }
        prev.psi.copy_from_slice(&psi.psi);
    }
    let norm_drift = (psi.norm() - 1.0).abs();
    if norm_drift > 1e-8 {
        warnings.push(format!("norm drifted by {norm_drift:e}"));
    }

    let k2_max = snapshots.iter().map(|s| s.k2).fold(0.0, f64::max);
    let delta_u_max = snapshots.iter().map(|s| s.delta_u).fold(0.0, f64::max);
    let speed_max_formula = snapshots.iter().map(|s| s.fs_speed_formula).fold(0.0, f64::max);
    let max_lag = snapshots
        .iter()
        .map(|s| (s.mean_x - s.trap_center).abs())
        .fold(0.0, f64::max);
    let tau_global = qsl_transport_global(cfg.distance, obs0.delta_x, speed_max_direct)?;
    let tau_global_formula_speed = qsl_transport_global(cfg.distance, obs0.delta_x, speed_max_formula)?;
    let tau_local = local_bound_transport(cfg.mass, lambda, cfg.u0)?;
    Ok(TransportRun {
        report: TransportReport {
            d: cfg.distance,
            delta_x: obs0.delta_x,
            delta_p: obs0.delta_p,
            k2_max,
            delta_u_max,
            omega_ho: omega,
            tau_ho,
            duration,
            dt,
            steps,
            speed_max_direct,
            speed_max_formula,
            tau_global,
            tau_global_formula_speed,
            tau_conveyor,
            tau_local,
            tau_qsl: tau_global.max(tau_local),
            max_lag,
            warnings,
        },
        snapshots,
    })
}

/// Runs [`run_transport`] for every distance, in parallel, results in
/// input order.
pub fn sweep_distances(base: &TransportConfig, distances: &[f64]) -> Vec<Result<TransportRun>> {
    par::map(distances, |&d| {
        let cfg = TransportConfig {
            distance: d,
            ..base.clone()
        };
        run_transport(&cfg)
    })
}

/// One cell of the `(d, ⟨K²⟩)` bound surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub d: f64,
    pub k2: f64,
    pub tau: f64,
}

/// `τ = (d/2Δx) / √⟨K²⟩` on the grid `ds × k2s`, with `⟨K²⟩` taken as given
/// and the `ΔU` term dropped. Rows ordered by `d` then `⟨K²⟩`.
pub fn bound_surface(delta_x: f64, ds: &[f64], k2s: &[f64]) -> Result<Vec<SurfacePoint>> {
    let mut out = Vec::with_capacity(ds.len() * k2s.len());
    for &d in ds {
        for &k2 in k2s {
            out.push(SurfacePoint {
                d,
                k2,
                tau: qsl_transport_global(d, delta_x, k2.sqrt())?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loaded(x_min: f64, length: f64, n: usize) -> Wavefunction1D {
        let pot = ConveyorPotential::new(2000.0, 1.0, ControlSchedule::Static { position: 0.0 }).unwrap();
        let guess = Wavefunction1D::gaussian(x_min, length / n as f64, n, 1.0, 0.25, 0.0355, 0.0).unwrap();
        relax_ground_state(&guess, &pot, 0.0, 1e-5).unwrap()
    }

    fn free() -> ConveyorPotential {
        ConveyorPotential::new(0.0, 1.0, ControlSchedule::Static { position: 0.0 }).unwrap()
    }

    #[test]
    fn grid_validation() {
        let psi = vec![Complex64::new(1.0, 0.0); 6];
        assert!(Wavefunction1D::new(0.0, 1.0 / 6.0, 1.0, psi).is_err());
        let psi = vec![Complex64::new(1.0, 0.0); 8];
        assert!(Wavefunction1D::new(0.0, 0.125, 1.0, psi.clone()).is_ok());
        assert!(Wavefunction1D::new(0.0, 0.5, 1.0, psi).is_err());
        assert!(ConveyorPotential::new(-1.0, 1.0, ControlSchedule::Static { position: 0.0 }).is_err());
        assert!(ConveyorPotential::new(1.0, 0.0, ControlSchedule::Static { position: 0.0 }).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let sigma = 0.7;
        let psi = Wavefunction1D::gaussian(-20.0, 40.0 / 1024.0, 1024, 1.0, 0.3, sigma, 0.0).unwrap();
        let o = observables(&psi, &free(), 0.0);
        assert!((o.delta_x - sigma).abs() < 1e-10);
        assert!((o.delta_p - 0.5 / sigma).abs() < 1e-10);
        assert!((o.mean_x - 0.3).abs() < 1e-12);
        assert_eq!(o.delta_u, 0.0);
    }

    #[test]
    fn broad_packet_kinetic_square() {
        let k0 = 3.0;
        let psi = Wavefunction1D::gaussian(-200.0, 400.0 / 8192.0, 8192, 1.0, 0.0, 30.0, k0).unwrap();
        let o = observables(&psi, &free(), 0.0);
        let expected = (k0 * k0 / 2.0).powi(2);
        assert!((o.k2 - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn free_dispersion() {
        let (sigma, m) = (0.5, 2.0);
        let psi = Wavefunction1D::gaussian(-40.0, 80.0 / 2048.0, 2048, m, 0.0, sigma, 1.0).unwrap();
        let dp = 0.5 / sigma;
        let path = propagate(&psi, &free(), 0.0, 1e-2, 300, 100).unwrap();
        for (t, w) in &path {
            let o = observables(w, &free(), *t);
            let expected = sigma * sigma + (t * dp / m).powi(2);
            assert!((o.delta_x.powi(2) - expected).abs() < 1e-4, "{t}");
        }
    }

    #[test]
    fn norm_is_preserved() {
        let pot = ConveyorPotential::new(2000.0, 1.0, ControlSchedule::minimum_jerk(0.0, 2.0, 1.0).unwrap()).unwrap();
        let psi = loaded(-6.0, 16.0, 2048);
        let path = propagate(&psi, &pot, 0.0, 1e-4, 10_000, 10_000).unwrap();
        assert!((path.last().unwrap().1.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn boundary_overflow_is_reported() {
        let psi = Wavefunction1D::gaussian(-5.0, 10.0 / 256.0, 256, 1.0, 0.0, 0.5, 40.0).unwrap();
        let err = propagate(&psi, &free(), 0.0, 1e-2, 400, 400).unwrap_err();
        assert!(matches!(err, QslError::GridTooSmall { .. }));
    }

    #[test]
    fn second_order_in_time() {
        let pot = ConveyorPotential::new(2000.0, 1.0, ControlSchedule::minimum_jerk(0.0, 0.5, 0.2).unwrap()).unwrap();
        let psi = loaded(-4.0, 8.0, 1024);
        let run = |steps: usize| {
            propagate(&psi, &pot, 0.0, 0.2 / steps as f64, steps, steps)
                .unwrap()
                .pop()
                .unwrap()
                .1
        };
        let reference = run(16_000);
        let err = |w: Wavefunction1D| {
            w.amplitudes()
                .iter()
                .zip(reference.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let ratio = err(run(1000)) / err(run(2000));
        assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn ground_state_is_stationary() {
        let u0 = 2000.0;
        let pot = ConveyorPotential::new(u0, 1.0, ControlSchedule::Static { position: 0.0 }).unwrap();
        let tau_ho = harmonic_period(u0, 1.0, 1.0).unwrap();
        let n = 1024;
        let guess = Wavefunction1D::gaussian(-4.0, 8.0 / n as f64, n, 1.0, 0.25, 0.04, 0.0).unwrap();
        let ground = relax_ground_state(&guess, &pot, 0.0, 3e-4 * tau_ho).unwrap();
        let o = observables(&ground, &pot, 0.0);
        assert!(o.delta_p * o.delta_x >= 0.5 - 1e-9);
        let dt = 1e-3 * tau_ho;
        let path = propagate(&ground, &pot, 0.0, dt, 1000, 1).unwrap();
        let density = |w: &Wavefunction1D| w.amplitudes().iter().map(|z| z.norm_sqr()).collect::<Vec<_>>();
        let d0 = density(&ground);
        let d1 = density(&path[1000].1);
        let max_diff = d0.iter().zip(&d1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let peak = d0.iter().cloned().fold(0.0, f64::max);
        assert!(max_diff / peak < 1e-5, "{}", max_diff / peak);
        let v = fs_speed_direct(&path[0].1, &path[1].1, dt).unwrap();
        assert!(v < 1e-6 * u0, "{v}");
    }

    #[test]
    fn direct_speed_trivial_cases() {
        let psi = Wavefunction1D::gaussian(-5.0, 10.0 / 256.0, 256, 1.0, 0.0, 0.5, 0.0).unwrap();
        assert_eq!(fs_speed_direct(&psi, &psi, 0.1).unwrap(), 0.0);
        let mut phased = psi.clone();
        phased
            .psi
            .iter_mut()
            .for_each(|z| *z *= Complex64::from_polar(1.0, 0.8));
        assert!(fs_speed_direct(&psi, &phased, 0.1).unwrap() < 1e-7);
    }

    #[test]
    fn formula_examples() {
        assert!((qsl_transport_global(0.2, 0.1, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((qsl_transport_global(0.4, 0.1, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let a = qsl_conveyor(1.0, 1.0, 2000.0, 0.035, 5.0).unwrap();
        let b = qsl_conveyor(1.0, 1.0, 2000.0, 0.035, 20.0).unwrap();
        assert!((b / a - 2.0).abs() < 1e-14);
        let ratio = a / local_bound_transport(1.0, 1.0, 2000.0).unwrap();
        assert!((ratio - (5.0f64 / 0.07).sqrt()).abs() < 1e-12);
        assert!((local_bound_transport(1.0, 2.0 * PI, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let l1 = local_bound_transport(1.0, 1.0, 3.0).unwrap();
        assert!((local_bound_transport(1.0, 1.0, 12.0).unwrap() - 0.5 * l1).abs() < 1e-15);
        assert!((harmonic_frequency(0.5, 1.0, 1.0).unwrap() - 2.0 * PI).abs() < 1e-14);
        let w = harmonic_frequency(3.0, 1.0, 1.0).unwrap();
        assert!((harmonic_frequency(12.0, 1.0, 1.0).unwrap() - 2.0 * w).abs() < 1e-12);
        assert!(qsl_conveyor(1.0, 1.0, -1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn prefactor_and_estimate() {
        let c = conveyor_prefactor(presets::WAVELENGTH_NM, presets::DELTA_X_NM).unwrap();
        assert!((c - 1.17).abs() < 0.01);
        let (m, lambda, u0, dx, d) = (1.0, 1.0, 2000.0, 0.035, 7.5);
        let tau_ho = harmonic_period(u0, m, lambda).unwrap();
        let est = conveyor_estimate(lambda, dx, d, tau_ho).unwrap();
        let direct = qsl_conveyor(m, lambda, u0, dx, d).unwrap();
        assert!((est - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn self_consistent_solution() {
        let (m, lambda, u0, dx, d) = (1.0, 1.0, 2000.0, 0.035, 10.0);
        let plain = self_consistent_bound(m, lambda, u0, dx, d, 0.0).unwrap();
        assert!((plain - qsl_conveyor(m, lambda, u0, dx, d).unwrap()).abs() / plain < 1e-9);
        // closed-form root of A²s² + ΔU² s − L² = 0 with s = τ²
        let du: f64 = 300.0;
        let a = (2.0 * PI).powi(2) * u0 / 2.0;
        let l = d / (2.0 * dx);
        let s = (-du * du + (du.powi(4) + 4.0 * a * a * l * l).sqrt()) / (2.0 * a * a);
        let tau = self_consistent_bound(m, lambda, u0, dx, d, du).unwrap();
        assert!((tau - s.sqrt()).abs() / tau < 1e-9);
        assert!(tau < plain);
    }

    #[test]
    fn schedule_shapes() {
        let s = ControlSchedule::minimum_jerk(1.0, 4.0, 2.0).unwrap();
        assert_eq!(s.position(-1.0), 1.0);
        assert!((s.position(1.0) - 3.0).abs() < 1e-15);
        assert_eq!(s.position(5.0), 5.0);
        let t = ControlSchedule::table(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(t.position(0.5), 1.0);
        assert!(ControlSchedule::table(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn loglog_fit() {
        let xs = [1.0, 2.0, 4.0, 9.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.sqrt()).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-14);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn surface_monotone() {
        let pts = bound_surface(0.03, &[1.0, 2.0], &[10.0, 20.0]).unwrap();
        assert!(pts[0].tau > pts[1].tau);
        assert!(pts[2].tau > pts[0].tau);
    }

    #[test]
    fn small_driven_run_respects_bound() {
        let cfg = TransportConfig {
            distance: 2.0,
            n_grid: 1024,
            padding_wavelengths: 6.0,
            snapshot_every: 50,
            ..TransportConfig::default()
        };
        let run = run_transport(&cfg).unwrap();
        let r = &run.report;
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
        assert!(r.delta_x * r.delta_p >= 0.5 - 1e-9);
        assert!(r.tau_qsl <= r.duration * (1.0 + 1e-6));
        assert!(r.tau_local < r.tau_global);
        for s in &run.snapshots {
            assert!(s.delta_x * s.delta_p >= 0.5 - 1e-9);
        }
    }
}
