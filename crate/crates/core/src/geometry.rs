// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Fubini-Study and Bures geometry under arbitrary parameter charts.
//!
//! A pure state is written in amplitude/phase form `ψ_j = p_j e^{iφ_j}`; a mixed
//! state in its spectral form `ρ = Σ_j p̃_j |j⟩⟨j|`. A [`ParameterChart`] maps
//! real parameters `λ` to one of these forms, and the metric tensor `g_μν`
//! pulled back through the chart gives the squared Bures angle per unit
//! parameter displacement: `dL² = Σ g_μν dλ_μ dλ_ν`.
//!
//! The metric is the literal Bures-angle metric. On the Bloch sphere it reads
//! `diag(1/4, sin²χ/4)`, i.e. one quarter of the round-sphere metric.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{contract, QslError, Result};

/// Default central finite-difference step for chart derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

const NORM_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-10;
const ZERO_EIGENVALUE: f64 = 1e-12;

/// Pure state in amplitude/phase coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateParam {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl PureStateParam {
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != phases.len() || amplitudes.is_empty() {
            return Err(contract(format!(
                "amplitudes ({}) and phases ({}) must be non-empty and equally long",
                amplitudes.len(),
                phases.len()
            )));
        }
        if let Some(j) = amplitudes.iter().position(|&p| p < -NORM_TOL || !p.is_finite()) {
            return Err(contract(format!("amplitude {j} is negative or not finite")));
        }
        let norm: f64 = amplitudes.iter().map(|p| p * p).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(contract(format!("state not normalized: Σp² = {norm}")));
        }
        Ok(Self { amplitudes, phases })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Complex components `p_j e^{iφ_j}`.
    pub fn vector(&self) -> Vec<Complex64> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&p, &phi)| Complex64::from_polar(p, phi))
            .collect()
    }
}

/// Mixed state in spectral form.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStateParam {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<Complex64>>,
}

impl MixedStateParam {
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 || eigenvectors.len() != n || eigenvectors.iter().any(|v| v.len() != n) {
            return Err(contract("need N eigenvalues and N eigenvectors of dimension N"));
        }
        if let Some(j) = eigenvalues.iter().position(|&p| p < -NORM_TOL || !p.is_finite()) {
            return Err(contract(format!("eigenvalue {j} is negative or not finite")));
        }
        let trace: f64 = eigenvalues.iter().sum();
        if (trace - 1.0).abs() > NORM_TOL {
            return Err(contract(format!("eigenvalues sum to {trace}, not 1")));
        }
        for a in 0..n {
            for b in a..n {
                let overlap = inner(&eigenvectors[a], &eigenvectors[b]);
                let target = if a == b { 1.0 } else { 0.0 };
                if (overlap - target).norm() > ORTHO_TOL {
                    return Err(contract(format!(
                        "eigenvectors {a} and {b} are not orthonormal (overlap {overlap})"
                    )));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(populations: Vec<f64>) -> Result<Self> {
        let n = populations.len();
        let basis = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        if i == j {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(populations, basis)
    }

    /// Spectral decomposition of a Hermitian, unit-trace, PSD matrix.
    pub fn from_density_matrix(rho: &DMatrix<Complex64>) -> Result<Self> {
        check_hermitian(rho)?;
        let n = rho.nrows();
        let eig = rho.clone().symmetric_eigen();
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if let Some(min) = values.iter().copied().reduce(f64::min) {
            if min < -1e-10 {
                return Err(contract(format!("density matrix not PSD (min eigenvalue {min})")));
            }
        }
        for v in &mut values {
            *v = v.max(0.0);
        }
        let vectors = (0..n)
            .map(|j| eig.eigenvectors.column(j).iter().copied().collect())
            .collect();
        Self::new(values, vectors)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<Complex64>] {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut rho = DMatrix::<Complex64>::zeros(n, n);
        for (p, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let col = DVector::from_column_slice(v);
            rho += col.clone() * col.adjoint() * Complex64::new(*p, 0.0);
        }
        rho
    }
}

/// A chart point: the state at a parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartPoint {
    Pure(PureStateParam),
    Mixed(MixedStateParam),
}

/// Derivative of a chart point along one parameter direction.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartTangent {
    Pure {
        dp: Vec<f64>,
        dphi: Vec<f64>,
    },
    Mixed {
        dp: Vec<f64>,
        dvectors: Vec<Vec<Complex64>>,
    },
}

/// A smooth map from `r` real parameters to quantum states.
///
/// Implementors supply [`eval`](ParameterChart::eval); analytic derivatives are
/// optional and fall back to central finite differences with step
/// [`fd_step`](ParameterChart::fd_step).
pub trait ParameterChart: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, lambda: &[f64]) -> Result<ChartPoint>;

    fn analytic_tangent(&self, _lambda: &[f64], _mu: usize) -> Option<Result<ChartTangent>> {
        None
    }

    fn fd_step(&self) -> f64 {
        DEFAULT_FD_STEP
    }
}

/// Central finite-difference tangent, ignoring any analytic override.
pub fn finite_difference_tangent<C: ParameterChart + ?Sized>(
    chart: &C,
    lambda: &[f64],
    mu: usize,
) -> Result<ChartTangent> {
    let h = chart.fd_step();
    let mut plus = lambda.to_vec();
    let mut minus = lambda.to_vec();
    plus[mu] += h;
    minus[mu] -= h;
    let scale = 1.0 / (2.0 * h);
    match (chart.eval(&plus)?, chart.eval(&minus)?) {
        (ChartPoint::Pure(a), ChartPoint::Pure(b)) => Ok(ChartTangent::Pure {
            dp: diff(&a.amplitudes, &b.amplitudes, scale),
            dphi: diff(&a.phases, &b.phases, scale),
        }),
        (ChartPoint::Mixed(a), ChartPoint::Mixed(b)) => Ok(ChartTangent::Mixed {
            dp: diff(&a.eigenvalues, &b.eigenvalues, scale),
            dvectors: a
                .eigenvectors
                .iter()
                .zip(&b.eigenvectors)
                .map(|(u, w)| u.iter().zip(w).map(|(x, y)| (x - y) * scale).collect())
                .collect(),
        }),
        _ => Err(contract("chart changes state kind between neighbouring points")),
    }
}

/// Tangent along parameter `mu`, analytic when the chart provides one.
pub fn chart_tangent<C: ParameterChart + ?Sized>(chart: &C, lambda: &[f64], mu: usize) -> Result<ChartTangent> {
    if lambda.len() != chart.dim() {
        return Err(contract(format!(
            "parameter vector has length {}, chart expects {}",
            lambda.len(),
            chart.dim()
        )));
    }
    match chart.analytic_tangent(lambda, mu) {
        Some(t) => t,
        None => finite_difference_tangent(chart, lambda, mu),
    }
}

fn diff(a: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y) * scale).collect()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn check_hermitian(rho: &DMatrix<Complex64>) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(contract("density matrix must be square"));
    }
    let dev = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(contract(format!("density matrix not Hermitian (deviation {dev})")));
    }
    Ok(())
}

/// Symmetric positive semi-definite `r × r` metric at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    g: DMatrix<f64>,
}

impl MetricTensor {
    /// Wraps a matrix, symmetrizing it. Rejects asymmetry above 1e-12 (relative).
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if g.nrows() != g.ncols() {
            return Err(contract("metric must be square"));
        }
        let scale = g.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let asym = (&g - g.transpose()).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if asym > 1e-12 * scale {
            return Err(contract(format!("metric not symmetric (deviation {asym})")));
        }
        let sym = (&g + g.transpose()) * 0.5;
        Ok(Self { g: sym })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.g[(mu, nu)]
    }

    /// `vᵀ g v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        (v.transpose() * &self.g * v)[(0, 0)]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.g.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn is_psd(&self, floor: f64) -> bool {
        self.eigenvalues().first().is_none_or(|&m| m >= -floor)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { g: &self.g * s }
    }
}

/// Squared Fubini-Study line element for an amplitude/phase displacement:
/// `Σ dp_j² + [Σ p_j² dφ_j² − (Σ p_j² dφ_j)²]`.
pub fn fs_increment(state: &PureStateParam, dp: &[f64], dphi: &[f64]) -> Result<f64> {
    let n = state.dim();
    if dp.len() != n || dphi.len() != n {
        return Err(contract(format!(
            "displacement lengths ({}, {}) do not match state dimension {n}",
            dp.len(),
            dphi.len()
        )));
    }
    let amp: f64 = dp.iter().map(|d| d * d).sum();
    let mut second = 0.0;
    let mut first = 0.0;
    for (p, d) in state.amplitudes.iter().zip(dphi) {
        let w = p * p;
        second += w * d * d;
        first += w * d;
    }
    Ok(amp + (second - first * first))
}

/// Pure-state metric tensor
/// `g_μν = Σ_j ∂_μp_j ∂_νp_j + Σ_j p_j² ∂_μφ_j ∂_νφ_j − (Σ_i p_i² ∂_μφ_i)(Σ_j p_j² ∂_νφ_j)`.
pub fn metric_tensor_pure<C: ParameterChart + ?Sized>(chart: &C, lambda: &[f64]) -> Result<MetricTensor> {
    let state = match chart.eval(lambda)? {
        ChartPoint::Pure(s) => s,
        ChartPoint::Mixed(_) => return Err(contract("metric_tensor_pure called on a mixed-state chart")),
    };
    let r = chart.dim();
    let mut dps = Vec::with_capacity(r);
    let mut dphis = Vec::with_capacity(r);
    for mu in 0..r {
        match chart_tangent(chart, lambda, mu)? {
            ChartTangent::Pure { dp, dphi } => {
                dps.push(dp);
                dphis.push(dphi);
            }
            ChartTangent::Mixed { .. } => return Err(contract("mixed tangent on a pure chart")),
        }
    }
    let weights: Vec<f64> = state.amplitudes.iter().map(|p| p * p).collect();
    let mean_phase_rate: Vec<f64> = dphis
        .iter()
        .map(|d| weights.iter().zip(d).map(|(w, x)| w * x).sum())
        .collect();
    let mut g = DMatrix::<f64>::zeros(r, r);
    for mu in 0..r {
        for nu in mu..r {
            let amp: f64 = dps[mu].iter().zip(&dps[nu]).map(|(a, b)| a * b).sum();
            let phase: f64 = weights
                .iter()
                .zip(dphis[mu].iter().zip(&dphis[nu]))
                .map(|(w, (a, b))| w * a * b)
                .sum();
            let v = amp + phase - mean_phase_rate[mu] * mean_phase_rate[nu];
            g[(mu, nu)] = v;
            g[(nu, mu)] = v;
        }
    }
    MetricTensor::new(g)
}

/// Bures metric tensor of a mixed-state chart:
/// `g_μν = ¼ Σ_j ∂_μp̃_j ∂_νp̃_j / p̃_j − Σ_{j<k} (p̃_j−p̃_k)² ⟨j|∂_μk⟩⟨k|∂_νj⟩ / (p̃_j+p̃_k)`.
///
/// A vanishing eigenvalue contributes nothing if its derivative also vanishes
/// (below 1e-12); otherwise [`QslError::SingularEigenvalue`] is returned.
pub fn metric_tensor_mixed<C: ParameterChart + ?Sized>(chart: &C, lambda: &[f64]) -> Result<MetricTensor> {
    let state = match chart.eval(lambda)? {
        ChartPoint::Mixed(s) => s,
        ChartPoint::Pure(_) => return Err(contract("metric_tensor_mixed called on a pure-state chart")),
    };
    let r = chart.dim();
    let n = state.dim();
    let mut dps = Vec::with_capacity(r);
    let mut dvecs = Vec::with_capacity(r);
    for mu in 0..r {
        match chart_tangent(chart, lambda, mu)? {
            ChartTangent::Mixed { dp, dvectors } => {
                dps.push(dp);
                dvecs.push(dvectors);
            }
            ChartTangent::Pure { .. } => return Err(contract("pure tangent on a mixed chart")),
        }
    }
    let p = &state.eigenvalues;
    for j in 0..n {
        if p[j] < ZERO_EIGENVALUE && dps.iter().any(|d| d[j].abs() >= ZERO_EIGENVALUE) {
            return Err(QslError::SingularEigenvalue { index: j });
        }
    }
    // overlaps[mu][j][k] = ⟨j|∂_μ k⟩
    let overlaps: Vec<Vec<Vec<Complex64>>> = dvecs
        .iter()
        .map(|dv| {
            (0..n)
                .map(|j| (0..n).map(|k| inner(&state.eigenvectors[j], &dv[k])).collect())
                .collect()
        })
        .collect();
    let mut g = DMatrix::<f64>::zeros(r, r);
    for mu in 0..r {
        for nu in mu..r {
            let mut classical = 0.0;
            for j in 0..n {
                if p[j] >= ZERO_EIGENVALUE {
                    classical += dps[mu][j] * dps[nu][j] / p[j];
                }
            }
            let mut quantum = 0.0;
            for j in 0..n {
                for k in (j + 1)..n {
                    let sum = p[j] + p[k];
                    if sum <= 0.0 {
                        continue;
                    }
                    let diff = p[j] - p[k];
                    let prod = overlaps[mu][j][k] * overlaps[nu][k][j];
                    quantum += diff * diff * prod.re / sum;
                }
            }
            // the two orderings (μν, νμ) share the real part of the overlap product
            let v = 0.25 * classical - quantum;
            g[(mu, nu)] = v;
            g[(nu, mu)] = v;
        }
    }
    MetricTensor::new(g)
}

/// Metric tensor for whichever state kind the chart produces.
pub fn metric_tensor<C: ParameterChart + ?Sized>(chart: &C, lambda: &[f64]) -> Result<MetricTensor> {
    match chart.eval(lambda)? {
        ChartPoint::Pure(_) => metric_tensor_pure(chart, lambda),
        ChartPoint::Mixed(_) => metric_tensor_mixed(chart, lambda),
    }
}

/// Bures angle `arccos |⟨a|b⟩|` between pure states, in `[0, π/2]`.
///
/// Evaluated as `atan2(‖b − ⟨a|b⟩a‖, |⟨a|b⟩|)`, which keeps full relative
/// precision for nearly identical states.
pub fn bures_angle_pure(a: &PureStateParam, b: &PureStateParam) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(contract("states have different dimensions"));
    }
    Ok(bures_angle_vectors(&a.vector(), &b.vector()))
}

/// Bures angle between two normalized complex vectors (unit weights).
pub(crate) fn bures_angle_vectors(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap = inner(a, b);
    let orth: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (y - overlap * x).norm_sqr())
        .sum::<f64>()
        .sqrt();
    orth.atan2(overlap.norm()).clamp(0.0, std::f64::consts::FRAC_PI_2)
}

/// Bures angle `arccos Tr√(√ρ₀ ρ_τ √ρ₀)` between mixed states.
pub fn bures_angle_mixed(rho0: &MixedStateParam, rho_tau: &MixedStateParam) -> Result<f64> {
    if rho0.dim() != rho_tau.dim() {
        return Err(contract("density matrices have different dimensions"));
    }
    let fidelity = root_fidelity(rho0, &rho_tau.density_matrix())?;
    Ok(fidelity.clamp(0.0, 1.0).acos())
}

fn root_fidelity(rho0: &MixedStateParam, sigma: &DMatrix<Complex64>) -> Result<f64> {
    check_hermitian(sigma)?;
    let n = rho0.dim();
    let mut sqrt_rho = DMatrix::<Complex64>::zeros(n, n);
    for (p, v) in rho0.eigenvalues.iter().zip(&rho0.eigenvectors) {
        let col = DVector::from_column_slice(v);
        sqrt_rho += col.clone() * col.adjoint() * Complex64::new(p.max(0.0).sqrt(), 0.0);
    }
    let m = &sqrt_rho * sigma * &sqrt_rho;
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(m.symmetric_eigen().eigenvalues.iter().map(|e| e.max(0.0).sqrt()).sum())
}

/// Global speed `√(λ̇ᵀ g λ̇)` at a chart point.
pub fn global_speed<C: ParameterChart + ?Sized>(chart: &C, lambda: &[f64], dlambda_dt: &[f64]) -> Result<f64> {
    if dlambda_dt.len() != chart.dim() {
        return Err(contract("velocity length does not match chart dimension"));
    }
    let g = metric_tensor(chart, lambda)?;
    Ok(g.quadratic_form(dlambda_dt).max(0.0).sqrt())
}

/// Bloch-sphere chart `(χ, φ)` with `p = (cos χ/2, sin χ/2)` and
/// `φ = (−φ/2, +φ/2)`. Derivatives are analytic, so the chart is usable at
/// the poles.
#[derive(Debug, Clone, Copy, Default)]
pub struct BlochChart;

impl BlochChart {
    pub fn state(chi: f64, phi: f64) -> Result<PureStateParam> {
        let (s, c) = (0.5 * chi).sin_cos();
        PureStateParam::new(vec![c.abs(), s.abs()], vec![-0.5 * phi, 0.5 * phi])
    }
}

impl ParameterChart for BlochChart {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, lambda: &[f64]) -> Result<ChartPoint> {
        if lambda.len() != 2 {
            return Err(contract("Bloch chart takes (chi, phi)"));
        }
        Ok(ChartPoint::Pure(Self::state(lambda[0], lambda[1])?))
    }

    fn analytic_tangent(&self, lambda: &[f64], mu: usize) -> Option<Result<ChartTangent>> {
        let (s, c) = (0.5 * lambda[0]).sin_cos();
        Some(Ok(match mu {
            0 => ChartTangent::Pure {
                dp: vec![-0.5 * s, 0.5 * c],
                dphi: vec![0.0, 0.0],
            },
            _ => ChartTangent::Pure {
                dp: vec![0.0, 0.0],
                dphi: vec![-0.5, 0.5],
            },
        }))
    }
}
