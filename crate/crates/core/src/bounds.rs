// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Global, local and combined QSL bounds on sampled trajectories.

use serde::{Serialize, Serializer};

use crate::error::{contract, QslError, Result};
use crate::geometry::{bures_angle_mixed, bures_angle_pure, metric_tensor, ChartPoint, ParameterChart};

/// Relative slack allowed when checking that a bound does not exceed the
/// elapsed time.
pub const BOUND_SLACK: f64 = 1e-6;

/// Time-sampled parameter path `λ(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    samples: Vec<Vec<f64>>,
    names: Vec<String>,
    speeds: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, samples: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if times.is_empty() || times.len() != samples.len() {
            return Err(contract("need one parameter row per time sample"));
        }
        let r = names.len();
        if r == 0 {
            return Err(contract("trajectory needs at least one parameter"));
        }
        if let Some(k) = samples.iter().position(|row| row.len() != r) {
            return Err(contract(format!("row {k} does not have {r} parameters")));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(contract(format!(
                "time grid not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(Self {
            times,
            samples,
            names,
            speeds: None,
        })
    }

    /// Attaches known parameter rates `dλ/dt` at each sample, bypassing
    /// finite differences.
    pub fn with_speeds(mut self, speeds: Vec<Vec<f64>>) -> Result<Self> {
        if speeds.len() != self.times.len() || speeds.iter().any(|s| s.len() != self.names.len()) {
            return Err(contract("speed table shape does not match trajectory"));
        }
        self.speeds = Some(speeds);
        Ok(self)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn speeds(&self) -> Option<&[Vec<f64>]> {
        self.speeds.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn elapsed(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn first(&self) -> &[f64] {
        &self.samples[0]
    }

    pub fn last(&self) -> &[f64] {
        &self.samples[self.samples.len() - 1]
    }

    /// `dλ_i/dt` at sample `k`: attached speeds, else central differences
    /// (one-sided at the ends).
    pub fn rate(&self, k: usize, i: usize) -> f64 {
        if let Some(s) = &self.speeds {
            return s[k][i];
        }
        let m = self.len();
        if m < 2 {
            return 0.0;
        }
        let (lo, hi) = match k {
            0 => (0, 1),
            k if k == m - 1 => (m - 2, m - 1),
            k => (k - 1, k + 1),
        };
        (self.samples[hi][i] - self.samples[lo][i]) / (self.times[hi] - self.times[lo])
    }

    pub fn velocity(&self, k: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rate(k, i)).collect()
    }
}

/// Which Bures angle measures the endpoint distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointMetric {
    Pure,
    Mixed,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn finite_or_null_vec<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element(&Option::<f64>::None)?;
        }
    }
    seq.end()
}

/// Result of a bound evaluation. Infinite values serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QslReport {
    pub global_geodesic: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub global_speed_max: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub global_bound: f64,
    pub parameter_names: Vec<String>,
    pub local_geodesics: Vec<f64>,
    #[serde(serialize_with = "finite_or_null_vec")]
    pub local_speed_max: Vec<f64>,
    #[serde(serialize_with = "finite_or_null_vec")]
    pub local_bounds: Vec<f64>,
    pub best_local_bound: f64,
    pub critical_parameter: Option<usize>,
    pub tau_qsl: f64,
    /// The global speed diverged somewhere (singular metric), so the global
    /// bound collapsed to zero.
    pub global_speed_diverged: bool,
    /// Bounds of the form positive/0, excluded from the maxima.
    pub unbounded_parameters: Vec<usize>,
    pub global_unbounded: bool,
}

/// `|λ_i(t_M) − λ_i(t_0)|`.
pub fn local_geodesic(traj: &Trajectory, i: usize) -> Result<f64> {
    if i >= traj.dim() {
        return Err(contract(format!("parameter index {i} out of range")));
    }
    Ok((traj.last()[i] - traj.first()[i]).abs())
}

/// Largest `|dλ_i/dt|` over the sample grid.
pub fn local_speed_max(traj: &Trajectory, i: usize) -> Result<f64> {
    if i >= traj.dim() {
        return Err(contract(format!("parameter index {i} out of range")));
    }
    Ok((0..traj.len()).map(|k| traj.rate(k, i).abs()).fold(0.0, f64::max))
}

/// Geodesic over speed with the sentinel conventions: 0/0 → 0, x/0 → +∞.
fn ratio_bound(geodesic: f64, speed: f64) -> f64 {
    if speed.is_infinite() {
        0.0
    } else if speed == 0.0 {
        if geodesic == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        geodesic / speed
    }
}

/// Bures angle between the chart states at the trajectory endpoints.
pub fn endpoint_geodesic<C: ParameterChart + ?Sized>(
    traj: &Trajectory,
    chart: &C,
    mode: EndpointMetric,
) -> Result<f64> {
    let a = chart.eval(traj.first())?;
    let b = chart.eval(traj.last())?;
    match (mode, a, b) {
        (EndpointMetric::Pure, ChartPoint::Pure(a), ChartPoint::Pure(b)) => bures_angle_pure(&a, &b),
        (EndpointMetric::Mixed, ChartPoint::Mixed(a), ChartPoint::Mixed(b)) => bures_angle_mixed(&a, &b),
        _ => Err(contract("endpoint metric does not match the chart's state kind")),
    }
}

/// Global speed at sample `k`; a singular metric yields `+∞`.
pub fn sampled_global_speed<C: ParameterChart + ?Sized>(traj: &Trajectory, chart: &C, k: usize) -> Result<f64> {
    let v = traj.velocity(k);
    match metric_tensor(chart, &traj.samples()[k]) {
        Ok(g) => Ok(g.quadratic_form(&v).max(0.0).sqrt()),
        Err(QslError::SingularEigenvalue { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Evaluates the global bound `ℒ / 𝒱_max`, every local bound
/// `𝔏_i / |V_i|_max`, and `τ_QSL = max(global, max_i local)`.
pub fn evaluate_bounds<C: ParameterChart + ?Sized>(
    traj: &Trajectory,
    chart: &C,
    mode: EndpointMetric,
) -> Result<QslReport> {
    if chart.dim() != traj.dim() {
        return Err(contract(format!(
            "chart has {} parameters, trajectory has {}",
            chart.dim(),
            traj.dim()
        )));
    }
    let global_geodesic = endpoint_geodesic(traj, chart, mode)?;
    let mut global_speed_max = 0.0_f64;
    for k in 0..traj.len() {
        global_speed_max = global_speed_max.max(sampled_global_speed(traj, chart, k)?);
        if global_speed_max.is_infinite() {
            break;
        }
    }
    let global_bound = ratio_bound(global_geodesic, global_speed_max);

    let r = traj.dim();
    let mut local_geodesics = Vec::with_capacity(r);
    let mut speed_max = Vec::with_capacity(r);
    let mut local_bounds = Vec::with_capacity(r);
    let mut unbounded = Vec::new();
    for i in 0..r {
        let l = local_geodesic(traj, i)?;
        let v = local_speed_max(traj, i)?;
        let b = ratio_bound(l, v);
        if b.is_infinite() {
            unbounded.push(i);
        }
        local_geodesics.push(l);
        speed_max.push(v);
        local_bounds.push(b);
    }
    let mut critical = None;
    let mut best = 0.0;
    for (i, &b) in local_bounds.iter().enumerate() {
        if b.is_finite() && (critical.is_none() || b > best) {
            best = b;
            critical = Some(i);
        }
    }
    let global_unbounded = global_bound.is_infinite();
    let global_for_max = if global_unbounded { 0.0 } else { global_bound };
    Ok(QslReport {
        global_geodesic,
        global_speed_max,
        global_bound,
        parameter_names: traj.names().to_vec(),
        local_geodesics,
        local_speed_max: speed_max,
        local_bounds,
        best_local_bound: best,
        critical_parameter: critical,
        tau_qsl: global_for_max.max(best),
        global_speed_diverged: global_speed_max.is_infinite(),
        unbounded_parameters: unbounded,
        global_unbounded,
    })
}

/// Outcome of checking a bound against the actual elapsed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub margin: f64,
}

/// `τ_QSL ≤ (t_M − t_0)(1 + 1e-6)`; margin is `elapsed − τ_QSL`.
pub fn verify_bound(traj: &Trajectory, report: &QslReport) -> BoundCheck {
    let elapsed = traj.elapsed();
    BoundCheck {
        holds: report.tau_qsl <= elapsed * (1.0 + BOUND_SLACK),
        margin: elapsed - report.tau_qsl,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BlochChart;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn line(times: &[f64], f: impl Fn(f64) -> Vec<f64>, names: &[&str]) -> Trajectory {
        Trajectory::new(
            times.to_vec(),
            times.iter().map(|&t| f(t)).collect(),
            names.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    fn grid(t0: f64, t1: f64, m: usize) -> Vec<f64> {
        (0..=m).map(|k| t0 + (t1 - t0) * k as f64 / m as f64).collect()
    }

    #[test]
    fn trajectory_validation() {
        assert!(Trajectory::new(vec![0.0, 0.0], vec![vec![1.0], vec![1.0]], vec!["a".into()]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![vec![1.0], vec![1.0, 2.0]], vec!["a".into()]).is_err());
    }

    #[test]
    fn local_geodesic_examples() {
        let t = grid(0.0, 1.0, 10);
        let tr = line(&t, |t| vec![FRAC_PI_4 + FRAC_PI_2 * t], &["chi"]);
        assert!((local_geodesic(&tr, 0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let tr = line(&t, |t| vec![(2.0 * PI * t).sin()], &["x"]);
        assert!(local_geodesic(&tr, 0).unwrap() < 1e-15);
        let tr = line(&t, |t| vec![1.0 - 2.0 * t], &["z"]);
        assert!((local_geodesic(&tr, 0).unwrap() - 2.0).abs() < 1e-15);
        assert!(local_geodesic(&tr, 1).is_err());
    }

    #[test]
    fn local_speed_examples() {
        let t = grid(0.0, 2.0, 50);
        let tr = line(&t, |t| vec![3.0 * t, 7.0], &["a", "b"]);
        assert!((local_speed_max(&tr, 0).unwrap() - 3.0).abs() < 1e-10);
        assert_eq!(local_speed_max(&tr, 1).unwrap(), 0.0);
        let m = (PI / 1e-3).round() as usize;
        let tr = line(&grid(0.0, PI, m), |t| vec![t.sin()], &["s"]);
        assert!((local_speed_max(&tr, 0).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn brachistochrone_line_saturates() {
        let v = 1.3;
        let (chi0, chit) = (FRAC_PI_4, 3.0 * FRAC_PI_4);
        let tau = (chit - chi0) / v;
        let tr = line(
            &grid(0.0, tau, 2000),
            |t| vec![chi0 + v * t, -FRAC_PI_2],
            &["chi", "phi"],
        );
        let rep = evaluate_bounds(&tr, &BlochChart, EndpointMetric::Pure).unwrap();
        assert!((rep.local_bounds[0] - tau).abs() < 1e-9);
        assert_eq!(rep.local_bounds[1], 0.0);
        assert!((rep.global_bound - tau).abs() < 1e-9);
        assert!((rep.tau_qsl - tau).abs() < 1e-9);
        assert_eq!(rep.critical_parameter, Some(0));
        let check = verify_bound(&tr, &rep);
        assert!(check.holds && check.margin.abs() < 1e-9);
    }

    #[test]
    fn static_trajectory_gives_zero() {
        let tr = line(&grid(0.0, 1.0, 10), |_| vec![1.0, 0.5], &["chi", "phi"]);
        let rep = evaluate_bounds(&tr, &BlochChart, EndpointMetric::Pure).unwrap();
        assert_eq!(rep.tau_qsl, 0.0);
        assert_eq!(rep.global_bound, 0.0);
        assert!(rep.local_bounds.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn single_point_trajectory() {
        let tr = Trajectory::new(vec![0.0], vec![vec![1.0, 0.0]], vec!["chi".into(), "phi".into()]).unwrap();
        let rep = evaluate_bounds(&tr, &BlochChart, EndpointMetric::Pure).unwrap();
        let check = verify_bound(&tr, &rep);
        assert!(check.holds);
        assert_eq!(check.margin, 0.0);
    }

    #[test]
    fn jumped_parameter_is_unbounded_and_excluded() {
        // speeds attached as zero while the endpoint moved: positive/0
        let t = grid(0.0, 1.0, 4);
        let tr = line(&t, |t| vec![0.5 + t, 0.0], &["chi", "phi"])
            .with_speeds(vec![vec![0.0, 0.0]; 5])
            .unwrap();
        let rep = evaluate_bounds(&tr, &BlochChart, EndpointMetric::Pure).unwrap();
        assert!(rep.local_bounds[0].is_infinite());
        assert_eq!(rep.unbounded_parameters, vec![0]);
        assert!(rep.global_unbounded);
        assert_eq!(rep.tau_qsl, 0.0);
        let json = serde_json::to_value(&rep).unwrap();
        assert!(json["local_bounds"][0].is_null());
    }

    #[test]
    fn resampling_invariance() {
        let path = |t: f64| vec![0.5 + t + 0.2 * (3.0 * t).sin(), 0.3 * t * t];
        let coarse = line(&grid(0.0, 1.5, 1000), path, &["chi", "phi"]);
        let fine = line(&grid(0.0, 1.5, 10000), path, &["chi", "phi"]);
        let a = evaluate_bounds(&coarse, &BlochChart, EndpointMetric::Pure)
            .unwrap()
            .tau_qsl;
        let b = evaluate_bounds(&fine, &BlochChart, EndpointMetric::Pure)
            .unwrap()
            .tau_qsl;
        assert!((a - b).abs() / b < 1e-3);
    }

    #[test]
    fn ratio_invariant_under_metric_scaling() {
        let tr = line(&grid(0.0, 1.0, 200), |t| vec![0.4 + 0.9 * t, 2.0 * t], &["chi", "phi"]);
        let base = evaluate_bounds(&tr, &BlochChart, EndpointMetric::Pure).unwrap();
        for s in [0.25, 4.0] {
            let mut vmax = 0.0_f64;
            for k in 0..tr.len() {
                let g = metric_tensor(&BlochChart, &tr.samples()[k]).unwrap().scaled(s);
                vmax = vmax.max(g.quadratic_form(&tr.velocity(k)).sqrt());
            }
            let ratio = (s.sqrt() * base.global_geodesic) / vmax;
            assert!((ratio - base.global_bound).abs() < 1e-12 * base.global_bound);
        }
    }

    #[test]
    fn best_local_is_argmax() {
        let tr = line(
            &grid(0.0, 1.0, 100),
            |t| vec![0.3 + 0.5 * t, 1.2 * t * t],
            &["chi", "phi"],
        );
        let rep = evaluate_bounds(&tr, &BlochChart, EndpointMetric::Pure).unwrap();
        let max = rep.local_bounds.iter().copied().fold(0.0, f64::max);
        assert_eq!(rep.best_local_bound, max);
        assert_eq!(rep.local_bounds[rep.critical_parameter.unwrap()], max);
        assert!(verify_bound(&tr, &rep).holds);
    }

    #[test]
    fn mismatched_chart_rejected() {
        let tr = line(&grid(0.0, 1.0, 3), |t| vec![t], &["x"]);
        assert!(evaluate_bounds(&tr, &BlochChart, EndpointMetric::Pure).is_err());
        let tr = line(&grid(0.0, 1.0, 3), |t| vec![t, 0.0], &["chi", "phi"]);
        assert!(evaluate_bounds(&tr, &BlochChart, EndpointMetric::Mixed).is_err());
    }
}
