// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Property tests over the public API.

use std::f64::consts::PI;

use proptest::prelude::*;

use qsl_core::bounds::{evaluate_bounds, verify_bound, EndpointMetric};
use qsl_core::geometry::{
    bures_angle_mixed, bures_angle_pure, metric_tensor, BlochChart, MixedStateParam, PureStateParam,
};
use qsl_core::jc::{self, JcParams, Regime};
use qsl_core::lz::{self, LzParams, Protocol};
use qsl_core::par;
use qsl_core::transport;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bloch_metric_matches_closed_form(chi in 0.2..(PI - 0.2), phi in -PI..PI) {
        let g = metric_tensor(&BlochChart, &[chi, phi]).unwrap();
        prop_assert!((g.get(0, 0) - 0.25).abs() < 1e-9);
        prop_assert!((g.get(1, 1) - 0.25 * chi.sin().powi(2)).abs() < 1e-9);
        prop_assert!(g.get(0, 1).abs() < 1e-9);
    }

    #[test]
    fn bures_angle_is_a_bounded_symmetric_distance(
        a in prop::collection::vec(0.05..1.0f64, 3),
        b in prop::collection::vec(0.05..1.0f64, 3),
        pa in prop::collection::vec(-PI..PI, 3),
        pb in prop::collection::vec(-PI..PI, 3),
    ) {
        let norm = |v: &[f64]| { let n = v.iter().map(|x| x * x).sum::<f64>().sqrt(); v.iter().map(|x| x / n).collect::<Vec<_>>() };
        let x = PureStateParam::new(norm(&a), pa).unwrap();
        let y = PureStateParam::new(norm(&b), pb).unwrap();
        let d = bures_angle_pure(&x, &y).unwrap();
        prop_assert!((0.0..=PI / 2.0 + 1e-12).contains(&d));
        prop_assert!((d - bures_angle_pure(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(bures_angle_pure(&x, &x).unwrap() < 1e-7);
    }

    #[test]
    fn diagonal_bures_angle_is_classical(p in 0.01..0.99f64, q in 0.01..0.99f64) {
        let a = MixedStateParam::diagonal(vec![p, 1.0 - p]).unwrap();
        let b = MixedStateParam::diagonal(vec![q, 1.0 - q]).unwrap();
        let expected = ((p * q).sqrt() + ((1.0 - p) * (1.0 - q)).sqrt()).min(1.0).acos();
        prop_assert!((bures_angle_mixed(&a, &b).unwrap() - expected).abs() < 1e-7);
    }

    #[test]
    fn lz_constant_gamma_respects_bound(v in 0.3..2.0f64, c in -2.0..2.0f64, g in -3.0..3.0f64, chi0 in 0.4..(PI - 0.4), phi0 in -PI..PI) {
        let params = LzParams::new(v, c, Protocol::Constant(g)).unwrap();
        let traj = lz::integrate(&params, chi0, phi0, 2.0, 1e-2).unwrap();
        prop_assert!(lz::conserved_residual(&traj, &params, chi0, phi0) < 1e-6);
        let t = traj.to_trajectory().unwrap();
        let report = evaluate_bounds(&t, &BlochChart, EndpointMetric::Pure).unwrap();
        prop_assert!(verify_bound(&t, &report).holds);
    }

    #[test]
    fn optimal_lz_time_is_angle_over_v(v in 0.3..2.0f64, chi0 in 0.3..1.4f64, chi_tau in 1.7..2.8f64) {
        let base = LzParams::new(v, 0.7, Protocol::Constant(0.0)).unwrap();
        let opt = lz::optimal_protocol(&base, chi0, chi_tau, 0.0).unwrap();
        let traj = lz::integrate(&opt.params, chi0, 0.0, 10.0, 1e-3).unwrap();
        let expected = lz::qsl_time_lz(v, chi0, chi_tau).unwrap();
        prop_assert!((traj.arrival_time.unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn no_ramp_beats_the_brachistochrone(
        v in 0.3..2.0f64, c in -2.0..2.0f64, a in -3.0..3.0f64, b in -2.0..2.0f64,
        chi0 in 0.4..1.2f64, chi_tau in 1.5..2.7f64, phi0 in -PI..PI,
    ) {
        let params = LzParams::new(v, c, Protocol::ramp(a, b, 20.0).unwrap()).unwrap().with_target(chi_tau);
        let traj = lz::integrate(&params, chi0, phi0, 20.0, 1e-2).unwrap();
        if let Some(t) = traj.arrival_time {
            prop_assert!(t >= lz::qsl_time_lz(v, chi0, chi_tau).unwrap() - 1e-6);
        }
    }

    #[test]
    fn jc_population_is_a_probability(g in 0.01..50.0f64, l in 0.2..5.0f64, frac in 0.0..1.0f64) {
        let p = JcParams::new(g, l, 0.0).unwrap();
        let t = p.domain_end().unwrap_or(30.0 / l) * frac;
        let r = jc::rho11_closed_form(t, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn jc_decay_is_monotone_below_threshold(g in 0.01..0.49f64, t in 0.0..40.0f64) {
        let p = JcParams::new(g, 1.0, 0.0).unwrap();
        prop_assert_eq!(p.regime(), Regime::Weak);
        prop_assert!(jc::sigma_backflow(t, &p).unwrap() <= 0.0);
    }

    #[test]
    fn conveyor_bound_grows_as_sqrt_d(d in 0.5..50.0f64, s in 1.5..9.0f64) {
        let a = transport::qsl_conveyor(1.0, 1.0, 2000.0, 0.04, d).unwrap();
        let b = transport::qsl_conveyor(1.0, 1.0, 2000.0, 0.04, s * d).unwrap();
        prop_assert!((b / a - s.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let grid: Vec<JcParams> = [0.05, 0.5, 2.0, 20.0]
        .iter()
        .map(|&g| JcParams::new(g, 1.0, 0.0).unwrap())
        .collect();
    let kernel = |p: &JcParams| jc::qsl_jc(p).unwrap().tau_qsl.to_bits();
    assert_eq!(par::map(&grid, kernel), par::map_sequential(&grid, kernel));
}

#[test]
fn sweep_rows_are_deterministic() {
    let a = jc::sweep_qsl(&[0.1, 1.0, 10.0], &[0.5, 1.0], 20.0).unwrap();
    let b = jc::sweep_qsl(&[0.1, 1.0, 10.0], &[0.5, 1.0], 20.0).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.tau_qsl.to_bits(), y.tau_qsl.to_bits());
        assert_eq!(x.n.to_bits(), y.n.to_bits());
    }
}

#[test]
fn transport_surface_is_monotone() {
    let ds: Vec<f64> = (1..=12).map(|k| 2.5 * k as f64).collect();
    let k2s: Vec<f64> = (0..10).map(|k| 10f64.powf(2.0 + 0.5 * k as f64)).collect();
    let surface = transport::bound_surface(0.0355, &ds, &k2s).unwrap();
    let tau = |i: usize, j: usize| surface[i * k2s.len() + j].tau;
    for i in 0..ds.len() {
        for j in 0..k2s.len() {
            if i + 1 < ds.len() {
                assert!(tau(i + 1, j) > tau(i, j), "τ must grow with d");
            }
            if j + 1 < k2s.len() {
                assert!(tau(i, j + 1) < tau(i, j), "τ must fall with ⟨K²⟩");
            }
        }
    }
}

#[test]
fn jc_qsl_falls_with_coupling() {
    let gammas: Vec<f64> = (0..29).map(|k| 10f64.powf(-3.0 + 5.0 * k as f64 / 28.0)).collect();
    let lambdas = [0.5, 1.0, 2.0];
    let rows = jc::sweep_qsl(&gammas, &lambdas, 50.0).unwrap();
    for curve in rows.chunks(gammas.len()) {
        for w in curve.windows(2) {
            assert!(
                w[1].tau_qsl < w[0].tau_qsl,
                "λ0={}: τ({}) ≥ τ({})",
                w[0].lambda0,
                w[1].gamma0,
                w[0].gamma0
            );
        }
        let weak = &curve[0];
        assert!(
            (weak.tau_qsl * weak.gamma0 - 1.0).abs() < 0.05,
            "λ0={}: weak end off 1/γ0",
            weak.lambda0
        );
    }
}
