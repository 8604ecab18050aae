// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Parallel versus sequential batch evaluation on the library's sweep kernels.
//!
//! Without the `parallel` feature both arms run sequentially, which is the
//! baseline the rayon numbers are read against.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsl_core::jc::{self, JcParams};
use qsl_core::lz::{self, LzParams, Protocol};
use qsl_core::par;

fn jc_grid() -> Vec<JcParams> {
    let mut out = Vec::new();
    for i in 0..16 {
        for j in 0..8 {
            let g = 10f64.powf(-2.0 + 4.0 * i as f64 / 15.0);
            let l = 0.25 + 0.5 * j as f64;
            out.push(JcParams::new(g, l, 0.0).expect("valid grid"));
        }
    }
    out
}

fn lz_batch() -> Vec<LzParams> {
    (0..64)
        .map(|k| {
            let slope = -1.0 + 2.0 * k as f64 / 63.0;
            LzParams::new(1.0, 0.5, Protocol::ramp(0.3, slope, 4.0).expect("valid ramp")).expect("valid params")
        })
        .collect()
}

fn bench_jc(c: &mut Criterion) {
    let grid = jc_grid();
    let kernel = |p: &JcParams| {
        let q = jc::qsl_jc(p).map(|q| q.tau_qsl).unwrap_or(f64::NAN);
        let n = jc::non_markovianity(p, 20.0).unwrap_or(f64::NAN);
        q + n
    };
    let mut group = c.benchmark_group("jc_sweep");
    group.bench_function(BenchmarkId::new("sequential", grid.len()), |b| {
        b.iter(|| par::map_sequential(black_box(&grid), kernel))
    });
    group.bench_function(BenchmarkId::new("parallel", grid.len()), |b| {
        b.iter(|| par::map(black_box(&grid), kernel))
    });
    group.finish();
}

fn bench_lz(c: &mut Criterion) {
    let batch = lz_batch();
    let kernel = |p: &LzParams| {
        lz::integrate(p, 1.0, 0.5, 4.0, 1e-2)
            .map(|t| lz::conserved_residual(&t, p, 1.0, 0.5))
            .unwrap_or(f64::NAN)
    };
    let mut group = c.benchmark_group("lz_batch");
    group.bench_function(BenchmarkId::new("sequential", batch.len()), |b| {
        b.iter(|| par::map_sequential(black_box(&batch), kernel))
    });
    group.bench_function(BenchmarkId::new("parallel", batch.len()), |b| {
        b.iter(|| par::map(black_box(&batch), kernel))
    });
    group.finish();
}

criterion_group!(benches, bench_jc, bench_lz);
criterion_main!(benches);
