use criterion::{criterion_group, criterion_main, Criterion};
use doakit_bench::{covariance_and_eigen, geometry, snapshots};
use doakit_core::beamform::{angle_grid, capon_spectrum, default_loading, delay_and_sum_spectrum};
use doakit_core::covariance::{eigendecompose, sample_covariance};
use doakit_core::enumeration::mdl;
use doakit_core::subspace::{esprit_tls, find_peaks, music_spectrum, root_music, split_subspaces};
use doakit_core::EspritSubarrays;
use std::hint::black_box;

fn bench_covariance_and_eigen(c: &mut Criterion) {
    let x6 = snapshots(6, 1024, 20.0, 1);
    let x10 = snapshots(10, 1024, 10.0, 1);
    c.bench_function("sample_covariance_m6_n1024", |b| {
        b.iter(|| sample_covariance(black_box(&x6)).unwrap())
    });
    let r6 = sample_covariance(&x6).unwrap();
    let r10 = sample_covariance(&x10).unwrap();
    c.bench_function("eigendecompose_m6", |b| {
        b.iter(|| eigendecompose(black_box(&r6)).unwrap())
    });
    c.bench_function("eigendecompose_m10", |b| {
        b.iter(|| eigendecompose(black_box(&r10)).unwrap())
    });
}

fn bench_spectra(c: &mut Criterion) {
    let x = snapshots(6, 1024, 20.0, 1);
    let (r, eig) = covariance_and_eigen(&x);
    let g = geometry(6);
    let grid = angle_grid(0.1);
    let split = split_subspaces(&eig, 3).unwrap();

    c.bench_function("delay_sum_spectrum_1801pts", |b| {
        b.iter(|| delay_and_sum_spectrum(black_box(&r), &g, &grid).unwrap())
    });
    let loading = default_loading(&r);
    c.bench_function("capon_spectrum_1801pts", |b| {
        b.iter(|| capon_spectrum(black_box(&r), &g, &grid, loading).unwrap())
    });
    c.bench_function("music_spectrum_1801pts", |b| {
        b.iter(|| music_spectrum(black_box(&split), &g, &grid).unwrap())
    });
    let trace = music_spectrum(&split, &g, &grid).unwrap();
    c.bench_function("find_peaks_1801pts", |b| {
        b.iter(|| find_peaks(black_box(&trace), 3).unwrap())
    });
}

fn bench_search_free(c: &mut Criterion) {
    let x10 = snapshots(10, 1024, 10.0, 1);
    let (_, eig10) = covariance_and_eigen(&x10);
    let split10 = split_subspaces(&eig10, 3).unwrap();
    let g10 = geometry(10);
    c.bench_function("root_music_m10", |b| {
        b.iter(|| root_music(black_box(&split10), &g10).unwrap())
    });

    let x6 = snapshots(6, 1000, 12.0, 1);
    let (_, eig6) = covariance_and_eigen(&x6);
    let g6 = geometry(6);
    c.bench_function("esprit_tls_m6", |b| {
        b.iter(|| esprit_tls(black_box(&eig6), &g6, 3, EspritSubarrays::MaxOverlap).unwrap())
    });
}

fn bench_full_trial(c: &mut Criterion) {
    // Simulation through MUSIC peaks, the hot path of a Monte-Carlo sweep.
    let g = geometry(6);
    let grid = angle_grid(0.1);
    c.bench_function("full_trial_music_m6_n1024", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            let x = snapshots(6, 1024, 20.0, seed);
            let (r, eig) = covariance_and_eigen(&x);
            let d = mdl(eig.eigenvalues(), r.num_snapshots_used()).unwrap().num_sources;
            let split = split_subspaces(&eig, d.max(1)).unwrap();
            let trace = music_spectrum(&split, &g, &grid).unwrap();
            find_peaks(&trace, d.max(1))
        })
    });
}

criterion_group!(
    benches,
    bench_covariance_and_eigen,
    bench_spectra,
    bench_search_free,
    bench_full_trial
);
criterion_main!(benches);
