//! Hot-path benchmarks: normal estimation, descriptor extraction, geodesic
//! matching and transfer fitting.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use depth_reid::covdesc::{extract_dvcov, extract_ed, CovKind, CovMatrix6, ExtractConfig};
use depth_reid::geometry::estimate_normals;
use depth_reid::spdmanifold::{dvcov_distance, geodesic_distance, random_spd6};
use depth_reid::synthbench::{generate_body, generate_paired_features, SyntheticBodySpec};
use depth_reid::transfer::{fit_transfer, KernelConfig, TransferHyperParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_geodesic(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pairs: Vec<(CovMatrix6, CovMatrix6)> = (0..64)
        .map(|_| {
            (
                CovMatrix6::new(CovKind::Within, random_spd6(&mut rng)),
                CovMatrix6::new(CovKind::Within, random_spd6(&mut rng)),
            )
        })
        .collect();
    c.bench_function("geodesic_distance_6x6", |b| {
        let mut i = 0;
        b.iter(|| {
            let (x, y) = &pairs[i % pairs.len()];
            i += 1;
            black_box(geodesic_distance(x, y).unwrap())
        })
    });
}

fn bench_extraction(c: &mut Criterion) {
    let spec = SyntheticBodySpec {
        noise_sigma: 2.0,
        ..Default::default()
    };
    let (labeled, joints) = generate_body(&spec, 7);
    c.bench_function("estimate_normals_body", |b| {
        b.iter(|| black_box(estimate_normals(&labeled.cloud, 10).unwrap()))
    });

    let cloud = estimate_normals(&labeled.cloud, 10).unwrap();
    let cfg = ExtractConfig::default();
    c.bench_function("extract_dvcov_frame", |b| {
        b.iter(|| black_box(extract_dvcov(&cloud, &joints, &cfg).unwrap()))
    });

    let descriptor = extract_dvcov(&cloud, &joints, &cfg).unwrap();
    c.bench_function("extract_ed_frame", |b| {
        b.iter(|| black_box(extract_ed(&descriptor).unwrap()))
    });

    let (labeled2, joints2) = generate_body(&spec, 8);
    let cloud2 = estimate_normals(&labeled2.cloud, 10).unwrap();
    let descriptor2 = extract_dvcov(&cloud2, &joints2, &cfg).unwrap();
    c.bench_function("dvcov_distance_pair", |b| {
        b.iter(|| black_box(dvcov_distance(&descriptor, &descriptor2).unwrap()))
    });
}

fn bench_transfer(c: &mut Criterion) {
    let aux = generate_paired_features(20, 8, 5);
    let hp = TransferHyperParams {
        m: 30,
        ..Default::default()
    };
    let kc = KernelConfig::from_mean_distances(&aux).unwrap();
    c.bench_function("fit_transfer_20x8_m30", |b| {
        b.iter_batched(
            || (aux.clone(), hp, kc),
            |(aux, hp, kc)| black_box(fit_transfer(&aux, &hp, &kc).unwrap()),
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(benches, bench_geodesic, bench_extraction, bench_transfer);
criterion_main!(benches);
