use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use std::hint::black_box;

use y00_bench::mesoscopic_session;
use y00_core::cryptanalysis::{block_encrypt, Scorer, SAMPLE_ENGLISH};
use y00_core::eve::EveAttacker;
use y00_core::experiments::run_key_recovery;
use y00_core::keystream::KeystreamSpec;
use y00_core::optics::overlap;
use y00_core::session::run_session;
use y00_core::CipherScenario;

fn bench_overlap(c: &mut Criterion) {
    c.bench_function("overlap_closed_form", |b| {
        b.iter(|| overlap(black_box(700), black_box(1800), black_box(1024), black_box(20.0)))
    });
}

fn bench_lfsr(c: &mut Criterion) {
    let spec = KeystreamSpec::lfsr16(0xACE1, 10).unwrap();
    let mut group = c.benchmark_group("keystream");
    group.throughput(Throughput::Elements(10_000));
    group.bench_function("lfsr16_10k_bases", |b| {
        b.iter_batched(
            || spec.instantiate().unwrap(),
            |mut gen| {
                let mut acc = 0u32;
                for _ in 0..10_000 {
                    acc ^= gen.next_base(10);
                }
                acc
            },
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn bench_session(c: &mut Criterion) {
    let honest = mesoscopic_session(10_000, 1);
    let mut group = c.benchmark_group("session");
    group.throughput(Throughput::Elements(10_000));
    group.sample_size(20);
    group.bench_function("honest_10k_symbols", |b| {
        b.iter(|| run_session(black_box(&honest), None).unwrap())
    });
    group.bench_function("attacked_10k_symbols", |b| {
        b.iter(|| run_session(black_box(&honest), Some(&EveAttacker::new(1.0))).unwrap())
    });
    group.finish();
}

fn bench_feistel(c: &mut Criterion) {
    c.bench_function("feistel_encrypt", |b| {
        b.iter(|| block_encrypt(black_box(0x6A5C), black_box(0xACE1), black_box(4)))
    });
}

fn bench_brute_force(c: &mut Criterion) {
    // 8-bit key space keeps one iteration under a second while exercising the
    // same per-key path as the 16-bit demonstrations.
    let cfg = {
        let mut cfg = mesoscopic_session(2048, 2);
        cfg.keystream = KeystreamSpec::new(0xB7, 8, vec![8, 6, 5, 4], 10).unwrap();
        cfg
    };
    let scenario = CipherScenario::one_time_pad(SAMPLE_ENGLISH.to_vec()).unwrap();
    let mut group = c.benchmark_group("brute_force");
    group.sample_size(10);
    group.bench_function("otp_8bit_keyspace", |b| {
        b.iter(|| run_key_recovery(black_box(&cfg), &scenario, &Scorer::English, false).unwrap())
    });
    group.finish();

    // Isolated scorer cost on a 256-byte candidate.
    c.bench_function("score_256_bytes", |b| {
        let scorer = Scorer::English;
        b.iter(|| scorer.score(black_box(SAMPLE_ENGLISH)))
    });
}

criterion_group!(
    benches,
    bench_overlap,
    bench_lfsr,
    bench_session,
    bench_feistel,
    bench_brute_force
);
criterion_main!(benches);
