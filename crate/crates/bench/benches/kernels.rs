use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use urllc_bench::scenario;
use urllc_core::availability::{shadow_threshold, unavailability};
use urllc_core::blocklength::simo_error;
use urllc_core::modes::packet_loss_df_multi;
use urllc_core::range::available_range_fixed_split;
use urllc_core::{DfMultiSnr, LinearizedQ, ModeId};

fn closed_forms(c: &mut Criterion) {
    let lq = LinearizedQ::new(800.0, 160.0);
    let mut g = c.benchmark_group("closed_forms");
    for nt in [1u32, 8, 128] {
        let s = lq.theta / (0.5 * nt as f64);
        g.bench_with_input(BenchmarkId::new("simo_error", nt), &nt, |b, &nt| {
            b.iter(|| simo_error(black_box(s), nt, &lq))
        });
        let d = DfMultiSnr {
            c_sr: lq.theta * 2.0,
            c_br: lq.theta / nt as f64,
            nt,
        };
        g.bench_with_input(BenchmarkId::new("df_multi_error", nt), &d, |b, d| {
            b.iter(|| black_box(d).error(&lq))
        });
    }
    g.finish();
}

fn threshold(c: &mut Criterion) {
    let sc = scenario(ModeId::DfMulti, 32);
    let ch = sc.channel;
    let mu_c = ch.gain(250.0, 0.0).unwrap();
    c.bench_function("shadow_threshold/df_multi", |b| {
        b.iter(|| {
            shadow_threshold(
                |d| {
                    let mu = ch.gain(40.0, d).unwrap_or(0.0);
                    packet_loss_df_multi(mu_c, mu_c, mu, 4e-4, 4e-4, &sc.sys).unwrap_or(1.0)
                },
                black_box(1e-7),
                ch.sigma_db,
            )
        })
    });
}

fn availability(c: &mut Criterion) {
    let mut g = c.benchmark_group("unavailability");
    g.sample_size(10);
    for (mode, nt, r) in [
        (ModeId::D2d, 1, 10.0),
        (ModeId::DfCellular, 8, 70.0),
        (ModeId::DfMulti, 32, 35.0),
        (ModeId::DfMulti, 128, 40.0),
    ] {
        let sc = scenario(mode, nt);
        g.bench_function(BenchmarkId::new(mode.name(), nt), |b| {
            b.iter(|| unavailability(&sc, black_box(r), 4e-4, 4e-4, None).unwrap())
        });
    }
    g.finish();
}

fn range(c: &mut Criterion) {
    let mut g = c.benchmark_group("range_fixed_split");
    g.sample_size(10);
    let sc = scenario(ModeId::DfMulti, 32);
    g.bench_function("df_multi/32", |b| {
        b.iter(|| available_range_fixed_split(4e-4, 4e-4, black_box(&sc)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, closed_forms, threshold, availability, range);
criterion_main!(benches);
