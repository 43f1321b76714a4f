use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pecbound::bounds::{self, BoundOptions, InnerMode, WeightVector};
use pecbound::rational::{int, ratio};
use pecbound::relay::{self, CutSpec, RelayGraph};
use pecbound::Mode;
use pecbound_bench::{independent_channel, xor_channel};

fn outer(c: &mut Criterion) {
    let mut group = c.benchmark_group("outer_max_weighted");
    let opts = BoundOptions::default();
    let ch = xor_channel();
    group.bench_function("xor_example", |b| {
        b.iter(|| bounds::outer_max_weighted(black_box(&ch), &WeightVector::ones(2), &opts).unwrap())
    });
    for (k, m) in [(2, 3), (3, 2), (3, 3)] {
        let ch = independent_channel(k, m);
        let mu = WeightVector((1..=k).map(|j| ratio(j as i64, 2)).collect());
        group.bench_with_input(BenchmarkId::new("independent", format!("K{k}_M{m}")), &ch, |b, ch| {
            b.iter(|| bounds::outer_max_weighted(ch, &mu, &opts).unwrap())
        });
    }
    let float = BoundOptions { mode: Mode::Float, ..Default::default() };
    let ch = independent_channel(3, 3);
    group.bench_function("independent_float/K3_M3", |b| {
        b.iter(|| bounds::outer_max_weighted(&ch, &WeightVector::ones(3), &float).unwrap())
    });
    group.finish();
}

fn lp(c: &mut Criterion) {
    let ch = independent_channel(3, 2);
    let sys = bounds::outer_joint_system(&ch, &BoundOptions::default()).unwrap();
    let obj = BTreeMap::from([("R[1]".to_string(), int(1)), ("R[2]".to_string(), int(2)), ("R[3]".to_string(), int(1))]);
    let mut group = c.benchmark_group("joint_lp");
    group.sample_size(10);
    for mode in [Mode::Exact, Mode::Float] {
        group.bench_function(mode.to_string(), |b| b.iter(|| sys.maximize_named(&obj, mode).unwrap()));
    }
    group.finish();
}

fn inner(c: &mut Criterion) {
    let ch = independent_channel(3, 3);
    let mu = WeightVector::ones(3);
    c.bench_function("inner/capacity_sum/K3_M3", |b| {
        b.iter(|| bounds::inner_max_weighted(&ch, &mu, InnerMode::CapacitySum, Mode::Exact).unwrap())
    });
    c.bench_function("inner/time_sharing/K3_M3", |b| {
        b.iter(|| bounds::timesharing_lp(&ch, &mu, Mode::Exact).unwrap())
    });
}

fn reduction(c: &mut Criterion) {
    let graph = RelayGraph::two_relay_example(ratio(1, 2), ratio(9, 10)).unwrap();
    let cut = CutSpec::new(&graph, &["t1", "t2", "r_d"], &["r_b"]).unwrap();
    c.bench_function("relay/reduce", |b| b.iter(|| relay::reduce(black_box(&graph), &cut).unwrap()));
    c.bench_function("relay/network_rate_bound", |b| {
        b.iter(|| relay::network_rate_bound(&graph, &cut, &BoundOptions::default()).unwrap())
    });
}

criterion_group!(benches, outer, lp, inner, reduction);
criterion_main!(benches);
