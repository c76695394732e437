use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use prosumer_bench::{community, lottery, reference_profile, reference_terms};
use prosumer_core::{
    contract_payment_value, cpt_value, optimal_contract_pt, optimal_lottery_sellback,
    run_contract_simulation_with, run_lottery_simulation_with, Execution, LotterySpec, Mechanism,
    Uniform, ValueFunctionParams, WeightFunctionParams,
};

fn preferences(c: &mut Criterion) {
    let w = WeightFunctionParams::default();
    c.bench_function("prelec weight", |b| b.iter(|| w.weight(black_box(0.3))));
    c.bench_function("prelec inverse", |b| {
        b.iter(|| w.weight_inverse(black_box(0.3)))
    });
    let v = ValueFunctionParams::new(2.25, 0.88, 0.88).unwrap();
    let payoff = Uniform::new(-2.0, 3.0).unwrap();
    c.bench_function("cpt value of a uniform payoff", |b| {
        b.iter(|| cpt_value(&v, &w, black_box(&payoff)))
    });
}

fn contracts(c: &mut Criterion) {
    let p = reference_profile();
    let terms = reference_terms();
    let w = WeightFunctionParams::default();
    let linear = ValueFunctionParams::linear(2.0).unwrap();
    let curved = ValueFunctionParams::new(2.0, 0.88, 0.88).unwrap();
    c.bench_function("contract closed form", |b| {
        b.iter(|| optimal_contract_pt(black_box(&p), &terms, &linear, &w))
    });
    c.bench_function("contract payment value", |b| {
        b.iter(|| contract_payment_value(&p, &terms, &linear, &w, black_box(3.8)))
    });
    c.bench_function("contract numeric optimum", |b| {
        b.iter(|| optimal_contract_pt(black_box(&p), &terms, &curved, &w))
    });
}

fn lotteries(c: &mut Criterion) {
    let p = reference_profile();
    let w = WeightFunctionParams::default();
    let mut g = c.benchmark_group("lottery sell-back");
    for (label, scale) in [("concave region", 4e-5), ("past the inflection", 0.15)] {
        let spec = LotterySpec::new(500.0, scale).unwrap();
        g.bench_function(label, |b| {
            b.iter(|| optimal_lottery_sellback(&p, &spec, &w, black_box(5.3)))
        });
    }
    g.finish();
}

fn markets(c: &mut Criterion) {
    let mut g = c.benchmark_group("market simulation");
    g.sample_size(20);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let name = format!("{exec:?}").to_lowercase();
        let contract = community(2500, Mechanism::Contract(reference_terms()));
        g.bench_with_input(BenchmarkId::new("contract", &name), &contract, |b, s| {
            b.iter(|| run_contract_simulation_with(s, exec))
        });
        let lot = community(2500, lottery(1000.0));
        g.bench_with_input(BenchmarkId::new("lottery", &name), &lot, |b, s| {
            b.iter(|| run_lottery_simulation_with(s, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, preferences, contracts, lotteries, markets);
criterion_main!(benches);
