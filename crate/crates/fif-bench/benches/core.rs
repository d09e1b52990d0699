use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fif_core::attractor::{self, ChaosGameParams};
use fif_core::continuation::{self, Address};
use fif_core::ifs::{ifs_from_data, DataNode, InterpolationIFS};
use fif_core::{analysis, PolylineApproximant};

fn tent(p: f64) -> InterpolationIFS {
    ifs_from_data(
        &[
            DataNode::new(0.0, 0.0),
            DataNode::new(1.0, 1.0),
            DataNode::new(2.0, 0.0),
        ],
        &[p, p],
    )
    .unwrap()
}

fn bench_chaos_game(c: &mut Criterion) {
    let ifs = tent(0.3);
    c.bench_function("chaos_game_100k", |b| {
        b.iter(|| attractor::chaos_game(&ifs, &ChaosGameParams::new(black_box(100_000), 7)))
    });
}

fn bench_evaluate(c: &mut Criterion) {
    let ifs = tent(0.3);
    c.bench_function("evaluate_depth_40", |b| {
        b.iter(|| attractor::evaluate(&ifs, black_box(0.77), 40))
    });
}

fn bench_w_operator(c: &mut Criterion) {
    let ifs = tent(0.3);
    c.bench_function("w_operator_12_rounds", |b| {
        b.iter(|| {
            let mut f = PolylineApproximant::chord(&ifs).unwrap();
            for _ in 0..12 {
                f = attractor::w_operator(&ifs, &f).unwrap();
            }
            f
        })
    });
}

fn bench_hausdorff(c: &mut Criterion) {
    let ifs = tent(0.3);
    let a = attractor::chaos_game(&ifs, &ChaosGameParams::new(50_000, 1)).unwrap();
    let b2 = attractor::chaos_game(&ifs, &ChaosGameParams::new(50_000, 2)).unwrap();
    c.bench_function("hausdorff_50k", |b| {
        b.iter(|| attractor::hausdorff_distance(black_box(&a), black_box(&b2)))
    });
}

fn bench_continue_eval(c: &mut Criterion) {
    let ifs = tent(0.3);
    let theta = Address::parse("(2)", 2).unwrap();
    c.bench_function("continue_eval_depth_60", |b| {
        b.iter(|| continuation::continue_eval(&ifs, &theta, black_box(-7.5), 60))
    });
}

fn bench_box_dimension(c: &mut Criterion) {
    let cloud = attractor::chaos_game(&tent(0.8), &ChaosGameParams::new(200_000, 3)).unwrap();
    c.bench_function("box_dimension_200k", |b| {
        b.iter(|| analysis::box_dimension(black_box(&cloud), 4..=9))
    });
}

criterion_group!(
    benches,
    bench_chaos_game,
    bench_evaluate,
    bench_w_operator,
    bench_hausdorff,
    bench_continue_eval,
    bench_box_dimension
);
criterion_main!(benches);
