use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use labelnoise::nn::{batch_objective, Mode};
use labelnoise::{
    backward_correct, ce_loss_vector, estimate_transition, inject_noise, invert, PosteriorBatch, Preset, ProbVector,
    Tensor, TransitionMatrix,
};

fn fashion06() -> TransitionMatrix {
    TransitionMatrix::validate(&[vec![0.4, 0.3, 0.3], vec![0.3, 0.4, 0.3], vec![0.3, 0.3, 0.4]]).unwrap()
}

fn ramp(shape: &[usize]) -> Tensor {
    let n: usize = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|i| (i * 37 % 101) as f64 / 101.0).collect()).unwrap()
}

fn algebra(c: &mut Criterion) {
    let t = fashion06();
    c.bench_function("invert_3x3", |b| b.iter(|| invert(black_box(t.matrix())).unwrap()));

    let p = ProbVector::new(vec![0.2, 0.5, 0.3]).unwrap();
    c.bench_function("backward_correct", |b| {
        b.iter(|| backward_correct(black_box(&t), &ce_loss_vector(black_box(&p))).unwrap())
    });

    let labels: Vec<usize> = (0..30_000).map(|i| i % 3).collect();
    c.bench_function("inject_noise_30k", |b| {
        b.iter(|| inject_noise(black_box(&labels), &t, 7).unwrap())
    });

    let rows: Vec<Vec<f64>> = (0..10_000)
        .map(|i| {
            let w = [(i % 7) as f64 + 1.0, (i % 5) as f64 + 1.0, (i % 3) as f64 + 1.0];
            let s: f64 = w.iter().sum();
            (0..3).map(|j| (0..3).map(|k| w[k] / s * t.prob(k, j)).sum()).collect()
        })
        .collect();
    let batch = PosteriorBatch::from_rows(3, rows).unwrap();
    c.bench_function("estimate_transition_10k", |b| {
        b.iter(|| estimate_transition(black_box(&batch), 1).unwrap())
    });
}

fn network(c: &mut Criterion) {
    let t = fashion06();
    let x = ramp(&[32, 1, 32, 32]);
    let labels: Vec<usize> = (0..32).map(|i| i % 3).collect();
    let mut group = c.benchmark_group("lenet5_batch32");
    group.sample_size(20);

    let mut net = Preset::Lenet5.build(1, 3, 0).unwrap();
    net.set_mode(Mode::Eval);
    group.bench_function("infer", |b| b.iter(|| net.infer(black_box(&x)).unwrap()));

    group.bench_function("forward_backward", |b| {
        b.iter_batched(
            || {
                let mut n = Preset::Lenet5.build(1, 3, 0).unwrap();
                n.set_mode(Mode::Train);
                n
            },
            |mut n| {
                let z = n.forward(&x).unwrap();
                let (_, dz) = batch_objective(&z, &labels, &t).unwrap();
                n.backward(&dz).unwrap()
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, algebra, network);
criterion_main!(benches);
