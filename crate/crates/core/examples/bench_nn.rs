//! Dev-time micro-benchmark for the training hot path.

use crashgan_core::cgan::{build_discriminator, build_generator};
use crashgan_core::nn::Gradients;
use std::hint::black_box;
use std::time::Instant;

fn main() {
    let mut rng = crashgan_core::rng::stream(1, "bench", 0);
    let g = build_generator(4, &mut rng).unwrap();
    let d = build_discriminator(4, &mut rng).unwrap();
    let x = [0.3, 0.6, 0.2, 0.9];
    let y = [2.0];
    let z = [0.5, -1.0, 0.3, 0.1];

    let n = 100_000;

    let t = Instant::now();
    for _ in 0..n {
        black_box(d.forward(&[&x, &y]).unwrap());
    }
    println!("d.forward:        {:6.0} ns", t.elapsed().as_nanos() as f64 / n as f64);

    let t = Instant::now();
    for _ in 0..n {
        black_box(d.forward_cached(&[&x, &y]).unwrap());
    }
    println!("d.forward_cached: {:6.0} ns", t.elapsed().as_nanos() as f64 / n as f64);

    let cache = d.forward_cached(&[&x, &y]).unwrap();
    let mut grads = Gradients::zeros_like(&d);
    let t = Instant::now();
    for _ in 0..n {
        d.backward_into(&cache, &[0.3], &mut grads).unwrap();
    }
    println!("d.backward_into:  {:6.0} ns", t.elapsed().as_nanos() as f64 / n as f64);

    let t = Instant::now();
    for _ in 0..n {
        black_box(d.backward_inputs(&cache, &[0.3]).unwrap());
    }
    println!("d.backward_inputs:{:6.0} ns", t.elapsed().as_nanos() as f64 / n as f64);

    let t = Instant::now();
    for _ in 0..n {
        black_box(g.forward_cached(&[&y, &z]).unwrap());
    }
    println!("g.forward_cached: {:6.0} ns", t.elapsed().as_nanos() as f64 / n as f64);

    let g_cache = g.forward_cached(&[&y, &z]).unwrap();
    let mut g_grads = Gradients::zeros_like(&g);
    let t = Instant::now();
    for _ in 0..n {
        g.backward_into(&g_cache, &[0.1, 0.1, 0.1, 0.1], &mut g_grads).unwrap();
    }
    println!("g.backward_into:  {:6.0} ns", t.elapsed().as_nanos() as f64 / n as f64);

    // Per-epoch estimate: D step = 200 d.fwd_cached + 200 d.bwd + 100 g.fwd;
    // G step = 100 g.fwd_cached + 100 d.fwd_cached + 100 d.bwd_inputs + 100 g.bwd.
}
