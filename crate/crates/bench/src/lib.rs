//! Benchmark-only crate; see the `benches/` targets.

use coop_bandits::numerics::{Mat, RandomStream};

/// Random symmetric matrix with entries in [-1, 1].
pub fn random_symmetric(order: usize, seed: u64) -> Mat {
    let mut stream = RandomStream::new(seed);
    let mut a = Mat::zeros(order, order);
    for i in 0..order {
        for j in 0..=i {
            let x = 2.0 * stream.next_f64() - 1.0;
            a[(i, j)] = x;
            a[(j, i)] = x;
        }
    }
    a
}
