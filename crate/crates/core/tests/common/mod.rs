#![allow(dead_code)]

use backscatter_core::special_kernels::phi;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `phi_{a_1} * ... * phi_{a_m}` at time `t` by iterated composite Simpson
/// convolution on a uniform grid of `2n` intervals.
pub fn chain_by_convolution(a: &[f64], t: f64, n: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let m = 2 * n;
    let h = t / m as f64;
    let grid: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
    let mut cur: Vec<f64> = grid.iter().map(|&s| phi(a[0], s)).collect();
    for &ak in &a[1..] {
        let kern: Vec<f64> = grid.iter().map(|&s| phi(ak, s)).collect();
        let mut next = vec![0.0; m + 1];
        for i in 1..=m {
            let f = |j: usize| cur[j] * kern[i - j];
            next[i] = if i == 1 {
                0.5 * h * (f(0) + f(1))
            } else if i % 2 == 0 {
                simpson_sum(&f, 0, i, h)
            } else {
                let three = 3.0 * h / 8.0 * (f(0) + 3.0 * f(1) + 3.0 * f(2) + f(3));
                three + if i > 3 { simpson_sum(&f, 3, i, h) } else { 0.0 }
            };
        }
        cur = next;
    }
    cur[m]
}

fn simpson_sum<F: Fn(usize) -> f64>(f: &F, lo: usize, hi: usize, h: f64) -> f64 {
    let mut s = f(lo) + f(hi);
    for j in lo + 1..hi {
        s += if (j - lo) % 2 == 1 { 4.0 } else { 2.0 } * f(j);
    }
    s * h / 3.0
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random radii whose squares are pairwise separated by at least `gap`.
pub fn separated_radii(rng: &mut impl Rng, len: usize, max: f64, gap: f64) -> Vec<f64> {
    loop {
        let r: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..max)).collect();
        let ok = (0..len).all(|i| (i + 1..len).all(|j| (r[i] * r[i] - r[j] * r[j]).abs() > gap));
        if ok {
            return r;
        }
    }
}
