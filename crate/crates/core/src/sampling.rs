//! Deterministic random vectors for certification and ratio estimation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DetRng = ChaCha8Rng;

/// A ChaCha8 generator seeded from a u64; streams separate independent uses of one seed.
pub fn seeded_rng(seed: u64, stream: u64) -> DetRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws from the certification mix: uniform on [0,1]^n, sparse (each coordinate
/// zeroed with probability 3/4), or spiky (one coordinate multiplied by n), each
/// with probability 1/3.
pub fn sample_mixed<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mode = rng.gen_range(0..3);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    match mode {
        0 => {}
        1 => {
            for c in x.iter_mut() {
                if rng.gen::<f64>() < 0.75 {
                    *c = 0.0;
                }
            }
        }
        _ => {
            let i = rng.gen_range(0..n);
            x[i] *= n as f64;
        }
    }
    x
}

/// Like [`sample_mixed`] but never returns the zero vector.
pub fn sample_mixed_nonzero<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let x = sample_mixed(rng, n);
        if x.iter().any(|&c| c > 0.0) {
            return x;
        }
    }
}

/// Wider mix for ratio estimation: the certification modes plus flat vectors
/// (all coordinates equal, random support size).
pub fn sample_ratio_mix<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    if rng.gen_range(0..4) == 3 {
        let k = rng.gen_range(1..=n);
        let level = rng.gen::<f64>() + 1e-3;
        let mut x = vec![0.0; n];
        for c in x.iter_mut().take(k) {
            *c = level;
        }
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            x.swap(i, j);
        }
        x
    } else {
        sample_mixed_nonzero(rng, n)
    }
}

/// Adds `rel * max(x) * U[0,1)` to each coordinate so samples leave tie sets.
pub fn jitter<R: Rng>(rng: &mut R, x: &mut [f64], rel: f64) {
    let scale = x.iter().fold(0.0_f64, |m, &v| m.max(v)).max(1e-300);
    for c in x.iter_mut() {
        *c += rel * scale * rng.gen::<f64>();
    }
}

/// One draw from the density proportional to exp(-1/(t(1-t))) on (0,1), by rejection
/// against the uniform proposal (the density peaks at t = 1/2 with value e^-4).
pub fn sample_bump<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let t: f64 = rng.gen();
        if t <= 0.0 || t >= 1.0 {
            continue;
        }
        let accept = (4.0 - 1.0 / (t * (1.0 - t))).exp();
        if rng.gen::<f64>() < accept {
            return t;
        }
    }
}
