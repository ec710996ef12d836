//! Dense reference QUBOs with their own generator and evaluator, so the
//! oracle shares no code with the library beyond the builder used to hand
//! the same coefficients over.

#![allow(dead_code)]

use hyqubo::{QuboBuilder, QuboModel, Sample};

/// SplitMix64, kept local to the tests.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| (self.next_u64() & 1) as u8).collect()
    }
}

#[derive(Debug, Clone)]
pub struct DenseQubo {
    pub n: usize,
    pub offset: f64,
    pub lin: Vec<f64>,
    /// `quad[i][j]` for `i < j`.
    pub quad: Vec<Vec<f64>>,
}

impl DenseQubo {
    /// Integer coefficients in -5..=5 or reals in [-1, 1), pairs present with
    /// probability `density`.
    pub fn random(rng: &mut TestRng, n: usize, density: f64) -> Self {
        let integral = rng.next_u64() & 1 == 0;
        let coeff = |rng: &mut TestRng| {
            if integral {
                rng.below(11) as f64 - 5.0
            } else {
                2.0 * rng.unit() - 1.0
            }
        };
        let offset = coeff(rng);
        let lin = (0..n).map(|_| coeff(rng)).collect();
        let mut quad = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                if rng.unit() < density {
                    quad[i][j] = coeff(rng);
                }
            }
        }
        DenseQubo { n, offset, lin, quad }
    }

    pub fn model(&self) -> QuboModel {
        let mut b = QuboBuilder::new(self.n);
        b.add_offset(self.offset);
        for i in 0..self.n {
            b.add_linear(i, self.lin[i]);
            for j in i + 1..self.n {
                b.add_quadratic(i, j, self.quad[i][j]);
            }
        }
        b.build()
    }

    pub fn energy(&self, x: &[u8]) -> f64 {
        let mut e = self.offset;
        for i in 0..self.n {
            if x[i] == 1 {
                e += self.lin[i];
                for j in i + 1..self.n {
                    if x[j] == 1 {
                        e += self.quad[i][j];
                    }
                }
            }
        }
        e
    }

    /// Truth-table minimum; among equal energies the bit-lexicographically
    /// smallest assignment (bit 0 most significant) wins.
    pub fn brute_min(&self) -> (Vec<u8>, f64) {
        assert!(self.n <= 22);
        let mut best: Option<(Vec<u8>, f64)> = None;
        for mask in 0u64..(1 << self.n) {
            let x: Vec<u8> = (0..self.n).map(|i| ((mask >> i) & 1) as u8).collect();
            let e = self.energy(&x);
            let better = match &best {
                None => true,
                Some((bx, be)) => e < *be || (e == *be && x < *bx),
            };
            if better {
                best = Some((x, e));
            }
        }
        best.expect("at least one assignment")
    }
}

pub fn sample(bits: Vec<u8>) -> Sample {
    Sample::new(bits).expect("binary")
}

/// `count` models with sizes cycling through `min_n..=max_n` and densities
/// 0.2, 0.5, 0.9.
pub fn corpus(seed: u64, count: usize, min_n: usize, max_n: usize) -> Vec<DenseQubo> {
    let mut rng = TestRng::new(seed);
    (0..count)
        .map(|k| {
            let n = min_n + k % (max_n - min_n + 1);
            let density = [0.2, 0.5, 0.9][k % 3];
            DenseQubo::random(&mut rng, n, density)
        })
        .collect()
}
