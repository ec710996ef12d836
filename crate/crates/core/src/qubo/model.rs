use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};

use super::{QuboError, Sample};

/// A quadratic unconstrained binary model, minimized over `{0, 1}^n`.
///
/// Terms are stored sparsely: linear coefficients per variable and quadratic
/// coefficients for ordered pairs `(i, j)` with `i < j`. Diagonal terms are
/// folded into the linear part (`x * x == x` for binaries) and exact zeros are
/// never stored. The model is immutable once built; use [`QuboBuilder`] to
/// assemble one.
#[derive(Debug, Clone)]
pub struct QuboModel {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    // Dense views derived from the term maps, used by the hot loops.
    dense_linear: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for QuboModel {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.linear == other.linear
            && self.quadratic == other.quadratic
            && self.offset == other.offset
    }
}

impl QuboModel {
    /// A model over `n` variables with no terms and a zero offset.
    pub fn empty(n: usize) -> Self {
        QuboBuilder::new(n).build()
    }

    pub fn num_variables(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear_terms(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic_terms(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    /// Linear coefficient of variable `i` (zero when absent).
    pub fn linear(&self, i: usize) -> f64 {
        self.dense_linear[i]
    }

    /// Quadratic coefficient of the pair `{i, j}` (zero when absent or `i == j`).
    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    /// Quadratic neighbors of `i` with their coupling coefficients.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Largest total coefficient magnitude touching a single variable.
    pub fn max_incident_magnitude(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.dense_linear[i].abs()
                    + self.adjacency[i].iter().map(|&(_, q)| q.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Objective value of `sample`.
    pub fn energy(&self, sample: &Sample) -> Result<f64, QuboError> {
        self.check_len(sample.len())?;
        Ok(self.energy_of(sample.bits()))
    }

    /// Objective value of a raw bit slice whose length is already known to be `n`.
    pub fn energy_of(&self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.n);
        let mut e = self.offset;
        for (&i, &c) in &self.linear {
            if bits[i] != 0 {
                e += c;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if bits[i] != 0 && bits[j] != 0 {
                e += c;
            }
        }
        e
    }

    /// `energy(flip(sample, i)) - energy(sample)`, in `O(degree(i))`.
    pub fn delta_energy_flip(&self, sample: &Sample, i: usize) -> Result<f64, QuboError> {
        self.check_len(sample.len())?;
        if i >= self.n {
            return Err(QuboError::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(self.flip_delta(sample.bits(), i))
    }

    /// Unchecked variant of [`delta_energy_flip`](Self::delta_energy_flip).
    pub fn flip_delta(&self, bits: &[u8], i: usize) -> f64 {
        let field = self.local_field(bits, i);
        if bits[i] == 0 {
            field
        } else {
            -field
        }
    }

    /// `linear_i + sum_j Q_ij x_j`: the energy change of setting `x_i` from 0 to 1.
    pub fn local_field(&self, bits: &[u8], i: usize) -> f64 {
        let mut field = self.dense_linear[i];
        for &(j, q) in &self.adjacency[i] {
            if bits[j] != 0 {
                field += q;
            }
        }
        field
    }

    /// Local fields for every variable at `bits`.
    pub fn local_fields(&self, bits: &[u8]) -> Vec<f64> {
        (0..self.n).map(|i| self.local_field(bits, i)).collect()
    }

    /// Deterministic content hash. Independent of the order terms were inserted.
    pub fn fingerprint(&self) -> Fingerprint {
        let mut hasher = Sha256::new();
        hasher.update(b"qubo/v1");
        hasher.update((self.n as u64).to_le_bytes());
        hasher.update(canonical_bits(self.offset).to_le_bytes());
        hasher.update((self.linear.len() as u64).to_le_bytes());
        for (&i, &c) in &self.linear {
            hasher.update((i as u64).to_le_bytes());
            hasher.update(canonical_bits(c).to_le_bytes());
        }
        hasher.update((self.quadratic.len() as u64).to_le_bytes());
        for (&(i, j), &c) in &self.quadratic {
            hasher.update((i as u64).to_le_bytes());
            hasher.update((j as u64).to_le_bytes());
            hasher.update(canonical_bits(c).to_le_bytes());
        }
        Fingerprint(hasher.finalize().into())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<(), QuboError> {
        if len != self.n {
            return Err(QuboError::DimensionMismatch {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }
}

fn canonical_bits(x: f64) -> u64 {
    // -0.0 and 0.0 must hash identically.
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

/// Accumulates terms and produces a normalized [`QuboModel`].
#[derive(Debug, Clone)]
pub struct QuboBuilder {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboBuilder {
    pub fn new(n: usize) -> Self {
        QuboBuilder {
            n,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn num_variables(&self) -> usize {
        self.n
    }

    /// Adds `coeff * x_i`.
    ///
    /// # Panics
    ///
    /// Panics if `i >= n`.
    pub fn add_linear(&mut self, i: usize, coeff: f64) -> &mut Self {
        assert!(i < self.n, "variable {i} out of range for n = {}", self.n);
        *self.linear.entry(i).or_insert(0.0) += coeff;
        self
    }

    /// Adds `coeff * x_i * x_j`. Diagonal terms fold into the linear part and
    /// `(j, i)` is stored as `(i, j)`.
    ///
    /// # Panics
    ///
    /// Panics if either index is `>= n`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, coeff: f64) -> &mut Self {
        assert!(
            i < self.n && j < self.n,
            "pair ({i}, {j}) out of range for n = {}",
            self.n
        );
        if i == j {
            return self.add_linear(i, coeff);
        }
        let key = if i < j { (i, j) } else { (j, i) };
        *self.quadratic.entry(key).or_insert(0.0) += coeff;
        self
    }

    pub fn add_offset(&mut self, c: f64) -> &mut Self {
        self.offset += c;
        self
    }

    /// Adds `weight * (sum_k coeffs_k x_{vars_k} - target)^2`.
    pub fn add_squared_penalty(&mut self, terms: &[(usize, f64)], target: f64, weight: f64) -> &mut Self {
        self.add_offset(weight * target * target);
        for (a, &(i, ci)) in terms.iter().enumerate() {
            // x^2 == x for binaries
            self.add_linear(i, weight * (ci * ci - 2.0 * target * ci));
            for &(j, cj) in &terms[a + 1..] {
                self.add_quadratic(i, j, 2.0 * weight * ci * cj);
            }
        }
        self
    }

    pub fn build(self) -> QuboModel {
        let linear: BTreeMap<usize, f64> = self.linear.into_iter().filter(|&(_, c)| c != 0.0).collect();
        let quadratic: BTreeMap<(usize, usize), f64> =
            self.quadratic.into_iter().filter(|&(_, c)| c != 0.0).collect();
        let mut dense_linear = vec![0.0; self.n];
        for (&i, &c) in &linear {
            dense_linear[i] = c;
        }
        let mut adjacency = vec![Vec::new(); self.n];
        for (&(i, j), &c) in &quadratic {
            adjacency[i].push((j, c));
            adjacency[j].push((i, c));
        }
        QuboModel {
            n: self.n,
            linear,
            quadratic,
            offset: if self.offset == 0.0 { 0.0 } else { self.offset },
            dense_linear,
            adjacency,
        }
    }
}

/// SHA-256 content hash of a model or instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub [u8; 32]);

impl Fingerprint {
    pub fn of_bytes(bytes: &[u8]) -> Self {
        Fingerprint(Sha256::digest(bytes).into())
    }
}

impl std::str::FromStr for Fingerprint {
    type Err = QuboError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QuboError::Format(format!("bad fingerprint {s:?}"));
        if s.len() != 64 || !s.is_ascii() {
            return Err(bad());
        }
        let mut out = [0u8; 32];
        for (k, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&s[2 * k..2 * k + 2], 16).map_err(|_| bad())?;
        }
        Ok(Fingerprint(out))
    }
}

impl serde::Serialize for Fingerprint {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Fingerprint {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}
