use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Fingerprint, QuboError, QuboModel};

/// A binary assignment, one `0`/`1` byte per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Sample(Vec<u8>);

impl Sample {
    pub fn new(bits: Vec<u8>) -> Result<Self, QuboError> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(QuboError::NonBinary { position: pos, value: bits[pos] });
        }
        Ok(Sample(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Sample(vec![0; n])
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Sample(bits.into_iter().map(u8::from).collect())
    }

    /// Bits of the integer `mask`, least significant bit is variable 0.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Sample((0..n).map(|k| ((mask >> k) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = u8::from(value);
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn flipped(&self, i: usize) -> Sample {
        let mut s = self.clone();
        s.flip(i);
        s
    }

    /// Every bit inverted.
    pub fn complement(&self) -> Sample {
        Sample(self.0.iter().map(|&b| b ^ 1).collect())
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }
}

impl TryFrom<Vec<u8>> for Sample {
    type Error = QuboError;

    fn try_from(bits: Vec<u8>) -> Result<Self, Self::Error> {
        Sample::new(bits)
    }
}

impl From<Sample> for Vec<u8> {
    fn from(s: Sample) -> Self {
        s.0
    }
}

/// A sample with its energy and how many times it was observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample: Sample,
    pub energy: f64,
    pub occurrences: u64,
}

impl SampleRecord {
    /// Evaluates `sample` against `model`; the stored energy is always the model's.
    pub fn new(model: &QuboModel, sample: Sample) -> Result<Self, QuboError> {
        let energy = model.energy(&sample)?;
        Ok(SampleRecord {
            sample,
            energy,
            occurrences: 1,
        })
    }

    pub fn with_occurrences(mut self, occurrences: u64) -> Self {
        self.occurrences = occurrences.max(1);
        self
    }

    /// Total order: energy ascending, then bit-lexicographic.
    pub fn cmp_quality(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then_with(|| self.sample.cmp(&other.sample))
    }

    /// `true` if `self` is strictly better than `other` under [`cmp_quality`](Self::cmp_quality).
    pub fn better_than(&self, other: &Self) -> bool {
        self.cmp_quality(other) == Ordering::Less
    }
}

/// Picks the better of two optional records under the total quality order.
pub fn best_of(a: Option<SampleRecord>, b: SampleRecord) -> SampleRecord {
    match a {
        Some(a) if !b.better_than(&a) => a,
        _ => b,
    }
}

/// Records sorted ascending by energy (ties bit-lexicographic), tagged with the
/// fingerprint of the model that produced them. Identical samples are merged
/// and their occurrences summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    records: Vec<SampleRecord>,
    model_fingerprint: Fingerprint,
    /// Number of records whose energy was reported by an external sampler and
    /// replaced by the locally evaluated value.
    #[serde(default)]
    corrected_energies: usize,
}

impl SampleSet {
    /// Builds a set from raw samples, evaluating each against `model`.
    pub fn from_samples(
        model: &QuboModel,
        samples: impl IntoIterator<Item = Sample>,
    ) -> Result<Self, QuboError> {
        let records = samples
            .into_iter()
            .map(|s| SampleRecord::new(model, s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_records(model, records)
    }

    /// Builds a set from records, re-verifying every energy against `model`.
    pub fn from_records(model: &QuboModel, records: Vec<SampleRecord>) -> Result<Self, QuboError> {
        let mut checked = Vec::with_capacity(records.len());
        for r in records {
            let energy = model.energy(&r.sample)?;
            checked.push(SampleRecord {
                sample: r.sample,
                energy,
                occurrences: r.occurrences.max(1),
            });
        }
        Ok(Self::normalized(checked, model.fingerprint(), 0))
    }

    pub(crate) fn normalized(
        mut records: Vec<SampleRecord>,
        model_fingerprint: Fingerprint,
        corrected_energies: usize,
    ) -> Self {
        records.sort_by(SampleRecord::cmp_quality);
        let mut merged: Vec<SampleRecord> = Vec::with_capacity(records.len());
        for r in records {
            match merged.last_mut() {
                Some(last) if last.sample == r.sample => last.occurrences += r.occurrences,
                _ => merged.push(r),
            }
        }
        SampleSet {
            records: merged,
            model_fingerprint,
            corrected_energies,
        }
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<SampleRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Lowest-energy record.
    pub fn best(&self) -> Option<&SampleRecord> {
        self.records.first()
    }

    pub fn model_fingerprint(&self) -> Fingerprint {
        self.model_fingerprint
    }

    pub fn corrected_energies(&self) -> usize {
        self.corrected_energies
    }

    /// `true` if any externally reported energy disagreed with local evaluation.
    pub fn has_energy_mismatch(&self) -> bool {
        self.corrected_energies > 0
    }

    pub fn total_occurrences(&self) -> u64 {
        self.records.iter().map(|r| r.occurrences).sum()
    }

    /// Merges two sets produced from the same model.
    pub fn merge(self, other: SampleSet) -> Result<SampleSet, QuboError> {
        if self.model_fingerprint != other.model_fingerprint {
            return Err(QuboError::FingerprintMismatch);
        }
        let corrected = self.corrected_energies + other.corrected_energies;
        let mut records = self.records;
        records.extend(other.records);
        Ok(Self::normalized(records, self.model_fingerprint, corrected))
    }
}
