use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{QuboBuilder, QuboError, QuboModel};

/// Wire form of a model:
/// `{"n": 3, "linear": [[i, c], ...], "quadratic": [[i, j, c], ...], "offset": c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboDocument {
    pub n: usize,
    #[serde(default)]
    pub linear: Vec<(usize, f64)>,
    #[serde(default)]
    pub quadratic: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub offset: f64,
}

impl From<&QuboModel> for QuboDocument {
    fn from(m: &QuboModel) -> Self {
        QuboDocument {
            n: m.num_variables(),
            linear: m.linear_terms().iter().map(|(&i, &c)| (i, c)).collect(),
            quadratic: m.quadratic_terms().iter().map(|(&(i, j), &c)| (i, j, c)).collect(),
            offset: m.offset(),
        }
    }
}

impl TryFrom<QuboDocument> for QuboModel {
    type Error = QuboError;

    fn try_from(doc: QuboDocument) -> Result<Self, Self::Error> {
        let mut b = QuboBuilder::new(doc.n);
        let mut seen = BTreeSet::new();
        for (i, c) in doc.linear {
            if i >= doc.n {
                return Err(QuboError::IndexOutOfRange { index: i, n: doc.n });
            }
            if !seen.insert(i) {
                return Err(QuboError::Format(format!("duplicate linear term for variable {i}")));
            }
            check_finite(c)?;
            b.add_linear(i, c);
        }
        let mut seen = BTreeSet::new();
        for (i, j, c) in doc.quadratic {
            if i >= j {
                return Err(QuboError::Format(format!(
                    "quadratic term ({i}, {j}) must satisfy i < j"
                )));
            }
            if j >= doc.n {
                return Err(QuboError::IndexOutOfRange { index: j, n: doc.n });
            }
            if !seen.insert((i, j)) {
                return Err(QuboError::Format(format!("duplicate quadratic term ({i}, {j})")));
            }
            check_finite(c)?;
            b.add_quadratic(i, j, c);
        }
        check_finite(doc.offset)?;
        b.add_offset(doc.offset);
        Ok(b.build())
    }
}

fn check_finite(c: f64) -> Result<(), QuboError> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(QuboError::Format(format!("non-finite coefficient {c}")))
    }
}

impl QuboModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&QuboDocument::from(self)).expect("QUBO document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, QuboError> {
        let doc: QuboDocument =
            serde_json::from_str(text).map_err(|e| QuboError::Format(e.to_string()))?;
        QuboModel::try_from(doc)
    }
}
