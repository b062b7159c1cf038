//! Krippendorff's alpha for nominal data, coincidence-matrix formulation.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::read_utf8;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A reliability dataset: which annotator gave which label to which item.
/// Missing (annotator, item) cells are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReliabilityData {
    pub items: Vec<String>,
    pub annotators: Vec<String>,
    pub labels: BTreeMap<(String, String), String>,
}

impl ReliabilityData {
    /// Builds a dataset from (annotator, item, label) triples. Requires at
    /// least two annotators; a duplicated (annotator, item) cell is an error.
    pub fn from_records(
        records: impl IntoIterator<Item = (String, String, String)>,
    ) -> Result<Self> {
        let mut labels: BTreeMap<(String, String), String> = BTreeMap::new();
        let mut items: Vec<String> = Vec::new();
        let mut annotators: Vec<String> = Vec::new();
        for (annotator, item, label) in records {
            if label.is_empty() {
                return Err(Error::Invalid(format!(
                    "empty label for annotator \"{annotator}\" on item \"{item}\""
                )));
            }
            if !annotators.contains(&annotator) {
                annotators.push(annotator.clone());
            }
            if !items.contains(&item) {
                items.push(item.clone());
            }
            if labels.insert((annotator.clone(), item.clone()), label).is_some() {
                return Err(Error::Invalid(format!(
                    "annotator \"{annotator}\" labels item \"{item}\" twice"
                )));
            }
        }
        if annotators.len() < 2 {
            return Err(Error::Invalid(
                "reliability data needs at least two annotators".into(),
            ));
        }
        Ok(ReliabilityData {
            items,
            annotators,
            labels,
        })
    }

    /// Labels given to `item`, in annotator order.
    fn item_labels(&self, item: &str) -> Vec<&str> {
        self.annotators
            .iter()
            .filter_map(|a| self.labels.get(&(a.clone(), item.to_string())))
            .map(String::as_str)
            .collect()
    }
}

/// Loads a reliability dataset from TSV with columns annotator, item, label.
/// Blank lines and lines starting with `#` are skipped.
pub fn load_reliability(path: &Path) -> Result<ReliabilityData> {
    let text = read_utf8(path)?;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected 3 tab-separated columns, got {}", cols.len()),
            ));
        }
        records.push((cols[0].to_string(), cols[1].to_string(), cols[2].to_string()));
    }
    ReliabilityData::from_records(records)
}

/// Krippendorff's alpha with the nominal difference function.
///
/// Items with fewer than two annotations contribute nothing. Returns `None`
/// when expected disagreement is zero (fewer than two distinct labels among
/// the multiply-annotated items), where alpha is undefined.
pub fn krippendorff_alpha<F: Scalar>(data: &ReliabilityData) -> Option<F> {
    // Map labels to dense indices over multiply-annotated items only.
    let mut label_ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut item_votes: Vec<Vec<usize>> = Vec::new();
    for item in &data.items {
        let labels = data.item_labels(item);
        if labels.len() < 2 {
            continue;
        }
        let votes = labels
            .into_iter()
            .map(|l| {
                let next = label_ids.len();
                *label_ids.entry(l).or_insert(next)
            })
            .collect();
        item_votes.push(votes);
    }
    let k = label_ids.len();
    if k < 2 {
        return None;
    }

    // Coincidence matrix: each ordered pair of votes within an item adds
    // 1/(m-1) to its cell.
    let mut coincidence = vec![vec![F::zero(); k]; k];
    for votes in &item_votes {
        let weight = F::one() / F::from_usize_lossy(votes.len() - 1);
        for (i, &a) in votes.iter().enumerate() {
            for (j, &b) in votes.iter().enumerate() {
                if i != j {
                    coincidence[a][b] += weight;
                }
            }
        }
    }

    let totals: Vec<F> = coincidence
        .iter()
        .map(|row| row.iter().copied().sum())
        .collect();
    let n: F = totals.iter().copied().sum();

    let mut observed = F::zero();
    let mut expected = F::zero();
    for c in 0..k {
        for l in (c + 1)..k {
            observed += coincidence[c][l];
            expected += totals[c] * totals[l];
        }
    }
    if expected <= F::zero() {
        return None;
    }
    Some(F::one() - (n - F::one()) * observed / expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: &[(&str, &str, &str)]) -> ReliabilityData {
        ReliabilityData::from_records(
            rows.iter()
                .map(|(a, i, l)| (a.to_string(), i.to_string(), l.to_string())),
        )
        .unwrap()
    }

    #[test]
    fn worked_example() {
        // Two annotators, five items: (a,a),(a,b),(b,b),(b,b),(a,a).
        let d = data(&[
            ("r1", "i1", "a"),
            ("r2", "i1", "a"),
            ("r1", "i2", "a"),
            ("r2", "i2", "b"),
            ("r1", "i3", "b"),
            ("r2", "i3", "b"),
            ("r1", "i4", "b"),
            ("r2", "i4", "b"),
            ("r1", "i5", "a"),
            ("r2", "i5", "a"),
        ]);
        let alpha: f64 = krippendorff_alpha(&d).unwrap();
        assert!((alpha - 0.64).abs() < 1e-12, "alpha = {alpha}");
    }

    #[test]
    fn perfect_agreement_is_exactly_one() {
        let d = data(&[
            ("r1", "i1", "x"),
            ("r2", "i1", "x"),
            ("r1", "i2", "y"),
            ("r2", "i2", "y"),
        ]);
        assert_eq!(krippendorff_alpha::<f64>(&d), Some(1.0));
    }

    #[test]
    fn single_label_everywhere_is_undefined() {
        let d = data(&[
            ("r1", "i1", "x"),
            ("r2", "i1", "x"),
            ("r1", "i2", "x"),
            ("r2", "i2", "x"),
        ]);
        assert_eq!(krippendorff_alpha::<f64>(&d), None);
    }

    #[test]
    fn singleton_items_are_excluded() {
        // The lone annotation on i3 must not affect the result.
        let base = data(&[
            ("r1", "i1", "a"),
            ("r2", "i1", "a"),
            ("r1", "i2", "a"),
            ("r2", "i2", "b"),
        ]);
        let with_singleton = data(&[
            ("r1", "i1", "a"),
            ("r2", "i1", "a"),
            ("r1", "i2", "a"),
            ("r2", "i2", "b"),
            ("r1", "i3", "b"),
        ]);
        assert_eq!(
            krippendorff_alpha::<f64>(&base),
            krippendorff_alpha::<f64>(&with_singleton)
        );
    }
}
