//! JSON exchange format for atomic measures:
//! `{"n": 2, "is_even": false, "atoms": [[x1, x2, w], ...], "diameter_hint": 1.41}`.

use super::{AtomicMeasure, PointCloud};
use crate::error::{param, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDocument {
    pub n: usize,
    pub is_even: bool,
    pub atoms: Vec<Vec<f64>>,
    pub diameter_hint: f64,
}

impl MeasureDocument {
    pub fn from_measure(mu: &AtomicMeasure) -> Self {
        let atoms = mu
            .cloud()
            .iter()
            .map(|(p, w)| {
                let mut row = p.to_vec();
                row.push(w);
                row
            })
            .collect();
        Self {
            n: mu.dim(),
            is_even: mu.is_even(),
            atoms,
            diameter_hint: mu.diameter_hint(),
        }
    }

    /// Validates the document. An `is_even` flag is only honoured when every
    /// atom has a reflected partner of equal weight.
    pub fn into_measure(self) -> Result<AtomicMeasure> {
        let n = self.n;
        if n == 0 {
            return Err(param("measure dimension must be positive"));
        }
        let mut coords = Vec::with_capacity(self.atoms.len() * n);
        let mut weights = Vec::with_capacity(self.atoms.len());
        for (i, row) in self.atoms.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(param(format!("atom {i} has {} entries, expected {}", row.len(), n + 1)));
            }
            let w = row[n];
            if !w.is_finite() || w < 0.0 {
                return Err(param(format!("atom {i} has invalid weight {w}")));
            }
            coords.extend_from_slice(&row[..n]);
            weights.push(w);
        }
        if !self.diameter_hint.is_finite() || self.diameter_hint < 0.0 {
            return Err(param("diameter_hint must be finite and nonnegative"));
        }
        let cloud = PointCloud::new(n, coords, weights)?;
        if self.is_even && !has_reflection_pairs(&cloud) {
            return Err(param("is_even is set but atoms are not paired with their reflections"));
        }
        Ok(AtomicMeasure::from_cloud(cloud, self.is_even, self.diameter_hint))
    }
}

fn has_reflection_pairs(cloud: &PointCloud) -> bool {
    let key = |p: &[f64], w: f64| -> Vec<u64> {
        let mut k: Vec<u64> = p.iter().map(|x| (x + 0.0).to_bits()).collect();
        k.push(w.to_bits());
        k
    };
    let mut forward: Vec<Vec<u64>> = cloud.iter().map(|(p, w)| key(p, w)).collect();
    let mut reflected: Vec<Vec<u64>> = cloud
        .iter()
        .map(|(p, w)| {
            let q: Vec<f64> = p.iter().map(|x| -x).collect();
            key(&q, w)
        })
        .collect();
    forward.sort_unstable();
    reflected.sort_unstable();
    forward == reflected
}

pub fn read_measure_json(path: &Path) -> Result<AtomicMeasure> {
    let text = std::fs::read_to_string(path)?;
    let doc: MeasureDocument = serde_json::from_str(&text)?;
    doc.into_measure()
}

pub fn write_measure_json(mu: &AtomicMeasure, path: &Path) -> Result<()> {
    let doc = MeasureDocument::from_measure(mu);
    std::fs::write(path, serde_json::to_string(&doc)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_cantor_product_centered, build_falconer_lattice};

    #[test]
    fn round_trip_through_json() {
        let m = build_cantor_product_centered(0.25, 2, 2).unwrap();
        let text = serde_json::to_string(&MeasureDocument::from_measure(&m)).unwrap();
        let back: MeasureDocument = serde_json::from_str(&text).unwrap();
        let back = back.into_measure().unwrap();
        assert_eq!(back.cloud(), m.cloud());
        assert!(back.is_even());
    }

    #[test]
    fn rejects_negative_weights_and_bad_rows() {
        let doc = r#"{"n":1,"is_even":false,"atoms":[[0.5,-1.0]],"diameter_hint":1.0}"#;
        let d: MeasureDocument = serde_json::from_str(doc).unwrap();
        assert!(d.into_measure().is_err());
        let doc = r#"{"n":2,"is_even":false,"atoms":[[0.5,1.0]],"diameter_hint":1.0}"#;
        let d: MeasureDocument = serde_json::from_str(doc).unwrap();
        assert!(d.into_measure().is_err());
        // NaN is not valid JSON, so the parser already refuses it.
        let doc = r#"{"n":1,"is_even":false,"atoms":[[0.5,NaN]],"diameter_hint":1.0}"#;
        assert!(serde_json::from_str::<MeasureDocument>(doc).is_err());
    }

    #[test]
    fn rejects_false_even_flag() {
        let mut d = MeasureDocument::from_measure(&build_falconer_lattice(2, 1.0, 2).unwrap());
        d.is_even = true;
        assert!(d.into_measure().is_err());
    }
}
