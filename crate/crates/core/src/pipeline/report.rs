//! Histogram export of repeated-location distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Histogram with Freedman-Diaconis bin width `2 IQR n^(-1/3)`. Degenerate
/// spreads fall back to a single bin.
pub fn freedman_diaconis(values: &[f64]) -> Result<Histogram> {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "histogram needs finite values".into(),
        ));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (min, max) = (v[0], v[v.len() - 1]);
    let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
    let width = 2.0 * iqr / (v.len() as f64).cbrt();
    let bins = if width > 0.0 && max > min {
        (((max - min) / width).ceil() as usize).clamp(1, 10_000)
    } else {
        1
    };
    let span = if max > min { max - min } else { 1.0 };
    let lo = if max > min { min } else { min - 0.5 };
    let step = span / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| lo + step * k as f64).collect();
    let mut counts = vec![0; bins];
    for x in v {
        let k = (((x - lo) / step).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_start,bin_end,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", self.edges[k], self.edges[k + 1], c));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_every_value() {
        let v: Vec<f64> = (0..100)
            .map(|k| (k as f64 * 0.37).sin() * 3.0 + 24.0)
            .collect();
        let h = freedman_diaconis(&v).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 100);
        assert!(h.counts.len() > 1);
        let one = freedman_diaconis(&[5.0, 5.0]).unwrap();
        assert_eq!(one.counts, vec![2]);
    }
}
