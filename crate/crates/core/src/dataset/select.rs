//! Selection of the sub-grid that covers a parameter estimate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{GridAxes, GridCell};
use super::group::DataGroupManifest;
use crate::error::{Error, Result};
use crate::estimation::ParameterEstimate;
use crate::fault::CanonicalFault;

/// The estimated quantities the selection rule looks at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionQuery {
    pub fault_type: CanonicalFault,
    pub zs_aerial: Complex64,
    /// `None` keeps the whole zero-mode axis.
    pub zs_zero: Option<Complex64>,
    pub loading_deg: f64,
    pub fia_deg: f64,
    pub rf_range: [f64; 2],
}

impl From<&ParameterEstimate> for SelectionQuery {
    fn from(e: &ParameterEstimate) -> Self {
        SelectionQuery {
            fault_type: e.fault_type,
            zs_aerial: e.zs_aerial,
            zs_zero: e.zs_zero,
            loading_deg: e.loading_deg,
            fia_deg: e.fia_deg,
            rf_range: e.rf_range,
        }
    }
}

/// Chosen axis indices. Equal selections train identical datasets, which is
/// what makes this usable as a cache key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Selection {
    pub fault_type: CanonicalFault,
    pub sources: Vec<u16>,
    pub loading: Vec<u16>,
    pub rf: Vec<u16>,
    pub lf: Vec<u16>,
    pub fia: Vec<u16>,
}

impl Selection {
    pub fn len(&self) -> usize {
        self.sources.len() * self.loading.len() * self.rf.len() * self.lf.len() * self.fia.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: &GridCell) -> bool {
        self.sources.contains(&c.source)
            && self.loading.contains(&c.loading)
            && self.rf.contains(&c.rf)
            && self.lf.contains(&c.lf)
            && self.fia.contains(&c.fia)
    }

    /// Whole grid for one fault type.
    pub fn everything(axes: &GridAxes, fault_type: CanonicalFault) -> Self {
        let all = |n: usize| (0..n as u16).collect::<Vec<_>>();
        let d = axes.dims();
        Selection {
            fault_type,
            sources: all(d[0]),
            loading: all(d[1]),
            rf: all(d[2]),
            lf: all(d[3]),
            fia: all(d[4]),
        }
    }

    /// Selected axis values, for reports.
    pub fn echo(&self, axes: &GridAxes) -> SelectionEcho {
        let pick = |idx: &[u16], v: &[f64]| idx.iter().map(|&k| v[k as usize]).collect();
        SelectionEcho {
            fault_type: self.fault_type,
            sources: self
                .sources
                .iter()
                .map(|&k| axes.sources[k as usize])
                .collect(),
            loading_deg: pick(&self.loading, &axes.loading_deg),
            rf_ohm: pick(&self.rf, &axes.rf_ohm),
            lf_km: pick(&self.lf, &axes.lf_km),
            fia_deg: pick(&self.fia, &axes.fia_deg),
        }
    }
}

/// Axis values of a selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionEcho {
    pub fault_type: CanonicalFault,
    pub sources: Vec<(Complex64, Complex64)>,
    pub loading_deg: Vec<f64>,
    pub rf_ohm: Vec<f64>,
    pub lf_km: Vec<f64>,
    pub fia_deg: Vec<f64>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Positions (into `keys`, which must be sorted ascending) of the values
/// bracketing `x`: an exact hit brings both neighbours, an estimate outside
/// the hull keeps the two nearest values.
pub fn bracket(keys: &[f64], x: f64) -> Vec<usize> {
    let n = keys.len();
    if n <= 1 {
        return (0..n).collect();
    }
    if let Some(i) = keys.iter().position(|&k| close(k, x)) {
        return (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect();
    }
    if x < keys[0] {
        return vec![0, 1];
    }
    if x > keys[n - 1] {
        return vec![n - 2, n - 1];
    }
    let i = keys.iter().rposition(|&k| k < x).unwrap_or(0);
    vec![i, i + 1]
}

/// Circular variant for angles in degrees; `keys` sorted within [0, 360).
pub fn bracket_circular(keys: &[f64], x: f64) -> Vec<usize> {
    let n = keys.len();
    if n <= 1 {
        return (0..n).collect();
    }
    let x = x.rem_euclid(360.0);
    let dist = |k: f64| {
        let d = (k - x).rem_euclid(360.0);
        d.min(360.0 - d)
    };
    if let Some(i) = keys.iter().position(|&k| dist(k) <= 1e-9) {
        let mut out = vec![(i + n - 1) % n, i, (i + 1) % n];
        out.sort_unstable();
        out.dedup();
        return out;
    }
    let below = keys.iter().rposition(|&k| k < x).unwrap_or(n - 1);
    let mut out = vec![below, (below + 1) % n];
    out.sort_unstable();
    out.dedup();
    out
}

/// Grid positions inside `[lo, hi]` plus the nearest value outside on each
/// side. `keys` sorted ascending.
pub fn cover_interval(keys: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    let n = keys.len();
    let inside: Vec<usize> = (0..n).filter(|&k| keys[k] >= lo && keys[k] <= hi).collect();
    let below = keys.iter().rposition(|&k| k < lo);
    let above = keys.iter().position(|&k| k > hi);
    below.into_iter().chain(inside).chain(above).collect()
}

/// Sorts values and returns (sorted keys, original index per sorted slot).
fn sorted_keys(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    (idx.iter().map(|&k| values[k]).collect(), idx)
}

fn select_scalar(values: &[f64], pick: impl Fn(&[f64]) -> Vec<usize>) -> Vec<u16> {
    let (keys, order) = sorted_keys(values);
    let mut out: Vec<u16> = pick(&keys).into_iter().map(|p| order[p] as u16).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Distinct complex values in first-seen order.
fn unique(values: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for v in values {
        if !out.iter().any(|u| close(u.re, v.re) && close(u.im, v.im)) {
            out.push(v);
        }
    }
    out
}

fn select_impedance(values: &[Complex64], est: Complex64) -> Vec<Complex64> {
    let mags: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    select_scalar(&mags, |k| bracket(k, est.norm()))
        .into_iter()
        .map(|k| values[k as usize])
        .collect()
}

/// Applies the selection rule to a grid.
pub fn select_axes(axes: &GridAxes, q: &SelectionQuery) -> Result<Selection> {
    let aerial_all = unique(axes.sources.iter().map(|s| s.0));
    let zero_all = unique(axes.sources.iter().map(|s| s.1));
    let aerial = select_impedance(&aerial_all, q.zs_aerial);
    let zero = match q.zs_zero {
        Some(z) => select_impedance(&zero_all, z),
        None => zero_all.clone(),
    };
    let member = |set: &[Complex64], z: Complex64| {
        set.iter().any(|u| close(u.re, z.re) && close(u.im, z.im))
    };
    let sources: Vec<u16> = axes
        .sources
        .iter()
        .enumerate()
        .filter(|(_, (a, z))| member(&aerial, *a) && member(&zero, *z))
        .map(|(k, _)| k as u16)
        .collect();

    let [lo, hi] = q.rf_range;
    if !(lo <= hi) {
        return Err(Error::Selection(format!(
            "empty fault-resistance interval [{lo}, {hi}]"
        )));
    }
    let sel = Selection {
        fault_type: q.fault_type,
        sources,
        loading: select_scalar(&axes.loading_deg, |k| bracket(k, q.loading_deg)),
        rf: select_scalar(&axes.rf_ohm, |k| cover_interval(k, lo, hi)),
        lf: (0..axes.lf_km.len() as u16).collect(),
        fia: {
            let wrapped: Vec<f64> = axes.fia_deg.iter().map(|f| f.rem_euclid(360.0)).collect();
            select_scalar(&wrapped, |k| bracket_circular(k, q.fia_deg))
        },
    };
    if sel.is_empty() {
        return Err(Error::Selection(format!(
            "no grid cell matches the estimate: {} source pairs (aerial {:?}, zero {:?}), {} loadings, {} resistances, {} locations, {} inception angles",
            sel.sources.len(),
            aerial,
            zero,
            sel.loading.len(),
            sel.rf.len(),
            sel.lf.len(),
            sel.fia.len()
        )));
    }
    Ok(sel)
}

/// Selects the target dataset of an estimate from a generated group.
pub fn select_target(manifest: &DataGroupManifest, est: &ParameterEstimate) -> Result<Selection> {
    if !manifest.fault_types.contains(&est.fault_type) {
        return Err(Error::Selection(format!(
            "data group has no {} events",
            est.fault_type
        )));
    }
    select_axes(&manifest.axes, &SelectionQuery::from(est))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracketing_cases() {
        let k = [1.0, 2.0, 5.0];
        assert_eq!(bracket(&k, 3.0), vec![1, 2]);
        assert_eq!(bracket(&k, 2.0), vec![0, 1, 2]);
        assert_eq!(bracket(&k, 9.0), vec![1, 2]);
        assert_eq!(bracket(&k, 0.1), vec![0, 1]);
        let f = [0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0];
        assert_eq!(bracket_circular(&f, 345.0), vec![0, 7]);
        assert_eq!(bracket_circular(&f, 67.5), vec![1, 2]);
        assert_eq!(bracket_circular(&f, 0.0), vec![0, 1, 7]);
        let rf = [0.5, 2.5, 4.5, 6.5, 8.5, 15.0, 35.0];
        assert_eq!(cover_interval(&rf, 0.0, 7.7), vec![0, 1, 2, 3, 4]);
        assert_eq!(cover_interval(&rf, 9.0, 10.0), vec![4, 5]);
    }
}
