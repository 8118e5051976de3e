use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Parameter axes of a data group. The source axis lists (aerial, zero)
/// impedance pairs shared by both terminals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxes {
    pub sources: Vec<(Complex64, Complex64)>,
    pub loading_deg: Vec<f64>,
    pub rf_ohm: Vec<f64>,
    pub lf_km: Vec<f64>,
    pub fia_deg: Vec<f64>,
}

/// Axis indices of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCell {
    pub source: u16,
    pub loading: u16,
    pub rf: u16,
    pub lf: u16,
    pub fia: u16,
}

impl GridAxes {
    pub fn dims(&self) -> [usize; 5] {
        [
            self.sources.len(),
            self.loading_deg.len(),
            self.rf_ohm.len(),
            self.lf_km.len(),
            self.fia_deg.len(),
        ]
    }

    /// Number of events per fault type.
    pub fn cardinality(&self) -> u64 {
        self.dims().iter().map(|&d| d as u64).product()
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    /// Cell at a flat index; the fault-inception axis varies fastest.
    pub fn cell(&self, mut index: usize) -> GridCell {
        let d = self.dims();
        let fia = index % d[4];
        index /= d[4];
        let lf = index % d[3];
        index /= d[3];
        let rf = index % d[2];
        index /= d[2];
        let loading = index % d[1];
        index /= d[1];
        GridCell {
            source: index as u16,
            loading: loading as u16,
            rf: rf as u16,
            lf: lf as u16,
            fia: fia as u16,
        }
    }

    pub fn flat_index(&self, c: &GridCell) -> usize {
        let d = self.dims();
        (((c.source as usize * d[1] + c.loading as usize) * d[2] + c.rf as usize) * d[3]
            + c.lf as usize)
            * d[4]
            + c.fia as usize
    }

    pub fn cells(&self) -> impl Iterator<Item = GridCell> + '_ {
        (0..self.cardinality() as usize).map(move |k| self.cell(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_index_roundtrip() {
        let g = GridAxes {
            sources: vec![(Complex64::new(1.0, 5.0), Complex64::new(3.0, 15.0)); 2],
            loading_deg: vec![2.0, 6.0, 10.0],
            rf_ohm: vec![0.5, 2.5],
            lf_km: vec![1.0, 2.0, 3.0, 4.0],
            fia_deg: vec![0.0, 45.0],
        };
        assert_eq!(g.cardinality(), 96);
        for k in 0..96 {
            assert_eq!(g.flat_index(&g.cell(k)), k);
        }
    }
}
