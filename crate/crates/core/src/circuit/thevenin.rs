use num_complex::Complex64;

use crate::error::{Error, Result};

/// Series R-L branch behind an ideal sinusoidal source (RMS phasor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheveninBranch {
    pub r: f64,
    pub l: f64,
    pub source: Complex64,
}

/// Result of collapsing two parallel branches into one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheveninReduction {
    pub branch: TheveninBranch,
    /// `|R1/R2 - L1/L2| / (R1/R2)`; zero when the reduction is exact.
    pub ratio_mismatch: f64,
    /// Weight of the first source in the combined source.
    pub weight_1: f64,
    /// Weight of the second source in the combined source.
    pub weight_2: f64,
}

/// Resistance-weighted reduction of two parallel Thevenin branches.
///
/// Exact (also under trapezoidal discretization) when `R1/R2 == L1/L2`;
/// otherwise an approximation whose quality is reported by `ratio_mismatch`.
pub fn thevenin_parallel(b1: &TheveninBranch, b2: &TheveninBranch) -> Result<TheveninReduction> {
    let rs = b1.r + b2.r;
    let ls = b1.l + b2.l;
    if !(rs > 0.0) || !(ls > 0.0) {
        return Err(Error::InvalidParameter(
            "parallel reduction needs R1+R2 > 0 and L1+L2 > 0".into(),
        ));
    }
    let weight_1 = b2.r / rs;
    let weight_2 = b1.r / rs;
    let ratio_r = b1.r / b2.r;
    let ratio_l = b1.l / b2.l;
    let ratio_mismatch = if ratio_r.is_finite() && ratio_r != 0.0 {
        ((ratio_r - ratio_l) / ratio_r).abs()
    } else {
        f64::INFINITY
    };
    Ok(TheveninReduction {
        branch: TheveninBranch {
            r: b1.r * b2.r / rs,
            l: b1.l * b2.l / ls,
            source: b1.source * weight_1 + b2.source * weight_2,
        },
        ratio_mismatch,
        weight_1,
        weight_2,
    })
}
