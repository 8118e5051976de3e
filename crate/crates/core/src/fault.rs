use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Declared fault type of an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FaultType {
    AG,
    BG,
    CG,
    AB,
    BC,
    CA,
    ABG,
    BCG,
    CAG,
    ABC,
}

/// The four fault types the mode-domain model is written for. Every other
/// type maps onto one of these by a cyclic relabeling of the phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CanonicalFault {
    /// Single line to ground, phase A.
    Slg,
    /// Line to line, B-C.
    Ll,
    /// Double line to ground, B-C-G.
    Llg,
    /// Three phase.
    ThreePhase,
}

/// Aerial or zero mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Alpha,
    Beta,
    Zero,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::Alpha => 0,
            Mode::Beta => 1,
            Mode::Zero => 2,
        }
    }
}

impl FaultType {
    pub const ALL: [FaultType; 10] = [
        FaultType::AG,
        FaultType::BG,
        FaultType::CG,
        FaultType::AB,
        FaultType::BC,
        FaultType::CA,
        FaultType::ABG,
        FaultType::BCG,
        FaultType::CAG,
        FaultType::ABC,
    ];

    /// Cyclic shift `k` such that canonical phase `p` is original phase `(p + k) % 3`.
    pub fn rotation_shift(self) -> usize {
        match self {
            FaultType::AG | FaultType::BC | FaultType::BCG | FaultType::ABC => 0,
            FaultType::BG | FaultType::CA | FaultType::CAG => 1,
            FaultType::CG | FaultType::AB | FaultType::ABG => 2,
        }
    }

    pub fn canonical(self) -> CanonicalFault {
        match self {
            FaultType::AG | FaultType::BG | FaultType::CG => CanonicalFault::Slg,
            FaultType::AB | FaultType::BC | FaultType::CA => CanonicalFault::Ll,
            FaultType::ABG | FaultType::BCG | FaultType::CAG => CanonicalFault::Llg,
            FaultType::ABC => CanonicalFault::ThreePhase,
        }
    }

    /// Indices of the faulted phases, 0 for A.
    pub fn phases(self) -> Vec<usize> {
        self.as_str()
            .chars()
            .filter_map(|c| "ABC".find(c))
            .collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FaultType::AG => "AG",
            FaultType::BG => "BG",
            FaultType::CG => "CG",
            FaultType::AB => "AB",
            FaultType::BC => "BC",
            FaultType::CA => "CA",
            FaultType::ABG => "ABG",
            FaultType::BCG => "BCG",
            FaultType::CAG => "CAG",
            FaultType::ABC => "ABC",
        }
    }
}

impl CanonicalFault {
    pub const ALL: [CanonicalFault; 4] = [
        CanonicalFault::Slg,
        CanonicalFault::Ll,
        CanonicalFault::Llg,
        CanonicalFault::ThreePhase,
    ];

    pub fn fault_type(self) -> FaultType {
        match self {
            CanonicalFault::Slg => FaultType::AG,
            CanonicalFault::Ll => FaultType::BC,
            CanonicalFault::Llg => FaultType::BCG,
            CanonicalFault::ThreePhase => FaultType::ABC,
        }
    }

    /// Aerial mode carrying the fault signature: alpha for SLG, beta otherwise.
    pub fn aerial_mode(self) -> Mode {
        match self {
            CanonicalFault::Slg => Mode::Alpha,
            _ => Mode::Beta,
        }
    }

    pub fn involves_ground(self) -> bool {
        matches!(self, CanonicalFault::Slg | CanonicalFault::Llg)
    }
}

impl fmt::Display for FaultType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for CanonicalFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.fault_type(), f)
    }
}

impl FromStr for FaultType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_uppercase();
        let ft = match norm.as_str() {
            "AG" => FaultType::AG,
            "BG" => FaultType::BG,
            "CG" => FaultType::CG,
            "AB" | "BA" => FaultType::AB,
            "BC" | "CB" => FaultType::BC,
            "CA" | "AC" => FaultType::CA,
            "ABG" | "BAG" => FaultType::ABG,
            "BCG" | "CBG" => FaultType::BCG,
            "CAG" | "ACG" => FaultType::CAG,
            "ABC" | "ABCG" => FaultType::ABC,
            _ => return Err(Error::UnknownFaultType(s.to_string())),
        };
        Ok(ft)
    }
}

impl TryFrom<String> for FaultType {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FaultType> for String {
    fn from(f: FaultType) -> String {
        f.as_str().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_variants() {
        assert_eq!("c-g".parse::<FaultType>().unwrap(), FaultType::CG);
        assert_eq!("AC".parse::<FaultType>().unwrap(), FaultType::CA);
        assert!("XG".parse::<FaultType>().is_err());
    }

    #[test]
    fn every_type_has_a_canonical_image() {
        for ft in FaultType::ALL {
            let canon = ft.canonical().fault_type();
            assert_eq!(canon.rotation_shift(), 0, "{ft}");
        }
    }
}
