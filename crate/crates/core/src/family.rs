//! Catalog of the regular families of critical points.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmetry::{IsotropyDescriptor, Shape};

/// Sign of the limiting diagonal coefficient: `−1` (I) or `+1` (II).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyType {
    I,
    II,
}

impl fmt::Display for FamilyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyType::I => "I",
            FamilyType::II => "II",
        })
    }
}

impl std::str::FromStr for FamilyType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(FamilyType::I),
            "II" | "ii" | "2" => Ok(FamilyType::II),
            _ => Err(Error::Unsupported(format!("family type {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyId {
    pub family_type: FamilyType,
    pub p: usize,
    pub m: usize,
}

impl FamilyId {
    /// Type I exists for `p = 0, m ≤ 1` and `p = 1, m ≤ 2`; type II only for `p = 1, m ≤ 2`.
    pub fn new(family_type: FamilyType, p: usize, m: usize) -> Result<Self> {
        let ok = match (family_type, p) {
            (FamilyType::I, 0) => m <= 1,
            (_, 1) => m <= 2,
            _ => false,
        };
        if !ok {
            return Err(Error::Unsupported(format!("no cataloged family of type {family_type} with p = {p}, m = {m}")));
        }
        Ok(FamilyId { family_type, p, m })
    }

    pub fn all() -> Vec<FamilyId> {
        use FamilyType::*;
        [(I, 0, 0), (I, 0, 1), (I, 1, 0), (I, 1, 1), (I, 1, 2), (II, 1, 0), (II, 1, 1), (II, 1, 2)]
            .into_iter()
            .map(|(t, p, m)| FamilyId { family_type: t, p, m })
            .collect()
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.p, self.p + self.m)
    }

    pub fn descriptor(&self, d: f64) -> Result<IsotropyDescriptor> {
        IsotropyDescriptor::new(self.p, self.m, d)
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(p={}, m={})", self.family_type, self.p, self.m)
    }
}
