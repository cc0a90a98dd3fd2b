//! Standard target directions `r` (and `r̂`) for the rotations.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

// Unused when std is linked into the build, which supplies inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::fingerprint;
use crate::rotations::UnitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnchorPreset {
    /// `r_i = 1/√m`
    Diagonal,
    /// `r = e₁`
    E1,
    /// `r = e₁`, `r̂ = e₂`
    E1E2,
    /// `r` diagonal, `r̂` a ±1 plateau vector summing to zero.
    Plateau,
    Custom,
}

impl AnchorPreset {
    pub fn as_str(self) -> &'static str {
        match self {
            AnchorPreset::Diagonal => "diagonal",
            AnchorPreset::E1 => "e1",
            AnchorPreset::E1E2 => "e1_e2",
            AnchorPreset::Plateau => "plateau",
            AnchorPreset::Custom => "custom",
        }
    }

    pub fn has_rhat(self) -> bool {
        matches!(self, AnchorPreset::E1E2 | AnchorPreset::Plateau)
    }
}

impl fmt::Display for AnchorPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnchorPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(AnchorPreset::Diagonal),
            "e1" => Ok(AnchorPreset::E1),
            "e1_e2" => Ok(AnchorPreset::E1E2),
            "plateau" => Ok(AnchorPreset::Plateau),
            "custom" => Ok(AnchorPreset::Custom),
            _ => Err(Error::InvalidAnchor("unknown preset")),
        }
    }
}

/// Compact identity of an anchor carried in provenance records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnchorTag {
    pub preset: AnchorPreset,
    pub fingerprint: u64,
    pub has_rhat: bool,
}

impl AnchorTag {
    pub fn of(preset: AnchorPreset, r: &[f64], rhat: Option<&[f64]>) -> Self {
        let mut coords: Vec<f64> = r.to_vec();
        if let Some(rh) = rhat {
            coords.extend_from_slice(rh);
        }
        Self {
            preset,
            fingerprint: fingerprint(&coords),
            has_rhat: rhat.is_some(),
        }
    }
}

/// The anchor `r`, optionally with a second direction `r̂ ⊥ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorPair {
    r: UnitVector,
    rhat: Option<UnitVector>,
    preset: AnchorPreset,
}

/// `(1,…,1,−1,…,−1)/√m` with `m/2` trailing `−1`s for even `m`; for odd
/// `m` the last coordinate is 0 and the rest is the even pattern of length
/// `m − 1`.
pub fn plateau_vector(m: usize) -> Result<UnitVector> {
    if m < 2 {
        return Err(Error::TooFewCells(m));
    }
    let even = m - m % 2;
    let scale = 1.0 / (even as f64).sqrt();
    let mut v = vec![0.0; m];
    for (i, x) in v.iter_mut().take(even).enumerate() {
        *x = if i < even / 2 { scale } else { -scale };
    }
    UnitVector::new(v)
}

impl AnchorPair {
    pub fn preset(preset: AnchorPreset, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewCells(m));
        }
        let diagonal = || UnitVector::new(vec![1.0 / (m as f64).sqrt(); m]);
        let (r, rhat) = match preset {
            AnchorPreset::Diagonal => (diagonal()?, None),
            AnchorPreset::E1 => (UnitVector::basis(m, 0)?, None),
            AnchorPreset::E1E2 => (UnitVector::basis(m, 0)?, Some(UnitVector::basis(m, 1)?)),
            AnchorPreset::Plateau => (diagonal()?, Some(plateau_vector(m)?)),
            AnchorPreset::Custom => {
                return Err(Error::InvalidAnchor(
                    "custom anchors are built with AnchorPair::custom",
                ))
            }
        };
        Ok(Self { r, rhat, preset })
    }

    pub fn custom(r: UnitVector, rhat: Option<UnitVector>) -> Result<Self> {
        if let Some(rh) = &rhat {
            if rh.dim() != r.dim() {
                return Err(Error::DimensionMismatch {
                    expected: r.dim(),
                    found: rh.dim(),
                });
            }
            if r.dot(rh).abs() > 1e-10 {
                return Err(Error::InvalidAnchor("r and rhat are not orthogonal"));
            }
        }
        Ok(Self {
            r,
            rhat,
            preset: AnchorPreset::Custom,
        })
    }

    pub fn r(&self) -> &UnitVector {
        &self.r
    }

    pub fn rhat(&self) -> Option<&UnitVector> {
        self.rhat.as_ref()
    }

    pub fn preset_kind(&self) -> AnchorPreset {
        self.preset
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    /// The same anchor without `r̂`, for the simple-hypothesis transform.
    /// `plateau` reduces to `diagonal` and `e1_e2` to `e1`.
    pub fn primary(&self) -> Self {
        let preset = match self.preset {
            AnchorPreset::Plateau => AnchorPreset::Diagonal,
            AnchorPreset::E1E2 => AnchorPreset::E1,
            p => p,
        };
        Self {
            r: self.r.clone(),
            rhat: None,
            preset,
        }
    }

    pub fn tag(&self) -> AnchorTag {
        AnchorTag::of(self.preset, &self.r, self.rhat.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_even_and_odd() {
        let p4 = plateau_vector(4).unwrap();
        assert_eq!(p4.as_slice(), &[0.5, 0.5, -0.5, -0.5]);
        let p5 = plateau_vector(5).unwrap();
        assert_eq!(p5.as_slice(), &[0.5, 0.5, -0.5, -0.5, 0.0]);
        let p3 = plateau_vector(3).unwrap();
        let s = 1.0 / 2.0.sqrt();
        assert!(
            (p3[0] - s).abs() < 1e-15 && (p3[1] + s).abs() < 1e-15 && p3[2] == 0.0,
            "{p3:?}"
        );
        for m in 2..20 {
            let p = plateau_vector(m).unwrap();
            assert!(p.iter().sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn presets_are_orthonormal() {
        for preset in [
            AnchorPreset::Diagonal,
            AnchorPreset::E1,
            AnchorPreset::E1E2,
            AnchorPreset::Plateau,
        ] {
            for m in [2, 3, 7, 10] {
                let a = AnchorPair::preset(preset, m).unwrap();
                assert!((a.r().dot(a.r()) - 1.0).abs() < 1e-15);
                assert_eq!(a.rhat().is_some(), preset.has_rhat());
                if let Some(rh) = a.rhat() {
                    assert!(a.r().dot(rh).abs() < 1e-15);
                }
            }
        }
        let d = AnchorPair::preset(AnchorPreset::Diagonal, 4).unwrap();
        assert!(d.r().iter().all(|x| (*x - 0.5).abs() < 1e-16));
    }

    #[test]
    fn primary_drops_rhat() {
        let a = AnchorPair::preset(AnchorPreset::Plateau, 6).unwrap();
        let p = a.primary();
        assert_eq!(p.preset_kind(), AnchorPreset::Diagonal);
        assert!(p.rhat().is_none());
        assert_eq!(
            p.tag(),
            AnchorPair::preset(AnchorPreset::Diagonal, 6).unwrap().tag()
        );
        assert_ne!(a.tag(), p.tag());
    }

    #[test]
    fn parse_presets() {
        assert_eq!("e1_e2".parse::<AnchorPreset>().unwrap(), AnchorPreset::E1E2);
        assert!("bogus".parse::<AnchorPreset>().is_err());
    }

    #[test]
    fn custom_requires_orthogonality() {
        let r = UnitVector::basis(3, 0).unwrap();
        let bad = UnitVector::normalized(alloc::vec![1.0, 1.0, 0.0]).unwrap();
        assert!(AnchorPair::custom(r.clone(), Some(bad)).is_err());
        assert!(AnchorPair::custom(r, Some(UnitVector::basis(3, 2).unwrap())).is_ok());
    }
}
