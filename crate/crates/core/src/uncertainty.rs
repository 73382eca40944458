//! Global-position uncertainty of scans and model walls, collapsed into one
//! confidence band per façade.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Allowed mismatch between a configured z-value and the normal quantile of
/// its confidence level.
pub const Z_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySpec {
    /// Point-cloud global registration error, m.
    pub e1: f64,
    /// Model wall global location error, m.
    pub e2: f64,
    pub cl1: f64,
    pub cl2: f64,
    pub z1: f64,
    pub z2: f64,
}

impl Default for UncertaintySpec {
    fn default() -> Self {
        UncertaintySpec {
            e1: 0.3,
            e2: 0.03,
            cl1: 0.9,
            cl2: 0.9,
            z1: 1.64,
            z2: 1.64,
        }
    }
}

impl UncertaintySpec {
    pub fn validate(&self) -> Result<()> {
        for (key, e) in [("uncertainty.e1", self.e1), ("uncertainty.e2", self.e2)] {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("{key} must be positive, got {e}")));
            }
        }
        for (key, cl, z) in [
            ("uncertainty.cl1", self.cl1, self.z1),
            ("uncertainty.cl2", self.cl2, self.z2),
        ] {
            if !(cl > 0.0 && cl < 1.0) {
                return Err(Error::Config(format!("{key} must lie in (0, 1), got {cl}")));
            }
            let expected = z_for_confidence(cl);
            if (z - expected).abs() > Z_TOLERANCE {
                return Err(Error::Config(format!(
                    "{key}: z = {z} inconsistent with confidence {cl} (expected {expected:.4})"
                )));
            }
        }
        Ok(())
    }
}

/// Combined façade uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacadeConfidence {
    pub sigma: f64,
    /// Half-width of the band a wall may deviate by, m.
    pub upper_ci: f64,
    pub cl: f64,
}

/// Two-sided standard normal quantile for a confidence level.
pub fn z_for_confidence(cl: f64) -> f64 {
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    std.inverse_cdf((1.0 + cl) / 2.0)
}

/// σ from an error bound: the mean deviation `e / 2` divided by `z`.
pub fn sigma_from_error(e: f64, z: f64) -> f64 {
    (e / 2.0) / z
}

pub fn combine(spec: &UncertaintySpec) -> FacadeConfidence {
    let s1 = sigma_from_error(spec.e1, spec.z1);
    let s2 = sigma_from_error(spec.e2, spec.z2);
    let sigma = s1.hypot(s2);
    // Round up to the centimeter; the nudge keeps exact multiples in place.
    let upper_ci = ((2.0 * sigma * 100.0) - 1e-9).ceil() / 100.0;
    FacadeConfidence {
        sigma,
        upper_ci,
        cl: spec.cl1.min(spec.cl2),
    }
}
