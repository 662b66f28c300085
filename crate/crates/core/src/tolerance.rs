use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds shared by every numerical decision in the crate.
///
/// A residual `R` produced by summing terms whose largest Frobenius norm is
/// `scale` counts as zero when `‖R‖_F ≤ abs_floor + zero_rel · scale`.
/// Rank decisions keep singular values `σ > rank_rel · σ_max · max(rows, cols)`.
/// Eigenvalues closer than `cluster_rel · ‖A‖_F` are merged into one cluster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub zero_rel: f64,
    pub rank_rel: f64,
    pub abs_floor: f64,
    pub cluster_rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            zero_rel: 1e-8,
            rank_rel: 1e-10,
            abs_floor: 1e-12,
            cluster_rel: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn with_zero_rel(mut self, zero_rel: f64) -> Self {
        self.zero_rel = zero_rel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("zero_rel", self.zero_rel),
            ("rank_rel", self.rank_rel),
            ("abs_floor", self.abs_floor),
            ("cluster_rel", self.cluster_rel),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "tolerance {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Threshold below which a residual of the given scale is numerically zero.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_floor + self.zero_rel * scale
    }

    pub fn is_zero(&self, norm: f64, scale: f64) -> bool {
        norm <= self.threshold(scale)
    }

    /// The looser "structurally nonzero" threshold used for strictness.
    pub fn is_clearly_nonzero(&self, norm: f64, scale: f64) -> bool {
        norm > self.abs_floor + 1e3 * self.zero_rel * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let tol = ToleranceConfig::default();
        tol.validate().unwrap();
        assert!(tol.is_zero(1e-9, 1.0));
        assert!(!tol.is_zero(1e-7, 1.0));
        assert!(tol.is_zero(0.5e-12, 0.0));
    }

    #[test]
    fn negative_field_rejected() {
        let tol = ToleranceConfig::default().with_zero_rel(-1.0);
        assert!(tol.validate().is_err());
    }

    #[test]
    fn strictness_band() {
        let tol = ToleranceConfig::default();
        // between tol and 1e3*tol: neither zero nor clearly nonzero
        assert!(!tol.is_zero(1e-7, 1.0));
        assert!(!tol.is_clearly_nonzero(1e-7, 1.0));
        assert!(tol.is_clearly_nonzero(1e-4, 1.0));
    }
}
