//! Residual bookkeeping shared by every verifier.
//!
//! A certificate keeps hypothesis residuals apart from conclusion residuals so
//! that a violated premise is reported as vacuous rather than as a failure.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::linalg::CMatrix;
use crate::tolerance::ToleranceConfig;

/// One named residual together with the scale it was judged against.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub norm: f64,
    pub scale: f64,
    pub ok: bool,
    /// Pass/fail indicator whose `norm` is a count or magnitude, not a residual.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub indicator: bool,
}

impl Check {
    /// Zero test `norm ≤ abs_floor + zero_rel·scale`.
    pub fn zero(name: impl Into<String>, norm: f64, scale: f64, tol: &ToleranceConfig) -> Self {
        Check::bounded(name, norm, scale, tol.is_zero(norm, scale))
    }

    /// A residual judged by a caller-supplied bound.
    pub fn bounded(name: impl Into<String>, norm: f64, scale: f64, ok: bool) -> Self {
        Check {
            name: name.into(),
            norm,
            scale,
            ok,
            indicator: false,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool, magnitude: f64) -> Self {
        Check {
            name: name.into(),
            norm: magnitude,
            scale: 1.0,
            ok,
            indicator: true,
        }
    }

    /// `norm / scale`, or `norm` when the scale vanishes.
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 && self.scale.is_finite() {
            self.norm / self.scale
        } else {
            self.norm
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Violation {
    pub name: String,
    pub magnitude: f64,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Passed,
    Vacuous,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionCertificate {
    pub name: String,
    pub passed: bool,
    pub verdict: Verdict,
    pub degenerate: bool,
    pub hypotheses: Vec<Check>,
    pub residuals: Vec<Check>,
    pub hypothesis_violations: Vec<Violation>,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    #[serde(serialize_with = "crate::json::serialize_matrix_map")]
    pub payload: BTreeMap<String, CMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
}

impl ConstructionCertificate {
    pub fn new(name: impl Into<String>) -> Self {
        ConstructionCertificate {
            name: name.into(),
            passed: true,
            verdict: Verdict::Passed,
            degenerate: false,
            hypotheses: Vec::new(),
            residuals: Vec::new(),
            hypothesis_violations: Vec::new(),
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
            payload: BTreeMap::new(),
            seed: None,
            recipe: None,
        }
    }

    fn refresh(&mut self) {
        let residuals_ok = self.residuals.iter().all(|c| c.ok);
        self.passed = residuals_ok && self.hypothesis_violations.is_empty();
        self.verdict = if !self.hypothesis_violations.is_empty() || self.degenerate {
            Verdict::Vacuous
        } else if residuals_ok {
            Verdict::Passed
        } else {
            Verdict::Failed
        };
    }

    pub fn push_hypothesis(&mut self, check: Check) -> bool {
        let ok = check.ok;
        if !ok {
            self.hypothesis_violations.push(Violation {
                name: check.name.clone(),
                magnitude: check.relative(),
            });
        }
        self.hypotheses.push(check);
        self.refresh();
        ok
    }

    pub fn hypothesis(&mut self, name: &str, norm: f64, scale: f64, tol: &ToleranceConfig) -> bool {
        self.push_hypothesis(Check::zero(name, norm, scale, tol))
    }

    /// Commutator premise `‖[A,B]‖_F ≤ zero_rel·‖A‖_F·‖B‖_F`.
    pub fn commutes(
        &mut self,
        name: &str,
        a: &CMatrix,
        b: &CMatrix,
        tol: &ToleranceConfig,
    ) -> bool {
        let (norm, scale) = commutator_residual(a, b);
        self.hypothesis(name, norm, scale, tol)
    }

    pub fn push_residual(&mut self, check: Check) -> bool {
        let ok = check.ok;
        self.residuals.push(check);
        self.refresh();
        ok
    }

    pub fn residual(&mut self, name: &str, norm: f64, scale: f64, tol: &ToleranceConfig) -> bool {
        self.push_residual(Check::zero(name, norm, scale, tol))
    }

    pub fn mark_degenerate(&mut self, note: impl Into<String>) {
        self.degenerate = true;
        self.notes.push(note.into());
        self.refresh();
    }

    pub fn diagnostic(&mut self, name: &str, value: f64) {
        self.diagnostics.insert(name.to_string(), value);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn attach(&mut self, name: &str, m: CMatrix) {
        self.payload.insert(name.to_string(), m);
    }

    pub fn with_origin(mut self, seed: u64, recipe: impl Into<String>) -> Self {
        self.seed = Some(seed);
        self.recipe = Some(recipe.into());
        self
    }

    pub fn residual_named(&self, name: &str) -> Option<&Check> {
        self.residuals.iter().find(|c| c.name == name)
    }

    /// Largest relative conclusion residual, indicators excluded.
    pub fn worst_residual(&self) -> f64 {
        self.residuals
            .iter()
            .filter(|c| !c.indicator)
            .map(Check::relative)
            .fold(0.0, f64::max)
    }

    /// Folds another certificate's checks into this one under a name prefix.
    pub fn absorb(&mut self, prefix: &str, other: &ConstructionCertificate) {
        for h in &other.hypotheses {
            let mut h = h.clone();
            h.name = format!("{prefix}: {}", h.name);
            self.push_hypothesis(h);
        }
        for r in &other.residuals {
            let mut r = r.clone();
            r.name = format!("{prefix}: {}", r.name);
            self.push_residual(r);
        }
        for (k, v) in &other.diagnostics {
            self.diagnostics.insert(format!("{prefix}: {k}"), *v);
        }
        for n in &other.notes {
            self.notes.push(format!("{prefix}: {n}"));
        }
        if other.degenerate {
            self.degenerate = true;
            self.refresh();
        }
    }
}

/// `(‖AB − BA‖_F, ‖A‖_F·‖B‖_F)`.
pub fn commutator_residual(a: &CMatrix, b: &CMatrix) -> (f64, f64) {
    let c = a * b - b * a;
    (c.norm(), a.norm() * b.norm())
}
