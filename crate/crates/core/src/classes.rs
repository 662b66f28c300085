//! Class membership: minimal order, strictness and power boundedness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculus::{quasi_residual_with_outer, Conjugation, DKind, Evaluation, OperatorPair};
use crate::certificate::Violation;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, rank, CMatrix};
use crate::spectral::eigen_data;
use crate::tolerance::ToleranceConfig;

/// Largest order `classify` searches.
pub const MAX_CLASSIFY_ORDER: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassFamily {
    /// `Δ^m_{S*,S}(I) = 0`
    MIsometry,
    /// `δ^m_{S*,S}(I) = 0`
    MSelfadjoint,
    /// `Δ^m_{S*,CSC}(I) = 0`
    McIsometry,
    /// `δ^m_{S*,CSC}(I) = 0`
    McSymmetry,
    /// `Δ^m_{T,S}(I) = 0` for a given `T`
    LeftMInvertible,
}

impl ClassFamily {
    pub const ALL: [ClassFamily; 5] = [
        ClassFamily::MIsometry,
        ClassFamily::MSelfadjoint,
        ClassFamily::McIsometry,
        ClassFamily::McSymmetry,
        ClassFamily::LeftMInvertible,
    ];

    pub fn kind(self) -> DKind {
        match self {
            ClassFamily::MSelfadjoint | ClassFamily::McSymmetry => DKind::SmallDelta,
            _ => DKind::Delta,
        }
    }

    pub fn uses_conjugation(self) -> bool {
        matches!(self, ClassFamily::McIsometry | ClassFamily::McSymmetry)
    }

    pub fn label(self) -> &'static str {
        match self {
            ClassFamily::MIsometry => "m-isometry",
            ClassFamily::MSelfadjoint => "m-selfadjoint",
            ClassFamily::McIsometry => "mc-isometry",
            ClassFamily::McSymmetry => "mc-symmetry",
            ClassFamily::LeftMInvertible => "left-m-invertible",
        }
    }
}

impl fmt::Display for ClassFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClassFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s
            .to_ascii_lowercase()
            .replace(['(', ')', ',', '_', ' '], "-");
        let found = match key.trim_matches('-') {
            "m-isometry" | "isometry" => ClassFamily::MIsometry,
            "m-selfadjoint" | "selfadjoint" => ClassFamily::MSelfadjoint,
            "mc-isometry" | "m-c--isometry" | "m-c-isometry" | "c-isometry" => {
                ClassFamily::McIsometry
            }
            "mc-symmetry" | "m-c--symmetry" | "m-c-symmetry" | "c-symmetry" => {
                ClassFamily::McSymmetry
            }
            "left-m-invertible" | "left-m-invertible-pair" | "left-invertible" => {
                ClassFamily::LeftMInvertible
            }
            _ => return Err(Error::InvalidInput(format!("unknown class family '{s}'"))),
        };
        Ok(found)
    }
}

/// A class together with its order parameters.
#[derive(Clone, Debug, Serialize)]
pub struct ClassSpec {
    pub family: ClassFamily,
    pub m: u32,
    /// Quasi exponent; `0` is the plain (non-quasi) class.
    pub n: u32,
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "serialize_conjugation"
    )]
    pub conjugation: Option<Conjugation>,
}

fn serialize_conjugation<S: serde::Serializer>(
    c: &Option<Conjugation>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    match c {
        Some(c) => crate::json::serialize_matrix(c.matrix(), ser),
        None => ser.serialize_none(),
    }
}

impl ClassSpec {
    pub fn new(family: ClassFamily, m: u32, n: u32) -> Self {
        ClassSpec {
            family,
            m,
            n,
            conjugation: None,
        }
    }

    pub fn with_conjugation(mut self, c: Conjugation) -> Self {
        self.conjugation = Some(c);
        self
    }

    pub fn label(&self) -> String {
        if self.n > 0 {
            format!("{}-quasi-{}", self.n, self.family)
        } else {
            self.family.to_string()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Domain("class order m must be at least 1".into()));
        }
        if self.family.uses_conjugation() != self.conjugation.is_some() {
            return Err(Error::InvalidInput(format!(
                "{} {} a conjugation",
                self.family,
                if self.family.uses_conjugation() {
                    "requires"
                } else {
                    "does not take"
                }
            )));
        }
        Ok(())
    }

    /// The operator pair whose quasi residual defines membership, and the
    /// outer operator of that residual.
    pub fn defining_pair(&self, s: &CMatrix, t: Option<&CMatrix>) -> Result<OperatorPair> {
        let kind = self.family.kind();
        match (self.family, t) {
            (ClassFamily::LeftMInvertible, Some(t)) => {
                OperatorPair::new(t.clone(), s.clone(), kind)
            }
            (ClassFamily::LeftMInvertible, None) => Err(Error::InvalidInput(
                "left-m-invertible pairs need the operator T".into(),
            )),
            (f, _) if f.uses_conjugation() => {
                let c = self
                    .conjugation
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput(format!("{f} requires a conjugation")))?;
                OperatorPair::new(s.adjoint(), c.cmc(s)?, kind)
            }
            _ => OperatorPair::adjoint_pair(s, kind),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Recipe {
    pub name: String,
    pub params: std::collections::BTreeMap<String, f64>,
    pub seed: u64,
}

/// Outcome of one membership test.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub spec: ClassSpec,
    pub residual_norm: f64,
    pub scale: f64,
    pub passed: bool,
    pub hypothesis_violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipe: Option<Recipe>,
}

impl Certificate {
    fn from_evaluation(
        spec: ClassSpec,
        eval: &Evaluation,
        violations: Vec<Violation>,
        tol: &ToleranceConfig,
    ) -> Self {
        let residual_norm = eval.norm();
        let passed = tol.is_zero(residual_norm, eval.scale) && violations.is_empty();
        Certificate {
            spec,
            residual_norm,
            scale: eval.scale,
            passed,
            hypothesis_violations: violations,
            recipe: None,
        }
    }
}

/// Membership of `S` (with `T` for left-m-invertible pairs) in `spec`.
pub fn check_membership(
    spec: &ClassSpec,
    s: &CMatrix,
    t: Option<&CMatrix>,
    tol: &ToleranceConfig,
) -> Result<Certificate> {
    spec.validate()?;
    let pair = spec.defining_pair(s, t)?;
    let eval = quasi_residual_with_outer(s, &pair, spec.m, spec.n)?;
    Ok(Certificate::from_evaluation(
        spec.clone(),
        &eval,
        Vec::new(),
        tol,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub minimal_m: Option<u32>,
    pub strict: bool,
    pub certificates: Vec<Certificate>,
}

/// Smallest order `m ≤ m_max` at which `S*ⁿ d^m_{T,S'}(I) Sⁿ` vanishes, where
/// `S' = CSC` when a conjugation is given and `S' = S` otherwise.
///
/// Strictness requires the residual one order below to be clearly nonzero
/// (beyond `10³·zero_rel`); order 1 is always strict.
pub fn classify(
    pair: &OperatorPair,
    n: u32,
    m_max: u32,
    conjugation: Option<&Conjugation>,
    tol: &ToleranceConfig,
) -> Result<Classification> {
    if m_max == 0 || m_max > MAX_CLASSIFY_ORDER {
        return Err(Error::Domain(format!(
            "m_max must lie in 1..={MAX_CLASSIFY_ORDER}, got {m_max}"
        )));
    }
    let outer = pair.s.clone();
    let effective = match conjugation {
        Some(c) => OperatorPair::new(pair.t.clone(), c.cmc(&pair.s)?, pair.kind)?,
        None => pair.clone(),
    };
    let family = match (pair.kind, conjugation.is_some()) {
        (DKind::Delta, false) => ClassFamily::LeftMInvertible,
        (DKind::Delta, true) => ClassFamily::McIsometry,
        (DKind::SmallDelta, false) => ClassFamily::MSelfadjoint,
        (DKind::SmallDelta, true) => ClassFamily::McSymmetry,
    };
    let mut certificates = Vec::new();
    let mut previous: Option<Evaluation> = None;
    for m in 1..=m_max {
        let eval = quasi_residual_with_outer(&outer, &effective, m, n)?;
        let mut spec = ClassSpec::new(family, m, n);
        spec.conjugation = conjugation.cloned();
        let cert = Certificate::from_evaluation(spec, &eval, Vec::new(), tol);
        let found = cert.passed;
        certificates.push(cert);
        if found {
            let strict = match &previous {
                None => true,
                Some(prev) => tol.is_clearly_nonzero(prev.norm(), prev.scale),
            };
            return Ok(Classification {
                minimal_m: Some(m),
                strict,
                certificates,
            });
        }
        previous = Some(eval);
    }
    Ok(Classification {
        minimal_m: None,
        strict: false,
        certificates,
    })
}

/// Exact finite-dimensional test: every eigenvalue has `|λ| ≤ 1 + zero_rel`
/// and those with `|λ| ≥ 1 − zero_rel` are semisimple.
pub fn is_power_bounded(s: &CMatrix, tol: &ToleranceConfig) -> Result<bool> {
    let d = linalg::require_square(s, "S")?;
    for cl in eigen_data(s, tol)? {
        let modulus = cl.value.norm();
        if modulus > 1.0 + tol.zero_rel {
            return Ok(false);
        }
        if modulus >= 1.0 - tol.zero_rel {
            let shifted = s - identity(d) * cl.value;
            if rank(&shifted, tol)? != rank(&(&shifted * &shifted), tol)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `max_{0≤k≤K} ‖S^k‖₂`, the empirical power bound.
pub fn power_bound(s: &CMatrix, k_max: u32) -> Result<f64> {
    let mut p = identity(s.nrows());
    let mut best: f64 = 1.0;
    for _ in 0..k_max {
        p = &p * s;
        best = best.max(linalg::spectral_norm(&p)?);
    }
    Ok(best)
}
