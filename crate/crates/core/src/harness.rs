//! Seeded batch verification.
//!
//! Each trial is a pure function of `(seed, suite, index)`: it derives its own
//! sub-seed, generates hypothesis-satisfying instances and runs every verifier
//! mapped to its suite. Trials run in parallel and are aggregated in index
//! order, so reports are byte-identical across runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{adjoint_via_dual, d_identity, d_power, d_power_closed, DKind, OperatorPair};
use crate::certificate::{Check, ConstructionCertificate, Verdict};
use crate::classes::{check_membership, classify, ClassFamily, ClassSpec};
use crate::error::{Error, Result};
use crate::generate;
use crate::linalg::frob;
use crate::random::{below, coin, complex_gaussian, rng, sub_seed, TrialRng};
use crate::spectral;
use crate::structure;
use crate::tolerance::ToleranceConfig;

/// Largest dimension a suite may be asked to draw.
pub const MAX_SUITE_DIM: usize = 16;
/// Per-dimension bound on the resolution-of-identity residuals.
pub const RESOLUTION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Calculus,
    Classes,
    Spectral,
    Pro00,
    Pro110,
    Thm10,
    Pro10,
    Thm01,
    Thm30,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Calculus,
        Suite::Classes,
        Suite::Spectral,
        Suite::Pro00,
        Suite::Pro110,
        Suite::Thm10,
        Suite::Pro10,
        Suite::Thm01,
        Suite::Thm30,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Calculus => "calculus",
            Suite::Classes => "classes",
            Suite::Spectral => "spectral",
            Suite::Pro00 => "pro00",
            Suite::Pro110 => "pro110",
            Suite::Thm10 => "thm10",
            Suite::Pro10 => "pro10",
            Suite::Thm01 => "thm01",
            Suite::Thm30 => "thm30",
        }
    }

    /// Parses one suite name; `all` expands to every suite.
    pub fn parse_list(name: &str) -> Result<Vec<Suite>> {
        if name == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .map(|s| vec![s])
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite '{name}'")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inclusive dimension range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimRange {
    pub min: usize,
    pub max: usize,
}

impl Default for DimRange {
    fn default() -> Self {
        DimRange { min: 2, max: 6 }
    }
}

impl FromStr for DimRange {
    type Err = Error;

    /// Accepts `d`, `a..b` and `a..=b`; both forms of range are inclusive.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse dimension range '{s}'"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let range = match s.split_once("..") {
            Some((a, b)) => DimRange {
                min: num(a)?,
                max: num(b.strip_prefix('=').unwrap_or(b))?,
            },
            None => {
                let d = num(s)?;
                DimRange { min: d, max: d }
            }
        };
        Ok(range)
    }
}

impl DimRange {
    fn draw(self, r: &mut TrialRng) -> usize {
        self.min + below(r, self.max - self.min + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suites: Vec<Suite>,
    pub trials: usize,
    pub dims: DimRange,
    pub seed: u64,
    pub tol: ToleranceConfig,
    /// Break one commutation hypothesis in the product and perturbation
    /// generators; every affected trial must then come out vacuous.
    pub sabotage: bool,
    #[serde(skip)]
    pub report_path: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suites: Suite::ALL.to_vec(),
            trials: 100,
            dims: DimRange::default(),
            seed: 0,
            tol: ToleranceConfig::default(),
            sabotage: false,
            report_path: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        let DimRange { min, max } = self.dims;
        if min < 1 || max > MAX_SUITE_DIM || min > max {
            return Err(Error::InvalidInput(format!(
                "dimension range {min}..={max} must lie within 1..={MAX_SUITE_DIM}"
            )));
        }
        if self.suites.is_empty() {
            return Err(Error::InvalidInput("no suites selected".into()));
        }
        self.tol.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteStats {
    pub trials: usize,
    pub passed: usize,
    pub vacuous: usize,
    pub failed: usize,
    /// Largest relative conclusion residual over non-vacuous trials.
    pub worst_residual: f64,
    /// Sub-seeds of the failed trials.
    pub exemplar_seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suites: BTreeMap<String, SuiteStats>,
    pub overall: bool,
    pub config: SuiteConfig,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Result of one trial: the folded verdict and every certificate it produced.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub seed: u64,
    pub verdict: Verdict,
    pub worst_residual: f64,
    pub certificates: Vec<ConstructionCertificate>,
}

fn fold_outcome(seed: u64, certificates: Vec<ConstructionCertificate>) -> TrialOutcome {
    let verdict = if certificates.iter().any(|c| c.verdict == Verdict::Failed) {
        Verdict::Failed
    } else if certificates.iter().all(|c| c.verdict == Verdict::Passed) {
        Verdict::Passed
    } else {
        Verdict::Vacuous
    };
    let worst_residual = certificates
        .iter()
        .filter(|c| c.verdict != Verdict::Vacuous)
        .map(ConstructionCertificate::worst_residual)
        .fold(0.0, f64::max);
    TrialOutcome {
        seed,
        verdict,
        worst_residual,
        certificates,
    }
}

fn errored(name: &str, e: &Error) -> ConstructionCertificate {
    let mut cert = ConstructionCertificate::new(name);
    cert.note(format!("verifier error: {e}"));
    cert.push_residual(Check::flag("completed", false, f64::INFINITY));
    cert
}

/// Runs trial `index` of `suite`. Verifier errors become failed certificates.
pub fn run_trial(suite: Suite, config: &SuiteConfig, index: u64) -> TrialOutcome {
    let seed = sub_seed(config.seed, suite.name(), index);
    let mut r = rng(seed);
    let certificates = match trial_certificates(suite, config, &mut r) {
        Ok(certs) => certs,
        Err(e) => vec![errored(suite.name(), &e)],
    };
    let certificates = certificates
        .into_iter()
        .map(|c| c.with_origin(seed, suite.name()))
        .collect();
    fold_outcome(seed, certificates)
}

fn random_kind(r: &mut TrialRng) -> DKind {
    if coin(r, 0.5) {
        DKind::Delta
    } else {
        DKind::SmallDelta
    }
}

fn trial_certificates(
    suite: Suite,
    config: &SuiteConfig,
    r: &mut TrialRng,
) -> Result<Vec<ConstructionCertificate>> {
    let tol = &config.tol;
    let dim = config.dims.draw(r);
    match suite {
        Suite::Calculus => calculus_trial(r, dim, tol),
        Suite::Classes => classes_trial(r, dim, tol),
        Suite::Spectral => spectral_trial(r, dim, tol),
        Suite::Pro00 => pro00_trial(r, dim.max(2), tol),
        Suite::Pro110 => pro110_trial(r, dim.max(2), tol),
        Suite::Thm10 => thm10_trial(r, dim, tol),
        Suite::Pro10 => pro10_trial(r, dim.max(2), tol),
        Suite::Thm01 => thm01_trial(r, tol, config.sabotage),
        Suite::Thm30 => thm30_trial(r, tol, config.sabotage),
    }
}

/// Recursive and closed forms of `d^m`, and the adjoint identity through the dual pair.
fn calculus_trial(
    r: &mut TrialRng,
    dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<ConstructionCertificate>> {
    let t = complex_gaussian(r, dim, dim);
    let s = complex_gaussian(r, dim, dim);
    let x = complex_gaussian(r, dim, dim);
    let m = 1 + below(r, 6) as u32;
    let mut cert = ConstructionCertificate::new("calculus-oracle");
    cert.diagnostic("m", m as f64);
    for kind in [DKind::Delta, DKind::SmallDelta] {
        let pair = OperatorPair::new(t.clone(), s.clone(), kind)?;
        let recursive = d_power(&pair, &x, m)?;
        let closed = d_power_closed(&pair, &x, m)?;
        cert.residual(
            &format!("{kind}: recursive − closed form"),
            frob(&(recursive - &closed.value)),
            closed.scale,
            tol,
        );
        let direct = d_identity(&pair, m)?;
        let dual = adjoint_via_dual(&pair, m)?;
        cert.residual(
            &format!("{kind}: adjoint through the dual pair"),
            frob(&(direct.value.adjoint() - dual.value)),
            direct.scale.max(dual.scale),
            tol,
        );
    }
    Ok(vec![cert])
}

fn classes_trial(
    r: &mut TrialRng,
    dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<ConstructionCertificate>> {
    let family = ClassFamily::ALL[below(r, ClassFamily::ALL.len())];
    let m = 1 + below(r, 4) as u32;
    let n = if dim >= 2 { below(r, 3) as u32 } else { 0 };
    let spec = ClassSpec::new(family, m, n);
    let seed: u64 = rand::Rng::random(r);
    let inst = generate::gen_instance(&spec, dim, seed, tol)?;
    let mut cert = ConstructionCertificate::new("class-membership");
    cert.diagnostic("m", m as f64);
    cert.diagnostic("n", n as f64);
    let recheck = check_membership(&inst.certificate.spec, &inst.s, Some(&inst.t), tol)?;
    cert.push_residual(Check::bounded(
        format!("{} residual", spec.label()),
        recheck.residual_norm,
        recheck.scale,
        recheck.passed,
    ));
    let pair = OperatorPair::new(inst.t.clone(), inst.s.clone(), family.kind())?;
    let cl = classify(&pair, n, 12, inst.conjugation.as_ref(), tol)?;
    let minimal = cl.minimal_m.map_or(f64::INFINITY, f64::from);
    cert.diagnostic("minimal order", minimal);
    cert.push_residual(Check::flag(
        "minimal order at most m",
        minimal <= m as f64,
        minimal,
    ));
    Ok(vec![cert])
}

fn spectral_trial(
    r: &mut TrialRng,
    dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<ConstructionCertificate>> {
    let a = generate::separated_spectrum_matrix(r, dim);
    let report = spectral::spectral_report(&a, tol)?;
    let res = report.resolution_residuals(&a);
    let bound = RESOLUTION_TOL * dim as f64;
    let mut cert = ConstructionCertificate::new("spectral-resolution");
    for (name, v) in [
        ("Σ P_λ − I", res.sum),
        ("P_λ² − P_λ", res.idempotent),
        ("P_λ P_μ", res.orthogonal),
        ("[A, P_λ]", res.commuting),
    ] {
        cert.push_residual(Check::bounded(name, v, dim as f64, v <= bound));
    }
    let count: usize = report.eigenvalues.iter().map(|e| e.algebraic_mult).sum();
    cert.push_residual(Check::flag(
        "multiplicities sum to dim",
        count == dim,
        count as f64,
    ));
    let simple = report
        .eigenvalues
        .iter()
        .all(|e| e.simple_pole && e.ascent == e.descent);
    cert.push_residual(Check::flag(
        "separated eigenvalues are simple poles",
        simple,
        0.0,
    ));
    Ok(vec![cert])
}

fn pro00_trial(
    r: &mut TrialRng,
    dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<ConstructionCertificate>> {
    let quasi = generate::quasi_class_instance(r, dim, DKind::Delta, 3, 2);
    let mut certs = vec![structure::construct_aqp(
        DKind::Delta,
        &quasi.s,
        quasi.m,
        quasi.n,
        tol,
    )?];
    let kind = random_kind(r);
    let inv = generate::invertible_class_instance(r, dim, kind, 3);
    let aqp = structure::construct_aqp(kind, &inv.s, inv.m, inv.n, tol)?;
    if kind == DKind::Delta {
        if let (Some(a), Some(q)) = (aqp.payload.get("A"), aqp.payload.get("Q")) {
            certs.push(spectral::point_spectrum_circle_check(a, q, inv.m, tol)?);
        }
    }
    certs.push(aqp);
    certs.push(structure::construct_b(kind, &inv.s, inv.m, inv.n, tol)?);
    Ok(certs)
}

fn pro110_trial(
    r: &mut TrialRng,
    dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<ConstructionCertificate>> {
    let quasi = generate::conjugated_quasi_instance(r, dim, 3, 2);
    let inv = generate::conjugated_invertible_instance(r, dim, 3);
    let mut certs = Vec::new();
    for inst in [quasi, inv] {
        let conj = inst.conjugation.as_ref().expect("conjugated generator");
        certs.push(structure::construct_conjugated(
            DKind::Delta,
            &inst.s,
            conj,
            inst.m,
            inst.n,
            tol,
        )?);
    }
    Ok(certs)
}

fn thm10_trial(
    r: &mut TrialRng,
    dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<ConstructionCertificate>> {
    let mut certs = Vec::new();
    let pair = generate::left_invertible_pair(r, dim, 3);
    for p in 1..=3 {
        certs.push(structure::left_inverse_cp(
            &pair.t, &pair.s, pair.m, p, tol,
        )?);
    }
    let bounded = generate::power_bounded_pair(r, dim, 3);
    let p = 1 + below(r, 3) as u32;
    certs.push(structure::left_inverse_cp(
        &bounded.t, &bounded.s, bounded.m, p, tol,
    )?);
    certs.push(spectral::unimodular_semisimple_check(
        &bounded.s, &bounded.t, bounded.m, tol,
    )?);
    let quasi = generate::unitary_quasi_instance(r, dim.max(2), 2, 0.5);
    certs.push(spectral::quasi_unimodular_semisimple_check(
        &quasi.s, &quasi.t, quasi.m, quasi.n, tol,
    )?);
    Ok(certs)
}

fn pro10_trial(
    r: &mut TrialRng,
    dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<ConstructionCertificate>> {
    let inst = generate::unitary_quasi_instance(r, dim, 2, 0.5);
    let clusters = spectral::eigen_data(&inst.s, tol)?;
    let lambda = clusters[below(r, clusters.len())].value;
    Ok(vec![structure::riesz_selfadjoint_criterion(
        &inst.s, &inst.t, inst.m, inst.n, lambda, tol,
    )?])
}

/// Factor dimensions for the tensor-built generators.
fn tensor_dims(r: &mut TrialRng) -> (usize, usize) {
    (2 + below(r, 2), 1 + below(r, 3))
}

fn thm01_trial(
    r: &mut TrialRng,
    tol: &ToleranceConfig,
    sabotage: bool,
) -> Result<Vec<ConstructionCertificate>> {
    let kind = random_kind(r);
    let (p, q) = tensor_dims(r);
    let prod = generate::product_instance(r, kind, p, q, sabotage);
    let plain = structure::verify_product_theorem(
        kind, &prod.s, &prod.s1, &prod.t1, &prod.s2, &prod.t2, prod.m1, prod.m2, prod.n, tol,
    )?;
    if sabotage {
        return Ok(vec![plain]);
    }
    let mut certs = vec![plain];

    let (p, q) = tensor_dims(r);
    let ten = generate::tensor_instance(r, kind, p, q);
    certs.push(structure::verify_tensor_product(
        kind, &ten.a1, &ten.b1, &ten.a2, &ten.b2, ten.m1, ten.m2, ten.n, tol,
    )?);

    for (kind, conjugated) in [
        (DKind::Delta, true),
        (DKind::Delta, false),
        (DKind::SmallDelta, false),
        (DKind::SmallDelta, true),
    ] {
        let (p, q) = tensor_dims(r);
        let com = generate::commuting_instance(r, kind, p, q, conjugated);
        certs.push(structure::verify_commuting_product(
            kind,
            &com.s,
            &com.t,
            com.conjugation.as_ref(),
            com.m1,
            com.m2,
            com.n,
            tol,
        )?);
    }

    let d1 = 1 + below(r, 3);
    let ce = generate::strictness_counterexample(r, d1);
    certs.push(structure::verify_strictness_counterexample(
        &ce.s, &ce.s1, &ce.t1, &ce.s2, &ce.t2, ce.m2, ce.n, tol,
    )?);
    Ok(certs)
}

fn thm30_trial(
    r: &mut TrialRng,
    tol: &ToleranceConfig,
    sabotage: bool,
) -> Result<Vec<ConstructionCertificate>> {
    let kind = random_kind(r);
    let (p, q) = tensor_dims(r);
    let inst = generate::perturbation_instance(r, kind, p, q, false, false, sabotage);
    let main = structure::verify_perturbation_theorem(
        kind,
        &inst.s,
        &inst.t,
        &inst.n1_op,
        &inst.n2_op,
        inst.m,
        inst.n,
        inst.n1,
        inst.n2,
        tol,
    )?;
    if sabotage {
        return Ok(vec![main]);
    }
    let mut certs = vec![main];

    let kind = random_kind(r);
    let (p, q) = tensor_dims(r);
    let flat = generate::perturbation_instance(r, kind, p, q, true, false, false);
    certs.push(structure::verify_perturbation_theorem(
        kind,
        &flat.s,
        &flat.t,
        &flat.n1_op,
        &flat.n2_op,
        flat.m,
        0,
        flat.n1,
        flat.n2,
        tol,
    )?);

    let (p, q) = tensor_dims(r);
    let adj = generate::perturbation_instance(r, DKind::Delta, p, q, false, true, false);
    certs.push(structure::verify_adjoint_perturbation(
        DKind::Delta,
        &adj.s,
        &adj.n1_op,
        adj.m,
        adj.n,
        adj.n1,
        tol,
    )?);

    let (p, q) = tensor_dims(r);
    let conj = generate::conjugated_perturbation_instance(r, p, q);
    let c = conj.conjugation.as_ref().expect("conjugated generator");
    certs.push(structure::verify_conjugated_perturbation(
        &conj.s,
        c,
        &conj.n1_op,
        conj.m,
        conj.n,
        conj.n1,
        tol,
    )?);
    Ok(certs)
}

/// All trial outcomes of one suite, in index order.
pub fn run_trials(suite: Suite, config: &SuiteConfig) -> Vec<TrialOutcome> {
    (0..config.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(suite, config, i))
        .collect()
}

pub fn summarize(outcomes: &[TrialOutcome]) -> SuiteStats {
    let mut stats = SuiteStats {
        trials: outcomes.len(),
        passed: 0,
        vacuous: 0,
        failed: 0,
        worst_residual: 0.0,
        exemplar_seeds: Vec::new(),
    };
    for o in outcomes {
        match o.verdict {
            Verdict::Passed => stats.passed += 1,
            Verdict::Vacuous => stats.vacuous += 1,
            Verdict::Failed => {
                stats.failed += 1;
                stats.exemplar_seeds.push(o.seed);
            }
        }
        stats.worst_residual = stats.worst_residual.max(o.worst_residual);
    }
    stats
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let mut suites = BTreeMap::new();
    let mut selected = config.suites.clone();
    selected.sort();
    selected.dedup();
    for suite in selected {
        let stats = summarize(&run_trials(suite, config));
        suites.insert(suite.name().to_string(), stats);
    }
    let overall = suites.values().all(|s| s.failed == 0);
    Ok(SuiteReport {
        suites,
        overall,
        config: config.clone(),
    })
}

/// Runs the suites and writes the report to `config.report_path` when set.
pub fn run_and_write(config: &SuiteConfig) -> Result<SuiteReport> {
    let report = run_suite(config)?;
    if let Some(path) = &config.report_path {
        let mut text = report.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(suite: Suite, trials: usize) -> SuiteConfig {
        SuiteConfig {
            suites: vec![suite],
            trials,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn single_calculus_trial() {
        let cfg = SuiteConfig {
            dims: DimRange { min: 2, max: 2 },
            ..config(Suite::Calculus, 1)
        };
        let report = run_suite(&cfg).unwrap();
        let stats = &report.suites["calculus"];
        assert_eq!((stats.trials, stats.passed), (1, 1));
        assert!(stats.worst_residual <= cfg.tol.zero_rel);
        assert!(report.overall);
    }

    #[test]
    fn sabotage_is_vacuous() {
        for suite in [Suite::Thm30, Suite::Thm01] {
            let cfg = SuiteConfig {
                sabotage: true,
                ..config(suite, 10)
            };
            let stats = &run_suite(&cfg).unwrap().suites[suite.name()];
            assert_eq!((stats.vacuous, stats.failed), (10, 0), "{suite}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(SuiteConfig {
            trials: 0,
            ..SuiteConfig::default()
        }
        .validate()
        .is_err());
        let dims = DimRange { min: 1, max: 17 };
        assert!(SuiteConfig {
            dims,
            ..SuiteConfig::default()
        }
        .validate()
        .is_err());
        assert!(SuiteConfig::default().validate().is_ok());
    }

    #[test]
    fn dim_ranges_parse() {
        assert_eq!(
            "2..6".parse::<DimRange>().unwrap(),
            DimRange { min: 2, max: 6 }
        );
        assert_eq!(
            "3..=4".parse::<DimRange>().unwrap(),
            DimRange { min: 3, max: 4 }
        );
        assert_eq!(
            "5".parse::<DimRange>().unwrap(),
            DimRange { min: 5, max: 5 }
        );
        assert!("x..2".parse::<DimRange>().is_err());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse_list(s.name()).unwrap(), vec![s]);
        }
        assert_eq!(Suite::parse_list("all").unwrap().len(), 9);
        assert!(Suite::parse_list("thm99").is_err());
    }

    #[test]
    fn counts_are_order_independent() {
        let cfg = config(Suite::Pro00, 8);
        let forward = run_trials(Suite::Pro00, &cfg);
        let mut backward: Vec<_> = (0..8u64)
            .rev()
            .map(|i| run_trial(Suite::Pro00, &cfg, i))
            .collect();
        backward.reverse();
        assert_eq!(summarize(&forward), summarize(&backward));
    }
}
