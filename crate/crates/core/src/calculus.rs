//! The elementary operators `Δ_{T,S}(X) = TXS − X` and `δ_{T,S}(X) = TX − XS`,
//! their powers, conjugation by antilinear involutions, n-quasi residuals and
//! the product / nilpotent-perturbation expansions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::certificate::{commutator_residual, Violation};
use crate::error::{Error, Result};
use crate::linalg::{self, frob, identity, mat_pow, CMatrix};
use crate::tolerance::ToleranceConfig;

/// Largest order for which binomial coefficients are computed exactly.
pub const MAX_CLOSED_ORDER: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DKind {
    /// `X ↦ TXS − X`
    Delta,
    /// `X ↦ TX − XS`
    SmallDelta,
}

impl fmt::Display for DKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DKind::Delta => "delta",
            DKind::SmallDelta => "small-delta",
        })
    }
}

impl FromStr for DKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "delta" | "big-delta" => Ok(DKind::Delta),
            "small-delta" | "smalldelta" | "small_delta" | "sdelta" => Ok(DKind::SmallDelta),
            other => Err(Error::InvalidInput(format!(
                "unknown operator kind '{other}'"
            ))),
        }
    }
}

/// The pair `(T, S)` defining `d_{T,S}`.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub t: CMatrix,
    pub s: CMatrix,
    pub kind: DKind,
}

impl OperatorPair {
    pub fn new(t: CMatrix, s: CMatrix, kind: DKind) -> Result<Self> {
        linalg::require_square(&t, "T")?;
        linalg::require_square(&s, "S")?;
        linalg::require_same_dim(&t, &s, "operator pair")?;
        linalg::validate(&t)?;
        linalg::validate(&s)?;
        Ok(OperatorPair { t, s, kind })
    }

    /// `(S*, S)`: the pair behind m-isometries (Δ) and m-selfadjoint operators (δ).
    pub fn adjoint_pair(s: &CMatrix, kind: DKind) -> Result<Self> {
        OperatorPair::new(s.adjoint(), s.clone(), kind)
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// `(S*, T*)`, the pair whose residuals are adjoint to this one's.
    pub fn dual(&self) -> Self {
        OperatorPair {
            t: self.s.adjoint(),
            s: self.t.adjoint(),
            kind: self.kind,
        }
    }
}

/// A computed matrix and the largest Frobenius norm among the terms summed to
/// produce it; the latter is the scale residual tests are judged against.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: CMatrix,
    pub scale: f64,
}

impl Evaluation {
    pub fn norm(&self) -> f64 {
        frob(&self.value)
    }

    pub fn is_zero(&self, tol: &ToleranceConfig) -> bool {
        tol.is_zero(self.norm(), self.scale)
    }
}

/// Antilinear involution `x ↦ J·conj(x)` with `J` symmetric and unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Conjugation {
    j: CMatrix,
}

impl Conjugation {
    pub fn new(j: CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let d = linalg::require_square(&j, "J")?;
        linalg::validate(&j)?;
        let scale = (d as f64).sqrt();
        let unitary = frob(&(j.adjoint() * &j - identity(d)));
        if !tol.is_zero(unitary, scale) {
            return Err(Error::InvalidInput(format!(
                "conjugation matrix is not unitary (deviation {unitary:e})"
            )));
        }
        let symmetric = frob(&(&j - j.transpose()));
        if !tol.is_zero(symmetric, scale) {
            return Err(Error::InvalidInput(format!(
                "conjugation matrix is not symmetric (deviation {symmetric:e})"
            )));
        }
        Ok(Conjugation { j })
    }

    /// Entrywise complex conjugation.
    pub fn standard(d: usize) -> Self {
        Conjugation { j: identity(d) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        &self.j * x.map(|z| z.conj())
    }

    /// Matrix of the linear map `x ↦ C(M(C(x)))`, i.e. `J·conj(M)·conj(J)`.
    pub fn cmc(&self, m: &CMatrix) -> Result<CMatrix> {
        linalg::require_same_dim(&self.j, m, "conjugation and operator")?;
        Ok(&self.j * m.map(|z| z.conj()) * self.j.map(|z| z.conj()))
    }

    /// The same antilinear map written in the basis `x = V·y` for unitary `V`:
    /// `J' = V*·J·conj(V)`.
    pub fn in_basis(&self, v: &CMatrix) -> Conjugation {
        Conjugation {
            j: v.adjoint() * &self.j * v.map(|z| z.conj()),
        }
    }

    /// The conjugation carried along by `x ↦ V·x`: `J' = V·J·Vᵀ`.
    pub fn transported(&self, v: &CMatrix) -> Conjugation {
        Conjugation {
            j: v * &self.j * v.transpose(),
        }
    }

    pub fn direct_sum(&self, other: &Conjugation) -> Conjugation {
        Conjugation {
            j: linalg::direct_sum(&self.j, &other.j),
        }
    }

    pub fn tensor(&self, other: &Conjugation) -> Result<Conjugation> {
        Ok(Conjugation {
            j: linalg::kronecker(&self.j, &other.j)?,
        })
    }

    /// `‖J·conj(M) − M·J‖_F`: how far `M` is from commuting with `C`.
    pub fn commutator_norm(&self, m: &CMatrix) -> f64 {
        frob(&(&self.j * m.map(|z| z.conj()) - m * &self.j))
    }
}

fn check_operand(pair: &OperatorPair, x: &CMatrix) -> Result<()> {
    if x.shape() != pair.s.shape() {
        return Err(Error::Dimension(format!(
            "operand is {}x{}, operators are {}x{}",
            x.nrows(),
            x.ncols(),
            pair.dim(),
            pair.dim()
        )));
    }
    Ok(())
}

fn apply_unchecked(pair: &OperatorPair, x: &CMatrix) -> CMatrix {
    match pair.kind {
        DKind::Delta => &pair.t * x * &pair.s - x,
        DKind::SmallDelta => &pair.t * x - x * &pair.s,
    }
}

pub fn d_apply(pair: &OperatorPair, x: &CMatrix) -> Result<CMatrix> {
    check_operand(pair, x)?;
    Ok(apply_unchecked(pair, x))
}

/// `d^m(X)` by `m` successive applications; `d^0(X) = X`.
pub fn d_power(pair: &OperatorPair, x: &CMatrix, m: u32) -> Result<CMatrix> {
    check_operand(pair, x)?;
    let mut acc = x.clone();
    for _ in 0..m {
        acc = apply_unchecked(pair, &acc);
    }
    Ok(acc)
}

/// Exact `C(m, j)`.
pub fn binomial(m: u32, j: u32) -> u128 {
    if j > m {
        return 0;
    }
    let j = j.min(m - j) as u128;
    let m = m as u128;
    let mut acc: u128 = 1;
    for i in 0..j {
        acc = acc * (m - i) / (i + 1);
    }
    acc
}

fn signed_binomial(m: u32, j: u32) -> f64 {
    let b = binomial(m, j) as f64;
    if j.is_multiple_of(2) {
        b
    } else {
        -b
    }
}

/// `[A⁰, A¹, …, A^k]`.
pub fn powers(a: &CMatrix, k: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(identity(a.nrows()));
    for i in 0..k {
        let next = &out[i] * a;
        out.push(next);
    }
    out
}

fn require_closed_order(m: u32) -> Result<()> {
    if m > MAX_CLOSED_ORDER {
        return Err(Error::Domain(format!(
            "order {m} exceeds the exact-binomial limit {MAX_CLOSED_ORDER}"
        )));
    }
    Ok(())
}

/// Binomial closed form of `d^m(X)`:
/// `Σ (−1)^j C(m,j) T^{m−j} X S^{m−j}` for Δ and `Σ (−1)^j C(m,j) T^{m−j} X S^j` for δ.
pub fn d_power_closed(pair: &OperatorPair, x: &CMatrix, m: u32) -> Result<Evaluation> {
    check_operand(pair, x)?;
    require_closed_order(m)?;
    let tp = powers(&pair.t, m as usize);
    let sp = powers(&pair.s, m as usize);
    let mut value = CMatrix::zeros(x.nrows(), x.ncols());
    let mut scale: f64 = 0.0;
    for j in 0..=m {
        let k = (m - j) as usize;
        let right = match pair.kind {
            DKind::Delta => &sp[k],
            DKind::SmallDelta => &sp[j as usize],
        };
        let term = &tp[k] * x * right;
        let coeff = signed_binomial(m, j);
        scale = scale.max(coeff.abs() * frob(&term));
        value += term * linalg::c(coeff, 0.0);
    }
    Ok(Evaluation { value, scale })
}

/// `d^m_{T,S}(I)` in closed form.
pub fn d_identity(pair: &OperatorPair, m: u32) -> Result<Evaluation> {
    d_power_closed(pair, &identity(pair.dim()), m)
}

/// `S*ⁿ · d^m_{T,S}(I) · Sⁿ` with the outer factor taken from `pair.s`.
pub fn quasi_residual(pair: &OperatorPair, m: u32, n: u32) -> Result<Evaluation> {
    quasi_residual_with_outer(&pair.s, pair, m, n)
}

/// `R*ⁿ · d^m_{T,S}(I) · Rⁿ` for an explicit outer operator `R`.
///
/// The (m,C) classes need this form: their defining residual is
/// `S*ⁿ d^m_{S*, CSC}(I) Sⁿ`, where the outer factor is `S` rather than the
/// right operand `CSC`.
pub fn quasi_residual_with_outer(
    outer: &CMatrix,
    pair: &OperatorPair,
    m: u32,
    n: u32,
) -> Result<Evaluation> {
    linalg::require_same_dim(outer, &pair.s, "outer operator")?;
    let inner = d_identity(pair, m)?;
    if n == 0 {
        return Ok(inner);
    }
    let rn = mat_pow(outer, n);
    let outer_norm = linalg::spectral_norm(&rn)?;
    let value = rn.adjoint() * &inner.value * &rn;
    Ok(Evaluation {
        value,
        scale: inner.scale * outer_norm * outer_norm,
    })
}

/// Both sides of an expansion identity plus hypothesis diagnostics.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub lhs: CMatrix,
    /// The expansion as displayed: products of separately evaluated factors.
    pub rhs: CMatrix,
    /// The expansion with the inner operator applied to the accumulated
    /// factor; exact under the commutation premises alone.
    pub rhs_operator: CMatrix,
    pub scale: f64,
    /// `‖lhs − rhs‖_F / scale`.
    pub residual: f64,
    /// `‖lhs − rhs_operator‖_F / scale`.
    pub operator_residual: f64,
    pub hypothesis_violations: Vec<Violation>,
    /// Commutators outside the stated premises that the displayed form also relies on.
    pub cross_commutators: Vec<Violation>,
}

fn relative(norm: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        norm / scale
    } else {
        norm
    }
}

fn commutator_violation(
    name: &str,
    a: &CMatrix,
    b: &CMatrix,
    tol: &ToleranceConfig,
) -> Option<Violation> {
    let (norm, scale) = commutator_residual(a, b);
    (!tol.is_zero(norm, scale)).then(|| Violation {
        name: name.to_string(),
        magnitude: relative(norm, scale),
    })
}

fn check_dims(ms: &[&CMatrix]) -> Result<usize> {
    let d = linalg::require_square(ms[0], "operand")?;
    for m in ms {
        linalg::require_square(m, "operand")?;
        linalg::require_same_dim(ms[0], m, "expansion operands")?;
        linalg::validate(m)?;
    }
    Ok(d)
}

/// Expansion of `d^p_{T1T2, S1S2}(I)` over the factor pairs `(T1,S1)`, `(T2,S2)`.
///
/// The premises `[S1,S2] = 0 = [T1,T2]` are checked and reported, never assumed.
pub fn product_expansion(
    kind: DKind,
    t1: &CMatrix,
    s1: &CMatrix,
    t2: &CMatrix,
    s2: &CMatrix,
    p: u32,
    tol: &ToleranceConfig,
) -> Result<Expansion> {
    let d = check_dims(&[t1, s1, t2, s2])?;
    require_closed_order(p)?;
    let id = identity(d);
    let pair1 = OperatorPair::new(t1.clone(), s1.clone(), kind)?;
    let pair2 = OperatorPair::new(t2.clone(), s2.clone(), kind)?;
    let product = OperatorPair::new(t1 * t2, s1 * s2, kind)?;
    let lhs_eval = d_identity(&product, p)?;

    let d1: Vec<CMatrix> = (0..=p)
        .map(|j| d_power(&pair1, &id, j))
        .collect::<Result<_>>()?;
    let d2: Vec<CMatrix> = (0..=p)
        .map(|j| d_power(&pair2, &id, j))
        .collect::<Result<_>>()?;
    let t1p = powers(t1, p as usize);
    let t2p = powers(t2, p as usize);
    let s1p = powers(s1, p as usize);

    let mut rhs = CMatrix::zeros(d, d);
    let mut rhs_operator = CMatrix::zeros(d, d);
    let mut scale = lhs_eval.scale;
    for j in 0..=p {
        let k = (p - j) as usize;
        let b = linalg::c(binomial(p, j) as f64, 0.0);
        let (displayed, composed) = match kind {
            DKind::Delta => (
                &t1p[k] * &d2[k] * &s1p[k] * &d1[j as usize],
                &t1p[k] * d_power(&pair2, &d1[j as usize], k as u32)? * &s1p[k],
            ),
            DKind::SmallDelta => (
                &t2p[k] * &d1[k] * &d2[j as usize] * &s1p[j as usize],
                &t2p[k] * d_power(&pair1, &(&d2[j as usize] * &s1p[j as usize]), k as u32)?,
            ),
        };
        scale = scale.max(binomial(p, j) as f64 * frob(&displayed).max(frob(&composed)));
        rhs += displayed * b;
        rhs_operator += composed * b;
    }

    let hypothesis_violations = [
        commutator_violation("[S1,S2]", s1, s2, tol),
        commutator_violation("[T1,T2]", t1, t2, tol),
    ]
    .into_iter()
    .flatten()
    .collect();
    let cross_commutators = [
        commutator_violation("[T1,S2]", t1, s2, tol),
        commutator_violation("[T2,S1]", t2, s1, tol),
        commutator_violation("[T1,S1]", t1, s1, tol),
        commutator_violation("[T2,S2]", t2, s2, tol),
    ]
    .into_iter()
    .flatten()
    .collect();

    let lhs = lhs_eval.value;
    Ok(Expansion {
        residual: relative(frob(&(&lhs - &rhs)), scale),
        operator_residual: relative(frob(&(&lhs - &rhs_operator)), scale),
        lhs,
        rhs,
        rhs_operator,
        scale,
        hypothesis_violations,
        cross_commutators,
    })
}

/// Expansion of `d^p_{T, S+N}(I)` in powers of `N`, valid when `[S,N] = 0`:
/// `Σ C(p,j) T^j Δ^{p−j}_{T,S}(I) N^j` for Δ and `Σ (−1)^j C(p,j) δ^{p−j}_{T,S}(I) N^j` for δ.
pub fn perturbation_expansion(
    kind: DKind,
    t: &CMatrix,
    s: &CMatrix,
    n: &CMatrix,
    p: u32,
    tol: &ToleranceConfig,
) -> Result<Expansion> {
    let d = check_dims(&[t, s, n])?;
    require_closed_order(p)?;
    let id = identity(d);
    let base = OperatorPair::new(t.clone(), s.clone(), kind)?;
    let perturbed = OperatorPair::new(t.clone(), s + n, kind)?;
    let lhs_eval = d_identity(&perturbed, p)?;
    let tp = powers(t, p as usize);
    let np = powers(n, p as usize);

    let mut rhs = CMatrix::zeros(d, d);
    let mut scale = lhs_eval.scale;
    for j in 0..=p {
        let inner = d_power(&base, &id, p - j)?;
        let (term, coeff) = match kind {
            DKind::Delta => (
                &tp[j as usize] * inner * &np[j as usize],
                binomial(p, j) as f64,
            ),
            DKind::SmallDelta => (inner * &np[j as usize], signed_binomial(p, j)),
        };
        scale = scale.max(coeff.abs() * frob(&term));
        rhs += term * linalg::c(coeff, 0.0);
    }
    let hypothesis_violations = commutator_violation("[S,N]", s, n, tol)
        .into_iter()
        .collect();
    let lhs = lhs_eval.value;
    let residual = relative(frob(&(&lhs - &rhs)), scale);
    Ok(Expansion {
        residual,
        operator_residual: residual,
        lhs,
        rhs_operator: rhs.clone(),
        rhs,
        scale,
        hypothesis_violations,
        cross_commutators: Vec::new(),
    })
}

/// `d^m_{T,S}(I)*` expressed through the dual pair: `Δ^m_{S*,T*}(I)` for Δ and
/// `(−1)^m δ^m_{S*,T*}(I)` for δ.
pub fn adjoint_via_dual(pair: &OperatorPair, m: u32) -> Result<Evaluation> {
    let mut dual = d_identity(&pair.dual(), m)?;
    if pair.kind == DKind::SmallDelta && m % 2 == 1 {
        dual.value = -dual.value;
    }
    Ok(dual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows};

    fn jordan2() -> CMatrix {
        from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])
    }

    fn nil2() -> CMatrix {
        from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    #[test]
    fn apply_examples() {
        let s = jordan2();
        let t = from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let pair = OperatorPair::new(t, s, DKind::Delta).unwrap();
        let r = d_apply(&pair, &identity(2)).unwrap();
        assert_eq!(r, from_real_rows(&[&[0.0, 1.0], &[1.0, 1.0]]));

        let inv = OperatorPair::new(
            linalg::inverse(&jordan2()).unwrap(),
            jordan2(),
            DKind::Delta,
        )
        .unwrap();
        assert!(frob(&d_apply(&inv, &identity(2)).unwrap()) < 1e-15);

        let same = OperatorPair::new(jordan2(), jordan2(), DKind::SmallDelta).unwrap();
        assert_eq!(frob(&d_apply(&same, &identity(2)).unwrap()), 0.0);
    }

    #[test]
    fn apply_dimension_mismatch() {
        let pair = OperatorPair::new(identity(2), identity(2), DKind::Delta).unwrap();
        assert!(matches!(
            d_apply(&pair, &identity(3)),
            Err(Error::Dimension(_))
        ));
        assert!(OperatorPair::new(identity(2), identity(3), DKind::Delta).is_err());
    }

    #[test]
    fn jordan_isometry_orders() {
        let pair = OperatorPair::adjoint_pair(&jordan2(), DKind::Delta).unwrap();
        let d2 = d_power(&pair, &identity(2), 2).unwrap();
        assert_eq!(d2, from_real_rows(&[&[0.0, 0.0], &[0.0, 2.0]]));
        assert_eq!(frob(&d_power(&pair, &identity(2), 3).unwrap()), 0.0);
        assert_eq!(d_identity(&pair, 2).unwrap().value, d2);
    }

    #[test]
    fn nilpotent_selfadjoint_orders() {
        let pair = OperatorPair::adjoint_pair(&nil2(), DKind::SmallDelta).unwrap();
        assert_eq!(frob(&d_identity(&pair, 3).unwrap().value), 0.0);
        let d2 = d_identity(&pair, 2).unwrap().value;
        assert_eq!(d2, from_real_rows(&[&[0.0, 0.0], &[0.0, -2.0]]));
    }

    #[test]
    fn zero_order_is_identity_map() {
        let pair = OperatorPair::adjoint_pair(&jordan2(), DKind::Delta).unwrap();
        let x = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(d_power(&pair, &x, 0).unwrap(), x);
        assert_eq!(d_power_closed(&pair, &x, 0).unwrap().value, x);
    }

    #[test]
    fn scalar_isometry_vanishes_for_every_order() {
        let one = identity(1);
        let pair = OperatorPair::adjoint_pair(&one, DKind::Delta).unwrap();
        for m in 1..10 {
            assert_eq!(frob(&d_identity(&pair, m).unwrap().value), 0.0);
        }
    }

    #[test]
    fn closed_form_order_cap() {
        let pair = OperatorPair::adjoint_pair(&identity(1), DKind::Delta).unwrap();
        assert!(d_power_closed(&pair, &identity(1), 62).is_ok());
        assert!(matches!(
            d_power_closed(&pair, &identity(1), 63),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(62, 31), 465_428_353_255_261_088);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn cmc_examples() {
        let m = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(Conjugation::standard(2).cmc(&m).unwrap(), m);
        let swap = Conjugation::new(
            from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
            &ToleranceConfig::default(),
        )
        .unwrap();
        let mut di = CMatrix::zeros(2, 2);
        di[(0, 0)] = c(0.0, 1.0);
        let mut expected = CMatrix::zeros(2, 2);
        expected[(1, 1)] = c(0.0, -1.0);
        assert_eq!(swap.cmc(&di).unwrap(), expected);
    }

    #[test]
    fn conjugation_rejects_bad_matrices() {
        let tol = ToleranceConfig::default();
        assert!(Conjugation::new(from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]), &tol).is_err());
        // unitary but antisymmetric
        assert!(Conjugation::new(from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]), &tol).is_err());
    }

    #[test]
    fn quasi_examples() {
        let s = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let pair = OperatorPair::adjoint_pair(&s, DKind::Delta).unwrap();
        let r = quasi_residual(&pair, 1, 1).unwrap();
        assert_eq!(r.norm(), 0.0);

        let j = OperatorPair::adjoint_pair(&jordan2(), DKind::Delta).unwrap();
        let r = quasi_residual(&j, 2, 1).unwrap();
        assert!(!r.is_zero(&ToleranceConfig::default()));
    }

    #[test]
    fn product_expansion_identity_factors() {
        let i = identity(3);
        for kind in [DKind::Delta, DKind::SmallDelta] {
            let e =
                product_expansion(kind, &i, &i, &i, &i, 4, &ToleranceConfig::default()).unwrap();
            assert_eq!(frob(&e.lhs), 0.0);
            assert_eq!(frob(&e.rhs), 0.0);
            assert!(e.hypothesis_violations.is_empty());
        }
    }

    #[test]
    fn perturbation_flat_fixture() {
        let i = identity(2);
        let e = perturbation_expansion(
            DKind::Delta,
            &i,
            &i,
            &nil2(),
            3,
            &ToleranceConfig::default(),
        )
        .unwrap();
        assert_eq!(frob(&e.lhs), 0.0);
        assert_eq!(frob(&e.rhs), 0.0);
        assert_eq!(e.residual, 0.0);
    }

    #[test]
    fn perturbation_reports_noncommuting_nilpotent() {
        let s = from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let e = perturbation_expansion(
            DKind::Delta,
            &s,
            &s,
            &nil2(),
            2,
            &ToleranceConfig::default(),
        )
        .unwrap();
        assert_eq!(e.hypothesis_violations.len(), 1);
    }

    #[test]
    fn adjoint_duality_sign() {
        let s = jordan2();
        let t = from_real_rows(&[&[2.0, 0.0], &[1.0, 1.0]]);
        for kind in [DKind::Delta, DKind::SmallDelta] {
            let pair = OperatorPair::new(t.clone(), s.clone(), kind).unwrap();
            for m in 1..5 {
                let direct = d_identity(&pair, m).unwrap().value.adjoint();
                let dual = adjoint_via_dual(&pair, m).unwrap().value;
                assert!(frob(&(direct - dual)) < 1e-9);
            }
        }
    }
}
