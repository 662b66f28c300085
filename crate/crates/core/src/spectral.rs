//! Eigenvalue clusters, ascent/descent, Riesz projections and the
//! spectral surrogates for the polaroid results.

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{d_identity, d_power_closed, DKind, OperatorPair};
use crate::certificate::{Check, ConstructionCertificate};
use crate::classes::is_power_bounded;
use crate::error::{Error, Result};
use crate::linalg::{self, c, frob, identity, mat_pow, rank, CMatrix};
use crate::tolerance::ToleranceConfig;

/// A cluster of numerically coincident eigenvalues.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct EigenCluster {
    #[serde(serialize_with = "crate::json::serialize_complex")]
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Raw eigenvalues, computed by `faer`'s complex Schur-based solver.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let d = linalg::require_square(a, "eigenvalue operand")?;
    linalg::validate(a)?;
    if d == 0 {
        return Ok(Vec::new());
    }
    linalg::to_faer(a)
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigenvalue iteration did not converge: {e:?}")))
}

fn cluster_radius(a: &CMatrix, tol: &ToleranceConfig) -> f64 {
    tol.cluster_rel * frob(a) + tol.abs_floor
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

struct Group {
    members: Vec<Complex64>,
}

impl Group {
    fn center(&self) -> Complex64 {
        let sum: Complex64 = self.members.iter().sum();
        sum / self.members.len() as f64
    }
}

/// Eigenvalues grouped into clusters whose multiplicities sum to the dimension.
///
/// Eigenvalues within `cluster_rel·‖A‖_F` of each other are merged under the
/// transitive closure of that relation; the cluster value is the mean of its
/// members. A defective eigenvalue of index `k` splits into a ring of radius
/// about `ε^{1/k}` under rounding, which can exceed that radius, so clusters
/// closer than `√cluster_rel·‖A‖_F` are additionally merged when the merged
/// center `μ` satisfies `nullity((A−μ)^k) ≥ k` for the combined size `k`.
pub fn eigen_data(a: &CMatrix, tol: &ToleranceConfig) -> Result<Vec<EigenCluster>> {
    let values = eigenvalues(a)?;
    let n = values.len();
    let radius = cluster_radius(a, tol);
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut root_of: Vec<usize> = Vec::new();
    for (i, &z) in values.iter().enumerate() {
        let r = find(&mut parent, i);
        match root_of.iter().position(|&x| x == r) {
            Some(g) => groups[g].members.push(z),
            None => {
                root_of.push(r);
                groups.push(Group { members: vec![z] });
            }
        }
    }

    let wide = tol.cluster_rel.sqrt() * frob(a) + tol.abs_floor;
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                let dist = (groups[i].center() - groups[j].center()).norm();
                if dist <= wide && best.is_none_or(|(b, _, _)| dist < b) {
                    best = Some((dist, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let mut merged = groups[i].members.clone();
        merged.extend(groups[j].members.iter().copied());
        let candidate = Group { members: merged };
        let k = candidate.members.len();
        let shifted = a - identity(n) * candidate.center();
        let nullity = n - rank(&mat_pow(&shifted, k as u32), tol)?;
        if nullity >= k {
            groups[i] = candidate;
            groups.remove(j);
        } else {
            break;
        }
    }

    let mut clusters: Vec<EigenCluster> = groups
        .iter()
        .map(|g| EigenCluster {
            value: g.center(),
            multiplicity: g.members.len(),
        })
        .collect();
    clusters.sort_by(|x, y| {
        x.value
            .re
            .total_cmp(&y.value.re)
            .then(x.value.im.total_cmp(&y.value.im))
    });
    Ok(clusters)
}

/// The cluster containing `lambda`, if any.
pub fn locate(
    a: &CMatrix,
    lambda: Complex64,
    tol: &ToleranceConfig,
) -> Result<Option<EigenCluster>> {
    let clusters = eigen_data(a, tol)?;
    let radius = cluster_radius(a, tol);
    Ok(clusters
        .into_iter()
        .filter(|cl| (cl.value - lambda).norm() <= radius)
        .min_by(|x, y| {
            (x.value - lambda)
                .norm()
                .total_cmp(&(y.value - lambda).norm())
        }))
}

fn require_eigenvalue(
    a: &CMatrix,
    lambda: Complex64,
    tol: &ToleranceConfig,
) -> Result<EigenCluster> {
    locate(a, lambda, tol)?.ok_or_else(|| {
        Error::Domain(format!(
            "{} + {}i is not an eigenvalue (within the cluster radius)",
            lambda.re, lambda.im
        ))
    })
}

/// `(ascent, descent, pole order)` of `A − λ`; all three coincide in finite dimension.
pub fn ascent_descent(
    a: &CMatrix,
    lambda: Complex64,
    tol: &ToleranceConfig,
) -> Result<(usize, usize, usize)> {
    let cluster = require_eigenvalue(a, lambda, tol)?;
    let k = index_at(a, cluster.value, tol)?;
    Ok((k, k, k))
}

/// Least `k` with `rank((A−μ)^k) = rank((A−μ)^{k+1})`.
fn index_at(a: &CMatrix, mu: Complex64, tol: &ToleranceConfig) -> Result<usize> {
    let d = a.nrows();
    let shifted = a - identity(d) * mu;
    let mut power = identity(d);
    let mut prev = d;
    for k in 0..=d {
        let next = &power * &shifted;
        let r = rank(&next, tol)?;
        if r == prev {
            return Ok(k);
        }
        prev = r;
        power = next;
    }
    Ok(d)
}

#[derive(Clone, Debug)]
pub struct RieszProjection {
    pub matrix: CMatrix,
    pub pole_order: usize,
    /// 2-norm condition number of the basis `[ker | range]`.
    pub condition: f64,
    pub warning: Option<String>,
}

/// Spectral idempotent onto `ker((A−λ)^k)` along `range((A−λ)^k)`, `k` the pole order.
pub fn riesz_projection(
    a: &CMatrix,
    lambda: Complex64,
    tol: &ToleranceConfig,
) -> Result<RieszProjection> {
    let cluster = require_eigenvalue(a, lambda, tol)?;
    riesz_at(a, cluster, tol)
}

fn riesz_at(a: &CMatrix, cluster: EigenCluster, tol: &ToleranceConfig) -> Result<RieszProjection> {
    let d = a.nrows();
    let k = index_at(a, cluster.value, tol)?;
    let shifted_power = mat_pow(&(a - identity(d) * cluster.value), k as u32);
    let rb = linalg::rank_and_bases(&shifted_power, tol)?;
    let kernel = linalg::kernel_basis(&shifted_power, tol)?;
    let mut warning = None;
    let kdim = kernel.ncols();
    if kdim + rb.rank != d {
        return Err(Error::Numerical(format!(
            "kernel ({kdim}) and range ({}) dimensions do not add up to {d}",
            rb.rank
        )));
    }
    if kdim != cluster.multiplicity {
        warning = Some(format!(
            "generalized eigenspace has dimension {kdim}, cluster multiplicity is {}",
            cluster.multiplicity
        ));
    }
    let basis = linalg::hstack(&kernel, &rb.range_basis);
    let condition = linalg::condition_number(&basis)?;
    if condition > 1.0 / tol.zero_rel {
        warning = Some(format!(
            "basis condition number {condition:e} exceeds 1/zero_rel"
        ));
    }
    let inv = linalg::inverse(&basis)?;
    let matrix = basis.columns(0, kdim) * inv.rows(0, kdim);
    Ok(RieszProjection {
        matrix,
        pole_order: k,
        condition,
        warning,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenEntry {
    #[serde(serialize_with = "crate::json::serialize_complex")]
    pub lambda: Complex64,
    pub algebraic_mult: usize,
    pub geometric_mult: usize,
    pub ascent: usize,
    pub descent: usize,
    pub pole_order: usize,
    pub selfadjoint_projection: bool,
    pub simple_pole: bool,
    /// `‖P − P*‖_F` for this eigenvalue's Riesz projection.
    pub hermitian_deviation: f64,
    #[serde(serialize_with = "crate::json::serialize_matrix")]
    pub riesz: CMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub dim: usize,
    pub eigenvalues: Vec<EigenEntry>,
    pub warnings: Vec<String>,
}

impl SpectralReport {
    pub fn entry(&self, lambda: Complex64) -> Option<&EigenEntry> {
        self.eigenvalues.iter().min_by(|x, y| {
            (x.lambda - lambda)
                .norm()
                .total_cmp(&(y.lambda - lambda).norm())
        })
    }

    /// Residuals of `Σ P_λ = I`, `P_λ² = P_λ`, `P_λP_μ = 0` and `[A, P_λ] = 0`,
    /// each the largest Frobenius norm over the eigenvalues involved.
    pub fn resolution_residuals(&self, a: &CMatrix) -> ResolutionResiduals {
        let d = self.dim;
        let mut sum = CMatrix::zeros(d, d);
        let mut idempotent: f64 = 0.0;
        let mut orthogonal: f64 = 0.0;
        let mut commuting: f64 = 0.0;
        for (i, e) in self.eigenvalues.iter().enumerate() {
            sum += &e.riesz;
            idempotent = idempotent.max(frob(&(&e.riesz * &e.riesz - &e.riesz)));
            commuting = commuting.max(frob(&(a * &e.riesz - &e.riesz * a)));
            for f in self.eigenvalues.iter().skip(i + 1) {
                orthogonal = orthogonal
                    .max(frob(&(&e.riesz * &f.riesz)))
                    .max(frob(&(&f.riesz * &e.riesz)));
            }
        }
        ResolutionResiduals {
            sum: frob(&(sum - identity(d))),
            idempotent,
            orthogonal,
            commuting,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolutionResiduals {
    pub sum: f64,
    pub idempotent: f64,
    pub orthogonal: f64,
    pub commuting: f64,
}

impl ResolutionResiduals {
    pub fn max(&self) -> f64 {
        self.sum
            .max(self.idempotent)
            .max(self.orthogonal)
            .max(self.commuting)
    }
}

pub fn spectral_report(a: &CMatrix, tol: &ToleranceConfig) -> Result<SpectralReport> {
    let d = linalg::require_square(a, "spectral operand")?;
    let clusters = eigen_data(a, tol)?;
    let mut warnings = Vec::new();
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let rp = riesz_at(a, cl, tol)?;
        if let Some(w) = &rp.warning {
            warnings.push(format!("λ = {} + {}i: {w}", cl.value.re, cl.value.im));
        }
        let shifted = a - identity(d) * cl.value;
        let geometric = d - rank(&shifted, tol)?;
        let dev = linalg::hermitian_deviation(&rp.matrix);
        eigenvalues.push(EigenEntry {
            lambda: cl.value,
            algebraic_mult: cl.multiplicity,
            geometric_mult: geometric,
            ascent: rp.pole_order,
            descent: rp.pole_order,
            pole_order: rp.pole_order,
            selfadjoint_projection: tol.is_zero(dev, frob(&rp.matrix)),
            simple_pole: rp.pole_order == 1,
            hermitian_deviation: dev,
            riesz: rp.matrix,
        });
    }
    Ok(SpectralReport {
        dim: d,
        eigenvalues,
        warnings,
    })
}

/// Conclusion-only part of the unimodular-semisimple surrogate: `S` is
/// invertible, every eigenvalue lies within `cluster_rel` of the unit circle
/// and every pole is simple (so `S` is similar to a unitary).
pub fn unimodular_semisimple_conclusion(
    cert: &mut ConstructionCertificate,
    s: &CMatrix,
    tol: &ToleranceConfig,
) -> Result<()> {
    let sv = linalg::svd(s)?.singular_values;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let floor = tol.rank_rel * smax * s.nrows() as f64;
    cert.push_residual(Check::flag("invertible", smin > floor, smin));
    let clusters = eigen_data(s, tol)?;
    let deviation = clusters
        .iter()
        .map(|cl| (cl.value.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    cert.push_residual(Check::bounded(
        "unit-circle deviation",
        deviation,
        1.0,
        deviation <= tol.cluster_rel,
    ));
    let mut worst_pole = 0;
    for cl in &clusters {
        worst_pole = worst_pole.max(index_at(s, cl.value, tol)?);
    }
    cert.push_residual(Check::flag(
        "simple poles",
        worst_pole <= 1,
        worst_pole as f64,
    ));
    cert.diagnostic("max pole order", worst_pole as f64);
    Ok(())
}

fn power_bounded_hypotheses(
    cert: &mut ConstructionCertificate,
    s: &CMatrix,
    t: &CMatrix,
    tol: &ToleranceConfig,
) -> Result<()> {
    let s_ok = is_power_bounded(s, tol)?;
    cert.push_hypothesis(Check::flag("S power bounded", s_ok, 0.0));
    let t_ok = is_power_bounded(t, tol)?;
    cert.push_hypothesis(Check::flag("T power bounded", t_ok, 0.0));
    Ok(())
}

/// Finite-dimensional reading of the polaroid theorem for left m-invertible
/// pairs: if `Δ^m_{T,S}(I) = 0` and both operators are power bounded, then `S`
/// is similar to a unitary.
pub fn unimodular_semisimple_check(
    s: &CMatrix,
    t: &CMatrix,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<ConstructionCertificate> {
    let pair = OperatorPair::new(t.clone(), s.clone(), DKind::Delta)?;
    let mut cert = ConstructionCertificate::new("unimodular-semisimple");
    let r = d_identity(&pair, m)?;
    cert.hypothesis("left m-inverse residual", r.norm(), r.scale, tol);
    power_bounded_hypotheses(&mut cert, s, t, tol)?;
    unimodular_semisimple_conclusion(&mut cert, s, tol)?;
    Ok(cert)
}

/// The quasi version: premises on `(S, T)` at order `(m, n)` with `[S,T*] = 0`;
/// the conclusion is asserted for the compression `S1` of `S` to `range(Sⁿ)`.
pub fn quasi_unimodular_semisimple_check(
    s: &CMatrix,
    t: &CMatrix,
    m: u32,
    n: u32,
    tol: &ToleranceConfig,
) -> Result<ConstructionCertificate> {
    let pair = OperatorPair::new(t.clone(), s.clone(), DKind::Delta)?;
    let mut cert = ConstructionCertificate::new("quasi-unimodular-semisimple");
    let r = crate::calculus::quasi_residual(&pair, m, n)?;
    cert.hypothesis("quasi left m-inverse residual", r.norm(), r.scale, tol);
    cert.commutes("[S,T*]", s, &t.adjoint(), tol);
    power_bounded_hypotheses(&mut cert, s, t, tol)?;
    let blocks = crate::structure::quasi_block_decompose(s, t, n, tol)?;
    if blocks.d1 == 0 {
        cert.mark_degenerate("Sⁿ = 0: the compression is empty");
        return Ok(cert);
    }
    cert.diagnostic("d1", blocks.d1 as f64);
    unimodular_semisimple_conclusion(&mut cert, &blocks.s1, tol)?;
    Ok(cert)
}

/// Points of the spectrum of `A` lie on the unit circle when
/// `Δ^m_{A*,A}(Q) = 0` for an injective `Q ⪰ 0`; checked with the widened
/// tolerance `zero_rel^{1/m}`.
pub fn point_spectrum_circle_check(
    a: &CMatrix,
    q: &CMatrix,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<ConstructionCertificate> {
    let pair = OperatorPair::adjoint_pair(a, DKind::Delta)?;
    linalg::require_same_dim(a, q, "A and Q")?;
    let mut cert = ConstructionCertificate::new("point-spectrum-circle");
    let r = d_power_closed(&pair, q, m)?;
    cert.hypothesis("Δ^m_{A*,A}(Q)", r.norm(), r.scale, tol);
    let dev = linalg::hermitian_deviation(q);
    cert.hypothesis("Q Hermitian", dev, frob(q), tol);
    let lo = linalg::min_hermitian_eigenvalue(q)?;
    let qnorm = linalg::spectral_norm(q)?;
    cert.push_hypothesis(Check::flag(
        "Q positive semidefinite",
        lo >= -tol.threshold(qnorm),
        lo,
    ));
    cert.diagnostic("min eigenvalue of Q", lo);
    if lo <= tol.threshold(qnorm) {
        cert.mark_degenerate("Q is not injective; the circle conclusion is vacuous");
        return Ok(cert);
    }
    let widened = tol.zero_rel.powf(1.0 / m as f64);
    let deviation = eigen_data(a, tol)?
        .iter()
        .map(|cl| (cl.value.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    cert.push_residual(Check::bounded(
        "unit-circle deviation",
        deviation,
        1.0,
        deviation <= widened,
    ));
    Ok(cert)
}

/// Whether two matrices have the same eigenvalues with multiplicity, matched
/// greedily at absolute distance `eps`.
pub fn spectra_agree(
    a: &CMatrix,
    b: &CMatrix,
    eps: f64,
    tol: &ToleranceConfig,
) -> Result<(bool, f64)> {
    let expand = |m: &CMatrix| -> Result<Vec<Complex64>> {
        Ok(eigen_data(m, tol)?
            .into_iter()
            .flat_map(|cl| std::iter::repeat_n(cl.value, cl.multiplicity))
            .collect())
    };
    let xs = expand(a)?;
    let mut ys = expand(b)?;
    if xs.len() != ys.len() {
        return Ok((false, f64::INFINITY));
    }
    let mut worst: f64 = 0.0;
    for x in xs {
        let (idx, dist) = ys
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same length");
        worst = worst.max(dist);
        ys.swap_remove(idx);
    }
    Ok((worst <= eps, worst))
}

/// Identity-shifted copy `A − λI`.
pub fn shift(a: &CMatrix, lambda: Complex64) -> CMatrix {
    a - identity(a.nrows()) * lambda
}

pub fn czero() -> Complex64 {
    c(0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn close(a: &CMatrix, b: &CMatrix) -> bool {
        frob(&(a - b)) < 1e-10
    }

    #[test]
    fn eigen_examples() {
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let e = eigen_data(&a, &tol()).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e[0].value - c(0.0, 0.0)).norm() < 1e-12 && e[0].multiplicity == 1);
        assert!((e[1].value - c(1.0, 0.0)).norm() < 1e-12 && e[1].multiplicity == 1);

        let e = eigen_data(&identity(3), &tol()).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].multiplicity, 3);

        let n = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = eigen_data(&n, &tol()).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].multiplicity, 2);
    }

    #[test]
    fn ascent_examples() {
        let n = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(ascent_descent(&n, czero(), &tol()).unwrap(), (2, 2, 2));
        let d = from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(ascent_descent(&d, c(1.0, 0.0), &tol()).unwrap(), (1, 1, 1));
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(ascent_descent(&a, czero(), &tol()).unwrap(), (1, 1, 1));
        assert!(matches!(
            ascent_descent(&d, c(3.0, 0.0), &tol()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn riesz_examples() {
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let p0 = riesz_projection(&a, czero(), &tol()).unwrap();
        assert!(close(
            &p0.matrix,
            &from_real_rows(&[&[0.0, -1.0], &[0.0, 1.0]])
        ));
        assert!(p0.warning.is_none());
        let d = from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let p1 = riesz_projection(&d, c(1.0, 0.0), &tol()).unwrap();
        assert!(close(
            &p1.matrix,
            &from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]])
        ));
    }

    #[test]
    fn report_of_rank_one_idempotent() {
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let r = spectral_report(&a, &tol()).unwrap();
        assert_eq!(r.eigenvalues.len(), 2);
        let p0 = r.entry(czero()).unwrap();
        assert!(!p0.selfadjoint_projection);
        assert!(p0.simple_pole);
        assert!(r.resolution_residuals(&a).max() < 1e-12);
    }

    #[test]
    fn jordan_block_of_index_three_clusters_as_one() {
        let mut a = identity(3);
        a[(0, 1)] = c(1.0, 0.0);
        a[(1, 2)] = c(1.0, 0.0);
        let e = eigen_data(&a, &tol()).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].multiplicity, 3);
        assert_eq!(ascent_descent(&a, c(1.0, 0.0), &tol()).unwrap().2, 3);
    }

    #[test]
    fn surrogate_examples() {
        let s = from_diag(&[c(0.0, 1.0), c(-1.0, 0.0)]);
        let cert = unimodular_semisimple_check(&s, &s.adjoint(), 1, &tol()).unwrap();
        assert!(cert.passed, "{cert:?}");

        let j = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let cert = unimodular_semisimple_check(&j, &j.adjoint(), 3, &tol()).unwrap();
        assert_eq!(cert.verdict, crate::certificate::Verdict::Vacuous);
    }

    fn from_diag(d: &[Complex64]) -> CMatrix {
        linalg::from_diagonal(d)
    }

    #[test]
    fn circle_examples() {
        let theta = 0.7_f64;
        let a = from_diag(&[c(1.0, 0.0), c(theta.cos(), theta.sin())]);
        for m in 1..4 {
            let cert = point_spectrum_circle_check(&a, &identity(2), m, &tol()).unwrap();
            assert!(cert.passed && !cert.degenerate);
        }
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let q = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let cert = point_spectrum_circle_check(&a, &q, 1, &tol()).unwrap();
        assert!(cert.degenerate);
    }
}
