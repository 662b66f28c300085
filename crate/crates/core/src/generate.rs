//! Seeded generators of certified class members and of the hypothesis-
//! satisfying instances each verifier consumes.
//!
//! Every construction starts from a block "model" whose membership follows
//! from its shape (a scaled Jordan block, a diagonal unitary, a nilpotent
//! corner) and is then moved by a random unitary so that no structure is
//! visible in the standard basis.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::calculus::{Conjugation, DKind};
use crate::classes::{check_membership, Certificate, ClassFamily, ClassSpec, Recipe};
use crate::error::{Error, Result};
use crate::linalg::{
    self, assemble, c, direct_sum, from_diagonal, identity, kronecker, CMatrix, MAX_DIM,
};
use crate::random::{
    below, coin, complex_gaussian, random_invertible, random_orthogonal, random_unitary,
    real_gaussian, rng, separated_angles, separated_phases, separated_reals, uniform, unimodular,
    TrialRng,
};
use crate::tolerance::ToleranceConfig;

/// Nilpotent Jordan block of size `k` (ones on the superdiagonal).
pub fn jordan_nilpotent(k: usize) -> CMatrix {
    CMatrix::from_fn(
        k,
        k,
        |i, j| if j == i + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) },
    )
}

/// `u·(I + c·J_k)`: a strict `(2k−1)`-isometry when `|u| = 1` and `c ≠ 0`.
pub fn isometry_block(k: usize, u: Complex64, scale: f64) -> CMatrix {
    (identity(k) + jordan_nilpotent(k) * c(scale, 0.0)) * u
}

/// `a·I + c·J_k`: a strict `(2k−1)`-selfadjoint operator for real `a`.
pub fn selfadjoint_block(k: usize, a: f64, scale: f64) -> CMatrix {
    identity(k) * c(a, 0.0) + jordan_nilpotent(k) * c(scale, 0.0)
}

/// Jordan size `k` whose blocks have strict order `2k − 1 ≤ m`.
pub fn jordan_size_for_order(m: u32) -> usize {
    m.div_ceil(2) as usize
}

/// Upper-triangular nilpotent built from scaled Jordan blocks of size at most
/// `index`, so that `N^index = 0`.
pub fn nilpotent_of_index(r: &mut TrialRng, d: usize, index: usize) -> CMatrix {
    let mut out = CMatrix::zeros(d, d);
    let mut start = 0;
    while start < d {
        let size = index.max(1).min(d - start);
        let scale = uniform(r, 0.5, 1.5);
        for i in 0..size.saturating_sub(1) {
            out[(start + i, start + i + 1)] = c(scale, 0.0);
        }
        start += size;
    }
    out
}

fn real_unit_sign(r: &mut TrialRng) -> f64 {
    if coin(r, 0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Moves a random entry to the front, so the Jordan eigenvalue is not always
/// the smallest of a separated set.
fn lead_random<T>(r: &mut TrialRng, mut v: Vec<T>) -> Vec<T> {
    let j = below(r, v.len());
    v.swap(0, j);
    v
}

/// `u(I + cJ_k) ⊕ diag(unimodular)`, all eigenvalues well separated.
pub fn isometry_model(r: &mut TrialRng, d: usize, k: usize) -> CMatrix {
    let phases = separated_phases(r, d - k + 1);
    let phases = lead_random(r, phases);
    let block = isometry_block(k, phases[0], uniform(r, 0.5, 1.5));
    direct_sum(&block, &from_diagonal(&phases[1..]))
}

/// Block-diagonal rotations by `angles`, padded with `tail` when `d` is odd.
fn rotation_blocks(d: usize, angles: &[Complex64], tail: f64) -> CMatrix {
    let mut out = CMatrix::zeros(d, d);
    for (j, t) in angles.iter().enumerate() {
        let (cos, sin) = (t.cos(), t.sin());
        let i = 2 * j;
        out[(i, i)] = cos;
        out[(i, i + 1)] = -sin;
        out[(i + 1, i)] = sin;
        out[(i + 1, i + 1)] = cos;
    }
    if d % 2 == 1 {
        out[(d - 1, d - 1)] = c(tail, 0.0);
    }
    out
}

/// `±(I + cJ_k) ⊕ O` with `O` real orthogonal; every entry is real and the
/// rotation angles of `O` stay away from the Jordan eigenvalue.
pub fn real_isometry_model(r: &mut TrialRng, d: usize, k: usize) -> CMatrix {
    let sign = real_unit_sign(r);
    let block = isometry_block(k, c(sign, 0.0), uniform(r, 0.5, 1.5));
    let dd = d - k;
    let angles: Vec<Complex64> = separated_angles(r, dd / 2)
        .into_iter()
        .map(|t| c(t, 0.0))
        .collect();
    let q = random_orthogonal(r, dd);
    let o = &q * rotation_blocks(dd, &angles, -sign) * q.transpose();
    direct_sum(&block, &o)
}

/// `aI + cJ_k ⊕ diag(real)` with separated diagonal values.
pub fn selfadjoint_model(r: &mut TrialRng, d: usize, k: usize) -> CMatrix {
    let values = separated_reals(r, d - k + 1, -2.0, 2.0);
    let values = lead_random(r, values);
    let block = selfadjoint_block(k, values[0], uniform(r, 0.5, 1.5));
    let rest: Vec<Complex64> = values[1..].iter().map(|&x| c(x, 0.0)).collect();
    direct_sum(&block, &from_diagonal(&rest))
}

/// Complex orthogonal `exp(K)` for a complex skew-symmetric `K`.
pub fn complex_orthogonal(r: &mut TrialRng, d: usize) -> CMatrix {
    let g = complex_gaussian(r, d, d) * c(0.3, 0.0);
    (&g - g.transpose()).exp()
}

/// `±(I + cJ_k) ⊕ E·R·Eᵀ` with `E` complex orthogonal and `R` built from
/// rotations by complex angles: an (m,C)-isometry for entrywise conjugation.
pub fn c_isometry_model(r: &mut TrialRng, d: usize, k: usize) -> CMatrix {
    let sign = real_unit_sign(r);
    let block = isometry_block(k, c(sign, 0.0), uniform(r, 0.5, 1.5));
    let dd = d - k;
    let angles: Vec<Complex64> = separated_angles(r, dd / 2)
        .into_iter()
        .map(|t| c(t, uniform(r, -0.3, 0.3)))
        .collect();
    let e = complex_orthogonal(r, dd);
    let g = &e * rotation_blocks(dd, &angles, -sign) * e.transpose();
    direct_sum(&block, &g)
}

/// `aI + cJ_k ⊕ E·D·Eᵀ` with `E` complex orthogonal and `D` diagonal: an
/// (m,C)-symmetry for entrywise conjugation.
pub fn c_symmetry_model(r: &mut TrialRng, d: usize, k: usize) -> CMatrix {
    let values = separated_reals(r, d - k + 1, -2.0, 2.0);
    let values = lead_random(r, values);
    let block = selfadjoint_block(k, values[0], uniform(r, 0.5, 1.5));
    let diag: Vec<Complex64> = values[1..]
        .iter()
        .map(|&x| c(x, uniform(r, -0.5, 0.5)))
        .collect();
    let e = complex_orthogonal(r, d - k);
    direct_sum(&block, &(&e * from_diagonal(&diag) * e.transpose()))
}

/// `[[base, X], [0, N2]]` with `N2` nilpotent of index at most `n`.
pub fn quasi_lift(r: &mut TrialRng, base: &CMatrix, d2: usize, n: usize, real: bool) -> CMatrix {
    let d1 = base.nrows();
    let x = if real {
        real_gaussian(r, d1, d2)
    } else {
        complex_gaussian(r, d1, d2)
    };
    let n2 = nilpotent_of_index(r, d2, n);
    assemble(base, &x, &CMatrix::zeros(d2, d1), &n2)
}

/// Random symmetric unitary `W·Wᵀ`.
pub fn random_conjugation(r: &mut TrialRng, d: usize) -> Conjugation {
    Conjugation::standard(d).transported(&random_unitary(r, d))
}

/// A conjugation `J = W·Wᵀ`, block-diagonal `J1 ⊕ J2` when block sizes are given.
pub fn gen_conjugation(
    dim: usize,
    seed: u64,
    block_dims: Option<(usize, usize)>,
) -> Result<Conjugation> {
    let mut r = rng(seed);
    match block_dims {
        None => Ok(random_conjugation(&mut r, dim)),
        Some((d1, d2)) if d1 + d2 == dim => {
            let j1 = random_conjugation(&mut r, d1);
            let j2 = random_conjugation(&mut r, d2);
            Ok(j1.direct_sum(&j2))
        }
        Some((d1, d2)) => Err(Error::Dimension(format!(
            "block sizes {d1}+{d2} do not sum to {dim}"
        ))),
    }
}

fn rotate(v: &CMatrix, m: &CMatrix) -> CMatrix {
    v * m * v.adjoint()
}

/// A generated operator with everything needed to verify it.
#[derive(Clone, Debug)]
pub struct Instance {
    pub s: CMatrix,
    pub t: CMatrix,
    pub conjugation: Option<Conjugation>,
    pub certificate: Certificate,
}

/// Generates a certified member of `spec` of the given dimension.
///
/// Recipes: (a) rotated `u(I + cJ_k) ⊕ unitary` with `T = S*`; (b) rotated
/// `aI + cJ_k ⊕ real diagonal`; (c) `T = S⁻¹` for random invertible `S`
/// (order 1) or the adjoint pair of (a); (d) for `n ≥ 1` the base is placed in
/// the corner of `[[S1, X], [0, N2]]` with `N2ⁿ = 0`; (e) C-classes use
/// real or complex-orthogonal / complex-symmetric models with entrywise
/// conjugation, carried along by the rotation `V` as `J = V·J₀·Vᵀ`.
pub fn gen_instance(
    spec: &ClassSpec,
    dim: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<Instance> {
    if spec.m == 0 {
        return Err(Error::Domain("class order m must be at least 1".into()));
    }
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Generation(format!(
            "dimension {dim} outside 1..={MAX_DIM}"
        )));
    }
    let mut r = rng(seed);
    let quasi = spec.n >= 1;
    let k_target = jordan_size_for_order(spec.m);
    let room = dim - usize::from(quasi);
    let k = k_target.min(room);
    if k == 0 {
        return Err(Error::Generation(format!(
            "a {}-quasi instance needs dimension > 1, got {dim}",
            spec.n
        )));
    }
    let d2 = if quasi { 1 + below(&mut r, dim - k) } else { 0 };
    let d1 = dim - d2;
    let family = spec.family;
    let mut params = BTreeMap::new();
    params.insert("k".to_string(), k as f64);
    params.insert("d1".to_string(), d1 as f64);
    params.insert("d2".to_string(), d2 as f64);

    let (recipe, model_s, model_t, model_j) = match family {
        ClassFamily::MIsometry => (
            "(a) isometric Jordan model",
            isometry_model(&mut r, d1, k),
            None,
            None,
        ),
        ClassFamily::MSelfadjoint => (
            "(b) selfadjoint Jordan model",
            selfadjoint_model(&mut r, d1, k),
            None,
            None,
        ),
        ClassFamily::McIsometry => (
            "(e) conjugation-isometric model",
            c_isometry_model(&mut r, d1, k),
            None,
            Some(()),
        ),
        ClassFamily::McSymmetry => (
            "(e) conjugation-symmetric model",
            c_symmetry_model(&mut r, d1, k),
            None,
            Some(()),
        ),
        ClassFamily::LeftMInvertible if spec.m == 1 => {
            let s1 = random_invertible(&mut r, d1);
            let t1 = linalg::inverse(&s1)?;
            ("(c) inverse pair", s1, Some(t1), None)
        }
        ClassFamily::LeftMInvertible => (
            "(c) adjoint pair of (a)",
            isometry_model(&mut r, d1, k),
            None,
            None,
        ),
    };

    let (s_block, t_block, j_block) = if quasi {
        let lifted = quasi_lift(&mut r, &model_s, d2, spec.n as usize, false);
        let t_block = model_t.map(|t1| direct_sum(&t1, &complex_gaussian(&mut r, d2, d2)));
        let j_block =
            model_j.map(|_| Conjugation::standard(d1).direct_sum(&random_conjugation(&mut r, d2)));
        (lifted, t_block, j_block)
    } else {
        (model_s, model_t, model_j.map(|_| Conjugation::standard(d1)))
    };
    let v = random_unitary(&mut r, dim);
    let s = rotate(&v, &s_block);
    let t = match t_block {
        Some(t) => rotate(&v, &t),
        None => s.adjoint(),
    };
    let conjugation = j_block.map(|j| j.transported(&v));

    let mut full_spec = ClassSpec::new(family, spec.m, spec.n);
    full_spec.conjugation = conjugation.clone();
    let mut certificate = check_membership(&full_spec, &s, Some(&t), tol)?;
    if !certificate.passed {
        return Err(Error::Generation(format!(
            "recipe {recipe} produced residual {:e} at scale {:e}",
            certificate.residual_norm, certificate.scale
        )));
    }
    certificate.recipe = Some(Recipe {
        name: if quasi {
            format!("(d) corner lift of {recipe}")
        } else {
            recipe.to_string()
        },
        params,
        seed,
    });
    Ok(Instance {
        s,
        t,
        conjugation,
        certificate,
    })
}

/// A generated operator (pair) with its advertised orders.
#[derive(Clone, Debug)]
pub struct QuasiInstance {
    pub s: CMatrix,
    pub t: CMatrix,
    pub conjugation: Option<Conjugation>,
    pub m: u32,
    pub n: u32,
    /// Dimension of `range(Sⁿ)`.
    pub d1: usize,
}

fn pick_orders(r: &mut TrialRng, dim: usize, m_max: u32, n_max: u32) -> (u32, u32, usize, usize) {
    let n = 1 + below(r, n_max as usize) as u32;
    let mut m = 1 + below(r, m_max as usize) as u32;
    let mut k = jordan_size_for_order(m);
    if k + 1 > dim {
        k = dim - 1;
        m = m.min(2 * k as u32 - 1).max(1);
    }
    let d2 = 1 + below(r, dim - k);
    (m, n, k, d2)
}

/// An n-quasi m-isometry (Δ) or m-selfadjoint operator (δ) with `T = S*`,
/// `m ≤ m_max`, `1 ≤ n ≤ n_max` and a nonzero kernel corner.
pub fn quasi_class_instance(
    r: &mut TrialRng,
    dim: usize,
    kind: DKind,
    m_max: u32,
    n_max: u32,
) -> QuasiInstance {
    let dim = dim.max(2);
    let (m, n, k, d2) = pick_orders(r, dim, m_max, n_max);
    let d1 = dim - d2;
    let base = match kind {
        DKind::Delta => isometry_model(r, d1, k),
        DKind::SmallDelta => selfadjoint_model(r, d1, k),
    };
    let lifted = quasi_lift(r, &base, d2, n as usize, false);
    let v = random_unitary(r, dim);
    let s = rotate(&v, &lifted);
    QuasiInstance {
        t: s.adjoint(),
        s,
        conjugation: None,
        m,
        n,
        d1,
    }
}

/// An invertible m-isometry (Δ) or m-selfadjoint operator (δ), `T = S*`.
pub fn invertible_class_instance(
    r: &mut TrialRng,
    dim: usize,
    kind: DKind,
    m_max: u32,
) -> QuasiInstance {
    let m = 1 + below(r, m_max as usize) as u32;
    let k = jordan_size_for_order(m).min(dim);
    let model = match kind {
        DKind::Delta => isometry_model(r, dim, k),
        DKind::SmallDelta => {
            // keep zero out of the spectrum so that S is invertible
            let mut sa = selfadjoint_model(r, dim, k);
            for i in 0..dim {
                let z = sa[(i, i)].re;
                sa[(i, i)] = c(if z >= 0.0 { z + 0.5 } else { z - 0.5 }, 0.0);
            }
            sa
        }
    };
    let v = random_unitary(r, dim);
    let s = rotate(&v, &model);
    QuasiInstance {
        t: s.adjoint(),
        s,
        conjugation: None,
        m,
        n: 1 + below(r, 2) as u32,
        d1: dim,
    }
}

/// n-quasi (m,C)-isometry built from real data and rotated, so that the
/// conjugation is block-diagonal and commutes with the polar data `[[U1, X], [0, 0]]`.
pub fn conjugated_quasi_instance(
    r: &mut TrialRng,
    dim: usize,
    m_max: u32,
    n_max: u32,
) -> QuasiInstance {
    let dim = dim.max(2);
    let (m, n, k, d2) = pick_orders(r, dim, m_max, n_max);
    let d1 = dim - d2;
    let base = real_isometry_model(r, d1, k);
    let lifted = quasi_lift(r, &base, d2, n as usize, true);
    let v = random_unitary(r, dim);
    QuasiInstance {
        s: rotate(&v, &lifted),
        t: rotate(&v, &lifted.adjoint()),
        conjugation: Some(Conjugation::standard(dim).transported(&v)),
        m,
        n,
        d1,
    }
}

/// Invertible real (m,C)-isometry, rotated, with its transported conjugation.
pub fn conjugated_invertible_instance(r: &mut TrialRng, dim: usize, m_max: u32) -> QuasiInstance {
    let m = 1 + below(r, m_max as usize) as u32;
    let k = jordan_size_for_order(m).min(dim);
    let model = real_isometry_model(r, dim, k);
    let v = random_unitary(r, dim);
    let s = rotate(&v, &model);
    QuasiInstance {
        t: s.adjoint(),
        s,
        conjugation: Some(Conjugation::standard(dim).transported(&v)),
        m,
        n: 1 + below(r, 2) as u32,
        d1: dim,
    }
}

/// n-quasi (m,C)-isometry (Δ) or symmetry (δ) with a conjugation that is
/// block-diagonal for the decomposition `range(Sⁿ) ⊕ ker(S*ⁿ)`.
pub fn conjugated_family_instance(
    r: &mut TrialRng,
    dim: usize,
    kind: DKind,
    m_max: u32,
    n_max: u32,
) -> QuasiInstance {
    let dim = dim.max(2);
    let (m, n, k, d2) = pick_orders(r, dim, m_max, n_max);
    let d1 = dim - d2;
    let base = match kind {
        DKind::Delta => c_isometry_model(r, d1, k),
        DKind::SmallDelta => c_symmetry_model(r, d1, k),
    };
    let lifted = quasi_lift(r, &base, d2, n as usize, false);
    let j = Conjugation::standard(d1).direct_sum(&random_conjugation(r, d2));
    let v = random_unitary(r, dim);
    let s = rotate(&v, &lifted);
    QuasiInstance {
        t: s.adjoint(),
        s,
        conjugation: Some(j.transported(&v)),
        m,
        n,
        d1,
    }
}

/// A left m-invertible pair: `T = S⁻¹` for `m = 1`, otherwise the adjoint
/// pair of a rotated isometric Jordan model.
pub fn left_invertible_pair(r: &mut TrialRng, dim: usize, m_max: u32) -> QuasiInstance {
    let m = 1 + below(r, m_max as usize) as u32;
    if m == 1 {
        let s = random_invertible(r, dim);
        let t = linalg::inverse(&s).expect("well-conditioned by construction");
        return QuasiInstance {
            s,
            t,
            conjugation: None,
            m,
            n: 0,
            d1: dim,
        };
    }
    let k = jordan_size_for_order(m).min(dim);
    let v = random_unitary(r, dim);
    let s = rotate(&v, &isometry_model(r, dim, k));
    QuasiInstance {
        t: s.adjoint(),
        s,
        conjugation: None,
        m,
        n: 0,
        d1: dim,
    }
}

/// A left m-invertible pair with both operators power bounded: either
/// `S = V·D·V⁻¹`, `T = S⁻¹` with `D` unitary diagonal (order 1), or a rotated
/// diagonal unitary with `T = S*` and a random advertised order.
pub fn power_bounded_pair(r: &mut TrialRng, dim: usize, m_max: u32) -> QuasiInstance {
    let d = from_diagonal(&separated_phases(r, dim));
    if coin(r, 0.5) {
        let v = random_invertible(r, dim);
        let vinv = linalg::inverse(&v).expect("well-conditioned by construction");
        let s = &v * &d * &vinv;
        let t = &v * d.adjoint() * &vinv;
        return QuasiInstance {
            s,
            t,
            conjugation: None,
            m: 1,
            n: 0,
            d1: dim,
        };
    }
    let v = random_unitary(r, dim);
    let s = rotate(&v, &d);
    QuasiInstance {
        t: s.adjoint(),
        s,
        conjugation: None,
        m: 1 + below(r, m_max as usize) as u32,
        n: 0,
        d1: dim,
    }
}

/// n-quasi isometry `[[U, X], [0, N2]]` with `U` a diagonal unitary of
/// well-separated phases, rotated, `T = S*`. With probability `p_zero_corner`
/// the corner `X` vanishes, making `S = U ⊕ N2` reducing.
pub fn unitary_quasi_instance(
    r: &mut TrialRng,
    dim: usize,
    n_max: u32,
    p_zero_corner: f64,
) -> QuasiInstance {
    let dim = dim.max(2);
    let n = 1 + below(r, n_max as usize) as u32;
    let d2 = 1 + below(r, dim - 1);
    let d1 = dim - d2;
    let u = from_diagonal(&separated_phases(r, d1));
    let mut lifted = quasi_lift(r, &u, d2, n as usize, false);
    if coin(r, p_zero_corner) {
        lifted.view_mut((0, d1), (d1, d2)).fill(c(0.0, 0.0));
    }
    let v = random_unitary(r, dim);
    let s = rotate(&v, &lifted);
    QuasiInstance {
        t: s.adjoint(),
        s,
        conjugation: None,
        m: 1 + below(r, 2) as u32,
        n,
        d1,
    }
}

/// Inputs for the product theorem and its corollaries.
#[derive(Clone, Debug)]
pub struct ProductInstance {
    pub s: CMatrix,
    pub s1: CMatrix,
    pub t1: CMatrix,
    pub s2: CMatrix,
    pub t2: CMatrix,
    pub m1: u32,
    pub m2: u32,
    pub n: u32,
}

fn flat_model(r: &mut TrialRng, kind: DKind, d: usize, m_max: u32) -> (CMatrix, CMatrix, u32) {
    let m = 1 + below(r, m_max as usize) as u32;
    let k = jordan_size_for_order(m).min(d);
    let v = random_unitary(r, d);
    if kind == DKind::Delta && m == 1 && coin(r, 0.5) {
        let s = random_invertible(r, d);
        let t = linalg::inverse(&s).expect("well-conditioned by construction");
        return (s, t, 1);
    }
    let model = match kind {
        DKind::Delta => isometry_model(r, d, k),
        DKind::SmallDelta => selfadjoint_model(r, d, k),
    };
    let s = rotate(&v, &model);
    (s.adjoint(), s, m)
}

/// Tensor-built product instance: `S = A⊗I`, `S1 = A^r⊗I`, `T1 = A*^r⊗I`,
/// `S2 = I⊗A2`, `T2 = I⊗B2`, all moved by one global unitary. `A` is an
/// n-quasi member (possibly `n = 0`), `(B2, A2)` a flat pair.
///
/// With `sabotage`, `S2` is replaced by a random unitary conjugate so that
/// `[S1, S2] ≠ 0`.
pub fn product_instance(
    r: &mut TrialRng,
    kind: DKind,
    p: usize,
    q: usize,
    sabotage: bool,
) -> ProductInstance {
    // a scalar second factor would commute with every rotation
    let q = if sabotage { q.max(2) } else { q };
    let a = if coin(r, 0.75) {
        quasi_class_instance(r, p, kind, 3, 2)
    } else {
        let inst = invertible_class_instance(r, p, kind, 3);
        QuasiInstance { n: 0, ..inst }
    };
    let (b2, a2, m2) = flat_model(r, kind, q, 3);
    let power = 1 + below(r, 2) as u32;
    let ar = linalg::mat_pow(&a.s, power);
    let iq = identity(q);
    let ip = identity(a.s.nrows());
    let k = |x: &CMatrix, y: &CMatrix| kronecker(x, y).expect("small dimensions");
    let v = random_unitary(r, a.s.nrows() * q);
    let mut s2 = k(&ip, &a2);
    if sabotage {
        let w = random_unitary(r, s2.nrows());
        s2 = rotate(&w, &s2);
    }
    ProductInstance {
        s: rotate(&v, &k(&a.s, &iq)),
        s1: rotate(&v, &k(&ar, &iq)),
        t1: rotate(&v, &k(&ar.adjoint(), &iq)),
        s2: rotate(&v, &s2),
        t2: rotate(&v, &k(&ip, &b2)),
        m1: a.m,
        m2,
        n: a.n,
    }
}

/// Factors for the tensor corollary: `A1` n-quasi with `[A1, B1*] = 0`, `(B2, A2)` flat.
#[derive(Clone, Debug)]
pub struct TensorInstance {
    pub a1: CMatrix,
    pub b1: CMatrix,
    pub a2: CMatrix,
    pub b2: CMatrix,
    pub m1: u32,
    pub m2: u32,
    pub n: u32,
}

pub fn tensor_instance(r: &mut TrialRng, kind: DKind, p: usize, q: usize) -> TensorInstance {
    let a = quasi_class_instance(r, p, kind, 3, 2);
    let (b2, a2, m2) = flat_model(r, kind, q, 3);
    TensorInstance {
        b1: a.t,
        a1: a.s,
        a2,
        b2,
        m1: a.m,
        m2,
        n: a.n,
    }
}

/// Commuting `S, T` for the corollaries on products `ST`: `S = A⊗I` n-quasi,
/// `T = I⊗B` flat, rotated together. With `conjugated`, `A` is built from real
/// data (so `[S, CSC] = 0`), `B` is a general (m,C) member, and `C = J_A ⊗ J_B`.
#[derive(Clone, Debug)]
pub struct CommutingInstance {
    pub s: CMatrix,
    pub t: CMatrix,
    pub conjugation: Option<Conjugation>,
    pub m1: u32,
    pub m2: u32,
    pub n: u32,
}

pub fn commuting_instance(
    r: &mut TrialRng,
    kind: DKind,
    p: usize,
    q: usize,
    conjugated: bool,
) -> CommutingInstance {
    let (a, ja) = if conjugated {
        let (m, n, k, d2) = pick_orders(r, p.max(2), 3, 2);
        let d1 = p.max(2) - d2;
        let base = match kind {
            DKind::Delta => real_isometry_model(r, d1, k),
            DKind::SmallDelta => selfadjoint_model(r, d1, k),
        };
        let lifted = quasi_lift(r, &base, d2, n as usize, true);
        let va = random_unitary(r, lifted.nrows());
        let inst = QuasiInstance {
            s: rotate(&va, &lifted),
            t: rotate(&va, &lifted.adjoint()),
            conjugation: None,
            m,
            n,
            d1,
        };
        (
            inst,
            Some(Conjugation::standard(lifted.nrows()).transported(&va)),
        )
    } else {
        (quasi_class_instance(r, p, kind, 3, 2), None)
    };
    let m2 = 1 + below(r, 3) as u32;
    let k2 = jordan_size_for_order(m2).min(q);
    let vb = random_unitary(r, q);
    let (b, jb) = if conjugated {
        let model = match kind {
            DKind::Delta => c_isometry_model(r, q, k2),
            DKind::SmallDelta => c_symmetry_model(r, q, k2),
        };
        (
            rotate(&vb, &model),
            Some(Conjugation::standard(q).transported(&vb)),
        )
    } else {
        let model = match kind {
            DKind::Delta => isometry_model(r, q, k2),
            DKind::SmallDelta => selfadjoint_model(r, q, k2),
        };
        (rotate(&vb, &model), None)
    };
    let dp = a.s.nrows();
    let s = kronecker(&a.s, &identity(q)).expect("small dimensions");
    let t = kronecker(&identity(dp), &b).expect("small dimensions");
    let conjugation = match (ja, jb) {
        (Some(ja), Some(jb)) => Some(ja.tensor(&jb).expect("small dimensions")),
        _ => None,
    };
    let v = random_unitary(r, dp * q);
    CommutingInstance {
        s: rotate(&v, &s),
        t: rotate(&v, &t),
        conjugation: conjugation.map(|j| j.transported(&v)),
        m1: a.m,
        m2,
        n: a.n,
    }
}

/// Inputs for the nilpotent-perturbation theorem.
#[derive(Clone, Debug)]
pub struct PerturbationInstance {
    pub s: CMatrix,
    pub t: CMatrix,
    pub n1_op: CMatrix,
    pub n2_op: CMatrix,
    pub conjugation: Option<Conjugation>,
    pub m: u32,
    pub n: u32,
    pub n1: u32,
    pub n2: u32,
}

/// `S = A⊗I_q` with `A` n-quasi (or flat when `n = 0`), `T = S*`,
/// `N1 = c·(A^r ⊗ J)`, `N2 = c'·(A*^{r'} ⊗ J')` with `J, J'` nilpotent, all
/// moved by one global unitary. `adjoint_nilpotents` forces `N2 = N1*`.
/// With `sabotage`, `N1` is replaced by a random unitary conjugate so that
/// `[S, N1] ≠ 0`.
pub fn perturbation_instance(
    r: &mut TrialRng,
    kind: DKind,
    p: usize,
    q: usize,
    flat: bool,
    adjoint_nilpotents: bool,
    sabotage: bool,
) -> PerturbationInstance {
    let a = if flat {
        let inst = invertible_class_instance(r, p, kind, 3);
        QuasiInstance { n: 0, ..inst }
    } else {
        quasi_class_instance(r, p, kind, 3, 2)
    };
    let dp = a.s.nrows();
    let q = if sabotage { q.max(2) } else { q };
    let nil = |r: &mut TrialRng, min_index: usize| -> (CMatrix, u32) {
        let index = min_index + below(r, q + 1 - min_index);
        (nilpotent_of_index(r, q, index), index as u32)
    };
    // sabotage needs N1 ≠ 0, i.e. index at least 2
    let (j1, n1) = nil(r, if sabotage { 2 } else { 1 });
    let r1 = below(r, 2) as u32;
    let c1 = uniform(r, 0.3, 1.0);
    let n1_op = kronecker(&linalg::mat_pow(&a.s, r1), &j1).expect("small dimensions") * c(c1, 0.0);
    let (n2_op, n2) = if adjoint_nilpotents {
        (n1_op.adjoint(), n1)
    } else {
        let (j2, n2) = nil(r, 1);
        let r2 = below(r, 2) as u32;
        let c2 = uniform(r, 0.3, 1.0);
        (
            kronecker(&linalg::mat_pow(&a.t, r2), &j2).expect("small dimensions") * c(c2, 0.0),
            n2,
        )
    };
    let s = kronecker(&a.s, &identity(q)).expect("small dimensions");
    let v = random_unitary(r, dp * q);
    let mut n1_rot = rotate(&v, &n1_op);
    if sabotage {
        let w = random_unitary(r, dp * q);
        n1_rot = rotate(&w, &n1_rot);
    }
    let s_rot = rotate(&v, &s);
    PerturbationInstance {
        t: s_rot.adjoint(),
        s: s_rot,
        n1_op: n1_rot,
        n2_op: rotate(&v, &n2_op),
        conjugation: None,
        m: a.m,
        n: a.n,
        n1,
        n2,
    }
}

/// `S = A⊗I_q` with `A` an n-quasi (m,C)-isometry whose conjugation is
/// block-diagonal, `C = J_A ⊗ I`, and `N = c·(A^r ⊗ J)` nilpotent.
pub fn conjugated_perturbation_instance(
    r: &mut TrialRng,
    p: usize,
    q: usize,
) -> PerturbationInstance {
    let a = conjugated_family_instance(r, p, DKind::Delta, 3, 2);
    let index = 1 + below(r, q);
    let j = nilpotent_of_index(r, q, index);
    let power = below(r, 2) as u32;
    let n_op = kronecker(&linalg::mat_pow(&a.s, power), &j).expect("small dimensions")
        * c(uniform(r, 0.3, 1.0), 0.0);
    let dp = a.s.nrows();
    let s = kronecker(&a.s, &identity(q)).expect("small dimensions");
    let conj = a
        .conjugation
        .expect("conjugated family instance")
        .tensor(&Conjugation::standard(q))
        .expect("small dimensions");
    let v = random_unitary(r, dp * q);
    let s_rot = rotate(&v, &s);
    PerturbationInstance {
        t: s_rot.adjoint(),
        s: s_rot,
        n2_op: rotate(&v, &n_op.adjoint()),
        n1_op: rotate(&v, &n_op),
        conjugation: Some(conj.transported(&v)),
        m: a.m,
        n: a.n,
        n1: index as u32,
        n2: index as u32,
    }
}

/// The strictness counterexample for products: with `S = G ⊕ 0` (so
/// `range(S) = H1`), `S1 = S11 ⊕ I`, `T1 = S11⁻¹ ⊕ I`, `S2 = S21 ⊕ S22`,
/// `T2 = S21* ⊕ S22*` where `S21` is a diagonal unitary and `S22 = [[1,1],[0,1]]`
/// is a strict 3-isometry. `T1` is a 1-quasi left 1-inverse of `S1`, `T2` a
/// strict left 3-inverse of `S2`, yet `T1T2` is a 1-quasi left 1-inverse of `S1S2`.
pub fn strictness_counterexample(r: &mut TrialRng, d1: usize) -> ProductInstance {
    let d1 = d1.max(1);
    let g: Vec<Complex64> = (0..d1)
        .map(|_| c(uniform(r, 0.5, 2.0), 0.0) * unimodular(r))
        .collect();
    let s11: Vec<Complex64> = (0..d1)
        .map(|_| c(uniform(r, 0.5, 2.0), 0.0) * unimodular(r))
        .collect();
    let s11_inv: Vec<Complex64> = s11.iter().map(|z| 1.0 / z).collect();
    let s21 = separated_phases(r, d1);
    let s22 = isometry_block(2, c(1.0, 0.0), 1.0);
    let s = direct_sum(&from_diagonal(&g), &CMatrix::zeros(2, 2));
    let s1 = direct_sum(&from_diagonal(&s11), &identity(2));
    let t1 = direct_sum(&from_diagonal(&s11_inv), &identity(2));
    let s2 = direct_sum(&from_diagonal(&s21), &s22);
    let t2 = s2.adjoint();
    let v = random_unitary(r, d1 + 2);
    ProductInstance {
        s: rotate(&v, &s),
        s1: rotate(&v, &s1),
        t1: rotate(&v, &t1),
        s2: rotate(&v, &s2),
        t2: rotate(&v, &t2),
        m1: 1,
        m2: 3,
        n: 1,
    }
}

/// Random matrix `V·diag(λ)·V⁻¹` with well-separated eigenvalues and a
/// well-conditioned `V`.
pub fn separated_spectrum_matrix(r: &mut TrialRng, dim: usize) -> CMatrix {
    let phases = separated_phases(r, dim);
    let radii: Vec<f64> = (0..dim)
        .map(|j| 0.5 + j as f64 * 0.5 + uniform(r, -0.1, 0.1))
        .collect();
    let diag: Vec<Complex64> = phases.iter().zip(&radii).map(|(p, rad)| p * *rad).collect();
    let v = random_invertible(r, dim);
    let vinv = linalg::inverse(&v).expect("well-conditioned by construction");
    v * from_diagonal(&diag) * vinv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{d_identity, quasi_residual, OperatorPair};
    use crate::classes::classify;
    use crate::linalg::{frob, from_real_rows};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn isometry_block_example() {
        let s = isometry_block(2, c(1.0, 0.0), 1.0);
        assert_eq!(s, from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]));
        let pair = OperatorPair::adjoint_pair(&s, DKind::Delta).unwrap();
        assert_eq!(frob(&d_identity(&pair, 3).unwrap().value), 0.0);
    }

    #[test]
    fn corner_lift_example() {
        let base = identity(1);
        let s = assemble(
            &base,
            &identity(1),
            &CMatrix::zeros(1, 1),
            &CMatrix::zeros(1, 1),
        );
        assert_eq!(s, from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]));
        let pair = OperatorPair::adjoint_pair(&s, DKind::Delta).unwrap();
        assert_eq!(quasi_residual(&pair, 1, 1).unwrap().norm(), 0.0);
    }

    #[test]
    fn real_rotation_is_c_isometry() {
        let t = 0.3_f64;
        let rot = from_real_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        let spec = ClassSpec::new(ClassFamily::McIsometry, 1, 0)
            .with_conjugation(Conjugation::standard(2));
        assert!(check_membership(&spec, &rot, None, &tol()).unwrap().passed);
    }

    #[test]
    fn conjugation_examples() {
        let j = gen_conjugation(4, 3, None).unwrap();
        Conjugation::new(j.matrix().clone(), &tol()).unwrap();
        let jb = gen_conjugation(5, 3, Some((2, 3))).unwrap();
        Conjugation::new(jb.matrix().clone(), &tol()).unwrap();
        assert!(frob(&jb.matrix().view((0, 2), (2, 3)).into_owned()) == 0.0);
        assert!(gen_conjugation(5, 3, Some((2, 2))).is_err());
        let swap = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            Conjugation::standard(2).transported(&swap).matrix(),
            &identity(2)
        );
    }

    #[test]
    fn every_family_generates() {
        for family in ClassFamily::ALL {
            for m in 1..=5 {
                for n in 0..=2 {
                    for dim in 2..=5 {
                        let spec = ClassSpec::new(family, m, n);
                        let inst =
                            gen_instance(&spec, dim, 11 * m as u64 + n as u64 + dim as u64, &tol())
                                .unwrap_or_else(|e| panic!("{family} m={m} n={n} dim={dim}: {e}"));
                        assert!(inst.certificate.passed);
                        let pair = OperatorPair::new(inst.t.clone(), inst.s.clone(), family.kind())
                            .unwrap();
                        let cl = classify(&pair, n, 12, inst.conjugation.as_ref(), &tol()).unwrap();
                        assert!(
                            cl.minimal_m.is_some_and(|mm| mm <= m),
                            "{family} m={m} n={n} dim={dim}: {cl:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn quasi_spec_needs_room() {
        let spec = ClassSpec::new(ClassFamily::MIsometry, 3, 1);
        assert!(matches!(
            gen_instance(&spec, 1, 0, &tol()),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn jordan_isometry_orders_are_strict() {
        for k in 1..=3usize {
            let m = 2 * k as u32 - 1;
            for seed in 0..5 {
                let spec = ClassSpec::new(ClassFamily::MIsometry, m, 0);
                let inst = gen_instance(&spec, k + 2, seed, &tol()).unwrap();
                let pair = OperatorPair::adjoint_pair(&inst.s, DKind::Delta).unwrap();
                let cl = classify(&pair, 0, 12, None, &tol()).unwrap();
                assert_eq!(cl.minimal_m, Some(m));
                assert!(cl.strict);
            }
        }
    }
}
