//! The exceptional group G₂ in its 7×7 orthogonal realization.
//!
//! G₂ acts as the automorphism group of the octonions; its Lie algebra is
//! the derivation algebra, spanned by the fourteen real skew-symmetric
//! generators λ₁…λ₁₄ below. The involution θ = Ad(diag(1₃, -1₄)) fixes
//! 𝔨 = span(λ₁,λ₂,λ₃,λ₈,λ₉,λ₁₀) ≅ 𝔰𝔲(2) ⊕ 𝔰𝔲(2) with K ≅ SO(4), and the
//! slice 𝔞 = span(λ₅, λ₁₁) is maximal abelian in 𝔭.
//!
//! On the coordinates (y₁, y₂) of H = y₁λ₅ + y₂λ₁₁ the simple restricted
//! roots are α = (0,2) and β = (1,-3); the positive system
//! {α, β, α+β, 2α+β, 3α+β, 3α+2β} yields the radial density
//!
//! J(y₁,y₂) = sin(y₁-3y₂) sin(y₁-y₂) sin(y₁+y₂) sin(y₁+3y₂) sin(2y₁) sin(2y₂)
//!
//! on 𝒜 = {0 ≤ yᵢ ≤ π/2, y₂ ≤ y₁/3}, and M = Z_K(𝔞) = {1, σ, η, ση}.
//!
//! Group membership is tested by Ad-invariance of the 14-dimensional
//! subspace (plus SO(7) membership): octonion multiplication conventions
//! never enter.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::chart::{ChartParam, EulerChart};
use crate::kak::{
    split_by_involution, AffineConstraint, CartanData, GroupSpec, KakChart, RegionSpec,
    RootFunctional,
};
use crate::linalg::{
    self, cr, eye, from_real_triplets, fro_norm, frobenius_inner, zeros, CMat,
    MatrixPredicate, OneParam,
};
use crate::{Error, Result};

/// The fourteen generators of 𝔤₂ ⊂ 𝔰𝔬(7), 1-indexed entries (row, col, value).
#[rustfmt::skip]
fn lambda_entries() -> [&'static [(usize, usize, f64)]; 14] {
    [
        &[(4,7,-1.0), (5,6,-1.0), (6,5,1.0), (7,4,1.0)],
        &[(4,6,1.0), (5,7,-1.0), (6,4,-1.0), (7,5,1.0)],
        &[(4,5,-1.0), (5,4,1.0), (6,7,-1.0), (7,6,1.0)],
        &[(2,7,1.0), (3,6,1.0), (6,3,-1.0), (7,2,-1.0)],
        &[(2,6,-1.0), (3,7,1.0), (6,2,1.0), (7,3,-1.0)],
        &[(2,5,1.0), (3,4,-1.0), (4,3,1.0), (5,2,-1.0)],
        &[(2,4,-1.0), (3,5,-1.0), (4,2,1.0), (5,3,1.0)],
        &[(2,3,-2.0), (3,2,2.0), (4,5,1.0), (5,4,-1.0), (6,7,-1.0), (7,6,1.0)],
        &[(1,2,-2.0), (2,1,2.0), (4,7,1.0), (5,6,-1.0), (6,5,1.0), (7,4,-1.0)],
        &[(1,3,-2.0), (3,1,2.0), (4,6,-1.0), (5,7,-1.0), (6,4,1.0), (7,5,1.0)],
        &[(1,4,-2.0), (2,7,-1.0), (3,6,1.0), (4,1,2.0), (6,3,-1.0), (7,2,1.0)],
        &[(1,5,-2.0), (2,6,1.0), (3,7,1.0), (5,1,2.0), (6,2,-1.0), (7,3,-1.0)],
        &[(1,6,-2.0), (2,5,-1.0), (3,4,-1.0), (4,3,1.0), (5,2,1.0), (6,1,2.0)],
        &[(1,7,-2.0), (2,4,1.0), (3,5,-1.0), (4,2,-1.0), (5,3,1.0), (7,1,2.0)],
    ]
}

/// λ_j for j = 1..=14.
pub fn lambda(j: usize) -> CMat {
    assert!((1..=14).contains(&j), "lambda index out of range");
    let entries: Vec<(usize, usize, f64)> = lambda_entries()[j - 1]
        .iter()
        .map(|&(r, c, v)| (r - 1, c - 1, v))
        .collect();
    from_real_triplets(7, &entries)
}

/// All fourteen generators in order.
pub fn algebra_basis() -> Vec<CMat> {
    (1..=14).map(lambda).collect()
}

/// σ = diag(1,-1,-1,1,1,-1,-1) ∈ M.
pub fn sigma() -> CMat {
    from_real_triplets(
        7,
        &[
            (0, 0, 1.0),
            (1, 1, -1.0),
            (2, 2, -1.0),
            (3, 3, 1.0),
            (4, 4, 1.0),
            (5, 5, -1.0),
            (6, 6, -1.0),
        ],
    )
}

/// η, the involutive permutation-sign element of M.
pub fn eta() -> CMat {
    from_real_triplets(
        7,
        &[
            (0, 0, -1.0),
            (1, 2, 1.0),
            (2, 1, 1.0),
            (3, 3, -1.0),
            (4, 4, 1.0),
            (5, 6, -1.0),
            (6, 5, -1.0),
        ],
    )
}

/// Indices (1-based λ subscripts) of the 𝔨 part.
pub const K_INDICES: [usize; 6] = [1, 2, 3, 8, 9, 10];
/// Indices of the 𝔭 part.
pub const P_INDICES: [usize; 8] = [4, 5, 6, 7, 11, 12, 13, 14];
/// The ordered complement basis {λ₁..λ₄, λ₆..λ₁₀, λ₁₂..λ₁₄} carrying the
/// ad-action of 𝔞.
pub const COMPLEMENT_INDICES: [usize; 12] = [1, 2, 3, 4, 6, 7, 8, 9, 10, 12, 13, 14];

/// Positive restricted roots on the (λ₅, λ₁₁) coordinates.
pub fn positive_roots_g2() -> Vec<RootFunctional> {
    [(0i64, 2i64), (1, -3), (1, -1), (1, 1), (1, 3), (2, 0)]
        .iter()
        .map(|&(a, b)| RootFunctional::from_integers(&[a, b]))
        .collect()
}

/// 𝒜 = {0 ≤ yᵢ ≤ π/2, y₂ ≤ y₁/3}.
pub fn region_g2() -> RegionSpec {
    let q = Rational64::new;
    let constraints = vec![
        AffineConstraint { coeffs: vec![q(-1, 1), q(0, 1)], rhs_pi: q(0, 1) },
        AffineConstraint { coeffs: vec![q(1, 1), q(0, 1)], rhs_pi: q(1, 2) },
        AffineConstraint { coeffs: vec![q(0, 1), q(-1, 1)], rhs_pi: q(0, 1) },
        AffineConstraint { coeffs: vec![q(0, 1), q(1, 1)], rhs_pi: q(1, 2) },
        // y2 - y1/3 ≤ 0
        AffineConstraint { coeffs: vec![q(-1, 3), q(1, 1)], rhs_pi: q(0, 1) },
    ];
    // y2 ≤ y1/3 ≤ π/6 bounds the sampling box
    RegionSpec {
        dim: 2,
        constraints,
        bbox: vec![(0.0, PI / 2.0), (0.0, PI / 6.0)],
    }
}

/// Closed-form radial Jacobian (six distinct sine factors).
pub fn jacobian_g2(y1: f64, y2: f64) -> f64 {
    (y1 - 3.0 * y2).sin()
        * (y1 - y2).sin()
        * (y1 + y2).sin()
        * (y1 + 3.0 * y2).sin()
        * (2.0 * y1).sin()
        * (2.0 * y2).sin()
}

/// Map the unit square onto 𝒜: y₁ = (π/2)u₁, y₂ = (y₁/3)u₂.
pub fn radial_map_g2(u: &[f64]) -> (Vec<f64>, f64) {
    let y1 = 0.5 * PI * u[0];
    let y2 = (y1 / 3.0) * u[1];
    (vec![y1, y2], 0.5 * PI * (y1 / 3.0))
}

/// The twelve root spaces as (root, spanning vector) pairs. The vectors
/// satisfy ad(H)v = i·(root·y)·v exactly; three misprints in the published
/// table (a label swap between the ±α and ±(3α+2β) rows, a missing i on
/// the λ₁₀ coefficient of the ±β rows, and λ₁₂ for λ₁₃ in the ±(2α+β)
/// rows) are corrected here, arbitrated by the eigen-equations against the
/// ad matrices.
pub fn root_spaces() -> Vec<(RootFunctional, CMat)> {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let combo = |terms: &[(usize, Complex64)]| -> CMat {
        let mut m = zeros(7);
        for &(idx, c) in terms {
            m += lambda(idx) * c;
        }
        m
    };
    let mut out = Vec::new();
    let mut push = |a: i64, b: i64, terms: &[(usize, Complex64)]| {
        out.push((RootFunctional::from_integers(&[a, b]), combo(terms)));
    };
    // ±α
    push(0, 2, &[(3, -3.0 * i), (8, i), (12, 2.0 * one)]);
    push(0, -2, &[(3, 3.0 * i), (8, -i), (12, 2.0 * one)]);
    // ±β
    push(1, -3, &[
        (1, i), (2, i), (6, -one), (7, -one), (9, -i), (10, -i), (13, -one), (14, one),
    ]);
    push(-1, 3, &[
        (1, -i), (2, -i), (6, -one), (7, -one), (9, i), (10, i), (13, -one), (14, one),
    ]);
    // ±(α+β)
    push(1, -1, &[
        (1, 3.0 * i), (2, -3.0 * i), (6, -3.0 * one), (7, 3.0 * one),
        (9, i), (10, -i), (13, one), (14, one),
    ]);
    push(-1, 1, &[
        (1, -3.0 * i), (2, 3.0 * i), (6, -3.0 * one), (7, 3.0 * one),
        (9, -i), (10, i), (13, one), (14, one),
    ]);
    // ±(2α+β)
    push(1, 1, &[
        (1, -3.0 * i), (2, -3.0 * i), (6, 3.0 * one), (7, 3.0 * one),
        (9, -i), (10, -i), (13, -one), (14, one),
    ]);
    push(-1, -1, &[
        (1, 3.0 * i), (2, 3.0 * i), (6, 3.0 * one), (7, 3.0 * one),
        (9, i), (10, i), (13, -one), (14, one),
    ]);
    // ±(3α+β)
    push(1, 3, &[
        (1, -i), (2, i), (6, one), (7, -one), (9, i), (10, -i), (13, one), (14, one),
    ]);
    push(-1, -3, &[
        (1, i), (2, -i), (6, one), (7, -one), (9, -i), (10, i), (13, one), (14, one),
    ]);
    // ±(3α+2β)
    push(2, 0, &[(3, one), (4, -2.0 * i), (8, one)]);
    push(-2, 0, &[(3, one), (4, 2.0 * i), (8, one)]);
    out
}

/// The tabulated integer matrix of ad(λ₅) on the complement basis.
#[rustfmt::skip]
pub fn tabulated_ad_lambda5() -> [[i64; 12]; 12] {
    [
        [0,0,0,0,1,0,0,0,0,0,0,0],
        [0,0,0,0,0,1,0,0,0,0,0,0],
        [0,0,0,-1,0,0,0,0,0,0,0,0],
        [0,0,1,0,0,0,3,0,0,0,0,0],
        [-1,0,0,0,0,0,0,0,0,0,0,0],
        [0,-1,0,0,0,0,0,0,0,0,0,0],
        [0,0,0,-1,0,0,0,0,0,0,0,0],
        [0,0,0,0,0,0,0,0,0,0,-1,0],
        [0,0,0,0,0,0,0,0,0,0,0,1],
        [0,0,0,0,0,0,0,0,0,0,0,0],
        [0,0,0,0,0,0,0,1,0,0,0,0],
        [0,0,0,0,0,0,0,0,-1,0,0,0],
    ]
}

/// The tabulated integer matrix of ad(λ₁₁) on the complement basis.
#[rustfmt::skip]
pub fn tabulated_ad_lambda11() -> [[i64; 12]; 12] {
    [
        [0,0,0,0,0,0,0,0,0,0,0,3],
        [0,0,0,0,0,0,0,0,0,0,-3,0],
        [0,0,0,0,0,0,0,0,0,3,0,0],
        [0,0,0,0,0,0,0,0,0,0,0,0],
        [0,0,0,0,0,0,0,0,-3,0,0,0],
        [0,0,0,0,0,0,0,-3,0,0,0,0],
        [0,0,0,0,0,0,0,0,0,-1,0,0],
        [0,0,0,0,0,1,0,0,0,0,0,-2],
        [0,0,0,0,1,0,0,0,0,0,2,0],
        [0,0,-1,0,0,0,1,0,0,0,0,0],
        [0,1,0,0,0,0,0,0,-2,0,0,0],
        [-1,0,0,0,0,0,0,2,0,0,0,0],
    ]
}

/// The reference ± restricted-root system on (λ₅, λ₁₁) coordinates.
pub fn root_system_coords() -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for (a, b) in [(0i64, 2i64), (1, -3), (1, -1), (1, 1), (1, 3), (2, 0)] {
        out.push((a, b));
        out.push((-a, -b));
    }
    out
}

/// GroupSpec for G₂: SO(7) membership plus Ad-invariance of the algebra
/// span, which is the convention-free membership test.
pub fn g2_group() -> Arc<GroupSpec> {
    let basis = algebra_basis();
    let invariance = subspace_invariance_residual(basis.clone());
    let orthogonal = MatrixPredicate::orthogonal();
    let residual = Arc::new(move |a: &CMat| {
        if a.nrows() != 7 {
            return f64::INFINITY;
        }
        let det = a.clone().lu().determinant();
        let det_defect = (det - Complex64::new(1.0, 0.0)).norm();
        orthogonal
            .residual(a)
            .max(det_defect)
            .max(invariance(a))
    });
    Arc::new(GroupSpec {
        name: "G2".into(),
        matrix_dim: 7,
        algebra_basis: basis,
        trace_form_scale: 1.0,
        membership: MatrixPredicate::custom("SO(7) + Ad-invariance of g2", residual, 1e-10),
    })
}

/// Largest off-span component of Ad(a)·λ_j over the basis, as a closure.
fn subspace_invariance_residual(basis: Vec<CMat>) -> impl Fn(&CMat) -> f64 {
    let d = basis.len();
    let gram = DMatrix::<f64>::from_fn(d, d, |i, j| frobenius_inner(&basis[i], &basis[j]));
    let chol = gram.cholesky().expect("generators are independent");
    move |a: &CMat| {
        let Some(ainv) = a.clone().try_inverse() else {
            return f64::INFINITY;
        };
        let mut worst: f64 = 0.0;
        for b in &basis {
            let conj = a * b * &ainv;
            let rhs = nalgebra::DVector::from_fn(d, |i, _| frobenius_inner(&basis[i], &conj));
            let c = chol.solve(&rhs);
            let mut recon = zeros(7);
            for (i, bi) in basis.iter().enumerate() {
                recon += bi * cr(c[i]);
            }
            worst = worst.max(fro_norm(&(conj - recon)));
        }
        worst
    }
}

/// GroupSpec for K = ⟨e^𝔨⟩ ≅ SO(4): orthogonal and block-diagonal for the
/// 3+4 split (the form the θ-fixed subgroup takes in this realization).
pub fn k_group() -> Arc<GroupSpec> {
    let basis: Vec<CMat> = K_INDICES.iter().map(|&j| lambda(j)).collect();
    let orthogonal = MatrixPredicate::orthogonal();
    let residual = Arc::new(move |a: &CMat| {
        if a.nrows() != 7 {
            return f64::INFINITY;
        }
        let mut off: f64 = 0.0;
        for i in 0..3 {
            for j in 3..7 {
                off = off.max(a[(i, j)].norm()).max(a[(j, i)].norm());
            }
        }
        orthogonal.residual(a).max(off)
    });
    Arc::new(GroupSpec {
        name: "K(G2)".into(),
        matrix_dim: 7,
        algebra_basis: basis,
        trace_form_scale: 1.0,
        membership: MatrixPredicate::custom("SO(7) block-diag(3,4)", residual, 1e-10),
    })
}

fn k_chart_with_domains(name: &str, domains: [(f64, f64); 6], group: Arc<GroupSpec>) -> EulerChart {
    let names = ["phi1", "psi1", "omega1", "phi2", "psi2", "omega2"];
    let params: Vec<ChartParam> = names
        .iter()
        .zip(domains)
        .map(|(n, (lo, hi))| ChartParam::new(*n, lo, hi))
        .collect();
    let gens: Vec<OneParam> = [3, 2, 3, 8, 9, 8]
        .iter()
        .map(|&j| OneParam::new(&lambda(j)).expect("generators are skew"))
        .collect();
    let eval = Arc::new(move |p: &[f64]| {
        let mut g = eye(7);
        for (gen, &t) in gens.iter().zip(p) {
            g = g * gen.at(t);
        }
        g
    });
    let weight = Arc::new(|p: &[f64]| p[1].cos() * p[1].sin() * p[4].cos() * p[4].sin());
    EulerChart::new(name, params, group, eval, weight)
}

/// F_K(φ₁,ψ₁,ω₁,φ₂,ψ₂,ω₂) = e^{φ₁λ₃}e^{ψ₁λ₂}e^{ω₁λ₃}e^{φ₂λ₈}e^{ψ₂λ₉}e^{ω₂λ₈}
/// with density cos ψ₁ sin ψ₁ cos ψ₂ sin ψ₂.
pub fn build_k_chart() -> EulerChart {
    k_chart_with_domains(
        "F_K",
        [
            (0.0, PI),
            (0.0, PI / 2.0),
            (0.0, PI),
            (0.0, PI),
            (0.0, PI / 2.0),
            (0.0, 2.0 * PI),
        ],
        k_group(),
    )
}

/// The K/M chart: same product with ψ̃₁ ∈ [0, π/4] and ω̃₁ ∈ [0, π/2]
/// (quotienting by {1, σ, η, ση} quarters the domain).
pub fn build_k_mod_m_chart() -> EulerChart {
    k_chart_with_domains(
        "F_{K/M}",
        [
            (0.0, PI),
            (0.0, PI / 4.0),
            (0.0, PI / 2.0),
            (0.0, PI),
            (0.0, PI / 2.0),
            (0.0, 2.0 * PI),
        ],
        k_group(),
    )
}

/// Everything G₂-specific bundled.
pub struct G2Context {
    pub group: Arc<GroupSpec>,
    pub k_group: Arc<GroupSpec>,
    pub cartan: Arc<CartanData>,
    pub sigma: CMat,
    pub eta: CMat,
    pub root_spaces: Vec<(RootFunctional, CMat)>,
}

impl G2Context {
    pub fn new() -> Result<Self> {
        let group = g2_group();
        let theta = from_real_triplets(
            7,
            &[
                (0, 0, 1.0),
                (1, 1, 1.0),
                (2, 2, 1.0),
                (3, 3, -1.0),
                (4, 4, -1.0),
                (5, 5, -1.0),
                (6, 6, -1.0),
            ],
        );
        let (k_basis, p_basis) = split_by_involution(&group, &theta)?;
        let s = sigma();
        let e = eta();
        let m_group = vec![eye(7), s.clone(), e.clone(), &s * &e];
        let cartan = Arc::new(CartanData {
            theta,
            k_basis,
            p_basis,
            a_basis: vec![lambda(5), lambda(11)],
            positive_roots: positive_roots_g2(),
            region: region_g2(),
            m_group,
        });
        Ok(Self {
            group,
            k_group: k_group(),
            cartan,
            sigma: s,
            eta: e,
            root_spaces: root_spaces(),
        })
    }

    /// The chart in split (K/M)·A·K form.
    pub fn kak_chart(&self) -> Result<KakChart> {
        let l5 = OneParam::new(&lambda(5))?;
        let l11 = OneParam::new(&lambda(11))?;
        let radial_exp = Arc::new(move |y: &[f64]| l5.at(y[0]) * l11.at(y[1]));
        Ok(KakChart {
            name: "F_G2".into(),
            km_chart: build_k_mod_m_chart(),
            k_chart: build_k_chart(),
            cartan: Arc::clone(&self.cartan),
            radial_exp,
            radial_jacobian: Arc::new(|y: &[f64]| jacobian_g2(y[0], y[1])),
            radial_map: Arc::new(|u: &[f64]| radial_map_g2(u)),
            group: Arc::clone(&self.group),
        })
    }

    /// The flat 14-parameter chart F_G2.
    pub fn chart(&self) -> Result<EulerChart> {
        Ok(self.kak_chart()?.full_chart())
    }
}

/// The matrix of ad(λ₅) or ad(λ₁₁) on the ordered complement basis
/// {λ₁..λ₄, λ₆..λ₁₀, λ₁₂..λ₁₄}: column j holds the least-squares
/// coordinates of [λ_which, b_j]. A residual above 1e-10 would mean the
/// generators fail to close and is reported as an error.
pub fn ad_matrix(which: usize) -> Result<DMatrix<f64>> {
    if which != 5 && which != 11 {
        return Err(Error::Domain(format!(
            "ad matrix is tabulated for the a-basis λ5, λ11 only (got λ{which})"
        )));
    }
    let h = lambda(which);
    let basis: Vec<CMat> = COMPLEMENT_INDICES.iter().map(|&j| lambda(j)).collect();
    let d = basis.len();
    let gram = DMatrix::<f64>::from_fn(d, d, |i, j| frobenius_inner(&basis[i], &basis[j]));
    let chol = gram.cholesky().expect("complement basis independent");
    let mut m = DMatrix::<f64>::zeros(d, d);
    for (jx, b) in basis.iter().enumerate() {
        let br = linalg::bracket(&h, b)?;
        let rhs = nalgebra::DVector::from_fn(d, |i, _| frobenius_inner(&basis[i], &br));
        let c = chol.solve(&rhs);
        let mut recon = zeros(7);
        for (i, bi) in basis.iter().enumerate() {
            recon += bi * cr(c[i]);
        }
        let residual = fro_norm(&(&br - recon));
        if residual > 1e-10 {
            return Err(Error::Closure(format!(
                "[λ{which}, b_{jx}] leaves the complement span (residual {residual:.3e})"
            )));
        }
        for i in 0..d {
            m[(i, jx)] = c[i];
        }
    }
    Ok(m)
}

/// Recover the restricted roots from the commuting pair (ad(λ₅), ad(λ₁₁)):
/// conjugate to the orthonormal complement basis (where both are exactly
/// skew-symmetric), diagonalize a generic Hermitian combination, and read
/// off rational eigenvalue pairs. The result is the full ± root system.
pub fn extract_roots() -> Result<Vec<RootFunctional>> {
    let a5 = ad_matrix(5)?;
    let a11 = ad_matrix(11)?;
    let norms: Vec<f64> = COMPLEMENT_INDICES
        .iter()
        .map(|&j| fro_norm(&lambda(j)))
        .collect();
    let d = a5.nrows();
    let conj = |a: &DMatrix<f64>| {
        DMatrix::<f64>::from_fn(d, d, |i, j| norms[i] * a[(i, j)] / norms[j])
    };
    let s5 = conj(&a5);
    let s11 = conj(&a11);
    for s in [&s5, &s11] {
        let skew_defect = (s + s.transpose()).abs().max();
        if skew_defect > 1e-10 {
            return Err(Error::Structure(format!(
                "ad matrix not skew in the orthonormal basis (defect {skew_defect:.3e})"
            )));
        }
    }
    // Hermitian forms -i·S with real eigenvalues = the root values
    let herm = |s: &DMatrix<f64>| {
        CMat::from_fn(d, d, |i, j| Complex64::new(0.0, -s[(i, j)]))
    };
    let h5 = herm(&s5);
    let h11 = herm(&s11);
    // generic combination separates all twelve simultaneous eigenvalues
    let mu = std::f64::consts::FRAC_1_PI;
    let eig = nalgebra::SymmetricEigen::new(&h5 + &h11 * cr(mu));
    let mut roots = Vec::new();
    for k in 0..d {
        let v = eig.eigenvectors.column(k);
        let rayleigh = |h: &CMat| -> f64 {
            let hv = h * v;
            v.iter()
                .zip(hv.iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
        };
        let a = rayleigh(&h5);
        let b = rayleigh(&h11);
        let round_rational = |x: f64| -> Result<Rational64> {
            let scaled = (x * 12.0).round();
            let r = Rational64::new(scaled as i64, 12);
            if (r.to_f64().unwrap() - x).abs() > 1e-8 {
                return Err(Error::Structure(format!(
                    "eigenvalue {x} is not rational with small denominator"
                )));
            }
            Ok(r)
        };
        let (ra, rb) = (round_rational(a)?, round_rational(b)?);
        // residual check against both ad matrices
        let check = |h: &CMat, val: f64| -> f64 {
            let hv = h * v;
            (0..d)
                .map(|i| (hv[i] - v[i] * cr(val)).norm())
                .fold(0.0, f64::max)
        };
        let res = check(&h5, ra.to_f64().unwrap()).max(check(&h11, rb.to_f64().unwrap()));
        if res > 1e-8 {
            return Err(Error::Structure(format!(
                "simultaneous eigenvector residual {res:.3e} for root ({ra}, {rb})"
            )));
        }
        roots.push(RootFunctional::new(vec![ra, rb]));
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kak::generic_jacobian;
    use crate::linalg::{bracket, expm, max_abs};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn fourteen_independent_generators() {
        let g = G2Context::new().unwrap();
        assert_eq!(g.group.dim(), 14);
        assert!(g.group.gram_min_eigenvalue() > 0.5);
        assert_eq!(g.cartan.k_basis.len(), 6);
        assert_eq!(g.cartan.p_basis.len(), 8);
        assert_eq!(g.cartan.a_basis.len(), 2);
    }

    #[test]
    fn cartan_split_matches_the_printed_spans() {
        let g = G2Context::new().unwrap();
        let k: Vec<usize> = g.cartan.k_basis.iter().map(|&i| i + 1).collect();
        let p: Vec<usize> = g.cartan.p_basis.iter().map(|&i| i + 1).collect();
        assert_eq!(k, K_INDICES.to_vec());
        assert_eq!(p, P_INDICES.to_vec());
    }

    #[test]
    fn bracket_closure_holds() {
        let g = G2Context::new().unwrap();
        assert!(g.group.bracket_closure_residual() <= 1e-10);
    }

    #[test]
    fn lambda5_lambda11_commute_exactly() {
        let b = bracket(&lambda(5), &lambda(11)).unwrap();
        assert_eq!(max_abs(&b), 0.0);
    }

    #[test]
    fn exp_pi_lambda3_is_the_block_sign_matrix() {
        let e = expm(&(lambda(3) * cr(PI))).unwrap();
        let want = from_real_triplets(
            7,
            &[
                (0, 0, 1.0),
                (1, 1, 1.0),
                (2, 2, 1.0),
                (3, 3, -1.0),
                (4, 4, -1.0),
                (5, 5, -1.0),
                (6, 6, -1.0),
            ],
        );
        assert!(max_abs(&(e - want)) <= 1e-13);
    }

    #[test]
    fn bracket_lambda5_lambda11_zero_is_printed_fact() {
        // also [λ5, λ11] = 0 via the naive triple-loop route
        let (a, b) = (lambda(5), lambda(11));
        let mut slow = zeros(7);
        for i in 0..7 {
            for j in 0..7 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..7 {
                    acc += a[(i, k)] * b[(k, j)] - b[(i, k)] * a[(k, j)];
                }
                slow[(i, j)] = acc;
            }
        }
        assert_eq!(max_abs(&slow), 0.0);
    }

    #[test]
    fn m_group_properties() {
        let g = G2Context::new().unwrap();
        let s = &g.sigma;
        let e = &g.eta;
        assert_eq!(max_abs(&(s * s - eye(7))), 0.0);
        assert_eq!(max_abs(&(e * e - eye(7))), 0.0);
        assert_eq!(max_abs(&(s * e - e * s)), 0.0);
        assert_eq!(g.cartan.m_group.len(), 4);
        assert_eq!(g.cartan.m_closure_defect(), 0.0);
        assert_eq!(g.cartan.m_centralizes_a_defect(), 0.0);
        // distinct elements
        let mut seen = HashSet::new();
        for m in &g.cartan.m_group {
            let key: Vec<i64> = m.iter().map(|z| z.re.round() as i64).collect();
            assert!(seen.insert(key));
        }
    }

    #[test]
    fn sigma_and_eta_lie_in_k() {
        let g = G2Context::new().unwrap();
        // σ = e^{(π/2)λ3} e^{(π/2)λ8}
        let s = expm(&(lambda(3) * cr(PI / 2.0))).unwrap()
            * expm(&(lambda(8) * cr(PI / 2.0))).unwrap();
        assert!(max_abs(&(&s - &g.sigma)) <= 1e-13);
        // η from the printed coset relation at the identity
        let e = expm(&(lambda(3) * cr(PI / 2.0))).unwrap()
            * expm(&(lambda(2) * cr(PI / 2.0))).unwrap()
            * expm(&(lambda(3) * cr(PI / 4.0))).unwrap()
            * expm(&(lambda(8) * cr(PI / 2.0))).unwrap()
            * expm(&(lambda(9) * cr(PI / 2.0))).unwrap()
            * expm(&(lambda(8) * cr(3.0 * PI / 4.0))).unwrap();
        assert!(max_abs(&(&e - &g.eta)) <= 1e-13);
        for m in &g.cartan.m_group {
            assert!(g.k_group.membership.check(m).ok);
        }
    }

    #[test]
    fn ad_matrices_match_tabulated_integers_entrywise() {
        for (which, table) in [(5usize, tabulated_ad_lambda5()), (11, tabulated_ad_lambda11())] {
            let m = ad_matrix(which).unwrap();
            for i in 0..12 {
                for j in 0..12 {
                    assert!(
                        (m[(i, j)] - table[i][j] as f64).abs() <= 1e-12,
                        "ad(λ{which})[{i}][{j}] = {} expected {}",
                        m[(i, j)],
                        table[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn ad_matrices_commute() {
        let a5 = ad_matrix(5).unwrap();
        let a11 = ad_matrix(11).unwrap();
        let comm = &a5 * &a11 - &a11 * &a5;
        assert!(comm.abs().max() <= 1e-12);
    }

    #[test]
    fn extracted_roots_are_the_plus_minus_system() {
        let roots = extract_roots().unwrap();
        assert_eq!(roots.len(), 12);
        let to_pair = |r: &RootFunctional| {
            (
                (*r.coords[0].numer(), *r.coords[0].denom()),
                (*r.coords[1].numer(), *r.coords[1].denom()),
            )
        };
        let got: HashSet<_> = roots.iter().map(to_pair).collect();
        let want: HashSet<_> = root_system_coords()
            .into_iter()
            .map(|(a, b)| ((a, 1i64), (b, 1i64)))
            .collect();
        assert_eq!(got, want);
        // closed under negation by construction of `want`
        for r in &roots {
            assert!(got.contains(&to_pair(&r.negated())));
        }
    }

    #[test]
    fn root_space_vectors_satisfy_their_eigen_equations() {
        for (root, v) in root_spaces() {
            let scale = fro_norm(&v);
            for (h, coord) in [(lambda(5), root.coords[0]), (lambda(11), root.coords[1])] {
                let ad = bracket(&h, &v).unwrap();
                let want = &v * Complex64::new(0.0, coord.to_f64().unwrap());
                assert!(
                    fro_norm(&(ad - want)) / scale <= 1e-10,
                    "root {:?} fails its eigen-equation",
                    root.coords
                );
            }
        }
    }

    #[test]
    fn k_chart_basics() {
        let c = build_k_chart();
        assert!(c.identity_at_origin_defect() <= 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let p = c.sample_interior(&mut rng, 0.0);
            let r = c.group.membership.check(&c.evaluate(&p));
            assert!(r.ok, "K membership residual {:.3e}", r.residual);
        }
    }

    #[test]
    fn k_chart_factor_blocks_commute() {
        let c = build_k_chart();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let p = c.sample_interior(&mut rng, 0.0);
        let gens: Vec<CMat> = [3usize, 2, 3, 8, 9, 8].iter().map(|&j| lambda(j)).collect();
        let e = |j: usize, t: f64| expm(&(&gens[j] * cr(t))).unwrap();
        let swapped = e(3, p[3]) * e(4, p[4]) * e(5, p[5]) * e(0, p[0]) * e(1, p[1]) * e(2, p[2]);
        assert!(max_abs(&(c.evaluate(&p) - swapped)) <= 1e-13);
    }

    #[test]
    fn k_mod_m_coset_shifts() {
        let g = G2Context::new().unwrap();
        let c = build_k_chart();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let p = c.sample_interior(&mut rng, 0.02);
            let base = c.evaluate(&p);
            // right-multiplying by σ shifts (ω1, ω2) by (π/2, π/2)
            let ps = [p[0], p[1], p[2] + PI / 2.0, p[3], p[4], p[5] + PI / 2.0];
            assert!(max_abs(&(&base * &g.sigma - c.evaluate(&ps))) <= 1e-12);
            // right-multiplying by η follows the reflected shift
            let pe = [
                p[0] + PI / 2.0,
                PI / 2.0 - p[1],
                PI / 4.0 - p[2],
                p[3] + PI / 2.0,
                PI / 2.0 - p[4],
                3.0 * PI / 4.0 - p[5],
            ];
            assert!(max_abs(&(&base * &g.eta - c.evaluate(&pe))) <= 1e-12);
        }
    }

    #[test]
    fn k_mod_m_chart_volume_is_one_quarter() {
        let full = build_k_chart();
        let red = build_k_mod_m_chart();
        let vol = |c: &EulerChart| -> f64 { c.params.iter().map(|p| p.hi - p.lo).product() };
        assert!((vol(&red) / vol(&full) - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn g2_chart_at_origin_and_membership() {
        let g = G2Context::new().unwrap();
        let chart = g.chart().unwrap();
        assert_eq!(chart.dim(), 14);
        assert!(chart.identity_at_origin_defect() <= 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..25 {
            let p = chart.sample_interior(&mut rng, 0.0);
            let gm = chart.evaluate(&p);
            let r = g.group.membership.check(&gm);
            assert!(r.ok, "G2 membership residual {:.3e}", r.residual);
        }
    }

    #[test]
    fn g2_chart_region_error() {
        let g = G2Context::new().unwrap();
        let chart = g.chart().unwrap();
        let mut p = vec![0.1; 14];
        p[6] = 0.3;
        p[7] = 0.2; // violates y2 ≤ y1/3
        assert!(matches!(chart.evaluate_checked(&p), Err(Error::Region(_))));
    }

    #[test]
    fn jacobian_boundary_zero_and_generic_agreement() {
        // y2 = y1/3 kills sin(y1 - 3y2)
        assert!(jacobian_g2(PI / 4.0, PI / 12.0).abs() <= 1e-15);
        let g = G2Context::new().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..300 {
            let y = g.cartan.region.sample_interior(&mut rng, 0.0);
            let a = jacobian_g2(y[0], y[1]);
            let b = generic_jacobian(&g.cartan, &y);
            assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
            assert!(a >= 0.0, "jacobian negative inside the region at {y:?}");
        }
    }
}
