//! The compact symplectic group Sp(N) = {A ∈ U(2N) | J Ā Jᵀ = A}.
//!
//! The Cartan involution Ad(diag(i·1_N, -i·1_N)) splits 𝔰𝔭(N) into
//! 𝔨 ≅ 𝔲(N) (block diagonal diag(U, U*)) and the symmetric off-diagonal
//! part 𝔭. The abelian slice 𝔞 is spanned by the planar generators
//! [e_j]_{k,l} = δ_{k,j}δ_{l,N+j} - δ_{l,j}δ_{k,N+j}; restricted roots are
//! {2α_j} ∪ {α_j ± α_k : j > k} (N² positive roots), the radial region is
//! the ordered box 0 ≤ y₁ ≤ … ≤ y_N ≤ π/2, and M = Z_K(𝔞) ≅ ℤ₂ᴺ consists
//! of the sign matrices diag(ε, ε).
//!
//! The full chart is
//! F(p̃, y, p) = diag(F̃_U(p̃), F̃_U(p̃)*) · exp(Σ yⱼeⱼ) · diag(F_U(p), F_U(p)*)
//! with radial Jacobian J(y) = ∏ sin(2yⱼ) ∏_{i>k} sin(yᵢ-y_k) sin(yᵢ+y_k).

use std::f64::consts::PI;
use std::sync::Arc;

use num_rational::Rational64;

use crate::chart::EulerChart;
use crate::kak::{
    split_by_involution, AffineConstraint, CartanData, GroupSpec, KakChart, RegionSpec,
    RootFunctional,
};
use crate::linalg::{self, ci, cr, zeros, CMat, MatrixPredicate};
use crate::sun::{build_u_n, build_u_n_mod_z2n, SuNBasis};
use crate::{Error, Result};

/// The 𝔞-basis element e_j (0-indexed j), a rotation generator in the
/// (j, N+j) plane with integer entries.
pub fn e_basis_element(n: usize, j: usize) -> CMat {
    let mut m = zeros(2 * n);
    m[(j, n + j)] = cr(1.0);
    m[(n + j, j)] = cr(-1.0);
    m
}

/// Embed an N×N matrix as diag(u, u*) in 2N×2N.
pub fn embed_k(u: &CMat) -> CMat {
    let n = u.nrows();
    let mut out = zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = u[(i, j)];
            out[(n + i, n + j)] = u[(i, j)].conj();
        }
    }
    out
}

/// Ordered basis of 𝔰𝔭(N): the N² block-diagonal 𝔨 elements diag(λ, λ*)
/// followed by the N(N+1) off-diagonal 𝔭 elements (real-symmetric and
/// i-symmetric top-right blocks).
pub fn sp_algebra_basis(n: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(2 * n * n + n);
    let un = SuNBasis::new(n);
    for idx in 0..n * n {
        basis.push(embed_k(un.lambda(idx)));
    }
    // p-part: A = S and A = iS with S running over the symmetric basis
    for a in 0..n {
        for b in a..n {
            let mut s = zeros(n);
            s[(a, b)] = cr(1.0);
            s[(b, a)] = cr(1.0);
            for im in [false, true] {
                let block = if im { &s * ci(1.0) } else { s.clone() };
                let mut x = zeros(2 * n);
                for i in 0..n {
                    for j in 0..n {
                        x[(i, n + j)] = block[(i, j)];
                        // bottom-left is -A†
                        x[(n + i, j)] = -block[(j, i)].conj();
                    }
                }
                basis.push(x);
            }
        }
    }
    basis
}

/// GroupSpec for Sp(N); the invariant bilinear form is 4·Tr(XY).
pub fn sp_group(n: usize) -> Arc<GroupSpec> {
    Arc::new(GroupSpec {
        name: format!("Sp({n})"),
        matrix_dim: 2 * n,
        algebra_basis: sp_algebra_basis(n),
        trace_form_scale: 4.0,
        membership: MatrixPredicate::symplectic(n),
    })
}

/// GroupSpec for K ⊂ Sp(N), the diag(U, U*) copy of U(N). Membership also
/// requires the off-diagonal blocks to vanish.
pub fn sp_k_group(n: usize) -> Arc<GroupSpec> {
    let un = SuNBasis::new(n);
    let basis: Vec<CMat> = (0..n * n).map(|i| embed_k(un.lambda(i))).collect();
    let sym = MatrixPredicate::symplectic(n);
    let residual = Arc::new(move |a: &CMat| {
        let m = a.nrows() / 2;
        let mut off: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                off = off.max(a[(i, m + j)].norm()).max(a[(m + i, j)].norm());
            }
        }
        sym.residual(a).max(off)
    });
    Arc::new(GroupSpec {
        name: format!("K(Sp({n}))"),
        matrix_dim: 2 * n,
        algebra_basis: basis,
        trace_form_scale: 4.0,
        membership: MatrixPredicate::custom("block-diag unitary", residual, 1e-12),
    })
}

/// Positive restricted roots {2α_j} ∪ {α_j ± α_k, j > k} as rational
/// coordinate vectors (N² roots).
pub fn positive_roots_sp_n(n: usize) -> Vec<RootFunctional> {
    let mut roots = Vec::new();
    for j in 0..n {
        let mut c = vec![0i64; n];
        c[j] = 2;
        roots.push(RootFunctional::from_integers(&c));
    }
    for j in 1..n {
        for k in 0..j {
            for sign in [-1i64, 1] {
                let mut c = vec![0i64; n];
                c[j] = 1;
                c[k] = sign;
                roots.push(RootFunctional::from_integers(&c));
            }
        }
    }
    roots
}

/// The radial region 𝒜 = {0 ≤ y₁ ≤ … ≤ y_N ≤ π/2}.
pub fn region_sp_n(n: usize) -> RegionSpec {
    let q = |num: i64, den: i64| Rational64::new(num, den);
    let mut constraints = Vec::new();
    for j in 0..n {
        // -y_j ≤ 0
        let mut c = vec![q(0, 1); n];
        c[j] = q(-1, 1);
        constraints.push(AffineConstraint { coeffs: c, rhs_pi: q(0, 1) });
        // y_j ≤ π/2
        let mut c = vec![q(0, 1); n];
        c[j] = q(1, 1);
        constraints.push(AffineConstraint { coeffs: c, rhs_pi: q(1, 2) });
    }
    for i in 0..n.saturating_sub(1) {
        // y_i - y_{i+1} ≤ 0
        let mut c = vec![q(0, 1); n];
        c[i] = q(1, 1);
        c[i + 1] = q(-1, 1);
        constraints.push(AffineConstraint { coeffs: c, rhs_pi: q(0, 1) });
    }
    RegionSpec { dim: n, constraints, bbox: vec![(0.0, PI / 2.0); n] }
}

/// All 2^N sign matrices diag(ε₁,…,ε_N,ε₁,…,ε_N).
pub fn m_group_sp_n(n: usize) -> Result<Vec<CMat>> {
    if n > 20 {
        return Err(Error::SizeGuard(format!("2^{n} sign matrices is above the guard")));
    }
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let mut m = zeros(2 * n);
        for j in 0..n {
            let eps = if mask & (1 << j) != 0 { -1.0 } else { 1.0 };
            m[(j, j)] = cr(eps);
            m[(n + j, n + j)] = cr(eps);
        }
        out.push(m);
    }
    Ok(out)
}

/// Closed-form radial Jacobian
/// J(y) = ∏_j sin(2y_j) · ∏_{i>k} sin(y_i - y_k) sin(y_i + y_k).
pub fn jacobian_sp_n(y: &[f64]) -> f64 {
    let n = y.len();
    let mut j = 1.0;
    for &v in y {
        j *= (2.0 * v).sin();
    }
    for i in 1..n {
        for k in 0..i {
            j *= (y[i] - y[k]).sin() * (y[i] + y[k]).sin();
        }
    }
    j
}

/// Exact A-fiber exponential exp(Σ yⱼeⱼ): planar rotations with cos y_j on
/// the diagonal and ±sin y_j in the (j, N+j) positions.
pub fn radial_exp_sp_n(n: usize, y: &[f64]) -> CMat {
    let mut m = zeros(2 * n);
    for j in 0..n {
        let (s, c) = y[j].sin_cos();
        m[(j, j)] = cr(c);
        m[(n + j, n + j)] = cr(c);
        m[(j, n + j)] = cr(s);
        m[(n + j, j)] = cr(-s);
    }
    m
}

/// Map the unit cube onto the ordered simplex-box 𝒜 by nested scaling
/// y_j = (π/2)·u_j·u_{j+1}⋯u_N, with its volume Jacobian.
pub fn radial_map_sp_n(n: usize, u: &[f64]) -> (Vec<f64>, f64) {
    let mut y = vec![0.0; n];
    let mut acc = PI / 2.0;
    let mut jac = 1.0;
    for j in (0..n).rev() {
        // ∂y_j/∂u_j is the current accumulated prefix
        jac *= acc;
        acc *= u[j];
        y[j] = acc;
    }
    (y, jac)
}

/// Everything Sp(N)-specific bundled: group, Cartan data, and the charts.
pub struct SpNContext {
    pub n: usize,
    pub j_form: CMat,
    pub group: Arc<GroupSpec>,
    pub cartan: Arc<CartanData>,
}

impl SpNContext {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("Sp(0) is not a group here".into()));
        }
        let group = sp_group(n);
        // theta = Ad(diag(i 1_N, -i 1_N))
        let mut t = zeros(2 * n);
        for j in 0..n {
            t[(j, j)] = ci(1.0);
            t[(n + j, n + j)] = ci(-1.0);
        }
        let (k_basis, p_basis) = split_by_involution(&group, &t)?;
        let a_basis: Vec<CMat> = (0..n).map(|j| e_basis_element(n, j)).collect();
        let cartan = Arc::new(CartanData {
            theta: t,
            k_basis,
            p_basis,
            a_basis,
            positive_roots: positive_roots_sp_n(n),
            region: region_sp_n(n),
            m_group: m_group_sp_n(n)?,
        });
        Ok(Self { n, j_form: linalg::symplectic_form(n), group, cartan })
    }

    /// The chart in split (K/M)·A·K form.
    pub fn kak_chart(&self) -> Result<KakChart> {
        let n = self.n;
        let km = embed_un_chart(build_u_n_mod_z2n(n)?, n, true)?;
        let k = embed_un_chart(build_u_n(n)?, n, false)?;
        let radial_exp = Arc::new(move |y: &[f64]| radial_exp_sp_n(n, y));
        let radial_jacobian = Arc::new(move |y: &[f64]| jacobian_sp_n(y));
        let radial_map = Arc::new(move |u: &[f64]| radial_map_sp_n(n, u));
        Ok(KakChart {
            name: format!("F_Sp({n})"),
            km_chart: km,
            k_chart: k,
            cartan: Arc::clone(&self.cartan),
            radial_exp,
            radial_jacobian,
            radial_map,
            group: Arc::clone(&self.group),
        })
    }

    /// The flat chart F_Sp(N) (tilde block ∥ y block ∥ plain block).
    pub fn chart(&self) -> Result<EulerChart> {
        Ok(self.kak_chart()?.full_chart())
    }
}

/// Lift a U(N) chart to the diag(U, U*) copy of K inside Sp(N).
fn embed_un_chart(chart: EulerChart, n: usize, tilde: bool) -> Result<EulerChart> {
    let group = sp_k_group(n);
    let name = if tilde {
        format!("K/M(Sp({n}))")
    } else {
        format!("K(Sp({n}))")
    };
    let inner = chart.clone();
    let eval = Arc::new(move |p: &[f64]| embed_k(&inner.evaluate(p)));
    let weight_src = chart.clone();
    let weight = Arc::new(move |p: &[f64]| weight_src.jacobian_weight(p));
    Ok(EulerChart::new(name, chart.params.clone(), group, eval, weight))
}
