//! Generators of 𝔲(N) and the recursive Euler charts of SU(N), U(N) and
//! U(N)/ℤ₂ᴺ.
//!
//! The generator conventions: λ₀ has a single i in the (1,1) slot; for
//! j = 1..N-1 and k = 1..2j the element λ_{j²-1+k} couples row ⌈k/2⌉ with
//! row j+1 (i-symmetric for odd k, real-antisymmetric for even k), and
//! λ_{(j+1)²-1} = diag(i·1_j, -i·j, 0, …). The λ_j with j ≥ 1 are i times
//! the usual Gell-Mann-style matrices and span 𝔰𝔲(N).
//!
//! The chart is the recursive product
//!
//! ```text
//! F_SU(N) = A(2)(φ1,ψ1) ⋯ A(N)(φ_{N-1},ψ_{N-1}) · diag(F_SU(N-1), 1) · exp(λ_{N²-1} ω_{N-1})
//! ```
//!
//! with A(k)(x,y) = exp(λ₃x)·exp(λ_{(k-1)²+1}y), φ-domains [0,π] for the
//! first angle of each recursion level and [0,2π] otherwise, ψ ∈ [0,π/2]
//! and ω_j ∈ [0, 2π/j]. U(N) appends exp(ξλ₀); the ℤ₂ᴺ quotient chart
//! halves every ω_j range and ξ.

use std::sync::Arc;

use crate::chart::{ChartParam, EulerChart};
use crate::kak::{numeric_density_oracle_with_basis, GroupSpec};
use crate::linalg::{ci, eye, zeros, CMat, MatrixPredicate, OneParam};
use crate::{Error, Result};

use std::f64::consts::PI;

/// The ordered generators λ₀ … λ_{N²-1} of 𝔲(N).
#[derive(Clone, Debug)]
pub struct SuNBasis {
    pub n: usize,
    lambdas: Vec<CMat>,
}

impl SuNBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut lambdas = Vec::with_capacity(n * n);
        // index 0
        let mut l0 = zeros(n);
        l0[(0, 0)] = ci(1.0);
        lambdas.push(l0);
        for j in 1..n {
            for k in 1..=2 * j {
                let mut m = zeros(n);
                if k % 2 == 1 {
                    let mu = k.div_ceil(2) - 1;
                    m[(mu, j)] = ci(1.0);
                    m[(j, mu)] = ci(1.0);
                } else {
                    let mu = k / 2 - 1;
                    m[(mu, j)] = crate::linalg::cr(1.0);
                    m[(j, mu)] = crate::linalg::cr(-1.0);
                }
                lambdas.push(m);
            }
            // diagonal element λ_{(j+1)²-1}
            let mut d = zeros(n);
            for t in 0..j {
                d[(t, t)] = ci(1.0);
            }
            d[(j, j)] = ci(-(j as f64));
            lambdas.push(d);
        }
        debug_assert_eq!(lambdas.len(), n * n);
        Self { n, lambdas }
    }

    pub fn lambda(&self, idx: usize) -> &CMat {
        &self.lambdas[idx]
    }

    /// λ₁ … λ_{N²-1} (the traceless part, a basis of 𝔰𝔲(N)).
    pub fn su_basis(&self) -> Vec<CMat> {
        self.lambdas[1..].to_vec()
    }

    /// All of λ₀ … λ_{N²-1} (a basis of 𝔲(N)).
    pub fn u_basis(&self) -> Vec<CMat> {
        self.lambdas.clone()
    }
}

/// GroupSpec for SU(N).
pub fn su_group(n: usize) -> Arc<GroupSpec> {
    Arc::new(GroupSpec {
        name: format!("SU({n})"),
        matrix_dim: n,
        algebra_basis: SuNBasis::new(n).su_basis(),
        trace_form_scale: 1.0,
        membership: MatrixPredicate::special_unitary(),
    })
}

/// GroupSpec for U(N).
pub fn u_group(n: usize) -> Arc<GroupSpec> {
    Arc::new(GroupSpec {
        name: format!("U({n})"),
        matrix_dim: n,
        algebra_basis: SuNBasis::new(n).u_basis(),
        trace_form_scale: 1.0,
        membership: MatrixPredicate::unitary(),
    })
}

// One recursion level of the SU chart evaluator, with cached one-parameter
// subgroup data for every factor.
struct SuLevel {
    n: usize,
    // (exp(λ3 ·), exp(λ_{(k-1)^2+1} ·)) for k = 2..=n
    prefix: Vec<(OneParam, OneParam)>,
    suffix: Option<OneParam>, // exp(λ_{n²-1} ·), absent for n = 1
    sub: Option<Box<SuLevel>>,
}

impl SuLevel {
    fn build(n: usize) -> Result<Self> {
        let basis = SuNBasis::new(n);
        if n == 1 {
            return Ok(Self { n, prefix: Vec::new(), suffix: None, sub: None });
        }
        let lam3 = OneParam::new(basis.lambda(3.min(n * n - 1)))?;
        let mut prefix = Vec::new();
        for k in 2..=n {
            let idx = (k - 1) * (k - 1) + 1;
            prefix.push((lam3.clone(), OneParam::new(basis.lambda(idx))?));
        }
        let suffix = Some(OneParam::new(basis.lambda(n * n - 1))?);
        let sub = Some(Box::new(SuLevel::build(n - 1)?));
        Ok(Self { n, prefix, suffix, sub })
    }

    // phi/psi have length n(n-1)/2, omega has length n-1.
    fn eval(&self, phi: &[f64], psi: &[f64], omega: &[f64]) -> CMat {
        if self.n == 1 {
            return eye(1);
        }
        let m = self.n - 1;
        let mut g = eye(self.n);
        for (k, (l3, lk)) in self.prefix.iter().enumerate() {
            g = g * l3.at(phi[k]) * lk.at(psi[k]);
        }
        let sub = self.sub.as_ref().unwrap();
        let inner = sub.eval(&phi[m..], &psi[m..], &omega[..m - 1]);
        let mut embedded = eye(self.n);
        embedded.view_mut((0, 0), (self.n - 1, self.n - 1)).copy_from(&inner);
        g = g * embedded;
        g * self.suffix.as_ref().unwrap().at(omega[m - 1])
    }
}

fn phi_domains(n: usize) -> Vec<(f64, f64)> {
    // per level m = n .. 2: first angle [0,π], remaining m-2 angles [0,2π]
    let mut doms = Vec::new();
    for level in (2..=n).rev() {
        doms.push((0.0, PI));
        for _ in 0..level.saturating_sub(2) {
            doms.push((0.0, 2.0 * PI));
        }
    }
    doms
}

fn su_params(n: usize, omega_divisor: f64) -> Vec<ChartParam> {
    let pairs = n * (n - 1) / 2;
    let mut params = Vec::new();
    for (i, (lo, hi)) in phi_domains(n).iter().enumerate() {
        params.push(ChartParam::new(format!("phi{}", i + 1), *lo, *hi));
    }
    for i in 0..pairs {
        params.push(ChartParam::new(format!("psi{}", i + 1), 0.0, PI / 2.0));
    }
    for j in 1..n {
        params.push(ChartParam::new(
            format!("omega{j}"),
            0.0,
            2.0 * PI / (omega_divisor * j as f64),
        ));
    }
    params
}

fn attach_su_weight(chart: EulerChart, n: usize) -> EulerChart {
    let pairs = n * (n - 1) / 2;
    match n {
        0 | 1 => {
            let weight = Arc::new(|_: &[f64]| 1.0);
            EulerChart::new(chart.name.clone(), chart.params.clone(), chart.group.clone(), {
                let c = chart.clone();
                Arc::new(move |p: &[f64]| c.evaluate(p))
            }, weight)
        }
        2 => {
            let weight = Arc::new(move |p: &[f64]| {
                let psi = p[pairs];
                psi.cos() * psi.sin()
            });
            EulerChart::new(chart.name.clone(), chart.params.clone(), chart.group.clone(), {
                let c = chart.clone();
                Arc::new(move |p: &[f64]| c.evaluate(p))
            }, weight)
        }
        _ => {
            // No closed form in scope for the SU(N≥3) density; fall back to
            // the Maurer-Cartan oracle on an evaluation-only twin. The
            // boundary guard is skipped: near-boundary points just return a
            // (correctly) tiny density.
            let twin = chart.clone();
            let ortho = chart.group.orthonormal_basis();
            let weight = Arc::new(move |p: &[f64]| {
                numeric_density_oracle_with_basis(&twin, p, &ortho)
                    .or_else(|e| match e {
                        Error::Boundary(_) => Ok(0.0),
                        other => Err(other),
                    })
                    .expect("density oracle on interior point")
            });
            EulerChart::new(chart.name.clone(), chart.params.clone(), chart.group.clone(), {
                let c = chart.clone();
                Arc::new(move |p: &[f64]| c.evaluate(p))
            }, weight)
        }
    }
}

/// The recursive Euler chart of SU(N). Parameter order is the flat
/// signature (φ-block, ψ-block, ω-block).
pub fn build_su_n(n: usize) -> Result<EulerChart> {
    if n == 0 {
        return Err(Error::Domain("SU(0) is not a group here".into()));
    }
    let level = Arc::new(SuLevel::build(n)?);
    let pairs = n * (n - 1) / 2;
    let params = su_params(n, 1.0);
    let group = su_group(n);
    let eval = {
        let level = Arc::clone(&level);
        Arc::new(move |p: &[f64]| {
            level.eval(&p[..pairs], &p[pairs..2 * pairs], &p[2 * pairs..])
        })
    };
    let chart = EulerChart::new(
        format!("F_SU({n})"),
        params,
        group,
        eval,
        Arc::new(|_: &[f64]| 1.0),
    );
    Ok(attach_su_weight(chart, n))
}

fn build_u_n_inner(n: usize, halved: bool) -> Result<EulerChart> {
    if n == 0 {
        return Err(Error::Domain("U(0) is not a group here".into()));
    }
    let su = build_su_n(n)?;
    let su_dim = su.dim();
    let lam0 = OneParam::new(SuNBasis::new(n).lambda(0))?;
    let omega_divisor = if halved { 2.0 } else { 1.0 };
    let mut params = su_params(n, omega_divisor);
    params.push(ChartParam::new("xi", 0.0, if halved { PI } else { 2.0 * PI }));
    let name = if halved {
        format!("F~_U({n})")
    } else {
        format!("F_U({n})")
    };
    let eval = {
        let su = su.clone();
        Arc::new(move |p: &[f64]| su.evaluate(&p[..su_dim]) * lam0.at(p[su_dim]))
    };
    let weight = {
        let su = su.clone();
        Arc::new(move |p: &[f64]| su.jacobian_weight(&p[..su_dim]))
    };
    Ok(EulerChart::new(name, params, u_group(n), eval, weight))
}

/// F_U(N)(φ…ω, ξ) = F_SU(N)(φ…ω)·exp(ξλ₀), ξ ∈ [0, 2π].
pub fn build_u_n(n: usize) -> Result<EulerChart> {
    build_u_n_inner(n, false)
}

/// The U(N)/ℤ₂ᴺ chart: same product with ω_j ∈ [0, π/j] and ξ ∈ [0, π].
/// The quotient is realized as a sub-domain of U(N) because the ℤ₂ᴺ coset
/// shifts act by translating the rightmost diagonal factors.
pub fn build_u_n_mod_z2n(n: usize) -> Result<EulerChart> {
    build_u_n_inner(n, true)
}
