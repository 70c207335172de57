//! Reduction of structured finite-type functions on Sp(N) and G₂ to
//! admissible functions with explicit weights on cube×torus domains.
//!
//! A finite-type function in chart coordinates is a sum of angle monomials:
//! phases e^{ikφ} on the torus-like angles and sin/cos powers on the
//! ψ- and radial angles. Lowering substitutes x = sin ψ, ξ = sin y and
//! θ-doublings for the angles with reduced ranges, turning each term into
//! a coefficient-polynomial times a fractional z-monomial. The Haar weight
//! in the new variables is
//!
//! ```text
//! J̃_Sp(N) = J_SU(N)(x̃)·(∏ ξⱼ)·∏_{j>k}(ξⱼ²(1-ξ_k²) - (1-ξⱼ²)ξ_k²)·J_SU(N)(x)
//! J̃_G2   = ξ₁ξ₂·[ξ₁²(16c³+9c-24c²) - (1-ξ₁²)(3ξ₂-4ξ₂³)²]
//!                ·[ξ₁²(1-ξ₂²)-(1-ξ₁²)ξ₂²]·x₁x₂x₃x₄,   c = 1-ξ₂²
//! ```
//!
//! both written so that the pullback through ξ = sin y reproduces the
//! radial Jacobians exactly; the consistency test below arbitrates the
//! final exponents (ξ_k² in the Sp factor, ξ₂³ in the triple-angle sine).
//!
//! The cube-root bound of the G₂ ξ₂-integral is S(ξ₁) = sin(asin(ξ₁)/3),
//! computed trigonometrically: it is the root of 4s³ - 3s + ξ₁ = 0 in
//! [0, 1/2]. The printed nested-radical form needs a non-principal branch;
//! [`radical_branch_diagnostic`] reports which one.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::admissible::{AdmissibleFunction, CoefficientPoly, SForm, ScanDomain};
use crate::integrate::{integrate_mapped, AxisRule, IntegralResult, Method};
use crate::{Error, Result};

/// One finite-type monomial on the SU(N) chart angles: integer phases on
/// the φ's and ω's, sin/cos powers on the ψ's (cos powers already reduced
/// to {0,1}).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SuNMonomial {
    pub phi_exps: Vec<i64>,
    pub psi_sin: Vec<u32>,
    pub psi_cos: Vec<u8>,
    pub omega_exps: Vec<i64>,
}

impl SuNMonomial {
    pub fn identity(n: usize) -> Self {
        let pairs = n * (n - 1) / 2;
        Self {
            phi_exps: vec![0; pairs],
            psi_sin: vec![0; pairs],
            psi_cos: vec![0; pairs],
            omega_exps: vec![0; n - 1],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let pairs = n * (n - 1) / 2;
        if self.phi_exps.len() != pairs
            || self.psi_sin.len() != pairs
            || self.psi_cos.len() != pairs
            || self.omega_exps.len() != n.saturating_sub(1)
        {
            return Err(Error::Dimension(format!(
                "SU({n}) monomial has wrong index-list lengths"
            )));
        }
        if self.psi_cos.iter().any(|&b| b > 1) {
            return Err(Error::Domain("cos exponents must be 0 or 1".into()));
        }
        Ok(())
    }

    fn eval(&self, phi: &[f64], psi: &[f64], omega: &[f64]) -> Complex64 {
        let mut v = Complex64::ONE;
        for (&k, &p) in self.phi_exps.iter().zip(phi) {
            v *= Complex64::from_polar(1.0, k as f64 * p);
        }
        for ((&a, &b), &p) in self.psi_sin.iter().zip(&self.psi_cos).zip(psi) {
            v *= p.sin().powi(a as i32) * p.cos().powi(b as i32);
        }
        for (&l, &w) in self.omega_exps.iter().zip(omega) {
            v *= Complex64::from_polar(1.0, l as f64 * w);
        }
        v
    }
}

/// One term of a finite-type function on Sp(N).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpNTerm {
    pub coeff: [f64; 2],
    pub tilde: SuNMonomial,
    /// phase exponent on ξ̃
    pub m_tilde: i64,
    /// sin powers on the radial angles y₁…y_N
    pub radial_sin: Vec<u32>,
    /// cos powers on the radial angles, each 0 or 1
    pub radial_cos: Vec<u8>,
    pub plain: SuNMonomial,
    /// phase exponent on ξ
    pub n_plain: i64,
}

/// A finite-type function on Sp(N) in chart coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteTypeSpN {
    pub n: usize,
    pub terms: Vec<SpNTerm>,
}

impl FiniteTypeSpN {
    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            t.tilde.validate(self.n)?;
            t.plain.validate(self.n)?;
            if t.radial_sin.len() != self.n || t.radial_cos.len() != self.n {
                return Err(Error::Dimension("radial exponent lists must have length N".into()));
            }
            if t.radial_cos.iter().any(|&b| b > 1) {
                return Err(Error::Domain("radial cos exponents must be 0 or 1".into()));
            }
        }
        Ok(())
    }

    /// Evaluate on the flat F_Sp(N) parameter vector
    /// (tilde U(N) block ∥ y block ∥ plain U(N) block).
    pub fn eval(&self, params: &[f64]) -> Complex64 {
        let n = self.n;
        let pairs = n * (n - 1) / 2;
        let udim = n * n;
        let (tilde, rest) = params.split_at(udim);
        let (y, plain) = rest.split_at(n);
        let mut acc = Complex64::ZERO;
        for t in &self.terms {
            let mut v = Complex64::new(t.coeff[0], t.coeff[1]);
            v *= t.tilde.eval(
                &tilde[..pairs],
                &tilde[pairs..2 * pairs],
                &tilde[2 * pairs..udim - 1],
            );
            v *= Complex64::from_polar(1.0, t.m_tilde as f64 * tilde[udim - 1]);
            for ((&a, &b), &yj) in t.radial_sin.iter().zip(&t.radial_cos).zip(y) {
                v *= yj.sin().powi(a as i32) * yj.cos().powi(b as i32);
            }
            v *= t.plain.eval(
                &plain[..pairs],
                &plain[pairs..2 * pairs],
                &plain[2 * pairs..udim - 1],
            );
            v *= Complex64::from_polar(1.0, t.n_plain as f64 * plain[udim - 1]);
            acc += v;
        }
        acc
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: FiniteTypeSpN =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialization cannot fail")
    }
}

/// One term of a finite-type function on G₂ in chart coordinates.
/// Phase exponents act on (φ̃₁, ω̃₁, φ̃₂, ω̃₂, φ₁, ω₁, φ₂, ω₂); sin/cos
/// powers act on (ψ̃₁, ψ̃₂, y₁, y₂, ψ₁, ψ₂), cos powers in {0,1}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct G2Term {
    pub coeff: [f64; 2],
    pub z_exps: [i64; 8],
    pub sin_exps: [u32; 6],
    pub cos_exps: [u8; 6],
}

/// A finite-type function on G₂ in chart coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteTypeG2 {
    pub terms: Vec<G2Term>,
}

impl FiniteTypeG2 {
    pub fn validate(&self) -> Result<()> {
        if self.terms.iter().any(|t| t.cos_exps.iter().any(|&b| b > 1)) {
            return Err(Error::Domain("cos exponents must be 0 or 1".into()));
        }
        Ok(())
    }

    /// Evaluate on the 14 F_G2 parameters
    /// (φ̃₁,ψ̃₁,ω̃₁,φ̃₂,ψ̃₂,ω̃₂,y₁,y₂,φ₁,ψ₁,ω₁,φ₂,ψ₂,ω₂).
    pub fn eval(&self, p: &[f64]) -> Complex64 {
        debug_assert_eq!(p.len(), 14);
        let phases = [p[0], p[2], p[3], p[5], p[8], p[10], p[11], p[13]];
        let angles = [p[1], p[4], p[6], p[7], p[9], p[12]];
        let mut acc = Complex64::ZERO;
        for t in &self.terms {
            let mut v = Complex64::new(t.coeff[0], t.coeff[1]);
            for (&k, &ph) in t.z_exps.iter().zip(&phases) {
                v *= Complex64::from_polar(1.0, k as f64 * ph);
            }
            for ((&a, &b), &ang) in t.sin_exps.iter().zip(&t.cos_exps).zip(&angles) {
                v *= ang.sin().powi(a as i32) * ang.cos().powi(b as i32);
            }
            acc += v;
        }
        acc
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: FiniteTypeG2 =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialization cannot fail")
    }
}

/// sin(asin(ξ₁)/3): the ξ₂-integration bound of the lowered G₂ domain,
/// i.e. the root of 4s³ - 3s + ξ₁ = 0 in [0, 1/2].
pub fn triple_angle_s(xi1: f64) -> f64 {
    (xi1.asin() / 3.0).sin()
}

/// Evaluate the printed nested-radical form of S(ξ₁) on all three cube-root
/// branches and report which branch reproduces the trigonometric value.
#[derive(Clone, Debug)]
pub struct RadicalBranchReport {
    pub values: [Complex64; 3],
    pub matching_branch: Option<usize>,
}

pub fn radical_branch_diagnostic(xi1: f64) -> RadicalBranchReport {
    let inner = Complex64::new(xi1 * xi1 - 1.0, 0.0).sqrt() - xi1;
    let r0 = inner.powf(1.0 / 3.0);
    let want = triple_angle_s(xi1);
    let mut values = [Complex64::ZERO; 3];
    let mut matching = None;
    for k in 0..3 {
        let rot = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0);
        let r = r0 * rot;
        let s = 0.5 * (r + 1.0 / r);
        values[k] = s;
        if (s - Complex64::new(want, 0.0)).norm() < 1e-9 && matching.is_none() {
            matching = Some(k);
        }
    }
    RadicalBranchReport { values, matching_branch: matching }
}

/// J_SU(N) in the lowered x-variables, for the N with a closed form in
/// scope (the SU(2) density cos ψ sin ψ becomes x dx under x = sin ψ).
fn j_su_lowered(n: usize, x: &[f64]) -> Result<f64> {
    match n {
        1 => Ok(1.0),
        2 => Ok(x[0]),
        _ => Err(Error::Domain(format!(
            "J_SU({n}) has no closed form here; the lowered weight is only \
             assembled for N ≤ 2"
        ))),
    }
}

/// The lowered symplectic weight J̃_Sp(N) (global constant dropped); the
/// pair product carries ξ_k squared, as the pullback identity requires.
pub fn jtilde_sp_n(n: usize, x_tilde: &[f64], x_plain: &[f64], xi: &[f64]) -> Result<f64> {
    let mut w = j_su_lowered(n, x_tilde)? * j_su_lowered(n, x_plain)?;
    for &v in xi {
        w *= v;
    }
    for j in 1..n {
        for k in 0..j {
            w *= xi[j] * xi[j] * (1.0 - xi[k] * xi[k]) - (1.0 - xi[j] * xi[j]) * xi[k] * xi[k];
        }
    }
    Ok(w)
}

/// The lowered G₂ weight J̃_G2 (global constant dropped); the second factor
/// of the first bracket carries (3ξ₂-4ξ₂³)² = sin²(3y₂).
pub fn jtilde_g2(xi1: f64, xi2: f64) -> f64 {
    let c = 1.0 - xi2 * xi2;
    let sin3 = 3.0 * xi2 - 4.0 * xi2 * xi2 * xi2;
    let b1 = xi1 * xi1 * (16.0 * c * c * c + 9.0 * c - 24.0 * c * c)
        - (1.0 - xi1 * xi1) * sin3 * sin3;
    let b2 = xi1 * xi1 * (1.0 - xi2 * xi2) - (1.0 - xi1 * xi1) * xi2 * xi2;
    xi1 * xi2 * b1 * b2
}

/// A lowered function together with its integration domain and weight.
pub struct Lowered {
    pub function: AdmissibleFunction,
    pub domain: ScanDomain,
    /// Provenance notes for the weight corrections applied.
    pub weight_notes: Vec<String>,
}

// φ positions with range [0,π] in the flat SU(N) φ-block: the first angle
// of each recursion level.
fn half_range_phi_positions(n: usize) -> Vec<bool> {
    let mut half = Vec::new();
    for level in (2..=n).rev() {
        half.push(true);
        for _ in 0..level - 2 {
            half.push(false);
        }
    }
    half
}

// Lowered torus exponents of one SU(N) monomial block: φ-slots then
// ω-slots then the ξ-slot.
fn lower_su_monomial(
    n: usize,
    mono: &SuNMonomial,
    xi_exp: i64,
    tilde: bool,
) -> Vec<Rational64> {
    let mut exps = Vec::with_capacity(n * (n + 1) / 2);
    for (is_half, &k) in half_range_phi_positions(n).iter().zip(&mono.phi_exps) {
        exps.push(if *is_half {
            Rational64::new(k, 2)
        } else {
            Rational64::from_integer(k)
        });
    }
    for (j, &l) in (1..n as i64).zip(&mono.omega_exps) {
        exps.push(if tilde {
            Rational64::new(l, 2 * j)
        } else {
            Rational64::new(l, j)
        });
    }
    exps.push(if tilde {
        Rational64::new(xi_exp, 2)
    } else {
        Rational64::from_integer(xi_exp)
    });
    exps
}

/// The scan domain (cube maps + weight) of the lowered Sp(N) integral:
/// [0,1]^{N(N-1)} x-variables, the ordered simplex 0 ≤ ξ₁ ≤ … ≤ ξ_N ≤ 1,
/// and N(N+1) circles. Cube axes use the smooth sin pullback.
pub fn sp_scan_domain(n: usize) -> Result<ScanDomain> {
    // weight availability check up front
    j_su_lowered(n, &vec![0.5; n * (n - 1) / 2])?;
    let pairs = n * (n - 1) / 2;
    let k = 2 * pairs + n;
    let l = n * (n + 1);
    let cube_map = Arc::new(move |u: &[f64]| {
        let mut x = Vec::with_capacity(k);
        let mut jac = 1.0;
        for &ui in &u[..2 * pairs] {
            let t = 0.5 * PI * ui;
            x.push(t.sin());
            jac *= 0.5 * PI * t.cos();
        }
        // nested ordered ξ: outermost gets the sin map
        let mut xi = vec![0.0; n];
        let t = 0.5 * PI * u[2 * pairs + n - 1];
        xi[n - 1] = t.sin();
        jac *= 0.5 * PI * t.cos();
        for j in (0..n - 1).rev() {
            jac *= xi[j + 1];
            xi[j] = xi[j + 1] * u[2 * pairs + j];
        }
        x.extend_from_slice(&xi);
        (x, jac)
    });
    let weight = Arc::new(move |x: &[f64]| {
        jtilde_sp_n(n, &x[..pairs], &x[pairs..2 * pairs], &x[2 * pairs..])
            .expect("weight availability checked at construction")
    });
    Ok(ScanDomain { name: format!("jtilde_sp{n}"), k, l, cube_map, weight })
}

/// Lower a finite-type function on Sp(N) to an admissible function with
/// the J̃_Sp(N) weight on cube × torus × ordered simplex.
///
/// Cube variables: (x̃-block, x-block, ξ-block); torus variables: tilde
/// (φ̃-slots, ω̃-slots, ξ̃) then plain (φ, ω, ξ). The coset-reduced tilde
/// angles produce half and 1/(2j) exponents, so the achieved admissibility
/// bound is max(N, 2(N-1), 2).
pub fn lower_sp_n(ft: &FiniteTypeSpN) -> Result<Lowered> {
    ft.validate()?;
    let n = ft.n;
    let pairs = n * (n - 1) / 2;
    let k = 2 * pairs + n;
    let l = n * (n + 1);
    let n_bound = (n as u32).max(2).max(2 * (n as u32 - 1).max(1));
    let mut f = AdmissibleFunction::new(n_bound, k, l);
    for term in &ft.terms {
        let mut exps = lower_su_monomial(n, &term.tilde, term.m_tilde, true);
        exps.extend(lower_su_monomial(n, &term.plain, term.n_plain, false));
        // coefficient: x̃^a s̃^b · x^a s^b · ξ^p (1-ξ²)^{q/2}
        let mut xpow = vec![0u32; k];
        let mut smask = 0u32;
        for (i, (&a, &b)) in term.tilde.psi_sin.iter().zip(&term.tilde.psi_cos).enumerate() {
            xpow[i] = a;
            if b == 1 {
                smask |= 1 << i;
            }
        }
        for (i, (&a, &b)) in term.plain.psi_sin.iter().zip(&term.plain.psi_cos).enumerate() {
            xpow[pairs + i] = a;
            if b == 1 {
                smask |= 1 << (pairs + i);
            }
        }
        for (i, (&p, &q)) in term.radial_sin.iter().zip(&term.radial_cos).enumerate() {
            xpow[2 * pairs + i] = p;
            if q == 1 {
                smask |= 1 << (2 * pairs + i);
            }
        }
        f.add_term(
            exps,
            CoefficientPoly::monomial(xpow, smask, Complex64::new(term.coeff[0], term.coeff[1])),
        );
    }
    Ok(Lowered {
        function: f,
        domain: sp_scan_domain(n)?,
        weight_notes: vec![
            "pair factor uses ξ_k² (the proposition's trailing ξ_k is a typo; \
             forced by the sin(y_j±y_k) pullback)"
                .into(),
        ],
    })
}

/// The scan domain of the lowered G₂ integral: cube (x₁ half-scaled,
/// x₂..x₄, ξ₁ ∈ [0,1], ξ₂ ∈ [0, S(ξ₁)]) and eight circles.
pub fn g2_scan_domain() -> ScanDomain {
    let cube_map = Arc::new(move |u: &[f64]| {
        let mut jac = 1.0;
        let mut x = Vec::with_capacity(6);
        // x1 carries √(1-x²/2): no endpoint kink, affine map suffices
        x.push(u[0]);
        for &ui in &u[1..4] {
            let t = 0.5 * PI * ui;
            x.push(t.sin());
            jac *= 0.5 * PI * t.cos();
        }
        let t = 0.5 * PI * u[4];
        let xi1 = t.sin();
        jac *= 0.5 * PI * t.cos();
        x.push(xi1);
        let bound = triple_angle_s(xi1);
        x.push(bound * u[5]);
        jac *= bound;
        (x, jac)
    });
    let weight = Arc::new(|x: &[f64]| x[0] * x[1] * x[2] * x[3] * jtilde_g2(x[4], x[5]));
    ScanDomain { name: "jtilde_g2".into(), k: 6, l: 8, cube_map, weight }
}

/// Lower a finite-type function on G₂ to a 1/4-admissible function with
/// the J̃_G2 weight.
///
/// Exponent map per torus variable: (k¹/2, k²/4, k³/2, k⁴, k⁵/2, k⁶/2,
/// k⁷/2, k⁸); the ψ̃₁ coefficient is rescaled to (x₁/√2)^l (1-x₁²/2)^{m/2}
/// from its [0, π/4] range.
pub fn lower_g2(ft: &FiniteTypeG2) -> Result<Lowered> {
    ft.validate()?;
    let denoms = [2i64, 4, 2, 1, 2, 2, 2, 1];
    let mut f = AdmissibleFunction::new(4, 6, 8).with_sforms(vec![
        SForm::HalfScaled,
        SForm::Std,
        SForm::Std,
        SForm::Std,
        SForm::Std,
        SForm::Std,
    ]);
    for term in &ft.terms {
        let exps: Vec<Rational64> = term
            .z_exps
            .iter()
            .zip(&denoms)
            .map(|(&kk, &d)| Rational64::new(kk, d))
            .collect();
        // angle order (ψ̃₁, ψ̃₂, y₁, y₂, ψ₁, ψ₂) → cube axes (0, 1, 4, 5, 2, 3)
        let axis_of = [0usize, 1, 4, 5, 2, 3];
        let mut xpow = vec![0u32; 6];
        let mut smask = 0u32;
        for (slot, &axis) in axis_of.iter().enumerate() {
            xpow[axis] = term.sin_exps[slot];
            if term.cos_exps[slot] == 1 {
                smask |= 1 << axis;
            }
        }
        // (x₁/√2)^{l¹}: fold the scale into the coefficient
        let scale = (0.5f64).powi(term.sin_exps[0] as i32 / 2)
            * if term.sin_exps[0] % 2 == 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        let coeff = Complex64::new(term.coeff[0], term.coeff[1]) * scale;
        f.add_term(exps, CoefficientPoly::monomial(xpow, smask, coeff));
    }
    Ok(Lowered {
        function: f,
        domain: g2_scan_domain(),
        weight_notes: vec![
            "triple-angle factor uses (3ξ₂-4ξ₂³)² = sin²(3y₂) (the printed \
             ξ₂² exponent is a typo; forced by the sin(y₁±3y₂) pullback)"
                .into(),
        ],
    })
}

/// Normalized moment ∫ f̂^P · J̃ / ∫ J̃ of a lowered function over its scan
/// domain. Quadrature methods must supply k+l axes (cube axes first).
pub fn lowered_moment(lowered: &Lowered, p: u32, method: &Method) -> Result<IntegralResult> {
    let f = &lowered.function;
    let dom = &lowered.domain;
    let dim = f.k + f.l;
    let map = |u: &[f64]| {
        let (x, jac) = (dom.cube_map)(&u[..f.k]);
        let mut point = x;
        point.extend(u[f.k..].iter().map(|&t| 2.0 * PI * t));
        (point, jac)
    };
    let numer = integrate_mapped(dim, method, map, |point| {
        let (x, theta) = point.split_at(f.k);
        f.evaluate(x, theta).expect("domain map stays inside [0,1]^k").powu(p)
            * (dom.weight)(x)
    })?;
    let denom = integrate_mapped(dim, method, map, |point| {
        let (x, _) = point.split_at(f.k);
        Complex64::new((dom.weight)(x), 0.0)
    })?;
    if denom.value.norm() == 0.0 {
        return Err(Error::Domain("lowered weight has zero mass".into()));
    }
    let value = numer.value / denom.value.re;
    let err = numer.error_estimate / denom.value.re.abs()
        + value.norm() * denom.error_estimate / denom.value.re.abs();
    Ok(IntegralResult {
        value,
        error_estimate: err,
        evals: numer.evals + denom.evals,
        seed: method.seed(),
    })
}

/// Quadrature method for a lowered domain: Gauss–Legendre everywhere
/// (fractional harmonics make the circle axes non-periodic).
pub fn lowered_gauss_method(lowered: &Lowered, cube_order: usize, torus_order: usize) -> Method {
    let f = &lowered.function;
    let mut axes = vec![AxisRule::GaussLegendre(cube_order); f.k];
    axes.extend(vec![AxisRule::GaussLegendre(torus_order); f.l]);
    Method::Tensor { axes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::Axis;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn triple_angle_endpoints_and_cubic_residual() {
        assert_eq!(triple_angle_s(0.0), 0.0);
        assert!((triple_angle_s(1.0) - 0.5).abs() <= 1e-15);
        for i in 0..=1000 {
            let xi = i as f64 / 1000.0;
            let s = triple_angle_s(xi);
            let residual = 4.0 * s * s * s - 3.0 * s + xi;
            assert!(residual.abs() <= 1e-14, "xi = {xi}: residual {residual:.3e}");
            assert!((0.0..=0.5).contains(&s));
        }
    }

    #[test]
    fn radical_needs_a_non_principal_branch() {
        // at ξ₁ = 0 the principal branch gives √3/2, another root of the
        // same cubic; some branch must match sin(asin/3)
        let r = radical_branch_diagnostic(0.0);
        assert!((r.values[0].re - 3f64.sqrt() / 2.0).abs() <= 1e-12);
        assert_ne!(r.matching_branch, Some(0));
        for xi in [0.0, 0.3, 0.7, 0.99] {
            let r = radical_branch_diagnostic(xi);
            assert!(r.matching_branch.is_some(), "no branch matches at {xi}");
        }
    }

    #[test]
    fn sin_substitution_identity() {
        // ∫₀^{π/2} sin 2y dy = 1 = ∫₀¹ 2ξ dξ
        let lhs = integrate_mapped(
            1,
            &Method::gauss(1, 30),
            |u| (vec![0.5 * PI * u[0]], 0.5 * PI),
            |y| Complex64::new((2.0 * y[0]).sin(), 0.0),
        )
        .unwrap();
        let rhs = crate::integrate::integrate_product(
            &[Axis::Interval(0.0, 1.0)],
            &Method::gauss(1, 30),
            |_| 1.0,
            |x| Complex64::new(2.0 * x[0], 0.0),
        )
        .unwrap();
        assert!((lhs.value.re - 1.0).abs() <= 1e-12);
        assert!((rhs.value.re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn quarter_range_substitution_identity() {
        // ∫₀^{π/4} cos x dx = 1/√2 = (1/√2)∫₀¹ (1-x²/2)^0 dx
        let lhs = integrate_mapped(
            1,
            &Method::gauss(1, 30),
            |u| (vec![0.25 * PI * u[0]], 0.25 * PI),
            |t| Complex64::new(t[0].cos(), 0.0),
        )
        .unwrap();
        assert!((lhs.value.re - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-12);
    }

    #[test]
    fn sp_weight_substitution_reproduces_radial_jacobian() {
        // J̃(sin ψ̃, sin ψ, sin y)·∏cos y·∏cos ψ ∝ J_Sp·∏ cos sin densities
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for n in [1usize, 2] {
            let region = crate::spn::region_sp_n(n);
            let mut fitted: Option<f64> = None;
            for _ in 0..50 {
                let y = region.sample_interior(&mut rng, 1e-3);
                let pairs = n * (n - 1) / 2;
                let psi_t: Vec<f64> = (0..pairs).map(|_| rng.gen_range(0.1..1.4)).collect();
                let psi: Vec<f64> = (0..pairs).map(|_| rng.gen_range(0.1..1.4)).collect();
                let xt: Vec<f64> = psi_t.iter().map(|p| p.sin()).collect();
                let x: Vec<f64> = psi.iter().map(|p| p.sin()).collect();
                let xi: Vec<f64> = y.iter().map(|v| v.sin()).collect();
                let mut lhs = jtilde_sp_n(n, &xt, &x, &xi).unwrap();
                for v in &y {
                    lhs *= v.cos();
                }
                for p in psi_t.iter().chain(&psi) {
                    lhs *= p.cos();
                }
                let mut rhs = crate::spn::jacobian_sp_n(&y);
                for p in psi_t.iter().chain(&psi) {
                    rhs *= p.cos() * p.sin();
                }
                let ratio = lhs / rhs;
                match fitted {
                    None => fitted = Some(ratio),
                    Some(c) => assert!(
                        ((ratio - c) / c).abs() <= 1e-10,
                        "N={n}: ratio drift {ratio} vs {c}"
                    ),
                }
            }
        }
    }

    #[test]
    fn g2_weight_substitution_reproduces_radial_jacobian() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let region = crate::g2::region_g2();
        let mut fitted: Option<f64> = None;
        for _ in 0..100 {
            let y = region.sample_interior(&mut rng, 1e-3);
            let xi1 = y[0].sin();
            let xi2 = y[1].sin();
            let lhs = jtilde_g2(xi1, xi2) * y[0].cos() * y[1].cos();
            let rhs = crate::g2::jacobian_g2(y[0], y[1]);
            let ratio = lhs / rhs;
            match fitted {
                None => fitted = Some(ratio),
                Some(c) => assert!(
                    ((ratio - c) / c).abs() <= 1e-10,
                    "ratio drift {ratio} vs {c} at {y:?}"
                ),
            }
        }
        // and the fitted constant is the substitution's 1/4
        assert!((fitted.unwrap() - 0.25).abs() <= 1e-10);
    }

    #[test]
    fn lowered_g2_is_quarter_admissible() {
        let term = G2Term {
            coeff: [1.0, 0.0],
            z_exps: [1, 1, 1, 1, 1, 1, 1, 1],
            sin_exps: [1, 0, 2, 0, 0, 1],
            cos_exps: [1, 0, 0, 1, 0, 0],
        };
        let lowered = lower_g2(&FiniteTypeG2 { terms: vec![term] }).unwrap();
        let f = &lowered.function;
        assert_eq!(f.n_bound, 4);
        assert!(f.is_admissible());
        assert_eq!(f.max_denominator(), 4);
        let m = f.spectrum().pop().unwrap();
        assert_eq!(m[0], q(1, 2));
        assert_eq!(m[1], q(1, 4));
        assert_eq!(m[3], q(1, 1));
        assert_eq!(m[7], q(1, 1));
    }

    #[test]
    fn lowered_sp2_achieves_the_admissible_bound() {
        let mut term = SpNTerm {
            coeff: [1.0, 0.0],
            tilde: SuNMonomial::identity(2),
            m_tilde: 1,
            radial_sin: vec![1, 0],
            radial_cos: vec![0, 1],
            plain: SuNMonomial::identity(2),
            n_plain: -1,
        };
        term.tilde.phi_exps[0] = 3;
        term.tilde.omega_exps[0] = 1;
        term.plain.psi_sin[0] = 2;
        term.plain.psi_cos[0] = 1;
        let ft = FiniteTypeSpN { n: 2, terms: vec![term] };
        let lowered = lower_sp_n(&ft).unwrap();
        let f = &lowered.function;
        assert_eq!(f.max_denominator(), 2);
        assert_eq!(f.k, 4);
        assert_eq!(f.l, 6);
        let m = &f.spectrum()[0];
        assert_eq!(m[0], q(3, 2)); // φ̃ has range [0,π]
        assert_eq!(m[1], q(1, 2)); // ω̃₁ has range [0,π]
        assert_eq!(m[2], q(1, 2)); // ξ̃ has range [0,π]
        assert_eq!(m[5], q(-1, 1)); // plain ξ keeps integers
    }

    #[test]
    fn sp1_lowering_degenerate_shape() {
        // N=1: no x-variables, one ξ, two circles; weight reduces to ξ₁
        let term = SpNTerm {
            coeff: [1.0, 0.0],
            tilde: SuNMonomial::identity(1),
            m_tilde: 0,
            radial_sin: vec![1],
            radial_cos: vec![0],
            plain: SuNMonomial::identity(1),
            n_plain: 0,
        };
        let lowered = lower_sp_n(&FiniteTypeSpN { n: 1, terms: vec![term] }).unwrap();
        assert_eq!(lowered.function.k, 1);
        assert_eq!(lowered.function.l, 2);
        assert!((lowered.domain.weight)(&[0.3]) - 0.3 <= 1e-15);
        let m = &lowered.function.spectrum()[0];
        assert_eq!(m, &vec![q(0, 1), q(0, 1)]);
    }

    fn random_sp_term(n: usize, rng: &mut ChaCha8Rng) -> SpNTerm {
        let pairs = n * (n - 1) / 2;
        let mono = |rng: &mut ChaCha8Rng| SuNMonomial {
            phi_exps: (0..pairs).map(|_| rng.gen_range(-2..=2)).collect(),
            psi_sin: (0..pairs).map(|_| rng.gen_range(0..=2)).collect(),
            psi_cos: (0..pairs).map(|_| rng.gen_range(0..=1)).collect(),
            omega_exps: (0..n - 1).map(|_| rng.gen_range(-2..=2)).collect(),
        };
        SpNTerm {
            coeff: [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5],
            tilde: mono(rng),
            m_tilde: rng.gen_range(-2..=2),
            radial_sin: (0..n).map(|_| rng.gen_range(0..=2)).collect(),
            radial_cos: (0..n).map(|_| rng.gen_range(0..=1)).collect(),
            plain: mono(rng),
            n_plain: rng.gen_range(-2..=2),
        }
    }

    /// LHS group integral of f^P equals the RHS lowered integral after
    /// both sides are normalized, which fixes the abstract constant.
    #[test]
    fn sp1_transform_proposition_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let ctx = crate::spn::SpNContext::new(1).unwrap();
        let chart = ctx.chart().unwrap();
        for trial in 0..3 {
            let ft = FiniteTypeSpN {
                n: 1,
                terms: (0..2).map(|_| random_sp_term(1, &mut rng)).collect(),
            };
            let lowered = lower_sp_n(&ft).unwrap();
            let method_rhs = lowered_gauss_method(&lowered, 40, 40);
            for p in 1..=3u32 {
                let integrator =
                    crate::integrate::ChartIntegrator::new(&chart, Method::gauss(3, 40));
                let lhs = integrator
                    .expectations_params(1, |sample, out| {
                        out[0] = ft.eval(sample.params()).powu(p);
                    })
                    .unwrap()[0];
                let rhs = lowered_moment(&lowered, p, &method_rhs).unwrap();
                assert!(
                    (lhs.value - rhs.value).norm() <= 1e-6,
                    "trial {trial} P={p}: lhs {} vs rhs {}",
                    lhs.value,
                    rhs.value
                );
            }
        }
    }

    #[test]
    fn finite_type_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let ft = FiniteTypeSpN {
            n: 2,
            terms: (0..3).map(|_| random_sp_term(2, &mut rng)).collect(),
        };
        let text = ft.to_json();
        let back = FiniteTypeSpN::from_json(&text).unwrap();
        assert_eq!(text, back.to_json());
        let g2 = FiniteTypeG2 {
            terms: vec![G2Term {
                coeff: [0.3, -0.7],
                z_exps: [1, -2, 0, 1, 3, 0, -1, 2],
                sin_exps: [0, 1, 2, 0, 1, 0],
                cos_exps: [1, 0, 0, 1, 0, 0],
            }],
        };
        let back2 = FiniteTypeG2::from_json(&g2.to_json()).unwrap();
        assert_eq!(g2.to_json(), back2.to_json());
    }
}
