//! Dense complex matrix kernel.
//!
//! Everything in the crate runs through the carrier type [`CMat`]: group
//! elements, algebra elements, involutions and the symplectic form are all
//! small dense complex matrices. The module owns the matrix exponential
//! (scaling-and-squaring with a fixed Padé(13) approximant, after Higham
//! 2005), the commutator, and structural membership predicates
//! (unitary / special unitary / symplectic / orthogonal / custom).
//!
//! Storage and factorizations are delegated to `nalgebra`; the numerical
//! contracts (backward error of `expm`, residual semantics of `check`) are
//! owned here and pinned by the unit tests.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense square complex matrix, the universal carrier.
pub type CMat = DMatrix<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

/// n×n identity.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// n×n zero matrix.
pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Build a matrix from a list of (row, col, value) triplets (0-indexed).
pub fn from_triplets(n: usize, entries: &[(usize, usize, Complex64)]) -> CMat {
    let mut m = zeros(n);
    for &(i, j, v) in entries {
        m[(i, j)] = v;
    }
    m
}

/// Build a real matrix from (row, col, value) triplets (0-indexed).
pub fn from_real_triplets(n: usize, entries: &[(usize, usize, f64)]) -> CMat {
    let mut m = zeros(n);
    for &(i, j, v) in entries {
        m[(i, j)] = cr(v);
    }
    m
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Real part of the Frobenius inner product Tr(A† B). On the compact
/// algebras handled here (skew-Hermitian matrices) this coincides with
/// -Tr(AB) and is positive definite.
pub fn frobenius_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn require_square(m: &CMat, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what}: expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::Domain(format!("{what}: non-finite entries")));
    }
    Ok(m.nrows())
}

/// Commutator XY - YX.
pub fn bracket(x: &CMat, y: &CMat) -> Result<CMat> {
    let n = require_square(x, "bracket")?;
    let m = require_square(y, "bracket")?;
    if n != m {
        return Err(Error::Dimension(format!("bracket: {n}x{n} vs {m}x{m}")));
    }
    Ok(x * y - y * x)
}

// Padé(13) coefficients, Higham (2005) Eq. (10.33).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// theta_13 from Higham Table 10.2; above this 1-norm we scale.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling-and-squaring with a fixed Padé(13)
/// approximant. All matrices in this crate are at most 14×14, so a single
/// robust fixed-order method suffices; skew-Hermitian inputs yield unitary
/// outputs to ~1e-12 for norms up to ~10.
pub fn expm(x: &CMat) -> Result<CMat> {
    let n = require_square(x, "expm")?;
    if n == 0 {
        return Ok(zeros(0));
    }
    let norm = one_norm(x);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = x * cr(0.5f64.powi(s as i32));

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let id = eye(n);

    // u = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = &a6 * cr(PADE13[13]) + &a4 * cr(PADE13[11]) + &a2 * cr(PADE13[9]);
    let w2 = &a6 * cr(PADE13[7]) + &a4 * cr(PADE13[5]) + &a2 * cr(PADE13[3]) + &id * cr(PADE13[1]);
    let u = &a * (&a6 * &w1 + w2);
    // v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = &a6 * cr(PADE13[12]) + &a4 * cr(PADE13[10]) + &a2 * cr(PADE13[8]);
    let v = &a6 * &z1 + &a6 * cr(PADE13[6]) + &a4 * cr(PADE13[4]) + &a2 * cr(PADE13[2])
        + &id * cr(PADE13[0]);

    // Solve (v - u) r = (v + u).
    let lhs = &v - &u;
    let rhs = &v + &u;
    let lu = lhs.lu();
    let mut r = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Domain("expm: Padé denominator is singular".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// What a [`MatrixPredicate`] tests for.
#[derive(Clone)]
pub enum PredicateKind {
    /// A†A = I.
    Unitary,
    /// A†A = I and det A = 1.
    SpecialUnitary,
    /// A†A = I and J Ā Jᵀ = A for the stored symplectic form J.
    ///
    /// The quaternionic-structure condition is stated with the complex
    /// conjugate: the unconjugated variant fails on diag(U, U*) blocks and
    /// is inconsistent with the 𝔰𝔭(N) algebra block form.
    Symplectic { j_form: CMat },
    /// AᵀA = I (entries must also be real).
    Orthogonal,
    /// Arbitrary residual function (used for the G₂ subspace-invariance
    /// membership test).
    Custom {
        name: String,
        residual: Arc<dyn Fn(&CMat) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateKind::Unitary => write!(f, "Unitary"),
            PredicateKind::SpecialUnitary => write!(f, "SpecialUnitary"),
            PredicateKind::Symplectic { j_form } => {
                write!(f, "Symplectic(dim {})", j_form.nrows())
            }
            PredicateKind::Orthogonal => write!(f, "Orthogonal"),
            PredicateKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A defining-relation membership test with a tolerance.
#[derive(Clone, Debug)]
pub struct MatrixPredicate {
    pub kind: PredicateKind,
    pub tolerance: f64,
}

/// Outcome of a membership check: the boolean verdict and the residual that
/// produced it (max of the defining-relation defect norms).
#[derive(Clone, Copy, Debug)]
pub struct CheckResult {
    pub ok: bool,
    pub residual: f64,
}

/// Default tolerance for structural checks.
pub const STRUCTURAL_TOL: f64 = 1e-12;

impl MatrixPredicate {
    pub fn unitary() -> Self {
        Self { kind: PredicateKind::Unitary, tolerance: STRUCTURAL_TOL }
    }

    pub fn special_unitary() -> Self {
        Self { kind: PredicateKind::SpecialUnitary, tolerance: STRUCTURAL_TOL }
    }

    pub fn symplectic(n: usize) -> Self {
        Self {
            kind: PredicateKind::Symplectic { j_form: symplectic_form(n) },
            tolerance: STRUCTURAL_TOL,
        }
    }

    pub fn orthogonal() -> Self {
        Self { kind: PredicateKind::Orthogonal, tolerance: STRUCTURAL_TOL }
    }

    pub fn custom(
        name: &str,
        residual: Arc<dyn Fn(&CMat) -> f64 + Send + Sync>,
        tolerance: f64,
    ) -> Self {
        Self { kind: PredicateKind::Custom { name: name.into(), residual }, tolerance }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    /// Residual of the defining relations; malformed candidates simply come
    /// back with a large residual rather than an error.
    pub fn residual(&self, a: &CMat) -> f64 {
        if a.nrows() != a.ncols() || !is_finite(a) {
            return f64::INFINITY;
        }
        let n = a.nrows();
        let unitary_defect = |a: &CMat| max_abs(&(a.adjoint() * a - eye(n)));
        match &self.kind {
            PredicateKind::Unitary => unitary_defect(a),
            PredicateKind::SpecialUnitary => {
                let det = a.clone().lu().determinant();
                unitary_defect(a).max((det - C_ONE).norm())
            }
            PredicateKind::Symplectic { j_form } => {
                if j_form.nrows() != n {
                    return f64::INFINITY;
                }
                let conj = a.map(|z| z.conj());
                let structure = max_abs(&(j_form * conj * j_form.transpose() - a));
                unitary_defect(a).max(structure)
            }
            PredicateKind::Orthogonal => {
                let imag = a.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                let defect = max_abs(&(a.transpose() * a - eye(n)));
                imag.max(defect)
            }
            PredicateKind::Custom { residual, .. } => residual(a),
        }
    }

    pub fn check(&self, a: &CMat) -> CheckResult {
        let residual = self.residual(a);
        CheckResult { ok: residual <= self.tolerance, residual }
    }
}

/// The standard symplectic form J = [[0, 1_N], [-1_N, 0]] as a 2N×2N matrix.
pub fn symplectic_form(n: usize) -> CMat {
    let mut j = zeros(2 * n);
    for k in 0..n {
        j[(k, n + k)] = C_ONE;
        j[(n + k, k)] = -C_ONE;
    }
    j
}

/// Cached spectral form of a fixed skew-Hermitian generator, for fast
/// evaluation of its one-parameter subgroup t ↦ exp(tX).
///
/// iX is Hermitian, so X = U (i D) U† with D real diagonal and
/// exp(tX) = U diag(exp(i t d_k)) U†.
#[derive(Clone, Debug)]
pub struct OneParam {
    u: CMat,
    // eigenvalues of -iX (so exp(tX) = U diag(e^{i t d}) U†)
    d: Vec<f64>,
}

impl OneParam {
    /// Precompute the spectral data. `x` must be skew-Hermitian.
    pub fn new(x: &CMat) -> Result<Self> {
        let n = require_square(x, "OneParam")?;
        let skew_defect = max_abs(&(x.adjoint() + x));
        if skew_defect > 1e-12 * (1.0 + max_abs(x)) {
            return Err(Error::Domain(format!(
                "OneParam: generator is not skew-Hermitian (defect {skew_defect:.3e})"
            )));
        }
        // -iX is Hermitian with real eigenvalues d; X = U (i d) U†.
        let herm = x * ci(-1.0);
        let eig = nalgebra::SymmetricEigen::new(herm);
        let d: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let u = eig.eigenvectors;
        debug_assert_eq!(d.len(), n);
        Ok(Self { u, d })
    }

    /// exp(tX).
    pub fn at(&self, t: f64) -> CMat {
        let mut scaled = self.u.clone();
        for (k, &dk) in self.d.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, t * dk);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= phase);
        }
        &scaled * self.u.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: plain Taylor series, accurate for ‖X‖ ≤ 1.
    fn expm_taylor(x: &CMat, terms: usize) -> CMat {
        let n = x.nrows();
        let mut sum = eye(n);
        let mut term = eye(n);
        for k in 1..=terms {
            term = &term * x * cr(1.0 / k as f64);
            sum += &term;
        }
        sum
    }

    fn random_skew_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        let a = CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let sh = (&a - a.adjoint()) * cr(0.5);
        // scale to unit Frobenius norm
        let norm = fro_norm(&sh);
        sh * cr(1.0 / norm)
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm(&zeros(7)).unwrap();
        assert_eq!(max_abs(&(e - eye(7))), 0.0);
    }

    #[test]
    fn expm_rejects_non_square() {
        let m = DMatrix::<Complex64>::zeros(2, 3);
        assert!(matches!(expm(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn expm_matches_taylor_oracle_on_unit_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 5, 7] {
            for _ in 0..20 {
                let x = random_skew_hermitian(n, &mut rng);
                let fast = expm(&x).unwrap();
                let oracle = expm_taylor(&x, 60);
                assert!(
                    max_abs(&(&fast - &oracle)) <= 1e-12,
                    "expm disagrees with Taylor oracle at n={n}"
                );
                let u = MatrixPredicate::unitary().check(&fast);
                assert!(u.ok, "exp of skew-Hermitian not unitary: {}", u.residual);
            }
        }
    }

    #[test]
    fn expm_times_expm_of_negative_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let x = random_skew_hermitian(6, &mut rng) * cr(5.0);
            let a = expm(&x).unwrap();
            let b = expm(&(-&x)).unwrap();
            assert!(max_abs(&(&a * &b - eye(6))) <= 1e-12);
        }
    }

    #[test]
    fn bracket_of_equal_arguments_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_skew_hermitian(5, &mut rng);
        assert_eq!(max_abs(&bracket(&x, &x).unwrap()), 0.0);
    }

    #[test]
    fn bracket_dimension_mismatch_errors() {
        assert!(matches!(bracket(&zeros(2), &zeros(3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn bracket_jacobi_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let x = random_skew_hermitian(6, &mut rng);
            let y = random_skew_hermitian(6, &mut rng);
            let z = random_skew_hermitian(6, &mut rng);
            let j = bracket(&x, &bracket(&y, &z).unwrap()).unwrap()
                + bracket(&y, &bracket(&z, &x).unwrap()).unwrap()
                + bracket(&z, &bracket(&x, &y).unwrap()).unwrap();
            assert!(max_abs(&j) <= 1e-12);
        }
    }

    #[test]
    fn bracket_matches_triple_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_skew_hermitian(7, &mut rng);
        let y = random_skew_hermitian(7, &mut rng);
        let fast = bracket(&x, &y).unwrap();
        // naive entrywise triple loop
        let n = 7;
        let mut slow = zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C_ZERO;
                for k in 0..n {
                    acc += x[(i, k)] * y[(k, j)] - y[(i, k)] * x[(k, j)];
                }
                slow[(i, j)] = acc;
            }
        }
        assert!(max_abs(&(fast - slow)) <= 1e-14);
    }

    #[test]
    fn identity_is_in_every_listed_group() {
        for pred in [
            MatrixPredicate::unitary(),
            MatrixPredicate::special_unitary(),
            MatrixPredicate::orthogonal(),
        ] {
            let r = pred.check(&eye(4));
            assert!(r.ok && r.residual == 0.0);
        }
        let r = MatrixPredicate::symplectic(2).check(&eye(4));
        assert!(r.ok && r.residual == 0.0);
    }

    #[test]
    fn special_unitary_rejects_det_minus_one() {
        let a = from_real_triplets(2, &[(0, 0, -1.0), (1, 1, 1.0)]);
        let r = MatrixPredicate::special_unitary().check(&a);
        assert!(!r.ok);
        assert!((r.residual - 2.0).abs() <= 1e-15, "residual = |det - 1| = 2");
    }

    #[test]
    fn symplectic_check_accepts_quaternionic_unitaries() {
        // diag(U, U*) with U ∈ U(N) satisfies J Ā Jᵀ = A.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_skew_hermitian(3, &mut rng);
        let u = expm(&x).unwrap();
        let mut a = zeros(6);
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = u[(i, j)];
                a[(3 + i, 3 + j)] = u[(i, j)].conj();
            }
        }
        let r = MatrixPredicate::symplectic(3).check(&a);
        assert!(r.ok, "residual {}", r.residual);
    }

    #[test]
    fn one_param_matches_expm() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_skew_hermitian(7, &mut rng);
        let op = OneParam::new(&x).unwrap();
        for t in [-2.0, -0.3, 0.0, 0.7, 3.1] {
            let direct = expm(&(&x * cr(t))).unwrap();
            assert!(max_abs(&(op.at(t) - direct)) <= 1e-12);
        }
    }
}
