//! Generic KAK / Euler-angle framework.
//!
//! A compact group enters as a [`GroupSpec`] (matrix dimension, adapted
//! algebra basis, membership predicate). A Cartan involution θ splits the
//! algebra into 𝔨 ⊕ 𝔭; a maximal abelian 𝔞 ⊂ 𝔭 carries restricted roots as
//! rational coordinate vectors, and the decomposition
//! G ≅ (K/M)·exp(𝒜)·K has radial Haar density
//!
//! ```text
//! J(exp(H)) = ∏_{α ∈ Δ⁺} sin(α(iH))
//! ```
//!
//! with the i-bookkeeping absorbed into the rational root coordinates, so
//! each factor is the sine of a real linear form in the radial parameters.
//!
//! Two independent numerical instruments validate every closed form:
//! the Maurer–Cartan density oracle (finite differences of the chart pulled
//! back to an orthonormalized algebra basis) and translation-invariance
//! defects of integrals against the chart measure.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::chart::{ChartParam, EulerChart};
use crate::integrate::{ChartIntegrator, IntegralResult, Method, Sample};
use crate::linalg::{self, bracket, expm, fro_norm, frobenius_inner, max_abs, CMat, MatrixPredicate};
use crate::{Error, Result};

/// Defining data of a compact matrix group at desk scale.
pub struct GroupSpec {
    pub name: String,
    pub matrix_dim: usize,
    /// Ordered real basis of the Lie algebra (skew-Hermitian matrices).
    pub algebra_basis: Vec<CMat>,
    /// Scale c of the invariant bilinear form ⟨X,Y⟩ = c·Tr(XY)
    /// (4 for 𝔰𝔭(N)); recorded for reference, the numerics use the
    /// positive-definite -Tr(XY).
    pub trace_form_scale: f64,
    pub membership: MatrixPredicate,
}

impl GroupSpec {
    pub fn dim(&self) -> usize {
        self.algebra_basis.len()
    }

    /// Gram matrix of the basis under the positive-definite form -Tr(XY)
    /// (= Re Tr(X†Y) on skew-Hermitian matrices).
    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| {
            frobenius_inner(&self.algebra_basis[i], &self.algebra_basis[j])
        })
    }

    /// Real least-squares coordinates of x in the basis span, with the
    /// off-span residual in Frobenius norm.
    pub fn coords(&self, x: &CMat) -> (Vec<f64>, f64) {
        let d = self.dim();
        let gram = self.gram();
        let rhs = nalgebra::DVector::from_fn(d, |i, _| frobenius_inner(&self.algebra_basis[i], x));
        let chol = gram
            .cholesky()
            .expect("algebra basis must be linearly independent");
        let c = chol.solve(&rhs);
        let mut recon = linalg::zeros(self.matrix_dim);
        for (i, b) in self.algebra_basis.iter().enumerate() {
            recon += b * linalg::cr(c[i]);
        }
        let residual = fro_norm(&(x - recon));
        (c.iter().copied().collect(), residual)
    }

    /// Largest least-squares residual of [b_i, b_j] against the basis span;
    /// bracket closure means this stays at rounding level.
    pub fn bracket_closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                let br = bracket(&self.algebra_basis[i], &self.algebra_basis[j])
                    .expect("basis matrices share a dimension");
                let (_, residual) = self.coords(&br);
                worst = worst.max(residual);
            }
        }
        worst
    }

    /// Orthonormalization of the algebra basis under -Tr(XY), used by the
    /// Maurer–Cartan density oracle. Any fixed definite choice only shifts
    /// the chart's global constant.
    pub fn orthonormal_basis(&self) -> Vec<CMat> {
        let mut ortho: Vec<CMat> = Vec::with_capacity(self.dim());
        for b in &self.algebra_basis {
            let mut v = b.clone();
            for e in &ortho {
                let c = frobenius_inner(e, &v);
                v -= e * linalg::cr(c);
            }
            let n = fro_norm(&v);
            assert!(n > 1e-12, "algebra basis is numerically dependent");
            ortho.push(v * linalg::cr(1.0 / n));
        }
        ortho
    }

    /// Smallest-eigenvalue check that the basis is linearly independent.
    pub fn gram_min_eigenvalue(&self) -> f64 {
        self.gram()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

impl std::fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupSpec")
            .field("name", &self.name)
            .field("matrix_dim", &self.matrix_dim)
            .field("algebra_dim", &self.dim())
            .finish()
    }
}

/// A restricted root as a rational coordinate vector on the chosen 𝔞-basis:
/// the root evaluates on H = Σ yⱼ aⱼ as the dot product with (y₁, …).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootFunctional {
    pub coords: Vec<Rational64>,
}

impl RootFunctional {
    pub fn new(coords: Vec<Rational64>) -> Self {
        assert!(
            coords.iter().any(|c| *c != Rational64::from_integer(0)),
            "root functional must be nonzero"
        );
        Self { coords }
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&c| Rational64::from_integer(c)).collect())
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.coords
            .iter()
            .zip(y)
            .map(|(c, v)| c.to_f64().unwrap() * v)
            .sum()
    }

    pub fn negated(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| -c).collect() }
    }
}

/// An affine inequality Σ coeffs·y ≤ rhs·π with rational data.
#[derive(Clone, Debug)]
pub struct AffineConstraint {
    pub coeffs: Vec<Rational64>,
    pub rhs_pi: Rational64,
}

impl AffineConstraint {
    /// rhs·π - Σ coeffs·y (nonnegative inside).
    pub fn slack(&self, y: &[f64]) -> f64 {
        let lhs: f64 = self
            .coeffs
            .iter()
            .zip(y)
            .map(|(c, v)| c.to_f64().unwrap() * v)
            .sum();
        self.rhs_pi.to_f64().unwrap() * std::f64::consts::PI - lhs
    }
}

/// The radial integration region 𝒜: a bounded polytope containing 0 on its
/// closure, cut out by affine inequalities with rational coefficients and
/// right-hand sides that are rational multiples of π.
#[derive(Clone, Debug)]
pub struct RegionSpec {
    pub dim: usize,
    pub constraints: Vec<AffineConstraint>,
    /// Bounding box used for rejection sampling.
    pub bbox: Vec<(f64, f64)>,
}

impl RegionSpec {
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        y.len() == self.dim && self.constraints.iter().all(|c| c.slack(y) >= -tol)
    }

    pub fn interior_slack(&self, y: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.slack(y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Rejection-sample a point with all constraint slacks above `margin`.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R, margin: f64) -> Vec<f64> {
        loop {
            let y: Vec<f64> = self
                .bbox
                .iter()
                .map(|(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                .collect();
            if self.interior_slack(&y) > margin {
                return y;
            }
        }
    }
}

/// An involution's eigensplit with the radial data: 𝔨/𝔭 index sets, the
/// abelian slice 𝔞, positive restricted roots, the region 𝒜 and the finite
/// centralizer group M = Z_K(𝔞).
#[derive(Clone, Debug)]
pub struct CartanData {
    /// Conjugator T of the involution θ = Ad(T).
    pub theta: CMat,
    pub k_basis: Vec<usize>,
    pub p_basis: Vec<usize>,
    pub a_basis: Vec<CMat>,
    pub positive_roots: Vec<RootFunctional>,
    pub region: RegionSpec,
    pub m_group: Vec<CMat>,
}

impl CartanData {
    /// H = Σ yⱼ aⱼ.
    pub fn radial_element(&self, y: &[f64]) -> CMat {
        let mut h = linalg::zeros(self.a_basis[0].nrows());
        for (a, &v) in self.a_basis.iter().zip(y) {
            h += a * linalg::cr(v);
        }
        h
    }

    /// Worst-case ‖Ad(m)H - H‖ over the m-group and the 𝔞-basis.
    pub fn m_centralizes_a_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in &self.m_group {
            let minv = m
                .clone()
                .try_inverse()
                .expect("m-group elements are invertible");
            for a in &self.a_basis {
                worst = worst.max(max_abs(&(m * a * &minv - a)));
            }
        }
        worst
    }

    /// Worst pairwise ‖[aᵢ, aⱼ]‖ (the slice must be abelian).
    pub fn a_abelian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.a_basis.len() {
            for j in (i + 1)..self.a_basis.len() {
                worst = worst.max(max_abs(
                    &bracket(&self.a_basis[i], &self.a_basis[j]).unwrap(),
                ));
            }
        }
        worst
    }

    /// Closure and inverse-closure defect of the finite group M, as the
    /// largest distance from a product or inverse to the listed set.
    pub fn m_closure_defect(&self) -> f64 {
        let dist_to_set = |x: &CMat| -> f64 {
            self.m_group
                .iter()
                .map(|m| max_abs(&(x - m)))
                .fold(f64::INFINITY, f64::min)
        };
        let mut worst: f64 = 0.0;
        for a in &self.m_group {
            worst = worst.max(dist_to_set(&a.clone().try_inverse().unwrap()));
            for b in &self.m_group {
                worst = worst.max(dist_to_set(&(a * b)));
            }
        }
        worst
    }
}

/// Apply θ = Ad(T): X ↦ T X T⁻¹.
pub fn apply_involution(theta: &CMat, x: &CMat) -> CMat {
    let tinv = theta
        .clone()
        .try_inverse()
        .expect("involution conjugator must be invertible");
    theta * x * tinv
}

/// Partition an adapted algebra basis into the +1 and -1 eigenspaces of
/// θ = Ad(T). Errors if θ fails to be involutive on the span or some basis
/// element is not an eigenvector (the basis must be adapted).
pub fn split_by_involution(spec: &GroupSpec, theta: &CMat) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut k_idx = Vec::new();
    let mut p_idx = Vec::new();
    for (i, b) in spec.algebra_basis.iter().enumerate() {
        let tb = apply_involution(theta, b);
        let ttb = apply_involution(theta, &tb);
        let scale = 1.0 + max_abs(b);
        if max_abs(&(&ttb - b)) > 1e-12 * scale {
            return Err(Error::NotAdapted(format!(
                "theta fails to square to the identity on basis element {i}"
            )));
        }
        let plus = max_abs(&(&tb - b));
        let minus = max_abs(&(&tb + b));
        if plus <= 1e-12 * scale {
            k_idx.push(i);
        } else if minus <= 1e-12 * scale {
            p_idx.push(i);
        } else {
            return Err(Error::NotAdapted(format!(
                "basis element {i} is not a theta eigenvector (defects {plus:.2e}/{minus:.2e})"
            )));
        }
    }
    Ok((k_idx, p_idx))
}

/// The Euler-angle radial Jacobian ∏_{α ∈ Δ⁺} sin(α·y).
pub fn generic_jacobian(cd: &CartanData, y: &[f64]) -> f64 {
    cd.positive_roots
        .iter()
        .map(|root| root.eval(y).sin())
        .product()
}

/// Pullback Haar density of a chart at interior parameters: |det M| where
/// column i holds the coordinates, in the orthonormalized algebra basis, of
/// g⁻¹·∂F/∂θᵢ. Central differences with step 1e-6, Richardson-refined once.
/// This equals the chart's Haar density up to one global constant.
pub fn numeric_density_oracle(chart: &EulerChart, params: &[f64]) -> Result<f64> {
    numeric_density_oracle_with_basis(chart, params, &chart.group.orthonormal_basis())
}

/// Same as [`numeric_density_oracle`] but with a precomputed orthonormal
/// basis (saves the Gram–Schmidt when scanning many points).
pub fn numeric_density_oracle_with_basis(
    chart: &EulerChart,
    params: &[f64],
    ortho: &[CMat],
) -> Result<f64> {
    let dim = chart.dim();
    if params.len() != dim {
        return Err(Error::Dimension(format!(
            "chart {} expects {dim} parameters",
            chart.name
        )));
    }
    if chart.boundary_distance(params) < 1e-4 {
        return Err(Error::Boundary(format!(
            "distance {:.2e}",
            chart.boundary_distance(params)
        )));
    }
    if ortho.len() != dim {
        return Err(Error::Dimension(format!(
            "group algebra dimension {} does not match chart parameter count {dim}",
            ortho.len()
        )));
    }
    let g = chart.evaluate(params);
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("chart value is singular".into()))?;

    let h = 1e-6;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut p_plus = params.to_vec();
    let mut p_minus = params.to_vec();
    for i in 0..dim {
        let central = |step: f64, p_plus: &mut [f64], p_minus: &mut [f64]| -> CMat {
            p_plus[i] = params[i] + step;
            p_minus[i] = params[i] - step;
            let d = (chart.evaluate(p_plus) - chart.evaluate(p_minus)) * linalg::cr(0.5 / step);
            p_plus[i] = params[i];
            p_minus[i] = params[i];
            d
        };
        let d_h = central(h, &mut p_plus, &mut p_minus);
        let d_h2 = central(0.5 * h, &mut p_plus, &mut p_minus);
        // one Richardson step kills the O(h^2) truncation term
        let d = (d_h2 * linalg::cr(4.0) - d_h) * linalg::cr(1.0 / 3.0);
        let omega = &ginv * d;
        for (j, e) in ortho.iter().enumerate() {
            m[(j, i)] = frobenius_inner(e, &omega);
        }
    }
    Ok(m.lu().determinant().abs())
}

/// Which side a group translation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A translation-invariance defect together with the error scale of the
/// estimate that produced it.
#[derive(Clone, Copy, Debug)]
pub struct DefectReport {
    pub defect: f64,
    pub std_error: f64,
    pub evals: u64,
}

/// |∫ f(hg) dg - ∫ f(g) dg| (or the right-translate version) against the
/// chart's normalized measure, both integrals sharing every sample point.
/// The defect must shrink to quadrature/Monte-Carlo error if the chart
/// weight is the Haar density.
pub fn haar_invariance_defect<F>(
    chart: &EulerChart,
    h: &CMat,
    f: F,
    side: Side,
    method: &Method,
) -> Result<DefectReport>
where
    F: Fn(&CMat) -> Complex64 + Sync,
{
    let membership = chart.group.membership.check(h);
    if !membership.ok {
        return Err(Error::Membership(format!(
            "translation element fails {} membership (residual {:.3e})",
            chart.group.name, membership.residual
        )));
    }
    let integrator = ChartIntegrator::new(chart, method.clone());
    let results = integrator.expectations(1, |sample, out| {
        let g = sample.matrix();
        let translated = match side {
            Side::Left => h * g,
            Side::Right => g * h,
        };
        out[0] = f(&translated) - f(g);
    })?;
    Ok(DefectReport {
        defect: results[0].value.norm(),
        std_error: results[0].error_estimate,
        evals: results[0].evals,
    })
}

/// Report of the exponential-injectivity probe on int(𝒜).
#[derive(Clone, Copy, Debug)]
pub struct InjectivityReport {
    pub trials: usize,
    pub min_parameter_distance: f64,
    pub min_image_separation: f64,
}

/// Sample pairs H ≠ H' in the interior of 𝒜 (coordinate distance at least
/// 1e-3) and report the smallest ‖exp(H) - exp(H')‖ observed. A strictly
/// positive separation is consistent with exp being injective there.
pub fn exp_injectivity_probe(
    cd: &CartanData,
    trials: usize,
    seed: u64,
) -> Result<InjectivityReport> {
    use rand::SeedableRng;
    if trials == 0 {
        return Err(Error::Domain("at least one trial required".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut min_sep = f64::INFINITY;
    let mut min_dist = f64::INFINITY;
    for _ in 0..trials {
        let y1 = cd.region.sample_interior(&mut rng, 1e-6);
        let y2 = loop {
            let cand = cd.region.sample_interior(&mut rng, 1e-6);
            let dist: f64 = cand
                .iter()
                .zip(&y1)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist >= 1e-3 {
                break cand;
            }
        };
        let dist: f64 = y2
            .iter()
            .zip(&y1)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let e1 = expm(&cd.radial_element(&y1))?;
        let e2 = expm(&cd.radial_element(&y2))?;
        min_sep = min_sep.min(fro_norm(&(e1 - e2)));
        min_dist = min_dist.min(dist);
    }
    Ok(InjectivityReport {
        trials,
        min_parameter_distance: min_dist,
        min_image_separation: min_sep,
    })
}

type RadialExpFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;
type RadialMapFn = Arc<dyn Fn(&[f64]) -> (Vec<f64>, f64) + Send + Sync>;
type RadialJacFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A chart in explicit (K/M)·exp(𝒜)·K form. The concatenated full chart is
/// what integration sees; keeping the three blocks separate is what makes
/// the middle-insertion invariance (g = xak ↦ xahk) testable.
pub struct KakChart {
    pub name: String,
    pub km_chart: EulerChart,
    pub k_chart: EulerChart,
    pub cartan: Arc<CartanData>,
    pub radial_exp: RadialExpFn,
    /// Closed-form radial Jacobian J on 𝒜.
    pub radial_jacobian: RadialJacFn,
    /// Map of the unit cube onto 𝒜 with its volume Jacobian.
    pub radial_map: RadialMapFn,
    pub group: Arc<GroupSpec>,
}

impl KakChart {
    pub fn radial_dim(&self) -> usize {
        self.cartan.region.dim
    }

    /// The concatenated chart (K/M params, radial params, K params).
    pub fn full_chart(&self) -> EulerChart {
        let km = self.km_chart.clone();
        let k = self.k_chart.clone();
        let radial_exp = Arc::clone(&self.radial_exp);
        let radial_jac = Arc::clone(&self.radial_jacobian);
        let radial_map = Arc::clone(&self.radial_map);
        let rdim = self.radial_dim();
        let km_dim = km.dim();
        let region = self.cartan.region.clone();

        let mut params: Vec<ChartParam> = Vec::new();
        for p in &km.params {
            params.push(ChartParam::new(format!("{}~", p.name), p.lo, p.hi));
        }
        for (j, (lo, hi)) in region.bbox.iter().enumerate() {
            params.push(ChartParam::new(format!("y{}", j + 1), *lo, *hi));
        }
        params.extend(k.params.iter().cloned());

        let km_eval = km.clone();
        let k_eval = k.clone();
        let eval = Arc::new(move |p: &[f64]| {
            let a = radial_exp(&p[km_dim..km_dim + rdim]);
            km_eval.evaluate(&p[..km_dim]) * a * k_eval.evaluate(&p[km_dim + rdim..])
        });
        let km_w = km.clone();
        let k_w = k.clone();
        let weight = Arc::new(move |p: &[f64]| {
            km_w.jacobian_weight(&p[..km_dim])
                * radial_jac(&p[km_dim..km_dim + rdim]).abs()
                * k_w.jacobian_weight(&p[km_dim + rdim..])
        });
        let km_m = km.clone();
        let k_m = k.clone();
        let map = Arc::new(move |u: &[f64]| {
            let (p1, j1) = km_m.from_unit(&u[..km_dim]);
            let (y, j2) = radial_map(&u[km_dim..km_dim + rdim]);
            let (p2, j3) = k_m.from_unit(&u[km_dim + rdim..]);
            let mut p = p1;
            p.extend_from_slice(&y);
            p.extend_from_slice(&p2);
            (p, j1 * j2 * j3)
        });

        EulerChart::new(
            self.name.clone(),
            params,
            Arc::clone(&self.group),
            eval,
            weight,
        )
        .with_region(km_dim, region, map)
    }

    /// Invariance defect of the middle insertion g = x·a·k ↦ x·a·h·k for
    /// h ∈ K, estimated with shared sample points.
    pub fn middle_insertion_defect<F>(
        &self,
        h: &CMat,
        f: F,
        method: &Method,
    ) -> Result<DefectReport>
    where
        F: Fn(&CMat) -> Complex64 + Sync,
    {
        let membership = self.k_chart.group.membership.check(h);
        if !membership.ok {
            return Err(Error::Membership(format!(
                "middle insertion element fails K membership (residual {:.3e})",
                membership.residual
            )));
        }
        let full = self.full_chart();
        let km_dim = self.km_chart.dim();
        let rdim = self.radial_dim();
        let radial_exp = Arc::clone(&self.radial_exp);
        let integrator = ChartIntegrator::new(&full, method.clone());
        let results = integrator.expectations_params(1, |sample: &Sample, out| {
            let p = sample.params();
            let x = self.km_chart.evaluate(&p[..km_dim]);
            let a = radial_exp(&p[km_dim..km_dim + rdim]);
            let k = self.k_chart.evaluate(&p[km_dim + rdim..]);
            let plain = &x * &a * &k;
            let inserted = &x * &a * h * &k;
            out[0] = f(&inserted) - f(&plain);
        })?;
        Ok(DefectReport {
            defect: results[0].value.norm(),
            std_error: results[0].error_estimate,
            evals: results[0].evals,
        })
    }
}

/// Constancy report for a pointwise ratio (oracle density / closed form).
#[derive(Clone, Copy, Debug)]
pub struct RatioSpread {
    pub mean: f64,
    pub relative_spread: f64,
    pub points: usize,
}

/// Evaluate `numerator/denominator` over sample points and report the
/// relative spread (max-min over mean); used to verify density ∝ closed
/// form up to one global constant.
pub fn ratio_spread(samples: &[(f64, f64)]) -> RatioSpread {
    let ratios: Vec<f64> = samples.iter().map(|(n, d)| n / d).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    RatioSpread {
        mean,
        relative_spread: (max - min) / mean.abs(),
        points: ratios.len(),
    }
}

/// Convenience: normalized expectation of a single matrix functional.
pub fn chart_expectation<F>(chart: &EulerChart, method: &Method, f: F) -> Result<IntegralResult>
where
    F: Fn(&CMat) -> Complex64 + Sync,
{
    let integrator = ChartIntegrator::new(chart, method.clone());
    let r = integrator.expectations(1, |sample, out| {
        out[0] = f(sample.matrix());
    })?;
    Ok(r[0])
}
