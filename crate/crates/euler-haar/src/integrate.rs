//! Quadrature and Monte-Carlo engines.
//!
//! All integrals in the crate reduce to integrals over the unit cube: chart
//! domains and constrained regions are pulled back through smooth maps with
//! explicit Jacobians, circles enter as θ = 2πu. Three rules are provided
//! per axis: Gauss–Legendre (smooth, including fractional-power phases),
//! uniform midpoint circle rules (spectrally exact for integer harmonics),
//! and seeded Monte Carlo with counter-based per-sample streams.
//!
//! Accumulation is deterministic: samples are summed pairwise in fixed chunk
//! order, so identical spec + seed gives bit-identical results regardless of
//! the worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chart::EulerChart;
use crate::linalg::CMat;
use crate::{Error, Result};

/// Per-axis quadrature rule on the unit interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AxisRule {
    /// Gauss–Legendre of the given order, mapped to [0,1].
    GaussLegendre(usize),
    /// Uniform midpoint rule with the given number of points; used for
    /// circle axes (the midpoints avoid the deleted point of S¹∖{1}).
    Circle(usize),
}

impl AxisRule {
    fn coarsened(&self) -> AxisRule {
        // one refinement step back, for the error estimate
        let shrink = |n: usize| ((2 * n + 2) / 3).max(1);
        match self {
            AxisRule::GaussLegendre(n) => AxisRule::GaussLegendre(shrink(*n)),
            AxisRule::Circle(n) => AxisRule::Circle(shrink(*n)),
        }
    }

    fn nodes_weights(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            AxisRule::GaussLegendre(n) => gauss_legendre_unit(*n),
            AxisRule::Circle(n) => {
                let n = *n;
                let nodes = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
                let weights = vec![1.0 / n as f64; n];
                (nodes, weights)
            }
        }
    }
}

/// How to spend the evaluation budget.
#[derive(Clone, Debug)]
pub enum Method {
    /// Tensor-product rule, one [`AxisRule`] per axis.
    Tensor { axes: Vec<AxisRule> },
    /// Plain Monte Carlo on the unit cube.
    MonteCarlo { samples: u64, seed: u64 },
}

impl Method {
    pub fn gauss(dim: usize, order: usize) -> Self {
        Method::Tensor { axes: vec![AxisRule::GaussLegendre(order); dim] }
    }

    pub fn mc(samples: u64, seed: u64) -> Self {
        Method::MonteCarlo { samples, seed }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Method::MonteCarlo { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    fn dim_matches(&self, dim: usize) -> bool {
        match self {
            Method::Tensor { axes } => axes.len() == dim,
            Method::MonteCarlo { .. } => true,
        }
    }
}

/// An integral value with its error estimate (one standard error for Monte
/// Carlo, last-refinement delta for quadrature) and the spent budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evals: u64,
    pub seed: Option<u64>,
}

/// Gauss–Legendre nodes and weights on [0,1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be >= 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..(n + 1) / 2 {
        // Newton on P_n, starting from the Chebyshev-based guess
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d2) = legendre_with_derivative(n, x);
                dp = d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = 0.5 * (1.0 - x);
        nodes[n - 1 - k] = 0.5 * (1.0 + x);
        weights[k] = 0.5 * w;
        weights[n - 1 - k] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Pairwise sum in a fixed order (deterministic, low roundoff).
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

fn pairwise_sum_f64(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum_f64(&values[..mid]) + pairwise_sum_f64(&values[mid..])
        }
    }
}

const CHUNK: u64 = 8192;

/// Raw accumulated statistics of a vector-valued weighted sample stream.
#[derive(Clone, Debug)]
struct Moments {
    n: u64,
    sum_v: Vec<Complex64>,
    sum_v2_re: Vec<f64>,
    sum_v2_im: Vec<f64>,
    sum_vw_re: Vec<f64>,
    sum_vw_im: Vec<f64>,
    sum_w: f64,
    sum_w2: f64,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self {
            n: 0,
            sum_v: vec![Complex64::new(0.0, 0.0); k],
            sum_v2_re: vec![0.0; k],
            sum_v2_im: vec![0.0; k],
            sum_vw_re: vec![0.0; k],
            sum_vw_im: vec![0.0; k],
            sum_w: 0.0,
            sum_w2: 0.0,
        }
    }

    fn push(&mut self, v: &[Complex64], w: f64) {
        self.n += 1;
        self.sum_w += w;
        self.sum_w2 += w * w;
        for (i, &vi) in v.iter().enumerate() {
            self.sum_v[i] += vi;
            self.sum_v2_re[i] += vi.re * vi.re;
            self.sum_v2_im[i] += vi.im * vi.im;
            self.sum_vw_re[i] += vi.re * w;
            self.sum_vw_im[i] += vi.im * w;
        }
    }

    fn merge(mut self, other: &Moments) -> Moments {
        self.n += other.n;
        self.sum_w += other.sum_w;
        self.sum_w2 += other.sum_w2;
        for i in 0..self.sum_v.len() {
            self.sum_v[i] += other.sum_v[i];
            self.sum_v2_re[i] += other.sum_v2_re[i];
            self.sum_v2_im[i] += other.sum_v2_im[i];
            self.sum_vw_re[i] += other.sum_vw_re[i];
            self.sum_vw_im[i] += other.sum_vw_im[i];
        }
        self
    }
}

/// Integrate a vector-valued integrand over the unit cube. The integrand
/// writes its k outputs into the scratch vector and returns the weight
/// sample used for ratio (expectation) estimates; return 1 when a plain
/// integral is wanted.
fn run_unit_cube<F>(
    dim: usize,
    method: &Method,
    k: usize,
    f: F,
) -> Result<(Vec<IntegralResult>, Moments)>
where
    F: Fn(&[f64], &mut Vec<Complex64>) -> f64 + Sync,
{
    if !method.dim_matches(dim) {
        return Err(Error::Dimension(format!(
            "quadrature spec has wrong number of axes for dim {dim}"
        )));
    }
    match method {
        Method::Tensor { axes } => {
            let (results, moments) = run_tensor(axes, k, &f)?;
            let coarse_axes: Vec<AxisRule> = axes.iter().map(|a| a.coarsened()).collect();
            let coarse = if coarse_axes == *axes {
                None
            } else {
                Some(run_tensor(&coarse_axes, k, &f)?)
            };
            let results = results
                .into_iter()
                .enumerate()
                .map(|(i, mut r)| {
                    if let Some((ref c, _)) = coarse {
                        r.error_estimate = (r.value - c[i].value).norm();
                        r.evals += c[i].evals;
                    }
                    r
                })
                .collect();
            Ok((results, moments))
        }
        Method::MonteCarlo { samples, seed } => run_monte_carlo(dim, *samples, *seed, k, &f),
    }
}

fn run_tensor<F>(axes: &[AxisRule], k: usize, f: &F) -> Result<(Vec<IntegralResult>, Moments)>
where
    F: Fn(&[f64], &mut Vec<Complex64>) -> f64 + Sync,
{
    let rules: Vec<(Vec<f64>, Vec<f64>)> = axes.iter().map(|a| a.nodes_weights()).collect();
    let total: u64 = rules.iter().map(|(n, _)| n.len() as u64).product();
    let dim = axes.len();

    let eval_range = |lo: u64, hi: u64| -> Result<(Vec<Complex64>, Moments)> {
        let mut point = vec![0.0; dim];
        let mut vals = vec![Complex64::new(0.0, 0.0); k];
        let mut weighted = vec![Complex64::new(0.0, 0.0); k];
        let mut acc: Vec<Vec<Complex64>> = vec![Vec::new(); k];
        let mut moments = Moments::new(k);
        for idx in lo..hi {
            let mut rem = idx;
            let mut wt = 1.0;
            for (d, (nodes, weights)) in rules.iter().enumerate() {
                let m = nodes.len() as u64;
                let j = (rem % m) as usize;
                rem /= m;
                point[d] = nodes[j];
                wt *= weights[j];
            }
            let w_sample = f(&point, &mut vals);
            if !w_sample.is_finite()
                || vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(Error::Poisoned(format!("{point:?}")));
            }
            for (i, &v) in vals.iter().enumerate() {
                weighted[i] = v * wt;
                acc[i].push(weighted[i]);
            }
            moments.push(&weighted, w_sample * wt);
        }
        Ok((acc.iter().map(|a| pairwise_sum(a)).collect(), moments))
    };

    let n_chunks = total.div_ceil(CHUNK);
    let partials: Result<Vec<(Vec<Complex64>, Moments)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| eval_range(c * CHUNK, ((c + 1) * CHUNK).min(total)))
        .collect();
    let partials = partials?;
    let mut moments = Moments::new(k);
    for (_, m) in &partials {
        moments = moments.merge(m);
    }
    let results = (0..k)
        .map(|i| {
            let sums: Vec<Complex64> = partials.iter().map(|(s, _)| s[i]).collect();
            IntegralResult {
                value: pairwise_sum(&sums),
                error_estimate: 0.0,
                evals: total,
                seed: None,
            }
        })
        .collect();
    Ok((results, moments))
}

fn run_monte_carlo<F>(
    dim: usize,
    samples: u64,
    seed: u64,
    k: usize,
    f: &F,
) -> Result<(Vec<IntegralResult>, Moments)>
where
    F: Fn(&[f64], &mut Vec<Complex64>) -> f64 + Sync,
{
    if samples == 0 {
        return Err(Error::Domain("Monte Carlo budget of zero samples".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let eval_range = |lo: u64, hi: u64| -> Result<Moments> {
        let mut point = vec![0.0; dim];
        let mut vals = vec![Complex64::new(0.0, 0.0); k];
        let mut chunk_m = Moments::new(k);
        let mut rng = base.clone();
        for i in lo..hi {
            // counter-based stream per sample: independent of worker layout
            rng.set_stream(i);
            rng.set_word_pos(0);
            for p in point.iter_mut() {
                *p = rng.gen::<f64>();
            }
            let w_sample = f(&point, &mut vals);
            if !w_sample.is_finite()
                || vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(Error::Poisoned(format!("{point:?}")));
            }
            chunk_m.push(&vals, w_sample);
        }
        Ok(chunk_m)
    };

    let n_chunks = samples.div_ceil(CHUNK);
    let partials: Result<Vec<Moments>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| eval_range(c * CHUNK, ((c + 1) * CHUNK).min(samples)))
        .collect();
    let partials = partials?;
    let mut moments = Moments::new(k);
    for m in &partials {
        moments = moments.merge(m);
    }
    let n = samples as f64;
    let results = (0..k)
        .map(|i| {
            let mean = moments.sum_v[i] / n;
            let var_re = (moments.sum_v2_re[i] / n - mean.re * mean.re).max(0.0);
            let var_im = (moments.sum_v2_im[i] / n - mean.im * mean.im).max(0.0);
            IntegralResult {
                value: mean,
                error_estimate: ((var_re + var_im) / n).sqrt(),
                evals: samples,
                seed: Some(seed),
            }
        })
        .collect();
    Ok((results, moments))
}

/// One axis of a cube×torus product domain.
#[derive(Clone, Debug)]
pub enum Axis {
    /// A closed interval.
    Interval(f64, f64),
    /// A circle, parametrized as θ ∈ [0, 2π); the deleted point of
    /// S¹ ∖ {1} is measure zero and the rules here never sample θ = 0.
    Circle,
}

/// Integrate f·weight over a product of intervals and circles.
///
/// Fractional powers z^{p/q} on circle axes are understood as e^{ipθ/q}
/// with θ ∈ [0, 2π); use Gauss–Legendre axes for them (the midpoint circle
/// rule is spectrally accurate only for integer harmonics).
pub fn integrate_product<F, W>(
    axes: &[Axis],
    method: &Method,
    weight: W,
    f: F,
) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
    W: Fn(&[f64]) -> f64 + Sync,
{
    let dim = axes.len();
    let vol: f64 = axes
        .iter()
        .map(|a| match a {
            Axis::Interval(lo, hi) => hi - lo,
            Axis::Circle => 2.0 * std::f64::consts::PI,
        })
        .product();
    let (results, _) = run_unit_cube(dim, method, 1, |u, out| {
        let point: Vec<f64> = u
            .iter()
            .zip(axes)
            .map(|(ui, a)| match a {
                Axis::Interval(lo, hi) => lo + (hi - lo) * ui,
                Axis::Circle => 2.0 * std::f64::consts::PI * ui,
            })
            .collect();
        let w = weight(&point);
        out[0] = f(&point) * w * vol;
        w
    })?;
    Ok(results[0])
}

/// Integrate a plain integrand over the unit cube through a caller-supplied
/// map u ↦ (point, jacobian). Used for simplex-like constrained domains.
pub fn integrate_mapped<M, F>(dim: usize, method: &Method, map: M, f: F) -> Result<IntegralResult>
where
    M: Fn(&[f64]) -> (Vec<f64>, f64) + Sync,
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let (results, _) = run_unit_cube(dim, method, 1, |u, out| {
        let (point, jac) = map(u);
        out[0] = f(&point) * jac;
        1.0
    })?;
    Ok(results[0])
}

/// What a chart expectation functional sees at each sample.
pub enum Sample<'a> {
    /// Group element and chart parameters.
    Full(&'a CMat, &'a [f64]),
    /// Chart parameters only (the group element is not assembled).
    Params(&'a [f64]),
}

impl<'a> Sample<'a> {
    pub fn matrix(&self) -> &CMat {
        match self {
            Sample::Full(g, _) => g,
            Sample::Params(_) => panic!("parameter-only sample has no matrix"),
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            Sample::Full(_, p) | Sample::Params(p) => p,
        }
    }
}

/// Expectation values against a chart's normalized Haar weight.
///
/// The overall normalization constant (left abstract in the decomposition
/// theorems) is carried implicitly: every returned value is the ratio
/// ∫ f·w / ∫ w over the chart domain, with both integrals sharing every
/// evaluation point.
pub struct ChartIntegrator<'a> {
    pub chart: &'a EulerChart,
    pub method: Method,
}

impl<'a> ChartIntegrator<'a> {
    pub fn new(chart: &'a EulerChart, method: Method) -> Self {
        Self { chart, method }
    }

    /// Normalized expectations of k functionals of the group element.
    pub fn expectations<F>(&self, k: usize, f: F) -> Result<Vec<IntegralResult>>
    where
        F: Fn(&Sample, &mut Vec<Complex64>) + Sync,
    {
        self.run(k, true, f)
    }

    /// Same, but the chart matrix is never assembled (for parameter-only
    /// functionals such as finite-type functions in chart coordinates).
    pub fn expectations_params<F>(&self, k: usize, f: F) -> Result<Vec<IntegralResult>>
    where
        F: Fn(&Sample, &mut Vec<Complex64>) + Sync,
    {
        self.run(k, false, f)
    }

    /// Total weight mass ∫ w dp over the chart domain (unnormalized).
    pub fn mass(&self) -> Result<IntegralResult> {
        let dim = self.chart.dim();
        let (results, _) = run_unit_cube(dim, &self.method, 1, |u, out| {
            let (p, jac) = self.chart.from_unit(u);
            let w = self.chart.jacobian_weight(&p) * jac;
            out[0] = Complex64::new(w, 0.0);
            w
        })?;
        Ok(results[0])
    }

    fn run<F>(&self, k: usize, with_matrix: bool, f: F) -> Result<Vec<IntegralResult>>
    where
        F: Fn(&Sample, &mut Vec<Complex64>) + Sync,
    {
        let dim = self.chart.dim();
        let (raw, moments) = run_unit_cube(dim, &self.method, k, |u, out| {
            let (p, jac) = self.chart.from_unit(u);
            let w = self.chart.jacobian_weight(&p) * jac;
            if with_matrix {
                let g = self.chart.evaluate(&p);
                f(&Sample::Full(&g, &p), out);
            } else {
                f(&Sample::Params(&p), out);
            }
            for v in out.iter_mut() {
                *v *= w;
            }
            w
        })?;

        let n = moments.n as f64;
        let mean_w = moments.sum_w / n;
        if mean_w == 0.0 {
            return Err(Error::Domain("chart weight has zero mass".into()));
        }
        let out = (0..k)
            .map(|i| {
                let mean_v = moments.sum_v[i] / n;
                let est = mean_v / mean_w;
                let err = match &self.method {
                    Method::MonteCarlo { .. } => {
                        // delta method for the ratio estimator, per component
                        let var_w = (moments.sum_w2 / n - mean_w * mean_w).max(0.0);
                        let ratio_var = |mv: f64, sv2: f64, svw: f64| {
                            let var_v = (sv2 / n - mv * mv).max(0.0);
                            let cov_vw = svw / n - mv * mean_w;
                            let r = mv / mean_w;
                            (var_v - 2.0 * r * cov_vw + r * r * var_w).max(0.0)
                                / (mean_w * mean_w)
                        };
                        let vre = ratio_var(mean_v.re, moments.sum_v2_re[i], moments.sum_vw_re[i]);
                        let vim = ratio_var(mean_v.im, moments.sum_v2_im[i], moments.sum_vw_im[i]);
                        ((vre + vim) / n).sqrt()
                    }
                    // the refinement delta of the numerator, scaled by the mass
                    Method::Tensor { .. } => raw[i].error_estimate / mean_w.abs().max(1e-300),
                };
                IntegralResult {
                    value: est,
                    error_estimate: err,
                    evals: raw[i].evals,
                    seed: self.method.seed(),
                }
            })
            .collect();
        Ok(out)
    }
}

/// Haar-distributed Sp(N) samples (N ≤ 2) by structure-preserving
/// Gram–Schmidt of a standard Gaussian quaternionic matrix in its complex
/// 2N×2N form. This is the sampler independent of the Euler charts.
pub fn haar_sample_sp(n: usize, count: usize, seed: u64) -> Result<Vec<CMat>> {
    use crate::linalg::zeros;
    if !(1..=2).contains(&n) {
        return Err(Error::Domain(format!(
            "haar_sample_sp supports N in {{1,2}}, got {n}"
        )));
    }
    let dim = 2 * n;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let j = crate::linalg::symplectic_form(n);

    let sample_one = |index: u64| -> CMat {
        let mut rng = base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        let mut gauss = || {
            // Box-Muller
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        // Gaussian quaternionic matrix Q = A + Bj embedded as
        // [[A, B], [-conj(B), conj(A)]]
        let mut m = zeros(dim);
        for r in 0..n {
            for c in 0..n {
                let a = Complex64::new(gauss(), gauss());
                let b = Complex64::new(gauss(), gauss());
                m[(r, c)] = a;
                m[(r, n + c)] = b;
                m[(n + r, c)] = -b.conj();
                m[(n + r, n + c)] = a.conj();
            }
        }
        // Structure-preserving Gram-Schmidt on quaternionic columns: the
        // complex pair of column u is -J·conj(u).
        let jbar = |v: &nalgebra::DVector<Complex64>| -> nalgebra::DVector<Complex64> {
            let vc = v.map(|z| z.conj());
            &j * vc * Complex64::new(-1.0, 0.0)
        };
        let mut us: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
        for col in 0..n {
            let mut v: nalgebra::DVector<Complex64> = m.column(col).into();
            for u in &us {
                let pair = jbar(u);
                let c1 = u.dotc(&v);
                let c2 = pair.dotc(&v);
                v -= u * c1 + pair * c2;
            }
            let norm = v.norm();
            us.push(v / Complex64::new(norm, 0.0));
        }
        let mut out = zeros(dim);
        for (col, u) in us.iter().enumerate() {
            out.column_mut(col).copy_from(u);
            out.column_mut(n + col).copy_from(&jbar(u));
        }
        out
    };

    Ok((0..count as u64).into_par_iter().map(sample_one).collect())
}

/// Deterministic mean with one standard error over per-sample values.
pub fn mean_and_stderr(values: &[Complex64]) -> (Complex64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean).norm_sqr()).collect();
    let var = pairwise_sum_f64(&sq) / n;
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::MatrixPredicate;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre_unit(8);
        // degree-15 polynomial on [0,1]
        let value: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(15)).sum();
        assert!((value - 1.0 / 16.0).abs() < 1e-14);
        let total: f64 = weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn half_harmonic_circle_integral() {
        // ∫_0^{2π} e^{iθ/2} dθ = 4i, needs the smooth rule
        let axes = [Axis::Circle];
        let method = Method::Tensor { axes: vec![AxisRule::GaussLegendre(40)] };
        let r = integrate_product(&axes, &method, |_| 1.0, |p| {
            Complex64::from_polar(1.0, 0.5 * p[0])
        })
        .unwrap();
        assert!(
            (r.value - Complex64::new(0.0, 4.0)).norm() < 1e-12,
            "got {}",
            r.value
        );
    }

    #[test]
    fn integer_harmonics_on_midpoint_circle_rule_are_exact() {
        let axes = [Axis::Circle];
        let method = Method::Tensor { axes: vec![AxisRule::Circle(16)] };
        for k in 1..10 {
            let r = integrate_product(&axes, &method, |_| 1.0, |p| {
                Complex64::from_polar(1.0, k as f64 * p[0])
            })
            .unwrap();
            assert!(r.value.norm() < 1e-13, "harmonic {k} not killed: {}", r.value);
        }
    }

    #[test]
    fn semicircle_moment() {
        // ∫_0^1 x sqrt(1-x^2) dx = 1/3; the endpoint square root limits a
        // plain rule to algebraic convergence
        let axes = [Axis::Interval(0.0, 1.0)];
        let method = Method::Tensor { axes: vec![AxisRule::GaussLegendre(60)] };
        let r = integrate_product(&axes, &method, |_| 1.0, |p| {
            Complex64::new(p[0] * (1.0 - p[0] * p[0]).sqrt(), 0.0)
        })
        .unwrap();
        assert!((r.value.re - 1.0 / 3.0).abs() < 1e-5);
        // the x = sin(t) pullback removes the singularity entirely
        let smooth = integrate_mapped(
            1,
            &Method::gauss(1, 20),
            |u| {
                let t = 0.5 * std::f64::consts::PI * u[0];
                (vec![t.sin()], 0.5 * std::f64::consts::PI * t.cos())
            },
            |p| Complex64::new(p[0] * (1.0 - p[0] * p[0]).sqrt(), 0.0),
        )
        .unwrap();
        assert!((smooth.value.re - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn ordered_simplex_volume_by_mapping() {
        // ∫ over {0 ≤ ξ2 ≤ ξ1 ≤ 1} of 1, via the nested map
        let method = Method::gauss(2, 20);
        let r = integrate_mapped(
            2,
            &method,
            |u| {
                let xi1 = u[0];
                let xi2 = xi1 * u[1];
                (vec![xi1, xi2], xi1)
            },
            |_| Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert!((r.value.re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_bit_reproducible() {
        let method = Method::mc(20_000, 42);
        let axes = [Axis::Interval(0.0, 1.0), Axis::Circle];
        let f = |p: &[f64]| Complex64::new(p[0] * p[1].cos(), p[0]);
        let r1 = integrate_product(&axes, &method, |_| 1.0, f).unwrap();
        let r2 = integrate_product(&axes, &method, |_| 1.0, f).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn monte_carlo_error_bars_cover_known_value() {
        let method = Method::mc(200_000, 7);
        let axes = [Axis::Interval(0.0, 1.0)];
        let r = integrate_product(&axes, &method, |_| 1.0, |p| {
            Complex64::new(p[0] * p[0], 0.0)
        })
        .unwrap();
        assert!((r.value.re - 1.0 / 3.0).abs() < 4.0 * r.error_estimate);
        assert!(r.error_estimate < 3e-3);
    }

    #[test]
    fn haar_samples_are_symplectic() {
        for n in [1usize, 2] {
            let samples = haar_sample_sp(n, 50, 3).unwrap();
            let pred = MatrixPredicate::symplectic(n).with_tolerance(1e-10);
            for s in &samples {
                let r = pred.check(s);
                assert!(r.ok, "N={n} residual {}", r.residual);
            }
        }
    }

    #[test]
    fn haar_sampler_rejects_large_n() {
        assert!(haar_sample_sp(3, 1, 0).is_err());
    }

    #[test]
    fn haar_sample_first_moment_vanishes() {
        let samples = haar_sample_sp(1, 40_000, 11).unwrap();
        let vals: Vec<Complex64> = samples.iter().map(|g| g[(0, 1)]).collect();
        let (mean, se) = mean_and_stderr(&vals);
        assert!(mean.norm() <= 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn haar_sample_second_moment_is_schur_value() {
        // |g_00|^2 over Sp(1) should be 1/(2N) = 1/2
        let samples = haar_sample_sp(1, 60_000, 5).unwrap();
        let vals: Vec<Complex64> = samples
            .iter()
            .map(|g| Complex64::new(g[(0, 0)].norm_sqr(), 0.0))
            .collect();
        let (mean, se) = mean_and_stderr(&vals);
        assert!((mean.re - 0.5).abs() <= 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn poisoned_integrand_reports_offending_point() {
        let axes = [Axis::Interval(0.0, 1.0)];
        let method = Method::gauss(1, 4);
        let r = integrate_product(&axes, &method, |_| 1.0, |p| {
            Complex64::new(0.0 / (p[0] - p[0]), 0.0)
        });
        assert!(matches!(r, Err(Error::Poisoned(_))));
    }
}
