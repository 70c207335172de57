//! Batch verification and conjecture-scan CLI.
//!
//! Commands:
//!   dump-structure <g2|spn|sun> [N]         structural data as JSON
//!   verify <group> [N] <suite> [flags]      run a verification suite
//!   scan-conjecture --input f.json ...      moment scan of an admissible f
//!
//! Standard output is pure JSON (schema 1); progress goes to standard
//! error. Identical configuration and seed produce byte-identical reports.
//! Exit codes: 0 pass/consistent, 1 fail or counterexample flag,
//! 2 inconclusive, 64 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use euler_haar::admissible::{
    moment_scan, zero_in_hull, zero_in_hull_caratheodory, AdmissibleFunction, ScanBudget,
    ScanDomain, ScanStatus,
};
use euler_haar::chart::EulerChart;
use euler_haar::integrate::{haar_sample_sp, mean_and_stderr, ChartIntegrator, Method};
use euler_haar::kak::{
    generic_jacobian, haar_invariance_defect, numeric_density_oracle_with_basis, ratio_spread,
    Side,
};
use euler_haar::linalg::CMat;
use euler_haar::transform::{
    g2_scan_domain, lower_g2, lower_sp_n, lowered_gauss_method, lowered_moment, sp_scan_domain,
    triple_angle_s, FiniteTypeG2, FiniteTypeSpN, G2Term, SpNTerm, SuNMonomial,
};
use euler_haar::{g2, spn, sun};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "euler-haar", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit generators, Cartan split, roots, region and M as JSON.
    DumpStructure(DumpArgs),
    /// Run a verification suite (structure|jacobian|haar|transform|hull).
    Verify(VerifyArgs),
    /// Moment-scan an admissible function file against a weight.
    ScanConjecture(ScanArgs),
}

#[derive(Args)]
struct DumpArgs {
    /// g2, spn or sun
    group: String,
    /// N for spn/sun
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// group, then (for spn/sun) N, then the suite name
    args: Vec<String>,
    /// Gauss-Legendre order for quadrature checks
    #[arg(long)]
    order: Option<usize>,
    /// Monte-Carlo samples (also the point count of sampling checks)
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "pmax", alias = "P", alias = "Pmax", default_value_t = 3)]
    pmax: u32,
    /// Tolerance override for the suite's headline checks
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on worker threads
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// admissible-function JSON document
    #[arg(long)]
    input: PathBuf,
    /// weight selector: unit, sp1, sp2 or g2
    #[arg(long, default_value = "unit")]
    weight: String,
    #[arg(long = "pmax", alias = "P", alias = "Pmax", default_value_t = 4)]
    pmax: u32,
    /// Monte-Carlo samples for the fallback path
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    /// Gauss-Legendre order per cube axis on the expanded path
    #[arg(long, default_value_t = 24)]
    order: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Check {
    name: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let pass = residual <= tolerance;
        Self { name: name.into(), residual, tolerance, pass }
    }
}

fn emit(report: &Value, out: &Option<PathBuf>) -> Result<(), String> {
    let text = format!("{}\n", serde_json::to_string_pretty(report).unwrap());
    if let Some(path) = out {
        std::fs::write(path, &text).map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(64);
        }
    };
    let code = match cli.command {
        Command::DumpStructure(args) => cmd_dump(args),
        Command::Verify(args) => cmd_verify(args),
        Command::ScanConjecture(args) => cmd_scan(args),
    };
    match code {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(64)
        }
    }
}

fn cap_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn cmat_json(m: &CMat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            let row: Vec<Value> = (0..m.ncols())
                .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                .collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

fn roots_json(roots: &[euler_haar::kak::RootFunctional]) -> Value {
    Value::Array(
        roots
            .iter()
            .map(|r| {
                Value::Array(
                    r.coords
                        .iter()
                        .map(|c| Value::String(format!("{}/{}", c.numer(), c.denom())))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn region_json(region: &euler_haar::kak::RegionSpec) -> Value {
    let constraints: Vec<Value> = region
        .constraints
        .iter()
        .map(|c| {
            json!({
                "coeffs": c.coeffs.iter().map(|v| format!("{}/{}", v.numer(), v.denom())).collect::<Vec<_>>(),
                "rhs_pi": format!("{}/{}", c.rhs_pi.numer(), c.rhs_pi.denom()),
            })
        })
        .collect();
    json!({ "dim": region.dim, "constraints": constraints })
}

// --- dump-structure -----------------------------------------------------

fn cmd_dump(args: DumpArgs) -> Result<ExitCode, String> {
    let body = match args.group.as_str() {
        "g2" => {
            let ctx = g2::G2Context::new().map_err(|e| e.to_string())?;
            let gens: Vec<Value> = (1..=14).map(|j| cmat_json(&g2::lambda(j))).collect();
            json!({
                "group": "G2",
                "matrix_dim": 7,
                "generators": gens,
                "generator_count": 14,
                "k_basis": ctx.cartan.k_basis.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "p_basis": ctx.cartan.p_basis.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "a_basis": [5, 11],
                "positive_roots": roots_json(&ctx.cartan.positive_roots),
                "positive_root_count": ctx.cartan.positive_roots.len(),
                "region": region_json(&ctx.cartan.region),
                "m_group": ctx.cartan.m_group.iter().map(cmat_json).collect::<Vec<_>>(),
                "m_order": ctx.cartan.m_group.len(),
            })
        }
        "spn" => {
            let n = args.n.ok_or("spn requires N")?;
            let ctx = spn::SpNContext::new(n).map_err(|e| e.to_string())?;
            json!({
                "group": format!("Sp({n})"),
                "matrix_dim": 2 * n,
                "algebra_dim": ctx.group.dim(),
                "a_basis": ctx.cartan.a_basis.iter().map(cmat_json).collect::<Vec<_>>(),
                "positive_roots": roots_json(&ctx.cartan.positive_roots),
                "positive_root_count": ctx.cartan.positive_roots.len(),
                "region": region_json(&ctx.cartan.region),
                "m_group": ctx.cartan.m_group.iter().map(cmat_json).collect::<Vec<_>>(),
                "m_order": ctx.cartan.m_group.len(),
            })
        }
        "sun" => {
            let n = args.n.ok_or("sun requires N")?;
            let basis = sun::SuNBasis::new(n);
            let gens: Vec<Value> = (0..n * n).map(|j| cmat_json(basis.lambda(j))).collect();
            json!({
                "group": format!("U({n})"),
                "matrix_dim": n,
                "generators": gens,
                "generator_count": n * n,
            })
        }
        other => return Err(format!("unknown group {other:?}")),
    };
    let report = json!({ "schema": 1, "command": "dump-structure", "data": body });
    emit(&report, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

// --- verify ---------------------------------------------------------------

struct VerifyConfig {
    order: usize,
    samples: u64,
    seed: u64,
    pmax: u32,
    tol: Option<f64>,
    explicit_samples: bool,
}

type SuiteOutcome = (Vec<Check>, bool);

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    cap_threads(args.threads);
    let (group, n, suite) = match args.args.as_slice() {
        [g, s] if g == "g2" || s == "hull" => (g.clone(), None, s.clone()),
        [g, n, s] if g == "spn" || g == "sun" => {
            let n: usize = n.parse().map_err(|_| format!("bad N {n:?}"))?;
            (g.clone(), Some(n), s.clone())
        }
        _ => {
            return Err(
                "expected: verify g2 <suite> | verify spn <N> <suite> | verify sun <N> <suite> \
                 | verify g2 hull"
                    .into(),
            )
        }
    };
    let cfg = VerifyConfig {
        order: args.order.unwrap_or(24),
        samples: args.samples.unwrap_or(200_000),
        seed: args.seed,
        pmax: args.pmax,
        tol: args.tol,
        explicit_samples: args.samples.is_some(),
    };
    eprintln!("verify {group} {n:?} {suite}: starting");
    let (checks, inconclusive) = match suite.as_str() {
        "structure" => suite_structure(&group, n, &cfg)?,
        "jacobian" => suite_jacobian(&group, n, &cfg)?,
        "haar" => suite_haar(&group, n, &cfg)?,
        "transform" => suite_transform(&group, n, &cfg)?,
        "hull" => suite_hull(&cfg)?,
        other => return Err(format!("unknown suite {other:?}")),
    };

    let status = if inconclusive {
        "inconclusive"
    } else if checks.iter().all(|c| c.pass) {
        "pass"
    } else {
        "fail"
    };
    let max_residual = checks.iter().map(|c| c.residual).fold(0.0f64, f64::max);
    let report = json!({
        "schema": 1,
        "command": "verify",
        "group": group,
        "n": n,
        "suite": suite,
        "config": {
            "order": cfg.order,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "pmax": cfg.pmax,
            "tol": cfg.tol,
        },
        "checks": checks.iter().map(|c| serde_json::to_value(c).unwrap()).collect::<Vec<_>>(),
        "max_residual": max_residual,
        "status": status,
    });
    emit(&report, &args.out)?;
    Ok(match status {
        "pass" => ExitCode::SUCCESS,
        "inconclusive" => ExitCode::from(2),
        _ => ExitCode::from(1),
    })
}

fn suite_structure(
    group: &str,
    n: Option<usize>,
    cfg: &VerifyConfig,
) -> Result<SuiteOutcome, String> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match group {
        "g2" => {
            let ctx = g2::G2Context::new().map_err(|e| e.to_string())?;
            checks.push(Check::new(
                "generator independence (1/2 - min gram eigenvalue)",
                (0.5 - ctx.group.gram_min_eigenvalue()).max(0.0),
                0.0,
            ));
            checks.push(Check::new(
                "bracket-closure residual",
                ctx.group.bracket_closure_residual(),
                1e-10,
            ));
            for (which, table) in [
                (5usize, g2::tabulated_ad_lambda5()),
                (11, g2::tabulated_ad_lambda11()),
            ] {
                let m = g2::ad_matrix(which).map_err(|e| e.to_string())?;
                let mut worst: f64 = 0.0;
                for i in 0..12 {
                    for j in 0..12 {
                        worst = worst.max((m[(i, j)] - table[i][j] as f64).abs());
                    }
                }
                checks.push(Check::new(format!("ad(lambda{which}) entrywise"), worst, 1e-12));
            }
            let roots = g2::extract_roots().map_err(|e| e.to_string())?;
            let got: std::collections::BTreeSet<(i64, i64)> = roots
                .iter()
                .map(|r| (*r.coords[0].numer(), *r.coords[1].numer()))
                .collect();
            let want: std::collections::BTreeSet<(i64, i64)> =
                g2::root_system_coords().into_iter().collect();
            let mismatch = got.symmetric_difference(&want).count();
            checks.push(Check::new("root-system recovery", mismatch as f64, 0.0));
            let mut worst_eigen: f64 = 0.0;
            for (root, v) in &ctx.root_spaces {
                let scale = euler_haar::linalg::fro_norm(v);
                for (h, c) in [
                    (g2::lambda(5), root.coords[0]),
                    (g2::lambda(11), root.coords[1]),
                ] {
                    let ad = euler_haar::linalg::bracket(&h, v).map_err(|e| e.to_string())?;
                    let cv = num_traits::ToPrimitive::to_f64(&c).unwrap();
                    let want = v * Complex64::new(0.0, cv);
                    worst_eigen =
                        worst_eigen.max(euler_haar::linalg::fro_norm(&(ad - want)) / scale);
                }
            }
            checks.push(Check::new("root-space eigen-equations", worst_eigen, 1e-10));
            checks.push(Check::new("M closure", ctx.cartan.m_closure_defect(), 1e-12));
            checks.push(Check::new(
                "M centralizes the radial slice",
                ctx.cartan.m_centralizes_a_defect(),
                1e-12,
            ));
        }
        "spn" => {
            let n = n.ok_or("spn requires N")?;
            let ctx = spn::SpNContext::new(n).map_err(|e| e.to_string())?;
            checks.push(Check::new(
                "radial generators commute",
                ctx.cartan.a_abelian_defect(),
                0.0,
            ));
            checks.push(Check::new(
                "positive-root count = N^2",
                (ctx.cartan.positive_roots.len() as i64 - (n * n) as i64).abs() as f64,
                0.0,
            ));
            checks.push(Check::new(
                "M order = 2^N",
                (ctx.cartan.m_group.len() as i64 - (1i64 << n)).abs() as f64,
                0.0,
            ));
            checks.push(Check::new("M closure", ctx.cartan.m_closure_defect(), 0.0));
            checks.push(Check::new(
                "M centralizes the radial slice",
                ctx.cartan.m_centralizes_a_defect(),
                0.0,
            ));
            if n <= 2 {
                checks.push(Check::new(
                    "bracket-closure residual",
                    ctx.group.bracket_closure_residual(),
                    1e-10,
                ));
            }
            let chart = ctx.chart().map_err(|e| e.to_string())?;
            let mut worst: f64 = 0.0;
            let mut worst_det: f64 = 0.0;
            for _ in 0..50 {
                let p = chart.sample_interior(&mut rng, 0.0);
                let g = chart.evaluate(&p);
                worst = worst.max(ctx.group.membership.residual(&g));
                let det = g.clone().lu().determinant();
                worst_det = worst_det.max((det - Complex64::ONE).norm());
            }
            checks.push(Check::new("chart outputs pass membership", worst, 1e-12));
            checks.push(Check::new("chart determinant = 1", worst_det, 1e-12));
        }
        "sun" => {
            let n = n.ok_or("sun requires N")?;
            let basis = sun::SuNBasis::new(n);
            let mut worst: f64 = 0.0;
            for idx in 0..n * n {
                let l = basis.lambda(idx);
                worst = worst.max(euler_haar::linalg::max_abs(&(l.adjoint() + l)));
            }
            checks.push(Check::new("generators skew-Hermitian", worst, 0.0));
            let g = sun::su_group(n);
            checks.push(Check::new(
                "bracket-closure residual",
                g.bracket_closure_residual(),
                1e-10,
            ));
            let chart = sun::build_u_n(n).map_err(|e| e.to_string())?;
            let mut worst_mem: f64 = 0.0;
            let mut worst_det: f64 = 0.0;
            for _ in 0..50 {
                let p = chart.sample_interior(&mut rng, 0.0);
                let u = chart.evaluate(&p);
                worst_mem = worst_mem.max(chart.group.membership.residual(&u));
                let det = u.clone().lu().determinant();
                let xi = p[chart.dim() - 1];
                worst_det = worst_det.max((det - Complex64::from_polar(1.0, xi)).norm());
            }
            checks.push(Check::new("chart outputs unitary", worst_mem, 1e-12));
            checks.push(Check::new("det F_U = e^(i xi)", worst_det, 1e-12));
        }
        other => return Err(format!("unknown group {other:?}")),
    }
    Ok((checks, false))
}

fn density_ratio_check(
    chart: &EulerChart,
    closed: impl Fn(&[f64]) -> f64,
    points: usize,
    rng: &mut ChaCha8Rng,
    fiber_block: Option<(usize, usize)>,
) -> Result<Check, String> {
    let ortho = chart.group.orthonormal_basis();
    let base = chart.sample_interior(rng, 0.15);
    let mut samples = Vec::with_capacity(points);
    for _ in 0..points {
        let p = match fiber_block {
            None => chart.sample_interior(rng, 0.05),
            Some((start, len)) => {
                // vary only the radial block; the K factors stay fixed
                let fresh = chart.sample_interior(rng, 0.05);
                let mut p = base.clone();
                p[start..start + len].copy_from_slice(&fresh[start..start + len]);
                p
            }
        };
        let density =
            numeric_density_oracle_with_basis(chart, &p, &ortho).map_err(|e| e.to_string())?;
        samples.push((density, closed(&p)));
    }
    let spread = ratio_spread(&samples);
    Ok(Check::new(
        format!("density-oracle ratio spread over {points} points"),
        spread.relative_spread,
        1e-5,
    ))
}

fn suite_jacobian(
    group: &str,
    n: Option<usize>,
    cfg: &VerifyConfig,
) -> Result<SuiteOutcome, String> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points = cfg.samples.clamp(10, 200) as usize;
    match group {
        "g2" => {
            let ctx = g2::G2Context::new().map_err(|e| e.to_string())?;
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let y = ctx.cartan.region.sample_interior(&mut rng, 0.0);
                let a = g2::jacobian_g2(y[0], y[1]);
                let b = generic_jacobian(&ctx.cartan, &y);
                worst = worst.max((a - b).abs() / (1.0 + a.abs()));
            }
            checks.push(Check::new("closed form vs root product", worst, 1e-13));
            let chart = ctx.chart().map_err(|e| e.to_string())?;
            let closed = |p: &[f64]| {
                p[1].cos() * p[1].sin() * p[4].cos() * p[4].sin()
                    * g2::jacobian_g2(p[6], p[7])
                    * p[9].cos() * p[9].sin() * p[12].cos() * p[12].sin()
            };
            checks.push(density_ratio_check(&chart, closed, points, &mut rng, None)?);
        }
        "spn" => {
            let n = n.ok_or("spn requires N")?;
            let ctx = spn::SpNContext::new(n).map_err(|e| e.to_string())?;
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let y = ctx.cartan.region.sample_interior(&mut rng, 0.0);
                let a = spn::jacobian_sp_n(&y);
                let b = generic_jacobian(&ctx.cartan, &y);
                worst = worst.max((a - b).abs() / (1.0 + a.abs()));
            }
            checks.push(Check::new("closed form vs root product", worst, 1e-13));
            let chart = ctx.chart().map_err(|e| e.to_string())?;
            let udim = n * n;
            if n == 1 {
                let closed = move |p: &[f64]| spn::jacobian_sp_n(&p[udim..udim + 1]);
                checks.push(density_ratio_check(&chart, closed, points, &mut rng, None)?);
            } else {
                // the U(N≥3) K-density has no closed form here: freeze the K
                // blocks and scan the radial fiber, where density ∝ J(y)
                let closed = move |p: &[f64]| spn::jacobian_sp_n(&p[udim..udim + n]);
                checks.push(density_ratio_check(
                    &chart,
                    closed,
                    points,
                    &mut rng,
                    Some((udim, n)),
                )?);
            }
        }
        other => return Err(format!("jacobian suite supports g2/spn, got {other:?}")),
    }
    Ok((checks, false))
}

fn suite_haar(group: &str, n: Option<usize>, cfg: &VerifyConfig) -> Result<SuiteOutcome, String> {
    if cfg.explicit_samples && cfg.samples == 0 {
        return Ok((Vec::new(), true));
    }
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match group {
        "g2" => {
            let ctx = g2::G2Context::new().map_err(|e| e.to_string())?;
            let kak = ctx.kak_chart().map_err(|e| e.to_string())?;
            let chart = kak.full_chart();
            let method = Method::mc(cfg.samples, cfg.seed);
            for trial in 0..2 {
                let hp = chart.sample_interior(&mut rng, 0.05);
                let h = chart.evaluate(&hp);
                for side in [Side::Left, Side::Right] {
                    let f = |g: &CMat| g[(0, 0)];
                    let d = haar_invariance_defect(&chart, &h, f, side, &method)
                        .map_err(|e| e.to_string())?;
                    checks.push(Check::new(
                        format!("{side:?} translation defect (trial {trial})"),
                        d.defect,
                        3.0 * d.std_error + 1e-9,
                    ));
                }
                let kp = kak.k_chart.sample_interior(&mut rng, 0.05);
                let hk = kak.k_chart.evaluate(&kp);
                let d = kak
                    .middle_insertion_defect(&hk, |g: &CMat| g[(1, 2)], &method)
                    .map_err(|e| e.to_string())?;
                checks.push(Check::new(
                    format!("middle insertion defect (trial {trial})"),
                    d.defect,
                    3.0 * d.std_error + 1e-9,
                ));
            }
            let integrator = ChartIntegrator::new(&chart, method);
            let r = integrator
                .expectations(1, |s, out| {
                    let g = s.matrix();
                    out[0] = g[(0, 0)] * g[(0, 0)];
                })
                .map_err(|e| e.to_string())?[0];
            checks.push(Check::new(
                "Schur moment E[g11^2] = 1/7",
                (r.value.re - 1.0 / 7.0).abs(),
                3.0 * r.error_estimate,
            ));
        }
        "spn" => {
            let n = n.ok_or("spn requires N")?;
            let ctx = spn::SpNContext::new(n).map_err(|e| e.to_string())?;
            let kak = ctx.kak_chart().map_err(|e| e.to_string())?;
            let chart = kak.full_chart();
            let quadrature = n == 1;
            let method = if quadrature {
                Method::gauss(chart.dim(), cfg.order.max(24))
            } else {
                Method::mc(cfg.samples, cfg.seed)
            };
            for trial in 0..2 {
                let hp = chart.sample_interior(&mut rng, 0.05);
                let h = chart.evaluate(&hp);
                for side in [Side::Left, Side::Right] {
                    let f = |g: &CMat| g[(0, 1)];
                    let d = haar_invariance_defect(&chart, &h, f, side, &method)
                        .map_err(|e| e.to_string())?;
                    let tol = if quadrature {
                        cfg.tol.unwrap_or(1e-6)
                    } else {
                        3.0 * d.std_error + 1e-9
                    };
                    checks.push(Check::new(
                        format!("{side:?} translation defect (trial {trial})"),
                        d.defect,
                        tol,
                    ));
                }
            }
            let integrator = ChartIntegrator::new(&chart, method.clone());
            let r = integrator
                .expectations(1, |s, out| {
                    let g = s.matrix();
                    out[0] = Complex64::new(g[(0, 0)].norm_sqr(), 0.0);
                })
                .map_err(|e| e.to_string())?[0];
            let want = 1.0 / (2.0 * n as f64);
            let tol = if quadrature {
                cfg.tol.unwrap_or(1e-6)
            } else {
                3.0 * r.error_estimate
            };
            checks.push(Check::new(
                format!("Schur moment E|g11|^2 = 1/{}", 2 * n),
                (r.value.re - want).abs(),
                tol,
            ));
            if n <= 2 {
                // the quaternionic Gram-Schmidt sampler is the independent
                // oracle for the chart measure
                let count = (cfg.samples as usize).clamp(1000, 300_000);
                let samples = haar_sample_sp(n, count, cfg.seed).map_err(|e| e.to_string())?;
                let vals: Vec<Complex64> = samples
                    .iter()
                    .map(|g| Complex64::new(g[(0, 0)].norm_sqr(), 0.0))
                    .collect();
                let (mean, se) = mean_and_stderr(&vals);
                let joint = 3.0 * (se * se + r.error_estimate * r.error_estimate).sqrt() + 1e-6;
                checks.push(Check::new(
                    "sampler vs chart second moment",
                    (mean.re - r.value.re).abs(),
                    joint,
                ));
            }
        }
        other => return Err(format!("haar suite supports g2/spn, got {other:?}")),
    }
    Ok((checks, false))
}

fn random_sp_finite_type(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> FiniteTypeSpN {
    let pairs = n * (n - 1) / 2;
    let mono = |rng: &mut ChaCha8Rng| SuNMonomial {
        phi_exps: (0..pairs).map(|_| rng.gen_range(-2..=2)).collect(),
        psi_sin: (0..pairs).map(|_| rng.gen_range(0..=2)).collect(),
        psi_cos: (0..pairs).map(|_| rng.gen_range(0..=1)).collect(),
        omega_exps: (0..n - 1).map(|_| rng.gen_range(-2..=2)).collect(),
    };
    FiniteTypeSpN {
        n,
        terms: (0..terms)
            .map(|_| SpNTerm {
                coeff: [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5],
                tilde: mono(rng),
                m_tilde: rng.gen_range(-2..=2),
                radial_sin: (0..n).map(|_| rng.gen_range(0..=2)).collect(),
                radial_cos: (0..n).map(|_| rng.gen_range(0..=1)).collect(),
                plain: mono(rng),
                n_plain: rng.gen_range(-2..=2),
            })
            .collect(),
    }
}

fn random_g2_finite_type(terms: usize, rng: &mut ChaCha8Rng) -> FiniteTypeG2 {
    FiniteTypeG2 {
        terms: (0..terms)
            .map(|_| G2Term {
                coeff: [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5],
                z_exps: std::array::from_fn(|_| rng.gen_range(-2..=2)),
                sin_exps: std::array::from_fn(|_| rng.gen_range(0..=2)),
                cos_exps: std::array::from_fn(|_| rng.gen_range(0..=1)),
            })
            .collect(),
    }
}

fn suite_transform(
    group: &str,
    n: Option<usize>,
    cfg: &VerifyConfig,
) -> Result<SuiteOutcome, String> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match group {
        "spn" => {
            let n = n.ok_or("spn requires N")?;
            if n != 1 {
                return Err("quadrature transform verification is wired for spn 1".into());
            }
            let ctx = spn::SpNContext::new(1).map_err(|e| e.to_string())?;
            let chart = ctx.chart().map_err(|e| e.to_string())?;
            let order = cfg.order.max(32);
            let tol = cfg.tol.unwrap_or(1e-6);
            let pmax = cfg.pmax.clamp(1, 3);
            for trial in 0..3 {
                let ft = random_sp_finite_type(1, 2, &mut rng);
                let lowered = lower_sp_n(&ft).map_err(|e| e.to_string())?;
                let method_rhs = lowered_gauss_method(&lowered, order, order);
                for p in 1..=pmax {
                    let integrator = ChartIntegrator::new(&chart, Method::gauss(3, order));
                    let lhs = integrator
                        .expectations_params(1, |s, out| {
                            out[0] = ft.eval(s.params()).powu(p);
                        })
                        .map_err(|e| e.to_string())?[0];
                    let rhs =
                        lowered_moment(&lowered, p, &method_rhs).map_err(|e| e.to_string())?;
                    checks.push(Check::new(
                        format!("LHS = RHS (trial {trial}, P = {p})"),
                        (lhs.value - rhs.value).norm(),
                        tol,
                    ));
                }
            }
            let mut fitted: Option<f64> = None;
            let mut drift: f64 = 0.0;
            for _ in 0..50 {
                let y = ctx.cartan.region.sample_interior(&mut rng, 1e-3);
                let lhs = euler_haar::transform::jtilde_sp_n(1, &[], &[], &[y[0].sin()])
                    .map_err(|e| e.to_string())?
                    * y[0].cos();
                let rhs = spn::jacobian_sp_n(&y);
                let ratio = lhs / rhs;
                match fitted {
                    None => fitted = Some(ratio),
                    Some(c) => drift = drift.max(((ratio - c) / c).abs()),
                }
            }
            checks.push(Check::new(
                "weight pullback proportional to radial Jacobian",
                drift,
                1e-10,
            ));
        }
        "g2" => {
            let ctx = g2::G2Context::new().map_err(|e| e.to_string())?;
            let chart = ctx.chart().map_err(|e| e.to_string())?;
            let method = Method::mc(cfg.samples, cfg.seed);
            for trial in 0..2 {
                let ft = random_g2_finite_type(1, &mut rng);
                let lowered = lower_g2(&ft).map_err(|e| e.to_string())?;
                for p in 1..=cfg.pmax.clamp(1, 2) {
                    let integrator = ChartIntegrator::new(&chart, method.clone());
                    let lhs = integrator
                        .expectations_params(1, |s, out| {
                            out[0] = ft.eval(s.params()).powu(p);
                        })
                        .map_err(|e| e.to_string())?[0];
                    let rhs = lowered_moment(&lowered, p, &method).map_err(|e| e.to_string())?;
                    let joint = 3.0
                        * (lhs.error_estimate.powi(2) + rhs.error_estimate.powi(2)).sqrt()
                        + 1e-9;
                    checks.push(Check::new(
                        format!("LHS = RHS (trial {trial}, P = {p})"),
                        (lhs.value - rhs.value).norm(),
                        joint,
                    ));
                }
            }
            let mut fitted: Option<f64> = None;
            let mut drift: f64 = 0.0;
            for _ in 0..100 {
                let y = ctx.cartan.region.sample_interior(&mut rng, 1e-3);
                let lhs = euler_haar::transform::jtilde_g2(y[0].sin(), y[1].sin())
                    * y[0].cos()
                    * y[1].cos();
                let rhs = g2::jacobian_g2(y[0], y[1]);
                let ratio = lhs / rhs;
                match fitted {
                    None => fitted = Some(ratio),
                    Some(c) => drift = drift.max(((ratio - c) / c).abs()),
                }
            }
            checks.push(Check::new(
                "weight pullback proportional to radial Jacobian",
                drift,
                1e-10,
            ));
            let mut worst: f64 = 0.0;
            for i in 0..=1000 {
                let xi = i as f64 / 1000.0;
                let s = triple_angle_s(xi);
                worst = worst.max((4.0 * s * s * s - 3.0 * s + xi).abs());
            }
            checks.push(Check::new("triple-angle cubic residual", worst, 1e-14));
        }
        other => return Err(format!("transform suite supports spn 1 / g2, got {other:?}")),
    }
    Ok((checks, false))
}

fn suite_hull(cfg: &VerifyConfig) -> Result<SuiteOutcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases = cfg.samples.clamp(10, 5000) as usize;
    let mut disagreements = 0usize;
    for _ in 0..cases {
        let dim = rng.gen_range(1..=4);
        let count = rng.gen_range(1..=8);
        let points: Vec<Vec<num_rational::Rational64>> = (0..count)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        num_rational::Rational64::new(rng.gen_range(-6..=6), rng.gen_range(1..=4))
                    })
                    .collect()
            })
            .collect();
        let fast = zero_in_hull(&points).map_err(|e| e.to_string())?;
        let slow = zero_in_hull_caratheodory(&points).map_err(|e| e.to_string())?;
        if fast != slow {
            disagreements += 1;
        }
    }
    let checks = vec![Check::new(
        format!("simplex vs Caratheodory on {cases} instances"),
        disagreements as f64,
        0.0,
    )];
    Ok((checks, false))
}

// --- scan-conjecture ------------------------------------------------------

fn cmd_scan(args: ScanArgs) -> Result<ExitCode, String> {
    cap_threads(args.threads);
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("reading {}: {e}", args.input.display()))?;
    let f = AdmissibleFunction::from_json(&text).map_err(|e| e.to_string())?;
    let domain: ScanDomain = match args.weight.as_str() {
        "unit" => ScanDomain::unit(f.k, f.l),
        "g2" => g2_scan_domain(),
        "sp1" => sp_scan_domain(1).map_err(|e| e.to_string())?,
        "sp2" => sp_scan_domain(2).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown weight {other:?}")),
    };
    let budget = ScanBudget {
        expand_guard: 1_000_000,
        cube_order: args.order,
        mc_samples: args.samples,
        seed: args.seed,
    };
    eprintln!(
        "scan-conjecture: f with {} terms on [0,1]^{}x T^{}, weight {}",
        f.term_count(),
        f.k,
        f.l,
        domain.name
    );
    let report = moment_scan(&f, &domain, args.pmax, &budget).map_err(|e| e.to_string())?;
    let body = json!({
        "schema": 1,
        "command": "scan-conjecture",
        "input": args.input.display().to_string(),
        "config": {
            "weight": args.weight,
            "pmax": args.pmax,
            "samples": args.samples,
            "order": args.order,
            "seed": args.seed,
        },
        "function": {
            "k": f.k,
            "l": f.l,
            "terms": f.term_count(),
            "max_denominator": f.max_denominator(),
            "admissible": f.is_admissible(),
        },
        "report": serde_json::to_value(&report).unwrap(),
    });
    emit(&body, &args.out)?;
    Ok(match report.status {
        ScanStatus::PotentialCounterexample => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    })
}
