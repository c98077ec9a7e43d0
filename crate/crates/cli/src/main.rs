//! Batch front end: one subcommand per module, strict JSON configs, reproducible outputs.

mod config;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use config::{emit, record, resolve, split, CliError, CliResult, Window};
use robin_wander::fem::{
    assemble, assemble_neumann, extract_in_out, matching_radii, solve_window, RobinProfile, SolverOptions, Strategy,
};
use robin_wander::kernel::{evaluate, RadialKernelParams};
use robin_wander::mesh::{build_half_disk_mesh, HalfDiskMesh};
use robin_wander::oracle::{derivative_check, extension_eigenvalues, mode0_eigenvalues, reflection_theta, SingularBasis};
use robin_wander::plot::{emit_plot, PlotKind, PlotOptions, Table};
use robin_wander::transverse::{transverse_spectrum, Variant};
use robin_wander::wandering::{
    check_log_periodicity, fit_offset, fit_offset_halves, oracle_coverage, run_sweep, write_mismatch_csv,
    write_sweep_dir, EpsGrid, ExtensionOracle, SweepConfig,
};
use robin_wander::acceptance;

#[derive(Parser)]
#[command(name = "robin-wander", version, about = "Spectra of a singular Robin Laplacian on the half-disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Io {
    /// Flat JSON file with the command's parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (directory for `sweep`); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Transverse eigenvalues of the Robin problem on the half-circle.
    Transverse(With<TransverseParams>),
    /// Eigenvalues of the self-adjoint extension A0(theta) by separation of variables.
    Extension(With<ExtensionParams>),
    /// Reflection angle theta_lambda of the mode-0 scattering solution.
    Reflection(With<ReflectionParams>),
    /// Radial kernel P, P' and Q at one argument.
    Kernel(With<KernelParams>),
    /// Finite-difference check of the mode-0 branch slope against -|C0|^2.
    Derivative(With<DerivativeParams>),
    /// Graded half-disk mesh as JSON.
    Mesh(With<MeshParams>),
    /// FEM spectrum of the regularized operator (or the pure Neumann Laplacian).
    Fem(With<FemParams>),
    /// Epsilon sweep with offset fit and log-periodicity check.
    Sweep(With<SweepParams>),
    /// Coverage of an interval by the union of extension spectra over a theta grid.
    Coverage(With<CoverageParams>),
    /// SVG plot of a CSV table.
    Plot(With<PlotParams>),
    /// Runs the acceptance checks; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct With<P: Args> {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    params: P,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TransverseParams {
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    variant: Option<Variant>,
    /// Number of positive eigenvalues.
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ExtensionParams {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    radius: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Highest angular index of the regular families.
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ReflectionParams {
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    radius: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct KernelParams {
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<f64>,
    /// Singular order i*b0.
    #[arg(long, conflicts_with = "k")]
    b0: Option<f64>,
    /// Integer order k.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct DerivativeParams {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    radius: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Finite-difference step in theta.
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct MeshParams {
    #[arg(long = "R")]
    #[serde(rename = "R")]
    radius: Option<f64>,
    #[arg(long)]
    hmax: Option<f64>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FemParams {
    /// Mesh JSON file; otherwise a mesh is built from R, hmax, rmin and ratio.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    radius: Option<f64>,
    #[arg(long)]
    hmax: Option<f64>,
    /// Defaults to eps/10.
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    variant: Option<Variant>,
    /// Drop the boundary term: the pure Neumann Laplacian.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    neumann: Option<bool>,
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    /// auto, dense or sparse.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Fit singular coefficients over this many matching radii (0 disables).
    #[arg(long)]
    radii: Option<usize>,
    /// Also write the stiffness and mass matrices as COO text next to the output.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    coo: Option<bool>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepParams {
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    radius: Option<f64>,
    #[arg(long)]
    hmax: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long)]
    samples_per_period: Option<usize>,
    #[arg(long)]
    ratio_target: Option<f64>,
    #[arg(long)]
    rmin_factor: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CoverageParams {
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<Window>,
    #[arg(long)]
    ntheta: Option<usize>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    radius: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PlotParams {
    /// CSV table with a header row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// spectrum-vs-lntheta, spectrum-vs-lneps or coverage.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<Window>,
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    title: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Check numbers to run, e.g. `--only 1,2,3`; all when omitted.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    /// Write the per-check report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn required<T>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing required parameter --{name}")))
}

fn pretty(v: &impl Serialize) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn transverse(io: &Io, p: TransverseParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let a0 = required(p.a0, "a0")?;
    let variant = p.variant.unwrap_or(Variant::Sign);
    let kmax = p.kmax.unwrap_or(3);
    let spec = transverse_spectrum(a0, variant, kmax)?;
    let residuals = (0..spec.modes.len()).map(|i| spec.mode_residual(i, 101)).collect::<Result<Vec<_>, _>>()?;
    let cfg = json!({"a0": a0, "variant": variant, "kmax": kmax});
    let out = json!({"config": cfg, "summary": spec.summary(), "mode_residuals": residuals});
    emit(io.out.as_ref(), "transverse", &cfg, &pretty(&out)?)
}

fn extension(io: &Io, p: ExtensionParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let theta = required(p.theta, "theta")?;
    let (radius, b0, kmax) = (p.radius.unwrap_or(1.0), p.b0.unwrap_or(1.0), p.kmax.unwrap_or(4));
    let w = p.window.unwrap_or(Window(-20.0, 20.0));
    let res = extension_eigenvalues(theta, (w.0, w.1), radius, b0, kmax)?;
    let cfg = json!({"theta": theta, "R": radius, "b0": b0, "window": w, "kmax": kmax});
    emit(io.out.as_ref(), "extension", &cfg, &pretty(&json!({"config": cfg, "spectrum": res}))?)
}

fn reflection(io: &Io, p: ReflectionParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let lambda = required(p.lambda, "lambda")?;
    let (radius, b0) = (p.radius.unwrap_or(1.0), p.b0.unwrap_or(1.0));
    let s = reflection_theta(lambda, radius, b0)?;
    let cfg = json!({"lambda": lambda, "R": radius, "b0": b0});
    let out = json!({
        "config": cfg,
        "theta_lambda": s.theta_lambda,
        "c_in": complex(s.c_in),
        "c_out": complex(s.c_out),
        "reflection_modulus": s.reflection_coefficient().norm(),
    });
    emit(io.out.as_ref(), "reflection", &cfg, &pretty(&out)?)
}

fn kernel(io: &Io, p: KernelParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let zeta = required(p.zeta, "zeta")?;
    let (params, cfg) = match (p.b0, p.k) {
        (Some(b0), None) => (RadialKernelParams::singular(b0)?, json!({"zeta": zeta, "b0": b0})),
        (None, Some(k)) => (RadialKernelParams::regular(k)?, json!({"zeta": zeta, "k": k})),
        _ => return Err(CliError::Usage("give exactly one of --b0 and --k".into())),
    };
    let v = evaluate(zeta, &params)?;
    let out = json!({
        "config": cfg,
        "p": complex(v.p),
        "dp": complex(v.dp),
        "q": complex(v.q),
        "terms": v.terms,
        "precision_loss": v.precision_loss,
    });
    emit(io.out.as_ref(), "kernel", &cfg, &pretty(&out)?)
}

fn derivative(io: &Io, p: DerivativeParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let theta = required(p.theta, "theta")?;
    let (radius, b0, h) = (p.radius.unwrap_or(1.0), p.b0.unwrap_or(1.0), p.h.unwrap_or(1e-5));
    let w = p.window.unwrap_or(Window(-10.0, 10.0));
    let checks = mode0_eigenvalues(theta, (w.0, w.1), radius, b0)?
        .into_iter()
        .enumerate()
        .map(|(k, l)| derivative_check(l, k, theta, radius, b0, h))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = json!({"theta": theta, "R": radius, "b0": b0, "window": w, "h": h});
    emit(io.out.as_ref(), "derivative", &cfg, &pretty(&json!({"config": cfg, "checks": checks}))?)
}

fn mesh(io: &Io, p: MeshParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let radius = p.radius.unwrap_or(1.0);
    let hmax = required(p.hmax, "hmax")?;
    let rmin = required(p.rmin, "rmin")?;
    let ratio = p.ratio.unwrap_or(1.5);
    let m = build_half_disk_mesh(radius, hmax, rmin, ratio)?;
    let cfg = json!({"R": radius, "hmax": hmax, "rmin": rmin, "ratio": ratio});
    emit(io.out.as_ref(), "mesh", &cfg, &(m.to_json()? + "\n"))?;
    if io.out.is_some() {
        eprintln!("mesh {}: {} nodes, {} triangles", m.id(), m.node_count(), m.triangles.len());
    }
    Ok(())
}

fn fem(io: &Io, p: FemParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let neumann = p.neumann.unwrap_or(false);
    let eps = if neumann { p.eps } else { Some(required(p.eps, "eps")?) };
    let (mesh, mesh_cfg) = match &p.mesh {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read mesh {}: {e}", path.display())))?;
            let m = HalfDiskMesh::from_json(&text)?;
            let id = m.id();
            (m, json!({"mesh": path, "mesh_id": id}))
        }
        None => {
            let radius = p.radius.unwrap_or(1.0);
            let hmax = p.hmax.unwrap_or(0.05);
            let rmin = p.rmin.unwrap_or(eps.map(|e| e / 10.0).unwrap_or(hmax / 2.0));
            let ratio = p.ratio.unwrap_or(1.05);
            let m = build_half_disk_mesh(radius, hmax, rmin, ratio)?;
            (m, json!({"R": radius, "hmax": hmax, "rmin": rmin, "ratio": ratio}))
        }
    };
    let a0 = p.a0.unwrap_or(1.0);
    let c2 = p.c2.unwrap_or(0.0);
    let variant = p.variant.unwrap_or(Variant::Sign);
    let w = p.window.unwrap_or(Window(-10.0, 10.0));
    let strategy = match p.strategy.as_deref().unwrap_or("auto") {
        "auto" => Strategy::Auto,
        "dense" => Strategy::Dense,
        "sparse" => Strategy::Sparse,
        other => return Err(CliError::Usage(format!("unknown strategy '{other}' (expected auto|dense|sparse)"))),
    };
    let mut opts = SolverOptions::default().with_strategy(strategy);
    if let Some(tol) = p.tol {
        opts.tol = tol;
    }
    let radii_count = p.radii.unwrap_or(if neumann { 0 } else { 16 });
    let coo = p.coo.unwrap_or(false);
    let pair = if neumann {
        assemble_neumann(&mesh)?
    } else {
        let profile = RobinProfile::new(a0, eps.expect("checked above"), variant)?.with_c2(c2)?;
        assemble(&mesh, &profile)?
    };
    let mut res = solve_window(&pair, (w.0, w.1), &opts)?;
    if let (false, Some(e), true) = (neumann, eps, radii_count > 0) {
        let basis = SingularBasis::new(1.0 / a0, 0.0)?;
        let radii = matching_radii(e, mesh.radius, radii_count)?;
        let coeffs = extract_in_out(&res, &mesh, &basis, &radii)?;
        for (pair, c) in res.eigenpairs.iter_mut().zip(coeffs) {
            pair.coefficients = Some(c);
        }
    }
    let mut cfg = json!({
        "a0": a0, "c2": c2, "eps": eps, "variant": variant, "neumann": neumann, "window": w,
        "strategy": opts.strategy, "tol": opts.tol, "radii": radii_count, "coo": coo,
    });
    if let (Value::Object(c), Value::Object(m)) = (&mut cfg, mesh_cfg) {
        c.extend(m);
    }
    let out = json!({"config": cfg, "nodes": mesh.node_count(), "spectrum": res});
    emit(io.out.as_ref(), "fem", &cfg, &pretty(&out)?)?;
    if coo {
        let path = io.out.as_ref().ok_or_else(|| CliError::Usage("--coo needs --out".into()))?;
        let (dir, name) = split(path)?;
        let stem = name.strip_suffix(".json").unwrap_or(&name).to_string();
        let (an, mn) = (format!("{stem}.A.coo"), format!("{stem}.M.coo"));
        let mut a = std::io::BufWriter::new(std::fs::File::create(dir.join(&an))?);
        let mut m = std::io::BufWriter::new(std::fs::File::create(dir.join(&mn))?);
        pair.write_coo(&mut a, &mut m)?;
        a.flush()?;
        m.flush()?;
        record(&dir, "fem", &cfg, &[an, mn])?;
    }
    Ok(())
}

fn sweep(io: &Io, p: SweepParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let dir = io.out.clone().ok_or_else(|| CliError::Usage("sweep needs --out DIR".into()))?;
    let a0 = p.a0.unwrap_or(1.0);
    let eps_max = p.eps_max.unwrap_or(1e-2);
    let profile = RobinProfile::new(a0, eps_max, p.variant.unwrap_or(Variant::Sign))?.with_c2(p.c2.unwrap_or(0.0))?;
    let w = p.window.unwrap_or(Window(-10.0, 10.0));
    let grid = EpsGrid {
        eps_max,
        periods: p.periods.unwrap_or(2),
        samples_per_period: p.samples_per_period.unwrap_or(8),
    };
    let mut config = SweepConfig::new(profile, (w.0, w.1), grid);
    config.radius = p.radius.unwrap_or(config.radius);
    config.h_max = p.hmax.unwrap_or(config.h_max);
    config.ratio_target = p.ratio_target.unwrap_or(config.ratio_target);
    config.rmin_factor = p.rmin_factor.unwrap_or(config.rmin_factor);
    config.solver = SolverOptions::default().with_strategy(Strategy::Sparse);
    if let Some(tol) = p.tol {
        config.solver.tol = tol;
    }
    let cfg = serde_json::to_value(&config)?;
    let mut table = run_sweep(&config)?;
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let summary = (|| -> robin_wander::Result<Value> {
        let oracle = ExtensionOracle::for_table(&table, 5.0)?;
        let fit = fit_offset(&table, &oracle)?;
        let halves = fit_offset_halves(&table, &oracle).ok().map(|(a, b)| [a.theta_star, b.theta_star]);
        let lp = check_log_periodicity(&table, 0.05).ok();
        let mut csv = Vec::new();
        write_mismatch_csv(&fit, &mut csv)?;
        std::fs::write(dir.join("mismatch.csv"), csv)?;
        let v = json!({
            "theta_star": fit.theta_star,
            "mean_mismatch": fit.mean_mismatch,
            "mean_spacing": fit.mean_spacing,
            "period_means": fit.period_means,
            "branch_violations": fit.branch_violations,
            "theta_star_halves": halves,
            "log_periodicity": lp,
        });
        table.theta_offset = Some(fit);
        Ok(v)
    })();
    files.extend(write_sweep_dir(&table, &dir)?);
    let failed = match summary {
        Ok(v) => {
            files.push("mismatch.csv".into());
            std::fs::write(dir.join("summary.json"), pretty(&v)?)?;
            files.push("summary.json".into());
            None
        }
        Err(e) => Some(e),
    };
    record(&dir, "sweep", &cfg, &files)?;
    let gaps = table.entries.iter().filter(|e| e.spectrum.is_none()).count();
    eprintln!("sweep: {} epsilon values, {gaps} gaps, written to {}", table.entries.len(), dir.display());
    match failed {
        Some(e) => Err(CliError::Compute(format!("offset fit failed: {e}"))),
        None => Ok(()),
    }
}

fn coverage(io: &Io, p: CoverageParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let iv = p.interval.unwrap_or(Window(0.0, 5.0));
    let ntheta = p.ntheta.unwrap_or(64);
    let (radius, b0, kmax) = (p.radius.unwrap_or(1.0), p.b0.unwrap_or(1.0), p.kmax.unwrap_or(4));
    let report = oracle_coverage((iv.0, iv.1), ntheta, radius, b0, kmax)?;
    let cfg = json!({"interval": iv, "ntheta": ntheta, "R": radius, "b0": b0, "kmax": kmax});
    emit(io.out.as_ref(), "coverage", &cfg, &pretty(&json!({"config": cfg, "report": report}))?)?;
    if let Some(path) = &io.out {
        // the union itself, as a table for plotting
        let oracle = ExtensionOracle::new(radius, b0, (iv.0, iv.1), kmax)?;
        let mut csv = String::from("theta,lambda,family\n");
        for i in 0..ntheta {
            let theta = std::f64::consts::TAU * i as f64 / ntheta as f64;
            for (l, fam) in oracle.spectrum(theta)? {
                csv.push_str(&format!("{theta:.12},{l:.12},{fam}\n"));
            }
        }
        let (dir, name) = split(path)?;
        let stem = name.strip_suffix(".json").unwrap_or(&name);
        let csv_name = format!("{stem}.csv");
        std::fs::write(dir.join(&csv_name), csv)?;
        record(&dir, "coverage", &cfg, &[csv_name])?;
    }
    Ok(())
}

fn plot(io: &Io, p: PlotParams) -> CliResult<()> {
    let p = resolve(&p, io.config.as_deref())?;
    let input = required(p.input.clone(), "input")?;
    let kind_name = required(p.kind.clone(), "kind")?;
    let kind: PlotKind = kind_name.parse()?;
    let text = std::fs::read_to_string(&input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let table = Table::from_csv(&text)?;
    if table.rows.is_empty() {
        eprintln!("warning: {} holds no rows; writing empty axes", input.display());
    }
    let opts = PlotOptions {
        b0: p.b0.unwrap_or(1.0),
        interval: p.interval.map(|w| (w.0, w.1)),
        gap_tol: p.gap_tol,
        title: p.title.clone(),
    };
    let svg = emit_plot(&table, kind, &opts)?;
    let cfg = json!({
        "input": input, "kind": kind_name, "b0": opts.b0, "interval": p.interval,
        "gap_tol": opts.gap_tol, "title": opts.title,
    });
    emit(io.out.as_ref(), "plot", &cfg, &svg)
}

fn verify(args: VerifyArgs) -> CliResult<()> {
    if let Some(bad) = args.only.iter().find(|&&i| !(1..=10).contains(&i)) {
        return Err(CliError::Usage(format!("no acceptance check numbered {bad}")));
    }
    let reports = acceptance::run(&args.only);
    for r in &reports {
        println!("{r}");
    }
    if let Some(path) = &args.out {
        std::fs::write(path, pretty(&reports)?)?;
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Compute(format!("acceptance checks failed: {}", failed.join(", "))))
    }
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("ROBIN_WANDER_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("ROBIN_WANDER_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Compute(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Transverse(w) => transverse(&w.io, w.params),
        Command::Extension(w) => extension(&w.io, w.params),
        Command::Reflection(w) => reflection(&w.io, w.params),
        Command::Kernel(w) => kernel(&w.io, w.params),
        Command::Derivative(w) => derivative(&w.io, w.params),
        Command::Mesh(w) => mesh(&w.io, w.params),
        Command::Fem(w) => fem(&w.io, w.params),
        Command::Sweep(w) => sweep(&w.io, w.params),
        Command::Coverage(w) => coverage(&w.io, w.params),
        Command::Plot(w) => plot(&w.io, w.params),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("robin-wander: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}

