//! `hypercone-lab`: batch front-end over hypercone-core.
//!
//! Exit status: 0 on success, 2 when the run completed with findings
//! (violations, defects, failed criteria), 1 on errors. Errors are reported as
//! a JSON object on standard error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hypercone_core::acceptance::{report_table, run_suite, FaultInjection, Suite};
use hypercone_core::graph::{
    linearization_report, linearization_residual, test_direction, FlatModel, SHEAR,
};
use hypercone_core::growth::{
    asymptotic_rate, discriminant_profile, estimate_rate_from_samples, find_threshold_k,
    gamma_admissible, growth_functional, is_slower_growth, perturbed_convexity_check, snap_rate,
    solve_radial_jacobi, three_scale_check, Branch, GridSpec, GrowthWindow, JacobiCoefficients,
    PerturbedRadialProblem, Profile,
};
use hypercone_core::io::{
    field_to_csv, fmt_f64, parse_coefficients, parse_cone, parse_cone_metric, parse_dag,
    parse_models, parse_surface, parse_tree_file, Table, TreeFile,
};
use hypercone_core::spectrum::cross_section_spectrum;
use hypercone_core::svg::Plot;
use hypercone_core::trees::{
    covering_cell_type1, covering_cell_type2, gamma_close, gamma_close_large_scale, scap_surface,
    scap_usc_check, validate_tree, ConeMetric, ConeNet, CoverScheme, ModelRegistry, RhoSlot,
    Type1Params, Violation,
};
use hypercone_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hypercone-lab",
    version,
    about = "Numerical toolkit for stable minimal hypercones"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// Write the CSV table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Power,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Spectrum,
    Growth,
    Graph,
    Trees,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Constant,
    Bump,
    Oscillating,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-section spectrum with indicial exponents.
    Spectrum {
        #[arg(long)]
        cone: PathBuf,
        #[arg(long = "mu-max")]
        mu_max: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Growth functional, three-scale convexity and rate of a mode sum.
    GrowthCheck {
        #[arg(long)]
        cone: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long = "K")]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long = "mu-max", default_value_t = 50.0)]
        mu_max: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Grid-certified threshold K for the discriminant.
    KSearch {
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_enum)]
        branch: BranchArg,
        /// Grid JSON; the standard grid when omitted.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Plot of the worst relative discriminant against K.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Growth rate from annulus samples (CSV with columns s, l2sq).
    RateEstimate {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        n: u32,
        /// Cone file; when given, the rate is snapped to its exponent set.
        #[arg(long)]
        cone: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Integrates the (perturbed) radial Jacobi equation from r = 1 inward.
    OdeSolve {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long)]
        n: u32,
        #[arg(long = "r-min")]
        r_min: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        v0: f64,
        /// `v'(1)`.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dv0: f64,
        #[arg(long = "b-scale", default_value_t = 0.0)]
        b_scale: f64,
        #[arg(long, value_enum, default_value = "bump")]
        profile: ProfileArg,
        /// Also run the perturbed convexity check at this gamma (needs --K).
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long = "K")]
        k: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Residual studies for the linearized minimal surface operator.
    Linearize {
        #[arg(long, default_value_t = 7)]
        n: usize,
        /// Grid spacing, as a number or a fraction such as 1/16.
        #[arg(long)]
        res: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Residual field of the sheared-model case at `eps`, as CSV with a JSON header.
        #[arg(long = "field-out")]
        field_out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Structural validation of a tree file.
    TreeValidate {
        file: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
        #[arg(long)]
        models: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Gamma-closeness of two tree files.
    TreeClose {
        #[arg(long)]
        gamma: f64,
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long = "cone-metric")]
        cone_metric: Option<PathBuf>,
    },
    /// Covering cells of parameter tuples (JSON list).
    CoverIndex {
        #[arg(long)]
        tuples: PathBuf,
        #[arg(long)]
        gamma: f64,
        /// JSON list of cone ids forming the net (type-I tuples).
        #[arg(long)]
        net: Option<PathBuf>,
        #[arg(long = "cone-metric")]
        cone_metric: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        injrad: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// SCAP of every cone in a degeneration DAG, and of a surface.
    Scap {
        #[arg(long)]
        dag: PathBuf,
        #[arg(long)]
        surface: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Acceptance criteria.
    Accept {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, hide = true)]
        flip_discriminant_sign: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Outcome of a successful run.
enum Status {
    Ok,
    Findings,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn emit(out: &OutArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => write(p, text),
        None => print_stdout(text),
    }
}

fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Error::Invalid(format!("stdout: {e}")))
        }
        _ => Ok(()),
    }
}

fn f(v: f64) -> String {
    fmt_f64(v)
}

fn parse_spacing(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("cannot read grid spacing '{s}'"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn load_models(path: &Option<PathBuf>) -> Result<ModelRegistry> {
    path.as_deref()
        .map_or(Ok(ModelRegistry::new()), |p| parse_models(&read(p)?))
}

fn load_metric(path: &Option<PathBuf>) -> Result<ConeMetric> {
    path.as_deref()
        .map_or(Ok(ConeMetric::default()), |p| parse_cone_metric(&read(p)?))
}

fn cmd_spectrum(cone: &Path, mu_max: f64, out: &OutArgs) -> Result<Status> {
    let ladder = cross_section_spectrum(&parse_cone(&read(cone)?)?, mu_max)?;
    let mut t = Table::new(&["j", "mu", "mult", "gamma_plus", "gamma_minus", "resonant"]);
    for (i, e) in ladder.entries.iter().enumerate() {
        t.push(vec![
            (i + 1).to_string(),
            f(e.mu),
            e.multiplicity.to_string(),
            f(e.gamma_plus),
            f(e.gamma_minus),
            e.resonant.to_string(),
        ]);
    }
    emit(out, &t.to_csv())?;
    Ok(Status::Ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_growth_check(
    cone: &Path,
    coeffs: &Path,
    gamma: f64,
    k: f64,
    sigma: f64,
    mu_max: f64,
    out: &OutArgs,
) -> Result<Status> {
    let ladder = cross_section_spectrum(&parse_cone(&read(cone)?)?, mu_max)?;
    let c = JacobiCoefficients::new(ladder.clone(), parse_coefficients(&read(coeffs)?)?)?;
    let admissible = gamma_admissible(gamma, &ladder, sigma)?;
    let three = three_scale_check(&c, gamma, k, sigma)?;
    let j = growth_functional(&c, &GrowthWindow::new(k, gamma, 1.0)?);
    let rate = asymptotic_rate(&c);
    let slower = is_slower_growth(&c)?;
    let mut t = Table::new(&[
        "gamma",
        "K",
        "admissible",
        "growth_functional",
        "three_scale_lhs",
        "strict",
        "rate",
        "slower_growth",
    ]);
    t.push(vec![
        f(gamma),
        f(k),
        admissible.to_string(),
        f(j),
        f(three.lhs),
        three.strict.to_string(),
        f(rate),
        slower.to_string(),
    ]);
    emit(out, &t.to_csv())?;
    Ok(if three.strict || c.is_zero() {
        Status::Ok
    } else {
        Status::Findings
    })
}

fn cmd_k_search(
    sigma: f64,
    branch: BranchArg,
    grid: &Option<PathBuf>,
    svg: &Option<PathBuf>,
    out: &OutArgs,
) -> Result<Status> {
    let branch = match branch {
        BranchArg::Power => Branch::Power,
        BranchArg::Log => Branch::Log,
    };
    let grid = match grid {
        Some(p) => GridSpec::from_json(&read(p)?)?,
        None => GridSpec::standard(),
    };
    if let Some(p) = svg {
        let curve = discriminant_profile(sigma, branch, &grid)?;
        let plot = Plot::new(
            &format!("worst relative discriminant, sigma = {sigma}"),
            "K",
            "max Delta/(AC)",
        )
        .with_series(branch.as_str(), curve);
        write(p, &plot.render())?;
    }
    let r = find_threshold_k(sigma, branch, &grid)?;
    let mut t = Table::new(&[
        "sigma",
        "branch",
        "K_star",
        "witness_alpha",
        "witness_beta",
        "max_discriminant",
    ]);
    t.push(vec![
        f(r.sigma),
        r.branch.as_str().into(),
        f(r.k_star),
        f(r.witness_alpha),
        f(r.witness_beta),
        f(r.max_discriminant),
    ]);
    emit(out, &t.to_csv())?;
    Ok(Status::Ok)
}

fn cmd_rate_estimate(
    samples: &Path,
    n: u32,
    cone: &Option<PathBuf>,
    svg: &Option<PathBuf>,
    out: &OutArgs,
) -> Result<Status> {
    let text = read(samples)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("samples need a '{name}' column")))
    };
    let (is, il) = (col("s")?, col("l2sq")?);
    let mut pts = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            let v = rec.get(i).unwrap_or("");
            v.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("not a number: '{v}'")))
        };
        pts.push((num(is)?, num(il)?));
    }
    let rate = estimate_rate_from_samples(&pts, n)?;
    let mut t = Table::new(&["rate", "snapped", "residual"]);
    let (snapped, residual) = match cone {
        Some(p) => {
            let ladder = cross_section_spectrum(&parse_cone(&read(p)?)?, 50.0)?;
            let s = snap_rate(rate, &ladder)?;
            (f(s.value), f(s.residual))
        }
        None => (String::new(), String::new()),
    };
    t.push(vec![f(rate), snapped, residual]);
    if let Some(p) = svg {
        write(
            p,
            &Plot::new("annulus norms", "s", "l2sq")
                .log_log()
                .with_series("samples", pts)
                .render(),
        )?;
    }
    emit(out, &t.to_csv())?;
    Ok(Status::Ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_ode_solve(
    mu: f64,
    n: u32,
    r_min: f64,
    v0: f64,
    dv0: f64,
    b_scale: f64,
    profile: ProfileArg,
    gamma: Option<f64>,
    k: Option<f64>,
    out: &OutArgs,
) -> Result<Status> {
    let profile = match profile {
        ProfileArg::Constant => Profile::Constant,
        ProfileArg::Bump => Profile::bump(),
        ProfileArg::Oscillating => Profile::Oscillating { frequency: 3.0 },
    };
    let prob = PerturbedRadialProblem {
        mu,
        n,
        b0_scale: b_scale,
        b1_scale: b_scale,
        profile,
    };
    let sol = solve_radial_jacobi(&prob, (v0, dv0), r_min)?;
    let mut status = Status::Ok;
    if let Some(g) = gamma {
        let k = k.ok_or_else(|| Error::Invalid("--gamma needs --K".into()))?;
        let c = perturbed_convexity_check(&sol, g, k, b_scale)?;
        eprintln!("{}", json!({"convexity_lhs": c.lhs, "strict": c.strict}));
        if !c.strict {
            status = Status::Findings;
        }
    }
    let mut t = Table::new(&["r", "v", "r_dv"]);
    for ((lr, v), vt) in sol.log_r.iter().zip(&sol.v).zip(&sol.v_t) {
        t.push(vec![f(lr.exp()), f(*v), f(*vt)]);
    }
    emit(out, &t.to_csv())?;
    Ok(status)
}

fn cmd_linearize(
    n: usize,
    res: &str,
    eps: f64,
    report: &Option<PathBuf>,
    field_out: &Option<PathBuf>,
    svg: &Option<PathBuf>,
) -> Result<Status> {
    let h = parse_spacing(res)?;
    let rows = linearization_report(n, h, eps)?;
    let mut t = Table::new(&["case", "eps", "residual_norm", "fitted_order"]);
    for r in &rows {
        t.push(vec![
            r.case.clone(),
            f(r.eps),
            f(r.residual_norm),
            f(r.fitted_order),
        ]);
    }
    match report {
        Some(p) => write(p, &t.to_csv())?,
        None => print_stdout(&t.to_csv())?,
    }
    if let Some(p) = field_out {
        let model = FlatModel::traceless_shear(n, h, SHEAR)?;
        let u: Vec<f64> = test_direction(&model.grid)
            .iter()
            .map(|v| eps * v)
            .collect();
        let zero = vec![0.0; u.len()];
        let res = linearization_residual(&model, &u, &zero, None, None)?;
        write(p, &field_to_csv(n, &model.grid, &res.field)?)?;
    }
    if let Some(p) = svg {
        let mut plot = Plot::new("linearization residual", "eps", "residual").log_log();
        for case in ["u_shear", "u_euclidean", "conformal"] {
            let pts = rows
                .iter()
                .filter(|r| r.case == case)
                .map(|r| (r.eps, r.residual_norm))
                .collect();
            plot = plot.with_series(case, pts);
        }
        write(p, &plot.render())?;
    }
    Ok(Status::Ok)
}

fn cmd_tree_validate(
    file: &Path,
    beta: f64,
    models: &Option<PathBuf>,
    out: &OutArgs,
) -> Result<Status> {
    let models = load_models(models)?;
    let violations: Vec<Violation> = match parse_tree_file(&read(file)?)? {
        TreeFile::Single(t) => validate_tree(&t, beta, &models),
        TreeFile::LargeScale(t) => {
            let mut v = Vec::new();
            if let Err(e) = t.validate() {
                v.push(Violation {
                    path: "root".into(),
                    rule: e.to_string(),
                });
            }
            for (i, s) in t.subtrees.iter().enumerate() {
                v.extend(
                    validate_tree(s, beta, &models)
                        .into_iter()
                        .map(|x| Violation {
                            path: format!("point{i}:{}", x.path),
                            ..x
                        }),
                );
            }
            v
        }
    };
    let mut t = Table::new(&["path", "violation"]);
    for v in &violations {
        t.push(vec![v.path.clone(), v.rule.clone()]);
    }
    emit(out, &t.to_csv())?;
    Ok(if violations.is_empty() {
        Status::Ok
    } else {
        Status::Findings
    })
}

fn cmd_tree_close(
    gamma: f64,
    a: &Path,
    b: &Path,
    models: &Option<PathBuf>,
    metric: &Option<PathBuf>,
) -> Result<Status> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::Domain(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let models = load_models(models)?;
    let metric = load_metric(metric)?;
    let verdict = match (parse_tree_file(&read(a)?)?, parse_tree_file(&read(b)?)?) {
        (TreeFile::Single(x), TreeFile::Single(y)) => gamma_close(&x, &y, gamma, &models, &metric)?,
        (TreeFile::LargeScale(x), TreeFile::LargeScale(y)) => {
            gamma_close_large_scale(&x, &y, gamma, &models, &metric)?
        }
        _ => {
            return Err(Error::Invalid(
                "cannot compare a single tree with a large-scale tree".into(),
            ))
        }
    };
    print_stdout(&format!("{}\n", serde_json::to_string(&verdict)?))?;
    Ok(Status::Ok)
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct TupleRecord {
    kind: String,
    x: Vec<f64>,
    #[serde(rename = "R")]
    r: f64,
    #[serde(default)]
    rho: Option<f64>,
    #[serde(default)]
    cone: Option<String>,
    #[serde(default)]
    r0: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_cover_index(
    tuples: &Path,
    gamma: f64,
    net: &Option<PathBuf>,
    metric: &Option<PathBuf>,
    dim: usize,
    injrad: f64,
    out: &OutArgs,
) -> Result<Status> {
    let scheme = CoverScheme::new(dim, injrad)?;
    let records: Vec<TupleRecord> = serde_json::from_str(&read(tuples)?)?;
    let net = match net {
        Some(p) => Some(ConeNet::for_gamma(serde_json::from_str(&read(p)?)?, gamma)),
        None => None,
    };
    let metric = load_metric(metric)?;
    let mut t = Table::new(&["index", "kind", "net", "rho_slot", "k", "ball", "error"]);
    let mut defects = 0;
    for (i, rec) in records.iter().enumerate() {
        let ball = |b: &[i64]| b.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        let row = match rec.kind.as_str() {
            "II" => {
                let r0 = rec
                    .r0
                    .ok_or_else(|| Error::Parse(format!("tuple {i}: type II needs 'r0'")))?;
                covering_cell_type2(&rec.x, rec.r, gamma, r0, &scheme)
                    .map(|c| vec![String::new(), String::new(), c.k.to_string(), ball(&c.ball)])
            }
            "I" => {
                let net = net
                    .as_ref()
                    .ok_or_else(|| Error::Invalid("type-I tuples need --net".into()))?;
                let cone = rec
                    .cone
                    .as_deref()
                    .ok_or_else(|| Error::Parse(format!("tuple {i}: type I needs 'cone'")))?;
                let rho = rec
                    .rho
                    .ok_or_else(|| Error::Parse(format!("tuple {i}: type I needs 'rho'")))?;
                let p = Type1Params {
                    cone,
                    x: &rec.x,
                    r: rec.r,
                    rho,
                };
                covering_cell_type1(&p, gamma, &scheme, net, &metric).map(|c| {
                    let slot = match c.rho {
                        RhoSlot::Zero => "zero".to_string(),
                        RhoSlot::Interval(k) => k.to_string(),
                    };
                    vec![
                        c.net.to_string(),
                        slot,
                        c.k_prime.to_string(),
                        ball(&c.ball),
                    ]
                })
            }
            other => return Err(Error::Parse(format!("tuple {i}: unknown kind '{other}'"))),
        };
        let mut cells = vec![i.to_string(), rec.kind.clone()];
        match row {
            Ok(r) => {
                cells.extend(r);
                cells.push(String::new());
            }
            Err(e @ (Error::CoverDefect { .. } | Error::ConeNetDefect(_))) => {
                defects += 1;
                cells.extend([
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.to_string(),
                ]);
            }
            Err(e) => return Err(e),
        }
        t.push(cells);
    }
    emit(out, &t.to_csv())?;
    Ok(if defects == 0 {
        Status::Ok
    } else {
        Status::Findings
    })
}

fn cmd_scap(dag: &Path, surface: &Option<PathBuf>, out: &OutArgs) -> Result<Status> {
    let dag = parse_dag(&read(dag)?)?;
    let table = dag.scap_table()?;
    let mut t = Table::new(&["item", "density", "scap"]);
    let mut usc_ok = true;
    for c in &dag.cones {
        usc_ok &= scap_usc_check(&dag, &table, &c.id);
        t.push(vec![c.id.clone(), f(c.density), table[&c.id].to_string()]);
    }
    if let Some(p) = surface {
        let s = parse_surface(&read(p)?)?;
        let total = scap_surface(&s.singular_points, s.one_sided, &dag)?;
        t.push(vec!["surface".into(), String::new(), total.to_string()]);
    }
    emit(out, &t.to_csv())?;
    Ok(if usc_ok { Status::Ok } else { Status::Findings })
}

fn cmd_accept(suite: SuiteArg, seed: u64, flip: bool, out: &OutArgs) -> Result<Status> {
    let suite = match suite {
        SuiteArg::Spectrum => Suite::Spectrum,
        SuiteArg::Growth => Suite::Growth,
        SuiteArg::Graph => Suite::Graph,
        SuiteArg::Trees => Suite::Trees,
        SuiteArg::All => Suite::All,
    };
    let rows = run_suite(
        suite,
        seed,
        FaultInjection {
            flip_discriminant_sign: flip,
        },
    );
    emit(out, &report_table(&rows).to_csv())?;
    Ok(if rows.iter().all(|r| r.passed) {
        Status::Ok
    } else {
        Status::Findings
    })
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Spectrum { cone, mu_max, out } => cmd_spectrum(&cone, mu_max, &out),
        Command::GrowthCheck {
            cone,
            coeffs,
            gamma,
            k,
            sigma,
            mu_max,
            out,
        } => cmd_growth_check(&cone, &coeffs, gamma, k, sigma, mu_max, &out),
        Command::KSearch {
            sigma,
            branch,
            grid,
            svg,
            out,
        } => cmd_k_search(sigma, branch, &grid, &svg, &out),
        Command::RateEstimate {
            samples,
            n,
            cone,
            svg,
            out,
        } => cmd_rate_estimate(&samples, n, &cone, &svg, &out),
        Command::OdeSolve {
            mu,
            n,
            r_min,
            v0,
            dv0,
            b_scale,
            profile,
            gamma,
            k,
            out,
        } => cmd_ode_solve(mu, n, r_min, v0, dv0, b_scale, profile, gamma, k, &out),
        Command::Linearize {
            n,
            res,
            eps,
            report,
            field_out,
            svg,
        } => cmd_linearize(n, &res, eps, &report, &field_out, &svg),
        Command::TreeValidate {
            file,
            beta,
            models,
            out,
        } => cmd_tree_validate(&file, beta, &models, &out),
        Command::TreeClose {
            gamma,
            a,
            b,
            models,
            cone_metric,
        } => cmd_tree_close(gamma, &a, &b, &models, &cone_metric),
        Command::CoverIndex {
            tuples,
            gamma,
            net,
            cone_metric,
            dim,
            injrad,
            out,
        } => cmd_cover_index(&tuples, gamma, &net, &cone_metric, dim, injrad, &out),
        Command::Scap { dag, surface, out } => cmd_scap(&dag, &surface, &out),
        Command::Accept {
            suite,
            seed,
            flip_discriminant_sign,
            out,
        } => cmd_accept(suite, seed, flip_discriminant_sign, &out),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HYPERCONE_LAB_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            Error::Invalid(format!(
                "HYPERCONE_LAB_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    Ok(())
}

fn report_error(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(1)
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
            return report_error("usage", e.to_string().trim());
        }
    };
    if let Err(e) = configure_threads() {
        return report_error(e.kind(), &e.to_string());
    }
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Findings) => ExitCode::from(2),
        Err(e) => report_error(e.kind(), &e.to_string()),
    }
}
