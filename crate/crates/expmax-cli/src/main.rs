//! Single-binary front end: measures, maximal operators, blow-up
//! counterexamples, lemma verification and scan sweeps, with reproducible
//! seeds and machine-readable output.
//!
//! Exit codes: 0 on success, 1 on a check failure (an oracle violation or a
//! threshold miss), 2 on usage errors.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use expmax::counterexamples::{counterexample_ratio, DiamondWitness, SweptFamily, LEVEL_FRACTION};
use expmax::experiments::{
    centered_contrast, lp_scan, weak11_scan, FamilyTag, SweepSpec,
};
use expmax::geometry::{Ball, NormKind, OrthantPoint};
use expmax::grid::GridFunction;
use expmax::maximal::{maximal_function, CandidatePolicy, Weighting};
use expmax::measure::{
    mu_alpha_cube, mu_best, mu_cube_exact, mu_montecarlo, LaguerreParams, MeasureEstimate,
};
use expmax::oracle::covers::{cone_cover_check, rectangle_lemma_check, slice_cover_check};
use expmax::oracle::roots::{envelope_check, RootKind};
use expmax::oracle::slicing::{fit_slicing_decay, SlicingSetup};
use expmax::oracle::{random_config, ContactCase, DiamondSliceConfig, OracleReport, DEFAULT_C0};
use expmax::rng::DEFAULT_SEED;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "expmax",
    about = "Numerical laboratory for maximal operators under the exponential measure",
    version
)]
struct Cli {
    /// Deterministic seed shared by all randomized computations.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for commands that support both.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for parallel sections (0 = all cores). Results are
    /// independent of the thread count.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cube,
    Ball,
    Diamond,
}

impl From<KindArg> for NormKind {
    fn from(k: KindArg) -> NormKind {
        match k {
            KindArg::Cube => NormKind::Linf,
            KindArg::Ball => NormKind::L2,
            KindArg::Diamond => NormKind::L1,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Measure a single ball under μ (or μ_α).
    Measure(MeasureArgs),
    /// Evaluate the maximal operator of a grid function.
    Maxop(MaxopArgs),
    /// Sweep a counterexample family and report union/base measure ratios.
    Counterexample(CounterexampleArgs),
    /// Run a lemma verification suite.
    Verify(VerifyArgs),
    /// Run a scan sweep (weak-type, L^p or centered contrast).
    Scan(ScanArgs),
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Comma-separated center coordinates, e.g. `3,3`.
    #[arg(long)]
    center: String,
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value = "auto")]
    method: String,
    /// Laguerre exponents (comma-separated), Monte Carlo only.
    #[arg(long)]
    alpha: Option<String>,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct MaxopArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// CSV body of the input grid function.
    #[arg(long, requires = "header")]
    input: Option<PathBuf>,
    /// JSON header of the input grid function.
    #[arg(long)]
    header: Option<PathBuf>,
    /// Synthetic input: the half-size ball indicator at this sweep size on
    /// the domain (0, 2s)².
    #[arg(long, conflicts_with = "input")]
    halfball_s: Option<f64>,
    /// Cells per side for the synthetic input.
    #[arg(long, default_value_t = 128)]
    cells: usize,
    #[arg(long)]
    centered: bool,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value_t = 2f64.powf(0.25))]
    ladder_ratio: f64,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Output prefix; writes `<prefix>.csv` and `<prefix>.json`.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(value_enum)]
    family: KindArg,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Comma-separated sweep sizes (s for cubes/balls, N for diamonds).
    #[arg(long, default_value = "4,8,16,32")]
    sizes: String,
    /// Monte Carlo samples per entry.
    #[arg(long, default_value_t = 400_000)]
    n: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(subcommand)]
    suite: VerifySuite,
}

#[derive(Subcommand)]
enum VerifySuite {
    /// Diamond slice parallelepipeds (d = 2, 3).
    SliceCover {
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
    },
    /// Cone covers in dimension 3 (both contact cases).
    ParallelogramCover {
        #[arg(long, default_value_t = 10)]
        configs: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Cone covers in dimension 4 (all three contact cases).
    ParallelepipedCover {
        #[arg(long, default_value_t = 6)]
        configs: usize,
        #[arg(long, default_value_t = 6_000)]
        samples: u64,
    },
    /// Box–simplex measure comparison.
    RectangleLemma {
        #[arg(long, default_value_t = 100)]
        configs: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
    },
    /// Closed-form roots against direct ray–sphere geometry.
    Roots {
        #[arg(long, default_value_t = 200)]
        configs: usize,
    },
    /// Slab-to-slab decay of the maximal operator.
    Slicing {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
}

#[derive(Args)]
struct ScanArgs {
    #[command(subcommand)]
    scan: ScanKind,
}

#[derive(Subcommand)]
enum ScanKind {
    /// Weak-type functional growth along a size ladder.
    Weak11 {
        #[arg(long, value_enum, default_value_t = ScanFamily::Cubes)]
        family: ScanFamily,
        #[arg(long, default_value = "4,8,16,32")]
        ladder: String,
        #[arg(long, default_value_t = 256)]
        cells: usize,
        #[arg(long, default_value_t = 400_000)]
        n: u64,
    },
    /// L^p operator-norm stability along a domain ladder.
    Lp {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value = "4,8,16")]
        ladder: String,
        #[arg(long, default_value_t = 256)]
        cells: usize,
    },
    /// Centered versus non-centered weak functionals.
    Contrast {
        #[arg(long, value_enum, default_value_t = KindArg::Cube)]
        kind: KindArg,
        #[arg(long, default_value = "4,8,16")]
        ladder: String,
        #[arg(long, default_value_t = 192)]
        cells: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanFamily {
    Cubes,
    Balls,
    Diamonds,
    Grid,
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {t:?}"))
        })
        .collect()
}

/// Emit a value with the log-domain field always present and the linear
/// value only when it is representable at a glance.
fn log_and_linear(log: f64) -> serde_json::Value {
    if log.is_finite() && log.abs() < 30.0 {
        serde_json::json!({"log": log, "linear": log.exp()})
    } else {
        serde_json::json!({"log": if log.is_finite() { serde_json::json!(log) } else { serde_json::Value::Null }})
    }
}

struct Output {
    out: Option<PathBuf>,
}

impl Output {
    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {p:?}")),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn measure_json(spec: serde_json::Value, est: &MeasureEstimate) -> serde_json::Value {
    let mut obj = est.to_json();
    obj["value"] = log_and_linear(est.log_value);
    serde_json::json!({"spec": spec, "estimate": obj})
}

fn run_measure(args: &MeasureArgs, seed: u64, output: &Output) -> Result<i32> {
    let center = OrthantPoint::new(parse_floats(&args.center)?)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let kind: NormKind = args.kind.into();
    let ball = Ball::new(kind, center.clone(), args.radius).map_err(|e| anyhow::anyhow!("{e}"))?;
    let alpha = match &args.alpha {
        Some(a) => Some(LaguerreParams::new(parse_floats(a)?).map_err(|e| anyhow::anyhow!("{e}"))?),
        None => None,
    };
    let est = match (args.method.as_str(), &alpha) {
        ("exact", None) if kind == NormKind::Linf => mu_cube_exact(&center, args.radius),
        ("exact", Some(a)) if kind == NormKind::Linf => mu_alpha_cube(&center, args.radius, a),
        ("quadrature", None) => expmax::measure::mu_quadrature(&ball, args.tol),
        ("montecarlo", _) => mu_montecarlo(&ball, alpha.as_ref(), args.n, seed),
        ("auto", None) => mu_best(&ball, args.tol),
        ("auto", Some(_)) => mu_montecarlo(&ball, alpha.as_ref(), args.n, seed),
        (m, _) => bail!("method {m:?} not applicable to this input"),
    }
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let spec = serde_json::json!({
        "command": "measure",
        "kind": kind.tag(),
        "center": center.coords(),
        "radius": args.radius,
        "method": args.method,
        "alpha": alpha.as_ref().map(|a| a.alpha().to_vec()),
        "n": args.n,
        "tol": args.tol,
        "seed": seed,
    });
    output.write(&format!("{}\n", serde_json::to_string_pretty(&measure_json(spec, &est))?))?;
    Ok(0)
}

fn run_maxop(args: &MaxopArgs, output: &Output) -> Result<i32> {
    let f = match (&args.input, args.halfball_s) {
        (Some(csv), _) => {
            let header = args.header.as_ref().expect("clap enforces --header");
            GridFunction::load(csv, header).map_err(|e| anyhow::anyhow!("{e}"))?
        }
        (None, Some(s)) => {
            let h = 2.0 * s / args.cells as f64;
            let kind: NormKind = args.kind.into();
            GridFunction::from_fn(vec![0.0, 0.0], h, vec![args.cells, args.cells], |x| {
                if kind.distance(x, &[s, s]) < s / 4.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .map_err(|e| anyhow::anyhow!("{e}"))?
        }
        _ => bail!("provide either --input/--header or --halfball-s"),
    };
    let mut policy = CandidatePolicy::default_for(&f);
    policy.center_stride = args.stride;
    policy.ladder_ratio = args.ladder_ratio;
    if let Some(r) = args.r_min {
        policy.r_min = r;
    }
    if let Some(r) = args.r_max {
        policy.r_max = r;
    }
    let mf = maximal_function(&f, args.kind.into(), &policy, Weighting::MuExp, args.centered)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let csv = args.out_prefix.with_extension("csv");
    let json = args.out_prefix.with_extension("json");
    mf.save(&csv, &json).map_err(|e| anyhow::anyhow!("{e}"))?;
    output.write(&format!(
        "{}\n",
        serde_json::json!({
            "spec": {
                "command": "maxop",
                "kind": NormKind::from(args.kind).tag(),
                "centered": args.centered,
                "policy": policy,
                "dims": f.dims(),
                "spacing": f.spacing(),
            },
            "written": [csv, json],
            "max_value": mf.values().iter().copied().fold(0.0f64, f64::max),
        })
    ))?;
    Ok(0)
}

fn run_counterexample(
    args: &CounterexampleArgs,
    seed: u64,
    format: Format,
    output: &Output,
) -> Result<i32> {
    let sizes = parse_floats(&args.sizes)?;
    let mut csv = String::from(
        "family,s_or_N,log_base_measure,log_union_measure,log_ratio,analytic_prediction_log,n_samples,seed\n",
    );
    let mut rows_json = Vec::new();
    let mut monotone = true;
    let mut prev: Option<f64> = None;
    for &s in &sizes {
        let (family, s_or_n, base, union, ratio, analytic, n_samples) = match args.family {
            KindArg::Diamond => {
                let w = DiamondWitness::new(s, args.dim, 0.01).map_err(|e| anyhow::anyhow!("{e}"))?;
                let f = w
                    .weak_functional_log(LEVEL_FRACTION)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                // the functional plays the union role; λ the base role
                ("diamond", s, -w.log_lambda, f - w.log_lambda, f, s.ln(), 0)
            }
            _ => {
                let fam = match args.family {
                    KindArg::Cube => SweptFamily::cube(s, args.dim),
                    KindArg::Ball => SweptFamily::ball(s, args.dim),
                    KindArg::Diamond => unreachable!(),
                }
                .map_err(|e| anyhow::anyhow!("{e}"))?;
                let row =
                    counterexample_ratio(&fam, args.n, seed).map_err(|e| anyhow::anyhow!("{e}"))?;
                (
                    if args.family as u8 == KindArg::Cube as u8 {
                        "cube"
                    } else {
                        "ball"
                    },
                    s,
                    row.log_base_measure,
                    row.log_union_measure,
                    row.log_ratio,
                    row.analytic_prediction_log,
                    row.n_samples,
                )
            }
        };
        if let Some(p) = prev {
            monotone &= ratio >= p;
        }
        prev = Some(ratio);
        csv.push_str(&format!(
            "{family},{s_or_n},{base:.10e},{union:.10e},{ratio:.10e},{analytic:.10e},{n_samples},{seed}\n"
        ));
        rows_json.push(serde_json::json!({
            "family": family,
            "s_or_N": s_or_n,
            "log_base_measure": base,
            "log_union_measure": union,
            "log_ratio": ratio,
            "ratio": log_and_linear(ratio),
            "analytic_prediction_log": analytic,
            "n_samples": n_samples,
            "seed": seed,
        }));
    }
    match format {
        Format::Csv => output.write(&csv)?,
        Format::Json => output.write(&format!(
            "{}\n",
            serde_json::to_string_pretty(&serde_json::json!({
                "spec": {
                    "command": "counterexample",
                    "dim": args.dim,
                    "sizes": sizes,
                    "n": args.n,
                    "seed": seed,
                },
                "rows": rows_json,
                "monotone_log_ratio": monotone,
            }))?
        ))?,
    }
    Ok(if monotone { 0 } else { 1 })
}

fn report_lines(reports: &[OracleReport]) -> Result<(String, bool)> {
    let mut text = String::new();
    let mut all_pass = true;
    for r in reports {
        all_pass &= r.pass;
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    Ok((text, all_pass))
}

fn run_verify(args: &VerifyArgs, seed: u64, output: &Output) -> Result<i32> {
    let mut reports: Vec<OracleReport> = Vec::new();
    match &args.suite {
        VerifySuite::SliceCover { configs, samples } => {
            for dim in [2usize, 3] {
                for i in 0..*configs {
                    let cfg = DiamondSliceConfig::random(dim, expmax::rng::derive_seed(seed, i as u64))
                        .map_err(|e| anyhow::anyhow!("{e}"))?;
                    let mu = expmax::oracle::covers::diamond_measure_log(&cfg)
                        .map_err(|e| anyhow::anyhow!("{e}"))?
                        .log_value;
                    let b = cfg.bottom_level();
                    for frac in [1e-6, 0.25, 0.5, 0.85] {
                        let t = b + 2.0 * cfg.r * frac;
                        reports.push(
                            slice_cover_check(&cfg, t, samples / 4, seed ^ i as u64, mu)
                                .map_err(|e| anyhow::anyhow!("{e}"))?,
                        );
                    }
                }
            }
        }
        VerifySuite::ParallelogramCover { configs, samples } => {
            for case in [ContactCase::Vertex, ContactCase::Face] {
                for i in 0..*configs {
                    let cfg = random_config(3, case, expmax::rng::derive_seed(seed, i as u64))
                        .map_err(|e| anyhow::anyhow!("{e}"))?;
                    reports.push(
                        cone_cover_check(&cfg, 20, *samples, seed ^ i as u64, DEFAULT_C0)
                            .map_err(|e| anyhow::anyhow!("{e}"))?,
                    );
                }
            }
        }
        VerifySuite::ParallelepipedCover { configs, samples } => {
            for case in [ContactCase::Vertex, ContactCase::Face, ContactCase::Edge] {
                for i in 0..*configs {
                    let cfg = random_config(4, case, expmax::rng::derive_seed(seed, i as u64))
                        .map_err(|e| anyhow::anyhow!("{e}"))?;
                    reports.push(
                        cone_cover_check(&cfg, 20, *samples, seed ^ i as u64, DEFAULT_C0)
                            .map_err(|e| anyhow::anyhow!("{e}"))?,
                    );
                }
            }
        }
        VerifySuite::RectangleLemma { configs, samples } => {
            use rand::Rng;
            let mut rng = expmax::rng::master(seed);
            for m in [2usize, 3] {
                for _ in 0..*configs {
                    let a: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..3.0)).collect();
                    let r = rng.gen_range(0.2..4.0);
                    reports.push(
                        rectangle_lemma_check(&a, r, *samples, rng.gen())
                            .map_err(|e| anyhow::anyhow!("{e}"))?,
                    );
                }
            }
        }
        VerifySuite::Roots { configs } => {
            for kind in [
                RootKind::PlanarDrop,
                RootKind::EdgeExit,
                RootKind::SecondEdgeExit,
                RootKind::EdgeExit4,
                RootKind::SideRoot,
            ] {
                reports.push(
                    envelope_check(kind, *configs, seed).map_err(|e| anyhow::anyhow!("{e}"))?,
                );
            }
        }
        VerifySuite::Slicing { p, trials } => {
            let fit = fit_slicing_decay(&SlicingSetup::default(), *p, *trials, seed)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let monotone = fit
                .mean_log_ratios
                .windows(2)
                .all(|w| w[0] > w[1]);
            let pass = monotone && fit.delta >= 0.2;
            output.write(&format!(
                "{}\n",
                serde_json::to_string_pretty(&serde_json::json!({
                    "spec": {"command": "verify slicing", "p": p, "trials": trials, "seed": seed},
                    "fit": fit,
                    "pass": pass,
                }))?
            ))?;
            return Ok(if pass { 0 } else { 1 });
        }
    }
    let (lines, all_pass) = report_lines(&reports)?;
    let summary = format!(
        "{lines}{}\n",
        serde_json::json!({
            "total": reports.len(),
            "passed": reports.iter().filter(|r| r.pass).count(),
            "seed": seed,
        })
    );
    output.write(&summary)?;
    Ok(if all_pass { 0 } else { 1 })
}

fn run_scan(args: &ScanArgs, seed: u64, format: Format, output: &Output) -> Result<i32> {
    match &args.scan {
        ScanKind::Weak11 {
            family,
            ladder,
            cells,
            n,
        } => {
            let spec = SweepSpec {
                operator: match family {
                    ScanFamily::Balls => NormKind::L2,
                    _ => NormKind::Linf,
                },
                p: 1.0,
                ladder: parse_floats(ladder)?,
                cells_per_side: *cells,
                ladder_ratio: 2f64.powf(0.25),
                family: match family {
                    ScanFamily::Cubes => FamilyTag::SweptCubes,
                    ScanFamily::Balls => FamilyTag::SweptBalls,
                    ScanFamily::Diamonds => FamilyTag::DiamondWitness,
                    ScanFamily::Grid => FamilyTag::GridHalfBall,
                },
                mc_samples: *n,
                seed,
            };
            let table = weak11_scan(&spec).map_err(|e| anyhow::anyhow!("{e}"))?;
            emit_scan(&table, format, output)?;
            Ok(if table.pass { 0 } else { 1 })
        }
        ScanKind::Lp {
            kind,
            p,
            ladder,
            cells,
        } => {
            let spec = SweepSpec {
                operator: (*kind).into(),
                p: *p,
                ladder: parse_floats(ladder)?,
                cells_per_side: *cells,
                ladder_ratio: 2f64.powf(0.25),
                family: FamilyTag::GridHalfBall,
                mc_samples: 0,
                seed,
            };
            let table = lp_scan(&spec).map_err(|e| anyhow::anyhow!("{e}"))?;
            emit_scan(&table, format, output)?;
            Ok(if table.pass { 0 } else { 1 })
        }
        ScanKind::Contrast { kind, ladder, cells } => {
            let spec = SweepSpec {
                operator: (*kind).into(),
                p: 1.0,
                ladder: parse_floats(ladder)?,
                cells_per_side: *cells,
                ladder_ratio: 2f64.powf(0.25),
                family: FamilyTag::GridHalfBall,
                mc_samples: 0,
                seed,
            };
            let table = centered_contrast(&spec).map_err(|e| anyhow::anyhow!("{e}"))?;
            match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf).map_err(|e| anyhow::anyhow!("{e}"))?;
                    output.write(&String::from_utf8(buf)?)?;
                }
                Format::Json => {
                    output.write(&format!("{}\n", serde_json::to_string_pretty(&table)?))?
                }
            }
            Ok(if table.pass { 0 } else { 1 })
        }
    }
}

fn emit_scan(table: &expmax::experiments::ScanTable, format: Format, output: &Output) -> Result<()> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf).map_err(|e| anyhow::anyhow!("{e}"))?;
            output.write(&String::from_utf8(buf)?)?;
        }
        Format::Json => output.write(&format!("{}\n", serde_json::to_string_pretty(table)?))?,
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    let output = Output {
        out: cli.out.clone(),
    };
    let result = match &cli.command {
        Command::Measure(a) => run_measure(a, cli.seed, &output),
        Command::Maxop(a) => run_maxop(a, &output),
        Command::Counterexample(a) => run_counterexample(a, cli.seed, cli.format, &output),
        Command::Verify(a) => run_verify(a, cli.seed, &output),
        Command::Scan(a) => run_scan(a, cli.seed, cli.format, &output),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
