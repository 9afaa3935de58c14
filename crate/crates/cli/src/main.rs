mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hjet_core::counterexample::{build_curve, CounterexampleCurve, CounterexampleParams};
use hjet_core::diff_analysis::{
    approx_density, lp_remainder_ladder, whitney_sieve, SampledFunction, SieveOptions,
};
use hjet_core::exact_poly::rational::{int, parse, to_pq, NumberFormat, Rational};
use hjet_core::exact_poly::{PiecewisePolynomial, Polynomial};
use hjet_core::horizontality::{extendability_report, horizontality_residual, lift, Tolerances};
use hjet_core::jets::{default_ladder, JetDocument};
use num::Zero;
use serde_json::{json, Value};

use crate::io::{column, csv_text, number_format, parse_ladder, read_columns, write_json, write_metadata, write_text};

#[derive(Parser)]
#[command(name = "hjet", version, about = "Exact checks for jets, horizontal curves and the Whitney counterexample")]
struct Cli {
    /// Print rationals as decimals with this many digits instead of p/q.
    #[arg(long, global = true, value_name = "K")]
    decimal: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, verify or probe the counterexample curve.
    #[command(subcommand)]
    Counterexample(CounterexampleCmd),
    /// Whitney and horizontality checks on jet files.
    #[command(subcommand)]
    Jets(JetsCmd),
    /// Horizontal lifts of planar curves.
    #[command(subcommand)]
    Curve(CurveCmd),
    /// Remainder ladders and approximate-differentiability densities.
    #[command(subcommand)]
    Diff(DiffCmd),
    /// Grid sieve for a compact set carrying a Whitney field.
    Sieve(SieveArgs),
}

#[derive(Subcommand)]
enum CounterexampleCmd {
    /// Write the intervals, components and curve samples.
    Build {
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Uniform samples written to samples.csv.
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run every exact check on the construction.
    Verify {
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        p_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Area/velocity ratio across a component of generation n + 1.
    Straddle {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum JetsCmd {
    /// Extendability report for a jet file.
    Check {
        #[arg(long)]
        input: PathBuf,
        /// Expected jet order.
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        ladder: LadderArg,
        #[arg(long, default_value = "1/1000000000000")]
        tol_whitney: String,
        #[arg(long, default_value = "1/1000000000000")]
        tol_ode: String,
        #[arg(long, default_value = "1/1000000000000")]
        tol_area: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CurveCmd {
    /// Lift a piecewise-linear planar curve given as CSV columns t,f,g[,h].
    Lift {
        #[arg(long)]
        input: PathBuf,
        /// Starting height; defaults to the first h value, or 0.
        #[arg(long)]
        h0: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct LadderArg {
    /// Scales as "a..b" (2^-a to 2^-b) or a comma-separated list.
    #[arg(long)]
    ladder: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    F,
    G,
    H,
}

#[derive(Args)]
struct SourceArgs {
    /// CSV with columns t,value on a uniform grid.
    #[arg(long, conflicts_with = "counterexample")]
    input: Option<PathBuf>,
    /// Use a coordinate of the counterexample curve.
    #[arg(long)]
    counterexample: bool,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, value_enum, default_value = "f")]
    field: Field,
    /// Differentiate the chosen coordinate this many times.
    #[arg(long, default_value_t = 0)]
    derivative: usize,
}

#[derive(Subcommand)]
enum DiffCmd {
    /// Normalized L^p remainders along a ladder of radii.
    Lp {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        p: u32,
        /// Coefficients c0,c1,... of the comparison polynomial (default 0).
        #[arg(long)]
        poly: Option<String>,
        #[command(flatten)]
        ladder: LadderArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density of {y : |u(y) - P(y)| <= eps |y - x|^m} in B(x, R).
    Density {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        radius: String,
        #[arg(long)]
        poly: Option<String>,
    },
}

#[derive(Args)]
struct SieveArgs {
    /// CSV with columns t,u0,...,um on a uniform grid over [0,1].
    #[arg(long, conflicts_with = "counterexample")]
    input: Option<PathBuf>,
    #[arg(long)]
    counterexample: bool,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long)]
    eps: String,
    #[arg(long, default_value_t = 1 << 14)]
    grid: usize,
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    #[command(flatten)]
    ladder: LadderArg,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Result of a command that ran to completion.
enum Outcome {
    Pass,
    CheckFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let fmt = number_format(cli.decimal);
    match run(cli.command, fmt) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, fmt: NumberFormat) -> Result<Outcome> {
    match command {
        Command::Counterexample(cmd) => counterexample(cmd, fmt),
        Command::Jets(JetsCmd::Check { input, m, ladder, tol_whitney, tol_ode, tol_area, out }) => {
            let tol = Tolerances { whitney: parse(&tol_whitney)?, ode: parse(&tol_ode)?, area: parse(&tol_area)? };
            jets_check(&input, m, ladder.ladder.as_deref(), &tol, out.as_deref(), fmt)
        }
        Command::Curve(CurveCmd::Lift { input, h0, out }) => curve_lift(&input, h0.as_deref(), out.as_deref(), fmt),
        Command::Diff(cmd) => diff(cmd, fmt),
        Command::Sieve(args) => sieve(args, fmt),
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn outcome(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    }
}

fn build(depth: usize) -> Result<CounterexampleCurve> {
    let params = CounterexampleParams::with_depth(depth);
    Ok(build_curve(&params)?)
}

fn counterexample(cmd: CounterexampleCmd, fmt: NumberFormat) -> Result<Outcome> {
    match cmd {
        CounterexampleCmd::Build { depth, samples, out_dir } => {
            if samples == 0 {
                bail!("--samples must be positive");
            }
            let c = build(depth)?;
            let levels: Vec<Value> = c
                .level_sets
                .iter()
                .enumerate()
                .map(|(i, s)| json!({"n": i + 1, "set": s, "measure": fmt.render(&s.measure())}))
                .collect();
            write_json(
                &out_dir.join("intervals.json"),
                &json!({"levels": levels, "union": c.union, "measure": fmt.render(&c.union.measure())}),
            )?;
            let comps = c.components().map(|k| {
                vec![k.level.to_string(), k.index.to_string(), fmt.render(&k.center), fmt.render(&k.lo), fmt.render(&k.hi)]
            });
            write_text(&out_dir.join("components.csv"), &csv_text(&["level", "index", "center", "lo", "hi"], comps)?)?;
            let knots = c.curve.breakpoints().iter().map(|t| {
                let (f, g, h) = c.curve.eval(t).expect("breakpoint in domain");
                vec![fmt.render(t), fmt.render(&f), fmt.render(&g), fmt.render(&h)]
            });
            write_text(&out_dir.join("curve.csv"), &csv_text(&["t", "f", "g", "h"], knots)?)?;
            let grid = (0..=samples).map(|i| {
                let t = int(i as i64) / int(samples as i64);
                let (f, g, h) = c.eval(&t).expect("sample in domain");
                vec![fmt.render(&t), fmt.render(&f), fmt.render(&g), fmt.render(&h)]
            });
            write_text(&out_dir.join("samples.csv"), &csv_text(&["t", "f", "g", "h"], grid)?)?;
            write_metadata(&out_dir, "counterexample build", json!({"depth": depth, "samples": samples}))?;
            println!("{} components, {} breakpoints", c.components().count(), c.curve.breakpoints().len());
            Ok(Outcome::Pass)
        }
        CounterexampleCmd::Verify { depth, p_max, out } => {
            let c = build(depth)?;
            let report = c.verify(p_max)?;
            let mut value = report.to_json(&fmt);
            value["depth"] = json!(depth);
            value["pass"] = json!(report.passes());
            emit(&value, out.as_deref())?;
            if let Some(path) = &out {
                let dir = path.parent().unwrap_or(Path::new("."));
                write_metadata(dir, "counterexample verify", json!({"depth": depth, "p_max": p_max}))?;
            }
            Ok(outcome(report.passes()))
        }
        CounterexampleCmd::Straddle { n, depth } => {
            if n == 0 || n >= depth {
                bail!("--n must lie in 1..{depth} so that generation n + 1 exists");
            }
            let c = build(depth)?;
            let report = c.straddle_ratio(n)?;
            emit(&report.to_json(&fmt), None)?;
            Ok(Outcome::Pass)
        }
    }
}

fn jets_check(
    input: &Path,
    m: Option<usize>,
    ladder: Option<&str>,
    tol: &Tolerances,
    out: Option<&Path>,
    fmt: NumberFormat,
) -> Result<Outcome> {
    let text = std::fs::read_to_string(input).with_context(|| format!("cannot read {}", input.display()))?;
    let doc: JetDocument = serde_json::from_str(&text).context("malformed jet file")?;
    if let Some(m) = m {
        if m != doc.order() {
            bail!("the jet file has order {}, not {m}", doc.order());
        }
    }
    let ladder = match ladder {
        Some(text) => parse_ladder(text)?,
        None => default_ladder(),
    };
    let (value, pass) = if doc.is_triple() {
        let report = extendability_report(&doc.to_triple()?, Some(&ladder), tol)?;
        (report.to_json(&fmt), report.verdict())
    } else {
        let jet = doc.to_jet()?;
        let profile: Vec<_> = jet
            .modulus_profile(&ladder)
            .into_iter()
            .map(|(delta, w)| hjet_core::horizontality::ProfilePoint {
                delta,
                value: hjet_core::exact_poly::CertifiedValue::exact(w.value),
                pair: w.pair,
            })
            .collect();
        let pass = hjet_core::horizontality::profile_passes(&profile, &tol.whitney);
        let points: Vec<Value> = profile.iter().map(|p| p.to_json(&fmt)).collect();
        (
            json!({"whitney": {"profile": points, "pass": pass}, "verdict": if pass { "pass" } else { "fail" }}),
            pass,
        )
    };
    emit(&value, out)?;
    Ok(outcome(pass))
}

fn curve_lift(input: &Path, h0: Option<&str>, out: Option<&Path>, fmt: NumberFormat) -> Result<Outcome> {
    let (header, rows) = read_columns(input)?;
    let get = |name: &str| column(&header, &rows, name).ok_or_else(|| anyhow!("missing column {name:?}"));
    let (t, f, g) = (get("t")?, get("f")?, get("g")?);
    let h_in = column(&header, &rows, "h");
    let start = match (h0, &h_in) {
        (Some(s), _) => parse(s)?,
        (None, Some(h)) => h[0].clone(),
        (None, None) => Rational::zero(),
    };
    let polyline = |v: &[Rational]| -> Result<PiecewisePolynomial> {
        let pieces = (0..t.len().saturating_sub(1))
            .map(|i| Polynomial::line_through(&t[i], &v[i], &t[i + 1], &v[i + 1]))
            .collect();
        Ok(PiecewisePolynomial::new(t.clone(), pieces)?)
    };
    let curve = lift(&polyline(&f)?, &polyline(&g)?, &start)?;
    let mut mismatch = Vec::new();
    let rows_out: Vec<Vec<String>> = t
        .iter()
        .enumerate()
        .map(|(i, ti)| {
            let (fv, gv, hv) = curve.eval(ti).expect("node in domain");
            if let Some(h) = &h_in {
                if h[i] != hv {
                    mismatch.push(json!({"t": fmt.render(ti), "given": fmt.render(&h[i]), "lifted": fmt.render(&hv)}));
                }
            }
            vec![fmt.render(ti), fmt.render(&fv), fmt.render(&gv), fmt.render(&hv)]
        })
        .collect();
    let csv = csv_text(&["t", "f", "g", "h"], rows_out)?;
    match out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    let residual = horizontality_residual(&curve)?;
    let pass = residual.value.is_zero() && mismatch.is_empty();
    let summary = json!({
        "horizontality_residual": residual.render(&fmt),
        "h_mismatches": mismatch,
        "pass": pass,
    });
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(outcome(pass))
}

fn counterexample_field(depth: usize, field: Field, derivative: usize) -> Result<PiecewisePolynomial> {
    let c = build(depth)?;
    let base = match field {
        Field::F => c.curve.f,
        Field::G => c.curve.g,
        Field::H => c.curve.h,
    };
    Ok((0..derivative).fold(base, |u, _| u.derivative()))
}

fn load_source(src: &SourceArgs) -> Result<SampledFunction> {
    match (&src.input, src.counterexample) {
        (Some(path), false) => {
            let (header, rows) = read_columns(path)?;
            let t = column(&header, &rows, "t").ok_or_else(|| anyhow!("missing column \"t\""))?;
            let v = column(&header, &rows, "value").ok_or_else(|| anyhow!("missing column \"value\""))?;
            let samples: Vec<(Rational, Rational)> = t.into_iter().zip(v).collect();
            Ok(SampledFunction::from_samples(&samples)?)
        }
        (None, true) => Ok(SampledFunction::Exact(counterexample_field(src.depth, src.field, src.derivative)?)),
        _ => bail!("give exactly one of --input or --counterexample"),
    }
}

fn parse_poly(text: Option<&str>) -> Result<Polynomial> {
    match text {
        None => Ok(Polynomial::zero()),
        Some(s) => Ok(Polynomial::new(s.split(',').map(|c| parse(c.trim())).collect::<Result<Vec<_>, _>>()?)),
    }
}

fn diff(cmd: DiffCmd, fmt: NumberFormat) -> Result<Outcome> {
    match cmd {
        DiffCmd::Lp { source, x, m, p, poly, ladder, out } => {
            let u = load_source(&source)?;
            let x = parse(&x)?;
            let scales = match (&ladder.ladder, source.counterexample) {
                (Some(text), _) => parse_ladder(text)?,
                (None, true) => {
                    let params = CounterexampleParams::with_depth(source.depth);
                    (6..=source.depth).map(|n| params.lambda_n(n)).collect()
                }
                (None, false) => bail!("--ladder is required for sampled input"),
            };
            let report = lp_remainder_ladder(&u, &parse_poly(poly.as_deref())?, &x, m, p, &scales)?;
            let csv = report.to_csv(&fmt);
            match &out {
                Some(path) => {
                    write_text(path, &csv)?;
                    let dir = path.parent().unwrap_or(Path::new("."));
                    write_metadata(dir, "diff lp", json!({"x": to_pq(&x), "m": m, "p": p}))?;
                }
                None => print!("{csv}"),
            }
            Ok(Outcome::Pass)
        }
        DiffCmd::Density { source, x, m, eps, radius, poly } => {
            let u = load_source(&source)?;
            let d = approx_density(&u, &parse_poly(poly.as_deref())?, &parse(&x)?, m, &parse(&eps)?, &parse(&radius)?)?;
            let mut value = json!({"density": d.render(&fmt)});
            if !d.is_exact() {
                value["error_bound"] = json!(fmt.render(&d.error));
            }
            emit(&value, None)?;
            Ok(Outcome::Pass)
        }
    }
}


fn sieve(args: SieveArgs, fmt: NumberFormat) -> Result<Outcome> {
    let fields: Vec<SampledFunction> = match (&args.input, args.counterexample) {
        (Some(path), false) => {
            let (header, rows) = read_columns(path)?;
            let t = column(&header, &rows, "t").ok_or_else(|| anyhow!("missing column \"t\""))?;
            (0..=args.m)
                .map(|k| {
                    let name = format!("u{k}");
                    let v = column(&header, &rows, &name).ok_or_else(|| anyhow!("missing column {name:?}"))?;
                    let samples: Vec<(Rational, Rational)> = t.iter().cloned().zip(v).collect();
                    Ok(SampledFunction::from_samples(&samples)?)
                })
                .collect::<Result<_>>()?
        }
        (None, true) => {
            let f = counterexample_field(args.depth, Field::F, 0)?;
            let mut out = vec![f];
            for _ in 0..args.m {
                let next = out.last().unwrap().derivative();
                out.push(next);
            }
            out.into_iter().map(SampledFunction::Exact).collect()
        }
        _ => bail!("give exactly one of --input or --counterexample"),
    };
    let mut opts = SieveOptions { grid: args.grid, n_max: args.n_max, ..SieveOptions::default() };
    if let Some(text) = &args.ladder.ladder {
        opts.ladder = parse_ladder(text)?;
    }
    let report = whitney_sieve(&fields, args.m, &parse(&args.eps)?, &opts)?;
    write_json(&args.out_dir.join("retained.json"), &serde_json::to_value(&report.retained)?)?;
    write_json(&args.out_dir.join("modulus.json"), &report.modulus_json(&fmt))?;
    write_json(&args.out_dir.join("report.json"), &report.to_json(&fmt))?;
    write_metadata(
        &args.out_dir,
        "sieve",
        json!({"m": args.m, "eps": args.eps, "grid": args.grid, "n_max": args.n_max, "counterexample": args.counterexample}),
    )?;
    println!("retained measure {}", fmt.render(&report.retained.measure()));
    Ok(outcome(report.stages.iter().all(|s| s.within_budget)))
}
