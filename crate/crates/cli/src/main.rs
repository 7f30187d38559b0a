use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use loewner_core::evolution::{evolve, hydrodynamic_coefficient};
use loewner_core::io::{
    read_curve, write_curve, write_evolution, write_measure_series, write_sampled_driving,
    write_table,
};
use loewner_core::mc::{hm_mc_oracle, Side};
use loewner_core::verify::{self, Report, Settings};
use loewner_core::{
    compute_driving, hm_slit_sides, make_arc_curve, make_line_curve, measure_series, preimage,
    singular_solutions, solve_forward, Complex64, DrivingTerm, Error, TimeMesh,
};

/// Largest accepted interval count.
const MAX_INTERVALS: usize = 100_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "loewner",
    version,
    about = "Chordal Loewner evolution workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// f(z, t) at every mesh node.
    Forward {
        #[command(flatten)]
        run: TermRun,
        /// Start point as `re,im`.
        #[arg(long, default_value = "0,1", value_parser = parse_complex)]
        z: Complex64,
    },
    /// Singular solutions f1(0, t), f2(0, t).
    Singular(TermRun),
    /// Singular solutions together with the trace tips.
    Trace(TermRun),
    /// Zip a polyline read from CSV down to its sampled driver.
    Zip {
        #[arg(long)]
        curve: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Harmonic measures of the slit sides, or a Monte Carlo check on a curve.
    Hm(HmArgs),
    /// Write a curve fixture as `x,y` CSV.
    Fixture {
        #[command(subcommand)]
        shape: Shape,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run one asymptotic experiment and report pass/fail.
    Verify {
        #[command(subcommand)]
        claim: Claim,
    },
}

#[derive(Subcommand, Debug)]
enum Shape {
    /// Circular arc r(1 − e^{−iθ}) leaving the origin vertically.
    Arc {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long = "max-angle", default_value_t = verify::ARC_MAX_ANGLE)]
        max_angle: f64,
        #[arg(long = "n-points", default_value_t = 1000)]
        n_points: usize,
    },
    /// Segment at angle (π/2)(1 − c) to the real axis.
    Line {
        #[arg(long = "c-angle", allow_hyphen_values = true)]
        c_angle: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long = "n-points", default_value_t = 1000)]
        n_points: usize,
    },
}

#[derive(Args, Debug)]
struct TermRun {
    /// Driving term as JSON, or `@path` to a JSON file.
    #[arg(long)]
    term: String,
    #[arg(long = "T", default_value_t = 1.0)]
    end: f64,
    #[arg(long = "N", default_value_t = 1000)]
    intervals: usize,
    #[arg(long, default_value_t = 2.0)]
    grading: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct HmArgs {
    /// Driving term for the conformal series.
    #[arg(long, conflicts_with = "curve")]
    term: Option<String>,
    /// Polyline CSV: zipped, then the final measures are checked by Monte Carlo.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long = "T", default_value_t = 1.0)]
    end: f64,
    #[arg(long = "N", default_value_t = 1000)]
    intervals: usize,
    #[arg(long, default_value_t = 2.0)]
    grading: f64,
    #[arg(long, default_value_t = 100_000)]
    walkers: u64,
    /// Walker step; defaults to 1e-3 of the curve's bounding-box diagonal.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Subcommand, Debug)]
enum Claim {
    /// Side-measure ratio of a perpendicular arc tends to 1.
    Thm1 {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[command(flatten)]
        res: Resolution,
    },
    /// Limits of f1/√t and f2/√t for λ = c√t.
    Thm2 {
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[command(flatten)]
        res: Resolution,
    },
    /// Limits ±2 for λ = A·t^α with α > 1/2.
    Thm3 {
        #[arg(long = "A", allow_hyphen_values = true)]
        amplitude: f64,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        res: Resolution,
    },
    /// The trace of λ = c√t is not perpendicular to the axis.
    Cor1 {
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[command(flatten)]
        res: Resolution,
    },
    /// Side-measure ratio (1−c)/(1+c) of a tilted segment.
    Prop1 {
        #[arg(long = "c-angle", allow_hyphen_values = true)]
        c_angle: f64,
        #[command(flatten)]
        res: Resolution,
    },
    /// Trace covariance under t ↦ nt, λ ↦ √n·λ.
    Scaling {
        #[arg(long)]
        term: String,
        #[arg(long, default_value_t = 16.0)]
        n: f64,
        #[command(flatten)]
        res: Resolution,
    },
    /// s(t)/√t → 2 on the arc fixture.
    Arclength {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[command(flatten)]
        res: Resolution,
    },
}

#[derive(Args, Debug)]
struct Resolution {
    /// Mesh intervals per solve.
    #[arg(long = "N")]
    intervals: Option<usize>,
    #[arg(long)]
    grading: Option<f64>,
    /// Vertices of the curve fixture.
    #[arg(long = "n-points")]
    n_points: Option<usize>,
    /// Write the underlying series here as CSV.
    #[arg(long)]
    series: Option<PathBuf>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Resolution {
    fn settings(&self) -> Result<Settings, Error> {
        let mut s = Settings::default();
        if let Some(n) = self.intervals {
            check_intervals(n)?;
            s.intervals = n;
            s.trace_intervals = s.trace_intervals.min(n);
        }
        if let Some(g) = self.grading {
            s.grading = g;
        }
        if let Some(n) = self.n_points {
            s.fixture_points = n;
        }
        Ok(s)
    }
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `re,im`, got `{text}`"))?;
    let part = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    Ok(Complex64::new(part(re)?, part(im)?))
}

fn check_intervals(n: usize) -> Result<(), Error> {
    if n > MAX_INTERVALS {
        return Err(Error::Argument(format!(
            "N = {n} exceeds the limit {MAX_INTERVALS}"
        )));
    }
    Ok(())
}

fn load_term(spec: &str) -> Result<(DrivingTerm, Value), Error> {
    let text = match spec.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => spec.to_string(),
    };
    let term = DrivingTerm::from_json(&text)?;
    let echo = serde_json::from_str(&text)?;
    Ok((term, echo))
}

fn mesh_for(end: f64, intervals: usize, grading: f64) -> Result<TimeMesh, Error> {
    check_intervals(intervals)?;
    TimeMesh::graded(end, intervals, grading)
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Echo the resolved configuration to stderr and next to the output file.
fn echo_config(config: &Value, out: &Option<PathBuf>) -> Result<(), Error> {
    eprintln!("{}", serde_json::to_string(config)?);
    if let Some(path) = out {
        let mut sidecar = path.clone().into_os_string();
        sidecar.push(".config.json");
        std::fs::write(
            Path::new(&sidecar),
            serde_json::to_string_pretty(config)? + "\n",
        )?;
    }
    Ok(())
}

fn write_json(value: &Value, out: &Option<PathBuf>) -> Result<(), Error> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn term_config(command: &str, run: &TermRun, term: Value) -> Value {
    json!({
        "command": command,
        "term": term,
        "mesh": { "T": run.end, "N": run.intervals, "grading_exponent": run.grading },
        "output": { "path": run.out.out, "format": format!("{:?}", run.out.format).to_lowercase() },
    })
}

fn forward(run: &TermRun, z: Complex64) -> Result<(), Error> {
    let (term, echo) = load_term(&run.term)?;
    let mut config = term_config("forward", run, echo);
    config["z"] = json!([z.re, z.im]);
    echo_config(&config, &run.out.out)?;
    let mesh = mesh_for(run.end, run.intervals, run.grading)?;
    let values = solve_forward(&term, &mesh, z)?;
    match run.out.format {
        Format::Csv => {
            let mut w = sink(&run.out.out)?;
            writeln!(w, "t,re,im")?;
            for (t, f) in mesh.nodes().iter().zip(&values) {
                writeln!(w, "{t:.16e},{:.16e},{:.16e}", f.re, f.im)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let b = hydrodynamic_coefficient(&term, &mesh, 1e3).ok();
            write_json(
                &json!({
                    "config": config,
                    "t": mesh.nodes(),
                    "re": values.iter().map(|f| f.re).collect::<Vec<_>>(),
                    "im": values.iter().map(|f| f.im).collect::<Vec<_>>(),
                    "hydrodynamic_coefficient": b,
                }),
                &run.out.out,
            )?;
        }
    }
    Ok(())
}

fn singular(run: &TermRun, with_trace: bool) -> Result<(), Error> {
    let (term, echo) = load_term(&run.term)?;
    let config = term_config(if with_trace { "trace" } else { "singular" }, run, echo);
    echo_config(&config, &run.out.out)?;
    let mesh = mesh_for(run.end, run.intervals, run.grading)?;
    let result = if with_trace {
        evolve(&term, &mesh)?
    } else {
        singular_solutions(&term, &mesh)?
    };
    match run.out.format {
        Format::Csv => {
            let mut w = sink(&run.out.out)?;
            write_evolution(&result, &mut w)?;
            w.flush()?;
        }
        Format::Json => write_json(&json!({ "config": config, "result": result }), &run.out.out)?,
    }
    Ok(())
}

fn zip(curve_path: &Path, out: &Output) -> Result<(), Error> {
    let config = json!({
        "command": "zip",
        "curve": curve_path,
        "output": { "path": out.out, "format": format!("{:?}", out.format).to_lowercase() },
    });
    echo_config(&config, &out.out)?;
    let curve = read_curve(BufReader::new(File::open(curve_path)?))?;
    let (term, _) = compute_driving(&curve)?;
    let DrivingTerm::Sampled(samples) = &term else {
        unreachable!("the zipper returns a sampled driver")
    };
    match out.format {
        Format::Csv => {
            let mut w = sink(&out.out)?;
            write_sampled_driving(samples, &curve, &mut w)?;
            w.flush()?;
        }
        Format::Json => write_json(
            &json!({
                "config": config,
                "t": samples.times(),
                "lambda": samples.values(),
                "s": curve.arclength(),
            }),
            &out.out,
        )?,
    }
    Ok(())
}

fn hm(args: &HmArgs) -> Result<(), Error> {
    match (&args.term, &args.curve) {
        (Some(spec), None) => {
            let (term, echo) = load_term(spec)?;
            let config = json!({
                "command": "hm",
                "term": echo,
                "mesh": { "T": args.end, "N": args.intervals, "grading_exponent": args.grading },
                "output": { "path": args.out.out, "format": format!("{:?}", args.out.format).to_lowercase() },
            });
            echo_config(&config, &args.out.out)?;
            let mesh = mesh_for(args.end, args.intervals, args.grading)?;
            let result = singular_solutions(&term, &mesh)?;
            let nodes: Vec<usize> = (1..result.len()).collect();
            let series = measure_series(&result, &nodes)?;
            match args.out.format {
                Format::Csv => {
                    let mut w = sink(&args.out.out)?;
                    write_measure_series(&series, &mut w)?;
                    w.flush()?;
                }
                Format::Json => write_json(
                    &json!({ "config": config, "series": series }),
                    &args.out.out,
                )?,
            }
            Ok(())
        }
        (None, Some(path)) => {
            let curve = read_curve(BufReader::new(File::open(path)?))?;
            let diagonal = {
                let (mut lo, mut hi) = (
                    Complex64::new(f64::MAX, f64::MAX),
                    Complex64::new(f64::MIN, f64::MIN),
                );
                for p in curve.points() {
                    lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
                    hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
                }
                (hi - lo).norm()
            };
            let step = args.step.unwrap_or(1e-3 * diagonal);
            let config = json!({
                "command": "hm",
                "curve": path,
                "walkers": args.walkers,
                "step": step,
                "seed": args.seed,
                "output": { "path": args.out.out, "format": "json" },
            });
            echo_config(&config, &args.out.out)?;
            let (term, mesh) = compute_driving(&curve)?;
            let result = singular_solutions(&term, &mesh)?;
            let (m1, m2) = hm_slit_sides(&result, mesh.intervals())?;
            let z0 = preimage(&term, &mesh, Complex64::new(0.0, 1.0))?;
            let right = hm_mc_oracle(&curve, Side::Right, z0, args.walkers, step, args.seed)?;
            let left = hm_mc_oracle(&curve, Side::Left, z0, args.walkers, step, args.seed)?;
            write_json(
                &json!({
                    "config": config,
                    "z0": [z0.re, z0.im],
                    "conformal": { "m1": m1, "m2": m2 },
                    "monte_carlo": { "m1": right, "m2": left },
                }),
                &args.out.out,
            )
        }
        _ => Err(Error::Argument(
            "hm needs exactly one of --term or --curve".into(),
        )),
    }
}

fn fixture(shape: &Shape, out: &Option<PathBuf>) -> Result<(), Error> {
    let (config, curve) = match shape {
        Shape::Arc {
            radius,
            max_angle,
            n_points,
        } => (
            json!({ "command": "fixture arc", "radius": radius, "max_angle": max_angle, "n_points": n_points }),
            make_arc_curve(*radius, *max_angle, *n_points)?,
        ),
        Shape::Line {
            c_angle,
            length,
            n_points,
        } => (
            json!({ "command": "fixture line", "c_angle": c_angle, "length": length, "n_points": n_points }),
            make_line_curve(*c_angle, *length, *n_points)?,
        ),
    };
    echo_config(&config, out)?;
    let mut w = sink(out)?;
    write_curve(&curve, &mut w)?;
    w.flush()?;
    Ok(())
}

fn verify_claim(claim: &Claim) -> Result<bool, Error> {
    let (name, res) = match claim {
        Claim::Thm1 { res, .. } => ("thm1", res),
        Claim::Thm2 { res, .. } => ("thm2", res),
        Claim::Thm3 { res, .. } => ("thm3", res),
        Claim::Cor1 { res, .. } => ("cor1", res),
        Claim::Prop1 { res, .. } => ("prop1", res),
        Claim::Scaling { res, .. } => ("scaling", res),
        Claim::Arclength { res, .. } => ("arclength", res),
    };
    let settings = res.settings()?;
    let mut config = json!({
        "command": format!("verify {name}"),
        "settings": settings,
        "output": { "path": res.out, "series": res.series, "format": "json" },
    });
    let report: Report = match claim {
        Claim::Thm1 { radius, .. } => {
            config["radius"] = json!(radius);
            echo_config(&config, &res.out)?;
            verify::verify_thm1(*radius, settings.fixture_points, &settings)?
        }
        Claim::Thm2 { c, .. } => {
            config["c"] = json!(c);
            echo_config(&config, &res.out)?;
            verify::verify_thm2(*c, &settings)?
        }
        Claim::Thm3 {
            amplitude, alpha, ..
        } => {
            config["A"] = json!(amplitude);
            config["alpha"] = json!(alpha);
            echo_config(&config, &res.out)?;
            verify::verify_thm3(*amplitude, *alpha, &settings)?
        }
        Claim::Cor1 { c, .. } => {
            config["c"] = json!(c);
            echo_config(&config, &res.out)?;
            verify::verify_cor1(*c, &settings)?
        }
        Claim::Prop1 { c_angle, .. } => {
            config["c_angle"] = json!(c_angle);
            echo_config(&config, &res.out)?;
            verify::verify_prop1(*c_angle, settings.fixture_points, &settings)?
        }
        Claim::Scaling { term, n, .. } => {
            let (term, echo) = load_term(term)?;
            config["term"] = echo;
            config["n"] = json!(n);
            echo_config(&config, &res.out)?;
            verify::verify_scaling(&term, *n, settings.trace_intervals)?
        }
        Claim::Arclength { radius, .. } => {
            config["radius"] = json!(radius);
            echo_config(&config, &res.out)?;
            verify::verify_arclength(*radius, settings.fixture_points, &settings)?
        }
    };
    if let Some(path) = &res.series {
        let table = report
            .series
            .as_ref()
            .ok_or_else(|| Error::Argument(format!("{name} has no series to write")))?;
        write_table(table, BufWriter::new(File::create(path)?))?;
    }
    let mut value = serde_json::to_value(&report)?;
    value["config"] = config;
    write_json(&value, &res.out)?;
    Ok(report.pass)
}

fn run(cli: Cli) -> Result<bool, Error> {
    match &cli.command {
        Command::Forward { run, z } => forward(run, *z).map(|_| true),
        Command::Singular(run) => singular(run, false).map(|_| true),
        Command::Trace(run) => singular(run, true).map(|_| true),
        Command::Zip { curve, out } => zip(curve, out).map(|_| true),
        Command::Hm(args) => hm(args).map(|_| true),
        Command::Fixture { shape, out } => fixture(shape, out).map(|_| true),
        Command::Verify { claim } => verify_claim(claim),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
