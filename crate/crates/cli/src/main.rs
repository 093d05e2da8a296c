//! `hypmet`: command-line front end.
//!
//! Every command prints one JSON report on standard output (or to
//! `--output`). Failures print `{"error": {...}}` and exit with 1 for
//! malformed input, 2 for an infeasible target and 3 for numerical failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hypmet::metrics::{self, ConeAngles, Curvature, Flavor, MetricVector};
use hypmet::solver::{self, SolveOptions};
use hypmet::{Complex, Error, GluingSpec};

#[derive(Parser, Debug)]
#[command(name = "hypmet", version, about = "Hyperbolic polyhedral metrics with prescribed cone angles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the complex and report its edge and vertex classes.
    Validate(Common),
    /// Dihedral angles, cone angles and curvature of given lengths.
    Angles(Common),
    /// Volume and covolume of given lengths.
    Volume(Common),
    /// Find the metric with the target cone angles.
    Solve(Common),
    /// The volume-maximizing angle assignment for the target.
    MaxAngles(Common),
    /// Solve, then classify each tetrahedron of the maximizer.
    Classify(Common),
    /// Solve from several random starts and compare the results.
    Rigidity(Common),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FlavorArg {
    Ideal,
    Hyper,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Ideal => Flavor::Ideal,
            FlavorArg::Hyper => Flavor::Hyper,
        }
    }
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Triangulation JSON file.
    #[arg(long)]
    triangulation: PathBuf,
    #[arg(long, value_enum, default_value = "ideal")]
    flavor: FlavorArg,
    /// Target cone angles per edge class, as a JSON array (radians).
    #[arg(long, conflicts_with = "curvature")]
    cone_angles: Option<String>,
    /// Target curvature per edge class, as a JSON array (radians).
    #[arg(long)]
    curvature: Option<String>,
    /// Edge lengths per edge class, as a JSON array.
    #[arg(long)]
    lengths: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Number of random starts for `rigidity`.
    #[arg(long, default_value_t = 10)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Include wall-clock timings (makes reports run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Infeasible(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Input(_) => 1,
            Self::Infeasible(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    fn report(&self) -> Value {
        let (kind, message) = match self {
            Self::Input(m) => ("malformed_input", m),
            Self::Infeasible(m) => ("infeasible_target", m),
            Self::Numerical(m) => ("numerical_failure", m),
        };
        json!({ "error": { "kind": kind, "message": message, "exit_code": self.code() } })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Domain(_) | Error::Gluing(_) | Error::Shape { .. } | Error::NotClosed => Self::Input(message),
            Error::NotPositiveFeasible(_) => Self::Infeasible(message),
            _ => Self::Numerical(message),
        }
    }
}

fn parse_vector(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> =
        serde_json::from_str(text).map_err(|e| Failure::Input(format!("--{flag}: expected a JSON array of numbers ({e})")))?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Failure::Input(format!("--{flag}: entries must be finite")));
    }
    Ok(v)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

struct Context {
    complex: Complex,
    flavor: Flavor,
    input: serde_json::Map<String, Value>,
}

impl Context {
    fn load(args: &Common) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(&args.triangulation)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", args.triangulation.display())))?;
        let spec = GluingSpec::from_json(&text)?;
        let complex = Complex::build(&spec)?;
        let mut input = serde_json::Map::new();
        input.insert("triangulation".into(), json!(args.triangulation.display().to_string()));
        input.insert("flavor".into(), to_value(&Flavor::from(args.flavor)));
        Ok(Self {
            complex,
            flavor: args.flavor.into(),
            input,
        })
    }

    fn lengths(&mut self, args: &Common) -> Result<MetricVector, Failure> {
        let text = args
            .lengths
            .as_deref()
            .ok_or_else(|| Failure::Input("--lengths is required for this command".into()))?;
        let l = MetricVector(parse_vector("lengths", text)?);
        self.complex.check_edges(&l.0)?;
        self.input.insert("lengths".into(), to_value(&l.0));
        Ok(l)
    }

    /// The target as cone angles; curvature is converted edge by edge.
    fn target(&mut self, args: &Common) -> Result<ConeAngles, Failure> {
        let k = match (&args.cone_angles, &args.curvature) {
            (Some(text), None) => {
                let k = ConeAngles(parse_vector("cone-angles", text)?);
                self.complex.check_edges(&k.0)?;
                self.input.insert("cone_angles".into(), to_value(&k.0));
                k
            }
            (None, Some(text)) => {
                let curv = Curvature(parse_vector("curvature", text)?);
                let k = metrics::cone_angles_from_curvature(&self.complex, &curv)?;
                self.input.insert("curvature".into(), to_value(&curv.0));
                self.input.insert("cone_angles".into(), to_value(&k.0));
                k
            }
            _ => return Err(Failure::Input("exactly one of --cone-angles or --curvature is required".into())),
        };
        Ok(k)
    }

    fn options(&mut self, args: &Common) -> Result<SolveOptions, Failure> {
        if !(args.tol > 0.0) || !args.tol.is_finite() {
            return Err(Failure::Input("--tol must be a positive number".into()));
        }
        if args.max_iter == 0 {
            return Err(Failure::Input("--max-iter must be positive".into()));
        }
        self.input.insert("tol".into(), json!(args.tol));
        self.input.insert("max_iter".into(), json!(args.max_iter));
        Ok(SolveOptions {
            tol: args.tol,
            max_iter: args.max_iter,
            ..SolveOptions::default()
        })
    }
}

fn validate_report(c: &Complex) -> Value {
    let classes: Vec<Value> = c
        .edges()
        .iter()
        .enumerate()
        .map(|(e, class)| {
            json!({
                "id": e,
                "endpoints": [class.endpoints.0, class.endpoints.1],
                "boundary": class.boundary,
                "instances": class.instances.iter().map(|&(t, s)| json!([t, s])).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "edges": c.num_edges(),
        "vertices": c.num_vertices(),
        "closed": c.is_closed(),
        "tets": c.num_tets(),
        "edge_classes": classes,
    })
}

fn solve_report(k: &ConeAngles, r: &solver::SolveResult) -> Value {
    let residual = r.achieved.0.iter().zip(&k.0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    json!({
        "lengths": r.lengths.0,
        "assignment": to_value(&r.assignment),
        "achieved_cone_angles": r.achieved.0,
        "volume": r.volume,
        "w": r.w,
        "iterations": r.iterations,
        "gradient_norm": r.gradient_norm,
        "cone_angle_residual": residual,
    })
}

fn execute(command: &Command) -> Result<(Value, bool), Failure> {
    let (name, args) = match command {
        Command::Validate(a) => ("validate", a),
        Command::Angles(a) => ("angles", a),
        Command::Volume(a) => ("volume", a),
        Command::Solve(a) => ("solve", a),
        Command::MaxAngles(a) => ("max-angles", a),
        Command::Classify(a) => ("classify", a),
        Command::Rigidity(a) => ("rigidity", a),
    };
    let start = Instant::now();
    let mut ctx = Context::load(args)?;
    let mut ok = true;
    let result = match command {
        Command::Validate(_) => validate_report(&ctx.complex),
        Command::Angles(_) => {
            let l = ctx.lengths(args)?;
            let a = metrics::angles_of_metric(&ctx.complex, &l, ctx.flavor)?;
            let k = metrics::cone_angles(&ctx.complex, &a)?;
            let curv = metrics::curvature(&ctx.complex, &k)?;
            json!({ "assignment": to_value(&a), "cone_angles": k.0, "curvature": curv.0 })
        }
        Command::Volume(_) => {
            let l = ctx.lengths(args)?;
            let opts = SolveOptions::default();
            let volume = metrics::metric_volume(&ctx.complex, &l, ctx.flavor, opts.quad_tol)?;
            let cov = metrics::cov_complex_with_tol(&ctx.complex, &l, ctx.flavor, opts.quad_tol)?;
            json!({ "volume": volume, "covolume": cov.value, "cone_angles": cov.gradient.0 })
        }
        Command::Solve(_) | Command::MaxAngles(_) | Command::Classify(_) => {
            let k = ctx.target(args)?;
            let opts = ctx.options(args)?;
            let r = solver::solve_metric(&ctx.complex, &k, ctx.flavor, &opts)?;
            match command {
                Command::Solve(_) => solve_report(&k, &r),
                Command::MaxAngles(_) => json!({ "assignment": to_value(&r.assignment), "volume": r.volume }),
                _ => {
                    let verdicts = solver::classify_maximizer(&ctx.complex, &r, 1e-7)?;
                    json!({ "solve": solve_report(&k, &r), "verdicts": to_value(&verdicts) })
                }
            }
        }
        Command::Rigidity(_) => {
            let k = ctx.target(args)?;
            let opts = ctx.options(args)?;
            if args.starts < 2 {
                return Err(Failure::Input("--starts must be at least 2".into()));
            }
            ctx.input.insert("starts".into(), json!(args.starts));
            ctx.input.insert("seed".into(), json!(args.seed));
            let report = solver::rigidity_check(&ctx.complex, &k, ctx.flavor, args.starts, args.seed, &opts)?;
            ok = report.agree;
            json!({
                "agree": report.agree,
                "angle_spread": report.angle_spread,
                "length_spread": report.length_spread,
                "tolerance": report.tolerance,
                "runs": report.results.iter().map(|r| json!({
                    "lengths": r.lengths.0,
                    "iterations": r.iterations,
                    "gradient_norm": r.gradient_norm,
                    "volume": r.volume,
                })).collect::<Vec<_>>(),
            })
        }
    };
    let mut report = json!({ "command": name, "input": Value::Object(ctx.input), "result": result });
    if args.timings {
        report["timings"] = json!({ "total_seconds": start.elapsed().as_secs_f64() });
    }
    Ok((report, ok))
}

fn emit(report: &Value, output: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    match output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                // A closed pipe (e.g. `| head`) is not an error of ours.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::Input(format!("cannot write report: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn output_of(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Validate(a)
        | Command::Angles(a)
        | Command::Volume(a)
        | Command::Solve(a)
        | Command::MaxAngles(a)
        | Command::Classify(a)
        | Command::Rigidity(a) => a.output.as_ref(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Input(e.to_string().trim().to_string());
            println!("{}", serde_json::to_string_pretty(&f.report()).expect("serializes"));
            return ExitCode::from(f.code());
        }
    };
    let output = output_of(&cli.command);
    let outcome = execute(&cli.command).and_then(|(report, ok)| emit(&report, output).map(|_| ok));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        // A rigidity disagreement contradicts the uniqueness theorems: a numerical failure.
        Ok(false) => ExitCode::from(3),
        Err(f) => {
            let _ = emit(&f.report(), output);
            ExitCode::from(f.code())
        }
    }
}
