//! `fif`: command-line front end over the fractal interpolation library.
//!
//! Every numeric value prints with 17 significant digits so piped output
//! round-trips through text without losing bits. Exit codes: 0 on success,
//! 2 when a system fails validation or a computation cannot proceed, 3 for
//! usage errors (reported on standard error).

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use fif_core::attractor::{self, ChaosGameParams, PolylineApproximant};
use fif_core::continuation::{self, Address};
use fif_core::ifs::InterpolationIFS;
use fif_core::registry::{self, ExampleSystem};
use fif_core::render::{rasterize, Window};
use fif_core::{analysis, export};

#[derive(Parser)]
#[command(
    name = "fif",
    version,
    about = "Fractal interpolation functions: attractors, continuations, analysis"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SystemArgs {
    /// Example selector, e.g. `parabola` or `tent-family:p=0.25`
    #[arg(long, value_name = "ID[:NAME=VALUE,...]", conflicts_with = "config")]
    example: Option<String>,
    /// JSON file describing the system
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ContinueArgs {
    /// Address such as `12(21)`; parentheses mark the repeating part
    #[arg(long)]
    address: String,
    /// Point to evaluate
    #[arg(long, conflicts_with = "cloud", allow_negative_numbers = true)]
    x: Option<f64>,
    /// Largest continuation order to try when locating the point
    #[arg(long, default_value_t = 32)]
    depth: usize,
    /// Write the order-k continuation cloud as CSV instead
    #[arg(long, requires = "k")]
    cloud: bool,
    /// Continuation order for --cloud
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    /// Random orbit sampling
    Chaos,
    /// Deterministic polyline refinement with a certified error bound
    Wop,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DimMethod {
    /// Solve the scaling equation for two branches
    Eq,
    /// Box-count a sampled cloud
    Box,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the endpoint and contraction conditions, printing the numbers
    Validate {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Sample the attractor and write it as CSV
    Attract {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum, default_value = "chaos")]
        method: Method,
        /// Points to sample (chaos method)
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Refinement rounds (wop method)
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Output file; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the attractor function at a point
    Eval {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 40)]
        depth: usize,
    },
    /// Evaluate or sample a continuation along an address
    Continue {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        args: ContinueArgs,
    },
    /// Write every order-k continuation as CSV plus a JSON manifest
    Ensemble {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep only rows inside `x_lo,x_hi,y_lo,y_hi`
        #[arg(long, value_name = "X_LO,X_HI,Y_LO,Y_HI", allow_hyphen_values = true)]
        window: Option<String>,
        /// Directory for the CSV files and manifest.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Regularity and dimension analysis
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCmd,
    },
    /// Rasterize the attractor (and optionally its continuations) as PPM
    Render {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        out: PathBuf,
        /// Plot window `x_lo,x_hi,y_lo,y_hi`; fitted to the data when omitted
        #[arg(long, value_name = "X_LO,X_HI,Y_LO,Y_HI", allow_hyphen_values = true)]
        window: Option<String>,
        /// Image size in pixels
        #[arg(long, default_value = "800x600", value_name = "WIDTHxHEIGHT")]
        size: String,
        /// Draw all order-k continuations, one color each (0 = attractor only)
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the built-in example systems
    ListExamples,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Certified Lipschitz bound for the attractor function
    Lipschitz {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Derivative at a point, summed from the branch series
    Derivative {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        /// Stop once the remaining tail is below this
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Points reachable along two different addresses, one per line
    DoublePoints {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Fractal dimension of the attractor graph
    Dimension {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum)]
        method: DimMethod,
        /// First horizontal contraction (eq method, two branches)
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        /// Vertical scalings (eq method)
        #[arg(long, allow_negative_numbers = true)]
        d1: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        d2: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Invalid(String),
    /// Stdout's reader went away (e.g. `fif ... | head`); finish quietly.
    Pipe,
}

impl From<fif_core::Error> for Failure {
    fn from(e: fif_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            Failure::Pipe
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

impl SystemArgs {
    fn load(&self) -> CliResult<ExampleSystem> {
        match (&self.example, &self.config) {
            (Some(selector), None) => registry::get_example(selector)
                .map(|entry| entry.system)
                .map_err(|e| Failure::Usage(e.to_string())),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                Ok(export::system_from_json(&text)?)
            }
            _ => Err(Failure::Usage(
                "select a system with --example <id> or --config <file>".into(),
            )),
        }
    }

    fn interpolation(&self) -> CliResult<InterpolationIFS> {
        match self.load()? {
            ExampleSystem::Interpolation(ifs) => Ok(ifs),
            ExampleSystem::Planar(_) => Err(Failure::Invalid(
                "this operation needs an interpolation system; planar ones support \
                 validate, attract --method chaos, and render"
                    .into(),
            )),
        }
    }
}

fn sig(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_window(text: &str) -> CliResult<[f64; 4]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad window {text:?}, want x_lo,x_hi,y_lo,y_hi")))?;
    match parts.as_slice() {
        &[a, b, c, d] => Ok([a, b, c, d]),
        _ => Err(Failure::Usage(format!(
            "bad window {text:?}, want four comma-separated numbers"
        ))),
    }
}

fn parse_size(text: &str) -> CliResult<(usize, usize)> {
    let err = || Failure::Usage(format!("bad size {text:?}, want WIDTHxHEIGHT"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(err)?;
    Ok((
        w.trim().parse().map_err(|_| err())?,
        h.trim().parse().map_err(|_| err())?,
    ))
}

fn parse_address(text: &str, n_branches: usize) -> CliResult<Address> {
    Address::parse(text, n_branches).map_err(|e| Failure::Usage(e.to_string()))
}

fn emit(text: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn say(line: impl std::fmt::Display) -> CliResult<()> {
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{line}")?;
    Ok(())
}

fn run_validate(system: &SystemArgs) -> CliResult<()> {
    match system.load()? {
        ExampleSystem::Interpolation(ifs) => {
            let report = ifs.validate()?;
            let mut text = String::new();
            let _ = writeln!(text, "endpoint residual (x): {}", sig(report.residual_a));
            let _ = writeln!(text, "endpoint residual (y): {}", sig(report.residual_b));
            let _ = writeln!(text, "join residual:         {}", sig(report.residual_c));
            let _ = writeln!(text, "conditions pass:       {}", report.conditions_pass);
            let _ = writeln!(text, "sup |dF/dx|:           {}", sig(report.m_bound));
            let _ = writeln!(text, "sup |dF/dy|:           {}", sig(report.s_bound));
            let _ = writeln!(text, "metric weight:         {}", sig(report.metric_e));
            let _ = writeln!(
                text,
                "metric contraction:    {}",
                sig(report.metric_contraction)
            );
            let _ = writeln!(text, "invertible in y:       {:?}", report.invertible_in_y);
            for w in &report.warnings {
                let _ = writeln!(text, "warning: {w}");
            }
            emit(&text, &None)?;
            if report.is_valid() {
                Ok(())
            } else {
                Err(Failure::Invalid("system conditions fail".into()))
            }
        }
        ExampleSystem::Planar(gifs) => {
            let report = gifs.validate()?;
            let norms: Vec<String> = report.norms.iter().map(|&n| sig(n)).collect();
            let mut text = String::new();
            let _ = writeln!(text, "map norms:          [{}]", norms.join(", "));
            match report.certified_weight {
                Some(w) => {
                    let _ = writeln!(text, "certified weight:   {}", sig(w));
                }
                None => {
                    let _ = writeln!(text, "certified weight:   none found");
                }
            }
            let _ = writeln!(text, "contraction factor: {}", sig(report.contraction));
            emit(&text, &None)?;
            if report.is_contractive() {
                Ok(())
            } else {
                Err(Failure::Invalid("no contraction certificate found".into()))
            }
        }
    }
}

fn run_attract(
    system: &SystemArgs,
    method: Method,
    count: usize,
    seed: u64,
    depth: usize,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let params = ChaosGameParams::new(count, seed);
    let rows = match (method, system.load()?) {
        (Method::Chaos, ExampleSystem::Interpolation(ifs)) => {
            attractor::chaos_game_tagged(&ifs, &params)?
        }
        (Method::Chaos, ExampleSystem::Planar(gifs)) => {
            attractor::chaos_game_2d_tagged(&gifs, &params)?
        }
        (Method::Wop, ExampleSystem::Interpolation(ifs)) => {
            let mut f = PolylineApproximant::chord(&ifs)?;
            for _ in 0..depth {
                f = attractor::w_operator(&ifs, &f)?;
            }
            export::tag_by_branch(&ifs, &f.points())
        }
        (Method::Wop, ExampleSystem::Planar(_)) => {
            return Err(Failure::Invalid(
                "polyline refinement needs an interpolation system".into(),
            ))
        }
    };
    emit(&export::csv_from_tagged(&rows), out)
}

fn run_continue(system: &SystemArgs, args: &ContinueArgs) -> CliResult<()> {
    let ifs = system.interpolation()?;
    let theta = parse_address(&args.address, ifs.n_branches())?;
    if args.cloud {
        let k = args.k.expect("clap enforces --k with --cloud");
        let params = ChaosGameParams::new(args.count, args.seed);
        let points = continuation::continuation_cloud(&ifs, &theta, k, &params)?;
        let csv = export::csv_from_tagged(&export::tag_all(&points, 0));
        return emit(&csv, &args.out);
    }
    match args.x {
        Some(x) => {
            let r = continuation::continue_eval(&ifs, &theta, x, args.depth)?;
            say(sig(r.value))?;
            Ok(())
        }
        None => Err(Failure::Usage(
            "provide --x <point>, or --cloud --k <order>".into(),
        )),
    }
}

fn run_ensemble(
    system: &SystemArgs,
    k: usize,
    count: usize,
    seed: u64,
    window: &Option<String>,
    out: &PathBuf,
) -> CliResult<()> {
    let ifs = system.interpolation()?;
    let window = window.as_deref().map(parse_window).transpose()?;
    let params = ChaosGameParams::new(count, seed);
    let bundle = export::ensemble_bundle(&ifs, k, &params, window)?;
    fs::create_dir_all(out)?;
    for (name, text) in &bundle.files {
        fs::write(out.join(name), text)?;
    }
    fs::write(out.join("manifest.json"), &bundle.manifest)?;
    Ok(())
}

fn run_analyze(what: &AnalyzeCmd) -> CliResult<()> {
    match what {
        AnalyzeCmd::Lipschitz { system } => {
            let bound = analysis::lipschitz_bound(&system.interpolation()?)?;
            say(sig(bound.lambda))?;
        }
        AnalyzeCmd::Derivative { system, x, tol } => {
            let v = analysis::derivative_series(&system.interpolation()?, *x, *tol)?;
            say(sig(v))?;
        }
        AnalyzeCmd::DoublePoints { system, depth } => {
            let set = analysis::double_points(&system.interpolation()?, *depth)?;
            let mut stdout = io::stdout().lock();
            for x in &set.xs {
                writeln!(stdout, "{}", sig(*x))?;
            }
        }
        AnalyzeCmd::Dimension {
            system,
            method,
            a,
            d1,
            d2,
            count,
            seed,
        } => match method {
            DimMethod::Eq => {
                let (a, d1, d2) = match (a, d1, d2) {
                    (Some(a), Some(d1), Some(d2)) => (*a, *d1, *d2),
                    _ => {
                        return Err(Failure::Usage(
                            "--method eq needs --a, --d1, and --d2".into(),
                        ))
                    }
                };
                let result = analysis::dimension_solve(a, d1, d2)?;
                say(sig(result.value))?;
            }
            DimMethod::Box => {
                let ifs = system.interpolation()?;
                let cloud = attractor::chaos_game(&ifs, &ChaosGameParams::new(*count, *seed))?;
                let result = analysis::box_dimension(&cloud, 4..=10)?;
                say(sig(result.value))?;
            }
        },
    }
    Ok(())
}

fn run_render(
    system: &SystemArgs,
    out: &PathBuf,
    window: &Option<String>,
    size: &str,
    k: usize,
    count: usize,
    seed: u64,
) -> CliResult<()> {
    let (width, height) = parse_size(size)?;
    let params = ChaosGameParams::new(count, seed);
    let clouds: Vec<Vec<(f64, f64)>> = match system.load()? {
        ExampleSystem::Planar(gifs) => {
            if k > 0 {
                return Err(Failure::Invalid(
                    "continuation ensembles need an interpolation system".into(),
                ));
            }
            vec![attractor::chaos_game_2d(&gifs, &params)?]
        }
        ExampleSystem::Interpolation(ifs) => {
            if k == 0 {
                vec![attractor::chaos_game(&ifs, &params)?]
            } else {
                continuation::ensemble_words(ifs.n_branches(), k)?
                    .par_iter()
                    .map(|word| {
                        let theta = Address::finite(word.clone());
                        continuation::continuation_cloud(&ifs, &theta, k, &params)
                    })
                    .collect::<fif_core::Result<_>>()?
            }
        }
    };
    let window = match window {
        Some(text) => {
            let [x_lo, x_hi, y_lo, y_hi] = parse_window(text)?;
            Window::new(x_lo, x_hi, y_lo, y_hi, width, height)?
        }
        None => Window::fit(&clouds, width, height)?,
    };
    fs::write(out, rasterize(&clouds, &window))?;
    Ok(())
}

fn run_list_examples() -> CliResult<()> {
    for info in registry::list_examples() {
        if info.params.is_empty() {
            say(format_args!("{}: {}", info.id, info.description))?;
        } else {
            let params: Vec<String> = info
                .params
                .iter()
                .map(|(name, default)| format!("{name}={default}"))
                .collect();
            say(format_args!(
                "{} ({}): {}",
                info.id,
                params.join(", "),
                info.description
            ))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.cmd {
        Cmd::Validate { system } => run_validate(system),
        Cmd::Attract {
            system,
            method,
            count,
            seed,
            depth,
            out,
        } => run_attract(system, *method, *count, *seed, *depth, out),
        Cmd::Eval { system, x, depth } => {
            let v = attractor::evaluate(&system.interpolation()?, *x, *depth)?;
            say(sig(v))?;
            Ok(())
        }
        Cmd::Continue { system, args } => run_continue(system, args),
        Cmd::Ensemble {
            system,
            k,
            count,
            seed,
            window,
            out,
        } => run_ensemble(system, *k, *count, *seed, window, out),
        Cmd::Analyze { what } => run_analyze(what),
        Cmd::Render {
            system,
            out,
            window,
            size,
            k,
            count,
            seed,
        } => run_render(system, out, window, size, *k, *count, *seed),
        Cmd::ListExamples => run_list_examples(),
    }
}

fn main() -> std::process::ExitCode {
    use std::process::ExitCode;

    if let Ok(threads) = std::env::var("FIF_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(3);
        }
        Err(e) => {
            // Help and version output requested explicitly.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Pipe) => ExitCode::SUCCESS,
    }
}
