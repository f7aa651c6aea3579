//! Command-line front end: surgery, Morrey bounds, decompositions,
//! certificate verification, sampling and form evaluation.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use curve_surgery::current::BatterySpec;
use curve_surgery::decompose::decompose_flow;
use curve_surgery::io::{AtomsJson, SurgeryJson};
use curve_surgery::verify::{verify_decomposition, verify_surgery, Verification};
use curve_surgery::{fixtures, morrey_norm, surgery, surgery_eta, Curve, EdgeFlow, Space, SurgeryParams, WeightedCurrent};

/// Exit status when a certificate fails.
const EXIT_CERTIFICATE: u8 = 2;
/// Exit status for usage, input and I/O errors.
const EXIT_USAGE: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "curve-surgery", version, about = "Certified surgery of closed piecewise-geodesic curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cut a closed curve into pieces with bounded Morrey norm.
    Surgery(SurgeryArgs),
    /// Certified interval for the Morrey norm of a curve.
    Morrey(MorreyArgs),
    /// Atomic decomposition of a divergence-free edge flow.
    Decompose(DecomposeArgs),
    /// Re-check a stored surgery or decomposition result.
    Verify(VerifyArgs),
    /// Geodesic sampling of a curve, or a seeded random fixture.
    Sample(SampleArgs),
    /// Evaluate the current of a curve on a cone-form battery.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct SvgArgs {
    /// Also render the result as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Coordinates used for the SVG projection.
    #[arg(long, value_delimiter = ',', default_values_t = [0usize, 1])]
    axes: Vec<usize>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("params").required(true).args(["epsilon", "eta"])))]
struct SurgeryArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    /// Invertibility ratio in (0, 1).
    #[arg(long, requires = "n", conflicts_with = "eta")]
    epsilon: Option<f64>,
    /// Allowed number of short pieces per window.
    #[arg(long, requires = "epsilon")]
    n: Option<usize>,
    /// Length overhead in (0, 1); sets epsilon = eta/15 and n = ceil((15/eta)^2).
    #[arg(long, conflicts_with = "epsilon")]
    eta: Option<f64>,
    /// Scale of short pieces; defaults to the shortest piece of the input.
    #[arg(long, conflicts_with = "eta")]
    delta: Option<f64>,
    #[command(flatten)]
    svg: SvgArgs,
}

#[derive(Args, Debug)]
struct MorreyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Requested interval width; defaults to a relative 1e-6.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    /// Total weight may exceed the flow's mass by this factor.
    #[arg(long)]
    epsilon: f64,
    #[command(flatten)]
    svg: SvgArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fixture {
    Walk,
    Polygon,
    Zigzag,
    Segment,
    GridFlow,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceKind {
    Euclidean,
    Taxicab,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "fixture"])))]
struct SampleArgs {
    /// Curve to sample at spacing `--delta`.
    #[arg(long = "in", requires = "delta")]
    input: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    /// Generate a seeded fixture instead.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertex count (walk, polygon), edge count (zigzag) or grid side (grid-flow).
    #[arg(long, default_value_t = 50)]
    vertices: usize,
    #[arg(long, value_enum, default_value_t = SpaceKind::Euclidean)]
    space: SpaceKind,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Uniform partition count of the Riemann–Stieltjes sums.
    #[arg(long, default_value_t = 256)]
    m: usize,
    /// Battery specification; defaults to a 3-per-axis covering of the curve.
    #[arg(long)]
    battery: Option<PathBuf>,
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        anyhow::anyhow!("{}: invalid field `{}`: {}", path.display(), e.path(), e.inner())
    })
}

fn write<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn write_svg(args: &SvgArgs, curves: &[&Curve], background: bool) -> Result<()> {
    let Some(path) = &args.svg else { return Ok(()) };
    let (a, b) = match args.axes.as_slice() {
        [a, b] => (*a, *b),
        _ => bail!("--axes takes exactly two coordinates"),
    };
    fs::write(path, svg::render(curves, (a, b), background)).with_context(|| format!("cannot write {}", path.display()))
}

fn report(v: &Verification) -> u8 {
    for c in v.failures() {
        eprintln!("FAILED {}: value {} exceeds limit {}", c.name, c.value, c.limit);
    }
    if v.ok() {
        println!("ok: {} checks passed", v.checks.len());
        0
    } else {
        EXIT_CERTIFICATE
    }
}

fn certificate_status(checks: &[curve_surgery::BoundCheck]) -> u8 {
    let mut code = 0;
    for c in checks.iter().filter(|c| !c.ok) {
        eprintln!("FAILED {}: value {} exceeds limit {}", c.name, c.value, c.limit);
        code = EXIT_CERTIFICATE;
    }
    code
}

fn run_surgery(a: SurgeryArgs) -> Result<u8> {
    let curve: Curve = read(&a.input)?;
    let res = match (a.eta, a.epsilon, a.n) {
        (Some(eta), _, _) => surgery_eta(&curve, eta)?,
        (None, Some(epsilon), Some(n)) => surgery(
            &curve,
            SurgeryParams {
                epsilon,
                n,
                delta: a.delta,
            },
        )?,
        _ => bail!("give either --eta or both --epsilon and --n"),
    };
    write(&a.output, &SurgeryJson::new(&curve, &res))?;
    let mut all: Vec<&Curve> = vec![&curve];
    all.extend(res.pieces.iter());
    write_svg(&a.svg, &all, true)?;
    println!(
        "{} pieces, {} Type I and {} Type II cuts",
        res.pieces.len(),
        res.certificate.type1,
        res.certificate.type2
    );
    Ok(certificate_status(&res.certificate.bound_checks))
}

fn run_morrey(a: MorreyArgs) -> Result<u8> {
    if let Some(t) = a.tol {
        if !(t > 0.0) {
            bail!("--tol must be positive");
        }
    }
    let curve: Curve = read(&a.input)?;
    let est = morrey_norm(&curve, a.tol);
    println!("{}", serde_json::to_string_pretty(&est)?);
    Ok(if est.converged { 0 } else { EXIT_CERTIFICATE })
}

fn run_decompose(a: DecomposeArgs) -> Result<u8> {
    let flow: EdgeFlow = read(&a.input)?;
    let d = decompose_flow(&flow, a.epsilon)?;
    let code = certificate_status(&d.certificates.checks);
    let curves: Vec<&Curve> = d.atoms.iter().map(|x| &x.curve).collect();
    write_svg(&a.svg, &curves, false)?;
    println!("{} atoms, lambda sum {}", d.atoms.len(), d.certificates.lambda_sum);
    write(
        &a.output,
        &AtomsJson {
            input: flow,
            decomposition: d,
        },
    )?;
    Ok(code)
}

fn run_verify(a: VerifyArgs) -> Result<u8> {
    let value: serde_json::Value = read(&a.input)?;
    let v = if value.get("atoms").is_some() {
        verify_decomposition(&read::<AtomsJson>(&a.input)?)
    } else {
        verify_surgery(&read::<SurgeryJson>(&a.input)?)
    };
    Ok(report(&v))
}

fn run_sample(a: SampleArgs) -> Result<u8> {
    if let Some(path) = &a.input {
        let curve: Curve = read(path)?;
        let delta = a.delta.context("--delta is required with --in")?;
        write(&a.output, &curve.geodesic_sampling(delta)?)?;
        return Ok(0);
    }
    let space = match a.space {
        SpaceKind::Euclidean => Space::euclidean(a.dim),
        SpaceKind::Taxicab => Space::taxicab(),
    };
    let k = a.vertices;
    match a.fixture.context("give --in or --fixture")? {
        Fixture::Walk => write(&a.output, &fixtures::random_walk(&space, k.max(3), 0.1, a.seed))?,
        Fixture::Polygon => write(&a.output, &fixtures::random_polygon(&space, k.max(3), a.seed))?,
        Fixture::Segment => write(&a.output, &fixtures::random_segment(&space, a.seed))?,
        Fixture::Zigzag => write(&a.output, &fixtures::zigzag(k.max(1), 0.1))?,
        Fixture::GridFlow => write(&a.output, &fixtures::grid_flow(k.clamp(2, 20), 10, a.seed))?,
    }
    Ok(0)
}

fn run_eval(a: EvalArgs) -> Result<u8> {
    if a.m == 0 {
        bail!("--m must be at least 1");
    }
    let curve: Curve = read(&a.input)?;
    let space = curve.space().clone();
    let spec = match &a.battery {
        Some(p) => read::<BatterySpec>(p)?,
        None => {
            let (lo, hi) = curve.bbox();
            BatterySpec::covering(&space, &lo, &hi, 3)
        }
    };
    let battery = spec.build(&space)?;
    let current = WeightedCurrent::single(curve);
    let rows = battery
        .iter()
        .map(|form| {
            let e = current.evaluate(form, a.m)?;
            Ok(serde_json::json!({
                "f": form.f.label,
                "pi": form.pi.label,
                "value": e.value,
                "error_bound": e.error_bound,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(0)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("CURVE_SURGERY_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("CURVE_SURGERY_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Surgery(a) => run_surgery(a),
        Command::Morrey(a) => run_morrey(a),
        Command::Decompose(a) => run_decompose(a),
        Command::Verify(a) => run_verify(a),
        Command::Sample(a) => run_sample(a),
        Command::Eval(a) => run_eval(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let certification = e
                .downcast_ref::<curve_surgery::Error>()
                .is_some_and(|e| matches!(e, curve_surgery::Error::CutVerification { .. }));
            ExitCode::from(if certification { EXIT_CERTIFICATE } else { EXIT_USAGE })
        }
    }
}
