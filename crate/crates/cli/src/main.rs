mod settings;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qfisher::checks::run_checks;
use qfisher::fisher::{fisher_pair, LimitPolicy, ProjectorSet, ProjectorSetFile};
use qfisher::interferometer::{InterferometerModel, ModelDescription, PhaseEncoding};
use qfisher::optimal::{construct_nonorthogonal_optimal, construct_orthogonal_optimal, omega_frame, Construction};
use qfisher::saturation::{check_saturation_with_policy, Verdict};
use qfisher::scan::{run_scan, ScanConfig};
use qfisher::{Error, Tolerances};

use settings::{parse_angles, parse_list, FileValues, NumericFlags};

const EXIT_VERIFY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_CONSTRUCTION: u8 = 4;
const EXIT_WEAK_COMM: u8 = 5;

#[derive(Parser)]
#[command(name = "qfisher", version, about = "Fisher information and saturation analysis for multiphase interferometers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Builtin model (mzi3, mzi4) or path to a model JSON file.
    #[arg(long)]
    model: Option<String>,
    /// `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    numeric: NumericFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Orthogonal,
    Nonorthogonal,
}

#[derive(Subcommand)]
enum Cmd {
    /// FIM, QFIM and their gap at one point.
    Compute {
        #[command(flatten)]
        common: Common,
        /// Comma-separated phases, e.g. `0,pi/2`.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
    },
    /// Gap over a two-dimensional phase grid.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Cells per axis: `N` or `N1,N2`.
        #[arg(long)]
        resolution: Option<String>,
        /// `lo,hi` for the first swept phase.
        #[arg(long, allow_hyphen_values = true)]
        range1: Option<String>,
        /// `lo,hi` for the second swept phase.
        #[arg(long, allow_hyphen_values = true)]
        range2: Option<String>,
        /// Indices of the two swept phases.
        #[arg(long)]
        axes: Option<String>,
        /// Values of all phases; swept entries are ignored.
        #[arg(long, allow_hyphen_values = true)]
        fixed: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Summary JSON path; defaults next to --out, else stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Residual table and verdict of the saturation conditions.
    CheckSaturation {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        /// `fock` or a projector-set JSON file.
        #[arg(long)]
        projectors: Option<String>,
    },
    /// Builds a saturating measurement and re-checks it.
    ConstructOptimal {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
        /// Probe admixture of the non-orthogonal variant, in (0, 1].
        #[arg(long)]
        mix: Option<f64>,
    },
    /// Reference-value table for the builtin models.
    VerifyPaper {
        /// Run a single check id.
        #[arg(long)]
        only: Option<String>,
    },
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::LimitNonConvergent { .. } | Error::StepTooLarge { .. } => EXIT_NUMERIC,
            Error::WeakCommutativityViolated { .. } => EXIT_WEAK_COMM,
            Error::InternalInconsistency(_) => EXIT_VERIFY,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

struct Context {
    file: FileValues,
    model: InterferometerModel,
    tol: Tolerances,
    policy: LimitPolicy,
    out: Option<PathBuf>,
}

impl Context {
    fn new(common: &Common) -> std::result::Result<Self, Failure> {
        let file = match &common.config {
            Some(p) => FileValues::load(p)?,
            None => FileValues::default(),
        };
        let model_name = file.pick(common.model.clone(), "model")?.unwrap_or_else(|| "mzi3".into());
        let model = load_model(&model_name)?;
        let tol = common.numeric.tolerances(&file)?;
        let policy = common.numeric.policy(&file, &tol)?;
        let out = file.pick(common.out.clone().map(|p| p.display().to_string()), "out")?.map(PathBuf::from);
        Ok(Self {
            file,
            model,
            tol,
            policy,
            out,
        })
    }

    fn theta(&self, flag: Option<String>) -> std::result::Result<Vec<f64>, Failure> {
        let text = self
            .file
            .pick(flag, "theta")?
            .ok_or_else(|| Error::InvalidConfig("--theta is required".into()))?;
        let theta = parse_angles(&text)?;
        if theta.len() != self.model.num_params() {
            return Err(Error::DimensionMismatch {
                what: "theta",
                expected: self.model.num_params(),
                found: theta.len(),
            }
            .into());
        }
        Ok(theta)
    }
}

fn load_model(name: &str) -> qfisher::Result<InterferometerModel> {
    if let Some(m) = InterferometerModel::builtin(name) {
        return Ok(m);
    }
    let text = fs::read_to_string(name)
        .map_err(|e| Error::InvalidModel(format!("`{name}` is neither a builtin model nor a readable file: {e}")))?;
    ModelDescription::from_json(&text)?.build()
}

/// Writes all `(path, content)` pairs or none: content goes to sibling
/// temp files first, which are removed if any write or rename fails.
fn write_outputs(files: &[(&Path, &str)]) -> qfisher::Result<()> {
    let mut staged: Vec<(PathBuf, &Path)> = Vec::new();
    let result = (|| {
        for (path, content) in files {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".partial");
            let tmp = PathBuf::from(tmp);
            staged.push((tmp.clone(), path));
            fs::write(&tmp, content)?;
        }
        for (tmp, path) in &staged {
            fs::rename(tmp, path)?;
        }
        Ok(())
    })();
    if result.is_err() {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}

fn emit(out: Option<&Path>, content: &str) -> qfisher::Result<()> {
    match out {
        Some(p) => write_outputs(&[(p, content)]),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> qfisher::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn cmd_compute(common: Common, theta: Option<String>) -> CmdResult {
    let ctx = Context::new(&common)?;
    let theta = ctx.theta(theta)?;
    let set = ProjectorSet::fock(ctx.model.basis());
    let pair = fisher_pair(&ctx.model, &theta, &set, &ctx.policy)?;
    eprintln!(
        "gap = {:.6e}  ({} zero-probability outcomes{})",
        pair.gap,
        pair.singular_outcomes.len(),
        if pair.direction_dependent { ", direction dependent" } else { "" }
    );
    emit(ctx.out.as_deref(), &to_json(&pair)?)?;
    Ok(())
}

fn parse_pair(text: &str, what: &str) -> qfisher::Result<[f64; 2]> {
    let v = parse_angles(text)?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::InvalidConfig(format!("`{what}` needs two values"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    common: Common,
    resolution: Option<String>,
    range1: Option<String>,
    range2: Option<String>,
    axes: Option<String>,
    fixed: Option<String>,
    format: Option<Format>,
    summary: Option<PathBuf>,
) -> CmdResult {
    let ctx = Context::new(&common)?;
    let f = &ctx.file;
    let d = ctx.model.num_params();
    let mut config = ScanConfig::new(d);
    config.policy = ctx.policy.clone();
    config.gap_threshold = ctx.tol.gap_sat;
    if let Some(r) = f.pick(resolution, "resolution")? {
        let n: Vec<usize> = parse_list(&r, "resolution")?;
        config.resolution = match n.as_slice() {
            [a] => [*a, *a],
            [a, b] => [*a, *b],
            _ => return Err(Error::InvalidConfig("`resolution` takes one or two values".into()).into()),
        };
    }
    if let Some(r) = f.pick(range1, "range1")? {
        config.ranges[0] = parse_pair(&r, "range1")?;
    }
    if let Some(r) = f.pick(range2, "range2")? {
        config.ranges[1] = parse_pair(&r, "range2")?;
    }
    if let Some(a) = f.pick(axes, "axes")? {
        let v: Vec<usize> = parse_list(&a, "axes")?;
        config.axes = match v.as_slice() {
            [a, b] => [*a, *b],
            _ => return Err(Error::InvalidConfig("`axes` needs two indices".into()).into()),
        };
    }
    if let Some(x) = f.pick(fixed, "fixed")? {
        config.fixed = parse_angles(&x)?;
    }
    let format = match f.raw("format") {
        _ if format.is_some() => format.unwrap_or(Format::Csv),
        Some("json") => Format::Json,
        Some("csv") | None => Format::Csv,
        Some(other) => return Err(Error::InvalidConfig(format!("unknown format `{other}`")).into()),
    };
    config.validate(d)?;

    let set = ProjectorSet::fock(ctx.model.basis());
    let grid = run_scan(&ctx.model, &set, &config)?;
    let body = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            grid.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("CSV is ASCII")
        }
        Format::Json => to_json(&grid)?,
    };
    let summary_json = to_json(&grid.summary())?;
    let summary_path = f.pick(summary.map(|p| p.display().to_string()), "summary")?.map(PathBuf::from).or_else(|| {
        ctx.out.as_ref().map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".summary.json");
            PathBuf::from(s)
        })
    });
    match (&ctx.out, &summary_path) {
        (Some(o), Some(s)) => write_outputs(&[(o, &body), (s, &summary_json)])?,
        (None, Some(s)) => {
            write_outputs(&[(s, &summary_json)])?;
            emit(None, &body)?;
        }
        (out, None) => {
            emit(out.as_deref(), &body)?;
            eprint!("{summary_json}");
        }
    }
    Ok(())
}

fn load_projectors(spec: &str, model: &InterferometerModel, tol: &Tolerances) -> qfisher::Result<ProjectorSet> {
    if spec == "fock" {
        return Ok(ProjectorSet::fock(model.basis()));
    }
    let text = fs::read_to_string(spec)?;
    // Either a bare projector file or a construct-optimal result.
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(inner) = value.get_mut("projector_set") {
        value = inner.take();
    }
    let file: ProjectorSetFile = serde_json::from_value(value)?;
    ProjectorSet::from_file(&file, model.basis(), tol)
}

fn cmd_check_saturation(common: Common, theta: Option<String>, projectors: Option<String>) -> CmdResult {
    let ctx = Context::new(&common)?;
    let theta = ctx.theta(theta)?;
    let spec = ctx.file.pick(projectors, "projectors")?.unwrap_or_else(|| "fock".into());
    let set = load_projectors(&spec, &ctx.model, &ctx.tol)?;
    let report = check_saturation_with_policy(&ctx.model, &theta, &set, &ctx.tol, &ctx.policy)?;
    eprintln!("verdict: {:?}  gap = {:.6e}", report.verdict, report.gap);
    emit(ctx.out.as_deref(), &report.to_json()?)?;
    Ok(())
}

#[derive(Serialize)]
struct ConstructionOutput {
    construction: Construction,
    theta: Vec<f64>,
    in_span: usize,
    coefficients: Vec<Vec<f64>>,
    projector_set: ProjectorSetFile,
    verification: Verification,
}

#[derive(Serialize)]
struct Verification {
    verdict: Verdict,
    gap: f64,
}

fn cmd_construct(common: Common, theta: Option<String>, variant: Option<Variant>, mix: Option<f64>) -> CmdResult {
    let ctx = Context::new(&common)?;
    let theta = ctx.theta(theta)?;
    let variant = match ctx.file.raw("variant") {
        _ if variant.is_some() => variant.unwrap_or(Variant::Orthogonal),
        Some("nonorthogonal") => Variant::Nonorthogonal,
        Some("orthogonal") | None => Variant::Orthogonal,
        Some(other) => return Err(Error::InvalidConfig(format!("unknown variant `{other}`")).into()),
    };
    let mix = ctx.file.pick(mix, "mix")?.unwrap_or(0.5);
    let frame = omega_frame(&ctx.model.derivative_states(&theta)?);
    let built = match variant {
        Variant::Orthogonal => construct_orthogonal_optimal(&frame, &ctx.tol),
        Variant::Nonorthogonal => construct_nonorthogonal_optimal(&frame, mix, &ctx.tol),
    };
    let built = match built {
        Err(Error::InternalInconsistency(m)) => {
            return Err(Failure {
                code: EXIT_CONSTRUCTION,
                message: m,
            })
        }
        other => other?,
    };

    let verification = match check_saturation_with_policy(&ctx.model, &theta, &built.set, &ctx.tol, &ctx.policy) {
        Ok(r) => r,
        Err(Error::InternalInconsistency(m)) => {
            return Err(Failure {
                code: EXIT_CONSTRUCTION,
                message: format!("construction self-check failed: {m}"),
            })
        }
        Err(e) => return Err(e.into()),
    };
    eprintln!(
        "verification: {:?}  gap = {:.3e}  ({} projectors, {} in span)",
        verification.verdict,
        verification.gap,
        built.len(),
        built.in_span
    );
    if verification.verdict != Verdict::Saturates {
        return Err(Failure {
            code: EXIT_CONSTRUCTION,
            message: format!(
                "construction self-check failed: verdict {:?}, gap {:e}",
                verification.verdict, verification.gap
            ),
        });
    }
    let out = ConstructionOutput {
        construction: built.construction,
        theta,
        in_span: built.in_span,
        coefficients: built.coefficients.clone(),
        projector_set: built.set.to_file(),
        verification: Verification {
            verdict: verification.verdict,
            gap: verification.gap,
        },
    };
    emit(ctx.out.as_deref(), &to_json(&out)?)?;
    Ok(())
}

fn cmd_verify(only: Option<String>) -> CmdResult {
    let outcomes = run_checks(only.as_deref())?;
    let mut failed = 0;
    for c in &outcomes {
        println!(
            "{:<16} {}  {}\n    expected: {}\n    computed: {}\n    tolerance: {}",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.description,
            c.expected,
            c.computed,
            c.tolerance
        );
        if !c.pass {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", outcomes.len(), failed);
    if failed > 0 {
        return Err(Failure {
            code: EXIT_VERIFY,
            message: format!("{failed} check(s) failed"),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Compute { common, theta } => cmd_compute(common, theta),
        Cmd::Scan {
            common,
            resolution,
            range1,
            range2,
            axes,
            fixed,
            format,
            summary,
        } => cmd_scan(common, resolution, range1, range2, axes, fixed, format, summary),
        Cmd::CheckSaturation {
            common,
            theta,
            projectors,
        } => cmd_check_saturation(common, theta, projectors),
        Cmd::ConstructOptimal {
            common,
            theta,
            variant,
            mix,
        } => cmd_construct(common, theta, variant, mix),
        Cmd::VerifyPaper { only } => cmd_verify(only),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
