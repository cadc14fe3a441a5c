//! Command-line front end. Every command reads one JSON document (a file or
//! a built-in demo) and writes one JSON report.
//!
//! Exit codes: 0 when the verdict is positive, 1 when it is negative, 2 on
//! input or solver errors. Reports go through a temporary file and a rename,
//! so an error never leaves a partial report behind.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::approx::{approx_report, density_grid, sector_scan, ScanConfig};
use crate::complex::{CircleGrid, Disc};
use crate::demo::{demo_surface, demo_tool_input};
use crate::error::{Error, Result};
use crate::hull::{graph_samples, hull_probe};
use crate::minimax::LawsonConfig;
use crate::pipeline::{random_product_check, run_pipeline, PipelineOptions, DEFAULT_SEED};
use crate::poly::BihomPoly;
use crate::sheets::SheetSystem;
use crate::surface::{certify, certify_forced, CRSurface, ResidualEntry, SurfaceSpec};

pub const MIN_SAMPLES: usize = 64;
pub const MAX_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Certify,
    Pipeline,
    SectorScan,
    Approximate,
    HullProbe,
    Sheets,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Pipeline => "pipeline",
            Command::SectorScan => "sector-scan",
            Command::Approximate => "approximate",
            Command::HullProbe => "hull-probe",
            Command::Sheets => "sheets",
        }
    }

    fn reads_surface(self) -> bool {
        matches!(self, Command::Certify | Command::Pipeline | Command::Sheets)
    }
}

#[derive(Debug, Parser)]
#[command(name = "crsing", version, about = "Certify local polynomial convexity of CR-singular surface germs")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON input file (omit with --demo)
    pub input: Option<PathBuf>,
    /// Circle samples for the sup estimates
    #[arg(long, default_value_t = crate::surface::DEFAULT_CIRCLE_SAMPLES)]
    pub samples: usize,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use this index M instead of the best passing one
    #[arg(long = "force-M")]
    pub force_m: Option<usize>,
    /// Use this Kallin constant instead of the interval midpoint
    #[arg(long = "force-C")]
    pub force_c: Option<f64>,
    /// Check this working radius instead of searching for one
    #[arg(long)]
    pub eps: Option<f64>,
    /// Largest degree for approximate and hull-probe
    #[arg(long = "max-degree")]
    pub max_degree: Option<u32>,
    /// Run a built-in example instead of reading a file
    #[arg(long)]
    pub demo: Option<String>,
    /// Also write the error curve (approximate) or m-values (hull-probe) as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Demo(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: Source,
    pub samples: usize,
    pub out: Option<PathBuf>,
    pub force_m: Option<usize>,
    pub force_c: Option<f64>,
    pub eps: Option<f64>,
    pub max_degree: Option<u32>,
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let source = match (cli.input, cli.demo) {
            (Some(p), None) => Source::File(p),
            (None, Some(d)) => Source::Demo(d),
            (Some(_), Some(_)) => return Err(Error::invalid("give either an input file or --demo, not both")),
            (None, None) => return Err(Error::invalid("an input file or --demo NAME is required")),
        };
        if !(MIN_SAMPLES..=MAX_SAMPLES).contains(&cli.samples) {
            return Err(Error::invalid(format!("--samples must lie in [{MIN_SAMPLES}, {MAX_SAMPLES}]")));
        }
        if let Some(c) = cli.force_c {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::invalid("--force-C must lie in (0, 1)"));
            }
        }
        if let Some(e) = cli.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::invalid("--eps must be positive"));
            }
        }
        if cli.max_degree == Some(0) && cli.command == Command::HullProbe {
            return Err(Error::invalid("--max-degree must be at least 1 for hull-probe"));
        }
        Ok(Self {
            command: cli.command,
            source,
            samples: cli.samples,
            out: cli.out,
            force_m: cli.force_m,
            force_c: cli.force_c,
            eps: cli.eps,
            max_degree: cli.max_degree,
            csv: cli.csv,
        })
    }
}

/// Exit code plus report body (and optional CSV side output).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: serde_json::Value,
    pub csv: Option<String>,
}

pub fn parse_json<T: DeserializeOwned>(text: &str, path: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Json {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn load(cfg: &RunConfig) -> Result<(String, String)> {
    match &cfg.source {
        Source::File(p) => Ok((fs::read_to_string(p)?, p.display().to_string())),
        Source::Demo(name) => {
            let text = if cfg.command.reads_surface() {
                serde_json::to_string_pretty(&demo_surface(name)?.to_spec()).expect("surface serializes")
            } else {
                demo_tool_input(cfg.command.name(), name)?
            };
            Ok((text, format!("demo:{name}")))
        }
    }
}

/// Function of one complex variable given in a tool input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `Σ c z^a z̄^b`.
    Poly { terms: Vec<ResidualEntry> },
    /// The normalized sheet `F_0` of a certified surface.
    Sheet {
        surface: SurfaceSpec,
        #[serde(default)]
        force_m: Option<usize>,
    },
}

enum Resolved {
    Poly(BihomPoly),
    Sheet(Box<SheetSystem>),
}

impl Resolved {
    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Resolved::Poly(p) => p.eval(z),
            Resolved::Sheet(s) => s.f0_unchecked(z),
        }
    }

    /// Largest radius on which the function is defined.
    fn radius_cap(&self) -> f64 {
        match self {
            Resolved::Poly(_) => f64::INFINITY,
            Resolved::Sheet(s) => s.validity_radius(),
        }
    }
}

fn resolve(spec: &FunctionSpec, samples: usize) -> Result<Resolved> {
    match spec {
        FunctionSpec::Poly { terms } => Ok(Resolved::Poly(BihomPoly::from_terms(
            terms.iter().map(|t| ((t.a, t.b), Complex64::new(t.re, t.im))),
        ))),
        FunctionSpec::Sheet { surface, force_m } => {
            let s = surface.clone().into_surface()?;
            let grid = CircleGrid::new(samples)?;
            let cert = match force_m {
                Some(m) => certify_forced(&s, &grid, *m)?,
                None => certify(&s, &grid),
            };
            Ok(Resolved::Sheet(Box::new(SheetSystem::build(&s, &cert)?)))
        }
    }
}

fn check_radius(r: f64) -> Result<f64> {
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(Error::Schema(format!("radius must be positive, got {r}")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanInput {
    function: FunctionSpec,
    radius: f64,
    #[serde(default)]
    exceptional: Vec<Complex64>,
    #[serde(default)]
    grid: Option<ScanGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanGrid {
    n_radii: usize,
    n_angles: usize,
    zeta_radii: usize,
    zeta_angles: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproximateInput {
    function: FunctionSpec,
    target: FunctionSpec,
    radius: f64,
    #[serde(default)]
    schedule: Option<Vec<(u32, u32)>>,
    #[serde(default = "default_density_radii")]
    n_radii: usize,
    #[serde(default = "default_density_angles")]
    n_angles: usize,
}

fn default_density_radii() -> usize {
    64
}

fn default_density_angles() -> usize {
    256
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbePoint {
    z: Complex64,
    w: Complex64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HullInput {
    graph: FunctionSpec,
    radius: f64,
    probe: ProbePoint,
    #[serde(default)]
    max_degree: Option<u32>,
    #[serde(default = "default_hull_radii")]
    n_radii: usize,
    #[serde(default = "default_hull_angles")]
    n_angles: usize,
}

fn default_hull_radii() -> usize {
    48
}

fn default_hull_angles() -> usize {
    192
}

fn surface_input(cfg: &RunConfig) -> Result<CRSurface> {
    let (text, path) = load(cfg)?;
    CRSurface::from_json_str(&text, &path)
}

pub fn run_certify(cfg: &RunConfig) -> Result<Outcome> {
    let s = surface_input(cfg)?;
    let grid = CircleGrid::new(cfg.samples)?;
    let cert = match cfg.force_m {
        Some(m) => certify_forced(&s, &grid, m)?,
        None => certify(&s, &grid),
    };
    Ok(Outcome { code: if cert.passed { 0 } else { 1 }, report: serde_json::to_value(&cert).expect("serializes"), csv: None })
}

pub fn run_pipeline_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let s = surface_input(cfg)?;
    let opts = PipelineOptions {
        samples: cfg.samples,
        force_m: cfg.force_m,
        force_c: cfg.force_c,
        eps: cfg.eps,
        ..Default::default()
    };
    let rep = run_pipeline(&s, &opts)?;
    Ok(Outcome { code: if rep.passed { 0 } else { 1 }, report: serde_json::to_value(&rep).expect("serializes"), csv: None })
}

fn run_sheets(cfg: &RunConfig) -> Result<Outcome> {
    let s = surface_input(cfg)?;
    let grid = CircleGrid::new(cfg.samples)?;
    let cert = match cfg.force_m {
        Some(m) => certify_forced(&s, &grid, m)?,
        None => certify(&s, &grid),
    };
    if !cert.passed {
        return Ok(Outcome { code: 1, report: json!({"certificate": cert, "sheets": null}), csv: None });
    }
    let sys = SheetSystem::build(&s, &cert)?;
    let d = sys.validity_radius();
    let residual = random_product_check(&sys, 1000, DEFAULT_SEED)?;
    let jac = sys.min_jacobian_gap(d / 100.0, d, 32, 128)?;
    let report = json!({
        "certificate": cert,
        "sheets": sys.summary(),
        "product_residual": residual,
        "jacobian_min": jac,
    });
    Ok(Outcome { code: if residual <= 1e-9 && jac > 0.0 { 0 } else { 1 }, report, csv: None })
}

fn run_sector_scan(cfg: &RunConfig) -> Result<Outcome> {
    let (text, path) = load(cfg)?;
    let input: ScanInput = parse_json(&text, &path)?;
    let f = resolve(&input.function, cfg.samples)?;
    let radius = check_radius(input.radius)?.min(f.radius_cap());
    let mut scan = ScanConfig { exceptional: input.exceptional, ..Default::default() };
    if let Some(g) = input.grid {
        scan.n_radii = g.n_radii;
        scan.n_angles = g.n_angles;
        scan.zeta_radii = g.zeta_radii;
        scan.zeta_angles = g.zeta_angles;
    }
    let rep = sector_scan(|z| f.eval(z), &Disc::centered(radius)?, &scan);
    Ok(Outcome { code: if rep.passed { 0 } else { 1 }, report: serde_json::to_value(&rep).expect("serializes"), csv: None })
}

fn run_approximate(cfg: &RunConfig) -> Result<Outcome> {
    let (text, path) = load(cfg)?;
    let input: ApproximateInput = parse_json(&text, &path)?;
    let f = resolve(&input.function, cfg.samples)?;
    let t = resolve(&input.target, cfg.samples)?;
    let radius = check_radius(input.radius)?.min(f.radius_cap()).min(t.radius_cap());
    let schedule = match (input.schedule, cfg.max_degree) {
        (Some(s), None) => s,
        (Some(s), Some(d)) => s.into_iter().filter(|&(a, b)| a <= d && b <= d).collect(),
        (None, d) => (0..=d.unwrap_or(6)).map(|d| (d, d)).collect(),
    };
    if schedule.is_empty() {
        return Err(Error::invalid("empty schedule"));
    }
    let grid = density_grid(&Disc::centered(radius)?, input.n_radii, input.n_angles);
    let rep = approx_report(|z| f.eval(z), |z| t.eval(z), &schedule, &grid, &LawsonConfig::default())?;
    let csv = rep.to_csv();
    Ok(Outcome { code: 0, report: serde_json::to_value(&rep).expect("serializes"), csv: Some(csv) })
}

fn run_hull_probe(cfg: &RunConfig) -> Result<Outcome> {
    let (text, path) = load(cfg)?;
    let input: HullInput = parse_json(&text, &path)?;
    let f = resolve(&input.graph, cfg.samples)?;
    let radius = check_radius(input.radius)?.min(f.radius_cap());
    let d_max = cfg.max_degree.or(input.max_degree).unwrap_or(8);
    let samples = graph_samples(|z| f.eval(z), &Disc::centered(radius)?, input.n_radii, input.n_angles);
    let rep = hull_probe(&samples, (input.probe.z, input.probe.w), d_max, &LawsonConfig::default())?;
    let mut csv = String::from("degree,m,step_value,lower_bound,non_convergence\n");
    for i in 0..rep.degrees.len() {
        csv.push_str(&format!(
            "{},{:e},{:e},{:e},{}\n",
            rep.degrees[i], rep.m_values[i], rep.step_values[i], rep.lower_bounds[i], rep.non_convergence[i]
        ));
    }
    Ok(Outcome { code: 0, report: serde_json::to_value(&rep).expect("serializes"), csv: Some(csv) })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Certify => run_certify(cfg),
        Command::Pipeline => run_pipeline_cmd(cfg),
        Command::Sheets => run_sheets(cfg),
        Command::SectorScan => run_sector_scan(cfg),
        Command::Approximate => run_approximate(cfg),
        Command::HullProbe => run_hull_probe(cfg),
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn render(report: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = RunConfig::from_cli(cli).and_then(|cfg| {
        let out = run(&cfg)?;
        let body = render(&out.report);
        if let (Some(path), Some(csv)) = (&cfg.csv, &out.csv) {
            write_atomic(path, csv)?;
        }
        match &cfg.out {
            Some(path) => write_atomic(path, &body)?,
            None => print!("{body}"),
        }
        Ok(out.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("crsing: {e}");
            2
        }
    }
}

/// Caps the global rayon pool at `CRSING_THREADS` when set.
pub fn init_threads() {
    if let Ok(v) = std::env::var("CRSING_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("crsing: ignoring CRSING_THREADS={v:?} (expected a positive integer)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command, demo: &str) -> RunConfig {
        RunConfig {
            command,
            source: Source::Demo(demo.into()),
            samples: 1024,
            out: None,
            force_m: None,
            force_c: None,
            eps: None,
            max_degree: None,
            csv: None,
        }
    }

    #[test]
    fn certify_exit_codes() {
        let ok = run(&cfg(Command::Certify, "zbar3")).unwrap();
        assert_eq!(ok.code, 0);
        assert_eq!(ok.report["selected"]["m"], 3);
        assert_eq!(ok.report["selected"]["delta"], 3);
        assert_eq!(run(&cfg(Command::Certify, "fail-0.9")).unwrap().code, 1);
    }

    #[test]
    fn schema_violation_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        fs::write(&p, r#"{"k": 3, "coefficients": [{"j": 3, "re": 1.0, "im": 0.0}], "residual": [{"a": 1, "b": 2, "re": 1.0, "im": 0.0}], "radius": 1.0}"#).unwrap();
        let c = RunConfig { source: Source::File(p), ..cfg(Command::Certify, "") };
        assert!(matches!(run(&c), Err(Error::Schema(_))));
    }

    #[test]
    fn malformed_json_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("broken.json");
        fs::write(&p, "{\n \"k\": 3,\n \"coefficients\": [\n}").unwrap();
        let c = RunConfig { source: Source::File(p.clone()), ..cfg(Command::Certify, "") };
        let msg = run(&c).unwrap_err().to_string();
        assert!(msg.contains(&format!("{}:4:", p.display())), "{msg}");
    }

    #[test]
    fn tools() {
        let scan = run(&cfg(Command::SectorScan, "zbar")).unwrap();
        assert_eq!(scan.code, 0);
        assert_eq!(scan.report["max_spread"], 0.0);
        let abs2 = run(&cfg(Command::SectorScan, "abs2")).unwrap();
        assert_eq!(abs2.code, 1);
        let sheet = run(&cfg(Command::SectorScan, "sheet-zbar4-0.3")).unwrap();
        assert_eq!(sheet.code, 0);
        let hull = run(&RunConfig { max_degree: Some(3), ..cfg(Command::HullProbe, "zbar") }).unwrap();
        assert_eq!(hull.report["verdict"], "OUTSIDE");
        let approx = run(&cfg(Command::Approximate, "zbar-in-zbar")).unwrap();
        assert!(approx.report["steps"][1]["error"].as_f64().unwrap() < 1e-10);
        assert!(approx.csv.unwrap().starts_with("a_max,b_max,error"));
    }

    #[test]
    fn config_validation() {
        let parse = |args: &[&str]| Cli::try_parse_from(args).map_err(|e| e.to_string()).and_then(|c| RunConfig::from_cli(c).map_err(|e| e.to_string()));
        assert!(parse(&["crsing", "certify", "--demo", "zbar3"]).is_ok());
        assert!(parse(&["crsing", "certify"]).is_err());
        assert!(parse(&["crsing", "certify", "--demo", "zbar3", "--samples", "8"]).is_err());
        assert!(parse(&["crsing", "certify", "--demo", "zbar3", "--force-C", "1.5"]).is_err());
        let c = parse(&["crsing", "pipeline", "x.json", "--force-M", "3", "--force-C", "0.2"]).unwrap();
        assert_eq!((c.force_m, c.force_c), (Some(3), Some(0.2)));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "b");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
