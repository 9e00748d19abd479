//! Command-line front end.
//!
//! Every command writes its artifacts and a `manifest_<command>.json` into the
//! output directory. Exit codes: 0 ok, 2 configuration or usage, 3 input
//! data, 4 numerical failure, 5 theory excluded by the comparison.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{hex_digest, RunConfig};
use crate::corrections::{
    patch_pressure, roughness_average, roughness_multiplicative, stochastic_variance, PatchParams,
};
use crate::error::{Error, Result};
use crate::instrument::{load_sets, sets_to_csv_string, synthesize_measurement_sets, MeasurementSet};
use crate::interp::PressureInterpolant;
use crate::lifshitz::{zero_frequency_pressure, LifshitzSolver};
use crate::materials::{Approach, DielectricModel};
use crate::metrology::{budget_to_csv_string, verdict};
use crate::pipeline::{analyze_experiment, band_for_theory, comparison_separations, TheoryCurves};
use crate::units::{nm_label, NM};
use crate::yukawa::{exclusion_curve, log_grid, LayerStack};

const GOLDEN_PLASMA: &str = include_str!("../data/golden/plasma_pressure.csv");
const GOLDEN_ZERO_FREQUENCY: &str = include_str!("../data/golden/zero_frequency_pressure.csv");

/// Relative tolerances applied when diffing against the golden files.
const PLASMA_TOLERANCE: f64 = 3e-3;
const ZERO_FREQUENCY_TOLERANCE: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Config = 2,
    InputData = 3,
    Numeric = 4,
    Excluded = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_error(err: &Error) -> Self {
        match err {
            Error::Config(_) => ExitStatus::Config,
            e if e.is_numeric() => ExitStatus::Numeric,
            _ => ExitStatus::InputData,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Thermal Casimir pressure, error budgets and Yukawa constraints")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory receiving the artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Seed of the synthetic data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Lifshitz pressure curve for one approach.
    Pressure(PressureArgs),
    /// Roughness and patch corrections applied to a pressure curve.
    Correct(CorrectArgs),
    /// Synthetic measurement sets from the impedance-approach truth.
    Synth(SynthArgs),
    /// Error budget, confidence band and verdict for one approach.
    Compare(CompareArgs),
    /// Yukawa exclusion curve from the impedance-approach band.
    Constrain(ConstrainArgs),
    /// Regenerate the analytic table columns and diff them against golden files.
    TableFixtures,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Pressure(_) => "pressure",
            Command::Correct(_) => "correct",
            Command::Synth(_) => "synth",
            Command::Compare(_) => "compare",
            Command::Constrain(_) => "constrain",
            Command::TableFixtures => "table-fixtures",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Grid {
    /// Smallest separation, nm.
    #[arg(long = "z-min", alias = "z-min-nm", default_value_t = 160.0)]
    pub z_min_nm: f64,
    /// Largest separation, nm.
    #[arg(long = "z-max", alias = "z-max-nm", default_value_t = 750.0)]
    pub z_max_nm: f64,
    #[arg(long, default_value_t = 60)]
    pub points: usize,
}

impl Grid {
    fn separations(&self) -> Result<Vec<f64>> {
        if !(self.z_min_nm > 0.0 && self.z_max_nm >= self.z_min_nm) || self.points == 0 {
            return Err(Error::Config("need 0 < z-min ≤ z-max and at least one point".into()));
        }
        if self.points == 1 {
            return Ok(vec![self.z_min_nm * NM]);
        }
        let step = (self.z_max_nm - self.z_min_nm) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| (self.z_min_nm + step * i as f64) * NM)
            .collect())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PressureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub approach: u8,
    #[command(flatten)]
    pub grid: Grid,
    /// Temperature, K; the configured value when absent.
    #[arg(long = "temp-k")]
    pub temp_k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoughnessMode {
    /// Average over the two height histograms.
    Average,
    /// Multiplicative factor from the stochastic variances.
    Multiplicative,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorrectArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4), default_value_t = 4)]
    pub approach: u8,
    #[arg(long, value_enum, default_value_t = RoughnessMode::Average)]
    pub roughness: RoughnessMode,
    /// Add the patch-potential pressure.
    #[arg(long)]
    pub patch: bool,
    #[command(flatten)]
    pub grid: Grid,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub sets: Option<usize>,
    /// Index of the set shifted into an outlier.
    #[arg(long, conflicts_with = "no_outlier")]
    pub outlier_set: Option<usize>,
    /// Generate clean sets only.
    #[arg(long)]
    pub no_outlier: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub approach: u8,
    /// 0.95 or 0.99; the configured value when absent.
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Measurement sets CSV `set_id,z_nm,P_Pa`; synthetic data when absent.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstrainArgs {
    #[arg(long, default_value_t = 40.0)]
    pub lambda_min_nm: f64,
    #[arg(long, default_value_t = 370.0)]
    pub lambda_max_nm: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long)]
    pub confidence: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Artifact {
    file: String,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a Command,
    seed: u64,
    config_sha256: String,
    /// Resolved configuration; `out_dir` is the manifest's own directory.
    config: String,
    exit_code: i32,
    artifacts: Vec<Artifact>,
}

struct Output {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, file: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(file), contents)?;
        self.artifacts.push(Artifact {
            file: file.to_string(),
            sha256: hex_digest(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(())
    }
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T, E>(args: I, env: E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    E: IntoIterator<Item = (String, String)>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Config.code()
            } else {
                ExitStatus::Ok.code()
            };
        }
    };
    let Some(command) = cli.command.clone() else {
        use clap::CommandFactory;
        eprintln!("{}", Cli::command().render_help());
        return ExitStatus::Config.code();
    };
    let cfg = match resolve_config(&cli, env) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            use clap::CommandFactory;
            eprintln!("{}", Cli::command().render_usage());
            return ExitStatus::Config.code();
        }
    };
    match execute(&command, &cfg) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::for_error(&e).code()
        }
    }
}

fn resolve_config<E>(cli: &Cli, env: E) -> Result<RunConfig>
where
    E: IntoIterator<Item = (String, String)>,
{
    let mut cfg = RunConfig::load(cli.config.as_deref(), env)?;
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<ExitStatus> {
    let mut out = Output::new(&cfg.out_dir)?;
    let status = match command {
        Command::Pressure(a) => cmd_pressure(a, cfg, &mut out)?,
        Command::Correct(a) => cmd_correct(a, cfg, &mut out)?,
        Command::Synth(a) => cmd_synth(a, cfg, &mut out)?,
        Command::Compare(a) => cmd_compare(a, cfg, &mut out)?,
        Command::Constrain(a) => cmd_constrain(a, cfg, &mut out)?,
        Command::TableFixtures => cmd_table_fixtures(cfg, &mut out)?,
    };
    let mut portable = cfg.clone();
    portable.out_dir = PathBuf::from(".");
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.seed,
        config_sha256: portable.sha256(),
        config: portable.to_toml_string(),
        exit_code: status.code(),
        artifacts: std::mem::take(&mut out.artifacts),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(out.dir.join(format!("manifest_{}.json", command.name())), text)?;
    Ok(status)
}

fn model_for(approach: Approach, cfg: &RunConfig) -> Result<DielectricModel> {
    let drude = cfg.drude()?;
    match approach {
        Approach::Plasma => DielectricModel::plasma(approach, drude.omega_p),
        _ => DielectricModel::tabulated(approach, drude, cfg.optical_table()?),
    }
}

fn theory_curves(cfg: &RunConfig) -> Result<TheoryCurves> {
    let (plate, sphere) = cfg.histograms()?;
    TheoryCurves::compute(
        cfg.theory_settings(),
        cfg.optical_table()?,
        cfg.drude()?,
        &plate,
        &sphere,
    )
}

fn band_confidence(requested: Option<f64>, cfg: &RunConfig) -> Result<f64> {
    let c = requested.unwrap_or(cfg.analysis.confidence);
    if c != 0.95 && c != 0.99 {
        return Err(Error::Config(format!("confidence must be 0.95 or 0.99, got {c}")));
    }
    Ok(c)
}

fn measurement_sets(data: Option<&Path>, cfg: &RunConfig, theory: &TheoryCurves) -> Result<Vec<MeasurementSet>> {
    match data {
        Some(p) => load_sets(p),
        None => {
            let truth = theory.interpolant(Approach::Impedance);
            synthesize_measurement_sets(|z| truth.eval(z), &cfg.synthesis_config(), cfg.seed)
        }
    }
}

fn cmd_pressure(a: &PressureArgs, cfg: &RunConfig, out: &mut Output) -> Result<ExitStatus> {
    let approach = Approach::from_number(a.approach)?;
    let temperature = a.temp_k.unwrap_or(cfg.theory.temperature_k);
    let zs = a.grid.separations()?;
    let solver = LifshitzSolver::new(model_for(approach, cfg)?, temperature)?
        .with_tolerance(cfg.theory.tolerance);
    let curve = solver.curve(&zs)?;
    let stem = format!("pressure_approach{}", a.approach);
    out.write(&format!("{stem}.csv"), &curve.to_csv_string())?;
    out.write(&format!("{stem}.json"), &(curve.to_json_string()? + "\n"))?;
    println!("{} separations written to {}", zs.len(), out.dir.join(format!("{stem}.csv")).display());
    Ok(ExitStatus::Ok)
}

fn cmd_correct(a: &CorrectArgs, cfg: &RunConfig, out: &mut Output) -> Result<ExitStatus> {
    let approach = Approach::from_number(a.approach)?;
    let settings = cfg.theory_settings();
    let n = ((settings.raw_max - settings.raw_min) / settings.raw_step + 1e-9).floor() as usize;
    let raw_z: Vec<f64> = (0..=n).map(|i| settings.raw_min + i as f64 * settings.raw_step).collect();
    let solver = LifshitzSolver::new(model_for(approach, cfg)?, settings.temperature)?
        .with_tolerance(settings.tolerance);
    let interp = PressureInterpolant::new(&raw_z, &solver.curve(&raw_z)?.totals())?;
    let (lo, hi) = interp.domain();
    let bare = |z: f64| -> Result<f64> {
        if z < lo || z > hi {
            return Err(Error::invalid(format!(
                "separation {:.2} nm outside the theory grid [{:.0}, {:.0}] nm",
                z / NM,
                lo / NM,
                hi / NM
            )));
        }
        Ok(interp.eval(z))
    };
    let (plate, sphere) = cfg.histograms()?;
    let patch = PatchParams::gold();
    let mut csv = String::from("z_nm,P_Pa,P_rough_Pa,P_patch_Pa,P_corrected_Pa\n");
    for z in a.grid.separations()? {
        let p = bare(z)?;
        let rough = match a.roughness {
            RoughnessMode::Average => roughness_average(bare, &plate, &sphere, z)?,
            RoughnessMode::Multiplicative => roughness_multiplicative(
                p,
                z,
                stochastic_variance(&plate),
                stochastic_variance(&sphere),
            )?,
        };
        let pp = if a.patch { patch_pressure(z, &patch)? } else { 0.0 };
        let _ = writeln!(csv, "{},{:e},{:e},{:e},{:e}", nm_label(z), p, rough, pp, rough + pp);
    }
    out.write("corrected.csv", &csv)?;
    println!("corrected curve written to {}", out.dir.join("corrected.csv").display());
    Ok(ExitStatus::Ok)
}

fn cmd_synth(a: &SynthArgs, cfg: &RunConfig, out: &mut Output) -> Result<ExitStatus> {
    let mut cfg = cfg.clone();
    if let Some(n) = a.sets {
        cfg.synthesis.sets = n;
    }
    if let Some(k) = a.outlier_set {
        cfg.synthesis.plant_outlier = true;
        cfg.synthesis.outlier_set = k;
    }
    if a.no_outlier {
        cfg.synthesis.plant_outlier = false;
    }
    cfg.validate()?;
    let theory = theory_curves(&cfg)?;
    let sets = measurement_sets(None, &cfg, &theory)?;
    out.write("sets.csv", &sets_to_csv_string(&sets))?;
    let points: usize = sets.iter().map(|s| s.len()).sum();
    println!("{} sets, {points} points written to {}", sets.len(), out.dir.join("sets.csv").display());
    Ok(ExitStatus::Ok)
}

fn cmd_compare(a: &CompareArgs, cfg: &RunConfig, out: &mut Output) -> Result<ExitStatus> {
    let approach = Approach::from_number(a.approach)?;
    let confidence = band_confidence(a.confidence, cfg)?;
    let settings = cfg.analysis_settings();
    let theory = theory_curves(cfg)?;
    let sets = measurement_sets(a.data.as_deref(), cfg, &theory)?;
    let analysis = analyze_experiment(&sets, &settings)?;
    let theory_fn = |z| theory.pressure(approach, z);
    let band = band_for_theory(&analysis.budgets, theory_fn, &settings, confidence)?;
    let report = verdict(
        &format!("approach {}", a.approach),
        &analysis.kept,
        theory_fn,
        &band,
        &comparison_separations(),
        settings.window,
    )?;
    let tag = format!("approach{}_{}", a.approach, (confidence * 100.0).round());
    out.write("budget.csv", &budget_to_csv_string(&analysis.budgets))?;
    out.write(&format!("band_{tag}.csv"), &band.to_csv_string())?;
    out.write(&format!("verdict_{tag}.json"), &(report.to_json_string()? + "\n"))?;
    let flagged = analysis.outliers.flagged();
    let excluded = !report.consistent();
    println!(
        "approach {} at {:.0}%: {} ({} of {} points outside, outlier sets {:?})",
        a.approach,
        confidence * 100.0,
        if excluded { "excluded" } else { "consistent" },
        report.points_outside,
        report.points_total,
        flagged
    );
    Ok(if excluded {
        ExitStatus::Excluded
    } else {
        ExitStatus::Ok
    })
}

fn cmd_constrain(a: &ConstrainArgs, cfg: &RunConfig, out: &mut Output) -> Result<ExitStatus> {
    let confidence = band_confidence(a.confidence, cfg)?;
    let lambdas = log_grid(a.lambda_min_nm * NM, a.lambda_max_nm * NM, a.points)
        .map_err(|e| Error::Config(e.to_string()))?;
    let settings = cfg.analysis_settings();
    let theory = theory_curves(cfg)?;
    let sets = measurement_sets(a.data.as_deref(), cfg, &theory)?;
    let analysis = analyze_experiment(&sets, &settings)?;
    let band = band_for_theory(
        &analysis.budgets,
        |z| theory.pressure(Approach::Impedance, z),
        &settings,
        confidence,
    )?;
    let curve = exclusion_curve(
        &lambdas,
        &band,
        &LayerStack::default_plate(),
        &LayerStack::default_sphere(),
    )?;
    out.write("exclusion.csv", &curve.to_csv_string())?;
    println!("{} exclusion points written to {}", curve.points.len(), out.dir.join("exclusion.csv").display());
    Ok(ExitStatus::Ok)
}

/// Golden rows: separation in nm followed by the tabulated columns.
fn parse_golden(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::invalid(format!("golden value {f}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn cmd_table_fixtures(cfg: &RunConfig, out: &mut Output) -> Result<ExitStatus> {
    let t = cfg.theory.temperature_k;
    let omega_p = cfg.drude()?.omega_p;
    let (h1, golden1) = parse_golden(GOLDEN_PLASMA)?;
    let (h2, golden2) = parse_golden(GOLDEN_ZERO_FREQUENCY)?;

    let z1: Vec<f64> = golden1.iter().map(|r| r[0] * NM).collect();
    let solver = LifshitzSolver::new(DielectricModel::plasma(Approach::Plasma, omega_p)?, t)?
        .with_tolerance(cfg.theory.tolerance);
    let plasma = solver.curve(&z1)?;
    let plasma_rows: Vec<Vec<f64>> = plasma
        .points
        .iter()
        .map(|p| {
            let r = &p.result;
            vec![p.z / NM, r.zero_freq_term, r.positive_freq_sum, r.total]
        })
        .collect();

    let zero_rows = golden2
        .iter()
        .map(|r| {
            let z = r[0] * NM;
            Ok(vec![
                r[0],
                zero_frequency_pressure(Approach::Drude, z, t, omega_p)?,
                zero_frequency_pressure(Approach::Prescription, z, t, omega_p)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let render = |header: &[String], rows: &[Vec<f64>]| {
        let mut s = header.join(",") + "\n";
        for r in rows {
            let cells: Vec<String> = std::iter::once(format!("{}", r[0]))
                .chain(r[1..].iter().map(|v| format!("{v:e}")))
                .collect();
            s += &(cells.join(",") + "\n");
        }
        s
    };
    out.write("plasma_pressure.csv", &render(&h1, &plasma_rows))?;
    out.write("zero_frequency_pressure.csv", &render(&h2, &zero_rows))?;

    let mut diff = String::from("table,column,z_nm,computed,golden,rel_diff,tolerance,within\n");
    let (mut total, mut outside) = (0, 0);
    for (name, header, computed, golden, tol) in [
        ("plasma_pressure", &h1, &plasma_rows, &golden1, PLASMA_TOLERANCE),
        ("zero_frequency_pressure", &h2, &zero_rows, &golden2, ZERO_FREQUENCY_TOLERANCE),
    ] {
        for (c, g) in computed.iter().zip(golden) {
            for col in 1..header.len() {
                let rel = (c[col] - g[col]).abs() / g[col].abs();
                let within = rel <= tol;
                total += 1;
                outside += usize::from(!within);
                let _ = writeln!(
                    diff,
                    "{name},{},{},{:e},{:e},{:.6e},{tol:e},{within}",
                    header[col], g[0], c[col], g[col], rel
                );
            }
        }
    }
    out.write("fixture_diff.csv", &diff)?;
    println!("{outside} of {total} golden values outside tolerance; see {}", out.dir.join("fixture_diff.csv").display());
    Ok(ExitStatus::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_files_match_fixture_tables() {
        use crate::fixtures::{PRESSURE_TABLE, ZERO_FREQUENCY_TABLE};
        let (_, g1) = parse_golden(GOLDEN_PLASMA).unwrap();
        for (r, f) in g1.iter().zip(PRESSURE_TABLE.iter()) {
            assert_eq!(r, &vec![f.z_nm, f.plasma_l0, f.plasma_lge1, f.plasma]);
        }
        let (_, g2) = parse_golden(GOLDEN_ZERO_FREQUENCY).unwrap();
        for (r, f) in g2.iter().zip(ZERO_FREQUENCY_TABLE.iter()) {
            assert_eq!(r, &vec![f.z_nm, f.drude_l0, f.prescription_l0]);
        }
    }

    #[test]
    fn grid_spacing() {
        let g = Grid {
            z_min_nm: 100.0,
            z_max_nm: 200.0,
            points: 3,
        };
        let z = g.separations().unwrap();
        assert_eq!(z.len(), 3);
        assert!((z[1] - 150.0 * NM).abs() < 1e-20);
        let bad = Grid { points: 0, ..g };
        assert!(bad.separations().is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(ExitStatus::for_error(&Error::Config("x".into())), ExitStatus::Config);
        assert_eq!(ExitStatus::for_error(&Error::Series("x".into())), ExitStatus::Numeric);
        assert_eq!(ExitStatus::for_error(&Error::InvalidRow { row: 1, message: "x".into() }), ExitStatus::InputData);
    }

    #[test]
    fn usage_without_command() {
        let env: Vec<(String, String)> = Vec::new();
        assert_eq!(run(["casimir"], env.clone()), 2);
        assert_eq!(run(["casimir", "bogus"], env.clone()), 2);
        assert_eq!(run(["casimir", "pressure", "--approach", "7"], env), 2);
    }
}
