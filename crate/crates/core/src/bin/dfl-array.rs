use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dfl_array::scenario::{ScenarioError, SweepAxis};
use dfl_array::sweep::{
    array_factor_table, evaluate, run_sweep, write_curve_csv, write_estimate_json, write_factor_csv, write_sweep_csv,
    SweepSpec,
};
use dfl_array::{ModelError, Scenario};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dfl-array",
    version,
    about = "Multi-antenna body-shadowing model and DoA estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the target direction and attenuation; writes curve.csv and estimate.json.
    Doa(Common),
    /// Move the target along one axis; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Swept quantity (target_y, target_x, theta). Overrides the scenario's sweep block.
        #[arg(long)]
        axis: Option<SweepAxis>,
        /// Comma-separated values for the swept quantity.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        values: Option<Vec<f64>>,
    },
    /// Uniform-weight array factor for both wavefront models; writes factor.csv.
    ArrayFactor(Common),
    /// Check a scenario file and report warnings.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, env = "DFL_ARRAY_OUT_DIR", default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn setup(common: &Common) -> Result<Scenario, Failure> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    let mut scenario = Scenario::load(&common.scenario)?;
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    for w in scenario.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(scenario)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(io_err(&path))?;
    Ok((path, BufWriter::new(file)))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(common) => {
            let s = setup(&common)?;
            eprintln!(
                "ok: wavelength {} m, {} antennas, {}",
                s.wavelength(),
                s.layout.num_antennas(),
                if s.target.is_some() { "occupied" } else { "empty" }
            );
        }
        Command::Doa(common) => {
            let s = setup(&common)?;
            let e = evaluate(&s)?;
            let (path, w) = create(&common.out, "curve.csv")?;
            write_curve_csv(w, &e.estimate.curve).map_err(csv_err(&path))?;
            let (path, w) = create(&common.out, "estimate.json")?;
            write_estimate_json(w, &e.estimate).map_err(io_err(&path))?;
            eprintln!(
                "gamma_hat = {} deg, A_T = {} dB",
                e.estimate.gamma_hat_deg(),
                e.estimate.attenuation_db
            );
        }
        Command::Sweep { common, axis, values } => {
            let s = setup(&common)?;
            let block = s.sweep.clone();
            let axis = axis
                .or(block.as_ref().map(|b| b.axis))
                .ok_or_else(|| Failure::Validation("no sweep axis: pass --axis or add a sweep block".into()))?;
            let values = values
                .or(block.map(|b| b.values))
                .ok_or_else(|| Failure::Validation("no sweep values: pass --values or add a sweep block".into()))?;
            let spec = SweepSpec::new(axis, values, s)?;
            let rows = run_sweep(&spec);
            let (path, w) = create(&common.out, "sweep.csv")?;
            write_sweep_csv(w, &spec, &rows).map_err(csv_err(&path))?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} rows failed, see the error column", rows.len());
            }
        }
        Command::ArrayFactor(common) => {
            let s = setup(&common)?;
            let table = array_factor_table(&s.layout, &s.grid)?;
            let (path, w) = create(&common.out, "factor.csv")?;
            write_factor_csv(w, &table).map_err(csv_err(&path))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
