use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pilot_core::encoding::search_space_size;
use pilot_core::harness::{self, format_significant, ExperimentSpec};
use pilot_core::{Error, FitnessMode, GaConfig, Result, Scenario, SeModel, SolverKind, SolverSpec};

#[derive(Parser)]
#[command(name = "pilot", version, about = "Pilot assignment for multi-cell massive MIMO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the best objective and assignment.
    Solve(SolveArgs),
    /// Run an experiment spec and write records.csv, cdf.csv and scaling.csv.
    Bench(BenchArgs),
    /// Empirical CDF of best objectives from a records file.
    Cdf(CdfArgs),
    /// Print the exact search-space size (K!)^(L-1).
    Space(SpaceArgs),
    /// Write scenario.json and fading.csv for a generated scenario.
    Gen(GenArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, default_value_t = 16)]
    cells: usize,
    #[arg(long, default_value_t = 20)]
    users: usize,
    #[arg(long, default_value_t = 128)]
    antennas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ScenarioArgs {
    fn scenario(&self) -> Scenario {
        Scenario::new(self.cells, self.users, self.antennas, self.seed)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Rpa,
    Expa,
    Ga,
    Skga,
    Pkga,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Rpa => SolverKind::Rpa,
            SolverArg::Expa => SolverKind::Expa,
            SolverArg::Ga => SolverKind::Ga,
            SolverArg::Skga => SolverKind::SkGa,
            SolverArg::Pkga => SolverKind::PkGa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FitnessArg {
    Sumse,
    Interference,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value = "skga")]
    solver: SolverArg,
    #[arg(long, default_value_t = 5)]
    clusters: usize,
    #[arg(long, default_value_t = 120)]
    pop: usize,
    #[arg(long, default_value_t = 20)]
    gens: usize,
    #[arg(long, default_value_t = 0.9)]
    pc: f64,
    #[arg(long, default_value_t = 0.02)]
    pm: f64,
    #[arg(long, default_value_t = 2)]
    elite: usize,
    #[arg(long, default_value_t = 3)]
    recluster: usize,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    #[arg(long, value_enum, default_value = "sumse")]
    fitness: FitnessArg,
    /// Directory for assignment.csv, history.csv and se.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; defaults to the spec's `outputs`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run (sweep point, seed) pairs concurrently.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct CdfArgs {
    /// records.csv written by `bench`.
    records: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long)]
    cells: usize,
    #[arg(long)]
    users: usize,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    out: PathBuf,
}

fn solve(args: &SolveArgs) -> Result<()> {
    let scenario = args.scenario.scenario();
    let beta = scenario.realize()?.beta;
    let spec = SolverSpec {
        solver: args.solver.into(),
        config: GaConfig {
            population_size: args.pop,
            generations: args.gens,
            crossover_prob: args.pc,
            mutation_prob: args.pm,
            elite_count: args.elite,
            cluster_count: args.clusters,
            recluster_period: args.recluster,
            fitness_mode: match args.fitness {
                FitnessArg::Sumse => FitnessMode::SumSe,
                FitnessArg::Interference => FitnessMode::Interference,
            },
            seed: scenario.seed,
        },
        parallelism: args.parallelism,
        ..SolverSpec::new(args.solver.into())
    };
    if spec.solver.is_genetic() {
        spec.config.validate()?;
    }
    let result = spec.solve(&beta, scenario.seed)?;
    let sum_se = SeModel::default().objective(&beta, &result.best)?;

    let mut stdout = io::stdout().lock();
    writeln!(stdout, "solver: {}", result.solver_name)?;
    writeln!(stdout, "objective: {}", format_significant(result.best_objective, 12))?;
    if result.fitness_mode != FitnessMode::SumSe {
        writeln!(stdout, "sum_se: {}", format_significant(sum_se, 12))?;
    }
    writeln!(stdout, "evaluations: {}", result.evaluations)?;
    writeln!(stdout, "wall_time: {:.6}", result.wall_time)?;
    result.best.write_csv(&mut stdout)?;

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        result.best.write_csv(File::create(dir.join("assignment.csv"))?)?;
        result.write_history_csv(File::create(dir.join("history.csv"))?)?;
        SeModel::default()
            .sum_se(&beta, &result.best)?
            .write_csv(File::create(dir.join("se.csv"))?)?;
    }
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let spec = ExperimentSpec::load(&args.spec)?;
    let out = args
        .out
        .clone()
        .or_else(|| spec.outputs.clone())
        .ok_or_else(|| Error::InvalidConfig("no output directory: pass --out or set outputs".into()))?;
    let records = harness::run_experiment_with(&spec, args.parallel)?;
    harness::write_outputs(&out, &records)?;
    let skipped = records.iter().filter(|r| !r.is_ok()).count();
    writeln!(
        io::stdout().lock(),
        "{} records ({} skipped) written to {}",
        records.len(),
        skipped,
        out.display()
    )?;
    Ok(())
}

fn cdf(args: &CdfArgs) -> Result<()> {
    let records = harness::read_records_csv(BufReader::new(File::open(&args.records)?))?;
    let points = harness::export_cdf(&records)?;
    match &args.out {
        Some(path) => harness::write_csv_rows(&points, File::create(path)?),
        None => harness::write_csv_rows(&points, io::stdout().lock()),
    }
}

fn space(args: &SpaceArgs) -> Result<()> {
    if args.cells == 0 || args.users == 0 {
        return Err(Error::InvalidConfig("cells and users must be positive".into()));
    }
    writeln!(io::stdout().lock(), "{}", search_space_size(args.cells, args.users))?;
    Ok(())
}

fn gen(args: &GenArgs) -> Result<()> {
    let scenario = args.scenario.scenario();
    let beta = scenario.realize()?.beta;
    let dir: &Path = &args.out;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("scenario.json"), serde_json::to_string_pretty(&scenario)?)?;
    beta.write_csv(File::create(dir.join("fading.csv"))?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Cdf(a) => cdf(a),
        Command::Space(a) => space(a),
        Command::Gen(a) => gen(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
