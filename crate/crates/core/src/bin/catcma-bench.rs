use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use catcma::bench::{
    aggregate, format_table, instance_seed, output, parse_config, read_runs, run_seed, run_single, run_suite,
    write_results, PartialConfig,
};
use catcma::{FreezePolicy, ProblemInstance, ProblemKind, Variant};

#[derive(Parser)]
#[command(name = "catcma-bench", version, about = "Benchmark runner for CatCMA and its interaction treatments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (alpha, trial, algorithm) combination and write results.
    Run(RunArgs),
    /// Run one trial and print its record as JSON.
    One {
        #[command(flatten)]
        args: RunArgs,
        /// Trial index used to derive the instance seed.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Rebuild table.csv from an existing runs.csv.
    Aggregate {
        /// Directory holding runs.csv.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with any of the configuration keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Interaction strength; repeat for a sweep.
    #[arg(long)]
    alpha: Vec<f64>,
    /// catcma, ws, hr or icatcma; repeat to select several.
    #[arg(long = "algo")]
    algorithms: Vec<Variant>,
    #[arg(long)]
    trials: Option<usize>,
    /// Evaluation budget per run.
    #[arg(long)]
    budget: Option<u64>,
    /// Success threshold on the best objective value.
    #[arg(long)]
    target: Option<f64>,
    /// `adaptive:A` or `fixed:T`.
    #[arg(long)]
    t_freeze: Option<FreezePolicy>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record best-so-far trajectories under traj/.
    #[arg(long)]
    traj: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn flags(&self) -> PartialConfig {
        PartialConfig {
            problem: self.problem,
            n: self.n,
            m: self.m,
            alpha: (!self.alpha.is_empty()).then(|| self.alpha.clone()),
            algorithms: (!self.algorithms.is_empty()).then(|| self.algorithms.clone()),
            trials: self.trials,
            budget: self.budget,
            target: self.target,
            t_freeze: self.t_freeze,
            seed: self.seed,
            traj: self.traj.then_some(true),
            workers: self.workers,
            out: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> catcma::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = parse_config(args.config.as_deref(), args.flags())?;
            let records = run_suite(&config)?;
            for rec in records.iter().filter(|r| r.diagnostic.is_some()) {
                eprintln!("warning: {} aborted: {}", rec.run_id, rec.diagnostic.as_deref().unwrap_or(""));
            }
            let table = aggregate(&records);
            let paths = write_results(&records, &table, &config, &config.out)?;
            print!("{}", format_table(&table));
            eprintln!("wrote {}", paths.runs.display());
        }
        Command::One { args, trial } => {
            let config = parse_config(args.config.as_deref(), args.flags())?;
            let alpha = config.alpha[0];
            let seed = instance_seed(config.seed, config.problem, alpha, trial);
            let instance = ProblemInstance::generate(config.problem, config.n, config.m, alpha, seed)?;
            for &algo in &config.algorithms {
                let record = run_single(algo, &instance, &config, run_seed(seed, algo));
                println!("{}", serde_json::to_string(&record)?);
            }
        }
        Command::Aggregate { out } => {
            let records = read_runs(&out.join("runs.csv"))?;
            let table = aggregate(&records);
            output::write_table(&table, &out.join("table.csv"))?;
            print!("{}", format_table(&table));
        }
    }
    Ok(())
}
