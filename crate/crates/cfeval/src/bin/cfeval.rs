//! Thin command-line front end over the library pipeline.

use cfeval::pipeline::{cmd_evaluate, cmd_explain, cmd_full, cmd_train, CfMode, RunConfig};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cfeval",
    about = "Counterfactual evaluation of feature-attribution explainers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the whitebox classifier on the configured dataset.
    Train(RunArgs),
    /// Generate explanation files for the test split.
    Explain(RunArgs),
    /// Score explainers and emit report files.
    Evaluate(RunArgs),
    /// Train, explain, and evaluate in one run directory.
    Full(RunArgs),
    /// Run the acceptance suite and print one line per criterion.
    Selfcheck,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the counterfactual mode: discrete or continuous.
    #[arg(long)]
    mode: Option<String>,
    /// Override the explanation size.
    #[arg(long = "L")]
    l: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> cfeval::Result<RunConfig> {
        let mut config = RunConfig::from_file(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        if let Some(mode) = &self.mode {
            config.counterfactual.mode = match mode.as_str() {
                "discrete" => CfMode::Discrete,
                "continuous" => CfMode::Continuous,
                other => {
                    return Err(cfeval::Error::Config(format!(
                        "unknown mode `{other}`; expected discrete or continuous"
                    )))
                }
            };
        }
        if let Some(l) = self.l {
            config.l = l;
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(command: &Command) -> cfeval::Result<()> {
    match command {
        Command::Train(args) => {
            let config = args.load()?;
            let summary = cmd_train(&config)?;
            println!("model: {}", summary.model_path.display());
            println!("final training loss: {:.6}", summary.final_loss);
            println!(
                "accuracy: train {:.4}  val {:.4}  test {:.4}",
                summary.train_accuracy, summary.val_accuracy, summary.test_accuracy
            );
        }
        Command::Explain(args) => {
            let config = args.load()?;
            for path in cmd_explain(&config)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Evaluate(args) => {
            let config = args.load()?;
            let (report, paths) = cmd_evaluate(&config)?;
            for path in &paths {
                println!("wrote {}", path.display());
            }
            for c in &report.correlations {
                println!("{}: tau {:.4}  rho {:.4}", c.metric, c.tau, c.rho);
            }
            if let Some(note) = &report.correlations_note {
                println!("{note}");
            }
        }
        Command::Full(args) => {
            let config = args.load()?;
            let summary = cmd_full(&config)?;
            println!("run directory: {}", summary.run_dir.display());
            println!(
                "accuracy: train {:.4}  val {:.4}  test {:.4}",
                summary.train.train_accuracy,
                summary.train.val_accuracy,
                summary.train.test_accuracy
            );
            for path in &summary.report_files {
                println!("wrote {}", path.display());
            }
        }
        Command::Selfcheck => {
            let outcomes = cfeval::acceptance::run_all();
            let mut failed = 0;
            for o in &outcomes {
                println!("{}", o.line());
                failed += usize::from(!o.passed);
            }
            if failed > 0 {
                return Err(cfeval::Error::Config(format!(
                    "{failed} acceptance criteria failed"
                )));
            }
            println!("all {} acceptance criteria passed", outcomes.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit with its own code 2; keep 2 for data errors
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
