use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use linstroke::optimizer::Strategy;
use linstroke_cli::commands::{self, CmdOutcome};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "linstroke",
    version,
    about = "Free-piston linear engine stroke simulator and kickback bore-scale identifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    /// Integrate the stroke numerically.
    Ode,
    /// Root of the closed-form work integral.
    Energy,
}

impl From<StrategyArg> for Strategy {
    fn from(value: StrategyArg) -> Self {
        match value {
            StrategyArg::Ode => Strategy::Ode,
            StrategyArg::Energy => Strategy::Energy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one left-to-right stroke and export the trajectory
    Simulate {
        /// Run configuration file (flat key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Bore scale for this stroke (overrides the config `lambda`)
        #[arg(long)]
        lambda: Option<f64>,
        /// Trajectory CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory SVG plot path
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Identify the bore scale that drives x_max to the design half-stroke
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// x_max evaluation route
        #[arg(long, value_enum, default_value_t = StrategyArg::Ode)]
        strategy: StrategyArg,
        /// Iteration trace CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace SVG plot path (x_max and lambda vs iteration)
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Evaluate x_max on a uniform bore-scale grid
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Grid start (defaults to lambda_min)
        #[arg(long)]
        from: Option<f64>,
        /// Grid end (defaults to lambda_max)
        #[arg(long)]
        to: Option<f64>,
        /// Number of grid points (defaults to 101)
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Energy)]
        strategy: StrategyArg,
        /// Sweep CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sweep SVG plot path
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Find the stroke limit x_m whose identified bore scale hits a target
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        /// Target bore scale (defaults to 1.461)
        #[arg(long)]
        target_lambda: Option<f64>,
        /// Lower end of the x_m range (defaults to 1.1·x_s)
        #[arg(long)]
        from: Option<f64>,
        /// Upper end of the x_m range (defaults to max(1, 10·x_s))
        #[arg(long)]
        to: Option<f64>,
        /// Calibration report output path (markdown)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => commands::EXIT_CONFIG,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let result = match &cli.command {
        Command::Simulate {
            config,
            lambda,
            out,
            plot,
        } => commands::run_simulate(config, *lambda, out.as_deref(), plot.as_deref()),
        Command::Optimize {
            config,
            strategy,
            out,
            plot,
        } => commands::run_optimize(config, (*strategy).into(), out.as_deref(), plot.as_deref()),
        Command::Sweep {
            config,
            from,
            to,
            points,
            strategy,
            out,
            plot,
        } => commands::run_sweep(
            config,
            *from,
            *to,
            *points,
            (*strategy).into(),
            out.as_deref(),
            plot.as_deref(),
        ),
        Command::Calibrate {
            config,
            target_lambda,
            from,
            to,
            out,
        } => commands::run_calibrate(config, *target_lambda, *from, *to, out.as_deref()),
    };

    match result {
        Ok(CmdOutcome { summary, exit_code }) => {
            println!("{summary}");
            std::process::exit(exit_code);
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.exit_code);
        }
    }
}
