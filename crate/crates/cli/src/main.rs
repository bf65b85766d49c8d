use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use realstab_cli::{
    cmd_check, cmd_convergence, cmd_gen_corpus, cmd_synth, convergence_csv, CliError, Problem, SynthOptions,
};
use realstab_core::corpus::DEFAULT_MAX_DEGREE;
use realstab_core::SynthConfig;

#[derive(Parser)]
#[command(name = "realstab", version, about = "Corona certificates and invertible Bezout synthesis on the disc")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the corona condition and test the sign condition.
    ///
    /// Exit 0: unimodular and POZ. 2: unimodular, not POZ. 3: not unimodular.
    Check {
        problem: PathBuf,
        #[arg(long, default_value_t = 129)]
        n: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the synthesis pipeline and write fields and report.json.
    ///
    /// Exit 0 iff every verification threshold is met, 2 if some is not,
    /// 4 if a stage fails.
    Synth {
        problem: PathBuf,
        #[arg(long, default_value_t = 129)]
        n: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Lower bound for the level-set threshold.
        #[arg(long)]
        delta_floor: Option<f64>,
        /// |f2| below which g2 is taken from the smooth formula.
        #[arg(long)]
        eps: Option<f64>,
        /// Also write the sets E1, E2, S and the cutoff q.
        #[arg(long)]
        dump_regions: bool,
    },
    /// Run synth at several grid sizes and tabulate the diagnostics.
    Convergence {
        problem: PathBuf,
        /// Comma-separated grid sizes, at least two.
        #[arg(long, value_delimiter = ',', default_value = "129,257,513")]
        n: Vec<usize>,
        /// CSV destination; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        delta_floor: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Write seeded corona-valid pairs as a JSON array of problems.
    GenCorpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
        max_degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Check { problem, n, out } => {
            let report = cmd_check(&Problem::load(&problem)?, n)?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
            Ok(report.exit_code)
        }
        Command::Synth {
            problem,
            n,
            out,
            delta_floor,
            eps,
            dump_regions,
        } => {
            let opts = SynthOptions {
                n,
                out,
                delta_floor,
                eps,
                dump_regions,
            };
            let report = cmd_synth(&Problem::load(&problem)?, &opts)?;
            eprintln!(
                "{}: residual {:.3e}, |dbar g1|/|g1| {:.3e}, min |g1| {:.3e}",
                if report.pass { "pass" } else { "FAIL" },
                report.residual_sup,
                report.g1_dbar_sup / report.g1_sup,
                report.g1_min_abs,
            );
            Ok(if report.pass { 0 } else { 2 })
        }
        Command::Convergence {
            problem,
            n,
            out,
            delta_floor,
            eps,
        } => {
            let mut cfg = SynthConfig {
                delta_floor,
                ..SynthConfig::default()
            };
            if let Some(eps) = eps {
                cfg.eps = eps;
            }
            let rows = cmd_convergence(&Problem::load(&problem)?, &n, &cfg)?;
            emit(out.as_deref(), &convergence_csv(&rows))?;
            Ok(0)
        }
        Command::GenCorpus {
            seed,
            count,
            max_degree,
            out,
        } => {
            let pairs = cmd_gen_corpus(seed, count, max_degree);
            emit(out.as_deref(), &(serde_json::to_string(&pairs).expect("pairs serialize") + "\n"))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap uses 2 for usage errors, which `check` reserves for non-POZ pairs.
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("realstab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
