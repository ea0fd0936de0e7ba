use clap::{Parser, Subcommand, ValueEnum};
use qstruct_cli::error::CliError;
use qstruct_cli::report::{Format, Report};
use qstruct_cli::{experiments, run_config_file, RunOptions, OUTPUT_DIR_ENV};
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qstruct", version, about = "Run registered quantum-structure experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered experiments.
    List,
    /// Run one or more experiment configs (several run concurrently).
    Run {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        /// Overrides the seed in every config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn summary(report: &Report, path: &std::path::Path) -> String {
    let mut out = format!("{}: {}\n", report.experiment, if report.passed() { "PASS" } else { "FAIL" });
    for (name, ok) in &report.pass {
        out.push_str(&format!("  {:<28} {}\n", name, if *ok { "ok" } else { "FAILED" }));
    }
    out.push_str(&format!("  report: {}\n", path.display()));
    out
}

fn run(configs: Vec<PathBuf>, format: Format, seed: Option<u64>) -> u8 {
    let output_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let batch = configs.len() > 1;
    let stems: Vec<String> =
        configs.iter().map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()).collect();
    if batch && stems.iter().collect::<BTreeSet<_>>().len() != stems.len() {
        eprintln!("error: {}", CliError::Config("batch configs need distinct file names".into()));
        return 2;
    }

    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .zip(&stems)
            .map(|(path, stem)| {
                let opts = RunOptions {
                    format,
                    seed,
                    output_dir: output_dir.clone(),
                    subdir: batch.then(|| stem.clone()),
                };
                s.spawn(move || run_config_file(path, &opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
    });

    let mut code = 0u8;
    for (path, result) in configs.iter().zip(results) {
        match result {
            Ok((report, written)) => {
                print!("{}", summary(&report, &written));
                if !report.passed() {
                    code = code.max(1);
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                code = code.max(e.exit_code() as u8);
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", experiments::list_experiments());
            ExitCode::SUCCESS
        }
        Command::Run { configs, format, seed } => {
            let format = match format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            };
            ExitCode::from(run(configs, format, seed))
        }
    }
}
