use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gcx::exterior::equality::SampleConfig;
use gcx::scenario::corpus::{batch_exit_code, corpus_dir, format_manifest, list_corpus, run_all, run_file, summary};
use gcx::scenario::{parse_scenario, verify_all};

#[derive(Parser)]
#[command(name = "gcx", version, about = "Check generalized complex structures and surgery bookkeeping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample points per probabilistic check.
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// Zero test for floating evaluation.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

impl Common {
    fn cfg(&self) -> SampleConfig {
        SampleConfig { samples: self.samples.max(1), seed: self.seed, tolerance: self.tolerance }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check every spinor declared in a scenario (commands are ignored).
    Verify {
        file: PathBuf,
        /// Only this spinor.
        #[arg(long)]
        spinor: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario and its expectations.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// The bundled scenario corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Print each corpus file with the statement it reproduces.
    List,
    /// Run every corpus file.
    RunAll {
        #[command(flatten)]
        common: Common,
    },
}

fn emit(text: &str, to: &Option<PathBuf>) -> Result<(), String> {
    match to {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn verify(file: &Path, spinor: Option<&str>, common: &Common) -> i32 {
    let src = match fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot read {}: {e}", file.display());
            return 2;
        }
    };
    let report = parse_scenario(&src).and_then(|s| verify_all(&s, spinor, &common.cfg()));
    match report {
        Ok(r) => match emit(&r.render(), &common.report) {
            Ok(()) => r.exit_code(),
            Err(e) => {
                eprintln!("{e}");
                2
            }
        },
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            2
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { file, spinor, common } => code(verify(&file, spinor.as_deref(), &common)),
        Command::Run { file, common } => {
            let r = run_file(&file, &common.cfg());
            if let Err(e) = emit(&r.render(), &common.report) {
                eprintln!("{e}");
                return code(2);
            }
            if let Some(e) = &r.config_error {
                eprintln!("{}: {e}", file.display());
            }
            code(r.exit_code())
        }
        Command::Corpus { action } => {
            let dir = corpus_dir();
            let entries = match list_corpus(&dir) {
                Ok(e) => e,
                Err(e) => {
                    eprintln!("cannot read corpus {}: {e}", dir.display());
                    return code(2);
                }
            };
            match action {
                CorpusAction::List => {
                    print!("{}", format_manifest(&entries));
                    code(0)
                }
                CorpusAction::RunAll { common } => {
                    let results = run_all(&entries, &common.cfg());
                    let mut text = String::new();
                    for (_, r) in &results {
                        text.push_str(&r.render());
                        text.push('\n');
                    }
                    text.push_str(&summary(&results));
                    if let Err(e) = emit(&text, &common.report) {
                        eprintln!("{e}");
                        return code(2);
                    }
                    if common.report.is_some() {
                        print!("{}", summary(&results));
                    }
                    code(batch_exit_code(&results))
                }
            }
        }
    }
}
