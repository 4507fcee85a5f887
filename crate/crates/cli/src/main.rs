//! `expgroup`: seeded experiments with black-box expanded-group algorithms.
//!
//! Exit codes: 0 when the empirical failure rate is within the bound's 3σ
//! threshold, 1 when it is not, 2 for usage, spec, or runtime errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use expgroup::harness::{
    cmd_choose_k, cmd_decide_variety, cmd_gen_additive, cmd_gen_ideal, cmd_subproduct_bound, load_algebra, load_basis,
    ElementRef, ExperimentConfig, ExperimentReport, HarnessError, LoadedAlgebra, SpecError,
};

#[derive(Parser)]
#[command(
    name = "expgroup",
    version,
    about = "Black-box algorithms for finite distributive expanded groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Additive generators from a generating system; bound n/c^n.
    GenAdditive(Common),
    /// Additive generators of the ideal generated by t; bound 2n/c^n.
    GenIdeal {
        #[command(flatten)]
        common: Common,
        /// Element of t, by index or label; repeat for more. Defaults to the spec's idealGenerators.
        #[arg(long = "t", value_name = "ELEMENT")]
        t: Vec<String>,
        /// Cut the output down to kn random subsums.
        #[arg(long)]
        reduce: bool,
    },
    /// Decide membership in the variety of a basis; bound n/c^n.
    DecideVariety {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        basis: PathBuf,
    },
    /// Fraction of kl random subsums that fail to generate the additive group.
    SubproductBound(Common),
    /// Print the least admissible k for c.
    ChooseK {
        #[arg(long, default_value_t = 2.0)]
        c: f64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    /// Override the least admissible k.
    #[arg(long)]
    k: Option<usize>,
    /// Salt width; overrides the spec, default 4.
    #[arg(long)]
    salt_bits: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rounds parameter n; at least the encoding length, which is the default.
    #[arg(long)]
    n: Option<u32>,
    /// Keep repeated elements in each round instead of deduplicating.
    #[arg(long)]
    keep_duplicates: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, reduce: bool) -> ExperimentConfig {
        ExperimentConfig {
            c: self.c,
            k: self.k,
            salt_bits: self.salt_bits,
            trials: self.trials,
            seed: self.seed,
            reduce,
            keep_duplicates: self.keep_duplicates,
            n: self.n,
            threads: self.threads,
        }
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Spec(SpecError::new("", format!("cannot read {}: {e}", path.display()))))
}

fn load(path: &Path) -> Result<LoadedAlgebra, HarnessError> {
    load_algebra(&read(path)?).map_err(|e| in_file(path, e))
}

fn in_file(file: &Path, e: SpecError) -> HarnessError {
    HarnessError::Spec(SpecError::new("", format!("{}: {e}", file.display())))
}

fn emit(json: &str, out: Option<&Path>) -> Result<(), HarnessError> {
    match out {
        Some(p) => std::fs::write(p, format!("{json}\n"))
            .map_err(|e| HarnessError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<Option<ExperimentReport>, HarnessError> {
    let (report, out) = match cli.command {
        Command::ChooseK { c } => {
            let r = cmd_choose_k(c)?;
            emit(&r.to_json(), None)?;
            return Ok(None);
        }
        Command::GenAdditive(common) => {
            let alg = load(&common.spec)?;
            (cmd_gen_additive(&alg, &common.config(false))?, common.out)
        }
        Command::GenIdeal { common, t, reduce } => {
            let alg = load(&common.spec)?;
            let t = if t.is_empty() {
                alg.ideal_generators
                    .clone()
                    .ok_or_else(|| HarnessError::Usage("no --t given and the spec has no idealGenerators".into()))?
            } else {
                let refs: Vec<ElementRef> = t.into_iter().map(ElementRef::Label).collect();
                alg.resolve(&refs, "--t")?
            };
            (cmd_gen_ideal(&alg, &t, &common.config(reduce))?, common.out)
        }
        Command::DecideVariety { common, basis } => {
            let alg = load(&common.spec)?;
            let b = load_basis(&read(&basis)?, &alg).map_err(|e| in_file(&basis, e))?;
            (cmd_decide_variety(&alg, &b, &common.config(false))?, common.out)
        }
        Command::SubproductBound(common) => {
            let alg = load(&common.spec)?;
            (cmd_subproduct_bound(&alg, &common.config(false))?, common.out)
        }
    };
    emit(&report.to_json(), out.as_deref())?;
    Ok(Some(report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(r)) => {
            eprintln!(
                "{}: {} of {} trials failed (rate {:.5}, threshold {:.5}) in {:.2?}",
                r.command,
                r.failures,
                r.trials,
                r.empirical_failure_rate,
                r.threshold,
                start.elapsed()
            );
            if r.bound_satisfied {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
