use clap::Parser;
use oscillon::cli::{self, Subcommand};

/// Pseudo-spectral simulator and estimate-verification harness for the
/// damped nonlinear wave equation with exponentially decaying wave speed.
#[derive(Parser, Debug)]
#[command(name = "oscillon", version, about)]
struct Args {
    /// simulate | pullback | decay | forward-decay | decompose | dimension |
    /// verify-potential | compare-oracle
    subcommand: String,
    /// path to the run configuration
    #[arg(long)]
    config: std::path::PathBuf,
    /// output directory override
    #[arg(long)]
    out: Option<String>,
    /// seed override
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads for sweep subcommands (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let args = Args::parse();
    if let Some(k) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().ok();
    }
    let sub: Subcommand = match args.subcommand.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            std::process::exit(2);
        }
    };
    let mut cfg = match cli::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    if let Some(seed) = args.seed {
        cli::override_seed(&mut cfg, seed);
    }
    match cli::run(sub, cfg, args.out.as_deref()) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
