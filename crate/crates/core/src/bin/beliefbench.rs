use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use beliefbench::cli::{self, CliError};
use beliefbench::corpus::parse_until;
use beliefbench::report::discrepancy_text;
use beliefbench::synth::{generate, SynthSpec};
use beliefbench::{gitlog, BeliefId};

#[derive(Parser)]
#[command(
    name = "beliefbench",
    version,
    about = "Check developer beliefs about defects against git history"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clone (or reuse) every manifest project and cache its commit extract.
    Extract {
        /// Project manifest; the bundled 46-project corpus when omitted.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, env = "BELIEFBENCH_CACHE", default_value = ".beliefbench-cache")]
        cache: PathBuf,
        /// Ignore commits after this date (overrides per-project pins).
        #[arg(long)]
        until: Option<String>,
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
    /// Correlate every cached extract and write results.csv and summary.json.
    Analyze {
        #[arg(long, env = "BELIEFBENCH_CACHE", default_value = ".beliefbench-cache")]
        cache: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render boxplots and the discrepancy table from summary.json.
    Report {
        /// Defaults to <out>/summary.json.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Write a synthetic extract into the cache.
    Synth {
        #[arg(long, env = "BELIEFBENCH_CACHE", default_value = ".beliefbench-cache")]
        cache: PathBuf,
        #[arg(long, default_value = "synth/project")]
        slug: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        commits: usize,
        #[arg(long, default_value_t = 100)]
        source_files: usize,
        #[arg(long, default_value_t = 0.3)]
        bugfix_rate: f64,
        /// Planted correlation as BELIEF=RHO, e.g. B6=0.8.
        #[arg(long)]
        plant: Option<String>,
    },
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Extract {
            manifest,
            cache,
            until,
            jobs,
        } => {
            let entries = cli::manifest_or_default(manifest.as_deref())?;
            let until = until
                .map(|u| parse_until(&u))
                .transpose()
                .map_err(|e| CliError::Input(e.to_string()))?;
            let summary = cli::cmd_extract(&entries, &cache, until, jobs)?;
            for o in &summary.outcomes {
                match &o.result {
                    Ok(p) => println!("ok     {} -> {}", o.slug, p.display()),
                    Err(e) => println!("failed {}: {e}", o.slug),
                }
            }
            if let Some(v) = summary.verification {
                print!("{}", v.render());
            }
        }
        Command::Analyze {
            cache,
            config,
            out,
            jobs,
        } => {
            if let Some(j) = jobs {
                // only the first global pool configuration takes effect
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build_global();
            }
            let cfg = cli::config_or_default(config.as_deref())?;
            let a = cli::cmd_analyze(&cache, &cfg, &out)?;
            println!(
                "analyzed {} projects ({} commits); wrote {}",
                a.reports.len(),
                a.totals.corpus.commits,
                out.display()
            );
        }
        Command::Report {
            summary,
            config,
            out,
        } => {
            let cfg = cli::config_or_default(config.as_deref())?;
            let summary = summary.unwrap_or_else(|| out.join("summary.json"));
            let rows = cli::cmd_report(&summary, &cfg, &out)?;
            print!("{}", discrepancy_text(&rows));
        }
        Command::Synth {
            cache,
            slug,
            seed,
            commits,
            source_files,
            bugfix_rate,
            plant,
        } => {
            let mut spec = SynthSpec {
                seed,
                n_commits: commits,
                source_files,
                bugfix_rate,
                ..SynthSpec::default()
            };
            if let Some(p) = plant {
                let (b, r) = p.split_once('=').ok_or_else(|| {
                    CliError::Input(format!("--plant expects BELIEF=RHO, got `{p}`"))
                })?;
                let belief: BeliefId = b.parse().map_err(|e| CliError::Input(format!("{e}")))?;
                let rho: f64 = r
                    .parse()
                    .map_err(|e| CliError::Input(format!("--plant: {e}")))?;
                spec.target_rho.insert(belief, rho);
            }
            let records = generate(&spec).map_err(|e| CliError::Input(e.to_string()))?;
            std::fs::create_dir_all(&cache).map_err(|e| CliError::Input(e.to_string()))?;
            let path = beliefbench::corpus::extract_path(&cache, &slug);
            gitlog::write_extract(&records, &path).map_err(|e| CliError::Input(e.to_string()))?;
            println!("wrote {} commits to {}", records.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
