use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use traceloc::pipeline::{
    self, compare_runs, load_reports, read_json, report_table, write_atomic, write_comparison_csv, write_json,
    CompareTest, PipelineError, ReportBundle, RunConfig,
};
use traceloc::score::Component;

#[derive(Parser)]
#[command(name = "traceloc", version, about = "Bug localization from issue traces, version history and code structure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load issues, commits and links; write ingest_summary.json.
    Ingest(RunArgs),
    /// Compute one or more component score tables.
    Score {
        #[arg(value_enum, required = true)]
        components: Vec<ComponentArg>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fuse persisted score tables into rankings.
    Fuse(RunArgs),
    /// Evaluate persisted rankings and write report.json / report.csv.
    Evaluate(RunArgs),
    /// Ingest, score, fuse and evaluate in one go.
    Run(RunArgs),
    /// Compare two sets of per-project reports with a paired t-test or a K-S test.
    Compare {
        /// report.json files of the first system, one per project.
        #[arg(long, num_args = 1.., required = true)]
        left: Vec<PathBuf>,
        /// report.json files of the second system.
        #[arg(long, num_args = 1.., required = true)]
        right: Vec<PathBuf>,
        #[arg(long)]
        left_composer: Option<String>,
        #[arg(long)]
        right_composer: Option<String>,
        #[arg(long, value_enum, default_value = "ttest")]
        test: TestArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Build a per-project metrics table from several report.json files.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        composer: Option<String>,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ComponentArg {
    Trace,
    History,
    Structure,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Ttest,
    Ks,
}

#[derive(Clone, Copy, ValueEnum)]
enum CutoffArg {
    Relaxed,
    Strict,
}

#[derive(Clone, Copy, ValueEnum)]
enum TruthArg {
    All,
    ExcludeAdded,
}

#[derive(Clone, Copy, ValueEnum)]
enum HistoryCutoffArg {
    Created,
    Resolved,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    workdir: Option<PathBuf>,
    #[arg(long, value_enum)]
    cutoff: Option<CutoffArg>,
    /// Composer(s) to run, comma separated: fixed_weight, combsum, combmnz, combanz,
    /// corrb, borda, lr, dt, rf, mlp.
    #[arg(long, value_delimiter = ',')]
    composer: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Permit the leaky resolved-date cut-off for the history component.
    #[arg(long)]
    allow_leakage: bool,
    #[arg(long, value_enum)]
    bugcache_cutoff: Option<HistoryCutoffArg>,
    #[arg(long, value_enum)]
    truth_policy: Option<TruthArg>,
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, PipelineError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(w) = &self.workdir {
            cfg.workdir = w.clone();
        }
        if let Some(c) = self.cutoff {
            cfg.set("cutoff", match c {
                CutoffArg::Relaxed => "relaxed",
                CutoffArg::Strict => "strict",
            })?;
        }
        if !self.composer.is_empty() {
            cfg.set("composers", &self.composer.join(","))?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.allow_leakage {
            cfg.bugcache.allow_leakage = true;
        }
        if let Some(c) = self.bugcache_cutoff {
            cfg.set("bugcache.cutoff", match c {
                HistoryCutoffArg::Created => "created",
                HistoryCutoffArg::Resolved => "resolved",
            })?;
        }
        if let Some(t) = self.truth_policy {
            cfg.set("truth_policy", match t {
                TruthArg::All => "all",
                TruthArg::ExcludeAdded => "exclude_added",
            })?;
        }
        if let Some(n) = self.threads {
            cfg.threads = Some(n);
        }
        Ok(cfg)
    }
}

fn print_bundle(bundle: &ReportBundle) {
    for r in &bundle.reports {
        let cells: Vec<String> = traceloc::eval::METRICS.iter().map(|m| format!("{m}={:.3}", r.metric(m))).collect();
        println!("{} {} bugs={} {}", r.project, r.composer, r.bug_count, cells.join(" "));
    }
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Ingest(args) => {
            let summary = pipeline::run_ingest(&args.config()?)?;
            println!(
                "{}: {} issues ({} bugs), {} commits, {} links, {} queries",
                summary.project, summary.issues, summary.bugs, summary.commits, summary.links, summary.queries
            );
        }
        Command::Score { components, run } => {
            let comps: Vec<Component> = components
                .iter()
                .map(|c| match c {
                    ComponentArg::Trace => Component::Trace,
                    ComponentArg::History => Component::History,
                    ComponentArg::Structure => Component::Structure,
                })
                .collect();
            pipeline::run_score(&run.config()?, &comps)?;
        }
        Command::Fuse(args) => {
            for o in pipeline::run_fuse(&args.config()?)? {
                println!("{}: {} rankings", o.kind.as_str(), o.rankings.len());
            }
        }
        Command::Evaluate(args) => print_bundle(&pipeline::run_evaluate(&args.config()?)?),
        Command::Run(args) => print_bundle(&pipeline::run_pipeline(&args.config()?)?.bundle),
        Command::Compare { left, right, left_composer, right_composer, test, out } => {
            let a = load_reports(&left, left_composer.as_deref())?;
            let b = load_reports(&right, right_composer.as_deref())?;
            let test = match test {
                TestArg::Ttest => CompareTest::TTest,
                TestArg::Ks => CompareTest::Ks,
            };
            let rows = compare_runs(&a, &b, test)?;
            let mut buf = Vec::new();
            write_comparison_csv(&mut buf, &rows).map_err(|e| PipelineError::Io(e.to_string()))?;
            match out {
                Some(path) => write_atomic(&path, &buf)?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
        }
        Command::Report { inputs, composer, out } => {
            let bundles = inputs.iter().map(|p| read_json(p)).collect::<Result<Vec<ReportBundle>, _>>()?;
            let reports = report_table(&bundles, composer.as_deref(), &out)?;
            write_json(&out.with_extension("json"), &reports)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("TRACELOC_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match execute(cli).context("traceloc failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err.downcast_ref::<PipelineError>().map_or(2, PipelineError::exit_code);
            eprintln!("error: {}", err.root_cause());
            ExitCode::from(code as u8)
        }
    }
}
