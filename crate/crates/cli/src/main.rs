//! `putforge`: turns the unit tests of a Rust project into parameterized
//! tests fed by arguments captured at runtime.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use putforge_core::capture::Context;
use putforge_core::config::{Config, DurationSetting, Settings};
use putforge_core::fixtures;
use putforge_core::pipeline::Pipeline;
use putforge_core::runner::report::Report;

#[derive(Parser)]
#[command(name = "putforge", version, about = "Generate parameterized unit tests from captured arguments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Project directory (holding Cargo.toml and putforge.toml).
    #[arg(long, short = 'p', global = true, default_value = ".")]
    project: PathBuf,
    /// Configuration file instead of <project>/putforge.toml.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for every artifact.
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,
    /// Shell command exercising the project like production code would.
    #[arg(long, global = true)]
    workload_command: Option<String>,
    /// Shell command running the test suite.
    #[arg(long, global = true)]
    test_command: Option<String>,
    /// Test framework adapter.
    #[arg(long, global = true)]
    adapter: Option<String>,
    /// Assertion macro or function name (repeatable; replaces the defaults).
    #[arg(long = "assertion", global = true)]
    assertions: Vec<String>,
    /// Maximum provider rows per PUT.
    #[arg(long, global = true)]
    row_cap: Option<usize>,
    /// Per-row timeout, e.g. `30`, `500ms` or `2m`.
    #[arg(long, global = true)]
    timeout: Option<String>,
    /// Re-runs of a failing cell; the last outcome counts.
    #[arg(long, global = true)]
    retries: Option<u32>,
    /// Parallel cell workers.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Run the rows of one PUT in parallel too.
    #[arg(long, global = true)]
    parallel_rows: bool,
    /// Capture records kept per target and process.
    #[arg(long, global = true)]
    max_records: Option<u64>,
    /// One PUT family per call site instead of only the first.
    #[arg(long, global = true)]
    per_site_variants: bool,
    /// Project-relative path never analyzed (repeatable).
    #[arg(long, global = true)]
    exclude: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Test,
    Field,
}

#[derive(Subcommand)]
enum Command {
    /// Find target methods and tests; writes targets.json and tests.json.
    Analyze,
    /// Instrument the project and record the arguments of one session.
    Capture {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Command to run instead of the configured one.
        #[arg(long)]
        cmd: Option<String>,
    },
    /// Build argument unions and render the PUTs.
    Generate,
    /// Run, classify and finalize the PUTs; writes the reports.
    Classify,
    /// Rebuild report.json and report.md from the stored artifacts.
    Report,
    /// Every stage in order.
    Run,
    /// Run the pipeline on a bundled fixture and compare with its ground truth.
    VerifyFixture {
        /// Fixture directory holding ground-truth.json.
        dir: PathBuf,
    },
}

impl Global {
    fn settings(&self) -> Result<Settings> {
        Ok(Settings {
            workspace: self.workspace.clone(),
            workload_command: self.workload_command.clone(),
            test_command: self.test_command.clone(),
            adapter: self.adapter.clone(),
            assertion_allow_list: (!self.assertions.is_empty()).then(|| self.assertions.clone()),
            provider_row_cap: self.row_cap,
            per_row_timeout: self.timeout.clone().map(DurationSetting::Text),
            retries: self.retries,
            jobs: self.jobs,
            parallel_rows: self.parallel_rows.then_some(true),
            max_records_per_target: self.max_records,
            per_site_variants: self.per_site_variants.then_some(true),
            exclude: (!self.exclude.is_empty()).then(|| self.exclude.clone()),
        })
    }

    fn pipeline(&self) -> Result<Pipeline> {
        let config = Config::load(&self.project, self.config.as_deref(), self.settings()?)?;
        Ok(Pipeline::new(config))
    }
}

fn print_report(report: &Report) {
    let m = &report.module;
    println!(
        "{} PUTs executed: {} strongly-coupled, {} falsifiably-coupled, {} decoupled, {} ill-formed ({} with errors, {} with timeouts, {} excluded)",
        m.executed, m.strongly_coupled, m.falsifiably_coupled, m.decoupled, m.ill_formed, m.errors, m.timeouts, m.excluded
    );
    let green = report.finalized.iter().filter(|f| f.green()).count();
    println!("{} finalized PUTs, {green} green on re-run", report.finalized.len());
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze => {
            let pipeline = cli.global.pipeline()?;
            let (_, summary) = pipeline.analyze()?;
            println!(
                "{} target methods, {} tests ({} invoking a target); artifacts in {}",
                summary.targets,
                summary.tests,
                summary.cuts,
                pipeline.workspace.root.display()
            );
        }
        Command::Capture { mode, cmd } => {
            let pipeline = cli.global.pipeline()?;
            let mode = match mode {
                Mode::Test => Context::Test,
                Mode::Field => Context::Field,
            };
            let summary = pipeline.capture(mode, cmd.as_deref())?;
            warn_all(&summary.session.warnings);
            for r in &summary.rejected {
                eprintln!("warning: rejected capture line: {r}");
            }
            println!("{} records captured in {}", summary.records, summary.session.log.display());
        }
        Command::Generate => {
            let summary = cli.global.pipeline()?.generate()?;
            warn_all(&summary.notes);
            println!(
                "{} PUTs in {} units ({} excluded as ill-formed by construction)",
                summary.puts, summary.units, summary.excluded
            );
        }
        Command::Classify => {
            let summary = cli.global.pipeline()?.classify()?;
            warn_all(&summary.warnings);
            print_report(&summary.report);
        }
        Command::Report => {
            let pipeline = cli.global.pipeline()?;
            let report = pipeline.report()?;
            print_report(&report);
            println!("report written to {}", pipeline.workspace.report_md().display());
        }
        Command::Run => {
            let summary = cli.global.pipeline()?.run_all()?;
            warn_all(&summary.warnings);
            print_report(&summary.report);
        }
        Command::VerifyFixture { dir } => {
            let mut settings = cli.global.settings()?;
            if settings.workspace.is_none() {
                settings.workspace = Some(std::env::temp_dir().join(format!(
                    "putforge-verify-{}",
                    dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
                )));
            }
            let outcome = fixtures::verify_fixture(&dir, settings)
                .with_context(|| format!("verifying fixture {}", dir.display()))?;
            for m in &outcome.mismatches {
                println!("mismatch: {m}");
            }
            if !outcome.passed() {
                anyhow::bail!("{} does not match its ground truth", dir.display());
            }
            println!("{}: matches ground truth", outcome.name);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .chain()
                .find_map(|c| c.downcast_ref::<putforge_core::Error>())
                .map(putforge_core::Error::exit_code)
                .unwrap_or(1);
            ExitCode::from(code as u8)
        }
    }
}
