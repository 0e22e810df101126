use std::fs;
use std::io::{IsTerminal, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hchoquet_cli::engine::{self, EngineError, ErrorCode, ErrorRecord, CASE_STUDY};
use hchoquet_cli::server::{self, BIND_ENV, DEFAULT_BIND};
use hchoquet_core::dataio::{
    self, export_results, results_from_json, ExportFormat, Problem, ResultsDocument,
};
use hchoquet_core::smaa::{EpsilonMode, RunControl, SamplerConfig, SmaaResult};

#[derive(Parser)]
#[command(name = "hchoquet", version)]
#[command(about = "Hierarchical Choquet preference analysis: robust ordinal regression and SMAA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem document, or `case-study` for the bundled synthetic example
    #[arg(long, default_value = CASE_STUDY)]
    problem: String,

    /// Performance table replacing the one the document references
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct NodeArgs {
    /// Criterion node by name or dotted path (repeatable); all internal nodes by default
    #[arg(long = "node")]
    nodes: Vec<String>,
}

#[derive(Args)]
struct SamplerArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,

    #[arg(long, default_value_t = 10_000)]
    burn_in: usize,

    #[arg(long, default_value_t = 5)]
    thinning: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// `fraction:<ratio>` of the maximal ε, or `fixed:<value>`
    #[arg(long, default_value = "fraction:0.5")]
    eps_mode: EpsilonMode,

    /// Independent sampling chains
    #[arg(long, default_value_t = 1)]
    chains: usize,
}

impl SamplerArgs {
    fn config(&self) -> SamplerConfig {
        SamplerConfig {
            sample_count: self.samples,
            burn_in: self.burn_in,
            thinning: self.thinning,
            seed: self.seed,
            epsilon_mode: self.eps_mode,
            chains: self.chains,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Directory receiving exported results
    #[arg(long)]
    out: Option<PathBuf>,

    /// Export format: `json` (one document) or `csv` (one table per index)
    #[arg(long, default_value = "json")]
    format: ExportFormat,
}

#[derive(Args)]
struct SourceArgs {
    /// Results document from an earlier `smaa` run; sampling is skipped when given
    #[arg(long)]
    from: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem document and its table
    Validate {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Dominance relation of the performance table
    Dominance {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximal ε of the statement system and, when infeasible, a diagnostic
    Consistency {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Necessary and possible preference relations
    Nap {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        nodes: NodeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample compatible capacities and compute acceptability indices
    Smaa {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        nodes: NodeArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rankings induced by the barycenter capacity
    Rank {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        nodes: NodeArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rank acceptability summaries and barycenter rankings per node
    Report {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        nodes: NodeArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Start the HTTP JSON session service
    Serve {
        /// Socket address to listen on
        #[arg(long, env = BIND_ENV, default_value = DEFAULT_BIND)]
        bind: SocketAddr,
    },
    /// Write the bundled case-study document and table into a directory
    CaseStudy {
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

fn export(doc: &ResultsDocument, problem: &Problem, output: &OutputArgs) -> anyhow::Result<()> {
    if let Some(dir) = &output.out {
        export_results(doc, &problem.table.criteria, dir, output.format).map_err(EngineError::from)?;
    }
    Ok(())
}

/// Progress on standard error when attached to a terminal; standard output stays deterministic.
fn run_sampler(problem: &Problem, nodes: &[hchoquet_core::NodeId], sampler: &SamplerArgs) -> anyhow::Result<SmaaResult> {
    let interactive = std::io::stderr().is_terminal();
    let progress = |done: usize, total: usize| {
        if interactive {
            eprint!("\rsampling {done}/{total}");
        }
    };
    let control = RunControl {
        progress: Some(&progress),
        cancel: None,
    };
    let result = engine::smaa(problem, nodes, &sampler.config(), control)?;
    if interactive {
        eprintln!();
    }
    Ok(result)
}

fn previous_or_fresh(
    problem: &Problem,
    nodes: &[hchoquet_core::NodeId],
    sampler: &SamplerArgs,
    source: &SourceArgs,
) -> anyhow::Result<SmaaResult> {
    let Some(path) = &source.from else {
        return run_sampler(problem, nodes, sampler);
    };
    let text = fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))?;
    let doc = results_from_json(&text).map_err(EngineError::from)?;
    if doc.alternatives != problem.table.ids() {
        return Err(EngineError::bad_request(format!(
            "`{}` was computed for different alternatives",
            path.display()
        ))
        .into());
    }
    doc.smaa
        .ok_or_else(|| EngineError::bad_request(format!("`{}` holds no SMAA result", path.display())).into())
}

fn write_case_study(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create `{}`", dir.display()))?;
    let doc: serde_json::Value = serde_json::from_str(dataio::CASE_STUDY_JSON)?;
    let table = doc["table"]["path"].as_str().unwrap_or("case_study_table.csv");
    fs::write(dir.join("case_study.json"), dataio::CASE_STUDY_JSON)?;
    fs::write(dir.join(table), dataio::CASE_STUDY_CSV)?;
    print_json(&serde_json::json!({
        "problem": dir.join("case_study.json"),
        "table": dir.join(table),
    }))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { problem } => {
            let p = engine::load(&problem.problem, problem.table.as_deref())?;
            print_json(&engine::validate(&p))
        }
        Command::Dominance { problem, output } => {
            let p = engine::load(&problem.problem, problem.table.as_deref())?;
            let report = engine::dominance_report(&p);
            let mut doc = ResultsDocument::new(&p);
            doc.dominance = Some(report.matrix.clone());
            export(&doc, &p, &output)?;
            print_json(&report)
        }
        Command::Consistency { problem, output } => {
            let p = engine::load(&problem.problem, problem.table.as_deref())?;
            let report = engine::consistency(&p)?;
            let mut doc = ResultsDocument::new(&p);
            doc.consistency = Some(report.consistency());
            export(&doc, &p, &output)?;
            print_json(&report)
        }
        Command::Nap { problem, nodes, output } => {
            let p = engine::load(&problem.problem, problem.table.as_deref())?;
            let ids = engine::resolve_nodes(&p.hierarchy, &nodes.nodes)?;
            let relations = engine::nap(&p, &ids)?;
            let mut doc = ResultsDocument::new(&p);
            doc.nap = relations.clone();
            export(&doc, &p, &output)?;
            print_json(&relations)
        }
        Command::Smaa { problem, nodes, sampler, output } => {
            let p = engine::load(&problem.problem, problem.table.as_deref())?;
            let ids = engine::resolve_nodes(&p.hierarchy, &nodes.nodes)?;
            let result = run_sampler(&p, &ids, &sampler)?;
            let mut doc = ResultsDocument::new(&p);
            doc.smaa = Some(result.clone());
            export(&doc, &p, &output)?;
            print_json(&result)
        }
        Command::Rank { problem, nodes, sampler, source, output } => {
            let p = engine::load(&problem.problem, problem.table.as_deref())?;
            let ids = engine::resolve_nodes(&p.hierarchy, &nodes.nodes)?;
            let result = previous_or_fresh(&p, &ids, &sampler, &source)?;
            let rankings = engine::rankings(&p, &result, &ids)?;
            let mut doc = ResultsDocument::new(&p);
            doc.rankings = rankings.clone();
            export(&doc, &p, &output)?;
            print_json(&rankings)
        }
        Command::Report { problem, nodes, sampler, source, output } => {
            let p = engine::load(&problem.problem, problem.table.as_deref())?;
            let ids = engine::resolve_nodes(&p.hierarchy, &nodes.nodes)?;
            let result = previous_or_fresh(&p, &ids, &sampler, &source)?;
            let rankings = engine::rankings(&p, &result, &[])?;
            let report = engine::report(&p, &result, &rankings);
            let mut doc = ResultsDocument::new(&p);
            doc.consistency = Some(engine::consistency(&p)?.consistency());
            doc.smaa = Some(result);
            doc.rankings = rankings;
            export(&doc, &p, &output)?;
            print_json(&report)
        }
        Command::Serve { bind } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(bind)
                    .await
                    .with_context(|| format!("cannot bind {bind}"))?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                server::serve(listener).await?;
                Ok(())
            })
        }
        Command::CaseStudy { out } => write_case_study(&out),
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        cause
            .downcast_ref::<std::io::Error>()
            .map(|io| io.kind())
            .or_else(|| cause.downcast_ref::<serde_json::Error>().and_then(|j| j.io_error_kind()))
            == Some(std::io::ErrorKind::BrokenPipe)
    })
}

fn fail(error: EngineError, status: u8) -> ExitCode {
    let record = serde_json::to_string(&ErrorRecord { error }).unwrap_or_default();
    eprintln!("{record}");
    ExitCode::from(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail(EngineError::bad_request(e.to_string().trim_end()), 2),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => match e.downcast::<EngineError>() {
            Ok(engine_error) => fail(engine_error, 1),
            Err(other) => fail(EngineError::new(ErrorCode::Internal, format!("{other:#}")), 1),
        },
    }
}
