use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use arena_client::ArenaClient;
use arena_core::board::position_to_notation;
use arena_core::clock::TimingMode;
use arena_core::log::{from_structured, replay, to_structured, to_text, to_text_many, verify_log, GameLog};
use arena_core::meta::{run_analysis, AnalysisBudget, AnalysisError, IntelligentSystem, MetaLearner, StallingSystem};
use arena_core::stage::{builtin_catalog, find_builtin, load_stage, CatalogEntry, StageConfig};
use arena_core::tournament::{
    run_analysis_phase, run_game, run_tournament, AnalysisOutcome, Budgets, Entrant, Seat, TournamentConfig, Weights,
};
use arena_service::{AppState, ServiceConfig};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Stage(#[from] arena_core::stage::StageError),
    #[error(transparent)]
    Tournament(#[from] arena_core::tournament::TournamentError),
    #[error(transparent)]
    Log(#[from] arena_core::log::LogError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Client(#[from] arena_client::ClientError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed")]
    VerifyFailed,
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "arena", version, about = "Hidden-rule Othello arena")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the built-in stages.
    Stages {
        /// Print the stage documents as JSON.
        #[arg(long)]
        json: bool,
        /// Ask a running service instead of the local catalog.
        #[arg(long)]
        server: Option<String>,
    },
    /// Play one game and write its logs.
    Play {
        stage: String,
        black: String,
        white: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Round robin over stages and entrants, scored and written as a report.
    Tournament {
        /// Comma-separated stage ids; all built-in stages when omitted.
        #[arg(long, value_delimiter = ',')]
        stages: Vec<String>,
        /// Comma-separated entrant ids.
        #[arg(long, value_delimiter = ',', required = true)]
        entrants: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        /// Metric weights as P,A,E,G,R.
        #[arg(long)]
        weights: Option<Weights>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run an analysis system on one stage and write its strategy and transcript.
    Analyze {
        system: String,
        stage: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Show the board of a structured log after a number of moves.
    Replay {
        file: PathBuf,
        /// Number of moves to apply; the whole game when omitted.
        #[arg(long = "move")]
        k: Option<usize>,
        /// Game within the file, from 1.
        #[arg(long, default_value_t = 1)]
        game: usize,
        /// Stage document to take the rules from, for stages outside the catalog.
        #[arg(long)]
        stage: Option<PathBuf>,
        /// Re-simulate the whole game and check it.
        #[arg(long)]
        verify: bool,
    },
    /// List the replays a running service offers.
    Replays {
        #[arg(long)]
        server: String,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Analysis budget in seconds.
    #[arg(long, default_value_t = 60.0)]
    t_analysis: f64,
    /// Per-player game budget in seconds.
    #[arg(long, default_value_t = 10.0)]
    t_game: f64,
    /// Factor applied to both budgets.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value = "wall")]
    timing: TimingMode,
    #[arg(long, env = "ARENA_OUT", default_value = ".")]
    out: PathBuf,
}

impl RunArgs {
    fn budgets(&self) -> Result<Budgets> {
        let secs = |name: &str, v: f64| {
            Duration::try_from_secs_f64(v)
                .ok()
                .filter(|d| !d.is_zero())
                .ok_or_else(|| CliError::Usage(format!("--{name} must be a positive number of seconds")))
        };
        let budgets = Budgets {
            t_analysis: secs("t-analysis", self.t_analysis)?,
            t_game: secs("t-game", self.t_game)?,
            scale: self.scale,
        };
        budgets.validate()?;
        Ok(budgets)
    }
}

/// Writes through a temporary file in the same directory so readers never see a
/// partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn stage_line(id: &str, name: &str, visibility: &str) -> String {
    format!("{id}  {name}  {visibility}")
}

fn cmd_stages(json: bool, server: Option<String>) -> Result<()> {
    if let Some(url) = server {
        let summaries = runtime()?.block_on(ArenaClient::new(url).stages())?;
        if json {
            println!("{}", serde_json::to_string_pretty(&summaries).expect("summaries serialize"));
        } else {
            for s in &summaries {
                println!("{}", stage_line(&s.id, &s.name, s.visibility.as_str()));
            }
        }
        return Ok(());
    }
    let catalog = builtin_catalog();
    if json {
        // The local catalog is the operator's own, so the full documents are shown.
        let docs: Vec<StageConfig> = catalog.into_iter().map(|e| e.stage).collect();
        println!("{}", serde_json::to_string_pretty(&docs).expect("stages serialize"));
        return Ok(());
    }
    for e in &catalog {
        println!("{}", stage_line(&e.stage.id, &e.stage.name, e.visibility.as_str()));
    }
    Ok(())
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Runtime::new().map_err(|source| CliError::Io { path: PathBuf::from("<runtime>"), source })
}

fn seat(id: &str, entry: &CatalogEntry, budgets: &Budgets, mode: TimingMode, seed: u64) -> Result<Seat> {
    match Entrant::by_id(id)? {
        Entrant::Fixed(s) => Ok(Seat::of(s)),
        Entrant::System(sys) => match run_analysis_phase(&sys, entry, budgets, mode, seed) {
            AnalysisOutcome::Entered { seat, .. } => Ok(seat),
            AnalysisOutcome::Disqualified { error, .. } => Err(error.into()),
        },
    }
}

fn game_file(out: &Path, stage_id: &str, seed: u64, ext: &str) -> PathBuf {
    out.join(format!("game-{stage_id}-{seed}.{ext}"))
}

fn write_logs(out: &Path, stage_id: &str, seed: u64, logs: &[GameLog]) -> Result<()> {
    write_atomic(&game_file(out, stage_id, seed, "txt"), &to_text_many(logs))?;
    write_atomic(&game_file(out, stage_id, seed, "json"), &to_structured(logs))
}

fn cmd_play(stage: &str, black: &str, white: &str, seed: u64, run: &RunArgs) -> Result<()> {
    let budgets = run.budgets()?;
    let entry = find_builtin(stage)?;
    let black = seat(black, &entry, &budgets, run.timing, seed)?;
    let white = seat(white, &entry, &budgets, run.timing, seed)?;
    let (_, log) = run_game(&entry.stage, &black, &white, &budgets, seed, run.timing);
    write_logs(&run.out, stage, seed, std::slice::from_ref(&log))?;
    print!("{}", to_text(&log, 1));
    Ok(())
}

fn cmd_tournament(
    stages: &[String],
    entrants: &[String],
    seeds: Vec<u64>,
    weights: Option<Weights>,
    run: &RunArgs,
) -> Result<()> {
    let stages = if stages.is_empty() {
        builtin_catalog()
    } else {
        stages.iter().map(|id| find_builtin(id)).collect::<std::result::Result<_, _>>()?
    };
    let entrants = entrants.iter().map(|id| Entrant::by_id(id)).collect::<std::result::Result<_, _>>()?;
    let mut config = TournamentConfig::new(stages, entrants, seeds);
    config.budgets = run.budgets()?;
    config.mode = run.timing;
    if let Some(w) = weights {
        config.weights = w;
    }
    let (report, logs) = run_tournament(&config)?;
    write_atomic(&run.out.join(format!("{}.json", report.id)), &report.to_document())?;
    for (stage, stage_logs) in report.stages.iter().zip(&logs) {
        if stage_logs.is_empty() {
            continue;
        }
        let per_seed = stage_logs.len() / config.seeds.len();
        for (seed, chunk) in config.seeds.iter().zip(stage_logs.chunks(per_seed)) {
            write_logs(&run.out, &stage.stage_id, *seed, chunk)?;
        }
    }
    println!("report {}", report.id);
    print!("{}", report.summary());
    Ok(())
}

fn analysis_system(id: &str) -> Result<Arc<dyn IntelligentSystem>> {
    match id {
        "meta-learner" => Ok(Arc::new(MetaLearner)),
        // Test double that overruns any budget.
        "stalling" => Ok(Arc::new(StallingSystem { extra: Duration::from_secs(1) })),
        other => Err(CliError::Usage(format!("unknown analysis system {other:?} (meta-learner|stalling)"))),
    }
}

fn cmd_analyze(system: &str, stage: &str, seed: u64, run: &RunArgs) -> Result<()> {
    let budgets = run.budgets()?;
    let system = analysis_system(system)?;
    let entry = find_builtin(stage)?;
    let budget = AnalysisBudget::with_total(budgets.analysis());
    let started = Instant::now();
    let result = run_analysis(Arc::clone(&system), &entry.stage, &budget, run.timing, seed);
    let wall = started.elapsed();

    let mut transcript = vec![
        format!("system: {}", system.id()),
        format!("stage: {}", entry.stage.id),
        format!("budget: {} ms", budget.total.as_millis()),
    ];
    let outcome = match result {
        Ok(analysis) => {
            transcript.extend(analysis.artifact.transcript.iter().cloned());
            transcript.push(format!("api calls: {}", analysis.usage.total_calls()));
            if let Some(doc) = &analysis.artifact.document {
                write_atomic(&run.out.join(format!("strategy-{}-{}.json", system.id(), entry.stage.id)), doc)?;
            }
            Ok(())
        }
        Err(e) => {
            transcript.push(format!("error: {e}"));
            Err(e)
        }
    };
    transcript.push(format!("wall time: {} ms", wall.as_millis()));
    let text = transcript.join("\n") + "\n";
    write_atomic(&run.out.join(format!("analysis-{}-{}.txt", system.id(), entry.stage.id)), &text)?;
    print!("{text}");
    outcome.map_err(CliError::from)
}

fn cmd_replay(file: &Path, k: Option<usize>, game: usize, stage: Option<&Path>, verify: bool) -> Result<()> {
    let logs = from_structured(&read(file)?)?;
    let log = game
        .checked_sub(1)
        .and_then(|i| logs.get(i))
        .ok_or_else(|| CliError::Usage(format!("game {game} not in file ({} games)", logs.len())))?;
    let rules = match stage {
        Some(path) => load_stage(&read(path)?)?.rules,
        None => find_builtin(&log.metadata.stage_id)?.stage.rules,
    };
    let k = k.unwrap_or(log.moves.len());
    let board = replay(log, k, &rules)?;
    let size = log.initial_board.size();
    let m = &log.metadata;
    println!("{} (B) vs {} (W) on {}", m.black_strategy, m.white_strategy, m.stage_name);
    match k.checked_sub(1).map(|i| &log.moves[i]) {
        Some(mv) => println!(
            "move {k}/{}: {:?} {}",
            log.moves.len(),
            mv.player,
            position_to_notation(mv.position, size).unwrap_or_else(|_| "??".into())
        ),
        None => println!("move 0/{}", log.moves.len()),
    }
    print!("{}", board.render());
    if verify {
        let ok = verify_log(log, &rules);
        println!("verify: {}", if ok { "ok" } else { "FAILED" });
        if !ok {
            return Err(CliError::VerifyFailed);
        }
    }
    Ok(())
}

fn cmd_replays(server: String) -> Result<()> {
    let replays = runtime()?.block_on(ArenaClient::new(server).replays())?;
    for r in replays {
        println!(
            "{}  {}  {} vs {}  {}-{}",
            r.id, r.stage_id, r.black_strategy, r.white_strategy, r.black_score, r.white_score
        );
    }
    Ok(())
}

fn cmd_serve(addr: SocketAddr, run: &RunArgs) -> Result<()> {
    let config = ServiceConfig { budgets: run.budgets()?, timing: run.timing, data_dir: Some(run.out.clone()) };
    let rt = runtime()?;
    let io = |source| CliError::Io { path: PathBuf::from(addr.to_string()), source };
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(io)?;
        eprintln!("listening on http://{}", listener.local_addr().map_err(io)?);
        arena_service::serve(listener, AppState::new(config)).await.map_err(io)
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stages { json, server } => cmd_stages(json, server),
        Command::Play { stage, black, white, seed, run } => cmd_play(&stage, &black, &white, seed, &run),
        Command::Tournament { stages, entrants, seeds, weights, run } => {
            cmd_tournament(&stages, &entrants, seeds, weights, &run)
        }
        Command::Analyze { system, stage, seed, run } => cmd_analyze(&system, &stage, seed, &run),
        Command::Replay { file, k, game, stage, verify } => cmd_replay(&file, k, game, stage.as_deref(), verify),
        Command::Replays { server } => cmd_replays(server),
        Command::Serve { addr, run } => cmd_serve(addr, &run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
