use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plexus_core::emotion::{EmotionLabel, EmotionScores};
use plexus_core::ingest::Credentials;
use plexus_core::session::{write_event_log, SessionError, SourceSpec};
use plexus_core::{score_text, Lexicon, Session, SessionConfig};
use serde::Serialize;

use crate::server::{router, AppState};

/// Exit status for invalid configuration or input files.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status when the HTTP listener cannot bind.
pub const EXIT_BIND: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "plexus", version, about = "Emotion clusters for two Twitter topics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one text and print the result as JSON.
    Analyze(AnalyzeArgs),
    /// Run a session, either serving it over HTTP or headless to a file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub text: String,
    /// Lexicon file; defaults to the bundled lexicon.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Replay,
    Live,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub topic_a: String,
    #[arg(long)]
    pub topic_b: String,
    #[arg(long, value_enum)]
    pub source: SourceArg,
    /// Replay corpus (JSONL); defaults to the bundled corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub stylesheet: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: String,
    /// Run the replay to completion and write the event log instead of serving.
    #[arg(long, requires = "out")]
    pub headless: bool,
    #[arg(long, requires = "headless")]
    pub out: Option<PathBuf>,
    /// Milliseconds between pipeline ticks when serving.
    #[arg(long, default_value_t = 1000)]
    pub tick_ms: u64,
}

impl RunArgs {
    pub fn session_config(&self) -> SessionConfig {
        let source = match self.source {
            SourceArg::Replay => SourceSpec::Replay {
                corpus: self.corpus.clone(),
            },
            SourceArg::Live => SourceSpec::Live,
        };
        let mut config = SessionConfig::new(&self.topic_a, &self.topic_b, source, self.seed);
        config.lexicon = self.lexicon.clone();
        config.stylesheet = self.stylesheet.clone();
        config.tick_interval = Duration::from_millis(self.tick_ms);
        config
    }
}

/// The `analyze` output document.
#[derive(Debug, Serialize)]
pub struct Analysis {
    pub status: &'static str,
    pub language: &'static str,
    #[serde(rename = "docEmotions")]
    pub doc_emotions: EmotionScores,
    #[serde(rename = "finalEmotion")]
    pub final_emotion: EmotionLabel,
}

impl Analysis {
    pub fn of(text: &str, lexicon: &Lexicon) -> Self {
        let scores = score_text(text, lexicon);
        Self {
            status: "OK",
            language: "english",
            doc_emotions: scores,
            final_emotion: scores.final_emotion(),
        }
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => analyze(&args),
        Command::Run(args) if args.headless => run_headless(&args),
        Command::Run(args) => serve(&args),
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("plexus: {message}");
    ExitCode::from(code)
}

fn analyze(args: &AnalyzeArgs) -> ExitCode {
    let lexicon = match &args.lexicon {
        Some(path) => match Lexicon::load(path) {
            Ok(lexicon) => lexicon,
            Err(e) => return fail(EXIT_CONFIG, e),
        },
        None => Lexicon::bundled(),
    };
    match serde_json::to_string(&Analysis::of(&args.text, &lexicon)) {
        Ok(json) => {
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(1, e),
    }
}

fn startup_code(e: &SessionError) -> u8 {
    match e {
        SessionError::Graph(_) | SessionError::Layout(_) => 1,
        _ => EXIT_CONFIG,
    }
}

fn run_headless(args: &RunArgs) -> ExitCode {
    if args.source != SourceArg::Replay {
        return fail(EXIT_CONFIG, SessionError::HeadlessNeedsReplay);
    }
    let Some(out) = &args.out else {
        return fail(EXIT_CONFIG, "--headless needs --out");
    };
    let mut session = match Session::create("s1", args.session_config()) {
        Ok(session) => session,
        Err(e) => return fail(startup_code(&e), e),
    };
    let summary = match session.run_to_completion() {
        Ok(summary) => summary,
        Err(e) => return fail(1, e),
    };
    let written = File::create(out).and_then(|file| write_event_log(BufWriter::new(file), session.log()));
    if let Err(e) = written {
        return fail(1, format!("cannot write {}: {e}", out.display()));
    }
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    let printed = serde_json::to_writer_pretty(&mut stdout, &summary)
        .map_err(io::Error::from)
        .and_then(|()| writeln!(stdout));
    match printed {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(1, e),
    }
}

fn serve(args: &RunArgs) -> ExitCode {
    let addr: SocketAddr = match args.listen.parse() {
        Ok(addr) => addr,
        Err(e) => return fail(EXIT_CONFIG, format!("invalid --listen address `{}`: {e}", args.listen)),
    };
    let state = Arc::new(AppState::new(Credentials::from_env()));
    let id = match state.create_session(args.session_config()) {
        Ok(id) => id,
        Err(e) => return fail(startup_code(&e), e),
    };

    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(runtime) => runtime,
        Err(e) => return fail(1, e),
    };
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(listener) => listener,
            Err(e) => return fail(EXIT_BIND, format!("cannot listen on {addr}: {e}")),
        };
        let local = listener.local_addr().unwrap_or(addr);
        println!("session {id} listening on http://{local}");
        let _ = io::stdout().flush();

        let app = router(state.clone());
        let served = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await;
        state.shutdown();
        match served {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(1, e),
        }
    })
}
