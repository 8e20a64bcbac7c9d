//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;
#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use oracle::{oracle_score, oracle_tokens, random_text, OracleLexicon};
use plexus::server::AppState;
use plexus_core::emotion::EmotionLabel;
use plexus_core::graph::{EventPayload, GraphEvent, GraphNode, GraphSnapshot, NodeKind, TOTAL_COUNT};
use plexus_core::layout::{LayoutParams, LayoutState};
use plexus_core::session::{read_event_log, SessionStatus, SourceSpec};
use plexus_core::style::{parse_stylesheet, print_stylesheet, resolve_style, ComputedStyle, Element, StyleErrorKind};
use plexus_core::{final_emotion, score_text, tokenize, EmotionScores, Lexicon, Session, SessionConfig, WireEvent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

const SEED: u64 = 42;
const RUNTIME_LIMIT: Duration = Duration::from_secs(10);
const PAIR_TOLERANCE: f64 = 1e-3;
const PAIR_MAX_ITERS: usize = 500;
const FULL_MAX_ITERS: usize = 2000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(condition: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message())
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn bundled_config() -> SessionConfig {
    SessionConfig::new("iPhone 7", "Samsung S7", SourceSpec::Replay { corpus: None }, SEED)
}

fn graph_events(log: &[WireEvent]) -> Vec<GraphEvent> {
    log.iter().map(WireEvent::graph_event).collect()
}

fn fold(log: &[WireEvent]) -> Result<GraphSnapshot, String> {
    GraphSnapshot::fold(graph_events(log).iter()).map_err(|e| e.to_string())
}

fn figure_one_argmax() -> Outcome {
    let scores = EmotionScores::from_array([0.010794, 0.001457, 0.005759, 0.734579, 0.32045]);
    let label = final_emotion(&scores);
    ensure(label == EmotionLabel::Joy, || format!("got {label:?}"))?;
    Ok("joy".into())
}

fn scorer_oracle() -> Outcome {
    let source = fs::read_to_string(fixtures().join("toy.lex")).map_err(|e| e.to_string())?;
    let lexicon = Lexicon::parse(&source).map_err(|e| e.to_string())?;
    let oracle = OracleLexicon::from_source(&source);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..1000 {
        let text = random_text(&mut rng, &oracle);
        ensure(tokenize(&text) == oracle_tokens(&text), || {
            format!("tokens differ for {text:?}")
        })?;
        let got = score_text(&text, &lexicon).to_array();
        let want = oracle_score(&text, &oracle);
        ensure(got.map(f64::to_bits) == want.map(f64::to_bits), || {
            format!("{text:?}: {got:?} vs oracle {want:?}")
        })?;
        ensure(got.iter().all(|v| (0.0..=1.0).contains(v)), || {
            format!("{text:?} out of range: {got:?}")
        })?;

        // Monotonicity: an extra unnegated match never lowers any emotion,
        // and raises its own.
        for (word, emotion) in [("love", 3), ("hate", 0)] {
            let extended = format!("{text} pad pad {word}");
            let after = score_text(&extended, &lexicon).to_array();
            ensure(after.iter().zip(&got).all(|(a, b)| a >= b), || {
                format!("{extended:?} lowered a score")
            })?;
            ensure(after[emotion] > got[emotion] || got[emotion] == 1.0, || {
                format!("{extended:?} did not raise emotion {emotion}")
            })?;
        }
        // Negating every match zeroes the score.
        let negated: Vec<String> = tokenize(&text).iter().map(|t| format!("never {t}")).collect();
        let negated = negated.join(" ");
        ensure(score_text(&negated, &lexicon).is_all_zero(), || {
            format!("{negated:?} not zero")
        })?;
    }
    Ok("1000 texts bit-exact, bounded, monotone".into())
}

fn run_binary(out: &Path) -> Result<Duration, String> {
    let started = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_plexus"))
        .args([
            "run",
            "--topic-a",
            "iPhone 7",
            "--topic-b",
            "Samsung S7",
            "--source",
            "replay",
        ])
        .args(["--seed", &SEED.to_string(), "--headless", "--out"])
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(status.success(), || format!("headless run exited with {status}"))?;
    Ok(elapsed)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (first, second) = (dir.path().join("first.jsonl"), dir.path().join("second.jsonl"));
    let t1 = run_binary(&first)?;
    let t2 = run_binary(&second)?;
    let a = fs::read(&first).map_err(|e| e.to_string())?;
    let b = fs::read(&second).map_err(|e| e.to_string())?;
    ensure(!a.is_empty() && a == b, || "event logs differ".into())?;
    ensure(t1 < RUNTIME_LIMIT && t2 < RUNTIME_LIMIT, || {
        format!("runtimes {t1:?}, {t2:?}")
    })?;

    let text = String::from_utf8(a).map_err(|e| e.to_string())?;
    let log = read_event_log(&text).map_err(|e| e.to_string())?;
    let mut session = Session::create("s1", bundled_config()).map_err(|e| e.to_string())?;
    session.run_to_completion().map_err(|e| e.to_string())?;
    ensure(log == session.log(), || "binary log differs from library log".into())?;
    Ok(format!("{} events, {:.2?} and {:.2?}", log.len(), t1, t2))
}

fn topology() -> Outcome {
    let mut session = Session::create("s1", bundled_config()).map_err(|e| e.to_string())?;
    session.run_to_completion().map_err(|e| e.to_string())?;
    let snapshot = fold(session.log())?;
    let leaves: Vec<_> = snapshot.nodes_of_kind(NodeKind::Tweet).collect();
    ensure(snapshot.nodes.len() == 12 + leaves.len(), || {
        format!("{} nodes for {} leaves", snapshot.nodes.len(), leaves.len())
    })?;

    let mut live: HashMap<String, u64> = HashMap::new();
    for leaf in &leaves {
        let edges: Vec<_> = snapshot.incident_edges(&leaf.id).collect();
        ensure(edges.len() == 1, || format!("{} has {} edges", leaf.id, edges.len()))?;
        let hub = if edges[0].from == leaf.id {
            &edges[0].to
        } else {
            &edges[0].from
        };
        let same_topic = hub.starts_with(&format!("{}:", &leaf.id[2..3]));
        let is_hub = snapshot.nodes.get(hub).is_some_and(|n| n.kind == NodeKind::Emotion);
        ensure(same_topic && is_hub, || format!("{} attached to {hub}", leaf.id))?;
        *live.entry(hub.clone()).or_default() += 1;
    }

    let mut parent: HashMap<String, String> = HashMap::new();
    let mut evicted: HashMap<String, u64> = HashMap::new();
    for event in session.log() {
        match &event.event {
            EventPayload::EdgeAdded { from, to, .. } if from.starts_with("t:") => {
                parent.insert(from.clone(), to.clone());
            }
            EventPayload::NodeRemoved { id } => {
                let hub = parent
                    .get(id)
                    .ok_or_else(|| format!("removed {id} was never attached"))?;
                *evicted.entry(hub.clone()).or_default() += 1;
            }
            _ => {}
        }
    }
    let mut hubs = 0;
    for hub in snapshot.nodes_of_kind(NodeKind::Emotion) {
        let total = hub.attrs.get(TOTAL_COUNT).and_then(|v| v.as_count());
        let l = live.get(&hub.id).copied().unwrap_or(0);
        let e = evicted.get(&hub.id).copied().unwrap_or(0);
        ensure(total == Some(l + e), || {
            format!("{}: total {total:?}, live {l}, evicted {e}", hub.id)
        })?;
        hubs += 1;
    }
    ensure(hubs == 10, || format!("{hubs} emotion hubs"))?;
    Ok(format!(
        "{} nodes, {} leaves, {} evicted",
        snapshot.nodes.len(),
        leaves.len(),
        evicted.values().sum::<u64>()
    ))
}

fn pair_graph() -> Result<GraphSnapshot, String> {
    let node = |seq, id: &str| GraphEvent {
        seq,
        event: EventPayload::NodeAdded {
            node: GraphNode {
                id: id.into(),
                kind: NodeKind::Emotion,
                label: id.into(),
                classes: vec![],
                attrs: Default::default(),
            },
        },
    };
    let edge = GraphEvent {
        seq: 2,
        event: EventPayload::EdgeAdded {
            id: "e:b".into(),
            from: "a".into(),
            to: "b".into(),
        },
    };
    GraphSnapshot::fold([node(0, "a"), node(1, "b"), edge].iter()).map_err(|e| e.to_string())
}

fn layout() -> Outcome {
    let pair = pair_graph()?;
    let params = LayoutParams {
        epsilon: 0.01,
        max_iters: PAIR_MAX_ITERS,
        ..LayoutParams::with_side(1000.0, SEED)
    };
    let k = params.ideal_length(2);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut state = LayoutState::new(&params).map_err(|e| e.to_string())?;
        for id in ["a", "b"] {
            let (x, y) = (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0));
            state.place_at(id, x, y).map_err(|e| e.to_string())?;
        }
        let iterations = state.run_until_stable(&pair, &params).map_err(|e| e.to_string())?;
        let (a, b) = (state.position("a").unwrap(), state.position("b").unwrap());
        let error = ((a.0 - b.0).hypot(a.1 - b.1) - k).abs() / k;
        ensure(error <= PAIR_TOLERANCE && iterations <= PAIR_MAX_ITERS, || {
            format!("pair error {error:.2e} after {iterations} iterations")
        })?;
        worst = worst.max(error);
    }

    let mut session = Session::create("s1", bundled_config()).map_err(|e| e.to_string())?;
    let eps = session.config().layout.epsilon;
    let mut coordinates = 0usize;
    loop {
        let status = session.status();
        for (id, &(x, y)) in session.layout().positions() {
            ensure(x.is_finite() && y.is_finite(), || format!("{id} at ({x}, {y})"))?;
            coordinates += 1;
        }
        if status == SessionStatus::Stable {
            break;
        }
        ensure(status != SessionStatus::Failed, || "session failed".into())?;
        session.tick().map_err(|e| e.to_string())?;
    }
    for event in session.log() {
        if let EventPayload::Positions { positions } = &event.event {
            ensure(positions.values().all(|p| p.x.is_finite() && p.y.is_finite()), || {
                format!("non-finite position at seq {}", event.seq)
            })?;
        }
    }
    let summary = session.summary();
    ensure(
        summary.layout_steps <= FULL_MAX_ITERS && summary.last_displacement < eps,
        || {
            format!(
                "{} steps, last displacement {}",
                summary.layout_steps, summary.last_displacement
            )
        },
    )?;
    Ok(format!(
        "pair worst error {worst:.1e}; corpus stable after {} steps (max move {:.3} < {eps}); {coordinates} finite coordinates",
        summary.layout_steps, summary.last_displacement
    ))
}

fn css_files(kind: &str) -> Result<Vec<PathBuf>, String> {
    let mut files: Vec<PathBuf> = fs::read_dir(fixtures().join("style").join(kind))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "css"))
        .collect();
    files.sort();
    Ok(files)
}

fn kind_code(kind: &StyleErrorKind) -> &'static str {
    match kind {
        StyleErrorKind::Syntax { .. } => "syntax",
        StyleErrorKind::UnknownProperty(_) => "unknown-property",
        StyleErrorKind::InvalidValue { .. } => "invalid-value",
        StyleErrorKind::PropertyNotAllowed { .. } => "property-not-allowed",
        StyleErrorKind::UnknownElement(_) => "unknown-element",
        StyleErrorKind::UnknownPseudo(_) => "unknown-pseudo",
        StyleErrorKind::InvalidClass(_) => "invalid-class",
        StyleErrorKind::UnterminatedComment => "unterminated-comment",
    }
}

#[derive(Deserialize)]
struct CascadeCase {
    name: String,
    stylesheet: String,
    element: String,
    classes: Vec<String>,
    clicked: bool,
    expected: ComputedStyle,
}

#[derive(Deserialize)]
struct CascadeTable {
    cases: Vec<CascadeCase>,
}

fn stylesheets() -> Outcome {
    let valid = css_files("valid")?;
    ensure(valid.len() == 20, || format!("{} valid stylesheets", valid.len()))?;
    for path in &valid {
        let name = path.display();
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let expected: Option<usize> = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("/* expect: ok rules="))
            .and_then(|l| l.strip_suffix(" */"))
            .and_then(|n| n.parse().ok());
        let rules = parse_stylesheet(&text).map_err(|e| format!("{name}: {e}"))?;
        ensure(Some(rules.len()) == expected, || {
            format!("{name}: {} rules", rules.len())
        })?;
        let printed = print_stylesheet(&rules);
        let reparsed = parse_stylesheet(&printed).map_err(|e| format!("{name} reprint: {e}"))?;
        ensure(reparsed == rules && print_stylesheet(&reparsed) == printed, || {
            format!("{name} does not round-trip")
        })?;
    }

    let malformed = css_files("malformed")?;
    ensure(malformed.len() == 10, || {
        format!("{} malformed stylesheets", malformed.len())
    })?;
    for path in &malformed {
        let name = path.display();
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let annotation = fs::read_to_string(path.with_extension("expect")).map_err(|e| e.to_string())?;
        let err = match parse_stylesheet(&text) {
            Ok(_) => return Err(format!("{name} was accepted")),
            Err(err) => err,
        };
        let got = format!("{}:{} {}", err.line, err.column, kind_code(&err.kind));
        ensure(got == annotation.trim(), || {
            format!("{name}: got {got}, expected {}", annotation.trim())
        })?;
    }

    let table = fs::read_to_string(fixtures().join("style/cascade.json")).map_err(|e| e.to_string())?;
    let table: CascadeTable = serde_json::from_str(&table).map_err(|e| e.to_string())?;
    ensure(table.cases.len() == 30, || {
        format!("{} cascade cases", table.cases.len())
    })?;
    for case in &table.cases {
        let rules = parse_stylesheet(&case.stylesheet).map_err(|e| format!("{}: {e}", case.name))?;
        let element: Element = case
            .element
            .parse()
            .map_err(|_| format!("{}: bad element", case.name))?;
        let got = resolve_style(&rules, element, &case.classes, case.clicked);
        ensure(got == case.expected, || format!("{}: {got:?}", case.name))?;
    }
    Ok("20 valid, 10 malformed, 30 cascade cases".into())
}

fn event_sourcing() -> Outcome {
    let mut session = Session::create("s1", bundled_config()).map_err(|e| e.to_string())?;
    let mut checkpoints: BTreeMap<u64, GraphSnapshot> = BTreeMap::new();
    checkpoints.insert(session.log().len() as u64 - 1, session.snapshot().clone());
    while session.status() != SessionStatus::Stable {
        ensure(session.status() != SessionStatus::Failed, || "session failed".into())?;
        if !session.tick().map_err(|e| e.to_string())?.is_empty() {
            checkpoints.insert(session.log().len() as u64 - 1, session.snapshot().clone());
        }
    }
    ensure(&fold(session.log())? == session.snapshot(), || {
        "full fold differs".into()
    })?;
    let seqs: Vec<u64> = checkpoints.keys().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..10 {
        let seq = seqs[rng.random_range(0..seqs.len())];
        let prefix = fold(&session.log()[..=seq as usize])?;
        ensure(prefix == checkpoints[&seq], || format!("prefix to seq {seq} differs"))?;
    }

    // The same identity against a served session, over the wire.
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let (frames, served) = runtime.block_on(async {
        let addr = common::spawn_server(Arc::new(AppState::new(None))).await;
        let body = format!(r#"{{"topic_a":"iPhone 7","topic_b":"Samsung S7","seed":{SEED},"tick_ms":1}}"#);
        let id = common::create_session(addr, &body).await;
        let frames = common::collect_frames(addr, &id).await;
        let (_, served) = common::get(addr, &format!("/api/sessions/{id}/snapshot")).await;
        (frames, served)
    });
    let streamed = fold(&common::parse_frames(&frames))?;
    let served: GraphSnapshot = serde_json::from_str(&served).map_err(|e| e.to_string())?;
    ensure(
        served.nodes == streamed.nodes
            && served.edges == streamed.edges
            && served.positions == streamed.positions
            && served.last_seq == streamed.last_seq,
        || "served snapshot differs from folded stream".into(),
    )?;
    Ok(format!("{} events, 10 prefixes, served snapshot", session.log().len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("figure-1-argmax", figure_one_argmax),
        ("scorer-oracle", scorer_oracle),
        ("determinism", determinism),
        ("topology-arithmetic", topology),
        ("layout", layout),
        ("stylesheet", stylesheets),
        ("event-sourcing-identity", event_sourcing),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
