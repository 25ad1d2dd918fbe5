//! One function per subcommand.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use revnets::analysis::{classify_transitions, dependence, find_cycles, is_trans_acyclic, TransitionClass};
use revnets::dot::cpn_dot;
use revnets::explore::{
    check_lockstep, check_reversal_roundtrips, explore_rpn, find_stuck_states, random_roundtrips,
    rpn_lts_dot, Divergence, ExploreError, LockstepReport, RoundtripReport, StuckState, DEFAULT_MAX_STATES,
};
use revnets::fixtures;
use revnets::forward::FireError;
use revnets::net::{validate_well_formed, NetDef, State};
use revnets::reversing::{fire_move, parse_moves, DependenceKind, DependenceRelation, Semantics};
use revnets::translate::{translate_with, CoGuard, TranslateError};
use serde::{Deserialize, Serialize};

use crate::document::{self, CpnDocument, DocError, NetDocument};
use crate::{CliError, Command, Exit, Theorem, MAX_STATES_ENV};

/// A document together with the net it describes.
pub struct Loaded {
    pub doc: NetDocument,
    pub net: NetDef,
    pub initial: State,
}

/// Problems that make a document unusable for execution, one per line.
pub fn document_problems(net: &NetDef, marking: &revnets::net::Marking) -> Vec<String> {
    let mut out: Vec<String> = validate_well_formed(net)
        .iter()
        .map(ToString::to_string)
        .collect();
    if let Err(e) = net.check_initial_marking(marking) {
        out.push(format!("initial marking: {e}"));
    }
    out
}

/// Loads a document and insists that it is well-formed with a proper
/// initial marking.
pub fn load_valid(source: &str) -> Result<Loaded, CliError> {
    let doc = document::load(source)?;
    let (net, marking) = doc.to_net()?;
    let problems = document_problems(&net, &marking);
    if !problems.is_empty() {
        return Err(CliError::Failed(format!(
            "{source} is not a valid net (see `revnets validate`):\n  {}",
            problems.join("\n  ")
        )));
    }
    let initial = State::initial(&net, marking);
    Ok(Loaded { doc, net, initial })
}

fn relation(loaded: &Loaded, kind: DependenceKind) -> Result<DependenceRelation, CliError> {
    dependence(&loaded.net, &loaded.initial, kind).map_err(|e| CliError::Failed(e.to_string()))
}

/// The exploration cap: flag, then environment, then the default.
pub fn max_states(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(MAX_STATES_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{MAX_STATES_ENV}={v:?} is not a number"))),
        Err(_) => Ok(DEFAULT_MAX_STATES),
    }
}

fn explore_error(e: ExploreError) -> CliError {
    match e {
        ExploreError::CapExceeded { .. } => CliError::Cap(e.to_string()),
        ExploreError::Step { .. } => CliError::Failed(e.to_string()),
    }
}

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<Exit, CliError> {
    match command {
        Command::Validate { source } => validate(&source, out),
        Command::Run {
            source,
            opts,
            moves,
            trace,
        } => {
            let moves = match (moves, trace) {
                (Some(m), _) => MovesArg::Inline(m),
                (None, Some(t)) => MovesArg::Named(t),
                (None, None) => return Err(CliError::Input("either --moves or --trace is required".into())),
            };
            run(&source, opts.semantics.into(), opts.dep.into(), &moves, out)
        }
        Command::Repl { source, opts } => {
            let loaded = load_valid(&source)?;
            let dep = relation(&loaded, opts.dep.into())?;
            let stdin = std::io::stdin();
            crate::repl::repl(
                &loaded.net,
                &loaded.initial,
                opts.semantics.into(),
                &dep,
                stdin.lock(),
                out,
            )?;
            Ok(Exit::Pass)
        }
        Command::Analyze { source, json } => analyze(&source, json, out),
        Command::Translate {
            source,
            opts,
            co_guard,
            output,
            dot,
        } => translate(
            &source,
            opts.semantics.into(),
            opts.dep.into(),
            co_guard.into(),
            output.as_deref(),
            dot.as_deref(),
            out,
        ),
        Command::Check {
            source,
            opts,
            theorem,
            co_guard,
            max_len,
            trials,
            seed,
            max_states: cap,
            lts_dot,
        } => {
            let settings = CheckSettings {
                semantics: opts.semantics.into(),
                dependence: opts.dep.into(),
                co_guard: co_guard.into(),
                max_len,
                trials,
                seed,
                cap: max_states(cap)?,
                lts_dot,
            };
            check(&source, theorem, &settings, out)
        }
        Command::Export { fixture, output } => export(&fixture, output.as_deref(), out),
        Command::Fixtures => {
            for f in fixtures::all() {
                let tag = if f.trans_acyclic {
                    "trans-acyclic"
                } else {
                    "not trans-acyclic"
                };
                writeln!(out, "{:<16} {tag}", f.name)?;
            }
            Ok(Exit::Pass)
        }
    }
}

pub fn validate(source: &str, out: &mut dyn Write) -> Result<Exit, CliError> {
    let doc = document::load(source)?;
    let (net, marking) = doc.to_net()?;
    let problems = document_problems(&net, &marking);
    for p in &problems {
        writeln!(out, "{p}")?;
    }
    if problems.is_empty() {
        writeln!(
            out,
            "ok: {} places, {} transitions, {} bases, {} bonds",
            net.place_count(),
            net.transition_count(),
            net.base_count(),
            net.bonds().len()
        )?;
        Ok(Exit::Pass)
    } else {
        Ok(Exit::Fail)
    }
}

/// The moves for `run`: given inline or by name from the document.
#[derive(Clone, Debug)]
pub enum MovesArg {
    Inline(String),
    Named(String),
}

pub fn run(
    source: &str,
    semantics: Semantics,
    kind: DependenceKind,
    moves: &MovesArg,
    out: &mut dyn Write,
) -> Result<Exit, CliError> {
    let loaded = load_valid(source)?;
    let net = &loaded.net;
    let text = match moves {
        MovesArg::Inline(m) => m,
        MovesArg::Named(name) => loaded
            .doc
            .traces
            .get(name)
            .ok_or_else(|| CliError::Input(format!("document has no trace named {name:?}")))?,
    };
    let moves = parse_moves(net, text).map_err(|e| CliError::Input(e.to_string()))?;
    let dep = relation(&loaded, kind)?;
    writeln!(out, "initial")?;
    writeln!(out, "{}", loaded.initial.display(net))?;
    let mut state = loaded.initial.clone();
    for (position, mv) in moves.iter().enumerate() {
        match fire_move(net, &state, *mv, semantics, &dep) {
            Ok(next) => state = next,
            Err(e) => {
                let e = FireError::AtPosition {
                    position,
                    label: mv.label(net),
                    source: Box::new(e),
                };
                return Err(CliError::Failed(e.to_string()));
            }
        }
        writeln!(out, "{}", mv.label(net))?;
        writeln!(out, "{}", state.display(net))?;
    }
    writeln!(out, "final: {}", state.canonical(net))?;
    Ok(Exit::Pass)
}

/// Machine-readable form of `analyze`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub trans_acyclic: bool,
    /// A cycle of transferring transitions, if any.
    pub witness: Option<String>,
    pub cycles: Vec<String>,
    pub transferring: Vec<String>,
    pub bond_creating: Vec<String>,
    /// Pairs per relation; absent when the relation could not be computed.
    pub dependence: BTreeMap<String, Option<Vec<[String; 2]>>>,
    pub notices: Vec<String>,
}

pub fn analysis_report(net: &NetDef, initial: &State) -> AnalysisReport {
    let classes = classify_transitions(net);
    let of_class = |c: TransitionClass| -> Vec<String> {
        classes
            .iter()
            .filter(|(_, k)| **k == c)
            .map(|(t, _)| net.transition_name(*t).to_string())
            .collect()
    };
    let witness = is_trans_acyclic(net).err().map(|c| c.text(net));
    let mut notices = Vec::new();
    let mut rels = BTreeMap::new();
    for kind in DependenceKind::ALL {
        let pairs = match dependence(net, initial, kind) {
            Ok(rel) => Some(rel.named_pairs(net).into_iter().map(|(a, b)| [a, b]).collect()),
            Err(e) => {
                notices.push(format!("{kind} dependence skipped: {e}"));
                None
            }
        };
        rels.insert(kind.as_str().to_string(), pairs);
    }
    AnalysisReport {
        trans_acyclic: witness.is_none(),
        witness,
        cycles: find_cycles(net).iter().map(|c| c.text(net)).collect(),
        transferring: of_class(TransitionClass::Transferring),
        bond_creating: of_class(TransitionClass::BondCreating),
        dependence: rels,
        notices,
    }
}

/// `{t1,t2} {t1,t3}`.
pub fn pairs_text(pairs: &[[String; 2]]) -> String {
    if pairs.is_empty() {
        return "(none)".into();
    }
    pairs
        .iter()
        .map(|[a, b]| format!("{{{a},{b}}}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn analyze(source: &str, json: bool, out: &mut dyn Write) -> Result<Exit, CliError> {
    let doc = document::load(source)?;
    let (net, marking) = doc.to_net()?;
    let report = analysis_report(&net, &State::initial(&net, marking));
    if json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        )?;
        return Ok(Exit::Pass);
    }
    writeln!(
        out,
        "trans-acyclic: {}; cycles: {}; transferring: {}",
        if report.trans_acyclic { "yes" } else { "NO" },
        report.cycles.len(),
        report.transferring.join(",")
    )?;
    if let Some(w) = &report.witness {
        writeln!(out, "witness: {w}")?;
    }
    let bond_creating = if report.bond_creating.is_empty() {
        "(none)".to_string()
    } else {
        report.bond_creating.join(",")
    };
    writeln!(out, "bond-creating: {bond_creating}")?;
    for c in &report.cycles {
        writeln!(out, "cycle: {c}")?;
    }
    for kind in DependenceKind::ALL {
        if let Some(Some(pairs)) = report.dependence.get(kind.as_str()) {
            writeln!(out, "dependence {kind}: {}", pairs_text(pairs))?;
        }
    }
    for n in &report.notices {
        writeln!(out, "notice: {n}")?;
    }
    Ok(Exit::Pass)
}

fn translate_error(e: TranslateError) -> CliError {
    CliError::Failed(e.to_string())
}

/// Translates a loaded net with the given options.
pub fn translation_document(
    loaded: &Loaded,
    semantics: Semantics,
    kind: DependenceKind,
    co_guard: CoGuard,
) -> Result<CpnDocument, CliError> {
    if let Err(c) = is_trans_acyclic(&loaded.net) {
        return Err(translate_error(TranslateError::NotTransAcyclic(
            c.text(&loaded.net),
        )));
    }
    let dep = relation(loaded, kind)?;
    let tr =
        translate_with(&loaded.net, &loaded.initial, semantics, &dep, co_guard).map_err(translate_error)?;
    Ok(CpnDocument::new(&loaded.doc, tr)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn translate(
    source: &str,
    semantics: Semantics,
    kind: DependenceKind,
    co_guard: CoGuard,
    output: Option<&Path>,
    dot: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Exit, CliError> {
    let loaded = load_valid(source)?;
    let doc = translation_document(&loaded, semantics, kind, co_guard)?;
    if let Some(path) = dot {
        write_file(path, &cpn_dot(&doc.cpn))?;
    }
    match output {
        Some(path) => {
            write_file(path, &doc.to_json())?;
            writeln!(
                out,
                "wrote {}: {} places, {} transitions, {} arcs",
                path.display(),
                doc.cpn.places.len(),
                doc.cpn.transitions.len(),
                doc.cpn.arcs.len()
            )?;
        }
        None => write!(out, "{}", doc.to_json())?,
    }
    Ok(Exit::Pass)
}

/// Options of `check`.
#[derive(Clone, Debug)]
pub struct CheckSettings {
    pub semantics: Semantics,
    pub dependence: DependenceKind,
    pub co_guard: CoGuard,
    pub max_len: usize,
    pub trials: usize,
    pub seed: u64,
    pub cap: usize,
    pub lts_dot: Option<std::path::PathBuf>,
}

impl CheckSettings {
    pub fn new(semantics: Semantics, dependence: DependenceKind) -> CheckSettings {
        CheckSettings {
            semantics,
            dependence,
            co_guard: CoGuard::default(),
            max_len: 6,
            trials: 0,
            seed: 0,
            cap: DEFAULT_MAX_STATES,
            lts_dot: None,
        }
    }
}

fn write_divergence(out: &mut dyn Write, d: &Divergence) -> std::io::Result<()> {
    writeln!(out, "counterexample: {}", d.trace.join(" "))?;
    writeln!(out, "state: {}", d.state)?;
    writeln!(out, "reason: {}", d.reason)
}

fn write_lockstep(out: &mut dyn Write, r: &LockstepReport) -> std::io::Result<()> {
    writeln!(
        out,
        "rpn states: {}; cpn states: {}; steps checked: {}",
        r.rpn_states, r.cpn_states, r.steps_checked
    )?;
    if let Some(d) = &r.divergence {
        write_divergence(out, d)?;
    } else if r.rpn_states != r.cpn_states {
        writeln!(out, "state counts differ")?;
    }
    Ok(())
}

fn write_roundtrip(out: &mut dyn Write, what: &str, r: &RoundtripReport) -> std::io::Result<()> {
    let seed = r.seed.map(|s| format!(" (seed {s})")).unwrap_or_default();
    writeln!(
        out,
        "{what}{seed}: {} sequences, {} balanced",
        r.sequences, r.balanced
    )?;
    if let Some(d) = &r.counterexample {
        write_divergence(out, d)?;
    }
    Ok(())
}

fn write_stuck(out: &mut dyn Write, stuck: &[StuckState]) -> std::io::Result<()> {
    writeln!(out, "stuck states: {}", stuck.len())?;
    for s in stuck {
        writeln!(out, "trace: {}", s.trace)?;
        writeln!(out, "  state: {}", s.state)?;
    }
    Ok(())
}

pub fn check(
    source: &str,
    theorem: Theorem,
    settings: &CheckSettings,
    out: &mut dyn Write,
) -> Result<Exit, CliError> {
    let loaded = load_valid(source)?;
    let (net, s0) = (&loaded.net, &loaded.initial);
    let dep = relation(&loaded, settings.dependence)?;
    if let Some(path) = &settings.lts_dot {
        let lts = explore_rpn(net, s0, settings.semantics, &dep, settings.cap).map_err(explore_error)?;
        write_file(path, &rpn_lts_dot(net, &lts))?;
    }
    let passed = match theorem {
        Theorem::Lockstep => {
            let tr = translation_document(
                &loaded,
                settings.semantics,
                settings.dependence,
                settings.co_guard,
            )?;
            let translation = revnets::translate::Translation {
                cpn: tr.cpn,
                layout: tr.layout,
            };
            let report = check_lockstep(net, s0, &translation, settings.semantics, &dep, settings.cap)
                .map_err(explore_error)?;
            write_lockstep(out, &report)?;
            report.passed()
        }
        Theorem::Roundtrip => {
            let report = check_reversal_roundtrips(net, s0, settings.semantics, &dep, settings.max_len);
            write_roundtrip(
                out,
                &format!("exhaustive up to length {}", settings.max_len),
                &report,
            )?;
            let mut ok = report.passed();
            if ok && settings.trials > 0 {
                let walks = random_roundtrips(
                    net,
                    s0,
                    settings.semantics,
                    &dep,
                    settings.trials,
                    settings.max_len,
                    settings.seed,
                );
                write_roundtrip(out, &format!("{} random walks", settings.trials), &walks)?;
                ok = walks.passed();
            }
            ok
        }
        Theorem::Stuck => {
            if settings.semantics != Semantics::Causal {
                writeln!(out, "note: stuck states are searched under causal reversing")?;
            }
            let stuck = find_stuck_states(net, s0, &dep, settings.cap).map_err(explore_error)?;
            write_stuck(out, &stuck)?;
            stuck.is_empty()
        }
    };
    writeln!(out, "{}", if passed { "PASS" } else { "FAIL" })?;
    Ok(if passed { Exit::Pass } else { Exit::Fail })
}

pub fn export(fixture: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<Exit, CliError> {
    let doc = NetDocument::from_fixture(fixture)
        .ok_or_else(|| CliError::Doc(DocError::NotFound(fixture.to_string())))?;
    match output {
        Some(path) => write_file(path, &doc.to_json())?,
        None => write!(out, "{}", doc.to_json())?,
    }
    Ok(Exit::Pass)
}
