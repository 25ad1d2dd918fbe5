//! State-space exploration and the checks built on it.
//!
//! Exploration is breadth-first. Successors of a whole frontier level are
//! computed in parallel; new states are then numbered sequentially in
//! frontier order, so the result does not depend on scheduling.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cpn::{binding_text, Binding, CpnMarking, CpnNet};
use crate::net::{NetDef, State};
use crate::reversing::{
    enabled_moves, fire_move, trace_text, DependenceRelation, Direction, Move, Semantics,
};
use crate::translate::{check_correspondence, Translation};

/// Default cap on explored states.
pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExploreError {
    #[error("state cap of {cap} exceeded ({states} states discovered, frontier of {frontier})")]
    CapExceeded {
        cap: usize,
        states: usize,
        frontier: usize,
    },
    #[error("step from state {state} failed: {message}")]
    Step { state: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge<L> {
    pub from: usize,
    pub label: L,
    pub to: usize,
}

/// A labelled transition system. State 0 is the initial state; states are
/// numbered in breadth-first discovery order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts<S, L> {
    pub states: Vec<S>,
    pub edges: Vec<Edge<L>>,
}

impl<S, L> Lts<S, L> {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = &Edge<L>> {
        self.edges.iter().filter(move |e| e.from == s)
    }

    /// One shortest path of edges from the initial state to every state.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.states.len()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.from].push(k);
        }
        let mut parent = vec![None; self.states.len()];
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([0]);
        if !self.states.is_empty() {
            seen[0] = true;
        }
        while let Some(s) = queue.pop_front() {
            for &k in &adj[s] {
                let to = self.edges[k].to;
                if !seen[to] {
                    seen[to] = true;
                    parent[to] = Some(k);
                    queue.push_back(to);
                }
            }
        }
        parent
    }

    /// Labels along a shortest path to `target`.
    pub fn path_to(&self, target: usize) -> Vec<&L> {
        let parent = self.parents();
        let mut out = Vec::new();
        let mut s = target;
        while let Some(k) = parent[s] {
            out.push(&self.edges[k].label);
            s = self.edges[k].from;
        }
        out.reverse();
        out
    }

    /// Sha-256 over the rendered states and edges, in order.
    pub fn digest(&self, state: impl Fn(&S) -> String, label: impl Fn(&L) -> String) -> String {
        let mut h = Sha256::new();
        for s in &self.states {
            h.update(state(s).as_bytes());
            h.update(b"\n");
        }
        for e in &self.edges {
            h.update(format!("{} {} {}\n", e.from, label(&e.label), e.to).as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Graphviz rendering; nodes are named by a short digest of their state.
    pub fn to_dot(&self, state: impl Fn(&S) -> String, label: impl Fn(&L) -> String) -> String {
        let mut out =
            String::from("digraph lts {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, s) in self.states.iter().enumerate() {
            let text = state(s);
            let d = &digest_text(&text)[..12];
            let shape = if i == 0 { ", peripheries=2" } else { "" };
            let _ = writeln!(
                out,
                "  s{i} [label=\"{d}\", tooltip=\"{}\"{shape}];",
                escape(&text)
            );
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  s{} -> s{} [label=\"{}\"];",
                e.from,
                e.to,
                escape(&label(&e.label))
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// Hex sha-256 of a string.
pub fn digest_text(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Hex sha-256 of a state's canonical text.
pub fn state_digest(net: &NetDef, state: &State) -> String {
    digest_text(&state.canonical(net))
}

/// Breadth-first exploration from `initial` with a per-level parallel
/// successor computation.
pub fn explore<S, L, F>(initial: S, cap: usize, successors: F) -> Result<Lts<S, L>, ExploreError>
where
    S: Clone + Ord + Send + Sync,
    L: Send,
    F: Fn(&S) -> Result<Vec<(L, S)>, String> + Sync,
{
    let mut index: BTreeMap<S, usize> = BTreeMap::new();
    let mut lts = Lts {
        states: vec![initial.clone()],
        edges: Vec::new(),
    };
    index.insert(initial, 0);
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let results: Vec<Result<Vec<(L, S)>, String>> =
            frontier.par_iter().map(|&s| successors(&lts.states[s])).collect();
        let mut next = Vec::new();
        for (pos, (&from, result)) in frontier.iter().zip(results).enumerate() {
            let succ = result.map_err(|message| ExploreError::Step { state: from, message })?;
            for (label, target) in succ {
                let to = match index.get(&target) {
                    Some(&to) => to,
                    None => {
                        let to = lts.states.len();
                        if to >= cap {
                            return Err(ExploreError::CapExceeded {
                                cap,
                                states: to,
                                // Unexpanded states: the rest of this level and the next.
                                frontier: frontier.len() - pos + next.len(),
                            });
                        }
                        lts.states.push(target.clone());
                        index.insert(target, to);
                        next.push(to);
                        to
                    }
                };
                lts.edges.push(Edge { from, label, to });
            }
        }
        frontier = next;
    }
    Ok(lts)
}

pub type RpnLts = Lts<State, Move>;

/// The full reachable LTS of a reversing net over forward and reverse moves.
///
/// ```
/// use revnets::{analysis, explore, fixtures};
/// use revnets::reversing::Semantics;
///
/// let (net, s0) = fixtures::figure1();
/// let dep = analysis::structural_dependence(&net);
/// let lts = explore::explore_rpn(&net, &s0, Semantics::Backtracking, &dep, 1000).unwrap();
/// // t1 and t2 commute but leave different histories: 1 + 2 + 2 + 2 + 2.
/// assert_eq!(lts.state_count(), 9);
/// ```
pub fn explore_rpn(
    net: &NetDef,
    initial: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
    cap: usize,
) -> Result<RpnLts, ExploreError> {
    explore(initial.clone(), cap, |s| {
        enabled_moves(net, s, semantics, dep)
            .into_iter()
            .map(|mv| {
                fire_move(net, s, mv, semantics, dep)
                    .map(|next| (mv, next))
                    .map_err(|e| e.to_string())
            })
            .collect()
    })
}

/// A CPN step: the transition and the binding it fired under.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CpnStep {
    pub transition: String,
    pub binding: Binding,
}

impl CpnStep {
    /// Short digest of the binding text.
    pub fn binding_digest(&self) -> String {
        digest_text(&binding_text(&self.binding))[..12].to_string()
    }

    pub fn label(&self) -> String {
        format!("{}@{}", self.transition, self.binding_digest())
    }
}

pub type CpnLts = Lts<CpnMarking, CpnStep>;

fn cpn_successors(cpn: &CpnNet, m: &CpnMarking) -> Result<Vec<(CpnStep, CpnMarking)>, String> {
    let mut out = Vec::new();
    for t in cpn.transitions.keys() {
        for binding in cpn.enabled_bindings(m, t).map_err(|e| e.to_string())? {
            let next = cpn.fire(m, t, &binding).map_err(|e| e.to_string())?;
            out.push((
                CpnStep {
                    transition: t.clone(),
                    binding,
                },
                next,
            ));
        }
    }
    Ok(out)
}

/// The reachable LTS of a coloured net from its initial marking.
pub fn explore_cpn(cpn: &CpnNet, cap: usize) -> Result<CpnLts, ExploreError> {
    let m0 = cpn.initial_marking().map_err(|e| ExploreError::Step {
        state: 0,
        message: e.to_string(),
    })?;
    explore(m0, cap, |m| cpn_successors(cpn, m))
}

/// A move sequence with the digest of each state it passes through.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub moves: Vec<String>,
    pub digests: Vec<String>,
}

impl ExecutionTrace {
    pub fn record(
        net: &NetDef,
        initial: &State,
        moves: &[Move],
        semantics: Semantics,
        dep: &DependenceRelation,
    ) -> Result<(ExecutionTrace, State), crate::forward::FireError> {
        let mut s = initial.clone();
        let mut trace = ExecutionTrace {
            moves: Vec::new(),
            digests: Vec::new(),
        };
        for mv in moves {
            s = fire_move(net, &s, *mv, semantics, dep)?;
            trace.moves.push(mv.label(net));
            trace.digests.push(state_digest(net, &s));
        }
        Ok((trace, s))
    }

    /// Replays the trace and checks every digest.
    pub fn replays(
        &self,
        net: &NetDef,
        initial: &State,
        semantics: Semantics,
        dep: &DependenceRelation,
    ) -> bool {
        let Ok(moves) = crate::reversing::parse_moves(net, &self.moves.join(",")) else {
            return false;
        };
        match ExecutionTrace::record(net, initial, &moves, semantics, dep) {
            Ok((again, _)) => again == *self,
            Err(_) => false,
        }
    }
}

/// Where and why the two systems disagreed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// Moves from the initial state to the state where it was found.
    pub trace: Vec<String>,
    pub state: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockstepReport {
    pub rpn_states: usize,
    pub cpn_states: usize,
    /// Pairs of corresponding steps that were compared.
    pub steps_checked: usize,
    pub divergence: Option<Divergence>,
}

impl LockstepReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none() && self.rpn_states == self.cpn_states
    }
}

struct Node {
    state: State,
    marking: CpnMarking,
    parent: Option<(usize, Move)>,
}

enum Visit {
    Ok(Vec<(Move, State, CpnMarking)>, usize),
    Diverged(Vec<String>, String),
}

fn trace_of(net: &NetDef, nodes: &[Node], mut k: usize) -> Vec<String> {
    let mut out = Vec::new();
    while let Some((p, mv)) = nodes[k].parent {
        out.push(mv.label(net));
        k = p;
    }
    out.reverse();
    out
}

fn cpn_name_of(translation: &Translation, net: &NetDef, mv: Move) -> String {
    let t = net.transition_name(mv.transition);
    match mv.direction {
        Direction::Forward => t.to_string(),
        Direction::Reverse => translation.layout.reverses[t].clone(),
    }
}

fn visit(
    net: &NetDef,
    translation: &Translation,
    semantics: Semantics,
    dep: &DependenceRelation,
    node: &Node,
) -> Visit {
    let cpn = &translation.cpn;
    let moves = enabled_moves(net, &node.state, semantics, dep);
    let expected: BTreeSet<String> = moves
        .iter()
        .map(|mv| cpn_name_of(translation, net, *mv))
        .collect();
    let mut bindings: BTreeMap<&str, Vec<Binding>> = BTreeMap::new();
    for t in cpn.transitions.keys() {
        match cpn.enabled_bindings(&node.marking, t) {
            Ok(bs) if bs.is_empty() => {}
            Ok(bs) => {
                bindings.insert(t, bs);
            }
            Err(e) => return Visit::Diverged(Vec::new(), format!("evaluation error: {e}")),
        }
    }
    let actual: BTreeSet<String> = bindings.keys().map(|t| t.to_string()).collect();
    if expected != actual {
        let missing: Vec<&String> = expected.difference(&actual).collect();
        let extra: Vec<&String> = actual.difference(&expected).collect();
        return Visit::Diverged(
            Vec::new(),
            format!("enabled sets differ: only in the reversing net {missing:?}, only in the coloured net {extra:?}"),
        );
    }
    let mut out = Vec::new();
    let mut steps = 0;
    for mv in moves {
        let next = match fire_move(net, &node.state, mv, semantics, dep) {
            Ok(s) => s,
            Err(e) => return Visit::Diverged(Vec::new(), format!("{} failed: {e}", mv.label(net))),
        };
        let name = cpn_name_of(translation, net, mv);
        let mut image = None;
        for b in &bindings[name.as_str()] {
            steps += 1;
            let m = match cpn.fire(&node.marking, &name, b) {
                Ok(m) => m,
                Err(e) => {
                    return Visit::Diverged(
                        vec![mv.label(net)],
                        format!("{name} under {}: {e}", binding_text(b)),
                    )
                }
            };
            let report = check_correspondence(net, &translation.layout, &next, &m);
            if !report.holds {
                let places: Vec<&str> = report.diffs.iter().map(|d| d.place.as_str()).collect();
                return Visit::Diverged(
                    vec![mv.label(net)],
                    format!(
                        "{name} under {} breaks the correspondence at {places:?}{}",
                        binding_text(b),
                        report
                            .recovery_error
                            .map(|e| format!(" ({e})"))
                            .unwrap_or_default()
                    ),
                );
            }
            image = Some(m);
        }
        out.push((mv, next, image.expect("enabled transition has a binding")));
    }
    Visit::Ok(out, steps)
}

/// Explores the reversing net and the generated net side by side through
/// the state correspondence.
///
/// At every reachable state the enabled moves must map onto the coloured
/// transitions that have an enabled binding, and every such binding must
/// lead to the image of the reversing net's successor. Independently, both
/// systems are explored in full and their state counts compared.
pub fn check_lockstep(
    net: &NetDef,
    initial: &State,
    translation: &Translation,
    semantics: Semantics,
    dep: &DependenceRelation,
    cap: usize,
) -> Result<LockstepReport, ExploreError> {
    let initial_report = |reason: String| LockstepReport {
        rpn_states: 0,
        cpn_states: 0,
        steps_checked: 0,
        divergence: Some(Divergence {
            trace: Vec::new(),
            state: initial.canonical(net),
            reason,
        }),
    };
    let m0 = match translation.cpn.initial_marking() {
        Ok(m) => m,
        Err(e) => return Ok(initial_report(format!("initial marking: {e}"))),
    };
    let report = check_correspondence(net, &translation.layout, initial, &m0);
    if !report.holds {
        return Ok(initial_report(format!(
            "initial marking does not correspond: {:?}",
            report.diffs
        )));
    }

    let mut nodes = vec![Node {
        state: initial.clone(),
        marking: m0,
        parent: None,
    }];
    let mut index: BTreeMap<State, usize> = BTreeMap::from([(initial.clone(), 0)]);
    let mut frontier = vec![0usize];
    let mut steps_checked = 0;
    while !frontier.is_empty() {
        let visits: Vec<Visit> = frontier
            .par_iter()
            .map(|&k| visit(net, translation, semantics, dep, &nodes[k]))
            .collect();
        let mut next = Vec::new();
        for (pos, (&k, v)) in frontier.iter().zip(visits).enumerate() {
            match v {
                Visit::Diverged(tail, reason) => {
                    let mut trace = trace_of(net, &nodes, k);
                    trace.extend(tail);
                    return Ok(LockstepReport {
                        rpn_states: index.len(),
                        cpn_states: 0,
                        steps_checked,
                        divergence: Some(Divergence {
                            trace,
                            state: nodes[k].state.canonical(net),
                            reason,
                        }),
                    });
                }
                Visit::Ok(succ, steps) => {
                    steps_checked += steps;
                    for (mv, state, marking) in succ {
                        if index.contains_key(&state) {
                            continue;
                        }
                        if nodes.len() >= cap {
                            return Err(ExploreError::CapExceeded {
                                cap,
                                states: nodes.len(),
                                frontier: frontier.len() - pos + next.len(),
                            });
                        }
                        index.insert(state.clone(), nodes.len());
                        next.push(nodes.len());
                        nodes.push(Node {
                            state,
                            marking,
                            parent: Some((k, mv)),
                        });
                    }
                }
            }
        }
        frontier = next;
    }

    let rpn_states = nodes.len();
    let cpn_states = match explore_cpn(&translation.cpn, cap) {
        Ok(lts) => lts.state_count(),
        Err(ExploreError::Step { message, .. }) => {
            return Ok(LockstepReport {
                rpn_states,
                cpn_states: 0,
                steps_checked,
                divergence: Some(Divergence {
                    trace: Vec::new(),
                    state: initial.canonical(net),
                    reason: format!("coloured net exploration failed: {message}"),
                }),
            })
        }
        Err(e) => return Err(e),
    };
    let divergence = (rpn_states != cpn_states).then(|| Divergence {
        trace: Vec::new(),
        state: initial.canonical(net),
        reason: format!("reachable state counts differ: {rpn_states} vs {cpn_states}"),
    });
    Ok(LockstepReport {
        rpn_states,
        cpn_states,
        steps_checked,
        divergence,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundtripReport {
    /// Legal move sequences examined (every prefix counts).
    pub sequences: usize,
    /// Non-empty balanced sequences whose final state was compared.
    pub balanced: usize,
    /// Seed of the random walks, if any were used.
    pub seed: Option<u64>,
    pub counterexample: Option<Divergence>,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn is_balanced(counts: &BTreeMap<Move, usize>) -> bool {
    counts.iter().all(|(mv, n)| {
        let other = match mv.direction {
            Direction::Forward => Move::reverse(mv.transition),
            Direction::Reverse => Move::forward(mv.transition),
        };
        counts.get(&other).copied().unwrap_or(0) == *n
    })
}

struct Walk<'a> {
    net: &'a NetDef,
    initial: &'a State,
    semantics: Semantics,
    dep: &'a DependenceRelation,
    report: RoundtripReport,
    counts: BTreeMap<Move, usize>,
    path: Vec<Move>,
}

impl Walk<'_> {
    fn step(&mut self, s: &State, mv: Move) -> State {
        let next = fire_move(self.net, s, mv, self.semantics, self.dep).expect("enabled move fires");
        self.path.push(mv);
        *self.counts.entry(mv).or_default() += 1;
        self.report.sequences += 1;
        if is_balanced(&self.counts) {
            self.report.balanced += 1;
            if next != *self.initial && self.report.counterexample.is_none() {
                self.report.counterexample = Some(Divergence {
                    trace: self.path.iter().map(|m| m.label(self.net)).collect(),
                    state: next.canonical(self.net),
                    reason: "balanced sequence does not return to the initial state".into(),
                });
            }
        }
        next
    }

    fn undo(&mut self, mv: Move) {
        self.path.pop();
        *self.counts.get_mut(&mv).expect("counted") -= 1;
    }

    fn exhaust(&mut self, s: &State, budget: usize) {
        if budget == 0 || self.report.counterexample.is_some() {
            return;
        }
        for mv in enabled_moves(self.net, s, self.semantics, self.dep) {
            let next = self.step(s, mv);
            self.exhaust(&next, budget - 1);
            self.undo(mv);
        }
    }
}

/// Checks every legal move sequence of length at most `max_len`: whenever
/// each transition has been reversed as often as it was executed, the state
/// must be the initial one.
pub fn check_reversal_roundtrips(
    net: &NetDef,
    initial: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
    max_len: usize,
) -> RoundtripReport {
    let mut walk = Walk {
        net,
        initial,
        semantics,
        dep,
        report: RoundtripReport {
            sequences: 0,
            balanced: 0,
            seed: None,
            counterexample: None,
        },
        counts: BTreeMap::new(),
        path: Vec::new(),
    };
    walk.exhaust(initial, max_len);
    walk.report
}

/// Seeded random walks: `max_len` random moves, then random reverse moves
/// until the history is empty or nothing can be reversed.
pub fn random_roundtrips(
    net: &NetDef,
    initial: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> RoundtripReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walk = Walk {
        net,
        initial,
        semantics,
        dep,
        report: RoundtripReport {
            sequences: 0,
            balanced: 0,
            seed: Some(seed),
            counterexample: None,
        },
        counts: BTreeMap::new(),
        path: Vec::new(),
    };
    for _ in 0..trials {
        walk.counts.clear();
        walk.path.clear();
        let mut s = initial.clone();
        for _ in 0..max_len {
            let moves = enabled_moves(net, &s, semantics, dep);
            let Some(mv) = moves.choose(&mut rng) else { break };
            s = walk.step(&s, *mv);
        }
        while !s.history.is_empty() {
            let moves: Vec<Move> = enabled_moves(net, &s, semantics, dep)
                .into_iter()
                .filter(|m| m.direction == Direction::Reverse)
                .collect();
            let Some(mv) = moves.choose(&mut rng) else { break };
            s = walk.step(&s, *mv);
        }
        if walk.report.counterexample.is_some() {
            break;
        }
    }
    walk.report
}

/// A reachable state from which no sequence of reverse moves leads back to
/// the initial state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StuckState {
    pub trace: String,
    pub state: String,
}

/// Explores under causal reversing and reports every stuck state, in
/// breadth-first order, with a shortest trace reaching it.
pub fn find_stuck_states(
    net: &NetDef,
    initial: &State,
    dep: &DependenceRelation,
    cap: usize,
) -> Result<Vec<StuckState>, ExploreError> {
    let lts = explore_rpn(net, initial, Semantics::Causal, dep, cap)?;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); lts.state_count()];
    for e in &lts.edges {
        if e.label.direction == Direction::Reverse {
            preds[e.to].push(e.from);
        }
    }
    let mut back = vec![false; lts.state_count()];
    back[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !back[p] {
                back[p] = true;
                queue.push_back(p);
            }
        }
    }
    let parent = lts.parents();
    Ok((0..lts.state_count())
        .filter(|s| !back[*s])
        .map(|s| {
            let mut moves = Vec::new();
            let mut k = s;
            while let Some(e) = parent[k] {
                moves.push(lts.edges[e].label);
                k = lts.edges[e].from;
            }
            moves.reverse();
            StuckState {
                trace: trace_text(net, &moves),
                state: lts.states[s].canonical(net),
            }
        })
        .collect())
}

/// DOT rendering of a reversing-net LTS.
pub fn rpn_lts_dot(net: &NetDef, lts: &RpnLts) -> String {
    lts.to_dot(|s| s.canonical(net), |m| m.label(net))
}

/// Digest identifying a reversing-net LTS.
pub fn rpn_lts_digest(net: &NetDef, lts: &RpnLts) -> String {
    lts.digest(|s| s.canonical(net), |m| m.label(net))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{dependence, structural_dependence};
    use crate::fixtures;
    use crate::reversing::DependenceKind;

    #[test]
    fn explore_counts_numbers() {
        let lts = explore(0u32, 100, |n| {
            Ok(if *n < 3 {
                vec![((), n + 1), ((), 0)]
            } else {
                vec![]
            })
        })
        .unwrap();
        assert_eq!(lts.state_count(), 4);
        assert_eq!(lts.edge_count(), 6);
        assert_eq!(lts.path_to(3).len(), 3);
    }

    #[test]
    fn cap_is_enforced() {
        let err = explore(0u32, 5, |n| Ok(vec![((), n + 1)])).unwrap_err();
        assert!(matches!(err, ExploreError::CapExceeded { cap: 5, .. }));
    }

    #[test]
    fn backtracking_has_one_reverse_edge_per_state() {
        let (net, s0) = fixtures::figure1();
        let dep = structural_dependence(&net);
        let lts = explore_rpn(&net, &s0, Semantics::Backtracking, &dep, 1000).unwrap();
        for (k, s) in lts.states.iter().enumerate() {
            let reverse = lts
                .outgoing(k)
                .filter(|e| e.label.direction == Direction::Reverse)
                .count();
            assert_eq!(reverse, usize::from(!s.history.is_empty()));
        }
    }

    #[test]
    fn causal_adds_reverse_edges() {
        let (net, s0) = fixtures::figure1();
        let dep = structural_dependence(&net);
        let bt = explore_rpn(&net, &s0, Semantics::Backtracking, &dep, 1000).unwrap();
        let co = explore_rpn(&net, &s0, Semantics::Causal, &dep, 1000).unwrap();
        assert!(co.edge_count() > bt.edge_count());
        let a: BTreeSet<_> = bt.states.iter().collect();
        let b: BTreeSet<_> = co.states.iter().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn digest_is_schedule_independent() {
        let (net, s0) = fixtures::figure3a();
        let dep = structural_dependence(&net);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    rpn_lts_digest(
                        &net,
                        &explore_rpn(&net, &s0, Semantics::Causal, &dep, 10_000).unwrap(),
                    )
                })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn figure4_co_has_stuck_state() {
        let (net, s0) = fixtures::figure4();
        let co = dependence(&net, &s0, DependenceKind::CoBackwardConflict).unwrap();
        let stuck = find_stuck_states(&net, &s0, &co, 1000).unwrap();
        assert_eq!(stuck[0].trace, "t1 t2 t3 t4 ~t2");
        assert!(find_stuck_states(&net, &s0, &structural_dependence(&net), 1000)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn trace_replays() {
        let (net, s0) = fixtures::figure1();
        let dep = structural_dependence(&net);
        let moves = crate::reversing::parse_moves(&net, "t1,t2,~t2").unwrap();
        let (trace, _) = ExecutionTrace::record(&net, &s0, &moves, Semantics::Backtracking, &dep).unwrap();
        assert_eq!(trace.digests.len(), 3);
        assert!(trace.replays(&net, &s0, Semantics::Backtracking, &dep));
    }
}
