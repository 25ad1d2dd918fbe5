//! Backtracking and causal reversing.
//!
//! Both semantics share one marking effect; they differ in which executed
//! transitions may be undone and in how the history is rewritten. Causal
//! reversing is parameterised by a precomputed [`DependenceRelation`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::forward::{check_known, fire_forward, FireError};
use crate::net::{con, effect_of, Marking, NetDef, State, TokenSet, TransitionId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    Backtracking,
    Causal,
}

impl Semantics {
    pub const ALL: [Semantics; 2] = [Semantics::Backtracking, Semantics::Causal];

    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Backtracking => "backtracking",
            Semantics::Causal => "causal",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "backtracking" | "bt" => Ok(Semantics::Backtracking),
            "causal" | "co" => Ok(Semantics::Causal),
            other => Err(format!("unknown semantics {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DependenceKind {
    #[serde(rename = "structural")]
    Structural,
    #[serde(rename = "marking")]
    MarkingOriented,
    #[serde(rename = "co")]
    CoBackwardConflict,
}

impl DependenceKind {
    pub const ALL: [DependenceKind; 3] = [
        DependenceKind::Structural,
        DependenceKind::MarkingOriented,
        DependenceKind::CoBackwardConflict,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DependenceKind::Structural => "structural",
            DependenceKind::MarkingOriented => "marking",
            DependenceKind::CoBackwardConflict => "co",
        }
    }
}

impl fmt::Display for DependenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DependenceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structural" | "str" => Ok(DependenceKind::Structural),
            "marking" | "marking-oriented" | "mo" => Ok(DependenceKind::MarkingOriented),
            "co" | "co-backward-conflict" => Ok(DependenceKind::CoBackwardConflict),
            other => Err(format!("unknown dependence relation {other:?}")),
        }
    }
}

/// A symmetric relation on transitions. Pairs are stored once, smaller id
/// first; a pair `(t, t)` records reflexivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependenceRelation {
    pub kind: DependenceKind,
    pairs: BTreeSet<(TransitionId, TransitionId)>,
}

impl DependenceRelation {
    pub fn new(kind: DependenceKind) -> DependenceRelation {
        DependenceRelation {
            kind,
            pairs: BTreeSet::new(),
        }
    }

    pub fn from_pairs<I>(kind: DependenceKind, pairs: I) -> DependenceRelation
    where
        I: IntoIterator<Item = (TransitionId, TransitionId)>,
    {
        let mut rel = DependenceRelation::new(kind);
        for (a, b) in pairs {
            rel.insert(a, b);
        }
        rel
    }

    pub fn insert(&mut self, a: TransitionId, b: TransitionId) {
        self.pairs.insert(if a <= b { (a, b) } else { (b, a) });
    }

    pub fn contains(&self, a: TransitionId, b: TransitionId) -> bool {
        self.pairs.contains(&if a <= b { (a, b) } else { (b, a) })
    }

    /// Normalised pairs, each listed once.
    pub fn pairs(&self) -> impl Iterator<Item = (TransitionId, TransitionId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Transitions related to `t`, including `t` itself if the pair is present.
    pub fn partners(&self, t: TransitionId) -> impl Iterator<Item = TransitionId> + '_ {
        self.pairs.iter().filter_map(move |(a, b)| {
            if *a == t {
                Some(*b)
            } else if *b == t {
                Some(*a)
            } else {
                None
            }
        })
    }

    /// Transitions having at least one partner (possibly themselves) outside
    /// the relation.
    pub fn independent_transitions(&self, net: &NetDef) -> BTreeSet<TransitionId> {
        net.transitions()
            .filter(|t| net.transitions().any(|u| !self.contains(*t, u)))
            .collect()
    }

    /// Pairs rendered by name, e.g. `["t1,t3", "t2,t3"]`.
    pub fn named_pairs(&self, net: &NetDef) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .map(|(a, b)| {
                (
                    net.transition_name(*a).to_string(),
                    net.transition_name(*b).to_string(),
                )
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

/// A forward or reverse occurrence of a transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub transition: TransitionId,
    pub direction: Direction,
}

impl Move {
    pub fn forward(t: TransitionId) -> Move {
        Move {
            transition: t,
            direction: Direction::Forward,
        }
    }

    pub fn reverse(t: TransitionId) -> Move {
        Move {
            transition: t,
            direction: Direction::Reverse,
        }
    }

    /// `t` for forward moves, `~t` for reverse ones.
    pub fn label(&self, net: &NetDef) -> String {
        let name = net.transition_name(self.transition);
        match self.direction {
            Direction::Forward => name.to_string(),
            Direction::Reverse => format!("~{name}"),
        }
    }
}

/// Parses a comma- or whitespace-separated move list such as `"t1, t2, ~t1"`.
pub fn parse_moves(net: &NetDef, text: &str) -> Result<Vec<Move>, crate::net::NetError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (dir, name) = match item.strip_prefix('~') {
                Some(rest) => (Direction::Reverse, rest),
                None => (Direction::Forward, item),
            };
            Ok(Move {
                transition: net.require_transition(name)?,
                direction: dir,
            })
        })
        .collect()
}

/// Renders a move sequence as `t1 t2 ~t2`.
pub fn trace_text(net: &NetDef, moves: &[Move]) -> String {
    moves.iter().map(|m| m.label(net)).collect::<Vec<_>>().join(" ")
}

/// `t` holds the globally largest history index.
pub fn bt_enabled(net: &NetDef, state: &State, t: TransitionId) -> bool {
    if !net.contains_transition(t) {
        return false;
    }
    match state.history.last(t) {
        Some(k) => k == state.history.max_index(),
        None => false,
    }
}

/// `t` has been executed and no transition dependent on it has a larger
/// last index.
pub fn co_enabled(net: &NetDef, state: &State, t: TransitionId, dep: &DependenceRelation) -> bool {
    co_blocker(net, state, t, dep) == Ok(None)
}

fn co_blocker(
    net: &NetDef,
    state: &State,
    t: TransitionId,
    dep: &DependenceRelation,
) -> Result<Option<TransitionId>, ()> {
    if !net.contains_transition(t) {
        return Err(());
    }
    let Some(k) = state.history.last(t) else {
        return Err(());
    };
    Ok(dep
        .partners(t)
        .find(|u| state.history.last(*u).is_some_and(|k2| k2 > k)))
}

/// The output place holds the bases `t` deposited and the bonds it created,
/// i.e. there is an occurrence of `t` to undo in the current marking.
pub fn check_reverse_tokens(net: &NetDef, state: &State, t: TransitionId) -> Result<(), FireError> {
    let created = effect_of(net, t);
    for (q, label) in net.outputs(t) {
        let here = state.marking.get(*q);
        let missing = label
            .bases
            .iter()
            .find(|a| !here.contains_base(**a))
            .map(|a| net.base_name(*a).to_string())
            .or_else(|| {
                created
                    .bonds
                    .iter()
                    .find(|b| !here.contains_bond(**b))
                    .map(|b| net.bond_name(*b))
            });
        if let Some(token) = missing {
            return Err(FireError::ReverseTokensMissing {
                transition: net.transition_name(t).to_string(),
                place: net.place_name(*q).to_string(),
                token,
            });
        }
    }
    Ok(())
}

/// Full reverse-enabledness check for the chosen semantics: the history
/// condition first, then token presence.
pub fn check_reverse(
    net: &NetDef,
    state: &State,
    t: TransitionId,
    semantics: Semantics,
    dep: &DependenceRelation,
) -> Result<(), FireError> {
    check_known(net, t)?;
    let name = || net.transition_name(t).to_string();
    if state.history.get(t).is_empty() {
        return Err(FireError::NotExecuted { transition: name() });
    }
    match semantics {
        Semantics::Backtracking => {
            if !bt_enabled(net, state, t) {
                let latest = state.history.latest().expect("history is non-empty");
                return Err(FireError::NotBacktrackEnabled {
                    transition: name(),
                    latest: net.transition_name(latest).to_string(),
                });
            }
        }
        Semantics::Causal => {
            if let Ok(Some(blocker)) = co_blocker(net, state, t, dep) {
                return Err(FireError::NotCoEnabled {
                    transition: name(),
                    blocker: net.transition_name(blocker).to_string(),
                });
            }
        }
    }
    check_reverse_tokens(net, state, t)
}

pub fn reverse_enabled(
    net: &NetDef,
    state: &State,
    t: TransitionId,
    semantics: Semantics,
    dep: &DependenceRelation,
) -> bool {
    check_reverse(net, state, t, semantics, dep).is_ok()
}

/// The marking after undoing one occurrence of `t`: created bonds are broken
/// and the resulting components go back to the input places whose arcs name
/// them. Removal from output places is applied before the additions.
pub fn reverse_marking(net: &NetDef, marking: &Marking, t: TransitionId) -> Marking {
    let created = effect_of(net, t);
    let created = TokenSet {
        bases: created.bases,
        bonds: created.bonds,
    };
    let mut next = marking.clone();
    for (q, label) in net.outputs(t) {
        let here = marking.get(*q);
        let mut gone = TokenSet::new();
        for a in &label.bases {
            gone.extend(&con(*a, here));
        }
        next.get_mut(*q).remove_all(&gone);
    }
    for (p, in_label) in net.inputs(t) {
        let mut back = TokenSet::new();
        for (q, out_label) in net.outputs(t) {
            let broken = marking.get(*q).difference(&created);
            for a in in_label.bases.intersection(&out_label.bases) {
                back.extend(&con(*a, &broken));
            }
        }
        next.get_mut(*p).extend(&back);
    }
    next
}

/// Undoes the most recent occurrence of a bt-enabled transition.
pub fn fire_backtrack(net: &NetDef, state: &State, t: TransitionId) -> Result<State, FireError> {
    let unused = DependenceRelation::new(DependenceKind::Structural);
    check_reverse(net, state, t, Semantics::Backtracking, &unused)?;
    let marking = reverse_marking(net, &state.marking, t);
    let mut history = state.history.clone();
    let k = history.last(t).expect("checked");
    history.get_mut(t).remove(&k);
    Ok(State { marking, history })
}

/// Undoes the last occurrence `k` of a co-enabled transition and closes the
/// gap by decrementing every larger index.
pub fn fire_causal_reverse(
    net: &NetDef,
    state: &State,
    t: TransitionId,
    dep: &DependenceRelation,
) -> Result<State, FireError> {
    check_reverse(net, state, t, Semantics::Causal, dep)?;
    let marking = reverse_marking(net, &state.marking, t);
    let mut history = state.history.clone();
    let k = history.last(t).expect("checked");
    history.get_mut(t).remove(&k);
    for u in net.transitions() {
        let entry = history.get_mut(u);
        if entry.iter().any(|k2| *k2 > k) {
            *entry = entry
                .iter()
                .map(|k2| if *k2 > k { k2 - 1 } else { *k2 })
                .collect();
        }
    }
    Ok(State { marking, history })
}

/// Applies one move under the chosen semantics.
pub fn fire_move(
    net: &NetDef,
    state: &State,
    mv: Move,
    semantics: Semantics,
    dep: &DependenceRelation,
) -> Result<State, FireError> {
    match (mv.direction, semantics) {
        (Direction::Forward, _) => fire_forward(net, state, mv.transition),
        (Direction::Reverse, Semantics::Backtracking) => fire_backtrack(net, state, mv.transition),
        (Direction::Reverse, Semantics::Causal) => fire_causal_reverse(net, state, mv.transition, dep),
    }
}

/// Applies a mixed move sequence, reporting the position of the first
/// illegal move.
pub fn fire_moves(
    net: &NetDef,
    state: &State,
    moves: &[Move],
    semantics: Semantics,
    dep: &DependenceRelation,
) -> Result<State, FireError> {
    let mut current = state.clone();
    for (position, mv) in moves.iter().enumerate() {
        current = fire_move(net, &current, *mv, semantics, dep).map_err(|e| FireError::AtPosition {
            position,
            label: mv.label(net),
            source: Box::new(e),
        })?;
    }
    Ok(current)
}

/// Transitions whose last occurrence can currently be undone.
pub fn enabled_reverse(
    net: &NetDef,
    state: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
) -> Vec<TransitionId> {
    net.transitions()
        .filter(|t| reverse_enabled(net, state, *t, semantics, dep))
        .collect()
}

/// Every legal move, forward moves first, each group in id order.
pub fn enabled_moves(
    net: &NetDef,
    state: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
) -> Vec<Move> {
    let mut out: Vec<Move> = crate::forward::enabled_forward(net, state)
        .into_iter()
        .map(Move::forward)
        .collect();
    out.extend(
        enabled_reverse(net, state, semantics, dep)
            .into_iter()
            .map(Move::reverse),
    );
    out
}
