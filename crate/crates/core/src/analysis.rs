//! Structural analysis: cycles, transition classes, trans-acyclicity, and the
//! three dependence relations used by causal reversing.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::forward::{enabled_forward, fire_forward};
use crate::net::{effects_of, guard_of, NetDef, Node, PlaceId, State, TokenSet, TransitionId};
use crate::reversing::{DependenceKind, DependenceRelation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionClass {
    Transferring,
    BondCreating,
}

/// Transferring iff the positive parts of the incoming and outgoing label
/// unions coincide.
pub fn classify_transitions(net: &NetDef) -> BTreeMap<TransitionId, TransitionClass> {
    net.transitions()
        .map(|t| {
            let class = if guard_of(net, t).positive() == effects_of(net, t).positive() {
                TransitionClass::Transferring
            } else {
                TransitionClass::BondCreating
            };
            (t, class)
        })
        .collect()
}

/// A simple cycle: alternating places and transitions, starting and ending at
/// its least place.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle {
    pub nodes: Vec<Node>,
}

impl Cycle {
    pub fn transitions(&self) -> impl Iterator<Item = TransitionId> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Transition(t) => Some(*t),
            Node::Place(_) => None,
        })
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.nodes[..self.nodes.len() - 1].iter().filter_map(|n| match n {
            Node::Place(p) => Some(*p),
            Node::Transition(_) => None,
        })
    }

    pub fn text(&self, net: &NetDef) -> String {
        self.nodes
            .iter()
            .map(|n| net.node_name(*n))
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

/// All simple cycles, in discovery order: by starting place, then by the
/// order in which DFS explores successors.
pub fn find_cycles(net: &NetDef) -> Vec<Cycle> {
    let mut place_succ: Vec<Vec<TransitionId>> = vec![Vec::new(); net.place_count()];
    for t in net.transitions() {
        for p in net.preset(t) {
            place_succ[p.index()].push(t);
        }
    }
    let mut out = Vec::new();
    for start in net.places() {
        let mut path = vec![Node::Place(start)];
        let mut on_path: HashSet<Node> = HashSet::from([Node::Place(start)]);
        dfs(net, &place_succ, start, start, &mut path, &mut on_path, &mut out);
    }
    out
}

fn dfs(
    net: &NetDef,
    place_succ: &[Vec<TransitionId>],
    start: PlaceId,
    at: PlaceId,
    path: &mut Vec<Node>,
    on_path: &mut HashSet<Node>,
    out: &mut Vec<Cycle>,
) {
    for t in &place_succ[at.index()] {
        let tn = Node::Transition(*t);
        if on_path.contains(&tn) {
            continue;
        }
        path.push(tn);
        on_path.insert(tn);
        for q in net.postset(*t) {
            if q == start {
                let mut nodes = path.clone();
                nodes.push(Node::Place(start));
                out.push(Cycle { nodes });
            } else if q > start && !on_path.contains(&Node::Place(q)) {
                path.push(Node::Place(q));
                on_path.insert(Node::Place(q));
                dfs(net, place_succ, start, q, path, on_path, out);
                on_path.remove(&Node::Place(q));
                path.pop();
            }
        }
        on_path.remove(&tn);
        path.pop();
    }
}

/// `Ok(())` when no cycle consists of transferring transitions only;
/// otherwise the first such cycle.
pub fn is_trans_acyclic(net: &NetDef) -> Result<(), Cycle> {
    let classes = classify_transitions(net);
    match find_cycles(net).into_iter().find(|c| {
        c.transitions()
            .all(|t| classes[&t] == TransitionClass::Transferring)
    }) {
        Some(c) => Err(c),
        None => Ok(()),
    }
}

/// Pairs where an output place of one is an input place of the other.
/// A transition that consumes from its own output place is related to itself.
pub fn structural_dependence(net: &NetDef) -> DependenceRelation {
    let mut rel = DependenceRelation::new(DependenceKind::Structural);
    for t1 in net.transitions() {
        let post: BTreeSet<PlaceId> = net.postset(t1).collect();
        for t2 in net.transitions() {
            if net.preset(t2).any(|p| post.contains(&p)) {
                rel.insert(t1, t2);
            }
        }
    }
    rel
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("net is not trans-acyclic: {0}")]
    NotTransAcyclic(String),
    #[error("exploration stopped after {0} states")]
    TooManyStates(usize),
}

/// Pairs of distinct transitions that, in some state reachable by forward
/// firing with both executed, share a token of some connected component with
/// both of their outgoing labels.
pub fn marking_oriented_dependence(
    net: &NetDef,
    initial: &State,
) -> Result<DependenceRelation, AnalysisError> {
    is_trans_acyclic(net).map_err(|c| AnalysisError::NotTransAcyclic(c.text(net)))?;
    let effects: Vec<TokenSet> = net.transitions().map(|t| effects_of(net, t).positive()).collect();
    let mut rel = DependenceRelation::new(DependenceKind::MarkingOriented);
    for state in forward_reachable(net, initial, usize::MAX)? {
        let executed: Vec<TransitionId> = net
            .transitions()
            .filter(|t| !state.history.get(*t).is_empty())
            .collect();
        if executed.len() < 2 {
            continue;
        }
        for (_, content) in state.marking.iter() {
            for comp in content.components() {
                for (i, t1) in executed.iter().enumerate() {
                    let shared = comp.intersection(&effects[t1.index()]);
                    if shared.is_empty() {
                        continue;
                    }
                    for t2 in &executed[i + 1..] {
                        if !shared.intersection(&effects[t2.index()]).is_empty() {
                            rel.insert(*t1, *t2);
                        }
                    }
                }
            }
        }
    }
    Ok(rel)
}

/// States reachable by forward moves only, in BFS order.
pub fn forward_reachable(net: &NetDef, initial: &State, cap: usize) -> Result<Vec<State>, AnalysisError> {
    let mut seen: HashSet<State> = HashSet::from([initial.clone()]);
    let mut order = vec![initial.clone()];
    let mut queue = VecDeque::from([initial.clone()]);
    while let Some(s) = queue.pop_front() {
        for t in enabled_forward(net, &s) {
            let next = fire_forward(net, &s, t).expect("enabled");
            if seen.insert(next.clone()) {
                if seen.len() > cap {
                    return Err(AnalysisError::TooManyStates(cap));
                }
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(order)
}

/// Co-backward-conflict: every transition with itself, plus pairs sharing an
/// output place that lies on a cycle when at least one of the two lies on no
/// simple cycle.
pub fn co_backward_conflict(net: &NetDef) -> DependenceRelation {
    let cycles = find_cycles(net);
    let on_cycle_places: BTreeSet<PlaceId> = cycles.iter().flat_map(|c| c.places()).collect();
    let on_cycle_transitions: BTreeSet<TransitionId> = cycles.iter().flat_map(|c| c.transitions()).collect();
    let mut rel = DependenceRelation::new(DependenceKind::CoBackwardConflict);
    for t1 in net.transitions() {
        rel.insert(t1, t1);
        let post: BTreeSet<PlaceId> = net.postset(t1).collect();
        for t2 in net.transitions().filter(|t2| *t2 > t1) {
            let shared_on_cycle = net
                .postset(t2)
                .any(|p| post.contains(&p) && on_cycle_places.contains(&p));
            let one_off_cycle = !on_cycle_transitions.contains(&t1) || !on_cycle_transitions.contains(&t2);
            if shared_on_cycle && one_off_cycle {
                rel.insert(t1, t2);
            }
        }
    }
    rel
}

/// Computes the relation of the requested kind.
pub fn dependence(
    net: &NetDef,
    initial: &State,
    kind: DependenceKind,
) -> Result<DependenceRelation, AnalysisError> {
    match kind {
        DependenceKind::Structural => Ok(structural_dependence(net)),
        DependenceKind::MarkingOriented => marking_oriented_dependence(net, initial),
        DependenceKind::CoBackwardConflict => Ok(co_backward_conflict(net)),
    }
}
