//! Forward execution: enabledness, firing, and firing sequences.

use thiserror::Error;

use crate::net::{con, Marking, NetDef, State, TokenSet, TransitionId, MAX_OCCURRENCES};

/// Why a move could not be taken. Every variant names the failing condition.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FireError {
    #[error("unknown transition")]
    UnknownTransition,
    #[error("{transition} is not enabled: {token} is required in {place}")]
    MissingToken {
        transition: String,
        place: String,
        token: String,
    },
    #[error("{transition} is not enabled: {token} must be absent from {place}")]
    ForbiddenToken {
        transition: String,
        place: String,
        token: String,
    },
    #[error(
        "{transition} is not enabled: bond {bond} already exists in {place} but is not required on that arc"
    )]
    UnguardedBond {
        transition: String,
        place: String,
        bond: String,
    },
    #[error("{transition} already has two live occurrences; a third firing would exceed the history bound")]
    HistoryFull { transition: String },
    #[error("{transition} has not been executed")]
    NotExecuted { transition: String },
    #[error("{transition} is not bt-enabled: {latest} holds the most recent history index")]
    NotBacktrackEnabled { transition: String, latest: String },
    #[error("{transition} is not co-enabled: dependent transition {blocker} was executed later")]
    NotCoEnabled { transition: String, blocker: String },
    #[error("{transition} cannot be reversed: {token} is not in {place}")]
    ReverseTokensMissing {
        transition: String,
        place: String,
        token: String,
    },
    #[error("move {position} ({label}) failed: {source}")]
    AtPosition {
        position: usize,
        label: String,
        #[source]
        source: Box<FireError>,
    },
}

pub(crate) fn check_known(net: &NetDef, t: TransitionId) -> Result<(), FireError> {
    if net.contains_transition(t) {
        Ok(())
    } else {
        Err(FireError::UnknownTransition)
    }
}

/// Checks the three enabledness clauses and reports the first one violated,
/// scanning input places in id order. Does not consider the history bound.
pub fn check_forward(net: &NetDef, state: &State, t: TransitionId) -> Result<(), FireError> {
    check_known(net, t)?;
    let name = || net.transition_name(t).to_string();
    let m = &state.marking;
    for (p, label) in net.inputs(t) {
        let here = m.get(*p);
        let place = || net.place_name(*p).to_string();
        if let Some(a) = label.bases.iter().find(|a| !here.contains_base(**a)) {
            return Err(FireError::MissingToken {
                transition: name(),
                place: place(),
                token: net.base_name(*a).to_string(),
            });
        }
        if let Some(b) = label.bonds.iter().find(|b| !here.contains_bond(**b)) {
            return Err(FireError::MissingToken {
                transition: name(),
                place: place(),
                token: net.bond_name(*b),
            });
        }
        if let Some(a) = label.neg_bases.iter().find(|a| here.contains_base(**a)) {
            return Err(FireError::ForbiddenToken {
                transition: name(),
                place: place(),
                token: net.base_name(*a).to_string(),
            });
        }
        if let Some(b) = label.neg_bonds.iter().find(|b| here.contains_bond(**b)) {
            return Err(FireError::ForbiddenToken {
                transition: name(),
                place: place(),
                token: net.bond_name(*b),
            });
        }
    }
    for out in net.outputs(t).values() {
        for bond in &out.bonds {
            for (q, in_label) in net.inputs(t) {
                if m.get(*q).contains_bond(*bond) && !in_label.bonds.contains(bond) {
                    return Err(FireError::UnguardedBond {
                        transition: name(),
                        place: net.place_name(*q).to_string(),
                        bond: net.bond_name(*bond),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Whether `t` is forward enabled in `state`.
pub fn forward_enabled(net: &NetDef, state: &State, t: TransitionId) -> bool {
    check_forward(net, state, t).is_ok()
}

/// The marking after firing `t`. Input places lose the components of the
/// tokens their arcs name; output places gain their arc label plus those
/// components. When a place is both input and output the removal is applied
/// before the addition.
pub fn forward_marking(net: &NetDef, marking: &Marking, t: TransitionId) -> Marking {
    let mut next = marking.clone();
    for (p, label) in net.inputs(t) {
        let here = marking.get(*p);
        let mut gone = TokenSet::new();
        for a in &label.bases {
            gone.extend(&con(*a, here));
        }
        next.get_mut(*p).remove_all(&gone);
    }
    for (q, label) in net.outputs(t) {
        let mut added = label.positive();
        for a in &label.bases {
            for p in net.preset(t) {
                added.extend(&con(*a, marking.get(p)));
            }
        }
        next.get_mut(*q).extend(&added);
    }
    next
}

/// Fires `t` forward.
///
/// ```
/// use revnets::fixtures;
/// use revnets::forward::fire_forward;
///
/// let (net, s0) = fixtures::figure1();
/// let t1 = net.transition("t1").unwrap();
/// let s1 = fire_forward(&net, &s0, t1).unwrap();
/// assert_eq!(s1.history.get(t1).iter().copied().collect::<Vec<_>>(), [1]);
/// ```
pub fn fire_forward(net: &NetDef, state: &State, t: TransitionId) -> Result<State, FireError> {
    check_forward(net, state, t)?;
    if state.history.get(t).len() >= MAX_OCCURRENCES {
        return Err(FireError::HistoryFull {
            transition: net.transition_name(t).to_string(),
        });
    }
    let marking = forward_marking(net, &state.marking, t);
    let mut history = state.history.clone();
    let next = history.max_index() + 1;
    history.get_mut(t).insert(next);
    Ok(State { marking, history })
}

/// Fires a sequence of transitions, failing at the first one that is not
/// enabled.
pub fn fire_sequence(net: &NetDef, state: &State, seq: &[TransitionId]) -> Result<State, FireError> {
    let mut current = state.clone();
    for (position, t) in seq.iter().enumerate() {
        current = fire_forward(net, &current, *t).map_err(|e| FireError::AtPosition {
            position,
            label: if net.contains_transition(*t) {
                net.transition_name(*t).to_string()
            } else {
                "?".to_string()
            },
            source: Box::new(e),
        })?;
    }
    Ok(current)
}

/// Transitions enabled for forward firing, history bound included.
pub fn enabled_forward(net: &NetDef, state: &State) -> Vec<TransitionId> {
    net.transitions()
        .filter(|t| state.history.get(*t).len() < MAX_OCCURRENCES && forward_enabled(net, state, *t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::net::NetBuilder;

    fn ids(net: &NetDef, names: &[&str]) -> Vec<TransitionId> {
        names.iter().map(|n| net.transition(n).unwrap()).collect()
    }

    #[test]
    fn figure1_initial_enabledness() {
        let (net, s0) = fixtures::figure1();
        assert!(forward_enabled(&net, &s0, net.transition("t1").unwrap()));
        assert!(!forward_enabled(&net, &s0, net.transition("t3").unwrap()));
    }

    #[test]
    fn figure1_full_run() {
        let (net, s0) = fixtures::figure1();
        let s = fire_sequence(&net, &s0, &ids(&net, &["t1", "t2", "t3", "t4"])).unwrap();
        let p7 = net.place("p7").unwrap();
        assert_eq!(
            s.marking.get(p7),
            &net.parse_token_set("a, b, c, a-b, b-c").unwrap()
        );
        for p in ["p1", "p2", "p3", "p4", "p5", "p6"] {
            assert!(s.marking.get(net.place(p).unwrap()).is_empty(), "{p}");
        }
        for (i, t) in ["t1", "t2", "t3", "t4"].iter().enumerate() {
            let h: Vec<u32> = s
                .history
                .get(net.transition(t).unwrap())
                .iter()
                .copied()
                .collect();
            assert_eq!(h, [i as u32 + 1]);
        }
    }

    #[test]
    fn t3_first_fails_at_position_zero() {
        let (net, s0) = fixtures::figure1();
        let err = fire_sequence(&net, &s0, &ids(&net, &["t3"])).unwrap_err();
        match err {
            FireError::AtPosition { position, source, .. } => {
                assert_eq!(position, 0);
                assert!(matches!(*source, FireError::MissingToken { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_sequence_is_identity() {
        let (net, s0) = fixtures::figure1();
        assert_eq!(fire_sequence(&net, &s0, &[]).unwrap(), s0);
    }

    #[test]
    fn negative_label_blocks() {
        let net = NetBuilder::new()
            .places(["p", "q"])
            .transitions(["t"])
            .bases(["a", "b"])
            .arc("p", "t", "a, !b")
            .arc("t", "q", "a")
            .build()
            .unwrap();
        let t = net.transition("t").unwrap();
        let s = State::initial(&net, net.marking([("p", "a, b")]).unwrap());
        assert!(matches!(
            check_forward(&net, &s, t),
            Err(FireError::ForbiddenToken { .. })
        ));
        let s = State::initial(&net, net.marking([("p", "a"), ("q", "b")]).unwrap());
        assert!(forward_enabled(&net, &s, t));
    }

    #[test]
    fn clause_three_requires_existing_bond_on_arc() {
        let net = NetBuilder::new()
            .places(["p", "q"])
            .transitions(["t"])
            .bases(["a", "b"])
            .bond("a", "b")
            .arc("p", "t", "a, b")
            .arc("t", "q", "a, b, a-b")
            .build()
            .unwrap();
        let t = net.transition("t").unwrap();
        let s = State::initial(&net, net.marking([("p", "a, b, a-b")]).unwrap());
        assert!(matches!(
            check_forward(&net, &s, t),
            Err(FireError::UnguardedBond { .. })
        ));
    }

    #[test]
    fn whole_component_moves() {
        let net = NetBuilder::new()
            .places(["p", "q"])
            .transitions(["t"])
            .bases(["a", "b"])
            .bond("a", "b")
            .arc("p", "t", "a")
            .arc("t", "q", "a")
            .build()
            .unwrap();
        let t = net.transition("t").unwrap();
        let s = State::initial(&net, net.marking([("p", "a, b, a-b")]).unwrap());
        let s = fire_forward(&net, &s, t).unwrap();
        assert_eq!(
            s.marking.get(net.place("q").unwrap()),
            &net.parse_token_set("a, b, a-b").unwrap()
        );
    }

    #[test]
    fn self_loop_keeps_tokens() {
        let (net, s0) = fixtures::self_loop();
        let t = net.transition("t").unwrap();
        let s1 = fire_forward(&net, &s0, t).unwrap();
        assert_eq!(s1.marking, s0.marking);
        let s2 = fire_forward(&net, &s1, t).unwrap();
        assert!(matches!(
            fire_forward(&net, &s2, t),
            Err(FireError::HistoryFull { .. })
        ));
    }
}
