//! Maps between reversing-net states and markings of the generated net.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{molecule_of, TranslationLayout};
use crate::cpn::{CpnMarking, HistTriple, Molecule, Value};
use crate::net::{History, Marking, NetDef, State, TokenSet, TransitionId, MAX_OCCURRENCES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorrespondenceError {
    #[error("place {0} is missing from the marking")]
    MissingPlace(String),
    #[error("place {place} holds an unexpected token {token}")]
    BadToken { place: String, token: String },
    #[error("unknown base {0}")]
    UnknownBase(String),
    #[error("bond {0} is not declared")]
    UnknownBond(String),
    #[error("history place {place} must hold exactly one list, found {count}")]
    ListCount { place: String, count: usize },
    #[error("history list of {transition} is malformed: {reason}")]
    BadList { transition: String, reason: String },
    #[error("recovered history is not a permutation of 1..n: {0}")]
    BadHistory(String),
}

fn err_list(t: &str, reason: impl Into<String>) -> CorrespondenceError {
    CorrespondenceError::BadList {
        transition: t.to_string(),
        reason: reason.into(),
    }
}

/// History triples of `t` encoding `history`.
fn triples_of(net: &NetDef, history: &History, t: TransitionId) -> BTreeSet<HistTriple> {
    let i = t.index() as u32 + 1;
    let own = history.get(t);
    let mut out = BTreeSet::new();
    if net.transition_count() == 1 {
        for (rank, _) in own.iter().enumerate() {
            out.insert(HistTriple::new(rank as u32 + 1, i, i));
        }
        return out;
    }
    for u in net.transitions().filter(|u| *u != t) {
        let j = u.index() as u32 + 1;
        let theirs = history.get(u);
        for k in own {
            let before = own.iter().chain(theirs).filter(|h| *h < k).count() as u32;
            out.insert(HistTriple::new(before + 1, j, i));
        }
    }
    out
}

/// The marking of the generated net that represents `state`.
pub fn rpn_state_to_cpn_marking(net: &NetDef, layout: &TranslationLayout, state: &State) -> CpnMarking {
    let mut m = CpnMarking::new();
    for p in net.places() {
        let tokens = state
            .marking
            .get(p)
            .components()
            .iter()
            .map(|c| Value::Molecule(molecule_of(net, c)))
            .collect();
        m.insert(net.place_name(p).to_string(), tokens);
    }
    for t in net.transitions() {
        let place = layout.thp[net.transition_name(t)].clone();
        m.insert(
            place,
            BTreeSet::from([Value::List(triples_of(net, &state.history, t))]),
        );
    }
    for pp in &layout.chp {
        let a = net.transition(&pp.first).expect("layout transition");
        let b = net.transition(&pp.second).expect("layout transition");
        let count = state.history.get(a).len() + state.history.get(b).len();
        m.insert(pp.place.clone(), BTreeSet::from([Value::Int(count as i64)]));
    }
    m
}

fn token_set_of(
    net: &NetDef,
    place: &str,
    tokens: &BTreeSet<Value>,
) -> Result<TokenSet, CorrespondenceError> {
    let mut out = TokenSet::new();
    for v in tokens {
        let Value::Molecule(Molecule { bases, bonds }) = v else {
            return Err(CorrespondenceError::BadToken {
                place: place.to_string(),
                token: v.to_string(),
            });
        };
        for a in bases {
            out.bases.insert(
                net.base(a)
                    .ok_or_else(|| CorrespondenceError::UnknownBase(a.clone()))?,
            );
        }
        for (a, b) in bonds {
            out.bonds.insert(
                net.bond(a, b)
                    .ok_or_else(|| CorrespondenceError::UnknownBond(format!("{a}-{b}")))?,
            );
        }
    }
    Ok(out)
}

/// Recovers the global indices of one transition from its triple list.
///
/// With `T` transitions a list holds `T - 1` triples per live occurrence.
/// For an occurrence whose triple with partner `j` has position `n_j`, the
/// number of earlier occurrences of other transitions is `Σ (n_j - 1)`; for
/// a second occurrence each `n_j` also counts the first one, which the
/// correction term removes. Arithmetic is exact; a non-integral result is an
/// error.
pub fn recover_history(
    t_name: &str,
    i: u32,
    transitions: u32,
    list: &BTreeSet<HistTriple>,
) -> Result<Vec<u32>, CorrespondenceError> {
    if list.iter().any(|tr| tr.i != i) {
        return Err(err_list(t_name, "triple with a foreign owner"));
    }
    if transitions == 1 {
        if list.iter().any(|tr| tr.j != i) {
            return Err(err_list(t_name, "self triple expected"));
        }
        if list.len() > MAX_OCCURRENCES {
            return Err(err_list(t_name, "more than two occurrences"));
        }
        return Ok(list.iter().map(|tr| tr.n).collect());
    }
    let partners = transitions - 1;
    let mut per: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for tr in list {
        if tr.j == i || tr.j == 0 || tr.j > transitions {
            return Err(err_list(t_name, format!("bad partner {}", tr.j)));
        }
        per.entry(tr.j).or_default().push(tr.n);
    }
    for v in per.values_mut() {
        v.sort_unstable();
    }
    let occurrences = match list.len() {
        0 => return Ok(Vec::new()),
        n if n == partners as usize => 1,
        n if n == 2 * partners as usize => 2,
        n => return Err(err_list(t_name, format!("unexpected length {n}"))),
    };
    if per.len() != partners as usize || per.values().any(|v| v.len() != occurrences) {
        return Err(err_list(t_name, "uneven partner coverage"));
    }
    let sum_min: u32 = per.values().map(|v| v[0] - 1).sum();
    let first = 1 + sum_min;
    if occurrences == 1 {
        return Ok(vec![first]);
    }
    // Each partner's larger triple also counts the first occurrence; the
    // published correction is #{smaller triples} * (T - 2) / (T - 1).
    let smaller = per.values().filter(|v| v[0] < v[1]).count() as i64;
    let sum_max = Ratio::from_integer(per.values().map(|v| i64::from(v[1]) - 1).sum::<i64>());
    let correction = Ratio::new(smaller * i64::from(transitions - 2), i64::from(partners));
    if !correction.is_integer() {
        return Err(err_list(t_name, format!("non-integral correction {correction}")));
    }
    let second = Ratio::from_integer(1) + sum_max - correction;
    if !second.is_integer() || *second.numer() < 1 {
        return Err(err_list(t_name, format!("second occurrence at {second}")));
    }
    Ok(vec![first, second.to_integer() as u32])
}

/// Reads a reversing-net state back out of a marking of the generated net.
pub fn cpn_marking_to_rpn_state(
    net: &NetDef,
    layout: &TranslationLayout,
    marking: &CpnMarking,
) -> Result<State, CorrespondenceError> {
    let get = |place: &str| {
        marking
            .get(place)
            .ok_or_else(|| CorrespondenceError::MissingPlace(place.to_string()))
    };
    let mut m = Marking::empty(net);
    for p in net.places() {
        let name = net.place_name(p);
        *m.get_mut(p) = token_set_of(net, name, get(name)?)?;
    }
    let n = net.transition_count() as u32;
    let mut entries = Vec::new();
    for t in net.transitions() {
        let name = net.transition_name(t);
        let place = &layout.thp[name];
        let tokens = get(place)?;
        let [Value::List(list)] = tokens.iter().collect::<Vec<_>>()[..] else {
            return Err(CorrespondenceError::ListCount {
                place: place.clone(),
                count: tokens.len(),
            });
        };
        entries.push((t, recover_history(name, t.index() as u32 + 1, n, list)?));
    }
    let history = History::from_entries(net, entries.clone());
    let total: usize = entries.iter().map(|(_, v)| v.len()).sum();
    if history.len() != total || !history.is_well_formed() {
        let text: Vec<String> = entries
            .iter()
            .map(|(t, v)| format!("{}:{v:?}", net.transition_name(*t)))
            .collect();
        return Err(CorrespondenceError::BadHistory(text.join(" ")));
    }
    Ok(State { marking: m, history })
}

/// A place whose expected and actual contents differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceDiff {
    pub place: String,
    pub expected: Vec<String>,
    pub actual: Vec<String>,
}

/// Result of comparing a state with a marking.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub diffs: Vec<PlaceDiff>,
    /// Canonical text of the state recovered from the marking.
    pub recovered: Option<String>,
    pub recovery_error: Option<String>,
    pub holds: bool,
}

/// Checks that `marking` encodes `state` and that decoding gives it back.
pub fn check_correspondence(
    net: &NetDef,
    layout: &TranslationLayout,
    state: &State,
    marking: &CpnMarking,
) -> CorrespondenceReport {
    let expected = rpn_state_to_cpn_marking(net, layout, state);
    let texts = |vs: Option<&BTreeSet<Value>>| -> Vec<String> {
        vs.map(|s| s.iter().map(ToString::to_string).collect())
            .unwrap_or_default()
    };
    let places: BTreeSet<&String> = expected.keys().chain(marking.keys()).collect();
    let diffs: Vec<PlaceDiff> = places
        .into_iter()
        .filter(|p| expected.get(*p) != marking.get(*p))
        .map(|p| PlaceDiff {
            place: p.clone(),
            expected: texts(expected.get(p)),
            actual: texts(marking.get(p)),
        })
        .collect();
    let (recovered, recovery_error, same) = match cpn_marking_to_rpn_state(net, layout, marking) {
        Ok(s) => (Some(s.canonical(net)), None, s == *state),
        Err(e) => (None, Some(e.to_string()), false),
    };
    CorrespondenceReport {
        holds: diffs.is_empty() && same,
        diffs,
        recovered,
        recovery_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::structural_dependence;
    use crate::fixtures;
    use crate::forward::fire_sequence;
    use crate::reversing::Semantics;
    use crate::translate::translate;

    #[test]
    fn initial_marking_matches_encoding() {
        for f in fixtures::trans_acyclic() {
            let (net, s0) = (f.build)();
            let tr = translate(&net, &s0, Semantics::Backtracking, &structural_dependence(&net)).unwrap();
            let m0 = tr.cpn.initial_marking().unwrap();
            let report = check_correspondence(&net, &tr.layout, &s0, &m0);
            assert!(report.holds, "{}: {report:?}", f.name);
        }
    }

    #[test]
    fn recovery_of_two_occurrences() {
        // Three transitions; t1 fired at global indices 2 and 4, t2 at 1, t3 at 3.
        // Triples against t2: positions among {1,2,4} -> 2, 3. Against t3: among {2,3,4} -> 1, 3.
        let list: BTreeSet<HistTriple> = [(2, 2, 1), (3, 2, 1), (1, 3, 1), (3, 3, 1)]
            .into_iter()
            .map(|(n, j, i)| HistTriple::new(n, j, i))
            .collect();
        assert_eq!(recover_history("t1", 1, 3, &list).unwrap(), vec![2, 4]);
    }

    #[test]
    fn recovery_rejects_ragged_lists() {
        let list: BTreeSet<HistTriple> = [HistTriple::new(1, 2, 1)].into();
        assert!(recover_history("t1", 1, 3, &list).is_err());
    }

    #[test]
    fn encoding_after_sequence_decodes() {
        let (net, s0) = fixtures::figure1();
        let tr = translate(&net, &s0, Semantics::Backtracking, &structural_dependence(&net)).unwrap();
        let ts: Vec<_> = ["t2", "t1", "t3"]
            .iter()
            .map(|n| net.transition(n).unwrap())
            .collect();
        let s = fire_sequence(&net, &s0, &ts).unwrap();
        let m = rpn_state_to_cpn_marking(&net, &tr.layout, &s);
        assert_eq!(cpn_marking_to_rpn_state(&net, &tr.layout, &m).unwrap(), s);
    }
}
