//! Compilation of a reversing Petri net into a coloured Petri net.
//!
//! Every net place becomes a molecule place. Each transition `t` gets a
//! history place `h_t` holding one list of triples, and each unordered pair
//! `t, u` a counter place `h_t_u`. Forward transitions keep their names; the
//! reverse of `t` is `tr_t`.

mod correspondence;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{co_backward_conflict, is_trans_acyclic, structural_dependence};
use crate::cpn::{
    bond_name, ArcDir, ArcExpr, BondName, ColourSet, CpnArc, CpnNet, CpnPlace, CpnTransition, Expr, Molecule,
    TokenRef, Value,
};
use crate::net::{effect_of, validate_well_formed, Bond, NetDef, State, TokenSet, TransitionId};
use crate::reversing::{DependenceKind, DependenceRelation, Semantics};

pub use correspondence::{
    check_correspondence, cpn_marking_to_rpn_state, recover_history, rpn_state_to_cpn_marking,
    CorrespondenceError, CorrespondenceReport, PlaceDiff,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("net is not trans-acyclic: {0}")]
    NotTransAcyclic(String),
    #[error("net is not well-formed: {0}")]
    NotWellFormed(String),
    #[error("generated name {0} clashes with an existing name")]
    NameClash(String),
}

/// A counter place for the unordered pair `first < second`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairPlace {
    pub first: String,
    pub second: String,
    pub place: String,
}

/// Where the translation put things.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationLayout {
    pub semantics: Semantics,
    pub dependence: DependenceKind,
    #[serde(default)]
    pub co_guard: CoGuard,
    /// Net transitions in index order; triple index `i` is position `i - 1`.
    pub transitions: Vec<String>,
    /// Places copied from the net.
    pub net_places: Vec<String>,
    /// Transition history place of each transition.
    pub thp: BTreeMap<String, String>,
    /// Connection history place of each unordered pair.
    pub chp: Vec<PairPlace>,
    /// Counter places of structurally dependent pairs.
    pub shp: BTreeSet<String>,
    /// Counter places of co-backward-conflicted pairs.
    pub bhp: BTreeSet<String>,
    /// Reverse transition of each transition.
    pub reverses: BTreeMap<String, String>,
    /// Partners whose counters the guard of each reverse transition inspects.
    pub guard_partners: BTreeMap<String, Vec<String>>,
}

impl TranslationLayout {
    /// The 1-based triple index of a transition.
    pub fn index_of(&self, t: &str) -> Option<u32> {
        self.transitions.iter().position(|x| x == t).map(|i| i as u32 + 1)
    }

    pub fn pair_place(&self, a: &str, b: &str) -> Option<&str> {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        self.chp
            .iter()
            .find(|pp| pp.first == x && pp.second == y)
            .map(|pp| pp.place.as_str())
    }

    /// Forward transition for a CPN transition name, if it is one.
    pub fn forward_of<'a>(&'a self, cpn_transition: &str) -> Option<&'a str> {
        self.transitions
            .iter()
            .find(|t| *t == cpn_transition)
            .map(String::as_str)
    }

    /// Net transition undone by a reverse CPN transition.
    pub fn reversed_by(&self, cpn_transition: &str) -> Option<&str> {
        self.reverses
            .iter()
            .find(|(_, tr)| *tr == cpn_transition)
            .map(|(t, _)| t.as_str())
    }
}

/// A generated net with its layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translation {
    pub cpn: CpnNet,
    pub layout: TranslationLayout,
}

fn bond_of(net: &NetDef, b: Bond) -> BondName {
    let (x, y) = b.endpoints();
    bond_name(net.base_name(x), net.base_name(y))
}

/// Converts a token set into a molecule value by name.
pub fn molecule_of(net: &NetDef, set: &TokenSet) -> Molecule {
    Molecule {
        bases: set.bases.iter().map(|a| net.base_name(*a).to_string()).collect(),
        bonds: set.bonds.iter().map(|b| bond_of(net, *b)).collect(),
    }
}

fn hist_name(a: &str, b: &str) -> String {
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    format!("hist_{x}_{y}")
}

struct Names<'a> {
    net: &'a NetDef,
    taken: BTreeSet<String>,
    vars: BTreeMap<String, (String, ColourSet)>,
}

impl<'a> Names<'a> {
    fn claim(&mut self, name: String) -> Result<String, TranslateError> {
        if self.taken.insert(name.clone()) {
            Ok(name)
        } else {
            Err(TranslateError::NameClash(name))
        }
    }

    fn var(&mut self, name: String, meaning: String, colour: ColourSet) -> Result<String, TranslateError> {
        match self.vars.get(&name) {
            Some((m, _)) if *m != meaning => Err(TranslateError::NameClash(name)),
            Some(_) => Ok(name),
            None => {
                self.vars.insert(name.clone(), (meaning, colour));
                Ok(name)
            }
        }
    }

    fn molecule_var(&mut self, p: &str, a: &str) -> Result<String, TranslateError> {
        self.var(format!("m_{p}_{a}"), format!("m\0{p}\0{a}"), ColourSet::Molecule)
    }

    fn list_var(&mut self, t: &str) -> Result<String, TranslateError> {
        self.var(format!("list_{t}"), format!("l\0{t}"), ColourSet::HistList)
    }

    fn hist_var(&mut self, a: &str, b: &str, bound: u32) -> Result<String, TranslateError> {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        self.var(
            hist_name(a, b),
            format!("h\0{x}\0{y}"),
            ColourSet::BoundInt(bound),
        )
    }

    fn t(&self, t: TransitionId) -> &'a str {
        self.net.transition_name(t)
    }
}

fn arc(place: &str, transition: &str, dir: ArcDir, expr: ArcExpr) -> CpnArc {
    CpnArc {
        place: place.to_string(),
        transition: transition.to_string(),
        dir,
        expr,
    }
}

/// Condition that a molecule variable (or, failing one, the place) contains
/// a bond.
fn bond_check(vars: &BTreeMap<String, String>, place: &str, bond: &BondName) -> Expr {
    let var = vars.get(&bond.0).or_else(|| vars.get(&bond.1));
    match var {
        Some(v) => Expr::Contains(Expr::var(v.clone()).boxed(), TokenRef::Bond(bond.clone())),
        None => Expr::PlaceHas(place.to_string(), TokenRef::Bond(bond.clone())),
    }
}

/// Builds the forward part: net places, history places, and one transition
/// per net transition with guards mirroring the input labels.
pub fn translate_forward(
    net: &NetDef,
    initial: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
) -> Result<(CpnNet, TranslationLayout), TranslateError> {
    if let Some(v) = validate_well_formed(net).first() {
        return Err(TranslateError::NotWellFormed(v.to_string()));
    }
    is_trans_acyclic(net).map_err(|c| TranslateError::NotTransAcyclic(c.text(net)))?;

    let n = net.transition_count();
    let bound = 2 * n as u32;
    let mut names = Names {
        net,
        taken: BTreeSet::new(),
        vars: BTreeMap::new(),
    };
    for p in net.places() {
        names.claim(net.place_name(p).to_string())?;
    }
    for t in net.transitions() {
        names.claim(net.transition_name(t).to_string())?;
    }

    let mut cpn = CpnNet::default();
    let mut layout = TranslationLayout {
        semantics,
        dependence: dep.kind,
        co_guard: CoGuard::default(),
        transitions: net
            .transitions()
            .map(|t| net.transition_name(t).to_string())
            .collect(),
        net_places: net.places().map(|p| net.place_name(p).to_string()).collect(),
        thp: BTreeMap::new(),
        chp: Vec::new(),
        shp: BTreeSet::new(),
        bhp: BTreeSet::new(),
        reverses: BTreeMap::new(),
        guard_partners: BTreeMap::new(),
    };

    for p in net.places() {
        let comps = initial.marking.get(p).components();
        let init = comps
            .iter()
            .map(|c| Expr::Const(Value::Molecule(molecule_of(net, c))))
            .collect();
        cpn.places.insert(
            net.place_name(p).to_string(),
            CpnPlace {
                colour: ColourSet::Molecule,
                init: ArcExpr::Tokens(init),
            },
        );
    }
    for t in net.transitions() {
        let name = names.claim(format!("h_{}", names.t(t)))?;
        cpn.places.insert(
            name.clone(),
            CpnPlace {
                colour: ColourSet::HistList,
                init: ArcExpr::Tokens(vec![Expr::Const(Value::List(BTreeSet::new()))]),
            },
        );
        layout.thp.insert(names.t(t).to_string(), name);
    }
    let str_dep = structural_dependence(net);
    let co_dep = co_backward_conflict(net);
    for ti in net.transitions() {
        for tj in net.transitions().filter(|tj| *tj > ti) {
            let place = names.claim(format!("h_{}_{}", names.t(ti), names.t(tj)))?;
            cpn.places.insert(
                place.clone(),
                CpnPlace {
                    colour: ColourSet::BoundInt(bound),
                    init: ArcExpr::Tokens(vec![Expr::Const(Value::Int(0))]),
                },
            );
            if str_dep.contains(ti, tj) {
                layout.shp.insert(place.clone());
            }
            if co_dep.contains(ti, tj) {
                layout.bhp.insert(place.clone());
            }
            layout.chp.push(PairPlace {
                first: names.t(ti).to_string(),
                second: names.t(tj).to_string(),
                place,
            });
        }
    }

    for t in net.transitions() {
        let tname = names.t(t);
        let i = t.index() as u32 + 1;
        let mut conds = Vec::new();
        let mut all_vars = Vec::new();
        for (p, label) in net.inputs(t) {
            let pname = net.place_name(*p);
            let mut vars = BTreeMap::new();
            for a in &label.bases {
                let aname = net.base_name(*a);
                let v = names.molecule_var(pname, aname)?;
                conds.push(Expr::Contains(
                    Expr::var(v.clone()).boxed(),
                    TokenRef::Base(aname.to_string()),
                ));
                vars.insert(aname.to_string(), v);
            }
            for b in &label.bonds {
                conds.push(bond_check(&vars, pname, &bond_of(net, *b)));
            }
            for a in &label.neg_bases {
                conds.push(Expr::PlaceLacks(
                    pname.to_string(),
                    TokenRef::Base(net.base_name(*a).to_string()),
                ));
            }
            for b in &label.neg_bonds {
                conds.push(Expr::PlaceLacks(
                    pname.to_string(),
                    TokenRef::Bond(bond_of(net, *b)),
                ));
            }
            let taken: Vec<Expr> = vars.values().map(|v| Expr::var(v.clone())).collect();
            all_vars.extend(taken.iter().cloned());
            cpn.arcs
                .push(arc(pname, tname, ArcDir::In, ArcExpr::Tokens(taken)));
        }
        for out in net.outputs(t).values() {
            for b in &out.bonds {
                for (p, in_label) in net.inputs(t) {
                    if !in_label.bonds.contains(b) {
                        conds.push(Expr::PlaceLacks(
                            net.place_name(*p).to_string(),
                            TokenRef::Bond(bond_of(net, *b)),
                        ));
                    }
                }
            }
        }
        for (q, out) in net.outputs(t) {
            let bonds: Vec<BondName> = out.bonds.iter().map(|b| bond_of(net, *b)).collect();
            cpn.arcs.push(arc(
                net.place_name(*q),
                tname,
                ArcDir::Out,
                ArcExpr::ComponentsOf(Expr::AddBonds(Expr::Merge(all_vars.clone()).boxed(), bonds)),
            ));
        }

        let list = names.list_var(tname)?;
        let thp = layout.thp[tname].clone();
        let mut triples = Vec::new();
        for u in net.transitions().filter(|u| *u != t) {
            let hist = names.hist_var(tname, names.t(u), bound)?;
            let place = layout
                .pair_place(tname, names.t(u))
                .expect("pair place")
                .to_string();
            cpn.arcs.push(arc(
                &place,
                tname,
                ArcDir::In,
                ArcExpr::Tokens(vec![Expr::var(hist.clone())]),
            ));
            cpn.arcs.push(arc(
                &place,
                tname,
                ArcDir::Out,
                ArcExpr::Tokens(vec![Expr::Incr(Expr::var(hist.clone()).boxed())]),
            ));
            triples.push((Expr::Incr(Expr::var(hist).boxed()), u.index() as u32 + 1, i));
        }
        if n == 1 {
            triples.push((
                Expr::Incr(Expr::Len(Expr::var(list.clone()).boxed()).boxed()),
                i,
                i,
            ));
        }
        cpn.arcs.push(arc(
            &thp,
            tname,
            ArcDir::In,
            ArcExpr::Tokens(vec![Expr::var(list.clone())]),
        ));
        cpn.arcs.push(arc(
            &thp,
            tname,
            ArcDir::Out,
            ArcExpr::Tokens(vec![Expr::WithTriples {
                list: Expr::var(list).boxed(),
                triples,
            }]),
        ));
        cpn.transitions.insert(
            tname.to_string(),
            CpnTransition {
                guard: Expr::And(conds),
            },
        );
    }

    for (name, (_, colour)) in names.vars {
        cpn.variables.insert(name, colour);
    }
    // Reverse names are reserved up front so `add_reverses` cannot clash.
    for t in net.transitions() {
        let tr = format!("tr_{}", net.transition_name(t));
        if names.taken.contains(&tr) {
            return Err(TranslateError::NameClash(tr));
        }
    }
    Ok((cpn, layout))
}

/// How reverse guards pick counters under co-backward-conflict dependence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoGuard {
    /// Inspect exactly the co-dependent partners, mirroring co-enabledness.
    #[default]
    ByDependence,
    /// Co-independent transitions inspect their co-dependent partners; the
    /// others inspect every partner except structurally dependent ones that
    /// have some co-independent partner. Can disagree with co-enabledness.
    Published,
}

/// Partners whose counters the reverse guard of `t` inspects.
pub fn guard_partners(
    net: &NetDef,
    t: TransitionId,
    semantics: Semantics,
    dep: &DependenceRelation,
    rule: CoGuard,
) -> Vec<TransitionId> {
    let others = net.transitions().filter(move |u| *u != t);
    match (semantics, dep.kind) {
        (Semantics::Backtracking, _) => others.collect(),
        (Semantics::Causal, DependenceKind::CoBackwardConflict) if rule == CoGuard::Published => {
            let ind = dep.independent_transitions(net);
            if ind.contains(&t) {
                others.filter(|u| dep.contains(t, *u)).collect()
            } else {
                let str_dep = structural_dependence(net);
                others
                    .filter(|u| !(str_dep.contains(t, *u) && ind.contains(u)))
                    .collect()
            }
        }
        (Semantics::Causal, _) => others.filter(|u| dep.contains(t, *u)).collect(),
    }
}

/// Adds a reverse transition `tr_t` for every `t`.
pub fn add_reverses(
    net: &NetDef,
    cpn: &mut CpnNet,
    layout: &mut TranslationLayout,
    dep: &DependenceRelation,
) -> Result<(), TranslateError> {
    let rule = layout.co_guard;
    let n = net.transition_count();
    let bound = 2 * n as u32;
    let mut names = Names {
        net,
        taken: cpn.places.keys().chain(cpn.transitions.keys()).cloned().collect(),
        vars: BTreeMap::new(),
    };
    let mut fresh: BTreeMap<String, ColourSet> = BTreeMap::new();
    let mut declare = |name: String, colour: ColourSet| {
        fresh.insert(name.clone(), colour);
        name
    };

    for t in net.transitions() {
        let tname = names.t(t);
        let tr = names.claim(format!("tr_{tname}"))?;
        let i = t.index() as u32 + 1;
        let created: Vec<BondName> = effect_of(net, t).bonds.iter().map(|b| bond_of(net, *b)).collect();
        let mut conds = Vec::new();

        let mut out_vars = BTreeMap::new();
        let mut merged = Vec::new();
        for (q, out) in net.outputs(t) {
            let qname = net.place_name(*q);
            let mut vars = BTreeMap::new();
            for a in &out.bases {
                let aname = net.base_name(*a);
                let v = declare(names.molecule_var(qname, aname)?, ColourSet::Molecule);
                conds.push(Expr::Contains(
                    Expr::var(v.clone()).boxed(),
                    TokenRef::Base(aname.to_string()),
                ));
                vars.insert(aname.to_string(), v);
            }
            for b in &created {
                conds.push(bond_check(&vars, qname, b));
            }
            let taken: Vec<Expr> = vars.values().map(|v| Expr::var(v.clone())).collect();
            merged.extend(taken.iter().cloned());
            cpn.arcs.push(arc(qname, &tr, ArcDir::In, ArcExpr::Tokens(taken)));
            out_vars.extend(vars);
        }
        for (p, in_label) in net.inputs(t) {
            let mut back = Vec::new();
            for a in &in_label.bases {
                let aname = net.base_name(*a);
                if net.outputs(t).values().any(|o| o.bases.contains(a)) {
                    back.push(Expr::BreakComponent {
                        molecule: Expr::Merge(merged.clone()).boxed(),
                        remove: created.clone(),
                        base: aname.to_string(),
                    });
                }
            }
            cpn.arcs
                .push(arc(net.place_name(*p), &tr, ArcDir::Out, ArcExpr::Tokens(back)));
        }

        let list_i = declare(format!("list_{tname}"), ColourSet::HistList);
        conds.push(Expr::NonEmpty(Expr::var(list_i.clone()).boxed()));
        let partners = guard_partners(net, t, layout.semantics, dep, rule);
        for u in &partners {
            let hist = declare(hist_name(tname, names.t(*u)), ColourSet::BoundInt(bound));
            conds.push(Expr::HasTriple {
                list: Expr::var(list_i.clone()).boxed(),
                n: Expr::var(hist).boxed(),
                j: u.index() as u32 + 1,
                i,
            });
        }
        layout.guard_partners.insert(
            tr.clone(),
            partners.iter().map(|u| names.t(*u).to_string()).collect(),
        );

        let thp_i = layout.thp[tname].clone();
        cpn.arcs.push(arc(
            &thp_i,
            &tr,
            ArcDir::In,
            ArcExpr::Tokens(vec![Expr::var(list_i.clone())]),
        ));
        cpn.arcs.push(arc(
            &thp_i,
            &tr,
            ArcDir::Out,
            ArcExpr::Tokens(vec![Expr::DropLastPerPartner(Expr::var(list_i.clone()).boxed())]),
        ));
        for u in net.transitions().filter(|u| *u != t) {
            let uname = names.t(u);
            let j = u.index() as u32 + 1;
            let list_j = declare(format!("list_{uname}"), ColourSet::HistList);
            let thp_j = layout.thp[uname].clone();
            cpn.arcs.push(arc(
                &thp_j,
                &tr,
                ArcDir::In,
                ArcExpr::Tokens(vec![Expr::var(list_j.clone())]),
            ));
            cpn.arcs.push(arc(
                &thp_j,
                &tr,
                ArcDir::Out,
                ArcExpr::Tokens(vec![Expr::ShiftAfter {
                    list: Expr::var(list_j).boxed(),
                    partner: i,
                    pivot: Expr::LastPosition {
                        list: Expr::var(list_i.clone()).boxed(),
                        partner: j,
                    }
                    .boxed(),
                }]),
            ));
            let hist = declare(hist_name(tname, uname), ColourSet::BoundInt(bound));
            let place = layout.pair_place(tname, uname).expect("pair place").to_string();
            cpn.arcs.push(arc(
                &place,
                &tr,
                ArcDir::In,
                ArcExpr::Tokens(vec![Expr::var(hist.clone())]),
            ));
            cpn.arcs.push(arc(
                &place,
                &tr,
                ArcDir::Out,
                ArcExpr::Tokens(vec![Expr::Decr(Expr::var(hist).boxed())]),
            ));
        }
        cpn.transitions.insert(
            tr.clone(),
            CpnTransition {
                guard: Expr::And(conds),
            },
        );
        layout.reverses.insert(tname.to_string(), tr);
    }
    for (name, colour) in fresh {
        match cpn.variables.get(&name) {
            Some(c) if *c != colour => return Err(TranslateError::NameClash(name)),
            _ => {
                cpn.variables.insert(name, colour);
            }
        }
    }
    Ok(())
}

/// Forward part plus reverse transitions.
///
/// ```
/// use revnets::{analysis, fixtures, translate};
/// use revnets::reversing::Semantics;
///
/// let (net, s0) = fixtures::figure1();
/// let dep = analysis::structural_dependence(&net);
/// let tr = translate::translate(&net, &s0, Semantics::Backtracking, &dep).unwrap();
/// assert_eq!(tr.cpn.places.len(), 7 + 4 + 6);
/// assert_eq!(tr.cpn.transitions.len(), 8);
/// ```
pub fn translate(
    net: &NetDef,
    initial: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
) -> Result<Translation, TranslateError> {
    translate_with(net, initial, semantics, dep, CoGuard::default())
}

/// [`translate`] with an explicit reverse-guard rule.
pub fn translate_with(
    net: &NetDef,
    initial: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
    co_guard: CoGuard,
) -> Result<Translation, TranslateError> {
    let (mut cpn, mut layout) = translate_forward(net, initial, semantics, dep)?;
    layout.co_guard = co_guard;
    add_reverses(net, &mut cpn, &mut layout, dep)?;
    Ok(Translation { cpn, layout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::dependence;
    use crate::cpn::{HistTriple, Value};
    use crate::fixtures;

    fn build(
        f: fn() -> (NetDef, State),
        sem: Semantics,
        kind: DependenceKind,
    ) -> (NetDef, State, Translation) {
        let (net, s0) = f();
        let dep = dependence(&net, &s0, kind).unwrap();
        let tr = translate(&net, &s0, sem, &dep).unwrap();
        (net, s0, tr)
    }

    #[test]
    fn place_counts() {
        for f in fixtures::trans_acyclic() {
            let (net, s0) = (f.build)();
            let dep = structural_dependence(&net);
            let (cpn, layout) = translate_forward(&net, &s0, Semantics::Backtracking, &dep).unwrap();
            let n = net.transition_count();
            assert_eq!(
                cpn.places.len(),
                net.place_count() + n + n * (n - 1) / 2,
                "{}",
                f.name
            );
            assert_eq!(layout.thp.len(), n);
            assert_eq!(layout.chp.len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn single_transition_has_no_pair_places() {
        let (_, _, tr) = build(
            fixtures::single,
            Semantics::Backtracking,
            DependenceKind::Structural,
        );
        assert_eq!(tr.layout.thp.len(), 1);
        assert!(tr.layout.chp.is_empty());
    }

    #[test]
    fn figure2_structure() {
        let (_, _, tr) = build(
            fixtures::figure2,
            Semantics::Backtracking,
            DependenceKind::Structural,
        );
        assert!(tr.cpn.places.contains_key("h_t1"));
        assert!(tr.cpn.places.contains_key("h_t1_t2"));
        assert!(tr.cpn.transitions.contains_key("tr_t1"));
        assert_eq!(tr.layout.reversed_by("tr_t1"), Some("t1"));
    }

    #[test]
    fn not_trans_acyclic_is_rejected() {
        let (net, s0) = fixtures::transport_loop();
        let dep = structural_dependence(&net);
        assert!(matches!(
            translate(&net, &s0, Semantics::Backtracking, &dep),
            Err(TranslateError::NotTransAcyclic(_))
        ));
    }

    #[test]
    fn figure1_t1_has_one_binding() {
        let (_, _, tr) = build(
            fixtures::figure1,
            Semantics::Backtracking,
            DependenceKind::Structural,
        );
        let m0 = tr.cpn.initial_marking().unwrap();
        let bs = tr.cpn.enabled_bindings(&m0, "t1").unwrap();
        assert_eq!(bs.len(), 1);
        let b = &bs[0];
        assert_eq!(b["m_p1_a"].to_string(), "{a}");
        assert_eq!(b["hist_t1_t2"], Value::Int(0));
        assert_eq!(b["list_t1"], Value::List(BTreeSet::new()));
        assert!(!tr.cpn.is_enabled(&m0, "t3").unwrap());
    }

    #[test]
    fn figure1_t3_fires_into_p5() {
        let (_, _, tr) = build(
            fixtures::figure1,
            Semantics::Backtracking,
            DependenceKind::Structural,
        );
        let mut m = tr.cpn.initial_marking().unwrap();
        for t in ["t1", "t2", "t3"] {
            let b = tr.cpn.enabled_bindings(&m, t).unwrap().remove(0);
            m = tr.cpn.fire(&m, t, &b).unwrap();
        }
        assert_eq!(
            m["p5"].iter().map(ToString::to_string).collect::<Vec<_>>(),
            ["{a,b,a-b}"]
        );
        let Value::List(h3) = m["h_t3"].iter().next().unwrap().clone() else {
            panic!()
        };
        assert_eq!(
            h3,
            BTreeSet::from([
                HistTriple::new(2, 1, 3),
                HistTriple::new(2, 2, 3),
                HistTriple::new(1, 4, 3)
            ])
        );
        assert_eq!(m["h_t1_t3"], BTreeSet::from([Value::Int(2)]));
        assert_eq!(m["h_t3_t4"], BTreeSet::from([Value::Int(1)]));
    }

    #[test]
    fn figure2_reverse_splits_molecule() {
        let (_, _, tr) = build(
            fixtures::figure2,
            Semantics::Backtracking,
            DependenceKind::Structural,
        );
        let m0 = tr.cpn.initial_marking().unwrap();
        let b = tr.cpn.enabled_bindings(&m0, "t1").unwrap().remove(0);
        let m1 = tr.cpn.fire(&m0, "t1", &b).unwrap();
        let b = tr.cpn.enabled_bindings(&m1, "tr_t1").unwrap().remove(0);
        let back = tr.cpn.fire(&m1, "tr_t1", &b).unwrap();
        assert_eq!(back, m0);
    }

    #[test]
    fn guard_partner_sets() {
        let (net, s0) = fixtures::figure1();
        let t = |n| net.transition(n).unwrap();
        let str_dep = structural_dependence(&net);
        let names = |v: Vec<TransitionId>| v.into_iter().map(|u| net.transition_name(u)).collect::<Vec<_>>();
        let rule = CoGuard::ByDependence;
        assert_eq!(
            names(guard_partners(
                &net,
                t("t1"),
                Semantics::Backtracking,
                &str_dep,
                rule
            )),
            ["t2", "t3", "t4"]
        );
        assert_eq!(
            names(guard_partners(&net, t("t1"), Semantics::Causal, &str_dep, rule)),
            ["t3"]
        );
        let co = dependence(&net, &s0, DependenceKind::CoBackwardConflict).unwrap();
        assert!(guard_partners(&net, t("t3"), Semantics::Causal, &co, rule).is_empty());
    }
}
