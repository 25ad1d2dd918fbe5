//! Data model for reversing Petri nets.
//!
//! A net is the tuple of places, transitions, bases, bonds and labelled arcs.
//! Names are resolved once, at construction time, into dense numeric ids; every
//! id type orders the same way as the names it stands for, so iterating any of
//! the sets below is lexicographic by name.
//!
//! Markings assign each place a [`TokenSet`] (bases plus bonds between them) and
//! histories assign each transition the global indices of its live occurrences.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub(crate) u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

dense_id!(
    /// A place of a [`NetDef`].
    PlaceId
);
dense_id!(
    /// A transition of a [`NetDef`].
    TransitionId
);
dense_id!(
    /// A base (token type) of a [`NetDef`].
    BaseId
);

/// An undirected bond between two distinct bases, stored with its endpoints
/// in ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bond {
    lo: BaseId,
    hi: BaseId,
}

impl Bond {
    /// Returns `None` when both endpoints are the same base.
    pub fn new(a: BaseId, b: BaseId) -> Option<Bond> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Bond { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(Bond { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn endpoints(self) -> (BaseId, BaseId) {
        (self.lo, self.hi)
    }

    pub fn touches(self, base: BaseId) -> bool {
        self.lo == base || self.hi == base
    }

    /// The endpoint opposite to `base`, if `base` is an endpoint.
    pub fn other(self, base: BaseId) -> Option<BaseId> {
        if self.lo == base {
            Some(self.hi)
        } else if self.hi == base {
            Some(self.lo)
        } else {
            None
        }
    }
}

/// A set of bases and bonds: the content of a place, a molecule, or any
/// subset of `A ∪ B`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenSet {
    pub bases: BTreeSet<BaseId>,
    pub bonds: BTreeSet<Bond>,
}

impl TokenSet {
    pub fn new() -> TokenSet {
        TokenSet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty() && self.bonds.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bases.len() + self.bonds.len()
    }

    pub fn contains_base(&self, base: BaseId) -> bool {
        self.bases.contains(&base)
    }

    pub fn contains_bond(&self, bond: Bond) -> bool {
        self.bonds.contains(&bond)
    }

    pub fn extend(&mut self, other: &TokenSet) {
        self.bases.extend(other.bases.iter().copied());
        self.bonds.extend(other.bonds.iter().copied());
    }

    pub fn union(&self, other: &TokenSet) -> TokenSet {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn remove_all(&mut self, other: &TokenSet) {
        self.bases.retain(|b| !other.bases.contains(b));
        self.bonds.retain(|b| !other.bonds.contains(b));
    }

    pub fn difference(&self, other: &TokenSet) -> TokenSet {
        let mut out = self.clone();
        out.remove_all(other);
        out
    }

    pub fn intersection(&self, other: &TokenSet) -> TokenSet {
        TokenSet {
            bases: self.bases.intersection(&other.bases).copied().collect(),
            bonds: self.bonds.intersection(&other.bonds).copied().collect(),
        }
    }

    /// Every bond has both of its endpoints in the set.
    pub fn is_bond_closed(&self) -> bool {
        self.bonds.iter().all(|b| {
            let (x, y) = b.endpoints();
            self.bases.contains(&x) && self.bases.contains(&y)
        })
    }

    /// Splits the set into its connected components, ordered by least base.
    /// Bonds whose endpoints are missing are dropped.
    pub fn components(&self) -> Vec<TokenSet> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &base in &self.bases {
            if seen.contains(&base) {
                continue;
            }
            let comp = con(base, self);
            seen.extend(comp.bases.iter().copied());
            out.push(comp);
        }
        out
    }
}

/// The connected component of `base` inside `set`: the base itself, every base
/// reachable through chains of bonds contained in `set`, and the bonds on those
/// chains. Empty when `base` is not in `set`.
pub fn con(base: BaseId, set: &TokenSet) -> TokenSet {
    let mut out = TokenSet::new();
    if !set.bases.contains(&base) {
        return out;
    }
    let mut stack = vec![base];
    out.bases.insert(base);
    while let Some(current) = stack.pop() {
        for bond in set.bonds.iter().filter(|b| b.touches(current)) {
            let next = bond.other(current).expect("bond touches current");
            if !set.bases.contains(&next) {
                continue;
            }
            out.bonds.insert(*bond);
            if out.bases.insert(next) {
                stack.push(next);
            }
        }
    }
    out
}

/// The label of an arc: required bases and bonds together with the
/// negative instances whose absence is required.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ArcLabel {
    pub bases: BTreeSet<BaseId>,
    pub neg_bases: BTreeSet<BaseId>,
    pub bonds: BTreeSet<Bond>,
    pub neg_bonds: BTreeSet<Bond>,
}

impl ArcLabel {
    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
            && self.neg_bases.is_empty()
            && self.bonds.is_empty()
            && self.neg_bonds.is_empty()
    }

    /// The positive part of the label, as a token set.
    pub fn positive(&self) -> TokenSet {
        TokenSet {
            bases: self.bases.clone(),
            bonds: self.bonds.clone(),
        }
    }

    pub fn extend(&mut self, other: &ArcLabel) {
        self.bases.extend(other.bases.iter().copied());
        self.neg_bases.extend(other.neg_bases.iter().copied());
        self.bonds.extend(other.bonds.iter().copied());
        self.neg_bonds.extend(other.neg_bonds.iter().copied());
    }

    /// Component-wise set difference.
    pub fn difference(&self, other: &ArcLabel) -> ArcLabel {
        ArcLabel {
            bases: self.bases.difference(&other.bases).copied().collect(),
            neg_bases: self.neg_bases.difference(&other.neg_bases).copied().collect(),
            bonds: self.bonds.difference(&other.bonds).copied().collect(),
            neg_bonds: self.neg_bonds.difference(&other.neg_bonds).copied().collect(),
        }
    }
}

/// Reference to either kind of net node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Place(PlaceId),
    Transition(TransitionId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("invalid identifier {0:?}")]
    InvalidName(String),
    #[error("identifier {0:?} is declared more than once")]
    Duplicate(String),
    #[error("unknown place {0:?}")]
    UnknownPlace(String),
    #[error("unknown transition {0:?}")]
    UnknownTransition(String),
    #[error("unknown base {0:?}")]
    UnknownBase(String),
    #[error("bond {0} is not declared")]
    UndeclaredBond(String),
    #[error("bond {0:?}-{0:?} joins a base to itself")]
    SelfBond(String),
    #[error("arc {from} -> {to} must connect a place and a transition")]
    BadArcEnds { from: String, to: String },
    #[error("arc {from} -> {to} is declared more than once")]
    DuplicateArc { from: String, to: String },
    #[error("arc {from} -> {to} has an empty label")]
    EmptyArc { from: String, to: String },
    #[error("arc {from} -> {to} both requires and forbids {item}")]
    ConflictingLabel { from: String, to: String, item: String },
    #[error("cannot parse label element {0:?}")]
    BadLabel(String),
    #[error("place {place} holds bond {bond} without both of its bases")]
    NotBondClosed { place: String, bond: String },
    #[error("base {base} occurs in {count} places of the initial marking, expected exactly one")]
    BaseNotUnique { base: String, count: usize },
}

/// A reversing Petri net `(P, T, F, A, B)`.
///
/// Immutable once built; construct through [`NetBuilder`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetDef {
    places: Vec<String>,
    transitions: Vec<String>,
    bases: Vec<String>,
    bonds: BTreeSet<Bond>,
    inputs: Vec<BTreeMap<PlaceId, ArcLabel>>,
    outputs: Vec<BTreeMap<PlaceId, ArcLabel>>,
    names: HashMap<String, NameRef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NameRef {
    Place(PlaceId),
    Transition(TransitionId),
    Base(BaseId),
}

impl NetDef {
    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn base_count(&self) -> usize {
        self.bases.len()
    }

    pub fn places(&self) -> impl ExactSizeIterator<Item = PlaceId> + Clone {
        (0..self.places.len() as u32).map(PlaceId)
    }

    pub fn transitions(&self) -> impl ExactSizeIterator<Item = TransitionId> + Clone {
        (0..self.transitions.len() as u32).map(TransitionId)
    }

    pub fn bases(&self) -> impl ExactSizeIterator<Item = BaseId> + Clone {
        (0..self.bases.len() as u32).map(BaseId)
    }

    pub fn bonds(&self) -> &BTreeSet<Bond> {
        &self.bonds
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.index()]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.index()]
    }

    pub fn base_name(&self, a: BaseId) -> &str {
        &self.bases[a.index()]
    }

    pub fn bond_name(&self, b: Bond) -> String {
        let (x, y) = b.endpoints();
        format!("{}-{}", self.base_name(x), self.base_name(y))
    }

    pub fn node_name(&self, n: Node) -> &str {
        match n {
            Node::Place(p) => self.place_name(p),
            Node::Transition(t) => self.transition_name(t),
        }
    }

    pub fn place(&self, name: &str) -> Option<PlaceId> {
        match self.names.get(name) {
            Some(NameRef::Place(p)) => Some(*p),
            _ => None,
        }
    }

    pub fn transition(&self, name: &str) -> Option<TransitionId> {
        match self.names.get(name) {
            Some(NameRef::Transition(t)) => Some(*t),
            _ => None,
        }
    }

    pub fn base(&self, name: &str) -> Option<BaseId> {
        match self.names.get(name) {
            Some(NameRef::Base(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn bond(&self, a: &str, b: &str) -> Option<Bond> {
        let bond = Bond::new(self.base(a)?, self.base(b)?)?;
        self.bonds.contains(&bond).then_some(bond)
    }

    pub fn contains_transition(&self, t: TransitionId) -> bool {
        t.index() < self.transitions.len()
    }

    /// Resolves a transition name or returns [`NetError::UnknownTransition`].
    pub fn require_transition(&self, name: &str) -> Result<TransitionId, NetError> {
        self.transition(name)
            .ok_or_else(|| NetError::UnknownTransition(name.to_string()))
    }

    /// Input arcs of `t`, keyed by place: `F(p, t)` for every `p ∈ •t`.
    pub fn inputs(&self, t: TransitionId) -> &BTreeMap<PlaceId, ArcLabel> {
        &self.inputs[t.index()]
    }

    /// Output arcs of `t`, keyed by place: `F(t, p)` for every `p ∈ t•`.
    pub fn outputs(&self, t: TransitionId) -> &BTreeMap<PlaceId, ArcLabel> {
        &self.outputs[t.index()]
    }

    pub fn preset(&self, t: TransitionId) -> impl Iterator<Item = PlaceId> + '_ {
        self.inputs[t.index()].keys().copied()
    }

    pub fn postset(&self, t: TransitionId) -> impl Iterator<Item = PlaceId> + '_ {
        self.outputs[t.index()].keys().copied()
    }

    /// `F(p, t)`, or `None` when there is no arc.
    pub fn input_label(&self, p: PlaceId, t: TransitionId) -> Option<&ArcLabel> {
        self.inputs[t.index()].get(&p)
    }

    /// `F(t, p)`, or `None` when there is no arc.
    pub fn output_label(&self, t: TransitionId, p: PlaceId) -> Option<&ArcLabel> {
        self.outputs[t.index()].get(&p)
    }

    /// The unique output place of a well-formed transition.
    pub fn output_place(&self, t: TransitionId) -> Option<PlaceId> {
        let mut outs = self.postset(t);
        let first = outs.next()?;
        outs.next().is_none().then_some(first)
    }

    /// All arcs as `(from, to, label)` triples, place-to-transition arcs first.
    pub fn arcs(&self) -> impl Iterator<Item = (Node, Node, &ArcLabel)> + '_ {
        let ins = self.transitions().flat_map(move |t| {
            self.inputs(t)
                .iter()
                .map(move |(p, l)| (Node::Place(*p), Node::Transition(t), l))
        });
        let outs = self.transitions().flat_map(move |t| {
            self.outputs(t)
                .iter()
                .map(move |(p, l)| (Node::Transition(t), Node::Place(*p), l))
        });
        ins.chain(outs)
    }

    /// Renders a label in the textual syntax accepted by [`NetBuilder::arc`].
    pub fn label_text(&self, label: &ArcLabel) -> String {
        let mut parts: Vec<String> = Vec::new();
        parts.extend(label.bases.iter().map(|b| self.base_name(*b).to_string()));
        parts.extend(label.bonds.iter().map(|b| self.bond_name(*b)));
        parts.extend(label.neg_bases.iter().map(|b| format!("!{}", self.base_name(*b))));
        parts.extend(label.neg_bonds.iter().map(|b| format!("!{}", self.bond_name(*b))));
        parts.join(", ")
    }

    pub fn token_set_text(&self, set: &TokenSet) -> String {
        let mut parts: Vec<String> = Vec::new();
        parts.extend(set.bases.iter().map(|b| self.base_name(*b).to_string()));
        parts.extend(set.bonds.iter().map(|b| self.bond_name(*b)));
        format!("{{{}}}", parts.join(", "))
    }

    /// Parses a token set written as in arc labels, without negations:
    /// `"a, b, a-b"`.
    pub fn parse_token_set(&self, text: &str) -> Result<TokenSet, NetError> {
        let label = parse_label(
            text,
            |n| self.base(n),
            |a, b| self.bond(a, b),
            |a, b| {
                if self.base(a).is_some() && self.base(b).is_some() {
                    NetError::UndeclaredBond(format!("{a}-{b}"))
                } else {
                    NetError::UnknownBase(if self.base(a).is_none() { a } else { b }.to_string())
                }
            },
        )?;
        if !label.neg_bases.is_empty() || !label.neg_bonds.is_empty() {
            return Err(NetError::BadLabel(text.to_string()));
        }
        Ok(label.positive())
    }

    /// Builds a marking from `(place, tokens)` pairs; unlisted places are empty.
    pub fn marking<'a, I>(&self, entries: I) -> Result<Marking, NetError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut marking = Marking::empty(self);
        for (place, tokens) in entries {
            let p = self
                .place(place)
                .ok_or_else(|| NetError::UnknownPlace(place.to_string()))?;
            let set = self.parse_token_set(tokens)?;
            marking.places[p.index()].extend(&set);
        }
        marking.check_bond_closed(self)?;
        Ok(marking)
    }

    /// Checks the initial-marking requirement that every base occurs in
    /// exactly one place, in addition to bond closure.
    pub fn check_initial_marking(&self, marking: &Marking) -> Result<(), NetError> {
        marking.check_bond_closed(self)?;
        for a in self.bases() {
            let count = marking.places.iter().filter(|s| s.contains_base(a)).count();
            if count != 1 {
                return Err(NetError::BaseNotUnique {
                    base: self.base_name(a).to_string(),
                    count,
                });
            }
        }
        Ok(())
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | ':' | '\'' | '#' | '@'))
}

fn parse_label<B, D, E>(text: &str, base: B, bond: D, bond_err: E) -> Result<ArcLabel, NetError>
where
    B: Fn(&str) -> Option<BaseId>,
    D: Fn(&str, &str) -> Option<Bond>,
    E: Fn(&str, &str) -> NetError,
{
    let mut label = ArcLabel::default();
    for raw in text.split(|c: char| c == ',' || c.is_whitespace()) {
        if raw.is_empty() {
            continue;
        }
        let (negated, item) = match raw.strip_prefix('!') {
            Some(rest) => (true, rest),
            None => (false, raw),
        };
        if let Some((a, b)) = item.split_once('-') {
            if !valid_name(a) || !valid_name(b) {
                return Err(NetError::BadLabel(raw.to_string()));
            }
            let bond = bond(a, b).ok_or_else(|| bond_err(a, b))?;
            if negated {
                label.neg_bonds.insert(bond);
            } else {
                label.bonds.insert(bond);
            }
        } else {
            if !valid_name(item) {
                return Err(NetError::BadLabel(raw.to_string()));
            }
            let a = base(item).ok_or_else(|| NetError::UnknownBase(item.to_string()))?;
            if negated {
                label.neg_bases.insert(a);
            } else {
                label.bases.insert(a);
            }
        }
    }
    Ok(label)
}

/// Name-level description of an arc label, used by [`NetBuilder::arc_items`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelSpec {
    pub bases: Vec<String>,
    pub neg_bases: Vec<String>,
    pub bonds: Vec<(String, String)>,
    pub neg_bonds: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
enum PendingLabel {
    Text(String),
    Spec(LabelSpec),
}

/// Incremental construction of a [`NetDef`] from names.
///
/// ```
/// use revnets::net::NetBuilder;
///
/// let net = NetBuilder::new()
///     .places(["p1", "p2", "p3"])
///     .transitions(["t1"])
///     .bases(["a", "b"])
///     .bond("a", "b")
///     .arc("p1", "t1", "a, !a-b")
///     .arc("p2", "t1", "b")
///     .arc("t1", "p3", "a, b, a-b")
///     .build()
///     .unwrap();
/// assert_eq!(net.transition_count(), 1);
/// ```
#[derive(Clone, Debug, Default)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<String>,
    bases: Vec<String>,
    bonds: Vec<(String, String)>,
    arcs: Vec<(String, String, PendingLabel)>,
}

impl NetBuilder {
    pub fn new() -> NetBuilder {
        NetBuilder::default()
    }

    pub fn place(mut self, name: impl Into<String>) -> Self {
        self.places.push(name.into());
        self
    }

    pub fn places<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.places.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn transition(mut self, name: impl Into<String>) -> Self {
        self.transitions.push(name.into());
        self
    }

    pub fn transitions<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.transitions.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn base(mut self, name: impl Into<String>) -> Self {
        self.bases.push(name.into());
        self
    }

    pub fn bases<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.bases.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn bond(mut self, a: impl Into<String>, b: impl Into<String>) -> Self {
        self.bonds.push((a.into(), b.into()));
        self
    }

    /// Adds an arc with a textual label such as `"a, b, a-b, !c, !b-c"`.
    pub fn arc(mut self, from: impl Into<String>, to: impl Into<String>, label: &str) -> Self {
        self.arcs
            .push((from.into(), to.into(), PendingLabel::Text(label.to_string())));
        self
    }

    /// Adds an arc whose label is given element by element.
    pub fn arc_items(mut self, from: impl Into<String>, to: impl Into<String>, label: LabelSpec) -> Self {
        self.arcs
            .push((from.into(), to.into(), PendingLabel::Spec(label)));
        self
    }

    pub fn build(self) -> Result<NetDef, NetError> {
        let mut names: HashMap<String, NameRef> = HashMap::new();
        let places = sorted_unique(self.places)?;
        let transitions = sorted_unique(self.transitions)?;
        let bases = sorted_unique(self.bases)?;
        for (i, n) in places.iter().enumerate() {
            register(&mut names, n, NameRef::Place(PlaceId(i as u32)))?;
        }
        for (i, n) in transitions.iter().enumerate() {
            register(&mut names, n, NameRef::Transition(TransitionId(i as u32)))?;
        }
        for (i, n) in bases.iter().enumerate() {
            register(&mut names, n, NameRef::Base(BaseId(i as u32)))?;
        }
        let base_of = |n: &str| match names.get(n) {
            Some(NameRef::Base(b)) => Some(*b),
            _ => None,
        };

        let mut bonds = BTreeSet::new();
        for (a, b) in &self.bonds {
            let x = base_of(a).ok_or_else(|| NetError::UnknownBase(a.clone()))?;
            let y = base_of(b).ok_or_else(|| NetError::UnknownBase(b.clone()))?;
            let bond = Bond::new(x, y).ok_or_else(|| NetError::SelfBond(a.clone()))?;
            if !bonds.insert(bond) {
                return Err(NetError::Duplicate(format!("{a}-{b}")));
            }
        }

        let bond_of = |a: &str, b: &str| {
            let bond = Bond::new(base_of(a)?, base_of(b)?)?;
            bonds.contains(&bond).then_some(bond)
        };
        let bond_err = |a: &str, b: &str| match (base_of(a), base_of(b)) {
            (Some(_), Some(_)) => NetError::UndeclaredBond(format!("{a}-{b}")),
            (None, _) => NetError::UnknownBase(a.to_string()),
            (_, None) => NetError::UnknownBase(b.to_string()),
        };

        let mut inputs = vec![BTreeMap::new(); transitions.len()];
        let mut outputs = vec![BTreeMap::new(); transitions.len()];
        for (from, to, pending) in self.arcs {
            let label = match pending {
                PendingLabel::Text(text) => parse_label(&text, base_of, bond_of, bond_err)?,
                PendingLabel::Spec(spec) => {
                    let mut label = ArcLabel::default();
                    for n in &spec.bases {
                        label
                            .bases
                            .insert(base_of(n).ok_or_else(|| NetError::UnknownBase(n.clone()))?);
                    }
                    for n in &spec.neg_bases {
                        label
                            .neg_bases
                            .insert(base_of(n).ok_or_else(|| NetError::UnknownBase(n.clone()))?);
                    }
                    for (a, b) in &spec.bonds {
                        label.bonds.insert(bond_of(a, b).ok_or_else(|| bond_err(a, b))?);
                    }
                    for (a, b) in &spec.neg_bonds {
                        label
                            .neg_bonds
                            .insert(bond_of(a, b).ok_or_else(|| bond_err(a, b))?);
                    }
                    label
                }
            };
            if label.is_empty() {
                return Err(NetError::EmptyArc { from, to });
            }
            if let Some(a) = label.bases.intersection(&label.neg_bases).next() {
                let item = bases[a.index()].clone();
                return Err(NetError::ConflictingLabel { from, to, item });
            }
            if let Some(b) = label.bonds.intersection(&label.neg_bonds).next() {
                let (x, y) = b.endpoints();
                let item = format!("{}-{}", bases[x.index()], bases[y.index()]);
                return Err(NetError::ConflictingLabel { from, to, item });
            }
            let slot = match (names.get(&from), names.get(&to)) {
                (Some(NameRef::Place(p)), Some(NameRef::Transition(t))) => inputs[t.index()].entry(*p),
                (Some(NameRef::Transition(t)), Some(NameRef::Place(p))) => outputs[t.index()].entry(*p),
                (None, _) => return Err(unknown_node(&from)),
                (_, None) => return Err(unknown_node(&to)),
                _ => return Err(NetError::BadArcEnds { from, to }),
            };
            match slot {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(label);
                }
                std::collections::btree_map::Entry::Occupied(_) => {
                    return Err(NetError::DuplicateArc { from, to })
                }
            }
        }

        Ok(NetDef {
            places,
            transitions,
            bases,
            bonds,
            inputs,
            outputs,
            names,
        })
    }
}

fn unknown_node(name: &str) -> NetError {
    if name.starts_with('t') {
        NetError::UnknownTransition(name.to_string())
    } else {
        NetError::UnknownPlace(name.to_string())
    }
}

fn sorted_unique(mut names: Vec<String>) -> Result<Vec<String>, NetError> {
    for n in &names {
        if !valid_name(n) {
            return Err(NetError::InvalidName(n.clone()));
        }
    }
    names.sort();
    for w in names.windows(2) {
        if w[0] == w[1] {
            return Err(NetError::Duplicate(w[0].clone()));
        }
    }
    Ok(names)
}

fn register(names: &mut HashMap<String, NameRef>, name: &str, r: NameRef) -> Result<(), NetError> {
    if names.insert(name.to_string(), r).is_some() {
        return Err(NetError::Duplicate(name.to_string()));
    }
    Ok(())
}

/// Distribution of bases and bonds over places.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking {
    places: Vec<TokenSet>,
}

impl Marking {
    pub fn empty(net: &NetDef) -> Marking {
        Marking {
            places: vec![TokenSet::new(); net.place_count()],
        }
    }

    pub fn get(&self, p: PlaceId) -> &TokenSet {
        &self.places[p.index()]
    }

    pub fn get_mut(&mut self, p: PlaceId) -> &mut TokenSet {
        &mut self.places[p.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, &TokenSet)> {
        self.places
            .iter()
            .enumerate()
            .map(|(i, s)| (PlaceId(i as u32), s))
    }

    /// Every base and bond in the marking, regardless of place.
    pub fn all_tokens(&self) -> TokenSet {
        let mut out = TokenSet::new();
        for s in &self.places {
            out.extend(s);
        }
        out
    }

    /// Where `base` currently is.
    pub fn locate(&self, base: BaseId) -> Option<PlaceId> {
        self.iter().find(|(_, s)| s.contains_base(base)).map(|(p, _)| p)
    }

    pub fn check_bond_closed(&self, net: &NetDef) -> Result<(), NetError> {
        for (p, set) in self.iter() {
            for bond in &set.bonds {
                let (x, y) = bond.endpoints();
                if !set.contains_base(x) || !set.contains_base(y) {
                    return Err(NetError::NotBondClosed {
                        place: net.place_name(p).to_string(),
                        bond: net.bond_name(*bond),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Global occurrence indices of the live executions of each transition.
///
/// Each transition holds at most two indices; across the whole history the
/// indices are pairwise distinct and, in every reachable state, form exactly
/// `{1, …, n}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct History {
    entries: Vec<BTreeSet<u32>>,
}

/// Largest number of live occurrences a transition can have.
pub const MAX_OCCURRENCES: usize = 2;

impl History {
    pub fn empty(net: &NetDef) -> History {
        History {
            entries: vec![BTreeSet::new(); net.transition_count()],
        }
    }

    /// Builds a history from explicit index sets; unlisted transitions are empty.
    pub fn from_entries<I>(net: &NetDef, entries: I) -> History
    where
        I: IntoIterator<Item = (TransitionId, Vec<u32>)>,
    {
        let mut h = History::empty(net);
        for (t, ks) in entries {
            h.entries[t.index()].extend(ks);
        }
        h
    }

    pub fn get(&self, t: TransitionId) -> &BTreeSet<u32> {
        &self.entries[t.index()]
    }

    pub(crate) fn get_mut(&mut self, t: TransitionId) -> &mut BTreeSet<u32> {
        &mut self.entries[t.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (TransitionId, &BTreeSet<u32>)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, s)| (TransitionId(i as u32), s))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(BTreeSet::is_empty)
    }

    /// Total number of live occurrences.
    pub fn len(&self) -> usize {
        self.entries.iter().map(BTreeSet::len).sum()
    }

    /// Largest index in `H(t)`.
    pub fn last(&self, t: TransitionId) -> Option<u32> {
        self.entries[t.index()].iter().next_back().copied()
    }

    /// Largest index over all transitions; 0 for the empty history.
    pub fn max_index(&self) -> u32 {
        self.entries
            .iter()
            .filter_map(|s| s.iter().next_back().copied())
            .max()
            .unwrap_or(0)
    }

    /// The transition holding the globally largest index.
    pub fn latest(&self) -> Option<TransitionId> {
        self.iter()
            .filter_map(|(t, s)| s.iter().next_back().map(|k| (*k, t)))
            .max()
            .map(|(_, t)| t)
    }

    /// All indices are distinct and form `{1, …, n}`, and no transition holds
    /// more than two of them.
    pub fn is_well_formed(&self) -> bool {
        if self.entries.iter().any(|s| s.len() > MAX_OCCURRENCES) {
            return false;
        }
        let mut all: Vec<u32> = self.entries.iter().flatten().copied().collect();
        all.sort_unstable();
        all.iter().enumerate().all(|(i, k)| *k == i as u32 + 1)
    }
}

/// A state `⟨M, H⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    pub marking: Marking,
    pub history: History,
}

impl State {
    /// The state with the given marking and the empty history.
    pub fn initial(net: &NetDef, marking: Marking) -> State {
        State {
            marking,
            history: History::empty(net),
        }
    }

    /// Canonical one-line text: non-empty places then non-empty histories, in
    /// id order.
    pub fn canonical(&self, net: &NetDef) -> String {
        let places: Vec<String> = self
            .marking
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(p, s)| format!("{}:{}", net.place_name(p), net.token_set_text(s)))
            .collect();
        let hist: Vec<String> = self
            .history
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(t, s)| {
                let ks: Vec<String> = s.iter().map(u32::to_string).collect();
                format!("{}:{{{}}}", net.transition_name(t), ks.join(","))
            })
            .collect();
        format!("{} | {}", places.join(" "), hist.join(" "))
    }

    pub fn display<'a>(&'a self, net: &'a NetDef) -> StateDisplay<'a> {
        StateDisplay { net, state: self }
    }
}

/// Multi-line rendering of a state: one line per non-empty place, then the
/// history.
pub struct StateDisplay<'a> {
    net: &'a NetDef,
    state: &'a State,
}

impl fmt::Display for StateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let net = self.net;
        for (p, set) in self.state.marking.iter() {
            if !set.is_empty() {
                writeln!(f, "  {}: {}", net.place_name(p), net.token_set_text(set))?;
            }
        }
        let hist: Vec<String> = self
            .state
            .history
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(t, s)| {
                let ks: Vec<String> = s.iter().map(u32::to_string).collect();
                format!("{}={{{}}}", net.transition_name(t), ks.join(","))
            })
            .collect();
        if hist.is_empty() {
            write!(f, "  history: (empty)")
        } else {
            write!(f, "  history: {}", hist.join(" "))
        }
    }
}

/// `guard(t)`: union of the labels on the incoming arcs of `t`.
pub fn guard_of(net: &NetDef, t: TransitionId) -> ArcLabel {
    let mut out = ArcLabel::default();
    for label in net.inputs(t).values() {
        out.extend(label);
    }
    out
}

/// `effects(t)`: union of the labels on the outgoing arcs of `t`.
pub fn effects_of(net: &NetDef, t: TransitionId) -> ArcLabel {
    let mut out = ArcLabel::default();
    for label in net.outputs(t).values() {
        out.extend(label);
    }
    out
}

/// `effect(t) = effects(t) \ guard(t)`; for a well-formed net these are the
/// bonds created by `t`.
pub fn effect_of(net: &NetDef, t: TransitionId) -> ArcLabel {
    effects_of(net, t).difference(&guard_of(net, t))
}

/// Which well-formedness condition a transition violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WellFormedClause {
    /// Bases on incoming and outgoing arcs differ.
    BasesPreserved = 1,
    /// A bond required on input is not reproduced on output.
    BondsPreserved = 2,
    /// No input place, or not exactly one output place.
    SingleOutput = 3,
    /// A created bond joins two bases taken from one place without the bond
    /// or its negation on that arc.
    CreatedBondGuarded = 4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub transition: String,
    pub clause: WellFormedClause,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: clause {}: {}",
            self.transition, self.clause as u8, self.detail
        )
    }
}

/// Reports every violated well-formedness clause, per transition in id order.
pub fn validate_well_formed(net: &NetDef) -> Vec<Violation> {
    let mut out = Vec::new();
    for t in net.transitions() {
        let name = net.transition_name(t).to_string();
        let guard = guard_of(net, t);
        let effects = effects_of(net, t);
        let mut push = |clause, detail: String| {
            out.push(Violation {
                transition: name.clone(),
                clause,
                detail,
            })
        };

        if guard.bases != effects.bases {
            let missing: Vec<&str> = guard
                .bases
                .symmetric_difference(&effects.bases)
                .map(|b| net.base_name(*b))
                .collect();
            push(
                WellFormedClause::BasesPreserved,
                format!("bases {} appear on only one side", missing.join(", ")),
            );
        }
        for bond in guard.bonds.difference(&effects.bonds) {
            push(
                WellFormedClause::BondsPreserved,
                format!("bond {} is required but not produced", net.bond_name(*bond)),
            );
        }
        let ins = net.inputs(t).len();
        let outs = net.outputs(t).len();
        if ins == 0 {
            push(WellFormedClause::SingleOutput, "no input place".to_string());
        }
        if outs != 1 {
            push(
                WellFormedClause::SingleOutput,
                format!("{outs} output places, expected exactly one"),
            );
        }
        for (p, in_label) in net.inputs(t) {
            for out_label in net.outputs(t).values() {
                for bond in &out_label.bonds {
                    let (x, y) = bond.endpoints();
                    let both_here = in_label.bases.contains(&x) && in_label.bases.contains(&y);
                    if both_here && !in_label.bonds.contains(bond) && !in_label.neg_bonds.contains(bond) {
                        push(
                            WellFormedClause::CreatedBondGuarded,
                            format!(
                                "bond {} joins bases taken from {} without {} or its negation on that arc",
                                net.bond_name(*bond),
                                net.place_name(*p),
                                net.bond_name(*bond)
                            ),
                        );
                    }
                }
            }
        }
    }
    out
}
