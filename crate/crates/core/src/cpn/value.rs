use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Colour sets available to generated nets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColourSet {
    Base,
    Bond,
    Bases,
    Bonds,
    Molecule,
    Hist,
    /// A single token holding every history triple of one transition.
    HistList,
    /// Naturals `0..=bound`.
    BoundInt(u32),
}

impl fmt::Display for ColourSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColourSet::Base => f.write_str("Base"),
            ColourSet::Bond => f.write_str("Bond"),
            ColourSet::Bases => f.write_str("Bases"),
            ColourSet::Bonds => f.write_str("Bonds"),
            ColourSet::Molecule => f.write_str("Molecule"),
            ColourSet::Hist => f.write_str("HIST"),
            ColourSet::HistList => f.write_str("HIST list"),
            ColourSet::BoundInt(b) => write!(f, "boundInt({b})"),
        }
    }
}

/// Normalised bond between two named bases (smaller name first).
pub type BondName = (String, String);

pub fn bond_name(a: &str, b: &str) -> BondName {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// A set of bases with bonds among them.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Molecule {
    pub bases: BTreeSet<String>,
    pub bonds: BTreeSet<BondName>,
}

impl Molecule {
    pub fn is_empty(&self) -> bool {
        self.bases.is_empty() && self.bonds.is_empty()
    }

    pub fn is_bond_closed(&self) -> bool {
        self.bonds
            .iter()
            .all(|(a, b)| self.bases.contains(a) && self.bases.contains(b))
    }

    pub fn merge(&mut self, other: &Molecule) {
        self.bases.extend(other.bases.iter().cloned());
        self.bonds.extend(other.bonds.iter().cloned());
    }

    /// The connected component containing `base`; empty if `base` is absent.
    pub fn component(&self, base: &str) -> Molecule {
        let mut out = Molecule::default();
        if !self.bases.contains(base) {
            return out;
        }
        let mut stack = vec![base.to_string()];
        out.bases.insert(base.to_string());
        while let Some(x) = stack.pop() {
            for (a, b) in &self.bonds {
                let next = if *a == x {
                    b
                } else if *b == x {
                    a
                } else {
                    continue;
                };
                if !self.bases.contains(next) {
                    continue;
                }
                out.bonds.insert((a.clone(), b.clone()));
                if out.bases.insert(next.clone()) {
                    stack.push(next.clone());
                }
            }
        }
        out
    }

    /// Splits into connected components, ordered by least base.
    pub fn components(&self) -> Vec<Molecule> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for base in &self.bases {
            if seen.contains(base) {
                continue;
            }
            let comp = self.component(base);
            seen.extend(comp.bases.iter().cloned());
            out.push(comp);
        }
        out
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.bases.iter().cloned().collect();
        parts.extend(self.bonds.iter().map(|(a, b)| format!("{a}-{b}")));
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A history triple `(n, j, i)`: the occurrence of transition `i` was the
/// `n`-th among the occurrences of `i` and `j`. Transition indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HistTriple {
    pub n: u32,
    pub j: u32,
    pub i: u32,
}

impl HistTriple {
    pub fn new(n: u32, j: u32, i: u32) -> HistTriple {
        HistTriple { n, j, i }
    }
}

impl fmt::Display for HistTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.j, self.i)
    }
}

/// A token or an intermediate result of evaluation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Bool(bool),
    Int(i64),
    Base(String),
    Bond(BondName),
    Bases(BTreeSet<String>),
    Bonds(BTreeSet<BondName>),
    Molecule(Molecule),
    Triple(HistTriple),
    List(BTreeSet<HistTriple>),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Base(_) => "base",
            Value::Bond(_) => "bond",
            Value::Bases(_) => "bases",
            Value::Bonds(_) => "bonds",
            Value::Molecule(_) => "molecule",
            Value::Triple(_) => "triple",
            Value::List(_) => "list",
        }
    }

    /// Whether the value is a member of `colour`.
    pub fn has_colour(&self, colour: ColourSet) -> bool {
        match (self, colour) {
            (Value::Base(_), ColourSet::Base) => true,
            (Value::Bond((a, b)), ColourSet::Bond) => a < b,
            (Value::Bases(_), ColourSet::Bases) => true,
            (Value::Bonds(_), ColourSet::Bonds) => true,
            (Value::Molecule(m), ColourSet::Molecule) => m.is_bond_closed() && !m.is_empty(),
            (Value::Triple(t), ColourSet::Hist) => t.n >= 1,
            (Value::List(l), ColourSet::HistList) => l.iter().all(|t| t.n >= 1),
            (Value::Int(v), ColourSet::BoundInt(bound)) => *v >= 0 && *v <= i64::from(bound),
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Base(a) => f.write_str(a),
            Value::Bond((a, b)) => write!(f, "{a}-{b}"),
            Value::Bases(s) => write!(f, "{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(",")),
            Value::Bonds(s) => write!(
                f,
                "{{{}}}",
                s.iter()
                    .map(|(a, b)| format!("{a}-{b}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Value::Molecule(m) => write!(f, "{m}"),
            Value::Triple(t) => write!(f, "{t}"),
            Value::List(l) => write!(
                f,
                "[{}]",
                l.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mol(bases: &[&str], bonds: &[(&str, &str)]) -> Molecule {
        Molecule {
            bases: bases.iter().map(|s| s.to_string()).collect(),
            bonds: bonds.iter().map(|(a, b)| bond_name(a, b)).collect(),
        }
    }

    #[test]
    fn components_split_on_missing_bonds() {
        let m = mol(&["a", "b", "c", "d"], &[("a", "b"), ("c", "d")]);
        let comps = m.components();
        assert_eq!(
            comps,
            vec![mol(&["a", "b"], &[("a", "b")]), mol(&["c", "d"], &[("c", "d")])]
        );
        assert!(m.component("z").is_empty());
    }

    #[test]
    fn colour_membership() {
        assert!(Value::Int(4).has_colour(ColourSet::BoundInt(4)));
        assert!(!Value::Int(5).has_colour(ColourSet::BoundInt(4)));
        assert!(!Value::Int(-1).has_colour(ColourSet::BoundInt(4)));
        assert!(!Value::Molecule(mol(&["a"], &[("a", "b")])).has_colour(ColourSet::Molecule));
        assert!(Value::List(BTreeSet::new()).has_colour(ColourSet::HistList));
        assert!(!Value::Int(0).has_colour(ColourSet::Molecule));
    }
}
