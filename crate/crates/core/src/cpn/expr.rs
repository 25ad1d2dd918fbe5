//! Guard and arc-expression terms and their evaluator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::value::{BondName, HistTriple, Molecule, Value};

/// A base or bond referenced by a predicate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenRef {
    Base(String),
    Bond(BondName),
}

impl TokenRef {
    fn in_molecule(&self, m: &Molecule) -> bool {
        match self {
            TokenRef::Base(a) => m.bases.contains(a),
            TokenRef::Bond(b) => m.bonds.contains(b),
        }
    }
}

/// A term evaluated under a binding and, for the place predicates, the
/// current marking.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Var(String),
    Const(Value),
    /// Union of molecules.
    Merge(Vec<Expr>),
    AddBonds(Box<Expr>, Vec<BondName>),
    RemoveBonds(Box<Expr>, Vec<BondName>),
    /// Removes `remove` from the molecule and keeps the component of `base`.
    BreakComponent {
        molecule: Box<Expr>,
        remove: Vec<BondName>,
        base: String,
    },
    Incr(Box<Expr>),
    Decr(Box<Expr>),
    Len(Box<Expr>),
    /// Adds `(n, j, i)` triples to a list; each `n` is itself a term.
    WithTriples {
        list: Box<Expr>,
        triples: Vec<(Expr, u32, u32)>,
    },
    /// Removes, for every partner, the triple with the largest position.
    DropLastPerPartner(Box<Expr>),
    /// Decrements every position greater than `pivot` among the triples
    /// whose partner is `partner`.
    ShiftAfter {
        list: Box<Expr>,
        partner: u32,
        pivot: Box<Expr>,
    },
    /// Largest position among the triples with the given partner, 0 if none.
    LastPosition {
        list: Box<Expr>,
        partner: u32,
    },
    Contains(Box<Expr>, TokenRef),
    HasTriple {
        list: Box<Expr>,
        n: Box<Expr>,
        j: u32,
        i: u32,
    },
    NonEmpty(Box<Expr>),
    /// Some token in the place contains the base or bond.
    PlaceHas(String, TokenRef),
    /// No token in the place contains the base or bond.
    PlaceLacks(String, TokenRef),
    And(Vec<Expr>),
    Not(Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn boxed(self) -> Box<Expr> {
        Box::new(self)
    }

    /// Names of variables occurring in the term.
    pub fn variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Const(_) | Expr::PlaceHas(..) | Expr::PlaceLacks(..) => {}
            Expr::Merge(xs) | Expr::And(xs) => xs.iter().for_each(|x| x.variables(out)),
            Expr::AddBonds(x, _)
            | Expr::RemoveBonds(x, _)
            | Expr::Incr(x)
            | Expr::Decr(x)
            | Expr::Len(x)
            | Expr::DropLastPerPartner(x)
            | Expr::NonEmpty(x)
            | Expr::Not(x)
            | Expr::Contains(x, _)
            | Expr::LastPosition { list: x, .. } => x.variables(out),
            Expr::BreakComponent { molecule, .. } => molecule.variables(out),
            Expr::WithTriples { list, triples } => {
                list.variables(out);
                triples.iter().for_each(|(n, _, _)| n.variables(out));
            }
            Expr::ShiftAfter { list, pivot, .. } => {
                list.variables(out);
                pivot.variables(out);
            }
            Expr::HasTriple { list, n, .. } => {
                list.variables(out);
                n.variables(out);
            }
            Expr::Eq(a, b) => {
                a.variables(out);
                b.variables(out);
            }
        }
    }
}

impl fmt::Display for TokenRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenRef::Base(a) => f.write_str(a),
            TokenRef::Bond((a, b)) => write!(f, "{a}-{b}"),
        }
    }
}

fn bonds_text(bonds: &[BondName]) -> String {
    let items: Vec<String> = bonds.iter().map(|(a, b)| format!("{a}-{b}")).collect();
    format!("{{{}}}", items.join(","))
}

fn join(f: &mut fmt::Formatter<'_>, xs: &[Expr], sep: &str) -> fmt::Result {
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

/// Compact infix rendering, used in DOT output and diagnostics.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => f.write_str(v),
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Merge(xs) => {
                f.write_str("merge(")?;
                join(f, xs, ", ")?;
                f.write_str(")")
            }
            Expr::AddBonds(x, bonds) => write!(f, "{x} + {}", bonds_text(bonds)),
            Expr::RemoveBonds(x, bonds) => write!(f, "{x} - {}", bonds_text(bonds)),
            Expr::BreakComponent {
                molecule,
                remove,
                base,
            } => {
                write!(f, "con({base}, {molecule} - {})", bonds_text(remove))
            }
            Expr::Incr(x) => write!(f, "{x}+1"),
            Expr::Decr(x) => write!(f, "{x}-1"),
            Expr::Len(x) => write!(f, "len({x})"),
            Expr::WithTriples { list, triples } => {
                let items: Vec<String> = triples.iter().map(|(n, j, i)| format!("({n},{j},{i})")).collect();
                write!(f, "{list} ++ [{}]", items.join(","))
            }
            Expr::DropLastPerPartner(x) => write!(f, "droplast({x})"),
            Expr::ShiftAfter { list, partner, pivot } => write!(f, "shift({list}, {partner}, {pivot})"),
            Expr::LastPosition { list, partner } => write!(f, "last({list}, {partner})"),
            Expr::Contains(x, token) => write!(f, "{token} in {x}"),
            Expr::HasTriple { list, n, j, i } => write!(f, "({n},{j},{i}) in {list}"),
            Expr::NonEmpty(x) => write!(f, "{x} != []"),
            Expr::PlaceHas(p, token) => write!(f, "{token} in M({p})"),
            Expr::PlaceLacks(p, token) => write!(f, "{token} notin M({p})"),
            Expr::And(xs) if xs.is_empty() => f.write_str("true"),
            Expr::And(xs) => join(f, xs, " && "),
            Expr::Not(x) => write!(f, "!({x})"),
            Expr::Eq(a, b) => write!(f, "{a} == {b}"),
        }
    }
}

/// Variable assignment for one transition occurrence.
pub type Binding = BTreeMap<String, Value>;

/// Place contents, keyed by place name.
pub type CpnMarking = BTreeMap<String, BTreeSet<Value>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("decrement below zero")]
    Negative,
    #[error("unknown place {0} in guard")]
    UnknownPlace(String),
}

/// Evaluation context: the binding and the marking the guard is checked in.
pub struct Ctx<'a> {
    pub binding: &'a Binding,
    pub marking: &'a CpnMarking,
}

fn mismatch(expected: &'static str, found: &Value) -> EvalError {
    EvalError::TypeMismatch {
        expected,
        found: found.kind(),
    }
}

fn as_molecule(v: Value) -> Result<Molecule, EvalError> {
    match v {
        Value::Molecule(m) => Ok(m),
        other => Err(mismatch("molecule", &other)),
    }
}

fn as_int(v: Value) -> Result<i64, EvalError> {
    match v {
        Value::Int(i) => Ok(i),
        other => Err(mismatch("int", &other)),
    }
}

fn as_list(v: Value) -> Result<BTreeSet<HistTriple>, EvalError> {
    match v {
        Value::List(l) => Ok(l),
        other => Err(mismatch("list", &other)),
    }
}

fn as_bool(v: Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(mismatch("bool", &other)),
    }
}

fn as_position(v: i64) -> Result<u32, EvalError> {
    u32::try_from(v).map_err(|_| EvalError::Negative)
}

/// Evaluates a term. Deterministic; never consults anything but `ctx`.
pub fn eval(expr: &Expr, ctx: &Ctx<'_>) -> Result<Value, EvalError> {
    Ok(match expr {
        Expr::Var(v) => ctx
            .binding
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(v.clone()))?,
        Expr::Const(v) => v.clone(),
        Expr::Merge(xs) => {
            let mut m = Molecule::default();
            for x in xs {
                m.merge(&as_molecule(eval(x, ctx)?)?);
            }
            Value::Molecule(m)
        }
        Expr::AddBonds(x, bonds) => {
            let mut m = as_molecule(eval(x, ctx)?)?;
            m.bonds.extend(bonds.iter().cloned());
            Value::Molecule(m)
        }
        Expr::RemoveBonds(x, bonds) => {
            let mut m = as_molecule(eval(x, ctx)?)?;
            for b in bonds {
                m.bonds.remove(b);
            }
            Value::Molecule(m)
        }
        Expr::BreakComponent {
            molecule,
            remove,
            base,
        } => {
            let mut m = as_molecule(eval(molecule, ctx)?)?;
            for b in remove {
                m.bonds.remove(b);
            }
            Value::Molecule(m.component(base))
        }
        Expr::Incr(x) => Value::Int(as_int(eval(x, ctx)?)? + 1),
        Expr::Decr(x) => {
            let v = as_int(eval(x, ctx)?)?;
            if v <= 0 {
                return Err(EvalError::Negative);
            }
            Value::Int(v - 1)
        }
        Expr::Len(x) => Value::Int(as_list(eval(x, ctx)?)?.len() as i64),
        Expr::WithTriples { list, triples } => {
            let mut l = as_list(eval(list, ctx)?)?;
            for (n, j, i) in triples {
                let n = as_position(as_int(eval(n, ctx)?)?)?;
                l.insert(HistTriple::new(n, *j, *i));
            }
            Value::List(l)
        }
        Expr::DropLastPerPartner(x) => {
            let l = as_list(eval(x, ctx)?)?;
            let mut last: BTreeMap<u32, HistTriple> = BTreeMap::new();
            for t in &l {
                let e = last.entry(t.j).or_insert(*t);
                if t.n > e.n {
                    *e = *t;
                }
            }
            Value::List(l.into_iter().filter(|t| last[&t.j] != *t).collect())
        }
        Expr::ShiftAfter { list, partner, pivot } => {
            let l = as_list(eval(list, ctx)?)?;
            let pivot = as_int(eval(pivot, ctx)?)?;
            Value::List(
                l.into_iter()
                    .map(|t| {
                        if t.j == *partner && i64::from(t.n) > pivot {
                            HistTriple::new(t.n - 1, t.j, t.i)
                        } else {
                            t
                        }
                    })
                    .collect(),
            )
        }
        Expr::LastPosition { list, partner } => {
            let l = as_list(eval(list, ctx)?)?;
            Value::Int(
                l.iter()
                    .filter(|t| t.j == *partner)
                    .map(|t| i64::from(t.n))
                    .max()
                    .unwrap_or(0),
            )
        }
        Expr::Contains(x, token) => Value::Bool(token.in_molecule(&as_molecule(eval(x, ctx)?)?)),
        Expr::HasTriple { list, n, j, i } => {
            let l = as_list(eval(list, ctx)?)?;
            let n = as_int(eval(n, ctx)?)?;
            Value::Bool(match u32::try_from(n) {
                Ok(n) => l.contains(&HistTriple::new(n, *j, *i)),
                Err(_) => false,
            })
        }
        Expr::NonEmpty(x) => Value::Bool(!as_list(eval(x, ctx)?)?.is_empty()),
        Expr::PlaceHas(place, token) => Value::Bool(place_has(ctx, place, token)?),
        Expr::PlaceLacks(place, token) => Value::Bool(!place_has(ctx, place, token)?),
        Expr::And(xs) => {
            for x in xs {
                if !as_bool(eval(x, ctx)?)? {
                    return Ok(Value::Bool(false));
                }
            }
            Value::Bool(true)
        }
        Expr::Not(x) => Value::Bool(!as_bool(eval(x, ctx)?)?),
        Expr::Eq(a, b) => Value::Bool(eval(a, ctx)? == eval(b, ctx)?),
    })
}

fn place_has(ctx: &Ctx<'_>, place: &str, token: &TokenRef) -> Result<bool, EvalError> {
    let tokens = ctx
        .marking
        .get(place)
        .ok_or_else(|| EvalError::UnknownPlace(place.to_string()))?;
    Ok(tokens.iter().any(|v| match v {
        Value::Molecule(m) => token.in_molecule(m),
        _ => false,
    }))
}

/// Evaluates a guard to a boolean.
pub fn eval_bool(expr: &Expr, ctx: &Ctx<'_>) -> Result<bool, EvalError> {
    as_bool(eval(expr, ctx)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpn::value::bond_name;

    fn mol(bases: &[&str], bonds: &[(&str, &str)]) -> Molecule {
        Molecule {
            bases: bases.iter().map(|s| s.to_string()).collect(),
            bonds: bonds.iter().map(|(a, b)| bond_name(a, b)).collect(),
        }
    }

    fn run(expr: &Expr, binding: &Binding) -> Result<Value, EvalError> {
        let marking = CpnMarking::new();
        eval(
            expr,
            &Ctx {
                binding,
                marking: &marking,
            },
        )
    }

    #[test]
    fn increment_zero() {
        assert_eq!(
            run(&Expr::Incr(Expr::Const(Value::Int(0)).boxed()), &Binding::new()),
            Ok(Value::Int(1))
        );
        assert_eq!(
            run(&Expr::Decr(Expr::Const(Value::Int(0)).boxed()), &Binding::new()),
            Err(EvalError::Negative)
        );
    }

    #[test]
    fn break_component_selects_seed() {
        let chain = mol(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")]);
        let e = Expr::BreakComponent {
            molecule: Expr::Const(Value::Molecule(chain)).boxed(),
            remove: vec![bond_name("a", "b")],
            base: "a".into(),
        };
        assert_eq!(run(&e, &Binding::new()), Ok(Value::Molecule(mol(&["a"], &[]))));
    }

    #[test]
    fn with_triples_on_empty_list() {
        let e = Expr::WithTriples {
            list: Expr::Const(Value::List(BTreeSet::new())).boxed(),
            triples: vec![(Expr::Const(Value::Int(1)), 2, 1)],
        };
        assert_eq!(
            run(&e, &Binding::new()),
            Ok(Value::List(BTreeSet::from([HistTriple::new(1, 2, 1)])))
        );
    }

    #[test]
    fn drop_last_and_shift() {
        let list: BTreeSet<HistTriple> = [(1, 2, 1), (3, 2, 1), (2, 3, 1), (4, 3, 1)]
            .into_iter()
            .map(|(n, j, i)| HistTriple::new(n, j, i))
            .collect();
        let mut b = Binding::new();
        b.insert("l".into(), Value::List(list));
        let dropped = run(&Expr::DropLastPerPartner(Expr::var("l").boxed()), &b).unwrap();
        assert_eq!(
            dropped,
            Value::List([HistTriple::new(1, 2, 1), HistTriple::new(2, 3, 1)].into())
        );
        let shifted = run(
            &Expr::ShiftAfter {
                list: Expr::var("l").boxed(),
                partner: 3,
                pivot: Expr::Const(Value::Int(2)).boxed(),
            },
            &b,
        )
        .unwrap();
        assert_eq!(
            shifted,
            Value::List(
                [(1, 2, 1), (3, 2, 1), (2, 3, 1), (3, 3, 1)]
                    .into_iter()
                    .map(|(n, j, i)| HistTriple::new(n, j, i))
                    .collect()
            )
        );
        let last = run(
            &Expr::LastPosition {
                list: Expr::var("l").boxed(),
                partner: 2,
            },
            &b,
        );
        assert_eq!(last, Ok(Value::Int(3)));
    }

    #[test]
    fn rendering() {
        let e = Expr::And(vec![
            Expr::Contains(Expr::var("m").boxed(), TokenRef::Base("a".into())),
            Expr::PlaceLacks("p".into(), TokenRef::Bond(bond_name("b", "a"))),
        ]);
        assert_eq!(e.to_string(), "a in m && a-b notin M(p)");
        assert_eq!(Expr::And(vec![]).to_string(), "true");
    }

    #[test]
    fn unbound_and_mismatch() {
        assert_eq!(
            run(&Expr::var("x"), &Binding::new()),
            Err(EvalError::Unbound("x".into()))
        );
        let e = Expr::Len(Expr::Const(Value::Int(1)).boxed());
        assert!(matches!(
            run(&e, &Binding::new()),
            Err(EvalError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn place_predicates_read_marking() {
        let mut marking = CpnMarking::new();
        marking.insert("p".into(), BTreeSet::from([Value::Molecule(mol(&["a"], &[]))]));
        let binding = Binding::new();
        let ctx = Ctx {
            binding: &binding,
            marking: &marking,
        };
        assert_eq!(
            eval_bool(&Expr::PlaceHas("p".into(), TokenRef::Base("a".into())), &ctx),
            Ok(true)
        );
        assert_eq!(
            eval_bool(&Expr::PlaceLacks("p".into(), TokenRef::Base("b".into())), &ctx),
            Ok(true)
        );
        assert!(eval_bool(&Expr::PlaceHas("q".into(), TokenRef::Base("a".into())), &ctx).is_err());
    }
}
