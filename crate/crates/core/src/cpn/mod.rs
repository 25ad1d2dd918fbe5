//! A small interpreter for coloured Petri nets with set-valued places.
//!
//! Guards and arc inscriptions are [`Expr`] terms. A binding assigns a token
//! to every variable that appears bare on an input arc; all other terms are
//! computed from those.

pub mod expr;
pub mod value;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{eval, eval_bool, Binding, CpnMarking, Ctx, EvalError, Expr, TokenRef};
pub use value::{bond_name, BondName, ColourSet, HistTriple, Molecule, Value};

/// What an arc carries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcExpr {
    /// One token per term.
    Tokens(Vec<Expr>),
    /// The connected components of a molecule, one token each.
    ComponentsOf(Expr),
}

impl ArcExpr {
    fn bare_variables(&self) -> impl Iterator<Item = &str> {
        let terms: &[Expr] = match self {
            ArcExpr::Tokens(xs) => xs,
            ArcExpr::ComponentsOf(_) => &[],
        };
        terms.iter().filter_map(|x| match x {
            Expr::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }

    pub fn variables(&self, out: &mut BTreeSet<String>) {
        match self {
            ArcExpr::Tokens(xs) => xs.iter().for_each(|x| x.variables(out)),
            ArcExpr::ComponentsOf(x) => x.variables(out),
        }
    }

    pub fn eval(&self, ctx: &Ctx<'_>) -> Result<BTreeSet<Value>, EvalError> {
        match self {
            ArcExpr::Tokens(xs) => xs.iter().map(|x| eval(x, ctx)).collect(),
            ArcExpr::ComponentsOf(x) => match eval(x, ctx)? {
                Value::Molecule(m) => Ok(m.components().into_iter().map(Value::Molecule).collect()),
                other => Err(EvalError::TypeMismatch {
                    expected: "molecule",
                    found: other.kind(),
                }),
            },
        }
    }
}

impl std::fmt::Display for ArcExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArcExpr::Tokens(xs) => {
                let items: Vec<String> = xs.iter().map(ToString::to_string).collect();
                write!(f, "{}", items.join(", "))
            }
            ArcExpr::ComponentsOf(x) => write!(f, "components({x})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcDir {
    /// Place to transition.
    In,
    /// Transition to place.
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpnArc {
    pub place: String,
    pub transition: String,
    pub dir: ArcDir,
    pub expr: ArcExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpnPlace {
    pub colour: ColourSet,
    pub init: ArcExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpnTransition {
    pub guard: Expr,
}

/// The nine-tuple: places with colours and initialisation, transitions with
/// guards, arcs with inscriptions, and declared variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpnNet {
    pub places: BTreeMap<String, CpnPlace>,
    pub transitions: BTreeMap<String, CpnTransition>,
    pub arcs: Vec<CpnArc>,
    pub variables: BTreeMap<String, ColourSet>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CpnError {
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("unknown place {0}")]
    UnknownPlace(String),
    #[error("{transition}: {source}")]
    Eval {
        transition: String,
        #[source]
        source: EvalError,
    },
    #[error("{transition} is not enabled under the given binding: {reason}")]
    NotEnabled { transition: String, reason: String },
    #[error("token {value} does not belong to colour {colour} of place {place}")]
    Type {
        place: String,
        colour: ColourSet,
        value: String,
    },
    #[error("variable {variable} of {transition} is not declared")]
    Undeclared { transition: String, variable: String },
}

impl CpnNet {
    pub fn arcs_of<'a>(&'a self, t: &'a str) -> impl Iterator<Item = &'a CpnArc> + 'a {
        self.arcs.iter().filter(move |a| a.transition == t)
    }

    pub fn inputs_of<'a>(&'a self, t: &'a str) -> impl Iterator<Item = &'a CpnArc> + 'a {
        self.arcs_of(t).filter(|a| a.dir == ArcDir::In)
    }

    pub fn outputs_of<'a>(&'a self, t: &'a str) -> impl Iterator<Item = &'a CpnArc> + 'a {
        self.arcs_of(t).filter(|a| a.dir == ArcDir::Out)
    }

    /// `M0(p) = I(p)<>`.
    pub fn initial_marking(&self) -> Result<CpnMarking, CpnError> {
        let empty_binding = Binding::new();
        let empty_marking = CpnMarking::new();
        let ctx = Ctx {
            binding: &empty_binding,
            marking: &empty_marking,
        };
        let mut m = CpnMarking::new();
        for (name, place) in &self.places {
            let tokens = place.init.eval(&ctx).map_err(|e| CpnError::Eval {
                transition: format!("initialisation of {name}"),
                source: e,
            })?;
            self.check_tokens(name, &tokens)?;
            m.insert(name.clone(), tokens);
        }
        Ok(m)
    }

    fn check_tokens(&self, place: &str, tokens: &BTreeSet<Value>) -> Result<(), CpnError> {
        let colour = self
            .places
            .get(place)
            .ok_or_else(|| CpnError::UnknownPlace(place.to_string()))?
            .colour;
        match tokens.iter().find(|v| !v.has_colour(colour)) {
            Some(v) => Err(CpnError::Type {
                place: place.to_string(),
                colour,
                value: v.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Every place holds only tokens of its colour.
    pub fn check_marking(&self, marking: &CpnMarking) -> Result<(), CpnError> {
        for (place, tokens) in marking {
            self.check_tokens(place, tokens)?;
        }
        Ok(())
    }

    /// Candidate bindings: each bare input variable takes a token of its
    /// declared colour present in every place whose input arc mentions it,
    /// and the remaining input inscriptions evaluate to available tokens.
    /// The guard is not consulted.
    pub fn enumerate_bindings(&self, marking: &CpnMarking, t: &str) -> Result<Vec<Binding>, CpnError> {
        if !self.transitions.contains_key(t) {
            return Err(CpnError::UnknownTransition(t.to_string()));
        }
        let mut candidates: BTreeMap<&str, BTreeSet<&Value>> = BTreeMap::new();
        for arc in self.inputs_of(t) {
            let tokens = marking
                .get(&arc.place)
                .ok_or_else(|| CpnError::UnknownPlace(arc.place.clone()))?;
            for v in arc.expr.bare_variables() {
                let colour = *self.variables.get(v).ok_or_else(|| CpnError::Undeclared {
                    transition: t.to_string(),
                    variable: v.to_string(),
                })?;
                let here: BTreeSet<&Value> = tokens.iter().filter(|x| x.has_colour(colour)).collect();
                candidates
                    .entry(v)
                    .and_modify(|c| c.retain(|x| here.contains(x)))
                    .or_insert(here);
            }
        }
        let vars: Vec<(&str, Vec<&Value>)> = candidates
            .into_iter()
            .map(|(v, c)| (v, c.into_iter().collect()))
            .collect();
        let mut out = Vec::new();
        let mut binding = Binding::new();
        self.product(marking, t, &vars, 0, &mut binding, &mut out)?;
        Ok(out)
    }

    fn product(
        &self,
        marking: &CpnMarking,
        t: &str,
        vars: &[(&str, Vec<&Value>)],
        depth: usize,
        binding: &mut Binding,
        out: &mut Vec<Binding>,
    ) -> Result<(), CpnError> {
        if depth == vars.len() {
            if self.inputs_available(marking, t, binding)? {
                out.push(binding.clone());
            }
            return Ok(());
        }
        let (name, values) = &vars[depth];
        for v in values {
            binding.insert(name.to_string(), (*v).clone());
            self.product(marking, t, vars, depth + 1, binding, out)?;
        }
        binding.remove(*name);
        Ok(())
    }

    fn inputs_available(&self, marking: &CpnMarking, t: &str, binding: &Binding) -> Result<bool, CpnError> {
        let ctx = Ctx { binding, marking };
        for arc in self.inputs_of(t) {
            let need = arc.expr.eval(&ctx).map_err(|e| CpnError::Eval {
                transition: t.to_string(),
                source: e,
            })?;
            let have = &marking[&arc.place];
            if !need.is_subset(have) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn guard_holds(&self, marking: &CpnMarking, t: &str, binding: &Binding) -> Result<bool, CpnError> {
        let guard = &self
            .transitions
            .get(t)
            .ok_or_else(|| CpnError::UnknownTransition(t.to_string()))?
            .guard;
        eval_bool(guard, &Ctx { binding, marking }).map_err(|e| CpnError::Eval {
            transition: t.to_string(),
            source: e,
        })
    }

    /// Candidate bindings whose guard holds.
    pub fn enabled_bindings(&self, marking: &CpnMarking, t: &str) -> Result<Vec<Binding>, CpnError> {
        let mut out = Vec::new();
        for b in self.enumerate_bindings(marking, t)? {
            if self.guard_holds(marking, t, &b)? {
                out.push(b);
            }
        }
        Ok(out)
    }

    pub fn is_enabled(&self, marking: &CpnMarking, t: &str) -> Result<bool, CpnError> {
        Ok(!self.enabled_bindings(marking, t)?.is_empty())
    }

    /// Fires `t` under `binding`: removes the input inscriptions' tokens and
    /// adds the output inscriptions' tokens, checking colours.
    pub fn fire(&self, marking: &CpnMarking, t: &str, binding: &Binding) -> Result<CpnMarking, CpnError> {
        if !self.guard_holds(marking, t, binding)? {
            return Err(CpnError::NotEnabled {
                transition: t.to_string(),
                reason: "guard is false".to_string(),
            });
        }
        let ctx = Ctx { binding, marking };
        let eval_arc = |arc: &CpnArc| {
            arc.expr.eval(&ctx).map_err(|e| CpnError::Eval {
                transition: t.to_string(),
                source: e,
            })
        };
        let mut next = marking.clone();
        for arc in self.inputs_of(t) {
            let need = eval_arc(arc)?;
            let here = next
                .get_mut(&arc.place)
                .ok_or_else(|| CpnError::UnknownPlace(arc.place.clone()))?;
            if let Some(missing) = need.iter().find(|v| !here.contains(v)) {
                return Err(CpnError::NotEnabled {
                    transition: t.to_string(),
                    reason: format!("{} does not hold {missing}", arc.place),
                });
            }
            here.retain(|v| !need.contains(v));
        }
        for arc in self.outputs_of(t) {
            let produced = eval_arc(arc)?;
            self.check_tokens(&arc.place, &produced)?;
            next.get_mut(&arc.place)
                .ok_or_else(|| CpnError::UnknownPlace(arc.place.clone()))?
                .extend(produced);
        }
        Ok(next)
    }
}

/// One line per place, `name: {tokens}`, in name order.
pub fn marking_text(marking: &CpnMarking) -> String {
    marking
        .iter()
        .map(|(p, vs)| {
            let items: Vec<String> = vs.iter().map(ToString::to_string).collect();
            format!("{p}: {{{}}}", items.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Renders a binding as `x=v, y=w`.
pub fn binding_text(binding: &Binding) -> String {
    binding
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `p --x--> t --x+1--> q` over bounded integers.
    fn counter() -> CpnNet {
        let mut net = CpnNet::default();
        net.places.insert(
            "p".into(),
            CpnPlace {
                colour: ColourSet::BoundInt(2),
                init: ArcExpr::Tokens(vec![Expr::Const(Value::Int(0)), Expr::Const(Value::Int(2))]),
            },
        );
        net.places.insert(
            "q".into(),
            CpnPlace {
                colour: ColourSet::BoundInt(2),
                init: ArcExpr::Tokens(vec![]),
            },
        );
        net.transitions.insert(
            "t".into(),
            CpnTransition {
                guard: Expr::And(vec![]),
            },
        );
        net.variables.insert("x".into(), ColourSet::BoundInt(2));
        net.arcs.push(CpnArc {
            place: "p".into(),
            transition: "t".into(),
            dir: ArcDir::In,
            expr: ArcExpr::Tokens(vec![Expr::var("x")]),
        });
        net.arcs.push(CpnArc {
            place: "q".into(),
            transition: "t".into(),
            dir: ArcDir::Out,
            expr: ArcExpr::Tokens(vec![Expr::Incr(Expr::var("x").boxed())]),
        });
        net
    }

    #[test]
    fn bindings_follow_tokens() {
        let net = counter();
        let m0 = net.initial_marking().unwrap();
        let bs = net.enumerate_bindings(&m0, "t").unwrap();
        assert_eq!(bs.len(), 2);
        assert_eq!(bs[0]["x"], Value::Int(0));
    }

    #[test]
    fn fire_moves_and_type_checks() {
        let net = counter();
        let m0 = net.initial_marking().unwrap();
        let bs = net.enumerate_bindings(&m0, "t").unwrap();
        let m1 = net.fire(&m0, "t", &bs[0]).unwrap();
        assert_eq!(m1["q"], BTreeSet::from([Value::Int(1)]));
        assert_eq!(m1["p"], BTreeSet::from([Value::Int(2)]));
        assert!(matches!(net.fire(&m0, "t", &bs[1]), Err(CpnError::Type { .. })));
        assert_eq!(net.fire(&m0, "t", &bs[0]).unwrap(), m1);
    }

    #[test]
    fn empty_place_has_no_binding() {
        let net = counter();
        let mut m = net.initial_marking().unwrap();
        m.get_mut("p").unwrap().clear();
        assert!(net.enumerate_bindings(&m, "t").unwrap().is_empty());
    }

    #[test]
    fn false_guard_disables() {
        let mut net = counter();
        net.transitions.get_mut("t").unwrap().guard = Expr::Const(Value::Bool(false));
        let m0 = net.initial_marking().unwrap();
        assert!(!net.is_enabled(&m0, "t").unwrap());
        let b = net.enumerate_bindings(&m0, "t").unwrap().remove(0);
        assert!(matches!(net.fire(&m0, "t", &b), Err(CpnError::NotEnabled { .. })));
    }
}
