//! Graphviz renderings of nets.

use std::fmt::Write as _;

use crate::cpn::{ArcDir, CpnNet};
use crate::net::{NetDef, State};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// A reversing net with the tokens of `state` written inside the places.
pub fn net_dot(net: &NetDef, state: &State) -> String {
    let mut out = String::from("digraph rpn {\n  rankdir=LR;\n");
    for p in net.places() {
        let tokens = state.marking.get(p);
        let label = if tokens.is_empty() {
            net.place_name(p).to_string()
        } else {
            format!("{}\n{}", net.place_name(p), net.token_set_text(tokens))
        };
        let _ = writeln!(
            out,
            "  \"{}\" [shape=circle, label=\"{}\"];",
            escape(net.place_name(p)),
            escape(&label)
        );
    }
    for t in net.transitions() {
        let _ = writeln!(out, "  \"{}\" [shape=box];", escape(net.transition_name(t)));
    }
    for (from, to, label) in net.arcs() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            escape(net.node_name(from)),
            escape(net.node_name(to)),
            escape(&net.label_text(label))
        );
    }
    out.push_str("}\n");
    out
}

/// A coloured net: places show their colour set, transitions their guard,
/// arcs their inscription.
pub fn cpn_dot(cpn: &CpnNet) -> String {
    let mut out = String::from("digraph cpn {\n  rankdir=LR;\n");
    for (name, place) in &cpn.places {
        let _ = writeln!(
            out,
            "  \"{}\" [shape=ellipse, label=\"{}\\n{}\"];",
            escape(name),
            escape(name),
            escape(&place.colour.to_string())
        );
    }
    for (name, t) in &cpn.transitions {
        let _ = writeln!(
            out,
            "  \"{}\" [shape=box, label=\"{}\\n[{}]\"];",
            escape(name),
            escape(name),
            escape(&t.guard.to_string())
        );
    }
    for arc in &cpn.arcs {
        let (from, to) = match arc.dir {
            ArcDir::In => (&arc.place, &arc.transition),
            ArcDir::Out => (&arc.transition, &arc.place),
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            escape(from),
            escape(to),
            escape(&arc.expr.to_string())
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::structural_dependence;
    use crate::fixtures;
    use crate::reversing::Semantics;

    #[test]
    fn net_dot_lists_every_arc() {
        let (net, s0) = fixtures::figure1();
        let dot = net_dot(&net, &s0);
        assert_eq!(dot.matches(" -> ").count(), net.arcs().count());
        assert!(dot.contains("\"p1\\n{a}\""));
    }

    #[test]
    fn cpn_dot_lists_every_arc() {
        let (net, s0) = fixtures::figure2();
        let tr =
            crate::translate::translate(&net, &s0, Semantics::Backtracking, &structural_dependence(&net))
                .unwrap();
        let dot = cpn_dot(&tr.cpn);
        assert_eq!(dot.matches(" -> ").count(), tr.cpn.arcs.len());
        assert!(dot.contains("\"tr_t1\""));
    }
}
