//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`); exits non-zero if any
//! criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use revnets::analysis::{classify_transitions, dependence, TransitionClass};
use revnets::cpn::Value;
use revnets::explore::{
    check_lockstep, check_reversal_roundtrips, explore_cpn, explore_rpn, find_stuck_states,
};
use revnets::fixtures;
use revnets::net::{con, NetBuilder, TokenSet};
use revnets::reversing::{enabled_reverse, fire_moves, parse_moves, DependenceKind, Semantics};
use revnets::translate::{cpn_marking_to_rpn_state, rpn_state_to_cpn_marking, translate};

const CAP: usize = 200_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_revnets"))
        .args(["run", "figure1", "--moves", "t1,t2,t3,t4"])
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || {
        format!("run exited with {:?}", out.status.code())
    })?;
    let want = "  p7: {a, b, c, a-b, b-c}\n  history: t1={1} t2={2} t3={3} t4={4}\n";
    ensure(
        text.ends_with(&format!(
            "{want}final: p7:{{a, b, c, a-b, b-c}} | t1:{{1}} t2:{{2}} t3:{{3}} t4:{{4}}\n"
        )),
        || format!("unexpected final state:\n{text}"),
    )?;

    let (net, s0) = fixtures::figure1();
    let dep = dependence(&net, &s0, DependenceKind::Structural).map_err(|e| e.to_string())?;
    let moves = parse_moves(&net, "t1,t2,t3,t4,~t4,~t3,~t2,~t1").map_err(|e| e.to_string())?;
    let back = fire_moves(&net, &s0, &moves, Semantics::Backtracking, &dep).map_err(|e| e.to_string())?;
    ensure(back == s0, || {
        format!("reversal ended in {}", back.canonical(&net))
    })?;
    Ok(
        "p7 = {a, b, c, a-b, b-c}, H = t1:{1} t2:{2} t3:{3} t4:{4}; full reversal restores the initial state"
            .into(),
    )
}

fn ac2() -> Outcome {
    let mut sequences = 0;
    let mut balanced = 0;
    for f in fixtures::trans_acyclic() {
        let (net, s0) = (f.build)();
        let max_len = if f.name == "figure1" { 8 } else { 6 };
        for kind in DependenceKind::ALL {
            let dep = dependence(&net, &s0, kind).map_err(|e| e.to_string())?;
            for sem in Semantics::ALL {
                let r = check_reversal_roundtrips(&net, &s0, sem, &dep, max_len);
                if let Some(c) = r.counterexample {
                    return Err(format!(
                        "{} {sem} {kind}: {} ends in {}",
                        f.name,
                        c.trace.join(" "),
                        c.state
                    ));
                }
                ensure(r.balanced > 0, || {
                    format!("{} {sem} {kind}: no balanced sequence", f.name)
                })?;
                sequences += r.sequences;
                balanced += r.balanced;
            }
        }
    }
    Ok(format!(
        "{sequences} sequences, {balanced} balanced, all return to the initial state"
    ))
}

fn ac3() -> Outcome {
    let mut runs = 0;
    let mut states = 0;
    for f in fixtures::trans_acyclic() {
        let (net, s0) = (f.build)();
        for kind in DependenceKind::ALL {
            let dep = dependence(&net, &s0, kind).map_err(|e| e.to_string())?;
            for sem in Semantics::ALL {
                let tr = translate(&net, &s0, sem, &dep).map_err(|e| e.to_string())?;
                let r = check_lockstep(&net, &s0, &tr, sem, &dep, CAP).map_err(|e| e.to_string())?;
                if let Some(d) = &r.divergence {
                    return Err(format!(
                        "{} {sem} {kind}: after {:?}: {}",
                        f.name, d.trace, d.reason
                    ));
                }
                ensure(r.rpn_states == r.cpn_states, || {
                    format!(
                        "{} {sem} {kind}: {} vs {} states",
                        f.name, r.rpn_states, r.cpn_states
                    )
                })?;
                runs += 1;
                states += r.rpn_states;
            }
        }
    }
    Ok(format!(
        "{runs} runs, {states} states, zero divergences, equal state counts"
    ))
}

fn ac4() -> Outcome {
    let mut checked = 0;
    let mut twice = 0;
    let mut cpn_markings = 0;
    for f in fixtures::trans_acyclic() {
        let (net, s0) = (f.build)();
        let dep = dependence(&net, &s0, DependenceKind::Structural).map_err(|e| e.to_string())?;
        for sem in Semantics::ALL {
            let tr = translate(&net, &s0, sem, &dep).map_err(|e| e.to_string())?;
            let lts = explore_rpn(&net, &s0, sem, &dep, CAP).map_err(|e| e.to_string())?;
            for s in &lts.states {
                let m = rpn_state_to_cpn_marking(&net, &tr.layout, s);
                let back = cpn_marking_to_rpn_state(&net, &tr.layout, &m)
                    .map_err(|e| format!("{}: {}: {e}", f.name, s.canonical(&net)))?;
                ensure(back == *s, || {
                    format!(
                        "{}: {} decoded as {}",
                        f.name,
                        s.canonical(&net),
                        back.canonical(&net)
                    )
                })?;
                checked += 1;
                twice += s.history.iter().filter(|(_, h)| h.len() == 2).count();
            }
            // And from the coloured side: every reachable marking decodes and re-encodes.
            let cpn = explore_cpn(&tr.cpn, CAP).map_err(|e| e.to_string())?;
            for m in &cpn.states {
                let s =
                    cpn_marking_to_rpn_state(&net, &tr.layout, m).map_err(|e| format!("{}: {e}", f.name))?;
                ensure(rpn_state_to_cpn_marking(&net, &tr.layout, &s) == *m, || {
                    format!("{}: marking of {} does not re-encode", f.name, s.canonical(&net))
                })?;
                cpn_markings += 1;
            }
        }
    }
    ensure(twice > 0, || "no state exercises the two-occurrence case".into())?;
    Ok(format!(
        "{checked} states round-trip ({twice} two-occurrence histories, all integral); {cpn_markings} coloured markings decode"
    ))
}

fn ac5() -> Outcome {
    let mut states = 0;
    let mut max_seen = (0usize, 0usize);
    for f in fixtures::trans_acyclic() {
        let (net, s0) = (f.build)();
        let classes = classify_transitions(&net);
        let bound = 2 * net.transition_count() as u32;
        let dep = dependence(&net, &s0, DependenceKind::Structural).map_err(|e| e.to_string())?;
        for sem in Semantics::ALL {
            let lts = explore_rpn(&net, &s0, sem, &dep, CAP).map_err(|e| e.to_string())?;
            for s in &lts.states {
                for (t, h) in s.history.iter() {
                    let limit = match classes[&t] {
                        TransitionClass::BondCreating => 1,
                        TransitionClass::Transferring => 2,
                    };
                    ensure(h.len() <= limit, || {
                        format!(
                            "{}: {} fired {} times in {}",
                            f.name,
                            net.transition_name(t),
                            h.len(),
                            s.canonical(&net)
                        )
                    })?;
                    ensure(h.iter().all(|k| *k <= bound), || {
                        format!("{}: index above {bound}", f.name)
                    })?;
                    match classes[&t] {
                        TransitionClass::BondCreating => max_seen.0 = max_seen.0.max(h.len()),
                        TransitionClass::Transferring => max_seen.1 = max_seen.1.max(h.len()),
                    }
                }
                states += 1;
            }
            let tr = translate(&net, &s0, sem, &dep).map_err(|e| e.to_string())?;
            let cpn = explore_cpn(&tr.cpn, CAP).map_err(|e| e.to_string())?;
            for m in &cpn.states {
                for tokens in m.values() {
                    for v in tokens {
                        if let Value::Int(n) = v {
                            ensure(*n >= 0 && *n <= i64::from(bound), || {
                                format!("{}: counter {n}", f.name)
                            })?;
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{states} states; max firings: bond-creating {}, transferring {}; indices and counters within 2*#T",
        max_seen.0, max_seen.1
    ))
}

fn ac6() -> Outcome {
    let (net, s0) = fixtures::figure3a();
    let moves = parse_moves(&net, "t1,t2,t3,t4,t5").map_err(|e| e.to_string())?;
    let names = |ts: Vec<_>| -> BTreeSet<String> {
        ts.into_iter()
            .map(|t| net.transition_name(t).to_string())
            .collect()
    };
    let str_dep = dependence(&net, &s0, DependenceKind::Structural).map_err(|e| e.to_string())?;
    let co_dep = dependence(&net, &s0, DependenceKind::CoBackwardConflict).map_err(|e| e.to_string())?;
    let s = fire_moves(&net, &s0, &moves, Semantics::Causal, &str_dep).map_err(|e| e.to_string())?;
    let under_str = names(enabled_reverse(&net, &s, Semantics::Causal, &str_dep));
    let under_co = names(enabled_reverse(&net, &s, Semantics::Causal, &co_dep));
    ensure(under_str == BTreeSet::from(["t5".to_string()]), || {
        format!("structural: {under_str:?}")
    })?;
    ensure(under_co.contains("t3") && under_co.contains("t5"), || {
        format!("co: {under_co:?}")
    })?;

    let (net4, s4) = fixtures::figure4();
    let co4 = dependence(&net4, &s4, DependenceKind::CoBackwardConflict).map_err(|e| e.to_string())?;
    let str4 = dependence(&net4, &s4, DependenceKind::Structural).map_err(|e| e.to_string())?;
    let stuck = find_stuck_states(&net4, &s4, &co4, CAP).map_err(|e| e.to_string())?;
    ensure(stuck.iter().any(|s| s.trace == "t1 t2 t3 t4 ~t2"), || {
        format!("co stuck traces: {stuck:?}")
    })?;
    let none = find_stuck_states(&net4, &s4, &str4, CAP).map_err(|e| e.to_string())?;
    ensure(none.is_empty(), || format!("structural stuck states: {none:?}"))?;
    Ok(format!(
        "figure3a reverse sets: structural {under_str:?}, co {under_co:?}; figure4: {} stuck state(s) under co incl. t1 t2 t3 t4 ~t2, none under structural",
        stuck.len()
    ))
}

/// Bases reachable from `from` by enumerating simple bond paths.
fn by_paths(bonds: &[(usize, usize)], from: usize) -> BTreeSet<usize> {
    fn walk(at: usize, bonds: &[(usize, usize)], path: &mut Vec<usize>, out: &mut BTreeSet<usize>) {
        out.insert(at);
        for &(x, y) in bonds {
            let next = if x == at {
                y
            } else if y == at {
                x
            } else {
                continue;
            };
            if !path.contains(&next) {
                path.push(next);
                walk(next, bonds, path, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(from, bonds, &mut vec![from], &mut out);
    out
}

fn ac7() -> Outcome {
    let names = ["a", "b", "c", "d", "e", "f"];
    let mut cases = 0u64;
    for n in 1..=names.len() {
        let mut builder = NetBuilder::new().place("p").bases(names[..n].iter().copied());
        let mut pairs = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                builder = builder.bond(names[x], names[y]);
                pairs.push((x, y));
            }
        }
        let net = builder.build().map_err(|e| e.to_string())?;
        for mask in 0u32..(1 << pairs.len()) {
            let chosen: Vec<(usize, usize)> = (0..pairs.len())
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| pairs[k])
                .collect();
            let mut set = TokenSet::new();
            set.bases.extend(names[..n].iter().map(|x| net.base(x).unwrap()));
            set.bonds.extend(
                chosen
                    .iter()
                    .map(|(x, y)| net.bond(names[*x], names[*y]).unwrap()),
            );
            #[allow(clippy::needless_range_loop)]
            for from in 0..n {
                let bases = by_paths(&chosen, from);
                let got = con(net.base(names[from]).unwrap(), &set);
                let got_bases: BTreeSet<usize> = got.bases.iter().map(|a| a.index()).collect();
                let want_bonds: BTreeSet<(usize, usize)> = chosen
                    .iter()
                    .filter(|(x, _)| bases.contains(x))
                    .copied()
                    .collect();
                let got_bonds: BTreeSet<(usize, usize)> = got
                    .bonds
                    .iter()
                    .map(|b| (b.endpoints().0.index(), b.endpoints().1.index()))
                    .collect();
                ensure(got_bases == bases && got_bonds == want_bonds, || {
                    format!("n={n} bonds={chosen:?} from {}", names[from])
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (set, base) cases match path enumeration"))
}

fn ac8() -> Outcome {
    let (net, s0) = fixtures::figure1();
    let dep = dependence(&net, &s0, DependenceKind::Structural).map_err(|e| e.to_string())?;
    let mut mutants = 0;
    for sem in Semantics::ALL {
        let tr = translate(&net, &s0, sem, &dep).map_err(|e| e.to_string())?;
        let history: Vec<usize> = (0..tr.cpn.arcs.len())
            .filter(|k| tr.cpn.arcs[*k].place.starts_with("h_"))
            .collect();
        ensure(!history.is_empty(), || "no history arcs".into())?;
        for k in history {
            let mut mutant = tr.clone();
            let arc = mutant.cpn.arcs.remove(k);
            let r = check_lockstep(&net, &s0, &mutant, sem, &dep, CAP).map_err(|e| e.to_string())?;
            ensure(!r.passed(), || {
                format!(
                    "{sem}: removing {} <-> {} went unnoticed",
                    arc.place, arc.transition
                )
            })?;
            mutants += 1;
        }
    }
    Ok(format!("{mutants} single-arc mutants, all detected"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1", "figure 1 replay", ac1),
        ("AC2", "balanced sequences return home", ac2),
        ("AC3", "lockstep on every fixture", ac3),
        ("AC4", "history recovery is the inverse of encoding", ac4),
        ("AC5", "firing bounds on trans-acyclic nets", ac5),
        ("AC6", "reverse sets and stuck states", ac6),
        ("AC7", "con against path enumeration", ac7),
        ("AC8", "history-arc fault injection", ac8),
    ];
    let mut failed = 0;
    for (id, title, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} pass  {title} ({secs:.2}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL  {title} ({secs:.2}s): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 8 acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria pass");
}
