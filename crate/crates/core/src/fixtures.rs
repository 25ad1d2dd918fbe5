//! Example nets used throughout the tests, the guide and the CLI fixtures.
//!
//! `figure1` and `figure2` are complete. The `figure3*` and `figure4` nets
//! are reconstructions: their arc labels are chosen so that every behaviour
//! described for them holds, and the test suites assert those behaviours.

use crate::net::{NetBuilder, NetDef, State};

fn finish(builder: NetBuilder, marking: &[(&str, &str)]) -> (NetDef, State) {
    let net = builder.build().expect("fixture net is valid");
    let m = net
        .marking(marking.iter().copied())
        .expect("fixture marking is valid");
    net.check_initial_marking(&m).expect("fixture marking is initial");
    let s = State::initial(&net, m);
    (net, s)
}

/// Two transports feeding two bond creations; the molecule `a-b-c` ends in `p7`.
pub fn figure1() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p1", "p2", "p3", "p4", "p5", "p6", "p7"])
            .transitions(["t1", "t2", "t3", "t4"])
            .bases(["a", "b", "c"])
            .bond("a", "b")
            .bond("b", "c")
            .arc("p1", "t1", "a")
            .arc("t1", "p3", "a")
            .arc("p2", "t2", "b")
            .arc("t2", "p4", "b")
            .arc("p3", "t3", "a")
            .arc("p4", "t3", "b")
            .arc("t3", "p5", "a, b, a-b")
            .arc("p5", "t4", "b")
            .arc("p6", "t4", "c")
            .arc("t4", "p7", "b, c, b-c"),
        &[("p1", "a"), ("p2", "b"), ("p6", "c")],
    )
}

/// `t1` bonds `a` and `c`; `t2` transports `a` (with its partner).
pub fn figure2() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p1", "p2", "p3", "p4"])
            .transitions(["t1", "t2"])
            .bases(["a", "c"])
            .bond("a", "c")
            .arc("p1", "t1", "a")
            .arc("p2", "t1", "c")
            .arc("t1", "p3", "a, c, a-c")
            .arc("p3", "t2", "a")
            .arc("t2", "p4", "a"),
        &[("p1", "a"), ("p2", "c")],
    )
}

/// Two cycles through `p1`: `t1 t2 t3` bonds `a-c`, `t4 t5` bonds `b-d`.
/// The cycles never touch the same tokens.
pub fn figure3a() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p1", "p2", "p3", "p4", "p5", "p6", "p7"])
            .transitions(["t1", "t2", "t3", "t4", "t5", "t6"])
            .bases(["a", "b", "c", "d"])
            .bond("a", "c")
            .bond("b", "d")
            .arc("p1", "t1", "a")
            .arc("t1", "p2", "a")
            .arc("p2", "t2", "a")
            .arc("p3", "t2", "c")
            .arc("t2", "p4", "a, c")
            .arc("p4", "t3", "a, c, !a-c")
            .arc("t3", "p1", "a, c, a-c")
            .arc("p1", "t4", "b")
            .arc("t4", "p5", "b")
            .arc("p5", "t5", "b")
            .arc("p6", "t5", "d")
            .arc("t5", "p1", "b, d, b-d")
            .arc("p1", "t6", "c")
            .arc("t6", "p7", "c"),
        &[("p1", "a, b"), ("p3", "c"), ("p6", "d")],
    )
}

/// Same shape as [`figure3a`], but the second cycle moves `c`, which the first
/// cycle has bonded to `a`.
pub fn figure3b() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p1", "p2", "p3", "p4", "p5", "p6", "p7"])
            .transitions(["t1", "t2", "t3", "t4", "t5", "t6"])
            .bases(["a", "c", "d"])
            .bond("a", "c")
            .bond("c", "d")
            .arc("p1", "t1", "a")
            .arc("t1", "p2", "a")
            .arc("p2", "t2", "a")
            .arc("p3", "t2", "c")
            .arc("t2", "p4", "a, c")
            .arc("p4", "t3", "a, c, !a-c")
            .arc("t3", "p1", "a, c, a-c")
            .arc("p1", "t4", "c")
            .arc("t4", "p5", "c")
            .arc("p5", "t5", "c")
            .arc("p6", "t5", "d")
            .arc("t5", "p1", "c, d, c-d")
            .arc("p1", "t6", "c")
            .arc("t6", "p7", "c"),
        &[("p1", "a"), ("p3", "c"), ("p6", "d")],
    )
}

/// `t1` produces `a-b` into `p1`, which feeds two cycles that both carry `a`.
pub fn figure3c() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p1", "p2", "p3", "p4", "p5", "p6", "p7"])
            .transitions(["t1", "t2", "t4", "t5", "t6"])
            .bases(["a", "b", "c", "d"])
            .bond("a", "b")
            .bond("a", "c")
            .bond("a", "d")
            .arc("p2", "t1", "a")
            .arc("p3", "t1", "b")
            .arc("t1", "p1", "a, b, a-b")
            .arc("p1", "t2", "a")
            .arc("t2", "p4", "a")
            .arc("p4", "t4", "a")
            .arc("p5", "t4", "c")
            .arc("t4", "p1", "a, c, a-c")
            .arc("p1", "t5", "a")
            .arc("t5", "p6", "a")
            .arc("p6", "t6", "a")
            .arc("p7", "t6", "d")
            .arc("t6", "p1", "a, d, a-d"),
        &[("p2", "a"), ("p3", "b"), ("p5", "c"), ("p7", "d")],
    )
}

/// After `t1 t2 t3 t4` the molecule `a-b-c-d` sits in `p1`; undoing `t2`
/// first leaves `c-d` in `p4`, from where no reverse move can recover.
pub fn figure4() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p1", "p2", "p3", "p4", "p5", "p6"])
            .transitions(["t1", "t2", "t3", "t4"])
            .bases(["a", "b", "c", "d"])
            .bond("a", "b")
            .bond("b", "c")
            .bond("c", "d")
            .arc("p2", "t1", "a")
            .arc("p3", "t1", "b")
            .arc("t1", "p1", "a, b, a-b")
            .arc("p1", "t2", "b")
            .arc("p4", "t2", "c")
            .arc("t2", "p1", "b, c, b-c")
            .arc("p1", "t3", "c")
            .arc("t3", "p5", "c")
            .arc("p5", "t4", "c")
            .arc("p6", "t4", "d")
            .arc("t4", "p1", "c, d, c-d"),
        &[("p2", "a"), ("p3", "b"), ("p4", "c"), ("p6", "d")],
    )
}

/// One transport `p1 -> t1 -> p2`.
pub fn single() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p1", "p2"])
            .transitions(["t1"])
            .bases(["a"])
            .arc("p1", "t1", "a")
            .arc("t1", "p2", "a"),
        &[("p1", "a")],
    )
}

/// `p -> t -> p`: the smallest cycle. Not trans-acyclic.
pub fn self_loop() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p"])
            .transitions(["t"])
            .bases(["a"])
            .arc("p", "t", "a")
            .arc("t", "p", "a"),
        &[("p", "a")],
    )
}

/// `p1 -> t -> p2 -> u -> p1` moving `a` forever. Not trans-acyclic.
pub fn transport_loop() -> (NetDef, State) {
    finish(
        NetBuilder::new()
            .places(["p1", "p2"])
            .transitions(["t", "u"])
            .bases(["a"])
            .arc("p1", "t", "a")
            .arc("t", "p2", "a")
            .arc("p2", "u", "a")
            .arc("u", "p1", "a"),
        &[("p1", "a")],
    )
}

/// A named fixture.
#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub build: fn() -> (NetDef, State),
    pub trans_acyclic: bool,
    /// Behaviours a reconstructed net must exhibit; each is asserted in tests.
    pub claims: &'static [&'static str],
}

/// Every fixture, in a fixed order.
pub fn all() -> Vec<Fixture> {
    let f = |name, build, trans_acyclic, claims| Fixture {
        name,
        build,
        trans_acyclic,
        claims,
    };
    vec![
        f("figure1", figure1 as fn() -> _, true, &[]),
        f("figure2", figure2, true, &[]),
        f("figure3a", figure3a, true, &[
            "structural dependence is {t1,t2} {t1,t3} {t1,t5} {t2,t3} {t3,t4} {t3,t6} {t4,t5} {t5,t6}",
            "after t1 t2 t3 t4 t5 only t5 can be reversed under structural dependence",
            "after t1 t2 t3 t4 t5 both t3 and t5 can be reversed under co-dependence",
            "t3 and t5 are marking-oriented independent",
        ]),
        f("figure3b", figure3b, true, &[
            "t3 and t5 are marking-oriented dependent: both move components containing a",
        ]),
        f("figure3c", figure3c, true, &[
            "t4 and t6 are co-independent and both are co-dependent on t1",
        ]),
        f("figure4", figure4, true, &[
            "under co-dependence t1 t2 t3 t4 ~t2 reaches a state from which reversing cannot restore the initial marking",
            "under structural dependence every reachable state can be reversed to the initial one",
        ]),
        f("single", single, true, &[]),
        f("self-loop", self_loop, false, &[]),
        f("transport-loop", transport_loop, false, &[]),
    ]
}

/// The trans-acyclic fixtures, which have finite state spaces.
pub fn trans_acyclic() -> Vec<Fixture> {
    all().into_iter().filter(|f| f.trans_acyclic).collect()
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
