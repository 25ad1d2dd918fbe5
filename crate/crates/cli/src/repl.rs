//! Line-oriented interactive stepping.

use std::io::{BufRead, Write};

use revnets::net::{NetDef, State};
use revnets::reversing::{enabled_moves, fire_move, DependenceRelation, Direction, Move, Semantics};

pub const USAGE: &str = "commands: list | fire <t> | undo <t> | state | history | reset | help | quit";

/// A REPL session over one net. Separate from I/O so it can be driven
/// line by line.
pub struct Session<'a> {
    net: &'a NetDef,
    initial: &'a State,
    semantics: Semantics,
    dep: &'a DependenceRelation,
    pub state: State,
}

/// What a line asked for.
#[derive(Debug, PartialEq, Eq)]
pub enum Reply {
    Text(String),
    Quit,
}

impl<'a> Session<'a> {
    pub fn new(
        net: &'a NetDef,
        initial: &'a State,
        semantics: Semantics,
        dep: &'a DependenceRelation,
    ) -> Self {
        Session {
            net,
            initial,
            semantics,
            dep,
            state: initial.clone(),
        }
    }

    fn names(&self, moves: &[Move], dir: Direction) -> String {
        let v: Vec<&str> = moves
            .iter()
            .filter(|m| m.direction == dir)
            .map(|m| self.net.transition_name(m.transition))
            .collect();
        if v.is_empty() {
            "(none)".into()
        } else {
            v.join(", ")
        }
    }

    fn step(&mut self, name: Option<&str>, dir: Direction) -> String {
        let Some(name) = name else {
            return USAGE.to_string();
        };
        let Some(t) = self.net.transition(name) else {
            return format!("unknown transition {name:?}");
        };
        let mv = Move {
            transition: t,
            direction: dir,
        };
        match fire_move(self.net, &self.state, mv, self.semantics, self.dep) {
            Ok(next) => {
                self.state = next;
                self.state.display(self.net).to_string()
            }
            Err(e) => e.to_string(),
        }
    }

    pub fn handle(&mut self, line: &str) -> Reply {
        let mut words = line.split_whitespace();
        let Some(cmd) = words.next() else {
            return Reply::Text(String::new());
        };
        let arg = words.next();
        let text = match cmd {
            "list" => {
                let moves = enabled_moves(self.net, &self.state, self.semantics, self.dep);
                format!(
                    "forward: {}\nreverse: {}",
                    self.names(&moves, Direction::Forward),
                    self.names(&moves, Direction::Reverse)
                )
            }
            "fire" => self.step(arg, Direction::Forward),
            "undo" => self.step(arg, Direction::Reverse),
            "state" => self.state.display(self.net).to_string(),
            "history" => {
                let text = self.state.canonical(self.net);
                let hist = text.split_once(" | ").map(|(_, h)| h).unwrap_or("");
                if hist.is_empty() {
                    "(empty)".into()
                } else {
                    hist.to_string()
                }
            }
            "reset" => {
                self.state = self.initial.clone();
                self.state.display(self.net).to_string()
            }
            "help" => USAGE.to_string(),
            "quit" | "exit" => return Reply::Quit,
            other => format!("unknown command {other:?}\n{USAGE}"),
        };
        Reply::Text(text)
    }
}

/// Reads commands until `quit` or end of input.
pub fn repl(
    net: &NetDef,
    initial: &State,
    semantics: Semantics,
    dep: &DependenceRelation,
    input: impl BufRead,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    let mut session = Session::new(net, initial, semantics, dep);
    writeln!(out, "{semantics} reversing, {} dependence; {USAGE}", dep.kind)?;
    write!(out, "> ")?;
    out.flush()?;
    for line in input.lines() {
        match session.handle(&line?) {
            Reply::Quit => break,
            Reply::Text(t) => {
                if !t.is_empty() {
                    writeln!(out, "{t}")?;
                }
            }
        }
        write!(out, "> ")?;
        out.flush()?;
    }
    writeln!(out)?;
    Ok(())
}
