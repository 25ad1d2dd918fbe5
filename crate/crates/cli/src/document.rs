//! On-disk formats: `*.rpn.json` net documents and `*.cpn.json` translations.

use std::collections::BTreeMap;
use std::path::Path;

use revnets::cpn::CpnNet;
use revnets::fixtures;
use revnets::net::{ArcLabel, Bond, LabelSpec, Marking, NetBuilder, NetDef, NetError, State, TokenSet};
use revnets::reversing::{DependenceKind, Semantics};
use revnets::translate::{CoGuard, Translation, TranslationLayout};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("invalid net: {0}")]
    Net(#[from] NetError),
    #[error("no file or built-in fixture named {0:?}")]
    NotFound(String),
}

type BondPair = [String; 2];

/// An arc label as four explicit sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelDoc {
    #[serde(default)]
    pub bases: Vec<String>,
    #[serde(default)]
    pub bonds: Vec<BondPair>,
    #[serde(default)]
    pub neg_bases: Vec<String>,
    #[serde(default)]
    pub neg_bonds: Vec<BondPair>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcDoc {
    pub from: String,
    pub to: String,
    pub label: LabelDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSpec {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub bases: Vec<String>,
    #[serde(default)]
    pub bonds: Vec<BondPair>,
    pub arcs: Vec<ArcDoc>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokensDoc {
    #[serde(default)]
    pub bases: Vec<String>,
    #[serde(default)]
    pub bonds: Vec<BondPair>,
}

/// A reversing net, its initial marking, and optional named move sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub format: u32,
    pub net: NetSpec,
    /// Non-empty places only.
    pub initial: BTreeMap<String, TokensDoc>,
    /// Named move sequences in `--moves` syntax.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub traces: BTreeMap<String, String>,
    /// Behaviours the net is expected to exhibit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<String>,
}

fn bond_pair(net: &NetDef, b: Bond) -> BondPair {
    let (x, y) = b.endpoints();
    [net.base_name(x).to_string(), net.base_name(y).to_string()]
}

fn label_doc(net: &NetDef, l: &ArcLabel) -> LabelDoc {
    let names = |s: &std::collections::BTreeSet<_>| s.iter().map(|a| net.base_name(*a).to_string()).collect();
    let pairs = |s: &std::collections::BTreeSet<Bond>| s.iter().map(|b| bond_pair(net, *b)).collect();
    LabelDoc {
        bases: names(&l.bases),
        bonds: pairs(&l.bonds),
        neg_bases: names(&l.neg_bases),
        neg_bonds: pairs(&l.neg_bonds),
    }
}

fn tokens_doc(net: &NetDef, s: &TokenSet) -> TokensDoc {
    TokensDoc {
        bases: s.bases.iter().map(|a| net.base_name(*a).to_string()).collect(),
        bonds: s.bonds.iter().map(|b| bond_pair(net, *b)).collect(),
    }
}

/// Named move sequences shipped with the built-in fixtures.
fn fixture_traces(name: &str) -> &'static [(&'static str, &'static str)] {
    match name {
        "figure1" => &[
            ("assemble", "t1,t2,t3,t4"),
            ("assemble-and-undo", "t1,t2,t3,t4,~t4,~t3,~t2,~t1"),
            ("out-of-order", "t1,t2,~t1"),
        ],
        "figure3a" => &[("both-cycles", "t1,t2,t3,t4,t5")],
        "figure4" => &[("stuck-under-co", "t1,t2,t3,t4,~t2")],
        _ => &[],
    }
}

fn pairs_of(v: &[BondPair]) -> Vec<(String, String)> {
    v.iter().map(|[a, b]| (a.clone(), b.clone())).collect()
}

impl NetDocument {
    /// The canonical document for a net and marking.
    pub fn from_net(net: &NetDef, marking: &Marking) -> NetDocument {
        NetDocument {
            format: FORMAT_VERSION,
            net: NetSpec {
                places: net.places().map(|p| net.place_name(p).to_string()).collect(),
                transitions: net
                    .transitions()
                    .map(|t| net.transition_name(t).to_string())
                    .collect(),
                bases: net.bases().map(|a| net.base_name(a).to_string()).collect(),
                bonds: net.bonds().iter().map(|b| bond_pair(net, *b)).collect(),
                arcs: net
                    .arcs()
                    .map(|(from, to, l)| ArcDoc {
                        from: net.node_name(from).to_string(),
                        to: net.node_name(to).to_string(),
                        label: label_doc(net, l),
                    })
                    .collect(),
            },
            initial: marking
                .iter()
                .filter(|(_, s)| !s.is_empty())
                .map(|(p, s)| (net.place_name(p).to_string(), tokens_doc(net, s)))
                .collect(),
            traces: BTreeMap::new(),
            claims: Vec::new(),
        }
    }

    /// The document of a built-in fixture, with its claims.
    pub fn from_fixture(name: &str) -> Option<NetDocument> {
        let f = fixtures::by_name(name)?;
        let (net, s0) = (f.build)();
        let mut doc = NetDocument::from_net(&net, &s0.marking);
        doc.claims = f.claims.iter().map(|c| c.to_string()).collect();
        doc.traces = fixture_traces(name)
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Some(doc)
    }

    pub fn parse(text: &str) -> Result<NetDocument, DocError> {
        let doc: NetDocument = serde_json::from_str(text)?;
        if doc.format != FORMAT_VERSION {
            return Err(DocError::Version(doc.format));
        }
        Ok(doc)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    /// Builds the net and the marking. The marking is resolved by name but
    /// not checked; see [`NetDef::check_initial_marking`].
    pub fn to_net(&self) -> Result<(NetDef, Marking), DocError> {
        let spec = &self.net;
        let mut b = NetBuilder::new()
            .places(spec.places.iter().cloned())
            .transitions(spec.transitions.iter().cloned())
            .bases(spec.bases.iter().cloned());
        for [x, y] in &spec.bonds {
            b = b.bond(x.clone(), y.clone());
        }
        for arc in &spec.arcs {
            let l = &arc.label;
            b = b.arc_items(
                arc.from.clone(),
                arc.to.clone(),
                LabelSpec {
                    bases: l.bases.clone(),
                    neg_bases: l.neg_bases.clone(),
                    bonds: pairs_of(&l.bonds),
                    neg_bonds: pairs_of(&l.neg_bonds),
                },
            );
        }
        let net = b.build()?;
        let mut marking = Marking::empty(&net);
        for (place, tokens) in &self.initial {
            let p = net
                .place(place)
                .ok_or_else(|| NetError::UnknownPlace(place.clone()))?;
            let set = marking.get_mut(p);
            for a in &tokens.bases {
                set.bases
                    .insert(net.base(a).ok_or_else(|| NetError::UnknownBase(a.clone()))?);
            }
            for [x, y] in &tokens.bonds {
                let bond = net
                    .bond(x, y)
                    .ok_or_else(|| NetError::UndeclaredBond(format!("{x}-{y}")))?;
                set.bonds.insert(bond);
            }
        }
        Ok((net, marking))
    }

    /// Digest of the canonical form, independent of the input's layout.
    pub fn digest(&self) -> Result<String, DocError> {
        let (net, marking) = self.to_net()?;
        let canonical = NetDocument::from_net(&net, &marking).to_json();
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }
}

/// Reads a document from a path, or falls back to a built-in fixture name.
pub fn load(source: &str) -> Result<NetDocument, DocError> {
    let path = Path::new(source);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| DocError::Read {
            path: source.to_string(),
            source: e,
        })?;
        return NetDocument::parse(&text);
    }
    NetDocument::from_fixture(source).ok_or_else(|| DocError::NotFound(source.to_string()))
}

/// What a translation was generated from. Carries the source document so
/// the translation can be regenerated from the file alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    /// Sha-256 of the canonical source document.
    pub source_digest: String,
    pub source: NetDocument,
    pub semantics: Semantics,
    pub dependence: DependenceKind,
    pub co_guard: CoGuard,
}

/// A generated coloured net, its layout, and where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpnDocument {
    pub format: u32,
    pub provenance: Provenance,
    pub layout: TranslationLayout,
    pub cpn: CpnNet,
}

impl CpnDocument {
    pub fn new(source: &NetDocument, translation: Translation) -> Result<CpnDocument, DocError> {
        Ok(CpnDocument {
            format: FORMAT_VERSION,
            provenance: Provenance {
                source_digest: source.digest()?,
                source: source.clone(),
                semantics: translation.layout.semantics,
                dependence: translation.layout.dependence,
                co_guard: translation.layout.co_guard,
            },
            layout: translation.layout,
            cpn: translation.cpn,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<CpnDocument, DocError> {
        let doc: CpnDocument = serde_json::from_str(text)?;
        if doc.format != FORMAT_VERSION {
            return Err(DocError::Version(doc.format));
        }
        Ok(doc)
    }
}

/// The initial state of a document whose marking passed the checks.
pub fn initial_state(net: &NetDef, marking: Marking) -> State {
    State::initial(net, marking)
}

impl CpnDocument {
    /// Translates the embedded source again with the recorded options.
    pub fn regenerate(&self) -> Result<CpnDocument, crate::CliError> {
        let src = &self.provenance.source;
        let (net, marking) = src.to_net()?;
        let initial = State::initial(&net, marking);
        let loaded = crate::commands::Loaded {
            doc: src.clone(),
            net,
            initial,
        };
        let p = &self.provenance;
        crate::commands::translation_document(&loaded, p.semantics, p.dependence, p.co_guard)
    }
}
