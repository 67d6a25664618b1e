//! Circuit description: a small SPICE dialect and its in-memory form.
//!
//! ```text
//! * title comment (first line, optional)
//! R<name> n1 n2 <ohms>
//! C<name> n1 n2 <farads>
//! V<name> n+ n- DC <v> | PWL(t1 v1 t2 v2 ...) | PULSE(v1 v2 td tr tf pw per)
//! XRTD<name> n1 n2 <model>
//! XNW<name>  n1 n2 <model>
//! M<name> nd ng ns nb <model>
//! N<name> n+ n- <intensity>
//! .model <name> RTD|NMOS|NW (<key>=<value> ...)
//! .op
//! .dc <source> <start> <stop> <points>
//! .tran <tstop> [eps=<e>]
//! .stoch <tstop> <dt> <paths> [seed=<s>]
//! .end
//! ```
//!
//! Lines starting with `*` are comments, lines starting with `+` continue the
//! previous card. Keywords, element names, node names and model names are
//! case-insensitive. Node `0` is ground.

mod parse;
mod value;
mod waveform;

use std::collections::BTreeMap;
use std::fmt;

pub use parse::{parse_element_card, parse_netlist, ParseError, ParseErrorKind};
pub use value::{format_value, parse_value};
pub use waveform::{Pulse, Waveform};

use crate::devices::{MosModel, NanowireModel, RtdModel};

pub const GROUND: &str = "0";

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub title: String,
    /// Non-ground nodes in order of first appearance.
    pub nodes: Vec<String>,
    pub elements: Vec<Element>,
    /// Keyed by lower-cased model name.
    pub models: BTreeMap<String, ModelCard>,
    pub analyses: Vec<Analysis>,
}

#[derive(Debug, Clone)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
    /// 1-based source line of the card; not part of structural equality.
    pub line: usize,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor {
        a: String,
        b: String,
        ohms: f64,
    },
    Capacitor {
        a: String,
        b: String,
        farads: f64,
    },
    VSource {
        pos: String,
        neg: String,
        wave: Waveform,
    },
    Rtd {
        a: String,
        b: String,
        model: String,
    },
    Mosfet {
        drain: String,
        gate: String,
        source: String,
        bulk: String,
        model: String,
    },
    Nanowire {
        a: String,
        b: String,
        model: String,
    },
    /// White-noise current injected into `pos` and drawn from `neg`.
    Noise {
        pos: String,
        neg: String,
        intensity: f64,
    },
}

impl ElementKind {
    /// All terminals in card order (four for a MOSFET, two otherwise).
    pub fn terminals(&self) -> Vec<&str> {
        match self {
            ElementKind::Resistor { a, b, .. }
            | ElementKind::Capacitor { a, b, .. }
            | ElementKind::Rtd { a, b, .. }
            | ElementKind::Nanowire { a, b, .. } => vec![a, b],
            ElementKind::VSource { pos, neg, .. } | ElementKind::Noise { pos, neg, .. } => {
                vec![pos, neg]
            }
            ElementKind::Mosfet {
                drain,
                gate,
                source,
                bulk,
                ..
            } => vec![drain, gate, source, bulk],
        }
    }

    /// Terminals that carry current or constrain a node. The MOSFET bulk is
    /// accepted by the grammar but has no electrical effect.
    pub fn connected_terminals(&self) -> Vec<&str> {
        let mut t = self.terminals();
        if matches!(self, ElementKind::Mosfet { .. }) {
            t.truncate(3);
        }
        t
    }

    pub fn model_name(&self) -> Option<&str> {
        match self {
            ElementKind::Rtd { model, .. }
            | ElementKind::Mosfet { model, .. }
            | ElementKind::Nanowire { model, .. } => Some(model),
            _ => None,
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        self.model_name().is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelCard {
    Rtd(RtdModel),
    Nmos(MosModel),
    Nanowire(NanowireModel),
}

impl ModelCard {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelCard::Rtd(_) => "RTD",
            ModelCard::Nmos(_) => "NMOS",
            ModelCard::Nanowire(_) => "NW",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    Op,
    Dc {
        source: String,
        start: f64,
        stop: f64,
        points: usize,
    },
    Tran {
        tstop: f64,
        eps: Option<f64>,
    },
    Stoch {
        tstop: f64,
        dt: f64,
        paths: usize,
        seed: Option<u64>,
    },
}

impl Netlist {
    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn model(&self, name: &str) -> Option<&ModelCard> {
        self.models.get(&name.to_ascii_lowercase())
    }

    pub fn has_noise(&self) -> bool {
        self.elements
            .iter()
            .any(|e| matches!(e.kind, ElementKind::Noise { .. }))
    }

    pub fn dc_directive(&self) -> Option<&Analysis> {
        self.analyses.iter().find(|a| matches!(a, Analysis::Dc { .. }))
    }

    pub fn tran_directive(&self) -> Option<&Analysis> {
        self.analyses
            .iter()
            .find(|a| matches!(a, Analysis::Tran { .. }))
    }

    pub fn stoch_directive(&self) -> Option<&Analysis> {
        self.analyses
            .iter()
            .find(|a| matches!(a, Analysis::Stoch { .. }))
    }
}

impl fmt::Display for Netlist {
    /// Writes the deck back out in the accepted dialect.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.title.is_empty() {
            writeln!(f, "* {}", self.title)?;
        }
        for e in &self.elements {
            writeln!(f, "{e}")?;
        }
        for (name, card) in &self.models {
            writeln!(f, "{}", ModelDisplay(name, card))?;
        }
        for a in &self.analyses {
            writeln!(f, "{a}")?;
        }
        writeln!(f, ".end")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = &self.name;
        match &self.kind {
            ElementKind::Resistor { a, b, ohms } => write!(f, "{n} {a} {b} {}", format_value(*ohms)),
            ElementKind::Capacitor { a, b, farads } => {
                write!(f, "{n} {a} {b} {}", format_value(*farads))
            }
            ElementKind::VSource { pos, neg, wave } => write!(f, "{n} {pos} {neg} {wave}"),
            ElementKind::Rtd { a, b, model } | ElementKind::Nanowire { a, b, model } => {
                write!(f, "{n} {a} {b} {model}")
            }
            ElementKind::Mosfet {
                drain,
                gate,
                source,
                bulk,
                model,
            } => write!(f, "{n} {drain} {gate} {source} {bulk} {model}"),
            ElementKind::Noise {
                pos,
                neg,
                intensity,
            } => write!(f, "{n} {pos} {neg} {}", format_value(*intensity)),
        }
    }
}

struct ModelDisplay<'a>(&'a str, &'a ModelCard);

impl fmt::Display for ModelDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = format_value;
        match self.1 {
            ModelCard::Rtd(m) => write!(
                f,
                ".model {} RTD (A={} B={} C={} D={} H={} n1={} n2={} T={} area={})",
                self.0,
                v(m.a),
                v(m.b),
                v(m.cp),
                v(m.d),
                v(m.h),
                v(m.n1),
                v(m.n2),
                v(m.temp),
                v(m.area)
            ),
            ModelCard::Nmos(m) => write!(
                f,
                ".model {} NMOS (k={} W={} L={} Vth={})",
                self.0,
                v(m.k),
                v(m.w),
                v(m.l),
                v(m.vth)
            ),
            ModelCard::Nanowire(m) => write!(
                f,
                ".model {} NW (g0={} vstep={} nsteps={} smooth={})",
                self.0,
                v(m.g0),
                v(m.vstep),
                m.nsteps,
                v(m.smooth)
            ),
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Analysis::Op => write!(f, ".op"),
            Analysis::Dc {
                source,
                start,
                stop,
                points,
            } => write!(
                f,
                ".dc {source} {} {} {points}",
                format_value(*start),
                format_value(*stop)
            ),
            Analysis::Tran { tstop, eps } => {
                write!(f, ".tran {}", format_value(*tstop))?;
                if let Some(eps) = eps {
                    write!(f, " eps={}", format_value(*eps))?;
                }
                Ok(())
            }
            Analysis::Stoch {
                tstop,
                dt,
                paths,
                seed,
            } => {
                write!(f, ".stoch {} {} {paths}", format_value(*tstop), format_value(*dt))?;
                if let Some(seed) = seed {
                    write!(f, " seed={seed}")?;
                }
                Ok(())
            }
        }
    }
}
