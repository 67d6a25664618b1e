use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::value::parse_value;
use super::waveform::{Pulse, Waveform};
use super::{Analysis, Element, ElementKind, ModelCard, Netlist, GROUND};
use crate::devices::rtd::DEFAULT_TEMPERATURE;
use crate::devices::{MosModel, NanowireModel, RtdModel};

/// A diagnostic pointing at the card that caused it. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{model}` is {found}, expected {expected}")]
    WrongModelKind {
        model: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("node `{0}` has only one connection")]
    DanglingNode(String),
    #[error("node `{0}` has no path to ground")]
    NoGroundPath(String),
    #[error("no element connects to ground node 0")]
    NoGround,
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` does not name a voltage source")]
    UnknownSource(String),
    #[error("missing .end card")]
    MissingEnd,
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    line: usize,
    column: usize,
}

impl Token {
    fn is_symbol(&self, c: char) -> bool {
        self.text.len() == 1 && self.text.starts_with(c)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            kind,
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::Syntax(msg.into()))
    }

    fn invalid(&self, msg: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::InvalidValue(msg.into()))
    }

    fn value(&self) -> Result<f64, ParseError> {
        parse_value(&self.text).ok_or_else(|| self.syntax(format!("`{}` is not a number", self.text)))
    }
}

/// One logical card: the tokens of a line plus any `+` continuations.
#[derive(Debug)]
struct Card {
    tokens: Vec<Token>,
}

impl Card {
    fn head(&self) -> &Token {
        &self.tokens[0]
    }

    fn end_error(&self, msg: &str) -> ParseError {
        let last = self.tokens.last().expect("cards are never empty");
        ParseError {
            line: last.line,
            column: last.column + last.text.chars().count(),
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    fn expect_len(&self, n: usize, usage: &str) -> Result<(), ParseError> {
        match self.tokens.len().cmp(&n) {
            std::cmp::Ordering::Equal => Ok(()),
            std::cmp::Ordering::Less => Err(self.end_error(&format!("too few fields, expected `{usage}`"))),
            std::cmp::Ordering::Greater => {
                Err(self.tokens[n].syntax(format!("unexpected field, expected `{usage}`")))
            }
        }
    }
}

fn tokenize_line(raw: &str, line: usize, out: &mut Vec<Token>) {
    let mut current = String::new();
    let mut start = 0;
    let flush = |current: &mut String, start: usize, out: &mut Vec<Token>| {
        if !current.is_empty() {
            out.push(Token {
                text: std::mem::take(current),
                line,
                column: start,
            });
        }
    };
    for (i, c) in raw.chars().enumerate() {
        let column = i + 1;
        if c.is_whitespace() || c == ',' {
            flush(&mut current, start, out);
        } else if matches!(c, '(' | ')' | '=') {
            flush(&mut current, start, out);
            out.push(Token {
                text: c.to_string(),
                line,
                column,
            });
        } else {
            if current.is_empty() {
                start = column;
            }
            current.push(c);
        }
    }
    flush(&mut current, start, out);
}

/// Splits source text into cards. Returns the title, the cards, and whether `.end` was seen.
fn split_cards(source: &str) -> Result<(String, Vec<Card>, bool), ParseError> {
    let mut title = String::new();
    let mut cards: Vec<Card> = Vec::new();
    let mut saw_end = false;
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('*') {
            if idx == 0 {
                title = comment.trim().to_string();
            }
            continue;
        }
        if trimmed.starts_with('+') {
            let Some(card) = cards.last_mut() else {
                let column = raw.find('+').map_or(1, |i| raw[..i].chars().count() + 1);
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::Syntax("continuation line with no card to continue".into()),
                });
            };
            let plus = raw.find('+').expect("line starts with +");
            let mut tokens = Vec::new();
            let blanked: String = raw
                .char_indices()
                .map(|(i, c)| if i == plus { ' ' } else { c })
                .collect();
            tokenize_line(&blanked, line, &mut tokens);
            card.tokens.extend(tokens);
            continue;
        }
        let mut tokens = Vec::new();
        tokenize_line(raw, line, &mut tokens);
        if tokens[0].text.eq_ignore_ascii_case(".end") {
            if tokens.len() > 1 {
                return Err(tokens[1].syntax(".end takes no fields"));
            }
            saw_end = true;
            break;
        }
        cards.push(Card { tokens });
    }
    Ok((title, cards, saw_end))
}

/// Parses and validates a complete deck.
pub fn parse_netlist(source: &str) -> Result<Netlist, ParseError> {
    let (title, cards, saw_end) = split_cards(source)?;

    let mut elements = Vec::new();
    let mut models = BTreeMap::new();
    let mut model_lines = HashMap::new();
    let mut analyses = Vec::new();
    let mut analysis_tokens = Vec::new();

    for card in &cards {
        let head = card.head();
        if head.text.starts_with('.') {
            let directive = head.text.to_ascii_lowercase();
            if directive == ".model" {
                let (name, model) = parse_model(card)?;
                if model_lines.insert(name.clone(), head.line).is_some() {
                    return Err(card.tokens[1].err(ParseErrorKind::DuplicateName(name)));
                }
                models.insert(name, model);
            } else {
                analyses.push(parse_analysis(card, &directive)?);
                analysis_tokens.push(head.clone());
            }
        } else {
            elements.push(parse_element(card)?);
        }
    }

    if !saw_end {
        let line = source.lines().count() + 1;
        return Err(ParseError {
            line,
            column: 1,
            kind: ParseErrorKind::MissingEnd,
        });
    }

    let netlist = Netlist {
        title,
        nodes: collect_nodes(&elements),
        elements,
        models,
        analyses,
    };
    validate(&netlist, &cards, &analysis_tokens)?;
    Ok(netlist)
}

/// Parses a single element card without any cross-card validation.
pub fn parse_element_card(text: &str) -> Result<Element, ParseError> {
    let mut tokens = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let raw = raw.trim_start();
        let raw = raw.strip_prefix('+').unwrap_or(raw);
        tokenize_line(raw, idx + 1, &mut tokens);
    }
    if tokens.is_empty() {
        return Err(ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::Syntax("empty card".into()),
        });
    }
    parse_element(&Card { tokens })
}

fn node_name(tok: &Token) -> Result<String, ParseError> {
    let ok = tok
        .text
        .chars()
        .all(|c| c.is_alphanumeric() || matches!(c, '_' | '#' | '.' | '-' | '[' | ']' | ':' | '<' | '>' | '!' | '$' | '/'));
    if !ok || tok.text.starts_with('.') {
        return Err(tok.syntax(format!("`{}` is not a valid node name", tok.text)));
    }
    Ok(tok.text.to_ascii_lowercase())
}

fn ident(tok: &Token) -> Result<String, ParseError> {
    if tok.text.len() == 1 && matches!(tok.text.as_bytes()[0], b'(' | b')' | b'=') {
        return Err(tok.syntax(format!("expected a name, found `{}`", tok.text)));
    }
    Ok(tok.text.to_ascii_lowercase())
}

fn positive(tok: &Token, what: &str) -> Result<f64, ParseError> {
    let v = tok.value()?;
    if v <= 0.0 {
        return Err(tok.invalid(format!("{what} must be positive, got {v}")));
    }
    Ok(v)
}

fn parse_element(card: &Card) -> Result<Element, ParseError> {
    let t = &card.tokens;
    let head = card.head();
    let name = head.text.clone();
    let lower = name.to_ascii_lowercase();
    let kind = if lower.starts_with("xrtd") {
        card.expect_len(4, "XRTD<name> n1 n2 <model>")?;
        ElementKind::Rtd {
            a: node_name(&t[1])?,
            b: node_name(&t[2])?,
            model: ident(&t[3])?,
        }
    } else if lower.starts_with("xnw") {
        card.expect_len(4, "XNW<name> n1 n2 <model>")?;
        ElementKind::Nanowire {
            a: node_name(&t[1])?,
            b: node_name(&t[2])?,
            model: ident(&t[3])?,
        }
    } else {
        match lower.as_bytes()[0] {
            b'r' => {
                card.expect_len(4, "R<name> n1 n2 <ohms>")?;
                ElementKind::Resistor {
                    a: node_name(&t[1])?,
                    b: node_name(&t[2])?,
                    ohms: positive(&t[3], "resistance")?,
                }
            }
            b'c' => {
                card.expect_len(4, "C<name> n1 n2 <farads>")?;
                ElementKind::Capacitor {
                    a: node_name(&t[1])?,
                    b: node_name(&t[2])?,
                    farads: positive(&t[3], "capacitance")?,
                }
            }
            b'v' => {
                if t.len() < 4 {
                    return Err(card.end_error("too few fields, expected `V<name> n+ n- <waveform>`"));
                }
                ElementKind::VSource {
                    pos: node_name(&t[1])?,
                    neg: node_name(&t[2])?,
                    wave: parse_waveform(card, 3)?,
                }
            }
            b'm' => {
                card.expect_len(6, "M<name> nd ng ns nb <model>")?;
                ElementKind::Mosfet {
                    drain: node_name(&t[1])?,
                    gate: node_name(&t[2])?,
                    source: node_name(&t[3])?,
                    bulk: node_name(&t[4])?,
                    model: ident(&t[5])?,
                }
            }
            b'n' => {
                card.expect_len(4, "N<name> n+ n- <intensity>")?;
                let intensity = t[3].value()?;
                if intensity < 0.0 {
                    return Err(t[3].invalid(format!("noise intensity must be non-negative, got {intensity}")));
                }
                ElementKind::Noise {
                    pos: node_name(&t[1])?,
                    neg: node_name(&t[2])?,
                    intensity,
                }
            }
            _ => return Err(head.syntax(format!("unknown element type `{name}`"))),
        }
    };
    Ok(Element {
        name,
        kind,
        line: head.line,
    })
}

/// Numbers following a waveform keyword, with optional surrounding parentheses.
fn paren_values(card: &Card, from: usize) -> Result<(Vec<f64>, &Token), ParseError> {
    let t = &card.tokens[from..];
    let keyword = &card.tokens[from - 1];
    let body = match t.first() {
        Some(tok) if tok.is_symbol('(') => {
            let close = t
                .iter()
                .position(|tok| tok.is_symbol(')'))
                .ok_or_else(|| card.end_error("missing `)`"))?;
            if let Some(extra) = t.get(close + 1) {
                return Err(extra.syntax("unexpected field after `)`"));
            }
            &t[1..close]
        }
        _ => t,
    };
    let values = body
        .iter()
        .map(|tok| {
            if tok.text.len() == 1 && matches!(tok.text.as_bytes()[0], b'(' | b')' | b'=') {
                Err(tok.syntax(format!("unexpected `{}`", tok.text)))
            } else {
                tok.value()
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((values, keyword))
}

fn parse_waveform(card: &Card, from: usize) -> Result<Waveform, ParseError> {
    let t = &card.tokens;
    let kw = t[from].text.to_ascii_lowercase();
    let wave = match kw.as_str() {
        "dc" => {
            card.expect_len(from + 2, "V<name> n+ n- DC <volts>")?;
            Waveform::Dc(t[from + 1].value()?)
        }
        "pwl" => {
            let (values, keyword) = paren_values(card, from + 1)?;
            if values.is_empty() || values.len() % 2 != 0 {
                return Err(keyword.syntax("PWL needs an even, non-zero count of time/value fields"));
            }
            Waveform::Pwl(values.chunks(2).map(|c| (c[0], c[1])).collect())
        }
        "pulse" => {
            let (values, keyword) = paren_values(card, from + 1)?;
            if values.len() != 7 {
                return Err(keyword.syntax(format!(
                    "PULSE takes 7 fields (v1 v2 td tr tf pw per), found {}",
                    values.len()
                )));
            }
            Waveform::Pulse(Pulse {
                v1: values[0],
                v2: values[1],
                delay: values[2],
                rise: values[3],
                fall: values[4],
                width: values[5],
                period: values[6],
            })
        }
        _ => {
            card.expect_len(from + 1, "V<name> n+ n- [DC] <volts>")?;
            Waveform::Dc(t[from].value()?)
        }
    };
    wave.validate().map_err(|msg| t[from].invalid(msg))?;
    Ok(wave)
}

/// `key = value` pairs after a directive's positional fields, parentheses optional.
fn key_values(card: &Card, from: usize) -> Result<Vec<(String, Token)>, ParseError> {
    let mut t: Vec<&Token> = card.tokens[from..].iter().collect();
    if t.first().is_some_and(|tok| tok.is_symbol('(')) {
        if !t.last().is_some_and(|tok| tok.is_symbol(')')) {
            return Err(card.end_error("missing `)`"));
        }
        t = t[1..t.len() - 1].to_vec();
    }
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < t.len() {
        let key = t[i];
        if key.text.len() == 1 && matches!(key.text.as_bytes()[0], b'(' | b')' | b'=') {
            return Err(key.syntax(format!("expected a parameter name, found `{}`", key.text)));
        }
        match (t.get(i + 1), t.get(i + 2)) {
            (Some(eq), Some(val)) if eq.is_symbol('=') && !val.is_symbol('=') => {
                pairs.push((key.text.to_ascii_lowercase(), (*val).clone()));
                i += 3;
            }
            _ => return Err(key.syntax(format!("expected `{}=<value>`", key.text))),
        }
    }
    Ok(pairs)
}

fn parse_model(card: &Card) -> Result<(String, ModelCard), ParseError> {
    let t = &card.tokens;
    if t.len() < 3 {
        return Err(card.end_error("expected `.model <name> RTD|NMOS|NW (<key>=<value> ...)`"));
    }
    let name = ident(&t[1])?;
    let kind = t[2].text.to_ascii_lowercase();
    let mut pairs = key_values(card, 3)?;
    let mut seen = HashSet::new();
    for (key, tok) in &pairs {
        if !seen.insert(key.clone()) {
            return Err(tok.syntax(format!("parameter `{key}` given twice")));
        }
    }
    let mut value_of = |key: &str, default: Option<f64>| -> Result<f64, ParseError> {
        match pairs.iter().position(|(k, _)| k == key) {
            Some(idx) => pairs.remove(idx).1.value(),
            None => default.ok_or_else(|| card.end_error(&format!("model parameter `{key}` is required"))),
        }
    };
    let model = match kind.as_str() {
        "rtd" => {
            let m = RtdModel {
                a: value_of("a", None)?,
                b: value_of("b", None)?,
                cp: value_of("c", None)?,
                d: value_of("d", None)?,
                h: value_of("h", None)?,
                n1: value_of("n1", None)?,
                n2: value_of("n2", None)?,
                temp: value_of("t", Some(DEFAULT_TEMPERATURE))?,
                area: value_of("area", Some(1.0))?,
            };
            m.validate().map_err(|msg| t[2].invalid(msg))?;
            ModelCard::Rtd(m)
        }
        "nmos" => {
            let m = MosModel {
                k: value_of("k", None)?,
                w: value_of("w", None)?,
                l: value_of("l", None)?,
                vth: value_of("vth", None)?,
            };
            m.validate().map_err(|msg| t[2].invalid(msg))?;
            ModelCard::Nmos(m)
        }
        "nw" => {
            let g0 = value_of("g0", None)?;
            let vstep = value_of("vstep", None)?;
            let nsteps_raw = value_of("nsteps", None)?;
            let smooth = value_of("smooth", None)?;
            if nsteps_raw.fract() != 0.0 || !(1.0..=1e6).contains(&nsteps_raw) {
                return Err(t[2].invalid(format!("nsteps must be a positive integer, got {nsteps_raw}")));
            }
            let m = NanowireModel {
                g0,
                vstep,
                nsteps: nsteps_raw as u32,
                smooth,
            };
            m.validate().map_err(|msg| t[2].invalid(msg))?;
            ModelCard::Nanowire(m)
        }
        _ => return Err(t[2].syntax(format!("unknown model kind `{}`, expected RTD, NMOS or NW", t[2].text))),
    };
    if let Some((key, tok)) = pairs.first() {
        return Err(tok.syntax(format!("unknown {} parameter `{key}`", model.kind_name())));
    }
    Ok((name, model))
}

fn count(tok: &Token, what: &str, min: usize) -> Result<usize, ParseError> {
    let v = tok.value()?;
    if v.fract() != 0.0 || v < min as f64 || v > u32::MAX as f64 {
        return Err(tok.invalid(format!("{what} must be an integer >= {min}, got {}", tok.text)));
    }
    Ok(v as usize)
}

fn parse_analysis(card: &Card, directive: &str) -> Result<Analysis, ParseError> {
    let t = &card.tokens;
    match directive {
        ".op" => {
            card.expect_len(1, ".op")?;
            Ok(Analysis::Op)
        }
        ".dc" => {
            card.expect_len(5, ".dc <source> <start> <stop> <points>")?;
            Ok(Analysis::Dc {
                source: ident(&t[1])?,
                start: t[2].value()?,
                stop: t[3].value()?,
                points: count(&t[4], "sweep point count", 2)?,
            })
        }
        ".tran" => {
            if t.len() < 2 {
                return Err(card.end_error("expected `.tran <tstop> [eps=<e>]`"));
            }
            let tstop = positive(&t[1], "tstop")?;
            let mut eps = None;
            for (key, tok) in key_values(card, 2)? {
                match key.as_str() {
                    "eps" => {
                        let e = tok.value()?;
                        if !(e > 0.0 && e < 1.0) {
                            return Err(tok.invalid(format!("eps must lie in (0, 1), got {e}")));
                        }
                        eps = Some(e);
                    }
                    _ => return Err(tok.syntax(format!("unknown .tran option `{key}`"))),
                }
            }
            Ok(Analysis::Tran { tstop, eps })
        }
        ".stoch" => {
            if t.len() < 4 {
                return Err(card.end_error("expected `.stoch <tstop> <dt> <paths> [seed=<s>]`"));
            }
            let tstop = positive(&t[1], "tstop")?;
            let dt = positive(&t[2], "dt")?;
            let paths = count(&t[3], "path count", 1)?;
            let mut seed = None;
            for (key, tok) in key_values(card, 4)? {
                match key.as_str() {
                    "seed" => {
                        seed = Some(tok.text.parse::<u64>().map_err(|_| {
                            tok.invalid(format!("seed must be an unsigned integer, got `{}`", tok.text))
                        })?)
                    }
                    _ => return Err(tok.syntax(format!("unknown .stoch option `{key}`"))),
                }
            }
            Ok(Analysis::Stoch {
                tstop,
                dt,
                paths,
                seed,
            })
        }
        _ => Err(card.head().syntax(format!("unknown directive `{}`", card.head().text))),
    }
}

fn collect_nodes(elements: &[Element]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut nodes = Vec::new();
    for e in elements {
        for n in e.kind.connected_terminals() {
            if n != GROUND && seen.insert(n.to_string()) {
                nodes.push(n.to_string());
            }
        }
    }
    nodes
}

fn validate(net: &Netlist, cards: &[Card], analysis_tokens: &[Token]) -> Result<(), ParseError> {
    let element_card = |e: &Element| -> &Card {
        cards
            .iter()
            .find(|c| c.head().line == e.line && c.head().text == e.name)
            .expect("every element came from a card")
    };

    let mut names: HashSet<String> = HashSet::new();
    for e in &net.elements {
        if !names.insert(e.name.to_ascii_lowercase()) {
            return Err(element_card(e).head().err(ParseErrorKind::DuplicateName(e.name.clone())));
        }
    }

    for e in &net.elements {
        let Some(model) = e.kind.model_name() else { continue };
        let card = element_card(e);
        let model_tok = card.tokens.last().expect("model name is the last field");
        let expected = match e.kind {
            ElementKind::Rtd { .. } => "RTD",
            ElementKind::Mosfet { .. } => "NMOS",
            _ => "NW",
        };
        match net.models.get(model) {
            None => return Err(model_tok.err(ParseErrorKind::UnknownModel(model.to_string()))),
            Some(card) if card.kind_name() != expected => {
                return Err(model_tok.err(ParseErrorKind::WrongModelKind {
                    model: model.to_string(),
                    expected,
                    found: card.kind_name(),
                }))
            }
            Some(_) => {}
        }
    }

    // Connection counts and ground reachability.
    let mut connections: HashMap<&str, usize> = HashMap::new();
    let mut first_use: HashMap<&str, &Element> = HashMap::new();
    let mut touches_ground = false;
    for e in &net.elements {
        for n in e.kind.connected_terminals() {
            *connections.entry(n).or_default() += 1;
            first_use.entry(n).or_insert(e);
            touches_ground |= n == GROUND;
        }
    }
    for n in &net.nodes {
        if connections[n.as_str()] == 1 {
            let e = first_use[n.as_str()];
            return Err(element_card(e).head().err(ParseErrorKind::DanglingNode(n.clone())));
        }
    }
    if !net.elements.is_empty() && !touches_ground {
        let head = cards[0].head();
        return Err(head.err(ParseErrorKind::NoGround));
    }

    let index: HashMap<&str, usize> = std::iter::once(GROUND)
        .chain(net.nodes.iter().map(String::as_str))
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();
    let mut parent: Vec<usize> = (0..index.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for e in &net.elements {
        let terms = e.kind.connected_terminals();
        let first = index[terms[0]];
        for n in &terms[1..] {
            let (ra, rb) = (find(&mut parent, first), find(&mut parent, index[n]));
            parent[ra] = rb;
        }
    }
    for n in &net.nodes {
        if find(&mut parent, index[n.as_str()]) != find(&mut parent, 0) {
            let e = first_use[n.as_str()];
            return Err(element_card(e).head().err(ParseErrorKind::NoGroundPath(n.clone())));
        }
    }

    for (analysis, tok) in net.analyses.iter().zip(analysis_tokens) {
        if let Analysis::Dc { source, .. } = analysis {
            let ok = net.elements.iter().any(|e| {
                e.name.eq_ignore_ascii_case(source) && matches!(e.kind, ElementKind::VSource { .. })
            });
            if !ok {
                return Err(tok.err(ParseErrorKind::UnknownSource(source.clone())));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind_of(err: ParseError) -> ParseErrorKind {
        err.kind
    }

    #[test]
    fn single_resistor_card() {
        let e = parse_element_card("R1 1 0 1k").unwrap();
        assert_eq!(e.name, "R1");
        assert_eq!(
            e.kind,
            ElementKind::Resistor {
                a: "1".into(),
                b: "0".into(),
                ohms: 1000.0
            }
        );
    }

    #[test]
    fn negative_resistance_rejected() {
        let err = parse_element_card("R1 1 0 -5").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::InvalidValue(ref m) if m.contains("resistance must be positive")));
        assert_eq!((err.line, err.column), (1, 8));
    }

    const RTD_DIVIDER: &str = "\
* rtd divider
V1 in 0 DC 1
R1 in a 10
XRTD1 a 0 M1
.model M1 RTD (A=1e-4 B=2 C=1.5 D=0.3 H=1.43e-8 n1=0.35 n2=0.0172)
.end
";

    #[test]
    fn rtd_divider_deck() {
        let net = parse_netlist(RTD_DIVIDER).unwrap();
        assert_eq!(net.title, "rtd divider");
        assert_eq!(net.elements.len(), 3);
        assert_eq!(net.nodes, vec!["in", "a"]);
        let Some(ModelCard::Rtd(m)) = net.model("m1") else {
            panic!("model missing")
        };
        assert_eq!(*m, RtdModel::REFERENCE);
    }

    #[test]
    fn continuation_and_case() {
        let src = "\
V1 IN 0 pulse(0 5
+ 0 1n 1n 10n 30n)
r1 in 0 1K
.END
";
        let net = parse_netlist(src).unwrap();
        assert_eq!(net.nodes, vec!["in"]);
        assert!(matches!(
            net.elements[0].kind,
            ElementKind::VSource { wave: Waveform::Pulse(_), .. }
        ));
    }

    #[test]
    fn missing_end() {
        let err = parse_netlist("R1 1 0 1k\nR2 1 0 2k\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingEnd);
        assert_eq!(err.line, 3);
    }

    #[test]
    fn unknown_model_names_line() {
        let src = "V1 a 0 1\nXRTD1 a 0 nope\n.end\n";
        let err = parse_netlist(src).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownModel("nope".into()));
        assert_eq!((err.line, err.column), (2, 11));
    }

    #[test]
    fn wrong_model_kind() {
        let src = "V1 a 0 1\nXRTD1 a 0 m\n.model m NMOS (k=1e-4 W=1u L=1u Vth=1)\n.end\n";
        assert!(matches!(
            kind_of(parse_netlist(src).unwrap_err()),
            ParseErrorKind::WrongModelKind { expected: "RTD", found: "NMOS", .. }
        ));
    }

    #[test]
    fn dangling_node() {
        let src = "V1 a 0 1\nR1 a b 1k\n.end\n";
        let err = parse_netlist(src).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DanglingNode("b".into()));
        assert_eq!(err.line, 2);
    }

    #[test]
    fn duplicate_names_case_insensitive() {
        let src = "V1 a 0 1\nR1 a 0 1k\nr1 a 0 2k\n.end\n";
        let err = parse_netlist(src).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateName("r1".into()));
        assert_eq!(err.line, 3);
    }

    #[test]
    fn floating_island() {
        let src = "V1 a 0 1\nR1 a 0 1k\nR2 b c 1k\nR3 b c 1k\n.end\n";
        let err = parse_netlist(src).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NoGroundPath("b".into()));
    }

    #[test]
    fn no_ground() {
        let src = "R1 a b 1k\nR2 a b 1k\n.end\n";
        assert_eq!(kind_of(parse_netlist(src).unwrap_err()), ParseErrorKind::NoGround);
    }

    #[test]
    fn directives() {
        let src = "\
V1 a 0 DC 2
R1 a 0 1k
.op
.dc V1 0 4.5 60
.tran 10n eps=0.02
.stoch 1n 1p 100 seed=7
.end
trailing garbage is ignored
";
        let net = parse_netlist(src).unwrap();
        assert_eq!(
            net.analyses,
            vec![
                Analysis::Op,
                Analysis::Dc {
                    source: "v1".into(),
                    start: 0.0,
                    stop: 4.5,
                    points: 60
                },
                Analysis::Tran {
                    tstop: 10e-9,
                    eps: Some(0.02)
                },
                Analysis::Stoch {
                    tstop: 1e-9,
                    dt: 1e-12,
                    paths: 100,
                    seed: Some(7)
                },
            ]
        );
    }

    #[test]
    fn bad_directives() {
        let cases = [
            ("V1 a 0 1\nR1 a 0 1\n.dc V9 0 1 10\n.end\n", "does not name"),
            ("V1 a 0 1\nR1 a 0 1\n.dc V1 0 1 1\n.end\n", "integer"),
            ("V1 a 0 1\nR1 a 0 1\n.tran 1n eps=0\n.end\n", "eps"),
            ("V1 a 0 1\nR1 a 0 1\n.tran 1n foo=1\n.end\n", "option"),
            ("V1 a 0 1\nR1 a 0 1\n.frob\n.end\n", "directive"),
            ("V1 a 0 1\nR1 a 0 1\n.stoch 1n 1p 10 seed=-1\n.end\n", "seed"),
        ];
        for (src, needle) in cases {
            let err = parse_netlist(src).unwrap_err();
            assert!(err.to_string().contains(needle), "{err}");
            assert_eq!(err.line, 3);
        }
    }

    #[test]
    fn model_card_errors() {
        let missing = "V1 a 0 1\nXRTD1 a 0 m\n.model m RTD (A=1e-4 B=2)\n.end\n";
        assert!(parse_netlist(missing).unwrap_err().to_string().contains("required"));
        let unknown = "V1 a 0 1\nXNW1 a 0 m\n.model m NW (g0=1 vstep=1 nsteps=2 smooth=0.1 foo=2)\n.end\n";
        assert!(parse_netlist(unknown).unwrap_err().to_string().contains("foo"));
        let bad = "V1 a 0 1\nXNW1 a 0 m\n.model m NW (g0=1 vstep=1 nsteps=2.5 smooth=0.1)\n.end\n";
        assert!(parse_netlist(bad).unwrap_err().to_string().contains("nsteps"));
        let dup = "V1 a 0 1\nM1 a a 0 0 m\n.model m NMOS (k=1 W=1 L=1 Vth=1)\n.model M NMOS (k=1 W=1 L=1 Vth=1)\n.end\n";
        assert!(matches!(
            kind_of(parse_netlist(dup).unwrap_err()),
            ParseErrorKind::DuplicateName(_)
        ));
    }

    #[test]
    fn waveform_errors_point_at_keyword() {
        let src = "V1 a 0 PWL(0 0 1n)\nR1 a 0 1\n.end\n";
        let err = parse_netlist(src).unwrap_err();
        assert_eq!((err.line, err.column), (1, 8));
        let src = "V1 a 0 PULSE(0 5 0 0 1n 1n 10n)\nR1 a 0 1\n.end\n";
        assert!(parse_netlist(src).unwrap_err().to_string().contains("rise"));
    }

    #[test]
    fn round_trip_through_display() {
        let net = parse_netlist(RTD_DIVIDER).unwrap();
        let again = parse_netlist(&net.to_string()).unwrap();
        assert_eq!(net, again);
    }
}
