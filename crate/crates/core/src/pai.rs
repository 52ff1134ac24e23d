//! Partial argument instantiations (PAIs): total maps from a command's
//! formal arguments to actual arguments, with `~` for the empty one.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::logic::{format_positions, parse_positions, parse_term, Position, Signature, Term};
use crate::proof::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaiError {
    #[error("cannot compare PAIs of {0} and {1}")]
    CommandMismatch(String, String),
    #[error("malformed PAI `{text}`: {reason}")]
    Parse { text: String, reason: String },
    #[error("{command} has no formal argument `{name}`")]
    UnknownArgument { command: String, name: String },
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    PremiseLine,
    PremiseLines,
    ConclusionLine,
    Positions,
    Term,
}

impl SlotKind {
    pub fn is_line(self) -> bool {
        matches!(
            self,
            SlotKind::PremiseLine | SlotKind::PremiseLines | SlotKind::ConclusionLine
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalArgument {
    pub name: &'static str,
    pub kind: SlotKind,
}

impl FormalArgument {
    pub const fn new(name: &'static str, kind: SlotKind) -> Self {
        FormalArgument { name, kind }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Actual {
    Empty,
    Line(Label),
    Lines(Vec<Label>),
    Positions(Vec<Position>),
    Term(Term),
}

impl Actual {
    pub fn is_empty(&self) -> bool {
        matches!(self, Actual::Empty)
    }

    pub fn is_line(&self) -> bool {
        matches!(self, Actual::Line(_) | Actual::Lines(_))
    }

    pub fn as_line(&self) -> Option<&Label> {
        match self {
            Actual::Line(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_lines(&self) -> Option<&[Label]> {
        match self {
            Actual::Lines(ls) => Some(ls),
            _ => None,
        }
    }

    pub fn as_positions(&self) -> Option<&[Position]> {
        match self {
            Actual::Positions(ps) => Some(ps),
            _ => None,
        }
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            Actual::Term(t) => Some(t),
            _ => None,
        }
    }

    fn parse(text: &str, sig: &mut Signature) -> Result<Actual, String> {
        let text = text.trim();
        if text == "~" {
            return Ok(Actual::Empty);
        }
        if let Some(inner) = text.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            return Ok(Actual::Lines(
                inner.split_whitespace().map(Label::new).collect(),
            ));
        }
        if text.starts_with('[') {
            return parse_positions(text)
                .map(Actual::Positions)
                .map_err(|e| e.to_string());
        }
        if let Some(inner) = text.strip_prefix('\'').and_then(|r| r.strip_suffix('\'')) {
            return parse_term(inner, sig)
                .map(Actual::Term)
                .map_err(|e| e.to_string());
        }
        if !text.is_empty() && text.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Ok(Actual::Line(Label::new(text)));
        }
        Err(format!("unrecognized actual argument `{text}`"))
    }
}

impl fmt::Display for Actual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actual::Empty => f.write_str("~"),
            Actual::Line(l) => write!(f, "{l}"),
            Actual::Lines(ls) => {
                let v: Vec<&str> = ls.iter().map(Label::as_str).collect();
                write!(f, "({})", v.join(" "))
            }
            Actual::Positions(ps) => f.write_str(&format_positions(ps)),
            Actual::Term(t) => write!(f, "'{}'", t.annotated()),
        }
    }
}

/// A partial argument instantiation. Immutable; extensions are new values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pai {
    command: String,
    args: Vec<(&'static str, Actual)>,
    pub producer: String,
    pub epoch: u64,
}

impl Pai {
    /// The all-empty PAI of a command with the given formal arguments.
    pub fn empty(command: &str, formals: &[FormalArgument], epoch: u64) -> Pai {
        Pai {
            command: command.to_string(),
            args: formals.iter().map(|f| (f.name, Actual::Empty)).collect(),
            producer: String::new(),
            epoch,
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn args(&self) -> &[(&'static str, Actual)] {
        &self.args
    }

    pub fn get(&self, name: &str) -> Option<&Actual> {
        self.args.iter().find(|(n, _)| *n == name).map(|(_, a)| a)
    }

    pub fn is_set(&self, name: &str) -> bool {
        self.get(name).is_some_and(|a| !a.is_empty())
    }

    pub fn line(&self, name: &str) -> Option<&Label> {
        self.get(name).and_then(Actual::as_line)
    }

    /// Copy with `name` bound to `value`.
    pub fn with(&self, name: &str, value: Actual) -> Result<Pai, PaiError> {
        let mut next = self.clone();
        let slot = next
            .args
            .iter_mut()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| PaiError::UnknownArgument {
                command: self.command.clone(),
                name: name.to_string(),
            })?;
        slot.1 = value;
        Ok(next)
    }

    pub fn produced_by(mut self, producer: &str, epoch: u64) -> Pai {
        self.producer = producer.to_string();
        self.epoch = epoch;
        self
    }

    /// Names of the instantiated formal arguments, in formal order.
    pub fn instantiated(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.args
            .iter()
            .filter(|(_, a)| !a.is_empty())
            .map(|(n, _)| *n)
    }

    pub fn instantiated_count(&self) -> usize {
        self.args.iter().filter(|(_, a)| !a.is_empty()).count()
    }

    pub fn line_count(&self) -> usize {
        self.args.iter().filter(|(_, a)| a.is_line()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.args.iter().all(|(_, a)| !a.is_empty())
    }

    pub fn completeness(&self) -> f64 {
        if self.args.is_empty() {
            return 1.0;
        }
        self.instantiated_count() as f64 / self.args.len() as f64
    }

    /// True iff every non-empty entry of `self` appears identically in
    /// `candidate`.
    pub fn extended_by(&self, candidate: &Pai) -> Result<bool, PaiError> {
        self.same_command(candidate)?;
        Ok(self
            .args
            .iter()
            .filter(|(_, a)| !a.is_empty())
            .all(|(n, a)| candidate.get(n) == Some(a)))
    }

    /// Mapping equality, ignoring producer and epoch.
    pub fn same_mapping(&self, other: &Pai) -> bool {
        self.command == other.command && self.args == other.args
    }

    fn same_command(&self, other: &Pai) -> Result<(), PaiError> {
        if self.command != other.command {
            return Err(PaiError::CommandMismatch(
                self.command.clone(),
                other.command.clone(),
            ));
        }
        Ok(())
    }

    fn tie_key(&self) -> (Vec<&'static str>, Vec<String>) {
        let mut set: Vec<(&'static str, String)> = self
            .args
            .iter()
            .filter(|(_, a)| !a.is_empty())
            .map(|(n, a)| (*n, a.to_string()))
            .collect();
        set.sort();
        set.into_iter().unzip()
    }

    /// Canonical text, e.g. `=Subst{u:L1,eq:~,s:L2,pl:[1]}`.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

/// A parsed PAI literal, not yet checked against a command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaiLiteral {
    pub command: String,
    pub args: Vec<(String, Actual)>,
}

impl PaiLiteral {
    /// Parses the canonical form; arguments may be omitted or reordered.
    pub fn parse(text: &str, sig: &mut Signature) -> Result<PaiLiteral, PaiError> {
        let err = |reason: &str| PaiError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let text_t = text.trim();
        let open = text_t.find('{').ok_or_else(|| err("missing `{`"))?;
        let body = text_t[open + 1..]
            .strip_suffix('}')
            .ok_or_else(|| err("missing closing `}`"))?;
        let command = text_t[..open].trim();
        if command.is_empty() {
            return Err(err("missing command name"));
        }
        let mut args: Vec<(String, Actual)> = Vec::new();
        for field in split_fields(body).map_err(|r| err(&r))? {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let colon = field.find(':').ok_or_else(|| err("field without `:`"))?;
            let name = field[..colon].trim().to_string();
            if args.iter().any(|(n, _)| *n == name) {
                return Err(err(&format!("duplicate argument `{name}`")));
            }
            let value = Actual::parse(&field[colon + 1..], sig).map_err(|r| err(&r))?;
            args.push((name, value));
        }
        Ok(PaiLiteral {
            command: command.to_string(),
            args,
        })
    }

    pub fn get(&self, name: &str) -> Option<&Actual> {
        self.args.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    /// Re-keys the literal onto a command's formal argument list, filling
    /// absent arguments with `~`.
    pub fn totalize(&self, formals: &[FormalArgument]) -> Result<Pai, PaiError> {
        for (n, _) in &self.args {
            if !formals.iter().any(|f| f.name == n) {
                return Err(PaiError::UnknownArgument {
                    command: self.command.clone(),
                    name: n.clone(),
                });
            }
        }
        Ok(Pai {
            command: self.command.clone(),
            args: formals
                .iter()
                .map(|f| (f.name, self.get(f.name).cloned().unwrap_or(Actual::Empty)))
                .collect(),
            producer: String::new(),
            epoch: 0,
        })
    }
}

fn split_fields(body: &str) -> Result<Vec<&str>, String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut quoted = false;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '\'' => quoted = !quoted,
            '(' | '[' if !quoted => depth += 1,
            ')' | ']' if !quoted => depth -= 1,
            ',' if !quoted && depth == 0 => {
                out.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if quoted || depth != 0 {
        return Err("unbalanced brackets or quotes".into());
    }
    out.push(&body[start..]);
    Ok(out)
}

impl fmt::Display for Pai {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{", self.command)?;
        for (k, (n, a)) in self.args.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}:{a}")?;
        }
        f.write_str("}")
    }
}

/// `true` iff every non-empty entry of `base` appears in `candidate`.
pub fn extends(base: &Pai, candidate: &Pai) -> Result<bool, PaiError> {
    base.extended_by(candidate)
}

/// Total order on PAIs of one command; `Greater` means `p1` is better.
///
/// More instantiated arguments win, then more instantiated line slots,
/// then the lexicographically smaller (names, values) key.
pub fn better(p1: &Pai, p2: &Pai) -> Result<Ordering, PaiError> {
    p1.same_command(p2)?;
    Ok(p1
        .instantiated_count()
        .cmp(&p2.instantiated_count())
        .then(p1.line_count().cmp(&p2.line_count()))
        .then_with(|| p2.tie_key().cmp(&p1.tie_key())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUBST: [FormalArgument; 4] = [
        FormalArgument::new("u", SlotKind::PremiseLine),
        FormalArgument::new("eq", SlotKind::PremiseLine),
        FormalArgument::new("s", SlotKind::ConclusionLine),
        FormalArgument::new("pl", SlotKind::Positions),
    ];

    fn pai(text: &str) -> Pai {
        PaiLiteral::parse(text, &mut Signature::new())
            .unwrap()
            .totalize(&SUBST)
            .unwrap()
    }

    #[test]
    fn canonical_serialization() {
        let p = pai("=Subst{u:L1,s:L2}");
        assert_eq!(p.to_string(), "=Subst{u:L1,eq:~,s:L2,pl:~}");
        let p = pai("=Subst{s:L2,u:L1,pl:[1]}");
        assert_eq!(p.to_string(), "=Subst{u:L1,eq:~,s:L2,pl:[1]}");
    }

    #[test]
    fn counts() {
        assert_eq!(pai("=Subst{u:L1,eq:~,s:L2,pl:~}").instantiated_count(), 2);
        assert_eq!(Pai::empty("=Subst", &SUBST, 1).instantiated_count(), 0);
        assert_eq!(pai("=Subst{u:L1,s:L2,pl:[1]}").instantiated_count(), 3);
    }

    #[test]
    fn extension() {
        let base = pai("=Subst{u:L1,s:L2}");
        let cand = pai("=Subst{u:L1,s:L2,pl:[1]}");
        assert!(extends(&base, &cand).unwrap());
        assert!(!extends(&cand, &base).unwrap());
        assert!(extends(&base, &base).unwrap());
        assert!(!extends(&pai("=Subst{u:L1}"), &pai("=Subst{u:L2}")).unwrap());
    }

    #[test]
    fn better_ordering() {
        let full = pai("=Subst{u:L1,s:L2,pl:[1]}");
        let part = pai("=Subst{u:L1,s:L2}");
        assert_eq!(better(&full, &part).unwrap(), Ordering::Greater);
        assert_eq!(better(&full, &full).unwrap(), Ordering::Equal);
        let lines = pai("=Subst{u:L1,eq:L3}");
        let mixed = pai("=Subst{u:L1,pl:[1]}");
        assert_eq!(better(&lines, &mixed).unwrap(), Ordering::Greater);
    }

    #[test]
    fn command_mismatch() {
        let other = Pai::empty("=>I", &[FormalArgument::new("conc", SlotKind::ConclusionLine)], 1);
        let p = pai("=Subst{u:L1}");
        assert!(matches!(better(&p, &other), Err(PaiError::CommandMismatch(..))));
        assert!(extends(&p, &other).is_err());
    }

    #[test]
    fn parse_errors() {
        let mut sig = Signature::new();
        assert!(PaiLiteral::parse("=Subst", &mut sig).is_err());
        assert!(PaiLiteral::parse("=Subst{u:L1", &mut sig).is_err());
        assert!(PaiLiteral::parse("=Subst{u L1}", &mut sig).is_err());
        assert!(PaiLiteral::parse("=Subst{u:L1,u:L2}", &mut sig).is_err());
        assert!(PaiLiteral::parse("=Subst{pl:[1}", &mut sig).is_err());
        assert!(matches!(
            PaiLiteral::parse("=Subst{zz:L1}", &mut sig).unwrap().totalize(&SUBST),
            Err(PaiError::UnknownArgument { .. })
        ));
    }

    #[test]
    fn values_of_every_kind() {
        let mut sig = Signature::new();
        let cat = crate::tactics::Catalog::standard();
        let mut full = |t: &str| cat.resolve(&PaiLiteral::parse(t, &mut sig).unwrap()).unwrap();
        let p = full("AllE{p:L1,t:'(f:(i>i) c:i)',c:~}");
        assert_eq!(p.to_string(), "AllE{p:L1,t:'(f:(i>i) c:i)',c:~}");
        let p = full("PropSolve{conc:L4,prems:()}");
        assert_eq!(p.get("prems"), Some(&Actual::Lines(vec![])));
        assert_eq!(p.to_string(), "PropSolve{conc:L4,prems:()}");
        let p = PaiLiteral::parse("=Subst{pl:[1][2,1]}", &mut sig).unwrap();
        assert_eq!(p.get("pl").unwrap().as_positions().unwrap().len(), 2);
    }
}
