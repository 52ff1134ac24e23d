//! Textual formula syntax.
//!
//! ```text
//! expr  := ('all' | 'ex') name ':' type '.' expr | iff
//! iff   := imp ('<=>' imp)*
//! imp   := or ('=>' imp)?
//! or    := and ('|' and)*
//! and   := eqn ('&' eqn)*
//! eqn   := unary ('=' unary)?
//! unary := '~' unary | quantified | atom+        (juxtaposition is application)
//! atom  := name (':' type)? | '(' expr ')'
//! type  := ('i' | 'o' | '(' type ')') ('>' type)?
//! ```
//!
//! A constant must carry its type at its first occurrence; later
//! occurrences may omit it. Names bound by a quantifier are variables.

use std::collections::BTreeMap;

use super::{Connective, KernelError, Quantifier, Symbol, Term, Type};

/// Types of the constants seen so far.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<String, Type>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Type> {
        self.symbols.get(name)
    }

    pub fn declare(&mut self, name: &str, ty: Type) -> Result<(), KernelError> {
        match self.symbols.get(name) {
            Some(prev) if *prev != ty => Err(KernelError::Type(format!(
                "{name} declared as {prev} and as {ty}"
            ))),
            Some(_) => Ok(()),
            None => {
                self.symbols.insert(name.to_string(), ty);
                Ok(())
            }
        }
    }

    /// Declares every constant of `t`.
    pub fn absorb(&mut self, t: &Term) -> Result<(), KernelError> {
        for s in t.constants() {
            self.declare(&s.name, s.ty.clone())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Colon,
    LParen,
    RParen,
    Arrow,
    And,
    Or,
    Implies,
    Iff,
    Not,
    Eq,
    Dot,
}

fn tokenize(src: &str) -> Result<Vec<Tok>, KernelError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if c.is_whitespace() {
            i += 1;
        } else if rest.starts_with("<=>") {
            out.push(Tok::Iff);
            i += 3;
        } else if rest.starts_with("=>") {
            out.push(Tok::Implies);
            i += 2;
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Name(chars[start..i].iter().collect()));
        } else {
            out.push(match c {
                ':' => Tok::Colon,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '>' => Tok::Arrow,
                '&' => Tok::And,
                '|' => Tok::Or,
                '~' => Tok::Not,
                '=' => Tok::Eq,
                '.' => Tok::Dot,
                other => {
                    return Err(KernelError::Parse(format!(
                        "unexpected character `{other}`"
                    )))
                }
            });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'s> {
    toks: Vec<Tok>,
    pos: usize,
    sig: &'s mut Signature,
    bound: Vec<Symbol>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), KernelError> {
        match self.bump() {
            Some(t) if t == want => Ok(()),
            got => Err(KernelError::Parse(format!(
                "expected {want:?}, found {got:?}"
            ))),
        }
    }

    fn ty(&mut self) -> Result<Type, KernelError> {
        let dom = match self.bump() {
            Some(Tok::Name(n)) if n == "i" => Type::Individual,
            Some(Tok::Name(n)) if n == "o" => Type::Bool,
            Some(Tok::LParen) => {
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                t
            }
            got => return Err(KernelError::Parse(format!("expected a type, found {got:?}"))),
        };
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            Ok(Type::fun(dom, self.ty()?))
        } else {
            Ok(dom)
        }
    }

    fn expr(&mut self) -> Result<Term, KernelError> {
        let mut lhs = self.imp()?;
        while self.peek() == Some(&Tok::Iff) {
            self.bump();
            let rhs = self.imp()?;
            lhs = Term::binary(Connective::Iff, lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Term, KernelError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.imp()?;
            return Term::binary(Connective::Implies, lhs, rhs);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Term, KernelError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.and()?;
            lhs = Term::binary(Connective::Or, lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Term, KernelError> {
        let mut lhs = self.eqn()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.eqn()?;
            lhs = Term::binary(Connective::And, lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn eqn(&mut self) -> Result<Term, KernelError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::Eq) {
            self.bump();
            let rhs = self.unary()?;
            return Term::eq(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term, KernelError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Term::not(self.unary()?)
            }
            Some(Tok::Name(n)) if n == "all" || n == "ex" => self.quantified(),
            _ => {
                let mut head = self.atom()?;
                while matches!(self.peek(), Some(Tok::Name(_)) | Some(Tok::LParen)) {
                    if let Some(Tok::Name(n)) = self.peek() {
                        if n == "all" || n == "ex" {
                            break;
                        }
                    }
                    let arg = self.atom()?;
                    head = Term::app(head, arg)?;
                }
                Ok(head)
            }
        }
    }

    fn quantified(&mut self) -> Result<Term, KernelError> {
        let q = match self.bump() {
            Some(Tok::Name(n)) if n == "all" => Quantifier::All,
            _ => Quantifier::Exists,
        };
        let name = match self.bump() {
            Some(Tok::Name(n)) => n,
            got => return Err(KernelError::Parse(format!("expected a variable, found {got:?}"))),
        };
        self.expect(Tok::Colon)?;
        let ty = self.ty()?;
        self.expect(Tok::Dot)?;
        let var = Symbol::new(name, ty);
        self.bound.push(var.clone());
        let body = self.expr();
        self.bound.pop();
        Term::quant(q, var, body?)
    }

    fn atom(&mut self) -> Result<Term, KernelError> {
        match self.bump() {
            Some(Tok::LParen) => {
                let t = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Name(name)) => {
                let annotation = if self.peek() == Some(&Tok::Colon) {
                    self.bump();
                    Some(self.ty()?)
                } else {
                    None
                };
                if let Some(v) = self.bound.iter().rev().find(|v| v.name == name) {
                    if let Some(ty) = annotation {
                        if ty != v.ty {
                            return Err(KernelError::Type(format!(
                                "bound variable {name} : {} annotated as {ty}",
                                v.ty
                            )));
                        }
                    }
                    return Ok(Term::Var(v.clone()));
                }
                let ty = match annotation {
                    Some(ty) => {
                        self.sig.declare(&name, ty.clone())?;
                        ty
                    }
                    None => self.sig.get(&name).cloned().ok_or_else(|| {
                        KernelError::Type(format!("no type known for `{name}`; write `{name}:<type>`"))
                    })?,
                };
                Ok(Term::constant(name, ty))
            }
            got => Err(KernelError::Parse(format!("unexpected token {got:?}"))),
        }
    }
}

/// Parses a term against (and extending) `sig`.
pub fn parse_term(src: &str, sig: &mut Signature) -> Result<Term, KernelError> {
    // work on a copy so a failed parse leaves the signature untouched
    let mut scratch = sig.clone();
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        sig: &mut scratch,
        bound: Vec::new(),
    };
    if p.toks.is_empty() {
        return Err(KernelError::Parse("empty input".into()));
    }
    let t = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(KernelError::Parse(format!(
            "trailing input after `{t}`"
        )));
    }
    *sig = scratch;
    Ok(t)
}

/// Parses a standalone formula (a term of type `o`).
pub fn parse_formula(src: &str) -> Result<Term, KernelError> {
    let t = parse_term(src, &mut Signature::new())?;
    if !t.is_formula() {
        return Err(KernelError::Type(format!("{t} is not a formula")));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_conjecture() {
        let t = parse_formula("(p:(o>o) (a:o & b:o)) => (p (b & a))").unwrap();
        let (l, r) = t.as_binary(Connective::Implies).unwrap();
        assert_eq!(l.to_string(), "(p (a & b))");
        assert_eq!(r.to_string(), "(p (b & a))");
    }

    #[test]
    fn precedence() {
        let t = parse_formula("a:o & b:o | c:o => a <=> b").unwrap();
        assert_eq!(t.to_string(), "(((a & b) | c) => a) <=> b");
        let t = parse_formula("a:o => b:o => a").unwrap();
        assert_eq!(t.to_string(), "a => (b => a)");
    }

    #[test]
    fn curried_application() {
        let t = parse_formula("(r:(i>i>o) c:i d:i)").unwrap();
        assert_eq!(t.child(1).unwrap().to_string(), "d");
        assert_eq!(t.to_string(), "(r c d)");
    }

    #[test]
    fn quantifier_binds_variable() {
        let t = parse_formula("all x:i . (q:(i>o) x)").unwrap();
        match &t {
            Term::Quant(Quantifier::All, v, body) => {
                assert_eq!(v.name, "x");
                assert_eq!(body.child(1), Some(&Term::var("x", Type::Individual)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ill_typed_application_rejected() {
        assert!(matches!(parse_formula("(a:o b:o)"), Err(KernelError::Type(_))));
        assert!(matches!(parse_formula("(p:(o>o) c:i)"), Err(KernelError::Type(_))));
    }

    #[test]
    fn missing_annotation_rejected() {
        assert!(parse_formula("a & b").is_err());
        assert!(parse_formula("a:o & a:i").is_err());
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_formula(""), Err(KernelError::Parse(_))));
        assert!(matches!(parse_formula("(a:o"), Err(KernelError::Parse(_))));
        assert!(matches!(parse_formula("a:o )"), Err(KernelError::Parse(_))));
        assert!(matches!(parse_formula("a:o $ b:o"), Err(KernelError::Parse(_))));
    }

    #[test]
    fn signature_carries_over() {
        let mut sig = Signature::new();
        parse_term("(p:(o>o) a:o)", &mut sig).unwrap();
        let t = parse_term("(p (a & a))", &mut sig).unwrap();
        assert!(t.is_formula());
        // failed parses do not leak declarations
        assert!(parse_term("z:o & (a b)", &mut sig).is_err());
        assert!(sig.get("z").is_none());
    }
}
