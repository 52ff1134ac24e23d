use std::collections::BTreeSet;
use std::fmt;

use super::{KernelError, Position, Type};

/// A named, typed symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub ty: Type,
}

impl Symbol {
    pub fn new(name: impl Into<String>, ty: Type) -> Self {
        Symbol {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Connective {
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    pub fn symbol(self) -> &'static str {
        match self {
            Connective::And => "&",
            Connective::Or => "|",
            Connective::Implies => "=>",
            Connective::Iff => "<=>",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    All,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::All => "all",
            Quantifier::Exists => "ex",
        }
    }
}

/// Simply-typed terms. Formulas are the terms of type `o`.
///
/// Child positions: for an application `0` is the function and `1` the
/// argument; connectives, equations and quantifiers number their
/// subformulas from `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(Symbol),
    Var(Symbol),
    App(Box<Term>, Box<Term>),
    Not(Box<Term>),
    Binary(Connective, Box<Term>, Box<Term>),
    Eq(Box<Term>, Box<Term>),
    Quant(Quantifier, Symbol, Box<Term>),
}

impl Term {
    pub fn constant(name: impl Into<String>, ty: Type) -> Term {
        Term::Const(Symbol::new(name, ty))
    }

    pub fn var(name: impl Into<String>, ty: Type) -> Term {
        Term::Var(Symbol::new(name, ty))
    }

    pub fn app(fun: Term, arg: Term) -> Result<Term, KernelError> {
        let fty = fun.ty();
        match fty.split() {
            Some((dom, _)) if *dom == arg.ty() => Ok(Term::App(Box::new(fun), Box::new(arg))),
            Some((dom, _)) => Err(KernelError::Type(format!(
                "argument {arg} has type {}, expected {dom}",
                arg.ty()
            ))),
            None => Err(KernelError::Type(format!(
                "{fun} has non-functional type {fty} and cannot be applied"
            ))),
        }
    }

    pub fn not(body: Term) -> Result<Term, KernelError> {
        expect_bool(&body)?;
        Ok(Term::Not(Box::new(body)))
    }

    pub fn binary(op: Connective, lhs: Term, rhs: Term) -> Result<Term, KernelError> {
        expect_bool(&lhs)?;
        expect_bool(&rhs)?;
        Ok(Term::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    pub fn and(lhs: Term, rhs: Term) -> Result<Term, KernelError> {
        Term::binary(Connective::And, lhs, rhs)
    }

    pub fn or(lhs: Term, rhs: Term) -> Result<Term, KernelError> {
        Term::binary(Connective::Or, lhs, rhs)
    }

    pub fn implies(lhs: Term, rhs: Term) -> Result<Term, KernelError> {
        Term::binary(Connective::Implies, lhs, rhs)
    }

    pub fn iff(lhs: Term, rhs: Term) -> Result<Term, KernelError> {
        Term::binary(Connective::Iff, lhs, rhs)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Result<Term, KernelError> {
        if lhs.ty() != rhs.ty() {
            return Err(KernelError::Type(format!(
                "equation sides {lhs} : {} and {rhs} : {} differ in type",
                lhs.ty(),
                rhs.ty()
            )));
        }
        Ok(Term::Eq(Box::new(lhs), Box::new(rhs)))
    }

    pub fn quant(q: Quantifier, var: Symbol, body: Term) -> Result<Term, KernelError> {
        expect_bool(&body)?;
        Ok(Term::Quant(q, var, Box::new(body)))
    }

    /// Type of a well-typed term. Ill-typed applications report the
    /// function's type; use [`Term::type_check`] to validate.
    pub fn ty(&self) -> Type {
        match self {
            Term::Const(s) | Term::Var(s) => s.ty.clone(),
            Term::App(f, _) => match f.ty() {
                Type::Fun(_, c) => *c,
                other => other,
            },
            _ => Type::Bool,
        }
    }

    pub fn is_formula(&self) -> bool {
        self.ty().is_bool()
    }

    /// Re-validates the typing invariants of the whole term.
    pub fn type_check(&self) -> Result<Type, KernelError> {
        match self {
            Term::Const(s) | Term::Var(s) => Ok(s.ty.clone()),
            Term::App(f, x) => {
                let fty = f.type_check()?;
                let xty = x.type_check()?;
                match fty {
                    Type::Fun(d, c) if *d == xty => Ok(*c),
                    other => Err(KernelError::Type(format!(
                        "cannot apply {f} : {other} to {x} : {xty}"
                    ))),
                }
            }
            Term::Not(b) | Term::Quant(_, _, b) => {
                check_bool(b)?;
                Ok(Type::Bool)
            }
            Term::Binary(_, l, r) => {
                check_bool(l)?;
                check_bool(r)?;
                Ok(Type::Bool)
            }
            Term::Eq(l, r) => {
                let lt = l.type_check()?;
                let rt = r.type_check()?;
                if lt != rt {
                    return Err(KernelError::Type(format!(
                        "equation sides {l} : {lt} and {r} : {rt} differ in type"
                    )));
                }
                Ok(Type::Bool)
            }
        }
    }

    /// Immediate children paired with their child index.
    pub fn children(&self) -> Vec<(usize, &Term)> {
        match self {
            Term::Const(_) | Term::Var(_) => Vec::new(),
            Term::App(f, x) => vec![(0, f.as_ref()), (1, x.as_ref())],
            Term::Not(b) | Term::Quant(_, _, b) => vec![(1, b.as_ref())],
            Term::Binary(_, l, r) | Term::Eq(l, r) => vec![(1, l.as_ref()), (2, r.as_ref())],
        }
    }

    pub fn child(&self, index: usize) -> Option<&Term> {
        match (self, index) {
            (Term::App(f, _), 0) => Some(f),
            (Term::App(_, x), 1) => Some(x),
            (Term::Not(b), 1) | (Term::Quant(_, _, b), 1) => Some(b),
            (Term::Binary(_, l, _), 1) | (Term::Eq(l, _), 1) => Some(l),
            (Term::Binary(_, _, r), 2) | (Term::Eq(_, r), 2) => Some(r),
            _ => None,
        }
    }

    fn child_mut(&mut self, index: usize) -> Option<&mut Term> {
        match (self, index) {
            (Term::App(f, _), 0) => Some(f),
            (Term::App(_, x), 1) => Some(x),
            (Term::Not(b), 1) | (Term::Quant(_, _, b), 1) => Some(b),
            (Term::Binary(_, l, _), 1) | (Term::Eq(l, _), 1) => Some(l),
            (Term::Binary(_, _, r), 2) | (Term::Eq(_, r), 2) => Some(r),
            _ => None,
        }
    }

    /// Number of term nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|(_, c)| c.size()).sum::<usize>()
    }

    /// All subterms with their positions, in pre-order (left to right).
    pub fn subterms(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        collect_subterms(self, &mut path, &mut out);
        out
    }

    pub fn subterm_at(&self, pos: &Position) -> Result<&Term, KernelError> {
        let mut cur = self;
        for (depth, &i) in pos.indices().iter().enumerate() {
            cur = cur.child(i).ok_or_else(|| KernelError::Position {
                position: pos.clone(),
                reason: format!("no child {i} at depth {depth} in {cur}"),
            })?;
        }
        Ok(cur)
    }

    /// Replaces the subterm at every listed position by `replacement`.
    pub fn replace_at(&self, positions: &[Position], replacement: &Term) -> Result<Term, KernelError> {
        let mut out = self.clone();
        for pos in positions {
            let old = out.subterm_at(pos)?;
            if old.ty() != replacement.ty() {
                return Err(KernelError::Type(format!(
                    "cannot replace {old} : {} at {pos} by {replacement} : {}",
                    old.ty(),
                    replacement.ty()
                )));
            }
            let mut slot = &mut out;
            for &i in pos.indices() {
                slot = slot.child_mut(i).expect("position resolved above");
            }
            *slot = replacement.clone();
        }
        Ok(out)
    }

    /// Substitutes `value` for the free occurrences of the variable `var`.
    pub fn instantiate(&self, var: &Symbol, value: &Term) -> Term {
        match self {
            Term::Var(s) if s == var => value.clone(),
            Term::Const(_) | Term::Var(_) => self.clone(),
            Term::App(f, x) => Term::App(
                Box::new(f.instantiate(var, value)),
                Box::new(x.instantiate(var, value)),
            ),
            Term::Not(b) => Term::Not(Box::new(b.instantiate(var, value))),
            Term::Binary(op, l, r) => Term::Binary(
                *op,
                Box::new(l.instantiate(var, value)),
                Box::new(r.instantiate(var, value)),
            ),
            Term::Eq(l, r) => Term::Eq(
                Box::new(l.instantiate(var, value)),
                Box::new(r.instantiate(var, value)),
            ),
            Term::Quant(q, bound, b) if bound.name == var.name => {
                Term::Quant(*q, bound.clone(), b.clone())
            }
            Term::Quant(q, bound, b) => {
                Term::Quant(*q, bound.clone(), Box::new(b.instantiate(var, value)))
            }
        }
    }

    /// True when no variable occurs free.
    pub fn is_ground(&self) -> bool {
        fn go(t: &Term, bound: &mut Vec<String>) -> bool {
            match t {
                Term::Var(s) => bound.contains(&s.name),
                Term::Const(_) => true,
                Term::Quant(_, v, b) => {
                    bound.push(v.name.clone());
                    let ok = go(b, bound);
                    bound.pop();
                    ok
                }
                _ => t.children().into_iter().all(|(_, c)| go(c, bound)),
            }
        }
        go(self, &mut Vec::new())
    }

    /// Constants occurring in the term, by name.
    pub fn constants(&self) -> BTreeSet<&Symbol> {
        let mut out = BTreeSet::new();
        for (_, t) in self.subterms() {
            if let Term::Const(s) = t {
                out.insert(s);
            }
        }
        out
    }

    pub fn as_binary(&self, op: Connective) -> Option<(&Term, &Term)> {
        match self {
            Term::Binary(o, l, r) if *o == op => Some((l, r)),
            _ => None,
        }
    }

    pub fn as_eq(&self) -> Option<(&Term, &Term)> {
        match self {
            Term::Eq(l, r) => Some((l, r)),
            _ => None,
        }
    }

    /// Rendering that annotates the first occurrence of every constant with
    /// its type, so the text parses back to the same term.
    pub fn annotated(&self) -> String {
        let mut seen = BTreeSet::new();
        let mut out = String::new();
        write_term(self, &mut out, Some(&mut seen));
        out
    }
}

fn expect_bool(t: &Term) -> Result<(), KernelError> {
    if t.ty().is_bool() {
        Ok(())
    } else {
        Err(KernelError::Type(format!(
            "{t} has type {}, expected a formula",
            t.ty()
        )))
    }
}

fn check_bool(t: &Term) -> Result<(), KernelError> {
    let ty = t.type_check()?;
    if ty.is_bool() {
        Ok(())
    } else {
        Err(KernelError::Type(format!(
            "{t} has type {ty}, expected a formula"
        )))
    }
}

fn collect_subterms<'a>(t: &'a Term, path: &mut Vec<usize>, out: &mut Vec<(Position, &'a Term)>) {
    out.push((Position::new(path.clone()), t));
    for (i, c) in t.children() {
        path.push(i);
        collect_subterms(c, path, out);
        path.pop();
    }
}

fn needs_parens(t: &Term) -> bool {
    matches!(
        t,
        Term::Binary(..) | Term::Eq(..) | Term::Quant(..) | Term::Not(..)
    )
}

fn write_sym(s: &Symbol, out: &mut String, seen: &mut Option<&mut BTreeSet<String>>) {
    out.push_str(&s.name);
    if let Some(seen) = seen {
        if seen.insert(s.name.clone()) {
            out.push(':');
            out.push_str(&s.ty.to_string());
        }
    }
}

fn write_child(t: &Term, out: &mut String, seen: &mut Option<&mut BTreeSet<String>>) {
    if needs_parens(t) {
        out.push('(');
        write_inner(t, out, seen);
        out.push(')');
    } else {
        write_inner(t, out, seen);
    }
}

fn write_inner(t: &Term, out: &mut String, seen: &mut Option<&mut BTreeSet<String>>) {
    match t {
        Term::Const(s) => write_sym(s, out, seen),
        Term::Var(s) => out.push_str(&s.name),
        Term::App(..) => {
            let mut spine = Vec::new();
            let mut head = t;
            while let Term::App(f, x) = head {
                spine.push(x.as_ref());
                head = f;
            }
            out.push('(');
            write_child(head, out, seen);
            for arg in spine.into_iter().rev() {
                out.push(' ');
                write_child(arg, out, seen);
            }
            out.push(')');
        }
        Term::Not(b) => {
            out.push('~');
            write_child(b, out, seen);
        }
        Term::Binary(op, l, r) => {
            write_child(l, out, seen);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_child(r, out, seen);
        }
        Term::Eq(l, r) => {
            write_child(l, out, seen);
            out.push_str(" = ");
            write_child(r, out, seen);
        }
        Term::Quant(q, v, b) => {
            out.push_str(q.keyword());
            out.push(' ');
            out.push_str(&v.name);
            out.push(':');
            out.push_str(&v.ty.to_string());
            out.push_str(" . ");
            // the binder shadows any constant of the same name
            if let Some(seen) = seen {
                let fresh = seen.insert(v.name.clone());
                write_inner(b, out, &mut Some(&mut **seen));
                if fresh {
                    seen.remove(&v.name);
                }
            } else {
                write_inner(b, out, &mut None);
            }
        }
    }
}

fn write_term(t: &Term, out: &mut String, seen: Option<&mut BTreeSet<String>>) {
    let mut seen = seen;
    write_inner(t, out, &mut seen);
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_term(self, &mut out, None);
        f.write_str(&out)
    }
}
