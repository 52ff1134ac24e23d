//! The standard argument agents, per command.

use crate::classify::{classify_formula, LogicClass};
use crate::logic::{diff_single_subterm, Connective, Quantifier, SubtermDiff, Term};
use crate::pai::{Actual, Pai};
use crate::proof::ProofLine;
use crate::tactics::{prop_solve, Catalog};

use super::{AgentContext, AgentSpec, SearchFn, Sink};

type Row = (&'static str, &'static [&'static str], &'static [&'static str], f64, SearchFn);

const SUBST: &[Row] = &[
    ("=Subst", &["s", "u"], &[], 1.5, subst_su),
    ("=Subst", &["eq"], &[], 0.5, subst_eq),
    ("=Subst", &["eq"], &["u", "s"], 1.0, subst_eq_us),
    ("=Subst", &["pl"], &["u", "s"], 1.0, subst_pl),
];
const ALL_E: &[Row] = &[
    ("AllE", &["p"], &[], 1.0, alle_p),
    ("AllE", &["c"], &[], 0.5, alle_c),
    ("AllE", &["c"], &["p"], 1.0, alle_c_p),
    ("AllE", &["t"], &["p", "c"], 1.5, alle_t),
];
const PROP: &[Row] = &[
    ("PropSolve", &["conc"], &[], 0.5, prop_conc),
    ("PropSolve", &["prems"], &["conc"], 1.5, prop_prems),
];
const OTHERS: &[Row] = &[
    ("=>I", &["conc"], &[], 0.5, impi_conc),
    ("&I", &["conc"], &[], 0.5, andi_conc),
    ("&I", &["lprem"], &["conc"], 1.0, andi_lprem),
    ("&I", &["rprem"], &["conc"], 1.0, andi_rprem),
    ("&E", &["prem"], &[], 0.5, ande_prem),
    ("&E", &["conc"], &["prem"], 1.0, ande_conc),
    ("<=>2=", &["conc"], &[], 0.5, iffeq_conc),
    ("<=>2=", &["prem"], &["conc"], 1.0, iffeq_prem),
    ("Axiom", &["conc", "prem"], &[], 0.5, axiom),
];

/// The agent societies of every command in `catalog`, in identifier order.
pub fn standard_agents(catalog: &Catalog) -> Vec<AgentSpec> {
    let mut out: Vec<AgentSpec> = [SUBST, ALL_E, PROP, OTHERS]
        .concat()
        .into_iter()
        .filter_map(|(cmd, computes, requires, baseline, search)| {
            let desc = catalog.get(cmd)?;
            // the decision procedure only handles propositional goals
            let ceiling = if desc.name == "PropSolve" { LogicClass::Prop } else { LogicClass::Ho };
            Some(AgentSpec {
                id: AgentSpec::make_id(cmd, computes, requires),
                command: desc.name,
                formals: desc.formals,
                computes: computes.to_vec(),
                requires: requires.to_vec(),
                requirement: desc.class,
                ceiling,
                baseline,
                search,
            })
        })
        .collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

fn line(l: &ProofLine) -> Actual {
    Actual::Line(l.label.clone())
}

/// A diff usable for substitution: neither side mentions a bound variable.
fn ground_diff(from: &Term, to: &Term) -> Option<SubtermDiff> {
    diff_single_subterm(from, to).filter(|d| d.from.is_ground() && d.to.is_ground())
}

fn subst_su(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    let goal = ctx.goal();
    for u in ctx.supports() {
        if ground_diff(&u.formula, &goal.formula).is_some() && !sink.emit(vec![("s", line(goal)), ("u", line(u))]) {
            return;
        }
    }
}

fn subst_eq(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    for e in ctx.supports() {
        if e.formula.as_eq().is_some() && !sink.emit(vec![("eq", line(e))]) {
            return;
        }
    }
}

fn subst_eq_us(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    let (Some(u), Some(s)) = (ctx.slot_line(trigger, "u"), ctx.slot_line(trigger, "s")) else {
        return;
    };
    let Some(d) = ground_diff(&u.formula, &s.formula) else { return };
    for e in ctx.supports() {
        let Some((l, r)) = e.formula.as_eq() else { continue };
        let matches = (l == &d.from && r == &d.to) || (l == &d.to && r == &d.from);
        if matches && !sink.emit(vec![("eq", line(e))]) {
            return;
        }
    }
}

fn subst_pl(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    let (Some(u), Some(s)) = (ctx.slot_line(trigger, "u"), ctx.slot_line(trigger, "s")) else {
        return;
    };
    if let Some(d) = ground_diff(&u.formula, &s.formula) {
        sink.emit(vec![("pl", Actual::Positions(d.positions))]);
    }
}

fn universal(t: &Term) -> Option<(&crate::logic::Symbol, &Term)> {
    match t {
        Term::Quant(Quantifier::All, v, body) => Some((v, body)),
        _ => None,
    }
}

/// Ground subterms of the focus that could instantiate a quantifier:
/// goal first, then supports most recent first; no duplicates.
fn witnesses(ctx: &AgentContext<'_>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for l in std::iter::once(ctx.goal()).chain(ctx.supports()) {
        for (_, t) in l.formula.subterms() {
            if !t.is_formula() && t.is_ground() && !out.contains(t) {
                out.push(t.clone());
            }
        }
    }
    out
}

fn instances<'a>(quantified: &'a Term, goal: &'a Term, pool: &'a [Term]) -> impl Iterator<Item = &'a Term> + 'a {
    let (v, body) = universal(quantified).expect("caller checked");
    pool.iter()
        .filter(move |t| t.ty() == v.ty && body.instantiate(v, t) == *goal)
}

fn alle_p(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    for p in ctx.supports() {
        if universal(&p.formula).is_some() && !sink.emit(vec![("p", line(p))]) {
            return;
        }
    }
}

fn alle_c(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    if ctx.supports().any(|p| universal(&p.formula).is_some()) {
        sink.emit(vec![("c", line(ctx.goal()))]);
    }
}

fn alle_c_p(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    let Some(p) = ctx.slot_line(trigger, "p") else { return };
    if universal(&p.formula).is_none() {
        return;
    }
    let goal = ctx.goal();
    let pool = witnesses(ctx);
    if instances(&p.formula, &goal.formula, &pool).next().is_some() {
        sink.emit(vec![("c", line(goal))]);
    }
}

fn alle_t(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    let (Some(p), Some(c)) = (ctx.slot_line(trigger, "p"), ctx.slot_line(trigger, "c")) else {
        return;
    };
    if universal(&p.formula).is_none() {
        return;
    }
    let pool = witnesses(ctx);
    for t in instances(&p.formula, &c.formula, &pool) {
        if !sink.emit(vec![("t", Actual::Term(t.clone()))]) {
            return;
        }
    }
}

fn prop_conc(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    let goal = ctx.goal();
    if classify_formula(&goal.formula) == LogicClass::Prop {
        sink.emit(vec![("conc", line(goal))]);
    }
}

fn prop_prems(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    let Some(goal) = ctx.slot_line(trigger, "conc") else { return };
    if matches!(prop_solve(&goal.formula, &[]), Ok(true)) {
        sink.emit(vec![("prems", Actual::Lines(Vec::new()))]);
        return;
    }
    // oldest first, matching the order lines were introduced
    let mut prems: Vec<&ProofLine> = ctx
        .supports()
        .filter(|l| classify_formula(&l.formula) == LogicClass::Prop)
        .collect();
    prems.reverse();
    if prems.is_empty() || sink.should_stop() {
        return;
    }
    let formulas: Vec<Term> = prems.iter().map(|l| l.formula.clone()).collect();
    if matches!(prop_solve(&goal.formula, &formulas), Ok(true)) {
        sink.emit(vec![(
            "prems",
            Actual::Lines(prems.iter().map(|l| l.label.clone()).collect()),
        )]);
    }
}

fn impi_conc(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    let goal = ctx.goal();
    if goal.formula.as_binary(Connective::Implies).is_some() {
        sink.emit(vec![("conc", line(goal))]);
    }
}

fn andi_conc(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    let goal = ctx.goal();
    if goal.formula.as_binary(Connective::And).is_some() {
        sink.emit(vec![("conc", line(goal))]);
    }
}

fn andi_part(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>, slot: &'static str) {
    let Some(c) = ctx.slot_line(trigger, "conc") else { return };
    let Some((l, r)) = c.formula.as_binary(Connective::And) else { return };
    let want = if slot == "lprem" { l } else { r };
    for p in ctx.supports() {
        if p.formula == *want && !sink.emit(vec![(slot, line(p))]) {
            return;
        }
    }
}

fn andi_lprem(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    andi_part(ctx, trigger, sink, "lprem")
}

fn andi_rprem(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    andi_part(ctx, trigger, sink, "rprem")
}

fn ande_prem(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    for p in ctx.supports() {
        if p.formula.as_binary(Connective::And).is_some() && !sink.emit(vec![("prem", line(p))]) {
            return;
        }
    }
}

fn ande_conc(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    let Some(p) = ctx.slot_line(trigger, "prem") else { return };
    let Some((l, r)) = p.formula.as_binary(Connective::And) else { return };
    let goal = ctx.goal();
    if goal.formula == *l || goal.formula == *r {
        sink.emit(vec![("conc", line(goal))]);
    }
}

fn iffeq_conc(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    let goal = ctx.goal();
    if goal.formula.as_eq().is_some_and(|(l, _)| l.ty().is_bool()) {
        sink.emit(vec![("conc", line(goal))]);
    }
}

fn iffeq_prem(ctx: &AgentContext<'_>, trigger: &Pai, sink: &mut Sink<'_>) {
    let Some(c) = ctx.slot_line(trigger, "conc") else { return };
    let Some((l, r)) = c.formula.as_eq() else { return };
    for p in ctx.supports() {
        if p.formula.as_binary(Connective::Iff) == Some((l, r)) && !sink.emit(vec![("prem", line(p))]) {
            return;
        }
    }
}

fn axiom(ctx: &AgentContext<'_>, _: &Pai, sink: &mut Sink<'_>) {
    let goal = ctx.goal();
    for p in ctx.supports() {
        if p.formula == goal.formula && !sink.emit(vec![("conc", line(goal)), ("prem", line(p))]) {
            return;
        }
    }
}
