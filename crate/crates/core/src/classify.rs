//! Goal classification into propositional, first-order and higher-order
//! problems, and its broadcast over the blackboards.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::{Blackboards, BoardMessage};
use crate::logic::{Term, Type};
use crate::proof::{Focus, PartialProof};

/// Logic classes ordered by expressiveness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LogicClass {
    #[serde(rename = "PROP")]
    Prop,
    #[serde(rename = "FO")]
    Fo,
    #[serde(rename = "HO")]
    Ho,
}

impl fmt::Display for LogicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicClass::Prop => "PROP",
            LogicClass::Fo => "FO",
            LogicClass::Ho => "HO",
        })
    }
}

impl FromStr for LogicClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PROP" => Ok(LogicClass::Prop),
            "FO" => Ok(LogicClass::Fo),
            "HO" => Ok(LogicClass::Ho),
            other => Err(format!("unknown logic class `{other}`")),
        }
    }
}

fn higher_order_type(ty: &Type) -> bool {
    ty.is_bool() || ty.is_functional()
}

/// Class of a single formula.
pub fn classify_formula(t: &Term) -> LogicClass {
    let mut class = LogicClass::Prop;
    for (_, sub) in t.subterms() {
        let here = match sub {
            Term::App(_, arg) if higher_order_type(&arg.ty()) => LogicClass::Ho,
            Term::Quant(_, v, _) if higher_order_type(&v.ty) => LogicClass::Ho,
            Term::Eq(l, _) if higher_order_type(&l.ty()) => LogicClass::Ho,
            Term::Quant(..) | Term::Eq(..) => LogicClass::Fo,
            _ => LogicClass::Prop,
        };
        class = class.max(here);
        if class == LogicClass::Ho {
            break;
        }
    }
    class
}

/// Class of the focused subgoal.
///
/// Only the goal formula is inspected: support lines are searched by the
/// agents but do not raise the class of the subproblem.
pub fn classify_goal(proof: &PartialProof, focus: &Focus) -> LogicClass {
    proof
        .line(&focus.goal)
        .map(|l| classify_formula(&l.formula))
        .unwrap_or(LogicClass::Ho)
}

/// Posts the class on the command board, then lets every command agent
/// copy it onto its suggestion board. Returns `false` for a stale epoch.
pub fn broadcast_class(class: LogicClass, epoch: u64, boards: &Blackboards) -> bool {
    let msg = BoardMessage::classification(class, epoch);
    if !boards.command().post_message(msg.clone()) {
        return false;
    }
    for board in boards.suggestion_boards() {
        board.post_message(msg.clone());
    }
    true
}

/// Serialization of a classification entry.
pub fn class_entry(class: LogicClass, epoch: u64) -> String {
    format!("#class {class} epoch={epoch}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, parse_term, Signature};

    #[test]
    fn reference_formulas() {
        let c = parse_formula("(p:(o>o) (a:o & b:o)) => (p (b & a))").unwrap();
        assert_eq!(classify_formula(&c), LogicClass::Ho);
        let l3 = parse_formula("(b:o & a:o) = (a & b)").unwrap();
        assert_eq!(classify_formula(&l3), LogicClass::Ho);
        let l4 = parse_formula("(b:o & a:o) <=> (a & b)").unwrap();
        assert_eq!(classify_formula(&l4), LogicClass::Prop);
    }

    #[test]
    fn first_order() {
        let t = parse_formula("all x:i . (q:(i>o) x)").unwrap();
        assert_eq!(classify_formula(&t), LogicClass::Fo);
        let t = parse_formula("c:i = d:i").unwrap();
        assert_eq!(classify_formula(&t), LogicClass::Fo);
        let t = parse_formula("all p:(i>o) . (p c:i)").unwrap();
        assert_eq!(classify_formula(&t), LogicClass::Ho);
        let t = parse_formula("(q:(i>o) c:i) & a:o").unwrap();
        assert_eq!(classify_formula(&t), LogicClass::Prop);
    }

    #[test]
    fn functional_equality_is_higher_order() {
        let mut sig = Signature::new();
        let t = parse_term("f:(i>i) = g:(i>i)", &mut sig).unwrap();
        assert_eq!(classify_formula(&t), LogicClass::Ho);
    }

    #[test]
    fn order_and_parsing() {
        assert!(LogicClass::Prop < LogicClass::Fo && LogicClass::Fo < LogicClass::Ho);
        assert_eq!("FO".parse::<LogicClass>().unwrap(), LogicClass::Fo);
        assert!("X".parse::<LogicClass>().is_err());
        assert_eq!(class_entry(LogicClass::Prop, 4), "#class PROP epoch=4");
    }
}
