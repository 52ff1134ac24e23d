use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::KernelError;

/// Path of child indices from the root of a term. The empty path is the
/// whole term.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position(Vec<usize>);

impl Position {
    pub fn new(indices: Vec<usize>) -> Self {
        Position(indices)
    }

    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for Position {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || KernelError::Parse(format!("malformed position `{s}`"));
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        if inner.trim().is_empty() {
            return Ok(Position::root());
        }
        inner
            .split(',')
            .map(|n| n.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()
            .map(Position)
    }
}

/// Renders a position list as concatenated positions, e.g. `[1][2,1]`.
pub fn format_positions(ps: &[Position]) -> String {
    ps.iter().map(Position::to_string).collect()
}

/// Parses the concatenated form produced by [`format_positions`].
pub fn parse_positions(s: &str) -> Result<Vec<Position>, KernelError> {
    let s = s.trim();
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let end = rest
            .find(']')
            .ok_or_else(|| KernelError::Parse(format!("malformed position list `{s}`")))?;
        out.push(rest[..=end].parse()?);
        rest = rest[end + 1..].trim_start();
    }
    if out.is_empty() {
        return Err(KernelError::Parse("empty position list".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let p = Position::new(vec![1, 2]);
        assert_eq!(p.to_string(), "[1,2]");
        assert_eq!("[1,2]".parse::<Position>().unwrap(), p);
        assert_eq!("[]".parse::<Position>().unwrap(), Position::root());
        assert!("[x]".parse::<Position>().is_err());
        assert!("1".parse::<Position>().is_err());
    }

    #[test]
    fn position_lists() {
        let ps = vec![Position::new(vec![1]), Position::new(vec![2, 1])];
        assert_eq!(format_positions(&ps), "[1][2,1]");
        assert_eq!(parse_positions("[1][2,1]").unwrap(), ps);
        assert!(parse_positions("").is_err());
        assert!(parse_positions("[1").is_err());
    }
}
