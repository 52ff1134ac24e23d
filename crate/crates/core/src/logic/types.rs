use std::fmt;

/// Simple types: individuals `i`, truth values `o`, and function types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Individual,
    Bool,
    Fun(Box<Type>, Box<Type>),
}

impl Type {
    pub fn fun(domain: Type, codomain: Type) -> Type {
        Type::Fun(Box::new(domain), Box::new(codomain))
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, Type::Bool)
    }

    pub fn is_functional(&self) -> bool {
        matches!(self, Type::Fun(..))
    }

    /// Domain and codomain of a function type.
    pub fn split(&self) -> Option<(&Type, &Type)> {
        match self {
            Type::Fun(d, c) => Some((d, c)),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Individual => f.write_str("i"),
            Type::Bool => f.write_str("o"),
            Type::Fun(d, c) => write!(f, "({d}>{c})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_nests_right() {
        let t = Type::fun(Type::Bool, Type::fun(Type::Individual, Type::Bool));
        assert_eq!(t.to_string(), "(o>(i>o))");
        assert_eq!(Type::fun(Type::Bool, Type::Bool).to_string(), "(o>o)");
    }

    #[test]
    fn structural_equality() {
        assert_eq!(
            Type::fun(Type::Bool, Type::Bool),
            Type::fun(Type::Bool, Type::Bool)
        );
        assert_ne!(Type::fun(Type::Bool, Type::Bool), Type::Bool);
    }
}
