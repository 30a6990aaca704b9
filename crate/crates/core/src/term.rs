//! Logic terms, the universal value of the language.

use std::fmt;
use std::hash::{Hash, Hasher};

/// A logic term.
///
/// Arithmetic written inside arguments (`3-X`, `C2*2`) is kept as a
/// compound whose functor is the operator symbol, so `3-X` is
/// `Compound("-", [Int(3), Var("X")])`. Such compounds are evaluated when a
/// fact is staged or a payoff is computed.
#[derive(Debug, Clone)]
pub enum Term {
    Atom(String),
    Int(i64),
    Real(f64),
    Var(String),
    Compound(String, Vec<Term>),
    List(Vec<Term>),
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Atom(a), Term::Atom(b)) => a == b,
            (Term::Int(a), Term::Int(b)) => a == b,
            // Bitwise so that Eq and Hash agree and NaN is reflexive.
            (Term::Real(a), Term::Real(b)) => a.to_bits() == b.to_bits(),
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => f == g && xs == ys,
            (Term::List(xs), Term::List(ys)) => xs == ys,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Term::Atom(a) | Term::Var(a) => a.hash(state),
            Term::Int(i) => i.hash(state),
            Term::Real(r) => r.to_bits().hash(state),
            Term::Compound(f, args) => {
                f.hash(state);
                args.hash(state);
            }
            Term::List(items) => items.hash(state),
        }
    }
}

pub(crate) const ARITH_OPS: [&str; 4] = ["+", "-", "*", "/"];

impl Term {
    pub fn atom(name: impl Into<String>) -> Term {
        Term::Atom(name.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    /// Builds a compound, collapsing zero arguments to an atom.
    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(functor.into())
        } else {
            Term::Compound(functor.into(), args)
        }
    }

    /// Predicate name and arity, for atoms and compounds.
    pub fn indicator(&self) -> Option<(&str, usize)> {
        match self {
            Term::Atom(name) => Some((name, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Term::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) | Term::List(args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Term::Int(_) | Term::Real(_))
    }

    /// True for a compound built from an arithmetic operator.
    pub fn is_arith(&self) -> bool {
        match self {
            Term::Compound(f, args) => {
                ARITH_OPS.contains(&f.as_str()) && (args.len() == 2 || (f == "-" && args.len() == 1))
            }
            _ => false,
        }
    }

    /// Visits every variable occurrence, left to right.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(_, args) | Term::List(args) => {
                for a in args {
                    a.for_each_var(f);
                }
            }
            _ => {}
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(g, args) => {
                Term::Compound(g.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
            Term::List(items) => Term::List(items.iter().map(|a| a.map_vars(f)).collect()),
            other => other.clone(),
        }
    }

    /// Text form used for switch aliases: atoms and numbers by their
    /// unquoted spelling.
    pub fn alias_text(&self) -> Option<String> {
        match self {
            Term::Atom(a) => Some(a.clone()),
            Term::Int(i) => Some(i.to_string()),
            _ => None,
        }
    }
}

/// A variable that may legitimately stay unbound, e.g. inside `not(..)`.
pub fn is_anonymous(name: &str) -> bool {
    name.starts_with('_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::printer::write_term(f, self)
    }
}

impl serde::Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        crate::parser::parse_term(&text).map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Term {
    fn from(v: i64) -> Self {
        Term::Int(v)
    }
}

impl From<&str> for Term {
    fn from(v: &str) -> Self {
        Term::Atom(v.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_arity_compound_is_atom() {
        assert_eq!(Term::compound("wait", vec![]), Term::atom("wait"));
    }

    #[test]
    fn groundness() {
        let t = Term::compound("thrown", vec![Term::atom("alice"), Term::var("C")]);
        assert!(!t.is_ground());
        assert!(Term::compound("state", vec![Term::Int(0)]).is_ground());
    }

    #[test]
    fn real_equality_is_bitwise() {
        assert_eq!(Term::Real(0.5), Term::Real(0.5));
        assert_ne!(Term::Real(0.0), Term::Real(-0.0));
        assert_ne!(Term::Real(1.0), Term::Int(1));
    }
}
