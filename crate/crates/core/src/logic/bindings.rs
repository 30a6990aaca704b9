use std::collections::BTreeMap;
use std::fmt;

use crate::term::Term;

/// A substitution from variable names to terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    map: BTreeMap<String, Term>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Fully resolved value of a variable, if bound.
    pub fn get(&self, var: &str) -> Option<Term> {
        self.map.get(var).map(|t| self.resolve(t))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub(crate) fn bind(&mut self, var: &str, value: Term) {
        self.map.insert(var.to_string(), value);
    }

    /// Follows variable chains to the first non-variable or unbound variable.
    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.map.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Applies the substitution throughout `t`. Idempotent.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
            Term::List(items) => Term::List(items.iter().map(|a| self.resolve(a)).collect()),
            other => other.clone(),
        }
    }

    /// Flattens every binding so no value mentions another bound variable.
    pub fn normalized(&self) -> Bindings {
        Bindings {
            map: self.map.iter().map(|(k, v)| (k.clone(), self.resolve(v))).collect(),
        }
    }

    fn occurs(&self, var: &str, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(v) => v == var,
            Term::Compound(_, args) | Term::List(args) => args.iter().any(|a| self.occurs(var, a)),
            _ => false,
        }
    }

    pub(crate) fn unify_in(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if self.occurs(x, other) {
                    return false;
                }
                self.bind(x, other.clone());
                true
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| self.unify_in(x, y))
            }
            (Term::List(xs), Term::List(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify_in(x, y))
            }
            _ => a == b,
        }
    }
}

impl<const N: usize> From<[(&str, Term); N]> for Bindings {
    fn from(pairs: [(&str, Term); N]) -> Self {
        let mut b = Bindings::new();
        for (k, v) in pairs {
            b.bind(k, v);
        }
        b
    }
}

impl fmt::Display for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = {}", self.resolve(v))?;
        }
        f.write_str("}")
    }
}

/// Most general unifier of `a` and `b` extending `bindings`, with occurs
/// check. `None` when the terms do not unify.
pub fn unify(a: &Term, b: &Term, bindings: &Bindings) -> Option<Bindings> {
    let mut out = bindings.clone();
    out.unify_in(a, b).then(|| out.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn single_variable_match() {
        let b = unify(&t("state(X)"), &t("state(0)"), &Bindings::new()).unwrap();
        assert_eq!(b, Bindings::from([("X", Term::Int(0))]));
    }

    #[test]
    fn atom_clash() {
        assert!(unify(&t("state(1)"), &t("state(2)"), &Bindings::new()).is_none());
    }

    #[test]
    fn two_variables() {
        let b = unify(&t("thrown(A, C)"), &t("thrown(alice, 8)"), &Bindings::new()).unwrap();
        assert_eq!(b, Bindings::from([("A", Term::atom("alice")), ("C", Term::Int(8))]));
    }

    #[test]
    fn occurs_check() {
        assert!(unify(&t("X"), &t("f(X)"), &Bindings::new()).is_none());
        assert!(unify(&t("f(X, Y)"), &t("f(Y, g(X))"), &Bindings::new()).is_none());
    }

    #[test]
    fn chains_are_flattened() {
        let b = unify(&t("f(X, Y, Z)"), &t("f(Y, Z, 3)"), &Bindings::new()).unwrap();
        let n = b.normalized();
        for v in ["X", "Y", "Z"] {
            assert_eq!(n.iter().find(|(k, _)| *k == v).unwrap().1, &Term::Int(3));
        }
        assert_eq!(n.normalized(), n);
    }

    #[test]
    fn numbers_do_not_unify_across_kinds() {
        assert!(unify(&t("1"), &t("1.0"), &Bindings::new()).is_none());
    }
}
