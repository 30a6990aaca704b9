//! Canonical text form: one clause per line, normalized whitespace.
//!
//! The same printer feeds record files, so its output must re-parse to the
//! identical value.

use std::fmt::{self, Write};

use crate::spec::{ArithOp, GameSpec, Literal, Rule};
use crate::term::Term;

fn is_bare_atom(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

pub(crate) fn write_atom(f: &mut impl Write, s: &str) -> fmt::Result {
    if is_bare_atom(s) {
        return f.write_str(s);
    }
    f.write_char('\'')?;
    for c in s.chars() {
        match c {
            '\'' => f.write_str("\\'")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('\'')
}

fn binary_op(t: &Term) -> Option<(ArithOp, &Term, &Term)> {
    match t {
        Term::Compound(f, args) if args.len() == 2 => {
            ArithOp::from_symbol(f).map(|op| (op, &args[0], &args[1]))
        }
        _ => None,
    }
}

fn write_operand(f: &mut impl Write, t: &Term, parent: ArithOp, right: bool) -> fmt::Result {
    if let Some((op, _, _)) = binary_op(t) {
        let p = op.precedence();
        let q = parent.precedence();
        if p < q || (right && p == q) {
            f.write_char('(')?;
            write_term(f, t)?;
            return f.write_char(')');
        }
    }
    write_term(f, t)
}

pub(crate) fn write_term(f: &mut impl Write, t: &Term) -> fmt::Result {
    if let Some((op, l, r)) = binary_op(t) {
        write_operand(f, l, op, false)?;
        write!(f, " {} ", op.symbol())?;
        return write_operand(f, r, op, true);
    }
    match t {
        Term::Atom(a) => write_atom(f, a),
        Term::Int(i) => write!(f, "{i}"),
        Term::Real(r) => write!(f, "{r:?}"),
        Term::Var(v) => f.write_str(v),
        Term::Compound(g, args) if g == "-" && args.len() == 1 => {
            let inner = &args[0];
            if inner.is_number() || binary_op(inner).is_some() {
                f.write_str("-(")?;
                write_term(f, inner)?;
                f.write_char(')')
            } else {
                f.write_char('-')?;
                write_term(f, inner)
            }
        }
        Term::Compound(g, args) => {
            write_atom(f, g)?;
            f.write_char('(')?;
            write_seq(f, args)?;
            f.write_char(')')
        }
        Term::List(items) => {
            f.write_char('[')?;
            write_seq(f, items)?;
            f.write_char(']')
        }
    }
}

fn write_seq(f: &mut impl Write, items: &[Term]) -> fmt::Result {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_term(f, a)?;
    }
    Ok(())
}

pub fn literal_to_string(lit: &Literal) -> String {
    let mut s = String::new();
    write_literal(&mut s, lit).expect("writing to a String");
    s
}

fn write_literal(f: &mut impl Write, lit: &Literal) -> fmt::Result {
    match lit {
        Literal::Goal(t) => write_term(f, t),
        Literal::Not(t) => {
            f.write_str("not(")?;
            write_term(f, t)?;
            f.write_char(')')
        }
        Literal::Compare { op, lhs, rhs } => {
            write_term(f, &lhs.to_term())?;
            write!(f, " {} ", op.symbol())?;
            write_term(f, &rhs.to_term())
        }
        Literal::Ax(t) => {
            f.write_str("ax(")?;
            write_term(f, t)?;
            f.write_char(')')
        }
        Literal::Next(t) => {
            f.write_str("next(")?;
            write_term(f, t)?;
            f.write_char(')')
        }
        Literal::Payoff { agent, amount } => {
            f.write_str("goal(")?;
            write_term(f, agent)?;
            f.write_str(", ")?;
            write_term(f, &amount.to_term())?;
            f.write_char(')')
        }
        Literal::False => f.write_str("false"),
    }
}

pub fn rule_to_string(rule: &Rule) -> String {
    let mut s = String::new();
    write_term(&mut s, &rule.head).expect("writing to a String");
    for (i, lit) in rule.body.iter().enumerate() {
        s.push_str(if i == 0 { " :- " } else { ", " });
        write_literal(&mut s, lit).expect("writing to a String");
    }
    s.push('.');
    s
}

/// Canonical source text for a spec.
pub fn print_spec(spec: &GameSpec) -> String {
    let mut lines = Vec::new();
    for (pred, arity) in &spec.fact_decls {
        let mut s = String::from("fact(");
        write_atom(&mut s, pred).unwrap();
        lines.push(format!("{s}, {arity})."));
    }
    for c in &spec.chances {
        let dist: Vec<Term> = c.distribution.iter().map(|p| Term::Real(*p)).collect();
        lines.push(format!("chance({}, {}).", c.bid, Term::List(dist)));
    }
    for s in &spec.switches {
        let aliases: Vec<Term> = s.aliases.iter().map(|a| Term::Atom(a.clone())).collect();
        lines.push(format!(
            "switch({}, {}, {}).",
            s.bid,
            Term::Atom(s.owner.clone()),
            Term::List(aliases)
        ));
    }
    for b in &spec.branchings {
        let bid = b.bid.map_or_else(|| "nil".to_string(), |b| b.to_string());
        lines.push(format!("branching({}, {bid}).", Term::List(b.operators.clone())));
    }
    for f in &spec.init_facts {
        lines.push(format!("init({f})."));
    }
    for r in spec.hidden_rules.iter().chain(&spec.operation_rules).chain(&spec.terminal_rules) {
        lines.push(rule_to_string(r));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    #[test]
    fn quoting() {
        assert_eq!(Term::atom("Wait").to_string(), "'Wait'");
        assert_eq!(Term::atom("4").to_string(), "'4'");
        assert_eq!(Term::atom("it's").to_string(), "'it\\'s'");
        assert_eq!(Term::atom("alice").to_string(), "alice");
    }

    #[test]
    fn infix_parenthesization() {
        for src in ["3 - X", "(1 + 2) * 3", "1 - (2 - 3)", "C2 * 2", "-X", "-(3)", "3 - -1"] {
            let t = parse_term(src).unwrap();
            assert_eq!(t.to_string(), src);
            assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn reals_keep_a_decimal_point() {
        assert_eq!(Term::Real(1.0).to_string(), "1.0");
        assert_eq!(Term::Real(0.5).to_string(), "0.5");
    }
}
