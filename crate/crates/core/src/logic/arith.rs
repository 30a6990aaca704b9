use std::cmp::Ordering;

use super::{Bindings, LogicError};
use crate::spec::{ArithExpr, ArithOp, CmpOp};
use crate::term::Term;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Int(i64),
    Real(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Real(r) => r,
        }
    }

    pub fn to_term(self) -> Term {
        match self {
            Number::Int(i) => Term::Int(i),
            Number::Real(r) => Term::Real(r),
        }
    }

    fn cmp(self, other: Number) -> Option<Ordering> {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => Some(a.cmp(&b)),
            (a, b) => a.as_f64().partial_cmp(&b.as_f64()),
        }
    }
}

fn term_number(t: &Term, b: &Bindings) -> Result<Number, LogicError> {
    match t {
        Term::Int(i) => Ok(Number::Int(*i)),
        Term::Real(r) => Ok(Number::Real(*r)),
        Term::Var(v) => Err(LogicError::Instantiation(v.clone())),
        t if t.is_arith() => eval_arith(&ArithExpr::from_term(t), b),
        other => Err(LogicError::NotANumber(other.to_string())),
    }
}

/// Evaluates an arithmetic expression. Integer arithmetic stays exact unless
/// a real leaf or `/` is involved.
pub fn eval_arith(e: &ArithExpr, b: &Bindings) -> Result<Number, LogicError> {
    match e {
        ArithExpr::Int(i) => Ok(Number::Int(*i)),
        ArithExpr::Real(r) => Ok(Number::Real(*r)),
        ArithExpr::Var(v) => term_number(&b.resolve(&Term::Var(v.clone())), b),
        ArithExpr::Const(t) => term_number(&b.resolve(t), b),
        ArithExpr::Neg(inner) => match eval_arith(inner, b)? {
            Number::Int(i) => i.checked_neg().map(Number::Int).ok_or(LogicError::Overflow),
            Number::Real(r) => Ok(Number::Real(-r)),
        },
        ArithExpr::Bin(op, l, r) => {
            let l = eval_arith(l, b)?;
            let r = eval_arith(r, b)?;
            apply(*op, l, r)
        }
    }
}

fn apply(op: ArithOp, l: Number, r: Number) -> Result<Number, LogicError> {
    if op == ArithOp::Div {
        if r.as_f64() == 0.0 {
            return Err(LogicError::DivisionByZero);
        }
        return Ok(Number::Real(l.as_f64() / r.as_f64()));
    }
    match (l, r) {
        (Number::Int(a), Number::Int(b)) => {
            let v = match op {
                ArithOp::Add => a.checked_add(b),
                ArithOp::Sub => a.checked_sub(b),
                ArithOp::Mul => a.checked_mul(b),
                ArithOp::Div => unreachable!(),
            };
            v.map(Number::Int).ok_or(LogicError::Overflow)
        }
        (a, b) => {
            let (a, b) = (a.as_f64(), b.as_f64());
            Ok(Number::Real(match op {
                ArithOp::Add => a + b,
                ArithOp::Sub => a - b,
                ArithOp::Mul => a * b,
                ArithOp::Div => unreachable!(),
            }))
        }
    }
}

fn is_numeric(t: &Term) -> bool {
    t.is_number() || t.is_arith()
}

/// Tests a comparison literal. Ordering operators are numeric; `=` and `\=`
/// compare numerically when both sides are numeric and structurally
/// otherwise. Both sides must be ground.
pub fn compare(op: CmpOp, lhs: &ArithExpr, rhs: &ArithExpr, b: &Bindings) -> Result<bool, LogicError> {
    if matches!(op, CmpOp::Eq | CmpOp::Ne) {
        let l = b.resolve(&lhs.to_term());
        let r = b.resolve(&rhs.to_term());
        for side in [&l, &r] {
            if !side.is_ground() {
                return Err(LogicError::Instantiation(side.to_string()));
            }
        }
        if !(is_numeric(&l) && is_numeric(&r)) {
            let eq = evaluate_term(&l)? == evaluate_term(&r)?;
            return Ok(eq == (op == CmpOp::Eq));
        }
    }
    let l = eval_arith(lhs, b)?;
    let r = eval_arith(rhs, b)?;
    let ord = l.cmp(r);
    Ok(match op {
        CmpOp::Gt => ord == Some(Ordering::Greater),
        CmpOp::Lt => ord == Some(Ordering::Less),
        CmpOp::Ge => matches!(ord, Some(Ordering::Greater | Ordering::Equal)),
        CmpOp::Le => matches!(ord, Some(Ordering::Less | Ordering::Equal)),
        CmpOp::Eq => ord == Some(Ordering::Equal),
        CmpOp::Ne => ord != Some(Ordering::Equal),
    })
}

/// Replaces every ground arithmetic subterm by its value, so `countdown(X-1)`
/// with `X = 30` becomes `countdown(29)`. Non-ground arithmetic is kept.
pub fn evaluate_term(t: &Term) -> Result<Term, LogicError> {
    if t.is_arith() && t.is_ground() {
        return Ok(eval_arith(&ArithExpr::from_term(t), &Bindings::new())?.to_term());
    }
    Ok(match t {
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(evaluate_term).collect::<Result<_, _>>()?,
        ),
        Term::List(items) => Term::List(items.iter().map(evaluate_term).collect::<Result<_, _>>()?),
        other => other.clone(),
    })
}
