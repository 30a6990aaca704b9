//! Prolog-style concrete syntax for game descriptions.
//!
//! Clauses end with `.`, `:-` separates head and body, bodies are
//! comma-separated literals and `//` starts a line comment.

mod lexer;

use thiserror::Error;

use crate::spec::{
    ArithExpr, BranchingDecl, ChanceDecl, CmpOp, GameSpec, Literal, Rule, SwitchDecl,
};
use crate::term::Term;
use lexer::{Pos, Tok};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("source contains no clauses")]
    EmptySpec,
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unterminated quoted atom")]
    UnterminatedQuote,
    #[error("malformed number `{0}`")]
    BadNumber(String),
    #[error("expected {expected}, found {found}")]
    UnexpectedToken { expected: String, found: String },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEof { expected: String },
    #[error("unknown declaration `{0}`")]
    UnknownDeclaration(String),
    #[error("invalid declaration: {0}")]
    InvalidDeclaration(String),
}

/// Parses a complete source file.
pub fn parse_sidl(source: &str) -> Result<GameSpec, ParseError> {
    let lexed = lexer::lex(source)?;
    if lexed.tokens.is_empty() {
        return Err(ParseError { kind: ParseErrorKind::EmptySpec, line: 1, column: 1 });
    }
    let mut p = Parser { toks: lexed.tokens, i: 0, end: lexed.end };
    let mut spec = GameSpec::default();
    while !p.at_end() {
        let start = p.pos();
        let clause = p.clause()?;
        add_clause(&mut spec, clause, start)?;
    }
    Ok(spec)
}

/// Parses a single term, e.g. `state(X)` or `3 - X`.
pub fn parse_term(source: &str) -> Result<Term, ParseError> {
    let lexed = lexer::lex(source)?;
    let mut p = Parser { toks: lexed.tokens, i: 0, end: lexed.end };
    let t = p.expr()?;
    if !p.at_end() {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

/// Parses a comma-separated goal list such as `state(X), X > 0`.
pub fn parse_goal(source: &str) -> Result<Vec<Literal>, ParseError> {
    let lexed = lexer::lex(source)?;
    let mut p = Parser { toks: lexed.tokens, i: 0, end: lexed.end };
    let mut body = vec![p.literal()?];
    while p.eat(&Tok::Comma) {
        body.push(p.literal()?);
    }
    p.eat(&Tok::Dot);
    if !p.at_end() {
        return Err(p.unexpected("end of input"));
    }
    Ok(body)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    end: Pos,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let pos = self.pos();
        let kind = match self.peek() {
            Some(t) => ParseErrorKind::UnexpectedToken {
                expected: expected.to_string(),
                found: t.describe(),
            },
            None => ParseErrorKind::UnexpectedEof { expected: expected.to_string() },
        };
        ParseError { kind, line: pos.line, column: pos.column }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn int(&self, v: i128) -> Result<i64, ParseError> {
        i64::try_from(v).map_err(|_| {
            let pos = self.pos();
            ParseError { kind: ParseErrorKind::BadNumber(v.to_string()), line: pos.line, column: pos.column }
        })
    }

    fn clause(&mut self) -> Result<Rule, ParseError> {
        let head = self.expr()?;
        let mut body = Vec::new();
        if self.eat(&Tok::Neck) {
            body.push(self.literal()?);
            while self.eat(&Tok::Comma) {
                body.push(self.literal()?);
            }
        }
        self.expect(Tok::Dot, "`.` to end the clause")?;
        Ok(Rule::new(head, body))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Tok::Op(">")) => Some(CmpOp::Gt),
            Some(Tok::Op("<")) => Some(CmpOp::Lt),
            Some(Tok::Op(">=")) => Some(CmpOp::Ge),
            Some(Tok::Op("<=")) => Some(CmpOp::Le),
            Some(Tok::Op("=")) => Some(CmpOp::Eq),
            Some(Tok::Op("\\=")) => Some(CmpOp::Ne),
            _ => None,
        };
        if let Some(op) = op {
            self.i += 1;
            let rhs = self.expr()?;
            return Ok(Literal::Compare {
                op,
                lhs: ArithExpr::from_term(&lhs),
                rhs: ArithExpr::from_term(&rhs),
            });
        }
        Ok(match lhs {
            Term::Atom(ref a) if a == "false" => Literal::False,
            Term::Compound(ref f, ref args) if f == "not" && args.len() == 1 => {
                Literal::Not(args[0].clone())
            }
            Term::Compound(ref f, ref args) if f == "ax" && args.len() == 1 => {
                Literal::Ax(args[0].clone())
            }
            Term::Compound(ref f, ref args) if f == "next" && args.len() == 1 => {
                Literal::Next(args[0].clone())
            }
            Term::Compound(ref f, ref args) if f == "goal" && args.len() == 2 => Literal::Payoff {
                agent: args[0].clone(),
                amount: ArithExpr::from_term(&args[1]),
            },
            other => Literal::Goal(other),
        })
    }

    fn expr(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.mul_expr()?;
        while let Some(Tok::Op(op @ ("+" | "-"))) = self.peek() {
            let op = *op;
            self.i += 1;
            let rhs = self.mul_expr()?;
            lhs = Term::Compound(op.into(), vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ("*" | "/"))) = self.peek() {
            let op = *op;
            self.i += 1;
            let rhs = self.unary()?;
            lhs = Term::Compound(op.into(), vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.peek() == Some(&Tok::Op("-")) {
            self.i += 1;
            return Ok(match self.peek() {
                Some(Tok::Int(i)) => {
                    let v = self.int(-*i)?;
                    self.i += 1;
                    Term::Int(v)
                }
                Some(Tok::Real(r)) => {
                    let v = -*r;
                    self.i += 1;
                    Term::Real(v)
                }
                _ => Term::Compound("-".into(), vec![self.unary()?]),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(i)) => {
                let v = self.int(i)?;
                self.i += 1;
                Ok(Term::Int(v))
            }
            Some(Tok::Real(r)) => {
                self.i += 1;
                Ok(Term::Real(r))
            }
            Some(Tok::Var(v)) => {
                self.i += 1;
                Ok(Term::Var(v))
            }
            Some(Tok::Atom(name)) | Some(Tok::Quoted(name)) => {
                self.i += 1;
                if self.eat(&Tok::LParen) {
                    let args = self.sequence(Tok::RParen, "`,` or `)`")?;
                    if args.is_empty() {
                        return Err(self.unexpected("an argument"));
                    }
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Atom(name))
                }
            }
            Some(Tok::LBracket) => {
                self.i += 1;
                if self.eat(&Tok::RBracket) {
                    return Ok(Term::List(vec![]));
                }
                Ok(Term::List(self.sequence(Tok::RBracket, "`,` or `]`")?))
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let t = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn sequence(&mut self, close: Tok, expected: &str) -> Result<Vec<Term>, ParseError> {
        let mut items = Vec::new();
        if self.eat(&close) {
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.eat(&close) {
                return Ok(items);
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.unexpected(expected));
            }
        }
    }
}

fn invalid(msg: impl Into<String>, at: Pos) -> ParseError {
    ParseError {
        kind: ParseErrorKind::InvalidDeclaration(msg.into()),
        line: at.line,
        column: at.column,
    }
}

fn no_body(rule: &Rule, what: &str, at: Pos) -> Result<(), ParseError> {
    if rule.body.is_empty() {
        Ok(())
    } else {
        Err(invalid(format!("`{what}` declarations take no body"), at))
    }
}

fn int_arg(t: &Term, what: &str, at: Pos) -> Result<i64, ParseError> {
    match t {
        Term::Int(i) => Ok(*i),
        other => Err(invalid(format!("{what} must be an integer, got `{other}`"), at)),
    }
}

fn atom_arg(t: &Term, what: &str, at: Pos) -> Result<String, ParseError> {
    match t {
        Term::Atom(a) => Ok(a.clone()),
        other => Err(invalid(format!("{what} must be an atom, got `{other}`"), at)),
    }
}

fn list_arg<'a>(t: &'a Term, what: &str, at: Pos) -> Result<&'a [Term], ParseError> {
    match t {
        Term::List(items) => Ok(items),
        other => Err(invalid(format!("{what} must be a list, got `{other}`"), at)),
    }
}

fn add_clause(spec: &mut GameSpec, rule: Rule, at: Pos) -> Result<(), ParseError> {
    let (name, arity) = match rule.head.indicator() {
        Some((n, a)) => (n.to_string(), a),
        None => return Err(invalid(format!("clause head `{}` is not callable", rule.head), at)),
    };
    let args = rule.head.args();
    match (name.as_str(), arity) {
        ("fact", 2) => {
            no_body(&rule, "fact", at)?;
            let pred = atom_arg(&args[0], "fact predicate", at)?;
            let n = int_arg(&args[1], "fact arity", at)?;
            let n = usize::try_from(n).map_err(|_| invalid("fact arity must be non-negative", at))?;
            spec.fact_decls.insert(pred, n);
        }
        ("switch", 3) => {
            no_body(&rule, "switch", at)?;
            let bid = int_arg(&args[0], "switch BID", at)?;
            let owner = atom_arg(&args[1], "switch owner", at)?;
            let aliases = list_arg(&args[2], "switch aliases", at)?
                .iter()
                .map(|a| {
                    a.alias_text()
                        .ok_or_else(|| invalid(format!("alias `{a}` must be an atom or integer"), at))
                })
                .collect::<Result<Vec<_>, _>>()?;
            spec.switches.push(SwitchDecl { bid, owner, aliases });
        }
        ("chance", 2) => {
            no_body(&rule, "chance", at)?;
            let bid = int_arg(&args[0], "chance BID", at)?;
            let distribution = list_arg(&args[1], "chance distribution", at)?
                .iter()
                .map(|p| match p {
                    Term::Int(i) => Ok(*i as f64),
                    Term::Real(r) => Ok(*r),
                    other => Err(invalid(format!("probability `{other}` is not a number"), at)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            spec.chances.push(ChanceDecl { bid, distribution });
        }
        ("branching", 2) => {
            no_body(&rule, "branching", at)?;
            let operators = list_arg(&args[0], "branching operators", at)?.to_vec();
            if let Some(bad) = operators.iter().find(|o| o.indicator().is_none()) {
                return Err(invalid(format!("operator `{bad}` is not callable"), at));
            }
            let bid = match &args[1] {
                Term::Atom(a) if a == "nil" => None,
                other => Some(int_arg(other, "branching BID", at)?),
            };
            let decl_index = spec.branchings.len();
            spec.branchings.push(BranchingDecl { operators, bid, decl_index });
        }
        ("hidden", 2) | ("request", 2) => {
            let head = Term::Compound("hidden".into(), args.to_vec());
            spec.hidden_rules.push(Rule::new(head, rule.body));
        }
        ("operation", 1) => {
            if args[0].indicator().is_none() {
                return Err(invalid(format!("operator `{}` is not callable", args[0]), at));
            }
            spec.operation_rules.push(rule);
        }
        ("terminal", 0) => spec.terminal_rules.push(rule),
        ("init", 1) => {
            no_body(&rule, "init", at)?;
            let fact = args[0].clone();
            if let Some(("account", 2)) = fact.indicator() {
                let agent = atom_arg(&fact.args()[0], "account agent", at)?;
                if !spec.agents.contains(&agent) {
                    spec.agents.push(agent);
                }
            }
            spec.init_facts.push(fact);
        }
        _ => {
            return Err(ParseError {
                kind: ParseErrorKind::UnknownDeclaration(format!("{name}/{arity}")),
                line: at.line,
                column: at.column,
            })
        }
    }
    Ok(())
}
