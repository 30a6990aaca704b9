//! The validated shape of a game description: declarations plus rules.

use indexmap::IndexMap;

use crate::term::Term;

/// Branching identifier. Names exactly one switch or chance.
pub type Bid = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    pub fn from_symbol(s: &str) -> Option<ArithOp> {
        Some(match s {
            "+" => ArithOp::Add,
            "-" => ArithOp::Sub,
            "*" => ArithOp::Mul,
            "/" => ArithOp::Div,
            _ => return None,
        })
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }
}

/// Arithmetic expression tree. `Const` carries a non-numeric ground leaf
/// (an atom, say) so that `=` and `\=` can compare symbols as well.
#[derive(Debug, Clone, PartialEq)]
pub enum ArithExpr {
    Int(i64),
    Real(f64),
    Var(String),
    Const(Term),
    Neg(Box<ArithExpr>),
    Bin(ArithOp, Box<ArithExpr>, Box<ArithExpr>),
}

impl ArithExpr {
    pub fn from_term(t: &Term) -> ArithExpr {
        match t {
            Term::Int(i) => ArithExpr::Int(*i),
            Term::Real(r) => ArithExpr::Real(*r),
            Term::Var(v) => ArithExpr::Var(v.clone()),
            Term::Compound(f, args) if t.is_arith() => {
                if args.len() == 1 {
                    ArithExpr::Neg(Box::new(ArithExpr::from_term(&args[0])))
                } else {
                    let op = ArithOp::from_symbol(f).expect("checked by is_arith");
                    ArithExpr::Bin(
                        op,
                        Box::new(ArithExpr::from_term(&args[0])),
                        Box::new(ArithExpr::from_term(&args[1])),
                    )
                }
            }
            other => ArithExpr::Const(other.clone()),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            ArithExpr::Int(i) => Term::Int(*i),
            ArithExpr::Real(r) => Term::Real(*r),
            ArithExpr::Var(v) => Term::Var(v.clone()),
            ArithExpr::Const(t) => t.clone(),
            ArithExpr::Neg(e) => Term::Compound("-".into(), vec![e.to_term()]),
            ArithExpr::Bin(op, l, r) => {
                Term::Compound(op.symbol().into(), vec![l.to_term(), r.to_term()])
            }
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> ArithExpr {
        ArithExpr::from_term(&self.to_term().map_vars(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "\\=",
        }
    }
}

/// One body literal. Order within a body is significant.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Goal(Term),
    Not(Term),
    Compare { op: CmpOp, lhs: ArithExpr, rhs: ArithExpr },
    Ax(Term),
    Next(Term),
    Payoff { agent: Term, amount: ArithExpr },
    False,
}

impl Literal {
    pub fn is_effect(&self) -> bool {
        matches!(self, Literal::Ax(_) | Literal::Next(_) | Literal::Payoff { .. })
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Literal {
        match self {
            Literal::Goal(t) => Literal::Goal(t.map_vars(f)),
            Literal::Not(t) => Literal::Not(t.map_vars(f)),
            Literal::Compare { op, lhs, rhs } => Literal::Compare {
                op: *op,
                lhs: lhs.map_vars(f),
                rhs: rhs.map_vars(f),
            },
            Literal::Ax(t) => Literal::Ax(t.map_vars(f)),
            Literal::Next(t) => Literal::Next(t.map_vars(f)),
            Literal::Payoff { agent, amount } => Literal::Payoff {
                agent: agent.map_vars(f),
                amount: amount.map_vars(f),
            },
            Literal::False => Literal::False,
        }
    }

    /// The fact-shaped term a literal tests or stages, if any.
    pub fn fact_term(&self) -> Option<&Term> {
        match self {
            Literal::Goal(t) | Literal::Not(t) | Literal::Ax(t) | Literal::Next(t) => Some(t),
            _ => None,
        }
    }
}

/// `head :- body.` An empty body is a plain fact-like clause.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub head: Term,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Term, body: Vec<Literal>) -> Rule {
        Rule { head, body }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchDecl {
    pub bid: Bid,
    pub owner: String,
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChanceDecl {
    pub bid: Bid,
    pub distribution: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchingDecl {
    pub operators: Vec<Term>,
    /// `None` for `nil`: an unconditional single-operator branching.
    pub bid: Option<Bid>,
    /// Position among the branchings, in source order.
    pub decl_index: usize,
}

/// What a BID refers to.
#[derive(Debug, Clone, Copy)]
pub enum BidTarget<'a> {
    Switch(&'a SwitchDecl),
    Chance(&'a ChanceDecl),
}

/// A parsed game description.
///
/// Rule heads are kept in their full form: `operation(a(X))`,
/// `hidden(state(X), [alice])`, `terminal`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GameSpec {
    pub fact_decls: IndexMap<String, usize>,
    pub switches: Vec<SwitchDecl>,
    pub chances: Vec<ChanceDecl>,
    pub branchings: Vec<BranchingDecl>,
    pub hidden_rules: Vec<Rule>,
    pub operation_rules: Vec<Rule>,
    pub terminal_rules: Vec<Rule>,
    /// Every `init(..)` argument, including `account(..)` and `does(..)`.
    pub init_facts: Vec<Term>,
    /// Agents with an `init(account(A, _))`, first occurrence order.
    pub agents: Vec<String>,
}

impl GameSpec {
    pub fn switch(&self, bid: Bid) -> Option<&SwitchDecl> {
        self.switches.iter().find(|s| s.bid == bid)
    }

    pub fn chance(&self, bid: Bid) -> Option<&ChanceDecl> {
        self.chances.iter().find(|c| c.bid == bid)
    }

    /// Resolves a BID, preferring a switch when (invalidly) both exist.
    pub fn target(&self, bid: Bid) -> Option<BidTarget<'_>> {
        self.switch(bid)
            .map(BidTarget::Switch)
            .or_else(|| self.chance(bid).map(BidTarget::Chance))
    }

    pub fn switches_of<'a>(&'a self, agent: &'a str) -> impl Iterator<Item = &'a SwitchDecl> + 'a {
        self.switches.iter().filter(move |s| s.owner == agent)
    }

    pub fn is_agent(&self, name: &str) -> bool {
        self.agents.iter().any(|a| a == name)
    }

    /// Rules the solver sees outside of operations: hidden, terminal and the
    /// built-in `request(X, H) :- X, hidden(X, H)`.
    pub fn query_rules(&self) -> Vec<Rule> {
        let mut rules = Vec::with_capacity(self.hidden_rules.len() + self.terminal_rules.len() + 1);
        rules.extend(self.hidden_rules.iter().cloned());
        rules.extend(self.terminal_rules.iter().cloned());
        rules.push(request_rule());
        rules
    }
}

/// `request(X, H) :- X, hidden(X, H).`
pub fn request_rule() -> Rule {
    let x = Term::var("X");
    let h = Term::var("H");
    Rule::new(
        Term::compound("request", vec![x.clone(), h.clone()]),
        vec![
            Literal::Goal(x.clone()),
            Literal::Goal(Term::compound("hidden", vec![x, h])),
        ],
    )
}
