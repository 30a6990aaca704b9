use std::cell::Cell;
use std::collections::HashMap;
use std::ops::ControlFlow;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::arith::{compare, eval_arith, evaluate_term};
use super::{Bindings, FactDb, LogicError};
use crate::printer::literal_to_string;
use crate::spec::{ArithExpr, GameSpec, Literal, Rule};
use crate::term::{is_anonymous, Term};

pub const DEFAULT_DEPTH_LIMIT: usize = 10_000;

/// Staged side effects of one successful operation proof.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EffectSet {
    pub removals: Vec<Term>,
    pub next_facts: Vec<Term>,
    pub payoffs: Vec<(String, f64)>,
}

impl EffectSet {
    pub fn is_empty(&self) -> bool {
        self.removals.is_empty() && self.next_facts.is_empty() && self.payoffs.is_empty()
    }

    fn mark(&self) -> [usize; 3] {
        [self.removals.len(), self.next_facts.len(), self.payoffs.len()]
    }

    fn truncate(&mut self, mark: [usize; 3]) {
        self.removals.truncate(mark[0]);
        self.next_facts.truncate(mark[1]);
        self.payoffs.truncate(mark[2]);
    }
}

/// The rules a game's queries and operations run against.
#[derive(Debug, Clone)]
pub struct Program {
    /// `operation(Op) :- ...` rules, in declaration order.
    pub operations: Vec<Rule>,
    /// Rules callable as goals: hidden, terminal and `request`.
    pub rules: Vec<Rule>,
    pub depth_limit: usize,
}

impl Program {
    pub fn new(operations: Vec<Rule>, rules: Vec<Rule>) -> Program {
        Program { operations, rules, depth_limit: DEFAULT_DEPTH_LIMIT }
    }

    pub fn from_spec(spec: &GameSpec) -> Program {
        Program::new(spec.operation_rules.clone(), spec.query_rules())
    }

    pub fn with_depth_limit(mut self, limit: usize) -> Program {
        self.depth_limit = limit;
        self
    }
}

struct Node {
    lit: Literal,
    next: Goals,
}

type Goals = Option<Rc<Node>>;

fn push_front(lits: impl DoubleEndedIterator<Item = Literal>, rest: Goals) -> Goals {
    lits.rev().fold(rest, |next, lit| Some(Rc::new(Node { lit, next })))
}

/// Mutable substitution with an undo trail.
#[derive(Default)]
struct Store {
    map: HashMap<String, Term>,
    trail: Vec<String>,
}

impl Store {
    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.map.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
            Term::List(items) => Term::List(items.iter().map(|a| self.resolve(a)).collect()),
            other => other.clone(),
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().expect("trail longer than mark");
            self.map.remove(&v);
        }
    }

    fn occurs(&self, var: &str, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(v) => v == var,
            Term::Compound(_, args) | Term::List(args) => args.iter().any(|a| self.occurs(var, a)),
            _ => false,
        }
    }

    /// On failure some bindings may remain; callers undo to their mark.
    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if self.occurs(x, other) {
                    return false;
                }
                self.map.insert(x.clone(), other.clone());
                self.trail.push(x.clone());
                true
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            (Term::List(xs), Term::List(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => a == b,
        }
    }

    fn resolve_expr(&self, e: &ArithExpr) -> ArithExpr {
        ArithExpr::from_term(&self.resolve(&e.to_term()))
    }

    fn project(&self, vars: &[String]) -> Bindings {
        let mut out = Bindings::new();
        for v in vars {
            let var = Term::Var(v.clone());
            let t = self.resolve(&var);
            if t != var {
                out.bind(v, t);
            }
        }
        out
    }
}

/// Renames a clause apart. Every `_` occurrence gets its own variable.
fn rename(rule: &Rule, fresh: &Cell<u64>) -> Rule {
    let next_id = || {
        let n = fresh.get();
        fresh.set(n + 1);
        n
    };
    let id = next_id();
    let mut names: HashMap<String, Term> = HashMap::new();
    let mut f = |v: &str| {
        if v == "_" {
            return Term::Var(format!("_#{id}.{}", next_id()));
        }
        names.entry(v.to_string()).or_insert_with(|| Term::Var(format!("{v}#{id}"))).clone()
    };
    Rule {
        head: rule.head.map_vars(&mut f),
        body: rule.body.iter().map(|l| l.map_vars(&mut f)).collect(),
    }
}

struct ChoicePoint {
    goal: Term,
    rest: Goals,
    next_alt: usize,
    trail_mark: usize,
    staged_mark: [usize; 3],
    depth: usize,
}

type OnSolution<'f> = dyn FnMut(&Store, &EffectSet) -> ControlFlow<()> + 'f;

struct Machine<'a> {
    db: &'a FactDb,
    program: &'a Program,
    fresh: &'a Cell<u64>,
    store: Store,
    /// Effects staged along the current proof path. `removals` doubles as
    /// the set of facts hidden from the working view.
    staged: EffectSet,
    stack: Vec<ChoicePoint>,
}

impl<'a> Machine<'a> {
    fn new(db: &'a FactDb, program: &'a Program, fresh: &'a Cell<u64>) -> Machine<'a> {
        Machine {
            db,
            program,
            fresh,
            store: Store::default(),
            staged: EffectSet::default(),
            stack: Vec::new(),
        }
    }

    fn run(
        &mut self,
        goals: Goals,
        depth: usize,
        allow_effects: bool,
        on_solution: &mut OnSolution<'_>,
    ) -> Result<ControlFlow<()>, LogicError> {
        let mut current = Some((goals, depth));
        loop {
            let (goals, depth) = match current.take() {
                Some(c) => c,
                None => match self.backtrack() {
                    Some(c) => c,
                    None => return Ok(ControlFlow::Continue(())),
                },
            };
            let Some(node) = goals else {
                if on_solution(&self.store, &self.staged).is_break() {
                    return Ok(ControlFlow::Break(()));
                }
                continue;
            };
            let rest = node.next.clone();
            match &node.lit {
                Literal::Goal(t) => {
                    let goal = evaluate_term(&self.store.resolve(t))?;
                    if goal.indicator().is_none() {
                        return Err(match goal {
                            Term::Var(v) => LogicError::Instantiation(v),
                            other => LogicError::NotCallable(other.to_string()),
                        });
                    }
                    if depth >= self.program.depth_limit {
                        return Err(LogicError::DepthExceeded(self.program.depth_limit));
                    }
                    self.stack.push(ChoicePoint {
                        goal,
                        rest,
                        next_alt: 0,
                        trail_mark: self.store.trail.len(),
                        staged_mark: self.staged.mark(),
                        depth,
                    });
                }
                Literal::Not(t) => {
                    let goal = evaluate_term(&self.store.resolve(t))?;
                    let mut unbound = None;
                    goal.for_each_var(&mut |v| {
                        if !is_anonymous(v) && unbound.is_none() {
                            unbound = Some(v.to_string());
                        }
                    });
                    if let Some(v) = unbound {
                        return Err(LogicError::Instantiation(format!("{v} in not({goal})")));
                    }
                    let mut inner = Machine::new(self.db, self.program, self.fresh);
                    inner.staged.removals = self.staged.removals.clone();
                    let goals = push_front(std::iter::once(Literal::Goal(goal)), None);
                    let found = inner.run(goals, depth + 1, false, &mut |_, _| ControlFlow::Break(()))?;
                    if found.is_continue() {
                        current = Some((rest, depth));
                    }
                }
                Literal::Compare { op, lhs, rhs } => {
                    let lhs = self.store.resolve_expr(lhs);
                    let rhs = self.store.resolve_expr(rhs);
                    if compare(*op, &lhs, &rhs, &Bindings::new())? {
                        current = Some((rest, depth));
                    }
                }
                Literal::False => {}
                effect => {
                    if !allow_effects {
                        return Err(LogicError::EffectOutsideOperation(literal_to_string(effect)));
                    }
                    if self.stage(effect)? {
                        current = Some((rest, depth));
                    }
                }
            }
        }
    }

    /// Resumes the newest choice point with its next alternative.
    fn backtrack(&mut self) -> Option<(Goals, usize)> {
        let Machine { db, program, fresh, store, staged, stack } = self;
        let nfacts = db.len();
        let nalts = nfacts + program.rules.len();
        while let Some(cp) = stack.last_mut() {
            store.undo_to(cp.trail_mark);
            staged.truncate(cp.staged_mark);
            while cp.next_alt < nalts {
                let i = cp.next_alt;
                cp.next_alt += 1;
                if i < nfacts {
                    let fact = db.get(i).expect("index within database");
                    if staged.removals.contains(fact) {
                        continue;
                    }
                    if store.unify(&cp.goal, fact) {
                        return Some((cp.rest.clone(), cp.depth));
                    }
                } else {
                    let rule = &program.rules[i - nfacts];
                    if rule.head.indicator() != cp.goal.indicator() {
                        continue;
                    }
                    let rule = rename(rule, fresh);
                    if store.unify(&cp.goal, &rule.head) {
                        return Some((push_front(rule.body.into_iter(), cp.rest.clone()), cp.depth + 1));
                    }
                }
                store.undo_to(cp.trail_mark);
            }
            stack.pop();
        }
        None
    }

    fn stage(&mut self, effect: &Literal) -> Result<bool, LogicError> {
        let ground = |store: &Store, t: &Term| -> Result<Term, LogicError> {
            let t = evaluate_term(&store.resolve(t))?;
            if t.is_ground() {
                Ok(t)
            } else {
                Err(LogicError::Instantiation(t.to_string()))
            }
        };
        match effect {
            Literal::Ax(t) => {
                let fact = ground(&self.store, t)?;
                if !self.db.contains(&fact) || self.staged.removals.contains(&fact) {
                    return Ok(false);
                }
                self.staged.removals.push(fact);
            }
            Literal::Next(t) => {
                let fact = ground(&self.store, t)?;
                self.staged.next_facts.push(fact);
            }
            Literal::Payoff { agent, amount } => {
                let agent = match self.store.resolve(agent) {
                    Term::Atom(a) => a,
                    Term::Var(v) => return Err(LogicError::Instantiation(v)),
                    other => return Err(LogicError::NotAnAgent(other.to_string())),
                };
                let value = eval_arith(&self.store.resolve_expr(amount), &Bindings::new())?.as_f64();
                self.staged.payoffs.push((agent, value));
            }
            _ => unreachable!("not an effect literal"),
        }
        Ok(true)
    }
}

/// Gives each anonymous `_` in a query its own variable.
fn freshen_query(goal: &[Literal]) -> Vec<Literal> {
    let mut n = 0;
    goal.iter()
        .map(|l| {
            l.map_vars(&mut |v| {
                if v == "_" {
                    n += 1;
                    Term::Var(format!("_?{n}"))
                } else {
                    Term::Var(v.to_string())
                }
            })
        })
        .collect()
}

fn query_vars(goal: &[Literal]) -> Vec<String> {
    let mut vars: Vec<String> = Vec::new();
    for lit in goal {
        let mut visit = |v: &str| {
            if !is_anonymous(v) && !vars.iter().any(|x| x == v) {
                vars.push(v.to_string());
            }
        };
        match lit {
            Literal::Goal(t) | Literal::Not(t) | Literal::Ax(t) | Literal::Next(t) => t.for_each_var(&mut visit),
            Literal::Compare { lhs, rhs, .. } => {
                lhs.to_term().for_each_var(&mut visit);
                rhs.to_term().for_each_var(&mut visit);
            }
            Literal::Payoff { agent, amount } => {
                agent.for_each_var(&mut visit);
                amount.to_term().for_each_var(&mut visit);
            }
            Literal::False => {}
        }
    }
    vars
}

/// Streams every solution of `goal` to `on_solution` in the pinned order.
/// Each solution binds the query's named variables, fully resolved.
pub fn solve_each(
    goal: &[Literal],
    db: &FactDb,
    program: &Program,
    on_solution: &mut dyn FnMut(&Bindings) -> ControlFlow<()>,
) -> Result<(), LogicError> {
    if let Some(effect) = goal.iter().find(|l| l.is_effect()) {
        return Err(LogicError::EffectOutsideOperation(literal_to_string(effect)));
    }
    let goal = freshen_query(goal);
    let vars = query_vars(&goal);
    let fresh = Cell::new(0);
    let mut machine = Machine::new(db, program, &fresh);
    let goals = push_front(goal.into_iter(), None);
    let _ = machine.run(goals, 0, false, &mut |store, _| on_solution(&store.project(&vars)))?;
    Ok(())
}

/// All solutions of `goal`.
pub fn solve(goal: &[Literal], db: &FactDb, program: &Program) -> Result<Vec<Bindings>, LogicError> {
    let mut out = Vec::new();
    solve_each(goal, db, program, &mut |b| {
        out.push(b.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Attempts the operation `op` against `db`.
///
/// Commits to the first operation rule, in declaration order, whose body
/// succeeds, and to that body's first solution. `ax` removes from a private
/// working view, so later literals of the same body no longer see the fact.
/// Returns `Ok(None)` when no rule applies; `db` is never modified.
pub fn prove_operation(op: &Term, db: &FactDb, program: &Program) -> Result<Option<EffectSet>, LogicError> {
    if !op.is_ground() {
        return Err(LogicError::Instantiation(op.to_string()));
    }
    let head = Term::Compound("operation".into(), vec![op.clone()]);
    let fresh = Cell::new(0);
    for rule in &program.operations {
        let rule = rename(rule, &fresh);
        let mut machine = Machine::new(db, program, &fresh);
        if !machine.store.unify(&head, &rule.head) {
            continue;
        }
        let mut result = None;
        let goals = push_front(rule.body.into_iter(), None);
        let _ = machine.run(goals, 0, true, &mut |_, staged| {
            result = Some(staged.clone());
            ControlFlow::Break(())
        })?;
        if result.is_some() {
            return Ok(result);
        }
    }
    Ok(None)
}
