//! Forking symbolic interpreter producing a [`TraceSet`].
//!
//! Array lengths are fixed per path by splitting on every combination of
//! `0..=max_array_len` up front; everything else is symbolic. Every path
//! carries a concrete witness input satisfying its constraint, so a branch
//! is only sent to the solver when the witness does not already decide it.

use std::rc::Rc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::domain::InputDomain;
use super::expr::{Assignment, Evaluator, ExprId, ExprPool, Scalar, Sym};
use super::solver::{Shape, SolveResult, Solver};
use crate::int::Int;
use crate::interp::{ErrorKind, Outcome, Value};
use crate::lang::{BinaryOp, Block, Expr, Program, SnipType, Stmt, UnaryOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExecCaps {
    /// Maximum body executions per loop entry on one path.
    pub unroll_cap: u32,
    /// Maximum number of traces per program.
    pub trace_cap: usize,
}

impl Default for ExecCaps {
    fn default() -> Self {
        ExecCaps {
            unroll_cap: 32,
            trace_cap: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymValue {
    Scalar(ExprId),
    Array(Vec<ExprId>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnknownReason {
    UnrollCap,
    TraceCap,
    TimeBudget,
}

impl std::fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UnknownReason::UnrollCap => "unroll cap",
            UnknownReason::TraceCap => "trace cap",
            UnknownReason::TimeBudget => "time budget",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceOutcome {
    Return(SymValue),
    Error(ErrorKind),
    Unknown(UnknownReason),
}

/// Conjunction of boolean expressions.
pub type PathConstraint = Vec<ExprId>;

#[derive(Clone, Debug)]
pub struct Trace {
    pub shape: Rc<Shape>,
    pub constraint: PathConstraint,
    pub outcome: TraceOutcome,
    /// Some input satisfying `constraint`.
    pub witness: Assignment,
}

#[derive(Clone, Debug, Default)]
pub struct TraceSet {
    pub traces: Vec<Trace>,
    /// False iff some trace is `Unknown`.
    pub complete: bool,
}

/// Splits concrete inputs into a shape (array lengths) and an assignment.
pub fn to_assignment(types: &[SnipType], inputs: &[Value]) -> (Shape, Assignment) {
    let mut lens = Vec::with_capacity(inputs.len());
    let mut values = Vec::with_capacity(inputs.len());
    for v in inputs {
        match v {
            Value::Int(i) => {
                lens.push(0);
                values.push(vec![i.clone()]);
            }
            Value::Bool(b) => {
                lens.push(0);
                values.push(vec![Int::from(*b as i64)]);
            }
            Value::IntArray(items) => {
                lens.push(items.len());
                values.push(items.clone());
            }
        }
    }
    (
        Shape {
            types: types.to_vec(),
            lens,
        },
        Assignment { values },
    )
}

pub fn to_inputs(shape: &Shape, asg: &Assignment) -> Vec<Value> {
    shape
        .types
        .iter()
        .zip(&asg.values)
        .map(|(ty, vals)| match ty {
            SnipType::Int => Value::Int(vals[0].clone()),
            SnipType::Bool => Value::Bool(!vals[0].is_zero()),
            SnipType::IntArray => Value::IntArray(vals.clone()),
        })
        .collect()
}

impl TraceSet {
    /// Indices of traces whose shape and constraint `inputs` satisfy.
    /// Exactly one for inputs inside the explored domain.
    pub fn matching(&self, pool: &ExprPool, types: &[SnipType], inputs: &[Value]) -> Vec<usize> {
        let (shape, asg) = to_assignment(types, inputs);
        let mut ev = Evaluator::new();
        ev.begin();
        self.traces
            .iter()
            .enumerate()
            .filter(|(_, t)| *t.shape == shape && t.constraint.iter().all(|&c| ev.holds(pool, &asg, c)))
            .map(|(i, _)| i)
            .collect()
    }

    /// Concrete outcome trace `idx` predicts for `inputs`; `None` for `Unknown`.
    pub fn predict(&self, pool: &ExprPool, idx: usize, types: &[SnipType], inputs: &[Value]) -> Option<Outcome> {
        let (_, asg) = to_assignment(types, inputs);
        let mut ev = Evaluator::new();
        ev.begin();
        match &self.traces[idx].outcome {
            TraceOutcome::Unknown(_) => None,
            TraceOutcome::Error(k) => Some(Outcome::Error(*k)),
            TraceOutcome::Return(v) => Some(Outcome::Return(concretize(pool, &mut ev, &asg, v)?)),
        }
    }
}

pub(crate) fn concretize(pool: &ExprPool, ev: &mut Evaluator, asg: &Assignment, v: &SymValue) -> Option<Value> {
    Some(match v {
        SymValue::Scalar(e) => match ev.eval(pool, asg, *e)? {
            Scalar::Int(i) => Value::Int(i),
            Scalar::Bool(b) => Value::Bool(b),
        },
        SymValue::Array(items) => Value::IntArray(
            items
                .iter()
                .map(|e| ev.eval(pool, asg, *e).map(|s| s.as_int().clone()))
                .collect::<Option<_>>()?,
        ),
    })
}

/// Symbolically executes `p` over `dom`, interning expressions into `pool`.
pub fn explore(
    pool: &mut ExprPool,
    p: &Program,
    dom: InputDomain,
    caps: ExecCaps,
    deadline: Option<Instant>,
) -> TraceSet {
    let types = p.param_types();
    let shapes = array_shapes(&types, dom.max_array_len as usize);
    let mut ex = Explorer {
        pool,
        dom,
        caps,
        deadline,
        paths: shapes.len(),
        eval: Evaluator::new(),
    };
    let mut traces = Vec::new();
    for (n, shape) in shapes.into_iter().enumerate() {
        let shape = Rc::new(shape);
        let witness = shape.zero_assignment();
        if n >= caps.trace_cap {
            traces.push(Trace {
                shape,
                constraint: Vec::new(),
                outcome: TraceOutcome::Unknown(UnknownReason::TraceCap),
                witness,
            });
            continue;
        }
        let env = p
            .params
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let sym = |e: usize| Sym {
                    param: i as u16,
                    elem: e as u16,
                };
                let v = match q.ty {
                    SnipType::Int => SymValue::Scalar(ex.pool.int_var(sym(0))),
                    SnipType::Bool => SymValue::Scalar(ex.pool.bool_var(sym(0))),
                    SnipType::IntArray => SymValue::Array((0..shape.lens[i]).map(|e| ex.pool.int_var(sym(e))).collect()),
                };
                (q.name.clone(), v)
            })
            .collect();
        let st = State {
            env,
            pc: Vec::new(),
            shape: shape.clone(),
            witness,
        };
        for (st, r) in ex.block(st, &p.body) {
            let outcome = match r {
                Err(Stop::Return(v)) => TraceOutcome::Return(v),
                Err(Stop::Error(k)) => TraceOutcome::Error(k),
                Err(Stop::Unknown(why)) => TraceOutcome::Unknown(why),
                Ok(()) => unreachable!("validated program fell off the end"),
            };
            traces.push(Trace {
                shape: st.shape,
                constraint: st.pc,
                outcome,
                witness: st.witness,
            });
        }
    }
    let complete = traces.iter().all(|t| !matches!(t.outcome, TraceOutcome::Unknown(_)));
    TraceSet { traces, complete }
}

/// Every combination of array lengths, in canonical order.
fn array_shapes(types: &[SnipType], max_len: usize) -> Vec<Shape> {
    let mut out = vec![Vec::new()];
    for ty in types {
        let choices: Vec<usize> = match ty {
            SnipType::IntArray => (0..=max_len).collect(),
            _ => vec![0],
        };
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                choices.iter().map(move |&c| {
                    let mut l = prefix.clone();
                    l.push(c);
                    l
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|lens| Shape {
            types: types.to_vec(),
            lens,
        })
        .collect()
}

#[derive(Clone)]
struct State {
    env: Vec<(String, SymValue)>,
    pc: PathConstraint,
    shape: Rc<Shape>,
    witness: Assignment,
}

impl State {
    fn get(&self, name: &str) -> &SymValue {
        &self.env.iter().rev().find(|(n, _)| n == name).expect("declared variable").1
    }

    fn get_mut(&mut self, name: &str) -> &mut SymValue {
        &mut self.env.iter_mut().rev().find(|(n, _)| n == name).expect("declared variable").1
    }
}

enum Stop {
    Return(SymValue),
    Error(ErrorKind),
    Unknown(UnknownReason),
}

type Branches<T> = Vec<(State, Result<T, Stop>)>;

enum Fork {
    Only(bool, State),
    Both(State, State),
    Halt(State, UnknownReason),
}

struct Explorer<'p> {
    pool: &'p mut ExprPool,
    dom: InputDomain,
    caps: ExecCaps,
    deadline: Option<Instant>,
    paths: usize,
    eval: Evaluator,
}

/// Expressions that can neither fail nor fork when evaluated.
fn infallible(e: &Expr) -> bool {
    match e {
        Expr::Int(..) | Expr::Bool(..) | Expr::Var(..) => true,
        Expr::Index { .. } => false,
        Expr::Len(a, _) | Expr::Sorted(a, _) => infallible(a),
        Expr::Unary { operand, .. } => infallible(operand),
        Expr::Binary { op, lhs, rhs, .. } => {
            !matches!(op, BinaryOp::Div | BinaryOp::Rem) && infallible(lhs) && infallible(rhs)
        }
    }
}

impl Explorer<'_> {
    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn fork(&mut self, mut st: State, cond: ExprId) -> Fork {
        if let Some(b) = self.pool.as_bool_const(cond) {
            return Fork::Only(b, st);
        }
        if self.out_of_time() {
            return Fork::Halt(st, UnknownReason::TimeBudget);
        }
        self.eval.begin();
        let taken = self.eval.holds(self.pool, &st.witness, cond);
        let other = if taken { self.pool.not(cond) } else { cond };
        st.pc.push(other);
        let mut solver = Solver::new(self.pool, self.dom, self.deadline);
        std::mem::swap(&mut solver.eval, &mut self.eval);
        let res = solver.solve(&st.shape, &st.pc, None);
        std::mem::swap(&mut solver.eval, &mut self.eval);
        st.pc.pop();
        match res {
            // the path constraint already implies the witness's direction
            SolveResult::Unsat => Fork::Only(taken, st),
            SolveResult::Timeout => Fork::Halt(st, UnknownReason::TimeBudget),
            SolveResult::Sat(w) => {
                if self.paths >= self.caps.trace_cap {
                    return Fork::Halt(st, UnknownReason::TraceCap);
                }
                self.paths += 1;
                let this_dir = if taken { cond } else { self.pool.not(cond) };
                let mut alt = st.clone();
                alt.pc.push(other);
                alt.witness = w;
                st.pc.push(this_dir);
                if taken {
                    Fork::Both(st, alt)
                } else {
                    Fork::Both(alt, st)
                }
            }
        }
    }

    /// Resolves a symbolic index against a length-`len` array.
    fn select_index(&mut self, st: State, index: ExprId, len: usize) -> Branches<usize> {
        if let Some(c) = self.pool.const_value(index) {
            return match c.as_int().as_index(len) {
                Some(j) => vec![(st, Ok(j))],
                None => vec![(st, Err(Stop::Error(ErrorKind::IndexOutOfBounds)))],
            };
        }
        let mut out = Vec::new();
        let mut rest = st;
        for j in 0..len {
            let jc = self.pool.int(Int::from(j));
            let is_j = self.pool.bin(BinaryOp::Eq, index, jc);
            match self.fork(rest, is_j) {
                Fork::Only(true, s) => {
                    out.push((s, Ok(j)));
                    return out;
                }
                Fork::Only(false, s) => rest = s,
                Fork::Both(t, f) => {
                    out.push((t, Ok(j)));
                    rest = f;
                }
                Fork::Halt(s, why) => {
                    out.push((s, Err(Stop::Unknown(why))));
                    return out;
                }
            }
        }
        out.push((rest, Err(Stop::Error(ErrorKind::IndexOutOfBounds))));
        out
    }

    fn scalar(&mut self, st: State, e: &Expr) -> Branches<ExprId> {
        self.expr(st, e)
            .into_iter()
            .map(|(s, r)| {
                let r = r.map(|v| match v {
                    SymValue::Scalar(x) => x,
                    SymValue::Array(_) => unreachable!("typed"),
                });
                (s, r)
            })
            .collect()
    }

    fn array(&mut self, st: State, e: &Expr) -> Branches<Vec<ExprId>> {
        self.expr(st, e)
            .into_iter()
            .map(|(s, r)| {
                let r = r.map(|v| match v {
                    SymValue::Array(x) => x,
                    SymValue::Scalar(_) => unreachable!("typed"),
                });
                (s, r)
            })
            .collect()
    }

    fn expr(&mut self, st: State, e: &Expr) -> Branches<SymValue> {
        match e {
            Expr::Int(v, _) => {
                let id = self.pool.int(v.clone());
                vec![(st, Ok(SymValue::Scalar(id)))]
            }
            Expr::Bool(b, _) => {
                let id = self.pool.bool(*b);
                vec![(st, Ok(SymValue::Scalar(id)))]
            }
            Expr::Var(name, _) => {
                let v = st.get(name).clone();
                vec![(st, Ok(v))]
            }
            Expr::Index { name, index, .. } => {
                let mut out = Vec::new();
                for (s, r) in self.scalar(st, index) {
                    let iv = match r {
                        Ok(iv) => iv,
                        Err(stop) => {
                            out.push((s, Err(stop)));
                            continue;
                        }
                    };
                    let SymValue::Array(items) = s.get(name).clone() else { unreachable!("typed") };
                    for (s2, j) in self.select_index(s, iv, items.len()) {
                        out.push((s2, j.map(|j| SymValue::Scalar(items[j]))));
                    }
                }
                out
            }
            Expr::Len(a, _) => self
                .array(st, a)
                .into_iter()
                .map(|(s, r)| {
                    let r = r.map(|items| SymValue::Scalar(self.pool.int(Int::from(items.len()))));
                    (s, r)
                })
                .collect(),
            Expr::Sorted(a, _) => self
                .array(st, a)
                .into_iter()
                .map(|(s, r)| {
                    let r = r.map(|items| SymValue::Array((0..items.len()).map(|k| self.pool.sorted_nth(&items, k)).collect()));
                    (s, r)
                })
                .collect(),
            Expr::Unary { op, operand, .. } => self
                .scalar(st, operand)
                .into_iter()
                .map(|(s, r)| {
                    let r = r.map(|x| {
                        SymValue::Scalar(match op {
                            UnaryOp::Neg => self.pool.neg(x),
                            UnaryOp::Not => self.pool.not(x),
                        })
                    });
                    (s, r)
                })
                .collect(),
            Expr::Binary { op, lhs, rhs, .. } => match op {
                BinaryOp::And | BinaryOp::Or => self.short_circuit(st, *op, lhs, rhs),
                _ => {
                    let mut out = Vec::new();
                    for (s1, r1) in self.expr(st, lhs) {
                        let a = match r1 {
                            Ok(a) => a,
                            Err(stop) => {
                                out.push((s1, Err(stop)));
                                continue;
                            }
                        };
                        for (s2, r2) in self.expr(s1, rhs) {
                            match r2 {
                                Ok(b) => out.extend(self.apply(s2, *op, &a, &b)),
                                Err(stop) => out.push((s2, Err(stop))),
                            }
                        }
                    }
                    out
                }
            },
        }
    }

    fn short_circuit(&mut self, st: State, op: BinaryOp, lhs: &Expr, rhs: &Expr) -> Branches<SymValue> {
        let decided = op == BinaryOp::Or; // lhs value that skips rhs
        let mut out = Vec::new();
        for (s, r) in self.scalar(st, lhs) {
            let l = match r {
                Ok(l) => l,
                Err(stop) => {
                    out.push((s, Err(stop)));
                    continue;
                }
            };
            if self.pool.as_bool_const(l).is_none() && infallible(rhs) {
                // no observable difference between strict and lazy evaluation
                for (s2, r2) in self.scalar(s, rhs) {
                    out.push((s2, r2.map(|r| SymValue::Scalar(self.pool.bin(op, l, r)))));
                }
                continue;
            }
            match self.fork(s, l) {
                Fork::Only(b, s) if b == decided => {
                    let c = self.pool.bool(decided);
                    out.push((s, Ok(SymValue::Scalar(c))));
                }
                Fork::Only(_, s) => out.extend(self.expr(s, rhs)),
                Fork::Both(t, f) => {
                    let (skip, eval) = if decided { (t, f) } else { (f, t) };
                    let c = self.pool.bool(decided);
                    out.push((skip, Ok(SymValue::Scalar(c))));
                    out.extend(self.expr(eval, rhs));
                }
                Fork::Halt(s, why) => out.push((s, Err(Stop::Unknown(why)))),
            }
        }
        out
    }

    fn apply(&mut self, st: State, op: BinaryOp, a: &SymValue, b: &SymValue) -> Branches<SymValue> {
        match (a, b) {
            (SymValue::Array(xs), SymValue::Array(ys)) => {
                let same = if xs.len() != ys.len() {
                    self.pool.bool(false)
                } else {
                    let mut acc = self.pool.bool(true);
                    for (&x, &y) in xs.iter().zip(ys) {
                        let eq = self.pool.bin(BinaryOp::Eq, x, y);
                        acc = self.pool.bin(BinaryOp::And, acc, eq);
                    }
                    acc
                };
                let v = match op {
                    BinaryOp::Eq => same,
                    BinaryOp::Ne => self.pool.not(same),
                    _ => unreachable!("typed"),
                };
                vec![(st, Ok(SymValue::Scalar(v)))]
            }
            (SymValue::Scalar(x), SymValue::Scalar(y)) => {
                let (x, y) = (*x, *y);
                if !matches!(op, BinaryOp::Div | BinaryOp::Rem) {
                    return vec![(st, Ok(SymValue::Scalar(self.pool.bin(op, x, y))))];
                }
                let zero = self.pool.int(Int::ZERO);
                let is_zero = self.pool.bin(BinaryOp::Eq, y, zero);
                let div_by_zero = Err(Stop::Error(ErrorKind::DivisionByZero));
                match self.fork(st, is_zero) {
                    Fork::Only(true, s) => vec![(s, div_by_zero)],
                    Fork::Only(false, s) => vec![(s, Ok(SymValue::Scalar(self.pool.bin(op, x, y))))],
                    Fork::Both(t, f) => {
                        let q = self.pool.bin(op, x, y);
                        vec![(t, div_by_zero), (f, Ok(SymValue::Scalar(q)))]
                    }
                    Fork::Halt(s, why) => vec![(s, Err(Stop::Unknown(why)))],
                }
            }
            _ => unreachable!("typed"),
        }
    }

    fn block(&mut self, st: State, stmts: &Block) -> Branches<()> {
        let mark = st.env.len();
        let mut frontier = vec![st];
        let mut done = Vec::new();
        for s in stmts {
            let mut next = Vec::new();
            for st in frontier {
                for (st2, r) in self.stmt(st, s) {
                    match r {
                        Ok(()) => next.push(st2),
                        Err(stop) => done.push((st2, Err(stop))),
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        for mut st in frontier {
            st.env.truncate(mark);
            done.push((st, Ok(())));
        }
        done
    }

    fn stmt(&mut self, st: State, s: &Stmt) -> Branches<()> {
        if self.out_of_time() {
            return vec![(st, Err(Stop::Unknown(UnknownReason::TimeBudget)))];
        }
        match s {
            Stmt::Let { name, value, .. } => self
                .expr(st, value)
                .into_iter()
                .map(|(mut s, r)| {
                    let r = r.map(|v| s.env.push((name.clone(), v)));
                    (s, r)
                })
                .collect(),
            Stmt::Assign { name, value, .. } => self
                .expr(st, value)
                .into_iter()
                .map(|(mut s, r)| {
                    let r = r.map(|v| *s.get_mut(name) = v);
                    (s, r)
                })
                .collect(),
            Stmt::IndexAssign { name, index, value, .. } => {
                let mut out = Vec::new();
                for (s1, r1) in self.scalar(st, index) {
                    let iv = match r1 {
                        Ok(iv) => iv,
                        Err(stop) => {
                            out.push((s1, Err(stop)));
                            continue;
                        }
                    };
                    for (s2, r2) in self.scalar(s1, value) {
                        let v = match r2 {
                            Ok(v) => v,
                            Err(stop) => {
                                out.push((s2, Err(stop)));
                                continue;
                            }
                        };
                        let SymValue::Array(items) = s2.get(name) else { unreachable!("typed") };
                        let len = items.len();
                        for (mut s3, j) in self.select_index(s2, iv, len) {
                            let r = j.map(|j| {
                                if let SymValue::Array(items) = s3.get_mut(name) {
                                    items[j] = v;
                                }
                            });
                            out.push((s3, r));
                        }
                    }
                }
                out
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
                ..
            } => {
                let mut out = Vec::new();
                for (s, r) in self.scalar(st, cond) {
                    let c = match r {
                        Ok(c) => c,
                        Err(stop) => {
                            out.push((s, Err(stop)));
                            continue;
                        }
                    };
                    let branch = |ex: &mut Self, s: State, taken: bool| {
                        if taken {
                            ex.block(s, then_block)
                        } else if let Some(b) = else_block {
                            ex.block(s, b)
                        } else {
                            vec![(s, Ok(()))]
                        }
                    };
                    match self.fork(s, c) {
                        Fork::Only(b, s) => out.extend(branch(self, s, b)),
                        Fork::Both(t, f) => {
                            out.extend(branch(self, t, true));
                            out.extend(branch(self, f, false));
                        }
                        Fork::Halt(s, why) => out.push((s, Err(Stop::Unknown(why)))),
                    }
                }
                out
            }
            Stmt::While { cond, body, .. } => self.looping(st, |ex, s| ex.scalar(s, cond), body, None),
            Stmt::For { var, lo, hi, body, .. } => {
                let mut out = Vec::new();
                for (s1, r1) in self.scalar(st, lo) {
                    let lo_v = match r1 {
                        Ok(v) => v,
                        Err(stop) => {
                            out.push((s1, Err(stop)));
                            continue;
                        }
                    };
                    for (mut s2, r2) in self.scalar(s1, hi) {
                        let hi_v = match r2 {
                            Ok(v) => v,
                            Err(stop) => {
                                out.push((s2, Err(stop)));
                                continue;
                            }
                        };
                        // the counter lives one slot above the enclosing scope;
                        // it is reset from the loop state at every iteration
                        s2.env.push((var.clone(), SymValue::Scalar(lo_v)));
                        let var_name = var.as_str();
                        let cond = move |ex: &mut Self, s: State| {
                            let SymValue::Scalar(i) = *s.get(var_name) else { unreachable!() };
                            let c = ex.pool.bin(BinaryOp::Lt, i, hi_v);
                            vec![(s, Ok(c))]
                        };
                        for (mut s3, r3) in self.looping(s2, cond, body, Some(var_name)) {
                            if r3.is_ok() {
                                s3.env.pop();
                            }
                            out.push((s3, r3));
                        }
                    }
                }
                out
            }
            Stmt::Return { value, .. } => self
                .expr(st, value)
                .into_iter()
                .map(|(s, r)| match r {
                    Ok(v) => (s, Err(Stop::Return(v))),
                    Err(stop) => (s, Err(stop)),
                })
                .collect(),
        }
    }

    /// Runs a loop; `counter` names a `for` variable to increment after each body.
    fn looping(
        &mut self,
        st: State,
        cond: impl Fn(&mut Self, State) -> Branches<ExprId>,
        body: &Block,
        counter: Option<&str>,
    ) -> Branches<()> {
        let mut out = Vec::new();
        let mut frontier = vec![(st, 0u32)];
        while let Some((st, iters)) = frontier.pop() {
            for (s, r) in cond(self, st) {
                let c = match r {
                    Ok(c) => c,
                    Err(stop) => {
                        out.push((s, Err(stop)));
                        continue;
                    }
                };
                let mut enter = Vec::new();
                match self.fork(s, c) {
                    Fork::Only(false, s) => out.push((s, Ok(()))),
                    Fork::Only(true, s) => enter.push(s),
                    Fork::Both(t, f) => {
                        out.push((f, Ok(())));
                        enter.push(t);
                    }
                    Fork::Halt(s, why) => out.push((s, Err(Stop::Unknown(why)))),
                }
                for s in enter {
                    if iters >= self.caps.unroll_cap {
                        out.push((s, Err(Stop::Unknown(UnknownReason::UnrollCap))));
                        continue;
                    }
                    for (mut s2, r2) in self.block(s, body) {
                        match r2 {
                            Ok(()) => {
                                if let Some(name) = counter {
                                    let one = self.pool.int(Int::from(1i64));
                                    let SymValue::Scalar(i) = *s2.get(name) else { unreachable!() };
                                    *s2.get_mut(name) = SymValue::Scalar(self.pool.bin(BinaryOp::Add, i, one));
                                }
                                frontier.push((s2, iters + 1));
                            }
                            Err(stop) => out.push((s2, Err(stop))),
                        }
                    }
                }
            }
        }
        out
    }
}
