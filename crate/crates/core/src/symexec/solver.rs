//! Constraint-guided enumeration over a bounded input domain.
//!
//! Symbols are assigned one at a time in canonical input order, trying
//! values in canonical value order. Each constraint is checked as soon as
//! its largest symbol is assigned, so the first model found is the
//! smallest satisfying input.

use std::time::Instant;

use super::domain::{int_rank, ordered_values, InputDomain};
use super::expr::{Assignment, Evaluator, ExprId, ExprPool, Sym};
use crate::int::Int;
use crate::lang::SnipType;

/// Parameter types plus the array lengths fixed on one path.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub types: Vec<SnipType>,
    /// Length per parameter; only meaningful for array parameters.
    pub lens: Vec<usize>,
}

impl Shape {
    pub fn symbols(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        for (p, ty) in self.types.iter().enumerate() {
            let n = match ty {
                SnipType::IntArray => self.lens[p],
                _ => 1,
            };
            out.extend((0..n).map(|e| Sym {
                param: p as u16,
                elem: e as u16,
            }));
        }
        out
    }

    /// The all-zero (smallest) assignment of this shape.
    pub fn zero_assignment(&self) -> Assignment {
        Assignment {
            values: self
                .types
                .iter()
                .enumerate()
                .map(|(p, ty)| match ty {
                    SnipType::IntArray => vec![Int::ZERO; self.lens[p]],
                    _ => vec![Int::ZERO],
                })
                .collect(),
        }
    }

    /// Canonical sort key of `asg` (see [`super::domain::input_key`]).
    pub fn key(&self, asg: &Assignment) -> Vec<u64> {
        let rank = |v: &Int| v.as_i64().map(int_rank).unwrap_or(u64::MAX);
        let mut key = Vec::new();
        for (p, ty) in self.types.iter().enumerate() {
            match ty {
                SnipType::Int => key.push(rank(&asg.values[p][0])),
                SnipType::Bool => key.push(asg.values[p][0].as_i64().unwrap_or(0) as u64),
                SnipType::IntArray => {
                    key.push(self.lens[p] as u64);
                    key.extend(asg.values[p].iter().map(rank));
                }
            }
        }
        key
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
    Timeout,
}

enum Slot {
    Fixed(u64),
    Var { sym: Sym, values: Vec<i64>, is_bool: bool },
}

pub struct Solver<'a> {
    pub pool: &'a ExprPool,
    pub domain: InputDomain,
    pub deadline: Option<Instant>,
    pub eval: Evaluator,
    pub nodes: u64,
}

struct Search<'s> {
    slots: Vec<Slot>,
    /// constraints to check once slot `i` is assigned
    checks: Vec<Vec<ExprId>>,
    bound: Option<&'s [u64]>,
    asg: Assignment,
    timed_out: bool,
}

impl<'a> Solver<'a> {
    pub fn new(pool: &'a ExprPool, domain: InputDomain, deadline: Option<Instant>) -> Self {
        Solver {
            pool,
            domain,
            deadline,
            eval: Evaluator::new(),
            nodes: 0,
        }
    }

    /// Smallest assignment of `shape` satisfying every constraint, restricted
    /// to assignments whose key is strictly below `bound` when given.
    pub fn solve(&mut self, shape: &Shape, constraints: &[ExprId], bound: Option<&[u64]>) -> SolveResult {
        let mut slots = Vec::new();
        let mut slot_of = std::collections::HashMap::new();
        for (p, ty) in shape.types.iter().enumerate() {
            let sym = |e: usize| Sym {
                param: p as u16,
                elem: e as u16,
            };
            match ty {
                SnipType::Int => {
                    slot_of.insert(sym(0), slots.len());
                    slots.push(Slot::Var {
                        sym: sym(0),
                        values: ordered_values(self.domain.int_bound),
                        is_bool: false,
                    });
                }
                SnipType::Bool => {
                    slot_of.insert(sym(0), slots.len());
                    slots.push(Slot::Var {
                        sym: sym(0),
                        values: vec![0, 1],
                        is_bool: true,
                    });
                }
                SnipType::IntArray => {
                    slots.push(Slot::Fixed(shape.lens[p] as u64));
                    for e in 0..shape.lens[p] {
                        slot_of.insert(sym(e), slots.len());
                        slots.push(Slot::Var {
                            sym: sym(e),
                            values: ordered_values(self.domain.array_elem_bound),
                            is_bool: false,
                        });
                    }
                }
            }
        }

        let mut checks = vec![Vec::new(); slots.len()];
        let mut asg = shape.zero_assignment();
        for &c in constraints {
            match self.pool.max_sym(c) {
                None => {
                    self.eval.begin();
                    if !self.eval.holds(self.pool, &asg, c) {
                        return SolveResult::Unsat;
                    }
                }
                Some(s) => match slot_of.get(&s) {
                    Some(&i) => checks[i].push(c),
                    // mentions an element this shape does not have
                    None => return SolveResult::Unsat,
                },
            }
        }
        if slots.is_empty() {
            return match bound {
                Some([]) => SolveResult::Unsat,
                _ => SolveResult::Sat(asg),
            };
        }

        let mut search = Search {
            slots,
            checks,
            bound,
            asg: std::mem::take(&mut asg),
            timed_out: false,
        };
        let found = self.dfs(&mut search, 0, bound.is_some());
        if search.timed_out {
            SolveResult::Timeout
        } else if found {
            SolveResult::Sat(search.asg)
        } else {
            SolveResult::Unsat
        }
    }

    /// `tight` is true while the assigned prefix equals the bound's prefix.
    fn dfs(&mut self, s: &mut Search<'_>, slot: usize, tight: bool) -> bool {
        if slot == s.slots.len() {
            // equal to the bound is not strictly below it
            return !tight;
        }
        let bound_at = |s: &Search<'_>| s.bound.and_then(|b| b.get(slot).copied());
        match &s.slots[slot] {
            Slot::Fixed(v) => {
                let v = *v;
                let mut next_tight = false;
                if tight {
                    match bound_at(s) {
                        Some(b) if v < b => {}
                        Some(b) if v == b => next_tight = true,
                        // above the bound, or the bound is a proper prefix
                        _ => return false,
                    }
                }
                self.dfs(s, slot + 1, next_tight)
            }
            Slot::Var { sym, values, is_bool } => {
                let (sym, is_bool) = (*sym, *is_bool);
                let values = values.clone();
                for v in values {
                    self.nodes += 1;
                    if self.nodes.is_multiple_of(1024) {
                        if let Some(d) = self.deadline {
                            if Instant::now() >= d {
                                s.timed_out = true;
                                return false;
                            }
                        }
                    }
                    let rank = if is_bool { v as u64 } else { int_rank(v) };
                    let mut next_tight = false;
                    if tight {
                        match bound_at(s) {
                            Some(b) if rank < b => {}
                            Some(b) if rank == b => next_tight = true,
                            _ => return false,
                        }
                    }
                    s.asg.values[sym.param as usize][sym.elem as usize] = Int::from(v);
                    self.eval.begin();
                    let ok = s.checks[slot].iter().all(|&c| self.eval.holds(self.pool, &s.asg, c));
                    if ok && self.dfs(s, slot + 1, next_tight) {
                        return true;
                    }
                    if s.timed_out {
                        return false;
                    }
                }
                s.asg.values[sym.param as usize][sym.elem as usize] = Int::ZERO;
                false
            }
        }
    }
}
