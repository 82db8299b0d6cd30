//! Pairwise bounded equivalence: symbolic counterexample search and the
//! exhaustive interpreter-backed oracle.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::domain::InputDomain;
use super::explore::{explore, to_inputs, ExecCaps, SymValue, TraceOutcome};
use super::expr::{Assignment, ExprId, ExprPool};
use super::solver::{Shape, SolveResult, Solver};
use crate::interp::{format_inputs, run, Outcome, Value, DEFAULT_STEP_BUDGET};
use crate::lang::{BinaryOp, Program};
use crate::{Error, Result};

/// Largest domain [`brute_force_equivalence`] agrees to enumerate.
pub const BRUTE_FORCE_CEILING: u128 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivVerdict {
    Equivalent,
    /// Smallest distinguishing input found, in canonical input order.
    NotEquivalent(Vec<Value>),
    Inconclusive(String),
}

impl EquivVerdict {
    /// Stable tag used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            EquivVerdict::Equivalent => "equivalent",
            EquivVerdict::NotEquivalent(_) => "not-equivalent",
            EquivVerdict::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn same_class(&self, other: &EquivVerdict) -> bool {
        self.tag() == other.tag()
    }
}

impl fmt::Display for EquivVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivVerdict::Equivalent => f.write_str("Equivalent"),
            EquivVerdict::NotEquivalent(cx) => write!(f, "NotEquivalent cx={}", format_inputs(cx)),
            EquivVerdict::Inconclusive(why) => write!(f, "Inconclusive({why})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivConfig {
    pub domain: InputDomain,
    pub caps: ExecCaps,
    /// Wall-clock budget for one pair, exploration included.
    pub time_budget: Duration,
    /// Budget used to replay counterexamples through the interpreter.
    pub step_budget: u64,
}

impl Default for EquivConfig {
    fn default() -> Self {
        EquivConfig {
            domain: InputDomain::default(),
            caps: ExecCaps::default(),
            time_budget: Duration::from_secs(10),
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

/// Whether two concrete outcomes count as different behaviour.
/// Errors of any kind are alike; a budget overrun only differs from a
/// side that did not overrun.
pub fn outcomes_distinguish(a: &Outcome, b: &Outcome) -> bool {
    match (a, b) {
        (Outcome::Return(x), Outcome::Return(y)) => x != y,
        (Outcome::Error(_), Outcome::Error(_)) => false,
        (Outcome::BudgetExceeded, Outcome::BudgetExceeded) => false,
        _ => true,
    }
}

fn require_same_signature(p: &Program, q: &Program) -> Result<()> {
    if p.signature() != q.signature() {
        return Err(Error::Usage(format!(
            "signature mismatch: `{}` and `{}` cannot be compared",
            p.name, q.name
        )));
    }
    Ok(())
}

/// Boolean expression true where two return values differ; `None` if they
/// are identical expressions.
fn difference(pool: &mut ExprPool, a: &SymValue, b: &SymValue) -> Option<ExprId> {
    if a == b {
        return None;
    }
    Some(match (a, b) {
        (SymValue::Scalar(x), SymValue::Scalar(y)) => pool.bin(BinaryOp::Ne, *x, *y),
        (SymValue::Array(xs), SymValue::Array(ys)) if xs.len() == ys.len() => {
            let mut acc = pool.bool(false);
            for (&x, &y) in xs.iter().zip(ys) {
                let ne = pool.bin(BinaryOp::Ne, x, y);
                acc = pool.bin(BinaryOp::Or, acc, ne);
            }
            acc
        }
        _ => pool.bool(true),
    })
}

/// Bounded equivalence of `p` and `q` over `cfg.domain`.
///
/// Traces of both programs are paired by array shape; for every pair with
/// possibly different outcomes the solver looks for an input satisfying
/// both path constraints and the difference, keeping only candidates
/// smaller than the best found so far. The winner is replayed through the
/// interpreter before it is reported.
pub fn check_equivalence(p: &Program, q: &Program, cfg: &EquivConfig) -> Result<EquivVerdict> {
    require_same_signature(p, q)?;
    let deadline = Instant::now() + cfg.time_budget;
    let mut pool = ExprPool::new();
    let tp = explore(&mut pool, p, cfg.domain, cfg.caps, Some(deadline));
    let tq = explore(&mut pool, q, cfg.domain, cfg.caps, Some(deadline));

    let mut unknown: Option<String> = None;
    let mut best: Option<(Vec<u64>, Shape, Assignment)> = None;
    for t1 in &tp.traces {
        for t2 in &tq.traces {
            if t1.shape != t2.shape {
                continue;
            }
            let diff = match (&t1.outcome, &t2.outcome) {
                (TraceOutcome::Unknown(why), _) | (_, TraceOutcome::Unknown(why)) => {
                    unknown.get_or_insert_with(|| why.to_string());
                    continue;
                }
                (TraceOutcome::Error(_), TraceOutcome::Error(_)) => continue,
                (TraceOutcome::Return(a), TraceOutcome::Return(b)) => match difference(&mut pool, a, b) {
                    Some(d) => d,
                    None => continue,
                },
                _ => pool.bool(true),
            };
            if pool.as_bool_const(diff) == Some(false) {
                continue;
            }
            let mut constraints = Vec::with_capacity(t1.constraint.len() + t2.constraint.len() + 1);
            constraints.extend_from_slice(&t1.constraint);
            constraints.extend_from_slice(&t2.constraint);
            constraints.push(diff);
            let mut solver = Solver::new(&pool, cfg.domain, Some(deadline));
            match solver.solve(&t1.shape, &constraints, best.as_ref().map(|b| b.0.as_slice())) {
                SolveResult::Sat(asg) => best = Some((t1.shape.key(&asg), (*t1.shape).clone(), asg)),
                SolveResult::Unsat => {}
                SolveResult::Timeout => return Ok(EquivVerdict::Inconclusive("time budget".into())),
            }
        }
    }

    match (best, unknown) {
        (Some((_, shape, asg)), _) => {
            let cx = to_inputs(&shape, &asg);
            let (a, b) = (run(p, &cx, cfg.step_budget), run(q, &cx, cfg.step_budget));
            if outcomes_distinguish(&a, &b) {
                Ok(EquivVerdict::NotEquivalent(cx))
            } else {
                Ok(EquivVerdict::Inconclusive(format!(
                    "counterexample {} not confirmed by the interpreter",
                    format_inputs(&cx)
                )))
            }
        }
        (None, Some(why)) => Ok(EquivVerdict::Inconclusive(why)),
        (None, None) => Ok(EquivVerdict::Equivalent),
    }
}

/// Exhaustive comparison over every input of `dom`, in canonical order, so
/// the first disagreement is the smallest one.
pub fn brute_force_equivalence(p: &Program, q: &Program, dom: InputDomain, step_budget: u64) -> Result<EquivVerdict> {
    require_same_signature(p, q)?;
    let types = p.param_types();
    let size = dom.size(&types);
    if size > BRUTE_FORCE_CEILING {
        return Err(Error::Usage(format!(
            "domain has {size} inputs, above the enumeration ceiling of {BRUTE_FORCE_CEILING}"
        )));
    }
    let per_param: Vec<Vec<Value>> = types.iter().map(|&t| dom.param_values(t)).collect();
    if per_param.iter().any(|v| v.is_empty()) {
        return Ok(EquivVerdict::Equivalent);
    }
    // odometer over per-parameter value lists, last parameter fastest
    let mut digits = vec![0usize; types.len()];
    loop {
        let inputs: Vec<Value> = digits.iter().zip(&per_param).map(|(&d, vs)| vs[d].clone()).collect();
        if outcomes_distinguish(&run(p, &inputs, step_budget), &run(q, &inputs, step_budget)) {
            return Ok(EquivVerdict::NotEquivalent(inputs));
        }
        let mut k = digits.len();
        loop {
            if k == 0 {
                return Ok(EquivVerdict::Equivalent);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < per_param[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}
