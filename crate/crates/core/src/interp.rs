//! Concrete big-step evaluator with a deterministic step budget.
//!
//! One step is charged per statement executed and per expression node
//! evaluated. Exceeding the budget yields [`Outcome::BudgetExceeded`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::int::Int;
use crate::lang::{BinaryOp, Block, Expr, Program, SnipType, Stmt, UnaryOp};
use crate::Error;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(Int),
    Bool(bool),
    IntArray(Vec<Int>),
}

impl Value {
    pub fn ty(&self) -> SnipType {
        match self {
            Value::Int(_) => SnipType::Int,
            Value::Bool(_) => SnipType::Bool,
            Value::IntArray(_) => SnipType::IntArray,
        }
    }

    pub fn int(v: i64) -> Value {
        Value::Int(Int::from(v))
    }

    pub fn array(vs: &[i64]) -> Value {
        Value::IntArray(vs.iter().map(|&v| Int::from(v)).collect())
    }

    /// Decodes a JSON value against the expected type: ints as numbers,
    /// bools as `true`/`false`, arrays as arrays of numbers.
    pub fn from_json(v: &serde_json::Value, ty: SnipType) -> Result<Value, String> {
        let int = |v: &serde_json::Value| -> Result<Int, String> {
            match v {
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(Int::from)
                    .or_else(|| if n.is_u64() { Int::parse_decimal(&n.to_string()) } else { None })
                    .ok_or_else(|| format!("expected an integer, found {n}")),
                other => Err(format!("expected an integer, found {other}")),
            }
        };
        match ty {
            SnipType::Int => int(v).map(Value::Int),
            SnipType::Bool => v.as_bool().map(Value::Bool).ok_or_else(|| format!("expected a bool, found {v}")),
            SnipType::IntArray => match v {
                serde_json::Value::Array(items) => items.iter().map(int).collect::<Result<_, _>>().map(Value::IntArray),
                other => Err(format!("expected an array of integers, found {other}")),
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let int = |v: &Int| match v.as_i64() {
            Some(x) => serde_json::Value::from(x),
            // out of JSON's integer range; keep the exact digits as a string
            None => serde_json::Value::String(v.to_string()),
        };
        match self {
            Value::Int(v) => int(v),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::IntArray(vs) => serde_json::Value::Array(vs.iter().map(int).collect()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::IntArray(vs) => {
                f.write_str("[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Formats an input vector as `[v1,v2,...]`.
pub fn format_inputs(inputs: &[Value]) -> String {
    let parts: Vec<String> = inputs.iter().map(Value::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// Decodes a JSON array of arguments against parameter types.
pub fn inputs_from_json(v: &serde_json::Value, types: &[SnipType]) -> Result<Vec<Value>, String> {
    let items = v.as_array().ok_or_else(|| format!("expected an array of arguments, found {v}"))?;
    if items.len() != types.len() {
        return Err(format!("expected {} argument(s), found {}", types.len(), items.len()));
    }
    items.iter().zip(types).map(|(v, &t)| Value::from_json(v, t)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    IndexOutOfBounds,
    DivisionByZero,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Return(Value),
    Error(ErrorKind),
    BudgetExceeded,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Return(v) => write!(f, "{v}"),
            Outcome::Error(k) => write!(f, "error: {k}"),
            Outcome::BudgetExceeded => f.write_str("BudgetExceeded"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub inputs: Vec<Value>,
    pub expected: Value,
}

enum Halt {
    Return(Value),
    Error(ErrorKind),
    Budget,
}

struct Machine {
    env: Vec<(String, Value)>,
    steps: u64,
    budget: u64,
}

type Exec<T> = Result<T, Halt>;

impl Machine {
    fn tick(&mut self) -> Exec<()> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(Halt::Budget)
        } else {
            Ok(())
        }
    }

    fn slot(&mut self, name: &str) -> &mut Value {
        // validated programs only reference declared names
        &mut self.env.iter_mut().rev().find(|(n, _)| n == name).expect("declared variable").1
    }

    fn block(&mut self, b: &Block) -> Exec<()> {
        let mark = self.env.len();
        let r = b.iter().try_for_each(|s| self.stmt(s));
        self.env.truncate(mark);
        r
    }

    fn stmt(&mut self, s: &Stmt) -> Exec<()> {
        self.tick()?;
        match s {
            Stmt::Let { name, value, .. } => {
                let v = self.expr(value)?;
                self.env.push((name.clone(), v));
            }
            Stmt::Assign { name, value, .. } => {
                let v = self.expr(value)?;
                *self.slot(name) = v;
            }
            Stmt::IndexAssign { name, index, value, .. } => {
                let i = self.int(index)?;
                let v = self.int(value)?;
                let Value::IntArray(items) = self.slot(name) else { unreachable!("typed") };
                let at = i.as_index(items.len()).ok_or(Halt::Error(ErrorKind::IndexOutOfBounds))?;
                items[at] = v;
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
                ..
            } => {
                if self.bool(cond)? {
                    self.block(then_block)?;
                } else if let Some(b) = else_block {
                    self.block(b)?;
                }
            }
            Stmt::While { cond, body, .. } => {
                while self.bool(cond)? {
                    self.block(body)?;
                }
            }
            Stmt::For { var, lo, hi, body, .. } => {
                let mut i = self.int(lo)?;
                let hi = self.int(hi)?;
                let one = Int::from(1i64);
                while i < hi {
                    self.tick()?;
                    self.env.push((var.clone(), Value::Int(i.clone())));
                    let r = self.block(body);
                    self.env.pop();
                    r?;
                    i = i.add(&one);
                }
            }
            Stmt::Return { value, .. } => {
                let v = self.expr(value)?;
                return Err(Halt::Return(v));
            }
        }
        Ok(())
    }

    fn int(&mut self, e: &Expr) -> Exec<Int> {
        match self.expr(e)? {
            Value::Int(v) => Ok(v),
            _ => unreachable!("typed"),
        }
    }

    fn bool(&mut self, e: &Expr) -> Exec<bool> {
        match self.expr(e)? {
            Value::Bool(b) => Ok(b),
            _ => unreachable!("typed"),
        }
    }

    fn array(&mut self, e: &Expr) -> Exec<Vec<Int>> {
        match self.expr(e)? {
            Value::IntArray(v) => Ok(v),
            _ => unreachable!("typed"),
        }
    }

    fn expr(&mut self, e: &Expr) -> Exec<Value> {
        self.tick()?;
        Ok(match e {
            Expr::Int(v, _) => Value::Int(v.clone()),
            Expr::Bool(b, _) => Value::Bool(*b),
            Expr::Var(name, _) => self.slot(name).clone(),
            Expr::Index { name, index, .. } => {
                let i = self.int(index)?;
                let Value::IntArray(items) = self.slot(name) else { unreachable!("typed") };
                let at = i.as_index(items.len()).ok_or(Halt::Error(ErrorKind::IndexOutOfBounds))?;
                Value::Int(items[at].clone())
            }
            Expr::Len(a, _) => Value::Int(Int::from(self.array(a)?.len())),
            Expr::Sorted(a, _) => {
                let mut items = self.array(a)?;
                items.sort();
                Value::IntArray(items)
            }
            Expr::Unary { op, operand, .. } => match op {
                UnaryOp::Neg => Value::Int(self.int(operand)?.neg()),
                UnaryOp::Not => Value::Bool(!self.bool(operand)?),
            },
            Expr::Binary { op, lhs, rhs, .. } => match op {
                BinaryOp::And => Value::Bool(self.bool(lhs)? && self.bool(rhs)?),
                BinaryOp::Or => Value::Bool(self.bool(lhs)? || self.bool(rhs)?),
                BinaryOp::Eq => Value::Bool(self.expr(lhs)? == self.expr(rhs)?),
                BinaryOp::Ne => Value::Bool(self.expr(lhs)? != self.expr(rhs)?),
                _ => {
                    let (a, b) = (self.int(lhs)?, self.int(rhs)?);
                    match op {
                        BinaryOp::Lt => Value::Bool(a < b),
                        BinaryOp::Le => Value::Bool(a <= b),
                        BinaryOp::Gt => Value::Bool(a > b),
                        BinaryOp::Ge => Value::Bool(a >= b),
                        BinaryOp::Add => Value::Int(a.add(&b)),
                        BinaryOp::Sub => Value::Int(a.sub(&b)),
                        BinaryOp::Mul => Value::Int(a.mul(&b)),
                        BinaryOp::Div => Value::Int(a.div(&b).ok_or(Halt::Error(ErrorKind::DivisionByZero))?),
                        BinaryOp::Rem => Value::Int(a.rem(&b).ok_or(Halt::Error(ErrorKind::DivisionByZero))?),
                        BinaryOp::And | BinaryOp::Or | BinaryOp::Eq | BinaryOp::Ne => unreachable!(),
                    }
                }
            },
        })
    }
}

fn check_inputs(p: &Program, inputs: &[Value]) -> Result<(), Error> {
    if inputs.len() != p.params.len() {
        return Err(Error::Usage(format!(
            "`{}` takes {} argument(s), {} given",
            p.name,
            p.params.len(),
            inputs.len()
        )));
    }
    for (param, v) in p.params.iter().zip(inputs) {
        if param.ty != v.ty() {
            return Err(Error::Usage(format!("argument `{}` must be {}, got {}", param.name, param.ty, v.ty())));
        }
    }
    Ok(())
}

/// Runs `p` on `inputs`. Fails only when the inputs do not match the signature.
pub fn evaluate(p: &Program, inputs: &[Value], step_budget: u64) -> Result<Outcome, Error> {
    check_inputs(p, inputs)?;
    Ok(run(p, inputs, step_budget))
}

/// Like [`evaluate`] without the signature check; callers guarantee arity and types.
pub(crate) fn run(p: &Program, inputs: &[Value], step_budget: u64) -> Outcome {
    let mut m = Machine {
        env: p.params.iter().map(|q| q.name.clone()).zip(inputs.iter().cloned()).collect(),
        steps: 0,
        budget: step_budget,
    };
    match m.block(&p.body) {
        Err(Halt::Return(v)) => Outcome::Return(v),
        Err(Halt::Error(k)) => Outcome::Error(k),
        Err(Halt::Budget) => Outcome::BudgetExceeded,
        // validation guarantees every path returns
        Ok(()) => unreachable!("validated program fell off the end"),
    }
}

/// Fraction of tests whose outcome is `Return(expected)`.
pub fn correctness_score(p: &Program, tests: &[TestCase], step_budget: u64) -> Result<f64, Error> {
    if tests.is_empty() {
        return Err(Error::Usage("correctness score needs at least one test case".into()));
    }
    let mut passed = 0usize;
    for t in tests {
        check_inputs(p, &t.inputs)?;
        if run(p, &t.inputs, step_budget) == Outcome::Return(t.expected.clone()) {
            passed += 1;
        }
    }
    Ok(passed as f64 / tests.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_source;

    fn prog(src: &str) -> Program {
        parse_source(src).program().cloned().unwrap_or_else(|| panic!("{:?}", parse_source(src)))
    }

    #[test]
    fn doubling() {
        let p = prog("fn f(x: int) -> int { return x + x; }");
        assert_eq!(evaluate(&p, &[Value::int(3)], 100).unwrap(), Outcome::Return(Value::int(6)));
    }

    #[test]
    fn index_out_of_bounds() {
        let p = prog("fn f(a: [int]) -> int { return a[5]; }");
        assert_eq!(
            evaluate(&p, &[Value::array(&[1, 2])], 100).unwrap(),
            Outcome::Error(ErrorKind::IndexOutOfBounds)
        );
        let p = prog("fn f(a: [int]) -> int { return a[0 - 1]; }");
        assert_eq!(
            evaluate(&p, &[Value::array(&[1, 2])], 100).unwrap(),
            Outcome::Error(ErrorKind::IndexOutOfBounds)
        );
    }

    #[test]
    fn divergence_is_bounded() {
        let p = prog("fn f(x: int) -> int { while true {} return 0; }");
        assert_eq!(evaluate(&p, &[Value::int(0)], 1_000_000).unwrap(), Outcome::BudgetExceeded);
    }

    #[test]
    fn division_by_zero_and_truncation() {
        let p = prog("fn f(x: int, y: int) -> int { return x / y * 100 + x % y; }");
        let run = |x, y| evaluate(&p, &[Value::int(x), Value::int(y)], 100).unwrap();
        assert_eq!(run(-7, 2), Outcome::Return(Value::int(-301)));
        assert_eq!(run(7, -2), Outcome::Return(Value::int(-299)));
        assert_eq!(run(1, 0), Outcome::Error(ErrorKind::DivisionByZero));
    }

    #[test]
    fn short_circuit_guards_index() {
        let p = prog("fn f(a: [int], i: int) -> bool { return i < len(a) && a[i] > 0 || false; }");
        assert_eq!(
            evaluate(&p, &[Value::array(&[]), Value::int(3)], 100).unwrap(),
            Outcome::Return(Value::Bool(false))
        );
    }

    #[test]
    fn arrays_are_values() {
        let p = prog("fn f(a: [int]) -> int { let b = a; b[0] = 9; let s = sorted(b); return a[0] * 100 + s[len(s) - 1]; }");
        assert_eq!(
            evaluate(&p, &[Value::array(&[1, 2])], 100).unwrap(),
            Outcome::Return(Value::int(109))
        );
    }

    #[test]
    fn for_range_is_half_open_and_fixed_on_entry() {
        let p = prog("fn f(n: int) -> int { let s = 0; let m = n; for i in 0..m { m = 0; s = s + i; } return s; }");
        assert_eq!(evaluate(&p, &[Value::int(4)], 1000).unwrap(), Outcome::Return(Value::int(6)));
        assert_eq!(evaluate(&p, &[Value::int(-3)], 1000).unwrap(), Outcome::Return(Value::int(0)));
    }

    #[test]
    fn signature_mismatch_is_a_usage_error() {
        let p = prog("fn f(x: int) -> int { return x; }");
        assert!(evaluate(&p, &[], 10).is_err());
        assert!(evaluate(&p, &[Value::Bool(true)], 10).is_err());
    }

    #[test]
    fn correctness_ratio() {
        let p = prog("fn f(x: int) -> int { if x == 9 { return 0; } return x * 2; }");
        let tests: Vec<TestCase> = (0..10)
            .map(|x| TestCase {
                inputs: vec![Value::int(x)],
                expected: Value::int(2 * x),
            })
            .collect();
        assert_eq!(correctness_score(&p, &tests, 1000).unwrap(), 0.9);
        let bad = prog("fn f(x: int) -> int { return x / 0; }");
        assert_eq!(correctness_score(&bad, &tests, 1000).unwrap(), 0.0);
        assert!(correctness_score(&p, &[], 1000).is_err());
    }
}
