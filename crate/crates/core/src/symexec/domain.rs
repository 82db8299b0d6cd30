//! Bounded input domains and the canonical input ordering.
//!
//! Inputs are ordered parameter by parameter, first parameter most
//! significant. Integers are ordered by magnitude with the positive value
//! first (`0, 1, -1, 2, -2, ...`), booleans `false < true`, and arrays by
//! length and then element-wise. Counterexamples are always reported as the
//! smallest distinguishing input in this order.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::int::Int;
use crate::interp::Value;
use crate::lang::SnipType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputDomain {
    /// Scalar integers range over `[-int_bound, int_bound]`.
    pub int_bound: u32,
    /// Arrays have length `0..=max_array_len`.
    pub max_array_len: u32,
    /// Array elements range over `[-array_elem_bound, array_elem_bound]`.
    pub array_elem_bound: u32,
}

impl Default for InputDomain {
    fn default() -> Self {
        InputDomain {
            int_bound: 8,
            max_array_len: 4,
            array_elem_bound: 4,
        }
    }
}

/// Position of `v` in the magnitude-first integer order.
pub fn int_rank(v: i64) -> u64 {
    if v > 0 {
        2 * v as u64 - 1
    } else {
        2 * v.unsigned_abs()
    }
}

/// Values of `[-bound, bound]` in canonical order.
pub fn ordered_values(bound: u32) -> Vec<i64> {
    let b = bound as i64;
    let mut out = Vec::with_capacity(2 * bound as usize + 1);
    out.push(0);
    for v in 1..=b {
        out.push(v);
        out.push(-v);
    }
    out
}

/// Sort key realizing the canonical order. Values outside `i64` fall back to
/// a key past every in-range rank.
pub fn input_key(inputs: &[Value]) -> Vec<u64> {
    let rank = |v: &Int| v.as_i64().map(int_rank).unwrap_or(u64::MAX);
    let mut key = Vec::new();
    for v in inputs {
        match v {
            Value::Int(i) => key.push(rank(i)),
            Value::Bool(b) => key.push(*b as u64),
            Value::IntArray(items) => {
                key.push(items.len() as u64);
                key.extend(items.iter().map(rank));
            }
        }
    }
    key
}

pub fn compare_inputs(a: &[Value], b: &[Value]) -> Ordering {
    input_key(a).cmp(&input_key(b))
}

impl InputDomain {
    pub fn contains(&self, inputs: &[Value]) -> bool {
        let within = |v: &Int, bound: u32| v.as_i64().is_some_and(|x| x.unsigned_abs() <= bound as u64);
        inputs.iter().all(|v| match v {
            Value::Int(i) => within(i, self.int_bound),
            Value::Bool(_) => true,
            Value::IntArray(items) => {
                items.len() <= self.max_array_len as usize && items.iter().all(|e| within(e, self.array_elem_bound))
            }
        })
    }

    fn param_size(&self, ty: SnipType) -> u128 {
        match ty {
            SnipType::Int => 2 * self.int_bound as u128 + 1,
            SnipType::Bool => 2,
            SnipType::IntArray => {
                let base = 2 * self.array_elem_bound as u128 + 1;
                let mut total = 0u128;
                let mut pow = 1u128;
                for _ in 0..=self.max_array_len {
                    total = total.saturating_add(pow);
                    pow = pow.saturating_mul(base);
                }
                total
            }
        }
    }

    /// Number of concrete inputs for a signature (saturating).
    pub fn size(&self, params: &[SnipType]) -> u128 {
        params.iter().fold(1u128, |acc, &t| acc.saturating_mul(self.param_size(t)))
    }

    pub(crate) fn param_values(&self, ty: SnipType) -> Vec<Value> {
        match ty {
            SnipType::Int => ordered_values(self.int_bound).into_iter().map(Value::int).collect(),
            SnipType::Bool => vec![Value::Bool(false), Value::Bool(true)],
            SnipType::IntArray => {
                let elems = ordered_values(self.array_elem_bound);
                let mut out = Vec::new();
                for len in 0..=self.max_array_len {
                    let count = elems.len().pow(len);
                    for mut idx in 0..count {
                        // base-|elems| digits, last element least significant
                        let mut items = vec![Int::ZERO; len as usize];
                        for slot in items.iter_mut().rev() {
                            *slot = Int::from(elems[idx % elems.len()]);
                            idx /= elems.len();
                        }
                        out.push(Value::IntArray(items));
                    }
                }
                out
            }
        }
    }

    /// Every input of the domain, in canonical order. Callers bound the size first.
    pub fn enumerate(&self, params: &[SnipType]) -> Vec<Vec<Value>> {
        let per_param: Vec<Vec<Value>> = params.iter().map(|&t| self.param_values(t)).collect();
        let mut out = vec![Vec::new()];
        for values in &per_param {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for prefix in &out {
                for v in values {
                    let mut row = prefix.clone();
                    row.push(v.clone());
                    next.push(row);
                }
            }
            out = next;
        }
        out
    }
}
