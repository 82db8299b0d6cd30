//! Hash-consed symbolic expressions over the program inputs.

use std::collections::HashMap;

use crate::int::Int;
use crate::lang::BinaryOp;

/// An input symbol: parameter index and element index (0 for scalars).
/// Symbols order like the canonical input order, so the largest symbol an
/// expression mentions tells the solver when the expression becomes decidable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym {
    pub param: u16,
    pub elem: u16,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprId(u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Int(Int),
    Bool(bool),
    IntVar(Sym),
    BoolVar(Sym),
    Neg(ExprId),
    Not(ExprId),
    /// Any binary operator; `And`/`Or` are strict here because the explorer
    /// forks before building them whenever evaluation order matters.
    Bin(BinaryOp, ExprId, ExprId),
    /// The `rank`-th smallest of `elems`.
    SortedNth { elems: Box<[ExprId]>, rank: u16 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Int(Int),
    Bool(bool),
}

impl Scalar {
    pub fn as_int(&self) -> &Int {
        match self {
            Scalar::Int(v) => v,
            Scalar::Bool(_) => panic!("expected an integer scalar"),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Scalar::Bool(b) => *b,
            Scalar::Int(_) => panic!("expected a boolean scalar"),
        }
    }
}

/// Concrete values for every symbol: `values[param][elem]`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Assignment {
    pub values: Vec<Vec<Int>>,
}

impl Assignment {
    pub fn get(&self, s: Sym) -> &Int {
        &self.values[s.param as usize][s.elem as usize]
    }
}

/// Result of applying `op` to two concrete scalars; `None` on division by zero.
pub fn apply_bin(op: BinaryOp, a: &Scalar, b: &Scalar) -> Option<Scalar> {
    use BinaryOp::*;
    Some(match op {
        And => Scalar::Bool(a.as_bool() && b.as_bool()),
        Or => Scalar::Bool(a.as_bool() || b.as_bool()),
        Eq => Scalar::Bool(a == b),
        Ne => Scalar::Bool(a != b),
        Lt => Scalar::Bool(a.as_int() < b.as_int()),
        Le => Scalar::Bool(a.as_int() <= b.as_int()),
        Gt => Scalar::Bool(a.as_int() > b.as_int()),
        Ge => Scalar::Bool(a.as_int() >= b.as_int()),
        Add => Scalar::Int(a.as_int().add(b.as_int())),
        Sub => Scalar::Int(a.as_int().sub(b.as_int())),
        Mul => Scalar::Int(a.as_int().mul(b.as_int())),
        Div => Scalar::Int(a.as_int().div(b.as_int())?),
        Rem => Scalar::Int(a.as_int().rem(b.as_int())?),
    })
}

/// Arena of expressions shared by every trace set built against it.
/// Children always have smaller ids than their parents.
#[derive(Default, Debug)]
pub struct ExprPool {
    nodes: Vec<Node>,
    max_sym: Vec<Option<Sym>>,
    index: HashMap<Node, ExprId>,
}

impl ExprPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: ExprId) -> &Node {
        &self.nodes[id.index()]
    }

    /// Largest symbol `id` depends on; `None` for constants.
    pub fn max_sym(&self, id: ExprId) -> Option<Sym> {
        self.max_sym[id.index()]
    }

    pub fn const_value(&self, id: ExprId) -> Option<Scalar> {
        match self.node(id) {
            Node::Int(v) => Some(Scalar::Int(v.clone())),
            Node::Bool(b) => Some(Scalar::Bool(*b)),
            _ => None,
        }
    }

    pub fn as_bool_const(&self, id: ExprId) -> Option<bool> {
        match self.node(id) {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn intern(&mut self, node: Node) -> ExprId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let max_sym = match &node {
            Node::Int(_) | Node::Bool(_) => None,
            Node::IntVar(s) | Node::BoolVar(s) => Some(*s),
            Node::Neg(a) | Node::Not(a) => self.max_sym(*a),
            Node::Bin(_, a, b) => self.max_sym(*a).max(self.max_sym(*b)),
            Node::SortedNth { elems, .. } => elems.iter().filter_map(|e| self.max_sym(*e)).max(),
        };
        let id = ExprId(u32::try_from(self.nodes.len()).expect("expression pool overflow"));
        self.nodes.push(node.clone());
        self.max_sym.push(max_sym);
        self.index.insert(node, id);
        id
    }

    pub fn int(&mut self, v: Int) -> ExprId {
        self.intern(Node::Int(v))
    }

    pub fn bool(&mut self, b: bool) -> ExprId {
        self.intern(Node::Bool(b))
    }

    pub fn scalar(&mut self, s: Scalar) -> ExprId {
        match s {
            Scalar::Int(v) => self.int(v),
            Scalar::Bool(b) => self.bool(b),
        }
    }

    pub fn int_var(&mut self, s: Sym) -> ExprId {
        self.intern(Node::IntVar(s))
    }

    pub fn bool_var(&mut self, s: Sym) -> ExprId {
        self.intern(Node::BoolVar(s))
    }

    pub fn neg(&mut self, a: ExprId) -> ExprId {
        match self.node(a).clone() {
            Node::Int(v) => self.int(v.neg()),
            Node::Neg(inner) => inner,
            _ => self.intern(Node::Neg(a)),
        }
    }

    pub fn not(&mut self, a: ExprId) -> ExprId {
        match self.node(a).clone() {
            Node::Bool(b) => self.bool(!b),
            Node::Not(inner) => inner,
            _ => self.intern(Node::Not(a)),
        }
    }

    /// Builds `a op b`, folding constants. Callers rule out constant
    /// division by zero before asking for `/` or `%`.
    pub fn bin(&mut self, op: BinaryOp, a: ExprId, b: ExprId) -> ExprId {
        if let (Some(x), Some(y)) = (self.const_value(a), self.const_value(b)) {
            if let Some(v) = apply_bin(op, &x, &y) {
                return self.scalar(v);
            }
        }
        match op {
            BinaryOp::And => match (self.as_bool_const(a), self.as_bool_const(b)) {
                (Some(false), _) | (_, Some(false)) => return self.bool(false),
                (Some(true), _) => return b,
                (_, Some(true)) => return a,
                _ => {}
            },
            BinaryOp::Or => match (self.as_bool_const(a), self.as_bool_const(b)) {
                (Some(true), _) | (_, Some(true)) => return self.bool(true),
                (Some(false), _) => return b,
                (_, Some(false)) => return a,
                _ => {}
            },
            BinaryOp::Eq | BinaryOp::Le | BinaryOp::Ge if a == b => return self.bool(true),
            BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Gt if a == b => return self.bool(false),
            _ => {}
        }
        self.intern(Node::Bin(op, a, b))
    }

    pub fn sorted_nth(&mut self, elems: &[ExprId], rank: usize) -> ExprId {
        if elems.iter().all(|&e| self.const_value(e).is_some()) {
            let mut vals: Vec<Int> = elems.iter().map(|&e| self.const_value(e).unwrap().as_int().clone()).collect();
            vals.sort();
            return self.int(vals[rank].clone());
        }
        self.intern(Node::SortedNth {
            elems: elems.into(),
            rank: rank as u16,
        })
    }
}

/// Memoizing evaluator. One `begin` per assignment; shared subterms are
/// evaluated once per assignment.
#[derive(Default)]
pub struct Evaluator {
    memo: Vec<(u32, Option<Scalar>)>,
    generation: u32,
    stack: Vec<(ExprId, bool)>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Invalidates all memoized values.
    pub fn begin(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.memo.iter_mut().for_each(|m| m.0 = 0);
            self.generation = 1;
        }
    }

    fn cached(&self, id: ExprId) -> Option<&Option<Scalar>> {
        self.memo
            .get(id.index())
            .and_then(|(g, v)| if *g == self.generation { Some(v) } else { None })
    }

    /// Value of `id` under `asg`; `None` if evaluation divides by zero.
    pub fn eval(&mut self, pool: &ExprPool, asg: &Assignment, id: ExprId) -> Option<Scalar> {
        if self.memo.len() < pool.len() {
            self.memo.resize(pool.len(), (0, None));
        }
        if let Some(v) = self.cached(id) {
            return v.clone();
        }
        // explicit post-order walk; expression DAGs from long loops get deep
        self.stack.clear();
        self.stack.push((id, false));
        while let Some((cur, expanded)) = self.stack.pop() {
            if self.cached(cur).is_some() {
                continue;
            }
            let node = pool.node(cur);
            if !expanded {
                self.stack.push((cur, true));
                match node {
                    Node::Neg(a) | Node::Not(a) => self.stack.push((*a, false)),
                    Node::Bin(_, a, b) => {
                        self.stack.push((*b, false));
                        self.stack.push((*a, false));
                    }
                    Node::SortedNth { elems, .. } => self.stack.extend(elems.iter().map(|e| (*e, false))),
                    _ => {}
                }
                continue;
            }
            let get = |ev: &Self, e: &ExprId| ev.cached(*e).cloned().flatten();
            let value = match node {
                Node::Int(v) => Some(Scalar::Int(v.clone())),
                Node::Bool(b) => Some(Scalar::Bool(*b)),
                Node::IntVar(s) => Some(Scalar::Int(asg.get(*s).clone())),
                Node::BoolVar(s) => Some(Scalar::Bool(!asg.get(*s).is_zero())),
                Node::Neg(a) => get(self, a).map(|v| Scalar::Int(v.as_int().neg())),
                Node::Not(a) => get(self, a).map(|v| Scalar::Bool(!v.as_bool())),
                Node::Bin(op, a, b) => match (get(self, a), get(self, b)) {
                    (Some(x), Some(y)) => apply_bin(*op, &x, &y),
                    _ => None,
                },
                Node::SortedNth { elems, rank } => {
                    let vals: Option<Vec<Int>> = elems.iter().map(|e| get(self, e).map(|v| v.as_int().clone())).collect();
                    vals.map(|mut vs| {
                        vs.sort();
                        Scalar::Int(vs.swap_remove(*rank as usize))
                    })
                }
            };
            self.memo[cur.index()] = (self.generation, value);
        }
        self.cached(id).cloned().flatten()
    }

    /// Truth of a boolean expression; division by zero counts as false.
    pub fn holds(&mut self, pool: &ExprPool, asg: &Assignment, id: ExprId) -> bool {
        matches!(self.eval(pool, asg, id), Some(Scalar::Bool(true)))
    }
}
