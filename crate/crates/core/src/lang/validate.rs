//! Static checks: declare-before-use, no shadowing, typing, and that every
//! path through the body ends in a `return`.

use super::ast::*;
use super::SyntaxError;

pub fn validate(p: &Program) -> Result<(), SyntaxError> {
    let mut cx = Checker {
        scopes: vec![Vec::new()],
        ret: p.return_type,
    };
    for param in &p.params {
        cx.declare(&param.name, param.ty, false, param.span)?;
    }
    cx.block_stmts(&p.body)?;
    if !always_returns(&p.body) {
        return Err(SyntaxError {
            span: p.span,
            message: format!("missing return on some path through `{}`", p.name),
        });
    }
    Ok(())
}

/// True when every path through `block` ends in a `return`.
/// Loops are never assumed to run, so they do not count.
pub fn always_returns(block: &[Stmt]) -> bool {
    block.iter().any(|s| match s {
        Stmt::Return { .. } => true,
        Stmt::If {
            then_block,
            else_block: Some(else_block),
            ..
        } => always_returns(then_block) && always_returns(else_block),
        _ => false,
    })
}

struct Binding {
    name: String,
    ty: SnipType,
    loop_var: bool,
}

struct Checker {
    scopes: Vec<Vec<Binding>>,
    ret: SnipType,
}

fn err<T>(span: Span, message: String) -> Result<T, SyntaxError> {
    Err(SyntaxError { span, message })
}

impl Checker {
    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.scopes.iter().rev().flat_map(|s| s.iter()).find(|b| b.name == name)
    }

    fn declare(&mut self, name: &str, ty: SnipType, loop_var: bool, span: Span) -> Result<(), SyntaxError> {
        if self.lookup(name).is_some() {
            return err(span, format!("`{name}` is already declared in an enclosing scope"));
        }
        self.scopes.last_mut().expect("scope").push(Binding {
            name: name.to_string(),
            ty,
            loop_var,
        });
        Ok(())
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, SyntaxError>) -> Result<T, SyntaxError> {
        self.scopes.push(Vec::new());
        let r = f(self);
        self.scopes.pop();
        r
    }

    fn block(&mut self, b: &[Stmt]) -> Result<(), SyntaxError> {
        self.scoped(|cx| cx.block_stmts(b))
    }

    fn block_stmts(&mut self, b: &[Stmt]) -> Result<(), SyntaxError> {
        b.iter().try_for_each(|s| self.stmt(s))
    }

    fn expect_type(&self, e: &Expr, want: SnipType, what: &str) -> Result<(), SyntaxError> {
        let got = self.expr(e)?;
        if got != want {
            return err(e.span(), format!("{what} must be {want}, found {got}"));
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), SyntaxError> {
        match s {
            Stmt::Let { name, value, span } => {
                let ty = self.expr(value)?;
                self.declare(name, ty, false, *span)
            }
            Stmt::Assign { name, value, span } => {
                let (ty, loop_var) = match self.lookup(name) {
                    Some(b) => (b.ty, b.loop_var),
                    None => return err(*span, format!("undeclared identifier `{name}`")),
                };
                if loop_var {
                    return err(*span, format!("cannot assign to loop variable `{name}`"));
                }
                self.expect_type(value, ty, &format!("value assigned to `{name}`"))
            }
            Stmt::IndexAssign { name, index, value, span } => {
                match self.lookup(name) {
                    Some(b) if b.ty == SnipType::IntArray => {}
                    Some(b) => return err(*span, format!("`{name}` has type {} and cannot be indexed", b.ty)),
                    None => return err(*span, format!("undeclared identifier `{name}`")),
                }
                self.expect_type(index, SnipType::Int, "array index")?;
                self.expect_type(value, SnipType::Int, "array element")
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
                ..
            } => {
                self.expect_type(cond, SnipType::Bool, "`if` condition")?;
                self.block(then_block)?;
                if let Some(b) = else_block {
                    self.block(b)?;
                }
                Ok(())
            }
            Stmt::While { cond, body, .. } => {
                self.expect_type(cond, SnipType::Bool, "`while` condition")?;
                self.block(body)
            }
            Stmt::For { var, lo, hi, body, span } => {
                self.expect_type(lo, SnipType::Int, "range start")?;
                self.expect_type(hi, SnipType::Int, "range end")?;
                self.scoped(|cx| {
                    cx.declare(var, SnipType::Int, true, *span)?;
                    cx.block_stmts(body)
                })
            }
            Stmt::Return { value, .. } => {
                let ret = self.ret;
                self.expect_type(value, ret, "returned value")
            }
        }
    }

    fn expr(&self, e: &Expr) -> Result<SnipType, SyntaxError> {
        use SnipType::*;
        match e {
            Expr::Int(..) => Ok(Int),
            Expr::Bool(..) => Ok(Bool),
            Expr::Var(name, span) => match self.lookup(name) {
                Some(b) => Ok(b.ty),
                None => err(*span, format!("undeclared identifier `{name}`")),
            },
            Expr::Index { name, index, span } => {
                match self.lookup(name) {
                    Some(b) if b.ty == IntArray => {}
                    Some(b) => return err(*span, format!("`{name}` has type {} and cannot be indexed", b.ty)),
                    None => return err(*span, format!("undeclared identifier `{name}`")),
                }
                self.expect_type(index, Int, "array index")?;
                Ok(Int)
            }
            Expr::Len(arg, _) => {
                self.expect_type(arg, IntArray, "argument of `len`")?;
                Ok(Int)
            }
            Expr::Sorted(arg, _) => {
                self.expect_type(arg, IntArray, "argument of `sorted`")?;
                Ok(IntArray)
            }
            Expr::Unary { op, operand, .. } => match op {
                UnaryOp::Neg => self.expect_type(operand, Int, "operand of unary `-`").map(|_| Int),
                UnaryOp::Not => self.expect_type(operand, Bool, "operand of `!`").map(|_| Bool),
            },
            Expr::Binary { op, lhs, rhs, span } => {
                let sym = op.symbol();
                match op {
                    BinaryOp::Or | BinaryOp::And => {
                        self.expect_type(lhs, Bool, &format!("left operand of `{sym}`"))?;
                        self.expect_type(rhs, Bool, &format!("right operand of `{sym}`"))?;
                        Ok(Bool)
                    }
                    BinaryOp::Eq | BinaryOp::Ne => {
                        let (l, r) = (self.expr(lhs)?, self.expr(rhs)?);
                        if l != r {
                            return err(*span, format!("cannot compare {l} with {r} using `{sym}`"));
                        }
                        Ok(Bool)
                    }
                    BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                        self.expect_type(lhs, Int, &format!("left operand of `{sym}`"))?;
                        self.expect_type(rhs, Int, &format!("right operand of `{sym}`"))?;
                        Ok(Bool)
                    }
                    BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => {
                        self.expect_type(lhs, Int, &format!("left operand of `{sym}`"))?;
                        self.expect_type(rhs, Int, &format!("right operand of `{sym}`"))?;
                        Ok(Int)
                    }
                }
            }
        }
    }
}
