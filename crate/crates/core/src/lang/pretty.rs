use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

/// Canonical text for a program: four-space indentation, single spaces
/// around binary operators, and only the parentheses the grammar needs.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    let params: Vec<String> = p.params.iter().map(|q| format!("{}: {}", q.name, q.ty)).collect();
    let _ = write!(out, "fn {}({}) -> {} ", p.name, params.join(", "), p.return_type);
    block(&mut out, &p.body, 0);
    out.push('\n');
    out
}

fn block(out: &mut String, b: &[Stmt], depth: usize) {
    if b.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for s in b {
        stmt(out, s, depth + 1);
    }
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    out.push_str(&INDENT.repeat(depth));
    match s {
        Stmt::Let { name, value, .. } => {
            let _ = write!(out, "let {name} = {};", expr(value));
        }
        Stmt::Assign { name, value, .. } => {
            let _ = write!(out, "{name} = {};", expr(value));
        }
        Stmt::IndexAssign { name, index, value, .. } => {
            let _ = write!(out, "{name}[{}] = {};", expr(index), expr(value));
        }
        Stmt::If {
            cond,
            then_block,
            else_block,
            ..
        } => {
            let _ = write!(out, "if {} ", expr(cond));
            block(out, then_block, depth);
            if let Some(e) = else_block {
                out.push_str(" else ");
                block(out, e, depth);
            }
        }
        Stmt::While { cond, body, .. } => {
            let _ = write!(out, "while {} ", expr(cond));
            block(out, body, depth);
        }
        Stmt::For { var, lo, hi, body, .. } => {
            let _ = write!(out, "for {var} in {}..{} ", expr(lo), expr(hi));
            block(out, body, depth);
        }
        Stmt::Return { value, .. } => {
            let _ = write!(out, "return {};", expr(value));
        }
    }
    out.push('\n');
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(v, _) => v.to_string(),
        Expr::Bool(b, _) => b.to_string(),
        Expr::Var(n, _) => n.clone(),
        Expr::Index { name, index, .. } => format!("{name}[{}]", expr(index)),
        Expr::Len(a, _) => format!("len({})", expr(a)),
        Expr::Sorted(a, _) => format!("sorted({})", expr(a)),
        Expr::Unary { op, operand, .. } => {
            let sym = match op {
                UnaryOp::Neg => "-",
                UnaryOp::Not => "!",
            };
            match **operand {
                Expr::Binary { .. } => format!("{sym}({})", expr(operand)),
                _ => format!("{sym}{}", expr(operand)),
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let prec = op.precedence();
            let l = operand(lhs, |p| p < prec);
            // left-associative: an equal-precedence right operand needs parens
            let r = operand(rhs, |p| p <= prec);
            format!("{l} {} {r}", op.symbol())
        }
    }
}

fn operand(e: &Expr, needs_parens: impl Fn(u8) -> bool) -> String {
    match e {
        Expr::Binary { op, .. } if needs_parens(op.precedence()) => format!("({})", expr(e)),
        _ => expr(e),
    }
}
