//! Canonical source rendering. `parse(print(p))` yields `p` up to spans.

use super::ast::*;

const INDENT: &str = "    ";

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for e in &p.exceptions {
        out.push_str("exception ");
        out.push_str(&e.name.name);
        if let Some(parent) = &e.parent {
            out.push_str(" <: ");
            out.push_str(&parent.name);
        }
        out.push_str(";\n");
    }
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 || !p.exceptions.is_empty() {
            out.push('\n');
        }
        print_fn(f, &mut out);
    }
    out
}

fn print_fn(f: &FnDecl, out: &mut String) {
    let params: Vec<String> = f.params.iter().map(|p| format!("{}: {}", p.name.name, print_type(&p.ty))).collect();
    out.push_str(&format!("fn {}({}) -> {} @effect({})", f.name.name, params.join(", "), print_type(&f.ret), f.effect.text.trim()));
    for t in &f.throws {
        out.push_str(&format!(" @throws({}, {})", t.exception.name, t.effect.text.trim()));
    }
    out.push(' ');
    block(&f.body, 0, out);
    out.push('\n');
}

pub fn print_type(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Unit => "unit".into(),
        TypeExpr::Bool => "bool".into(),
        TypeExpr::Int => "int".into(),
        TypeExpr::Fn { param, ret, latent } => {
            format!("fn({}) -> {} @effect({})", print_type(param), print_type(ret), latent.text.trim())
        }
    }
}

/// Renders a single expression as it would appear inside a function body.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(e, 0, &mut out);
    out
}

fn newline(depth: usize, out: &mut String) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn block(e: &Expr, depth: usize, out: &mut String) {
    if matches!(e.kind, ExprKind::Const(Const::Unit)) {
        out.push_str("{}");
        return;
    }
    out.push('{');
    newline(depth + 1, out);
    stmts(e, depth + 1, out);
    newline(depth, out);
    out.push('}');
}

fn stmts(e: &Expr, depth: usize, out: &mut String) {
    match &e.kind {
        ExprKind::Seq(a, b) => {
            if scope_left_open(a) {
                block(a, depth, out);
            } else {
                stmts(a, depth, out);
            }
            out.push(';');
            newline(depth, out);
            if matches!(b.kind, ExprKind::Seq(..)) {
                block(b, depth, out);
            } else {
                stmts(b, depth, out);
            }
        }
        ExprKind::Let { name, value, body } => {
            out.push_str("let ");
            out.push_str(&name.name);
            out.push_str(" = ");
            expr(value, depth, out);
            out.push(';');
            newline(depth, out);
            stmts(body, depth, out);
        }
        _ => expr(e, depth, out),
    }
}

/// Whether printing `e` flat would leave a `let` whose scope swallows the
/// statements after it.
fn scope_left_open(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Let { .. } => true,
        ExprKind::Seq(_, b) => matches!(b.kind, ExprKind::Let { .. }),
        _ => false,
    }
}

/// True when `e` can be followed directly by a block or call parentheses.
fn simple(e: &Expr) -> bool {
    matches!(
        e.kind,
        ExprKind::Var(_) | ExprKind::Const(_) | ExprKind::Call { .. } | ExprKind::App { .. } | ExprKind::Seq(..) | ExprKind::Let { .. }
    )
}

fn paren_unless_simple(e: &Expr, depth: usize, out: &mut String) {
    if simple(e) {
        expr(e, depth, out);
    } else {
        out.push('(');
        expr(e, depth, out);
        out.push(')');
    }
}

fn expr(e: &Expr, depth: usize, out: &mut String) {
    match &e.kind {
        ExprKind::Var(x) => out.push_str(x),
        ExprKind::Const(Const::Unit) => out.push_str("()"),
        ExprKind::Const(Const::Bool(b)) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Const(Const::Int(n)) => out.push_str(&n.to_string()),
        ExprKind::Seq(..) | ExprKind::Let { .. } => block(e, depth, out),
        ExprKind::Lambda { param, ty, latent, body } => {
            out.push_str(&format!("\\({}: {}) @effect({}) => ", param.name, print_type(ty), latent.text.trim()));
            expr(body, depth, out);
        }
        ExprKind::App { fun, arg } => {
            if matches!(fun.kind, ExprKind::Call { .. } | ExprKind::App { .. }) {
                expr(fun, depth, out);
            } else {
                out.push('(');
                expr(fun, depth, out);
                out.push(')');
            }
            out.push('(');
            expr(arg, depth, out);
            out.push(')');
        }
        ExprKind::Call { name, args } => {
            out.push_str(&name.name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(a, depth, out);
            }
            out.push(')');
        }
        ExprKind::If { cond, then, els } => {
            out.push_str("if ");
            paren_unless_simple(cond, depth, out);
            out.push(' ');
            block(then, depth, out);
            if let Some(els) = els {
                out.push_str(" else ");
                if matches!(els.kind, ExprKind::If { .. }) {
                    expr(els, depth, out);
                } else {
                    block(els, depth, out);
                }
            }
        }
        ExprKind::While { cond, body, .. } => {
            out.push_str("while ");
            paren_unless_simple(cond, depth, out);
            out.push(' ');
            block(body, depth, out);
        }
        ExprKind::Perform(l) => {
            out.push_str("perform ");
            out.push_str(&l.name);
        }
        ExprKind::Throw(x) => {
            out.push_str("throw ");
            out.push_str(&x.name);
        }
        ExprKind::Break => out.push_str("break"),
        ExprKind::Return(None) => out.push_str("return"),
        ExprKind::Return(Some(v)) => {
            out.push_str("return ");
            expr(v, depth, out);
        }
        ExprKind::Try { body, catches } => {
            out.push_str("try ");
            block(body, depth, out);
            for c in catches {
                out.push_str(" catch ");
                out.push_str(&c.exception.name);
                out.push(' ');
                block(&c.body, depth, out);
            }
        }
    }
}
