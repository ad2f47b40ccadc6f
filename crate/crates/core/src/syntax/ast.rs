//! Surface syntax tree. Every node carries the byte span it was parsed from;
//! `switch` and `finally` never appear here because the parser lowers them.

use super::span::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

/// Raw annotation text, interpreted later by the selected effect system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectAnn {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThrowsAnn {
    pub exception: Ident,
    pub effect: EffectAnn,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeExpr {
    Unit,
    Bool,
    Int,
    Fn { param: Box<TypeExpr>, ret: Box<TypeExpr>, latent: EffectAnn },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionDecl {
    pub name: Ident,
    pub parent: Option<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnDecl {
    pub name: Ident,
    pub params: Vec<Param>,
    pub ret: TypeExpr,
    pub effect: EffectAnn,
    pub throws: Vec<ThrowsAnn>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub exceptions: Vec<ExceptionDecl>,
    pub functions: Vec<FnDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Const {
    Unit,
    Bool(bool),
    Int(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catch {
    pub exception: Ident,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Var(String),
    Const(Const),
    Lambda { param: Ident, ty: TypeExpr, latent: EffectAnn, body: Box<Expr> },
    /// `f(a)` where `f` is not a bare name, e.g. an immediately applied lambda.
    App { fun: Box<Expr>, arg: Box<Expr> },
    /// `name(args)`; the resolver decides between a declared function and a
    /// function-typed local.
    Call { name: Ident, args: Vec<Expr> },
    If { cond: Box<Expr>, then: Box<Expr>, els: Option<Box<Expr>> },
    /// `header` covers `while` and the condition.
    While { cond: Box<Expr>, body: Box<Expr>, header: Span },
    Seq(Box<Expr>, Box<Expr>),
    Let { name: Ident, value: Box<Expr>, body: Box<Expr> },
    Perform(Ident),
    Throw(Ident),
    Try { body: Box<Expr>, catches: Vec<Catch> },
    Break,
    Return(Option<Box<Expr>>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Direct subexpressions in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Const(_) | ExprKind::Perform(_) | ExprKind::Throw(_) | ExprKind::Break => {
                vec![]
            }
            ExprKind::Lambda { body, .. } => vec![body],
            ExprKind::App { fun, arg } => vec![fun, arg],
            ExprKind::Call { args, .. } => args.iter().collect(),
            ExprKind::If { cond, then, els } => {
                let mut v: Vec<&Expr> = vec![cond, then];
                v.extend(els.as_deref());
                v
            }
            ExprKind::While { cond, body, .. } => vec![cond, body],
            ExprKind::Seq(a, b) => vec![a, b],
            ExprKind::Let { value, body, .. } => vec![value, body],
            ExprKind::Try { body, catches } => {
                let mut v: Vec<&Expr> = vec![body];
                v.extend(catches.iter().map(|c| &c.body));
                v
            }
            ExprKind::Return(e) => e.as_deref().into_iter().collect(),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

/// Resets every span to the default, so trees can be compared by shape.
pub trait EraseSpans {
    fn erase_spans(&mut self);
}

impl EraseSpans for Ident {
    fn erase_spans(&mut self) {
        self.span = Span::default();
    }
}

impl EraseSpans for EffectAnn {
    fn erase_spans(&mut self) {
        self.span = Span::default();
        self.text = self.text.trim().to_string();
    }
}

impl EraseSpans for TypeExpr {
    fn erase_spans(&mut self) {
        if let TypeExpr::Fn { param, ret, latent } = self {
            param.erase_spans();
            ret.erase_spans();
            latent.erase_spans();
        }
    }
}

impl EraseSpans for Expr {
    fn erase_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            ExprKind::Var(_) | ExprKind::Const(_) | ExprKind::Break => {}
            ExprKind::Perform(i) | ExprKind::Throw(i) => i.erase_spans(),
            ExprKind::Lambda { param, ty, latent, body } => {
                param.erase_spans();
                ty.erase_spans();
                latent.erase_spans();
                body.erase_spans();
            }
            ExprKind::App { fun, arg } => {
                fun.erase_spans();
                arg.erase_spans();
            }
            ExprKind::Call { name, args } => {
                name.erase_spans();
                args.iter_mut().for_each(EraseSpans::erase_spans);
            }
            ExprKind::If { cond, then, els } => {
                cond.erase_spans();
                then.erase_spans();
                if let Some(e) = els {
                    e.erase_spans();
                }
            }
            ExprKind::While { cond, body, header } => {
                *header = Span::default();
                cond.erase_spans();
                body.erase_spans();
            }
            ExprKind::Seq(a, b) => {
                a.erase_spans();
                b.erase_spans();
            }
            ExprKind::Let { name, value, body } => {
                name.erase_spans();
                value.erase_spans();
                body.erase_spans();
            }
            ExprKind::Try { body, catches } => {
                body.erase_spans();
                for c in catches {
                    c.span = Span::default();
                    c.exception.erase_spans();
                    c.body.erase_spans();
                }
            }
            ExprKind::Return(e) => {
                if let Some(e) = e {
                    e.erase_spans();
                }
            }
        }
    }
}

impl EraseSpans for Program {
    fn erase_spans(&mut self) {
        for e in &mut self.exceptions {
            e.span = Span::default();
            e.name.erase_spans();
            if let Some(p) = &mut e.parent {
                p.erase_spans();
            }
        }
        for f in &mut self.functions {
            f.span = Span::default();
            f.name.erase_spans();
            for p in &mut f.params {
                p.name.erase_spans();
                p.ty.erase_spans();
            }
            f.ret.erase_spans();
            f.effect.erase_spans();
            for t in &mut f.throws {
                t.span = Span::default();
                t.exception.erase_spans();
                t.effect.erase_spans();
            }
            f.body.erase_spans();
        }
    }
}
