//! Recursive-descent parser. Errors inside a block skip to the next
//! statement; errors elsewhere skip to the next top-level declaration, so
//! every syntax error in a file is reported in one pass.

use std::collections::HashMap;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::span::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
}

pub fn parse(src: &str) -> Result<Program, Vec<SyntaxError>> {
    let (toks, lex_errs) = lex(src);
    let mut p = Parser {
        exceptions: declared_exceptions(&toks),
        toks,
        pos: 0,
        errors: lex_errs.into_iter().map(|e| SyntaxError { span: e.span, message: e.message }).collect(),
    };
    let prog = p.program();
    if p.errors.is_empty() {
        Ok(prog)
    } else {
        p.errors.sort_by_key(|e| e.span);
        Err(p.errors)
    }
}

/// Declared exception names, deepest first, for `finally` lowering. Ties keep
/// declaration order.
fn declared_exceptions<'t>(toks: &'t [Token]) -> Vec<String> {
    let mut parent: HashMap<&'t str, Option<&'t str>> = HashMap::new();
    let mut order: Vec<&'t str> = Vec::new();
    for w in toks.windows(2) {
        if let (Tok::Exception, Tok::Ident(name)) = (&w[0].tok, &w[1].tok) {
            order.push(name.as_str());
            parent.entry(name).or_insert(None);
        }
    }
    for w in toks.windows(4) {
        if let (Tok::Exception, Tok::Ident(name), Tok::Subtype, Tok::Ident(sup)) = (&w[0].tok, &w[1].tok, &w[2].tok, &w[3].tok)
        {
            parent.insert(name, Some(sup));
        }
    }
    let depth = |mut n: &'t str| {
        let mut d = 0;
        while let Some(Some(p)) = parent.get(n) {
            d += 1;
            n = p;
            if d > parent.len() {
                break;
            }
        }
        d
    };
    let mut names: Vec<(usize, &str)> = order.iter().map(|n| (depth(n), *n)).collect();
    names.dedup_by(|a, b| a.1 == b.1);
    names.sort_by_key(|n| std::cmp::Reverse(n.0));
    names.into_iter().map(|(_, n)| n.to_string()).collect()
}

type PResult<T> = Result<T, ()>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    errors: Vec<SyntaxError>,
    exceptions: Vec<String>,
}

enum Stmt {
    Expr(Expr),
    Let(Ident, Expr, Span),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail<T>(&mut self, span: Span, message: impl Into<String>) -> PResult<T> {
        self.errors.push(SyntaxError { span, message: message.into() });
        Err(())
    }

    fn expect(&mut self, t: &Tok) -> PResult<Span> {
        if self.at(t) {
            Ok(self.bump().span)
        } else {
            let found = self.peek().clone();
            self.fail(self.span(), format!("expected {t}, found {found}"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => Ok(Ident { name, span: self.bump().span }),
            other => self.fail(self.span(), format!("expected {what}, found {other}")),
        }
    }

    fn program(&mut self) -> Program {
        let mut prog = Program::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Exception => match self.exception_decl() {
                    Ok(d) => prog.exceptions.push(d),
                    Err(()) => self.recover_top(),
                },
                Tok::Fn => match self.fn_decl() {
                    Ok(f) => prog.functions.push(f),
                    Err(()) => self.recover_top(),
                },
                other => {
                    let msg = format!("expected `fn` or `exception`, found {other}");
                    let _ = self.fail::<()>(self.span(), msg);
                    self.bump();
                    self.recover_top();
                }
            }
        }
        prog
    }

    /// Skips to the next `fn`/`exception` that starts a line-level item.
    fn recover_top(&mut self) {
        let mut depth = 0i32;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    depth -= 1;
                    if depth <= 0 {
                        self.bump();
                        if matches!(self.peek(), Tok::Fn | Tok::Exception | Tok::Eof) {
                            return;
                        }
                        depth = depth.max(0);
                        continue;
                    }
                }
                Tok::Exception if depth <= 0 => return,
                Tok::Fn if depth <= 0 && matches!(self.peek_at(1), Tok::Ident(_)) => return,
                _ => {}
            }
            self.bump();
        }
    }

    fn exception_decl(&mut self) -> PResult<ExceptionDecl> {
        let start = self.expect(&Tok::Exception)?;
        let name = self.ident("exception name")?;
        let parent = if self.eat(&Tok::Subtype) { Some(self.ident("parent exception name")?) } else { None };
        let end = self.expect(&Tok::Semi)?;
        Ok(ExceptionDecl { name, parent, span: start.to(end) })
    }

    fn fn_decl(&mut self) -> PResult<FnDecl> {
        let start = self.expect(&Tok::Fn)?;
        let name = self.ident("function name")?;
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let pname = self.ident("parameter name")?;
                self.expect(&Tok::Colon)?;
                let ty = self.type_expr()?;
                params.push(Param { name: pname, ty });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::Arrow)?;
        let ret = self.type_expr()?;
        let mut effect = None;
        let mut throws = Vec::new();
        while let Tok::Annot { name: aname, args, args_span } = self.peek().clone() {
            let span = self.bump().span;
            match aname.as_str() {
                "effect" => {
                    if effect.is_some() {
                        return self.fail(span, "duplicate `@effect` annotation");
                    }
                    effect = Some(EffectAnn { text: args, span: args_span });
                }
                "throws" => throws.push(self.throws_ann(&args, args_span, span)?),
                other => return self.fail(span, format!("unknown annotation `@{other}`")),
            }
        }
        let Some(effect) = effect else {
            return self.fail(name.span, format!("function `{}` lacks an `@effect` annotation", name.name));
        };
        if !self.at(&Tok::LBrace) {
            let found = self.peek().clone();
            return self.fail(self.span(), format!("expected function body `{{`, found {found}"));
        }
        let body = self.block()?;
        let span = Span::new(start.start, self.prev_end());
        Ok(FnDecl { name, params, ret, effect, throws, body, span })
    }

    fn throws_ann(&mut self, args: &str, args_span: Span, span: Span) -> PResult<ThrowsAnn> {
        let Some(comma) = args.find(',') else {
            return self.fail(span, "`@throws` expects `(Exception, effect)`");
        };
        let exc_text = &args[..comma];
        let lead = exc_text.len() - exc_text.trim_start().len();
        let exc = exc_text.trim();
        if exc.is_empty() || !exc.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return self.fail(span, format!("bad exception name `{exc}` in `@throws`"));
        }
        let eff_text = &args[comma + 1..];
        let eff_lead = eff_text.len() - eff_text.trim_start().len();
        let eff = eff_text.trim();
        if eff.is_empty() {
            return self.fail(span, "`@throws` is missing its effect");
        }
        let exc_start = args_span.start + lead;
        let eff_start = args_span.start + comma + 1 + eff_lead;
        Ok(ThrowsAnn {
            exception: Ident { name: exc.to_string(), span: Span::new(exc_start, exc_start + exc.len()) },
            effect: EffectAnn { text: eff.to_string(), span: Span::new(eff_start, eff_start + eff.len()) },
            span,
        })
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::Unit => {
                self.bump();
                Ok(TypeExpr::Unit)
            }
            Tok::Bool => {
                self.bump();
                Ok(TypeExpr::Bool)
            }
            Tok::IntTy => {
                self.bump();
                Ok(TypeExpr::Int)
            }
            Tok::Fn => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let param = self.type_expr()?;
                self.expect(&Tok::RParen)?;
                self.expect(&Tok::Arrow)?;
                let ret = self.type_expr()?;
                let latent = self.effect_annot()?;
                Ok(TypeExpr::Fn { param: Box::new(param), ret: Box::new(ret), latent })
            }
            other => self.fail(self.span(), format!("expected a type, found {other}")),
        }
    }

    fn effect_annot(&mut self) -> PResult<EffectAnn> {
        match self.peek().clone() {
            Tok::Annot { name, args, args_span } if name == "effect" => {
                self.bump();
                Ok(EffectAnn { text: args, span: args_span })
            }
            Tok::Annot { name, .. } => self.fail(self.span(), format!("unknown annotation `@{name}` here; expected `@effect`")),
            other => self.fail(self.span(), format!("expected `@effect(...)`, found {other}")),
        }
    }

    /// `{ stmts }`. An empty block is the unit constant.
    fn block(&mut self) -> PResult<Expr> {
        let open = self.expect(&Tok::LBrace)?;
        let mut stmts = Vec::new();
        let mut failed = false;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            match self.stmt() {
                Ok(s) => {
                    let block_like = matches!(self.toks[self.pos - 1].tok, Tok::RBrace);
                    stmts.push(s);
                    if self.eat(&Tok::Semi) || self.at(&Tok::RBrace) || block_like {
                        continue;
                    }
                    let found = self.peek().clone();
                    let _ = self.fail::<()>(self.span(), format!("expected `;` or `}}`, found {found}"));
                    failed = true;
                    self.recover_stmt();
                }
                Err(()) => {
                    failed = true;
                    self.recover_stmt();
                }
            }
        }
        let close = self.expect(&Tok::RBrace)?;
        let span = open.to(close);
        if failed {
            return Err(());
        }
        self.build_block(stmts, span)
    }

    /// Skips past the current statement: to a `;` at this depth (consumed)
    /// or the closing `}` (left in place).
    fn recover_stmt(&mut self) {
        let mut depth = 0i32;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace | Tok::LParen => depth += 1,
                Tok::RParen => depth -= 1,
                Tok::RBrace => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                }
                Tok::Semi if depth <= 0 => {
                    self.bump();
                    return;
                }
                Tok::Fn | Tok::Exception if depth <= 0 && matches!(self.peek_at(1), Tok::Ident(_)) => return,
                _ => {}
            }
            self.bump();
        }
    }

    fn build_block(&mut self, stmts: Vec<Stmt>, span: Span) -> PResult<Expr> {
        if stmts.is_empty() {
            return Ok(Expr::new(ExprKind::Const(Const::Unit), span));
        }
        self.build_stmts(stmts)
    }

    fn build_stmts(&mut self, mut stmts: Vec<Stmt>) -> PResult<Expr> {
        let Some(split) = stmts.iter().position(|s| matches!(s, Stmt::Let(..))) else {
            return Ok(Self::fold_seq(stmts.into_iter().map(|s| match s {
                Stmt::Expr(e) => e,
                Stmt::Let(..) => unreachable!(),
            })));
        };
        let rest = stmts.split_off(split + 1);
        let Some(Stmt::Let(name, value, let_span)) = stmts.pop() else { unreachable!() };
        if rest.is_empty() {
            return self.fail(let_span, format!("`let {}` must be followed by an expression", name.name));
        }
        let body = self.build_stmts(rest)?;
        let span = let_span.to(body.span);
        let tail = Expr::new(ExprKind::Let { name, value: Box::new(value), body: Box::new(body) }, span);
        let mut exprs: Vec<Expr> = stmts
            .into_iter()
            .map(|s| match s {
                Stmt::Expr(e) => e,
                Stmt::Let(..) => unreachable!(),
            })
            .collect();
        exprs.push(tail);
        Ok(Self::fold_seq(exprs.into_iter()))
    }

    fn fold_seq(mut it: impl Iterator<Item = Expr>) -> Expr {
        let first = it.next().expect("non-empty statement list");
        it.fold(first, |a, b| {
            let span = a.span.to(b.span);
            Expr::new(ExprKind::Seq(Box::new(a), Box::new(b)), span)
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if self.at(&Tok::Let) {
            let start = self.bump().span;
            let name = self.ident("variable name")?;
            self.expect(&Tok::Eq)?;
            let value = self.expr()?;
            let span = start.to(value.span);
            return Ok(Stmt::Let(name, value, span));
        }
        Ok(Stmt::Expr(self.expr()?))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::If => self.if_expr(),
            Tok::While => {
                self.bump();
                let cond = self.expr()?;
                let header = start.to(cond.span);
                let body = self.block()?;
                let span = start.to(body.span).to(self.toks[self.pos - 1].span);
                Ok(Expr::new(ExprKind::While { cond: Box::new(cond), body: Box::new(body), header }, span))
            }
            Tok::Try => self.try_expr(),
            Tok::Switch => self.switch_expr(),
            Tok::Perform => {
                self.bump();
                let label = self.ident("effect label")?;
                let span = start.to(label.span);
                Ok(Expr::new(ExprKind::Perform(label), span))
            }
            Tok::Throw => {
                self.bump();
                let exc = self.ident("exception name")?;
                let span = start.to(exc.span);
                Ok(Expr::new(ExprKind::Throw(exc), span))
            }
            Tok::Break => {
                self.bump();
                Ok(Expr::new(ExprKind::Break, start))
            }
            Tok::Return => {
                self.bump();
                if matches!(self.peek(), Tok::Semi | Tok::RBrace | Tok::RParen | Tok::Eof | Tok::Comma) {
                    return Ok(Expr::new(ExprKind::Return(None), start));
                }
                let e = self.expr()?;
                let span = start.to(e.span);
                Ok(Expr::new(ExprKind::Return(Some(Box::new(e))), span))
            }
            Tok::Backslash => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let param = self.ident("lambda parameter")?;
                self.expect(&Tok::Colon)?;
                let ty = self.type_expr()?;
                self.expect(&Tok::RParen)?;
                let latent = self.effect_annot()?;
                self.expect(&Tok::FatArrow)?;
                let body = self.expr()?;
                let span = start.to(body.span);
                Ok(Expr::new(ExprKind::Lambda { param, ty, latent, body: Box::new(body) }, span))
            }
            _ => self.postfix(),
        }
    }

    fn if_expr(&mut self) -> PResult<Expr> {
        let start = self.expect(&Tok::If)?;
        let cond = self.expr()?;
        let then = self.block()?;
        let mut end = self.toks[self.pos - 1].span;
        let els = if self.eat(&Tok::Else) {
            let e = if self.at(&Tok::If) { self.if_expr()? } else { self.block()? };
            end = self.toks[self.pos - 1].span;
            Some(Box::new(e))
        } else {
            None
        };
        Ok(Expr::new(ExprKind::If { cond: Box::new(cond), then: Box::new(then), els }, start.to(end)))
    }

    fn try_expr(&mut self) -> PResult<Expr> {
        let start = self.expect(&Tok::Try)?;
        let body = self.block()?;
        let mut catches = Vec::new();
        while self.at(&Tok::Catch) {
            let cstart = self.bump().span;
            let exception = self.ident("exception name")?;
            let cbody = self.block()?;
            let span = cstart.to(self.toks[self.pos - 1].span);
            catches.push(Catch { exception, body: cbody, span });
        }
        let finally = if self.at(&Tok::Finally) {
            let kw = self.bump().span;
            Some((kw, self.block()?))
        } else {
            None
        };
        let span = start.to(self.toks[self.pos - 1].span);
        if catches.is_empty() && finally.is_none() {
            return self.fail(span, "`try` needs at least one `catch` or a `finally`");
        }
        let inner = if catches.is_empty() {
            body
        } else {
            Expr::new(ExprKind::Try { body: Box::new(body), catches }, span)
        };
        let Some((kw, fin)) = finally else {
            return Ok(inner);
        };
        Ok(self.lower_finally(inner, kw, fin, span))
    }

    /// `try B ... finally F` becomes
    /// `try { try B ... } catch X { F; throw X } ...; F`
    /// with one rethrowing clause per declared exception, deepest first.
    /// Jumps (`break`, `return`) out of `B` skip `F`.
    fn lower_finally(&self, inner: Expr, kw: Span, fin: Expr, span: Span) -> Expr {
        let guarded = if self.exceptions.is_empty() {
            inner
        } else {
            let catches = self
                .exceptions
                .iter()
                .map(|x| {
                    let throw =
                        Expr::new(ExprKind::Throw(Ident { name: x.clone(), span: kw }), kw);
                    let body_span = fin.span.to(kw);
                    let body = Expr::new(ExprKind::Seq(Box::new(fin.clone()), Box::new(throw)), body_span);
                    Catch { exception: Ident { name: x.clone(), span: kw }, body, span: kw.to(fin.span) }
                })
                .collect();
            Expr::new(ExprKind::Try { body: Box::new(inner), catches }, span)
        };
        Expr::new(ExprKind::Seq(Box::new(guarded), Box::new(fin)), span)
    }

    /// `switch { case c1 { b1 } ... default { d } }` becomes nested `if`s.
    fn switch_expr(&mut self) -> PResult<Expr> {
        let start = self.expect(&Tok::Switch)?;
        self.expect(&Tok::LBrace)?;
        let mut cases = Vec::new();
        let mut default = None;
        loop {
            match self.peek() {
                Tok::Case if default.is_none() => {
                    let cstart = self.bump().span;
                    let cond = self.expr()?;
                    let body = self.block()?;
                    cases.push((cstart, cond, body));
                }
                Tok::Default if default.is_none() => {
                    let dstart = self.bump().span;
                    default = Some((dstart, self.block()?));
                }
                Tok::RBrace => break,
                other => {
                    let msg = format!("expected `case`, `default` or `}}` in switch, found {other}");
                    return self.fail(self.span(), msg);
                }
            }
        }
        let end = self.expect(&Tok::RBrace)?;
        let mut acc = default.map(|(_, d)| d);
        for (i, (cstart, cond, body)) in cases.into_iter().enumerate().rev() {
            let from = if i == 0 { start } else { cstart };
            acc = Some(Expr::new(
                ExprKind::If { cond: Box::new(cond), then: Box::new(body), els: acc.map(Box::new) },
                from.to(end),
            ));
        }
        Ok(acc.unwrap_or_else(|| Expr::new(ExprKind::Const(Const::Unit), start.to(end))))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.at(&Tok::LParen) {
            let (args, close) = self.args()?;
            let span = e.span.to(close);
            e = match e.kind {
                ExprKind::Var(name) => {
                    Expr::new(ExprKind::Call { name: Ident { name, span: e.span }, args }, span)
                }
                _ => {
                    if args.len() != 1 {
                        return self.fail(span, format!("application takes exactly one argument, found {}", args.len()));
                    }
                    let arg = args.into_iter().next().expect("one argument");
                    Expr::new(ExprKind::App { fun: Box::new(e), arg: Box::new(arg) }, span)
                }
            };
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<(Vec<Expr>, Span)> {
        self.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let close = self.expect(&Tok::RParen)?;
        Ok((args, close))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::new(ExprKind::Var(name), start))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Const(Const::Int(n)), start))
            }
            Tok::True | Tok::False => {
                let b = matches!(self.bump().tok, Tok::True);
                Ok(Expr::new(ExprKind::Const(Const::Bool(b)), start))
            }
            Tok::LParen => {
                self.bump();
                if self.at(&Tok::RParen) {
                    let close = self.bump().span;
                    return Ok(Expr::new(ExprKind::Const(Const::Unit), start.to(close)));
                }
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => self.block(),
            other => self.fail(start, format!("expected an expression, found {other}")),
        }
    }
}
