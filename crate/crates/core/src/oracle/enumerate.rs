//! Exhaustive enumeration of small closed programs over a finite system.
//!
//! Function bodies follow the grammar
//!
//! ```text
//! T ::= a | T; T | if C { T } | if C { T } else { T } | while C { W }
//!     | (\(x: unit) @effect(l) => W)(())
//! W ::= a | W; W
//! C ::= true | { a; true }
//! ```
//!
//! where `a` ranges over the system's atom labels and `l` over its carrier.
//! Sizes count AST nodes: an atom, `true` and `()` are one node each, the
//! other forms one node plus their parts, and an applied lambda counts the
//! application, the lambda and the unit argument.

use std::collections::HashMap;

use crate::quantale::{Effect, EffectSystem};
use crate::syntax::ast::{self, Const, EffectAnn, Expr, ExprKind, FnDecl, Ident, Program, TypeExpr};
use crate::syntax::span::Span;
use crate::syntax::{parse, print_program, resolve, ResolvedProgram};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Cond {
    True,
    Atom(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Body {
    Atom(usize),
    Seq(Box<Body>, Box<Body>),
    If(Cond, Box<Body>, Option<Box<Body>>),
    While(Cond, Box<Body>),
    App(usize, Box<Body>),
}

/// One enumerated program: its source text and resolution.
#[derive(Debug, Clone)]
pub struct Enumerated {
    pub source: String,
    pub program: ResolvedProgram,
}

/// Templates of each size, instantiated with atom and latent-effect choices.
struct Gen {
    atoms: usize,
    latents: usize,
    bodies: HashMap<usize, Vec<Body>>,
    loops: HashMap<usize, Vec<Body>>,
}

impl Gen {
    fn conds(&self, n: usize) -> Vec<Cond> {
        match n {
            1 => vec![Cond::True],
            3 => (0..self.atoms).map(Cond::Atom).collect(),
            _ => vec![],
        }
    }

    /// Sequences of atoms (`W`).
    fn loop_bodies(&mut self, n: usize) -> Vec<Body> {
        if let Some(v) = self.loops.get(&n) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend((0..self.atoms).map(Body::Atom));
        }
        for i in 1..n.saturating_sub(1) {
            let j = n - 1 - i;
            for a in self.loop_bodies(i) {
                for b in self.loop_bodies(j) {
                    out.push(Body::Seq(Box::new(a.clone()), Box::new(b)));
                }
            }
        }
        self.loops.insert(n, out.clone());
        out
    }

    fn bodies(&mut self, n: usize) -> Vec<Body> {
        if let Some(v) = self.bodies.get(&n) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend((0..self.atoms).map(Body::Atom));
        }
        // T; T
        for i in 1..n.saturating_sub(1) {
            for a in self.bodies(i) {
                for b in self.bodies(n - 1 - i) {
                    out.push(Body::Seq(Box::new(a.clone()), Box::new(b)));
                }
            }
        }
        // if C { T }
        for c in [1, 3] {
            if n < c + 2 {
                continue;
            }
            for cond in self.conds(c) {
                for t in self.bodies(n - 1 - c) {
                    out.push(Body::If(cond.clone(), Box::new(t), None));
                }
            }
        }
        // if C { T } else { T }
        for c in [1, 3] {
            if n < c + 3 {
                continue;
            }
            for cond in self.conds(c) {
                for i in 1..n - c - 1 {
                    for t in self.bodies(i) {
                        for f in self.bodies(n - 1 - c - i) {
                            out.push(Body::If(cond.clone(), Box::new(t.clone()), Some(Box::new(f))));
                        }
                    }
                }
            }
        }
        // while C { W }
        for c in [1, 3] {
            if n < c + 2 {
                continue;
            }
            for cond in self.conds(c) {
                for w in self.loop_bodies(n - 1 - c) {
                    out.push(Body::While(cond.clone(), Box::new(w)));
                }
            }
        }
        // applied lambda
        if n >= 4 {
            for l in 0..self.latents {
                for w in self.loop_bodies(n - 3) {
                    out.push(Body::App(l, Box::new(w)));
                }
            }
        }
        self.bodies.insert(n, out.clone());
        out
    }
}

fn ident(name: &str) -> Ident {
    Ident { name: name.to_string(), span: Span::default() }
}

fn node(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::default())
}

struct Render<'a> {
    labels: &'a [String],
    latents: &'a [String],
}

impl Render<'_> {
    fn cond(&self, c: &Cond) -> Expr {
        let t = node(ExprKind::Const(Const::Bool(true)));
        match c {
            Cond::True => t,
            Cond::Atom(a) => node(ExprKind::Seq(Box::new(self.atom(*a)), Box::new(t))),
        }
    }

    fn atom(&self, a: usize) -> Expr {
        node(ExprKind::Perform(ident(&self.labels[a])))
    }

    fn body(&self, b: &Body) -> Expr {
        match b {
            Body::Atom(a) => self.atom(*a),
            Body::Seq(x, y) => node(ExprKind::Seq(Box::new(self.body(x)), Box::new(self.body(y)))),
            Body::If(c, t, f) => node(ExprKind::If {
                cond: Box::new(self.cond(c)),
                then: Box::new(self.body(t)),
                els: f.as_ref().map(|f| Box::new(self.body(f))),
            }),
            Body::While(c, w) => node(ExprKind::While {
                cond: Box::new(self.cond(c)),
                body: Box::new(self.body(w)),
                header: Span::default(),
            }),
            Body::App(l, w) => node(ExprKind::App {
                fun: Box::new(node(ExprKind::Lambda {
                    param: ident("x"),
                    ty: TypeExpr::Unit,
                    latent: EffectAnn { text: self.latents[*l].clone(), span: Span::default() },
                    body: Box::new(self.body(w)),
                })),
                arg: Box::new(node(ExprKind::Const(Const::Unit))),
            }),
        }
    }
}

/// Body templates with atoms and latent effects filled in, per size
/// `1..=max_nodes`.
fn body_counts(atoms: usize, latents: usize, max_nodes: usize) -> Vec<Vec<Body>> {
    let mut g = Gen { atoms, latents, bodies: HashMap::new(), loops: HashMap::new() };
    (1..=max_nodes).map(|n| g.bodies(n)).collect()
}

/// Number of bodies of each size `1..=max_nodes`, without materializing
/// programs.
pub fn body_count_by_size(atoms: usize, latents: usize, max_nodes: usize) -> Vec<usize> {
    body_counts(atoms, latents, max_nodes).iter().map(Vec::len).collect()
}

/// Every program of at most `max_nodes` body nodes, for every bound in the
/// carrier, in a fixed order: by size, then template, then atoms, then
/// bound. Returns nothing for infinite systems.
pub fn enumerate_programs(sys: &EffectSystem, max_nodes: usize) -> Vec<Enumerated> {
    let Some(elements) = sys.elements() else { return Vec::new() };
    let labels: Vec<String> = sys.atom_labels().map(str::to_string).collect();
    let rendered: Vec<String> = elements.iter().map(|e: &Effect| sys.render(e)).collect();
    let r = Render { labels: &labels, latents: &rendered };
    let mut out = Vec::new();
    for bodies in body_counts(labels.len(), elements.len(), max_nodes) {
        for b in &bodies {
            let body = r.body(b);
            for bound in &rendered {
                let decl = FnDecl {
                    name: ident("f"),
                    params: vec![],
                    ret: TypeExpr::Unit,
                    effect: EffectAnn { text: bound.clone(), span: Span::default() },
                    throws: vec![],
                    body: body.clone(),
                    span: Span::default(),
                };
                let source = print_program(&Program { exceptions: vec![], functions: vec![decl] });
                let parsed: ast::Program = parse(&source).expect("enumerated programs parse");
                let program = resolve(&parsed, sys).expect("enumerated programs resolve");
                out.push(Enumerated { source, program });
            }
        }
    }
    out
}
