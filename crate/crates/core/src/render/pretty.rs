//! Pretty-printing expressions back to source text with minimal parentheses,
//! tracking the character span of a designated redex node.

use std::collections::{HashMap, HashSet};

use crate::eval::is_value;
use crate::syntax::expr::FunVal;
use crate::syntax::{Case, Expr, ForDir, Pattern};

// Precedence levels, loosest first. A node is parenthesized when its level
// is below the context it is printed in.
const P_SEQ: u8 = 1;
const P_TUPLE: u8 = 2;
const P_ASSIGN: u8 = 3;
const P_OR: u8 = 4;
const P_AND: u8 = 5;
const P_CMP: u8 = 6;
const P_CONS: u8 = 7;
const P_ADD: u8 = 8;
const P_MUL: u8 = 9;
const P_UNARY: u8 = 10;
const P_APP: u8 = 11;
const P_ATOM: u8 = 12;
const P_BINDER: u8 = 1;
const P_IF: u8 = 2;

pub struct Rendered {
    pub text: String,
    pub gutter: String,
    pub redex_span: Option<(usize, usize)>,
}

/// Render with no display transformations (used for tests, search matching
/// and value printing).
pub fn render_plain(e: &Expr) -> String {
    render(e, false, None).text
}

/// Render `e`, optionally applying the side-let transformations, marking the
/// span of the `redex` node if given.
pub fn render(e: &Expr, side_lets: bool, redex: Option<*const Expr>) -> Rendered {
    let mut plan = HashSet::new();
    let mut gutter_parts: Vec<String> = Vec::new();
    if side_lets {
        mark_hidden_lets(e, &mut plan);
        let mut counts = HashMap::new();
        count_binders(e, &plan, &mut counts);
        build_plan(e, &counts, &mut plan, &mut gutter_parts);
    }
    let mut p = Printer {
        out: String::new(),
        target: redex,
        span: None,
        plan,
    };
    p.expr(e, 0);
    Rendered {
        text: p.out,
        gutter: gutter_parts.join(" "),
        redex_span: p.span,
    }
}

/// Mark the `let` nodes whose bindings the display drops entirely: the
/// definitions of recursive functions (printed by name instead) and dead
/// bindings whose body no longer uses them.
fn mark_hidden_lets(e: &Expr, plan: &mut HashSet<*const Expr>) {
    if let Expr::Let(recursive, bindings, body) = e {
        let hide = if *recursive {
            bindings.iter().all(|(p, rhs)| {
                matches!(p, Pattern::PVar(_)) && matches!(rhs, Expr::Fun(_) | Expr::Function(_))
            })
        } else {
            bindings.iter().all(|(_, rhs)| is_value(rhs))
                && !bindings
                    .iter()
                    .flat_map(|(p, _)| p.bound_names())
                    .any(|n| body.mentions(&n))
        };
        if hide {
            plan.insert(e as *const Expr);
            mark_hidden_lets(body, plan);
            return;
        }
    }
    for_each_child(e, &mut |child| mark_hidden_lets(child, plan));
}

fn for_each_child(e: &Expr, f: &mut impl FnMut(&Expr)) {
    match e {
        Expr::Let(_, bindings, body) => {
            bindings.iter().for_each(|(_, rhs)| f(rhs));
            f(body);
        }
        Expr::LetDef(_, bindings) => bindings.iter().for_each(|(_, rhs)| f(rhs)),
        Expr::Fun(fun) => f(&fun.body),
        Expr::Function(fv) => {
            for c in &fv.cases {
                if let Some(g) = &c.guard {
                    f(g);
                }
                f(&c.body);
            }
        }
        Expr::Match(s, cases) | Expr::TryWith(s, cases) => {
            f(s);
            for c in cases {
                if let Some(g) = &c.guard {
                    f(g);
                }
                f(&c.body);
            }
        }
        Expr::Op(_, a, b)
        | Expr::Cmp(_, a, b)
        | Expr::And(a, b)
        | Expr::Or(a, b)
        | Expr::App(a, b)
        | Expr::Seq(a, b)
        | Expr::Cons(a, b)
        | Expr::Assign(a, b) => {
            f(a);
            f(b);
        }
        Expr::If(c, t, e2) => {
            f(c);
            f(t);
            if let Some(e2) = e2 {
                f(e2);
            }
        }
        Expr::While(a, b, _, _) => {
            f(a);
            f(b);
        }
        Expr::For(_, from, _, to, body, _) => {
            f(from);
            f(to);
            f(body);
        }
        Expr::Tuple(items) | Expr::Struct(_, items) => items.iter().for_each(&mut *f),
        Expr::Record(fields) => {
            for (_, c) in fields {
                if let Ok(contents) = c.try_lock() {
                    f(&contents);
                }
            }
        }
        Expr::Constr(_, Some(p)) | Expr::Raise(_, Some(p)) => f(p),
        Expr::Deref(inner) => f(inner),
        Expr::CallBuiltIn(b) => b.args.iter().for_each(&mut *f),
        _ => {}
    }
}

/// Count binder occurrences of each name in the displayed expression; a
/// side-let is only hoisted when its name has exactly one binder. Bindings
/// of hidden lets are not displayed and do not count.
fn count_binders(e: &Expr, hidden: &HashSet<*const Expr>, counts: &mut HashMap<String, usize>) {
    if hidden.contains(&(e as *const Expr)) {
        if let Expr::Let(_, _, body) = e {
            count_binders(body, hidden, counts);
            return;
        }
    }
    count_binders_here(e, hidden, counts)
}

fn count_binders_here(
    e: &Expr,
    hidden: &HashSet<*const Expr>,
    counts: &mut HashMap<String, usize>,
) {
    let bump = |p: &Pattern, counts: &mut HashMap<String, usize>| {
        for n in p.bound_names() {
            *counts.entry(n).or_insert(0) += 1;
        }
    };
    match e {
        Expr::Let(_, bindings, _) => {
            for (p, _) in bindings {
                bump(p, counts);
            }
        }
        Expr::LetDef(_, bindings) => {
            for (p, _) in bindings {
                bump(p, counts);
            }
        }
        Expr::Fun(f) => {
            if f.name.is_none() {
                bump(&f.param, counts);
            }
        }
        Expr::Function(f) => {
            if f.name.is_none() {
                for c in &f.cases {
                    bump(&c.pattern, counts);
                }
            }
        }
        Expr::Match(_, cases) | Expr::TryWith(_, cases) => {
            for c in cases {
                bump(&c.pattern, counts);
            }
        }
        Expr::For(v, ..) => {
            *counts.entry(v.clone()).or_insert(0) += 1;
        }
        _ => {}
    }
    // Named closures print as their name: parameters inside are invisible.
    match e {
        Expr::Fun(f) if f.name.is_some() => {}
        Expr::Function(f) if f.name.is_some() => {}
        _ => for_each_child(e, &mut |child| count_binders(child, hidden, counts)),
    }
}

/// Decide which `let` nodes to hoist into the gutter or hide, walking in
/// display order so the gutter reads outermost-first.
fn build_plan(
    e: &Expr,
    counts: &HashMap<String, usize>,
    plan: &mut HashSet<*const Expr>,
    gutter: &mut Vec<String>,
) {
    match e {
        Expr::Let(recursive, bindings, body) => {
            if plan.contains(&(e as *const Expr)) {
                build_plan(body, counts, plan, gutter);
                return;
            }
            if !*recursive {
                let hoistable = bindings.iter().all(|(p, rhs)| match p {
                    Pattern::PVar(n) => {
                        counts.get(n).copied() == Some(1) && body.mentions(n) && is_value(rhs)
                    }
                    _ => false,
                });
                if hoistable {
                    for (p, rhs) in bindings {
                        if let Pattern::PVar(n) = p {
                            gutter.push(format!("{n} = {}", render_plain(rhs)));
                        }
                    }
                    plan.insert(e as *const Expr);
                    build_plan(body, counts, plan, gutter);
                    return;
                }
            }
            for (_, rhs) in bindings {
                build_plan(rhs, counts, plan, gutter);
            }
            build_plan(body, counts, plan, gutter);
        }
        Expr::LetDef(_, bindings) => {
            for (_, rhs) in bindings {
                build_plan(rhs, counts, plan, gutter);
            }
        }
        Expr::Op(_, a, b)
        | Expr::Cmp(_, a, b)
        | Expr::And(a, b)
        | Expr::Or(a, b)
        | Expr::App(a, b)
        | Expr::Seq(a, b)
        | Expr::Cons(a, b)
        | Expr::Assign(a, b) => {
            build_plan(a, counts, plan, gutter);
            build_plan(b, counts, plan, gutter);
        }
        Expr::If(c, t, e2) => {
            build_plan(c, counts, plan, gutter);
            build_plan(t, counts, plan, gutter);
            if let Some(e2) = e2 {
                build_plan(e2, counts, plan, gutter);
            }
        }
        Expr::Fun(f) => build_plan(&f.body, counts, plan, gutter),
        Expr::Function(f) => {
            for c in &f.cases {
                if let Some(g) = &c.guard {
                    build_plan(g, counts, plan, gutter);
                }
                build_plan(&c.body, counts, plan, gutter);
            }
        }
        Expr::Match(s, cases) | Expr::TryWith(s, cases) => {
            build_plan(s, counts, plan, gutter);
            for c in cases {
                if let Some(g) = &c.guard {
                    build_plan(g, counts, plan, gutter);
                }
                build_plan(&c.body, counts, plan, gutter);
            }
        }
        Expr::While(a, b, _, _) => {
            build_plan(a, counts, plan, gutter);
            build_plan(b, counts, plan, gutter);
        }
        Expr::For(_, from, _, to, body, _) => {
            build_plan(from, counts, plan, gutter);
            build_plan(to, counts, plan, gutter);
            build_plan(body, counts, plan, gutter);
        }
        Expr::Tuple(items) => items
            .iter()
            .for_each(|e| build_plan(e, counts, plan, gutter)),
        Expr::Constr(_, Some(p)) | Expr::Raise(_, Some(p)) => build_plan(p, counts, plan, gutter),
        Expr::Deref(e) => build_plan(e, counts, plan, gutter),
        Expr::CallBuiltIn(b) => b
            .args
            .iter()
            .for_each(|e| build_plan(e, counts, plan, gutter)),
        _ => {}
    }
}

struct Printer {
    out: String,
    target: Option<*const Expr>,
    span: Option<(usize, usize)>,
    plan: HashSet<*const Expr>,
}

impl Printer {
    fn push(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn expr(&mut self, e: &Expr, ctx: u8) {
        let marking = self.target == Some(e as *const Expr);
        let start = self.out.len();
        self.dispatch(e, ctx);
        if marking {
            self.span = Some((start, self.out.len()));
        }
    }

    fn dispatch(&mut self, e: &Expr, ctx: u8) {
        if self.plan.contains(&(e as *const Expr)) {
            if let Expr::Let(_, _, body) = e {
                self.expr(body, ctx);
                return;
            }
        }
        match e {
            Expr::Unit => self.push("()"),
            Expr::Int(n) => {
                if *n < 0 {
                    self.wrap(ctx, P_UNARY, |p| p.push(&n.to_string()));
                } else {
                    self.push(&n.to_string());
                }
            }
            Expr::Bool(b) => self.push(if *b { "true" } else { "false" }),
            Expr::Float(f) => {
                let neg = *f < 0.0;
                let level = if neg { P_UNARY } else { P_ATOM };
                self.wrap(ctx, level, |p| p.push(&float_text(*f)));
            }
            Expr::Str(s) => {
                let escaped = escape_string(s);
                self.push(&escaped);
            }
            Expr::Var(v) => self.push(v),
            Expr::Nil => self.push("[]"),

            Expr::Op(op, a, b) => {
                let level = match op.symbol() {
                    "+" | "-" | "+." | "-." => P_ADD,
                    _ => P_MUL,
                };
                self.wrap(ctx, level, |p| {
                    p.expr(a, level);
                    p.push(&format!(" {} ", op.symbol()));
                    p.expr(b, level + 1);
                });
            }
            Expr::Cmp(op, a, b) => self.wrap(ctx, P_CMP, |p| {
                p.expr(a, P_CMP);
                p.push(&format!(" {} ", op.symbol()));
                p.expr(b, P_CMP + 1);
            }),
            Expr::And(a, b) => self.wrap(ctx, P_AND, |p| {
                p.expr(a, P_AND + 1);
                p.push(" && ");
                p.expr(b, P_AND);
            }),
            Expr::Or(a, b) => self.wrap(ctx, P_OR, |p| {
                p.expr(a, P_OR + 1);
                p.push(" || ");
                p.expr(b, P_OR);
            }),
            Expr::Seq(a, b) => self.wrap(ctx, P_SEQ, |p| {
                p.expr(a, P_SEQ + 1);
                p.push("; ");
                p.expr(b, P_SEQ);
            }),
            Expr::Assign(l, r) => self.wrap(ctx, P_ASSIGN, |p| {
                p.expr(l, P_ASSIGN + 1);
                p.push(" := ");
                p.expr(r, P_ASSIGN);
            }),
            Expr::Deref(inner) => self.wrap(ctx, P_UNARY, |p| {
                p.push("!");
                p.expr(inner, P_ATOM);
            }),

            Expr::If(c, t, els) => self.wrap(ctx, P_IF, |p| {
                p.push("if ");
                p.expr(c, P_IF);
                p.push(" then ");
                p.expr(t, if els.is_some() { P_IF + 1 } else { P_IF });
                if let Some(els) = els {
                    p.push(" else ");
                    p.expr(els, P_IF);
                }
            }),

            Expr::Let(recursive, bindings, body) => self.wrap(ctx, P_BINDER, |p| {
                p.let_bindings("let", *recursive, bindings);
                p.push(" in ");
                p.expr(body, P_SEQ);
            }),

            Expr::LetDef(recursive, bindings) => {
                if let [(Pattern::Any, rhs)] = bindings.as_slice() {
                    // A wrapped bare expression item displays as itself.
                    self.expr(rhs, ctx);
                } else {
                    self.wrap(ctx, P_BINDER, |p| {
                        p.let_bindings("let", *recursive, bindings);
                    });
                }
            }

            Expr::Fun(f) => {
                if let Some(name) = &f.name {
                    self.push(name);
                    return;
                }
                self.wrap(ctx, P_BINDER, |p| {
                    let (params, body) = collect_params(f);
                    p.push("fun");
                    for param in params {
                        p.push(" ");
                        p.pattern(&param, 6);
                    }
                    p.push(" -> ");
                    p.expr(body, P_SEQ);
                });
            }

            Expr::Function(f) => {
                if let Some(name) = &f.name {
                    self.push(name);
                    return;
                }
                self.wrap(ctx, P_BINDER, |p| {
                    p.push("function ");
                    p.cases(&f.cases);
                });
            }

            Expr::App(f, x) => {
                // `a @ b` prints as the infix it was parsed from.
                if let Expr::App(inner, a) = f.as_ref() {
                    if matches!(inner.as_ref(), Expr::Var(v) if v == "@") {
                        self.wrap(ctx, P_CONS, |p| {
                            p.expr(a, P_CONS + 1);
                            p.push(" @ ");
                            p.expr(x, P_CONS);
                        });
                        return;
                    }
                }
                self.wrap(ctx, P_APP, |p| {
                    p.expr(f, P_APP);
                    p.push(" ");
                    p.expr(x, P_ATOM);
                });
            }

            Expr::While(c, b, _, _) => {
                self.push("while ");
                self.expr(c, P_TUPLE);
                self.push(" do ");
                self.expr(b, P_SEQ);
                self.push(" done");
            }
            Expr::For(v, from, dir, to, body, _) => {
                self.push("for ");
                self.push(v);
                self.push(" = ");
                self.expr(from, P_TUPLE);
                self.push(match dir {
                    ForDir::Up => " to ",
                    ForDir::Down => " downto ",
                });
                self.expr(to, P_TUPLE);
                self.push(" do ");
                self.expr(body, P_SEQ);
                self.push(" done");
            }

            Expr::Record(fields) => {
                self.push("{");
                for (i, (name, cell)) in fields.iter().enumerate() {
                    if i > 0 {
                        self.push("; ");
                    }
                    self.push(name);
                    self.push(" = ");
                    match cell.try_lock() {
                        Ok(contents) => self.expr(&contents, P_ASSIGN),
                        Err(_) => self.push("<cycle>"),
                    }
                }
                self.push("}");
            }
            Expr::Tuple(items) => {
                self.push("(");
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.push(", ");
                    }
                    self.expr(item, P_ASSIGN);
                }
                self.push(")");
            }
            Expr::Cons(..) => {
                let (items, tail) = spine(e);
                if tail.is_none() {
                    self.push("[");
                    for (i, item) in items.iter().enumerate() {
                        if i > 0 {
                            self.push("; ");
                        }
                        self.expr(item, P_ASSIGN);
                    }
                    self.push("]");
                } else {
                    let Expr::Cons(h, t) = e else { unreachable!() };
                    self.wrap(ctx, P_CONS, |p| {
                        p.expr(h, P_CONS + 1);
                        p.push(" :: ");
                        p.expr(t, P_CONS);
                    });
                }
            }
            Expr::Constr(tag, payload) => match payload {
                None => self.push(tag),
                Some(p) => self.wrap(ctx, P_APP, |pr| {
                    pr.push(tag);
                    pr.push(" ");
                    pr.expr(p, P_ATOM);
                }),
            },
            Expr::Raise(name, payload) => self.wrap(ctx, P_APP, |p| {
                p.push("raise ");
                match payload {
                    None => p.push(name),
                    Some(payload) => {
                        p.push("(");
                        p.push(name);
                        p.push(" ");
                        p.expr(payload, P_ATOM);
                        p.push(")");
                    }
                }
            }),

            Expr::Match(s, cases) => self.wrap(ctx, P_BINDER, |p| {
                p.push("match ");
                p.expr(s, P_SEQ);
                p.push(" with ");
                p.cases(cases);
            }),
            Expr::TryWith(b, cases) => self.wrap(ctx, P_BINDER, |p| {
                p.push("try ");
                p.expr(b, P_SEQ);
                p.push(" with ");
                p.cases(cases);
            }),

            Expr::ExceptionDef(name, arity) => {
                self.push("exception ");
                self.push(name);
                if *arity > 0 {
                    self.push(" of _");
                }
            }
            Expr::TypeDef(variants) => {
                self.push("type _ = ");
                for (i, (tag, arity)) in variants.iter().enumerate() {
                    if i > 0 {
                        self.push(" | ");
                    }
                    self.push(tag);
                    if *arity > 0 {
                        self.push(" of _");
                    }
                }
            }

            Expr::CallBuiltIn(call) => {
                if call.args.is_empty() {
                    self.push(&call.name);
                } else {
                    self.wrap(ctx, P_APP, |p| {
                        p.push(&call.name);
                        for arg in &call.args {
                            p.push(" ");
                            p.expr(arg, P_ATOM);
                        }
                    });
                }
            }

            Expr::Struct(_, items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.push("\n\n");
                    }
                    self.expr(item, 0);
                }
            }
        }
    }

    fn wrap(&mut self, ctx: u8, level: u8, body: impl FnOnce(&mut Printer)) {
        if level < ctx {
            self.push("(");
            body(self);
            self.push(")");
        } else {
            body(self);
        }
    }

    fn let_bindings(&mut self, kw: &str, recursive: bool, bindings: &[(Pattern, Expr)]) {
        self.push(kw);
        if recursive {
            self.push(" rec");
        }
        for (i, (pattern, rhs)) in bindings.iter().enumerate() {
            self.push(if i == 0 { " " } else { " and " });
            self.binding(pattern, rhs);
        }
    }

    /// One binding with `let f x = e` sugar for closures defined here.
    fn binding(&mut self, pattern: &Pattern, rhs: &Expr) {
        if let Pattern::PVar(name) = pattern {
            match rhs {
                Expr::Fun(f) if f.name.as_deref() == Some(name) || f.name.is_none() => {
                    let (params, body) = collect_params(f);
                    self.push(name);
                    for param in params {
                        self.push(" ");
                        self.pattern(&param, 6);
                    }
                    self.push(" = ");
                    self.expr(body, P_SEQ);
                    return;
                }
                Expr::Function(f) if f.name.as_deref() == Some(name) || f.name.is_none() => {
                    self.push(name);
                    self.push(" = function ");
                    self.cases(&f.cases);
                    return;
                }
                _ => {}
            }
        }
        self.pattern(pattern, 1);
        self.push(" = ");
        self.expr(rhs, P_SEQ);
    }

    fn cases(&mut self, cases: &[Case]) {
        for (i, case) in cases.iter().enumerate() {
            if i > 0 {
                self.push(" | ");
            }
            self.pattern(&case.pattern, 1);
            if let Some(guard) = &case.guard {
                self.push(" when ");
                self.expr(guard, P_ASSIGN);
            }
            self.push(" -> ");
            let last = i + 1 == cases.len();
            if !last && ends_with_cases(&case.body) {
                self.push("(");
                self.expr(&case.body, 0);
                self.push(")");
            } else {
                self.expr(&case.body, P_SEQ);
            }
        }
    }

    // Pattern precedence: or (1) < tuple (2) < cons (3) < constr (5) < atom.
    fn pattern(&mut self, p: &Pattern, ctx: u8) {
        match p {
            Pattern::Any => self.push("_"),
            Pattern::PVar(n) => self.push(n),
            Pattern::PInt(n) => {
                if *n < 0 && ctx > 3 {
                    self.push(&format!("({n})"));
                } else {
                    self.push(&n.to_string());
                }
            }
            Pattern::PBool(b) => self.push(if *b { "true" } else { "false" }),
            Pattern::PStr(s) => {
                let escaped = escape_string(s);
                self.push(&escaped);
            }
            Pattern::PUnit => self.push("()"),
            Pattern::PTuple(ps) => {
                self.push("(");
                for (i, sub) in ps.iter().enumerate() {
                    if i > 0 {
                        self.push(", ");
                    }
                    self.pattern(sub, 3);
                }
                self.push(")");
            }
            Pattern::PCons(h, t) => {
                if let Some(items) = pattern_list(p) {
                    self.push("[");
                    for (i, sub) in items.iter().enumerate() {
                        if i > 0 {
                            self.push("; ");
                        }
                        self.pattern(sub, 2);
                    }
                    self.push("]");
                    return;
                }
                if ctx > 3 {
                    self.push("(");
                }
                self.pattern(h, 4);
                self.push("::");
                self.pattern(t, 3);
                if ctx > 3 {
                    self.push(")");
                }
            }
            Pattern::PNil => self.push("[]"),
            Pattern::PConstr(tag, sub) => match sub {
                None => self.push(tag),
                Some(sub) => {
                    if ctx > 5 {
                        self.push("(");
                    }
                    self.push(tag);
                    self.push(" ");
                    self.pattern(sub, 6);
                    if ctx > 5 {
                        self.push(")");
                    }
                }
            },
            Pattern::POr(a, b) => {
                if ctx > 1 {
                    self.push("(");
                }
                self.pattern(a, 2);
                self.push(" | ");
                self.pattern(b, 1);
                if ctx > 1 {
                    self.push(")");
                }
            }
        }
    }
}

/// Parameters of a multi-parameter `fun x y -> ...` chain.
fn collect_params(f: &FunVal) -> (Vec<Pattern>, &Expr) {
    let mut params = vec![f.param.clone()];
    let mut body: &Expr = &f.body;
    while let Expr::Fun(inner) = body {
        if !inner.multi {
            break;
        }
        params.push(inner.param.clone());
        body = &inner.body;
    }
    (params, body)
}

/// List spine of a cons chain: elements plus the non-nil tail, if any.
fn spine(e: &Expr) -> (Vec<&Expr>, Option<&Expr>) {
    let mut items = Vec::new();
    let mut cur = e;
    loop {
        match cur {
            Expr::Cons(h, t) => {
                items.push(h.as_ref());
                cur = t;
            }
            Expr::Nil => return (items, None),
            other => return (items, Some(other)),
        }
    }
}

fn pattern_list(p: &Pattern) -> Option<Vec<&Pattern>> {
    let mut items = Vec::new();
    let mut cur = p;
    loop {
        match cur {
            Pattern::PCons(h, t) => {
                items.push(h.as_ref());
                cur = t;
            }
            Pattern::PNil => return Some(items),
            _ => return None,
        }
    }
}

/// Would this expression, printed without parentheses, swallow a following
/// `| pattern -> ...` into its own cases? (Named closures print as their
/// name, so they cannot.)
fn ends_with_cases(e: &Expr) -> bool {
    match e {
        Expr::Match(..) | Expr::TryWith(..) => true,
        Expr::Function(f) => f.name.is_none(),
        Expr::Let(_, _, body) => ends_with_cases(body),
        Expr::Fun(f) => f.name.is_none() && ends_with_cases(&f.body),
        Expr::Seq(_, b) => ends_with_cases(b),
        Expr::If(_, t, None) => ends_with_cases(t),
        Expr::If(_, _, Some(e)) => ends_with_cases(e),
        _ => false,
    }
}

fn float_text(f: f64) -> String {
    if f.is_nan() {
        "nan".to_string()
    } else if f.is_infinite() {
        if f > 0.0 {
            "infinity".to_string()
        } else {
            "neg_infinity".to_string()
        }
    } else if f == f.trunc() {
        format!("{f:.0}.")
    } else {
        format!("{f}")
    }
}

fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
