//! The core expression type.
//!
//! A single tree type doubles as program and value: evaluation rewrites an
//! `Expr` into another `Expr` until no redex remains. Record fields are the
//! only mutable positions in the tree; cloning an expression shares the
//! cells, so a mutation performed on one copy is visible through every other.

use std::fmt;
use std::sync::{Arc, Mutex};

/// Arithmetic operators. The dotted variants are the float-only forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    AddF,
    SubF,
    MulF,
    DivF,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "mod",
            ArithOp::AddF => "+.",
            ArithOp::SubF => "-.",
            ArithOp::MulF => "*.",
            ArithOp::DivF => "/.",
        }
    }

    pub fn is_float(self) -> bool {
        matches!(
            self,
            ArithOp::AddF | ArithOp::SubF | ArithOp::MulF | ArithOp::DivF
        )
    }
}

/// Comparison operators (polymorphic structural comparison).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Neq => "<>",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }
}

/// Direction of a `for` loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForDir {
    Up,
    Down,
}

/// A mutable record field cell. Cells are shared between clones of the
/// containing expression, which is what makes an assignment visible in the
/// binding that still displays the record.
pub type Cell = Arc<Mutex<Expr>>;

pub fn new_cell(e: Expr) -> Cell {
    Arc::new(Mutex::new(e))
}

/// One `pattern [when guard] -> body` case of a match, function or try.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub pattern: Pattern,
    pub guard: Option<Expr>,
    pub body: Expr,
}

/// A single-parameter function. `multi` marks a function that was written as
/// a later parameter of a multi-parameter `fun x y ->`, so the printer can
/// re-join the chain. `name` is the definition name attached to closures
/// bound by a `let`, used to print recursive functions by name.
#[derive(Debug, Clone)]
pub struct FunVal {
    pub param: Pattern,
    pub body: Box<Expr>,
    pub name: Option<String>,
    pub multi: bool,
}

/// A `function`-style pattern-matching closure.
#[derive(Debug, Clone)]
pub struct FunctionVal {
    pub cases: Vec<Case>,
    pub name: Option<String>,
}

/// Host function bridged into the interpreted world. Receives the collected
/// argument values (exactly `arity` of them) and either returns a value or
/// signals an in-language exception.
pub type HostFn =
    Arc<dyn Fn(&mut dyn std::io::Write, &[Expr]) -> Result<Expr, HostException> + Send + Sync>;

/// Exception signalled by a host function, converted to `Raise` by the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct HostException {
    pub name: String,
    pub payload: Option<Box<Expr>>,
}

/// A builtin call with its collected arguments. Becomes reducible once all
/// `arity` arguments have been collected.
#[derive(Clone)]
pub struct BuiltinCall {
    pub name: String,
    pub arity: usize,
    pub args: Vec<Expr>,
    pub func: HostFn,
}

impl fmt::Debug for BuiltinCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BuiltinCall")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("args", &self.args)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Expr {
    Unit,
    Int(i64),
    Bool(bool),
    Float(f64),
    Str(String),
    Var(String),
    Op(ArithOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Option<Box<Expr>>),
    /// `let [rec] p = e and ... in body`
    Let(bool, Vec<(Pattern, Expr)>, Box<Expr>),
    /// Top-level `let [rec] p = e and ...` structure item.
    LetDef(bool, Vec<(Pattern, Expr)>),
    Fun(FunVal),
    Function(FunctionVal),
    App(Box<Expr>, Box<Expr>),
    Seq(Box<Expr>, Box<Expr>),
    /// `while cond do body done`; carries pristine copies of the condition
    /// and body so each iteration can restore them.
    While(Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>),
    /// `for v = from to/downto to do body done`; the final component is the
    /// pristine body copy used to restart each iteration.
    For(String, Box<Expr>, ForDir, Box<Expr>, Box<Expr>, Box<Expr>),
    Record(Vec<(String, Cell)>),
    Tuple(Vec<Expr>),
    Cons(Box<Expr>, Box<Expr>),
    Nil,
    Constr(String, Option<Box<Expr>>),
    /// A frozen exception on its way up.
    Raise(String, Option<Box<Expr>>),
    Match(Box<Expr>, Vec<Case>),
    TryWith(Box<Expr>, Vec<Case>),
    /// `exception E` or `exception E of t` structure item; 0 or 1 payload.
    ExceptionDef(String, u8),
    /// `type t = A | B of t | ...` structure item: (tag, payload arity) list.
    TypeDef(Vec<(String, u8)>),
    /// `!e` where `e` evaluates to a `contents` record.
    Deref(Box<Expr>),
    /// `e := e'`: write the `contents` cell of the record `e`.
    Assign(Box<Expr>, Box<Expr>),
    CallBuiltIn(BuiltinCall),
    /// A parsed module: name and structure items.
    Struct(String, Vec<Expr>),
}

/// Structural equality. Record fields compare by current contents, host
/// functions by name and collected arguments.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Unit, Unit) | (Nil, Nil) => true,
            (Int(a), Int(b)) => a == b,
            (Bool(a), Bool(b)) => a == b,
            (Float(a), Float(b)) => a == b || (a.is_nan() && b.is_nan()),
            (Str(a), Str(b)) => a == b,
            (Var(a), Var(b)) => a == b,
            (Op(o1, a1, b1), Op(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (Cmp(o1, a1, b1), Cmp(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (And(a1, b1), And(a2, b2)) | (Or(a1, b1), Or(a2, b2)) => a1 == a2 && b1 == b2,
            (If(c1, t1, e1), If(c2, t2, e2)) => c1 == c2 && t1 == t2 && e1 == e2,
            (Let(r1, b1, e1), Let(r2, b2, e2)) => r1 == r2 && b1 == b2 && e1 == e2,
            (LetDef(r1, b1), LetDef(r2, b2)) => r1 == r2 && b1 == b2,
            (Fun(a), Fun(b)) => a == b,
            (Function(a), Function(b)) => a == b,
            (App(f1, x1), App(f2, x2)) => f1 == f2 && x1 == x2,
            (Seq(a1, b1), Seq(a2, b2)) => a1 == a2 && b1 == b2,
            (While(a1, b1, c1, d1), While(a2, b2, c2, d2)) => {
                a1 == a2 && b1 == b2 && c1 == c2 && d1 == d2
            }
            (For(v1, f1, d1, t1, b1, c1), For(v2, f2, d2, t2, b2, c2)) => {
                v1 == v2 && f1 == f2 && d1 == d2 && t1 == t2 && b1 == b2 && c1 == c2
            }
            (Record(f1), Record(f2)) => {
                f1.len() == f2.len()
                    && f1.iter().zip(f2).all(|((n1, c1), (n2, c2))| {
                        if n1 != n2 {
                            return false;
                        }
                        // shared cells are trivially equal; locking both
                        // sides would deadlock on the same mutex
                        if Arc::ptr_eq(c1, c2) {
                            return true;
                        }
                        match (c1.try_lock(), c2.try_lock()) {
                            (Ok(a), Ok(b)) => *a == *b,
                            // a cell we already hold: cyclic value
                            _ => false,
                        }
                    })
            }
            (Tuple(a), Tuple(b)) => a == b,
            (Cons(h1, t1), Cons(h2, t2)) => h1 == h2 && t1 == t2,
            (Constr(t1, p1), Constr(t2, p2)) => t1 == t2 && p1 == p2,
            (Raise(n1, p1), Raise(n2, p2)) => n1 == n2 && p1 == p2,
            (Match(s1, c1), Match(s2, c2)) | (TryWith(s1, c1), TryWith(s2, c2)) => {
                s1 == s2 && c1 == c2
            }
            (ExceptionDef(n1, a1), ExceptionDef(n2, a2)) => n1 == n2 && a1 == a2,
            (TypeDef(a), TypeDef(b)) => a == b,
            (Deref(a), Deref(b)) => a == b,
            (Assign(l1, r1), Assign(l2, r2)) => l1 == l2 && r1 == r2,
            (CallBuiltIn(a), CallBuiltIn(b)) => a == b,
            (Struct(n1, i1), Struct(n2, i2)) => n1 == n2 && i1 == i2,
            _ => false,
        }
    }
}

impl PartialEq for FunVal {
    fn eq(&self, other: &Self) -> bool {
        self.param == other.param
            && self.body == other.body
            && self.name == other.name
            && self.multi == other.multi
    }
}

impl PartialEq for FunctionVal {
    fn eq(&self, other: &Self) -> bool {
        self.cases == other.cases && self.name == other.name
    }
}

impl PartialEq for BuiltinCall {
    // Host functions are compared by name and collected arguments.
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.arity == other.arity && self.args == other.args
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Any,
    PVar(String),
    PInt(i64),
    PBool(bool),
    PStr(String),
    PUnit,
    PTuple(Vec<Pattern>),
    PCons(Box<Pattern>, Box<Pattern>),
    PNil,
    PConstr(String, Option<Box<Pattern>>),
    POr(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    /// Names bound by this pattern, in left-to-right order.
    pub fn bound_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut Vec<String>) {
        match self {
            Pattern::PVar(n) => out.push(n.clone()),
            Pattern::PTuple(ps) => ps.iter().for_each(|p| p.collect_names(out)),
            Pattern::PCons(h, t) => {
                h.collect_names(out);
                t.collect_names(out);
            }
            Pattern::PConstr(_, Some(p)) => p.collect_names(out),
            // Both arms of an or-pattern bind the same set.
            Pattern::POr(a, _) => a.collect_names(out),
            _ => {}
        }
    }
}

impl Expr {
    pub fn boxed(self) -> Box<Expr> {
        Box::new(self)
    }

    pub fn fun(param: Pattern, body: Expr) -> Expr {
        Expr::Fun(FunVal {
            param,
            body: body.boxed(),
            name: None,
            multi: false,
        })
    }

    pub fn app(f: Expr, x: Expr) -> Expr {
        Expr::App(f.boxed(), x.boxed())
    }

    /// Build a list expression from element expressions.
    pub fn list(items: Vec<Expr>) -> Expr {
        items.into_iter().rev().fold(Expr::Nil, |tail, head| {
            Expr::Cons(head.boxed(), tail.boxed())
        })
    }

    /// The `{contents = e}` record encoding a reference.
    pub fn reference(e: Expr) -> Expr {
        Expr::Record(vec![("contents".to_string(), new_cell(e))])
    }

    /// True if `name` occurs free in `self`. Closure name tags count as
    /// occurrences: a closure printed by name needs its binder kept alive.
    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::Var(v) => v == name,
            Expr::Unit
            | Expr::Int(_)
            | Expr::Bool(_)
            | Expr::Float(_)
            | Expr::Str(_)
            | Expr::Nil
            | Expr::ExceptionDef(..)
            | Expr::TypeDef(_) => false,
            Expr::Op(_, a, b) | Expr::Cmp(_, a, b) => a.mentions(name) || b.mentions(name),
            Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::App(a, b)
            | Expr::Seq(a, b)
            | Expr::Cons(a, b)
            | Expr::Assign(a, b) => a.mentions(name) || b.mentions(name),
            Expr::If(c, t, e) => {
                c.mentions(name) || t.mentions(name) || e.as_ref().is_some_and(|e| e.mentions(name))
            }
            Expr::Let(recursive, bindings, body) => {
                let shadows = bindings
                    .iter()
                    .any(|(p, _)| p.bound_names().iter().any(|n| n == name));
                let in_rhs = if *recursive && shadows {
                    false
                } else {
                    bindings.iter().any(|(_, e)| e.mentions(name))
                };
                in_rhs || (!shadows && body.mentions(name))
            }
            Expr::LetDef(_, bindings) => bindings.iter().any(|(_, e)| e.mentions(name)),
            Expr::Fun(f) => {
                f.name.as_deref() == Some(name)
                    || (!f.param.bound_names().iter().any(|n| n == name) && f.body.mentions(name))
            }
            Expr::Function(f) => {
                f.name.as_deref() == Some(name)
                    || f.cases.iter().any(|c| {
                        if c.pattern.bound_names().iter().any(|n| n == name) {
                            false
                        } else {
                            c.guard.as_ref().is_some_and(|g| g.mentions(name))
                                || c.body.mentions(name)
                        }
                    })
            }
            Expr::While(c, b, c2, b2) => {
                c.mentions(name) || b.mentions(name) || c2.mentions(name) || b2.mentions(name)
            }
            Expr::For(v, from, _, to, body, copy) => {
                from.mentions(name)
                    || to.mentions(name)
                    || (v != name && (body.mentions(name) || copy.mentions(name)))
            }
            Expr::Record(fields) => fields.iter().any(|(_, cell)| match cell.try_lock() {
                Ok(contents) => contents.mentions(name),
                Err(_) => false, // cyclic: already being examined above us
            }),
            Expr::Tuple(items) => items.iter().any(|e| e.mentions(name)),
            Expr::Constr(_, payload) | Expr::Raise(_, payload) => {
                payload.as_ref().is_some_and(|e| e.mentions(name))
            }
            Expr::Match(scrutinee, cases) | Expr::TryWith(scrutinee, cases) => {
                scrutinee.mentions(name)
                    || cases.iter().any(|c| {
                        if c.pattern.bound_names().iter().any(|n| n == name) {
                            false
                        } else {
                            c.guard.as_ref().is_some_and(|g| g.mentions(name))
                                || c.body.mentions(name)
                        }
                    })
            }
            Expr::Deref(e) => e.mentions(name),
            Expr::CallBuiltIn(b) => b.args.iter().any(|e| e.mentions(name)),
            Expr::Struct(_, items) => items.iter().any(|e| e.mentions(name)),
        }
    }

    /// Rename free occurrences of variables according to `map`. Used when a
    /// module is loaded to qualify references to its own top-level names.
    pub fn rename_free(&mut self, map: &std::collections::HashMap<String, String>) {
        if map.is_empty() {
            return;
        }
        match self {
            Expr::Var(v) => {
                if let Some(new) = map.get(v) {
                    *v = new.clone();
                }
            }
            Expr::Unit
            | Expr::Int(_)
            | Expr::Bool(_)
            | Expr::Float(_)
            | Expr::Str(_)
            | Expr::Nil
            | Expr::ExceptionDef(..)
            | Expr::TypeDef(_) => {}
            Expr::Op(_, a, b) | Expr::Cmp(_, a, b) => {
                a.rename_free(map);
                b.rename_free(map);
            }
            Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::App(a, b)
            | Expr::Seq(a, b)
            | Expr::Cons(a, b)
            | Expr::Assign(a, b) => {
                a.rename_free(map);
                b.rename_free(map);
            }
            Expr::If(c, t, e) => {
                c.rename_free(map);
                t.rename_free(map);
                if let Some(e) = e {
                    e.rename_free(map);
                }
            }
            Expr::Let(recursive, bindings, body) => {
                let mut inner = map.clone();
                for (p, _) in bindings.iter() {
                    for n in p.bound_names() {
                        inner.remove(&n);
                    }
                }
                let rhs_map = if *recursive { &inner } else { map };
                for (_, e) in bindings.iter_mut() {
                    e.rename_free(rhs_map);
                }
                body.rename_free(&inner);
            }
            Expr::LetDef(_, bindings) => {
                for (_, e) in bindings.iter_mut() {
                    e.rename_free(map);
                }
            }
            Expr::Fun(f) => {
                let mut inner = map.clone();
                for n in f.param.bound_names() {
                    inner.remove(&n);
                }
                f.body.rename_free(&inner);
            }
            Expr::Function(f) => {
                for c in f.cases.iter_mut() {
                    let mut inner = map.clone();
                    for n in c.pattern.bound_names() {
                        inner.remove(&n);
                    }
                    if let Some(g) = &mut c.guard {
                        g.rename_free(&inner);
                    }
                    c.body.rename_free(&inner);
                }
            }
            Expr::While(c, b, c2, b2) => {
                c.rename_free(map);
                b.rename_free(map);
                c2.rename_free(map);
                b2.rename_free(map);
            }
            Expr::For(v, from, _, to, body, copy) => {
                from.rename_free(map);
                to.rename_free(map);
                let mut inner = map.clone();
                inner.remove(v);
                body.rename_free(&inner);
                copy.rename_free(&inner);
            }
            Expr::Record(fields) => {
                for (_, cell) in fields.iter() {
                    if let Ok(mut contents) = cell.try_lock() {
                        contents.rename_free(map);
                    }
                }
            }
            Expr::Tuple(items) => items.iter_mut().for_each(|e| e.rename_free(map)),
            Expr::Constr(_, payload) | Expr::Raise(_, payload) => {
                if let Some(e) = payload {
                    e.rename_free(map);
                }
            }
            Expr::Match(scrutinee, cases) | Expr::TryWith(scrutinee, cases) => {
                scrutinee.rename_free(map);
                for c in cases.iter_mut() {
                    let mut inner = map.clone();
                    for n in c.pattern.bound_names() {
                        inner.remove(&n);
                    }
                    if let Some(g) = &mut c.guard {
                        g.rename_free(&inner);
                    }
                    c.body.rename_free(&inner);
                }
            }
            Expr::Deref(e) => e.rename_free(map),
            Expr::CallBuiltIn(b) => b.args.iter_mut().for_each(|e| e.rename_free(map)),
            Expr::Struct(_, items) => items.iter_mut().for_each(|e| e.rename_free(map)),
        }
    }
}
