//! Shared test support: an independently-written big-step evaluator used as
//! a cross-check oracle, generators for closed pure programs, and capture
//! helpers.

#![allow(dead_code)]

pub mod oracle {
    //! A big-step evaluator with its own value representation and
    //! environment structure, deliberately sharing no code with the
    //! small-step engine beyond the expression type itself.

    use std::rc::Rc;

    use stepml_core::syntax::{ArithOp, Case, CmpOp, Expr, Pattern};

    #[derive(Debug, Clone, PartialEq)]
    pub enum V {
        Int(i64),
        Bool(bool),
        Float(f64),
        Str(String),
        Unit,
        List(Vec<V>),
        Tuple(Vec<V>),
        Constr(String, Option<Box<V>>),
        Closure(Rc<Closure>),
        Cases(Rc<CaseClosure>),
    }

    #[derive(Debug, PartialEq)]
    pub struct Closure {
        pub param: Pattern,
        pub body: Expr,
        pub env: OEnv,
        /// Recursive group to re-install on application.
        pub recs: Vec<(String, Expr)>,
    }

    #[derive(Debug, PartialEq)]
    pub struct CaseClosure {
        pub cases: Vec<Case>,
        pub env: OEnv,
        pub recs: Vec<(String, Expr)>,
    }

    pub type OEnv = Rc<Frame>;

    #[derive(Debug, PartialEq)]
    pub enum Frame {
        Empty,
        Bind(String, V, OEnv),
    }

    fn bind(env: &OEnv, name: String, v: V) -> OEnv {
        Rc::new(Frame::Bind(name, v, env.clone()))
    }

    fn lookup(env: &OEnv, name: &str) -> Option<V> {
        let mut cur = env;
        loop {
            match cur.as_ref() {
                Frame::Empty => return None,
                Frame::Bind(n, v, rest) => {
                    if n == name {
                        return Some(v.clone());
                    }
                    cur = rest;
                }
            }
        }
    }

    #[derive(Debug, Clone, PartialEq)]
    pub enum OErr {
        Exn(String, Option<Box<V>>),
        Stuck(String),
        OutOfFuel,
    }

    pub fn run(e: &Expr) -> Result<V, OErr> {
        let mut fuel = 1_000_000u64;
        eval(&Rc::new(Frame::Empty), e, &mut fuel)
    }

    /// Run a whole program (structure items), returning the last item value.
    pub fn run_program(items: &[Expr]) -> Result<V, OErr> {
        let mut env: OEnv = Rc::new(Frame::Empty);
        let mut fuel = 1_000_000u64;
        let mut last = V::Unit;
        for item in items {
            match item {
                Expr::LetDef(recursive, bindings) => {
                    let (env2, vs) = eval_bindings(&env, *recursive, bindings, &mut fuel)?;
                    env = env2;
                    if let Some(v) = vs.into_iter().last() {
                        last = v;
                    }
                }
                Expr::ExceptionDef(..) | Expr::TypeDef(_) => {}
                other => last = eval(&env, other, &mut fuel)?,
            }
        }
        Ok(last)
    }

    fn eval_bindings(
        env: &OEnv,
        recursive: bool,
        bindings: &[(Pattern, Expr)],
        fuel: &mut u64,
    ) -> Result<(OEnv, Vec<V>), OErr> {
        let mut out = env.clone();
        let mut vals = Vec::new();
        if recursive {
            let recs: Vec<(String, Expr)> = bindings
                .iter()
                .filter_map(|(p, rhs)| match p {
                    Pattern::PVar(n) => Some((n.clone(), rhs.clone())),
                    _ => None,
                })
                .collect();
            for (name, rhs) in &recs {
                let v = close_recursive(env, rhs, &recs)?;
                vals.push(v.clone());
                out = bind(&out, name.clone(), v);
            }
            Ok((out, vals))
        } else {
            for (p, rhs) in bindings {
                let v = eval(env, rhs, fuel)?;
                vals.push(v.clone());
                let bs = match_value(p, &v).ok_or(OErr::Exn("Match_failure".into(), None))?;
                for (n, v) in bs {
                    out = bind(&out, n, v);
                }
            }
            Ok((out, vals))
        }
    }

    fn close_recursive(env: &OEnv, rhs: &Expr, recs: &[(String, Expr)]) -> Result<V, OErr> {
        match rhs {
            Expr::Fun(f) => Ok(V::Closure(Rc::new(Closure {
                param: f.param.clone(),
                body: (*f.body).clone(),
                env: env.clone(),
                recs: recs.to_vec(),
            }))),
            Expr::Function(f) => Ok(V::Cases(Rc::new(CaseClosure {
                cases: f.cases.clone(),
                env: env.clone(),
                recs: recs.to_vec(),
            }))),
            other => Err(OErr::Stuck(format!(
                "let rec right-hand side must be a function, got {other:?}"
            ))),
        }
    }

    fn install_recs(env: &OEnv, recs: &[(String, Expr)]) -> Result<OEnv, OErr> {
        let mut out = env.clone();
        for (name, rhs) in recs {
            let v = close_recursive(env, rhs, recs)?;
            out = bind(&out, name.clone(), v);
        }
        Ok(out)
    }

    pub fn eval(env: &OEnv, e: &Expr, fuel: &mut u64) -> Result<V, OErr> {
        if *fuel == 0 {
            return Err(OErr::OutOfFuel);
        }
        *fuel -= 1;
        match e {
            Expr::Unit => Ok(V::Unit),
            Expr::Int(n) => Ok(V::Int(*n)),
            Expr::Bool(b) => Ok(V::Bool(*b)),
            Expr::Float(f) => Ok(V::Float(*f)),
            Expr::Str(s) => Ok(V::Str(s.clone())),
            Expr::Nil => Ok(V::List(Vec::new())),
            Expr::Var(n) => lookup(env, n).ok_or(OErr::Stuck(format!("unbound {n}"))),
            Expr::Op(op, a, b) => {
                let va = eval(env, a, fuel)?;
                let vb = eval(env, b, fuel)?;
                arith(*op, va, vb)
            }
            Expr::Cmp(op, a, b) => {
                let vb = eval(env, b, fuel)?;
                let va = eval(env, a, fuel)?;
                compare(*op, va, vb)
            }
            Expr::And(a, b) => match eval(env, a, fuel)? {
                V::Bool(false) => Ok(V::Bool(false)),
                V::Bool(true) => eval(env, b, fuel),
                _ => Err(OErr::Stuck("&& on non-bool".into())),
            },
            Expr::Or(a, b) => match eval(env, a, fuel)? {
                V::Bool(true) => Ok(V::Bool(true)),
                V::Bool(false) => eval(env, b, fuel),
                _ => Err(OErr::Stuck("|| on non-bool".into())),
            },
            Expr::If(c, t, els) => match eval(env, c, fuel)? {
                V::Bool(true) => eval(env, t, fuel),
                V::Bool(false) => match els {
                    Some(e) => eval(env, e, fuel),
                    None => Ok(V::Unit),
                },
                _ => Err(OErr::Stuck("if on non-bool".into())),
            },
            Expr::Let(recursive, bindings, body) => {
                let (env2, _) = eval_bindings(env, *recursive, bindings, fuel)?;
                eval(&env2, body, fuel)
            }
            Expr::Fun(f) => Ok(V::Closure(Rc::new(Closure {
                param: f.param.clone(),
                body: (*f.body).clone(),
                env: env.clone(),
                recs: Vec::new(),
            }))),
            Expr::Function(f) => Ok(V::Cases(Rc::new(CaseClosure {
                cases: f.cases.clone(),
                env: env.clone(),
                recs: Vec::new(),
            }))),
            Expr::App(f, x) => {
                let vf = eval(env, f, fuel)?;
                let vx = eval(env, x, fuel)?;
                apply(vf, vx, fuel)
            }
            Expr::Seq(a, b) => {
                match eval(env, a, fuel)? {
                    V::Unit => {}
                    _ => return Err(OErr::Stuck("sequence left side not unit".into())),
                }
                eval(env, b, fuel)
            }
            Expr::Tuple(items) => Ok(V::Tuple(
                items
                    .iter()
                    .map(|e| eval(env, e, fuel))
                    .collect::<Result<_, _>>()?,
            )),
            Expr::Cons(h, t) => {
                let vh = eval(env, h, fuel)?;
                match eval(env, t, fuel)? {
                    V::List(mut items) => {
                        items.insert(0, vh);
                        Ok(V::List(items))
                    }
                    _ => Err(OErr::Stuck("cons onto non-list".into())),
                }
            }
            Expr::Constr(tag, payload) => Ok(V::Constr(
                tag.clone(),
                payload
                    .as_ref()
                    .map(|p| eval(env, p, fuel).map(Box::new))
                    .transpose()?,
            )),
            Expr::Match(scrutinee, cases) => {
                let v = eval(env, scrutinee, fuel)?;
                run_cases(env, &v, cases, fuel)
            }
            Expr::Raise(name, payload) => {
                let p = payload
                    .as_ref()
                    .map(|p| eval(env, p, fuel).map(Box::new))
                    .transpose()?;
                Err(OErr::Exn(name.clone(), p))
            }
            Expr::TryWith(body, cases) => match eval(env, body, fuel) {
                Ok(v) => Ok(v),
                Err(OErr::Exn(name, payload)) => {
                    let as_value = V::Constr(name.clone(), payload.clone());
                    match try_cases(env, &as_value, cases, fuel)? {
                        Some(v) => Ok(v),
                        None => Err(OErr::Exn(name, payload)),
                    }
                }
                Err(other) => Err(other),
            },
            other => Err(OErr::Stuck(format!("oracle does not model {other:?}"))),
        }
    }

    fn apply(vf: V, vx: V, fuel: &mut u64) -> Result<V, OErr> {
        match vf {
            V::Closure(c) => {
                let env = install_recs(&c.env, &c.recs)?;
                let bs =
                    match_value(&c.param, &vx).ok_or(OErr::Exn("Match_failure".into(), None))?;
                let mut env = env;
                for (n, v) in bs {
                    env = bind(&env, n, v);
                }
                eval(&env, &c.body, fuel)
            }
            V::Cases(c) => {
                let env = install_recs(&c.env, &c.recs)?;
                match try_cases(&env, &vx, &c.cases, fuel)? {
                    Some(v) => Ok(v),
                    None => Err(OErr::Exn("Match_failure".into(), None)),
                }
            }
            _ => Err(OErr::Stuck("applied a non-function".into())),
        }
    }

    fn run_cases(env: &OEnv, v: &V, cases: &[Case], fuel: &mut u64) -> Result<V, OErr> {
        match try_cases(env, v, cases, fuel)? {
            Some(out) => Ok(out),
            None => Err(OErr::Exn("Match_failure".into(), None)),
        }
    }

    fn try_cases(env: &OEnv, v: &V, cases: &[Case], fuel: &mut u64) -> Result<Option<V>, OErr> {
        for case in cases {
            let Some(bs) = match_value(&case.pattern, v) else {
                continue;
            };
            let mut env2 = env.clone();
            for (n, v) in bs {
                env2 = bind(&env2, n, v);
            }
            if let Some(guard) = &case.guard {
                match eval(&env2, guard, fuel)? {
                    V::Bool(true) => {}
                    V::Bool(false) => continue,
                    _ => return Err(OErr::Stuck("guard not a bool".into())),
                }
            }
            return Ok(Some(eval(&env2, &case.body, fuel)?));
        }
        Ok(None)
    }

    pub fn match_value(p: &Pattern, v: &V) -> Option<Vec<(String, V)>> {
        let mut out = Vec::new();
        if go(p, v, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    fn go(p: &Pattern, v: &V, out: &mut Vec<(String, V)>) -> bool {
        match (p, v) {
            (Pattern::Any, _) => true,
            (Pattern::PVar(n), _) => {
                out.push((n.clone(), v.clone()));
                true
            }
            (Pattern::PInt(a), V::Int(b)) => a == b,
            (Pattern::PBool(a), V::Bool(b)) => a == b,
            (Pattern::PStr(a), V::Str(b)) => a == b,
            (Pattern::PUnit, V::Unit) => true,
            (Pattern::PNil, V::List(items)) => items.is_empty(),
            (Pattern::PCons(ph, pt), V::List(items)) => {
                if items.is_empty() {
                    return false;
                }
                go(ph, &items[0], out) && go(pt, &V::List(items[1..].to_vec()), out)
            }
            (Pattern::PTuple(ps), V::Tuple(vs)) => {
                ps.len() == vs.len() && ps.iter().zip(vs).all(|(p, v)| go(p, v, out))
            }
            (Pattern::PConstr(t, sub), V::Constr(vt, payload)) => {
                t == vt
                    && match (sub, payload) {
                        (None, None) => true,
                        (Some(p), Some(v)) => go(p, v, out),
                        _ => false,
                    }
            }
            (Pattern::POr(a, b), _) => {
                let mark = out.len();
                if go(a, v, out) {
                    true
                } else {
                    out.truncate(mark);
                    go(b, v, out)
                }
            }
            _ => false,
        }
    }

    fn arith(op: ArithOp, a: V, b: V) -> Result<V, OErr> {
        match (a, b) {
            (V::Int(x), V::Int(y)) => Ok(match op {
                ArithOp::Add => V::Int(x.wrapping_add(y)),
                ArithOp::Sub => V::Int(x.wrapping_sub(y)),
                ArithOp::Mul => V::Int(x.wrapping_mul(y)),
                ArithOp::Div if y == 0 => return Err(OErr::Exn("Division_by_zero".into(), None)),
                ArithOp::Div => V::Int(x.wrapping_div(y)),
                ArithOp::Mod if y == 0 => return Err(OErr::Exn("Division_by_zero".into(), None)),
                ArithOp::Mod => V::Int(x.wrapping_rem(y)),
                _ => return Err(OErr::Stuck("float op on ints".into())),
            }),
            (V::Float(x), V::Float(y)) => Ok(V::Float(match op {
                ArithOp::AddF => x + y,
                ArithOp::SubF => x - y,
                ArithOp::MulF => x * y,
                ArithOp::DivF => x / y,
                _ => return Err(OErr::Stuck("int op on floats".into())),
            })),
            _ => Err(OErr::Stuck("arith on wrong types".into())),
        }
    }

    fn compare(op: CmpOp, a: V, b: V) -> Result<V, OErr> {
        use std::cmp::Ordering;
        fn ord(a: &V, b: &V) -> Result<Ordering, OErr> {
            match (a, b) {
                (V::Int(x), V::Int(y)) => Ok(x.cmp(y)),
                (V::Bool(x), V::Bool(y)) => Ok(x.cmp(y)),
                (V::Str(x), V::Str(y)) => Ok(x.cmp(y)),
                (V::Float(x), V::Float(y)) => Ok(x.total_cmp(y)),
                (V::Unit, V::Unit) => Ok(Ordering::Equal),
                (V::List(xs), V::List(ys)) => {
                    for (x, y) in xs.iter().zip(ys) {
                        match ord(x, y)? {
                            Ordering::Equal => continue,
                            o => return Ok(o),
                        }
                    }
                    Ok(xs.len().cmp(&ys.len()))
                }
                (V::Tuple(xs), V::Tuple(ys)) if xs.len() == ys.len() => {
                    for (x, y) in xs.iter().zip(ys) {
                        match ord(x, y)? {
                            Ordering::Equal => continue,
                            o => return Ok(o),
                        }
                    }
                    Ok(Ordering::Equal)
                }
                (V::Constr(t1, p1), V::Constr(t2, p2)) => {
                    if t1 != t2 {
                        return Ok(t1.cmp(t2));
                    }
                    match (p1, p2) {
                        (None, None) => Ok(Ordering::Equal),
                        (Some(x), Some(y)) => ord(x, y),
                        (None, Some(_)) => Ok(Ordering::Less),
                        (Some(_), None) => Ok(Ordering::Greater),
                    }
                }
                _ => Err(OErr::Stuck("compared incompatible values".into())),
            }
        }
        let o = ord(&a, &b)?;
        Ok(V::Bool(match op {
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Neq => o != Ordering::Equal,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        }))
    }

    /// Convert a small-step result value into the oracle's representation.
    pub fn from_engine(e: &Expr) -> Option<V> {
        match e {
            Expr::Unit => Some(V::Unit),
            Expr::Int(n) => Some(V::Int(*n)),
            Expr::Bool(b) => Some(V::Bool(*b)),
            Expr::Float(f) => Some(V::Float(*f)),
            Expr::Str(s) => Some(V::Str(s.clone())),
            Expr::Nil => Some(V::List(Vec::new())),
            Expr::Cons(h, t) => {
                let vh = from_engine(h)?;
                match from_engine(t)? {
                    V::List(mut items) => {
                        items.insert(0, vh);
                        Some(V::List(items))
                    }
                    _ => None,
                }
            }
            Expr::Tuple(items) => Some(V::Tuple(
                items.iter().map(from_engine).collect::<Option<_>>()?,
            )),
            Expr::Constr(tag, payload) => {
                let p = match payload {
                    None => None,
                    Some(p) => Some(Box::new(from_engine(p)?)),
                };
                Some(V::Constr(tag.clone(), p))
            }
            _ => None,
        }
    }
}

pub mod gen {
    //! Proptest strategies for closed, pure, well-typed programs of ground
    //! type, built over a typed scope so evaluation cannot go wrong except
    //! through division by zero.

    use proptest::prelude::*;
    use stepml_core::syntax::expr::FunVal;
    use stepml_core::syntax::{ArithOp, Case, CmpOp, Expr, Pattern};

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Ty {
        Int,
        Bool,
        ListInt,
        FnIntInt,
    }

    #[derive(Debug, Clone, Default)]
    pub struct Scope(pub Vec<(String, Ty)>);

    impl Scope {
        fn vars_of(&self, ty: Ty) -> Vec<String> {
            self.0
                .iter()
                .filter(|(_, t)| *t == ty)
                .map(|(n, _)| n.clone())
                .collect()
        }

        fn with(&self, name: &str, ty: Ty) -> Scope {
            let mut s = self.clone();
            s.0.push((name.to_string(), ty));
            s
        }

        fn fresh(&self) -> String {
            format!("v{}", self.0.len())
        }
    }

    pub fn int_expr(scope: Scope, depth: u32) -> BoxedStrategy<Expr> {
        let mut leaves = vec![(4u32, (-5i64..20).prop_map(Expr::Int).boxed())];
        let vars = scope.vars_of(Ty::Int);
        if !vars.is_empty() {
            leaves.push((
                3,
                proptest::sample::select(vars).prop_map(Expr::Var).boxed(),
            ));
        }
        let leaf = proptest::strategy::Union::new_weighted(leaves).boxed();
        if depth == 0 {
            return leaf;
        }
        let op = {
            let s = scope.clone();
            (
                prop_oneof![
                    Just(ArithOp::Add),
                    Just(ArithOp::Sub),
                    Just(ArithOp::Mul),
                    Just(ArithOp::Div)
                ],
                int_expr(s.clone(), depth - 1),
                int_expr(s, depth - 1),
            )
                .prop_map(|(op, a, b)| Expr::Op(op, a.boxed(), b.boxed()))
                .boxed()
        };
        let iff = {
            let s = scope.clone();
            (
                bool_expr(s.clone(), depth - 1),
                int_expr(s.clone(), depth - 1),
                int_expr(s, depth - 1),
            )
                .prop_map(|(c, t, e)| Expr::If(c.boxed(), t.boxed(), Some(e.boxed())))
                .boxed()
        };
        let let_int = {
            let s = scope.clone();
            let name = s.fresh();
            let inner = s.with(&name, Ty::Int);
            (int_expr(s, depth - 1), int_expr(inner, depth - 1))
                .prop_map(move |(rhs, body)| {
                    Expr::Let(
                        false,
                        vec![(Pattern::PVar(name.clone()), rhs)],
                        body.boxed(),
                    )
                })
                .boxed()
        };
        let app = {
            let s = scope.clone();
            (fn_expr(s.clone(), depth - 1), int_expr(s, depth - 1))
                .prop_map(|(f, x)| Expr::app(f, x))
                .boxed()
        };
        let let_fn = {
            let s = scope.clone();
            let name = format!("g{}", s.0.len());
            let inner = s.with(&name, Ty::FnIntInt);
            (fn_expr(s, depth - 1), int_expr(inner, depth - 1))
                .prop_map(move |(rhs, body)| {
                    // the parser names closures bound by a let
                    let rhs = match rhs {
                        Expr::Fun(mut f) => {
                            f.name = Some(name.clone());
                            Expr::Fun(f)
                        }
                        other => other,
                    };
                    Expr::Let(
                        false,
                        vec![(Pattern::PVar(name.clone()), rhs)],
                        body.boxed(),
                    )
                })
                .boxed()
        };
        let match_list = {
            let s = scope.clone();
            let h = s.fresh();
            let t = format!("{h}t");
            let cons_scope = s.with(&h, Ty::Int).with(&t, Ty::ListInt);
            (
                list_expr(s.clone(), depth - 1),
                int_expr(s, depth - 1),
                int_expr(cons_scope, depth - 1),
            )
                .prop_map(move |(scrutinee, nil_body, cons_body)| {
                    Expr::Match(
                        scrutinee.boxed(),
                        vec![
                            Case {
                                pattern: Pattern::PNil,
                                guard: None,
                                body: nil_body,
                            },
                            Case {
                                pattern: Pattern::PCons(
                                    Box::new(Pattern::PVar(h.clone())),
                                    Box::new(Pattern::PVar(t.clone())),
                                ),
                                guard: None,
                                body: cons_body,
                            },
                        ],
                    )
                })
                .boxed()
        };
        proptest::strategy::Union::new_weighted(vec![
            (3, leaf),
            (3, op),
            (2, iff),
            (2, let_int),
            (2, app),
            (1, let_fn),
            (1, match_list),
        ])
        .boxed()
    }

    pub fn bool_expr(scope: Scope, depth: u32) -> BoxedStrategy<Expr> {
        let leaf = any::<bool>().prop_map(Expr::Bool).boxed();
        if depth == 0 {
            return leaf;
        }
        let cmp = {
            let s = scope.clone();
            (
                prop_oneof![
                    Just(CmpOp::Eq),
                    Just(CmpOp::Neq),
                    Just(CmpOp::Lt),
                    Just(CmpOp::Gt),
                    Just(CmpOp::Le),
                    Just(CmpOp::Ge)
                ],
                int_expr(s.clone(), depth - 1),
                int_expr(s, depth - 1),
            )
                .prop_map(|(op, a, b)| Expr::Cmp(op, a.boxed(), b.boxed()))
                .boxed()
        };
        let and_or = {
            let s = scope.clone();
            (
                any::<bool>(),
                bool_expr(s.clone(), depth - 1),
                bool_expr(s, depth - 1),
            )
                .prop_map(|(is_and, a, b)| {
                    if is_and {
                        Expr::And(a.boxed(), b.boxed())
                    } else {
                        Expr::Or(a.boxed(), b.boxed())
                    }
                })
                .boxed()
        };
        proptest::strategy::Union::new_weighted(vec![(2, leaf), (3, cmp), (2, and_or)]).boxed()
    }

    pub fn list_expr(scope: Scope, depth: u32) -> BoxedStrategy<Expr> {
        let mut leaves = vec![(2u32, Just(Expr::Nil).boxed())];
        let vars = scope.vars_of(Ty::ListInt);
        if !vars.is_empty() {
            leaves.push((
                3,
                proptest::sample::select(vars).prop_map(Expr::Var).boxed(),
            ));
        }
        let leaf = proptest::strategy::Union::new_weighted(leaves).boxed();
        if depth == 0 {
            return leaf;
        }
        let cons = {
            let s = scope.clone();
            (int_expr(s.clone(), depth - 1), list_expr(s, depth - 1))
                .prop_map(|(h, t)| Expr::Cons(h.boxed(), t.boxed()))
                .boxed()
        };
        proptest::strategy::Union::new_weighted(vec![(2, leaf), (3, cons)]).boxed()
    }

    pub fn fn_expr(scope: Scope, depth: u32) -> BoxedStrategy<Expr> {
        let lambda = {
            let s = scope.clone();
            let p = format!("p{}", s.0.len());
            let inner = s.with(&p, Ty::Int);
            int_expr(inner, depth.saturating_sub(1))
                .prop_map(move |body| {
                    Expr::Fun(FunVal {
                        param: Pattern::PVar(p.clone()),
                        body: body.boxed(),
                        name: None,
                        multi: false,
                    })
                })
                .boxed()
        };
        let vars = scope.vars_of(Ty::FnIntInt);
        if vars.is_empty() {
            return lambda;
        }
        proptest::strategy::Union::new_weighted(vec![
            (2, lambda),
            (
                1,
                proptest::sample::select(vars).prop_map(Expr::Var).boxed(),
            ),
        ])
        .boxed()
    }

    /// Closed programs of ground type (int, bool or int list), depth <= 6.
    pub fn program() -> BoxedStrategy<Expr> {
        prop_oneof![
            int_expr(Scope::default(), 5),
            bool_expr(Scope::default(), 5),
            list_expr(Scope::default(), 5),
        ]
        .boxed()
    }
}

pub mod capture {
    //! Output capture for sessions.

    use std::io::Write;
    use std::sync::{Arc, Mutex};

    #[derive(Clone, Default)]
    pub struct SharedBuf(pub Arc<Mutex<Vec<u8>>>);

    impl SharedBuf {
        pub fn contents(&self) -> String {
            String::from_utf8_lossy(&self.0.lock().unwrap()).into_owned()
        }
    }

    impl Write for SharedBuf {
        fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
            self.0.lock().unwrap().extend_from_slice(buf);
            Ok(buf.len())
        }

        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }

    /// A session writing program output into a shared buffer.
    pub fn session() -> (stepml_core::Session, SharedBuf) {
        let buf = SharedBuf::default();
        let session = stepml_core::Session::with_output(Box::new(buf.clone()));
        (session, buf)
    }
}
