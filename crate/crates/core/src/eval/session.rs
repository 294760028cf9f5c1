//! An evaluation session: global scope, builtin registry, output stream and
//! evaluation options. One session drives one program.

use std::collections::HashMap;
use std::io::Write;

use thiserror::Error;

use crate::syntax::{parse_program, Expr, ParseError, Pattern};

use super::builtins::{register_natives, Registry};
use super::env::Env;
use super::step::{self, Ctx, EvalError, LastOp, RunResult, StepOutcome};

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum ModuleError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("module {module} raised {exception}")]
    Init { module: String, exception: String },
}

pub struct Session {
    env: Env,
    registry: Registry,
    out: Box<dyn Write + Send>,
    pub fast_curry: bool,
    pub step_budget: u64,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl Session {
    /// A session with the standard prelude, writing program output to stdout.
    pub fn new() -> Session {
        Session::with_output(Box::new(std::io::stdout()))
    }

    pub fn with_output(out: Box<dyn Write + Send>) -> Session {
        let mut s = Session::bare(out);
        s.load_prelude().expect("prelude must load");
        s
    }

    /// A session with no prelude at all.
    pub fn bare(out: Box<dyn Write + Send>) -> Session {
        Session {
            env: Env::new(),
            registry: Registry::new(),
            out,
            fast_curry: false,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn registry_mut(&mut self) -> &mut Registry {
        &mut self.registry
    }

    /// Install a binding group into the global scope.
    pub fn define(&mut self, recursive: bool, bindings: Vec<(Pattern, Expr)>) {
        self.env.push_group(recursive, bindings);
    }

    /// Bind a registered builtin under `name`.
    pub fn bind_builtin(&mut self, name: &str, key: &str) {
        let chain = self
            .registry
            .chain(key)
            .unwrap_or_else(|| panic!("unknown builtin key {key}"));
        self.env
            .push_group(false, vec![(Pattern::PVar(name.to_string()), chain)]);
    }

    pub fn eval_step(&mut self, e: &Expr) -> Result<StepOutcome, EvalError> {
        let mut ctx = Ctx {
            out: &mut *self.out,
            fast_curry: self.fast_curry,
            peek: false,
        };
        step::eval_step_in(&mut ctx, &self.env, e)
    }

    /// Classify the next reduction without performing it.
    pub fn peek(&self, e: &Expr) -> LastOp {
        step::peek_in(&self.env, e, self.fast_curry)
    }

    /// Classify the next reduction and locate the redex node within `e`.
    pub fn peek_redex(&self, e: &Expr) -> (LastOp, Option<*const Expr>) {
        step::peek_redex(&self.env, e, self.fast_curry)
    }

    /// Run a parsed program: each structure item is evaluated and its
    /// definitions installed. Returns the value of the last item.
    pub fn run_program(&mut self, items: &[Expr]) -> Result<RunResult, EvalError> {
        let mut last = Expr::Unit;
        for item in items {
            match item {
                Expr::ExceptionDef(..) | Expr::TypeDef(_) => continue,
                _ => {}
            }
            match self.run_to_value(item)? {
                RunResult::Value(v) => {
                    if let Expr::LetDef(recursive, bindings) = &v {
                        last = bindings
                            .last()
                            .map(|(_, e)| e.clone())
                            .unwrap_or(Expr::Unit);
                        self.define(*recursive, bindings.clone());
                    } else {
                        last = v;
                    }
                }
                uncaught @ RunResult::Uncaught(..) => return Ok(uncaught),
            }
        }
        Ok(RunResult::Value(last))
    }

    /// Iterate `eval_step` to a value (or an uncaught exception), guarded by
    /// the session's step budget.
    pub fn run_to_value(&mut self, e: &Expr) -> Result<RunResult, EvalError> {
        let mut ctx = Ctx {
            out: &mut *self.out,
            fast_curry: self.fast_curry,
            peek: false,
        };
        match step::run_to_value_in(&mut ctx, &self.env, e.clone(), self.step_budget) {
            Ok(r) => Ok(r),
            Err(step::Signal::Error(e)) => Err(e),
            Err(step::Signal::Exception(name, payload)) => Ok(RunResult::Uncaught(name, payload)),
        }
    }

    /// Load a module: run its structure items, then export its top-level
    /// names qualified as `Name.binding`. References between the module's own
    /// definitions are rewritten to the qualified form, so the exported
    /// values stay resolvable from later files.
    pub fn load_module(&mut self, name: &str, items: Vec<Expr>) -> Result<(), ModuleError> {
        self.load_module_inner(name, items, true)
    }

    fn load_module_inner(
        &mut self,
        name: &str,
        items: Vec<Expr>,
        qualify: bool,
    ) -> Result<(), ModuleError> {
        let depth = self.env.groups().len();
        let mut exports: Vec<(bool, Vec<(Pattern, Expr)>)> = Vec::new();
        for item in items {
            match item {
                Expr::LetDef(recursive, bindings) => {
                    let mut done = Vec::new();
                    for (pattern, rhs) in bindings {
                        let env_bindings = if recursive {
                            let mut b = done.clone();
                            b.push((pattern.clone(), rhs.clone()));
                            Some(b)
                        } else {
                            None
                        };
                        let value = {
                            if let Some(b) = env_bindings {
                                let inner = self.env.extended(true, b);
                                self.run_in(&inner, rhs)?
                            } else {
                                let env = self.env.clone();
                                self.run_in(&env, rhs)?
                            }
                        };
                        let value = match value {
                            RunResult::Value(v) => v,
                            RunResult::Uncaught(exn, _) => {
                                return Err(ModuleError::Init {
                                    module: name.to_string(),
                                    exception: exn,
                                })
                            }
                        };
                        done.push((pattern, value));
                    }
                    self.env.push_group(recursive, done.clone());
                    exports.push((recursive, done));
                }
                Expr::ExceptionDef(..) | Expr::TypeDef(_) => {}
                other => {
                    // Bare expression items run for their effects.
                    match self.run_to_value(&other)? {
                        RunResult::Value(_) => {}
                        RunResult::Uncaught(exn, _) => {
                            return Err(ModuleError::Init {
                                module: name.to_string(),
                                exception: exn,
                            })
                        }
                    }
                }
            }
        }
        if !qualify {
            return Ok(());
        }
        // Replace the module's unqualified bindings with qualified exports.
        self.env.truncate(depth);
        let mut rename: HashMap<String, String> = HashMap::new();
        for (_, bindings) in &exports {
            for (pattern, _) in bindings {
                for n in pattern.bound_names() {
                    rename.insert(n.clone(), format!("{name}.{n}"));
                }
            }
        }
        for (recursive, bindings) in exports {
            let qualified: Vec<(Pattern, Expr)> = bindings
                .into_iter()
                .map(|(pattern, mut value)| {
                    value.rename_free(&rename);
                    (qualify_pattern(pattern, &rename), value)
                })
                .collect();
            self.env.push_group(recursive, qualified);
        }
        Ok(())
    }

    fn run_in(&mut self, env: &Env, e: Expr) -> Result<RunResult, EvalError> {
        let mut ctx = Ctx {
            out: &mut *self.out,
            fast_curry: self.fast_curry,
            peek: false,
        };
        match step::run_to_value_in(&mut ctx, env, e, self.step_budget) {
            Ok(r) => Ok(r),
            Err(step::Signal::Error(e)) => Err(e),
            Err(step::Signal::Exception(name, payload)) => Ok(RunResult::Uncaught(name, payload)),
        }
    }

    /// Load the bundled prelude: native builtins plus a small list library
    /// written in the surface language, exposed as module `List` and as
    /// unqualified aliases.
    pub fn load_prelude(&mut self) -> Result<(), ModuleError> {
        register_natives(&mut self.registry);
        for (name, key) in [
            ("print_int", "%print_int"),
            ("print_string", "%print_string"),
            ("print_newline", "%print_newline"),
            ("ref", "%makeref"),
            ("failwith", "%failwith"),
            ("not", "%boolnot"),
            ("string_length", "%string_length"),
        ] {
            self.bind_builtin(name, key);
        }
        let items = parse_program(PRELUDE_LIST)?;
        // The prelude stays unqualified so traces read `map f l`; the
        // qualified aliases are added alongside.
        self.load_module_inner("List", items.clone(), false)?;
        let unqualified: Vec<String> = items
            .iter()
            .filter_map(|item| match item {
                Expr::LetDef(_, bindings) => {
                    Some(bindings.iter().flat_map(|(p, _)| p.bound_names()))
                }
                _ => None,
            })
            .flatten()
            .collect();
        let mut aliases = Vec::new();
        for n in &unqualified {
            if let Some(v) = self.env.lookup(n) {
                aliases.push((Pattern::PVar(format!("List.{n}")), v));
            }
        }
        if let Some(append) = self.env.lookup("append") {
            aliases.push((Pattern::PVar("@".into()), append));
        }
        self.env.push_group(false, aliases);
        Ok(())
    }
}

fn qualify_pattern(p: Pattern, rename: &HashMap<String, String>) -> Pattern {
    match p {
        Pattern::PVar(n) => {
            let q = rename.get(&n).cloned().unwrap_or(n);
            Pattern::PVar(q)
        }
        Pattern::PTuple(ps) => {
            Pattern::PTuple(ps.into_iter().map(|p| qualify_pattern(p, rename)).collect())
        }
        Pattern::PCons(h, t) => Pattern::PCons(
            Box::new(qualify_pattern(*h, rename)),
            Box::new(qualify_pattern(*t, rename)),
        ),
        Pattern::PConstr(tag, sub) => {
            Pattern::PConstr(tag, sub.map(|p| Box::new(qualify_pattern(*p, rename))))
        }
        other => other,
    }
}

const PRELUDE_LIST: &str = "\
let rec append a b = match a with [] -> b | x::t -> x :: append t b

let rec map f = function [] -> [] | a::l -> let r = f a in r :: map f l

let rec rev l = match l with [] -> [] | x::t -> append (rev t) [x]

let rec length l = match l with [] -> 0 | _::t -> 1 + length t
";
