//! Registry of host functions bridged into the interpreted world.
//!
//! Each entry is exposed as a curried chain of functions over `*`-prefixed
//! parameters (which the printer never shows). Application peels one chain
//! layer per step, collecting the argument; the host function runs only when
//! all arguments have been collected.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::expr::{BuiltinCall, FunVal};
use crate::syntax::{Expr, HostException, HostFn, Pattern};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RegistryError {
    #[error("builtin key '{0}' is already registered")]
    DuplicateKey(String),
    #[error("builtin arity must be at least 1")]
    ZeroArity,
}

#[derive(Clone)]
pub struct BuiltinEntry {
    /// Primitive name, `%`-prefixed by convention (e.g. "%print_int").
    pub key: String,
    pub arity: usize,
    /// Name the function is displayed and bound under.
    pub display: String,
    pub func: HostFn,
}

#[derive(Default, Clone)]
pub struct Registry {
    entries: HashMap<String, BuiltinEntry>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    pub fn register(
        &mut self,
        key: &str,
        arity: usize,
        display: &str,
        func: HostFn,
    ) -> Result<(), RegistryError> {
        if arity == 0 {
            return Err(RegistryError::ZeroArity);
        }
        if self.entries.contains_key(key) {
            return Err(RegistryError::DuplicateKey(key.to_string()));
        }
        self.entries.insert(
            key.to_string(),
            BuiltinEntry {
                key: key.to_string(),
                arity,
                display: display.to_string(),
                func,
            },
        );
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&BuiltinEntry> {
        self.entries.get(key)
    }

    /// The curried chain value for an entry, ready to bind in an environment.
    pub fn chain(&self, key: &str) -> Option<Expr> {
        self.get(key).map(build_chain)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }
}

/// Internal parameter names for chain layers: *x, *y, *z, *a3, *a4, ...
fn chain_param(i: usize) -> String {
    match i {
        0 => "*x".to_string(),
        1 => "*y".to_string(),
        2 => "*z".to_string(),
        n => format!("*a{n}"),
    }
}

pub fn build_chain(entry: &BuiltinEntry) -> Expr {
    let core = Expr::CallBuiltIn(BuiltinCall {
        name: entry.display.clone(),
        arity: entry.arity,
        args: Vec::new(),
        func: entry.func.clone(),
    });
    let mut e = core;
    for i in (0..entry.arity).rev() {
        e = Expr::Fun(FunVal {
            param: Pattern::PVar(chain_param(i)),
            body: e.boxed(),
            name: Some(entry.display.clone()),
            multi: false,
        });
    }
    e
}

fn wrong_args(name: &str) -> HostException {
    HostException {
        name: "Invalid_argument".into(),
        payload: Some(Expr::Str(name.to_string()).boxed()),
    }
}

/// Register the native builtins the prelude exposes.
pub fn register_natives(reg: &mut Registry) {
    let print_int: HostFn = Arc::new(|out: &mut dyn Write, args: &[Expr]| match args {
        [Expr::Int(n)] => {
            let _ = write!(out, "{n}");
            let _ = out.flush();
            Ok(Expr::Unit)
        }
        _ => Err(wrong_args("print_int")),
    });
    let print_string: HostFn = Arc::new(|out: &mut dyn Write, args: &[Expr]| match args {
        [Expr::Str(s)] => {
            let _ = write!(out, "{s}");
            let _ = out.flush();
            Ok(Expr::Unit)
        }
        _ => Err(wrong_args("print_string")),
    });
    let print_newline: HostFn = Arc::new(|out: &mut dyn Write, args: &[Expr]| match args {
        [Expr::Unit] => {
            let _ = writeln!(out);
            let _ = out.flush();
            Ok(Expr::Unit)
        }
        _ => Err(wrong_args("print_newline")),
    });
    let make_ref: HostFn = Arc::new(|_: &mut dyn Write, args: &[Expr]| match args {
        [v] => Ok(Expr::reference(v.clone())),
        _ => Err(wrong_args("ref")),
    });
    let failwith: HostFn = Arc::new(|_: &mut dyn Write, args: &[Expr]| match args {
        [Expr::Str(s)] => Err(HostException {
            name: "Failure".into(),
            payload: Some(Expr::Str(s.clone()).boxed()),
        }),
        _ => Err(wrong_args("failwith")),
    });
    let not: HostFn = Arc::new(|_: &mut dyn Write, args: &[Expr]| match args {
        [Expr::Bool(b)] => Ok(Expr::Bool(!b)),
        _ => Err(wrong_args("not")),
    });
    let string_length: HostFn = Arc::new(|_: &mut dyn Write, args: &[Expr]| match args {
        [Expr::Str(s)] => Ok(Expr::Int(s.chars().count() as i64)),
        _ => Err(wrong_args("string_length")),
    });
    let entries: [(&str, usize, &str, HostFn); 7] = [
        ("%print_int", 1, "print_int", print_int),
        ("%print_string", 1, "print_string", print_string),
        ("%print_newline", 1, "print_newline", print_newline),
        ("%makeref", 1, "ref", make_ref),
        ("%failwith", 1, "failwith", failwith),
        ("%boolnot", 1, "not", not),
        ("%string_length", 1, "string_length", string_length),
    ];
    for (key, arity, display, func) in entries {
        reg.register(key, arity, display, func)
            .expect("native builtin registered twice");
    }
}
