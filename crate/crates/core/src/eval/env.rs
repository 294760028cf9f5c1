//! Lexical scope as an ordered stack of binding groups.

use std::sync::Arc;

use crate::syntax::{Expr, Pattern};

use super::step::match_pattern;

/// One `let`/`let rec` group: patterns and the values bound to them.
#[derive(Debug, Clone)]
pub struct BindingGroup {
    pub recursive: bool,
    pub bindings: Vec<(Pattern, Expr)>,
}

/// Scope stack, innermost group last. Cloning is cheap: groups are shared.
#[derive(Debug, Clone, Default)]
pub struct Env {
    groups: Vec<Arc<BindingGroup>>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn push_group(&mut self, recursive: bool, bindings: Vec<(Pattern, Expr)>) {
        self.groups.push(Arc::new(BindingGroup {
            recursive,
            bindings,
        }));
    }

    /// A copy of this scope extended with one more group.
    pub fn extended(&self, recursive: bool, bindings: Vec<(Pattern, Expr)>) -> Env {
        let mut e = self.clone();
        e.push_group(recursive, bindings);
        e
    }

    /// Find `name` in the innermost group that binds it. A value found in a
    /// recursive group gets the name attached if it is an anonymous closure,
    /// so that it can be printed by name.
    pub fn lookup(&self, name: &str) -> Option<Expr> {
        for group in self.groups.iter().rev() {
            for (pattern, value) in &group.bindings {
                if !pattern.bound_names().iter().any(|n| n == name) {
                    continue;
                }
                let bound = match_pattern(pattern, value)?;
                let found = bound.into_iter().find(|(n, _)| n == name)?.1;
                return Some(if group.recursive {
                    tag_closure_name(found, name)
                } else {
                    found
                });
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[Arc<BindingGroup>] {
        &self.groups
    }

    /// Drop groups pushed after the scope was `len` groups deep.
    pub fn truncate(&mut self, len: usize) {
        self.groups.truncate(len);
    }
}

fn tag_closure_name(e: Expr, name: &str) -> Expr {
    match e {
        Expr::Fun(mut f) => {
            if f.name.is_none() {
                f.name = Some(name.to_string());
            }
            Expr::Fun(f)
        }
        Expr::Function(mut f) => {
            if f.name.is_none() {
                f.name = Some(name.to_string());
            }
            Expr::Function(f)
        }
        other => other,
    }
}
