//! Rendering steps as source text and deciding which steps to print.

pub mod format;
pub mod pretty;
pub mod trace;

pub use format::{format_line, strip_ansi};
pub use pretty::{render, render_plain, Rendered};
pub use trace::{emit_trace, Arrow, EmittedLine, TraceOutcome};

use crate::eval::LastOp;

#[derive(Debug, Clone)]
pub struct RenderOptions {
    /// Print every engine step; all elision off.
    pub show_all: bool,
    pub fast_curry: bool,
    pub side_lets: bool,
    pub elide_arith: bool,
    pub elide_boolean: bool,
    pub elide_comparison: bool,
    pub elide_var_lookup: bool,
    pub elide_if_bool: bool,
    pub elide_inside_builtin: bool,
    pub underline_redex: bool,
    pub ansi: bool,
    /// Wrap lines at this many columns (0 or absent: no wrapping).
    pub width: Option<usize>,
    /// Render every structure item each step, not just the current one.
    pub show_all_items: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            show_all: false,
            fast_curry: false,
            side_lets: false,
            elide_arith: true,
            elide_boolean: true,
            elide_comparison: true,
            elide_var_lookup: true,
            elide_if_bool: true,
            elide_inside_builtin: true,
            underline_redex: true,
            ansi: false,
            width: None,
            show_all_items: false,
        }
    }
}

impl RenderOptions {
    /// Options for a full, unelided trace.
    pub fn show_all() -> RenderOptions {
        RenderOptions {
            show_all: true,
            elide_arith: false,
            elide_boolean: false,
            elide_comparison: false,
            elide_var_lookup: false,
            elide_if_bool: false,
            elide_inside_builtin: false,
            ..RenderOptions::default()
        }
    }

    fn elidable(&self, op: LastOp) -> bool {
        match op {
            LastOp::Arith => self.elide_arith,
            LastOp::Boolean => self.elide_boolean,
            LastOp::Comparison => self.elide_comparison,
            LastOp::VarLookup => self.elide_var_lookup,
            LastOp::InsideBuiltIn => self.elide_inside_builtin,
            LastOp::IfBool | LastOp::Other => false,
        }
    }
}

/// One rendered step of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLine {
    pub text: String,
    /// Hoisted side-let bindings, empty when none.
    pub gutter: String,
    /// Span of the next redex within `text`, absent on the final value line.
    pub redex_span: Option<(usize, usize)>,
    pub step_index: usize,
    /// Classification of the step that produced this state; absent for the
    /// first state of an item.
    pub last_op: Option<LastOp>,
}

impl TraceLine {
    /// The plain text searches run over: gutter prepended to the state.
    pub fn composed(&self) -> String {
        if self.gutter.is_empty() {
            self.text.clone()
        } else {
            format!("{}  {}", self.gutter, self.text)
        }
    }

    /// Byte offset of `text` within `composed()`.
    pub fn text_offset(&self) -> usize {
        if self.gutter.is_empty() {
            0
        } else {
            self.gutter.len() + 2
        }
    }
}

/// Decide whether to print a state, from the classification of the step that
/// produced it (`produced`, absent for the first state) and of the step about
/// to happen (`peeked`). A state is hidden only when it sits inside a run of
/// elidable steps: both neighbours elidable, neither endpoint a value nor the
/// decided branch of a conditional.
pub fn should_print(
    produced: Option<LastOp>,
    current_is_value: bool,
    peeked: LastOp,
    opts: &RenderOptions,
) -> bool {
    if opts.show_all {
        return true;
    }
    let Some(produced) = produced else {
        return true; // the first state always prints
    };
    if current_is_value {
        return true; // the final state always prints
    }
    if opts.elide_if_bool && peeked == LastOp::IfBool {
        // About to take an already-decided branch: `if true`, `if false`.
        return false;
    }
    !(opts.elidable(produced) && opts.elidable(peeked))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_and_last_always_print() {
        let opts = RenderOptions::default();
        assert!(should_print(None, false, LastOp::Arith, &opts));
        assert!(should_print(
            Some(LastOp::Arith),
            true,
            LastOp::Other,
            &opts
        ));
    }

    #[test]
    fn arith_runs_collapse() {
        let opts = RenderOptions::default();
        // interior of an arithmetic chain
        assert!(!should_print(
            Some(LastOp::Arith),
            false,
            LastOp::Arith,
            &opts
        ));
        // boundary to a non-elidable step prints
        assert!(should_print(
            Some(LastOp::Arith),
            false,
            LastOp::Other,
            &opts
        ));
    }

    #[test]
    fn decided_branches_are_hidden() {
        let opts = RenderOptions::default();
        assert!(!should_print(
            Some(LastOp::Comparison),
            false,
            LastOp::IfBool,
            &opts
        ));
        let no_ifbool = RenderOptions {
            elide_if_bool: false,
            ..RenderOptions::default()
        };
        assert!(should_print(
            Some(LastOp::Comparison),
            false,
            LastOp::IfBool,
            &no_ifbool
        ));
    }

    #[test]
    fn show_all_prints_everything() {
        let opts = RenderOptions::show_all();
        assert!(should_print(
            Some(LastOp::Arith),
            false,
            LastOp::Arith,
            &opts
        ));
    }
}
