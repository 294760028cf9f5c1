//! stepml: a small-step tracing interpreter for a small ML-flavoured
//! language. Programs are evaluated one reduction at a time; each step can be
//! printed as source text with the active redex marked, uninteresting steps
//! elided, and the resulting trace searched with a token-based language.

pub mod eval;
pub mod render;
pub mod search;
pub mod syntax;

pub use eval::{is_value, match_pattern, EvalError, LastOp, RunResult, Session, StepOutcome};
pub use render::{emit_trace, render_plain, RenderOptions, TraceLine, TraceOutcome};
pub use search::{compile_pattern, SearchFilter, SearchSpec};
pub use syntax::{parse_expr, parse_program, Expr, ParseError, Pattern};
