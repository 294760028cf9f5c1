//! The small-step engine: value testing, single-step reduction, peeking,
//! pattern matching, the exception protocol, builtins and module loading.

pub mod builtins;
pub mod env;
pub mod session;
pub mod step;

pub use builtins::{BuiltinEntry, Registry, RegistryError};
pub use env::{BindingGroup, Env};
pub use session::{ModuleError, Session, DEFAULT_STEP_BUDGET};
pub use step::{
    apply_fast_curry, is_value, match_pattern, peek_in, peek_redex, EvalError, LastOp, MatchResult,
    RunResult, StepOutcome,
};
