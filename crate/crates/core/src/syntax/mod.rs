//! Surface syntax: expression representation, lexer and parser.

pub mod expr;
pub mod lexer;
pub mod parser;

pub use expr::{
    ArithOp, BuiltinCall, Case, Cell, CmpOp, Expr, ForDir, FunVal, FunctionVal, HostException,
    HostFn, Pattern,
};
pub use lexer::{lex, LexError, Position, Token, TokenKind};
pub use parser::{parse_expr, parse_program, ParseError};
