//! Recursive-descent parser over the token stream.

use std::collections::HashSet;

use thiserror::Error;

use super::expr::{ArithOp, Case, CmpOp, Expr, ForDir, FunVal, FunctionVal, Pattern};
use super::lexer::{lex, LexError, Position, Token, TokenKind};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("parse error at {position}: expected {expected}, found {found}")]
    Unexpected {
        position: Position,
        expected: String,
        found: String,
    },
    #[error("parse error at {position}: {message}")]
    Invalid { position: Position, message: String },
}

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

/// Parse a whole program into structure items. A bare top-level expression is
/// wrapped as `let _ = e` so every item is uniformly a definition.
pub fn parse_program(source: &str) -> Result<Vec<Expr>, ParseError> {
    let mut p = Parser::new(lex(source)?);
    let mut items = Vec::new();
    while !p.at_end() {
        items.push(p.structure_item()?);
    }
    Ok(items)
}

/// Parse a single expression, requiring the whole input to be consumed.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(lex(source)?);
    let e = p.seq_expr()?;
    if !p.at_end() {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_text(&self) -> &str {
        self.peek().map(|t| t.text.as_str()).unwrap_or("")
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.pos + n)
    }

    fn last_position(&self) -> Position {
        self.tokens
            .last()
            .map(|t| t.position)
            .unwrap_or(Position { line: 1, column: 1 })
    }

    fn position(&self) -> Position {
        self.peek()
            .map(|t| t.position)
            .unwrap_or(self.last_position())
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Unexpected {
            position: self.position(),
            expected: expected.to_string(),
            found: self
                .peek()
                .map(|t| format!("'{}'", t.text))
                .unwrap_or_else(|| "end of input".to_string()),
        }
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.peek_text() == text {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> Result<(), ParseError> {
        if self.eat(text) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{text}'")))
        }
    }

    fn is_binder_start(&self) -> bool {
        matches!(
            self.peek_text(),
            "let" | "fun" | "function" | "match" | "try" | "if" | "for" | "while"
        )
    }

    // ---- structure items ----

    fn structure_item(&mut self) -> Result<Expr, ParseError> {
        match self.peek_text() {
            "exception" => {
                self.bump();
                let name = self.constructor_name()?;
                let arity = if self.eat("of") {
                    self.type_payload()?;
                    1
                } else {
                    0
                };
                Ok(Expr::ExceptionDef(name, arity))
            }
            "type" => {
                self.bump();
                // type name = A | B of t | ...
                self.ident()?;
                self.expect("=")?;
                let mut variants = Vec::new();
                self.eat("|");
                loop {
                    let tag = self.constructor_name()?;
                    let arity = if self.eat("of") {
                        self.type_payload()?;
                        1
                    } else {
                        0
                    };
                    variants.push((tag, arity));
                    if !self.eat("|") {
                        break;
                    }
                }
                Ok(Expr::TypeDef(variants))
            }
            "let" => {
                self.bump();
                let recursive = self.eat("rec");
                let bindings = self.bindings(recursive)?;
                if self.eat("in") {
                    // This was a bare expression item starting with let.
                    let body = self.seq_expr()?;
                    Ok(wrap_bare(Expr::Let(recursive, bindings, body.boxed())))
                } else {
                    Ok(Expr::LetDef(recursive, bindings))
                }
            }
            _ => {
                let e = self.seq_expr()?;
                Ok(wrap_bare(e))
            }
        }
    }

    fn type_payload(&mut self) -> Result<(), ParseError> {
        // Payload types are not checked; accept a lowercase type name.
        self.ident()?;
        Ok(())
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => Ok(self.bump().unwrap().text),
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn constructor_name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(t)
                if t.kind == TokenKind::Ident
                    && t.text
                        .chars()
                        .next()
                        .is_some_and(|c| c.is_ascii_uppercase()) =>
            {
                Ok(self.bump().unwrap().text)
            }
            _ => Err(self.unexpected("capitalized constructor name")),
        }
    }

    // ---- bindings ----

    fn bindings(&mut self, recursive: bool) -> Result<Vec<(Pattern, Expr)>, ParseError> {
        let mut out = Vec::new();
        loop {
            out.push(self.binding(recursive)?);
            if !self.eat("and") {
                break;
            }
        }
        Ok(out)
    }

    /// One `p = e` binding, with `let f x y = e` sugar for functions.
    fn binding(&mut self, recursive: bool) -> Result<(Pattern, Expr), ParseError> {
        let position = self.position();
        let lhs = self.pattern()?;
        if let Pattern::PVar(name) = &lhs {
            // Parameter atoms before '=' turn this into a function binding.
            let mut params = Vec::new();
            while self.peek_text() != "=" && self.is_pattern_atom_start() {
                params.push(self.pattern_atom()?);
            }
            self.expect("=")?;
            let body = self.seq_expr()?;
            if params.is_empty() {
                let body = name_closure(body, name);
                return Ok((lhs, body));
            }
            let f = name_closure(fun_chain(params, body), name);
            return Ok((lhs, f));
        }
        if recursive {
            return Err(ParseError::Invalid {
                position,
                message: "let rec binding must bind a variable".into(),
            });
        }
        self.expect("=")?;
        let rhs = self.seq_expr()?;
        Ok((lhs, rhs))
    }

    // ---- expressions ----

    pub fn seq_expr(&mut self) -> Result<Expr, ParseError> {
        let head = self.tuple_or_binder()?;
        if self.eat(";") {
            let rest = self.seq_expr()?;
            Ok(Expr::Seq(head.boxed(), rest.boxed()))
        } else {
            Ok(head)
        }
    }

    fn tuple_or_binder(&mut self) -> Result<Expr, ParseError> {
        if self.is_binder_start() {
            self.binder_expr()
        } else {
            self.tuple_expr()
        }
    }

    fn binder_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek_text() {
            "let" => {
                self.bump();
                let recursive = self.eat("rec");
                let bindings = self.bindings(recursive)?;
                self.expect("in")?;
                let body = self.seq_expr()?;
                Ok(Expr::Let(recursive, bindings, body.boxed()))
            }
            "fun" => {
                self.bump();
                let mut params = vec![self.pattern_atom()?];
                while self.is_pattern_atom_start() {
                    params.push(self.pattern_atom()?);
                }
                self.expect("->")?;
                let body = self.seq_expr()?;
                Ok(fun_chain(params, body))
            }
            "function" => {
                self.bump();
                let cases = self.cases()?;
                Ok(Expr::Function(FunctionVal { cases, name: None }))
            }
            "match" => {
                self.bump();
                let scrutinee = self.seq_expr()?;
                self.expect("with")?;
                let cases = self.cases()?;
                Ok(Expr::Match(scrutinee.boxed(), cases))
            }
            "try" => {
                self.bump();
                let body = self.seq_expr()?;
                self.expect("with")?;
                let cases = self.cases()?;
                Ok(Expr::TryWith(body.boxed(), cases))
            }
            "if" => {
                self.bump();
                let cond = self.tuple_or_binder()?;
                self.expect("then")?;
                let then = self.tuple_or_binder()?;
                let els = if self.eat("else") {
                    Some(self.tuple_or_binder()?.boxed())
                } else {
                    None
                };
                Ok(Expr::If(cond.boxed(), then.boxed(), els))
            }
            "for" => {
                self.bump();
                let var = self.ident()?;
                self.expect("=")?;
                let from = self.tuple_expr()?;
                let dir = if self.eat("to") {
                    ForDir::Up
                } else if self.eat("downto") {
                    ForDir::Down
                } else {
                    return Err(self.unexpected("'to' or 'downto'"));
                };
                let to = self.tuple_expr()?;
                self.expect("do")?;
                let body = self.seq_expr()?;
                self.expect("done")?;
                Ok(Expr::For(
                    var,
                    from.boxed(),
                    dir,
                    to.boxed(),
                    body.clone().boxed(),
                    body.boxed(),
                ))
            }
            "while" => {
                self.bump();
                let cond = self.tuple_expr()?;
                self.expect("do")?;
                let body = self.seq_expr()?;
                self.expect("done")?;
                Ok(Expr::While(
                    cond.clone().boxed(),
                    body.clone().boxed(),
                    cond.boxed(),
                    body.boxed(),
                ))
            }
            _ => unreachable!("binder_expr called on non-binder"),
        }
    }

    fn tuple_expr(&mut self) -> Result<Expr, ParseError> {
        let first = self.tuple_element()?;
        if self.peek_text() != "," {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(",") {
            items.push(self.tuple_element()?);
        }
        Ok(Expr::Tuple(items))
    }

    /// One tuple component. A binder here swallows the rest of the tuple
    /// into its own body, as in OCaml.
    fn tuple_element(&mut self) -> Result<Expr, ParseError> {
        if self.is_binder_start() {
            self.binder_expr()
        } else {
            self.assign_expr()
        }
    }

    fn assign_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or_expr()?;
        if self.eat(":=") {
            let rhs = self.assign_expr()?;
            Ok(Expr::Assign(lhs.boxed(), rhs.boxed()))
        } else {
            Ok(lhs)
        }
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.and_expr()?;
        if self.eat("||") {
            let rhs = self.or_expr()?;
            Ok(Expr::Or(lhs.boxed(), rhs.boxed()))
        } else {
            Ok(lhs)
        }
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.cmp_expr()?;
        if self.eat("&&") {
            let rhs = self.and_expr()?;
            Ok(Expr::And(lhs.boxed(), rhs.boxed()))
        } else {
            Ok(lhs)
        }
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cons_expr()?;
        loop {
            let op = match self.peek_text() {
                "=" => CmpOp::Eq,
                "<>" => CmpOp::Neq,
                "<" => CmpOp::Lt,
                ">" => CmpOp::Gt,
                "<=" => CmpOp::Le,
                ">=" => CmpOp::Ge,
                _ => break,
            };
            self.bump();
            let rhs = self.cons_expr()?;
            lhs = Expr::Cmp(op, lhs.boxed(), rhs.boxed());
        }
        Ok(lhs)
    }

    fn cons_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.append_expr()?;
        if self.eat("::") {
            let rhs = self.cons_expr()?;
            Ok(Expr::Cons(lhs.boxed(), rhs.boxed()))
        } else {
            Ok(lhs)
        }
    }

    fn append_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        if self.eat("@") {
            let rhs = self.append_expr()?;
            Ok(Expr::app(Expr::app(Expr::Var("@".into()), lhs), rhs))
        } else {
            Ok(lhs)
        }
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek_text() {
                "+" => ArithOp::Add,
                "-" => ArithOp::Sub,
                "+." => ArithOp::AddF,
                "-." => ArithOp::SubF,
                _ => break,
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Expr::Op(op, lhs.boxed(), rhs.boxed());
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek_text() {
                "*" => ArithOp::Mul,
                "/" => ArithOp::Div,
                "mod" => ArithOp::Mod,
                "*." => ArithOp::MulF,
                "/." => ArithOp::DivF,
                _ => break,
            };
            self.bump();
            let rhs = self.unary_expr()?;
            lhs = Expr::Op(op, lhs.boxed(), rhs.boxed());
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat("-") {
            let operand = self.unary_expr()?;
            return Ok(match operand {
                Expr::Int(n) => Expr::Int(-n),
                Expr::Float(f) => Expr::Float(-f),
                e => Expr::Op(ArithOp::Sub, Expr::Int(0).boxed(), e.boxed()),
            });
        }
        if self.peek_text() == "raise" {
            self.bump();
            let position = self.position();
            let operand = self.app_expr()?;
            return match operand {
                Expr::Constr(name, payload) => Ok(Expr::Raise(name, payload)),
                _ => Err(ParseError::Invalid {
                    position,
                    message: "raise expects an exception constructor".into(),
                }),
            };
        }
        self.app_expr()
    }

    /// `!` binds to the following atom, so `!f x` reads `(!f) x`.
    fn deref_operand(&mut self) -> Result<Expr, ParseError> {
        if self.eat("!") {
            Ok(Expr::Deref(self.deref_operand()?.boxed()))
        } else {
            self.atom()
        }
    }

    fn app_expr(&mut self) -> Result<Expr, ParseError> {
        let mut head = if self.peek_text() == "!" {
            self.deref_operand()?
        } else {
            self.atom()?
        };
        // A bare constructor grabs one following atom as its payload.
        if let Expr::Constr(tag, None) = &head {
            if self.is_atom_start() {
                let payload = self.atom()?;
                head = Expr::Constr(tag.clone(), Some(payload.boxed()));
            }
        }
        while self.is_atom_start() || self.peek_text() == "!" {
            let arg = if self.peek_text() == "!" {
                self.deref_operand()?
            } else {
                self.atom()?
            };
            head = Expr::app(head, arg);
        }
        Ok(head)
    }

    fn is_atom_start(&self) -> bool {
        match self.peek() {
            None => false,
            Some(t) => match t.kind {
                TokenKind::IntLit | TokenKind::FloatLit | TokenKind::StrLit | TokenKind::Ident => {
                    true
                }
                TokenKind::Keyword => matches!(t.text.as_str(), "true" | "false" | "begin"),
                TokenKind::Punct => matches!(t.text.as_str(), "(" | "[" | "{"),
                TokenKind::OpSym => false,
            },
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.unexpected("expression"));
        };
        match t.kind {
            TokenKind::IntLit => {
                self.bump();
                let text = t.text.replace('_', "");
                let n = text.parse::<i64>().map_err(|_| ParseError::Invalid {
                    position: t.position,
                    message: format!("integer literal '{}' out of range", t.text),
                })?;
                Ok(Expr::Int(n))
            }
            TokenKind::FloatLit => {
                self.bump();
                let text = t.text.replace('_', "");
                let f = text.parse::<f64>().map_err(|_| ParseError::Invalid {
                    position: t.position,
                    message: format!("bad float literal '{}'", t.text),
                })?;
                Ok(Expr::Float(f))
            }
            TokenKind::StrLit => {
                self.bump();
                Ok(Expr::Str(unescape(&t.text)))
            }
            TokenKind::Keyword if t.text == "true" => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            TokenKind::Keyword if t.text == "false" => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            TokenKind::Keyword if t.text == "begin" => {
                self.bump();
                let e = self.seq_expr()?;
                self.expect("end")?;
                Ok(e)
            }
            TokenKind::Ident => {
                self.bump();
                let first = t.text.chars().next().unwrap();
                if first.is_ascii_uppercase() && !t.text.contains('.') {
                    Ok(Expr::Constr(t.text, None))
                } else {
                    Ok(Expr::Var(t.text))
                }
            }
            TokenKind::Punct if t.text == "(" => {
                self.bump();
                if self.eat(")") {
                    return Ok(Expr::Unit);
                }
                let e = self.seq_expr()?;
                self.expect(")")?;
                Ok(e)
            }
            TokenKind::Punct if t.text == "[" => {
                self.bump();
                let mut items = Vec::new();
                if self.peek_text() != "]" {
                    loop {
                        items.push(self.tuple_or_binder()?);
                        if !self.eat(";") {
                            break;
                        }
                        if self.peek_text() == "]" {
                            break;
                        }
                    }
                }
                self.expect("]")?;
                Ok(Expr::list(items))
            }
            TokenKind::Punct if t.text == "{" => {
                self.bump();
                let mut fields = Vec::new();
                loop {
                    let name = self.ident()?;
                    self.expect("=")?;
                    let value = self.assign_expr()?;
                    fields.push((name, super::expr::new_cell(value)));
                    if !self.eat(";") {
                        break;
                    }
                }
                self.expect("}")?;
                Ok(Expr::Record(fields))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    // ---- cases and patterns ----

    fn cases(&mut self) -> Result<Vec<Case>, ParseError> {
        self.eat("|");
        let mut out = Vec::new();
        loop {
            let pattern = self.pattern()?;
            let guard = if self.eat("when") {
                Some(self.tuple_expr()?)
            } else {
                None
            };
            self.expect("->")?;
            let body = self.seq_expr()?;
            out.push(Case {
                pattern,
                guard,
                body,
            });
            if !self.eat("|") {
                break;
            }
        }
        Ok(out)
    }

    pub fn pattern(&mut self) -> Result<Pattern, ParseError> {
        let position = self.position();
        let p = self.por_pattern()?;
        check_linear(&p, position)?;
        Ok(p)
    }

    fn por_pattern(&mut self) -> Result<Pattern, ParseError> {
        let mut lhs = self.ptuple_pattern()?;
        while self.peek_text() == "|" && self.peek_at(1).is_some_and(|t| t.text != "|") {
            // Don't confuse with the case separator: or-patterns only make
            // sense before `when` / `->`, so look ahead for another pattern.
            let save = self.pos;
            self.bump();
            match self.ptuple_pattern() {
                Ok(rhs) => lhs = Pattern::POr(lhs.boxed(), rhs.boxed()),
                Err(_) => {
                    self.pos = save;
                    break;
                }
            }
        }
        Ok(lhs)
    }

    fn ptuple_pattern(&mut self) -> Result<Pattern, ParseError> {
        let first = self.pcons_pattern()?;
        if self.peek_text() != "," {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(",") {
            items.push(self.pcons_pattern()?);
        }
        Ok(Pattern::PTuple(items))
    }

    fn pcons_pattern(&mut self) -> Result<Pattern, ParseError> {
        let head = self.papp_pattern()?;
        if self.eat("::") {
            let tail = self.pcons_pattern()?;
            Ok(Pattern::PCons(head.boxed(), tail.boxed()))
        } else {
            Ok(head)
        }
    }

    fn papp_pattern(&mut self) -> Result<Pattern, ParseError> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Ident
                && t.text
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_uppercase())
                && !t.text.contains('.')
            {
                let tag = self.bump().unwrap().text;
                if self.is_pattern_atom_start() {
                    let payload = self.pattern_atom()?;
                    return Ok(Pattern::PConstr(tag, Some(payload.boxed())));
                }
                return Ok(Pattern::PConstr(tag, None));
            }
        }
        self.pattern_atom()
    }

    fn is_pattern_atom_start(&self) -> bool {
        match self.peek() {
            None => false,
            Some(t) => match t.kind {
                TokenKind::IntLit | TokenKind::StrLit | TokenKind::Ident => true,
                TokenKind::Keyword => matches!(t.text.as_str(), "true" | "false"),
                TokenKind::Punct => matches!(t.text.as_str(), "(" | "[" | "_"),
                TokenKind::OpSym => t.text == "-",
                TokenKind::FloatLit => false,
            },
        }
    }

    fn pattern_atom(&mut self) -> Result<Pattern, ParseError> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.unexpected("pattern"));
        };
        match t.kind {
            TokenKind::Punct if t.text == "_" => {
                self.bump();
                Ok(Pattern::Any)
            }
            TokenKind::IntLit => {
                self.bump();
                let n =
                    t.text
                        .replace('_', "")
                        .parse::<i64>()
                        .map_err(|_| ParseError::Invalid {
                            position: t.position,
                            message: format!("integer literal '{}' out of range", t.text),
                        })?;
                Ok(Pattern::PInt(n))
            }
            TokenKind::OpSym if t.text == "-" => {
                self.bump();
                let Some(n) = self.peek().cloned() else {
                    return Err(self.unexpected("integer literal"));
                };
                if n.kind != TokenKind::IntLit {
                    return Err(self.unexpected("integer literal"));
                }
                self.bump();
                let v =
                    n.text
                        .replace('_', "")
                        .parse::<i64>()
                        .map_err(|_| ParseError::Invalid {
                            position: n.position,
                            message: format!("integer literal '{}' out of range", n.text),
                        })?;
                Ok(Pattern::PInt(-v))
            }
            TokenKind::StrLit => {
                self.bump();
                Ok(Pattern::PStr(unescape(&t.text)))
            }
            TokenKind::Keyword if t.text == "true" => {
                self.bump();
                Ok(Pattern::PBool(true))
            }
            TokenKind::Keyword if t.text == "false" => {
                self.bump();
                Ok(Pattern::PBool(false))
            }
            TokenKind::Ident => {
                let first = t.text.chars().next().unwrap();
                if first.is_ascii_uppercase() {
                    // Bare constructor in atom position (no payload).
                    self.bump();
                    Ok(Pattern::PConstr(t.text, None))
                } else {
                    self.bump();
                    Ok(Pattern::PVar(t.text))
                }
            }
            TokenKind::Punct if t.text == "(" => {
                self.bump();
                if self.eat(")") {
                    return Ok(Pattern::PUnit);
                }
                let p = self.por_pattern()?;
                self.expect(")")?;
                Ok(p)
            }
            TokenKind::Punct if t.text == "[" => {
                self.bump();
                let mut items = Vec::new();
                if self.peek_text() != "]" {
                    loop {
                        items.push(self.ptuple_pattern()?);
                        if !self.eat(";") {
                            break;
                        }
                    }
                }
                self.expect("]")?;
                let mut p = Pattern::PNil;
                for item in items.into_iter().rev() {
                    p = Pattern::PCons(item.boxed(), p.boxed());
                }
                Ok(p)
            }
            _ => Err(self.unexpected("pattern")),
        }
    }
}

impl Pattern {
    fn boxed(self) -> Box<Pattern> {
        Box::new(self)
    }
}

/// Reject patterns binding the same name twice, and or-patterns whose arms
/// bind different variable sets.
fn check_linear(p: &Pattern, position: Position) -> Result<(), ParseError> {
    let names = p.bound_names();
    let mut seen = HashSet::new();
    for n in &names {
        if !seen.insert(n) {
            return Err(ParseError::Invalid {
                position,
                message: format!("variable '{n}' is bound twice in this pattern"),
            });
        }
    }
    check_or_arms(p, position)
}

fn check_or_arms(p: &Pattern, position: Position) -> Result<(), ParseError> {
    match p {
        Pattern::POr(a, b) => {
            let mut left: Vec<_> = a.bound_names();
            let mut right: Vec<_> = b.bound_names();
            left.sort();
            right.sort();
            if left != right {
                return Err(ParseError::Invalid {
                    position,
                    message: "both sides of an or-pattern must bind the same variables".into(),
                });
            }
            check_or_arms(a, position)?;
            check_or_arms(b, position)
        }
        Pattern::PTuple(ps) => ps.iter().try_for_each(|p| check_or_arms(p, position)),
        Pattern::PCons(h, t) => {
            check_or_arms(h, position)?;
            check_or_arms(t, position)
        }
        Pattern::PConstr(_, Some(p)) => check_or_arms(p, position),
        _ => Ok(()),
    }
}

/// Build `fun p1 p2 ... -> body` as a chain of single-parameter functions,
/// with the inner ones flagged as joint parameters for display.
pub fn fun_chain(params: Vec<Pattern>, body: Expr) -> Expr {
    let mut e = body;
    let n = params.len();
    for (i, p) in params.into_iter().enumerate().rev() {
        e = Expr::Fun(FunVal {
            param: p,
            body: e.boxed(),
            name: None,
            multi: i > 0 && n > 1,
        });
    }
    e
}

/// Attach a definition name to a closure so it can be printed by name.
fn name_closure(e: Expr, name: &str) -> Expr {
    match e {
        Expr::Fun(mut f) => {
            f.name = Some(name.to_string());
            Expr::Fun(f)
        }
        Expr::Function(mut f) => {
            f.name = Some(name.to_string());
            Expr::Function(f)
        }
        other => other,
    }
}

fn wrap_bare(e: Expr) -> Expr {
    Expr::LetDef(false, vec![(Pattern::Any, e)])
}

fn unescape(quoted: &str) -> String {
    let inner = &quoted[1..quoted.len() - 1];
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                Some('\\') => out.push('\\'),
                Some('"') => out.push('"'),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}
