//! Token-based search over rendered trace lines.
//!
//! A pattern is lexed with the surface-language lexer; matching is then a
//! token-subsequence test over the candidate line's tokens, which makes it
//! insensitive to whitespace. `_` stands for exactly one token, and with
//! `no_parens` parenthesis tokens on either side are ignored.

use std::collections::VecDeque;

use thiserror::Error;

use crate::render::trace::{Arrow, EmittedLine};
use crate::render::TraceLine;
use crate::syntax::lexer::{lex, Token};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PatternError {
    #[error("search pattern does not lex: {0}")]
    Unlexable(String),
    #[error("bad regular expression: {0}")]
    BadRegex(String),
}

#[derive(Debug, Clone, PartialEq)]
enum PatTok {
    Lit(String),
    Wild,
}

#[derive(Debug, Clone)]
enum Matcher {
    Tokens(Vec<PatTok>),
    Regex(regex::Regex),
}

/// A compiled search pattern.
#[derive(Debug, Clone)]
pub struct CompiledPattern {
    pub source: String,
    matcher: Matcher,
}

impl CompiledPattern {
    /// Byte spans of every occurrence in `line` (empty when no match).
    pub fn find(&self, line: &str, no_parens: bool) -> Vec<(usize, usize)> {
        match &self.matcher {
            Matcher::Regex(re) => re.find_iter(line).map(|m| (m.start(), m.end())).collect(),
            Matcher::Tokens(pat) => {
                let Some(toks) = line_tokens(line) else {
                    return Vec::new();
                };
                let toks: Vec<(String, usize, usize)> = if no_parens {
                    toks.into_iter()
                        .filter(|(t, _, _)| t != "(" && t != ")")
                        .collect()
                } else {
                    toks
                };
                let pat: Vec<&PatTok> = if no_parens {
                    pat.iter()
                        .filter(|p| !matches!(p, PatTok::Lit(t) if t == "(" || t == ")"))
                        .collect()
                } else {
                    pat.iter().collect()
                };
                if pat.is_empty() {
                    return Vec::new();
                }
                let mut out = Vec::new();
                for start in 0..toks.len() {
                    if start + pat.len() > toks.len() {
                        break;
                    }
                    let ok = pat.iter().enumerate().all(|(i, p)| match p {
                        PatTok::Wild => true,
                        PatTok::Lit(t) => toks[start + i].0 == *t,
                    });
                    if ok {
                        let s = toks[start].1;
                        let e = toks[start + pat.len() - 1].2;
                        out.push((s, e));
                    }
                }
                out
            }
        }
    }

    pub fn matches(&self, line: &str, no_parens: bool) -> bool {
        !self.find(line, no_parens).is_empty()
    }
}

/// Tokenize a candidate line, with byte offsets. Lines that do not lex
/// (which rendered states always do) simply never match.
fn line_tokens(line: &str) -> Option<Vec<(String, usize, usize)>> {
    let toks: Vec<Token> = lex(line).ok()?;
    let line_starts: Vec<usize> = std::iter::once(0)
        .chain(line.match_indices('\n').map(|(i, _)| i + 1))
        .collect();
    Some(
        toks.into_iter()
            .map(|t| {
                let start = line_starts.get(t.position.line - 1).copied().unwrap_or(0)
                    + (t.position.column - 1);
                let end = start + t.text.len();
                (t.text, start, end)
            })
            .collect(),
    )
}

/// Compile a search pattern: the token language by default, a raw regular
/// expression with `regexp`.
pub fn compile_pattern(text: &str, regexp: bool) -> Result<CompiledPattern, PatternError> {
    if regexp {
        let re = regex::Regex::new(text).map_err(|e| PatternError::BadRegex(e.to_string()))?;
        return Ok(CompiledPattern {
            source: text.to_string(),
            matcher: Matcher::Regex(re),
        });
    }
    let toks = lex(text).map_err(|e| PatternError::Unlexable(e.to_string()))?;
    let pat = toks
        .into_iter()
        .map(|t| {
            if t.text == "_" {
                PatTok::Wild
            } else {
                PatTok::Lit(t.text)
            }
        })
        .collect();
    Ok(CompiledPattern {
        source: text.to_string(),
        matcher: Matcher::Tokens(pat),
    })
}

/// The full search configuration attached to a trace.
#[derive(Debug, Clone, Default)]
pub struct SearchSpec {
    pub search: Vec<CompiledPattern>,
    pub until: Option<CompiledPattern>,
    pub after: Option<CompiledPattern>,
    pub until_any: Option<CompiledPattern>,
    pub after_any: Option<CompiledPattern>,
    pub highlight: bool,
    pub no_parens: bool,
    pub invert_search: bool,
    pub invert_after: bool,
    pub invert_until: bool,
    pub stop: bool,
    pub repeat: bool,
    /// Maximum number of results; `None` for unlimited.
    pub max_results: Option<usize>,
    /// Number of preceding context lines shown before each result.
    pub upto: usize,
}

impl SearchSpec {
    pub fn is_active(&self) -> bool {
        !self.search.is_empty()
            || self.until.is_some()
            || self.after.is_some()
            || self.until_any.is_some()
            || self.after_any.is_some()
            || self.max_results.is_some()
    }
}

/// Streaming filter between the trace driver and the output sink.
pub struct SearchFilter {
    spec: SearchSpec,
    after_open: bool,
    after_any_open: bool,
    until_fired: bool,
    until_any_fired: bool,
    emitted: usize,
    done: bool,
    context: VecDeque<(TraceLine, Arrow)>,
}

impl SearchFilter {
    pub fn new(spec: SearchSpec) -> SearchFilter {
        SearchFilter {
            after_open: spec.after.is_none(),
            after_any_open: spec.after_any.is_none(),
            spec,
            until_fired: false,
            until_any_fired: false,
            emitted: 0,
            done: false,
            context: VecDeque::new(),
        }
    }

    /// Feed a printed (post-elision) line. Returns the lines to emit and
    /// whether evaluation should halt (`stop`).
    pub fn printed(&mut self, line: &TraceLine, arrow: Arrow) -> (Vec<EmittedLine>, bool) {
        let composed = line.composed();
        let np = self.spec.no_parens;
        if !self.after_open {
            if let Some(p) = &self.spec.after {
                if p.matches(&composed, np) {
                    self.after_open = true;
                }
            }
        }
        if !self.after_any_open {
            if let Some(p) = &self.spec.after_any {
                if p.matches(&composed, np) {
                    self.after_any_open = true;
                }
            }
        }
        let after_ok = gate(
            self.spec.after.is_some(),
            self.after_open,
            self.spec.invert_after,
        ) && gate(
            self.spec.after_any.is_some(),
            self.after_any_open,
            self.spec.invert_after,
        );
        let until_ok = gate(
            self.spec.until.is_some(),
            !self.until_fired,
            self.spec.invert_until,
        ) && gate(
            self.spec.until_any.is_some(),
            !self.until_any_fired,
            self.spec.invert_until,
        );
        let mut highlights = Vec::new();
        let search_ok = if self.spec.search.is_empty() {
            true
        } else {
            let mut all = true;
            for p in &self.spec.search {
                let spans = p.find(&composed, np);
                if spans.is_empty() {
                    all = false;
                } else if self.spec.highlight {
                    highlights.extend(spans);
                }
            }
            all != self.spec.invert_search
        };
        if self.spec.invert_search {
            highlights.clear();
        }
        let capacity_left = self.spec.max_results.is_none_or(|n| self.emitted < n);
        let mut out = Vec::new();
        if !self.done && after_ok && until_ok && search_ok && capacity_left {
            while let Some((ctx_line, ctx_arrow)) = self.context.pop_front() {
                out.push(EmittedLine {
                    line: ctx_line,
                    arrow: ctx_arrow,
                    highlights: Vec::new(),
                    is_context: true,
                });
            }
            highlights.sort_unstable();
            highlights.dedup();
            out.push(EmittedLine {
                line: line.clone(),
                arrow,
                highlights,
                is_context: false,
            });
            self.emitted += 1;
        } else if self.spec.upto > 0 && !self.done {
            if self.context.len() == self.spec.upto {
                self.context.pop_front();
            }
            self.context.push_back((line.clone(), arrow));
        }
        // Close the window after the matching line (inclusive). With the
        // inverted polarity the match opens the window instead, so nothing
        // is finalized.
        let mut final_results = false;
        if let Some(p) = &self.spec.until {
            if p.matches(&composed, np) {
                if self.spec.repeat {
                    self.after_open = self.spec.after.is_none();
                } else {
                    self.until_fired = true;
                    if !self.spec.invert_until {
                        self.done = true;
                        final_results = true;
                    }
                }
            }
        }
        if let Some(p) = &self.spec.until_any {
            if p.matches(&composed, np) {
                if self.spec.repeat {
                    self.until_any_fired = false;
                    self.after_any_open = self.spec.after_any.is_none();
                } else {
                    self.until_any_fired = true;
                    if !self.spec.invert_until {
                        self.done = true;
                        final_results = true;
                    }
                }
            }
        }
        if let Some(n) = self.spec.max_results {
            if self.emitted >= n && !self.done {
                self.done = true;
                final_results = true;
            }
        }
        (out, final_results && self.spec.stop)
    }

    /// Feed an elided engine step: only the `-any` window patterns see it.
    /// Returns whether evaluation should halt.
    pub fn hidden(&mut self, line: &TraceLine) -> bool {
        let composed = line.composed();
        let np = self.spec.no_parens;
        if !self.after_any_open {
            if let Some(p) = &self.spec.after_any {
                if p.matches(&composed, np) {
                    self.after_any_open = true;
                }
            }
        }
        if let Some(p) = &self.spec.until_any {
            if p.matches(&composed, np) {
                if self.spec.repeat {
                    self.after_any_open = self.spec.after_any.is_none();
                } else {
                    self.until_any_fired = true;
                    if !self.spec.invert_until {
                        self.done = true;
                        return self.spec.stop;
                    }
                }
            }
        }
        false
    }
}

/// A gate holds when its pattern is absent, or its state agrees with the
/// requested polarity.
fn gate(present: bool, open: bool, invert: bool) -> bool {
    if !present {
        true
    } else {
        open != invert
    }
}
