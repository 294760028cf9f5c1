//! The trace driver: steps a program, peeks each state, renders it, decides
//! whether to print it, and streams accepted lines to a sink.

use std::io::Write;

use crate::eval::{is_value, EvalError, LastOp, Session, StepOutcome};
use crate::search::SearchFilter;
use crate::syntax::{Expr, Pattern};

use super::pretty::{render, render_plain};
use super::{format_line, should_print, RenderOptions, TraceLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrow {
    /// First printed line of an item.
    First,
    /// Immediate successor of the previously printed line.
    Step,
    /// More than one engine step was elided since the previous printed line.
    Elided,
}

/// A line that survived elision and search filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedLine {
    pub line: TraceLine,
    pub arrow: Arrow,
    /// Byte spans of search matches over `line.composed()`.
    pub highlights: Vec<(usize, usize)>,
    /// True for lines replayed as preceding context of a search hit.
    pub is_context: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceOutcome {
    /// The program reduced to a value (the last item's value).
    Value(Expr),
    Uncaught(String, Option<Expr>),
    /// Evaluation was halted by a search `-stop`.
    Stopped,
}

/// Where accepted trace lines go.
pub trait TraceSink {
    fn line(&mut self, em: &EmittedLine);
    /// Terminal line for an uncaught exception.
    fn exception(&mut self, text: &str);
}

/// Sink that formats lines to a writer.
pub struct WriteSink<'a> {
    pub out: &'a mut dyn Write,
    pub opts: RenderOptions,
}

impl TraceSink for WriteSink<'_> {
    fn line(&mut self, em: &EmittedLine) {
        let _ = writeln!(
            self.out,
            "{}",
            format_line(&em.line, em.arrow, &em.highlights, &self.opts)
        );
    }

    fn exception(&mut self, text: &str) {
        let _ = writeln!(self.out, "{text}");
    }
}

/// Sink that collects lines for inspection.
#[derive(Default)]
pub struct CollectSink {
    pub lines: Vec<EmittedLine>,
    pub exception: Option<String>,
}

impl TraceSink for CollectSink {
    fn line(&mut self, em: &EmittedLine) {
        self.lines.push(em.clone());
    }

    fn exception(&mut self, text: &str) {
        self.exception = Some(text.to_string());
    }
}

/// Evaluate a program item by item, streaming the trace of each to `sink`.
/// Only the item under evaluation is shown unless `show_all_items` is set.
pub fn emit_trace(
    session: &mut Session,
    items: &[Expr],
    opts: &RenderOptions,
    mut search: Option<&mut SearchFilter>,
    sink: &mut dyn TraceSink,
) -> Result<TraceOutcome, EvalError> {
    session.fast_curry = opts.fast_curry;
    let mut step_index = 0usize;
    let mut total_steps = 0u64;
    let mut last_value = Expr::Unit;
    let mut completed: Vec<Expr> = Vec::new();
    for (item_idx, item) in items.iter().enumerate() {
        if matches!(item, Expr::ExceptionDef(..) | Expr::TypeDef(_)) {
            completed.push(item.clone());
            continue;
        }
        let mut current = item.clone();
        let mut produced: Option<LastOp> = None;
        let mut hidden = 0usize;
        let mut printed_any = false;
        let mut last_printed: Option<String> = None;
        loop {
            let current_is_value = is_value(&current);
            let (peeked, redex) = session.peek_redex(&current);
            let rendered = render(&current, opts.side_lets, redex);
            let (text, redex_span) = if opts.show_all_items {
                let (prefix, suffix) = item_context(&completed, items, item_idx);
                let text = format!("{prefix}{}{suffix}", rendered.text);
                let span = rendered
                    .redex_span
                    .map(|(s, e)| (s + prefix.len(), e + prefix.len()));
                (text, span)
            } else {
                (rendered.text, rendered.redex_span)
            };
            let line = TraceLine {
                text,
                gutter: rendered.gutter,
                redex_span: if current_is_value { None } else { redex_span },
                step_index,
                last_op: produced,
            };
            let mut show = should_print(produced, current_is_value, peeked, opts);
            if show && !opts.show_all {
                // Identical consecutive display states collapse into one.
                let composed = line.composed();
                if last_printed.as_deref() == Some(composed.as_str()) {
                    show = false;
                } else {
                    last_printed = Some(composed);
                }
            }
            if show {
                let arrow = if !printed_any {
                    Arrow::First
                } else if hidden > 1 {
                    // More than one engine step was elided since the last
                    // printed line.
                    Arrow::Elided
                } else {
                    Arrow::Step
                };
                printed_any = true;
                hidden = 0;
                let mut halt = false;
                match search.as_deref_mut() {
                    Some(filter) => {
                        let (emissions, stop) = filter.printed(&line, arrow);
                        for em in &emissions {
                            sink.line(em);
                        }
                        halt = stop;
                    }
                    None => sink.line(&EmittedLine {
                        line,
                        arrow,
                        highlights: Vec::new(),
                        is_context: false,
                    }),
                }
                if halt {
                    return Ok(TraceOutcome::Stopped);
                }
            } else {
                hidden += 1;
                if let Some(filter) = search.as_deref_mut() {
                    if filter.hidden(&line) {
                        return Ok(TraceOutcome::Stopped);
                    }
                }
            }
            if current_is_value {
                break;
            }
            if total_steps >= session.step_budget {
                return Err(EvalError::StepBudgetExceeded(session.step_budget));
            }
            match session.eval_step(&current)? {
                StepOutcome::Next(next, op) => {
                    current = next;
                    produced = Some(op);
                    step_index += 1;
                    total_steps += 1;
                }
                StepOutcome::AlreadyValue => unreachable!("checked above"),
                StepOutcome::Uncaught(name, payload) => {
                    let text = match &payload {
                        None => format!("Exception: {name}."),
                        Some(p) => format!("Exception: {name} {}.", render_plain(p)),
                    };
                    sink.exception(&text);
                    return Ok(TraceOutcome::Uncaught(name, payload));
                }
            }
        }
        completed.push(current.clone());
        // Install completed definitions for the following items.
        if let Expr::LetDef(recursive, bindings) = &current {
            if !matches!(bindings.as_slice(), [(Pattern::Any, _)]) {
                session.define(*recursive, bindings.clone());
            }
            last_value = bindings
                .last()
                .map(|(_, e)| e.clone())
                .unwrap_or(Expr::Unit);
        } else {
            last_value = current;
        }
    }
    Ok(TraceOutcome::Value(last_value))
}

/// Renders the completed items (in their evaluated form) and the pending
/// ones (as written) around the current item.
fn item_context(completed: &[Expr], items: &[Expr], current: usize) -> (String, String) {
    let mut prefix = String::new();
    for item in completed {
        prefix.push_str(&render_plain(item));
        prefix.push_str("\n\n");
    }
    let mut suffix = String::new();
    for item in &items[current + 1..] {
        suffix.push_str("\n\n");
        suffix.push_str(&render_plain(item));
    }
    (prefix, suffix)
}
