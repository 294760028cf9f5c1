//! Driver-level tests for trace emission and search filtering.

mod common;

use common::capture;
use stepml_core::render::trace::{emit_trace, CollectSink, TraceOutcome};
use stepml_core::render::RenderOptions;
use stepml_core::search::{compile_pattern, SearchFilter, SearchSpec};
use stepml_core::syntax::parse_program;

fn run_search(src: &str, spec: SearchSpec) -> (CollectSink, TraceOutcome, String) {
    let (mut session, out) = capture::session();
    let items = parse_program(src).unwrap();
    let mut sink = CollectSink::default();
    let mut filter = SearchFilter::new(spec);
    let outcome = emit_trace(
        &mut session,
        &items,
        &RenderOptions::show_all(),
        Some(&mut filter),
        &mut sink,
    )
    .unwrap();
    (sink, outcome, out.contents())
}

fn pat(p: &str) -> stepml_core::search::CompiledPattern {
    compile_pattern(p, false).unwrap()
}

#[test]
fn after_until_window() {
    let (sink, _, _) = run_search(
        "1 + (2 + (3 + (4 + 5)))",
        SearchSpec {
            after: Some(pat("4 + 5")),
            until: Some(pat("3 + 9")),
            ..SearchSpec::default()
        },
    );
    let texts: Vec<&str> = sink.lines.iter().map(|l| l.line.text.as_str()).collect();
    // inclusive on both ends
    assert_eq!(texts, vec!["1 + (2 + (3 + (4 + 5)))", "1 + (2 + (3 + 9))"]);
}

#[test]
fn invert_search_emits_the_complement() {
    let spec = SearchSpec {
        search: vec![pat("nomatch_zzz")],
        invert_search: true,
        ..SearchSpec::default()
    };
    let (sink, _, _) = run_search("1 + 2 * 3", spec);
    assert_eq!(
        sink.lines.len(),
        3,
        "vacuous inversion shows the full trace"
    );
}

#[test]
fn n_limits_results_and_zero_emits_nothing() {
    let spec = SearchSpec {
        max_results: Some(0),
        ..SearchSpec::default()
    };
    let (sink, _, _) = run_search("1 + 2 * 3", spec);
    assert!(sink.lines.is_empty());

    let spec = SearchSpec {
        max_results: Some(2),
        ..SearchSpec::default()
    };
    let (sink, _, _) = run_search("1 + 2 * 3", spec);
    assert_eq!(sink.lines.len(), 2);

    // n larger than the match count emits everything
    let spec = SearchSpec {
        max_results: Some(99),
        ..SearchSpec::default()
    };
    let (sink, _, _) = run_search("1 + 2 * 3", spec);
    assert_eq!(sink.lines.len(), 3);
}

#[test]
fn stop_halts_evaluation_and_its_side_effects() {
    // Without -stop the program prints all five digits.
    let src = "print_int 1; print_int 2; print_int 3; print_int 4; print_int 5";
    let spec = SearchSpec {
        until: Some(pat("print_int 3")),
        ..SearchSpec::default()
    };
    let (_, outcome, out) = run_search(src, spec);
    assert!(matches!(outcome, TraceOutcome::Value(_)));
    assert_eq!(out, "12345");

    // With -stop, evaluation genuinely halts: the later prints never run.
    let spec = SearchSpec {
        until: Some(pat("print_int 3")),
        stop: true,
        ..SearchSpec::default()
    };
    let (sink, outcome, out) = run_search(src, spec);
    assert!(matches!(outcome, TraceOutcome::Stopped));
    assert!(!sink.lines.is_empty());
    assert!(
        !out.contains('4') && !out.contains('5'),
        "later side effects must not occur, got {out:?}"
    );
}

#[test]
fn stop_with_n_results() {
    let spec = SearchSpec {
        max_results: Some(1),
        stop: true,
        ..SearchSpec::default()
    };
    let (sink, outcome, _) = run_search("1 + 2 * 3", spec);
    assert_eq!(sink.lines.len(), 1);
    assert!(matches!(outcome, TraceOutcome::Stopped));
}

#[test]
fn upto_shows_preceding_context() {
    let spec = SearchSpec {
        search: vec![pat("24")],
        upto: 2,
        max_results: Some(1),
        ..SearchSpec::default()
    };
    let (sink, _, _) = run_search("1 * (2 * (3 * 4))", spec);
    let texts: Vec<&str> = sink.lines.iter().map(|l| l.line.text.as_str()).collect();
    assert_eq!(texts, vec!["1 * (2 * (3 * 4))", "1 * (2 * 12)", "1 * 24"]);
    assert!(sink.lines[0].is_context);
    assert!(sink.lines[1].is_context);
    assert!(!sink.lines[2].is_context);
}

#[test]
fn until_any_sees_elided_steps() {
    // Under default elision the interior arithmetic states are hidden, but
    // -until-any still fires on them.
    let (mut session, _) = capture::session();
    let items = parse_program("1 * (2 * (3 * 4))").unwrap();
    let mut sink = CollectSink::default();
    let spec = SearchSpec {
        until_any: Some(pat("1 * 24")),
        stop: true,
        ..SearchSpec::default()
    };
    let mut filter = SearchFilter::new(spec);
    let outcome = emit_trace(
        &mut session,
        &items,
        &RenderOptions::default(),
        Some(&mut filter),
        &mut sink,
    )
    .unwrap();
    assert!(matches!(outcome, TraceOutcome::Stopped));
    let texts: Vec<&str> = sink.lines.iter().map(|l| l.line.text.as_str()).collect();
    assert_eq!(texts, vec!["1 * (2 * (3 * 4))"]);
}

#[test]
fn highlight_spans_cover_matches() {
    let spec = SearchSpec {
        search: vec![pat("[_; _; _]")],
        highlight: true,
        ..SearchSpec::default()
    };
    let (sink, _, _) = run_search("map (fun x -> x + 1) [1; 2; 3]", spec);
    let first = &sink.lines[0];
    assert!(!first.highlights.is_empty());
    let (s, e) = first.highlights[0];
    assert_eq!(&first.line.composed()[s..e], "[1; 2; 3]");
}

#[test]
fn repeat_reopens_the_window() {
    let src = "print_int 1; print_int 2; print_int 1; print_int 2";
    let closed_spec = SearchSpec {
        after: Some(pat("print_int 1 ;")),
        until: Some(pat("print_int 2 ;")),
        ..SearchSpec::default()
    };
    let (once, _, _) = run_search(src, closed_spec);
    let repeat_spec = SearchSpec {
        after: Some(pat("print_int 1 ;")),
        until: Some(pat("print_int 2 ;")),
        repeat: true,
        ..SearchSpec::default()
    };
    let (again, _, _) = run_search(src, repeat_spec);
    assert!(
        again.lines.len() > once.lines.len(),
        "repeat must reopen the window: {} vs {}",
        again.lines.len(),
        once.lines.len()
    );
}

#[test]
fn multi_item_programs_show_current_item_only() {
    let src = "let x = 1 + 2\n\nlet y = x + x\n\nlet z = 1 + y";
    let (mut session, _) = capture::session();
    let items = parse_program(src).unwrap();
    let mut sink = CollectSink::default();
    let outcome = emit_trace(
        &mut session,
        &items,
        &RenderOptions::show_all(),
        None,
        &mut sink,
    )
    .unwrap();
    let texts: Vec<&str> = sink.lines.iter().map(|l| l.line.text.as_str()).collect();
    assert!(texts.contains(&"let x = 1 + 2"));
    assert!(texts.contains(&"let x = 3"));
    // under the default, an item's trace never shows its neighbours
    assert!(texts.iter().all(|t| !t.contains("\n\n")));
    assert!(texts.contains(&"let y = 3 + 3"));
    assert!(texts.contains(&"let z = 1 + 6"));
    assert!(matches!(outcome, TraceOutcome::Value(v) if v == stepml_core::Expr::Int(7)));
}

#[test]
fn show_all_items_renders_every_item() {
    let src = "let x = 1 + 2\n\nlet y = x + x";
    let (mut session, _) = capture::session();
    let items = parse_program(src).unwrap();
    let mut sink = CollectSink::default();
    let mut opts = RenderOptions::show_all();
    opts.show_all_items = true;
    emit_trace(&mut session, &items, &opts, None, &mut sink).unwrap();
    let first = &sink.lines[0].line.text;
    assert!(
        first.contains("let x = 1 + 2") && first.contains("let y = x + x"),
        "first state must show both items: {first:?}"
    );
    let last = &sink.lines.last().unwrap().line.text;
    assert!(
        last.contains("let x = 3") && last.contains("let y = 6"),
        "last state must show both completed items: {last:?}"
    );
}

#[test]
fn uncaught_exception_text_includes_payload() {
    let (mut session, _) = capture::session();
    let items = parse_program("failwith \"boom\"").unwrap();
    let mut sink = CollectSink::default();
    let outcome = emit_trace(
        &mut session,
        &items,
        &RenderOptions::show_all(),
        None,
        &mut sink,
    )
    .unwrap();
    assert!(matches!(outcome, TraceOutcome::Uncaught(..)));
    assert_eq!(
        sink.exception.as_deref(),
        Some("Exception: Failure \"boom\".")
    );
}

#[test]
fn filtered_output_is_a_subsequence() {
    let spec = SearchSpec {
        search: vec![pat("factorial")],
        ..SearchSpec::default()
    };
    let src = "let rec factorial n = if n = 1 then 1 else n * factorial (n - 1) in factorial 3";
    let (filtered, _, _) = run_search(src, spec);
    let (mut session, _) = capture::session();
    let items = parse_program(src).unwrap();
    let mut sink = CollectSink::default();
    emit_trace(
        &mut session,
        &items,
        &RenderOptions::show_all(),
        None,
        &mut sink,
    )
    .unwrap();
    let all: Vec<usize> = sink.lines.iter().map(|l| l.line.step_index).collect();
    let mut it = all.iter();
    for em in &filtered.lines {
        assert!(it.any(|i| *i == em.line.step_index));
    }
}

#[test]
fn invert_search_is_the_exact_complement() {
    let src = "1 * (2 * (3 * 4))";
    let straight = SearchSpec {
        search: vec![pat("12")],
        ..SearchSpec::default()
    };
    let inverted = SearchSpec {
        search: vec![pat("12")],
        invert_search: true,
        ..SearchSpec::default()
    };
    let (hits, _, _) = run_search(src, straight);
    let (misses, _, _) = run_search(src, inverted);
    let hit_idx: Vec<usize> = hits.lines.iter().map(|l| l.line.step_index).collect();
    let miss_idx: Vec<usize> = misses.lines.iter().map(|l| l.line.step_index).collect();
    assert!(hit_idx.iter().all(|i| !miss_idx.contains(i)));
    let mut union: Vec<usize> = hit_idx.iter().chain(&miss_idx).copied().collect();
    union.sort_unstable();
    assert_eq!(union, vec![0, 1, 2, 3]);
}

#[test]
fn no_parens_equals_matching_the_paren_stripped_line() {
    use stepml_core::syntax::lex;
    let lines = [
        "map (fun x -> (x + 1)) [1; 2; 3]",
        "(1 + 2) * (3 + (4))",
        "f ((g x))",
    ];
    let pats = ["fun x -> x + 1", "1 + 2 * 3", "g x", "(g x)"];
    for line in lines {
        // renormalize: drop parens, rejoin tokens with single spaces
        let stripped: String = lex(line)
            .unwrap()
            .into_iter()
            .map(|t| t.text)
            .filter(|t| t != "(" && t != ")")
            .collect::<Vec<_>>()
            .join(" ");
        for p in pats {
            let p = pat(p);
            assert_eq!(
                p.matches(line, true),
                p.matches(&stripped, true),
                "no-parens mismatch for {p:?} on {line:?} vs {stripped:?}"
            );
        }
    }
}

#[test]
fn redex_span_reparses_to_the_engine_redex() {
    use stepml_core::eval::{is_value, StepOutcome};
    use stepml_core::render::render;
    use stepml_core::syntax::{parse_expr, Expr};

    fn find_by_ptr<'a>(e: &'a Expr, p: *const Expr) -> Option<&'a Expr> {
        if std::ptr::eq(e, p) {
            return Some(e);
        }
        let mut found = None;
        let mut visit = |child: &'a Expr| {
            if found.is_none() {
                found = find_by_ptr(child, p);
            }
        };
        match e {
            Expr::Op(_, a, b)
            | Expr::Cmp(_, a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::App(a, b)
            | Expr::Seq(a, b)
            | Expr::Cons(a, b)
            | Expr::Assign(a, b) => {
                visit(a);
                visit(b);
            }
            Expr::If(c, t, els) => {
                visit(c);
                visit(t);
                if let Some(els) = els {
                    visit(els);
                }
            }
            Expr::Let(_, bs, body) => {
                bs.iter().for_each(|(_, rhs)| visit(rhs));
                visit(body);
            }
            Expr::LetDef(_, bs) => bs.iter().for_each(|(_, rhs)| visit(rhs)),
            Expr::Fun(f) => visit(&f.body),
            Expr::Function(f) => f.cases.iter().for_each(|c| visit(&c.body)),
            Expr::Match(s, cases) | Expr::TryWith(s, cases) => {
                visit(s);
                cases.iter().for_each(|c| visit(&c.body));
            }
            Expr::While(a, b, _, _) => {
                visit(a);
                visit(b);
            }
            Expr::For(_, a, _, b, body, _) => {
                visit(a);
                visit(b);
                visit(body);
            }
            Expr::Tuple(items) => items.iter().for_each(&mut visit),
            Expr::Constr(_, Some(p2)) | Expr::Raise(_, Some(p2)) => visit(p2),
            Expr::Deref(inner) => visit(inner),
            Expr::CallBuiltIn(b) => b.args.iter().for_each(&mut visit),
            _ => {}
        }
        found
    }

    for src in [
        "1 + 2 * 3",
        "1 + 2 > 3 + 4",
        "let rec f n = if n = 1 then 1 else n * f (n - 1) in f 3",
        "match 1 + 2 with 3 -> 9 | _ -> 0",
    ] {
        let (mut session, _) = capture::session();
        let items = parse_program(src).unwrap();
        let mut current = items[0].clone();
        let mut checked = 0;
        loop {
            if is_value(&current) {
                break;
            }
            let (_, redex) = session.peek_redex(&current);
            let redex = redex.expect("non-value state has a redex");
            let rendered = render(&current, false, Some(redex));
            let (s, e) = rendered.redex_span.expect("redex span present");
            let span_text = &rendered.text[s..e];
            let node = find_by_ptr(&current, redex).expect("redex is in the tree");
            // the marked text re-parses to the engine's redex, up to
            // parenthesization and closures printing as their names
            if let Ok(reparsed) = parse_expr(span_text) {
                assert_eq!(
                    stepml_core::render_plain(&reparsed),
                    stepml_core::render_plain(node),
                    "span {span_text:?} is not the redex"
                );
                checked += 1;
            }
            match session.eval_step(&current).unwrap() {
                StepOutcome::Next(next, _) => current = next,
                _ => break,
            }
        }
        assert!(checked > 0, "no spans checked for {src}");
    }
}

#[test]
fn gutter_bindings_are_searchable() {
    // A hoisted binding like `n = 4` is part of the text searches see.
    let (mut session, _) = capture::session();
    let items = parse_program(
        "let rec f n = if n = 1 then 1 else n * f (n - 1) in f 3",
    )
    .unwrap();
    let mut sink = CollectSink::default();
    let mut opts = RenderOptions::show_all();
    opts.side_lets = true;
    let spec = SearchSpec {
        search: vec![pat("n = 3")],
        ..SearchSpec::default()
    };
    let mut filter = SearchFilter::new(spec);
    emit_trace(&mut session, &items, &opts, Some(&mut filter), &mut sink).unwrap();
    assert!(!sink.lines.is_empty());
    assert!(sink
        .lines
        .iter()
        .all(|l| l.line.gutter.contains("n = 3") || l.line.text.contains("n = 3")));
    assert!(sink.lines.iter().any(|l| l.line.gutter.contains("n = 3")));
}

#[test]
fn inverted_until_shows_from_the_match_onward() {
    let spec = SearchSpec {
        until: Some(pat("1 * 24")),
        invert_until: true,
        ..SearchSpec::default()
    };
    let (sink, _, _) = run_search("1 * (2 * (3 * 4))", spec);
    let texts: Vec<&str> = sink.lines.iter().map(|l| l.line.text.as_str()).collect();
    // the matching line itself is past the boundary: exclusive start
    assert_eq!(texts, vec!["24"]);
}

#[test]
fn inverted_after_shows_until_the_match() {
    let spec = SearchSpec {
        after: Some(pat("1 * 24")),
        invert_after: true,
        ..SearchSpec::default()
    };
    let (sink, _, _) = run_search("1 * (2 * (3 * 4))", spec);
    let texts: Vec<&str> = sink.lines.iter().map(|l| l.line.text.as_str()).collect();
    assert_eq!(texts, vec!["1 * (2 * (3 * 4))", "1 * (2 * 12)"]);
}

#[test]
fn cyclic_references_terminate() {
    // An untyped program can tie a reference into a cycle; displaying,
    // testing and comparing such values must still terminate.
    let (mut session, _) = capture::session();
    let items = parse_program("let r = ref 0 in r := r; !r").unwrap();
    let mut sink = CollectSink::default();
    let outcome = emit_trace(
        &mut session,
        &items,
        &RenderOptions::show_all(),
        None,
        &mut sink,
    )
    .unwrap();
    match outcome {
        TraceOutcome::Value(v) => {
            let text = stepml_core::render_plain(&v);
            assert!(text.contains("<cycle>"), "got {text}");
        }
        other => panic!("unexpected {other:?}"),
    }
}
