use stepml_core::eval::Session;
use stepml_core::render::trace::{emit_trace, Arrow, CollectSink};
use stepml_core::render::{RenderOptions, TraceOutcome};
use stepml_core::syntax::parse_program;

fn show(src: &str, opts: RenderOptions) {
    let items = parse_program(src).unwrap();
    let mut session = Session::with_output(Box::new(std::io::stdout()));
    let mut sink = CollectSink::default();
    let out = emit_trace(&mut session, &items, &opts, None, &mut sink).unwrap();
    for em in &sink.lines {
        let arrow = match em.arrow {
            Arrow::First => "   ",
            Arrow::Step => "=> ",
            Arrow::Elided => "=>*",
        };
        let g = if em.line.gutter.is_empty() {
            String::new()
        } else {
            format!("{}  ", em.line.gutter)
        };
        println!("{g}{arrow} {}", em.line.text);
    }
    if let Some(e) = &sink.exception {
        println!("{e}");
    }
    let outcome = match out {
        TraceOutcome::Value(v) => stepml_core::render_plain(&v),
        other => format!("{other:?}"),
    };
    println!("--- outcome: {outcome}\n");
}

fn main() {
    let arg = std::env::args().nth(1).unwrap_or_default();
    let fact = "let rec factorial n = if n = 1 then 1 else n * factorial (n - 1) in factorial 4";
    match arg.as_str() {
        "smoke" => show("1 + 2 * 3", RenderOptions::show_all()),
        "cmp" => show("1 + 2 > 3 + 4", RenderOptions::show_all()),
        "elide" => show("1 * (2 * (3 * 4))", RenderOptions::default()),
        "elide-all" => show("1 * (2 * (3 * 4))", RenderOptions::show_all()),
        "fact" => {
            let o = RenderOptions {
                side_lets: true,
                ..RenderOptions::default()
            };
            show(fact, o);
        }
        "fact-all" => show(fact, RenderOptions::show_all()),
        "for" => show(
            "for y = 0 + 1 to 6 - 1 do print_int y done",
            RenderOptions::show_all(),
        ),
        "for-red" => show(
            "for y = 0 + 1 to 6 - 1 do print_int y done",
            RenderOptions::default(),
        ),
        "exn" => show(
            "try 1 + 1/(1-1) with Division_by_zero -> 2 + 2",
            RenderOptions::show_all(),
        ),
        "exn2" => show("1 + 1/(1-1)", RenderOptions::show_all()),
        "curry" => show("(fun x y -> x + y) 4 5", RenderOptions::default()),
        "curry-all" => show("(fun x y -> x + y) 4 5", RenderOptions::show_all()),
        "fastcurry" => {
            let o = RenderOptions {
                fast_curry: true,
                ..RenderOptions::default()
            };
            show("(fun x y -> x + y) 4 5", o);
        }
        "refs" => show("let x = ref 0 in x := !x + 1", RenderOptions::default()),
        "refs-all" => show("let x = ref 0 in x := !x + 1", RenderOptions::show_all()),
        "map" => show("map (fun x -> x + 1) [1; 2; 3]", RenderOptions::default()),
        "map-all" => show("map (fun x -> x + 1) [1; 2; 3]", RenderOptions::show_all()),
        "match" => show(
            "match 1 + 2 with 4 -> 0 | 3 -> 1 + 2 | _ -> 1",
            RenderOptions::show_all(),
        ),
        other => eprintln!("unknown probe {other}"),
    }
}
