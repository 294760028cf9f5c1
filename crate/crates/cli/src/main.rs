//! The `stepml` command: evaluate small ML-flavoured programs by direct
//! interpretation, optionally printing every reduction step.

use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use stepml_core::eval::{RunResult, Session};
use stepml_core::render::trace::{emit_trace, WriteSink};
use stepml_core::render::{render_plain, RenderOptions, TraceOutcome};
use stepml_core::search::{compile_pattern, SearchFilter, SearchSpec};
use stepml_core::syntax::parse_program;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Run the program, print nothing but its own output.
    Silent,
    /// Print the final value.
    Show,
    /// Print every stage of the computation.
    ShowAll,
    /// Print the trace with the default elisions applied.
    ShowReduced,
}

struct Invocation {
    files: Vec<PathBuf>,
    entry: Option<String>,
    mode: Mode,
    fast_curry: bool,
    side_lets: bool,
    show_all_items: bool,
    ansi: Option<bool>,
    step_budget: Option<u64>,
    no_prelude: bool,
    search: SearchTexts,
}

#[derive(Default)]
struct SearchTexts {
    search: Vec<String>,
    until: Option<String>,
    after: Option<String>,
    until_any: Option<String>,
    after_any: Option<String>,
    highlight: bool,
    no_parens: bool,
    regexp: bool,
    invert_search: bool,
    invert_after: bool,
    invert_until: bool,
    stop: bool,
    repeat: bool,
    n: Option<usize>,
    upto: Option<usize>,
}

impl SearchTexts {
    fn any(&self) -> bool {
        !self.search.is_empty()
            || self.until.is_some()
            || self.after.is_some()
            || self.until_any.is_some()
            || self.after_any.is_some()
            || self.n.is_some()
    }
}

const USAGE: &str = "\
usage: stepml [options] <file.ml> ...

Earlier files are loaded as modules (module name = capitalized file stem);
the last file is the program, unless -e supplies it.

modes:
  -show              print the final value of the program
  -show-all          print every stage of the computation
  -show-reduced      print the trace with uninteresting steps elided

display:
  -side-lets         move uniquely-bound let bindings to a side gutter
  -fast-curry        apply all arguments of a curried call in one step
  -show-all-items    render every structure item each step
  -ansi / -plain     force ANSI styling on / off (default: on for terminals)

search (applies to traces):
  -search <pat>      show only steps matching the token pattern
  -highlight         highlight the matching part of each step
  -no-parens         ignore parentheses when matching
  -regexp            patterns are regular expressions
  -upto <n>          show n lines preceding each result
  -invert-search     show non-matching steps
  -n <n>             show at most n results
  -until <pat>       show only until this matches a printed step
  -after <pat>       show only after this matches a printed step
  -until-any <pat>   show only until this matches any step
  -after-any <pat>   show only after this matches any step
  -invert-until      invert the until condition
  -invert-after      invert the after condition
  -stop              stop computation after the final search result
  -repeat            allow the after...until window to repeat

evaluation:
  -e <expr>          evaluate this program text (after loading the files)
  -step-budget <n>   abort after n reduction steps (default 10000000)
  -no-prelude        do not load the standard prelude

The STEPML_WIDTH environment variable wraps trace lines at that width.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let inv = match parse_args(&args) {
        Ok(inv) => inv,
        Err(msg) => {
            eprintln!("stepml: {msg}");
            eprint!("{USAGE}");
            return ExitCode::from(1);
        }
    };
    // Deeply nested states recurse through the engine and the printer, so
    // interpret on a thread with plenty of stack.
    let worker = std::thread::Builder::new()
        .name("interpreter".into())
        .stack_size(512 * 1024 * 1024)
        .spawn(move || run(inv))
        .expect("spawn interpreter thread");
    match worker.join() {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(msg)) => {
            eprintln!("stepml: {msg}");
            ExitCode::from(1)
        }
        Err(_) => ExitCode::from(1),
    }
}

fn parse_args(args: &[String]) -> Result<Invocation, String> {
    let mut inv = Invocation {
        files: Vec::new(),
        entry: None,
        mode: Mode::Silent,
        fast_curry: false,
        side_lets: false,
        show_all_items: false,
        ansi: None,
        step_budget: None,
        no_prelude: false,
        search: SearchTexts::default(),
    };
    let mut it = args.iter();
    let value = |it: &mut std::slice::Iter<String>, flag: &str| {
        it.next()
            .cloned()
            .ok_or_else(|| format!("{flag} needs an argument"))
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "-show" => inv.mode = Mode::Show,
            "-show-all" => inv.mode = Mode::ShowAll,
            "-show-reduced" => inv.mode = Mode::ShowReduced,
            "-e" => inv.entry = Some(value(&mut it, "-e")?),
            "-fast-curry" => inv.fast_curry = true,
            "-side-lets" => inv.side_lets = true,
            "-show-all-items" => inv.show_all_items = true,
            "-ansi" => inv.ansi = Some(true),
            "-plain" => inv.ansi = Some(false),
            "-no-prelude" => inv.no_prelude = true,
            "-step-budget" => {
                let v = value(&mut it, "-step-budget")?;
                inv.step_budget = Some(v.parse().map_err(|_| format!("bad step budget '{v}'"))?);
            }
            "-search" => inv.search.search.push(value(&mut it, "-search")?),
            "-highlight" => inv.search.highlight = true,
            "-no-parens" => inv.search.no_parens = true,
            "-regexp" => inv.search.regexp = true,
            "-invert-search" => inv.search.invert_search = true,
            "-invert-after" => inv.search.invert_after = true,
            "-invert-until" => inv.search.invert_until = true,
            "-stop" => inv.search.stop = true,
            "-repeat" => inv.search.repeat = true,
            "-until" => inv.search.until = Some(value(&mut it, "-until")?),
            "-after" => inv.search.after = Some(value(&mut it, "-after")?),
            "-until-any" => inv.search.until_any = Some(value(&mut it, "-until-any")?),
            "-after-any" => inv.search.after_any = Some(value(&mut it, "-after-any")?),
            "-n" => {
                let v = value(&mut it, "-n")?;
                inv.search.n = Some(v.parse().map_err(|_| format!("bad count '{v}'"))?);
            }
            "-upto" => {
                let v = value(&mut it, "-upto")?;
                inv.search.upto = Some(v.parse().map_err(|_| format!("bad count '{v}'"))?);
            }
            other if other.starts_with('-') => return Err(format!("unknown flag '{other}'")),
            file => inv.files.push(PathBuf::from(file)),
        }
    }
    if inv.files.is_empty() && inv.entry.is_none() {
        return Err("no input files".into());
    }
    // Search flags imply a trace.
    if inv.mode == Mode::Silent && inv.search.any() {
        inv.mode = Mode::ShowAll;
    }
    Ok(inv)
}

fn compile_search(texts: &SearchTexts) -> Result<SearchSpec, String> {
    let compile = |t: &String| compile_pattern(t, texts.regexp).map_err(|e| e.to_string());
    Ok(SearchSpec {
        search: texts.search.iter().map(compile).collect::<Result<_, _>>()?,
        until: texts.until.as_ref().map(compile).transpose()?,
        after: texts.after.as_ref().map(compile).transpose()?,
        until_any: texts.until_any.as_ref().map(compile).transpose()?,
        after_any: texts.after_any.as_ref().map(compile).transpose()?,
        highlight: texts.highlight,
        no_parens: texts.no_parens,
        invert_search: texts.invert_search,
        invert_after: texts.invert_after,
        invert_until: texts.invert_until,
        stop: texts.stop,
        repeat: texts.repeat,
        max_results: texts.n,
        upto: texts.upto.unwrap_or(0),
    })
}

fn module_name(path: &std::path::Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "Main".into());
    let mut chars = stem.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => "Main".into(),
    }
}

fn run(inv: Invocation) -> Result<u8, String> {
    let mut session = if inv.no_prelude {
        Session::bare(Box::new(std::io::stdout()))
    } else {
        Session::with_output(Box::new(std::io::stdout()))
    };
    if let Some(budget) = inv.step_budget {
        session.step_budget = budget;
    }
    session.fast_curry = inv.fast_curry;

    // Everything but the program is a module, loaded in command-line order.
    let (modules, program_file) = if inv.entry.is_some() {
        (inv.files.as_slice(), None)
    } else {
        let (last, rest) = inv.files.split_last().expect("checked non-empty");
        (rest, Some(last))
    };
    for path in modules {
        let source =
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let items = parse_program(&source).map_err(|e| format!("{}: {e}", path.display()))?;
        session
            .load_module(&module_name(path), items)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let program_text = match (&inv.entry, program_file) {
        (Some(e), _) => e.clone(),
        (None, Some(path)) => {
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
        }
        (None, None) => unreachable!(),
    };
    let items = parse_program(&program_text).map_err(|e| e.to_string())?;

    match inv.mode {
        Mode::Silent | Mode::Show => {
            let result = session.run_program(&items).map_err(|e| e.to_string())?;
            match result {
                RunResult::Value(v) => {
                    if inv.mode == Mode::Show {
                        println!("{}", render_plain(&v));
                    }
                    Ok(0)
                }
                RunResult::Uncaught(name, payload) => {
                    match payload {
                        None => eprintln!("Exception: {name}."),
                        Some(p) => eprintln!("Exception: {name} {}.", render_plain(&p)),
                    }
                    Ok(2)
                }
            }
        }
        Mode::ShowAll | Mode::ShowReduced => {
            let mut opts = if inv.mode == Mode::ShowAll {
                RenderOptions::show_all()
            } else {
                RenderOptions::default()
            };
            opts.fast_curry = inv.fast_curry;
            opts.side_lets = inv.side_lets;
            opts.show_all_items = inv.show_all_items;
            opts.ansi = inv.ansi.unwrap_or_else(|| std::io::stderr().is_terminal());
            opts.width = std::env::var("STEPML_WIDTH")
                .ok()
                .and_then(|w| w.parse().ok());
            let spec = compile_search(&inv.search)?;
            let mut filter = spec.is_active().then(|| SearchFilter::new(spec));
            let mut stderr = std::io::stderr();
            let mut sink = WriteSink {
                out: &mut stderr,
                opts: opts.clone(),
            };
            let outcome = emit_trace(&mut session, &items, &opts, filter.as_mut(), &mut sink)
                .map_err(|e| e.to_string())?;
            let _ = std::io::stderr().flush();
            match outcome {
                TraceOutcome::Value(_) | TraceOutcome::Stopped => Ok(0),
                TraceOutcome::Uncaught(..) => Ok(2),
            }
        }
    }
}
