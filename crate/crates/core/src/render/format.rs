//! Turning trace lines into terminal output: arrows, gutter, underline and
//! highlight escape codes, and width-wrapping.

use super::trace::Arrow;
use super::{RenderOptions, TraceLine};

const UNDERLINE_ON: &str = "\x1b[4m";
const UNDERLINE_OFF: &str = "\x1b[24m";
const REVERSE_ON: &str = "\x1b[7m";
const REVERSE_OFF: &str = "\x1b[27m";

/// Format one trace line for output. `highlights` are byte spans over the
/// composed (gutter-prefixed) plain text.
pub fn format_line(
    line: &TraceLine,
    arrow: Arrow,
    highlights: &[(usize, usize)],
    opts: &RenderOptions,
) -> String {
    let arrow_str = match arrow {
        Arrow::First => "   ",
        Arrow::Step => "=> ",
        Arrow::Elided => "=>* ",
    };
    let prefix = if line.gutter.is_empty() {
        arrow_str.to_string()
    } else {
        format!("{}  {}", line.gutter, arrow_str)
    };
    // Spans over the final string: shift text spans past the prefix, remap
    // composed-text highlight spans around the inserted arrow.
    let text_start = prefix.len();
    let composed_text_start = line.text_offset();
    let mut underline: Vec<(usize, usize)> = Vec::new();
    if opts.ansi && opts.underline_redex {
        if let Some((s, e)) = line.redex_span {
            underline.push((text_start + s, text_start + e));
        }
    }
    let mut reverse: Vec<(usize, usize)> = Vec::new();
    if opts.ansi {
        for &(s, e) in highlights {
            // portion in the gutter
            if s < composed_text_start {
                let ge = e.min(composed_text_start.saturating_sub(2));
                if s < ge {
                    reverse.push((s, ge));
                }
            }
            // portion in the text
            if e > composed_text_start {
                let ts = s.max(composed_text_start) - composed_text_start;
                let te = e - composed_text_start;
                reverse.push((text_start + ts, text_start + te));
            }
        }
    }
    let full = format!("{prefix}{}", line.text);
    let wrapped = wrap(&full, opts.width.unwrap_or(0));
    apply_styles(&wrapped, &underline, &reverse)
}

/// Break a line into rows of at most `width` visible columns, continuation
/// rows indented six spaces. Returns row ranges over the input string.
fn wrap(s: &str, width: usize) -> Vec<(usize, &str)> {
    if width == 0 || s.len() <= width {
        return vec![(0, s)];
    }
    let mut rows = Vec::new();
    let mut start = 0;
    let mut budget = width;
    while s.len() - start > budget {
        let slice = &s[start..];
        let mut limit = budget.min(slice.len());
        while !slice.is_char_boundary(limit) {
            limit -= 1;
        }
        // break at the last space before the limit, or hard-break
        let cut = slice[..limit]
            .rfind(' ')
            .filter(|&c| c > 0)
            .unwrap_or(limit);
        rows.push((start, &s[start..start + cut]));
        start += cut;
        while s[start..].starts_with(' ') {
            start += 1;
        }
        budget = width.saturating_sub(6).max(8);
    }
    rows.push((start, &s[start..]));
    rows
}

/// Emit rows with SGR codes inserted at span boundaries.
fn apply_styles(
    rows: &[(usize, &str)],
    underline: &[(usize, usize)],
    reverse: &[(usize, usize)],
) -> String {
    let mut out = String::new();
    for (i, (offset, row)) in rows.iter().enumerate() {
        if i > 0 {
            out.push('\n');
            out.push_str("      ");
        }
        let mut points: Vec<usize> = vec![0, row.len()];
        for &(s, e) in underline.iter().chain(reverse) {
            for p in [s, e] {
                if p > *offset && p < offset + row.len() {
                    points.push(p - offset);
                }
            }
        }
        points.sort_unstable();
        points.dedup();
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let abs = offset + a;
            let under = underline.iter().any(|&(s, e)| abs >= s && abs < e);
            let rev = reverse.iter().any(|&(s, e)| abs >= s && abs < e);
            if under {
                out.push_str(UNDERLINE_ON);
            }
            if rev {
                out.push_str(REVERSE_ON);
            }
            out.push_str(&row[a..b]);
            if rev {
                out.push_str(REVERSE_OFF);
            }
            if under {
                out.push_str(UNDERLINE_OFF);
            }
        }
    }
    out
}

/// Remove ANSI SGR escape sequences.
pub fn strip_ansi(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\x1b' && chars.peek() == Some(&'[') {
            chars.next();
            for c in chars.by_ref() {
                if c.is_ascii_alphabetic() {
                    break;
                }
            }
        } else {
            out.push(c);
        }
    }
    out
}
