//! Burmeister `.cxt` files.

use std::fs;
use std::path::Path;

use fixedbitset::FixedBitSet;

use super::{FcaError, FormalContext};

pub fn render_cxt(ctx: &FormalContext) -> String {
    let mut out = format!("B\n\n{}\n{}\n\n", ctx.object_count(), ctx.attribute_count());
    for name in ctx.objects().iter().chain(ctx.attributes()) {
        out.push_str(name);
        out.push('\n');
    }
    for row in ctx.rows() {
        out.extend((0..ctx.attribute_count()).map(|j| if row.contains(j) { 'X' } else { '.' }));
        out.push('\n');
    }
    out
}

/// Parses the text of a `.cxt` file. CRLF endings are accepted.
pub fn parse_cxt(text: &str) -> Result<FormalContext, FcaError> {
    let lines: Vec<&str> = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let err = |line: usize, message: String| FcaError::Parse { line, message };
    let get = |i: usize| {
        lines
            .get(i)
            .copied()
            .ok_or_else(|| err(i + 1, "unexpected end of file".into()))
    };
    if get(0)? != "B" {
        return Err(err(1, "expected \"B\"".into()));
    }
    if !get(1)?.is_empty() {
        return Err(err(2, "expected an empty line".into()));
    }
    let count = |i: usize| -> Result<usize, FcaError> {
        let s = get(i)?;
        s.trim()
            .parse()
            .map_err(|_| err(i + 1, format!("expected a count, got {s:?}")))
    };
    let g = count(2)?;
    let m = count(3)?;
    if !get(4)?.is_empty() {
        return Err(err(5, "expected an empty line".into()));
    }
    let mut i = 5;
    let mut take = |n: usize| -> Result<Vec<String>, FcaError> {
        let names = (i..i + n)
            .map(|j| get(j).map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        i += n;
        Ok(names)
    };
    let objects = take(g)?;
    let attributes = take(m)?;
    let mut rows = Vec::with_capacity(g);
    for r in 0..g {
        let line_no = i + r + 1;
        let line = get(i + r)?;
        if line.chars().count() != m {
            return Err(err(
                line_no,
                format!("row has {} cells, expected {m}", line.chars().count()),
            ));
        }
        let mut row = FixedBitSet::with_capacity(m);
        for (j, c) in line.chars().enumerate() {
            match c {
                'X' | 'x' => row.insert(j),
                '.' => {}
                other => return Err(err(line_no, format!("unexpected character {other:?}"))),
            }
        }
        rows.push(row);
    }
    if let Some(extra) = lines[i + g..].iter().position(|l| !l.trim().is_empty()) {
        return Err(err(
            i + g + extra + 1,
            format!("more rows than the declared {g} objects"),
        ));
    }
    FormalContext::new(objects, attributes, rows)
}

pub fn read_cxt(path: &Path) -> Result<FormalContext, FcaError> {
    parse_cxt(&fs::read_to_string(path)?)
}

pub fn write_cxt(ctx: &FormalContext, path: &Path) -> Result<(), FcaError> {
    fs::write(path, render_cxt(ctx))?;
    Ok(())
}
