//! Plain-text parity-check matrix format.
//!
//! ```text
//! m N P dc seed
//! col:coeff col:coeff ...      (one line per row, coeff in hex)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nbmimo_core::code::{Entry, ParityCheckMatrix};
use nbmimo_core::GfSymbol;

use crate::error::{io_at, Result, SimError};

pub fn write_code<W: Write>(code: &ParityCheckMatrix, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {} {} {} {}", code.m(), code.n(), code.p(), code.dc(), code.seed())?;
    for row in code.rows() {
        let mut first = true;
        for e in row {
            if !first {
                w.write_all(b" ")?;
            }
            first = false;
            write!(w, "{}:{:x}", e.col, e.coeff.value())?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn bad(line: usize, msg: impl Into<String>) -> SimError {
    SimError::CodeFormat { line, msg: msg.into() }
}

pub fn read_code<R: BufRead>(r: R) -> Result<ParityCheckMatrix> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(bad(1, format!("expected `m N P dc seed`, found {header:?}")));
    }
    let num = |i: usize| fields[i].parse::<u64>().map_err(|e| bad(1, format!("{:?}: {e}", fields[i])));
    let (m, n, p, dc, seed) = (num(0)?, num(1)?, num(2)?, num(3)?, num(4)?);
    if !(1..=16).contains(&m) {
        return Err(bad(1, format!("field degree {m} out of range")));
    }

    let mut rows = Vec::with_capacity(p as usize);
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() && rows.len() == p as usize {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            let (c, a) = tok.split_once(':').ok_or_else(|| bad(lineno, format!("{tok:?} is not col:coeff")))?;
            let col = c.parse::<usize>().map_err(|e| bad(lineno, format!("column {c:?}: {e}")))?;
            let a = a.trim_start_matches("0x");
            let coeff = u16::from_str_radix(a, 16).map_err(|e| bad(lineno, format!("coefficient {a:?}: {e}")))?;
            row.push(Entry { col, coeff: GfSymbol::from_raw(coeff) });
        }
        if row.len() as u64 != dc {
            return Err(bad(lineno, format!("row has {} entries, header says dc = {dc}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() as u64 != p {
        return Err(bad(0, format!("{} rows, header says P = {p}", rows.len())));
    }
    let code = ParityCheckMatrix::from_rows(m as u32, n as usize, rows, seed)?;
    if !code.is_regular(2, dc as usize) {
        return Err(bad(0, "some column does not have weight 2"));
    }
    Ok(code)
}

pub fn save_code(code: &ParityCheckMatrix, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(io_at(path))?;
    write_code(code, BufWriter::new(f)).map_err(io_at(path))
}

pub fn load_code(path: &Path) -> Result<ParityCheckMatrix> {
    let f = File::open(path).map_err(io_at(path))?;
    read_code(BufReader::new(f)).map_err(|e| match e {
        SimError::Write(source) => SimError::Io { path: path.into(), source },
        e => e,
    })
}
