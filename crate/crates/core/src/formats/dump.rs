//! Memory state dumps.
//!
//! The first line is `grid W H mode M shapes K`, followed by ` counts N1,N2,…`
//! when K > 0. Each following line is `label re im` with the label written
//! qubit 0 first; lines are sorted by label and numbers use the shortest
//! representation that parses back to the same `f64`.

use crate::error::{Error, Result};
use crate::image::{Grid, MemoryState, ShapeHeader, StorageMode};
use crate::state::{fmt_real, BasisLabel, SparseState};
use num_complex::Complex64;

pub fn write_dump(memory: &MemoryState) -> String {
    let counts = &memory.header.vertex_counts;
    let mut out = format!(
        "grid {} {} mode {} shapes {}",
        memory.grid.width,
        memory.grid.height,
        memory.mode.as_str(),
        counts.len()
    );
    if !counts.is_empty() {
        let list: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!(" counts {}", list.join(",")));
    }
    out.push('\n');
    for (label, a) in memory.state.iter() {
        out.push_str(&format!("{label} {} {}\n", fmt_real(a.re), fmt_real(a.im)));
    }
    out
}

fn field<'a>(line: usize, words: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    match words.next() {
        Some(k) if k == key => words
            .next()
            .ok_or_else(|| Error::parse(line, format!("missing value for {key}"))),
        Some(k) => Err(Error::parse(line, format!("expected {key:?}, found {k:?}"))),
        None => Err(Error::parse(line, format!("missing {key:?}"))),
    }
}

fn number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {token:?}")))
}

pub fn read_dump(text: &str) -> Result<MemoryState> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty dump"))?;
    let mut words = header.split_whitespace();
    let w: usize = number(1, field(1, &mut words, "grid")?, "grid width")?;
    let h: usize = number(1, words.next().unwrap_or(""), "grid height")?;
    let grid = Grid::new(w, h).map_err(|e| Error::parse(1, e.to_string()))?;
    let mode: StorageMode = field(1, &mut words, "mode")?
        .parse()
        .map_err(|e: Error| Error::parse(1, e.to_string()))?;
    let k: usize = number(1, field(1, &mut words, "shapes")?, "shape count")?;
    let vertex_counts = if k > 0 {
        field(1, &mut words, "counts")?
            .split(',')
            .map(|c| number(1, c, "vertex count"))
            .collect::<Result<Vec<usize>>>()?
    } else {
        Vec::new()
    };
    if vertex_counts.len() != k {
        return Err(Error::parse(1, format!("{k} shapes but {} counts", vertex_counts.len())));
    }
    if let Some(extra) = words.next() {
        return Err(Error::parse(1, format!("unexpected header token {extra:?}")));
    }

    let n = grid.n_qubits();
    let mut entries = Vec::new();
    let mut previous: Option<u64> = None;
    for (i, raw) in lines {
        let line = i + 1;
        let parts: Vec<&str> = raw.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::parse(line, "expected `label re im`"));
        }
        let label: BasisLabel = parts[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid label {:?}", parts[0])))?;
        if label.n_qubits() != n {
            return Err(Error::parse(
                line,
                format!("label has {} qubits, grid has {n}", label.n_qubits()),
            ));
        }
        if previous.is_some_and(|p| p >= label.index()) {
            return Err(Error::parse(line, "labels must be strictly increasing"));
        }
        previous = Some(label.index());
        let re: f64 = number(line, parts[1], "real part")?;
        let im: f64 = number(line, parts[2], "imaginary part")?;
        entries.push((label.index(), Complex64::new(re, im)));
    }
    let state = SparseState::from_amplitudes(n, entries)
        .map_err(|e| Error::parse(1, e.to_string()))?;
    Ok(MemoryState {
        state,
        grid,
        mode,
        header: ShapeHeader { vertex_counts },
    })
}
