//! Shape specification text:
//!
//! ```text
//! grid 4 4
//! shape 0,0 3,0 1,2
//! shape 2,1 0,3 3,3
//! ```
//!
//! Blank lines and `#` comments are ignored.

use crate::error::{Error, Result};
use crate::image::{Grid, Shape};

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub grid: Grid,
    pub shapes: Vec<Shape>,
}

fn parse_usize(line: usize, token: &str, what: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {token:?}")))
}

/// Parses a shape specification; `fallback_grid` is used when the text has
/// no `grid` line and must agree with it when it has one.
pub fn parse_shape_spec(text: &str, fallback_grid: Option<Grid>) -> Result<ShapeSpec> {
    let mut grid: Option<Grid> = None;
    let mut shapes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        match words.next() {
            Some("grid") => {
                if grid.is_some() {
                    return Err(Error::parse(line, "duplicate grid line"));
                }
                if !shapes.is_empty() {
                    return Err(Error::parse(line, "grid line must precede shapes"));
                }
                let w = parse_usize(line, words.next().unwrap_or(""), "grid width")?;
                let h = parse_usize(line, words.next().unwrap_or(""), "grid height")?;
                if words.next().is_some() {
                    return Err(Error::parse(line, "trailing tokens after grid dimensions"));
                }
                grid = Some(Grid::new(w, h).map_err(|e| Error::parse(line, e.to_string()))?);
            }
            Some("shape") => {
                let mut vertices = Vec::new();
                for token in words {
                    let (x, y) = token
                        .split_once(',')
                        .ok_or_else(|| Error::parse(line, format!("vertex {token:?} is not x,y")))?;
                    vertices.push((
                        parse_usize(line, x, "x coordinate")?,
                        parse_usize(line, y, "y coordinate")?,
                    ));
                }
                let shape = Shape::new(vertices).map_err(|e| Error::parse(line, e.to_string()))?;
                let g = grid.or(fallback_grid).ok_or_else(|| {
                    Error::parse(line, "shape before any grid line and no grid given")
                })?;
                for &(x, y) in shape.vertices() {
                    if !g.contains((x, y)) {
                        return Err(Error::parse(
                            line,
                            format!("vertex ({x},{y}) outside the {}x{} grid", g.width, g.height),
                        ));
                    }
                }
                shapes.push(shape);
            }
            Some(other) => {
                return Err(Error::parse(line, format!("unknown directive {other:?}")));
            }
            None => unreachable!("empty lines skipped"),
        }
    }
    let grid = match (grid, fallback_grid) {
        (Some(g), Some(f)) if g != f => {
            return Err(Error::parse(
                1,
                format!(
                    "grid {}x{} disagrees with requested {}x{}",
                    g.width, g.height, f.width, f.height
                ),
            ))
        }
        (Some(g), _) | (None, Some(g)) => g,
        (None, None) => return Err(Error::parse(1, "missing grid line")),
    };
    Ok(ShapeSpec { grid, shapes })
}

pub fn write_shape_spec(spec: &ShapeSpec) -> String {
    let mut out = format!("grid {} {}\n", spec.grid.width, spec.grid.height);
    for s in &spec.shapes {
        let verts: Vec<String> = s.vertices().iter().map(|(x, y)| format!("{x},{y}")).collect();
        out.push_str(&format!("shape {}\n", verts.join(" ")));
    }
    out
}
