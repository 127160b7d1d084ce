//! Plain (ASCII) PBM, magic `P1`. `1` is black.

use crate::error::{Error, Result};
use crate::image::Grid;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    /// Row-major, `true` for black.
    pub pixels: Vec<bool>,
}

impl Bitmap {
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.width, self.height)
    }

    /// Coordinates of black pixels in row-major order.
    pub fn black(&self) -> Vec<(usize, usize)> {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    pub fn set(&mut self, x: usize, y: usize) {
        self.pixels[y * self.width + x] = true;
    }
}

/// Tokenizer yielding `(line, token)` with `#` comments removed.
struct Tokens<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: Vec<&'a str>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
            current: Vec::new(),
            line: 0,
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.current.is_empty() {
            let (i, l) = self.lines.next()?;
            self.line = i + 1;
            let content = l.split('#').next().unwrap_or("");
            self.current = content.split_whitespace().rev().collect();
        }
        self.current.pop().map(|t| (self.line, t))
    }
}

pub fn parse_pbm(text: &str) -> Result<Bitmap> {
    let mut tokens = Tokens::new(text);
    // the magic may be glued to the first dimension only in raw PBM, which is not accepted
    match tokens.next() {
        Some((_, "P1")) => {}
        Some((line, other)) => {
            return Err(Error::parse(line, format!("expected \"P1\" magic, found {other:?}")))
        }
        None => return Err(Error::parse(1, "expected \"P1\" magic, found empty input")),
    }
    let mut dim = |what: &str| -> Result<usize> {
        match tokens.next() {
            Some((line, t)) => t
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| Error::parse(line, format!("invalid {what} {t:?}"))),
            None => Err(Error::parse(tokens.line.max(1), format!("missing {what}"))),
        }
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let total = width
        .checked_mul(height)
        .ok_or_else(|| Error::parse(1, "image dimensions overflow"))?;
    let mut pixels = Vec::with_capacity(total);
    while let Some((line, t)) = tokens.next() {
        for c in t.chars() {
            match c {
                '0' => pixels.push(false),
                '1' => pixels.push(true),
                other => {
                    return Err(Error::parse(line, format!("invalid pixel character {other:?}")))
                }
            }
            if pixels.len() > total {
                return Err(Error::parse(line, format!("more than {total} pixels")));
            }
        }
    }
    if pixels.len() != total {
        return Err(Error::parse(
            tokens.line.max(1),
            format!("expected {total} pixels, found {}", pixels.len()),
        ));
    }
    Ok(Bitmap {
        width,
        height,
        pixels,
    })
}

pub fn write_pbm(bitmap: &Bitmap) -> String {
    let mut out = format!("P1\n{} {}\n", bitmap.width, bitmap.height);
    for row in bitmap.pixels.chunks(bitmap.width) {
        let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
