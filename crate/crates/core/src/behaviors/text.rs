//! LED text: bitmaps of lit cells and their layout as robot positions.

use std::collections::BTreeMap;

use thiserror::Error;

/// Diameter of a Kilobot body; text cells may not be packed tighter.
pub const BODY_DIAMETER_MM: f64 = 33.0;

const BUILTIN_FONT: &str = include_str!("../../data/font5x7.txt");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextError {
    #[error("bitmap has no lit cell")]
    EmptyBitmap,
    #[error("bitmap line {line} has width {width}, expected {expected}")]
    RaggedBitmap { line: usize, width: usize, expected: usize },
    #[error("bitmap line {line}: unexpected character '{ch}' (use '.' or '#')")]
    BadCell { line: usize, ch: char },
    #[error("spacing {0} mm is below the {BODY_DIAMETER_MM} mm body diameter")]
    SpacingTooSmall(f64),
    #[error("font has no glyph for '{0}'")]
    MissingGlyph(char),
    #[error("font line {line}: {message}")]
    BadFont { line: usize, message: String },
}

/// A rectangular grid of lit/unlit cells, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    rows: Vec<Vec<bool>>,
}

impl Bitmap {
    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self, TextError> {
        let expected = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != expected {
                return Err(TextError::RaggedBitmap { line: i + 1, width: r.len(), expected });
            }
        }
        Ok(Bitmap { rows })
    }

    /// Reads lines of `.` and `#`; blank trailing lines are ignored.
    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let row = line
                .chars()
                .map(|c| match c {
                    '#' => Ok(true),
                    '.' => Ok(false),
                    ch => Err(TextError::BadCell { line: i + 1, ch }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Bitmap::from_rows(rows)
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn is_lit(&self, row: usize, col: usize) -> bool {
        self.rows[row][col]
    }

    pub fn lit_count(&self) -> usize {
        self.rows.iter().flatten().filter(|c| **c).count()
    }

    /// Lit cells as `(row, col)` in reading order.
    pub fn lit_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().filter(|(_, c)| **c).map(move |(c, _)| (r, c)))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            s.extend(row.iter().map(|c| if *c { '#' } else { '.' }));
            s.push('\n');
        }
        s
    }
}

/// Fixed-size glyphs keyed by character.
#[derive(Debug, Clone)]
pub struct Font {
    glyphs: BTreeMap<char, Bitmap>,
}

impl Font {
    /// The shipped 5×7 font covering `A`–`Z` and space.
    pub fn builtin() -> Self {
        Font::parse(BUILTIN_FONT).expect("builtin font is well formed")
    }

    /// `[X]` header lines each followed by the glyph rows; `# ` lines before
    /// the first header are comments.
    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut glyphs = BTreeMap::new();
        let mut current: Option<(char, String)> = None;
        let flush = |cur: Option<(char, String)>, glyphs: &mut BTreeMap<char, Bitmap>| -> Result<(), TextError> {
            if let Some((ch, rows)) = cur {
                glyphs.insert(ch, Bitmap::parse(&rows)?);
            }
            Ok(())
        };
        for (i, line) in text.lines().enumerate() {
            let mut it = line.chars();
            if let (Some('['), Some(ch), Some(']'), None) = (it.next(), it.next(), it.next(), it.next()) {
                flush(current.take(), &mut glyphs)?;
                current = Some((ch, String::new()));
            } else if let Some((_, rows)) = current.as_mut() {
                rows.push_str(line);
                rows.push('\n');
            } else if !line.is_empty() && !line.starts_with("# ") {
                return Err(TextError::BadFont { line: i + 1, message: "row outside a glyph".into() });
            }
        }
        flush(current, &mut glyphs)?;
        Ok(Font { glyphs })
    }

    pub fn glyph(&self, ch: char) -> Option<&Bitmap> {
        self.glyphs.get(&ch)
    }

    /// Glyphs side by side with one blank column between them.
    pub fn rasterize(&self, text: &str) -> Result<Bitmap, TextError> {
        let glyphs = text
            .chars()
            .map(|c| self.glyph(c).ok_or(TextError::MissingGlyph(c)))
            .collect::<Result<Vec<_>, _>>()?;
        let height = glyphs.iter().map(|g| g.height()).max().unwrap_or(0);
        let mut rows = vec![Vec::new(); height];
        for (i, g) in glyphs.iter().enumerate() {
            for (r, row) in rows.iter_mut().enumerate() {
                if i > 0 {
                    row.push(false);
                }
                for c in 0..g.width() {
                    row.push(r < g.height() && g.is_lit(r, c));
                }
            }
        }
        Bitmap::from_rows(rows)
    }
}

/// One position per lit cell, `spacing_mm` apart on a grid centered on the
/// origin with row 0 at the top (largest y). Reading order.
pub fn layout_text(bitmap: &Bitmap, spacing_mm: f64) -> Result<Vec<(f64, f64)>, TextError> {
    if spacing_mm.is_nan() || spacing_mm < BODY_DIAMETER_MM {
        return Err(TextError::SpacingTooSmall(spacing_mm));
    }
    if bitmap.lit_count() == 0 {
        return Err(TextError::EmptyBitmap);
    }
    let cx = (bitmap.width() as f64 - 1.0) / 2.0;
    let cy = (bitmap.height() as f64 - 1.0) / 2.0;
    Ok(bitmap
        .lit_cells()
        .map(|(r, c)| ((c as f64 - cx) * spacing_mm, (cy - r as f64) * spacing_mm))
        .collect())
}
