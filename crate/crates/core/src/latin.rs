//! Latin arrays: square grids of colour ids where no colour repeats in a row
//! or a column.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError};

/// Colour identifier. Colour ids are dense: an array with `k` colours uses
/// exactly the ids `0..k`.
pub type Colour = u32;

/// An order-`n` Latin array with `k` colours, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatinArray {
    n: usize,
    k: usize,
    grid: Vec<Colour>,
}

/// Why a cell breaks one of the [`LatinArray`] invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// The colour already appears earlier in the same row.
    RowRepeat,
    /// The colour already appears earlier in the same column.
    ColumnRepeat,
    /// The colour id is `>= k`.
    OutOfRange,
    /// A colour id in `0..k` never appears (reported with row/col 0).
    Missing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub row: usize,
    pub col: usize,
    pub colour: Colour,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reason = match self.kind {
            ViolationKind::RowRepeat => "colour repeated in row",
            ViolationKind::ColumnRepeat => "colour repeated in column",
            ViolationKind::OutOfRange => "colour id out of range",
            ViolationKind::Missing => "colour id never used",
        };
        write!(
            f,
            "({}, {}) colour {}: {}",
            self.row, self.col, self.colour, reason
        )
    }
}

/// Outcome of [`validate_latin`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every [`LatinArray`] invariant on a raw grid and lists each
/// offending cell. Never fails; an empty report means the grid is valid.
pub fn validate_grid(n: usize, k: usize, grid: &[Colour]) -> ValidationReport {
    let mut violations = Vec::new();
    if grid.len() != n * n {
        // Dimension errors are caught by the parser; report the first
        // missing cell so the report is never silently empty.
        violations.push(Violation {
            row: grid.len() / n.max(1),
            col: grid.len() % n.max(1),
            colour: 0,
            kind: ViolationKind::OutOfRange,
        });
        return ValidationReport { violations };
    }
    // row_mark[c] / col_mark[c] hold 1 + the index of the line where colour
    // c was last seen, so a fresh line never collides with a stale mark.
    let mut row_mark = vec![0usize; k];
    let mut col_mark = vec![0usize; k];
    let mut used = vec![false; k];
    for r in 0..n {
        for c in 0..n {
            let colour = grid[r * n + c];
            if colour as usize >= k {
                violations.push(Violation {
                    row: r,
                    col: c,
                    colour,
                    kind: ViolationKind::OutOfRange,
                });
                continue;
            }
            used[colour as usize] = true;
            if row_mark[colour as usize] == r + 1 {
                violations.push(Violation {
                    row: r,
                    col: c,
                    colour,
                    kind: ViolationKind::RowRepeat,
                });
            }
            row_mark[colour as usize] = r + 1;
        }
    }
    for c in 0..n {
        for r in 0..n {
            let colour = grid[r * n + c];
            if colour as usize >= k {
                continue;
            }
            if col_mark[colour as usize] == c + 1 {
                violations.push(Violation {
                    row: r,
                    col: c,
                    colour,
                    kind: ViolationKind::ColumnRepeat,
                });
            }
            col_mark[colour as usize] = c + 1;
        }
    }
    for (colour, seen) in used.iter().enumerate() {
        if !seen {
            violations.push(Violation {
                row: 0,
                col: 0,
                colour: colour as Colour,
                kind: ViolationKind::Missing,
            });
        }
    }
    ValidationReport { violations }
}

/// Validates an array. Arrays built through the public constructors are
/// always valid, so this is mostly useful on grids built by hand through
/// [`LatinArray::from_grid_unchecked`].
pub fn validate_latin(array: &LatinArray) -> ValidationReport {
    validate_grid(array.n, array.k, &array.grid)
}

impl LatinArray {
    /// Builds an array from a row-major grid, rejecting it if any invariant
    /// fails.
    pub fn new(n: usize, k: usize, grid: Vec<Colour>) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::EmptyArray);
        }
        if grid.len() != n * n {
            return Err(Error::Dimensions {
                expected: n * n,
                found: grid.len(),
            });
        }
        let report = validate_grid(n, k, &grid);
        if !report.is_ok() {
            return Err(Error::InvalidArray(report.violations));
        }
        Ok(LatinArray { n, k, grid })
    }

    /// Builds an array from rows, counting the colours as `max id + 1`.
    pub fn from_rows(rows: &[Vec<Colour>]) -> Result<Self, Error> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimensions {
                expected: n * n,
                found: rows.iter().map(Vec::len).sum(),
            });
        }
        let grid: Vec<Colour> = rows.iter().flatten().copied().collect();
        let k = grid.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        LatinArray::new(n, k, grid)
    }

    /// Wraps a grid without checking it. Used by generators whose moves
    /// preserve the invariants, and by tests that need invalid arrays.
    pub fn from_grid_unchecked(n: usize, k: usize, grid: Vec<Colour>) -> Self {
        LatinArray { n, k, grid }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn colour_count(&self) -> usize {
        self.k
    }

    /// Colour density `k / n²`.
    pub fn density(&self) -> f64 {
        self.k as f64 / (self.n * self.n) as f64
    }

    pub fn get(&self, row: usize, col: usize) -> Colour {
        self.grid[row * self.n + col]
    }

    pub fn grid(&self) -> &[Colour] {
        &self.grid
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Colour]> {
        self.grid.chunks(self.n)
    }

    /// Renumbers colours in order of first appearance in a row-major scan.
    /// Returns the relabelled array and `original[canonical id]`.
    pub fn canonicalize_colours(&self) -> (LatinArray, Vec<Colour>) {
        let mut forward = vec![Colour::MAX; self.k];
        let mut original = Vec::with_capacity(self.k);
        let grid = self
            .grid
            .iter()
            .map(|&c| {
                let slot = &mut forward[c as usize];
                if *slot == Colour::MAX {
                    *slot = original.len() as Colour;
                    original.push(c);
                }
                *slot
            })
            .collect();
        (
            LatinArray {
                n: self.n,
                k: self.k,
                grid,
            },
            original,
        )
    }

    /// Applies a colour permutation: cell colour `c` becomes `perm[c]`.
    pub fn relabel_colours(&self, perm: &[Colour]) -> Result<LatinArray, Error> {
        let grid = self.grid.iter().map(|&c| perm[c as usize]).collect();
        LatinArray::new(self.n, self.k, grid)
    }
}

impl fmt::Debug for LatinArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatinArray")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("rows", &self.rows().collect::<Vec<_>>())
            .finish()
    }
}

/// Parses the text format: a header line `n k`, then `n` lines of `n`
/// space-separated colour ids in `0..k`. Blank lines are ignored.
pub fn parse_latin(text: &str) -> Result<LatinArray, Error> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(ParseError::MalformedHeader(header.to_string()).into());
    }
    let parse_num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| ParseError::MalformedHeader(header.to_string()))
    };
    let n = parse_num(fields[0])?;
    let k = parse_num(fields[1])?;
    if n == 0 {
        return Err(Error::EmptyArray);
    }
    let mut grid = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (lineno, line) in lines {
        if rows == n {
            return Err(ParseError::TrailingData { line: lineno + 1 }.into());
        }
        let before = grid.len();
        for tok in line.split_whitespace() {
            let colour = Colour::from_str(tok).map_err(|_| ParseError::BadToken {
                line: lineno + 1,
                token: tok.to_string(),
            })?;
            if colour as usize >= k {
                return Err(ParseError::ColourOutOfRange {
                    line: lineno + 1,
                    colour,
                    k,
                }
                .into());
            }
            grid.push(colour);
        }
        if grid.len() - before != n {
            return Err(ParseError::RaggedRow {
                line: lineno + 1,
                expected: n,
                found: grid.len() - before,
            }
            .into());
        }
        rows += 1;
    }
    if rows != n {
        return Err(ParseError::MissingRows {
            expected: n,
            found: rows,
        }
        .into());
    }
    LatinArray::new(n, k, grid)
}

/// Writes the canonical text form accepted by [`parse_latin`].
pub fn serialize_latin(array: &LatinArray) -> String {
    let mut out = String::with_capacity(array.n * array.n * 4 + 16);
    out.push_str(&format!("{} {}\n", array.n, array.k));
    for row in array.rows() {
        let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
