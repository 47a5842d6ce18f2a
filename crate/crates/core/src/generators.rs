//! Instance generators: structured tables, randomized Latin squares and
//! colour splitting to reach a target colour count.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::latin::{Colour, LatinArray};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cyclic,
    Z2k,
    RandomLatin,
    Split,
}

/// Full description of a generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub target_colours: Option<usize>,
    pub family: Family,
    pub seed: u64,
    /// Defaults to `n³` when absent.
    pub mixing_steps: Option<u64>,
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n == 0 {
            return Err(Error::EmptyArray);
        }
        if self.family == Family::Z2k && self.n % 2 != 0 {
            return Err(Error::Parameter(format!(
                "z2k tables have even order, got {}",
                self.n
            )));
        }
        if let Some(k) = self.target_colours {
            check_target(self.n, k)?;
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<LatinArray, Error> {
        self.validate()?;
        let steps = self.mixing_steps.unwrap_or_else(|| default_mixing(self.n));
        let base = match self.family {
            Family::Cyclic => cyclic_latin(self.n),
            Family::Z2k => z2k_table(self.n / 2),
            Family::RandomLatin | Family::Split => random_latin(self.n, self.seed, steps),
        };
        match self.target_colours {
            Some(k) => split_colours(&base, k, seed::derive(self.seed, 0x5b11)),
            None => Ok(base),
        }
    }
}

pub fn default_mixing(n: usize) -> u64 {
    (n as u64).saturating_pow(3)
}

fn check_target(n: usize, target: usize) -> Result<(), Error> {
    if target < n || target > n * n {
        return Err(Error::ColourTarget {
            target,
            min: n,
            max: n * n,
        });
    }
    Ok(())
}

/// Addition table of `Z_n`: cell `(r, c)` has colour `(r + c) mod n`.
pub fn cyclic_latin(n: usize) -> LatinArray {
    assert!(n >= 1, "order must be positive");
    let grid = (0..n)
        .flat_map(|r| (0..n).map(move |c| ((r + c) % n) as Colour))
        .collect();
    LatinArray::from_grid_unchecked(n, n, grid)
}

/// Addition table of `Z_{2k}`. Even-order cyclic squares have no transversal.
pub fn z2k_table(k_half: usize) -> LatinArray {
    assert!(k_half >= 1, "k_half must be positive");
    cyclic_latin(2 * k_half)
}

/// A Latin square of order `n` reached from the cyclic square by
/// `mixing_steps` Jacobson–Matthews moves. If the chain ends in an improper
/// state it keeps moving until it is proper again.
pub fn random_latin(n: usize, seed: u64, mixing_steps: u64) -> LatinArray {
    let mut chain = JacobsonMatthews::new(n);
    if n >= 2 {
        let mut rng = seed::rng(seed);
        for _ in 0..mixing_steps {
            chain.step(&mut rng);
        }
        while chain.improper.is_some() {
            chain.step(&mut rng);
        }
    }
    chain.into_array()
}

/// The single cell of the incidence cube holding `-1` in an improper state,
/// together with the two `+1` entries on each of its three lines.
#[derive(Clone, Copy, Debug)]
struct Improper {
    r: usize,
    c: usize,
    neg: u32,
    pos: [u32; 2],
    rows: [usize; 2],
    cols: [usize; 2],
}

/// Incidence-cube walk over Latin squares, stored as three `n × n` tables
/// (cell → symbol, (row, symbol) → column, (column, symbol) → row). Entries on
/// the lines through the improper cell are ambiguous and live in
/// [`Improper`] instead.
struct JacobsonMatthews {
    n: usize,
    cell: Vec<u32>,
    col_of: Vec<u32>,
    row_of: Vec<u32>,
    improper: Option<Improper>,
}

impl JacobsonMatthews {
    fn new(n: usize) -> Self {
        let mut cell = vec![0u32; n * n];
        let mut col_of = vec![0u32; n * n];
        let mut row_of = vec![0u32; n * n];
        for r in 0..n {
            for c in 0..n {
                let s = (r + c) % n;
                cell[r * n + c] = s as u32;
                col_of[r * n + s] = c as u32;
                row_of[c * n + s] = r as u32;
            }
        }
        JacobsonMatthews {
            n,
            cell,
            col_of,
            row_of,
            improper: None,
        }
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.n;
        // Pick the cube cell (r, c, s) that gains +1, and the +1 entries on
        // its three lines: symbol s1 at (r, c), row r1 in column c, column c1
        // in row r.
        let (r, c, s, s1, s2, r1, r_other, c1, c_other) = match self.improper {
            None => {
                let r = rng.gen_range(0..n);
                let c = rng.gen_range(0..n);
                let s1 = self.cell[r * n + c];
                let mut s = rng.gen_range(0..n as u32 - 1);
                if s >= s1 {
                    s += 1;
                }
                let r1 = self.row_of[c * n + s as usize] as usize;
                let c1 = self.col_of[r * n + s as usize] as usize;
                (r, c, s, s1, s1, r1, r1, c1, c1)
            }
            Some(imp) => {
                let i = rng.gen_range(0..2);
                let j = rng.gen_range(0..2);
                let l = rng.gen_range(0..2);
                (
                    imp.r,
                    imp.c,
                    imp.neg,
                    imp.pos[i],
                    imp.pos[1 - i],
                    imp.rows[j],
                    imp.rows[1 - j],
                    imp.cols[l],
                    imp.cols[1 - l],
                )
            }
        };
        let was_proper = self.improper.is_none();
        let (su, s1u) = (s as usize, s1 as usize);
        let t = self.cell[r1 * n + c1];
        let c_star = self.col_of[r1 * n + s1u] as usize;
        let r_star = self.row_of[c1 * n + s1u] as usize;

        self.cell[r * n + c] = if was_proper { s } else { s2 };
        self.cell[r1 * n + c] = s1;
        self.cell[r * n + c1] = s1;
        self.col_of[r * n + su] = if was_proper { c } else { c_other } as u32;
        self.row_of[c * n + su] = if was_proper { r } else { r_other } as u32;
        self.col_of[r * n + s1u] = c1 as u32;
        self.row_of[c * n + s1u] = r1 as u32;
        self.col_of[r1 * n + su] = c1 as u32;
        self.row_of[c1 * n + su] = r1 as u32;
        self.col_of[r1 * n + s1u] = c as u32;
        self.row_of[c1 * n + s1u] = r as u32;
        if t == s1 {
            self.cell[r1 * n + c1] = s;
            self.improper = None;
        } else {
            self.improper = Some(Improper {
                r: r1,
                c: c1,
                neg: s1,
                pos: [t, s],
                rows: [r, r_star],
                cols: [c, c_star],
            });
        }
    }

    fn into_array(self) -> LatinArray {
        debug_assert!(self.improper.is_none());
        LatinArray::from_grid_unchecked(self.n, self.n, self.cell)
    }
}

/// Splits colour classes until the array has exactly `target` colours. Each
/// split takes the largest class (smallest id on ties) and gives one of its
/// cells, chosen uniformly, a fresh colour id.
pub fn split_colours(array: &LatinArray, target: usize, seed: u64) -> Result<LatinArray, Error> {
    let n = array.order();
    check_target(n, target)?;
    let k = array.colour_count();
    if target < k {
        return Err(Error::ColourTarget {
            target,
            min: k,
            max: n * n,
        });
    }
    let mut grid = array.grid().to_vec();
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (cell, &c) in grid.iter().enumerate() {
        classes[c as usize].push(cell);
    }
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = classes
        .iter()
        .enumerate()
        .map(|(c, cells)| (cells.len(), Reverse(c)))
        .collect();
    let mut rng = seed::rng(seed);
    let mut next = k;
    while next < target {
        let (size, Reverse(c)) = heap.pop().expect("a class with two cells exists");
        if size != classes[c].len() {
            continue;
        }
        debug_assert!(size >= 2);
        let pick = rng.gen_range(0..size);
        let cell = classes[c].swap_remove(pick);
        grid[cell] = next as Colour;
        next += 1;
        heap.push((classes[c].len(), Reverse(c)));
    }
    Ok(LatinArray::from_grid_unchecked(n, target, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::validate_latin;

    #[test]
    fn cyclic_examples() {
        assert_eq!(cyclic_latin(1).grid(), &[0]);
        assert_eq!(cyclic_latin(3).grid(), &[0, 1, 2, 1, 2, 0, 2, 0, 1]);
        let c5 = cyclic_latin(5);
        assert!(validate_latin(&c5).is_ok());
        assert_eq!(c5.colour_count(), 5);
    }

    #[test]
    fn z2k_is_even_cyclic() {
        assert_eq!(z2k_table(2), cyclic_latin(4));
    }

    #[test]
    fn random_latin_edge_cases() {
        assert_eq!(random_latin(1, 9, 100).grid(), &[0]);
        assert_eq!(random_latin(5, 9, 0), cyclic_latin(5));
        let a = random_latin(5, 9, 10_000);
        assert!(validate_latin(&a).is_ok());
        assert_ne!(a, cyclic_latin(5));
    }

    #[test]
    fn random_latin_is_reproducible_and_valid() {
        for n in 2..=9 {
            for seed in 0..20 {
                for steps in [1, 2, 3, 17, 500] {
                    let a = random_latin(n, seed, steps);
                    assert!(validate_latin(&a).is_ok(), "n={n} seed={seed} steps={steps}");
                    assert_eq!(a, random_latin(n, seed, steps));
                }
            }
        }
    }

    #[test]
    fn random_latin_reaches_many_squares() {
        // Order 4 has 576 Latin squares; a mixed chain should see plenty.
        let distinct: std::collections::HashSet<_> = (0..400)
            .map(|s| random_latin(4, s, 64).grid().to_vec())
            .collect();
        assert!(distinct.len() > 200, "only {} distinct squares", distinct.len());
    }

    #[test]
    fn split_examples() {
        let base = cyclic_latin(4);
        assert_eq!(split_colours(&base, 4, 1).unwrap(), base);
        let full = split_colours(&base, 16, 1).unwrap();
        let mut colours = full.grid().to_vec();
        colours.sort();
        assert_eq!(colours, (0..16).collect::<Vec<_>>());
        assert!(split_colours(&base, 3, 1).is_err());
        assert!(split_colours(&base, 17, 1).is_err());
    }

    #[test]
    fn split_changes_exactly_the_new_cells() {
        let base = random_latin(6, 3, 216);
        for target in [6, 7, 18, 30, 36] {
            let split = split_colours(&base, target, 11).unwrap();
            assert!(validate_latin(&split).is_ok());
            assert_eq!(split.colour_count(), target);
            let changed = base
                .grid()
                .iter()
                .zip(split.grid())
                .filter(|(x, y)| x != y)
                .count();
            assert_eq!(changed, target - 6);
        }
    }

    #[test]
    fn gen_spec_validation() {
        let spec = GenSpec {
            n: 5,
            target_colours: Some(30),
            family: Family::RandomLatin,
            seed: 0,
            mixing_steps: None,
        };
        assert!(spec.validate().is_err());
        let spec = GenSpec {
            n: 3,
            family: Family::Z2k,
            target_colours: None,
            seed: 0,
            mixing_steps: None,
        };
        assert!(spec.generate().is_err());
    }
}
