//! Four-color Gauss-Seidel relaxation.
//!
//! Structured levels use point Gauss-Seidel on the 9-point ELL operator;
//! cells of one quadtree color never couple, so each color is updated as
//! one parallel step. The finest level uses block Gauss-Seidel with the
//! level-L aggregates as blocks, colored by the auxiliary cell they sit in.
//!
//! A forward sweep visits colors `0, 1, 2, 3`; a backward sweep visits
//! `3, 2, 1, 0`, which is the adjoint of the forward sweep for symmetric
//! operators.

use rayon::prelude::*;

use crate::auxgrid::{self, AggregationMap};
use crate::error::{AmgError, Result};
use crate::sparse::{CsrMatrix, EllMatrix, LuFactors, PAD};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn colors(self) -> [usize; 4] {
        match self {
            Direction::Forward => [0, 1, 2, 3],
            Direction::Backward => [3, 2, 1, 0],
        }
    }
}

/// Rows (or blocks) grouped by color. Inactive entries are left out.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorSchedule {
    classes: [Vec<usize>; 4],
    colors: Vec<u8>,
}

impl ColorSchedule {
    /// Quadtree coloring of the `4^k` cells of level `k`.
    pub fn quadtree(k: u32, active: &[bool]) -> Self {
        let colors = (0..auxgrid::n_cells(k))
            .map(|i| auxgrid::color_unchecked(i, k))
            .collect();
        Self::from_colors(colors, active).expect("quadtree colors are valid")
    }

    /// Schedule from explicit colors; `active[i] == false` drops entry `i`.
    pub fn from_colors(colors: Vec<u8>, active: &[bool]) -> Result<Self> {
        if colors.len() != active.len() {
            return Err(AmgError::Size {
                what: "color schedule activity flags",
                expected: colors.len(),
                got: active.len(),
            });
        }
        let mut classes: [Vec<usize>; 4] = Default::default();
        for (i, &c) in colors.iter().enumerate() {
            if c > 3 {
                return Err(AmgError::Argument(format!("color {c} of entry {i} not in 0..4")));
            }
            if active[i] {
                classes[c as usize].push(i);
            }
        }
        Ok(Self { classes, colors })
    }

    pub fn class(&self, color: usize) -> &[usize] {
        &self.classes[color]
    }

    pub fn color(&self, i: usize) -> u8 {
        self.colors[i]
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Reorders the entries inside one color class. Sweep results do not
    /// depend on this order when the classes are decoupled.
    pub fn permute_class(&mut self, color: usize, order: &[usize]) {
        let old = self.classes[color].clone();
        assert_eq!(order.len(), old.len());
        self.classes[color] = order.iter().map(|&p| old[p]).collect();
    }
}

/// One colored point Gauss-Seidel sweep on a diagonal-first ELL matrix.
pub fn point_gs_sweep(
    a: &EllMatrix,
    b: &[f64],
    x: &mut [f64],
    schedule: &ColorSchedule,
    direction: Direction,
) -> Result<()> {
    let n = a.n_rows();
    check_len("point sweep rhs", n, b.len())?;
    check_len("point sweep iterate", n, x.len())?;
    check_len("point sweep schedule", n, schedule.len())?;
    let width = a.width();
    let cols = a.col_idx();
    let vals = a.values();
    for color in direction.colors() {
        let rows = schedule.class(color);
        let xs: &[f64] = x;
        let updates = rows
            .par_iter()
            .with_min_len(256)
            .map(|&i| {
                let d = vals[i];
                if d == 0.0 {
                    return Err(AmgError::SingularSmoother { row: i });
                }
                let mut s = b[i];
                for t in 1..width {
                    let c = cols[t * n + i];
                    if c != PAD {
                        s -= vals[t * n + i] * xs[c as usize];
                    }
                }
                Ok(s / d)
            })
            .collect::<Result<Vec<f64>>>()?;
        for (&i, v) in rows.iter().zip(updates) {
            x[i] = v;
        }
    }
    Ok(())
}

/// LU factors of one aggregate's principal submatrix.
#[derive(Debug, Clone)]
pub struct Block {
    pub members: Vec<usize>,
    pub lu: LuFactors,
}

/// Dense factorizations of `A|G_i x G_i` for every non-empty aggregate.
#[derive(Debug, Clone)]
pub struct BlockFactors {
    agg_of: Vec<usize>,
    blocks: Vec<Option<Block>>,
}

impl BlockFactors {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> Option<&Block> {
        self.blocks[i].as_ref()
    }

    pub fn active(&self) -> Vec<bool> {
        self.blocks.iter().map(Option::is_some).collect()
    }
}

pub fn factor_blocks(a: &CsrMatrix, agg: &AggregationMap) -> Result<BlockFactors> {
    check_len("block factor aggregation", a.n_rows(), agg.n_fine())?;
    let blocks = (0..agg.n_aggregates())
        .into_par_iter()
        .map(|i| {
            let members = agg.members(i);
            if members.is_empty() {
                return Ok(None);
            }
            let sub = a.principal_submatrix(members);
            let lu = LuFactors::factor(members.len(), sub.entries()).map_err(|e| {
                AmgError::Definiteness(format!("aggregate {i} ({} DoFs): {e}", members.len()))
            })?;
            Ok(Some(Block {
                members: members.to_vec(),
                lu,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockFactors {
        agg_of: agg.agg_of().to_vec(),
        blocks,
    })
}

/// One colored block Gauss-Seidel sweep.
///
/// Each block of the current color solves
/// `A_GG x_G = b_G - A_{G,outside} x_outside`, reading `x` as it stood
/// when the color started, so blocks of one color never see each other's
/// updates.
pub fn block_gs_sweep(
    a: &CsrMatrix,
    factors: &BlockFactors,
    b: &[f64],
    x: &mut [f64],
    schedule: &ColorSchedule,
    direction: Direction,
) -> Result<()> {
    let n = a.n_rows();
    check_len("block sweep rhs", n, b.len())?;
    check_len("block sweep iterate", n, x.len())?;
    check_len("block sweep factors", n, factors.agg_of.len())?;
    check_len("block sweep schedule", factors.n_blocks(), schedule.len())?;
    for color in direction.colors() {
        let ids = schedule.class(color);
        let xs: &[f64] = x;
        let updates: Vec<Vec<f64>> = ids
            .par_iter()
            .with_min_len(64)
            .map(|&g| {
                let block = factors.blocks[g]
                    .as_ref()
                    .expect("schedule only lists non-empty blocks");
                let rhs: Vec<f64> = block
                    .members
                    .iter()
                    .map(|&i| {
                        let (cols, vals) = a.row(i);
                        let mut s = b[i];
                        for (&c, &v) in cols.iter().zip(vals) {
                            if factors.agg_of[c] != g {
                                s -= v * xs[c];
                            }
                        }
                        s
                    })
                    .collect();
                block.lu.solve(&rhs)
            })
            .collect();
        for (&g, vals) in ids.iter().zip(updates) {
            let block = factors.blocks[g].as_ref().unwrap();
            for (&i, v) in block.members.iter().zip(vals) {
                x[i] = v;
            }
        }
    }
    Ok(())
}

/// A fine coupling between two distinct blocks that share a color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorViolation {
    pub row: usize,
    pub col: usize,
    pub block_row: usize,
    pub block_col: usize,
    pub color: u8,
}

/// Lists every nonzero `a_ij` whose endpoints lie in different blocks of
/// the same color. Such couplings only turn the within-color update into a
/// simultaneous (Jacobi-like) one; the sweep stays well defined.
pub fn check_color_locality(
    a: &CsrMatrix,
    agg: &AggregationMap,
    schedule: &ColorSchedule,
) -> Vec<ColorViolation> {
    let agg_of = agg.agg_of();
    let mut out = Vec::new();
    for i in 0..a.n_rows() {
        let gi = agg_of[i];
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let gj = agg_of[j];
            if v != 0.0 && gi != gj && schedule.color(gi) == schedule.color(gj) {
                out.push(ColorViolation {
                    row: i,
                    col: j,
                    block_row: gi,
                    block_col: gj,
                    color: schedule.color(gi),
                });
            }
        }
    }
    out
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(AmgError::Size {
            what,
            expected,
            got,
        });
    }
    Ok(())
}
