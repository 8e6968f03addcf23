//! Auxiliary structured grid and its region quadtree.
//!
//! Level `k` of the quadtree splits the bounding box into `2^k x 2^k`
//! cells labeled lexicographically, `i = t1 + 2^k * t2` with `t1` the
//! x-index and `t2` the y-index. No tree nodes are stored: cell lookup,
//! parent/child relations and colors are all index arithmetic.

use crate::error::{AmgError, Result};

/// Axis-aligned box `(a1, b1) x (a2, b2)` covering the finest grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

/// Smallest box containing every point. Degenerate boxes (zero width or
/// height) are rejected because cell lookup divides by the side lengths.
pub fn bounding_box(coords: &[[f64; 2]]) -> Result<BoundingBox> {
    if coords.is_empty() {
        return Err(AmgError::Argument("bounding box of an empty point set".into()));
    }
    let mut bb = BoundingBox {
        a1: f64::INFINITY,
        b1: f64::NEG_INFINITY,
        a2: f64::INFINITY,
        b2: f64::NEG_INFINITY,
    };
    for (j, &[x, y]) in coords.iter().enumerate() {
        if !x.is_finite() || !y.is_finite() {
            return Err(AmgError::Geometry(format!("point {j} has non-finite coordinates")));
        }
        bb.a1 = bb.a1.min(x);
        bb.b1 = bb.b1.max(x);
        bb.a2 = bb.a2.min(y);
        bb.b2 = bb.b2.max(y);
    }
    if bb.b1 <= bb.a1 || bb.b2 <= bb.a2 {
        return Err(AmgError::Geometry(format!(
            "degenerate bounding box [{}, {}] x [{}, {}]",
            bb.a1, bb.b1, bb.a2, bb.b2
        )));
    }
    Ok(bb)
}

/// Quadtree depth for `n` fine DoFs: `floor(log4 n)`, lowered by one when
/// `4^L == n` so that `4^L < n` always holds.
pub fn choose_depth(n: usize) -> Result<u32> {
    if n < 4 {
        return Err(AmgError::Argument(format!(
            "need at least 4 DoFs to build a quadtree, got {n}"
        )));
    }
    // Integer log avoids rounding trouble near exact powers of 4.
    let mut depth = (usize::BITS - 1 - n.leading_zeros()) / 2;
    if 1usize << (2 * depth) == n {
        depth -= 1;
    }
    Ok(depth)
}

/// Cells per side on level `k`.
#[inline]
pub fn width(k: u32) -> usize {
    1usize << k
}

/// Number of cells on level `k`.
#[inline]
pub fn n_cells(k: u32) -> usize {
    1usize << (2 * k)
}

/// Splits a lexicographic index into `(t1, t2)`.
#[inline]
pub fn cell_coords(i: usize, k: u32) -> (usize, usize) {
    (i & (width(k) - 1), i >> k)
}

#[inline]
pub fn cell_index(t1: usize, t2: usize, k: u32) -> usize {
    t1 + (t2 << k)
}

/// Auxiliary grid: bounding box plus quadtree depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxGrid {
    pub bbox: BoundingBox,
    pub depth: u32,
}

impl AuxGrid {
    pub fn new(bbox: BoundingBox, depth: u32) -> Result<Self> {
        if bbox.b1 <= bbox.a1 || bbox.b2 <= bbox.a2 {
            return Err(AmgError::Geometry("degenerate bounding box".into()));
        }
        if !(1..=30).contains(&depth) {
            return Err(AmgError::Argument(format!("quadtree depth {depth} outside [1, 30]")));
        }
        Ok(Self { bbox, depth })
    }

    /// Grid over the bounding box of `coords` with depth from
    /// [`choose_depth`] of the point count.
    pub fn from_points(coords: &[[f64; 2]]) -> Result<Self> {
        let bbox = bounding_box(coords)?;
        Self::new(bbox, choose_depth(coords.len())?)
    }

    /// Bounds `(x_lo, x_hi, y_lo, y_hi)` of cell `i` on level `k`.
    pub fn cell_bounds(&self, i: usize, k: u32) -> (f64, f64, f64, f64) {
        let (t1, t2) = cell_coords(i, k);
        let w = width(k) as f64;
        let hx = (self.bbox.b1 - self.bbox.a1) / w;
        let hy = (self.bbox.b2 - self.bbox.a2) / w;
        (
            self.bbox.a1 + t1 as f64 * hx,
            self.bbox.a1 + (t1 + 1) as f64 * hx,
            self.bbox.a2 + t2 as f64 * hy,
            self.bbox.a2 + (t2 + 1) as f64 * hy,
        )
    }

    /// Level-`k` cell containing `(x, y)`. Cells are half-open; points on
    /// the upper boundary of the box land in the last cell.
    pub fn subregion_of_point(&self, x: f64, y: f64, k: u32) -> Result<usize> {
        let bb = &self.bbox;
        if !(x >= bb.a1 && x <= bb.b1 && y >= bb.a2 && y <= bb.b2) {
            return Err(AmgError::Geometry(format!(
                "point ({x}, {y}) outside [{}, {}] x [{}, {}]",
                bb.a1, bb.b1, bb.a2, bb.b2
            )));
        }
        let t1 = axis_index((x - bb.a1) / (bb.b1 - bb.a1), k);
        let t2 = axis_index((y - bb.a2) / (bb.b2 - bb.a2), k);
        Ok(cell_index(t1, t2, k))
    }
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
fn axis_index(s: f64, k: u32) -> usize {
    let w = width(k);
    let s = s.clamp(0.0, BELOW_ONE);
    ((s * w as f64) as usize).min(w - 1)
}

/// Map from the DoFs of one level to the aggregates (DoFs) of the next
/// coarser level, with its inverse stored as flat member lists.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationMap {
    level: u32,
    agg_of: Vec<usize>,
    member_ptr: Vec<usize>,
    member_idx: Vec<usize>,
}

impl AggregationMap {
    /// Builds the map and its inverse. Member lists come out sorted.
    pub fn from_assignment(level: u32, agg_of: Vec<usize>, n_aggregates: usize) -> Result<Self> {
        let mut member_ptr = vec![0usize; n_aggregates + 1];
        for (j, &a) in agg_of.iter().enumerate() {
            if a >= n_aggregates {
                return Err(AmgError::Argument(format!(
                    "DoF {j} assigned to aggregate {a} >= {n_aggregates}"
                )));
            }
            member_ptr[a + 1] += 1;
        }
        for i in 0..n_aggregates {
            member_ptr[i + 1] += member_ptr[i];
        }
        let mut fill = member_ptr.clone();
        let mut member_idx = vec![0usize; agg_of.len()];
        for (j, &a) in agg_of.iter().enumerate() {
            member_idx[fill[a]] = j;
            fill[a] += 1;
        }
        Ok(Self {
            level,
            agg_of,
            member_ptr,
            member_idx,
        })
    }

    /// Level whose DoFs are being aggregated.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn agg_of(&self) -> &[usize] {
        &self.agg_of
    }

    pub fn n_fine(&self) -> usize {
        self.agg_of.len()
    }

    pub fn n_aggregates(&self) -> usize {
        self.member_ptr.len() - 1
    }

    #[inline]
    pub fn members(&self, i: usize) -> &[usize] {
        &self.member_idx[self.member_ptr[i]..self.member_ptr[i + 1]]
    }

    pub fn is_empty_aggregate(&self, i: usize) -> bool {
        self.member_ptr[i] == self.member_ptr[i + 1]
    }

    pub fn n_empty(&self) -> usize {
        (0..self.n_aggregates()).filter(|&i| self.is_empty_aggregate(i)).count()
    }
}

/// Level-L aggregates: every fine DoF joins the auxiliary cell that
/// contains it. Empty cells remain as empty aggregates.
pub fn aggregate_finest(coords: &[[f64; 2]], grid: &AuxGrid) -> Result<AggregationMap> {
    use rayon::prelude::*;
    let agg_of = coords
        .par_iter()
        .map(|&[x, y]| grid.subregion_of_point(x, y, grid.depth))
        .collect::<Result<Vec<_>>>()?;
    AggregationMap::from_assignment(grid.depth + 1, agg_of, n_cells(grid.depth))
}

/// Parent of level-`k` cell `j` on level `k - 1`.
#[inline]
pub fn parent(j: usize, k: u32) -> usize {
    let (t1, t2) = cell_coords(j, k);
    cell_index(t1 / 2, t2 / 2, k - 1)
}

/// Level-`k` cells aggregated into their level-`(k-1)` parents; every
/// aggregate has exactly four members.
pub fn aggregate_coarse(k: u32) -> Result<AggregationMap> {
    if !(1..=30).contains(&k) {
        return Err(AmgError::Argument(format!("coarse aggregation needs 1 <= k <= 30, got {k}")));
    }
    let agg_of = (0..n_cells(k)).map(|j| parent(j, k)).collect();
    AggregationMap::from_assignment(k, agg_of, n_cells(k - 1))
}

/// The four children of level-`(k-1)` cell `i` on level `k`, in the order
/// `(2t1, 2t2), (2t1+1, 2t2), (2t1+1, 2t2+1), (2t1, 2t2+1)`.
#[inline]
pub fn children(i: usize, k: u32) -> [usize; 4] {
    let (t1, t2) = cell_coords(i, k - 1);
    [
        cell_index(2 * t1, 2 * t2, k),
        cell_index(2 * t1 + 1, 2 * t2, k),
        cell_index(2 * t1 + 1, 2 * t2 + 1, k),
        cell_index(2 * t1, 2 * t2 + 1, k),
    ]
}

/// Color in `{0, 1, 2, 3}` such that no two 9-point neighbors match.
pub fn color_of(i: usize, k: u32) -> Result<u8> {
    if i >= n_cells(k) {
        return Err(AmgError::Argument(format!("cell {i} out of range on level {k}")));
    }
    Ok(color_unchecked(i, k))
}

#[inline]
pub(crate) fn color_unchecked(i: usize, k: u32) -> u8 {
    let (t1, t2) = cell_coords(i, k);
    ((t1 & 1) + 2 * (t2 & 1)) as u8
}

/// Offsets `(dx, dy)` of the 9-point stencil slots: the diagonal followed
/// by the eight neighbors counter-clockwise from east.
pub const STENCIL: [(isize, isize); 9] = [
    (0, 0),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Slot of offset `(dx, dy)` in [`STENCIL`], if it is a stencil offset.
#[inline]
pub fn stencil_slot(dx: isize, dy: isize) -> Option<usize> {
    match (dx, dy) {
        (0, 0) => Some(0),
        (1, 0) => Some(1),
        (1, 1) => Some(2),
        (0, 1) => Some(3),
        (-1, 1) => Some(4),
        (-1, 0) => Some(5),
        (-1, -1) => Some(6),
        (0, -1) => Some(7),
        (1, -1) => Some(8),
        _ => None,
    }
}

/// Stencil neighbor of cell `i` in slot `t`, or `None` past the boundary.
#[inline]
pub fn stencil_neighbor(i: usize, t: usize, k: u32) -> Option<usize> {
    let (t1, t2) = cell_coords(i, k);
    let (dx, dy) = STENCIL[t];
    let w = width(k) as isize;
    let x = t1 as isize + dx;
    let y = t2 as isize + dy;
    (x >= 0 && x < w && y >= 0 && y < w).then(|| cell_index(x as usize, y as usize, k))
}
