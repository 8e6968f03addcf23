//! Setup phase: the level stack of the auxiliary-grid AMG method.
//!
//! Levels are stored finest first. Each [`Level`] keeps the quadtree level
//! number `k` it represents (`depth + 1` for the unstructured finest level,
//! `depth` for the auxiliary grid, down to the coarsest kept level), so the
//! index formulas of the quadtree apply verbatim.
//!
//! Coarse operators are Galerkin products `P^T A P` with the Boolean
//! piecewise-constant `P`, computed as sums over aggregate pairs straight
//! into the fixed 9-point ELL pattern. Every coarse entry is gathered by
//! the task owning its row, so assembly needs no atomics and is
//! reproducible bit for bit.

use std::time::Instant;

use log::warn;
use rayon::prelude::*;

use crate::auxgrid::{self, aggregate_coarse, aggregate_finest, AggregationMap, AuxGrid};
use crate::error::{AmgError, Result};
use crate::smoother::{self, BlockFactors, ColorSchedule, Direction};
use crate::sparse::{CsrMatrix, DenseMatrix, EllMatrix, PAD};
use crate::vecops::PAR_MIN;

/// Column indices of the 9-point operator on level `k`, column-major with
/// width 9: slot 0 is the row itself, slots 1..8 the neighbors east,
/// north-east, north, north-west, west, south-west, south, south-east.
/// Neighbors outside the grid are [`PAD`].
pub fn build_stencil_indices(k: u32) -> Vec<isize> {
    let n = auxgrid::n_cells(k);
    let mut cols = vec![PAD; 9 * n];
    cols.par_chunks_mut(n).enumerate().for_each(|(t, slot)| {
        for (i, c) in slot.iter_mut().enumerate() {
            if let Some(j) = auxgrid::stencil_neighbor(i, t, k) {
                *c = j as isize;
            }
        }
    });
    cols
}

/// What to do with a fine coupling between two auxiliary cells that are
/// not 9-point neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalityMode {
    /// Leave the entry out of the coarse operator and report it.
    #[default]
    Drop,
    /// Add the entry to the diagonal of its coarse row.
    Lump,
    /// Fail setup.
    Strict,
}

/// A fine coupling that fell outside the coarse 9-point stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroppedCoupling {
    pub fine_row: usize,
    pub fine_col: usize,
    pub coarse_row: usize,
    pub coarse_col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalityReport {
    pub dropped: Vec<DroppedCoupling>,
}

impl LocalityReport {
    /// Sum of `|a_ij|` over the dropped couplings.
    pub fn dropped_mass(&self) -> f64 {
        self.dropped.iter().map(|d| d.value.abs()).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.dropped.is_empty()
    }
}

/// Assembled structured operator with its activity flags.
#[derive(Debug, Clone)]
pub struct CoarseOperator {
    pub matrix: EllMatrix,
    /// `false` for rows of empty aggregates; such rows hold a unit
    /// diagonal and nothing else.
    pub active: Vec<bool>,
    pub locality: LocalityReport,
}

/// Galerkin operator on the auxiliary grid (level `depth`) from the
/// finest CSR matrix and the level-`depth` aggregation.
pub fn assemble_coarse_finest(
    a: &CsrMatrix,
    agg: &AggregationMap,
    depth: u32,
    mode: LocalityMode,
) -> Result<CoarseOperator> {
    let n = auxgrid::n_cells(depth);
    if agg.n_aggregates() != n || agg.n_fine() != a.n_rows() {
        return Err(AmgError::Size {
            what: "level-L aggregation",
            expected: n,
            got: agg.n_aggregates(),
        });
    }
    let agg_of = agg.agg_of();
    let rows: Vec<([f64; 9], Vec<DroppedCoupling>)> = (0..n)
        .into_par_iter()
        .with_min_len(64)
        .map(|r| {
            let (rx, ry) = auxgrid::cell_coords(r, depth);
            let mut acc = [0.0; 9];
            let mut dropped = Vec::new();
            for &i in agg.members(r) {
                let (cols, vals) = a.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    let q = agg_of[j];
                    let (qx, qy) = auxgrid::cell_coords(q, depth);
                    match auxgrid::stencil_slot(qx as isize - rx as isize, qy as isize - ry as isize) {
                        Some(t) => acc[t] += v,
                        None => dropped.push(DroppedCoupling {
                            fine_row: i,
                            fine_col: j,
                            coarse_row: r,
                            coarse_col: q,
                            value: v,
                        }),
                    }
                }
            }
            if mode == LocalityMode::Lump {
                for d in &dropped {
                    acc[0] += d.value;
                }
            }
            if agg.is_empty_aggregate(r) {
                acc[0] = 1.0;
            }
            (acc, dropped)
        })
        .collect();

    let mut locality = LocalityReport::default();
    for (_, d) in &rows {
        locality.dropped.extend_from_slice(d);
    }
    if !locality.is_clean() {
        if mode == LocalityMode::Strict {
            let d = locality.dropped[0];
            return Err(AmgError::Structure(format!(
                "{} fine couplings span non-neighboring auxiliary cells (first: a[{}][{}] between cells {} and {})",
                locality.dropped.len(),
                d.fine_row,
                d.fine_col,
                d.coarse_row,
                d.coarse_col
            )));
        }
        warn!(
            "{} fine couplings outside the 9-point stencil ({}), |mass| = {:e}",
            locality.dropped.len(),
            if mode == LocalityMode::Lump { "lumped" } else { "dropped" },
            locality.dropped_mass()
        );
    }

    let cols = build_stencil_indices(depth);
    let mut vals = vec![0.0; 9 * n];
    for (r, (acc, _)) in rows.iter().enumerate() {
        for t in 0..9 {
            if cols[t * n + r] != PAD {
                vals[t * n + r] = acc[t];
            }
        }
    }
    let active = (0..n).map(|r| !agg.is_empty_aggregate(r)).collect();
    Ok(CoarseOperator {
        matrix: EllMatrix::new(n, 9, cols, vals)?,
        active,
        locality,
    })
}

/// Galerkin operator on level `k` from the 9-point operator of level
/// `k + 1`. Each coarse row sums the rows of its four children; inactive
/// children only carry their placeholder diagonal and are skipped.
pub fn assemble_coarse_structured(
    a_next: &EllMatrix,
    active_next: &[bool],
    k: u32,
) -> Result<CoarseOperator> {
    let n_next = auxgrid::n_cells(k + 1);
    if a_next.n_rows() != n_next || a_next.width() != 9 || active_next.len() != n_next {
        return Err(AmgError::Size {
            what: "structured fine operator",
            expected: n_next,
            got: a_next.n_rows(),
        });
    }
    let n = auxgrid::n_cells(k);
    let rows: Vec<([f64; 9], bool)> = (0..n)
        .into_par_iter()
        .with_min_len(64)
        .map(|r| {
            let (rx, ry) = auxgrid::cell_coords(r, k);
            let mut acc = [0.0; 9];
            let mut any = false;
            for c in auxgrid::children(r, k + 1) {
                if !active_next[c] {
                    continue;
                }
                any = true;
                for t in 0..9 {
                    let (col, v) = a_next.slot(c, t);
                    if col == PAD {
                        continue;
                    }
                    let q = auxgrid::parent(col as usize, k + 1);
                    let (qx, qy) = auxgrid::cell_coords(q, k);
                    let s = auxgrid::stencil_slot(qx as isize - rx as isize, qy as isize - ry as isize)
                        .expect("children of 9-point neighbors are 9-point neighbors");
                    acc[s] += v;
                }
            }
            if !any {
                acc[0] = 1.0;
            }
            (acc, any)
        })
        .collect();
    let cols = build_stencil_indices(k);
    let mut vals = vec![0.0; 9 * n];
    for (r, (acc, _)) in rows.iter().enumerate() {
        for t in 0..9 {
            if cols[t * n + r] != PAD {
                vals[t * n + r] = acc[t];
            }
        }
    }
    Ok(CoarseOperator {
        matrix: EllMatrix::new(n, 9, cols, vals)?,
        active: rows.iter().map(|&(_, a)| a).collect(),
        locality: LocalityReport::default(),
    })
}

/// `P^T A P` for an arbitrary aggregation, in CSR. Empty aggregates give
/// empty rows. Used where the aggregates do not come from a quadtree.
pub fn galerkin_general(a: &CsrMatrix, agg: &AggregationMap) -> Result<CsrMatrix> {
    if agg.n_fine() != a.n_rows() || a.n_rows() != a.n_cols() {
        return Err(AmgError::Size {
            what: "aggregation length",
            expected: a.n_rows(),
            got: agg.n_fine(),
        });
    }
    let agg_of = agg.agg_of();
    let nc = agg.n_aggregates();
    let rows: Vec<Vec<(usize, f64)>> = (0..nc)
        .into_par_iter()
        .map(|r| {
            let mut entries: Vec<(usize, f64)> = Vec::new();
            for &i in agg.members(r) {
                let (cols, vals) = a.row(i);
                entries.extend(cols.iter().zip(vals).map(|(&j, &v)| (agg_of[j], v)));
            }
            entries.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::new();
            for (q, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == q => last.1 += v,
                    _ => merged.push((q, v)),
                }
            }
            merged
        })
        .collect();
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    for row in rows {
        for (q, v) in row {
            col_idx.push(q);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    CsrMatrix::new(nc, nc, row_ptr, col_idx, values)
}

/// Piecewise-constant prolongation: each fine entry copies the value of
/// its aggregate.
pub fn prolongate(v_coarse: &[f64], agg: &AggregationMap) -> Result<Vec<f64>> {
    if v_coarse.len() != agg.n_aggregates() {
        return Err(AmgError::Size {
            what: "prolongation input",
            expected: agg.n_aggregates(),
            got: v_coarse.len(),
        });
    }
    Ok(agg
        .agg_of()
        .par_iter()
        .with_min_len(PAR_MIN)
        .map(|&g| v_coarse[g])
        .collect())
}

/// Restriction `P^T v`: each coarse entry sums its members. Empty
/// aggregates give 0.
pub fn restrict(v_fine: &[f64], agg: &AggregationMap) -> Result<Vec<f64>> {
    if v_fine.len() != agg.n_fine() {
        return Err(AmgError::Size {
            what: "restriction input",
            expected: agg.n_fine(),
            got: v_fine.len(),
        });
    }
    Ok((0..agg.n_aggregates())
        .into_par_iter()
        .with_min_len(PAR_MIN)
        .map(|i| agg.members(i).iter().map(|&j| v_fine[j]).sum())
        .collect())
}

/// Restriction from quadtree level `k` to `k - 1` by the explicit
/// four-child sum.
pub fn restrict_structured(v_fine: &[f64], k: u32) -> Result<Vec<f64>> {
    if k < 1 || v_fine.len() != auxgrid::n_cells(k) {
        return Err(AmgError::Size {
            what: "structured restriction input",
            expected: auxgrid::n_cells(k.max(1)),
            got: v_fine.len(),
        });
    }
    Ok((0..auxgrid::n_cells(k - 1))
        .into_par_iter()
        .with_min_len(PAR_MIN)
        .map(|i| {
            let [c0, c1, c2, c3] = auxgrid::children(i, k);
            v_fine[c0] + v_fine[c1] + v_fine[c2] + v_fine[c3]
        })
        .collect())
}

/// Operator of one level.
#[derive(Debug, Clone)]
pub enum Operator {
    Csr(CsrMatrix),
    Ell(EllMatrix),
}

impl Operator {
    pub fn n(&self) -> usize {
        match self {
            Operator::Csr(a) => a.n_rows(),
            Operator::Ell(a) => a.n_rows(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Operator::Csr(a) => a.nnz(),
            Operator::Ell(a) => a.stored_entries(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        match self {
            Operator::Csr(a) => a.spmv_into(x, &mut y),
            Operator::Ell(a) => a.spmv_into(x, &mut y),
        }
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Operator::Csr(a) => a.to_dense(),
            Operator::Ell(a) => a.to_dense(),
        }
    }

    pub fn as_ell(&self) -> Option<&EllMatrix> {
        match self {
            Operator::Ell(a) => Some(a),
            Operator::Csr(_) => None,
        }
    }

    pub fn as_csr(&self) -> Option<&CsrMatrix> {
        match self {
            Operator::Csr(a) => Some(a),
            Operator::Ell(_) => None,
        }
    }
}

/// Transfer from a level to the next coarser one.
///
/// Inactive fine rows are outside the range of `P`: prolongation leaves
/// them at 0 and restriction ignores them, matching the coarse assembly
/// that skips inactive children.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub agg: AggregationMap,
    /// Fixed four-child quadtree aggregation, restricted by the explicit
    /// four-term sum.
    pub structured: bool,
    /// `None` when every fine row is active.
    pub fine_active: Option<Vec<bool>>,
}

impl Transfer {
    pub fn new(agg: AggregationMap, structured: bool, fine_active: &[bool]) -> Self {
        let fine_active = if fine_active.iter().all(|&a| a) {
            None
        } else {
            Some(fine_active.to_vec())
        };
        Self {
            agg,
            structured,
            fine_active,
        }
    }

    pub fn restrict(&self, v: &[f64]) -> Result<Vec<f64>> {
        let masked;
        let v = match &self.fine_active {
            Some(act) if act.len() == v.len() => {
                masked = v
                    .iter()
                    .zip(act)
                    .map(|(&x, &a)| if a { x } else { 0.0 })
                    .collect::<Vec<f64>>();
                &masked[..]
            }
            _ => v,
        };
        if self.structured {
            restrict_structured(v, self.agg.level())
        } else {
            restrict(v, &self.agg)
        }
    }

    pub fn prolongate(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = prolongate(v, &self.agg)?;
        if let Some(act) = &self.fine_active {
            for (x, &a) in out.iter_mut().zip(act) {
                if !a {
                    *x = 0.0;
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub enum LevelSmoother {
    /// Block Gauss-Seidel on the unstructured finest level.
    Block {
        factors: BlockFactors,
        schedule: ColorSchedule,
    },
    /// Point Gauss-Seidel on a structured level.
    Point { schedule: ColorSchedule },
    /// Coarsest level: solved directly.
    None,
}

#[derive(Debug, Clone)]
pub struct Level {
    /// Quadtree level number; `depth + 1` marks the unstructured level.
    pub k: u32,
    pub operator: Operator,
    pub active: Vec<bool>,
    pub to_coarser: Option<Transfer>,
    pub smoother: LevelSmoother,
}

impl Level {
    pub fn n(&self) -> usize {
        self.operator.n()
    }

    pub fn n_inactive(&self) -> usize {
        self.active.iter().filter(|a| !**a).count()
    }

    /// One relaxation sweep on `A x = b`.
    pub fn smooth(&self, b: &[f64], x: &mut [f64], direction: Direction) -> Result<()> {
        match (&self.smoother, &self.operator) {
            (LevelSmoother::Block { factors, schedule }, Operator::Csr(a)) => {
                smoother::block_gs_sweep(a, factors, b, x, schedule, direction)
            }
            (LevelSmoother::Point { schedule }, Operator::Ell(a)) => {
                smoother::point_gs_sweep(a, b, x, schedule, direction)
            }
            (LevelSmoother::None, _) => Ok(()),
            _ => unreachable!("smoother kind always matches operator storage"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HierarchyOptions {
    /// Stop coarsening at the first structured level with at most this
    /// many rows; that level is solved by dense LU.
    pub coarsest_size: usize,
    pub locality: LocalityMode,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self {
            coarsest_size: 64,
            locality: LocalityMode::Drop,
        }
    }
}

/// Per-level sizes and operator complexity, as reported by the driver.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HierarchyStats {
    pub levels: usize,
    pub sizes: Vec<usize>,
    pub nnz: Vec<usize>,
    pub inactive: Vec<usize>,
    pub operator_complexity: f64,
    pub depth: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub levels: Vec<Level>,
    pub coarsest: DenseMatrix,
    pub grid: Option<AuxGrid>,
    pub options: HierarchyOptions,
    pub locality: LocalityReport,
    pub setup_seconds: f64,
}

impl Hierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &Level {
        &self.levels[0]
    }

    pub fn stats(&self) -> HierarchyStats {
        let sizes: Vec<usize> = self.levels.iter().map(Level::n).collect();
        let nnz: Vec<usize> = self.levels.iter().map(|l| l.operator.nnz()).collect();
        let total: usize = nnz.iter().sum();
        HierarchyStats {
            levels: self.levels.len(),
            sizes,
            operator_complexity: if nnz[0] == 0 { 1.0 } else { total as f64 / nnz[0] as f64 },
            nnz,
            inactive: self.levels.iter().map(Level::n_inactive).collect(),
            depth: self.grid.map(|g| g.depth),
        }
    }
}

/// Builds the full level stack for an SPD matrix with per-DoF coordinates.
pub fn setup_hierarchy(a: &CsrMatrix, coords: &[[f64; 2]], options: &HierarchyOptions) -> Result<Hierarchy> {
    let start = Instant::now();
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(AmgError::Structure(format!("matrix is {}x{}, not square", n, a.n_cols())));
    }
    if coords.len() != n {
        return Err(AmgError::Size {
            what: "coordinate count",
            expected: n,
            got: coords.len(),
        });
    }
    if !a.is_symmetric(1e-10) {
        return Err(AmgError::Structure("matrix is not symmetric".into()));
    }
    if let Some(r) = a.diagonal().iter().position(|&d| !(d > 0.0)) {
        return Err(AmgError::Definiteness(format!("diagonal entry of row {r} is not positive")));
    }
    if options.coarsest_size == 0 {
        return Err(AmgError::Argument("coarsest_size must be positive".into()));
    }

    let depth = if n <= options.coarsest_size || n < 5 {
        0
    } else {
        crate::auxgrid::choose_depth(n)?
    };

    if depth == 0 {
        let mut dense = a.to_dense();
        dense.factor()?;
        return Ok(Hierarchy {
            levels: vec![Level {
                k: 0,
                operator: Operator::Csr(a.clone()),
                active: vec![true; n],
                to_coarser: None,
                smoother: LevelSmoother::None,
            }],
            coarsest: dense,
            grid: None,
            options: options.clone(),
            locality: LocalityReport::default(),
            setup_seconds: start.elapsed().as_secs_f64(),
        });
    }

    let grid = AuxGrid::from_points(coords)?;
    debug_assert_eq!(grid.depth, depth);
    let agg = aggregate_finest(coords, &grid)?;
    let factors = smoother::factor_blocks(a, &agg)?;
    let block_schedule = ColorSchedule::quadtree(depth, &factors.active());
    let coarse = assemble_coarse_finest(a, &agg, depth, options.locality)?;
    let locality = coarse.locality.clone();

    let mut levels = vec![Level {
        k: depth + 1,
        operator: Operator::Csr(a.clone()),
        active: vec![true; n],
        to_coarser: Some(Transfer::new(agg, false, &vec![true; n])),
        smoother: LevelSmoother::Block {
            factors,
            schedule: block_schedule,
        },
    }];

    let mut k = depth;
    let mut current = coarse;
    while auxgrid::n_cells(k) > options.coarsest_size && k > 0 {
        let next = assemble_coarse_structured(&current.matrix, &current.active, k - 1)?;
        levels.push(Level {
            k,
            smoother: LevelSmoother::Point {
                schedule: ColorSchedule::quadtree(k, &current.active),
            },
            to_coarser: Some(Transfer::new(aggregate_coarse(k)?, true, &current.active)),
            operator: Operator::Ell(current.matrix),
            active: current.active,
        });
        current = next;
        k -= 1;
    }
    let mut dense = current.matrix.to_dense();
    dense
        .factor()
        .map_err(|e| AmgError::Definiteness(format!("coarsest operator (level {k}): {e}")))?;
    levels.push(Level {
        k,
        operator: Operator::Ell(current.matrix),
        active: current.active,
        to_coarser: None,
        smoother: LevelSmoother::None,
    });

    Ok(Hierarchy {
        levels,
        coarsest: dense,
        grid: Some(grid),
        options: options.clone(),
        locality,
        setup_seconds: start.elapsed().as_secs_f64(),
    })
}
