//! Algebraic multigrid for SPD systems on 2D unstructured grids, driven by
//! an auxiliary structured grid.
//!
//! The unknowns are binned into the cells of a `2^L x 2^L` grid laid over
//! their bounding box. Those cells are the first aggregates; coarser
//! aggregates are the quadtree parents, so every coarse operator is a
//! 9-point stencil stored in ELL format and smoothed with four-color
//! Gauss-Seidel. The cycle is a nonlinear AMLI (K-)cycle used as the
//! preconditioner of flexible CG.
//!
//! ```
//! use auxamg::{gen_poisson_uniform2d, setup_hierarchy, solve, CycleOptions, HierarchyOptions};
//!
//! let sys = gen_poisson_uniform2d(32).unwrap();
//! let h = setup_hierarchy(&sys.a, &sys.coords, &HierarchyOptions::default()).unwrap();
//! let res = solve(&sys.a, &sys.b, &h, &CycleOptions::default()).unwrap();
//! assert!(res.converged);
//! ```

pub mod auxgrid;
pub mod cli;
pub mod cycle;
pub mod error;
pub mod hierarchy;
pub mod problems;
pub mod smoother;
pub mod sparse;
pub mod vecops;

#[cfg(test)]
mod testutil;

pub use auxgrid::{AggregationMap, AuxGrid, BoundingBox};
pub use cycle::{amli_cycle, nonlinear_pcg, solve, CycleOptions, SolveResult};
pub use error::{AmgError, Result};
pub use hierarchy::{setup_hierarchy, Hierarchy, HierarchyOptions, HierarchyStats, LocalityMode};
pub use problems::{assemble_fem_triangle, gen_poisson_uniform2d, LinearSystem, TriMesh};
pub use sparse::{CsrMatrix, DenseMatrix, EllMatrix};
