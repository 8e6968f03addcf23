//! P1 finite elements on a graded, jittered triangulation of the unit
//! square. The auxiliary grid only sees the node coordinates.

use auxamg::problems::{assemble_fem_triangle, graded_square_mesh};
use auxamg::{setup_hierarchy, solve, CycleOptions, HierarchyOptions};

fn main() -> auxamg::Result<()> {
    for (n, grading) in [(80, 0.0), (80, 0.3), (160, 0.3), (320, 0.3)] {
        let mesh = graded_square_mesh(n, grading, 0.15, 7)?;
        let sys = assemble_fem_triangle(&mesh, 1.0)?;
        let h = setup_hierarchy(&sys.a, &sys.coords, &HierarchyOptions::default())?;
        let res = solve(&sys.a, &sys.b, &h, &CycleOptions::default())?;
        println!(
            "n={n:<4} grading={grading:.1}  N={:<7} levels={} dropped={:<4} iters={:<3} converged={}",
            sys.n(),
            h.n_levels(),
            h.locality.dropped.len(),
            res.iterations,
            res.converged
        );
    }
    Ok(())
}
