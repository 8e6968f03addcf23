//! A disk inside its square bounding box: auxiliary cells in the corners
//! hold no unknowns. Those rows are flagged inactive, skipped by the
//! smoother and never touched by the cycle.

use auxamg::problems::{assemble_fem_triangle, disk_mesh};
use auxamg::{setup_hierarchy, solve, CycleOptions, HierarchyOptions};

fn main() -> auxamg::Result<()> {
    let mesh = disk_mesh(60, 1.0)?;
    let sys = assemble_fem_triangle(&mesh, 1.0)?;
    let h = setup_hierarchy(&sys.a, &sys.coords, &HierarchyOptions::default())?;
    for lev in &h.levels {
        println!("level k={:<2} rows {:>6}  inactive {:>5}", lev.k, lev.n(), lev.n_inactive());
    }
    if let Some(grid) = h.levels[1..].first().and(h.grid) {
        let lev = &h.levels[1];
        let w = 1usize << lev.k;
        if w <= 64 {
            for t2 in (0..w).rev() {
                let row: String = (0..w).map(|t1| if lev.active[t1 + w * t2] { '#' } else { '.' }).collect();
                println!("{row}");
            }
        }
        println!("bounding box {:?}", grid.bbox);
    }
    let res = solve(&sys.a, &sys.b, &h, &CycleOptions::default())?;
    // -Δu = 1 on the unit disk has u(0) = 1/4
    let center = sys
        .coords
        .iter()
        .position(|p| p[0] == 0.0 && p[1] == 0.0)
        .map(|i| res.solution[i]);
    println!("iters {} converged {}  u(0) = {center:?}", res.iterations, res.converged);
    Ok(())
}
