//! Flexible CG on a graded FEM system with three preconditioners: none,
//! Jacobi, and one K-cycle (nonlinear, since it runs inner CG steps).

use auxamg::cycle::{amli_cycle, nonlinear_pcg};
use auxamg::problems::{assemble_fem_triangle, graded_square_mesh};
use auxamg::vecops::{norm2, sub};
use auxamg::{setup_hierarchy, CycleOptions, HierarchyOptions};

fn main() -> auxamg::Result<()> {
    let sys = assemble_fem_triangle(&graded_square_mesh(64, 0.3, 0.15, 7)?, 1.0)?;
    let h = setup_hierarchy(&sys.a, &sys.coords, &HierarchyOptions::default())?;
    let opts = CycleOptions::default();
    let d = sys.a.diagonal();
    let apply = |x: &[f64]| sys.a.spmv(x).unwrap();
    let residual = |u: &[f64]| norm2(&sub(&sys.b, &sys.a.spmv(u).unwrap())) / norm2(&sys.b);

    for steps in [5, 10, 20, 40] {
        let plain = nonlinear_pcg(apply, |r| Ok(r.to_vec()), &sys.b, steps)?;
        let jacobi = nonlinear_pcg(apply, |r| Ok(r.iter().zip(&d).map(|(a, b)| a / b).collect()), &sys.b, steps)?;
        let kcycle = nonlinear_pcg(apply, |r| amli_cycle(&h, 0, r, &opts), &sys.b, steps)?;
        println!(
            "{steps:>3} steps: identity {:.2e}  jacobi {:.2e}  k-cycle {:.2e}",
            residual(&plain),
            residual(&jacobi),
            residual(&kcycle)
        );
    }
    Ok(())
}
