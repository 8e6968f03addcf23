//! Four-color Gauss-Seidel as a standalone iteration on 5-point Poisson,
//! compared with one K-cycle per step.

use auxamg::cycle::amli_cycle;
use auxamg::smoother::{point_gs_sweep, ColorSchedule, Direction};
use auxamg::sparse::EllMatrix;
use auxamg::vecops::{norm2, sub};
use auxamg::{gen_poisson_uniform2d, setup_hierarchy, CycleOptions, HierarchyOptions};

fn main() -> auxamg::Result<()> {
    let k = 5;
    let sys = gen_poisson_uniform2d((1 << k) + 1)?;
    let a = EllMatrix::from_csr(&sys.a, 9)?;
    let sched = ColorSchedule::quadtree(k, &vec![true; sys.n()]);
    let b0 = norm2(&sys.b);

    let mut x = vec![0.0; sys.n()];
    for sweep in 1..=200 {
        let dir = if sweep % 2 == 1 { Direction::Forward } else { Direction::Backward };
        point_gs_sweep(&a, &sys.b, &mut x, &sched, dir)?;
        if sweep % 40 == 0 {
            println!("gs sweeps {sweep:>3}: rel residual {:.3e}", norm2(&sub(&sys.b, &sys.a.spmv(&x)?)) / b0);
        }
    }

    let h = setup_hierarchy(&sys.a, &sys.coords, &HierarchyOptions::default())?;
    let opts = CycleOptions::default();
    let mut x = vec![0.0; sys.n()];
    for it in 1..=8 {
        let r = sub(&sys.b, &sys.a.spmv(&x)?);
        let e = amli_cycle(&h, 0, &r, &opts)?;
        x.iter_mut().zip(&e).for_each(|(xi, ei)| *xi += ei);
        println!("k-cycle {it}: rel residual {:.3e}", norm2(&sub(&sys.b, &sys.a.spmv(&x)?)) / b0);
    }
    Ok(())
}
