//! 5-point Poisson on the unit square: setup, solve and the usual
//! setup / iterations / solve / total table.
//!
//! cargo run --release --example poisson_uniform -- 512

use auxamg::{gen_poisson_uniform2d, setup_hierarchy, solve, CycleOptions, HierarchyOptions};

fn main() -> auxamg::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let sys = gen_poisson_uniform2d(n)?;
    let h = setup_hierarchy(&sys.a, &sys.coords, &HierarchyOptions::default())?;
    let stats = h.stats();
    println!("N = {}, quadtree depth {:?}", sys.n(), stats.depth);
    for (l, (size, nnz)) in stats.sizes.iter().zip(&stats.nnz).enumerate() {
        println!("  level {l}: {size:>8} rows {nnz:>9} nnz");
    }
    println!("  operator complexity {:.3}", stats.operator_complexity);

    let res = solve(&sys.a, &sys.b, &h, &CycleOptions::default())?;
    println!("setup {:.3}s  iters {}  solve {:.3}s  total {:.3}s", res.timings.setup_s, res.iterations, res.timings.solve_s, res.timings.total_s);
    for (i, r) in res.residual_history.iter().enumerate() {
        println!("  {i:>3}  {:.3e}", r / res.residual_history[0]);
    }
    Ok(())
}
