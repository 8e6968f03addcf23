//! Round trip through Matrix Market and coordinate files, then a solve
//! from the files alone.

use auxamg::problems::{assemble_fem_triangle, read_coords, unit_square_mesh, write_coords};
use auxamg::sparse::{read_matrix_market, write_matrix_market};
use auxamg::{setup_hierarchy, solve, CycleOptions, HierarchyOptions};

fn main() -> auxamg::Result<()> {
    let dir = std::env::temp_dir().join("auxamg-mtx-example");
    std::fs::create_dir_all(&dir)?;
    let (mtx, xy) = (dir.join("square.mtx"), dir.join("square.xy"));

    let sys = assemble_fem_triangle(&unit_square_mesh(100)?, 1.0)?;
    write_matrix_market(&sys.a, &mtx)?;
    write_coords(&sys.coords, &xy)?;

    let a = read_matrix_market(&mtx)?;
    let coords = read_coords(&xy)?;
    assert_eq!(a, sys.a);
    println!("{}: {}x{} with {} nonzeros", mtx.display(), a.n_rows(), a.n_cols(), a.nnz());

    let h = setup_hierarchy(&a, &coords, &HierarchyOptions::default())?;
    let b = vec![1.0; a.n_rows()];
    let res = solve(&a, &b, &h, &CycleOptions::default())?;
    println!("iters {} converged {}", res.iterations, res.converged);
    println!("same run from the command line:\n  auxamg --matrix {} --coords {}", mtx.display(), xy.display());
    Ok(())
}
