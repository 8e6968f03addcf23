//! ELL storage: a small general matrix, then the 9-point layout used by
//! every structured coarse operator.

use auxamg::hierarchy::build_stencil_indices;
use auxamg::sparse::{EllMatrix, PAD};
use auxamg::CsrMatrix;

fn main() -> auxamg::Result<()> {
    let csr = CsrMatrix::new(3, 4, vec![0, 2, 5, 7], vec![0, 1, 0, 1, 2, 2, 3], vec![4.0, -2.0, -1.0, 2.0, -1.0, -3.0, 4.0])?;
    let ell = EllMatrix::general(3, 4, 3, vec![0, 0, 2, 1, 1, 3, PAD, 2, PAD], vec![4.0, -1.0, -3.0, -2.0, 2.0, 4.0, 0.0, -1.0, 0.0])?;
    println!("csr * 1 = {:?}", csr.spmv(&[1.0; 4])?);
    println!("ell * 1 = {:?}", ell.spmv(&[1.0; 4])?);
    println!("ell col_idx (column-major) {:?}", ell.col_idx());

    let k = 2;
    let n = 1 << (2 * k);
    let cols = build_stencil_indices(k);
    println!("9-point neighbors on level {k} (slot order: self, E, NE, N, NW, W, SW, S, SE)");
    for i in [0, 5, 15] {
        let row: Vec<isize> = (0..9).map(|t| cols[t * n + i]).collect();
        println!("  cell {i:>2}: {row:?}");
    }
    Ok(())
}
