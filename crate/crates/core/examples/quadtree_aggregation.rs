//! Index arithmetic of the auxiliary quadtree: cell lookup, parents,
//! children and the four colors.

use auxamg::auxgrid::{aggregate_finest, cell_coords, children, color_of, parent, AuxGrid};

fn main() -> auxamg::Result<()> {
    let pts: Vec<[f64; 2]> = (0..40)
        .map(|i| {
            let t = i as f64 * 0.37;
            [t.cos() * (1.0 + 0.02 * i as f64), t.sin()]
        })
        .collect();
    let grid = AuxGrid::from_points(&pts)?;
    println!("{} points -> depth {}, box {:?}", pts.len(), grid.depth, grid.bbox);

    let agg = aggregate_finest(&pts, &grid)?;
    println!("{} cells, {} empty", agg.n_aggregates(), agg.n_empty());
    for (j, p) in pts.iter().enumerate().take(6) {
        let i = agg.agg_of()[j];
        let mut chain = vec![i];
        for k in (1..=grid.depth).rev() {
            chain.push(parent(*chain.last().unwrap(), k));
        }
        println!("point {j} ({:+.2}, {:+.2}) cell {:?} ancestors {chain:?}", p[0], p[1], cell_coords(i, grid.depth));
    }

    let k = 2;
    println!("children of cell 5 on level {}: {:?}", k - 1, children(5, k));
    let w = 1usize << k;
    for t2 in (0..w).rev() {
        let row: Vec<String> = (0..w).map(|t1| color_of(t1 + w * t2, k).unwrap().to_string()).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
