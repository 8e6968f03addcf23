//! Test problems: finite-difference Poisson on the unit square, P1 finite
//! elements on triangle meshes, a few mesh generators and the plain-text
//! mesh and coordinate file formats.
//!
//! Mesh files list 1-based ids:
//!
//! ```text
//! NODES 4
//! 1 0 0
//! 2 1 0
//! 3 1 1
//! 4 0 1
//! ELEMENTS 2
//! 1 1 2 3
//! 2 1 3 4
//! BOUNDARY 1
//! 1
//! ```
//!
//! The `BOUNDARY` section is optional. Boundary nodes are the endpoints of
//! edges used by exactly one triangle, plus any listed ids.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{AmgError, Result};
use crate::sparse::CsrMatrix;

/// `A x = b` with one coordinate pair per unknown.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub coords: Vec<[f64; 2]>,
    pub exact: Option<Vec<f64>>,
}

impl LinearSystem {
    pub fn n(&self) -> usize {
        self.b.len()
    }
}

/// 5-point Poisson matrix on the `(n-1)^2` interior nodes of a uniform
/// grid with `n` cells per side, scaled so the stencil is `4, -1`. The
/// right-hand side is `h^2 f` with `f = 1`.
pub fn gen_poisson_uniform2d(n: usize) -> Result<LinearSystem> {
    poisson_with_source(n, |_, _| 1.0, None)
}

/// Same matrix with the source for `u = sin(pi x) sin(pi y)`; `exact`
/// holds `u` at the nodes.
pub fn gen_poisson_manufactured(n: usize) -> Result<LinearSystem> {
    let u = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    poisson_with_source(n, |x, y| 2.0 * PI * PI * u(x, y), Some(&u))
}

fn poisson_with_source(
    n: usize,
    f: impl Fn(f64, f64) -> f64,
    exact: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<LinearSystem> {
    if n < 2 {
        return Err(AmgError::Argument(format!("poisson grid needs n >= 2 cells per side, got {n}")));
    }
    let m = n - 1;
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| i + m * j;
    let mut row_ptr = Vec::with_capacity(m * m + 1);
    let mut col_idx = Vec::with_capacity(5 * m * m);
    let mut values = Vec::with_capacity(5 * m * m);
    let mut coords = Vec::with_capacity(m * m);
    row_ptr.push(0);
    for j in 0..m {
        for i in 0..m {
            if j > 0 {
                col_idx.push(id(i, j - 1));
                values.push(-1.0);
            }
            if i > 0 {
                col_idx.push(id(i - 1, j));
                values.push(-1.0);
            }
            col_idx.push(id(i, j));
            values.push(4.0);
            if i + 1 < m {
                col_idx.push(id(i + 1, j));
                values.push(-1.0);
            }
            if j + 1 < m {
                col_idx.push(id(i, j + 1));
                values.push(-1.0);
            }
            row_ptr.push(col_idx.len());
            coords.push([(i + 1) as f64 * h, (j + 1) as f64 * h]);
        }
    }
    let a = CsrMatrix::new(m * m, m * m, row_ptr, col_idx, values)?;
    let b = coords.iter().map(|&[x, y]| h * h * f(x, y)).collect();
    let exact = exact.map(|u| coords.iter().map(|&[x, y]| u(x, y)).collect());
    Ok(LinearSystem { a, b, coords, exact })
}

/// Triangle mesh of a planar domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Sorted, without duplicates.
    pub boundary: Vec<usize>,
}

/// Smallest accepted triangle area.
pub const MIN_AREA: f64 = 1e-14;

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl TriMesh {
    /// Validates indices and areas, then derives the boundary from edges
    /// used by a single triangle and adds `extra_boundary`.
    pub fn new(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, extra_boundary: &[usize]) -> Result<Self> {
        let n = nodes.len();
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for (e, t) in triangles.iter().enumerate() {
            if let Some(&v) = t.iter().find(|&&v| v >= n) {
                return Err(AmgError::Structure(format!(
                    "triangle {e} references node {v}, mesh has {n}"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(AmgError::Geometry(format!("triangle {e} repeats a vertex")));
            }
            let area = signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]).abs();
            if !(area > MIN_AREA) {
                return Err(AmgError::Geometry(format!("triangle {e} is degenerate (area {area:e})")));
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary = BTreeSet::new();
        for (&(a, b), &count) in &edges {
            if count == 1 {
                boundary.insert(a);
                boundary.insert(b);
            }
        }
        for &v in extra_boundary {
            if v >= n {
                return Err(AmgError::Structure(format!("boundary node {v} out of range ({n} nodes)")));
            }
            boundary.insert(v);
        }
        Ok(Self {
            nodes,
            triangles,
            boundary: boundary.into_iter().collect(),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_boundary(&self) -> Vec<bool> {
        let mut b = vec![false; self.nodes.len()];
        for &v in &self.boundary {
            b[v] = true;
        }
        b
    }
}

/// P1 element stiffness matrix: `K_ij = (e_i . e_j) / (4 |T|)` with `e_i`
/// the edge opposite vertex `i`.
fn element_stiffness(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], f64) {
    let area = signed_area(p[0], p[1], p[2]).abs();
    let e: [[f64; 2]; 3] = std::array::from_fn(|i| {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        [b[0] - a[0], b[1] - a[1]]
    });
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (e[i][0] * e[j][0] + e[i][1] * e[j][1]) / (4.0 * area);
        }
    }
    (k, area)
}

/// Full P1 stiffness matrix over all nodes, without boundary conditions.
pub fn assemble_stiffness_full(mesh: &TriMesh) -> Result<CsrMatrix> {
    let n = mesh.n_nodes();
    let trip: Vec<(usize, usize, f64)> = mesh
        .triangles
        .par_iter()
        .flat_map_iter(|t| {
            let (k, _) = element_stiffness([mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]]);
            (0..9).map(move |ij| (t[ij / 3], t[ij % 3], k[ij / 3][ij % 3]))
        })
        .collect();
    CsrMatrix::from_triplets(n, n, &trip)
}

/// P1 Poisson system for `-Δu = f` with homogeneous Dirichlet conditions on
/// the mesh boundary. Boundary rows and columns are removed; couplings that
/// vanish exactly are not stored.
pub fn assemble_fem_triangle(mesh: &TriMesh, f: f64) -> Result<LinearSystem> {
    let n = mesh.n_nodes();
    for (e, t) in mesh.triangles.iter().enumerate() {
        let area = signed_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]).abs();
        if !(area > MIN_AREA) {
            return Err(AmgError::Geometry(format!("triangle {e} is degenerate (area {area:e})")));
        }
    }
    let is_bnd = mesh.is_boundary();
    let mut new_id = vec![usize::MAX; n];
    let mut coords = Vec::new();
    for v in 0..n {
        if !is_bnd[v] {
            new_id[v] = coords.len();
            coords.push(mesh.nodes[v]);
        }
    }
    let nf = coords.len();

    let elements: Vec<([[f64; 3]; 3], f64)> = mesh
        .triangles
        .par_iter()
        .map(|t| element_stiffness([mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]]))
        .collect();
    let mut trip = Vec::with_capacity(9 * elements.len());
    let mut b = vec![0.0; nf];
    for (t, (k, area)) in mesh.triangles.iter().zip(&elements) {
        for i in 0..3 {
            let r = new_id[t[i]];
            if r == usize::MAX {
                continue;
            }
            b[r] += f * area / 3.0;
            for j in 0..3 {
                let c = new_id[t[j]];
                if c != usize::MAX {
                    trip.push((r, c, k[i][j]));
                }
            }
        }
    }
    let full = CsrMatrix::from_triplets(nf, nf, &trip)?;
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::with_capacity(full.nnz());
    let mut values = Vec::with_capacity(full.nnz());
    for r in 0..nf {
        let (cols, vals) = full.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if v != 0.0 || c == r {
                col_idx.push(c);
                values.push(v);
            }
        }
        row_ptr.push(col_idx.len());
    }
    Ok(LinearSystem {
        a: CsrMatrix::new(nf, nf, row_ptr, col_idx, values)?,
        b,
        coords,
        exact: None,
    })
}

fn split_grid(xs: &[[f64; 2]], n: usize) -> Vec<[usize; 3]> {
    debug_assert_eq!(xs.len(), (n + 1) * (n + 1));
    let id = |i: usize, j: usize| i + (n + 1) * j;
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    tris
}

/// Unit square with `n x n` cells, each split along its south-west to
/// north-east diagonal.
pub fn unit_square_mesh(n: usize) -> Result<TriMesh> {
    if n < 1 {
        return Err(AmgError::Argument("unit square mesh needs n >= 1".into()));
    }
    let nodes: Vec<[f64; 2]> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| [i as f64 / n as f64, j as f64 / n as f64]))
        .collect();
    let tris = split_grid(&nodes, n);
    TriMesh::new(nodes, tris, &[])
}

/// Split unit square whose grid lines follow `s -> (e^{g s} - 1)/(e^g - 1)`
/// in both directions, with interior nodes moved by up to `jitter` times the
/// local spacing. `grading = 0` gives uniform lines.
pub fn graded_square_mesh(n: usize, grading: f64, jitter: f64, seed: u64) -> Result<TriMesh> {
    if n < 2 {
        return Err(AmgError::Argument("graded mesh needs n >= 2".into()));
    }
    if !(0.0..0.5).contains(&jitter) || !grading.is_finite() {
        return Err(AmgError::Argument(format!(
            "graded mesh needs finite grading and jitter in [0, 0.5), got {grading}, {jitter}"
        )));
    }
    let map = |s: f64| {
        if grading.abs() < 1e-12 {
            s
        } else {
            (grading * s).exp_m1() / grading.exp_m1()
        }
    };
    let lines: Vec<f64> = (0..=n).map(|i| map(i as f64 / n as f64)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut p = [lines[i], lines[j]];
            if i > 0 && i < n && j > 0 && j < n && jitter > 0.0 {
                let hx = (lines[i + 1] - lines[i]).min(lines[i] - lines[i - 1]);
                let hy = (lines[j + 1] - lines[j]).min(lines[j] - lines[j - 1]);
                p[0] += jitter * hx * rng.gen_range(-1.0..1.0);
                p[1] += jitter * hy * rng.gen_range(-1.0..1.0);
            }
            nodes.push(p);
        }
    }
    let tris = split_grid(&nodes, n);
    TriMesh::new(nodes, tris, &[])
}

/// Disk of the given radius centered at the origin: a center node and
/// `rings` concentric rings, ring `k` holding `6k` equally spaced nodes.
pub fn disk_mesh(rings: usize, radius: f64) -> Result<TriMesh> {
    if rings < 1 || !(radius > 0.0) {
        return Err(AmgError::Argument(format!(
            "disk mesh needs rings >= 1 and radius > 0, got {rings}, {radius}"
        )));
    }
    let mut nodes = vec![[0.0, 0.0]];
    let mut starts = vec![0usize];
    for k in 1..=rings {
        starts.push(nodes.len());
        let r = radius * k as f64 / rings as f64;
        let m = 6 * k;
        for j in 0..m {
            let th = 2.0 * PI * j as f64 / m as f64;
            nodes.push([r * th.cos(), r * th.sin()]);
        }
    }
    let ring_len = |k: usize| if k == 0 { 1 } else { 6 * k };
    let mut tris = Vec::new();
    for k in 1..=rings {
        let (inner, outer) = (ring_len(k - 1), ring_len(k));
        let (si, so) = (starts[k - 1], starts[k]);
        // walk both rings by angle, always advancing the one whose next
        // node comes first
        let (mut i, mut j) = (0usize, 0usize);
        while i < inner || j < outer {
            let ti = if inner == 1 { f64::INFINITY } else { (i + 1) as f64 / inner as f64 };
            let tj = (j + 1) as f64 / outer as f64;
            let a = si + i % inner;
            let b = so + j % outer;
            if j == outer || (i < inner && ti <= tj) {
                tris.push([a, b, si + (i + 1) % inner]);
                i += 1;
            } else {
                tris.push([a, b, so + (j + 1) % outer]);
                j += 1;
            }
            if inner == 1 && j == outer {
                break;
            }
        }
    }
    TriMesh::new(nodes, tris, &[])
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

/// Parses the plain-text mesh format described in the module docs.
pub fn parse_mesh(text: &str) -> Result<TriMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    fn header<'a>(
        lines: &mut impl Iterator<Item = (usize, &'a str)>,
        want: &str,
    ) -> Result<Option<(usize, usize)>> {
        let Some((lno, line)) = lines.next() else {
            return Ok(None);
        };
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap_or("");
        if !tag.eq_ignore_ascii_case(want) {
            return Err(AmgError::parse(lno, format!("expected '{want} <count>', found '{line}'")));
        }
        let count = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| AmgError::parse(lno, format!("bad {want} count")))?;
        Ok(Some((lno, count)))
    }

    fn fields<const K: usize>(lno: usize, line: &str) -> Result<[&str; K]> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        toks.try_into()
            .map_err(|_| AmgError::parse(lno, format!("expected {K} fields")))
    }

    fn id(lno: usize, tok: &str, bound: usize, what: &str) -> Result<usize> {
        let v: usize = tok
            .parse()
            .map_err(|_| AmgError::parse(lno, format!("bad {what} id '{tok}'")))?;
        if v == 0 || v > bound {
            return Err(AmgError::parse(lno, format!("{what} id {v} outside 1..={bound}")));
        }
        Ok(v - 1)
    }

    let (_, n_nodes) = header(&mut lines, "NODES")?.ok_or_else(|| AmgError::parse(1, "empty mesh file"))?;
    let mut nodes = vec![[f64::NAN; 2]; n_nodes];
    let mut last = 0;
    for _ in 0..n_nodes {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| AmgError::parse(last + 1, "missing node lines"))?;
        last = lno;
        let [i, x, y] = fields::<3>(lno, line)?;
        let i = id(lno, i, n_nodes, "node")?;
        let coord = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| AmgError::parse(lno, format!("bad coordinate '{t}'")))
        };
        if !nodes[i][0].is_nan() {
            return Err(AmgError::parse(lno, format!("node {} listed twice", i + 1)));
        }
        nodes[i] = [coord(x)?, coord(y)?];
    }

    let (_, n_elems) = header(&mut lines, "ELEMENTS")?
        .ok_or_else(|| AmgError::parse(last + 1, "missing ELEMENTS section"))?;
    let mut tris = vec![[usize::MAX; 3]; n_elems];
    for _ in 0..n_elems {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| AmgError::parse(last + 1, "missing element lines"))?;
        last = lno;
        let [e, a, b, c] = fields::<4>(lno, line)?;
        let e = id(lno, e, n_elems, "element")?;
        if tris[e][0] != usize::MAX {
            return Err(AmgError::parse(lno, format!("element {} listed twice", e + 1)));
        }
        tris[e] = [
            id(lno, a, n_nodes, "node")?,
            id(lno, b, n_nodes, "node")?,
            id(lno, c, n_nodes, "node")?,
        ];
    }

    let mut boundary = Vec::new();
    if let Some((_, n_bnd)) = header(&mut lines, "BOUNDARY")? {
        for _ in 0..n_bnd {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| AmgError::parse(last + 1, "missing boundary lines"))?;
            last = lno;
            let [v] = fields::<1>(lno, line)?;
            boundary.push(id(lno, v, n_nodes, "node")?);
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(AmgError::parse(lno, "unexpected trailing content"));
    }
    TriMesh::new(nodes, tris, &boundary)
}

/// Writes a mesh, listing every boundary node explicitly.
pub fn format_mesh(mesh: &TriMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "NODES {}", mesh.nodes.len());
    for (i, p) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(s, "{} {:e} {:e}", i + 1, p[0], p[1]);
    }
    let _ = writeln!(s, "ELEMENTS {}", mesh.triangles.len());
    for (e, t) in mesh.triangles.iter().enumerate() {
        let _ = writeln!(s, "{} {} {} {}", e + 1, t[0] + 1, t[1] + 1, t[2] + 1);
    }
    let _ = writeln!(s, "BOUNDARY {}", mesh.boundary.len());
    for v in &mesh.boundary {
        let _ = writeln!(s, "{}", v + 1);
    }
    s
}

pub fn write_mesh(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_mesh(mesh))?;
    Ok(())
}

/// Reads one `x y` pair per line.
pub fn read_coords(path: impl AsRef<Path>) -> Result<Vec<[f64; 2]>> {
    parse_coords(&std::fs::read_to_string(path)?)
}

pub fn parse_coords(text: &str) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| AmgError::parse(i + 1, format!("bad coordinate line '{line}'")))?;
        if v.len() != 2 {
            return Err(AmgError::parse(i + 1, "expected 'x y'"));
        }
        out.push([v[0], v[1]]);
    }
    Ok(out)
}

pub fn write_coords(coords: &[[f64; 2]], path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::with_capacity(24 * coords.len());
    for p in coords {
        let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
    }
    std::fs::write(path, s)?;
    Ok(())
}
