//! Solve phase: nonlinear (flexible) PCG, the recursive K-cycle and the
//! outer preconditioned loop.

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{AmgError, Result};
use crate::hierarchy::Hierarchy;
use crate::smoother::Direction;
use crate::sparse::{CsrMatrix, DenseMatrix};
use crate::vecops::{axpy, dot, norm2, sub};

/// Energy below which a search direction counts as a breakdown.
pub const BREAKDOWN: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleOptions {
    /// Flexible CG steps per coarse-grid correction.
    pub n_inner: usize,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub max_outer: usize,
    pub rtol: f64,
    /// Keep only this many previous directions in the outer loop.
    pub max_directions: Option<usize>,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            n_inner: 2,
            pre_sweeps: 1,
            post_sweeps: 1,
            max_outer: 100,
            rtol: 1e-6,
            max_directions: None,
        }
    }
}

impl CycleOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_inner", self.n_inner),
            ("pre_sweeps", self.pre_sweeps),
            ("post_sweeps", self.post_sweeps),
            ("max_outer", self.max_outer),
            ("max_directions", self.max_directions.unwrap_or(1)),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(AmgError::Argument(format!("{name} must be positive")));
            }
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(AmgError::Argument(format!("rtol {} not in (0, 1)", self.rtol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solution: Vec<f64>,
    /// `||r_i||_2` for `i = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub timings: Timings,
}

impl SolveResult {
    pub fn relative_residual(&self) -> f64 {
        match (self.residual_history.first(), self.residual_history.last()) {
            (Some(&r0), Some(&r)) if r0 > 0.0 => r / r0,
            _ => 0.0,
        }
    }
}

struct SearchDirection {
    p: Vec<f64>,
    ap: Vec<f64>,
    energy: f64,
}

/// Flexible CG from a zero initial guess. `after_step` sees the step count
/// and the updated residual and returns `true` to stop.
fn flexible_cg<A, P, S>(
    mut apply_a: A,
    mut precond: P,
    f: &[f64],
    max_steps: usize,
    window: Option<usize>,
    mut after_step: S,
) -> Result<Vec<f64>>
where
    A: FnMut(&[f64]) -> Vec<f64>,
    P: FnMut(&[f64]) -> Result<Vec<f64>>,
    S: FnMut(usize, &[f64]) -> bool,
{
    let mut u = vec![0.0; f.len()];
    let mut r = f.to_vec();
    let mut dirs: VecDeque<SearchDirection> = VecDeque::new();
    for step in 1..=max_steps {
        let z = precond(&r)?;
        let mut p = z.clone();
        for d in &dirs {
            let beta = -dot(&z, &d.ap) / d.energy;
            axpy(beta, &d.p, &mut p);
        }
        let ap = apply_a(&p);
        let energy = dot(&p, &ap);
        if !(energy > BREAKDOWN) {
            break;
        }
        let alpha = dot(&r, &p) / energy;
        axpy(alpha, &p, &mut u);
        axpy(-alpha, &ap, &mut r);
        if window == Some(dirs.len()) {
            dirs.pop_front();
        }
        dirs.push_back(SearchDirection { p, ap, energy });
        if after_step(step, &r) {
            break;
        }
    }
    Ok(u)
}

/// `n` steps of nonlinear PCG for `A u = f` with a possibly nonlinear
/// preconditioner. Every new direction is made A-orthogonal to all earlier
/// ones. Stops early, returning the current iterate, when a direction has
/// no energy.
pub fn nonlinear_pcg<A, P>(apply_a: A, precond: P, f: &[f64], n: usize) -> Result<Vec<f64>>
where
    A: FnMut(&[f64]) -> Vec<f64>,
    P: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if n == 0 {
        return Err(AmgError::Argument("nonlinear_pcg needs at least one step".into()));
    }
    flexible_cg(apply_a, precond, f, n, None, |_, _| false)
}

/// Direct solve with the LU factors of the coarsest operator.
pub fn coarsest_solve(coarsest: &DenseMatrix, f: &[f64]) -> Result<Vec<f64>> {
    coarsest.solve(f)
}

/// The cycle action `B_k[f]` on level index `level` (0 is the finest).
pub fn amli_cycle(h: &Hierarchy, level: usize, f: &[f64], opts: &CycleOptions) -> Result<Vec<f64>> {
    let lev = h.levels.get(level).ok_or(AmgError::Size {
        what: "cycle level",
        expected: h.levels.len() - 1,
        got: level,
    })?;
    if f.len() != lev.n() {
        return Err(AmgError::Size {
            what: "cycle right-hand side",
            expected: lev.n(),
            got: f.len(),
        });
    }
    let Some(transfer) = &lev.to_coarser else {
        return coarsest_solve(&h.coarsest, f);
    };

    let mut u = vec![0.0; f.len()];
    for _ in 0..opts.pre_sweeps {
        lev.smooth(f, &mut u, Direction::Forward)?;
    }
    let r = sub(f, &lev.operator.apply(&u));
    let rc = transfer.restrict(&r)?;

    let next = level + 1;
    let ec = if h.levels[next].to_coarser.is_none() {
        coarsest_solve(&h.coarsest, &rc)?
    } else {
        let op = &h.levels[next].operator;
        nonlinear_pcg(|x| op.apply(x), |g| amli_cycle(h, next, g, opts), &rc, opts.n_inner)?
    };
    axpy(1.0, &transfer.prolongate(&ec)?, &mut u);

    for _ in 0..opts.post_sweeps {
        lev.smooth(f, &mut u, Direction::Backward)?;
    }
    Ok(u)
}

/// Flexible CG on `A u = b` preconditioned by one K-cycle per step, until
/// `||r|| <= rtol ||b||` or `max_outer` steps.
pub fn solve(a: &CsrMatrix, b: &[f64], h: &Hierarchy, opts: &CycleOptions) -> Result<SolveResult> {
    opts.validate()?;
    let n = a.n_rows();
    if h.finest().n() != n {
        return Err(AmgError::Size {
            what: "hierarchy finest level",
            expected: n,
            got: h.finest().n(),
        });
    }
    if b.len() != n {
        return Err(AmgError::Size {
            what: "right-hand side",
            expected: n,
            got: b.len(),
        });
    }
    let start = Instant::now();
    let bnorm = norm2(b);
    let mut history = vec![bnorm];
    let solution = if bnorm == 0.0 {
        vec![0.0; n]
    } else {
        flexible_cg(
            |x| {
                let mut y = vec![0.0; n];
                a.spmv_into(x, &mut y);
                y
            },
            |r| amli_cycle(h, 0, r, opts),
            b,
            opts.max_outer,
            opts.max_directions,
            |_, r| {
                let rn = norm2(r);
                history.push(rn);
                rn <= opts.rtol * bnorm
            },
        )?
    };
    let solve_s = start.elapsed().as_secs_f64();
    let last = *history.last().unwrap();
    Ok(SolveResult {
        solution,
        iterations: history.len() - 1,
        converged: last <= opts.rtol * bnorm,
        residual_history: history,
        timings: Timings {
            setup_s: h.setup_seconds,
            solve_s,
            total_s: h.setup_seconds + solve_s,
        },
    })
}
