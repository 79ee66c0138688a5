//! Classicality as a linear program.
//!
//! A state `rho` is classical iff it is a convex combination of coherent-state
//! projectors. With a finite dictionary `{|a_i>}` the largest `k` for which
//! `rho_k = (1-k) rho_0 + k rho` stays classical solves
//!
//! `max k  s.t.  sum_i w_i |a_i><a_i| + k (rho_0 - rho) = rho_0,  w >= 0`,
//!
//! one real equality row per Hermitian degree of freedom. The optional
//! refinement loop prices new coherent-state columns against the dual matrix
//! and adds the best ones (column generation), reaching large-dictionary
//! accuracy without a large dictionary.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::ensemble::RandomStream;
use crate::error::{Error, Result};
use crate::ipm::{InteriorPoint, LpProblem, LpSolution, LpSolver};
use crate::spin::{coherent_state, maximally_mixed, projector, DensityMatrix, Direction, SpinJ};
use rand::Rng;

/// Angular tolerance below which two dictionary directions count as one.
const DEDUP_TOL: f64 = 1e-9;
/// `k` at least this close to 1 is reported as capped.
const CAP_TOL: f64 = 1e-6;
/// Reduced-cost threshold for adding a refinement column.
const PRICE_TOL: f64 = 1e-9;

/// Ordered list of candidate coherent-state directions with cached projectors.
#[derive(Clone, Debug)]
pub struct Dictionary {
    j: SpinJ,
    directions: Vec<Direction>,
    projectors: Vec<DMatrix<Complex64>>,
}

impl Dictionary {
    /// Builds from explicit directions, deduplicating within `1e-9` radians.
    pub fn from_directions(j: SpinJ, directions: Vec<Direction>) -> Result<Self> {
        let need = j.dim() * j.dim();
        if directions.len() < need {
            return Err(Error::DictionaryTooSmall {
                got: directions.len(),
                need,
            });
        }
        let mut dict = Dictionary {
            j,
            directions: Vec::with_capacity(directions.len()),
            projectors: Vec::with_capacity(directions.len()),
        };
        // sort-by-theta pass keeps dedup near-linear
        let mut sorted = directions;
        sorted.sort_by(|a, b| a.theta().partial_cmp(&b.theta()).unwrap());
        let mut kept: Vec<Direction> = Vec::with_capacity(sorted.len());
        for dir in sorted {
            let dup = kept
                .iter()
                .rev()
                .take_while(|k| (k.theta() - dir.theta()).abs() <= DEDUP_TOL)
                .any(|k| k.angle_to(dir) <= DEDUP_TOL);
            if !dup {
                kept.push(dir);
            }
        }
        for dir in kept {
            dict.push_unchecked(dir);
        }
        if dict.len() < need {
            return Err(Error::DictionaryTooSmall {
                got: dict.len(),
                need,
            });
        }
        Ok(dict)
    }

    fn push_unchecked(&mut self, dir: Direction) {
        let p = projector(&coherent_state(self.j, dir)).expect("coherent states are normalized");
        self.directions.push(dir);
        self.projectors.push(p.entries().clone());
    }

    /// Appends a direction unless it duplicates an existing one; returns
    /// whether it was added.
    pub fn add_direction(&mut self, dir: Direction) -> bool {
        if self.directions.iter().any(|d| d.angle_to(dir) <= DEDUP_TOL) {
            return false;
        }
        self.push_unchecked(dir);
        true
    }

    pub fn j(&self) -> SpinJ {
        self.j
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn projector(&self, i: usize) -> &DMatrix<Complex64> {
        &self.projectors[i]
    }
}

/// `M` directions drawn area-uniformly: `cos theta` uniform on `[-1,1]`,
/// `phi` uniform on `[0, 2pi)`.
pub fn generate_dictionary(j: SpinJ, m: usize, stream: &RandomStream) -> Result<Dictionary> {
    let need = j.dim() * j.dim();
    if m < need {
        return Err(Error::DictionaryTooSmall { got: m, need });
    }
    let mut rng = stream.rng();
    let mut directions = Vec::with_capacity(m);
    for _ in 0..m {
        let cos_theta: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        directions.push(Direction::new(cos_theta.acos(), phi));
    }
    Dictionary::from_directions(j, directions)
}

/// Real standard form of the classicality LP: one equality row per Hermitian
/// degree of freedom (diagonal, then re/im of the strict upper triangle),
/// plus a cap row `k + s = 1`. Columns are the dictionary weights, then `k`,
/// then the cap slack.
#[derive(Clone, Debug)]
pub struct LpStandardForm {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

/// Row-major packing of a Hermitian matrix into its real degrees of freedom.
fn vectorize_hermitian(m: &DMatrix<Complex64>, out: &mut [f64]) {
    let d = m.nrows();
    let mut row = 0;
    for i in 0..d {
        out[row] = m[(i, i)].re;
        row += 1;
    }
    for i in 0..d {
        for ip in (i + 1)..d {
            out[row] = m[(i, ip)].re;
            out[row + 1] = m[(i, ip)].im;
            row += 2;
        }
    }
}

/// Reassembles the Hermitian dual matrix from equality-row duals, such that
/// `y' a_col = <a| Lambda |a>` for any projector column.
fn dual_matrix(j: SpinJ, y: &DVector<f64>) -> DMatrix<Complex64> {
    let d = j.dim();
    let mut lambda = DMatrix::zeros(d, d);
    let mut row = 0;
    for i in 0..d {
        lambda[(i, i)] = Complex64::new(y[row], 0.0);
        row += 1;
    }
    for i in 0..d {
        for ip in (i + 1)..d {
            let v = Complex64::new(y[row], y[row + 1]) * 0.5;
            lambda[(i, ip)] = v;
            lambda[(ip, i)] = v.conj();
            row += 2;
        }
    }
    lambda
}

/// Assembles `sum_i w_i |a_i><a_i| + k (rho_0 - rho) = rho_0` in real standard
/// form with the cap row appended.
pub fn build_lp(rho: &DensityMatrix, dict: &Dictionary) -> LpStandardForm {
    let j = dict.j();
    let d = j.dim();
    let n_rows = d * d + 1;
    let n_cols = dict.len() + 2;
    let mut a = DMatrix::zeros(n_rows, n_cols);
    let mut col = vec![0.0; d * d];
    for (i, p) in dict.projectors.iter().enumerate() {
        vectorize_hermitian(p, &mut col);
        for (r, v) in col.iter().enumerate() {
            a[(r, i)] = *v;
        }
    }
    let rho0 = maximally_mixed(j);
    let k_col = rho0.entries() - rho.entries();
    vectorize_hermitian(&k_col, &mut col);
    let k_idx = dict.len();
    for (r, v) in col.iter().enumerate() {
        a[(r, k_idx)] = *v;
    }
    // cap row: k + s = 1
    a[(n_rows - 1, k_idx)] = 1.0;
    a[(n_rows - 1, k_idx + 1)] = 1.0;

    let mut b = DVector::zeros(n_rows);
    vectorize_hermitian(rho0.entries(), b.as_mut_slice());
    b[n_rows - 1] = 1.0;
    let mut c = DVector::zeros(n_cols);
    c[k_idx] = 1.0;
    LpStandardForm { a, b, c }
}

impl LpStandardForm {
    /// MPS-compatible text dump for external solvers.
    pub fn to_mps(&self, name: &str) -> String {
        let mut out = String::new();
        writeln!(out, "NAME          {name}").unwrap();
        writeln!(out, "ROWS").unwrap();
        writeln!(out, " N  OBJ").unwrap();
        for r in 0..self.a.nrows() {
            writeln!(out, " E  R{r}").unwrap();
        }
        writeln!(out, "COLUMNS").unwrap();
        for cidx in 0..self.a.ncols() {
            if self.c[cidx] != 0.0 {
                writeln!(out, "    X{cidx}  OBJ  {}", self.c[cidx]).unwrap();
            }
            for r in 0..self.a.nrows() {
                let v = self.a[(r, cidx)];
                if v != 0.0 {
                    writeln!(out, "    X{cidx}  R{r}  {v}").unwrap();
                }
            }
        }
        writeln!(out, "RHS").unwrap();
        for r in 0..self.a.nrows() {
            if self.b[r] != 0.0 {
                writeln!(out, "    RHS  R{r}  {}", self.b[r]).unwrap();
            }
        }
        writeln!(out, "BOUNDS").unwrap();
        writeln!(out, "ENDATA").unwrap();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    /// `k_max < 1` with a vanishing duality gap.
    Optimal,
    /// Even `k = 0` is infeasible: the dictionary cannot represent `rho_0`.
    InfeasibleAtZero,
    /// `k` hit the cap: `rho` itself is certified classical.
    CappedAtOne,
}

#[derive(Clone, Debug)]
pub struct KmaxResult {
    pub k_max: f64,
    /// Weight per dictionary index, aligned with the dictionary used to solve.
    pub weights: Vec<f64>,
    pub duality_gap: f64,
    pub status: LpStatus,
    /// Frobenius residual of the mixture equality at the optimum.
    pub residual: f64,
}

fn mixture_residual(
    rho: &DensityMatrix,
    dict: &Dictionary,
    weights: &[f64],
    k: f64,
) -> f64 {
    let j = dict.j();
    let rho0 = maximally_mixed(j);
    let mut acc: DMatrix<Complex64> = DMatrix::zeros(j.dim(), j.dim());
    for (w, p) in weights.iter().zip(&dict.projectors) {
        if *w != 0.0 {
            acc += p.map(|v| v * *w);
        }
    }
    acc += (rho0.entries() - rho.entries()).map(|v| v * k);
    acc -= rho0.entries();
    acc.norm()
}

fn finish(
    rho: &DensityMatrix,
    dict: &Dictionary,
    sol: &LpSolution,
) -> KmaxResult {
    let m = dict.len();
    let k = sol.x[m].clamp(0.0, 1.0);
    let weights: Vec<f64> = sol.x.as_slice()[..m].to_vec();
    let residual = mixture_residual(rho, dict, &weights, k);
    let status = if k >= 1.0 - CAP_TOL {
        LpStatus::CappedAtOne
    } else {
        LpStatus::Optimal
    };
    KmaxResult {
        k_max: k,
        weights,
        duality_gap: sol.duality_gap,
        status,
        residual,
    }
}

/// Checks whether `rho_0` itself lies in the cone of the dictionary columns,
/// via a phase-1 program with signed artificials.
fn rho0_representable(dict: &Dictionary, solver: &InteriorPoint) -> Result<bool> {
    let j = dict.j();
    let d = j.dim();
    let n_rows = d * d;
    let m = dict.len();
    let mut a = DMatrix::zeros(n_rows, m + 2 * n_rows);
    let mut col = vec![0.0; n_rows];
    for (i, p) in dict.projectors.iter().enumerate() {
        vectorize_hermitian(p, &mut col);
        for (r, v) in col.iter().enumerate() {
            a[(r, i)] = *v;
        }
    }
    for r in 0..n_rows {
        a[(r, m + r)] = 1.0;
        a[(r, m + n_rows + r)] = -1.0;
    }
    let rho0 = maximally_mixed(j);
    let mut b = DVector::zeros(n_rows);
    vectorize_hermitian(rho0.entries(), b.as_mut_slice());
    let mut c = DVector::zeros(m + 2 * n_rows);
    for i in 0..2 * n_rows {
        c[m + i] = -1.0;
    }
    let sol = solver.solve(&LpProblem { a, b, c })?;
    Ok(sol.converged && sol.primal_objective.abs() < 1e-6)
}

/// Largest `k` with `rho_k` expressible over the dictionary. The result is a
/// lower bound on the exact `k_max` for this `rho` (finite dictionary).
pub fn solve_kmax(rho: &DensityMatrix, dict: &Dictionary) -> Result<KmaxResult> {
    solve_kmax_with(rho, dict, &InteriorPoint::default())
}

pub fn solve_kmax_with(
    rho: &DensityMatrix,
    dict: &Dictionary,
    solver: &InteriorPoint,
) -> Result<KmaxResult> {
    let lp = build_lp(rho, dict);
    let sol = solver.solve(&LpProblem {
        a: lp.a,
        b: lp.b,
        c: lp.c,
    })?;
    if !sol.converged {
        if !rho0_representable(dict, solver)? {
            return Ok(KmaxResult {
                k_max: 0.0,
                weights: vec![0.0; dict.len()],
                duality_gap: f64::INFINITY,
                status: LpStatus::InfeasibleAtZero,
                residual: f64::INFINITY,
            });
        }
        return Err(Error::SolverStalled(sol.iterations));
    }
    Ok(finish(rho, dict, &sol))
}

/// Strictly positive weights with their directions, pruned at `1e-10`.
pub fn extract_decomposition(result: &KmaxResult, dict: &Dictionary) -> Vec<(f64, Direction)> {
    result
        .weights
        .iter()
        .zip(dict.directions())
        .filter(|(w, _)| **w > 1e-10)
        .map(|(w, d)| (*w, *d))
        .collect()
}

/// Minimizes `<a|Lambda|a>` over the sphere: coarse grid, then pattern
/// descent from the best local minima. Returns candidate directions sorted by
/// value, most negative first.
fn price_columns(j: SpinJ, lambda: &DMatrix<Complex64>, max_candidates: usize) -> Vec<(Direction, f64)> {
    let k = j.max_rank().max(1) as usize;
    let n_theta = (((40 * k * k) as f64 / 2.0).sqrt().ceil() as usize).max(10);
    let n_phi = 2 * n_theta;
    let eval = |theta: f64, phi: f64| -> f64 {
        let alpha = coherent_state(j, Direction::new(theta, phi));
        let v = alpha.amplitudes();
        (v.adjoint() * lambda * v)[(0, 0)].re
    };
    let mut grid = vec![vec![0.0; n_phi]; n_theta];
    for (it, row) in grid.iter_mut().enumerate() {
        let theta = PI * (it as f64 + 0.5) / n_theta as f64;
        for (ip, cell) in row.iter_mut().enumerate() {
            *cell = eval(theta, 2.0 * PI * ip as f64 / n_phi as f64);
        }
    }
    // local minima on the grid (torus in phi, clamped in theta)
    let mut minima: Vec<(usize, usize, f64)> = Vec::new();
    for it in 0..n_theta {
        for ip in 0..n_phi {
            let v = grid[it][ip];
            let mut is_min = true;
            if it > 0 && grid[it - 1][ip] < v {
                is_min = false;
            }
            if it + 1 < n_theta && grid[it + 1][ip] < v {
                is_min = false;
            }
            if grid[it][(ip + n_phi - 1) % n_phi] < v || grid[it][(ip + 1) % n_phi] < v {
                is_min = false;
            }
            if is_min {
                minima.push((it, ip, v));
            }
        }
    }
    minima.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    minima.truncate(max_candidates);

    let mut out = Vec::with_capacity(minima.len());
    for (it, ip, _) in minima {
        let mut theta = PI * (it as f64 + 0.5) / n_theta as f64;
        let mut phi = 2.0 * PI * ip as f64 / n_phi as f64;
        let mut val = grid[it][ip];
        let mut step = PI / n_theta as f64;
        // budget covers halving the step to ~1e-13 rad even when most
        // iterations are spent moving; near-pure states need the direction
        // localized far below the grid resolution before their LP caps
        for _ in 0..160 {
            if step < 1e-13 {
                break;
            }
            let mut improved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = eval(theta + dt, phi + dp);
                if v < val {
                    theta += dt;
                    phi += dp;
                    val = v;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        out.push((Direction::new(theta, phi), val));
    }
    out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    out
}

/// Column generation on top of [`solve_kmax`]: the dictionary is first
/// seeded with the extremal directions of the state's own coherent-state
/// overlap, then after each solve, coherent states with positive reduced
/// cost (priced by the dual matrix) join the dictionary and the LP is
/// re-solved. `k_max` is non-decreasing across rounds; `rounds = 0` is a
/// single solve over the seeded dictionary.
pub fn refine_columns(
    rho: &DensityMatrix,
    dict: &Dictionary,
    rounds: usize,
) -> Result<KmaxResult> {
    refine_columns_with(rho, dict, rounds, &InteriorPoint::default()).map(|(r, _)| r)
}

/// As [`refine_columns`], returning the enlarged dictionary so the weights in
/// the result can be traced back to directions.
pub fn refine_columns_with(
    rho: &DensityMatrix,
    dict: &Dictionary,
    rounds: usize,
    solver: &InteriorPoint,
) -> Result<(KmaxResult, Dictionary)> {
    let mut work = dict.clone();
    // seed state-specific columns: the extremal directions of <n|rho|n>.
    // Near-pure states cap only if a dictionary direction matches their
    // dominant eigen-direction to high accuracy, and pricing alone closes
    // that gap too slowly (one column and ~e-fold progress per round).
    for scale in [Complex64::from(1.0), Complex64::from(-1.0)] {
        let signed = rho.entries().map(|e| e * scale);
        for (dir, _) in price_columns(work.j(), &signed, 4) {
            work.add_direction(dir);
        }
    }
    let mut lp = build_lp(rho, &work);
    let mut best: Option<KmaxResult> = None;
    for round in 0..=rounds {
        let sol = solver.solve(&LpProblem {
            a: lp.a.clone(),
            b: lp.b.clone(),
            c: lp.c.clone(),
        })?;
        if !sol.converged {
            if best.is_some() {
                break; // keep the last converged round
            }
            if !rho0_representable(&work, solver)? {
                return Ok((
                    KmaxResult {
                        k_max: 0.0,
                        weights: vec![0.0; work.len()],
                        duality_gap: f64::INFINITY,
                        status: LpStatus::InfeasibleAtZero,
                        residual: f64::INFINITY,
                    },
                    work,
                ));
            }
            return Err(Error::SolverStalled(sol.iterations));
        }
        let result = finish(rho, &work, &sol);
        let done = round == rounds || result.status == LpStatus::CappedAtOne;
        best = Some(result);
        if done {
            break;
        }
        // price new columns: reduced cost of a projector column is -<a|L|a>
        let lambda = dual_matrix(work.j(), &sol.y);
        let candidates = price_columns(work.j(), &lambda, 16);
        let mut added = 0;
        for (dir, value) in candidates {
            if -value > PRICE_TOL && work.add_direction(dir) {
                added += 1;
            }
        }
        if added == 0 {
            break; // no improving column: optimal over all coherent states
        }
        lp = build_lp(rho, &work);
    }
    Ok((best.expect("at least one round ran"), work))
}
