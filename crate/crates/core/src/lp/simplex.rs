//! Bounded-variable primal revised simplex.
//!
//! Every row `lo <= a·x <= hi` gets a logical column `s = a·x` carrying the
//! row range as its bounds, so the working system is `A x - s = 0` with all
//! columns bounded. Phase one minimizes the sum of bound infeasibilities of
//! the basic columns (composite pricing), phase two the user objective. The
//! basis inverse is kept dense and column-major, updated in product form and
//! refactorized periodically by Gauss-Jordan elimination with partial
//! pivoting. Dependent columns found during refactorization are swapped for
//! logicals.

use super::{Basis, LinearProgram, LpError, LpSolution, LpSolver, LpStatus};

const FEAS_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Default)]
pub struct RevisedSimplex {
    /// Pivot budget; `None` picks a size-dependent default.
    pub max_iterations: Option<usize>,
}

impl LpSolver for RevisedSimplex {
    fn solve_from(&self, lp: &LinearProgram, warm: Option<&Basis>) -> Result<LpSolution, LpError> {
        let mut work = Work::new(lp);
        if let Some(basis) = warm {
            work.load_basis(basis);
        }
        let limit = self.max_iterations.unwrap_or(50 * (work.n + work.m) + 10_000);
        let status = work.run(limit)?;
        let values = work.x[..work.n].to_vec();
        let objective = lp.objective_value(&values);
        Ok(LpSolution { status, values, objective, iterations: work.iterations, basis: Some(work.basis()) })
    }
}

enum Step {
    Flip(f64),
    Pivot { pos: usize, t: f64, target: f64 },
    Unbounded,
}

struct Work {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    basic: Vec<usize>,
    pos: Vec<usize>,
    /// Column-major: entry (basis position p, row r) at `binv[r * m + p]`.
    binv: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl Work {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut counts = vec![0usize; n + 1];
        for row in lp.rows() {
            for &(v, _) in &row.coeffs {
                counts[v + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        for (r, row) in lp.rows().iter().enumerate() {
            for &(v, a) in &row.coeffs {
                col_row[fill[v]] = r;
                col_val[fill[v]] = a;
                fill[v] += 1;
            }
        }

        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        for j in 0..n {
            let (l, h) = lp.var_bounds(j);
            lo.push(l);
            hi.push(h);
        }
        for row in lp.rows() {
            lo.push(row.lo);
            hi.push(row.hi);
        }
        let mut cost = lp.objective().to_vec();
        cost.resize(n + m, 0.0);

        let mut work = Work {
            m,
            n,
            col_start,
            col_row,
            col_val,
            lo,
            hi,
            cost,
            x: vec![0.0; n + m],
            basic: (n..n + m).collect(),
            pos: vec![NONE; n + m],
            binv: vec![0.0; m * m],
            iterations: 0,
            since_refactor: 0,
        };
        for p in 0..m {
            work.pos[n + p] = p;
        }
        for j in 0..n {
            work.x[j] = work.resting_value(j, false);
        }
        work
    }

    fn resting_value(&self, j: usize, prefer_upper: bool) -> f64 {
        let (l, h) = (self.lo[j], self.hi[j]);
        match (l.is_finite(), h.is_finite()) {
            (true, true) => {
                if prefer_upper {
                    h
                } else {
                    l
                }
            }
            (true, false) => l,
            (false, true) => h,
            (false, false) => 0.0,
        }
    }

    fn load_basis(&mut self, basis: &Basis) {
        let total = self.n + self.m;
        if basis.basic.len() != self.m || basis.at_upper.len() != total {
            return;
        }
        let mut seen = vec![false; total];
        for &j in &basis.basic {
            if j >= total || seen[j] {
                return;
            }
            seen[j] = true;
        }
        self.basic = basis.basic.clone();
        self.pos = vec![NONE; total];
        for (p, &j) in self.basic.iter().enumerate() {
            self.pos[j] = p;
        }
        for j in 0..total {
            if self.pos[j] == NONE {
                self.x[j] = self.resting_value(j, basis.at_upper[j]);
            }
        }
    }

    fn basis(&self) -> Basis {
        let at_upper = (0..self.n + self.m)
            .map(|j| {
                self.pos[j] == NONE && self.hi[j].is_finite() && self.lo[j] != self.hi[j] && self.x[j] == self.hi[j]
            })
            .collect();
        Basis { basic: self.basic.clone(), at_upper }
    }

    fn for_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else {
            f(j - self.n, -1.0);
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        for _attempt in 0..4 {
            let mut mat = vec![0.0; m * m];
            for p in 0..m {
                let j = self.basic[p];
                self.for_col(j, |r, v| mat[r * m + p] = v);
            }
            let mut inv = vec![0.0; m * m];
            for r in 0..m {
                inv[r * m + r] = 1.0;
            }
            let mut row_used = vec![false; m];
            let mut piv_row = vec![NONE; m];
            let mut dependent = Vec::new();
            for p in 0..m {
                let mut best = NONE;
                let mut best_abs = SINGULAR_TOL;
                for r in 0..m {
                    if !row_used[r] {
                        let a = mat[r * m + p].abs();
                        if a > best_abs {
                            best_abs = a;
                            best = r;
                        }
                    }
                }
                if best == NONE {
                    dependent.push(p);
                    continue;
                }
                row_used[best] = true;
                piv_row[p] = best;
                let scale = 1.0 / mat[best * m + p];
                for c in p..m {
                    mat[best * m + c] *= scale;
                }
                for c in 0..m {
                    inv[best * m + c] *= scale;
                }
                for i in 0..m {
                    if i == best {
                        continue;
                    }
                    let f = mat[i * m + p];
                    if f == 0.0 {
                        continue;
                    }
                    for c in p..m {
                        let v = mat[best * m + c];
                        if v != 0.0 {
                            mat[i * m + c] -= f * v;
                        }
                    }
                    for c in 0..m {
                        let v = inv[best * m + c];
                        if v != 0.0 {
                            inv[i * m + c] -= f * v;
                        }
                    }
                }
            }
            if dependent.is_empty() {
                for p in 0..m {
                    let r0 = piv_row[p];
                    for c in 0..m {
                        self.binv[c * m + p] = inv[r0 * m + c];
                    }
                }
                self.since_refactor = 0;
                return Ok(());
            }
            let free_rows: Vec<usize> = (0..m).filter(|&r| !row_used[r]).collect();
            for (&p, &r) in dependent.iter().zip(free_rows.iter()) {
                let out = self.basic[p];
                self.pos[out] = NONE;
                let v = self.x[out];
                let to_upper = self.hi[out].is_finite() && (self.hi[out] - v).abs() < (v - self.lo[out]).abs();
                self.x[out] = self.resting_value(out, to_upper);
                let slack = self.n + r;
                if self.pos[slack] != NONE {
                    return Err(LpError::Numerical("basis repair collision".into()));
                }
                self.basic[p] = slack;
                self.pos[slack] = p;
            }
        }
        Err(LpError::Numerical("basis matrix could not be repaired".into()))
    }

    fn compute_basic_values(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.n + m {
            if self.pos[j] == NONE && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_col(j, |r, v| rhs[r] -= v * xj);
            }
        }
        let mut xb = vec![0.0; m];
        for (r, &b) in rhs.iter().enumerate() {
            if b != 0.0 {
                let col = &self.binv[r * m..(r + 1) * m];
                for (p, &e) in col.iter().enumerate() {
                    xb[p] += e * b;
                }
            }
        }
        for p in 0..m {
            self.x[self.basic[p]] = xb[p];
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        self.for_col(j, |r, v| {
            let col = &self.binv[r * m..(r + 1) * m];
            for (p, &e) in col.iter().enumerate() {
                alpha[p] += e * v;
            }
        });
        alpha
    }

    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|r| {
                let col = &self.binv[r * m..(r + 1) * m];
                col.iter().zip(cb).map(|(e, c)| e * c).sum()
            })
            .collect()
    }

    fn infeasibility_costs(&self) -> Option<Vec<f64>> {
        let mut any = false;
        let cb = self
            .basic
            .iter()
            .map(|&j| {
                let v = self.x[j];
                if v < self.lo[j] - FEAS_TOL {
                    any = true;
                    -1.0
                } else if v > self.hi[j] + FEAS_TOL {
                    any = true;
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        any.then_some(cb)
    }

    /// Returns the entering column and its direction (+1 up, -1 down).
    fn price(&self, y: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            if self.pos[j] != NONE || self.lo[j] == self.hi[j] {
                continue;
            }
            let mut d = if phase_one { 0.0 } else { self.cost[j] };
            self.for_col(j, |r, v| d -= y[r] * v);
            let xj = self.x[j];
            let dir = if d < -DUAL_TOL && xj < self.hi[j] {
                1.0
            } else if d > DUAL_TOL && xj > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Bound the basic column at position `p` runs into when moving at
    /// `rate` per unit step, or `None` if it never blocks.
    fn blocking_target(&self, p: usize, rate: f64) -> Option<f64> {
        let b = self.basic[p];
        let (xb, lo, hi) = (self.x[b], self.lo[b], self.hi[b]);
        let target = if rate < 0.0 {
            if xb > hi + FEAS_TOL {
                hi
            } else if xb >= lo - FEAS_TOL {
                lo
            } else {
                return None;
            }
        } else if xb < lo - FEAS_TOL {
            lo
        } else if xb <= hi + FEAS_TOL {
            hi
        } else {
            return None;
        };
        target.is_finite().then_some(target)
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Step {
        let xq = self.x[q];
        let flip = if dir > 0.0 { self.hi[q] - xq } else { xq - self.lo[q] };

        if bland {
            let mut best: Option<(usize, f64, f64)> = None;
            for p in 0..self.m {
                if alpha[p].abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha[p];
                let Some(target) = self.blocking_target(p, rate) else { continue };
                let t = ((target - self.x[self.basic[p]]) / rate).max(0.0);
                let better = match best {
                    None => true,
                    Some((bp, bt, _)) => t < bt - 1e-12 || (t <= bt + 1e-12 && self.basic[p] < self.basic[bp]),
                };
                if better {
                    best = Some((p, t, target));
                }
            }
            return match best {
                Some((_, t, _)) if flip <= t => Step::Flip(flip),
                Some((pos, t, target)) => Step::Pivot { pos, t, target },
                None if flip.is_finite() => Step::Flip(flip),
                None => Step::Unbounded,
            };
        }

        // Harris two-pass: bounds relaxed by the feasibility tolerance to
        // find the step cap, then the largest pivot within it.
        let mut cap = f64::INFINITY;
        for p in 0..self.m {
            if alpha[p].abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * alpha[p];
            let Some(target) = self.blocking_target(p, rate) else { continue };
            let relaxed = ((target - self.x[self.basic[p]]).abs() + FEAS_TOL) / rate.abs();
            cap = cap.min(relaxed);
        }
        if cap == f64::INFINITY && flip == f64::INFINITY {
            return Step::Unbounded;
        }
        if flip <= cap {
            return Step::Flip(flip);
        }
        let mut chosen: Option<(usize, f64, f64)> = None;
        let mut chosen_abs = 0.0;
        for p in 0..self.m {
            if alpha[p].abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * alpha[p];
            let Some(target) = self.blocking_target(p, rate) else { continue };
            let t = (target - self.x[self.basic[p]]) / rate;
            if t <= cap && alpha[p].abs() > chosen_abs {
                chosen_abs = alpha[p].abs();
                chosen = Some((p, t.max(0.0), target));
            }
        }
        match chosen {
            Some((pos, t, target)) => Step::Pivot { pos, t, target },
            None => Step::Unbounded,
        }
    }

    fn pivot(&mut self, pos: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[pos];
        for c in 0..m {
            let col = &mut self.binv[c * m..(c + 1) * m];
            let v = col[pos] / ar;
            if v != 0.0 {
                for (p, e) in col.iter_mut().enumerate() {
                    if p != pos && alpha[p] != 0.0 {
                        *e -= alpha[p] * v;
                    }
                }
            }
            col[pos] = v;
        }
        let out = self.basic[pos];
        self.pos[out] = NONE;
        self.basic[pos] = q;
        self.pos[q] = pos;
        self.since_refactor += 1;
    }

    fn run(&mut self, limit: usize) -> Result<LpStatus, LpError> {
        self.refactor()?;
        self.compute_basic_values();
        let cycle_window = self.n.max(20);
        let mut bland = false;
        let mut stalled = 0usize;
        let mut rechecks = 0usize;

        loop {
            if self.iterations >= limit {
                return Ok(LpStatus::IterationLimit);
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                self.compute_basic_values();
            }
            let phase_costs = self.infeasibility_costs();
            let phase_one = phase_costs.is_some();
            let cb = phase_costs.unwrap_or_else(|| self.basic.iter().map(|&j| self.cost[j]).collect());
            let y = self.btran(&cb);

            let Some((q, dir)) = self.price(&y, phase_one, bland) else {
                // Confirm on a fresh factorization before concluding.
                if self.since_refactor > 0 && rechecks < 8 {
                    rechecks += 1;
                    self.refactor()?;
                    self.compute_basic_values();
                    continue;
                }
                return Ok(if phase_one { LpStatus::Infeasible } else { LpStatus::Optimal });
            };

            let alpha = self.ftran(q);
            let step = self.ratio_test(q, dir, &alpha, bland);
            let t = match step {
                Step::Unbounded => {
                    if phase_one {
                        return Err(LpError::Numerical("unbounded phase-one ray".into()));
                    }
                    return Ok(LpStatus::Unbounded);
                }
                Step::Flip(t) => t,
                Step::Pivot { t, .. } => t,
            };
            if t != 0.0 {
                self.x[q] += dir * t;
                for p in 0..self.m {
                    if alpha[p] != 0.0 {
                        self.x[self.basic[p]] -= dir * t * alpha[p];
                    }
                }
            }
            match step {
                Step::Flip(_) => {
                    // land exactly on the opposite bound
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Step::Pivot { pos, target, .. } => {
                    let leaving = self.basic[pos];
                    self.pivot(pos, q, &alpha);
                    self.x[leaving] = target;
                }
                Step::Unbounded => unreachable!(),
            }
            self.iterations += 1;

            if t <= 1e-12 {
                stalled += 1;
                if stalled > cycle_window {
                    bland = true;
                }
            } else {
                stalled = 0;
                bland = false;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    const INF: f64 = f64::INFINITY;

    #[test]
    fn warm_start_after_bound_change_matches_cold() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, 0 <= x,y
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, INF, -1.0).unwrap();
        let y = lp.add_var(0.0, INF, -1.0).unwrap();
        lp.add_row(&[(x, 1.0), (y, 2.0)], -INF, 4.0).unwrap();
        lp.add_row(&[(x, 3.0), (y, 1.0)], -INF, 6.0).unwrap();
        let solver = RevisedSimplex::default();
        let first = solver.solve(&lp).unwrap();
        assert!((first.objective + 2.8).abs() < 1e-9);

        lp.set_var_bounds(x, 0.0, 1.0).unwrap();
        let warm = solver.solve_from(&lp, first.basis.as_ref()).unwrap();
        let cold = solver.solve(&lp).unwrap();
        assert_eq!(warm.status, LpStatus::Optimal);
        assert!((warm.objective - cold.objective).abs() < 1e-9);
        assert!((warm.objective + 2.5).abs() < 1e-9);
    }

    #[test]
    fn mismatched_warm_basis_is_ignored() {
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 2.0, 1.0).unwrap();
        let bogus = Basis { basic: vec![0, 0, 0], at_upper: vec![] };
        let sol = RevisedSimplex::default().solve_from(&lp, Some(&bogus)).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic degenerate vertex: many constraints through the origin.
        let mut lp = LinearProgram::new();
        let v: Vec<_> = (0..4).map(|_| lp.add_var(0.0, INF, 0.0).unwrap()).collect();
        lp.set_objective(v[0], -0.75).unwrap();
        lp.set_objective(v[1], 150.0).unwrap();
        lp.set_objective(v[2], -0.02).unwrap();
        lp.set_objective(v[3], 6.0).unwrap();
        lp.add_row(&[(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], -INF, 0.0).unwrap();
        lp.add_row(&[(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], -INF, 0.0).unwrap();
        lp.add_row(&[(v[2], 1.0)], -INF, 1.0).unwrap();
        let sol = RevisedSimplex::default().solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, INF, -1.0).unwrap();
        let y = lp.add_var(0.0, INF, -1.0).unwrap();
        lp.add_row(&[(x, 1.0), (y, 1.0)], -INF, 4.0).unwrap();
        lp.add_row(&[(x, 1.0), (y, -1.0)], -INF, 1.0).unwrap();
        let solver = RevisedSimplex { max_iterations: Some(0) };
        assert_eq!(solver.solve(&lp).unwrap().status, LpStatus::IterationLimit);
    }
}
