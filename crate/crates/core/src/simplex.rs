//! Dense two-phase revised simplex for standard-form problems
//!
//! ```text
//! min cᵀx   s.t.  Ax = b,  x ≥ 0.
//! ```
//!
//! Sized for the atomic-norm oracle: at most a few thousand columns and a
//! few dozen rows, so an explicit basis inverse with periodic
//! refactorization is plenty. Pricing is Dantzig's rule; after a run of
//! degenerate pivots the solver switches to Bland's rule, which guarantees
//! termination, and switches back once progress resumes.

use crate::error::{Error, Result};

/// Column-major dense constraint matrix.
#[derive(Debug, Clone)]
pub struct ColMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimMismatch(format!(
                    "column {j} has length {}, expected {rows}",
                    col.len()
                )));
            }
            m.col_mut(j).copy_from_slice(col);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const RC_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const DEGENERATE_RUN_FOR_BLAND: usize = 12;
const REFACTOR_PERIOD: usize = 200;

struct Simplex<'a> {
    a: &'a ColMatrix,
    m: usize,
    n: usize,
    /// basis[i] < n is a structural column; basis[i] >= n is artificial e_i.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Row-major m×m basis inverse.
    b_inv: Vec<f64>,
    x_b: Vec<f64>,
    b: Vec<f64>,
    pivots_since_refactor: usize,
    iterations: usize,
}

impl<'a> Simplex<'a> {
    fn new(a: &'a ColMatrix, b: Vec<f64>) -> Self {
        let m = a.rows();
        let n = a.cols();
        let mut b_inv = vec![0.0; m * m];
        for i in 0..m {
            b_inv[i * m + i] = 1.0;
        }
        let basis: Vec<usize> = (n..n + m).collect();
        Self {
            a,
            m,
            n,
            basis,
            in_basis: vec![false; n],
            b_inv,
            x_b: b.clone(),
            b,
            pivots_since_refactor: 0,
            iterations: 0,
        }
    }

    #[inline]
    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            out.copy_from_slice(self.a.col(j));
        } else {
            out.fill(0.0);
            out[j - self.n] = 1.0;
        }
    }

    /// y = c_Bᵀ B⁻¹ where cost(j) maps a column to its objective coefficient.
    fn dual(&self, cost: &dyn Fn(usize) -> f64, y: &mut [f64]) {
        y.fill(0.0);
        for (k, &bk) in self.basis.iter().enumerate() {
            let cb = cost(bk);
            if cb != 0.0 {
                let row = &self.b_inv[k * self.m..(k + 1) * self.m];
                for i in 0..self.m {
                    y[i] += cb * row[i];
                }
            }
        }
    }

    fn reduced_cost(&self, j: usize, cost: &dyn Fn(usize) -> f64, y: &[f64]) -> f64 {
        let col = self.a.col(j);
        let mut dot = 0.0;
        for i in 0..self.m {
            dot += y[i] * col[i];
        }
        cost(j) - dot
    }

    fn refactor(&mut self) -> Result<()> {
        // rebuild B⁻¹ from scratch by Gauss-Jordan with partial pivoting
        let m = self.m;
        let mut bmat = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (k, &bk) in self.basis.iter().enumerate() {
            self.column(bk, &mut col);
            for i in 0..m {
                bmat[i * m + k] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut piv = c;
            let mut best = bmat[c * m + c].abs();
            for r in (c + 1)..m {
                let v = bmat[r * m + c].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-12 {
                return Err(Error::LpFailure(
                    "singular basis during refactorization".into(),
                ));
            }
            if piv != c {
                for j in 0..m {
                    bmat.swap(c * m + j, piv * m + j);
                    inv.swap(c * m + j, piv * m + j);
                }
            }
            let d = bmat[c * m + c];
            for j in 0..m {
                bmat[c * m + j] /= d;
                inv[c * m + j] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = bmat[r * m + c];
                    if f != 0.0 {
                        for j in 0..m {
                            bmat[r * m + j] -= f * bmat[c * m + j];
                            inv[r * m + j] -= f * inv[c * m + j];
                        }
                    }
                }
            }
        }
        self.b_inv = inv;
        // recompute basic values
        for i in 0..m {
            let row = &self.b_inv[i * m..(i + 1) * m];
            self.x_b[i] = row.iter().zip(&self.b).map(|(r, b)| r * b).sum();
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    /// Pivot: column `enter` replaces the basic variable in row `leave_row`.
    fn pivot(&mut self, enter: usize, leave_row: usize, d: &[f64]) {
        let m = self.m;
        let piv = d[leave_row];
        let theta = self.x_b[leave_row] / piv;
        for (i, (xb, di)) in self.x_b.iter_mut().zip(d).enumerate() {
            if i != leave_row {
                *xb -= theta * di;
                if xb.abs() < 1e-14 {
                    *xb = 0.0;
                }
            }
        }
        self.x_b[leave_row] = theta;
        // eta update of B⁻¹
        for j in 0..m {
            self.b_inv[leave_row * m + j] /= piv;
        }
        for (i, &f) in d.iter().enumerate() {
            if i != leave_row && f != 0.0 {
                for j in 0..m {
                    self.b_inv[i * m + j] -= f * self.b_inv[leave_row * m + j];
                }
            }
        }
        let old = self.basis[leave_row];
        if old < self.n {
            self.in_basis[old] = false;
        }
        self.basis[leave_row] = enter;
        if enter < self.n {
            self.in_basis[enter] = true;
        }
        self.pivots_since_refactor += 1;
        self.iterations += 1;
    }

    /// Runs simplex iterations for the given cost function. Only structural
    /// columns are priced, so artificials never re-enter the basis.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, max_iters: usize) -> Result<()> {
        let m = self.m;
        let mut y = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut degenerate_run = 0usize;
        let mut bland = false;
        for _ in 0..max_iters {
            if self.pivots_since_refactor >= REFACTOR_PERIOD {
                self.refactor()?;
            }
            self.dual(cost, &mut y);
            // pricing over structural columns only
            let mut enter: Option<usize> = None;
            let mut best_rc = -RC_TOL;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                let rc = self.reduced_cost(j, cost, &y);
                if bland {
                    if rc < -RC_TOL {
                        enter = Some(j);
                        break;
                    }
                } else if rc < best_rc {
                    best_rc = rc;
                    enter = Some(j);
                }
            }
            let enter = match enter {
                Some(j) => j,
                None => return Ok(()), // optimal
            };
            // direction d = B⁻¹ a_enter
            let col = self.a.col(enter);
            for (i, di) in d.iter_mut().enumerate() {
                let row = &self.b_inv[i * m..(i + 1) * m];
                *di = row.iter().zip(col).map(|(r, a)| r * a).sum();
            }
            // ratio test (Bland tie-break: smallest basis index among ties)
            let mut leave: Option<usize> = None;
            let mut min_ratio = f64::INFINITY;
            for (i, &di) in d.iter().enumerate() {
                if di > PIVOT_TOL {
                    let ratio = self.x_b[i] / di;
                    let better = match leave {
                        None => true,
                        Some(cur) => {
                            ratio < min_ratio - 1e-12
                                || (ratio < min_ratio + 1e-12 && self.basis[i] < self.basis[cur])
                        }
                    };
                    if better {
                        min_ratio = ratio.max(0.0);
                        leave = Some(i);
                    }
                }
            }
            let leave_row =
                leave.ok_or_else(|| Error::LpFailure("unbounded linear program".into()))?;
            if min_ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_RUN_FOR_BLAND {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(enter, leave_row, &d);
        }
        Err(Error::LpFailure(format!(
            "simplex iteration cap reached ({max_iters})"
        )))
    }

    /// After phase 1, pivot remaining artificial variables out of the basis
    /// where possible. Leftover artificial rows are redundant constraints;
    /// they stay basic at zero and never re-enter.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        let mut d = vec![0.0; m];
        for row in 0..m {
            if self.basis[row] < self.n {
                continue;
            }
            let mut replaced = false;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                let col = self.a.col(j);
                let mut dr = 0.0;
                let brow = &self.b_inv[row * m..(row + 1) * m];
                for i in 0..m {
                    dr += brow[i] * col[i];
                }
                if dr.abs() > 1e-8 {
                    for (i, di) in d.iter_mut().enumerate() {
                        let r = &self.b_inv[i * m..(i + 1) * m];
                        *di = r.iter().zip(col).map(|(a, b)| a * b).sum();
                    }
                    let dir = d.clone();
                    self.pivot(j, row, &dir);
                    replaced = true;
                    break;
                }
            }
            if !replaced && self.x_b[row].abs() > 1e-7 {
                return Err(Error::LpFailure(
                    "artificial variable stuck at nonzero level".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Solves `min cᵀx s.t. Ax = b, x ≥ 0` with a dense two-phase revised
/// simplex. Returns an error on infeasibility, unboundedness, or numerical
/// breakdown.
pub fn solve(c: &[f64], a: &ColMatrix, b: &[f64]) -> Result<LpSolution> {
    let m = a.rows();
    let n = a.cols();
    if c.len() != n {
        return Err(Error::DimMismatch(format!(
            "cost length {} vs {n} columns",
            c.len()
        )));
    }
    if b.len() != m {
        return Err(Error::DimMismatch(format!(
            "rhs length {} vs {m} rows",
            b.len()
        )));
    }
    if !c.iter().all(|v| v.is_finite()) || !b.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("LP data must be finite".into()));
    }

    // flip rows so b ≥ 0, then the artificial identity basis is feasible
    let mut a_work = a.clone();
    let mut b_work = b.to_vec();
    for (i, bi) in b_work.iter_mut().enumerate() {
        if *bi < 0.0 {
            *bi = -*bi;
            for j in 0..n {
                a_work.col_mut(j)[i] = -a_work.col(j)[i];
            }
        }
    }

    let cap = 50_000 + 200 * (m + n);
    let mut s = Simplex::new(&a_work, b_work);

    // phase 1: minimize the sum of artificials
    let n_struct = n;
    let phase1_cost = move |j: usize| if j < n_struct { 0.0 } else { 1.0 };
    s.optimize(&phase1_cost, cap)?;
    let infeas: f64 = s
        .basis
        .iter()
        .zip(&s.x_b)
        .filter(|(&bk, _)| bk >= n)
        .map(|(_, &v)| v)
        .sum();
    let b_scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if infeas > 1e-7 * b_scale {
        return Err(Error::LpFailure(format!(
            "infeasible (phase-1 objective {infeas:.3e})"
        )));
    }
    s.drive_out_artificials()?;

    // phase 2
    let c_owned = c.to_vec();
    let phase2_cost = move |j: usize| if j < c_owned.len() { c_owned[j] } else { 0.0 };
    s.optimize(&phase2_cost, cap)?;

    let mut x = vec![0.0; n];
    for (k, &bk) in s.basis.iter().enumerate() {
        if bk < n {
            x[bk] = s.x_b[k];
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution {
        x,
        objective,
        iterations: s.iterations,
    })
}
