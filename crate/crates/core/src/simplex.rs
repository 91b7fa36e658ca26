//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Sized for the Dantzig-selector instances this crate produces (a few
//! hundred variables at most), where a robust dense tableau beats fancier
//! machinery. Optimality is certified by nonnegative reduced costs at the
//! configured tolerance; hitting the pivot limit is reported as a status,
//! never as a silent wrong answer.

use thiserror::Error;

use crate::float::Float;
use crate::linalg::{dot, DenseMatrix, LinalgError};

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("objective length {objective} does not match constraint columns {cols}")]
    ObjectiveShape { objective: usize, cols: usize },
    #[error("rhs length {rhs} does not match constraint rows {rows}")]
    RhsShape { rhs: usize, rows: usize },
    #[error("sense count {senses} does not match constraint rows {rows}")]
    SenseShape { senses: usize, rows: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Row sense of a linear constraint; variables are all nonnegative after
/// standardization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintSense {
    LessEq,
    Eq,
}

/// Minimize `objective · x` subject to `constraints · x {<=, =} rhs`, `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    objective: Vec<T>,
    constraints: DenseMatrix<T>,
    rhs: Vec<T>,
    senses: Vec<ConstraintSense>,
}

impl<T: Float> LinearProgram<T> {
    pub fn new(
        objective: Vec<T>,
        constraints: DenseMatrix<T>,
        rhs: Vec<T>,
        senses: Vec<ConstraintSense>,
    ) -> Result<Self, SimplexError> {
        if objective.len() != constraints.cols() {
            return Err(SimplexError::ObjectiveShape {
                objective: objective.len(),
                cols: constraints.cols(),
            });
        }
        if rhs.len() != constraints.rows() {
            return Err(SimplexError::RhsShape {
                rhs: rhs.len(),
                rows: constraints.rows(),
            });
        }
        if senses.len() != constraints.rows() {
            return Err(SimplexError::SenseShape {
                senses: senses.len(),
                rows: constraints.rows(),
            });
        }
        Ok(Self {
            objective,
            constraints,
            rhs,
            senses,
        })
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.rows()
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn constraints(&self) -> &DenseMatrix<T> {
        &self.constraints
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn senses(&self) -> &[ConstraintSense] {
        &self.senses
    }
}

/// Pivot budget and numerical tolerance for the solver.
#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions<T> {
    pub max_pivots: usize,
    pub tolerance: T,
}

impl<T: Float> Default for SimplexOptions<T> {
    fn default() -> Self {
        Self {
            max_pivots: 50_000,
            tolerance: T::cast(1e-9),
        }
    }
}

/// Solver verdict. `Optimal` carries a basic feasible solution certified by
/// nonnegative reduced costs.
#[derive(Clone, Debug, PartialEq)]
pub enum SimplexOutcome<T> {
    Optimal {
        solution: Vec<T>,
        objective: T,
        pivots: usize,
    },
    Infeasible,
    Unbounded,
    PivotLimit {
        pivots: usize,
    },
}

struct Tableau<T> {
    // Each row holds the constraint coefficients followed by the rhs.
    rows: Vec<Vec<T>>,
    // Reduced-cost row; last entry is the negated objective value.
    zrow: Vec<T>,
    basic: Vec<usize>,
    width: usize,
    tolerance: T,
    pivots: usize,
    max_pivots: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    PivotLimit,
}

impl<T: Float> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let pivot_value = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= pivot_value;
        }
        self.rows[r][c] = T::one();
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor.is_zero() {
                continue;
            }
            for (a, &b) in row.iter_mut().zip(&pivot_row) {
                *a -= factor * b;
            }
            row[c] = T::zero();
            // Keep the rhs nonnegative against rounding drift.
            let last = row.len() - 1;
            if row[last] < T::zero() && row[last] > -self.tolerance {
                row[last] = T::zero();
            }
        }
        let factor = self.zrow[c];
        if !factor.is_zero() {
            for (a, &b) in self.zrow.iter_mut().zip(&pivot_row) {
                *a -= factor * b;
            }
            self.zrow[c] = T::zero();
        }
        self.basic[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule: enter the lowest-index improving column, leave by the
    /// minimum ratio with ties broken toward the lowest basic variable.
    fn run_phase(&mut self, enterable: usize) -> PhaseEnd {
        loop {
            let entering = (0..enterable).find(|&j| self.zrow[j] < -self.tolerance);
            let Some(c) = entering else {
                return PhaseEnd::Optimal;
            };
            let mut leaving: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a <= self.tolerance {
                    continue;
                }
                let ratio = row[self.width] / a;
                let replace = match &leaving {
                    None => true,
                    Some((best_i, best_ratio)) => {
                        ratio < *best_ratio
                            || (ratio == *best_ratio && self.basic[i] < self.basic[*best_i])
                    }
                };
                if replace {
                    leaving = Some((i, ratio));
                }
            }
            let Some((r, _)) = leaving else {
                return PhaseEnd::Unbounded;
            };
            if self.pivots >= self.max_pivots {
                return PhaseEnd::PivotLimit;
            }
            self.pivot(r, c);
        }
    }
}

/// Solves the linear program with the two-phase method.
pub fn solve_simplex<T: Float>(
    lp: &LinearProgram<T>,
    options: &SimplexOptions<T>,
) -> SimplexOutcome<T> {
    let n = lp.num_variables();
    let m = lp.num_constraints();
    let num_slack = lp
        .senses
        .iter()
        .filter(|s| **s == ConstraintSense::LessEq)
        .count();
    let structural = n + num_slack;

    // Assemble equality rows [A | slack | rhs], then flip rows with a
    // negative rhs so the ratio test starts from a nonnegative basis.
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut slack_of: Vec<Option<usize>> = vec![None; m];
    let mut next_slack = n;
    for i in 0..m {
        let mut row = vec![T::zero(); structural + 1];
        row[..n].copy_from_slice(lp.constraints.row(i));
        if lp.senses[i] == ConstraintSense::LessEq {
            row[next_slack] = T::one();
            slack_of[i] = Some(next_slack);
            next_slack += 1;
        }
        row[structural] = lp.rhs[i];
        if row[structural] < T::zero() {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        rows.push(row);
    }

    // A slack that survived un-negated serves as the initial basic variable;
    // every other row gets an artificial.
    let mut basic = vec![usize::MAX; m];
    let mut artificial_rows = Vec::new();
    for i in 0..m {
        match slack_of[i] {
            Some(s) if rows[i][s] > T::zero() => basic[i] = s,
            _ => artificial_rows.push(i),
        }
    }
    let num_artificial = artificial_rows.len();
    let width = structural + num_artificial;
    for row in rows.iter_mut() {
        let rhs = row.pop().expect("row has rhs");
        row.resize(width, T::zero());
        row.push(rhs);
    }
    for (k, &i) in artificial_rows.iter().enumerate() {
        let col = structural + k;
        rows[i][col] = T::one();
        basic[i] = col;
    }

    let mut tableau = Tableau {
        rows,
        zrow: vec![T::zero(); width + 1],
        basic,
        width,
        tolerance: options.tolerance,
        pivots: 0,
        max_pivots: options.max_pivots,
    };

    if num_artificial > 0 {
        // Phase 1: minimize the artificial sum.
        for j in structural..width {
            tableau.zrow[j] = T::one();
        }
        for &i in &artificial_rows {
            let row = tableau.rows[i].clone();
            for (z, &v) in tableau.zrow.iter_mut().zip(&row) {
                *z -= v;
            }
        }
        match tableau.run_phase(width) {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => return SimplexOutcome::Infeasible,
            PhaseEnd::PivotLimit => {
                return SimplexOutcome::PivotLimit {
                    pivots: tableau.pivots,
                }
            }
        }
        let phase1_objective = -tableau.zrow[width];
        if phase1_objective > options.tolerance {
            return SimplexOutcome::Infeasible;
        }
        // Drive leftover artificials out of the basis; rows that cannot be
        // pivoted are redundant and dropped.
        let mut drop_rows = Vec::new();
        for i in 0..m {
            if tableau.basic[i] < structural {
                continue;
            }
            let entering = (0..structural)
                .find(|&j| tableau.rows[i][j].abs() > options.tolerance);
            match entering {
                Some(j) => tableau.pivot(i, j),
                None => drop_rows.push(i),
            }
        }
        for &i in drop_rows.iter().rev() {
            tableau.rows.remove(i);
            tableau.basic.remove(i);
        }
        // Artificial columns are spent; trim them away.
        for row in tableau.rows.iter_mut() {
            let rhs = row[width];
            row.truncate(structural);
            row.push(rhs);
        }
        tableau.width = structural;
    }

    // Phase 2 with the real objective.
    let mut cost = vec![T::zero(); structural + 1];
    cost[..n].copy_from_slice(&lp.objective);
    tableau.zrow = cost;
    let basics: Vec<(usize, usize)> = tableau
        .basic
        .iter()
        .enumerate()
        .map(|(i, &j)| (i, j))
        .collect();
    for (i, j) in basics {
        let cb = if j < n { lp.objective[j] } else { T::zero() };
        if cb.is_zero() {
            continue;
        }
        let row = tableau.rows[i].clone();
        for (z, &v) in tableau.zrow.iter_mut().zip(&row) {
            *z -= cb * v;
        }
    }
    match tableau.run_phase(structural) {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => return SimplexOutcome::Unbounded,
        PhaseEnd::PivotLimit => {
            return SimplexOutcome::PivotLimit {
                pivots: tableau.pivots,
            }
        }
    }

    let mut solution = vec![T::zero(); n];
    for (i, &j) in tableau.basic.iter().enumerate() {
        if j < n {
            solution[j] = tableau.rows[i][tableau.width];
        }
    }
    let objective = dot(&lp.objective, &solution);
    SimplexOutcome::Optimal {
        solution,
        objective,
        pivots: tableau.pivots,
    }
}
