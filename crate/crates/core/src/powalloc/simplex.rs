//! Dense two-phase simplex for small linear programs
//! `min cᵀx  s.t.  a_i·x {≤,≥,=} b_i,  x ≥ 0`, with Bland's rule.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    /// Rows whose artificial variables could not be driven to zero.
    Infeasible { rows: Vec<usize> },
    Unbounded,
}

const EPS: f64 = 1e-11;

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · x` over the columns marked `allowed`. Returns false
    /// when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        loop {
            // reduced costs d_j = c_j − c_B · column_j
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let d = cost[j] - self.t.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum::<f64>();
                if d < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return true;
            };
            let rhs = self.cols;
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[c] > EPS {
                    let ratio = row[rhs] / row[c];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS || (ratio <= lr + EPS && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, c);
        }
    }
}

/// Solves the program; rows are used as given (callers should scale them).
pub fn minimize(cost: &[f64], rows: &[Row]) -> LpOutcome {
    let n = cost.len();
    let m = rows.len();
    // columns: structural, one slack/surplus per inequality, one artificial per row
    let ineq: Vec<usize> = (0..m).filter(|&i| rows[i].relation != Relation::Eq).collect();
    let slack_col = |i: usize| n + ineq.iter().position(|&k| k == i).expect("inequality row");
    let art0 = n + ineq.len();
    let cols = art0 + m;

    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    for (i, row) in rows.iter().enumerate() {
        let flip = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        for (j, a) in row.coeffs.iter().enumerate() {
            t[i][j] = flip * a;
        }
        match row.relation {
            Relation::Le => t[i][slack_col(i)] = flip,
            Relation::Ge => t[i][slack_col(i)] = -flip,
            Relation::Eq => {}
        }
        t[i][cols] = flip * row.rhs;
        t[i][art0 + i] = 1.0;
        basis[i] = art0 + i;
    }
    let mut tab = Tableau { t, basis, cols };

    // a non-negative slack can start basic instead of the artificial
    for (i, row) in rows.iter().enumerate() {
        if row.relation != Relation::Eq {
            let s = slack_col(i);
            if tab.t[i][s] == 1.0 {
                tab.basis[i] = s;
                tab.t[i][art0 + i] = 0.0;
            }
        }
    }

    let needs_art: Vec<bool> = (0..m).map(|i| tab.basis[i] >= art0).collect();
    let mut phase1 = vec![0.0; cols];
    for c in phase1.iter_mut().skip(art0) {
        *c = 1.0;
    }
    let all = vec![true; cols];
    tab.optimize(&phase1, &all);

    // residuals are judged against the rows that needed an artificial
    let scale: f64 = (0..m)
        .filter(|&i| needs_art[i])
        .map(|i| rows[i].rhs.abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let mut stuck = Vec::new();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b >= art0 && tab.t[i][cols] > 1e-9 * scale {
            stuck.push(b - art0);
        }
    }
    if !stuck.is_empty() {
        stuck.sort_unstable();
        return LpOutcome::Infeasible { rows: stuck };
    }

    // drive zero-level artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= art0 {
            match (0..art0).find(|&j| tab.t[i][j].abs() > EPS) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(cost);
    let allowed: Vec<bool> = (0..cols).map(|j| j < art0).collect();
    if !tab.optimize(&phase2, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[i][cols].max(0.0);
        }
    }
    let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, objective }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[f64], relation: Relation, rhs: f64) -> Row {
        Row { coeffs: coeffs.to_vec(), relation, rhs }
    }

    #[test]
    fn textbook_minimum() {
        // min x + y  s.t. x + 2y ≥ 4, 3x + y ≥ 6 → (1.6, 1.2)
        let out = minimize(&[1.0, 1.0], &[row(&[1.0, 2.0], Relation::Ge, 4.0), row(&[3.0, 1.0], Relation::Ge, 6.0)]);
        let LpOutcome::Optimal { x, objective } = out else { panic!("{out:?}") };
        assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
        assert!((objective - 2.8).abs() < 1e-12);
    }

    #[test]
    fn infeasible_rows_reported() {
        let out = minimize(&[1.0], &[row(&[1.0], Relation::Ge, 2.0), row(&[1.0], Relation::Le, 1.0)]);
        assert!(matches!(out, LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn empty_program() {
        let out = minimize(&[], &[]);
        assert_eq!(out, LpOutcome::Optimal { x: vec![], objective: 0.0 });
    }

    #[test]
    fn unbounded_detected() {
        let out = minimize(&[-1.0], &[row(&[1.0], Relation::Ge, 1.0)]);
        assert_eq!(out, LpOutcome::Unbounded);
    }

    #[test]
    fn equality_and_negative_rhs() {
        // min 2x + y s.t. x + y = 3, −x ≤ −1 → x = 1, y = 2
        let out = minimize(&[2.0, 1.0], &[row(&[1.0, 1.0], Relation::Eq, 3.0), row(&[-1.0, 0.0], Relation::Le, -1.0)]);
        let LpOutcome::Optimal { x, .. } = out else { panic!() };
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_program_terminates() {
        // Beale-style degenerate vertex
        let rows = [
            row(&[0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0),
            row(&[0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0),
            row(&[0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0),
        ];
        let out = minimize(&[-0.75, 150.0, -0.02, 6.0], &rows);
        let LpOutcome::Optimal { objective, .. } = out else { panic!("{out:?}") };
        assert!((objective + 0.05).abs() < 1e-9);
    }
}
