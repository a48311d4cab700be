//! Minimum-power allocation between communication and sensing under SDNR,
//! ACLR and budget constraints.
//!
//! With equal power per resource inside each UE's allocation, the closed-form
//! SDNR bounds are linear in the per-resource powers, so the problem is a
//! small linear program in `x_k` (UE `k`'s per-resource power) and
//! `y = (σ_sen^FT)²`.

pub mod simplex;

use std::fmt;

use serde::Serialize;

use crate::error::{ensure, Result};
use simplex::{minimize, LpOutcome, Relation, Row};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocProblem {
    /// `κ_k²` per UE.
    pub ue_gains: Vec<f64>,
    /// `|Λ_k|` per UE.
    pub ue_resources: Vec<usize>,
    /// `κ_q,sen²` per target.
    pub target_gains: Vec<f64>,
    /// `χ_{q,j}`, `Q × Q`.
    pub coupling: Vec<Vec<f64>>,
    pub m: usize,
    pub m_com: usize,
    pub n: usize,
    /// Linear FT SDNR threshold.
    pub gamma_ft: f64,
    /// Linear DD SDNR threshold.
    pub gamma_dd: f64,
    /// Required in-band to out-of-band power ratio (linear).
    pub aclr_rel: f64,
    /// Out-of-band power spectral density cap (W/Hz).
    pub aclr_abs: f64,
    pub delta_f: f64,
    pub sigma_z2: f64,
    pub antennas: usize,
    /// Total power budget (W).
    pub p_max: f64,
}

/// One constraint of the allocation problem, in checking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ConstraintId {
    UeSdnr(usize),
    SensingSdnr(usize),
    AclrRelative,
    AclrAbsolute,
    PowerBudget,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintId::UeSdnr(k) => write!(f, "ue-sdnr[{k}]"),
            ConstraintId::SensingSdnr(q) => write!(f, "sensing-sdnr[{q}]"),
            ConstraintId::AclrRelative => f.write_str("aclr-relative"),
            ConstraintId::AclrAbsolute => f.write_str("aclr-absolute"),
            ConstraintId::PowerBudget => f.write_str("power-budget"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocSolution {
    pub status: Status,
    /// Per-UE per-resource power (W).
    pub p_com_k: Vec<f64>,
    /// Per-subcarrier sensing power `(σ_sen^FT)²` (W).
    pub p_sen: f64,
    pub p_tot: f64,
    pub p_ib: f64,
    pub p_ob: f64,
    /// Constraints holding with equality at the optimum.
    pub tight_constraints: Vec<ConstraintId>,
    /// When infeasible, the constraints Phase 1 could not satisfy.
    pub certificate: Vec<ConstraintId>,
}

/// Relative slack at which a constraint counts as tight.
pub const TIGHT_TOL: f64 = 1e-9;

impl AllocProblem {
    pub fn validate(&self) -> Result<()> {
        let k = self.ue_gains.len();
        let q = self.target_gains.len();
        ensure!(self.ue_resources.len() == k, Config, "{} resource counts for {k} UEs", self.ue_resources.len());
        ensure!(
            self.coupling.len() == q && self.coupling.iter().all(|r| r.len() == q),
            Config,
            "coupling matrix must be {q}x{q}"
        );
        ensure!(self.m >= 1 && self.n >= 1, Config, "grid dimensions must be positive");
        ensure!(self.m_com <= self.m, Config, "M_com = {} exceeds M = {}", self.m_com, self.m);
        ensure!(self.ue_gains.iter().all(|g| *g > 0.0), Config, "UE gains must be positive");
        ensure!(self.target_gains.iter().all(|g| *g > 0.0), Config, "target gains must be positive");
        ensure!(self.ue_resources.iter().all(|r| *r > 0), Allocation, "every UE needs allocated resources");
        ensure!(
            self.ue_resources.iter().sum::<usize>() <= self.m_com * self.n,
            Allocation,
            "more resources allocated than the band holds"
        );
        for (name, v) in [
            ("gamma_ft", self.gamma_ft),
            ("gamma_dd", self.gamma_dd),
            ("aclr_rel", self.aclr_rel),
            ("aclr_abs", self.aclr_abs),
            ("delta_f", self.delta_f),
            ("sigma_z2", self.sigma_z2),
            ("p_max", self.p_max),
        ] {
            ensure!(v.is_finite() && v >= 0.0, Config, "{name} must be finite and non-negative, got {v}");
        }
        ensure!(self.delta_f > 0.0, Config, "delta_f must be positive");
        ensure!(self.antennas >= 1, Config, "antenna count must be at least 1");
        Ok(())
    }

    fn kappa_sen2(&self) -> f64 {
        self.target_gains.iter().sum()
    }

    /// `Σ_k |Λ_k| x_k / N`
    pub fn p_com(&self, x: &[f64]) -> f64 {
        self.ue_resources.iter().zip(x).map(|(r, v)| *r as f64 * v).sum::<f64>() / self.n as f64
    }

    pub fn y_cap(&self) -> f64 {
        self.aclr_abs * self.delta_f
    }

    /// Every constraint as `(id, lhs − rhs, scale)` with the feasible side
    /// non-negative; `scale` is the magnitude of the terms involved.
    pub fn constraint_values(&self, x: &[f64], y: f64) -> Vec<(ConstraintId, f64, f64)> {
        let mn = (self.m * self.n) as f64;
        let mut out = Vec::new();
        for (k, (&g, &xk)) in self.ue_gains.iter().zip(x).enumerate() {
            let lhs = g * xk;
            let rhs = self.gamma_ft * (g * y + self.sigma_z2);
            out.push((ConstraintId::UeSdnr(k), lhs - rhs, lhs.abs().max(rhs.abs())));
        }
        let comm_dd = self.ue_resources.iter().zip(x).map(|(r, v)| *r as f64 * v).sum::<f64>() / mn;
        for (q, &g) in self.target_gains.iter().enumerate() {
            let leak: f64 = self
                .target_gains
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != q)
                .map(|(j, gj)| gj * self.coupling[q][j] * mn * y)
                .sum();
            let lhs = g * mn * y;
            let rhs = self.gamma_dd * (leak + self.kappa_sen2() * comm_dd + self.sigma_z2 * self.antennas as f64);
            out.push((ConstraintId::SensingSdnr(q), lhs - rhs, lhs.abs().max(rhs.abs())));
        }
        let p_com = self.p_com(x);
        let p_ib = p_com + self.m_com as f64 * y;
        let p_ob_scaled = self.aclr_rel * (self.m - self.m_com) as f64 * y;
        out.push((ConstraintId::AclrRelative, p_ib - p_ob_scaled, p_ib.abs().max(p_ob_scaled.abs())));
        let cap = self.y_cap();
        out.push((ConstraintId::AclrAbsolute, cap - y, cap.abs().max(y.abs())));
        let p_tot = p_com + self.m as f64 * y;
        out.push((ConstraintId::PowerBudget, self.p_max - p_tot, self.p_max.abs().max(p_tot.abs())));
        out
    }

    /// Whether every constraint (including non-negativity) holds within
    /// `tol` relative slack.
    pub fn is_feasible(&self, x: &[f64], y: f64, tol: f64) -> bool {
        x.iter().all(|v| *v >= 0.0)
            && y >= 0.0
            && self.constraint_values(x, y).iter().all(|(_, s, scale)| *s >= -tol * scale.max(f64::MIN_POSITIVE))
    }

    fn ids(&self) -> Vec<ConstraintId> {
        let mut ids: Vec<_> = (0..self.ue_gains.len()).map(ConstraintId::UeSdnr).collect();
        ids.extend((0..self.target_gains.len()).map(ConstraintId::SensingSdnr));
        ids.extend([ConstraintId::AclrRelative, ConstraintId::AclrAbsolute, ConstraintId::PowerBudget]);
        ids
    }

    /// LP rows in the scaled variables `z_k = |Λ_k| x_k / N` (UE power) and
    /// `y′ = M y` (sensing power), each normalized to unit max coefficient.
    fn rows(&self) -> Vec<Row> {
        let k = self.ue_gains.len();
        let (m, n) = (self.m as f64, self.n as f64);
        let nv = k + 1;
        let mut rows = Vec::new();
        for (i, (&g, &r)) in self.ue_gains.iter().zip(&self.ue_resources).enumerate() {
            let mut c = vec![0.0; nv];
            c[i] = n / r as f64;
            c[k] = -self.gamma_ft / m;
            rows.push(Row { coeffs: c, relation: Relation::Ge, rhs: self.gamma_ft * self.sigma_z2 / g });
        }
        let ks = self.kappa_sen2();
        for (q, &g) in self.target_gains.iter().enumerate() {
            let leak: f64 = self
                .target_gains
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != q)
                .map(|(j, gj)| gj * self.coupling[q][j])
                .sum();
            let mut c = vec![-self.gamma_dd * ks / m; nv];
            c[k] = (g - self.gamma_dd * leak) * n;
            rows.push(Row {
                coeffs: c,
                relation: Relation::Ge,
                rhs: self.gamma_dd * self.sigma_z2 * self.antennas as f64,
            });
        }
        let mut c = vec![1.0; nv];
        c[k] = (self.m_com as f64 - self.aclr_rel * (self.m - self.m_com) as f64) / m;
        rows.push(Row { coeffs: c, relation: Relation::Ge, rhs: 0.0 });
        let mut c = vec![0.0; nv];
        c[k] = 1.0;
        rows.push(Row { coeffs: c, relation: Relation::Le, rhs: m * self.y_cap() });
        rows.push(Row { coeffs: vec![1.0; nv], relation: Relation::Le, rhs: self.p_max });

        for row in &mut rows {
            let s = row.coeffs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if s > 0.0 {
                row.coeffs.iter_mut().for_each(|v| *v /= s);
                row.rhs /= s;
            }
        }
        rows
    }
}

/// Solves the allocation LP.
pub fn solve(problem: &AllocProblem) -> Result<AllocSolution> {
    problem.validate()?;
    let k = problem.ue_gains.len();
    let cost = vec![1.0; k + 1];
    let ids = problem.ids();
    // work in units of the largest SDNR demand so the tableau is O(1)
    let mut rows = problem.rows();
    let unit = rows.iter().filter(|r| r.relation == Relation::Ge).map(|r| r.rhs.abs()).fold(0.0, f64::max);
    let unit = if unit > 0.0 { unit } else { 1.0 };
    rows.iter_mut().for_each(|r| r.rhs /= unit);
    match minimize(&cost, &rows) {
        LpOutcome::Optimal { x: z, .. } => {
            let z: Vec<f64> = z.iter().map(|v| v * unit).collect();
            let n = problem.n as f64;
            let x: Vec<f64> = z[..k].iter().zip(&problem.ue_resources).map(|(zk, r)| zk * n / *r as f64).collect();
            let mut y = z[k] / problem.m as f64;
            let cap = problem.y_cap();
            if (y - cap).abs() <= TIGHT_TOL * cap {
                y = cap;
            }
            let tight = problem
                .constraint_values(&x, y)
                .into_iter()
                .filter(|(_, s, scale)| s.abs() <= TIGHT_TOL * scale.max(f64::MIN_POSITIVE) && *scale > 0.0)
                .map(|(id, _, _)| id)
                .collect();
            let p_com = problem.p_com(&x);
            Ok(AllocSolution {
                status: Status::Optimal,
                p_tot: p_com + problem.m as f64 * y,
                p_ib: p_com + problem.m_com as f64 * y,
                p_ob: (problem.m - problem.m_com) as f64 * y,
                p_com_k: x,
                p_sen: y,
                tight_constraints: tight,
                certificate: Vec::new(),
            })
        }
        LpOutcome::Infeasible { rows } => Ok(AllocSolution {
            status: Status::Infeasible,
            p_com_k: vec![0.0; k],
            p_sen: 0.0,
            p_tot: 0.0,
            p_ib: 0.0,
            p_ob: 0.0,
            tight_constraints: Vec::new(),
            certificate: rows.into_iter().map(|i| ids[i]).collect(),
        }),
        LpOutcome::Unbounded => unreachable!("objective is bounded below by zero"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(k: usize, q: usize) -> AllocProblem {
        AllocProblem {
            ue_gains: vec![1e-6; k],
            ue_resources: vec![100; k],
            target_gains: vec![1e-9; q],
            coupling: vec![vec![0.0; q]; q],
            m: 64,
            m_com: 32,
            n: 16,
            gamma_ft: 10.0,
            gamma_dd: 10.0,
            aclr_rel: 1.0,
            aclr_abs: 1.0,
            delta_f: 1e6,
            sigma_z2: 1e-12,
            antennas: 4,
            p_max: 1e3,
        }
    }

    #[test]
    fn no_demand_no_power() {
        let s = solve(&base(0, 0)).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.p_tot, 0.0);
        assert!(s.p_com_k.is_empty());
    }

    #[test]
    fn sdnr_constraints_tight_when_aclr_slack() {
        let p = base(1, 1);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!(p.is_feasible(&s.p_com_k, s.p_sen, 1e-9));
        assert!(s.tight_constraints.contains(&ConstraintId::UeSdnr(0)), "{:?}", s.tight_constraints);
        assert!(s.tight_constraints.contains(&ConstraintId::SensingSdnr(0)), "{:?}", s.tight_constraints);
    }

    #[test]
    fn budget_infeasibility_certified() {
        let mut p = base(1, 1);
        p.p_max = 1e-9;
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Infeasible);
        assert!(!s.certificate.is_empty());
    }

    #[test]
    fn rejects_bad_problem() {
        let mut p = base(1, 1);
        p.ue_resources = vec![];
        assert!(solve(&p).is_err());
    }
}
