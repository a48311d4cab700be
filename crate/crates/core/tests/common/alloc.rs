//! Allocation constraints written directly as SDNR ratios, not in the linear
//! form the solver uses, plus a brute-force grid search.

use ddisac::powalloc::{solve, AllocProblem, Status};
use rand::Rng;

pub fn ue_sdnr(p: &AllocProblem, k: usize, x: &[f64], y: f64) -> f64 {
    let g = p.ue_gains[k];
    g * x[k] / (g * y + p.sigma_z2)
}

pub fn sensing_sdnr(p: &AllocProblem, q: usize, x: &[f64], y: f64) -> f64 {
    let mn = (p.m * p.n) as f64;
    let ks: f64 = p.target_gains.iter().sum();
    // DD sensing energy per bin is MN·y; comm energy spreads over all MN bins
    let comm_energy: f64 = p.ue_resources.iter().zip(x).map(|(r, v)| *r as f64 * v).sum();
    let leak: f64 = (0..p.target_gains.len()).filter(|&j| j != q).map(|j| p.target_gains[j] * p.coupling[q][j] * mn * y).sum();
    p.target_gains[q] * mn * y / (leak + ks * comm_energy / mn + p.sigma_z2 * p.antennas as f64)
}

pub fn total_power(p: &AllocProblem, x: &[f64], y: f64) -> f64 {
    let comm: f64 = p.ue_resources.iter().zip(x).map(|(r, v)| *r as f64 * v).sum::<f64>() / p.n as f64;
    comm + p.m as f64 * y
}

pub fn feasible(p: &AllocProblem, x: &[f64], y: f64, tol: f64) -> bool {
    let comm: f64 = p.ue_resources.iter().zip(x).map(|(r, v)| *r as f64 * v).sum::<f64>() / p.n as f64;
    let p_ib = comm + p.m_com as f64 * y;
    let p_ob = (p.m - p.m_com) as f64 * y;
    x.iter().all(|v| *v >= 0.0)
        && y >= 0.0
        && (0..p.ue_gains.len()).all(|k| ue_sdnr(p, k, x, y) >= p.gamma_ft * (1.0 - tol))
        && (0..p.target_gains.len()).all(|q| sensing_sdnr(p, q, x, y) >= p.gamma_dd * (1.0 - tol))
        && p_ib >= p.aclr_rel * p_ob * (1.0 - tol)
        && y <= p.aclr_abs * p.delta_f * (1.0 + tol)
        && total_power(p, x, y) <= p.p_max * (1.0 + tol)
}

/// Redraws until the instance is feasible; strong comm echo can make a weak
/// target's SDNR demand unreachable at any power.
pub fn random_problem(rng: &mut impl Rng, k: usize, q: usize) -> AllocProblem {
    loop {
        let p = draw(rng, k, q);
        if solve(&p).unwrap().status == Status::Optimal {
            return p;
        }
    }
}

fn draw(rng: &mut impl Rng, k: usize, q: usize) -> AllocProblem {
    let m = 64;
    let m_com = rng.random_range(8..=48);
    let n = 16;
    let per_ue = (m_com * n / k.max(1)).min(200);
    let mut coupling = vec![vec![0.0; q]; q];
    for (i, row) in coupling.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            if i != j {
                *c = rng.random_range(0.0..1e-4);
            }
        }
    }
    AllocProblem {
        ue_gains: (0..k).map(|_| 10f64.powf(rng.random_range(-8.0..-5.0))).collect(),
        ue_resources: (0..k).map(|_| rng.random_range(1..=per_ue)).collect(),
        target_gains: (0..q).map(|_| 10f64.powf(rng.random_range(-11.0..-8.0))).collect(),
        coupling,
        m,
        m_com,
        n,
        gamma_ft: 10f64.powf(rng.random_range(0.0..2.0)),
        gamma_dd: 10f64.powf(rng.random_range(0.0..2.0)),
        aclr_rel: rng.random_range(0.0..1.0),
        aclr_abs: 1.0,
        delta_f: 1e6,
        sigma_z2: 1e-12,
        antennas: rng.random_range(1..=8),
        p_max: 1e6,
    }
}

/// Lowest total power over a `steps × steps` grid on `[0, 2x*] × [0, 2y*]`
/// for a one-UE problem, where `(x*, y*)` is the solver's optimum.
pub fn grid_search_best(p: &AllocProblem, x_opt: f64, y_opt: f64, steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let x = 2.0 * x_opt * i as f64 / steps as f64;
        for j in 0..=steps {
            let y = 2.0 * y_opt * j as f64 / steps as f64;
            if feasible(p, &[x], y, 1e-9) {
                best = best.min(total_power(p, &[x], y));
            }
        }
    }
    best
}
