//! Finite-difference Fisher information of the Gaussian log-likelihood.

use std::f64::consts::PI;

use ddisac::grid::GridSpec;
use num_complex::Complex64;

/// Noise-free FT observation `√p ⊙ Σ_i β_i e^{−j2π mΔf τ_i} e^{j2π nT ν_i}`.
pub fn mean(p: &[f64], grid: &GridSpec, beta: [Complex64; 2], tau: [f64; 2], nu: [f64; 2]) -> Vec<Complex64> {
    let (df, t) = (grid.delta_f(), grid.t());
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for n in grid.symbols() {
        for m in grid.subcarriers() {
            let i = grid.ft_index(m, n);
            let mut v = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                let phase = -2.0 * PI * m as f64 * df * tau[k] + 2.0 * PI * n as f64 * t * nu[k];
                v += beta[k] * Complex64::from_polar(1.0, phase);
            }
            out[i] = v * p[i].sqrt();
        }
    }
    out
}

/// `(μ0 − μ)^H R⁻¹ (μ0 − μ)`, the negative Gaussian log-likelihood of the
/// noise-free observation up to a constant.
fn distance(mu0: &[Complex64], mu: &[Complex64], r: &[f64]) -> f64 {
    mu0.iter().zip(mu).zip(r).map(|((a, b), r)| (a - b).norm_sqr() / r).sum()
}

/// Fisher information on `(x1, x2)` as the central-difference Hessian of the
/// likelihood distance, where `eval(x1, x2)` builds the mean.
fn fd_hessian(eval: impl Fn(f64, f64) -> Vec<Complex64>, x0: [f64; 2], h: f64, r: &[f64]) -> [[f64; 2]; 2] {
    let mu0 = eval(x0[0], x0[1]);
    let d = |a: f64, b: f64| distance(&mu0, &eval(x0[0] + a, x0[1] + b), r);
    let h11 = (d(h, 0.0) + d(-h, 0.0)) / (h * h);
    let h22 = (d(0.0, h) + d(0.0, -h)) / (h * h);
    let h12 = (d(h, h) - d(h, -h) - d(-h, h) + d(-h, -h)) / (4.0 * h * h);
    [[h11, h12], [h12, h22]]
}

pub struct Geometry {
    pub beta: [Complex64; 2],
    pub tau: [f64; 2],
    pub nu: [f64; 2],
}

/// Finite-difference delay block with step `1e-4·Δτ`.
pub fn fd_fim_tau(p: &[f64], grid: &GridSpec, g: &Geometry, r: &[f64]) -> [[f64; 2]; 2] {
    let h = 1e-4 * grid.resolution().delta_tau;
    fd_hessian(|a, b| mean(p, grid, g.beta, [a, b], g.nu), g.tau, h, r)
}

/// Finite-difference Doppler block with step `1e-4·Δν`.
pub fn fd_fim_nu(p: &[f64], grid: &GridSpec, g: &Geometry, r: &[f64]) -> [[f64; 2]; 2] {
    let h = 1e-4 * grid.resolution().delta_nu;
    fd_hessian(|a, b| mean(p, grid, g.beta, g.tau, [a, b]), g.nu, h, r)
}

/// Largest entry error relative to the geometric mean of the diagonals.
pub fn fim_rel_err(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let scale = (b[i][i] * b[j][j]).sqrt();
            worst = worst.max((a[i][j] - b[i][j]).abs() / scale);
        }
    }
    worst
}

fn random_case(rng: &mut impl rand::Rng, g: &GridSpec) -> (Vec<f64>, Vec<f64>, Geometry) {
    let r = g.resolution();
    let p: Vec<f64> = (0..g.len()).map(|_| rng.random_range(0.2..2.0)).collect();
    let p_com: Vec<f64> =
        (0..g.len()).map(|_| if rng.random_bool(0.5) { rng.random_range(0.0..3.0) } else { 0.0 }).collect();
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let beta = [c(), c()];
    let tau1 = rng.random_range(0.0..8.0) * r.delta_tau;
    let nu1 = rng.random_range(-2.0..2.0) * r.delta_nu;
    let geo = Geometry {
        beta,
        tau: [tau1, tau1 + rng.random_range(0.2..3.0) * r.delta_tau],
        nu: [nu1, nu1 + rng.random_range(-1.0..1.0) * r.delta_nu],
    };
    (p, p_com, geo)
}

/// Worst relative mismatch between the closed-form FIM and the
/// finite-difference one over five random two-target geometries on a 16×8
/// grid, with white or communication-colored noise.
pub fn closed_form_gap(colored: bool) -> f64 {
    use ddisac::metrics::{fim_two_targets, NoiseModel, TwoTargets};
    let g = GridSpec::new(16, 8, 1e6, 0.25e-6, 28e9).unwrap();
    let mut rng = ddisac::rng::seeded(if colored { 11 } else { 7 });
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (p, p_com, geo) = random_case(&mut rng, &g);
        let sigma_z2 = 0.3;
        let b2 = geo.beta[0].norm_sqr() + geo.beta[1].norm_sqr();
        let (noise, r): (NoiseModel, Vec<f64>) = if colored {
            let r = p_com.iter().map(|c| sigma_z2 + b2 * c).collect();
            (NoiseModel::DualDomainColored { sigma_z2, p_com }, r)
        } else {
            (NoiseModel::White { sigma_z2 }, vec![sigma_z2; g.len()])
        };
        let t = TwoTargets {
            beta1: geo.beta[0],
            beta2: geo.beta[1],
            tau1: geo.tau[0],
            tau2: geo.tau[1],
            nu1: geo.nu[0],
            nu2: geo.nu[1],
        };
        let rep = fim_two_targets(&p, &g, &t, &noise).unwrap();
        worst = worst
            .max(fim_rel_err(&rep.i_tau, &fd_fim_tau(&p, &g, &geo, &r)))
            .max(fim_rel_err(&rep.i_nu, &fd_fim_nu(&p, &g, &geo, &r)));
    }
    worst
}
