//! Unitary DFTs on centered index ranges and the periodic kernels they produce.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Relative distance to an integer below which kernel arguments snap to it.
const INTEGER_SNAP: f64 = 1e-9;

fn snapped_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= INTEGER_SNAP * x.abs().max(1.0)).then_some(r as i64)
}

/// Periodic sinc `sin(πx) / sin(πx/n)`, with exact zeros at integers that are
/// not multiples of `n` and the limit `n·(−1)^{j(n−1)}` at `x = j·n`.
pub fn dirichlet(x: f64, n: usize) -> f64 {
    let nf = n as f64;
    if let Some(k) = snapped_integer(x) {
        if k.rem_euclid(n as i64) != 0 {
            return 0.0;
        }
        let j = k.div_euclid(n as i64);
        return if (j * (n as i64 - 1)).rem_euclid(2) == 0 { nf } else { -nf };
    }
    (PI * x).sin() / (PI * x / nf).sin()
}

/// `Σ_{k=−⌊L/2⌋}^{L−1−⌊L/2⌋} exp(j2πkx/L)`: the response of a centered
/// length-`L` phase ramp evaluated at fractional bin `x`.
pub fn centered_kernel(x: f64, len: usize) -> Complex64 {
    let l = len as f64;
    let offset = (len / 2) as f64;
    if let Some(k) = snapped_integer(x) {
        if k.rem_euclid(len as i64) == 0 {
            return Complex64::new(l, 0.0);
        }
        return Complex64::new(0.0, 0.0);
    }
    let phase = PI * x * (l - 1.0 - 2.0 * offset) / l;
    Complex64::from_polar((PI * x).sin() / (PI * x / l).sin(), phase)
}

/// Which way a centered DFT rotates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    /// `exp(−j2π ab/L)`
    Negative,
    /// `exp(+j2π ab/L)`
    Positive,
}

/// Unitary DFT over shifted index ranges, applied in place to every
/// length-`len` lane of `data` (lanes start `lane_stride` apart, elements are
/// `elem_stride` apart):
///
/// `y[a] = L^{-1/2} Σ_b x[b] exp(±j2π (a − out_offset)(b − in_offset)/L)`.
#[derive(Debug, Clone, Copy)]
pub struct CenteredDft {
    pub len: usize,
    pub rotation: Rotation,
    pub in_offset: usize,
    pub out_offset: usize,
}

impl CenteredDft {
    pub fn apply(
        &self,
        planner: &mut FftPlanner<f64>,
        data: &mut [Complex64],
        lanes: usize,
        lane_stride: usize,
        elem_stride: usize,
    ) {
        let len = self.len;
        let lf = len as f64;
        let s = match self.rotation {
            Rotation::Negative => -1.0,
            Rotation::Positive => 1.0,
        };
        let fft = match self.rotation {
            Rotation::Negative => planner.plan_fft_forward(len),
            Rotation::Positive => planner.plan_fft_inverse(len),
        };
        let (oa, ob) = (self.out_offset as f64, self.in_offset as f64);
        let pre: Vec<Complex64> =
            (0..len).map(|b| Complex64::from_polar(1.0, -s * 2.0 * PI * (oa * b as f64).rem_euclid(lf) / lf)).collect();
        let norm = 1.0 / lf.sqrt();
        let common = 2.0 * PI * oa * ob / lf;
        let post: Vec<Complex64> = (0..len)
            .map(|a| {
                // phase taken modulo one turn
                let turns = (a as f64 * ob).rem_euclid(lf);
                Complex64::from_polar(norm, s * (common - 2.0 * PI * turns / lf))
            })
            .collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for lane in 0..lanes {
            let base = lane * lane_stride;
            for (b, v) in buf.iter_mut().enumerate() {
                *v = data[base + b * elem_stride] * pre[b];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (a, v) in buf.iter().enumerate() {
                data[base + a * elem_stride] = v * post[a];
            }
        }
    }
}

/// Direct O(L²) evaluation of [`CenteredDft`] on one lane; test oracle.
pub fn centered_dft_direct(dft: &CenteredDft, x: &[Complex64]) -> Vec<Complex64> {
    let len = dft.len as i64;
    let s = match dft.rotation {
        Rotation::Negative => -1.0,
        Rotation::Positive => 1.0,
    };
    let norm = 1.0 / (dft.len as f64).sqrt();
    (0..len)
        .map(|a| {
            let ai = a - dft.out_offset as i64;
            (0..len)
                .map(|b| {
                    let bi = b - dft.in_offset as i64;
                    let turns = (ai * bi).rem_euclid(len) as f64 / len as f64;
                    x[b as usize] * Complex64::from_polar(1.0, s * 2.0 * PI * turns)
                })
                .sum::<Complex64>()
                * norm
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal, seeded};

    #[test]
    fn dirichlet_limits_and_zeros() {
        assert_eq!(dirichlet(0.0, 8), 8.0);
        for k in 1..8 {
            assert_eq!(dirichlet(k as f64, 8), 0.0);
            assert_eq!(dirichlet(-(k as f64), 8), 0.0);
        }
        // (−1)^{j(N−1)} at x = jN
        assert_eq!(dirichlet(8.0, 8), -8.0);
        assert_eq!(dirichlet(7.0, 7), 7.0);
        assert!((dirichlet(0.5, 8) - (PI / 2.0).sin() / (PI / 16.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn kernel_matches_direct_sum() {
        for &len in &[2usize, 5, 8, 16] {
            for &x in &[0.0, 0.3, 1.0, -2.7, 3.5, 11.25] {
                let off = (len / 2) as i64;
                let direct: Complex64 = (-off..len as i64 - off)
                    .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x / len as f64))
                    .sum();
                let closed = centered_kernel(x, len);
                assert!((direct - closed).norm() < 1e-10, "len={len} x={x}: {direct} vs {closed}");
            }
        }
    }

    #[test]
    fn fft_path_matches_direct() {
        let mut planner = FftPlanner::new();
        let mut rng = seeded(3);
        for &len in &[4usize, 7, 16] {
            for rotation in [Rotation::Negative, Rotation::Positive] {
                for (in_offset, out_offset) in [(0, len / 2), (len / 2, 0), (len / 2, len / 2)] {
                    let dft = CenteredDft { len, rotation, in_offset, out_offset };
                    let x: Vec<Complex64> = (0..len).map(|_| complex_normal(&mut rng, 1.0)).collect();
                    let mut y = x.clone();
                    dft.apply(&mut planner, &mut y, 1, len, 1);
                    let expect = centered_dft_direct(&dft, &x);
                    for (a, b) in y.iter().zip(&expect) {
                        assert!((a - b).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
