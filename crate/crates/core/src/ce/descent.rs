// SPDX-License-Identifier: Apache-2.0

//! Direct minimisation of `λ_max(M(c)†M(c))` for an affine family
//! `M(c) = M₀ + Σ c_q B_q`.
//!
//! The largest eigenvalue is replaced by a log-sum-exp with temperature
//! `τ`, minimised with BFGS, and `τ` is driven down geometrically. Each
//! stage warm-starts from the previous one.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{eigh, CMat};

#[derive(Clone, Debug)]
pub struct DescentResult {
    pub c: Vec<f64>,
    /// Exact `λ_max` at `c`.
    pub value: f64,
    pub iterations: usize,
}

struct Family<'a> {
    m0: &'a CMat,
    dirs: &'a [CMat],
}

impl Family<'_> {
    fn at(&self, c: &[f64]) -> CMat {
        self.dirs
            .iter()
            .zip(c)
            .fold(self.m0.clone(), |acc, (b, &ci)| acc + b.scale(ci))
    }

    fn lambda_max(&self, c: &[f64]) -> f64 {
        let m = self.at(c);
        eigh(&(m.adjoint() * m)).max()
    }

    /// Smoothed objective and its gradient.
    fn smoothed(&self, c: &[f64], tau: f64) -> (f64, Vec<f64>) {
        let m = self.at(c);
        let eig = eigh(&(m.adjoint() * &m));
        let top = eig.max();
        let w: Vec<f64> = eig.values.iter().map(|l| ((l - top) / tau).exp()).collect();
        let sum: f64 = w.iter().sum();
        let value = top + tau * sum.ln();

        let mut grad = vec![0.0; self.dirs.len()];
        for (j, wj) in w.iter().enumerate() {
            let wj = wj / sum;
            if wj < 1e-300 {
                continue;
            }
            let v = eig.vectors.column(j);
            let mv = &m * v;
            for (g, b) in grad.iter_mut().zip(self.dirs) {
                *g += wj * 2.0 * (b * v).dotc(&mv).re;
            }
        }
        (value, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS on the smoothed objective at fixed `τ`. Returns iterations used.
fn bfgs(f: &Family, c: &mut Vec<f64>, tau: f64, max_iter: usize) -> usize {
    let m = c.len();
    let mut hinv = DMatrix::<f64>::identity(m, m);
    let (mut val, mut grad) = f.smoothed(c, tau);
    for it in 0..max_iter {
        let g = DVector::from_column_slice(&grad);
        let gnorm = g.norm();
        if gnorm < 1e-14 {
            return it;
        }
        let mut p: Vec<f64> = (-(&hinv * &g)).as_slice().to_vec();
        let mut slope = dot(&p, &grad);
        if slope >= 0.0 {
            hinv = DMatrix::identity(m, m);
            p = grad.iter().map(|x| -x).collect();
            slope = -gnorm * gnorm;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = c.iter().zip(&p).map(|(ci, pi)| ci + step * pi).collect();
            let (tv, tg) = f.smoothed(&trial, tau);
            if tv <= val + 1e-4 * step * slope {
                accepted = Some((trial, tv, tg));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, tv, tg)) = accepted else {
            return it;
        };

        let s: Vec<f64> = trial.iter().zip(c.iter()).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = tg.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-300 {
            let s = DVector::from_vec(s);
            let yv = DVector::from_vec(yv);
            let rho = 1.0 / sy;
            let id = DMatrix::<f64>::identity(m, m);
            let left = &id - (&s * yv.transpose()).scale(rho);
            let right = &id - (&yv * s.transpose()).scale(rho);
            hinv = &left * &hinv * &right + (&s * s.transpose()).scale(rho);
        }
        let improvement = val - tv;
        *c = trial;
        val = tv;
        grad = tg;
        if improvement <= 1e-16 * val.abs().max(1e-300) {
            return it + 1;
        }
    }
    max_iter
}

pub fn minimize_lambda_max(m0: &CMat, dirs: &[CMat], start: Option<&[f64]>) -> DescentResult {
    let f = Family { m0, dirs };
    let mut c = start.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; dirs.len()]);
    if dirs.is_empty() {
        return DescentResult {
            value: f.lambda_max(&c),
            c,
            iterations: 0,
        };
    }
    let scale = f.lambda_max(&c).max(1e-3);
    let mut tau = 0.1 * scale;
    let mut iterations = 0;
    let mut best_c = c.clone();
    let mut best = f.lambda_max(&c);
    while tau > 1e-13 * scale {
        iterations += bfgs(&f, &mut c, tau, 400);
        let v = f.lambda_max(&c);
        if v < best {
            best = v;
            best_c = c.clone();
        }
        tau *= 0.1;
    }
    DescentResult {
        c: best_c,
        value: best,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, pauli};

    #[test]
    fn recovers_minimal_norm_of_a_pencil() {
        // ‖σ₃ + x·σ₁‖² = 1 + x², minimised at x = 0 from a far start.
        let r = minimize_lambda_max(&pauli(3), &[pauli(1)], Some(&[3.0]));
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
        assert!(r.c[0].abs() < 1e-4);
    }

    #[test]
    fn handles_degenerate_top_eigenvalue() {
        // M(x) = diag(1 + x, 1 − x): λ_max of M†M is (1 + |x|)².
        let m0 = CMat::identity(2, 2);
        let b = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let r = minimize_lambda_max(&m0, &[b], Some(&[0.7]));
        assert!((r.value - 1.0).abs() < 1e-7, "{}", r.value);
    }
}
