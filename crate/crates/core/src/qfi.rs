// SPDX-License-Identifier: Apache-2.0

//! Quantum Fisher information and a brute-force search over pure inputs.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{check_budget, Channel, DensityMatrix, Tolerances, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::json::VectorDoc;
use crate::linalg::{self, c, eigh, hermitian_defect, kron, CMat, CVec};
use crate::random::haar_state;

/// `F = Σ 2|⟨i|∂ρ|j⟩|²/(λᵢ+λⱼ)` over eigenpairs with `λᵢ+λⱼ > 10⁻¹²·Trρ`.
pub fn qfi(rho: &DensityMatrix, drho: &CMat) -> Result<f64> {
    let n = rho.dim();
    if drho.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: drho.nrows(),
        });
    }
    let scale = drho.norm().max(1.0);
    if hermitian_defect(drho) > 1e-10 * scale {
        return Err(Error::Input("derivative of the state is not Hermitian".into()));
    }
    let tr = linalg::trace(drho);
    if tr.norm() > Tolerances::default().tp * scale {
        return Err(Error::Input(format!(
            "derivative of the state is not traceless (trace {:.3e})",
            tr.norm()
        )));
    }
    Ok(qfi_unchecked(rho.matrix(), drho))
}

fn qfi_unchecked(rho: &CMat, drho: &CMat) -> f64 {
    let tau = 1e-12 * linalg::trace(rho).re;
    let e = eigh(rho);
    let rotated = e.vectors.adjoint() * drho * &e.vectors;
    let n = rho.nrows();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = e.values[i] + e.values[j];
            if s > tau {
                f += 2.0 * rotated[(i, j)].norm_sqr() / s;
            }
        }
    }
    f
}

/// `Δφ ≥ 1/√(ν·F)`; infinite when `F ≤ 0`.
pub fn crlb(f: f64, nu: usize) -> f64 {
    if f > 0.0 && nu > 0 {
        1.0 / (nu as f64 * f).sqrt()
    } else {
        f64::INFINITY
    }
}

/// Output state and its derivative for `n` probes fed a pure state `ψ`.
pub fn output_state(
    ch: &Channel,
    n: usize,
    psi: &CVec,
    budget: usize,
) -> Result<(DensityMatrix, CMat)> {
    let rho = DensityMatrix::pure(psi)?;
    let (out, d) = ch.tensor_apply(n, &rho, true, budget)?;
    Ok((out, d.expect("derivative requested")))
}

/// QFI of `Λ_φ^{⊗n}[|ψ⟩⟨ψ|]`.
pub fn output_qfi(ch: &Channel, n: usize, psi: &CVec, budget: usize) -> Result<f64> {
    let (rho, d) = output_state(ch, n, psi, budget)?;
    qfi(&rho, &linalg::hermitian_part(&d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub n: usize,
    pub best_qfi: f64,
    pub best_state: VectorDoc,
    pub restarts: usize,
    pub seed: u64,
    pub converged: bool,
    pub delta_phi: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub restarts: usize,
    pub seed: u64,
    pub budget: usize,
    pub max_iter: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            budget: DEFAULT_BUDGET,
            max_iter: 400,
        }
    }
}

/// All `kⁿ` products `K_{s₁}⊗…⊗K_{sₙ}` with their φ-derivatives.
struct KrausStrings {
    ops: Vec<CMat>,
    dots: Vec<CMat>,
}

impl KrausStrings {
    fn new(ch: &Channel, n: usize) -> Self {
        let mut ops = ch.kraus().to_vec();
        let mut dots = ch.kraus_dot().to_vec();
        for _ in 1..n {
            let mut next_ops = Vec::with_capacity(ops.len() * ch.k());
            let mut next_dots = Vec::with_capacity(ops.len() * ch.k());
            for (a, ad) in ops.iter().zip(&dots) {
                for (k, kd) in ch.kraus().iter().zip(ch.kraus_dot()) {
                    next_ops.push(kron(a, k));
                    next_dots.push(kron(ad, k) + kron(a, kd));
                }
            }
            ops = next_ops;
            dots = next_dots;
        }
        Self { ops, dots }
    }

    fn qfi(&self, psi: &CVec) -> f64 {
        let dim = self.ops[0].nrows();
        let mut rho = linalg::zeros(dim, dim);
        let mut drho = linalg::zeros(dim, dim);
        for (a, ad) in self.ops.iter().zip(&self.dots) {
            let v = a * psi;
            let vd = ad * psi;
            rho += &v * v.adjoint();
            let cross = &vd * v.adjoint();
            drho += &cross + cross.adjoint();
        }
        qfi_unchecked(&rho, &drho)
    }
}

fn to_state(x: &[f64]) -> CVec {
    let half = x.len() / 2;
    let v = CVec::from_iterator(half, (0..half).map(|i| c(x[i], x[half + i])));
    let norm = v.norm();
    v.unscale(norm)
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

struct Ascent {
    x: Vec<f64>,
    value: f64,
    converged: bool,
}

const FD_STEP: f64 = 1e-6;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Central-difference gradient, projected onto the tangent space of the sphere.
fn sphere_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + FD_STEP;
        let up = f(&probe);
        probe[i] = x[i] - FD_STEP;
        let down = f(&probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * FD_STEP);
    }
    let radial = dot(&g, x);
    g.iter_mut().zip(x).for_each(|(gi, xi)| *gi -= radial * xi);
    g
}

/// Projected gradient ascent on the unit sphere with a central-difference
/// gradient. The step direction is preconditioned by a BFGS estimate of the
/// inverse Hessian and its length found by backtracking.
fn ascend(strings: &KrausStrings, start: &CVec, max_iter: usize) -> Ascent {
    let mut x: Vec<f64> = start.iter().map(|z| z.re).chain(start.iter().map(|z| z.im)).collect();
    normalize(&mut x);
    let dim = x.len();
    let f = |x: &[f64]| strings.qfi(&to_state(x));
    let mut value = f(&x);
    let mut g = sphere_gradient(&f, &x);
    let mut hinv = DMatrix::<f64>::identity(dim, dim);
    let mut converged = false;
    let mut stalls = 0;
    for _ in 0..max_iter {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < 1e-8 * value.max(1.0) {
            converged = true;
            break;
        }
        let mut p: Vec<f64> = (&hinv * DVector::from_column_slice(&g)).as_slice().to_vec();
        if dot(&p, &g) <= 0.0 {
            hinv = DMatrix::identity(dim, dim);
            p = g.clone();
        }
        let slope = dot(&p, &g);

        let mut step = 1.0;
        let mut accepted = None;
        while step * slope.sqrt() > 1e-12 {
            let mut trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + step * b).collect();
            normalize(&mut trial);
            let tv = f(&trial);
            if tv >= value + 1e-4 * step * slope {
                accepted = Some((trial, tv));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, tv)) = accepted else {
            if hinv != DMatrix::identity(dim, dim) {
                hinv = DMatrix::identity(dim, dim);
                continue;
            }
            converged = true;
            break;
        };

        let g_new = sphere_gradient(&f, &trial);
        let sv = DVector::from_iterator(dim, trial.iter().zip(&x).map(|(a, b)| a - b));
        let yv = DVector::from_iterator(dim, g.iter().zip(&g_new).map(|(a, b)| a - b));
        let sy = sv.dot(&yv);
        if sy > 1e-14 * sv.norm() * yv.norm() {
            let rho = 1.0 / sy;
            let id = DMatrix::<f64>::identity(dim, dim);
            let left = &id - (&sv * yv.transpose()).scale(rho);
            let right = &id - (&yv * sv.transpose()).scale(rho);
            hinv = &left * &hinv * &right + (&sv * sv.transpose()).scale(rho);
        }
        let gain = tv - value;
        x = trial;
        value = tv;
        g = g_new;
        if gain <= 1e-13 * value.max(1.0) {
            stalls += 1;
            if stalls >= 3 {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ascent { x, value, converged }
}

pub fn optimize_input(ch: &Channel, n: usize, restarts: usize, seed: u64) -> Result<OracleResult> {
    optimize_input_with(
        ch,
        n,
        &OracleOptions {
            restarts,
            seed,
            ..OracleOptions::default()
        },
    )
}

pub fn optimize_input_with(ch: &Channel, n: usize, opts: &OracleOptions) -> Result<OracleResult> {
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::Input("at least one restart is needed".into()));
    }
    ch.ensure_valid(&Tolerances::default())?;
    check_budget(ch.d_in().max(ch.d_out()), n, opts.budget)?;
    let string_entries = (ch.k() as u128)
        .saturating_pow(n as u32)
        .saturating_mul((ch.d_in() as u128 * ch.d_out() as u128).saturating_pow(n as u32));
    if string_entries > opts.budget as u128 {
        return Err(Error::Budget {
            required: string_entries,
            limit: opts.budget,
        });
    }

    let strings = KrausStrings::new(ch, n);
    let dim = ch.d_in().pow(n as u32);
    let runs: Vec<Ascent> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            let start = haar_state(&mut rng, dim);
            ascend(&strings, &start, opts.max_iter)
        })
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = i;
        }
    }
    let run = &runs[best];
    let state = to_state(&run.x);
    let best_qfi = run.value;
    let check = output_qfi(ch, n, &state, opts.budget)?;
    if (check - best_qfi).abs() > 1e-9 * best_qfi.max(1.0) {
        return Err(Error::Consistency(format!(
            "oracle QFI {best_qfi} not reproduced by the full output state ({check})"
        )));
    }
    Ok(OracleResult {
        n,
        best_qfi,
        best_state: VectorDoc::from_vector(&state),
        restarts: opts.restarts,
        seed: opts.seed,
        converged: run.converged,
        delta_phi: crlb(best_qfi, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, ONE};
    use crate::models::{self, ModelName, ModelSpec};

    fn plus() -> CVec {
        CVec::from_vec(vec![ONE, ONE]).unscale(2f64.sqrt())
    }

    #[test]
    fn zero_derivative_has_zero_information() {
        let rho = DensityMatrix::pure(&plus()).unwrap();
        assert_eq!(qfi(&rho, &linalg::zeros(2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn pure_state_under_sigma3_half() {
        let psi = plus();
        let rho = DensityMatrix::pure(&psi).unwrap();
        let g = pauli(3).scale(0.5);
        let r = rho.matrix();
        let drho = (&g * r - r * &g) * linalg::I;
        assert!((qfi(&rho, &drho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_single_probe() {
        let ch = models::build(&ModelSpec::new(ModelName::Dephasing, 0.8).unwrap(), 0.0).unwrap();
        let f = output_qfi(&ch, 1, &plus(), DEFAULT_BUDGET).unwrap();
        assert!((f - 0.64).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_derivatives() {
        let rho = DensityMatrix::pure(&plus()).unwrap();
        let mut d = linalg::zeros(2, 2);
        d[(0, 1)] = ONE;
        assert!(qfi(&rho, &d).is_err());
        assert!(qfi(&rho, &linalg::identity(2)).is_err());
        assert!(qfi(&rho, &linalg::zeros(3, 3)).is_err());
    }

    #[test]
    fn crlb_values() {
        assert_eq!(crlb(4.0, 1), 0.5);
        assert!((crlb(100.0 * 0.64 / 0.36, 1) - 0.075).abs() < 1e-15);
        assert!(crlb(0.0, 1).is_infinite());
        assert!((crlb(9.0, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_finds_heisenberg_for_unitary() {
        let spec = ModelSpec::with_limit(ModelName::Dephasing, 1.0, true).unwrap();
        let ch = models::build(&spec, 0.0).unwrap();
        let r = optimize_input(&ch, 2, 4, 7).unwrap();
        assert!((r.best_qfi - 4.0).abs() < 1e-6, "{}", r.best_qfi);
        assert!((r.delta_phi * r.best_qfi.sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_is_deterministic() {
        let ch = models::build(&ModelSpec::new(ModelName::Dephasing, 0.8).unwrap(), 0.0).unwrap();
        let a = optimize_input(&ch, 1, 3, 11).unwrap();
        let b = optimize_input(&ch, 1, 3, 11).unwrap();
        assert_eq!(a, b);
        assert!((a.best_qfi - 0.64).abs() < 1e-8);
    }
}
