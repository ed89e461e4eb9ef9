// SPDX-License-Identifier: Apache-2.0

//! Small dense semidefinite programs over Hermitian matrices.
//!
//! Dual (LMI) form, which is how the channel-extension problem arises:
//!
//! ```text
//!   maximise  bᵀy   subject to  Z = C − Σᵢ yᵢAᵢ ⪰ 0
//! ```
//!
//! with primal `minimise ⟨C,X⟩ s.t. ⟨Aᵢ,X⟩ = bᵢ, X ⪰ 0`, where
//! `⟨A,B⟩ = Re Tr(AB)`. Solved by an infeasible-start primal-dual
//! path-following method using the HKM search direction and Mehrotra's
//! predictor-corrector step.

use nalgebra::{Cholesky, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, hermitian_part, identity, inverse_hpd, re_trace_product, CMat, RMat};

#[derive(Clone, Debug)]
pub struct LmiProblem {
    pub c: CMat,
    pub a: Vec<CMat>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    pub max_iter: usize,
    /// Tolerance on the duality gap and on `⟨X,Z⟩`, relative to
    /// `1 + |primal| + |dual|`.
    pub gap_tol: f64,
    /// Relative tolerance on primal and dual residuals.
    pub feas_tol: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            max_iter: 120,
            gap_tol: 1e-10,
            feas_tol: 1e-11,
            step_fraction: 0.95,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: CMat,
    pub y: Vec<f64>,
    pub z: CMat,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `⟨X,Z⟩`, the complementary-slackness residual.
    pub complementarity: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SdpSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

impl LmiProblem {
    fn check(&self) -> Result<usize> {
        let n = self.c.nrows();
        if self.c.ncols() != n || self.a.iter().any(|a| a.shape() != (n, n)) {
            return Err(Error::Input("LMI matrices must share one square shape".into()));
        }
        if self.a.len() != self.b.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a.len(),
                got: self.b.len(),
            });
        }
        Ok(n)
    }

    fn apply_adjoint(&self, y: &[f64]) -> CMat {
        self.a
            .iter()
            .zip(y)
            .fold(linalg::zeros(self.c.nrows(), self.c.nrows()), |acc, (a, &yi)| {
                acc + a.scale(yi)
            })
    }

    /// The slack `C − Σ yᵢAᵢ` at a dual point.
    pub fn slack(&self, y: &[f64]) -> CMat {
        &self.c - self.apply_adjoint(y)
    }
}

/// Largest `α` with `X + α·dX ⪰ 0`, or infinity.
fn max_step(x: &CMat, dx: &CMat) -> Result<f64> {
    let chol = Cholesky::new(x.clone())
        .ok_or_else(|| Error::Solver("iterate lost positive definiteness".into()))?;
    let l = chol.l();
    let left = l
        .solve_lower_triangular(dx)
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    let w = l
        .solve_lower_triangular(&left.adjoint())
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    let lo = eigh(&w).min();
    Ok(if lo >= 0.0 { f64::INFINITY } else { -1.0 / lo })
}

struct Direction {
    dx: CMat,
    dy: Vec<f64>,
    dz: CMat,
}

pub fn solve(problem: &LmiProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    let n = problem.check()?;
    let m = problem.a.len();
    let nf = n as f64;

    let c_norm = problem.c.norm();
    let b_norm = problem.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let a_norms: Vec<f64> = problem.a.iter().map(|a| a.norm()).collect();
    let xi = problem
        .b
        .iter()
        .zip(&a_norms)
        .map(|(bi, an)| nf.sqrt() * (1.0 + bi.abs()) / (1.0 + an))
        .fold(10f64.max(nf.sqrt()), f64::max);
    let zeta = a_norms
        .iter()
        .copied()
        .fold(10f64.max(nf.sqrt()).max(c_norm), f64::max);

    let mut x = identity(n).scale(xi);
    let mut z = identity(n).scale(zeta);
    let mut y = vec![0.0; m];

    let mut last = None;
    for iter in 0..opts.max_iter {
        let rp: Vec<f64> = problem
            .a
            .iter()
            .zip(&problem.b)
            .map(|(a, bi)| bi - re_trace_product(a, &x))
            .collect();
        let rd = &problem.c - &z - problem.apply_adjoint(&y);
        let pobj = re_trace_product(&problem.c, &x);
        let dobj: f64 = problem.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let gap = re_trace_product(&x, &z);
        let rp_norm = rp.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rd_norm = rd.norm();

        let snapshot = SdpSolution {
            x: x.clone(),
            y: y.clone(),
            z: z.clone(),
            primal_objective: pobj,
            dual_objective: dobj,
            complementarity: gap,
            primal_residual: rp_norm,
            dual_residual: rd_norm,
            iterations: iter,
            converged: false,
        };
        let scale = 1.0 + pobj.abs() + dobj.abs();
        if gap <= opts.gap_tol * scale
            && (pobj - dobj).abs() <= opts.gap_tol * scale
            && rp_norm <= opts.feas_tol * (1.0 + b_norm)
            && rd_norm <= opts.feas_tol * (1.0 + c_norm)
        {
            return Ok(SdpSolution {
                converged: true,
                ..snapshot
            });
        }
        last = Some(snapshot);

        let mu = gap / nf;
        let zinv = inverse_hpd(&z);
        let t: Vec<CMat> = problem.a.iter().map(|a| &x * a * &zinv).collect();
        let mut schur = RMat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = re_trace_product(&problem.a[i], &t[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let schur_solve: Box<dyn Fn(&DVector<f64>) -> Result<DVector<f64>>> =
            match Cholesky::new(schur.clone()) {
                Some(ch) => Box::new(move |r| Ok(ch.solve(r))),
                None => {
                    let lu = schur.clone().lu();
                    Box::new(move |r| {
                        lu.solve(r)
                            .ok_or_else(|| Error::Solver("singular Schur complement".into()))
                    })
                }
            };

        let x_rd_zinv = &x * &rd * &zinv;
        let direction = |nu: f64, corr: Option<&CMat>| -> Result<Direction> {
            let mut r = identity(n).scale(nu) - &x * &z;
            if let Some(cm) = corr {
                r -= cm;
            }
            let base = &r * &zinv - &x_rd_zinv;
            let rhs = DVector::from_iterator(
                m,
                problem
                    .a
                    .iter()
                    .zip(&rp)
                    .map(|(a, rpi)| rpi - re_trace_product(a, &base)),
            );
            let dy = schur_solve(&rhs)?;
            let dx = hermitian_part(
                &t.iter()
                    .zip(dy.iter())
                    .fold(base, |acc, (tj, &d)| acc + tj.scale(d)),
            );
            let dz = &rd - problem.apply_adjoint(dy.as_slice());
            Ok(Direction {
                dx,
                dy: dy.as_slice().to_vec(),
                dz,
            })
        };

        let pred = direction(0.0, None)?;
        let ap = max_step(&x, &pred.dx)?.min(1.0);
        let ad = max_step(&z, &pred.dz)?.min(1.0);
        let mu_aff = re_trace_product(&(&x + pred.dx.scale(ap)), &(&z + pred.dz.scale(ad))) / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let corr = &pred.dx * &pred.dz;
        let step = direction(sigma * mu, Some(&corr))?;
        let ap = (opts.step_fraction * max_step(&x, &step.dx)?).min(1.0);
        let ad = (opts.step_fraction * max_step(&z, &step.dz)?).min(1.0);

        x = hermitian_part(&(&x + step.dx.scale(ap)));
        z = hermitian_part(&(&z + step.dz.scale(ad)));
        for (yi, d) in y.iter_mut().zip(&step.dy) {
            *yi += ad * d;
        }
    }
    let mut out = last.expect("at least one iteration");
    out.iterations = opts.max_iter;
    Ok(out)
}
