// SPDX-License-Identifier: Apache-2.0

//! Channel-extension bound.
//!
//! Kraus operators are rotated along φ by `u(φ) = exp[−ih(φ−φ₀)]`, which
//! changes `K̇ᵢ` into `K̇̃ᵢ = K̇ᵢ − iΣⱼhᵢⱼKⱼ` without changing the channel.
//! Whenever `β = iΣK̇̃ᵢ†Kᵢ` vanishes, `F_N ≤ 4N‖α‖` with `α = ΣK̇̃ᵢ†K̇̃ᵢ`.
//!
//! `β = 0` is linear in `h`; it is eliminated first, leaving an affine
//! family `h₀ + Σ c_q N_q`, and `‖α‖` is minimised over `c` as a
//! semidefinite program in `(c, √t)`.

pub mod descent;
pub mod sdp;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::channel::{Channel, Tolerances};
use crate::error::{Error, Result};
use crate::json::MatrixDoc;
use crate::linalg::{
    self, from_hermitian_coords, hermitian_basis, hermitian_coords, hermitian_defect, hermitian_part,
    identity, max_eigenvalue, op_norm, zeros, CMat, I,
};

/// Bound on `‖β‖` accepted for a solution of the β = 0 constraint.
pub const TOL_BETA: f64 = 1e-9;
/// Relative least-squares residual above which β = 0 is infeasible.
pub const TOL_RES: f64 = 1e-8;

/// Hermitian generator of the Kraus rotation.
#[derive(Clone, Debug, PartialEq)]
pub struct HMatrix(CMat);

impl HMatrix {
    pub fn new(h: CMat) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::Input(format!(
                "h must be square, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let defect = hermitian_defect(&h);
        if defect > Tolerances::default().herm {
            return Err(Error::Validation {
                what: "h is not Hermitian".into(),
                defect,
            });
        }
        Ok(Self(hermitian_part(&h)))
    }

    pub fn zero(k: usize) -> Self {
        Self(zeros(k, k))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

impl Serialize for HMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixDoc::from_matrix(&self.0).serialize(s)
    }
}

fn check_k(ch: &Channel, h: &HMatrix) -> Result<()> {
    if h.dim() != ch.k() {
        return Err(Error::DimensionMismatch {
            expected: ch.k(),
            got: h.dim(),
        });
    }
    Ok(())
}

/// The rotated derivatives `K̇̃ᵢ`.
pub fn rotated_derivatives(ch: &Channel, h: &HMatrix) -> Result<Vec<CMat>> {
    check_k(ch, h)?;
    let h = h.matrix();
    Ok(ch
        .kraus_dot()
        .iter()
        .enumerate()
        .map(|(i, kd)| {
            ch.kraus()
                .iter()
                .enumerate()
                .fold(kd.clone(), |acc, (j, kj)| acc - kj * (I * h[(i, j)]))
        })
        .collect())
}

/// `(α, β)` for the rotated Kraus representation.
pub fn alpha_beta(ch: &Channel, h: &HMatrix) -> Result<(CMat, CMat)> {
    let kt = rotated_derivatives(ch, h)?;
    let d = ch.d_in();
    let mut alpha = zeros(d, d);
    let mut beta = zeros(d, d);
    for (kd, k) in kt.iter().zip(ch.kraus()) {
        alpha += kd.adjoint() * kd;
        beta += kd.adjoint() * k;
    }
    Ok((alpha, beta * I))
}

/// `F_N ≤ 4{N‖α‖ + N(N−1)‖β‖²}`, valid for any `h`.
pub fn finite_n_bound(ch: &Channel, h: &HMatrix, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    let (alpha, beta) = alpha_beta(ch, h)?;
    let n = n as f64;
    let b = op_norm(&beta);
    Ok(4.0 * (n * max_eigenvalue(&alpha) + n * (n - 1.0) * b * b))
}

/// Solutions of `Σᵢⱼ hᵢⱼ Kᵢ†Kⱼ = iΣ K̇ᵢ†Kᵢ`.
#[derive(Clone, Debug)]
pub struct HParameterization {
    pub h0: HMatrix,
    /// Hermitian directions that leave the constraint unchanged.
    pub nullspace: Vec<CMat>,
    pub residual: f64,
}

impl HParameterization {
    pub fn at(&self, c: &[f64]) -> Result<HMatrix> {
        if c.len() != self.nullspace.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nullspace.len(),
                got: c.len(),
            });
        }
        let h = self
            .nullspace
            .iter()
            .zip(c)
            .fold(self.h0.matrix().clone(), |acc, (n, &ci)| acc + n.scale(ci));
        HMatrix::new(hermitian_part(&h))
    }
}

#[derive(Clone, Debug)]
pub enum BetaConstraint {
    Feasible(HParameterization),
    Infeasible { residual: f64 },
}

pub fn beta_constraint_solve(ch: &Channel) -> Result<BetaConstraint> {
    ch.ensure_valid(&Tolerances::default())?;
    let k = ch.k();
    let kraus = ch.kraus();
    let target = hermitian_part(
        &(ch.kraus_dot()
            .iter()
            .zip(kraus)
            .fold(zeros(ch.d_in(), ch.d_in()), |acc, (kd, kk)| acc + kd.adjoint() * kk)
            * I),
    );

    let basis = hermitian_basis(k);
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|e| {
            let mut l = zeros(ch.d_in(), ch.d_in());
            for i in 0..k {
                for j in 0..k {
                    if e[(i, j)] != linalg::ZERO {
                        l += kraus[i].adjoint() * &kraus[j] * e[(i, j)];
                    }
                }
            }
            hermitian_coords(&l)
        })
        .collect();
    let rows = columns[0].len();
    let cols = columns.len();
    let padded = rows.max(cols);
    let mut a = DMatrix::<f64>::zeros(padded, cols);
    for (q, col) in columns.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            a[(r, q)] = *v;
        }
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(padded);
    for (r, v) in hermitian_coords(&target).iter().enumerate() {
        rhs[r] = *v;
    }

    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = 1e-10 * sigma_max.max(1e-300);
    let x = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::Solver(format!("least-squares solve failed: {e}")))?;
    let h0 = hermitian_part(&from_hermitian_coords(k, x.as_slice()));

    let achieved = basis
        .iter()
        .zip(x.iter())
        .fold(zeros(ch.d_in(), ch.d_in()), |acc, (e, &xi)| {
            let mut l = zeros(ch.d_in(), ch.d_in());
            for i in 0..k {
                for j in 0..k {
                    l += kraus[i].adjoint() * &kraus[j] * e[(i, j)];
                }
            }
            acc + l.scale(xi)
        });
    let residual = op_norm(&(achieved - &target));
    if residual > TOL_RES * op_norm(&target).max(f64::MIN_POSITIVE) {
        return Ok(BetaConstraint::Infeasible { residual });
    }

    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Solver("SVD did not return right singular vectors".into()))?;
    let nullspace = (0..v_t.nrows())
        .filter(|&r| svd.singular_values[r] <= cutoff)
        .map(|r| {
            let coords: Vec<f64> = v_t.row(r).iter().copied().collect();
            from_hermitian_coords(k, &coords)
        })
        .collect();
    Ok(BetaConstraint::Feasible(HParameterization {
        h0: HMatrix(h0),
        nullspace,
        residual,
    }))
}

/// Rows `i·d_out..(i+1)·d_out` hold the i-th block.
fn stack(blocks: &[CMat]) -> CMat {
    let rows = blocks[0].nrows();
    let cols = blocks[0].ncols();
    let mut m = zeros(rows * blocks.len(), cols);
    for (i, b) in blocks.iter().enumerate() {
        m.view_mut((i * rows, 0), (rows, cols)).copy_from(b);
    }
    m
}

fn off_diagonal(m: &CMat) -> CMat {
    let d1 = m.ncols();
    let d2 = m.nrows();
    let mut a = zeros(d1 + d2, d1 + d2);
    a.view_mut((d1, 0), (d2, d1)).copy_from(m);
    a.view_mut((0, d1), (d1, d2)).copy_from(&m.adjoint());
    a
}

/// `[[√t·𝟙, K̇̃†], [K̇̃, √t·𝟙]]` with `K̇̃` the stacked rotated derivatives.
/// Positive semidefinite exactly when `α ⪯ t𝟙`.
pub fn assemble_lmi(ch: &Channel, h: &HMatrix, t: f64) -> Result<CMat> {
    if !(t >= 0.0) {
        return Err(Error::Input(format!("t must be non-negative, got {t}")));
    }
    let m = stack(&rotated_derivatives(ch, h)?);
    Ok(off_diagonal(&m) + identity(m.nrows() + m.ncols()).scale(t.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    /// Interior-point run converged with a duality-gap certificate.
    Optimal,
    /// Interior point failed; value from direct λ_max descent.
    Fallback,
    /// Direct λ_max descent was requested.
    Descent,
    /// β = 0 has no solution; no bound is certified.
    NotCertified,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub iterations: usize,
    pub duality_gap: Option<f64>,
    pub complementarity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CeResult {
    pub feasible: bool,
    pub h_opt: Option<HMatrix>,
    pub alpha_norm: Option<f64>,
    /// `Δφ_N ≥ bound_const/√N`; infinite (null in JSON) when `α` can vanish.
    pub bound_const: Option<f64>,
    pub t_opt: Option<f64>,
    pub beta_norm: Option<f64>,
    pub nullspace_dim: usize,
    pub solver: SolverReport,
}

impl CeResult {
    pub fn delta_phi(&self, n: usize) -> Option<f64> {
        self.bound_const.map(|c| c / (n as f64).sqrt())
    }

    /// `F_N ≤ 4N·‖α‖`.
    pub fn qfi_bound(&self, n: usize) -> Option<f64> {
        self.alpha_norm.map(|a| 4.0 * n as f64 * a)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Route {
    #[default]
    InteriorPoint,
    Descent,
}

pub fn ce_sdp_bound(ch: &Channel) -> Result<CeResult> {
    ce_bound_with(ch, Route::InteriorPoint)
}

pub fn ce_bound_with(ch: &Channel, route: Route) -> Result<CeResult> {
    let param = match beta_constraint_solve(ch)? {
        BetaConstraint::Infeasible { .. } => {
            return Ok(CeResult {
                feasible: false,
                h_opt: None,
                alpha_norm: None,
                bound_const: None,
                t_opt: None,
                beta_norm: None,
                nullspace_dim: 0,
                solver: SolverReport {
                    status: SolverStatus::NotCertified,
                    iterations: 0,
                    duality_gap: None,
                    complementarity: None,
                },
            })
        }
        BetaConstraint::Feasible(p) => p,
    };
    let m = param.nullspace.len();
    let m0 = stack(&rotated_derivatives(ch, &param.h0)?);
    let dirs: Vec<CMat> = param
        .nullspace
        .iter()
        .map(|nq| {
            let blocks: Vec<CMat> = (0..ch.k())
                .map(|i| {
                    ch.kraus()
                        .iter()
                        .enumerate()
                        .fold(zeros(ch.d_out(), ch.d_in()), |acc, (j, kj)| {
                            acc - kj * (I * nq[(i, j)])
                        })
                })
                .collect();
            stack(&blocks)
        })
        .collect();

    let (c, t_opt, solver) = match route {
        Route::InteriorPoint => {
            let mut a: Vec<CMat> = dirs.iter().map(|b| -off_diagonal(b)).collect();
            a.push(-identity(m0.nrows() + m0.ncols()));
            let mut b = vec![0.0; m];
            b.push(-1.0);
            let problem = sdp::LmiProblem {
                c: off_diagonal(&m0),
                a,
                b,
            };
            match sdp::solve(&problem, &sdp::SdpOptions::default()) {
                Ok(sol) if sol.converged => {
                    let s = sol.y[m];
                    (
                        sol.y[..m].to_vec(),
                        s * s,
                        SolverReport {
                            status: SolverStatus::Optimal,
                            iterations: sol.iterations,
                            duality_gap: Some(sol.duality_gap()),
                            complementarity: Some(sol.complementarity),
                        },
                    )
                }
                outcome => {
                    let start = outcome.ok().map(|s| s.y[..m].to_vec());
                    let r = descent::minimize_lambda_max(&m0, &dirs, start.as_deref());
                    (
                        r.c,
                        r.value,
                        SolverReport {
                            status: SolverStatus::Fallback,
                            iterations: r.iterations,
                            duality_gap: None,
                            complementarity: None,
                        },
                    )
                }
            }
        }
        Route::Descent => {
            let r = descent::minimize_lambda_max(&m0, &dirs, None);
            (
                r.c,
                r.value,
                SolverReport {
                    status: SolverStatus::Descent,
                    iterations: r.iterations,
                    duality_gap: None,
                    complementarity: None,
                },
            )
        }
    };

    let h_opt = param.at(&c)?;
    let (alpha, beta) = alpha_beta(ch, &h_opt)?;
    let alpha_norm = max_eigenvalue(&alpha).max(0.0);
    let bound_const = if alpha_norm > 0.0 {
        0.5 / alpha_norm.sqrt()
    } else {
        f64::INFINITY
    };
    Ok(CeResult {
        feasible: true,
        h_opt: Some(h_opt),
        alpha_norm: Some(alpha_norm),
        bound_const: Some(bound_const),
        t_opt: Some(t_opt),
        beta_norm: Some(op_norm(&beta)),
        nullspace_dim: m,
        solver,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, pauli};
    use crate::models::{self, ModelName, ModelSpec};

    fn model(name: ModelName, eta: f64) -> Channel {
        models::build(&ModelSpec::new(name, eta).unwrap(), 0.0).unwrap()
    }

    fn unitary() -> Channel {
        models::build(
            &ModelSpec::with_limit(ModelName::Dephasing, 1.0, true).unwrap(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn unitary_alpha_beta_at_zero_h() {
        let ch = unitary();
        let (alpha, beta) = alpha_beta(&ch, &HMatrix::zero(1)).unwrap();
        assert!((alpha - identity(2).scale(0.25)).norm() < 1e-14);
        assert!((op_norm(&beta) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn dephasing_reference_h() {
        let ch = model(ModelName::Dephasing, 0.8);
        let h = HMatrix::new(pauli(1).scale(1.0 / (2.0 * 0.6))).unwrap();
        let (alpha, beta) = alpha_beta(&ch, &h).unwrap();
        assert!(op_norm(&beta) < 1e-12);
        assert!((max_eigenvalue(&alpha) - 1.0 / 2.25).abs() < 1e-12);
    }

    #[test]
    fn spontaneous_emission_reference_h() {
        let ch = model(ModelName::SpontaneousEmission, 0.5);
        let mut h = zeros(2, 2);
        h[(0, 0)] = linalg::c(0.5, 0.0);
        h[(1, 1)] = linalg::c(-1.5, 0.0);
        let (_, beta) = alpha_beta(&ch, &HMatrix::new(h).unwrap()).unwrap();
        assert!(op_norm(&beta) < 1e-12);
    }

    #[test]
    fn hermiticity_is_enforced() {
        let mut h = zeros(2, 2);
        h[(0, 1)] = linalg::c(1.0, 0.0);
        assert!(HMatrix::new(h).is_err());
        let ch = model(ModelName::Dephasing, 0.5);
        assert!(matches!(
            alpha_beta(&ch, &HMatrix::zero(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unitary_constraint_is_infeasible() {
        assert!(matches!(
            beta_constraint_solve(&unitary()).unwrap(),
            BetaConstraint::Infeasible { .. }
        ));
        let r = ce_sdp_bound(&unitary()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.solver.status, SolverStatus::NotCertified);
    }

    #[test]
    fn spontaneous_emission_solution_is_unique() {
        let ch = model(ModelName::SpontaneousEmission, 0.7);
        let BetaConstraint::Feasible(p) = beta_constraint_solve(&ch).unwrap() else {
            panic!("expected a solution");
        };
        assert!(p.nullspace.is_empty());
        let expect = (pauli(3) - identity(2).scale(0.7)).scale(1.0 / 0.6);
        assert!((p.h0.matrix() - expect).norm() < 1e-10);
    }

    #[test]
    fn lossy_family_contains_reference() {
        let ch = model(ModelName::LossyInterferometer, 0.62);
        let BetaConstraint::Feasible(p) = beta_constraint_solve(&ch).unwrap() else {
            panic!("expected a solution");
        };
        let href = models::reference_h(&ModelSpec::new(ModelName::LossyInterferometer, 0.62).unwrap())
            .unwrap()
            .unwrap();
        // The difference must lie in the nullspace span.
        let diff = href.matrix() - p.h0.matrix();
        let proj = p
            .nullspace
            .iter()
            .fold(zeros(3, 3), |acc, n| acc + n.scale(linalg::re_trace_product(n, &diff) / n.norm_squared()));
        assert!((proj - &diff).norm() < 1e-9);
        for n in &p.nullspace {
            assert!(hermitian_defect(n) < 1e-14);
        }
    }

    #[test]
    fn lmi_matches_schur_complement() {
        let ch = model(ModelName::Dephasing, 0.8);
        let h = HMatrix::new(pauli(1).scale(1.0 / 1.2)).unwrap();
        let boundary = assemble_lmi(&ch, &h, 1.0 / 2.25).unwrap();
        assert!(eigh(&boundary).min().abs() < 1e-12);
        assert!(eigh(&assemble_lmi(&ch, &h, 0.5).unwrap()).min() > 0.0);
        assert!(eigh(&assemble_lmi(&ch, &h, 0.4).unwrap()).min() < 0.0);
        assert!(eigh(&assemble_lmi(&ch, &h, 1e6).unwrap()).min() > 0.0);
        assert!(assemble_lmi(&ch, &h, -1.0).is_err());

        let u = unitary();
        let a = assemble_lmi(&u, &HMatrix::zero(1), 0.25).unwrap();
        assert!(eigh(&a).min().abs() < 1e-14);
    }

    #[test]
    fn table_constants() {
        let cases = [
            (ModelName::Dephasing, 0.8, 0.75),
            (ModelName::Depolarizing, 0.5, 2f64.sqrt()),
            (ModelName::LossyInterferometer, 0.62, (0.38f64 / 0.62).sqrt()),
            (ModelName::SpontaneousEmission, 0.9, 0.5 * (0.1f64 / 0.9).sqrt()),
        ];
        for (name, eta, expect) in cases {
            let r = ce_sdp_bound(&model(name, eta)).unwrap();
            assert_eq!(r.solver.status, SolverStatus::Optimal, "{name:?}");
            let got = r.bound_const.unwrap();
            assert!((got - expect).abs() < 1e-7, "{name:?}: {got} vs {expect}");
            assert!(r.beta_norm.unwrap() < TOL_BETA);
            assert!((r.t_opt.unwrap() - r.alpha_norm.unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn descent_route_agrees() {
        for (name, eta) in [(ModelName::Depolarizing, 0.3), (ModelName::LossyInterferometer, 0.8)] {
            let ch = model(name, eta);
            let a = ce_sdp_bound(&ch).unwrap().t_opt.unwrap();
            let b = ce_bound_with(&ch, Route::Descent).unwrap().t_opt.unwrap();
            assert!((a - b).abs() < 1e-7 * a.max(1.0), "{name:?}: {a} vs {b}");
        }
    }

    #[test]
    fn finite_n_reduces_to_heisenberg_for_unitary() {
        let u = unitary();
        for n in 1..6 {
            let v = finite_n_bound(&u, &HMatrix::zero(1), n).unwrap();
            assert!((v - (n * n) as f64).abs() < 1e-12 * (n * n) as f64);
        }
        let ch = model(ModelName::Dephasing, 0.8);
        let h = HMatrix::new(pauli(1).scale(1.0 / 1.2)).unwrap();
        assert!((finite_n_bound(&ch, &h, 10).unwrap() - 40.0 / 2.25).abs() < 1e-10);
        assert!(finite_n_bound(&ch, &h, 0).is_err());
    }
}
