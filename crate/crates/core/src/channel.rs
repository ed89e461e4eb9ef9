// SPDX-License-Identifier: Apache-2.0

//! Channel data model.
//!
//! A [`Channel`] stores the Kraus operators `Kᵢ(φ₀)` of a one-parameter
//! family `Λ_φ` together with their derivatives `K̇ᵢ(φ₀)`. Everything the
//! bound computations need is local to `φ₀`, so no other point of the
//! family is ever represented.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, eigh, identity, kron, op_norm, sandwich_local, vec_row_major, CMat, CVec, I,
};

/// Default dense-entry budget for tensor powers (2²⁶ complex numbers).
pub const DEFAULT_BUDGET: usize = 1 << 26;

/// Numerical tolerances shared by validation and the bound routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Trace preservation: `‖ΣKᵢ†Kᵢ − 𝟙‖` and its derivative.
    pub tp: f64,
    /// Positive semi-definiteness margin, relative to the largest eigenvalue.
    pub psd: f64,
    /// Linear independence: smallest Gram eigenvalue must exceed this.
    pub li: f64,
    /// Hermiticity, relative to the matrix norm.
    pub herm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tp: 1e-10,
            psd: 1e-9,
            li: 1e-10,
            herm: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Channel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMat>,
    kraus_dot: Vec<CMat>,
    phi0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub completeness_defect: f64,
    pub derivative_defect: f64,
    /// Smallest eigenvalue of the Kraus Gram matrix `Tr(Kᵢ†Kⱼ)`.
    pub independence_margin: f64,
    pub choi_min_eigenvalue: f64,
    pub valid: bool,
    pub failures: Vec<String>,
}

impl Channel {
    /// Assemble a channel after shape and finiteness checks only. Use
    /// [`Channel::validate`] (or [`Channel::new`]) for the physical checks.
    pub fn from_parts(kraus: Vec<CMat>, kraus_dot: Vec<CMat>, phi0: f64) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Input("empty Kraus list".into()))?;
        let (d_out, d_in) = first.shape();
        if d_in == 0 || d_out == 0 {
            return Err(Error::Input("Kraus operators must be non-empty".into()));
        }
        if kraus_dot.len() != kraus.len() {
            return Err(Error::DimensionMismatch {
                expected: kraus.len(),
                got: kraus_dot.len(),
            });
        }
        for m in kraus.iter().chain(&kraus_dot) {
            if m.shape() != (d_out, d_in) {
                return Err(Error::Input(format!(
                    "Kraus operator of shape {:?}, expected {:?}",
                    m.shape(),
                    (d_out, d_in)
                )));
            }
            if !linalg::is_finite(m) {
                return Err(Error::Input("non-finite Kraus entry".into()));
            }
        }
        if !phi0.is_finite() {
            return Err(Error::Input("phi0 must be finite".into()));
        }
        Ok(Self {
            d_in,
            d_out,
            kraus,
            kraus_dot,
            phi0,
        })
    }

    /// Assemble and validate with default tolerances.
    pub fn new(kraus: Vec<CMat>, kraus_dot: Vec<CMat>, phi0: f64) -> Result<Self> {
        let ch = Self::from_parts(kraus, kraus_dot, phi0)?;
        ch.ensure_valid(&Tolerances::default())?;
        Ok(ch)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Number of Kraus operators.
    pub fn k(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn kraus_dot(&self) -> &[CMat] {
        &self.kraus_dot
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// `Σ Kᵢ†Kᵢ`.
    pub fn completeness(&self) -> CMat {
        self.kraus
            .iter()
            .fold(linalg::zeros(self.d_in, self.d_in), |acc, k| acc + k.ad_mul(k))
    }

    /// Gram matrix `Gᵢⱼ = Tr(Kᵢ†Kⱼ)` of the Kraus operators as vectors.
    pub fn gram(&self) -> CMat {
        let vs: Vec<CVec> = self.kraus.iter().map(vec_row_major).collect();
        CMat::from_fn(self.k(), self.k(), |i, j| vs[i].dotc(&vs[j]))
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let completeness_defect = op_norm(&(self.completeness() - identity(self.d_in)));
        let deriv = self
            .kraus
            .iter()
            .zip(&self.kraus_dot)
            .fold(linalg::zeros(self.d_in, self.d_in), |acc, (k, kd)| {
                acc + kd.ad_mul(k) + k.ad_mul(kd)
            });
        let derivative_defect = op_norm(&deriv);
        let independence_margin = eigh(&self.gram()).min();
        let (p, _) = self.choi_matrices();
        let choi = eigh(&p);
        let choi_min_eigenvalue = choi.min();

        let mut failures = Vec::new();
        if completeness_defect > tol.tp {
            failures.push(format!("completeness defect {completeness_defect:.6e}"));
        }
        if derivative_defect > tol.tp {
            failures.push(format!("derivative consistency defect {derivative_defect:.6e}"));
        }
        if independence_margin <= tol.li {
            failures.push(format!(
                "Kraus operators linearly dependent (Gram margin {independence_margin:.6e})"
            ));
        }
        if choi_min_eigenvalue < -tol.psd * choi.max().abs().max(1.0) {
            failures.push(format!("Choi matrix not PSD ({choi_min_eigenvalue:.6e})"));
        }
        ValidationReport {
            completeness_defect,
            derivative_defect,
            independence_margin,
            choi_min_eigenvalue,
            valid: failures.is_empty(),
            failures,
        }
    }

    /// Validation as a `Result`, carrying the first failing defect.
    pub fn ensure_valid(&self, tol: &Tolerances) -> Result<()> {
        let report = self.validate(tol);
        if report.valid {
            return Ok(());
        }
        let defect = if report.completeness_defect > tol.tp {
            report.completeness_defect
        } else if report.derivative_defect > tol.tp {
            report.derivative_defect
        } else if report.independence_margin <= tol.li {
            report.independence_margin
        } else {
            report.choi_min_eigenvalue
        };
        Err(Error::Validation {
            what: report.failures.join("; "),
            defect,
        })
    }

    /// Choi matrix and its derivative, `P = Σ|Kᵢ⟩⟨Kᵢ|` with `|Kᵢ⟩ = (Kᵢ⊗𝟙)|Φ⟩`
    /// and `|Φ⟩ = Σⱼ|j⟩|j⟩` unnormalised.
    fn choi_matrices(&self) -> (CMat, CMat) {
        let n = self.d_in * self.d_out;
        let mut p = linalg::zeros(n, n);
        let mut d = linalg::zeros(n, n);
        for (k, kd) in self.kraus.iter().zip(&self.kraus_dot) {
            let v = vec_row_major(k);
            let vd = vec_row_major(kd);
            p += &v * v.adjoint();
            d += &vd * v.adjoint() + &v * vd.adjoint();
        }
        (p, d)
    }

    pub fn choi(&self) -> Result<ChoiPair> {
        self.ensure_valid(&Tolerances::default())?;
        let (p, d) = self.choi_matrices();
        Ok(ChoiPair {
            p,
            d,
            d_in: self.d_in,
            d_out: self.d_out,
        })
    }

    /// `Σ Kᵢ ρ Kᵢ†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input_dim(rho.dim())?;
        Ok(DensityMatrix::from_raw(self.apply_map(rho.matrix())))
    }

    /// `∂_φ Λ_φ[ρ] = Σ (K̇ᵢ ρ Kᵢ† + Kᵢ ρ K̇ᵢ†)`.
    pub fn apply_derivative(&self, rho: &DensityMatrix) -> Result<CMat> {
        self.check_input_dim(rho.dim())?;
        Ok(self.apply_derivative_map(rho.matrix()))
    }

    fn apply_map(&self, x: &CMat) -> CMat {
        self.kraus
            .iter()
            .fold(linalg::zeros(self.d_out, self.d_out), |acc, k| {
                acc + k * x * k.adjoint()
            })
    }

    fn apply_derivative_map(&self, x: &CMat) -> CMat {
        self.kraus
            .iter()
            .zip(&self.kraus_dot)
            .fold(linalg::zeros(self.d_out, self.d_out), |acc, (k, kd)| {
                let kx = k * x;
                let kdx = kd * x;
                acc + kdx * k.adjoint() + kx * kd.adjoint()
            })
    }

    fn check_input_dim(&self, dim: usize) -> Result<()> {
        if dim != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                got: dim,
            });
        }
        Ok(())
    }

    /// Apply `Λ^{⊗n}` and, when asked, its φ-derivative
    /// `Σₘ Λ^{⊗(m−1)} ⊗ ∂Λ ⊗ Λ^{⊗(n−m)}` to an `n`-probe state.
    ///
    /// The channel is applied one tensor factor at a time; the derivative is
    /// carried along by the product rule so no `k^n` Kraus strings are formed.
    pub fn tensor_apply(
        &self,
        n: usize,
        rho: &DensityMatrix,
        want_derivative: bool,
        budget: usize,
    ) -> Result<(DensityMatrix, Option<CMat>)> {
        if n == 0 {
            return Err(Error::Input("tensor power needs n ≥ 1".into()));
        }
        check_budget(self.d_in.max(self.d_out), n, budget)?;
        let in_dim = self.d_in.pow(n as u32);
        if rho.dim() != in_dim {
            return Err(Error::DimensionMismatch {
                expected: in_dim,
                got: rho.dim(),
            });
        }
        if n == 1 {
            let out = self.apply_map(rho.matrix());
            let d = want_derivative.then(|| self.apply_derivative_map(rho.matrix()));
            return Ok((DensityMatrix::from_raw(out), d));
        }
        let mut state = rho.matrix().clone();
        let mut deriv: Option<CMat> = None;
        for site in 0..n {
            let left = self.d_out.pow(site as u32);
            let right = self.d_in.pow((n - site - 1) as u32);
            let mut next = linalg::zeros(left * self.d_out * right, left * self.d_out * right);
            let mut next_d = want_derivative.then(|| next.clone());
            for (k, kd) in self.kraus.iter().zip(&self.kraus_dot) {
                next += sandwich_local(k, &state, k, left, right);
                if let Some(nd) = next_d.as_mut() {
                    *nd += sandwich_local(kd, &state, k, left, right);
                    *nd += sandwich_local(k, &state, kd, left, right);
                    if let Some(d) = deriv.as_ref() {
                        *nd += sandwich_local(k, d, k, left, right);
                    }
                }
            }
            state = next;
            deriv = next_d;
        }
        Ok((DensityMatrix::from_raw(state), deriv))
    }

    /// Replace the Kraus list by `K̃ᵢ = Σⱼ uᵢⱼ Kⱼ` for a constant unitary `u`.
    /// The channel and all local quantities are unchanged.
    pub fn mix_kraus(&self, u: &CMat) -> Result<Channel> {
        let k = self.k();
        if u.shape() != (k, k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: u.nrows(),
            });
        }
        if (u.ad_mul(u) - identity(k)).norm() > 1e-10 {
            return Err(Error::Input("Kraus mixing matrix is not unitary".into()));
        }
        let mix = |ops: &[CMat]| -> Vec<CMat> {
            (0..k)
                .map(|i| {
                    ops.iter()
                        .enumerate()
                        .fold(linalg::zeros(self.d_out, self.d_in), |acc, (j, op)| {
                            acc + op * u[(i, j)]
                        })
                })
                .collect()
        };
        Channel::from_parts(mix(&self.kraus), mix(&self.kraus_dot), self.phi0)
    }

    /// Re-express the channel with a linearly independent Kraus set by
    /// diagonalising the Gram matrix and dropping eigenvalues below `tol.li`.
    ///
    /// The derivative list goes through the same constant mixing. Dropped
    /// directions whose derivative is non-zero are lost with them.
    pub fn canonicalize(&self, tol: &Tolerances) -> Result<Channel> {
        let e = eigh(&self.gram());
        let mut kraus = Vec::new();
        let mut kraus_dot = Vec::new();
        for (idx, &lambda) in e.values.iter().enumerate().rev() {
            if lambda <= tol.li {
                continue;
            }
            let v = e.vectors.column(idx);
            let mut k = linalg::zeros(self.d_out, self.d_in);
            let mut kd = linalg::zeros(self.d_out, self.d_in);
            for (j, (kj, kdj)) in self.kraus.iter().zip(&self.kraus_dot).enumerate() {
                k += kj * v[j];
                kd += kdj * v[j];
            }
            kraus.push(k);
            kraus_dot.push(kd);
        }
        Channel::from_parts(kraus, kraus_dot, self.phi0)
    }
}

pub(crate) fn check_budget(dim: usize, n: usize, budget: usize) -> Result<()> {
    let required = (dim as u128)
        .checked_pow(2 * n as u32)
        .unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::Budget {
            required,
            limit: budget,
        });
    }
    Ok(())
}

/// Kraus operators and derivatives for `K(φ) = K·exp(iGφ)`, without validation.
pub fn phase_encoded_parts(
    kraus_noise: &[CMat],
    generator: &CMat,
    phi0: f64,
) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let d = generator.nrows();
    if generator.ncols() != d {
        return Err(Error::Input("generator must be square".into()));
    }
    if !linalg::is_finite(generator) {
        return Err(Error::Input("non-finite generator entry".into()));
    }
    let scale = generator.norm().max(1.0);
    if linalg::hermitian_defect(generator) > Tolerances::default().herm * scale {
        return Err(Error::Input("generator is not Hermitian".into()));
    }
    if let Some(k) = kraus_noise.iter().find(|k| k.ncols() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: k.ncols(),
        });
    }
    let u = linalg::expm_i_hermitian(generator, phi0);
    let gu = generator * &u;
    let kraus = kraus_noise.iter().map(|k| k * &u).collect();
    let kraus_dot = kraus_noise.iter().map(|k| (k * &gu) * I).collect();
    Ok((kraus, kraus_dot))
}

/// Concatenate a φ-independent noise map after the unitary `U_φ = exp(iGφ)`.
pub fn phase_encode(kraus_noise: &[CMat], generator: &CMat, phi0: f64) -> Result<Channel> {
    let (kraus, kraus_dot) = phase_encoded_parts(kraus_noise, generator, phi0)?;
    Channel::new(kraus, kraus_dot, phi0)
}

/// Choi matrix `P` of a channel and its derivative `D = ∂_φP`.
#[derive(Clone, Debug)]
pub struct ChoiPair {
    pub p: CMat,
    pub d: CMat,
    pub d_in: usize,
    pub d_out: usize,
}

impl ChoiPair {
    /// Output-space partial trace of `P`; the identity for a channel.
    pub fn trace_out(&self) -> CMat {
        linalg::partial_trace_first(&self.p, self.d_out, self.d_in)
    }

    pub fn check(&self, tol: &Tolerances) -> Result<()> {
        let n = self.d_in * self.d_out;
        if self.p.shape() != (n, n) || self.d.shape() != (n, n) {
            return Err(Error::Input("Choi pair shape mismatch".into()));
        }
        let scale = self.p.norm().max(1.0);
        if linalg::hermitian_defect(&self.p) > 1e-10 * scale
            || linalg::hermitian_defect(&self.d) > 1e-10 * scale
        {
            return Err(Error::Input("Choi pair is not Hermitian".into()));
        }
        let e = eigh(&self.p);
        if e.min() < -tol.psd * e.max().max(1.0) {
            return Err(Error::Validation {
                what: "Choi matrix is not PSD".into(),
                defect: e.min(),
            });
        }
        let tp = op_norm(&(self.trace_out() - identity(self.d_in)));
        if tp > tol.tp {
            return Err(Error::Validation {
                what: "Choi partial trace is not the identity".into(),
                defect: tp,
            });
        }
        let tr = linalg::trace(&self.d).norm();
        if tr > tol.tp * (self.d_in as f64) {
            return Err(Error::Validation {
                what: "Choi derivative is not traceless".into(),
                defect: tr,
            });
        }
        Ok(())
    }

    /// `Λ[ρ] = Tr_in[P (𝟙 ⊗ ρᵀ)]`, the Choi-side route to applying the channel.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let (dout, din) = (self.d_out, self.d_in);
        CMat::from_fn(dout, dout, |a, b| {
            let mut s = linalg::ZERO;
            for i in 0..din {
                for j in 0..din {
                    s += self.p[(a * din + i, b * din + j)] * rho[(i, j)];
                }
            }
            s
        })
    }
}

/// Unit-trace positive semi-definite matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || n == 0 {
            return Err(Error::Input("density matrix must be square".into()));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::Input("non-finite density matrix entry".into()));
        }
        if linalg::hermitian_defect(&matrix) > 1e-12 * matrix.norm().max(1.0) {
            return Err(Error::Input("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Validation {
                what: "density matrix trace".into(),
                defect: (tr - linalg::ONE).norm(),
            });
        }
        let min = eigh(&matrix).min();
        if min < -Tolerances::default().psd {
            return Err(Error::Validation {
                what: "density matrix not PSD".into(),
                defect: min,
            });
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Input("state vector must be non-zero".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self {
            matrix: &v * v.adjoint(),
        })
    }

    pub(crate) fn from_raw(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self::from_raw(kron(&self.matrix, &other.matrix))
    }
}
