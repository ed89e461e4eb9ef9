// SPDX-License-Identifier: Apache-2.0

//! Classical-simulation bound.
//!
//! The channel at `φ₀` is written as a mixture of the two channels where the
//! tangent line `P ± ε·D` of the Choi trajectory leaves the PSD cone. The
//! hidden mixing label then carries all the information about φ, giving
//! `Δφ_N ≥ √(ε₊ε₋/N)`.
//!
//! φ-extremality is decided twice: from the pencil (`ε± > 0`) and from the
//! span condition `D = Σ μᵢⱼ|Kᵢ⟩⟨Kⱼ|` with Hermitian `μ`. The two must agree.

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, ChoiPair, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh, herm_norm, vec_row_major, CMat, CVec, RMat};

/// Relative residual below which `D` counts as lying in the Kraus span.
pub const TOL_MU: f64 = 1e-8;

/// Condition number beyond which the μ solve carries a warning.
const MU_CONDITION_WARN: f64 = 1e10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Largest feasible step along `±D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Epsilon {
    Finite(f64),
    /// A kernel vector of `P` is moved by `D`: no step is possible.
    Infeasible,
    /// `D` vanishes, so every step stays inside the cone.
    Unbounded,
}

impl Epsilon {
    pub fn value(self) -> f64 {
        match self {
            Epsilon::Finite(e) => e,
            Epsilon::Infeasible => 0.0,
            Epsilon::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_positive(self) -> bool {
        self.value() > 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    PhiNonextremal,
    PhiExtremal,
    /// Single Kraus operator: an isometry, extremal in the strongest sense.
    UnitaryLikeExtremal,
}

impl Classification {
    pub fn is_nonextremal(self) -> bool {
        self == Classification::PhiNonextremal
    }
}

/// `sup{ε ≥ 0 : P + sign·ε·D ⪰ 0}`.
pub fn epsilon_max(cp: &ChoiPair, sign: Sign, tol: &Tolerances) -> Result<Epsilon> {
    cp.check(tol)?;
    let e = eigh(&cp.p);
    let cut = tol.psd * e.max();
    let support: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > cut).collect();

    let d_scale = herm_norm(&cp.d);
    for i in (0..e.values.len()).filter(|i| !support.contains(i)) {
        let v = e.vectors.column(i);
        if (&cp.d * v).norm() > tol.psd * e.max().max(1.0) {
            return Ok(Epsilon::Infeasible);
        }
    }

    // Whiten the support: P̃^{-1/2} D̃ P̃^{-1/2}.
    let r = support.len();
    let w = CMat::from_fn(r, r, |a, b| {
        let va = e.vectors.column(support[a]);
        let vb = e.vectors.column(support[b]);
        let dab = va.dotc(&(&cp.d * vb));
        dab / (e.values[support[a]] * e.values[support[b]]).sqrt()
    });
    let top = eigh(&w.scale(-sign.factor())).max();
    let w_scale = herm_norm(&w);
    if top <= 1e-13 * w_scale.max(f64::MIN_POSITIVE) || w_scale == 0.0 {
        if d_scale > tol.tp {
            return Err(Error::Consistency(format!(
                "pencil unbounded although ‖D‖ = {d_scale:.3e} and Tr D = 0"
            )));
        }
        return Ok(Epsilon::Unbounded);
    }
    Ok(Epsilon::Finite(1.0 / top))
}

/// Outcome of solving `D = Σ μᵢⱼ|Kᵢ⟩⟨Kⱼ|` over Hermitian `μ`.
#[derive(Clone, Debug)]
pub struct MuCondition {
    /// Present when the residual is within `TOL_MU·‖D‖`.
    pub mu: Option<CMat>,
    /// Frobenius residual of the least-squares solve.
    pub residual: f64,
    /// `‖Σ μᵢⱼ Kⱼ†Kᵢ‖`, the output partial trace of the reconstructed `D`.
    pub choi_condition_residual: Option<f64>,
    pub condition_number: f64,
    pub ill_conditioned: bool,
}

pub fn mu_condition(ch: &Channel) -> Result<MuCondition> {
    ch.ensure_valid(&Tolerances::default())?;
    let cp = ch.choi()?;
    let k = ch.k();
    let n = ch.d_in() * ch.d_out();
    let kets: Vec<CVec> = ch.kraus().iter().map(vec_row_major).collect();

    // Column p of the design matrix is the real coordinate vector of
    // Σᵢⱼ (E_p)ᵢⱼ |Kᵢ⟩⟨Kⱼ| for the p-th Hermitian basis element E_p, so
    // μ is Hermitian by construction.
    let basis = linalg::hermitian_basis(k);
    let images: Vec<CMat> = basis
        .iter()
        .map(|e| {
            let mut m = linalg::zeros(n, n);
            for i in 0..k {
                for j in 0..k {
                    if e[(i, j)] != linalg::ZERO {
                        m += (&kets[i] * kets[j].adjoint()) * e[(i, j)];
                    }
                }
            }
            m
        })
        .collect();
    let rows = n * n;
    let mut design = RMat::zeros(rows, k * k);
    for (p, img) in images.iter().enumerate() {
        for (r, v) in linalg::hermitian_coords(img).into_iter().enumerate() {
            design[(r, p)] = v;
        }
    }
    let target = nalgebra::DVector::from_vec(linalg::hermitian_coords(&cp.d));

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let coords = svd
        .solve(&target, 1e-12 * smax)
        .map_err(|e| Error::Solver(format!("μ least squares: {e}")))?;
    let mu = linalg::from_hermitian_coords(k, coords.as_slice());
    let rebuilt = images
        .iter()
        .zip(coords.iter())
        .fold(linalg::zeros(n, n), |acc, (img, &x)| acc + img.scale(x));
    let residual = (&cp.d - &rebuilt).norm();
    let d_norm = herm_norm(&cp.d);

    // A derivative below the trace-preservation tolerance counts as zero,
    // matching the pencil test.
    let accepted = residual <= TOL_MU * d_norm || d_norm <= Tolerances::default().tp;
    let (mu, choi_condition_residual) = if accepted {
        let mut traced = linalg::zeros(ch.d_in(), ch.d_in());
        for i in 0..k {
            for j in 0..k {
                traced += ch.kraus()[j].ad_mul(&ch.kraus()[i]) * mu[(i, j)];
            }
        }
        (Some(mu), Some(traced.norm()))
    } else {
        (None, None)
    };
    Ok(MuCondition {
        mu,
        residual,
        choi_condition_residual,
        condition_number,
        ill_conditioned: condition_number > MU_CONDITION_WARN,
    })
}

/// φ-extremality from the pencil alone.
pub fn classify_by_epsilon(cp: &ChoiPair, k: usize, tol: &Tolerances) -> Result<Classification> {
    let plus = epsilon_max(cp, Sign::Plus, tol)?;
    let minus = epsilon_max(cp, Sign::Minus, tol)?;
    Ok(if plus.is_positive() && minus.is_positive() {
        Classification::PhiNonextremal
    } else if k == 1 {
        Classification::UnitaryLikeExtremal
    } else {
        Classification::PhiExtremal
    })
}

/// Pencil classification, cross-checked against the μ condition.
pub fn classify_phi_extremality(ch: &Channel) -> Result<Classification> {
    let cp = ch.choi()?;
    let by_eps = classify_by_epsilon(&cp, ch.k(), &Tolerances::default())?;
    let mu = mu_condition(ch)?;
    check_agreement(by_eps, &mu, herm_norm(&cp.d))?;
    Ok(by_eps)
}

fn check_agreement(by_eps: Classification, mu: &MuCondition, d_norm: f64) -> Result<()> {
    if by_eps.is_nonextremal() != mu.mu.is_some() {
        return Err(Error::Consistency(format!(
            "pencil test says {by_eps:?} but μ residual is {:.3e}",
            mu.residual
        )));
    }
    if let Some(r) = mu.choi_condition_residual {
        if r > TOL_MU * d_norm.max(1.0) {
            return Err(Error::Consistency(format!(
                "μ reproduces D but violates the traced Choi condition ({r:.3e})"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsResult {
    #[serde(with = "finite_or_null")]
    pub eps_plus: f64,
    #[serde(with = "finite_or_null")]
    pub eps_minus: f64,
    /// `√(ε₊ε₋)`; `Δφ_N ≥ bound_const/√N`. Absent when not applicable.
    pub bound_const: Option<f64>,
    pub classification: Classification,
    /// `1/(ε₊ε₋)`, the per-probe classical Fisher information of the simulation.
    pub f_cl: Option<f64>,
    pub residual_mu: f64,
}

impl CsResult {
    pub fn applicable(&self) -> bool {
        self.bound_const.is_some()
    }

    /// Lower bound on `Δφ_N`, if the method applies.
    pub fn delta_phi(&self, n: usize) -> Option<f64> {
        self.bound_const.map(|c| c / (n as f64).sqrt())
    }
}

pub fn cs_bound(ch: &Channel) -> Result<CsResult> {
    let tol = Tolerances::default();
    let cp = ch.choi()?;
    let plus = epsilon_max(&cp, Sign::Plus, &tol)?;
    let minus = epsilon_max(&cp, Sign::Minus, &tol)?;
    let classification = if plus.is_positive() && minus.is_positive() {
        Classification::PhiNonextremal
    } else if ch.k() == 1 {
        Classification::UnitaryLikeExtremal
    } else {
        Classification::PhiExtremal
    };
    let mu = mu_condition(ch)?;
    check_agreement(classification, &mu, herm_norm(&cp.d))?;

    let (bound_const, f_cl) = match (plus, minus) {
        (Epsilon::Finite(a), Epsilon::Finite(b)) if a > 0.0 && b > 0.0 => {
            (Some((a * b).sqrt()), Some(1.0 / (a * b)))
        }
        _ => (None, None),
    };
    Ok(CsResult {
        eps_plus: plus.value(),
        eps_minus: minus.value(),
        bound_const,
        classification,
        f_cl,
        residual_mu: mu.residual,
    })
}

/// Explicit two-point local simulation at `φ₀`.
#[derive(Clone, Debug)]
pub struct TangentSimulation {
    /// Choi matrix `P + ε₊D`.
    pub lambda_plus: CMat,
    /// Choi matrix `P − ε₋D`.
    pub lambda_minus: CMat,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_dot_plus: f64,
    pub p_dot_minus: f64,
}

impl TangentSimulation {
    /// Mixing probabilities at `φ`, `p±(φ) = (ε∓ ± (φ−φ₀))/(ε₊+ε₋)`.
    pub fn probabilities_at(&self, offset: f64) -> (f64, f64) {
        let s = self.eps_plus + self.eps_minus;
        ((self.eps_minus + offset) / s, (self.eps_plus - offset) / s)
    }

    pub fn fisher(&self) -> Result<f64> {
        classical_fisher(
            &[self.p_plus, self.p_minus],
            &[self.p_dot_plus, self.p_dot_minus],
        )
    }
}

pub fn tangent_simulation(ch: &Channel) -> Result<TangentSimulation> {
    let tol = Tolerances::default();
    let cp = ch.choi()?;
    let plus = epsilon_max(&cp, Sign::Plus, &tol)?;
    let minus = epsilon_max(&cp, Sign::Minus, &tol)?;
    let (ep, em) = match (plus, minus) {
        (Epsilon::Finite(a), Epsilon::Finite(b)) if a > 0.0 && b > 0.0 => (a, b),
        _ => {
            return Err(Error::NotApplicable(
                "channel is φ-extremal; no tangent simulation exists".into(),
            ))
        }
    };
    let s = ep + em;
    Ok(TangentSimulation {
        lambda_plus: &cp.p + cp.d.scale(ep),
        lambda_minus: &cp.p - cp.d.scale(em),
        eps_plus: ep,
        eps_minus: em,
        p_plus: em / s,
        p_minus: ep / s,
        p_dot_plus: 1.0 / s,
        p_dot_minus: -1.0 / s,
    })
}

/// `F_cl = Σ ṗᵢ²/pᵢ`. Returns `f64::INFINITY` when a zero-probability
/// outcome has non-zero derivative.
pub fn classical_fisher(p: &[f64], p_dot: &[f64]) -> Result<f64> {
    const TOL: f64 = 1e-12;
    if p.len() != p_dot.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: p_dot.len(),
        });
    }
    if p.iter().chain(p_dot).any(|x| !x.is_finite()) {
        return Err(Error::Input("non-finite probability data".into()));
    }
    if p.iter().any(|&x| x < -TOL) {
        return Err(Error::Input("negative probability".into()));
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(Error::Input("probabilities do not sum to one".into()));
    }
    if p_dot.iter().sum::<f64>().abs() > 1e-10 {
        return Err(Error::Input("probability derivatives do not sum to zero".into()));
    }
    let mut f = 0.0;
    for (&pi, &di) in p.iter().zip(p_dot) {
        if pi <= TOL {
            if di.abs() > TOL {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        f += di * di / pi;
    }
    Ok(f)
}

/// Serialise non-finite floats as `null` and read `null` back as infinity.
pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::phase_encode;
    use crate::linalg::{identity, pauli};

    fn g() -> CMat {
        pauli(3).scale(0.5)
    }

    fn dephasing(eta: f64) -> Channel {
        let noise = vec![
            identity(2).scale(((1.0 + eta) / 2.0).sqrt()),
            pauli(3).scale(((1.0 - eta) / 2.0).sqrt()),
        ];
        phase_encode(&noise, &g(), 0.0).unwrap()
    }

    fn depolarizing(eta: f64) -> Channel {
        let mut noise = vec![identity(2).scale(((1.0 + 3.0 * eta) / 4.0).sqrt())];
        for i in 1..=3 {
            noise.push(pauli(i).scale(((1.0 - eta) / 4.0).sqrt()));
        }
        phase_encode(&noise, &g(), 0.0).unwrap()
    }

    fn spontaneous(eta: f64) -> Channel {
        let k0 = CMat::from_row_slice(2, 2, &[linalg::ONE, linalg::ZERO, linalg::ZERO, linalg::c(eta.sqrt(), 0.0)]);
        let k1 = CMat::from_row_slice(
            2,
            2,
            &[linalg::ZERO, linalg::c((1.0 - eta).sqrt(), 0.0), linalg::ZERO, linalg::ZERO],
        );
        phase_encode(&[k0, k1], &g(), 0.0).unwrap()
    }

    #[test]
    fn dephasing_epsilons() {
        let cp = dephasing(0.8).choi().unwrap();
        let tol = Tolerances::default();
        for s in [Sign::Plus, Sign::Minus] {
            let e = epsilon_max(&cp, s, &tol).unwrap().value();
            assert!((e - 0.75).abs() < 1e-12, "{e}");
        }
    }

    #[test]
    fn depolarizing_epsilons() {
        let cp = depolarizing(0.5).choi().unwrap();
        let e = epsilon_max(&cp, Sign::Plus, &Tolerances::default()).unwrap().value();
        assert!((e - 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unitary_channel_is_infeasible() {
        let ch = phase_encode(&[identity(2)], &g(), 0.0).unwrap();
        let cp = ch.choi().unwrap();
        assert_eq!(
            epsilon_max(&cp, Sign::Plus, &Tolerances::default()).unwrap(),
            Epsilon::Infeasible
        );
        assert_eq!(
            classify_phi_extremality(&ch).unwrap(),
            Classification::UnitaryLikeExtremal
        );
        assert!(mu_condition(&ch).unwrap().mu.is_none());
    }

    #[test]
    fn phi_independent_channel_is_unbounded() {
        let noise: Vec<CMat> = (0..4).map(|i| pauli(i).scale(0.5)).collect();
        let ch = phase_encode(&noise, &g(), 0.0).unwrap();
        let cp = ch.choi().unwrap();
        assert_eq!(
            epsilon_max(&cp, Sign::Minus, &Tolerances::default()).unwrap(),
            Epsilon::Unbounded
        );
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_phi_extremality(&dephasing(0.8)).unwrap(),
            Classification::PhiNonextremal
        );
        assert_eq!(
            classify_phi_extremality(&spontaneous(0.5)).unwrap(),
            Classification::PhiExtremal
        );
    }

    #[test]
    fn dephasing_mu_is_off_diagonal() {
        let ch = dephasing(0.8);
        let mu = mu_condition(&ch).unwrap();
        let m = mu.mu.expect("μ exists for dephasing");
        // D = iη(|00⟩⟨11| − |11⟩⟨00|) in Choi space, and |K₀⟩ ± |K₁⟩ pick
        // out |00⟩ and |11⟩, so μ₀₁ = −i·η/(2ab) with 2ab = √(1−η²).
        let expected = 0.8 / (1.0f64 - 0.64).sqrt();
        assert!(m[(0, 0)].norm() < 1e-12 && m[(1, 1)].norm() < 1e-12);
        assert!((m[(0, 1)].im.abs() - expected).abs() < 1e-10);
        assert!((m[(0, 1)] - m[(1, 0)].conj()).norm() < 1e-14);
        assert!(mu.choi_condition_residual.unwrap() < 1e-12);
    }

    #[test]
    fn spontaneous_emission_has_no_mu() {
        for eta in [0.1, 0.5, 0.9] {
            let mu = mu_condition(&spontaneous(eta)).unwrap();
            assert!(mu.mu.is_none());
            assert!(mu.residual > 1e-3);
        }
    }

    #[test]
    fn cs_bound_examples() {
        let r = cs_bound(&dephasing(0.8)).unwrap();
        assert!((r.bound_const.unwrap() - 0.75).abs() < 1e-12);
        assert!((r.bound_const.unwrap().powi(2) * r.f_cl.unwrap() - 1.0).abs() < 1e-12);
        let r = cs_bound(&depolarizing(0.5)).unwrap();
        assert!((r.bound_const.unwrap() - 1.25f64.sqrt()).abs() < 1e-12);
        let r = cs_bound(&spontaneous(0.5)).unwrap();
        assert!(!r.applicable());
        assert_eq!(r.classification, Classification::PhiExtremal);
    }

    #[test]
    fn tangent_simulation_examples() {
        let ts = tangent_simulation(&dephasing(0.8)).unwrap();
        assert!((ts.p_plus - 0.5).abs() < 1e-12 && (ts.p_minus - 0.5).abs() < 1e-12);
        assert!((ts.fisher().unwrap() - 1.0 / 0.5625).abs() < 1e-10);
        assert!((ts.p_dot_plus - 1.0 / 1.5).abs() < 1e-12);

        let ts = tangent_simulation(&depolarizing(0.5)).unwrap();
        assert!((ts.fisher().unwrap() - 0.8).abs() < 1e-10);

        assert!(matches!(
            tangent_simulation(&spontaneous(0.5)),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn tangent_mixture_reproduces_choi_pair() {
        let ch = depolarizing(0.3);
        let cp = ch.choi().unwrap();
        let ts = tangent_simulation(&ch).unwrap();
        let p = ts.lambda_plus.scale(ts.p_plus) + ts.lambda_minus.scale(ts.p_minus);
        let d = ts.lambda_plus.scale(ts.p_dot_plus) + ts.lambda_minus.scale(ts.p_dot_minus);
        assert!((p - &cp.p).norm() < 1e-10);
        assert!((d - &cp.d).norm() < 1e-10);
        let (a, b) = ts.probabilities_at(0.0);
        assert!((a - ts.p_plus).abs() < 1e-15 && (b - ts.p_minus).abs() < 1e-15);
    }

    #[test]
    fn classical_fisher_examples() {
        assert!((classical_fisher(&[0.5, 0.5], &[0.5, -0.5]).unwrap() - 1.0).abs() < 1e-15);
        let s = 1.5;
        let f = classical_fisher(&[0.5, 0.5], &[1.0 / s, -1.0 / s]).unwrap();
        assert!((f - 1.0 / 0.5625).abs() < 1e-12);
        assert_eq!(classical_fisher(&[1.0, 0.0], &[1.0, -1.0]).unwrap(), f64::INFINITY);
        assert!(classical_fisher(&[0.5, 0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let r = cs_bound(&spontaneous(0.5)).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"classification\":\"phi_extremal\""));
        let back: CsResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
