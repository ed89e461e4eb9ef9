// SPDX-License-Identifier: Apache-2.0

//! The four single-probe decoherence models: depolarisation, dephasing,
//! spontaneous emission and the lossy two-arm interferometer. Each is a
//! fixed noise map after the phase rotation `exp(iσ₃φ/2)`.
//!
//! Kraus operators are listed in a fixed order so that the reference `h`
//! matrices below index them consistently.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ce::HMatrix;
use crate::channel::{phase_encode, Channel};
use crate::error::{Error, Result};
use crate::linalg::{c, identity, pauli, zeros, CMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Depolarizing,
    Dephasing,
    SpontaneousEmission,
    LossyInterferometer,
}

impl ModelName {
    pub const ALL: [ModelName; 4] = [
        ModelName::Depolarizing,
        ModelName::Dephasing,
        ModelName::SpontaneousEmission,
        ModelName::LossyInterferometer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Depolarizing => "depolarizing",
            ModelName::Dephasing => "dephasing",
            ModelName::SpontaneousEmission => "spontaneous_emission",
            ModelName::LossyInterferometer => "lossy_interferometer",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Input(format!(
                    "unknown model {s:?}; expected one of depolarizing, dephasing, \
                     spontaneous_emission, lossy_interferometer"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: ModelName,
    pub eta: f64,
    /// Permit `η = 1`, where the noise disappears and the channel is unitary.
    #[serde(default)]
    pub unitary_limit: bool,
}

impl ModelSpec {
    pub fn new(name: ModelName, eta: f64) -> Result<Self> {
        Self::with_limit(name, eta, false)
    }

    pub fn with_limit(name: ModelName, eta: f64, unitary_limit: bool) -> Result<Self> {
        let spec = Self {
            name,
            eta,
            unitary_limit,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        let ok = if self.unitary_limit {
            (0.0..=1.0).contains(&self.eta)
        } else {
            (0.0..1.0).contains(&self.eta)
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "eta = {} outside [0, 1){}",
                self.eta,
                if self.eta == 1.0 {
                    "; pass the unitary-limit flag for eta = 1"
                } else {
                    ""
                }
            )))
        }
    }

    pub fn is_unitary(&self) -> bool {
        self.eta == 1.0
    }
}

/// The default phase generator `σ₃/2`.
pub fn generator() -> CMat {
    pauli(3).scale(0.5)
}

/// The φ-independent noise Kraus operators, in their fixed order. At
/// `η = 1` some of them are zero.
pub fn noise_kraus(spec: &ModelSpec) -> Result<Vec<CMat>> {
    spec.check()?;
    let eta = spec.eta;
    let r = |x: f64| c(x.max(0.0).sqrt(), 0.0);
    Ok(match spec.name {
        ModelName::Depolarizing => {
            let mut ks = vec![identity(2).scale(((1.0 + 3.0 * eta) / 4.0).sqrt())];
            ks.extend((1..=3).map(|i| pauli(i).scale(((1.0 - eta) / 4.0).sqrt())));
            ks
        }
        ModelName::Dephasing => vec![
            identity(2).scale(((1.0 + eta) / 2.0).sqrt()),
            pauli(3).scale(((1.0 - eta) / 2.0).sqrt()),
        ],
        ModelName::SpontaneousEmission => {
            let mut k0 = zeros(2, 2);
            k0[(0, 0)] = c(1.0, 0.0);
            k0[(1, 1)] = r(eta);
            let mut k1 = zeros(2, 2);
            k1[(0, 1)] = r(1.0 - eta);
            vec![k0, k1]
        }
        ModelName::LossyInterferometer => {
            let mut k0 = zeros(3, 2);
            k0[(2, 1)] = r(1.0 - eta);
            let mut k1 = zeros(3, 2);
            k1[(2, 0)] = r(1.0 - eta);
            let mut k2 = zeros(3, 2);
            k2[(0, 0)] = r(eta);
            k2[(1, 1)] = r(eta);
            vec![k0, k1, k2]
        }
    })
}

/// The phase-encoded channel at `φ₀`. In the unitary limit the vanishing
/// Kraus operators are dropped so the remaining set stays independent.
pub fn build(spec: &ModelSpec, phi0: f64) -> Result<Channel> {
    let mut kraus = noise_kraus(spec)?;
    if spec.is_unitary() {
        kraus.retain(|k| k.norm() > 0.0);
    }
    phase_encode(&kraus, &generator(), phi0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cs,
    Ce,
}

/// Closed-form bound constant `c` in `Δφ_N ≥ c/√N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReferenceBound {
    Value(f64),
    /// The method gives no bound for this model.
    NotApplicable,
    /// `η = 0`: the constant diverges and the channel carries no information.
    Diverges,
}

impl ReferenceBound {
    pub fn value(self) -> Option<f64> {
        match self {
            ReferenceBound::Value(v) => Some(v),
            _ => None,
        }
    }
}

pub fn reference_bound(spec: &ModelSpec, method: Method) -> Result<ReferenceBound> {
    spec.check()?;
    let eta = spec.eta;
    use ModelName::*;
    let applicable = !matches!(
        (spec.name, method),
        (SpontaneousEmission | LossyInterferometer, Method::Cs)
    );
    if !applicable {
        return Ok(ReferenceBound::NotApplicable);
    }
    if eta == 0.0 {
        return Ok(ReferenceBound::Diverges);
    }
    let value = match (spec.name, method) {
        (Depolarizing, Method::Cs) => ((1.0 - eta) * (1.0 + 3.0 * eta) / (4.0 * eta * eta)).sqrt(),
        (Depolarizing, Method::Ce) => ((1.0 + eta - 2.0 * eta * eta) / (2.0 * eta * eta)).sqrt(),
        (Dephasing, _) => (1.0 - eta * eta).sqrt() / eta,
        (SpontaneousEmission, Method::Ce) => 0.5 * ((1.0 - eta) / eta).sqrt(),
        (LossyInterferometer, Method::Ce) => ((1.0 - eta) / eta).sqrt(),
        _ => unreachable!(),
    };
    Ok(ReferenceBound::Value(value))
}

/// Optimal Kraus-rotation generators in closed form. `None` in the unitary
/// limit, where no `h` with `β = 0` exists.
pub fn reference_h(spec: &ModelSpec) -> Result<Option<HMatrix>> {
    spec.check()?;
    if spec.is_unitary() {
        return Ok(None);
    }
    let eta = spec.eta;
    let h = match spec.name {
        ModelName::Depolarizing => {
            let cc = 2.0 * (1.0 - eta) * (1.0 + 2.0 * eta);
            let a = ((1.0 - eta) * (1.0 + 3.0 * eta)).sqrt() / cc;
            let b = (1.0 + eta) / cc;
            let mut h = zeros(4, 4);
            h[(0, 3)] = c(a, 0.0);
            h[(3, 0)] = c(a, 0.0);
            h[(1, 2)] = c(0.0, -b);
            h[(2, 1)] = c(0.0, b);
            h
        }
        ModelName::Dephasing => pauli(1).scale(1.0 / (2.0 * (1.0 - eta * eta).sqrt())),
        ModelName::SpontaneousEmission => {
            (pauli(3) - identity(2).scale(eta)).scale(1.0 / (2.0 * (1.0 - eta)))
        }
        ModelName::LossyInterferometer => {
            // K₀ acts on |1⟩ and K₁ on |0⟩, so with G = σ₃/2 the β = 0
            // condition fixes h₀₀ = −h₁₁ = −1/(2(1−η)).
            let x = 1.0 / (2.0 * (1.0 - eta));
            let mut h = zeros(3, 3);
            h[(0, 0)] = c(-x, 0.0);
            h[(1, 1)] = c(x, 0.0);
            h
        }
    };
    HMatrix::new(h).map(Some)
}
