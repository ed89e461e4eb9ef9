// SPDX-License-Identifier: Apache-2.0

//! Seeded random states, unitaries and channels for tests and property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{phase_encode, Channel};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVec {
    let v = CVec::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Haar-random isometry with `cols ≤ rows` orthonormal columns.
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    assert!(cols <= rows);
    let qr = ginibre(rng, rows, cols).qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix the phases of R's diagonal so the distribution is exactly Haar.
    let mut q = q;
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    haar_isometry(rng, dim, dim)
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    let a = ginibre(rng, dim, dim);
    (&a + a.adjoint()).scale(0.5)
}

pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    let a = ginibre(rng, dim, dim);
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    m.unscale(tr)
}

/// `k` Kraus operators `d_out × d_in` cut from a Haar isometry
/// `C^{d_in} → C^{k·d_out}`. Linearly independent almost surely when
/// `k ≤ d_in·d_out`.
pub fn random_kraus<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, k: usize) -> Vec<CMat> {
    let v = haar_isometry(rng, k * d_out, d_in);
    (0..k)
        .map(|i| v.rows(i * d_out, d_out).into_owned())
        .collect()
}

/// Random noise followed by phase encoding with a random Hermitian generator.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    d_in: usize,
    d_out: usize,
    k: usize,
) -> Result<Channel> {
    if k * d_out < d_in {
        return Err(Error::Input(format!(
            "{k} Kraus operators of shape {d_out}x{d_in} cannot be trace preserving"
        )));
    }
    let kraus = random_kraus(rng, d_in, d_out, k);
    let g = random_hermitian(rng, d_in);
    let phi0 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    phase_encode(&kraus, &g, phi0)
}
