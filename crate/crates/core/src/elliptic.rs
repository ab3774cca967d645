//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Everything here takes the *modulus* κ, never the parameter m = κ².
//! `dn(u, κ)` means the same thing as in the wave formula φ(x) = φ0 dn(αx, κ).
//!
//! `K` and `E` come from the arithmetic–geometric mean, the Jacobi functions
//! from the AGM phase recursion (descending Gauss transformation). Both
//! converge quadratically, so a handful of iterations reaches machine
//! precision for any κ < 1.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Smallest modulus accepted by the wave construction.
pub const KAPPA_MIN: f64 = 1e-3;
/// Largest modulus accepted by the wave construction.
pub const KAPPA_MAX: f64 = 1.0 - 1e-6;

const MAX_AGM_STEPS: usize = 64;

/// An elliptic modulus κ ∈ [0, 1] together with its complement κ′ = √(1−κ²).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EllipticModulus {
    kappa: f64,
    kappa_prime: f64,
}

impl EllipticModulus {
    /// Accepts any κ in the closed interval [0, 1].
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || !(0.0..=1.0).contains(&kappa) {
            return Err(Error::ModulusOutOfRange(kappa));
        }
        // (1-κ)(1+κ) keeps κ′ accurate as κ → 1.
        let kappa_prime = ((1.0 - kappa) * (1.0 + kappa)).sqrt();
        Ok(Self { kappa, kappa_prime })
    }

    /// Like [`EllipticModulus::new`] but restricted to the window
    /// [`KAPPA_MIN`], [`KAPPA_MAX`] used for wave construction.
    pub fn admissible(kappa: f64) -> Result<Self> {
        let m = Self::new(kappa)?;
        if kappa == 0.0 || kappa == 1.0 {
            return Err(Error::ModulusOutOfRange(kappa));
        }
        if !(KAPPA_MIN..=KAPPA_MAX).contains(&kappa) {
            return Err(Error::ModulusOutsideWindow {
                kappa,
                lo: KAPPA_MIN,
                hi: KAPPA_MAX,
            });
        }
        Ok(m)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_prime(&self) -> f64 {
        self.kappa_prime
    }

    /// κ².
    pub fn parameter(&self) -> f64 {
        self.kappa * self.kappa
    }
}

/// Complete elliptic integral of the first kind, K(κ) = π / (2 AGM(1, κ′)).
///
/// Diverges logarithmically as κ → 1; κ = 1 is rejected.
pub fn complete_k(m: EllipticModulus) -> Result<f64> {
    if m.kappa >= 1.0 {
        return Err(Error::ModulusOutOfRange(m.kappa));
    }
    let (a, _) = agm_with_energy(m);
    Ok(FRAC_PI_2 / a)
}

/// Complete elliptic integral of the second kind, E(κ). E(1) = 1.
pub fn complete_e(m: EllipticModulus) -> Result<f64> {
    if m.kappa >= 1.0 {
        return Ok(1.0);
    }
    let (a, sum) = agm_with_energy(m);
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

/// Both complete integrals from a single AGM run.
pub fn complete_k_e(m: EllipticModulus) -> Result<(f64, f64)> {
    if m.kappa >= 1.0 {
        return Err(Error::ModulusOutOfRange(m.kappa));
    }
    let (a, sum) = agm_with_energy(m);
    let k = FRAC_PI_2 / a;
    Ok((k, k * (1.0 - sum)))
}

/// Returns AGM(1, κ′) and Σ 2^{n−1} c_n², with c_0 = κ.
fn agm_with_energy(m: EllipticModulus) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = m.kappa_prime;
    let mut c = m.kappa;
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..MAX_AGM_STEPS {
        if c <= f64::EPSILON * a {
            break;
        }
        let a_next = 0.5 * (a + b);
        let b_next = (a * b).sqrt();
        // c_{n+1} = (a_n - b_n)/2 = c_n² / (4 a_{n+1}), cancellation-free.
        c = c * c / (4.0 * a_next);
        a = a_next;
        b = b_next;
        weight *= 2.0;
        sum += weight * c * c;
    }
    (a, sum)
}

/// Jacobi elliptic functions `(sn, cn, dn)` of argument `u` and modulus κ.
pub fn jacobi_sn_cn_dn(u: f64, m: EllipticModulus) -> Result<(f64, f64, f64)> {
    if !u.is_finite() {
        return Err(Error::NonFiniteArgument(u));
    }
    if m.kappa >= 1.0 {
        return Err(Error::ModulusOutOfRange(m.kappa));
    }
    if m.kappa == 0.0 {
        return Ok((u.sin(), u.cos(), 1.0));
    }

    let k = complete_k(m)?;
    let period = 4.0 * k;
    let u = u - period * (u / period).round();

    let mut a = [0.0_f64; MAX_AGM_STEPS + 1];
    let mut c = [0.0_f64; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    c[0] = m.kappa;
    let mut b = m.kappa_prime;
    let mut steps = 0;
    while steps < MAX_AGM_STEPS && c[steps] > f64::EPSILON * a[steps] {
        let an = a[steps];
        a[steps + 1] = 0.5 * (an + b);
        c[steps + 1] = c[steps] * c[steps] / (4.0 * a[steps + 1]);
        b = (an * b).sqrt();
        steps += 1;
    }

    let mut phi = (1u64 << steps) as f64 * a[steps] * u;
    for n in (1..=steps).rev() {
        phi = 0.5 * (phi + (c[n] / a[n] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let kp = m.kappa_prime;
    let dn = (kp * kp + m.kappa * m.kappa * cn * cn).sqrt();
    Ok((sn, cn, dn))
}
