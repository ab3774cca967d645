//! Dnoidal wave profiles φ(x) = φ0 dn(αx, κ) and their parameter tuples.

use std::f64::consts::PI;

use serde::Serialize;

use crate::elliptic::{self, EllipticModulus};
use crate::error::{Error, Result};

/// Uniform grid on [−T, T) with periodic wrap; `x_j = −T + j·2T/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    half_period: f64,
}

impl PeriodicGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n: usize, half_period: f64) -> Result<Self> {
        if n < Self::MIN_POINTS || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be even and at least {}",
                Self::MIN_POINTS
            )));
        }
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half period {half_period} must be positive"
            )));
        }
        Ok(Self { n, half_period })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_period / self.n as f64
    }

    /// Computed as `(j − n/2)·h` so that `x_{n−j} = −x_j` exactly.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Trapezoidal quadrature of a periodic integrand over one period.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        self.step() * f.iter().sum::<f64>()
    }

    /// L² inner product ⟨f, g⟩ by the trapezoidal rule.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        debug_assert_eq!(g.len(), self.n);
        self.step() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// The full parameter tuple of a dnoidal traveling wave.
///
/// `l` is `Some` only when the periodicity constraint c·T = 2πl was enforced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveParameters {
    pub kappa: f64,
    pub c: f64,
    pub l: Option<i64>,
    pub sigma: f64,
    pub alpha: f64,
    pub phi0: f64,
    pub phi1: f64,
    /// Half period T; the fundamental period is 2T = 2K(κ)/α.
    pub half_period: f64,
    pub omega: f64,
    pub a1: f64,
}

impl WaveParameters {
    pub fn modulus(&self) -> EllipticModulus {
        EllipticModulus::new(self.kappa).expect("validated at construction")
    }

    /// 1 − c².
    pub fn gamma(&self) -> f64 {
        1.0 - self.c * self.c
    }

    /// c·T / (2π); equals `l` in periodic-carrier mode.
    pub fn winding(&self) -> f64 {
        self.c * self.half_period / (2.0 * PI)
    }
}

/// How the free parameter of the family is pinned down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parameterization {
    /// Enforce c·T = 2πl (carrier wave u is 2T-periodic). Requires c ≠ 0.
    Winding(i64),
    /// Prescribe σ directly; T follows from κ and σ.
    Sigma(f64),
}

/// Resolves a consistent parameter tuple from κ, c and either `l` or `σ`.
pub fn resolve_parameters(
    kappa: f64,
    c: f64,
    l: Option<i64>,
    sigma: Option<f64>,
) -> Result<WaveParameters> {
    let mode = match (l, sigma) {
        (Some(l), None) => Parameterization::Winding(l),
        (None, Some(s)) => Parameterization::Sigma(s),
        (Some(_), Some(_)) => {
            return Err(Error::InvalidParameters(
                "supply exactly one of l or sigma".into(),
            ))
        }
        (None, None) => {
            return Err(Error::InvalidParameters(
                "one of l or sigma is required".into(),
            ))
        }
    };
    resolve(kappa, c, mode)
}

pub fn resolve(kappa: f64, c: f64, mode: Parameterization) -> Result<WaveParameters> {
    let m = EllipticModulus::admissible(kappa)?;
    if !c.is_finite() || c.abs() >= 1.0 {
        return Err(Error::DegenerateSpeed(c.abs()));
    }
    let k = elliptic::complete_k(m)?;
    let kappa2 = m.parameter();

    let (sigma, alpha, half_period, l) = match mode {
        Parameterization::Winding(l) => {
            if l == 0 {
                return Err(Error::InvalidParameters(
                    "l = 0 leaves T free; use sigma instead".into(),
                ));
            }
            if c == 0.0 {
                return Err(Error::InvalidParameters(
                    "c = 0 leaves T free; use sigma instead".into(),
                ));
            }
            if (l > 0) != (c > 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "l = {l} and c = {c} must share a sign (c -> -c, x -> -x maps one to the other)"
                )));
            }
            let t = 2.0 * PI * l as f64 / c;
            let alpha = k / t;
            (alpha * alpha * (2.0 - kappa2), alpha, t, Some(l))
        }
        Parameterization::Sigma(sigma) => {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "sigma = {sigma} must be positive"
                )));
            }
            let alpha = (sigma / (2.0 - kappa2)).sqrt();
            (sigma, alpha, k / alpha, None)
        }
    };

    let gamma = 1.0 - c * c;
    let phi0 = 2.0 * alpha * gamma.sqrt();
    let phi1 = phi0 * m.kappa_prime();
    Ok(WaveParameters {
        kappa,
        c,
        l,
        sigma,
        alpha,
        phi0,
        phi1,
        half_period,
        omega: -sigma - c * c / 4.0,
        a1: -(phi0 * phi0) * (phi1 * phi1),
    })
}

/// A dnoidal profile sampled on a periodic grid, with analytic derivatives.
#[derive(Debug, Clone)]
pub struct DnoidalWave {
    pub params: WaveParameters,
    pub grid: PeriodicGrid,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub ddphi: Vec<f64>,
    /// ψ = −φ²/(2(1−c²)).
    pub psi: Vec<f64>,
}

/// Samples φ, φ′, φ″ and ψ at the `n` grid nodes of [−T, T).
pub fn sample_wave(params: &WaveParameters, n: usize) -> Result<DnoidalWave> {
    let grid = PeriodicGrid::new(n, params.half_period)?;
    let m = params.modulus();
    let (alpha, phi0, kappa2) = (params.alpha, params.phi0, m.parameter());
    let gamma = params.gamma();

    let mut phi = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    let mut ddphi = Vec::with_capacity(n);
    for x in grid.nodes() {
        let (sn, cn, dn) = elliptic::jacobi_sn_cn_dn(alpha * x, m)?;
        phi.push(phi0 * dn);
        dphi.push(-phi0 * alpha * kappa2 * sn * cn);
        ddphi.push(-phi0 * alpha * alpha * kappa2 * dn * (cn * cn - sn * sn));
    }
    let psi = phi.iter().map(|p| -p * p / (2.0 * gamma)).collect();
    Ok(DnoidalWave {
        params: params.clone(),
        grid,
        phi,
        dphi,
        ddphi,
        psi,
    })
}

impl DnoidalWave {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// max_j |−φ″ + σφ − φ³/(2(1−c²))|.
    pub fn ode_residual(&self) -> f64 {
        let (sigma, gamma) = (self.params.sigma, self.params.gamma());
        self.phi
            .iter()
            .zip(&self.ddphi)
            .map(|(&p, &pp)| (-pp + sigma * p - p * p * p / (2.0 * gamma)).abs())
            .fold(0.0, f64::max)
    }

    /// Natural size of the terms in the profile equation, σφ0 + φ0³/(2(1−c²)).
    pub fn ode_scale(&self) -> f64 {
        let p = &self.params;
        p.sigma * p.phi0 + p.phi0.powi(3) / (2.0 * p.gamma())
    }

    /// max_j |φ′² − (−φ⁴ + 4σ(1−c²)φ² + a1)/(4(1−c²))|.
    pub fn first_integral_residual(&self) -> f64 {
        let p = &self.params;
        let gamma = p.gamma();
        self.phi
            .iter()
            .zip(&self.dphi)
            .map(|(&f, &df)| {
                let f2 = f * f;
                let rhs = (-f2 * f2 + 4.0 * p.sigma * gamma * f2 + p.a1) / (4.0 * gamma);
                (df * df - rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Natural size of the terms in the first integral, φ0⁴/(4(1−c²)).
    pub fn first_integral_scale(&self) -> f64 {
        self.params.phi0.powi(4) / (4.0 * self.params.gamma())
    }
}
