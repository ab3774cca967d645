//! Dense discretizations of the linearized operators.
//!
//! Scalar operators act on samples at the nodes of a [`PeriodicGrid`].
//! The block operators `H` and `J` act on `(p2, p1, q, h)`; in the
//! constrained layout `q` is stored in an orthonormal trigonometric basis
//! `P` without the Nyquist mode and `h` in the basis `Q` which additionally
//! drops the constant mode.

use std::f64::consts::PI;

use faer::{Mat, MatRef};
use serde::Serialize;

use crate::elliptic::{self, EllipticModulus};
use crate::error::{Error, Result};
use crate::linalg;
use crate::waves::{DnoidalWave, PeriodicGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OperatorKind {
    Lminus,
    Lplus,
    Lame1,
    Lame2,
    H,
    J,
    JH,
}

impl OperatorKind {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, OperatorKind::J | OperatorKind::JH)
    }
}

/// A dense real matrix tagged with the grid it discretizes.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub kind: OperatorKind,
    pub matrix: Mat<f64>,
    pub grid: PeriodicGrid,
    /// `true` when the block layout uses the reduced bases.
    pub constrained: bool,
    pub layout: Option<BlockLayout>,
}

impl LinearOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        linalg::mat_vec(self.matrix.as_ref(), x)
    }

    /// Relative (anti)symmetry defect, `max|A ∓ Aᵀ| / max|A|`.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = linalg::max_abs(self.matrix.as_ref()).max(f64::MIN_POSITIVE);
        let anti = self.kind == OperatorKind::J;
        linalg::symmetry_defect(self.matrix.as_ref(), anti) / scale
    }

    fn layout(&self) -> Result<&BlockLayout> {
        self.layout
            .as_ref()
            .ok_or_else(|| Error::Contract(format!("{:?} has no block layout", self.kind)))
    }
}

/// Spectral differentiation matrices on a 2T-periodic grid.
///
/// `D1` has a zero Nyquist symbol and is exactly antisymmetric; `D2` carries
/// the full symbol `−k²` and is exactly symmetric.
pub fn fourier_derivative_matrices(grid: &PeriodicGrid) -> (Mat<f64>, Mat<f64>) {
    let n = grid.len();
    let scale = PI / grid.half_period();
    let h = 2.0 * PI / n as f64;
    let diag2 = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;

    let mut d1 = Mat::zeros(n, n);
    let mut d2 = Mat::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            if j == k {
                d2[(j, k)] = scale * scale * diag2;
                continue;
            }
            let offset = j as isize - k as isize;
            let sign = if offset.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let half = 0.5 * offset as f64 * h;
            d1[(j, k)] = scale * 0.5 * sign / half.tan();
            d2[(j, k)] = -scale * scale * sign / (2.0 * half.sin().powi(2));
        }
    }
    (d1, d2)
}

fn schrodinger(d2: &Mat<f64>, potential: &[f64]) -> Mat<f64> {
    let n = potential.len();
    Mat::from_fn(n, n, |i, j| {
        let v = if i == j { potential[i] } else { 0.0 };
        v - d2[(i, j)]
    })
}

/// `L− = −∂² + σ + ψ` or `L+ = −∂² + σ − 3φ²/(2(1−c²))`.
pub fn assemble_scalar(kind: OperatorKind, wave: &DnoidalWave) -> Result<LinearOperator> {
    let (sigma, gamma) = (wave.params.sigma, wave.params.gamma());
    let potential: Vec<f64> = match kind {
        OperatorKind::Lminus => wave.psi.iter().map(|p| sigma + p).collect(),
        OperatorKind::Lplus => wave
            .phi
            .iter()
            .map(|f| sigma - 3.0 * f * f / (2.0 * gamma))
            .collect(),
        other => {
            return Err(Error::Contract(format!(
                "assemble_scalar expects Lminus or Lplus, got {other:?}"
            )))
        }
    };
    let (_, d2) = fourier_derivative_matrices(&wave.grid);
    Ok(LinearOperator {
        kind,
        matrix: schrodinger(&d2, &potential),
        grid: wave.grid.clone(),
        constrained: false,
        layout: None,
    })
}

/// Period of the Lamé problem in units of K(κ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LamePeriod {
    TwoK,
    FourK,
}

/// `Λ1 = −∂² + 6κ²sn²` or `Λ2 = −∂² + 2κ²sn²` on `[0, L)`, `L ∈ {2K, 4K}`.
pub fn assemble_lame(
    kind: OperatorKind,
    kappa: f64,
    period: LamePeriod,
    n: usize,
) -> Result<LinearOperator> {
    let coupling = match kind {
        OperatorKind::Lame1 => 6.0,
        OperatorKind::Lame2 => 2.0,
        other => {
            return Err(Error::Contract(format!(
                "assemble_lame expects Lame1 or Lame2, got {other:?}"
            )))
        }
    };
    let m = EllipticModulus::admissible(kappa)?;
    let k = elliptic::complete_k(m)?;
    let length = match period {
        LamePeriod::TwoK => 2.0 * k,
        LamePeriod::FourK => 4.0 * k,
    };
    let grid = PeriodicGrid::new(n, 0.5 * length)?;
    let mut potential = Vec::with_capacity(n);
    for x in grid.nodes() {
        let (sn, _, _) = elliptic::jacobi_sn_cn_dn(x + 0.5 * length, m)?;
        potential.push(coupling * m.parameter() * sn * sn);
    }
    let (_, d2) = fourier_derivative_matrices(&grid);
    Ok(LinearOperator {
        kind,
        matrix: schrodinger(&d2, &potential),
        grid,
        constrained: false,
        layout: None,
    })
}

/// Closed-form lowest eigenvalues on `[0, 4K]`: `(ν0..ν3)` of `Λ1` and
/// `(ε0..ε2)` of `Λ2`, ascending.
pub fn lame_eigenvalues_analytic(kappa: f64) -> Result<([f64; 4], [f64; 3])> {
    let k2 = EllipticModulus::admissible(kappa)?.parameter();
    let root = (1.0 - k2 + k2 * k2).sqrt();
    Ok((
        [
            2.0 + 2.0 * k2 - 2.0 * root,
            1.0 + k2,
            1.0 + 4.0 * k2,
            4.0 + k2,
        ],
        [k2, 1.0, 1.0 + k2],
    ))
}

/// Four grid functions `(p2, p1, q, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector(pub [Vec<f64>; 4]);

impl BlockVector {
    pub fn zeros(n: usize) -> Self {
        Self([vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]])
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.0[i]
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &BlockVector, b: f64) -> BlockVector {
        let mut out = self.clone();
        for (u, v) in out.0.iter_mut().zip(&other.0) {
            for (x, y) in u.iter_mut().zip(v) {
                *x = a * *x + b * y;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .map(|b| linalg::max_abs_vec(b))
            .fold(0.0, f64::max)
    }
}

/// Coordinates of the block operators: how `q` and `h` are represented.
#[derive(Debug, Clone)]
pub struct BlockLayout {
    n: usize,
    p: Mat<f64>,
    q: Mat<f64>,
}

impl BlockLayout {
    /// Identity bases (plain `4n` grid values).
    pub fn unconstrained(n: usize) -> Self {
        Self {
            n,
            p: Mat::identity(n, n),
            q: Mat::identity(n, n),
        }
    }

    /// Orthonormal trigonometric bases; `P` spans all resolved modes,
    /// `Q` the mean-zero ones.
    pub fn constrained(n: usize) -> Self {
        Self {
            n,
            p: trig_basis(n, true),
            q: trig_basis(n, false),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q_dim(&self) -> usize {
        self.p.ncols()
    }

    pub fn h_dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn dim(&self) -> usize {
        2 * self.n + self.q_dim() + self.h_dim()
    }

    pub fn p(&self) -> MatRef<'_, f64> {
        self.p.as_ref()
    }

    pub fn q(&self) -> MatRef<'_, f64> {
        self.q.as_ref()
    }

    /// Offsets of the four blocks in the flat coordinate vector.
    pub fn offsets(&self) -> [usize; 5] {
        let n = self.n;
        [0, n, 2 * n, 2 * n + self.q_dim(), self.dim()]
    }

    pub fn reduce(&self, v: &BlockVector) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&v.0[0]);
        out.extend_from_slice(&v.0[1]);
        out.extend(transpose_apply(self.p.as_ref(), &v.0[2]));
        out.extend(transpose_apply(self.q.as_ref(), &v.0[3]));
        out
    }

    pub fn lift(&self, x: &[f64]) -> BlockVector {
        let o = self.offsets();
        BlockVector([
            x[o[0]..o[1]].to_vec(),
            x[o[1]..o[2]].to_vec(),
            linalg::mat_vec(self.p.as_ref(), &x[o[2]..o[3]]),
            linalg::mat_vec(self.q.as_ref(), &x[o[3]..o[4]]),
        ])
    }
}

fn transpose_apply(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| a.col(j).iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

fn trig_basis(n: usize, with_constant: bool) -> Mat<f64> {
    let half = n / 2;
    let cols = if with_constant { n - 1 } else { n - 2 };
    let offset = usize::from(with_constant);
    let w = (2.0 / n as f64).sqrt();
    Mat::from_fn(n, cols, |j, col| {
        if with_constant && col == 0 {
            return 1.0 / (n as f64).sqrt();
        }
        let idx = col - offset;
        let k = idx / 2 + 1;
        debug_assert!(k < half);
        let theta = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
        if idx % 2 == 0 {
            w * theta.cos()
        } else {
            w * theta.sin()
        }
    })
}

fn put(dst: &mut Mat<f64>, r0: usize, c0: usize, block: MatRef<'_, f64>) {
    for j in 0..block.ncols() {
        for i in 0..block.nrows() {
            dst[(r0 + i, c0 + j)] = block[(i, j)];
        }
    }
}

fn layout_for(n: usize, constrained: bool) -> BlockLayout {
    if constrained {
        BlockLayout::constrained(n)
    } else {
        BlockLayout::unconstrained(n)
    }
}

/// `H = [[L−,0,0,0],[0,L−,φ,0],[0,φ,1,−c],[0,0,−c,1]]`.
pub fn assemble_h(wave: &DnoidalWave, constrained: bool) -> Result<LinearOperator> {
    let n = wave.len();
    let c = wave.params.c;
    let lminus = assemble_scalar(OperatorKind::Lminus, wave)?.matrix;
    let layout = layout_for(n, constrained);
    let (p, q) = (layout.p(), layout.q());
    let o = layout.offsets();

    let mut h = Mat::zeros(layout.dim(), layout.dim());
    put(&mut h, o[0], o[0], lminus.as_ref());
    put(&mut h, o[1], o[1], lminus.as_ref());
    let phi_p = Mat::from_fn(n, p.ncols(), |i, j| wave.phi[i] * p[(i, j)]);
    put(&mut h, o[1], o[2], phi_p.as_ref());
    put(&mut h, o[2], o[1], phi_p.transpose());
    put(
        &mut h,
        o[2],
        o[2],
        Mat::<f64>::identity(p.ncols(), p.ncols()).as_ref(),
    );
    let coupling = (p.transpose() * q) * faer::Scale(-c);
    put(&mut h, o[2], o[3], coupling.as_ref());
    put(&mut h, o[3], o[2], coupling.transpose());
    put(
        &mut h,
        o[3],
        o[3],
        Mat::<f64>::identity(q.ncols(), q.ncols()).as_ref(),
    );

    Ok(LinearOperator {
        kind: OperatorKind::H,
        matrix: h,
        grid: wave.grid.clone(),
        constrained,
        layout: Some(layout),
    })
}

/// `J = [[0,−1,0,0],[1,0,0,0],[0,0,0,−∂],[0,0,−∂,0]]`.
pub fn assemble_j(grid: &PeriodicGrid, constrained: bool) -> Result<LinearOperator> {
    let n = grid.len();
    let layout = layout_for(n, constrained);
    let (p, q) = (layout.p(), layout.q());
    let o = layout.offsets();
    let (d1, _) = fourier_derivative_matrices(grid);

    let mut j = Mat::zeros(layout.dim(), layout.dim());
    for i in 0..n {
        j[(o[0] + i, o[1] + i)] = -1.0;
        j[(o[1] + i, o[0] + i)] = 1.0;
    }
    let upper = (p.transpose() * &d1 * q) * faer::Scale(-1.0);
    let lower = (q.transpose() * &d1 * p) * faer::Scale(-1.0);
    put(&mut j, o[2], o[3], upper.as_ref());
    put(&mut j, o[3], o[2], lower.as_ref());

    Ok(LinearOperator {
        kind: OperatorKind::J,
        matrix: j,
        grid: grid.clone(),
        constrained,
        layout: Some(layout),
    })
}

/// The product `JH`.
pub fn assemble_jh(j: &LinearOperator, h: &LinearOperator) -> Result<LinearOperator> {
    if j.kind != OperatorKind::J || h.kind != OperatorKind::H {
        return Err(Error::Contract("assemble_jh expects (J, H)".into()));
    }
    if j.constrained != h.constrained || j.grid != h.grid {
        return Err(Error::Contract(
            "J and H live on different grids or layouts".into(),
        ));
    }
    Ok(LinearOperator {
        kind: OperatorKind::JH,
        matrix: &j.matrix * &h.matrix,
        grid: h.grid.clone(),
        constrained: h.constrained,
        layout: h.layout.clone(),
    })
}

/// Explicit kernel and generalized-kernel elements of `JH`.
#[derive(Debug, Clone)]
pub struct KernelVectors {
    pub psi1: BlockVector,
    pub psi2: BlockVector,
    pub eta1: BlockVector,
    pub eta2: BlockVector,
    pub eta_tilde1: BlockVector,
    pub eta_tilde3: BlockVector,
    /// Mean-zero adjoint vector over `psi2`: `JH·eta4 = psi2`.
    pub eta4: BlockVector,
    /// `y = L+⁻¹φ`, normalized by `y ⟂ φ′`.
    pub y: Vec<f64>,
    /// `⟨L+⁻¹φ, φ⟩` by quadrature.
    pub inner_i: f64,
    /// `2T + c²I/(1−c²)`, the coefficient of `η1` in `eta_tilde1`.
    pub second_factor: f64,
}

/// Builds the kernel vectors from the closed formulas, with `L+⁻¹φ` and
/// `L−⁻¹φ′` obtained by bordered solves.
pub fn assemble_kernel_vectors(wave: &DnoidalWave) -> Result<KernelVectors> {
    let n = wave.len();
    let grid = &wave.grid;
    let c = wave.params.c;
    let g = wave.params.gamma();
    let t2 = 2.0 * grid.half_period();
    let phi = &wave.phi;
    let dphi = &wave.dphi;

    let lplus = assemble_scalar(OperatorKind::Lplus, wave)?;
    let lminus = assemble_scalar(OperatorKind::Lminus, wave)?;
    let (y, _) = linalg::bordered_solve(lplus.matrix.as_ref(), dphi, phi)?;
    let inner_i = grid.inner(&y, phi);

    let zero = vec![0.0; n];
    let map = |f: &dyn Fn(usize) -> f64| (0..n).map(f).collect::<Vec<f64>>();

    let psi1 = BlockVector([phi.clone(), zero.clone(), zero.clone(), zero.clone()]);
    let psi2 = BlockVector([
        zero.clone(),
        dphi.clone(),
        map(&|i| phi[i] * dphi[i] / (c * c - 1.0)),
        map(&|i| c * phi[i] * dphi[i] / (c * c - 1.0)),
    ]);
    let eta1 = BlockVector([
        zero.clone(),
        map(&|i| -y[i] / g),
        map(&|i| 1.0 / g + phi[i] * y[i] / (g * g)),
        map(&|i| c / g + c * phi[i] * y[i] / (g * g)),
    ]);
    let eta2 = BlockVector([
        zero.clone(),
        map(&|i| -c * y[i] / g),
        map(&|i| c / g + c * phi[i] * y[i] / (g * g)),
        map(&|i| 1.0 / g + c * c * phi[i] * y[i] / (g * g)),
    ]);
    let a = t2 + c * c * inner_i / g;
    let b = c * (t2 + inner_i / g);
    let eta_tilde1 = eta1.combine(-a, &eta2, b);
    let eta_tilde3 = BlockVector([zero.clone(), zero.clone(), vec![1.0; n], zero.clone()]);

    if a.abs() < 1e-14 * t2 {
        return Err(Error::KernelDegeneracy(
            "2T + c²I/(1−c²) vanishes; the adjoint chain over Ψ2 is undefined".into(),
        ));
    }
    let (v1, _) = linalg::bordered_solve(lminus.matrix.as_ref(), phi, dphi)?;
    let e = -grid.inner(phi, phi) / (2.0 * a);
    let v2 = map(&|i| c * phi[i] / g - c * e * y[i] / g);
    let v3 = map(&|i| c * e / g + c * e * phi[i] * y[i] / (g * g));
    let v4 = map(&|i| c * v3[i] + phi[i] * phi[i] / (2.0 * g) + e);
    let eta4 = BlockVector([v1, v2, v3, v4]);

    Ok(KernelVectors {
        psi1,
        psi2,
        eta1,
        eta2,
        eta_tilde1,
        eta_tilde3,
        eta4,
        y,
        inner_i,
        second_factor: a,
    })
}

impl KernelVectors {
    /// Reduced coordinates of `[Ψ1, Ψ2]`, `[.., η̃1]` and `[.., η̃3, η4]`
    /// stacked as columns of one matrix, in that order.
    pub fn generalized_kernel_basis(&self, layout: &BlockLayout) -> Mat<f64> {
        let cols: Vec<Vec<f64>> = [
            &self.psi1,
            &self.psi2,
            &self.eta_tilde1,
            &self.eta_tilde3,
            &self.eta4,
        ]
        .iter()
        .map(|v| layout.reduce(v))
        .collect();
        Mat::from_fn(layout.dim(), cols.len(), |i, j| cols[j][i])
    }
}

/// `max|A x − b| / (max|A|·max|x|)` for block vectors in reduced coordinates.
pub fn block_residual(op: &LinearOperator, x: &BlockVector, b: &BlockVector) -> Result<f64> {
    let layout = op.layout()?;
    let ax = op.apply(&layout.reduce(x));
    let rb = layout.reduce(b);
    let num = ax
        .iter()
        .zip(&rb)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    let scale = linalg::norm_inf(op.matrix.as_ref()) * linalg::max_abs_vec(&layout.reduce(x));
    Ok(num / scale.max(f64::MIN_POSITIVE))
}

/// Applies a block operator to a block vector and lifts the result back to
/// grid values.
pub fn apply_block(op: &LinearOperator, x: &BlockVector) -> Result<BlockVector> {
    let layout = op.layout()?;
    Ok(layout.lift(&op.apply(&layout.reduce(x))))
}

/// `⟨A x, y⟩` with trapezoidal weights, in reduced coordinates.
pub fn quadratic_form(op: &LinearOperator, x: &BlockVector, y: &BlockVector) -> Result<f64> {
    let layout = op.layout()?;
    let ax = op.apply(&layout.reduce(x));
    Ok(op.grid.step() * linalg::dot(&ax, &layout.reduce(y)))
}
