//! Eigenvalue counting for the symmetric operators and for `JH`.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{block_residual, BlockVector, KernelVectors, LinearOperator, OperatorKind};

/// Default relative zero threshold for symmetric operators.
pub const SYMMETRIC_ZERO_RTOL: f64 = 1e-11;
/// Default relative zero threshold for `JH`.
pub const HAMILTONIAN_ZERO_RTOL: f64 = 3e-9;
/// Imaginary eigenvalues closer than this (relative to the spectral radius)
/// are treated as one Krein cluster.
pub const KREIN_CLUSTER_RTOL: f64 = 1e-6;
/// Krein forms below this (relative to `‖H‖`) are indeterminate.
pub const KREIN_INDETERMINATE_RTOL: f64 = 1e-10;
/// Null-space threshold for the staircase on orthonormal coordinates.
const STAIRCASE_TOL: f64 = 1e-6;

/// Zero threshold for an operator: `user_tol` if given, otherwise a fixed
/// multiple of `‖A‖∞`, which bounds the spectral radius.
pub fn zero_threshold(op: &LinearOperator, user_tol: Option<f64>) -> f64 {
    if let Some(t) = user_tol {
        return t;
    }
    let rtol = if op.kind.is_symmetric() {
        SYMMETRIC_ZERO_RTOL
    } else {
        HAMILTONIAN_ZERO_RTOL
    };
    rtol * linalg::norm_inf(op.matrix.as_ref())
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelCorrelation {
    pub label: String,
    /// Cosine of the angle between the candidate and the numerical kernel.
    pub cosine: f64,
}

/// Spectrum of a symmetric operator.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub kind: OperatorKind,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub kernel_dim: usize,
    pub positive_count: usize,
    pub tol_zero: f64,
    pub kernel_correlations: Vec<KernelCorrelation>,
    /// Largest principal angle (radians) between the numerical kernel and the
    /// span of all candidates.
    pub kernel_angle: Option<f64>,
    #[serde(skip)]
    pub eigenvectors: Mat<f64>,
}

pub fn symmetric_spectrum(op: &LinearOperator, user_tol: Option<f64>) -> Result<SpectrumReport> {
    if !op.kind.is_symmetric() {
        return Err(Error::Contract(format!(
            "symmetric_spectrum called on {:?}",
            op.kind
        )));
    }
    let tol = zero_threshold(op, user_tol);
    let (eigenvalues, eigenvectors) = linalg::symmetric_eigen(op.matrix.as_ref())?;
    let morse_index = eigenvalues.iter().filter(|&&v| v < -tol).count();
    let kernel_dim = eigenvalues.iter().filter(|&&v| v.abs() <= tol).count();
    let positive_count = eigenvalues.len() - morse_index - kernel_dim;
    Ok(SpectrumReport {
        kind: op.kind,
        eigenvalues,
        morse_index,
        kernel_dim,
        positive_count,
        tol_zero: tol,
        kernel_correlations: Vec::new(),
        kernel_angle: None,
        eigenvectors,
    })
}

impl SpectrumReport {
    /// Orthonormal eigenvectors of the eigenvalues within `tol_zero` of 0.
    pub fn kernel_basis(&self) -> Mat<f64> {
        let idx: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&i| self.eigenvalues[i].abs() <= self.tol_zero)
            .collect();
        Mat::from_fn(self.eigenvectors.nrows(), idx.len(), |i, j| {
            self.eigenvectors[(i, idx[j])]
        })
    }

    /// Records kernel correlations against analytic candidates given in the
    /// operator's coordinates.
    pub fn correlate(&mut self, candidates: &[(&str, Vec<f64>)]) -> Result<()> {
        let basis = self.kernel_basis();
        self.kernel_correlations = candidates
            .iter()
            .map(|(label, v)| {
                let nv = linalg::norm(v);
                let coeffs: Vec<f64> = (0..basis.ncols())
                    .map(|j| basis.col(j).iter().zip(v).map(|(a, b)| a * b).sum())
                    .collect();
                let proj = linalg::norm(&coeffs);
                KernelCorrelation {
                    label: label.to_string(),
                    cosine: if nv > 0.0 { proj / nv } else { 0.0 },
                }
            })
            .collect();
        let cand = Mat::from_fn(basis.nrows(), candidates.len(), |i, j| candidates[j].1[i]);
        self.kernel_angle = Some(principal_angle(basis.as_ref(), cand.as_ref())?);
        Ok(())
    }
}

fn principal_angle(basis: MatRef<'_, f64>, candidates: MatRef<'_, f64>) -> Result<f64> {
    if basis.ncols() == 0 {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    Ok(linalg::max_principal_sine(basis, candidates)?.asin())
}

/// Spectrum of `JH`.
#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianSpectrum {
    /// `(re, im)` pairs in solver order.
    pub eigenvalues: Vec<(f64, f64)>,
    pub radius: f64,
    pub tol_zero: f64,
    pub max_re: f64,
    /// Eigenvalues with `|λ| ≤ tol_zero`.
    pub zero_cluster: usize,
    /// Real positive eigenvalues.
    pub k_r: usize,
    /// Eigenvalues in the open first quadrant (one per quadruplet).
    pub k_c: usize,
    /// `max_λ min_μ |λ + μ| / radius`.
    pub pairing_defect_neg: f64,
    /// `max_λ min_μ |λ̄ − μ| / radius`.
    pub pairing_defect_conj: f64,
    #[serde(skip)]
    pub eigenvectors: Mat<c64>,
}

pub fn full_spectrum_jh(jh: &LinearOperator, user_tol: Option<f64>) -> Result<HamiltonianSpectrum> {
    if jh.kind != OperatorKind::JH {
        return Err(Error::Contract(format!(
            "full_spectrum_jh called on {:?}",
            jh.kind
        )));
    }
    let tol = zero_threshold(jh, user_tol);
    let (values, eigenvectors) = linalg::general_eigen(jh.matrix.as_ref())?;
    if values
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::EigenSolver("non-finite eigenvalue of JH".into()));
    }
    let radius = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_re = values
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let zero_cluster = values.iter().filter(|z| z.norm() <= tol).count();
    let k_r = values
        .iter()
        .filter(|z| z.re > tol && z.im.abs() <= tol)
        .count();
    let k_c = values.iter().filter(|z| z.re > tol && z.im > tol).count();

    let scale = radius.max(f64::MIN_POSITIVE);
    let nearest = |target: c64| {
        values
            .iter()
            .map(|z| (*z - target).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let pairing_defect_neg = values.iter().map(|z| nearest(-*z)).fold(0.0, f64::max) / scale;
    let pairing_defect_conj = values.iter().map(|z| nearest(z.conj())).fold(0.0, f64::max) / scale;

    Ok(HamiltonianSpectrum {
        eigenvalues: values.iter().map(|z| (z.re, z.im)).collect(),
        radius,
        tol_zero: tol,
        max_re,
        zero_cluster,
        k_r,
        k_c,
        pairing_defect_neg,
        pairing_defect_conj,
        eigenvectors,
    })
}

/// Krein data of one cluster of (numerically) coincident imaginary
/// eigenvalues with positive imaginary part.
#[derive(Debug, Clone, Serialize)]
pub struct KreinCluster {
    pub imag: f64,
    pub multiplicity: usize,
    pub positive: usize,
    pub negative: usize,
    pub indeterminate: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct KreinReport {
    pub clusters: Vec<KreinCluster>,
    pub k_i_minus: usize,
    pub indeterminate: usize,
    /// Smallest `|Gram eigenvalue| / ‖H‖` seen.
    pub min_margin: f64,
}

/// `⟨H z, z⟩` for a complex vector `z = a + ib`, i.e. `⟨Ha,a⟩ + ⟨Hb,b⟩`.
pub fn krein_form(h: &LinearOperator, z: &[c64]) -> f64 {
    let (a, b) = krein_parts(h, z);
    a + b
}

/// `(⟨Ha,a⟩, ⟨Hb,b⟩)` for `z = a + ib`.
pub fn krein_parts(h: &LinearOperator, z: &[c64]) -> (f64, f64) {
    let a: Vec<f64> = z.iter().map(|v| v.re).collect();
    let b: Vec<f64> = z.iter().map(|v| v.im).collect();
    (linalg::dot(&h.apply(&a), &a), linalg::dot(&h.apply(&b), &b))
}

/// Signs of `H` on the invariant subspaces of the imaginary eigenvalues.
///
/// Each cluster contributes the inertia of the Hermitian Gram matrix
/// `Z* H Z`, which for a simple eigenvalue is the sign of `⟨Hz, z⟩`.
pub fn krein_signatures(h: &LinearOperator, spec: &HamiltonianSpectrum) -> Result<KreinReport> {
    if h.kind != OperatorKind::H {
        return Err(Error::Contract("krein_signatures expects H".into()));
    }
    let tol = spec.tol_zero;
    let mut idx: Vec<usize> = (0..spec.eigenvalues.len())
        .filter(|&i| {
            let (re, im) = spec.eigenvalues[i];
            re.abs() <= tol && im > tol
        })
        .collect();
    idx.sort_by(|&i, &j| spec.eigenvalues[i].1.total_cmp(&spec.eigenvalues[j].1));

    let gap = KREIN_CLUSTER_RTOL * spec.radius;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        match groups.last_mut() {
            Some(g) if spec.eigenvalues[i].1 - spec.eigenvalues[*g.last().unwrap()].1 <= gap => {
                g.push(i)
            }
            _ => groups.push(vec![i]),
        }
    }

    let h_norm = linalg::norm_inf(h.matrix.as_ref());
    let cutoff = KREIN_INDETERMINATE_RTOL * h_norm;
    let mut report = KreinReport {
        clusters: Vec::with_capacity(groups.len()),
        k_i_minus: 0,
        indeterminate: 0,
        min_margin: f64::INFINITY,
    };
    for g in groups {
        let gram = cluster_gram(h, &spec.eigenvectors, &g);
        let mut cluster = KreinCluster {
            imag: g.iter().map(|&i| spec.eigenvalues[i].1).sum::<f64>() / g.len() as f64,
            multiplicity: g.len(),
            positive: 0,
            negative: 0,
            indeterminate: 0,
        };
        for v in gram {
            report.min_margin = report.min_margin.min(v.abs() / h_norm);
            if v.abs() < cutoff {
                cluster.indeterminate += 1;
            } else if v > 0.0 {
                cluster.positive += 1;
            } else {
                cluster.negative += 1;
            }
        }
        report.k_i_minus += cluster.negative;
        report.indeterminate += cluster.indeterminate;
        report.clusters.push(cluster);
    }
    Ok(report)
}

/// Eigenvalues of `Z* H Z` for the eigenvector columns `cols`, via the real
/// symmetric embedding `[[Re, −Im], [Im, Re]]` whose spectrum is doubled.
fn cluster_gram(h: &LinearOperator, vectors: &Mat<c64>, cols: &[usize]) -> Vec<f64> {
    let n = vectors.nrows();
    let m = cols.len();
    let zr = Mat::from_fn(n, m, |i, j| vectors[(i, cols[j])].re);
    let zi = Mat::from_fn(n, m, |i, j| vectors[(i, cols[j])].im);
    let hzr = &h.matrix * &zr;
    let hzi = &h.matrix * &zi;
    let re = zr.transpose() * &hzr + zi.transpose() * &hzi;
    let im = zr.transpose() * &hzi - zi.transpose() * &hzr;
    let embed = Mat::from_fn(2 * m, 2 * m, |i, j| {
        let (bi, bj) = (i / m, j / m);
        let (r, c) = (i % m, j % m);
        // Symmetrize away rounding noise.
        let sre = 0.5 * (re[(r, c)] + re[(c, r)]);
        let sim = 0.5 * (im[(r, c)] - im[(c, r)]);
        match (bi, bj) {
            (0, 0) | (1, 1) => sre,
            (0, 1) => -sim,
            _ => sim,
        }
    });
    let (vals, _) = linalg::symmetric_eigen(embed.as_ref()).expect("small symmetric eigenproblem");
    vals.into_iter().step_by(2).collect()
}

/// Dimensions of `ker H`, `ker JH`, `ker (JH)²`, `ker (JH)³` and the angles
/// between those kernels and the analytic vectors.
#[derive(Debug, Clone, Serialize)]
pub struct KernelAudit {
    pub dims: [usize; 4],
    /// Principal angles (radians): ker H vs {Ψ1, Ψ2}; ker JH vs
    /// {Ψ1, Ψ2, η̃1}; ker (JH)² vs {Ψ1, Ψ2, η̃1, η̃3, η4}.
    pub angles: [f64; 3],
    /// Relative residual of `JH·η̃1 = 0`.
    pub jh_eta_tilde1: f64,
    /// Relative residual of `JH·η̃3 = −Ψ1`.
    pub jh_eta_tilde3: f64,
    /// Relative residual of `JH·η4 = Ψ2`.
    pub jh_eta4: f64,
    pub sv_threshold: f64,
}

/// Nested kernel dimensions of `JH` from one SVD, by the staircase
/// `ker A^{k+1} = ker A + A⁺(ker A^k ∩ range A)`.
pub fn generalized_kernel_audit(
    h: &LinearOperator,
    jh: &LinearOperator,
    kv: &KernelVectors,
    user_tol: Option<f64>,
) -> Result<KernelAudit> {
    let layout = jh
        .layout
        .as_ref()
        .ok_or_else(|| Error::Contract("JH has no block layout".into()))?;
    let basis = kv.generalized_kernel_basis(layout);

    let mut hspec = symmetric_spectrum(h, None)?;
    hspec.correlate(&[
        ("Psi1", basis.col(0).iter().copied().collect()),
        ("Psi2", basis.col(1).iter().copied().collect()),
    ])?;

    let tol = zero_threshold(jh, user_tol);
    let (u, s, v) = linalg::svd(jh.matrix.as_ref())?;
    check_separation("JH singular values", &s, tol)?;
    let rank = s.iter().filter(|&&x| x > tol).count();
    let dim = s.len();
    let kernel = v.subcols(rank, dim - rank).to_owned();
    let left_null = u.subcols(rank, dim - rank).to_owned();
    // A⁺ = V_r Σ_r⁻¹ U_rᵀ.
    let vr_scaled = Mat::from_fn(dim, rank, |i, j| v[(i, j)] / s[j]);
    let ur = u.subcols(0, rank);

    let mut dims = [hspec.kernel_dim, kernel.ncols(), 0, 0];
    let mut levels = vec![kernel.clone()];
    let mut cur = kernel.clone();
    for slot in dims.iter_mut().skip(2) {
        let m = left_null.transpose() * &cur;
        let (_, ms, mv) = linalg::svd(m.as_ref())?;
        let mut padded = ms.clone();
        padded.resize(cur.ncols(), 0.0);
        check_separation("staircase", &padded, STAIRCASE_TOL)?;
        let mrank = padded.iter().filter(|&&x| x > STAIRCASE_TOL).count();
        let coeffs = mv.subcols(mrank, cur.ncols() - mrank);
        let new = &vr_scaled * (ur.transpose() * (&cur * coeffs));
        let stacked = Mat::from_fn(dim, kernel.ncols() + new.ncols(), |i, j| {
            if j < kernel.ncols() {
                kernel[(i, j)]
            } else {
                new[(i, j - kernel.ncols())]
            }
        });
        cur = linalg::orthonormal_basis(stacked.as_ref(), 1e-10)?;
        *slot = cur.ncols();
        levels.push(cur.clone());
    }

    let angles = [
        hspec.kernel_angle.unwrap_or(std::f64::consts::FRAC_PI_2),
        principal_angle(levels[0].as_ref(), basis.subcols(0, 3))?,
        principal_angle(levels[1].as_ref(), basis.as_ref())?,
    ];
    let zero = BlockVector::zeros(layout.n());
    Ok(KernelAudit {
        dims,
        angles,
        jh_eta_tilde1: block_residual(jh, &kv.eta_tilde1, &zero)?,
        jh_eta_tilde3: block_residual(jh, &kv.eta_tilde3, &kv.psi1.combine(-1.0, &zero, 0.0))?,
        jh_eta4: block_residual(jh, &kv.eta4, &kv.psi2)?,
        sv_threshold: tol,
    })
}

/// Fails when some value sits within a factor 10 of the threshold.
fn check_separation(what: &str, values: &[f64], tol: f64) -> Result<()> {
    if let Some(v) = values.iter().find(|&&v| v > 0.1 * tol && v < 10.0 * tol) {
        return Err(Error::InconclusiveRank(format!(
            "{what}: {v:e} within a factor 10 of threshold {tol:e}"
        )));
    }
    Ok(())
}

/// Eigenvalue counts entering the index formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexCounts {
    pub k_r: usize,
    pub k_c: usize,
    pub k_i_minus: usize,
    pub n_h: usize,
    pub n0_d: usize,
}

impl IndexCounts {
    pub fn k_ham(&self) -> usize {
        self.k_r + 2 * self.k_c + 2 * self.k_i_minus
    }
}

/// `k_r + 2k_c + 2k_i⁻ − (n(H) − n0(D))` and whether it vanishes.
pub fn verify_index_formula(counts: &IndexCounts) -> (bool, i64) {
    let residual = counts.k_ham() as i64 - (counts.n_h as i64 - counts.n0_d as i64);
    (residual == 0, residual)
}
