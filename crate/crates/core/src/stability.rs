//! The analytic route through `⟨L+⁻¹φ, φ⟩` and the constraint matrix `D`,
//! cross-checked against quadrature and the direct spectrum of `JH`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::elliptic::{self, EllipticModulus};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{self, KernelVectors, LinearOperator};
use crate::spectra::{self, IndexCounts, KernelAudit};
use crate::waves::{sample_wave, WaveParameters};

/// Denominators below this are treated as cancelled.
pub const CANCELLATION_FLOOR: f64 = 1e-14;
/// Relative disagreement between the routes that forces an inconclusive verdict.
pub const ROUTE_RTOL: f64 = 1e-4;
/// `max Re λ` must stay below this fraction of the spectral radius.
pub const STABILITY_RTOL: f64 = 1e-6;
/// `|⟨L+⁻¹φ, φ⟩|` must exceed this fraction of `2T`.
pub const HYPOTHESIS_RTOL: f64 = 1e-8;
pub const DEFAULT_GRID: usize = 256;

struct EllipticData {
    k: f64,
    e: f64,
    kp2: f64,
    kappa2: f64,
}

fn elliptic_data(params: &WaveParameters) -> Result<EllipticData> {
    let m = EllipticModulus::admissible(params.kappa)?;
    let (k, e) = elliptic::complete_k_e(m)?;
    let kp = m.kappa_prime();
    Ok(EllipticData {
        k,
        e,
        kp2: kp * kp,
        kappa2: m.parameter(),
    })
}

/// `R = [E² − (1−κ²)K²] / [(2−κ²)E − 2(1−κ²)K]`.
fn ratio_r(d: &EllipticData) -> Result<f64> {
    let den = (2.0 - d.kappa2) * d.e - 2.0 * d.kp2 * d.k;
    if den.abs() < CANCELLATION_FLOOR {
        return Err(Error::Cancellation(format!("(2−κ²)E − 2(1−κ²)K = {den:e}")));
    }
    Ok((d.e * d.e - d.kp2 * d.k * d.k) / den)
}

/// `⟨L+⁻¹φ, φ⟩ = −(2(1−c²)/α)·R`.
pub fn inner_product_closed_form(params: &WaveParameters) -> Result<f64> {
    let d = elliptic_data(params)?;
    Ok(-2.0 * params.gamma() / params.alpha * ratio_r(&d)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondFactor {
    /// `2T + c²I/(1−c²)`.
    pub value: f64,
    /// The same quantity as `(2/α)(K − c²R)`.
    pub elliptic_form: f64,
    /// `[(2−κ²)EK − 2(1−κ²)K²] / [E² − (1−κ²)K²]`.
    pub bracket_ratio: f64,
    pub forms_agree: bool,
    /// `bracket_ratio > 1 > c²`.
    pub bracket_holds: bool,
}

pub fn second_factor(params: &WaveParameters) -> Result<SecondFactor> {
    let d = elliptic_data(params)?;
    let r = ratio_r(&d)?;
    let c2 = params.c * params.c;
    let i = -2.0 * params.gamma() / params.alpha * r;
    let value = 2.0 * params.half_period + c2 * i / params.gamma();
    let elliptic_form = 2.0 / params.alpha * (d.k - c2 * r);
    let bracket_ratio = d.k / r;
    Ok(SecondFactor {
        value,
        elliptic_form,
        bracket_ratio,
        forms_agree: (value - elliptic_form).abs() <= 1e-10 * value.abs(),
        bracket_holds: bracket_ratio > 1.0 && 1.0 > c2,
    })
}

/// The 2×2 constraint matrix from the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormD {
    pub inner_i: f64,
    pub second_factor: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
    /// `4T²·I·(2T + c²I/(1−c²))`.
    pub det: f64,
    /// `d11·d22 − d12²`.
    pub det_entries: f64,
    pub n_d: usize,
    pub n0_d: usize,
}

/// Closed-form `D` with an explicit value of `I` (used to inject faults).
pub fn d_matrix_with_inner(params: &WaveParameters, inner_i: f64) -> ClosedFormD {
    let t2 = 2.0 * params.half_period;
    let g = params.gamma();
    let c2 = params.c * params.c;
    let a = t2 + c2 * inner_i / g;
    let d11 = t2 * a * (t2 + inner_i / g);
    let d12 = -t2 * a;
    let d22 = t2;
    let [lo, hi] = linalg::sym2_eigenvalues(d11, d12, d22);
    ClosedFormD {
        inner_i,
        second_factor: a,
        d11,
        d12,
        d22,
        det: t2 * t2 * inner_i * a,
        det_entries: d11 * d22 - d12 * d12,
        n_d: [lo, hi].iter().filter(|&&v| v < 0.0).count(),
        n0_d: [lo, hi].iter().filter(|&&v| v <= 0.0).count(),
    }
}

pub fn d_matrix(params: &WaveParameters) -> Result<ClosedFormD> {
    Ok(d_matrix_with_inner(
        params,
        inner_product_closed_form(params)?,
    ))
}

/// `D_ij = ⟨H η̃i, η̃j⟩` by quadrature over `{η̃1, η̃3}`, plus the 3×3
/// extension by `η4`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericD {
    pub inner_i: f64,
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
    pub det: f64,
    pub n0_d: usize,
    pub extended: [[f64; 3]; 3],
    pub n0_d_extended: usize,
}

pub fn d_matrix_numeric(h: &LinearOperator, kv: &KernelVectors) -> Result<NumericD> {
    let basis = [&kv.eta_tilde1, &kv.eta_tilde3, &kv.eta4];
    let mut ext = [[0.0; 3]; 3];
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            ext[i][j] = operators::quadratic_form(h, u, v)?;
        }
    }
    let (d11, d12, d21, d22) = (ext[0][0], ext[0][1], ext[1][0], ext[1][1]);
    let sym = 0.5 * (d12 + d21);
    let two = linalg::sym2_eigenvalues(d11, sym, d22);
    let m3 = faer::Mat::from_fn(3, 3, |i, j| 0.5 * (ext[i][j] + ext[j][i]));
    let (e3, _) = linalg::symmetric_eigen(m3.as_ref())?;
    Ok(NumericD {
        inner_i: kv.inner_i,
        d11,
        d12,
        d21,
        d22,
        det: d11 * d22 - d12 * d21,
        n0_d: two.iter().filter(|&&v| v <= 0.0).count(),
        extended: ext,
        n0_d_extended: e3.iter().filter(|&&v| v <= 0.0).count(),
    })
}

/// Both routes to `I` and `D` side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DMatrixReport {
    pub inner_i: f64,
    pub inner_i_numeric: Option<f64>,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
    pub det_closed: f64,
    pub det_numeric: Option<f64>,
    pub n_d: usize,
    pub n0_d: usize,
    pub n0_d_extended: Option<usize>,
    pub numeric: Option<NumericD>,
}

impl DMatrixReport {
    pub fn new(closed: &ClosedFormD, numeric: Option<NumericD>) -> Self {
        Self {
            inner_i: closed.inner_i,
            inner_i_numeric: numeric.as_ref().map(|n| n.inner_i),
            d11: closed.d11,
            d12: closed.d12,
            d22: closed.d22,
            det_closed: closed.det,
            det_numeric: numeric.as_ref().map(|n| n.det),
            n_d: closed.n_d,
            n0_d: closed.n0_d,
            n0_d_extended: numeric.as_ref().map(|n| n.n0_d_extended),
            numeric,
        }
    }

    /// Relative discrepancies between the two routes, keyed by quantity.
    pub fn compare(&self) -> BTreeMap<&'static str, f64> {
        let mut out = BTreeMap::new();
        if let Some(n) = &self.numeric {
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
            out.insert("inner_I", rel(n.inner_i, self.inner_i));
            out.insert("d11", rel(n.d11, self.d11));
            out.insert("d12", rel(n.d12, self.d12));
            out.insert("d21", rel(n.d21, self.d12));
            out.insert("d22", rel(n.d22, self.d22));
            out.insert("det", rel(n.det, self.det_closed));
        }
        out
    }

    pub fn max_route_error(&self) -> Option<f64> {
        let c = self.compare();
        if c.is_empty() {
            None
        } else {
            Some(c.values().fold(0.0, |m, v| m.max(*v)))
        }
    }
}

/// Which routes `stability_verdict` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteMode {
    ClosedForm,
    Numeric,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOptions {
    pub n: usize,
    pub tol_zero: Option<f64>,
    /// Multiplies the closed-form `I` before building `D` (fault injection).
    pub corrupt_inner: Option<f64>,
    /// Also run the generalized-kernel audit.
    pub audit: bool,
    pub mode: RouteMode,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            n: DEFAULT_GRID,
            tol_zero: None,
            corrupt_inner: None,
            audit: false,
            mode: RouteMode::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub params: WaveParameters,
    pub n: usize,
    pub mode: RouteMode,
    pub d_report: Option<DMatrixReport>,
    pub second_factor: Option<SecondFactor>,
    pub counts: Option<IndexCounts>,
    pub index_residual: Option<i64>,
    pub n_h: Option<usize>,
    pub kernel_dim_h: Option<usize>,
    pub max_re_lambda: Option<f64>,
    pub spectral_radius: Option<f64>,
    pub zero_cluster: Option<usize>,
    pub krein_indeterminate: Option<usize>,
    pub audit: Option<KernelAudit>,
    pub verdict: Verdict,
    pub residuals: BTreeMap<String, f64>,
    pub diagnostics: Vec<String>,
}

impl StabilityReport {
    fn new(params: &WaveParameters, options: &StabilityOptions) -> Self {
        Self {
            params: params.clone(),
            n: options.n,
            mode: options.mode,
            d_report: None,
            second_factor: None,
            counts: None,
            index_residual: None,
            n_h: None,
            kernel_dim_h: None,
            max_re_lambda: None,
            spectral_radius: None,
            zero_cluster: None,
            krein_indeterminate: None,
            audit: None,
            verdict: Verdict::Inconclusive,
            residuals: BTreeMap::new(),
            diagnostics: Vec::new(),
        }
    }

    fn record(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_string(), value);
    }
}

struct NumericRoute {
    n_h: usize,
    max_re: f64,
    radius: f64,
    k_r: usize,
    k_c: usize,
    k_i_minus: usize,
    d: NumericD,
}

/// Runs the pipeline at one parameter point.
///
/// Only an invalid grid size is an error; every later failure is folded into
/// an inconclusive verdict with the cause in `diagnostics`.
pub fn stability_verdict(
    params: &WaveParameters,
    options: &StabilityOptions,
) -> Result<StabilityReport> {
    let wave = sample_wave(params, options.n)?;
    let mut report = StabilityReport::new(params, options);
    report.record("ode", wave.ode_residual() / wave.ode_scale());
    report.record(
        "first_integral",
        wave.first_integral_residual() / wave.first_integral_scale(),
    );

    let mut inconclusive = false;

    let closed = match closed_route(params, options, &mut report) {
        Ok(c) => Some(c),
        Err(e) => {
            report.diagnostics.push(format!("closed-form route: {e}"));
            inconclusive = true;
            None
        }
    };
    if options.mode == RouteMode::ClosedForm {
        if let Some(c) = &closed {
            report.d_report = Some(DMatrixReport::new(c, None));
        }
        report.verdict = closed_only_verdict(closed.as_ref(), inconclusive, &mut report);
        return Ok(report);
    }

    let numeric = match numeric_route(&wave, options, &mut report) {
        Ok(n) => Some(n),
        Err(e) => {
            report.diagnostics.push(format!("numeric route: {e}"));
            inconclusive = true;
            None
        }
    };
    let Some(num) = numeric else {
        if let Some(c) = &closed {
            report.d_report = Some(DMatrixReport::new(c, None));
        }
        report.verdict = Verdict::Inconclusive;
        return Ok(report);
    };

    let t2 = 2.0 * params.half_period;
    if num.d.inner_i.is_nan() || num.d.inner_i.abs() <= HYPOTHESIS_RTOL * t2 {
        report.diagnostics.push(format!(
            "|<L+^-1 phi, phi>| = {:e} fails the non-degeneracy hypothesis",
            num.d.inner_i
        ));
        inconclusive = true;
    }

    let n0_d = match (&closed, options.mode) {
        (Some(c), RouteMode::Both) => {
            let dr = DMatrixReport::new(c, Some(num.d.clone()));
            for (k, v) in dr.compare() {
                report.record(&format!("route_{k}"), v);
            }
            let worst = dr.max_route_error().unwrap_or(0.0);
            if worst.is_nan() || worst > ROUTE_RTOL {
                report.diagnostics.push(
                    Error::RouteDisagreement(format!(
                        "closed-form and quadrature D differ by {worst:e} (relative)"
                    ))
                    .to_string(),
                );
                inconclusive = true;
            }
            if c.n0_d != num.d.n0_d {
                report.diagnostics.push(format!(
                    "n0(D) differs between routes: {} vs {}",
                    c.n0_d, num.d.n0_d
                ));
                inconclusive = true;
            }
            report.d_report = Some(dr);
            c.n0_d
        }
        _ => {
            let n0 = num.d.n0_d;
            report.d_report = closed
                .as_ref()
                .map(|c| DMatrixReport::new(c, Some(num.d.clone())));
            n0
        }
    };

    let counts = IndexCounts {
        k_r: num.k_r,
        k_c: num.k_c,
        k_i_minus: num.k_i_minus,
        n_h: num.n_h,
        n0_d,
    };
    let (balanced, residual) = spectra::verify_index_formula(&counts);
    report.counts = Some(counts);
    report.index_residual = Some(residual);
    if !balanced {
        report.diagnostics.push(format!(
            "index formula off by {residual}: k_Ham = {}, n(H) - n0(D) = {}",
            counts.k_ham(),
            counts.n_h as i64 - counts.n0_d as i64
        ));
    }

    let spectrally_stable = num.max_re < STABILITY_RTOL * num.radius;
    report.verdict = if inconclusive || !balanced {
        Verdict::Inconclusive
    } else if spectrally_stable && num.n_h == n0_d {
        Verdict::Stable
    } else if !spectrally_stable && num.n_h > n0_d {
        Verdict::Unstable
    } else {
        report.diagnostics.push(format!(
            "counting (n(H) - n0(D) = {}) and spectrum (max Re = {:e}) disagree",
            num.n_h as i64 - n0_d as i64,
            num.max_re
        ));
        Verdict::Inconclusive
    };
    Ok(report)
}

fn closed_route(
    params: &WaveParameters,
    options: &StabilityOptions,
    report: &mut StabilityReport,
) -> Result<ClosedFormD> {
    let exact = inner_product_closed_form(params)?;
    let sf = second_factor(params)?;
    report.second_factor = Some(sf);
    report.record(
        "second_factor_forms",
        (sf.value - sf.elliptic_form).abs() / sf.value.abs(),
    );
    if exact >= 0.0 {
        report.diagnostics.push(format!(
            "closed-form <L+^-1 phi, phi> = {exact:e} is not negative"
        ));
    }
    if sf.value <= 0.0 || !sf.bracket_holds {
        report.diagnostics.push(format!(
            "second factor {:e} / bracket ratio {:e} violate positivity",
            sf.value, sf.bracket_ratio
        ));
    }
    let inner = exact * options.corrupt_inner.unwrap_or(1.0);
    let d = d_matrix_with_inner(params, inner);
    report.record(
        "det_entries",
        (d.det - d.det_entries).abs() / d.det.abs().max(f64::MIN_POSITIVE),
    );
    Ok(d)
}

fn closed_only_verdict(
    closed: Option<&ClosedFormD>,
    inconclusive: bool,
    report: &mut StabilityReport,
) -> Verdict {
    let Some(c) = closed else {
        return Verdict::Inconclusive;
    };
    if inconclusive || c.det == 0.0 {
        return Verdict::Inconclusive;
    }
    let sf_ok = report
        .second_factor
        .map(|s| s.value > 0.0 && s.bracket_holds)
        .unwrap_or(false);
    if c.n0_d == 1 && c.inner_i < 0.0 && sf_ok {
        Verdict::Stable
    } else if c.n0_d == 0 {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    }
}

fn numeric_route(
    wave: &crate::waves::DnoidalWave,
    options: &StabilityOptions,
    report: &mut StabilityReport,
) -> Result<NumericRoute> {
    let h = operators::assemble_h(wave, true)?;
    let j = operators::assemble_j(&wave.grid, true)?;
    report.record("H_symmetry", h.symmetry_defect());
    report.record("J_antisymmetry", j.symmetry_defect());
    let jh = operators::assemble_jh(&j, &h)?;
    let kv = operators::assemble_kernel_vectors(wave)?;
    let layout = h.layout.as_ref().expect("block operator");

    let mut hspec = spectra::symmetric_spectrum(&h, None)?;
    hspec.correlate(&[
        ("Psi1", layout.reduce(&kv.psi1)),
        ("Psi2", layout.reduce(&kv.psi2)),
    ])?;
    report.n_h = Some(hspec.morse_index);
    report.kernel_dim_h = Some(hspec.kernel_dim);
    if let Some(a) = hspec.kernel_angle {
        report.record("kernel_angle_H", a);
    }
    if hspec.kernel_dim != 2 {
        report
            .diagnostics
            .push(format!("dim ker H = {} (expected 2)", hspec.kernel_dim));
    }

    let zero = operators::BlockVector::zeros(wave.len());
    report.record("H_psi1", operators::block_residual(&h, &kv.psi1, &zero)?);
    report.record("H_psi2", operators::block_residual(&h, &kv.psi2, &zero)?);
    report.record(
        "JH_eta_tilde1",
        operators::block_residual(&jh, &kv.eta_tilde1, &zero)?,
    );

    let spec = spectra::full_spectrum_jh(&jh, options.tol_zero)?;
    report.max_re_lambda = Some(spec.max_re);
    report.spectral_radius = Some(spec.radius);
    report.zero_cluster = Some(spec.zero_cluster);
    report.record("max_re_over_radius", spec.max_re / spec.radius);
    report.record("pairing_neg", spec.pairing_defect_neg);
    report.record("pairing_conj", spec.pairing_defect_conj);

    let krein = spectra::krein_signatures(&h, &spec)?;
    report.krein_indeterminate = Some(krein.indeterminate);
    report.record("krein_min_margin", krein.min_margin);
    if krein.indeterminate > 0 {
        report.diagnostics.push(format!(
            "warning: {} imaginary eigenvalue(s) with indeterminate Krein signature",
            krein.indeterminate
        ));
    }

    if options.audit {
        let audit = spectra::generalized_kernel_audit(&h, &jh, &kv, options.tol_zero)?;
        report.audit = Some(audit);
    }

    let d = d_matrix_numeric(&h, &kv)?;
    report.record(
        "d_symmetry",
        (d.d12 - d.d21).abs() / d.d12.abs().max(d.d22.abs()),
    );
    Ok(NumericRoute {
        n_h: hspec.morse_index,
        max_re: spec.max_re,
        radius: spec.radius,
        k_r: spec.k_r,
        k_c: spec.k_c,
        k_i_minus: krein.k_i_minus,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::resolve_parameters;

    #[test]
    fn closed_form_sign_and_scaling() {
        for i in 1..=9 {
            let p = resolve_parameters(i as f64 / 10.0, 0.3, None, Some(1.0)).unwrap();
            assert!(inner_product_closed_form(&p).unwrap() < 0.0);
        }
        let a = resolve_parameters(0.5, 0.0, None, Some(1.0)).unwrap();
        let b = resolve_parameters(0.5, 0.0, None, Some(0.25)).unwrap();
        // α halves, so (1−c²)/α doubles.
        let ratio = inner_product_closed_form(&b).unwrap() / inner_product_closed_form(&a).unwrap();
        assert!((ratio - 2.0).abs() < 1e-13);
    }

    #[test]
    fn second_factor_forms() {
        let p = resolve_parameters(0.5, 0.5, Some(1), None).unwrap();
        let s = second_factor(&p).unwrap();
        assert!(s.value > 0.0 && s.forms_agree && s.bracket_holds);
        assert!(s.bracket_ratio > 1.0);
        let p0 = resolve_parameters(0.5, 0.0, None, Some(1.0)).unwrap();
        assert_eq!(second_factor(&p0).unwrap().value, 2.0 * p0.half_period);
    }

    #[test]
    fn closed_d_entries() {
        let p = resolve_parameters(0.5, 0.0, None, Some(1.0)).unwrap();
        let d = d_matrix(&p).unwrap();
        let t2 = 2.0 * p.half_period;
        assert_eq!(d.d22, t2);
        assert!((d.d12 + t2 * t2).abs() < 1e-12 * t2 * t2);
        assert!((d.d11 - t2 * t2 * (t2 + d.inner_i)).abs() < 1e-12 * d.d11.abs());
        assert!(d.det < 0.0);
        assert_eq!((d.n_d, d.n0_d), (1, 1));
        assert!((d.det - d.det_entries).abs() < 1e-10 * d.det.abs());
    }

    #[test]
    fn small_grid_verdict() {
        let p = resolve_parameters(0.5, 0.3, None, Some(1.0)).unwrap();
        let opts = StabilityOptions {
            n: 32,
            audit: true,
            ..Default::default()
        };
        let r = stability_verdict(&p, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Stable, "{:?}", r.diagnostics);
        assert_eq!(r.audit.unwrap().dims, [2, 3, 5, 5]);

        let bad = StabilityOptions {
            n: 32,
            corrupt_inner: Some(1.1),
            ..Default::default()
        };
        assert_eq!(
            stability_verdict(&p, &bad).unwrap().verdict,
            Verdict::Inconclusive
        );

        let closed = StabilityOptions {
            n: 32,
            mode: RouteMode::ClosedForm,
            ..Default::default()
        };
        assert_eq!(
            stability_verdict(&p, &closed).unwrap().verdict,
            Verdict::Stable
        );
    }
}
