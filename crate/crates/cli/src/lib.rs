//! Command-line front end for `zakharov-core`.
//!
//! Exit codes: 0 stable (or check passed), 1 unstable (or check failed),
//! 2 usage or invalid parameters, 3 inconclusive or numerical failure.

pub mod args;
pub mod output;

use std::io::Write;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use zakharov_core::operators::{
    assemble_h, assemble_j, assemble_jh, assemble_kernel_vectors, assemble_lame, assemble_scalar,
    lame_eigenvalues_analytic, LamePeriod,
};
use zakharov_core::spectra::{
    full_spectrum_jh, generalized_kernel_audit, krein_signatures, symmetric_spectrum,
    SpectrumReport,
};
use zakharov_core::stability::{stability_verdict, RouteMode};
use zakharov_core::waves::{resolve_parameters, sample_wave};
use zakharov_core::{
    Error, OperatorKind, StabilityOptions, StabilityReport, Verdict, WaveParameters,
};

pub use args::Cli;
use args::{Command, Format, LameArgs, PointArgs, StabilityArgs, SweepArgs, WaveArgs};
use output::{float, json_text, opt_float, sink};

pub const EXIT_OK: u8 = 0;
pub const EXIT_UNSTABLE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;

/// Absolute tolerance of `lame-check`.
pub const LAME_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_INCONCLUSIVE,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ModulusOutOfRange(_)
            | Error::ModulusOutsideWindow { .. }
            | Error::NonFiniteArgument(_)
            | Error::DegenerateSpeed(_)
            | Error::InvalidParameters(_)
            | Error::InvalidGrid(_) => CliError::Usage(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs one command and returns its exit code.
pub fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Wave(a) => cmd_wave(&a),
        Command::LameCheck(a) => cmd_lame_check(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Stability(a) => cmd_stability(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn point_params(p: &PointArgs) -> CliResult<WaveParameters> {
    Ok(resolve_parameters(p.kappa, p.c, p.l, p.sigma)?)
}

fn params_json(p: &WaveParameters) -> Value {
    let mut v = serde_json::to_value(p).expect("serializable");
    let obj = v.as_object_mut().expect("object");
    obj.insert("T".into(), json!(p.half_period));
    obj.insert("cT_over_2pi".into(), json!(p.winding()));
    v
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Stable => EXIT_OK,
        Verdict::Unstable => EXIT_UNSTABLE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

pub fn cmd_wave(a: &WaveArgs) -> CliResult<u8> {
    let params = point_params(&a.point)?;
    let wave = sample_wave(&params, a.point.n)?;
    let x = wave.grid.nodes();
    let mut out = sink(a.point.out.as_deref())?;
    match a.format {
        Format::Csv => {
            let header = serde_json::to_string(&output::canonical(params_json(&params)))
                .expect("serializable");
            writeln!(out, "# {header}")?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["x", "phi", "dphi", "psi"])?;
            for (j, xj) in x.iter().enumerate() {
                w.write_record([
                    float(*xj),
                    float(wave.phi[j]),
                    float(wave.dphi[j]),
                    float(wave.psi[j]),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = json!({
                "params": params_json(&params),
                "n": wave.len(),
                "x": x,
                "phi": wave.phi,
                "dphi": wave.dphi,
                "psi": wave.psi,
            });
            out.write_all(json_text(doc).as_bytes())?;
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

/// One row of the Lamé comparison.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LameRow {
    pub name: String,
    pub computed: f64,
    pub analytic: f64,
    pub abs_error: f64,
}

pub fn lame_rows(kappa: f64, n: usize) -> CliResult<Vec<LameRow>> {
    let (nu, eps) = lame_eigenvalues_analytic(kappa)?;
    let mut rows = Vec::with_capacity(7);
    for (kind, prefix, analytic) in [
        (OperatorKind::Lame1, "nu", &nu[..]),
        (OperatorKind::Lame2, "epsilon", &eps[..]),
    ] {
        let op = assemble_lame(kind, kappa, LamePeriod::FourK, n)?;
        let spec = symmetric_spectrum(&op, None)?;
        for (i, &want) in analytic.iter().enumerate() {
            let got = spec.eigenvalues[i];
            rows.push(LameRow {
                name: format!("{prefix}{i}"),
                computed: got,
                analytic: want,
                abs_error: (got - want).abs(),
            });
        }
    }
    Ok(rows)
}

pub fn cmd_lame_check(a: &LameArgs) -> CliResult<u8> {
    let rows = lame_rows(a.kappa, a.n)?;
    let pass = rows.iter().all(|r| r.abs_error < LAME_TOL);
    let mut out = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["name", "computed", "analytic", "abs_error"])?;
            for r in &rows {
                w.write_record([
                    r.name.clone(),
                    float(r.computed),
                    float(r.analytic),
                    float(r.abs_error),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = json!({
                "kappa": a.kappa,
                "n": a.n,
                "tolerance": LAME_TOL,
                "rows": rows,
                "pass": pass,
            });
            out.write_all(json_text(doc).as_bytes())?;
        }
    }
    out.flush()?;
    Ok(if pass { EXIT_OK } else { EXIT_UNSTABLE })
}

const LOWEST_SHOWN: usize = 6;

fn symmetric_summary(r: &SpectrumReport) -> Value {
    json!({
        "kind": r.kind,
        "dim": r.eigenvalues.len(),
        "morse_index": r.morse_index,
        "kernel_dim": r.kernel_dim,
        "positive_count": r.positive_count,
        "tol_zero": r.tol_zero,
        "lowest": &r.eigenvalues[..LOWEST_SHOWN.min(r.eigenvalues.len())],
        "kernel_correlations": r.kernel_correlations,
        "kernel_angle": r.kernel_angle,
    })
}

pub fn cmd_spectrum(a: &PointArgs) -> CliResult<u8> {
    let params = point_params(a)?;
    let wave = sample_wave(&params, a.n)?;
    let kv = assemble_kernel_vectors(&wave)?;

    let mut lm = symmetric_spectrum(&assemble_scalar(OperatorKind::Lminus, &wave)?, None)?;
    lm.correlate(&[("phi", wave.phi.clone())])?;
    let mut lp = symmetric_spectrum(&assemble_scalar(OperatorKind::Lplus, &wave)?, None)?;
    lp.correlate(&[("dphi", wave.dphi.clone())])?;

    let h = assemble_h(&wave, true)?;
    let layout = h.layout.clone().expect("constrained layout");
    let mut hs = symmetric_spectrum(&h, None)?;
    hs.correlate(&[
        ("Psi1", layout.reduce(&kv.psi1)),
        ("Psi2", layout.reduce(&kv.psi2)),
    ])?;

    let jh = assemble_jh(&assemble_j(&wave.grid, true)?, &h)?;
    let js = full_spectrum_jh(&jh, a.tol_zero)?;
    let krein = krein_signatures(&h, &js)?;
    let audit = generalized_kernel_audit(&h, &jh, &kv, a.tol_zero)?;

    let doc = json!({
        "params": params_json(&params),
        "n": a.n,
        "L_minus": symmetric_summary(&lm),
        "L_plus": symmetric_summary(&lp),
        "H": symmetric_summary(&hs),
        "JH": {
            "dim": js.eigenvalues.len(),
            "spectral_radius": js.radius,
            "tol_zero": js.tol_zero,
            "max_re_lambda": js.max_re,
            "zero_cluster": js.zero_cluster,
            "k_r": js.k_r,
            "k_c": js.k_c,
            "pairing_defect_neg": js.pairing_defect_neg,
            "pairing_defect_conj": js.pairing_defect_conj,
        },
        "krein": {
            "k_i_minus": krein.k_i_minus,
            "indeterminate": krein.indeterminate,
            "min_margin": krein.min_margin,
            "clusters": krein.clusters.len(),
        },
        "kernel_audit": audit,
    });
    let mut out = sink(a.out.as_deref())?;
    out.write_all(json_text(doc).as_bytes())?;
    out.flush()?;
    Ok(EXIT_OK)
}

/// The fixed-schema stability document.
pub fn stability_json(r: &StabilityReport) -> Value {
    let d = r.d_report.as_ref();
    let closed = d.map(|d| json!({ "d11": d.d11, "d12": d.d12, "d22": d.d22 }));
    let numeric = d
        .and_then(|d| d.numeric.as_ref())
        .map(|n| json!({ "d11": n.d11, "d12": n.d12, "d21": n.d21, "d22": n.d22 }));
    let c = r.counts;
    let mut m = Map::new();
    m.insert("params".into(), params_json(&r.params));
    m.insert("inner_I".into(), json!(d.map(|d| d.inner_i)));
    m.insert(
        "d_matrix".into(),
        json!({ "closed": closed, "numeric": numeric }),
    );
    m.insert("det_closed".into(), json!(d.map(|d| d.det_closed)));
    m.insert("det_numeric".into(), json!(d.and_then(|d| d.det_numeric)));
    m.insert("n_H".into(), json!(r.n_h));
    m.insert("n0_D".into(), json!(d.map(|d| d.n0_d)));
    m.insert("k_r".into(), json!(c.map(|c| c.k_r)));
    m.insert("k_c".into(), json!(c.map(|c| c.k_c)));
    m.insert("k_i_minus".into(), json!(c.map(|c| c.k_i_minus)));
    m.insert("max_re_lambda".into(), json!(r.max_re_lambda));
    m.insert("verdict".into(), json!(r.verdict));
    m.insert("residuals".into(), json!(r.residuals));
    m.insert("n".into(), json!(r.n));
    m.insert("mode".into(), json!(r.mode));
    m.insert(
        "inner_I_numeric".into(),
        json!(d.and_then(|d| d.inner_i_numeric)),
    );
    m.insert(
        "n0_D_extended".into(),
        json!(d.and_then(|d| d.n0_d_extended)),
    );
    m.insert("route_errors".into(), json!(d.map(|d| d.compare())));
    m.insert("second_factor".into(), json!(r.second_factor));
    m.insert("spectral_radius".into(), json!(r.spectral_radius));
    m.insert("zero_cluster".into(), json!(r.zero_cluster));
    m.insert("kernel_dim_H".into(), json!(r.kernel_dim_h));
    m.insert("krein_indeterminate".into(), json!(r.krein_indeterminate));
    m.insert("index_residual".into(), json!(r.index_residual));
    m.insert("kernel_audit".into(), json!(r.audit));
    m.insert("diagnostics".into(), json!(r.diagnostics));
    Value::Object(m)
}

pub fn cmd_stability(a: &StabilityArgs) -> CliResult<u8> {
    let params = point_params(&a.point)?;
    let options = StabilityOptions {
        n: a.point.n,
        tol_zero: a.point.tol_zero,
        corrupt_inner: a.corrupt_i,
        audit: a.audit,
        mode: a.mode.into(),
    };
    let report = stability_verdict(&params, &options)?;
    let mut out = sink(a.point.out.as_deref())?;
    out.write_all(json_text(stability_json(&report)).as_bytes())?;
    out.flush()?;
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    Ok(verdict_code(report.verdict))
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--{flag}: cannot parse {t:?}")))
        })
        .collect()
}

/// `lo,hi,count` into `count` equispaced values.
pub fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--kappa expects lo,hi,count, got {s:?}"
        )));
    }
    let bad = |t: &str| CliError::Usage(format!("--kappa: cannot parse {t:?}"));
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad(parts[0]))?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad(parts[1]))?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad(parts[2]))?;
    if count == 0 {
        return Err(CliError::Usage("--kappa: count must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(CliError::Usage(format!(
            "--kappa: need finite lo <= hi, got {lo}, {hi}"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

/// Sweep points in deterministic order: κ outermost, then c, then l.
pub fn sweep_points(a: &SweepArgs) -> CliResult<Vec<WaveParameters>> {
    let kappas = parse_range(&a.kappa)?;
    let speeds: Vec<f64> = parse_list("c", &a.c)?;
    let windings: Option<Vec<i64>> = a.l.as_deref().map(|s| parse_list("l", s)).transpose()?;
    if windings.is_none() && a.sigma.is_none() {
        return Err(CliError::Usage("one of --sigma or --l is required".into()));
    }
    if a.n % 2 != 0 {
        return Err(CliError::Usage(format!("--n must be even, got {}", a.n)));
    }
    if a.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let mut points = Vec::new();
    for &kappa in &kappas {
        for &c in &speeds {
            match &windings {
                Some(ls) => {
                    for &l in ls {
                        points.push(resolve_parameters(kappa, c, Some(l), None)?);
                    }
                }
                None => points.push(resolve_parameters(kappa, c, None, a.sigma)?),
            }
        }
    }
    Ok(points)
}

pub const SWEEP_COLUMNS: [&str; 22] = [
    "index",
    "kappa",
    "c",
    "l",
    "sigma",
    "alpha",
    "T",
    "inner_I",
    "d11",
    "d12",
    "d22",
    "det_closed",
    "det_numeric",
    "n_H",
    "n0_D",
    "k_r",
    "k_c",
    "k_i_minus",
    "max_re_lambda",
    "spectral_radius",
    "zero_cluster",
    "verdict",
];

fn opt_int<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Stable => "stable",
        Verdict::Unstable => "unstable",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn sweep_record(i: usize, r: &StabilityReport) -> Vec<String> {
    let p = &r.params;
    let d = r.d_report.as_ref();
    let c = r.counts;
    vec![
        i.to_string(),
        float(p.kappa),
        float(p.c),
        opt_int(p.l),
        float(p.sigma),
        float(p.alpha),
        float(p.half_period),
        opt_float(d.map(|d| d.inner_i)),
        opt_float(d.map(|d| d.d11)),
        opt_float(d.map(|d| d.d12)),
        opt_float(d.map(|d| d.d22)),
        opt_float(d.map(|d| d.det_closed)),
        opt_float(d.and_then(|d| d.det_numeric)),
        opt_int(r.n_h),
        opt_int(d.map(|d| d.n0_d)),
        opt_int(c.map(|c| c.k_r)),
        opt_int(c.map(|c| c.k_c)),
        opt_int(c.map(|c| c.k_i_minus)),
        opt_float(r.max_re_lambda),
        opt_float(r.spectral_radius),
        opt_int(r.zero_cluster),
        verdict_name(r.verdict).to_string(),
    ]
}

fn sweep_json_row(i: usize, r: &StabilityReport) -> Value {
    let p = &r.params;
    let d = r.d_report.as_ref();
    let c = r.counts;
    let values = [
        json!(i),
        json!(p.kappa),
        json!(p.c),
        json!(p.l),
        json!(p.sigma),
        json!(p.alpha),
        json!(p.half_period),
        json!(d.map(|d| d.inner_i)),
        json!(d.map(|d| d.d11)),
        json!(d.map(|d| d.d12)),
        json!(d.map(|d| d.d22)),
        json!(d.map(|d| d.det_closed)),
        json!(d.and_then(|d| d.det_numeric)),
        json!(r.n_h),
        json!(d.map(|d| d.n0_d)),
        json!(c.map(|c| c.k_r)),
        json!(c.map(|c| c.k_c)),
        json!(c.map(|c| c.k_i_minus)),
        json!(r.max_re_lambda),
        json!(r.spectral_radius),
        json!(r.zero_cluster),
        json!(r.verdict),
    ];
    Value::Object(
        SWEEP_COLUMNS
            .iter()
            .map(|k| k.to_string())
            .zip(values)
            .collect(),
    )
}

/// Aggregate over a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSummary {
    pub points: usize,
    pub stable: usize,
    pub unstable: usize,
    pub inconclusive: usize,
    pub min_abs_det: Option<f64>,
    pub max_re_lambda: Option<f64>,
}

pub fn summarize(reports: &[StabilityReport]) -> SweepSummary {
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let min_abs_det = reports
        .iter()
        .filter_map(|r| r.d_report.as_ref().map(|d| d.det_closed.abs()))
        .reduce(f64::min);
    let max_re_lambda = reports
        .iter()
        .filter_map(|r| r.max_re_lambda)
        .reduce(f64::max);
    SweepSummary {
        points: reports.len(),
        stable: count(Verdict::Stable),
        unstable: count(Verdict::Unstable),
        inconclusive: count(Verdict::Inconclusive),
        min_abs_det,
        max_re_lambda,
    }
}

impl SweepSummary {
    fn line(&self) -> String {
        format!(
            "points={} stable={} unstable={} inconclusive={} min_abs_det={} max_re_lambda={}",
            self.points,
            self.stable,
            self.unstable,
            self.inconclusive,
            opt_float(self.min_abs_det),
            opt_float(self.max_re_lambda),
        )
    }

    fn json(&self) -> Value {
        json!({
            "points": self.points,
            "stable": self.stable,
            "unstable": self.unstable,
            "inconclusive": self.inconclusive,
            "min_abs_det": self.min_abs_det,
            "max_re_lambda": self.max_re_lambda,
        })
    }

    pub fn exit_code(&self) -> u8 {
        if self.inconclusive > 0 {
            EXIT_INCONCLUSIVE
        } else if self.unstable > 0 {
            EXIT_UNSTABLE
        } else {
            EXIT_OK
        }
    }
}

/// Runs every point on a pool of `workers` threads; results keep input order.
pub fn run_sweep(
    points: &[WaveParameters],
    options: &StabilityOptions,
    workers: usize,
) -> CliResult<Vec<StabilityReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let reports: Vec<_> = pool.install(|| {
        points
            .par_iter()
            .map(|p| stability_verdict(p, options))
            .collect()
    });
    reports
        .into_iter()
        .map(|r| r.map_err(CliError::from))
        .collect()
}

pub fn cmd_sweep(a: &SweepArgs) -> CliResult<u8> {
    let points = sweep_points(a)?;
    let options = StabilityOptions {
        n: a.n,
        tol_zero: a.tol_zero,
        mode: RouteMode::from(a.mode),
        ..Default::default()
    };
    let reports = run_sweep(&points, &options, a.workers)?;
    let summary = summarize(&reports);
    let mut out = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(SWEEP_COLUMNS)?;
                for (i, r) in reports.iter().enumerate() {
                    w.write_record(sweep_record(i, r))?;
                }
                w.flush()?;
            }
            writeln!(out, "# summary {}", summary.line())?;
        }
        Format::Json => {
            let rows: Vec<Value> = reports
                .iter()
                .enumerate()
                .map(|(i, r)| sweep_json_row(i, r))
                .collect();
            let doc = json!({
                "n": a.n,
                "mode": options.mode,
                "rows": rows,
                "summary": summary.json(),
            });
            out.write_all(json_text(doc).as_bytes())?;
        }
    }
    out.flush()?;
    eprintln!("summary {}", summary.line());
    Ok(summary.exit_code())
}
