use faer::c64;
use zakharov_core::operators::{
    assemble_h, assemble_j, assemble_jh, assemble_kernel_vectors, assemble_lame, assemble_scalar,
    LamePeriod,
};
use zakharov_core::spectra::{
    full_spectrum_jh, generalized_kernel_audit, krein_form, krein_parts, krein_signatures,
    symmetric_spectrum, verify_index_formula, zero_threshold,
};
use zakharov_core::waves::{resolve_parameters, sample_wave};
use zakharov_core::{DnoidalWave, IndexCounts, OperatorKind};

fn wave(kappa: f64, c: f64, n: usize) -> DnoidalWave {
    sample_wave(&resolve_parameters(kappa, c, None, Some(1.0)).unwrap(), n).unwrap()
}

#[test]
fn scalar_and_block_kernels_at_reference_point() {
    let w = wave(0.5, 0.0, 256);
    let mut lm =
        symmetric_spectrum(&assemble_scalar(OperatorKind::Lminus, &w).unwrap(), None).unwrap();
    lm.correlate(&[("phi", w.phi.clone())]).unwrap();
    assert_eq!((lm.morse_index, lm.kernel_dim), (0, 1));
    assert!(lm.kernel_correlations[0].cosine > 0.999999);

    let mut lp =
        symmetric_spectrum(&assemble_scalar(OperatorKind::Lplus, &w).unwrap(), None).unwrap();
    lp.correlate(&[("dphi", w.dphi.clone())]).unwrap();
    assert_eq!((lp.morse_index, lp.kernel_dim), (1, 1));
    assert!(lp.kernel_correlations[0].cosine > 0.999999);

    let h = assemble_h(&w, true).unwrap();
    let kv = assemble_kernel_vectors(&w).unwrap();
    let layout = h.layout.as_ref().unwrap();
    let mut hs = symmetric_spectrum(&h, None).unwrap();
    hs.correlate(&[
        ("Psi1", layout.reduce(&kv.psi1)),
        ("Psi2", layout.reduce(&kv.psi2)),
    ])
    .unwrap();
    assert_eq!((hs.morse_index, hs.kernel_dim), (1, 2));
    assert!(hs.kernel_angle.unwrap().cos() > 0.999999);
    assert_eq!(
        hs.morse_index + hs.kernel_dim + hs.positive_count,
        hs.eigenvalues.len()
    );
}

#[test]
fn l_plus_kernel_is_well_separated() {
    let w = wave(0.5, 0.0, 256);
    let op = assemble_scalar(OperatorKind::Lplus, &w).unwrap();
    let r = symmetric_spectrum(&op, None).unwrap();
    let radius = r.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut mags: Vec<f64> = r.eigenvalues.iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    assert!(mags[0] < 1e-9 * radius);
    assert!(mags[1] > 1e3 * mags[0]);
    assert!(mags[0] <= r.tol_zero && r.tol_zero < mags[1]);
    assert_eq!(zero_threshold(&op, Some(1e-9)), 1e-9);
}

#[test]
fn symmetric_spectra_converge() {
    let check = |a: &[f64], b: &[f64], scale: f64| {
        for i in 0..10 {
            let tol = 1e-9 * a[i].abs().max(scale);
            assert!((a[i] - b[i]).abs() < tol, "eig {i}: {} vs {}", a[i], b[i]);
        }
    };
    for kappa in [0.3, 0.9] {
        let (w1, w2) = (wave(kappa, 0.3, 128), wave(kappa, 0.3, 256));
        let a2 = w1.params.alpha * w1.params.alpha;
        for kind in [OperatorKind::Lplus, OperatorKind::Lminus] {
            let e1 = symmetric_spectrum(&assemble_scalar(kind, &w1).unwrap(), None).unwrap();
            let e2 = symmetric_spectrum(&assemble_scalar(kind, &w2).unwrap(), None).unwrap();
            check(&e1.eigenvalues, &e2.eigenvalues, a2);
        }
        for kind in [OperatorKind::Lame1, OperatorKind::Lame2] {
            let e1 = symmetric_spectrum(
                &assemble_lame(kind, kappa, LamePeriod::FourK, 128).unwrap(),
                None,
            )
            .unwrap();
            let e2 = symmetric_spectrum(
                &assemble_lame(kind, kappa, LamePeriod::FourK, 256).unwrap(),
                None,
            )
            .unwrap();
            check(&e1.eigenvalues, &e2.eigenvalues, 1.0);
        }
        let h1 = symmetric_spectrum(&assemble_h(&w1, true).unwrap(), None).unwrap();
        let h2 = symmetric_spectrum(&assemble_h(&w2, true).unwrap(), None).unwrap();
        check(&h1.eigenvalues, &h2.eigenvalues, a2);
    }
}

#[test]
fn hamiltonian_spectrum_structure_and_krein() {
    let w = wave(0.5, 0.0, 128);
    let h = assemble_h(&w, true).unwrap();
    let jh = assemble_jh(&assemble_j(&w.grid, true).unwrap(), &h).unwrap();
    let s = full_spectrum_jh(&jh, None).unwrap();
    assert!(s.max_re < 1e-6 * s.radius);
    assert!(s.pairing_defect_neg < 1e-8);
    assert!(s.pairing_defect_conj < 1e-8);
    assert_eq!((s.k_r, s.k_c), (0, 0));
    assert_eq!(s.zero_cluster, 5);

    let k = krein_signatures(&h, &s).unwrap();
    assert_eq!(k.k_i_minus, 0);
    assert_eq!(k.indeterminate, 0);

    let mut checked = 0;
    for (i, &(re, im)) in s.eigenvalues.iter().enumerate() {
        if re.abs() > s.tol_zero || im <= s.tol_zero {
            continue;
        }
        let z: Vec<c64> = (0..s.eigenvectors.nrows())
            .map(|r| s.eigenvectors[(r, i)])
            .collect();
        let z2: Vec<c64> = z.iter().map(|v| *v * 2.0).collect();
        let (a, b) = krein_parts(&h, &z);
        let f = krein_form(&h, &z);
        let f2 = krein_form(&h, &z2);
        assert_eq!(f.signum(), f2.signum());
        assert!((f2 - 4.0 * f).abs() < 1e-10 * f2.abs());
        assert_eq!(a.signum(), b.signum());
        checked += 1;
        if checked == 40 {
            break;
        }
    }
    assert!(checked > 0);
}

#[test]
fn generalized_kernel_dimensions_at_winding_point() {
    let p = resolve_parameters(0.5, 0.5, Some(1), None).unwrap();
    let w = sample_wave(&p, 256).unwrap();
    let h = assemble_h(&w, true).unwrap();
    let jh = assemble_jh(&assemble_j(&w.grid, true).unwrap(), &h).unwrap();
    let kv = assemble_kernel_vectors(&w).unwrap();
    let audit = generalized_kernel_audit(&h, &jh, &kv, None).unwrap();
    // Measured structure: an extra adjoint vector over Ψ2 with mean-zero
    // fourth component makes the zero cluster five-dimensional.
    assert_eq!(audit.dims, [2, 3, 5, 5]);
    assert!(audit.angles[0] < 1e-6);
    assert!(audit.angles[1] < 1e-4 && audit.angles[2] < 1e-4);
    assert!(audit.jh_eta_tilde1 < 1e-8);
    assert!(audit.jh_eta_tilde3 < 1e-8);
    assert!(audit.jh_eta4 < 1e-8);
}

#[test]
fn index_formula_examples() {
    let c = |k_r, k_c, k_i_minus, n_h, n0_d| IndexCounts {
        k_r,
        k_c,
        k_i_minus,
        n_h,
        n0_d,
    };
    assert_eq!(verify_index_formula(&c(0, 0, 0, 1, 1)), (true, 0));
    assert_eq!(verify_index_formula(&c(1, 0, 0, 1, 0)), (true, 0));
    assert_eq!(verify_index_formula(&c(0, 0, 0, 0, 0)), (true, 0));
    assert_eq!(verify_index_formula(&c(0, 1, 0, 1, 1)), (false, 2));
}
