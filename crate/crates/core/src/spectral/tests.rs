use super::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// cos(x_1) on the 2-torus: coefficient 1/2 at +-(1,0).
fn cos_x1(trunc: u32) -> SpectralField {
    let mut f = SpectralField::zero_torus_scalar(2, trunc).unwrap();
    f.set_pair(0, &[1, 0, 0], Complex::new(0.5, 0.0));
    f
}

// ---------------------------------------------------------------------
// galerkin_project
// ---------------------------------------------------------------------

#[test]
fn project_keeps_mode_at_cutoff() {
    let mut f = SpectralField::zero_torus_scalar(2, 9).unwrap();
    f.set_pair(0, &[2, 0, 0], Complex::new(0.3, 0.1)); // |m|^2 = 4
    let g = f.galerkin_project(4).unwrap();
    assert_eq!(g.coeff(0, &[2, 0, 0]), Complex::new(0.3, 0.1));
    assert_eq!(g.coeff(0, &[-2, 0, 0]), Complex::new(0.3, -0.1));
    assert!((g.l2_norm() - f.l2_norm()).abs() < 1e-15);
}

#[test]
fn project_to_own_truncation_is_identity() {
    let mut r = rng(7);
    let f = SpectralField::random_torus_scalar(2, 9, 0.3, &mut r).unwrap();
    let g = f.galerkin_project(9).unwrap();
    for m in f.modes() {
        assert_eq!(f.coeff(0, &m), g.coeff(0, &m));
    }
}

#[test]
fn project_drops_high_modes_parseval() {
    // modes |m|^2 in {1, 9}; projection to N'=4 keeps only |m|^2 = 1.
    let mut f = SpectralField::zero_torus_scalar(2, 9).unwrap();
    f.set_pair(0, &[1, 0, 0], Complex::new(0.5, 0.0));
    f.set_pair(0, &[3, 0, 0], Complex::new(0.0, 0.25));
    let g = f.galerkin_project(4).unwrap();
    // Parseval sum over the surviving pair: (2pi)^2 * 2 * |1/2|^2
    let expect = TWO_PI * TWO_PI * 2.0 * 0.25;
    assert!((g.l2_norm_sq() - expect).abs() < 1e-12 * expect);
    assert_eq!(g.coeff(0, &[3, 0, 0]), Complex::new(0.0, 0.0));
}

#[test]
fn project_above_truncation_errors() {
    let f = SpectralField::zero_torus_scalar(2, 4).unwrap();
    assert!(matches!(f.galerkin_project(9), Err(Error::Truncation { .. })));
}

#[test]
fn galerkin_projection_is_orthogonal() {
    let mut r = rng(21);
    let f = SpectralField::random_torus_scalar(2, 16, 0.2, &mut r).unwrap();
    let low = f.galerkin_project(4).unwrap().embed(16).unwrap();
    let rest = f.sub(&low).unwrap();
    // exact at the coefficient level: disjoint supports
    assert_eq!(low.inner_product(&rest).unwrap(), 0.0);
}

// ---------------------------------------------------------------------
// leray_project
// ---------------------------------------------------------------------

#[test]
fn leray_kills_gradient_fields() {
    // c(m) parallel to m for every mode => projection is exactly zero.
    let mut f = SpectralField::zero_torus_vector(3, 4).unwrap();
    for m in f.canonical_modes() {
        let z = Complex::new(0.2, -0.4);
        for c in 0..3 {
            f.set_pair(c, &m, z * m[c] as f64);
        }
    }
    let g = f.leray_project().unwrap();
    assert!(g.l2_norm() < 1e-14);
}

#[test]
fn leray_fixes_divergence_free_fields_and_is_idempotent() {
    let mut r = rng(3);
    let f = SpectralField::random_torus_vector(3, 6, 0.3, &mut r).unwrap();
    assert!(f.max_divergence() < 1e-13);
    let g = f.leray_project().unwrap();
    let diff = g.sub(&f).unwrap();
    assert!(diff.l2_norm() < 1e-13 * (1.0 + f.l2_norm()));
}

#[test]
fn leray_single_mode_hand_value() {
    // m = (1,0), c = (1,1): output (0,1) at that mode.
    let mut f = SpectralField::zero_torus_vector(2, 4).unwrap();
    f.set_pair(0, &[1, 0, 0], Complex::new(1.0, 0.0));
    f.set_pair(1, &[1, 0, 0], Complex::new(1.0, 0.0));
    let g = f.leray_project().unwrap();
    assert!((g.coeff(0, &[1, 0, 0]).norm()) < 1e-15);
    assert!((g.coeff(1, &[1, 0, 0]) - Complex::new(1.0, 0.0)).norm() < 1e-15);
    assert!(g.max_divergence() < 1e-15);
}

#[test]
fn leray_self_adjoint() {
    let mut r = rng(11);
    for _ in 0..20 {
        let mut u = SpectralField::zero_torus_vector(3, 6).unwrap();
        let mut v = SpectralField::zero_torus_vector(3, 6).unwrap();
        u.fill_random(0.3, &mut r);
        v.fill_random(0.3, &mut r);
        let pu = u.leray_project().unwrap();
        let pv = v.leray_project().unwrap();
        let a = pu.inner_product(&v).unwrap();
        let b = u.inner_product(&pv).unwrap();
        assert!(
            (a - b).abs() <= 1e-12 * u.l2_norm() * v.l2_norm(),
            "self-adjointness violated: {a} vs {b}"
        );
    }
}

// ---------------------------------------------------------------------
// inner_product / norms
// ---------------------------------------------------------------------

#[test]
fn inner_product_positive_definite() {
    let mut r = rng(5);
    let f = SpectralField::random_torus_scalar(2, 8, 0.3, &mut r).unwrap();
    assert!(f.inner_product(&f).unwrap() > 0.0);
    let z = SpectralField::zero_torus_scalar(2, 8).unwrap();
    assert_eq!(z.inner_product(&z).unwrap(), 0.0);
}

#[test]
fn inner_product_distinct_modes_orthogonal() {
    let mut f = SpectralField::zero_torus_scalar(2, 9).unwrap();
    f.set_pair(0, &[1, 0, 0], Complex::new(0.5, 0.0));
    let mut g = SpectralField::zero_torus_scalar(2, 9).unwrap();
    g.set_pair(0, &[2, 1, 0], Complex::new(0.0, 0.5));
    assert_eq!(f.inner_product(&g).unwrap(), 0.0);
}

#[test]
fn inner_product_cos_squared() {
    // <cos x1, cos x1> = (2pi)^2 / 2 on the 2-torus
    let f = cos_x1(4);
    let expect = TWO_PI * TWO_PI * 0.5;
    assert!((f.inner_product(&f).unwrap() - expect).abs() < 1e-12 * expect);
}

#[test]
fn inner_product_shape_mismatch() {
    let f = SpectralField::zero_torus_scalar(2, 4).unwrap();
    let g = SpectralField::zero_torus_scalar(2, 9).unwrap();
    assert!(matches!(f.inner_product(&g), Err(Error::ShapeMismatch(_))));
}

#[test]
fn hs_norm_single_mode_multiplier() {
    let mut f = SpectralField::zero_torus_scalar(2, 16).unwrap();
    f.set_pair(0, &[2, 1, 0], Complex::new(0.3, -0.2));
    let s = 2.5;
    let msq: f64 = 5.0;
    let expect = msq.powf(s / 2.0) * f.l2_norm();
    assert!((f.hs_norm(s) - expect).abs() < 1e-12 * expect);
}

#[test]
fn h0_is_l2() {
    let mut r = rng(9);
    let f = SpectralField::random_torus_scalar(2, 12, 0.2, &mut r).unwrap();
    let a = f.norm(&NormSpec::h(0.0)).unwrap();
    let b = f.l2_norm();
    assert!((a - b).abs() <= 1e-12 * b);
}

#[test]
fn l4_norm_of_cosine() {
    // ||cos x1||_L4^4 = (2pi)^2 * 3/8 on the 2-torus.
    // W^{k,p} is derivative-based here, so build the L4 integral from the
    // k=1 norm of the antiderivative trick instead: use quadrature directly.
    let f = cos_x1(4);
    // |grad u| for u = cos(x1) is |sin(x1)|; integral of sin^4 equals
    // integral of cos^4 over full periods, so W^{1,4} gives the same value.
    let w = f.norm(&NormSpec::w(1, 4)).unwrap();
    let expect = (TWO_PI * TWO_PI * 3.0 / 8.0f64).powf(0.25);
    assert!((w - expect).abs() < 1e-12 * expect, "got {w}, want {expect}");
}

#[test]
fn w_norm_refinement_stable() {
    // oversampling beyond the exactness threshold must not change the value
    let mut r = rng(13);
    let f = SpectralField::random_torus_scalar(2, 9, 0.4, &mut r).unwrap();
    let a = f.norm(&NormSpec::LebesgueW { k: 2, p: 6, oversample: 1.0 }).unwrap();
    let b = f.norm(&NormSpec::LebesgueW { k: 2, p: 6, oversample: 1.7 }).unwrap();
    assert!((a - b).abs() <= 1e-10 * (1.0 + a));
}

#[test]
fn w_norm_on_shell_state_unsupported() {
    let f = SpectralField::zero_shell(8, ShellParams { k0: 1.0, lambda: 2.0 }).unwrap();
    assert!(matches!(f.norm(&NormSpec::w(2, 6)), Err(Error::Unsupported(_))));
}

#[test]
fn shell_hs_norm_multiplier() {
    let params = ShellParams { k0: 1.0, lambda: 2.0 };
    let mut f = SpectralField::zero_shell(8, params).unwrap();
    f.set_shell_coeff(3, Complex::new(0.0, 2.0));
    let s = 1.5;
    let expect = params.wavenumber(3).powf(s) * 2.0;
    assert!((f.hs_norm(s) - expect).abs() < 1e-12 * expect);
}

#[test]
fn hs_monotone_in_s() {
    let mut r = rng(17);
    let f = SpectralField::random_torus_scalar(2, 9, 0.3, &mut r).unwrap();
    // all retained |m| >= 1, so s -> |m|^s is nondecreasing
    let mut last = f.hs_norm(0.0);
    for i in 1..=8 {
        let s = i as f64 * 0.5;
        let cur = f.hs_norm(s);
        assert!(cur >= last - 1e-12 * last);
        last = cur;
    }
}

// ---------------------------------------------------------------------
// quadratic products and the convolution oracle
// ---------------------------------------------------------------------

/// Brute-force Fourier convolution over the retained mode set; the
/// independent oracle for the padded-transform product.
fn convolution_oracle(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zero_torus_scalar(u.dim(), u.truncation()).unwrap();
    let umodes = u.modes();
    let vmodes = v.modes();
    for k in out.modes().iter().filter(|k| is_canonical(k)) {
        let mut acc = Complex::new(0.0, 0.0);
        for a in &umodes {
            let b = [k[0] - a[0], k[1] - a[1], k[2] - a[2]];
            let _ = vmodes; // membership via in_ball check below
            if v.in_ball(&b) {
                acc += u.coeff(0, a) * v.coeff(0, &b);
            }
        }
        out.set_pair(0, k, acc);
    }
    out
}

#[test]
fn product_with_constant_one_grid() {
    // multiplying by the constant-1 collocation values reproduces the field:
    // emulate by product with itself where the "one" field is delivered by a
    // unit mean -- here directly: u * 1 via grid closure equals u.
    let f = cos_x1(4);
    // 1 has no retained modes (zero mode excluded); use the identity
    // cos * cos and the product-to-sum identity instead to pin the path:
    let (p, mean) = f.quadratic_product_with_mean(&f).unwrap();
    // cos^2 = 1/2 + cos(2x)/2; zero-mean part is cos(2x)/2
    assert!((mean - 0.5).abs() < 1e-13);
    assert!((p.coeff(0, &[2, 0, 0]) - Complex::new(0.25, 0.0)).norm() < 1e-13);
    assert!((p.coeff(0, &[1, 0, 0])).norm() < 1e-14);
}

#[test]
fn padded_product_matches_convolution_oracle() {
    let mut r = rng(23);
    for trial in 0..5 {
        let u = SpectralField::random_torus_scalar(2, 8, 0.2, &mut r).unwrap();
        let v = SpectralField::random_torus_scalar(2, 8, 0.2, &mut r).unwrap();
        let fast = u.quadratic_product(&v).unwrap();
        let slow = convolution_oracle(&u, &v);
        let scale = u.l2_norm() * v.l2_norm();
        for m in fast.modes() {
            let d = (fast.coeff(0, &m) - slow.coeff(0, &m)).norm();
            assert!(d <= 1e-12 * (1.0 + scale), "trial {trial}: mode {m:?} differs by {d}");
        }
    }
}

#[test]
fn parseval_matches_collocation_quadrature() {
    let mut r = rng(29);
    for _ in 0..100 {
        let u = SpectralField::random_torus_scalar(2, 6, 0.3, &mut r).unwrap();
        let v = SpectralField::random_torus_scalar(2, 6, 0.3, &mut r).unwrap();
        let ip = u.inner_product(&v).unwrap();
        // quadrature of the pointwise product on a padded grid
        let (_, mean) = u.quadratic_product_with_mean(&v).unwrap();
        let quad = mean * u.volume();
        let scale = u.l2_norm() * v.l2_norm();
        assert!((ip - quad).abs() <= 1e-10 * (1.0 + scale), "{ip} vs {quad}");
    }
}

#[test]
fn reality_and_zero_mean_invariants_of_random_fields() {
    let mut r = rng(31);
    let f = SpectralField::random_torus_scalar(3, 6, 0.3, &mut r).unwrap();
    assert!(f.max_reality_defect() < 1e-15);
    assert_eq!(f.coeff(0, &[0, 0, 0]), Complex::new(0.0, 0.0));
    let g = SpectralField::random_torus_vector(3, 6, 0.3, &mut r).unwrap();
    assert!(g.max_reality_defect() < 1e-15);
    assert!(g.max_divergence() < 1e-13);
}

#[test]
fn linf_norm_of_cosine() {
    let f = cos_x1(4);
    let l = f.linf_norm().unwrap();
    assert!((l - 1.0).abs() < 1e-10);
}
