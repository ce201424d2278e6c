use num_complex::Complex64;
use proptest::prelude::*;

use digit_dirichlet::delange::{d_beta, h_beta, s_beta, BetaParam, FourierTruncation};
use digit_dirichlet::digits::{cumulative_digit_sum, digit_sum, IntegerBase};
use digit_dirichlet::integer_base::{fb_eval, gb_eval, nearest_pole, zb_eval, SeriesTag};
use digit_dirichlet::numerics::{laurent_coefficient, ContourSpec};
use digit_dirichlet::poles::enumerate_poles;
use digit_dirichlet::special::{
    complex_gamma, gamma_ratio, riemann_zeta, riemann_zeta_estimate, PrecisionProfile,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn base(b: u64) -> IntegerBase {
    IntegerBase::new(b).unwrap()
}

fn clear_of_poles(tag: SeriesTag, b: IntegerBase, s: Complex64) -> bool {
    nearest_pole(tag, b, s).map_or(true, |(_, d)| d > 1e-2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn zeta_conjugate_symmetry(r in 0.0f64..50.0, theta in 0.0f64..std::f64::consts::TAU) {
        let s = Complex64::from_polar(r, theta);
        prop_assume!((s - 1.0).norm() > 1e-3);
        let p = PrecisionProfile::default();
        let a = riemann_zeta(s, &p).unwrap();
        let b = riemann_zeta(s.conj(), &p).unwrap();
        prop_assert!((b - a.conj()).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn zeta_direct_and_reflected_routes_agree(re in 0.3f64..0.7, im in -40.0f64..40.0) {
        let s = c(re, im);
        prop_assume!(s.norm() >= 0.1);
        let direct = PrecisionProfile { reflection_threshold: -1e9, ..Default::default() };
        let reflected = PrecisionProfile { reflection_threshold: 1e9, ..Default::default() };
        let a = riemann_zeta_estimate(s, &direct).unwrap().value;
        let b = riemann_zeta_estimate(s, &reflected).unwrap().value;
        prop_assert!((a - b).norm() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn gamma_ratio_identity(re in -6.0f64..6.0, im in -8.0f64..8.0, k in 0usize..=12) {
        let s = c(re, im);
        prop_assume!((s - s.re.round()).norm() > 1e-3 || s.re > 0.5);
        let shifted = s - 1.0 + k as f64;
        prop_assume!((shifted - shifted.re.round()).norm() > 1e-3 || shifted.re > 0.5);
        let lhs = gamma_ratio(s, k).unwrap() * complex_gamma(s).unwrap();
        let rhs = complex_gamma(shifted).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn digit_sum_growth_bound(b in 2u64..40, n in 1u64..(1u64 << 50)) {
        let bb = base(b);
        let digits = (n as f64).log(b as f64).floor() as u64 + 1;
        prop_assert!(digit_sum(bb, n) <= (b - 1) * digits);
    }

    #[test]
    fn cumulative_step(b in 2u64..12, n in 1u64..100_000) {
        let bb = base(b);
        prop_assert_eq!(
            cumulative_digit_sum(bb, n + 1) - cumulative_digit_sum(bb, n),
            digit_sum(bb, n)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integer_base_evaluators_are_conjugate_symmetric(
        b in prop::sample::select(vec![2u64, 3, 10]),
        re in -1.5f64..3.5,
        im in -12.0f64..12.0,
    ) {
        let bb = base(b);
        let s = c(re, im);
        prop_assume!(clear_of_poles(SeriesTag::Zb, bb, s));
        let z = zb_eval(bb, s).unwrap();
        prop_assert!((zb_eval(bb, s.conj()).unwrap() - z.conj()).norm() <= 1e-10 * z.norm().max(1.0));

        prop_assume!(clear_of_poles(SeriesTag::Fb, bb, s));
        let f = fb_eval(bb, s, 8, 1e-10).unwrap().value;
        let fc = fb_eval(bb, s.conj(), 8, 1e-10).unwrap().value;
        prop_assert!((fc - f.conj()).norm() <= 1e-10 * f.norm().max(1.0));

        prop_assume!(clear_of_poles(SeriesTag::Gb, bb, s));
        let g = gb_eval(bb, s, 8, 1e-10).unwrap().value;
        let gc = gb_eval(bb, s.conj(), 8, 1e-10).unwrap().value;
        prop_assert!((gc - g.conj()).norm() <= 1e-10 * g.norm().max(1.0));
    }

    #[test]
    fn fb_continuation_is_independent_of_order(
        b in prop::sample::select(vec![2u64, 3, 10]),
        re in -2.5f64..0.9,
        im in -6.0f64..6.0,
    ) {
        let bb = base(b);
        let s = c(re, im);
        prop_assume!(clear_of_poles(SeriesTag::Fb, bb, s));
        let k = digit_dirichlet::integer_base::default_k(SeriesTag::Fb, s);
        let a = fb_eval(bb, s, k, 1e-12).unwrap();
        let d = fb_eval(bb, s, k + 4, 1e-12).unwrap();
        let spread = (a.value - d.value).norm();
        prop_assert!(spread < 1e-8, "{} at {}", spread, s);
    }

    #[test]
    fn h_beta_is_real_and_periodic(beta in 1.05f64..12.0, x in -3.0f64..3.0) {
        let bp = BetaParam::new(beta).unwrap();
        let trunc = FourierTruncation::new(400).unwrap();
        let h = h_beta(bp, x, trunc).unwrap();
        let shifted = h_beta(bp, x + 1.0, trunc).unwrap();
        prop_assert!(h.value.is_finite());
        prop_assert!((h.value - shifted.value).abs() < 1e-9);
    }

    #[test]
    fn d_beta_telescopes(beta in 1.1f64..9.0, n in 1u64..2000) {
        let bp = BetaParam::new(beta).unwrap();
        let trunc = FourierTruncation::new(200).unwrap();
        let d = d_beta(bp, n, trunc).unwrap().value;
        let step = s_beta(bp, n + 1, trunc).unwrap().value - s_beta(bp, n, trunc).unwrap().value;
        prop_assert!((d - step).abs() < 1e-9 * step.abs().max(1.0));
    }
}

#[test]
fn contour_residue_does_not_depend_on_radius() {
    let b = base(2);
    let f = |s: Complex64| zb_eval(b, s);
    let small = laurent_coefficient(f, &ContourSpec::new(c(0.0, 0.0), 0.3, 64).unwrap(), -1).unwrap();
    let large = laurent_coefficient(f, &ContourSpec::new(c(0.0, 0.0), 0.6, 64).unwrap(), -1).unwrap();
    assert!((small - large).norm() < 1e-9, "{small} vs {large}");
}

#[test]
fn catalogue_residues_come_in_conjugate_pairs() {
    for tag in SeriesTag::ALL {
        for b in [2u64, 3, 10] {
            let poles = enumerate_poles(tag, base(b), 15.0).unwrap();
            for p in &poles {
                let mirror = poles
                    .iter()
                    .find(|q| q.lattice_k == p.lattice_k && q.lattice_m == -p.lattice_m)
                    .expect("mirror pole listed");
                assert!((mirror.residue - p.residue.conj()).norm() < 1e-15);
                assert!(p.residue.norm() >= 1e-15 || p.flag.is_some());
            }
        }
    }
}

#[test]
fn delange_error_shrinks_with_cutoff() {
    for b in [2u64, 3, 5, 10] {
        let errors: Vec<f64> = [250usize, 1000, 4000]
            .iter()
            .map(|&k| digit_dirichlet::verify::delange_max_error(b, k, 1000).unwrap())
            .collect();
        assert!(errors[1] <= 1.1 * errors[0] && errors[2] <= 1.1 * errors[1], "b={b}: {errors:?}");
    }
}
