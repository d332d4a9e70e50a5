use proptest::prelude::*;
use tlab::corpus::{generate, CorpusKind, CorpusSpec};
use tlab::grid::{Field, TorusGrid};
use tlab::norms::{campanato_norm, frac_campanato_norm, q_norm};
use tlab::spectral::{forward_transform, frac_laplacian_power, heat_semigroup, inverse_transform, leray_project};
use tlab::{BoxFamily, BoxSpec};

fn field(n_log: u32, dims: usize) -> impl Strategy<Value = Field> {
    let n = 1usize << n_log;
    let len = n.pow(dims as u32);
    prop::collection::vec(-10.0f64..10.0, len)
        .prop_map(move |s| Field::new(TorusGrid::unit(dims, n).unwrap(), s).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn binary_io_round_trips(f in field(4, 1)) {
        let mut buf = Vec::new();
        tlab::io::write_field(&f, &mut buf).unwrap();
        prop_assert_eq!(tlab::io::read_field(&buf[..]).unwrap(), f);
    }

    #[test]
    fn box_spec_parses_its_own_format(j_min in 1u32..6, extra in 0u32..4, stride in 1usize..9) {
        let s = format!("{}:{}:{}", j_min, j_min + extra, stride);
        let b = BoxSpec::parse(&s).unwrap();
        prop_assert_eq!(b, BoxSpec { j_min, j_max: Some(j_min + extra), stride: Some(stride) });
    }

    #[test]
    fn norms_are_absolutely_homogeneous_and_ignore_constants(
        f in field(5, 1), c in -5.0f64..5.0, shift in -3.0f64..3.0, alpha in -0.9f64..0.9,
    ) {
        prop_assume!(c.abs() > 1e-3);
        let boxes = BoxFamily::new(*f.grid(), BoxSpec::default()).unwrap();
        let base = campanato_norm(&f, alpha, &boxes).unwrap();
        let scaled = campanato_norm(&f.scaled(c), alpha, &boxes).unwrap();
        prop_assert!(rel(scaled.value, c.abs() * base.value) < 1e-12);
        let shifted_samples: Vec<f64> = f.samples().iter().map(|v| v + shift).collect();
        let shifted = Field::new(*f.grid(), shifted_samples).unwrap();
        prop_assert!(rel(campanato_norm(&shifted, alpha, &boxes).unwrap().value, base.value) < 1e-10);
        let q = q_norm(&f, alpha.abs().max(0.05), &boxes).unwrap().value;
        let qs = q_norm(&f.scaled(c), alpha.abs().max(0.05), &boxes).unwrap().value;
        prop_assert!(rel(qs, c.abs() * q) < 1e-12);
    }

    #[test]
    fn positive_rescaling_keeps_the_argmax_box(f in field(5, 1), c in 0.01f64..100.0, alpha in -0.9f64..0.9) {
        let boxes = BoxFamily::new(*f.grid(), BoxSpec::default()).unwrap();
        let a = frac_campanato_norm(&f, alpha, &boxes).unwrap();
        let b = frac_campanato_norm(&f.scaled(c), alpha, &boxes).unwrap();
        prop_assert_eq!(a.arg_box, b.arg_box);
    }

    #[test]
    fn enlarging_the_family_never_decreases_the_norm(f in field(3, 2), alpha in -0.9f64..0.9) {
        let g = *f.grid();
        let coarse = BoxFamily::new(g, BoxSpec { j_min: 2, j_max: Some(2), stride: Some(2) }).unwrap();
        let wider = BoxFamily::new(g, BoxSpec { j_min: 1, j_max: Some(3), stride: Some(2) }).unwrap();
        let full = BoxFamily::new(g, BoxSpec::full()).unwrap();
        let v = |b: &BoxFamily| campanato_norm(&f, alpha, b).unwrap().value;
        prop_assert!(v(&wider) >= v(&coarse));
        prop_assert!(v(&full) >= v(&wider));
    }

    #[test]
    fn lattice_translations_preserve_the_norm(f in field(5, 1), shift in 0usize..32, alpha in -0.9f64..0.9) {
        let g = *f.grid();
        let boxes = BoxFamily::new(g, BoxSpec::full()).unwrap();
        let s = f.samples();
        let moved = Field::new(g, (0..32).map(|i| s[(i + shift) % 32]).collect()).unwrap();
        let a = campanato_norm(&f, alpha, &boxes).unwrap().value;
        let b = campanato_norm(&moved, alpha, &boxes).unwrap().value;
        prop_assert!(rel(a, b) < 1e-10);
    }

    #[test]
    fn heat_flow_is_an_l2_contraction(f in field(3, 2), t in 0.0f64..0.1) {
        let h = inverse_transform(&heat_semigroup(&forward_transform(&f).unwrap(), t).unwrap());
        prop_assert!(h.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn fractional_powers_invert_each_other(f in field(6, 1), s in -0.95f64..0.95) {
        let (f0, _) = f.without_mean();
        let fh = forward_transform(&f0).unwrap();
        let back = frac_laplacian_power(&frac_laplacian_power(&fh, s).unwrap(), -s).unwrap();
        prop_assert!(inverse_transform(&back).max_abs_diff(&f0) <= 1e-11 * f0.max_abs().max(1e-300));
    }

    #[test]
    fn leray_is_idempotent(a in field(3, 2), b in field(3, 2)) {
        let v = vec![forward_transform(&a).unwrap(), forward_transform(&b).unwrap()];
        let p1 = leray_project(&v).unwrap();
        let p2 = leray_project(&p1).unwrap();
        for (x, y) in p1.iter().zip(&p2) {
            prop_assert!(inverse_transform(x).max_abs_diff(&inverse_transform(y)) <= 1e-12 * 10.0 * 64.0);
        }
    }

    #[test]
    fn corpus_generation_is_reproducible(seed in any::<u64>(), decay in 0.0f64..2.0) {
        let g = TorusGrid::unit(1, 64).unwrap();
        let spec = CorpusSpec::new("x", seed, CorpusKind::FracNoise { decay }, 16);
        let a = generate(&spec, &g).unwrap();
        let b = generate(&spec, &g).unwrap();
        prop_assert_eq!(a.samples(), b.samples());
        let other = generate(&CorpusSpec { seed: seed.wrapping_add(1), ..spec }, &g).unwrap();
        prop_assert_ne!(a.samples(), other.samples());
    }
}
