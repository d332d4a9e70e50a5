mod common;

use tlab::grid::{Field, TorusGrid};
use tlab::spectral::{forward_transform, frac_laplacian_power, inverse_transform, riesz_transform};

#[test]
fn single_modes_match_closed_form_symbols() {
    let e = common::multiplier_errors();
    assert!(e.symbols <= 1e-12, "symbol error {e:?}");
    assert!(e.composition <= 1e-12, "composition error {e:?}");
}

#[test]
fn round_trip_is_identity_on_every_dimension() {
    for (dims, n) in [(1, 128), (2, 32), (3, 8)] {
        let f = common::white_noise(TorusGrid::new(dims, n, 1.7).unwrap(), 3);
        let back = inverse_transform(&forward_transform(&f).unwrap());
        assert!(back.max_abs_diff(&f) <= 1e-12 * f.max_abs());
    }
}

#[test]
fn zero_mode_is_annihilated() {
    let g = TorusGrid::unit(2, 16).unwrap();
    let f = Field::constant(g, 2.0);
    let fh = forward_transform(&f).unwrap();
    assert_eq!(inverse_transform(&frac_laplacian_power(&fh, 0.5).unwrap()).max_abs(), 0.0);
    assert_eq!(inverse_transform(&riesz_transform(&fh, 1).unwrap()).max_abs(), 0.0);
    // Negative powers need a mean-zero input.
    assert!(frac_laplacian_power(&fh, -0.5).is_err());
}

#[test]
fn riesz_transforms_square_to_minus_identity_off_nyquist() {
    // sum_j R_j^2 = -1 on mean-zero fields without Nyquist content.
    let g = TorusGrid::unit(2, 32).unwrap();
    let f = Field::from_fn(g, |x| {
        (2.0 * std::f64::consts::PI * (3.0 * x[0] - 5.0 * x[1])).sin() + (2.0 * std::f64::consts::PI * 7.0 * x[1]).cos()
    })
    .unwrap();
    let fh = forward_transform(&f).unwrap();
    let mut sum = vec![0.0; g.len()];
    for axis in 0..2 {
        let r2 = riesz_transform(&riesz_transform(&fh, axis).unwrap(), axis).unwrap();
        for (s, v) in sum.iter_mut().zip(inverse_transform(&r2).samples()) {
            *s += v;
        }
    }
    let err = sum.iter().zip(f.samples()).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}
