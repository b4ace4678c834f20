use proptest::prelude::*;
use torus_euler::spectral::{
    biot_savart, gradient, laplacian, random, resample, sobolev_norm, sobolev_norm_scalar,
    solve_poisson_zero_mean, spectral_derivative, vorticity_of, Axis,
};
use torus_euler::{Grid, ScalarField, SobolevIndex, VectorField};

fn idx(s: f64) -> SobolevIndex {
    SobolevIndex::new(s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn field_strategy() -> impl Strategy<Value = (usize, u64, f64)> {
    (
        prop::sample::select(vec![8usize, 16, 32]),
        any::<u64>(),
        1.0f64..6.0,
    )
}

#[test]
fn derivative_oracles() {
    let g = Grid::new(32).unwrap();
    let f = ScalarField::from_fn(g, |x, _| x.sin());
    let d = spectral_derivative(&f, Axis::X1);
    assert!((&d - &ScalarField::from_fn(g, |x, _| x.cos())).max_norm() < 1e-10);
    let f = ScalarField::from_fn(g, |x, y| x.sin() * y.sin());
    let d = spectral_derivative(&f, Axis::X2);
    assert!((&d - &ScalarField::from_fn(g, |x, y| x.sin() * y.cos())).max_norm() < 1e-10);
    assert_eq!(
        spectral_derivative(&ScalarField::constant(g, 1.0), Axis::X1).max_norm(),
        0.0
    );
}

#[test]
fn biot_savart_oracles() {
    let g = Grid::new(32).unwrap();
    let u = biot_savart(&ScalarField::from_fn(g, |x, y| 2.0 * x.sin() * y.sin())).unwrap();
    let exact = VectorField::from_fn(g, |x, y| [x.sin() * y.cos(), -x.cos() * y.sin()]);
    assert!(u.try_sub(&exact).unwrap().max_norm() < 1e-12);
    let u = biot_savart(&ScalarField::from_fn(g, |_, y| y.cos())).unwrap();
    let exact = VectorField::from_fn(g, |_, y| [-y.sin(), 0.0]);
    assert!(u.try_sub(&exact).unwrap().max_norm() < 1e-12);
    assert!(biot_savart(&ScalarField::constant(g, 1.0)).is_err());
}

#[test]
fn sobolev_norm_of_a_single_mode() {
    // sin x1 has coefficients +-1/(2i) at |xi| = 1: ||.||_{H^s} = 2 pi sqrt(2^s / 2).
    let g = Grid::new(16).unwrap();
    let f = ScalarField::from_fn(g, |x, _| x.sin());
    for s in [0.0, 1.0, 3.0] {
        let expect = std::f64::consts::TAU * (2f64.powf(s) / 2.0).sqrt();
        assert!(rel(sobolev_norm_scalar(&f, idx(s)), expect) < 1e-12);
    }
}

#[test]
fn biot_savart_gradient_bound_over_random_fields() {
    // ||grad u||_{H^{k-1}} <= 2 ||omega||_{H^{k-1}} for 200 band-limited samples.
    let g = Grid::new(16).unwrap();
    let k1 = idx(2.0);
    let mut worst = 0.0f64;
    for seed in 0..200 {
        let u = random::random_solenoidal(g, 6.0, 1.0, &mut random::rng(seed, 0));
        let w = vorticity_of(&u);
        let [a, b] = [gradient(u.u1()), gradient(u.u2())];
        let grad_norm = (sobolev_norm(&a, k1).powi(2) + sobolev_norm(&b, k1).powi(2)).sqrt();
        worst = worst.max(grad_norm / sobolev_norm_scalar(&w, k1));
    }
    assert!(worst <= 2.0, "max ratio {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval((n, seed, decay) in field_strategy()) {
        let g = Grid::new(n).unwrap();
        let f = random::random_scalar(g, (n / 2) as f64, decay, &mut random::rng(seed, 1));
        prop_assert!(rel(f.l2_norm_quadrature(), sobolev_norm_scalar(&f, idx(0.0))) < 1e-10);
    }

    #[test]
    fn mixed_partials_commute((n, seed, decay) in field_strategy()) {
        let g = Grid::new(n).unwrap();
        let f = random::random_scalar(g, (n / 2) as f64, decay, &mut random::rng(seed, 2));
        let a = spectral_derivative(&spectral_derivative(&f, Axis::X1), Axis::X2);
        let b = spectral_derivative(&spectral_derivative(&f, Axis::X2), Axis::X1);
        prop_assert!((&a - &b).max_norm() <= 1e-12 * a.max_norm().max(1.0));
    }

    #[test]
    fn biot_savart_inverts_vorticity((n, seed, decay) in field_strategy()) {
        let g = Grid::new(n).unwrap();
        let u = random::random_solenoidal(g, (n / 2 - 1) as f64, decay, &mut random::rng(seed, 3));
        let back = biot_savart(&vorticity_of(&u)).unwrap();
        let k = SobolevIndex::default();
        prop_assert!(sobolev_norm(&back.try_sub(&u).unwrap(), k) <= 1e-10 * sobolev_norm(&u, k));
    }

    #[test]
    fn poisson_inverts_laplacian((n, seed, decay) in field_strategy()) {
        let g = Grid::new(n).unwrap();
        let f = random::random_scalar(g, (n / 2 - 1) as f64, decay, &mut random::rng(seed, 4));
        let back = solve_poisson_zero_mean(&laplacian(&f)).unwrap();
        prop_assert!((&back - &f).max_norm() <= 1e-10 * f.max_norm());
    }

    #[test]
    fn norms_increase_with_index((n, seed, decay) in field_strategy(), s in 0.0f64..4.0, ds in 0.0f64..2.0) {
        let g = Grid::new(n).unwrap();
        let u = random::random_solenoidal(g, (n / 2) as f64, decay, &mut random::rng(seed, 5));
        prop_assert!(sobolev_norm(&u, idx(s)) <= sobolev_norm(&u, idx(s + ds)) * (1.0 + 1e-14));
    }

    #[test]
    fn upsampling_is_exact((n, seed, decay) in field_strategy()) {
        let g = Grid::new(n).unwrap();
        let f = random::random_scalar(g, (n / 2 - 1) as f64, decay, &mut random::rng(seed, 6));
        let back = resample(&resample(&f, Grid::new(2 * n).unwrap()), g);
        prop_assert!((&back - &f).max_norm() <= 1e-12 * f.max_norm());
    }
}
