use heavylight::coarsen::halving_increment_sum;
use heavylight::finalround::sample_proportional;
use heavylight::rational::rat;
use heavylight::Rational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn proportional_sampling_passes_chi_square() {
    // machines 1..=4 carry z = 1/10..4/10; machine 0 and 5 are outside the group
    let mut z = vec![Rational::zero(); 6];
    for i in 1..=4 {
        z[i] = rat(i as i64, 10);
    }
    z[0] = rat(9, 10);
    z[5] = rat(9, 10);
    let group = [1, 2, 3, 4];
    let draws = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut counts = [0usize; 6];
    for _ in 0..draws {
        counts[sample_proportional(&group, &z, &mut rng).unwrap()] += 1;
    }
    assert_eq!(counts[0] + counts[5], 0);
    let chi2: f64 = (1..=4)
        .map(|i| {
            let expected = draws as f64 * i as f64 / 10.0;
            (counts[i] as f64 - expected).powi(2) / expected
        })
        .sum();
    // 3 degrees of freedom, 0.999 quantile
    assert!(chi2 < 16.27, "chi2 = {chi2}, counts = {counts:?}");
}

#[test]
fn proportional_sampling_with_uneven_denominators() {
    let z = vec![rat(1, 3), rat(1, 7), rat(2, 21)];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws = 21_000;
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        counts[sample_proportional(&[0, 1, 2], &z, &mut rng).unwrap()] += 1;
    }
    // weights 7 : 3 : 2 over 12
    let chi2: f64 = [7.0, 3.0, 2.0]
        .iter()
        .zip(counts)
        .map(|(w, c)| {
            let e = draws as f64 * w / 12.0;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    assert!(chi2 < 13.82, "chi2 = {chi2}");
}

#[test]
fn zero_mass_group_is_rejected() {
    let z = vec![Rational::zero(); 2];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(sample_proportional(&[0, 1], &z, &mut rng).is_err());
    assert!(sample_proportional(&[], &z, &mut rng).is_err());
}

/// The θ growth of halving from far above down to `q0` is a geometric-like
/// series with ratio tending to `1/√2`, so its total approaches
/// `c/(1 − 1/√2) ≈ 3.41·c` times the first term. With `c = 8` that is about
/// `27.3·√(ln q0/q0)`, above the `16·√(ln q0/q0)` a ratio-1/2 estimate gives.
#[test]
fn halving_increment_total_exceeds_ratio_half_estimate() {
    let limit = 8.0 / (1.0 - 0.5f64.sqrt());
    for &q0 in &[100.0, 1e3, 1e4, 1e6, 1e9, 1e12] {
        let first = (f64::ln(q0) / q0).sqrt();
        let ratio = halving_increment_sum(q0, 8.0) / first;
        assert!(ratio > 16.0, "q0 = {q0}: ratio {ratio}");
        // ln(2x) > ln x makes the terms decay slightly slower than 1/√2
        assert!(ratio > limit - 1e-9, "q0 = {q0}: ratio {ratio}");
        assert!(ratio < limit * 1.5, "q0 = {q0}: ratio {ratio}");
    }
    // the ratio approaches the limit from above as q0 grows
    let r = |q0: f64| halving_increment_sum(q0, 8.0) / (f64::ln(q0) / q0).sqrt();
    assert!(r(1e12) < r(1e3));
}

#[test]
fn halving_increment_total_is_linear_in_the_coefficient() {
    let a = halving_increment_sum(500.0, 1.0);
    let b = halving_increment_sum(500.0, 8.0);
    assert!((b - 8.0 * a).abs() < 1e-9 * b);
}
