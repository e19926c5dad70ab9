use std::collections::HashMap;

use ratio_sparse::problem::{dynamic_range, gen_support, gen_values};
use ratio_sparse::{gen_instance, DVector, RngStream, ValueMode};

#[test]
fn small_supports_cover_every_valid_pair() {
    let (n, gap) = (10, 5);
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    let draws = 10_000;
    for seed in 0..draws {
        let s = gen_support(n, 2, 2.5, &mut RngStream::new(seed)).unwrap();
        assert!(s[1] - s[0] >= gap, "{s:?}");
        *counts.entry((s[0], s[1])).or_default() += 1;
    }
    let valid: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + gap..n).map(move |j| (i, j)))
        .collect();
    assert_eq!(valid.len(), 15);
    assert_eq!(counts.len(), valid.len());
    // uniform over the 15 pairs: 667 expected, σ ≈ 25
    let expected = draws as f64 / valid.len() as f64;
    for pair in &valid {
        let c = counts[pair] as f64;
        assert!(
            (c - expected).abs() < 6.0 * expected.sqrt(),
            "{pair:?}: {c}"
        );
    }
}

#[test]
fn dynamic_range_grows_with_d() {
    for d in [1.0, 3.0, 5.0] {
        let mut log_ranges = Vec::new();
        for seed in 0..200 {
            let v = gen_values(400, ValueMode::DynamicRange(d), &mut RngStream::new(seed));
            log_ranges.push(dynamic_range(&DVector::from_vec(v)).unwrap().log10());
        }
        let mean = log_ranges.iter().sum::<f64>() / log_ranges.len() as f64;
        // the range of s uniform exponents has mean D·(s − 1)/(s + 1)
        let expected = d * 399.0 / 401.0;
        assert!(
            (mean - expected).abs() < 0.01,
            "D = {d}: mean log10 range {mean}, expected {expected}"
        );
    }
    let v = gen_values(50, ValueMode::DynamicRange(0.0), &mut RngStream::new(1));
    assert!(v.iter().all(|x| x.abs() == 1.0));
}

#[test]
fn instances_reproduce_their_measurements() {
    let a = gen_instance(64, 1024, 15, 15.0, ValueMode::Gaussian, 9).unwrap();
    let b = gen_instance(64, 1024, 15, 15.0, ValueMode::Gaussian, 9).unwrap();
    assert_eq!(a.a.as_matrix(), b.a.as_matrix());
    assert_eq!(a.x_true, b.x_true);
    assert_eq!(a.b, b.b);
    assert_eq!(a.a.as_matrix() * &a.x_true, a.b);
    let s = a.support();
    assert_eq!(s.len(), 15);
    assert!(s.windows(2).all(|w| w[1] - w[0] >= 30));
}
