use cmcca::special::chi_square_sf;
use cmcca::wilks::wilks_from_correlations;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn chi_square_tail_matches_statrs() {
    let mut worst = 0.0f64;
    for df in 1..=50u32 {
        let oracle = ChiSquared::new(f64::from(df)).unwrap();
        for i in 1..=1000 {
            let x = 0.1 * f64::from(i);
            let got = chi_square_sf(x, df).unwrap();
            let want = oracle.sf(x);
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst <= 1e-8, "max deviation {worst}");
}

#[test]
fn lambda_is_the_trailing_product() {
    let rho = [0.8, 0.55, 0.3, 0.1];
    let report = wilks_from_correlations(&rho, 200, 5, 4).unwrap();
    for (i, row) in report.rows.iter().enumerate() {
        let lambda: f64 = rho[i..].iter().map(|r| 1.0 - r * r).product();
        assert!((row.wilks_lambda - lambda).abs() <= 1e-10);
        let m = 200.0 - 1.0 - (5.0 + 4.0 + 1.0) / 2.0;
        assert!((row.chi_square + m * lambda.ln()).abs() <= 1e-9);
        assert_eq!(row.degrees_of_freedom as usize, (5 - i) * (4 - i));
    }
}
