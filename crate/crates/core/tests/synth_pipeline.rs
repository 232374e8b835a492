mod common;

use cmcca::cca::fit_cca;
use cmcca::interpret::pearson;
use cmcca::prelude::*;

fn standardized(raw: &PairedDataset) -> PairedDataset {
    common::standardized_pair(raw.x().values().clone(), raw.y().values().clone())
}

#[test]
fn noiseless_factor_is_almost_perfectly_correlated() {
    let spec = PlantedSpec::with_random_factors(2000, 20, 15, 1, 5, 1.0, 1e-6, 3).unwrap();
    let (_, truth) = generate_planted(&spec).unwrap();
    assert!(truth.factors[0].sample_correlation >= 0.99);
}

#[test]
fn pure_noise_has_small_first_correlation() {
    let spec = PlantedSpec::with_random_factors(1000, 5, 5, 0, 1, 1.0, 1.0, 4).unwrap();
    let (raw, truth) = generate_planted(&spec).unwrap();
    assert!(truth.factors.is_empty());
    let m = fit_cca(&standardized(&raw), 1, 0.0).unwrap();
    assert!(m.correlations()[0] < 0.15, "{}", m.correlations()[0]);
}

#[test]
fn generated_columns_are_centred_in_expectation() {
    let spec = PlantedSpec::with_random_factors(4000, 6, 4, 2, 2, 3.0, 1.0, 5).unwrap();
    let (raw, _) = generate_planted(&spec).unwrap();
    for j in 0..6 {
        let col = raw.x().column(j);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        // sd of a column is at most sqrt(1 + 2 * 9 / 2) ~ 3.2; 5 standard errors
        assert!(mean.abs() < 5.0 * 3.2 / (4000f64).sqrt(), "column {j}: {mean}");
    }
}

#[test]
fn simulate_fit_score_round_trip() {
    let spec = PlantedSpec::with_random_factors(150, 60, 40, 1, 4, 4.0, 1.0, 6).unwrap();
    let (raw, truth) = generate_planted(&spec).unwrap();
    let d = standardized(&raw);
    let pen = PenaltySpec::new(0.245, 0.3, 60, 40).unwrap();
    let m = fit_scca(&d, &pen, &SccaFitConfig::default()).unwrap();
    let doc = ModelDocument::from_json(&m.to_document().to_json().unwrap()).unwrap();
    let (xw, yw) = doc.weights().unwrap();
    let scored = cmcca::synth::score_weights(&truth, &xw, &yw, &doc.correlations).unwrap();
    assert_eq!(scored, score_recovery(&truth, &m).unwrap());
    let mt = &scored.matches[0];
    assert!(mt.f1_x > 0.8 && mt.f1_y > 0.8, "{mt:?}");
    assert!(mt.correlation_error < 0.1);
    let xs = d.x().values() * nalgebra::DVector::from_vec(spec.factors[0].dense_x(60));
    let ys = d.y().values() * nalgebra::DVector::from_vec(spec.factors[0].dense_y(40));
    assert!(pearson(xs.as_slice(), ys.as_slice()).unwrap() > 0.8);
}
