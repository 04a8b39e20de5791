use aad_core::decoder::{classify_window, reconstruct, Decoder, Trial, TrialMeta};
use aad_core::linmodel::{build_lag_matrix, ridge_solve, Direction, LagConfig};
use aad_core::signal::{
    common_average_reference, design_bandpass, filtfilt_slice, preprocess_chain, BandpassSpec,
    MonoSeries, MultiSeries,
};
use aad_core::trf::{contrast_trfs, estimate_trf, predict_response, StreamTrfs};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

fn multi(seed: u64, t: usize, n: usize, fs: f64) -> MultiSeries {
    let v = noise(seed, t * n);
    MultiSeries::new(DMatrix::from_column_slice(t, n, &v), fs, labels(n)).unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = a.iter().map(|x| x.abs()).fold(1e-300, f64::max);
    num / den
}

fn permuted(eeg: &MultiSeries, perm: &[usize]) -> MultiSeries {
    let cols: Vec<Vec<f64>> = perm.iter().map(|&j| eeg.channel(j).to_vec()).collect();
    let names = perm.iter().map(|&j| eeg.channels()[j].clone()).collect();
    MultiSeries::from_columns(&cols, eeg.fs(), names).unwrap()
}

fn shuffle(seed: u64, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn filtfilt_commutes_with_reversal(seed in any::<u64>(), len in 100usize..2000) {
        let coeffs = design_bandpass(&BandpassSpec::default(), 64.0).unwrap();
        let x = noise(seed, len);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let mut a = filtfilt_slice(&rev, &coeffs).unwrap();
        a.reverse();
        let b = filtfilt_slice(&x, &coeffs).unwrap();
        prop_assert!(rel_diff(&b, &a) < 1e-9);
    }

    #[test]
    fn eeg_chain_is_linear(
        seed in any::<u64>(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        car in any::<bool>(),
    ) {
        let band = BandpassSpec::default();
        let x = multi(seed, 1500, 3, 256.0);
        let y = multi(seed ^ 0xabcd, 1500, 3, 256.0);
        let mix = MultiSeries::new(x.samples() * a + y.samples() * b, 256.0, labels(3)).unwrap();
        let lhs = preprocess_chain(&mix, &band, 64.0, car).unwrap();
        let cx = preprocess_chain(&x, &band, 64.0, car).unwrap();
        let cy = preprocess_chain(&y, &band, 64.0, car).unwrap();
        let rhs = cx.samples() * a + cy.samples() * b;
        let scale = lhs.samples().amax().max(rhs.amax()).max(1e-12);
        prop_assert!((lhs.samples() - rhs).amax() / scale < 1e-6);
    }

    #[test]
    fn car_is_idempotent(seed in any::<u64>(), n in 2usize..16) {
        let eeg = multi(seed, 200, n, 128.0);
        let once = common_average_reference(&eeg).unwrap();
        let twice = common_average_reference(&once).unwrap();
        prop_assert!((once.samples() - twice.samples()).amax() < 1e-12);
        for row in once.samples().row_iter() {
            prop_assert!((row.sum() / n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn ridge_norm_shrinks_with_lambda(seed in any::<u64>(), l1 in -6.0f64..3.0, step in 0.1f64..3.0) {
        let x = DMatrix::from_column_slice(120, 10, &noise(seed, 1200));
        let y = DMatrix::from_column_slice(120, 2, &noise(seed.wrapping_add(1), 240));
        let design = aad_core::linmodel::DesignMatrix::plain(x);
        let small = ridge_solve(&design, &y, 10f64.powf(l1)).unwrap();
        let large = ridge_solve(&design, &y, 10f64.powf(l1 + step)).unwrap();
        prop_assert!(small.weights.norm() >= large.weights.norm() * (1.0 - 1e-12));
        let huge = ridge_solve(&design, &y, 1e12).unwrap();
        let reference = ridge_solve(&design, &y, 0.1).unwrap();
        prop_assert!(huge.weights.norm() < 1e-6 * reference.weights.norm());
    }

    #[test]
    fn ridge_weights_follow_channel_permutation(seed in any::<u64>(), n in 2usize..6) {
        let lags = LagConfig::new(-20.0, 60.0, 64.0).unwrap();
        let eeg = multi(seed, 300, n, 64.0);
        let target = DMatrix::from_column_slice(300, 1, &noise(seed ^ 7, 300));
        let perm = shuffle(seed, n);
        let w = ridge_solve(&build_lag_matrix(&eeg, &lags, Direction::Backward).unwrap(), &target, 0.01)
            .unwrap()
            .weights;
        let wp = ridge_solve(
            &build_lag_matrix(&permuted(&eeg, &perm), &lags, Direction::Backward).unwrap(),
            &target,
            0.01,
        )
        .unwrap()
        .weights;
        let nl = lags.n_lags();
        for (new, &old) in perm.iter().enumerate() {
            for l in 0..nl {
                let d = (wp[(new * nl + l, 0)] - w[(old * nl + l, 0)]).abs();
                prop_assert!(d < 1e-9 * w.amax().max(1.0));
            }
        }
    }

    #[test]
    fn reconstruction_follows_channel_permutation(seed in any::<u64>(), n in 1usize..8) {
        let lags = LagConfig::default_at(64.0);
        let eeg = multi(seed, 400, n, 64.0);
        let g = DMatrix::from_column_slice(lags.n_lags(), n, &noise(seed ^ 3, lags.n_lags() * n));
        let perm = shuffle(seed, n);
        let gp = DMatrix::from_fn(lags.n_lags(), n, |l, j| g[(l, perm[j])]);
        let names: Vec<String> = perm.iter().map(|&j| format!("c{j}")).collect();
        let a = reconstruct(&Decoder::from_weights(g, lags, labels(n)).unwrap(), &eeg).unwrap();
        let b = reconstruct(&Decoder::from_weights(gp, lags, names).unwrap(), &permuted(&eeg, &perm)).unwrap();
        let worst = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-12);
    }

    #[test]
    fn choice_survives_affine_candidate_changes(
        seed in any::<u64>(),
        k in 0usize..4,
        scale in 0.01f64..100.0,
        offset in -50.0f64..50.0,
    ) {
        let lags = LagConfig::default_at(64.0);
        let eeg = multi(seed, 640, 3, 64.0);
        let cands: Vec<MonoSeries> = (0..4)
            .map(|i| MonoSeries::new(noise(seed.wrapping_add(10 + i), 640), 64.0).unwrap())
            .collect();
        let meta = TrialMeta { subject: "S".into(), trial: "T".into(), azimuths_deg: [-60.0, -30.0, 30.0, 60.0] };
        let g = DMatrix::from_column_slice(lags.n_lags(), 3, &noise(seed ^ 5, lags.n_lags() * 3));
        let dec = Decoder::from_weights(g, lags, labels(3)).unwrap();
        let trial = Trial::new(eeg.clone(), cands.clone(), 0, meta.clone()).unwrap();
        let mut changed = cands;
        changed[k] = MonoSeries::new(changed[k].samples().iter().map(|v| v * scale + offset).collect(), 64.0).unwrap();
        let trial2 = Trial::new(eeg, changed, 0, meta).unwrap();
        let a = classify_window(&dec, &trial, 0.0, 5.0).unwrap();
        let b = classify_window(&dec, &trial2, 0.0, 5.0).unwrap();
        prop_assert_eq!(a.chosen, b.chosen);
    }

    #[test]
    fn trf_weights_scale_inversely_with_envelope(seed in any::<u64>(), c in 0.05f64..20.0) {
        let lags = LagConfig::default_at(64.0);
        let env = noise(seed, 600);
        let eeg = multi(seed ^ 9, 600, 2, 64.0);
        let a = estimate_trf(&MonoSeries::new(env.clone(), 64.0).unwrap(), &eeg, &lags, 0.1).unwrap();
        let scaled = MonoSeries::new(env.iter().map(|v| v * c).collect(), 64.0).unwrap();
        let b = estimate_trf(&scaled, &eeg, &lags, 0.1).unwrap();
        prop_assert!((&a.weights / c - &b.weights).amax() <= 1e-6 * (a.weights.amax() / c));
    }

    #[test]
    fn trf_fit_correlates_nonnegatively(seed in any::<u64>(), l in -6.0f64..6.0) {
        let lags = LagConfig::default_at(64.0);
        let env = MonoSeries::new(noise(seed, 500), 64.0).unwrap();
        let eeg = multi(seed ^ 11, 500, 3, 64.0);
        let trf = estimate_trf(&env, &eeg, &lags, 10f64.powf(l)).unwrap();
        let (_, r) = predict_response(&trf, &env, Some(&eeg)).unwrap();
        let r = r.unwrap();
        prop_assert!(r.iter().sum::<f64>() / r.len() as f64 >= 0.0);
    }

    #[test]
    fn contrast_ignores_trial_order(seed in any::<u64>(), n in 1usize..6) {
        let lags = LagConfig::default_at(64.0);
        let eeg = multi(seed, 300, 2, 64.0);
        let sets: Vec<StreamTrfs> = (0..n)
            .map(|i| {
                let trfs = (0..4)
                    .map(|k| {
                        let env = MonoSeries::new(noise(seed.wrapping_add((i * 4 + k) as u64), 300), 64.0).unwrap();
                        estimate_trf(&env, &eeg, &lags, 1.0).unwrap()
                    })
                    .collect();
                StreamTrfs { subject: "S".into(), trial: format!("T{i}"), attended_index: i % 4, trfs }
            })
            .collect();
        let mut rev = sets.clone();
        rev.reverse();
        let a = contrast_trfs(&sets).unwrap();
        let b = contrast_trfs(&rev).unwrap();
        prop_assert!((&a.attended.weights - &b.attended.weights).amax() < 1e-12);
        prop_assert!((&a.unattended.weights - &b.unattended.weights).amax() < 1e-12);
    }
}
