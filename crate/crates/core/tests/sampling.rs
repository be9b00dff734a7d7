use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use social_sampling::simplex::{
    empirical_histogram, make_distribution, sample_message, Message, OpinionSample, SubDistribution,
};

#[test]
fn categorical_draws_pass_chi_square() {
    let p = [0.4, 0.3, 0.2, 0.1];
    let law = make_distribution(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 100_000;
    let mut counts = [0usize; 4];
    for _ in 0..draws {
        counts[law.sample(&mut rng)] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(p)
        .map(|(&c, p)| {
            let e = p * draws as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let critical = ChiSquared::new(3.0).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "chi-square {stat} ≥ {critical}");
}

#[test]
fn silent_mass_is_sampled_at_its_rate() {
    let sub = SubDistribution::new(vec![0.2, 0.0, 0.3]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 50_000;
    let mut silent = 0;
    let mut never = 0;
    for _ in 0..n {
        match sample_message(&sub, &mut rng) {
            Message::Silent => silent += 1,
            Message::Opinion(1) => never += 1,
            Message::Opinion(_) => {}
        }
    }
    assert_eq!(never, 0);
    let frac = silent as f64 / n as f64;
    let se = (0.5f64 * 0.5 / n as f64).sqrt();
    assert!((frac - 0.5).abs() < 4.0 * se, "{frac}");
}

#[test]
fn histogram_of_large_sample_tracks_law() {
    let p = [0.1, 0.25, 0.15, 0.3, 0.2];
    let law = make_distribution(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 10_000;
    let sample = OpinionSample::draw(&law, n, &mut rng);
    let h = empirical_histogram(&sample).unwrap();
    for (k, (&got, &want)) in h.weights().iter().zip(&p).enumerate() {
        let sigma = (want * (1.0 - want) / n as f64).sqrt();
        assert!((got - want).abs() <= 3.0 * sigma, "opinion {k}: {got} vs {want}");
    }
}

#[test]
fn histogram_of_known_sample() {
    let s = OpinionSample::new(vec![0, 2, 2, 1, 2], 3).unwrap();
    assert_eq!(empirical_histogram(&s).unwrap().weights(), &[0.2, 0.2, 0.6]);
}
