//! Probability-simplex primitives: distributions over the opinion alphabet,
//! elementary vectors, message sampling and empirical histograms.
//!
//! Opinions are 0-based throughout the crate: an alphabet of size `M` has
//! opinions `0..M`, and `elementary(m, M)` puts its unit mass at index `m`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Allowed deviation of a distribution's total mass from 1.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Entries above `-NEGATIVITY_TOLERANCE` are treated as rounding noise and clamped to 0.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("entry {index} is negative ({value})")]
    NegativeMass { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1")]
    BadSum { sum: f64 },
    #[error("sub-distribution weights sum to {sum}, expected at most 1")]
    ExcessMass { sum: f64 },
    #[error("opinion {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("empty sample")]
    EmptySample,
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
}

/// A point on the probability simplex over `M` opinions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates and normalizes a weight vector.
    ///
    /// Entries in `[-1e-12, 0)` are clamped to zero and the vector is then
    /// rescaled so the stored weights sum to 1 up to a final rounding step.
    pub fn new(weights: Vec<f64>) -> Result<Self, SimplexError> {
        if weights.is_empty() {
            return Err(SimplexError::EmptyAlphabet);
        }
        let mut weights = weights;
        for (index, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(SimplexError::NonFinite { index });
            }
            if *w < -NEGATIVITY_TOLERANCE {
                return Err(SimplexError::NegativeMass { index, value: *w });
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(SimplexError::BadSum { sum });
        }
        if sum != 1.0 {
            for w in weights.iter_mut() {
                *w /= sum;
            }
        }
        Ok(Self { weights })
    }

    /// Uniform distribution on the first `support` opinions of an alphabet of size `size`.
    pub fn uniform_support(size: usize, support: usize) -> Result<Self, SimplexError> {
        if size == 0 {
            return Err(SimplexError::EmptyAlphabet);
        }
        if support == 0 || support > size {
            return Err(SimplexError::IndexOutOfRange { index: support, size });
        }
        let mut weights = vec![0.0; size];
        for w in weights.iter_mut().take(support) {
            *w = 1.0 / support as f64;
        }
        Self::new(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Draws one opinion by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match sample_slice(&self.weights, 0.0, rng) {
            Message::Opinion(m) => m,
            Message::Silent => unreachable!("full distribution has no silent mass"),
        }
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = SimplexError;

    fn try_from(weights: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(weights)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.weights
    }
}

/// Validating constructor; see [`Distribution::new`].
pub fn make_distribution(weights: &[f64]) -> Result<Distribution, SimplexError> {
    Distribution::new(weights.to_vec())
}

/// The elementary vector `e_m` of an alphabet of size `size`.
pub fn elementary(m: usize, size: usize) -> Result<Distribution, SimplexError> {
    if size == 0 {
        return Err(SimplexError::EmptyAlphabet);
    }
    if m >= size {
        return Err(SimplexError::IndexOutOfRange { index: m, size });
    }
    let mut weights = vec![0.0; size];
    weights[m] = 1.0;
    Ok(Distribution { weights })
}

/// Message law with an explicit silent outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SubDistribution {
    weights: Vec<f64>,
    silent_mass: f64,
}

impl SubDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self, SimplexError> {
        if weights.is_empty() {
            return Err(SimplexError::EmptyAlphabet);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(SimplexError::NonFinite { index });
            }
            if w < 0.0 {
                return Err(SimplexError::NegativeMass { index, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum > 1.0 + SUM_TOLERANCE {
            return Err(SimplexError::ExcessMass { sum });
        }
        Ok(Self {
            weights,
            silent_mass: (1.0 - sum).clamp(0.0, 1.0),
        })
    }

    /// Law that never stays silent.
    pub fn from_distribution(d: &Distribution) -> Self {
        Self {
            weights: d.weights.clone(),
            silent_mass: 0.0,
        }
    }

    pub(crate) fn from_parts(weights: Vec<f64>, silent_mass: f64) -> Self {
        Self { weights, silent_mass }
    }

    pub fn all_silent(size: usize) -> Self {
        Self {
            weights: vec![0.0; size],
            silent_mass: 1.0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn silent_mass(&self) -> f64 {
        self.silent_mass
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Probability of `message` under this law.
    pub fn probability(&self, message: Message) -> f64 {
        match message {
            Message::Silent => self.silent_mass,
            Message::Opinion(m) => self.weights.get(m).copied().unwrap_or(0.0),
        }
    }
}

/// One social sample: silence or a single opinion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Message {
    Silent,
    Opinion(usize),
}

impl Message {
    pub fn is_silent(self) -> bool {
        matches!(self, Message::Silent)
    }

    /// Embedding as `0` or `e_m`, as a dense vector of length `size`.
    pub fn embed(self, size: usize) -> Vec<f64> {
        let mut v = vec![0.0; size];
        if let Message::Opinion(m) = self {
            v[m] = 1.0;
        }
        v
    }
}

/// Draws a message with a single uniform variate and inverse CDF.
pub fn sample_message<R: Rng + ?Sized>(p: &SubDistribution, rng: &mut R) -> Message {
    sample_slice(&p.weights, p.silent_mass, rng)
}

pub(crate) fn sample_slice<R: Rng + ?Sized>(weights: &[f64], silent_mass: f64, rng: &mut R) -> Message {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = None;
    for (m, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(m);
            if u < acc {
                return Message::Opinion(m);
            }
        }
    }
    // Rounding can leave the cumulative sum a few ulps short of 1 when there
    // is no silent outcome; the leftover belongs to the last opinion.
    match last_positive {
        Some(m) if silent_mass <= 0.0 => Message::Opinion(m),
        _ => Message::Silent,
    }
}

/// Initial opinions `X_1..X_n` over an alphabet of size `alphabet`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpinionSample {
    values: Vec<usize>,
    alphabet: usize,
}

impl OpinionSample {
    pub fn new(values: Vec<usize>, alphabet: usize) -> Result<Self, SimplexError> {
        if alphabet == 0 {
            return Err(SimplexError::EmptyAlphabet);
        }
        if let Some(&bad) = values.iter().find(|&&x| x >= alphabet) {
            return Err(SimplexError::IndexOutOfRange {
                index: bad,
                size: alphabet,
            });
        }
        Ok(Self { values, alphabet })
    }

    /// `n` i.i.d. draws from `law`.
    pub fn draw<R: Rng + ?Sized>(law: &Distribution, n: usize, rng: &mut R) -> Self {
        let values = (0..n).map(|_| law.sample(rng)).collect();
        Self {
            values,
            alphabet: law.len(),
        }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Normalized histogram of the sample.
pub fn empirical_histogram(sample: &OpinionSample) -> Result<Distribution, SimplexError> {
    if sample.is_empty() {
        return Err(SimplexError::EmptySample);
    }
    let mut counts = vec![0usize; sample.alphabet];
    for &x in &sample.values {
        counts[x] += 1;
    }
    let n = sample.len() as f64;
    Ok(Distribution {
        weights: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn make_distribution_accepts_valid_weights() {
        let d = make_distribution(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        assert_eq!(d.len(), 4);
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let atom = make_distribution(&[1.0]).unwrap();
        assert_eq!(atom.weights(), &[1.0]);
    }

    #[test]
    fn make_distribution_rejects_bad_input() {
        assert!(matches!(
            make_distribution(&[0.5, 0.6]),
            Err(SimplexError::BadSum { .. })
        ));
        assert!(matches!(
            make_distribution(&[1.1, -0.1]),
            Err(SimplexError::NegativeMass { index: 1, .. })
        ));
        assert!(matches!(make_distribution(&[]), Err(SimplexError::EmptyAlphabet)));
        // tiny negative rounding noise is clamped
        let d = make_distribution(&[1.0, -1e-13]).unwrap();
        assert_eq!(d.weights()[1], 0.0);
    }

    #[test]
    fn elementary_vectors() {
        assert_eq!(elementary(1, 4).unwrap().weights(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(elementary(0, 1).unwrap().weights(), &[1.0]);
        assert!(matches!(
            elementary(4, 4),
            Err(SimplexError::IndexOutOfRange { index: 4, size: 4 })
        ));
    }

    #[test]
    fn degenerate_laws_sample_deterministically() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let atom = SubDistribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let silent = SubDistribution::all_silent(4);
        for _ in 0..1000 {
            assert_eq!(sample_message(&atom, &mut rng), Message::Opinion(0));
            assert_eq!(sample_message(&silent, &mut rng), Message::Silent);
        }
    }

    #[test]
    fn sub_distribution_tracks_silent_mass() {
        let p = SubDistribution::new(vec![0.95, 0.0]).unwrap();
        assert!((p.silent_mass() - 0.05).abs() < 1e-15);
        assert!(matches!(
            SubDistribution::new(vec![0.7, 0.7]),
            Err(SimplexError::ExcessMass { .. })
        ));
    }

    #[test]
    fn histogram_counts() {
        let x = OpinionSample::new(vec![0, 0, 1, 2], 3).unwrap();
        assert_eq!(empirical_histogram(&x).unwrap().weights(), &[0.5, 0.25, 0.25]);
        let single = OpinionSample::new(vec![1], 4).unwrap();
        assert_eq!(
            empirical_histogram(&single).unwrap().weights(),
            &[0.0, 1.0, 0.0, 0.0]
        );
        let empty = OpinionSample::new(vec![], 4).unwrap();
        assert_eq!(empirical_histogram(&empty), Err(SimplexError::EmptySample));
        assert!(OpinionSample::new(vec![3], 3).is_err());
    }

    #[test]
    fn message_embedding() {
        assert_eq!(Message::Silent.embed(3), vec![0.0; 3]);
        assert_eq!(Message::Opinion(2).embed(3), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = SubDistribution::new(vec![0.3, 0.2, 0.1]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200).map(|_| sample_message(&p, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }
}
