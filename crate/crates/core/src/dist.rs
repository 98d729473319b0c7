//! Discrete distributions over `[n] = {1, ..., n}`.

use rand::distr::Distribution as _;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamId;

/// Absolute tolerance on `sum(probs) == 1` at construction.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A probability vector over `[n]` with an alias table for O(1) draws.
///
/// Immutable after construction; share freely across threads.
#[derive(Clone)]
pub struct Distribution {
    probs: Vec<f64>,
    sampler: WeightedAliasIndex<f64>,
}

impl std::fmt::Debug for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Distribution").field("n", &self.n()).field("probs", &self.probs).finish()
    }
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        self.probs == other.probs
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    n: usize,
    probs: Vec<f64>,
}

impl Serialize for Distribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistributionRepr { n: self.n(), probs: self.probs.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(d)?;
        if repr.n != repr.probs.len() {
            return Err(serde::de::Error::custom(format!(
                "n = {} but {} probabilities given",
                repr.n,
                repr.probs.len()
            )));
        }
        Distribution::new(repr.probs).map_err(serde::de::Error::custom)
    }
}

impl Distribution {
    /// Builds a distribution from raw probabilities.
    ///
    /// Entries must be finite and non-negative and sum to one within
    /// [`SUM_TOLERANCE`]; a sum inside the tolerance is renormalised exactly.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDomain("domain size must be at least 1".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::invalid(format!("probability {bad} is not a finite non-negative number")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        if sum != 1.0 {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        let sampler =
            WeightedAliasIndex::new(probs.clone()).map_err(|e| Error::invalid(format!("cannot build sampler: {e}")))?;
        Ok(Distribution { probs, sampler })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDomain("uniform distribution needs n >= 1".into()));
        }
        Distribution::new(vec![1.0 / n as f64; n])
    }

    /// First half of the domain at `(1+eps)/n`, second half at `(1-eps)/n`.
    ///
    /// Exactly `eps`-far from uniform with collision probability `(1+eps^2)/n`.
    pub fn bump(n: usize, eps: f64) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!("bump family needs a positive even n, got {n}")));
        }
        check_eps(eps)?;
        let nf = n as f64;
        let probs = (0..n).map(|i| if i < n / 2 { (1.0 + eps) / nf } else { (1.0 - eps) / nf }).collect();
        Distribution::new(probs)
    }

    /// Element 1 carries `1/n + eps/2`; the rest share the remainder equally.
    pub fn heavy(n: usize, eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("heavy family needs n >= 2, got {n}")));
        }
        check_eps(eps)?;
        let nf = n as f64;
        let top = 1.0 / nf + eps / 2.0;
        if top > 1.0 + SUM_TOLERANCE {
            return Err(Error::invalid(format!("eps = {eps} too large for n = {n}")));
        }
        let top = top.min(1.0);
        let rest = (1.0 - top) / (nf - 1.0);
        let mut probs = vec![rest; n];
        probs[0] = top;
        Distribution::new(probs)
    }

    /// All mass on `element` (1-based).
    pub fn point_mass(n: usize, element: usize) -> Result<Self> {
        if element == 0 || element > n {
            return Err(Error::invalid(format!("element {element} outside [1, {n}]")));
        }
        let mut probs = vec![0.0; n];
        probs[element - 1] = 1.0;
        Distribution::new(probs)
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `mu = sum P_i^2`.
    pub fn collision_probability(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    /// `gamma = sum P_i^3`.
    pub fn three_way_collision_probability(&self) -> f64 {
        self.probs.iter().map(|p| p * p * p).sum()
    }

    pub fn l1_distance(&self, other: &Distribution) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::invalid(format!("domain sizes differ: {} vs {}", self.n(), other.n())));
        }
        Ok(self.probs.iter().zip(&other.probs).map(|(p, q)| (p - q).abs()).sum())
    }

    pub fn l1_to_uniform(&self) -> f64 {
        let u = 1.0 / self.n() as f64;
        self.probs.iter().map(|p| (p - u).abs()).sum()
    }

    /// One draw, as a domain element in `[1, n]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.sampler.sample(rng) as u32 + 1
    }

    /// Appends `count` i.i.d. draws to `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, out: &mut Vec<u32>) {
        out.reserve(count);
        out.extend((0..count).map(|_| self.sample(rng)));
    }

    /// `vertex_count` i.i.d. draws from the single stream `stream`.
    pub fn sample_labeling(&self, vertex_count: usize, stream: StreamId) -> SampleLabeling {
        let mut rng = stream.rng();
        let mut values = Vec::with_capacity(vertex_count);
        self.sample_into(&mut rng, vertex_count, &mut values);
        SampleLabeling { values, stream }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// Samples attached to the vertices of a comparison graph.
///
/// `stream` is the trial-level stream the values were drawn from; graphs with
/// an owner partition draw each owner's block from `stream.with_lane(owner)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleLabeling {
    pub values: Vec<u32>,
    pub stream: StreamId,
}

impl SampleLabeling {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn uniform_entries() {
        assert_eq!(Distribution::uniform(4).unwrap().probs(), &[0.25; 4]);
        assert_eq!(Distribution::uniform(1).unwrap().probs(), &[1.0]);
        assert!(close(Distribution::uniform(100).unwrap().collision_probability(), 0.01));
        assert!(matches!(Distribution::uniform(0), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn bump_values() {
        let b = Distribution::bump(4, 0.5).unwrap();
        assert_eq!(b.probs(), &[0.375, 0.375, 0.125, 0.125]);
        assert!(close(b.l1_to_uniform(), 0.5));
        assert!(close(b.collision_probability(), 0.3125));
        assert!(close(b.three_way_collision_probability(), 0.109375));
        assert!(Distribution::bump(4, 0.0).is_err());
        assert!(Distribution::bump(5, 0.5).is_err());
        assert!(Distribution::bump(4, 1.5).is_err());
    }

    #[test]
    fn heavy_is_exactly_eps_far() {
        for &(n, eps) in &[(2, 1.0), (8, 0.5), (64, 0.25), (100, 1.0)] {
            let h = Distribution::heavy(n, eps).unwrap();
            assert!((h.l1_to_uniform() - eps).abs() < 1e-12, "n={n} eps={eps}");
        }
        assert!(Distribution::heavy(1, 0.5).is_err());
    }

    #[test]
    fn point_mass_moments() {
        let p = Distribution::point_mass(4, 3).unwrap();
        assert_eq!(p.collision_probability(), 1.0);
        assert_eq!(p.three_way_collision_probability(), 1.0);
        let u = Distribution::uniform(4).unwrap();
        assert!(close(p.l1_distance(&u).unwrap(), 1.5));
        let lab = p.sample_labeling(50, StreamId::new(1, 0));
        assert!(lab.values.iter().all(|&v| v == 3));
    }

    #[test]
    fn distances() {
        let u = Distribution::uniform(4).unwrap();
        assert_eq!(u.l1_distance(&u).unwrap(), 0.0);
        assert!(u.l1_distance(&Distribution::uniform(5).unwrap()).is_err());
        let b = Distribution::bump(10, 0.3).unwrap();
        assert!(close(b.l1_distance(&Distribution::uniform(10).unwrap()).unwrap(), 0.3));
    }

    #[test]
    fn construction_tolerance() {
        assert!(Distribution::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(Distribution::new(vec![0.5, 0.5 + 1e-9]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(matches!(Distribution::new(vec![]), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn empty_labeling() {
        let u = Distribution::uniform(3).unwrap();
        assert!(u.sample_labeling(0, StreamId::new(0, 0)).is_empty());
    }

    #[test]
    fn labeling_is_reproducible_and_in_range() {
        let b = Distribution::bump(6, 0.4).unwrap();
        let s = StreamId::new(99, 5).with_lane(3);
        let a = b.sample_labeling(500, s);
        assert_eq!(a, b.sample_labeling(500, s));
        assert!(a.values.iter().all(|&v| (1..=6).contains(&v)));
        assert_ne!(a, b.sample_labeling(500, s.with_lane(4)));
    }

    #[test]
    fn binomial_concentration_of_fair_coin() {
        // Frequency of element 1 within 3 sd of 1/2.
        let u = Distribution::uniform(2).unwrap();
        let draws = 100_000usize;
        let lab = u.sample_labeling(draws, StreamId::new(2024, 0));
        let ones = lab.values.iter().filter(|&&v| v == 1).count() as f64 / draws as f64;
        assert!((ones - 0.5).abs() <= 3.0 * (0.25f64 / draws as f64).sqrt(), "freq = {ones}");
    }

    #[test]
    fn json_round_trip_and_validation() {
        let b = Distribution::bump(4, 0.5).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        assert_eq!(text, r#"{"n":4,"probs":[0.375,0.375,0.125,0.125]}"#);
        let back: Distribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<Distribution>(r#"{"n":3,"probs":[0.5,0.5]}"#).is_err());
        assert!(serde_json::from_str::<Distribution>(r#"{"n":2,"probs":[0.5,0.6]}"#).is_err());
    }
}
