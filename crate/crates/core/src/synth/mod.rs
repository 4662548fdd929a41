//! Seeded synthetic labeled streams with a planted linear concept and
//! scheduled concept drift.
//!
//! Every column is drawn independently from a range resembling the real
//! feature it stands in for (flags are fair coins, ports uniform integers,
//! lengths and times uniform reals). For the concept, each value is mapped
//! to `[-1, 1]` by its domain's midpoint and half-width; a record is an
//! attack iff the planted weights give a negative score on those mapped
//! values, after which labels are flipped with the regime's noise rate.

mod oracle;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{ExtractedRecord, FEATURE_COUNT};
use crate::model::Label;

pub use oracle::{grid_oracle, GRID_POINT_LIMIT};

/// Value range of one synthetic column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Flag,
    Int { lo: i64, hi: i64 },
    Real { lo: f64, hi: f64 },
    Choice(&'static [f64]),
}

impl Domain {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Domain::Flag => f64::from(u8::from(rng.gen_bool(0.5))),
            Domain::Int { lo, hi } => rng.gen_range(lo..=hi) as f64,
            Domain::Real { lo, hi } => rng.gen_range(lo..hi),
            Domain::Choice(values) => values[rng.gen_range(0..values.len())],
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            Domain::Flag => (0.0, 1.0),
            Domain::Int { lo, hi } => (lo as f64, hi as f64),
            Domain::Real { lo, hi } => (lo, hi),
            Domain::Choice(values) => {
                values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
            }
        }
    }

    /// Maps a value of this domain onto `[-1, 1]`.
    pub fn standardize(&self, x: f64) -> f64 {
        let (lo, hi) = self.bounds();
        (x - (lo + hi) / 2.0) / ((hi - lo) / 2.0)
    }
}

const OCTET: Domain = Domain::Int { lo: 0, hi: 255 };
const PORT: Domain = Domain::Int { lo: 0, hi: 65535 };

/// Per-column domains, in extracted-feature order.
#[rustfmt::skip]
pub const DOMAINS: [Domain; FEATURE_COUNT] = [
    Domain::Choice(&[2048.0, 2054.0]),
    OCTET, OCTET, OCTET, OCTET, OCTET, OCTET,
    OCTET, OCTET, OCTET, OCTET, OCTET, OCTET,
    Domain::Choice(&[20.0, 24.0, 28.0, 32.0, 40.0, 60.0]),
    OCTET,
    Domain::Real { lo: 20.0, hi: 1500.0 },
    Domain::Int { lo: 1, hi: 255 },
    Domain::Choice(&[1.0, 6.0, 17.0]),
    OCTET, OCTET, OCTET, OCTET,
    OCTET, OCTET, OCTET, OCTET,
    PORT, PORT, PORT, PORT,
    Domain::Real { lo: 0.0, hi: 1480.0 },
    Domain::Int { lo: 0, hi: 18 },
    Domain::Int { lo: 0, hi: 15 },
    Domain::Real { lo: 0.0, hi: 300.0 },
    Domain::Real { lo: 0.0, hi: 86400.0 },
    Domain::Flag, Domain::Flag, Domain::Flag, Domain::Flag,
    Domain::Flag, Domain::Flag, Domain::Flag, Domain::Flag,
];

/// One stationary stretch of the stream.
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeSpec {
    /// Planted concept over the 43 standardized columns.
    pub true_weights: Vec<f64>,
    /// Probability of flipping each label, in `[0, 0.5)`.
    pub noise_rate: f64,
    /// Length in windows.
    pub duration: usize,
}

impl RegimeSpec {
    pub fn new(true_weights: Vec<f64>, noise_rate: f64, duration: usize) -> Result<Self> {
        let r = RegimeSpec { true_weights, noise_rate, duration };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if self.true_weights.len() != FEATURE_COUNT {
            return Err(Error::DimensionMismatch { expected: FEATURE_COUNT, got: self.true_weights.len() });
        }
        if self.true_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("planted weights"));
        }
        if self.true_weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidArgument("at least one planted weight must be nonzero".into()));
        }
        if !(0.0..0.5).contains(&self.noise_rate) {
            return Err(Error::InvalidArgument(format!("noise rate {} outside [0, 0.5)", self.noise_rate)));
        }
        if self.duration == 0 {
            return Err(Error::InvalidArgument("regime duration must be >= 1 window".into()));
        }
        Ok(())
    }

    /// Same regime with the concept negated.
    pub fn negated(&self) -> Self {
        RegimeSpec { true_weights: self.true_weights.iter().map(|w| -w).collect(), ..self.clone() }
    }

    /// Noise-free label of a raw record.
    pub fn concept(&self, features: &[f64]) -> Label {
        let score: f64 = self
            .true_weights
            .iter()
            .zip(features)
            .zip(DOMAINS.iter())
            .map(|((w, &x), dom)| w * dom.standardize(x))
            .sum();
        if score < 0.0 {
            Label::Attack
        } else {
            Label::Normal
        }
    }
}

/// Regimes in stream order.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSchedule {
    regimes: Vec<RegimeSpec>,
}

impl DriftSchedule {
    pub fn new(regimes: Vec<RegimeSpec>) -> Result<Self> {
        if regimes.is_empty() {
            return Err(Error::InvalidArgument("drift schedule needs at least one regime".into()));
        }
        regimes.iter().try_for_each(RegimeSpec::validate)?;
        Ok(DriftSchedule { regimes })
    }

    pub fn regimes(&self) -> &[RegimeSpec] {
        &self.regimes
    }

    pub fn total_windows(&self) -> usize {
        self.regimes.iter().map(|r| r.duration).sum()
    }

    /// First window index of each regime.
    pub fn boundaries(&self) -> Vec<usize> {
        self.regimes
            .iter()
            .scan(0, |acc, r| {
                let start = *acc;
                *acc += r.duration;
                Some(start)
            })
            .collect()
    }
}

/// Draws `count` distinct planted columns with weights of magnitude in
/// `[1, 2)` and random sign; all other weights are zero.
pub fn planted_weights<R: Rng + ?Sized>(count: usize, rng: &mut R) -> (Vec<f64>, Vec<usize>) {
    let mut idx = sample(rng, FEATURE_COUNT, count.min(FEATURE_COUNT)).into_vec();
    idx.sort_unstable();
    let mut w = vec![0.0; FEATURE_COUNT];
    for &i in &idx {
        let mag = rng.gen_range(1.0..2.0);
        w[i] = if rng.gen_bool(0.5) { mag } else { -mag };
    }
    (w, idx)
}

/// Lazily generated stream of `schedule.total_windows() * window_size` records.
#[derive(Clone, Debug)]
pub struct SyntheticStream {
    schedule: DriftSchedule,
    window_size: usize,
    rng: ChaCha8Rng,
    regime: usize,
    left_in_regime: usize,
}

pub fn generate(schedule: DriftSchedule, window_size: usize, seed: u64) -> SyntheticStream {
    let left_in_regime = schedule.regimes[0].duration * window_size;
    SyntheticStream { schedule, window_size, rng: ChaCha8Rng::seed_from_u64(seed), regime: 0, left_in_regime }
}

impl Iterator for SyntheticStream {
    type Item = ExtractedRecord;

    fn next(&mut self) -> Option<ExtractedRecord> {
        while self.left_in_regime == 0 {
            self.regime += 1;
            let r = self.schedule.regimes.get(self.regime)?;
            self.left_in_regime = r.duration * self.window_size;
        }
        self.left_in_regime -= 1;
        let regime = &self.schedule.regimes[self.regime];
        let features: Vec<f64> = DOMAINS.iter().map(|d| d.sample(&mut self.rng)).collect();
        let mut label = regime.concept(&features);
        if regime.noise_rate > 0.0 && self.rng.gen_bool(regime.noise_rate) {
            label = if label.is_attack() { Label::Normal } else { Label::Attack };
        }
        Some(ExtractedRecord::new(features, Some(label)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(noise: f64, windows: usize, seed: u64) -> (RegimeSpec, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, idx) = planted_weights(5, &mut rng);
        (RegimeSpec::new(w, noise, windows).unwrap(), idx)
    }

    #[test]
    fn domains_standardize_to_unit_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in DOMAINS {
            for _ in 0..200 {
                let z = d.standardize(d.sample(&mut rng));
                assert!((-1.0..=1.0).contains(&z), "{d:?} -> {z}");
            }
        }
    }

    #[test]
    fn noiseless_regime_is_separable() {
        let (r, _) = single(0.0, 2, 3);
        let sched = DriftSchedule::new(vec![r.clone()]).unwrap();
        let recs: Vec<_> = generate(sched, 100, 7).collect();
        assert_eq!(recs.len(), 200);
        assert!(recs.iter().all(|x| x.label == Some(r.concept(&x.features))));
        let attacks = recs.iter().filter(|x| x.label == Some(Label::Attack)).count();
        assert!(attacks > 50 && attacks < 150, "{attacks}");
    }

    #[test]
    fn negated_regime_inverts_labels_at_boundary() {
        let (r, _) = single(0.0, 1, 4);
        let sched = DriftSchedule::new(vec![r.clone(), r.negated()]).unwrap();
        assert_eq!(sched.boundaries(), vec![0, 1]);
        let recs: Vec<_> = generate(sched, 50, 2).collect();
        for x in &recs[50..] {
            assert_eq!(x.label, Some(r.negated().concept(&x.features)));
            assert_ne!(x.label, Some(r.concept(&x.features)));
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let (r, _) = single(0.1, 3, 5);
        let s = DriftSchedule::new(vec![r]).unwrap();
        let a: Vec<_> = generate(s.clone(), 20, 11).collect();
        let b: Vec<_> = generate(s.clone(), 20, 11).collect();
        let c: Vec<_> = generate(s, 20, 12).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_rate_within_three_sigma() {
        let noise = 0.1;
        let (r, _) = single(noise, 20, 6);
        let sched = DriftSchedule::new(vec![r.clone()]).unwrap();
        let recs: Vec<_> = generate(sched, 1000, 8).collect();
        let n = recs.len() as f64;
        let flips = recs.iter().filter(|x| x.label != Some(r.concept(&x.features))).count() as f64;
        let sigma = (n * noise * (1.0 - noise)).sqrt();
        assert!((flips - n * noise).abs() <= 3.0 * sigma, "{flips} flips of {n}");
    }

    #[test]
    fn regime_validation() {
        assert!(RegimeSpec::new(vec![0.0; FEATURE_COUNT], 0.0, 1).is_err());
        assert!(RegimeSpec::new(vec![1.0; FEATURE_COUNT], 0.5, 1).is_err());
        assert!(RegimeSpec::new(vec![1.0; 3], 0.0, 1).is_err());
        assert!(RegimeSpec::new(vec![1.0; FEATURE_COUNT], 0.0, 0).is_err());
        assert!(DriftSchedule::new(vec![]).is_err());
    }

    #[test]
    fn planted_weights_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (w, idx) = planted_weights(5, &mut rng);
        assert_eq!(idx.len(), 5);
        assert_eq!(w.iter().filter(|&&v| v != 0.0).count(), 5);
        assert!(idx.iter().all(|&i| (1.0..2.0).contains(&w[i].abs())));
    }
}
