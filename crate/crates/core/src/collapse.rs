//! Projective measurements on the two-level system.
//!
//! Each measurement collapses the state to `|s>` or `|j>`; between
//! measurements the resonance rotates it again. Over an interval `dt` the
//! occupation probabilities mix through the symmetric doubly stochastic matrix
//! `[[p, q], [q, p]]` with `p = cos^2(Omega dt)`, and composing the steps gives
//! the product form `alpha, beta = (1 ± prod(2 p_i - 1)) / 2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::resonance::{ProbabilityPair, ResonanceParams};
use crate::rng::{self, SimRng};
use crate::scalar::{cos_pi, cos_pi_pow, half, lit, Real};

/// Measurement times `t_1 <= ... <= t_m`, measured from `t_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementSchedule<T> {
    times: Vec<T>,
}

impl<T: Real> MeasurementSchedule<T> {
    pub fn new(times: Vec<T>) -> Result<Self> {
        if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < T::zero()) {
            return invalid(format!("measurement time {t} must be finite and non-negative"));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] < w[0]) {
            return invalid(format!("measurement times must be nondecreasing ({} after {})", w[1], w[0]));
        }
        Ok(Self { times })
    }

    pub fn empty() -> Self {
        Self { times: Vec::new() }
    }

    /// `m` equally spaced measurements ending at `total`: `t_k = k total / m`.
    pub fn uniform(m: u32, total: T) -> Result<Self> {
        let m_t = lit::<T>(f64::from(m));
        Self::new((1..=m).map(|k| lit::<T>(f64::from(k)) * total / m_t).collect())
    }

    /// Parses comma-separated times, e.g. `"0.25,0.5,1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::empty());
        }
        let times = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map(lit::<T>)
                    .map_err(|_| crate::Error::InvalidArgument(format!("not a number: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(times)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_1 - 0, t_2 - t_1, ...`
    pub fn intervals(&self) -> impl Iterator<Item = T> + '_ {
        std::iter::once(T::zero())
            .chain(self.times.iter().copied())
            .zip(self.times.iter().copied())
            .map(|(a, b)| b - a)
    }
}

/// Mixing matrix `[[p, q], [q, p]]` for one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionStep<T> {
    pub p: T,
    pub q: T,
}

impl<T: Real> TransitionStep<T> {
    /// `(P_s, P_j)` after one more interval.
    pub fn apply(&self, pair: ProbabilityPair<T>) -> ProbabilityPair<T> {
        ProbabilityPair {
            p_s: self.p * pair.p_s + self.q * pair.p_j,
            p_j: self.q * pair.p_s + self.p * pair.p_j,
        }
    }
}

/// `alpha`: probability of `|j>` after the last measurement; `beta`: of `|s>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingCoefficients<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> MixingCoefficients<T> {
    fn from_product(product: T) -> Self {
        let h = half::<T>();
        Self { alpha: h * (T::one() + product), beta: h * (T::one() - product) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollapseOutcome {
    #[serde(rename = "s")]
    Searched,
    #[serde(rename = "j")]
    Initial,
}

impl CollapseOutcome {
    pub fn flipped(self) -> Self {
        match self {
            Self::Searched => Self::Initial,
            Self::Initial => Self::Searched,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Searched => "s",
            Self::Initial => "j",
        }
    }
}

/// `p = cos^2(Omega dt)`, `q = 1 - p`.
pub fn step_matrix<T: Real>(delta_t: T, params: &ResonanceParams<T>) -> Result<TransitionStep<T>> {
    if !(delta_t >= T::zero()) {
        return invalid(format!("interval {delta_t} must be non-negative"));
    }
    let c = cos_pi(params.in_tau_units(delta_t) * half::<T>());
    let p = c * c;
    Ok(TransitionStep { p, q: T::one() - p })
}

/// Closed-form product solution, starting from `|j>`.
pub fn propagate_schedule<T: Real>(
    schedule: &MeasurementSchedule<T>,
    params: &ResonanceParams<T>,
) -> MixingCoefficients<T> {
    // 2 cos^2(Omega dt) - 1 = cos(2 Omega dt) = cos(pi dt / tau)
    let product = schedule
        .intervals()
        .map(|dt| cos_pi(params.in_tau_units(dt)))
        .fold(T::one(), |acc, f| acc * f);
    MixingCoefficients::from_product(product)
}

/// Step-by-step matrix propagation of `(P_s, P_j) = (0, 1)`.
pub fn iterate_matrices<T: Real>(
    schedule: &MeasurementSchedule<T>,
    params: &ResonanceParams<T>,
) -> ProbabilityPair<T> {
    schedule.intervals().fold(ProbabilityPair { p_s: T::zero(), p_j: T::one() }, |pair, dt| {
        step_matrix(dt, params).expect("schedule intervals are non-negative").apply(pair)
    })
}

/// `m` measurements spaced `delta_t` apart: `(1 ± cos^m(2 Omega dt)) / 2`.
pub fn regular_coefficients<T: Real>(
    m: u32,
    delta_t: T,
    params: &ResonanceParams<T>,
) -> Result<MixingCoefficients<T>> {
    if m == 0 {
        return invalid("number of measurements must be at least 1");
    }
    if !(delta_t >= T::zero()) {
        return invalid(format!("interval {delta_t} must be non-negative"));
    }
    Ok(MixingCoefficients::from_product(cos_pi_pow(params.in_tau_units(delta_t), m)))
}

/// `m` equally spaced measurements filling exactly one transfer time:
/// `(1 ± cos^m(pi/m)) / 2`.
pub fn zeno_coefficients<T: Real>(m: u32) -> Result<MixingCoefficients<T>> {
    if m == 0 {
        return invalid("number of measurements must be at least 1");
    }
    Ok(MixingCoefficients::from_product(cos_pi_pow(T::one() / lit::<T>(f64::from(m)), m)))
}

/// Collapses from `start` through every interval of `schedule`, drawing from
/// `rng`. Each outcome flips the previous one with probability
/// `sin^2(Omega dt)`.
pub fn sample_outcomes<T: Real>(
    start: CollapseOutcome,
    intervals: impl IntoIterator<Item = T>,
    params: &ResonanceParams<T>,
    rng: &mut SimRng,
) -> Vec<CollapseOutcome> {
    let mut current = start;
    intervals
        .into_iter()
        .map(|dt| {
            let flip = step_matrix(dt, params).expect("non-negative interval").q;
            if rng.random::<f64>() < flip.to_f64().unwrap_or(0.0) {
                current = current.flipped();
            }
            current
        })
        .collect()
}

/// One sampled measurement record for `schedule`, starting from `|j>`.
pub fn sample_trajectory<T: Real>(
    schedule: &MeasurementSchedule<T>,
    params: &ResonanceParams<T>,
    seed: u64,
) -> Vec<CollapseOutcome> {
    sample_outcomes(CollapseOutcome::Initial, schedule.intervals(), params, &mut rng::seeded(seed))
}
