//! The Silvia/Juan state flip games.
//!
//! Juan measures at `T1`, Silvia at `T2 >= T1`; in the three-measurement game a
//! final measurement happens at `tau`. Silvia wins the stake when the last
//! measurement finds `|s>`, Juan wins it otherwise. Strategy times are
//! expressed in units of `tau`, so the engine does not depend on `N`.

use serde::{Deserialize, Serialize};

use crate::collapse::{self, CollapseOutcome, MeasurementSchedule};
use crate::error::{invalid, Result};
use crate::resonance::ResonanceParams;
use crate::rng::{self, SimRng};
use crate::scalar::{cos_pi, half, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameVariant {
    /// Measurements at `T1` and `T2`.
    TwoMeasure,
    /// Measurements at `T1`, `T2` and `tau`.
    ThreeMeasure,
    /// `m` equally spaced measurements over `[0, tau]`; no strategic choice.
    RegularZeno(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameSpec<T> {
    pub variant: GameVariant,
    pub stake: T,
}

impl<T: Real> GameSpec<T> {
    pub fn new(variant: GameVariant, stake: T) -> Result<Self> {
        if !(stake >= T::zero()) || !stake.is_finite() {
            return invalid(format!("stake must be non-negative and finite, got {stake}"));
        }
        if variant == GameVariant::RegularZeno(0) {
            return invalid("regular game needs at least one measurement");
        }
        Ok(Self { variant, stake })
    }

    pub fn two_measure() -> Self {
        Self { variant: GameVariant::TwoMeasure, stake: T::one() }
    }

    pub fn three_measure() -> Self {
        Self { variant: GameVariant::ThreeMeasure, stake: T::one() }
    }

    pub fn regular(m: u32) -> Result<Self> {
        Self::new(GameVariant::RegularZeno(m), T::one())
    }

    pub fn is_strategic(&self) -> bool {
        !matches!(self.variant, GameVariant::RegularZeno(_))
    }

    /// Measurement times (units of `tau`) played under `strategy`.
    pub fn schedule(&self, strategy: &StrategyProfile<T>) -> MeasurementSchedule<T> {
        let times = match self.variant {
            GameVariant::TwoMeasure => vec![strategy.t1, strategy.t2],
            GameVariant::ThreeMeasure => vec![strategy.t1, strategy.t2, T::one()],
            GameVariant::RegularZeno(m) => {
                return MeasurementSchedule::uniform(m, T::one()).expect("uniform schedule on [0, 1]")
            }
        };
        MeasurementSchedule::new(times).expect("validated strategy is ordered")
    }
}

/// Measurement times `0 <= t1 <= t2 <= 1` in units of `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile<T> {
    pub t1: T,
    pub t2: T,
}

impl<T: Real> StrategyProfile<T> {
    pub fn new(t1: T, t2: T) -> Result<Self> {
        if !t1.is_finite() || !t2.is_finite() {
            return invalid(format!("strategy times must be finite (T1 = {t1}, T2 = {t2})"));
        }
        if t1 < T::zero() {
            return invalid(format!("constraint 0 <= T1 violated: T1 = {t1}"));
        }
        if t1 > t2 {
            return invalid(format!("constraint T1 <= T2 violated: T1 = {t1}, T2 = {t2}"));
        }
        if t2 > T::one() {
            return invalid(format!("constraint T2 <= tau violated: T2 = {t2} (units of tau)"));
        }
        Ok(Self { t1, t2 })
    }
}

/// `beta` of the closed-form product for the given variant, without checking
/// the ordering constraint.
pub(crate) fn searched_probability<T: Real>(variant: GameVariant, t1: T, t2: T) -> T {
    // each factor 2cos^2(Omega dt) - 1 = cos(pi dt) with dt in units of tau
    let product = match variant {
        GameVariant::TwoMeasure => cos_pi(t2 - t1) * cos_pi(t1),
        GameVariant::ThreeMeasure => cos_pi(T::one() - t2) * cos_pi(t2 - t1) * cos_pi(t1),
        GameVariant::RegularZeno(m) => {
            return collapse::zeno_coefficients(m).expect("m validated by GameSpec").beta
        }
    };
    half::<T>() * (T::one() - product)
}

/// Probability that the final measurement finds `|s>`, i.e. that Silvia wins.
pub fn win_probability<T: Real>(game: &GameSpec<T>, strategy: &StrategyProfile<T>) -> T {
    searched_probability(game.variant, strategy.t1, strategy.t2)
}

/// Checked form of [`win_probability`] taking raw times.
pub fn win_probability_at<T: Real>(game: &GameSpec<T>, t1: T, t2: T) -> Result<T> {
    Ok(win_probability(game, &StrategyProfile::new(t1, t2)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// Win probabilities and expected payoffs for both players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffReport<T> {
    pub pi_s: T,
    pub pi_j: T,
    pub payoff_s: T,
    pub payoff_j: T,
    pub method: PayoffMethod,
    pub error_estimate: T,
}

impl<T: Real> PayoffReport<T> {
    pub fn from_win_probability(pi_s: T, stake: T, method: PayoffMethod, error_estimate: T) -> Self {
        let pi_j = T::one() - pi_s;
        let payoff_s = stake * (pi_s - pi_j);
        Self { pi_s, pi_j, payoff_s, payoff_j: -payoff_s, method, error_estimate }
    }
}

/// Pointwise expected payoffs of a pure strategy pair.
pub fn expected_payoffs<T: Real>(game: &GameSpec<T>, strategy: &StrategyProfile<T>) -> PayoffReport<T> {
    PayoffReport::from_win_probability(win_probability(game, strategy), game.stake, PayoffMethod::ClosedForm, T::zero())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult<T> {
    pub t1: T,
    pub t2: T,
    pub collapse_history: Vec<CollapseOutcome>,
    pub final_outcome: CollapseOutcome,
    pub payoff_silvia: T,
    pub payoff_juan: T,
}

impl<T: Real> RoundResult<T> {
    fn settle(game: &GameSpec<T>, strategy: &StrategyProfile<T>, history: Vec<CollapseOutcome>) -> Self {
        let final_outcome = *history.last().expect("every game measures at least once");
        let payoff_silvia = match final_outcome {
            CollapseOutcome::Searched => game.stake,
            CollapseOutcome::Initial => -game.stake,
        };
        Self {
            t1: strategy.t1,
            t2: strategy.t2,
            collapse_history: history,
            final_outcome,
            payoff_silvia,
            payoff_juan: -payoff_silvia,
        }
    }

    pub fn log_record(&self) -> RoundLog<T> {
        RoundLog {
            t1: self.t1,
            t2: self.t2,
            history: self.collapse_history.clone(),
            final_outcome: self.final_outcome,
            payoff_s: self.payoff_silvia,
        }
    }
}

/// One line of a round log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog<T> {
    pub t1: T,
    pub t2: T,
    pub history: Vec<CollapseOutcome>,
    #[serde(rename = "final")]
    pub final_outcome: CollapseOutcome,
    pub payoff_s: T,
}

/// Plays one round drawing from `rng`.
pub fn play_round_with<T: Real>(game: &GameSpec<T>, strategy: &StrategyProfile<T>, rng: &mut SimRng) -> RoundResult<T> {
    let schedule = game.schedule(strategy);
    let history = collapse::sample_outcomes(CollapseOutcome::Initial, schedule.intervals(), &ResonanceParams::unit(), rng);
    RoundResult::settle(game, strategy, history)
}

/// Plays one round with a fresh generator seeded by `seed`.
pub fn play_round<T: Real>(game: &GameSpec<T>, strategy: &StrategyProfile<T>, seed: u64) -> RoundResult<T> {
    play_round_with(game, strategy, &mut rng::seeded(seed))
}

/// Settles a round whose collapse history was sampled elsewhere (interactive
/// play samples Juan's collapse before Silvia has chosen her time).
pub fn settle_round<T: Real>(
    game: &GameSpec<T>,
    strategy: &StrategyProfile<T>,
    history: Vec<CollapseOutcome>,
) -> Result<RoundResult<T>> {
    if history.len() != game.schedule(strategy).len() {
        return invalid("collapse history does not match the measurement schedule");
    }
    Ok(RoundResult::settle(game, strategy, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collapse::propagate_schedule;
    use proptest::prelude::*;

    fn s(t1: f64, t2: f64) -> StrategyProfile<f64> {
        StrategyProfile::new(t1, t2).unwrap()
    }

    #[test]
    fn two_measure_values() {
        let g = GameSpec::<f64>::two_measure();
        for t2 in [0.5, 0.6, 0.77, 1.0] {
            assert_eq!(win_probability(&g, &s(0.5, t2)), 0.5);
        }
        assert_eq!(win_probability(&g, &s(1.0, 1.0)), 1.0);
        let diag = win_probability(&g, &s(0.25, 0.25));
        assert!((diag - 0.5 * (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-15);
        assert!((diag - 0.146_446_609_406_726_24).abs() < 1e-15);
    }

    #[test]
    fn three_measure_values() {
        let g = GameSpec::<f64>::three_measure();
        assert_eq!(win_probability(&g, &s(0.0, 0.0)), 1.0);
        for t2 in [0.5, 0.8, 1.0] {
            assert_eq!(win_probability(&g, &s(0.5, t2)), 0.5);
        }
    }

    #[test]
    fn regular_ignores_strategy() {
        let g = GameSpec::<f64>::regular(4).unwrap();
        assert_eq!(win_probability(&g, &s(0.1, 0.9)), 0.375);
        assert_eq!(win_probability(&g, &s(0.0, 0.0)), 0.375);
        assert!(GameSpec::<f64>::regular(0).is_err());
    }

    #[test]
    fn strategy_constraints_are_named() {
        let err = StrategyProfile::new(0.5, 0.4).unwrap_err().to_string();
        assert!(err.contains("T1 <= T2"), "{err}");
        assert!(StrategyProfile::new(-0.1, 0.4).unwrap_err().to_string().contains("0 <= T1"));
        assert!(StrategyProfile::new(0.1, 1.1).unwrap_err().to_string().contains("T2 <= tau"));
        assert!(win_probability_at(&GameSpec::two_measure(), 0.9, 0.2).is_err());
    }

    #[test]
    fn payoffs() {
        let g = GameSpec::<f64>::two_measure();
        let r = expected_payoffs(&g, &s(0.5, 0.8));
        assert_eq!((r.payoff_s, r.payoff_j), (0.0, 0.0));
        let r = expected_payoffs(&g, &s(1.0, 1.0));
        assert_eq!(r.payoff_s, 1.0);
        assert_eq!(r.payoff_j, -1.0);
        let g2 = GameSpec::new(GameVariant::TwoMeasure, 2.0).unwrap();
        assert_eq!(expected_payoffs(&g2, &s(1.0, 1.0)).payoff_s, 2.0);
        assert!(GameSpec::new(GameVariant::TwoMeasure, -1.0).is_err());
    }

    #[test]
    fn certain_rounds() {
        let g = GameSpec::<f64>::two_measure();
        for seed in 0..200 {
            let r = play_round(&g, &s(0.0, 1.0), seed);
            assert_eq!(r.final_outcome, CollapseOutcome::Searched);
            assert_eq!(r.payoff_silvia, 1.0);
        }
        let g3 = GameSpec::<f64>::three_measure();
        for seed in 0..10_000 {
            assert_eq!(play_round(&g3, &s(0.0, 0.0), seed).final_outcome, CollapseOutcome::Searched);
        }
    }

    #[test]
    fn log_record_shape() {
        let r = play_round(&GameSpec::<f64>::two_measure(), &s(0.0, 1.0), 3);
        let line = serde_json::to_string(&r.log_record()).unwrap();
        assert_eq!(line, r#"{"t1":0.0,"t2":1.0,"history":["j","s"],"final":"s","payoff_s":1.0}"#);
    }

    fn arb_strategy() -> impl Strategy<Value = StrategyProfile<f64>> {
        (0.0_f64..=1.0, 0.0_f64..=1.0).prop_map(|(a, b)| s(a.min(b), a.max(b)))
    }

    proptest! {
        #[test]
        fn consistent_with_schedule_propagation(st in arb_strategy()) {
            let unit = ResonanceParams::unit();
            for game in [GameSpec::<f64>::two_measure(), GameSpec::three_measure()] {
                let closed = win_probability(&game, &st);
                let via = propagate_schedule(&game.schedule(&st), &unit).beta;
                prop_assert!((closed - via).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&closed));
            }
        }

        #[test]
        fn diagonal_is_single_measurement(t in 0.0_f64..=1.0) {
            let p = win_probability(&GameSpec::two_measure(), &s(t, t));
            let sin = (std::f64::consts::FRAC_PI_2 * t).sin();
            prop_assert!((p - sin * sin).abs() < 1e-14);
        }

        #[test]
        fn rounds_are_zero_sum(st in arb_strategy(), seed in any::<u64>()) {
            for game in [GameSpec::<f64>::two_measure(), GameSpec::three_measure(), GameSpec::regular(5).unwrap()] {
                let r = play_round(&game, &st, seed);
                prop_assert_eq!(r.payoff_silvia + r.payoff_juan, 0.0);
                prop_assert_eq!(r.final_outcome == CollapseOutcome::Searched, r.payoff_silvia == game.stake);
            }
        }
    }
}
