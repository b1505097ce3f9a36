//! Interactive rounds between a human and a machine opponent.
//!
//! Juan measures first. His collapse outcome is sampled when he commits `T1`
//! and kept in the pending round; nothing outside this module can read it
//! until Silvia's measurement resolves the round.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use zenoflip_core::collapse::{sample_outcomes, CollapseOutcome};
use zenoflip_core::game::{settle_round, GameVariant, RoundLog};
use zenoflip_core::rng::{self, SimRng};
use zenoflip_core::strategy::{best_response, juan_best_response};
use zenoflip_core::{Game, Params, Round, Strategy};

use crate::error::PlayError;

/// Grid resolution used by the machine's best-response searches.
const AI_RESOLUTION: usize = 501;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Juan,
    Silvia,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Juan => "juan",
            Role::Silvia => "silvia",
        })
    }
}

/// How the machine picks its measurement time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AiStrategy {
    /// Uniform over the legal interval.
    Uniform,
    /// Juan: `T1 = tau/2`. Silvia: best response to the announced `T1`.
    Nash,
    /// Juan: counter Silvia's previous `T2`. Silvia: best response to `T1`.
    BestResponse,
    /// Constant time (units of tau), clamped into the legal interval.
    Fixed(f64),
}

impl FromStr for AiStrategy {
    type Err = PlayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "uniform" => Ok(Self::Uniform),
            "nash" => Ok(Self::Nash),
            "best_response" => Ok(Self::BestResponse),
            other => {
                let inner = other
                    .strip_prefix("fixed(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| PlayError::BadRequest(format!("unknown ai strategy {other:?}")))?;
                let t: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| PlayError::BadRequest(format!("fixed time {inner:?} is not a number")))?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(PlayError::BadRequest(format!("fixed time {t} outside [0, 1]")));
                }
                Ok(Self::Fixed(t))
            }
        }
    }
}

impl fmt::Display for AiStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform => f.write_str("uniform"),
            Self::Nash => f.write_str("nash"),
            Self::BestResponse => f.write_str("best_response"),
            Self::Fixed(t) => write!(f, "fixed({t})"),
        }
    }
}

impl Serialize for AiStrategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AiStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_role() -> Role {
    Role::Silvia
}

fn default_ai() -> AiStrategy {
    AiStrategy::Nash
}

fn default_stake() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    /// 1: measurements at T1, T2. 2: an extra measurement at tau.
    pub game: u8,
    #[serde(default = "default_role")]
    pub human_role: Role,
    #[serde(default = "default_ai")]
    pub ai: AiStrategy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stake")]
    pub stake: f64,
}

impl SessionConfig {
    pub fn game_spec(&self) -> Result<Game, PlayError> {
        let variant = match self.game {
            1 => GameVariant::TwoMeasure,
            2 => GameVariant::ThreeMeasure,
            g => return Err(PlayError::BadRequest(format!("unknown game {g}; expected 1 or 2"))),
        };
        Game::new(variant, self.stake).map_err(|e| PlayError::BadRequest(e.to_string()))
    }
}

struct PendingRound {
    t1: f64,
    hidden: CollapseOutcome,
    rng: SimRng,
}

pub struct Session {
    id: String,
    config: SessionConfig,
    game: Game,
    pending: Option<PendingRound>,
    history: Vec<Round>,
    bankroll_silvia: f64,
}

/// Client-visible round in progress: Juan's time only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingView {
    pub t1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub game: u8,
    pub human_role: Role,
    pub ai: AiStrategy,
    pub seed: u64,
    pub stake: f64,
    pub rounds_played: usize,
    pub bankroll_silvia: f64,
    pub bankroll_juan: f64,
    pub round_in_progress: Option<PendingView>,
    pub history: Vec<RoundLog<f64>>,
    pub heatmap: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingSilvia,
    Resolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundUpdate {
    pub t1: f64,
    pub phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<RoundLog<f64>>,
    pub bankroll_silvia: f64,
    /// Juan's time for the next round when the machine plays Juan.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next_t1: Option<f64>,
}

fn check_time(label: &str, t: f64, lo: f64) -> Result<(), PlayError> {
    if !t.is_finite() {
        return Err(PlayError::Validation(format!("{label} must be a finite number")));
    }
    if t < lo {
        let constraint = if label == "T2" { "T1 <= T2" } else { "0 <= T1" };
        return Err(PlayError::Validation(format!("constraint {constraint} violated: {label} = {t}, lower bound {lo}")));
    }
    if t > 1.0 {
        return Err(PlayError::Validation(format!("constraint {label} <= tau violated: {label} = {t} (units of tau)")));
    }
    Ok(())
}

impl Session {
    pub fn new(id: String, config: SessionConfig) -> Result<Self, PlayError> {
        let game = config.game_spec()?;
        let mut session = Self { id, config, game, pending: None, history: Vec::new(), bankroll_silvia: 0.0 };
        if session.config.human_role == Role::Silvia {
            session.machine_commits_t1();
        }
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn history(&self) -> &[Round] {
        &self.history
    }

    pub fn bankroll_silvia(&self) -> f64 {
        self.bankroll_silvia
    }

    fn round_rng(&self) -> SimRng {
        rng::stream(self.config.seed, self.history.len() as u64)
    }

    fn commit_t1(&mut self, t1: f64, mut rng: SimRng) {
        let hidden = sample_outcomes(CollapseOutcome::Initial, [t1], &Params::unit(), &mut rng)[0];
        self.pending = Some(PendingRound { t1, hidden, rng });
    }

    fn machine_commits_t1(&mut self) {
        let mut rng = self.round_rng();
        let t1 = match self.config.ai {
            AiStrategy::Uniform => rng.random::<f64>(),
            AiStrategy::Nash => 0.5,
            AiStrategy::Fixed(t) => t,
            AiStrategy::BestResponse => match self.history.last() {
                Some(prev) => juan_best_response(&self.game, prev.t2, AI_RESOLUTION).expect("recorded T2 in range"),
                None => 0.5,
            },
        };
        self.commit_t1(t1, rng);
    }

    fn machine_t2(&self, t1: f64, rng: &mut SimRng) -> f64 {
        match self.config.ai {
            AiStrategy::Uniform => t1 + (1.0 - t1) * rng.random::<f64>(),
            AiStrategy::Fixed(t) => t.clamp(t1, 1.0),
            AiStrategy::Nash | AiStrategy::BestResponse => {
                best_response(&self.game, t1, AI_RESOLUTION).expect("T1 in range").t2_star
            }
        }
    }

    fn resolve(&mut self, t2: f64) -> Result<RoundLog<f64>, PlayError> {
        let PendingRound { t1, hidden, mut rng } = self.pending.take().expect("resolve needs a pending round");
        let strategy = Strategy::new(t1, t2).map_err(|e| PlayError::Validation(e.to_string()))?;
        let mut intervals = vec![t2 - t1];
        if self.game.variant == GameVariant::ThreeMeasure {
            intervals.push(1.0 - t2);
        }
        let mut history = vec![hidden];
        history.extend(sample_outcomes(hidden, intervals, &Params::unit(), &mut rng));
        let round = settle_round(&self.game, &strategy, history).map_err(|e| PlayError::Validation(e.to_string()))?;
        self.bankroll_silvia += round.payoff_silvia;
        let log = round.log_record();
        self.history.push(round);
        Ok(log)
    }

    /// A measurement by `role` at `time` (units of tau).
    pub fn submit(&mut self, role: Role, time: f64) -> Result<RoundUpdate, PlayError> {
        if role != self.config.human_role {
            return Err(PlayError::Conflict(format!("{role} is played by the machine in this session")));
        }
        match role {
            Role::Juan => {
                if self.pending.is_some() {
                    return Err(PlayError::Conflict("a round is already in progress".into()));
                }
                check_time("T1", time, 0.0)?;
                self.commit_t1(time, self.round_rng());
                let mut rng = self.pending.as_ref().expect("just committed").rng.clone();
                let t2 = self.machine_t2(time, &mut rng);
                self.pending.as_mut().expect("just committed").rng = rng;
                let log = self.resolve(t2)?;
                Ok(RoundUpdate {
                    t1: time,
                    phase: Phase::Resolved,
                    result: Some(log),
                    bankroll_silvia: self.bankroll_silvia,
                    next_t1: None,
                })
            }
            Role::Silvia => {
                let t1 = match &self.pending {
                    Some(p) => p.t1,
                    None => return Err(PlayError::Conflict("Juan has not measured yet".into())),
                };
                check_time("T2", time, t1)?;
                let log = self.resolve(time)?;
                self.machine_commits_t1();
                Ok(RoundUpdate {
                    t1,
                    phase: Phase::Resolved,
                    result: Some(log),
                    bankroll_silvia: self.bankroll_silvia,
                    next_t1: self.pending.as_ref().map(|p| p.t1),
                })
            }
        }
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            game: self.config.game,
            human_role: self.config.human_role,
            ai: self.config.ai,
            seed: self.config.seed,
            stake: self.config.stake,
            rounds_played: self.history.len(),
            bankroll_silvia: self.bankroll_silvia,
            bankroll_juan: -self.bankroll_silvia,
            round_in_progress: self.pending.as_ref().map(|p| PendingView { t1: p.t1 }),
            history: self.history.iter().map(Round::log_record).collect(),
            heatmap: format!("/api/v1/games/{}/heatmap", self.config.game),
        }
    }

    /// Rebuilds a session from its config and journal, replaying the human's
    /// times; fails if any round comes out differently.
    pub fn replay(id: String, config: SessionConfig, journal: &[RoundLog<f64>]) -> Result<Self, PlayError> {
        let mut session = Self::new(id, config)?;
        for (k, expected) in journal.iter().enumerate() {
            let time = match session.config.human_role {
                Role::Juan => expected.t1,
                Role::Silvia => expected.t2,
            };
            let update = session.submit(session.config.human_role, time)?;
            if update.result.as_ref() != Some(expected) {
                return Err(PlayError::Conflict(format!("journal diverges at round {k}")));
            }
        }
        Ok(session)
    }
}
