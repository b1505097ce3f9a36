//! Resonant two-level search model.
//!
//! A drive at the Bohr frequency of the pair `(j, s)` couples the initial
//! eigenstate `|j>` to the uniform superposition of a search set. In the
//! resonant regime only `|j>` and `|s>` are appreciably populated and the
//! population oscillates as `cos^2(Omega t)` / `sin^2(Omega t)` with
//! `Omega = 1/sqrt(N)`. [`integrate`] solves the full N-level problem to check
//! how good that reduction is for a given spectrum.

mod integrate;
mod spectrum;

pub use integrate::{
    integrate_full, integrate_sampled, integrate_with, validate_two_level, validate_two_level_with, IntegratorOptions,
    Trajectory, ValidationReport, WaveState, DEFAULT_STRIDE,
};
pub use spectrum::{build_coupling, CouplingPotential, SpectrumConfig};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{cos_pi, half, lit, Real};

/// Rabi frequency of the reduced two-level system and its transfer time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceParams<T> {
    omega: T,
    tau: T,
}

impl<T: Real> ResonanceParams<T> {
    /// `Omega = 1/sqrt(N)` and `tau = pi / (2 Omega)` for a search set of size `n`.
    pub fn for_search_size(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("search set size must be at least 1");
        }
        let omega = T::one() / lit::<T>(n as f64).sqrt();
        Ok(Self { omega, tau: T::FRAC_PI_2() / omega })
    }

    /// Parameters whose transfer time is `tau`; `from_tau(1)` is the unit used
    /// for game strategies.
    pub fn from_tau(tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return invalid(format!("tau must be positive and finite, got {tau}"));
        }
        Ok(Self { omega: T::FRAC_PI_2() / tau, tau })
    }

    pub fn unit() -> Self {
        Self { omega: T::FRAC_PI_2(), tau: T::one() }
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// Time measured in units of `tau`.
    #[inline]
    pub fn in_tau_units(&self, t: T) -> T {
        t / self.tau
    }
}

/// Occupation probabilities of the searched and initial states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityPair<T> {
    pub p_s: T,
    pub p_j: T,
}

/// `(a_j, a_s) = (cos Omega t, sin Omega t)`.
pub fn two_level_amplitudes<T: Real>(t: T, params: &ResonanceParams<T>) -> (T, T) {
    debug_assert!(t >= T::zero());
    // Omega t = (pi/2) (t / tau)
    let x = params.in_tau_units(t) * half::<T>();
    (cos_pi(x), cos_pi(half::<T>() - x))
}

/// `P_j = cos^2(Omega t)`, `P_s = sin^2(Omega t)`.
pub fn two_level_probabilities<T: Real>(t: T, params: &ResonanceParams<T>) -> ProbabilityPair<T> {
    let (a_j, a_s) = two_level_amplitudes(t, params);
    ProbabilityPair { p_s: a_s * a_s, p_j: a_j * a_j }
}
