use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::ResonanceParams;
use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, Real};

/// Eigenvalues of the unperturbed Hamiltonian plus the search problem posed on
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig<T> {
    pub eigenvalues: Vec<T>,
    pub search_set: Vec<usize>,
    pub initial_index: usize,
    pub searched_index: usize,
}

impl<T: Real> SpectrumConfig<T> {
    pub fn new(
        eigenvalues: Vec<T>,
        search_set: impl IntoIterator<Item = usize>,
        initial_index: usize,
        searched_index: usize,
    ) -> Result<Self> {
        let mut search_set: Vec<usize> = search_set.into_iter().collect();
        search_set.sort_unstable();
        search_set.dedup();
        let spectrum = Self { eigenvalues, search_set, initial_index, searched_index };
        spectrum.validate()?;
        Ok(spectrum)
    }

    /// Equally spaced levels `e_n = n` for `n = 0..=n_search`, starting in
    /// level 0 and searching `{1..=n_search}` for the middle level.
    pub fn linear(n_search: usize) -> Result<Self> {
        if n_search == 0 {
            return invalid("search set size must be at least 1");
        }
        let eigenvalues = (0..=n_search).map(|n| lit::<T>(n as f64)).collect();
        Self::new(eigenvalues, 1..=n_search, 0, (n_search / 2).max(1))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("malformed spectrum JSON: {e}")))?;
        Self::new(raw.eigenvalues, raw.search_set, raw.initial_index, raw.searched_index)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.eigenvalues.len();
        if let Some(bad) = self.eigenvalues.iter().find(|e| !e.is_finite()) {
            return invalid(format!("eigenvalue {bad} is not finite"));
        }
        if self.search_set.is_empty() {
            return invalid("search set is empty");
        }
        if let Some(&n) = self.search_set.iter().find(|&&n| n >= dim) {
            return invalid(format!("search index {n} out of range for {dim} eigenvalues"));
        }
        if self.initial_index >= dim {
            return invalid(format!("initial index {} out of range", self.initial_index));
        }
        if self.search_set.contains(&self.initial_index) {
            return invalid(format!("initial index {} belongs to the search set", self.initial_index));
        }
        if !self.search_set.contains(&self.searched_index) {
            return invalid(format!("searched index {} is not in the search set", self.searched_index));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn search_size(&self) -> usize {
        self.search_set.len()
    }

    /// Bohr frequency `w_nm = e_n - e_m`.
    pub fn bohr(&self, n: usize, m: usize) -> T {
        self.eigenvalues[n] - self.eigenvalues[m]
    }

    /// Smallest nonzero `|w_nm|` over all pairs, or `None` for a fully
    /// degenerate spectrum.
    pub fn min_gap(&self) -> Option<T> {
        let mut sorted = self.eigenvalues.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|g| *g > T::zero())
            .fold(None, |acc: Option<T>, g| Some(acc.map_or(g, |a| a.min(g))))
    }

    pub fn resonance_params(&self) -> Result<ResonanceParams<T>> {
        ResonanceParams::for_search_size(self.search_size())
    }
}

/// `V(t) = |p><j| e^{i w t} + |j><p| e^{-i w t}` with `|p>` the normalized
/// uniform superposition over the search set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPotential<T> {
    /// `|<n|V|j>|` for every `n` in the search set.
    pub amplitude: T,
    /// Frequency `w` on the `|p><j|` term.
    pub drive_frequency: T,
    pub search_set: Vec<usize>,
    pub initial_index: usize,
}

/// The resonant coupling for `spectrum`: amplitude `1/sqrt(N)` and drive
/// frequency `e_j - e_s`.
pub fn build_coupling<T: Real>(spectrum: &SpectrumConfig<T>) -> Result<CouplingPotential<T>> {
    spectrum.validate()?;
    let n = lit::<T>(spectrum.search_size() as f64);
    Ok(CouplingPotential {
        amplitude: T::one() / n.sqrt(),
        drive_frequency: spectrum.bohr(spectrum.initial_index, spectrum.searched_index),
        search_set: spectrum.search_set.clone(),
        initial_index: spectrum.initial_index,
    })
}

impl<T: Real> CouplingPotential<T> {
    pub fn with_amplitude(mut self, amplitude: T) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_drive_frequency(mut self, drive_frequency: T) -> Self {
        self.drive_frequency = drive_frequency;
        self
    }

    /// Schrödinger-picture matrix element `<n|V(t)|m>` in the eigenbasis.
    pub fn element(&self, n: usize, m: usize, t: T) -> Complex<T> {
        let j = self.initial_index;
        let in_set = |k: usize| self.search_set.binary_search(&k).is_ok();
        let phase = self.drive_frequency * t;
        if m == j && in_set(n) {
            Complex::from_polar(self.amplitude, phase)
        } else if n == j && in_set(m) {
            Complex::from_polar(self.amplitude, -phase)
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }

    /// Dense `dim x dim` matrix of [`Self::element`].
    pub fn matrix(&self, dim: usize, t: T) -> Vec<Vec<Complex<T>>> {
        (0..dim).map(|n| (0..dim).map(|m| self.element(n, m, t)).collect()).collect()
    }

    /// `W_nj = |<n|V(t)|j>|^2`.
    pub fn transition_probability(&self, n: usize, t: T) -> T {
        self.element(n, self.initial_index, t).norm_sqr()
    }
}
