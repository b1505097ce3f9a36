//! Fixed-step RK4 on the interaction-picture coefficients
//! `i da_n/dt = sum_m <n|V(t)|m> e^{i w_nm t} a_m`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{two_level_probabilities, CouplingPotential, SpectrumConfig};
use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, Real};

pub const DEFAULT_STRIDE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveState<T> {
    pub amplitudes: Vec<Complex<T>>,
    pub time: T,
}

impl<T: Real> WaveState<T> {
    /// All weight on `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Self { amplitudes, time: T::zero() }
    }

    pub fn probability(&self, n: usize) -> T {
        self.amplitudes[n].norm_sqr()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions<T> {
    pub t_end: T,
    /// Requested step; the actual step is shrunk so that a whole number of
    /// steps lands exactly on `t_end`.
    pub dt: T,
    pub stride: usize,
    /// Abort once `|norm - 1|` exceeds this.
    pub drift_limit: T,
}

impl<T: Real> IntegratorOptions<T> {
    pub fn new(t_end: T, dt: T) -> Self {
        let drift_limit = lit::<T>(1e-6).max(T::epsilon().sqrt());
        Self { t_end, dt, stride: DEFAULT_STRIDE, drift_limit }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    fn validate(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !(self.t_end > T::zero()) {
            return invalid(format!("dt ({}) and t_end ({}) must be positive", self.dt, self.t_end));
        }
        if self.dt >= self.t_end {
            return invalid(format!("dt ({}) must be smaller than t_end ({})", self.dt, self.t_end));
        }
        if self.stride == 0 {
            return invalid("stride must be at least 1");
        }
        (self.t_end / self.dt)
            .ceil()
            .to_usize()
            .ok_or_else(|| Error::InvalidArgument("step count overflow".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    /// States at `t = 0`, every `stride` steps, and at `t_end`.
    pub states: Vec<WaveState<T>>,
    pub step: T,
    pub steps: usize,
    pub max_norm_drift: T,
    pub initial_index: usize,
    pub searched_index: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &WaveState<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Star-shaped interaction-picture couplings: every search-set level talks to
/// `|j>` only.
struct Couplings<T> {
    initial: usize,
    /// `(n, g, w)` with `<n|V_I(t)|j> = g e^{i w t}`.
    links: Vec<(usize, T, T)>,
}

impl<T: Real> Couplings<T> {
    fn new(spectrum: &SpectrumConfig<T>, coupling: &CouplingPotential<T>) -> Self {
        let j = coupling.initial_index;
        let links = coupling
            .search_set
            .iter()
            .map(|&n| (n, coupling.amplitude, coupling.drive_frequency + spectrum.bohr(n, j)))
            .collect();
        Self { initial: j, links }
    }

    fn phases(&self, t: T, out: &mut Vec<Complex<T>>) {
        out.clear();
        out.extend(self.links.iter().map(|&(_, g, w)| Complex::from_polar(g, w * t)));
    }

    /// `da/dt` given the link factors at the evaluation time.
    fn derivative(&self, phases: &[Complex<T>], a: &[Complex<T>], out: &mut [Complex<T>]) {
        let minus_i = Complex::new(T::zero(), -T::one());
        let a_j = a[self.initial];
        let mut acc = Complex::new(T::zero(), T::zero());
        for (&(n, _, _), g) in self.links.iter().zip(phases) {
            out[n] = minus_i * g * a_j;
            acc = acc + g.conj() * a[n];
        }
        out[self.initial] = minus_i * acc;
    }
}

/// Runs the integrator and hands every state (including `t = 0`) to
/// `observer`. Returns `(step, steps, max_norm_drift)`.
pub fn integrate_with<T: Real, F: FnMut(&WaveState<T>)>(
    spectrum: &SpectrumConfig<T>,
    coupling: &CouplingPotential<T>,
    options: &IntegratorOptions<T>,
    mut observer: F,
) -> Result<(T, usize, T)> {
    spectrum.validate()?;
    let steps = options.validate()?;
    let h = options.t_end / lit::<T>(steps as f64);
    let half_h = h * lit::<T>(0.5);
    let sixth = lit::<T>(1.0 / 6.0);
    let two = lit::<T>(2.0);

    let couplings = Couplings::new(spectrum, coupling);
    let dim = spectrum.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut state = WaveState::basis(dim, spectrum.initial_index);
    observer(&state);

    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; dim], vec![zero; dim], vec![zero; dim], vec![zero; dim]);
    let mut tmp = vec![zero; dim];
    let (mut ph0, mut ph_mid, mut ph1) = (Vec::new(), Vec::new(), Vec::new());
    couplings.phases(T::zero(), &mut ph0);
    let mut max_drift = T::zero();

    for step in 1..=steps {
        let t0 = lit::<T>((step - 1) as f64) * h;
        let t1 = lit::<T>(step as f64) * h;
        couplings.phases(t0 + half_h, &mut ph_mid);
        couplings.phases(t1, &mut ph1);

        let a = &state.amplitudes;
        couplings.derivative(&ph0, a, &mut k1);
        for i in 0..dim {
            tmp[i] = a[i] + k1[i] * half_h;
        }
        couplings.derivative(&ph_mid, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = a[i] + k2[i] * half_h;
        }
        couplings.derivative(&ph_mid, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = a[i] + k3[i] * h;
        }
        couplings.derivative(&ph1, &tmp, &mut k4);
        for i in 0..dim {
            state.amplitudes[i] = state.amplitudes[i] + (k1[i] + (k2[i] + k3[i]) * two + k4[i]) * (h * sixth);
        }
        state.time = t1;
        std::mem::swap(&mut ph0, &mut ph1);

        let drift = (state.norm_sqr() - T::one()).abs();
        max_drift = max_drift.max(drift);
        if drift > options.drift_limit {
            return Err(Error::IntegrationFailure {
                time: t1.to_f64().unwrap_or(f64::NAN),
                drift: drift.to_f64().unwrap_or(f64::NAN),
                limit: options.drift_limit.to_f64().unwrap_or(f64::NAN),
            });
        }
        observer(&state);
    }
    Ok((h, steps, max_drift))
}

/// Integrates from `a_j(0) = 1` to `t_end`, keeping every
/// [`DEFAULT_STRIDE`]-th state.
pub fn integrate_full<T: Real>(
    spectrum: &SpectrumConfig<T>,
    coupling: &CouplingPotential<T>,
    t_end: T,
    dt: T,
) -> Result<Trajectory<T>> {
    integrate_sampled(spectrum, coupling, &IntegratorOptions::new(t_end, dt))
}

pub fn integrate_sampled<T: Real>(
    spectrum: &SpectrumConfig<T>,
    coupling: &CouplingPotential<T>,
    options: &IntegratorOptions<T>,
) -> Result<Trajectory<T>> {
    let mut states = Vec::new();
    let mut index = 0usize;
    let mut last = None;
    let (step, steps, max_norm_drift) = integrate_with(spectrum, coupling, options, |s| {
        if index.is_multiple_of(options.stride) {
            states.push(s.clone());
            last = None;
        } else {
            last = Some(s.clone());
        }
        index += 1;
    })?;
    states.extend(last);
    Ok(Trajectory {
        states,
        step,
        steps,
        max_norm_drift,
        initial_index: spectrum.initial_index,
        searched_index: spectrum.searched_index,
    })
}

/// Agreement between the full simulation and `sin^2(Omega t)` over `[0, tau]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport<T> {
    pub sup_deviation: T,
    pub p_s_final: T,
    pub max_norm_drift: T,
    pub omega: T,
    pub tau: T,
    /// Smallest nonzero Bohr frequency divided by `Omega`.
    pub gap_ratio: Option<T>,
    pub step: T,
    pub steps: usize,
}

pub fn validate_two_level<T: Real>(spectrum: &SpectrumConfig<T>, dt: T) -> Result<ValidationReport<T>> {
    let coupling = super::build_coupling(spectrum)?;
    validate_two_level_with(spectrum, &coupling, dt)
}

/// As [`validate_two_level`] with an explicit (possibly altered) coupling.
pub fn validate_two_level_with<T: Real>(
    spectrum: &SpectrumConfig<T>,
    coupling: &CouplingPotential<T>,
    dt: T,
) -> Result<ValidationReport<T>> {
    let params = spectrum.resonance_params()?;
    let s = spectrum.searched_index;
    let mut sup = T::zero();
    let mut p_s_final = T::zero();
    let options = IntegratorOptions::new(params.tau(), dt);
    let (step, steps, max_norm_drift) = integrate_with(spectrum, coupling, &options, |state| {
        let p_s = state.probability(s);
        let model = two_level_probabilities(state.time, &params).p_s;
        sup = sup.max((p_s - model).abs());
        p_s_final = p_s;
    })?;
    Ok(ValidationReport {
        sup_deviation: sup,
        p_s_final,
        max_norm_drift,
        omega: params.omega(),
        tau: params.tau(),
        gap_ratio: spectrum.min_gap().map(|g| g / params.omega()),
        step,
        steps,
    })
}
