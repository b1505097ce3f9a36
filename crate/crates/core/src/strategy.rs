//! Strategy-space analysis: win surfaces, random-strategy payoffs, best
//! responses and the maximin point.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collapse::CollapseOutcome;
use crate::error::{invalid, Result};
use crate::game::{self, GameSpec, GameVariant, PayoffMethod, PayoffReport, StrategyProfile};
use crate::quadrature::{self, QuadratureOptions};
use crate::rng;
use crate::scalar::{lit, Real};

/// Tolerance under which two grid values count as tied.
fn tie_tolerance<T: Real>() -> T {
    T::epsilon() * lit(64.0)
}

/// Win densities per unit strategy area, with `tau = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinDensity<T> {
    pub sigma_s: T,
    pub sigma_j: T,
}

/// `(sigma_s, sigma_j) = 2 (beta, alpha)`: uniform density `2` on the unit
/// triangle, weighted by the win probabilities.
pub fn win_density<T: Real>(game: &GameSpec<T>, strategy: &StrategyProfile<T>) -> WinDensity<T> {
    let beta = game::win_probability(game, strategy);
    let two = lit::<T>(2.0);
    WinDensity { sigma_s: two * beta, sigma_j: two * (T::one() - beta) }
}

/// Win probability sampled on the closed triangle with `resolution` nodes per
/// axis; `values[i][k]` is at `(T1, T2) = (i, k) / (resolution - 1)` and is
/// `None` below the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid<T> {
    pub resolution: usize,
    pub values: Vec<Vec<Option<T>>>,
}

impl<T: Real> HeatmapGrid<T> {
    pub fn coordinate(&self, k: usize) -> T {
        node(k, self.resolution)
    }

    pub fn get(&self, i: usize, k: usize) -> Option<T> {
        self.values.get(i)?.get(k).copied().flatten()
    }

    /// `(t1, t2, p_s)` for every defined cell, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.values.iter().enumerate().flat_map(move |(i, row)| {
            row.iter().enumerate().filter_map(move |(k, v)| v.map(|v| (self.coordinate(i), self.coordinate(k), v)))
        })
    }
}

fn node<T: Real>(k: usize, resolution: usize) -> T {
    if k + 1 == resolution {
        T::one()
    } else {
        lit::<T>(k as f64) / lit::<T>((resolution - 1) as f64)
    }
}

pub fn heatmap<T: Real>(game: &GameSpec<T>, resolution: usize) -> Result<HeatmapGrid<T>> {
    if resolution < 2 {
        return invalid(format!("heatmap resolution must be at least 2, got {resolution}"));
    }
    let values = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let t1 = node::<T>(i, resolution);
            (0..resolution)
                .map(|k| {
                    (k >= i).then(|| game::searched_probability(game.variant, t1, node::<T>(k, resolution)))
                })
                .collect()
        })
        .collect();
    Ok(HeatmapGrid { resolution, values })
}

/// Uniform-random win probabilities quoted for comparison. The three-
/// measurement pair does not sum to one.
fn quoted_random_payoff<T: Real>(variant: GameVariant) -> Option<(T, T)> {
    match variant {
        GameVariant::TwoMeasure => Some((lit(0.5), lit(0.5))),
        GameVariant::ThreeMeasure => Some((lit(7.0 / 8.0), lit(3.0 / 8.0))),
        GameVariant::RegularZeno(_) => None,
    }
}

/// Comparison of a computed random-strategy payoff against quoted values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCheck<T> {
    pub quoted_pi_s: T,
    pub quoted_pi_j: T,
    pub consistent: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomStrategyReport<T> {
    #[serde(flatten)]
    pub payoff: PayoffReport<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceCheck<T>>,
}

fn reference_check<T: Real>(variant: GameVariant, pi_s: T, slack: T) -> Option<ReferenceCheck<T>> {
    let (qs, qj) = quoted_random_payoff::<T>(variant)?;
    let sums_to_one = (qs + qj - T::one()).abs() <= slack;
    let matches = (qs - pi_s).abs() <= slack;
    let note = match (sums_to_one, matches) {
        (true, true) => "computed value agrees with the quoted value".to_string(),
        (false, _) => format!(
            "quoted pi_s = {qs}, pi_j = {qj} sum to {} and cannot both be win probabilities; \
             reporting the computed pi_s = {pi_s}",
            qs + qj
        ),
        (true, false) => format!("computed pi_s = {pi_s} differs from the quoted {qs}"),
    };
    Some(ReferenceCheck { quoted_pi_s: qs, quoted_pi_j: qj, consistent: sums_to_one && matches, note })
}

/// Win probabilities when both times are drawn uniformly on the legal triangle
/// `0 <= T1 <= T2 <= tau`: `pi_s` is the integral of `sigma_s` over it.
pub fn random_strategy_payoff<T: Real>(
    game: &GameSpec<T>,
    options: &QuadratureOptions<T>,
) -> Result<RandomStrategyReport<T>> {
    let variant = game.variant;
    let two = lit::<T>(2.0);
    let density = move |t1: T, t2: T| two * game::searched_probability(variant, t1, t2);
    let est = quadrature::integrate_triangle(&density, options)?;
    let payoff = PayoffReport::from_win_probability(est.value, game.stake, PayoffMethod::Quadrature, est.error);
    let slack = options.tolerance.max(est.error).max(lit(1e-6));
    Ok(RandomStrategyReport { reference: reference_check(variant, est.value, slack), payoff })
}

/// Monte Carlo estimate of [`random_strategy_payoff`]: uniform points on the
/// triangle, each settled by one sampled round. `error_estimate` is three
/// binomial standard deviations.
pub fn monte_carlo_payoff<T: Real>(game: &GameSpec<T>, trials: u64, seed: u64) -> Result<RandomStrategyReport<T>> {
    const CHUNK: u64 = 1 << 16;
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let chunks = trials.div_ceil(CHUNK);
    let wins: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, c);
            let n = CHUNK.min(trials - c * CHUNK);
            (0..n)
                .filter(|_| {
                    let (a, b): (f64, f64) = (rng.random(), rng.random());
                    let strategy = StrategyProfile { t1: lit::<T>(a.min(b)), t2: lit::<T>(a.max(b)) };
                    game::play_round_with(game, &strategy, &mut rng).final_outcome == CollapseOutcome::Searched
                })
                .count() as u64
        })
        .sum();
    let n = trials as f64;
    let p = wins as f64 / n;
    let sigma = (p * (1.0 - p) / n).sqrt();
    let pi_s = lit::<T>(p);
    let payoff = PayoffReport::from_win_probability(pi_s, game.stake, PayoffMethod::MonteCarlo, lit(3.0 * sigma));
    let slack = lit::<T>((3.0 * sigma).max(1e-6));
    Ok(RandomStrategyReport { reference: reference_check(game.variant, pi_s, slack), payoff })
}

/// Maximizes `f` on `[a, b]` by golden-section search.
fn golden_max<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = lit::<T>((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) * lit::<T>(0.5);
    (x, f(x))
}

/// Grid argmax (ties to the smaller argument) refined by golden section on the
/// neighbouring cells.
fn refined_argmax<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, resolution: usize) -> (T, T) {
    let n = resolution.max(2);
    let at = |k: usize| if k + 1 == n { hi } else { lo + (hi - lo) * lit::<T>(k as f64) / lit::<T>((n - 1) as f64) };
    let tie = tie_tolerance::<T>();
    let (mut best_k, mut best) = (0, f(at(0)));
    for k in 1..n {
        let v = f(at(k));
        if v > best + tie {
            best_k = k;
            best = v;
        }
    }
    let (a, b) = (at(best_k.saturating_sub(1)), at((best_k + 1).min(n - 1)));
    let mut x = at(best_k);
    if b > a {
        let (rx, rv) = golden_max(&f, a, b, lit::<T>(1e-13));
        if rv > best + tie {
            x = rx;
            best = rv;
        }
    }
    (x, best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse<T> {
    pub t2_star: T,
    pub value: T,
}

/// Silvia's best measurement time given Juan's `t1`.
pub fn best_response<T: Real>(game: &GameSpec<T>, t1: T, resolution: usize) -> Result<BestResponse<T>> {
    if !(t1 >= T::zero() && t1 <= T::one()) {
        return invalid(format!("T1 = {t1} outside [0, tau]"));
    }
    if resolution < 2 {
        return invalid("resolution must be at least 2");
    }
    if !game.is_strategic() || t1 == T::one() {
        return Ok(BestResponse { t2_star: t1, value: game::searched_probability(game.variant, t1, t1) });
    }
    let (t2_star, value) = refined_argmax(|t2| game::searched_probability(game.variant, t1, t2), t1, T::one(), resolution);
    Ok(BestResponse { t2_star, value })
}

/// Juan's time in `[0, t2]` minimizing Silvia's win probability against a
/// known `t2`.
pub fn juan_best_response<T: Real>(game: &GameSpec<T>, t2: T, resolution: usize) -> Result<T> {
    if !(t2 >= T::zero() && t2 <= T::one()) {
        return invalid(format!("T2 = {t2} outside [0, tau]"));
    }
    if !game.is_strategic() || t2 == T::zero() {
        return Ok(T::zero());
    }
    Ok(refined_argmax(|t1| -game::searched_probability(game.variant, t1, t2), T::zero(), t2, resolution).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximin<T> {
    /// `None` for games without a strategic choice.
    pub t1_star: Option<T>,
    pub game_value: T,
    /// Whether Silvia is indifferent over `T2` at `t1_star`.
    pub flat: bool,
}

/// Juan's time minimizing Silvia's best achievable win probability.
pub fn maximin_strategy<T: Real>(game: &GameSpec<T>, resolution: usize) -> Result<Maximin<T>> {
    if resolution < 2 {
        return invalid("resolution must be at least 2");
    }
    if !game.is_strategic() {
        let value = game::searched_probability(game.variant, T::zero(), T::zero());
        return Ok(Maximin { t1_star: None, game_value: value, flat: true });
    }
    let inner = |t1: T| best_response(game, t1, resolution).map(|b| b.value).expect("t1 in range");
    let values: Vec<T> = (0..resolution).into_par_iter().map(|i| inner(node(i, resolution))).collect();
    let tie = tie_tolerance::<T>();
    let (mut best_i, mut best) = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best - tie {
            best_i = i;
            best = v;
        }
    }
    let mut t1_star = node::<T>(best_i, resolution);
    let (a, b) = (node::<T>(best_i.saturating_sub(1), resolution), node::<T>((best_i + 1).min(resolution - 1), resolution));
    let (rx, rv) = golden_max(|t1| -inner(t1), a, b, lit::<T>(1e-13));
    if -rv < best - tie {
        t1_star = rx;
        best = -rv;
    }

    let (lo, hi) = (0..resolution)
        .map(|k| {
            let t2 = t1_star + (T::one() - t1_star) * node::<T>(k, resolution);
            game::searched_probability(game.variant, t1_star, t2)
        })
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(Maximin { t1_star: Some(t1_star), game_value: best, flat: hi - lo <= lit(1e-9) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn g1() -> GameSpec<f64> {
        GameSpec::two_measure()
    }

    fn g2() -> GameSpec<f64> {
        GameSpec::three_measure()
    }

    #[test]
    fn densities() {
        let d = win_density(&g1(), &StrategyProfile::new(0.5, 0.9).unwrap());
        assert_eq!((d.sigma_s, d.sigma_j), (1.0, 1.0));
        let d = win_density(&g1(), &StrategyProfile::new(1.0, 1.0).unwrap());
        assert_eq!((d.sigma_s, d.sigma_j), (2.0, 0.0));
    }

    #[test]
    fn heatmap_landmarks() {
        let h = heatmap(&g1(), 401).unwrap();
        assert_eq!(h.get(400, 400), Some(1.0));
        assert_eq!(h.get(0, 0), Some(0.0));
        assert_eq!(h.get(200, 100), None);
        for k in 200..401 {
            assert_eq!(h.get(200, k), Some(0.5));
        }
        assert_eq!(heatmap(&g2(), 400).unwrap().get(0, 0), Some(1.0));
        assert_eq!(heatmap(&g1(), 3).unwrap().cells().count(), 6);
        assert!(heatmap(&g1(), 1).is_err());
    }

    #[test]
    fn game_two_is_time_reversal_symmetric() {
        let h = heatmap(&g2(), 101).unwrap();
        for (t1, t2, v) in h.cells() {
            let mirrored = game::searched_probability(GameVariant::ThreeMeasure, 1.0 - t2, 1.0 - t1);
            assert!((v - mirrored).abs() <= 1e-12);
        }
    }

    #[test]
    fn random_payoffs_by_quadrature() {
        let r = random_strategy_payoff(&g1(), &QuadratureOptions::fixed(1e-8)).unwrap();
        assert!((r.payoff.pi_s - 0.5).abs() < 1e-8);
        assert!(r.payoff.payoff_s.abs() < 2e-8);
        assert!(r.reference.as_ref().unwrap().consistent);

        let r = random_strategy_payoff(&g2(), &QuadratureOptions::adaptive(1e-9)).unwrap();
        assert!((r.payoff.pi_s - 0.625).abs() < 1e-8);
        assert!((r.payoff.payoff_s - 0.25).abs() < 2e-8);
        let check = r.reference.unwrap();
        assert!(!check.consistent);
        assert_eq!(check.quoted_pi_s, 0.875);

        let broke = GameSpec::new(GameVariant::ThreeMeasure, 0.0).unwrap();
        assert_eq!(random_strategy_payoff(&broke, &QuadratureOptions::fixed(1e-8)).unwrap().payoff.payoff_s, 0.0);
    }

    #[test]
    fn transposed_triangle_gives_same_payoffs() {
        // Integrating over the literal inner limits 0..T1 instead of T1..tau.
        for variant in [GameVariant::TwoMeasure, GameVariant::ThreeMeasure] {
            let legal = quadrature::fixed_triangle(&|a: f64, b: f64| 2.0 * game::searched_probability(variant, a, b), 512).value;
            let transposed = quadrature::fixed_triangle(&|a: f64, b: f64| 2.0 * game::searched_probability(variant, b, a), 512).value;
            assert!((legal - transposed).abs() < 1e-10, "{variant:?}: {legal} vs {transposed}");
        }
    }

    #[test]
    fn densities_normalize() {
        for game in [g1(), g2()] {
            let f = |a: f64, b: f64| {
                let d = win_density(&game, &StrategyProfile { t1: a, t2: b });
                d.sigma_s + d.sigma_j
            };
            let est = quadrature::integrate_triangle(&f, &QuadratureOptions::fixed(1e-10)).unwrap();
            assert!((est.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn best_responses() {
        let r = best_response(&g1(), 0.25, 1001).unwrap();
        assert_eq!(r.t2_star, 1.0);
        assert!((r.value - 0.5 * (1.0 + (PI / 4.0).cos().powi(2))).abs() < 1e-12);

        // cos(pi T1) < 0: measuring right after Juan keeps his collapse,
        // value 1/2 (1 + |cos(3 pi / 4)|)
        let r = best_response(&g1(), 0.75, 1001).unwrap();
        assert_eq!(r.t2_star, 0.75);
        assert!((r.value - 0.5 * (1.0 + std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);

        let r = best_response(&g1(), 0.5, 1001).unwrap();
        assert_eq!((r.t2_star, r.value), (0.5, 0.5));

        assert!(best_response(&g1(), 1.2, 11).is_err());
    }

    #[test]
    fn best_response_matches_brute_force() {
        for &t1 in &[0.0, 0.1, 0.25, 0.4, 0.6, 0.75, 0.95] {
            let n = 100_000;
            let brute = (0..=n)
                .map(|k| t1 + (1.0 - t1) * k as f64 / n as f64)
                .map(|t2| game::searched_probability(GameVariant::TwoMeasure, t1, t2))
                .fold(f64::NEG_INFINITY, f64::max);
            let r = best_response(&g1(), t1, 501).unwrap();
            assert!((r.value - brute).abs() < 1e-9, "t1 = {t1}");
        }
    }

    #[test]
    fn juan_counters_silvia() {
        // against T2 = tau Juan's best is T1 = tau/2 in game one: beta = 1/2 (1 - cos(pi(1-T1))cos(pi T1)) >= 1/2
        let t1 = juan_best_response(&g1(), 1.0, 1001).unwrap();
        assert!((t1 - 0.5).abs() < 1e-6);
        assert!(juan_best_response(&g1(), -0.1, 11).is_err());
    }

    #[test]
    fn maximin_points() {
        for game in [g1(), g2()] {
            let m = maximin_strategy(&game, 1001).unwrap();
            assert!((m.t1_star.unwrap() - 0.5).abs() <= 1e-3);
            assert!((m.game_value - 0.5).abs() <= 1e-9);
            assert!(m.flat);
            let br = best_response(&game, m.t1_star.unwrap(), 1001).unwrap();
            assert!((br.value - m.game_value).abs() <= 1e-9);
        }
        let even = maximin_strategy(&g1(), 400).unwrap();
        assert!((even.t1_star.unwrap() - 0.5).abs() <= 1.0 / 399.0);
        assert!((even.game_value - 0.5).abs() <= 1e-9);

        let z = maximin_strategy(&GameSpec::<f64>::regular(4).unwrap(), 11).unwrap();
        assert_eq!(z, Maximin { t1_star: None, game_value: 0.375, flat: true });
    }

    #[test]
    fn monte_carlo_small_cases() {
        let r = monte_carlo_payoff(&g1(), 1, 9).unwrap();
        assert!(r.payoff.pi_s == 0.0 || r.payoff.pi_s == 1.0);
        assert!(monte_carlo_payoff(&g1(), 0, 9).is_err());
        let a = monte_carlo_payoff(&g2(), 100_000, 5).unwrap();
        let b = monte_carlo_payoff(&g2(), 100_000, 5).unwrap();
        assert_eq!(a, b);
        assert!((a.payoff.pi_s - 0.625).abs() <= a.payoff.error_estimate);
    }
}
