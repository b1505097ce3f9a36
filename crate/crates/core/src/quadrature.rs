//! Simpson quadrature on the unit interval and on the triangle
//! `0 <= x <= y <= 1`.
//!
//! The triangle is mapped onto the unit square by `x = u v, y = v` (Jacobian
//! `v`), which keeps the integrand smooth for the trigonometric surfaces used
//! here.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{half, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    Adaptive,
    FixedSimpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions<T> {
    pub method: QuadratureMethod,
    pub tolerance: T,
    /// Panels per axis for the fixed rule (rounded up to even).
    pub intervals: usize,
    pub max_depth: u32,
}

impl<T: Real> QuadratureOptions<T> {
    pub fn fixed(tolerance: T) -> Self {
        Self { method: QuadratureMethod::FixedSimpson, tolerance, intervals: 1024, max_depth: 48 }
    }

    pub fn adaptive(tolerance: T) -> Self {
        Self { method: QuadratureMethod::Adaptive, ..Self::fixed(tolerance) }
    }
}

/// Composite Simpson on `[a, b]` with `n` panels (`n` even).
pub fn simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / lit::<T>(n as f64);
    let (two, four) = (lit::<T>(2.0), lit::<T>(4.0));
    let inner: T = (1..n)
        .map(|k| {
            let w = if k % 2 == 1 { four } else { two };
            w * f(a + lit::<T>(k as f64) * h)
        })
        .sum();
    (f(a) + inner + f(b)) * h / lit::<T>(3.0)
}

/// Tensor Simpson over the mapped triangle with `n` panels per axis.
pub fn simpson_triangle<T: Real, F: Fn(T, T) -> T + Sync>(f: &F, n: usize) -> T {
    let n = n + n % 2;
    let h = T::one() / lit::<T>(n as f64);
    let weight = |k: usize| -> T {
        if k == 0 || k == n {
            T::one()
        } else if k % 2 == 1 {
            lit(4.0)
        } else {
            lit(2.0)
        }
    };
    let total: T = (0..=n)
        .into_par_iter()
        .map(|iv| {
            let v = lit::<T>(iv as f64) * h;
            let row: T = (0..=n).map(|iu| weight(iu) * f(lit::<T>(iu as f64) * h * v, v)).sum();
            weight(iv) * v * row
        })
        .collect::<Vec<T>>()
        .into_iter()
        .sum();
    total * h * h / lit::<T>(9.0)
}

/// Fixed Simpson at `n` and `n/2` panels; the error is the Richardson
/// estimate `|S_n - S_{n/2}| / 15`.
pub fn fixed_triangle<T: Real, F: Fn(T, T) -> T + Sync>(f: &F, n: usize) -> Estimate<T> {
    let n = (n + n % 4).max(4);
    let fine = simpson_triangle(f, n);
    let coarse = simpson_triangle(f, n / 2);
    Estimate { value: fine, error: (fine - coarse).abs() / lit::<T>(15.0) }
}

/// Adaptive Simpson on `[a, b]` for a fallible integrand.
pub fn adaptive_simpson<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    a: T,
    b: T,
    tolerance: T,
    max_depth: u32,
) -> Result<Estimate<T>> {
    let h = half::<T>();
    let m = (a + b) * h;
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = simpson_panel(a, b, fa, fm, fb);
    let mut error = T::zero();
    let value = recurse(&mut f, a, b, fa, fm, fb, whole, tolerance, max_depth, &mut error)?;
    Ok(Estimate { value, error })
}

fn simpson_panel<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / lit::<T>(6.0) * (fa + lit::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, F: FnMut(T) -> Result<T>>(
    f: &mut F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tolerance: T,
    depth: u32,
    error: &mut T,
) -> Result<T> {
    let h = half::<T>();
    let m = (a + b) * h;
    let (lm, rm) = ((a + m) * h, (m + b) * h);
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = simpson_panel(a, m, fa, flm, fm);
    let right = simpson_panel(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let fifteen = lit::<T>(15.0);
    if delta.abs() <= fifteen * tolerance {
        *error = *error + delta.abs() / fifteen;
        return Ok(left + right + delta / fifteen);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure {
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
            estimate: (delta.abs() / fifteen).to_f64().unwrap_or(f64::NAN),
        });
    }
    let l = recurse(f, a, m, fa, flm, fm, left, tolerance * h, depth - 1, error)?;
    let r = recurse(f, m, b, fm, frm, fb, right, tolerance * h, depth - 1, error)?;
    Ok(l + r)
}

/// Nested adaptive Simpson over `0 <= x <= y <= 1`: outer in `y`, inner in
/// `x` on `[0, y]`.
pub fn adaptive_triangle<T: Real, F: Fn(T, T) -> T>(f: &F, tolerance: T, max_depth: u32) -> Result<Estimate<T>> {
    let inner_tol = tolerance * half::<T>();
    let mut inner_error = T::zero();
    let outer = adaptive_simpson(
        |y| {
            if y == T::zero() {
                return Ok(T::zero());
            }
            let est = adaptive_simpson(|x| Ok(f(x, y)), T::zero(), y, inner_tol, max_depth)?;
            inner_error = inner_error.max(est.error);
            Ok(est.value)
        },
        T::zero(),
        T::one(),
        tolerance * half::<T>(),
        max_depth,
    )?;
    Ok(Estimate { value: outer.value, error: outer.error + inner_error })
}

/// Integrates `f` over the triangle `0 <= x <= y <= 1` with the requested rule.
pub fn integrate_triangle<T: Real, F: Fn(T, T) -> T + Sync>(
    f: &F,
    options: &QuadratureOptions<T>,
) -> Result<Estimate<T>> {
    if !(options.tolerance > T::zero()) {
        return invalid(format!("tolerance must be positive, got {}", options.tolerance));
    }
    let est = match options.method {
        QuadratureMethod::Adaptive => adaptive_triangle(f, options.tolerance, options.max_depth)?,
        QuadratureMethod::FixedSimpson => fixed_triangle(f, options.intervals),
    };
    if est.error > options.tolerance {
        return Err(Error::QuadratureFailure {
            tolerance: options.tolerance.to_f64().unwrap_or(f64::NAN),
            estimate: est.error.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_polynomials() {
        // area 1/2, int x = 1/6, int x y = 1/8
        let area = simpson_triangle(&|_x: f64, _y: f64| 1.0, 8);
        let mx = simpson_triangle(&|x: f64, _y: f64| x, 8);
        let mxy = simpson_triangle(&|x: f64, y: f64| x * y, 8);
        assert!((area - 0.5).abs() < 1e-14);
        assert!((mx - 1.0 / 6.0).abs() < 1e-14);
        assert!((mxy - 0.125).abs() < 1e-14);
    }

    #[test]
    fn trigonometric_integrand_both_rules() {
        // int_0^1 int_0^y cos(x) dx dy = 1 - cos(1)
        let f = |x: f64, _y: f64| x.cos();
        let exact = 1.0 - 1f64.cos();
        let fixed = integrate_triangle(&f, &QuadratureOptions::fixed(1e-10)).unwrap();
        assert!((fixed.value - exact).abs() < 1e-12);
        let adaptive = integrate_triangle(&f, &QuadratureOptions::adaptive(1e-10)).unwrap();
        assert!((adaptive.value - exact).abs() < 1e-10);
    }

    #[test]
    fn adaptive_failure_is_reported() {
        let f = |x: f64| -> Result<f64> { Ok(if x < 0.3 { 0.0 } else { 1.0 }) };
        let err = adaptive_simpson(f, 0.0, 1.0, 1e-14, 4).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
        assert!(integrate_triangle(&|x: f64, _| x, &QuadratureOptions::fixed(0.0)).is_err());
    }

    #[test]
    fn coarse_fixed_rule_flags_tolerance() {
        let opts = QuadratureOptions { intervals: 4, ..QuadratureOptions::fixed(1e-12) };
        let err = integrate_triangle(&|x: f64, y: f64| (9.0 * x * y).sin(), &opts).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }
}
