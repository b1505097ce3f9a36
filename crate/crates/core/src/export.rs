//! CSV and JSON renderings of analysis results.
//!
//! CSV files use `.` decimals, LF line endings and a header row. Numbers are
//! rounded to 15 decimal places and trailing zeros trimmed, so output is
//! stable byte for byte and exact closed-form values print plainly.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::collapse::zeno_coefficients;
use crate::error::Result;
use crate::resonance::{two_level_amplitudes, ResonanceParams, Trajectory};
use crate::scalar::{lit, Real};
use crate::strategy::HeatmapGrid;

pub fn format_number<T: Real>(x: T) -> String {
    let x = x.to_f64().unwrap_or(f64::NAN);
    if !x.is_finite() {
        return x.to_string();
    }
    let mut s = format!("{x:.15}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn row<T: Real>(out: &mut String, values: &[T]) {
    let line = values.iter().map(|&v| format_number(v)).collect::<Vec<_>>().join(",");
    out.push_str(&line);
    out.push('\n');
}

/// `t1,t2,p_s` for every defined cell.
pub fn heatmap_csv<T: Real>(grid: &HeatmapGrid<T>) -> String {
    let mut out = String::from("t1,t2,p_s\n");
    for (t1, t2, v) in grid.cells() {
        row(&mut out, &[t1, t2, v]);
    }
    out
}

/// `{"resolution": n, "tau_units": true, "values": [[...]]}` with `null` below
/// the diagonal.
pub fn heatmap_json<T: Real>(grid: &HeatmapGrid<T>) -> Value {
    let values: Vec<Vec<Option<f64>>> =
        grid.values.iter().map(|r| r.iter().map(|v| v.and_then(|v| v.to_f64())).collect()).collect();
    json!({ "resolution": grid.resolution, "tau_units": true, "values": values })
}

/// `m,alpha,beta` for `m = 1..=m_max` measurements filling one transfer time.
pub fn zeno_csv<T: Real>(m_max: u32) -> Result<String> {
    let mut out = String::from("m,alpha,beta\n");
    for m in 1..=m_max {
        let c = zeno_coefficients::<T>(m)?;
        writeln!(out, "{m},{},{}", format_number(c.alpha), format_number(c.beta)).expect("write to String");
    }
    Ok(out)
}

pub fn zeno_json<T: Real>(m_max: u32) -> Result<Value> {
    let rows = (1..=m_max)
        .map(|m| {
            let c = zeno_coefficients::<T>(m)?;
            Ok(json!({ "m": m, "alpha": c.alpha.to_f64(), "beta": c.beta.to_f64() }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Value::Array(rows))
}

/// `(t, a_j, a_s)` for `points` times evenly spread over `[0, t_max]`, in
/// units of `tau`. Over `t_max = 4` the pair traces the full unit circle.
pub fn amplitude_rows<T: Real>(t_max: T, points: usize) -> Vec<[T; 3]> {
    let unit = ResonanceParams::<T>::unit();
    let last = points.saturating_sub(1).max(1);
    (0..points)
        .map(|k| {
            let t = t_max * lit::<T>(k as f64) / lit::<T>(last as f64);
            let (a_j, a_s) = two_level_amplitudes(t, &unit);
            [t, a_j, a_s]
        })
        .collect()
}

pub fn amplitudes_csv<T: Real>(t_max: T, points: usize) -> String {
    let mut out = String::from("t,a_j,a_s\n");
    for r in amplitude_rows(t_max, points) {
        row(&mut out, &r);
    }
    out
}

/// `t,P_j,P_s,P_rest,norm` for every stored state.
pub fn trajectory_csv<T: Real>(trajectory: &Trajectory<T>) -> String {
    let mut out = String::from("t,P_j,P_s,P_rest,norm\n");
    let (j, s) = (trajectory.initial_index, trajectory.searched_index);
    for state in &trajectory.states {
        let norm = state.norm_sqr();
        let (p_j, p_s) = (state.probability(j), state.probability(s));
        row(&mut out, &[state.time, p_j, p_s, norm - p_j - p_s, norm]);
    }
    out
}
