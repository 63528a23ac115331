//! Real wavenumber grids.

use crate::error::{Result, ScatterError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// `count` points from `min` to `max` inclusive.
pub fn k_grid(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(ScatterError::InvalidArgument(
            "grid count must be at least 1".into(),
        ));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(ScatterError::InvalidArgument(format!(
            "grid bounds must satisfy min <= max, got [{min}, {max}]"
        )));
    }
    if spacing == Spacing::Log && min <= 0.0 {
        return Err(ScatterError::InvalidArgument(format!(
            "log grid needs min > 0, got {min}"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let step = 1.0 / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let s = i as f64 * step;
            match spacing {
                Spacing::Linear => min + (max - min) * s,
                Spacing::Log => (min.ln() + (max.ln() - min.ln()) * s).exp(),
            }
        })
        .collect())
}

/// 100 log-spaced points on `[0.1, 10] / length_scale`.
pub fn default_grid(length_scale: f64) -> Vec<f64> {
    let s = if length_scale > 0.0 {
        length_scale
    } else {
        1.0
    };
    k_grid(0.1 / s, 10.0 / s, 100, Spacing::Log).expect("default grid bounds are valid")
}
