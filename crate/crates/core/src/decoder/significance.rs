use statrs::function::beta::beta_reg;

use crate::error::{AadError, Result};

/// One-sided exact binomial test: `P[X >= n_correct]` for `X ~ Bin(n_windows, chance)`.
///
/// Uses the identity `P[X >= k] = I_p(k, n - k + 1)` with the regularised
/// incomplete beta function.
pub fn binomial_significance(n_correct: u64, n_windows: u64, chance: f64) -> Result<f64> {
    if n_correct > n_windows {
        return Err(AadError::InvalidCounts(format!(
            "{n_correct} correct out of {n_windows} windows"
        )));
    }
    if !(chance > 0.0 && chance < 1.0) {
        return Err(AadError::InvalidCounts(format!(
            "chance level {chance} outside (0, 1)"
        )));
    }
    if n_correct == 0 {
        return Ok(1.0);
    }
    let k = n_correct as f64;
    let n = n_windows as f64;
    Ok(beta_reg(k, n - k + 1.0, chance).clamp(0.0, 1.0))
}
