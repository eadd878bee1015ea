//! Bracketed per-GCP scoring and sequence score normalization.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// One scoring bracket: errors strictly below `upper_m` (and at or above
/// the previous bound) earn `points`. `upper_m = None` marks the final
/// open-ended zero bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreBracket {
    pub upper_m: Option<f64>,
    pub points: u32,
}

/// The challenge scoring table. Bounds are half-open: the lower bound is
/// inclusive, the upper exclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreBrackets {
    pub brackets: Vec<ScoreBracket>,
    pub max_points_per_gcp: u32,
}

impl Default for ScoreBrackets {
    fn default() -> Self {
        let table = [
            (0.005, 20),
            (0.01, 10),
            (0.03, 6),
            (0.06, 5),
            (0.1, 3),
            (0.4, 1),
        ];
        let mut brackets: Vec<ScoreBracket> = table
            .iter()
            .map(|&(upper_m, points)| ScoreBracket {
                upper_m: Some(upper_m),
                points,
            })
            .collect();
        brackets.push(ScoreBracket {
            upper_m: None,
            points: 0,
        });
        Self {
            brackets,
            max_points_per_gcp: 20,
        }
    }
}

impl ScoreBrackets {
    pub fn validate(&self) -> Result<(), EvalError> {
        let ok_shape = self.brackets.len() >= 2
            && self.brackets[..self.brackets.len() - 1]
                .iter()
                .all(|b| b.upper_m.is_some())
            && matches!(
                self.brackets.last(),
                Some(ScoreBracket {
                    upper_m: None,
                    points: 0
                })
            );
        if !ok_shape {
            return Err(EvalError::InvalidBrackets(
                "last bracket must be open-ended with 0 points".into(),
            ));
        }
        let bounds: Vec<f64> = self
            .brackets
            .iter()
            .filter_map(|b| b.upper_m)
            .collect();
        if bounds.windows(2).any(|w| !(w[1] > w[0])) || bounds.iter().any(|b| *b <= 0.0) {
            return Err(EvalError::InvalidBrackets(
                "bounds must be positive and strictly increasing".into(),
            ));
        }
        let points: Vec<u32> = self.brackets.iter().map(|b| b.points).collect();
        if points.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(EvalError::InvalidBrackets(
                "points must be strictly decreasing".into(),
            ));
        }
        if points[0] != self.max_points_per_gcp {
            return Err(EvalError::InvalidBrackets(
                "first bracket must award max_points_per_gcp".into(),
            ));
        }
        Ok(())
    }
}

/// Bracket lookup for one error magnitude.
pub fn score_error(error_m: f64, brackets: &ScoreBrackets) -> u32 {
    debug_assert!(error_m >= 0.0);
    for b in &brackets.brackets {
        match b.upper_m {
            Some(upper) if error_m < upper => return b.points,
            Some(_) => continue,
            None => return b.points,
        }
    }
    0
}

/// Normalized sequence score `S = (Σ s_i / (max · N)) × multiplier`.
///
/// Uncovered GCPs must already be present as zero entries. The multiplier
/// is 100 for standard sites, 200 for the double-score site.
pub fn sequence_score(
    scores: &[u32],
    max_points_per_gcp: u32,
    multiplier: u32,
) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptySequence);
    }
    let total: u64 = scores.iter().map(|&s| s as u64).sum();
    let denom = (max_points_per_gcp as u64 * scores.len() as u64) as f64;
    Ok(total as f64 / denom * multiplier as f64)
}
