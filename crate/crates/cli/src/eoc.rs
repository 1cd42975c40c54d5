//! Experimental order of convergence and the resolution-threshold proxies.

use helmholtz_hmm::{Error, Result};

/// EOC between consecutive refinement levels:
/// EOC_i = ln(e_i / e_{i+1}) / ln(h_i / h_{i+1}).
///
/// Mesh sizes must be strictly decreasing and errors positive.
pub fn compute_eoc(errors: &[(f64, f64)]) -> Result<Vec<f64>> {
    if errors.iter().any(|&(_, e)| e <= 0.0) {
        return Err(Error::NonPositiveError);
    }
    if errors.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(Error::NonMonotoneMesh);
    }
    Ok(errors
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect())
}

/// First level (index) at which the error has dropped below half of its
/// value on the coarsest level.
pub fn half_value_threshold(errors: &[f64]) -> Option<usize> {
    let first = *errors.first()?;
    errors.iter().position(|&e| e < 0.5 * first)
}

/// First level from which every subsequent consecutive EOC stays at or
/// above `min_rate` (the onset of steady decay).
pub fn decay_onset(errors: &[(f64, f64)], min_rate: f64) -> Result<Option<usize>> {
    let eoc = compute_eoc(errors)?;
    if eoc.is_empty() {
        return Ok(None);
    }
    let mut onset = eoc.len();
    for i in (0..eoc.len()).rev() {
        if eoc[i] >= min_rate {
            onset = i;
        } else {
            break;
        }
    }
    Ok((onset < eoc.len()).then_some(onset))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eoc_of_exact_orders() {
        // e = C h^p reproduces p to machine precision.
        for p in [1.0, 2.0] {
            let data: Vec<(f64, f64)> = (0..6)
                .map(|i| {
                    let h = 0.5f64.powi(i);
                    (h, 3.7 * h.powf(p))
                })
                .collect();
            for rate in compute_eoc(&data).unwrap() {
                assert!((rate - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eoc_matches_published_row() {
        // First two convergence-table entries at H ~ 1/8 and 1/12.
        let data = [(1.0 / 8.0, 11.7804630632), (1.0 / 12.0, 8.9454269415)];
        let eoc = compute_eoc(&data).unwrap();
        assert!((eoc[0] - 0.678973445).abs() < 1e-9, "eoc = {}", eoc[0]);
    }

    #[test]
    fn error_paths() {
        assert_eq!(
            compute_eoc(&[(0.5, 1.0), (0.25, 0.0)]).unwrap_err(),
            Error::NonPositiveError
        );
        assert_eq!(
            compute_eoc(&[(0.25, 1.0), (0.5, 0.5)]).unwrap_err(),
            Error::NonMonotoneMesh
        );
        assert!(compute_eoc(&[(0.5, 1.0)]).unwrap().is_empty());
    }

    #[test]
    fn thresholds() {
        let errors = [10.0, 9.0, 4.0, 2.0];
        assert_eq!(half_value_threshold(&errors), Some(2));
        assert_eq!(half_value_threshold(&[1.0, 0.9]), None);

        // Flat then decaying: onset where the rate first stays >= 0.5.
        let data = [(1.0, 10.0), (0.5, 9.5), (0.25, 5.0), (0.125, 2.5)];
        assert_eq!(decay_onset(&data, 0.5).unwrap(), Some(1));
        let all = [(1.0, 8.0), (0.5, 4.0), (0.25, 2.0)];
        assert_eq!(decay_onset(&all, 0.5).unwrap(), Some(0));
        let none = [(1.0, 8.0), (0.5, 8.0)];
        assert_eq!(decay_onset(&none, 0.5).unwrap(), None);
    }
}
