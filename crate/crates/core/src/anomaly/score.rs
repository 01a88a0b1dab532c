use crate::error::Result;
use crate::sdr::Sdr;

/// Fraction of the current active code that was not predicted on the
/// previous step: `1 - |predicted ∩ actual| / |actual|`.
///
/// An empty `actual` carries no evidence of surprise and scores 0.
pub fn raw_score(predicted_prev: &Sdr, actual: &Sdr) -> Result<f64> {
    let hits = predicted_prev.overlap(actual)?;
    if actual.is_empty() {
        log::debug!("raw score on an empty code, reporting 0");
        return Ok(0.0);
    }
    Ok(1.0 - hits as f64 / actual.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sdr(w: u32, idx: impl IntoIterator<Item = u32>) -> Sdr {
        Sdr::from_indices(w, idx).unwrap()
    }

    #[test]
    fn perfect_and_missed_predictions() {
        let actual = sdr(100, 0..40);
        assert_eq!(raw_score(&sdr(100, 0..60), &actual).unwrap(), 0.0);
        assert_eq!(raw_score(&sdr(100, 60..100), &actual).unwrap(), 1.0);
        assert_eq!(raw_score(&Sdr::empty(100), &actual).unwrap(), 1.0);
    }

    #[test]
    fn partial_prediction() {
        let actual = sdr(100, 0..40);
        let predicted = sdr(100, (0..30).chain(50..70));
        assert_eq!(raw_score(&predicted, &actual).unwrap(), 0.25);
    }

    #[test]
    fn empty_actual_scores_zero() {
        assert_eq!(raw_score(&sdr(10, [1, 2]), &Sdr::empty(10)).unwrap(), 0.0);
    }

    #[test]
    fn width_mismatch() {
        assert!(raw_score(&Sdr::empty(10), &Sdr::empty(11)).is_err());
    }
}
