//! Numerically stable softmax and log-sum-exp.

use crate::{Error, Result};

/// Temperature-scaled softmax with max-subtraction.
///
/// Divides the logits by `temperature` first, then subtracts the maximum
/// before exponentiating, so inputs with magnitude up to 1e6 (and small
/// temperatures) cannot overflow. The argmax of the output always matches
/// the argmax of the input.
pub fn softmax(v: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return Err(Error::Parameter(format!("softmax: temperature must be > 0, got {temperature}")));
    }
    if v.is_empty() {
        return Err(Error::Parameter("softmax: input must be non-empty".into()));
    }
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::Numerical("softmax: non-finite input".into()));
    }
    let scaled: Vec<f64> = v.iter().map(|x| x / temperature).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = scaled.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for x in &mut out {
        *x /= sum;
    }
    Ok(out)
}

/// log(sum(exp(v))) with max-subtraction; exact on singleton input.
pub fn logsumexp(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Parameter("logsumexp: input must be non-empty".into()));
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if v.len() == 1 {
        return Ok(v[0]);
    }
    let sum: f64 = v.iter().map(|x| (x - max).exp()).sum();
    Ok(max + sum.ln())
}

/// Index of the largest entry; first occurrence wins on exact ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_symmetry() {
        let p = softmax(&[1.0, 1.0, 1.0], 1.0).unwrap();
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_analytic_two_to_one() {
        // e^{ln 2} = 2, so the weights are 2/3 and 1/3.
        let p = softmax(&[2.0f64.ln(), 0.0], 1.0).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_low_temperature_is_argmax() {
        let p = softmax(&[3.0, 1.0, 0.0], 0.001).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-9);
        assert!(p[1] < 1e-9 && p[2] < 1e-9);
    }

    #[test]
    fn softmax_rejects_bad_temperature() {
        assert!(softmax(&[1.0], 0.0).is_err());
        assert!(softmax(&[1.0], -1.0).is_err());
    }

    #[test]
    fn softmax_huge_magnitudes() {
        let p = softmax(&[1e6, -1e6, 0.0], 1.0).unwrap();
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| *x >= 0.0));
        assert_eq!(argmax(&p), 0);
    }

    #[test]
    fn logsumexp_analytic() {
        assert!((logsumexp(&[0.0, 0.0]).unwrap() - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn logsumexp_no_overflow() {
        let v = logsumexp(&[1000.0, 1000.0]).unwrap();
        assert!((v - (1000.0 + 2.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn logsumexp_singleton_identity() {
        for x in [-3.5, 0.0, 123.456, -1e300] {
            assert_eq!(logsumexp(&[x]).unwrap(), x);
        }
    }

    #[test]
    fn logsumexp_empty_rejected() {
        assert!(logsumexp(&[]).is_err());
    }
}
