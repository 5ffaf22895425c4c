//! Kullback-Leibler and skew divergences over discrete distributions.

use super::AffinityError;

/// `KLD(q || r) = sum_y q(y) (ln q(y) - ln r(y))`. Bins with `q(y) = 0`
/// contribute nothing; `r(y) = 0` where `q(y) > 0` is undefined.
pub fn kl_divergence(q: &[f64], r: &[f64]) -> Result<f64, AffinityError> {
    if q.len() != r.len() {
        return Err(AffinityError::LengthMismatch(q.len(), r.len()));
    }
    let mut sum = 0.0;
    for (bin, (&qy, &ry)) in q.iter().zip(r).enumerate() {
        if qy > 0.0 {
            if ry <= 0.0 {
                return Err(AffinityError::UndefinedDivergence { bin });
            }
            sum += kl_term(qy, ry);
        }
    }
    Ok(sum.max(0.0))
}

/// `SD_alpha(q, r) = KLD(r || alpha q + (1 - alpha) r)`.
///
/// Finite for every `alpha < 1`. `alpha = 1` reduces to `KLD(r || q)` and may
/// be undefined.
pub fn skew_divergence(q: &[f64], r: &[f64], alpha: f64) -> Result<f64, AffinityError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(AffinityError::InvalidAlpha(alpha));
    }
    if q.len() != r.len() {
        return Err(AffinityError::LengthMismatch(q.len(), r.len()));
    }
    let mut sum = 0.0;
    for (bin, (&qy, &ry)) in q.iter().zip(r).enumerate() {
        if ry > 0.0 {
            let mix = alpha * qy + (1.0 - alpha) * ry;
            if mix <= 0.0 {
                return Err(AffinityError::UndefinedDivergence { bin });
            }
            sum += kl_term(ry, mix);
        }
    }
    Ok(sum.max(0.0))
}

/// One summand `p (ln p - ln m)`; shared by the direct and tabulated paths so
/// both produce bit-identical terms.
#[inline]
pub(crate) fn kl_term(p: f64, m: f64) -> f64 {
    p * (p.ln() - m.ln())
}

/// `SD_alpha` summand for window mass `r` against seed mass `q`.
#[inline]
pub(crate) fn skew_term(q: f64, r: f64, alpha: f64) -> f64 {
    if r > 0.0 {
        kl_term(r, alpha * q + (1.0 - alpha) * r)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn distribution(raw: &[f64]) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    }

    #[test]
    fn closed_forms() {
        assert!((kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - LN_2).abs() < 1e-12);
        let sd = skew_divergence(&[1.0, 0.0], &[0.0, 1.0], 0.99).unwrap();
        assert!((sd - 100f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_reference_mass_is_undefined() {
        assert!(matches!(
            kl_divergence(&[1.0, 0.0], &[0.0, 1.0]),
            Err(AffinityError::UndefinedDivergence { bin: 0 })
        ));
        // alpha = 1 collapses to KLD(r || q)
        assert!(matches!(
            skew_divergence(&[1.0, 0.0], &[0.0, 1.0], 1.0),
            Err(AffinityError::UndefinedDivergence { bin: 1 })
        ));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(skew_divergence(&[1.0], &[1.0], 1.5), Err(AffinityError::InvalidAlpha(_))));
        assert!(matches!(kl_divergence(&[1.0], &[0.5, 0.5]), Err(AffinityError::LengthMismatch(1, 2))));
    }

    #[test]
    fn skew_divergence_is_asymmetric() {
        let q = [0.7, 0.2, 0.1];
        let r = [0.1, 0.1, 0.8];
        let a = skew_divergence(&q, &r, 0.9).unwrap();
        let b = skew_divergence(&r, &q, 0.9).unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    proptest! {
        #[test]
        fn kl_matches_termwise_oracle(
            q in prop::collection::vec(1e-3f64..1.0, 8),
            r in prop::collection::vec(1e-3f64..1.0, 8),
        ) {
            let (q, r) = (distribution(&q), distribution(&r));
            let oracle: f64 = (0..8).map(|i| q[i] * (q[i] / r[i]).ln()).sum();
            prop_assert!((kl_divergence(&q, &r).unwrap() - oracle.max(0.0)).abs() < 1e-12);
        }

        #[test]
        fn skew_divergence_properties(
            q in prop::collection::vec(0.0f64..1.0, 16),
            r in prop::collection::vec(0.0f64..1.0, 16),
            alpha in 0.0f64..0.999,
        ) {
            prop_assume!(q.iter().sum::<f64>() > 0.0 && r.iter().sum::<f64>() > 0.0);
            let (q, r) = (distribution(&q), distribution(&r));
            let sd = skew_divergence(&q, &r, alpha).unwrap();
            prop_assert!(sd.is_finite() && sd >= 0.0);
            prop_assert!(skew_divergence(&q, &q, alpha).unwrap().abs() < 1e-12);
            prop_assert!(skew_divergence(&q, &r, 0.0).unwrap().abs() < 1e-12);
        }
    }
}
