use super::EvalError;

/// Area under the ROC curve in its Mann-Whitney form: the fraction of
/// (positive, negative) pairs where the positive scores higher, with ties
/// counted as half.
pub fn roc_auc(scored: &[(f64, bool)]) -> Result<f64, EvalError> {
    if scored.iter().any(|(s, _)| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore);
    }
    let positives = scored.iter().filter(|(_, l)| *l).count() as u64;
    let negatives = scored.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::OneClass { positives: positives as usize, negatives: negatives as usize });
    }

    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Integer counts keep the result exact: twice the numerator is
    // 2 * concordant + tied.
    let mut negatives_below = 0u64;
    let mut twice_numerator = 0u64;
    let mut i = 0;
    while i < sorted.len() {
        let score = sorted[i].0;
        let (mut gp, mut gn) = (0u64, 0u64);
        while i < sorted.len() && sorted[i].0 == score {
            if sorted[i].1 { gp += 1 } else { gn += 1 }
            i += 1;
        }
        twice_numerator += 2 * gp * negatives_below + gp * gn;
        negatives_below += gn;
    }
    Ok(twice_numerator as f64 / 2.0 / (positives * negatives) as f64)
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EvalError::TooFewPairs(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 || !(sxx.is_finite() && syy.is_finite()) {
        return Err(EvalError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(scored: &[(f64, bool)]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(sp, lp) in scored {
            for &(sn, ln) in scored {
                if lp && !ln {
                    den += 1.0;
                    if sp > sn {
                        num += 1.0;
                    } else if sp == sn {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        let perfect = [(0.9, true), (0.8, true), (0.2, false), (0.1, false)];
        assert_eq!(roc_auc(&perfect).unwrap(), 1.0);
        let mixed = [(0.9, true), (0.8, false), (0.7, true), (0.6, false)];
        assert_eq!(roc_auc(&mixed).unwrap(), 0.75);
        let tied = [(0.5, true), (0.5, false)];
        assert_eq!(roc_auc(&tied).unwrap(), 0.5);
    }

    #[test]
    fn auc_errors() {
        assert!(matches!(roc_auc(&[(0.1, true), (0.2, true)]), Err(EvalError::OneClass { .. })));
        assert!(matches!(roc_auc(&[]), Err(EvalError::OneClass { .. })));
        assert!(matches!(roc_auc(&[(f64::NAN, true), (0.2, false)]), Err(EvalError::NonFiniteScore)));
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &up).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &down).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(pearson(&[1.0, 2.0], &[3.0, 3.0]), Err(EvalError::ZeroVariance)));
        assert!(matches!(pearson(&[1.0], &[3.0]), Err(EvalError::TooFewPairs(1))));
        assert!(matches!(pearson(&[1.0, 2.0], &[3.0]), Err(EvalError::LengthMismatch(2, 1))));
    }

    proptest! {
        #[test]
        fn auc_matches_brute_force(
            pairs in proptest::collection::vec((0u8..20, any::<bool>()), 2..200)
        ) {
            let scored: Vec<(f64, bool)> = pairs.iter().map(|&(s, l)| (s as f64 / 10.0, l)).collect();
            prop_assume!(scored.iter().any(|p| p.1) && scored.iter().any(|p| !p.1));
            prop_assert_eq!(roc_auc(&scored).unwrap(), brute_auc(&scored));
        }

        #[test]
        fn auc_invariant_under_monotone_transform(
            pairs in proptest::collection::vec((-5.0f64..5.0, any::<bool>()), 2..100)
        ) {
            prop_assume!(pairs.iter().any(|p| p.1) && pairs.iter().any(|p| !p.1));
            let transformed: Vec<(f64, bool)> = pairs.iter().map(|&(s, l)| (s.exp() * 3.0 - 1.0, l)).collect();
            prop_assert_eq!(roc_auc(&pairs).unwrap(), roc_auc(&transformed).unwrap());
        }

        #[test]
        fn pearson_affine_invariant(
            xy in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..50),
            a in 0.1f64..10.0,
            b in -10.0f64..10.0,
        ) {
            let x: Vec<f64> = xy.iter().map(|p| p.0).collect();
            let y: Vec<f64> = xy.iter().map(|p| p.1).collect();
            if let Ok(r) = pearson(&x, &y) {
                let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                prop_assert!((pearson(&ax, &y).unwrap() - r).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }
    }
}
