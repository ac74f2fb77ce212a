//! Softmax cross-entropy over cluster scores.
//!
//! Labels are binary relevance vectors over clusters. The top-1 loss needs
//! exactly one relevant cluster; the top-k loss turns a multi-hot label
//! into target weights `(2^b - gamma) / sum(2^b - gamma)` with
//! `gamma in [0, 1]`.

use crate::error::{Error, Result};

fn max_of(s: &[f64]) -> f64 {
    s.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Max-shifted softmax.
pub fn softmax(s: &[f64]) -> Vec<f64> {
    let m = max_of(s);
    let exps: Vec<f64> = s.iter().map(|&v| (v - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

pub fn log_softmax(s: &[f64]) -> Vec<f64> {
    let m = max_of(s);
    let lse = s.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
    s.iter().map(|&v| v - m - lse).collect()
}

fn one_hot_index(b: &[bool]) -> Result<usize> {
    let mut hot = b.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i);
    match (hot.next(), hot.next()) {
        (Some(i), None) => Ok(i),
        (None, _) => Err(Error::InvalidLabel("label has no relevant cluster".into())),
        (Some(_), Some(_)) => Err(Error::InvalidLabel(format!(
            "top-1 label must be one-hot, found {} relevant clusters",
            b.iter().filter(|&&x| x).count()
        ))),
    }
}

fn check_len(scores: usize, labels: usize) -> Result<()> {
    if scores != labels {
        return Err(Error::dim(scores, labels));
    }
    Ok(())
}

/// `-log softmax(s)[j]` for the single relevant cluster `j`.
pub fn ce_loss(s: &[f64], b: &[bool]) -> Result<f64> {
    check_len(s.len(), b.len())?;
    let j = one_hot_index(b)?;
    Ok(-log_softmax(s)[j])
}

/// Mean of [`ce_loss`] over a batch.
pub fn ce_loss_mean<S: AsRef<[f64]>, B: AsRef<[bool]>>(scores: &[S], labels: &[B]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidParam("empty batch".into()));
    }
    if scores.len() != labels.len() {
        return Err(Error::InvalidParam(format!(
            "{} score rows for {} label rows",
            scores.len(),
            labels.len()
        )));
    }
    let mut total = 0.0;
    for (s, b) in scores.iter().zip(labels) {
        total += ce_loss(s.as_ref(), b.as_ref())?;
    }
    Ok(total / scores.len() as f64)
}

/// Target distribution `(2^b_j - gamma_j) / sum_z (2^b_z - gamma_z)`.
pub fn topk_weights(b: &[bool], gamma: &[f64]) -> Result<Vec<f64>> {
    check_len(b.len(), gamma.len())?;
    if !b.iter().any(|&x| x) {
        return Err(Error::InvalidLabel("label has no relevant cluster".into()));
    }
    if let Some(g) = gamma.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::InvalidParam(format!("gamma {g} outside [0, 1]")));
    }
    let raw: Vec<f64> = b
        .iter()
        .zip(gamma)
        .map(|(&bit, &g)| if bit { 2.0 - g } else { 1.0 - g })
        .collect();
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|r| r / z).collect())
}

/// `-sum_j w_j log softmax(s)_j`.
pub fn weighted_ce(s: &[f64], w: &[f64]) -> f64 {
    -log_softmax(s)
        .iter()
        .zip(w)
        .map(|(l, w)| w * l)
        .sum::<f64>()
}

/// Top-k generalization of the cross-entropy loss, averaged over the batch.
pub fn topk_ce_loss<S, B, G>(scores: &[S], labels: &[B], gamma: &[G]) -> Result<f64>
where
    S: AsRef<[f64]>,
    B: AsRef<[bool]>,
    G: AsRef<[f64]>,
{
    if scores.is_empty() {
        return Err(Error::InvalidParam("empty batch".into()));
    }
    if scores.len() != labels.len() || scores.len() != gamma.len() {
        return Err(Error::InvalidParam("batch shapes differ".into()));
    }
    let mut total = 0.0;
    for ((s, b), g) in scores.iter().zip(labels).zip(gamma) {
        let s = s.as_ref();
        check_len(s.len(), b.as_ref().len())?;
        total += weighted_ce(s, &topk_weights(b.as_ref(), g.as_ref())?);
    }
    Ok(total / scores.len() as f64)
}

/// Gradient of [`weighted_ce`] with respect to the scores: `softmax(s) - w`.
pub fn grad_scores(s: &[f64], w: &[f64]) -> Vec<f64> {
    softmax(s).into_iter().zip(w).map(|(p, w)| p - w).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[2.5; 4]), vec![0.25; 4]);
        let p = softmax(&[1f64.ln(), 3f64.ln()]);
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
        let p = softmax(&[1000.0, 0.0]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] < 1e-300);
    }

    #[test]
    fn ce_examples() {
        let l = ce_loss(&[0.3; 4], &[false, false, true, false]).unwrap();
        assert!((l - 4f64.ln()).abs() < 1e-12);
        let l = ce_loss(&[2.0, 0.0], &[true, false]).unwrap();
        assert!((l - (1.0 + (-2f64).exp()).ln()).abs() < 1e-15);
        assert!((l - 0.126928).abs() < 1e-6);
    }

    #[test]
    fn ce_rejects_bad_labels() {
        assert!(matches!(
            ce_loss(&[0.0, 0.0], &[true, true]),
            Err(Error::InvalidLabel(_))
        ));
        assert!(matches!(
            ce_loss(&[0.0, 0.0], &[false, false]),
            Err(Error::InvalidLabel(_))
        ));
        assert!(ce_loss(&[0.0, 0.0], &[true]).is_err());
    }

    #[test]
    fn mean_examples() {
        let s = vec![vec![1.0, 2.0, 0.5]];
        let b = vec![vec![false, true, false]];
        assert_eq!(
            ce_loss_mean(&s, &b).unwrap(),
            ce_loss(&s[0], &b[0]).unwrap()
        );
        let s2 = vec![s[0].clone(), s[0].clone()];
        let b2 = vec![b[0].clone(), b[0].clone()];
        assert_eq!(
            ce_loss_mean(&s2, &b2).unwrap(),
            ce_loss(&s[0], &b[0]).unwrap()
        );
        let empty: Vec<Vec<f64>> = vec![];
        let none: Vec<Vec<bool>> = vec![];
        assert!(matches!(
            ce_loss_mean(&empty, &none),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn topk_symmetric_pair() {
        let l = topk_ce_loss(&[vec![0.0, 0.0]], &[vec![true, true]], &[vec![0.0, 0.0]]).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
        let w = topk_weights(&[true, true], &[0.0, 0.0]).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn topk_with_unit_gamma_is_plain_ce() {
        let s = vec![vec![0.1, -2.0, 3.0], vec![1.0, 1.0, 0.0]];
        let b = vec![vec![false, true, false], vec![true, false, false]];
        let g = vec![vec![1.0; 3]; 2];
        assert_eq!(
            topk_ce_loss(&s, &b, &g).unwrap(),
            ce_loss_mean(&s, &b).unwrap()
        );
    }

    #[test]
    fn topk_rejects_out_of_range_gamma() {
        assert!(topk_weights(&[true, false], &[0.5, 1.5]).is_err());
        assert!(topk_weights(&[false, false], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn gradient_examples() {
        let s = [0.2, -0.4, 1.0];
        assert!(grad_scores(&s, &softmax(&s))
            .iter()
            .all(|g| g.abs() < 1e-15));
        assert_eq!(grad_scores(&[0.0, 0.0], &[1.0, 0.0]), vec![-0.5, 0.5]);
    }
}
