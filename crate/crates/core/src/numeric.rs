//! Stabilized log-sum-exp and softmax on plain slices.

/// `log Σ exp(s_k)` with max subtraction. The maximal term is split off and
/// the rest goes through `ln_1p`, so tiny contributions are not rounded away.
/// Returns `-inf` for an empty slice.
pub fn log_sum_exp(scores: &[f64]) -> f64 {
    let Some((arg, max)) = argmax(scores) else {
        return f64::NEG_INFINITY;
    };
    if !max.is_finite() {
        return max;
    }
    let rest: f64 = scores
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != arg)
        .map(|(_, s)| (s - max).exp())
        .sum();
    max + rest.ln_1p()
}

/// Index and value of the first maximal entry.
pub(crate) fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best
}

/// Softmax weights of `scores`, written into `out`.
pub fn softmax_into(scores: &[f64], out: &mut [f64]) {
    debug_assert_eq!(scores.len(), out.len());
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; scores.len()];
    softmax_into(scores, &mut out);
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_of_large_scores_does_not_overflow() {
        let v = log_sum_exp(&[1.0e8, 1.0e8]);
        assert!((v - (1.0e8 + 2f64.ln())).abs() < 1e-6);
        let v = log_sum_exp(&[-1.0e8, -1.0e8 - 1.0]);
        assert!(v.is_finite());
    }

    #[test]
    fn softmax_sums_to_one() {
        let w = softmax(&[3.0, -700.0, 800.0, 0.0]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w[2] > 0.999);
    }
}
