//! Cross-entropy and the composite mixed-label losses.
//!
//! The face-mix loss weights the supplier label by `gamma / W` and the
//! receiver label by `1 - gamma / W`, where gamma is the number of
//! components taken from the supplier and W is a scalar weighting factor.
//! The +RS variant adds plain cross-entropy on the unmodified supplier and
//! receiver images. Weighting uses the component count, not component
//! area.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clamp applied inside the logarithm so zero probabilities stay finite.
pub const LOG_CLAMP_EPS: f64 = 1e-12;

fn validate_distribution(kind: &str, values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::InvalidDistribution(format!(
            "{kind} needs at least 2 classes, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{kind} entries must be finite and non-negative"
        )));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "{kind} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// A classifier output: K non-negative reals summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_distribution("probability vector", &values)?;
        Ok(Self(values))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest entry; ties break toward the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate().skip(1) {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// A target label: one-hot or soft, K non-negative reals summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution(Vec<f64>);

impl LabelDistribution {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_distribution("label distribution", &values)?;
        Ok(Self(values))
    }

    pub fn one_hot(class: usize, k: usize) -> Result<Self> {
        if class >= k {
            return Err(Error::InvalidDistribution(format!(
                "class {class} out of range for {k} classes"
            )));
        }
        let mut values = vec![0.0; k];
        values[class] = 1.0;
        Self::new(values)
    }

    /// `lambda * a + (1 - lambda) * b`.
    pub fn blend(lambda: f64, a: &LabelDistribution, b: &LabelDistribution) -> Result<Self> {
        if a.0.len() != b.0.len() {
            return Err(Error::LengthMismatch {
                a: a.0.len(),
                b: b.0.len(),
            });
        }
        if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidConfig(format!(
                "blend weight must lie in [0, 1], got {lambda}"
            )));
        }
        let values = a
            .0
            .iter()
            .zip(&b.0)
            .map(|(&x, &y)| lambda * x + (1.0 - lambda) * y)
            .collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Gamma (component count) and W (weighting factor) for the mix loss.
///
/// The strict constructor requires `W > 6` so both weights stay in (0, 1)
/// for every legal gamma; [`MixWeights::relaxed`] only requires `W` to
/// exceed the sample's own gamma, for experimentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixWeights {
    gamma: u8,
    w: f64,
}

impl MixWeights {
    pub fn new(gamma: u8, w: f64) -> Result<Self> {
        Self::check_gamma(gamma)?;
        if !w.is_finite() || w <= 6.0 {
            return Err(Error::InvalidWeights { w, bound: 6.0 });
        }
        Ok(Self { gamma, w })
    }

    /// Permit `W` in `(gamma, 6]` for a specific sample.
    pub fn relaxed(gamma: u8, w: f64) -> Result<Self> {
        Self::check_gamma(gamma)?;
        if !w.is_finite() || w <= f64::from(gamma) {
            return Err(Error::InvalidWeights {
                w,
                bound: f64::from(gamma),
            });
        }
        Ok(Self { gamma, w })
    }

    fn check_gamma(gamma: u8) -> Result<()> {
        if !(1..=6).contains(&gamma) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be in 1..=6, got {gamma}"
            )));
        }
        Ok(())
    }

    pub fn gamma(&self) -> u8 {
        self.gamma
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Weight on the supplier label: `gamma / W`, in (0, 1).
    pub fn supplier_weight(&self) -> f64 {
        f64::from(self.gamma) / self.w
    }

    /// Weight on the receiver label: `1 - gamma / W`.
    pub fn receiver_weight(&self) -> f64 {
        1.0 - self.supplier_weight()
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { a, b });
    }
    Ok(())
}

/// `-sum_k y_k * ln(max(p_k, eps))`, always finite and non-negative.
pub fn cross_entropy(p: &ProbabilityVector, y: &LabelDistribution) -> Result<f64> {
    check_lengths(p.len(), y.len())?;
    let mut total = 0.0;
    for (&pk, &yk) in p.values().iter().zip(y.values()) {
        total -= yk * pk.max(LOG_CLAMP_EPS).ln();
    }
    Ok(total)
}

/// The mixed-face loss: `(gamma/W) * CE(p, y_supplier) + (1 - gamma/W) * CE(p, y_receiver)`.
pub fn facemixup_loss(
    p_mixed: &ProbabilityVector,
    y_supplier: &LabelDistribution,
    y_receiver: &LabelDistribution,
    mw: MixWeights,
) -> Result<f64> {
    if y_supplier == y_receiver {
        return Err(Error::SameClassPair);
    }
    let supplier_term = cross_entropy(p_mixed, y_supplier)?;
    let receiver_term = cross_entropy(p_mixed, y_receiver)?;
    Ok(mw.supplier_weight() * supplier_term + mw.receiver_weight() * receiver_term)
}

/// The real-samples term: plain cross-entropy on both unmodified images.
pub fn rs_loss(
    p_i: &ProbabilityVector,
    y_i: &LabelDistribution,
    p_j: &ProbabilityVector,
    y_j: &LabelDistribution,
) -> Result<f64> {
    Ok(cross_entropy(p_i, y_i)? + cross_entropy(p_j, y_j)?)
}

/// Mixed-face loss plus the real-samples term on the supplier and receiver.
#[allow(clippy::too_many_arguments)]
pub fn facemixup_rs_loss(
    p_mixed: &ProbabilityVector,
    y_supplier: &LabelDistribution,
    y_receiver: &LabelDistribution,
    mw: MixWeights,
    p_supplier_real: &ProbabilityVector,
    p_receiver_real: &ProbabilityVector,
) -> Result<f64> {
    let mixed = facemixup_loss(p_mixed, y_supplier, y_receiver, mw)?;
    let real = rs_loss(p_supplier_real, y_supplier, p_receiver_real, y_receiver)?;
    Ok(mixed + real)
}

/// Interpolated cross-entropy: `lambda * CE(p, y_a) + (1 - lambda) * CE(p, y_b)`.
pub fn mixup_loss(
    p_mixed: &ProbabilityVector,
    y_a: &LabelDistribution,
    y_b: &LabelDistribution,
    lambda: f64,
) -> Result<f64> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let a_term = cross_entropy(p_mixed, y_a)?;
    let b_term = cross_entropy(p_mixed, y_b)?;
    Ok(lambda * a_term + (1.0 - lambda) * b_term)
}

/// Mixup loss plus plain cross-entropy on both unmodified images.
pub fn mixaugment_loss(
    p_mixed: &ProbabilityVector,
    y_a: &LabelDistribution,
    y_b: &LabelDistribution,
    lambda: f64,
    p_a: &ProbabilityVector,
    p_b: &ProbabilityVector,
) -> Result<f64> {
    let mixed = mixup_loss(p_mixed, y_a, y_b, lambda)?;
    Ok(mixed + cross_entropy(p_a, y_a)? + cross_entropy(p_b, y_b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(values: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(values.to_vec()).unwrap()
    }

    fn ld(values: &[f64]) -> LabelDistribution {
        LabelDistribution::new(values.to_vec()).unwrap()
    }

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn cross_entropy_of_matching_one_hots_is_zero() {
        let p = pv(&[0.0, 1.0, 0.0]);
        let y = ld(&[0.0, 1.0, 0.0]);
        assert_eq!(cross_entropy(&p, &y).unwrap(), 0.0);
    }

    #[test]
    fn cross_entropy_of_uniform_prediction_is_log_k() {
        let p = ProbabilityVector::uniform(4).unwrap();
        let y = LabelDistribution::one_hot(2, 4).unwrap();
        let ce = cross_entropy(&p, &y).unwrap();
        assert!((ce - 4f64.ln()).abs() < 1e-12, "{ce}");
    }

    #[test]
    fn cross_entropy_hand_computed_soft_target() {
        let p = pv(&[0.25, 0.75]);
        let y = ld(&[0.5, 0.5]);
        let expected = -0.5 * 0.25f64.ln() - 0.5 * 0.75f64.ln();
        assert!((expected - 0.8370).abs() < 5e-5);
        assert!((cross_entropy(&p, &y).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_clamps_zero_probabilities() {
        let p = pv(&[0.0, 1.0]);
        let y = ld(&[1.0, 0.0]);
        let ce = cross_entropy(&p, &y).unwrap();
        assert!(ce.is_finite());
        assert!((ce - (-LOG_CLAMP_EPS.ln())).abs() < 1e-9);
    }

    #[test]
    fn cross_entropy_rejects_length_mismatch() {
        let p = pv(&[0.5, 0.5]);
        let y = ld(&[0.4, 0.3, 0.3]);
        assert!(matches!(
            cross_entropy(&p, &y),
            Err(Error::LengthMismatch { a: 2, b: 3 })
        ));
    }

    #[test]
    fn facemixup_loss_hand_computed_case() {
        // Uniform binary prediction, gamma=1, W=2: both terms are ln 2.
        let p = pv(&[0.5, 0.5]);
        let ys = ld(&[1.0, 0.0]);
        let yr = ld(&[0.0, 1.0]);
        let mw = MixWeights::relaxed(1, 2.0).unwrap();
        let loss = facemixup_loss(&p, &ys, &yr, mw).unwrap();
        assert!((loss - LN2).abs() < 1e-12);
    }

    #[test]
    fn facemixup_loss_collapses_to_receiver_for_huge_w() {
        let p = pv(&[0.7, 0.2, 0.1]);
        let ys = LabelDistribution::one_hot(0, 3).unwrap();
        let yr = LabelDistribution::one_hot(2, 3).unwrap();
        let mw = MixWeights::new(1, 1e6).unwrap();
        let loss = facemixup_loss(&p, &ys, &yr, mw).unwrap();
        let receiver_ce = cross_entropy(&p, &yr).unwrap();
        assert!((loss - receiver_ce).abs() < 1e-5);
    }

    #[test]
    fn mix_weights_match_reported_configuration() {
        // W = 7.9 with all six components moved.
        let mw = MixWeights::new(6, 7.9).unwrap();
        assert!((mw.supplier_weight() - 0.7595).abs() < 1e-4);
        assert!((mw.receiver_weight() - 0.2405).abs() < 1e-4);
        assert!(MixWeights::new(6, 6.1).is_ok());
    }

    #[test]
    fn mix_weights_validation_bounds() {
        assert!(matches!(
            MixWeights::new(6, 5.9),
            Err(Error::InvalidWeights { .. })
        ));
        assert!(MixWeights::relaxed(3, 5.9).is_ok());
        assert!(matches!(
            MixWeights::relaxed(6, 5.9),
            Err(Error::InvalidWeights { .. })
        ));
        assert!(MixWeights::new(0, 7.9).is_err());
        assert!(MixWeights::new(7, 7.9).is_err());
    }

    #[test]
    fn facemixup_rejects_identical_labels() {
        let p = pv(&[0.5, 0.5]);
        let y = ld(&[1.0, 0.0]);
        let mw = MixWeights::new(1, 7.9).unwrap();
        assert!(matches!(
            facemixup_loss(&p, &y, &y, mw),
            Err(Error::SameClassPair)
        ));
    }

    #[test]
    fn rs_loss_cases() {
        let perfect0 = pv(&[1.0, 0.0]);
        let perfect1 = pv(&[0.0, 1.0]);
        let uniform = ProbabilityVector::uniform(2).unwrap();
        let y0 = ld(&[1.0, 0.0]);
        let y1 = ld(&[0.0, 1.0]);
        assert_eq!(rs_loss(&perfect0, &y0, &perfect1, &y1).unwrap(), 0.0);
        let both_uniform = rs_loss(&uniform, &y0, &uniform, &y1).unwrap();
        assert!((both_uniform - 2.0 * LN2).abs() < 1e-12);
        let one_each = rs_loss(&perfect0, &y0, &uniform, &y1).unwrap();
        assert!((one_each - LN2).abs() < 1e-12);
    }

    #[test]
    fn facemixup_rs_reduces_to_facemixup_when_real_terms_vanish() {
        let p = pv(&[0.3, 0.7]);
        let ys = ld(&[1.0, 0.0]);
        let yr = ld(&[0.0, 1.0]);
        let mw = MixWeights::new(2, 7.9).unwrap();
        let perfect_s = pv(&[1.0, 0.0]);
        let perfect_r = pv(&[0.0, 1.0]);
        let with_rs = facemixup_rs_loss(&p, &ys, &yr, mw, &perfect_s, &perfect_r).unwrap();
        let without = facemixup_loss(&p, &ys, &yr, mw).unwrap();
        assert_eq!(with_rs, without);
    }

    #[test]
    fn facemixup_rs_all_uniform_binary_is_three_ln_two() {
        let u = ProbabilityVector::uniform(2).unwrap();
        let ys = ld(&[1.0, 0.0]);
        let yr = ld(&[0.0, 1.0]);
        let mw = MixWeights::relaxed(1, 2.0).unwrap();
        let loss = facemixup_rs_loss(&u, &ys, &yr, mw, &u, &u).unwrap();
        assert!((loss - 3.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn facemixup_rs_is_sum_of_parts_under_finite_differences() {
        // Numerical differentiation oracle: d(sum)/dt matches the sum of
        // the parts' derivatives along a parametrized probability path.
        let ys = ld(&[1.0, 0.0]);
        let yr = ld(&[0.0, 1.0]);
        let mw = MixWeights::new(2, 7.9).unwrap();
        let path = |t: f64| {
            (
                pv(&[0.3 + t, 0.7 - t]),
                pv(&[0.6 - t, 0.4 + t]),
                pv(&[0.2 + t, 0.8 - t]),
            )
        };
        let h = 1e-6;
        let eval_sum = |t: f64| {
            let (pm, ps, pr) = path(t);
            facemixup_rs_loss(&pm, &ys, &yr, mw, &ps, &pr).unwrap()
        };
        let eval_parts = |t: f64| {
            let (pm, ps, pr) = path(t);
            facemixup_loss(&pm, &ys, &yr, mw).unwrap() + rs_loss(&ps, &ys, &pr, &yr).unwrap()
        };
        let d_sum = (eval_sum(h) - eval_sum(-h)) / (2.0 * h);
        let d_parts = (eval_parts(h) - eval_parts(-h)) / (2.0 * h);
        assert!((d_sum - d_parts).abs() < 1e-9, "{d_sum} vs {d_parts}");
    }

    #[test]
    fn mixup_loss_endpoint_and_midpoint() {
        let p = pv(&[0.8, 0.2]);
        let ya = ld(&[1.0, 0.0]);
        let yb = ld(&[0.0, 1.0]);
        let at1 = mixup_loss(&p, &ya, &yb, 1.0).unwrap();
        assert_eq!(at1, cross_entropy(&p, &ya).unwrap());
        let uniform = ProbabilityVector::uniform(2).unwrap();
        let mid = mixup_loss(&uniform, &ya, &yb, 0.5).unwrap();
        assert!((mid - LN2).abs() < 1e-12);
    }

    #[test]
    fn mixaugment_loss_cases() {
        let u = ProbabilityVector::uniform(2).unwrap();
        let ya = ld(&[1.0, 0.0]);
        let yb = ld(&[0.0, 1.0]);
        let perfect_a = pv(&[1.0, 0.0]);
        let perfect_b = pv(&[0.0, 1.0]);
        let reduced = mixaugment_loss(&u, &ya, &yb, 0.4, &perfect_a, &perfect_b).unwrap();
        assert_eq!(reduced, mixup_loss(&u, &ya, &yb, 0.4).unwrap());
        let all_uniform = mixaugment_loss(&u, &ya, &yb, 0.3, &u, &u).unwrap();
        assert!((all_uniform - 3.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn facemixup_loss_is_linear_in_gamma() {
        let p = pv(&[0.15, 0.35, 0.5]);
        let ys = LabelDistribution::one_hot(0, 3).unwrap();
        let yr = LabelDistribution::one_hot(2, 3).unwrap();
        let ce_s = cross_entropy(&p, &ys).unwrap();
        let ce_r = cross_entropy(&p, &yr).unwrap();
        let w = 7.9;
        let mut prev = None;
        for gamma in 1..=6u8 {
            let loss = facemixup_loss(&p, &ys, &yr, MixWeights::new(gamma, w).unwrap()).unwrap();
            let expected = ce_r + f64::from(gamma) / w * (ce_s - ce_r);
            assert!((loss - expected).abs() < 1e-12);
            if let Some(prev) = prev {
                // ce_s > ce_r here, so the loss climbs toward the supplier CE.
                assert!(loss > prev);
            }
            prev = Some(loss);
        }
    }
}
