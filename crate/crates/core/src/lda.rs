//! Two-class linear discriminant analysis in closed form, plus a
//! monotone map from discriminant values to event probabilities.
//!
//! The weights solve `(S + eps*I) w = mu1 - mu0` where `S` is the pooled
//! within-class covariance (bias-corrected divisor `n0 + n1 - 2`) and
//! `eps` an optional ridge. The system is solved by a symmetric
//! positive-definite (Cholesky) factorization, so results are
//! deterministic and oracle-checkable. Calibration bins the training
//! discriminants into equal-count bins, pools adjacent monotonicity
//! violations, interpolates linearly between bin centers with flat
//! extrapolation, and finally rescales so the mean predicted probability
//! matches the training base rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::Dataset;

/// Monotone piecewise-linear map from discriminant value to probability.
///
/// Knots hold the pre-scale bin probabilities; prediction applies flat
/// extrapolation beyond the knot range, then the multiplicative scale,
/// then clipping to [0, 1], in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMap {
    /// `(discriminant_value, probability)` pairs, strictly increasing in
    /// the first component and nondecreasing in the second.
    pub knots: Vec<(f64, f64)>,
    /// Multiplier chosen so the mean predicted probability over the
    /// calibration set equals its positive fraction.
    pub scale: f64,
}

impl CalibrationMap {
    /// Interpolated pre-scale probability at a discriminant value.
    pub fn raw(&self, d: f64) -> f64 {
        interpolate(&self.knots, d)
    }

    /// Final probability: scaled and clipped interpolation.
    pub fn probability(&self, d: f64) -> f64 {
        (self.scale * self.raw(d)).clamp(0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.is_empty() {
            return Err(Error::Validation("calibration map has no knots".into()));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Validation(format!(
                "calibration scale {} must be positive and finite",
                self.scale
            )));
        }
        for w in self.knots.windows(2) {
            if w[0].0.partial_cmp(&w[1].0) != Some(std::cmp::Ordering::Less) {
                return Err(Error::Validation(format!(
                    "knot positions {} and {} are not strictly increasing",
                    w[0].0, w[1].0
                )));
            }
            if w[0].1 > w[1].1 {
                return Err(Error::Validation(format!(
                    "knot probabilities {} and {} are not nondecreasing",
                    w[0].1, w[1].1
                )));
            }
        }
        for &(d, p) in &self.knots {
            if !d.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!(
                    "knot ({d}, {p}) outside the valid range"
                )));
            }
        }
        Ok(())
    }
}

fn interpolate(knots: &[(f64, f64)], d: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if d <= first.0 {
        return first.1;
    }
    if d >= last.0 {
        return last.1;
    }
    // binary search for the bracketing pair
    let idx = knots.partition_point(|&(x, _)| x < d);
    let (x0, p0) = knots[idx - 1];
    let (x1, p1) = knots[idx];
    if d == x1 {
        return p1;
    }
    p0 + (d - x0) / (x1 - x0) * (p1 - p0)
}

/// Linear discriminant with optional probability calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub predictor_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Ridge added to the pooled covariance diagonal before solving.
    pub regularization: f64,
    pub calibration: Option<CalibrationMap>,
}

impl LdaModel {
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.predictor_names.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} predictor names",
                self.weights.len(),
                self.predictor_names.len()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) || !self.intercept.is_finite() {
            return Err(Error::Validation("non-finite model coefficients".into()));
        }
        if let Some(cal) = &self.calibration {
            cal.validate()?;
        }
        Ok(())
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` (row-major,
/// n x n) by Cholesky factorization. Fails when a pivot is not clearly
/// positive, which signals a singular pooled covariance.
fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0f64; n * n];
    let diag_max = (0..n).map(|i| a[i * n + i]).fold(0.0f64, f64::max);
    let tol = 1e-12 * diag_max.max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= tol {
            return Err(Error::SingularCovariance(format!(
                "non-positive pivot {d} at column {j}"
            )));
        }
        l[j * n + j] = d.sqrt();
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / l[j * n + j];
        }
    }
    // forward substitution L y = b
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    // back substitution L^T x = y
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(x)
}

/// Fits the discriminant in closed form. The intercept is set so the
/// discriminant is zero at the midpoint of the projected class means.
pub fn fit_lda(ds: &Dataset, regularization: f64) -> Result<LdaModel> {
    if !(regularization >= 0.0 && regularization.is_finite()) {
        return Err(Error::Config(format!(
            "regularization {regularization} must be nonnegative and finite"
        )));
    }
    let n1 = ds.n_positives();
    let n0 = ds.n_negatives();
    if n0 == 0 || n1 == 0 {
        return Err(Error::UndefinedRate(
            "LDA needs both classes present".into(),
        ));
    }
    let p = ds.n_predictors();
    let n = ds.n_samples();
    if n0 + n1 < 3 {
        return Err(Error::SingularCovariance(
            "pooled covariance needs at least 3 samples".into(),
        ));
    }
    if n <= p + 1 {
        log::warn!("fitting {p} predictors on only {n} samples; expect an ill-conditioned fit");
    }

    let mut mu0 = vec![0.0f64; p];
    let mut mu1 = vec![0.0f64; p];
    for i in 0..n {
        let target = if ds.labels()[i] == 1 { &mut mu1 } else { &mut mu0 };
        for (m, &v) in target.iter_mut().zip(ds.row(i)) {
            *m += v;
        }
    }
    for m in mu0.iter_mut() {
        *m /= n0 as f64;
    }
    for m in mu1.iter_mut() {
        *m /= n1 as f64;
    }

    // pooled within-class scatter, bias-corrected by n0 + n1 - 2
    let mut cov = vec![0.0f64; p * p];
    let mut dev = vec![0.0f64; p];
    for i in 0..n {
        let mu = if ds.labels()[i] == 1 { &mu1 } else { &mu0 };
        for ((d, &v), &m) in dev.iter_mut().zip(ds.row(i)).zip(mu) {
            *d = v - m;
        }
        for j in 0..p {
            for k in j..p {
                cov[j * p + k] += dev[j] * dev[k];
            }
        }
    }
    let divisor = (n0 + n1 - 2) as f64;
    for j in 0..p {
        for k in j..p {
            let v = cov[j * p + k] / divisor;
            cov[j * p + k] = v;
            cov[k * p + j] = v;
        }
        cov[j * p + j] += regularization;
    }

    let diff: Vec<f64> = mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect();
    let weights = cholesky_solve(&cov, &diff, p)?;

    let proj0: f64 = weights.iter().zip(&mu0).map(|(w, m)| w * m).sum();
    let proj1: f64 = weights.iter().zip(&mu1).map(|(w, m)| w * m).sum();
    let intercept = -(proj0 + proj1) / 2.0;

    Ok(LdaModel {
        predictor_names: ds.predictor_names().to_vec(),
        weights,
        intercept,
        regularization,
        calibration: None,
    })
}

/// Discriminant value `weights . row + intercept`.
pub fn discriminant(m: &LdaModel, row: &[f64]) -> Result<f64> {
    if row.len() != m.weights.len() {
        return Err(Error::Shape(format!(
            "row has {} values, model expects {}",
            row.len(),
            m.weights.len()
        )));
    }
    Ok(m.weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + m.intercept)
}

/// Builds monotone calibration knots from discriminants and labels:
/// equal-count bins, tie merging, then pool-adjacent-violators.
pub(crate) fn fit_knots(discriminants: &[f64], labels: &[u8], n_bins: usize) -> Vec<(f64, f64)> {
    let n = discriminants.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| discriminants[a].partial_cmp(&discriminants[b]).unwrap());

    // equal-count bins; the first n % n_bins bins take one extra row
    let base = n / n_bins;
    let extra = n % n_bins;
    let mut bins: Vec<(f64, f64, f64)> = Vec::new(); // (center, prob, weight)
    let mut start = 0usize;
    for b in 0..n_bins {
        let size = base + usize::from(b < extra);
        if size == 0 {
            continue;
        }
        let slice = &order[start..start + size];
        let center = slice.iter().map(|&i| discriminants[i]).sum::<f64>() / size as f64;
        let pos = slice.iter().filter(|&&i| labels[i] == 1).count();
        bins.push((center, pos as f64 / size as f64, size as f64));
        start += size;
    }

    // merge bins whose centers coincide (possible under heavy ties) so
    // knot positions stay strictly increasing
    let mut merged: Vec<(f64, f64, f64)> = Vec::with_capacity(bins.len());
    for (c, p, w) in bins {
        match merged.last_mut() {
            Some(last) if last.0 == c => {
                let total = last.2 + w;
                last.1 = (last.1 * last.2 + p * w) / total;
                last.2 = total;
            }
            _ => merged.push((c, p, w)),
        }
    }

    // pool adjacent violators: probabilities must be nondecreasing
    let mut blocks: Vec<(f64, f64, Vec<f64>)> = Vec::new(); // (prob, weight, centers)
    for (c, p, w) in merged {
        blocks.push((p, w, vec![c]));
        while blocks.len() >= 2 {
            let last = blocks.len() - 1;
            if blocks[last - 1].0 <= blocks[last].0 {
                break;
            }
            let (p2, w2, mut c2) = blocks.pop().unwrap();
            let (p1, w1, c1) = blocks.last_mut().unwrap();
            let total = *w1 + w2;
            *p1 = (*p1 * *w1 + p2 * w2) / total;
            *w1 = total;
            c1.append(&mut c2);
        }
    }

    let mut knots = Vec::new();
    for (p, _, centers) in blocks {
        for c in centers {
            knots.push((c, p));
        }
    }
    knots
}

/// Finds the multiplicative scale `s` with `mean(clip(s * p_i)) =
/// target_mean` by bisection. Saturation from clipping is accounted
/// for; when even full saturation cannot reach the target, the largest
/// useful scale is returned with a warning.
pub(crate) fn solve_scale(raw_probs: &[f64], target_mean: f64) -> f64 {
    let n = raw_probs.len() as f64;
    let mean_at = |s: f64| raw_probs.iter().map(|&p| (s * p).clamp(0.0, 1.0)).sum::<f64>() / n;
    if target_mean <= 0.0 {
        return 1.0;
    }
    let mut hi = 1.0f64;
    let mut tries = 0;
    while mean_at(hi) < target_mean {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            log::warn!(
                "calibration target mean {target_mean} unreachable (saturated at {}); \
                 probabilities will underestimate the base rate",
                mean_at(hi)
            );
            return hi;
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) < target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Calibrates the model on a dataset: returns a copy with a
/// [`CalibrationMap`] whose mean predicted probability over `ds` equals
/// the positive fraction of `ds`.
pub fn calibrate(m: &LdaModel, ds: &Dataset, n_bins: usize) -> Result<LdaModel> {
    if n_bins < 2 {
        return Err(Error::Config(format!("n_bins {n_bins} must be at least 2")));
    }
    if ds.n_positives() == 0 || ds.n_negatives() == 0 {
        return Err(Error::UndefinedRate(
            "calibration needs both classes present".into(),
        ));
    }
    let discs: Vec<f64> = (0..ds.n_samples())
        .map(|i| discriminant(m, ds.row(i)))
        .collect::<Result<_>>()?;
    let knots = fit_knots(&discs, ds.labels(), n_bins);
    let raw: Vec<f64> = discs.iter().map(|&d| interpolate(&knots, d)).collect();
    let base_rate = ds.n_positives() as f64 / ds.n_samples() as f64;
    let scale = solve_scale(&raw, base_rate);
    let mut out = m.clone();
    out.calibration = Some(CalibrationMap { knots, scale });
    Ok(out)
}

/// Calibrated event probability for one row.
pub fn predict_probability(m: &LdaModel, row: &[f64]) -> Result<f64> {
    let cal = m
        .calibration
        .as_ref()
        .ok_or_else(|| Error::Uncalibrated("call calibrate() before predicting".into()))?;
    Ok(cal.probability(discriminant(m, row)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(rows: &[(&[f64], u8)], names: &[&str]) -> Dataset {
        let values: Vec<f64> = rows.iter().flat_map(|(r, _)| r.iter().copied()).collect();
        let labels: Vec<u8> = rows.iter().map(|&(_, l)| l).collect();
        Dataset::new(
            names.iter().map(|s| s.to_string()).collect(),
            values,
            labels,
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn one_dimensional_hand_case() {
        // class 0 = {-2,-1,0}, class 1 = {1,2,3}: pooled variance 1,
        // weight 3, midpoint 0.5 -> intercept -1.5
        let ds = dataset(
            &[
                (&[-2.0], 0),
                (&[-1.0], 0),
                (&[0.0], 0),
                (&[1.0], 1),
                (&[2.0], 1),
                (&[3.0], 1),
            ],
            &["x"],
        );
        let m = fit_lda(&ds, 0.0).unwrap();
        assert!((m.weights[0] - 3.0).abs() < 1e-12);
        assert!((m.intercept + 1.5).abs() < 1e-12);
        assert!(discriminant(&m, &[0.5]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_hand_case() {
        // both classes are 2x2 grids with deviations (+-1, +-1):
        // pooled covariance = (4/3) I, mean difference (1, 2)
        // -> weights (3/4, 3/2), intercept -(0.75*1.5 + 1.5*2) = -4.125
        let class0: [[f64; 2]; 4] = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]];
        let rows: Vec<(Vec<f64>, u8)> = class0
            .iter()
            .map(|r| (r.to_vec(), 0))
            .chain(class0.iter().map(|r| (vec![r[0] + 1.0, r[1] + 2.0], 1)))
            .collect();
        let refs: Vec<(&[f64], u8)> = rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let ds = dataset(&refs, &["x", "y"]);
        let m = fit_lda(&ds, 0.0).unwrap();
        assert!((m.weights[0] - 0.75).abs() < 1e-12);
        assert!((m.weights[1] - 1.5).abs() < 1e-12);
        assert!((m.intercept + 4.125).abs() < 1e-12);
    }

    #[test]
    fn identical_class_means_give_zero_weights() {
        let ds = dataset(
            &[
                (&[-1.0], 0),
                (&[1.0], 0),
                (&[-1.0], 1),
                (&[1.0], 1),
            ],
            &["x"],
        );
        let m = fit_lda(&ds, 0.0).unwrap();
        assert_eq!(m.weights[0], 0.0);
    }

    #[test]
    fn duplicated_predictor_is_singular_without_ridge() {
        let ds = dataset(
            &[
                (&[0.0, 0.0], 0),
                (&[1.0, 1.0], 0),
                (&[2.0, 2.0], 1),
                (&[3.0, 3.0], 1),
            ],
            &["a", "b"],
        );
        assert!(matches!(
            fit_lda(&ds, 0.0),
            Err(Error::SingularCovariance(_))
        ));
        assert!(fit_lda(&ds, 1e-6).is_ok());
    }

    #[test]
    fn discriminant_is_affine() {
        // d(a + b) = d(a) + d(b) - intercept
        let m = LdaModel {
            predictor_names: vec!["a".into(), "b".into()],
            weights: vec![2.0, -1.0],
            intercept: 0.5,
            regularization: 0.0,
            calibration: None,
        };
        let a = [1.0, 2.0];
        let b = [-0.5, 3.0];
        let sum = [a[0] + b[0], a[1] + b[1]];
        let lhs = discriminant(&m, &sum).unwrap();
        let rhs =
            discriminant(&m, &a).unwrap() + discriminant(&m, &b).unwrap() - m.intercept;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn discriminant_shape_mismatch() {
        let m = LdaModel {
            predictor_names: vec!["a".into()],
            weights: vec![1.0],
            intercept: 0.0,
            regularization: 0.0,
            calibration: None,
        };
        assert!(matches!(
            discriminant(&m, &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn predict_requires_calibration() {
        let m = LdaModel {
            predictor_names: vec!["a".into()],
            weights: vec![1.0],
            intercept: 0.0,
            regularization: 0.0,
            calibration: None,
        };
        assert!(matches!(
            predict_probability(&m, &[0.0]),
            Err(Error::Uncalibrated(_))
        ));
    }

    #[test]
    fn calibration_hits_base_rate_on_separable_data() {
        let mut rows: Vec<(Vec<f64>, u8)> = Vec::new();
        for i in 0..90 {
            rows.push((vec![-3.0 - (i % 7) as f64 * 0.1], 0));
        }
        for i in 0..10 {
            rows.push((vec![3.0 + (i % 5) as f64 * 0.1], 1));
        }
        let refs: Vec<(&[f64], u8)> = rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let ds = dataset(&refs, &["x"]);
        let m = calibrate(&fit_lda(&ds, 0.0).unwrap(), &ds, 10).unwrap();
        let mean: f64 = (0..ds.n_samples())
            .map(|i| predict_probability(&m, ds.row(i)).unwrap())
            .sum::<f64>()
            / ds.n_samples() as f64;
        assert!((mean - 0.1).abs() < 1e-9, "mean {mean} vs base rate 0.1");
        // extremes approach 0 and 1
        assert!(predict_probability(&m, &[-10.0]).unwrap() < 0.05);
        assert!(predict_probability(&m, &[10.0]).unwrap() > 0.9);
    }

    #[test]
    fn uninformative_discriminant_is_constant_base_rate() {
        // all rows identical: every discriminant coincides, so the map
        // collapses to a single knot at the base rate
        let rows: Vec<(Vec<f64>, u8)> = (0..20)
            .map(|i| (vec![1.0], u8::from(i < 5)))
            .collect();
        let refs: Vec<(&[f64], u8)> = rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let ds = dataset(&refs, &["x"]);
        let m = LdaModel {
            predictor_names: vec!["x".into()],
            weights: vec![0.0],
            intercept: 0.0,
            regularization: 0.0,
            calibration: None,
        };
        let m = calibrate(&m, &ds, 10).unwrap();
        for i in 0..ds.n_samples() {
            let p = predict_probability(&m, ds.row(i)).unwrap();
            assert!((p - 0.25).abs() < 1e-12, "expected base rate, got {p}");
        }
    }

    #[test]
    fn calibration_is_monotone_in_discriminant() {
        let mut rows: Vec<(Vec<f64>, u8)> = Vec::new();
        for i in 0..200 {
            let x = i as f64 / 10.0;
            let label = u8::from(i % 10 == 0 && i > 100);
            rows.push((vec![x], label));
        }
        let refs: Vec<(&[f64], u8)> = rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let ds = dataset(&refs, &["x"]);
        let m = calibrate(&fit_lda(&ds, 0.0).unwrap(), &ds, 10).unwrap();
        assert!(m.weights[0] > 0.0, "positives sit at large x");
        let mut last = -1.0;
        for i in 0..200 {
            let x = i as f64 / 10.0;
            let p = predict_probability(&m, &[x]).unwrap();
            assert!(p >= last, "probability dropped at x={x}");
            last = p;
        }
    }

    #[test]
    fn interpolation_is_flat_beyond_the_knots() {
        let cal = CalibrationMap {
            knots: vec![(-1.0, 0.1), (0.0, 0.25), (2.0, 0.75)],
            scale: 1.0,
        };
        cal.validate().unwrap();
        // at and beyond the endpoints the knot probability holds
        assert_eq!(cal.probability(-1.0), 0.1);
        assert_eq!(cal.probability(-50.0), 0.1);
        assert_eq!(cal.probability(2.0), 0.75);
        assert_eq!(cal.probability(99.0), 0.75);
        // midpoint of the first segment
        assert!((cal.probability(-0.5) - 0.175).abs() < 1e-15);
    }

    #[test]
    fn serialization_round_trip_preserves_discriminants() {
        let ds = dataset(
            &[
                (&[0.3, -1.2], 0),
                (&[1.7, 0.4], 0),
                (&[2.9, 3.1], 1),
                (&[3.3, 2.7], 1),
                (&[0.1, 0.9], 0),
            ],
            &["a", "b"],
        );
        let m = calibrate(&fit_lda(&ds, 1e-9).unwrap(), &ds, 3).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: LdaModel = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        for i in 0..ds.n_samples() {
            let d0 = discriminant(&m, ds.row(i)).unwrap();
            let d1 = discriminant(&back, ds.row(i)).unwrap();
            assert_eq!(d0.to_bits(), d1.to_bits(), "discriminant changed in round trip");
            let p0 = predict_probability(&m, ds.row(i)).unwrap();
            let p1 = predict_probability(&back, ds.row(i)).unwrap();
            assert_eq!(p0.to_bits(), p1.to_bits());
        }
    }
}
