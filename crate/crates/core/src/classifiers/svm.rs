//! One-vs-rest linear margin classifier trained by epoch-based subgradient
//! descent on the hinge loss, with per-class sigmoid calibration of the
//! margins (Platt's method, damped Newton).

use super::{ClassifierError, ProbabilisticClassifier, ProbabilityVector, N_LABELS};
use crate::domain::PoseLabel;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

/// Sigmoid-calibration parameters: P(y=1 | margin f) = 1 / (1 + exp(a f + b)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

/// Calibrated probability for one margin, computed in the numerically
/// stable branch form.
pub fn platt_predict(margin: f64, p: PlattParams) -> f64 {
    let f = p.a * margin + p.b;
    if f >= 0.0 {
        (-f).exp() / (1.0 + (-f).exp())
    } else {
        1.0 / (1.0 + f.exp())
    }
}

const PLATT_NEWTON_ITERS: usize = 100;
const PLATT_SIGMA: f64 = 1e-12;
const PLATT_MIN_STEP: f64 = 1e-10;

/// Fit sigmoid parameters on (margin, is-positive) pairs by damped Newton
/// iterations on the regularized cross-entropy.
pub fn platt_fit(margins: &[f64], positive: &[bool]) -> PlattParams {
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();

    let objective = |a: f64, b: f64| -> f64 {
        margins
            .iter()
            .zip(&targets)
            .map(|(&m, &t)| {
                let f = a * m + b;
                if f >= 0.0 {
                    t * f + (1.0 + (-f).exp()).ln()
                } else {
                    (t - 1.0) * f + (1.0 + f.exp()).ln()
                }
            })
            .sum()
    };

    let mut a = 0.0f64;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut fval = objective(a, b);

    for _ in 0..PLATT_NEWTON_ITERS {
        let (mut h11, mut h22) = (PLATT_SIGMA, PLATT_SIGMA);
        let (mut h21, mut g1, mut g2) = (0.0f64, 0.0f64, 0.0f64);
        for (&m, &t) in margins.iter().zip(&targets) {
            let f = a * m + b;
            let (p, q) = if f >= 0.0 {
                let e = (-f).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += m * m * d2;
            h22 += d2;
            h21 += m * d2;
            let d1 = t - p;
            g1 += m * d1;
            g2 += d1;
        }
        let gate = 1e-5 * margins.len().max(1) as f64;
        if g1.abs() < gate && g2.abs() < gate {
            break;
        }

        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        // halve the step until the objective decreases sufficiently
        let mut step = 1.0f64;
        let mut moved = false;
        while step >= PLATT_MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    PlattParams { a, b }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassHead {
    pub label_index: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub platt: PlattParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    dim: usize,
    c_param: f64,
    epochs: usize,
    seed: u64,
    heads: Vec<ClassHead>,
}

impl LinearSvmModel {
    /// Fit one-vs-rest hinge classifiers.
    ///
    /// Each head minimizes `lambda/2 ||w||^2 + mean hinge` by subgradient
    /// steps of size `1/(lambda t)` with `lambda = 1/(c_param * n)`; the
    /// visiting order is reshuffled per epoch from a seed-derived stream, so
    /// training is bit-reproducible.
    pub fn fit(
        x: &[&[f64]],
        y: &[PoseLabel],
        c_param: f64,
        epochs: usize,
        seed: u64,
    ) -> Result<LinearSvmModel, ClassifierError> {
        if x.is_empty() || y.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        let dim = x[0].len();
        for row in x {
            if row.len() != dim {
                return Err(ClassifierError::DimensionMismatch {
                    got: row.len(),
                    expected: dim,
                });
            }
        }
        let n = x.len().min(y.len());
        let mut present = [false; N_LABELS];
        for l in &y[..n] {
            present[l.index()] = true;
        }
        let class_indices: Vec<usize> =
            (0..N_LABELS).filter(|&l| present[l]).collect();
        if class_indices.len() < 2 {
            return Err(ClassifierError::SingleClassTraining);
        }

        let lambda = 1.0 / (c_param * n as f64);
        let mut heads = Vec::with_capacity(class_indices.len());
        for &label_index in &class_indices {
            let targets: Vec<f64> = y[..n]
                .iter()
                .map(|l| if l.index() == label_index { 1.0 } else { -1.0 })
                .collect();

            let mut w = vec![0.0f64; dim];
            let mut bias = 0.0f64;
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(label_index as u64 + 1),
            );
            let mut t = 0u64;
            for _ in 0..epochs.max(1) {
                order.shuffle(&mut rng);
                for &i in &order {
                    t += 1;
                    let step = 1.0 / (lambda * t as f64);
                    let margin = dot(&w, x[i]) + bias;
                    // w <- (1 - step*lambda) w  [+ step y x when hinge active]
                    let shrink = 1.0 - step * lambda;
                    for v in &mut w {
                        *v *= shrink;
                    }
                    if targets[i] * margin < 1.0 {
                        let g = step * targets[i];
                        for (wv, xv) in w.iter_mut().zip(x[i]) {
                            *wv += g * xv;
                        }
                        bias += g;
                    }
                }
            }

            let margins: Vec<f64> = (0..n).map(|i| dot(&w, x[i]) + bias).collect();
            let positive: Vec<bool> = targets.iter().map(|&t| t > 0.0).collect();
            let platt = platt_fit(&margins, &positive);
            heads.push(ClassHead {
                label_index,
                weights: w,
                bias,
                platt,
            });
        }

        Ok(LinearSvmModel {
            dim,
            c_param,
            epochs,
            seed,
            heads,
        })
    }

    pub fn heads(&self) -> &[ClassHead] {
        &self.heads
    }

    pub fn c_param(&self) -> f64 {
        self.c_param
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw margin per fitted class.
    pub fn margins(&self, features: &[f64]) -> Result<Vec<(usize, f64)>, ClassifierError> {
        if features.len() != self.dim {
            return Err(ClassifierError::DimensionMismatch {
                got: features.len(),
                expected: self.dim,
            });
        }
        Ok(self
            .heads
            .iter()
            .map(|h| (h.label_index, dot(&h.weights, features) + h.bias))
            .collect())
    }

    pub(crate) fn from_parts(
        dim: usize,
        c_param: f64,
        epochs: usize,
        seed: u64,
        heads: Vec<ClassHead>,
    ) -> LinearSvmModel {
        LinearSvmModel {
            dim,
            c_param,
            epochs,
            seed,
            heads,
        }
    }
}

impl ProbabilisticClassifier for LinearSvmModel {
    fn predict_proba(&self, features: &[f64]) -> Result<ProbabilityVector, ClassifierError> {
        let margins = self.margins(features)?;
        let mut scores = vec![0.0f64; N_LABELS];
        for (h, (_, m)) in self.heads.iter().zip(&margins) {
            scores[h.label_index] = platt_predict(*m, h.platt);
        }
        Ok(ProbabilityVector::from_scores(scores))
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_data() -> (Vec<Vec<f64>>, Vec<PoseLabel>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let t = i as f64 / 20.0;
            x.push(vec![t, 2.0 + t]);
            y.push(PoseLabel::Background);
            x.push(vec![2.0 + t, t]);
            y.push(PoseLabel::SoldierU);
        }
        (x, y)
    }

    #[test]
    fn separable_data_trains_to_full_accuracy() {
        let (x, y) = separable_data();
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let model = LinearSvmModel::fit(&rows, &y, 0.5, 50, 3).unwrap();
        let correct = rows
            .iter()
            .zip(&y)
            .filter(|(r, l)| {
                model.predict_proba(r).unwrap().argmax() == l.index()
            })
            .count();
        assert_eq!(correct, rows.len());
    }

    #[test]
    fn fit_is_bit_deterministic() {
        let (x, y) = separable_data();
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let a = LinearSvmModel::fit(&rows, &y, 0.5, 20, 9).unwrap();
        let b = LinearSvmModel::fit(&rows, &y, 0.5, 20, 9).unwrap();
        assert_eq!(a, b);
        let c = LinearSvmModel::fit(&rows, &y, 0.5, 20, 10).unwrap();
        assert!(a != c || a.heads() == c.heads());
    }

    #[test]
    fn platt_balanced_symmetric_margins_give_half_at_zero() {
        let margins = vec![-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];
        let positive = vec![false, false, false, false, true, true, true, true];
        let p = platt_fit(&margins, &positive);
        let at_zero = platt_predict(0.0, p);
        assert!((at_zero - 0.5).abs() < 0.05, "sigmoid(0) = {at_zero}");
        // monotone direction: larger margin, larger probability
        assert!(platt_predict(2.0, p) > platt_predict(-2.0, p));
    }

    #[test]
    fn probabilities_live_on_simplex() {
        let (x, y) = separable_data();
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let model = LinearSvmModel::fit(&rows, &y, 0.5, 15, 0).unwrap();
        for q in [[0.0, 0.0], [100.0, -100.0], [5.0, 5.0]] {
            let p = model.predict_proba(&q).unwrap();
            assert!(p.is_on_simplex());
        }
    }

    #[test]
    fn single_class_rejected() {
        let x: Vec<&[f64]> = vec![&[1.0], &[2.0]];
        let y = vec![PoseLabel::LogR, PoseLabel::LogR];
        assert!(matches!(
            LinearSvmModel::fit(&x, &y, 0.5, 5, 0),
            Err(ClassifierError::SingleClassTraining)
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (x, y) = separable_data();
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let model = LinearSvmModel::fit(&rows, &y, 0.5, 5, 0).unwrap();
        assert!(matches!(
            model.predict_proba(&[1.0, 2.0, 3.0]),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
    }
}
