//! Linear discriminant with a shared diagonal covariance and ridge term;
//! posteriors come from Bayes' rule evaluated in log space.

use super::{log_sum_exp, ClassifierError, ProbabilisticClassifier, ProbabilityVector, N_LABELS};
use crate::domain::PoseLabel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    dim: usize,
    ridge: f64,
    /// (label index, prior, mean) for each class seen during fitting.
    classes: Vec<(usize, f64, Vec<f64>)>,
    /// Pooled within-class variance per dimension, ridge included.
    variances: Vec<f64>,
}

impl LdaModel {
    /// Fit from feature rows and labels. Classes absent from the training
    /// set receive zero posterior at prediction time.
    pub fn fit(
        x: &[&[f64]],
        y: &[PoseLabel],
        ridge: f64,
    ) -> Result<LdaModel, ClassifierError> {
        if x.is_empty() || y.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        if !(ridge > 0.0) {
            return Err(ClassifierError::BadRidge(ridge));
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

        let mut counts = [0usize; N_LABELS];
        let mut sums = vec![vec![0.0f64; dim]; N_LABELS];
        for i in 0..n {
            let l = y[i].index();
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(x[i]) {
                *s += v;
            }
        }
        let n_classes = counts.iter().filter(|&&c| c > 0).count();

        let mut means = vec![Vec::new(); N_LABELS];
        for l in 0..N_LABELS {
            if counts[l] > 0 {
                means[l] = sums[l].iter().map(|s| s / counts[l] as f64).collect();
            }
        }

        // pooled within-class scatter, diagonal only
        let mut scatter = vec![0.0f64; dim];
        for i in 0..n {
            let mean = &means[y[i].index()];
            for j in 0..dim {
                let d = x[i][j] - mean[j];
                scatter[j] += d * d;
            }
        }
        let dof = (n - n_classes).max(1) as f64;
        let variances: Vec<f64> = scatter.iter().map(|s| s / dof + ridge).collect();

        let classes = (0..N_LABELS)
            .filter(|&l| counts[l] > 0)
            .map(|l| (l, counts[l] as f64 / n as f64, means[l].clone()))
            .collect();

        Ok(LdaModel {
            dim,
            ridge,
            classes,
            variances,
        })
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn classes(&self) -> &[(usize, f64, Vec<f64>)] {
        &self.classes
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub(crate) fn from_parts(
        dim: usize,
        ridge: f64,
        classes: Vec<(usize, f64, Vec<f64>)>,
        variances: Vec<f64>,
    ) -> LdaModel {
        LdaModel {
            dim,
            ridge,
            classes,
            variances,
        }
    }
}

impl ProbabilisticClassifier for LdaModel {
    fn predict_proba(&self, features: &[f64]) -> Result<ProbabilityVector, ClassifierError> {
        if features.len() != self.dim {
            return Err(ClassifierError::DimensionMismatch {
                got: features.len(),
                expected: self.dim,
            });
        }
        let mut log_post = vec![f64::NEG_INFINITY; N_LABELS];
        for (l, prior, mean) in &self.classes {
            let mut ll = prior.ln();
            for j in 0..self.dim {
                let d = features[j] - mean[j];
                ll -= 0.5 * (d * d / self.variances[j] + self.variances[j].ln());
            }
            log_post[*l] = ll;
        }
        let z = log_sum_exp(&log_post);
        let values = log_post
            .iter()
            .map(|&lp| {
                if lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    (lp - z).exp()
                }
            })
            .collect();
        Ok(ProbabilityVector::from_scores(values))
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn gaussian_pair_data(seed: u64) -> (Vec<Vec<f64>>, Vec<PoseLabel>) {
        // two classes at (0,0) and (10,10) with unit noise
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut normal = move || {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..40 {
            x.push(vec![normal(), normal()]);
            y.push(PoseLabel::Background);
            x.push(vec![10.0 + normal(), 10.0 + normal()]);
            y.push(PoseLabel::SoldierU);
        }
        (x, y)
    }

    #[test]
    fn posterior_concentrates_at_far_class_mean() {
        let (x, y) = gaussian_pair_data(1);
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let model = LdaModel::fit(&rows, &y, 1e-3).unwrap();
        let p = model.predict_proba(&[10.0, 10.0]).unwrap();
        assert!(p.get(PoseLabel::SoldierU.index()) > 0.99, "{p:?}");

        // independent closed-form check: equal priors and near-unit shared
        // variance make the log-odds ~ (||q-m1||^2 - ||q-m2||^2) / (2 v)
        let q = [2.0, 3.0];
        let p2 = model.predict_proba(&q).unwrap();
        let (_, _, m1) = &model.classes()[0];
        let (_, _, m2) = &model.classes()[1];
        let v = model.variances();
        let d1: f64 = (0..2).map(|j| (q[j] - m1[j]).powi(2) / v[j]).sum();
        let d2: f64 = (0..2).map(|j| (q[j] - m2[j]).powi(2) / v[j]).sum();
        let expect = 1.0 / (1.0 + ((d1 - d2) / 2.0).exp());
        assert!((p2.get(0) - expect).abs() < 1e-6);
    }

    #[test]
    fn far_query_saturates_to_one() {
        let (x, y) = gaussian_pair_data(2);
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let model = LdaModel::fit(&rows, &y, 1e-3).unwrap();
        let p = model.predict_proba(&[-50.0, -50.0]).unwrap();
        assert!((p.get(PoseLabel::Background.index()) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_sample_per_class_nearest_mean() {
        let x: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64 * 3.0, 0.0]).collect();
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let y: Vec<PoseLabel> = (0..4).map(|i| PoseLabel::from_index(i).unwrap()).collect();
        let model = LdaModel::fit(&rows, &y, 1e-3).unwrap();
        let p = model.predict_proba(&x[3]).unwrap();
        assert_eq!(p.argmax(), 3);
    }

    #[test]
    fn symmetric_classes_split_evenly() {
        let x = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let y = vec![PoseLabel::LogR, PoseLabel::LogL];
        let model = LdaModel::fit(&rows, &y, 1e-3).unwrap();
        let p = model.predict_proba(&[5.0, -4.0]).unwrap();
        assert!((p.get(PoseLabel::LogR.index()) - 0.5).abs() < 1e-9);
        assert!((p.get(PoseLabel::LogL.index()) - 0.5).abs() < 1e-9);
        // unseen classes get exactly zero
        assert_eq!(p.get(PoseLabel::Background.index()), 0.0);
    }

    #[test]
    fn outputs_sum_to_one_even_for_huge_features() {
        let (x, y) = gaussian_pair_data(3);
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let model = LdaModel::fit(&rows, &y, 1e-3).unwrap();
        for q in [[1e6, -1e6], [0.0, 1e6], [123.0, 456.0]] {
            let p = model.predict_proba(&q).unwrap();
            assert!(p.is_on_simplex(), "not a distribution for {q:?}: {p:?}");
        }
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        assert!(matches!(
            LdaModel::fit(&[], &[], 1e-3),
            Err(ClassifierError::EmptyTrainingSet)
        ));
        let x: Vec<&[f64]> = vec![&[1.0, 2.0], &[1.0]];
        let y = vec![PoseLabel::Background, PoseLabel::LogR];
        assert!(matches!(
            LdaModel::fit(&x, &y, 1e-3),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
        let x2: Vec<&[f64]> = vec![&[1.0], &[2.0]];
        assert!(matches!(
            LdaModel::fit(&x2, &y, 0.0),
            Err(ClassifierError::BadRidge(_))
        ));
    }

    #[test]
    fn predict_rejects_wrong_dimension() {
        let x: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0]];
        let y = vec![PoseLabel::Background, PoseLabel::LogR];
        let model = LdaModel::fit(&x, &y, 1e-3).unwrap();
        assert!(matches!(
            model.predict_proba(&[1.0]),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, y) = gaussian_pair_data(7);
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let a = LdaModel::fit(&rows, &y, 1e-3).unwrap();
        let b = LdaModel::fit(&rows, &y, 1e-3).unwrap();
        assert_eq!(a, b);
    }
}
