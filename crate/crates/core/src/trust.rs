//! Modality-trust estimation: build the stacked design matrix of unimodal
//! label probabilities and the correctness oracle vector, then solve the
//! simplex-constrained least-squares problem for per-scene trust weights.

use crate::classifiers::{
    fit_channel_classifiers, ChannelScores, ClassifierError, ProbabilisticClassifier,
    ProbabilityVector, TrainParams,
};
use crate::domain::{
    partition_by_scene, stratified_folds, Channel, Dataset, DomainError, Modality, PoseLabel,
    SceneCondition, View,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrustError {
    #[error("no score blocks to stack")]
    EmptyInput,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("design matrix is degenerate; no feasible candidate found")]
    DegenerateSystem,
    #[error("channel {0} missing from scores")]
    MissingChannel(Channel),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Per-datapoint label-probability block for one view: `L x M` with one
/// column per modality in fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBlock {
    n_labels: usize,
    /// Column-major: columns[m][l] is the probability of label l under
    /// modality m.
    columns: Vec<Vec<f64>>,
}

impl ScoreBlock {
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self, TrustError> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(TrustError::EmptyInput);
        }
        let n_labels = columns[0].len();
        if columns.iter().any(|c| c.len() != n_labels) {
            return Err(TrustError::ShapeMismatch(
                "score columns have unequal lengths".into(),
            ));
        }
        Ok(ScoreBlock { n_labels, columns })
    }

    pub fn from_probability_vectors(cols: &[&ProbabilityVector]) -> Result<Self, TrustError> {
        ScoreBlock::new(cols.iter().map(|p| p.values().to_vec()).collect())
    }

    /// Slice one view out of a channel score set: one column per modality,
    /// viewless modalities (pressure) contribute their single column.
    pub fn for_view(
        scores: &ChannelScores,
        modalities: &[Modality],
        view: View,
    ) -> Result<Self, TrustError> {
        let mut columns = Vec::with_capacity(modalities.len());
        for &m in modalities {
            let channel = if m.is_viewless() {
                Channel::new(m, None)
            } else {
                Channel::viewed(m, view)
            };
            let col = scores
                .column(channel)
                .ok_or(TrustError::MissingChannel(channel))?;
            columns.push(col.values().to_vec());
        }
        ScoreBlock::new(columns)
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn n_modalities(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, label: usize, modality: usize) -> f64 {
        self.columns[modality][label]
    }

    /// Predicted label index of one modality column (ties break low).
    pub fn column_argmax(&self, modality: usize) -> usize {
        let col = &self.columns[modality];
        let mut best = 0;
        for (i, &v) in col.iter().enumerate() {
            if v > col[best] {
                best = i;
            }
        }
        best
    }
}

/// Stacked `U x M` (or `Y x M` multiview) matrix of label probabilities,
/// datapoint-major and label-minor within each block.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: Vec<Vec<f64>>,
    pub n_points: usize,
    pub n_labels: usize,
    pub n_views: usize,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Residual objective 0.5 * ||A w - b||^2.
    pub fn objective(&self, w: &[f64], b: &OracleVector) -> f64 {
        0.5 * self
            .rows
            .iter()
            .zip(&b.values)
            .map(|(row, &bv)| {
                let r = row.iter().zip(w).map(|(a, w)| a * w).sum::<f64>() - bv;
                r * r
            })
            .sum::<f64>()
    }
}

/// Oracle target vector; entries encode the fraction of modalities whose
/// unimodal argmax was correct, placed at the true-label row of each block.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleVector {
    values: Vec<f64>,
    /// Per-modality indicator columns kept for diagnostics.
    per_modality: Vec<Vec<f64>>,
}

impl OracleVector {
    /// Wrap raw target values (all in [0, 1]) without per-modality columns.
    pub fn from_values(values: Vec<f64>) -> Result<Self, TrustError> {
        if values.is_empty() {
            return Err(TrustError::EmptyInput);
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            return Err(TrustError::ShapeMismatch(
                "oracle entries must lie in [0, 1]".into(),
            ));
        }
        Ok(OracleVector {
            values,
            per_modality: vec![],
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn per_modality(&self) -> &[Vec<f64>] {
        &self.per_modality
    }
}

/// Stack per-datapoint score blocks into the design matrix: row `k*L + l`,
/// column `m` holds the probability of label `l` for point `k` under
/// modality `m`.
pub fn build_design(blocks: &[ScoreBlock]) -> Result<DesignMatrix, TrustError> {
    if blocks.is_empty() {
        return Err(TrustError::EmptyInput);
    }
    let n_labels = blocks[0].n_labels();
    let n_mods = blocks[0].n_modalities();
    let mut rows = Vec::with_capacity(blocks.len() * n_labels);
    for block in blocks {
        if block.n_labels() != n_labels || block.n_modalities() != n_mods {
            return Err(TrustError::ShapeMismatch(format!(
                "block is {}x{}, expected {}x{}",
                block.n_labels(),
                block.n_modalities(),
                n_labels,
                n_mods
            )));
        }
        for l in 0..n_labels {
            rows.push((0..n_mods).map(|m| block.get(l, m)).collect());
        }
    }
    Ok(DesignMatrix {
        rows,
        n_points: blocks.len(),
        n_labels,
        n_views: 1,
    })
}

/// Build the uniform-vote oracle: for every modality, a 1 at row `k*L + l*`
/// when that modality's argmax equals the true label of point `k`; the final
/// vector averages the per-modality columns so each has `1/M` voting power.
pub fn build_oracle(
    blocks: &[ScoreBlock],
    truth: &[PoseLabel],
) -> Result<OracleVector, TrustError> {
    if blocks.is_empty() {
        return Err(TrustError::EmptyInput);
    }
    if blocks.len() != truth.len() {
        return Err(TrustError::ShapeMismatch(format!(
            "{} blocks but {} labels",
            blocks.len(),
            truth.len()
        )));
    }
    let n_labels = blocks[0].n_labels();
    let n_mods = blocks[0].n_modalities();
    let u = blocks.len() * n_labels;
    let mut per_modality = vec![vec![0.0f64; u]; n_mods];
    for (k, (block, &label)) in blocks.iter().zip(truth).enumerate() {
        let target = label.index();
        if target >= n_labels {
            return Err(TrustError::ShapeMismatch(format!(
                "label index {target} out of range for {n_labels} rows"
            )));
        }
        for m in 0..n_mods {
            if block.column_argmax(m) == target {
                per_modality[m][k * n_labels + target] = 1.0;
            }
        }
    }
    let values = (0..u)
        .map(|i| per_modality.iter().map(|col| col[i]).sum::<f64>() / n_mods as f64)
        .collect();
    Ok(OracleVector {
        values,
        per_modality,
    })
}

/// Concatenate per-view systems row-wise in the given order.
pub fn stack_views(
    per_view: &[(DesignMatrix, OracleVector)],
) -> Result<(DesignMatrix, OracleVector), TrustError> {
    if per_view.is_empty() {
        return Err(TrustError::EmptyInput);
    }
    let first = &per_view[0].0;
    let (n_points, n_labels, n_cols) = (first.n_points, first.n_labels, first.n_cols());
    let mut rows = Vec::new();
    let mut values = Vec::new();
    let mut per_modality = vec![Vec::new(); n_cols];
    for (a, b) in per_view {
        if a.n_points != n_points || a.n_labels != n_labels || a.n_cols() != n_cols {
            return Err(TrustError::ShapeMismatch(
                "views disagree on K, L or M".into(),
            ));
        }
        if a.n_rows() != b.len() {
            return Err(TrustError::ShapeMismatch(
                "design and oracle row counts differ".into(),
            ));
        }
        rows.extend(a.rows.iter().cloned());
        values.extend_from_slice(&b.values);
        for (m, col) in b.per_modality.iter().enumerate() {
            per_modality[m].extend_from_slice(col);
        }
    }
    Ok((
        DesignMatrix {
            rows,
            n_points,
            n_labels,
            n_views: per_view.len(),
        },
        OracleVector {
            values,
            per_modality,
        },
    ))
}

/// Simplex-constrained trust weights for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustWeights {
    weights: Vec<f64>,
}

impl TrustWeights {
    /// Clamp tiny negatives and renormalize so the simplex invariant holds
    /// exactly.
    pub fn project(mut weights: Vec<f64>) -> TrustWeights {
        for w in &mut weights {
            if *w < 1e-12 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            let u = 1.0 / weights.len() as f64;
            for w in &mut weights {
                *w = u;
            }
        } else {
            for w in &mut weights {
                *w /= sum;
            }
        }
        TrustWeights { weights }
    }

    pub fn uniform(m: usize) -> TrustWeights {
        TrustWeights {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, m: usize) -> f64 {
        self.weights[m]
    }

    pub fn is_on_simplex(&self) -> bool {
        self.weights.iter().all(|&w| (0.0..=1.0).contains(&w))
            && (self.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-8
    }
}

const OBJECTIVE_TIE_TOL: f64 = 1e-10;
const KKT_PIVOT_TOL: f64 = 1e-14;
const TIE_RIDGE: f64 = 1e-10;

/// Minimize `0.5 ||A w - b||^2` over the probability simplex.
///
/// Supports are enumerated exhaustively (M is small and fixed): for each
/// nonempty subset of modalities the equality-constrained normal equations
/// are solved through their KKT system, feasible candidates are kept, and
/// the lowest-objective one wins. Ties within `1e-10` resolve to the
/// candidate of smallest Euclidean norm, i.e. the most uniform one;
/// rank-deficient supports are re-solved with a tiny ridge, which selects
/// exactly that minimum-norm minimizer. Infeasible stationary points are
/// also projected onto the simplex and kept as backup candidates.
pub fn solve_trust(a: &DesignMatrix, b: &OracleVector) -> Result<TrustWeights, TrustError> {
    let m = a.n_cols();
    if m == 0 || a.n_rows() == 0 {
        return Err(TrustError::EmptyInput);
    }
    if a.n_rows() != b.len() {
        return Err(TrustError::ShapeMismatch(format!(
            "A has {} rows, b has {}",
            a.n_rows(),
            b.len()
        )));
    }

    // Gram matrix and correlation vector; the objective of any candidate is
    // then O(M^2).
    let mut gram = vec![vec![0.0f64; m]; m];
    let mut corr = vec![0.0f64; m];
    let mut bb = 0.0f64;
    for (row, &bv) in a.rows.iter().zip(b.values()) {
        for i in 0..m {
            corr[i] += row[i] * bv;
            for j in i..m {
                gram[i][j] += row[i] * row[j];
            }
        }
        bb += bv * bv;
    }
    for i in 0..m {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
    }
    let objective = |w: &[f64]| -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..m {
            lin += corr[i] * w[i];
            for j in 0..m {
                quad += w[i] * gram[i][j] * w[j];
            }
        }
        0.5 * quad - lin + 0.5 * bb
    };

    let ridge_scale = {
        let tr: f64 = (0..m).map(|i| gram[i][i]).sum();
        TIE_RIDGE * (tr / m as f64).max(1.0)
    };

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    // vertices and the uniform point are always in the running
    for i in 0..m {
        let mut w = vec![0.0; m];
        w[i] = 1.0;
        candidates.push(w);
    }
    candidates.push(vec![1.0 / m as f64; m]);

    for support in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| support & (1 << i) != 0).collect();
        let solution = solve_support_kkt(&gram, &corr, &idx, 0.0)
            .or_else(|| solve_support_kkt(&gram, &corr, &idx, ridge_scale));
        let Some(ws) = solution else { continue };
        let mut w = vec![0.0; m];
        for (&i, &v) in idx.iter().zip(&ws) {
            w[i] = v;
        }
        if w.iter().all(|&v| v >= -1e-12) {
            candidates.push(TrustWeights::project(w).weights);
        } else {
            // keep a projected fallback so near-boundary optima are not lost
            candidates.push(project_to_simplex(&w));
        }
    }

    if candidates.is_empty() {
        return Err(TrustError::DegenerateSystem);
    }

    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for w in candidates {
        let obj = objective(&w);
        let norm = w.iter().map(|v| v * v).sum::<f64>();
        let better = match &best {
            None => true,
            Some((bo, bn, _)) => {
                obj < bo - OBJECTIVE_TIE_TOL
                    || ((obj - bo).abs() <= OBJECTIVE_TIE_TOL && norm < bn - 1e-15)
            }
        };
        if better {
            best = Some((obj, norm, w));
        }
    }
    let (_, _, w) = best.ok_or(TrustError::DegenerateSystem)?;
    Ok(TrustWeights::project(w))
}

/// Solve the KKT system of `min 0.5 w' G w - c' w  s.t. sum w = 1` on a
/// support, optionally ridged. Returns None when the pivoting breaks down.
fn solve_support_kkt(
    gram: &[Vec<f64>],
    corr: &[f64],
    idx: &[usize],
    ridge: f64,
) -> Option<Vec<f64>> {
    let k = idx.len();
    let n = k + 1;
    let mut m = vec![vec![0.0f64; n + 1]; n];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            m[r][c] = gram[i][j];
        }
        m[r][r] += ridge;
        m[r][k] = 1.0;
        m[r][n] = corr[i];
    }
    for c in 0..k {
        m[k][c] = 1.0;
    }
    m[k][n] = 1.0;

    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() <= KKT_PIVOT_TOL {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut w = Vec::with_capacity(k);
    for r in 0..k {
        let v = m[r][n] / m[r][r];
        if !v.is_finite() {
            return None;
        }
        w.push(v);
    }
    Some(w)
}

/// Euclidean projection onto the probability simplex.
fn project_to_simplex(w: &[f64]) -> Vec<f64> {
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    w.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Per-scene trust table.
pub type TrustTable = BTreeMap<SceneCondition, TrustWeights>;

/// Estimate trust weights for every scene present in the dataset: partition
/// by scene, score with the fitted classifiers, assemble the per-view
/// systems, stack them, and solve.
pub fn estimate_trust_table<C: ProbabilisticClassifier>(
    ds: &Dataset,
    clfs: &BTreeMap<Channel, C>,
    views: &[View],
) -> Result<TrustTable, TrustError> {
    let modalities = ds.config().modalities.clone();
    let mut table = BTreeMap::new();
    for (scene, sub) in partition_by_scene(ds) {
        let scores = crate::classifiers::score_dataset(clfs, &sub)?;
        let truth: Vec<PoseLabel> = sub.labels().collect();
        let weights = solve_from_scores(&scores, &truth, &modalities, views)?;
        table.insert(scene, weights);
    }
    Ok(table)
}

/// Estimate the trust table from out-of-fold scores: the data is split into
/// internal stratified folds, each fold is scored by classifiers fitted on
/// the remaining folds, and the pooled held-out scores drive the per-scene
/// solves. This keeps the oracle honest when a high-dimensional channel can
/// memorize its training set. Falls back to resubstitution scoring when the
/// data is too small to split.
pub fn estimate_trust_table_oof(
    ds: &Dataset,
    views: &[View],
    params: &TrainParams,
    inner_folds: usize,
    seed: u64,
) -> Result<TrustTable, TrustError> {
    let folds = match stratified_folds(ds, inner_folds, seed) {
        Ok(folds) => folds,
        Err(DomainError::InsufficientSamples { .. }) | Err(DomainError::TooFewFolds(_)) => {
            let clfs = fit_channel_classifiers(ds, params)?;
            return estimate_trust_table(ds, &clfs, views);
        }
        Err(e) => return Err(e.into()),
    };
    let modalities = ds.config().modalities.clone();
    let mut pooled: BTreeMap<SceneCondition, (Vec<ChannelScores>, Vec<PoseLabel>)> =
        BTreeMap::new();
    for fold in &folds {
        let clfs = fit_channel_classifiers(&fold.train, params)?;
        let scores = crate::classifiers::score_dataset(&clfs, &fold.test)?;
        for (point, score) in fold.test.points().iter().zip(scores) {
            let entry = pooled.entry(point.scene).or_default();
            entry.0.push(score);
            entry.1.push(point.label);
        }
    }
    let mut table = BTreeMap::new();
    for (scene, (scores, truth)) in pooled {
        let weights = solve_from_scores(&scores, &truth, &modalities, views)?;
        table.insert(scene, weights);
    }
    Ok(table)
}

/// Assemble per-view design/oracle pairs from channel scores and solve.
pub fn solve_from_scores(
    scores: &[ChannelScores],
    truth: &[PoseLabel],
    modalities: &[Modality],
    views: &[View],
) -> Result<TrustWeights, TrustError> {
    let effective_views: &[View] = if views.is_empty() {
        // viewless-only configurations still form one block
        &[View::Top]
    } else {
        views
    };
    let mut per_view = Vec::with_capacity(effective_views.len());
    for &v in effective_views {
        let blocks: Vec<ScoreBlock> = scores
            .iter()
            .map(|s| ScoreBlock::for_view(s, modalities, v))
            .collect::<Result<_, _>>()?;
        let a = build_design(&blocks)?;
        let b = build_oracle(&blocks, truth)?;
        per_view.push((a, b));
    }
    let (a, b) = stack_views(&per_view)?;
    solve_trust(&a, &b)
}
