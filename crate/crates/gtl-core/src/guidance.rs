//! Guidance matrices: per-parameter deviation statistics from a scout family,
//! normalization into non-negative multipliers, and the elementwise gradient
//! mask itself.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::net::{abs, GradSet, ParamSet};

/// How scout deviations are aggregated per parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    /// `m = (1/n) * sum_i (base - scout_i)^2` — emphasizes big changes.
    Squared,
    /// `m = (1/n) * sum_i |base - scout_i|` — treats all changes more equally.
    Absolute,
}

impl StatKind {
    pub fn name(self) -> &'static str {
        match self {
            StatKind::Squared => "squared",
            StatKind::Absolute => "absolute",
        }
    }
}

/// How the deviation statistic is rescaled into guidance values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `G = M / max(M)` — conservative, values in [0, 1].
    Max,
    /// `G = M / mean(M)` — faster, values may exceed 1.
    Mean,
    /// `G = (M - min(M)) / (max(M) - min(M))` — at least one exact zero.
    ForcedZero,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Max => "max",
            NormKind::Mean => "mean",
            NormKind::ForcedZero => "forced_zero",
        }
    }
}

/// Whether normalization scalars are taken over all parameters at once or
/// separately for the weight group and the bias group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormScope {
    #[default]
    Global,
    PerGroup,
}

impl NormScope {
    pub fn name(self) -> &'static str {
        match self {
            NormScope::Global => "global",
            NormScope::PerGroup => "per_group",
        }
    }
}

/// Per-parameter mean deviation of scout outcomes from the base parameters.
/// A value is zero exactly when every scout left that parameter at its base
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationStat {
    pub values: ParamSet,
    pub stat_kind: StatKind,
    pub n_scouts: usize,
}

/// Per-parameter non-negative multipliers, shape-congruent with the
/// [`ParamSet`] they guide.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceMatrix {
    pub values: ParamSet,
    pub norm_kind: NormKind,
    pub stat_kind: StatKind,
    pub n_scouts: usize,
}

impl GuidanceMatrix {
    /// All-ones matrix: guided training equals unguided training.
    pub fn ones_like(params: &ParamSet, stat_kind: StatKind, norm_kind: NormKind) -> GuidanceMatrix {
        let mut values = params.zeros_like();
        for layer in &mut values.layers {
            for v in layer.weights.values_mut() {
                *v = 1.0;
            }
            for v in layer.biases.iter_mut() {
                *v = 1.0;
            }
        }
        GuidanceMatrix {
            values,
            norm_kind,
            stat_kind,
            n_scouts: 0,
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter_values()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Default epsilon for sparsity reporting: 1% of the largest guidance
    /// value.
    pub fn default_sparsity_eps(&self) -> f64 {
        0.01 * self.max_value()
    }

    /// Same hidden-stack guidance with the output layer replaced by an
    /// all-ones layer of shape `(fan_in of current head, fan_out)`. Used when
    /// a transfer task needs a different head size; the head stays fully
    /// trainable either way.
    pub fn with_head_size(&self, fan_out: usize) -> Result<GuidanceMatrix> {
        if fan_out == 0 {
            return Err(Error::Argument("head size must be >= 1".into()));
        }
        let mut out = self.clone();
        let head = out
            .values
            .layers
            .last_mut()
            .ok_or_else(|| Error::Shape("guidance matrix has no layers".into()))?;
        let fan_in = head.fan_in();
        *head = crate::net::LayerParams::zeros(fan_in, fan_out);
        for v in head.weights.values_mut() {
            *v = 1.0;
        }
        for v in head.biases.iter_mut() {
            *v = 1.0;
        }
        Ok(out)
    }
}

/// Computes the per-parameter deviation statistic of `scouts` from `base`.
pub fn deviation_stat(
    base: &ParamSet,
    scouts: &[ParamSet],
    stat_kind: StatKind,
) -> Result<DeviationStat> {
    if scouts.is_empty() {
        return Err(Error::Argument(
            "deviation statistic needs at least one scout".into(),
        ));
    }
    for (i, scout) in scouts.iter().enumerate() {
        if !scout.congruent_with(base) {
            return Err(Error::Shape(format!(
                "scout {i} shape {:?} does not match base shape {:?}",
                scout.shape(),
                base.shape()
            )));
        }
    }

    let n = scouts.len() as f64;
    let mut acc = base.zeros_like();
    // Fold in scout-index order so the result is deterministic.
    for scout in scouts {
        let contrib = base.zip_map(scout, |b, s| match stat_kind {
            StatKind::Squared => (b - s) * (b - s),
            StatKind::Absolute => abs(b - s),
        })?;
        acc = acc.zip_map(&contrib, |a, c| a + c)?;
    }
    let values = acc.map(|a| a / n);

    Ok(DeviationStat {
        values,
        stat_kind,
        n_scouts: scouts.len(),
    })
}

fn minmax_mean(values: impl Iterator<Item = f64>) -> (f64, f64, f64, usize) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        min = min.min(v);
        max = max.max(v);
        sum += v;
        count += 1;
    }
    (min, max, sum / count as f64, count)
}

fn rescale(v: f64, norm: NormKind, min: f64, max: f64, mean: f64) -> f64 {
    match norm {
        NormKind::Max => v / max,
        NormKind::Mean => v / mean,
        NormKind::ForcedZero => (v - min) / (max - min),
    }
}

/// Normalizes a deviation statistic into a guidance matrix.
///
/// With [`NormScope::Global`] the normalization scalars are taken over the
/// union of all weight and bias values; with [`NormScope::PerGroup`] the
/// weight group and the bias group are rescaled independently.
pub fn normalize(stat: &DeviationStat, norm_kind: NormKind, scope: NormScope) -> Result<GuidanceMatrix> {
    let total = stat.values.param_count();
    if norm_kind == NormKind::ForcedZero && total < 2 {
        return Err(Error::Argument(
            "forced_zero normalization needs at least 2 parameters".into(),
        ));
    }

    let mut out = stat.values.clone();
    match scope {
        NormScope::Global => {
            let (min, max, mean, _) = minmax_mean(stat.values.iter_values());
            check_degenerate(norm_kind, min, max, "all parameters")?;
            for layer in &mut out.layers {
                for v in layer.weights.values_mut() {
                    *v = rescale(*v, norm_kind, min, max, mean);
                }
                for v in layer.biases.iter_mut() {
                    *v = rescale(*v, norm_kind, min, max, mean);
                }
            }
        }
        NormScope::PerGroup => {
            let weights = stat
                .values
                .layers
                .iter()
                .flat_map(|l| l.weights.values().iter().copied());
            let biases = stat
                .values
                .layers
                .iter()
                .flat_map(|l| l.biases.iter().copied());
            let (w_min, w_max, w_mean, _) = minmax_mean(weights);
            let (b_min, b_max, b_mean, _) = minmax_mean(biases);
            check_degenerate(norm_kind, w_min, w_max, "weights")?;
            check_degenerate(norm_kind, b_min, b_max, "biases")?;
            for layer in &mut out.layers {
                for v in layer.weights.values_mut() {
                    *v = rescale(*v, norm_kind, w_min, w_max, w_mean);
                }
                for v in layer.biases.iter_mut() {
                    *v = rescale(*v, norm_kind, b_min, b_max, b_mean);
                }
            }
        }
    }

    Ok(GuidanceMatrix {
        values: out,
        norm_kind,
        stat_kind: stat.stat_kind,
        n_scouts: stat.n_scouts,
    })
}

fn check_degenerate(norm_kind: NormKind, min: f64, max: f64, group: &str) -> Result<()> {
    if max == 0.0 {
        return Err(Error::DegenerateScouting(format!(
            "no scout moved any parameter ({group}); an all-zero guidance matrix would freeze the network"
        )));
    }
    if norm_kind == NormKind::ForcedZero && max == min {
        return Err(Error::DegenerateScouting(format!(
            "forced_zero normalization is undefined when all deviations are equal ({group})"
        )));
    }
    Ok(())
}

/// Elementwise (Hadamard) product of gradients with guidance values.
/// Parameters with `g = 0` receive exactly zero update, forever.
pub fn apply_guidance(grads: &GradSet, g: &GuidanceMatrix) -> Result<GradSet> {
    if !grads.congruent_with(&g.values) {
        return Err(Error::Shape(format!(
            "guidance shape {:?} does not match gradient shape {:?}",
            g.values.shape(),
            grads.shape()
        )));
    }
    grads.zip_map(&g.values, |d, gv| d * gv)
}

/// Histogram of guidance values: `n_bins` equal-width bins over
/// `[0, max(g)]`, half-open except the last (closed) bin, returned as
/// `(left_edge, count)` pairs. Counts sum to the parameter count.
pub fn guidance_histogram(g: &GuidanceMatrix, n_bins: usize) -> Result<Vec<(f64, usize)>> {
    if n_bins < 2 {
        return Err(Error::Argument(format!(
            "histogram needs at least 2 bins, got {n_bins}"
        )));
    }
    let max = g.max_value();
    let width = max / n_bins as f64;
    let mut counts = alloc::vec![0usize; n_bins];
    for v in g.values.iter_values() {
        let bin = if width > 0.0 {
            ((v / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        counts[bin] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as f64 * width, c))
        .collect())
}

/// Fraction of parameters with guidance value at most `eps`.
pub fn sparsity_fraction(g: &GuidanceMatrix, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::Argument(format!("eps must be >= 0, got {eps}")));
    }
    let total = g.values.param_count();
    let small = g.values.iter_values().filter(|&v| v <= eps).count();
    Ok(small as f64 / total as f64)
}
