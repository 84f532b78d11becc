//! The three experiment pipelines and their shared bookkeeping: metric rows,
//! breakthrough detection, and medians with censoring.
//!
//! Each pipeline is a pure function of its parameters plus in-memory
//! datasets; per-seed work is independent, so callers may fan seeds out
//! across threads and fold the results back in seed order with identical
//! output.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::guidance::GuidanceMatrix;
use crate::net::{init_params, NetworkSpec, ParamSet};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::scouting::{
    build_guidance, make_bit_scout_specs, make_cousin_specs, train_family, ScoutFamily,
    ScoutTrainParams,
};
use crate::tasks::{make_bit_mapping, make_episode, subset_categories, TaskDataset};
use crate::train::{train, StopRule, TrainConfig};
use crate::{NormKind, NormScope, StatKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    OneShot,
    Breakthrough,
    Accumulation,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::OneShot => "one_shot",
            ExperimentKind::Breakthrough => "breakthrough",
            ExperimentKind::Accumulation => "accumulation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Baseline,
    Guided,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::Guided => "guided",
        }
    }
}

/// One per-epoch measurement. `block` is 1-based; `epoch` is 0-based within
/// its block. `test_acc` is absent for tasks judged on training data only.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub seed: u64,
    pub condition: Condition,
    pub block: usize,
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: Option<f64>,
    pub changed_param_fraction: f64,
}

/// Breakthrough bookkeeping for one training run. `epoch` is `None` when the
/// run never crossed the threshold within the cap (censored).
#[derive(Debug, Clone, PartialEq)]
pub struct BreakthroughRecord {
    pub seed: u64,
    pub condition: Condition,
    pub epoch: Option<usize>,
}

/// Everything an experiment emits, in deterministic row order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub experiment: ExperimentKind,
    pub rows: Vec<MetricsRow>,
    pub breakthroughs: Vec<BreakthroughRecord>,
    /// Epoch cap used by breakthrough runs (for "censored at cap" reporting).
    pub epoch_cap: usize,
}

/// Guidance construction settings shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceParams {
    pub enabled: bool,
    pub stat_kind: StatKind,
    pub norm_kind: NormKind,
    pub scope: NormScope,
}

/// Scout family settings. `k` applies to classification scouts, `n_pairs` to
/// bit-mapping scouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoutingParams {
    pub n_scouts: usize,
    pub k: usize,
    pub n_pairs: usize,
    pub lr: f64,
    pub max_epochs: usize,
    pub stop_accuracy: f64,
}

impl ScoutingParams {
    pub fn train_params(&self) -> ScoutTrainParams {
        ScoutTrainParams {
            lr: self.lr,
            max_epochs: self.max_epochs,
            stop_accuracy: self.stop_accuracy,
        }
    }
}

/// Heavy artifacts from one seed of a pipeline, kept so callers can persist
/// checkpoints, manifests, and guidance files.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedArtifacts {
    pub seed: u64,
    pub base_spec: NetworkSpec,
    pub base_params: ParamSet,
    pub family: Option<ScoutFamily>,
    /// Guidance as applied to the trained network (head already resized).
    pub guidance: Option<GuidanceMatrix>,
    pub final_spec: NetworkSpec,
    pub finals: Vec<(Condition, ParamSet)>,
}

/// Output of one seed: its metric rows plus artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub breakthroughs: Vec<BreakthroughRecord>,
    pub artifacts: SeedArtifacts,
}

/// A full experiment outcome: merged metrics plus per-seed artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub seed_artifacts: Vec<SeedArtifacts>,
}

fn merge_seed_runs(
    experiment: ExperimentKind,
    seed_runs: Vec<SeedRun>,
    epoch_cap: usize,
) -> RunOutcome {
    let mut rows = Vec::new();
    let mut breakthroughs = Vec::new();
    let mut seed_artifacts = Vec::new();
    for run in seed_runs {
        rows.extend(run.rows);
        breakthroughs.extend(run.breakthroughs);
        seed_artifacts.push(run.artifacts);
    }
    RunOutcome {
        metrics: RunMetrics {
            experiment,
            rows,
            breakthroughs,
            epoch_cap,
        },
        seed_artifacts,
    }
}

// ---------------------------------------------------------------------------
// One-shot transfer (pre-train, scout, guide, fine-tune on an episode)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct OneShotParams {
    /// Base architecture; the output dimension must match the pre-training
    /// dataset's category count. `init_seed` is ignored (derived per seed).
    pub net: NetworkSpec,
    pub pretrain: TrainConfig,
    pub scouting: ScoutingParams,
    pub guidance: GuidanceParams,
    pub finetune: TrainConfig,
    /// Categories per episode, sampled per seed from the episode pool.
    pub episode_categories: usize,
    pub seeds: Vec<u64>,
}

impl OneShotParams {
    fn validate(&self, pretrain_data: &TaskDataset, episode_pool: &TaskDataset) -> Result<()> {
        self.net.validate()?;
        self.pretrain.validate()?;
        self.finetune.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        if self.net.output_dim() != pretrain_data.n_categories() {
            return Err(Error::Config(format!(
                "network output dim {} does not match pre-training category count {}",
                self.net.output_dim(),
                pretrain_data.n_categories()
            )));
        }
        if self.net.input_dim() != pretrain_data.feature_dim() {
            return Err(Error::Config(format!(
                "network input dim {} does not match pre-training feature dim {}",
                self.net.input_dim(),
                pretrain_data.feature_dim()
            )));
        }
        if episode_pool.feature_dim() != pretrain_data.feature_dim() {
            return Err(Error::Data(format!(
                "episode pool feature dim {} does not match pre-training feature dim {}",
                episode_pool.feature_dim(),
                pretrain_data.feature_dim()
            )));
        }
        if self.episode_categories < 2 {
            return Err(Error::Config("episode needs at least 2 categories".into()));
        }
        if self.episode_categories > episode_pool.n_categories() {
            return Err(Error::Config(format!(
                "episode wants {} categories but the pool has {}",
                self.episode_categories,
                episode_pool.n_categories()
            )));
        }
        Ok(())
    }
}

/// Pre-trains a base, scouts it, and builds the guidance matrix — the shared
/// front half of the one-shot and accumulation pipelines.
fn prepare_guided_base(
    net: &NetworkSpec,
    pretrain: &TrainConfig,
    scouting: &ScoutingParams,
    guidance: &GuidanceParams,
    pretrain_data: &TaskDataset,
    seed: u64,
) -> Result<(NetworkSpec, ParamSet, Option<ScoutFamily>, Option<GuidanceMatrix>)> {
    let base_spec = NetworkSpec::new(
        net.layer_sizes.clone(),
        net.hidden_activation,
        net.output_head,
        derive_seed(seed, stream::INIT),
    )?;
    let start = init_params(&base_spec)?;
    let mut pretrain_cfg = pretrain.clone();
    pretrain_cfg.shuffle_seed = derive_seed(seed, stream::PRETRAIN);
    let base = train(
        &start,
        &base_spec,
        &pretrain_data.to_batch()?,
        None,
        None,
        &pretrain_cfg,
    )?
    .params;

    if !guidance.enabled {
        return Ok((base_spec, base, None, None));
    }

    let specs = make_cousin_specs(
        pretrain_data.n_categories(),
        scouting.k,
        scouting.n_scouts,
        derive_seed(seed, stream::SCOUT_FAMILY),
        scouting.train_params(),
    )?;
    let family = train_family(&base, &base_spec, &specs, Some(pretrain_data))?;
    let g = build_guidance(&family, guidance.stat_kind, guidance.norm_kind, guidance.scope)?;
    Ok((base_spec, base, Some(family), Some(g)))
}

/// Samples episode categories and the transfer-network start state shared by
/// both conditions.
fn prepare_transfer(
    base_spec: &NetworkSpec,
    base: &ParamSet,
    episode_pool: &TaskDataset,
    episode_categories: usize,
    seed: u64,
) -> Result<(NetworkSpec, ParamSet, Vec<usize>)> {
    let mut cat_rng = rng_from_seed(derive_seed(seed, stream::EPISODE_CATEGORIES));
    let mut cats: Vec<usize> =
        index::sample(&mut cat_rng, episode_pool.n_categories(), episode_categories).into_vec();
    cats.sort_unstable();

    let transfer_spec =
        base_spec.with_output_dim(episode_categories, derive_seed(seed, stream::HEAD))?;
    // Head replacement: fresh head from the run seed, identical in both
    // conditions; hidden stack from the base.
    let fresh = init_params(&transfer_spec)?;
    let head_index = base.layers.len() - 1;
    let mut start = base.clone();
    start.layers[head_index] = fresh.layers[head_index].clone();
    Ok((transfer_spec, start, cats))
}

/// Runs one seed of the one-shot pipeline.
pub fn one_shot_seed(
    p: &OneShotParams,
    pretrain_data: &TaskDataset,
    episode_pool: &TaskDataset,
    seed: u64,
) -> Result<SeedRun> {
    let (base_spec, base, family, g_base) = prepare_guided_base(
        &p.net,
        &p.pretrain,
        &p.scouting,
        &p.guidance,
        pretrain_data,
        seed,
    )?;
    let (transfer_spec, start, cats) = prepare_transfer(
        &base_spec,
        &base,
        episode_pool,
        p.episode_categories,
        seed,
    )?;
    let episode = make_episode(
        episode_pool,
        &cats,
        derive_seed(seed, stream::EPISODE_SPLIT),
    )?;
    let guidance = match g_base {
        Some(g) => Some(g.with_head_size(p.episode_categories)?),
        None => None,
    };

    let mut ft_cfg = p.finetune.clone();
    ft_cfg.shuffle_seed = derive_seed(seed, stream::FINETUNE);
    let train_batch = episode.train.to_batch()?;
    let test_batch = episode.test.to_batch()?;

    let mut rows = Vec::new();
    let mut finals = Vec::new();
    for condition in [Condition::Baseline, Condition::Guided] {
        let mask = match condition {
            Condition::Baseline => None,
            Condition::Guided => guidance.as_ref(),
        };
        let outcome = train(&start, &transfer_spec, &train_batch, Some(&test_batch), mask, &ft_cfg)?;
        for r in &outcome.records {
            rows.push(MetricsRow {
                seed,
                condition,
                block: 1,
                epoch: r.epoch,
                train_loss: r.train_loss,
                train_acc: r.train_acc,
                test_acc: r.test_acc,
                changed_param_fraction: r.changed_param_fraction,
            });
        }
        finals.push((condition, outcome.params));
    }

    Ok(SeedRun {
        seed,
        rows,
        breakthroughs: Vec::new(),
        artifacts: SeedArtifacts {
            seed,
            base_spec,
            base_params: base,
            family,
            guidance,
            final_spec: transfer_spec,
            finals,
        },
    })
}

/// Runs the full one-shot experiment over all seeds, sequentially.
pub fn run_one_shot(
    p: &OneShotParams,
    pretrain_data: &TaskDataset,
    episode_pool: &TaskDataset,
) -> Result<RunOutcome> {
    p.validate(pretrain_data, episode_pool)?;
    let seed_runs = p
        .seeds
        .iter()
        .map(|&s| one_shot_seed(p, pretrain_data, episode_pool, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_seed_runs(
        ExperimentKind::OneShot,
        seed_runs,
        p.finetune.max_epochs,
    ))
}

// ---------------------------------------------------------------------------
// Breakthrough (randomized bit mappings, guided vs unguided from random init)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct BreakthroughParams {
    /// Architecture; input/output dims fix the task's bit counts.
    pub net: NetworkSpec,
    /// Rows in the full-size mapping task.
    pub task_rows: usize,
    pub scouting: ScoutingParams,
    pub guidance: GuidanceParams,
    /// Main training; `max_epochs` is the epoch cap.
    pub training: TrainConfig,
    pub threshold: f64,
    pub patience: usize,
    pub seeds: Vec<u64>,
}

impl BreakthroughParams {
    fn validate(&self) -> Result<()> {
        self.net.validate()?;
        self.training.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        if !(0.0 < self.threshold && self.threshold <= 1.0) {
            return Err(Error::Config(format!(
                "breakthrough threshold must be in (0, 1], got {}",
                self.threshold
            )));
        }
        if self.patience == 0 {
            return Err(Error::Config("breakthrough patience must be >= 1".into()));
        }
        Ok(())
    }
}

/// Runs one seed of the breakthrough pipeline: scouts train small fresh
/// mappings from a random base, and a *new* random-init network trains the
/// full-size task guided vs unguided.
pub fn breakthrough_seed(p: &BreakthroughParams, seed: u64) -> Result<SeedRun> {
    let scout_base_spec = NetworkSpec::new(
        p.net.layer_sizes.clone(),
        p.net.hidden_activation,
        p.net.output_head,
        derive_seed(seed, stream::SCOUT_BASE),
    )?;
    let scout_base = init_params(&scout_base_spec)?;

    let (family, guidance) = if p.guidance.enabled {
        let specs = make_bit_scout_specs(
            p.scouting.n_pairs,
            p.scouting.n_scouts,
            derive_seed(seed, stream::SCOUT_FAMILY),
            p.scouting.train_params(),
        )?;
        let family = train_family(&scout_base, &scout_base_spec, &specs, None)?;
        let g = build_guidance(&family, p.guidance.stat_kind, p.guidance.norm_kind, p.guidance.scope)?;
        (Some(family), Some(g))
    } else {
        (None, None)
    };

    // The trained network starts from a completely random state of its own.
    let fresh_spec = NetworkSpec::new(
        p.net.layer_sizes.clone(),
        p.net.hidden_activation,
        p.net.output_head,
        derive_seed(seed, stream::INIT),
    )?;
    let fresh = init_params(&fresh_spec)?;
    let task = make_bit_mapping(
        p.net.input_dim(),
        p.net.output_dim(),
        p.task_rows,
        derive_seed(seed, stream::TASK),
    )?;
    let batch = task.to_batch()?;

    let mut cfg = p.training.clone();
    cfg.stop = StopRule::AccuracySustained {
        threshold: p.threshold,
        patience: p.patience,
    };
    cfg.shuffle_seed = derive_seed(seed, stream::FINETUNE);

    let mut rows = Vec::new();
    let mut breakthroughs = Vec::new();
    let mut finals = Vec::new();
    for condition in [Condition::Baseline, Condition::Guided] {
        let mask = match condition {
            Condition::Baseline => None,
            Condition::Guided => guidance.as_ref(),
        };
        let outcome = train(&fresh, &fresh_spec, &batch, None, mask, &cfg)?;
        let epoch = detect_breakthrough(&outcome.train_acc_curve(), p.threshold, p.patience)?;
        for r in &outcome.records {
            rows.push(MetricsRow {
                seed,
                condition,
                block: 1,
                epoch: r.epoch,
                train_loss: r.train_loss,
                train_acc: r.train_acc,
                test_acc: None,
                changed_param_fraction: r.changed_param_fraction,
            });
        }
        breakthroughs.push(BreakthroughRecord {
            seed,
            condition,
            epoch,
        });
        finals.push((condition, outcome.params));
    }

    Ok(SeedRun {
        seed,
        rows,
        breakthroughs,
        artifacts: SeedArtifacts {
            seed,
            base_spec: scout_base_spec,
            base_params: scout_base,
            family,
            guidance,
            final_spec: fresh_spec,
            finals,
        },
    })
}

/// Runs the full breakthrough experiment over all seeds, sequentially.
pub fn run_breakthrough(p: &BreakthroughParams) -> Result<RunOutcome> {
    p.validate()?;
    let seed_runs = p
        .seeds
        .iter()
        .map(|&s| breakthrough_seed(p, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_seed_runs(
        ExperimentKind::Breakthrough,
        seed_runs,
        p.training.max_epochs,
    ))
}

// ---------------------------------------------------------------------------
// Accumulation (sequential one-shot blocks on the same categories)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationParams {
    pub net: NetworkSpec,
    pub pretrain: TrainConfig,
    pub scouting: ScoutingParams,
    pub guidance: GuidanceParams,
    /// Per-block fine-tuning; `max_epochs` is the per-block epoch count.
    pub finetune: TrainConfig,
    pub episode_categories: usize,
    pub blocks: usize,
    pub seeds: Vec<u64>,
}

/// One seed of the accumulation pipeline: the transfer training continues
/// across `blocks` blocks, each on a freshly drawn single example per
/// category, always evaluated on the same held-out test pool.
pub fn accumulation_seed(
    p: &AccumulationParams,
    pretrain_data: &TaskDataset,
    episode_pool: &TaskDataset,
    seed: u64,
) -> Result<SeedRun> {
    let (base_spec, base, family, g_base) = prepare_guided_base(
        &p.net,
        &p.pretrain,
        &p.scouting,
        &p.guidance,
        pretrain_data,
        seed,
    )?;
    let (transfer_spec, start, cats) = prepare_transfer(
        &base_spec,
        &base,
        episode_pool,
        p.episode_categories,
        seed,
    )?;
    let guidance = match g_base {
        Some(g) => Some(g.with_head_size(p.episode_categories)?),
        None => None,
    };

    // Pre-sample one train example per category per block; everything left
    // over forms the fixed held-out test pool.
    let sub = subset_categories(episode_pool, &cats, None)?;
    let counts = sub.counts_per_category();
    for (label, &count) in counts.iter().enumerate() {
        if count < p.blocks + 1 {
            return Err(Error::Data(format!(
                "category {} has {count} examples; {} blocks need at least {}",
                sub.category_names[label],
                p.blocks,
                p.blocks + 1
            )));
        }
    }
    let k = sub.n_categories();
    let mut rng = rng_from_seed(derive_seed(seed, stream::BLOCKS));
    // Per category: which of its examples go to blocks 1..=B.
    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(k);
    for label in 0..k {
        chosen.push(index::sample(&mut rng, counts[label], p.blocks).into_vec());
    }

    let placeholder = crate::tasks::Example {
        features: Vec::new(),
        label: 0,
    };
    let mut block_examples: Vec<Vec<crate::tasks::Example>> =
        alloc::vec![alloc::vec![placeholder; k]; p.blocks];
    let mut test_examples = Vec::new();
    let mut seen = alloc::vec![0usize; k];
    for ex in &sub.examples {
        let nth = seen[ex.label];
        seen[ex.label] += 1;
        match chosen[ex.label].iter().position(|&c| c == nth) {
            Some(block) => block_examples[block][ex.label] = ex.clone(),
            None => test_examples.push(ex.clone()),
        }
    }

    let make_dataset = |examples: Vec<crate::tasks::Example>| TaskDataset {
        examples,
        category_names: sub.category_names.clone(),
        source: sub.source,
    };
    let test_batch = make_dataset(test_examples).to_batch()?;

    let mut rows = Vec::new();
    let mut finals = Vec::new();
    for condition in [Condition::Baseline, Condition::Guided] {
        let mask = match condition {
            Condition::Baseline => None,
            Condition::Guided => guidance.as_ref(),
        };
        let mut params = start.clone();
        for (b, examples) in block_examples.iter().enumerate() {
            let block = b + 1;
            let block_batch = make_dataset(examples.clone()).to_batch()?;
            let mut cfg = p.finetune.clone();
            cfg.stop = StopRule::None;
            cfg.shuffle_seed = derive_seed(seed, derive_seed(stream::FINETUNE, block as u64));
            let outcome = train(&params, &transfer_spec, &block_batch, Some(&test_batch), mask, &cfg)?;
            for r in &outcome.records {
                rows.push(MetricsRow {
                    seed,
                    condition,
                    block,
                    epoch: r.epoch,
                    train_loss: r.train_loss,
                    train_acc: r.train_acc,
                    test_acc: r.test_acc,
                    changed_param_fraction: r.changed_param_fraction,
                });
            }
            params = outcome.params;
        }
        finals.push((condition, params));
    }

    Ok(SeedRun {
        seed,
        rows,
        breakthroughs: Vec::new(),
        artifacts: SeedArtifacts {
            seed,
            base_spec,
            base_params: base,
            family,
            guidance,
            final_spec: transfer_spec,
            finals,
        },
    })
}

/// Runs the full accumulation experiment over all seeds, sequentially.
pub fn run_accumulation(
    p: &AccumulationParams,
    pretrain_data: &TaskDataset,
    episode_pool: &TaskDataset,
) -> Result<RunOutcome> {
    if p.blocks == 0 {
        return Err(Error::Config("blocks must be >= 1".into()));
    }
    let as_one_shot = OneShotParams {
        net: p.net.clone(),
        pretrain: p.pretrain.clone(),
        scouting: p.scouting,
        guidance: p.guidance,
        finetune: p.finetune.clone(),
        episode_categories: p.episode_categories,
        seeds: p.seeds.clone(),
    };
    as_one_shot.validate(pretrain_data, episode_pool)?;
    let seed_runs = p
        .seeds
        .iter()
        .map(|&s| accumulation_seed(p, pretrain_data, episode_pool, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_seed_runs(
        ExperimentKind::Accumulation,
        seed_runs,
        p.finetune.max_epochs,
    ))
}

// ---------------------------------------------------------------------------
// Breakthrough detection and medians
// ---------------------------------------------------------------------------

/// First epoch `e` such that accuracy stays at or above `threshold` for all
/// of `[e, e + patience)`; `None` if the curve never sustains the threshold.
pub fn detect_breakthrough(
    curve: &[f64],
    threshold: f64,
    patience: usize,
) -> Result<Option<usize>> {
    if curve.is_empty() {
        return Err(Error::Argument("breakthrough curve is empty".into()));
    }
    if !(0.0 < threshold && threshold <= 1.0) {
        return Err(Error::Argument(format!(
            "threshold must be in (0, 1], got {threshold}"
        )));
    }
    if patience == 0 {
        return Err(Error::Argument("patience must be >= 1".into()));
    }
    let mut run = 0usize;
    for (e, &acc) in curve.iter().enumerate() {
        if acc >= threshold {
            run += 1;
            if run == patience {
                return Ok(Some(e + 1 - patience));
            }
        } else {
            run = 0;
        }
    }
    Ok(None)
}

/// Plain median (mean of the two middle values for even counts).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Median of breakthrough epochs under censoring. Censored runs never
/// contribute a finite epoch: they sort after every finite value, and if the
/// median position touches one the median itself is censored (reported as
/// ">= cap").
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpochMedian {
    Finite(f64),
    Censored,
}

pub fn breakthrough_median(epochs: &[Option<usize>]) -> Option<EpochMedian> {
    if epochs.is_empty() {
        return None;
    }
    let mut sorted: Vec<Option<usize>> = epochs.to_vec();
    sorted.sort_by_key(|e| e.map_or(u64::MAX, |v| v as u64));
    let n = sorted.len();
    let value = if n % 2 == 1 {
        match sorted[n / 2] {
            Some(e) => EpochMedian::Finite(e as f64),
            None => EpochMedian::Censored,
        }
    } else {
        match (sorted[n / 2 - 1], sorted[n / 2]) {
            (Some(a), Some(b)) => EpochMedian::Finite(0.5 * (a + b) as f64),
            _ => EpochMedian::Censored,
        }
    };
    Some(value)
}
