//! Scout families: simplified "cousin" subtasks trained from a common base,
//! whose parameter excursions feed the guidance matrix.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;
use rand_chacha::rand_core::RngCore;

use crate::error::{Error, Result};
use crate::guidance::{
    deviation_stat, normalize, GuidanceMatrix, NormKind, NormScope, StatKind,
};
use crate::net::{init_params, NetworkSpec, ParamSet};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::tasks::{make_bit_mapping, subset_categories, TaskDataset};
use crate::train::{train, BatchMode, StopRule, TrainConfig};

/// What a scout trains on: a category subset of the source dataset, or a
/// fresh randomized bit mapping with the given number of rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoutTask {
    Categories(Vec<usize>),
    BitRows(usize),
}

/// One scout's subtask and training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoutSpec {
    pub task: ScoutTask,
    pub max_epochs: usize,
    pub stop_accuracy: f64,
    pub lr: f64,
    pub seed: u64,
}

impl ScoutSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::Config("scout max_epochs must be >= 1".into()));
        }
        if !(0.0 < self.stop_accuracy && self.stop_accuracy <= 1.0) {
            return Err(Error::Config(format!(
                "scout stop_accuracy must be in (0, 1], got {}",
                self.stop_accuracy
            )));
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return Err(Error::Config(format!(
                "scout lr must be >= 0, got {}",
                self.lr
            )));
        }
        if let ScoutTask::Categories(cats) = &self.task {
            if cats.len() < 2 {
                return Err(Error::Config(
                    "classification scouts need at least 2 categories".into(),
                ));
            }
        }
        Ok(())
    }

    /// Compact task descriptor for manifests and guidance-file metadata.
    pub fn describe_task(&self) -> alloc::string::String {
        match &self.task {
            ScoutTask::Categories(cats) => format!("categories:{cats:?}"),
            ScoutTask::BitRows(n) => format!("bit_rows:{n}"),
        }
    }
}

/// Shared training settings used when building a family of scout specs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoutTrainParams {
    pub lr: f64,
    pub max_epochs: usize,
    pub stop_accuracy: f64,
}

/// Builds `n_scouts` classification scout specs, each holding `k` distinct
/// categories drawn uniformly without replacement. Sampling is independent
/// across scouts, so shared categories (cousinship) arise naturally.
/// Deterministic in `seed`; each scout gets its own derived training seed.
pub fn make_cousin_specs(
    total_categories: usize,
    k: usize,
    n_scouts: usize,
    seed: u64,
    params: ScoutTrainParams,
) -> Result<Vec<ScoutSpec>> {
    if k < 2 || k >= total_categories {
        return Err(Error::Argument(format!(
            "scout category count k={k} must satisfy 2 <= k < total categories ({total_categories})"
        )));
    }
    if n_scouts == 0 {
        return Err(Error::Argument("n_scouts must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut specs = Vec::with_capacity(n_scouts);
    for _ in 0..n_scouts {
        let mut cats: Vec<usize> = index::sample(&mut rng, total_categories, k).into_vec();
        cats.sort_unstable();
        let scout_seed = rng.next_u64();
        let spec = ScoutSpec {
            task: ScoutTask::Categories(cats),
            max_epochs: params.max_epochs,
            stop_accuracy: params.stop_accuracy,
            lr: params.lr,
            seed: scout_seed,
        };
        spec.validate()?;
        specs.push(spec);
    }
    Ok(specs)
}

/// Builds `n_scouts` bit-mapping scout specs; each scout later generates its
/// own fresh random mapping with `n_pairs` rows from its derived seed.
pub fn make_bit_scout_specs(
    n_pairs: usize,
    n_scouts: usize,
    seed: u64,
    params: ScoutTrainParams,
) -> Result<Vec<ScoutSpec>> {
    if n_pairs == 0 {
        return Err(Error::Argument("n_pairs must be >= 1".into()));
    }
    if n_scouts == 0 {
        return Err(Error::Argument("n_scouts must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..n_scouts)
        .map(|_| ScoutSpec {
            task: ScoutTask::BitRows(n_pairs),
            max_epochs: params.max_epochs,
            stop_accuracy: params.stop_accuracy,
            lr: params.lr,
            seed: rng.next_u64(),
        })
        .collect())
}

/// A trained scout: final parameters aligned to the base shape, plus the
/// accuracy it reached and the epochs it used.
///
/// For classification scouts the throwaway k-way head is already dropped:
/// `final_params` holds the trained hidden stack with the *base* head copied
/// back in, so every outcome is shape-congruent with the base.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoutOutcome {
    pub spec: ScoutSpec,
    pub final_params: ParamSet,
    pub accuracy: f64,
    pub epochs_used: usize,
}

/// How scout heads relate to the base head, which decides what the deviation
/// statistics may cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadMode {
    /// Scouts trained fresh k-way heads; statistics cover the shared hidden
    /// stack only and head guidance defaults to 1.
    Throwaway,
    /// Scout heads have the base head's shape; statistics cover the whole
    /// network.
    Shared,
}

/// The base parameters plus every scout outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoutFamily {
    pub base: ParamSet,
    pub spec: NetworkSpec,
    pub scouts: Vec<ScoutOutcome>,
    pub head_mode: HeadMode,
}

impl ScoutFamily {
    /// Assembles a family from independently trained outcomes, inferring the
    /// head mode and checking shape congruence.
    pub fn from_outcomes(
        base: ParamSet,
        spec: NetworkSpec,
        scouts: Vec<ScoutOutcome>,
    ) -> Result<ScoutFamily> {
        if scouts.is_empty() {
            return Err(Error::Argument("scout family is empty".into()));
        }
        let head_mode = match scouts[0].spec.task {
            ScoutTask::Categories(_) => HeadMode::Throwaway,
            ScoutTask::BitRows(_) => HeadMode::Shared,
        };
        for (i, outcome) in scouts.iter().enumerate() {
            let mode = match outcome.spec.task {
                ScoutTask::Categories(_) => HeadMode::Throwaway,
                ScoutTask::BitRows(_) => HeadMode::Shared,
            };
            if mode != head_mode {
                return Err(Error::Argument(
                    "scout family mixes classification and bit-mapping scouts".into(),
                ));
            }
            if !outcome.final_params.congruent_with(&base) {
                return Err(Error::Shape(format!(
                    "scout {i} parameters are not congruent with the base"
                )));
            }
        }
        Ok(ScoutFamily {
            base,
            spec,
            scouts,
            head_mode,
        })
    }

    pub fn n_scouts(&self) -> usize {
        self.scouts.len()
    }
}

/// Trains one scout from the shared base.
///
/// Classification scouts (`ScoutTask::Categories`) need `data`; they train a
/// fresh, seed-initialized k-way head on top of the base hidden stack, on the
/// category-restricted dataset with labels re-indexed `0..k-1`. Bit-mapping
/// scouts generate their own task from their seed and must be called with
/// `data = None`; they train the full base-shaped network.
///
/// Training is full-batch SGD at the scout's learning rate, stopping at the
/// earlier of `max_epochs` or train accuracy >= `stop_accuracy`.
pub fn train_scout(
    base: &ParamSet,
    spec: &NetworkSpec,
    scout: &ScoutSpec,
    data: Option<&TaskDataset>,
) -> Result<ScoutOutcome> {
    scout.validate()?;
    let cfg = TrainConfig {
        lr: scout.lr,
        momentum: 0.0,
        max_epochs: scout.max_epochs,
        batch: BatchMode::Full,
        stop: StopRule::AccuracyOnce(scout.stop_accuracy),
        shuffle_seed: derive_seed(scout.seed, stream::FINETUNE),
    };

    match &scout.task {
        ScoutTask::Categories(cats) => {
            let data = data.ok_or_else(|| {
                Error::Argument("classification scouts need a source dataset".into())
            })?;
            let sub = subset_categories(data, cats, None)?;
            if sub.is_empty() {
                return Err(Error::Data("scout subtask has no examples".into()));
            }
            let k = cats.len();
            let scout_spec = spec.with_output_dim(k, scout.seed)?;
            // Fresh head from the scout's seed; hidden stack copied from base.
            let fresh = init_params(&scout_spec)?;
            let mut params = base.clone();
            let head_index = params.layers.len() - 1;
            params.layers[head_index] = fresh.layers[head_index].clone();

            let outcome = train(&params, &scout_spec, &sub.to_batch()?, None, None, &cfg)?;
            let accuracy = outcome.final_train_acc();
            let epochs_used = outcome.epochs_used;

            // Align back to the base shape: trained hidden stack, base head.
            let mut final_params = outcome.params;
            final_params.layers[head_index] = base.layers[head_index].clone();
            Ok(ScoutOutcome {
                spec: scout.clone(),
                final_params,
                accuracy,
                epochs_used,
            })
        }
        ScoutTask::BitRows(n_pairs) => {
            if data.is_some() {
                return Err(Error::Argument(
                    "bit-mapping scouts generate their own task; pass no dataset".into(),
                ));
            }
            let task = make_bit_mapping(
                spec.input_dim(),
                spec.output_dim(),
                *n_pairs,
                derive_seed(scout.seed, stream::TASK),
            )?;
            let outcome = train(base, spec, &task.to_batch()?, None, None, &cfg)?;
            let accuracy = outcome.final_train_acc();
            let epochs_used = outcome.epochs_used;
            Ok(ScoutOutcome {
                spec: scout.clone(),
                final_params: outcome.params,
                accuracy,
                epochs_used,
            })
        }
    }
}

/// Trains every scout in order and assembles the family. Scouts are
/// independent, so callers may instead train them in parallel and use
/// [`ScoutFamily::from_outcomes`]; the result is identical.
pub fn train_family(
    base: &ParamSet,
    spec: &NetworkSpec,
    scout_specs: &[ScoutSpec],
    data: Option<&TaskDataset>,
) -> Result<ScoutFamily> {
    let scouts = scout_specs
        .iter()
        .map(|s| train_scout(base, spec, s, data))
        .collect::<Result<Vec<_>>>()?;
    ScoutFamily::from_outcomes(base.clone(), spec.clone(), scouts)
}

/// Computes the guidance matrix for a family: deviation statistics composed
/// with normalization.
///
/// For throwaway-head families the statistics and normalization scalars cover
/// the shared hidden stack only, and the head layer gets guidance 1.0 (fully
/// trainable). For shared-head families the whole network participates.
pub fn build_guidance(
    family: &ScoutFamily,
    stat_kind: StatKind,
    norm_kind: NormKind,
    scope: NormScope,
) -> Result<GuidanceMatrix> {
    if family.scouts.is_empty() {
        return Err(Error::Argument("scout family is empty".into()));
    }
    match family.head_mode {
        HeadMode::Shared => {
            let finals: Vec<ParamSet> = family
                .scouts
                .iter()
                .map(|s| s.final_params.clone())
                .collect();
            let stat = deviation_stat(&family.base, &finals, stat_kind)?;
            normalize(&stat, norm_kind, scope)
        }
        HeadMode::Throwaway => {
            let n_layers = family.base.layers.len();
            if n_layers < 2 {
                return Err(Error::DegenerateScouting(
                    "throwaway-head scouts need a hidden stack, but the network has a single layer"
                        .into(),
                ));
            }
            let hidden = |p: &ParamSet| ParamSet {
                layers: p.layers[..n_layers - 1].to_vec(),
            };
            let finals: Vec<ParamSet> =
                family.scouts.iter().map(|s| hidden(&s.final_params)).collect();
            let stat = deviation_stat(&hidden(&family.base), &finals, stat_kind)?;
            let mut g = normalize(&stat, norm_kind, scope)?;
            let head = family.base.layers[n_layers - 1].clone();
            let mut ones_head = crate::net::LayerParams::zeros(head.fan_in(), head.fan_out());
            for v in ones_head.weights.values_mut() {
                *v = 1.0;
            }
            for v in ones_head.biases.iter_mut() {
                *v = 1.0;
            }
            g.values.layers.push(ones_head);
            Ok(g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Activation, OutputHead};
    use crate::tasks::{Example, TaskSource};
    use alloc::string::ToString;
    use alloc::vec;

    fn gaussian_blobs() -> TaskDataset {
        // 3 linearly separable clusters in 2D, 6 points each, laid out by hand.
        let centers = [(0.0, 1.0), (1.0, 0.0), (-1.0, -1.0)];
        let offsets = [
            (0.05, 0.0),
            (-0.05, 0.02),
            (0.0, -0.04),
            (0.08, 0.05),
            (-0.02, -0.06),
            (0.01, 0.03),
        ];
        let mut examples = Vec::new();
        for (label, &(cx, cy)) in centers.iter().enumerate() {
            for &(dx, dy) in &offsets {
                examples.push(Example {
                    features: vec![cx + dx, cy + dy],
                    label,
                });
            }
        }
        TaskDataset {
            examples,
            category_names: vec!["c0".to_string(), "c1".to_string(), "c2".to_string()],
            source: TaskSource::Mnist,
        }
    }

    fn net_spec() -> NetworkSpec {
        NetworkSpec::new(
            vec![2, 6, 3],
            Activation::Tanh,
            OutputHead::SoftmaxCe,
            21,
        )
        .unwrap()
    }

    fn scout_params() -> ScoutTrainParams {
        ScoutTrainParams {
            lr: 0.5,
            max_epochs: 300,
            stop_accuracy: 0.95,
        }
    }

    #[test]
    fn cousin_specs_are_deterministic() {
        let a = make_cousin_specs(10, 3, 5, 42, scout_params()).unwrap();
        let b = make_cousin_specs(10, 3, 5, 42, scout_params()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        // Derived training seeds are distinct.
        let mut seeds: Vec<u64> = a.iter().map(|s| s.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 5);
    }

    #[test]
    fn cousin_specs_sample_valid_subsets() {
        // total=3, k=2: every sampled pair must be one of the 3 possible
        // 2-subsets of {0,1,2}.
        let specs = make_cousin_specs(3, 2, 100, 7, scout_params()).unwrap();
        let valid = [vec![0, 1], vec![0, 2], vec![1, 2]];
        for spec in &specs {
            let ScoutTask::Categories(cats) = &spec.task else {
                panic!("expected categories");
            };
            assert!(valid.contains(cats), "unexpected subset {cats:?}");
        }
    }

    #[test]
    fn cousins_with_k_total_minus_one_share_categories() {
        // Pigeonhole: two (total-1)-subsets of a total-element set overlap in
        // at least total-2 elements.
        let specs = make_cousin_specs(5, 4, 2, 11, scout_params()).unwrap();
        let get = |i: usize| -> Vec<usize> {
            let ScoutTask::Categories(c) = &specs[i].task else {
                panic!()
            };
            c.clone()
        };
        let (a, b) = (get(0), get(1));
        let shared = a.iter().filter(|x| b.contains(x)).count();
        assert!(shared >= 3);
    }

    #[test]
    fn cousin_specs_reject_bad_k() {
        assert!(make_cousin_specs(10, 1, 3, 0, scout_params()).is_err());
        assert!(make_cousin_specs(10, 10, 3, 0, scout_params()).is_err());
    }

    #[test]
    fn zero_lr_scout_returns_base_exactly() {
        let spec = net_spec();
        let base = init_params(&spec).unwrap();
        let scout = ScoutSpec {
            task: ScoutTask::Categories(vec![0, 1]),
            max_epochs: 1,
            stop_accuracy: 1.0,
            lr: 0.0,
            seed: 3,
        };
        let out = train_scout(&base, &spec, &scout, Some(&gaussian_blobs())).unwrap();
        assert!(out.final_params.bits_eq(&base));
        assert_eq!(out.epochs_used, 1);
    }

    #[test]
    fn scout_reaches_stop_accuracy_on_separable_toy_set() {
        let spec = net_spec();
        let base = init_params(&spec).unwrap();
        let scout = ScoutSpec {
            task: ScoutTask::Categories(vec![0, 2]),
            max_epochs: 500,
            stop_accuracy: 0.9,
            lr: 0.5,
            seed: 17,
        };
        let out = train_scout(&base, &spec, &scout, Some(&gaussian_blobs())).unwrap();
        assert!(out.accuracy >= 0.9);
        assert!(out.epochs_used < 500);
    }

    #[test]
    fn identical_scout_specs_give_bit_identical_outcomes() {
        let spec = net_spec();
        let base = init_params(&spec).unwrap();
        let scout = ScoutSpec {
            task: ScoutTask::Categories(vec![1, 2]),
            max_epochs: 50,
            stop_accuracy: 1.0,
            lr: 0.3,
            seed: 8,
        };
        let data = gaussian_blobs();
        let a = train_scout(&base, &spec, &scout, Some(&data)).unwrap();
        let b = train_scout(&base, &spec, &scout, Some(&data)).unwrap();
        assert!(a.final_params.bits_eq(&b.final_params));
        assert_eq!(a.epochs_used, b.epochs_used);
    }

    #[test]
    fn classification_scouts_never_touch_the_base_head() {
        let spec = net_spec();
        let base = init_params(&spec).unwrap();
        let specs = make_cousin_specs(3, 2, 3, 99, scout_params()).unwrap();
        let family = train_family(&base, &spec, &specs, Some(&gaussian_blobs())).unwrap();
        assert_eq!(family.head_mode, HeadMode::Throwaway);
        for scout in &family.scouts {
            let head = scout.final_params.layers.last().unwrap();
            let base_head = base.layers.last().unwrap();
            assert!(head.weights.bits_eq(&base_head.weights));
        }
    }

    #[test]
    fn degenerate_family_errors() {
        let spec = net_spec();
        let base = init_params(&spec).unwrap();
        // A scout that never moved (lr = 0).
        let scout = ScoutSpec {
            task: ScoutTask::Categories(vec![0, 1]),
            max_epochs: 1,
            stop_accuracy: 1.0,
            lr: 0.0,
            seed: 3,
        };
        let family = train_family(&base, &spec, &[scout], Some(&gaussian_blobs())).unwrap();
        assert!(matches!(
            build_guidance(&family, StatKind::Squared, NormKind::Max, NormScope::Global),
            Err(Error::DegenerateScouting(_))
        ));
    }

    #[test]
    fn single_moved_parameter_gives_one_hot_guidance() {
        let spec = net_spec();
        let base = init_params(&spec).unwrap();
        let mut moved = base.clone();
        let bumped = moved.layers[0].weights.get(1, 2) + 0.5;
        moved.layers[0].weights.set(1, 2, bumped);
        let outcome = ScoutOutcome {
            spec: ScoutSpec {
                task: ScoutTask::Categories(vec![0, 1]),
                max_epochs: 1,
                stop_accuracy: 1.0,
                lr: 0.1,
                seed: 0,
            },
            final_params: moved,
            accuracy: 1.0,
            epochs_used: 1,
        };
        let family = ScoutFamily::from_outcomes(base.clone(), spec, vec![outcome]).unwrap();
        let g = build_guidance(&family, StatKind::Squared, NormKind::Max, NormScope::Global)
            .unwrap();
        // Hidden stack: exactly one 1 and zeros elsewhere; head layer all ones.
        let hidden_values: Vec<f64> = g.values.layers[0]
            .weights
            .values()
            .iter()
            .chain(g.values.layers[0].biases.iter())
            .copied()
            .collect();
        assert_eq!(hidden_values.iter().filter(|&&v| v == 1.0).count(), 1);
        assert!(hidden_values.iter().all(|&v| v == 1.0 || v == 0.0));
        assert!(g.values.layers.last().unwrap().weights.values().iter().all(|&v| v == 1.0));
        // Congruent with the base network.
        assert!(g.values.congruent_with(&family.base));
    }

    #[test]
    fn bit_scouts_cover_the_whole_network() {
        let spec = NetworkSpec::new(
            vec![4, 6, 4],
            Activation::Tanh,
            OutputHead::SigmoidBce,
            5,
        )
        .unwrap();
        let base = init_params(&spec).unwrap();
        let specs = make_bit_scout_specs(
            8,
            3,
            77,
            ScoutTrainParams {
                lr: 0.8,
                max_epochs: 60,
                stop_accuracy: 1.0,
            },
        )
        .unwrap();
        let family = train_family(&base, &spec, &specs, None).unwrap();
        assert_eq!(family.head_mode, HeadMode::Shared);
        let g = build_guidance(&family, StatKind::Squared, NormKind::Max, NormScope::Global)
            .unwrap();
        assert!(g.values.congruent_with(&base));
        // The head moved during scouting, so head guidance is not all ones.
        let head = g.values.layers.last().unwrap();
        assert!(head.weights.values().iter().any(|&v| v != 1.0));
    }
}
