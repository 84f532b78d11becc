//! Dataset types shared by every experiment: labeled example sets, one-shot
//! episodes, and synthetic randomized-bit mapping tasks. File loaders live in
//! the companion crate; everything here is already in memory.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::net::Batch;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskSource {
    Mnist,
    Omniglot,
    SyntheticBits,
}

impl TaskSource {
    pub fn name(self) -> &'static str {
        match self {
            TaskSource::Mnist => "mnist",
            TaskSource::Omniglot => "omniglot",
            TaskSource::SyntheticBits => "synthetic_bits",
        }
    }
}

/// One labeled example: features in `[0, 1]` plus a category id.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: usize,
}

/// A labeled example set with named categories.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub examples: Vec<Example>,
    pub category_names: Vec<String>,
    pub source: TaskSource,
}

impl TaskDataset {
    pub fn validate(&self) -> Result<()> {
        let dim = self.feature_dim();
        for (i, ex) in self.examples.iter().enumerate() {
            if ex.features.len() != dim {
                return Err(Error::Data(format!(
                    "example {i} has {} features, expected {dim}",
                    ex.features.len()
                )));
            }
            if ex.label >= self.category_names.len() {
                return Err(Error::Data(format!(
                    "example {i} has label {} but only {} categories exist",
                    ex.label,
                    self.category_names.len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.examples.first().map_or(0, |e| e.features.len())
    }

    pub fn n_categories(&self) -> usize {
        self.category_names.len()
    }

    /// Example count per category id.
    pub fn counts_per_category(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.n_categories()];
        for ex in &self.examples {
            counts[ex.label] += 1;
        }
        counts
    }

    /// Converts to a one-hot classification batch over this dataset's
    /// categories.
    pub fn to_batch(&self) -> Result<Batch> {
        if self.is_empty() {
            return Err(Error::Argument("dataset is empty".into()));
        }
        let k = self.n_categories();
        let mut inputs = Matrix::zeros(self.len(), self.feature_dim());
        let mut targets = Matrix::zeros(self.len(), k);
        for (r, ex) in self.examples.iter().enumerate() {
            inputs.row_mut(r).copy_from_slice(&ex.features);
            targets.set(r, ex.label, 1.0);
        }
        Batch::new(inputs, targets)
    }
}

/// Restricts a dataset to the given categories, re-indexing labels densely to
/// `0..k-1` in the order given. An optional per-category cap keeps the first
/// occurrences in stored order.
pub fn subset_categories(
    data: &TaskDataset,
    categories: &[usize],
    max_per_category: Option<usize>,
) -> Result<TaskDataset> {
    if categories.is_empty() {
        return Err(Error::Argument("category list is empty".into()));
    }
    let mut new_label = alloc::vec![usize::MAX; data.n_categories()];
    for (new, &cat) in categories.iter().enumerate() {
        if cat >= data.n_categories() {
            return Err(Error::Argument(format!(
                "unknown category {cat}; dataset has {} categories",
                data.n_categories()
            )));
        }
        if new_label[cat] != usize::MAX {
            return Err(Error::Argument(format!("duplicate category {cat}")));
        }
        new_label[cat] = new;
    }

    let cap = max_per_category.unwrap_or(usize::MAX);
    if cap == 0 {
        return Err(Error::Argument("max_per_category must be >= 1".into()));
    }
    let mut taken = alloc::vec![0usize; categories.len()];
    let mut examples = Vec::new();
    for ex in &data.examples {
        let label = new_label[ex.label];
        if label == usize::MAX || taken[label] >= cap {
            continue;
        }
        taken[label] += 1;
        examples.push(Example {
            features: ex.features.clone(),
            label,
        });
    }

    Ok(TaskDataset {
        examples,
        category_names: categories
            .iter()
            .map(|&c| data.category_names[c].clone())
            .collect(),
        source: data.source,
    })
}

/// A one-shot split: exactly one training example per selected category, all
/// remaining examples of those categories as the test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub train: TaskDataset,
    pub test: TaskDataset,
    pub alphabet_id: Option<String>,
}

/// Builds a one-shot episode over the given categories: one uniformly chosen
/// train example per category, everything else of those categories as test.
/// Deterministic in `seed`.
pub fn make_episode(data: &TaskDataset, categories: &[usize], seed: u64) -> Result<Episode> {
    let sub = subset_categories(data, categories, None)?;
    let counts = sub.counts_per_category();
    for (label, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::Data(format!(
                "category {} has {count} examples; one-shot episodes need at least 2",
                sub.category_names[label]
            )));
        }
    }

    let mut rng = rng_from_seed(seed);
    let k = sub.n_categories();
    // Per category, the index (within that category's examples) of the train
    // example; drawn in category order so the split is stable.
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for label in 0..k {
        chosen.push(rng.gen_range(0..counts[label]));
    }

    let mut seen = alloc::vec![0usize; k];
    let mut train: Vec<Example> = alloc::vec![
        Example {
            features: Vec::new(),
            label: 0
        };
        k
    ];
    let mut test = Vec::new();
    for ex in &sub.examples {
        let nth = seen[ex.label];
        seen[ex.label] += 1;
        if nth == chosen[ex.label] {
            train[ex.label] = ex.clone();
        } else {
            test.push(ex.clone());
        }
    }

    let episode = Episode {
        train: TaskDataset {
            examples: train,
            category_names: sub.category_names.clone(),
            source: sub.source,
        },
        test: TaskDataset {
            examples: test,
            category_names: sub.category_names,
            source: sub.source,
        },
        alphabet_id: None,
    };

    debug_assert_eq!(episode.train.len(), k);
    debug_assert!(episode
        .test
        .examples
        .iter()
        .all(|ex| ex.label < k));
    Ok(episode)
}

/// A randomized input/output bit-mapping task: distinct input bit rows, each
/// mapped to independent fair-coin target bits.
#[derive(Debug, Clone, PartialEq)]
pub struct BitMappingTask {
    pub n_in: usize,
    pub n_out: usize,
    pub rows: Vec<(Vec<u8>, Vec<u8>)>,
    pub seed: u64,
}

impl BitMappingTask {
    /// Converts to a sigmoid-head batch (bits as 0.0/1.0).
    pub fn to_batch(&self) -> Result<Batch> {
        let mut inputs = Matrix::zeros(self.rows.len(), self.n_in);
        let mut targets = Matrix::zeros(self.rows.len(), self.n_out);
        for (r, (inp, out)) in self.rows.iter().enumerate() {
            for (c, &b) in inp.iter().enumerate() {
                inputs.set(r, c, b as f64);
            }
            for (c, &b) in out.iter().enumerate() {
                targets.set(r, c, b as f64);
            }
        }
        Batch::new(inputs, targets)
    }
}

/// Generates a bit-mapping task with `n_rows` distinct inputs sampled
/// uniformly without replacement and fair-coin targets. Deterministic in
/// `seed`.
pub fn make_bit_mapping(n_in: usize, n_out: usize, n_rows: usize, seed: u64) -> Result<BitMappingTask> {
    if n_in == 0 || n_in > 63 || n_out == 0 {
        return Err(Error::Argument(format!(
            "bit counts out of range: n_in={n_in} (1..=63), n_out={n_out} (>=1)"
        )));
    }
    let space = 1u64 << n_in;
    if n_rows == 0 || n_rows as u64 > space {
        return Err(Error::Argument(format!(
            "n_rows={n_rows} must be in 1..=2^{n_in}"
        )));
    }

    let mut rng = rng_from_seed(seed);

    // Enumerable input spaces get exact without-replacement sampling; larger
    // ones use rejection, which stays cheap because n_rows << 2^n_in there.
    let inputs: Vec<u64> = if space <= (1 << 22) {
        index::sample(&mut rng, space as usize, n_rows)
            .into_iter()
            .map(|i| i as u64)
            .collect()
    } else {
        let mut seen = alloc::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(n_rows);
        while out.len() < n_rows {
            let v = rng.gen::<u64>() & (space - 1);
            if seen.insert(v) {
                out.push(v);
            }
        }
        out
    };

    let rows = inputs
        .into_iter()
        .map(|bits| {
            let input: Vec<u8> = (0..n_in).map(|b| ((bits >> b) & 1) as u8).collect();
            let target: Vec<u8> = (0..n_out).map(|_| rng.gen_range(0..2u8)).collect();
            (input, target)
        })
        .collect();

    Ok(BitMappingTask {
        n_in,
        n_out,
        rows,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn toy_dataset() -> TaskDataset {
        // 3 categories with 3/2/2 examples, 2 features each.
        let examples = vec![
            Example { features: vec![0.0, 0.1], label: 0 },
            Example { features: vec![0.2, 0.3], label: 1 },
            Example { features: vec![0.4, 0.5], label: 0 },
            Example { features: vec![0.6, 0.7], label: 2 },
            Example { features: vec![0.8, 0.9], label: 1 },
            Example { features: vec![1.0, 0.0], label: 0 },
            Example { features: vec![0.5, 0.5], label: 2 },
        ];
        TaskDataset {
            examples,
            category_names: vec!["a".to_string(), "b".to_string(), "c".to_string()],
            source: TaskSource::Mnist,
        }
    }

    #[test]
    fn subset_reindexes_densely_in_given_order() {
        let data = toy_dataset();
        let sub = subset_categories(&data, &[2, 0], None).unwrap();
        assert_eq!(sub.category_names, vec!["c", "a"]);
        assert_eq!(sub.len(), 5);
        // Category 2 became label 0, category 0 became label 1.
        assert!(sub.examples.iter().all(|e| e.label < 2));
        assert_eq!(sub.counts_per_category(), vec![2, 3]);
    }

    #[test]
    fn subset_to_all_categories_is_identity() {
        let data = toy_dataset();
        let sub = subset_categories(&data, &[0, 1, 2], None).unwrap();
        assert_eq!(sub, data);
    }

    #[test]
    fn subset_cap_keeps_first_occurrences() {
        let data = toy_dataset();
        let sub = subset_categories(&data, &[0], Some(1)).unwrap();
        assert_eq!(sub.len(), 1);
        assert_eq!(sub.examples[0].features, vec![0.0, 0.1]);
    }

    #[test]
    fn subset_rejects_unknown_category() {
        let data = toy_dataset();
        assert!(matches!(
            subset_categories(&data, &[5], None),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn subset_twice_equals_once() {
        let data = toy_dataset();
        let once = subset_categories(&data, &[1, 2], None).unwrap();
        let twice = subset_categories(&once, &[0, 1], None).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn episode_split_is_disjoint_and_covering() {
        let data = toy_dataset();
        let ep = make_episode(&data, &[0, 1], 42).unwrap();
        assert_eq!(ep.train.len(), 2);
        assert_eq!(ep.test.len(), 3);
        for t in &ep.train.examples {
            assert!(!ep.test.examples.contains(t));
        }
        // Every test label appears in train.
        for t in &ep.test.examples {
            assert!(ep.train.examples.iter().any(|tr| tr.label == t.label));
        }
        // Determinism.
        let ep2 = make_episode(&data, &[0, 1], 42).unwrap();
        assert_eq!(ep, ep2);
    }

    #[test]
    fn episode_two_examples_each_gives_forced_split() {
        let data = toy_dataset();
        let ep = make_episode(&data, &[1, 2], 7).unwrap();
        assert_eq!(ep.train.len(), 2);
        assert_eq!(ep.test.len(), 2);
    }

    #[test]
    fn episode_rejects_singleton_category() {
        let mut data = toy_dataset();
        data.examples.retain(|e| !(e.label == 2 && e.features[0] == 0.5));
        assert!(matches!(
            make_episode(&data, &[2], 0),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn bit_mapping_exhaustive_sampling() {
        let task = make_bit_mapping(3, 2, 8, 123).unwrap();
        let mut seen: Vec<u64> = task
            .rows
            .iter()
            .map(|(inp, _)| {
                inp.iter()
                    .enumerate()
                    .map(|(i, &b)| (b as u64) << i)
                    .sum()
            })
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..8).collect::<Vec<u64>>());
    }

    #[test]
    fn bit_mapping_deterministic_and_range_checked() {
        let a = make_bit_mapping(5, 3, 10, 9).unwrap();
        let b = make_bit_mapping(5, 3, 10, 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            make_bit_mapping(3, 2, 9, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn bit_mapping_target_bits_are_roughly_fair() {
        // Binomial bound: 64 rows x 8 bits = 512 fair coins per seed, so the
        // per-seed mean target bit sits inside [0.35, 0.65] with overwhelming
        // probability (a 0.15 deviation is ~6.8 sigma).
        for seed in 0..10 {
            let task = make_bit_mapping(8, 8, 64, seed).unwrap();
            let total_bits = (task.rows.len() * task.n_out) as f64;
            let mean: f64 = task
                .rows
                .iter()
                .map(|(_, out)| out.iter().map(|&b| b as f64).sum::<f64>())
                .sum::<f64>()
                / total_bits;
            assert!(
                (0.35..=0.65).contains(&mean),
                "seed {seed} has mean target bit {mean}"
            );
        }
    }

    #[test]
    fn bit_mapping_inputs_distinct_across_sweep() {
        for seed in 0..5 {
            for &(n_in, n_rows) in &[(4usize, 16usize), (6, 32), (8, 256)] {
                let task = make_bit_mapping(n_in, 4, n_rows, seed).unwrap();
                let mut keys: Vec<&Vec<u8>> = task.rows.iter().map(|(i, _)| i).collect();
                keys.sort_unstable();
                keys.dedup();
                assert_eq!(keys.len(), n_rows);
            }
        }
    }

    #[test]
    fn to_batch_is_one_hot() {
        let data = toy_dataset();
        let batch = data.to_batch().unwrap();
        assert_eq!(batch.targets.cols(), 3);
        for r in 0..batch.targets.rows() {
            let row = batch.targets.row(r);
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
    }
}
