//! Labelled image datasets with pixels scaled into `[0, 1]`.

mod cifar;
mod mnist;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use cifar::{load_cifar10, CIFAR_RECORD_BYTES};
pub use mnist::{load_mnist, parse_idx_images, parse_idx_labels, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Mnist,
    Cifar10,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 2] = [DatasetKind::Mnist, DatasetKind::Cifar10];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Cifar10 => "cifar10",
        }
    }

    pub fn feature_dim(self) -> usize {
        match self {
            DatasetKind::Mnist => 784,
            DatasetKind::Cifar10 => 3072,
        }
    }

    /// Height and width of one image plane (a single colour channel for
    /// CIFAR-10).
    pub fn plane_shape(self) -> (usize, usize) {
        match self {
            DatasetKind::Mnist => (28, 28),
            DatasetKind::Cifar10 => (32, 32),
        }
    }

    /// Conventional sub-directory name under a data root.
    pub fn sub_dir(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Cifar10 => "cifar-10-batches-bin",
        }
    }

    /// Where this dataset lives under a shared data root. Falls back to the
    /// root itself when the conventional sub-directory is absent.
    pub fn resolve_dir(self, data_root: &Path) -> PathBuf {
        let candidate = data_root.join(self.sub_dir());
        if candidate.is_dir() {
            candidate
        } else {
            data_root.to_path_buf()
        }
    }

    /// Loads `(train, test)` from the directory returned by `resolve_dir`.
    pub fn load(self, data_root: &Path) -> Result<(LabeledDataset, LabeledDataset)> {
        let dir = self.resolve_dir(data_root);
        let marker = match self {
            DatasetKind::Mnist => "train-images-idx3-ubyte",
            DatasetKind::Cifar10 => "data_batch_1.bin",
        };
        if !dir.join(marker).is_file() {
            return Err(Error::MissingData {
                path: dir,
                reason: format!("expected {marker} here or in the `{}` sub-directory", self.sub_dir()),
            });
        }
        match self {
            DatasetKind::Mnist => load_mnist(&dir),
            DatasetKind::Cifar10 => load_cifar10(&dir),
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnist" => Ok(DatasetKind::Mnist),
            "cifar10" => Ok(DatasetKind::Cifar10),
            other => Err(Error::Config(format!(
                "unknown dataset `{other}`; valid options: mnist, cifar10"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Image rows in `[0, 1]` with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: Matrix,
    labels: Vec<usize>,
    num_classes: usize,
    split: Split,
}

impl LabeledDataset {
    pub fn new(inputs: Matrix, labels: Vec<usize>, num_classes: usize, split: Split) -> Result<Self> {
        if inputs.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                op: "LabeledDataset::new",
                left: inputs.shape(),
                right: (labels.len(), 1),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        if let Some(v) = inputs.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("input value {v} outside [0, 1]")));
        }
        Ok(Self {
            inputs,
            labels,
            num_classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn input(&self, i: usize) -> &[f64] {
        self.inputs.row(i)
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.num_classes];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            inputs: self.inputs.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            split: self.split,
        }
    }

    /// Deterministic pseudo-random subset of `n` rows: a seeded Fisher-Yates
    /// shuffle of all row indices, truncated to `n`.
    pub fn shuffled_subset(&self, n: usize, seed: u64) -> Result<LabeledDataset> {
        if n > self.len() {
            return Err(Error::InvalidArgument(format!(
                "subset of {n} rows requested from a dataset of {}",
                self.len()
            )));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut rng::stream(seed));
        idx.truncate(n);
        Ok(self.select(&idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> LabeledDataset {
        let data = (0..n * 3).map(|v| (v % 7) as f64 / 7.0).collect();
        let inputs = Matrix::from_vec(n, 3, data).unwrap();
        LabeledDataset::new(inputs, (0..n).map(|i| i % 4).collect(), 4, Split::Train).unwrap()
    }

    #[test]
    fn rejects_invariant_violations() {
        let inputs = Matrix::from_rows(&[[0.5, 1.5]]);
        assert!(LabeledDataset::new(inputs, vec![0], 2, Split::Test).is_err());
        let inputs = Matrix::from_rows(&[[0.5, 0.5]]);
        assert!(LabeledDataset::new(inputs.clone(), vec![2], 2, Split::Test).is_err());
        assert!(LabeledDataset::new(inputs, vec![0, 1], 2, Split::Test).is_err());
    }

    #[test]
    fn full_subset_is_permutation() {
        let ds = toy(20);
        let sub = ds.shuffled_subset(20, 9).unwrap();
        assert_eq!(sub.len(), 20);
        let mut rows: Vec<Vec<u64>> = (0..20)
            .map(|i| sub.input(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        let mut orig: Vec<Vec<u64>> = (0..20)
            .map(|i| ds.input(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        rows.sort();
        orig.sort();
        assert_eq!(rows, orig);
        assert_eq!(sub.class_histogram(), ds.class_histogram());
    }

    #[test]
    fn subset_is_deterministic() {
        let ds = toy(50);
        assert_eq!(ds.shuffled_subset(10, 3).unwrap(), ds.shuffled_subset(10, 3).unwrap());
        assert_ne!(ds.shuffled_subset(10, 3).unwrap(), ds.shuffled_subset(10, 4).unwrap());
    }

    #[test]
    fn empty_subset_keeps_metadata() {
        let ds = toy(5);
        let sub = ds.shuffled_subset(0, 1).unwrap();
        assert!(sub.is_empty());
        assert_eq!(sub.feature_dim(), 3);
        assert_eq!(sub.num_classes(), 4);
        assert_eq!(sub.split(), Split::Train);
    }

    #[test]
    fn oversized_subset_is_error() {
        assert!(toy(5).shuffled_subset(6, 1).is_err());
    }

    #[test]
    fn dataset_names_parse() {
        assert_eq!("mnist".parse::<DatasetKind>().unwrap(), DatasetKind::Mnist);
        let err = "svhn".parse::<DatasetKind>().unwrap_err().to_string();
        assert!(err.contains("mnist, cifar10"), "{err}");
    }
}
