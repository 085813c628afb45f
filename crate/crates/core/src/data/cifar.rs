//! CIFAR-10 binary batches: 3073-byte records, one label byte followed by
//! 1024 red, 1024 green and 1024 blue bytes (row-major 32x32 planes).
//!
//! The channel-planar layout is kept, so features `0..1024` of every sample
//! are the red plane.

use std::fs;
use std::path::Path;

use super::{LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const CIFAR_RECORD_BYTES: usize = 3073;
const PIXELS: usize = CIFAR_RECORD_BYTES - 1;

const TRAIN_BATCHES: [&str; 5] = [
    "data_batch_1.bin",
    "data_batch_2.bin",
    "data_batch_3.bin",
    "data_batch_4.bin",
    "data_batch_5.bin",
];
const TEST_BATCH: &str = "test_batch.bin";

pub fn load_cifar10(dir: &Path) -> Result<(LabeledDataset, LabeledDataset)> {
    let train = load_batches(dir, &TRAIN_BATCHES, Split::Train)?;
    let test = load_batches(dir, &[TEST_BATCH], Split::Test)?;
    Ok((train, test))
}

fn load_batches(dir: &Path, names: &[&str], split: Split) -> Result<LabeledDataset> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for name in names {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        parse_records(&bytes, &path, &mut data, &mut labels)?;
    }
    let inputs = Matrix::from_vec(labels.len(), PIXELS, data)?;
    LabeledDataset::new(inputs, labels, 10, split)
}

pub(crate) fn parse_records(bytes: &[u8], path: &Path, data: &mut Vec<f64>, labels: &mut Vec<usize>) -> Result<()> {
    if bytes.is_empty() || bytes.len() % CIFAR_RECORD_BYTES != 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: (bytes.len() - bytes.len() % CIFAR_RECORD_BYTES) as u64,
            reason: format!(
                "file size {} is not a positive multiple of the {CIFAR_RECORD_BYTES}-byte record",
                bytes.len()
            ),
        });
    }
    data.reserve(bytes.len() / CIFAR_RECORD_BYTES * PIXELS);
    for (k, rec) in bytes.chunks_exact(CIFAR_RECORD_BYTES).enumerate() {
        let label = rec[0] as usize;
        if label >= 10 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                offset: (k * CIFAR_RECORD_BYTES) as u64,
                reason: format!("label byte {label} out of range"),
            });
        }
        labels.push(label);
        data.extend(rec[1..].iter().map(|&b| b as f64 / 255.0));
    }
    Ok(())
}
