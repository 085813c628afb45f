//! MNIST in its IDX distribution format.
//!
//! Images: `0x00000803`, count, rows, cols (big-endian u32), then one byte
//! per pixel. Labels: `0x00000801`, count, then one byte per label.

use std::fs;
use std::path::Path;

use super::{LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// Loads the four canonical IDX files from `dir`.
pub fn load_mnist(dir: &Path) -> Result<(LabeledDataset, LabeledDataset)> {
    let train = load_pair(dir, TRAIN_IMAGES, TRAIN_LABELS, Split::Train)?;
    let test = load_pair(dir, TEST_IMAGES, TEST_LABELS, Split::Test)?;
    Ok((train, test))
}

fn load_pair(dir: &Path, images: &str, labels: &str, split: Split) -> Result<LabeledDataset> {
    let img_path = dir.join(images);
    let lbl_path = dir.join(labels);
    let img_bytes = fs::read(&img_path).map_err(|e| Error::io(&img_path, e))?;
    let lbl_bytes = fs::read(&lbl_path).map_err(|e| Error::io(&lbl_path, e))?;
    let inputs = parse_idx_images(&img_bytes, &img_path)?;
    let labels = parse_idx_labels(&lbl_bytes, &lbl_path)?;
    if inputs.rows() != labels.len() {
        return Err(Error::Format {
            path: lbl_path,
            offset: 4,
            reason: format!("{} labels for {} images", labels.len(), inputs.rows()),
        });
    }
    LabeledDataset::new(inputs, labels, 10, split)
}

fn read_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            offset: offset as u64,
            reason: "truncated header".into(),
        })
}

fn check_magic(bytes: &[u8], want: u32, path: &Path) -> Result<()> {
    let magic = read_u32(bytes, 0, path)?;
    if magic != want {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: 0,
            reason: format!("bad magic number {magic:#010x}, expected {want:#010x}"),
        });
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header: usize, expected: usize, path: &Path) -> Result<()> {
    let have = bytes.len() - header;
    if have < expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: bytes.len() as u64,
            reason: format!("truncated payload: {have} bytes, expected {expected}"),
        });
    }
    Ok(())
}

/// Parses an IDX image file into a `count x (rows*cols)` matrix scaled by
/// 1/255.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<Matrix> {
    check_magic(bytes, IDX_IMAGES_MAGIC, path)?;
    let count = read_u32(bytes, 4, path)? as usize;
    let rows = read_u32(bytes, 8, path)? as usize;
    let cols = read_u32(bytes, 12, path)? as usize;
    let features = rows * cols;
    check_payload(bytes, 16, count * features, path)?;
    let data = bytes[16..16 + count * features]
        .iter()
        .map(|&b| b as f64 / 255.0)
        .collect();
    Matrix::from_vec(count, features, data)
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<usize>> {
    check_magic(bytes, IDX_LABELS_MAGIC, path)?;
    let count = read_u32(bytes, 4, path)? as usize;
    check_payload(bytes, 8, count, path)?;
    Ok(bytes[8..8 + count].iter().map(|&b| b as usize).collect())
}
