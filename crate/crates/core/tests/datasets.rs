//! Checks against the real MNIST and CIFAR-10 files under `$XBAR_DATA_DIR`.

use std::path::PathBuf;

use xbar_core::{DatasetKind, LinearLayerModel, Pairing, Split, TrainConfig};

fn root() -> PathBuf {
    std::env::var_os("XBAR_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("/root/data"))
}

#[test]
fn mnist_shapes_and_label_counts() {
    let (train, test) = DatasetKind::Mnist.load(&root()).expect("MNIST under XBAR_DATA_DIR");
    assert_eq!((train.len(), test.len()), (60000, 10000));
    assert_eq!(train.feature_dim(), 784);
    assert_eq!((train.split(), test.split()), (Split::Train, Split::Test));
    let h = test.class_histogram();
    assert_eq!(h, [980, 1135, 1032, 1010, 982, 892, 958, 1028, 974, 1009]);
    assert_eq!(train.class_histogram().iter().sum::<usize>(), 60000);
    let px = test.inputs().as_slice();
    assert!(px.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(px.contains(&1.0));
}

#[test]
fn cifar_shapes_and_label_counts() {
    let (train, test) = DatasetKind::Cifar10
        .load(&root())
        .expect("CIFAR-10 under XBAR_DATA_DIR");
    assert_eq!((train.len(), test.len()), (50000, 10000));
    assert_eq!(test.feature_dim(), 3072);
    assert_eq!(test.class_histogram(), [1000; 10]);
    assert_eq!(train.class_histogram(), [5000; 10]);
    assert!(test.inputs().as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn zero_model_predicts_class_zero() {
    let (_, test) = DatasetKind::Mnist.load(&root()).unwrap();
    let m = LinearLayerModel::zeros(Pairing::SoftmaxCe, 10, 784);
    assert_eq!(m.accuracy(&test).unwrap(), 0.098);
}

#[test]
fn softmax_baseline_accuracy() {
    let (train, test) = DatasetKind::Mnist.load(&root()).unwrap();
    let cfg = TrainConfig::default_for(DatasetKind::Mnist, Pairing::SoftmaxCe, 11);
    let m = LinearLayerModel::fit(Pairing::SoftmaxCe, &train, &cfg).unwrap();
    let acc = m.accuracy(&test).unwrap();
    assert!(acc >= 0.88, "softmax test accuracy {acc}");
}
