// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Learned pulse parameters: a geometric register corpus, graph features and
//! one graph-convolutional regressor per parameter.

pub mod dataset;
pub mod gcn;
pub mod train;

pub use dataset::{
    generate_dataset, label_dataset, label_register, read_dataset, train_test_split, write_dataset, DatasetRecord,
    GeneratedRegister, Provenance, ShapeKind, ShapeSpec,
};
pub use gcn::{featurize, gradient_check, GcnModel, GraphFeatures, PreparedGraph};
pub use train::{
    compare_with_vqaa, evaluate_mape, mape, mlqaa_run, predict_params, prepare, train, train_models, Comparison, MapeReport, MlqaaRun, ModelSet,
    PreparedRecord, Scaling, Target, TargetModel, TrainConfig, TrainReport,
};
