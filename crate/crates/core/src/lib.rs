// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Graph-based docking on simulated neutral-atom arrays.

pub mod docking;
pub mod error;
pub mod graph;
pub mod mlqaa;
pub mod optimize;
pub mod pulse;
pub mod register;
pub mod rng;
pub mod simulator;

pub use error::{Error, ErrorKind, Result};
