//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod blocks;
pub mod gauss;
pub mod wigner_oracle;
