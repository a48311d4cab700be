//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod alloc;
pub mod estimation;
pub mod fim;
