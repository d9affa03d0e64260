//! Exact-arithmetic analysis of finite ontological (hidden-variable) models.

#![allow(clippy::result_large_err)]

pub mod io;
pub mod localdecide;
pub mod ontomodel;
pub mod prepscen;
pub mod probcore;
pub mod properties;
pub mod quantum;
pub mod random;
pub mod rational;
pub mod zoo;
