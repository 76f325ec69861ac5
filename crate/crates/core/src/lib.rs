#![allow(clippy::needless_range_loop)]

pub mod claws;
pub mod cli;
pub mod expr;
pub mod jets;
pub mod linalg;
pub mod parabolic;
