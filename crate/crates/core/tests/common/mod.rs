#![allow(dead_code, clippy::too_many_arguments)]

pub mod checks;
pub mod fixtures;
pub mod oracles;
