//! Generation, rendering and search-based solving of visual arithmetic
//! problems built from an And-Or graph of layouts and calculation trees.

pub mod aog;
pub mod calc_tree;
pub mod layout;
pub mod solver;
pub mod generator;
pub mod render;
