pub mod bvp;
pub mod campaign;
pub mod catalog;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod figures;
pub mod merit;
pub mod strategies;
pub mod tree;
pub mod units;
