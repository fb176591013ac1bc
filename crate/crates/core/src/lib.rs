pub mod analysis;
pub mod cli;
pub mod config;
pub mod engine;
pub mod exec;
pub mod field;
pub mod graph;
pub mod ifs;
pub mod systems;
