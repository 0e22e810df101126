//! Command line and HTTP front ends over a single shared engine.

pub mod engine;
pub mod server;
