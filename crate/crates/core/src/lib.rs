pub mod matrix;
pub mod qsim;
pub mod metrics;
pub mod encoding;
pub mod scale;
pub mod pipeline;
pub mod synthetic;
pub mod models;
pub mod bench;
pub mod cli;
