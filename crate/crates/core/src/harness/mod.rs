pub mod config;
pub mod dump;
pub mod experiments;
pub mod export;
pub mod report;
pub mod stats;
pub mod validate;
