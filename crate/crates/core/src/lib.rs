pub mod eigen;
pub mod corpus;
pub mod error;
pub mod interval;
pub mod lp;
pub mod matrix;
pub mod poly;
pub mod realize;
pub mod report;
pub mod runner;
pub mod scalar;
pub mod template;
pub mod spectrum;
