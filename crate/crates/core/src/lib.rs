pub mod cli;
pub mod engine;
pub mod lab;
pub mod model;
pub mod pathlaw;
