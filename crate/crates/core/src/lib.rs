pub mod graph;
pub mod engine;
pub mod decompose;
pub mod verify;
pub mod algorithms;
pub mod adversarial;
pub mod experiment;
