//! Half-planar domain-Markov triangulations.

pub mod enumeration;
pub mod numerics;
pub mod law;
pub mod rng;
pub mod map;
pub mod sampler;
pub mod harness;
