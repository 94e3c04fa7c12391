pub mod error;
pub mod kernels;
pub mod links;
pub mod model;
pub mod pattern;
pub mod priors;
pub mod sampler;
pub mod compare;
pub mod simulate;
pub mod study;
pub mod io;
