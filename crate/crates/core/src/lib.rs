pub mod cli;
pub mod eigen;
pub mod error;
pub mod filters;
pub mod formats;
pub mod gcn;
pub mod graph;
pub mod lanczos;
pub mod laplacian;
pub mod sparse;
pub mod spectral;
