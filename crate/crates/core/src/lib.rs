pub mod bounds;
pub mod cli;
pub mod hypspace;
pub mod matprod;
pub mod montecarlo;
pub mod pingpong;
pub mod poisson;
pub mod report;
pub mod spectral;
pub mod walk;
