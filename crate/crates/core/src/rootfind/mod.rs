//! Complex root finding: Muller's method for scalar analytic functions, an
//! argument-principle box search built on it, and a contour-integral
//! eigenvalue solver for analytic matrix families.

mod beyn;
mod locate;
mod muller;

pub use beyn::{beyn, BeynOptions};
pub use locate::{find_roots_in_box, winding_number, BoxSearch};
pub use muller::{deflate, muller};

use thiserror::Error;

use crate::types::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: C64,
    /// `|f(root)|` divided by the median `|f|` over the seeds.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootfindError {
    #[error("no convergence after {iterations} iterations (last iterate {last}, residual {residual:e})")]
    NoConvergence { iterations: usize, last: C64, residual: f64 },
    #[error("degenerate Muller step at {at}: interpolating parabola is flat")]
    DegenerateStep { at: C64 },
    #[error("seeds must be pairwise distinct")]
    BadSeeds,
    #[error("numerical rank {rank} equals the probe count; enlarge the probe block or shrink the contour")]
    RankOverflow { rank: usize },
    #[error("contour eigenvalues unstable under quadrature refinement (max deviation {deviation:e})")]
    QuadratureSuspect { deviation: f64 },
    #[error("matrix family is singular at contour node {at}")]
    SingularOnContour { at: C64 },
    #[error("function vanishes on the search contour near {at}")]
    ZeroOnContour { at: C64 },
    #[error("invalid search region")]
    InvalidRegion,
}
