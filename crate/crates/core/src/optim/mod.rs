//! Numerical kernels: simplex LP, 1-D minimization and conditional gradient.

pub mod cg;
pub mod line;
pub mod lp;

pub use cg::{cg_minimize, CgOptions, CgResult};
pub use line::minimize_1d;
pub use lp::{lp_solve, Direction, LpProblem, LpRow, LpSolution, LpStatus, Relation};
