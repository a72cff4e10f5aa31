//! Shared fixtures for the kernel benchmarks.

use sem_schwarz::experiment::{build_problem, RunConfig};
use sem_schwarz::{PrecondConfig, PrecondKind, Preconditioner, PseudoLaplacian};

/// A periodic `e x e` problem of degree `order` with its noise right-hand side.
pub struct Fixture {
    pub op: PseudoLaplacian,
    pub rhs: Vec<f64>,
    pub x0: Vec<f64>,
}

impl Fixture {
    pub fn new(e: usize, order: usize) -> Self {
        let config = RunConfig { elements: (e, e), order, ..RunConfig::default() };
        let (op, rhs, x0) = build_problem(&config).expect("valid fixture");
        Self { op, rhs, x0 }
    }

    pub fn precond(&self, kind: PrecondKind, use_fdm: bool) -> Preconditioner {
        let config = PrecondConfig { use_fdm, ..PrecondConfig::with_kind(kind) };
        Preconditioner::build(&self.op, &config).expect("preconditioner builds")
    }
}
