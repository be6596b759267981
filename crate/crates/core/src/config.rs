/// Settings shared by the multistart solvers (semi-variation, the Jacobs
/// norm searches, the half average ascent).
#[derive(Debug, Clone, PartialEq)]
pub struct OptConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative change below which a fixed-point iteration counts as converged.
    pub tol: f64,
    /// Relative gap between certified upper and lower bounds that is
    /// considered tight. Only reported; never assumed.
    pub gap_tol: f64,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 500,
            tol: 1e-10,
            gap_tol: 1e-8,
            seed: 0,
        }
    }
}

impl OptConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}
