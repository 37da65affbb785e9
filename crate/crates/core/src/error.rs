use thiserror::Error;

/// Errors surfaced by window construction, searches, and certification.
#[derive(Debug, Error)]
pub enum Error {
    /// A window or search would exceed the configured element budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// An extension demand contradicts itself or the oracle's class.
    #[error("inconsistent demand: {0}")]
    InconsistentDemand(String),

    /// A referenced element is not in the structure / window.
    #[error("element {0} not in window")]
    NotInWindow(u32),

    /// Tuples of different arity were compared.
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),

    /// A separation / extension search exhausted its level budget. This
    /// signals that the window policy was too small, never non-existence.
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    /// Stabilization could not be certified within the level budget.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    /// An input lacked the algebraic-closure certificate required of it.
    #[error("uncertified input: {0}")]
    Uncertified(String),

    /// An internal invariant failed; indicates an implementation bug.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// A Schreier ball that should be a tree contains a cycle or has the
    /// wrong size; surfaces a freeness failure of the pair.
    #[error("schreier ball is not a tree: {0}")]
    NotATree(String),

    /// Iterative eigenvalue estimation did not reach the residual tolerance.
    #[error("eigenvalue iteration did not converge: residual {residual} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    /// Malformed persisted artifact or config text.
    #[error("parse error: {0}")]
    Parse(String),

    /// Invalid configuration value or unknown key.
    #[error("config error: {0}")]
    Config(String),
}
