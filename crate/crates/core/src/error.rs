use alloc::string::String;
use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not conform.
    Dimension { op: &'static str, detail: String },
    /// A matrix or vector with zero rows or columns.
    Empty,
    /// A symmetric routine received an asymmetric matrix.
    NotSymmetric { row: usize, col: usize, defect: f64 },
    /// Jacobi sweeps did not reach the off-diagonal threshold.
    EigenNoConvergence { sweeps: usize },
    /// Non-finite state during integration.
    Divergence { step: usize, time: f64 },
    /// The simplex pivot cap was hit.
    SolverStall { pivots: usize },
    /// An argument lies outside the operation's domain.
    Domain(String),
    /// Random graph generation gave up.
    GenerationFailure { attempts: usize },
    /// The regulator LP has no finite maximizer: `(A, B)` is not `E`-stabilizable.
    NotStabilizable,
    /// The LP maximizer does not satisfy the algebraic equation.
    Verification { residual: f64 },
    /// A protocol hypothesis does not hold.
    Hypothesis(String),
    /// No Hurwitz certificate exists for the mode `A − λρBK`.
    NotHurwitz { lambda: f64 },
    /// The positivity counterexample search hit its magnitude cap.
    ConstructionFailure { max_magnitude: f64 },
    /// A documented precondition was violated by the caller.
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { op, detail } => write!(f, "dimension mismatch in {op}: {detail}"),
            Error::Empty => f.write_str("matrix must have at least one row and one column"),
            Error::NotSymmetric { row, col, defect } => {
                write!(
                    f,
                    "matrix is not symmetric at ({row}, {col}): |m_ij - m_ji| = {defect:e}"
                )
            }
            Error::EigenNoConvergence { sweeps } => {
                write!(f, "Jacobi eigensolver did not converge in {sweeps} sweeps")
            }
            Error::Divergence { step, time } => {
                write!(f, "integration diverged at step {step} (t = {time})")
            }
            Error::SolverStall { pivots } => write!(f, "simplex stalled after {pivots} pivots"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::GenerationFailure { attempts } => {
                write!(f, "graph generation failed after {attempts} attempts")
            }
            Error::NotStabilizable => {
                f.write_str("regulator LP has no finite optimum: (A, B) is not E-stabilizable")
            }
            Error::Verification { residual } => {
                write!(
                    f,
                    "algebraic equation residual {residual:e} exceeds tolerance"
                )
            }
            Error::Hypothesis(msg) => write!(f, "protocol hypothesis violated: {msg}"),
            Error::NotHurwitz { lambda } => {
                write!(f, "no Hurwitz certificate for mode lambda = {lambda}")
            }
            Error::ConstructionFailure { max_magnitude } => write!(
                f,
                "no orthant exit found up to witness magnitude {max_magnitude:e}"
            ),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
