use alloc::string::String;
use core::fmt;

use crate::poly::VarId;

/// Errors raised by the engine. Inconsistent linear systems are not errors;
/// they surface as compatibility relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Differentiation with respect to a formal parameter.
    ParameterDerivative(VarId),
    /// A variable index outside `1..=n`.
    IndexOutOfRange { var: VarId, dim: usize },
    /// A value that was expected to be free of parameters carries one.
    UnexpectedParameter(VarId),
    /// A symbol that was expected to be a vector field is not of ξ-degree 1.
    NotVectorField,
    DimensionMismatch { left: usize, right: usize },
    /// Text that does not follow the canonical polynomial syntax.
    Parse { pos: usize, msg: String },
    InvalidDescriptor(String),
    GradeOutOfWindow { grade: i64, max: usize },
    /// `t_i^k` is not a parameter of the infinitesimal deformation.
    NoSuchParameter { family: usize, grade: i64 },
    /// Grade window or order below the documented minimum.
    InvalidConfig(String),
    /// A compatibility relation with no parameter dependence: the invariant
    /// ansatz could not absorb the residual.
    AnsatzInsufficient {
        order: usize,
        grade: usize,
        shift: usize,
        witness: String,
    },
    /// A shift piece of the conjugated action that is not an exact multiple
    /// of the matching standard cocycle.
    UnexpectedResidue { shift: usize, witness: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParameterDerivative(v) => {
                write!(f, "cannot differentiate with respect to parameter {v}")
            }
            Error::IndexOutOfRange { var, dim } => {
                write!(f, "variable {var} out of range for dimension {dim}")
            }
            Error::UnexpectedParameter(v) => write!(f, "unexpected parameter {v}"),
            Error::NotVectorField => f.write_str("symbol is not homogeneous of fiber degree 1"),
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::Parse { pos, msg } => write!(f, "parse error at {pos}: {msg}"),
            Error::InvalidDescriptor(d) => write!(f, "invalid scheme descriptor {d}"),
            Error::GradeOutOfWindow { grade, max } => {
                write!(f, "grade {grade} outside window [0, {max}]")
            }
            Error::NoSuchParameter { family, grade } => {
                write!(f, "no parameter t{family}[{grade}]")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::AnsatzInsufficient {
                order,
                grade,
                shift,
                witness,
            } => write!(
                f,
                "ansatz-insufficient at order {order}, grade {grade}, shift {shift}: {witness}"
            ),
            Error::UnexpectedResidue { shift, witness } => {
                write!(f, "unexpected-residue in shift {shift}: {witness}")
            }
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
