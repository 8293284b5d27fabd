use std::fmt;

use thiserror::Error;

/// Hypotheses of the T(1) route that can be refuted on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Hypothesis {
    /// First-slot Hörmander constant of the kernel.
    HormanderFirstSlot,
    /// First-slot Hörmander constant of the adjoint kernel with r = 1.
    AdjointHormander,
    /// Testing condition on characteristic functions.
    TestingCondition,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::HormanderFirstSlot => "hormander-first-slot",
            Hypothesis::AdjointHormander => "adjoint-hormander",
            Hypothesis::TestingCondition => "testing-condition",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric violation at ({x}, {y}): {reason}")]
    MetricViolation { x: usize, y: usize, reason: String },
    #[error("dyadic construction failed at cube {cube}: {reason}")]
    ConstructionFailed { cube: usize, reason: String },
    #[error("adjacent family with {m_max} systems does not cover every ball")]
    CoverageFailed { m_max: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("ellipsoid solver did not converge after {iterations} iterations")]
    EllipsoidNotConverged { iterations: usize },
    #[error("point {point} is not representable (gauge {gauge})")]
    Infeasible { point: usize, gauge: f64 },
    #[error("cube {cube} has a child of zero mass")]
    DegenerateCube { cube: usize },
    #[error("cube {cube} is not binary")]
    NotBinary { cube: usize },
    #[error("kernel bound violated at ({x}, {y}): ratio {ratio}")]
    BoundViolated { x: usize, y: usize, ratio: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("operator not dominatable on this instance: {0}")]
    NotDominatable(String),
    #[error("membership certificate failed at point {point} in cube {cube}: {reason}")]
    MembershipFailed { point: usize, cube: usize, reason: String },
    #[error("hypotheses failed: {}", list_hypotheses(.0))]
    HypothesisFailed(Vec<Hypothesis>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn list_hypotheses(h: &[Hypothesis]) -> String {
    h.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
