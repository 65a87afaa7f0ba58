//! Energyshed analysis and policy design.
//!
//! An energyshed is a connected set of buses judged by its local generation
//! ratio: local generation energy over local demand energy across a time
//! window. This crate provides
//!
//! * [`netmodel`]: networks, profiles, budgets, partitions, parsers and
//!   scenario validation;
//! * [`analytic`]: closed-form ratio limits for a single community;
//! * [`qp`]: a sparse interior-point solver for convex quadratic programs;
//! * [`problems`]: the network programs and their reports;
//! * [`policy`]: bisection, cost-aware sweeps and Pareto fronts;
//! * [`cli`]: the `eshed` command-line front end.

use std::path::PathBuf;

use thiserror::Error;

pub mod analytic;
pub mod cli;
pub mod netmodel;
mod nonfinite;
pub mod policy;
pub mod problems;
pub mod qp;

use analytic::AnalyticError;
use netmodel::NetError;
use policy::PolicyError;
use problems::ProblemError;
use qp::QpError;

/// Any failure surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

fn qp_exit_code(e: &QpError) -> i32 {
    match e {
        QpError::InvalidData(_) => EXIT_INPUT,
        _ => EXIT_SOLVER,
    }
}

fn problem_exit_code(e: &ProblemError) -> i32 {
    match e {
        ProblemError::InvalidScenario(_)
        | ProblemError::Net(_)
        | ProblemError::RequirementCount { .. }
        | ProblemError::InvalidRequirement { .. }
        | ProblemError::InvalidZeta(_) => EXIT_INPUT,
        ProblemError::Qp(q) => qp_exit_code(q),
        ProblemError::NotOptimal(_) | ProblemError::RatioMismatch { .. } => EXIT_SOLVER,
    }
}

impl Error {
    /// Process exit status: 1 output failure, 2 invalid input, 3 infeasible,
    /// 4 solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Net(_) | Error::Analytic(_) | Error::Input(_) => EXIT_INPUT,
            Error::Output { .. } => EXIT_OUTPUT,
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::Qp(e) => qp_exit_code(e),
            Error::Problem(e) => problem_exit_code(e),
            Error::Policy(e) => match e {
                PolicyError::InvalidConfig(_) | PolicyError::InvalidZeta(_) | PolicyError::ThreadPool(_) => {
                    EXIT_INPUT
                }
                PolicyError::BracketInvalid(_) | PolicyError::BaselineInfeasible | PolicyError::AllInfeasible => {
                    EXIT_INFEASIBLE
                }
                PolicyError::InconsistentProbe(_) => EXIT_SOLVER,
                PolicyError::Problem(p) => problem_exit_code(p),
                PolicyError::Qp(q) => qp_exit_code(q),
            },
        }
    }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/analytic.md")]
    mod analytic {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/policy.md")]
    mod policy {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
}
