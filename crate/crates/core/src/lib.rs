//! Quantum CSS codes built from non-binary quasi-cyclic LDPC matrices over
//! GF(2^p).
//!
//! The pipeline runs in three stages:
//!
//! 1. [`qcpair`] builds an orthogonal pair of binary (2, L, P) quasi-cyclic
//!    matrices free of 4-cycles.
//! 2. [`nblift`] replaces their ones with GF(2^p) elements so that the
//!    non-binary matrices stay orthogonal, solving the log-domain constraints
//!    with [`modring`].
//! 3. [`binexpand`] maps every entry to its p x p companion matrix, giving the
//!    binary parity-check matrices H_C and H_D.
//!
//! [`decoder`] is a syndrome sum-product decoder over GF(2)^p whose check
//! update is a Walsh-Hadamard convolution, [`channel`] samples depolarizing
//! errors and [`harness`] drives Monte Carlo block-error-rate sweeps.

pub mod binexpand;
pub mod channel;
pub mod decoder;
pub mod error;
pub mod gf2p;
pub mod harness;
pub mod modring;
pub mod nblift;
pub mod qcpair;

use std::fmt;
use std::str::FromStr;

pub use binexpand::CssCodePair;
pub use error::{Error, Result};
pub use gf2p::{BitMatrix, FieldElement, FieldSpec};
pub use nblift::NbMatrix;
pub use qcpair::{QcParams, SparseBinaryMatrix};

/// Which constituent code of the CSS pair. `C` is defined by H_Gamma (block
/// map A), `D` by H_Delta (block map A transposed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    C,
    D,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::C => Role::D,
            Role::D => Role::C,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::C => "C",
            Role::D => "D",
        })
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" | "GAMMA" => Ok(Role::C),
            "D" | "d" | "DELTA" => Ok(Role::D),
            other => Err(Error::DomainError(format!("unknown role {other:?}"))),
        }
    }
}
