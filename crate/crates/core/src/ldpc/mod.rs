//! LDPC-coded QAM over AWGN, used offline to tabulate BLER/BER curves.

pub mod calibration;
pub mod code;
pub mod decoder;
pub mod modem;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use calibration::{calibrate, BlerCurve, CalibrationParams, CalibrationSet, CurvePoint};
pub use code::LdpcCode;
pub use decoder::{decode, DecodeResult, Decoder};
pub use modem::transmit_awgn;

#[derive(Debug, Error, PartialEq)]
pub enum LdpcError {
    #[error("invalid code parameters: {0}")]
    InvalidParameters(String),
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("no calibration curve for {0}")]
    MissingCurve(Modulation),
    #[error("calibration file line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [
        Modulation::Qpsk,
        Modulation::Qam16,
        Modulation::Qam64,
        Modulation::Qam256,
    ];

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
            Modulation::Qam256 => 8,
        }
    }

    /// 0 for QPSK up to 3 for 256-QAM.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "qam16",
            Modulation::Qam64 => "qam64",
            Modulation::Qam256 => "qam256",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Modulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let alias = match lower.as_str() {
            "16qam" | "16-qam" => "qam16",
            "64qam" | "64-qam" => "qam64",
            "256qam" | "256-qam" => "qam256",
            other => other,
        };
        Modulation::ALL
            .into_iter()
            .find(|m| m.key() == alias)
            .ok_or_else(|| format!("unknown modulation `{s}`"))
    }
}
