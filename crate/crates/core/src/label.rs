use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The four congestion-control algorithms the classifier distinguishes.
///
/// The class index order (Vegas, Reno, Cubic, BBR) is the column order used in
/// the sample-distribution table and in confusion matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProtocolLabel {
    Vegas,
    Reno,
    Cubic,
    Bbr,
}

impl ProtocolLabel {
    pub const ALL: [ProtocolLabel; 4] = [
        ProtocolLabel::Vegas,
        ProtocolLabel::Reno,
        ProtocolLabel::Cubic,
        ProtocolLabel::Bbr,
    ];

    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        match self {
            ProtocolLabel::Vegas => 0,
            ProtocolLabel::Reno => 1,
            ProtocolLabel::Cubic => 2,
            ProtocolLabel::Bbr => 3,
        }
    }

    pub fn from_index(index: usize) -> Result<Self, Error> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or(Error::LabelOutOfRange(index))
    }

    /// Lower-case name used in file names and on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolLabel::Vegas => "vegas",
            ProtocolLabel::Reno => "reno",
            ProtocolLabel::Cubic => "cubic",
            ProtocolLabel::Bbr => "bbr",
        }
    }

    /// Name as printed in reports ("TCP Vegas", ..., "BBR").
    pub fn display_name(self) -> &'static str {
        match self {
            ProtocolLabel::Vegas => "TCP Vegas",
            ProtocolLabel::Reno => "TCP Reno",
            ProtocolLabel::Cubic => "TCP Cubic",
            ProtocolLabel::Bbr => "BBR",
        }
    }

    /// Recovers the label from a trace file name such as `cubic_42_20250101T060000.csv`.
    ///
    /// Matching is case-insensitive on the leading protocol token.
    pub fn from_file_name(name: &str) -> Option<Self> {
        let lower = name.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|label| lower.starts_with(label.as_str()))
    }
}

impl fmt::Display for ProtocolLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|label| label.as_str() == lower)
            .ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}
