use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Transceiver schemes that the sweep harness can simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Em,
    Fem,
    Pa,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Em, Scheme::Fem, Scheme::Pa];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Em => "em",
            Scheme::Fem => "fem",
            Scheme::Pa => "pa",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "em" => Ok(Scheme::Em),
            "fem" => Ok(Scheme::Fem),
            "pa" => Ok(Scheme::Pa),
            other => Err(Error::Domain(format!("unknown scheme '{other}'"))),
        }
    }
}

/// How many subcarriers a scheme activates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SelectionMode {
    /// The subchannel count that keeps the error probability vanishing.
    Theoretical,
    /// Every subcarrier, M = B, regardless of reliability.
    #[default]
    AllSubcarriers,
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMode::Theoretical => "theoretical",
            SelectionMode::AllSubcarriers => "all-subcarriers",
        })
    }
}

impl FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "theoretical" => Ok(SelectionMode::Theoretical),
            "all-subcarriers" => Ok(SelectionMode::AllSubcarriers),
            other => Err(Error::Domain(format!("unknown mode '{other}'"))),
        }
    }
}
