use std::fmt;
use std::str::FromStr;

use crate::error::{DecodeError, Error, InsertError, Result};

/// The filter families, with their serialization kind bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FilterKind {
    Bloom = 0x01,
    Counting = 0x02,
    Blocked = 0x03,
    Quotient = 0x04,
    FuzzyFolded = 0x05,
    Cuckoo = 0x06,
}

impl FilterKind {
    pub const ALL: [FilterKind; 6] = [
        FilterKind::Bloom,
        FilterKind::Counting,
        FilterKind::Blocked,
        FilterKind::Quotient,
        FilterKind::FuzzyFolded,
        FilterKind::Cuckoo,
    ];

    pub fn byte(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Bloom => "bloom",
            FilterKind::Counting => "counting",
            FilterKind::Blocked => "blocked",
            FilterKind::Quotient => "quotient",
            FilterKind::FuzzyFolded => "fuzzyfold",
            FilterKind::Cuckoo => "cuckoo",
        }
    }

    pub fn supports_removal(self) -> bool {
        matches!(
            self,
            FilterKind::Counting | FilterKind::Quotient | FilterKind::Cuckoo
        )
    }
}

impl TryFrom<u8> for FilterKind {
    type Error = DecodeError;

    fn try_from(b: u8) -> Result<Self, DecodeError> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.byte() == b)
            .ok_or(DecodeError::UnknownKind(b))
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown filter kind `{s}`")))
    }
}

/// Operations every filter in this crate supports.
pub trait MembershipFilter {
    fn kind(&self) -> FilterKind;

    /// Adds an element. Filters with bounded capacity may refuse it.
    fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError>;

    fn contains(&self, element: &[u8]) -> bool;

    /// Number of insert calls that succeeded (removals subtract where supported).
    fn len(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bits of filter state, excluding fixed-size bookkeeping.
    fn storage_bits(&self) -> u64;

    fn reset_probe_counter(&self);

    /// Distinct modeled cache regions touched since the last reset.
    fn read_probe_counter(&self) -> u64;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_bytes_round_trip() {
        for k in FilterKind::ALL {
            assert_eq!(FilterKind::try_from(k.byte()).unwrap(), k);
            assert_eq!(k.name().parse::<FilterKind>().unwrap(), k);
        }
        assert_eq!(FilterKind::try_from(0x07), Err(DecodeError::UnknownKind(7)));
        assert!("nope".parse::<FilterKind>().is_err());
    }
}
