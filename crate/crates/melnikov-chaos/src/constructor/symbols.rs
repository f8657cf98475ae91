//! One-sided symbol sequences over `{0, 1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Every symbol after the prefix is `0`.
    Zeros,
    /// Symbols after the prefix are not prescribed.
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSide {
    Future,
    Past,
}

impl TimeSide {
    pub fn other(self) -> TimeSide {
        match self {
            TimeSide::Future => TimeSide::Past,
            TimeSide::Past => TimeSide::Future,
        }
    }
}

/// `prefix[0]` is `e₁` on the future side and `e₋₁` on the past side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSequence {
    pub prefix: Vec<u8>,
    pub tail: Tail,
    pub side: TimeSide,
}

impl SymbolSequence {
    pub fn new(prefix: Vec<u8>, tail: Tail, side: TimeSide) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::Config("symbol prefix is empty".into()));
        }
        if prefix.iter().any(|&s| s > 1) {
            return Err(Error::Config(format!("symbols must be 0 or 1, got {prefix:?}")));
        }
        Ok(SymbolSequence { prefix, tail, side })
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str, tail: Tail, side: TimeSide) -> Result<Self> {
        let prefix = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Config(format!("bad symbol {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(prefix, tail, side)
    }

    /// Symbol at distance `j ≥ 1` from the present; `None` past an unspecified prefix.
    pub fn symbol(&self, j: usize) -> Option<u8> {
        if j == 0 {
            return None;
        }
        match self.prefix.get(j - 1) {
            Some(&s) => Some(s),
            None if self.tail == Tail::Zeros => Some(0),
            None => None,
        }
    }

    /// Number of `1`s in the prefix (all of them for a zero tail).
    pub fn ones(&self) -> usize {
        self.prefix.iter().filter(|&&s| s == 1).count()
    }

    /// Index of the last `1` in the prefix.
    pub fn last_one(&self) -> Option<usize> {
        self.prefix.iter().rposition(|&s| s == 1).map(|i| i + 1)
    }

    /// Indices `k` with `e_k = 1`, in order.
    pub fn one_indices(&self) -> Vec<usize> {
        (1..=self.prefix.len()).filter(|&k| self.prefix[k - 1] == 1).collect()
    }

    pub fn is_null(&self) -> bool {
        self.tail == Tail::Zeros && self.ones() == 0
    }

    /// The same symbols read on the other side of the present.
    pub fn reflected(&self) -> SymbolSequence {
        SymbolSequence {
            side: self.side.other(),
            ..self.clone()
        }
    }

    pub fn label(&self) -> String {
        let body: String = self.prefix.iter().map(|s| char::from(b'0' + s)).collect();
        match self.tail {
            Tail::Zeros => format!("{body}(0)"),
            Tail::Unspecified => format!("{body}*"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_and_counts() {
        let e = SymbolSequence::parse("0101", Tail::Zeros, TimeSide::Future).unwrap();
        assert_eq!(e.ones(), 2);
        assert_eq!(e.last_one(), Some(4));
        assert_eq!(e.one_indices(), vec![2, 4]);
        assert_eq!(e.symbol(1), Some(0));
        assert_eq!(e.symbol(9), Some(0));
        let u = SymbolSequence::parse("1", Tail::Unspecified, TimeSide::Future).unwrap();
        assert_eq!(u.symbol(2), None);
        assert_eq!(e.label(), "0101(0)");
    }

    #[test]
    fn bad_input_is_a_config_error() {
        assert!(matches!(
            SymbolSequence::parse("12", Tail::Zeros, TimeSide::Future),
            Err(Error::Config(_))
        ));
        assert!(SymbolSequence::new(vec![], Tail::Zeros, TimeSide::Past).is_err());
    }
}
