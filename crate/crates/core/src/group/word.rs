use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// A generator (`+i`) or its inverse (`-i`), with `i` counted from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Letter(i8);

impl Letter {
    pub fn new(signed_index: i8) -> Result<Self> {
        if signed_index == 0 {
            return Err(Error::InvalidArgument("letter index 0".into()));
        }
        Ok(Self(signed_index))
    }

    pub fn generator(index: usize) -> Self {
        Self(index as i8 + 1)
    }

    pub fn signed_index(self) -> i8 {
        self.0
    }

    /// Zero-based generator index.
    pub fn index(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Self(-self.0)
    }

    /// Position in the alphabet order `+1 < -1 < +2 < -2 < ...`.
    pub fn rank(self) -> u8 {
        2 * (self.0.unsigned_abs() - 1) + u8::from(self.0 < 0)
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

/// A group element written as a product of letters, leftmost factor applied last.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// No letter is immediately followed by its inverse.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inverse())
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn with(&self, letter: Letter) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() + 1);
        letters.extend_from_slice(&self.0);
        letters.push(letter);
        Word(letters)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Concatenation with free cancellation at the junction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        for &l in &other.0 {
            if letters.last() == Some(&l.inverse()) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Word(letters)
    }
}

/// Shortlex order: shorter words first, then lexicographic in letter rank.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::identity());
        }
        s.split('.')
            .map(|tok| {
                if !tok.starts_with(['+', '-']) {
                    return Err(Error::InvalidArgument(format!("letter {tok:?} lacks a sign")));
                }
                let v: i8 = tok
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad letter {tok:?}")))?;
                Letter::new(v)
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn formatting() {
        assert_eq!(w("+1.-2.+1").to_string(), "+1.-2.+1");
        assert_eq!(Word::identity().to_string(), "");
        assert!("1.-2".parse::<Word>().is_err());
        assert!("+0".parse::<Word>().is_err());
    }

    #[test]
    fn shortlex() {
        assert!(w("+2") < w("+1.+1"));
        assert!(w("+1") < w("-1"));
        assert!(w("-1") < w("+2"));
        assert!(w("+1.-2") < w("+1.+3"));
    }

    #[test]
    fn reduction() {
        assert!(w("+1.+2.-1").is_reduced());
        assert!(!w("+1.-1").is_reduced());
        assert_eq!(w("+1.+2").concat(&w("-2.+3")), w("+1.+3"));
        assert_eq!(w("+1.+2").concat(&w("+1.+2").inverse()), Word::identity());
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(letters in proptest::collection::vec(prop_oneof![-4i8..=-1, 1i8..=4], 0..12)) {
            let word = Word::from_letters(letters.into_iter().map(|l| Letter::new(l).unwrap()).collect());
            prop_assert_eq!(word.to_string().parse::<Word>().unwrap(), word);
        }
    }
}
