use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::MetricGroup;

/// A generator of F₂ or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub fn inverse(self) -> Self {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::A => "a",
            Letter::AInv => "a⁻¹",
            Letter::B => "b",
            Letter::BInv => "b⁻¹",
        })
    }
}

/// A reduced word in F₂. No two adjacent letters are mutually inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    /// Freely reduces `letters`.
    pub fn new<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        push_reduced(&mut out, letters);
        Self(out)
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

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Reduced concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Self {
        let mut out = self.0.clone();
        push_reduced(&mut out, other.0.iter().copied());
        Self(out)
    }

    fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0].inverse() != w[1])
    }
}

fn push_reduced<I: IntoIterator<Item = Letter>>(buf: &mut Vec<Letter>, letters: I) {
    for l in letters {
        if buf.last() == Some(&l.inverse()) {
            buf.pop();
        } else {
            buf.push(l);
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid free-group word {input:?} at byte {position}")]
pub struct ParseWordError {
    pub input: String,
    pub position: usize,
}

impl FromStr for Word {
    type Err = ParseWordError;

    /// Accepts `a`, `b`, their inverses as `a⁻¹`, `a^-1` or `A`, and `e` or
    /// the empty string for the identity. Whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |position| ParseWordError { input: s.to_string(), position };
        let mut letters = Vec::new();
        let mut rest = s;
        while let Some(c) = rest.chars().next() {
            let position = s.len() - rest.len();
            rest = &rest[c.len_utf8()..];
            let base = match c {
                c if c.is_whitespace() => continue,
                'e' => continue,
                'a' => Letter::A,
                'b' => Letter::B,
                'A' => {
                    letters.push(Letter::AInv);
                    continue;
                }
                'B' => {
                    letters.push(Letter::BInv);
                    continue;
                }
                _ => return Err(err(position)),
            };
            let inverted = if let Some(r) = rest.strip_prefix("⁻¹") {
                rest = r;
                true
            } else if let Some(r) = rest.strip_prefix("^-1") {
                rest = r;
                true
            } else {
                false
            };
            letters.push(if inverted { base.inverse() } else { base });
        }
        Ok(Word::new(letters))
    }
}

/// The free group on `{a, b}` with the word metric `d(x, y) = |x⁻¹y|`.
///
/// Complete: the metric is integer-valued, so Cauchy sequences are
/// eventually constant. All operations are exact.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FreeGroup2;

impl MetricGroup for FreeGroup2 {
    type Element = Word;

    fn name(&self) -> &'static str {
        "free-group-2"
    }

    fn identity(&self) -> Word {
        Word::identity()
    }

    fn op(&self, a: &Word, b: &Word) -> Word {
        a.concat(b)
    }

    fn inv(&self, a: &Word) -> Word {
        a.inverse()
    }

    fn dist(&self, a: &Word, b: &Word) -> f64 {
        a.inverse().concat(b).len() as f64
    }

    fn tolerance(&self) -> f64 {
        0.0
    }

    fn is_commutative(&self) -> bool {
        false
    }

    fn is_valid(&self, a: &Word) -> bool {
        a.is_reduced()
    }

    fn approx_eq(&self, a: &Word, b: &Word) -> bool {
        a == b
    }
}
