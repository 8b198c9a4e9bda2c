//! Reduced words in the free group `F_k`.
//!
//! A letter is a `u8`: `2i` encodes the generator `a_i` and `2i + 1` its
//! inverse, so inverting a letter is `l ^ 1`. Words are printed with
//! lowercase letters for generators and uppercase for inverses
//! (`"aB"` is `a_0 a_1^{-1}`).

use std::fmt;

use super::GeometryError;

/// Largest supported rank; each generator needs its own alphabet letter.
pub const MAX_RANK: u8 = 26;

#[inline]
pub fn inverse_letter(l: u8) -> u8 {
    l ^ 1
}

/// A freely reduced word. Every constructor re-reduces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(index: u8, inverse: bool) -> Self {
        Word(vec![2 * index + u8::from(inverse)])
    }

    /// Builds a word from arbitrary letters, reducing as it goes.
    pub fn from_letters<I: IntoIterator<Item = u8>>(letters: I) -> Self {
        let mut w = Word::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    /// Parses `a..z` / `A..Z`, checking letters against `rank`.
    /// `"e"` is not special: the identity is the empty string or `"1"`.
    pub fn parse(s: &str, rank: u8) -> Result<Self, GeometryError> {
        let s = s.trim();
        if s == "1" {
            return Ok(Word::identity());
        }
        let mut w = Word::identity();
        for ch in s.chars() {
            let (idx, inv) = if ch.is_ascii_lowercase() {
                (ch as u8 - b'a', false)
            } else if ch.is_ascii_uppercase() {
                (ch as u8 - b'A', true)
            } else {
                return Err(GeometryError::BadWord(s.to_string()));
            };
            if idx >= rank {
                return Err(GeometryError::BadWord(format!(
                    "{s}: letter {ch} outside rank {rank}"
                )));
            }
            w.push(2 * idx + u8::from(inv));
        }
        Ok(w)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    /// Highest generator index used, if any.
    pub fn max_generator(&self) -> Option<u8> {
        self.0.iter().map(|l| l / 2).max()
    }

    /// Right-multiplies by one letter, cancelling if needed.
    #[inline]
    pub fn push(&mut self, l: u8) {
        if self.0.last() == Some(&inverse_letter(l)) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    /// Right-multiplies in place by a reduced word.
    #[inline]
    pub fn mul_assign(&mut self, rhs: &[u8]) {
        for &l in rhs {
            self.push(l);
        }
    }

    pub fn mul(&self, rhs: &Word) -> Word {
        let mut out = self.clone();
        out.mul_assign(&rhs.0);
        out
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| inverse_letter(l)).collect())
    }

    pub fn pow(&self, e: i64) -> Word {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..e.unsigned_abs() {
            out.mul_assign(&base.0);
        }
        out
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        common_prefix(&self.0, &other.0)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }
}

#[inline]
pub fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for &l in &self.0 {
            let base = if l & 1 == 0 { b'a' } else { b'A' };
            write!(f, "{}", (base + l / 2) as char)?;
        }
        Ok(())
    }
}

/// Number of elements in the ball of radius `r` of the Cayley graph of `F_k`
/// with respect to the standard generators.
pub fn ball_size(rank: u8, r: u64) -> f64 {
    let k = f64::from(rank);
    if rank == 0 {
        return 1.0;
    }
    let mut total = 1.0;
    let mut sphere = 2.0 * k;
    for _ in 0..r {
        total += sphere;
        sphere *= 2.0 * k - 1.0;
    }
    total
}

/// All reduced words of length at most `radius`, in shortlex order.
pub fn enumerate_ball(rank: u8, radius: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..radius {
        let mut next = Vec::with_capacity(frontier.len() * (2 * rank as usize));
        for w in &frontier {
            for l in 0..2 * rank {
                if w.0.last() == Some(&inverse_letter(l)) {
                    continue;
                }
                let mut v = w.clone();
                v.0.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reduce() {
        let w = Word::parse("abBa", 2).unwrap();
        assert_eq!(w.to_string(), "aa");
        assert_eq!(Word::parse("aA", 2).unwrap(), Word::identity());
        assert!(Word::parse("c", 2).is_err());
        assert!(Word::parse("a1", 2).is_err());
    }

    #[test]
    fn inverse_cancels() {
        let w = Word::parse("abAAb", 2).unwrap();
        assert!(w.mul(&w.inverse()).is_empty());
        assert_eq!(w.pow(-1), w.inverse());
        assert_eq!(Word::parse("ab", 2).unwrap().pow(2).to_string(), "abab");
    }

    #[test]
    fn ball_counts_match_enumeration() {
        for rank in 1..=3u8 {
            for r in 0..5usize {
                assert_eq!(enumerate_ball(rank, r).len() as f64, ball_size(rank, r as u64));
            }
        }
        assert_eq!(ball_size(2, 6), 1457.0);
        assert_eq!(ball_size(2, 10), 118097.0);
    }
}
