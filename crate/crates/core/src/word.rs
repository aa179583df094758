//! Fixed-length binary words and arithmetic progressions of their digit-1
//! positions.
//!
//! A word `d_1 d_2 ... d_N` denotes the dyadic rational `sum d_i 2^-i`, so the
//! first digit is the most significant one. Internally the word is stored as
//! its numerator `m` (the word denotes `m / 2^N`) in little-endian 64-bit
//! limbs; digit `i` is bit `N - i` of `m`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;

/// Errors produced when building or transforming words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordError {
    /// No digits left after stripping the optional `0.` prefix.
    Empty,
    /// A character other than `0` or `1`; `column` is 1-based in the input.
    IllegalChar { column: usize, found: char },
    /// `shift_word` asked to drop more digits than the word has.
    ShiftTooLong { shift: usize, len: usize },
    /// Binary operation on words of different lengths.
    LengthMismatch { left: usize, right: usize },
    /// Word length 0 requested.
    ZeroLength,
}

impl fmt::Display for WordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordError::Empty => f.write_str("empty word: expected at least one binary digit"),
            WordError::IllegalChar { column, found } => {
                write!(f, "illegal character {found:?} at column {column}: expected '0' or '1'")
            }
            WordError::ShiftTooLong { shift, len } => {
                write!(f, "cannot shift a word of length {len} by {shift} digits")
            }
            WordError::LengthMismatch { left, right } => {
                write!(f, "word lengths differ: {left} vs {right}")
            }
            WordError::ZeroLength => f.write_str("word length must be at least 1"),
        }
    }
}

impl core::error::Error for WordError {}

/// A finite 0/1 digit string identified with a dyadic rational in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryWord {
    len: usize,
    // numerator, little-endian; bits at index >= len are always zero
    limbs: Vec<u64>,
}

#[inline]
fn limb_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BinaryWord {
    /// The all-zeros word of the given length.
    ///
    /// # Panics
    ///
    /// Panics if `len == 0`.
    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "word length must be at least 1");
        BinaryWord { len, limbs: vec![0; limb_count(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut w = Self::zeros(len);
        for limb in w.limbs.iter_mut() {
            *limb = u64::MAX;
        }
        w.normalize();
        w
    }

    /// Builds a word from digits given most significant first.
    pub fn from_digits(digits: &[u8]) -> Result<Self, WordError> {
        if digits.is_empty() {
            return Err(WordError::ZeroLength);
        }
        let mut w = Self::zeros(digits.len());
        for (i, &d) in digits.iter().enumerate() {
            match d {
                0 => {}
                1 => w.set_digit(i + 1, true),
                other => {
                    return Err(WordError::IllegalChar {
                        column: i + 1,
                        found: char::from_digit(u32::from(other) % 36, 36).unwrap_or('?'),
                    })
                }
            }
        }
        Ok(w)
    }

    /// The word of length `len` whose numerator is `value`, i.e. the word
    /// denoting `value / 2^len`. Bits of `value` at or above `len` are dropped.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut w = Self::zeros(len);
        w.limbs[0] = value;
        w.normalize();
        w
    }

    pub fn from_numerator(value: &BigUint, len: usize) -> Self {
        let mut w = Self::zeros(len);
        for (dst, src) in w.limbs.iter_mut().zip(value.iter_u64_digits()) {
            *dst = src;
        }
        w.normalize();
        w
    }

    pub(crate) fn from_limbs(mut limbs: Vec<u64>, len: usize) -> Self {
        limbs.resize(limb_count(len), 0);
        let mut w = BinaryWord { len, limbs };
        w.normalize();
        w
    }

    fn normalize(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            let last = self.limbs.len() - 1;
            self.limbs[last] &= (1u64 << rem) - 1;
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false: words have at least one digit.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// Digit at 1-based position `i`.
    ///
    /// # Panics
    ///
    /// Panics if `i` is 0 or exceeds the length.
    #[inline]
    pub fn digit(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len, "digit position {i} out of range 1..={}", self.len);
        let b = self.len - i;
        (self.limbs[b / 64] >> (b % 64)) & 1 == 1
    }

    /// Like [`digit`](Self::digit) but out-of-range positions read as 0.
    #[inline]
    pub fn digit_or_zero(&self, i: usize) -> bool {
        i >= 1 && i <= self.len && self.digit(i)
    }

    #[inline]
    pub fn set_digit(&mut self, i: usize, one: bool) {
        assert!(i >= 1 && i <= self.len, "digit position {i} out of range 1..={}", self.len);
        let b = self.len - i;
        let mask = 1u64 << (b % 64);
        if one {
            self.limbs[b / 64] |= mask;
        } else {
            self.limbs[b / 64] &= !mask;
        }
    }

    /// Digits most significant first.
    pub fn digits(&self) -> impl DoubleEndedIterator<Item = bool> + '_ {
        (1..=self.len).map(move |i| self.digit(i))
    }

    /// Ascending 1-based positions of digit 1.
    pub fn one_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count_ones());
        for (li, &limb) in self.limbs.iter().enumerate().rev() {
            let mut bits = limb;
            while bits != 0 {
                let top = 63 - bits.leading_zeros() as usize;
                bits &= !(1u64 << top);
                out.push(self.len - (li * 64 + top));
            }
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    /// Numerator `m` such that the word denotes `m / 2^len`.
    pub fn numerator(&self) -> BigUint {
        let mut digits = Vec::with_capacity(self.limbs.len() * 2);
        for &l in &self.limbs {
            digits.push(l as u32);
            digits.push((l >> 32) as u32);
        }
        BigUint::new(digits)
    }

    /// Numerator as `u64` when it fits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.limbs[1..].iter().all(|&l| l == 0) {
            Some(self.limbs[0])
        } else {
            None
        }
    }

    /// Digitwise OR.
    pub fn or(&self, other: &Self) -> Result<Self, WordError> {
        self.zip_limbs(other, |a, b| a | b)
    }

    /// Digitwise AND.
    pub fn and(&self, other: &Self) -> Result<Self, WordError> {
        self.zip_limbs(other, |a, b| a & b)
    }

    fn zip_limbs(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self, WordError> {
        check_same_len(self, other)?;
        let limbs = self.limbs.iter().zip(&other.limbs).map(|(&a, &b)| f(a, b)).collect();
        Ok(BinaryWord { len: self.len, limbs })
    }

    /// Concatenates `self` followed by `tail`.
    pub fn concat(&self, tail: &Self) -> Self {
        let mut w = Self::zeros(self.len + tail.len);
        for p in self.one_positions() {
            w.set_digit(p, true);
        }
        for p in tail.one_positions() {
            w.set_digit(self.len + p, true);
        }
        w
    }

    /// Renders as `0.d1d2...`.
    pub fn to_fraction_string(&self) -> String {
        let mut s = String::with_capacity(self.len + 2);
        s.push_str("0.");
        for d in self.digits() {
            s.push(if d { '1' } else { '0' });
        }
        s
    }
}

pub(crate) fn check_same_len(x: &BinaryWord, y: &BinaryWord) -> Result<(), WordError> {
    if x.len != y.len {
        Err(WordError::LengthMismatch { left: x.len, right: y.len })
    } else {
        Ok(())
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            f.write_str(if d { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryWord({self})")
    }
}

impl FromStr for BinaryWord {
    type Err = WordError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_word(text)
    }
}

/// Parses `0`/`1` digits, optionally prefixed by `0.`.
pub fn parse_word(text: &str) -> Result<BinaryWord, WordError> {
    let (body, offset) = match text.strip_prefix("0.") {
        Some(rest) => (rest, 2),
        None => (text, 0),
    };
    if body.is_empty() {
        return Err(WordError::Empty);
    }
    let mut digits = Vec::with_capacity(body.len());
    for (i, ch) in body.chars().enumerate() {
        match ch {
            '0' => digits.push(0),
            '1' => digits.push(1),
            found => return Err(WordError::IllegalChar { column: offset + i + 1, found }),
        }
    }
    BinaryWord::from_digits(&digits)
}

/// Positions `start, start + gap, ..., start + (terms - 1) gap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Progression {
    pub start: usize,
    pub gap: usize,
    pub terms: usize,
}

impl Progression {
    pub fn positions(&self) -> impl Iterator<Item = usize> {
        let Progression { start, gap, terms } = *self;
        (0..terms).map(move |j| start + j * gap)
    }

    pub fn last(&self) -> usize {
        self.start + (self.terms - 1) * self.gap
    }
}

/// Result of [`longest_ap`]: the maximal number of terms and a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LongestAp {
    pub len: usize,
    pub witness: Option<Progression>,
}

/// Longest arithmetic progression inside an ascending list of positions.
///
/// Ties are broken by smallest start, then smallest gap. A single element is
/// reported as a one-term progression with gap 1.
pub fn longest_ap_in(sorted: &[usize], contains: impl Fn(usize) -> bool) -> LongestAp {
    match sorted {
        [] => return LongestAp { len: 0, witness: None },
        [only] => return LongestAp { len: 1, witness: Some(Progression { start: *only, gap: 1, terms: 1 }) },
        _ => {}
    }
    let max = *sorted.last().unwrap();
    let mut best = Progression { start: sorted[0], gap: sorted[1] - sorted[0], terms: 2 };
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            let gap = b - a;
            // cannot strictly beat the current best from here on
            if (max - a) / gap < best.terms {
                break;
            }
            if a > gap && contains(a - gap) {
                continue;
            }
            let mut terms = 2;
            let mut next = b + gap;
            while next <= max && contains(next) {
                terms += 1;
                next += gap;
            }
            if terms > best.terms {
                best = Progression { start: a, gap, terms };
            }
        }
    }
    LongestAp { len: best.terms, witness: Some(best) }
}

/// Longest progression of digit-1 positions of `w`.
pub fn longest_ap(w: &BinaryWord) -> LongestAp {
    let ones = w.one_positions();
    longest_ap_in(&ones, |p| w.digit_or_zero(p))
}

/// True iff `w` has no `k`-term progression of digit-1 positions.
pub fn is_k_ap_free(w: &BinaryWord, k: usize) -> bool {
    longest_ap(w).len < k
}

/// True iff `positions ∪ {p}` holds a `k`-term progression ending at `p`.
///
/// `positions` must be ascending with every element below `p`.
pub fn completes_ap(positions: &[usize], p: usize, k: usize) -> bool {
    if k <= 1 {
        return true;
    }
    let has = |q: usize| positions.binary_search(&q).is_ok();
    let max_gap = (p - 1) / (k - 1);
    (1..=max_gap).any(|gap| (1..k).all(|j| has(p - j * gap)))
}

/// Drops the first `t` digits, realising `x -> 2^t x mod 1`.
///
/// Dropping every digit yields the one-digit zero word.
pub fn shift_word(w: &BinaryWord, t: usize) -> Result<BinaryWord, WordError> {
    if t > w.len {
        return Err(WordError::ShiftTooLong { shift: t, len: w.len });
    }
    if t == w.len {
        return Ok(BinaryWord::zeros(1));
    }
    // the numerator mod 2^(len - t) is exactly the tail
    Ok(BinaryWord::from_limbs(w.limbs.clone(), w.len - t))
}

/// Binary subsequence relation with an explicit shift `n`: `y` has no ones at
/// positions `1..=n`, and every one of `y` at position `i + n` sits over a one
/// of `x` at position `i`.
pub fn is_subsequence(y: &BinaryWord, x: &BinaryWord, shift: usize) -> bool {
    y.one_positions().into_iter().all(|p| p > shift && x.digit_or_zero(p - shift))
}

/// Smallest shift in `1..=len(y)` witnessing [`is_subsequence`], if any.
pub fn subsequence_shift(y: &BinaryWord, x: &BinaryWord) -> Option<usize> {
    (1..=y.len()).find(|&n| is_subsequence(y, x, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn w(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    // independent oracle: every (start, gap) pair, full extension
    fn brute_longest(word: &BinaryWord) -> usize {
        let n = word.len();
        let mut best = 0;
        for start in 1..=n {
            if !word.digit(start) {
                continue;
            }
            best = best.max(1);
            for gap in 1..n {
                let mut t = 0;
                while start + t * gap <= n && word.digit(start + t * gap) {
                    t += 1;
                }
                best = best.max(t);
            }
        }
        best
    }

    #[test]
    fn parse_examples() {
        let a = w("0.101");
        assert_eq!(a.len(), 3);
        assert_eq!(a.to_u64(), Some(5));
        assert_eq!(w("0").to_u64(), Some(0));
        let b = w("0111110");
        assert_eq!((b.len(), b.to_u64()), (7, Some(62)));
    }

    #[test]
    fn parse_errors_are_positioned() {
        assert_eq!(parse_word(""), Err(WordError::Empty));
        assert_eq!(parse_word("0."), Err(WordError::Empty));
        assert_eq!(parse_word("0.10x1"), Err(WordError::IllegalChar { column: 5, found: 'x' }));
        assert_eq!(parse_word("12"), Err(WordError::IllegalChar { column: 2, found: '2' }));
    }

    #[test]
    fn one_positions_examples() {
        assert_eq!(w("101").one_positions(), vec![1, 3]);
        assert!(w("0000").one_positions().is_empty());
        assert_eq!(w("0111110").one_positions(), vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn one_positions_across_limbs() {
        let mut long = BinaryWord::zeros(150);
        for p in [1, 63, 64, 65, 128, 150] {
            long.set_digit(p, true);
        }
        assert_eq!(long.one_positions(), vec![1, 63, 64, 65, 128, 150]);
    }

    #[test]
    fn longest_ap_examples() {
        assert_eq!(longest_ap(&w("0000")), LongestAp { len: 0, witness: None });
        assert_eq!(longest_ap(&w("1110")).witness, Some(Progression { start: 1, gap: 1, terms: 3 }));
        assert_eq!(longest_ap(&w("101011")).witness, Some(Progression { start: 1, gap: 2, terms: 3 }));
        assert_eq!(longest_ap(&w("0100")).len, 1);
    }

    #[test]
    fn longest_ap_matches_brute_force_and_witness_is_sound() {
        for len in 1..=12usize {
            for v in 0..(1u64 << len) {
                let word = BinaryWord::from_u64(v, len);
                let got = longest_ap(&word);
                assert_eq!(got.len, brute_longest(&word), "{word}");
                if let Some(p) = got.witness {
                    assert_eq!(p.terms, got.len);
                    assert!(p.positions().all(|q| word.digit_or_zero(q)));
                }
            }
        }
    }

    #[test]
    fn is_k_ap_free_examples() {
        assert!(!is_k_ap_free(&w("101011"), 3));
        assert!(is_k_ap_free(&w("1001000"), 3));
        assert!(is_k_ap_free(&w("1101"), 3));
    }

    #[test]
    fn completes_ap_examples() {
        assert!(completes_ap(&[1, 3], 5, 3));
        assert!(!completes_ap(&[], 7, 3));
        assert!(!completes_ap(&[1, 2, 4], 5, 3));
        assert!(completes_ap(&[1, 2, 4], 6, 3));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_word(&w("101"), 1).unwrap(), w("01"));
        assert_eq!(shift_word(&w("101"), 0).unwrap(), w("101"));
        assert_eq!(shift_word(&w("1101"), 2).unwrap(), w("01"));
        assert_eq!(shift_word(&w("1101"), 4).unwrap(), w("0"));
        assert_eq!(shift_word(&w("11"), 3), Err(WordError::ShiftTooLong { shift: 3, len: 2 }));
    }

    #[test]
    fn subsequence_examples() {
        assert!(is_subsequence(&w("0101"), &w("1010"), 1));
        assert!(is_subsequence(&w("0000"), &w("1"), 3));
        let x = w("1011");
        assert!(is_subsequence(&x, &x, 0));
        assert!(!is_subsequence(&w("1101"), &w("1101"), 1));
        assert_eq!(subsequence_shift(&w("0101"), &w("1010")), Some(1));
    }

    #[test]
    fn display_round_trip() {
        for len in 1..=12usize {
            for v in 0..(1u64 << len) {
                let word = BinaryWord::from_u64(v, len);
                assert_eq!(parse_word(&word.to_string()).unwrap(), word);
                assert_eq!(parse_word(&word.to_fraction_string()).unwrap(), word);
                assert_eq!(word.numerator(), BigUint::from(v));
            }
        }
    }

    #[test]
    fn or_and_need_equal_lengths() {
        assert_eq!(w("10").or(&w("01")).unwrap(), w("11"));
        assert_eq!(w("110").and(&w("011")).unwrap(), w("010"));
        assert!(w("1").or(&w("10")).is_err());
    }
}
