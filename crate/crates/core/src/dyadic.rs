//! Exact dyadic arithmetic on fixed-length words, the two-step carry
//! decomposition of a sum, and pair scans over AP-free words.
//!
//! Sums stay at the operand length and drop the carry out of position 1,
//! which is exactly reduction mod 1. Products are exact in the reals and take
//! twice the operand length.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::enumeration::Enumerator;
use crate::word::{check_same_len, longest_ap, BinaryWord, LongestAp, Progression, WordError};

/// `x + y mod 1` at the common length.
pub fn add_mod1(x: &BinaryWord, y: &BinaryWord) -> Result<BinaryWord, WordError> {
    check_same_len(x, y)?;
    let mut carry = false;
    let limbs = x
        .limbs()
        .iter()
        .zip(y.limbs())
        .map(|(&a, &b)| {
            let (s1, c1) = a.overflowing_add(b);
            let (s2, c2) = s1.overflowing_add(u64::from(carry));
            carry = c1 || c2;
            s2
        })
        .collect();
    Ok(BinaryWord::from_limbs(limbs, x.len()))
}

/// Exact product `x * y` as a word of length `2N`.
pub fn multiply(x: &BinaryWord, y: &BinaryWord) -> Result<BinaryWord, WordError> {
    check_same_len(x, y)?;
    let (a, b) = (x.limbs(), y.limbs());
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let mut carry = 0u128;
        for (j, &bj) in b.iter().enumerate() {
            let t = u128::from(ai) * u128::from(bj) + u128::from(out[i + j]) + carry;
            out[i + j] = t as u64;
            carry = t >> 64;
        }
        let mut idx = i + b.len();
        while carry != 0 {
            let t = u128::from(out[idx]) + carry;
            out[idx] = t as u64;
            carry = t >> 64;
            idx += 1;
        }
    }
    Ok(BinaryWord::from_limbs(out, 2 * x.len()))
}

/// The two-step form of a sum: `s` takes the ones of `x` placed into the
/// zeros of `y`, `r` keeps the ones of `y` that found no room, and
/// `sum = s + r = x + y mod 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SumDecomposition {
    pub x: BinaryWord,
    pub y: BinaryWord,
    pub s: BinaryWord,
    pub r: BinaryWord,
    pub sum: BinaryWord,
}

/// Which [`SumDecomposition`] invariant failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionViolation {
    /// `s` is not the digitwise OR of `x`, `y`.
    SNotOr { position: usize },
    /// `r` is not the digitwise AND of `x`, `y`.
    RNotAnd { position: usize },
    /// `s + r` differs from `x + y`.
    SumMismatch,
    /// A one of `s` or `r` has no source, or `r` has a one where `s` has 0.
    Support { position: usize },
}

/// Splits `x + y` using the per-digit rule: `s_i = 1` when exactly one of
/// `x_i, y_i` is 1 and `s_i = x_i` otherwise; `r_i = 0` when `x_i = 0, y_i = 1`
/// and `r_i = y_i` otherwise.
pub fn sr_decompose(x: &BinaryWord, y: &BinaryWord) -> Result<SumDecomposition, WordError> {
    check_same_len(x, y)?;
    let n = x.len();
    let mut s = BinaryWord::zeros(n);
    let mut r = BinaryWord::zeros(n);
    for i in 1..=n {
        let (xi, yi) = (x.digit(i), y.digit(i));
        s.set_digit(i, if xi != yi { true } else { xi });
        r.set_digit(i, if !xi && yi { false } else { yi });
    }
    let sum = add_mod1(&s, &r)?;
    Ok(SumDecomposition { x: x.clone(), y: y.clone(), s, r, sum })
}

impl SumDecomposition {
    /// Re-checks every structural invariant from scratch.
    pub fn check(&self) -> Result<(), DecompositionViolation> {
        let n = self.x.len();
        for i in 1..=n {
            let (xi, yi) = (self.x.digit(i), self.y.digit(i));
            let (si, ri) = (self.s.digit(i), self.r.digit(i));
            if si != (xi || yi) {
                return Err(DecompositionViolation::SNotOr { position: i });
            }
            if ri != (xi && yi) {
                return Err(DecompositionViolation::RNotAnd { position: i });
            }
            if (si && !(xi || yi)) || (ri && !yi) || (!si && ri) {
                return Err(DecompositionViolation::Support { position: i });
            }
        }
        let direct = add_mod1(&self.x, &self.y).expect("equal lengths");
        let via = add_mod1(&self.s, &self.r).expect("equal lengths");
        if direct != self.sum || via != self.sum {
            return Err(DecompositionViolation::SumMismatch);
        }
        Ok(())
    }

    /// Where each digit 1 of the sum comes from.
    ///
    /// `None` marks a one that fits none of the three sources; it never occurs
    /// because `r` only has ones inside blocks of ones of `s`.
    pub fn classify_sum_ones(&self) -> Vec<(usize, Option<OneSource>)> {
        let n = self.s.len();
        self.sum
            .one_positions()
            .into_iter()
            .map(|i| {
                let kind = if self.s.digit(i) && !self.r.digit(i) {
                    Some(OneSource::FromS)
                } else if self.r.digit(i) {
                    Some(OneSource::FromR)
                } else if !self.s.digit(i) && i < n && self.s.digit(i + 1) {
                    Some(OneSource::CarryLeftOfBlock)
                } else {
                    None
                };
                (i, kind)
            })
            .collect()
    }

    /// Adds `r` into each maximal block of ones of `s` separately and overlays
    /// the results. Equals `sum` exactly when carries never leave a block
    /// except into the single zero to its left.
    pub fn block_local_sum(&self) -> BinaryWord {
        let n = self.s.len();
        let mut out = BinaryWord::zeros(n);
        for block in blocks_of_ones(&self.s) {
            let mut carry = false;
            for i in block.clone().rev() {
                let t = u8::from(self.s.digit(i)) + u8::from(self.r.digit(i)) + u8::from(carry);
                out.set_digit(i, t & 1 == 1);
                carry = t >= 2;
            }
            if carry && block.start > 1 {
                out.set_digit(block.start - 1, true);
            }
        }
        out
    }
}

/// Source of a digit 1 in `s + r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OneSource {
    /// An unchanged 1 of `s`.
    FromS,
    /// A 1 of `r` at the same position.
    FromR,
    /// A new 1 immediately left of a block of ones of `s`.
    CarryLeftOfBlock,
}

/// Maximal runs of ones as half-open 1-based position ranges.
pub fn blocks_of_ones(w: &BinaryWord) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for i in 1..=w.len() {
        match (w.digit(i), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..w.len() + 1);
    }
    out
}

/// Accumulated result of scanning a range of `(x, y)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairStats {
    pub scanned: u64,
    /// `histogram[L]` counts pairs whose combined word has longest progression `L`.
    pub histogram: Vec<u64>,
    /// First pair (in scan order) attaining the maximum.
    pub best: Option<PairBest>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBest {
    pub x_index: usize,
    pub y_index: usize,
    pub ap: LongestAp,
}

impl PairStats {
    pub fn max_len(&self) -> usize {
        self.best.as_ref().map_or(0, |b| b.ap.len)
    }

    fn observe(&mut self, x_index: usize, y_index: usize, ap: LongestAp) {
        self.scanned += 1;
        if self.histogram.len() <= ap.len {
            self.histogram.resize(ap.len + 1, 0);
        }
        self.histogram[ap.len] += 1;
        if self.best.as_ref().is_none_or(|b| ap.len > b.ap.len) {
            self.best = Some(PairBest { x_index, y_index, ap });
        }
    }

    /// Combines with stats of a range that comes later in scan order.
    pub fn merge(mut self, later: PairStats) -> PairStats {
        self.scanned += later.scanned;
        if self.histogram.len() < later.histogram.len() {
            self.histogram.resize(later.histogram.len(), 0);
        }
        for (h, l) in self.histogram.iter_mut().zip(&later.histogram) {
            *h += l;
        }
        if let Some(b) = later.best {
            if self.best.as_ref().is_none_or(|s| b.ap.len > s.ap.len) {
                self.best = Some(b);
            }
        }
        self
    }
}

/// How two words are combined before measuring progressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOp {
    SumMod1,
    Product,
}

impl PairOp {
    pub fn apply(self, x: &BinaryWord, y: &BinaryWord) -> BinaryWord {
        match self {
            PairOp::SumMod1 => add_mod1(x, y),
            PairOp::Product => multiply(x, y),
        }
        .expect("scan lists share one length")
    }
}

/// Scans the pairs with linear indices in `range`, where pair `(xi, yi)` has
/// index `xi * ys.len() + yi`.
pub fn scan_pairs(xs: &[BinaryWord], ys: &[BinaryWord], range: Range<u64>, op: PairOp) -> PairStats {
    let mut stats = PairStats::default();
    if ys.is_empty() {
        return stats;
    }
    let width = ys.len() as u64;
    let end = range.end.min(xs.len() as u64 * width);
    for idx in range.start..end {
        let (xi, yi) = ((idx / width) as usize, (idx % width) as usize);
        let combined = op.apply(&xs[xi], &ys[yi]);
        stats.observe(xi, yi, longest_ap(&combined));
    }
    stats
}

/// The k-AP-free words of length `n`, truncated to a deterministic prefix of
/// the enumeration when the node budget runs out. The flag reports whether
/// the list is complete.
pub fn free_word_list(n: usize, k: usize, budget: u64) -> (Vec<BinaryWord>, bool) {
    let mut e = Enumerator::new(n, k).with_budget(budget);
    let words: Vec<_> = e.by_ref().collect();
    (words, !e.budget_exceeded())
}

/// Empirical witness for the sum bound: over pairs of i-AP-free and j-AP-free
/// words of length `depth`, `w_emp` is one more than the longest progression
/// seen in any sum mod 1.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WCertificate {
    pub i: usize,
    pub j: usize,
    pub depth: usize,
    pub w_emp: usize,
    pub witness_pair: Option<(BinaryWord, BinaryWord)>,
    pub witness_sum: Option<BinaryWord>,
    pub witness_ap: Option<Progression>,
    pub pairs_scanned: u64,
    pub exhaustive: bool,
}

/// Builds a certificate from the merged stats of a scan over `xs` x `ys`.
pub fn w_certificate(
    i: usize,
    j: usize,
    depth: usize,
    xs: &[BinaryWord],
    ys: &[BinaryWord],
    stats: &PairStats,
    lists_complete: bool,
) -> WCertificate {
    let total = xs.len() as u64 * ys.len() as u64;
    let (witness_pair, witness_sum, witness_ap) = match &stats.best {
        Some(b) => {
            let (x, y) = (xs[b.x_index].clone(), ys[b.y_index].clone());
            let sum = PairOp::SumMod1.apply(&x, &y);
            (Some((x, y)), Some(sum), b.ap.witness)
        }
        None => (None, None, None),
    };
    WCertificate {
        i,
        j,
        depth,
        w_emp: stats.max_len() + 1,
        witness_pair,
        witness_sum,
        witness_ap,
        pairs_scanned: stats.scanned,
        exhaustive: lists_complete && stats.scanned == total,
    }
}

/// Sequential empirical sum bound; `budget` caps both enumeration nodes and
/// scanned pairs.
pub fn empirical_w(i: usize, j: usize, depth: usize, budget: u64) -> WCertificate {
    let (xs, xs_ok) = free_word_list(depth, i, budget);
    let (ys, ys_ok) = free_word_list(depth, j, budget);
    let stats = scan_pairs(&xs, &ys, 0..budget, PairOp::SumMod1);
    w_certificate(i, j, depth, &xs, &ys, &stats, xs_ok && ys_ok)
}

/// Evidence gathered on whether products of AP-free words stay AP-free.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SearchReport {
    pub k: usize,
    pub depth: usize,
    pub pairs_scanned: u64,
    pub exhaustive: bool,
    pub max_ap_len: usize,
    pub witness_pair: Option<(BinaryWord, BinaryWord)>,
    pub witness_product: Option<BinaryWord>,
    pub ap_witness: Option<Progression>,
    pub histogram: Vec<u64>,
}

/// Builds a product search report from merged stats.
pub fn search_report(
    k: usize,
    depth: usize,
    words: &[BinaryWord],
    stats: &PairStats,
    list_complete: bool,
) -> SearchReport {
    let total = words.len() as u64 * words.len() as u64;
    let (witness_pair, witness_product, ap_witness) = match &stats.best {
        Some(b) => {
            let (x, y) = (words[b.x_index].clone(), words[b.y_index].clone());
            let product = PairOp::Product.apply(&x, &y);
            (Some((x, y)), Some(product), b.ap.witness)
        }
        None => (None, None, None),
    };
    SearchReport {
        k,
        depth,
        pairs_scanned: stats.scanned,
        exhaustive: list_complete && stats.scanned == total,
        max_ap_len: stats.max_len(),
        witness_pair,
        witness_product,
        ap_witness,
        histogram: stats.histogram.clone(),
    }
}

/// Sequential scan of products of k-AP-free words of length `depth`.
pub fn product_ap_search(k: usize, depth: usize, budget: u64) -> SearchReport {
    let (words, complete) = free_word_list(depth, k, budget);
    let stats = scan_pairs(&words, &words, 0..budget, PairOp::Product);
    search_report(k, depth, &words, &stats, complete)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::count_k_ap_free;
    use crate::word::{is_k_ap_free, parse_word};
    use crate::DEFAULT_NODE_BUDGET as B;
    use alloc::string::ToString;

    fn w(s: &str) -> BinaryWord {
        parse_word(s).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(add_mod1(&w("0111110"), &w("0001010")).unwrap(), w("1001000"));
        assert_eq!(add_mod1(&w("0110"), &w("0000")).unwrap(), w("0110"));
        assert_eq!(add_mod1(&w("1000"), &w("1000")).unwrap(), w("0000"));
        assert!(add_mod1(&w("1"), &w("10")).is_err());
    }

    #[test]
    fn add_carries_across_limbs() {
        let x = BinaryWord::ones(130);
        let mut one = BinaryWord::zeros(130);
        one.set_digit(130, true);
        assert!(add_mod1(&x, &one).unwrap().is_zero());
        // digit 67 is bit 63, so doubling it carries into the second limb
        let mut y = BinaryWord::zeros(130);
        y.set_digit(67, true);
        assert_eq!(add_mod1(&y, &y).unwrap().one_positions(), vec![66]);
        let mut quarter = BinaryWord::zeros(130);
        quarter.set_digit(2, true);
        let mut three_quarters = quarter.clone();
        three_quarters.set_digit(1, true);
        assert!(add_mod1(&three_quarters, &quarter).unwrap().is_zero());
    }

    #[test]
    fn decompose_examples() {
        let d = sr_decompose(&w("10"), &w("01")).unwrap();
        assert_eq!((d.s.to_string(), d.r.to_string(), d.sum.to_string()), ("11".into(), "00".into(), "11".into()));
        let d = sr_decompose(&w("1"), &w("1")).unwrap();
        assert_eq!((d.s.to_string(), d.r.to_string(), d.sum.to_string()), ("1".into(), "1".into(), "0".into()));
        let d = sr_decompose(&w("0110"), &w("0011")).unwrap();
        assert_eq!(
            (d.s.to_string(), d.r.to_string(), d.sum.to_string()),
            ("0111".into(), "0010".into(), "1001".into())
        );
        d.check().unwrap();
    }

    #[test]
    fn block_example_decomposes() {
        let d = sr_decompose(&w("0111110"), &w("0001010")).unwrap();
        d.check().unwrap();
        assert_eq!(d.sum, w("1001000"));
        assert_eq!(d.block_local_sum(), d.sum);
        let kinds: Vec<_> = d.classify_sum_ones();
        assert_eq!(kinds, vec![(1, Some(OneSource::CarryLeftOfBlock)), (4, Some(OneSource::FromR))]);
    }

    #[test]
    fn trichotomy_and_locality_exhaustive_small() {
        for n in 1..=6usize {
            for a in 0..1u64 << n {
                for b in 0..1u64 << n {
                    let d = sr_decompose(&BinaryWord::from_u64(a, n), &BinaryWord::from_u64(b, n)).unwrap();
                    d.check().unwrap();
                    assert!(d.classify_sum_ones().iter().all(|(_, k)| k.is_some()));
                    assert_eq!(d.block_local_sum(), d.sum);
                }
            }
        }
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(multiply(&w("10"), &w("10")).unwrap(), w("0100"));
        assert_eq!(multiply(&w("101"), &w("000")).unwrap(), w("000000"));
        assert_eq!(multiply(&w("11"), &w("11")).unwrap(), w("1001"));
    }

    #[test]
    fn multiply_wide_matches_bigint() {
        let mut x = BinaryWord::ones(100);
        x.set_digit(7, false);
        let y = BinaryWord::ones(100);
        let p = multiply(&x, &y).unwrap();
        assert_eq!(p.len(), 200);
        assert_eq!(p.numerator(), x.numerator() * y.numerator());
    }

    #[test]
    fn empirical_w_small() {
        let c = empirical_w(3, 3, 2, B);
        assert!(c.exhaustive);
        assert_eq!(c.pairs_scanned, 16);
        assert!(c.w_emp <= 3);
        let c4 = empirical_w(5, 6, 4, B);
        assert_eq!(c4.pairs_scanned, 256);
    }

    #[test]
    fn empirical_w_budget_cuts_prefix() {
        let full = empirical_w(3, 3, 6, B);
        let cut = empirical_w(3, 3, 6, 100);
        assert!(full.exhaustive);
        assert!(!cut.exhaustive);
        assert_eq!(cut.pairs_scanned, 100);
        assert!(cut.w_emp <= full.w_emp);
    }

    #[test]
    fn split_scans_merge_to_whole() {
        let (xs, _) = free_word_list(7, 3, B);
        let total = (xs.len() * xs.len()) as u64;
        let whole = scan_pairs(&xs, &xs, 0..total, PairOp::SumMod1);
        let mut merged = PairStats::default();
        let mut start = 0;
        for end in [17, 200, 1000, total] {
            merged = merged.merge(scan_pairs(&xs, &xs, start..end, PairOp::SumMod1));
            start = end;
        }
        assert_eq!(merged, whole);
    }

    #[test]
    fn product_search_small() {
        let r = product_ap_search(3, 1, B);
        assert!(r.max_ap_len <= 1);
        let r4 = product_ap_search(3, 4, B);
        assert!(r4.exhaustive);
        assert_eq!(r4.pairs_scanned, 169);
        let total: u64 = r4.histogram.iter().sum();
        let c = count_k_ap_free(4, 3, B).unwrap();
        assert_eq!(num_bigint::BigUint::from(total), &c * &c);
        let (x, y) = r4.witness_pair.clone().unwrap();
        assert!(is_k_ap_free(&x, 3) && is_k_ap_free(&y, 3));
        assert_eq!(longest_ap(&multiply(&x, &y).unwrap()).len, r4.max_ap_len);
    }
}
