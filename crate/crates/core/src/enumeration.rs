//! Counting and streaming of k-AP-free words.
//!
//! The k-AP-free predicate is not recognisable by a finite automaton for
//! k >= 3, so all counting is a depth-first digit placement that tries digit 1
//! before digit 0 and rejects a 1 exactly when it would close a k-term
//! progression ending at the current position. Digit 0 never closes one, so
//! every node of the search tree reaches at least one leaf.
//!
//! The "enumeration order" used across the crate is the order of that search:
//! lexicographic with 1 before 0, i.e. decreasing numerators.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::word::BinaryWord;

/// Raised when a search visits more nodes than its budget allows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub budget: u64,
    /// Nodes visited before aborting.
    pub nodes: u64,
    /// Leaves (complete words) found before aborting.
    pub partial_count: u64,
}

impl fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node budget {} exceeded after {} nodes ({} complete words found)",
            self.budget, self.nodes, self.partial_count
        )
    }
}

impl core::error::Error for BudgetExceeded {}

/// Would a 1 at position `p` close a `k`-term progression of ones ending at
/// `p`? Only positions below `p` are read.
#[inline]
pub(crate) fn closes_progression(w: &BinaryWord, p: usize, k: usize) -> bool {
    if k <= 1 {
        return true;
    }
    let max_gap = (p - 1) / (k - 1);
    (1..=max_gap).any(|gap| (1..k).all(|j| w.digit(p - j * gap)))
}

struct Search<F> {
    n: usize,
    k: usize,
    word: BinaryWord,
    nodes: u64,
    leaves: u64,
    budget: u64,
    visit: F,
}

impl<F: FnMut(&BinaryWord)> Search<F> {
    // places digits at positions p..=n
    fn descend(&mut self, p: usize) -> Result<(), ()> {
        if p > self.n {
            self.leaves += 1;
            (self.visit)(&self.word);
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(());
        }
        if !closes_progression(&self.word, p, self.k) {
            self.word.set_digit(p, true);
            self.descend(p + 1)?;
            self.word.set_digit(p, false);
        }
        self.descend(p + 1)
    }
}

fn run_search(
    n: usize,
    k: usize,
    prefix: Option<&BinaryWord>,
    budget: u64,
    visit: impl FnMut(&BinaryWord),
) -> Result<(u64, u64), BudgetExceeded> {
    let mut word = BinaryWord::zeros(n);
    let start = match prefix {
        Some(pre) => {
            assert!(pre.len() <= n, "prefix longer than the word");
            for p in pre.one_positions() {
                if closes_progression(&word, p, k) {
                    return Ok((0, 0));
                }
                word.set_digit(p, true);
            }
            pre.len() + 1
        }
        None => 1,
    };
    let mut search = Search { n, k, word, nodes: 0, leaves: 0, budget, visit };
    match search.descend(start) {
        Ok(()) => Ok((search.leaves, search.nodes)),
        Err(()) => Err(BudgetExceeded { budget, nodes: search.nodes, partial_count: search.leaves }),
    }
}

/// Number of length-`n` words with no `k`-term progression of ones.
pub fn count_k_ap_free(n: usize, k: usize, budget: u64) -> Result<BigUint, BudgetExceeded> {
    count_with_prefix(n, k, None, budget).map(|(count, _)| BigUint::from(count))
}

/// Counts the k-AP-free words of length `n` extending `prefix`, returning
/// `(count, nodes)`. A prefix that already holds a k-term progression counts 0.
pub fn count_with_prefix(
    n: usize,
    k: usize,
    prefix: Option<&BinaryWord>,
    budget: u64,
) -> Result<(u64, u64), BudgetExceeded> {
    run_search(n, k, prefix, budget, |_| {})
}

/// Visits every k-AP-free word of length `n` in enumeration order.
pub fn for_each_k_ap_free(
    n: usize,
    k: usize,
    budget: u64,
    visit: impl FnMut(&BinaryWord),
) -> Result<u64, BudgetExceeded> {
    run_search(n, k, None, budget, visit).map(|(leaves, _)| leaves)
}

/// All k-AP-free words of length `n`, in enumeration order.
pub fn collect_k_ap_free(n: usize, k: usize, budget: u64) -> Result<Vec<BinaryWord>, BudgetExceeded> {
    let mut out = Vec::new();
    for_each_k_ap_free(n, k, budget, |w| out.push(w.clone()))?;
    Ok(out)
}

/// Restartable stream of k-AP-free words extending a prefix.
///
/// Concatenating the streams of [`shard_prefixes`] in order reproduces the
/// unsharded stream.
#[derive(Debug, Clone)]
pub struct Enumerator {
    n: usize,
    k: usize,
    prefix_len: usize,
    word: BinaryWord,
    placed: usize,
    started: bool,
    done: bool,
    nodes: u64,
    budget: u64,
    exceeded: bool,
}

impl Enumerator {
    pub fn new(n: usize, k: usize) -> Self {
        Enumerator {
            n,
            k,
            prefix_len: 0,
            word: BinaryWord::zeros(n),
            placed: 0,
            started: false,
            done: false,
            nodes: 0,
            budget: u64::MAX,
            exceeded: false,
        }
    }

    /// Stream restricted to words starting with `prefix` (`len(prefix) <= n`).
    /// Empty when the prefix itself is not k-AP-free.
    pub fn from_prefix(n: usize, k: usize, prefix: &BinaryWord) -> Self {
        assert!(prefix.len() <= n, "prefix longer than the word");
        let mut e = Self::new(n, k);
        for p in prefix.one_positions() {
            if closes_progression(&e.word, p, k) {
                e.done = true;
            }
            e.word.set_digit(p, true);
        }
        e.prefix_len = prefix.len();
        e.placed = prefix.len();
        e
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// True when the stream ended because the node budget ran out.
    pub fn budget_exceeded(&self) -> bool {
        self.exceeded
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    // fills positions placed+1..=n greedily, 1 first
    fn fill(&mut self) -> Option<BinaryWord> {
        while self.placed < self.n {
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exceeded = true;
                self.done = true;
                return None;
            }
            let p = self.placed + 1;
            let one = !closes_progression(&self.word, p, self.k);
            self.word.set_digit(p, one);
            self.placed = p;
        }
        Some(self.word.clone())
    }
}

impl Iterator for Enumerator {
    type Item = BinaryWord;

    fn next(&mut self) -> Option<BinaryWord> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return self.fill();
        }
        loop {
            if self.placed == self.prefix_len {
                self.done = true;
                return None;
            }
            let p = self.placed;
            if self.word.digit(p) {
                self.word.set_digit(p, false);
                return self.fill();
            }
            self.placed -= 1;
        }
    }
}

/// Stream of every k-AP-free word of length `n`.
pub fn enumerate_k_ap_free(n: usize, k: usize) -> Enumerator {
    Enumerator::new(n, k)
}

/// The k-AP-free prefixes of length `min(depth, n)`, in enumeration order;
/// each one seeds an independent shard.
pub fn shard_prefixes(n: usize, k: usize, depth: usize) -> Vec<BinaryWord> {
    Enumerator::new(n.min(depth).max(1), k).collect()
}

/// Maximum number of ones over k-AP-free words of length `n`, with the first
/// maximiser in enumeration order.
pub fn max_ones_k_ap_free(n: usize, k: usize, budget: u64) -> Result<(usize, BinaryWord), BudgetExceeded> {
    struct Bnb {
        n: usize,
        k: usize,
        word: BinaryWord,
        ones: usize,
        best: Option<(usize, BinaryWord)>,
        nodes: u64,
        budget: u64,
    }
    impl Bnb {
        fn go(&mut self, p: usize) -> Result<(), ()> {
            let best = self.best.as_ref().map(|b| b.0);
            if let Some(b) = best {
                if self.ones + (self.n + 1 - p) <= b {
                    return Ok(());
                }
            }
            if p > self.n {
                self.best = Some((self.ones, self.word.clone()));
                return Ok(());
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(());
            }
            if !closes_progression(&self.word, p, self.k) {
                self.word.set_digit(p, true);
                self.ones += 1;
                self.go(p + 1)?;
                self.ones -= 1;
                self.word.set_digit(p, false);
            }
            self.go(p + 1)
        }
    }
    let mut s = Bnb { n, k, word: BinaryWord::zeros(n), ones: 0, best: None, nodes: 0, budget };
    match s.go(1) {
        Ok(()) => Ok(s.best.expect("the zero word is always a leaf")),
        Err(()) => Err(BudgetExceeded { budget, nodes: s.nodes, partial_count: 0 }),
    }
}

/// `sum_{j=0}^{m} C(n, j)`: the number of length-`n` words with at most `m` ones.
pub fn count_low_weight(n: usize, m: usize) -> BigUint {
    let m = m.min(n);
    let mut term = BigUint::one();
    let mut total = BigUint::one();
    for j in 0..m {
        term = term * BigUint::from(n - j) / BigUint::from(j + 1);
        total += &term;
    }
    total
}

/// Out-of-range parameter for [`entropy_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpsOutOfRange;

impl fmt::Display for EpsOutOfRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("eps must lie in (0, 1/2]")
    }
}

impl core::error::Error for EpsOutOfRange {}

/// Binary entropy `H(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * libm::log2(q) };
    term(p) + term(1.0 - p)
}

/// `n * H(eps)`, the base-2 logarithm of [`entropy_bound`].
///
/// Equal to `n (1 - D(eps)/ln 2)` for the divergence
/// `D(eps) = eps ln 2eps + (1-eps) ln 2(1-eps)`, so `2^(n H(eps))` is the same
/// quantity as `exp(-D(eps) n) 2^n`.
pub fn entropy_log2_bound(n: usize, eps: Ratio<u64>) -> Result<f64, EpsOutOfRange> {
    if eps.is_zero() || eps > Ratio::new(1, 2) {
        return Err(EpsOutOfRange);
    }
    let p = eps.to_f64().ok_or(EpsOutOfRange)?;
    Ok(n as f64 * binary_entropy(p))
}

/// `2^(n H(eps))`, which dominates the number of length-`n` words with at most
/// `floor(eps n)` ones.
pub fn entropy_bound(n: usize, eps: Ratio<u64>) -> Result<f64, EpsOutOfRange> {
    entropy_log2_bound(n, eps).map(libm::exp2)
}

/// `floor(eps * n)` computed exactly.
pub fn floor_eps_n(n: usize, eps: Ratio<u64>) -> usize {
    ((*eps.numer() as u128 * n as u128) / *eps.denom() as u128) as usize
}

/// `log2(x)` of a big integer, exact enough for table output.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        libm::log2(x.to_f64().unwrap_or(f64::INFINITY))
    } else {
        let shift = bits - 64;
        let top: BigUint = x >> shift;
        libm::log2(top.to_f64().unwrap_or(f64::INFINITY)) + shift as f64
    }
}

/// One depth of a box-count table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CountRow {
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub n: usize,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::big_decimal"))]
    pub count: BigUint,
    #[cfg_attr(feature = "serde", serde(rename = "log2_count_over_N"))]
    pub log2_count_over_n: f64,
}

impl CountRow {
    pub fn new(n: usize, count: BigUint) -> Self {
        let log2_count_over_n = log2_big(&count) / n as f64;
        CountRow { n, count, log2_count_over_n }
    }
}

/// Exact counts of k-AP-free words per depth, i.e. the number of depth-N
/// dyadic cells meeting the closed set of k-AP-free expansions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CountTable {
    pub k: usize,
    pub rows: Vec<CountRow>,
}

/// Budget failure while building a [`CountTable`]; `partial` holds the rows
/// completed before the failing depth.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialTable {
    pub partial: CountTable,
    pub failed_at: usize,
    pub cause: BudgetExceeded,
}

impl fmt::Display for PartialTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "count table aborted at N={}: {}", self.failed_at, self.cause)
    }
}

impl core::error::Error for PartialTable {}

/// Box-count exponents `log2(count)/N` for each depth in `ns`.
///
/// `ns` is sorted and deduplicated so rows are strictly increasing in `N`.
pub fn box_dim_estimate(k: usize, ns: &[usize], budget: u64) -> Result<CountTable, PartialTable> {
    let mut depths: Vec<usize> = ns.to_vec();
    depths.sort_unstable();
    depths.dedup();
    let mut table = CountTable { k, rows: Vec::with_capacity(depths.len()) };
    for n in depths {
        match count_k_ap_free(n, k, budget) {
            Ok(count) => table.rows.push(CountRow::new(n, count)),
            Err(cause) => return Err(PartialTable { partial: table, failed_at: n, cause }),
        }
    }
    Ok(table)
}
