//! Mixed van der Waerden numbers by exhaustive coloring search.
//!
//! For lengths `(k_1, ..., k_r)` the number `W` is the smallest `n` such that
//! every coloring of `[1, n]` with colors `1..=r` has a color `c` whose class
//! holds a `k_c`-term progression. The search colors positions left to right,
//! tries colors in ascending order, and only lets position 1 take a color that
//! is the first among colors with the same length. Permuting equal-length
//! colors maps valid colorings to valid colorings, so the cut keeps the
//! lexicographically least coloring.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::word::{longest_ap_in, Progression};

/// Colorings are rendered with `1-9` then `a-z`, so at most 35 colors.
pub const MAX_COLORS: usize = 35;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VdwError {
    NoColors,
    TooManyColors {
        colors: usize,
    },
    /// Every progression length must be at least 2.
    LengthTooShort {
        color: usize,
        length: usize,
    },
    /// Requested progression length below 1.
    ZeroTerms,
    /// A set given to [`union_ap_bound_check`] already holds a forbidden progression.
    PreconditionViolated {
        set_index: usize,
        progression: Progression,
    },
    SetCountMismatch {
        sets: usize,
        lengths: usize,
    },
    ZeroPosition {
        set_index: usize,
    },
}

impl fmt::Display for VdwError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VdwError::NoColors => f.write_str("at least one progression length is required"),
            VdwError::TooManyColors { colors } => {
                write!(f, "{colors} colors requested; at most {MAX_COLORS} supported")
            }
            VdwError::LengthTooShort { color, length } => {
                write!(f, "color {color} has length {length}; lengths must be at least 2")
            }
            VdwError::ZeroTerms => f.write_str("progression length must be at least 1"),
            VdwError::PreconditionViolated { set_index, progression } => write!(
                f,
                "set {} contains the {}-term progression start {} gap {}",
                set_index + 1,
                progression.terms,
                progression.start,
                progression.gap
            ),
            VdwError::SetCountMismatch { sets, lengths } => {
                write!(f, "{sets} sets given for {lengths} lengths")
            }
            VdwError::ZeroPosition { set_index } => {
                write!(f, "set {} contains position 0; positions start at 1", set_index + 1)
            }
        }
    }
}

impl core::error::Error for VdwError {}

fn validate(lengths: &[usize]) -> Result<(), VdwError> {
    if lengths.is_empty() {
        return Err(VdwError::NoColors);
    }
    if lengths.len() > MAX_COLORS {
        return Err(VdwError::TooManyColors { colors: lengths.len() });
    }
    if let Some((c, &k)) = lengths.iter().enumerate().find(|(_, &k)| k < 2) {
        return Err(VdwError::LengthTooShort { color: c + 1, length: k });
    }
    Ok(())
}

/// A coloring of `[1, n]` with colors `1..=r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    colors: Vec<u8>,
}

impl Coloring {
    pub fn new(colors: Vec<u8>) -> Self {
        assert!(colors.iter().all(|&c| c >= 1 && c as usize <= MAX_COLORS));
        Coloring { colors }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Color of 1-based position `p`.
    pub fn color(&self, p: usize) -> u8 {
        self.colors[p - 1]
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.colors {
            let ch = char::from_digit(u32::from(c), 36).expect("color below 36");
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// Parses the digit-string format (`1-9`, then `a-z`).
pub fn parse_coloring(text: &str) -> Option<Coloring> {
    let colors =
        text.chars().map(|ch| ch.to_digit(36).filter(|&d| d >= 1).map(|d| d as u8)).collect::<Option<Vec<u8>>>()?;
    Some(Coloring { colors })
}

/// A monochromatic progression that makes a coloring invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonochromaticAp {
    pub color: u8,
    pub progression: Progression,
}

/// From-scratch validity check: scans every `(start, gap)` and walks the run
/// of equal colors. Shares nothing with the incremental search.
pub fn verify_coloring(coloring: &Coloring, lengths: &[usize]) -> Result<(), MonochromaticAp> {
    let n = coloring.len();
    for start in 1..=n {
        let c = coloring.color(start);
        let k = lengths[c as usize - 1];
        if k <= 1 {
            return Err(MonochromaticAp { color: c, progression: Progression { start, gap: 1, terms: 1 } });
        }
        let mut gap = 1;
        while start + (k - 1) * gap <= n {
            let mut terms = 1;
            while terms < k && coloring.color(start + terms * gap) == c {
                terms += 1;
            }
            if terms == k {
                return Err(MonochromaticAp { color: c, progression: Progression { start, gap, terms } });
            }
            gap += 1;
        }
    }
    Ok(())
}

struct Search<'a> {
    lengths: &'a [usize],
    // 1-based; colors[0] unused
    colors: Vec<u8>,
    first_allowed: Vec<bool>,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn new(lengths: &'a [usize], cap: usize) -> Self {
        let first_allowed = (0..lengths.len()).map(|c| !lengths[..c].contains(&lengths[c])).collect();
        Search { lengths, colors: vec![0; cap + 1], first_allowed, nodes: 0 }
    }

    #[inline]
    fn closes(&self, p: usize, c: u8) -> bool {
        let k = self.lengths[c as usize - 1];
        let max_gap = (p - 1) / (k - 1);
        (1..=max_gap).any(|gap| (1..k).all(|j| self.colors[p - j * gap] == c))
    }

    fn allowed(&self, p: usize, c: u8) -> bool {
        (p > 1 || self.first_allowed[c as usize - 1]) && !self.closes(p, c)
    }

    fn load_prefix(&mut self, prefix: &[u8]) -> bool {
        for (i, &c) in prefix.iter().enumerate() {
            if c == 0 || c as usize > self.lengths.len() || !self.allowed(i + 1, c) {
                return false;
            }
            self.colors[i + 1] = c;
        }
        true
    }

    // deepest valid coloring reachable, stopping once `cap` is reached
    fn deepest(&mut self, placed: usize, cap: usize) -> usize {
        if placed == cap {
            return cap;
        }
        let p = placed + 1;
        let mut best = placed;
        for c in 1..=self.lengths.len() as u8 {
            self.nodes += 1;
            if self.allowed(p, c) {
                self.colors[p] = c;
                best = best.max(self.deepest(p, cap));
                self.colors[p] = 0;
                if best == cap {
                    break;
                }
            }
        }
        best
    }

    fn first(&mut self, placed: usize, n: usize) -> bool {
        if placed == n {
            return true;
        }
        let p = placed + 1;
        for c in 1..=self.lengths.len() as u8 {
            self.nodes += 1;
            if self.allowed(p, c) {
                self.colors[p] = c;
                if self.first(p, n) {
                    return true;
                }
                self.colors[p] = 0;
            }
        }
        false
    }
}

/// Result of [`vdw_number`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VdwOutcome {
    Exact {
        n: usize,
    },
    /// A valid coloring of `[1, cap]` exists.
    ExceedsCap {
        cap: usize,
    },
}

/// Length of the longest valid coloring extending `prefix` (capped at
/// `cap`), with the number of search nodes. Returns `None` when the prefix is
/// itself invalid or violates the first-position cut.
pub fn deepest_valid_from(lengths: &[usize], cap: usize, prefix: &[u8]) -> Result<Option<(usize, u64)>, VdwError> {
    validate(lengths)?;
    let cap = cap.max(prefix.len());
    let mut s = Search::new(lengths, cap);
    if !s.load_prefix(prefix) {
        return Ok(None);
    }
    let d = s.deepest(prefix.len(), cap);
    Ok(Some((d, s.nodes)))
}

/// Smallest `n <= cap` with no valid coloring of `[1, n]`.
pub fn vdw_number(lengths: &[usize], cap: usize) -> Result<VdwOutcome, VdwError> {
    let (deepest, _) = deepest_valid_from(lengths, cap, &[])?.expect("empty prefix is valid");
    Ok(outcome_from_depth(deepest, cap))
}

/// Turns the deepest valid coloring length into an outcome.
pub fn outcome_from_depth(deepest: usize, cap: usize) -> VdwOutcome {
    if deepest >= cap {
        VdwOutcome::ExceedsCap { cap }
    } else {
        VdwOutcome::Exact { n: deepest + 1 }
    }
}

/// Lexicographically least valid coloring of `[1, n]` extending `prefix`.
pub fn find_valid_coloring_from(lengths: &[usize], n: usize, prefix: &[u8]) -> Result<Option<Coloring>, VdwError> {
    validate(lengths)?;
    if prefix.len() > n {
        return Ok(None);
    }
    let mut s = Search::new(lengths, n);
    if !s.load_prefix(prefix) || !s.first(prefix.len(), n) {
        return Ok(None);
    }
    let coloring = Coloring { colors: s.colors[1..].to_vec() };
    debug_assert!(verify_coloring(&coloring, lengths).is_ok());
    Ok(Some(coloring))
}

/// Lexicographically least valid coloring of `[1, n]`, re-verified by
/// [`verify_coloring`].
pub fn find_valid_coloring(lengths: &[usize], n: usize) -> Result<Option<Coloring>, VdwError> {
    let found = find_valid_coloring_from(lengths, n, &[])?;
    if let Some(c) = &found {
        assert!(verify_coloring(c, lengths).is_ok(), "search produced an invalid coloring");
    }
    Ok(found)
}

/// Valid prefixes of length `depth` in search order; each seeds a shard.
pub fn shard_prefixes(lengths: &[usize], depth: usize) -> Result<Vec<Vec<u8>>, VdwError> {
    validate(lengths)?;
    let mut s = Search::new(lengths, depth);
    let mut out = Vec::new();
    fn walk(s: &mut Search<'_>, placed: usize, depth: usize, out: &mut Vec<Vec<u8>>) {
        if placed == depth {
            out.push(s.colors[1..=depth].to_vec());
            return;
        }
        let p = placed + 1;
        for c in 1..=s.lengths.len() as u8 {
            if s.allowed(p, c) {
                s.colors[p] = c;
                walk(s, p, depth, out);
                s.colors[p] = 0;
            }
        }
    }
    walk(&mut s, 0, depth, &mut out);
    Ok(out)
}

/// Outcome of scanning a union of sets for a long progression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionCheck {
    /// True when the union has no `terms`-term progression.
    pub holds: bool,
    /// First progression found (smallest start, then smallest gap).
    pub witness: Option<Progression>,
}

/// Checks each set `A_c` against its length `k_c`, then scans their union for
/// an `terms`-term progression. When `terms >= W(k_1, ..., k_r)` none can exist:
/// re-indexing such a progression to `[1, terms]` would give a valid coloring.
pub fn union_ap_bound_check(sets: &[Vec<usize>], lengths: &[usize], terms: usize) -> Result<UnionCheck, VdwError> {
    validate(lengths)?;
    if sets.len() != lengths.len() {
        return Err(VdwError::SetCountMismatch { sets: sets.len(), lengths: lengths.len() });
    }
    if terms == 0 {
        return Err(VdwError::ZeroTerms);
    }
    let mut union: Vec<usize> = Vec::new();
    for (idx, (set, &k)) in sets.iter().zip(lengths).enumerate() {
        let mut sorted = set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.first() == Some(&0) {
            return Err(VdwError::ZeroPosition { set_index: idx });
        }
        let ap = longest_ap_in(&sorted, |q| sorted.binary_search(&q).is_ok());
        if ap.len >= k {
            let w = ap.witness.expect("nonempty");
            return Err(VdwError::PreconditionViolated { set_index: idx, progression: Progression { terms: k, ..w } });
        }
        union.extend(sorted);
    }
    union.sort_unstable();
    union.dedup();
    let has = |q: usize| union.binary_search(&q).is_ok();
    let max = union.last().copied().unwrap_or(0);
    for &a in &union {
        if terms == 1 {
            return Ok(UnionCheck { holds: false, witness: Some(Progression { start: a, gap: 1, terms }) });
        }
        let max_gap = (max - a) / (terms - 1);
        for gap in 1..=max_gap {
            if (1..terms).all(|j| has(a + j * gap)) {
                return Ok(UnionCheck { holds: false, witness: Some(Progression { start: a, gap, terms }) });
            }
        }
    }
    Ok(UnionCheck { holds: true, witness: None })
}
