//! Depth-n dyadic cell calculus.
//!
//! A [`DyadicGrid`] of depth `n` and extent `e` is a membership mask over the
//! `e * 2^n` half-open cells `[m 2^-n, (m+1) 2^-n)` covering `[0, e)`. Every
//! operation here is an outer approximation: the true set it stands for lies
//! inside the union of the marked cells.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::enumeration::{for_each_k_ap_free, BudgetExceeded};
use crate::word::BinaryWord;

/// Default maximum depth for single grids.
pub const DEFAULT_MAX_DEPTH: u32 = 24;
/// Default maximum operand depth for [`product_grid`] (the result has twice it).
pub const DEFAULT_MAX_PRODUCT_DEPTH: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    DepthMismatch {
        left: u32,
        right: u32,
    },
    DepthBudget {
        requested: u32,
        max: u32,
    },
    ZeroDepth,
    /// Operation only defined for grids over `[0, 1)`.
    ExtentNotUnit {
        extent: u32,
    },
    /// Scaling words longer than 64 digits are not supported.
    ScaleTooLong {
        len: usize,
    },
    InvalidK {
        k: usize,
    },
    EmptyMask,
    Budget(BudgetExceeded),
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::DepthMismatch { left, right } => write!(f, "grid depths differ: {left} vs {right}"),
            GridError::DepthBudget { requested, max } => {
                write!(f, "depth {requested} exceeds the depth budget {max}")
            }
            GridError::ZeroDepth => f.write_str("grid depth must be at least 1"),
            GridError::ExtentNotUnit { extent } => {
                write!(f, "operation needs a grid over [0,1), got extent {extent}")
            }
            GridError::ScaleTooLong { len } => write!(f, "scale word has {len} digits; at most 64 supported"),
            GridError::InvalidK { k } => write!(f, "progression length k={k} must be at least 3"),
            GridError::EmptyMask => f.write_str("mask pattern must be nonempty"),
            GridError::Budget(b) => write!(f, "{b}"),
        }
    }
}

impl core::error::Error for GridError {}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicGrid {
    depth: u32,
    extent: u32,
    bits: Vec<u64>,
}

impl fmt::Debug for DyadicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DyadicGrid")
            .field("depth", &self.depth)
            .field("extent", &self.extent)
            .field("count", &self.count())
            .finish()
    }
}

fn check_depth(depth: u32, max: u32) -> Result<(), GridError> {
    if depth == 0 {
        return Err(GridError::ZeroDepth);
    }
    if depth > max {
        return Err(GridError::DepthBudget { requested: depth, max });
    }
    Ok(())
}

impl DyadicGrid {
    /// Empty grid over `[0, extent)`.
    pub fn empty(depth: u32, extent: u32) -> Self {
        assert!((1..48).contains(&depth), "unsupported depth {depth}");
        assert!(extent >= 1, "extent must be positive");
        let cells = (extent as usize) << depth;
        DyadicGrid { depth, extent, bits: vec![0; cells.div_ceil(64)] }
    }

    pub fn full(depth: u32) -> Self {
        let mut g = Self::empty(depth, 1);
        g.insert_range(0..g.cell_count());
        g
    }

    pub fn from_cells(depth: u32, extent: u32, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut g = Self::empty(depth, extent);
        for m in cells {
            g.insert(m);
        }
        g
    }

    /// Rebuilds a grid from half-open member ranges; ranges are clipped to
    /// the cell count.
    pub fn from_runs(depth: u32, extent: u32, runs: impl IntoIterator<Item = Range<usize>>) -> Self {
        let mut g = Self::empty(depth, extent);
        let total = g.cell_count();
        for r in runs {
            g.insert_range(r.start.min(total)..r.end.min(total));
        }
        g
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn extent(&self) -> u32 {
        self.extent
    }

    pub fn cell_count(&self) -> usize {
        (self.extent as usize) << self.depth
    }

    #[inline]
    pub fn contains(&self, m: usize) -> bool {
        m < self.cell_count() && (self.bits[m / 64] >> (m % 64)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, m: usize) {
        assert!(m < self.cell_count(), "cell {m} out of range");
        self.bits[m / 64] |= 1 << (m % 64);
    }

    /// Marks every cell in `range`.
    pub fn insert_range(&mut self, range: Range<usize>) {
        let (mut lo, hi) = (range.start, range.end);
        assert!(hi <= self.cell_count(), "range end {hi} out of range");
        while lo < hi {
            let word = lo / 64;
            let off = lo % 64;
            let span = (64 - off).min(hi - lo);
            let mask = if span == 64 { u64::MAX } else { ((1u64 << span) - 1) << off };
            self.bits[word] |= mask;
            lo += span;
        }
    }

    /// Number of member cells.
    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Fraction of cells that are members.
    pub fn coverage(&self) -> f64 {
        self.count() as f64 / self.cell_count() as f64
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &word)| {
            let mut bits = word;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// Maximal runs of consecutive member cells, ascending, half-open.
    pub fn runs(&self) -> Vec<Range<usize>> {
        let mut out: Vec<Range<usize>> = Vec::new();
        for m in self.members() {
            match out.last_mut() {
                Some(r) if r.end == m => r.end += 1,
                _ => out.push(m..m + 1),
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.depth == other.depth
            && self.extent == other.extent
            && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// The same set seen at a coarser depth: a parent cell is a member when
    /// any descendant is.
    pub fn coarsen(&self, depth: u32) -> Self {
        assert!(depth >= 1 && depth <= self.depth, "coarsen to depth {depth} from {}", self.depth);
        let shift = self.depth - depth;
        let mut g = Self::empty(depth, self.extent);
        for m in self.members() {
            g.insert(m >> shift);
        }
        g
    }

    fn same_shape(&self, other: &Self) -> Result<(), GridError> {
        if self.depth != other.depth {
            return Err(GridError::DepthMismatch { left: self.depth, right: other.depth });
        }
        Ok(())
    }

    fn unit(&self) -> Result<(), GridError> {
        if self.extent != 1 {
            return Err(GridError::ExtentNotUnit { extent: self.extent });
        }
        Ok(())
    }

    fn mask_tail(&mut self) {
        let cells = self.cell_count();
        if !cells.is_multiple_of(64) {
            let last = self.bits.len() - 1;
            self.bits[last] &= (1u64 << (cells % 64)) - 1;
        }
    }

    // self |= src << shift, dropping bits past the end; src may be shorter
    fn or_shifted_up(&mut self, src: &[u64], shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for (i, &w) in src.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let lo = i + ws;
            if lo < self.bits.len() {
                self.bits[lo] |= w << bs;
            }
            if bs != 0 && lo + 1 < self.bits.len() {
                self.bits[lo + 1] |= w >> (64 - bs);
            }
        }
        self.mask_tail();
    }

    // self |= src >> shift (towards cell 0)
    fn or_shifted_down(&mut self, src: &[u64], shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for i in ws..src.len() {
            let mut v = src[i] >> bs;
            if bs != 0 && i + 1 < src.len() {
                v |= src[i + 1] << (64 - bs);
            }
            self.bits[i - ws] |= v;
        }
        self.mask_tail();
    }

    // self |= src rotated up by `shift` cells modulo the cell count
    fn or_rotated(&mut self, src: &[u64], shift: usize) {
        let cells = self.cell_count();
        let shift = shift % cells;
        self.or_shifted_up(src, shift);
        if shift != 0 {
            self.or_shifted_down(src, cells - shift);
        }
    }
}

/// Cells of depth `n` meeting the closed set of k-AP-free expansions: cell
/// `m` is a member iff the n-digit rendering of `m` is k-AP-free.
pub fn grid_of_f(k: usize, n: u32, max_depth: u32, node_budget: u64) -> Result<DyadicGrid, GridError> {
    if k < 3 {
        return Err(GridError::InvalidK { k });
    }
    check_depth(n, max_depth)?;
    let mut g = DyadicGrid::empty(n, 1);
    for_each_k_ap_free(n as usize, k, node_budget, |w| {
        g.insert(w.to_u64().expect("depth below 64") as usize);
    })
    .map_err(GridError::Budget)?;
    Ok(g)
}

/// Digit-freedom mask: position `i` may be 1 only where the pattern has a 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSpec {
    pub pattern: BinaryWord,
}

impl MaskSpec {
    /// `unit` repeated `times` times.
    pub fn periodic(unit: &BinaryWord, times: usize) -> Self {
        assert!(times >= 1);
        let mut w = unit.clone();
        for _ in 1..times {
            w = w.concat(unit);
        }
        MaskSpec { pattern: w }
    }
}

/// Depth-`len(pattern)` cells of the digit-restricted set: cell `m` is a
/// member iff `m` has zeros wherever the pattern does.
pub fn grid_of_mask(mask: &MaskSpec, max_depth: u32) -> Result<DyadicGrid, GridError> {
    let n = u32::try_from(mask.pattern.len()).unwrap_or(u32::MAX);
    check_depth(n, max_depth)?;
    let free = mask.pattern.to_u64().expect("depth below 64") as usize;
    let mut g = DyadicGrid::empty(n, 1);
    // enumerate submasks of `free`
    let mut sub = free;
    loop {
        g.insert(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    Ok(g)
}

/// Outer approximation of `A + B mod 1`: each member pair `(a, b)` marks
/// cells `a + b` and `a + b + 1` modulo `2^n`.
pub fn sumset_mod1(a: &DyadicGrid, b: &DyadicGrid) -> Result<DyadicGrid, GridError> {
    a.same_shape(b)?;
    a.unit()?;
    b.unit()?;
    let (small, large) = if a.count() <= b.count() { (a, b) } else { (b, a) };
    let mut partial = DyadicGrid::empty(a.depth, 1);
    for m in small.members() {
        partial.or_rotated(&large.bits, m);
    }
    let mut out = partial.clone();
    out.or_rotated(&partial.bits, 1);
    Ok(out)
}

/// Outer approximation of `A + B` in the reals, over `[0, 2)`.
pub fn sumset_real(a: &DyadicGrid, b: &DyadicGrid) -> Result<DyadicGrid, GridError> {
    a.same_shape(b)?;
    a.unit()?;
    b.unit()?;
    let (small, large) = if a.count() <= b.count() { (a, b) } else { (b, a) };
    let mut partial = DyadicGrid::empty(a.depth, 2);
    for m in small.members() {
        partial.or_shifted_up(&large.bits, m);
    }
    let mut out = partial.clone();
    out.or_shifted_up(&partial.bits, 1);
    Ok(out)
}

/// Coverage after each number of summands `1..=terms` of `A + A + ... mod 1`.
pub fn iterate_sum(a: &DyadicGrid, terms: usize) -> Result<Vec<(usize, DyadicGrid)>, GridError> {
    a.unit()?;
    let mut out = Vec::with_capacity(terms);
    let mut current = a.clone();
    for t in 1..=terms {
        if t > 1 {
            current = sumset_mod1(&current, a)?;
        }
        out.push((t, current.clone()));
    }
    Ok(out)
}

/// Outer approximation of `A + x B` in the reals, over `[0, 2)`.
///
/// A member pair `(a, b)` marks every cell meeting
/// `[a 2^-n + x b 2^-n, (a+1) 2^-n + x (b+1) 2^-n)`.
pub fn scaled_sum(a: &DyadicGrid, x: &BinaryWord, b: &DyadicGrid) -> Result<DyadicGrid, GridError> {
    a.same_shape(b)?;
    a.unit()?;
    b.unit()?;
    if x.len() > 64 {
        return Err(GridError::ScaleTooLong { len: x.len() });
    }
    let num = u128::from(x.to_u64().expect("at most 64 digits"));
    let len = x.len() as u32;
    let mut out = DyadicGrid::empty(a.depth, 2);
    let runs = a.runs();
    // A dilated by [lo, hi] for each b, with lo = floor(x b), hi = ceil(x (b+1))
    for bm in b.members() {
        let lo = ((num * bm as u128) >> len) as usize;
        let hi_num = num * (bm as u128 + 1);
        let mut hi = (hi_num >> len) as usize;
        if hi_num & ((1u128 << len) - 1) != 0 {
            hi += 1;
        }
        for r in &runs {
            out.insert_range(r.start + lo..r.end + hi);
        }
    }
    Ok(out)
}

/// Outer approximation of `{ab}` at depth `2n`: each member pair marks the
/// cells meeting `[a b 2^-2n, (a+1)(b+1) 2^-2n)`.
pub fn product_grid(a: &DyadicGrid, b: &DyadicGrid, max_depth: u32) -> Result<DyadicGrid, GridError> {
    a.same_shape(b)?;
    a.unit()?;
    b.unit()?;
    check_depth(a.depth, max_depth)?;
    let mut out = DyadicGrid::empty(2 * a.depth, 1);
    let bs: Vec<usize> = b.members().collect();
    for am in a.members() {
        for &bm in &bs {
            out.insert_range(am * bm..(am + 1) * (bm + 1));
        }
    }
    Ok(out)
}

/// Longest run of consecutive member cells, without wrap-around, as
/// `(length, start)`; the earliest run wins ties. `(0, 0)` when empty.
pub fn longest_full_run(a: &DyadicGrid) -> (usize, usize) {
    a.runs().into_iter().fold((0, 0), |best, r| if r.len() > best.0 { (r.len(), r.start) } else { best })
}

/// Number of member cells.
pub fn box_count(a: &DyadicGrid) -> usize {
    a.count()
}

/// Finite-depth view of `E + EE` for the k-AP-free set: products at depth
/// `2n` coarsened to depth `n`, then summed with the depth-`n` grid in the
/// reals (over `[0, 2)`).
pub fn e_plus_ee(k: usize, n: u32, max_product_depth: u32, node_budget: u64) -> Result<DyadicGrid, GridError> {
    check_depth(n, max_product_depth)?;
    let f = grid_of_f(k, n, max_product_depth, node_budget)?;
    let products = product_grid(&f, &f, max_product_depth)?.coarsen(n);
    sumset_real(&f, &products)
}
