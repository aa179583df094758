//! Density estimators on finite integer sequences and the two reductions
//! that turn a sequence with large upper Banach density into one with large
//! upper, then lower, natural density.
//!
//! Every limit is replaced by a max or min over `n` in `[tail_start, H]`; no
//! estimate claims to be a limit. All arithmetic is exact.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;

use crate::word::{longest_ap_in, LongestAp};

/// Upper bound on a horizon; every estimator allocates `O(H)` words.
pub const MAX_HORIZON: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DensityError {
    ZeroElement,
    NotIncreasing {
        index: usize,
    },
    BeyondHorizon {
        element: u64,
        horizon: u64,
    },
    HorizonTooLarge {
        horizon: u64,
    },
    /// `n` must lie in `[1, H]`.
    CountOutOfRange {
        n: u64,
        horizon: u64,
    },
    TailStartOutOfRange {
        tail_start: u64,
        horizon: u64,
    },
    EmptySequence,
    RhoOutOfRange,
    GrowthNotAboveOne,
    /// Nothing in the horizon reaches the density target.
    NoQualifyingWindow {
        target: Ratio<u64>,
        min_length: u64,
    },
    ZeroDensity,
    Overflow,
}

impl fmt::Display for DensityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityError::ZeroElement => f.write_str("sequence elements must be positive"),
            DensityError::NotIncreasing { index } => {
                write!(f, "sequence is not strictly increasing at index {index}")
            }
            DensityError::BeyondHorizon { element, horizon } => {
                write!(f, "element {element} exceeds horizon {horizon}")
            }
            DensityError::HorizonTooLarge { horizon } => {
                write!(f, "horizon {horizon} exceeds the supported maximum {MAX_HORIZON}")
            }
            DensityError::CountOutOfRange { n, horizon } => {
                write!(f, "n = {n} outside the observation window [1, {horizon}]")
            }
            DensityError::TailStartOutOfRange { tail_start, horizon } => {
                write!(f, "tail start {tail_start} outside [1, {horizon}]")
            }
            DensityError::EmptySequence => f.write_str("sequence is empty"),
            DensityError::RhoOutOfRange => f.write_str("rho must lie strictly between 0 and 1"),
            DensityError::GrowthNotAboveOne => f.write_str("growth factor M must exceed 1"),
            DensityError::NoQualifyingWindow { target, min_length } => write!(
                f,
                "no window of length at least {min_length} reaches density {}/{}; lower rho",
                target.numer(),
                target.denom()
            ),
            DensityError::ZeroDensity => f.write_str("density estimate is zero"),
            DensityError::Overflow => f.write_str("rational arithmetic overflowed 64 bits"),
        }
    }
}

impl core::error::Error for DensityError {}

/// Strictly increasing positive integers observed on `[1, horizon]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSeq {
    elements: Vec<u64>,
    horizon: u64,
}

impl IntSeq {
    pub fn new(elements: Vec<u64>, horizon: u64) -> Result<Self, DensityError> {
        if horizon > MAX_HORIZON {
            return Err(DensityError::HorizonTooLarge { horizon });
        }
        if elements.first() == Some(&0) {
            return Err(DensityError::ZeroElement);
        }
        if let Some(i) = elements.windows(2).position(|w| w[0] >= w[1]) {
            return Err(DensityError::NotIncreasing { index: i + 1 });
        }
        if let Some(&last) = elements.last() {
            if last > horizon {
                return Err(DensityError::BeyondHorizon { element: last, horizon });
            }
        }
        Ok(IntSeq { elements, horizon })
    }

    /// Horizon defaults to the largest element.
    pub fn from_elements(elements: Vec<u64>) -> Result<Self, DensityError> {
        let h = elements.last().copied().unwrap_or(0);
        Self::new(elements, h)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.elements.binary_search(&v).is_ok()
    }

    /// `A(n)`, the number of elements in `[1, n]`.
    pub fn counting(&self, n: u64) -> Result<u64, DensityError> {
        if n == 0 || n > self.horizon {
            return Err(DensityError::CountOutOfRange { n, horizon: self.horizon });
        }
        Ok(self.elements.partition_point(|&e| e <= n) as u64)
    }

    /// `P[n] = A(n)` for `n` in `0..=H`.
    fn prefix_counts(&self) -> Vec<u64> {
        let h = self.horizon as usize;
        let mut p = vec![0u64; h + 1];
        let mut it = self.elements.iter().peekable();
        let mut c = 0;
        for (n, slot) in p.iter_mut().enumerate().skip(1) {
            while it.next_if(|&&e| e as usize == n).is_some() {
                c += 1;
            }
            *slot = c;
        }
        p
    }

    /// Elements in `[lo, hi]`.
    fn slice(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.elements.partition_point(|&e| e < lo);
        let b = self.elements.partition_point(|&e| e <= hi);
        &self.elements[a..b]
    }

    /// Positions `n` in `[1, H]` with `pattern[(n - 1) % len] == '1'`.
    pub fn periodic(pattern: &str, horizon: u64) -> Result<Self, DensityError> {
        let bits: Vec<bool> = pattern.bytes().map(|b| b == b'1').collect();
        if bits.is_empty() {
            return Self::new(Vec::new(), horizon);
        }
        let elements = (1..=horizon).filter(|n| bits[((n - 1) % bits.len() as u64) as usize]).collect();
        Self::new(elements, horizon)
    }

    /// `start, start + step, ...` up to `horizon`.
    pub fn arithmetic(start: u64, step: u64, horizon: u64) -> Result<Self, DensityError> {
        if start == 0 {
            return Err(DensityError::ZeroElement);
        }
        let step = step.max(1);
        let elements = (0..).map(|i| start + i * step).take_while(|&v| v <= horizon).collect();
        Self::new(elements, horizon)
    }

    /// Bursts of density 4/5 (pattern `11110`) on `[10 * 4^j, 15 * 4^j)` for
    /// `j >= 1`, truncated at `horizon`. Banach density 4/5, upper natural
    /// density near 1/3, lower natural density 0.
    pub fn burst(horizon: u64) -> Result<Self, DensityError> {
        let mut elements = Vec::new();
        let mut scale = 4u64;
        while 10 * scale <= horizon {
            let lo = 10 * scale;
            let hi = (15 * scale - 1).min(horizon);
            elements.extend((lo..=hi).filter(|n| (n - lo) % 5 != 4));
            scale *= 4;
        }
        Self::new(elements, horizon)
    }
}

// a/b >= c/d
#[inline]
fn ge(a: u64, b: u64, c: u64, d: u64) -> bool {
    u128::from(a) * u128::from(d) >= u128::from(c) * u128::from(b)
}

#[inline]
fn gt(a: u64, b: u64, c: u64, d: u64) -> bool {
    u128::from(a) * u128::from(d) > u128::from(c) * u128::from(b)
}

fn mul_ratio(x: Ratio<u64>, y: Ratio<u64>) -> Result<Ratio<u64>, DensityError> {
    let r =
        Ratio::new(u128::from(*x.numer()) * u128::from(*y.numer()), u128::from(*x.denom()) * u128::from(*y.denom()));
    let n = u64::try_from(*r.numer()).map_err(|_| DensityError::Overflow)?;
    let d = u64::try_from(*r.denom()).map_err(|_| DensityError::Overflow)?;
    Ok(Ratio::new_raw(n, d))
}

/// Estimates over `[tail_start, H]` with the `n` or window realising each.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DensityReport {
    pub horizon: u64,
    pub tail_start: u64,
    pub count: u64,
    /// `A(n)/n` at powers of two from `tail_start` on, and at `H`.
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio_pairs"))]
    pub prefix_ratios: Vec<(u64, Ratio<u64>)>,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub upper_est: Ratio<u64>,
    pub upper_at: u64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub lower_est: Ratio<u64>,
    pub lower_at: u64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub banach_est: Ratio<u64>,
    /// Window `[banach_start, banach_start + banach_length - 1]`.
    pub banach_start: u64,
    pub banach_length: u64,
}

fn check_tail(a: &IntSeq, tail_start: u64) -> Result<(), DensityError> {
    if tail_start == 0 || tail_start > a.horizon {
        return Err(DensityError::TailStartOutOfRange { tail_start, horizon: a.horizon });
    }
    Ok(())
}

/// `(value, n)` for the max and min of `A(n)/n` over `[tail_start, H]`;
/// first `n` wins ties.
fn natural_extremes(p: &[u64], tail_start: u64) -> ((u64, u64), (u64, u64)) {
    let h = p.len() as u64 - 1;
    let t = tail_start;
    let (mut up, mut lo) = ((p[t as usize], t), (p[t as usize], t));
    for n in t + 1..=h {
        let c = p[n as usize];
        if gt(c, n, up.0, up.1) {
            up = (c, n);
        }
        if gt(lo.0, lo.1, c, n) {
            lo = (c, n);
        }
    }
    (up, lo)
}

/// Max of `(P[j] - P[i]) / (j - i)` over `j - i >= min_len`, as
/// `(count, start = i + 1, length)`. Lower convex hull of `(i, P[i])` with a
/// binary-search tangent query; `O(H log H)`. First `j` wins ties.
fn max_window_density(p: &[u64], min_len: u64) -> (u64, u64, u64) {
    let h = p.len() - 1;
    let l = min_len as usize;
    let pt = |i: usize| (i as i128, p[i] as i128);
    let cross =
        |o: (i128, i128), a: (i128, i128), b: (i128, i128)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<usize> = Vec::new();
    let mut best = (p[l] - p[0], 1u64, l as u64);
    for j in l..=h {
        let new = pt(j - l);
        while hull.len() >= 2 && cross(pt(hull[hull.len() - 2]), pt(hull[hull.len() - 1]), new) <= 0 {
            hull.pop();
        }
        hull.push(j - l);
        let q = pt(j);
        // moving from hull[m] to hull[m+1] strictly raises the slope to q
        let improves = |m: usize| cross(pt(hull[m]), pt(hull[m + 1]), q) > 0;
        let (mut lo, mut hi) = (0usize, hull.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if improves(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let i = hull[lo];
        let (c, len) = (p[j] - p[i], (j - i) as u64);
        if gt(c, len, best.0, best.2) {
            best = (c, i as u64 + 1, len);
        }
    }
    best
}

/// Estimates of upper and lower natural density (max and min of `A(n)/n`
/// over `[tail_start, H]`) and upper Banach density (best average over
/// windows of length at least `tail_start`, prefix windows included).
pub fn density_report(a: &IntSeq, tail_start: u64) -> Result<DensityReport, DensityError> {
    check_tail(a, tail_start)?;
    let p = a.prefix_counts();
    let h = a.horizon;
    let ((uc, un), (lc, ln)) = natural_extremes(&p, tail_start);
    let (bc, bs, bl) = max_window_density(&p, tail_start);
    let mut prefix_ratios = Vec::new();
    let mut n = tail_start.next_power_of_two();
    while n < h {
        prefix_ratios.push((n, Ratio::new(p[n as usize], n)));
        n *= 2;
    }
    prefix_ratios.push((h, Ratio::new(p[h as usize], h)));
    let report = DensityReport {
        horizon: h,
        tail_start,
        count: a.len() as u64,
        prefix_ratios,
        upper_est: Ratio::new(uc, un),
        upper_at: un,
        lower_est: Ratio::new(lc, ln),
        lower_at: ln,
        banach_est: Ratio::new(bc, bl),
        banach_start: bs,
        banach_length: bl,
    };
    assert!(report.lower_est <= report.upper_est && report.upper_est <= report.banach_est);
    Ok(report)
}

/// `ceil(sqrt(H))`, the default minimum window length.
pub fn default_min_window(horizon: u64) -> u64 {
    let mut r = libm::sqrt(horizon as f64) as u64;
    while r * r < horizon {
        r += 1;
    }
    while r > 1 && (r - 1) * (r - 1) >= horizon {
        r -= 1;
    }
    r.max(1)
}

fn check_rho(rho: Ratio<u64>) -> Result<(), DensityError> {
    if *rho.numer() == 0 || rho.numer() >= rho.denom() {
        return Err(DensityError::RhoOutOfRange);
    }
    Ok(())
}

/// Why a chain of windows stopped growing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChainStop {
    /// The next window no longer fits before the horizon.
    HorizonReached,
    /// The next window fits but none reaches the target density.
    NoDenseWindow,
}

/// One window `[k, k + n - 1]` of `A`, copied to `[w - n + 1, w]` in `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WindowRecord {
    pub k: u64,
    pub n: u64,
    pub w: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BanachLog {
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub rho: Ratio<u64>,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub growth: Ratio<u64>,
    pub min_window: u64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub alpha_hat: Ratio<u64>,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub target: Ratio<u64>,
    pub windows: Vec<WindowRecord>,
    pub stop: ChainStop,
}

// g(t) = P[t] * den - num * t; window (s, e] has density >= num/den iff g(e) >= g(s)
fn g_values(p: &[u64], target: Ratio<u64>) -> Vec<i128> {
    let (num, den) = (i128::from(*target.numer()), i128::from(*target.denom()));
    p.iter().enumerate().map(|(t, &c)| i128::from(c) * den - num * t as i128).collect()
}

enum Fit {
    Found { start: u64, len: u64 },
    Stop(ChainStop),
}

/// First window `[s, e]` with `s >= from`, `e - s + 1 >= min_len` and density
/// at least the target: smallest `s`, then smallest `e`.
fn first_fit_min_len(g: &[i128], from: u64, min_len: u64) -> Fit {
    let h = g.len() as u64 - 1;
    if from == 0 || from + min_len - 1 > h {
        return Fit::Stop(ChainStop::HorizonReached);
    }
    let mut suffix_max = vec![i128::MIN; g.len() + 1];
    for t in (0..g.len()).rev() {
        suffix_max[t] = suffix_max[t + 1].max(g[t]);
    }
    for s in from..=h + 1 - min_len {
        let base = g[(s - 1) as usize];
        let first_end = (s - 1 + min_len) as usize;
        if suffix_max[first_end] >= base {
            let e = (first_end..g.len()).find(|&e| g[e] >= base).expect("suffix max attained");
            return Fit::Found { start: s, len: e as u64 - s + 1 };
        }
    }
    Fit::Stop(ChainStop::NoDenseWindow)
}

/// First window of exactly `len` terms starting at or after `from`.
fn first_fit_exact(g: &[i128], from: u64, len: u64) -> Fit {
    let h = g.len() as u64 - 1;
    if from == 0 || from + len - 1 > h {
        return Fit::Stop(ChainStop::HorizonReached);
    }
    match (from..=h + 1 - len).find(|&s| g[(s - 1 + len) as usize] >= g[(s - 1) as usize]) {
        Some(start) => Fit::Found { start, len },
        None => Fit::Stop(ChainStop::NoDenseWindow),
    }
}

/// Copies windows of `A` next to each other: window `i` lands on
/// `[w_{i-1} + 1, w_i]`.
fn concatenate(a: &IntSeq, windows: &[(u64, u64)]) -> IntSeq {
    let mut out = Vec::new();
    let mut w = 0;
    for &(k, n) in windows {
        out.extend(a.slice(k, k + n - 1).iter().map(|&e| e - k + w + 1));
        w += n;
    }
    IntSeq { elements: out, horizon: w }
}

/// Picks windows of `A` with density at least `rho * alpha_hat`, each
/// starting after the previous one and with `N_{i+1} > M * N_i`, and packs
/// them contiguously into `B`. `alpha_hat` is the Banach estimate with
/// windows of length at least `min_window`, which is also the least `N_1`.
pub fn banach_to_upper_transform(
    a: &IntSeq,
    rho: Ratio<u64>,
    growth: Ratio<u64>,
    min_window: u64,
) -> Result<(IntSeq, BanachLog), DensityError> {
    check_rho(rho)?;
    if growth.numer() <= growth.denom() {
        return Err(DensityError::GrowthNotAboveOne);
    }
    if a.is_empty() {
        return Err(DensityError::EmptySequence);
    }
    check_tail(a, min_window)?;
    let p = a.prefix_counts();
    let (bc, _, bl) = max_window_density(&p, min_window);
    let alpha_hat = Ratio::new(bc, bl);
    let target = mul_ratio(rho, alpha_hat)?;
    let g = g_values(&p, target);
    let mut windows = Vec::new();
    let mut records = Vec::new();
    let (mut from, mut min_len, mut w) = (1u64, min_window, 0u64);
    let stop = loop {
        match first_fit_min_len(&g, from, min_len) {
            Fit::Found { start, len } => {
                w += len;
                records.push(WindowRecord {
                    k: start,
                    n: len,
                    w,
                    count: p[(start + len - 1) as usize] - p[(start - 1) as usize],
                });
                windows.push((start, len));
                from = start + len;
                let next = u128::from(*growth.numer()) * u128::from(len) / u128::from(*growth.denom()) + 1;
                min_len = u64::try_from(next).map_err(|_| DensityError::Overflow)?;
            }
            Fit::Stop(reason) => break reason,
        }
    };
    if windows.is_empty() {
        return Err(DensityError::NoQualifyingWindow { target, min_length: min_window });
    }
    let b = concatenate(a, &windows);
    Ok((b, BanachLog { rho, growth, min_window, alpha_hat, target, windows: records, stop }))
}

/// Rebuilds `B` from a recorded chain of windows.
pub fn replay_windows(a: &IntSeq, windows: &[WindowRecord]) -> IntSeq {
    let pairs: Vec<(u64, u64)> = windows.iter().map(|r| (r.k, r.n)).collect();
    concatenate(a, &pairs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UpperLog {
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub rho: Ratio<u64>,
    pub min_window: u64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub c_hat: Ratio<u64>,
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ser::ratio"))]
    pub target: Ratio<u64>,
    /// `I_1 = [1, N_1]`, then intervals of doubling length.
    pub windows: Vec<WindowRecord>,
    pub stop: ChainStop,
}

impl UpperLog {
    pub fn n1(&self) -> u64 {
        self.windows[0].n
    }
}

impl BanachLog {
    pub fn n1(&self) -> u64 {
        self.windows[0].n
    }
}

/// Takes `I_1 = [1, N_1]` with `N_1 >= min_window` the first prefix of
/// density at least `rho * c_hat`, then intervals of exactly twice the
/// previous length, each first-fit after the previous one with the same
/// density, and packs them contiguously into `B`. `c_hat` is the upper
/// estimate over `[min_window, H]`.
pub fn upper_to_lower_transform(
    a: &IntSeq,
    rho: Ratio<u64>,
    min_window: u64,
) -> Result<(IntSeq, UpperLog), DensityError> {
    check_rho(rho)?;
    if a.is_empty() {
        return Err(DensityError::EmptySequence);
    }
    check_tail(a, min_window)?;
    let p = a.prefix_counts();
    let ((uc, un), _) = natural_extremes(&p, min_window);
    if uc == 0 {
        return Err(DensityError::ZeroDensity);
    }
    let c_hat = Ratio::new(uc, un);
    let target = mul_ratio(rho, c_hat)?;
    let (tn, td) = (*target.numer(), *target.denom());
    let n1 = (min_window..=a.horizon).find(|&n| ge(p[n as usize], n, tn, td)).expect("the upper witness qualifies");
    let g = g_values(&p, target);
    let mut windows = vec![(1u64, n1)];
    let mut records = vec![WindowRecord { k: 1, n: n1, w: n1, count: p[n1 as usize] }];
    let (mut from, mut len, mut w) = (n1 + 1, n1, n1);
    let stop = loop {
        len = len.checked_mul(2).ok_or(DensityError::Overflow)?;
        match first_fit_exact(&g, from, len) {
            Fit::Found { start, len } => {
                w += len;
                records.push(WindowRecord {
                    k: start,
                    n: len,
                    w,
                    count: p[(start + len - 1) as usize] - p[(start - 1) as usize],
                });
                windows.push((start, len));
                from = start + len;
            }
            Fit::Stop(reason) => break reason,
        }
    };
    let b = concatenate(a, &windows);
    Ok((b, UpperLog { rho, min_window, c_hat, target, windows: records, stop }))
}

/// Longest progression inside `A`, as for the indicator word on `[1, H]`.
pub fn longest_ap_of_seq(a: &IntSeq) -> LongestAp {
    let pos: Vec<usize> = a.elements.iter().map(|&e| e as usize).collect();
    longest_ap_in(&pos, |q| pos.binary_search(&q).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Progression;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: u64, d: u64) -> Ratio<u64> {
        Ratio::new(n, d)
    }

    fn brute_banach(a: &IntSeq, min_len: u64) -> Ratio<u64> {
        let h = a.horizon;
        let mut best = r(0, 1);
        for k in 1..=h {
            for e in k + min_len - 1..=h {
                let c = a.slice(k, e).len() as u64;
                best = best.max(r(c, e - k + 1));
            }
        }
        best
    }

    #[test]
    fn counting_examples() {
        let evens = IntSeq::arithmetic(2, 2, 10).unwrap();
        assert_eq!(evens.counting(10), Ok(5));
        assert_eq!(evens.counting(1), Ok(0));
        assert!(evens.counting(0).is_err());
        assert!(evens.counting(11).is_err());
        let squares = IntSeq::new((1..=10).map(|i| i * i).collect(), 100).unwrap();
        assert_eq!(squares.counting(50), Ok(7));
    }

    #[test]
    fn construction_rejects() {
        assert_eq!(IntSeq::new(vec![0, 1], 5), Err(DensityError::ZeroElement));
        assert_eq!(IntSeq::new(vec![1, 3, 3], 5), Err(DensityError::NotIncreasing { index: 2 }));
        assert_eq!(IntSeq::new(vec![6], 5), Err(DensityError::BeyondHorizon { element: 6, horizon: 5 }));
    }

    #[test]
    fn report_evens() {
        let evens = IntSeq::arithmetic(2, 2, 1000).unwrap();
        let rep = density_report(&evens, 100).unwrap();
        assert_eq!(rep.upper_est, r(1, 2));
        assert_eq!(rep.lower_est, r(50, 101));
        assert!(rep.banach_est >= r(1, 2));
        assert_eq!(rep.prefix_ratios.first(), Some(&(128, r(1, 2))));
        assert_eq!(rep.prefix_ratios.last(), Some(&(1000, r(1, 2))));
    }

    #[test]
    fn report_block() {
        let h = 1000;
        let block = IntSeq::new((1..=h / 2).collect(), h).unwrap();
        let rep = density_report(&block, 10).unwrap();
        assert_eq!(rep.banach_est, r(1, 1));
        assert_eq!(rep.lower_est, r(1, 2));
        assert_eq!(rep.lower_at, h);
        assert_eq!(rep.upper_est, r(1, 1));
        assert_eq!(rep.upper_at, 10);
        assert_eq!(Ratio::new(block.counting(h / 2).unwrap(), h / 2), r(1, 1));
    }

    #[test]
    fn report_empty() {
        let rep = density_report(&IntSeq::new(vec![], 50).unwrap(), 5).unwrap();
        assert_eq!((rep.upper_est, rep.lower_est, rep.banach_est), (r(0, 1), r(0, 1), r(0, 1)));
    }

    #[test]
    fn banach_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let h = rng.gen_range(1..60u64);
            let density = rng.gen_range(0.05..0.95);
            let elements = (1..=h).filter(|_| rng.gen_bool(density)).collect();
            let a = IntSeq::new(elements, h).unwrap();
            let t = rng.gen_range(1..=h);
            let rep = density_report(&a, t).unwrap();
            assert_eq!(rep.banach_est, brute_banach(&a, t), "{a:?} t={t}");
            let c = a.slice(rep.banach_start, rep.banach_start + rep.banach_length - 1).len() as u64;
            assert_eq!(r(c, rep.banach_length), rep.banach_est);
            assert!(rep.banach_length >= t);
        }
    }

    #[test]
    fn default_window() {
        assert_eq!(default_min_window(100_000), 317);
        assert_eq!(default_min_window(100), 10);
        assert_eq!(default_min_window(101), 11);
        assert_eq!(default_min_window(1), 1);
    }

    #[test]
    fn single_window() {
        // dense on [1, 40], empty afterwards
        let a = IntSeq::new((1..=40).collect(), 200).unwrap();
        let (b, log) = banach_to_upper_transform(&a, r(9, 10), r(2, 1), 20).unwrap();
        assert_eq!(log.windows, vec![WindowRecord { k: 1, n: 20, w: 20, count: 20 }]);
        assert_eq!(b.elements(), &(1..=20).collect::<Vec<_>>()[..]);
        let up = density_report(&b, log.n1()).unwrap().upper_est;
        assert!(up >= r(9, 10) * log.alpha_hat);
    }

    #[test]
    fn two_windows_offsets() {
        // two dense blocks of lengths 10 and 21, separated by empty space
        let mut els: Vec<u64> = (5..15).collect();
        els.extend(100..121);
        let a = IntSeq::new(els, 200).unwrap();
        let (b, log) = banach_to_upper_transform(&a, r(19, 20), r(2, 1), 10).unwrap();
        let w: Vec<(u64, u64, u64)> = log.windows.iter().map(|x| (x.k, x.n, x.w)).collect();
        assert_eq!(w[0], (5, 10, 10));
        assert_eq!(w[1].1, 21);
        assert_eq!(w[1].2, 31);
        // element 100 of A sits at k_2 -> w_1 + 1 + (100 - k_2)
        assert!(b.contains(11 + 100 - w[1].0));
        assert_eq!(b, replay_windows(&a, &log.windows));
    }

    #[test]
    fn window_fidelity_and_guarantee() {
        let a = IntSeq::burst(20_000).unwrap();
        let rho = r(9, 10);
        let (b, log) = banach_to_upper_transform(&a, rho, r(2, 1), default_min_window(20_000)).unwrap();
        let mut prev = 0;
        for win in &log.windows {
            let in_b: Vec<u64> = b.slice(prev + 1, win.w).iter().map(|&e| e - prev - 1).collect();
            let in_a: Vec<u64> = a.slice(win.k, win.k + win.n - 1).iter().map(|&e| e - win.k).collect();
            assert_eq!(in_a, in_b);
            assert!(ge(win.count, win.n, *log.target.numer(), *log.target.denom()));
            prev = win.w;
        }
        for pair in log.windows.windows(2) {
            assert!(pair[1].n > 2 * pair[0].n);
            assert!(pair[1].k >= pair[0].k + pair[0].n);
        }
        let n1 = log.n1();
        let up = density_report(&b, n1).unwrap().upper_est;
        let bound = rho * r(1, 2) * log.alpha_hat - r(1, n1);
        assert!(up >= bound, "{up} < {bound}");
    }

    #[test]
    fn ap_audit_single_window() {
        let a = IntSeq::periodic("110", 3000).unwrap();
        let (b, log) = banach_to_upper_transform(&a, r(1, 2), r(3, 2), 30).unwrap();
        let mut prev = 0;
        for win in &log.windows {
            let part = IntSeq::new(b.slice(prev + 1, win.w).to_vec(), win.w).unwrap();
            let ap = longest_ap_of_seq(&part);
            if let Some(p) = ap.witness {
                let back: Vec<u64> = p.positions().map(|q| q as u64 - prev - 1 + win.k).collect();
                assert!(back.iter().all(|&q| a.contains(q)));
            }
            prev = win.w;
        }
    }

    #[test]
    fn banach_diagnostic() {
        let a = IntSeq::new(vec![1], 100).unwrap();
        let err = banach_to_upper_transform(&a, r(1, 2), r(2, 1), 200).unwrap_err();
        assert!(matches!(err, DensityError::TailStartOutOfRange { .. }));
        assert_eq!(banach_to_upper_transform(&a, r(1, 1), r(2, 1), 5), Err(DensityError::RhoOutOfRange));
        assert_eq!(banach_to_upper_transform(&a, r(1, 2), r(1, 1), 5), Err(DensityError::GrowthNotAboveOne));
    }

    #[test]
    fn upper_to_lower_full() {
        let a = IntSeq::new((1..=1000).collect(), 1000).unwrap();
        let (b, log) = upper_to_lower_transform(&a, r(9, 10), 10).unwrap();
        assert_eq!(log.n1(), 10);
        let lens: Vec<u64> = log.windows.iter().map(|w| w.n).collect();
        assert_eq!(lens, vec![10, 20, 40, 80, 160, 320]);
        assert_eq!(log.stop, ChainStop::HorizonReached);
        assert_eq!(b.elements(), &(1..=630).collect::<Vec<_>>()[..]);
        assert_eq!(density_report(&b, log.n1()).unwrap().lower_est, r(1, 1));
    }

    #[test]
    fn upper_to_lower_evens() {
        let a = IntSeq::arithmetic(2, 2, 10_000).unwrap();
        let rho = r(9, 10);
        let (b, log) = upper_to_lower_transform(&a, rho, 100).unwrap();
        assert_eq!(log.c_hat, r(1, 2));
        for pair in log.windows.windows(2) {
            assert_eq!(pair[1].n, 2 * pair[0].n);
        }
        let lo = density_report(&b, log.n1()).unwrap().lower_est;
        assert!(lo >= rho * log.c_hat / 3 - r(1, log.n1()));
    }

    #[test]
    fn upper_to_lower_burst() {
        let a = IntSeq::burst(100_000).unwrap();
        let rho = r(9, 10);
        let (b, log) = upper_to_lower_transform(&a, rho, default_min_window(100_000)).unwrap();
        assert!(log.windows.len() >= 2);
        let lo = density_report(&b, log.n1()).unwrap().lower_est;
        assert!(lo >= rho * log.c_hat / 3 - r(1, log.n1()));
        assert_eq!(upper_to_lower_transform(&a, rho, default_min_window(100_000)).unwrap().1, log);
        assert_eq!(replay_windows(&a, &log.windows), b);
    }

    #[test]
    fn longest_ap_examples() {
        let evens = IntSeq::arithmetic(2, 2, 20).unwrap();
        let l = longest_ap_of_seq(&evens);
        assert_eq!(l.len, 10);
        assert_eq!(l.witness, Some(Progression { start: 2, gap: 2, terms: 10 }));
        assert_eq!(longest_ap_of_seq(&IntSeq::from_elements(vec![1, 2, 4, 8, 16]).unwrap()).len, 2);
        assert_eq!(longest_ap_of_seq(&IntSeq::new(vec![], 5).unwrap()).len, 0);
    }

    #[test]
    fn burst_shape() {
        let a = IntSeq::burst(100_000).unwrap();
        assert!(a.contains(40) && a.contains(43) && !a.contains(44) && !a.contains(60));
        let rep = density_report(&a, default_min_window(100_000)).unwrap();
        assert!(rep.banach_est >= r(4, 5));
        assert!(rep.upper_est < r(2, 5));
    }
}
