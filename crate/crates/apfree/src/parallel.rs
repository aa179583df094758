//! Deterministic parallel drivers.
//!
//! Work is cut into shards whose layout depends only on the inputs, never on
//! the thread count, and shard results are merged in shard order. Output is
//! therefore identical for every pool size.

use std::sync::atomic::{AtomicBool, Ordering};

use apfree_core::dyadic::{free_word_list, scan_pairs, search_report, w_certificate, PairOp, PairStats, SearchReport};
use apfree_core::enumeration::{count_with_prefix, shard_prefixes};
use apfree_core::vdw::{self, outcome_from_depth};
use apfree_core::{BudgetExceeded, Coloring, VdwError, VdwOutcome, WCertificate};
use rayon::prelude::*;

/// Prefix length used to shard counting.
pub const COUNT_SHARD_DEPTH: usize = 10;
/// Shards handed out per round; the budget is re-checked between rounds.
pub const COUNT_ROUND: usize = 64;
/// Pairs per scan chunk.
pub const PAIR_CHUNK: u64 = 4096;
/// Prefix length used to shard coloring searches.
pub const VDW_SHARD_DEPTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountOutcome {
    pub count: u64,
    pub nodes: u64,
}

/// Counts k-AP-free words of length `n` over prefix shards.
///
/// Lengths up to [`COUNT_SHARD_DEPTH`] run as one search; `nodes` never
/// includes the work of listing the prefixes. Shards run in rounds of
/// [`COUNT_ROUND`]; each shard of a round may spend whatever budget remained
/// when the round began. On failure the partial count covers the longest run
/// of leading shards that fit in the budget.
pub fn count(n: usize, k: usize, budget: u64) -> Result<CountOutcome, BudgetExceeded> {
    if n <= COUNT_SHARD_DEPTH {
        return count_with_prefix(n, k, None, budget).map(|(count, nodes)| CountOutcome { count, nodes });
    }
    let prefixes = shard_prefixes(n, k, COUNT_SHARD_DEPTH);
    let (mut count, mut nodes) = (0u64, 0u64);
    for round in prefixes.chunks(COUNT_ROUND) {
        let remaining = budget.saturating_sub(nodes);
        let results: Vec<_> = round.par_iter().map(|p| count_with_prefix(n, k, Some(p), remaining)).collect();
        for r in results {
            match r {
                Ok((c, used)) if nodes + used <= budget => {
                    count += c;
                    nodes += used;
                }
                Ok((_, used)) => {
                    return Err(BudgetExceeded { budget, nodes: nodes + used, partial_count: count });
                }
                Err(e) => {
                    return Err(BudgetExceeded { budget, nodes: nodes + e.nodes, partial_count: count });
                }
            }
        }
    }
    Ok(CountOutcome { count, nodes })
}

fn chunked_scan(xs: &[apfree_core::BinaryWord], ys: &[apfree_core::BinaryWord], limit: u64, op: PairOp) -> PairStats {
    let total = (xs.len() as u64 * ys.len() as u64).min(limit);
    let chunks = total.div_ceil(PAIR_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * PAIR_CHUNK;
            scan_pairs(xs, ys, lo..(lo + PAIR_CHUNK).min(total), op)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(PairStats::default(), PairStats::merge)
}

/// Parallel empirical sum bound; `budget` caps enumeration nodes and pairs.
pub fn empirical_w(i: usize, j: usize, depth: usize, budget: u64) -> WCertificate {
    let ((xs, xs_ok), (ys, ys_ok)) =
        rayon::join(|| free_word_list(depth, i, budget), || free_word_list(depth, j, budget));
    let stats = chunked_scan(&xs, &ys, budget, PairOp::SumMod1);
    w_certificate(i, j, depth, &xs, &ys, &stats, xs_ok && ys_ok)
}

/// Parallel scan of products of k-AP-free words.
pub fn product_search(k: usize, depth: usize, budget: u64) -> SearchReport {
    let (words, complete) = free_word_list(depth, k, budget);
    let stats = chunked_scan(&words, &words, budget, PairOp::Product);
    search_report(k, depth, &words, &stats, complete)
}

/// Mixed van der Waerden number over coloring-prefix shards.
pub fn vdw_number(lengths: &[usize], cap: usize) -> Result<VdwOutcome, VdwError> {
    let depth = VDW_SHARD_DEPTH.min(cap);
    let prefixes = vdw::shard_prefixes(lengths, depth)?;
    if prefixes.is_empty() {
        return vdw::vdw_number(lengths, cap);
    }
    let reached_cap = AtomicBool::new(false);
    let deepest = prefixes
        .par_iter()
        .map(|p| {
            if reached_cap.load(Ordering::Relaxed) {
                return Ok(cap);
            }
            let (d, _) = vdw::deepest_valid_from(lengths, cap, p)?.expect("shard prefixes are valid");
            if d >= cap {
                reached_cap.store(true, Ordering::Relaxed);
            }
            Ok(d)
        })
        .collect::<Result<Vec<usize>, VdwError>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    Ok(outcome_from_depth(deepest, cap))
}

/// Lexicographically least valid coloring of `[1, n]` over prefix shards.
pub fn find_coloring(lengths: &[usize], n: usize) -> Result<Option<Coloring>, VdwError> {
    let depth = VDW_SHARD_DEPTH.min(n);
    let prefixes = vdw::shard_prefixes(lengths, depth)?;
    let found = prefixes
        .par_iter()
        .map(|p| vdw::find_valid_coloring_from(lengths, n, p))
        .collect::<Result<Vec<_>, VdwError>>()?
        .into_iter()
        .flatten()
        .next();
    if let Some(c) = &found {
        assert!(vdw::verify_coloring(c, lengths).is_ok(), "search produced an invalid coloring");
    }
    Ok(found)
}
