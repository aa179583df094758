//! Parallel drivers, file formats and the `apfree` command line on top of
//! `apfree-core`.

pub mod cli;
pub mod formats;
pub mod parallel;

use apfree_core::density::IntSeq;

/// Built-in sequences: `burst:H`, `evens:H`, `block:L:H` (`[1, L]`),
/// `periodic:PATTERN:H` and `arithmetic:A:D:H`.
pub fn builtin_seq(text: &str) -> Result<IntSeq, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.parse::<u64>().map_err(|_| format!("builtin {text:?}: {s:?} is not an integer"));
    let seq = match parts.as_slice() {
        ["burst", h] => IntSeq::burst(num(h)?),
        ["evens", h] => IntSeq::arithmetic(2, 2, num(h)?),
        ["block", l, h] => IntSeq::new((1..=num(l)?).collect(), num(h)?),
        ["periodic", pattern, h] if pattern.bytes().all(|b| b == b'0' || b == b'1') => {
            IntSeq::periodic(pattern, num(h)?)
        }
        ["arithmetic", a, d, h] => IntSeq::arithmetic(num(a)?, num(d)?, num(h)?),
        _ => return Err(format!("unknown builtin {text:?}")),
    };
    seq.map_err(|e| format!("builtin {text:?}: {e}"))
}
