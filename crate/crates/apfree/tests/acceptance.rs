//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Oracles here share no code with the library searches.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use apfree_core::density::{self, IntSeq};
use apfree_core::dyadic::{add_mod1, sr_decompose};
use apfree_core::enumeration::{collect_k_ap_free, count_k_ap_free, count_low_weight, entropy_bound, floor_eps_n};
use apfree_core::grid::{box_count, grid_of_f, grid_of_mask, iterate_sum, MaskSpec};
use apfree_core::vdw::{self, VdwOutcome};
use apfree_core::word::{is_k_ap_free, is_subsequence, longest_ap, parse_word, shift_word};
use apfree_core::{BinaryWord, DEFAULT_NODE_BUDGET};
use num_bigint::BigUint;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn apfree_bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_apfree"))
        .args(args)
        .env_remove("APFREE_NODE_BUDGET")
        .env_remove("APFREE_DEPTH_BUDGET")
        .env_remove("APFREE_THREADS")
        .output()
        .expect("binary runs")
}

// bit n - p of `bits` is position p
fn naive_has_ap(bits: u64, n: usize, k: usize) -> bool {
    let one = |p: usize| bits >> (n - p) & 1 == 1;
    (1..=n).any(|a| (1..=n).any(|d| a + (k - 1) * d <= n && (0..k).all(|j| one(a + j * d))))
}

// colors[p - 1] is the 1-based color of p
fn naive_mono_ap(colors: &[u8], lengths: &[usize]) -> bool {
    let n = colors.len();
    (1..=n).any(|a| {
        let c = colors[a - 1];
        let len = lengths[c as usize - 1];
        len == 1 || (1..=n).any(|d| a + (len - 1) * d <= n && (1..len).all(|j| colors[a + j * d - 1] == c))
    })
}

fn all_pairs(max_len: usize, mut f: impl FnMut(&BinaryWord, &BinaryWord) -> Result<(), String>) -> Result<u64, String> {
    let mut pairs = 0;
    for n in 1..=max_len {
        let words: Vec<BinaryWord> = (0..1u64 << n).map(|b| BinaryWord::from_u64(b, n)).collect();
        for x in &words {
            for y in &words {
                f(x, y)?;
                pairs += 1;
            }
        }
    }
    Ok(pairs)
}

fn ac1() -> Outcome {
    let start = Instant::now();
    for k in 3..=5 {
        for n in 1..=16 {
            let naive = (0..1u64 << n).filter(|&b| !naive_has_ap(b, n, k)).count();
            let fast = count_k_ap_free(n, k, DEFAULT_NODE_BUDGET).map_err(|e| format!("{e:?}"))?;
            ensure(fast == BigUint::from(naive), || format!("N={n} k={k}: {fast} vs naive {naive}"))?;
        }
    }
    let four = count_k_ap_free(4, 3, DEFAULT_NODE_BUDGET).unwrap();
    ensure(four == BigUint::from(13u32), || format!("(4,3) gave {four}"))?;
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("N<=16, k=3..5 match naive filter; (4,3)=13; {t:.2?}"))
}

fn ac2() -> Outcome {
    let out = apfree_bin(&["sum", "add", "0111110", "0001010"]);
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success() && text == "1001000\n", || format!("sum add printed {text:?}"))?;
    let x = parse_word("0111110").unwrap();
    let y = parse_word("0001010").unwrap();
    let d = sr_decompose(&x, &y).unwrap();
    d.check().map_err(|v| format!("{v:?}"))?;
    ensure(d.sum.to_string() == "1001000", || format!("decomposition sum {}", d.sum))?;
    Ok("sum add -> 1001000; decomposition invariants hold".into())
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let pairs = all_pairs(10, |x, y| {
        let direct = add_mod1(x, y).unwrap();
        let via = add_mod1(&x.or(y).unwrap(), &x.and(y).unwrap()).unwrap();
        // integer oracle: (a + b) mod 2^n
        let n = x.len();
        let expect = (x.to_u64().unwrap() + y.to_u64().unwrap()) & ((1 << n) - 1);
        ensure(direct == via && direct.to_u64() == Some(expect), || format!("{x} + {y}"))
    })?;
    let t = within(start, Duration::from_secs(30))?;
    Ok(format!("{pairs} pairs, 0 failures; {t:.2?}"))
}

fn ac4() -> Outcome {
    let mut digits = 0u64;
    let pairs = all_pairs(10, |x, y| {
        let d = sr_decompose(x, y).unwrap();
        d.check().map_err(|v| format!("{x} + {y}: {v:?}"))?;
        for (p, kind) in d.classify_sum_ones() {
            ensure(kind.is_some(), || format!("{x} + {y}: digit {p} unclassified"))?;
            digits += 1;
        }
        Ok(())
    })?;
    Ok(format!("{pairs} pairs, {digits} sum digits classified, 0 unclassified"))
}

fn ac5() -> Outcome {
    let start = Instant::now();
    for (lengths, n) in [(&[2usize, 2][..], 3usize), (&[3, 2], 6), (&[3, 3], 9)] {
        let got = vdw::vdw_number(lengths, 40).map_err(|e| format!("{e:?}"))?;
        ensure(got == VdwOutcome::Exact { n }, || format!("{lengths:?}: {got:?}"))?;
        let cert = vdw::find_valid_coloring(lengths, n - 1).unwrap().ok_or(format!("{lengths:?}: no certificate"))?;
        ensure(cert.len() == n - 1 && !naive_mono_ap(cert.colors(), lengths), || {
            format!("{lengths:?}: bad certificate {cert}")
        })?;
        ensure(vdw::find_valid_coloring(lengths, n).unwrap().is_none(), || format!("{lengths:?}: coloring of {n}"))?;
        // brute force over every coloring of [1, n]
        let r = lengths.len() as u64;
        let mut colors = vec![1u8; n];
        for code in 0..r.pow(n as u32) {
            let mut c = code;
            for slot in colors.iter_mut() {
                *slot = (c % r) as u8 + 1;
                c /= r;
            }
            ensure(naive_mono_ap(&colors, lengths), || format!("{lengths:?}: {colors:?} avoids all"))?;
        }
    }
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("(2,2)=3, (3,2)=6, (3,3)=9 with certificates and refutations; {t:.2?}"))
}

fn ac6() -> Outcome {
    for k in 3..=4 {
        for n in 1..=14u32 {
            let g = grid_of_f(k, n, 24, DEFAULT_NODE_BUDGET).map_err(|e| format!("{e:?}"))?;
            let count = count_k_ap_free(n as usize, k, DEFAULT_NODE_BUDGET).unwrap();
            ensure(BigUint::from(box_count(&g)) == count, || format!("n={n} k={k}: {} vs {count}", box_count(&g)))?;
        }
    }
    Ok("n<=14, k=3,4".into())
}

fn ac7() -> Outcome {
    let unit = parse_word("10").unwrap();
    for t in 1..=12usize {
        let g = grid_of_mask(&MaskSpec::periodic(&unit, t), 24).map_err(|e| format!("{e:?}"))?;
        let c = box_count(&g);
        ensure(c == 1 << t, || format!("t={t}: {c}"))?;
        let ratio = Ratio::new(c.trailing_zeros() as usize, 2 * t);
        ensure(ratio == Ratio::new(1, 2), || format!("t={t}: ratio {ratio}"))?;
    }
    Ok("(10)^t, t<=12: 2^t cells, ratio 1/2".into())
}

fn ac8() -> Outcome {
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for n in [8, 16, 32, 64] {
        for i in 1..=10u64 {
            let eps = Ratio::new(i, 20);
            let count = count_low_weight(n, floor_eps_n(n, eps));
            let bound = entropy_bound(n, eps).map_err(|e| format!("{e:?}"))?;
            let c: f64 = count.to_string().parse().unwrap();
            ensure(c <= bound, || format!("N={n} eps={eps}: {count} > {bound}"))?;
            tightest = tightest.min(bound / c);
            checked += 1;
        }
    }
    Ok(format!("{checked} cases, 0 violations; min bound/count {tightest:.4}"))
}

fn ac9() -> Outcome {
    let a = grid_of_f(3, 12, 24, DEFAULT_NODE_BUDGET).map_err(|e| format!("{e:?}"))?;
    ensure(a.contains(0), || "cell 0 missing".into())?;
    let cov: Vec<f64> = iterate_sum(&a, 4).map_err(|e| format!("{e:?}"))?.iter().map(|(_, g)| g.coverage()).collect();
    ensure(cov.windows(2).all(|w| w[0] <= w[1]), || format!("coverage {cov:?}"))?;
    ensure(cov[1] > cov[0], || format!("no increase at t=2: {cov:?}"))?;
    Ok(format!("coverage {cov:?}"))
}

fn signed(r: Ratio<u64>) -> Ratio<i128> {
    Ratio::new(i128::from(*r.numer()), i128::from(*r.denom()))
}

fn ac10() -> Outcome {
    let a = IntSeq::burst(100_000).map_err(|e| format!("{e:?}"))?;
    let mw = density::default_min_window(a.horizon());
    let rho = Ratio::new(9, 10);
    let err = |e: density::DensityError| format!("{e:?}");

    let (b, log) = density::banach_to_upper_transform(&a, rho, Ratio::from_integer(2), mw).map_err(err)?;
    let n1 = log.n1();
    let upper = signed(density::density_report(&b, n1).map_err(err)?.upper_est);
    let bound = Ratio::new(9 * 8, 10 * 2 * 10) - Ratio::new(1, i128::from(n1));
    ensure(upper >= bound, || format!("upper {upper} < {bound}"))?;
    let again = density::banach_to_upper_transform(&a, rho, Ratio::from_integer(2), mw).map_err(err)?;
    let log_json = serde_json::to_string(&log).unwrap();
    ensure(serde_json::to_string(&again.1).unwrap() == log_json, || "banach log differs between runs".into())?;
    ensure(density::replay_windows(&a, &log.windows) == b && again.0 == b, || "banach replay differs".into())?;

    let (b2, log2) = density::upper_to_lower_transform(&a, rho, mw).map_err(err)?;
    let m1 = log2.n1();
    let lower = signed(density::density_report(&b2, m1).map_err(err)?.lower_est);
    let bound2 = signed(rho) * signed(log2.c_hat) / 3 - Ratio::new(1, i128::from(m1));
    ensure(lower >= bound2, || format!("lower {lower} < {bound2}"))?;
    let again2 = density::upper_to_lower_transform(&a, rho, mw).map_err(err)?;
    ensure(serde_json::to_string(&again2.1).unwrap() == serde_json::to_string(&log2).unwrap(), || {
        "upper log differs between runs".into()
    })?;
    ensure(density::replay_windows(&a, &log2.windows) == b2 && again2.0 == b2, || "upper replay differs".into())?;

    Ok(format!(
        "upper_est {upper} >= {bound} (N1={n1}, {} windows); lower_est {lower} >= {bound2} (N1={m1}, {} windows); logs replay",
        log.windows.len(),
        log2.windows.len()
    ))
}

fn ac11() -> Outcome {
    let args = ["product", "search", "--k", "3", "--depth", "8", "--threads"];
    let start = Instant::now();
    let first = apfree_bin(&[&args[..], &["1"]].concat());
    let t = within(start, Duration::from_secs(120))?;
    ensure(first.status.success(), || String::from_utf8_lossy(&first.stderr).into_owned())?;
    let report: serde_json::Value = serde_json::from_slice(&first.stdout).map_err(|e| e.to_string())?;
    ensure(report["exhaustive"] == true, || "scan not exhaustive".into())?;
    for threads in ["1", "8", "3"] {
        let again = apfree_bin(&[&args[..], &[threads]].concat());
        ensure(again.stdout == first.stdout, || format!("report differs at --threads {threads}"))?;
    }
    Ok(format!(
        "exhaustive over {} pairs, max L {}, identical at 1/8/3 threads; {t:.2?}",
        report["pairs_scanned"], report["max_ap_len"]
    ))
}

fn ac12() -> Outcome {
    let words = collect_k_ap_free(12, 3, DEFAULT_NODE_BUDGET).map_err(|e| format!("{e:?}"))?;
    let cert = apfree::parallel::empirical_w(3, 3, 12, u64::MAX);
    ensure(cert.exhaustive, || "empirical W not exhaustive".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let x = &words[rng.gen_range(0..words.len())];
        let y = &words[rng.gen_range(0..words.len())];
        let l = longest_ap(&add_mod1(x, y).unwrap()).len;
        ensure(l < cert.w_emp + 1, || format!("{x} + {y}: AP of {l} vs w_emp {}", cert.w_emp))?;
    }
    let mut checks = 0u64;
    for x in &words {
        for t in 0..=12 {
            let s = shift_word(x, t).unwrap();
            ensure(is_k_ap_free(&s, 3), || format!("shift {t} of {x}"))?;
            checks += 1;
        }
        let ones = x.one_positions();
        for mask in 0..1u32 << ones.len() {
            for shift in 1..12 {
                let mut y = BinaryWord::zeros(12);
                for (i, &p) in ones.iter().enumerate() {
                    if mask >> i & 1 == 1 && p + shift <= 12 {
                        y.set_digit(p + shift, true);
                    }
                }
                ensure(is_subsequence(&y, x, shift), || format!("{y} not a subsequence of {x}"))?;
                ensure(is_k_ap_free(&y, 3), || format!("subsequence {y} of {x}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("1000 random sums below w_emp+1={}; {checks} shifts/subsequences 3-AP-free", cert.w_emp + 1))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 12] = [
        ("oracle counting", ac1),
        ("worked sum example", ac2),
        ("OR/AND identity", ac3),
        ("carry-locality trichotomy", ac4),
        ("van der Waerden numbers", ac5),
        ("grid/enumeration bridge", ac6),
        ("period-2 mask dimension", ac7),
        ("entropy bound", ac8),
        ("iterated-sum monotonicity", ac9),
        ("density transforms", ac10),
        ("product search determinism", ac11),
        ("finite-depth closure", ac12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS AC{} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL AC{} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
