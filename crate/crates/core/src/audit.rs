//! Verdicts on a (scheme, key) pair: recoverability, secrecy, uniformity.
//!
//! `rank_audit` decides all three exactly from GF(2) ranks. For a linear
//! key `K = M'ξ` and communication `F = Mξ` over uniform `ξ`, `I(K;F) = 0`
//! iff the row spaces of `M'` and `M` meet only in zero, and `K` is uniform
//! iff `M'` has full row rank.
//!
//! `exhaustive_audit` ignores those facts and walks every realization,
//! counting in integers. `monte_carlo_audit` samples and can only fail to
//! find evidence of a problem.

use std::collections::HashMap;
use std::fmt;
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::capacity::csk_brute_force_with_cap;
use crate::error::{Error, Result};
use crate::gf2::{mat_vec_mul, rank, spans_intersect_trivially, BitMatrix, BitVector};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::protocol::{party_knowledge, KeySpec, LinearScheme};
use crate::rate::Rate;
use crate::source::{enumerate_all_with_cap, sample_with, view_coordinates};

/// Baseline flag threshold in standard deviations.
pub const MC_SIGMA: f64 = 4.0;

/// Realizations at or below which the exhaustive audit stays on one thread.
const SERIAL_LIMIT: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMethod {
    Rank,
    Exhaustive,
    MonteCarlo,
    /// Rank certificates backed by a Monte Carlo smoke test.
    RankMonteCarlo,
}

impl fmt::Display for AuditMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditMethod::Rank => "rank",
            AuditMethod::Exhaustive => "exhaustive",
            AuditMethod::MonteCarlo => "monte_carlo",
            AuditMethod::RankMonteCarlo => "rank+monte_carlo",
        })
    }
}

impl std::str::FromStr for AuditMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<AuditMethod> {
        match s {
            "rank" => Ok(AuditMethod::Rank),
            "exhaustive" => Ok(AuditMethod::Exhaustive),
            "monte_carlo" | "mc" => Ok(AuditMethod::MonteCarlo),
            "rank+monte_carlo" => Ok(AuditMethod::RankMonteCarlo),
            other => Err(Error::InvalidParameters(format!(
                "unknown audit method {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub method: AuditMethod,
    pub recoverable: bool,
    /// One line per party that cannot recover the key.
    pub party_diagnostics: Vec<String>,
    pub secret: bool,
    pub uniform: bool,
    pub key_bits: usize,
    pub n: u32,
    pub rate: Rate,
    pub capacity: Option<Rate>,
    pub capacity_gap: Option<Rate>,
    /// Realizations visited by the exhaustive audit.
    pub realizations: Option<u64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    /// Monte Carlo deviations beyond the threshold.
    pub flags: Vec<String>,
}

impl AuditReport {
    fn new(method: AuditMethod, key: &KeySpec) -> AuditReport {
        AuditReport {
            method,
            recoverable: false,
            party_diagnostics: Vec::new(),
            secret: false,
            uniform: false,
            key_bits: key.len(),
            n: key.n(),
            rate: key.rate(),
            capacity: None,
            capacity_gap: None,
            realizations: None,
            samples: None,
            seed: None,
            flags: Vec::new(),
        }
    }

    pub fn verdicts(&self) -> (bool, bool, bool) {
        (self.recoverable, self.secret, self.uniform)
    }

    /// All three verdicts hold and the rate does not exceed a known capacity.
    pub fn passed(&self) -> bool {
        self.recoverable
            && self.secret
            && self.uniform
            && self.capacity_gap.is_none_or(|g| !g.is_negative())
    }

    pub fn set_capacity(&mut self, capacity: Rate) {
        self.capacity = Some(capacity);
        self.capacity_gap = Some(capacity - self.rate);
    }

    /// Conjunction of a rank audit and a Monte Carlo audit of the same pair.
    pub fn combine_rank_mc(rank: AuditReport, mc: AuditReport) -> AuditReport {
        let mut diagnostics = rank.party_diagnostics;
        diagnostics.extend(mc.party_diagnostics);
        diagnostics.dedup();
        AuditReport {
            method: AuditMethod::RankMonteCarlo,
            recoverable: rank.recoverable && mc.recoverable,
            party_diagnostics: diagnostics,
            secret: rank.secret && mc.secret,
            uniform: rank.uniform && mc.uniform,
            samples: mc.samples,
            seed: mc.seed,
            flags: mc.flags,
            ..rank
        }
    }
}

fn check_pair(scheme: &LinearScheme, key: &KeySpec) -> Result<()> {
    if scheme.hypergraph() != key.hypergraph() || scheme.n() != key.n() {
        return Err(Error::InvalidParameters(
            "scheme and key are defined over different sources".into(),
        ));
    }
    Ok(())
}

/// Exact verdicts from ranks.
pub fn rank_audit(scheme: &LinearScheme, key: &KeySpec) -> Result<AuditReport> {
    check_pair(scheme, key)?;
    let mut report = AuditReport::new(AuditMethod::Rank, key);
    report.secret = spans_intersect_trivially(key.rows(), &scheme.matrix())?;
    report.uniform = rank(key.rows()) == key.len();
    for i in scheme.hypergraph().vertices() {
        let know = party_knowledge(scheme, i)?;
        if let Some(k) = key.rows().rows().iter().position(|r| !know.contains(r)) {
            report
                .party_diagnostics
                .push(format!("party {i} cannot recover key bit {k}"));
        }
    }
    report.recoverable = report.party_diagnostics.is_empty();
    Ok(report)
}

/// Rows as words in enumeration order: coordinate `c` is bit `width-1-c`.
fn pack_rows(rows: &[BitVector], width: usize) -> Vec<u64> {
    rows.iter()
        .map(|r| r.ones().fold(0u64, |acc, c| acc | 1 << (width - 1 - c)))
        .collect()
}

fn apply(rows: &[u64], x: u64) -> u64 {
    rows.iter().fold(0u64, |acc, &r| {
        (acc << 1) | ((r & x).count_ones() as u64 & 1)
    })
}

#[derive(Default)]
struct Tally {
    joint: HashMap<(u64, u64), u64>,
    /// First realization witnessing that party `p` cannot decode.
    witness: Vec<Option<u64>>,
}

fn tally(lo: u64, hi: u64, key: &[u64], comm: &[u64], views: &[u64]) -> Tally {
    let mut t = Tally {
        joint: HashMap::new(),
        witness: vec![None; views.len()],
    };
    for x in lo..hi {
        let k = apply(key, x);
        let f = apply(comm, x);
        *t.joint.entry((k, f)).or_insert(0) += 1;
        // K, F and the views are linear in x, so K is a function of
        // (view, F) iff K vanishes wherever view and F both vanish.
        if f == 0 && k != 0 {
            for (p, &v) in views.iter().enumerate() {
                if x & v == 0 && t.witness[p].is_none() {
                    t.witness[p] = Some(x);
                }
            }
        }
    }
    t
}

/// Exact verdicts by walking all `2^(n·|E|)` realizations.
///
/// Uniformity: every one of the `2^key_bits` key values occurs equally
/// often. Secrecy: `joint(k, f)·total = count(k)·count(f)` for every pair.
/// Recoverability: no two realizations that agree on a party's view and
/// on `F` give different keys.
pub fn exhaustive_audit(scheme: &LinearScheme, key: &KeySpec, cap: usize) -> Result<AuditReport> {
    check_pair(scheme, key)?;
    let h = scheme.hypergraph();
    let n = scheme.n();
    let total = enumerate_all_with_cap(h, n, cap)?.total();
    let width = scheme.width();
    let key_w = pack_rows(key.rows().rows(), width);
    let comm_w = pack_rows(scheme.matrix().rows(), width);
    if key_w.len() > 64 || comm_w.len() > 64 {
        return Err(Error::CapExceeded {
            required: key_w.len().max(comm_w.len()),
            cap: 64,
            flag: "--max-enum-bits",
        });
    }
    let parties: Vec<Vertex> = h.vertices().collect();
    let views = parties
        .iter()
        .map(|&i| {
            let units: Vec<BitVector> = view_coordinates(h, n, i)?
                .into_iter()
                .map(|c| BitVector::unit(width, c))
                .collect();
            Ok(pack_rows(&units, width).into_iter().fold(0, |a, b| a | b))
        })
        .collect::<Result<Vec<u64>>>()?;

    let workers = if total <= SERIAL_LIMIT {
        1
    } else {
        thread::available_parallelism()
            .map_or(1, |p| p.get() as u64)
            .min(16)
    };
    let shards: Vec<Tally> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (lo, hi) = (total * w / workers, total * (w + 1) / workers);
                let (key_w, comm_w, views) = (&key_w, &comm_w, &views);
                s.spawn(move || tally(lo, hi, key_w, comm_w, views))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut joint: HashMap<(u64, u64), u64> = HashMap::new();
    let mut witness = vec![None; parties.len()];
    for shard in shards {
        for (kf, c) in shard.joint {
            *joint.entry(kf).or_insert(0) += c;
        }
        for (p, w) in shard.witness.into_iter().enumerate() {
            witness[p] = witness[p].or(w);
        }
    }

    let mut key_count: HashMap<u64, u64> = HashMap::new();
    let mut comm_count: HashMap<u64, u64> = HashMap::new();
    for (&(k, f), &c) in &joint {
        *key_count.entry(k).or_insert(0) += c;
        *comm_count.entry(f).or_insert(0) += c;
    }

    let mut report = AuditReport::new(AuditMethod::Exhaustive, key);
    report.realizations = Some(total);
    let kb = key_w.len() as u32;
    report.uniform = kb < 64
        && key_count.len() as u64 == 1u64 << kb
        && key_count
            .values()
            .all(|&c| c as u128 * (1u128 << kb) == total as u128);
    report.secret = joint.len() == key_count.len() * comm_count.len()
        && joint.iter().all(|(&(k, f), &c)| {
            c as u128 * total as u128 == key_count[&k] as u128 * comm_count[&f] as u128
        });
    for (p, w) in witness.into_iter().enumerate() {
        if let Some(x) = w {
            report.party_diagnostics.push(format!(
                "party {}: realizations {} and 0 agree on view and communication but not on the key",
                parties[p],
                BitVector::from_index(width, x)
            ));
        }
    }
    report.recoverable = report.party_diagnostics.is_empty();
    Ok(report)
}

/// Smallest `z` such that `T` two-sided tests at `z` have the same chance of
/// any false alarm as one test at `MC_SIGMA`; never below `MC_SIGMA`.
pub fn mc_threshold(tests: usize) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let single = 2.0 * (1.0 - normal.cdf(MC_SIGMA));
    let per_test = single / tests.max(1) as f64;
    normal.inverse_cdf(1.0 - per_test / 2.0).max(MC_SIGMA)
}

/// Statistical smoke test over `samples` realizations from `seed`.
///
/// Flags any single key bit, XOR of two key bits, or XOR of a key bit with
/// a communication bit whose count of ones strays from `samples / 2` by more
/// than the threshold in binomial standard deviations. Also checks that
/// each party's linear decoder reproduces the key on every sample.
pub fn monte_carlo_audit(
    scheme: &LinearScheme,
    key: &KeySpec,
    samples: u64,
    seed: u64,
) -> Result<AuditReport> {
    check_pair(scheme, key)?;
    if samples == 0 {
        return Err(Error::InvalidParameters("need at least one sample".into()));
    }
    let h = scheme.hypergraph();
    let n = scheme.n();
    let width = scheme.width();
    let comm_m = scheme.matrix();
    let kb = key.len();
    let r = comm_m.len();

    let mut report = AuditReport::new(AuditMethod::MonteCarlo, key);
    report.samples = Some(samples);
    report.seed = Some(seed);

    // Linear decoders: key row k = Σ scheme rows ⊕ Σ own coordinates.
    let mut decoders: Vec<(Vertex, Vec<usize>, Vec<BitVector>)> = Vec::new();
    for i in h.vertices() {
        let view = view_coordinates(h, n, i)?;
        let mut generators: Vec<BitVector> = comm_m.rows().to_vec();
        generators.extend(view.iter().map(|&c| BitVector::unit(width, c)));
        let mut coeffs = Vec::new();
        for (k, row) in key.rows().rows().iter().enumerate() {
            match crate::gf2::solve_combination(&generators, row) {
                Some(c) => coeffs.push(c),
                None => {
                    report
                        .party_diagnostics
                        .push(format!("party {i} has no linear decoder for key bit {k}"));
                    break;
                }
            }
        }
        if coeffs.len() == kb {
            decoders.push((i, view, coeffs));
        }
    }

    let mut ones_key = vec![0u64; kb];
    let mut ones_kk = vec![0u64; kb * kb];
    let mut ones_kf = vec![0u64; kb * r];
    let mut decode_failures: Vec<Option<Vertex>> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = sample_with(h, n, &mut rng);
        let k = mat_vec_mul(key.rows(), &x.bits)?;
        let f = mat_vec_mul(&comm_m, &x.bits)?;
        for a in 0..kb {
            let ka = k.get(a);
            ones_key[a] += ka as u64;
            for b in a + 1..kb {
                ones_kk[a * kb + b] += (ka ^ k.get(b)) as u64;
            }
            for c in 0..r {
                ones_kf[a * r + c] += (ka ^ f.get(c)) as u64;
            }
        }
        for (i, view, coeffs) in &decoders {
            let known = f.concat(&x.bits.select(view));
            let decoded =
                BitVector::from_bools(&coeffs.iter().map(|c| c.dot(&known)).collect::<Vec<_>>());
            if decoded != k && !decode_failures.contains(&Some(*i)) {
                decode_failures.push(Some(*i));
                report
                    .party_diagnostics
                    .push(format!("party {i} decoded a wrong key"));
            }
        }
    }

    let tests = kb + kb * kb.saturating_sub(1) / 2 + kb * r;
    let z = mc_threshold(tests);
    let sigma = (samples as f64).sqrt() / 2.0;
    let half = samples as f64 / 2.0;
    let mut check = |ones: u64, what: String, balance: &mut bool| {
        let dev = (ones as f64 - half).abs() / sigma;
        if dev > z {
            report
                .flags
                .push(format!("{what}: {dev:.2} sigma (threshold {z:.2})"));
            *balance = false;
        }
    };
    let mut uniform = true;
    let mut secret = true;
    for a in 0..kb {
        check(ones_key[a], format!("key bit {a} bias"), &mut uniform);
        for b in a + 1..kb {
            check(
                ones_kk[a * kb + b],
                format!("key bits {a},{b} agreement"),
                &mut uniform,
            );
        }
        for c in 0..r {
            check(
                ones_kf[a * r + c],
                format!("key bit {a} vs communication bit {c}"),
                &mut secret,
            );
        }
    }
    report.uniform = uniform;
    report.secret = secret;
    report.recoverable = report.party_diagnostics.is_empty();
    Ok(report)
}

/// `C_SK(h) - rate`; zero certifies the rate is capacity.
pub fn capacity_gap_report(h: &Hypergraph, rate: Rate) -> Result<Rate> {
    capacity_gap_report_with_cap(h, rate, crate::capacity::DEFAULT_PARTITION_CAP)
}

pub fn capacity_gap_report_with_cap(h: &Hypergraph, rate: Rate, cap: u32) -> Result<Rate> {
    Ok(csk_brute_force_with_cap(h, cap)?.0 - rate)
}

/// A `KeySpec` built from explicit rows, for audits of hand-made pairs.
pub fn key_from_rows(h: &Hypergraph, n: u32, rows: Vec<BitVector>) -> Result<KeySpec> {
    let width = n as usize * h.edge_count();
    KeySpec::new_unchecked(h.clone(), n, BitMatrix::from_rows(width, rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{complete_uniform, cycle_star};
    use crate::packing::hollow_kite;
    use crate::protocol::{
        canonical_cycle_order, cycle_scheme, extract_key, run_kmt_pipeline, star_key, star_scheme,
        SchemeRow,
    };
    use proptest::prelude::*;

    fn cycle_pair(m: u32) -> (LinearScheme, KeySpec) {
        let h = cycle_star(m).unwrap();
        let s = cycle_scheme(&h, m, &canonical_cycle_order(&h, m).unwrap()).unwrap();
        let k = extract_key(&s).unwrap();
        (s, k)
    }

    #[test]
    fn rank_audit_pipeline_and_controls() {
        let p = run_kmt_pipeline(4, 3).unwrap();
        let mut r = rank_audit(&p.scheme, &p.key).unwrap();
        assert_eq!(r.verdicts(), (true, true, true));
        r.set_capacity(crate::capacity::capacity_kmt(4, 3).unwrap());
        assert_eq!(r.capacity_gap, Some(Rate::ZERO));
        assert!(r.passed());

        let s = star_scheme(4, 3, 1, 2).unwrap();
        let h = s.hypergraph().clone();
        let leaky = key_from_rows(&h, 1, vec![s.rows()[0].mask.clone()]).unwrap();
        assert!(!rank_audit(&s, &leaky).unwrap().secret);
        let dup =
            key_from_rows(&h, 1, vec!["100".parse().unwrap(), "100".parse().unwrap()]).unwrap();
        assert!(!rank_audit(&s, &dup).unwrap().uniform);
        let k = star_key(4, 3, 1, 2).unwrap();
        let r = rank_audit(&s.without_row(0), &k).unwrap();
        assert!(!r.recoverable);
        assert!(r.secret && r.uniform);
    }

    #[test]
    fn exhaustive_star_part() {
        let s = star_scheme(4, 3, 1, 2).unwrap();
        let k = star_key(4, 3, 1, 2).unwrap();
        let r = exhaustive_audit(&s, &k, 24).unwrap();
        assert_eq!(r.realizations, Some(8));
        assert_eq!(r.verdicts(), (true, true, true));
        assert_eq!(r.verdicts(), rank_audit(&s, &k).unwrap().verdicts());
    }

    #[test]
    fn exhaustive_cycle_schemes() {
        for m in 4..=6 {
            let (s, k) = cycle_pair(m);
            let r = exhaustive_audit(&s, &k, 24).unwrap();
            assert_eq!(r.realizations, Some(1 << (m - 1)));
            assert_eq!(r.verdicts(), (true, true, true), "m={m}");
        }
    }

    #[test]
    fn exhaustive_detects_controls() {
        let (s, _) = cycle_pair(5);
        let h = s.hypergraph().clone();
        let leaky = key_from_rows(&h, 1, vec![s.rows()[0].mask.clone()]).unwrap();
        let r = exhaustive_audit(&s, &leaky, 24).unwrap();
        assert!(!r.secret);
        assert_eq!(r.verdicts(), rank_audit(&s, &leaky).unwrap().verdicts());
        let k = extract_key(&s).unwrap();
        let r = exhaustive_audit(&s.without_row(1), &k, 24).unwrap();
        assert!(!r.recoverable);
        assert!(!r.party_diagnostics.is_empty());
        let big = complete_uniform(6, 3).unwrap();
        let empty = LinearScheme::empty(big.clone(), 2).unwrap();
        let key = key_from_rows(&big, 2, vec![]).unwrap();
        assert!(matches!(
            exhaustive_audit(&empty, &key, 24),
            Err(Error::CapExceeded { required: 40, .. })
        ));
    }

    #[test]
    fn exhaustive_parallel_path_matches_rank() {
        // 16 coordinates, above the single-thread limit.
        let full = complete_uniform(6, 3).unwrap();
        let h = Hypergraph::new(6, full.edges()[..16].to_vec()).unwrap();
        let s = LinearScheme::empty(h.clone(), 1).unwrap();
        let key =
            key_from_rows(&h, 1, vec![BitVector::unit(16, 0), BitVector::unit(16, 15)]).unwrap();
        let r = exhaustive_audit(&s, &key, 24).unwrap();
        assert_eq!(r.realizations, Some(1 << 16));
        assert_eq!(r.verdicts(), rank_audit(&s, &key).unwrap().verdicts());
        assert!(!r.recoverable);
    }

    #[test]
    fn monte_carlo_smoke() {
        let p = run_kmt_pipeline(5, 3).unwrap();
        let r = monte_carlo_audit(&p.scheme, &p.key, 20_000, 7).unwrap();
        assert!(r.flags.is_empty(), "{:?}", r.flags);
        assert_eq!(r.verdicts(), (true, true, true));
        assert_eq!(r, monte_carlo_audit(&p.scheme, &p.key, 20_000, 7).unwrap());

        let s = star_scheme(4, 3, 1, 2).unwrap();
        let h = s.hypergraph().clone();
        let leaky = key_from_rows(&h, 1, vec![s.rows()[0].mask.clone()]).unwrap();
        let r = monte_carlo_audit(&s, &leaky, 2_000, 1).unwrap();
        assert!(!r.secret);
        assert!(!r.flags.is_empty());
        let dup =
            key_from_rows(&h, 1, vec!["100".parse().unwrap(), "100".parse().unwrap()]).unwrap();
        assert!(!monte_carlo_audit(&s, &dup, 2_000, 1).unwrap().uniform);
        assert!(monte_carlo_audit(&s, &dup, 0, 1).is_err());
    }

    #[test]
    fn threshold_grows_with_family_size() {
        assert_eq!(mc_threshold(1), MC_SIGMA);
        assert!(mc_threshold(1000) > 5.0);
        assert!(mc_threshold(1000) < 6.0);
    }

    #[test]
    fn capacity_gap_examples() {
        let h = complete_uniform(4, 3).unwrap();
        assert_eq!(
            capacity_gap_report(&h, Rate::new(8, 3)).unwrap(),
            Rate::ZERO
        );
        assert_eq!(
            capacity_gap_report(&h, Rate::integer(2)).unwrap(),
            Rate::new(2, 3)
        );
        let kite = hollow_kite(1).unwrap();
        assert_eq!(
            capacity_gap_report(&kite, Rate::integer(3)).unwrap(),
            Rate::ZERO
        );
    }

    #[test]
    fn removing_rows_never_helps_recovery() {
        let p = run_kmt_pipeline(4, 3).unwrap();
        for k in 0..p.scheme.len() {
            let fewer = p.scheme.without_row(k);
            assert!(!rank_audit(&fewer, &p.key).unwrap().recoverable);
        }
    }

    fn random_pair(
        m: u32,
        lists: Vec<Vec<u32>>,
        rows: Vec<(u32, u64)>,
        keys: Vec<u64>,
    ) -> (LinearScheme, KeySpec) {
        let refs: Vec<&[u32]> = lists.iter().map(|l| l.as_slice()).collect();
        let h = Hypergraph::from_lists(m, &refs).unwrap();
        let width = h.edge_count();
        let mut scheme_rows = Vec::new();
        for (sender, bits) in rows {
            let sender = sender % m + 1;
            let support =
                (0..width).filter(|&c| bits >> c & 1 == 1 && h.edges()[c].contains(sender));
            scheme_rows.push(SchemeRow {
                sender,
                mask: BitVector::from_support(width, support),
            });
        }
        let key_rows = keys
            .into_iter()
            .map(|bits| BitVector::from_support(width, (0..width).filter(|&c| bits >> c & 1 == 1)))
            .collect();
        (
            LinearScheme::new(h.clone(), 1, scheme_rows).unwrap(),
            key_from_rows(&h, 1, key_rows).unwrap(),
        )
    }

    fn arb_pair() -> impl Strategy<Value = (LinearScheme, KeySpec)> {
        (3u32..=5).prop_flat_map(|m| {
            let edge = proptest::sample::subsequence((1..=m).collect::<Vec<_>>(), 2..=m as usize);
            (
                Just(m),
                proptest::collection::vec(edge, 1..=8),
                proptest::collection::vec((0u32..m, any::<u64>()), 0..=5),
                proptest::collection::vec(any::<u64>(), 0..=4),
            )
                .prop_map(|(m, lists, rows, keys)| random_pair(m, lists, rows, keys))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn rank_and_exhaustive_agree((scheme, key) in arb_pair()) {
            let r = rank_audit(&scheme, &key).unwrap();
            let e = exhaustive_audit(&scheme, &key, 16).unwrap();
            prop_assert_eq!(r.verdicts(), e.verdicts());
        }

        #[test]
        fn adding_a_key_span_row_never_creates_secrecy((scheme, key) in arb_pair()) {
            prop_assume!(!key.is_empty());
            let before = rank_audit(&scheme, &key).unwrap();
            let mut extra = key.rows().rows()[0].clone();
            for r in key.rows().rows().iter().skip(1) {
                extra.xor_assign(r);
            }
            // The added row must be sendable: give it to a party that sees
            // its whole support, if any.
            let h = scheme.hypergraph();
            if let Some(sender) = h.vertices().find(|&v| extra.ones().all(|c| h.edges()[c].contains(v))) {
                let mut rows = scheme.rows().to_vec();
                rows.push(SchemeRow { sender, mask: extra.clone() });
                let more = LinearScheme::new(h.clone(), 1, rows).unwrap();
                let after = rank_audit(&more, &key).unwrap();
                prop_assert!(!(after.secret && !before.secret));
                if !extra.is_zero() {
                    prop_assert!(!after.secret);
                }
            }
        }
    }
}
