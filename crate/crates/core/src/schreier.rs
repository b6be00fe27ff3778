//! Random walks on the Schreier graph of right cosets P\G, where P is one of
//! the vertex subgroups.
//!
//! Cosets are named canonically: for an HNN splitting modulo the base group
//! the name is just the normal form tail, and for an amalgam modulo H or K
//! it is the alternating residue sequence left over once the head is reduced
//! modulo the subgroup. The empty name is the origin coset P. Return
//! probabilities are measured two ways, by parallel Monte Carlo trials with
//! Wilson intervals and by exact dynamic programming over coset counts, and
//! `decay_fit` compares exponential against polynomial decay of p(n).

use crate::intlin::is_zero_vec;
use crate::normalform::{
    classify_element, to_syllables, AmalgamEntry, ElementClass, HnnEntry, NormalForm,
};
use crate::presentations::{Presentation, Splitting, VertexTag};
use crate::words::{derive_rng, sample_word, SampleMode, WordError};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Default ceiling on distinct coset states held by the exact walk. States
/// carry whole normal-form tails, a few hundred bytes each, so this bounds
/// resident memory near a gigabyte.
pub const DEFAULT_MEMORY_CAP: usize = 1_000_000;

/// Canonical name of a right coset P\G.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CosetId {
    Hnn(Vec<HnnEntry>),
    Amalgam(Vec<AmalgamEntry>),
}

impl CosetId {
    pub fn origin(p: &Presentation) -> CosetId {
        match &p.splitting {
            Splitting::Hnn(_) => CosetId::Hnn(Vec::new()),
            Splitting::Amalgam(_) => CosetId::Amalgam(Vec::new()),
        }
    }

    pub fn is_origin(&self) -> bool {
        match self {
            CosetId::Hnn(t) => t.is_empty(),
            CosetId::Amalgam(t) => t.is_empty(),
        }
    }

    /// A representative of the coset, as a normal form.
    fn representative(&self, p: &Presentation) -> NormalForm {
        match self {
            CosetId::Hnn(tail) => {
                let h = p.hnn();
                NormalForm::Hnn(crate::normalform::HnnNf {
                    head: vec![num_bigint::BigInt::from(0); h.base_rank],
                    tail: tail.clone(),
                })
            }
            CosetId::Amalgam(entries) => match entries.split_first() {
                None => NormalForm::identity(p),
                Some((first, rest)) => NormalForm::Amalgam(crate::normalform::AmalgamNf {
                    head_tag: first.tag,
                    head: first.coset.clone(),
                    tail: rest.to_vec(),
                }),
            },
        }
    }
}

/// Name of the coset `P . g` for the subgroup tagged `sub`.
pub fn coset_id(p: &Presentation, sub: VertexTag, nf: &NormalForm) -> CosetId {
    assert!(p.has_vertex(sub), "splitting has no vertex subgroup {sub}");
    match nf {
        NormalForm::Hnn(h) => CosetId::Hnn(h.tail.clone()),
        NormalForm::Amalgam(a) => {
            if a.head_tag == sub {
                return CosetId::Amalgam(a.tail.clone());
            }
            // The head sits in the other vertex group; only its residue
            // modulo the edge lattice survives left multiplication by `sub`.
            let lat = p.amalgam().lat(a.head_tag);
            let rep = lat.canonical_rep(&a.head);
            if is_zero_vec(&rep) {
                debug_assert!(a.tail.is_empty(), "lattice head with a tail");
                return CosetId::Amalgam(Vec::new());
            }
            let mut entries = Vec::with_capacity(a.tail.len() + 1);
            entries.push(AmalgamEntry {
                tag: a.head_tag,
                coset: rep,
            });
            entries.extend(a.tail.iter().cloned());
            CosetId::Amalgam(entries)
        }
    }
}

/// The coset reached from `id` by one generator letter on the right.
pub fn coset_step(p: &Presentation, sub: VertexTag, id: &CosetId, letter: usize) -> CosetId {
    let mut nf = id.representative(p);
    nf.append_letter(p, letter);
    coset_id(p, sub, &nf)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkMode {
    Plain,
    NoBacktrack,
}

impl std::fmt::Display for WalkMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WalkMode::Plain => write!(f, "plain"),
            WalkMode::NoBacktrack => write!(f, "no_backtrack"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct McRow {
    pub n: usize,
    pub hits: u64,
    pub trials: u64,
    pub p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// 95% Wilson score interval for `hits` successes in `trials`.
pub fn wilson_ci(hits: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = hits as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = (Z / denom) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    // In exact arithmetic the interval contains the point estimate; the min
    // and max keep that true against rounding at phat = 0 and 1.
    (
        (center - half).max(0.0).min(phat),
        (center + half).min(1.0).max(phat),
    )
}

/// Monte Carlo return probabilities for steps 0..=n_max. Trials run in
/// parallel with one derived RNG stream per trial, so results depend only on
/// the seed, not the thread schedule.
pub fn walk_mc(
    p: &Presentation,
    sub: VertexTag,
    n_max: usize,
    trials: u64,
    seed: u64,
    mode: WalkMode,
) -> Vec<McRow> {
    assert!(p.has_vertex(sub), "splitting has no vertex subgroup {sub}");
    let alphabet = p.alphabet();
    let d = alphabet.len();
    assert!(d >= 2, "walk needs at least two letters");
    let hits = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; n_max + 1],
            |mut acc, trial| {
                let mut rng = derive_rng(seed, trial);
                let mut id = CosetId::origin(p);
                let mut prev: Option<usize> = None;
                acc[0] += 1;
                for step in 1..=n_max {
                    let letter = match (mode, prev) {
                        (WalkMode::Plain, _) | (WalkMode::NoBacktrack, None) => {
                            rng.gen_range(0..d)
                        }
                        (WalkMode::NoBacktrack, Some(last)) => {
                            let banned = alphabet.inverse(last).expect("symmetric alphabet");
                            let k = rng.gen_range(0..d - 1);
                            if k >= banned {
                                k + 1
                            } else {
                                k
                            }
                        }
                    };
                    id = coset_step(p, sub, &id, letter);
                    prev = Some(letter);
                    if id.is_origin() {
                        acc[step] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n_max + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    hits.into_iter()
        .enumerate()
        .map(|(n, h)| {
            let (ci_lo, ci_hi) = wilson_ci(h, trials);
            McRow {
                n,
                hits: h,
                trials,
                p: h as f64 / trials as f64,
                ci_lo,
                ci_hi,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ExactRow {
    pub n: usize,
    pub p: f64,
    /// Reduced fraction `returns / d^n`.
    pub rational: String,
}

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("{states} walk states exceeded the memory cap at step {step}")]
    MemoryCap { step: usize, states: usize },
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let shifted = (num << 80u32) / den;
    shifted.to_f64().unwrap_or(f64::NAN) / 2f64.powi(80)
}

fn ratio_string(num: &BigUint, den: &BigUint) -> String {
    let g = num.gcd(den);
    let (n, d) = (num / &g, den / &g);
    if d == BigUint::from(1u32) {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

/// Exact return probabilities by path counting over cosets, plain mode.
/// Fails once the live coset front outgrows `memory_cap`.
pub fn walk_exact(
    p: &Presentation,
    sub: VertexTag,
    n_max: usize,
    memory_cap: usize,
) -> Result<Vec<ExactRow>, WalkError> {
    assert!(p.has_vertex(sub), "splitting has no vertex subgroup {sub}");
    let d = p.alphabet().len();
    let mut counts: std::collections::HashMap<CosetId, BigUint> = std::collections::HashMap::new();
    counts.insert(CosetId::origin(p), BigUint::from(1u32));
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut denom = BigUint::from(1u32);
    for n in 0..=n_max {
        let at_origin = counts
            .iter()
            .find(|(id, _)| id.is_origin())
            .map(|(_, c)| c.clone())
            .unwrap_or_default();
        rows.push(ExactRow {
            n,
            p: ratio_to_f64(&at_origin, &denom),
            rational: ratio_string(&at_origin, &denom),
        });
        if n == n_max {
            break;
        }
        let mut next: std::collections::HashMap<CosetId, BigUint> =
            std::collections::HashMap::with_capacity(counts.len() * 2);
        for (id, c) in &counts {
            for letter in 0..d {
                let nid = coset_step(p, sub, id, letter);
                *next.entry(nid).or_default() += c;
            }
            if next.len() > memory_cap {
                return Err(WalkError::MemoryCap {
                    step: n + 1,
                    states: next.len(),
                });
            }
        }
        counts = next;
        denom *= BigUint::from(d as u32);
        debug_assert_eq!(
            counts.values().sum::<BigUint>(),
            denom,
            "path counts must sum to d^n"
        );
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenericityDomain {
    /// All words of the given length, sampled letterwise.
    AllWords,
    /// Uniform cyclically reduced words.
    CyclicallyReduced,
}

#[derive(Clone, Debug)]
pub struct GenRow {
    pub n: usize,
    pub samples: u64,
    pub elliptic: u64,
    pub fraction: f64,
}

/// Fraction of elliptic elements among random words of each length.
pub fn genericity_experiment(
    p: &Presentation,
    lengths: &[usize],
    samples: u64,
    seed: u64,
    domain: GenericityDomain,
) -> Result<Vec<GenRow>, WordError> {
    let mode = match domain {
        GenericityDomain::AllWords => SampleMode::All,
        GenericityDomain::CyclicallyReduced => SampleMode::CycReduced,
    };
    let alphabet = p.alphabet();
    // Surface sampling errors (alphabet too small, not symmetric) up front.
    sample_word(alphabet, 1, mode, &mut derive_rng(seed, u64::MAX))?;
    let mut rows = Vec::with_capacity(lengths.len());
    for (n_idx, &n) in lengths.iter().enumerate() {
        let elliptic = (0..samples)
            .into_par_iter()
            .filter(|&i| {
                let mut rng = derive_rng(seed, n_idx as u64 * samples + i);
                let w = sample_word(alphabet, n, mode, &mut rng).expect("checked above");
                matches!(
                    classify_element(p, &to_syllables(p, &w)),
                    ElementClass::Elliptic { .. }
                )
            })
            .count() as u64;
        rows.push(GenRow {
            n,
            samples,
            elliptic,
            fraction: elliptic as f64 / samples as f64,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct DecayFit {
    /// Slope of log2 p against n: doubling rate per step.
    pub exp_rate: f64,
    pub exp_r2: f64,
    /// Slope of log2 p against log2 n: the polynomial exponent.
    pub poly_exponent: f64,
    pub poly_r2: f64,
    pub points: usize,
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least 5 positive probabilities at n >= 1, have {have}")]
    TooFewPoints { have: usize },
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (my + slope * (x - mx));
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, r2)
}

/// Compare exponential and polynomial decay models on positive entries.
pub fn decay_fit(rows: &[(usize, f64)]) -> Result<DecayFit, FitError> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(n, p)| *n >= 1 && *p > 0.0)
        .map(|(n, p)| (*n as f64, p.log2()))
        .collect();
    if pts.len() < 5 {
        return Err(FitError::TooFewPoints { have: pts.len() });
    }
    let ns: Vec<f64> = pts.iter().map(|(n, _)| *n).collect();
    let logps: Vec<f64> = pts.iter().map(|(_, lp)| *lp).collect();
    let logns: Vec<f64> = ns.iter().map(|n| n.log2()).collect();
    let (exp_rate, exp_r2) = ols(&ns, &logps);
    let (poly_exponent, poly_r2) = ols(&logns, &logps);
    Ok(DecayFit {
        exp_rate,
        exp_r2,
        poly_exponent,
        poly_r2,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalform::normal_form_word;
    use crate::presentations::fixtures::{amalgam, bs};
    use proptest::prelude::*;

    #[test]
    fn amalgam_ray_exact_return() {
        let p = amalgam(2, 2);
        let rows = walk_exact(&p, VertexTag::H, 4, DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(rows[0].rational, "1");
        assert_eq!(rows[2].rational, "1/2");
        assert_eq!(rows[2].p, 0.5);
        // h and h' fix the origin coset, so odd steps return too.
        assert_eq!(rows[1].rational, "1/2");
    }

    #[test]
    fn bs23_exact_small_values() {
        let p = bs(2, 3);
        let rows = walk_exact(&p, VertexTag::H, 2, DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(rows[1].rational, "1/2");
        assert_eq!(rows[2].rational, "3/8");
    }

    #[test]
    fn memory_cap_reports_step() {
        let p = bs(2, 3);
        match walk_exact(&p, VertexTag::H, 10, 2) {
            Err(WalkError::MemoryCap { step, states }) => {
                assert!(step >= 1 && states > 2);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn mc_matches_exact_with_fixed_seed() {
        let p = bs(2, 3);
        let exact = walk_exact(&p, VertexTag::H, 6, DEFAULT_MEMORY_CAP).unwrap();
        let mc = walk_mc(&p, VertexTag::H, 6, 20_000, 7, WalkMode::Plain);
        for (e, m) in exact.iter().zip(&mc) {
            assert!(
                (e.p - m.p).abs() < 0.02,
                "n={}: exact {} vs mc {}",
                e.n,
                e.p,
                m.p
            );
            assert!(m.ci_lo <= m.p && m.p <= m.ci_hi);
        }
        // Same seed, same rows.
        let again = walk_mc(&p, VertexTag::H, 6, 20_000, 7, WalkMode::Plain);
        assert_eq!(mc.len(), again.len());
        for (a, b) in mc.iter().zip(&again) {
            assert_eq!(a.hits, b.hits);
        }
    }

    #[test]
    fn no_backtrack_walk_runs() {
        let p = amalgam(2, 2);
        let rows = walk_mc(&p, VertexTag::K, 5, 2_000, 11, WalkMode::NoBacktrack);
        assert_eq!(rows[0].p, 1.0);
        assert!(rows.iter().all(|r| r.ci_lo <= r.p && r.p <= r.ci_hi));
    }

    #[test]
    fn genericity_counts_elliptics() {
        let p = bs(2, 3);
        let rows = genericity_experiment(
            &p,
            &[1, 2],
            400,
            5,
            GenericityDomain::AllWords,
        )
        .unwrap();
        // Length-1 words: a, a' elliptic; t, t' hyperbolic.
        assert!((rows[0].fraction - 0.5).abs() < 0.08);
        assert_eq!(rows[0].samples, 400);
    }

    #[test]
    fn decay_fit_recovers_synthetic_laws() {
        let exp_rows: Vec<(usize, f64)> = (1..=12).map(|n| (n, 0.5f64.powi(n as i32))).collect();
        let fit = decay_fit(&exp_rows).unwrap();
        assert!((fit.exp_rate + 1.0).abs() < 1e-9);
        assert!(fit.exp_r2 > 0.999);

        let poly_rows: Vec<(usize, f64)> =
            (1..=12).map(|n| (n, (n as f64).powf(-0.5))).collect();
        let fit = decay_fit(&poly_rows).unwrap();
        assert!((fit.poly_exponent + 0.5).abs() < 1e-9);
        assert!(fit.poly_r2 > 0.999);

        assert!(matches!(
            decay_fit(&[(1, 0.5), (2, 0.25)]),
            Err(FitError::TooFewPoints { have: 2 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // Stepping the coset name matches renaming the stepped word.
        #[test]
        fn coset_step_consistent(ws in proptest::collection::vec(0usize..4, 0..12), letter in 0usize..4, hnn in proptest::bool::ANY, sub_k in proptest::bool::ANY) {
            let p = if hnn { bs(2, 3) } else { amalgam(2, 3) };
            let sub = if !hnn && sub_k { VertexTag::K } else { VertexTag::H };
            let id = coset_id(&p, sub, &normal_form_word(&p, &ws));
            let mut extended = ws.clone();
            extended.push(letter);
            let direct = coset_id(&p, sub, &normal_form_word(&p, &extended));
            prop_assert_eq!(coset_step(&p, sub, &id, letter), direct);
        }

        // Left multiplication by a subgroup generator fixes every right
        // coset name.
        #[test]
        fn coset_names_ignore_subgroup_factors(ws in proptest::collection::vec(0usize..4, 0..12), hnn in proptest::bool::ANY, neg in proptest::bool::ANY) {
            let p = if hnn { bs(2, 3) } else { amalgam(2, 3) };
            // Letter 0 is the rank-one vertex generator of H in both
            // fixtures; letter 1 is its inverse.
            let h_letter = if neg { 1 } else { 0 };
            let mut shifted = vec![h_letter];
            shifted.extend_from_slice(&ws);
            let a = coset_id(&p, VertexTag::H, &normal_form_word(&p, &ws));
            let b = coset_id(&p, VertexTag::H, &normal_form_word(&p, &shifted));
            prop_assert_eq!(a, b);
        }
    }
}
