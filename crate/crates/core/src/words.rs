//! Alphabets with formal inverses and plain letter-sequence words: free and
//! cyclic reduction, inversion, parsing, and uniform samplers.
//!
//! A word is a `Vec<usize>` of letter indices into an [`Alphabet`]. Group
//! structure (vertex elements, stable letters) is layered on top by the
//! presentation modules; nothing here knows about it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

pub type LetterWord = Vec<usize>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("alphabet has no involution; operation needs formal inverses")]
    NotSymmetric,
    #[error("duplicate letter name {0:?}")]
    DuplicateLetter(String),
    #[error("letter name {0:?} is empty or contains whitespace")]
    BadLetterName(String),
    #[error("letter and its inverse share the name {0:?}")]
    SelfInverse(String),
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("sampling mode needs at least {need} letters, alphabet has {have}")]
    AlphabetTooSmall { need: usize, have: usize },
}

/// Finite alphabet, optionally closed under a fixed-point-free involution
/// (formal inverses). Letter order is the construction order; samplers and
/// parsers are deterministic given it.
#[derive(Debug, Clone)]
pub struct Alphabet {
    names: Vec<String>,
    inv: Option<Vec<usize>>,
    index: HashMap<String, usize>,
}

fn check_name(name: &str) -> Result<(), WordError> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace()) {
        return Err(WordError::BadLetterName(name.to_string()));
    }
    Ok(())
}

impl Alphabet {
    /// Alphabet without inverses.
    pub fn plain(names: &[&str]) -> Result<Alphabet, WordError> {
        let mut a = Alphabet {
            names: Vec::new(),
            inv: None,
            index: HashMap::new(),
        };
        for n in names {
            check_name(n)?;
            if a.index.contains_key(*n) {
                return Err(WordError::DuplicateLetter(n.to_string()));
            }
            a.index.insert(n.to_string(), a.names.len());
            a.names.push(n.to_string());
        }
        Ok(a)
    }

    /// Symmetric alphabet from (letter, inverse) name pairs. Both names of a
    /// pair become letters, adjacent in index order.
    pub fn symmetric(pairs: &[(String, String)]) -> Result<Alphabet, WordError> {
        let mut names = Vec::new();
        let mut inv = Vec::new();
        let mut index = HashMap::new();
        for (pos, neg) in pairs {
            check_name(pos)?;
            check_name(neg)?;
            if pos == neg {
                return Err(WordError::SelfInverse(pos.clone()));
            }
            for n in [pos, neg] {
                if index.contains_key(n) {
                    return Err(WordError::DuplicateLetter(n.clone()));
                }
            }
            let i = names.len();
            index.insert(pos.clone(), i);
            index.insert(neg.clone(), i + 1);
            names.push(pos.clone());
            names.push(neg.clone());
            inv.push(i + 1);
            inv.push(i);
        }
        Ok(Alphabet {
            names,
            inv: Some(inv),
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.inv.is_some()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn inverse(&self, i: usize) -> Result<usize, WordError> {
        match &self.inv {
            Some(inv) => Ok(inv[i]),
            None => Err(WordError::NotSymmetric),
        }
    }

    /// Whitespace-separated letter tokens; a trailing apostrophe is part of
    /// the letter name (the convention used for formal inverses).
    pub fn parse_word(&self, s: &str) -> Result<LetterWord, WordError> {
        s.split_whitespace()
            .map(|tok| {
                self.lookup(tok)
                    .ok_or_else(|| WordError::UnknownLetter(tok.to_string()))
            })
            .collect()
    }

    pub fn render(&self, w: &[usize]) -> String {
        w.iter()
            .map(|&i| self.name(i))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn free_reduce(a: &Alphabet, w: &[usize]) -> Result<LetterWord, WordError> {
    if !a.is_symmetric() {
        return Err(WordError::NotSymmetric);
    }
    let mut out: LetterWord = Vec::with_capacity(w.len());
    for &x in w {
        if out.last().is_some_and(|&y| a.inverse(y).unwrap() == x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    Ok(out)
}

/// Cyclically reduced core plus the stripped prefix:
/// `w = conjugator . core . conjugator^-1` in the free group.
pub fn cyclic_reduce(a: &Alphabet, w: &[usize]) -> Result<(LetterWord, LetterWord), WordError> {
    let mut core = free_reduce(a, w)?;
    let mut conj = Vec::new();
    while core.len() >= 2 && a.inverse(core[0])? == *core.last().unwrap() {
        conj.push(core[0]);
        core.pop();
        core.remove(0);
    }
    Ok((core, conj))
}

pub fn invert_word(a: &Alphabet, w: &[usize]) -> Result<LetterWord, WordError> {
    if !a.is_symmetric() {
        return Err(WordError::NotSymmetric);
    }
    w.iter().rev().map(|&x| a.inverse(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Uniform over all length-n words.
    All,
    /// Uniform over the d(d-1)^(n-1) freely reduced words.
    Reduced,
    /// Uniform over cyclically reduced words, by rejection from Reduced.
    CycReduced,
}

/// Deterministic per-task stream: every (seed, index) pair is an independent
/// generator, so parallel consumers stay reproducible in any schedule.
pub fn derive_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_word(
    a: &Alphabet,
    n: usize,
    mode: SampleMode,
    rng: &mut impl Rng,
) -> Result<LetterWord, WordError> {
    let d = a.len();
    if d == 0 {
        return Err(WordError::AlphabetTooSmall { need: 1, have: 0 });
    }
    match mode {
        SampleMode::All => Ok((0..n).map(|_| rng.gen_range(0..d)).collect()),
        SampleMode::Reduced => {
            if !a.is_symmetric() {
                return Err(WordError::NotSymmetric);
            }
            if d < 3 {
                return Err(WordError::AlphabetTooSmall { need: 3, have: d });
            }
            Ok(sample_reduced(a, n, rng))
        }
        SampleMode::CycReduced => {
            if !a.is_symmetric() {
                return Err(WordError::NotSymmetric);
            }
            if d < 3 {
                return Err(WordError::AlphabetTooSmall { need: 3, have: d });
            }
            // Rejection keeps the distribution exactly uniform; the accept
            // probability is at least (d-2)/(d-1) per attempt.
            loop {
                let w = sample_reduced(a, n, rng);
                if n < 2 || a.inverse(w[0]).unwrap() != *w.last().unwrap() {
                    return Ok(w);
                }
            }
        }
    }
}

fn sample_reduced(a: &Alphabet, n: usize, rng: &mut impl Rng) -> LetterWord {
    let d = a.len();
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        if i == 0 {
            w.push(rng.gen_range(0..d));
        } else {
            // One draw from d-1 slots, skipping the cancelling letter.
            let banned = a.inverse(w[i - 1]).unwrap();
            let k = rng.gen_range(0..d - 1);
            w.push(if k >= banned { k + 1 } else { k });
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn four() -> Alphabet {
        Alphabet::symmetric(&[
            ("a".into(), "a'".into()),
            ("b".into(), "b'".into()),
        ])
        .unwrap()
    }

    fn w(a: &Alphabet, s: &str) -> LetterWord {
        a.parse_word(s).unwrap()
    }

    #[test]
    fn free_reduce_cases() {
        let a = four();
        assert_eq!(free_reduce(&a, &w(&a, "a a' b")).unwrap(), w(&a, "b"));
        assert_eq!(free_reduce(&a, &[]).unwrap(), Vec::<usize>::new());
        assert_eq!(free_reduce(&a, &w(&a, "a b b' a'")).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn cyclic_reduce_cases() {
        let a = four();
        let (core, conj) = cyclic_reduce(&a, &w(&a, "a b a'")).unwrap();
        assert_eq!(core, w(&a, "b"));
        assert_eq!(conj, w(&a, "a"));
        let (core, conj) = cyclic_reduce(&a, &w(&a, "b")).unwrap();
        assert_eq!(core, w(&a, "b"));
        assert!(conj.is_empty());
        let (core, _) = cyclic_reduce(&a, &w(&a, "a a'")).unwrap();
        assert!(core.is_empty());
    }

    #[test]
    fn invert_cases() {
        let a = four();
        assert_eq!(invert_word(&a, &w(&a, "a b")).unwrap(), w(&a, "b' a'"));
        assert_eq!(invert_word(&a, &[]).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn parse_rejects_unknown() {
        let a = four();
        assert_eq!(
            a.parse_word("a c"),
            Err(WordError::UnknownLetter("c".into()))
        );
    }

    #[test]
    fn plain_alphabet_refuses_reduction() {
        let a = Alphabet::plain(&["x", "y"]).unwrap();
        assert_eq!(free_reduce(&a, &[0, 1]), Err(WordError::NotSymmetric));
        assert_eq!(
            sample_word(&a, 3, SampleMode::Reduced, &mut derive_rng(1, 0)),
            Err(WordError::NotSymmetric)
        );
    }

    #[test]
    fn reduced_sampler_support_is_exact() {
        // d(d-1)^(n-1) = 4 * 3^2 = 36 reduced words of length 3.
        let a = four();
        let mut rng = derive_rng(7, 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..20_000 {
            let w = sample_word(&a, 3, SampleMode::Reduced, &mut rng).unwrap();
            assert_eq!(free_reduce(&a, &w).unwrap(), w, "sampled word not reduced");
            seen.insert(w);
        }
        assert_eq!(seen.len(), 36);
    }

    #[test]
    fn cyc_reduced_sampler_support_is_exact() {
        // Length 2 over d = 4: all 12 reduced words survive the cyclic check.
        let a = four();
        let mut rng = derive_rng(11, 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..5_000 {
            let w = sample_word(&a, 2, SampleMode::CycReduced, &mut rng).unwrap();
            assert_ne!(a.inverse(w[0]).unwrap(), w[1]);
            seen.insert(w);
        }
        assert_eq!(seen.len(), 12);
    }

    #[test]
    fn sampler_uniformity_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let a = four();
        let mut rng = derive_rng(42, 0);
        let trials = 60_000usize;
        let mut counts: HashMap<LetterWord, usize> = HashMap::new();
        for _ in 0..trials {
            *counts
                .entry(sample_word(&a, 2, SampleMode::All, &mut rng).unwrap())
                .or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        let expect = trials as f64 / 16.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expect;
                d * d / expect
            })
            .sum();
        let dist = ChiSquared::new(15.0).unwrap();
        let p_value = 1.0 - dist.cdf(chi2);
        assert!(p_value > 0.001, "chi2 = {chi2}, p = {p_value}");
    }

    #[test]
    fn derived_streams_differ() {
        let mut r0 = derive_rng(5, 0);
        let mut r1 = derive_rng(5, 1);
        let x0: u64 = r0.gen();
        let x1: u64 = r1.gen();
        assert_ne!(x0, x1);
        let mut again = derive_rng(5, 0);
        let y0: u64 = again.gen();
        assert_eq!(x0, y0);
    }

    proptest::proptest! {
        #[test]
        fn free_reduce_idempotent_and_shorter(ws in proptest::collection::vec(0usize..4, 0..60)) {
            let a = four();
            let r = free_reduce(&a, &ws).unwrap();
            proptest::prop_assert!(r.len() <= ws.len());
            proptest::prop_assert_eq!((ws.len() - r.len()) % 2, 0);
            proptest::prop_assert_eq!(free_reduce(&a, &r).unwrap(), r.clone());
            for i in 1..r.len() {
                proptest::prop_assert_ne!(a.inverse(r[i - 1]).unwrap(), r[i]);
            }
        }

        #[test]
        fn word_times_inverse_dies(ws in proptest::collection::vec(0usize..4, 0..40)) {
            let a = four();
            let mut both = ws.clone();
            both.extend(invert_word(&a, &ws).unwrap());
            proptest::prop_assert!(free_reduce(&a, &both).unwrap().is_empty());
        }
    }
}
