//! Three-valued conjugacy solver.
//!
//! `Yes` always carries a witness `z` with `z u z^-1 = v`, checked against the
//! normal form machinery before it is returned. `No` is only produced when a
//! complete invariant rules conjugacy out (element class, cyclic core
//! alignment, exhausted or periodic crossing chains, an abelianization
//! obstruction). Anything bounded-search-shaped that runs out of budget comes
//! back `Refused` with the reason, never a guess.
//!
//! Hyperbolic words are compared through their cyclic cores: `u ~ v` iff some
//! rotation of `u`'s core can be threaded onto `v`'s core by an edge-lattice
//! element. For an HNN splitting the threading is an integer linear system,
//! one block per stable letter. For an amalgam the edge lattice is central,
//! so threading degenerates to equality of rotated cores.
//!
//! Elliptic words reduce to vertex elements. Vertex groups here are abelian,
//! so vertex-level conjugation is trivial and the class of a vertex element
//! is its orbit under crossing moves: none for an amalgam, the partial maps
//! `x in im(m_plus) -> m_minus . x` and its inverse for a single stable
//! letter. These orbits are searched with certificates (periodicity,
//! exhaustion, scalar growth); multi-edge orbits interleave and are only
//! screened by the abelianization invariant.

use crate::intlin::{is_zero_vec, solve, vsub, LatticeIndex, Mat};
use crate::normalform::{
    classify_element, cyclic_britton_reduce, invert_syllables, normal_form, word_problem,
    ElementClass, NormalForm, Syllable,
};
use crate::presentations::{expand_letter, Presentation, Splitting, StableEdge, VertexTag};
use num_bigint::BigInt;
use num_traits::One;
use std::collections::HashSet;

#[derive(Debug, Clone)]
pub enum Verdict {
    /// `witness . u . witness^-1 = v`, verified before returning.
    Yes { witness: Vec<Syllable> },
    No { reason: String },
    Refused { reason: String },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes { .. })
    }
}

#[derive(Debug, Clone)]
pub struct ConjugacyOptions {
    /// Step budget for each crossing-orbit search.
    pub orbit_bound: u64,
}

impl Default for ConjugacyOptions {
    fn default() -> Self {
        ConjugacyOptions { orbit_bound: 10_000 }
    }
}

pub fn conjugate(p: &Presentation, u: &[Syllable], v: &[Syllable], opts: &ConjugacyOptions) -> Verdict {
    let cu = classify_element(p, u);
    let cv = classify_element(p, v);
    match (cu, cv) {
        (ElementClass::Elliptic { .. }, ElementClass::Hyperbolic { .. })
        | (ElementClass::Hyperbolic { .. }, ElementClass::Elliptic { .. }) => Verdict::No {
            reason: "one element is elliptic and the other hyperbolic".into(),
        },
        (ElementClass::Elliptic { .. }, ElementClass::Elliptic { .. }) => {
            conjugate_elliptic(p, u, v, opts)
        }
        (ElementClass::Hyperbolic { .. }, ElementClass::Hyperbolic { .. }) => {
            conjugate_hyperbolic(p, u, v)
        }
    }
}

fn checked_yes(p: &Presentation, u: &[Syllable], v: &[Syllable], witness: Vec<Syllable>) -> Verdict {
    let mut w = witness.clone();
    w.extend(u.iter().cloned());
    w.extend(invert_syllables(&witness));
    w.extend(invert_syllables(v));
    assert!(
        word_problem(p, &w),
        "conjugacy witness failed verification"
    );
    Verdict::Yes { witness }
}

fn assemble_witness(conj_v: &[Syllable], z0: Vec<Syllable>, conj_u: &[Syllable]) -> Vec<Syllable> {
    let mut z = conj_v.to_vec();
    z.extend(z0);
    z.extend(invert_syllables(conj_u));
    z
}

/// Both words conjugate into the vertex groups.
pub fn conjugate_elliptic(
    p: &Presentation,
    u: &[Syllable],
    v: &[Syllable],
    opts: &ConjugacyOptions,
) -> Verdict {
    let (core_u, conj_u) = cyclic_britton_reduce(p, u);
    let (core_v, conj_v) = cyclic_britton_reduce(p, v);
    match &p.splitting {
        Splitting::Amalgam(_) => {
            // Vertex groups are abelian and the edge lattice is central, so
            // the conjugacy class of a vertex element is just itself.
            if normal_form(p, &core_u) == normal_form(p, &core_v) {
                checked_yes(p, u, v, assemble_witness(&conj_v, vec![], &conj_u))
            } else {
                Verdict::No {
                    reason: "distinct vertex elements are never conjugate in an amalgam of abelian groups".into(),
                }
            }
        }
        Splitting::Hnn(h) => {
            let g = elliptic_value(&core_u, h.base_rank);
            let w = elliptic_value(&core_v, h.base_rank);
            if g == w {
                return checked_yes(p, u, v, assemble_witness(&conj_v, vec![], &conj_u));
            }
            if h.edges.len() > 1 {
                return multi_edge_elliptic(p, h.base_rank, &g, &w);
            }
            let e = &h.edges[0];
            let z0 = match single_edge_orbit(e, &g, &w, opts.orbit_bound) {
                OrbitVerdict::Related(z0) => z0,
                OrbitVerdict::Unrelated(reason) => return Verdict::No { reason },
                OrbitVerdict::OutOfBudget(reason) => return Verdict::Refused { reason },
            };
            checked_yes(p, u, v, assemble_witness(&conj_v, z0, &conj_u))
        }
    }
}

fn elliptic_value(core: &[Syllable], base_rank: usize) -> Vec<BigInt> {
    match core {
        [] => vec![BigInt::from(0); base_rank],
        [Syllable::Base { vec, .. }] => vec.clone(),
        other => panic!("elliptic core is not a vertex element: {other:?}"),
    }
}

enum OrbitVerdict {
    Related(Vec<Syllable>),
    Unrelated(String),
    OutOfBudget(String),
}

fn stables(edge: usize, exp: i32, count: u64) -> Vec<Syllable> {
    (0..count).map(|_| Syllable::stable(edge, exp)).collect()
}

/// Decide whether `w` lies in the crossing orbit of `g` for one stable
/// letter, with a conjugator exponent when it does.
fn single_edge_orbit(e: &StableEdge, g: &[BigInt], w: &[BigInt], bound: u64) -> OrbitVerdict {
    // An index-one side makes one crossing direction total, hence linear.
    if let Some(n) = crossing_matrix(e, 1) {
        // n.x = t x t^-1 for every x, so n^i g = w gives z0 = t^i.
        return match (orbit_search(&n, g, w, bound), orbit_search(&n, w, g, bound)) {
            (OrbitOutcome::Found(i), _) => OrbitVerdict::Related(stables(0, 1, i)),
            (_, OrbitOutcome::Found(i)) => OrbitVerdict::Related(stables(0, -1, i)),
            (OrbitOutcome::NotInOrbit, OrbitOutcome::NotInOrbit) => {
                OrbitVerdict::Unrelated("not on the crossing orbit of the other element".into())
            }
            _ => OrbitVerdict::OutOfBudget(format!(
                "crossing orbit not settled within {bound} steps"
            )),
        };
    }
    if let Some(n) = crossing_matrix(e, -1) {
        // Here n.x = t^-1 x t, so n^i g = w gives z0 = t^-i.
        return match (orbit_search(&n, g, w, bound), orbit_search(&n, w, g, bound)) {
            (OrbitOutcome::Found(i), _) => OrbitVerdict::Related(stables(0, -1, i)),
            (_, OrbitOutcome::Found(i)) => OrbitVerdict::Related(stables(0, 1, i)),
            (OrbitOutcome::NotInOrbit, OrbitOutcome::NotInOrbit) => {
                OrbitVerdict::Unrelated("not on the crossing orbit of the other element".into())
            }
            _ => OrbitVerdict::OutOfBudget(format!(
                "crossing orbit not settled within {bound} steps"
            )),
        };
    }
    // Both edge images are proper: crossings are partial injections and the
    // orbit is a chain, walked forward then backward from g.
    let mut x = g.to_vec();
    let mut steps = 0u64;
    loop {
        let Some(y) = e.lat_plus.decompose(&x) else {
            break;
        };
        x = e.m_minus.mul_vec(&y);
        steps += 1;
        if x == w {
            return OrbitVerdict::Related(stables(0, 1, steps));
        }
        if x == g {
            // Forward chain is a cycle through g: the whole orbit was seen.
            return OrbitVerdict::Unrelated("crossing chain is periodic and misses the other element".into());
        }
        if steps >= bound {
            return OrbitVerdict::OutOfBudget(format!(
                "forward crossing chain exceeded {bound} steps"
            ));
        }
    }
    let mut x = g.to_vec();
    let mut steps = 0u64;
    loop {
        let Some(y) = e.lat_minus.decompose(&x) else {
            // Both chain ends reached without meeting w.
            return OrbitVerdict::Unrelated("both crossing chains are exhausted and finite".into());
        };
        x = e.m_plus.mul_vec(&y);
        steps += 1;
        if x == w {
            return OrbitVerdict::Related(stables(0, -1, steps));
        }
        if steps >= bound {
            return OrbitVerdict::OutOfBudget(format!(
                "backward crossing chain exceeded {bound} steps"
            ));
        }
    }
}

/// The linear crossing map in direction `exp` when it is total, i.e. when the
/// source edge image is all of the base group.
fn crossing_matrix(e: &StableEdge, exp: i32) -> Option<Mat> {
    let lat = e.lat(exp);
    if lat.index() != LatticeIndex::Finite(BigInt::one()) {
        return None;
    }
    let n = e.m_plus.rows;
    let mut m = Mat::zero(n, n);
    for j in 0..n {
        let mut unit = vec![BigInt::from(0); n];
        unit[j] = BigInt::one();
        let y = lat.decompose(&unit).expect("index one lattice is everything");
        let col = e.mat(-exp).mul_vec(&y);
        for i in 0..n {
            *m.at_mut(i, j) = col[i].clone();
        }
    }
    Some(m)
}

fn multi_edge_elliptic(p: &Presentation, base_rank: usize, g: &[BigInt], w: &[BigInt]) -> Verdict {
    let h = p.hnn();
    let cols: usize = h.edges.iter().map(|e| e.m_plus.cols).sum();
    let mut d = Mat::zero(base_rank, cols);
    let mut c0 = 0;
    for e in &h.edges {
        for j in 0..e.m_plus.cols {
            for i in 0..base_rank {
                *d.at_mut(i, c0 + j) = e.m_plus.at(i, j) - e.m_minus.at(i, j);
            }
        }
        c0 += e.m_plus.cols;
    }
    if solve(&d, &vsub(g, w)).is_none() {
        Verdict::No {
            reason: "the difference survives in the abelianization".into(),
        }
    } else {
        Verdict::Refused {
            reason: "several stable letters interleave their crossing chains; only the abelianization was checked".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitOutcome {
    /// `n^i . start = target`.
    Found(u64),
    NotInOrbit,
    Inconclusive,
}

/// Search the forward orbit of `start` under `n` for `target`.
///
/// Periodicity certifies a miss. For a 1x1 matrix with |n| >= 2, leaving the
/// ball |x| > |target| from a nonzero state also certifies it, because the
/// absolute value then grows strictly. Otherwise the bound ends the search
/// inconclusively.
pub fn orbit_search(n: &Mat, start: &[BigInt], target: &[BigInt], bound: u64) -> OrbitOutcome {
    let two = num_bigint::BigUint::from(2u32);
    let scalar_growth = n.rows == 1 && n.at(0, 0).magnitude() >= &two;
    let mut seen: HashSet<Vec<BigInt>> = HashSet::new();
    let mut x = start.to_vec();
    for i in 0..=bound {
        if x == target {
            return OrbitOutcome::Found(i);
        }
        if scalar_growth && !is_zero_vec(&x) && x[0].magnitude() > target[0].magnitude() {
            return OrbitOutcome::NotInOrbit;
        }
        if !seen.insert(x.clone()) {
            return OrbitOutcome::NotInOrbit;
        }
        x = n.mul_vec(&x);
    }
    OrbitOutcome::Inconclusive
}

/// Cyclic core of an HNN word, as (edge, exponent, following residue) blocks.
fn hnn_blocks(core: &[Syllable], base_rank: usize) -> Vec<(usize, i32, Vec<BigInt>)> {
    let mut blocks: Vec<(usize, i32, Vec<BigInt>)> = Vec::new();
    for syl in core {
        match syl {
            Syllable::Stable { edge, exp } => {
                blocks.push((*edge, *exp, vec![BigInt::from(0); base_rank]))
            }
            Syllable::Base { vec, .. } => {
                let last = blocks
                    .last_mut()
                    .expect("cyclic core starts with a stable letter");
                last.2 = vec.clone();
            }
        }
    }
    blocks
}

fn blocks_to_syllables(blocks: &[(usize, i32, Vec<BigInt>)]) -> Vec<Syllable> {
    let mut out = Vec::new();
    for (edge, exp, res) in blocks {
        out.push(Syllable::stable(*edge, *exp));
        if !is_zero_vec(res) {
            out.push(Syllable::base(VertexTag::H, res.clone()));
        }
    }
    out
}

/// Both words have stable letters (HNN) or length-two-plus cores (amalgam) in
/// their cyclic reduction.
pub fn conjugate_hyperbolic(p: &Presentation, u: &[Syllable], v: &[Syllable]) -> Verdict {
    let (core_u, conj_u) = cyclic_britton_reduce(p, u);
    let (core_v, conj_v) = cyclic_britton_reduce(p, v);
    match &p.splitting {
        Splitting::Hnn(h) => {
            let bu = hnn_blocks(&core_u, h.base_rank);
            let bv = hnn_blocks(&core_v, h.base_rank);
            let k = bu.len();
            if k != bv.len() {
                return Verdict::No {
                    reason: "cyclic cores use different numbers of stable letters".into(),
                };
            }
            for r in 0..k {
                let aligned = (0..k).all(|i| {
                    let (eu, xu, _) = &bu[(r + i) % k];
                    let (ev, xv, _) = &bv[i];
                    eu == ev && xu == xv
                });
                if !aligned {
                    continue;
                }
                if let Some(a) = thread_rotation(h, &bu, &bv, r) {
                    let mut z0 = vec![Syllable::base(VertexTag::H, a)];
                    z0.extend(invert_syllables(&blocks_to_syllables(&bu[..r])));
                    return checked_yes(p, u, v, assemble_witness(&conj_v, z0, &conj_u));
                }
            }
            Verdict::No {
                reason: "no rotation of the cyclic core admits an integral edge threading".into(),
            }
        }
        Splitting::Amalgam(_) => {
            let k = core_u.len();
            if k != core_v.len() {
                return Verdict::No {
                    reason: "cyclic cores have different lengths".into(),
                };
            }
            let tag_of = |s: &Syllable| match s {
                Syllable::Base { tag, .. } => *tag,
                Syllable::Stable { .. } => unreachable!("amalgam core has no stable letters"),
            };
            let nf_v = normal_form(p, &core_v);
            for r in 0..k {
                if tag_of(&core_u[r]) != tag_of(&core_v[0]) {
                    continue;
                }
                let mut rotated = core_u[r..].to_vec();
                rotated.extend(core_u[..r].iter().cloned());
                // The edge lattice is central, so rotated cores are conjugate
                // exactly when they are equal as elements.
                if normal_form(p, &rotated) == nf_v {
                    let z0 = invert_syllables(&core_u[..r]);
                    return checked_yes(p, u, v, assemble_witness(&conj_v, z0, &conj_u));
                }
            }
            Verdict::No {
                reason: "no rotation of the cyclic core matches".into(),
            }
        }
    }
}

/// Solve for x_0..x_{k-1} in
/// `m(e_i, d_i) x_i - m(e_{i+1}, -d_{i+1}) x_{i+1} = v_i - u_{r+i}` (cyclic),
/// the condition for an edge element to thread the rotated core of u onto the
/// core of v. Returns the conjugating vertex element `m(e_0, -d_0) x_0`.
fn thread_rotation(
    h: &crate::presentations::HnnPresentation,
    bu: &[(usize, i32, Vec<BigInt>)],
    bv: &[(usize, i32, Vec<BigInt>)],
    r: usize,
) -> Option<Vec<BigInt>> {
    let k = bv.len();
    let n = h.base_rank;
    let col_of: Vec<usize> = {
        let mut acc = 0;
        let mut v = Vec::with_capacity(k);
        for (e, _, _) in bv {
            v.push(acc);
            acc += h.edges[*e].m_plus.cols;
        }
        v.push(acc);
        v
    };
    let total = col_of[k];
    let mut b = Mat::zero(k * n, total);
    let mut rhs = vec![BigInt::from(0); k * n];
    for i in 0..k {
        let (ei, di, ref vi) = bv[i];
        let (_, _, ref ui) = bu[(r + i) % k];
        let next = (i + 1) % k;
        let (en, dn, _) = bv[next];
        add_block(&mut b, i * n, col_of[i], &h.edges[ei].mat(di), false);
        add_block(&mut b, i * n, col_of[next], &h.edges[en].mat(-dn), true);
        for row in 0..n {
            rhs[i * n + row] = &vi[row] - &ui[row];
        }
    }
    let x = solve(&b, &rhs)?;
    let (e0, d0, _) = bv[0];
    let x0 = &x[col_of[0]..col_of[0] + h.edges[e0].m_plus.cols];
    Some(h.edges[e0].mat(-d0).mul_vec(x0))
}

fn add_block(b: &mut Mat, r0: usize, c0: usize, m: &Mat, negate: bool) {
    for i in 0..m.rows {
        for j in 0..m.cols {
            let v = if negate {
                b.at(r0 + i, c0 + j) - m.at(i, j)
            } else {
                b.at(r0 + i, c0 + j) + m.at(i, j)
            };
            *b.at_mut(r0 + i, c0 + j) = v;
        }
    }
}

/// Reference oracle: search the ball of reduced conjugators of the given
/// radius, returning letters of some `z` with `z u z^-1 = v`. Exponential in
/// the radius; for tests and small certified sweeps only.
pub fn brute_force_conjugate(
    p: &Presentation,
    u: &[Syllable],
    v: &[Syllable],
    radius: usize,
) -> Option<Vec<usize>> {
    let target = normal_form(p, v);
    let start = normal_form(p, u);
    if start == target {
        return Some(Vec::new());
    }
    // Explores conjugators of exactly the remaining depth, leaves checked
    // against the target. `z` holds the letters innermost first.
    fn dfs(
        p: &Presentation,
        cur: &NormalForm,
        target: &NormalForm,
        z: &mut Vec<usize>,
        depth: usize,
    ) -> bool {
        if depth == 0 {
            return cur == target;
        }
        let alphabet = p.alphabet();
        for a in 0..alphabet.len() {
            if let Some(&last) = z.last() {
                if alphabet.inverse(last).expect("symmetric alphabet") == a {
                    continue;
                }
            }
            let mut w = cur.clone();
            for syl in expand_letter(p, a).iter().rev() {
                w.prepend(p, syl);
            }
            let inv = alphabet.inverse(a).expect("symmetric alphabet");
            for syl in expand_letter(p, inv) {
                w.append(p, syl);
            }
            z.push(a);
            if dfs(p, &w, target, z, depth - 1) {
                return true;
            }
            z.pop();
        }
        false
    }
    // Iterative deepening keeps the answer canonical: the shortest reduced
    // conjugator wins, with ties broken by letter order.
    let mut z: Vec<usize> = Vec::new();
    for depth in 1..=radius {
        if dfs(p, &start, &target, &mut z, depth) {
            z.reverse();
            return Some(z);
        }
        debug_assert!(z.is_empty());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlin::vec_i64;
    use crate::normalform::to_syllables;
    use crate::presentations::fixtures::{amalgam, bs, hnn_two_edges};
    use crate::words::derive_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn syls(p: &Presentation, s: &str) -> Vec<Syllable> {
        to_syllables(p, &p.alphabet().parse_word(s).unwrap())
    }

    fn run(p: &Presentation, us: &str, vs: &str) -> Verdict {
        conjugate(p, &syls(p, us), &syls(p, vs), &ConjugacyOptions::default())
    }

    #[test]
    fn orbit_search_cases() {
        let n = Mat::from_i64(&[&[2]]);
        assert_eq!(
            orbit_search(&n, &vec_i64(&[1]), &vec_i64(&[8]), 100),
            OrbitOutcome::Found(3)
        );
        assert_eq!(
            orbit_search(&n, &vec_i64(&[1]), &vec_i64(&[3]), 100),
            OrbitOutcome::NotInOrbit
        );
        let id = Mat::from_i64(&[&[1]]);
        assert_eq!(
            orbit_search(&id, &vec_i64(&[5]), &vec_i64(&[5]), 100),
            OrbitOutcome::Found(0)
        );
        // Identity map cycles immediately, certifying a miss.
        assert_eq!(
            orbit_search(&id, &vec_i64(&[5]), &vec_i64(&[7]), 100),
            OrbitOutcome::NotInOrbit
        );
    }

    #[test]
    fn ascending_hnn_doubling() {
        let p = bs(1, 2);
        assert!(run(&p, "a", "a a").is_yes());
        match run(&p, "a", "a a a") {
            Verdict::No { .. } => {}
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn bs23_elliptic_chain() {
        let p = bs(2, 3);
        assert!(run(&p, "a a", "a a a").is_yes());
        match run(&p, "a", "a a a a") {
            Verdict::No { .. } => {}
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn bs23_hyperbolic_with_known_witness() {
        let p = bs(2, 3);
        let verdict = run(&p, "t a", "t a a a a a");
        let Verdict::Yes { witness } = verdict else {
            panic!("expected Yes, got {verdict:?}")
        };
        // The threading element is a^-12.
        assert_eq!(
            normal_form(&p, &witness),
            normal_form(&p, &[Syllable::base(VertexTag::H, vec_i64(&[-12]))])
        );
    }

    #[test]
    fn opposite_stable_letters_not_conjugate() {
        let p = bs(2, 3);
        match run(&p, "t", "t'") {
            Verdict::No { .. } => {}
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn elliptic_vs_hyperbolic_is_no() {
        let p = bs(2, 3);
        match run(&p, "a", "t a") {
            Verdict::No { reason } => assert!(reason.contains("elliptic")),
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn periodic_chain_certifies_no() {
        // t a^2 t^-1 = a^2 makes the chain of a^2 a fixed point.
        let p = bs(2, 2);
        match run(&p, "a a", "a a a a a a") {
            Verdict::No { .. } => {}
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn diverging_chain_is_refused() {
        // In BS(2,4) the forward chain of a^2 doubles forever and never
        // meets a^6, but nothing certifies that in bounded steps.
        let p = bs(2, 4);
        let opts = ConjugacyOptions { orbit_bound: 50 };
        match conjugate(&p, &syls(&p, "a a"), &syls(&p, "a a a a a a"), &opts) {
            Verdict::Refused { .. } => {}
            other => panic!("expected Refused, got {other:?}"),
        }
    }

    #[test]
    fn multi_edge_elliptic_abelianization() {
        let p = hnn_two_edges(2, 4, 3, 9);
        // Crossing differences span 2Z; a and a^2 differ by 1, certified No.
        match run(&p, "a", "a a") {
            Verdict::No { reason } => assert!(reason.contains("abelianization")),
            other => panic!("expected No, got {other:?}"),
        }
        // a and a^3 differ by 2: the screen passes but nothing decides.
        match run(&p, "a", "a a a") {
            Verdict::Refused { .. } => {}
            other => panic!("expected Refused, got {other:?}"),
        }
    }

    #[test]
    fn amalgam_vertex_elements() {
        let p = amalgam(2, 2);
        match run(&p, "h", "k") {
            Verdict::No { .. } => {}
            other => panic!("expected No, got {other:?}"),
        }
        // k h k^-1 has core h.
        assert!(run(&p, "h", "k h k'").is_yes());
        assert!(run(&p, "h h", "k k").is_yes());
    }

    #[test]
    fn amalgam_hyperbolic_rotation() {
        let p = amalgam(2, 2);
        assert!(run(&p, "h k", "k h").is_yes());
        match run(&p, "h k", "h k'") {
            Verdict::No { .. } => {}
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn brute_force_finds_simple_conjugator() {
        let p = bs(2, 3);
        let z = brute_force_conjugate(&p, &syls(&p, "a a"), &syls(&p, "a a a"), 2).unwrap();
        assert_eq!(z, p.alphabet().parse_word("t").unwrap());
        assert!(brute_force_conjugate(&p, &syls(&p, "t"), &syls(&p, "t'"), 4).is_none());
        // Equal words need no conjugator at all, even with radius 0.
        let same = brute_force_conjugate(&p, &syls(&p, "t a"), &syls(&p, "t a"), 0);
        assert_eq!(same, Some(Vec::new()));
    }

    #[test]
    fn stable_letter_counts_separate_conjugacy_classes() {
        // t a and t t a cross the edge a different number of times, which no
        // conjugation can repair.
        let p = bs(2, 3);
        match run(&p, "t a", "t t a") {
            Verdict::No { .. } => {}
            other => panic!("expected No, got {other:?}"),
        }
    }

    fn random_word(p: &Presentation, len: usize, rng: &mut impl Rng) -> Vec<usize> {
        let d = p.alphabet().len();
        (0..len).map(|_| rng.gen_range(0..d)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // Conjugating by an explicit word must come back Yes, and the witness
        // is verified inside checked_yes.
        #[test]
        fn explicit_conjugates_are_found(seed in 0u64..5000, hnn in proptest::bool::ANY) {
            let p = if hnn { bs(2, 3) } else { amalgam(2, 3) };
            let mut rng = derive_rng(seed, 17);
            let u = to_syllables(&p, &random_word(&p, 6, &mut rng));
            let z = to_syllables(&p, &random_word(&p, 5, &mut rng));
            let mut vw = z.clone();
            vw.extend(u.iter().cloned());
            vw.extend(invert_syllables(&z));
            let verdict = conjugate(&p, &u, &vw, &ConjugacyOptions::default());
            prop_assert!(verdict.is_yes(), "expected Yes, got {:?}", verdict);
        }

        // The amalgam solver always decides.
        #[test]
        fn amalgam_never_refuses(seed in 0u64..5000) {
            let p = amalgam(2, 3);
            let mut rng = derive_rng(seed, 23);
            let u = to_syllables(&p, &random_word(&p, 5, &mut rng));
            let v = to_syllables(&p, &random_word(&p, 5, &mut rng));
            let verdict = conjugate(&p, &u, &v, &ConjugacyOptions::default());
            let refused = matches!(verdict, Verdict::Refused { .. });
            prop_assert!(!refused);
        }

        // A No verdict must survive the brute-force ball search.
        #[test]
        fn no_verdicts_resist_brute_force(seed in 0u64..400) {
            let p = bs(2, 3);
            let mut rng = derive_rng(seed, 29);
            let u = to_syllables(&p, &random_word(&p, 4, &mut rng));
            let v = to_syllables(&p, &random_word(&p, 4, &mut rng));
            if let Verdict::No { .. } = conjugate(&p, &u, &v, &ConjugacyOptions::default()) {
                prop_assert!(brute_force_conjugate(&p, &u, &v, 3).is_none());
            }
        }

        // A cyclic rotation of u is conjugate to u, so the verdict against
        // any fixed v cannot change.
        #[test]
        fn verdict_is_rotation_invariant(seed in 0u64..2000, hnn in proptest::bool::ANY, rot in 0usize..6) {
            let p = if hnn { bs(2, 3) } else { amalgam(2, 2) };
            let mut rng = derive_rng(seed, 31);
            let uw = random_word(&p, 6, &mut rng);
            let v = to_syllables(&p, &random_word(&p, 4, &mut rng));
            let mut rotated = uw.clone();
            rotated.rotate_left(rot % uw.len().max(1));
            let opts = ConjugacyOptions::default();
            let a = conjugate(&p, &to_syllables(&p, &uw), &v, &opts);
            let b = conjugate(&p, &to_syllables(&p, &rotated), &v, &opts);
            prop_assert_eq!(a.is_yes(), b.is_yes());
        }
    }
}
