//! Britton rewriting and normal forms for words over a splitting.
//!
//! Two layers live here. Syllable words (`Vec<Syllable>`) are faithful
//! transcriptions of group words; `britton_reduce` and
//! `cyclic_britton_reduce` rewrite them without choosing coset
//! representatives. [`NormalForm`] is the canonical object: a head vertex
//! element plus a tail of canonical coset residues, unique per group element,
//! maintained incrementally by `prepend`/`append` so walks pay O(1) amortized
//! per letter.
//!
//! Convention for an HNN splitting: crossing a stable letter with exponent e
//! from left to right replaces `m_e . x` by `m_(-e) . x`, so a pinch
//! `t^e v t^-e` fires exactly when `v` lies in the image of `m_e`. An element
//! reads `head . t^(e1) x1 ... t^(ek) xk` with `x_i` the canonical residue
//! modulo the image of `m_(e_i)`.
//!
//! For an amalgam the edge lattice is central (both vertex groups are
//! abelian), so edge content commutes to the head: an element reads
//! `head . c1 ... cm` with nonzero canonical residues of strictly
//! alternating vertex tags, `c1` opposite to the head tag, and the head never
//! inside the edge lattice while the tail is nonempty. An element of the edge
//! lattice itself is stored with tag H.

use crate::intlin::{is_zero_vec, vadd, vsub};
use crate::presentations::{
    expand_letter, AmalgamPresentation, Presentation, Splitting, StableEdge, VertexTag,
};
pub use crate::presentations::{invert_syllables, Syllable};
use num_bigint::BigInt;

/// Transcribe a letter word into syllables, merging adjacent vertex syllables
/// of the same tag. No Britton reduction happens here: `t t'` stays two
/// syllables, and a zero vertex syllable is kept.
pub fn to_syllables(p: &Presentation, word: &[usize]) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::new();
    for &letter in word {
        for syl in expand_letter(p, letter) {
            push_merged(&mut out, syl.clone());
        }
    }
    out
}

fn push_merged(out: &mut Vec<Syllable>, syl: Syllable) {
    if let (Some(Syllable::Base { tag: t0, vec: v0 }), Syllable::Base { tag, vec }) =
        (out.last_mut(), &syl)
    {
        if t0 == tag {
            *v0 = vadd(v0, vec);
            return;
        }
    }
    out.push(syl);
}

/// Merge adjacent same-tag vertex syllables and drop zero ones. Sound as a
/// rewriting step (a zero syllable is the identity), used by the reducers.
fn compact(w: &[Syllable]) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::new();
    for syl in w {
        match syl {
            Syllable::Base { vec, .. } if is_zero_vec(vec) => continue,
            _ => {}
        }
        if let (Some(Syllable::Base { tag: t0, vec: v0 }), Syllable::Base { tag, vec }) =
            (out.last_mut(), syl)
        {
            if t0 == tag {
                *v0 = vadd(v0, vec);
                if is_zero_vec(v0) {
                    out.pop();
                }
                continue;
            }
        }
        out.push(syl.clone());
    }
    out
}

fn stable_count(w: &[Syllable]) -> usize {
    w.iter()
        .filter(|s| matches!(s, Syllable::Stable { .. }))
        .count()
}

/// Positions where a pinch can fire right now.
fn pinch_sites(p: &Presentation, w: &[Syllable]) -> Vec<usize> {
    let mut sites = Vec::new();
    match &p.splitting {
        Splitting::Hnn(h) => {
            for i in 0..w.len() {
                let Syllable::Stable { edge, exp } = &w[i] else {
                    continue;
                };
                let fires = match w.get(i + 1) {
                    Some(Syllable::Stable { edge: e2, exp: e2x }) => e2 == edge && *e2x == -exp,
                    Some(Syllable::Base { vec, .. }) => {
                        matches!(
                            w.get(i + 2),
                            Some(Syllable::Stable { edge: e2, exp: e2x })
                                if e2 == edge && *e2x == -exp
                        ) && h.edges[*edge].lat(*exp).contains(vec)
                    }
                    None => false,
                };
                if fires {
                    sites.push(i);
                }
            }
        }
        Splitting::Amalgam(a) => {
            for i in 1..w.len().saturating_sub(1) {
                let Syllable::Base { tag, vec } = &w[i] else {
                    panic!("amalgam word contains a stable letter");
                };
                if a.lat(*tag).contains(vec) {
                    sites.push(i);
                }
            }
        }
    }
    sites
}

fn apply_pinch(p: &Presentation, w: &mut Vec<Syllable>, i: usize) {
    match &p.splitting {
        Splitting::Hnn(h) => {
            let Syllable::Stable { edge, exp } = w[i].clone() else {
                unreachable!()
            };
            let e = &h.edges[edge];
            let (middle, span) = match &w[i + 1] {
                Syllable::Stable { .. } => (vec![BigInt::from(0); e.m_plus.cols], 2),
                Syllable::Base { vec, .. } => (
                    e.lat(exp).decompose(vec).expect("pinch site checked"),
                    3,
                ),
            };
            let crossed = e.mat(-exp).mul_vec(&middle);
            w.splice(
                i..i + span,
                [Syllable::base(VertexTag::H, crossed)],
            );
        }
        Splitting::Amalgam(a) => {
            let Syllable::Base { tag, vec } = w[i].clone() else {
                unreachable!()
            };
            let z = a.lat(tag).decompose(&vec).expect("pinch site checked");
            let other = tag.other();
            w[i] = Syllable::base(other, a.mat(other).mul_vec(&z));
        }
    }
    *w = compact(w);
}

fn britton_reduce_by(
    p: &Presentation,
    w: &[Syllable],
    mut choose: impl FnMut(usize) -> usize,
) -> Vec<Syllable> {
    let mut w = compact(w);
    loop {
        let sites = pinch_sites(p, &w);
        if sites.is_empty() {
            return w;
        }
        apply_pinch(p, &mut w, sites[choose(sites.len())]);
    }
}

/// Remove every pinch. Pinches are applied leftmost-first; the result is
/// independent of that order (checked by the confluence tests below), and its
/// stable-letter count is minimal among all rewritings.
pub fn britton_reduce(p: &Presentation, w: &[Syllable]) -> Vec<Syllable> {
    britton_reduce_by(p, w, |_| 0)
}

/// Cyclically reduced core and a conjugator with
/// `w = conjugator . core . conjugator^-1`.
///
/// For an HNN word the core either has no stable letter (a single vertex
/// syllable, empty for the identity) or starts with one and admits no pinch
/// around the wrap. For an amalgam the core is a single syllable or an
/// alternating cycle none of whose syllables lies in the edge lattice.
pub fn cyclic_britton_reduce(
    p: &Presentation,
    w: &[Syllable],
) -> (Vec<Syllable>, Vec<Syllable>) {
    let mut core = britton_reduce(p, w);
    let mut conj: Vec<Syllable> = Vec::new();
    match &p.splitting {
        Splitting::Hnn(h) => loop {
            if stable_count(&core) == 0 {
                break;
            }
            let lead = match core.first() {
                Some(Syllable::Base { vec, .. }) => Some(vec.clone()),
                _ => None,
            };
            let trail = match core.last() {
                Some(Syllable::Base { vec, .. }) => Some(vec.clone()),
                _ => None,
            };
            let first_stable = core
                .iter()
                .find_map(|s| match s {
                    Syllable::Stable { edge, exp } => Some((*edge, *exp)),
                    _ => None,
                })
                .unwrap();
            let last_stable = core
                .iter()
                .rev()
                .find_map(|s| match s {
                    Syllable::Stable { edge, exp } => Some((*edge, *exp)),
                    _ => None,
                })
                .unwrap();
            let zero = vec![BigInt::from(0); h.base_rank];
            let wrap = vadd(
                trail.as_ref().unwrap_or(&zero),
                lead.as_ref().unwrap_or(&zero),
            );
            let (e1, x1) = first_stable;
            let (ek, xk) = last_stable;
            if e1 == ek && x1 == -xk && h.edges[ek].lat(xk).contains(&wrap) {
                // Rotating the leading vertex part and the first letter past
                // the wrap exposes the pinch t^(ek) wrap t^(-ek).
                if let Some(b) = lead {
                    conj.push(Syllable::base(VertexTag::H, b.clone()));
                    core.remove(0);
                    core.push(Syllable::base(VertexTag::H, b));
                }
                conj.push(Syllable::stable(e1, x1));
                let s = core.remove(0);
                core.push(s);
                core = britton_reduce(p, &core);
                continue;
            }
            if let Some(b) = lead {
                // Rotate the leading vertex part behind the last stable
                // letter so the core starts with one. The wrap pinch was
                // already ruled out on the merged vertex part, so this
                // cannot unlock further reductions.
                conj.push(Syllable::base(VertexTag::H, b.clone()));
                core.remove(0);
                core.push(Syllable::base(VertexTag::H, b));
                core = compact(&core);
            }
            break;
        },
        Splitting::Amalgam(a) => loop {
            if core.len() <= 1 {
                break;
            }
            let (Syllable::Base { tag: t1, vec: v1 }, Syllable::Base { tag: tm, vec: vm }) =
                (core.first().unwrap().clone(), core.last().unwrap().clone())
            else {
                panic!("amalgam word contains a stable letter");
            };
            if t1 == tm {
                conj.push(core.remove(0));
                core.push(Syllable::base(t1, v1));
                core = compact(&core);
                continue;
            }
            // Edge-lattice content at either end is central: fold it into the
            // neighbour across the wrap instead of counting it as a syllable.
            if a.lat(t1).contains(&v1) {
                let z = a.lat(t1).decompose(&v1).unwrap();
                core.remove(0);
                let last = core.len() - 1;
                let Syllable::Base { tag, vec } = &mut core[last] else {
                    unreachable!()
                };
                *vec = vadd(vec, &a.mat(*tag).mul_vec(&z));
                core = compact(&core);
                continue;
            }
            if a.lat(tm).contains(&vm) {
                let z = a.lat(tm).decompose(&vm).unwrap();
                core.pop();
                let Syllable::Base { tag, vec } = &mut core[0] else {
                    unreachable!()
                };
                *vec = vadd(vec, &a.mat(*tag).mul_vec(&z));
                core = compact(&core);
                continue;
            }
            break;
        },
    }
    let core = compact(&core);
    debug_assert!(
        {
            let mut check = conj.clone();
            check.extend(core.iter().cloned());
            check.extend(invert_syllables(&conj));
            check.extend(invert_syllables(w));
            word_problem(p, &check)
        },
        "cyclic reduction lost the conjugacy class"
    );
    (core, conj)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementClass {
    Elliptic { core: Vec<Syllable> },
    Hyperbolic { core: Vec<Syllable> },
}

/// Elliptic means conjugate into a vertex group: for an HNN word, the cyclic
/// core keeps no stable letter; for an amalgam, at most one syllable.
pub fn classify_element(p: &Presentation, w: &[Syllable]) -> ElementClass {
    let (core, _) = cyclic_britton_reduce(p, w);
    let elliptic = match &p.splitting {
        Splitting::Hnn(_) => stable_count(&core) == 0,
        Splitting::Amalgam(_) => core.len() <= 1,
    };
    if elliptic {
        ElementClass::Elliptic { core }
    } else {
        ElementClass::Hyperbolic { core }
    }
}

/// HNN tail entry: the stable letter `t_edge^exp` followed by the canonical
/// residue of the vertex part after it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HnnEntry {
    pub edge: usize,
    pub exp: i32,
    pub coset: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HnnNf {
    pub head: Vec<BigInt>,
    pub tail: Vec<HnnEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AmalgamEntry {
    pub tag: VertexTag,
    pub coset: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AmalgamNf {
    pub head_tag: VertexTag,
    pub head: Vec<BigInt>,
    pub tail: Vec<AmalgamEntry>,
}

/// Canonical form of a group element. Equal as values iff equal in the group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormalForm {
    Hnn(HnnNf),
    Amalgam(AmalgamNf),
}

impl NormalForm {
    pub fn identity(p: &Presentation) -> NormalForm {
        match &p.splitting {
            Splitting::Hnn(h) => NormalForm::Hnn(HnnNf {
                head: vec![BigInt::from(0); h.base_rank],
                tail: Vec::new(),
            }),
            Splitting::Amalgam(a) => NormalForm::Amalgam(AmalgamNf {
                head_tag: VertexTag::H,
                head: vec![BigInt::from(0); a.h_rank],
                tail: Vec::new(),
            }),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            NormalForm::Hnn(nf) => nf.tail.is_empty() && is_zero_vec(&nf.head),
            NormalForm::Amalgam(nf) => nf.tail.is_empty() && is_zero_vec(&nf.head),
        }
    }

    pub fn prepend(&mut self, p: &Presentation, syl: &Syllable) {
        match (self, syl) {
            (NormalForm::Hnn(nf), Syllable::Base { vec, .. }) => {
                nf.head = vadd(&nf.head, vec);
            }
            (NormalForm::Hnn(nf), Syllable::Stable { edge, exp }) => {
                nf.prepend_stable(&p.hnn().edges[*edge], *edge, *exp);
            }
            (NormalForm::Amalgam(nf), Syllable::Base { tag, vec }) => {
                nf.prepend_base(p.amalgam(), *tag, vec);
            }
            (NormalForm::Amalgam(_), Syllable::Stable { .. }) => {
                panic!("amalgam word contains a stable letter")
            }
        }
    }

    pub fn append(&mut self, p: &Presentation, syl: &Syllable) {
        match (self, syl) {
            (NormalForm::Hnn(nf), Syllable::Base { vec, .. }) => {
                nf.append_base(&p.hnn().edges, vec.clone());
            }
            (NormalForm::Hnn(nf), Syllable::Stable { edge, exp }) => {
                nf.append_stable(*edge, *exp);
            }
            (NormalForm::Amalgam(nf), Syllable::Base { tag, vec }) => {
                nf.append_base(p.amalgam(), *tag, vec);
            }
            (NormalForm::Amalgam(_), Syllable::Stable { .. }) => {
                panic!("amalgam word contains a stable letter")
            }
        }
    }

    pub fn append_letter(&mut self, p: &Presentation, letter: usize) {
        for syl in expand_letter(p, letter) {
            self.append(p, syl);
        }
    }

    pub fn syllables(&self) -> Vec<Syllable> {
        match self {
            NormalForm::Hnn(nf) => {
                let mut out = Vec::new();
                if !is_zero_vec(&nf.head) {
                    out.push(Syllable::base(VertexTag::H, nf.head.clone()));
                }
                for e in &nf.tail {
                    out.push(Syllable::stable(e.edge, e.exp));
                    if !is_zero_vec(&e.coset) {
                        out.push(Syllable::base(VertexTag::H, e.coset.clone()));
                    }
                }
                out
            }
            NormalForm::Amalgam(nf) => {
                let mut out = Vec::new();
                // With a nonempty tail the head is outside the edge lattice,
                // hence nonzero; for the identity nothing is emitted.
                if !is_zero_vec(&nf.head) {
                    out.push(Syllable::base(nf.head_tag, nf.head.clone()));
                }
                for e in &nf.tail {
                    out.push(Syllable::base(e.tag, e.coset.clone()));
                }
                out
            }
        }
    }

    pub fn mul(p: &Presentation, a: &NormalForm, b: &NormalForm) -> NormalForm {
        let mut out = a.clone();
        for syl in b.syllables() {
            out.append(p, &syl);
        }
        out
    }

    pub fn inverse(&self, p: &Presentation) -> NormalForm {
        normal_form(p, &invert_syllables(&self.syllables()))
    }
}

impl HnnNf {
    fn prepend_stable(&mut self, e: &StableEdge, edge: usize, exp: i32) {
        let lat = e.lat(exp);
        let rep = lat.canonical_rep(&self.head);
        let y = lat
            .decompose(&vsub(&self.head, &rep))
            .expect("difference from canonical rep is in the lattice");
        let crossed = e.mat(-exp).mul_vec(&y);
        let front_pinch = is_zero_vec(&rep)
            && self
                .tail
                .first()
                .is_some_and(|f| f.edge == edge && f.exp == -exp);
        if front_pinch {
            let f = self.tail.remove(0);
            self.head = vadd(&crossed, &f.coset);
        } else {
            self.tail.insert(
                0,
                HnnEntry {
                    edge,
                    exp,
                    coset: rep,
                },
            );
            self.head = crossed;
        }
    }

    fn append_stable(&mut self, edge: usize, exp: i32) {
        let back_pinch = self
            .tail
            .last()
            .is_some_and(|l| l.edge == edge && l.exp == -exp && is_zero_vec(&l.coset));
        if back_pinch {
            self.tail.pop();
        } else {
            self.tail.push(HnnEntry {
                edge,
                exp,
                coset: vec![BigInt::from(0); self.head.len()],
            });
        }
    }

    /// Add a vertex element on the right; excess lattice content crosses the
    /// tail leftwards, closing any pinches it opens along the way.
    fn append_base(&mut self, edges: &[StableEdge], v: Vec<BigInt>) {
        let mut carry = v;
        let mut i = self.tail.len();
        while i > 0 {
            let idx = i - 1;
            if is_zero_vec(&carry) {
                // Only a pinch freed by a removal behind us can still matter.
                let cur = &self.tail[idx];
                let freed = is_zero_vec(&cur.coset)
                    && self
                        .tail
                        .get(idx + 1)
                        .is_some_and(|nx| nx.edge == cur.edge && nx.exp == -cur.exp);
                if !freed {
                    return;
                }
            }
            let (edge, exp) = (self.tail[idx].edge, self.tail[idx].exp);
            let e = &edges[edge];
            let lat = e.lat(exp);
            let combined = vadd(&self.tail[idx].coset, &carry);
            let rep = lat.canonical_rep(&combined);
            let y = lat
                .decompose(&vsub(&combined, &rep))
                .expect("difference from canonical rep is in the lattice");
            let crossed = e.mat(-exp).mul_vec(&y);
            let pinch = is_zero_vec(&rep)
                && self
                    .tail
                    .get(idx + 1)
                    .is_some_and(|nx| nx.edge == edge && nx.exp == -exp);
            if pinch {
                let nx = self.tail.remove(idx + 1);
                self.tail.remove(idx);
                carry = vadd(&crossed, &nx.coset);
            } else {
                self.tail[idx].coset = rep;
                carry = crossed;
            }
            i = idx;
        }
        if !is_zero_vec(&carry) {
            self.head = vadd(&self.head, &carry);
        }
    }
}

impl AmalgamNf {
    fn prepend_base(&mut self, a: &AmalgamPresentation, tag: VertexTag, v: &[BigInt]) {
        if self.tail.is_empty() {
            if tag == self.head_tag {
                self.head = vadd(&self.head, v);
            } else if let Some(z) = a.lat(self.head_tag).decompose(&self.head) {
                self.head_tag = tag;
                self.head = vadd(&a.mat(tag).mul_vec(&z), v);
            } else {
                let rep = a.lat(self.head_tag).canonical_rep(&self.head);
                let z = a
                    .lat(self.head_tag)
                    .decompose(&vsub(&self.head, &rep))
                    .unwrap();
                self.tail.insert(
                    0,
                    AmalgamEntry {
                        tag: self.head_tag,
                        coset: rep,
                    },
                );
                self.head_tag = tag;
                self.head = vadd(v, &a.mat(tag).mul_vec(&z));
            }
        } else if tag == self.head_tag {
            self.head = vadd(&self.head, v);
        } else {
            let rep = a.lat(self.head_tag).canonical_rep(&self.head);
            let z = a
                .lat(self.head_tag)
                .decompose(&vsub(&self.head, &rep))
                .unwrap();
            debug_assert!(!is_zero_vec(&rep), "head inside edge lattice with tail");
            self.tail.insert(
                0,
                AmalgamEntry {
                    tag: self.head_tag,
                    coset: rep,
                },
            );
            self.head_tag = tag;
            self.head = vadd(v, &a.mat(tag).mul_vec(&z));
        }
        self.normalize(a);
    }

    fn append_base(&mut self, a: &AmalgamPresentation, tag: VertexTag, v: &[BigInt]) {
        match self.tail.last_mut() {
            None => {
                if tag == self.head_tag {
                    self.head = vadd(&self.head, v);
                } else if let Some(z) = a.lat(self.head_tag).decompose(&self.head) {
                    self.head_tag = tag;
                    self.head = vadd(&a.mat(tag).mul_vec(&z), v);
                } else {
                    let rep = a.lat(tag).canonical_rep(v);
                    let zc = a.lat(tag).decompose(&vsub(v, &rep)).unwrap();
                    self.head = vadd(&self.head, &a.mat(self.head_tag).mul_vec(&zc));
                    if !is_zero_vec(&rep) {
                        self.tail.push(AmalgamEntry { tag, coset: rep });
                    }
                }
            }
            Some(last) if last.tag == tag => {
                let combined = vadd(&last.coset, v);
                let rep = a.lat(tag).canonical_rep(&combined);
                let zc = a.lat(tag).decompose(&vsub(&combined, &rep)).unwrap();
                // Edge content is central, so it accumulates on the head.
                self.head = vadd(&self.head, &a.mat(self.head_tag).mul_vec(&zc));
                if is_zero_vec(&rep) {
                    self.tail.pop();
                } else {
                    let last = self.tail.last_mut().unwrap();
                    last.coset = rep;
                }
            }
            Some(_) => {
                let rep = a.lat(tag).canonical_rep(v);
                let zc = a.lat(tag).decompose(&vsub(v, &rep)).unwrap();
                self.head = vadd(&self.head, &a.mat(self.head_tag).mul_vec(&zc));
                if !is_zero_vec(&rep) {
                    self.tail.push(AmalgamEntry { tag, coset: rep });
                }
            }
        }
        self.normalize(a);
    }

    /// Restore the two head invariants: with a tail, the head stays outside
    /// the edge lattice (absorb the first residue otherwise); without one, a
    /// lattice-valued head is stored with tag H.
    fn normalize(&mut self, a: &AmalgamPresentation) {
        loop {
            if let Some(z) = a.lat(self.head_tag).decompose(&self.head) {
                if self.tail.is_empty() {
                    if self.head_tag == VertexTag::K {
                        self.head_tag = VertexTag::H;
                        self.head = a.m_h.mul_vec(&z);
                    }
                    return;
                }
                let e = self.tail.remove(0);
                self.head_tag = e.tag;
                self.head = vadd(&a.mat(e.tag).mul_vec(&z), &e.coset);
                continue;
            }
            return;
        }
    }
}

/// Normal form of a syllable word, built by prepending right to left.
pub fn normal_form(p: &Presentation, w: &[Syllable]) -> NormalForm {
    let mut nf = NormalForm::identity(p);
    for syl in w.iter().rev() {
        nf.prepend(p, syl);
    }
    nf
}

pub fn normal_form_word(p: &Presentation, word: &[usize]) -> NormalForm {
    normal_form(p, &to_syllables(p, word))
}

/// True iff the word is the identity of the group.
pub fn word_problem(p: &Presentation, w: &[Syllable]) -> bool {
    normal_form(p, w).is_identity()
}
