//! Splittings of a group over a finitely generated free abelian edge group:
//! HNN extensions of Z^n along a pair of lattice embeddings, and amalgams of
//! two free abelian vertex groups over a common edge lattice.
//!
//! A [`Presentation`] couples the splitting data with a finite symmetric
//! generating alphabet whose letters map to vertex elements, stable letters,
//! or short products of those. Construction validates everything up front, so
//! the rewriting modules can assume shapes and ranks are coherent.

use crate::intlin::{hnf, lattice_index, Hnf, LatticeIndex, Mat};
use crate::words::Alphabet;
use num_bigint::BigInt;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexTag {
    H,
    K,
}

impl VertexTag {
    pub fn other(self) -> VertexTag {
        match self {
            VertexTag::H => VertexTag::K,
            VertexTag::K => VertexTag::H,
        }
    }
}

impl fmt::Display for VertexTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VertexTag::H => "H",
            VertexTag::K => "K",
        })
    }
}

/// One syllable of a group word: a vertex element or a stable letter power.
/// Words over these are the common currency of the rewriting modules.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Syllable {
    Base { tag: VertexTag, vec: Vec<BigInt> },
    Stable { edge: usize, exp: i32 },
}

impl Syllable {
    pub fn base(tag: VertexTag, vec: Vec<BigInt>) -> Syllable {
        Syllable::Base { tag, vec }
    }

    pub fn stable(edge: usize, exp: i32) -> Syllable {
        assert!(exp == 1 || exp == -1, "stable letter exponent must be +-1");
        Syllable::Stable { edge, exp }
    }

    pub fn inverse(&self) -> Syllable {
        match self {
            Syllable::Base { tag, vec } => Syllable::Base {
                tag: *tag,
                vec: vec.iter().map(|x| -x).collect(),
            },
            Syllable::Stable { edge, exp } => Syllable::Stable {
                edge: *edge,
                exp: -exp,
            },
        }
    }
}

pub fn invert_syllables(w: &[Syllable]) -> Vec<Syllable> {
    w.iter().rev().map(Syllable::inverse).collect()
}

/// Stable letter of an HNN splitting with its two lattice embeddings:
/// conjugation by the letter carries `m_plus . x` to `m_minus . x`.
#[derive(Debug, Clone)]
pub struct StableEdge {
    pub name: String,
    pub m_plus: Mat,
    pub m_minus: Mat,
    pub lat_plus: Hnf,
    pub lat_minus: Hnf,
}

impl StableEdge {
    /// Embedding crossed when passing the letter with exponent `exp` from
    /// left to right.
    pub fn mat(&self, exp: i32) -> &Mat {
        if exp > 0 {
            &self.m_plus
        } else {
            &self.m_minus
        }
    }

    pub fn lat(&self, exp: i32) -> &Hnf {
        if exp > 0 {
            &self.lat_plus
        } else {
            &self.lat_minus
        }
    }
}

#[derive(Debug, Clone)]
pub struct HnnPresentation {
    pub base_rank: usize,
    pub edges: Vec<StableEdge>,
}

#[derive(Debug, Clone)]
pub struct AmalgamPresentation {
    pub h_rank: usize,
    pub k_rank: usize,
    pub m_h: Mat,
    pub m_k: Mat,
    pub lat_h: Hnf,
    pub lat_k: Hnf,
}

impl AmalgamPresentation {
    pub fn mat(&self, tag: VertexTag) -> &Mat {
        match tag {
            VertexTag::H => &self.m_h,
            VertexTag::K => &self.m_k,
        }
    }

    pub fn lat(&self, tag: VertexTag) -> &Hnf {
        match tag {
            VertexTag::H => &self.lat_h,
            VertexTag::K => &self.lat_k,
        }
    }

    pub fn rank(&self, tag: VertexTag) -> usize {
        match tag {
            VertexTag::H => self.h_rank,
            VertexTag::K => self.k_rank,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Splitting {
    Hnn(HnnPresentation),
    Amalgam(AmalgamPresentation),
}

/// Validated presentation: splitting plus generating alphabet and images.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub splitting: Splitting,
    alphabet: Alphabet,
    images: Vec<Vec<Syllable>>,
}

impl Presentation {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn is_hnn(&self) -> bool {
        matches!(self.splitting, Splitting::Hnn(_))
    }

    pub fn hnn(&self) -> &HnnPresentation {
        match &self.splitting {
            Splitting::Hnn(h) => h,
            Splitting::Amalgam(_) => panic!("amalgam presentation where HNN expected"),
        }
    }

    pub fn amalgam(&self) -> &AmalgamPresentation {
        match &self.splitting {
            Splitting::Amalgam(a) => a,
            Splitting::Hnn(_) => panic!("HNN presentation where amalgam expected"),
        }
    }

    pub fn vertex_rank(&self, tag: VertexTag) -> usize {
        match &self.splitting {
            Splitting::Hnn(h) => {
                assert_eq!(tag, VertexTag::H, "HNN splitting has a single vertex H");
                h.base_rank
            }
            Splitting::Amalgam(a) => a.rank(tag),
        }
    }

    pub fn has_vertex(&self, tag: VertexTag) -> bool {
        tag == VertexTag::H || !self.is_hnn()
    }
}

/// Image of a sampled or parsed letter as a syllable stream.
pub fn expand_letter(p: &Presentation, letter: usize) -> &[Syllable] {
    &p.images[letter]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Unresolved letter image: stable letters referenced by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawAtom {
    Vertex { tag: VertexTag, vector: Vec<BigInt> },
    Stable { name: String, exp: i32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawImage {
    Atom(RawAtom),
    Expansion(Vec<RawAtom>),
}

impl RawImage {
    fn atoms(&self) -> &[RawAtom] {
        match self {
            RawImage::Atom(a) => std::slice::from_ref(a),
            RawImage::Expansion(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub name: String,
    pub inverse: String,
    pub image: RawImage,
}

#[derive(Debug, Clone)]
pub enum SplittingSpec {
    Hnn {
        base_rank: usize,
        edges: Vec<(String, Mat, Mat)>,
    },
    Amalgam {
        h_rank: usize,
        k_rank: usize,
        m_h: Mat,
        m_k: Mat,
    },
}

#[derive(Debug, Clone)]
pub struct PresentationSpec {
    pub splitting: SplittingSpec,
    pub generators: Vec<GenSpec>,
}

impl PresentationSpec {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check_splitting(&mut out);
        self.check_generators(&mut out);
        out
    }

    pub fn build(&self) -> Result<Presentation, Vec<Violation>> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(violations);
        }
        Ok(self.build_unchecked())
    }

    fn check_splitting(&self, out: &mut Vec<Violation>) {
        let mut push = |msg: String| out.push(Violation(msg));
        match &self.splitting {
            SplittingSpec::Hnn { base_rank, edges } => {
                if *base_rank == 0 {
                    push("vertex group has rank zero".into());
                }
                if edges.is_empty() {
                    push("HNN splitting has no stable letters".into());
                }
                let mut names = std::collections::HashSet::new();
                for (name, m_plus, m_minus) in edges {
                    if !names.insert(name.clone()) {
                        push(format!("duplicate stable letter name {name:?}"));
                    }
                    for (side, m) in [("m_plus", m_plus), ("m_minus", m_minus)] {
                        if m.rows != *base_rank {
                            push(format!(
                                "edge {name:?}: {side} has {} rows, vertex rank is {base_rank}",
                                m.rows
                            ));
                        }
                    }
                    if m_plus.cols != m_minus.cols {
                        push(format!(
                            "edge {name:?}: embeddings disagree on edge rank ({} vs {})",
                            m_plus.cols, m_minus.cols
                        ));
                    }
                    if m_plus.cols == 0 {
                        push(format!("edge {name:?}: edge group has rank zero"));
                    }
                    for (side, m) in [("m_plus", m_plus), ("m_minus", m_minus)] {
                        if m.rows == *base_rank && hnf(m).rank() != m.cols {
                            push(format!("edge {name:?}: embedding not injective ({side})"));
                        }
                    }
                }
            }
            SplittingSpec::Amalgam {
                h_rank,
                k_rank,
                m_h,
                m_k,
            } => {
                if *h_rank == 0 || *k_rank == 0 {
                    push("vertex group has rank zero".into());
                }
                if m_h.rows != *h_rank {
                    push(format!("m_h has {} rows, H has rank {h_rank}", m_h.rows));
                }
                if m_k.rows != *k_rank {
                    push(format!("m_k has {} rows, K has rank {k_rank}", m_k.rows));
                }
                if m_h.cols != m_k.cols {
                    push(format!(
                        "embeddings disagree on edge rank ({} vs {})",
                        m_h.cols, m_k.cols
                    ));
                }
                if m_h.cols == 0 {
                    push("edge group has rank zero".into());
                }
                for (side, m, rank) in [("m_h", m_h, h_rank), ("m_k", m_k, k_rank)] {
                    if m.rows != *rank {
                        continue;
                    }
                    if hnf(m).rank() != m.cols {
                        push(format!("embedding not injective ({side})"));
                    } else if lattice_index(m) == LatticeIndex::Finite(BigInt::from(1)) {
                        push(format!(
                            "not a proper amalgam: edge lattice is all of {}",
                            if side == "m_h" { "H" } else { "K" }
                        ));
                    }
                }
            }
        }
    }

    fn check_generators(&self, out: &mut Vec<Violation>) {
        let mut push = |msg: String| out.push(Violation(msg));
        if self.generators.is_empty() {
            push("no generators".into());
            return;
        }

        let mut inverse_of = std::collections::HashMap::new();
        for g in &self.generators {
            if g.name == g.inverse {
                push(format!("generator {:?} is its own inverse", g.name));
            }
            if let Some(prev) = inverse_of.insert(g.name.clone(), g.inverse.clone()) {
                if prev != g.inverse {
                    push(format!(
                        "generator {:?} declared twice with different inverses",
                        g.name
                    ));
                } else {
                    push(format!("generator {:?} declared twice", g.name));
                }
            }
        }
        for g in &self.generators {
            if let Some(back) = inverse_of.get(&g.inverse) {
                if back != &g.name {
                    push(format!(
                        "involution broken: {:?} names inverse {:?}, which names {:?}",
                        g.name, g.inverse, back
                    ));
                }
            }
        }

        for g in &self.generators {
            for atom in g.image.atoms() {
                self.check_atom(&g.name, atom, &mut push);
            }
            if matches!(&g.image, RawImage::Expansion(v) if v.is_empty()) {
                push(format!("generator {:?} has an empty expansion", g.name));
            }
        }

        // Explicit inverse entries must carry the formal inverse image.
        for g in &self.generators {
            if let Some(other) = self.generators.iter().find(|o| o.name == g.inverse) {
                let fwd = g.image.atoms();
                let bwd = other.image.atoms();
                let ok = fwd.len() == bwd.len()
                    && fwd.iter().rev().zip(bwd.iter()).all(|(x, y)| match (x, y) {
                        (
                            RawAtom::Vertex { tag: t1, vector: v1 },
                            RawAtom::Vertex { tag: t2, vector: v2 },
                        ) => t1 == t2 && v1.len() == v2.len()
                            && v1.iter().zip(v2).all(|(a, b)| *a == -b),
                        (
                            RawAtom::Stable { name: n1, exp: e1 },
                            RawAtom::Stable { name: n2, exp: e2 },
                        ) => n1 == n2 && *e1 == -e2,
                        _ => false,
                    });
                if !ok {
                    push(format!(
                        "involution/image mismatch between {:?} and {:?}",
                        g.name, other.name
                    ));
                }
            }
        }

        // Every stable letter must be reachable from the alphabet.
        if let SplittingSpec::Hnn { edges, .. } = &self.splitting {
            for (name, _, _) in edges {
                let used = self.generators.iter().any(|g| {
                    g.image
                        .atoms()
                        .iter()
                        .any(|a| matches!(a, RawAtom::Stable { name: n, .. } if n == name))
                });
                if !used {
                    push(format!(
                        "stable letter {name:?} does not occur in any generator image"
                    ));
                }
            }
        }

        // Sufficient generation check: the vertex vectors occurring among the
        // images must span each vertex lattice. Necessary conditions are
        // subtler once expansions mix vertex and stable parts; a full-rank,
        // index-one column stack is what we insist on.
        let vertex_ranks: Vec<(VertexTag, usize)> = match &self.splitting {
            SplittingSpec::Hnn { base_rank, .. } => vec![(VertexTag::H, *base_rank)],
            SplittingSpec::Amalgam { h_rank, k_rank, .. } => {
                vec![(VertexTag::H, *h_rank), (VertexTag::K, *k_rank)]
            }
        };
        for (tag, rank) in vertex_ranks {
            if rank == 0 {
                continue;
            }
            let mut cols: Vec<Vec<BigInt>> = Vec::new();
            for g in &self.generators {
                for atom in g.image.atoms() {
                    if let RawAtom::Vertex { tag: t, vector } = atom {
                        if *t == tag && vector.len() == rank {
                            cols.push(vector.clone());
                        }
                    }
                }
            }
            let spans = !cols.is_empty() && {
                let mut m = Mat::zero(rank, cols.len());
                for (j, c) in cols.iter().enumerate() {
                    for (i, x) in c.iter().enumerate() {
                        *m.at_mut(i, j) = x.clone();
                    }
                }
                lattice_index(&m) == LatticeIndex::Finite(BigInt::from(1))
            };
            if !spans {
                push(format!(
                    "generator images do not span the {tag} vertex lattice"
                ));
            }
        }
    }

    fn check_atom(&self, gen: &str, atom: &RawAtom, push: &mut impl FnMut(String)) {
        match atom {
            RawAtom::Vertex { tag, vector } => {
                let rank = match &self.splitting {
                    SplittingSpec::Hnn { base_rank, .. } => {
                        if *tag != VertexTag::H {
                            push(format!(
                                "generator {gen:?}: HNN splitting has no vertex {tag}"
                            ));
                            return;
                        }
                        *base_rank
                    }
                    SplittingSpec::Amalgam { h_rank, k_rank, .. } => match tag {
                        VertexTag::H => *h_rank,
                        VertexTag::K => *k_rank,
                    },
                };
                if vector.len() != rank {
                    push(format!(
                        "generator {gen:?}: vector has length {}, vertex {tag} has rank {rank}",
                        vector.len()
                    ));
                }
            }
            RawAtom::Stable { name, exp } => {
                match &self.splitting {
                    SplittingSpec::Hnn { edges, .. } => {
                        if !edges.iter().any(|(n, _, _)| n == name) {
                            push(format!("generator {gen:?}: unknown stable letter {name:?}"));
                        }
                    }
                    SplittingSpec::Amalgam { .. } => {
                        push(format!(
                            "generator {gen:?}: amalgam splitting has no stable letters"
                        ));
                    }
                }
                if *exp != 1 && *exp != -1 {
                    push(format!(
                        "generator {gen:?}: stable letter exponent {exp} (must be +-1)"
                    ));
                }
            }
        }
    }

    fn build_unchecked(&self) -> Presentation {
        let splitting = match &self.splitting {
            SplittingSpec::Hnn { base_rank, edges } => Splitting::Hnn(HnnPresentation {
                base_rank: *base_rank,
                edges: edges
                    .iter()
                    .map(|(name, m_plus, m_minus)| StableEdge {
                        name: name.clone(),
                        lat_plus: hnf(m_plus),
                        lat_minus: hnf(m_minus),
                        m_plus: m_plus.clone(),
                        m_minus: m_minus.clone(),
                    })
                    .collect(),
            }),
            SplittingSpec::Amalgam {
                h_rank,
                k_rank,
                m_h,
                m_k,
            } => Splitting::Amalgam(AmalgamPresentation {
                h_rank: *h_rank,
                k_rank: *k_rank,
                lat_h: hnf(m_h),
                lat_k: hnf(m_k),
                m_h: m_h.clone(),
                m_k: m_k.clone(),
            }),
        };

        let edge_index = |name: &str| -> usize {
            match &self.splitting {
                SplittingSpec::Hnn { edges, .. } => {
                    edges.iter().position(|(n, _, _)| n == name).unwrap()
                }
                SplittingSpec::Amalgam { .. } => unreachable!("validated: no stable letters"),
            }
        };
        let resolve = |atom: &RawAtom| -> Syllable {
            match atom {
                RawAtom::Vertex { tag, vector } => Syllable::base(*tag, vector.clone()),
                RawAtom::Stable { name, exp } => Syllable::stable(edge_index(name), *exp),
            }
        };

        // One alphabet pair per generator entry, in order, except entries
        // that only restate an earlier entry's inverse.
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut images: Vec<Vec<Syllable>> = Vec::new();
        for g in &self.generators {
            if pairs.iter().any(|(_, neg)| neg == &g.name) {
                continue;
            }
            pairs.push((g.name.clone(), g.inverse.clone()));
            let img: Vec<Syllable> = g.image.atoms().iter().map(&resolve).collect();
            images.push(img.clone());
            images.push(invert_syllables(&img));
        }
        let alphabet = Alphabet::symmetric(&pairs).expect("validated alphabet");
        Presentation {
            splitting,
            alphabet,
            images,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prediction {
    Amenable(String),
    NonAmenable(String),
    Uncovered(String),
}

fn index_str(ix: &LatticeIndex) -> String {
    match ix {
        LatticeIndex::Finite(n) => n.to_string(),
        LatticeIndex::Infinite => "infinite".into(),
    }
}

fn index_at_least(ix: &LatticeIndex, n: i64) -> bool {
    match ix {
        LatticeIndex::Finite(v) => *v >= BigInt::from(n),
        LatticeIndex::Infinite => true,
    }
}

/// Predicted behaviour of the simple random walk on the Schreier graph of
/// the given vertex subgroup, from lattice indices alone.
pub fn classify_schreier_amenability(p: &Presentation, subgroup: VertexTag) -> Prediction {
    if !p.has_vertex(subgroup) {
        return Prediction::Uncovered(format!(
            "splitting has no vertex subgroup {subgroup}"
        ));
    }
    match &p.splitting {
        Splitting::Amalgam(a) => {
            let ih = a.lat_h.index();
            let ik = a.lat_k.index();
            let one = LatticeIndex::Finite(BigInt::from(1));
            let two = LatticeIndex::Finite(BigInt::from(2));
            if ih == one || ik == one {
                Prediction::Uncovered("edge lattice equals a vertex group".into())
            } else if ih == two && ik == two {
                Prediction::Amenable(
                    "both vertex groups contain the edge lattice with index 2; \
                     the coset graph is a reflected line"
                        .into(),
                )
            } else {
                Prediction::NonAmenable(format!(
                    "edge lattice indices {} and {}; a branching coset tree appears \
                     once an index reaches 3",
                    index_str(&ih),
                    index_str(&ik)
                ))
            }
        }
        Splitting::Hnn(h) => {
            if h.edges.len() != 1 {
                return Prediction::Uncovered(
                    "multiple stable letters: no index dichotomy applies".into(),
                );
            }
            let e = &h.edges[0];
            let ip = e.lat_plus.index();
            let im = e.lat_minus.index();
            let one = LatticeIndex::Finite(BigInt::from(1));
            if ip == one || im == one {
                Prediction::Amenable(format!(
                    "ascending extension: edge lattice indices {} and {}",
                    index_str(&ip),
                    index_str(&im)
                ))
            } else {
                debug_assert!(index_at_least(&ip, 2) && index_at_least(&im, 2));
                Prediction::NonAmenable(format!(
                    "both edge lattice indices at least 2 ({} and {}): \
                     the coset graph contains a branching tree",
                    index_str(&ip),
                    index_str(&im)
                ))
            }
        }
    }
}
