//! Command line front end: JSON presentation configs in, reports out.
//!
//! Exit codes: 0 for any completed run (including No verdicts, nontrivial
//! word-problem answers, and Uncovered predictions), 1 when conjugacy is
//! Refused, 2 for malformed configs, words, or flags, 3 when a resource cap
//! ends a computation early.

use crate::conjugacy::{conjugate, ConjugacyOptions, Verdict};
use crate::intlin::{solve, Mat};
use crate::normalform::{
    classify_element, normal_form, to_syllables, ElementClass, NormalForm, Syllable,
};
use crate::presentations::{
    classify_schreier_amenability, expand_letter, GenSpec, Prediction, Presentation,
    PresentationSpec, RawAtom, RawImage, SplittingSpec, VertexTag,
};
use crate::schreier::{
    decay_fit, genericity_experiment, walk_exact, walk_mc, FitError, GenericityDomain, WalkError,
    WalkMode, DEFAULT_MEMORY_CAP,
};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Deserialize;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

/// Master seed used when none is given, so reports are reproducible.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Parser)]
#[command(name = "britton", about = "Normal forms, conjugacy and coset walks for HNN and amalgam splittings over free abelian groups", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a presentation config.
    Validate { config: PathBuf },
    /// Print the normal form of a word.
    Nf { config: PathBuf, word: String },
    /// Decide whether a word is trivial.
    Wp { config: PathBuf, word: String },
    /// Classify a word as elliptic or hyperbolic.
    ClassifyWord { config: PathBuf, word: String },
    /// Decide conjugacy of two words.
    Conj {
        config: PathBuf,
        u: String,
        v: String,
        /// Also print the witness in syllable form.
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 10_000)]
        orbit_bound: u64,
    },
    /// Predict amenability of the Schreier graph from the splitting shape.
    Predict {
        config: PathBuf,
        #[arg(long)]
        subgroup: SubgroupArg,
    },
    /// Return probabilities of the coset walk, as CSV.
    Walk {
        config: PathBuf,
        #[arg(long)]
        subgroup: SubgroupArg,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        mode: WalkModeArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Exclude the formal inverse of the previous letter at each step.
        #[arg(long)]
        no_backtrack: bool,
        /// Also print exact probabilities as reduced fractions (exact mode).
        #[arg(long)]
        rational: bool,
        #[arg(long, default_value_t = DEFAULT_MEMORY_CAP)]
        memory_cap: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Elliptic fractions of random words, as CSV.
    Generic {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "all")]
        domain: DomainArg,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit decay laws to a walk report.
    Fit { report: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum SubgroupArg {
    #[value(name = "H")]
    H,
    #[value(name = "K")]
    K,
}

impl From<SubgroupArg> for VertexTag {
    fn from(s: SubgroupArg) -> VertexTag {
        match s {
            SubgroupArg::H => VertexTag::H,
            SubgroupArg::K => VertexTag::K,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WalkModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    All,
    CycReduced,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        code: 2,
        msg: msg.into(),
    })
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<u8, Failure> {
    match cmd {
        Cmd::Validate { config } => {
            load_presentation(&config)?;
            println!("ok");
            Ok(0)
        }
        Cmd::Nf { config, word } => {
            let p = load_presentation(&config)?;
            let w = parse_word(&p, &word)?;
            print!("{}", render_nf(&p, &normal_form(&p, &to_syllables(&p, &w))));
            Ok(0)
        }
        Cmd::Wp { config, word } => {
            let p = load_presentation(&config)?;
            let w = parse_word(&p, &word)?;
            let nf = normal_form(&p, &to_syllables(&p, &w));
            println!("{}", if nf.is_identity() { "trivial" } else { "nontrivial" });
            Ok(0)
        }
        Cmd::ClassifyWord { config, word } => {
            let p = load_presentation(&config)?;
            let w = parse_word(&p, &word)?;
            match classify_element(&p, &to_syllables(&p, &w)) {
                ElementClass::Elliptic { core } => {
                    println!("elliptic");
                    println!("core: {}", render_syllables(&p, &core));
                }
                ElementClass::Hyperbolic { core } => {
                    println!("hyperbolic");
                    println!("core: {}", render_syllables(&p, &core));
                }
            }
            Ok(0)
        }
        Cmd::Conj {
            config,
            u,
            v,
            witness,
            orbit_bound,
        } => {
            let p = load_presentation(&config)?;
            let uw = to_syllables(&p, &parse_word(&p, &u)?);
            let vw = to_syllables(&p, &parse_word(&p, &v)?);
            let opts = ConjugacyOptions { orbit_bound };
            match conjugate(&p, &uw, &vw, &opts) {
                Verdict::Yes { witness: z } => {
                    println!("YES");
                    match letters_for_witness(&p, &z) {
                        Some(letters) => {
                            println!("witness: {}", p.alphabet().render(&letters))
                        }
                        None => println!("witness: {}", render_syllables(&p, &z)),
                    }
                    if witness {
                        println!("witness syllables: {}", render_syllables(&p, &z));
                    }
                    Ok(0)
                }
                Verdict::No { reason } => {
                    println!("NO ({reason})");
                    Ok(0)
                }
                Verdict::Refused { reason } => {
                    println!("REFUSED ({reason})");
                    Ok(1)
                }
            }
        }
        Cmd::Predict { config, subgroup } => {
            let p = load_presentation(&config)?;
            match classify_schreier_amenability(&p, subgroup.into()) {
                Prediction::Amenable(reason) => println!("Amenable: {reason}"),
                Prediction::NonAmenable(reason) => println!("NonAmenable: {reason}"),
                Prediction::Uncovered(reason) => println!("Uncovered: {reason}"),
            }
            Ok(0)
        }
        Cmd::Walk {
            config,
            subgroup,
            nmax,
            mode,
            trials,
            seed,
            no_backtrack,
            rational,
            memory_cap,
            out,
        } => {
            let p = load_presentation(&config)?;
            let sub: VertexTag = subgroup.into();
            if !p.has_vertex(sub) {
                return usage(format!("splitting has no vertex subgroup {sub}"));
            }
            let mut csv = String::from("n,p,ci_lo,ci_hi,trials,mode\n");
            let mut rationals = Vec::new();
            match mode {
                WalkModeArg::Exact => {
                    if no_backtrack {
                        return usage("exact mode only counts plain walks");
                    }
                    let rows = walk_exact(&p, sub, nmax, memory_cap).map_err(|e| match e {
                        WalkError::MemoryCap { .. } => Failure {
                            code: 3,
                            msg: e.to_string(),
                        },
                    })?;
                    for r in &rows {
                        csv.push_str(&format!("{},{},{},{},0,exact\n", r.n, r.p, r.p, r.p));
                        if rational {
                            rationals.push(format!("# rational,{},{}", r.n, r.rational));
                        }
                    }
                }
                WalkModeArg::Mc => {
                    if rational {
                        return usage("rational output requires exact mode");
                    }
                    let wmode = if no_backtrack {
                        WalkMode::NoBacktrack
                    } else {
                        WalkMode::Plain
                    };
                    let rows = walk_mc(&p, sub, nmax, trials, seed, wmode);
                    for r in &rows {
                        csv.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            r.n, r.p, r.ci_lo, r.ci_hi, r.trials, wmode
                        ));
                    }
                }
            }
            emit_report(out.as_deref(), &csv)?;
            for line in rationals {
                println!("{line}");
            }
            Ok(0)
        }
        Cmd::Generic {
            config,
            lengths,
            samples,
            seed,
            domain,
            out,
        } => {
            let p = load_presentation(&config)?;
            let (dom, tag) = match domain {
                DomainArg::All => (GenericityDomain::AllWords, "all"),
                DomainArg::CycReduced => (GenericityDomain::CyclicallyReduced, "cyc-reduced"),
            };
            let rows = genericity_experiment(&p, &lengths, samples, seed, dom)
                .map_err(|e| Failure {
                    code: 2,
                    msg: e.to_string(),
                })?;
            let mut csv = String::from("n,samples,elliptic,fraction,domain\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.n, r.samples, r.elliptic, r.fraction, tag
                ));
            }
            emit_report(out.as_deref(), &csv)?;
            Ok(0)
        }
        Cmd::Fit { report } => {
            let text = std::fs::read_to_string(&report).map_err(|e| Failure {
                code: 2,
                msg: format!("{}: {e}", report.display()),
            })?;
            let rows = parse_report_rows(&text)?;
            let fit = decay_fit(&rows).map_err(|e: FitError| Failure {
                code: 2,
                msg: e.to_string(),
            })?;
            println!("points {}", fit.points);
            println!("exp_rate {} r2 {}", fit.exp_rate, fit.exp_r2);
            println!("poly_exponent {} r2 {}", fit.poly_exponent, fit.poly_r2);
            Ok(0)
        }
    }
}

fn emit_report(out: Option<&Path>, csv: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Failure {
            code: 2,
            msg: format!("{}: {e}", path.display()),
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

/// Rows of a walk CSV: `n` and `p` from the first two columns. Lines starting
/// with `#` and the header are skipped.
fn parse_report_rows(text: &str) -> Result<Vec<(usize, f64)>, Failure> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(c0), Some(c1)) = (cols.next(), cols.next()) else {
            return usage(format!("malformed report line: {line}"));
        };
        if let (Ok(n), Ok(p)) = (c0.parse::<usize>(), c1.parse::<f64>()) {
            rows.push((n, p));
        } else if rows.is_empty() {
            continue; // header
        } else {
            return usage(format!("malformed report line: {line}"));
        }
    }
    Ok(rows)
}

// --- config ingestion ---

/// Integers may be JSON numbers or decimal strings, for entries beyond 2^53.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigInt {
    Small(i64),
    Big(String),
}

impl ConfigInt {
    fn to_bigint(&self) -> Result<BigInt, Failure> {
        match self {
            ConfigInt::Small(v) => Ok(BigInt::from(*v)),
            ConfigInt::Big(s) => BigInt::from_str(s.trim())
                .map_err(|_| Failure {
                    code: 2,
                    msg: format!("not a decimal integer: {s:?}"),
                }),
        }
    }
}

type ConfigMat = Vec<Vec<ConfigInt>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigEdge {
    name: String,
    m_plus: ConfigMat,
    m_minus: ConfigMat,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigGenerator {
    name: String,
    inverse: String,
    image: ConfigImage,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigAtom {
    Vertex { vertex: String, vector: Vec<ConfigInt> },
    Stable { stable: String, exp: i32 },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigImage {
    Atom(ConfigAtom),
    Expansion { expansion: Vec<ConfigAtom> },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Config {
    Hnn {
        base_rank: usize,
        edges: Vec<ConfigEdge>,
        generators: Vec<ConfigGenerator>,
    },
    Amalgam {
        h_rank: usize,
        k_rank: usize,
        m_h: ConfigMat,
        m_k: ConfigMat,
        generators: Vec<ConfigGenerator>,
    },
}

fn to_mat(m: &ConfigMat, what: &str) -> Result<Mat, Failure> {
    let cols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != cols) {
        return usage(format!("{what}: ragged matrix rows"));
    }
    let mut rows = Vec::with_capacity(m.len());
    for r in m {
        let mut row = Vec::with_capacity(cols);
        for v in r {
            row.push(v.to_bigint()?);
        }
        rows.push(row);
    }
    Ok(Mat::from_rows(&rows))
}

fn to_tag(s: &str) -> Result<VertexTag, Failure> {
    match s {
        "H" => Ok(VertexTag::H),
        "K" => Ok(VertexTag::K),
        other => usage(format!("vertex tag must be \"H\" or \"K\", got {other:?}")),
    }
}

fn to_atom(a: &ConfigAtom) -> Result<RawAtom, Failure> {
    Ok(match a {
        ConfigAtom::Vertex { vertex, vector } => RawAtom::Vertex {
            tag: to_tag(vertex)?,
            vector: vector
                .iter()
                .map(|v| v.to_bigint())
                .collect::<Result<_, _>>()?,
        },
        ConfigAtom::Stable { stable, exp } => RawAtom::Stable {
            name: stable.clone(),
            exp: *exp,
        },
    })
}

fn to_spec(cfg: &Config) -> Result<PresentationSpec, Failure> {
    let (splitting, generators) = match cfg {
        Config::Hnn {
            base_rank,
            edges,
            generators,
        } => {
            let mut es = Vec::with_capacity(edges.len());
            for e in edges {
                es.push((
                    e.name.clone(),
                    to_mat(&e.m_plus, &format!("edge {} m_plus", e.name))?,
                    to_mat(&e.m_minus, &format!("edge {} m_minus", e.name))?,
                ));
            }
            (
                SplittingSpec::Hnn {
                    base_rank: *base_rank,
                    edges: es,
                },
                generators,
            )
        }
        Config::Amalgam {
            h_rank,
            k_rank,
            m_h,
            m_k,
            generators,
        } => (
            SplittingSpec::Amalgam {
                h_rank: *h_rank,
                k_rank: *k_rank,
                m_h: to_mat(m_h, "m_h")?,
                m_k: to_mat(m_k, "m_k")?,
            },
            generators,
        ),
    };
    let mut gens = Vec::with_capacity(generators.len());
    for g in generators {
        let image = match &g.image {
            ConfigImage::Atom(a) => RawImage::Atom(to_atom(a)?),
            ConfigImage::Expansion { expansion } => RawImage::Expansion(
                expansion.iter().map(to_atom).collect::<Result<_, _>>()?,
            ),
        };
        gens.push(GenSpec {
            name: g.name.clone(),
            inverse: g.inverse.clone(),
            image,
        });
    }
    Ok(PresentationSpec {
        splitting,
        generators: gens,
    })
}

fn load_presentation(path: &Path) -> Result<Presentation, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        msg: format!("{}: {e}", path.display()),
    })?;
    let cfg: Config = serde_json::from_str(&text).map_err(|e| Failure {
        code: 2,
        msg: format!("{}: {e}", path.display()),
    })?;
    let spec = to_spec(&cfg)?;
    spec.build().map_err(|violations| Failure {
        code: 2,
        msg: violations
            .iter()
            .map(|v| format!("violation: {v}"))
            .collect::<Vec<_>>()
            .join("\n"),
    })
}

fn parse_word(p: &Presentation, s: &str) -> Result<Vec<usize>, Failure> {
    p.alphabet().parse_word(s).map_err(|e| Failure {
        code: 2,
        msg: e.to_string(),
    })
}

// --- rendering ---

fn fmt_vec(v: &[BigInt]) -> String {
    let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

fn stable_name(p: &Presentation, edge: usize, exp: i32) -> String {
    let name = &p.hnn().edges[edge].name;
    if exp > 0 {
        name.clone()
    } else {
        format!("{name}'")
    }
}

fn render_syllables(p: &Presentation, w: &[Syllable]) -> String {
    if w.is_empty() {
        return "(empty)".into();
    }
    let parts: Vec<String> = w
        .iter()
        .map(|syl| match syl {
            Syllable::Base { tag, vec } => format!("{tag}{}", fmt_vec(vec)),
            Syllable::Stable { edge, exp } => stable_name(p, *edge, *exp),
        })
        .collect();
    parts.join(" ")
}

fn render_nf(p: &Presentation, nf: &NormalForm) -> String {
    let mut out = String::new();
    match nf {
        NormalForm::Hnn(h) => {
            out.push_str(&format!("head {}\n", fmt_vec(&h.head)));
            for e in &h.tail {
                out.push_str(&format!(
                    "{} {}\n",
                    stable_name(p, e.edge, e.exp),
                    fmt_vec(&e.coset)
                ));
            }
        }
        NormalForm::Amalgam(a) => {
            out.push_str(&format!("head {} {}\n", a.head_tag, fmt_vec(&a.head)));
            for e in &a.tail {
                out.push_str(&format!("{} {}\n", e.tag, fmt_vec(&e.coset)));
            }
        }
    }
    out
}

/// Express a syllable witness in generator letters when the generating set
/// decomposes it: stable syllables need a letter mapping to exactly that
/// stable atom, vertex syllables are solved against the atomic vertex
/// generators of their tag. Falls back to None for expansion-only images or
/// preposterously long words.
fn letters_for_witness(p: &Presentation, witness: &[Syllable]) -> Option<Vec<usize>> {
    const MAX_LETTERS: usize = 10_000;
    let alphabet = p.alphabet();
    let mut stable_letter: HashMap<(usize, i32), usize> = HashMap::new();
    let mut vertex_gens: HashMap<VertexTag, Vec<(usize, Vec<BigInt>)>> = HashMap::new();
    for l in 0..alphabet.len() {
        match expand_letter(p, l) {
            [Syllable::Stable { edge, exp }] => {
                stable_letter.entry((*edge, *exp)).or_insert(l);
            }
            [Syllable::Base { tag, vec }] => {
                vertex_gens.entry(*tag).or_default().push((l, vec.clone()));
            }
            _ => {}
        }
    }
    let mut letters = Vec::new();
    for syl in witness {
        match syl {
            Syllable::Stable { edge, exp } => {
                letters.push(*stable_letter.get(&(*edge, *exp))?);
            }
            Syllable::Base { tag, vec } => {
                let gens = vertex_gens.get(tag)?;
                let mut m = Mat::zero(vec.len(), gens.len());
                for (j, (_, col)) in gens.iter().enumerate() {
                    if col.len() != vec.len() {
                        return None;
                    }
                    for i in 0..col.len() {
                        *m.at_mut(i, j) = col[i].clone();
                    }
                }
                let x = solve(&m, vec)?;
                for (j, (letter, _)) in gens.iter().enumerate() {
                    let (l, count) = if x[j] >= BigInt::from(0) {
                        (*letter, x[j].clone())
                    } else {
                        (alphabet.inverse(*letter).ok()?, -x[j].clone())
                    };
                    let count: usize = count.try_into().ok()?;
                    if letters.len() + count > MAX_LETTERS {
                        return None;
                    }
                    letters.extend(std::iter::repeat(l).take(count));
                }
            }
        }
    }
    Some(letters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentations::fixtures::bs;

    const BS23: &str = r#"{
        "type": "hnn",
        "base_rank": 1,
        "edges": [{ "name": "t", "m_plus": [[2]], "m_minus": [[3]] }],
        "generators": [
            { "name": "a", "inverse": "a'", "image": { "vertex": "H", "vector": [1] } },
            { "name": "t", "inverse": "t'", "image": { "stable": "t", "exp": 1 } }
        ]
    }"#;

    #[test]
    fn config_round_trip() {
        let cfg: Config = serde_json::from_str(BS23).unwrap();
        let spec = to_spec(&cfg).unwrap();
        let p = spec.build().unwrap();
        assert!(p.is_hnn());
        assert_eq!(p.alphabet().len(), 4);
    }

    #[test]
    fn big_integers_via_strings() {
        let text = BS23.replace("[[2]]", "[[\"36893488147419103232\"]]");
        let cfg: Config = serde_json::from_str(&text).unwrap();
        let spec = to_spec(&cfg).unwrap();
        let p = spec.build().unwrap();
        let big = BigInt::from_str("36893488147419103232").unwrap();
        assert_eq!(p.hnn().edges[0].m_plus.at(0, 0), &big);
    }

    #[test]
    fn ragged_matrix_rejected() {
        let text = r#"{ "type": "amalgam", "h_rank": 2, "k_rank": 1,
            "m_h": [[1], [1, 2]], "m_k": [[2]], "generators": [] }"#;
        let cfg: Config = serde_json::from_str(text).unwrap();
        assert!(to_spec(&cfg).is_err());
    }

    #[test]
    fn witness_letter_rendering() {
        let p = bs(2, 3);
        let witness = vec![Syllable::base(VertexTag::H, crate::intlin::vec_i64(&[-3]))];
        let letters = letters_for_witness(&p, &witness).unwrap();
        assert_eq!(p.alphabet().render(&letters), "a' a' a'");

        let witness = vec![Syllable::stable(0, -1), Syllable::stable(0, 1)];
        let letters = letters_for_witness(&p, &witness).unwrap();
        assert_eq!(p.alphabet().render(&letters), "t' t");
    }

    #[test]
    fn report_parser_skips_header_and_comments() {
        let text = "n,p,ci_lo,ci_hi,trials,mode\n0,1,1,1,0,exact\n1,0.5,0.5,0.5,0,exact\n# rational,1,1/2\n";
        let rows = parse_report_rows(text).unwrap();
        assert_eq!(rows, vec![(0, 1.0), (1, 0.5)]);
    }
}
