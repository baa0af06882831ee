//! The builtin presentations S, B, Q, Λ and the maps and witness words
//! built from them.

use std::collections::HashSet;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certificate::Rules;
use crate::error::{Error, Result};
use crate::presentation::{GenMap, Presentation};
use crate::text::parse_presentation;
use crate::word::{Gen, Letter, Run, Word};
use crate::wp::{bounded_trivializer, BsGroup, Verdict, VanKampenSolver, WordProblem};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Builtin {
    S,
    B,
    Q,
    Lambda,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::S, Builtin::B, Builtin::Q, Builtin::Lambda];

    pub fn key(self) -> &'static str {
        match self {
            Builtin::S => "s",
            Builtin::B => "b",
            Builtin::Q => "q",
            Builtin::Lambda => "lambda",
        }
    }

    /// Source text of the shipped data file.
    pub fn source(self) -> &'static str {
        match self {
            Builtin::S => include_str!("../presentations/s.pres"),
            Builtin::B => include_str!("../presentations/b.pres"),
            Builtin::Q => include_str!("../presentations/q.pres"),
            Builtin::Lambda => include_str!("../presentations/lambda.pres"),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(Builtin::S),
            "b" => Ok(Builtin::B),
            "q" => Ok(Builtin::Q),
            "lambda" | "l" => Ok(Builtin::Lambda),
            _ => Err(Error::Invalid(format!("unknown builtin `{s}` (s, b, q, lambda)"))),
        }
    }
}

pub fn build(b: Builtin) -> Arc<Presentation> {
    Arc::new(parse_presentation(b.source()).expect("builtin presentation parses"))
}

/// A presentation with named elements.
#[derive(Clone, Debug)]
pub struct NamedSystem {
    pub pres: Arc<Presentation>,
    pub distinguished: Vec<(String, Word)>,
}

pub fn build_system(b: Builtin) -> NamedSystem {
    let pres = build(b);
    let names: &[(&str, &str)] = match b {
        Builtin::S => &[("c", "a t a t^-1 a^-1 t a^-1 t^-1")],
        Builtin::B => &[("b", "t1"), ("beta", "t1^-1")],
        Builtin::Q => &[("c", "a t a t^-1 a^-1 t a^-1 t^-1"), ("b", "t1"), ("beta", "t1^-1")],
        Builtin::Lambda => &[],
    };
    let distinguished = names
        .iter()
        .map(|(n, w)| (n.to_string(), pres.word(w).expect("distinguished word parses")))
        .collect();
    NamedSystem { pres, distinguished }
}

/// `c = [a, t a t^-1]` over S.
pub fn commutator_c(s: &Presentation) -> Word {
    s.word("a t a t^-1 a^-1 t a^-1 t^-1").expect("S has a and t")
}

pub fn s_group() -> BsGroup {
    BsGroup::new(2, 3, Gen(0), Gen(1))
}

/// `ψ: a -> a^2, t -> t` on S.
pub fn psi() -> GenMap {
    let s = build(Builtin::S);
    GenMap::from_named(s.clone(), s, &[("a", "a^2")]).expect("ψ")
}

/// `Ψ` on Q: `ψ` on `{a, t}`, identity on B's generators.
pub fn big_psi() -> GenMap {
    let q = build(Builtin::Q);
    GenMap::from_named(q.clone(), q, &[("a", "a^2")]).expect("Ψ")
}

pub fn psi_power(n: u32) -> Result<GenMap> {
    psi().power(n)
}

pub fn big_psi_power(n: u32) -> Result<GenMap> {
    big_psi().power(n)
}

fn two_pow(n: u32) -> Result<i64> {
    1i64.checked_shl(n).filter(|&v| v > 0).ok_or(Error::Overflow)
}

/// `q_n: Λ -> B`, `α_i -> a_i^(2^n)`, `τ_i -> t_i`, `ζ -> 1`.
pub fn qn(n: u32) -> Result<GenMap> {
    let lambda = build(Builtin::Lambda);
    let b = build(Builtin::B);
    let e = two_pow(n)?;
    let img = |name: &str, exp: i64| Word::power_of(b.gen(name).expect("B generator"), exp);
    GenMap::new(
        lambda,
        b.clone(),
        vec![img("a1", e), img("t1", 1), img("a2", e), img("t2", 1), Word::empty()],
    )
}

/// The vertex copy `S_i = <a_i, t_i>` inside B.
pub fn b_vertex(i: usize) -> Result<BsGroup> {
    let b = build(Builtin::B);
    let (a, t) = match i {
        1 => ("a1", "t1"),
        2 => ("a2", "t2"),
        _ => return Err(Error::Invalid(format!("B has vertex groups 1 and 2, not {i}"))),
    };
    Ok(BsGroup::new(2, 3, b.gen(a)?, b.gen(t)?))
}

/// `w_0 = α_i`, `w_(k+1) = τ_i w_k τ_i^-1 w_k^-1`, so `q_n(w_n) = a_i`.
pub fn sigma_preimage(n: u32, i: usize) -> Result<Word> {
    let lambda = build(Builtin::Lambda);
    let (alpha, tau) = match i {
        1 => ("alpha1", "tau1"),
        2 => ("alpha2", "tau2"),
        _ => return Err(Error::Invalid(format!("index {i} is not 1 or 2"))),
    };
    let tau = Word::gen(lambda.gen(tau)?);
    let mut w = Word::gen(lambda.gen(alpha)?);
    for _ in 0..n {
        w = Word::product([&tau, &w, &tau.inverse(), &w.inverse()]);
    }
    Ok(w)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub what: String,
    pub status: String,
    pub certificate_steps: Option<usize>,
}

impl CheckLine {
    fn from_verdict(what: String, v: &Verdict) -> Self {
        let steps = match v {
            Verdict::Trivial(c) => Some(c.len()),
            _ => None,
        };
        CheckLine { what, status: v.label().into(), certificate_steps: steps }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EpiReport {
    pub well_defined: Vec<CheckLine>,
    pub surjective: Vec<CheckLine>,
    pub passed: bool,
}

/// Well-definedness (relator images trivial) and surjectivity (given
/// preimages map to the generators), decided by `backend` on the codomain.
pub fn check_epimorphism(
    m: &GenMap,
    backend: &dyn WordProblem,
    preimages: &[(Gen, Word)],
) -> Result<EpiReport> {
    let mut well_defined = Vec::new();
    for r in m.domain.rels() {
        let img = m.substitute(r)?;
        let v = backend.audited(&img)?;
        well_defined.push(CheckLine::from_verdict(
            format!("{} -> {}", m.domain.format(r), m.codomain.format(&img)),
            &v,
        ));
    }
    let mut surjective = Vec::new();
    for g in m.codomain.alphabet().gens() {
        let Some((_, pre)) = preimages.iter().find(|(h, _)| *h == g) else {
            surjective.push(CheckLine {
                what: format!("no preimage for {}", m.codomain.alphabet().name(g)),
                status: "unknown".into(),
                certificate_steps: None,
            });
            continue;
        };
        let img = m.substitute(pre)?;
        let v = backend.audited(&img.mul(&Word::gen(g).inverse()))?;
        surjective.push(CheckLine::from_verdict(
            format!(
                "{} -> {} = {}",
                m.domain.format(pre),
                m.codomain.format(&img),
                m.codomain.alphabet().name(g)
            ),
            &v,
        ));
    }
    let passed = well_defined.iter().chain(&surjective).all(|c| c.status == "trivial");
    Ok(EpiReport { well_defined, surjective, passed })
}

/// Backend for triviality claims inside Q: Britton on the `{a, t}` vertex
/// group, bounded search elsewhere.
pub fn q_backend() -> VanKampenSolver {
    let q = build(Builtin::Q);
    let (a, t) = (q.gen("a").expect("a"), q.gen("t").expect("t"));
    VanKampenSolver::new(q).with_vertex(a, t, 0).expect("first relator of Q is t a^2 t^-1 a^-3")
}

pub fn check_psi() -> Result<EpiReport> {
    let m = psi();
    let s = m.domain.clone();
    let backend = crate::wp::BrittonSolver { group: s_group() };
    let pre = vec![(Gen(0), s.word("t a t^-1 a^-1")?), (Gen(1), s.word("t")?)];
    check_epimorphism(&m, &backend, &pre)
}

pub fn check_big_psi() -> Result<EpiReport> {
    let m = big_psi();
    let q = m.domain.clone();
    let pre: Vec<(Gen, Word)> = q
        .alphabet()
        .gens()
        .map(|g| {
            let w = if g == Gen(0) { q.word("t a t^-1 a^-1").expect("word") } else { Word::gen(g) };
            (g, w)
        })
        .collect();
    check_epimorphism(&m, &q_backend(), &pre)
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub n: u32,
    pub m: u32,
    pub word: String,
    /// `q_n(u) = c` in `S_1` (Britton certificate of `q_n(u) c^-1`).
    pub qn_equals_c: bool,
    /// `c != 1` in `S_1` (Britton normal form non-empty).
    pub c_nontrivial: bool,
    /// `q_m(u) = 1` in `S_1` (Britton certificate).
    pub qm_trivial: bool,
    pub passed: bool,
    pub note: String,
}

/// `u_n = [w_n, τ_1 w_n τ_1^-1]`, in `ker q_m` but not in `ker q_n`.
pub fn kernel_witness(n: u32, m: u32) -> Result<(Word, WitnessReport)> {
    if n >= m {
        return Err(Error::Invalid(format!("kernel witness needs n < m, got n={n}, m={m}")));
    }
    let lambda = build(Builtin::Lambda);
    let b = build(Builtin::B);
    let w = sigma_preimage(n, 1)?;
    let tau = Word::gen(lambda.gen("tau1")?);
    let u = Word::commutator(&w, &w.conjugate_by(&tau));
    let s1 = b_vertex(1)?;
    let c_b = b.word("a1 t1 a1 t1^-1 a1^-1 t1 a1^-1 t1^-1")?;

    let qn_img = qn(n)?.substitute(&u)?;
    let (nf, cert) = s1.britton_nf(&qn_img.mul(&c_b.inverse()))?;
    let qn_equals_c = nf.is_empty() && cert.proves_trivial(&qn_img.mul(&c_b.inverse()), &s1.rules());
    let c_nontrivial = !s1.is_trivial(&c_b)?;
    let qm_img = qn(m)?.substitute(&u)?;
    let (nf, cert) = s1.britton_nf(&qm_img)?;
    let qm_trivial = nf.is_empty() && cert.proves_trivial(&qm_img, &s1.rules());
    let report = WitnessReport {
        n,
        m,
        word: lambda.format(&u),
        qn_equals_c,
        c_nontrivial,
        qm_trivial,
        passed: qn_equals_c && c_nontrivial && qm_trivial,
        note: "non-triviality in B assumes the vertex group <a1, t1> embeds in B".into(),
    };
    Ok((u, report))
}

/// A generating pair of S, up to swapping and inverting entries.
pub type PairKey = (Word, Word);

fn nf(bs: &BsGroup, w: &Word) -> Word {
    bs.britton_nf(w).expect("words over {a, t}").0
}

fn word_key(w: &Word) -> (u64, &Word) {
    (w.letter_len(), w)
}

/// Least of the eight variants under swap and entry-wise inversion.
pub fn canonical_pair(bs: &BsGroup, x: &Word, y: &Word) -> PairKey {
    let (x, y) = (nf(bs, x), nf(bs, y));
    let (xi, yi) = (nf(bs, &x.inverse()), nf(bs, &y.inverse()));
    let mut best: Option<PairKey> = None;
    for (u, v) in [(&x, &y), (&xi, &y), (&x, &yi), (&xi, &yi)] {
        for (p, q) in [(u, v), (v, u)] {
            let better = match &best {
                None => true,
                Some((bp, bq)) => (word_key(p), word_key(q)) < (word_key(bp), word_key(bq)),
            };
            if better {
                best = Some((p.clone(), q.clone()));
            }
        }
    }
    best.expect("eight variants")
}

fn nielsen_neighbours(bs: &BsGroup, (x, y): &PairKey) -> Vec<PairKey> {
    let (xi, yi) = (x.inverse(), y.inverse());
    vec![
        canonical_pair(bs, &x.mul(y), y),
        canonical_pair(bs, &x.mul(&yi), y),
        canonical_pair(bs, &y.mul(x), y),
        canonical_pair(bs, &yi.mul(x), y),
        canonical_pair(bs, x, &y.mul(x)),
        canonical_pair(bs, x, &y.mul(&xi)),
        canonical_pair(bs, x, &x.mul(y)),
        canonical_pair(bs, x, &xi.mul(y)),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct NielsenReport {
    pub depth: usize,
    pub ball_sizes: Vec<usize>,
    /// `(i, j, d)`: balls of radius `d` around inputs `i` and `j` meet.
    pub merges: Vec<(usize, usize, usize)>,
    pub pairwise_disjoint: bool,
}

/// Breadth-first balls of radius `depth` under elementary Nielsen moves,
/// reporting the first radius at which any two balls meet.
pub fn nielsen_orbit(pairs: &[(Word, Word)], depth: usize, max_ball: usize) -> Result<NielsenReport> {
    let bs = s_group();
    let k = pairs.len();
    let mut balls: Vec<HashSet<PairKey>> = Vec::with_capacity(k);
    let mut frontiers: Vec<Vec<PairKey>> = Vec::with_capacity(k);
    for (x, y) in pairs {
        let key = canonical_pair(&bs, x, y);
        balls.push(HashSet::from([key.clone()]));
        frontiers.push(vec![key]);
    }
    let mut merged: Vec<Option<usize>> = vec![None; k * k];
    let check = |balls: &[HashSet<PairKey>], merged: &mut Vec<Option<usize>>, d: usize| {
        for i in 0..k {
            for j in i + 1..k {
                if merged[i * k + j].is_none() {
                    let (small, large) =
                        if balls[i].len() <= balls[j].len() { (&balls[i], &balls[j]) } else { (&balls[j], &balls[i]) };
                    if small.iter().any(|p| large.contains(p)) {
                        merged[i * k + j] = Some(d);
                    }
                }
            }
        }
    };
    check(&balls, &mut merged, 0);
    for d in 1..=depth {
        for i in 0..k {
            let next: Vec<Vec<PairKey>> =
                frontiers[i].par_iter().map(|p| nielsen_neighbours(&bs, p)).collect();
            let mut fresh = Vec::new();
            for p in next.into_iter().flatten() {
                if balls[i].insert(p.clone()) {
                    fresh.push(p);
                }
            }
            if balls[i].len() > max_ball {
                return Err(Error::BudgetExceeded(format!(
                    "Nielsen ball {i} exceeded {max_ball} pairs at depth {d}"
                )));
            }
            frontiers[i] = fresh;
        }
        check(&balls, &mut merged, d);
    }
    let mut merges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if let Some(d) = merged[i * k + j] {
                merges.push((i, j, d));
            }
        }
    }
    Ok(NielsenReport {
        depth,
        ball_sizes: balls.iter().map(|b| b.len()).collect(),
        pairwise_disjoint: merges.is_empty(),
        merges,
    })
}

/// `Σ_n = (t, a^(2^n))` in S.
pub fn sigma_pair(n: u32) -> Result<(Word, Word)> {
    Ok((Word::gen(Gen(1)), Word::from_runs(vec![Run::new(Gen(0), two_pow(n)?)])))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub samples: usize,
    pub seed: u64,
    /// Inserting relator conjugates changed the Britton normal form.
    pub nf_mismatches: usize,
    /// Bounded search and Britton disagreed, or a certificate failed.
    pub contradictions: usize,
    pub bounded_certified: usize,
    pub passed: bool,
}

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::new(Gen(rng.gen_range(0..2)), rng.gen_bool(0.5));
        if letters.last() != Some(&l.inverse()) {
            letters.push(l);
        }
    }
    Word::from_letters(&letters)
}

/// Random words in S: the normal form must not see inserted products of
/// relator conjugates, and whatever bounded search certifies must be
/// trivial for Britton.
pub fn britton_consistency(samples: usize, seed: u64) -> Result<ConsistencyReport> {
    let s = build(Builtin::S);
    let bs = s_group();
    let r = s.rels()[0].clone();
    let rules = Rules { relators: Some(s.rels()), ..Rules::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut nf_mismatches, mut contradictions, mut bounded_certified) = (0, 0, 0);
    for _ in 0..samples {
        let u = random_word(&mut rng, 10);
        let k = rng.gen_range(0..=2);
        let mut v = Word::empty();
        for _ in 0..k {
            let c = random_word(&mut rng, 3);
            let e = if rng.gen_bool(0.5) { 1 } else { -1 };
            v = v.mul(&r.pow(e).conjugate_by(&c));
        }
        let (u1, u2) = u.split_at_letter(rng.gen_range(0..=u.letter_len()));
        let nf_u = bs.britton_nf(&u)?.0;
        if nf_u != bs.britton_nf(&Word::product([&u1, &v, &u2]))?.0 || bs.britton_nf(&nf_u)?.0 != nf_u {
            nf_mismatches += 1;
        }
        for (w, budget, cap) in [(&v, k, 5_000), (&u, 1, 500)] {
            if let Some(cert) = bounded_trivializer(&s, w, budget, cap) {
                if !w.is_empty() {
                    bounded_certified += 1;
                }
                if !cert.proves_trivial(w, &rules) || !bs.is_trivial(w)? {
                    contradictions += 1;
                }
            }
        }
        if !bs.is_trivial(&v)? {
            contradictions += 1;
        }
    }
    Ok(ConsistencyReport {
        samples,
        seed,
        nf_mismatches,
        contradictions,
        bounded_certified,
        passed: nf_mismatches == 0 && contradictions == 0 && bounded_certified > 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::print_presentation;

    #[test]
    fn builtin_shapes() {
        let s = build(Builtin::S);
        assert_eq!(print_presentation(&s), "name: S\ngens: a t\nrel: t a^2 t^-1 a^-3\n");
        let q = build(Builtin::Q);
        assert_eq!((q.num_gens(), q.num_rels()), (6, 6));
        assert!(q.is_balanced());
        let l = build(Builtin::Lambda);
        assert_eq!((l.num_gens(), l.num_rels()), (5, 2));
        for b in Builtin::ALL {
            let p = build(b);
            assert_eq!(parse_presentation(&print_presentation(&p)).unwrap(), *p);
        }
    }

    #[test]
    fn maps() {
        let q = build(Builtin::Q);
        let p = big_psi();
        assert_eq!(q.format(p.image(q.gen("a").unwrap())), "a^2");
        assert_eq!(q.format(p.image(q.gen("t1").unwrap())), "t1");
        assert_eq!(psi_power(0).unwrap().images(), GenMap::identity(build(Builtin::S)).images());
        let s = build(Builtin::S);
        assert_eq!(s.format(psi_power(3).unwrap().image(Gen(0))), "a^8");
        let b = build(Builtin::B);
        assert_eq!(b.format(qn(0).unwrap().image(Gen(0))), "a1");
        assert_eq!(b.format(qn(3).unwrap().image(Gen(2))), "a2^8");
        assert!(qn(5).unwrap().image(Gen(4)).is_empty());
    }

    #[test]
    fn psi_checks() {
        let r = check_psi().unwrap();
        assert!(r.passed, "{r:?}");
        let r = check_big_psi().unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.well_defined[0].status, "trivial");
    }

    #[test]
    fn sigma_preimages_map_to_generators() {
        let b = build(Builtin::B);
        for n in 0..6 {
            for i in 1..=2 {
                let w = sigma_preimage(n, i).unwrap();
                let img = qn(n).unwrap().substitute(&w).unwrap();
                let a = Word::gen(b.gen(if i == 1 { "a1" } else { "a2" }).unwrap());
                assert!(b_vertex(i).unwrap().is_trivial(&img.mul(&a.inverse())).unwrap());
            }
        }
        let l = build(Builtin::Lambda);
        assert_eq!(l.format(&sigma_preimage(1, 1).unwrap()), "tau1 alpha1 tau1^-1 alpha1^-1");
    }

    #[test]
    fn kernel_witnesses() {
        for m in 1..=5 {
            for n in 0..m {
                let (_, r) = kernel_witness(n, m).unwrap();
                assert!(r.passed, "{r:?}");
            }
        }
    }

    #[test]
    fn nielsen_small() {
        let bs = s_group();
        let (t, a) = (Word::gen(Gen(1)), Word::gen(Gen(0)));
        let r = nielsen_orbit(&[(t.clone(), a.clone()), (t.clone(), t.mul(&a))], 1, 1 << 20).unwrap();
        assert_eq!(r.merges, vec![(0, 1, 1)]);
        let r = nielsen_orbit(&[(t.clone(), a.clone()), (a.clone(), t.clone())], 1, 1 << 20).unwrap();
        assert_eq!(r.merges, vec![(0, 1, 0)]);
        assert_eq!(canonical_pair(&bs, &t, &a), canonical_pair(&bs, &a.inverse(), &t));
    }

    #[test]
    fn random_consistency_small() {
        let r = britton_consistency(300, 7).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
