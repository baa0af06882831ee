//! Presentations of fibre products `P = {(g, h) : π₀(g) = f₂(h)}` for an
//! epimorphism `π₀: Γ -> Q` whose kernel is generated by a finite set `A`,
//! and a second map `f₂: Γ₂ -> Q`.
//!
//! Kernel elements are written over extended generators `g(p, b)` standing
//! for `p b p^-1` (`p` a reduced word over Q's generators, `b ∈ A`), each
//! introduced with a defining relator in terms of `g(p', ·)` where `p'` is
//! `p` without its last letter.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::certificate::Step;
use crate::constructions::{big_psi_power, build, q_backend, qn, Builtin};
use crate::error::{Error, Result};
use crate::presentation::{GenMap, Presentation};
use crate::rips::{rips_construct, RipsOutput, RipsParams};
use crate::text::{print_embedding, print_presentation};
use crate::word::{Alphabet, Gen, Word};
use crate::wp::{GraphGroup, GraphSolver, Verdict, VanKampenSolver, WordProblem};

/// `Γ` with its quotient map and the rewriting data for the kernel.
///
/// Generators `0..q.num_gens()` of `Γ` are those of `Q`; the rest are `A`.
#[derive(Clone)]
pub struct FirstFactor {
    pub gamma: Arc<Presentation>,
    pub quotient: Arc<Presentation>,
    pub kernel: Vec<Gen>,
    /// `conj[x][0][b]` is `x b x^-1` as an A-word, `conj[x][1][b]` is
    /// `x^-1 b x`.
    pub conj: Vec<[Vec<Word>; 2]>,
    /// Relator `i` of `Q` equals `rel_words[i]` in `Γ`.
    pub rel_words: Vec<Word>,
    pub solver: Arc<dyn WordProblem>,
}

impl FirstFactor {
    pub fn new(
        gamma: Arc<Presentation>,
        quotient: Arc<Presentation>,
        conj: Vec<[Vec<Word>; 2]>,
        rel_words: Vec<Word>,
        solver: Arc<dyn WordProblem>,
    ) -> Result<Self> {
        let nx = quotient.num_gens();
        let names = gamma.alphabet().names();
        if names.len() < nx || names[..nx] != *quotient.alphabet().names() {
            return Err(Error::AlphabetMismatch(format!(
                "the first generators of {} must be those of {}",
                gamma.label(),
                quotient.label()
            )));
        }
        let kernel: Vec<Gen> = (nx..names.len()).map(|i| Gen(i as u32)).collect();
        let bad = conj.len() != nx
            || conj.iter().any(|c| c.iter().any(|side| side.len() != kernel.len()))
            || rel_words.len() != quotient.num_rels();
        if bad {
            return Err(Error::Invalid("kernel rewriting table has the wrong shape".into()));
        }
        let in_kernel = |w: &Word| w.runs().iter().all(|r| r.gen.index() >= nx && r.gen.index() < names.len());
        if !conj.iter().flatten().flatten().chain(&rel_words).all(in_kernel) {
            return Err(Error::Invalid("kernel rewriting table uses non-kernel letters".into()));
        }
        Ok(FirstFactor { gamma, quotient, kernel, conj, rel_words, solver })
    }

    pub fn from_rips(r: &RipsOutput) -> Self {
        let conj = (0..r.x_count)
            .map(|x| {
                let side = |positive| {
                    (0..r.kernel.len()).map(|b| r.conj_word(Gen(x as u32), positive, b).clone()).collect()
                };
                [side(true), side(false)]
            })
            .collect();
        let rel_words = (0..r.quotient.num_rels()).map(|i| r.rel_word(i).clone()).collect();
        FirstFactor {
            gamma: r.gamma.clone(),
            quotient: r.quotient.clone(),
            kernel: r.kernel.clone(),
            conj,
            rel_words,
            solver: r.solver.clone(),
        }
    }

    /// Reads the rewriting table off the relators of `Γ`, which must include
    /// `r U^-1` for each relator `r` of `Q` (`U` over `A`) and
    /// `x^s b x^-s W^-1` for each `x`, sign `s` and `b ∈ A`.
    pub fn recover(gamma: Arc<Presentation>, quotient: Arc<Presentation>, solver: Arc<dyn WordProblem>) -> Result<Self> {
        let nx = quotient.num_gens();
        let na = gamma.num_gens().saturating_sub(nx);
        let is_x = |g: Gen| g.index() < nx;
        let mut conj: Vec<[Vec<Option<Word>>; 2]> = vec![[vec![None; na], vec![None; na]]; nx];
        let mut rel_words: Vec<Option<Word>> = vec![None; quotient.num_rels()];
        for rho in gamma.rels() {
            let runs = rho.runs();
            let split = runs.iter().position(|r| !is_x(r.gen)).unwrap_or(runs.len());
            let rest = Word::from_runs(runs[split..].to_vec());
            let head = Word::from_runs(runs[..split].to_vec());
            if let Some(i) = quotient.rels().iter().position(|r| *r == head) {
                if rel_words[i].is_none() && rest.runs().iter().all(|r| !is_x(r.gen)) {
                    rel_words[i] = Some(rest.inverse());
                    continue;
                }
            }
            if let [x0, b, x1, tail @ ..] = runs {
                if is_x(x0.gen) && x0.exp.abs() == 1 && !is_x(b.gen) && b.exp == 1 && x1.gen == x0.gen && x1.exp == -x0.exp
                {
                    let side = usize::from(x0.exp < 0);
                    let slot = &mut conj[x0.gen.index()][side][b.gen.index() - nx];
                    if slot.is_none() && tail.iter().all(|r| !is_x(r.gen)) {
                        *slot = Some(Word::from_runs(tail.to_vec()).inverse());
                    }
                }
            }
        }
        let missing = |what: String| Error::Invalid(format!("{} has no relator {what}", gamma.label()));
        let rel_words = rel_words
            .into_iter()
            .enumerate()
            .map(|(i, w)| w.ok_or_else(|| missing(format!("r U^-1 for relator {i} of {}", quotient.label()))))
            .collect::<Result<Vec<_>>>()?;
        let conj = conj
            .into_iter()
            .enumerate()
            .map(|(x, sides)| {
                let [pos, neg] = sides;
                let fill = |v: Vec<Option<Word>>, s: &str| {
                    v.into_iter()
                        .enumerate()
                        .map(|(b, w)| {
                            w.ok_or_else(|| {
                                let al = gamma.alphabet();
                                missing(format!(
                                    "{x}^{s} {b} {x}^-{s} W^-1",
                                    x = al.name(Gen(x as u32)),
                                    b = al.name(Gen((nx + b) as u32))
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                };
                Ok([fill(pos, "1")?, fill(neg, "-1")?])
            })
            .collect::<Result<Vec<_>>>()?;
        FirstFactor::new(gamma, quotient, conj, rel_words, solver)
    }

    fn x_count(&self) -> usize {
        self.quotient.num_gens()
    }

    fn kernel_index(&self, g: Gen) -> Option<usize> {
        g.index().checked_sub(self.x_count()).filter(|&i| i < self.kernel.len())
    }

    /// Image in `Q`: kernel letters erased.
    pub fn project(&self, w: &Word) -> Word {
        let nx = self.x_count();
        w.erase(|g| g.index() < nx)
    }
}

/// Everything the emitter needs.
#[derive(Clone)]
pub struct FibreInput {
    pub first: FirstFactor,
    pub gamma2: Arc<Presentation>,
    pub solver2: Arc<dyn WordProblem>,
    pub f2: GenMap,
    /// One `Γ`-word per generator of `Γ₂`, with `π₀(lift) = f₂(y)` in `Q`.
    pub lifts: Vec<Word>,
    /// Source of van Kampen data in `Q`.
    pub q_solver: Arc<VanKampenSolver>,
    /// Trusted flag: `Q`'s presentation is aspherical.
    pub q_aspherical: bool,
    /// Additional kernel relators, as words over `A` trivial in `Γ`.
    pub extra: Vec<Word>,
}

impl FibreInput {
    /// Lifts default to the `f₂`-images read as words in `Γ`.
    pub fn new(first: FirstFactor, gamma2: Arc<Presentation>, solver2: Arc<dyn WordProblem>, f2: GenMap) -> Result<Self> {
        if f2.domain.alphabet() != gamma2.alphabet() {
            return Err(Error::AlphabetMismatch(format!("f2 is not defined on {}", gamma2.label())));
        }
        if f2.codomain.alphabet() != first.quotient.alphabet() {
            return Err(Error::AlphabetMismatch(format!(
                "f2 does not land in {}",
                first.quotient.label()
            )));
        }
        let lifts = f2.images().to_vec();
        let q_solver = Arc::new(VanKampenSolver::new(first.quotient.clone()));
        Ok(FibreInput { first, gamma2, solver2, f2, lifts, q_solver, q_aspherical: false, extra: Vec::new() })
    }

    pub fn aspherical(mut self, flag: bool) -> Self {
        self.q_aspherical = flag;
        self
    }

    pub fn with_q_solver(mut self, solver: VanKampenSolver) -> Result<Self> {
        if solver.pres.alphabet() != self.first.quotient.alphabet() {
            return Err(Error::AlphabetMismatch("van Kampen solver is not over Q".into()));
        }
        self.q_solver = Arc::new(solver);
        Ok(self)
    }

    pub fn with_lifts(mut self, lifts: Vec<Word>) -> Result<Self> {
        if lifts.len() != self.gamma2.num_gens() {
            return Err(Error::Invalid(format!(
                "need {} lifts, got {}",
                self.gamma2.num_gens(),
                lifts.len()
            )));
        }
        for w in &lifts {
            w.check_alphabet(self.first.gamma.num_gens())?;
        }
        self.lifts = lifts.into_iter().map(|w| w.free_reduce()).collect();
        Ok(self)
    }

    pub fn with_extra(mut self, extra: Vec<Word>) -> Self {
        self.extra = extra;
        self
    }

    /// `s(lifts)` for a `Γ₂`-word `s`.
    fn lift_word(&self, s: &Word) -> Word {
        let mut out = Word::empty();
        for r in s.runs() {
            out = out.mul(&self.lifts[r.gen.index()].pow(r.exp));
        }
        out
    }
}

/// Where an emitted relator comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// `s(d) · K(s(lifts))^-1` for relator `s` of `Γ₂`.
    Lift { relator: usize },
    /// `d^e â d^-e · K(lift^e b lift^-e)^-1`.
    Conjugation { generator: usize, kernel: usize, inverse: bool },
    /// A supplied kernel relator.
    Extra { index: usize },
    /// Defining relator of an extended generator.
    Definition { generator: usize },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Lift { relator } => write!(f, "R1 relator {relator}"),
            Family::Conjugation { generator, kernel, inverse } => {
                write!(f, "R2 generator {generator} kernel {kernel}{}", if *inverse { " inverse" } else { "" })
            }
            Family::Extra { index } => write!(f, "R3 {index}"),
            Family::Definition { generator } => write!(f, "definition of generator {generator}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FibrePresentation {
    pub pres: Arc<Presentation>,
    /// Per generator of `P`: its image in `Γ × Γ₂`.
    pub coords: Vec<(Word, Word)>,
    pub provenance: Vec<Family>,
    /// `â` for each `b ∈ A`.
    pub kernel_gens: Vec<Gen>,
    /// `d_j` for each generator of `Γ₂`.
    pub lift_gens: Vec<Gen>,
    /// Certificate lengths of the two coordinate checks, per relator.
    pub certificate_steps: Vec<(usize, usize)>,
}

impl FibrePresentation {
    pub fn presentation_text(&self) -> String {
        print_presentation(&self.pres)
    }

    pub fn embedding_text(&self, input: &FibreInput) -> String {
        print_embedding(
            self.pres.alphabet(),
            input.first.gamma.alphabet(),
            input.gamma2.alphabet(),
            &self.coords,
        )
    }
}

/// Generators and relators of `P` under construction.
struct Builder<'a> {
    input: &'a FibreInput,
    alphabet: Alphabet,
    coords: Vec<(Word, Word)>,
    hats: Vec<Gen>,
    extended: HashMap<(Word, usize), Word>,
    definitions: Vec<(Gen, Word)>,
}

impl<'a> Builder<'a> {
    fn new(input: &'a FibreInput) -> Result<Self> {
        let mut b = Builder {
            input,
            alphabet: Alphabet::default(),
            coords: Vec::new(),
            hats: Vec::new(),
            extended: HashMap::new(),
            definitions: Vec::new(),
        };
        let gamma = input.first.gamma.alphabet();
        for &k in &input.first.kernel {
            let g = b.push(format!("u_{}", gamma.name(k)), (Word::gen(k), Word::empty()))?;
            b.hats.push(g);
        }
        Ok(b)
    }

    fn push(&mut self, name: String, coord: (Word, Word)) -> Result<Gen> {
        let g = self.alphabet.push(&name)?;
        self.coords.push(coord);
        Ok(g)
    }

    /// A `P`-word for `p b p^-1`, `p` reduced over Q's generators.
    fn conj(&mut self, p: &Word, b: usize) -> Result<Word> {
        if p.is_empty() {
            return Ok(Word::gen(self.hats[b]));
        }
        if let Some(w) = self.extended.get(&(p.clone(), b)) {
            return Ok(w.clone());
        }
        let (prefix, last) = p.split_at_letter(p.letter_len() - 1);
        let letter = last.letters()[0];
        let first = &self.input.first;
        let side = usize::from(!letter.is_positive());
        let inner = first.conj[letter.gen().index()][side][b].clone();
        let body = self.conj_kernel_word(&prefix, &inner)?;
        let w = if body.letter_len() <= 1 {
            body
        } else {
            let k = self.definitions.len() + 1;
            let name = format!("u{k}_{}", first.gamma.alphabet().name(first.kernel[b]));
            let coord = Word::gen(first.kernel[b]).conjugate_by(p);
            let g = self.push(name, (coord, Word::empty()))?;
            self.definitions.push((g, body));
            Word::gen(g)
        };
        self.extended.insert((p.clone(), b), w.clone());
        Ok(w)
    }

    /// `p v p^-1` for an A-word `v`.
    fn conj_kernel_word(&mut self, p: &Word, v: &Word) -> Result<Word> {
        let mut out = Word::empty();
        for r in v.runs() {
            let b = self.input.first.kernel_index(r.gen).expect("A-word");
            out = out.mul(&self.conj(p, b)?.pow(r.exp));
        }
        Ok(out)
    }

    fn kernel_express(&mut self, w: &Word) -> Result<Word> {
        let first = &self.input.first;
        let mut skeleton = Word::empty();
        let mut out = Word::empty();
        for r in w.runs() {
            match first.kernel_index(r.gen) {
                Some(b) => out = out.mul(&self.conj(&skeleton, b)?.pow(r.exp)),
                None => skeleton = skeleton.mul(&Word::power_of(r.gen, r.exp)),
            }
        }
        if skeleton.is_empty() {
            return Ok(out);
        }
        let q = &first.quotient;
        let cert = self.input.q_solver.van_kampen(&skeleton)?.ok_or_else(|| {
            Error::NeedsVanKampen(format!("{} is not certified trivial in {}", q.format(&skeleton), q.label()))
        })?;
        let mut factors = Vec::new();
        for step in cert.steps {
            match step {
                Step::FreeReduce => {}
                Step::Relator { index, sign, conj } => factors.push((index, sign, conj.free_reduce())),
                other => {
                    return Err(Error::NeedsVanKampen(format!(
                        "certificate step {other:?} is not a relator application"
                    )))
                }
            }
        }
        for (index, sign, c) in factors.into_iter().rev() {
            let u = first.rel_words[index].pow(-i64::from(sign));
            out = out.mul(&self.conj_kernel_word(&c, &u)?);
        }
        Ok(out)
    }
}

/// `K(w)` for `w` in the kernel of `π₀`, over the generators `â` of the
/// returned alphabet together with any extended generators it needed.
pub fn kernel_express(input: &FibreInput, w: &Word) -> Result<(Alphabet, Word)> {
    let mut b = Builder::new(input)?;
    let out = b.kernel_express(w)?;
    Ok((b.alphabet, out))
}

pub fn emit_fibre(input: &FibreInput) -> Result<FibrePresentation> {
    if !input.q_aspherical {
        return Err(Error::NonAspherical);
    }
    let mut b = Builder::new(input)?;
    let gamma2 = &input.gamma2;
    let mut lift_gens = Vec::with_capacity(gamma2.num_gens());
    for (j, y) in gamma2.alphabet().gens().enumerate() {
        let g = b.push(format!("d_{}", gamma2.alphabet().name(y)), (input.lifts[j].clone(), Word::gen(y)))?;
        lift_gens.push(g);
    }
    let to_d = |s: &Word| s.rename(|y| lift_gens[y.index()]);

    let mut rels: Vec<(Family, Word)> = Vec::new();
    for (i, s) in gamma2.rels().iter().enumerate() {
        let k = b.kernel_express(&input.lift_word(s))?;
        rels.push((Family::Lift { relator: i }, to_d(s).mul(&k.inverse())));
    }
    for (j, &dj) in lift_gens.iter().enumerate() {
        let d = Word::gen(dj);
        for a in 0..input.first.kernel.len() {
            for inverse in [false, true] {
                let (dc, lc) = if inverse {
                    (d.inverse(), input.lifts[j].inverse())
                } else {
                    (d.clone(), input.lifts[j].clone())
                };
                let k = b.kernel_express(&Word::gen(input.first.kernel[a]).conjugate_by(&lc))?;
                let lhs = Word::gen(b.hats[a]).conjugate_by(&dc);
                rels.push((Family::Conjugation { generator: j, kernel: a, inverse }, lhs.mul(&k.inverse())));
            }
        }
    }
    for (index, e) in input.extra.iter().enumerate() {
        if !e.runs().iter().all(|r| input.first.kernel_index(r.gen).is_some()) {
            return Err(Error::Invalid(format!("extra relator {index} is not a word over the kernel generators")));
        }
        rels.push((Family::Extra { index }, b.kernel_express(e)?));
    }
    for (g, body) in &b.definitions {
        rels.push((Family::Definition { generator: g.index() }, Word::gen(*g).mul(&body.inverse())));
    }

    let mut seen = HashSet::new();
    let mut provenance = Vec::new();
    let mut relators = Vec::new();
    for (family, r) in rels {
        let r = r.free_reduce();
        if r.is_empty() || !seen.insert(r.cyclic_canonical()) {
            continue;
        }
        provenance.push(family);
        relators.push(r);
    }

    let coords = b.coords;
    let certificate_steps = certify(input, &coords, &relators, &b.alphabet, |i| provenance[i].to_string())?;
    let pres = Presentation::new(
        Some(format!("P({}, {})", input.first.gamma.label(), gamma2.label())),
        b.alphabet,
        relators,
    )?;
    Ok(FibrePresentation {
        pres: Arc::new(pres),
        coords,
        provenance,
        kernel_gens: b.hats,
        lift_gens,
        certificate_steps,
    })
}

fn coordinates(coords: &[(Word, Word)], r: &Word) -> (Word, Word) {
    let mut first = Word::empty();
    let mut second = Word::empty();
    for run in r.runs() {
        let (u, v) = &coords[run.gen.index()];
        first = first.mul(&u.pow(run.exp));
        second = second.mul(&v.pow(run.exp));
    }
    (first, second)
}

fn certified_steps(solver: &dyn WordProblem, w: &Word) -> Result<Option<usize>> {
    if w.is_empty() {
        return Ok(Some(0));
    }
    Ok(match solver.audited(w)? {
        Verdict::Trivial(c) => Some(c.len()),
        _ => None,
    })
}

/// Both coordinates of every relator, checked concurrently.
fn certify(
    input: &FibreInput,
    coords: &[(Word, Word)],
    relators: &[Word],
    alphabet: &Alphabet,
    origin: impl Fn(usize) -> String + Sync,
) -> Result<Vec<(usize, usize)>> {
    relators
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let (u, v) = coordinates(coords, r);
            let s1 = certified_steps(input.first.solver.as_ref(), &u)?;
            let s2 = certified_steps(input.solver2.as_ref(), &v)?;
            match (s1, s2) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(Error::CertificationFailed(format!(
                    "relator {i} ({}) {}: first coordinate {}, second coordinate {}",
                    origin(i),
                    alphabet.format(r),
                    if s1.is_some() { "certified" } else { "not certified" },
                    if s2.is_some() { "certified" } else { "not certified" },
                ))),
            }
        })
        .collect()
}

/// Re-checks both coordinates of every relator of `pres` under `coords`,
/// e.g. after reading both back from disk. Returns certificate lengths.
pub fn certify_relators(
    input: &FibreInput,
    pres: &Presentation,
    coords: &[(Word, Word)],
) -> Result<Vec<(usize, usize)>> {
    if coords.len() != pres.num_gens() {
        return Err(Error::Invalid(format!("{} coordinates for {} generators", coords.len(), pres.num_gens())));
    }
    certify(input, coords, pres.rels(), pres.alphabet(), |_| "reloaded".to_string())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unknown => "unknown",
        }
    }

    fn all(items: impl IntoIterator<Item = Status>) -> Status {
        let mut out = Status::Pass;
        for s in items {
            match s {
                Status::Fail => return Status::Fail,
                Status::Unknown => out = Status::Unknown,
                Status::Pass => {}
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubdirectReport {
    /// Every generator of `Γ₂` is a second coordinate.
    pub onto_second: Status,
    /// Every `b ∈ A` is a first coordinate and non-trivial in `Γ`.
    pub kernel_in_first: Status,
    /// `π₀(first) = f₂(second)` for every `d_j`.
    pub compatible: Status,
    pub notes: Vec<String>,
    pub passed: bool,
}

pub fn verify_subdirect(input: &FibreInput, fp: &FibrePresentation) -> SubdirectReport {
    let mut notes = Vec::new();
    let gamma2 = &input.gamma2;
    let onto_second = Status::all(gamma2.alphabet().gens().map(|y| {
        if fp.coords.iter().any(|(_, v)| *v == Word::gen(y)) {
            Status::Pass
        } else {
            notes.push(format!("{} is not a second coordinate", gamma2.alphabet().name(y)));
            Status::Fail
        }
    }));

    let first = &input.first;
    let kernel_in_first = Status::all(first.kernel.iter().map(|&b| {
        let name = first.gamma.alphabet().name(b);
        if !fp.coords.iter().any(|(u, v)| *u == Word::gen(b) && v.is_empty()) {
            notes.push(format!("({name}, 1) is not the image of a generator"));
            return Status::Fail;
        }
        match first.solver.decide(&Word::gen(b)) {
            Ok(Verdict::NonTrivial) => Status::Pass,
            Ok(Verdict::Trivial(_)) => {
                notes.push(format!("{name} is trivial in {}", first.gamma.label()));
                Status::Fail
            }
            _ => {
                notes.push(format!("non-triviality of {name} undecided"));
                Status::Unknown
            }
        }
    }));

    let q = &first.quotient;
    let compatible = Status::all(fp.lift_gens.iter().map(|&g| {
        let (u, v) = &fp.coords[g.index()];
        let image = match input.f2.substitute(v) {
            Ok(w) => w,
            Err(e) => {
                notes.push(e.to_string());
                return Status::Fail;
            }
        };
        let diff = first.project(u).mul(&image.inverse());
        match input.q_solver.van_kampen(&diff) {
            Ok(Some(_)) => Status::Pass,
            _ => {
                notes.push(format!(
                    "{}: {} not certified trivial in {}",
                    fp.pres.alphabet().name(g),
                    q.format(&diff),
                    q.label()
                ));
                Status::Fail
            }
        }
    }));

    let passed = [onto_second, kernel_in_first, compatible].iter().all(|&s| s == Status::Pass);
    SubdirectReport { onto_second, kernel_in_first, compatible, notes, passed }
}

/// `⟨x, a | x a x^-1 a^-1⟩ -> ⟨x | ⟩` against `y -> x` on `⟨y | ⟩`; the fibre
/// product is `Z^2`.
pub fn toy_free() -> Result<FibreInput> {
    let gamma = Arc::new(Presentation::from_names("G", ["x", "a"], &["x a x^-1 a^-1"])?);
    let q = Arc::new(Presentation::from_names("Z", ["x"], &[])?);
    let a = Word::gen(Gen(1));
    let solver = Arc::new(GraphSolver { group: GraphGroup::from_presentation(&gamma)? });
    let first = FirstFactor::new(gamma, q.clone(), vec![[vec![a.clone()], vec![a]]], vec![], solver)?;
    let gamma2 = Arc::new(Presentation::from_names("Y", ["y"], &[])?);
    let solver2 = Arc::new(GraphSolver { group: GraphGroup::from_presentation(&gamma2)? });
    let f2 = GenMap::new(gamma2.clone(), q, vec![Word::gen(Gen(0))])?;
    Ok(FibreInput::new(first, gamma2, solver2, f2)?.aspherical(true))
}

/// `⟨x, a | x, x a x^-1 a^-1⟩ -> ⟨x | x⟩` against `⟨y | y⟩`; the fibre
/// product is the kernel, `Z`.
pub fn toy_trivial() -> Result<FibreInput> {
    let gamma = Arc::new(Presentation::from_names("G1", ["x", "a"], &["x", "x a x^-1 a^-1"])?);
    let q = Arc::new(Presentation::from_names("T", ["x"], &["x"])?);
    let a = Word::gen(Gen(1));
    let solver = Arc::new(VanKampenSolver::new(gamma.clone()));
    let first = FirstFactor::new(gamma, q.clone(), vec![[vec![a.clone()], vec![a]]], vec![Word::empty()], solver)?;
    let gamma2 = Arc::new(Presentation::from_names("Y1", ["y"], &["y"])?);
    let solver2 = Arc::new(VanKampenSolver::new(gamma2.clone()));
    let f2 = GenMap::new(gamma2.clone(), q, vec![Word::gen(Gen(0))])?;
    Ok(FibreInput::new(first, gamma2, solver2, f2)?.aspherical(true))
}

/// The two families of fibre products `P_n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Pipeline {
    /// `Γ = Γ₂ = Rips(Q)`, `f₂ = Ψ^n ∘ π₀`.
    A,
    /// `Γ = Rips(B)`, `Γ₂ = Λ`, `f₂ = q_n`.
    B,
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Pipeline::A),
            "B" | "b" => Ok(Pipeline::B),
            _ => Err(Error::Invalid(format!("unknown pipeline `{s}` (A or B)"))),
        }
    }
}

impl Pipeline {
    pub fn rips(self) -> Result<RipsOutput> {
        let q = match self {
            Pipeline::A => build(Builtin::Q),
            Pipeline::B => build(Builtin::B),
        };
        rips_construct(q, &RipsParams::default())
    }

    pub fn input(self, rips: &RipsOutput, n: u32) -> Result<FibreInput> {
        let first = FirstFactor::from_rips(rips);
        let input = match self {
            Pipeline::A => {
                let f2 = GenMap::compose(&big_psi_power(n)?, &rips.pi0)?;
                FibreInput::new(first, rips.gamma.clone(), rips.solver.clone(), f2)?.with_q_solver(q_backend())?
            }
            Pipeline::B => {
                let lambda = build(Builtin::Lambda);
                let solver2 = Arc::new(GraphSolver { group: GraphGroup::from_presentation(&lambda)? });
                let b = rips.quotient.clone();
                let vk = VanKampenSolver::new(b.clone()).with_vertex(b.gen("a1")?, b.gen("t1")?, 0)?;
                FibreInput::new(first, lambda, solver2, qn(n)?)?.with_q_solver(vk)?
            }
        };
        Ok(input.aspherical(true))
    }
}

/// `P_0, ..., P_{n_max}` by the same procedure for each `n`.
pub fn emit_series(pipeline: Pipeline, n_max: u32) -> Result<Vec<(FibreInput, FibrePresentation)>> {
    let rips = pipeline.rips()?;
    (0..=n_max)
        .map(|n| {
            let input = pipeline.input(&rips, n)?;
            let fp = emit_fibre(&input)?;
            Ok((input, fp))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::h1;

    #[test]
    fn toy_free_is_z2() {
        let input = toy_free().unwrap();
        let fp = emit_fibre(&input).unwrap();
        assert_eq!(fp.pres.num_gens(), 2);
        assert_eq!(fp.pres.num_rels(), 1);
        assert_eq!(h1(&fp.pres).to_string(), "Z^2");
        assert!(verify_subdirect(&input, &fp).passed);
    }

    #[test]
    fn toy_trivial_is_z() {
        let input = toy_trivial().unwrap();
        let fp = emit_fibre(&input).unwrap();
        assert_eq!(fp.pres.num_gens(), 2);
        assert_eq!(fp.pres.num_rels(), 2);
        assert_eq!(h1(&fp.pres).to_string(), "Z");
    }

    #[test]
    fn kernel_words_pass_through() {
        let input = toy_free().unwrap();
        let w = input.first.gamma.word("a^2 a^-1").unwrap();
        let (al, k) = kernel_express(&input, &w).unwrap();
        assert_eq!(al.format(&k), "u_a");
    }

    #[test]
    fn recovered_table_matches_rips() {
        let rips = rips_construct(build(Builtin::B), &RipsParams::default()).unwrap();
        let direct = FirstFactor::from_rips(&rips);
        let back = FirstFactor::recover(rips.gamma.clone(), rips.quotient.clone(), rips.solver.clone()).unwrap();
        assert_eq!(direct.conj, back.conj);
        assert_eq!(direct.rel_words, back.rel_words);
    }

    #[test]
    fn non_aspherical_rejected() {
        let input = toy_free().unwrap().aspherical(false);
        assert!(matches!(emit_fibre(&input), Err(Error::NonAspherical)));
    }

    #[test]
    fn wrong_lift_cannot_be_expressed() {
        let input = toy_trivial().unwrap();
        let x = input.first.gamma.word("x").unwrap();
        let input = input.with_lifts(vec![x.pow(2)]).unwrap();
        assert!(emit_fibre(&input).is_ok());
        let toy = toy_free().unwrap();
        let bad = toy.with_lifts(vec![Word::empty()]).unwrap();
        let fp = emit_fibre(&bad).unwrap();
        let report = verify_subdirect(&bad, &fp);
        assert_eq!(report.compatible, Status::Fail);
    }
}
