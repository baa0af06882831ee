//! The Rips construction as a presentation compiler.
//!
//! From `Q = <X | R>` build `Γ = <X ∪ A | r_i U_i^-1, x a x^-1 W^-1,
//! x^-1 a x W'^-1>` with `A = {A1, A2}`. Every `U`, `W`, `W'` is a block
//! word `A1 A2^e1 A1 A2^e2 ... A1 A2^eL`; the exponent sequences are
//! consecutive windows of one de Bruijn cycle, so no ordered pair of
//! neighbouring exponents occurs twice anywhere. That bounds every piece by
//! roughly three exponent runs, while relator length grows with `L`. The
//! metric condition is then checked, not assumed: on failure `L` doubles.

use std::sync::Arc;

use log::info;

use crate::error::{Error, Result};
use crate::presentation::{GenMap, Presentation};
use crate::smallcanc::DehnSolver;
use crate::word::{Alphabet, Gen, Run, Word};

/// De Bruijn cycle of order 2 over `{1..=m}`: length `m^2`, and read
/// cyclically every ordered pair occurs exactly once.
pub fn de_bruijn(m: u32) -> Vec<u32> {
    fn rec(t: usize, p: usize, k: u32, a: &mut [u32; 3], out: &mut Vec<u32>) {
        if t > 2 {
            if 2 % p == 0 {
                out.extend_from_slice(&a[1..=p]);
            }
        } else {
            a[t] = a[t - p];
            rec(t + 1, p, k, a, out);
            for j in a[t - p] + 1..k {
                a[t] = j;
                rec(t + 1, t, k, a, out);
            }
        }
    }
    if m == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity((m * m) as usize);
    rec(1, 1, m, &mut [0; 3], &mut out);
    out.into_iter().map(|x| x + 1).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct RipsParams {
    /// Number of `A1 A2^e` factors per block word.
    pub block_length: usize,
    /// Largest exponent `e`; `None` picks the least range that fits.
    pub exponent_range: Option<u32>,
    /// Escalation stops once `block_length` would exceed this.
    pub max_block_length: usize,
}

impl Default for RipsParams {
    fn default() -> Self {
        RipsParams { block_length: 10, exponent_range: None, max_block_length: 1280 }
    }
}

/// `Γ` together with the data needed to rewrite kernel elements.
#[derive(Clone, Debug)]
pub struct RipsOutput {
    pub gamma: Arc<Presentation>,
    pub quotient: Arc<Presentation>,
    /// `Γ`'s generators `0..x_count` are those of the quotient.
    pub x_count: usize,
    pub kernel: Vec<Gen>,
    pub pi0: GenMap,
    /// `conj[x][0][a]` is `x a x^-1` as an A-word, `conj[x][1][a]` is
    /// `x^-1 a x`.
    conj: Vec<[Vec<Word>; 2]>,
    /// `r_i = U_i` in `Γ`.
    rel_words: Vec<Word>,
    /// Block length and exponent range actually used.
    pub block_length: usize,
    pub exponent_range: u32,
    pub solver: Arc<DehnSolver>,
}

fn kernel_name(al: &Alphabet, base: &str) -> String {
    let mut name = base.to_string();
    while al.get(&name).is_some() {
        name.push('_');
    }
    name
}

pub fn rips_construct(q: Arc<Presentation>, params: &RipsParams) -> Result<RipsOutput> {
    if q.num_gens() == 0 {
        return Err(Error::Invalid("the Rips construction needs at least one generator".into()));
    }
    let mut block_length = params.block_length.max(1);
    loop {
        if block_length > params.max_block_length {
            return Err(Error::EscalationCap(format!(
                "no C'(1/6) presentation with block length up to {}",
                params.max_block_length
            )));
        }
        let out = attempt(&q, block_length, params.exponent_range)?;
        match out {
            Some(out) => return Ok(out),
            None => {
                info!("block length {block_length} fails C'(1/6); doubling");
                block_length *= 2;
            }
        }
    }
}

fn attempt(q: &Arc<Presentation>, l: usize, range: Option<u32>) -> Result<Option<RipsOutput>> {
    let nx = q.num_gens();
    let na = 2;
    let blocks_needed = q.num_rels() + 2 * nx * na;
    let need = (blocks_needed * l) as u64;
    let mut m = (need as f64).sqrt().ceil() as u32;
    while (m as u64) * (m as u64) < need {
        m += 1;
    }
    let m = m.max(range.unwrap_or(0)).max(1);
    let seq = de_bruijn(m);

    let mut alphabet = q.alphabet().clone();
    let a1 = alphabet.push(&kernel_name(q.alphabet(), "A1"))?;
    let a2 = alphabet.push(&kernel_name(&alphabet, "A2"))?;
    let kernel = vec![a1, a2];

    let block = |k: usize| -> Word {
        let mut runs = Vec::with_capacity(2 * l);
        for &e in &seq[k * l..(k + 1) * l] {
            runs.push(Run::new(a1, 1));
            runs.push(Run::new(a2, e as i64));
        }
        Word::from_runs(runs)
    };

    let mut rels = Vec::with_capacity(blocks_needed);
    let mut rel_words = Vec::with_capacity(q.num_rels());
    for (i, r) in q.rels().iter().enumerate() {
        let u = block(i);
        rels.push(r.mul(&u.inverse()));
        rel_words.push(u);
    }
    let mut conj = Vec::with_capacity(nx);
    let mut k = q.num_rels();
    for x in 0..nx {
        let xw = Word::gen(Gen(x as u32));
        let mut entry: [Vec<Word>; 2] = [Vec::new(), Vec::new()];
        for &a in &kernel {
            for (side, c) in [(0usize, xw.clone()), (1, xw.inverse())] {
                let w = block(k);
                k += 1;
                rels.push(Word::product([&c, &Word::gen(a), &c.inverse(), &w.inverse()]));
                entry[side].push(w);
            }
        }
        conj.push(entry);
    }

    let gamma = Presentation::new(Some(format!("Rips({})", q.label())), alphabet, rels)?;
    let solver = match DehnSolver::new(&gamma) {
        Ok(s) => s,
        Err(Error::UnverifiedPresentation) => return Ok(None),
        Err(e) => return Err(e),
    };
    let gamma = Arc::new(gamma);
    let mut images: Vec<Word> = (0..nx).map(|x| Word::gen(Gen(x as u32))).collect();
    images.extend(kernel.iter().map(|_| Word::empty()));
    let pi0 = GenMap::new(gamma.clone(), q.clone(), images)?;
    Ok(Some(RipsOutput {
        gamma,
        quotient: q.clone(),
        x_count: nx,
        kernel,
        pi0,
        conj,
        rel_words,
        block_length: l,
        exponent_range: m,
        solver: Arc::new(solver),
    }))
}

impl RipsOutput {
    pub fn is_kernel_gen(&self, g: Gen) -> bool {
        g.index() >= self.x_count
    }

    /// Position of `g` in the kernel list.
    pub fn kernel_index(&self, g: Gen) -> Option<usize> {
        self.kernel.iter().position(|&k| k == g)
    }

    /// `x^s a x^-s` as an A-word (`s = +1` when `positive`).
    pub fn conj_word(&self, x: Gen, positive: bool, a: usize) -> &Word {
        &self.conj[x.index()][usize::from(!positive)][a]
    }

    /// `U_i` with `r_i = U_i` in `Γ`.
    pub fn rel_word(&self, i: usize) -> &Word {
        &self.rel_words[i]
    }

    /// Applies `x^s (.) x^-s` to an A-word letter by letter.
    pub fn conjugate_a_word(&self, x: Gen, positive: bool, v: &Word) -> Word {
        let mut out = Word::empty();
        for r in v.runs() {
            let a = self.kernel_index(r.gen).expect("A-word");
            out = out.mul(&self.conj_word(x, positive, a).pow(r.exp));
        }
        out
    }

    /// Rewrites `g a g^-1` as a word over `A`, innermost letter first.
    pub fn kernel_conjugate(&self, g: &Word, a: usize) -> Word {
        let mut v = Word::gen(self.kernel[a]);
        for l in g.free_reduce().letters().into_iter().rev() {
            if self.is_kernel_gen(l.gen()) {
                let lw = Word::power_of(l.gen(), l.sign());
                v = Word::product([&lw, &v, &lw.inverse()]);
            } else {
                v = self.conjugate_a_word(l.gen(), l.is_positive(), &v);
            }
        }
        v
    }

    /// Erasing A sends each relator of `Γ` to a relator of `Q` or to the
    /// empty word.
    pub fn pi0_freely_well_defined(&self) -> bool {
        self.gamma.rels().iter().all(|r| {
            let e = r.erase(|g| !self.is_kernel_gen(g));
            e.is_empty() || self.quotient.rels().contains(&e)
        })
    }

    /// For each generator `g` of `Γ`, each sign and each kernel generator
    /// `a`: whether Dehn certifies `g^s a g^-s = kernel_conjugate`.
    pub fn normality_checks(&self) -> Vec<(Gen, bool, usize, bool)> {
        use rayon::prelude::*;
        let mut cases = Vec::new();
        for g in self.gamma.alphabet().gens() {
            for positive in [true, false] {
                for a in 0..self.kernel.len() {
                    cases.push((g, positive, a));
                }
            }
        }
        cases
            .into_par_iter()
            .map(|(g, positive, a)| {
                let gw = Word::power_of(g, if positive { 1 } else { -1 });
                let lhs = Word::gen(self.kernel[a]).conjugate_by(&gw);
                let rhs = self.kernel_conjugate(&gw, a);
                let (ok, cert) = self.solver.dehn_is_trivial(&lhs.mul(&rhs.inverse()));
                let ok = ok && cert.proves_trivial(&lhs.mul(&rhs.inverse()), &self.solver.rules());
                (g, positive, a, ok)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn de_bruijn_pairs_are_unique() {
        for m in 1..12 {
            let s = de_bruijn(m);
            assert_eq!(s.len(), (m * m) as usize);
            let pairs: HashSet<(u32, u32)> =
                (0..s.len()).map(|i| (s[i], s[(i + 1) % s.len()])).collect();
            assert_eq!(pairs.len(), s.len());
        }
    }

    fn trivial_q() -> Arc<Presentation> {
        Arc::new(Presentation::from_names("Q", ["x"], &["x"]).unwrap())
    }

    #[test]
    fn counts_for_one_generator() {
        let out = rips_construct(trivial_q(), &RipsParams::default()).unwrap();
        assert_eq!(out.gamma.num_gens(), 3);
        assert_eq!(out.gamma.num_rels(), 5);
        assert!(out.solver.report().passed);
        assert!(out.pi0_freely_well_defined());
        assert!(out.normality_checks().iter().all(|c| c.3));
    }

    #[test]
    fn kernel_conjugate_examples() {
        let out = rips_construct(trivial_q(), &RipsParams::default()).unwrap();
        let x = Word::gen(Gen(0));
        assert_eq!(&out.kernel_conjugate(&x, 0), out.conj_word(Gen(0), true, 0));
        assert_eq!(out.kernel_conjugate(&Word::empty(), 1), Word::gen(out.kernel[1]));
        let a1 = Word::gen(out.kernel[0]);
        assert_eq!(out.kernel_conjugate(&a1, 1), Word::gen(out.kernel[1]).conjugate_by(&a1));
    }

    #[test]
    fn deterministic() {
        let a = rips_construct(trivial_q(), &RipsParams::default()).unwrap();
        let b = rips_construct(trivial_q(), &RipsParams::default()).unwrap();
        assert_eq!(crate::text::print_presentation(&a.gamma), crate::text::print_presentation(&b.gamma));
    }

    #[test]
    fn kernel_names_avoid_clashes() {
        let q = Arc::new(Presentation::from_names("Q", ["A1", "y"], &["A1 y"]).unwrap());
        let out = rips_construct(q, &RipsParams::default()).unwrap();
        assert_eq!(out.gamma.alphabet().name(out.kernel[0]), "A1_");
        assert_eq!(out.gamma.alphabet().name(out.kernel[1]), "A2");
    }
}
