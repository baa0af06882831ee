//! Word problem in `BS(p, q) = <a, t | t a^p t^-1 = a^q>` via Britton's lemma.
//!
//! Words are handled in syllable form `a^k0 t^e1 a^k1 ... t^en a^kn`. A
//! pinch removes `t a^(pm) t^-1 -> a^(qm)` or `t^-1 a^(qm) t -> a^(pm)`
//! acting on the exponent directly, so `a^(2^n)` never gets expanded.
//! After all pinches, exponents are pushed rightwards past each stable
//! letter until every exponent left of a `t` lies in `[0, |q|)` and every
//! exponent left of a `t^-1` lies in `[0, |p|)`. The result is the unique
//! normal form of the element.

use crate::certificate::{Certificate, Rules, Step};
use crate::error::{Error, Result};
use crate::word::{Gen, Run, Word};

use super::{Verdict, WordProblem};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BsGroup {
    pub p: i64,
    pub q: i64,
    pub a: Gen,
    pub t: Gen,
}

impl BsGroup {
    pub fn new(p: i64, q: i64, a: Gen, t: Gen) -> Self {
        assert!(p != 0 && q != 0, "BS(p, q) needs non-zero p and q");
        assert!(a != t);
        BsGroup { p, q, a, t }
    }

    /// Recognizes `<a, t | t a^p t^-1 a^-q>` (any generator names).
    pub fn from_presentation(pres: &crate::presentation::Presentation) -> Result<Self> {
        let bad = || {
            Error::Invalid(format!(
                "{} is not a one-relator presentation <a, t | t a^p t^-1 a^-q>",
                pres.label()
            ))
        };
        if pres.num_gens() != 2 || pres.num_rels() != 1 {
            return Err(bad());
        }
        let r = &pres.rels()[0];
        // The stored relator is cyclically reduced; try every rotation.
        let n = r.runs().len();
        if n != 4 {
            return Err(bad());
        }
        for s in 0..n {
            let rot: Vec<Run> = (0..n).map(|i| r.runs()[(s + i) % n]).collect();
            for runs in [rot.clone(), Word::from_runs(rot).inverse().into_runs()] {
                let [r0, r1, r2, r3] = runs[..] else { continue };
                if r0.exp == 1 && r2.exp == -1 && r0.gen == r2.gen && r1.gen == r3.gen && r0.gen != r1.gen {
                    return Ok(BsGroup::new(r1.exp, -r3.exp, r1.gen, r0.gen));
                }
            }
        }
        Err(bad())
    }

    /// The defining relator `t a^p t^-1 a^-q`.
    pub fn relator(&self) -> Word {
        Word::from_runs(vec![
            Run::new(self.t, 1),
            Run::new(self.a, self.p),
            Run::new(self.t, -1),
            Run::new(self.a, -self.q),
        ])
    }

    pub fn rules(&self) -> Rules<'static> {
        Rules { bs: Some(*self), ..Rules::default() }
    }

    /// Pinches only; the result is t-reduced but not yet normalized.
    pub fn t_reduce(&self, w: &Word) -> Result<(Syllables, Vec<Step>)> {
        let input = Syllables::from_word(self, &w.free_reduce())?;
        let mut stack = Syllables { a: vec![input.a[0]], t: Vec::new() };
        let mut steps = Vec::new();
        for (i, &e) in input.t.iter().enumerate() {
            let next_a = input.a[i + 1];
            let m = stack.t.len();
            if m > 0 && stack.t[m - 1] == -e && self.pinchable(stack.t[m - 1], stack.a[m]) {
                // The incoming letter is the (m)-th stable letter of the
                // current word, the top of the stack the (m-1)-th.
                steps.push(Step::Pinch { at: m - 1 });
                let inner = stack.a.pop().expect("syllable stack");
                let sign = stack.t.pop().expect("syllable stack");
                let converted = self.convert(sign, inner).ok_or(Error::Overflow)?;
                let top = stack.a.last_mut().expect("syllable stack");
                *top = top
                    .checked_add(converted)
                    .and_then(|v| v.checked_add(next_a))
                    .ok_or(Error::Overflow)?;
            } else {
                stack.t.push(e);
                stack.a.push(next_a);
            }
        }
        Ok((stack, steps))
    }

    fn pinchable(&self, first: i8, inner: i64) -> bool {
        if first > 0 {
            inner % self.p == 0
        } else {
            inner % self.q == 0
        }
    }

    /// Exponent after pinching `t^first a^inner t^-first`.
    fn convert(&self, first: i8, inner: i64) -> Option<i64> {
        if first > 0 {
            (inner / self.p).checked_mul(self.q)
        } else {
            (inner / self.q).checked_mul(self.p)
        }
    }

    /// Normal form plus a certificate (pinches then shifts) that replays
    /// the input to it.
    pub fn britton_nf(&self, w: &Word) -> Result<(Word, Certificate)> {
        let (mut syl, mut steps) = self.t_reduce(w)?;
        for i in 0..syl.t.len() {
            let modulus = if syl.t[i] > 0 { self.q } else { self.p };
            let r = syl.a[i].rem_euclid(modulus.abs());
            let by = (syl.a[i] - r) / modulus;
            if by != 0 {
                syl.shift(self, i, by).map_err(|_| Error::Overflow)?;
                steps.push(Step::Shift { at: i, by });
            }
        }
        Ok((syl.to_word(self).free_reduce(), Certificate { steps }))
    }

    pub fn is_trivial(&self, w: &Word) -> Result<bool> {
        let (syl, _) = self.t_reduce(w)?;
        Ok(syl.t.is_empty() && syl.a[0] == 0)
    }

    /// For a trivial word, a certificate of relator applications (against
    /// relator `index` of some presentation, which must be
    /// `t a^p t^-1 a^-q`) that replays `w` to the empty word.
    pub fn relator_certificate(&self, w: &Word, index: usize) -> Result<Option<Certificate>> {
        let (_, pinches) = self.t_reduce(w)?;
        let mut cur = Syllables::from_word(self, &w.free_reduce())?;
        let mut cert = Certificate::new();
        for step in &pinches {
            let Step::Pinch { at } = *step else { unreachable!() };
            let first = cur.t[at];
            let inner = cur.a[at + 1];
            let m = if first > 0 { inner / self.p } else { inner / self.q };
            let y = cur.suffix_after_pair(self, at);
            let l = Word::from_runs(vec![
                Run::new(self.t, first as i64),
                Run::new(self.a, inner),
                Run::new(self.t, -(first as i64)),
            ])
            .free_reduce();
            let factors = self.pinch_factors(first, m);
            let prefix = y.inverse().mul(&l.inverse());
            for (c, s) in factors.into_iter().rev() {
                cert.push(Step::Relator { index, sign: -s, conj: prefix.mul(&c) });
            }
            cur.pinch(self, at).map_err(Error::Invalid)?;
        }
        if cur.t.is_empty() && cur.a[0] == 0 {
            Ok(Some(cert))
        } else {
            Ok(None)
        }
    }

    /// `(conj, sign)` pairs whose product of `conj r^sign conj^-1` equals
    /// `L M^-1`, where `L = t^e a^k t^-e` is pinchable with quotient `m`.
    fn pinch_factors(&self, first: i8, m: i64) -> Vec<(Word, i8)> {
        let a = |e: i64| Word::power_of(self.a, e);
        // R_n = t a^(pn) t^-1 a^(-qn) for n > 0.
        let forward = |n: i64| -> Vec<(Word, i8)> { (0..n).map(|j| (a(self.q * j), 1)).collect() };
        let invert = |f: Vec<(Word, i8)>| -> Vec<(Word, i8)> {
            f.into_iter().rev().map(|(c, s)| (c, -s)).collect()
        };
        let conj_all = |f: Vec<(Word, i8)>, by: &Word| -> Vec<(Word, i8)> {
            f.into_iter().map(|(c, s)| (by.mul(&c), s)).collect()
        };
        // R_m for any integer m.
        let r_m = |m: i64| -> Vec<(Word, i8)> {
            if m >= 0 {
                forward(m)
            } else {
                let n = -m;
                conj_all(invert(forward(n)), &a(-self.q * n))
            }
        };
        if first > 0 {
            r_m(m)
        } else {
            conj_all(invert(r_m(m)), &Word::power_of(self.t, -1))
        }
    }
}

/// `a^k0 t^e1 a^k1 ... t^en a^kn` with each `e_i = ±1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syllables {
    pub a: Vec<i64>,
    pub t: Vec<i8>,
}

impl Syllables {
    pub fn from_word(bs: &BsGroup, w: &Word) -> Result<Self> {
        let mut syl = Syllables { a: vec![0], t: Vec::new() };
        for r in w.runs() {
            if r.gen == bs.a {
                let last = syl.a.last_mut().expect("non-empty");
                *last = last.checked_add(r.exp).ok_or(Error::Overflow)?;
            } else if r.gen == bs.t {
                let s = r.exp.signum() as i8;
                for _ in 0..r.exp.unsigned_abs() {
                    syl.t.push(s);
                    syl.a.push(0);
                }
            } else {
                return Err(Error::AlphabetMismatch(format!(
                    "generator {} is neither the base nor the stable letter",
                    r.gen.0
                )));
            }
        }
        Ok(syl)
    }

    /// The word spelled syllable by syllable, without free reduction, so
    /// that `t a^0 t^-1` stays visible to the next pinch.
    pub fn to_word(&self, bs: &BsGroup) -> Word {
        let mut runs = Vec::with_capacity(2 * self.t.len() + 1);
        if self.a[0] != 0 {
            runs.push(Run::new(bs.a, self.a[0]));
        }
        for (i, &e) in self.t.iter().enumerate() {
            runs.push(Run::new(bs.t, e as i64));
            if self.a[i + 1] != 0 {
                runs.push(Run::new(bs.a, self.a[i + 1]));
            }
        }
        Word::from_runs(runs)
    }

    pub fn num_stable(&self) -> usize {
        self.t.len()
    }

    /// The word after the `(at+1)`-th stable letter.
    fn suffix_after_pair(&self, bs: &BsGroup, at: usize) -> Word {
        Syllables { a: self.a[at + 2..].to_vec(), t: self.t[at + 2..].to_vec() }.to_word(bs)
    }

    pub fn pinch(&mut self, bs: &BsGroup, at: usize) -> std::result::Result<(), String> {
        if at + 1 >= self.t.len() {
            return Err(format!("no stable-letter pair at {at}"));
        }
        let first = self.t[at];
        if self.t[at + 1] != -first {
            return Err(format!("stable letters {at} and {} have the same sign", at + 1));
        }
        let inner = self.a[at + 1];
        if !bs.pinchable(first, inner) {
            return Err(format!("exponent {inner} is not in the associated subgroup"));
        }
        let conv = bs.convert(first, inner).ok_or("exponent overflow")?;
        let merged = self.a[at]
            .checked_add(conv)
            .and_then(|v| v.checked_add(self.a[at + 2]))
            .ok_or("exponent overflow")?;
        self.a.splice(at..at + 3, [merged]);
        self.t.drain(at..at + 2);
        Ok(())
    }

    pub fn shift(&mut self, bs: &BsGroup, at: usize, by: i64) -> std::result::Result<(), String> {
        if at >= self.t.len() {
            return Err(format!("no stable letter at {at}"));
        }
        let (out, inn) = if self.t[at] > 0 { (bs.q, bs.p) } else { (bs.p, bs.q) };
        let take = out.checked_mul(by).ok_or("exponent overflow")?;
        let give = inn.checked_mul(by).ok_or("exponent overflow")?;
        self.a[at] = self.a[at].checked_sub(take).ok_or("exponent overflow")?;
        self.a[at + 1] = self.a[at + 1].checked_add(give).ok_or("exponent overflow")?;
        Ok(())
    }
}

/// Full decider for `BS(p, q)`.
#[derive(Clone, Debug)]
pub struct BrittonSolver {
    pub group: BsGroup,
}

impl WordProblem for BrittonSolver {
    fn name(&self) -> &str {
        "britton"
    }

    fn decide(&self, w: &Word) -> Result<Verdict> {
        let (nf, cert) = self.group.britton_nf(w)?;
        Ok(if nf.is_empty() { Verdict::Trivial(cert) } else { Verdict::NonTrivial })
    }

    fn rules(&self) -> Rules<'_> {
        self.group.rules()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Alphabet;

    fn setup() -> (Alphabet, BsGroup) {
        let al = Alphabet::new(["a", "t"]).unwrap();
        (al, BsGroup::new(2, 3, Gen(0), Gen(1)))
    }

    fn w(al: &Alphabet, s: &str) -> Word {
        crate::text::parse_word(al, s).unwrap()
    }

    #[test]
    fn relation_pinches_to_a_cubed() {
        let (al, bs) = setup();
        let input = w(&al, "t a^2 t^-1");
        let (nf, cert) = bs.britton_nf(&input).unwrap();
        assert_eq!(al.format(&nf), "a^3");
        assert_eq!(cert.replay(&input, &bs.rules()).unwrap(), nf);
    }

    #[test]
    fn commutator_c_is_nontrivial_and_psi_c_trivial() {
        let (al, bs) = setup();
        let c = w(&al, "a t a t^-1 a^-1 t a^-1 t^-1");
        let (nf, _) = bs.t_reduce(&c).unwrap();
        assert_eq!(nf.num_stable(), 4);
        assert!(!bs.is_trivial(&c).unwrap());
        let psi_c = w(&al, "a^2 t a^2 t^-1 a^-2 t a^-2 t^-1");
        let (nf, cert) = bs.britton_nf(&psi_c).unwrap();
        assert!(nf.is_empty());
        assert_eq!(cert.steps.iter().filter(|s| matches!(s, Step::Pinch { .. })).count(), 2);
        assert!(cert.proves_trivial(&psi_c, &bs.rules()));
    }

    #[test]
    fn small_triviality_examples() {
        let (al, bs) = setup();
        assert!(bs.is_trivial(&w(&al, "t a^2 t^-1 a^-3")).unwrap());
        assert!(!bs.is_trivial(&w(&al, "t")).unwrap());
        assert!(!bs.is_trivial(&w(&al, "t a t^-1 a^-1 a^-1 a^1")).unwrap());
    }

    #[test]
    fn normal_form_identifies_equal_elements() {
        let (al, bs) = setup();
        let (u, _) = bs.britton_nf(&w(&al, "a^3 t")).unwrap();
        let (v, _) = bs.britton_nf(&w(&al, "t a^2")).unwrap();
        assert_eq!(u, v);
        assert_eq!(al.format(&u), "t a^2");
    }

    #[test]
    fn mutated_input_breaks_pinch_replay() {
        let (al, bs) = setup();
        let (_, cert) = bs.britton_nf(&w(&al, "t a^2 t^-1")).unwrap();
        let err = cert.replay(&w(&al, "t a t^-1"), &bs.rules()).unwrap_err();
        assert!(matches!(err, Error::CorruptCertificate { .. }));
    }

    #[test]
    fn huge_exponents_stay_cheap() {
        let (al, bs) = setup();
        let big = 1i64 << 40;
        let input = Word::from_runs(vec![
            Run::new(Gen(1), 1),
            Run::new(Gen(0), big),
            Run::new(Gen(1), -1),
        ]);
        let (nf, _) = bs.britton_nf(&input).unwrap();
        assert_eq!(al.format(&nf), format!("a^{}", 3 * (big / 2)));
    }

    #[test]
    fn relator_certificates_replay() {
        let (al, bs) = setup();
        let rels = vec![bs.relator()];
        let rules = Rules { relators: Some(&rels), ..Rules::default() };
        for s in [
            "t a^2 t^-1 a^-3",
            "t a^4 t^-1 a^-6",
            "t a^-4 t^-1 a^6",
            "t^-1 a^3 t a^-2",
            "t^-1 a^-6 t a^4",
            "a^2 t a^2 t^-1 a^-2 t a^-2 t^-1",
            "t t a^4 t^-1 t^-1 a^-9",
            "a t^-1 a^9 t a^-7",
        ] {
            let input = w(&al, s);
            let cert = bs.relator_certificate(&input, 0).unwrap().expect(s);
            assert!(cert.proves_trivial(&input, &rules), "{s}");
        }
        assert!(bs.relator_certificate(&w(&al, "t a t^-1"), 0).unwrap().is_none());
    }
}
