//! Free-group words in run-length form.
//!
//! A [`Word`] is a sequence of [`Run`]s `(generator, exponent)`. Nothing
//! about the run vector is normalized on construction: adjacent runs may
//! share a generator and exponents may be zero. [`Word::free_reduce`]
//! produces the canonical form, in which no two adjacent runs share a
//! generator and every exponent is non-zero. That canonical form is exactly
//! the freely reduced word, so reduction never has to expand `a^(2^n)`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a generator inside an [`Alphabet`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen(pub u32);

impl Gen {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub gen: Gen,
    pub exp: i64,
}

impl Run {
    pub fn new(gen: Gen, exp: i64) -> Self {
        Run { gen, exp }
    }
}

/// A single signed letter `g` or `g^-1`, packed as `±(index + 1)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub i32);

impl Letter {
    pub fn new(gen: Gen, positive: bool) -> Self {
        let v = gen.0 as i32 + 1;
        Letter(if positive { v } else { -v })
    }

    pub fn gen(self) -> Gen {
        Gen(self.0.unsigned_abs() - 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn sign(self) -> i64 {
        if self.0 > 0 {
            1
        } else {
            -1
        }
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Total order used by shortlex comparisons: `g0 < g0^-1 < g1 < g1^-1 < ...`.
    pub fn order_key(self) -> (u32, bool) {
        (self.gen().0, !self.is_positive())
    }
}

/// Ordered, duplicate-free list of generator names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, Gen>,
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut alphabet = Alphabet::default();
        for name in names {
            alphabet.push(name.as_ref())?;
        }
        Ok(alphabet)
    }

    pub fn push(&mut self, name: &str) -> Result<Gen> {
        if !is_identifier(name) {
            return Err(Error::Invalid(format!("`{name}` is not a valid generator name")));
        }
        if self.index.contains_key(name) {
            return Err(Error::DuplicateGenerator(name.to_string()));
        }
        let g = Gen(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), g);
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<Gen> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<Gen> {
        self.get(name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> {
        (0..self.names.len() as u32).map(Gen)
    }

    /// Renders a word over this alphabet in the presentation-file syntax.
    pub fn display<'a>(&'a self, w: &'a Word) -> WordDisplay<'a> {
        WordDisplay { alphabet: self, word: w }
    }

    pub fn format(&self, w: &Word) -> String {
        self.display(w).to_string()
    }
}

pub struct WordDisplay<'a> {
    alphabet: &'a Alphabet,
    word: &'a Word,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.runs.is_empty() {
            return f.write_str("1");
        }
        for (i, run) in self.word.runs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let name = self
                .alphabet
                .names
                .get(run.gen.index())
                .map(String::as_str)
                .unwrap_or("?");
            if run.exp == 1 {
                f.write_str(name)?;
            } else {
                write!(f, "{name}^{}", run.exp)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    runs: Vec<Run>,
}

impl Word {
    pub fn empty() -> Self {
        Word { runs: Vec::new() }
    }

    /// Wraps runs verbatim; call [`Word::free_reduce`] for the reduced form.
    pub fn from_runs(runs: Vec<Run>) -> Self {
        Word { runs }
    }

    pub fn gen(g: Gen) -> Self {
        Word { runs: vec![Run::new(g, 1)] }
    }

    pub fn power_of(g: Gen, exp: i64) -> Self {
        if exp == 0 {
            Word::empty()
        } else {
            Word { runs: vec![Run::new(g, exp)] }
        }
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for l in letters {
            match runs.last_mut() {
                Some(last) if last.gen == l.gen() && last.exp.signum() == l.sign() => {
                    last.exp += l.sign()
                }
                _ => runs.push(Run::new(l.gen(), l.sign())),
            }
        }
        Word { runs }
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn into_runs(self) -> Vec<Run> {
        self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.iter().all(|r| r.exp == 0)
    }

    /// Number of letters after expanding every run.
    pub fn letter_len(&self) -> u64 {
        self.runs.iter().map(|r| r.exp.unsigned_abs()).sum()
    }

    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(self.letter_len() as usize);
        for r in &self.runs {
            let l = Letter::new(r.gen, r.exp > 0);
            out.extend(std::iter::repeat_n(l, r.exp.unsigned_abs() as usize));
        }
        out
    }

    pub fn check_alphabet(&self, size: usize) -> Result<()> {
        for r in &self.runs {
            if r.gen.index() >= size {
                return Err(Error::GenOutOfRange(r.gen.0, size));
            }
        }
        Ok(())
    }

    pub fn uses_only(&self, allowed: &[Gen]) -> bool {
        self.runs.iter().all(|r| r.exp == 0 || allowed.contains(&r.gen))
    }

    pub fn exponent_sum(&self, g: Gen) -> i64 {
        self.runs.iter().filter(|r| r.gen == g).map(|r| r.exp).sum()
    }

    pub fn is_reduced(&self) -> bool {
        self.runs.iter().all(|r| r.exp != 0)
            && self.runs.windows(2).all(|w| w[0].gen != w[1].gen)
    }

    /// Unique freely reduced representative; linear in the number of runs.
    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Run> = Vec::with_capacity(self.runs.len());
        for &r in &self.runs {
            push_run(&mut out, r);
        }
        Word { runs: out }
    }

    pub fn inverse(&self) -> Word {
        Word {
            runs: self.runs.iter().rev().map(|r| Run::new(r.gen, -r.exp)).collect(),
        }
    }

    /// Raw concatenation (no reduction).
    pub fn concat(&self, other: &Word) -> Word {
        let mut runs = self.runs.clone();
        runs.extend_from_slice(&other.runs);
        Word { runs }
    }

    /// Product in the free group, freely reduced.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.free_reduce().runs;
        for &r in &other.runs {
            push_run(&mut out, r);
        }
        Word { runs: out }
    }

    pub fn product<'a>(words: impl IntoIterator<Item = &'a Word>) -> Word {
        let mut out = Vec::new();
        for w in words {
            for &r in &w.runs {
                push_run(&mut out, r);
            }
        }
        Word { runs: out }
    }

    /// `self^k` in the free group. Single-run words stay single runs.
    pub fn pow(&self, k: i64) -> Word {
        let base = self.free_reduce();
        if k == 0 || base.runs.is_empty() {
            return Word::empty();
        }
        if base.runs.len() == 1 {
            let r = base.runs[0];
            let exp = r.exp.checked_mul(k).expect("exponent overflow in Word::pow");
            return Word::power_of(r.gen, exp);
        }
        let unit = if k > 0 { base } else { base.inverse() };
        let mut out = Vec::new();
        for _ in 0..k.unsigned_abs() {
            for &r in &unit.runs {
                push_run(&mut out, r);
            }
        }
        Word { runs: out }
    }

    /// `x y x^-1 y^-1`, freely reduced.
    pub fn commutator(x: &Word, y: &Word) -> Word {
        Word::product([x, y, &x.inverse(), &y.inverse()])
    }

    /// `c · self · c^-1`, freely reduced.
    pub fn conjugate_by(&self, c: &Word) -> Word {
        Word::product([c, self, &c.inverse()])
    }

    /// Splits a reduced word `w = conj · core · conj^-1` with `core`
    /// cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut core = self.free_reduce().runs;
        let mut conj: Vec<Run> = Vec::new();
        loop {
            let n = core.len();
            if n < 2 {
                break;
            }
            let (first, last) = (core[0], core[n - 1]);
            if first.gen != last.gen {
                break;
            }
            if first.exp.signum() == last.exp.signum() {
                // g^e ... g^f with same sign: merge cyclically, nothing cancels.
                break;
            }
            let m = first.exp.abs().min(last.exp.abs());
            let step = first.exp.signum() * m;
            push_run(&mut conj, Run::new(first.gen, step));
            core[0].exp -= step;
            core[n - 1].exp += step;
            if core[n - 1].exp == 0 {
                core.pop();
            }
            if core[0].exp == 0 {
                core.remove(0);
            }
        }
        (Word { runs: core }, Word { runs: conj })
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        let (_, conj) = self.cyclic_reduce();
        self.is_reduced() && conj.is_empty()
    }

    /// Splits at a letter offset, cutting a run if needed.
    pub fn split_at_letter(&self, k: u64) -> (Word, Word) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut remaining = k;
        for &r in &self.runs {
            let len = r.exp.unsigned_abs();
            if remaining >= len {
                left.push(r);
                remaining -= len;
            } else if remaining == 0 {
                right.push(r);
            } else {
                let s = r.exp.signum();
                left.push(Run::new(r.gen, s * remaining as i64));
                right.push(Run::new(r.gen, s * (len - remaining) as i64));
                remaining = 0;
            }
        }
        (Word { runs: left }, Word { runs: right })
    }

    /// Replaces generators through `f`, keeping exponents.
    pub fn rename(&self, f: impl Fn(Gen) -> Gen) -> Word {
        Word {
            runs: self.runs.iter().map(|r| Run::new(f(r.gen), r.exp)).collect(),
        }
    }

    /// Drops every run whose generator fails `keep`, then reduces.
    pub fn erase(&self, keep: impl Fn(Gen) -> bool) -> Word {
        let mut out = Vec::new();
        for &r in &self.runs {
            if keep(r.gen) {
                push_run(&mut out, r);
            }
        }
        Word { runs: out }
    }

    /// Canonical representative of the cyclic class of `self` and its
    /// inverse: the lexicographically least rotation of either.
    pub fn cyclic_canonical(&self) -> Vec<Letter> {
        let (core, _) = self.cyclic_reduce();
        let fwd = core.letters();
        let bwd = core.inverse().letters();
        let mut best: Option<Vec<Letter>> = None;
        for base in [fwd, bwd] {
            let n = base.len();
            for s in 0..n {
                let rot: Vec<Letter> = base[s..].iter().chain(&base[..s]).copied().collect();
                if best.as_ref().is_none_or(|b| rot < *b) {
                    best = Some(rot);
                }
            }
        }
        best.unwrap_or_default()
    }
}

/// Appends a run onto a reduced run stack, merging and cancelling.
pub(crate) fn push_run(stack: &mut Vec<Run>, r: Run) {
    if r.exp == 0 {
        return;
    }
    if let Some(top) = stack.last_mut() {
        if top.gen == r.gen {
            top.exp = top.exp.checked_add(r.exp).expect("exponent overflow");
            if top.exp == 0 {
                stack.pop();
            }
            return;
        }
    }
    stack.push(r);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        Alphabet::new(["a", "t", "x", "y"]).unwrap()
    }

    fn w(s: &str) -> Word {
        crate::text::parse_word(&abc(), s).unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        let al = abc();
        assert_eq!(al.format(&w("a a^-1 t").free_reduce()), "t");
        assert_eq!(al.format(&w("t a^2 t^-1 a^-3").free_reduce()), "t a^2 t^-1 a^-3");
        assert_eq!(al.format(&w("x y y^-1 x^-1").free_reduce()), "1");
        assert!(w("x y y^-1 x^-1").free_reduce().is_empty());
    }

    #[test]
    fn cyclic_reduce_examples() {
        let al = abc();
        let (core, conj) = w("a t a^-1").cyclic_reduce();
        assert_eq!(al.format(&core), "t");
        assert_eq!(al.format(&conj), "a");
        let (core, conj) = w("t a^2 t^-1 a^-3").cyclic_reduce();
        assert_eq!(al.format(&core), "t a^2 t^-1 a^-3");
        assert!(conj.is_empty());
        let (core, conj) = Word::empty().cyclic_reduce();
        assert!(core.is_empty() && conj.is_empty());
    }

    #[test]
    fn cyclic_reduce_partial_runs() {
        let al = abc();
        let input = w("a^3 t a^-2");
        let (core, conj) = input.cyclic_reduce();
        assert_eq!(al.format(&core), "a t");
        assert_eq!(al.format(&conj), "a^2");
        assert_eq!(core.conjugate_by(&conj), input.free_reduce());
    }

    #[test]
    fn letters_round_trip_and_split() {
        let x = w("a^3 t^-2 x");
        assert_eq!(Word::from_letters(&x.letters()), x);
        let (l, r) = x.split_at_letter(4);
        assert_eq!(l, w("a^3 t^-1"));
        assert_eq!(r, w("t^-1 x"));
        assert_eq!(l.mul(&r), x);
    }

    #[test]
    fn pow_keeps_runs_compact() {
        let a = w("a");
        assert_eq!(a.pow(1 << 40).runs().len(), 1);
        assert_eq!(w("a t").pow(-2), w("t^-1 a^-1 t^-1 a^-1"));
    }

    #[test]
    fn cyclic_canonical_identifies_rotations_and_inverses() {
        let r = w("t a^2 t^-1 a^-3");
        let rot = w("a^2 t^-1 a^-3 t");
        assert_eq!(r.cyclic_canonical(), rot.cyclic_canonical());
        assert_eq!(r.cyclic_canonical(), r.inverse().cyclic_canonical());
        assert_ne!(r.cyclic_canonical(), w("t a^2 t^-1 a^-2").cyclic_canonical());
    }
}
