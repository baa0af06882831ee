//! Rewriting certificates and their deterministic replay.
//!
//! Each step acts on the current word. Swaps, pinches and shifts leave the
//! word unreduced (a pinch may leave `t t^-1` behind for a later pinch);
//! the other steps reduce it, and so does the end of a replay.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::smallcanc::SymmetrizedSet;
use crate::word::{Alphabet, Letter, Run, Word};
use crate::wp::britton::{BsGroup, Syllables};
use crate::wp::graph::GraphGroup;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// Replace the word by its free reduction.
    FreeReduce,
    /// Pinch `t^e a^k t^-e` whose first stable letter is the `at`-th one.
    Pinch { at: usize },
    /// Move `a^(q·by)` rightwards across the `at`-th stable letter when it
    /// is `t` (becoming `a^(p·by)`), or `a^(p·by)` across `t^-1`
    /// (becoming `a^(q·by)`).
    Shift { at: usize, by: i64 },
    /// Exchange runs `at` and `at + 1`, whose generators commute.
    Swap { at: usize },
    /// `w <- w · conj · r^sign · conj^-1` for relator `index`.
    Relator { index: usize, sign: i8, conj: Word },
    /// Letters `[at, at + len)` are a prefix of symmetrized relator `piece`
    /// covering more than half of it; replace them by the inverse of the
    /// remaining suffix.
    Dehn { at: u64, len: u64, piece: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Certificate {
    pub steps: Vec<Step>,
}

/// Which rewriting rules a replay may use.
#[derive(Clone, Copy, Default)]
pub struct Rules<'a> {
    pub bs: Option<BsGroup>,
    pub graph: Option<&'a GraphGroup>,
    pub relators: Option<&'a [Word]>,
    pub symmetrized: Option<&'a SymmetrizedSet>,
}

fn corrupt(step: usize, reason: impl Into<String>) -> Error {
    Error::CorruptCertificate { step, reason: reason.into() }
}

impl Certificate {
    pub fn new() -> Self {
        Certificate::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: Step) {
        self.steps.push(step);
    }

    pub fn extend(&mut self, other: Certificate) {
        self.steps.extend(other.steps);
    }

    /// Replays every step from `w`; the result is freely reduced.
    pub fn replay(&self, w: &Word, rules: &Rules<'_>) -> Result<Word> {
        let mut cur = w.free_reduce();
        for (i, step) in self.steps.iter().enumerate() {
            cur = apply_step(i, step, &cur, rules)?;
        }
        Ok(cur.free_reduce())
    }

    /// Replays and checks that the word collapses to the identity.
    pub fn proves_trivial(&self, w: &Word, rules: &Rules<'_>) -> bool {
        matches!(self.replay(w, rules), Ok(r) if r.is_empty())
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let _ = match s {
                Step::FreeReduce => writeln!(out, "step free"),
                Step::Pinch { at } => writeln!(out, "step pinch {at}"),
                Step::Shift { at, by } => writeln!(out, "step shift {at} {by}"),
                Step::Swap { at } => writeln!(out, "step swap {at}"),
                Step::Relator { index, sign, conj } => {
                    writeln!(out, "step relator {index} {sign} {}", alphabet.format(conj))
                }
                Step::Dehn { at, len, piece } => writeln!(out, "step dehn {at} {len} {piece}"),
            };
        }
        out
    }

    pub fn from_text(text: &str, alphabet: &Alphabet) -> Result<Certificate> {
        let mut steps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: i + 1, col: 1, msg: msg.to_string() };
            let mut parts = line.split_whitespace();
            if parts.next() != Some("step") {
                return Err(bad("expected `step`"));
            }
            let kind = parts.next().ok_or_else(|| bad("missing step kind"))?;
            let mut num = |what: &str| -> Result<i64> {
                parts
                    .next()
                    .and_then(|t| t.parse::<i64>().ok())
                    .ok_or_else(|| bad(&format!("missing or bad {what}")))
            };
            let step = match kind {
                "free" => Step::FreeReduce,
                "pinch" => Step::Pinch { at: num("position")? as usize },
                "shift" => Step::Shift { at: num("position")? as usize, by: num("amount")? },
                "swap" => Step::Swap { at: num("position")? as usize },
                "dehn" => Step::Dehn {
                    at: num("offset")? as u64,
                    len: num("length")? as u64,
                    piece: num("piece")? as usize,
                },
                "relator" => {
                    let index = num("index")? as usize;
                    let sign = num("sign")?;
                    if sign != 1 && sign != -1 {
                        return Err(bad("sign must be 1 or -1"));
                    }
                    let rest: Vec<&str> = parts.collect();
                    let conj = crate::text::parse_word(alphabet, &rest.join(" "))?;
                    Step::Relator { index, sign: sign as i8, conj }
                }
                _ => return Err(bad("unknown step kind")),
            };
            steps.push(step);
        }
        Ok(Certificate { steps })
    }
}

pub fn apply_step(i: usize, step: &Step, w: &Word, rules: &Rules<'_>) -> Result<Word> {
    match step {
        Step::FreeReduce => Ok(w.free_reduce()),
        Step::Pinch { at } => {
            let bs = rules.bs.ok_or_else(|| corrupt(i, "pinch without a Baumslag-Solitar rule set"))?;
            let mut syl = Syllables::from_word(&bs, w).map_err(|e| corrupt(i, e.to_string()))?;
            syl.pinch(&bs, *at).map_err(|e| corrupt(i, e))?;
            Ok(syl.to_word(&bs))
        }
        Step::Shift { at, by } => {
            let bs = rules.bs.ok_or_else(|| corrupt(i, "shift without a Baumslag-Solitar rule set"))?;
            let mut syl = Syllables::from_word(&bs, w).map_err(|e| corrupt(i, e.to_string()))?;
            syl.shift(&bs, *at, *by).map_err(|e| corrupt(i, e))?;
            Ok(syl.to_word(&bs))
        }
        Step::Swap { at } => {
            let g = rules.graph.ok_or_else(|| corrupt(i, "swap without commutation rules"))?;
            let runs = w.runs();
            if at + 1 >= runs.len() {
                return Err(corrupt(i, format!("swap position {at} out of range")));
            }
            let (x, y) = (runs[*at], runs[at + 1]);
            if x.gen == y.gen || !g.commute(x.gen, y.gen) {
                return Err(corrupt(i, format!("runs {at} and {} do not commute", at + 1)));
            }
            let mut out: Vec<Run> = runs.to_vec();
            out.swap(*at, at + 1);
            Ok(Word::from_runs(out))
        }
        Step::Relator { index, sign, conj } => {
            let rels = rules.relators.ok_or_else(|| corrupt(i, "relator step without relators"))?;
            let r = rels
                .get(*index)
                .ok_or_else(|| corrupt(i, format!("relator {index} does not exist")))?;
            let r = if *sign > 0 { r.clone() } else { r.inverse() };
            Ok(Word::product([w, conj, &r, &conj.inverse()]))
        }
        Step::Dehn { at, len, piece } => {
            let sym = rules
                .symmetrized
                .ok_or_else(|| corrupt(i, "Dehn step without a symmetrized set"))?;
            let elem = sym
                .element(*piece)
                .ok_or_else(|| corrupt(i, format!("symmetrized relator {piece} does not exist")))?;
            let letters = w.letters();
            let (at, len) = (*at as usize, *len as usize);
            if at + len > letters.len() || len > elem.len() {
                return Err(corrupt(i, "Dehn replacement out of range"));
            }
            if 2 * len <= elem.len() {
                return Err(corrupt(i, "Dehn replacement does not cover more than half a relator"));
            }
            if letters[at..at + len] != elem[..len] {
                return Err(corrupt(i, format!("word does not contain relator {piece} prefix at {at}")));
            }
            let replacement: Vec<Letter> = elem[len..].iter().rev().map(|l| l.inverse()).collect();
            let mut out = letters[..at].to_vec();
            out.extend(replacement);
            out.extend_from_slice(&letters[at + len..]);
            Ok(Word::from_letters(&out).free_reduce())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_word;

    #[test]
    fn empty_certificate_reduces() {
        let al = Alphabet::new(["a", "t"]).unwrap();
        let w = parse_word(&al, "a t t^-1").unwrap();
        let out = Certificate::new().replay(&w, &Rules::default()).unwrap();
        assert_eq!(al.format(&out), "a");
    }

    #[test]
    fn relator_steps_and_text() {
        let al = Alphabet::new(["a", "t"]).unwrap();
        let r = vec![parse_word(&al, "t a^2 t^-1 a^-3").unwrap()];
        let mut c = Certificate::new();
        c.push(Step::Relator { index: 0, sign: -1, conj: Word::empty() });
        let rules = Rules { relators: Some(&r), ..Rules::default() };
        assert!(c.proves_trivial(&r[0], &rules));
        let text = c.to_text(&al);
        assert_eq!(text, "step relator 0 -1 1\n");
        assert_eq!(Certificate::from_text(&text, &al).unwrap(), c);
    }

    #[test]
    fn missing_rules_are_corrupt() {
        let al = Alphabet::new(["a", "t"]).unwrap();
        let w = parse_word(&al, "t a^2 t^-1").unwrap();
        let c = Certificate { steps: vec![Step::Pinch { at: 0 }] };
        assert!(matches!(c.replay(&w, &Rules::default()), Err(Error::CorruptCertificate { .. })));
    }
}
