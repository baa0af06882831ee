//! Symmetrized relator sets, pieces, the metric condition C'(1/λ), and
//! Dehn's algorithm for verified C'(1/6) presentations.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::certificate::{Certificate, Rules, Step};
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::word::{Letter, Word};
use crate::wp::{Verdict, WordProblem};

/// Identifies a cyclic rotation of a relator or of its inverse.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct ElemRef {
    pub relator: usize,
    pub inverted: bool,
    pub offset: usize,
}

/// Every cyclic rotation of every relator and its inverse, with identical
/// words merged.
#[derive(Clone, Debug)]
pub struct SymmetrizedSet {
    /// Letters of relator `i` at `2i`, of its inverse at `2i + 1`.
    bases: Vec<Vec<Letter>>,
    /// Distinct elements in sorted order.
    elems: Vec<(u32, u32)>,
    /// For each element, whether another rotation of the same relator (or
    /// its inverse) spells the same word.
    self_overlap: Vec<bool>,
    /// Longest common prefix with any other element.
    max_lcp: Vec<usize>,
    /// The element realizing `max_lcp`.
    lcp_partner: Vec<usize>,
    min_len: usize,
    max_len: usize,
}

impl SymmetrizedSet {
    pub fn new(p: &Presentation) -> Self {
        let mut bases = Vec::with_capacity(2 * p.num_rels());
        for r in p.rels() {
            bases.push(r.letters());
            bases.push(r.inverse().letters());
        }
        let mut all: Vec<(u32, u32)> = Vec::new();
        for (b, letters) in bases.iter().enumerate() {
            for off in 0..letters.len() {
                all.push((b as u32, off as u32));
            }
        }
        let cmp = |x: &(u32, u32), y: &(u32, u32)| -> Ordering {
            let (lx, ly) = (&bases[x.0 as usize], &bases[y.0 as usize]);
            let (nx, ny) = (lx.len(), ly.len());
            let n = nx.min(ny);
            for k in 0..n {
                let a = lx[(x.1 as usize + k) % nx];
                let b = ly[(y.1 as usize + k) % ny];
                match a.cmp(&b) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            nx.cmp(&ny)
        };
        all.par_sort_unstable_by(|x, y| cmp(x, y).then(x.cmp(y)));

        // Merge runs of identical words.
        let mut elems = Vec::new();
        let mut self_overlap = Vec::new();
        let mut i = 0;
        while i < all.len() {
            let mut j = i + 1;
            while j < all.len() && cmp(&all[i], &all[j]) == Ordering::Equal {
                j += 1;
            }
            let mut sources: Vec<u32> = all[i..j].iter().map(|e| e.0 / 2).collect();
            sources.sort_unstable();
            let overlap = sources.windows(2).any(|w| w[0] == w[1]);
            elems.push(all[i]);
            self_overlap.push(overlap);
            i = j;
        }

        let set = SymmetrizedSet {
            bases,
            elems,
            self_overlap,
            max_lcp: Vec::new(),
            lcp_partner: Vec::new(),
            min_len: p.rels().iter().map(|r| r.letter_len() as usize).min().unwrap_or(0),
            max_len: p.rels().iter().map(|r| r.letter_len() as usize).max().unwrap_or(0),
        };
        let adjacent: Vec<usize> = (1..set.elems.len())
            .into_par_iter()
            .map(|k| set.lcp(k - 1, k))
            .collect();
        let n = set.elems.len();
        let mut max_lcp = vec![0; n];
        let mut partner = vec![usize::MAX; n];
        for k in 0..n {
            if k > 0 && adjacent[k - 1] >= max_lcp[k] {
                max_lcp[k] = adjacent[k - 1];
                partner[k] = k - 1;
            }
            if k + 1 < n && (partner[k] == usize::MAX || adjacent[k] > max_lcp[k]) {
                max_lcp[k] = adjacent[k];
                partner[k] = k + 1;
            }
        }
        SymmetrizedSet { max_lcp, lcp_partner: partner, ..set }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn min_len(&self) -> usize {
        self.min_len
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    fn base_of(&self, i: usize) -> (&[Letter], usize) {
        let (b, off) = self.elems[i];
        (&self.bases[b as usize], off as usize)
    }

    pub fn elem_len(&self, i: usize) -> usize {
        self.bases[self.elems[i].0 as usize].len()
    }

    #[inline]
    pub fn letter(&self, i: usize, k: usize) -> Letter {
        let (base, off) = self.base_of(i);
        base[(off + k) % base.len()]
    }

    pub fn element(&self, i: usize) -> Option<Vec<Letter>> {
        if i >= self.elems.len() {
            return None;
        }
        Some((0..self.elem_len(i)).map(|k| self.letter(i, k)).collect())
    }

    pub fn elem_ref(&self, i: usize) -> ElemRef {
        let (b, off) = self.elems[i];
        ElemRef { relator: (b / 2) as usize, inverted: b % 2 == 1, offset: off as usize }
    }

    fn lcp(&self, i: usize, j: usize) -> usize {
        let n = self.elem_len(i).min(self.elem_len(j));
        (0..n).take_while(|&k| self.letter(i, k) == self.letter(j, k)).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceWitness {
    pub piece: Vec<Letter>,
    pub first: ElemRef,
    pub second: ElemRef,
}

#[derive(Clone, Debug)]
pub struct PieceReport {
    pub lambda: u32,
    pub passed: bool,
    pub max_piece: usize,
    pub min_relator_len: usize,
    /// Largest `|piece| / |r|` over symmetrized relators `r`.
    pub worst_ratio: f64,
    pub num_elements: usize,
    pub witness: Option<PieceWitness>,
}

/// Checks that every piece is shorter than `1/λ` of each relator containing it.
pub fn verify_metric_condition(p: &Presentation, lambda: u32) -> PieceReport {
    let set = SymmetrizedSet::new(p);
    metric_report(&set, lambda)
}

pub fn metric_report(set: &SymmetrizedSet, lambda: u32) -> PieceReport {
    let mut report = PieceReport {
        lambda,
        passed: !set.is_empty(),
        max_piece: 0,
        min_relator_len: set.min_len(),
        worst_ratio: 0.0,
        num_elements: set.len(),
        witness: None,
    };
    let mut worst: Option<(usize, usize, usize)> = None; // (elem, partner, piece length)
    for i in 0..set.len() {
        let len = set.elem_len(i);
        let (piece, partner) = if set.self_overlap[i] {
            (len, i)
        } else if set.lcp_partner[i] == usize::MAX {
            (0, i)
        } else {
            (set.max_lcp[i], set.lcp_partner[i])
        };
        report.max_piece = report.max_piece.max(piece);
        if lambda as usize * piece >= len {
            report.passed = false;
        }
        let ratio = piece as f64 / len as f64;
        if worst.is_none() || ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            worst = Some((i, partner, piece));
        }
    }
    if let Some((i, j, piece)) = worst {
        let second = if i == j {
            // A relator matching one of its own rotations.
            let r = set.elem_ref(i);
            let base = &set.bases[set.elems[i].0 as usize];
            let alt = (1..base.len())
                .find(|&s| (0..base.len()).all(|k| base[k] == base[(k + s) % base.len()]))
                .unwrap_or(0);
            ElemRef { offset: (r.offset + alt) % base.len().max(1), ..r }
        } else {
            set.elem_ref(j)
        };
        report.witness = Some(PieceWitness {
            piece: (0..piece).map(|k| set.letter(i, k)).collect(),
            first: set.elem_ref(i),
            second,
        });
    }
    report
}

/// Dehn's algorithm over a presentation that passed the C'(1/6) check.
#[derive(Clone, Debug)]
pub struct DehnSolver {
    set: SymmetrizedSet,
    key_len: usize,
    index: HashMap<Vec<Letter>, Vec<usize>>,
    report: PieceReport,
}

impl DehnSolver {
    pub fn new(p: &Presentation) -> Result<Self> {
        let set = SymmetrizedSet::new(p);
        let report = metric_report(&set, 6);
        if !report.passed {
            return Err(Error::UnverifiedPresentation);
        }
        let key_len = set.min_len().div_ceil(6).max(1);
        let mut index: HashMap<Vec<Letter>, Vec<usize>> = HashMap::new();
        for i in 0..set.len() {
            let key: Vec<Letter> = (0..key_len).map(|k| set.letter(i, k)).collect();
            index.entry(key).or_default().push(i);
        }
        Ok(DehnSolver { set, key_len, index, report })
    }

    pub fn symmetrized(&self) -> &SymmetrizedSet {
        &self.set
    }

    pub fn report(&self) -> &PieceReport {
        &self.report
    }

    pub fn rules(&self) -> Rules<'_> {
        Rules { symmetrized: Some(&self.set), ..Rules::default() }
    }

    /// Runs Dehn's algorithm; `true` iff `w` reduces to the empty word.
    pub fn dehn_is_trivial(&self, w: &Word) -> (bool, Certificate) {
        let mut cur = reduce_letters(&w.letters());
        let mut cert = Certificate::new();
        let mut i = 0;
        while i + self.key_len <= cur.len() {
            match self.replacement_at(&cur, i) {
                Some((e, m)) => {
                    let elen = self.set.elem_len(e);
                    let before = cur.len();
                    let tail: Vec<Letter> =
                        (m..elen).rev().map(|k| self.set.letter(e, k).inverse()).collect();
                    let (next, low) = splice_reduce(&cur, i, m, &tail);
                    assert!(next.len() < before, "Dehn replacement must shorten the word");
                    cert.push(Step::Dehn { at: i as u64, len: m as u64, piece: e });
                    cur = next;
                    i = low.saturating_sub(self.set.max_len());
                }
                None => i += 1,
            }
        }
        (cur.is_empty(), cert)
    }

    /// An element `e` and a length `m > |e|/2` with `cur[i..i+m]` a prefix
    /// of `e`.
    fn replacement_at(&self, cur: &[Letter], i: usize) -> Option<(usize, usize)> {
        let cands = self.index.get(&cur[i..i + self.key_len])?;
        for &e in cands {
            let elen = self.set.elem_len(e);
            let mut m = self.key_len;
            while m < elen && i + m < cur.len() && cur[i + m] == self.set.letter(e, m) {
                m += 1;
            }
            if 2 * m > elen {
                return Some((e, m));
            }
        }
        None
    }

    /// Greendlinger shortcut: a cyclically reduced non-empty word of length
    /// at most half the shortest relator is non-trivial. `None` if the
    /// shortcut does not apply.
    pub fn shortword_nontrivial(&self, w: &Word) -> Option<bool> {
        let (core, _) = w.free_reduce().cyclic_reduce();
        let n = core.letter_len() as usize;
        if n > 0 && 2 * n <= self.set.min_len() {
            Some(true)
        } else {
            None
        }
    }
}

fn reduce_letters(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Replaces `cur[at..at+len]` by `with` and freely reduces; also returns
/// the length of the prefix of `cur` left untouched.
fn splice_reduce(cur: &[Letter], at: usize, len: usize, with: &[Letter]) -> (Vec<Letter>, usize) {
    let mut out: Vec<Letter> = Vec::with_capacity(cur.len());
    out.extend_from_slice(&cur[..at]);
    let mut low = at;
    for &l in with.iter().chain(&cur[at + len..]) {
        if out.last() == Some(&l.inverse()) {
            out.pop();
            low = low.min(out.len());
        } else {
            out.push(l);
        }
    }
    (out, low)
}

impl WordProblem for DehnSolver {
    fn name(&self) -> &str {
        "dehn"
    }

    fn decide(&self, w: &Word) -> Result<Verdict> {
        if self.shortword_nontrivial(w) == Some(true) {
            return Ok(Verdict::NonTrivial);
        }
        let (trivial, cert) = self.dehn_is_trivial(w);
        Ok(if trivial { Verdict::Trivial(cert) } else { Verdict::NonTrivial })
    }

    fn rules(&self) -> Rules<'_> {
        DehnSolver::rules(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{Gen, Run};
    use proptest::prelude::*;

    fn increasing_runs() -> Presentation {
        let rel: Vec<String> = (1..=10).map(|k| format!("a b^{k}")).collect();
        Presentation::from_names("T", ["a", "b"], &[&rel.join(" ")]).unwrap()
    }

    /// `a b^e1 a b^e2 ...` along a de Bruijn cycle, so no two positions
    /// share both neighbouring exponents.
    fn de_bruijn_relator(m: u32) -> String {
        let seq = crate::rips::de_bruijn(m);
        seq.iter().map(|e| format!("a b^{e}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn increasing_runs_overlap_across_run_boundaries() {
        // `b^8 a b^9` sits inside `b^9 a b^10`.
        let r = verify_metric_condition(&increasing_runs(), 6);
        assert!(!r.passed);
        assert_eq!(r.max_piece, 18);
        assert_eq!(r.min_relator_len, 65);
    }

    #[test]
    fn de_bruijn_runs_pass() {
        let p = Presentation::from_names("T", ["a", "b"], &[&de_bruijn_relator(6)]).unwrap();
        let r = verify_metric_condition(&p, 6);
        assert!(r.passed, "{r:?}");
        assert!(r.max_piece * 6 < r.min_relator_len);
    }

    #[test]
    fn abab_fails_with_full_self_overlap() {
        let p = Presentation::from_names("T", ["a", "b"], &["a b a b"]).unwrap();
        let r = verify_metric_condition(&p, 6);
        assert!(!r.passed);
        assert_eq!(r.max_piece, 4);
        let w = r.witness.unwrap();
        assert_eq!(w.first.relator, w.second.relator);
        assert_ne!(w.first.offset, w.second.offset);
    }

    #[test]
    fn witness_occurs_in_both_elements() {
        let p = Presentation::from_names("T", ["a", "b"], &["a^2 b^3 a b a^-1 b"]).unwrap();
        let set = SymmetrizedSet::new(&p);
        let r = metric_report(&set, 6);
        let w = r.witness.unwrap();
        for e in [w.first, w.second] {
            let base = if e.inverted { p.rels()[e.relator].inverse() } else { p.rels()[e.relator].clone() };
            let letters = base.letters();
            for (k, l) in w.piece.iter().enumerate() {
                assert_eq!(letters[(e.offset + k) % letters.len()], *l);
            }
        }
    }

    #[test]
    fn dehn_refuses_unverified() {
        let p = Presentation::from_names("T", ["a", "b"], &["a b a b"]).unwrap();
        assert!(matches!(DehnSolver::new(&p), Err(Error::UnverifiedPresentation)));
    }

    fn two_relators() -> Presentation {
        let seq = crate::rips::de_bruijn(8);
        let block = |part: &[u32]| {
            let body: Vec<String> = part.iter().map(|e| format!("a b^{e}")).collect();
            format!("x {}", body.join(" "))
        };
        let (r1, r2) = (block(&seq[..32]), block(&seq[32..]));
        Presentation::from_names("T", ["a", "b", "x"], &[&r1, &r2]).unwrap()
    }

    #[test]
    fn dehn_examples() {
        let p = two_relators();
        let d = DehnSolver::new(&p).unwrap();
        let (r1, r2) = (&p.rels()[0], &p.rels()[1]);
        for w in [r1.clone(), r2.inverse(), r1.mul(&r2.conjugate_by(&Word::gen(Gen(2))))] {
            let (ok, cert) = d.dehn_is_trivial(&w);
            assert!(ok);
            assert!(cert.proves_trivial(&w, &d.rules()));
        }
        let (ok, _) = d.dehn_is_trivial(&Word::gen(Gen(0)));
        assert!(!ok);
        assert_eq!(d.shortword_nontrivial(&Word::gen(Gen(0))), Some(true));
        assert_eq!(d.shortword_nontrivial(r1), None);
        assert_eq!(d.shortword_nontrivial(&Word::empty()), None);
    }

    proptest! {
        #[test]
        fn products_of_conjugates_reduce(
            picks in prop::collection::vec((0usize..2, any::<bool>(), prop::collection::vec((0u32..3, -2i64..=2), 0..4)), 1..4)
        ) {
            let p = two_relators();
            let d = DehnSolver::new(&p).unwrap();
            let mut w = Word::empty();
            for (idx, inv, conj) in &picks {
                let r = if *inv { p.rels()[*idx].inverse() } else { p.rels()[*idx].clone() };
                let c = Word::from_runs(conj.iter().map(|&(g, e)| Run::new(Gen(g), e)).collect()).free_reduce();
                w = w.mul(&r.conjugate_by(&c));
            }
            let (ok, cert) = d.dehn_is_trivial(&w);
            prop_assert!(ok);
            prop_assert!(cert.proves_trivial(&w, &d.rules()));
        }

        #[test]
        fn shortcut_never_contradicts_dehn(v in prop::collection::vec((0u32..3, -3i64..=3), 0..8)) {
            let p = two_relators();
            let d = DehnSolver::new(&p).unwrap();
            let w = Word::from_runs(v.iter().map(|&(g, e)| Run::new(Gen(g), e)).collect());
            if d.shortword_nontrivial(&w) == Some(true) {
                prop_assert!(!d.dehn_is_trivial(&w).0);
            }
        }
    }
}
