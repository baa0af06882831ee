//! Shortlex normal forms in graph groups (right-angled Artin groups).
//!
//! Reduction merges two runs of the same generator whenever every run
//! between them commutes with that generator. Once no merge applies the
//! word is geodesic, and the greedy choice of the least available run at
//! each position gives the shortlex-least geodesic.

use std::collections::BTreeSet;

use crate::certificate::{Certificate, Rules, Step};
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::word::{Gen, Letter, Run, Word};

use super::{Verdict, WordProblem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphGroup {
    num_gens: usize,
    edges: BTreeSet<(Gen, Gen)>,
}

impl GraphGroup {
    pub fn new(num_gens: usize, edges: impl IntoIterator<Item = (Gen, Gen)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (x, y) in edges {
            if x == y {
                return Err(Error::Invalid(format!("commutation edge on a single generator {}", x.0)));
            }
            for g in [x, y] {
                if g.index() >= num_gens {
                    return Err(Error::GenOutOfRange(g.0, num_gens));
                }
            }
            set.insert((x.min(y), x.max(y)));
        }
        Ok(GraphGroup { num_gens, edges: set })
    }

    /// Reads the commutation graph off a presentation whose relators are
    /// all commutators of two distinct generators.
    pub fn from_presentation(p: &Presentation) -> Result<Self> {
        let mut edges = Vec::new();
        for r in p.rels() {
            let runs = r.runs();
            let ok = runs.len() == 4
                && runs.iter().all(|x| x.exp.abs() == 1)
                && runs[0].gen == runs[2].gen
                && runs[1].gen == runs[3].gen
                && runs[0].gen != runs[1].gen
                && runs[0].exp == -runs[2].exp
                && runs[1].exp == -runs[3].exp;
            if !ok {
                return Err(Error::Invalid(format!(
                    "relator {} is not a commutator of two generators",
                    p.format(r)
                )));
            }
            edges.push((runs[0].gen, runs[1].gen));
        }
        GraphGroup::new(p.num_gens(), edges)
    }

    pub fn num_gens(&self) -> usize {
        self.num_gens
    }

    pub fn commute(&self, x: Gen, y: Gen) -> bool {
        x == y || self.edges.contains(&(x.min(y), x.max(y)))
    }

    pub fn rules(&self) -> Rules<'_> {
        Rules { graph: Some(self), ..Rules::default() }
    }

    pub fn graph_nf(&self, w: &Word) -> Result<(Word, Certificate)> {
        w.check_alphabet(self.num_gens)?;
        let mut cert = Certificate::new();
        let mut cur: Vec<Run> = w.free_reduce().into_runs();

        // Merge phase.
        while let Some((j, i)) = self.find_merge(&cur) {
            for k in (j + 1..i).rev() {
                cert.push(Step::Swap { at: k });
                cur.swap(k, k + 1);
            }
            cert.push(Step::FreeReduce);
            cur = Word::from_runs(cur).free_reduce().into_runs();
        }

        // Ordering phase.
        for pos in 0..cur.len() {
            let mut best: Option<usize> = None;
            for i in pos..cur.len() {
                if (pos..i).all(|k| self.commute(cur[k].gen, cur[i].gen)) {
                    let key = run_key(cur[i]);
                    if best.is_none_or(|b| key < run_key(cur[b])) {
                        best = Some(i);
                    }
                }
            }
            let b = best.expect("the run at `pos` is always available");
            for k in (pos..b).rev() {
                cert.push(Step::Swap { at: k });
                cur.swap(k, k + 1);
            }
        }
        if !cert.is_empty() {
            cert.push(Step::FreeReduce);
        }
        Ok((Word::from_runs(cur), cert))
    }

    /// Leftmost `i` with an earlier run `j` of the same generator and only
    /// commuting runs in between.
    fn find_merge(&self, runs: &[Run]) -> Option<(usize, usize)> {
        for i in 1..runs.len() {
            let g = runs[i].gen;
            for j in (0..i).rev() {
                if runs[j].gen == g {
                    return Some((j, i));
                }
                if !self.commute(runs[j].gen, g) {
                    break;
                }
            }
        }
        None
    }

    pub fn is_trivial(&self, w: &Word) -> Result<bool> {
        Ok(self.graph_nf(w)?.0.is_empty())
    }
}

fn run_key(r: Run) -> (u32, bool) {
    Letter::new(r.gen, r.exp > 0).order_key()
}

#[derive(Clone, Debug)]
pub struct GraphSolver {
    pub group: GraphGroup,
}

impl WordProblem for GraphSolver {
    fn name(&self) -> &str {
        "graph"
    }

    fn decide(&self, w: &Word) -> Result<Verdict> {
        let (nf, cert) = self.group.graph_nf(w)?;
        Ok(if nf.is_empty() { Verdict::Trivial(cert) } else { Verdict::NonTrivial })
    }

    fn rules(&self) -> Rules<'_> {
        self.group.rules()
    }
}
