//! Word-problem backends behind one trait.

pub mod bounded;
pub mod britton;
pub mod graph;

use std::sync::Arc;

use crate::certificate::{Certificate, Rules};
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::word::{Gen, Word};

pub use bounded::{bounded_trivializer, DEFAULT_NODE_CAP};
pub use britton::{BrittonSolver, BsGroup, Syllables};
pub use graph::{GraphGroup, GraphSolver};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Trivial(Certificate),
    NonTrivial,
    Unknown,
}

impl Verdict {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Verdict::Trivial(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Trivial(_) => "trivial",
            Verdict::NonTrivial => "non-trivial",
            Verdict::Unknown => "unknown",
        }
    }
}

pub trait WordProblem: Send + Sync {
    fn name(&self) -> &str;

    fn decide(&self, w: &Word) -> Result<Verdict>;

    /// Rules under which this backend's certificates replay.
    fn rules(&self) -> Rules<'_>;

    /// [`WordProblem::decide`], with every triviality certificate replayed.
    fn audited(&self, w: &Word) -> Result<Verdict> {
        let v = self.decide(w)?;
        if let Verdict::Trivial(c) = &v {
            let out = c.replay(w, &self.rules())?;
            if !out.is_empty() {
                return Err(Error::CertificationFailed(format!(
                    "{} certificate replays to a non-empty word",
                    self.name()
                )));
            }
        }
        Ok(v)
    }
}

/// Which full decider a presentation is handled by.
#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dehn,
    Britton,
    Graph,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dehn" => Ok(Backend::Dehn),
            "britton" => Ok(Backend::Britton),
            "graph" => Ok(Backend::Graph),
            _ => Err(Error::Invalid(format!("unknown backend `{s}` (dehn, britton, graph)"))),
        }
    }
}

/// Builds the named backend for `p`; Dehn requires the C'(1/6) check.
pub fn solver_for(backend: Backend, p: &Presentation) -> Result<Box<dyn WordProblem>> {
    Ok(match backend {
        Backend::Britton => Box::new(BrittonSolver { group: BsGroup::from_presentation(p)? }),
        Backend::Graph => Box::new(GraphSolver { group: GraphGroup::from_presentation(p)? }),
        Backend::Dehn => Box::new(crate::smallcanc::DehnSolver::new(p)?),
    })
}

/// Semi-decider producing relator-application certificates for an arbitrary
/// presentation: free reduction, then Britton on an embedded `BS(p, q)`
/// vertex group, then bounded search. Never answers "non-trivial".
#[derive(Clone, Debug)]
pub struct VanKampenSolver {
    pub pres: Arc<Presentation>,
    /// An embedded Baumslag-Solitar subgroup and the index of its relator.
    pub vertex: Option<(BsGroup, usize)>,
    pub budget: usize,
    pub node_cap: usize,
}

impl VanKampenSolver {
    pub fn new(pres: Arc<Presentation>) -> Self {
        VanKampenSolver { pres, vertex: None, budget: 3, node_cap: DEFAULT_NODE_CAP }
    }

    /// Registers relator `index` as `t a^p t^-1 a^-q` for Britton.
    pub fn with_vertex(mut self, a: Gen, t: Gen, index: usize) -> Result<Self> {
        let r = self
            .pres
            .rels()
            .get(index)
            .ok_or_else(|| Error::Invalid(format!("relator {index} does not exist")))?;
        let runs = r.runs();
        let bs = match runs {
            [r0, r1, r2, r3]
                if r0.gen == t && r0.exp == 1 && r1.gen == a && r2.gen == t && r2.exp == -1 && r3.gen == a =>
            {
                BsGroup::new(r1.exp, -r3.exp, a, t)
            }
            _ => {
                return Err(Error::Invalid(format!(
                    "relator {} is not of the form t a^p t^-1 a^-q",
                    self.pres.format(r)
                )))
            }
        };
        self.vertex = Some((bs, index));
        Ok(self)
    }

    pub fn with_budget(mut self, budget: usize, node_cap: usize) -> Self {
        self.budget = budget;
        self.node_cap = node_cap;
        self
    }

    pub fn van_kampen(&self, w: &Word) -> Result<Option<Certificate>> {
        let w = w.free_reduce();
        if w.is_empty() {
            return Ok(Some(Certificate::new()));
        }
        if let Some((bs, index)) = self.vertex {
            if w.uses_only(&[bs.a, bs.t]) {
                if let Some(c) = bs.relator_certificate(&w, index)? {
                    return Ok(Some(c));
                }
            }
        }
        Ok(bounded_trivializer(&self.pres, &w, self.budget, self.node_cap))
    }
}

impl WordProblem for VanKampenSolver {
    fn name(&self) -> &str {
        "van-kampen"
    }

    fn decide(&self, w: &Word) -> Result<Verdict> {
        Ok(match self.van_kampen(w)? {
            Some(c) => Verdict::Trivial(c),
            None => Verdict::Unknown,
        })
    }

    fn rules(&self) -> Rules<'_> {
        Rules { relators: Some(self.pres.rels()), ..Rules::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_group_certificates_use_relators() {
        let p = Arc::new(
            Presentation::from_names("S", ["a", "t"], &["t a^2 t^-1 a^-3"]).unwrap(),
        );
        let vk = VanKampenSolver::new(p.clone()).with_vertex(Gen(0), Gen(1), 0).unwrap();
        let w = p.word("a^2 t a^2 t^-1 a^-2 t a^-2 t^-1").unwrap();
        assert!(vk.audited(&w).unwrap().is_trivial());
        assert_eq!(vk.decide(&p.word("t").unwrap()).unwrap(), Verdict::Unknown);
    }
}
