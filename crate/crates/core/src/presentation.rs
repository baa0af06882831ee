use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::word::{Alphabet, Gen, Word};

/// A finite presentation. Relators are stored freely and cyclically
/// reduced; empty relators are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub name: Option<String>,
    alphabet: Alphabet,
    rels: Vec<Word>,
}

impl Presentation {
    pub fn new(name: Option<String>, alphabet: Alphabet, rels: Vec<Word>) -> Result<Self> {
        let mut stored = Vec::with_capacity(rels.len());
        for (i, r) in rels.into_iter().enumerate() {
            r.check_alphabet(alphabet.len())?;
            let (core, _) = r.cyclic_reduce();
            if core.is_empty() {
                warn!("relator {} reduces to the empty word and was dropped", i + 1);
                continue;
            }
            stored.push(core);
        }
        Ok(Presentation { name, alphabet, rels: stored })
    }

    pub fn from_names<S: AsRef<str>>(
        name: &str,
        gens: impl IntoIterator<Item = S>,
        rels: &[&str],
    ) -> Result<Self> {
        let alphabet = Alphabet::new(gens)?;
        let rels = rels
            .iter()
            .map(|r| crate::text::parse_word(&alphabet, r))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(Some(name.to_string()), alphabet, rels)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rels(&self) -> &[Word] {
        &self.rels
    }

    pub fn num_gens(&self) -> usize {
        self.alphabet.len()
    }

    pub fn num_rels(&self) -> usize {
        self.rels.len()
    }

    pub fn is_balanced(&self) -> bool {
        self.num_gens() == self.num_rels()
    }

    pub fn gen(&self, name: &str) -> Result<Gen> {
        self.alphabet.lookup(name)
    }

    pub fn word(&self, text: &str) -> Result<Word> {
        crate::text::parse_word(&self.alphabet, text)
    }

    pub fn format(&self, w: &Word) -> String {
        self.alphabet.format(w)
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("G")
    }
}

/// Homomorphism given by the images of the domain generators.
#[derive(Clone, Debug)]
pub struct GenMap {
    pub domain: Arc<Presentation>,
    pub codomain: Arc<Presentation>,
    images: Vec<Word>,
}

impl GenMap {
    pub fn new(domain: Arc<Presentation>, codomain: Arc<Presentation>, images: Vec<Word>) -> Result<Self> {
        if images.len() != domain.num_gens() {
            return Err(Error::Invalid(format!(
                "map needs {} images, got {}",
                domain.num_gens(),
                images.len()
            )));
        }
        let images = images
            .into_iter()
            .map(|w| {
                w.check_alphabet(codomain.num_gens())?;
                Ok(w.free_reduce())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GenMap { domain, codomain, images })
    }

    pub fn identity(p: Arc<Presentation>) -> Self {
        let images = p.alphabet().gens().map(Word::gen).collect();
        GenMap { domain: p.clone(), codomain: p, images }
    }

    /// Builds a map from `name -> word` pairs; unlisted generators map to
    /// the same-named codomain generator.
    pub fn from_named(
        domain: Arc<Presentation>,
        codomain: Arc<Presentation>,
        assignments: &[(&str, &str)],
    ) -> Result<Self> {
        let mut images = Vec::with_capacity(domain.num_gens());
        for name in domain.alphabet().names() {
            let image = match assignments.iter().find(|(n, _)| n == name) {
                Some((_, w)) => codomain.word(w)?,
                None => Word::gen(codomain.gen(name)?),
            };
            images.push(image);
        }
        GenMap::new(domain, codomain, images)
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, g: Gen) -> &Word {
        &self.images[g.index()]
    }

    /// Letter-wise substitution followed by free reduction. Single-run images
    /// are scaled rather than repeated, so `a -> a^2` applied to `a^(2^k)`
    /// stays one run.
    pub fn substitute(&self, w: &Word) -> Result<Word> {
        w.check_alphabet(self.domain.num_gens())?;
        let mut out = Word::empty();
        for r in w.runs() {
            let img = &self.images[r.gen.index()];
            out = out.mul(&img.pow(r.exp));
        }
        Ok(out)
    }

    /// `outer ∘ inner`: first `inner`, then `outer`.
    pub fn compose(outer: &GenMap, inner: &GenMap) -> Result<GenMap> {
        if inner.codomain.alphabet() != outer.domain.alphabet() {
            return Err(Error::AlphabetMismatch(format!(
                "cannot compose: {} is not {}",
                inner.codomain.label(),
                outer.domain.label()
            )));
        }
        let images = inner
            .images
            .iter()
            .map(|w| outer.substitute(w))
            .collect::<Result<Vec<_>>>()?;
        GenMap::new(inner.domain.clone(), outer.codomain.clone(), images)
    }

    pub fn power(&self, n: u32) -> Result<GenMap> {
        let mut acc = GenMap::identity(self.domain.clone());
        for _ in 0..n {
            acc = GenMap::compose(self, &acc)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Arc<Presentation> {
        Arc::new(Presentation::from_names("S", ["a", "t"], &["t a^2 t^-1 a^-3"]).unwrap())
    }

    #[test]
    fn substitute_psi() {
        let s = s();
        let psi = GenMap::from_named(s.clone(), s.clone(), &[("a", "a^2")]).unwrap();
        let img = psi.substitute(&s.word("t a t^-1 a^-1").unwrap()).unwrap();
        assert_eq!(s.format(&img), "t a^2 t^-1 a^-2");
        let psi2 = psi.power(2).unwrap();
        assert_eq!(s.format(&psi2.substitute(&s.word("a").unwrap()).unwrap()), "a^4");
    }

    #[test]
    fn identity_substitution_reduces() {
        let s = s();
        let id = GenMap::identity(s.clone());
        let w = s.word("a a^-1 t t").unwrap();
        assert_eq!(id.substitute(&w).unwrap(), w.free_reduce());
        let psi = GenMap::from_named(s.clone(), s.clone(), &[("a", "a^2")]).unwrap();
        let c = GenMap::compose(&id, &psi).unwrap();
        assert_eq!(c.images(), psi.images());
    }

    #[test]
    fn drops_empty_relators() {
        let p = Presentation::from_names("E", ["x"], &["x x^-1", "x"]).unwrap();
        assert_eq!(p.num_rels(), 1);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let s = s();
        let f = Arc::new(Presentation::from_names("F", ["x"], &[]).unwrap());
        let a = GenMap::identity(s);
        let b = GenMap::identity(f);
        assert!(GenMap::compose(&a, &b).is_err());
    }
}
