//! Breadth-first search for a product of conjugated relators.
//!
//! A one-sided semi-decider: it can certify triviality but never reports
//! a word as non-trivial.

use std::collections::{HashSet, VecDeque};

use crate::certificate::{Certificate, Step};
use crate::presentation::Presentation;
use crate::word::{Letter, Word};

/// Default cap on the number of visited words.
pub const DEFAULT_NODE_CAP: usize = 200_000;

struct Insertion {
    index: usize,
    sign: i8,
    /// Rotation of `r^sign` starting after `shift` letters.
    letters: Vec<Letter>,
    /// `u^-1` where `r^sign = u v` and the rotation is `v u`.
    shift_inv: Word,
}

fn insertions(p: &Presentation) -> Vec<Insertion> {
    let mut out = Vec::new();
    for (index, r) in p.rels().iter().enumerate() {
        for sign in [1i8, -1] {
            let base = if sign > 0 { r.letters() } else { r.inverse().letters() };
            for s in 0..base.len() {
                let letters: Vec<Letter> = base[s..].iter().chain(&base[..s]).copied().collect();
                let shift_inv = Word::from_letters(&base[..s]).inverse();
                out.push(Insertion { index, sign, letters, shift_inv });
            }
        }
    }
    out
}

fn reduce(letters: &[Letter]) -> Vec<Letter> {
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

/// Looks for at most `budget` relator insertions reducing `w` to the empty
/// word, visiting at most `node_cap` words. `None` means "unknown".
pub fn bounded_trivializer(
    p: &Presentation,
    w: &Word,
    budget: usize,
    node_cap: usize,
) -> Option<Certificate> {
    let start = reduce(&w.letters());
    if start.is_empty() {
        return Some(Certificate::new());
    }
    if budget == 0 || p.rels().is_empty() {
        return None;
    }
    let moves = insertions(p);
    // Parent links: (word, parent index, step).
    let mut nodes: Vec<(Vec<Letter>, usize, Option<Step>)> = vec![(start.clone(), 0, None)];
    let mut depth = vec![0usize];
    let mut seen: HashSet<Vec<Letter>> = HashSet::from([start]);
    let mut queue = VecDeque::from([0usize]);

    while let Some(id) = queue.pop_front() {
        if depth[id] >= budget {
            continue;
        }
        let cur = nodes[id].0.clone();
        for k in 0..=cur.len() {
            let before = if k > 0 { Some(cur[k - 1]) } else { None };
            let after = cur.get(k).copied();
            for m in &moves {
                let first = m.letters[0];
                let last = *m.letters.last().expect("relators are non-empty");
                let cancels = before == Some(first.inverse()) || after == Some(last.inverse());
                if !cancels {
                    continue;
                }
                let mut next = cur[..k].to_vec();
                next.extend_from_slice(&m.letters);
                next.extend_from_slice(&cur[k..]);
                let next = reduce(&next);
                if seen.contains(&next) {
                    continue;
                }
                let y = Word::from_letters(&cur[k..]);
                let step = Step::Relator {
                    index: m.index,
                    sign: m.sign,
                    conj: y.inverse().mul(&m.shift_inv),
                };
                let done = next.is_empty();
                seen.insert(next.clone());
                nodes.push((next, id, Some(step)));
                depth.push(depth[id] + 1);
                let new_id = nodes.len() - 1;
                if done {
                    return Some(trace(&nodes, new_id));
                }
                if nodes.len() >= node_cap {
                    return None;
                }
                queue.push_back(new_id);
            }
        }
    }
    None
}

fn trace(nodes: &[(Vec<Letter>, usize, Option<Step>)], mut id: usize) -> Certificate {
    let mut steps = Vec::new();
    while let Some(step) = &nodes[id].2 {
        steps.push(step.clone());
        id = nodes[id].1;
    }
    steps.reverse();
    Certificate { steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::Rules;

    fn s() -> Presentation {
        Presentation::from_names("S", ["a", "t"], &["t a^2 t^-1 a^-3"]).unwrap()
    }

    #[test]
    fn relator_takes_one_step() {
        let p = s();
        let w = p.word("t a^2 t^-1 a^-3").unwrap();
        let cert = bounded_trivializer(&p, &w, 1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(cert.len(), 1);
        let rules = Rules { relators: Some(p.rels()), ..Rules::default() };
        assert!(cert.proves_trivial(&w, &rules));
    }

    #[test]
    fn conjugated_products_are_found() {
        let p = s();
        let rules = Rules { relators: Some(p.rels()), ..Rules::default() };
        for text in ["a t a^2 t^-1 a^-3 a^-1", "a^2 t^-1 a^-3 t a^2 t^-1 a^-3 t", "t a^4 t^-1 a^-6"] {
            let w = p.word(text).unwrap();
            let cert = bounded_trivializer(&p, &w, 3, DEFAULT_NODE_CAP).expect(text);
            assert!(cert.proves_trivial(&w, &rules), "{text}");
        }
    }

    #[test]
    fn nontrivial_stays_unknown() {
        let p = s();
        let w = p.word("t").unwrap();
        assert!(bounded_trivializer(&p, &w, 3, 20_000).is_none());
    }

    #[test]
    fn b_relator_three() {
        let p = Presentation::from_names(
            "B",
            ["a1", "t1", "a2", "t2"],
            &["t2^-1 a1 t1 a1 t1^-1 a1^-1 t1 a1^-1 t1^-1"],
        )
        .unwrap();
        let w = p.word("t2^-1 a1 t1 a1 t1^-1 a1^-1 t1 a1^-1 t1^-1").unwrap();
        assert_eq!(bounded_trivializer(&p, &w, 1, DEFAULT_NODE_CAP).unwrap().len(), 1);
    }
}
