//! Backtracking search for homomorphisms into `S_k` and `Z/n`.
//!
//! Generators are assigned in a fixed order chosen so that relators become
//! checkable as early as possible; every relator is checked the moment its
//! last generator is assigned. The first generator only ranges over
//! conjugacy-class representatives, and raw counts are recovered by
//! weighting each subtree with its class size.

use std::fmt;
use std::hash::Hash;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::word::Run;

/// Largest supported symmetric degree.
pub const MAX_DEGREE: usize = 8;

/// A finite group given by explicit element arithmetic.
pub trait Target: Sync {
    type Elem: Copy + Eq + Hash + Send + Sync + fmt::Debug;

    fn label(&self) -> String;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn inv(&self, a: Self::Elem) -> Self::Elem;
    fn order_of(&self, a: Self::Elem) -> u64;
    fn elements(&self) -> Vec<Self::Elem>;
    /// One representative per conjugacy class, with the class size.
    fn class_reps(&self) -> Vec<(Self::Elem, u64)>;
    fn show(&self, a: Self::Elem) -> String;

    /// `a^e`, by repeated squaring after reducing `e` mod the order of `a`.
    fn pow(&self, a: Self::Elem, e: i64) -> Self::Elem {
        let ord = self.order_of(a) as i64;
        let mut e = e.rem_euclid(ord);
        let mut base = a;
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// A permutation of `{0..k}` stored in a fixed array.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm([u8; MAX_DEGREE]);

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Symmetric {
    k: usize,
}

impl Symmetric {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_DEGREE {
            return Err(Error::Invalid(format!("symmetric degree {k} outside 1..={MAX_DEGREE}")));
        }
        Ok(Symmetric { k })
    }

    fn cycles(&self, a: Perm) -> Vec<Vec<usize>> {
        let mut seen = [false; MAX_DEGREE];
        let mut out = Vec::new();
        for s in 0..self.k {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = a.0[s] as usize;
            while x != s {
                seen[x] = true;
                c.push(x);
                x = a.0[x] as usize;
            }
            out.push(c);
        }
        out
    }
}

fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

impl Target for Symmetric {
    type Elem = Perm;

    fn label(&self) -> String {
        format!("S{}", self.k)
    }

    fn identity(&self) -> Perm {
        let mut p = [0u8; MAX_DEGREE];
        for (i, x) in p.iter_mut().enumerate() {
            *x = i as u8;
        }
        Perm(p)
    }

    /// Apply `a`, then `b`.
    fn mul(&self, a: Perm, b: Perm) -> Perm {
        let mut out = self.identity();
        for i in 0..self.k {
            out.0[i] = b.0[a.0[i] as usize];
        }
        out
    }

    fn inv(&self, a: Perm) -> Perm {
        let mut out = self.identity();
        for i in 0..self.k {
            out.0[a.0[i] as usize] = i as u8;
        }
        out
    }

    fn order_of(&self, a: Perm) -> u64 {
        use num_integer::Integer;
        self.cycles(a).iter().fold(1u64, |acc, c| acc.lcm(&(c.len() as u64)))
    }

    fn elements(&self) -> Vec<Perm> {
        let mut out = Vec::with_capacity(factorial(self.k) as usize);
        let mut cur: Vec<u8> = (0..self.k as u8).collect();
        loop {
            let mut p = self.identity();
            p.0[..self.k].copy_from_slice(&cur);
            out.push(p);
            // Next permutation in lexicographic order.
            let Some(i) = (0..self.k.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                break;
            };
            let j = (i + 1..self.k).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }

    fn class_reps(&self) -> Vec<(Perm, u64)> {
        let mut out = Vec::new();
        for shape in partitions(self.k, self.k) {
            let mut p = self.identity();
            let mut start = 0;
            for &len in &shape {
                for i in 0..len {
                    p.0[start + i] = (start + (i + 1) % len) as u8;
                }
                start += len;
            }
            let mut centralizer = 1u64;
            for len in 1..=self.k {
                let m = shape.iter().filter(|&&l| l == len).count();
                centralizer *= factorial(m) * (len as u64).pow(m as u32);
            }
            out.push((p, factorial(self.k) / centralizer));
        }
        out
    }

    fn show(&self, a: Perm) -> String {
        let cycles: Vec<String> = self
            .cycles(a)
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let pts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
                format!("({})", pts.join(" "))
            })
            .collect();
        if cycles.is_empty() {
            "()".into()
        } else {
            cycles.concat()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cyclic {
    n: u64,
}

impl Cyclic {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("cyclic group of order 0".into()));
        }
        Ok(Cyclic { n })
    }
}

impl Target for Cyclic {
    type Elem = u64;

    fn label(&self) -> String {
        format!("Z/{}", self.n)
    }

    fn identity(&self) -> u64 {
        0
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.n
    }

    fn inv(&self, a: u64) -> u64 {
        (self.n - a) % self.n
    }

    fn order_of(&self, a: u64) -> u64 {
        use num_integer::Integer;
        self.n / a.gcd(&self.n)
    }

    fn pow(&self, a: u64, e: i64) -> u64 {
        let e = e.rem_euclid(self.n as i64) as u128;
        ((a as u128 * e) % self.n as u128) as u64
    }

    fn elements(&self) -> Vec<u64> {
        (0..self.n).collect()
    }

    fn class_reps(&self) -> Vec<(u64, u64)> {
        (0..self.n).map(|x| (x, 1)).collect()
    }

    fn show(&self, a: u64) -> String {
        a.to_string()
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Abort after this many search nodes.
    pub node_budget: u64,
    /// Explicit generator order; `None` picks one greedily.
    pub order: Option<Vec<usize>>,
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { node_budget: 2_000_000_000, order: None, parallel: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientReport {
    pub target: String,
    /// Exact number of homomorphisms.
    pub total: u128,
    /// Homomorphisms counted once per conjugacy class of the first image.
    pub class_collapsed: u128,
    pub nontrivial_image: u128,
    /// Images of the generators under one homomorphism with non-trivial image.
    pub witness: Option<Vec<String>>,
    pub nodes: u64,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

/// Order in which generators get assigned: greedily the one that completes
/// the most relators, then the one occurring in most relators.
pub fn greedy_order(p: &Presentation) -> Vec<usize> {
    let n = p.num_gens();
    let supports: Vec<Vec<usize>> = p
        .rels()
        .iter()
        .map(|r| {
            let mut s: Vec<usize> = r.runs().iter().map(|x| x.gen.index()).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut assigned = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let best = (0..n)
            .filter(|&g| !assigned[g])
            .max_by_key(|&g| {
                let completes = supports
                    .iter()
                    .filter(|s| s.contains(&g) && s.iter().all(|&h| h == g || assigned[h]))
                    .count();
                let touches = supports.iter().filter(|s| s.contains(&g)).count();
                (completes, touches, std::cmp::Reverse(g))
            })
            .expect("an unassigned generator remains");
        assigned[best] = true;
        order.push(best);
    }
    order
}

struct Plan {
    order: Vec<usize>,
    /// Relators (as runs) that become fully assigned at each depth.
    checks: Vec<Vec<Vec<Run>>>,
}

fn plan(p: &Presentation, order: Vec<usize>) -> Plan {
    let mut depth_of = vec![0usize; p.num_gens()];
    for (d, &g) in order.iter().enumerate() {
        depth_of[g] = d;
    }
    let mut checks = vec![Vec::new(); order.len()];
    for r in p.rels() {
        let d = r.runs().iter().map(|x| depth_of[x.gen.index()]).max().unwrap_or(0);
        checks[d].push(r.runs().to_vec());
    }
    Plan { order, checks }
}

fn eval<T: Target>(t: &T, runs: &[Run], img: &[Option<T::Elem>]) -> T::Elem {
    let mut acc = t.identity();
    for r in runs {
        let g = img[r.gen.index()].expect("assigned");
        let x = match r.exp {
            1 => g,
            -1 => t.inv(g),
            e => t.pow(g, e),
        };
        acc = t.mul(acc, x);
    }
    acc
}

/// Whether `images` kill every relator.
pub fn verify_hom<T: Target>(t: &T, p: &Presentation, images: &[T::Elem]) -> bool {
    let img: Vec<Option<T::Elem>> = images.iter().map(|&x| Some(x)).collect();
    images.len() == p.num_gens() && p.rels().iter().all(|r| eval(t, r.runs(), &img) == t.identity())
}

struct Subtree<E> {
    count: u128,
    nodes: u64,
    witness: Option<Vec<E>>,
}

struct Search<'a, T: Target> {
    t: &'a T,
    plan: &'a Plan,
    elements: &'a [T::Elem],
    budget: u64,
}

impl<T: Target> Search<'_, T> {
    fn run(&self, depth: usize, img: &mut Vec<Option<T::Elem>>, out: &mut Subtree<T::Elem>) -> Result<()> {
        out.nodes += 1;
        if out.nodes > self.budget {
            return Err(Error::BudgetExceeded(format!(
                "homomorphism search into {} passed {} nodes",
                self.t.label(),
                self.budget
            )));
        }
        if !self.plan.checks[depth - 1]
            .iter()
            .all(|r| eval(self.t, r, img) == self.t.identity())
        {
            return Ok(());
        }
        if depth == self.plan.order.len() {
            out.count += 1;
            if out.witness.is_none() && img.iter().any(|x| *x != Some(self.t.identity())) {
                out.witness = Some(img.iter().map(|x| x.expect("assigned")).collect());
            }
            return Ok(());
        }
        let g = self.plan.order[depth];
        for &e in self.elements {
            img[g] = Some(e);
            self.run(depth + 1, img, out)?;
        }
        img[g] = None;
        Ok(())
    }
}

pub fn hom_search<T: Target>(p: &Presentation, t: &T, opts: &SearchOptions) -> Result<QuotientReport> {
    let start = Instant::now();
    let n = p.num_gens();
    let label = t.label();
    if n == 0 {
        return Ok(QuotientReport {
            target: label,
            total: 1,
            class_collapsed: 1,
            nontrivial_image: 0,
            witness: None,
            nodes: 1,
            elapsed_ms: start.elapsed().as_millis(),
        });
    }
    let order = opts.order.clone().unwrap_or_else(|| greedy_order(p));
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::Invalid("generator order is not a permutation".into()));
    }
    let plan = plan(p, order);
    let elements = t.elements();
    let reps = t.class_reps();
    // Work units: (class representative, image of the second generator).
    let seconds: Vec<Option<T::Elem>> =
        if n > 1 { elements.iter().map(|&e| Some(e)).collect() } else { vec![None] };
    let units: Vec<(usize, Option<T::Elem>)> =
        (0..reps.len()).flat_map(|i| seconds.iter().map(move |&s| (i, s))).collect();
    let search = Search { t, plan: &plan, elements: &elements, budget: opts.node_budget };
    let work = |&(i, second): &(usize, Option<T::Elem>)| -> Result<Subtree<T::Elem>> {
        let mut img = vec![None; n];
        img[plan.order[0]] = Some(reps[i].0);
        let mut out = Subtree { count: 0, nodes: 0, witness: None };
        match second {
            None => search.run(1, &mut img, &mut out)?,
            Some(s) => {
                out.nodes += 1;
                if plan.checks[0].iter().all(|r| eval(t, r, &img) == t.identity()) {
                    img[plan.order[1]] = Some(s);
                    search.run(2, &mut img, &mut out)?;
                }
            }
        }
        Ok(out)
    };
    let results: Vec<Result<Subtree<T::Elem>>> = if opts.parallel {
        units.par_iter().map(work).collect()
    } else {
        units.iter().map(work).collect()
    };
    let mut total = 0u128;
    let mut collapsed = 0u128;
    let mut nodes = 0u64;
    let mut witness = None;
    for ((i, _), r) in units.iter().zip(results) {
        let r = r?;
        total += r.count * reps[*i].1 as u128;
        collapsed += r.count;
        nodes += r.nodes;
        if witness.is_none() {
            witness = r.witness;
        }
    }
    if nodes > opts.node_budget {
        return Err(Error::BudgetExceeded(format!("homomorphism search into {label} passed {} nodes", opts.node_budget)));
    }
    if let Some(w) = &witness {
        assert!(verify_hom(t, p, w), "witness homomorphism fails a relator");
    }
    Ok(QuotientReport {
        target: label,
        total,
        class_collapsed: collapsed,
        nontrivial_image: total - 1,
        witness: witness.map(|w| w.into_iter().map(|x| t.show(x)).collect()),
        nodes,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Sweep {
    pub reports: Vec<QuotientReport>,
    /// No homomorphism with non-trivial image into any target searched.
    pub no_nontrivial_quotient: bool,
}

/// `S_2 ..= S_max_degree` and `Z/2 ..= Z/12`.
pub fn quotient_sweep(p: &Presentation, max_degree: usize, opts: &SearchOptions) -> Result<Sweep> {
    let mut reports = Vec::new();
    for k in 2..=max_degree {
        reports.push(hom_search(p, &Symmetric::new(k)?, opts)?);
    }
    for n in 2..=12 {
        reports.push(hom_search(p, &Cyclic::new(n)?, opts)?);
    }
    let none = reports.iter().all(|r| r.nontrivial_image == 0);
    Ok(Sweep { reports, no_nontrivial_quotient: none })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Presentation {
        Presentation::from_names("S", ["a", "t"], &["t a^2 t^-1 a^-3"]).unwrap()
    }

    #[test]
    fn class_sizes_sum_to_group_order() {
        for k in 1..=7 {
            let t = Symmetric::new(k).unwrap();
            let sum: u64 = t.class_reps().iter().map(|c| c.1).sum();
            assert_eq!(sum, factorial(k));
            assert_eq!(t.elements().len() as u64, factorial(k));
        }
    }

    #[test]
    fn s_into_z2() {
        let r = hom_search(&s(), &Cyclic::new(2).unwrap(), &SearchOptions::default()).unwrap();
        assert_eq!(r.total, 2);
        assert_eq!(r.nontrivial_image, 1);
    }

    #[test]
    fn trivial_group_into_s3() {
        let p = Presentation::from_names("T", ["x"], &["x"]).unwrap();
        let r = hom_search(&p, &Symmetric::new(3).unwrap(), &SearchOptions::default()).unwrap();
        assert_eq!(r.total, 1);
        assert_eq!(r.nontrivial_image, 0);
    }

    #[test]
    fn free_group_counts() {
        let p = Presentation::from_names("F", ["x", "y"], &[]).unwrap();
        let r = hom_search(&p, &Symmetric::new(3).unwrap(), &SearchOptions::default()).unwrap();
        assert_eq!(r.total, 36);
        assert_eq!(r.class_collapsed, 18);
    }

    #[test]
    fn order_and_parallelism_invariance() {
        let p = s();
        let t = Symmetric::new(4).unwrap();
        let base = hom_search(&p, &t, &SearchOptions::default()).unwrap();
        let seq = SearchOptions { parallel: false, ..SearchOptions::default() };
        assert_eq!(hom_search(&p, &t, &seq).unwrap().total, base.total);
        let rev = SearchOptions { order: Some(vec![1, 0]), ..SearchOptions::default() };
        assert_eq!(hom_search(&p, &t, &rev).unwrap().total, base.total);
    }

    #[test]
    fn budget_is_reported() {
        let p = Presentation::from_names("F", ["x", "y", "z"], &[]).unwrap();
        let opts = SearchOptions { node_budget: 100, ..SearchOptions::default() };
        assert!(matches!(
            hom_search(&p, &Symmetric::new(4).unwrap(), &opts),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn big_exponents_reduce_mod_order() {
        let t = Symmetric::new(5).unwrap();
        let c = t.class_reps()[1].0;
        assert_eq!(t.pow(c, 1 << 40), t.pow(c, (1i64 << 40) % t.order_of(c) as i64));
    }
}
