//! Exponent-sum matrices, Smith normal form over the integers, and first
//! homology.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::presentation::Presentation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = IntMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = BigInt::from(v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * &m[(n - 1, n - 1)]
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row[dst] += k · row[src]`
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        for j in 0..self.cols {
            let v = k * &self[(src, j)];
            self[(dst, j)] += v;
        }
    }

    /// `col[dst] += k · col[src]`
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        for i in 0..self.rows {
            let v = k * &self[(i, src)];
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Row `i`, column `j`: exponent sum of generator `j` in relator `i`.
pub fn exponent_matrix(p: &Presentation) -> IntMatrix {
    let mut m = IntMatrix::zeros(p.num_rels(), p.num_gens());
    for (i, r) in p.rels().iter().enumerate() {
        for run in r.runs() {
            m[(i, run.gen.index())] += BigInt::from(run.exp);
        }
    }
    m
}

/// `u · m · v = d`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (r, c) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    for t in 0..r.min(c) {
        loop {
            // Smallest non-zero entry of the trailing block.
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    if !d[(i, j)].is_zero()
                        && pivot.is_none_or(|(pi, pj)| d[(i, j)].abs() < d[(pi, pj)].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = d[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..r {
                let q = -d[(i, t)].div_floor(&p);
                if !q.is_zero() {
                    d.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                }
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..c {
                let q = -d[(t, j)].div_floor(&p);
                if !q.is_zero() {
                    d.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                }
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // Divisibility: fold an offending row into row t and retry.
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !d[(i, j)].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => {
                    if p.is_negative() {
                        d.negate_row(t);
                        u.negate_row(t);
                    }
                    break;
                }
            }
        }
    }
    let out = Smith { u, d, v };
    out.assert_valid(m);
    out
}

impl Smith {
    /// Replays `u · m · v`, unimodularity and the divisibility chain.
    pub fn check(&self, m: &IntMatrix) -> bool {
        let prod = self.u.mul(m).mul(&self.v);
        let diag = self.d.diagonal();
        let chain = diag.windows(2).all(|w| {
            if w[0].is_zero() {
                w[1].is_zero()
            } else {
                w[1].is_multiple_of(&w[0])
            }
        });
        prod == self.d
            && self.d.is_diagonal()
            && diag.iter().all(|x| !x.is_negative())
            && chain
            && self.u.det().abs().is_one()
            && self.v.det().abs().is_one()
    }

    fn assert_valid(&self, m: &IntMatrix) {
        assert!(self.check(m), "Smith normal form failed its own replay");
    }

    pub fn rank(&self) -> usize {
        self.d.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// `d1 | d2 | ...`, each greater than one.
    pub torsion: Vec<BigInt>,
}

impl AbelianInvariants {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// `#Hom(G, Z/n) = #Hom(H1, Z/n)`.
    pub fn hom_count_cyclic(&self, n: u64) -> BigInt {
        let n = BigInt::from(n);
        let mut count = num_traits::pow(n.clone(), self.free_rank);
        for d in &self.torsion {
            count *= d.gcd(&n);
        }
        count
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "trivial");
        }
        let mut parts: Vec<String> = self.torsion.iter().map(|d| format!("Z/{d}")).collect();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            k => parts.push(format!("Z^{k}")),
        }
        write!(f, "{}", parts.join(" x "))
    }
}

pub fn h1(p: &Presentation) -> AbelianInvariants {
    let snf = smith_normal_form(&exponent_matrix(p));
    let diag = snf.d.diagonal();
    AbelianInvariants {
        free_rank: p.num_gens() - snf.rank(),
        torsion: diag.into_iter().filter(|x| *x > BigInt::one()).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct H2Corroboration {
    pub balanced: bool,
    pub h1_trivial: bool,
    pub corroborated: bool,
    pub note: String,
}

/// Balanced with trivial H1 implies trivial H2 for the presented group
/// (deficiency argument). H2 itself is not computed.
pub fn h2_corroborate(p: &Presentation) -> H2Corroboration {
    let balanced = p.is_balanced();
    let h1_trivial = h1(p).is_trivial();
    let corroborated = balanced && h1_trivial;
    let note = if corroborated {
        "balanced with H1 = 0: H2 = 0 follows by the deficiency argument".to_string()
    } else if !balanced {
        format!("not balanced ({} generators, {} relators)", p.num_gens(), p.num_rels())
    } else {
        "balanced but H1 is non-trivial".to_string()
    };
    H2Corroboration { balanced, h1_trivial, corroborated, note }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_smith_examples() {
        let m = IntMatrix::from_rows(&[vec![2, 4], vec![0, 6]]);
        let s = smith_normal_form(&m);
        assert_eq!(s.d.diagonal(), vec![BigInt::from(2), BigInt::from(6)]);
        assert_eq!(m.det(), BigInt::from(12));
        let id = IntMatrix::identity(3);
        assert_eq!(smith_normal_form(&id).d, id);
        let z = IntMatrix::zeros(2, 3);
        assert_eq!(smith_normal_form(&z).d, z);
    }

    #[test]
    fn s_matrix_and_h1() {
        let s = Presentation::from_names("S", ["a", "t"], &["t a^2 t^-1 a^-3"]).unwrap();
        assert_eq!(exponent_matrix(&s), IntMatrix::from_rows(&[vec![-1, 0]]));
        let inv = h1(&s);
        assert_eq!((inv.free_rank, inv.torsion.len()), (1, 0));
        assert_eq!(inv.to_string(), "Z");
        assert!(!h2_corroborate(&s).corroborated);
        let free = Presentation::from_names("F", ["x"], &[]).unwrap();
        assert!(!h2_corroborate(&free).corroborated);
    }

    #[test]
    fn torsion_display() {
        let p = Presentation::from_names("T", ["x", "y"], &["x^4", "y^6", "x^2 y^-2 x^-2 y^2"]).unwrap();
        assert_eq!(h1(&p).to_string(), "Z/2 x Z/12");
        assert_eq!(h1(&p).hom_count_cyclic(2), BigInt::from(4));
    }

    proptest! {
        #[test]
        fn smith_replays(rows in prop::collection::vec(prop::collection::vec(-20i64..20, 4), 1..5)) {
            let m = IntMatrix::from_rows(&rows);
            let s = smith_normal_form(&m);
            prop_assert!(s.check(&m));
        }
    }
}
