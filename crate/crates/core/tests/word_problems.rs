use std::sync::{Arc, OnceLock};

use gforge::constructions::{britton_consistency, build, commutator_c, psi, s_group, Builtin};
use gforge::certificate::Certificate;
use gforge::rips::{rips_construct, RipsOutput, RipsParams};
use gforge::wp::{BrittonSolver, GraphGroup, GraphSolver, Verdict, WordProblem};
use gforge::{Gen, Letter, Word};
use proptest::prelude::*;

fn rips_b() -> &'static RipsOutput {
    static CELL: OnceLock<RipsOutput> = OnceLock::new();
    CELL.get_or_init(|| rips_construct(build(Builtin::B), &RipsParams::default()).unwrap())
}

#[test]
fn britton_ten_thousand_random_words() {
    let r = britton_consistency(10_000, 20_240_611).unwrap();
    assert_eq!(r.nf_mismatches, 0);
    assert_eq!(r.contradictions, 0);
    assert!(r.bounded_certified > 1_000, "{r:?}");
}

#[test]
fn britton_certificate_survives_text() {
    let s = build(Builtin::S);
    let solver = BrittonSolver { group: s_group() };
    let w = psi().substitute(&commutator_c(&s)).unwrap();
    let Verdict::Trivial(cert) = solver.audited(&w).unwrap() else { panic!("psi(c) should be trivial") };
    let text = cert.to_text(s.alphabet());
    let back = Certificate::from_text(&text, s.alphabet()).unwrap();
    assert_eq!(back, cert);
    assert!(back.proves_trivial(&w, &solver.rules()));
}

#[test]
fn graph_group_knows_commuting_pairs() {
    let l = build(Builtin::Lambda);
    let solver = GraphSolver { group: GraphGroup::from_presentation(&l).unwrap() };
    let yes = l.word("alpha1 zeta alpha1^-1 zeta^-1").unwrap();
    let no = l.word("alpha2 zeta alpha2^-1 zeta^-1").unwrap();
    assert!(solver.audited(&yes).unwrap().is_trivial());
    assert!(matches!(solver.audited(&no).unwrap(), Verdict::NonTrivial));
}

fn arb_word(gens: u32, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..gens, any::<bool>()), 0..max)
        .prop_map(|v| Word::from_letters(&v.into_iter().map(|(g, s)| Letter::new(Gen(g), s)).collect::<Vec<_>>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dehn_kills_products_of_relator_conjugates(
        picks in prop::collection::vec((0usize..64, any::<bool>(), arb_word(6, 6)), 1..4)
    ) {
        let rips = rips_b();
        let rels = rips.gamma.rels();
        let mut w = Word::empty();
        for (i, inv, c) in &picks {
            let r = &rels[i % rels.len()];
            let r = if *inv { r.inverse() } else { r.clone() };
            w = w.mul(&r.conjugate_by(c));
        }
        let (ok, cert) = rips.solver.dehn_is_trivial(&w);
        prop_assert!(ok);
        prop_assert!(cert.proves_trivial(&w, &rips.solver.rules()));
    }
}

#[test]
fn solvers_are_shareable() {
    let rips = rips_b();
    let shared: Arc<dyn WordProblem> = rips.solver.clone();
    let a1 = Word::gen(rips.kernel[0]);
    assert!(matches!(shared.decide(&a1).unwrap(), Verdict::NonTrivial));
}
