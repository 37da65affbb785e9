use super::*;
use crate::structures::{OracleKind, PairAtom};

#[test]
fn reduced_word_counts() {
    assert_eq!(reduced_words(1).len(), 4);
    assert_eq!(reduced_words(2).len(), 16);
    assert_eq!(reduced_words(3).len(), 52);
    for w in reduced_words(5) {
        assert!(ReducedWord::new(w.letters().to_vec()).is_ok());
    }
}

#[test]
fn empty_and_unreduced_words_rejected() {
    assert!(ReducedWord::new(vec![]).is_err());
    assert!(ReducedWord::new(vec![Letter::A, Letter::AInv]).is_err());
    assert!(ReducedWord::new(vec![Letter::A, Letter::B, Letter::BInv]).is_err());
}

#[test]
fn apply_word_examples() {
    let mut phi = PartialAutomorphism::new();
    phi.insert(0, 3).unwrap();
    phi.insert(1, 4).unwrap();
    let gamma = PartialAutomorphism::new();
    let a = ReducedWord::new(vec![Letter::A]).unwrap();
    assert_eq!(apply_word(&a, &phi, &gamma, 1), Some(4));
    // a then b: b undefined everywhere
    let ab = ReducedWord::new(vec![Letter::A, Letter::B]).unwrap();
    assert_eq!(apply_word(&ab, &phi, &gamma, 0), None);
    // rightmost letter applies first: a⁻¹a is not reduced, use a a
    let aa = ReducedWord::new(vec![Letter::A, Letter::A]).unwrap();
    assert_eq!(apply_word(&aa, &phi, &gamma, 0), None); // a(0)=3 ∉ dom
}

#[test]
fn init_builder_gives_four_distinct_points() {
    for (kind, seed, level) in [
        (OracleKind::DenseLinearOrder, 0u64, 8),
        (OracleKind::RandomGraph, 42, 3),
        (OracleKind::PureSet, 0, 8),
        (OracleKind::EquivTower, 0, 2),
    ] {
        let oracle = StructureOracle::new(kind, seed);
        let b = init_builder(oracle, level, 6).unwrap();
        let mut pts = Vec::new();
        pts.extend(b.phi().domain());
        pts.extend(b.phi().image());
        pts.extend(b.gamma().domain());
        pts.extend(b.gamma().image());
        assert_eq!(pts.len(), 4, "{kind}");
        let mut dedup = pts.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), 4, "{kind}: points not distinct: {pts:?}");
        assert!(b.steps().iter().all(|s| s.freshness_ok()));
    }
}

#[test]
fn dlo_init_is_golden() {
    let oracle = StructureOracle::new(OracleKind::DenseLinearOrder, 0);
    let b = init_builder(oracle, 8, 6).unwrap();
    assert_eq!(b.phi().pairs(), vec![(0, 1)]);
    assert_eq!(b.gamma().pairs(), vec![(2, 3)]);
}

#[test]
fn extend_step_noop_on_covered_target() {
    let oracle = StructureOracle::new(OracleKind::PureSet, 0);
    let mut b = init_builder(oracle, 8, 6).unwrap();
    let steps_before = b.steps().len();
    let phi_before = b.phi().clone();
    let target = b.certify(&b.phi().domain()).unwrap();
    b.extend_step(Side::Phi, Direction::Domain, &target).unwrap();
    assert_eq!(b.steps().len(), steps_before);
    assert_eq!(*b.phi(), phi_before);
}

#[test]
fn dlo_extend_step_is_order_compatible_and_fresh() {
    let oracle = StructureOracle::new(OracleKind::DenseLinearOrder, 0);
    let mut b = init_builder(oracle, 8, 6).unwrap();
    // extend phi = {0↦1} to domain {0, 2}
    let target = b.certify(&[0, 2]).unwrap();
    b.extend_step(Side::Phi, Direction::Domain, &target).unwrap();
    let d = b.phi().apply(2).unwrap();
    assert!(![0, 1, 2, 3].contains(&d), "image {d} not fresh");
    // order-compatible: 0 < 2 in the window, so phi(0)=1 < d
    let w = b.oracle().full_window();
    assert_eq!(w.rel(1, d).unwrap(), PairAtom::Less);
    let last = b.steps().last().unwrap();
    assert!(last.freshness_ok());
    assert_eq!(last.c_set, vec![0, 2]);
    assert_eq!(last.b_set, vec![1]);
}

#[test]
fn image_direction_extends_preimages() {
    let oracle = StructureOracle::new(OracleKind::RandomGraph, 42);
    let mut b = init_builder(oracle, 3, 6).unwrap();
    let y = b.phi().image()[0];
    let fresh_target: ElementId = (0..b.oracle().size() as ElementId)
        .find(|e| {
            !b.phi().image().contains(e)
                && !b.phi().domain().contains(e)
                && !b.gamma().domain().contains(e)
                && !b.gamma().image().contains(e)
        })
        .unwrap();
    let mut elems = vec![y, fresh_target];
    elems.sort_unstable();
    let target = b.certify(&elems).unwrap();
    b.extend_step(Side::Phi, Direction::Image, &target).unwrap();
    assert!(b.phi().apply_inv(fresh_target).is_some());
    assert!(b.steps().last().unwrap().freshness_ok());
}

#[test]
fn build_pure_set_covers_and_is_fixed_point_free() {
    let oracle = StructureOracle::new(OracleKind::PureSet, 0);
    let b = build(oracle, 8, 20, 6).unwrap();
    let covered: usize = b.phi().len() + b.gamma().len();
    assert!(covered >= 20, "only {covered} mapped points");
    let report = check_fixed_points(b.phi(), b.gamma(), 6, &b.oracle().full_window());
    assert!(report.passed());
    assert!(report.evaluations > 0);
    assert!(b.steps().iter().all(|s| s.freshness_ok()));
}

#[test]
fn adversarial_transposition_is_caught() {
    let mut phi = PartialAutomorphism::new();
    phi.insert(0, 1).unwrap();
    phi.insert(1, 0).unwrap();
    let gamma = PartialAutomorphism::new();
    let mut oracle = StructureOracle::new(OracleKind::PureSet, 0);
    oracle.grow_to_level(4).unwrap();
    let report = check_fixed_points(&phi, &gamma, 2, &oracle.full_window());
    assert!(!report.passed());
    // a² fixes both 0 and 1
    assert!(report
        .violations
        .iter()
        .any(|(w, x)| w.len() == 2 && (*x == 0 || *x == 1)));
}

#[test]
fn schreier_ball_sizes_and_tree_shape() {
    let oracle = StructureOracle::new(OracleKind::RandomGraph, 42);
    let mut b = build(oracle, 3, 2, 5).unwrap();
    for r in 1..=3 {
        let ball = b.schreier_ball(0, r).unwrap();
        assert_eq!(ball.size(), SchreierBall::expected_size(r));
        assert!(ball.is_tree());
    }
    assert_eq!(SchreierBall::expected_size(1), 5);
    assert_eq!(SchreierBall::expected_size(2), 17);
    assert_eq!(SchreierBall::expected_size(3), 53);
}

#[test]
fn freepair_round_trips_through_text() {
    let oracle = StructureOracle::new(OracleKind::RandomGraph, 7);
    let b = build(oracle, 3, 3, 5).unwrap();
    let pair = b.freeze().unwrap();
    let text = pair.to_text();
    let back = FreePair::parse(&text).unwrap();
    assert_eq!(back.phi, pair.phi);
    assert_eq!(back.gamma, pair.gamma);
    assert_eq!(back.steps, pair.steps);
    assert_eq!(back.payloads, pair.payloads);
    assert_eq!(back.size_table, pair.size_table);
    assert_eq!(back.to_text(), text);
    // restored oracle reproduces relations
    let restored = back.restore_oracle().unwrap();
    let w1 = b.oracle().full_window();
    let w2 = restored.full_window();
    assert_eq!(w1.size(), w2.size());
    for i in 0..w1.size().min(40) as ElementId {
        for j in 0..i {
            assert_eq!(w1.rel(i, j).unwrap(), w2.rel(i, j).unwrap());
        }
    }
}

#[test]
fn freepair_parse_rejects_malformed_input() {
    assert!(matches!(FreePair::parse("garbage"), Err(Error::Parse(_))));
    let oracle = StructureOracle::new(OracleKind::PureSet, 0);
    let b = build(oracle, 6, 1, 4).unwrap();
    let text = b.freeze().unwrap().to_text();
    // truncation
    let cut = &text[..text.len() / 2];
    assert!(matches!(FreePair::parse(cut), Err(Error::Parse(_))));
}

#[test]
fn type_preservation_on_sampled_quadruples() {
    let oracle = StructureOracle::new(OracleKind::RandomGraph, 42);
    let b = build(oracle, 3, 6, 5).unwrap();
    let w = b.oracle().full_window();
    b.phi().verify_types(&w).unwrap();
    b.gamma().verify_types(&w).unwrap();
    // explicit 4-tuple check on the first few domain elements
    let dom = b.phi().domain();
    let n = dom.len().min(6);
    for a in 0..n {
        for bb in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let t = [dom[a], dom[bb], dom[c], dom[d]];
                    let img: Vec<ElementId> =
                        t.iter().map(|&x| b.phi().apply(x).unwrap()).collect();
                    assert_eq!(w.qf_type(&t).unwrap(), w.qf_type(&img).unwrap());
                }
            }
        }
    }
}

#[test]
fn tower_fixed_class_examples() {
    let mut oracle = StructureOracle::new(OracleKind::EquivTower, 0);
    oracle.grow_to_level(2).unwrap();
    let find = |o: &StructureOracle, v: &[u32]| {
        (0..o.size() as ElementId)
            .find(|&e| o.tower_vector(e) == Some(v))
            .unwrap()
    };
    let e1 = find(&oracle, &[1]);
    let e2 = find(&oracle, &[2]);
    let e11 = find(&oracle, &[1, 1]);
    let e12 = find(&oracle, &[1, 2]);
    // f(x) = x → n = 1
    let mut id_map = PartialAutomorphism::new();
    id_map.insert(e1, e1).unwrap();
    assert_eq!(tower_fixed_class(&oracle, &id_map, e1).unwrap().index, 1);
    // (1) ↦ (2): E₁ fails, E₂ holds → n = 2
    let mut f = PartialAutomorphism::new();
    f.insert(e1, e2).unwrap();
    assert_eq!(tower_fixed_class(&oracle, &f, e1).unwrap().index, 2);
    // (1,1) ↦ (1,2): first coordinates agree → n = 1
    let mut g = PartialAutomorphism::new();
    g.insert(e11, e12).unwrap();
    assert_eq!(tower_fixed_class(&oracle, &g, e11).unwrap().index, 1);
}

#[test]
fn tower_demo_never_separates() {
    let mut oracle = StructureOracle::new(OracleKind::EquivTower, 0);
    oracle.grow_to_level(2).unwrap();
    let x = (0..oracle.size() as ElementId)
        .find(|&e| oracle.tower_vector(e) == Some(&[1][..]))
        .unwrap();
    let report = tower_neumann_failure_demo(&mut oracle, x, 1000).unwrap();
    assert!(!report.separated);
    assert_eq!(report.candidates, oracle.size());
    assert!(report
        .least_fixed_index
        .iter()
        .all(|&(_, n)| n >= 1 && n <= 3));
}

#[test]
fn built_tower_pair_always_fixes_a_class() {
    let oracle = StructureOracle::new(OracleKind::EquivTower, 0);
    let b = build(oracle, 2, 5, 5).unwrap();
    for x in b.phi().domain() {
        let class = tower_fixed_class(b.oracle(), b.phi(), x).unwrap();
        assert!(class.index >= 1);
    }
}
