use super::*;

fn dlo(level: u32) -> StructureOracle {
    let mut o = StructureOracle::new(OracleKind::DenseLinearOrder, 0);
    o.grow_to_level(level).unwrap();
    o
}

#[test]
fn dlo_level3_is_increasing_initial_segment() {
    let mut o = dlo(3);
    let w = o.window(3).unwrap();
    assert_eq!(w.size(), 3);
    assert_eq!(w.rel(0, 1).unwrap(), PairAtom::Less);
    assert_eq!(w.rel(1, 2).unwrap(), PairAtom::Less);
    assert_eq!(w.rel(0, 2).unwrap(), PairAtom::Less);
}

#[test]
fn dlo_windows_are_monotone_and_deterministic() {
    let mut a = dlo(20);
    let mut b = dlo(20);
    for level in 1..=20 {
        let (wa, n) = {
            let w = a.window(level).unwrap();
            (w.export(), w.size())
        };
        let wb = b.window(level).unwrap().export();
        assert_eq!(wa, wb, "level {level} differs between runs");
        assert_eq!(n, level as usize);
    }
    // ranks of old elements keep their relative order as the window grows
    let mut o = dlo(5);
    let rel_before = o.window(5).unwrap().rel(0, 2).unwrap();
    o.grow_to_level(25).unwrap();
    assert_eq!(o.window(25).unwrap().rel(0, 2).unwrap(), rel_before);
}

#[test]
fn dlo_gap_filling_reaches_every_interval() {
    // after enough levels there is an element strictly between 0 and 1
    let mut o = dlo(30);
    let w = o.window(30).unwrap();
    let between = w
        .elements()
        .any(|e| e != 0 && e != 1 && w.rel(0, e).unwrap() == PairAtom::Less && w.rel(e, 1).unwrap() == PairAtom::Less);
    assert!(between);
    // and an element below 0
    let below = w.elements().any(|e| w.rel(e, 0).unwrap() == PairAtom::Less);
    assert!(below);
}

#[test]
fn tower_level1_window() {
    let mut o = StructureOracle::new(OracleKind::EquivTower, 0);
    let w = o.window(1).unwrap();
    assert_eq!(w.size(), 3);
    // E_1 separates all three, E_i is universal for i > 1
    for i in 0..3u32 {
        for j in i + 1..3 {
            assert_eq!(w.rel(i, j).unwrap(), PairAtom::TowerDiff(vec![1]));
        }
    }
}

#[test]
fn tower_level2_window_and_monotonicity() {
    let mut o = StructureOracle::new(OracleKind::EquivTower, 0);
    let s1 = o.size_at_level(1).unwrap();
    let s2 = o.size_at_level(2).unwrap();
    assert_eq!(s1, 3);
    assert_eq!(s2, 16);
    // level-1 elements keep their vectors
    assert_eq!(o.tower_vector(0).unwrap(), &[] as &[u32]);
    assert_eq!(o.tower_vector(1).unwrap(), &[1]);
    assert_eq!(o.tower_vector(2).unwrap(), &[2]);
}

#[test]
fn random_graph_window_passes_extension_check() {
    let mut o = StructureOracle::new(OracleKind::RandomGraph, 42);
    let size = o.size_at_level(2).unwrap();
    assert!(o.graph_extension_failure(size, 2).is_none());
    let size3 = o.size_at_level(3).unwrap();
    assert!(size3 >= size);
    assert!(o.graph_extension_failure(size3, 3).is_none());
}

#[test]
fn random_graph_deterministic_across_runs() {
    let mut a = StructureOracle::new(OracleKind::RandomGraph, 7);
    let mut b = StructureOracle::new(OracleKind::RandomGraph, 7);
    assert_eq!(
        a.window(3).unwrap().export(),
        b.window(3).unwrap().export()
    );
    // a different seed gives a different window
    let mut c = StructureOracle::new(OracleKind::RandomGraph, 8);
    assert_ne!(
        a.window(3).unwrap().export(),
        c.window(3).unwrap().export()
    );
}

#[test]
fn qf_type_examples() {
    let mut o = dlo(6);
    let w = o.window(6).unwrap();
    let t = w.qf_type(&[2, 0]).unwrap();
    assert_eq!(t.atom(0, 1), &PairAtom::Greater);

    let mut g = StructureOracle::new(OracleKind::RandomGraph, 1);
    let wg = g.window(2).unwrap();
    let diag = wg.qf_type(&[0, 0]).unwrap();
    assert_eq!(diag.atom(0, 1), &PairAtom::Equal);

    let mut tw = StructureOracle::new(OracleKind::EquivTower, 0);
    tw.grow_to_level(2).unwrap();
    // (0) is element 0; (1,1) has vector [1,1]
    let e11 = (0..tw.size() as ElementId)
        .find(|&e| tw.tower_vector(e) == Some(&[1, 1][..]))
        .unwrap();
    let ty = tw.full_window().qf_type(&[0, e11]).unwrap();
    assert_eq!(ty.atom(0, 1), &PairAtom::TowerDiff(vec![1, 2]));
}

#[test]
fn qf_type_is_permutation_equivariant() {
    let mut o = StructureOracle::new(OracleKind::RandomGraph, 3);
    let w = o.window(2).unwrap();
    let t = [0u32, 3, 5];
    let fwd = w.qf_type(&t).unwrap();
    let rev = w.qf_type(&[5, 3, 0]).unwrap();
    // reversing the tuple flips each atom and mirrors the index pairs
    assert_eq!(fwd.atom(0, 1), &rev.atom(1, 2).flip());
    assert_eq!(fwd.atom(0, 2), &rev.atom(0, 2).flip());
    assert_eq!(fwd.atom(1, 2), &rev.atom(0, 1).flip());
}

#[test]
fn same_orbit_examples() {
    let mut o = dlo(6);
    let w = o.window(6).unwrap();
    // (0,2) and (1,5)? id 5 was appended at the top iff sizes worked out;
    // use rel to pick a genuinely increasing pair instead of assuming
    let incr: Vec<ElementId> = w
        .elements()
        .flat_map(|i| w.elements().map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && i != 0 && j != 2 && w.rel(i, j).ok() == Some(PairAtom::Less))
        .map(|(i, j)| vec![i, j])
        .next()
        .unwrap();
    assert!(w.same_orbit(&[0, 2], &incr).unwrap());
    assert!(w
        .same_orbit(&[0, 1, 2], &[2, 1, 0])
        .map(|b| !b)
        .unwrap());
    assert!(matches!(
        w.same_orbit(&[0, 1], &[0, 1, 2]),
        Err(Error::ArityMismatch(2, 3))
    ));

    let mut g = StructureOracle::new(OracleKind::RandomGraph, 42);
    let wg = g.window(2).unwrap();
    let edge = wg
        .elements()
        .flat_map(|i| wg.elements().map(move |j| (i, j)))
        .find(|&(i, j)| i < j && wg.rel(i, j).ok() == Some(PairAtom::Edge))
        .unwrap();
    let nonedge = wg
        .elements()
        .flat_map(|i| wg.elements().map(move |j| (i, j)))
        .find(|&(i, j)| i < j && wg.rel(i, j).ok() == Some(PairAtom::NonEdge))
        .unwrap();
    assert!(!wg.same_orbit(&[edge.0, edge.1], &[nonedge.0, nonedge.1]).unwrap());
}

#[test]
fn realize_extension_dlo_between() {
    let mut o = dlo(6);
    // an element strictly between 0 and 1: none exists yet at level 6,
    // so one is constructed
    let demand = ExtensionDemand::new(vec![0, 1], vec![PairAtom::Greater, PairAtom::Less]);
    let x = o.realize_extension(&demand).unwrap();
    let w = o.full_window();
    assert_eq!(w.rel(0, x).unwrap(), PairAtom::Less);
    assert_eq!(w.rel(x, 1).unwrap(), PairAtom::Less);
}

#[test]
fn realize_extension_dlo_inconsistent() {
    let mut o = dlo(6);
    let demand = ExtensionDemand::new(vec![0, 1], vec![PairAtom::Less, PairAtom::Greater]);
    assert!(matches!(
        o.realize_extension(&demand),
        Err(Error::InconsistentDemand(_))
    ));
}

#[test]
fn realize_extension_graph_pattern() {
    let mut o = StructureOracle::new(OracleKind::RandomGraph, 42);
    o.grow_to_level(2).unwrap();
    let demand = ExtensionDemand::new(vec![0, 1], vec![PairAtom::Edge, PairAtom::NonEdge]);
    let x = o.realize_extension(&demand).unwrap();
    let w = o.full_window();
    assert_eq!(w.rel(x, 0).unwrap(), PairAtom::Edge);
    assert_eq!(w.rel(x, 1).unwrap(), PairAtom::NonEdge);
    // the 2-extension property of the emitted window forces an in-window witness
    assert!((x as usize) < o.size_at_level(2).unwrap());
}

#[test]
fn realize_extension_tower_fresh_class() {
    let mut o = StructureOracle::new(OracleKind::EquivTower, 0);
    o.grow_to_level(1).unwrap();
    // element 0 is (0); demand: not E_1-equivalent, E_2-equivalent to it
    let demand = ExtensionDemand::new(vec![0], vec![PairAtom::TowerDiff(vec![1])]);
    let x = o.realize_extension(&demand).unwrap();
    assert_eq!(o.full_window().rel(x, 0).unwrap(), PairAtom::TowerDiff(vec![1]));
    // avoiding the in-window witnesses forces a fresh class id
    let avoid: Vec<ElementId> = (0..o.size() as ElementId).collect();
    let y = o.realize_extension_avoiding(&demand, &avoid).unwrap();
    assert!(!avoid.contains(&y));
    assert_eq!(o.full_window().rel(y, 0).unwrap(), PairAtom::TowerDiff(vec![1]));
}

#[test]
fn realize_equality_demand_returns_base_element() {
    let mut o = dlo(4);
    let demand = ExtensionDemand::new(vec![2], vec![PairAtom::Equal]);
    assert_eq!(o.realize_extension(&demand).unwrap(), 2);
}

#[test]
fn export_round_shape() {
    let mut o = dlo(3);
    let text = o.window(3).unwrap().export();
    assert!(text.starts_with("window dlo seed=0 size=3\n"));
    assert!(text.contains("element 0 rank=0"));
    assert!(text.contains("rel lt 0 1"));
}

#[test]
fn resource_limit_reported() {
    let mut o = StructureOracle::new(OracleKind::EquivTower, 0).with_max_elements(100);
    assert!(matches!(
        o.grow_to_level(3),
        Err(Error::ResourceLimit(_))
    ));
}
