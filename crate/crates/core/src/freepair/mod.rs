//! Partial automorphisms, reduced words, the freshness-preserving extension
//! step, the back-and-forth builder of a free pair, fixed-point
//! certification, Schreier balls, and the equivalence-tower counterexample.
//!
//! The builder grows two partial automorphisms φ, γ so that no reduced word
//! in them has a fixed point. The inductive guarantee is the freshness
//! condition of each extension step: when a side with partner set B is
//! extended to a new domain C, the new partner set D satisfies
//! D ∩ (C ∪ B ∪ A′ ∪ B′) = B exactly, where A′, B′ are the other map's
//! domain and image. Every step is recorded and the condition re-checked
//! from the record; word enumeration up to the certification depth provides
//! independent evidence.

mod persist;

use std::collections::BTreeMap;
use std::fmt;

use crate::closure::{
    acl, assert_no_algebraicity, tower_mix_closure, CertifiedSet, ClosureCert,
    NoAlgebraicityReport,
};
use crate::error::Error;
use crate::structures::{ElementId, ExtensionDemand, OracleKind, StructureOracle, Window};
use crate::Result;

/// Generator letters, in canonical enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Letter::A => "a",
            Letter::AInv => "a-",
            Letter::B => "b",
            Letter::BInv => "b-",
        }
    }

    pub fn parse(s: &str) -> Result<Letter> {
        match s {
            "a" => Ok(Letter::A),
            "a-" => Ok(Letter::AInv),
            "b" => Ok(Letter::B),
            "b-" => Ok(Letter::BInv),
            other => Err(Error::Parse(format!("unknown letter `{other}`"))),
        }
    }
}

/// Freely reduced nonempty word over {a, a⁻¹, b, b⁻¹}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn new(letters: Vec<Letter>) -> Result<ReducedWord> {
        if letters.is_empty() {
            return Err(Error::InvariantViolation("empty word".into()));
        }
        if letters.windows(2).any(|w| w[0] == w[1].inverse()) {
            return Err(Error::InvariantViolation(format!(
                "word {letters:?} is not reduced"
            )));
        }
        Ok(ReducedWord { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            f.write_str(l.symbol())?;
        }
        Ok(())
    }
}

/// All reduced words of length 1..=max_len: length ascending, then
/// lexicographic in the canonical letter order. Count is Σ 4·3^(l−1).
pub fn reduced_words(max_len: usize) -> Vec<ReducedWord> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * 3);
        for w in &layer {
            for l in Letter::ALL {
                if w.first().map(|&f| f == l.inverse()).unwrap_or(false) {
                    continue;
                }
                let mut v = Vec::with_capacity(w.len() + 1);
                v.push(l);
                v.extend_from_slice(w);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned().map(|letters| ReducedWord { letters }));
        layer = next;
    }
    out
}

/// Finite type-preserving bijection, stored with both directions indexed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAutomorphism {
    forward: BTreeMap<ElementId, ElementId>,
    inverse: BTreeMap<ElementId, ElementId>,
}

impl PartialAutomorphism {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn apply(&self, x: ElementId) -> Option<ElementId> {
        self.forward.get(&x).copied()
    }

    pub fn apply_inv(&self, y: ElementId) -> Option<ElementId> {
        self.inverse.get(&y).copied()
    }

    pub fn domain(&self) -> Vec<ElementId> {
        self.forward.keys().copied().collect()
    }

    pub fn image(&self) -> Vec<ElementId> {
        self.inverse.keys().copied().collect()
    }

    /// Ordered (x, f(x)) pairs.
    pub fn pairs(&self) -> Vec<(ElementId, ElementId)> {
        self.forward.iter().map(|(&x, &y)| (x, y)).collect()
    }

    pub fn insert(&mut self, x: ElementId, y: ElementId) -> Result<()> {
        if self.forward.contains_key(&x) || self.inverse.contains_key(&y) {
            return Err(Error::InvariantViolation(format!(
                "mapping {x} ↦ {y} collides with an existing pair"
            )));
        }
        self.forward.insert(x, y);
        self.inverse.insert(y, x);
        Ok(())
    }

    /// Exhaustive type-preservation check over all domain pairs. For binary
    /// signatures this implies preservation of all tuple types.
    pub fn verify_types(&self, window: &Window<'_>) -> Result<()> {
        let pairs = self.pairs();
        for (i, &(x1, y1)) in pairs.iter().enumerate() {
            for &(x2, y2) in &pairs[i + 1..] {
                if window.rel(x1, x2)? != window.rel(y1, y2)? {
                    return Err(Error::InvariantViolation(format!(
                        "map is not type-preserving on ({x1},{x2})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Right-to-left word application; `None` as soon as a factor is undefined.
pub fn apply_word(
    word: &ReducedWord,
    phi: &PartialAutomorphism,
    gamma: &PartialAutomorphism,
    x: ElementId,
) -> Option<ElementId> {
    let mut cur = x;
    for l in word.letters().iter().rev() {
        cur = match l {
            Letter::A => phi.apply(cur)?,
            Letter::AInv => phi.apply_inv(cur)?,
            Letter::B => gamma.apply(cur)?,
            Letter::BInv => gamma.apply_inv(cur)?,
        };
    }
    Some(cur)
}

/// Which of the two partial automorphisms a step extends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Phi,
    Gamma,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Phi => "phi",
            Side::Gamma => "gamma",
        }
    }

    pub fn parse(s: &str) -> Result<Side> {
        match s {
            "phi" => Ok(Side::Phi),
            "gamma" => Ok(Side::Gamma),
            other => Err(Error::Parse(format!("unknown side `{other}`"))),
        }
    }
}

/// Which side of the chosen map a step extends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Domain,
    Image,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Domain => "domain",
            Direction::Image => "image",
        }
    }

    pub fn parse(s: &str) -> Result<Direction> {
        match s {
            "domain" => Ok(Direction::Domain),
            "image" => Ok(Direction::Image),
            other => Err(Error::Parse(format!("unknown direction `{other}`"))),
        }
    }
}

/// Ledger record of one extension step. Set names follow the extension
/// picture φ: A → B extended to φ̃: C → D against the other map γ: A′ → B′;
/// when the image side is extended the roles of domain and image swap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub side: Side,
    pub direction: Direction,
    /// extended side after the step (the target C)
    pub c_set: Vec<ElementId>,
    /// partner side before the step (B)
    pub b_set: Vec<ElementId>,
    /// other map's domain (A′)
    pub other_dom: Vec<ElementId>,
    /// other map's image (B′)
    pub other_img: Vec<ElementId>,
    /// partner side after the step (D)
    pub d_set: Vec<ElementId>,
    /// (new point, fresh partner) pairs added by the step
    pub added: Vec<(ElementId, ElementId)>,
}

impl StepRecord {
    /// The freshness condition D ∩ (C ∪ B ∪ A′ ∪ B′) = B, checked exactly
    /// from the recorded sets.
    pub fn freshness_ok(&self) -> bool {
        let in_union = |x: &ElementId| {
            self.c_set.contains(x)
                || self.b_set.contains(x)
                || self.other_dom.contains(x)
                || self.other_img.contains(x)
        };
        self.b_set.iter().all(|b| self.d_set.contains(b))
            && self
                .d_set
                .iter()
                .all(|d| in_union(d) == self.b_set.contains(d))
    }
}

/// Result of enumerating reduced words against a pair over a window.
#[derive(Clone, Debug)]
pub struct FixedPointReport {
    pub max_length: usize,
    /// number of (word, element) evaluations that were defined
    pub evaluations: u64,
    pub violations: Vec<(ReducedWord, ElementId)>,
}

impl FixedPointReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluate every reduced word of length ≤ `max_len` at every window element
/// where it is defined; a violation is a defined evaluation equal to its
/// argument.
pub fn check_fixed_points(
    phi: &PartialAutomorphism,
    gamma: &PartialAutomorphism,
    max_len: usize,
    window: &Window<'_>,
) -> FixedPointReport {
    let mut evaluations = 0u64;
    let mut violations = Vec::new();
    for word in reduced_words(max_len) {
        for x in window.elements() {
            if let Some(y) = apply_word(&word, phi, gamma, x) {
                evaluations += 1;
                if y == x {
                    violations.push((word.clone(), x));
                }
            }
        }
    }
    FixedPointReport {
        max_length: max_len,
        evaluations,
        violations,
    }
}

/// How the builder certifies acl-closedness of its extension targets.
enum CertSource {
    /// Oracle-wide sampled triviality report: acl(E) = E for all finite E.
    Report(NoAlgebraicityReport),
    /// Per-set coordinatewise closure. Used for the equivalence tower, where
    /// bases of two or more elements pin their coordinatewise mixes, so no
    /// oracle-wide triviality report can exist; each target is closed and
    /// certified individually instead.
    TowerCoordinates,
}

/// Back-and-forth builder of a free pair over a structure oracle.
pub struct FreePairBuilder {
    oracle: StructureOracle,
    phi: PartialAutomorphism,
    gamma: PartialAutomorphism,
    steps: Vec<StepRecord>,
    cert_depth: usize,
    level: u32,
    cert: CertSource,
}

impl FreePairBuilder {
    pub fn oracle(&self) -> &StructureOracle {
        &self.oracle
    }

    pub fn oracle_mut(&mut self) -> &mut StructureOracle {
        &mut self.oracle
    }

    pub fn phi(&self) -> &PartialAutomorphism {
        &self.phi
    }

    pub fn gamma(&self) -> &PartialAutomorphism {
        &self.gamma
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn cert_depth(&self) -> usize {
        self.cert_depth
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// The oracle-wide no-algebraicity report, when the builder certifies
    /// through one (all oracles except the equivalence tower).
    pub fn closure_report(&self) -> Option<&NoAlgebraicityReport> {
        match &self.cert {
            CertSource::Report(r) => Some(r),
            CertSource::TowerCoordinates => None,
        }
    }

    /// Certify a finite target as acl-closed. With an oracle-wide report the
    /// set is returned as given; in per-set mode it is first replaced by its
    /// algebraic closure (which may be strictly larger) and then re-certified
    /// closed.
    pub fn certify(&self, elements: &[ElementId]) -> Result<CertifiedSet> {
        match &self.cert {
            CertSource::Report(report) => {
                CertifiedSet::via_report(report, &self.oracle, elements)
            }
            CertSource::TowerCoordinates => {
                let closed = tower_mix_closure(&self.oracle, elements)?;
                CertifiedSet::via_tower_mix(&self.oracle, &closed)
            }
        }
    }

    /// Extend one side of one map to cover `target`, certified acl-closed.
    /// Every new point receives a fresh partner satisfying the freshness
    /// condition; afterwards word enumeration up to the certification depth
    /// re-verifies fixed-point freeness.
    pub fn extend_step(
        &mut self,
        side: Side,
        direction: Direction,
        target: &CertifiedSet,
    ) -> Result<()> {
        let changed = self.do_extend(side, direction, target)?;
        if changed {
            self.verify_fixed_points()?;
        }
        Ok(())
    }

    /// Extension without the per-step word enumeration; the freshness ledger
    /// check still runs. Used on bulk paths (Schreier ball construction)
    /// where a single final enumeration replaces per-step ones.
    fn extend_step_unverified(
        &mut self,
        side: Side,
        direction: Direction,
        target: &CertifiedSet,
    ) -> Result<()> {
        self.do_extend(side, direction, target)?;
        Ok(())
    }

    fn verify_fixed_points(&self) -> Result<()> {
        let report = check_fixed_points(
            &self.phi,
            &self.gamma,
            self.cert_depth,
            &self.oracle.full_window(),
        );
        if let Some((word, x)) = report.violations.first() {
            return Err(Error::InvariantViolation(format!(
                "word {word} fixes element {x}"
            )));
        }
        Ok(())
    }

    fn do_extend(
        &mut self,
        side: Side,
        direction: Direction,
        target: &CertifiedSet,
    ) -> Result<bool> {
        match target.cert() {
            ClosureCert::OracleTrivial { fingerprint }
            | ClosureCert::TowerCoordinates { fingerprint } => {
                if *fingerprint != self.oracle.fingerprint() {
                    return Err(Error::Uncertified(
                        "target certificate is for a different oracle".into(),
                    ));
                }
            }
            ClosureCert::Stabilized { .. } => {}
        }
        let (this, other) = match side {
            Side::Phi => (&mut self.phi, &self.gamma),
            Side::Gamma => (&mut self.gamma, &self.phi),
        };
        // orient so `pairs` maps extended-side points to partners
        let mut pairs: Vec<(ElementId, ElementId)> = match direction {
            Direction::Domain => this.pairs(),
            Direction::Image => this.pairs().into_iter().map(|(x, y)| (y, x)).collect(),
        };
        pairs.sort_unstable();
        let current: Vec<ElementId> = pairs.iter().map(|&(p, _)| p).collect();
        for &e in &current {
            if !target.contains(e) {
                return Err(Error::InconsistentDemand(format!(
                    "target misses current element {e}"
                )));
            }
        }
        let new_points: Vec<ElementId> = target
            .elements()
            .iter()
            .copied()
            .filter(|e| !current.contains(e))
            .collect();
        if new_points.is_empty() {
            return Ok(false);
        }
        let b_before: Vec<ElementId> = pairs.iter().map(|&(_, q)| q).collect();
        let other_dom = other.domain();
        let other_img = other.image();
        let mut avoid: Vec<ElementId> = target.elements().to_vec();
        avoid.extend_from_slice(&b_before);
        avoid.extend_from_slice(&other_dom);
        avoid.extend_from_slice(&other_img);
        avoid.sort_unstable();
        avoid.dedup();
        // Assign partners with backtracking: a pinned point (one algebraic
        // over the others in the target) forces its partner to the matching
        // mix of the partners already chosen, so an unlucky earlier choice
        // can force an excluded element and must be revisable.
        let mut added: Vec<(ElementId, ElementId)> = Vec::with_capacity(new_points.len());
        let mut banned: Vec<Vec<ElementId>> = vec![Vec::new(); new_points.len()];
        let mut attempts = 0usize;
        while added.len() < new_points.len() {
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::BudgetExhausted(
                    "partner assignment exceeded the backtracking budget".into(),
                ));
            }
            let k = added.len();
            let c = new_points[k];
            let base: Vec<ElementId> = pairs.iter().map(|&(_, q)| q).collect();
            let atoms = {
                let w = self.oracle.full_window();
                pairs
                    .iter()
                    .map(|&(p, _)| w.rel(c, p))
                    .collect::<Result<Vec<_>>>()?
            };
            let demand = ExtensionDemand::new(base, atoms);
            let mut avoid_k: Vec<ElementId> = avoid.iter().chain(&banned[k]).copied().collect();
            avoid_k.sort_unstable();
            avoid_k.dedup();
            match self.oracle.realize_extension_avoiding(&demand, &avoid_k) {
                Ok(d) => {
                    pairs.push((c, d));
                    avoid.push(d);
                    added.push((c, d));
                }
                Err(Error::BudgetExhausted(_)) if k > 0 => {
                    let (_, d_prev) = added.pop().expect("k > 0");
                    pairs.pop();
                    avoid.pop();
                    banned[k].clear();
                    banned[k - 1].push(d_prev);
                }
                Err(e) => return Err(e),
            }
        }
        for &(c, d) in &added {
            match direction {
                Direction::Domain => this.insert(c, d)?,
                Direction::Image => this.insert(d, c)?,
            }
        }
        let record = StepRecord {
            side,
            direction,
            c_set: target.elements().to_vec(),
            b_set: b_before,
            other_dom,
            other_img,
            d_set: pairs.iter().map(|&(_, q)| q).collect(),
            added,
        };
        if !record.freshness_ok() {
            return Err(Error::InvariantViolation(
                "extension step violated the freshness condition".into(),
            ));
        }
        self.steps.push(record);
        Ok(true)
    }

    /// Least element of the level window not yet on the given side.
    fn least_uncovered(&mut self, side: Side, direction: Direction) -> Result<Option<ElementId>> {
        let size = self.oracle.size_at_level(self.level)?;
        let map = match side {
            Side::Phi => &self.phi,
            Side::Gamma => &self.gamma,
        };
        let covered: Vec<ElementId> = match direction {
            Direction::Domain => map.domain(),
            Direction::Image => map.image(),
        };
        Ok((0..size as ElementId).find(|e| !covered.contains(e)))
    }

    /// One back-and-forth round: extend φ-domain, φ-image, γ-domain, γ-image
    /// each by the least uncovered window element.
    pub fn round(&mut self) -> Result<()> {
        for (side, direction) in [
            (Side::Phi, Direction::Domain),
            (Side::Phi, Direction::Image),
            (Side::Gamma, Direction::Domain),
            (Side::Gamma, Direction::Image),
        ] {
            let Some(c) = self.least_uncovered(side, direction)? else {
                continue;
            };
            let map = match side {
                Side::Phi => &self.phi,
                Side::Gamma => &self.gamma,
            };
            let mut elems = match direction {
                Direction::Domain => map.domain(),
                Direction::Image => map.image(),
            };
            elems.push(c);
            elems.sort_unstable();
            let target = self.certify(&elems)?;
            self.extend_step(side, direction, &target)?;
        }
        Ok(())
    }

    /// Freeze into a persistable pair.
    pub fn freeze(&self) -> Result<FreePair> {
        FreePair::from_builder(self)
    }

    /// Breadth-first orbit ball of radius `r` around `base`, auto-extending
    /// the pair wherever a generator is undefined. Verifies the tree shape
    /// (size 2·3^r − 1, no revisits) and finally re-runs the word
    /// enumeration up to the certification depth.
    pub fn schreier_ball(&mut self, base: ElementId, r: usize) -> Result<SchreierBall> {
        if (base as usize) >= self.oracle.size() {
            return Err(Error::NotInWindow(base));
        }
        let mut vertices: Vec<ElementId> = vec![base];
        let mut index: BTreeMap<ElementId, u32> = BTreeMap::new();
        index.insert(base, 0);
        let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
        // (vertex index, letter that produced it — its inverse leads back)
        let mut frontier: Vec<(u32, Option<Letter>)> = vec![(0, None)];
        for _ in 0..r {
            let mut next = Vec::new();
            for &(vi, arrived) in &frontier {
                let v = vertices[vi as usize];
                for l in Letter::ALL {
                    if arrived.map(|a| l == a.inverse()).unwrap_or(false) {
                        continue; // edge back to the parent
                    }
                    let w = self.apply_letter_extending(l, v)?;
                    if w == v {
                        return Err(Error::NotATree(format!(
                            "generator {} fixes element {v}",
                            l.symbol()
                        )));
                    }
                    if index.contains_key(&w) {
                        return Err(Error::NotATree(format!(
                            "element {w} reached twice within radius {r}"
                        )));
                    }
                    let wi = vertices.len() as u32;
                    index.insert(w, wi);
                    vertices.push(w);
                    adj.push(Vec::new());
                    adj[vi as usize].push(wi);
                    adj[wi as usize].push(vi);
                    next.push((wi, Some(l)));
                }
            }
            frontier = next;
        }
        self.verify_fixed_points()?;
        Ok(SchreierBall {
            base,
            radius: r,
            vertices,
            adj,
        })
    }

    /// Apply a letter, extending the corresponding map side with a fresh
    /// partner if undefined.
    fn apply_letter_extending(&mut self, l: Letter, v: ElementId) -> Result<ElementId> {
        let (side, direction, existing) = match l {
            Letter::A => (Side::Phi, Direction::Domain, self.phi.apply(v)),
            Letter::AInv => (Side::Phi, Direction::Image, self.phi.apply_inv(v)),
            Letter::B => (Side::Gamma, Direction::Domain, self.gamma.apply(v)),
            Letter::BInv => (Side::Gamma, Direction::Image, self.gamma.apply_inv(v)),
        };
        if let Some(w) = existing {
            return Ok(w);
        }
        let map = match side {
            Side::Phi => &self.phi,
            Side::Gamma => &self.gamma,
        };
        let mut elems = match direction {
            Direction::Domain => map.domain(),
            Direction::Image => map.image(),
        };
        elems.push(v);
        elems.sort_unstable();
        let target = self.certify(&elems)?;
        self.extend_step_unverified(side, direction, &target)?;
        let w = match l {
            Letter::A => self.phi.apply(v),
            Letter::AInv => self.phi.apply_inv(v),
            Letter::B => self.gamma.apply(v),
            Letter::BInv => self.gamma.apply_inv(v),
        };
        w.ok_or_else(|| Error::InvariantViolation("extension did not cover its target".into()))
    }
}

/// Breadth-first orbit ball of a frozen pair: no extension happens, so every
/// generator must already be defined wherever the walk needs it. Vertex
/// ordering is identical to [`FreePairBuilder::schreier_ball`] (and to the
/// abstract Cayley ball): children in canonical letter order with the
/// parent edge skipped.
pub fn frozen_schreier_ball(
    phi: &PartialAutomorphism,
    gamma: &PartialAutomorphism,
    base: ElementId,
    r: usize,
) -> Result<SchreierBall> {
    let mut vertices: Vec<ElementId> = vec![base];
    let mut index: BTreeMap<ElementId, u32> = BTreeMap::new();
    index.insert(base, 0);
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    let mut frontier: Vec<(u32, Option<Letter>)> = vec![(0, None)];
    for _ in 0..r {
        let mut next = Vec::new();
        for &(vi, arrived) in &frontier {
            let v = vertices[vi as usize];
            for l in Letter::ALL {
                if arrived.map(|a| l == a.inverse()).unwrap_or(false) {
                    continue;
                }
                let w = match l {
                    Letter::A => phi.apply(v),
                    Letter::AInv => phi.apply_inv(v),
                    Letter::B => gamma.apply(v),
                    Letter::BInv => gamma.apply_inv(v),
                }
                .ok_or_else(|| {
                    Error::Uncertified(format!(
                        "generator {} undefined at element {v}; the pair does not cover radius {r}",
                        l.symbol()
                    ))
                })?;
                if w == v {
                    return Err(Error::NotATree(format!(
                        "generator {} fixes element {v}",
                        l.symbol()
                    )));
                }
                if index.contains_key(&w) {
                    return Err(Error::NotATree(format!(
                        "element {w} reached twice within radius {r}"
                    )));
                }
                let wi = vertices.len() as u32;
                index.insert(w, wi);
                vertices.push(w);
                adj.push(Vec::new());
                adj[vi as usize].push(wi);
                adj[wi as usize].push(vi);
                next.push((wi, Some(l)));
            }
        }
        frontier = next;
    }
    Ok(SchreierBall {
        base,
        radius: r,
        vertices,
        adj,
    })
}

/// Breadth-first ball of the orbit Schreier graph; for a free pair this is
/// the radius-r ball of the 4-regular tree.
#[derive(Clone, Debug)]
pub struct SchreierBall {
    pub base: ElementId,
    pub radius: usize,
    /// vertices in BFS order, children in canonical letter order
    pub vertices: Vec<ElementId>,
    /// undirected adjacency by vertex index
    pub adj: Vec<Vec<u32>>,
}

impl SchreierBall {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// Expected tree-ball size 2·3^r − 1.
    pub fn expected_size(r: usize) -> usize {
        2 * 3usize.pow(r as u32) - 1
    }

    /// Acyclicity: connected with exactly size − 1 undirected edges.
    pub fn is_tree(&self) -> bool {
        let edges: usize = self.adj.iter().map(|n| n.len()).sum::<usize>() / 2;
        edges + 1 == self.size()
    }
}

/// Start a builder: two single-point partial automorphisms with pairwise
/// disjoint domains and images, on a window of the given level, after
/// certifying acl(∅) = ∅ on the oracle.
pub fn init_builder(
    mut oracle: StructureOracle,
    level: u32,
    cert_depth: usize,
) -> Result<FreePairBuilder> {
    oracle.grow_to_level(level)?;
    let cert = match oracle.kind() {
        OracleKind::EquivTower => {
            let empty = acl(&mut oracle, &[], level.max(2) + 1)?;
            if !empty.members.is_empty() {
                return Err(Error::Uncertified(format!(
                    "acl(∅) = {:?} is not empty",
                    empty.members
                )));
            }
            CertSource::TowerCoordinates
        }
        kind => {
            let cert_level = match kind {
                OracleKind::RandomGraph => level.min(3).max(1),
                _ => level.min(8).max(1),
            };
            let report = assert_no_algebraicity(&mut oracle, 8, cert_level)?;
            if !report.passed {
                return Err(Error::Uncertified(
                    "oracle failed the no-algebraicity check".into(),
                ));
            }
            CertSource::Report(report)
        }
    };
    let mut builder = FreePairBuilder {
        oracle,
        phi: PartialAutomorphism::new(),
        gamma: PartialAutomorphism::new(),
        steps: Vec::new(),
        cert_depth,
        level,
        cert,
    };
    // φ₁ = {x₀ ↦ fresh}; γ₁ = {x₁ ↦ fresh}, all four points distinct
    let x0: ElementId = 0;
    let t0 = builder.certify(&[x0])?;
    builder.extend_step(Side::Phi, Direction::Domain, &t0)?;
    let y0 = builder.phi.apply(x0).expect("just inserted");
    let x1 = (0..builder.oracle.size() as ElementId)
        .find(|e| *e != x0 && *e != y0)
        .ok_or_else(|| Error::ResourceLimit("window too small for init".into()))?;
    let t1 = builder.certify(&[x1])?;
    builder.extend_step(Side::Gamma, Direction::Domain, &t1)?;
    Ok(builder)
}

/// Full back-and-forth construction: init plus `rounds` rounds, then a final
/// fixed-point enumeration to `cert_depth`.
pub fn build(
    oracle: StructureOracle,
    level: u32,
    rounds: usize,
    cert_depth: usize,
) -> Result<FreePairBuilder> {
    let mut builder = init_builder(oracle, level, cert_depth)?;
    for _ in 0..rounds {
        builder.round()?;
    }
    builder.verify_fixed_points()?;
    Ok(builder)
}

/// An E_n-class of the equivalence tower, as an imaginary element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImaginaryClass {
    pub index: u32,
    pub representative: ElementId,
}

impl ImaginaryClass {
    /// Class equality: same index and E_index-equivalent representatives.
    pub fn same_class(&self, other: &ImaginaryClass, oracle: &StructureOracle) -> bool {
        if self.index != other.index {
            return false;
        }
        let (Some(u), Some(v)) = (
            oracle.tower_vector(self.representative),
            oracle.tower_vector(other.representative),
        ) else {
            return false;
        };
        let i = (self.index - 1) as usize;
        u.get(i).copied().unwrap_or(0) == v.get(i).copied().unwrap_or(0)
    }
}

/// Least n with E_n(x, f(x)): the imaginary class of x that f fixes. Always
/// finite because tower elements have finite support.
pub fn tower_fixed_class(
    oracle: &StructureOracle,
    f: &PartialAutomorphism,
    x: ElementId,
) -> Result<ImaginaryClass> {
    let y = f
        .apply(x)
        .ok_or(Error::NotInWindow(x))?;
    let u = oracle
        .tower_vector(x)
        .ok_or_else(|| Error::Config("tower_fixed_class requires the equivtower oracle".into()))?;
    let v = oracle
        .tower_vector(y)
        .ok_or(Error::NotInWindow(y))?;
    let coord = |w: &[u32], i: usize| w.get(i).copied().unwrap_or(0);
    let n = (0..)
        .find(|&i| coord(u, i) == coord(v, i))
        .expect("finite supports agree eventually") as u32
        + 1;
    Ok(ImaginaryClass {
        index: n,
        representative: x,
    })
}

/// Result of the exhaustive attempt to move all tower classes of an element.
#[derive(Clone, Debug)]
pub struct TowerDemoReport {
    pub x: ElementId,
    /// candidate images examined
    pub candidates: usize,
    /// per candidate y: least n with E_n(x, y)
    pub least_fixed_index: Vec<(ElementId, u32)>,
    /// true iff some candidate shares no E_n-class with x for any n — never
    /// happens: supports are finite
    pub separated: bool,
}

/// Demonstrate the failure of Neumann separation in the imaginary sort:
/// every candidate image y of x (exhaustive over the window, capped by
/// `budget`) agrees with x in some coordinate, so the E_n-class of x at that
/// index is fixed by any map sending x to y.
pub fn tower_neumann_failure_demo(
    oracle: &mut StructureOracle,
    x: ElementId,
    budget: usize,
) -> Result<TowerDemoReport> {
    if oracle.kind() != OracleKind::EquivTower {
        return Err(Error::Config(
            "tower_neumann_failure_demo requires the equivtower oracle".into(),
        ));
    }
    let u = oracle.tower_vector(x).ok_or(Error::NotInWindow(x))?.to_vec();
    let coord = |w: &[u32], i: usize| w.get(i).copied().unwrap_or(0);
    let size = oracle.size().min(budget);
    let mut least_fixed_index = Vec::with_capacity(size);
    let mut separated = false;
    for y in 0..size as ElementId {
        let v = oracle.tower_vector(y).expect("in window");
        match (0..u.len().max(v.len()) + 1).find(|&i| coord(&u, i) == coord(v, i)) {
            Some(i) => least_fixed_index.push((y, i as u32 + 1)),
            None => separated = true, // unreachable: finite supports
        }
    }
    Ok(TowerDemoReport {
        x,
        candidates: size,
        least_fixed_index,
        separated,
    })
}

pub use persist::FreePair;

#[cfg(test)]
mod tests;
