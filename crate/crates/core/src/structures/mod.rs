//! Finite windows of concrete countable homogeneous structures.
//!
//! An oracle presents a countable homogeneous structure through a growing
//! finite window. Windows grow monotonically (elements are only ever
//! appended, so `window(i)` is always an id-prefix of `window(j)` for
//! `i <= j`), and window construction is a deterministic function of the
//! oracle kind, seed and level. Four structures are built in:
//!
//! * `PureSet` — no relations; the degenerate calibration oracle.
//! * `DenseLinearOrder` — a dense order grown by deterministic gap filling.
//! * `RandomGraph` — seeded vertices closed under extension-property
//!   demands, so witnesses are guaranteed rather than probabilistic.
//! * `EquivTower` — finitely supported class-id vectors with `E_i(x,y)`
//!   iff the vectors agree in coordinate `i`; the generic tower of
//!   cross-cutting equivalence relations.

mod dlo;
mod graph;
#[cfg(test)]
mod tests;
mod tower;

use std::fmt;

use crate::error::Error;
use crate::Result;

pub use graph::GRAPH_EXTENSION_CAP;

/// Opaque element handle within a window. Ids are stable across window
/// growth: a window only ever gains elements.
pub type ElementId = u32;

/// The built-in structure kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleKind {
    PureSet,
    DenseLinearOrder,
    RandomGraph,
    EquivTower,
}

impl OracleKind {
    pub fn name(self) -> &'static str {
        match self {
            OracleKind::PureSet => "pureset",
            OracleKind::DenseLinearOrder => "dlo",
            OracleKind::RandomGraph => "randomgraph",
            OracleKind::EquivTower => "equivtower",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pureset" => Ok(OracleKind::PureSet),
            "dlo" => Ok(OracleKind::DenseLinearOrder),
            "randomgraph" => Ok(OracleKind::RandomGraph),
            "equivtower" => Ok(OracleKind::EquivTower),
            other => Err(Error::Config(format!("unknown oracle kind `{other}`"))),
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Canonical atom describing the relation between two distinct tuple
/// positions (or their equality). Pair atoms are enough to pin down the
/// quantifier-free type for all built-in signatures: every relation symbol
/// is binary and the structures carry no higher-arity relations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairAtom {
    /// Same element.
    Equal,
    /// Distinct, no further structure (pure set).
    Distinct,
    /// First strictly below second (DLO).
    Less,
    /// First strictly above second (DLO).
    Greater,
    /// Adjacent (random graph).
    Edge,
    /// Distinct and non-adjacent (random graph).
    NonEdge,
    /// Distinct tower elements; the sorted list of indices `i >= 1` where
    /// `E_i` fails. Finite and nonempty for distinct elements, and
    /// independent of the window, since all coordinates beyond the supports
    /// agree.
    TowerDiff(Vec<u32>),
}

impl PairAtom {
    /// Atom seen from the swapped pair.
    pub fn flip(&self) -> PairAtom {
        match self {
            PairAtom::Less => PairAtom::Greater,
            PairAtom::Greater => PairAtom::Less,
            other => other.clone(),
        }
    }
}

/// Canonical quantifier-free type of an ordered tuple: one atom per index
/// pair `p < q`, in (p, q)-lexicographic order. For a homogeneous window two
/// tuples have equal type iff some automorphism of the limit maps one to the
/// other.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QfType {
    arity: usize,
    atoms: Vec<PairAtom>,
}

impl QfType {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Atom for positions `p < q`.
    pub fn atom(&self, p: usize, q: usize) -> &PairAtom {
        debug_assert!(p < q && q < self.arity);
        // index of (p,q) in lexicographic pair order
        let before = p * (2 * self.arity - p - 1) / 2;
        &self.atoms[before + (q - p - 1)]
    }

    pub fn atoms(&self) -> &[PairAtom] {
        &self.atoms
    }
}

/// A finite-window snapshot: the id-prefix of the oracle's elements of the
/// given size. Read-only queries on a window are safe to run concurrently.
#[derive(Clone, Copy)]
pub struct Window<'a> {
    oracle: &'a StructureOracle,
    size: usize,
}

impl<'a> Window<'a> {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> OracleKind {
        self.oracle.kind
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> {
        0..self.size as ElementId
    }

    pub fn contains(&self, e: ElementId) -> bool {
        (e as usize) < self.size
    }

    fn check(&self, e: ElementId) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::NotInWindow(e))
        }
    }

    /// Pair atom between two window elements.
    pub fn rel(&self, i: ElementId, j: ElementId) -> Result<PairAtom> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.oracle.rel_unchecked(i, j))
    }

    /// Canonical quantifier-free type of an ordered tuple (repeats allowed).
    pub fn qf_type(&self, tuple: &[ElementId]) -> Result<QfType> {
        for &e in tuple {
            self.check(e)?;
        }
        let arity = tuple.len();
        let mut atoms = Vec::with_capacity(arity * arity.saturating_sub(1) / 2);
        for p in 0..arity {
            for q in p + 1..arity {
                atoms.push(self.oracle.rel_unchecked(tuple[p], tuple[q]));
            }
        }
        Ok(QfType { arity, atoms })
    }

    /// Type of `tuple` over a base set: the type of the concatenation of
    /// `tuple` with the base in ascending id order. Equality of these types
    /// is orbit equivalence under the pointwise stabilizer of the base.
    pub fn qf_type_over(&self, tuple: &[ElementId], base: &[ElementId]) -> Result<QfType> {
        let mut ext: Vec<ElementId> = tuple.to_vec();
        let mut sorted = base.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        ext.extend_from_slice(&sorted);
        self.qf_type(&ext)
    }

    /// True iff the tuples lie in the same orbit of the limit's automorphism
    /// group (quantifier-free type equality, by homogeneity).
    pub fn same_orbit(&self, t1: &[ElementId], t2: &[ElementId]) -> Result<bool> {
        if t1.len() != t2.len() {
            return Err(Error::ArityMismatch(t1.len(), t2.len()));
        }
        Ok(self.qf_type(t1)? == self.qf_type(t2)?)
    }

    /// Line-oriented text export: one element per line, one relation tuple
    /// per line.
    pub fn export(&self) -> String {
        self.oracle.export_prefix(self.size)
    }
}

/// Demand for a new element over a base: one required atom per base element,
/// read as `atom(x, base[i])`.
#[derive(Clone, Debug)]
pub struct ExtensionDemand {
    pub base: Vec<ElementId>,
    pub atoms: Vec<PairAtom>,
}

impl ExtensionDemand {
    pub fn new(base: Vec<ElementId>, atoms: Vec<PairAtom>) -> Self {
        ExtensionDemand { base, atoms }
    }
}

pub(crate) struct PureState {
    n: usize,
}

pub(crate) enum State {
    Pure(PureState),
    Dlo(dlo::DloState),
    Graph(graph::GraphState),
    Tower(tower::TowerState),
}

/// Lazy presentation of a countable homogeneous structure via growing finite
/// windows. Single-writer: window growth mutates state.
pub struct StructureOracle {
    kind: OracleKind,
    seed: u64,
    level: u32,
    size_at_level: Vec<usize>,
    max_elements: usize,
    state: State,
}

impl StructureOracle {
    pub fn new(kind: OracleKind, seed: u64) -> Self {
        let state = match kind {
            OracleKind::PureSet => State::Pure(PureState { n: 0 }),
            OracleKind::DenseLinearOrder => State::Dlo(dlo::DloState::new()),
            OracleKind::RandomGraph => State::Graph(graph::GraphState::new()),
            OracleKind::EquivTower => State::Tower(tower::TowerState::new()),
        };
        StructureOracle {
            kind,
            seed,
            level: 0,
            size_at_level: vec![0],
            max_elements: 500_000,
            state,
        }
    }

    pub fn with_max_elements(mut self, max: usize) -> Self {
        self.max_elements = max;
        self
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// (kind, seed) identity used to tie certificates to an oracle.
    pub fn fingerprint(&self) -> (OracleKind, u64) {
        (self.kind, self.seed)
    }

    /// Current total number of elements, including growth beyond the last
    /// level (extension witnesses are appended after the level prefix).
    pub fn size(&self) -> usize {
        match &self.state {
            State::Pure(s) => s.n,
            State::Dlo(s) => s.len(),
            State::Graph(s) => s.len(),
            State::Tower(s) => s.len(),
        }
    }

    /// Number of elements in the level-`l` window (grows the oracle first).
    pub fn size_at_level(&mut self, level: u32) -> Result<usize> {
        self.grow_to_level(level)?;
        Ok(self.size_at_level[level as usize])
    }

    /// The level-`l` window. Windows are monotone: each is an id-prefix of
    /// every later one.
    pub fn window(&mut self, level: u32) -> Result<Window<'_>> {
        let size = self.size_at_level(level)?;
        Ok(Window { oracle: self, size })
    }

    /// View covering everything grown so far.
    pub fn full_window(&self) -> Window<'_> {
        Window {
            oracle: self,
            size: self.size(),
        }
    }

    pub fn grow_to_level(&mut self, level: u32) -> Result<()> {
        while self.level < level {
            let next = self.level + 1;
            match &mut self.state {
                State::Pure(s) => {
                    // one fresh point per level
                    if s.n + 1 > self.max_elements {
                        return Err(Error::ResourceLimit(format!(
                            "pure set window at level {next}"
                        )));
                    }
                    s.n += 1;
                }
                State::Dlo(s) => s.grow_level(self.max_elements)?,
                State::Graph(s) => s.grow_level(self.seed, next, self.max_elements)?,
                State::Tower(s) => s.grow_level(next, self.max_elements)?,
            }
            let size = self.size();
            self.size_at_level.push(size);
            self.level = next;
        }
        Ok(())
    }

    pub(crate) fn rel_unchecked(&self, i: ElementId, j: ElementId) -> PairAtom {
        if i == j {
            return PairAtom::Equal;
        }
        match &self.state {
            State::Pure(_) => PairAtom::Distinct,
            State::Dlo(s) => s.rel(i, j),
            State::Graph(s) => s.rel(i, j),
            State::Tower(s) => s.rel(i, j),
        }
    }

    /// Find or create an element realizing `demand`, skipping anything in
    /// `avoid`. The search scans the current window in id order (so the
    /// least witness is returned); if nothing matches, a fresh element is
    /// constructed and appended. Construction is deterministic.
    pub fn realize_extension_avoiding(
        &mut self,
        demand: &ExtensionDemand,
        avoid: &[ElementId],
    ) -> Result<ElementId> {
        if demand.base.len() != demand.atoms.len() {
            return Err(Error::InconsistentDemand(
                "demand atom count differs from base size".into(),
            ));
        }
        let size = self.size();
        for &b in &demand.base {
            if b as usize >= size {
                return Err(Error::NotInWindow(b));
            }
        }
        self.check_demand_kind(demand)?;
        // equality demands are resolved directly
        for (b, a) in demand.base.iter().zip(&demand.atoms) {
            if *a == PairAtom::Equal {
                for (b2, a2) in demand.base.iter().zip(&demand.atoms) {
                    if self.rel_unchecked(*b, *b2) != *a2 {
                        return Err(Error::InconsistentDemand(
                            "equality demand conflicts with other atoms".into(),
                        ));
                    }
                }
                return Ok(*b);
            }
        }
        // search the existing window first
        'cand: for x in 0..size as ElementId {
            if avoid.contains(&x) || demand.base.contains(&x) {
                continue;
            }
            for (b, a) in demand.base.iter().zip(&demand.atoms) {
                if self.rel_unchecked(x, *b) != *a {
                    continue 'cand;
                }
            }
            return Ok(x);
        }
        if size + 1 > self.max_elements {
            return Err(Error::ResourceLimit("realize_extension".into()));
        }
        let created = match &mut self.state {
            State::Pure(s) => {
                s.n += 1;
                Ok((s.n - 1) as ElementId)
            }
            State::Dlo(s) => s.realize(demand),
            State::Graph(s) => s.realize(self.seed, demand),
            State::Tower(s) => s.realize(demand, avoid),
        }?;
        debug_assert!(!avoid.contains(&created));
        Ok(created)
    }

    /// Public entry point of the extension operation: no avoid set.
    pub fn realize_extension(&mut self, demand: &ExtensionDemand) -> Result<ElementId> {
        self.realize_extension_avoiding(demand, &[])
    }

    fn check_demand_kind(&self, demand: &ExtensionDemand) -> Result<()> {
        for a in &demand.atoms {
            let ok = match (self.kind, a) {
                (_, PairAtom::Equal) => true,
                (OracleKind::PureSet, PairAtom::Distinct) => true,
                (OracleKind::DenseLinearOrder, PairAtom::Less | PairAtom::Greater) => true,
                (OracleKind::RandomGraph, PairAtom::Edge | PairAtom::NonEdge) => true,
                (OracleKind::EquivTower, PairAtom::TowerDiff(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(Error::InconsistentDemand(format!(
                    "atom {a:?} is not legal for oracle kind {}",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    /// Exhaustively verify the k-extension property of the given prefix of a
    /// random-graph window: every pair of disjoint vertex sets (U, V) with
    /// `|U ∪ V| <= k` has a witness adjacent to all of U and none of V.
    /// Returns the first failing demand, if any.
    pub fn graph_extension_failure(&self, size: usize, k: u32) -> Option<(Vec<ElementId>, u32)> {
        match &self.state {
            State::Graph(s) => s.extension_failure(size, k),
            _ => None,
        }
    }

    fn export_prefix(&self, size: usize) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "window {} seed={} size={}",
            self.kind.name(),
            self.seed,
            size
        );
        for e in 0..size as ElementId {
            match &self.state {
                State::Pure(_) | State::Graph(_) => {
                    let _ = writeln!(out, "element {e}");
                }
                State::Dlo(s) => {
                    let _ = writeln!(out, "element {e} rank={}", s.rank_of(e));
                }
                State::Tower(s) => {
                    let v = s.vector_of(e);
                    let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                    let _ = writeln!(out, "element {e} vector=({})", coords.join(","));
                }
            }
        }
        for i in 0..size as ElementId {
            for j in i + 1..size as ElementId {
                match self.rel_unchecked(i, j) {
                    PairAtom::Edge => {
                        let _ = writeln!(out, "rel edge {i} {j}");
                    }
                    PairAtom::Less => {
                        let _ = writeln!(out, "rel lt {i} {j}");
                    }
                    PairAtom::Greater => {
                        let _ = writeln!(out, "rel lt {j} {i}");
                    }
                    PairAtom::TowerDiff(fails) => {
                        // emit the E_i that hold, up to the window's depth
                        let depth = self.level.max(1);
                        for d in 1..=depth {
                            if !fails.contains(&d) {
                                let _ = writeln!(out, "rel E{d} {i} {j}");
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Tower-only: the class-id vector of an element (trailing zeros
    /// trimmed).
    pub fn tower_vector(&self, e: ElementId) -> Option<&[u32]> {
        match &self.state {
            State::Tower(s) if (e as usize) < s.len() => Some(s.vector_of(e)),
            _ => None,
        }
    }

    /// DLO-only: current rank of an element in the order.
    pub fn dlo_rank(&self, e: ElementId) -> Option<usize> {
        match &self.state {
            State::Dlo(s) if (e as usize) < s.len() => Some(s.rank_of(e)),
            _ => None,
        }
    }

    /// Per-level window sizes recorded so far (index = level).
    pub fn size_table(&self) -> &[usize] {
        &self.size_at_level
    }

    /// Raw per-element state, sufficient to reconstruct all relations.
    pub fn element_payload(&self, e: ElementId) -> Result<ElementPayload> {
        if e as usize >= self.size() {
            return Err(Error::NotInWindow(e));
        }
        Ok(match &self.state {
            State::Pure(_) => ElementPayload::Pure,
            State::Dlo(s) => ElementPayload::DloRank(s.rank_of(e) as u32),
            State::Graph(s) => ElementPayload::GraphRow(s.row_words(e).to_vec()),
            State::Tower(s) => ElementPayload::TowerVector(s.vector_of(e).to_vec()),
        })
    }

    /// Reconstruct an oracle from persisted element payloads. The result is
    /// frozen: its element budget equals its size, so any growth attempt
    /// errors instead of silently diverging from the original run.
    pub fn from_snapshot(
        kind: OracleKind,
        seed: u64,
        size_table: Vec<usize>,
        payloads: Vec<ElementPayload>,
    ) -> Result<Self> {
        let n = payloads.len();
        if size_table.is_empty()
            || size_table[0] != 0
            || size_table.windows(2).any(|w| w[0] > w[1])
            || size_table.last().copied().unwrap_or(0) > n
        {
            return Err(Error::Parse("invalid window size table".into()));
        }
        let level = (size_table.len() - 1) as u32;
        let bad = |id: usize| Error::Parse(format!("payload of element {id} has the wrong kind"));
        let state = match kind {
            OracleKind::PureSet => {
                for (id, p) in payloads.iter().enumerate() {
                    if !matches!(p, ElementPayload::Pure) {
                        return Err(bad(id));
                    }
                }
                State::Pure(PureState { n })
            }
            OracleKind::DenseLinearOrder => {
                let ranks: Vec<u32> = payloads
                    .iter()
                    .enumerate()
                    .map(|(id, p)| match p {
                        ElementPayload::DloRank(r) => Ok(*r),
                        _ => Err(bad(id)),
                    })
                    .collect::<Result<_>>()?;
                State::Dlo(dlo::DloState::from_ranks(&ranks)?)
            }
            OracleKind::RandomGraph => {
                let rows: Vec<Vec<u64>> = payloads
                    .into_iter()
                    .enumerate()
                    .map(|(id, p)| match p {
                        ElementPayload::GraphRow(row) => Ok(row),
                        _ => Err(bad(id)),
                    })
                    .collect::<Result<_>>()?;
                State::Graph(graph::GraphState::from_rows(rows)?)
            }
            OracleKind::EquivTower => {
                let vectors: Vec<Vec<u32>> = payloads
                    .into_iter()
                    .enumerate()
                    .map(|(id, p)| match p {
                        ElementPayload::TowerVector(v) => Ok(v),
                        _ => Err(bad(id)),
                    })
                    .collect::<Result<_>>()?;
                State::Tower(tower::TowerState::from_vectors(vectors, level)?)
            }
        };
        Ok(StructureOracle {
            kind,
            seed,
            level,
            size_at_level: size_table,
            max_elements: n,
            state,
        })
    }
}

/// Raw per-element state used by snapshot persistence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementPayload {
    Pure,
    DloRank(u32),
    GraphRow(Vec<u64>),
    TowerVector(Vec<u32>),
}
