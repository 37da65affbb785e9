//! Equivalence-relation tower windows.
//!
//! Elements are finitely supported class-id vectors; `E_i(x, y)` holds iff
//! the vectors agree in coordinate `i` (1-based). On any finite set only
//! finitely many `E_i` fail to be universal, which is exactly the defining
//! feature of the amalgamation class this models. The level-`l` window
//! consists of all vectors with support in the first `l` coordinates and
//! class ids below `l + 2`.

use std::collections::HashMap;

use super::{ElementId, ExtensionDemand, PairAtom};
use crate::error::Error;
use crate::Result;

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

pub(crate) struct TowerState {
    vectors: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, ElementId>,
    level: u32,
}

impl TowerState {
    pub fn new() -> Self {
        TowerState {
            vectors: Vec::new(),
            index: HashMap::new(),
            level: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Rebuild from raw class-id vectors.
    pub fn from_vectors(vectors: Vec<Vec<u32>>, level: u32) -> Result<Self> {
        let mut index = HashMap::new();
        for (id, v) in vectors.iter().enumerate() {
            if v.last() == Some(&0) {
                return Err(Error::Parse(format!("vector of element {id} is not trimmed")));
            }
            if index.insert(v.clone(), id as ElementId).is_some() {
                return Err(Error::Parse(format!("duplicate vector at element {id}")));
            }
        }
        Ok(TowerState {
            vectors,
            index,
            level,
        })
    }

    pub fn vector_of(&self, e: ElementId) -> &[u32] {
        &self.vectors[e as usize]
    }

    fn coord(v: &[u32], i: usize) -> u32 {
        v.get(i).copied().unwrap_or(0)
    }

    pub fn rel(&self, i: ElementId, j: ElementId) -> PairAtom {
        let (x, y) = (&self.vectors[i as usize], &self.vectors[j as usize]);
        let len = x.len().max(y.len());
        let fails: Vec<u32> = (0..len)
            .filter(|&c| Self::coord(x, c) != Self::coord(y, c))
            .map(|c| c as u32 + 1)
            .collect();
        debug_assert!(!fails.is_empty());
        PairAtom::TowerDiff(fails)
    }

    fn push(&mut self, v: Vec<u32>) -> ElementId {
        let id = self.vectors.len() as ElementId;
        self.index.insert(v.clone(), id);
        self.vectors.push(v);
        id
    }

    pub fn grow_level(&mut self, level: u32, max_elements: usize) -> Result<()> {
        let len = level as usize;
        let ids = level + 2;
        let total = (ids as u64).checked_pow(level).unwrap_or(u64::MAX);
        if total > max_elements as u64 {
            return Err(Error::ResourceLimit(format!(
                "tower window at level {level} would have {total} elements"
            )));
        }
        // all padded vectors of length `level` with entries < level + 2,
        // lexicographic; existing vectors keep their ids
        let mut v = vec![0u32; len];
        loop {
            let canonical = trim(v.clone());
            if !self.index.contains_key(&canonical) {
                self.push(canonical);
            }
            // next lexicographic tuple
            let mut i = len;
            loop {
                if i == 0 {
                    self.level = level;
                    return Ok(());
                }
                i -= 1;
                if v[i] + 1 < ids {
                    v[i] += 1;
                    for t in i + 1..len {
                        v[t] = 0;
                    }
                    break;
                }
                v[i] = 0;
            }
        }
    }

    /// Construct a fresh vector realizing the demand. Each base element `b`
    /// carries an exact fail set `F_b`: `x` must differ from `b` precisely
    /// in the coordinates of `F_b`. The window search has already failed, so
    /// any in-window realization is excluded; free coordinates are varied
    /// until a genuinely new vector is found.
    pub fn realize(&mut self, demand: &ExtensionDemand, _avoid: &[ElementId]) -> Result<ElementId> {
        let mut maxc = 0usize; // number of constrained coordinates
        for (b, a) in demand.base.iter().zip(&demand.atoms) {
            let bv = &self.vectors[*b as usize];
            maxc = maxc.max(bv.len());
            if let PairAtom::TowerDiff(fails) = a {
                if fails.is_empty() {
                    return Err(Error::InconsistentDemand(
                        "empty tower fail set; use the equality atom".into(),
                    ));
                }
                maxc = maxc.max(*fails.last().unwrap() as usize);
            }
        }
        // per-coordinate constraints
        let mut forced: Vec<Option<u32>> = vec![None; maxc];
        let mut forbidden: Vec<Vec<u32>> = vec![Vec::new(); maxc];
        for (b, a) in demand.base.iter().zip(&demand.atoms) {
            let bv = self.vectors[*b as usize].clone();
            let fails = match a {
                PairAtom::TowerDiff(f) => f,
                _ => unreachable!("demand kind checked by the oracle"),
            };
            for c in 0..maxc {
                let bval = Self::coord(&bv, c);
                if fails.contains(&(c as u32 + 1)) {
                    forbidden[c].push(bval);
                } else {
                    match forced[c] {
                        None => forced[c] = Some(bval),
                        Some(v) if v == bval => {}
                        Some(_) => {
                            return Err(Error::InconsistentDemand(format!(
                                "coordinate {} forced to two different classes",
                                c + 1
                            )));
                        }
                    }
                }
            }
        }
        for c in 0..maxc {
            if let Some(v) = forced[c] {
                if forbidden[c].contains(&v) {
                    return Err(Error::InconsistentDemand(format!(
                        "coordinate {} both forced to and forbidden from class {v}",
                        c + 1
                    )));
                }
            }
        }
        // minimal consistent vector
        let mut x: Vec<u32> = (0..maxc)
            .map(|c| match forced[c] {
                Some(v) => v,
                None => (0..).find(|v| !forbidden[c].contains(v)).unwrap(),
            })
            .collect();
        // vary a free coordinate until the vector is new to the window
        let free = (0..maxc).find(|&c| forced[c].is_none());
        let vary = match free {
            Some(c) => c,
            None => {
                if demand.base.is_empty() {
                    x = vec![0];
                    forbidden.push(Vec::new());
                    0
                } else if self.index.contains_key(&trim(x.clone())) {
                    // the demand pins x to an element already rejected
                    return Err(Error::BudgetExhausted(
                        "tower demand pins a unique, excluded element".into(),
                    ));
                } else {
                    return Ok(self.push(trim(x)));
                }
            }
        };
        let mut val = x[vary];
        loop {
            x[vary] = val;
            let canonical = trim(x.clone());
            if !self.index.contains_key(&canonical) {
                return Ok(self.push(canonical));
            }
            val = (val + 1..).find(|v| !forbidden[vary].contains(v)).unwrap();
        }
    }
}
