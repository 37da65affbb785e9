//! Dense linear order windows.
//!
//! The order is kept as an explicit rank list, so comparisons are exact and
//! free of arithmetic. Level growth appends one element per level: the first
//! three form an increasing initial segment, after which growth alternates
//! between appending at the top and filling gaps in FIFO order. A gap
//! existing at level `l` sits behind at most `l` queued gaps, so it has been
//! split by level `3l + 4`; every interval keeps growing, which the
//! algebraic-closure certificates rely on. Extension witnesses are inserted
//! directly into the demanded interval.

use std::collections::VecDeque;

use super::{ElementId, ExtensionDemand, PairAtom};
use crate::error::Error;
use crate::Result;

#[derive(Clone, Copy, Debug)]
enum Gap {
    Below(ElementId),
    Between(ElementId, ElementId),
}

pub(crate) struct DloState {
    /// ids in increasing key order
    order: Vec<ElementId>,
    /// rank[id] = position in `order`
    rank: Vec<u32>,
    gaps: VecDeque<Gap>,
}

impl DloState {
    pub fn new() -> Self {
        DloState {
            order: Vec::new(),
            rank: Vec::new(),
            gaps: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    /// Rebuild from a rank table (`ranks[id]` = position). The gap queue is
    /// left empty: snapshot-restored windows are frozen and never grow.
    pub fn from_ranks(ranks: &[u32]) -> Result<Self> {
        let n = ranks.len();
        let mut order = vec![ElementId::MAX; n];
        for (id, &r) in ranks.iter().enumerate() {
            if r as usize >= n || order[r as usize] != ElementId::MAX {
                return Err(Error::Parse(format!("rank table is not a permutation at id {id}")));
            }
            order[r as usize] = id as ElementId;
        }
        Ok(DloState {
            order,
            rank: ranks.to_vec(),
            gaps: VecDeque::new(),
        })
    }

    pub fn rank_of(&self, e: ElementId) -> usize {
        self.rank[e as usize] as usize
    }

    pub fn rel(&self, i: ElementId, j: ElementId) -> PairAtom {
        if self.rank[i as usize] < self.rank[j as usize] {
            PairAtom::Less
        } else {
            PairAtom::Greater
        }
    }

    fn insert_at(&mut self, pos: usize) -> ElementId {
        let id = self.rank.len() as ElementId;
        self.order.insert(pos, id);
        self.rank.push(0);
        for (r, &e) in self.order.iter().enumerate().skip(pos) {
            self.rank[e as usize] = r as u32;
        }
        id
    }

    pub fn grow_level(&mut self, max_elements: usize) -> Result<()> {
        if self.len() + 1 > max_elements {
            return Err(Error::ResourceLimit("dlo window".into()));
        }
        let n = self.len();
        if n < 3 {
            // increasing initial segment 0 < 1 < 2
            let id = self.insert_at(n);
            if id == 2 {
                self.gaps.push_back(Gap::Below(0));
                self.gaps.push_back(Gap::Between(0, 1));
                self.gaps.push_back(Gap::Between(1, 2));
            }
            return Ok(());
        }
        if n % 2 == 1 {
            // append at the top; the region above stays covered without a
            // queued Above gap
            let prev = self.order[n - 1];
            let id = self.insert_at(n);
            self.gaps.push_back(Gap::Between(prev, id));
            return Ok(());
        }
        let gap = self.gaps.pop_front().expect("gap queue is never empty");
        match gap {
            Gap::Below(e) => {
                let id = self.insert_at(self.rank_of(e));
                self.gaps.push_back(Gap::Below(id));
                self.gaps.push_back(Gap::Between(id, e));
            }
            Gap::Between(a, b) => {
                let id = self.insert_at(self.rank_of(a) + 1);
                self.gaps.push_back(Gap::Between(a, id));
                self.gaps.push_back(Gap::Between(id, b));
            }
        }
        Ok(())
    }

    /// Construct a fresh element in the open interval cut out by the demand.
    /// The window search has already failed, so the interval contains no
    /// usable element; density of the limit makes the insertion always
    /// consistent when the bounds are.
    pub fn realize(&mut self, demand: &ExtensionDemand) -> Result<ElementId> {
        // lo = greatest rank that must be below x, hi = least rank above
        let mut lo: Option<usize> = None;
        let mut hi: Option<usize> = None;
        for (b, a) in demand.base.iter().zip(&demand.atoms) {
            let r = self.rank_of(*b);
            match a {
                PairAtom::Greater => {
                    // x > b
                    lo = Some(lo.map_or(r, |cur| cur.max(r)));
                }
                PairAtom::Less => {
                    hi = Some(hi.map_or(r, |cur| cur.min(r)));
                }
                _ => unreachable!("demand kind checked by the oracle"),
            }
        }
        if let (Some(l), Some(h)) = (lo, hi) {
            if l >= h {
                return Err(Error::InconsistentDemand(
                    "lower bound not below upper bound".into(),
                ));
            }
        }
        let pos = match lo {
            Some(l) => l + 1,
            None => match hi {
                Some(_) => 0,
                None => self.len(),
            },
        };
        Ok(self.insert_at(pos))
    }
}
