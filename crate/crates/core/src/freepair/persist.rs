//! Versioned text persistence for constructed pairs (`FREEPAIR/1`).
//!
//! The artifact is self-contained: besides both mappings, the certification
//! depth and the step ledger, it embeds a raw snapshot of every oracle
//! element, so re-verification needs no builder state — relations are
//! reconstructed from the payloads alone.

use std::fmt::Write as _;

use crate::error::Error;
use crate::structures::{ElementId, ElementPayload, OracleKind, StructureOracle};
use crate::Result;

use super::{Direction, FreePairBuilder, PartialAutomorphism, Side, StepRecord};

/// A frozen, persistable pair of partial automorphisms together with the
/// oracle snapshot and certification data.
#[derive(Clone, Debug)]
pub struct FreePair {
    pub kind: OracleKind,
    pub seed: u64,
    pub size_table: Vec<usize>,
    pub payloads: Vec<ElementPayload>,
    pub phi: PartialAutomorphism,
    pub gamma: PartialAutomorphism,
    pub cert_depth: usize,
    pub steps: Vec<StepRecord>,
}

impl FreePair {
    pub fn from_builder(b: &FreePairBuilder) -> Result<FreePair> {
        let oracle = b.oracle();
        let payloads = (0..oracle.size() as ElementId)
            .map(|e| oracle.element_payload(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(FreePair {
            kind: oracle.kind(),
            seed: oracle.seed(),
            size_table: oracle.size_table().to_vec(),
            payloads,
            phi: b.phi().clone(),
            gamma: b.gamma().clone(),
            cert_depth: b.cert_depth(),
            steps: b.steps().to_vec(),
        })
    }

    /// Reconstruct a frozen oracle from the embedded snapshot.
    pub fn restore_oracle(&self) -> Result<StructureOracle> {
        StructureOracle::from_snapshot(
            self.kind,
            self.seed,
            self.size_table.clone(),
            self.payloads.clone(),
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "FREEPAIR/1");
        let _ = writeln!(out, "oracle {} seed={}", self.kind.name(), self.seed);
        let sizes: Vec<String> = self.size_table.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "sizes {}", sizes.join(" "));
        let _ = writeln!(out, "certdepth {}", self.cert_depth);
        let _ = writeln!(out, "elements {}", self.payloads.len());
        for (id, p) in self.payloads.iter().enumerate() {
            match p {
                ElementPayload::Pure => {
                    let _ = writeln!(out, "elem {id} -");
                }
                ElementPayload::DloRank(r) => {
                    let _ = writeln!(out, "elem {id} rank={r}");
                }
                ElementPayload::GraphRow(words) => {
                    let hex: Vec<String> = words.iter().map(|w| format!("{w:x}")).collect();
                    let _ = writeln!(out, "elem {id} row={}", hex.join(","));
                }
                ElementPayload::TowerVector(v) => {
                    let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                    let _ = writeln!(out, "elem {id} vector={}", coords.join(","));
                }
            }
        }
        for (name, map) in [("phi", &self.phi), ("gamma", &self.gamma)] {
            let _ = writeln!(out, "{name} {}", map.len());
            for (x, y) in map.pairs() {
                let _ = writeln!(out, "map {x} {y}");
            }
        }
        let _ = writeln!(out, "steps {}", self.steps.len());
        for s in &self.steps {
            let _ = writeln!(
                out,
                "step side={} dir={} c={} b={} ao={} bo={} d={} added={}",
                s.side.name(),
                s.direction.name(),
                join_ids(&s.c_set),
                join_ids(&s.b_set),
                join_ids(&s.other_dom),
                join_ids(&s.other_img),
                join_ids(&s.d_set),
                s.added
                    .iter()
                    .map(|(x, y)| format!("{x}:{y}"))
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
        let _ = writeln!(out, "end");
        out
    }

    pub fn parse(text: &str) -> Result<FreePair> {
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")))
        };
        if next("header")? != "FREEPAIR/1" {
            return Err(Error::Parse("missing FREEPAIR/1 header".into()));
        }
        let oracle_line = next("oracle line")?;
        let (kind, seed) = parse_oracle_line(oracle_line)?;
        let sizes_line = next("sizes line")?;
        let size_table: Vec<usize> = sizes_line
            .strip_prefix("sizes ")
            .ok_or_else(|| Error::Parse("expected `sizes` line".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size `{t}`"))))
            .collect::<Result<_>>()?;
        let cert_depth: usize = next("certdepth line")?
            .strip_prefix("certdepth ")
            .ok_or_else(|| Error::Parse("expected `certdepth` line".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad certdepth".into()))?;
        let n: usize = next("elements line")?
            .strip_prefix("elements ")
            .ok_or_else(|| Error::Parse("expected `elements` line".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad element count".into()))?;
        let mut payloads = Vec::with_capacity(n);
        for id in 0..n {
            let line = next("elem line")?;
            let rest = line
                .strip_prefix(&format!("elem {id} "))
                .ok_or_else(|| Error::Parse(format!("expected `elem {id}` line")))?;
            payloads.push(parse_payload(kind, rest)?);
        }
        let phi = parse_map("phi", &mut lines)?;
        let gamma = parse_map("gamma", &mut lines)?;
        let steps_header = lines
            .next()
            .ok_or_else(|| Error::Parse("expected `steps` line".into()))?;
        let count: usize = steps_header
            .strip_prefix("steps ")
            .ok_or_else(|| Error::Parse("expected `steps` line".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad step count".into()))?;
        let mut steps = Vec::with_capacity(count);
        for _ in 0..count {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("unexpected end of file in steps".into()))?;
            steps.push(parse_step(line)?);
        }
        match lines.next() {
            Some("end") => {}
            _ => return Err(Error::Parse("missing `end` trailer".into())),
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing content after `end`".into()));
        }
        Ok(FreePair {
            kind,
            seed,
            size_table,
            payloads,
            phi,
            gamma,
            cert_depth,
            steps,
        })
    }
}

fn join_ids(ids: &[ElementId]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_ids(s: &str) -> Result<Vec<ElementId>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad id `{t}`"))))
        .collect()
}

fn parse_oracle_line(line: &str) -> Result<(OracleKind, u64)> {
    let rest = line
        .strip_prefix("oracle ")
        .ok_or_else(|| Error::Parse("expected `oracle` line".into()))?;
    let mut parts = rest.split_whitespace();
    let kind = OracleKind::parse(
        parts
            .next()
            .ok_or_else(|| Error::Parse("missing oracle kind".into()))?,
    )?;
    let seed = parts
        .next()
        .and_then(|t| t.strip_prefix("seed="))
        .ok_or_else(|| Error::Parse("missing seed".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad seed".into()))?;
    if parts.next().is_some() {
        return Err(Error::Parse("trailing tokens on oracle line".into()));
    }
    Ok((kind, seed))
}

fn parse_payload(kind: OracleKind, rest: &str) -> Result<ElementPayload> {
    match kind {
        OracleKind::PureSet => {
            if rest != "-" {
                return Err(Error::Parse("pure-set payload must be `-`".into()));
            }
            Ok(ElementPayload::Pure)
        }
        OracleKind::DenseLinearOrder => {
            let r = rest
                .strip_prefix("rank=")
                .ok_or_else(|| Error::Parse("expected rank payload".into()))?
                .parse()
                .map_err(|_| Error::Parse("bad rank".into()))?;
            Ok(ElementPayload::DloRank(r))
        }
        OracleKind::RandomGraph => {
            let body = rest
                .strip_prefix("row=")
                .ok_or_else(|| Error::Parse("expected row payload".into()))?;
            let words = if body.is_empty() {
                Vec::new()
            } else {
                body.split(',')
                    .map(|t| {
                        u64::from_str_radix(t, 16)
                            .map_err(|_| Error::Parse(format!("bad row word `{t}`")))
                    })
                    .collect::<Result<_>>()?
            };
            Ok(ElementPayload::GraphRow(words))
        }
        OracleKind::EquivTower => {
            let body = rest
                .strip_prefix("vector=")
                .ok_or_else(|| Error::Parse("expected vector payload".into()))?;
            let v = if body.is_empty() {
                Vec::new()
            } else {
                body.split(',')
                    .map(|t| {
                        t.parse()
                            .map_err(|_| Error::Parse(format!("bad coordinate `{t}`")))
                    })
                    .collect::<Result<_>>()?
            };
            Ok(ElementPayload::TowerVector(v))
        }
    }
}

fn parse_map<'a>(
    name: &str,
    lines: &mut impl Iterator<Item = &'a str>,
) -> Result<PartialAutomorphism> {
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("expected `{name}` line")))?;
    let count: usize = header
        .strip_prefix(&format!("{name} "))
        .ok_or_else(|| Error::Parse(format!("expected `{name}` line, got `{header}`")))?
        .parse()
        .map_err(|_| Error::Parse("bad mapping count".into()))?;
    let mut map = PartialAutomorphism::new();
    for _ in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of file in mapping".into()))?;
        let rest = line
            .strip_prefix("map ")
            .ok_or_else(|| Error::Parse(format!("expected `map` line, got `{line}`")))?;
        let mut parts = rest.split_whitespace();
        let x: ElementId = parts
            .next()
            .ok_or_else(|| Error::Parse("missing map source".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad map source".into()))?;
        let y: ElementId = parts
            .next()
            .ok_or_else(|| Error::Parse("missing map target".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad map target".into()))?;
        if parts.next().is_some() {
            return Err(Error::Parse("trailing tokens on map line".into()));
        }
        map.insert(x, y)?;
    }
    Ok(map)
}

fn parse_step(line: &str) -> Result<StepRecord> {
    let rest = line
        .strip_prefix("step ")
        .ok_or_else(|| Error::Parse(format!("expected `step` line, got `{line}`")))?;
    let mut side = None;
    let mut dir = None;
    let mut c = None;
    let mut b = None;
    let mut ao = None;
    let mut bo = None;
    let mut d = None;
    let mut added = None;
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad step token `{token}`")))?;
        match key {
            "side" => side = Some(Side::parse(value)?),
            "dir" => dir = Some(Direction::parse(value)?),
            "c" => c = Some(parse_ids(value)?),
            "b" => b = Some(parse_ids(value)?),
            "ao" => ao = Some(parse_ids(value)?),
            "bo" => bo = Some(parse_ids(value)?),
            "d" => d = Some(parse_ids(value)?),
            "added" => {
                let mut pairs = Vec::new();
                if !value.is_empty() {
                    for p in value.split(',') {
                        let (x, y) = p
                            .split_once(':')
                            .ok_or_else(|| Error::Parse(format!("bad added pair `{p}`")))?;
                        pairs.push((
                            x.parse()
                                .map_err(|_| Error::Parse(format!("bad id `{x}`")))?,
                            y.parse()
                                .map_err(|_| Error::Parse(format!("bad id `{y}`")))?,
                        ));
                    }
                }
                added = Some(pairs);
            }
            other => return Err(Error::Parse(format!("unknown step key `{other}`"))),
        }
    }
    let missing = |what: &str| Error::Parse(format!("step line missing `{what}`"));
    Ok(StepRecord {
        side: side.ok_or_else(|| missing("side"))?,
        direction: dir.ok_or_else(|| missing("dir"))?,
        c_set: c.ok_or_else(|| missing("c"))?,
        b_set: b.ok_or_else(|| missing("b"))?,
        other_dom: ao.ok_or_else(|| missing("ao"))?,
        other_img: bo.ok_or_else(|| missing("bo"))?,
        d_set: d.ok_or_else(|| missing("d"))?,
        added: added.ok_or_else(|| missing("added"))?,
    })
}
