//! Command driver: configuration, report emission and persistence glue.
//!
//! Reports are stable structured text: identical configuration produces
//! byte-identical reports apart from the trailing timing line, and every
//! numeric claim carries the tolerance it was checked at. Verification of a
//! persisted pair re-runs each certification from the artifact alone, so a
//! build report and the verify report of its output contain identical check
//! lines.

use std::fmt::Write as _;
use std::time::Instant;

use crate::closure::{assert_no_algebraicity, orbit_partition, CertifiedSet};
use crate::error::Error;
use crate::freepair::{
    build, check_fixed_points, frozen_schreier_ball, tower_fixed_class,
    tower_neumann_failure_demo, FreePair, SchreierBall,
};
use crate::neumann::separate;
use crate::spectra::{displacement_bound, kazhdan_check_on_orbit, kesten_report};
use crate::structures::{OracleKind, StructureOracle};
use crate::Result;

/// Flat key=value configuration with optional `[section]` headers. Unknown
/// keys and sections are rejected; numeric fields must be positive (rounds
/// and samples may be zero).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub oracle: OracleKind,
    pub seed: u64,
    pub level: u32,
    pub rounds: usize,
    pub cert_depth: usize,
    pub r_max: usize,
    pub tol: f64,
    pub samples: usize,
    pub out: Option<String>,
    pub pair: Option<String>,
}

impl RunConfig {
    /// Defaults tuned per oracle kind (window levels mean different sizes
    /// for different kinds).
    pub fn default_for(kind: OracleKind) -> RunConfig {
        let level = match kind {
            OracleKind::RandomGraph => 3,
            OracleKind::EquivTower => 2,
            _ => 8,
        };
        RunConfig {
            oracle: kind,
            seed: 42,
            level,
            rounds: 10,
            cert_depth: 6,
            r_max: 8,
            tol: 1e-10,
            samples: 1000,
            out: None,
            pair: None,
        }
    }

    /// Parse a configuration document; `[run]`, `[spectra]` and `[output]`
    /// section headers are allowed, every other line must be `key=value`.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default_for(OracleKind::RandomGraph);
        let mut kind_given = false;
        let mut level_given = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(section) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                if !matches!(section, "run" | "spectra" | "output") {
                    return Err(Error::Config(format!(
                        "line {}: unknown section [{section}]",
                        lineno + 1
                    )));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "oracle" => {
                    cfg.oracle = OracleKind::parse(value)?;
                    kind_given = true;
                }
                "seed" => cfg.seed = parse_num(key, value)?,
                "level" => {
                    cfg.level = parse_positive(key, value)? as u32;
                    level_given = true;
                }
                "rounds" => cfg.rounds = parse_num::<usize>(key, value)?,
                "cert_depth" => cfg.cert_depth = parse_positive(key, value)? as usize,
                "r_max" => cfg.r_max = parse_positive(key, value)? as usize,
                "tol" => {
                    cfg.tol = value.parse().map_err(|_| bad_value(key, value))?;
                    if !(cfg.tol > 0.0) {
                        return Err(Error::Config(format!("tol must be positive, got {value}")));
                    }
                }
                "samples" => cfg.samples = parse_num::<usize>(key, value)?,
                "out" => cfg.out = Some(value.to_string()),
                "pair" => cfg.pair = Some(value.to_string()),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        if kind_given && !level_given {
            cfg.level = RunConfig::default_for(cfg.oracle).level;
        }
        Ok(cfg)
    }

    /// Stable echo of the configuration, one `key=value` token per entry.
    pub fn echo(&self) -> String {
        let mut s = format!(
            "oracle={} seed={} level={} rounds={} cert_depth={} r_max={} tol={:e} samples={}",
            self.oracle, self.seed, self.level, self.rounds, self.cert_depth, self.r_max,
            self.tol, self.samples
        );
        if let Some(out) = &self.out {
            let _ = write!(s, " out={out}");
        }
        if let Some(pair) = &self.pair {
            let _ = write!(s, " pair={pair}");
        }
        s
    }
}

fn bad_value(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value `{value}` for key `{key}`"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad_value(key, value))
}

fn parse_positive(key: &str, value: &str) -> Result<u64> {
    let n: u64 = parse_num(key, value)?;
    if n == 0 {
        return Err(Error::Config(format!("{key} must be positive")));
    }
    Ok(n)
}

/// One verified claim in a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn line(&self) -> String {
        format!(
            "check {} {} {}",
            self.name,
            if self.passed { "pass" } else { "fail" },
            self.detail
        )
    }
}

/// Structured command report. `to_text` appends the timing line; the rest is
/// byte-identical across runs with the same configuration.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: String,
    pub checks: Vec<Check>,
    pub timing_ms: u128,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Deterministic part of the report (no timing).
    pub fn stable_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "REPORT/1 command={} version={}",
            self.command,
            env!("CARGO_PKG_VERSION")
        );
        let _ = writeln!(out, "config {}", self.config);
        for c in &self.checks {
            let _ = writeln!(out, "{}", c.line());
        }
        let _ = writeln!(out, "result {}", if self.passed() { "pass" } else { "fail" });
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = self.stable_text();
        let _ = writeln!(out, "timing ms={}", self.timing_ms);
        out.push_str("end\n");
        out
    }
}

/// Process exit code for an error, per the documented convention:
/// 2 usage/config, 3 resource budget, 1 everything else (check failures).
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse(_) => 2,
        Error::ResourceLimit(_) | Error::BudgetExhausted(_) => 3,
        _ => 1,
    }
}

fn finish(command: &str, cfg: &RunConfig, checks: Vec<Check>, started: Instant) -> Report {
    Report {
        command: command.to_string(),
        config: cfg.echo(),
        checks,
        timing_ms: started.elapsed().as_millis(),
    }
}

/// Orbit class counts for arities 1..=4 over the empty base.
pub fn cmd_orbits(cfg: &RunConfig) -> Result<Report> {
    let started = Instant::now();
    let mut oracle = StructureOracle::new(cfg.oracle, cfg.seed);
    let mut checks = Vec::new();
    for n in 1..=4usize {
        // keep the quartic enumeration affordable; counts stay exact as
        // long as every orbit is realized in the scanned prefix
        let cap = if n == 4 { Some(12) } else { Some(30) };
        let p = orbit_partition(&mut oracle, &[], n, cfg.level, cap)?;
        checks.push(Check {
            name: format!("orbits-n{n}"),
            passed: true,
            detail: format!(
                "classes={} injective={} level={} scan_cap={}",
                p.class_count(),
                p.injective_class_count(),
                cfg.level,
                cap.unwrap_or(0)
            ),
        });
    }
    Ok(finish("orbits", cfg, checks, started))
}

/// Certification checks computed purely from a frozen pair: identical
/// whether the pair just came out of the builder or was reloaded from disk.
fn certification_checks(pair: &FreePair, ball_rmax: usize) -> Result<Vec<Check>> {
    let oracle = pair.restore_oracle()?;
    let window = oracle.full_window();
    let mut checks = Vec::new();
    let type_ok = pair.phi.verify_types(&window).is_ok() && pair.gamma.verify_types(&window).is_ok();
    checks.push(Check {
        name: "type-preservation".into(),
        passed: type_ok,
        detail: format!(
            "phi_pairs={} gamma_pairs={} method=exhaustive",
            pair.phi.len(),
            pair.gamma.len()
        ),
    });
    let fresh = pair.steps.iter().filter(|s| s.freshness_ok()).count();
    checks.push(Check {
        name: "freshness-ledger".into(),
        passed: fresh == pair.steps.len(),
        detail: format!("steps={} fresh={}", pair.steps.len(), fresh),
    });
    let fp = check_fixed_points(&pair.phi, &pair.gamma, pair.cert_depth, &window);
    checks.push(Check {
        name: "fixed-points".into(),
        passed: fp.passed(),
        detail: format!(
            "depth={} evaluations={} violations={}",
            pair.cert_depth,
            fp.evaluations,
            fp.violations.len()
        ),
    });
    let base = pair.phi.domain().first().copied().unwrap_or(0);
    for r in 1..=ball_rmax {
        match frozen_schreier_ball(&pair.phi, &pair.gamma, base, r) {
            Ok(ball) => checks.push(Check {
                name: format!("schreier-ball-r{r}"),
                passed: ball.size() == SchreierBall::expected_size(r) && ball.is_tree(),
                detail: format!(
                    "base={base} size={} expected={} tree={}",
                    ball.size(),
                    SchreierBall::expected_size(r),
                    ball.is_tree()
                ),
            }),
            Err(e) => checks.push(Check {
                name: format!("schreier-ball-r{r}"),
                passed: false,
                detail: format!("base={base} error={e}"),
            }),
        }
    }
    Ok(checks)
}

/// Build a pair, extend it to cover a Schreier ball, certify, and persist.
pub fn cmd_build(cfg: &RunConfig) -> Result<Report> {
    let started = Instant::now();
    let oracle = StructureOracle::new(cfg.oracle, cfg.seed);
    let mut builder = build(oracle, cfg.level, cfg.rounds, cfg.cert_depth)?;
    let ball_rmax = cfg.r_max.min(6);
    let base = builder.phi().domain().first().copied().unwrap_or(0);
    builder.schreier_ball(base, ball_rmax)?;
    let pair = builder.freeze()?;
    let mut checks = certification_checks(&pair, ball_rmax)?;
    if let Some(out) = &cfg.out {
        std::fs::write(out, pair.to_text())
            .map_err(|e| Error::Config(format!("cannot write pair file {out}: {e}")))?;
        checks.push(Check {
            name: "persisted".into(),
            passed: true,
            detail: format!("path={out} format=FREEPAIR/1"),
        });
    }
    Ok(finish("build", cfg, checks, started))
}

/// Reload a persisted pair and re-certify everything from the artifact.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Report> {
    let started = Instant::now();
    let path = cfg
        .pair
        .as_ref()
        .ok_or_else(|| Error::Config("verify requires pair=<path>".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read pair file {path}: {e}")))?;
    let pair = FreePair::parse(&text)?;
    let checks = certification_checks(&pair, cfg.r_max.min(6))?;
    Ok(finish("verify", cfg, checks, started))
}

/// Kesten table, displacement bounds and (with a pair file) the orbit-ball
/// spectral agreement.
pub fn cmd_spectra(cfg: &RunConfig) -> Result<Report> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let kesten = kesten_report(cfg.r_max.max(2), cfg.tol)?;
    for row in &kesten.rows {
        checks.push(Check {
            name: format!("kesten-r{}", row.r),
            passed: row.lambda < crate::KESTEN_NORM_F2 && row.residual <= cfg.tol,
            detail: format!(
                "lambda={:.12} gap={:.12} residual_tol={:e}",
                row.lambda, row.gap, cfg.tol
            ),
        });
    }
    checks.push(Check {
        name: "kesten-monotone".into(),
        passed: kesten.passed(),
        detail: format!("rows={} limit={:.12}", kesten.rows.len(), crate::KESTEN_NORM_F2),
    });
    let disp = displacement_bound(cfg.r_max.clamp(2, 12), cfg.samples)?;
    checks.push(Check {
        name: "displacement".into(),
        passed: disp.passed,
        detail: format!(
            "r={} worst_sum={:.12} sum_bound={:.12} samples={} min_max_form={:.12} max_form_bound={:.12} identity_err={:.3e} tol=1e-9",
            disp.r,
            disp.worst_sum,
            disp.sum_bound,
            disp.samples,
            disp.min_sample_max_form,
            disp.max_form_bound,
            disp.identity_max_err
        ),
    });
    if let Some(path) = &cfg.pair {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read pair file {path}: {e}")))?;
        let pair = FreePair::parse(&text)?;
        let base = pair.phi.domain().first().copied().unwrap_or(0);
        let report = kazhdan_check_on_orbit(&pair, base, cfg.r_max.min(6), cfg.tol)?;
        checks.push(Check {
            name: "orbit-cayley-agreement".into(),
            passed: report.passed,
            detail: format!(
                "base={} r={} dim={} orbit_lambda={:.12} cayley_lambda={:.12} agreement={:.3e} tol=1e-9 orbit_worst_sum={:.12}",
                report.base,
                report.r,
                report.dim,
                report.orbit_lambda.value,
                report.cayley_lambda.value,
                report.agreement,
                report.orbit_worst_sum
            ),
        });
    }
    Ok(finish("spectra", cfg, checks, started))
}

/// The equivalence-tower counterexample: a pair built on the tower is free
/// on the home sort, yet every element's image shares some E_n-class with
/// it, so separation in the imaginary sort is impossible — while the
/// random-graph control separates fine.
pub fn cmd_counterexample(cfg: &RunConfig) -> Result<Report> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let oracle = StructureOracle::new(OracleKind::EquivTower, cfg.seed);
    let level = cfg.level.min(2).max(1);
    let mut builder = build(oracle, level, cfg.rounds, cfg.cert_depth)?;
    let fp = check_fixed_points(
        builder.phi(),
        builder.gamma(),
        builder.cert_depth(),
        &builder.oracle().full_window(),
    );
    checks.push(Check {
        name: "tower-pair-free".into(),
        passed: fp.passed(),
        detail: format!(
            "depth={} evaluations={} violations={}",
            builder.cert_depth(),
            fp.evaluations,
            fp.violations.len()
        ),
    });
    let domain = builder.phi().domain();
    let mut finite = 0usize;
    let mut max_n = 0u32;
    for &x in &domain {
        let class = tower_fixed_class(builder.oracle(), builder.phi(), x)?;
        finite += 1;
        max_n = max_n.max(class.index);
    }
    checks.push(Check {
        name: "tower-fixed-classes".into(),
        passed: finite == domain.len() && !domain.is_empty(),
        detail: format!("domain={} finite_n={finite} max_n={max_n}", domain.len()),
    });
    let x = domain.first().copied().unwrap_or(0);
    let budget = builder.oracle().size();
    let demo = tower_neumann_failure_demo(builder.oracle_mut(), x, budget)?;
    checks.push(Check {
        name: "tower-separation-fails".into(),
        passed: !demo.separated && demo.candidates == budget,
        detail: format!(
            "x={} candidates={} separated={} depth_le=2",
            demo.x, demo.candidates, demo.separated
        ),
    });
    // control: on the random graph, Neumann separation moves a point off
    // itself without difficulty
    let mut graph = StructureOracle::new(OracleKind::RandomGraph, cfg.seed);
    graph.grow_to_level(3)?;
    let report = assert_no_algebraicity(&mut graph, 8, 3)?;
    let cert = CertifiedSet::via_report(&report, &graph, &[0])?;
    let witness = separate(&mut graph, &[0], &[0], &cert, 5)?;
    checks.push(Check {
        name: "graph-control-separates".into(),
        passed: witness.image.len() == 1 && witness.image[0] != 0,
        detail: format!("moved=0 image={}", witness.image[0]),
    });
    Ok(finish("counterexample", cfg, checks, started))
}
