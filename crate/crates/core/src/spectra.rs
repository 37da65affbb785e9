//! Spectral certificates for the free pair: adjacency operators of Cayley
//! and Schreier balls of the rank-2 free group, iterative top-eigenvalue
//! estimation, the Kesten norm table, and displacement bounds.
//!
//! The generator sum S = π(a) + π(a⁻¹) + π(b) + π(b⁻¹) restricted to the
//! radius-r ball of the 4-regular tree is the ball's adjacency operator. Its
//! norm λ(r) increases to 2√3 (the Kesten norm, [`crate::KESTEN_NORM_F2`]),
//! and for unit vectors ξ supported on the inner ball the summed squared
//! displacement under the two generators equals 4 − ⟨Sξ, ξ⟩ exactly, giving
//! the bound 4 − 2√3 and the max-form bound √(2 − √3).

use crate::error::Error;
use crate::freepair::{frozen_schreier_ball, FreePair, Letter};
use crate::rng::SplitMix;
use crate::structures::ElementId;
use crate::{Result, DISPLACEMENT_MAX_BOUND, DISPLACEMENT_SUM_BOUND, KESTEN_NORM_F2};

/// Where a sparse operator came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    CayleyBall { radius: usize },
    SchreierBall { base: ElementId, radius: usize },
}

/// Symmetric sparse adjacency operator with unit weights. Row degrees are at
/// most 4 (the tree ball is 4-regular in the interior, leaves have degree 1).
#[derive(Clone, Debug)]
pub struct SparseSymOp {
    neighbors: Vec<Vec<u32>>,
    provenance: Provenance,
}

impl SparseSymOp {
    /// Build from an undirected neighbor-list adjacency. Validates symmetry
    /// and the degree bound.
    pub fn from_adjacency(neighbors: Vec<Vec<u32>>, provenance: Provenance) -> Result<SparseSymOp> {
        let n = neighbors.len();
        for (i, row) in neighbors.iter().enumerate() {
            if row.len() > 4 {
                return Err(Error::InvariantViolation(format!(
                    "vertex {i} has degree {} > 4",
                    row.len()
                )));
            }
            for &j in row {
                if j as usize >= n {
                    return Err(Error::InvariantViolation(format!(
                        "edge ({i},{j}) leaves the ball"
                    )));
                }
                if !neighbors[j as usize].contains(&(i as u32)) {
                    return Err(Error::InvariantViolation(format!(
                        "edge ({i},{j}) is not symmetric"
                    )));
                }
            }
        }
        Ok(SparseSymOp {
            neighbors,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.neighbors.len()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }

    /// y = A·x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, row) in self.neighbors.iter().enumerate() {
            let mut s = 0.0;
            for &j in row {
                s += x[j as usize];
            }
            y[i] = s;
        }
    }

    /// ⟨A·x, x⟩.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.neighbors.iter().enumerate() {
            for &j in row {
                s += x[i] * x[j as usize];
            }
        }
        s
    }
}

/// Ball size 2·3^r − 1 of the 4-regular tree.
pub fn ball_size(r: usize) -> usize {
    2 * 3usize.pow(r as u32) - 1
}

/// Maximum ball radius accepted before the dimension limit (2·3^13 − 1 ≈
/// 3.2M) is exceeded.
pub const MAX_BALL_RADIUS: usize = 13;

/// The radius-r ball of the 4-regular tree with per-letter neighbor maps:
/// `letters[v][l]` is the vertex reached from v by prepending letter l, when
/// inside the ball. Vertex 0 is the identity; children are produced in
/// canonical letter order, matching the Schreier-ball walk bit for bit.
struct TreeBall {
    letters: Vec<[Option<u32>; 4]>,
}

fn tree_ball(r: usize) -> Result<TreeBall> {
    if r < 1 {
        return Err(Error::Config("ball radius must be at least 1".into()));
    }
    if r > MAX_BALL_RADIUS {
        return Err(Error::ResourceLimit(format!(
            "ball radius {r} exceeds the dimension limit (max {MAX_BALL_RADIUS})"
        )));
    }
    let n = ball_size(r);
    let mut letters: Vec<[Option<u32>; 4]> = vec![[None; 4]; 1];
    // (vertex, letter that produced it)
    let mut frontier: Vec<(u32, Option<Letter>)> = vec![(0, None)];
    for _ in 0..r {
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for &(vi, arrived) in &frontier {
            for (li, l) in Letter::ALL.into_iter().enumerate() {
                if arrived.map(|a| l == a.inverse()).unwrap_or(false) {
                    continue;
                }
                let wi = letters.len() as u32;
                letters.push([None; 4]);
                letters[vi as usize][li] = Some(wi);
                let back = l.inverse() as usize;
                letters[wi as usize][back] = Some(vi);
                next.push((wi, Some(l)));
            }
        }
        frontier = next;
    }
    debug_assert_eq!(letters.len(), n);
    Ok(TreeBall { letters })
}

/// Adjacency operator of the radius-r Cayley ball of F₂ = ⟨a, b⟩: the
/// restriction of π(a) + π(a⁻¹) + π(b) + π(b⁻¹) in the left-regular
/// representation to functions supported on words of length ≤ r.
pub fn cayley_ball(r: usize) -> Result<SparseSymOp> {
    let ball = tree_ball(r)?;
    let neighbors: Vec<Vec<u32>> = ball
        .letters
        .iter()
        .map(|row| row.iter().flatten().copied().collect())
        .collect();
    SparseSymOp::from_adjacency(neighbors, Provenance::CayleyBall { radius: r })
}

/// An eigenvalue estimate with its independent a-posteriori residual.
#[derive(Clone, Copy, Debug)]
pub struct EigEstimate {
    pub value: f64,
    /// ‖A·v − value·v‖ for the unit vector v returned by the iteration
    pub residual: f64,
    pub iterations: usize,
}

const POWER_ITERATION_CAP: usize = 200_000;

/// Largest eigenvalue by shifted power iteration (on A + 4I, which is
/// positive semidefinite for ‖A‖ ≤ 4) with a deterministic seeded start
/// vector. The contract is on the residual ‖A·v − λ·v‖ ≤ tol, not on the
/// method.
pub fn top_eigenvalue(op: &SparseSymOp, tol: f64) -> Result<EigEstimate> {
    if tol <= 0.0 {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let n = op.dim();
    let mut rng = SplitMix::new(0x7370_6563_7472_6121 ^ n as u64);
    // strictly positive start: overlaps the Perron eigenvector of the ball
    let mut v: Vec<f64> = (0..n)
        .map(|_| 0.5 + 0.5 * (rng.next_signed_unit() + 1.0) / 2.0)
        .collect();
    normalize(&mut v);
    let mut w = vec![0.0; n];
    let shift = 4.0;
    for it in 1..=POWER_ITERATION_CAP {
        op.apply(&v, &mut w);
        let lambda = dot(&v, &w);
        let mut residual_sq = 0.0;
        for i in 0..n {
            let d = w[i] - lambda * v[i];
            residual_sq += d * d;
        }
        let residual = residual_sq.sqrt();
        if residual <= tol {
            return Ok(EigEstimate {
                value: lambda,
                residual,
                iterations: it,
            });
        }
        for i in 0..n {
            v[i] = w[i] + shift * v[i];
        }
        normalize(&mut v);
    }
    op.apply(&v, &mut w);
    let lambda = dot(&v, &w);
    let residual = (0..n)
        .map(|i| {
            let d = w[i] - lambda * v[i];
            d * d
        })
        .sum::<f64>()
        .sqrt();
    Err(Error::NonConvergence {
        residual,
        iterations: POWER_ITERATION_CAP,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

/// One row of the Kesten table.
#[derive(Clone, Copy, Debug)]
pub struct KestenRow {
    pub r: usize,
    pub lambda: f64,
    pub residual: f64,
    /// 2√3 − λ(r)
    pub gap: f64,
}

/// λ(r) for r = 1..=r_max.
#[derive(Clone, Debug)]
pub struct KestenReport {
    pub rows: Vec<KestenRow>,
    pub tol: f64,
}

impl KestenReport {
    /// λ strictly increasing and below the Kesten norm 2√3, with gaps
    /// monotonically shrinking.
    pub fn passed(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].lambda > w[0].lambda)
            && self.rows.iter().all(|row| row.lambda < KESTEN_NORM_F2)
            && self.rows.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

/// Compute the Kesten norm table λ(r) = ‖A_r‖ for r = 1..=r_max.
pub fn kesten_report(r_max: usize, tol: f64) -> Result<KestenReport> {
    if r_max < 2 {
        return Err(Error::Config("r_max must be at least 2".into()));
    }
    let mut rows = Vec::with_capacity(r_max);
    for r in 1..=r_max {
        let op = cayley_ball(r)?;
        let est = top_eigenvalue(&op, tol)?;
        rows.push(KestenRow {
            r,
            lambda: est.value,
            residual: est.residual,
            gap: KESTEN_NORM_F2 - est.value,
        });
    }
    Ok(KestenReport { rows, tol })
}

/// Displacement report for unit vectors supported on the inner ball
/// (radius r − 1) of the radius-r ball, where all four generator translates
/// are total and the quadratic-form identity is exact.
#[derive(Clone, Debug)]
pub struct DisplacementReport {
    pub r: usize,
    /// infimum of Σᵢ‖π(fᵢ)ξ − ξ‖² over unit ξ on the inner ball:
    /// 4 − λ(r−1)
    pub worst_sum: f64,
    /// the bound 4 − 2√3 the worst case must respect
    pub sum_bound: f64,
    pub samples: usize,
    /// smallest sampled Σᵢ‖π(fᵢ)ξ − ξ‖²
    pub min_sample_sum: f64,
    /// smallest sampled maxᵢ‖π(fᵢ)ξ − ξ‖
    pub min_sample_max_form: f64,
    /// the bound √(2 − √3) the max form must respect
    pub max_form_bound: f64,
    /// largest deviation between the direct translate evaluation of the sum
    /// and the identity 4 − ⟨Sξ, ξ⟩ across samples
    pub identity_max_err: f64,
    pub passed: bool,
}

/// Evaluate the displacement bounds on the radius-r ball: the worst case
/// over the inner ball via the top eigenvalue, plus seeded random unit
/// samples evaluated directly through the generator translates.
pub fn displacement_bound(r: usize, samples: usize) -> Result<DisplacementReport> {
    if r < 2 {
        return Err(Error::Config(
            "displacement needs r >= 2 (a nonempty inner ball)".into(),
        ));
    }
    let ball = tree_ball(r)?;
    let inner_dim = ball_size(r - 1);
    let full_dim = ball_size(r);
    // worst case: Σ = 4 − ⟨Sξ, ξ⟩ and ξ ranges over the inner ball, where
    // the form restricts to the inner ball's own adjacency
    let inner_op = cayley_ball(r - 1)?;
    let est = top_eigenvalue(&inner_op, 1e-11)?;
    let worst_sum = 4.0 - est.value;
    let mut rng = SplitMix::new(0x6469_7370_6c61_6365 ^ (r as u64) << 8);
    let mut min_sample_sum = f64::INFINITY;
    let mut min_sample_max_form = f64::INFINITY;
    let mut identity_max_err: f64 = 0.0;
    let mut xi = vec![0.0; full_dim];
    let mut shifted = vec![0.0; full_dim];
    for _ in 0..samples {
        for x in xi.iter_mut() {
            *x = 0.0;
        }
        for x in xi.iter_mut().take(inner_dim) {
            *x = rng.next_signed_unit();
        }
        normalize(&mut xi);
        let mut sum = 0.0;
        let mut max_form: f64 = 0.0;
        // generators a and b: (π(f)ξ)(w) = ξ(f⁻¹w), i.e. follow the
        // inverse-letter edge of w
        for li in [Letter::AInv as usize, Letter::BInv as usize] {
            for w in 0..full_dim {
                shifted[w] = match ball.letters[w][li] {
                    Some(u) => xi[u as usize],
                    None => 0.0,
                };
            }
            let mut d2 = 0.0;
            for w in 0..full_dim {
                let d = shifted[w] - xi[w];
                d2 += d * d;
            }
            sum += d2;
            max_form = max_form.max(d2.sqrt());
        }
        // exact identity on the inner ball: Σ = 4 − ⟨Sξ, ξ⟩
        let identity = 4.0 - inner_op.quadratic_form(&xi[..inner_dim]);
        identity_max_err = identity_max_err.max((sum - identity).abs());
        min_sample_sum = min_sample_sum.min(sum);
        min_sample_max_form = min_sample_max_form.min(max_form);
    }
    let passed = worst_sum >= DISPLACEMENT_SUM_BOUND - 1e-9
        && (samples == 0
            || (min_sample_sum >= DISPLACEMENT_SUM_BOUND - 1e-9
                && min_sample_max_form >= DISPLACEMENT_MAX_BOUND - 1e-9
                && identity_max_err <= 1e-9));
    Ok(DisplacementReport {
        r,
        worst_sum,
        sum_bound: DISPLACEMENT_SUM_BOUND,
        samples,
        min_sample_sum,
        min_sample_max_form,
        max_form_bound: DISPLACEMENT_MAX_BOUND,
        identity_max_err,
        passed,
    })
}

/// Agreement between the constructed action's Schreier ball and the abstract
/// Cayley ball.
#[derive(Clone, Debug)]
pub struct OrbitSpectralReport {
    pub base: ElementId,
    pub r: usize,
    pub dim: usize,
    pub orbit_lambda: EigEstimate,
    pub cayley_lambda: EigEstimate,
    /// |λ_orbit − λ_cayley|
    pub agreement: f64,
    /// worst-case displacement sum on the orbit ball's inner ball
    pub orbit_worst_sum: f64,
    pub passed: bool,
}

/// Build the generator-sum operator from the Schreier ball of a frozen pair
/// around `base` and compare its spectrum with the abstract Cayley ball.
/// Errors with `NotATree` if the ball walk revisits an element — a freeness
/// failure, not a numerical one.
pub fn kazhdan_check_on_orbit(
    pair: &FreePair,
    base: ElementId,
    r: usize,
    tol: f64,
) -> Result<OrbitSpectralReport> {
    let ball = frozen_schreier_ball(&pair.phi, &pair.gamma, base, r)?;
    if !ball.is_tree() || ball.size() != ball_size(r) {
        return Err(Error::NotATree(format!(
            "orbit ball has {} vertices and is_tree = {}",
            ball.size(),
            ball.is_tree()
        )));
    }
    let op = SparseSymOp::from_adjacency(
        ball.adj.clone(),
        Provenance::SchreierBall { base, radius: r },
    )?;
    let orbit_lambda = top_eigenvalue(&op, tol)?;
    let cayley = cayley_ball(r)?;
    let cayley_lambda = top_eigenvalue(&cayley, tol)?;
    let agreement = (orbit_lambda.value - cayley_lambda.value).abs();
    // displacement worst case on the orbit ball: inner ball operator
    let inner = frozen_schreier_ball(&pair.phi, &pair.gamma, base, r - 1)?;
    let inner_op = SparseSymOp::from_adjacency(
        inner.adj.clone(),
        Provenance::SchreierBall {
            base,
            radius: r - 1,
        },
    )?;
    let inner_est = top_eigenvalue(&inner_op, tol)?;
    let orbit_worst_sum = 4.0 - inner_est.value;
    let passed = agreement <= 1e-9 && orbit_worst_sum >= DISPLACEMENT_SUM_BOUND - 1e-9;
    Ok(OrbitSpectralReport {
        base,
        r,
        dim: op.dim(),
        orbit_lambda,
        cayley_lambda,
        agreement,
        orbit_worst_sum,
        passed,
    })
}

/// Top eigenvalue of the radial reduction of the radius-r ball: spherical
/// (radius-dependent) functions form an invariant subspace containing the
/// Perron eigenvector, on which the adjacency acts as the (r+1)-point
/// tridiagonal operator with offdiagonals β₀ = 2 and βᵢ = √3 for i ≥ 1
/// (β = edge count between consecutive spheres over the geometric mean of
/// the sphere sizes 1, 4, 12, 36, …). Closed forms: λ(1) = 2, λ(2) = √7,
/// λ(3) = √((10 + √52)/2). Serves as an independent oracle for every r.
pub fn radial_top_eigenvalue(r: usize) -> f64 {
    let n = r + 1;
    let mut beta = vec![0.0; n.saturating_sub(1)];
    if !beta.is_empty() {
        beta[0] = 2.0;
        for b in beta.iter_mut().skip(1) {
            *b = 3f64.sqrt();
        }
    }
    // bisection on the largest root of the characteristic polynomial via the
    // Sturm sequence of the tridiagonal matrix (diagonal is zero)
    let count_below = |x: f64| -> usize {
        // number of eigenvalues < x, by LDLᵀ sign count
        let mut count = 0;
        let mut d = -x;
        if d < 0.0 {
            count += 1;
        }
        for &b in &beta {
            d = -x - b * b / d;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut lo = 0.0;
    let mut hi = 4.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
