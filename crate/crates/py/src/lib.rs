//! Python bindings for the freeact library: oracles, orbit counts, free
//! pair construction/persistence, and the spectral certificates.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use freeact::closure::orbit_partition;
use freeact::freepair::{build, check_fixed_points, frozen_schreier_ball, FreePair};
use freeact::spectra::{
    cayley_ball, displacement_bound, kesten_report, radial_top_eigenvalue, top_eigenvalue,
};
use freeact::structures::{OracleKind, StructureOracle};

fn pyerr(e: freeact::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A growing finite window of a countable homogeneous structure.
#[pyclass]
struct Oracle {
    inner: StructureOracle,
}

#[pymethods]
impl Oracle {
    /// kind: "pureset" | "dlo" | "randomgraph" | "equivtower"
    #[new]
    fn new(kind: &str, seed: u64) -> PyResult<Self> {
        let kind = OracleKind::parse(kind).map_err(pyerr)?;
        Ok(Oracle {
            inner: StructureOracle::new(kind, seed),
        })
    }

    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    /// Number of elements currently in the window.
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn grow_to_level(&mut self, level: u32) -> PyResult<()> {
        self.inner.grow_to_level(level).map_err(pyerr)
    }

    /// Element ids of the level-`level` window.
    fn window(&mut self, level: u32) -> PyResult<Vec<u32>> {
        let w = self.inner.window(level).map_err(pyerr)?;
        Ok(w.elements().collect())
    }

    /// (orbit classes, injective orbit classes) of `arity`-tuples over the
    /// empty base at window level `level`.
    #[pyo3(signature = (arity, level, scan_cap=None))]
    fn orbit_counts(
        &mut self,
        arity: usize,
        level: u32,
        scan_cap: Option<usize>,
    ) -> PyResult<(usize, usize)> {
        let p = orbit_partition(&mut self.inner, &[], arity, level, scan_cap).map_err(pyerr)?;
        Ok((p.class_count(), p.injective_class_count()))
    }
}

/// A frozen free pair of partial automorphisms with its certification data.
#[pyclass(name = "FreePair")]
struct FreePairPy {
    pair: FreePair,
}

#[pymethods]
impl FreePairPy {
    fn oracle_kind(&self) -> String {
        self.pair.kind.to_string()
    }

    fn seed(&self) -> u64 {
        self.pair.seed
    }

    fn cert_depth(&self) -> usize {
        self.pair.cert_depth
    }

    fn phi_pairs(&self) -> Vec<(u32, u32)> {
        self.pair.phi.pairs()
    }

    fn gamma_pairs(&self) -> Vec<(u32, u32)> {
        self.pair.gamma.pairs()
    }

    /// Evaluate all reduced words of length <= depth over the restored
    /// window; returns (evaluations, violations). A free pair has zero
    /// violations.
    fn check_fixed_points(&self, depth: usize) -> PyResult<(u64, usize)> {
        let oracle = self.pair.restore_oracle().map_err(pyerr)?;
        let report = check_fixed_points(
            &self.pair.phi,
            &self.pair.gamma,
            depth,
            &oracle.full_window(),
        );
        Ok((report.evaluations, report.violations.len()))
    }

    /// Size of the orbit Schreier ball of radius r at `base`; equals
    /// 2*3^r - 1 exactly when the pair acts freely out to radius r.
    fn schreier_ball_size(&self, base: u32, r: usize) -> PyResult<usize> {
        let ball = frozen_schreier_ball(&self.pair.phi, &self.pair.gamma, base, r).map_err(pyerr)?;
        Ok(ball.size())
    }

    /// Serialize in the FREEPAIR/1 text format.
    fn to_text(&self) -> String {
        self.pair.to_text()
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(FreePairPy {
            pair: FreePair::parse(text).map_err(pyerr)?,
        })
    }
}

/// Build a free pair over a fresh oracle via the back-and-forth builder.
#[pyfunction]
#[pyo3(signature = (kind, seed, level, rounds, cert_depth))]
fn build_pair(
    kind: &str,
    seed: u64,
    level: u32,
    rounds: usize,
    cert_depth: usize,
) -> PyResult<FreePairPy> {
    let kind = OracleKind::parse(kind).map_err(pyerr)?;
    let oracle = StructureOracle::new(kind, seed);
    let mut builder = build(oracle, level, rounds, cert_depth).map_err(pyerr)?;
    let base = builder.phi().domain().first().copied().unwrap_or(0);
    builder.schreier_ball(base, 3).map_err(pyerr)?;
    let pair = builder.freeze().map_err(pyerr)?;
    Ok(FreePairPy { pair })
}

/// Top eigenvalue of the radius-r Cayley ball adjacency operator.
#[pyfunction]
#[pyo3(signature = (r, tol=1e-10))]
fn cayley_top_eigenvalue(r: usize, tol: f64) -> PyResult<f64> {
    let op = cayley_ball(r).map_err(pyerr)?;
    Ok(top_eigenvalue(&op, tol).map_err(pyerr)?.value)
}

/// Independent radial (tridiagonal) eigenvalue oracle for the same ball.
#[pyfunction]
#[pyo3(name = "radial_top_eigenvalue")]
fn radial_top_eigenvalue_py(r: usize) -> f64 {
    radial_top_eigenvalue(r)
}

/// Kesten table rows (r, lambda, gap_to_limit) for r = 1..=r_max.
#[pyfunction]
#[pyo3(signature = (r_max, tol=1e-10))]
fn kesten_table(r_max: usize, tol: f64) -> PyResult<Vec<(usize, f64, f64)>> {
    let report = kesten_report(r_max, tol).map_err(pyerr)?;
    Ok(report
        .rows
        .iter()
        .map(|row| (row.r, row.lambda, row.gap))
        .collect())
}

/// Displacement spot check at radius r: returns
/// (worst_sum, sum_bound, min_sample_max_form, max_form_bound, passed).
#[pyfunction]
#[pyo3(signature = (r, samples=1000))]
fn displacement(r: usize, samples: usize) -> PyResult<(f64, f64, f64, f64, bool)> {
    let d = displacement_bound(r, samples).map_err(pyerr)?;
    Ok((
        d.worst_sum,
        d.sum_bound,
        d.min_sample_max_form,
        d.max_form_bound,
        d.passed,
    ))
}

#[pymodule]
fn freeact_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Oracle>()?;
    m.add_class::<FreePairPy>()?;
    m.add_function(wrap_pyfunction!(build_pair, m)?)?;
    m.add_function(wrap_pyfunction!(cayley_top_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(radial_top_eigenvalue_py, m)?)?;
    m.add_function(wrap_pyfunction!(kesten_table, m)?)?;
    m.add_function(wrap_pyfunction!(displacement, m)?)?;
    m.add("KESTEN_NORM_F2", freeact::KESTEN_NORM_F2)?;
    m.add("DISPLACEMENT_SUM_BOUND", freeact::DISPLACEMENT_SUM_BOUND)?;
    m.add("DISPLACEMENT_MAX_BOUND", freeact::DISPLACEMENT_MAX_BOUND)?;
    Ok(())
}
