//! Orbit dimension at a point, dimension stratification over a box, orbit
//! sampling by random flow composition, and conserved-quantity checks along
//! flows.
//!
//! The orbit of a family through `p` has dimension equal to the evaluation
//! rank of the family's bracket-closure at `p` (the orbit theorem), which is
//! what [`orbit_dimension`] computes. Sampled orbits only ever certify a
//! subset of a leaf; membership claims rest on invariant constancy plus
//! dimension checks, not on coverage.

use std::fmt;
use std::io::{self, Write};

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{EvalError, Expression};
use crate::fields::AffineField;
use crate::flow::{flow_affine, Trajectory};
use crate::lie::FieldFamily;

/// Default time scale for the orbit random walk: large enough to traverse
/// the test leaves in a few hundred steps, small enough to keep exponential
/// arguments well conditioned.
pub const DEFAULT_T_SCALE: f64 = 0.5;

/// Absolute threshold under which a symbolic Lie derivative counts as
/// identically zero on the certification grid.
pub const LIE_CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("PLY export supports dimensions 3 and 4, got {0}")]
    UnsupportedDimension(usize),
}

/// A sampled orbit: visited points, the start point, and per-point values of
/// any attached invariants.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    points: Vec<DVector<f64>>,
    start: DVector<f64>,
    seed: u64,
    invariants: Vec<(String, Vec<f64>)>,
}

impl PointCloud {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn start(&self) -> &DVector<f64> {
        &self.start
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn invariants(&self) -> &[(String, Vec<f64>)] {
        &self.invariants
    }

    /// Evaluate `inv` at every point and store the column under `label`.
    pub fn attach_invariant(&mut self, label: &str, inv: &Expression) -> Result<(), EvalError> {
        let values = self
            .points
            .iter()
            .map(|p| inv.eval(p.as_slice()))
            .collect::<Result<Vec<_>, _>>()?;
        self.invariants.push((label.to_string(), values));
        Ok(())
    }

    /// Largest deviation of an attached invariant column from its value at
    /// the start point.
    pub fn invariant_drift(&self, index: usize) -> f64 {
        let values = &self.invariants[index].1;
        let base = values[0];
        values
            .iter()
            .fold(0.0f64, |acc, v| acc.max((v - base).abs()))
    }

    /// CSV export: header `x1,...,xn,inv1,...`, one row per point.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        header.extend((1..=self.invariants.len()).map(|k| format!("inv{k}")));
        writeln!(out, "{}", header.join(","))?;
        for (row, p) in self.points.iter().enumerate() {
            let mut cells: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            cells.extend(
                self.invariants
                    .iter()
                    .map(|(_, col)| format!("{}", col[row])),
            );
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// ASCII PLY export for external viewers; one float property per
    /// coordinate (`x, y, z[, w]`) plus one per attached invariant.
    pub fn write_ply<W: Write>(&self, out: &mut W) -> Result<(), ExportError> {
        let coord_names: &[&str] = match self.dim {
            3 => &["x", "y", "z"],
            4 => &["x", "y", "z", "w"],
            d => return Err(ExportError::UnsupportedDimension(d)),
        };
        writeln!(out, "ply")?;
        writeln!(out, "format ascii 1.0")?;
        writeln!(out, "element vertex {}", self.points.len())?;
        for name in coord_names {
            writeln!(out, "property float {name}")?;
        }
        for k in 1..=self.invariants.len() {
            writeln!(out, "property float inv{k}")?;
        }
        writeln!(out, "end_header")?;
        for (row, p) in self.points.iter().enumerate() {
            let mut cells: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            cells.extend(
                self.invariants
                    .iter()
                    .map(|(_, col)| format!("{}", col[row])),
            );
            writeln!(out, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Orbit dimension of the family at `p`: the evaluation rank of the cached
/// bracket-closure.
pub fn orbit_dimension(family: &FieldFamily, p: &DVector<f64>, tol: f64) -> usize {
    family.closure_cached().evaluation_rank(p, tol)
}

/// Axis-aligned box, per-axis bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> BoxSpec {
        assert_eq!(lo.len(), hi.len());
        assert!(
            lo.iter().zip(&hi).all(|(a, b)| a < b),
            "box bounds reversed"
        );
        BoxSpec { lo, hi }
    }

    /// The cube `[lo, hi]^dim`.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> BoxSpec {
        BoxSpec::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Lattice with `resolution` points per axis, lexicographic order.
    pub fn grid_points(&self, resolution: usize) -> Vec<DVector<f64>> {
        assert!(resolution >= 2, "resolution must be at least 2");
        let dim = self.dim();
        let total = resolution.pow(dim as u32);
        let mut out = Vec::with_capacity(total);
        let mut index = vec![0usize; dim];
        loop {
            out.push(DVector::from_iterator(
                dim,
                index.iter().enumerate().map(|(axis, &k)| {
                    self.lo[axis]
                        + k as f64 * (self.hi[axis] - self.lo[axis]) / (resolution - 1) as f64
                }),
            ));
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < resolution {
                    break;
                }
                index[axis] = 0;
            }
        }
    }
}

/// Orbit-dimension census over a box: node counts per dimension value and
/// one representative node per occurring value.
#[derive(Debug, Clone)]
pub struct StratificationSummary {
    pub box_spec: BoxSpec,
    pub resolution: usize,
    /// `counts[d]` = number of grid nodes with orbit dimension `d`.
    pub counts: Vec<usize>,
    pub representatives: Vec<Option<DVector<f64>>>,
    pub total: usize,
}

impl fmt::Display for StratificationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "stratification over {} nodes ({} per axis):",
            self.total, self.resolution
        )?;
        for (d, count) in self.counts.iter().enumerate() {
            if *count == 0 {
                continue;
            }
            let rep = self.representatives[d]
                .as_ref()
                .map(|p| {
                    let coords: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
                    format!("[{}]", coords.join(", "))
                })
                .unwrap_or_default();
            writeln!(f, "  dim {d}: {count} nodes, e.g. {rep}")?;
        }
        Ok(())
    }
}

/// Orbit dimension at every node of the lattice.
pub fn dimension_stratification(
    family: &FieldFamily,
    box_spec: &BoxSpec,
    resolution: usize,
    tol: f64,
) -> StratificationSummary {
    assert_eq!(box_spec.dim(), family.dim());
    let n = family.dim();
    let mut counts = vec![0usize; n + 1];
    let mut representatives: Vec<Option<DVector<f64>>> = vec![None; n + 1];
    let nodes = box_spec.grid_points(resolution);
    let total = nodes.len();
    for node in nodes {
        let d = orbit_dimension(family, &node, tol);
        counts[d] += 1;
        if representatives[d].is_none() {
            representatives[d] = Some(node);
        }
    }
    StratificationSummary {
        box_spec: box_spec.clone(),
        resolution,
        counts,
        representatives,
        total,
    }
}

/// Sample an orbit by a seeded random walk: each step flows the current
/// point along a uniformly chosen family member for a time uniform in
/// `[-t_scale, t_scale]`. Returns `steps + 1` points including `p0`.
pub fn sample_orbit(
    family: &FieldFamily,
    p0: &DVector<f64>,
    steps: usize,
    t_scale: f64,
    seed: u64,
) -> PointCloud {
    assert!(steps >= 1);
    assert!(t_scale > 0.0);
    assert_eq!(p0.len(), family.dim(), "point dimension mismatch");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(steps + 1);
    points.push(p0.clone());
    let mut current = p0.clone();
    for _ in 0..steps {
        let member = rng.random_range(0..family.members().len());
        let t = rng.random_range(-t_scale..=t_scale);
        current = flow_affine(&family.members()[member], &current, t);
        points.push(current.clone());
    }
    PointCloud {
        dim: family.dim(),
        points,
        start: p0.clone(),
        seed,
        invariants: Vec::new(),
    }
}

/// Outcome of a conserved-quantity check: drift of the invariant along the
/// trajectory, plus the analytic certificate (whether the symbolic Lie
/// derivative vanishes identically on a test grid).
#[derive(Debug, Clone)]
pub struct ConservationReport {
    pub tol: f64,
    pub max_drift: f64,
    /// Sample index realising the worst drift.
    pub drift_witness: Option<usize>,
    pub lie_derivative_zero: bool,
    pub lie_max_residual: f64,
    /// Grid point realising the worst Lie-derivative residual.
    pub lie_witness: Option<DVector<f64>>,
}

impl ConservationReport {
    pub fn passed(&self) -> bool {
        self.max_drift <= self.tol
    }
}

/// Symbolic Lie derivative `X(inv) = Σi ξi·∂inv/∂xi` of an invariant along
/// an affine field.
pub fn lie_derivative_affine(f: &AffineField, inv: &Expression) -> Expression {
    assert_eq!(f.dim(), inv.dim(), "dimension mismatch");
    let n = f.dim();
    let mut acc = Expression::constant(n, 0.0);
    for i in 0..n {
        acc = acc + f.component_expression(i) * inv.differentiate(i);
    }
    acc
}

/// Check that `inv` is constant along `traj` (within `tol`) and report the
/// symbolic Lie-derivative certificate for the generating field `f`.
pub fn conserved_check(
    f: &AffineField,
    inv: &Expression,
    traj: &Trajectory,
    tol: f64,
) -> Result<ConservationReport, EvalError> {
    assert_eq!(f.dim(), inv.dim(), "dimension mismatch");
    assert_eq!(traj.dim(), inv.dim(), "dimension mismatch");

    let base = inv.eval(traj.start().as_slice())?;
    let mut max_drift = 0.0f64;
    let mut drift_witness = None;
    for (k, p) in traj.points().iter().enumerate() {
        let drift = (inv.eval(p.as_slice())? - base).abs();
        if drift > max_drift {
            max_drift = drift;
            drift_witness = Some(k);
        }
    }

    let lie = lie_derivative_affine(f, inv);
    let grid = crate::fields::GridSpec::default();
    let mut lie_max_residual = 0.0f64;
    let mut lie_witness = None;
    for p in grid.points(f.dim()) {
        let v = lie.eval(p.as_slice())?.abs();
        if v > lie_max_residual {
            lie_max_residual = v;
            lie_witness = Some(p);
        }
    }

    Ok(ConservationReport {
        tol,
        max_drift,
        drift_witness,
        lie_derivative_zero: lie_max_residual <= LIE_CERTIFICATE_TOL,
        lie_max_residual,
        lie_witness,
    })
}
