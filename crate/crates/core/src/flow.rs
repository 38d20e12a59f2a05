//! Flow integration: exact for affine fields through the exponential of the
//! augmented generator, fixed-step RK4 for everything else, and the isometry
//! spot check.
//!
//! The flow of `ẋ = A·x + b` at time `t` is the top block of
//! `exp(t·M)·(x₀, 1)` where `M` is the `(n+1)×(n+1)` augmentation
//! `[[A, b], [0, 0]]`. No periodicity detection happens here; closing of
//! curves is asserted by scenario tests.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::expr::EvalError;
use crate::fields::{AffineField, VectorField};
use crate::linalg::expm;

/// Default step size for the numeric integrator.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Which integrator produced a [`Trajectory`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegratorTag {
    Exact,
    Rk4 { step: f64 },
}

/// Uniformly sampled flow of a field from a start point. `points[0]` is the
/// start point itself; sample `k` sits at time `times[k]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    points: Vec<DVector<f64>>,
    integrator: IntegratorTag,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn start(&self) -> &DVector<f64> {
        &self.points[0]
    }

    pub fn integrator(&self) -> IntegratorTag {
        self.integrator
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// CSV export: header `t,x1,...,xn`, one row per sample, shortest
    /// round-trip decimals.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write!(out, "t")?;
        for i in 1..=self.dim() {
            write!(out, ",x{i}")?;
        }
        writeln!(out)?;
        for (t, p) in self.times.iter().zip(&self.points) {
            write!(out, "{t}")?;
            for v in p.iter() {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Exact time-`t` flow of an affine field.
pub fn flow_affine(f: &AffineField, p0: &DVector<f64>, t: f64) -> DVector<f64> {
    let n = f.dim();
    assert_eq!(p0.len(), n, "point dimension mismatch");
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(f.linear_part());
    m.view_mut((0, n), (n, 1)).copy_from(f.constant_part());
    let e = expm(&(m * t));
    let mut augmented = DVector::zeros(n + 1);
    augmented.rows_mut(0, n).copy_from(p0);
    augmented[n] = 1.0;
    let flowed = e * augmented;
    flowed.rows(0, n).into_owned()
}

/// Classical fixed-step RK4 over `⌈|t|/step⌉` equal steps.
pub fn flow_numeric<F: VectorField>(
    f: &F,
    p0: &DVector<f64>,
    t: f64,
    step: f64,
) -> Result<DVector<f64>, EvalError> {
    assert!(step > 0.0, "step must be positive");
    assert_eq!(p0.len(), f.dim(), "point dimension mismatch");
    if t == 0.0 {
        return Ok(p0.clone());
    }
    let steps = (t.abs() / step).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut p = p0.clone();
    for _ in 0..steps {
        let k1 = f.value(&p)?;
        let k2 = f.value(&(&p + &k1 * (h / 2.0)))?;
        let k3 = f.value(&(&p + &k2 * (h / 2.0)))?;
        let k4 = f.value(&(&p + &k3 * h))?;
        p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(p)
}

/// Uniform sampling of the flow from `p0` over `[t_min, t_max]`, with the
/// exact integrator when the field is affine and RK4 at [`DEFAULT_STEP`]
/// otherwise. `p0` is the point at parameter `t_min`.
pub fn trajectory<F: VectorField>(
    f: &F,
    p0: &DVector<f64>,
    t_min: f64,
    t_max: f64,
    samples: usize,
) -> Result<Trajectory, EvalError> {
    trajectory_with_step(f, p0, t_min, t_max, samples, DEFAULT_STEP)
}

/// [`trajectory`] with an explicit step size for the numeric fallback.
pub fn trajectory_with_step<F: VectorField>(
    f: &F,
    p0: &DVector<f64>,
    t_min: f64,
    t_max: f64,
    samples: usize,
    step: f64,
) -> Result<Trajectory, EvalError> {
    assert!(samples >= 2, "need at least two samples");
    assert!(t_min <= t_max, "time window is reversed");
    let dt = (t_max - t_min) / (samples - 1) as f64;
    let times: Vec<f64> = (0..samples).map(|k| t_min + k as f64 * dt).collect();

    let (points, integrator) = if let Some(affine) = f.as_affine() {
        let points = times
            .iter()
            .map(|t| flow_affine(affine, p0, t - t_min))
            .collect();
        (points, IntegratorTag::Exact)
    } else {
        let mut points = Vec::with_capacity(samples);
        points.push(p0.clone());
        let mut current = p0.clone();
        for _ in 1..samples {
            current = flow_numeric(f, &current, dt, step)?;
            points.push(current.clone());
        }
        (points, IntegratorTag::Rk4 { step })
    };

    Ok(Trajectory {
        times,
        points,
        integrator,
    })
}

/// One failed distance comparison in an isometry spot check.
#[derive(Debug, Clone)]
pub struct IsometryFailure {
    pub pair: usize,
    pub t: f64,
    pub deviation: f64,
}

/// Result of [`isometry_spotcheck`]: for every pair `(p, q)` and time `t`,
/// the deviation `| ‖Φt(p) − Φt(q)‖ − ‖p − q‖ |`.
#[derive(Debug, Clone)]
pub struct IsometryReport {
    pub tol: f64,
    pub max_deviation: f64,
    pub failures: Vec<IsometryFailure>,
}

impl IsometryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check that the flow of `f` preserves pairwise distances at the sampled
/// times.
pub fn isometry_spotcheck(
    f: &AffineField,
    pairs: &[(DVector<f64>, DVector<f64>)],
    times: &[f64],
    tol: f64,
) -> IsometryReport {
    let mut failures = Vec::new();
    let mut max_deviation = 0.0f64;
    for (index, (p, q)) in pairs.iter().enumerate() {
        let base = (p - q).norm();
        for &t in times {
            let moved = (flow_affine(f, p, t) - flow_affine(f, q, t)).norm();
            let deviation = (moved - base).abs();
            max_deviation = max_deviation.max(deviation);
            if deviation > tol {
                failures.push(IsometryFailure {
                    pair: index,
                    t,
                    deviation,
                });
            }
        }
    }
    IsometryReport {
        tol,
        max_deviation,
        failures,
    }
}
