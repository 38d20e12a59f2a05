//! Numeric verification of the foliation-theoretic claims: transversality
//! and equidistance of orthogonal lines, the cylinder decomposition of
//! tangent Killing fields, and a named scenario suite covering the worked
//! geometric configurations end to end.
//!
//! Every scenario is deterministic (fixed seeds) and reports a list of
//! named checks with residuals and tolerances. Leaf-membership and tangency
//! are asserted through ambient constraint residuals (sphere and cylinder
//! equations); no intrinsic metrics are involved.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{
    class_deviation, classify_r3, FoliationClass, DEFAULT_CLASSIFY_SEED, DEFAULT_CLASSIFY_TOL,
};
use crate::expr::Expression;
use crate::fields::{euclidean_basis_r3, AffineField};
use crate::flow::{flow_affine, trajectory};
use crate::lie::{bracket, vectorize, FieldFamily, DEFAULT_RANK_TOL};
use crate::orbit::{conserved_check, orbit_dimension, sample_orbit, DEFAULT_T_SCALE};

/// Base seed for all deterministic sampling in scenarios and tests.
pub const GOLD_SEED: u64 = 1729;

#[derive(Debug, Clone, Error)]
pub enum VerifyError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("line is not orthogonal to the leaf at its anchor: member {member} has dot product {dot:.3e}")]
    NotOrthogonalAtAnchor { member: usize, dot: f64 },
    #[error("family has full-dimensional generic orbits, transversality does not apply")]
    FullDimensionalOrbits,
    #[error("field is not tangent to the cylinder: residual {residual:.3e} at {point:?}")]
    NotTangent { point: Vec<f64>, residual: f64 },
    #[error("field is not Killing (residual {0:.3e})")]
    NotKilling(f64),
    #[error("tangent field does not decompose with constant coefficients (spread {0:.3e})")]
    InconsistentDecomposition(f64),
}

/// One named check with its residual and tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
}

/// Fixed check list of one scenario; passing overall means every check
/// passed.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub checks: Vec<CheckResult>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "scenario {}: {}",
            self.scenario,
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:<44} residual {:>13e}  tol {:e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_residual,
                c.tolerance,
            )?;
        }
        Ok(())
    }
}

fn check(name: &str, residual: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: residual <= tolerance,
        max_residual: residual,
        tolerance,
    }
}

// ---------------------------------------------------------------------------
// fixture fields

/// The Hopf rotation on `R^4`: `-x2 ∂x1 + x1 ∂x2 - x4 ∂x3 + x3 ∂x4`, whose
/// integral curves fibre the unit 3-sphere by circles.
pub fn hopf_field() -> AffineField {
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 1)] = -1.0;
    a[(1, 0)] = 1.0;
    a[(2, 3)] = -1.0;
    a[(3, 2)] = 1.0;
    AffineField::new(a, DVector::zeros(4)).expect("square")
}

/// The commuting pair of rotation fields on `R^4` tangent to the unit
/// 3-sphere; its generic orbits are 2-tori, with two singular circles.
pub fn s3_torus_pair() -> (AffineField, AffineField) {
    let x = hopf_field();
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 2)] = 1.0;
    a[(1, 3)] = 1.0;
    a[(2, 0)] = -1.0;
    a[(3, 1)] = -1.0;
    let y = AffineField::new(a, DVector::zeros(4)).expect("square");
    (x, y)
}

/// The rotation `y ∂x - x ∂y` of `R^4`, tangent to the cylinder
/// `S^2 × R = {x² + y² + z² = 1}`.
pub fn s2xr_rotation_field() -> AffineField {
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 1)] = 1.0;
    a[(1, 0)] = -1.0;
    AffineField::new(a, DVector::zeros(4)).expect("square")
}

/// The tangent basis of the circular cylinder `x² + y² = 1` in `R^3`:
/// the rotation `-x ∂y + y ∂x` and the axial translation `∂z`.
pub fn cylinder_tangent_pair() -> (AffineField, AffineField) {
    let basis = euclidean_basis_r3();
    (basis[5].clone(), basis[2].clone())
}

/// Point of the first (`x = w, y = -z`) or second (`x = -w, y = z`)
/// singular circle of the torus pair, at angle `theta`.
pub fn torus_singular_circle_point(first: bool, theta: f64) -> DVector<f64> {
    let s = 1.0 / 2f64.sqrt();
    let (c, n) = (s * theta.cos(), s * theta.sin());
    if first {
        DVector::from_column_slice(&[c, n, -n, c])
    } else {
        DVector::from_column_slice(&[-c, n, n, c])
    }
}

/// Proper random rotation (QR of a Gaussian matrix, determinant fixed to
/// +1) and a translation with entries uniform in `[-2, 2]`.
pub fn random_rigid_motion<R: Rng>(rng: &mut R, dim: usize) -> (DMatrix<f64>, DVector<f64>) {
    let gauss = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut q = gauss.qr().q();
    if q.determinant() < 0.0 {
        for i in 0..dim {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    let t = DVector::from_fn(dim, |_, _| rng.random_range(-2.0..2.0));
    (q, t)
}

// ---------------------------------------------------------------------------
// transversality, equidistance, cylinder decomposition

/// Outcome of a transversality check: worst absolute cosine between the
/// line direction and any closure field value along the line.
#[derive(Debug, Clone)]
pub struct TransversalityReport {
    pub tol: f64,
    pub max_abs_cosine: f64,
    pub points_checked: usize,
}

impl TransversalityReport {
    pub fn passed(&self) -> bool {
        self.max_abs_cosine <= self.tol
    }
}

/// Check that the straight line `anchor + t·direction` stays orthogonal to
/// every leaf it meets. In flat space straight lines are the geodesics, so
/// this is exactly the perpendicularity persistence of a Riemannian
/// foliation. The line must be orthogonal to the leaf through its anchor,
/// and the family must not have full-dimensional generic orbits.
pub fn riemannian_transversality_check(
    family: &FieldFamily,
    anchor: &DVector<f64>,
    direction: &DVector<f64>,
    sample_ts: &[f64],
    tol: f64,
) -> Result<TransversalityReport, VerifyError> {
    let n = family.dim();
    assert_eq!(anchor.len(), n);
    assert_eq!(direction.len(), n);
    let unit = direction.normalize();

    let closure = family.closure_cached();
    let mut rng = ChaCha8Rng::seed_from_u64(GOLD_SEED + 40);
    let generic_rank = (0..64)
        .map(|_| {
            let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let p = &v * (3.0 / v.norm().max(1e-9));
            closure.evaluation_rank(&p, DEFAULT_RANK_TOL)
        })
        .max()
        .expect("nonempty batch");
    if generic_rank == n {
        return Err(VerifyError::FullDimensionalOrbits);
    }

    for (member, f) in family.members().iter().enumerate() {
        let dot = f.eval(anchor).dot(&unit);
        if dot.abs() > tol {
            return Err(VerifyError::NotOrthogonalAtAnchor { member, dot });
        }
    }

    let mut max_abs_cosine = 0.0f64;
    let mut points_checked = 0;
    for &t in sample_ts {
        let p = anchor + &unit * t;
        points_checked += 1;
        for f in closure.basis() {
            let v = f.eval(&p);
            let norm = v.norm();
            if norm > 1e-15 {
                max_abs_cosine = max_abs_cosine.max((v.dot(&unit) / norm).abs());
            }
        }
    }
    Ok(TransversalityReport {
        tol,
        max_abs_cosine,
        points_checked,
    })
}

/// Leaf-to-leaf distance along radial lines for the concentric-sphere
/// foliation, measured by bisection on the leaf invariant `‖p‖`, compared
/// against `|r1 - r2|`. Returns the worst deviation over the directions.
pub fn radial_equidistance_residual(directions: &[DVector<f64>], r1: f64, r2: f64) -> f64 {
    assert!(r1 > 0.0 && r2 > 0.0 && r1 != r2);
    let mut worst = 0.0f64;
    for d in directions {
        let u = d.normalize();
        let p1 = &u * r1;
        let leaf_gap = |t: f64| (&p1 + &u * t).norm() - r2;
        // the invariant is monotonic in t on t > -r1, so bisection applies
        let (mut lo, mut hi) = if r2 > r1 {
            (0.0, 2.0 * (r2 - r1) + 1.0)
        } else {
            (-0.999 * r1, 0.0)
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if leaf_gap(lo) * leaf_gap(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let travelled = 0.5 * (lo + hi);
        worst = worst.max((travelled.abs() - (r1 - r2).abs()).abs());
    }
    worst
}

/// Decompose a Killing field tangent to the cylinder `x² + y² = 1` as
/// `λ1·(-x ∂y + y ∂x) + λ2·∂z` with constant coefficients.
///
/// Tangency is verified at 16 sampled cylinder points; the constants are
/// read off by projection and cross-checked at every sample.
pub fn cylinder_killing_decompose(f: &AffineField, tol: f64) -> Result<(f64, f64), VerifyError> {
    assert_eq!(f.dim(), 3);
    let killing_residual = f.killing_residual();
    if killing_residual > tol {
        return Err(VerifyError::NotKilling(killing_residual));
    }

    let samples: Vec<DVector<f64>> = (0..16)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
            let z = -1.5 + 3.0 * k as f64 / 15.0;
            DVector::from_column_slice(&[theta.cos(), theta.sin(), z])
        })
        .collect();

    let mut worst_point = None;
    let mut worst_radial = 0.0f64;
    for p in &samples {
        let radial = DVector::from_column_slice(&[p[0], p[1], 0.0]);
        let residual = f.eval(p).dot(&radial).abs();
        if residual > worst_radial {
            worst_radial = residual;
            worst_point = Some(p.clone());
        }
    }
    if worst_radial > tol {
        return Err(VerifyError::NotTangent {
            point: worst_point
                .expect("worst sample recorded")
                .iter()
                .cloned()
                .collect(),
            residual: worst_radial,
        });
    }

    // at a cylinder point the frame {(y, -x, 0), e_z} is orthonormal
    let coefficients: Vec<(f64, f64)> = samples
        .iter()
        .map(|p| {
            let v = f.eval(p);
            let tangent = DVector::from_column_slice(&[p[1], -p[0], 0.0]);
            (v.dot(&tangent), v[2])
        })
        .collect();
    let (l1, l2) = coefficients[0];
    let spread = coefficients
        .iter()
        .map(|(a, b)| (a - l1).abs().max((b - l2).abs()))
        .fold(0.0f64, f64::max);
    if spread > tol {
        return Err(VerifyError::InconsistentDecomposition(spread));
    }
    Ok((l1, l2))
}

// ---------------------------------------------------------------------------
// scenario suite

/// Names of the registered scenarios, in execution order of `verify all`.
pub const SCENARIO_NAMES: [&str; 6] = [
    "example1_basis",
    "hopf_circle",
    "s3_torus",
    "cylinder_helix",
    "s2xr_nongeodesic",
    "r3_classification",
];

/// Run one registered scenario by name.
pub fn scenario_run(name: &str) -> Result<ScenarioReport, VerifyError> {
    match name {
        "example1_basis" => Ok(example1_basis()),
        "hopf_circle" => Ok(hopf_circle()),
        "s3_torus" => Ok(s3_torus()),
        "cylinder_helix" => Ok(cylinder_helix()),
        "s2xr_nongeodesic" => Ok(s2xr_nongeodesic()),
        "r3_classification" => Ok(r3_classification()),
        other => Err(VerifyError::UnknownScenario(other.to_string())),
    }
}

/// Run every registered scenario.
pub fn run_all() -> Vec<ScenarioReport> {
    SCENARIO_NAMES
        .iter()
        .map(|name| scenario_run(name).expect("registered name"))
        .collect()
}

fn example1_basis() -> ScenarioReport {
    let basis = euclidean_basis_r3();
    let mut checks = Vec::new();
    for (k, f) in basis.iter().enumerate() {
        checks.push(check(
            &format!("killing_x{}", k + 1),
            f.killing_residual(),
            0.0,
        ));
    }
    let family = FieldFamily::new(basis).expect("basis fields are Killing");
    let closure = family.closure_cached();
    checks.push(check(
        "closure_dimension_six",
        (closure.len() as f64 - 6.0).abs(),
        0.0,
    ));
    let mut span_residual = 0.0f64;
    for i in 0..closure.len() {
        for j in (i + 1)..closure.len() {
            let br = bracket(&closure.basis()[i], &closure.basis()[j]);
            span_residual = span_residual.max(closure.span_residual(&br));
        }
    }
    checks.push(check("pairwise_brackets_in_span", span_residual, 1e-9));
    ScenarioReport {
        scenario: "example1_basis".into(),
        checks,
    }
}

fn hopf_circle() -> ScenarioReport {
    let field = hopf_field();
    let p0 = DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
    let tau = 2.0 * std::f64::consts::PI;
    let traj = trajectory(&field, &p0, 0.0, tau, 629).expect("affine flow");
    let sphere_residual = traj
        .points()
        .iter()
        .map(|p| (p.norm_squared() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let closure_gap = (flow_affine(&field, &p0, tau) - &p0).norm();
    ScenarioReport {
        scenario: "hopf_circle".into(),
        checks: vec![
            check("trajectory_stays_on_s3", sphere_residual, 1e-10),
            check("closes_after_full_turn", closure_gap, 1e-10),
        ],
    }
}

/// Unit-sphere points in `R^4` staying clear of both singular circles.
fn sample_s3_points_off_circles(count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm < 1e-9 {
            continue;
        }
        let p = v / norm;
        let near_first = (p[0] - p[3]).abs().max((p[1] + p[2]).abs());
        let near_second = (p[0] + p[3]).abs().max((p[1] - p[2]).abs());
        if near_first.min(near_second) > 1e-2 {
            out.push(p);
        }
    }
    out
}

fn s3_torus() -> ScenarioReport {
    let (x, y) = s3_torus_pair();
    let family = FieldFamily::new(vec![x.clone(), y.clone()]).expect("Killing pair");
    let mut checks = Vec::new();

    checks.push(check(
        "bracket_commutes",
        vectorize(&bracket(&x, &y)).amax(),
        0.0,
    ));

    let generic = sample_s3_points_off_circles(1000, GOLD_SEED + 10);
    let bad_generic = generic
        .iter()
        .filter(|p| orbit_dimension(&family, p, DEFAULT_RANK_TOL) != 2)
        .count();
    checks.push(check("generic_rank_two_on_s3", bad_generic as f64, 0.0));

    let mut bad_singular = 0usize;
    for first in [true, false] {
        for k in 0..100 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 100.0;
            let p = torus_singular_circle_point(first, theta);
            if orbit_dimension(&family, &p, DEFAULT_RANK_TOL) != 1 {
                bad_singular += 1;
            }
        }
    }
    checks.push(check(
        "rank_one_on_singular_circles",
        bad_singular as f64,
        0.0,
    ));

    let p0 = DVector::from_column_slice(&[0.6, 0.0, 0.8, 0.0]);
    let norm2 = Expression::parse("x^2 + y^2 + z^2 + w^2", 4).expect("fixed expression");
    let separating = Expression::parse("y*z - x*w", 4).expect("fixed expression");
    let traj_x = trajectory(&x, &p0, 0.0, 9.0, 600).expect("affine flow");
    let traj_y = trajectory(&y, &p0, 0.0, 9.0, 600).expect("affine flow");

    let mut flow_drift = 0.0f64;
    let mut lie_residual = 0.0f64;
    for inv in [&norm2, &separating] {
        for (f, traj) in [(&x, &traj_x), (&y, &traj_y)] {
            let report = conserved_check(f, inv, traj, 1e-9).expect("polynomial invariant");
            flow_drift = flow_drift.max(report.max_drift);
            lie_residual = lie_residual.max(report.lie_max_residual);
        }
    }
    checks.push(check("invariants_conserved_along_flows", flow_drift, 1e-9));
    checks.push(check("lie_derivative_certificates", lie_residual, 1e-9));

    let mut cloud = sample_orbit(&family, &p0, 500, DEFAULT_T_SCALE, GOLD_SEED + 11);
    cloud
        .attach_invariant("norm2", &norm2)
        .expect("polynomial invariant");
    cloud
        .attach_invariant("yz_xw", &separating)
        .expect("polynomial invariant");
    let cloud_drift = cloud.invariant_drift(0).max(cloud.invariant_drift(1));
    checks.push(check("invariants_constant_across_cloud", cloud_drift, 1e-9));

    let mut plane_residual = 0.0f64;
    for first in [true, false] {
        for k in 0..20 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 20.0;
            let p = torus_singular_circle_point(first, theta);
            for f in [&x, &y] {
                for t in [0.4, 1.3, 2.9] {
                    let q = flow_affine(f, &p, t);
                    let residual = if first {
                        (q[0] - q[3]).abs().max((q[1] + q[2]).abs())
                    } else {
                        (q[0] + q[3]).abs().max((q[1] - q[2]).abs())
                    };
                    plane_residual = plane_residual.max(residual);
                }
            }
        }
    }
    checks.push(check(
        "singular_circles_flow_invariant",
        plane_residual,
        1e-9,
    ));

    ScenarioReport {
        scenario: "s3_torus".into(),
        checks,
    }
}

fn cylinder_helix() -> ScenarioReport {
    let (rotation, axial) = cylinder_tangent_pair();
    let p0 = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
    let tau = 2.0 * std::f64::consts::PI;
    let mut checks = Vec::new();

    let closed_form = |l1: f64, l2: f64, t: f64| {
        DVector::from_column_slice(&[(l1 * t).cos(), -(l1 * t).sin(), l2 * t])
    };

    for (l1, l2) in [(1.0, 0.0), (0.0, 1.0), (2.0, 3.0)] {
        let field = &rotation.scale(l1) + &axial.scale(l2);
        let mut worst = 0.0f64;
        let mut ts: Vec<f64> = (0..=40).map(|k| tau * k as f64 / 40.0).collect();
        ts.extend([0.1, 1.0, std::f64::consts::PI]);
        for t in ts {
            let gap = (flow_affine(&field, &p0, t) - closed_form(l1, l2, t)).amax();
            worst = worst.max(gap);
        }
        checks.push(check(
            &format!("flow_matches_closed_form_{l1}_{l2}"),
            worst,
            1e-11,
        ));
    }

    // the helix is a geodesic of the flat cylinder: constant speed and
    // constant unrolled rates (angle and height per unit time)
    let screw = &rotation.scale(2.0) + &axial.scale(3.0);
    let traj = trajectory(&screw, &p0, 0.0, tau, 400).expect("affine flow");
    let speed0 = screw.eval(&p0).norm();
    let speed_residual = traj
        .points()
        .iter()
        .map(|p| (screw.eval(p).norm() - speed0).abs())
        .fold(0.0f64, f64::max);
    checks.push(check("speed_constant_along_helix", speed_residual, 1e-10));

    let mut angles: Vec<f64> = traj.points().iter().map(|p| p[1].atan2(p[0])).collect();
    for k in 1..angles.len() {
        while angles[k] - angles[k - 1] > std::f64::consts::PI {
            angles[k] -= tau;
        }
        while angles[k] - angles[k - 1] < -std::f64::consts::PI {
            angles[k] += tau;
        }
    }
    let dt_angle = angles[1] - angles[0];
    let dt_height = traj.points()[1][2] - traj.points()[0][2];
    let mut rate_residual = 0.0f64;
    for k in 1..angles.len() {
        rate_residual = rate_residual.max((angles[k] - angles[k - 1] - dt_angle).abs());
        rate_residual =
            rate_residual.max((traj.points()[k][2] - traj.points()[k - 1][2] - dt_height).abs());
    }
    checks.push(check("unrolled_rates_constant", rate_residual, 1e-10));

    // degenerate cases: pure rotation closes into a circle at fixed height,
    // pure translation runs along a straight vertical line
    let circle = trajectory(&rotation, &p0, 0.0, tau, 200).expect("affine flow");
    let height_residual = circle
        .points()
        .iter()
        .map(|p| p[2].abs())
        .fold(0.0f64, f64::max);
    let closure_gap = (flow_affine(&rotation, &p0, tau) - &p0).norm();
    checks.push(check(
        "pure_rotation_gives_circle",
        height_residual.max(closure_gap),
        1e-10,
    ));

    let line = trajectory(&axial, &p0, 0.0, 3.0, 50).expect("affine flow");
    let lateral_residual = line
        .points()
        .iter()
        .map(|p| (p[0] - 1.0).abs().max(p[1].abs()))
        .fold(0.0f64, f64::max);
    checks.push(check(
        "pure_translation_gives_line",
        lateral_residual,
        1e-12,
    ));

    ScenarioReport {
        scenario: "cylinder_helix".into(),
        checks,
    }
}

fn s2xr_nongeodesic() -> ScenarioReport {
    let field = s2xr_rotation_field();
    let p0 = DVector::from_column_slice(&[0.6, 0.0, 0.8, 0.0]);
    let tau = 2.0 * std::f64::consts::PI;
    let traj = trajectory(&field, &p0, 0.0, tau, 300).expect("affine flow");

    let mut manifold_residual = 0.0f64;
    let mut radius_residual = 0.0f64;
    let mut frozen_residual = 0.0f64;
    let mut min_gap_to_great_circle = f64::INFINITY;
    for p in traj.points() {
        manifold_residual =
            manifold_residual.max((p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0).abs());
        let radius = (p[0] * p[0] + p[1] * p[1]).sqrt();
        radius_residual = radius_residual.max((radius - 0.6).abs());
        min_gap_to_great_circle = min_gap_to_great_circle.min((1.0 - radius).abs());
        frozen_residual = frozen_residual.max((p[2] - 0.8).abs().max(p[3].abs()));
    }
    let closure_gap = (flow_affine(&field, &p0, tau) - &p0).norm();

    ScenarioReport {
        scenario: "s2xr_nongeodesic".into(),
        checks: vec![
            check("orbit_stays_on_s2xr", manifold_residual, 1e-10),
            check("latitude_radius_is_0.6", radius_residual, 1e-10),
            check("z_and_w_frozen", frozen_residual, 1e-12),
            check("closes_after_full_turn", closure_gap, 1e-10),
            // a great circle would have radius 1; the gap certifies the
            // orbit is a circle of latitude, hence not a geodesic
            check(
                "radius_gap_from_great_circle",
                (0.3 - min_gap_to_great_circle).max(0.0),
                0.0,
            ),
        ],
    }
}

fn r3_classification() -> ScenarioReport {
    let basis = euclidean_basis_r3();
    let family = |indices: &[usize]| {
        FieldFamily::new(indices.iter().map(|&k| basis[k].clone()).collect())
            .expect("basis fields are Killing")
    };
    let screw = FieldFamily::new(vec![&basis[5] + &basis[2].scale(2.0)]).expect("Killing screw");

    let expectations: Vec<(&str, FieldFamily, FoliationClass)> = vec![
        (
            "translation",
            family(&[2]),
            FoliationClass::ParallelLines {
                direction: [0.0, 0.0, 1.0],
            },
        ),
        (
            "rotation",
            family(&[5]),
            FoliationClass::ConcentricCircles {
                axis_point: [0.0, 0.0, 0.0],
                axis_dir: [0.0, 0.0, 1.0],
            },
        ),
        (
            "screw",
            screw,
            FoliationClass::Helices {
                axis_point: [0.0, 0.0, 0.0],
                axis_dir: [0.0, 0.0, 1.0],
                pitch: 2.0,
            },
        ),
        (
            "planar_translations",
            family(&[0, 1]),
            FoliationClass::ParallelPlanes {
                normal: [0.0, 0.0, 1.0],
            },
        ),
        (
            "rotations_about_point",
            family(&[3, 4, 5]),
            FoliationClass::ConcentricSpheres {
                center: [0.0, 0.0, 0.0],
            },
        ),
        (
            "rotation_with_axial_translation",
            family(&[5, 2]),
            FoliationClass::ConcentricCylinders {
                axis_point: [0.0, 0.0, 0.0],
                axis_dir: [0.0, 0.0, 1.0],
            },
        ),
        (
            "full_isometry_basis",
            family(&[0, 1, 2, 3, 4, 5]),
            FoliationClass::WholeSpace,
        ),
    ];

    let mut checks = Vec::new();
    for (name, fam, expected) in expectations {
        match classify_r3(&fam, DEFAULT_CLASSIFY_TOL, DEFAULT_CLASSIFY_SEED) {
            Ok(result) => match class_deviation(&expected, &result) {
                Some(deviation) => {
                    checks.push(check(&format!("{name}_classified"), deviation, 1e-9));
                }
                None => checks.push(check(&format!("{name}_classified"), 1.0, 0.0)),
            },
            Err(_) => checks.push(check(&format!("{name}_classified"), 1.0, 0.0)),
        }
    }
    ScenarioReport {
        scenario: "r3_classification".into(),
        checks,
    }
}
