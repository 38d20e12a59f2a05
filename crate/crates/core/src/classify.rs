//! The seven-type classifier: given a family of Killing fields on `R^3`,
//! decide which foliation its orbits generate and extract the geometric
//! parameters.
//!
//! The decision table keys on four computable features of the bracket
//! closure: the generic evaluation rank (sampled at 64 seeded random
//! points), the kind of the common fixed set, the rank-1 locus, and whether
//! any linear part is nonzero. Every distinguishing feature reduces to
//! linear algebra:
//!
//! | rank | fixed set | extra                    | class                |
//! |------|-----------|--------------------------|----------------------|
//! | 3    | —         |                          | WholeSpace           |
//! | 2    | point     |                          | ConcentricSpheres    |
//! | 2    | empty     | rank-1 locus is a line   | ConcentricCylinders  |
//! | 2    | empty     | no rank-1 locus          | ParallelPlanes       |
//! | 1    | line      |                          | ConcentricCircles    |
//! | 1    | empty     | all linear parts zero    | ParallelLines        |
//! | 1    | empty     | some linear part nonzero | Helices              |
//!
//! Any other combination signals a bug or a tolerance failure and is
//! reported as [`ClassifyError::Unclassifiable`], never silently guessed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::AffineField;
use crate::lie::{FieldFamily, LieAlgebraBasis};
use crate::linalg::{canonical_sign, least_squares, nullspace, numerical_rank};

/// Default tolerance for rank decisions and residual thresholds.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Default seed for the generic-rank sampling.
pub const DEFAULT_CLASSIFY_SEED: u64 = 7;

#[derive(Debug, Clone, Error)]
pub enum ClassifyError {
    #[error("all family members are identically zero")]
    DegenerateFamily,
    #[error("classification is specific to R^3, family lives in R^{0}")]
    NotThreeDimensional(usize),
    #[error("configuration outside the decision table: {0}")]
    Unclassifiable(String),
}

/// Kind of an affine subspace of `R^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceKind {
    Empty,
    Point,
    Line,
    Plane,
    WholeSpace,
}

/// Solution set of the common-zero system of a field family: the fixed set
/// of all generated isometries.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    pub kind: SubspaceKind,
    /// Point of the subspace closest to the origin; `None` when empty.
    pub anchor: Option<DVector<f64>>,
    /// Orthonormal direction basis (0 for a point, 1 for a line, 2 for a
    /// plane, 3 for the whole space), signs canonicalized.
    pub directions: Vec<DVector<f64>>,
}

/// Common zero set of the basis fields, classified by rank and residual of
/// the stacked linear system `A_k·p = -b_k`.
pub fn fixed_set(basis: &LieAlgebraBasis, tol: f64) -> AffineSubspace {
    let n = basis.dim();
    assert_eq!(n, 3, "fixed-set classification is specific to R^3");
    let m = basis.len();
    let mut stacked = DMatrix::zeros(m * n, n);
    let mut rhs = DVector::zeros(m * n);
    let mut coeff_scale = 0.0f64;
    for (k, f) in basis.basis().iter().enumerate() {
        stacked
            .view_mut((k * n, 0), (n, n))
            .copy_from(f.linear_part());
        rhs.rows_mut(k * n, n).copy_from(&(-f.constant_part()));
        coeff_scale = coeff_scale
            .max(f.linear_part().amax())
            .max(f.constant_part().amax());
    }
    let (anchor, residual) = least_squares(&stacked, &rhs, tol);
    if residual > tol * (1.0 + coeff_scale) {
        return AffineSubspace {
            kind: SubspaceKind::Empty,
            anchor: None,
            directions: Vec::new(),
        };
    }
    let rank = numerical_rank(&stacked, tol);
    let directions: Vec<DVector<f64>> = nullspace(&stacked, tol)
        .into_iter()
        .map(canonical_sign)
        .collect();
    let kind = match n - rank {
        0 => SubspaceKind::Point,
        1 => SubspaceKind::Line,
        2 => SubspaceKind::Plane,
        _ => SubspaceKind::WholeSpace,
    };
    AffineSubspace {
        kind,
        anchor: Some(anchor),
        directions,
    }
}

/// One of the seven orbit-foliation types of a Killing family on `R^3`,
/// with its geometric parameters. Directions and normals are unit vectors
/// with the first significant coordinate positive; axis points are the
/// points of the axis closest to the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FoliationClass {
    ParallelLines {
        direction: [f64; 3],
    },
    ConcentricCircles {
        axis_point: [f64; 3],
        axis_dir: [f64; 3],
    },
    Helices {
        axis_point: [f64; 3],
        axis_dir: [f64; 3],
        /// Axial advance per radian for the generator normalized to unit
        /// angular speed; the sign follows the axis-direction convention.
        pitch: f64,
    },
    ParallelPlanes {
        normal: [f64; 3],
    },
    ConcentricSpheres {
        center: [f64; 3],
    },
    ConcentricCylinders {
        axis_point: [f64; 3],
        axis_dir: [f64; 3],
    },
    WholeSpace,
}

impl FoliationClass {
    pub fn tag(&self) -> &'static str {
        match self {
            FoliationClass::ParallelLines { .. } => "ParallelLines",
            FoliationClass::ConcentricCircles { .. } => "ConcentricCircles",
            FoliationClass::Helices { .. } => "Helices",
            FoliationClass::ParallelPlanes { .. } => "ParallelPlanes",
            FoliationClass::ConcentricSpheres { .. } => "ConcentricSpheres",
            FoliationClass::ConcentricCylinders { .. } => "ConcentricCylinders",
            FoliationClass::WholeSpace => "WholeSpace",
        }
    }
}

fn to_array(v: &DVector<f64>) -> [f64; 3] {
    // adding 0.0 turns negative zeros from SVD output into plain zeros
    [v[0] + 0.0, v[1] + 0.0, v[2] + 0.0]
}

/// 64 sample points: standard normal directions scaled to radius 3. All of
/// them land on a proper algebraic subvariety with probability zero, so the
/// maximum evaluation rank over the batch is the generic rank.
fn sample_points(seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..64)
        .map(|_| loop {
            let v = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
            let norm = v.norm();
            if norm > 1e-9 {
                return v * (3.0 / norm);
            }
        })
        .collect()
}

/// Stack the skew parts and extract their unique common kernel direction.
fn common_axis(skews: &[&AffineField], tol: f64) -> Result<DVector<f64>, ClassifyError> {
    let mut stacked = DMatrix::zeros(3 * skews.len(), 3);
    for (k, f) in skews.iter().enumerate() {
        stacked
            .view_mut((3 * k, 0), (3, 3))
            .copy_from(f.linear_part());
    }
    let kernel = nullspace(&stacked, tol);
    if kernel.len() != 1 {
        return Err(ClassifyError::Unclassifiable(format!(
            "rotation parts share a {}-dimensional kernel, expected a unique axis",
            kernel.len()
        )));
    }
    Ok(canonical_sign(kernel.into_iter().next().unwrap()))
}

/// Solve `P⊥·(A_k·p + b_k) = 0` for all basis members, `P⊥` projecting
/// orthogonal to the axis `u`. Rank-1 points must have all field values
/// parallel to `u`, so a consistent solution is the rank-1 locus (a line
/// with direction `u`); an inconsistent system means no such locus.
fn rank1_locus(
    basis: &LieAlgebraBasis,
    u: &DVector<f64>,
    tol: f64,
) -> Result<Option<DVector<f64>>, ClassifyError> {
    let projector = DMatrix::<f64>::identity(3, 3) - u * u.transpose();
    let m = basis.len();
    let mut stacked = DMatrix::zeros(3 * m, 3);
    let mut rhs = DVector::zeros(3 * m);
    for (k, f) in basis.basis().iter().enumerate() {
        stacked
            .view_mut((3 * k, 0), (3, 3))
            .copy_from(&(&projector * f.linear_part()));
        rhs.rows_mut(3 * k, 3)
            .copy_from(&(-(&projector * f.constant_part())));
    }
    let coeff_scale = stacked.amax().max(rhs.amax());
    let (anchor, residual) = least_squares(&stacked, &rhs, tol);
    if residual > tol * (1.0 + coeff_scale) {
        return Ok(None);
    }
    // u lies in the kernel of every projected block, so a consistent system
    // of rank 2 has exactly the line anchor + span(u) as solution set.
    if numerical_rank(&stacked, tol) != 2 {
        return Err(ClassifyError::Unclassifiable(
            "rank-1 locus is not a line".into(),
        ));
    }
    Ok(Some(anchor))
}

/// Unit normal of the common evaluation span: the one-dimensional orthogonal
/// complement of all field values at the sample points.
fn evaluation_span_normal(
    basis: &LieAlgebraBasis,
    samples: &[DVector<f64>],
    tol: f64,
) -> Result<DVector<f64>, ClassifyError> {
    let mut stacked = DMatrix::zeros(samples.len() * basis.len(), 3);
    let mut row = 0;
    for p in samples {
        for f in basis.basis() {
            stacked.row_mut(row).copy_from(&f.eval(p).transpose());
            row += 1;
        }
    }
    let kernel = nullspace(&stacked, tol);
    if kernel.len() != 1 {
        return Err(ClassifyError::Unclassifiable(format!(
            "evaluation span has a {}-dimensional complement, expected a plane normal",
            kernel.len()
        )));
    }
    Ok(canonical_sign(kernel.into_iter().next().unwrap()))
}

/// Common direction of a family of translation fields.
fn translation_direction(
    basis: &LieAlgebraBasis,
    tol: f64,
    scale: f64,
) -> Result<DVector<f64>, ClassifyError> {
    let longest = basis
        .basis()
        .iter()
        .max_by(|a, b| {
            a.constant_part()
                .norm()
                .total_cmp(&b.constant_part().norm())
        })
        .expect("nonempty basis");
    let direction = longest.constant_part().normalize();
    for f in basis.basis() {
        let b = f.constant_part();
        let off_axis = (b - &direction * direction.dot(b)).norm();
        if off_axis > tol * (1.0 + scale) {
            return Err(ClassifyError::Unclassifiable(
                "translation directions are not collinear".into(),
            ));
        }
    }
    Ok(canonical_sign(direction))
}

/// Decide the foliation type of the orbits of `family`.
///
/// `seed` drives the generic-rank sampling; identical seeds give identical
/// results.
pub fn classify_r3(
    family: &FieldFamily,
    tol: f64,
    seed: u64,
) -> Result<FoliationClass, ClassifyError> {
    if family.dim() != 3 {
        return Err(ClassifyError::NotThreeDimensional(family.dim()));
    }
    let scale = family
        .members()
        .iter()
        .map(|f| f.linear_part().amax().max(f.constant_part().amax()))
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(ClassifyError::DegenerateFamily);
    }

    let closure = family.closure(tol);
    let fix = fixed_set(&closure, tol);
    let samples = sample_points(seed);
    let generic_rank = samples
        .iter()
        .map(|p| closure.evaluation_rank(p, tol))
        .max()
        .expect("sample batch is nonempty");

    let closure_scale = closure
        .basis()
        .iter()
        .map(|f| f.linear_part().amax().max(f.constant_part().amax()))
        .fold(0.0f64, f64::max);
    let skews: Vec<&AffineField> = closure
        .basis()
        .iter()
        .filter(|f| f.linear_part().amax() > tol * (1.0 + closure_scale))
        .collect();

    match (generic_rank, fix.kind) {
        (3, _) => Ok(FoliationClass::WholeSpace),
        (2, SubspaceKind::Point) => Ok(FoliationClass::ConcentricSpheres {
            center: to_array(fix.anchor.as_ref().expect("nonempty fixed set")),
        }),
        (2, SubspaceKind::Empty) => {
            if skews.is_empty() {
                return Ok(FoliationClass::ParallelPlanes {
                    normal: to_array(&evaluation_span_normal(&closure, &samples, tol)?),
                });
            }
            let axis = common_axis(&skews, tol)?;
            match rank1_locus(&closure, &axis, tol)? {
                Some(anchor) => Ok(FoliationClass::ConcentricCylinders {
                    axis_point: to_array(&anchor),
                    axis_dir: to_array(&axis),
                }),
                None => Ok(FoliationClass::ParallelPlanes {
                    normal: to_array(&evaluation_span_normal(&closure, &samples, tol)?),
                }),
            }
        }
        (1, SubspaceKind::Line) => Ok(FoliationClass::ConcentricCircles {
            axis_point: to_array(fix.anchor.as_ref().expect("nonempty fixed set")),
            axis_dir: to_array(&fix.directions[0]),
        }),
        (1, SubspaceKind::Empty) => {
            if skews.is_empty() {
                return Ok(FoliationClass::ParallelLines {
                    direction: to_array(&translation_direction(&closure, tol, closure_scale)?),
                });
            }
            let axis = common_axis(&skews, tol)?;
            let anchor = rank1_locus(&closure, &axis, tol)?.ok_or_else(|| {
                ClassifyError::Unclassifiable("helical family has no axis line".into())
            })?;
            let generator = skews
                .iter()
                .max_by(|a, b| a.linear_part().norm().total_cmp(&b.linear_part().norm()))
                .expect("nonempty skew set");
            let angular_rate = generator.linear_part().norm() / 2f64.sqrt();
            let pitch = axis.dot(generator.constant_part()) / angular_rate;
            Ok(FoliationClass::Helices {
                axis_point: to_array(&anchor),
                axis_dir: to_array(&axis),
                pitch,
            })
        }
        (rank, kind) => Err(ClassifyError::Unclassifiable(format!(
            "generic rank {rank} with fixed set {kind:?}"
        ))),
    }
}

/// Image of a classification under the rigid motion `p ↦ R·p + t`:
/// centers move with the motion, directions rotate (then re-canonicalize),
/// axis points re-anchor to the closest point to the origin, and the pitch
/// picks up the sign of the direction canonicalization.
pub fn motion_image(class: &FoliationClass, r: &DMatrix<f64>, t: &DVector<f64>) -> FoliationClass {
    let rotate = |d: &[f64; 3]| r * DVector::from_column_slice(d);
    let move_point = |p: &[f64; 3]| r * DVector::from_column_slice(p) + t;
    let anchor_on = |p: DVector<f64>, u: &DVector<f64>| -> DVector<f64> {
        let shift = u * p.dot(u);
        p - shift
    };
    match class {
        FoliationClass::ParallelLines { direction } => FoliationClass::ParallelLines {
            direction: to_array(&canonical_sign(rotate(direction))),
        },
        FoliationClass::ConcentricCircles {
            axis_point,
            axis_dir,
        } => {
            let dir = canonical_sign(rotate(axis_dir));
            FoliationClass::ConcentricCircles {
                axis_point: to_array(&anchor_on(move_point(axis_point), &dir)),
                axis_dir: to_array(&dir),
            }
        }
        FoliationClass::Helices {
            axis_point,
            axis_dir,
            pitch,
        } => {
            let raw = rotate(axis_dir);
            let dir = canonical_sign(raw.clone());
            let sign = if dir.dot(&raw) < 0.0 { -1.0 } else { 1.0 };
            FoliationClass::Helices {
                axis_point: to_array(&anchor_on(move_point(axis_point), &dir)),
                axis_dir: to_array(&dir),
                pitch: sign * pitch,
            }
        }
        FoliationClass::ParallelPlanes { normal } => FoliationClass::ParallelPlanes {
            normal: to_array(&canonical_sign(rotate(normal))),
        },
        FoliationClass::ConcentricSpheres { center } => FoliationClass::ConcentricSpheres {
            center: to_array(&move_point(center)),
        },
        FoliationClass::ConcentricCylinders {
            axis_point,
            axis_dir,
        } => {
            let dir = canonical_sign(rotate(axis_dir));
            FoliationClass::ConcentricCylinders {
                axis_point: to_array(&anchor_on(move_point(axis_point), &dir)),
                axis_dir: to_array(&dir),
            }
        }
        FoliationClass::WholeSpace => FoliationClass::WholeSpace,
    }
}

/// Largest parameter deviation between two classifications of the same tag,
/// or `None` when the tags differ.
pub fn class_deviation(a: &FoliationClass, b: &FoliationClass) -> Option<f64> {
    let vec_dev = |x: &[f64; 3], y: &[f64; 3]| {
        x.iter()
            .zip(y)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0f64, f64::max)
    };
    match (a, b) {
        (
            FoliationClass::ParallelLines { direction: da },
            FoliationClass::ParallelLines { direction: db },
        ) => Some(vec_dev(da, db)),
        (
            FoliationClass::ConcentricCircles {
                axis_point: pa,
                axis_dir: da,
            },
            FoliationClass::ConcentricCircles {
                axis_point: pb,
                axis_dir: db,
            },
        )
        | (
            FoliationClass::ConcentricCylinders {
                axis_point: pa,
                axis_dir: da,
            },
            FoliationClass::ConcentricCylinders {
                axis_point: pb,
                axis_dir: db,
            },
        ) => Some(vec_dev(pa, pb).max(vec_dev(da, db))),
        (
            FoliationClass::Helices {
                axis_point: pa,
                axis_dir: da,
                pitch: ka,
            },
            FoliationClass::Helices {
                axis_point: pb,
                axis_dir: db,
                pitch: kb,
            },
        ) => Some(vec_dev(pa, pb).max(vec_dev(da, db)).max((ka - kb).abs())),
        (
            FoliationClass::ParallelPlanes { normal: na },
            FoliationClass::ParallelPlanes { normal: nb },
        ) => Some(vec_dev(na, nb)),
        (
            FoliationClass::ConcentricSpheres { center: ca },
            FoliationClass::ConcentricSpheres { center: cb },
        ) => Some(vec_dev(ca, cb)),
        (FoliationClass::WholeSpace, FoliationClass::WholeSpace) => Some(0.0),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::euclidean_basis_r3;
    use crate::lie::DEFAULT_RANK_TOL;
    use crate::orbit::{dimension_stratification, BoxSpec};

    fn family(indices: &[usize]) -> FieldFamily {
        let basis = euclidean_basis_r3();
        FieldFamily::new(indices.iter().map(|&k| basis[k].clone()).collect()).unwrap()
    }

    fn classify(family: &FieldFamily) -> FoliationClass {
        classify_r3(family, DEFAULT_CLASSIFY_TOL, DEFAULT_CLASSIFY_SEED).unwrap()
    }

    fn screw_family() -> FieldFamily {
        let basis = euclidean_basis_r3();
        FieldFamily::new(vec![&basis[5] + &basis[2].scale(2.0)]).unwrap()
    }

    #[test]
    fn fixed_sets_of_standard_families() {
        let so3 = family(&[3, 4, 5]);
        let fix = fixed_set(so3.closure_cached(), DEFAULT_RANK_TOL);
        assert_eq!(fix.kind, SubspaceKind::Point);
        assert!(fix.anchor.unwrap().norm() < 1e-12);

        let rot_z = family(&[5]);
        let fix = fixed_set(rot_z.closure_cached(), DEFAULT_RANK_TOL);
        assert_eq!(fix.kind, SubspaceKind::Line);
        assert!(fix.anchor.unwrap().norm() < 1e-12);
        assert!((fix.directions[0][2] - 1.0).abs() < 1e-12);

        let trans_z = family(&[2]);
        let fix = fixed_set(trans_z.closure_cached(), DEFAULT_RANK_TOL);
        assert_eq!(fix.kind, SubspaceKind::Empty);
        assert!(fix.anchor.is_none());
    }

    #[test]
    fn fixed_set_off_origin_line() {
        // rotation about the line {x = 1, y = 2}: conjugate X6 by a shift
        let basis = euclidean_basis_r3();
        let r = DMatrix::<f64>::identity(3, 3);
        let t = DVector::from_column_slice(&[1.0, 2.0, 0.0]);
        let shifted = basis[5].conjugate(&r, &t).unwrap();
        let fam = FieldFamily::new(vec![shifted]).unwrap();
        let fix = fixed_set(fam.closure_cached(), DEFAULT_RANK_TOL);
        assert_eq!(fix.kind, SubspaceKind::Line);
        let anchor = fix.anchor.unwrap();
        assert!((anchor - DVector::from_column_slice(&[1.0, 2.0, 0.0])).amax() < 1e-12);
    }

    #[test]
    fn seven_family_table() {
        assert_eq!(
            classify(&family(&[2])),
            FoliationClass::ParallelLines {
                direction: [0.0, 0.0, 1.0]
            }
        );

        match classify(&family(&[5])) {
            FoliationClass::ConcentricCircles {
                axis_point,
                axis_dir,
            } => {
                assert!(axis_point.iter().all(|v| v.abs() < 1e-12));
                assert!((axis_dir[2] - 1.0).abs() < 1e-12);
            }
            other => panic!("expected circles, got {other:?}"),
        }

        match classify(&screw_family()) {
            FoliationClass::Helices {
                axis_point,
                axis_dir,
                pitch,
            } => {
                assert!(axis_point.iter().all(|v| v.abs() < 1e-12));
                assert!((axis_dir[2] - 1.0).abs() < 1e-12);
                assert!((pitch - 2.0).abs() < 1e-9);
            }
            other => panic!("expected helices, got {other:?}"),
        }

        assert_eq!(
            classify(&family(&[0, 1])),
            FoliationClass::ParallelPlanes {
                normal: [0.0, 0.0, 1.0]
            }
        );

        assert_eq!(
            classify(&family(&[3, 4, 5])),
            FoliationClass::ConcentricSpheres {
                center: [0.0, 0.0, 0.0]
            }
        );

        match classify(&family(&[5, 2])) {
            FoliationClass::ConcentricCylinders {
                axis_point,
                axis_dir,
            } => {
                assert!(axis_point.iter().all(|v| v.abs() < 1e-12));
                assert!((axis_dir[2] - 1.0).abs() < 1e-12);
            }
            other => panic!("expected cylinders, got {other:?}"),
        }

        assert_eq!(
            classify(&family(&[0, 1, 2, 3, 4, 5])),
            FoliationClass::WholeSpace
        );
    }

    #[test]
    fn planes_with_in_plane_rotation_still_classify_as_planes() {
        // translations in the xy-plane plus the rotation about z: every orbit
        // is a horizontal plane even though a rotation is present
        assert_eq!(
            classify(&family(&[0, 1, 5])),
            FoliationClass::ParallelPlanes {
                normal: [0.0, 0.0, 1.0]
            }
        );
    }

    #[test]
    fn degenerate_and_dimension_errors() {
        let zero = FieldFamily::new(vec![AffineField::zero(3)]).unwrap();
        assert!(matches!(
            classify_r3(&zero, DEFAULT_CLASSIFY_TOL, DEFAULT_CLASSIFY_SEED),
            Err(ClassifyError::DegenerateFamily)
        ));

        let (x, _) = crate::verify::s3_torus_pair();
        let r4 = FieldFamily::new(vec![x]).unwrap();
        assert!(matches!(
            classify_r3(&r4, DEFAULT_CLASSIFY_TOL, DEFAULT_CLASSIFY_SEED),
            Err(ClassifyError::NotThreeDimensional(4))
        ));
    }

    #[test]
    fn classification_is_closure_invariant() {
        for fam in [
            family(&[3, 4]),
            family(&[5, 0]),
            family(&[5, 2]),
            screw_family(),
        ] {
            let direct = classify(&fam);
            let closed = FieldFamily::new(fam.closure_cached().basis().to_vec()).unwrap();
            assert_eq!(direct, classify(&closed));
        }
    }

    #[test]
    fn classification_is_scale_invariant_up_to_pitch_sign() {
        for c in [2.0, 0.25, -3.0] {
            for fam in [
                family(&[2]),
                family(&[5]),
                family(&[3, 4, 5]),
                family(&[5, 2]),
            ] {
                let scaled =
                    FieldFamily::new(fam.members().iter().map(|f| f.scale(c)).collect()).unwrap();
                assert_eq!(classify(&fam), classify(&scaled));
            }

            let screw = screw_family();
            let scaled =
                FieldFamily::new(screw.members().iter().map(|f| f.scale(c)).collect()).unwrap();
            match (classify(&screw), classify(&scaled)) {
                (
                    FoliationClass::Helices { pitch: p0, .. },
                    FoliationClass::Helices { pitch: p1, .. },
                ) => {
                    let expected = if c < 0.0 { -p0 } else { p0 };
                    assert!((p1 - expected).abs() < 1e-9);
                }
                other => panic!("expected helices, got {other:?}"),
            }
        }
    }

    #[test]
    fn equivariance_under_rigid_motions() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let families: Vec<FieldFamily> = vec![
            family(&[2]),
            family(&[5]),
            screw_family(),
            family(&[0, 1]),
            family(&[3, 4, 5]),
            family(&[5, 2]),
            family(&[0, 1, 2, 3, 4, 5]),
        ];
        for _ in 0..10 {
            let (r, t) = crate::verify::random_rigid_motion(&mut rng, 3);
            for fam in &families {
                let moved = FieldFamily::new(
                    fam.members()
                        .iter()
                        .map(|f| f.conjugate(&r, &t).unwrap())
                        .collect(),
                )
                .unwrap();
                let before = classify(fam);
                let after = classify(&moved);
                let expected = motion_image(&before, &r, &t);
                let deviation = class_deviation(&expected, &after)
                    .unwrap_or_else(|| panic!("tag changed: {expected:?} vs {after:?}"));
                assert!(deviation <= 1e-9, "deviation {deviation}");
            }
        }
    }

    #[test]
    fn stratification_matches_predicted_dimensions() {
        let expectations: Vec<(FieldFamily, Vec<usize>)> = vec![
            (family(&[2]), vec![1]),
            (family(&[5]), vec![0, 1]),
            (screw_family(), vec![1]),
            (family(&[0, 1]), vec![2]),
            (family(&[3, 4, 5]), vec![0, 2]),
            (family(&[5, 2]), vec![1, 2]),
            (family(&[0, 1, 2, 3, 4, 5]), vec![3]),
        ];
        for (fam, expected_dims) in expectations {
            let bx = BoxSpec::uniform(3, -1.05, 1.05);
            let summary = dimension_stratification(&fam, &bx, 7, DEFAULT_RANK_TOL);
            let present: Vec<usize> = summary
                .counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(d, _)| d)
                .collect();
            assert_eq!(present, expected_dims);
        }
    }

    #[test]
    fn serializes_with_exactly_the_tag_parameters() {
        let json = serde_json::to_value(classify(&family(&[3, 4, 5]))).unwrap();
        assert_eq!(json["type"], "ConcentricSpheres");
        assert_eq!(json["center"], serde_json::json!([0.0, 0.0, 0.0]));
        assert_eq!(json.as_object().unwrap().len(), 2);

        let json = serde_json::to_value(classify(&screw_family())).unwrap();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
        assert_eq!(json["pitch"], serde_json::json!(2.0));

        let json = serde_json::to_value(FoliationClass::WholeSpace).unwrap();
        assert_eq!(json, serde_json::json!({"type": "WholeSpace"}));

        // round-trip through the wire format
        let text = serde_json::to_string(&classify(&family(&[5, 2]))).unwrap();
        let back: FoliationClass = serde_json::from_str(&text).unwrap();
        assert_eq!(back, classify(&family(&[5, 2])));
    }
}
