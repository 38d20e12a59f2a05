//! Lie brackets of vector fields, bracket-closure of a Killing family into a
//! finite-dimensional algebra, and evaluation rank.
//!
//! For affine fields `f = (A, a)`, `g = (B, b)` the bracket (commutator
//! convention `[f,g]^i = f^j ∂j g^i − g^j ∂j f^i`) is again affine:
//! `[f, g] = (B·A − A·B, B·a − A·b)`. Brackets of Killing fields are Killing,
//! so the closure of a Killing family stays inside the isometry algebra and
//! has dimension at most `n(n+1)/2`.
//!
//! Independence of affine Killing fields is tested on vectorized coordinates:
//! the strict upper triangle of `A` concatenated with `b`, which is a
//! faithful coordinate system on the Killing algebra because `A` is skew.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::Expression;
use crate::fields::{AffineField, ExprField};
use crate::linalg;

/// Default relative rank tolerance: deterministic for the rational-entry
/// inputs that arise in practice.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Killing-validation tolerance used when assembling a family.
pub const FAMILY_KILLING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum FamilyError {
    #[error("a field family must contain at least one member")]
    Empty,
    #[error("member {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("member {index} is not a Killing field (residual {residual:.3e})")]
    NotKilling { index: usize, residual: f64 },
}

/// A nonempty family of affine Killing fields sharing one ambient dimension.
/// Members are validated on construction.
#[derive(Debug, Clone)]
pub struct FieldFamily {
    members: Vec<AffineField>,
    closure: OnceLock<LieAlgebraBasis>,
}

impl FieldFamily {
    pub fn new(members: Vec<AffineField>) -> Result<FieldFamily, FamilyError> {
        let first = members.first().ok_or(FamilyError::Empty)?;
        let dim = first.dim();
        for (index, f) in members.iter().enumerate() {
            if f.dim() != dim {
                return Err(FamilyError::DimensionMismatch {
                    index,
                    expected: dim,
                    got: f.dim(),
                });
            }
            let residual = f.killing_residual();
            if residual > FAMILY_KILLING_TOL {
                return Err(FamilyError::NotKilling { index, residual });
            }
        }
        Ok(FieldFamily {
            members,
            closure: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[AffineField] {
        &self.members
    }

    /// Bracket-closure at the given rank tolerance.
    pub fn closure(&self, tol: f64) -> LieAlgebraBasis {
        closure_of(self.dim(), &self.members, tol)
    }

    /// Bracket-closure at [`DEFAULT_RANK_TOL`], computed once per family and
    /// shared by later callers.
    pub fn closure_cached(&self) -> &LieAlgebraBasis {
        self.closure
            .get_or_init(|| closure_of(self.dim(), &self.members, DEFAULT_RANK_TOL))
    }
}

/// Linearly independent affine Killing fields spanning the bracket-closure
/// of a family.
#[derive(Debug, Clone)]
pub struct LieAlgebraBasis {
    dim: usize,
    basis: Vec<AffineField>,
    generation_depth: usize,
}

impl LieAlgebraBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[AffineField] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Number of bracket rounds that enlarged the span before stabilization.
    pub fn generation_depth(&self) -> usize {
        self.generation_depth
    }

    /// Numerical rank of the `n × size` matrix whose columns are the basis
    /// fields evaluated at `p`; this is the orbit dimension at `p`.
    pub fn evaluation_rank(&self, p: &DVector<f64>, tol: f64) -> usize {
        assert_eq!(p.len(), self.dim, "point dimension mismatch");
        let mut m = DMatrix::zeros(self.dim, self.basis.len());
        for (k, f) in self.basis.iter().enumerate() {
            m.set_column(k, &f.eval(p));
        }
        linalg::numerical_rank(&m, tol)
    }

    /// Max-abs residual of representing `f` in the span of this basis
    /// (least squares on vectorized coordinates).
    pub fn span_residual(&self, f: &AffineField) -> f64 {
        assert_eq!(f.dim(), self.dim);
        if self.basis.is_empty() {
            return vectorize(f).amax();
        }
        let rows: Vec<DVector<f64>> = self.basis.iter().map(vectorize).collect();
        let cols = rows[0].len();
        let mut m = DMatrix::zeros(cols, rows.len());
        for (k, r) in rows.iter().enumerate() {
            m.set_column(k, r);
        }
        let (_, residual) = linalg::least_squares(&m, &vectorize(f), DEFAULT_RANK_TOL);
        residual
    }
}

/// Vectorize an affine Killing field for independence tests: the strict
/// upper triangle of `A` followed by `b`.
pub fn vectorize(f: &AffineField) -> DVector<f64> {
    let n = f.dim();
    let mut coords = Vec::with_capacity(n * (n - 1) / 2 + n);
    for i in 0..n {
        for j in (i + 1)..n {
            coords.push(f.linear_part()[(i, j)]);
        }
    }
    coords.extend(f.constant_part().iter());
    DVector::from_vec(coords)
}

/// Lie bracket `[f, g] = (B·A − A·B, B·a − A·b)` of affine fields.
///
/// Panics if the dimensions differ.
pub fn bracket(f: &AffineField, g: &AffineField) -> AffineField {
    assert_eq!(f.dim(), g.dim(), "field dimensions differ");
    let a = f.linear_part();
    let b = g.linear_part();
    let linear = b * a - a * b;
    let constant = b * f.constant_part() - a * g.constant_part();
    AffineField::new(linear, constant).expect("square by construction")
}

/// Lie bracket of expression fields by symbolic differentiation:
/// `[f,g]^i = Σj (f^j·∂j g^i − g^j·∂j f^i)`.
///
/// This route exists for spot checks and as an independent cross-check of
/// [`bracket`]; closure only accepts affine families, since brackets of
/// general expression fields leave the affine class.
pub fn expr_bracket(f: &ExprField, g: &ExprField) -> ExprField {
    assert_eq!(f.dim(), g.dim(), "field dimensions differ");
    let n = f.dim();
    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Expression::constant(n, 0.0);
        for j in 0..n {
            acc = acc + f.components()[j].clone() * g.components()[i].differentiate(j);
            acc = acc - g.components()[j].clone() * f.components()[i].differentiate(j);
        }
        components.push(acc);
    }
    ExprField::new(components).expect("component count preserved")
}

fn spans_enlarge(vectors: &[DVector<f64>], candidate: &DVector<f64>, tol: f64) -> bool {
    let cols = candidate.len();
    let mut m = DMatrix::zeros(cols, vectors.len() + 1);
    for (k, v) in vectors.iter().enumerate() {
        m.set_column(k, v);
    }
    m.set_column(vectors.len(), candidate);
    linalg::numerical_rank(&m, tol) == vectors.len() + 1
}

fn closure_of(dim: usize, members: &[AffineField], tol: f64) -> LieAlgebraBasis {
    let cap = dim * (dim + 1) / 2;
    let mut basis: Vec<AffineField> = Vec::new();
    let mut vecs: Vec<DVector<f64>> = Vec::new();
    for f in members {
        let v = vectorize(f);
        if basis.len() < cap && spans_enlarge(&vecs, &v, tol) {
            basis.push(f.clone());
            vecs.push(v);
        }
    }

    // Breadth-first rounds: all pairwise brackets of the current basis are
    // retried each round, so the result is order-insensitive up to span and
    // the depth counts genuine generation steps.
    let mut generation_depth = 0;
    while basis.len() < cap {
        let round_size = basis.len();
        let mut added = false;
        for i in 0..round_size {
            for j in (i + 1)..round_size {
                if basis.len() >= cap {
                    break;
                }
                let br = bracket(&basis[i], &basis[j]);
                let v = vectorize(&br);
                if spans_enlarge(&vecs, &v, tol) {
                    basis.push(br);
                    vecs.push(v);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
        generation_depth += 1;
    }

    LieAlgebraBasis {
        dim,
        basis,
        generation_depth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::euclidean_basis_r3;
    use crate::verify::{s3_torus_pair, GOLD_SEED};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn random_killing(rng: &mut ChaCha8Rng, dim: usize) -> AffineField {
        let mut a = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v: f64 = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        let b = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        AffineField::new(a, b).unwrap()
    }

    #[test]
    fn bracket_matches_symbolic_differentiation_route() {
        // independent oracle: the same bracket computed on expression fields
        // via the coordinate formula, compared by evaluation
        let basis = euclidean_basis_r3();
        let as_expr = |texts: [&str; 3]| ExprField::parse(&texts, 3).unwrap();
        let fields_expr = [
            as_expr(["1", "0", "0"]),
            as_expr(["0", "1", "0"]),
            as_expr(["0", "0", "1"]),
            as_expr(["0", "z", "-y"]),
            as_expr(["-z", "0", "x"]),
            as_expr(["y", "-x", "0"]),
        ];
        let points = [
            dv(&[0.3, -1.2, 0.7]),
            dv(&[1.0, 0.0, 0.0]),
            dv(&[-0.5, 2.0, 1.5]),
        ];
        for i in 0..6 {
            for j in 0..6 {
                let affine = bracket(&basis[i], &basis[j]);
                let symbolic = expr_bracket(&fields_expr[i], &fields_expr[j]);
                for p in &points {
                    let lhs = affine.eval(p);
                    let rhs = symbolic.eval(p).unwrap();
                    assert!((lhs - rhs).amax() < 1e-12, "bracket mismatch at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn bracket_worked_examples() {
        let basis = euclidean_basis_r3();
        // cylinder tangent fields commute: the rotation fixes the axis the
        // translation moves along
        let commutator = bracket(&basis[5], &basis[2]);
        assert_eq!(vectorize(&commutator).amax(), 0.0);

        // [X4, X5] = X6 exactly
        let br = bracket(&basis[3], &basis[4]);
        assert_eq!(br, basis[5]);

        // the torus pair on R^4 commutes
        let (x, y) = s3_torus_pair();
        assert_eq!(vectorize(&bracket(&x, &y)).amax(), 0.0);
    }

    #[test]
    fn bracket_antisymmetry_and_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(GOLD_SEED);
        for _ in 0..100 {
            let f = random_killing(&mut rng, 3);
            let g = random_killing(&mut rng, 3);
            let h = random_killing(&mut rng, 3);

            let anti = &bracket(&f, &g) + &bracket(&g, &f);
            assert_eq!(vectorize(&anti).amax(), 0.0);

            let jacobi = &(&bracket(&bracket(&f, &g), &h) + &bracket(&bracket(&g, &h), &f))
                + &bracket(&bracket(&h, &f), &g);
            assert!(vectorize(&jacobi).amax() <= 1e-12);
        }
    }

    #[test]
    fn bracket_of_killing_fields_is_killing() {
        let mut rng = ChaCha8Rng::seed_from_u64(GOLD_SEED + 1);
        for _ in 0..500 {
            let f = random_killing(&mut rng, 4);
            let g = random_killing(&mut rng, 4);
            assert!(bracket(&f, &g).is_killing());
        }
    }

    #[test]
    fn closure_worked_examples() {
        let basis = euclidean_basis_r3();

        let fam = FieldFamily::new(vec![basis[3].clone(), basis[4].clone()]).unwrap();
        let closure = fam.closure(DEFAULT_RANK_TOL);
        assert_eq!(closure.len(), 3);
        assert_eq!(closure.generation_depth(), 1);

        let fam = FieldFamily::new(vec![basis[5].clone(), basis[2].clone()]).unwrap();
        let closure = fam.closure(DEFAULT_RANK_TOL);
        assert_eq!(closure.len(), 2);
        assert_eq!(closure.generation_depth(), 0);

        let fam = FieldFamily::new(basis.clone()).unwrap();
        let closure = fam.closure(DEFAULT_RANK_TOL);
        assert_eq!(closure.len(), 6);

        // every pairwise bracket of the closure basis stays in the span
        for i in 0..closure.len() {
            for j in (i + 1)..closure.len() {
                let br = bracket(&closure.basis()[i], &closure.basis()[j]);
                assert!(closure.span_residual(&br) <= 1e-9);
            }
        }
    }

    #[test]
    fn closure_by_brute_force_enumeration() {
        // oracle: enumerate bracket words to depth 3 and row-reduce the
        // vectorized stack with exact pivoting (entries are small integers)
        fn exact_rank(rows: &[Vec<f64>]) -> usize {
            let mut m: Vec<Vec<f64>> = rows.to_vec();
            let cols = m[0].len();
            let mut rank = 0;
            for col in 0..cols {
                let pivot = (rank..m.len()).find(|&r| m[r][col].abs() > 1e-12);
                let Some(pivot) = pivot else { continue };
                m.swap(rank, pivot);
                let pivot_row = m[rank].clone();
                let p = pivot_row[col];
                for (r, row) in m.iter_mut().enumerate() {
                    if r != rank && row[col].abs() > 0.0 {
                        let factor = row[col] / p;
                        for (dst, src) in row.iter_mut().zip(&pivot_row) {
                            *dst -= factor * src;
                        }
                    }
                }
                rank += 1;
            }
            rank
        }

        let basis = euclidean_basis_r3();
        let seeds = vec![basis[3].clone(), basis[4].clone()];
        let mut generated = seeds.clone();
        for _ in 0..3 {
            let snapshot = generated.clone();
            for f in &snapshot {
                for g in &snapshot {
                    generated.push(bracket(f, g));
                }
            }
        }
        let rows: Vec<Vec<f64>> = generated
            .iter()
            .map(|f| vectorize(f).iter().cloned().collect())
            .collect();
        assert_eq!(exact_rank(&rows), 3);

        let fam = FieldFamily::new(seeds).unwrap();
        assert_eq!(fam.closure(DEFAULT_RANK_TOL).len(), 3);
    }

    #[test]
    fn closure_is_order_insensitive() {
        let basis = euclidean_basis_r3();
        let members = vec![basis[3].clone(), basis[4].clone(), basis[0].clone()];
        let reference = FieldFamily::new(members.clone())
            .unwrap()
            .closure(DEFAULT_RANK_TOL);

        let permutations: [[usize; 3]; 5] = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for perm in permutations {
            let shuffled: Vec<_> = perm.iter().map(|&k| members[k].clone()).collect();
            let other = FieldFamily::new(shuffled)
                .unwrap()
                .closure(DEFAULT_RANK_TOL);
            assert_eq!(other.len(), reference.len());
            // mutual span containment
            for f in other.basis() {
                assert!(reference.span_residual(f) <= 1e-9);
            }
            for f in reference.basis() {
                assert!(other.span_residual(f) <= 1e-9);
            }
        }
    }

    #[test]
    fn closure_cap_is_respected() {
        let basis = euclidean_basis_r3();
        let fam = FieldFamily::new(basis).unwrap();
        let closure = fam.closure_cached();
        assert_eq!(closure.len(), 6);
        assert!(closure.len() <= 3 * (3 + 1) / 2);
    }

    #[test]
    fn evaluation_rank_examples() {
        let basis = euclidean_basis_r3();
        let so3 =
            FieldFamily::new(vec![basis[3].clone(), basis[4].clone(), basis[5].clone()]).unwrap();
        let closure = so3.closure_cached();
        assert_eq!(
            closure.evaluation_rank(&DVector::zeros(3), DEFAULT_RANK_TOL),
            0
        );
        assert_eq!(
            closure.evaluation_rank(&dv(&[0.0, 0.0, 1.0]), DEFAULT_RANK_TOL),
            2
        );

        let (x, y) = s3_torus_pair();
        let torus = FieldFamily::new(vec![x, y]).unwrap();
        let closure = torus.closure_cached();
        assert_eq!(
            closure.evaluation_rank(&dv(&[1.0, 0.0, 0.0, 0.0]), DEFAULT_RANK_TOL),
            2
        );
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(
            closure.evaluation_rank(&dv(&[s, 0.0, 0.0, s]), DEFAULT_RANK_TOL),
            1
        );
    }

    #[test]
    fn family_construction_validates() {
        assert!(matches!(FieldFamily::new(vec![]), Err(FamilyError::Empty)));

        let radial = AffineField::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        assert!(matches!(
            FieldFamily::new(vec![radial]),
            Err(FamilyError::NotKilling { index: 0, .. })
        ));

        let basis = euclidean_basis_r3();
        let (x, _) = s3_torus_pair();
        assert!(matches!(
            FieldFamily::new(vec![basis[0].clone(), x]),
            Err(FamilyError::DimensionMismatch { index: 1, .. })
        ));
    }
}
