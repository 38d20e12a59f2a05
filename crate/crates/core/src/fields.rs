//! Vector fields on `R^n` in exact affine form and general expression form,
//! the Killing criterion, and pushforward under rigid motions.
//!
//! An affine field `x ↦ A·x + b` is Killing for the Euclidean metric exactly
//! when `A + Aᵀ = 0`; for a general field the criterion is that all condition
//! expressions `∂ξi/∂xj + ∂ξj/∂xi` (i < j) and `∂ξi/∂xi` vanish identically.
//! Expression fields are checked by forming those conditions symbolically and
//! evaluating them on a lattice; the polynomial degrees arising here vanish
//! identically iff they vanish on the default 5-point-per-axis lattice.
//!
//! Only the flat Euclidean ambient metric is supported; spheres and cylinders
//! enter as constraint sets, never as induced metrics.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::{EvalError, Expression};

/// Default tolerance for grid-based Killing checks. Condition expressions
/// are evaluated, not approximated, so residuals are pure round-off.
pub const DEFAULT_KILLING_TOL: f64 = 1e-9;

/// Residual threshold under which an expression field counts as affine.
pub const AFFINITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error)]
pub enum FieldError {
    #[error("linear part must be square, got {rows}x{cols}")]
    NonSquareMatrix { rows: usize, cols: usize },
    #[error("offset has length {got}, expected {expected}")]
    OffsetDimension { expected: usize, got: usize },
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("component {index} has dimension {got}, expected {expected}")]
    ComponentDimension {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("rotation matrix must be {expected}x{expected}, got {rows}x{cols}")]
    RotationShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is not orthogonal: max |R'R - I| = {residual:.3e}")]
    NotOrthogonal { residual: f64 },
}

/// Which route produced a [`KillingReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Entrywise test of `A + Aᵀ = 0` on the stored matrix.
    ExactAffine,
    /// Symbolic condition expressions evaluated on a sampling grid.
    SymbolicGrid,
}

/// A violated Killing condition. Indices are 1-based: `i == j` flags the
/// diagonal condition `∂ξi/∂xi ≠ 0`, `i < j` the off-diagonal condition
/// `∂ξi/∂xj + ∂ξj/∂xi ≠ 0`.
#[derive(Debug, Clone)]
pub struct KillingWitness {
    pub i: usize,
    pub j: usize,
    /// Grid point realising the worst residual (grid mode only).
    pub point: Option<DVector<f64>>,
    pub residual: f64,
}

/// Outcome of a Killing-criterion check. The verdict is failing exactly when
/// `witnesses` is nonempty.
#[derive(Debug, Clone)]
pub struct KillingReport {
    pub mode: CheckMode,
    pub tol: f64,
    pub max_residual: f64,
    pub witnesses: Vec<KillingWitness>,
}

impl KillingReport {
    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Uniform sampling lattice `[lo, hi]^n` used by grid-based checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: -2.0,
            hi: 2.0,
            points_per_axis: 5,
        }
    }
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points_per_axis: usize) -> GridSpec {
        assert!(lo < hi && points_per_axis >= 2);
        GridSpec {
            lo,
            hi,
            points_per_axis,
        }
    }

    /// All lattice points of `[lo, hi]^dim`, in lexicographic order.
    pub fn points(&self, dim: usize) -> Vec<DVector<f64>> {
        assert!(dim >= 1);
        let total = self.points_per_axis.pow(dim as u32);
        assert!(total <= 1_000_000, "grid of {total} points is too large");
        let step = (self.hi - self.lo) / (self.points_per_axis - 1) as f64;
        let mut out = Vec::with_capacity(total);
        let mut index = vec![0usize; dim];
        loop {
            out.push(DVector::from_iterator(
                dim,
                index.iter().map(|&k| self.lo + k as f64 * step),
            ));
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < self.points_per_axis {
                    break;
                }
                index[axis] = 0;
            }
        }
    }
}

/// Exact vector field `x ↦ A·x + b` on `R^n`. The matrix is stored as given;
/// there is no implicit skew-symmetrization.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl AffineField {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<AffineField, FieldError> {
        if a.nrows() != a.ncols() {
            return Err(FieldError::NonSquareMatrix {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if b.len() != a.nrows() {
            return Err(FieldError::OffsetDimension {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(AffineField { a, b })
    }

    /// The zero field on `R^dim`.
    pub fn zero(dim: usize) -> AffineField {
        AffineField {
            a: DMatrix::zeros(dim, dim),
            b: DVector::zeros(dim),
        }
    }

    /// Constant field `x ↦ b`.
    pub fn translation(b: DVector<f64>) -> AffineField {
        let dim = b.len();
        AffineField {
            a: DMatrix::zeros(dim, dim),
            b,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn linear_part(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn constant_part(&self) -> &DVector<f64> {
        &self.b
    }

    /// Exact evaluation `A·p + b`.
    pub fn eval(&self, p: &DVector<f64>) -> DVector<f64> {
        assert_eq!(p.len(), self.dim(), "point dimension mismatch");
        &self.a * p + &self.b
    }

    /// Component `i` as a symbolic expression `Σj a_ij·xj + b_i`.
    pub fn component_expression(&self, i: usize) -> Expression {
        let n = self.dim();
        assert!(i < n);
        let mut e = Expression::constant(n, self.b[i]);
        for j in 0..n {
            let c = self.a[(i, j)];
            if c != 0.0 {
                e = e + Expression::constant(n, c) * Expression::var(n, j);
            }
        }
        e
    }

    /// Largest Killing-condition residual: `max_i |a_ii|` over the diagonal
    /// and `max_{i<j} |a_ij + a_ji|` off it. Zero exactly for skew matrices.
    pub fn killing_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let r = if i == j {
                    self.a[(i, i)].abs()
                } else {
                    (self.a[(i, j)] + self.a[(j, i)]).abs()
                };
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Exact Killing test on the stored matrix.
    pub fn is_killing(&self) -> bool {
        self.killing_residual() == 0.0
    }

    /// Killing check in exact-affine mode. `tol = 0` is the exact entrywise
    /// test; a small positive `tol` absorbs round-off in matrices produced
    /// by floating-point conjugation.
    pub fn killing_check(&self, tol: f64) -> KillingReport {
        let n = self.dim();
        let mut witnesses = Vec::new();
        let mut max_residual = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let residual = if i == j {
                    self.a[(i, i)].abs()
                } else {
                    (self.a[(i, j)] + self.a[(j, i)]).abs()
                };
                max_residual = max_residual.max(residual);
                if residual > tol {
                    witnesses.push(KillingWitness {
                        i: i + 1,
                        j: j + 1,
                        point: None,
                        residual,
                    });
                }
            }
        }
        KillingReport {
            mode: CheckMode::ExactAffine,
            tol,
            max_residual,
            witnesses,
        }
    }

    /// Pushforward under the rigid motion `p ↦ R·p + t`. Requires `RᵀR = I`
    /// within 1e-12.
    pub fn conjugate(&self, r: &DMatrix<f64>, t: &DVector<f64>) -> Result<AffineField, FieldError> {
        let n = self.dim();
        if r.nrows() != n || r.ncols() != n {
            return Err(FieldError::RotationShape {
                expected: n,
                rows: r.nrows(),
                cols: r.ncols(),
            });
        }
        if t.len() != n {
            return Err(FieldError::OffsetDimension {
                expected: n,
                got: t.len(),
            });
        }
        let residual = (r.transpose() * r - DMatrix::<f64>::identity(n, n)).amax();
        if residual > 1e-12 {
            return Err(FieldError::NotOrthogonal { residual });
        }
        let a = r * &self.a * r.transpose();
        let b = r * &self.b - &a * t;
        Ok(AffineField { a, b })
    }

    /// The scaled field `c·(A, b)`.
    pub fn scale(&self, c: f64) -> AffineField {
        AffineField {
            a: &self.a * c,
            b: &self.b * c,
        }
    }
}

impl std::ops::Add<&AffineField> for &AffineField {
    type Output = AffineField;

    fn add(self, rhs: &AffineField) -> AffineField {
        assert_eq!(self.dim(), rhs.dim(), "field dimensions differ");
        AffineField {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }
}

impl std::ops::Mul<f64> for &AffineField {
    type Output = AffineField;

    fn mul(self, c: f64) -> AffineField {
        self.scale(c)
    }
}

/// Vector field whose components are parsed symbolic expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprField {
    components: Vec<Expression>,
}

impl ExprField {
    /// Build from one expression per coordinate; all must share the ambient
    /// dimension, and their number must equal it.
    pub fn new(components: Vec<Expression>) -> Result<ExprField, FieldError> {
        let dim = components.len();
        for (index, c) in components.iter().enumerate() {
            if c.dim() != dim {
                return Err(FieldError::ComponentDimension {
                    index,
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        if dim == 0 {
            return Err(FieldError::ComponentCount {
                expected: 1,
                got: 0,
            });
        }
        Ok(ExprField { components })
    }

    /// Parse `texts` as the components of a field on `R^dim`.
    pub fn parse(texts: &[&str], dim: usize) -> Result<ExprField, crate::expr::ParseError> {
        assert_eq!(texts.len(), dim, "need one component per coordinate");
        let components = texts
            .iter()
            .map(|t| Expression::parse(t, dim))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExprField { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn eval(&self, p: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        let vals = self
            .components
            .iter()
            .map(|c| c.eval(p.as_slice()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Killing check in symbolic-grid mode: the `n(n+1)/2` condition
    /// expressions are formed by exact symbolic differentiation and evaluated
    /// at every grid point; the verdict fails on any residual above `tol`.
    pub fn killing_check(&self, grid: &GridSpec, tol: f64) -> Result<KillingReport, EvalError> {
        let n = self.dim();
        let points = grid.points(n);
        let mut witnesses = Vec::new();
        let mut max_residual = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let condition = if i == j {
                    self.components[i].differentiate(i)
                } else {
                    self.components[i].differentiate(j) + self.components[j].differentiate(i)
                };
                let mut worst = 0.0f64;
                let mut worst_point = None;
                for p in &points {
                    let v = condition.eval(p.as_slice())?.abs();
                    if v > worst {
                        worst = v;
                        worst_point = Some(p.clone());
                    }
                }
                max_residual = max_residual.max(worst);
                if worst > tol {
                    witnesses.push(KillingWitness {
                        i: i + 1,
                        j: j + 1,
                        point: worst_point,
                        residual: worst,
                    });
                }
            }
        }
        Ok(KillingReport {
            mode: CheckMode::SymbolicGrid,
            tol,
            max_residual,
            witnesses,
        })
    }

    /// Affinity detection: when every second derivative vanishes on the grid
    /// (residual ≤ [`AFFINITY_TOL`]), the field is affine and is rebuilt
    /// exactly from its first derivatives and value at the origin.
    pub fn try_to_affine(&self, grid: &GridSpec) -> Result<Option<AffineField>, EvalError> {
        let n = self.dim();
        let points = grid.points(n);
        for component in &self.components {
            for j in 0..n {
                let first = component.differentiate(j);
                for k in j..n {
                    let second = first.differentiate(k);
                    for p in &points {
                        if second.eval(p.as_slice())?.abs() > AFFINITY_TOL {
                            return Ok(None);
                        }
                    }
                }
            }
        }
        let origin = vec![0.0; n];
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for (i, component) in self.components.iter().enumerate() {
            b[i] = component.eval(&origin)?;
            for j in 0..n {
                a[(i, j)] = component.differentiate(j).eval(&origin)?;
            }
        }
        Ok(Some(AffineField { a, b }))
    }
}

/// Common interface for evaluating fields pointwise; lets the integrators
/// accept either representation.
pub trait VectorField {
    fn dim(&self) -> usize;

    fn value(&self, p: &DVector<f64>) -> Result<DVector<f64>, EvalError>;

    /// The exact affine form, when this field has one.
    fn as_affine(&self) -> Option<&AffineField> {
        None
    }
}

impl VectorField for AffineField {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn value(&self, p: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        Ok(self.eval(p))
    }

    fn as_affine(&self) -> Option<&AffineField> {
        Some(self)
    }
}

impl VectorField for ExprField {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn value(&self, p: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        self.eval(p)
    }
}

/// Either representation of a vector field.
#[derive(Debug, Clone)]
pub enum Field {
    Affine(AffineField),
    Expr(ExprField),
}

impl Field {
    pub fn killing_check(&self, grid: &GridSpec, tol: f64) -> Result<KillingReport, EvalError> {
        match self {
            Field::Affine(f) => Ok(f.killing_check(tol)),
            Field::Expr(f) => f.killing_check(grid, tol),
        }
    }
}

impl VectorField for Field {
    fn dim(&self) -> usize {
        match self {
            Field::Affine(f) => f.dim(),
            Field::Expr(f) => f.dim(),
        }
    }

    fn value(&self, p: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        match self {
            Field::Affine(f) => Ok(f.eval(p)),
            Field::Expr(f) => f.eval(p),
        }
    }

    fn as_affine(&self) -> Option<&AffineField> {
        match self {
            Field::Affine(f) => Some(f),
            Field::Expr(_) => None,
        }
    }
}

/// The six-field basis of the Euclidean isometry algebra of `R^3`:
/// translations along the axes followed by the rotation generators
///
/// ```text
/// X4 = -y ∂z + z ∂y,   X5 = -z ∂x + x ∂z,   X6 = -x ∂y + y ∂x.
/// ```
///
/// Sign convention: the flows of X4, X5, X6 rotate clockwise about the +x,
/// +y, +z axes respectively (right-hand rule).
pub fn euclidean_basis_r3() -> Vec<AffineField> {
    let e = |i: usize| {
        let mut v = DVector::zeros(3);
        v[i] = 1.0;
        v
    };
    let rot = |entries: [(usize, usize, f64); 2]| {
        let mut a = DMatrix::zeros(3, 3);
        for (i, j, v) in entries {
            a[(i, j)] = v;
        }
        AffineField {
            a,
            b: DVector::zeros(3),
        }
    };
    vec![
        AffineField::translation(e(0)),
        AffineField::translation(e(1)),
        AffineField::translation(e(2)),
        // ydot = z, zdot = -y
        rot([(1, 2, 1.0), (2, 1, -1.0)]),
        // xdot = -z, zdot = x
        rot([(0, 2, -1.0), (2, 0, 1.0)]),
        // xdot = y, ydot = -x
        rot([(0, 1, 1.0), (1, 0, -1.0)]),
    ]
}
