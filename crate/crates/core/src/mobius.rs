//! The projective line, Möbius transformations, and anti-holomorphic
//! involutions.
//!
//! An anti-holomorphic self-map of CP^1 factors as `z ↦ A·conj(z)` for a
//! 2×2 complex matrix `A`; it is an involution precisely when
//! `A·conj(A) = ±I` after normalizing `det A = 1`. The sign splits the
//! involutions into two conjugacy classes:
//!
//! * type I (`+`): conjugate to plain coordinate conjugation; the fixed
//!   set is a circle on the Riemann sphere;
//! * type II (`-`): conjugate to the antipodal map `[z0:z1] ↦ [z̄1:-z̄0]`;
//!   there are no fixed points.
//!
//! The sphere model used throughout is
//! `[z0:z1] ↦ (2 Re(z̄0 z1), 2 Im(z̄0 z1), |z0|² - |z1|²)`
//! on unit-norm representatives, i.e. stereographic projection of the
//! affine coordinate `z1/z0` from the south pole.

use nalgebra::{DVector, Matrix2, Vector2, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::sampling::fibonacci_sphere;

/// Threshold below which a (normalized) entry counts as zero when picking
/// phase and sign conventions.
const PHASE_EPS: f64 = 1e-12;

/// Tolerance for the type I / type II sign test.
pub const CLASSIFY_TOL: f64 = 1e-8;

/// Tolerance for membership of a point in a fixed circle.
pub const FIXED_POINT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum MobiusError {
    #[error("the zero vector does not define a projective point")]
    ZeroVector,
    #[error("matrix is numerically singular (|det| = {det_norm:.3e} after scaling)")]
    SingularMatrix { det_norm: f64 },
    #[error("map does not square to the identity (residual {residual:.3e})")]
    MalformedInvolution { residual: f64 },
    #[error("matrix does not satisfy [conj(A)] = [A^-1] (defect {defect:.3e})")]
    NotInvolutionPair { defect: f64 },
    #[error("point violates the hyperboloid constraint (residual {residual:.3e})")]
    OffHyperboloid { residual: f64 },
    #[error("type II involutions are fixed-point free")]
    TypeIIInput,
    #[error("could not locate three independent fixed points")]
    FixedPointSearchFailed,
}

impl MobiusError {
    /// Stable machine-readable identifier, used by the CLI error records.
    pub fn name(&self) -> &'static str {
        match self {
            MobiusError::ZeroVector => "ZeroVector",
            MobiusError::SingularMatrix { .. } => "SingularMatrix",
            MobiusError::MalformedInvolution { .. } => "MalformedInvolution",
            MobiusError::NotInvolutionPair { .. } => "NotInvolutionPair",
            MobiusError::OffHyperboloid { .. } => "OffHyperboloid",
            MobiusError::TypeIIInput => "TypeIIInput",
            MobiusError::FixedPointSearchFailed => "FixedPointSearchFailed",
        }
    }
}

/// A point of complex projective space, stored as a unit-norm coordinate
/// vector whose first sizeable entry is rotated onto the positive real
/// axis. The normalization makes equality tests and serialization
/// deterministic; all geometric predicates remain scale-invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint {
    coords: DVector<Complex64>,
}

impl ProjectivePoint {
    pub fn new(coords: DVector<Complex64>) -> Result<Self, MobiusError> {
        let norm = coords.norm();
        if !(norm > 1e-150) {
            return Err(MobiusError::ZeroVector);
        }
        let mut v = coords / Complex64::new(norm, 0.0);
        if let Some(lead) = v.iter().find(|z| z.norm() > PHASE_EPS).copied() {
            let phase = lead / lead.norm();
            v /= phase;
        }
        Ok(ProjectivePoint { coords: v })
    }

    pub fn from_slice(entries: &[Complex64]) -> Result<Self, MobiusError> {
        Self::new(DVector::from_row_slice(entries))
    }

    /// Convenience for CP^1 points [z0 : z1].
    pub fn from_pair(z0: Complex64, z1: Complex64) -> Result<Self, MobiusError> {
        Self::from_slice(&[z0, z1])
    }

    pub fn coords(&self) -> &DVector<Complex64> {
        &self.coords
    }

    /// Projective dimension of the ambient space (length − 1).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Hermitian inner product ⟨self, other⟩ = Σ conj(self_j)·other_j of
    /// the unit representatives.
    pub fn herm_inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.len(), other.len(), "projective points of different size");
        self.coords.dotc(&other.coords)
    }

    /// Fubini–Study sine distance in [0, 1]; zero exactly when the points
    /// coincide. Computed as ‖pp̄ᵀ − qq̄ᵀ‖_F / √2 entry by entry — the
    /// equivalent closed form √(1 − |⟨p,q⟩|²) cancels catastrophically and
    /// cannot resolve distances below ~1e-8.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "projective points of different size");
        projector_distance(self.coords.as_slice(), other.coords.as_slice())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) < tol
    }
}

/// An element of PSL(2, C): a 2×2 complex matrix normalized to det = 1,
/// with the residual ±A ambiguity resolved by a fixed sign convention on
/// the first sizeable entry.
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusMap {
    matrix: Matrix2<Complex64>,
}

impl MobiusMap {
    pub fn new(matrix: Matrix2<Complex64>) -> Result<Self, MobiusError> {
        let scale = matrix.norm();
        if !(scale > 1e-150) {
            return Err(MobiusError::SingularMatrix { det_norm: 0.0 });
        }
        let m = matrix / Complex64::new(scale, 0.0);
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det.norm() < 1e-12 {
            return Err(MobiusError::SingularMatrix { det_norm: det.norm() });
        }
        let unimodular = m / det.sqrt();
        Ok(MobiusMap {
            matrix: sign_normalize(unimodular),
        })
    }

    pub fn from_entries(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, MobiusError> {
        Self::new(Matrix2::new(a, b, c, d))
    }

    pub fn identity() -> Self {
        MobiusMap {
            matrix: Matrix2::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.matrix
    }

    /// For det = 1 the inverse is (d, −b; −c, a).
    pub fn inverse(&self) -> Self {
        let m = &self.matrix;
        MobiusMap {
            matrix: sign_normalize(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])),
        }
    }

    /// self ∘ other (matrix product).
    pub fn compose(&self, other: &Self) -> Self {
        MobiusMap::new(self.matrix * other.matrix)
            .expect("product of unimodular matrices is unimodular")
    }

    /// Entrywise conjugate conj(A); as a map this is ρ₀ ∘ self ∘ ρ₀.
    pub fn conj_entries(&self) -> Self {
        MobiusMap {
            matrix: sign_normalize(self.matrix.map(|z| z.conj())),
        }
    }

    pub fn apply(&self, p: &ProjectivePoint) -> ProjectivePoint {
        assert_eq!(p.len(), 2, "MobiusMap acts on CP^1 points");
        let v = Vector2::new(p.coords[0], p.coords[1]);
        let w = self.matrix * v;
        ProjectivePoint::from_pair(w[0], w[1]).expect("Möbius maps are invertible")
    }

    pub fn apply_raw(&self, v: &Vector2<Complex64>) -> Vector2<Complex64> {
        self.matrix * v
    }

    /// Frobenius distance in PSL(2, C): min(‖A−B‖, ‖A+B‖).
    pub fn distance(&self, other: &Self) -> f64 {
        let diff = (self.matrix - other.matrix).norm();
        let sum = (self.matrix + other.matrix).norm();
        diff.min(sum)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) < tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&MobiusMap::identity(), tol)
    }
}

/// ‖pp̄ᵀ − qq̄ᵀ‖_F / √2 for unit vectors p, q — the sine of the projective
/// angle, accurate down to machine precision.
fn projector_distance(p: &[Complex64], q: &[Complex64]) -> f64 {
    let n = p.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = p[i] * p[j].conj() - q[i] * q[j].conj();
            acc += d.norm_sqr();
        }
    }
    (acc / 2.0).sqrt().min(1.0)
}

/// Resolve the ±A ambiguity: make the first entry (row-major) of sizeable
/// modulus have positive real part, or positive imaginary part when it is
/// purely imaginary.
fn sign_normalize(m: Matrix2<Complex64>) -> Matrix2<Complex64> {
    let entries = [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]];
    for e in entries {
        let a = e.norm();
        if a > PHASE_EPS {
            let flip = if e.re.abs() > PHASE_EPS * a {
                e.re < 0.0
            } else {
                e.im < 0.0
            };
            return if flip { -m } else { m };
        }
    }
    m
}

/// Tag for the two conjugacy classes of anti-holomorphic involutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InvolutionClass {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

impl InvolutionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvolutionClass::TypeI => "I",
            InvolutionClass::TypeII => "II",
        }
    }
}

impl std::fmt::Display for InvolutionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(conj(d), -conj(b); -conj(c), conj(a))` — equals A^(-1) conjugated,
/// for det A = 1.
fn dagger(m: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    Matrix2::new(
        m[(1, 1)].conj(),
        -m[(0, 1)].conj(),
        -m[(1, 0)].conj(),
        m[(0, 0)].conj(),
    )
}

/// Decide which component of the involution space the pair (A, conjugation)
/// belongs to. `A = ±(conj(d), -conj(b); -conj(c), conj(a))` is equivalent
/// to `A·conj(A) = ±I`; the sign is invariant under `A ↦ -A`, so the PSL
/// representative does not matter.
pub fn classify_pair(a: &MobiusMap) -> Result<InvolutionClass, MobiusError> {
    let m = a.matrix();
    let dag = dagger(m);
    let plus = (m - dag).norm();
    let minus = (m + dag).norm();
    let defect = plus.min(minus);
    if defect > CLASSIFY_TOL {
        return Err(MobiusError::NotInvolutionPair { defect });
    }
    Ok(if plus <= minus {
        InvolutionClass::TypeI
    } else {
        InvolutionClass::TypeII
    })
}

/// Anti-holomorphic self-map of CP^1: `p ↦ mobius_part(conj(p))`.
#[derive(Clone, Debug)]
pub struct AntiInvolution {
    mobius_part: MobiusMap,
}

impl AntiInvolution {
    pub fn new(mobius_part: MobiusMap) -> Self {
        AntiInvolution { mobius_part }
    }

    /// Plain coordinate conjugation [z0:z1] ↦ [conj(z0):conj(z1)].
    pub fn standard_conjugation() -> Self {
        AntiInvolution::new(MobiusMap::identity())
    }

    /// The antipodal map [z0:z1] ↦ [conj(z1):−conj(z0)].
    pub fn antipodal() -> Self {
        AntiInvolution::new(
            MobiusMap::from_entries(
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.0),
            )
            .expect("antipodal matrix is unimodular"),
        )
    }

    pub fn mobius_part(&self) -> &MobiusMap {
        &self.mobius_part
    }

    pub fn apply(&self, p: &ProjectivePoint) -> ProjectivePoint {
        assert_eq!(p.len(), 2, "AntiInvolution acts on CP^1 points");
        let v = Vector2::new(p.coords[0].conj(), p.coords[1].conj());
        let w = self.mobius_part.matrix * v;
        ProjectivePoint::from_pair(w[0], w[1]).expect("anti-involutions are invertible")
    }

    fn apply_raw(&self, v: &Vector2<Complex64>) -> Vector2<Complex64> {
        self.mobius_part.matrix * Vector2::new(v[0].conj(), v[1].conj())
    }

    /// Displacement of a raw CP^1 representative under the map, measured in
    /// the Fubini–Study sine distance. Allocation-free; used on large grids.
    pub fn displacement(&self, v: &Vector2<Complex64>) -> f64 {
        let w = self.apply_raw(v);
        let vn = v.norm();
        let wn = w.norm();
        if vn <= 0.0 || wn <= 0.0 {
            return 0.0;
        }
        let p = [v[0] / vn, v[1] / vn];
        let q = [w[0] / wn, w[1] / wn];
        projector_distance(&p, &q)
    }

    /// Residual of the involution identity on the standard 8-point panel.
    pub fn involution_residual(&self) -> f64 {
        parameter_panel()
            .iter()
            .map(|p| self.apply(&self.apply(p)).distance(p))
            .fold(0.0, f64::max)
    }

    /// Check that the map squares to the identity within `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), MobiusError> {
        let residual = self.involution_residual();
        if residual > tol {
            return Err(MobiusError::MalformedInvolution { residual });
        }
        Ok(())
    }

    pub fn classify(&self) -> Result<InvolutionClass, MobiusError> {
        classify_pair(&self.mobius_part)
    }

    /// ψ ∘ self ∘ ψ⁻¹, again an anti-involution; its Möbius part is
    /// ψ · A · conj(ψ⁻¹).
    pub fn conjugate_by(&self, psi: &MobiusMap) -> AntiInvolution {
        let part = psi
            .compose(&self.mobius_part)
            .compose(&psi.inverse().conj_entries());
        AntiInvolution::new(part)
    }

    /// Minimum displacement over a deterministic spherical grid; a positive
    /// lower bound certifies fixed-point freeness at grid resolution.
    pub fn min_displacement_on_grid(&self, grid_points: usize) -> f64 {
        fibonacci_sphere(grid_points)
            .iter()
            .map(|s| {
                let v = from_sphere_raw(s);
                self.displacement(&v)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fixed eight-point evaluation panel used by involution and conjugation
/// residual checks: well spread on the sphere, none of them special to the
/// standard conjugation.
pub fn parameter_panel() -> Vec<ProjectivePoint> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        (c(1.0, 0.0), c(0.0, 0.0)),
        (c(0.0, 0.0), c(1.0, 0.0)),
        (c(1.0, 0.0), c(1.0, 0.0)),
        (c(1.0, 0.0), c(-1.0, 0.0)),
        (c(1.0, 0.0), c(0.0, 1.0)),
        (c(1.0, 0.0), c(0.0, -1.0)),
        (c(2.0, 0.0), c(1.0, 0.0)),
        (c(1.0, 0.0), c(2.0, 0.0)),
    ]
    .into_iter()
    .map(|(z0, z1)| ProjectivePoint::from_pair(z0, z1).expect("panel points are nonzero"))
    .collect()
}

/// Sphere model of CP^1 (see module docs).
pub fn to_sphere(p: &ProjectivePoint) -> Vector3<f64> {
    assert_eq!(p.len(), 2);
    let z0 = p.coords[0];
    let z1 = p.coords[1];
    let w = z0.conj() * z1;
    Vector3::new(2.0 * w.re, 2.0 * w.im, z0.norm_sqr() - z1.norm_sqr())
}

fn from_sphere_raw(s: &Vector3<f64>) -> Vector2<Complex64> {
    // Two branches keep the representative well conditioned near the poles.
    if s.z >= 0.0 {
        let z0 = ((1.0 + s.z) / 2.0).sqrt();
        let z1 = Complex64::new(s.x, s.y) / (2.0 * z0);
        Vector2::new(Complex64::new(z0, 0.0), z1)
    } else {
        let z1 = ((1.0 - s.z) / 2.0).sqrt();
        let z0 = Complex64::new(s.x, -s.y) / (2.0 * z1);
        Vector2::new(z0, Complex64::new(z1, 0.0))
    }
}

/// Inverse of [`to_sphere`] for unit vectors.
pub fn from_sphere(s: &Vector3<f64>) -> ProjectivePoint {
    let v = from_sphere_raw(s);
    ProjectivePoint::from_pair(v[0], v[1]).expect("sphere points map to nonzero vectors")
}

/// Which sheet family of the SL(2, C) involution locus to draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperboloidSheet {
    /// x1² + x2² + x3² − x4² = 1 → type I matrices (a, b; c, ā), b, c ∈ iR.
    Plus,
    /// −x1² − x2² − x3² + x4² = 1 → type II matrices (a, b; c, −ā), b, c ∈ R.
    Minus,
}

/// Closed-form parametrization of the two components of the involution
/// locus by their hyperboloid models.
pub fn embed_hyperboloid(sheet: HyperboloidSheet, x: [f64; 4]) -> Result<MobiusMap, MobiusError> {
    let [x1, x2, x3, x4] = x;
    let quad = x1 * x1 + x2 * x2 + x3 * x3 - x4 * x4;
    let (residual, matrix) = match sheet {
        HyperboloidSheet::Plus => (
            (quad - 1.0).abs(),
            Matrix2::new(
                Complex64::new(x1, x2),
                Complex64::new(0.0, x3 + x4),
                Complex64::new(0.0, x3 - x4),
                Complex64::new(x1, -x2),
            ),
        ),
        HyperboloidSheet::Minus => (
            (-quad - 1.0).abs(),
            Matrix2::new(
                Complex64::new(x1, x2),
                Complex64::new(x3 + x4, 0.0),
                Complex64::new(x3 - x4, 0.0),
                Complex64::new(-x1, x2),
            ),
        ),
    };
    if residual > 1e-10 {
        return Err(MobiusError::OffHyperboloid { residual });
    }
    MobiusMap::new(matrix)
}

/// A circle on the unit sphere: intersection with the plane
/// ⟨normal, s⟩ = offset, where ‖normal‖ = 1 and 0 ≤ offset < 1.
#[derive(Clone, Debug)]
pub struct FixedCircle {
    normal: Vector3<f64>,
    offset: f64,
}

impl FixedCircle {
    fn new(mut normal: Vector3<f64>, mut offset: f64) -> Self {
        normal.normalize_mut();
        if offset < 0.0 {
            normal = -normal;
            offset = -offset;
        }
        if offset < 1e-14 {
            // Great circle: the plane side is arbitrary, pick a canonical one.
            offset = offset.abs();
            let lead = normal
                .iter()
                .copied()
                .find(|c| c.abs() > PHASE_EPS)
                .unwrap_or(1.0);
            if lead < 0.0 {
                normal = -normal;
            }
        }
        FixedCircle { normal, offset }
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn center(&self) -> Vector3<f64> {
        self.normal * self.offset
    }

    pub fn radius(&self) -> f64 {
        (1.0 - self.offset * self.offset).max(0.0).sqrt()
    }

    /// Signed distance of a sphere point from the circle's plane.
    pub fn plane_distance(&self, s: &Vector3<f64>) -> f64 {
        self.normal.dot(s) - self.offset
    }

    /// Orthonormal basis of the circle's plane.
    fn plane_basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.normal;
        let helper = if n.x.abs() < 0.9 {
            Vector3::new(1.0, 0.0, 0.0)
        } else {
            Vector3::new(0.0, 1.0, 0.0)
        };
        let e1 = n.cross(&helper).normalize();
        let e2 = n.cross(&e1);
        (e1, e2)
    }

    /// `count` equally spaced points on the circle, as projective points.
    pub fn sample(&self, count: usize) -> Vec<ProjectivePoint> {
        let (e1, e2) = self.plane_basis();
        let c = self.center();
        let r = self.radius();
        (0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                from_sphere(&(c + (e1 * t.cos() + e2 * t.sin()) * r))
            })
            .collect()
    }
}

/// Fixed-point set of an anti-holomorphic involution: a circle for type I,
/// empty for type II.
#[derive(Clone, Debug)]
pub enum FixedPointSet {
    Circle(FixedCircle),
    Empty,
}

/// The involution transported to the sphere model.
fn sphere_map(inv: &AntiInvolution, s: &Vector3<f64>) -> Vector3<f64> {
    let v = from_sphere_raw(s);
    let w = inv.apply_raw(&v);
    let n = w.norm();
    let z0 = w[0] / n;
    let z1 = w[1] / n;
    let c = z0.conj() * z1;
    Vector3::new(2.0 * c.re, 2.0 * c.im, z0.norm_sqr() - z1.norm_sqr())
}

/// Gauss–Newton refinement of a fixed point of the involution on the
/// sphere, starting from `s0`. The zero set is a curve, so the Jacobian is
/// rank-deficient; a truncated pseudo-inverse walks to the nearest point of
/// the curve. Returns the refined point when the displacement drops below
/// 1e-11.
fn refine_fixed_point(inv: &AntiInvolution, s0: Vector3<f64>) -> Option<Vector3<f64>> {
    let mut s = s0.normalize();
    let mut res = (sphere_map(inv, &s) - s).norm();
    for _ in 0..60 {
        if res < 1e-11 {
            return Some(s);
        }
        // Tangent basis at s.
        let helper = if s.x.abs() < 0.9 {
            Vector3::new(1.0, 0.0, 0.0)
        } else {
            Vector3::new(0.0, 1.0, 0.0)
        };
        let t1 = s.cross(&helper).normalize();
        let t2 = s.cross(&t1);
        let g = sphere_map(inv, &s) - s;
        let h = 1e-6;
        let col = |t: &Vector3<f64>| {
            let sp = (s + t * h).normalize();
            let sm = (s - t * h).normalize();
            ((sphere_map(inv, &sp) - sp) - (sphere_map(inv, &sm) - sm)) / (2.0 * h)
        };
        let j1 = col(&t1);
        let j2 = col(&t2);
        // Least-squares step on the 3×2 system via its normal equations,
        // with Tikhonov-style truncation for the rank-1 case.
        let a11 = j1.dot(&j1);
        let a12 = j1.dot(&j2);
        let a22 = j2.dot(&j2);
        let b1 = -j1.dot(&g);
        let b2 = -j2.dot(&g);
        let trace = a11 + a22;
        let det = a11 * a22 - a12 * a12;
        let (d1, d2) = if det > 1e-10 * trace * trace {
            ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
        } else if trace > 0.0 {
            // Rank one: project onto the dominant direction.
            (b1 / trace * 2.0, b2 / trace * 2.0)
        } else {
            return None;
        };
        // Damped update.
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let cand = (s + (t1 * d1 + t2 * d2) * alpha).normalize();
            let cand_res = (sphere_map(inv, &cand) - cand).norm();
            if cand_res < res {
                s = cand;
                res = cand_res;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if res < 1e-11 {
        Some(s)
    } else {
        None
    }
}

/// Icosahedron vertices: the default start grid for the fixed-point search.
fn icosahedron_vertices() -> Vec<Vector3<f64>> {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut pts = Vec::with_capacity(12);
    for &a in &[1.0, -1.0] {
        for &b in &[phi, -phi] {
            pts.push(Vector3::new(0.0, a, b).normalize());
            pts.push(Vector3::new(a, b, 0.0).normalize());
            pts.push(Vector3::new(b, 0.0, a).normalize());
        }
    }
    pts
}

fn fit_circle(points: &[Vector3<f64>]) -> Option<FixedCircle> {
    if points.len() < 3 {
        return None;
    }
    let centroid = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    // Normal of the total-least-squares plane = eigenvector of the smallest
    // eigenvalue; the middle eigenvalue measures the in-plane spread.
    let mut idx = [0, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let spread = eig.eigenvalues[idx[1]];
    if spread < 1e-12 {
        return None; // points nearly collinear/coincident
    }
    let normal = eig.eigenvectors.column(idx[0]).into_owned();
    let offset = normal.dot(&centroid);
    Some(FixedCircle::new(normal, offset))
}

/// Compute the fixed-point set: the fixed circle for type I involutions
/// (located by damped Gauss–Newton from a sphere-covering start grid, then
/// fit by total least squares), or `Empty` for type II.
pub fn fixed_point_set(inv: &AntiInvolution) -> Result<FixedPointSet, MobiusError> {
    inv.validate(CLASSIFY_TOL)?;
    match inv.classify()? {
        InvolutionClass::TypeII => Ok(FixedPointSet::Empty),
        InvolutionClass::TypeI => {
            for starts in [icosahedron_vertices(), fibonacci_sphere(48)] {
                let mut found: Vec<Vector3<f64>> = Vec::new();
                for s0 in starts {
                    if let Some(p) = refine_fixed_point(inv, s0) {
                        if found.iter().all(|q| (q - p).norm() > 1e-8) {
                            found.push(p);
                        }
                    }
                }
                if let Some(circle) = fit_circle(&found) {
                    // Certify: all sampled circle points must be fixed.
                    let ok = circle
                        .sample(32)
                        .iter()
                        .all(|p| inv.apply(p).distance(p) < FIXED_POINT_TOL);
                    if ok {
                        return Ok(FixedPointSet::Circle(circle));
                    }
                }
            }
            Err(MobiusError::FixedPointSearchFailed)
        }
    }
}

/// The unique Möbius map sending [1:0], [0:1], [1:1] to the three given
/// (pairwise distinct) points.
fn mobius_through(
    p1: &ProjectivePoint,
    p2: &ProjectivePoint,
    p3: &ProjectivePoint,
) -> Result<MobiusMap, MobiusError> {
    let v1 = Vector2::new(p1.coords[0], p1.coords[1]);
    let v2 = Vector2::new(p2.coords[0], p2.coords[1]);
    let v3 = Vector2::new(p3.coords[0], p3.coords[1]);
    // Solve α v1 + β v2 = v3, then the columns are (α v1 | β v2).
    let m = Matrix2::from_columns(&[v1, v2]);
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.norm() < 1e-12 {
        return Err(MobiusError::SingularMatrix { det_norm: det.norm() });
    }
    let alpha = (v3[0] * m[(1, 1)] - v3[1] * m[(0, 1)]) / det;
    let beta = (m[(0, 0)] * v3[1] - m[(1, 0)] * v3[0]) / det;
    MobiusMap::new(Matrix2::from_columns(&[v1 * alpha, v2 * beta]))
}

/// Produce ψ with ψ ∘ ρ₀ ∘ ψ⁻¹ = inv, for a type I involution. ψ maps the
/// real circle to the fixed circle of `inv` through three matched points;
/// since a type I involution is determined by its fixed circle, matching
/// the circles matches the maps. ψ is not unique; any valid conjugator is
/// returned.
pub fn conjugator_to_standard(inv: &AntiInvolution) -> Result<MobiusMap, MobiusError> {
    inv.validate(CLASSIFY_TOL)?;
    if inv.classify()? == InvolutionClass::TypeII {
        return Err(MobiusError::TypeIIInput);
    }
    if inv.mobius_part.is_identity(1e-12) {
        return Ok(MobiusMap::identity());
    }
    let circle = match fixed_point_set(inv)? {
        FixedPointSet::Circle(c) => c,
        FixedPointSet::Empty => unreachable!("type I involutions have fixed circles"),
    };
    let f = circle.sample(3);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // Fixed points of ρ₀ matched to the sampled fixed points of inv.
    let r1 = ProjectivePoint::from_pair(one, zero).unwrap();
    let r2 = ProjectivePoint::from_pair(zero, one).unwrap();
    let r3 = ProjectivePoint::from_pair(one, one).unwrap();
    let to_fixed = mobius_through(&f[0], &f[1], &f[2])?;
    let to_real = mobius_through(&r1, &r2, &r3)?;
    let psi = to_fixed.compose(&to_real.inverse());
    // Certify the conjugation on the evaluation panel.
    let conj = AntiInvolution::standard_conjugation().conjugate_by(&psi);
    let residual = parameter_panel()
        .iter()
        .map(|p| conj.apply(p).distance(&inv.apply(p)))
        .fold(0.0, f64::max);
    if residual > FIXED_POINT_TOL {
        return Err(MobiusError::FixedPointSearchFailed);
    }
    Ok(psi)
}
