//! Affine quadrics as cotangent bundles of spheres.
//!
//! The smooth affine quadric V = {Σ z_j² = 1} in C^{n+1} maps to T*Sⁿ by
//! `z = x + iy ↦ (x/‖x‖, ‖x‖·y)`, matching the primitive y·dx with the
//! canonical λ_can = p·dq. The punctured cone V₀ = {Σ z_j² = 0} \ {0} maps
//! to the symplectization of the unit cotangent bundle by the analogous
//! `z ↦ (y/‖y‖, ‖y‖·x)`; under that identification multiplication by i
//! carries the log-radial field to the (rescaled) geodesic Reeb field.
//!
//! Sign conventions: the ambient symplectic form is Σ dy_j ∧ dx_j on
//! C^{n+1} and Σ dp_j ∧ dq_j on T*Sⁿ, so that both equal d(primitive)
//! with the primitives above.
//!
//! One normalization is deliberate: the Liouville direction reported by
//! [`reeb_liouville_fields`] is the log-radial generator ∂_t of the cone
//! scaling z ↦ e^t z, which reads (0, 2p) in cotangent coordinates (the
//! cone radius is ‖p‖ = ‖x‖², hence the factor 2 against the p·∂_p field
//! of λ_can). This is the scaling for which multiplication by i sends the
//! Liouville direction exactly onto the Reeb field.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::holcurve::AmbientInvolution;

/// Default step for central finite differences.
pub const FD_STEP: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum CotangentError {
    #[error("expected the {expected} variant of the affine quadric")]
    WrongVariant { expected: &'static str },
    #[error("point violates the affine quadric equation (residual {residual:.3e})")]
    OffQuadric { residual: f64 },
    #[error("the cone excludes the origin (|z| = {norm:.3e})")]
    ZeroConePoint { norm: f64 },
    #[error("base point is not on the unit sphere (defect {defect:.3e})")]
    BaseNotUnit { defect: f64 },
    #[error("covector is not tangent to the sphere (|<q,p>| = {defect:.3e})")]
    CovectorNotOrthogonal { defect: f64 },
    #[error("covector is not unit length (defect {defect:.3e})")]
    NotUnitCovector { defect: f64 },
    #[error("covector vanishes; the symplectization excludes the zero section")]
    ZeroCovector,
    #[error("involution has negative parity: it squares to -id on the affine quadric")]
    QuaternionicParity,
    #[error("primitive's differential is not anti-invariant (residual {residual:.3e})")]
    NotAntiSymplectic { residual: f64 },
    #[error("expected vectors of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl CotangentError {
    pub fn name(&self) -> &'static str {
        match self {
            CotangentError::WrongVariant { .. } => "WrongVariant",
            CotangentError::OffQuadric { .. } => "OffQuadric",
            CotangentError::ZeroConePoint { .. } => "ZeroConePoint",
            CotangentError::BaseNotUnit { .. } => "BaseNotUnit",
            CotangentError::CovectorNotOrthogonal { .. } => "CovectorNotOrthogonal",
            CotangentError::NotUnitCovector { .. } => "NotUnitCovector",
            CotangentError::ZeroCovector => "ZeroCovector",
            CotangentError::QuaternionicParity => "QuaternionicParity",
            CotangentError::NotAntiSymplectic { .. } => "NotAntiSymplectic",
            CotangentError::DimensionMismatch { .. } => "DimensionMismatch",
        }
    }
}

/// Which affine model the point lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadricVariant {
    /// Σ z² = 1 — symplectomorphic to T*Sⁿ.
    Smooth,
    /// Σ z² = 0, z ≠ 0 — the symplectization cone.
    Cone,
}

/// A point of an affine quadric in C^{n+1}.
#[derive(Clone, Debug)]
pub struct AffineQuadricPoint {
    z: DVector<Complex64>,
    variant: QuadricVariant,
}

impl AffineQuadricPoint {
    pub fn smooth(z: DVector<Complex64>) -> Result<Self, CotangentError> {
        let value: Complex64 = z.iter().map(|c| c * c).sum();
        let scale = z.norm_squared().max(1.0);
        let residual = (value - Complex64::new(1.0, 0.0)).norm();
        if residual > 1e-10 * scale {
            return Err(CotangentError::OffQuadric { residual });
        }
        Ok(AffineQuadricPoint {
            z,
            variant: QuadricVariant::Smooth,
        })
    }

    pub fn cone(z: DVector<Complex64>) -> Result<Self, CotangentError> {
        let norm = z.norm();
        if norm < 1e-10 {
            return Err(CotangentError::ZeroConePoint { norm });
        }
        let value: Complex64 = z.iter().map(|c| c * c).sum();
        let residual = value.norm();
        if residual > 1e-10 * norm * norm {
            return Err(CotangentError::OffQuadric { residual });
        }
        Ok(AffineQuadricPoint {
            z,
            variant: QuadricVariant::Cone,
        })
    }

    pub fn z(&self) -> &DVector<Complex64> {
        &self.z
    }

    pub fn variant(&self) -> QuadricVariant {
        self.variant
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn real_part(&self) -> DVector<f64> {
        self.z.map(|c| c.re)
    }

    pub fn imag_part(&self) -> DVector<f64> {
        self.z.map(|c| c.im)
    }
}

/// A point of T*Sⁿ: unit base point q and a covector p tangent to the
/// sphere at q (any length; ‖p‖ = 1 singles out the unit cotangent bundle,
/// ‖p‖ > 0 the symplectization).
#[derive(Clone, Debug)]
pub struct CotangentState {
    q: DVector<f64>,
    p: DVector<f64>,
}

impl CotangentState {
    pub fn new(q: DVector<f64>, p: DVector<f64>) -> Result<Self, CotangentError> {
        if q.len() != p.len() {
            return Err(CotangentError::DimensionMismatch {
                expected: q.len(),
                got: p.len(),
            });
        }
        let defect = (q.norm() - 1.0).abs();
        if defect > 1e-10 {
            return Err(CotangentError::BaseNotUnit { defect });
        }
        let ortho = q.dot(&p).abs();
        if ortho > 1e-10 {
            return Err(CotangentError::CovectorNotOrthogonal { defect: ortho });
        }
        Ok(CotangentState { q, p })
    }

    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    pub fn p(&self) -> &DVector<f64> {
        &self.p
    }

    /// Ambient dimension n+1 (the sphere is Sⁿ).
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn covector_norm(&self) -> f64 {
        self.p.norm()
    }

    pub fn require_unit_covector(&self) -> Result<(), CotangentError> {
        let defect = (self.covector_norm() - 1.0).abs();
        if defect > 1e-10 {
            return Err(CotangentError::NotUnitCovector { defect });
        }
        Ok(())
    }
}

/// A tangent vector of T*Sⁿ (or of its symplectization) in ambient
/// coordinates.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub dq: DVector<f64>,
    pub dp: DVector<f64>,
}

impl TangentVector {
    pub fn new(dq: DVector<f64>, dp: DVector<f64>) -> Self {
        assert_eq!(dq.len(), dp.len());
        TangentVector { dq, dp }
    }

    pub fn norm(&self) -> f64 {
        (self.dq.norm_squared() + self.dp.norm_squared()).sqrt()
    }

    pub fn sub(&self, other: &TangentVector) -> TangentVector {
        TangentVector {
            dq: &self.dq - &other.dq,
            dp: &self.dp - &other.dp,
        }
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        TangentVector {
            dq: &self.dq * s,
            dp: &self.dp * s,
        }
    }
}

/// Σ dp_j ∧ dq_j evaluated on two tangent vectors.
pub fn symplectic_form_cotangent(v: &TangentVector, w: &TangentVector) -> f64 {
    v.dp.dot(&w.dq) - w.dp.dot(&v.dq)
}

/// Σ dy_j ∧ dx_j on ambient complex tangents (dx = Re, dy = Im).
pub fn symplectic_form_ambient(v: &DVector<Complex64>, w: &DVector<Complex64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..v.len() {
        acc += v[j].im * w[j].re - w[j].im * v[j].re;
    }
    acc
}

// ---------------------------------------------------------------------------
// The smooth quadric <-> T*Sⁿ correspondence.
// ---------------------------------------------------------------------------

/// The raw map (x, y) ↦ (x/‖x‖, ‖x‖·y), with no quadric hygiene; used for
/// finite-difference probes.
pub fn smooth_map_raw(x: &DVector<f64>, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let m = x.norm();
    (x / m, y * m)
}

/// z = x + iy on {Σz² = 1} to (q, p) = (x/‖x‖, ‖x‖·y).
pub fn quadric_to_cotangent(z: &AffineQuadricPoint) -> Result<CotangentState, CotangentError> {
    if z.variant() != QuadricVariant::Smooth {
        return Err(CotangentError::WrongVariant { expected: "smooth" });
    }
    let (q, p) = smooth_map_raw(&z.real_part(), &z.imag_part());
    CotangentState::new(q, p)
}

/// Inverse: x = √(1+‖y‖²)-scaled base so that ‖x‖² − ‖y‖² = 1 with
/// x ∥ q and y ∥ p.
pub fn cotangent_to_quadric(s: &CotangentState) -> AffineQuadricPoint {
    let p2 = s.p.norm_squared();
    let m2 = 0.5 * (1.0 + (1.0 + 4.0 * p2).sqrt());
    let m = m2.sqrt();
    let x = &s.q * m;
    // Re-orthogonalize the covector against the base direction so the
    // output satisfies the quadric equation to full precision even when
    // the input carries the allowed 1e-10 slack.
    let mut p = s.p.clone();
    p -= &s.q * s.q.dot(&p);
    let y = p / m;
    let z = DVector::from_fn(x.len(), |j, _| Complex64::new(x[j], y[j]));
    AffineQuadricPoint::smooth(z).expect("constructed point satisfies the equation")
}

/// Analytic differential of the smooth correspondence at z, applied to an
/// ambient perturbation dz (not necessarily tangent to the quadric).
pub fn smooth_differential(z: &AffineQuadricPoint, dz: &DVector<Complex64>) -> TangentVector {
    let x = z.real_part();
    let y = z.imag_part();
    let dx = dz.map(|c| c.re);
    let dy = dz.map(|c| c.im);
    let m = x.norm();
    let xdx = x.dot(&dx);
    let dq = &dx / m - &x * (xdx / (m * m * m));
    let dp = &y * (xdx / m) + &dy * m;
    TangentVector::new(dq, dp)
}

/// Central finite-difference differential of the raw smooth map.
pub fn smooth_differential_fd(
    x: &DVector<f64>,
    y: &DVector<f64>,
    dx: &DVector<f64>,
    dy: &DVector<f64>,
    h: f64,
) -> TangentVector {
    let (qp, pp) = smooth_map_raw(&(x + dx * h), &(y + dy * h));
    let (qm, pm) = smooth_map_raw(&(x - dx * h), &(y - dy * h));
    TangentVector::new((qp - qm) / (2.0 * h), (pp - pm) / (2.0 * h))
}

/// Project an ambient perturbation onto the tangent space of the affine
/// quadric at z: kill the components along the (mutually orthogonal)
/// gradients of Re Σz² and Im Σz².
pub fn project_to_quadric_tangent(
    z: &AffineQuadricPoint,
    dz: &DVector<Complex64>,
) -> DVector<Complex64> {
    let x = z.real_part();
    let y = z.imag_part();
    let dx = dz.map(|c| c.re);
    let dy = dz.map(|c| c.im);
    // Gradients in (dx, dy) coordinates: g1 = (x, -y), g2 = (y, x),
    // both of squared norm ‖x‖² + ‖y‖².
    let norm2 = x.norm_squared() + y.norm_squared();
    let c1 = (x.dot(&dx) - y.dot(&dy)) / norm2;
    let c2 = (y.dot(&dx) + x.dot(&dy)) / norm2;
    let new_dx = &dx - &x * c1 - &y * c2;
    let new_dy = &dy + &y * c1 - &x * c2;
    DVector::from_fn(dz.len(), |j, _| Complex64::new(new_dx[j], new_dy[j]))
}

// ---------------------------------------------------------------------------
// Induced involutions.
// ---------------------------------------------------------------------------

/// Transport of the real structure z ↦ P·conj(z) through the cotangent
/// identification: (q, p) ↦ (Pq, −Pp). Requires positive parity, since
/// negative-parity P squares to −id on vectors and does not define an
/// involution of the affine quadric.
pub fn induced_involution(
    rho: &AmbientInvolution,
    s: &CotangentState,
) -> Result<CotangentState, CotangentError> {
    if rho.len() != s.len() {
        return Err(CotangentError::DimensionMismatch {
            expected: rho.len(),
            got: s.len(),
        });
    }
    if rho.parity() < 0.0 {
        return Err(CotangentError::QuaternionicParity);
    }
    let m = rho.matrix();
    CotangentState::new(&m * &s.q, -(&m * &s.p))
}

/// The exact linear differential [[P, 0], [0, −P]] of the induced
/// involution, as a 2(n+1)×2(n+1) block matrix in (dq, dp) coordinates.
pub fn induced_involution_differential(rho: &AmbientInvolution) -> DMatrix<f64> {
    let m = rho.matrix();
    let n = m.nrows();
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = m[(i, j)];
            d[(i + n, j + n)] = -m[(i, j)];
        }
    }
    d
}

/// The canonical pairing matrix of Σ dp ∧ dq in (dq, dp) block coordinates.
pub fn canonical_pairing_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i + n)] = -1.0;
        m[(i + n, i)] = 1.0;
    }
    m
}

// ---------------------------------------------------------------------------
// One-forms as evaluators, and the anti-invariant averaging.
// ---------------------------------------------------------------------------

type FormEval = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type MapEval = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type JacEval = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// A differential 1-form given by its coefficient covector at each point.
#[derive(Clone)]
pub struct OneForm {
    eval: FormEval,
}

impl std::fmt::Debug for OneForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("OneForm(..)")
    }
}

impl OneForm {
    pub fn new(eval: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static) -> Self {
        OneForm {
            eval: Arc::new(eval),
        }
    }

    /// λ_can = p·dq on R^{2m} points stored as (q, p) concatenated.
    pub fn canonical(m: usize) -> Self {
        OneForm::new(move |x: &DVector<f64>| {
            let mut out = DVector::zeros(2 * m);
            for j in 0..m {
                out[j] = x[m + j];
            }
            out
        })
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.eval)(x)
    }

    /// Pair with a tangent vector.
    pub fn apply(&self, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.eval(x).dot(v)
    }

    /// Finite-difference exterior derivative: the antisymmetric matrix
    /// Ω_ij = ∂_i λ_j − ∂_j λ_i.
    pub fn exterior_derivative(&self, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
        let n = x.len();
        // rows: ∂_i λ(x)
        let mut grad = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let d = (self.eval(&xp) - self.eval(&xm)) / (2.0 * h);
            for j in 0..n {
                grad[(i, j)] = d[j];
            }
        }
        let mut omega = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                omega[(i, j)] = grad[(i, j)] - grad[(j, i)];
            }
        }
        omega
    }
}

/// A smooth self-map with (optionally analytic) Jacobian, used as the
/// involution argument of the averaging operation.
#[derive(Clone)]
pub struct InvolutionMap {
    map: MapEval,
    jac: Option<JacEval>,
}

impl InvolutionMap {
    pub fn new(map: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static) -> Self {
        InvolutionMap {
            map: Arc::new(map),
            jac: None,
        }
    }

    pub fn with_jacobian(
        map: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        jac: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        InvolutionMap {
            map: Arc::new(map),
            jac: Some(Arc::new(jac)),
        }
    }

    /// A linear involution given by its matrix.
    pub fn linear(m: DMatrix<f64>) -> Self {
        let mc = m.clone();
        InvolutionMap {
            map: Arc::new(move |x: &DVector<f64>| &m * x),
            jac: Some(Arc::new(move |_: &DVector<f64>| mc.clone())),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.map)(x)
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        if let Some(jac) = &self.jac {
            return jac(x);
        }
        let n = x.len();
        let h = 1e-5;
        let mut j = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut xp = x.clone();
            xp[k] += h;
            let mut xm = x.clone();
            xm[k] -= h;
            let col = (self.apply(&xp) - self.apply(&xm)) / (2.0 * h);
            for r in 0..n {
                j[(r, k)] = col[r];
            }
        }
        j
    }
}

/// ρ*λ as an evaluator: (ρ*λ)(x) = Dρ(x)ᵀ · λ(ρ(x)).
pub fn pullback_one_form(lambda: &OneForm, rho: &InvolutionMap) -> OneForm {
    let lambda = lambda.clone();
    let rho = rho.clone();
    OneForm::new(move |x: &DVector<f64>| {
        let image = rho.apply(x);
        rho.jacobian(x).transpose() * lambda.eval(&image)
    })
}

/// The anti-invariant part λ̃ = ½(λ − ρ*λ). Requires ρ*dλ = −dλ, checked
/// by finite differences at the supplied sample points; then dλ̃ = dλ and
/// ρ*λ̃ = −λ̃ hold identically.
pub fn anti_average_primitive(
    lambda: &OneForm,
    rho: &InvolutionMap,
    samples: &[DVector<f64>],
) -> Result<OneForm, CotangentError> {
    for x in samples {
        let omega = lambda.exterior_derivative(x, FD_STEP);
        let image = rho.apply(x);
        let omega_image = lambda.exterior_derivative(&image, FD_STEP);
        let d = rho.jacobian(x);
        let pulled = d.transpose() * omega_image * &d;
        let residual = (&pulled + &omega).norm() / omega.norm().max(1.0);
        if residual > 1e-4 {
            return Err(CotangentError::NotAntiSymplectic { residual });
        }
    }
    let lam = lambda.clone();
    let pulled = pullback_one_form(lambda, rho);
    Ok(OneForm::new(move |x: &DVector<f64>| {
        (lam.eval(x) - pulled.eval(x)) * 0.5
    }))
}

// ---------------------------------------------------------------------------
// The cone and its contact data.
// ---------------------------------------------------------------------------

/// Cone point z = x + iy (with ‖x‖ = ‖y‖, x ⊥ y) to the symplectization
/// point (q, p) = (y/‖y‖, ‖y‖·x); the covector length ‖p‖ = ‖x‖² is the
/// cone radius squared.
pub fn cone_to_symplectization(z: &AffineQuadricPoint) -> Result<CotangentState, CotangentError> {
    if z.variant() != QuadricVariant::Cone {
        return Err(CotangentError::WrongVariant { expected: "cone" });
    }
    let x = z.real_part();
    let y = z.imag_part();
    let m = y.norm();
    CotangentState::new(&y / m, &x * m)
}

/// Inverse of [`cone_to_symplectization`].
pub fn symplectization_to_cone(s: &CotangentState) -> Result<AffineQuadricPoint, CotangentError> {
    let r = s.p.norm();
    if r < 1e-12 {
        return Err(CotangentError::ZeroCovector);
    }
    let m = r.sqrt();
    let x = &s.p / m;
    let mut q = s.q.clone();
    // hygiene against the 1e-10 slack in the state invariants
    q -= &x * (x.dot(&q) / x.norm_squared());
    q /= q.norm();
    let y = &q * m;
    let z = DVector::from_fn(x.len(), |j, _| Complex64::new(x[j], y[j]));
    AffineQuadricPoint::cone(z)
}

/// Differential of the cone map at z, applied to an ambient perturbation.
pub fn cone_differential(z: &AffineQuadricPoint, dz: &DVector<Complex64>) -> TangentVector {
    let x = z.real_part();
    let y = z.imag_part();
    let dx = dz.map(|c| c.re);
    let dy = dz.map(|c| c.im);
    let m = y.norm();
    let ydy = y.dot(&dy);
    let dq = &dy / m - &y * (ydy / (m * m * m));
    let dp = &x * (ydy / m) + &dx * m;
    TangentVector::new(dq, dp)
}

/// Inverse differential: tangent (dq, dp) at a symplectization point back
/// to the ambient perturbation of the cone point.
pub fn cone_differential_inverse(s: &CotangentState, v: &TangentVector) -> DVector<Complex64> {
    let r = s.p.norm();
    let m = r.sqrt();
    let dr = s.p.dot(&v.dp) / r;
    let dm = dr / (2.0 * m);
    let dx = &v.dp / m - &s.p * (dm / (m * m));
    let dy = &s.q * dm + &v.dq * m;
    DVector::from_fn(dx.len(), |j, _| Complex64::new(dx[j], dy[j]))
}

/// Multiplication by i on the cone, transported to the symplectization:
/// pull the tangent back, multiply by i, push forward. Closed-form, exact.
pub fn cone_transport_j(s: &CotangentState, v: &TangentVector) -> Result<TangentVector, CotangentError> {
    let z = symplectization_to_cone(s)?;
    let dz = cone_differential_inverse(s, v);
    let idz = dz.map(|c| c * Complex64::new(0.0, 1.0));
    Ok(cone_differential(&z, &idz))
}

/// Same transport with the differentials replaced by central finite
/// differences of the raw coordinate formulas; an independent check on the
/// closed form.
pub fn cone_transport_j_fd(
    s: &CotangentState,
    v: &TangentVector,
    h: f64,
) -> Result<TangentVector, CotangentError> {
    let r = s.p.norm();
    if r < 1e-12 {
        return Err(CotangentError::ZeroCovector);
    }
    // raw inverse: (q, p) -> x + iy with m = sqrt(|p|), x = p/m, y = m q
    let inverse_raw = |q: &DVector<f64>, p: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        let m = p.norm().sqrt();
        (p / m, q * m)
    };
    let qp = &s.q + &v.dq * h;
    let pp = &s.p + &v.dp * h;
    let qm = &s.q - &v.dq * h;
    let pm = &s.p - &v.dp * h;
    let (xp, yp) = inverse_raw(&qp, &pp);
    let (xm, ym) = inverse_raw(&qm, &pm);
    let dx = (xp - xm) / (2.0 * h);
    let dy = (yp - ym) / (2.0 * h);
    // multiply by i: (dx, dy) -> (-dy, dx)
    let (jdx, jdy) = (-dy, dx);
    // base cone point
    let m = r.sqrt();
    let x0 = &s.p / m;
    let y0 = &s.q * m;
    let forward_raw = |x: &DVector<f64>, y: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        let my = y.norm();
        (y / my, x * my)
    };
    let (qf, pf) = forward_raw(&(&x0 + &jdx * h), &(&y0 + &jdy * h));
    let (qb, pb) = forward_raw(&(&x0 - &jdx * h), &(&y0 - &jdy * h));
    Ok(TangentVector::new((qf - qb) / (2.0 * h), (pf - pb) / (2.0 * h)))
}

/// The geodesic Reeb field lift at a symplectization point: (p/r, −r·q).
/// At r = 1 this is the Reeb field of λ_can on the unit cotangent bundle.
pub fn reeb_field(s: &CotangentState) -> TangentVector {
    let r = s.p.norm();
    TangentVector::new(&s.p / r, -(&s.q * r))
}

/// The log-radial Liouville direction at a symplectization point: (0, 2p)
/// (see the module docs for the normalization).
pub fn liouville_field(s: &CotangentState) -> TangentVector {
    TangentVector::new(DVector::zeros(s.len()), &s.p * 2.0)
}

/// Contact-geometric data at a point of the unit cotangent bundle.
#[derive(Debug)]
pub struct ContactData {
    point: CotangentState,
    reeb: TangentVector,
    liouville: TangentVector,
    contact_basis: Vec<TangentVector>,
}

impl ContactData {
    pub fn point(&self) -> &CotangentState {
        &self.point
    }

    pub fn reeb(&self) -> &TangentVector {
        &self.reeb
    }

    pub fn liouville(&self) -> &TangentVector {
        &self.liouville
    }

    /// Basis of the contact hyperplane ξ = ker(p·dq) ∩ T(ST*Sⁿ).
    pub fn contact_basis(&self) -> &[TangentVector] {
        &self.contact_basis
    }

    /// α = p·dq evaluated on a tangent vector at this point.
    pub fn alpha(&self, v: &TangentVector) -> f64 {
        self.point.p.dot(&v.dq)
    }

    /// The transported complex structure acting on a tangent vector.
    pub fn apply_j(&self, v: &TangentVector) -> TangentVector {
        cone_transport_j(&self.point, v).expect("unit covectors are nonzero")
    }
}

/// Reeb/Liouville/contact-plane data at a point of ST*Sⁿ.
pub fn reeb_liouville_fields(s: &CotangentState) -> Result<ContactData, CotangentError> {
    s.require_unit_covector()?;
    let reeb = reeb_field(s);
    let liouville = liouville_field(s);
    // Orthonormal completion of {q, p} spans the contact directions.
    let n = s.len();
    let mut frame: Vec<DVector<f64>> = vec![s.q.clone(), s.p.clone()];
    let mut basis = Vec::new();
    for k in 0..n {
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        for e in &frame {
            let c = e.dot(&v);
            v -= e * c;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            let e = v / norm;
            basis.push(TangentVector::new(e.clone(), DVector::zeros(n)));
            basis.push(TangentVector::new(DVector::zeros(n), e.clone()));
            frame.push(e);
        }
    }
    Ok(ContactData {
        point: s.clone(),
        reeb,
        liouville,
        contact_basis: basis,
    })
}
