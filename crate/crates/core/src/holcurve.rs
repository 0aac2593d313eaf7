//! Real structures acting on parametrized lines.
//!
//! An ambient anti-holomorphic involution `ρ(z) = P·conj(z)` (P a signed
//! permutation) acts on parametrized degree-1 rational curves by
//! `I(u) = ρ ∘ u ∘ ρ₀`, where ρ₀ conjugates the CP¹ parameter. For the
//! line `u([λ:μ]) = λp + μq` this gives `I(u)([λ:μ]) = λ·ρ(p) + μ·ρ(q)`,
//! again a line. A line is *pseudo-fixed* when I(u) = u∘φ for some Möbius
//! map φ — equivalently, when the spans agree — and *fixed* when φ = id.
//! The composite φ∘ρ₀ is an anti-involution of the parameter sphere whose
//! type decides whether the parametrization can be repaired to an honestly
//! fixed one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::mobius::{
    classify_pair, conjugator_to_standard, parameter_panel, AntiInvolution, InvolutionClass,
    MobiusError, MobiusMap, ProjectivePoint,
};
use crate::quadric::{make_line, Decoration, Hyperplane, LineOnQuadric, Quadric, QuadricError};

/// Projector distance below which two 2-planes count as equal.
pub const PLANE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum HolError {
    #[error("index map is not an involutive permutation")]
    NotAnInvolution,
    #[error("sign pattern is inconsistent: all products sign(i)*sign(perm(i)) must agree")]
    InconsistentSigns,
    #[error("free (negative-parity) involutions need an even number of coordinates, got {len}")]
    OddDimensionForFreeInvolution { len: usize },
    #[error("involution does not preserve the quadric form (residual {residual:.3e})")]
    QuadricNotPreserved { residual: f64 },
    #[error("no fixed parametrization exists for a type II pseudo-fixed line")]
    TypeIIInput,
    #[error("normalization requires a pseudo-fixed input")]
    NotPseudoFixedInput,
    #[error("normalized line fails the fixed-point residual ({residual:.3e})")]
    NormalizationFailed { residual: f64 },
    #[error("the line lies inside the hyperplane section")]
    ContainedInSigma,
    #[error("randomized search exhausted {attempts} attempts without an invariant line")]
    SearchFailed { attempts: usize },
    #[error(transparent)]
    Quadric(#[from] QuadricError),
    #[error(transparent)]
    Point(#[from] MobiusError),
}

impl HolError {
    pub fn name(&self) -> &'static str {
        match self {
            HolError::NotAnInvolution => "NotAnInvolution",
            HolError::InconsistentSigns => "InconsistentSigns",
            HolError::OddDimensionForFreeInvolution { .. } => "OddDimensionForFreeInvolution",
            HolError::QuadricNotPreserved { .. } => "QuadricNotPreserved",
            HolError::TypeIIInput => "TypeIIInput",
            HolError::NotPseudoFixedInput => "NotPseudoFixedInput",
            HolError::NormalizationFailed { .. } => "NormalizationFailed",
            HolError::ContainedInSigma => "ContainedInSigma",
            HolError::SearchFailed { .. } => "SearchFailed",
            HolError::Quadric(e) => e.name(),
            HolError::Point(e) => e.name(),
        }
    }
}

/// Anti-holomorphic involution of ambient projective space given by a
/// signed coordinate permutation: ρ(z)_i = sign_i · conj(z_{perm(i)}).
///
/// The matrix P then satisfies P² = s·I with s = sign_i·sign_{perm(i)}
/// constant; both signs of s give ρ² = id projectively. s = −1 forces a
/// free (fixed-point-free) action and needs even length.
#[derive(Clone, Debug)]
pub struct AmbientInvolution {
    perm: Vec<usize>,
    signs: Vec<f64>,
    parity: f64,
}

impl AmbientInvolution {
    pub fn new(perm: Vec<usize>, signs: Vec<i32>) -> Result<Self, HolError> {
        let len = perm.len();
        if signs.len() != len || len == 0 {
            return Err(HolError::NotAnInvolution);
        }
        if perm.iter().any(|&j| j >= len) {
            return Err(HolError::NotAnInvolution);
        }
        let mut seen = vec![false; len];
        for &j in &perm {
            if seen[j] {
                return Err(HolError::NotAnInvolution);
            }
            seen[j] = true;
        }
        if (0..len).any(|i| perm[perm[i]] != i) {
            return Err(HolError::NotAnInvolution);
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(HolError::InconsistentSigns);
        }
        let signs: Vec<f64> = signs.iter().map(|&s| s as f64).collect();
        let parity = signs[0] * signs[perm[0]];
        if (0..len).any(|i| (signs[i] * signs[perm[i]] - parity).abs() > 0.0) {
            return Err(HolError::InconsistentSigns);
        }
        Ok(AmbientInvolution { perm, signs, parity })
    }

    /// Plain coordinate conjugation.
    pub fn conjugation(len: usize) -> Self {
        AmbientInvolution {
            perm: (0..len).collect(),
            signs: vec![1.0; len],
            parity: 1.0,
        }
    }

    /// Conjugation composed with the given diagonal signs.
    pub fn diagonal(signs: Vec<i32>) -> Result<Self, HolError> {
        let perm = (0..signs.len()).collect();
        AmbientInvolution::new(perm, signs)
    }

    /// Draw a random signed involutive permutation with the requested
    /// parity. Positive parity mixes 2-cycles and fixed points; negative
    /// parity is a perfect matching with opposite signs in each pair.
    pub fn random(rng: &mut impl Rng, len: usize, negative_parity: bool) -> Result<Self, HolError> {
        if negative_parity && len % 2 != 0 {
            return Err(HolError::OddDimensionForFreeInvolution { len });
        }
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(rng);
        let mut perm = vec![0usize; len];
        let mut signs = vec![0i32; len];
        let mut k = 0;
        while k < len {
            let pair_up = negative_parity || (k + 1 < len && rng.gen::<bool>());
            if pair_up {
                let (i, j) = (order[k], order[k + 1]);
                perm[i] = j;
                perm[j] = i;
                let s = if rng.gen::<bool>() { 1 } else { -1 };
                signs[i] = s;
                signs[j] = if negative_parity { -s } else { s };
                k += 2;
            } else {
                let i = order[k];
                perm[i] = i;
                signs[i] = if rng.gen::<bool>() { 1 } else { -1 };
                k += 1;
            }
        }
        AmbientInvolution::new(perm, signs)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// +1.0 or −1.0: the scalar s with P² = s·I.
    pub fn parity(&self) -> f64 {
        self.parity
    }

    /// The signed permutation matrix P (real entries).
    pub fn matrix(&self) -> DMatrix<f64> {
        let len = self.len();
        let mut m = DMatrix::zeros(len, len);
        for i in 0..len {
            m[(i, self.perm[i])] = self.signs[i];
        }
        m
    }

    /// ρ applied to a raw coordinate vector: (P·conj(z))_i.
    pub fn apply_vec(&self, z: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.len(),
            (0..self.len()).map(|i| z[self.perm[i]].conj() * self.signs[i]),
        )
    }

    pub fn apply(&self, p: &ProjectivePoint) -> ProjectivePoint {
        ProjectivePoint::new(self.apply_vec(p.coords())).expect("signed permutations are invertible")
    }

    /// Relative deviation of conj(PᵀBP) from a scalar multiple of B; zero
    /// exactly when ρ maps the quadric {zᵀBz = 0} to itself.
    pub fn preservation_residual(&self, quadric: &Quadric) -> f64 {
        let p = self.matrix().map(|x| Complex64::new(x, 0.0));
        let m = (p.transpose() * quadric.form() * &p).map(|z| z.conj());
        let b = quadric.form();
        // Scale chosen at B's largest entry.
        let mut best = (0usize, 0usize);
        let mut best_norm = 0.0;
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                if b[(i, j)].norm() > best_norm {
                    best_norm = b[(i, j)].norm();
                    best = (i, j);
                }
            }
        }
        let scale = m[best] / b[best];
        (m - b * scale).norm() / b.norm()
    }

    pub fn check_preserves(&self, quadric: &Quadric) -> Result<(), HolError> {
        if self.len() != quadric.coord_len() {
            return Err(HolError::Quadric(QuadricError::DimensionMismatch {
                expected: quadric.coord_len(),
                got: self.len(),
            }));
        }
        let residual = self.preservation_residual(quadric);
        if residual > 1e-12 {
            return Err(HolError::QuadricNotPreserved { residual });
        }
        Ok(())
    }
}

/// A degree-1 parametrized rational curve [λ:μ] ↦ λp + μq with an ordered
/// spanning pair.
#[derive(Clone, Debug)]
pub struct RationalLineMap {
    line: LineOnQuadric,
}

impl RationalLineMap {
    pub fn new(line: LineOnQuadric) -> Self {
        RationalLineMap { line }
    }

    pub fn line(&self) -> &LineOnQuadric {
        &self.line
    }

    pub fn p(&self) -> &ProjectivePoint {
        self.line.p()
    }

    pub fn q(&self) -> &ProjectivePoint {
        self.line.q()
    }

    pub fn eval(&self, lambda: Complex64, mu: Complex64) -> Result<ProjectivePoint, MobiusError> {
        self.line.point_at(lambda, mu)
    }

    /// Hermitian projector onto the spanning 2-plane; the basis-free
    /// fingerprint of the unparametrized line.
    pub fn span_projector(&self) -> DMatrix<Complex64> {
        span_projector_of(self.p().coords(), self.q().coords())
    }

    /// Projector distance to another line's span.
    pub fn span_distance(&self, other: &RationalLineMap) -> f64 {
        (self.span_projector() - other.span_projector()).norm()
    }

    /// u ∘ ψ: reparametrize by a Möbius map. For ψ = (a, b; c, d) the new
    /// spanning pair is (a·p + c·q, b·p + d·q). Revalidated on the quadric.
    pub fn reparametrize(
        &self,
        quadric: &Quadric,
        psi: &MobiusMap,
    ) -> Result<RationalLineMap, HolError> {
        let m = psi.matrix();
        let p = self.p().coords();
        let q = self.q().coords();
        let new_p = ProjectivePoint::new(p * m[(0, 0)] + q * m[(1, 0)])?;
        let new_q = ProjectivePoint::new(p * m[(0, 1)] + q * m[(1, 1)])?;
        Ok(RationalLineMap::new(make_line(quadric, &new_p, &new_q)?))
    }
}

fn span_projector_of(p: &DVector<Complex64>, q: &DVector<Complex64>) -> DMatrix<Complex64> {
    let e1 = p / Complex64::new(p.norm(), 0.0);
    let mut w = q - &e1 * e1.dotc(q);
    let wn = w.norm();
    w /= Complex64::new(wn, 0.0);
    let n = p.len();
    let mut proj = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            proj[(i, j)] = e1[i] * e1[j].conj() + w[i] * w[j].conj();
        }
    }
    proj
}

/// Coordinates (x, y) of z in the spanning basis: z = x·p + y·q, solved on
/// the orthogonal projection onto the span.
fn coords_in_span(
    p: &DVector<Complex64>,
    q: &DVector<Complex64>,
    z: &DVector<Complex64>,
) -> (Complex64, Complex64) {
    let e1 = p / Complex64::new(p.norm(), 0.0);
    let q_on_e1 = e1.dotc(q);
    let w = q - &e1 * q_on_e1;
    let wn = Complex64::new(w.norm(), 0.0);
    let e2 = w / wn;
    let y = e2.dotc(z) / wn;
    let x = (e1.dotc(z) - y * q_on_e1) / Complex64::new(p.norm(), 0.0);
    (x, y)
}

/// The induced involution on parametrized lines: I(u) = ρ ∘ u ∘ ρ₀, which
/// maps the spanning pair (p, q) to (ρ(p), ρ(q)).
pub fn involute_line(
    quadric: &Quadric,
    u: &RationalLineMap,
    rho: &AmbientInvolution,
) -> Result<RationalLineMap, HolError> {
    rho.check_preserves(quadric)?;
    let new_p = ProjectivePoint::new(rho.apply_vec(u.p().coords()))?;
    let new_q = ProjectivePoint::new(rho.apply_vec(u.q().coords()))?;
    Ok(RationalLineMap::new(make_line(quadric, &new_p, &new_q)?))
}

/// Outcome of pseudo-fixed-point detection.
#[derive(Clone, Debug)]
pub enum PseudoFixResult {
    /// I(u) = u with the identical parametrization.
    Fixed,
    /// I(u) = u∘φ for a non-identity Möbius map φ; `class` is the type of
    /// the anti-involution φ∘ρ₀ on the parameter sphere.
    PseudoFixed {
        phi: MobiusMap,
        class: InvolutionClass,
    },
    /// The image lines differ: no φ exists.
    NotPseudoFixed,
}

impl PseudoFixResult {
    pub fn status_str(&self) -> &'static str {
        match self {
            PseudoFixResult::Fixed => "Fixed",
            PseudoFixResult::PseudoFixed { .. } => "PseudoFixed",
            PseudoFixResult::NotPseudoFixed => "NotPseudoFixed",
        }
    }
}

/// Decide whether u is fixed, pseudo-fixed, or neither under I, and
/// recover the reparametrization φ in the pseudo-fixed case.
///
/// The spans of u and I(u) are compared by Hermitian projectors; when they
/// agree, φ is read off by expressing the raw image vectors ρ(p), ρ(q) in
/// the (p, q) basis — raw, because the two columns of φ must share a
/// single overall scalar. The candidate is certified against I(u) on the
/// 8-point parameter panel before being reported.
pub fn detect_pseudo_fixed(
    quadric: &Quadric,
    u: &RationalLineMap,
    rho: &AmbientInvolution,
) -> Result<PseudoFixResult, HolError> {
    let iu = involute_line(quadric, u, rho)?;
    if u.span_distance(&iu) >= PLANE_TOL {
        return Ok(PseudoFixResult::NotPseudoFixed);
    }
    let p = u.p().coords();
    let q = u.q().coords();
    let rho_p = rho.apply_vec(p);
    let rho_q = rho.apply_vec(q);
    let (x1, y1) = coords_in_span(p, q, &rho_p);
    let (x2, y2) = coords_in_span(p, q, &rho_q);
    let phi = match MobiusMap::from_entries(x1, x2, y1, y2) {
        Ok(m) => m,
        Err(_) => return Ok(PseudoFixResult::NotPseudoFixed),
    };
    // Certify I(u) = u∘φ on the parameter panel.
    let m = phi.matrix();
    let mut residual = 0.0f64;
    for t in parameter_panel() {
        let (lambda, mu) = (t.coords()[0], t.coords()[1]);
        let left = ProjectivePoint::new(&rho_p * lambda + &rho_q * mu)?;
        let (pl, pm) = (
            m[(0, 0)] * lambda + m[(0, 1)] * mu,
            m[(1, 0)] * lambda + m[(1, 1)] * mu,
        );
        let right = ProjectivePoint::new(p * pl + q * pm)?;
        residual = residual.max(left.distance(&right));
    }
    if residual >= PLANE_TOL {
        return Ok(PseudoFixResult::NotPseudoFixed);
    }
    if phi.is_identity(1e-8) {
        return Ok(PseudoFixResult::Fixed);
    }
    match classify_pair(&phi) {
        Ok(class) => Ok(PseudoFixResult::PseudoFixed { phi, class }),
        // A φ that fails the involution identity cannot come from a
        // genuine pseudo-fixed line.
        Err(_) => Ok(PseudoFixResult::NotPseudoFixed),
    }
}

/// Repair a type I pseudo-fixed parametrization to a genuinely fixed one:
/// returns u∘ψ where ψ conjugates the standard parameter conjugation to
/// φ∘ρ₀. Already-fixed inputs pass through unchanged.
pub fn normalize_to_fixed(
    quadric: &Quadric,
    u: &RationalLineMap,
    result: &PseudoFixResult,
    rho: &AmbientInvolution,
) -> Result<RationalLineMap, HolError> {
    let psi = match result {
        PseudoFixResult::Fixed => MobiusMap::identity(),
        PseudoFixResult::NotPseudoFixed => return Err(HolError::NotPseudoFixedInput),
        PseudoFixResult::PseudoFixed { class, .. } if *class == InvolutionClass::TypeII => {
            return Err(HolError::TypeIIInput)
        }
        PseudoFixResult::PseudoFixed { phi, .. } => {
            conjugator_to_standard(&AntiInvolution::new(phi.clone()))?
        }
    };
    let fixed = u.reparametrize(quadric, &psi)?;
    let residual = fixed_point_residual(quadric, &fixed, rho)?;
    if residual >= 1e-8 {
        return Err(HolError::NormalizationFailed { residual });
    }
    Ok(fixed)
}

/// Sup over the parameter panel of dist(I(u)(t), u(t)) — zero for honest
/// fixed points.
pub fn fixed_point_residual(
    quadric: &Quadric,
    u: &RationalLineMap,
    rho: &AmbientInvolution,
) -> Result<f64, HolError> {
    let iu = involute_line(quadric, u, rho)?;
    let mut residual = 0.0f64;
    for t in parameter_panel() {
        let (lambda, mu) = (t.coords()[0], t.coords()[1]);
        let a = iu.eval(lambda, mu)?;
        let b = u.eval(lambda, mu)?;
        residual = residual.max(a.distance(&b));
    }
    Ok(residual)
}

/// Number of parameters where the line meets the hyperplane section. The
/// restriction of the hyperplane to the line is linear, so the count is 1
/// unless the whole line sits inside (an error, not a count).
pub fn count_sigma_intersections(
    u: &RationalLineMap,
    dec: &Decoration,
) -> Result<usize, HolError> {
    count_hyperplane_intersections(u, dec.sigma())
}

/// The unique parameter [λ:μ] at which the line meets the hyperplane.
pub fn sigma_intersection_parameter(
    u: &RationalLineMap,
    dec: &Decoration,
) -> Result<ProjectivePoint, HolError> {
    hyperplane_intersection_parameter(u, dec.sigma())
}

/// Same count against a bare hyperplane, no decoration required.
pub fn count_hyperplane_intersections(
    u: &RationalLineMap,
    sigma: &Hyperplane,
) -> Result<usize, HolError> {
    let (a, b) = hyperplane_restriction(u, sigma);
    if a.norm() < 1e-8 && b.norm() < 1e-8 {
        return Err(HolError::ContainedInSigma);
    }
    Ok(1)
}

/// Same parameter against a bare hyperplane, no decoration required.
pub fn hyperplane_intersection_parameter(
    u: &RationalLineMap,
    sigma: &Hyperplane,
) -> Result<ProjectivePoint, HolError> {
    let (a, b) = hyperplane_restriction(u, sigma);
    if a.norm() < 1e-8 && b.norm() < 1e-8 {
        return Err(HolError::ContainedInSigma);
    }
    Ok(ProjectivePoint::from_pair(-b, a)?)
}

fn hyperplane_restriction(u: &RationalLineMap, sigma: &Hyperplane) -> (Complex64, Complex64) {
    (sigma.eval(u.p()), sigma.eval(u.q()))
}

/// Search for a line u = span(p, P·conj(p)) on the standard quadric with
/// span(I(u)) = span(u): the plane is ρ-invariant by construction, and the
/// remaining isotropy condition g(p) = B(p, P·conj(p)) = 0 is a single
/// real equation (g is real for parity +1, purely imaginary for −1). The
/// search flows p along random rotations exp(tK) and bisects sign changes
/// of g. Deterministic given the RNG state.
pub fn find_pseudo_fixed_line(
    rho: &AmbientInvolution,
    rng: &mut impl Rng,
    max_attempts: usize,
) -> Result<RationalLineMap, HolError> {
    let len = rho.len();
    let quadric = Quadric::standard(len - 2);
    rho.check_preserves(&quadric)?;
    let real_part = rho.parity() > 0.0;

    for _ in 0..max_attempts {
        let base = crate::sampling::random_isotropic_point(rng, len);
        // Random rotation generator.
        let g = DMatrix::<f64>::from_fn(len, len, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let skew = (&g - g.transpose()) * 0.5;
        let flow = |t: f64| -> DVector<Complex64> {
            let e = (skew.clone() * t).exp().map(|x| Complex64::new(x, 0.0));
            e * base.coords()
        };
        let g_of = |p: &DVector<Complex64>| -> Complex64 {
            let image = rho.apply_vec(p);
            p.dot(&image)
        };
        let h_of = |t: f64| -> f64 {
            let v = g_of(&flow(t));
            if real_part {
                v.re
            } else {
                v.im
            }
        };
        // Scan one full turn for a sign change, then bisect.
        let steps = 64;
        let mut bracket = None;
        let mut prev_t = 0.0;
        let mut prev_h = h_of(0.0);
        for k in 1..=steps {
            let t = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
            let h = h_of(t);
            if prev_h == 0.0 || prev_h.signum() != h.signum() {
                bracket = Some((prev_t, t, prev_h));
                break;
            }
            prev_t = t;
            prev_h = h;
        }
        let Some((mut lo, mut hi, mut h_lo)) = bracket else {
            continue;
        };
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let h_mid = h_of(mid);
            if h_lo.signum() == h_mid.signum() {
                lo = mid;
                h_lo = h_mid;
            } else {
                hi = mid;
            }
        }
        let p_vec = flow(0.5 * (lo + hi));
        let q_vec = rho.apply_vec(&p_vec);
        let (Ok(p), Ok(q)) = (ProjectivePoint::new(p_vec), ProjectivePoint::new(q_vec)) else {
            continue;
        };
        if p.distance(&q) < 1e-3 {
            continue; // spanning pair collapsed to a ρ-fixed point
        }
        if let Ok(line) = make_line(&quadric, &p, &q) {
            return Ok(RationalLineMap::new(line));
        }
    }
    Err(HolError::SearchFailed {
        attempts: max_attempts,
    })
}
