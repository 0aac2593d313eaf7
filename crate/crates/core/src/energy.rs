//! Discrete energies of sampled disks in a completed Liouville domain.
//!
//! A disk is a triangulated parameter region together with per-vertex
//! data about its image: either interior coordinates of the domain W with
//! the pullback covector of the Liouville primitive λ, or a cylinder
//! coordinate r ≥ 0 over the contact boundary with the pullback covector
//! of the contact form α. The deformed primitives λ_φ restrict to
//! φ(0)·λ on the interior and φ(r)·α on the cylinder, for monotone
//! profiles φ; their exterior derivatives are the forms whose integrals
//! the energy estimates take suprema over.
//!
//! Two independent quadratures are used deliberately. The circulation
//! quadrature integrates the piecewise-linear interpolant of the supplied
//! covectors along edges (trapezoid rule, exact for affine data). The
//! geometric quadrature sums the signed symplectic areas of the affine
//! image triangles, reading only the image coordinates. Comparing the two
//! around and inside the same mesh is the discrete Stokes test: the
//! mismatch measures the sampling error and shrinks at second order for
//! smooth maps.

use nalgebra::{DVector, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadric::LineOnQuadric;

/// Default collar depth of the profiles.
pub const DEFAULT_DELTA: f64 = 0.1;
/// Cylinder vertices in triangles that also touch interior vertices must
/// sit on the interface r = 0 up to this slack.
pub const INTERFACE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("profile is invalid: {reason}")]
    BadProfile { reason: String },
    #[error("mesh is not a triangulated disk: {reason}")]
    BadMesh { reason: String },
    #[error("triangle {triangle} mixes interior vertices with cylinder vertices at r > 0")]
    InconsistentRegionTags { triangle: usize },
    #[error("operation needs a disk mapped entirely into the interior region")]
    NotInteriorDisk,
    #[error("profile family must have at least 2 members, got {got}")]
    FamilyTooSmall { got: usize },
    #[error("projective chart pivot nearly vanishes on the disk (modulus {modulus:.3e})")]
    ChartHitsInfinity { modulus: f64 },
}

impl EnergyError {
    pub fn name(&self) -> &'static str {
        match self {
            EnergyError::BadProfile { .. } => "BadProfile",
            EnergyError::BadMesh { .. } => "BadMesh",
            EnergyError::InconsistentRegionTags { .. } => "InconsistentRegionTags",
            EnergyError::NotInteriorDisk => "NotInteriorDisk",
            EnergyError::FamilyTooSmall { .. } => "FamilyTooSmall",
            EnergyError::ChartHitsInfinity { .. } => "ChartHitsInfinity",
        }
    }
}

// ---------------------------------------------------------------------------
// Profiles.
// ---------------------------------------------------------------------------

/// A monotone profile φ: ]−δ, ∞[ → [0, 1], constant on the collar
/// ]−δ, 0], stored as linear interpolation between knots at r ≥ 0 and
/// extended constantly beyond them.
#[derive(Clone, Debug)]
pub struct TestProfile {
    delta: f64,
    knots: Vec<(f64, f64)>,
}

impl TestProfile {
    pub fn new(delta: f64, knots: Vec<(f64, f64)>) -> Result<Self, EnergyError> {
        if !(delta > 0.0) {
            return Err(EnergyError::BadProfile {
                reason: format!("collar depth must be positive, got {}", delta),
            });
        }
        if knots.is_empty() {
            return Err(EnergyError::BadProfile {
                reason: "need at least one knot".into(),
            });
        }
        for (i, &(r, v)) in knots.iter().enumerate() {
            if r < 0.0 {
                return Err(EnergyError::BadProfile {
                    reason: format!("knot radius {} is negative", r),
                });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(EnergyError::BadProfile {
                    reason: format!("value {} is outside [0, 1]", v),
                });
            }
            if i > 0 {
                let (rp, vp) = knots[i - 1];
                if r <= rp {
                    return Err(EnergyError::BadProfile {
                        reason: "knot radii must increase".into(),
                    });
                }
                if v < vp {
                    return Err(EnergyError::BadProfile {
                        reason: "values must be nondecreasing".into(),
                    });
                }
            }
        }
        Ok(TestProfile { delta, knots })
    }

    pub fn constant(value: f64) -> Result<Self, EnergyError> {
        TestProfile::new(DEFAULT_DELTA, vec![(0.0, value)])
    }

    /// 0 below `start`, 1 above `end`, linear in between.
    pub fn ramp(start: f64, end: f64) -> Result<Self, EnergyError> {
        TestProfile::new(DEFAULT_DELTA, vec![(start.max(0.0), 0.0), (end, 1.0)])
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eval(&self, r: f64) -> f64 {
        let first = self.knots[0];
        if r <= first.0 {
            return first.1;
        }
        for w in self.knots.windows(2) {
            let (r0, v0) = w[0];
            let (r1, v1) = w[1];
            if r <= r1 {
                return v0 + (v1 - v0) * (r - r0) / (r1 - r0);
            }
        }
        self.knots.last().unwrap().1
    }
}

/// A nested family over which the energy supremum is estimated: the
/// constants 1 and 0, then ramps over the dyadic subdivisions of
/// [0, r_span] in breadth-first order. Prefixes of the list are
/// subfamilies, so estimates are nondecreasing in the count.
pub fn nested_profile_family(count: usize, r_span: f64) -> Vec<TestProfile> {
    let span = if r_span > 0.0 { r_span } else { 1.0 };
    let mut out = vec![
        TestProfile::constant(1.0).expect("valid"),
        TestProfile::constant(0.0).expect("valid"),
    ];
    let mut level = 0u32;
    'outer: loop {
        let cells = 1usize << level;
        for i in 0..cells {
            if out.len() >= count {
                break 'outer;
            }
            let a = span * i as f64 / cells as f64;
            let b = span * (i + 1) as f64 / cells as f64;
            out.push(TestProfile::ramp(a, b).expect("valid"));
        }
        level += 1;
        if level > 24 {
            break;
        }
    }
    out.truncate(count);
    out
}

// ---------------------------------------------------------------------------
// Disks.
// ---------------------------------------------------------------------------

/// Image data attached to one parameter vertex.
#[derive(Clone, Debug)]
pub enum DiskVertex {
    /// Image in the interior of W (flat symplectic coordinates, paired as
    /// (x₁, y₁, x₂, y₂, …)), with the pullback covector of λ in parameter
    /// coordinates.
    Interior {
        image: DVector<f64>,
        lambda_pullback: Vector2<f64>,
    },
    /// Image on the cylinder [0, ∞) × ∂W: the cylinder coordinate and the
    /// pullback covector of the contact form α.
    Cylinder { r: f64, alpha_pullback: Vector2<f64> },
}

impl DiskVertex {
    pub fn covector(&self) -> Vector2<f64> {
        match self {
            DiskVertex::Interior {
                lambda_pullback, ..
            } => *lambda_pullback,
            DiskVertex::Cylinder { alpha_pullback, .. } => *alpha_pullback,
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self, DiskVertex::Interior { .. })
    }

    pub fn cylinder_r(&self) -> Option<f64> {
        match self {
            DiskVertex::Cylinder { r, .. } => Some(*r),
            DiskVertex::Interior { .. } => None,
        }
    }
}

/// A sampled disk map: a triangulated parameter disk with per-vertex
/// image and pullback data.
#[derive(Clone, Debug)]
pub struct DiscretizedDiskMap {
    positions: Vec<Vector2<f64>>,
    data: Vec<DiskVertex>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

impl DiscretizedDiskMap {
    pub fn new(
        positions: Vec<Vector2<f64>>,
        data: Vec<DiskVertex>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<usize>,
    ) -> Result<Self, EnergyError> {
        let nv = positions.len();
        if data.len() != nv {
            return Err(EnergyError::BadMesh {
                reason: format!("{} positions but {} data records", nv, data.len()),
            });
        }
        if triangles.is_empty() {
            return Err(EnergyError::BadMesh {
                reason: "no triangles".into(),
            });
        }

        // r ≥ 0 on the cylinder, interior images of one consistent length
        let mut image_len = None;
        for (i, d) in data.iter().enumerate() {
            match d {
                DiskVertex::Cylinder { r, .. } => {
                    if *r < -1e-12 {
                        return Err(EnergyError::BadMesh {
                            reason: format!("vertex {} has negative cylinder coordinate", i),
                        });
                    }
                }
                DiskVertex::Interior { image, .. } => {
                    if image.len() % 2 != 0 || image.is_empty() {
                        return Err(EnergyError::BadMesh {
                            reason: format!("vertex {} image length must be even", i),
                        });
                    }
                    match image_len {
                        None => image_len = Some(image.len()),
                        Some(l) if l != image.len() => {
                            return Err(EnergyError::BadMesh {
                                reason: "interior image lengths differ".into(),
                            });
                        }
                        _ => {}
                    }
                }
            }
        }

        // combinatorics: valid indices, positive parameter orientation,
        // Euler characteristic 1, single boundary loop
        let mut edge_count = std::collections::HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(EnergyError::BadMesh {
                        reason: format!("triangle {} references vertex {}", t, v),
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(EnergyError::BadMesh {
                    reason: format!("triangle {} is degenerate", t),
                });
            }
            let a = positions[tri[0]];
            let b = positions[tri[1]];
            let c = positions[tri[2]];
            let area2 = (b - a).perp(&(c - a));
            if area2 <= 0.0 {
                return Err(EnergyError::BadMesh {
                    reason: format!("triangle {} is not positively oriented", t),
                });
            }
            for k in 0..3 {
                let e = (tri[k].min(tri[(k + 1) % 3]), tri[k].max(tri[(k + 1) % 3]));
                *edge_count.entry(e).or_insert(0usize) += 1;
            }
        }
        let n_edges = edge_count.len();
        if edge_count.values().any(|&c| c > 2) {
            return Err(EnergyError::BadMesh {
                reason: "an edge belongs to more than two triangles".into(),
            });
        }
        let euler = nv as i64 - n_edges as i64 + triangles.len() as i64;
        if euler != 1 {
            return Err(EnergyError::BadMesh {
                reason: format!("Euler characteristic {} instead of 1", euler),
            });
        }
        let rim: std::collections::HashSet<(usize, usize)> = edge_count
            .iter()
            .filter(|(_, &c)| c == 1)
            .map(|(&e, _)| e)
            .collect();
        if boundary.len() != rim.len() || boundary.len() < 3 {
            return Err(EnergyError::BadMesh {
                reason: format!(
                    "boundary loop length {} does not match the {} rim edges",
                    boundary.len(),
                    rim.len()
                ),
            });
        }
        for i in 0..boundary.len() {
            let a = boundary[i];
            let b = boundary[(i + 1) % boundary.len()];
            if a >= nv || b >= nv || !rim.contains(&(a.min(b), a.max(b))) {
                return Err(EnergyError::BadMesh {
                    reason: "boundary loop does not follow rim edges".into(),
                });
            }
        }
        let distinct: std::collections::HashSet<usize> = boundary.iter().copied().collect();
        if distinct.len() != boundary.len() {
            return Err(EnergyError::BadMesh {
                reason: "boundary loop revisits a vertex".into(),
            });
        }

        // region consistency: triangles may mix regions only along r = 0
        for (t, tri) in triangles.iter().enumerate() {
            let has_interior = tri.iter().any(|&v| data[v].is_interior());
            if !has_interior {
                continue;
            }
            for &v in tri {
                if let Some(r) = data[v].cylinder_r() {
                    if r > INTERFACE_TOL {
                        return Err(EnergyError::InconsistentRegionTags { triangle: t });
                    }
                }
            }
        }

        Ok(DiscretizedDiskMap {
            positions,
            data,
            triangles,
            boundary,
        })
    }

    pub fn positions(&self) -> &[Vector2<f64>] {
        &self.positions
    }

    pub fn data(&self) -> &[DiskVertex] {
        &self.data
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_interior_disk(&self) -> bool {
        self.data.iter().all(|d| d.is_interior())
    }

    /// Largest cylinder coordinate reached by the disk (0 when the disk
    /// stays in the interior).
    pub fn max_cylinder_r(&self) -> f64 {
        self.data
            .iter()
            .filter_map(|d| d.cylinder_r())
            .fold(0.0, f64::max)
    }

    /// Same mesh with the boundary loop traversed the other way.
    pub fn with_reversed_boundary(&self) -> DiscretizedDiskMap {
        let mut out = self.clone();
        out.boundary.reverse();
        out
    }
}

// ---------------------------------------------------------------------------
// Quadratures.
// ---------------------------------------------------------------------------

fn phi_weight(profile: &TestProfile, v: &DiskVertex) -> f64 {
    match v {
        DiskVertex::Interior { .. } => profile.eval(0.0),
        DiskVertex::Cylinder { r, .. } => profile.eval(*r),
    }
}

/// ∫ w*dλ_φ by per-triangle trapezoid circulation of the φ-weighted
/// covectors; exact when the weighted covector field is affine on each
/// triangle.
pub fn omega_phi_integral(disk: &DiscretizedDiskMap, profile: &TestProfile) -> f64 {
    let theta: Vec<Vector2<f64>> = disk
        .data
        .iter()
        .map(|d| d.covector() * phi_weight(profile, d))
        .collect();
    let mut total = 0.0;
    for tri in &disk.triangles {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let edge = disk.positions[b] - disk.positions[a];
            total += 0.5 * (theta[a] + theta[b]).dot(&edge);
        }
    }
    total
}

/// ∮_∂ w*λ along the stored boundary loop by the trapezoid rule on the
/// raw covectors.
pub fn boundary_circulation(disk: &DiscretizedDiskMap) -> f64 {
    let n = disk.boundary.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = disk.boundary[i];
        let b = disk.boundary[(i + 1) % n];
        let edge = disk.positions[b] - disk.positions[a];
        total += 0.5 * (disk.data[a].covector() + disk.data[b].covector()).dot(&edge);
    }
    total
}

/// ∫ w*ω from the images alone: the sum over triangles of the signed
/// symplectic areas of the affine image simplices, ω = Σ dx_j ∧ dy_j in
/// the stored coordinate pairing. Requires an interior disk.
pub fn geometric_omega_integral(disk: &DiscretizedDiskMap) -> Result<f64, EnergyError> {
    if !disk.is_interior_disk() {
        return Err(EnergyError::NotInteriorDisk);
    }
    let image = |v: usize| -> &DVector<f64> {
        match &disk.data[v] {
            DiskVertex::Interior { image, .. } => image,
            DiskVertex::Cylinder { .. } => unreachable!("interior disk"),
        }
    };
    let mut total = 0.0;
    for tri in &disk.triangles {
        let a = image(tri[0]);
        let e1 = image(tri[1]) - a;
        let e2 = image(tri[2]) - a;
        for j in 0..a.len() / 2 {
            total += 0.5 * (e1[2 * j] * e2[2 * j + 1] - e1[2 * j + 1] * e2[2 * j]);
        }
    }
    Ok(total)
}

/// |∫ w*dλ − ∮ w*λ| with the interior integral from the image geometry
/// and the boundary integral from the supplied covectors; O(mesh²) for
/// smooth maps, and exactly the discretization mismatch between the two
/// data channels.
pub fn stokes_residual(disk: &DiscretizedDiskMap) -> Result<f64, EnergyError> {
    let interior = geometric_omega_integral(disk)?;
    Ok((interior - boundary_circulation(disk)).abs())
}

/// Lower-bound estimate of the SFT energy: the maximum of
/// [`omega_phi_integral`] over the first `family_size` members of the
/// nested profile family spanning the disk's cylinder range.
pub fn sft_energy_estimate(
    disk: &DiscretizedDiskMap,
    family_size: usize,
) -> Result<f64, EnergyError> {
    if family_size < 2 {
        return Err(EnergyError::FamilyTooSmall { got: family_size });
    }
    let family = nested_profile_family(family_size, disk.max_cylinder_r());
    Ok(family
        .iter()
        .map(|phi| omega_phi_integral(disk, phi))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Outcome of the unit-area bound test for line-disks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiskBoundReport {
    pub value: f64,
    pub pass: bool,
}

/// Check ∫ w*ω ≤ 1 (+1e-6 slack) for a disk cut out of an area-normalized
/// line.
pub fn disk_bound_check(disk: &DiscretizedDiskMap) -> Result<DiskBoundReport, EnergyError> {
    let value = geometric_omega_integral(disk)?;
    Ok(DiskBoundReport {
        value,
        pass: value <= 1.0 + 1e-6,
    })
}

// ---------------------------------------------------------------------------
// Mesh and disk builders.
// ---------------------------------------------------------------------------

/// A bare triangulated unit parameter disk in polar layout.
#[derive(Clone, Debug)]
pub struct ParameterMesh {
    pub positions: Vec<Vector2<f64>>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<usize>,
}

/// Concentric-ring triangulation of the closed unit disk: a center
/// vertex, `rings` rings of `sectors` vertices, fan triangles inside and
/// split quads between rings, all positively oriented.
pub fn polar_disk_mesh(rings: usize, sectors: usize) -> ParameterMesh {
    assert!(rings >= 1 && sectors >= 3, "mesh too coarse");
    let mut positions = vec![Vector2::new(0.0, 0.0)];
    for i in 1..=rings {
        let s = i as f64 / rings as f64;
        for j in 0..sectors {
            let beta = 2.0 * std::f64::consts::PI * j as f64 / sectors as f64;
            positions.push(Vector2::new(s * beta.cos(), s * beta.sin()));
        }
    }
    let idx = |i: usize, j: usize| 1 + (i - 1) * sectors + (j % sectors);
    let mut triangles = Vec::new();
    for j in 0..sectors {
        triangles.push([0, idx(1, j), idx(1, j + 1)]);
    }
    for i in 1..rings {
        for j in 0..sectors {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let boundary = (0..sectors).map(|j| idx(rings, j)).collect();
    ParameterMesh {
        positions,
        triangles,
        boundary,
    }
}

/// Build a disk from a parameter mesh and a per-position data rule.
pub fn disk_from_mesh(
    mesh: ParameterMesh,
    rule: impl Fn(Vector2<f64>) -> DiskVertex,
) -> Result<DiscretizedDiskMap, EnergyError> {
    let data = mesh.positions.iter().map(|&p| rule(p)).collect();
    DiscretizedDiskMap::new(mesh.positions, data, mesh.triangles, mesh.boundary)
}

/// The affine embedding (u, v) ↦ scale·(u, v) of the parameter disk into
/// flat R² with the primitive ½(x dy − y dx); both quadratures are exact
/// on it.
pub fn synthetic_flat_disk(
    rings: usize,
    sectors: usize,
    scale: f64,
) -> Result<DiscretizedDiskMap, EnergyError> {
    disk_from_mesh(polar_disk_mesh(rings, sectors), move |p| {
        DiskVertex::Interior {
            image: DVector::from_vec(vec![scale * p.x, scale * p.y]),
            lambda_pullback: Vector2::new(-p.y, p.x) * (0.5 * scale * scale),
        }
    })
}

/// A curved polynomial disk in C² ≅ R⁴: ζ ↦ (ζ + 0.3ζ², 0.2ζ³) with the
/// flat primitive ½Σ(x dy − y dx); its symplectic area is exactly 1.3π.
pub fn synthetic_smooth_disk(
    rings: usize,
    sectors: usize,
) -> Result<DiscretizedDiskMap, EnergyError> {
    disk_from_mesh(polar_disk_mesh(rings, sectors), |p| {
        let zeta = Complex64::new(p.x, p.y);
        let z0 = zeta + 0.3 * zeta * zeta;
        let z1 = 0.2 * zeta * zeta * zeta;
        let d0 = Complex64::new(1.0, 0.0) + 0.6 * zeta;
        let d1 = 0.6 * zeta * zeta;
        let image = DVector::from_vec(vec![z0.re, z0.im, z1.re, z1.im]);
        // λ = ½Σ(x dy − y dx) pulled back through the holomorphic map:
        // for each factor, coefficients ½·Im(conj(z)·z′·(1, i)).
        let pull = |z: Complex64, d: Complex64| {
            let w = z.conj() * d;
            Vector2::new(0.5 * w.im, 0.5 * (w * Complex64::new(0.0, 1.0)).im)
        };
        DiskVertex::Interior {
            image,
            lambda_pullback: pull(z0, d0) + pull(z1, d1),
        }
    })
}

/// A disk reaching into the cylinder with closed-form deformed energies.
///
/// The inner half of the parameter disk is a flat interior cap of
/// α-circulation `flux`; the outer annulus winds through the cylinder
/// with phase Γ(s, β) = β + 3(s−½)·sin β and cylinder coordinate
/// ρ(s, β) = (2s−1)·r_max·(1+cos β)/2. For a profile φ,
/// ∫ w*dλ_φ = (flux/2π)·∫ φ(r_max(1+cos β)/2)·(1 + 1.5·cos β) dβ,
/// so φ ≡ 1 yields exactly `flux`, the linear ramp yields 0.875·flux, and
/// the supremum over monotone profiles is
/// (flux/π)(β₀ + 1.5 sin β₀) ≈ 1.0882·flux at β₀ = arccos(−2/3).
pub fn synthetic_cylinder_disk(
    rings: usize,
    sectors: usize,
    r_max: f64,
    flux: f64,
) -> Result<DiscretizedDiskMap, EnergyError> {
    assert!(rings >= 2 && rings % 2 == 0, "need an even ring count");
    let cap_scale = 2.0 * (flux / std::f64::consts::PI).sqrt();
    let coef = flux / (2.0 * std::f64::consts::PI);
    disk_from_mesh(polar_disk_mesh(rings, sectors), move |p| {
        let s = p.norm();
        if s < 0.5 - 1e-12 {
            // flat cap: image c·(u, v), λ = ½(x dy − y dx), whose
            // boundary circulation at s = ½ matches the annulus side
            DiskVertex::Interior {
                image: DVector::from_vec(vec![cap_scale * p.x, cap_scale * p.y]),
                lambda_pullback: Vector2::new(-p.y, p.x) * (0.5 * cap_scale * cap_scale),
            }
        } else {
            // interface vertices (s = ½) carry r = 0, so triangles mixing
            // the regions all sit on the contact hypersurface
            let beta = p.y.atan2(p.x);
            let r = (2.0 * s - 1.0) * r_max * (1.0 + beta.cos()) * 0.5;
            // α-pullback = (flux/2π)·dΓ in Cartesian parameter coords
            let gamma_s = 3.0 * beta.sin();
            let gamma_beta = 1.0 + 3.0 * (s - 0.5) * beta.cos();
            let ds = Vector2::new(p.x, p.y) / s;
            let dbeta = Vector2::new(-p.y, p.x) / (s * s);
            DiskVertex::Cylinder {
                r: r.max(0.0),
                alpha_pullback: (ds * gamma_s + dbeta * gamma_beta) * coef,
            }
        }
    })
}

/// Closed-form ∫ w*dλ_φ of [`synthetic_cylinder_disk`], by 1-D quadrature
/// of the boundary formula (exact up to the stated integration).
pub fn cylinder_disk_energy(profile: &TestProfile, r_max: f64, flux: f64) -> f64 {
    // (flux/2π)·∫ φ(r_max (1+cos β)/2)·(1 + 1.5 cos β) dβ, integrated by
    // a fine midpoint rule (the integrand is smooth except for kinks of φ)
    let n = 200_000;
    let mut total = 0.0;
    for i in 0..n {
        let beta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
        let r = r_max * (1.0 + beta.cos()) * 0.5;
        total += profile.eval(r) * (1.0 + 1.5 * beta.cos());
    }
    total * flux / n as f64
}

/// The supremum of the deformed energies of [`synthetic_cylinder_disk`]
/// over all monotone profiles: (flux/π)·(β₀ + 1.5 sin β₀) with
/// β₀ = arccos(−2/3).
pub fn cylinder_disk_energy_sup(flux: f64) -> f64 {
    let beta0 = (-2.0f64 / 3.0).acos();
    flux / std::f64::consts::PI * (beta0 + 1.5 * beta0.sin())
}

/// How a line is turned into a sampled disk.
#[derive(Clone, Copy, Debug)]
pub enum LineDiskFlavor {
    /// Parametrize ζ ↦ [p + ζq] by the stored spanning pair and store
    /// images in Darboux coordinates for the Fubini–Study form scaled so
    /// the whole line has area 1; every image then lies in the open disk
    /// of area 1, making the unit bound structural. When the pair is
    /// Hermitian-orthonormal a disk of parameter radius R captures area
    /// exactly R²/(1+R²).
    AreaNormalized { radius: f64 },
    /// The raw spanning pair pushed through the affine chart dropping the
    /// given coordinate, multiplied by i so the image satisfies Σz² = 1;
    /// images in the flat coordinates of that chart with the primitive
    /// ½Σ(x dy − y dx).
    FlatExact { chart: usize, radius: f64 },
}

/// Sample a disk on a projective line.
pub fn line_disk(
    line: &LineOnQuadric,
    flavor: LineDiskFlavor,
    rings: usize,
    sectors: usize,
) -> Result<DiscretizedDiskMap, EnergyError> {
    let mesh = polar_disk_mesh(rings, sectors);
    match flavor {
        LineDiskFlavor::AreaNormalized { radius } => {
            let pc = line.p().coords().clone();
            let qc = line.q().coords().clone();
            // Hermitian-orthonormal basis (e₁, e₂) of the span; the affine
            // coordinate of z(ζ) = p + ζq in that basis is the Möbius map
            // w(ζ) = ζ·nq / (np + ζ·c₁)
            let np = pc.norm();
            let e1 = &pc / Complex64::new(np, 0.0);
            let c1 = e1.dotc(&qc);
            let nq = (&qc - &e1 * c1).norm();
            let mut min_den = f64::INFINITY;
            for p in &mesh.positions {
                let zeta = Complex64::new(radius * p.x, radius * p.y);
                min_den = min_den.min((Complex64::new(np, 0.0) + zeta * c1).norm());
            }
            if min_den < 1e-3 * np {
                return Err(EnergyError::ChartHitsInfinity {
                    modulus: min_den / np,
                });
            }
            disk_from_mesh(mesh, move |p| {
                let zeta = Complex64::new(radius * p.x, radius * p.y);
                let den = Complex64::new(np, 0.0) + zeta * c1;
                let w = zeta * nq / den;
                // dw/d(parameter) as a complex number, chain rule through
                // ζ = radius·(u + iv)
                let dw = Complex64::new(radius * nq * np, 0.0) / (den * den);
                let w2 = w.norm_sqr();
                // Darboux chart of area-1 Fubini–Study: image w/√(π(1+|w|²)),
                // primitive (u dv − v du)/(2π(1+|w|²))
                let rho = 1.0 / (std::f64::consts::PI * (1.0 + w2)).sqrt();
                let image = DVector::from_vec(vec![w.re * rho, w.im * rho]);
                let gamma = Complex64::new(0.0, 1.0) * w / (2.0 * std::f64::consts::PI * (1.0 + w2));
                let cov = dw.conj() * gamma;
                DiskVertex::Interior {
                    image,
                    lambda_pullback: Vector2::new(cov.re, cov.im),
                }
            })
        }
        LineDiskFlavor::FlatExact { chart, radius } => {
            let pc = line.p().coords().clone();
            let qc = line.q().coords().clone();
            let m = pc.len();
            if chart >= m {
                return Err(EnergyError::BadMesh {
                    reason: format!("chart index {} out of range for {} coordinates", chart, m),
                });
            }
            // reject charts whose hyperplane at infinity meets the disk
            let mut min_ratio = f64::INFINITY;
            for p in &mesh.positions {
                let zeta = Complex64::new(radius * p.x, radius * p.y);
                let z = &pc + &qc * zeta;
                min_ratio = min_ratio.min(z[chart].norm() / z.norm());
            }
            if min_ratio < 1e-3 {
                return Err(EnergyError::ChartHitsInfinity { modulus: min_ratio });
            }
            disk_from_mesh(mesh, move |p| {
                let zeta = Complex64::new(radius * p.x, radius * p.y);
                let z = &pc + &qc * zeta;
                let pivot = z[chart];
                let i_unit = Complex64::new(0.0, 1.0);
                let mut image = DVector::zeros(2 * (m - 1));
                let mut lam = Vector2::zeros();
                let mut slot = 0;
                for j in 0..m {
                    if j == chart {
                        continue;
                    }
                    let w = i_unit * z[j] / pivot;
                    let dw_dzeta = i_unit * (qc[j] * pivot - z[j] * qc[chart]) / (pivot * pivot);
                    image[2 * slot] = w.re;
                    image[2 * slot + 1] = w.im;
                    // λ = ½(x dy − y dx) per factor; pullback covector
                    // = ½ Im(conj(w)·w′·(1, i)) scaled by dζ/d(u,v)
                    let c = w.conj() * dw_dzeta * radius;
                    lam += Vector2::new(0.5 * c.im, 0.5 * (c * i_unit).im);
                    slot += 1;
                }
                DiskVertex::Interior {
                    image,
                    lambda_pullback: lam,
                }
            })
        }
    }
}

// ---------------------------------------------------------------------------
// JSON interchange.
// ---------------------------------------------------------------------------

/// Flat serialization of a disk, for file interchange.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskRecord {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<usize>,
    /// "interior" or "cylinder" per vertex.
    pub region_tags: Vec<String>,
    /// Cylinder coordinate per vertex (0 for interior vertices).
    pub r: Vec<f64>,
    /// Interior image coordinates per vertex (null on the cylinder).
    pub images: Vec<Option<Vec<f64>>>,
    /// Pullback covector of λ (interior) or α (cylinder) per vertex.
    pub lambda_pullback: Vec<[f64; 2]>,
}

impl DiscretizedDiskMap {
    pub fn to_record(&self) -> DiskRecord {
        let mut region_tags = Vec::new();
        let mut r = Vec::new();
        let mut images = Vec::new();
        let mut lambda_pullback = Vec::new();
        for d in &self.data {
            let cov = d.covector();
            lambda_pullback.push([cov.x, cov.y]);
            match d {
                DiskVertex::Interior { image, .. } => {
                    region_tags.push("interior".to_string());
                    r.push(0.0);
                    images.push(Some(image.iter().copied().collect()));
                }
                DiskVertex::Cylinder { r: rv, .. } => {
                    region_tags.push("cylinder".to_string());
                    r.push(*rv);
                    images.push(None);
                }
            }
        }
        DiskRecord {
            vertices: self.positions.iter().map(|p| [p.x, p.y]).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            region_tags,
            r,
            images,
            lambda_pullback,
        }
    }

    pub fn from_record(record: &DiskRecord) -> Result<Self, EnergyError> {
        let nv = record.vertices.len();
        if record.region_tags.len() != nv
            || record.r.len() != nv
            || record.images.len() != nv
            || record.lambda_pullback.len() != nv
        {
            return Err(EnergyError::BadMesh {
                reason: "per-vertex arrays have mismatched lengths".into(),
            });
        }
        let positions = record
            .vertices
            .iter()
            .map(|&[x, y]| Vector2::new(x, y))
            .collect();
        let mut data = Vec::with_capacity(nv);
        for i in 0..nv {
            let cov = Vector2::new(record.lambda_pullback[i][0], record.lambda_pullback[i][1]);
            match record.region_tags[i].as_str() {
                "interior" => {
                    let image = record.images[i].as_ref().ok_or_else(|| EnergyError::BadMesh {
                        reason: format!("interior vertex {} lacks an image", i),
                    })?;
                    data.push(DiskVertex::Interior {
                        image: DVector::from_vec(image.clone()),
                        lambda_pullback: cov,
                    });
                }
                "cylinder" => {
                    data.push(DiskVertex::Cylinder {
                        r: record.r[i],
                        alpha_pullback: cov,
                    });
                }
                other => {
                    return Err(EnergyError::BadMesh {
                        reason: format!("unknown region tag {:?}", other),
                    });
                }
            }
        }
        DiscretizedDiskMap::new(positions, data, record.triangles.clone(), record.boundary.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadric::{make_line, Quadric};
    use crate::sampling;
    use num_complex::Complex64;

    fn standard_line(n_plus_2: usize) -> LineOnQuadric {
        // span of (e0 + i e1), (e2 + i e3) on the standard quadric
        line_through(n_plus_2, 0.0)
    }

    /// Same line but spanned by (e0 + i e1) and (e2 + i e3) + skew·(e0 + i e1);
    /// a nonzero skew makes the pair non-orthogonal, so the sampled data
    /// is genuinely curved rather than rotationally symmetric.
    fn line_through(n_plus_2: usize, skew: f64) -> LineOnQuadric {
        let q = Quadric::standard(n_plus_2 - 2);
        let mut a = DVector::zeros(n_plus_2);
        a[0] = Complex64::new(1.0, 0.0);
        a[1] = Complex64::new(0.0, 1.0);
        let mut b = DVector::zeros(n_plus_2);
        b[2] = Complex64::new(1.0, 0.0);
        b[3] = Complex64::new(0.0, 1.0);
        let b = b + &a * Complex64::new(skew, 0.0);
        make_line(
            &q,
            &crate::mobius::ProjectivePoint::new(a).unwrap(),
            &crate::mobius::ProjectivePoint::new(b).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn profile_constructors_validate() {
        assert!(TestProfile::constant(0.5).is_ok());
        assert!(TestProfile::constant(1.5).is_err());
        assert!(TestProfile::ramp(0.2, 1.0).is_ok());
        let err = TestProfile::new(0.1, vec![(0.0, 0.8), (1.0, 0.2)]).unwrap_err();
        assert_eq!(err.name(), "BadProfile");
        let err = TestProfile::new(-0.1, vec![(0.0, 0.5)]).unwrap_err();
        assert_eq!(err.name(), "BadProfile");

        let ramp = TestProfile::ramp(1.0, 3.0).unwrap();
        assert_eq!(ramp.eval(-0.05), 0.0);
        assert_eq!(ramp.eval(0.5), 0.0);
        assert!((ramp.eval(2.0) - 0.5).abs() < 1e-15);
        assert_eq!(ramp.eval(10.0), 1.0);
    }

    #[test]
    fn mesh_is_a_combinatorial_disk() {
        let mesh = polar_disk_mesh(4, 12);
        let disk = synthetic_flat_disk(4, 12, 1.0).unwrap();
        assert_eq!(disk.positions().len(), 1 + 4 * 12);
        assert_eq!(disk.boundary().len(), 12);
        // Euler characteristic is checked by the constructor; a corrupted
        // boundary must be rejected
        let mut bad = mesh.boundary.clone();
        bad.swap(0, 5);
        let data: Vec<DiskVertex> = mesh
            .positions
            .iter()
            .map(|p| DiskVertex::Interior {
                image: DVector::from_vec(vec![p.x, p.y]),
                lambda_pullback: Vector2::zeros(),
            })
            .collect();
        let err =
            DiscretizedDiskMap::new(mesh.positions.clone(), data, mesh.triangles.clone(), bad)
                .unwrap_err();
        assert_eq!(err.name(), "BadMesh");
    }

    #[test]
    fn mixed_triangles_need_zero_interface_radius() {
        // hand-built two-triangle square: one interior vertex, cylinder
        // vertices at r > 0 adjacent to it
        let positions = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ];
        let mk = |r: f64| {
            vec![
                DiskVertex::Interior {
                    image: DVector::from_vec(vec![0.0, 0.0]),
                    lambda_pullback: Vector2::zeros(),
                },
                DiskVertex::Cylinder {
                    r,
                    alpha_pullback: Vector2::zeros(),
                },
                DiskVertex::Cylinder {
                    r,
                    alpha_pullback: Vector2::zeros(),
                },
                DiskVertex::Cylinder {
                    r,
                    alpha_pullback: Vector2::zeros(),
                },
            ]
        };
        let triangles = vec![[0, 1, 2], [0, 2, 3]];
        let boundary = vec![0, 1, 2, 3];
        let ok = DiscretizedDiskMap::new(positions.clone(), mk(0.0), triangles.clone(), boundary.clone());
        assert!(ok.is_ok());
        let err = DiscretizedDiskMap::new(positions, mk(0.5), triangles, boundary).unwrap_err();
        assert_eq!(err.name(), "InconsistentRegionTags");
    }

    #[test]
    fn flat_disk_quadratures_are_exact_and_agree() {
        let disk = synthetic_flat_disk(6, 24, 1.0).unwrap();
        let residual = stokes_residual(&disk).unwrap();
        assert!(residual < 1e-12, "residual {}", residual);

        // the plain integral is the polygon area, strictly inside π
        let value = geometric_omega_integral(&disk).unwrap();
        assert!(value < std::f64::consts::PI && value > 3.05);

        // ω_φ with constant profile scales the plain quadrature
        let one = omega_phi_integral(&disk, &TestProfile::constant(1.0).unwrap());
        let lo = omega_phi_integral(&disk, &TestProfile::constant(0.25).unwrap());
        assert!((lo - 0.25 * one).abs() < 1e-14);
        let zero = omega_phi_integral(&disk, &TestProfile::constant(0.0).unwrap());
        assert_eq!(zero, 0.0);

        // the covector circulation also equals the geometric area exactly
        assert!((one - value).abs() < 1e-12);
    }

    #[test]
    fn smooth_disk_has_the_predicted_area_and_second_order_stokes() {
        let coarse = synthetic_smooth_disk(8, 32).unwrap();
        let fine = synthetic_smooth_disk(16, 64).unwrap();
        let truth = 1.3 * std::f64::consts::PI;
        let g = geometric_omega_integral(&fine).unwrap();
        assert!((g - truth).abs() < 1e-2 * truth);

        let r1 = stokes_residual(&coarse).unwrap();
        let r2 = stokes_residual(&fine).unwrap();
        let ratio = r1 / r2;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "ratio {} from {} / {}",
            ratio,
            r1,
            r2
        );
    }

    #[test]
    fn boundary_reversal_negates_the_circulation() {
        let disk = synthetic_smooth_disk(6, 24).unwrap();
        let c = boundary_circulation(&disk);
        let rev = disk.with_reversed_boundary();
        let cr = boundary_circulation(&rev);
        assert!((c + cr).abs() < 1e-12 * c.abs().max(1.0));

        // the Stokes mismatch then jumps to about 2|circulation|
        let residual = stokes_residual(&rev).unwrap();
        assert!(
            residual > 1.9 * c.abs() && residual < 2.1 * c.abs(),
            "residual {} vs circulation {}",
            residual,
            c
        );
    }

    #[test]
    fn cylinder_disk_matches_its_closed_forms() {
        let (r_max, flux) = (1.5, 2.0);
        let disk = synthetic_cylinder_disk(24, 96, r_max, flux).unwrap();
        assert!((disk.max_cylinder_r() - r_max).abs() < 1e-12);

        // φ ≡ 1: exactly the α-flux through the boundary
        let full = omega_phi_integral(&disk, &TestProfile::constant(1.0).unwrap());
        assert!((full - flux).abs() < 2e-3 * flux, "full {}", full);

        // linear ramp: 0.875·flux in closed form
        let ramp = TestProfile::ramp(0.0, r_max).unwrap();
        let linear = omega_phi_integral(&disk, &ramp);
        assert!(
            (linear - 0.875 * flux).abs() < 2e-3 * flux,
            "ramp {}",
            linear
        );
        assert!((cylinder_disk_energy(&ramp, r_max, flux) - 0.875 * flux).abs() < 1e-6);

        // a generic profile agrees with the 1-D reduction
        let phi = TestProfile::new(0.1, vec![(0.1, 0.2), (0.8, 0.9)]).unwrap();
        let a = omega_phi_integral(&disk, &phi);
        let b = cylinder_disk_energy(&phi, r_max, flux);
        assert!((a - b).abs() < 2e-3 * flux, "{} vs {}", a, b);

        // φ ≡ 0 kills everything
        assert_eq!(
            omega_phi_integral(&disk, &TestProfile::constant(0.0).unwrap()),
            0.0
        );
    }

    #[test]
    fn energy_estimate_is_monotone_and_converges_to_the_sup() {
        let (r_max, flux) = (1.5, 2.0);
        let disk = synthetic_cylinder_disk(24, 96, r_max, flux).unwrap();
        assert_eq!(
            sft_energy_estimate(&disk, 1).unwrap_err().name(),
            "FamilyTooSmall"
        );
        let mut prev = f64::NEG_INFINITY;
        let mut last = 0.0;
        for k in 2..=64 {
            let e = sft_energy_estimate(&disk, k).unwrap();
            assert!(e >= prev - 1e-12, "estimate dropped at k = {}", k);
            prev = e;
            last = e;
        }
        let sup = cylinder_disk_energy_sup(flux);
        assert!((sup - 1.0882 * flux).abs() < 1e-3 * flux);
        // close to the true sup, and never meaningfully above it
        assert!(last > 0.97 * sup, "last {} vs sup {}", last, sup);
        assert!(last < sup * 1.005);

        // in-W disks are dominated by the constant-1 profile
        let flat = synthetic_flat_disk(6, 24, 1.0).unwrap();
        let plain = omega_phi_integral(&flat, &TestProfile::constant(1.0).unwrap());
        for k in [2usize, 7, 20] {
            assert_eq!(sft_energy_estimate(&flat, k).unwrap(), plain);
        }

        // the zero map has zero estimate
        let zero = synthetic_flat_disk(4, 12, 0.0).unwrap();
        assert_eq!(sft_energy_estimate(&zero, 8).unwrap(), 0.0);
    }

    #[test]
    fn cylinder_disks_refuse_interior_only_operations() {
        let disk = synthetic_cylinder_disk(8, 24, 1.0, 1.0).unwrap();
        assert_eq!(stokes_residual(&disk).unwrap_err().name(), "NotInteriorDisk");
        assert_eq!(
            disk_bound_check(&disk).unwrap_err().name(),
            "NotInteriorDisk"
        );
    }

    #[test]
    fn area_normalized_line_disks_obey_the_unit_bound() {
        let line = standard_line(6);
        let mut prev = 0.0;
        for &radius in &[1.0, 3.0, 10.0, 40.0] {
            let disk =
                line_disk(&line, LineDiskFlavor::AreaNormalized { radius }, 12, 48).unwrap();
            let report = disk_bound_check(&disk).unwrap();
            assert!(report.pass, "radius {} gave {}", radius, report.value);
            let expected = radius * radius / (1.0 + radius * radius);
            assert!(
                (report.value - expected).abs() < 5e-3,
                "value {} expected {}",
                report.value,
                expected
            );
            assert!(report.value > prev);
            prev = report.value;
        }
        // a large disk nearly exhausts the unit area
        assert!(prev > 0.99 && prev <= 1.0 + 1e-6);

        // an artificially inflated disk fails the bound
        let area = geometric_omega_integral(&synthetic_flat_disk(8, 32, 1.0).unwrap()).unwrap();
        let inflated = synthetic_flat_disk(8, 32, (1.5 / area).sqrt()).unwrap();
        let report = disk_bound_check(&inflated).unwrap();
        assert!(!report.pass);
        assert!((report.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn line_disk_stokes_residual_converges_at_second_order() {
        let line = line_through(6, 0.3);
        for flavor in [
            LineDiskFlavor::AreaNormalized { radius: 2.0 },
            LineDiskFlavor::FlatExact {
                chart: 0,
                radius: 0.7,
            },
        ] {
            let coarse = line_disk(&line, flavor, 8, 32).unwrap();
            let fine = line_disk(&line, flavor, 16, 64).unwrap();
            let r1 = stokes_residual(&coarse).unwrap();
            let r2 = stokes_residual(&fine).unwrap();
            let ratio = r1 / r2;
            assert!(
                (3.5..=4.5).contains(&ratio),
                "{:?}: ratio {} from {} / {}",
                flavor,
                ratio,
                r1,
                r2
            );
        }
    }

    #[test]
    fn charts_through_infinity_are_rejected() {
        let line = standard_line(6);
        // coordinate 2 of p + ζq is ζ/√2: vanishes at the disk center
        let err = line_disk(
            &line,
            LineDiskFlavor::FlatExact {
                chart: 2,
                radius: 0.7,
            },
            6,
            24,
        )
        .unwrap_err();
        assert_eq!(err.name(), "ChartHitsInfinity");
    }

    #[test]
    fn disk_records_round_trip() {
        let mut r = sampling::rng(620);
        let disks = vec![
            synthetic_flat_disk(4, 12, 1.3).unwrap(),
            synthetic_cylinder_disk(6, 18, 1.0, 0.7).unwrap(),
        ];
        for disk in disks {
            let record = disk.to_record();
            let text = serde_json::to_string(&record).unwrap();
            let parsed: DiskRecord = serde_json::from_str(&text).unwrap();
            let back = DiscretizedDiskMap::from_record(&parsed).unwrap();
            let phi = TestProfile::new(
                0.1,
                vec![(0.0, rand::Rng::gen_range(&mut r, 0.0..0.3)), (1.0, 0.9)],
            )
            .unwrap();
            let before = omega_phi_integral(&disk, &phi);
            let after = omega_phi_integral(&back, &phi);
            assert_eq!(before, after, "diff {:e}", (before - after).abs());
            assert_eq!(disk.boundary(), back.boundary());
        }
    }
}
