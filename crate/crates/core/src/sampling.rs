//! Seeded random fixtures shared by the library, the test suites, and the
//! CLI: points, rotations, Möbius maps, hyperboloid parameters.
//!
//! Everything is driven by an explicit [`ChaCha8Rng`] so results are
//! reproducible from a recorded 64-bit seed.

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::mobius::{MobiusMap, ProjectivePoint};

/// Deterministic generator for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

pub fn gaussian_vector(rng: &mut impl Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| gaussian(rng))
}

pub fn gaussian_complex_vector(rng: &mut impl Rng, len: usize) -> DVector<Complex64> {
    DVector::from_fn(len, |_, _| gaussian_complex(rng))
}

/// Random point of CP^(len-1), uniform w.r.t. the Fubini–Study volume.
pub fn random_projective_point(rng: &mut impl Rng, len: usize) -> ProjectivePoint {
    loop {
        let v = gaussian_complex_vector(rng, len);
        if v.norm() > 1e-6 {
            return ProjectivePoint::new(v).expect("nonzero Gaussian vector");
        }
    }
}

/// Random unit vector in R^len.
pub fn random_unit_vector(rng: &mut impl Rng, len: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, len);
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Orthonormal pair (x, y) in R^len, uniform over the Stiefel manifold.
pub fn random_orthonormal_pair(rng: &mut impl Rng, len: usize) -> (DVector<f64>, DVector<f64>) {
    let x = random_unit_vector(rng, len);
    loop {
        let mut y = gaussian_vector(rng, len);
        y -= &x * x.dot(&y);
        let n = y.norm();
        if n > 1e-6 {
            return (x, y / n);
        }
    }
}

/// `count` mutually orthonormal random vectors in R^len.
pub fn random_orthonormal_frame(
    rng: &mut impl Rng,
    len: usize,
    count: usize,
) -> Vec<DVector<f64>> {
    assert!(count <= len, "frame larger than the ambient space");
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(count);
    while frame.len() < count {
        let mut v = gaussian_vector(rng, len);
        for e in &frame {
            let overlap = e.dot(&v);
            v -= e * overlap;
        }
        let n = v.norm();
        if n > 1e-6 {
            frame.push(v / n);
        }
    }
    frame
}

/// Point on the standard projective quadric sum z_j^2 = 0: [x + iy] for an
/// orthonormal pair (x, y).
pub fn random_isotropic_point(rng: &mut impl Rng, len: usize) -> ProjectivePoint {
    let (x, y) = random_orthonormal_pair(rng, len);
    let v = DVector::from_fn(len, |j, _| Complex64::new(x[j], y[j]));
    ProjectivePoint::new(v).expect("isotropic representative is nonzero")
}

/// Random line on the standard quadric: the two points [x₁+iy₁], [x₂+iy₂]
/// built from an orthonormal 4-frame are isotropic and mutually orthogonal
/// for the bilinear form, so they span a projective line inside the
/// quadric. Requires len ≥ 4.
pub fn random_isotropic_plane(
    rng: &mut impl Rng,
    len: usize,
) -> (ProjectivePoint, ProjectivePoint) {
    let frame = random_orthonormal_frame(rng, len, 4);
    let mk = |x: &DVector<f64>, y: &DVector<f64>| {
        ProjectivePoint::new(DVector::from_fn(len, |j, _| Complex64::new(x[j], y[j])))
            .expect("isotropic representative is nonzero")
    };
    (mk(&frame[0], &frame[1]), mk(&frame[2], &frame[3]))
}

/// Haar-ish random special orthogonal matrix via QR of a Gaussian matrix.
pub fn random_special_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _, | gaussian(rng));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the sign ambiguity of QR so the distribution is Haar, then flip a
    // column if needed to land in SO(n).
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..n {
            q[(i, n - 1)] = -q[(i, n - 1)];
        }
    }
    q
}

/// Random Möbius map with entries of moderate size.
pub fn random_mobius(rng: &mut impl Rng) -> MobiusMap {
    loop {
        let m = nalgebra::Matrix2::new(
            gaussian_complex(rng),
            gaussian_complex(rng),
            gaussian_complex(rng),
            gaussian_complex(rng),
        );
        if let Ok(map) = MobiusMap::new(m) {
            return map;
        }
    }
}

/// Point on the one-sheeted hyperboloid x1^2 + x2^2 + x3^2 - x4^2 = 1.
pub fn random_hyperboloid_plus(rng: &mut impl Rng) -> [f64; 4] {
    let x4 = gaussian(rng);
    let u = random_unit_vector(rng, 3) * (1.0 + x4 * x4).sqrt();
    [u[0], u[1], u[2], x4]
}

/// Point on the two-sheeted hyperboloid -x1^2 - x2^2 - x3^2 + x4^2 = 1
/// (both sheets).
pub fn random_hyperboloid_minus(rng: &mut impl Rng) -> [f64; 4] {
    let u = gaussian_vector(rng, 3);
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let x4 = sign * (1.0 + u.norm_squared()).sqrt();
    [u[0], u[1], u[2], x4]
}

/// Deterministic, roughly equidistributed covering of the unit sphere
/// (Fibonacci lattice). Used for search starts and displacement grids.
pub fn fibonacci_sphere(count: usize) -> Vec<Vector3<f64>> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let theta = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
            Vector3::new(r * theta.cos(), r * theta.sin(), z)
        })
        .collect()
}
