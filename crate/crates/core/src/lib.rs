//! Numerical toolkit for real structures on complex quadrics and the
//! symmetric dynamics attached to them.
//!
//! The crate is organized around one chain of constructions:
//!
//! * [`mobius`] — anti-holomorphic involutions of the Riemann sphere,
//!   their classification into the two conjugacy types (with and without
//!   fixed points), and the hyperboloid families that realize both types.
//! * [`quadric`] — smooth quadric hypersurfaces in complex projective
//!   space, projective lines lying on them, and the count of lines through
//!   a point meeting a fixed cycle.
//! * [`holcurve`] — behaviour of those lines under an ambient real
//!   structure: pseudo-fixed detection, normalization to genuinely fixed
//!   parametrizations, and intersection counts with an invariant
//!   hyperplane section.
//! * [`cotangent`] — the identification of the affine quadric with the
//!   (co)tangent side of the round sphere, Reeb/Liouville data on the
//!   unit cotangent level, and averaging of primitives to make them
//!   anti-invariant.
//! * [`orbits`] — shooting for symmetric periodic orbits of reversible
//!   Hamiltonian systems (round-sphere geodesic flow, Hill's lunar
//!   problem) by integrating between the fixed loci of the reversor.
//! * [`energy`] — discretized holomorphic-disk data: the cylindrical
//!   energy sup over a family of test profiles, Stokes-type consistency
//!   checks, and the uniform area bound for disks in the projective plane.
//!
//! Conventions used throughout: projective points are unit vectors with
//! the first sizeable coordinate rotated to the positive real axis;
//! quadrics are given by symmetric complex bilinear forms evaluated
//! without conjugation; all involutions are validated numerically rather
//! than trusted from their construction.

pub mod cotangent;
pub mod energy;
pub mod holcurve;
pub mod mobius;
pub mod orbits;
pub mod quadric;
pub mod sampling;

pub use num_complex::Complex64;
