//! Symmetric periodic orbits of reversible flows, found by shooting from
//! the fixed locus of the reversing involution.
//!
//! A flow field f with a linear reversor R (R² = I, R·f(x) = −f(Rx))
//! carries time reversal: R conjugates the flow to its inverse. A
//! trajectory that starts on Fix(R) and hits Fix(R) again at time T/2
//! closes up into a periodic orbit of period T that is symmetric under R.
//! The finder drives the anti-invariant part of the half-period endpoint
//! to zero over (chart parameters, half period) with a damped
//! Gauss–Newton iteration; Jacobians come from central finite
//! differences, so no variational equations are integrated.
//!
//! Trajectories use classical fixed-step RK4 (default 2048 steps per
//! requested span) for reproducibility; certificates are recomputed by
//! honest full-period integration, never by the reflection shortcut used
//! to populate the sample list.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde_json::json;
use thiserror::Error;

/// Default number of RK4 steps for a requested time span.
pub const DEFAULT_STEPS: usize = 2048;
/// Convergence threshold on the anti-invariant defect of the endpoint.
pub const SHOOTING_TOL: f64 = 1e-10;
/// Smallest half period the shooting iteration will consider.
pub const MIN_HALF_PERIOD: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error("integration step failed near t = {t:.6} (singular or inadmissible state)")]
    StepFailure { t: f64 },
    #[error("state is not on the reversor's fixed locus (residual {residual:.3e})")]
    NotOnFixedLocus { residual: f64 },
    #[error("shooting did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("shooting Jacobian vanished (norm {norm:.3e}); the defect is locally flat")]
    DegenerateJacobian { norm: f64 },
    #[error("time span must be positive, got {t}")]
    NonPositiveSpan { t: f64 },
    #[error("need at least 16 integration steps, got {steps}")]
    TooFewSteps { steps: usize },
    #[error("reversor is not an involution (defect {defect:.3e})")]
    BadReversor { defect: f64 },
    #[error("expected states of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl OrbitError {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitError::StepFailure { .. } => "StepFailure",
            OrbitError::NotOnFixedLocus { .. } => "NotOnFixedLocus",
            OrbitError::NoConvergence { .. } => "NoConvergence",
            OrbitError::DegenerateJacobian { .. } => "DegenerateJacobian",
            OrbitError::NonPositiveSpan { .. } => "NonPositiveSpan",
            OrbitError::TooFewSteps { .. } => "TooFewSteps",
            OrbitError::BadReversor { .. } => "BadReversor",
            OrbitError::DimensionMismatch { .. } => "DimensionMismatch",
        }
    }
}

type FieldFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type ChartFn = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;
type EnergyFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GuardFn = Arc<dyn Fn(&DVector<f64>) -> bool + Send + Sync>;

/// A flow with a linear time-reversing involution and a chart of the
/// involution's fixed locus.
#[derive(Clone)]
pub struct InvolutiveFlowSystem {
    name: String,
    dimension: usize,
    chart_dimension: usize,
    vector_field: FieldFn,
    reversor: DMatrix<f64>,
    fixed_locus_chart: ChartFn,
    conserved_energy: Option<EnergyFn>,
    admissible: Option<GuardFn>,
}

impl std::fmt::Debug for InvolutiveFlowSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InvolutiveFlowSystem")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("chart_dimension", &self.chart_dimension)
            .finish()
    }
}

impl InvolutiveFlowSystem {
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        chart_dimension: usize,
        vector_field: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        reversor: DMatrix<f64>,
        fixed_locus_chart: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    ) -> Result<Self, OrbitError> {
        if reversor.nrows() != dimension || reversor.ncols() != dimension {
            return Err(OrbitError::DimensionMismatch {
                expected: dimension,
                got: reversor.nrows(),
            });
        }
        let defect = (&reversor * &reversor - DMatrix::identity(dimension, dimension)).norm();
        if defect > 1e-12 {
            return Err(OrbitError::BadReversor { defect });
        }
        Ok(InvolutiveFlowSystem {
            name: name.into(),
            dimension,
            chart_dimension,
            vector_field: Arc::new(vector_field),
            reversor,
            fixed_locus_chart: Arc::new(fixed_locus_chart),
            conserved_energy: None,
            admissible: None,
        })
    }

    pub fn with_energy(
        mut self,
        energy: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.conserved_energy = Some(Arc::new(energy));
        self
    }

    pub fn with_guard(
        mut self,
        guard: impl Fn(&DVector<f64>) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.admissible = Some(Arc::new(guard));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn chart_dimension(&self) -> usize {
        self.chart_dimension
    }

    pub fn field(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.vector_field)(x)
    }

    pub fn involute(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.reversor * x
    }

    pub fn reversor(&self) -> &DMatrix<f64> {
        &self.reversor
    }

    pub fn chart(&self, params: &[f64]) -> DVector<f64> {
        (self.fixed_locus_chart)(params)
    }

    pub fn energy(&self, x: &DVector<f64>) -> Option<f64> {
        self.conserved_energy.as_ref().map(|e| e(x))
    }

    pub fn is_admissible(&self, x: &DVector<f64>) -> bool {
        x.iter().all(|v| v.is_finite()) && self.admissible.as_ref().map_or(true, |g| g(x))
    }

    /// Projector onto the anti-invariant part: (I − R)/2. Its kernel is
    /// the fixed locus of the reversor.
    pub fn anti_invariant_projector(&self) -> DMatrix<f64> {
        (DMatrix::identity(self.dimension, self.dimension) - &self.reversor) * 0.5
    }

    /// Distance witness to the fixed locus: ‖R·x − x‖ / 2.
    pub fn fixed_locus_residual(&self, x: &DVector<f64>) -> f64 {
        (self.involute(x) - x).norm() * 0.5
    }

    /// ‖R f(x) + f(R x)‖ / max(1, ‖f(x)‖): zero exactly when the reversor
    /// conjugates the flow to its time reverse at x.
    pub fn time_reversal_residual(&self, x: &DVector<f64>) -> f64 {
        let fx = self.field(x);
        let frx = self.field(&self.involute(x));
        (self.involute(&fx) + frx).norm() / fx.norm().max(1.0)
    }
}

// ---------------------------------------------------------------------------
// Integration.
// ---------------------------------------------------------------------------

/// Classical RK4 with fixed step; returns the trajectory including both
/// endpoints (steps + 1 states).
pub fn integrate(
    sys: &InvolutiveFlowSystem,
    x0: &DVector<f64>,
    t_span: f64,
    steps: usize,
) -> Result<Vec<DVector<f64>>, OrbitError> {
    if t_span <= 0.0 {
        return Err(OrbitError::NonPositiveSpan { t: t_span });
    }
    if steps < 16 {
        return Err(OrbitError::TooFewSteps { steps });
    }
    if x0.len() != sys.dimension {
        return Err(OrbitError::DimensionMismatch {
            expected: sys.dimension,
            got: x0.len(),
        });
    }
    if !sys.is_admissible(x0) {
        return Err(OrbitError::StepFailure { t: 0.0 });
    }
    let h = t_span / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0.clone());
    let mut x = x0.clone();
    for k in 0..steps {
        let k1 = sys.field(&x);
        let k2 = sys.field(&(&x + &k1 * (h / 2.0)));
        let k3 = sys.field(&(&x + &k2 * (h / 2.0)));
        let k4 = sys.field(&(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !sys.is_admissible(&x) {
            return Err(OrbitError::StepFailure {
                t: (k + 1) as f64 * h,
            });
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Endpoint of [`integrate`].
pub fn flow_endpoint(
    sys: &InvolutiveFlowSystem,
    x0: &DVector<f64>,
    t_span: f64,
    steps: usize,
) -> Result<DVector<f64>, OrbitError> {
    Ok(integrate(sys, x0, t_span, steps)?.pop().expect("nonempty"))
}

/// Distance from the half-period endpoint to the fixed locus, for a start
/// on the fixed locus: ‖R·Φ(x0) − Φ(x0)‖ / 2.
pub fn symmetry_residual(
    sys: &InvolutiveFlowSystem,
    x0: &DVector<f64>,
    t_half: f64,
) -> Result<f64, OrbitError> {
    let start_defect = sys.fixed_locus_residual(x0);
    if start_defect > 1e-8 {
        return Err(OrbitError::NotOnFixedLocus {
            residual: start_defect,
        });
    }
    let end = flow_endpoint(sys, x0, t_half, DEFAULT_STEPS)?;
    Ok(sys.fixed_locus_residual(&end))
}

// ---------------------------------------------------------------------------
// Orbits and their certificates.
// ---------------------------------------------------------------------------

/// Residual certificates of a symmetric periodic orbit, all computed by
/// full-period integration.
#[derive(Clone, Copy, Debug)]
pub struct ResidualReport {
    /// ‖Φ_T(x0) − x0‖.
    pub closure: f64,
    /// sup over the grid of ‖v(t) − R·v(T−t)‖.
    pub symmetry_sup: f64,
    /// Distance of v(0) to the fixed locus.
    pub fixed_locus_start: f64,
    /// Distance of v(T/2) to the fixed locus.
    pub fixed_locus_half: f64,
    /// Relative drift of the conserved energy, when the system has one.
    pub energy_drift: Option<f64>,
}

impl ResidualReport {
    pub fn max_defect(&self) -> f64 {
        self.closure
            .max(self.symmetry_sup)
            .max(self.fixed_locus_start)
            .max(self.fixed_locus_half)
    }
}

/// A periodic orbit symmetric under the system's reversor.
#[derive(Clone, Debug)]
pub struct SymmetricOrbit {
    pub system: String,
    pub x0: DVector<f64>,
    pub period: f64,
    /// Uniform time samples over [0, T]; the second half is populated by
    /// the reflection v(t) = R·v(T−t).
    pub samples: Vec<DVector<f64>>,
    pub residuals: ResidualReport,
}

impl SymmetricOrbit {
    /// Scaling factor for the contact form that would normalize this
    /// orbit's period to 1: rescaling the form by 1/T multiplies every
    /// period by 1/T.
    pub fn normalizing_scale(&self) -> f64 {
        1.0 / self.period
    }

    pub fn export_json(&self) -> serde_json::Value {
        let samples: Vec<Vec<f64>> = self
            .samples
            .iter()
            .map(|s| s.iter().copied().collect())
            .collect();
        let mut residuals = json!({
            "closure": self.residuals.closure,
            "symmetry_sup": self.residuals.symmetry_sup,
            "fixed_locus_start": self.residuals.fixed_locus_start,
            "fixed_locus_half": self.residuals.fixed_locus_half,
        });
        if let Some(drift) = self.residuals.energy_drift {
            residuals["energy_drift"] = json!(drift);
        }
        json!({
            "system": self.system,
            "x0": self.x0.iter().copied().collect::<Vec<f64>>(),
            "period": self.period,
            "normalizing_scale": self.normalizing_scale(),
            "samples": samples,
            "residuals": residuals,
        })
    }

    /// CSV of the samples: `t,x0,x1,...` with a header row.
    pub fn export_csv(&self) -> String {
        let dim = self.x0.len();
        let mut out = String::from("t");
        for j in 0..dim {
            out.push_str(&format!(",x{}", j));
        }
        out.push('\n');
        let n = self.samples.len();
        for (i, s) in self.samples.iter().enumerate() {
            let t = self.period * i as f64 / (n - 1) as f64;
            out.push_str(&format!("{:.12e}", t));
            for v in s.iter() {
                out.push_str(&format!(",{:.12e}", v));
            }
            out.push('\n');
        }
        out
    }
}

/// Recompute all certificates of an orbit on a refined grid (twice the
/// orbit's own sample count) by honest full-period integration.
pub fn verify_symmetric_orbit(
    sys: &InvolutiveFlowSystem,
    orbit: &SymmetricOrbit,
) -> Result<ResidualReport, OrbitError> {
    let steps = (2 * (orbit.samples.len().max(2) - 1)).max(64);
    residuals_by_integration(sys, &orbit.x0, orbit.period, steps)
}

fn residuals_by_integration(
    sys: &InvolutiveFlowSystem,
    x0: &DVector<f64>,
    period: f64,
    steps: usize,
) -> Result<ResidualReport, OrbitError> {
    let steps = if steps % 2 == 0 { steps } else { steps + 1 };
    let traj = integrate(sys, x0, period, steps)?;
    let n = traj.len() - 1;
    let closure = (&traj[n] - x0).norm();
    let mut symmetry_sup: f64 = 0.0;
    for i in 0..=n {
        let mirrored = sys.involute(&traj[n - i]);
        symmetry_sup = symmetry_sup.max((&traj[i] - mirrored).norm());
    }
    let energy_drift = sys.energy(x0).map(|e0| {
        let scale = e0.abs().max(1.0);
        traj.iter()
            .map(|s| (sys.energy(s).expect("energy present") - e0).abs() / scale)
            .fold(0.0, f64::max)
    });
    Ok(ResidualReport {
        closure,
        symmetry_sup,
        fixed_locus_start: sys.fixed_locus_residual(x0),
        fixed_locus_half: sys.fixed_locus_residual(&traj[n / 2]),
        energy_drift,
    })
}

// ---------------------------------------------------------------------------
// The shooting finder.
// ---------------------------------------------------------------------------

/// Find a symmetric periodic orbit by damped Gauss–Newton over (chart
/// parameters, half period), driving the anti-invariant part of the
/// half-period endpoint below [`SHOOTING_TOL`].
pub fn find_symmetric_orbit(
    sys: &InvolutiveFlowSystem,
    seed_params: &[f64],
    t_half_guess: f64,
) -> Result<SymmetricOrbit, OrbitError> {
    if t_half_guess <= 0.0 {
        return Err(OrbitError::NonPositiveSpan { t: t_half_guess });
    }
    let x_seed = sys.chart(seed_params);
    let start_defect = sys.fixed_locus_residual(&x_seed);
    if start_defect > 1e-8 {
        return Err(OrbitError::NotOnFixedLocus {
            residual: start_defect,
        });
    }

    let proj = sys.anti_invariant_projector();
    let n_params = seed_params.len();
    let defect = |u: &DVector<f64>| -> Result<DVector<f64>, OrbitError> {
        let params: Vec<f64> = u.iter().take(n_params).copied().collect();
        let t_half = u[n_params].max(MIN_HALF_PERIOD);
        let end = flow_endpoint(sys, &sys.chart(&params), t_half, DEFAULT_STEPS)?;
        Ok(&proj * end)
    };

    let mut u = DVector::from_iterator(
        n_params + 1,
        seed_params
            .iter()
            .copied()
            .chain(std::iter::once(t_half_guess.max(MIN_HALF_PERIOD))),
    );
    let mut f = defect(&u)?;
    let max_iters = 100;
    for iteration in 0..max_iters {
        let res = f.norm();
        if res < SHOOTING_TOL {
            let t_half = u[n_params].max(MIN_HALF_PERIOD);
            let params: Vec<f64> = u.iter().take(n_params).copied().collect();
            return assemble_orbit(sys, &params, t_half);
        }

        // central finite-difference Jacobian
        let fd = 1e-6;
        let mut jac = DMatrix::zeros(f.len(), n_params + 1);
        for c in 0..n_params + 1 {
            let mut up = u.clone();
            up[c] += fd;
            let mut um = u.clone();
            um[c] -= fd;
            let col = (defect(&up)? - defect(&um)?) / (2.0 * fd);
            jac.set_column(c, &col);
        }
        let jac_norm = jac.norm();
        if jac_norm < 1e-12 * (1.0 + res) {
            return Err(OrbitError::DegenerateJacobian { norm: jac_norm });
        }

        let svd = jac.svd(true, true);
        let step = svd
            .solve(&(-&f), 1e-13)
            .map_err(|_| OrbitError::DegenerateJacobian { norm: jac_norm })?;

        let mut improved = false;
        let mut alpha = 1.0;
        for _ in 0..10 {
            let mut cand = &u + &step * alpha;
            cand[n_params] = cand[n_params].max(MIN_HALF_PERIOD);
            if let Ok(fc) = defect(&cand) {
                if fc.norm() < res {
                    u = cand;
                    f = fc;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            return Err(OrbitError::NoConvergence {
                residual: res,
                iterations: iteration + 1,
            });
        }
    }
    Err(OrbitError::NoConvergence {
        residual: f.norm(),
        iterations: max_iters,
    })
}

/// Build the doubled orbit from a converged half trajectory: samples on
/// [T/2, T] are the reflection R·v(T−t), while all residuals come from an
/// independent full-period integration.
fn assemble_orbit(
    sys: &InvolutiveFlowSystem,
    params: &[f64],
    t_half: f64,
) -> Result<SymmetricOrbit, OrbitError> {
    let x0 = sys.chart(params);
    let period = 2.0 * t_half;

    let half_steps = 4096;
    let stride = 8;
    let half = integrate(sys, &x0, t_half, half_steps)?;
    let mut samples: Vec<DVector<f64>> = half.iter().step_by(stride).cloned().collect();
    debug_assert_eq!(samples.len(), half_steps / stride + 1);
    // reflect: v(t) = R v(T−t) for t in (T/2, T]
    for i in (0..half_steps / stride).rev() {
        samples.push(sys.involute(&half[i * stride]));
    }

    let residuals = residuals_by_integration(sys, &x0, period, 2 * half_steps)?;
    Ok(SymmetricOrbit {
        system: sys.name().to_string(),
        x0,
        period,
        samples,
        residuals,
    })
}

// ---------------------------------------------------------------------------
// Builtin systems.
// ---------------------------------------------------------------------------

/// Geodesic flow on the unit cotangent bundle of the round S², as the
/// ambient field (q, p) ↦ (p, −‖p‖²·q) on R³ × R³, with the reversor
/// (q, p) ↦ (Rq, −Rp) induced by the reflection R = diag(1, 1, −1).
/// The fixed locus {q₃ = 0, p₁ = p₂ = 0} is charted by the equator angle.
pub fn geodesic_sphere_system() -> InvolutiveFlowSystem {
    let mut reversor = DMatrix::zeros(6, 6);
    for j in 0..3 {
        let sign = if j == 2 { -1.0 } else { 1.0 };
        reversor[(j, j)] = sign;
        reversor[(j + 3, j + 3)] = -sign;
    }
    InvolutiveFlowSystem::new(
        "geodesic-s2",
        6,
        1,
        |x: &DVector<f64>| {
            let p2 = x[3] * x[3] + x[4] * x[4] + x[5] * x[5];
            DVector::from_vec(vec![
                x[3],
                x[4],
                x[5],
                -p2 * x[0],
                -p2 * x[1],
                -p2 * x[2],
            ])
        },
        reversor,
        |params: &[f64]| {
            let theta = params[0];
            DVector::from_vec(vec![theta.cos(), theta.sin(), 0.0, 0.0, 0.0, 1.0])
        },
    )
    .expect("valid system")
    .with_energy(|x: &DVector<f64>| 0.5 * (x[3] * x[3] + x[4] * x[4] + x[5] * x[5]))
}

/// The Hamiltonian of Hill's lunar problem in rotating coordinates:
/// H = ½(p₁² + p₂²) + p₁q₂ − p₂q₁ − 1/‖q‖ − q₁² + ½q₂².
pub fn hill_energy(x: &DVector<f64>) -> f64 {
    let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
    let r = (q1 * q1 + q2 * q2).sqrt();
    0.5 * (p1 * p1 + p2 * p2) + p1 * q2 - p2 * q1 - 1.0 / r - q1 * q1 + 0.5 * q2 * q2
}

/// Energy of the critical (libration) points of [`hill_energy`]:
/// −3^{4/3}/2. Orbit searches make sense below this value, where the
/// bounded component around the origin is closed off.
pub fn hill_critical_energy() -> f64 {
    -0.5 * 3.0f64.powf(4.0 / 3.0)
}

fn hill_field(x: &DVector<f64>) -> DVector<f64> {
    let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
    let r2 = q1 * q1 + q2 * q2;
    let r3 = r2 * r2.sqrt();
    DVector::from_vec(vec![
        p1 + q2,
        p2 - q1,
        p2 - q1 / r3 + 2.0 * q1,
        -p1 - q2 / r3 - q2,
    ])
}

const HILL_COLLISION_RADIUS: f64 = 1e-3;

fn hill_guard(x: &DVector<f64>) -> bool {
    x[0] * x[0] + x[1] * x[1] > HILL_COLLISION_RADIUS * HILL_COLLISION_RADIUS
}

/// Hill's lunar problem with the reversor ρ₁(q, p) = ((q₁, −q₂), (−p₁, p₂));
/// its fixed locus {q₂ = 0, p₁ = 0} is charted by (q₁, p₂).
pub fn hill_system_rho1() -> InvolutiveFlowSystem {
    let reversor = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, -1.0, 1.0]));
    InvolutiveFlowSystem::new("hill-rho1", 4, 2, hill_field, reversor, |params: &[f64]| {
        DVector::from_vec(vec![params[0], 0.0, 0.0, params[1]])
    })
    .expect("valid system")
    .with_energy(hill_energy)
    .with_guard(hill_guard)
}

/// Hill's lunar problem with the commuting reversor
/// ρ₂(q, p) = ((−q₁, q₂), (p₁, −p₂)); its fixed locus {q₁ = 0, p₂ = 0}
/// is charted by (q₂, p₁).
pub fn hill_system_rho2() -> InvolutiveFlowSystem {
    let reversor = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0, -1.0]));
    InvolutiveFlowSystem::new("hill-rho2", 4, 2, hill_field, reversor, |params: &[f64]| {
        DVector::from_vec(vec![0.0, params[0], params[1], 0.0])
    })
    .expect("valid system")
    .with_energy(hill_energy)
    .with_guard(hill_guard)
}

/// On the ρ₁ fixed locus {q₂ = 0, p₁ = 0}, solve H(q₁, 0, 0, p₂) = h for
/// p₂; the two roots are the prograde/retrograde crossings at that
/// abscissa. Returns None when the locus misses the energy level there.
pub fn hill_locus_covector(q1: f64, h: f64) -> Option<(f64, f64)> {
    // ½p₂² − p₂q₁ − 1/|q₁| − q₁² = h
    let disc = q1 * q1 + 2.0 * (h + 1.0 / q1.abs() + q1 * q1);
    if disc < 0.0 || q1 == 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((q1 - s, q1 + s))
}

/// The builtin catalog: the geodesic flow on ST*S² and Hill's lunar
/// problem under each of its two commuting reversors.
pub fn builtin_systems() -> Vec<InvolutiveFlowSystem> {
    vec![geodesic_sphere_system(), hill_system_rho1(), hill_system_rho2()]
}

pub fn builtin_system(name: &str) -> Option<InvolutiveFlowSystem> {
    builtin_systems().into_iter().find(|s| s.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::Rng;
    use std::f64::consts::PI;

    fn geodesic_closed_form(theta: f64, t: f64) -> DVector<f64> {
        // q(t) = q0 cos t + p0 sin t, p(t) = p0 cos t − q0 sin t
        let q0 = [theta.cos(), theta.sin(), 0.0];
        let p0 = [0.0, 0.0, 1.0];
        let mut x = DVector::zeros(6);
        for j in 0..3 {
            x[j] = q0[j] * t.cos() + p0[j] * t.sin();
            x[j + 3] = p0[j] * t.cos() - q0[j] * t.sin();
        }
        x
    }

    #[test]
    fn catalog_systems_are_reversible() {
        let mut r = sampling::rng(520);
        let systems = builtin_systems();
        assert!(systems.len() >= 2);
        for sys in &systems {
            // exact linear involution
            let dim = sys.dimension();
            let id = DMatrix::identity(dim, dim);
            assert!((sys.reversor() * sys.reversor() - id).norm() < 1e-14);
            for _ in 0..100 {
                let mut x = sampling::gaussian_vector(&mut r, dim);
                if sys.name().starts_with("hill") {
                    // keep clear of the collision where the field blows up
                    while x[0] * x[0] + x[1] * x[1] < 0.25 {
                        x = sampling::gaussian_vector(&mut r, dim);
                    }
                }
                let y = sys.involute(&sys.involute(&x));
                assert!((y - &x).norm() < 1e-10);
                assert!(
                    sys.time_reversal_residual(&x) < 1e-6,
                    "{} fails time reversal",
                    sys.name()
                );
            }
        }
    }

    #[test]
    fn hill_reversors_commute() {
        let r1 = hill_system_rho1();
        let r2 = hill_system_rho2();
        let mut r = sampling::rng(521);
        for _ in 0..50 {
            let x = sampling::gaussian_vector(&mut r, 4);
            let a = r1.involute(&r2.involute(&x));
            let b = r2.involute(&r1.involute(&x));
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn charts_land_on_the_fixed_locus() {
        let mut r = sampling::rng(522);
        for sys in builtin_systems() {
            for _ in 0..20 {
                let params: Vec<f64> = (0..sys.chart_dimension())
                    .map(|_| r.gen_range(-1.5..1.5))
                    .collect();
                let x = sys.chart(&params);
                assert!(sys.fixed_locus_residual(&x) < 1e-14);
            }
        }
    }

    #[test]
    fn geodesic_integration_matches_the_closed_form() {
        let sys = geodesic_sphere_system();
        let x0 = geodesic_closed_form(0.0, 0.0);
        let traj = integrate(&sys, &x0, 2.0 * PI, DEFAULT_STEPS).unwrap();
        let back = traj.last().unwrap();
        assert!((back - &x0).norm() < 1e-8);

        // interior points too
        let quarter = &traj[DEFAULT_STEPS / 4];
        assert!((quarter - geodesic_closed_form(0.0, PI / 2.0)).norm() < 1e-8);

        // |q| and |p| are conserved
        for s in traj.iter().step_by(64) {
            let qn = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
            let pn = (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]).sqrt();
            assert!((qn - 1.0).abs() < 1e-8);
            assert!((pn - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn short_time_integration_is_first_order_accurate() {
        let sys = geodesic_sphere_system();
        let x0 = geodesic_closed_form(0.3, 0.0);
        let t = 1e-6;
        let end = flow_endpoint(&sys, &x0, t, 16).unwrap();
        let euler = &x0 + sys.field(&x0) * t;
        assert!((end - euler).norm() < 1e-11);
    }

    #[test]
    fn integration_rejects_bad_arguments_and_collisions() {
        let sys = hill_system_rho1();
        let x0 = DVector::from_vec(vec![1e-4, 0.0, 0.0, 0.1]);
        assert_eq!(
            integrate(&sys, &x0, 1.0, 2048).unwrap_err().name(),
            "StepFailure"
        );

        let ok = DVector::from_vec(vec![0.3, 0.0, 0.0, -1.2]);
        assert_eq!(
            integrate(&sys, &ok, -1.0, 2048).unwrap_err().name(),
            "NonPositiveSpan"
        );
        assert_eq!(
            integrate(&sys, &ok, 1.0, 8).unwrap_err().name(),
            "TooFewSteps"
        );
    }

    #[test]
    fn symmetry_residual_worked_examples() {
        let sys = geodesic_sphere_system();
        let x0 = sys.chart(&[0.0]);
        // half a meridian lands back on the fixed locus
        let r_half = symmetry_residual(&sys, &x0, PI).unwrap();
        assert!(r_half < 1e-8, "residual {}", r_half);
        // a quarter meridian is far from it: closed form gives
        // q=(0,0,1), p=(−1,0,0), at distance √2 from the locus
        let r_quarter = symmetry_residual(&sys, &x0, PI / 2.0).unwrap();
        assert!((r_quarter - 2.0f64.sqrt()).abs() < 1e-6);

        let off = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            symmetry_residual(&sys, &off, PI).unwrap_err().name(),
            "NotOnFixedLocus"
        );
    }

    #[test]
    fn finder_recovers_meridian_geodesics() {
        let sys = geodesic_sphere_system();
        let orbit = find_symmetric_orbit(&sys, &[0.05], 3.0).unwrap();
        assert!((orbit.period - 2.0 * PI).abs() < 1e-6, "T = {}", orbit.period);
        assert!(orbit.residuals.max_defect() < 1e-6);
        assert!(orbit.residuals.energy_drift.unwrap() < 1e-8);

        let report = verify_symmetric_orbit(&sys, &orbit).unwrap();
        assert!(report.max_defect() < 1e-6);
        assert!((orbit.normalizing_scale() - 1.0 / orbit.period).abs() < 1e-15);
    }

    #[test]
    fn finder_rejects_a_hopeless_half_period() {
        let sys = geodesic_sphere_system();
        let err = find_symmetric_orbit(&sys, &[0.0], 1e-3).unwrap_err();
        assert_eq!(err.name(), "NoConvergence");
    }

    #[test]
    fn finder_reports_flat_defects() {
        // A rigged system whose defect cannot be moved at all: zero field
        // and a chart sitting a hair off the fixed locus.
        let sys = InvolutiveFlowSystem::new(
            "flat",
            2,
            1,
            |_: &DVector<f64>| DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])),
            |params: &[f64]| DVector::from_vec(vec![params[0], 4e-9]),
        )
        .unwrap();
        let err = find_symmetric_orbit(&sys, &[0.3], 1.0).unwrap_err();
        assert_eq!(err.name(), "DegenerateJacobian");
    }

    #[test]
    fn verify_flags_corrupted_orbits() {
        let sys = geodesic_sphere_system();
        let orbit = find_symmetric_orbit(&sys, &[0.4], 3.0).unwrap();

        let mut wrong_period = orbit.clone();
        wrong_period.period += 0.1;
        let report = verify_symmetric_orbit(&sys, &wrong_period).unwrap();
        assert!(report.closure > 1e-2);

        // a tilted great circle closes up but is not reversor-symmetric
        let s = 0.5f64.sqrt();
        let tilted = SymmetricOrbit {
            system: sys.name().to_string(),
            x0: DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, s, s]),
            period: 2.0 * PI,
            samples: vec![DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, s, s]); 513],
            residuals: ResidualReport {
                closure: 0.0,
                symmetry_sup: 0.0,
                fixed_locus_start: 0.0,
                fixed_locus_half: 0.0,
                energy_drift: None,
            },
        };
        let report = verify_symmetric_orbit(&sys, &tilted).unwrap();
        assert!(report.closure < 1e-6, "tilted circle still closes");
        assert!(report.symmetry_sup > 1e-1, "tilt must break the symmetry");
    }

    #[test]
    fn finder_produces_a_subcritical_hill_orbit() {
        // Seed frozen from the scan below: abscissa 0.25 on the rho1
        // locus, prograde-signed covector branch at energy -2.25, short
        // half-period guess. The finder settles on a nearby retrograde
        // orbit of period ~1.2415 at H ~ -2.2451.
        let h = -2.25;
        let sys = hill_system_rho1();
        assert!(h < hill_critical_energy());
        let (_, p2) = hill_locus_covector(0.25, h).unwrap();
        let orbit = find_symmetric_orbit(&sys, &[0.25, p2], 0.5).unwrap();

        assert!((orbit.period - 1.241478).abs() < 1e-3, "T = {}", orbit.period);
        let energy = hill_energy(&orbit.x0);
        assert!(energy < hill_critical_energy(), "H = {}", energy);
        assert!(orbit.residuals.max_defect() < 1e-6);
        assert!(orbit.residuals.energy_drift.unwrap() < 1e-8);

        let report = verify_symmetric_orbit(&sys, &orbit).unwrap();
        assert!(report.max_defect() < 1e-6);
        assert!(report.energy_drift.unwrap() < 1e-8);

        // the search is deterministic, so a rerun reproduces the orbit
        let again = find_symmetric_orbit(&sys, &[0.25, p2], 0.5).unwrap();
        assert_eq!(orbit.period, again.period);
        assert_eq!(orbit.x0, again.x0);
    }

    #[test]
    #[ignore]
    fn hill_seed_scan() {
        // dev scan: locate a converging retrograde seed at h = -2.25
        let h = -2.25;
        let sys = hill_system_rho1();
        println!("critical energy {}", hill_critical_energy());
        for &q1 in &[0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45] {
            if let Some((lo, hi)) = hill_locus_covector(q1, h) {
                for &p2 in &[lo, hi] {
                    for &tg in &[0.5, 1.0, 1.5, 2.0, 3.0] {
                        match find_symmetric_orbit(&sys, &[q1, p2], tg) {
                            Ok(orbit) => {
                                let e = hill_energy(&orbit.x0);
                                println!(
                                    "q1={:.2} p2={:+.4} tg={:.1} -> T={:.6} x0=({:.5},{:.5}) H={:.6} defect={:.2e} drift={:.2e}",
                                    q1, p2, tg, orbit.period, orbit.x0[0], orbit.x0[3], e,
                                    orbit.residuals.max_defect(),
                                    orbit.residuals.energy_drift.unwrap()
                                );
                            }
                            Err(e) => println!(
                                "q1={:.2} p2={:+.4} tg={:.1} -> {}",
                                q1, p2, tg, e.name()
                            ),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_export_formats_are_well_formed() {
        let sys = geodesic_sphere_system();
        let orbit = find_symmetric_orbit(&sys, &[0.0], 3.0).unwrap();
        let v = orbit.export_json();
        assert_eq!(v["system"], "geodesic-s2");
        assert!(v["samples"].as_array().unwrap().len() > 100);
        assert!(v["residuals"]["closure"].as_f64().unwrap() < 1e-6);

        let csv = orbit.export_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,x0,x1,x2,x3,x4,x5");
        assert_eq!(csv.lines().count(), orbit.samples.len() + 1);
    }
}
