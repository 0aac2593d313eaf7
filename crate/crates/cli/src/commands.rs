//! One handler per subcommand. Handlers parse their mathematical payload,
//! call into the core crate, and return either a JSON result (wrapped into
//! the envelope by main) or a CSV body.

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use realsft_core::cotangent::{
    anti_average_primitive, cone_to_symplectization, cotangent_to_quadric,
    project_to_quadric_tangent, quadric_to_cotangent, smooth_differential_fd,
    symplectic_form_ambient, symplectic_form_cotangent, symplectization_to_cone,
    AffineQuadricPoint, CotangentState, InvolutionMap, OneForm, FD_STEP,
};
use realsft_core::energy::{
    boundary_circulation, geometric_omega_integral, sft_energy_estimate, DiscretizedDiskMap,
    DiskRecord,
};
use realsft_core::holcurve::{
    count_hyperplane_intersections, detect_pseudo_fixed, fixed_point_residual,
    hyperplane_intersection_parameter, involute_line, normalize_to_fixed, AmbientInvolution,
    PseudoFixResult, RationalLineMap,
};
use realsft_core::mobius::{
    fixed_point_set, parameter_panel, AntiInvolution, FixedCircle, FixedPointSet, MobiusMap,
    ProjectivePoint,
};
use realsft_core::orbits::{
    builtin_system, builtin_systems, find_symmetric_orbit, verify_symmetric_orbit,
    ResidualReport, SymmetricOrbit,
};
use realsft_core::quadric::{
    enumerate_lines, grassmannian_plane, grassmannian_point, make_line, Decoration, Hyperplane,
    LineOnQuadric, Quadric,
};
use realsft_core::sampling;

use crate::parse;
use crate::{Command, Failure, Format, Output, RunConfig};

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Output, Failure> {
    if cfg.format == Format::Csv
        && !matches!(cmd, Command::GwCount { .. } | Command::FindOrbit { .. })
    {
        return Err(Failure::Usage(format!(
            "{} does not produce csv; use --format json",
            cmd.name()
        )));
    }
    match cmd {
        Command::ClassifyInvolution { matrix } => classify_involution(matrix, cfg),
        Command::FixedCircle { matrix } => fixed_circle(matrix, cfg),
        Command::Conjugator { matrix } => conjugator(matrix, cfg),
        Command::QuadricContains { point, form } => quadric_contains(point, form.as_deref()),
        Command::MakeLine { p, q, form } => make_line_cmd(p, q, form.as_deref()),
        Command::GwCount { quadric_dim, trials } => gw_count(*quadric_dim, *trials, cfg),
        Command::Grassmannian { x, y, point } => {
            grassmannian(x.as_deref(), y.as_deref(), point.as_deref())
        }
        Command::MapCotangent { point, q, p, variant } => {
            map_cotangent(point.as_deref(), q.as_deref(), p.as_deref(), variant)
        }
        Command::PullbackCheck { samples, dim } => pullback_check(*samples, *dim, cfg),
        Command::AntiAverageCheck { matrix, samples } => {
            anti_average_check(matrix, *samples, cfg)
        }
        Command::InvoluteLine { p, q, perm, signs, form } => {
            involute_line_cmd(p, q, perm, signs, form.as_deref())
        }
        Command::DetectPseudoFixed { p, q, perm, signs, form } => {
            detect_pseudo_fixed_cmd(p, q, perm, signs, form.as_deref())
        }
        Command::NormalizeFixed { p, q, perm, signs, form } => {
            normalize_fixed_cmd(p, q, perm, signs, form.as_deref())
        }
        Command::SigmaCount { p, q, sigma, form } => {
            sigma_count(p, q, sigma, form.as_deref())
        }
        Command::FindOrbit { system, seed_angle, chart, t_half_guess } => {
            find_orbit(system, *seed_angle, chart.as_deref(), *t_half_guess, cfg)
        }
        Command::VerifyOrbit { input } => verify_orbit(input, cfg),
        Command::ListSystems => list_systems(),
        Command::SftEnergy { disk, family_size } => sft_energy(disk, *family_size),
        Command::StokesCheck { disk } => stokes_check(disk, cfg),
    }
}

// ---------------------------------------------------------------------------
// Argument and JSON helpers.
// ---------------------------------------------------------------------------

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn point_json(p: &ProjectivePoint) -> Value {
    Value::Array(p.coords().iter().map(|&z| complex_json(z)).collect())
}

fn real_vec_json(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|&x| json!(x)).collect())
}

fn mobius_json(m: &MobiusMap) -> Value {
    let a = m.matrix();
    json!([
        [complex_json(a[(0, 0)]), complex_json(a[(0, 1)])],
        [complex_json(a[(1, 0)]), complex_json(a[(1, 1)])],
    ])
}

fn vector3_json(v: Vector3<f64>) -> Value {
    json!([v.x, v.y, v.z])
}

fn circle_fields(c: &FixedCircle, result: &mut Value) {
    result["normal"] = vector3_json(c.normal());
    result["offset"] = json!(c.offset());
    result["center"] = vector3_json(c.center());
    result["radius"] = json!(c.radius());
}

fn point_arg(s: &str) -> Result<ProjectivePoint, Failure> {
    let entries = parse::parse_complex_vector(s).map_err(Failure::parse)?;
    Ok(ProjectivePoint::new(DVector::from_vec(entries))?)
}

fn real_vector_arg(s: &str) -> Result<DVector<f64>, Failure> {
    Ok(DVector::from_vec(
        parse::parse_real_vector(s).map_err(Failure::parse)?,
    ))
}

fn complex_vector_arg(s: &str) -> Result<DVector<Complex64>, Failure> {
    Ok(DVector::from_vec(
        parse::parse_complex_vector(s).map_err(Failure::parse)?,
    ))
}

fn mobius_arg(s: &str) -> Result<MobiusMap, Failure> {
    let m = parse::parse_complex_square_matrix(s).map_err(Failure::parse)?;
    if m.nrows() != 2 {
        return Err(Failure::parse(format!(
            "expected a 2x2 matrix, got {0}x{0}",
            m.nrows()
        )));
    }
    Ok(MobiusMap::new(Matrix2::new(
        m[(0, 0)],
        m[(0, 1)],
        m[(1, 0)],
        m[(1, 1)],
    ))?)
}

fn anti_involution_arg(s: &str, cfg: &RunConfig) -> Result<AntiInvolution, Failure> {
    let inv = AntiInvolution::new(mobius_arg(s)?);
    inv.validate(cfg.tol_classification)?;
    Ok(inv)
}

/// The quadric to work on: an explicit Gram matrix, or the standard one
/// matching the coordinate length.
fn quadric_for(form: Option<&str>, len: usize) -> Result<Quadric, Failure> {
    match form {
        Some(s) => {
            let m = parse::parse_complex_square_matrix(s).map_err(Failure::parse)?;
            Ok(Quadric::new(m)?)
        }
        None => {
            if len < 3 {
                return Err(Failure::domain(
                    "UnsupportedDimension",
                    format!("need at least 3 homogeneous coordinates, got {len}"),
                ));
            }
            Ok(Quadric::standard(len - 2))
        }
    }
}

fn line_arg(
    quadric: &Quadric,
    p: &str,
    q: &str,
) -> Result<RationalLineMap, Failure> {
    let line = make_line(quadric, &point_arg(p)?, &point_arg(q)?)?;
    Ok(RationalLineMap::new(line))
}

fn ambient_involution_arg(perm: &str, signs: &str) -> Result<AmbientInvolution, Failure> {
    let perm = parse::parse_usize_vector(perm).map_err(Failure::parse)?;
    let signs = parse::parse_int_vector(signs).map_err(Failure::parse)?;
    Ok(AmbientInvolution::new(perm, signs)?)
}

fn load_disk(path: &std::path::Path) -> Result<DiscretizedDiskMap, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    let record: DiskRecord = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("disk file {}: {e}", path.display())))?;
    Ok(DiscretizedDiskMap::from_record(&record)?)
}

// ---------------------------------------------------------------------------
// Involutions on the parameter sphere.
// ---------------------------------------------------------------------------

fn classify_involution(matrix: &str, cfg: &RunConfig) -> Result<Output, Failure> {
    let inv = anti_involution_arg(matrix, cfg)?;
    let class = inv.classify()?;
    let fixed = fixed_point_set(&inv)?;
    let mut result = json!({
        "type": class.as_str(),
        "fixed_set": match fixed {
            FixedPointSet::Circle(_) => "circle",
            FixedPointSet::Empty => "empty",
        },
        "square_residual": inv.involution_residual(),
    });
    if let FixedPointSet::Circle(c) = &fixed {
        let mut circle = json!({});
        circle_fields(c, &mut circle);
        result["circle"] = circle;
    }
    Ok(Output::Json(result))
}

fn fixed_circle(matrix: &str, cfg: &RunConfig) -> Result<Output, Failure> {
    let inv = anti_involution_arg(matrix, cfg)?;
    let mut result = match fixed_point_set(&inv)? {
        FixedPointSet::Circle(_) => json!({ "kind": "circle" }),
        FixedPointSet::Empty => json!({ "kind": "empty" }),
    };
    if let FixedPointSet::Circle(c) = fixed_point_set(&inv)? {
        circle_fields(&c, &mut result);
    }
    Ok(Output::Json(result))
}

fn conjugator(matrix: &str, cfg: &RunConfig) -> Result<Output, Failure> {
    let inv = anti_involution_arg(matrix, cfg)?;
    let psi = realsft_core::mobius::conjugator_to_standard(&inv)?;
    let transported = AntiInvolution::standard_conjugation().conjugate_by(&psi);
    let mut residual = 0.0f64;
    for t in parameter_panel() {
        residual = residual.max(transported.apply(&t).distance(&inv.apply(&t)));
    }
    Ok(Output::Json(json!({
        "matrix": mobius_json(&psi),
        "residual": residual,
    })))
}

// ---------------------------------------------------------------------------
// Quadrics and lines.
// ---------------------------------------------------------------------------

fn quadric_contains(point: &str, form: Option<&str>) -> Result<Output, Failure> {
    let z = point_arg(point)?;
    let quadric = quadric_for(form, z.len())?;
    let contains = quadric.contains(&z)?;
    let residual = quadric.bilinear(&z, &z).norm();
    Ok(Output::Json(json!({
        "contains": contains,
        "residual": residual,
    })))
}

fn make_line_cmd(p: &str, q: &str, form: Option<&str>) -> Result<Output, Failure> {
    let pp = point_arg(p)?;
    let quadric = quadric_for(form, pp.len())?;
    let line = make_line(&quadric, &pp, &point_arg(q)?)?;
    Ok(Output::Json(json!({
        "p": point_json(line.p()),
        "q": point_json(line.q()),
    })))
}

fn rotate_point(a: &DMatrix<Complex64>, z: &ProjectivePoint) -> Result<ProjectivePoint, Failure> {
    Ok(ProjectivePoint::new(a * z.coords())?)
}

fn coord_point(len: usize, re_at: usize, im_at: usize) -> ProjectivePoint {
    let mut v = DVector::zeros(len);
    v[re_at] = Complex64::new(1.0, 0.0);
    v[im_at] = Complex64::new(0.0, 1.0);
    ProjectivePoint::new(v).expect("coordinate point is nonzero")
}

fn line_residual(quadric: &Quadric, line: &LineOnQuadric, sigma: &Hyperplane) -> f64 {
    let mut residual: f64 = sigma.eval(line.q()).norm();
    for t in parameter_panel() {
        if let Ok(z) = line.point_at(t.coords()[0], t.coords()[1]) {
            residual = residual.max(quadric.bilinear(&z, &z).norm());
        }
    }
    residual
}

/// Rotated generic (point, cycle, hyperplane) configurations on the
/// standard quadric; the count of lines through the point meeting the
/// cycle inside the hyperplane is 1 for every trial.
fn gw_count(quadric_dim: usize, trials: usize, cfg: &RunConfig) -> Result<Output, Failure> {
    if quadric_dim < 3 {
        return Err(Failure::domain(
            "UnsupportedDimension",
            format!("quadric dimension must be at least 3, got {quadric_dim}"),
        ));
    }
    let len = quadric_dim + 2;
    let quadric = Quadric::standard(quadric_dim);
    let p = coord_point(len, 0, len - 1);
    let c1 = coord_point(len, 0, 1);
    let c2 = coord_point(len, 2, 3);
    let sigma = Hyperplane::coordinate(len, len - 1);
    let mut rng = sampling::rng(cfg.seed);
    let mut counts = Vec::with_capacity(trials);
    let mut max_residual = 0.0f64;
    for _ in 0..trials {
        let a = sampling::random_special_orthogonal(&mut rng, len)
            .map(|x| Complex64::new(x, 0.0));
        let rp = rotate_point(&a, &p)?;
        let cycle = make_line(&quadric, &rotate_point(&a, &c1)?, &rotate_point(&a, &c2)?)?;
        let rsigma = Hyperplane::new(&a * sigma.coeffs())?;
        let dec = Decoration::new(rsigma.clone(), cycle, "line")?;
        let lines = enumerate_lines(&quadric, &rp, &dec)?;
        for line in &lines {
            let res = line_residual(&quadric, line, &rsigma).max(line.p().distance(&rp));
            max_residual = max_residual.max(res);
        }
        counts.push(lines.len());
    }
    let all_one = counts.iter().all(|&c| c == 1);
    if cfg.format == Format::Csv {
        let mut body = String::from("trial,count\n");
        for (i, c) in counts.iter().enumerate() {
            body.push_str(&format!("{i},{c}\n"));
        }
        return Ok(Output::Csv(body));
    }
    Ok(Output::Json(json!({
        "quadric_dim": quadric_dim,
        "trials": trials,
        "counts": counts,
        "all_one": all_one,
        "max_residual": max_residual,
    })))
}

fn grassmannian(
    x: Option<&str>,
    y: Option<&str>,
    point: Option<&str>,
) -> Result<Output, Failure> {
    match (x, y, point) {
        (Some(x), Some(y), None) => {
            let z = grassmannian_point(&real_vector_arg(x)?, &real_vector_arg(y)?)?;
            Ok(Output::Json(json!({ "point": point_json(&z) })))
        }
        (None, None, Some(point)) => {
            let (x, y) = grassmannian_plane(&point_arg(point)?)?;
            Ok(Output::Json(json!({
                "x": real_vec_json(&x),
                "y": real_vec_json(&y),
            })))
        }
        _ => Err(Failure::Usage(
            "provide either --x with --y (plane to point) or --point (point to plane)"
                .to_string(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Cotangent charts.
// ---------------------------------------------------------------------------

fn map_cotangent(
    point: Option<&str>,
    q: Option<&str>,
    p: Option<&str>,
    variant: &str,
) -> Result<Output, Failure> {
    match (point, q, p) {
        (Some(point), None, None) => {
            let zv = complex_vector_arg(point)?;
            let state = match variant {
                "cone" => cone_to_symplectization(&AffineQuadricPoint::cone(zv)?)?,
                _ => quadric_to_cotangent(&AffineQuadricPoint::smooth(zv)?)?,
            };
            Ok(Output::Json(json!({
                "variant": variant,
                "q": real_vec_json(state.q()),
                "p": real_vec_json(state.p()),
            })))
        }
        (None, Some(q), Some(p)) => {
            let state = CotangentState::new(real_vector_arg(q)?, real_vector_arg(p)?)?;
            let z = match variant {
                "cone" => symplectization_to_cone(&state)?,
                _ => cotangent_to_quadric(&state),
            };
            let coords: Vec<Value> = z.z().iter().map(|&c| complex_json(c)).collect();
            Ok(Output::Json(json!({
                "variant": variant,
                "point": coords,
            })))
        }
        _ => Err(Failure::Usage(
            "provide either --point (to cotangent data) or --q with --p (to the quadric)"
                .to_string(),
        )),
    }
}

/// Round-trip and symplectic-form pullback residuals of the smooth chart
/// at random states.
fn pullback_check(samples: usize, dim: usize, cfg: &RunConfig) -> Result<Output, Failure> {
    if dim < 2 {
        return Err(Failure::domain(
            "DimensionMismatch",
            format!("ambient dimension must be at least 2, got {dim}"),
        ));
    }
    let mut rng = sampling::rng(cfg.seed);
    let mut round_trip_max = 0.0f64;
    let mut form_pullback_max = 0.0f64;
    for _ in 0..samples {
        let (q, pdir) = sampling::random_orthonormal_pair(&mut rng, dim);
        let s = CotangentState::new(q, pdir * (0.1 + rng.gen::<f64>() * 3.0))?;
        let z = cotangent_to_quadric(&s);
        let rt = quadric_to_cotangent(&z)?;
        round_trip_max =
            round_trip_max.max((s.q() - rt.q()).norm().max((s.p() - rt.p()).norm()));
        let v = project_to_quadric_tangent(&z, &sampling::gaussian_complex_vector(&mut rng, dim));
        let w = project_to_quadric_tangent(&z, &sampling::gaussian_complex_vector(&mut rng, dim));
        let omega_ambient = symplectic_form_ambient(&v, &w);
        let x = z.real_part();
        let y = z.imag_part();
        let push_v =
            smooth_differential_fd(&x, &y, &v.map(|c| c.re), &v.map(|c| c.im), FD_STEP);
        let push_w =
            smooth_differential_fd(&x, &y, &w.map(|c| c.re), &w.map(|c| c.im), FD_STEP);
        let omega_canonical = symplectic_form_cotangent(&push_v, &push_w);
        form_pullback_max = form_pullback_max
            .max((omega_ambient - omega_canonical).abs() / (1.0 + v.norm() * w.norm()));
    }
    let pass = round_trip_max <= cfg.tol_residual && form_pullback_max <= cfg.tol_quadrature;
    Ok(Output::Json(json!({
        "samples": samples,
        "dim": dim,
        "round_trip_max": round_trip_max,
        "form_pullback_max": form_pullback_max,
        "pass": pass,
    })))
}

fn anti_average_check(matrix: &str, samples: usize, cfg: &RunConfig) -> Result<Output, Failure> {
    let m = parse::parse_real_square_matrix(matrix).map_err(Failure::parse)?;
    let n = m.nrows();
    if n % 2 != 0 {
        return Err(Failure::parse(format!(
            "state dimension must be even, got {n}"
        )));
    }
    let square_defect = (&m * &m - DMatrix::<f64>::identity(n, n)).norm();
    if square_defect > 1e-10 {
        return Err(Failure::domain(
            "NotAnInvolution",
            format!("matrix squared differs from the identity by {square_defect:.3e}"),
        ));
    }
    let rho = InvolutionMap::linear(m);
    let lambda = OneForm::canonical(n / 2);
    let mut rng = sampling::rng(cfg.seed);
    let precondition: Vec<DVector<f64>> = (0..samples.max(1))
        .map(|_| sampling::gaussian_vector(&mut rng, n))
        .collect();
    let tilde = anti_average_primitive(&lambda, &rho, &precondition)?;
    let mut anti_invariance_max = 0.0f64;
    let mut dlambda_agreement_max = 0.0f64;
    for _ in 0..samples.max(1) {
        let x = sampling::gaussian_vector(&mut rng, n);
        let image = rho.apply(&x);
        let pulled = rho.jacobian(&x).transpose() * tilde.eval(&image);
        let scale = tilde.eval(&x).norm().max(1.0);
        anti_invariance_max =
            anti_invariance_max.max((pulled + tilde.eval(&x)).norm() / scale);
        let d_original = lambda.exterior_derivative(&x, FD_STEP);
        let d_tilde = tilde.exterior_derivative(&x, FD_STEP);
        let dscale = d_original.norm().max(1.0);
        dlambda_agreement_max =
            dlambda_agreement_max.max((&d_tilde - &d_original).norm() / dscale);
    }
    let pass = anti_invariance_max <= cfg.tol_residual
        && dlambda_agreement_max <= cfg.tol_quadrature;
    Ok(Output::Json(json!({
        "samples": samples,
        "anti_invariance_max": anti_invariance_max,
        "dlambda_agreement_max": dlambda_agreement_max,
        "pass": pass,
    })))
}

// ---------------------------------------------------------------------------
// Real structures on lines.
// ---------------------------------------------------------------------------

fn involute_line_cmd(
    p: &str,
    q: &str,
    perm: &str,
    signs: &str,
    form: Option<&str>,
) -> Result<Output, Failure> {
    let pp = point_arg(p)?;
    let quadric = quadric_for(form, pp.len())?;
    let u = line_arg(&quadric, p, q)?;
    let rho = ambient_involution_arg(perm, signs)?;
    let image = involute_line(&quadric, &u, &rho)?;
    Ok(Output::Json(json!({
        "p": point_json(image.p()),
        "q": point_json(image.q()),
    })))
}

fn detect_pseudo_fixed_cmd(
    p: &str,
    q: &str,
    perm: &str,
    signs: &str,
    form: Option<&str>,
) -> Result<Output, Failure> {
    let pp = point_arg(p)?;
    let quadric = quadric_for(form, pp.len())?;
    let u = line_arg(&quadric, p, q)?;
    let rho = ambient_involution_arg(perm, signs)?;
    let outcome = detect_pseudo_fixed(&quadric, &u, &rho)?;
    let mut result = json!({ "status": outcome.status_str() });
    if let PseudoFixResult::PseudoFixed { phi, class } = &outcome {
        result["class"] = json!(class.as_str());
        result["phi"] = mobius_json(phi);
    }
    Ok(Output::Json(result))
}

fn normalize_fixed_cmd(
    p: &str,
    q: &str,
    perm: &str,
    signs: &str,
    form: Option<&str>,
) -> Result<Output, Failure> {
    let pp = point_arg(p)?;
    let quadric = quadric_for(form, pp.len())?;
    let u = line_arg(&quadric, p, q)?;
    let rho = ambient_involution_arg(perm, signs)?;
    let outcome = detect_pseudo_fixed(&quadric, &u, &rho)?;
    let fixed = normalize_to_fixed(&quadric, &u, &outcome, &rho)?;
    let residual = fixed_point_residual(&quadric, &fixed, &rho)?;
    Ok(Output::Json(json!({
        "status_before": outcome.status_str(),
        "p": point_json(fixed.p()),
        "q": point_json(fixed.q()),
        "residual": residual,
    })))
}

fn sigma_count(p: &str, q: &str, sigma: &str, form: Option<&str>) -> Result<Output, Failure> {
    let pp = point_arg(p)?;
    let quadric = quadric_for(form, pp.len())?;
    let u = line_arg(&quadric, p, q)?;
    let entries = parse::parse_complex_vector(sigma).map_err(Failure::parse)?;
    let hyperplane = Hyperplane::new(DVector::from_vec(entries))?;
    let count = count_hyperplane_intersections(&u, &hyperplane)?;
    let parameter = hyperplane_intersection_parameter(&u, &hyperplane)?;
    let hit = u
        .line()
        .point_at(parameter.coords()[0], parameter.coords()[1])?;
    Ok(Output::Json(json!({
        "count": count,
        "parameter": point_json(&parameter),
        "point": point_json(&hit),
    })))
}

// ---------------------------------------------------------------------------
// Orbits.
// ---------------------------------------------------------------------------

fn find_orbit(
    system: &str,
    seed_angle: Option<f64>,
    chart: Option<&str>,
    t_half_guess: f64,
    cfg: &RunConfig,
) -> Result<Output, Failure> {
    let sys = builtin_system(system).ok_or_else(|| {
        Failure::domain(
            "UnknownSystem",
            format!("no builtin system named '{system}'; see list-systems"),
        )
    })?;
    let params: Vec<f64> = match (seed_angle, chart) {
        (Some(angle), None) => vec![angle],
        (None, Some(chart)) => parse::parse_real_vector(chart).map_err(Failure::parse)?,
        _ => {
            return Err(Failure::Usage(
                "provide exactly one of --seed-angle or --chart".to_string(),
            ))
        }
    };
    if params.len() != sys.chart_dimension() {
        return Err(Failure::domain(
            "DimensionMismatch",
            format!(
                "system {} expects {} chart parameters, got {}",
                sys.name(),
                sys.chart_dimension(),
                params.len()
            ),
        ));
    }
    let orbit = find_symmetric_orbit(&sys, &params, t_half_guess)?;
    if cfg.format == Format::Csv {
        return Ok(Output::Csv(orbit.export_csv()));
    }
    Ok(Output::Json(orbit.export_json()))
}

fn orbit_field<'v>(record: &'v Value, key: &str) -> Result<&'v Value, Failure> {
    record.get(key).ok_or_else(|| {
        Failure::domain("BadOrbitFile", format!("orbit record lacks '{key}'"))
    })
}

fn orbit_real_vector(value: &Value, key: &str) -> Result<DVector<f64>, Failure> {
    let entries = value
        .as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
        .ok_or_else(|| {
            Failure::domain("BadOrbitFile", format!("'{key}' is not a numeric array"))
        })?;
    Ok(DVector::from_vec(entries))
}

fn verify_orbit(input: &std::path::Path, cfg: &RunConfig) -> Result<Output, Failure> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::io(format!("cannot read {}: {e}", input.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("orbit file {}: {e}", input.display())))?;
    // Accept both a bare orbit record and the find-orbit envelope.
    let record = match (value.get("command"), value.get("result")) {
        (Some(_), Some(r)) if r.is_object() => r,
        _ => &value,
    };
    let system = orbit_field(record, "system")?
        .as_str()
        .ok_or_else(|| Failure::domain("BadOrbitFile", "'system' is not a string"))?
        .to_string();
    let x0 = orbit_real_vector(orbit_field(record, "x0")?, "x0")?;
    let period = orbit_field(record, "period")?
        .as_f64()
        .ok_or_else(|| Failure::domain("BadOrbitFile", "'period' is not a number"))?;
    let samples_value = orbit_field(record, "samples")?
        .as_array()
        .ok_or_else(|| Failure::domain("BadOrbitFile", "'samples' is not an array"))?;
    let mut samples = Vec::with_capacity(samples_value.len());
    for s in samples_value {
        samples.push(orbit_real_vector(s, "samples")?);
    }
    let sys = builtin_system(&system).ok_or_else(|| {
        Failure::domain(
            "UnknownSystem",
            format!("orbit names unknown system '{system}'"),
        )
    })?;
    let orbit = SymmetricOrbit {
        system,
        x0,
        period,
        samples,
        residuals: ResidualReport {
            closure: 0.0,
            symmetry_sup: 0.0,
            fixed_locus_start: 0.0,
            fixed_locus_half: 0.0,
            energy_drift: None,
        },
    };
    let report = verify_symmetric_orbit(&sys, &orbit)?;
    let max_defect = report.max_defect();
    let drift_ok = report.energy_drift.map_or(true, |d| d <= cfg.tol_residual);
    let mut residuals = json!({
        "closure": report.closure,
        "symmetry_sup": report.symmetry_sup,
        "fixed_locus_start": report.fixed_locus_start,
        "fixed_locus_half": report.fixed_locus_half,
    });
    if let Some(drift) = report.energy_drift {
        residuals["energy_drift"] = json!(drift);
    }
    Ok(Output::Json(json!({
        "system": orbit.system,
        "period": orbit.period,
        "residuals": residuals,
        "max_defect": max_defect,
        "pass": max_defect <= cfg.tol_residual && drift_ok,
    })))
}

fn list_systems() -> Result<Output, Failure> {
    let systems: Vec<Value> = builtin_systems()
        .iter()
        .map(|sys| {
            let probe = DVector::from_element(sys.dimension(), 0.5);
            json!({
                "name": sys.name(),
                "dimension": sys.dimension(),
                "chart_dimension": sys.chart_dimension(),
                "has_energy": sys.energy(&probe).is_some(),
            })
        })
        .collect();
    Ok(Output::Json(json!({ "systems": systems })))
}

// ---------------------------------------------------------------------------
// Disk energies.
// ---------------------------------------------------------------------------

fn sft_energy(disk: &std::path::Path, family_size: usize) -> Result<Output, Failure> {
    let disk = load_disk(disk)?;
    let estimate = sft_energy_estimate(&disk, family_size)?;
    Ok(Output::Json(json!({
        "estimate": estimate,
        "family_size": family_size,
        "max_cylinder_r": disk.max_cylinder_r(),
        "interior_only": disk.is_interior_disk(),
    })))
}

fn stokes_check(disk: &std::path::Path, cfg: &RunConfig) -> Result<Output, Failure> {
    let disk = load_disk(disk)?;
    let interior = geometric_omega_integral(&disk)?;
    let circulation = boundary_circulation(&disk);
    let residual = (interior - circulation).abs();
    let pass = residual <= cfg.tol_quadrature * circulation.abs().max(1.0);
    Ok(Output::Json(json!({
        "interior_integral": interior,
        "boundary_circulation": circulation,
        "residual": residual,
        "pass": pass,
    })))
}
