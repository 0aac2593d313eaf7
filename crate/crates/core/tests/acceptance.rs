//! The release gate: every headline guarantee of the toolkit checked in
//! one run, one printed line per criterion. Run with --nocapture to see
//! the lines on success; on failure the summary assert lists the broken
//! criteria.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use realsft_core::cotangent::{
    cone_to_symplectization, cone_transport_j_fd, cotangent_to_quadric, liouville_field,
    project_to_quadric_tangent, quadric_to_cotangent, reeb_field, smooth_differential_fd,
    symplectic_form_ambient, symplectic_form_cotangent, AffineQuadricPoint, CotangentState,
    FD_STEP,
};
use realsft_core::energy::{
    disk_bound_check, line_disk, stokes_residual, synthetic_smooth_disk, LineDiskFlavor,
};
use realsft_core::holcurve::{
    count_sigma_intersections, detect_pseudo_fixed, find_pseudo_fixed_line, fixed_point_residual,
    normalize_to_fixed, AmbientInvolution, PseudoFixResult, RationalLineMap,
};
use realsft_core::mobius::{
    embed_hyperboloid, parameter_panel, AntiInvolution, HyperboloidSheet, InvolutionClass,
    ProjectivePoint,
};
use realsft_core::orbits::{
    find_symmetric_orbit, geodesic_sphere_system, hill_critical_energy, hill_energy,
    hill_locus_covector, hill_system_rho1, verify_symmetric_orbit,
};
use realsft_core::quadric::{
    enumerate_lines, make_line, Decoration, Hyperplane, LineOnQuadric, Quadric,
};
use realsft_core::sampling;
use realsft_core::Complex64;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("[{}] {} — {}", if pass { "PASS" } else { "FAIL" }, name, detail);
        if !pass {
            self.failures.push(name.to_string());
        }
    }
}

fn rotate_point(a: &DMatrix<Complex64>, z: &ProjectivePoint) -> ProjectivePoint {
    ProjectivePoint::new(a * z.coords()).expect("rotation keeps points nonzero")
}

fn coord_point(len: usize, re_at: usize, im_at: usize) -> ProjectivePoint {
    let mut v = DVector::zeros(len);
    v[re_at] = Complex64::new(1.0, 0.0);
    v[im_at] = Complex64::new(0.0, 1.0);
    ProjectivePoint::new(v).unwrap()
}

/// Base (point, decoration) configuration on the standard quadric with
/// `len` homogeneous coordinates, generic after any special-orthogonal
/// rotation.
fn base_config(len: usize) -> (Quadric, ProjectivePoint, ProjectivePoint, ProjectivePoint, Hyperplane) {
    let quadric = Quadric::standard(len - 2);
    let p = coord_point(len, 0, len - 1);
    let c1 = coord_point(len, 0, 1);
    let c2 = coord_point(len, 2, 3);
    let sigma = Hyperplane::coordinate(len, len - 1);
    (quadric, p, c1, c2, sigma)
}

fn line_validity_residual(quadric: &Quadric, line: &LineOnQuadric, dec: &Decoration) -> f64 {
    let mut residual: f64 = dec.sigma().eval(line.q()).norm();
    for t in parameter_panel() {
        let z = line.point_at(t.coords()[0], t.coords()[1]).unwrap();
        residual = residual.max(quadric.bilinear(&z, &z).norm());
    }
    residual
}

fn criterion_gw_line_count(gate: &mut Gate) {
    let mut r = sampling::rng(7);
    let start = Instant::now();
    let mut max_residual = 0.0f64;
    let mut good = 0;
    let mut total = 0;
    for len in [5usize, 6] {
        let (quadric, p, c1, c2, sigma) = base_config(len);
        for _ in 0..20 {
            total += 1;
            let a = sampling::random_special_orthogonal(&mut r, len)
                .map(|x| Complex64::new(x, 0.0));
            let rp = rotate_point(&a, &p);
            let cycle = make_line(&quadric, &rotate_point(&a, &c1), &rotate_point(&a, &c2))
                .unwrap();
            let rsigma = Hyperplane::new(&a * sigma.coeffs()).unwrap();
            let dec = Decoration::new(rsigma, cycle, "line").unwrap();
            let lines = enumerate_lines(&quadric, &rp, &dec).unwrap();
            if lines.len() != 1 {
                continue;
            }
            let res = line_validity_residual(&quadric, &lines[0], &dec)
                .max(lines[0].p().distance(&rp));
            max_residual = max_residual.max(res);
            if res < 1e-8 {
                good += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    gate.check(
        "gw-line-count",
        good == total && elapsed < 5.0,
        format!(
            "{}/{} rotated configurations gave exactly one valid line, max residual {:.2e}, {:.2} s",
            good, total, max_residual, elapsed
        ),
    );
}

fn criterion_involution_classification(gate: &mut Gate) {
    let mut r = sampling::rng(101);
    let mut square_max = 0.0f64;
    let mut misclassified = 0;
    let mut grid_min = f64::INFINITY;
    for _ in 0..1000 {
        let tau = AntiInvolution::new(
            embed_hyperboloid(HyperboloidSheet::Plus, sampling::random_hyperboloid_plus(&mut r))
                .unwrap(),
        );
        square_max = square_max.max(tau.involution_residual());
        if tau.classify().unwrap() != InvolutionClass::TypeI {
            misclassified += 1;
        }
    }
    for _ in 0..1000 {
        let tau = AntiInvolution::new(
            embed_hyperboloid(HyperboloidSheet::Minus, sampling::random_hyperboloid_minus(&mut r))
                .unwrap(),
        );
        square_max = square_max.max(tau.involution_residual());
        if tau.classify().unwrap() != InvolutionClass::TypeII {
            misclassified += 1;
        }
        grid_min = grid_min.min(tau.min_displacement_on_grid(10_000));
    }
    gate.check(
        "involution-classification",
        misclassified == 0 && square_max < 1e-10 && grid_min > 1e-2,
        format!(
            "2000 samples, {} misclassified, max square residual {:.2e}, free-action grid minimum {:.3}",
            misclassified, square_max, grid_min
        ),
    );
}

fn criterion_conjugator_normalization(gate: &mut Gate) {
    let mut r = sampling::rng(436);
    let quadric = Quadric::standard(2);
    let rho = AmbientInvolution::diagonal(vec![1, 1, -1, -1]).unwrap();
    let fixed_u = RationalLineMap::new(
        make_line(&quadric, &coord_point(4, 0, 2), &coord_point(4, 1, 3)).unwrap(),
    );
    let mut sup = 0.0f64;
    let mut manufactured = 0;
    for _ in 0..100 {
        let psi = sampling::random_mobius(&mut r);
        let u = fixed_u.reparametrize(&quadric, &psi).unwrap();
        let result = detect_pseudo_fixed(&quadric, &u, &rho).unwrap();
        if matches!(result, PseudoFixResult::NotPseudoFixed) {
            continue;
        }
        manufactured += 1;
        let out = normalize_to_fixed(&quadric, &u, &result, &rho).unwrap();
        sup = sup.max(fixed_point_residual(&quadric, &out, &rho).unwrap());
    }
    gate.check(
        "conjugator-normalization",
        manufactured == 100 && sup < 1e-8,
        format!(
            "{}/100 manufactured lines normalized, sup fixed-point residual {:.2e}",
            manufactured, sup
        ),
    );
}

fn criterion_single_crossing_forces_type_one(gate: &mut Gate) {
    let mut r = sampling::rng(438);
    let quadric = Quadric::standard(3);
    let rho = AmbientInvolution::diagonal(vec![1, 1, 1, -1, -1]).unwrap();
    // ρ-invariant hyperplane {z₀ = 0} with a cycle inside it
    let sigma = Hyperplane::coordinate(5, 0);
    let c1 = coord_point(5, 1, 2);
    let c2 = coord_point(5, 3, 4);
    let dec = Decoration::new(
        sigma,
        make_line(&quadric, &c1, &c2).unwrap(),
        "line",
    )
    .unwrap();

    let mut corpus = 0;
    let mut counterexamples = 0;
    for _ in 0..60 {
        let Ok(u) = find_pseudo_fixed_line(&rho, &mut r, 40) else {
            continue;
        };
        let class = match detect_pseudo_fixed(&quadric, &u, &rho).unwrap() {
            PseudoFixResult::Fixed => InvolutionClass::TypeI,
            PseudoFixResult::PseudoFixed { class, .. } => class,
            PseudoFixResult::NotPseudoFixed => continue,
        };
        match count_sigma_intersections(&u, &dec) {
            Ok(1) => {
                corpus += 1;
                if class != InvolutionClass::TypeI {
                    counterexamples += 1;
                }
            }
            _ => continue,
        }
    }
    gate.check(
        "single-crossing-type-one",
        corpus >= 30 && counterexamples == 0,
        format!(
            "{} pseudo-fixed lines with one hyperplane crossing, {} counterexamples",
            corpus, counterexamples
        ),
    );
}

fn criterion_cotangent_symplectomorphism(gate: &mut Gate) {
    let mut r = sampling::rng(440);
    let mut round_max = 0.0f64;
    for _ in 0..100 {
        let (q, pdir) = sampling::random_orthonormal_pair(&mut r, 4);
        let s = CotangentState::new(q, pdir * (0.1 + r.gen::<f64>() * 3.0)).unwrap();
        let z = cotangent_to_quadric(&s);
        let rt = quadric_to_cotangent(&z).unwrap();
        round_max = round_max.max((s.q() - rt.q()).norm().max((s.p() - rt.p()).norm()));
        let zz = cotangent_to_quadric(&rt);
        round_max = round_max.max((z.z() - zz.z()).norm());
    }
    let mut form_max = 0.0f64;
    for _ in 0..100 {
        let (q, pdir) = sampling::random_orthonormal_pair(&mut r, 4);
        let s = CotangentState::new(q, pdir * (0.1 + r.gen::<f64>() * 3.0)).unwrap();
        let z = cotangent_to_quadric(&s);
        let v = project_to_quadric_tangent(&z, &sampling::gaussian_complex_vector(&mut r, 4));
        let w = project_to_quadric_tangent(&z, &sampling::gaussian_complex_vector(&mut r, 4));
        let omega0 = symplectic_form_ambient(&v, &w);
        let x = z.real_part();
        let y = z.imag_part();
        let push_v = smooth_differential_fd(&x, &y, &v.map(|c| c.re), &v.map(|c| c.im), FD_STEP);
        let push_w = smooth_differential_fd(&x, &y, &w.map(|c| c.re), &w.map(|c| c.im), FD_STEP);
        let omega_can = symplectic_form_cotangent(&push_v, &push_w);
        form_max = form_max.max((omega0 - omega_can).abs() / (1.0 + v.norm() * w.norm()));
    }
    gate.check(
        "cotangent-symplectomorphism",
        round_max < 1e-12 && form_max < 1e-6,
        format!(
            "100 round trips max {:.2e}, 100 finite-difference form pullbacks max {:.2e}",
            round_max, form_max
        ),
    );
}

fn criterion_geodesic_orbits(gate: &mut Gate) {
    let sys = geodesic_sphere_system();
    let period = 2.0 * std::f64::consts::PI;
    let mut period_max = 0.0f64;
    let mut defect_max = 0.0f64;
    let mut time_max = 0.0f64;
    let mut converged = 0;
    for k in 0..10 {
        let angle = 0.05 + 0.55 * k as f64;
        let start = Instant::now();
        let Ok(orbit) = find_symmetric_orbit(&sys, &[angle], 3.0) else {
            continue;
        };
        time_max = time_max.max(start.elapsed().as_secs_f64());
        converged += 1;
        period_max = period_max.max((orbit.period - period).abs());
        defect_max = defect_max
            .max(orbit.residuals.closure)
            .max(orbit.residuals.symmetry_sup);
    }
    gate.check(
        "geodesic-meridian-orbits",
        converged == 10 && period_max < 1e-6 && defect_max < 1e-6 && time_max < 1.0,
        format!(
            "10 seeds: {} converged, period error {:.2e}, worst residual {:.2e}, slowest seed {:.2} s",
            converged, period_max, defect_max, time_max
        ),
    );
}

fn criterion_hill_orbit(gate: &mut Gate) {
    let h = -2.25;
    let sys = hill_system_rho1();
    let sub_critical = h < hill_critical_energy();
    let (_, p2) = hill_locus_covector(0.25, h).unwrap();
    let orbit = find_symmetric_orbit(&sys, &[0.25, p2], 0.5).unwrap();
    let report = verify_symmetric_orbit(&sys, &orbit).unwrap();
    let again = find_symmetric_orbit(&sys, &[0.25, p2], 0.5).unwrap();
    let reproducible = orbit.period == again.period && orbit.x0 == again.x0;
    let energy = hill_energy(&orbit.x0);
    gate.check(
        "hill-symmetric-orbit",
        sub_critical
            && energy < hill_critical_energy()
            && report.symmetry_sup < 1e-6
            && report.energy_drift.unwrap() < 1e-8
            && reproducible,
        format!(
            "H = {:.4} (critical {:.4}), T = {:.6}, symmetry {:.2e}, drift {:.2e}, reproducible: {}",
            energy,
            hill_critical_energy(),
            orbit.period,
            report.symmetry_sup,
            report.energy_drift.unwrap(),
            reproducible
        ),
    );
}

fn criterion_disk_energies(gate: &mut Gate) {
    // second-order Stokes convergence on the curved synthetic disk
    let r1 = stokes_residual(&synthetic_smooth_disk(8, 32).unwrap()).unwrap();
    let r2 = stokes_residual(&synthetic_smooth_disk(16, 64).unwrap()).unwrap();
    let ratio = r1 / r2;

    // unit area bound on disks cut from enumerated lines
    let mut r = sampling::rng(77);
    let (quadric, p, c1, c2, sigma) = base_config(5);
    let mut bound_ok = 0;
    let mut disks = 0;
    let mut value_max = 0.0f64;
    for _ in 0..20 {
        let a = sampling::random_special_orthogonal(&mut r, 5).map(|x| Complex64::new(x, 0.0));
        let rp = rotate_point(&a, &p);
        let cycle = make_line(&quadric, &rotate_point(&a, &c1), &rotate_point(&a, &c2)).unwrap();
        let dec = Decoration::new(Hyperplane::new(&a * sigma.coeffs()).unwrap(), cycle, "line")
            .unwrap();
        for line in enumerate_lines(&quadric, &rp, &dec).unwrap() {
            let disk = line_disk(&line, LineDiskFlavor::AreaNormalized { radius: 2.0 }, 8, 32)
                .or_else(|_| {
                    line_disk(&line, LineDiskFlavor::AreaNormalized { radius: 0.8 }, 8, 32)
                })
                .unwrap();
            disks += 1;
            let report = disk_bound_check(&disk).unwrap();
            value_max = value_max.max(report.value);
            if report.pass {
                bound_ok += 1;
            }
        }
    }
    gate.check(
        "disk-energy-bounds",
        (3.5..=4.5).contains(&ratio) && disks == 20 && bound_ok == disks,
        format!(
            "Stokes halving ratio {:.2}, {}/{} line-disks within the unit bound (max value {:.4})",
            ratio, bound_ok, disks, value_max
        ),
    );
}

fn criterion_cone_complex_structure(gate: &mut Gate) {
    let mut r = sampling::rng(451);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (x, y) = sampling::random_orthonormal_pair(&mut r, 4);
        let m = 0.3 + 2.0 * r.gen::<f64>();
        let z = AffineQuadricPoint::cone(DVector::from_iterator(
            4,
            x.iter().zip(y.iter()).map(|(&a, &b)| Complex64::new(a * m, b * m)),
        ))
        .unwrap();
        let s = cone_to_symplectization(&z).unwrap();
        let x_field = liouville_field(&s);
        let r_field = reeb_field(&s);
        let jx = cone_transport_j_fd(&s, &x_field, FD_STEP).unwrap();
        let jr = cone_transport_j_fd(&s, &r_field, FD_STEP).unwrap();
        worst = worst
            .max(jx.sub(&r_field).norm())
            .max(jr.sub(&x_field.scale(-1.0)).norm());
    }
    gate.check(
        "cone-complex-structure",
        worst < 1e-6,
        format!(
            "20 cone points: max of ‖JX − R‖ and ‖JR + X‖ is {:.2e}",
            worst
        ),
    );
}

#[test]
fn acceptance_gate() {
    let mut gate = Gate { failures: Vec::new() };
    criterion_gw_line_count(&mut gate);
    criterion_involution_classification(&mut gate);
    criterion_conjugator_normalization(&mut gate);
    criterion_single_crossing_forces_type_one(&mut gate);
    criterion_cotangent_symplectomorphism(&mut gate);
    criterion_geodesic_orbits(&mut gate);
    criterion_hill_orbit(&mut gate);
    criterion_disk_energies(&mut gate);
    criterion_cone_complex_structure(&mut gate);
    assert!(
        gate.failures.is_empty(),
        "failed acceptance criteria: {:?}",
        gate.failures
    );
}
