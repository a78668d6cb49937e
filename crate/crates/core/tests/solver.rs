use vtherm::linalg::BandedLu;
use vtherm::mesh::{build_structured_mesh, Diagonal, TriMesh};
use vtherm::qoi::{hss_mean, mean_surface_temperature};
use vtherm::solver::{
    assemble, solve_direct, solve_direct_with, solve_hss, solve_reverse, ElementField, FlowDirection,
    InletTreatment, Material, PhysicalParams, SolveOptions,
};
use vtherm::vasculature::{make_case, profile_along, VascularCase};

const AMB: f64 = 295.15;

fn plate(n: usize) -> TriMesh {
    build_structured_mesh(0.1, 0.1, n, n, Diagonal::Alternating).unwrap()
}

#[test]
fn hot_steady_state_matches_closed_form() {
    let mesh = plate(40);
    let p = PhysicalParams::reference(Material::Cfrp, 1.0);
    let t = solve_hss(&mesh, &p).unwrap();
    let expected = 295.15 + 1000.0 / 21.0;
    for v in &t.values {
        assert!((v - expected).abs() <= 1e-8, "{v}");
    }

    // Nonuniform heating: mean is ambient plus ∫f / (h_T meas).
    let mut q = p.clone();
    q.source = ElementField::PerElement(
        (0..mesh.num_elements())
            .map(|e| 2000.0 * mesh.centroid(e)[0] / 0.1)
            .collect(),
    );
    let t = solve_hss(&mesh, &q).unwrap();
    let mean = mean_surface_temperature(&mesh, &t.values).unwrap();
    let power: f64 = mesh
        .element_areas()
        .iter()
        .enumerate()
        .map(|(e, a)| a * 2000.0 * mesh.centroid(e)[0] / 0.1)
        .sum();
    let closed_form = AMB + power / (21.0 * 0.01);
    assert!((mean - closed_form).abs() < 1e-9);
    assert!((hss_mean(&mesh, &q) - closed_form).abs() < 1e-9);
}

#[test]
fn adjoint_system_is_solved_by_the_reverse_flow() {
    // The adjoint of Φ = Σ wᵢ ϑᵢ solves Aᵀ λ = w with A the forward operator.
    // Under uniform heating f₀ λ must equal the reverse field minus ambient.
    let mesh = plate(30);
    for case in [VascularCase::Straight { y: None }, VascularCase::u_shape(0.02)] {
        let path = make_case(&case, &mesh).unwrap();
        let p = PhysicalParams::reference(Material::Cfrp, 1.0);
        let forward = assemble(&mesh, &path, &p, FlowDirection::Forward, InletTreatment::Flux).unwrap();
        let adjoint = forward.matrix.transpose();
        let lu = BandedLu::factorize(&adjoint).unwrap();
        let lambda = lu.solve(&mesh.nodal_weights());
        let mu: Vec<f64> = lambda.iter().map(|l| AMB + 1000.0 * l).collect();
        let reverse = solve_reverse(&mesh, &path, &p).unwrap();
        let worst = mu
            .iter()
            .zip(&reverse.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{} gap {worst:e}", case.label());
    }
}

#[test]
fn mesh_convergence_of_the_reference_straight_channel() {
    for q in [1.0, 2.0] {
        let p = PhysicalParams::reference(Material::Cfrp, q);
        let mst = |n| {
            let mesh = plate(n);
            let path = make_case(&VascularCase::Straight { y: None }, &mesh).unwrap();
            let t = solve_direct(&mesh, &path, &p).unwrap();
            mean_surface_temperature(&mesh, &t.values).unwrap()
        };
        let (coarse, fine) = (mst(100), mst(200));
        assert!((coarse - fine).abs() < 0.05, "Q={q}: {coarse} vs {fine}");
    }
}

#[test]
fn temperature_rises_strictly_along_the_straight_channel() {
    let mesh = plate(100);
    let path = make_case(&VascularCase::Straight { y: None }, &mesh).unwrap();
    let p = PhysicalParams::reference(Material::Cfrp, 2.0);
    let t = solve_direct(&mesh, &path, &p).unwrap();
    let profile = profile_along(&path, &t.values);
    assert!(profile.windows(2).all(|w| w[1].1 > w[0].1));
    assert_eq!(profile[0].0, 0.0);
}

#[test]
fn pinned_inlet_reads_ambient_at_the_start_of_the_profile() {
    let mesh = plate(40);
    let path = make_case(&VascularCase::u_shape(0.02), &mesh).unwrap();
    let p = PhysicalParams::reference(Material::Gfrp, 1.0);
    let pinned = SolveOptions {
        inlet: InletTreatment::RowReplacement,
        ..SolveOptions::default()
    };
    let t = solve_direct_with(&mesh, &path, &p, &pinned).unwrap();
    let profile = profile_along(&path, &t.values);
    assert!((profile[0].1 - AMB).abs() < 1e-9);

    // With the flux inlet the channel starts close to ambient and gets
    // closer as the mesh is refined.
    let defect = |n| {
        let mesh = plate(n);
        let path = make_case(&VascularCase::u_shape(0.02), &mesh).unwrap();
        let t = solve_direct(&mesh, &path, &p).unwrap();
        (t.values[path.inlet_node()] - AMB).abs()
    };
    let (d20, d40) = (defect(20), defect(40));
    assert!(d40 < d20 && d40 < 1.0, "{d20} {d40}");
}

#[test]
fn maximum_principle_on_reference_cases() {
    let mesh = plate(60);
    for case in [
        VascularCase::Straight { y: None },
        VascularCase::u_shape(0.02),
        VascularCase::serpentine(),
    ] {
        let path = make_case(&case, &mesh).unwrap();
        for m in Material::ALL {
            let p = PhysicalParams::reference(m, 1.0);
            let upper = hss_mean(&mesh, &p) + 1e-3;
            for t in [solve_direct(&mesh, &path, &p).unwrap(), solve_reverse(&mesh, &path, &p).unwrap()] {
                for v in &t.values {
                    assert!(*v >= AMB - 1e-3 && *v <= upper, "{} {m}: {v}", case.label());
                }
            }
        }
    }
}

#[test]
fn zero_flow_reproduces_the_hot_steady_state() {
    let mesh = plate(30);
    let path = make_case(&VascularCase::serpentine(), &mesh).unwrap();
    let p = PhysicalParams::reference(Material::In718, 0.0);
    let t = solve_direct(&mesh, &path, &p).unwrap();
    let mst = mean_surface_temperature(&mesh, &t.values).unwrap();
    assert!((mst - hss_mean(&mesh, &p)).abs() < 1e-6);
}
