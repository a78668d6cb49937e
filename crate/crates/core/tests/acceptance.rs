//! Acceptance suite. Prints one PASS/FAIL line per criterion; run with
//! `cargo test --release --test acceptance -- --nocapture` to see them.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use vtherm::mesh::{
    avg_scalar, avg_vector, build_structured_mesh, jump_scalar, jump_vector, Diagonal, SidedTrace, TriMesh,
};
use vtherm::qoi::{equivalence_diagnostics, hss_mean, mean_surface_temperature, total_power};
use vtherm::sensitivity::{
    fd_oracle, sensitivity_chi, sensitivity_kappa, FdTarget, KappaSensitivity, FD_STEP_CHI,
    FD_STEP_KAPPA_ELEMENT, FD_STEP_KAPPA_UNIFORM,
};
use vtherm::solver::{
    heat_capacity_rate, solve_direct, solve_hss, solve_reverse, ElementField, Material, PhysicalParams,
    TemperatureField,
};
use vtherm::vasculature::{make_case, VascularCase, VasculaturePath};

const AMB: f64 = 295.15;
const N: usize = 100;
const FLOWS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const KAPPAS: [f64; 12] = [0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0];

struct Verdict {
    passed: bool,
    detail: String,
}

fn line(id: u32, name: &str, v: &Verdict) -> bool {
    let mark = if v.passed { "PASS" } else { "FAIL" };
    println!("[{mark}] criterion {id}: {name} -- {}", v.detail);
    v.passed
}

struct Setup {
    label: &'static str,
    mesh: TriMesh,
    path: VasculaturePath,
}

fn setups() -> Vec<Setup> {
    let mesh = build_structured_mesh(0.1, 0.1, N, N, Diagonal::Alternating).unwrap();
    [
        ("straight", VascularCase::Straight { y: None }),
        ("u_shape 20 mm", VascularCase::u_shape(0.02)),
        ("serpentine", VascularCase::serpentine()),
    ]
    .into_iter()
    .map(|(label, case)| Setup {
        label,
        path: make_case(&case, &mesh).unwrap(),
        mesh: mesh.clone(),
    })
    .collect()
}

/// One forward/reverse pair and everything the criteria need from it.
struct Pair {
    geometry: usize,
    material: Option<Material>,
    flow: f64,
    kappa: f64,
    params: PhysicalParams,
    forward: TemperatureField,
    reverse: TemperatureField,
    mst_forward: f64,
    mst_reverse: f64,
    dphi_chi: f64,
    kappa_sens: KappaSensitivity,
    elapsed: Duration,
}

fn solve_pair(setup: &Setup, geometry: usize, params: PhysicalParams, material: Option<Material>, flow: f64) -> Pair {
    let start = Instant::now();
    let (mesh, path) = (&setup.mesh, &setup.path);
    let (forward, reverse) = rayon::join(
        || solve_direct(mesh, path, &params).unwrap(),
        || solve_reverse(mesh, path, &params).unwrap(),
    );
    let elapsed = start.elapsed();
    Pair {
        geometry,
        material,
        flow,
        kappa: params.kappa.as_uniform().unwrap(),
        mst_forward: mean_surface_temperature(mesh, &forward.values).unwrap(),
        mst_reverse: mean_surface_temperature(mesh, &reverse.values).unwrap(),
        dphi_chi: sensitivity_chi(mesh, path, &forward, &reverse, &params).unwrap(),
        kappa_sens: sensitivity_kappa(mesh, &forward, &reverse, &params).unwrap(),
        params,
        forward,
        reverse,
        elapsed,
    }
}

/// Energy residuals of both solves of a pair, computed from scratch: the
/// global balance in W and the hot-steady-state gap identity in K.
fn energy_residuals(setup: &Setup, p: &Pair) -> [(f64, f64); 2] {
    let mesh = &setup.mesh;
    let weights = mesh.nodal_weights();
    let power = total_power(mesh, &p.params);
    let h = p.params.h_t;
    let chi = heat_capacity_rate(&p.params);
    let meas = mesh.area();
    let hss = AMB + power / (h * meas);
    let one = |field: &[f64], outlet: usize| {
        let excess: f64 = weights.iter().zip(field).map(|(w, t)| w * (t - AMB)).sum();
        let rise = field[outlet] - AMB;
        let balance = power - h * excess - chi * rise;
        let mst = mean_surface_temperature(mesh, field).unwrap();
        let gap = (hss - mst) - chi * rise / (h * meas);
        (balance, gap)
    };
    [
        one(&p.forward.values, setup.path.outlet_node()),
        one(&p.reverse.values, setup.path.inlet_node()),
    ]
}

#[test]
fn acceptance() {
    let mut all = true;
    let setups = setups();
    let hss_value = AMB + 1000.0 / 21.0;

    // 1. Hot steady state.
    {
        let p = PhysicalParams::reference(Material::Cfrp, 0.0);
        let start = Instant::now();
        let t = solve_hss(&setups[0].mesh, &p).unwrap();
        let elapsed = start.elapsed();
        let worst = t.values.iter().map(|v| (v - hss_value).abs()).fold(0.0, f64::max);
        let quoted = format!("{hss_value:.5}") == "342.76905";
        all &= line(
            1,
            "hot steady state is analytic",
            &Verdict {
                passed: worst <= 1e-6 && quoted && elapsed < Duration::from_secs(5),
                detail: format!(
                    "max |ϑ − {hss_value:.7}| = {worst:.2e} K (≤ 1e-6), rounds to 342.76905: {quoted}, {:.2} s (< 5 s)",
                    elapsed.as_secs_f64()
                ),
            },
        );
    }

    // 2. Product identities of the jump and average operators.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        let start = Instant::now();
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let n = [angle.cos(), angle.sin()];
            let m = [-n[0], -n[1]];
            let mut scalar = || rng.gen_range(-10.0..10.0);
            let alpha = SidedTrace::new(scalar(), scalar(), n, m).unwrap();
            let beta = SidedTrace::new(scalar(), scalar(), n, m).unwrap();
            let a = SidedTrace::new([scalar(), scalar()], [scalar(), scalar()], n, m).unwrap();

            let alpha_a = alpha.zip_with(&a, |s, v| [s * v[0], s * v[1]]).unwrap();
            let ja = jump_scalar(&alpha);
            let va = avg_vector(&a);
            let rhs = ja[0] * va[0] + ja[1] * va[1] + avg_scalar(&alpha) * jump_vector(&a);
            worst = worst.max((jump_vector(&alpha_a) - rhs).abs());

            let prod = alpha.zip_with(&beta, |x, y| x * y).unwrap();
            let lhs = jump_scalar(&prod);
            let (jb, ma, mb) = (jump_scalar(&beta), avg_scalar(&alpha), avg_scalar(&beta));
            for k in 0..2 {
                worst = worst.max((lhs[k] - (ja[k] * mb + ma * jb[k])).abs());
            }
        }
        let elapsed = start.elapsed();
        all &= line(
            2,
            "jump/average product identities on 1000 random traces",
            &Verdict {
                passed: worst <= 1e-13 && elapsed < Duration::from_secs(1),
                detail: format!("max error {worst:.2e} (≤ 1e-13), {:.3} s (< 1 s)", elapsed.as_secs_f64()),
            },
        );
    }

    // Reference grid for criteria 3, 4, 6, 7 and 9.
    let start = Instant::now();
    let jobs: Vec<(usize, Material, f64)> = (0..setups.len())
        .flat_map(|g| Material::ALL.into_iter().flat_map(move |m| FLOWS.into_iter().map(move |q| (g, m, q))))
        .collect();
    let grid: Vec<Pair> = jobs
        .par_iter()
        .map(|&(g, m, q)| solve_pair(&setups[g], g, PhysicalParams::reference(m, q), Some(m), q))
        .collect();
    let grid_time = start.elapsed();

    // Conductivity sweeps: straight channel at 2 mL/min, U-shape at 1 mL/min.
    let sweep = |g: usize, q: f64| -> Vec<Pair> {
        KAPPAS
            .par_iter()
            .map(|&k| {
                let p = PhysicalParams::reference(Material::Cfrp, q).with_kappa(ElementField::Uniform(k));
                solve_pair(&setups[g], g, p, None, q)
            })
            .collect()
    };
    let straight_sweep = sweep(0, 2.0);
    let u_sweep = sweep(1, 1.0);

    // 3. Flow-reversal invariance.
    {
        let mut worst_ratio: f64 = 0.0;
        let mut count = 0;
        let subset_time: Duration = grid.iter().filter(|p| p.flow == 1.0 || p.flow == 2.0).map(|p| p.elapsed).sum();
        for p in grid.iter().filter(|p| p.flow == 1.0 || p.flow == 2.0) {
            let rise = p.mst_forward - AMB;
            worst_ratio = worst_ratio.max((p.mst_forward - p.mst_reverse).abs() / rise);
            count += 1;
        }
        all &= line(
            3,
            "MST invariant under flow reversal",
            &Verdict {
                passed: count == 18 && worst_ratio <= 1e-3 && subset_time < Duration::from_secs(300),
                detail: format!(
                    "{count} cases, max |ΔMST|/(MST − ϑ_amb) = {worst_ratio:.2e} (≤ 1e-3), {:.1} s solver time (< 300 s)",
                    subset_time.as_secs_f64()
                ),
            },
        );
    }

    // 4. Sign of the heat-capacity-rate sensitivity.
    {
        let worst = grid.iter().map(|p| p.dphi_chi).fold(f64::NEG_INFINITY, f64::max);
        all &= line(
            4,
            "DΦ[χ] is nonpositive on the sweep grid",
            &Verdict {
                passed: grid.len() == 36 && worst <= 1e-9 && grid_time < Duration::from_secs(300),
                detail: format!(
                    "{} cases, max DΦ[χ] = {worst:.4e} (≤ 1e-9), grid wall time {:.1} s (< 300 s)",
                    grid.len(),
                    grid_time.as_secs_f64()
                ),
            },
        );
    }

    // 5. Adjoint sensitivities against central finite differences.
    {
        let start = Instant::now();
        let mut worst_global: f64 = 0.0;
        let mut notes = Vec::new();
        for g in [0, 1] {
            let s = &setups[g];
            let p = PhysicalParams::reference(Material::Cfrp, 1.0);
            let pair = grid
                .iter()
                .find(|x| x.geometry == g && x.material == Some(Material::Cfrp) && x.flow == 1.0)
                .unwrap();
            let (fd_chi, fd_kappa) = rayon::join(
                || fd_oracle(&s.mesh, &s.path, &p, FdTarget::Chi, FD_STEP_CHI).unwrap(),
                || fd_oracle(&s.mesh, &s.path, &p, FdTarget::KappaUniform, FD_STEP_KAPPA_UNIFORM).unwrap(),
            );
            let e_chi = ((pair.dphi_chi - fd_chi) / fd_chi).abs();
            let e_kappa = ((pair.kappa_sens.uniform_total - fd_kappa) / fd_kappa).abs();
            worst_global = worst_global.max(e_chi).max(e_kappa);
            notes.push(format!("{}: χ {e_chi:.1e}, κ {e_kappa:.1e}", s.label));
        }

        let u = &setups[1];
        let p = PhysicalParams::reference(Material::Cfrp, 1.0);
        let pair = grid
            .iter()
            .find(|x| x.geometry == 1 && x.material == Some(Material::Cfrp) && x.flow == 1.0)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
        let elements: Vec<usize> = (0..5).map(|_| rng.gen_range(0..u.mesh.num_elements())).collect();
        let worst_element = elements
            .par_iter()
            .map(|&e| {
                let fd = fd_oracle(&u.mesh, &u.path, &p, FdTarget::KappaElement(e), FD_STEP_KAPPA_ELEMENT).unwrap();
                ((pair.kappa_sens.per_element[e] - fd) / fd).abs()
            })
            .reduce(|| 0.0, f64::max);
        let elapsed = start.elapsed();
        all &= line(
            5,
            "adjoint gradients match finite differences",
            &Verdict {
                passed: worst_global <= 1e-2 && worst_element <= 5e-2 && elapsed < Duration::from_secs(120),
                detail: format!(
                    "{} (≤ 1e-2); elements {elements:?} max {worst_element:.1e} (≤ 5e-2); {:.1} s (< 120 s)",
                    notes.join(", "),
                    elapsed.as_secs_f64()
                ),
            },
        );
    }

    // 6. Energy identities on every solve above.
    {
        let mut worst_balance: f64 = 0.0;
        let mut worst_gap: f64 = 0.0;
        let mut solves = 0;
        for p in grid.iter().chain(&straight_sweep).chain(&u_sweep) {
            let s = &setups[p.geometry];
            let power = total_power(&s.mesh, &p.params);
            for (balance, gap) in energy_residuals(s, p) {
                worst_balance = worst_balance.max(balance.abs() / power);
                worst_gap = worst_gap.max(gap.abs());
                solves += 1;
            }
            // The library's own report must agree with the oracle above.
            let report = equivalence_diagnostics(&s.mesh, &s.path, &p.params, &p.forward).unwrap();
            worst_balance = worst_balance.max(report.energy_balance_relative.abs());
            worst_gap = worst_gap.max(report.hss_gap_residual.abs());
        }
        all &= line(
            6,
            "energy balance and HSS-gap identity",
            &Verdict {
                passed: worst_balance <= 1e-8 && worst_gap <= 1e-8,
                detail: format!(
                    "{solves} solves, max residual/∫f = {worst_balance:.2e} (≤ 1e-8), max gap residual {worst_gap:.2e} K (≤ 1e-8)"
                ),
            },
        );
    }

    // 7. Monotonicity reproductions.
    {
        let mut q_ok = true;
        let mut worst_q_step = f64::NEG_INFINITY;
        for g in 0..setups.len() {
            for m in Material::ALL {
                let msts: Vec<f64> = FLOWS
                    .iter()
                    .map(|&q| {
                        grid.iter()
                            .find(|p| p.geometry == g && p.material == Some(m) && p.flow == q)
                            .unwrap()
                            .mst_forward
                    })
                    .collect();
                for w in msts.windows(2) {
                    worst_q_step = worst_q_step.max(w[1] - w[0]);
                    q_ok &= w[0] >= w[1] - 1e-6;
                }
            }
        }
        let kappa_steps: Vec<f64> = straight_sweep.windows(2).map(|w| w[1].mst_forward - w[0].mst_forward).collect();
        let worst_kappa_step = kappa_steps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let kappa_ok = kappa_steps.iter().all(|d| *d <= 1e-6);
        let signs: Vec<f64> = u_sweep.iter().map(|p| p.kappa_sens.uniform_total).collect();
        let both = signs.iter().any(|v| *v > 0.0) && signs.iter().any(|v| *v < 0.0);
        let positive_kappas: Vec<f64> = u_sweep
            .iter()
            .filter(|p| p.kappa_sens.uniform_total > 0.0)
            .map(|p| p.kappa)
            .collect();
        all &= line(
            7,
            "monotone in Q, monotone in κ for the straight channel, sign change for the U-shape",
            &Verdict {
                passed: q_ok && kappa_ok && both,
                detail: format!(
                    "largest MST step in Q {worst_q_step:.3e} K, in κ (straight, 2 mL/min) {worst_kappa_step:.3e} K (≤ 1e-6); \
                     U-shape DΦ[κ] > 0 at κ = {positive_kappas:?}, < 0 elsewhere: {both}"
                ),
            },
        );
    }

    // 8. Opposing-flux restatement of the conductivity sensitivity.
    {
        let mut exact = true;
        let mut implication = true;
        let mut positive = 0;
        let cases = u_sweep.iter().chain(
            grid.iter()
                .filter(|p| p.geometry == 1 && p.material == Some(Material::Cfrp) && p.flow == 1.0),
        );
        for p in cases {
            let k = &p.kappa_sens;
            let f0 = p.params.uniform_source().unwrap();
            exact &= k.uniform_total == -k.flux_alignment / f0;
            if k.uniform_total > 0.0 {
                positive += 1;
                implication &= k.flux_alignment < 0.0;
            }
        }
        all &= line(
            8,
            "positive DΦ[κ] implies opposing fluxes",
            &Verdict {
                passed: exact && implication && positive > 0,
                detail: format!(
                    "bitwise restatement: {exact}; {positive} cases with DΦ[κ] > 0, all with ∫(d/κ²)q_r·q_f < 0: {implication}"
                ),
            },
        );
    }

    // 9. Temperature bounds.
    {
        let mut lo_margin = f64::INFINITY;
        let mut hi_margin = f64::INFINITY;
        let mut fields = 0;
        for p in grid.iter().chain(&straight_sweep).chain(&u_sweep) {
            let upper = hss_mean(&setups[p.geometry].mesh, &p.params);
            for t in [&p.forward, &p.reverse] {
                for v in &t.values {
                    lo_margin = lo_margin.min(v - AMB);
                    hi_margin = hi_margin.min(upper - v);
                }
                fields += 1;
            }
        }
        all &= line(
            9,
            "ϑ_amb ≤ ϑ ≤ ϑ̄_HSS nodally",
            &Verdict {
                passed: lo_margin >= -1e-3 && hi_margin >= -1e-3,
                detail: format!(
                    "{fields} fields, min ϑ − ϑ_amb = {lo_margin:.3e} K, min ϑ̄_HSS − ϑ = {hi_margin:.3e} K (≥ −1e-3)"
                ),
            },
        );
    }

    assert!(all, "at least one acceptance criterion failed");
}
