//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with the measured margins. Run with
//! `cargo test --test acceptance -- --nocapture` to see the numbers.

use isolab::analysis::{cone_check, gauge_covariance_experiment, plane_and_conic, ConicType};
use isolab::conservation::{
    bracket_matches_flow, evaluate_quantity, evaluate_standard_set, poisson_bracket,
    sample_shell, van_holten_check, CoefficientAnsatz, PhasePotential, QuantityValue,
    StandardQuantity,
};
use isolab::dynamics::{
    covariant_derivative_q, integrate, isospin_rates, IntegratorConfig, ParticleState,
    Trajectory,
};
use isolab::fields::{GaugeFieldConfig, GaugeFunction, ScalarPotentialConfig};
use isolab::kaluza_klein::{lorentz_compare, AbelianPotential, FiveMetric, FiveState,
    KkIntegratorConfig};
use isolab::su2::AlgebraElement;
use isolab::vec3::{levi_civita, Vec3};
use std::time::Instant;

const RUN_T_END: f64 = 100.0;
const RUN_STEP: f64 = 1e-3;

fn wu_yang_potential() -> ScalarPotentialConfig {
    ScalarPotentialConfig::new(0.6, -1.0, 0.1)
}

fn wu_yang_initial() -> ParticleState {
    ParticleState::new(
        0.0,
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 0.5, 0.3),
        AlgebraElement::new(0.6, 0.8, 0.0),
    )
}

fn diatomic_initial() -> ParticleState {
    ParticleState::new(
        0.0,
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 0.35, 0.15),
        AlgebraElement::new(0.2, 0.8, 0.565685424949238),
    )
}

fn pure_gauge_initial() -> ParticleState {
    ParticleState::new(
        0.0,
        Vec3::ZERO,
        Vec3::new(0.7, 0.2, 0.1),
        AlgebraElement::new(0.6, 0.8, 0.0),
    )
}

fn run(
    initial: ParticleState,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
    t_end: f64,
) -> Trajectory {
    integrate(
        initial,
        field,
        potential,
        &IntegratorConfig::rk4(RUN_STEP, t_end),
    )
    .expect("valid acceptance scenario")
}

fn rel_drift(traj: &Trajectory, quantity: &str) -> f64 {
    evaluate_standard_set(traj, 1e-7)
        .unwrap()
        .entry(quantity)
        .unwrap()
        .max_rel_drift
}

fn abs_drift(traj: &Trajectory, quantity: &str) -> f64 {
    evaluate_standard_set(traj, 1e-7)
        .unwrap()
        .entry(quantity)
        .unwrap()
        .max_abs_drift
}

#[test]
fn criterion_1_isospin_norm_conservation() {
    let pot = wu_yang_potential();
    let cases: [(&str, ParticleState, GaugeFieldConfig, Option<&ScalarPotentialConfig>); 3] = [
        ("wu-yang", wu_yang_initial(), GaugeFieldConfig::WuYang, Some(&pot)),
        ("diatomic(0.5)", diatomic_initial(), GaugeFieldConfig::diatomic(0.5), None),
        (
            "pure-gauge",
            pure_gauge_initial(),
            GaugeFieldConfig::pure_gauge(GaugeFunction::seeded(9)),
            None,
        ),
    ];
    let mut worst = 0.0f64;
    for (name, initial, field, potential) in cases {
        let start = Instant::now();
        let traj = run(initial, &field, potential, RUN_T_END);
        let elapsed = start.elapsed();
        let drift = rel_drift(&traj, "isospin_norm2");
        assert!(drift < 1e-9, "{name}: |Q|^2 rel drift {drift:.3e} >= 1e-9");
        let energy = rel_drift(&traj, "energy");
        assert!(energy < 1e-8, "{name}: energy rel drift {energy:.3e} >= 1e-8");
        assert!(
            elapsed.as_secs_f64() < 5.0,
            "{name}: runtime {:.2}s >= 5s",
            elapsed.as_secs_f64()
        );
        worst = worst.max(drift);
    }
    println!(
        "[acceptance] criterion 1 (isospin-norm conservation): PASS \
         (worst |Q|^2 rel drift {worst:.3e} < 1e-9, energy within 1e-8, each run < 5 s)"
    );
}

#[test]
fn criterion_2_covariant_isospin_transport() {
    let pot = wu_yang_potential();
    let gauge = GaugeFunction::seeded(42);
    let transformed = GaugeFieldConfig::WuYang.gauge_transformed(gauge.clone());
    let transformed_initial = ParticleState::new(
        0.0,
        wu_yang_initial().position,
        wu_yang_initial().momentum,
        gauge.adjoint_at(wu_yang_initial().position, wu_yang_initial().isospin),
    );
    let runs: [(&str, Trajectory); 4] = [
        (
            "wu-yang",
            run(wu_yang_initial(), &GaugeFieldConfig::WuYang, Some(&pot), RUN_T_END),
        ),
        (
            "diatomic(0.5)",
            run(diatomic_initial(), &GaugeFieldConfig::diatomic(0.5), None, RUN_T_END),
        ),
        (
            "pure-gauge",
            run(
                pure_gauge_initial(),
                &GaugeFieldConfig::pure_gauge(GaugeFunction::seeded(9)),
                None,
                RUN_T_END,
            ),
        ),
        (
            "transformed wu-yang",
            run(transformed_initial, &transformed, Some(&pot), RUN_T_END),
        ),
    ];
    let mut worst = 0.0f64;
    let mut pure_gauge_plain_rate = 0.0f64;
    for (name, traj) in &runs {
        let residuals = covariant_derivative_q(traj).unwrap();
        let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.norm()));
        assert!(max < 1e-6, "{name}: covariant residual {max:.3e} >= 1e-6");
        worst = worst.max(max);
        if *name == "pure-gauge" {
            pure_gauge_plain_rate = isospin_rates(traj)
                .iter()
                .fold(0.0f64, |m, (_, r)| m.max(r.norm()));
        }
    }
    assert!(
        pure_gauge_plain_rate > 0.1,
        "pure-gauge plain |Qdot| {pure_gauge_plain_rate:.3e} not O(1)"
    );
    println!(
        "[acceptance] criterion 2 (covariant isospin transport): PASS \
         (worst residual {worst:.3e} < 1e-6; pure-gauge plain |Qdot| up to \
         {pure_gauge_plain_rate:.2})"
    );
}

#[test]
fn criterion_3_wu_yang_conserved_set_and_orbit_geometry() {
    let pot = wu_yang_potential();
    let traj = run(wu_yang_initial(), &GaugeFieldConfig::WuYang, Some(&pot), RUN_T_END);
    let mut worst = 0.0f64;
    for name in ["radial_charge", "j_wu_yang", "runge_lenz", "energy"] {
        let drift = rel_drift(&traj, name);
        assert!(drift < 1e-7, "{name} rel drift {drift:.3e} >= 1e-7");
        worst = worst.max(drift);
    }

    let cone = cone_check(&traj, 1e-6).unwrap();
    assert!(cone.applicable);
    assert!(cone.max_deviation < 1e-6, "cone deviation {:.3e}", cone.max_deviation);

    let first = &traj.samples[0];
    let vector = |q| match evaluate_quantity(q, first, &traj.field, traj.potential.as_ref()) {
        Ok(QuantityValue::Vector(v)) => v,
        _ => unreachable!(),
    };
    let report = plane_and_conic(
        &traj,
        vector(StandardQuantity::JWuYang),
        vector(StandardQuantity::RungeLenz),
        -1.0,
        first.radial_charge(),
    )
    .unwrap();
    assert!(
        report.planarity.max_off_plane_distance < 1e-6,
        "off-plane {:.3e}",
        report.planarity.max_off_plane_distance
    );
    assert_eq!(report.conic_fit.conic_type, ConicType::Ellipse);
    println!(
        "[acceptance] criterion 3 (monopole conserved set + orbit geometry): PASS \
         (worst drift {worst:.3e} < 1e-7, cone dev {:.3e} < 1e-6 rad, off-plane \
         {:.3e} < 1e-6, ellipse e = {:.4})",
        cone.max_deviation,
        report.planarity.max_off_plane_distance,
        report.conic_fit.eccentricity
    );
}

#[test]
fn criterion_4_diatomic_contrast() {
    let traj = run(diatomic_initial(), &GaugeFieldConfig::diatomic(0.5), None, RUN_T_END);
    let j_diatomic = rel_drift(&traj, "j_diatomic");
    let q_drift = abs_drift(&traj, "radial_charge");
    let j_wu_drift = abs_drift(&traj, "j_wu_yang");
    assert!(j_diatomic < 1e-7, "deformed J rel drift {j_diatomic:.3e} >= 1e-7");
    assert!(q_drift > 1e-2, "charge drift {q_drift:.3e} <= 1e-2");
    assert!(j_wu_drift > 1e-3, "uncorrected J drift {j_wu_drift:.3e} <= 1e-3");

    // kappa = 0 restores the monopole conservation of q
    let restored = run(diatomic_initial(), &GaugeFieldConfig::diatomic(0.0), None, RUN_T_END);
    let q_restored = rel_drift(&restored, "radial_charge");
    assert!(q_restored < 1e-7, "kappa=0 charge rel drift {q_restored:.3e}");
    println!(
        "[acceptance] criterion 4 (diatomic contrast): PASS \
         (deformed J drift {j_diatomic:.3e} < 1e-7 while q drifts {q_drift:.3} > 1e-2 and \
         uncorrected J drifts {j_wu_drift:.3} > 1e-3; kappa=0 restores q to {q_restored:.3e})"
    );
}

#[test]
fn criterion_5_gauge_covariance_of_worldlines() {
    let pot = wu_yang_potential();
    let cfg = IntegratorConfig::rk4(RUN_STEP, RUN_T_END);
    let cases: [(&str, ParticleState, GaugeFieldConfig, Option<&ScalarPotentialConfig>); 2] = [
        ("wu-yang", wu_yang_initial(), GaugeFieldConfig::WuYang, Some(&pot)),
        ("diatomic(0.5)", diatomic_initial(), GaugeFieldConfig::diatomic(0.5), None),
    ];
    let mut worst_x = 0.0f64;
    let mut worst_q = 0.0f64;
    for (name, initial, field, potential) in cases {
        let cmp = gauge_covariance_experiment(
            initial,
            &field,
            potential,
            &cfg,
            &GaugeFunction::seeded(42),
        )
        .unwrap();
        assert!(
            cmp.max_position_deviation < 1e-7,
            "{name}: |dx| {:.3e} >= 1e-7",
            cmp.max_position_deviation
        );
        assert!(
            cmp.max_isospin_deviation < 1e-6,
            "{name}: |dQ| {:.3e} >= 1e-6",
            cmp.max_isospin_deviation
        );
        worst_x = worst_x.max(cmp.max_position_deviation);
        worst_q = worst_q.max(cmp.max_isospin_deviation);
    }
    println!(
        "[acceptance] criterion 5 (worldline gauge covariance): PASS \
         (worst |dx| {worst_x:.3e} < 1e-7, worst |dQ| {worst_q:.3e} < 1e-6)"
    );
}

#[test]
fn criterion_6_kaluza_klein_equivalence() {
    let (b0, q, v) = (1.0, 0.5, 0.3);
    let metric = FiveMetric::new(AbelianPotential::UniformB {
        b: Vec3::new(0.0, 0.0, b0),
    });
    let initial =
        FiveState::with_charge(&metric, [0.0, 0.6, 0.0, 0.0], [1.0, 0.0, v, 0.1], 0.0, q)
            .unwrap();
    let (cmp, five) =
        lorentz_compare(&metric, initial, &KkIntegratorConfig::new(RUN_STEP, 20.0)).unwrap();
    assert!(cmp.max_deviation < 1e-6, "deviation {:.3e}", cmp.max_deviation);
    let q_rel = cmp.q_drift / q.abs();
    assert!(q_rel < 1e-8, "charge rel drift {q_rel:.3e}");

    let w = q * b0;
    let (cx, cy) = (0.6 + v / w, 0.0);
    let radius = v / w;
    let mut radius_dev = 0.0f64;
    for s in &five {
        let (dx, dy) = (s.x[1] - cx, s.x[2] - cy);
        radius_dev = radius_dev.max(((dx * dx + dy * dy).sqrt() - radius).abs());
    }
    assert!(radius_dev < 1e-6, "cyclotron radius deviation {radius_dev:.3e}");
    println!(
        "[acceptance] criterion 6 (Kaluza-Klein / Lorentz equivalence): PASS \
         (projection deviation {:.3e} < 1e-6, q rel drift {q_rel:.3e} < 1e-8, \
         cyclotron radius deviation {radius_dev:.3e} < 1e-6)",
        cmp.max_deviation
    );
}

#[test]
fn criterion_7_constraint_ladder() {
    let samples = sample_shell(64);
    let axis = Vec3::new(0.3, -0.5, 0.8);
    let fine_tuned = PhasePotential::fine_tuned(-1.0, 0.1);
    let wu_yang = GaugeFieldConfig::WuYang;

    let mut worst = 0.0f64;
    for ansatz in [
        CoefficientAnsatz::rotation(axis, 0.0),
        CoefficientAnsatz::radial_charge(),
        CoefficientAnsatz::runge_lenz(axis, -1.0),
    ] {
        let report = van_holten_check(&ansatz, &wu_yang, &fine_tuned, &samples, 1e-6).unwrap();
        assert!(report.pass, "{} failed: {:?}", report.ansatz, report.orders);
        for o in &report.orders {
            worst = worst.max(o.max_residual);
        }
    }
    let diatomic = GaugeFieldConfig::diatomic(0.5);
    let rotation = CoefficientAnsatz::rotation(axis, 0.5);
    let report =
        van_holten_check(&rotation, &diatomic, &PhasePotential::zero(), &samples, 1e-6).unwrap();
    assert!(report.pass, "diatomic rotation failed: {:?}", report.orders);
    for o in &report.orders {
        worst = worst.max(o.max_residual);
    }

    let runge_lenz = CoefficientAnsatz::runge_lenz(axis, -1.0);
    let failing =
        van_holten_check(&runge_lenz, &diatomic, &PhasePotential::zero(), &samples, 1e-6)
            .unwrap();
    assert!(!failing.pass, "diatomic Runge-Lenz unexpectedly closed");
    let order1 = failing.orders[1].max_residual;
    assert!(order1 > 1e-2, "order-1 residual {order1:.3e} <= 1e-2");
    println!(
        "[acceptance] criterion 7 (constraint ladder): PASS \
         (valid ansatzes close below {worst:.3e} < 1e-6 at 64 samples; diatomic Runge-Lenz \
         correctly fails at order 1 with residual {order1:.3})"
    );
}

#[test]
fn criterion_8_numerics_hygiene() {
    // field-strength reconstruction: observed order of the h^2 residual
    let mut orders = Vec::new();
    for (field, x) in [
        (GaugeFieldConfig::WuYang, Vec3::new(1.0, 1.0, 1.0)),
        (GaugeFieldConfig::diatomic(0.5), Vec3::new(2.0, 0.0, 1.0)),
    ] {
        let r1 = field.check_f_from_a(x, 1e-3).unwrap();
        let r2 = field.check_f_from_a(x, 5e-4).unwrap();
        let order = (r1 / r2).log2();
        assert!(
            (1.8..=2.2).contains(&order),
            "{} reconstruction order {order:.3}",
            field.name()
        );
        orders.push(order);
    }

    // global RK4 order on the monopole reference orbit
    let pot = wu_yang_potential();
    let solution = |h: f64| {
        integrate(
            wu_yang_initial(),
            &GaugeFieldConfig::WuYang,
            Some(&pot),
            &IntegratorConfig::rk4(h, 10.0),
        )
        .unwrap()
        .last()
        .position
    };
    let reference = solution(1.25e-4);
    let errors: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&h| (solution(h) - reference).norm())
        .collect();
    let mut rk4_orders = Vec::new();
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!((3.7..=4.3).contains(&order), "rk4 order {order:.3}");
        rk4_orders.push(order);
    }
    println!(
        "[acceptance] criterion 8 (numerics hygiene): PASS \
         (reconstruction orders {:.2}/{:.2} in [1.8, 2.2]; rk4 orders {:.2}/{:.2} in [3.7, 4.3])",
        orders[0], orders[1], rk4_orders[0], rk4_orders[1]
    );
}

#[test]
fn criterion_9_poisson_bracket_algebra() {
    let field = GaugeFieldConfig::WuYang;
    let samples = sample_shell(100);
    let mut worst_canonical = 0.0f64;
    for (x, q) in &samples {
        let s = ParticleState::new(0.0, *x, Vec3::new(0.3, -0.2, 0.5), *q);
        for i in 0..3 {
            for j in 0..3 {
                let fx = move |st: &ParticleState| st.position[i];
                let fp = move |st: &ParticleState| {
                    let a = GaugeFieldConfig::WuYang.potential_at(st.position).unwrap();
                    st.momentum[j] + a[j].inner(st.isospin)
                };
                let v = poisson_bracket(&fx, &fp, &s, &field).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                worst_canonical = worst_canonical.max((v - expect).abs());

                let fa = move |st: &ParticleState| st.isospin.0[i];
                let fb = move |st: &ParticleState| st.isospin.0[j];
                let v = poisson_bracket(&fa, &fb, &s, &field).unwrap();
                let mut expect = 0.0;
                for c in 0..3 {
                    expect -= levi_civita(i, j, c) * s.isospin.0[c];
                }
                worst_canonical = worst_canonical.max((v - expect).abs());
            }
        }
    }
    assert!(
        worst_canonical < 1e-8,
        "canonical bracket deviation {worst_canonical:.3e} >= 1e-8"
    );

    // {f, H} against df/dt along integrated flows, on both backgrounds
    let pot = wu_yang_potential();
    let runs = [
        run(wu_yang_initial(), &GaugeFieldConfig::WuYang, Some(&pot), 20.0),
        run(diatomic_initial(), &GaugeFieldConfig::diatomic(0.5), None, 20.0),
    ];
    type PhaseFn = Box<dyn Fn(&ParticleState) -> f64 + Sync>;
    let mut worst_flow = 0.0f64;
    for traj in &runs {
        let functions: Vec<PhaseFn> = vec![
            Box::new(|s: &ParticleState| s.radial_charge()),
            Box::new(|s: &ParticleState| s.isospin.norm_sq()),
            Box::new(|s: &ParticleState| j_component(s, 0)),
            Box::new(|s: &ParticleState| j_component(s, 1)),
            Box::new(|s: &ParticleState| j_component(s, 2)),
        ];
        for f in &functions {
            let dev = bracket_matches_flow(f.as_ref(), traj, 211).unwrap();
            assert!(dev < 1e-5, "{}: flow deviation {dev:.3e} >= 1e-5", traj.field.name());
            worst_flow = worst_flow.max(dev);
        }
    }
    println!(
        "[acceptance] criterion 9 (Poisson-bracket algebra): PASS \
         (canonical brackets within {worst_canonical:.3e} < 1e-8 at 100 points; \
         {{f, H}} matches df/dt within {worst_flow:.3e} < 1e-5)"
    );
}

fn j_component(s: &ParticleState, i: usize) -> f64 {
    let xhat = s.position.normalized();
    let q = s.isospin.0.dot(xhat);
    (s.position.cross(s.momentum) - xhat * q)[i]
}
