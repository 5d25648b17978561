//! Scenario-driven front end: declare a field, potential, initial state and
//! integrator in a TOML file; run simulations, gauge-covariance tests,
//! Kaluza-Klein comparisons and constraint-ladder checks; emit CSV/JSON/SVG
//! artifacts.
//!
//! Exit codes: 0 success, 2 validation error, 3 singular trajectory,
//! 4 internal error.

mod scenario;

use clap::{Parser, Subcommand, ValueEnum};
use isolab::analysis::{self, gauge_covariance_experiment, plane_and_conic};
use isolab::conservation::{
    evaluate_quantity, evaluate_standard_set, killing_tensor_residual, killing_vector_residual,
    sample_shell, van_holten_check, CoefficientAnsatz, PhasePotential, QuantityValue,
    StandardQuantity,
};
use isolab::dynamics::{integrate, Termination, Trajectory};
use isolab::fields::{GaugeFieldConfig, GaugeFunction};
use isolab::kaluza_klein::{self, lorentz_compare, FiveMetric, FiveState, KkIntegratorConfig};
use isolab::par::par_map;
use isolab::vec3::Vec3;
use scenario::{KkScenario, ParticleScenario, Scenario, ScenarioError};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

const DRIFT_TOLERANCE: f64 = 1e-7;
const GAUGE_POSITION_TOLERANCE: f64 = 1e-7;
const GAUGE_ISOSPIN_TOLERANCE: f64 = 1e-6;
const LADDER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Singular(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Singular(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io(io) => CliError::Internal(io.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "isolab",
    version,
    about = "Numerical laboratory for isospin-carrying particles in SU(2) gauge fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario; write trajectory, drift report and optional
    /// conic/SVG artifacts
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Render the in-plane orbit with the fitted conic overlay
        #[arg(long)]
        svg: bool,
    },
    /// Integrate a scenario and its seeded random gauge transform; report
    /// worldline and isospin deviations
    GaugeTest {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Integrate a 5D geodesic and the 4D Lorentz-force equation from the
    /// same data; report the projection deviation and charge drift
    KkCompare {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate the constraint ladder for a built-in ansatz
    /// (rotation, radial-charge, runge-lenz, diatomic-rotation) or for an
    /// ansatz file configuring one of those families
    KillingCheck {
        ansatz: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the background field: wu-yang or diatomic
        #[arg(long)]
        field: Option<String>,
        /// Deformation parameter for a diatomic background
        #[arg(long)]
        kappa: Option<f64>,
        /// Newtonian coefficient of the fine-tuned potential
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run every scenario file in a directory, concurrently
    Batch {
        dir: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        svg: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            scenario,
            out,
            format,
            svg,
        } => cmd_simulate(&scenario, &out, format, svg),
        Command::GaugeTest { scenario, seed, out } => cmd_gauge_test(&scenario, seed, &out),
        Command::KkCompare { scenario, out } => cmd_kk_compare(&scenario, &out),
        Command::KillingCheck {
            ansatz,
            out,
            field,
            kappa,
            alpha,
            samples,
        } => cmd_killing_check(&ansatz, &out, field.as_deref(), kappa, alpha, samples),
        Command::Batch {
            dir,
            out,
            format,
            svg,
        } => cmd_batch(&dir, &out, format, svg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn load_particle(path: &Path) -> Result<ParticleScenario, CliError> {
    let (scenario, warnings) = scenario::load(path)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match scenario {
        Scenario::Particle(s) => Ok(s),
        Scenario::KaluzaKlein(_) => Err(CliError::Validation(
            "this scenario declares an Abelian Kaluza-Klein field; use `isolab kk-compare`"
                .into(),
        )),
    }
}

fn load_kk(path: &Path) -> Result<KkScenario, CliError> {
    let (scenario, warnings) = scenario::load(path)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match scenario {
        Scenario::KaluzaKlein(s) => Ok(s),
        Scenario::Particle(_) => Err(CliError::Validation(
            "kk-compare needs an Abelian field kind (zero, uniform-b, dirac-monopole)".into(),
        )),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_particle(s: &ParticleScenario) -> Result<Trajectory, CliError> {
    integrate(s.initial, &s.field, s.potential.as_ref(), &s.integrator)
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn conserved_jkq(traj: &Trajectory) -> Result<(Vec3, Vec3, f64), CliError> {
    let first = &traj.samples[0];
    let vector = |q: StandardQuantity| -> Result<Vec3, CliError> {
        match evaluate_quantity(q, first, &traj.field, traj.potential.as_ref())
            .map_err(|e| CliError::Internal(e.to_string()))?
        {
            QuantityValue::Vector(v) => Ok(v),
            _ => Err(CliError::Internal("expected vector quantity".into())),
        }
    };
    Ok((
        vector(StandardQuantity::JWuYang)?,
        vector(StandardQuantity::RungeLenz)?,
        first.radial_charge(),
    ))
}

fn cmd_simulate(path: &Path, out: &Path, format: Format, svg: bool) -> Result<(), CliError> {
    let s = load_particle(path)?;
    fs::create_dir_all(out)?;
    let traj = run_particle(&s)?;

    if s.outputs.trajectory {
        match format {
            Format::Csv => {
                let mut buf = Vec::new();
                traj.write_csv(&mut buf)
                    .map_err(|e| CliError::Internal(e.to_string()))?;
                write_text(
                    &out.join(format!("{}_trajectory.csv", s.name)),
                    &String::from_utf8(buf).expect("csv is ascii"),
                )?;
            }
            Format::Json => {
                let text = serde_json::to_string_pretty(&traj.samples)
                    .map_err(|e| CliError::Internal(e.to_string()))?;
                write_text(&out.join(format!("{}_trajectory.json", s.name)), &text)?;
            }
        }
    }

    if s.outputs.drift {
        let report = evaluate_standard_set(&traj, DRIFT_TOLERANCE)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        write_text(&out.join(format!("{}_drift.json", s.name)), &report.to_json())?;
        for e in &report.entries {
            println!(
                "  {:14} expected={} maxRelDrift={:.3e} pass={}",
                e.quantity, e.expected_conserved, e.max_rel_drift, e.pass
            );
        }
    }

    if s.outputs.conic || s.outputs.svg || svg {
        match conserved_jkq(&traj) {
            Ok((j, k, q)) if q.abs() > 1e-10 => {
                let alpha = s.potential.map(|p| p.alpha).unwrap_or(0.0);
                match plane_and_conic(&traj, j, k, alpha, q) {
                    Ok(report) => {
                        let text = serde_json::to_string_pretty(&report)
                            .map_err(|e| CliError::Internal(e.to_string()))?;
                        write_text(&out.join(format!("{}_conic.json", s.name)), &text)?;
                        if s.outputs.svg || svg {
                            let n = report.planarity.normal;
                            let offset = j.norm_sq() - q * q;
                            let positions: Vec<Vec3> =
                                traj.samples.iter().map(|p| p.position).collect();
                            let projected = analysis::project_to_plane(&positions, n, offset);
                            let image =
                                analysis::render_orbit_svg(&projected, Some(&report.conic_fit));
                            write_text(&out.join(format!("{}_orbit.svg", s.name)), &image)?;
                        }
                    }
                    Err(e) => println!("conic analysis skipped: {e}"),
                }
            }
            _ => println!("conic analysis skipped: radial charge is degenerate"),
        }
    }

    match traj.termination {
        Termination::Completed => Ok(()),
        Termination::GuardRadius { at } => Err(CliError::Singular(format!(
            "trajectory entered the guard radius at t = {at:.6}; partial artifacts written"
        ))),
        Termination::StepUnderflow { at } => Err(CliError::Singular(format!(
            "adaptive step underflow at t = {at:.6}; partial artifacts written"
        ))),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct GaugeTestReport {
    seed: u64,
    max_position_deviation: f64,
    max_isospin_deviation: f64,
    position_tolerance: f64,
    isospin_tolerance: f64,
    pass: bool,
}

fn cmd_gauge_test(path: &Path, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let s = load_particle(path)?;
    fs::create_dir_all(out)?;
    let seed = seed.unwrap_or(s.seed);
    let gauge = if seed == 0 {
        GaugeFunction::identity()
    } else {
        GaugeFunction::seeded(seed)
    };
    let cmp = gauge_covariance_experiment(
        s.initial,
        &s.field,
        s.potential.as_ref(),
        &s.integrator,
        &gauge,
    )
    .map_err(|e| match e {
        analysis::AnalysisError::RequiresFixedStep => CliError::Validation(e.to_string()),
        other => CliError::Internal(other.to_string()),
    })?;
    let report = GaugeTestReport {
        seed,
        max_position_deviation: cmp.max_position_deviation,
        max_isospin_deviation: cmp.max_isospin_deviation,
        position_tolerance: GAUGE_POSITION_TOLERANCE,
        isospin_tolerance: GAUGE_ISOSPIN_TOLERANCE,
        pass: cmp.max_position_deviation < GAUGE_POSITION_TOLERANCE
            && cmp.max_isospin_deviation < GAUGE_ISOSPIN_TOLERANCE,
    };
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    write_text(&out.join(format!("{}_gauge.json", s.name)), &text)?;
    println!(
        "gauge test (seed {seed}): |dx| = {:.3e}, |dQ| = {:.3e}, pass = {}",
        report.max_position_deviation, report.max_isospin_deviation, report.pass
    );
    Ok(())
}

fn cmd_kk_compare(path: &Path, out: &Path) -> Result<(), CliError> {
    let s = load_kk(path)?;
    fs::create_dir_all(out)?;
    let metric = FiveMetric::new(s.potential.clone());
    let initial = FiveState::with_charge(&metric, s.x4, s.u4, s.x5, s.charge)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let cfg = KkIntegratorConfig::new(s.h, s.tau_end);
    let (cmp, five) =
        lorentz_compare(&metric, initial, &cfg).map_err(|e| CliError::Internal(e.to_string()))?;
    let text =
        serde_json::to_string_pretty(&cmp).map_err(|e| CliError::Internal(e.to_string()))?;
    write_text(&out.join(format!("{}_kk.json", s.name)), &text)?;
    if s.outputs.trajectory {
        let mut buf = Vec::new();
        kaluza_klein::write_csv(&five, &mut buf)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        write_text(
            &out.join(format!("{}_kk_trajectory.csv", s.name)),
            &String::from_utf8(buf).expect("csv is ascii"),
        )?;
    }
    println!(
        "kk compare: maxDeviation = {:.3e}, qDrift = {:.3e}, normDrift = {:.3e}",
        cmp.max_deviation, cmp.q_drift, cmp.norm_drift
    );
    if let isolab::kaluza_klein::AbelianPotential::DiracMonopole { g } = &s.potential {
        // cone cross-check: J = x cross v - (q g) xhat should hold its angle
        let qg = s.charge * g;
        let j_of = |st: &FiveState| {
            let x = Vec3::new(st.x[1], st.x[2], st.x[3]);
            let v = Vec3::new(st.u[1], st.u[2], st.u[3]);
            x.cross(v) - x.normalized() * qg
        };
        let j0 = j_of(&five[0]);
        let mut angle_dev = 0.0f64;
        let mean = (-qg / j0.norm()).acos();
        for st in &five {
            let x = Vec3::new(st.x[1], st.x[2], st.x[3]);
            let angle = j0.normalized().dot(x.normalized()).clamp(-1.0, 1.0).acos();
            angle_dev = angle_dev.max((angle - mean).abs());
        }
        println!("cone cross-check: aperture {mean:.6} rad, max deviation {angle_dev:.3e}");
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct KillingCheckReport {
    #[serde(flatten)]
    ladder: isolab::conservation::LadderReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    killing_vector_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    killing_tensor_residual: Option<f64>,
}

/// Ansatz file: configures one of the built-in coefficient families.
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct AnsatzFile {
    ansatz: String,
    axis: Option<[f64; 3]>,
    alpha: Option<f64>,
    beta: Option<f64>,
    kappa: Option<f64>,
    field: Option<String>,
    potential: Option<String>,
    samples: Option<usize>,
    tolerance: Option<f64>,
}

struct KillingSpec {
    family: String,
    stem: String,
    axis: Vec3,
    alpha: f64,
    beta: f64,
    kappa: f64,
    field_name: String,
    potential_name: String,
    samples: usize,
    tolerance: f64,
}

impl KillingSpec {
    fn for_family(family: &str, stem: &str) -> Result<Self, CliError> {
        let (field_name, potential_name, kappa) = match family {
            "rotation" | "radial-charge" | "runge-lenz" => ("wu-yang", "fine-tuned", 0.0),
            "diatomic-rotation" => ("diatomic", "zero", 0.5),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown ansatz `{other}` (expected rotation, radial-charge, runge-lenz or \
                     diatomic-rotation)"
                )))
            }
        };
        Ok(KillingSpec {
            family: family.to_string(),
            stem: stem.to_string(),
            axis: Vec3::new(0.3, -0.5, 0.8),
            alpha: -1.0,
            beta: 0.1,
            kappa,
            field_name: field_name.to_string(),
            potential_name: potential_name.to_string(),
            samples: 64,
            tolerance: LADDER_TOLERANCE,
        })
    }

    fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        let file: AnsatzFile = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("ansatz file: {e}")))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "ansatz".into());
        let mut spec = KillingSpec::for_family(&file.ansatz, &stem)?;
        if let Some(axis) = file.axis {
            spec.axis = Vec3(axis);
        }
        if let Some(alpha) = file.alpha {
            spec.alpha = alpha;
        }
        if let Some(beta) = file.beta {
            spec.beta = beta;
        }
        if let Some(kappa) = file.kappa {
            spec.kappa = kappa;
        }
        if let Some(field) = file.field {
            spec.field_name = field;
        }
        if let Some(potential) = file.potential {
            spec.potential_name = potential;
        }
        if let Some(samples) = file.samples {
            spec.samples = samples;
        }
        if let Some(tolerance) = file.tolerance {
            spec.tolerance = tolerance;
        }
        Ok(spec)
    }
}

fn cmd_killing_check(
    name: &str,
    out: &Path,
    field_override: Option<&str>,
    kappa: Option<f64>,
    alpha: Option<f64>,
    n_samples: Option<usize>,
) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    let path = Path::new(name);
    let mut spec = if path.extension().is_some_and(|e| e == "toml") {
        KillingSpec::from_file(path)?
    } else {
        KillingSpec::for_family(name, &format!("killing_{name}"))?
    };
    if let Some(field) = field_override {
        spec.field_name = field.to_string();
        if field == "diatomic" {
            spec.potential_name = "zero".to_string();
            if kappa.is_none() && spec.kappa == 0.0 {
                spec.kappa = 0.5;
            }
        }
    }
    if let Some(kappa) = kappa {
        spec.kappa = kappa;
    }
    if let Some(alpha) = alpha {
        spec.alpha = alpha;
    }
    if let Some(samples) = n_samples {
        spec.samples = samples;
    }

    let axis = spec.axis;
    let ansatz = match spec.family.as_str() {
        "rotation" => CoefficientAnsatz::rotation(axis, 0.0),
        "radial-charge" => CoefficientAnsatz::radial_charge(),
        "runge-lenz" => CoefficientAnsatz::runge_lenz(axis, spec.alpha),
        "diatomic-rotation" => CoefficientAnsatz::rotation(axis, spec.kappa),
        _ => unreachable!("family validated by KillingSpec"),
    };
    let field = match spec.field_name.as_str() {
        "wu-yang" => GaugeFieldConfig::WuYang,
        "diatomic" => GaugeFieldConfig::diatomic(spec.kappa),
        other => {
            return Err(CliError::Validation(format!(
                "unknown field `{other}` (expected wu-yang or diatomic)"
            )))
        }
    };
    let potential = match spec.potential_name.as_str() {
        "fine-tuned" => PhasePotential::fine_tuned(spec.alpha, spec.beta),
        "zero" => PhasePotential::zero(),
        other => {
            return Err(CliError::Validation(format!(
                "unknown potential `{other}` (expected fine-tuned or zero)"
            )))
        }
    };

    let samples = sample_shell(spec.samples);
    let ladder = van_holten_check(&ansatz, &field, &potential, &samples, spec.tolerance)
        .map_err(|e| CliError::Internal(e.to_string()))?;

    // flat-space Killing residuals for the position-only coefficients
    let grid: Vec<Vec3> = samples.iter().map(|(x, _)| *x).collect();
    let killing_vector = (ansatz.rank == 1).then(|| {
        let c = move |x: Vec3| axis.normalized().cross(x);
        killing_vector_residual(&c, &grid)
    });
    let killing_tensor = (ansatz.rank == 2).then(|| {
        let n = axis.normalized();
        let c = move |x: Vec3| {
            let mut m = [[0.0; 3]; 3];
            let nx = n.dot(x);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = -n[i] * x[j] - n[j] * x[i];
                    if i == j {
                        m[i][j] += 2.0 * nx;
                    }
                }
            }
            m
        };
        killing_tensor_residual(&c, &grid)
    });

    for o in &ladder.orders {
        println!(
            "  order {}: max residual {:.3e} pass={}",
            o.order, o.max_residual, o.pass
        );
    }
    let report = KillingCheckReport {
        ladder,
        killing_vector_residual: killing_vector,
        killing_tensor_residual: killing_tensor,
    };
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    write_text(&out.join(format!("{}.json", spec.stem)), &text)?;
    Ok(())
}

fn cmd_batch(dir: &Path, out: &Path, format: Format, svg: bool) -> Result<(), CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Validation(format!(
            "no scenario files (*.toml) in {}",
            dir.display()
        )));
    }
    fs::create_dir_all(out)?;

    let results: Vec<(String, Result<(), CliError>)> = par_map(&paths, |p| {
        let name = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        // kk scenarios get the comparison pipeline, particle scenarios the
        // simulation pipeline
        let result = match scenario::load(p) {
            Ok((Scenario::Particle(_), _)) => cmd_simulate(p, out, format, svg),
            Ok((Scenario::KaluzaKlein(_), _)) => cmd_kk_compare(p, out),
            Err(e) => Err(e.into()),
        };
        (name, result)
    });

    let mut worst: u8 = 0;
    for (name, result) in &results {
        match result {
            Ok(()) => println!("{name}: ok"),
            Err(e) => {
                println!("{name}: exit {} ({e})", e.code());
                worst = worst.max(e.code());
            }
        }
    }
    if worst == 0 {
        Ok(())
    } else if worst == 2 {
        Err(CliError::Validation("batch had validation failures".into()))
    } else if worst == 3 {
        Err(CliError::Singular("batch had singular trajectories".into()))
    } else {
        Err(CliError::Internal("batch had internal failures".into()))
    }
}
