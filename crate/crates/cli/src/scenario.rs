//! Scenario files: a flat TOML layout with sections [field], [potential],
//! [initial], [integrator], [outputs] plus an optional top-level seed.
//! Loading validates everything up front (guard radius, finite values,
//! method parameters) and produces either a particle scenario or a
//! Kaluza-Klein scenario depending on the field kind.

use isolab::dynamics::{IntegratorConfig, Method, ParticleState};
use isolab::fields::{GaugeFieldConfig, GaugeFunction, ScalarPotentialConfig};
use isolab::kaluza_klein::AbelianPotential;
use isolab::su2::AlgebraElement;
use isolab::vec3::Vec3;
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: Option<u64>,
    pub field: FieldSection,
    pub potential: Option<PotentialSection>,
    pub initial: InitialSection,
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub kind: String,
    pub kappa: Option<f64>,
    pub axis: Option<[f64; 3]>,
    pub a0: Option<f64>,
    pub slope: Option<[f64; 3]>,
    pub amp: Option<f64>,
    pub freq: Option<[f64; 3]>,
    pub b: Option<[f64; 3]>,
    pub g: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub q_param: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub x: Option<[f64; 3]>,
    pub pi: Option<[f64; 3]>,
    pub isospin: Option<[f64; 3]>,
    pub x4: Option<[f64; 4]>,
    pub u: Option<[f64; 4]>,
    pub x5: Option<f64>,
    pub charge: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub method: String,
    pub h: Option<f64>,
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub t_end: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsSection {
    pub trajectory: bool,
    pub drift: bool,
    pub conic: bool,
    pub svg: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        OutputsSection {
            trajectory: true,
            drift: true,
            conic: false,
            svg: false,
        }
    }
}

/// A validated scenario, split by sector.
#[derive(Debug)]
pub enum Scenario {
    Particle(ParticleScenario),
    KaluzaKlein(KkScenario),
}

#[derive(Debug)]
pub struct ParticleScenario {
    pub name: String,
    pub field: GaugeFieldConfig,
    pub potential: Option<ScalarPotentialConfig>,
    pub initial: ParticleState,
    pub integrator: IntegratorConfig,
    pub outputs: OutputsSection,
    pub seed: u64,
}

#[derive(Debug)]
pub struct KkScenario {
    pub name: String,
    pub potential: AbelianPotential,
    pub x4: [f64; 4],
    pub u4: [f64; 4],
    pub x5: f64,
    pub charge: f64,
    pub h: f64,
    pub tau_end: f64,
    pub outputs: OutputsSection,
}

fn require<T: Copy>(field: &Option<T>, what: &str, kind: &str) -> Result<T, ScenarioError> {
    field.ok_or_else(|| invalid(format!("[{kind}] requires `{what}`")))
}

fn finite3(v: [f64; 3], what: &str) -> Result<Vec3, ScenarioError> {
    let v = Vec3(v);
    if !v.is_finite() {
        return Err(invalid(format!("`{what}` has non-finite components")));
    }
    Ok(v)
}

/// Load and validate a scenario. Returns the scenario plus non-fatal
/// warnings (currently: the q_param / initial radial charge correlation).
pub fn load(path: &Path) -> Result<(Scenario, Vec<String>), ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    let file: ScenarioFile = toml::from_str(&text)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    validate(name, file)
}

pub fn validate(
    name: String,
    file: ScenarioFile,
) -> Result<(Scenario, Vec<String>), ScenarioError> {
    let mut warnings = Vec::new();
    let seed = file.seed.unwrap_or(0);
    let kind = file.field.kind.as_str();
    match kind {
        "vacuum" | "pure-gauge" | "wu-yang" | "diatomic" => {
            let field = particle_field(&file.field)?;
            let x = finite3(require(&file.initial.x, "x", "initial")?, "initial.x")?;
            let pi = finite3(require(&file.initial.pi, "pi", "initial")?, "initial.pi")?;
            let iso = finite3(
                require(&file.initial.isospin, "isospin", "initial")?,
                "initial.isospin",
            )?;
            let guard = field.guard_radius();
            if guard > 0.0 && x.norm() <= guard {
                return Err(invalid(format!(
                    "initial position violates the guard radius around the field \
                     singularity (|x| = {:.3e} <= {guard:.1e})",
                    x.norm()
                )));
            }
            let potential = match &file.potential {
                Some(p) => {
                    if ![p.q_param, p.alpha, p.beta].iter().all(|v| v.is_finite()) {
                        return Err(invalid("[potential] has non-finite parameters"));
                    }
                    let q0 = iso.dot(x.normalized());
                    if (p.q_param - q0).abs() > 1e-9 * q0.abs().max(1.0) {
                        warnings.push(format!(
                            "potential q_param = {} differs from the initial radial charge \
                             Q.rhat = {q0:.12}; the inverse-square coefficient is physically \
                             correlated with the conserved charge",
                            p.q_param
                        ));
                    }
                    Some(ScalarPotentialConfig::new(p.q_param, p.alpha, p.beta))
                }
                None => None,
            };
            let integrator = particle_integrator(&file.integrator)?;
            let initial = ParticleState::new(0.0, x, pi, AlgebraElement(iso));
            let scenario = ParticleScenario {
                name,
                field,
                potential,
                initial,
                integrator,
                outputs: file.outputs.clone(),
                seed,
            };
            Ok((Scenario::Particle(scenario), warnings))
        }
        "zero" | "uniform-b" | "dirac-monopole" => {
            let potential = abelian_field(&file.field)?;
            if file.potential.is_some() {
                return Err(invalid(
                    "[potential] is not supported for Kaluza-Klein scenarios",
                ));
            }
            let x4 = require(&file.initial.x4, "x4", "initial")?;
            let u4 = require(&file.initial.u, "u", "initial")?;
            if !(x4.iter().all(|v| v.is_finite()) && u4.iter().all(|v| v.is_finite())) {
                return Err(invalid("initial 4-vectors have non-finite components"));
            }
            let charge = require(&file.initial.charge, "charge", "initial")?;
            let x5 = file.initial.x5.unwrap_or(0.0);
            if file.integrator.method != "rk4" {
                return Err(invalid(
                    "Kaluza-Klein geodesics use the fixed-step method; set method = \"rk4\"",
                ));
            }
            let h = require(&file.integrator.h, "h", "integrator")?;
            if !(h > 0.0 && file.integrator.t_end > 0.0) {
                return Err(invalid("integrator h and t_end must be positive"));
            }
            potential
                .check([x4[0], x4[1], x4[2], x4[3]])
                .map_err(|e| invalid(format!("initial point invalid: {e}")))?;
            let scenario = KkScenario {
                name,
                potential,
                x4,
                u4,
                x5,
                charge,
                h,
                tau_end: file.integrator.t_end,
                outputs: file.outputs.clone(),
            };
            Ok((Scenario::KaluzaKlein(scenario), warnings))
        }
        other => Err(invalid(format!(
            "unknown field kind `{other}` (expected vacuum, pure-gauge, wu-yang, diatomic, \
             zero, uniform-b or dirac-monopole)"
        ))),
    }
}

fn particle_field(f: &FieldSection) -> Result<GaugeFieldConfig, ScenarioError> {
    Ok(match f.kind.as_str() {
        "vacuum" => GaugeFieldConfig::Vacuum,
        "wu-yang" => GaugeFieldConfig::WuYang,
        "diatomic" => {
            let kappa = require(&f.kappa, "kappa", "field")?;
            if !kappa.is_finite() {
                return Err(invalid("field kappa must be finite"));
            }
            GaugeFieldConfig::diatomic(kappa)
        }
        "pure-gauge" => {
            let axis = finite3(require(&f.axis, "axis", "field")?, "field.axis")?;
            if axis.norm() < 1e-12 {
                return Err(invalid("pure-gauge axis must be nonzero"));
            }
            let gauge = GaugeFunction::new(
                axis,
                f.a0.unwrap_or(0.0),
                Vec3(f.slope.unwrap_or([0.0; 3])),
                f.amp.unwrap_or(0.0),
                Vec3(f.freq.unwrap_or([0.0; 3])),
            );
            GaugeFieldConfig::pure_gauge(gauge)
        }
        _ => unreachable!("caller dispatches on kind"),
    })
}

fn abelian_field(f: &FieldSection) -> Result<AbelianPotential, ScenarioError> {
    Ok(match f.kind.as_str() {
        "zero" => AbelianPotential::Zero,
        "uniform-b" => AbelianPotential::UniformB {
            b: finite3(require(&f.b, "b", "field")?, "field.b")?,
        },
        "dirac-monopole" => {
            let g = require(&f.g, "g", "field")?;
            if !g.is_finite() {
                return Err(invalid("monopole charge g must be finite"));
            }
            AbelianPotential::DiracMonopole { g }
        }
        _ => unreachable!("caller dispatches on kind"),
    })
}

fn particle_integrator(i: &IntegratorSection) -> Result<IntegratorConfig, ScenarioError> {
    let method = match i.method.as_str() {
        "rk4" => {
            let h = require(&i.h, "h", "integrator")?;
            Method::Rk4 { h }
        }
        "rk45" => Method::Rk45Adaptive {
            tol_abs: i.tol_abs.unwrap_or(1e-10),
            tol_rel: i.tol_rel.unwrap_or(1e-10),
        },
        other => {
            return Err(invalid(format!(
                "unknown integrator method `{other}` (expected rk4 or rk45)"
            )))
        }
    };
    let cfg = IntegratorConfig {
        method,
        t_end: i.t_end,
    };
    cfg.validate()
        .map_err(|e| invalid(format!("integrator: {e}")))?;
    Ok(cfg)
}
