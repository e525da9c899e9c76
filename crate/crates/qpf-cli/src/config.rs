//! JSON run configuration.
//!
//! Defaults reproduce the Figure-1 experiment: the arctan family with
//! alpha = 100 driven by the golden-mean rotation, G = 2^15, pullback
//! depth 10^4, escape horizon 10^5, bisection tolerance 1e-5. Every
//! constant is overridable.

use qpf_core::expr::Expr;
use qpf_core::{Family, GridSpec, RotationSpec, Strip};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Exponent q for the h_q families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Harper parameters: E = e0 - span * beta, potential coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    /// Custom family: expressions for f and its six partials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exprs: Option<CustomExprs>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomExprs {
    pub f: String,
    pub fx: String,
    pub fxx: String,
    pub ftheta: String,
    pub ftheta2: String,
    pub fthetax: String,
    pub fbeta: String,
    pub domain: (f64, f64),
}

fn default_alpha() -> f64 {
    100.0
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            kind: "arctan_intro".into(),
            alpha: 100.0,
            q: None,
            e0: None,
            coupling: None,
            span: None,
            exprs: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripConfig {
    pub e_minus: f64,
    pub e_plus: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    /// Steepness scale for the derived slope constants; defaults to the
    /// family's alpha.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub p: f64,
    pub s: f64,
    #[serde(rename = "S")]
    pub big_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationConfig {
    pub omega: f64,
    pub dio_c: f64,
    pub dio_eta: f64,
    pub check_horizon: u64,
}

impl Default for RotationConfig {
    fn default() -> Self {
        let rot = RotationSpec::golden(1_000_000);
        Self {
            omega: rot.omega,
            dio_c: rot.dio_c,
            dio_eta: rot.dio_eta,
            check_horizon: rot.check_horizon,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub m0: usize,
    pub k0: u64,
    pub kappa: u64,
    /// Induction depth for the regions command.
    pub n_max: usize,
    /// Levels up to which the admissible beta intervals are bisected;
    /// deeper levels reuse the window minimum for M_n.
    pub beta_levels: usize,
    /// Strip/bounds reports are skipped at levels with M_n above this.
    pub report_m_cap: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { m0: 4, k0: 32, kappa: 2, n_max: 3, beta_levels: 2, report_m_cap: 100_000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsConfig {
    /// Circle grid size G.
    pub g: usize,
    /// Pullback depth N for graph computation.
    pub n: usize,
    /// Escape horizon N_max for the beta_c bisection.
    pub n_max: usize,
}

impl Default for GridsConfig {
    fn default() -> Self {
        Self { g: 1 << 15, n: 10_000, n_max: 100_000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesConfig {
    /// Bracket width for the beta_c bisection.
    pub beta_tol: f64,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        Self { beta_tol: 1e-5 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Probe offset below beta_c; default 1e-4 * |B(0)|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_probe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink_source_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyap_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_pinch: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyGridConfig {
    pub theta: usize,
    pub x: usize,
    pub beta: usize,
    pub max_refinements: usize,
}

impl Default for VerifyGridConfig {
    fn default() -> Self {
        let g = GridSpec::default();
        Self { theta: g.theta, x: g.x, beta: g.beta, max_refinements: g.max_refinements }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub family: FamilyConfig,
    /// Defaults to a per-family preset when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip: Option<StripConfig>,
    #[serde(default)]
    pub rotation: RotationConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub grids: GridsConfig,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub verify_grid: VerifyGridConfig,
    /// Default beta for graphs/figure/regions when no --beta is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// Everything resolved and validated, ready for the commands.
pub struct Resolved {
    pub family: Family,
    pub strip: Strip,
    pub rotation: RotationSpec,
    pub config: RunConfig,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: String) -> Result<T, ConfigError> {
    Err(ConfigError(msg))
}

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// Per-family strip preset. The constants were chosen so that the full
/// assumption suite passes for the arctan families at alpha = 100
/// (`qpf verify` certifies them).
pub fn default_strip(family: &Family) -> Result<StripConfig, ConfigError> {
    Ok(match family {
        Family::ArctanIntro { alpha } => StripConfig {
            e_minus: -2.6 / alpha,
            e_plus: 2.6 / alpha,
            c_minus: 0.4,
            c_plus: FRAC_PI_2,
            alpha: Some(*alpha),
            p: 12.0,
            // the (A9) edge value min over B(0) of 4 pi^2 beta (cos at
            // the I_0 boundary) is ~0.33 at alpha = 100
            s: 0.25,
            big_s: 6.4,
        },
        Family::ArctanQuarterPi { alpha } => StripConfig {
            e_minus: 0.0,
            e_plus: 2.6 / alpha,
            c_minus: 0.4,
            c_plus: FRAC_PI_2,
            alpha: Some(*alpha),
            p: 12.0,
            s: 0.5,
            big_s: 5.6,
        },
        Family::HqDrive { alpha, q } => {
            let hinf = qpf_core::family::hq::h_inf(*q);
            let m = 0.5 * hinf;
            let tau = std::f64::consts::TAU;
            let big_s = (tau * m).max(tau * m.sqrt()) * 1.1;
            StripConfig {
                e_minus: 0.0,
                e_plus: 2.6 / alpha,
                c_minus: 0.4 * hinf / FRAC_PI_2,
                c_plus: hinf,
                alpha: Some(*alpha),
                p: 12.0,
                s: 0.3,
                big_s,
            }
        }
        Family::SineDrive { alpha, q } => {
            let hinf = qpf_core::family::hq::h_inf(*q);
            StripConfig {
                e_minus: 0.0,
                e_plus: 2.6 / alpha,
                c_minus: 0.4 * hinf / FRAC_PI_2,
                c_plus: hinf,
                alpha: Some(*alpha),
                p: 12.0,
                s: 0.3,
                big_s: 4.5,
            }
        }
        Family::Harper { .. } => StripConfig {
            e_minus: -1.2,
            e_plus: -0.9,
            c_minus: 0.0,
            c_plus: 1.3,
            alpha: Some(4.0),
            p: 2.0,
            s: 0.5,
            big_s: 50.0,
        },
        Family::Custom(_) => {
            return err("custom families must supply an explicit strip".into())
        }
    })
}

pub fn build_family(cfg: &FamilyConfig, omega: f64) -> Result<Family, ConfigError> {
    let fam = match cfg.kind.as_str() {
        "arctan_intro" => Family::ArctanIntro { alpha: cfg.alpha },
        "arctan_quarter_pi" => Family::ArctanQuarterPi { alpha: cfg.alpha },
        "hq_drive" => Family::HqDrive { alpha: cfg.alpha, q: cfg.q.unwrap_or(2.0) },
        "sine_drive" => Family::SineDrive { alpha: cfg.alpha, q: cfg.q.unwrap_or(2.0) },
        "harper" => Family::Harper {
            e0: cfg.e0.unwrap_or(2.5),
            coupling: cfg.coupling.unwrap_or(1.0),
            span: cfg.span.unwrap_or(2.0),
        },
        "custom" => {
            let e = cfg
                .exprs
                .as_ref()
                .ok_or_else(|| ConfigError("custom family needs 'exprs'".into()))?;
            let parse = |src: &str, what: &str| {
                Expr::parse(src, omega)
                    .map_err(|e| ConfigError(format!("expression '{what}': {e}")))
            };
            Family::Custom(qpf_core::family::CustomFamily {
                f: parse(&e.f, "f")?,
                fx: parse(&e.fx, "fx")?,
                fxx: parse(&e.fxx, "fxx")?,
                ftheta: parse(&e.ftheta, "ftheta")?,
                ftheta2: parse(&e.ftheta2, "ftheta2")?,
                fthetax: parse(&e.fthetax, "fthetax")?,
                fbeta: parse(&e.fbeta, "fbeta")?,
                domain: e.domain,
            })
        }
        other => return err(format!("unknown family kind '{other}'")),
    };
    fam.validate().map_err(|e| ConfigError(format!("family: {e}")))?;
    Ok(fam)
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("bad config JSON: {e}")))
    }

    /// Validate every component against its type invariants.
    pub fn resolve(self) -> Result<Resolved, ConfigError> {
        let rotation = RotationSpec::new(
            self.rotation.omega,
            self.rotation.dio_c,
            self.rotation.dio_eta,
            self.rotation.check_horizon,
        )
        .map_err(|e| ConfigError(format!("rotation: {e}")))?;
        rotation.validate().map_err(|e| ConfigError(format!("rotation: {e}")))?;

        let family = build_family(&self.family, rotation.omega)?;

        let sc = match &self.strip {
            Some(s) => s.clone(),
            None => default_strip(&family)?,
        };
        let strip = Strip::new(
            sc.e_minus,
            sc.e_plus,
            sc.c_minus,
            sc.c_plus,
            sc.alpha.unwrap_or(self.family.alpha),
            sc.p,
            sc.s,
            sc.big_s,
        )
        .map_err(|e| ConfigError(format!("strip: {e}")))?;

        if let Family::Custom(_) = &family {
            qpf_core::family::validate_custom(&family, &strip)
                .map_err(|e| ConfigError(format!("custom family: {e}")))?;
        }

        if self.schedule.m0 < 2 || self.schedule.k0 < 2 || self.schedule.kappa < 2 {
            return err("schedule: M_0, K_0, kappa must all be >= 2".into());
        }
        if self.grids.g < 2 {
            return err("grids: G must be >= 2".into());
        }
        if self.tolerances.beta_tol <= 0.0 {
            return err("tolerances: beta_tol must be positive".into());
        }

        Ok(Resolved { family, strip, rotation, config: self })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_resolves_to_figure1() {
        let resolved = RunConfig::default().resolve().unwrap();
        assert!(matches!(resolved.family, Family::ArctanIntro { alpha } if alpha == 100.0));
        assert_eq!(resolved.config.grids.g, 1 << 15);
        assert_eq!(resolved.config.grids.n_max, 100_000);
        assert!((resolved.rotation.omega - 0.6180339887498949).abs() < 1e-15);
    }

    #[test]
    fn rejects_rational_rotation() {
        let mut cfg = RunConfig::default();
        cfg.rotation.omega = 0.5;
        cfg.rotation.check_horizon = 10;
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn rejects_bad_strip_ordering() {
        let mut cfg = RunConfig::default();
        cfg.strip = Some(StripConfig {
            e_minus: 0.5,
            e_plus: 0.1,
            c_minus: 0.6,
            c_plus: 1.5,
            alpha: None,
            p: 3.0,
            s: 1.0,
            big_s: 6.0,
        });
        let e = cfg.resolve().unwrap_err();
        assert!(e.0.contains("strip"), "{e}");
    }
}
