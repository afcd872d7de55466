//! Run configuration: a strict, sectioned TOML schema.
//!
//! Parsing is deliberately unforgiving — unknown keys, out-of-range values,
//! and parameters that the chosen family does not take are all rejected
//! before any computation starts, so a run that begins is a run whose inputs
//! were understood.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pwscat::potentials::SampledKernel;
use pwscat::transfer::Method;
use pwscat::{EvolveOptions, Family, IncidenceSpec, Potential, Profile, Side, SolveOptions, YKernel, C64};

/// Everything the config file can say about a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub physics: PhysicsConfig,
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// `delta_line` | `sinc_line` | `delta_x_slab` | `separable_spectrum` |
    /// `inverse_pole` | `gaussian_modulated` | `product_separable`
    pub family: String,
    /// Coupling constant as `[re, im]`.
    pub coupling: [f64; 2],
    /// Slab faces `[a_minus, a_plus]` (equal for `delta_x_slab`).
    pub support: [f64; 2],
    /// `uniform` | `raised_cosine` | `tabulated`
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_xs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_values: Option<Vec<f64>>,
    /// Spectral center (`gaussian_modulated`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Spectral width / decay rate (`gaussian_modulated`, `inverse_pole`,
    /// `separable_spectrum`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Pole order (`inverse_pole`, `separable_spectrum`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    /// Band edge (`sinc_line`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Transverse kernel of `delta_x_slab`: `delta` | `gaussian_modulated` |
    /// `inverse_pole`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    /// Sampled transverse factor of `product_separable`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_ys: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_hs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_p_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_table: Option<usize>,
    /// Solve the `y`-reflected interaction `v(x, -y)` instead.
    #[serde(default)]
    pub mirror_y: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    /// Wavenumber of the incident wave.
    pub k: f64,
    /// One entry per incident plane wave.
    pub incidence: Vec<IncidenceConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceConfig {
    /// `left` | `right`
    pub side: String,
    /// Direction angle in degrees; left side takes `(-90, 90)`, right side
    /// `(90, 270)`.
    pub theta0_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Propagating (open-channel) nodes.
    pub n: usize,
    /// `propagating` | `full`
    #[serde(default = "default_mode")]
    pub mode: String,
    /// Evanescent nodes per sign of the transverse momentum (full mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_ev: Option<usize>,
    /// Evanescent cutoff as a multiple of `k` (full mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_over_k: Option<f64>,
    /// `ode` | `dyson` | `born` | `closed_form`
    #[serde(default = "default_method")]
    pub method: String,
    /// Series truncation order (`dyson` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dyson_order: Option<usize>,
    /// Relative accuracy target of the adaptive stepper.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    /// Refuse boundary-value solves above this condition estimate.
    #[serde(default = "default_condition")]
    pub condition_threshold: f64,
    /// Refuse full-mode slabs with `lambda * width` above this.
    #[serde(default = "default_guard")]
    pub stiffness_guard: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Target directory; the `--out` flag overrides it. Not echoed into
    /// output headers (where a file landed is not part of what it means).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Any subset of `csv`, `json`.
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
    /// Decimal digits in CSV fields.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, formats: default_formats(), precision: default_precision() }
    }
}

fn default_profile() -> String {
    "uniform".into()
}
fn default_mode() -> String {
    "propagating".into()
}
fn default_method() -> String {
    "ode".into()
}
fn default_rtol() -> f64 {
    1e-10
}
fn default_condition() -> f64 {
    1e12
}
fn default_guard() -> f64 {
    40.0
}
fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}
fn default_precision() -> usize {
    12
}

/// Rejected configuration, reported before any numerics run.
#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(toml::de::Error),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::Invalid(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        let cfg: RunConfig = toml::from_str(&text).map_err(ConfigError::Parse)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range and cross-field checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.potential.build()?;
        let k = self.physics.k;
        if !(k > 0.0) || !k.is_finite() {
            return invalid("physics.k must be positive and finite");
        }
        if self.physics.incidence.is_empty() {
            return invalid("physics.incidence must list at least one entry");
        }
        for inc in &self.physics.incidence {
            inc.build()?;
        }
        self.numerics.validate()?;
        if self.numerics.method == "born" && self.numerics.mode == "full" {
            return invalid("numerics: the born method is defined on the propagating channels; use mode = \"propagating\"");
        }
        self.output.validate()?;
        Ok(())
    }

    /// The config as echoed into output headers: defaults resolved, target
    /// directory dropped so reruns into different places stay byte-identical.
    pub fn header_echo(&self) -> String {
        let mut echo = self.clone();
        echo.output.dir = None;
        toml::to_string(&echo).expect("config serializes")
    }
}

impl PotentialConfig {
    /// Instantiates the interaction, rejecting parameters the family does
    /// not take.
    pub fn build(&self) -> Result<Potential, ConfigError> {
        let family = self.family_value()?;
        let profile = self.profile_value()?;
        let coupling = C64::new(self.coupling[0], self.coupling[1]);
        let support = (self.support[0], self.support[1]);
        let v = Potential::new(family, coupling, support, profile)
            .map_err(|e| ConfigError::Invalid(format!("potential: {e}")))?;
        Ok(if self.mirror_y { v.reflected_y() } else { v })
    }

    fn family_value(&self) -> Result<Family, ConfigError> {
        let fam = match self.family.as_str() {
            "delta_line" => {
                self.forbid(&["alpha", "beta", "ell", "kappa", "kernel", "kernel_ys"])?;
                Family::DeltaLine
            }
            "sinc_line" => {
                self.forbid(&["alpha", "beta", "ell", "kernel", "kernel_ys"])?;
                Family::SincLine { kappa: self.require_f64(self.kappa, "kappa")? }
            }
            "delta_x_slab" => {
                self.forbid(&["kappa", "kernel_ys"])?;
                Family::DeltaXSlab { kernel: self.kernel_value()? }
            }
            "separable_spectrum" => {
                self.forbid(&["alpha", "kappa", "kernel", "kernel_ys"])?;
                Family::SeparableSpectrum {
                    beta: self.require_f64(self.beta, "beta")?,
                    ell: self.require_u32(self.ell, "ell")?,
                }
            }
            "inverse_pole" => {
                self.forbid(&["alpha", "kappa", "kernel", "kernel_ys"])?;
                Family::InversePole {
                    beta: self.require_f64(self.beta, "beta")?,
                    ell: self.require_u32(self.ell, "ell")?,
                }
            }
            "gaussian_modulated" => {
                self.forbid(&["ell", "kappa", "kernel", "kernel_ys"])?;
                Family::GaussianModulated {
                    alpha: self.require_f64(self.alpha, "alpha")?,
                    beta: self.require_f64(self.beta, "beta")?,
                }
            }
            "product_separable" => {
                self.forbid(&["alpha", "beta", "ell", "kappa", "kernel"])?;
                let ys = self.kernel_ys.clone().ok_or_else(|| {
                    ConfigError::Invalid("potential.kernel_ys is required for product_separable".into())
                })?;
                let hs = self.kernel_hs.clone().ok_or_else(|| {
                    ConfigError::Invalid("potential.kernel_hs is required for product_separable".into())
                })?;
                let p_max = self.require_f64(self.kernel_p_max, "kernel_p_max")?;
                let table = self.kernel_table.unwrap_or(512);
                let kernel = SampledKernel::new(ys, hs, p_max, table)
                    .map_err(|e| ConfigError::Invalid(format!("potential: {e}")))?;
                Family::ProductSeparable { kernel }
            }
            other => {
                return invalid(format!("potential.family \"{other}\" is not recognized"));
            }
        };
        Ok(fam)
    }

    fn kernel_value(&self) -> Result<YKernel, ConfigError> {
        let name = self.kernel.as_deref().ok_or_else(|| {
            ConfigError::Invalid("potential.kernel is required for delta_x_slab".into())
        })?;
        match name {
            "delta" => {
                self.forbid(&["alpha", "beta", "ell"])?;
                Ok(YKernel::Delta)
            }
            "gaussian_modulated" => {
                self.forbid(&["ell"])?;
                Ok(YKernel::GaussianModulated {
                    alpha: self.require_f64(self.alpha, "alpha")?,
                    beta: self.require_f64(self.beta, "beta")?,
                })
            }
            "inverse_pole" => {
                self.forbid(&["alpha"])?;
                Ok(YKernel::InversePole {
                    beta: self.require_f64(self.beta, "beta")?,
                    ell: self.require_u32(self.ell, "ell")?,
                })
            }
            other => invalid(format!("potential.kernel \"{other}\" is not recognized")),
        }
    }

    fn profile_value(&self) -> Result<Profile, ConfigError> {
        match self.profile.as_str() {
            "uniform" => Ok(Profile::Uniform),
            "raised_cosine" => Ok(Profile::RaisedCosine),
            "tabulated" => {
                let xs = self.profile_xs.clone().ok_or_else(|| {
                    ConfigError::Invalid("potential.profile_xs is required for the tabulated profile".into())
                })?;
                let values = self.profile_values.clone().ok_or_else(|| {
                    ConfigError::Invalid("potential.profile_values is required for the tabulated profile".into())
                })?;
                Ok(Profile::Tabulated { xs, values })
            }
            other => invalid(format!("potential.profile \"{other}\" is not recognized")),
        }
    }

    fn require_f64(&self, v: Option<f64>, name: &str) -> Result<f64, ConfigError> {
        v.ok_or_else(|| {
            ConfigError::Invalid(format!("potential.{name} is required for family {}", self.family))
        })
    }

    fn require_u32(&self, v: Option<u32>, name: &str) -> Result<u32, ConfigError> {
        v.ok_or_else(|| {
            ConfigError::Invalid(format!("potential.{name} is required for family {}", self.family))
        })
    }

    /// Rejects parameters that would be silently ignored.
    fn forbid(&self, names: &[&str]) -> Result<(), ConfigError> {
        for &name in names {
            let set = match name {
                "alpha" => self.alpha.is_some(),
                "beta" => self.beta.is_some(),
                "ell" => self.ell.is_some(),
                "kappa" => self.kappa.is_some(),
                "kernel" => self.kernel.is_some(),
                "kernel_ys" => {
                    self.kernel_ys.is_some()
                        || self.kernel_hs.is_some()
                        || self.kernel_p_max.is_some()
                        || self.kernel_table.is_some()
                }
                _ => false,
            };
            if set {
                return invalid(format!(
                    "potential.{name} is not a parameter of family {} (and its kernel, if any)",
                    self.family
                ));
            }
        }
        Ok(())
    }
}

impl IncidenceConfig {
    pub fn side_value(&self) -> Result<Side, ConfigError> {
        match self.side.as_str() {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => invalid(format!("incidence.side \"{other}\" is not recognized")),
        }
    }

    pub fn theta0(&self) -> f64 {
        self.theta0_deg.to_radians()
    }

    /// Checks the side name and the angular range without needing a grid.
    pub fn build(&self) -> Result<(Side, f64), ConfigError> {
        let side = self.side_value()?;
        if !self.theta0_deg.is_finite() {
            return invalid("incidence.theta0_deg must be finite");
        }
        let theta0 = self.theta0();
        IncidenceSpec::grid_angle(side, theta0)
            .map_err(|e| ConfigError::Invalid(format!("incidence: {e}")))?;
        Ok((side, theta0))
    }
}

impl NumericsConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 8 {
            return invalid("numerics.n must be at least 8");
        }
        match self.mode.as_str() {
            "propagating" => {
                if self.n_ev.is_some() || self.lambda_over_k.is_some() {
                    return invalid(
                        "numerics.n_ev and numerics.lambda_over_k are only meaningful with mode = \"full\"",
                    );
                }
            }
            "full" => {
                let n_ev = self.n_ev.ok_or_else(|| {
                    ConfigError::Invalid("numerics.n_ev is required with mode = \"full\"".into())
                })?;
                let ratio = self.lambda_over_k.ok_or_else(|| {
                    ConfigError::Invalid("numerics.lambda_over_k is required with mode = \"full\"".into())
                })?;
                if n_ev < 4 {
                    return invalid("numerics.n_ev must be at least 4");
                }
                if !(ratio > 1.0) || !ratio.is_finite() {
                    return invalid("numerics.lambda_over_k must exceed 1");
                }
            }
            other => {
                return invalid(format!("numerics.mode \"{other}\" is not recognized"));
            }
        }
        match self.method.as_str() {
            "dyson" => {
                let order = self.dyson_order.unwrap_or(4);
                if !(1..=12).contains(&order) {
                    return invalid("numerics.dyson_order must lie in 1..=12");
                }
            }
            "ode" | "born" | "closed_form" => {
                if self.dyson_order.is_some() {
                    return invalid("numerics.dyson_order is only meaningful with method = \"dyson\"");
                }
            }
            other => {
                return invalid(format!("numerics.method \"{other}\" is not recognized"));
            }
        }
        if !(self.rtol > 1e-14 && self.rtol <= 1e-2) {
            return invalid("numerics.rtol must lie in (1e-14, 1e-2]");
        }
        if !(self.condition_threshold >= 1.0) {
            return invalid("numerics.condition_threshold must be at least 1");
        }
        if !(self.stiffness_guard > 0.0) {
            return invalid("numerics.stiffness_guard must be positive");
        }
        Ok(())
    }

    pub fn is_full(&self) -> bool {
        self.mode == "full"
    }

    pub fn method_value(&self) -> Method {
        match self.method.as_str() {
            "dyson" => Method::Dyson(self.dyson_order.unwrap_or(4)),
            "born" => Method::Born,
            "closed_form" => Method::ClosedForm,
            _ => Method::Ode,
        }
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            rtol: self.rtol,
            stiffness_guard: self.stiffness_guard,
            ..EvolveOptions::default()
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { condition_threshold: self.condition_threshold }
    }
}

impl OutputConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.formats.is_empty() {
            return invalid("output.formats must not be empty");
        }
        for f in &self.formats {
            if f != "csv" && f != "json" {
                return invalid(format!("output format \"{f}\" is not recognized (csv, json)"));
            }
        }
        if !(3..=17).contains(&self.precision) {
            return invalid("output.precision must lie in 3..=17");
        }
        Ok(())
    }

    pub fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(ConfigError::Parse)?;
        cfg.validate()?;
        Ok(cfg)
    }

    const MINIMAL: &str = r#"
        [potential]
        family = "delta_line"
        coupling = [0.5, 0.0]
        support = [-0.2, 0.2]

        [physics]
        k = 1.0
        incidence = [{ side = "left", theta0_deg = 10.0 }]

        [numerics]
        n = 16
    "#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.numerics.mode, "propagating");
        assert_eq!(cfg.numerics.method, "ode");
        assert_eq!(cfg.numerics.rtol, 1e-10);
        assert_eq!(cfg.output.precision, 12);
        assert!(cfg.output.wants("csv") && cfg.output.wants("json"));
        assert!(cfg.output.dir.is_none());
    }

    #[test]
    fn unknown_fields_fail_parsing() {
        for broken in [
            MINIMAL.replace("[physics]", "nonsense = true\n[physics]"),
            MINIMAL.replace("k = 1.0", "k = 1.0\ncolor = \"red\""),
            MINIMAL.replace("n = 16", "n = 16\nfast = true"),
        ] {
            assert!(matches!(parse(&broken), Err(ConfigError::Parse(_))), "{broken}");
        }
    }

    #[test]
    fn family_parameters_are_cross_checked() {
        // missing required parameter
        let no_beta = MINIMAL.replace("family = \"delta_line\"", "family = \"inverse_pole\"\nell = 1");
        assert!(parse(&no_beta).is_err());
        // parameter from another family
        let stray = MINIMAL.replace("coupling", "kappa = 2.0\ncoupling");
        assert!(parse(&stray).is_err());
        // well-formed
        let ok = MINIMAL.replace(
            "family = \"delta_line\"",
            "family = \"inverse_pole\"\nbeta = 0.7\nell = 1",
        );
        assert!(parse(&ok).is_ok());
    }

    #[test]
    fn full_mode_needs_its_extension_parameters() {
        let bare = MINIMAL.replace("n = 16", "n = 16\nmode = \"full\"");
        assert!(parse(&bare).is_err());
        let ok = MINIMAL.replace("n = 16", "n = 16\nmode = \"full\"\nn_ev = 4\nlambda_over_k = 2.0");
        assert!(parse(&ok).is_ok());
        // extension knobs are meaningless without the extension
        let stray = MINIMAL.replace("n = 16", "n = 16\nn_ev = 4");
        assert!(parse(&stray).is_err());
    }

    #[test]
    fn born_cannot_run_in_full_mode() {
        let cfg = MINIMAL.replace(
            "n = 16",
            "n = 16\nmode = \"full\"\nn_ev = 4\nlambda_over_k = 2.0\nmethod = \"born\"",
        );
        assert!(parse(&cfg).is_err());
    }

    #[test]
    fn angles_must_fit_their_side() {
        let bad = MINIMAL.replace("side = \"left\", theta0_deg = 10.0", "side = \"left\", theta0_deg = 95.0");
        assert!(parse(&bad).is_err());
        let right = MINIMAL.replace("side = \"left\", theta0_deg = 10.0", "side = \"right\", theta0_deg = 170.0");
        assert!(parse(&right).is_ok());
    }

    #[test]
    fn header_echo_is_directory_independent() {
        let a = parse(MINIMAL).unwrap();
        let mut b = parse(MINIMAL).unwrap();
        b.output.dir = Some("elsewhere".into());
        assert_eq!(a.header_echo(), b.header_echo());
        // and resolves defaults so the echo is self-contained
        assert!(a.header_echo().contains("rtol"));
    }
}
