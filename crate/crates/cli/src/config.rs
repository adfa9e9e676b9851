use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use solispec::certificate::{CertifyOptions, LambdaGrid, Thresholds};
use solispec::ground_state::GroundStateParams;
use solispec::jost::JostOptions;
use solispec::nonlinearity::{Family, Nonlinearity, NonlinearitySpec};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub nonlinearity: NonlinearitySpec,
    pub mu: f64,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub scan: ScanConfig,
    pub control: ControlConfig,
    pub output: OutputConfig,
    /// Worker threads for parallel scans; 0 uses all cores.
    pub threads: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Half-width; `null` means `30/√μ`.
    pub r: Option<f64>,
    /// Spacing; `null` means `1e-3/√μ`.
    pub h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Ground-state ODE residual target.
    pub tol_ground: f64,
    /// Relative tolerance of the Jost integrations.
    pub tol_ode: f64,
    pub theta_cert: f64,
    pub theta_mismatch: f64,
    /// Left end of the half-line used by `invert-check`.
    pub invert_x0: f64,
    /// Right end of the residual window used by `invert-check`.
    pub invert_x1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub lmin: f64,
    pub lmax: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    pub depth: f64,
    /// Energy step of the coarse scan that brackets the embedded levels.
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub ground: String,
    pub spectrum: String,
    pub jost: String,
    pub scan: String,
    pub control: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nonlinearity: NonlinearitySpec {
                family: Family::Power,
                params: vec![1.0],
                table: None,
            },
            mu: 1.0,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            scan: ScanConfig::default(),
            control: ControlConfig::default(),
            output: OutputConfig::default(),
            threads: 0,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        let th = Thresholds::default();
        Self {
            tol_ground: GroundStateParams::new(1.0).tol,
            tol_ode: JostOptions::default().rtol,
            theta_cert: th.cert,
            theta_mismatch: th.mismatch,
            invert_x0: 1.0,
            invert_x1: 20.0,
        }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            lmin: 1.0,
            lmax: 10.0,
            n: 200,
        }
    }
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            depth: 6.0,
            step: 0.05,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            ground: "ground.csv".into(),
            spectrum: "spectrum.json".into(),
            jost: "jost.csv".into(),
            scan: "report.json".into(),
            control: "control.json".into(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| config_err(format!("malformed config {}: {e}", p.display())))
            }
        }
    }

    /// Checks the invariants shared by every subcommand and returns warnings.
    pub fn validate(&self) -> Result<Vec<String>, CliError> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(config_err(format!("mu must be positive, got {}", self.mu)));
        }
        self.nonlinearity()?;
        let r = self.r();
        let h = self.h();
        if !(r > 0.0 && h > 0.0 && h < r && r.is_finite()) {
            return Err(config_err(format!(
                "grid needs 0 < h < R, got R = {r}, h = {h}"
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tol_ground", t.tol_ground),
            ("tol_ode", t.tol_ode),
            ("theta_cert", t.theta_cert),
            ("theta_mismatch", t.theta_mismatch),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!(
                    "tolerances.{name} must be positive, got {v}"
                )));
            }
        }
        let mut warnings = vec![];
        if r * self.mu.sqrt() < 20.0 {
            warnings.push(format!(
                "R·√μ = {:.2} is below 20; far-field fits and certificates may be unreliable",
                r * self.mu.sqrt()
            ));
        }
        Ok(warnings)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, CliError> {
        Nonlinearity::from_spec(&self.nonlinearity).map_err(|e| config_err(e.to_string()))
    }

    pub fn r(&self) -> f64 {
        self.grid.r.unwrap_or(30.0 / self.mu.sqrt())
    }

    pub fn h(&self) -> f64 {
        self.grid.h.unwrap_or(1e-3 / self.mu.sqrt())
    }

    pub fn ground_params(&self) -> GroundStateParams {
        let mut p = GroundStateParams::new(self.mu).with_grid(self.r(), self.h());
        p.tol = self.tolerances.tol_ground;
        p
    }

    pub fn certify_options(&self) -> CertifyOptions {
        let mut o = CertifyOptions::default();
        o.thresholds.cert = self.tolerances.theta_cert;
        o.thresholds.mismatch = self.tolerances.theta_mismatch;
        o.jost.rtol = self.tolerances.tol_ode;
        o
    }

    pub fn jost_options(&self) -> JostOptions {
        JostOptions {
            rtol: self.tolerances.tol_ode,
            ..JostOptions::default()
        }
    }

    pub fn lambda_grid(&self) -> Result<LambdaGrid, CliError> {
        let g = LambdaGrid::new(self.scan.lmin, self.scan.lmax, self.scan.n);
        g.validate(self.mu).map_err(|e| config_err(e.to_string()))?;
        Ok(g)
    }

    /// SHA-256 of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
