//! Model definition files.
//!
//! A config is a JSON document with nested sections; complex numbers are
//! always `[re, im]` pairs and matrices are lists of rows.

use std::fmt;

use qfluct::chainstate::{gibbs_single_site, ProductState};
use qfluct::fluct::ObservableSet;
use qfluct::harness::{MicroPath, Model};
use qfluct::lindblad::{CouplingProfile, DissipatorForm, LindbladSpec};
use qfluct::opcore::SiteOperator;
use qfluct::{CMat, C64};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

/// Square complex matrix, row-major, entries as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Matrix(pub Vec<Vec<[f64; 2]>>);

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let n = rows.len();
        if n == 0 {
            return Err(D::Error::custom("matrix has no rows"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(D::Error::custom(format!(
                    "row {i} has {} entries, expected {n} for a {n}×{n} matrix",
                    row.len()
                )));
            }
        }
        Ok(Matrix(rows))
    }
}

impl Matrix {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_cmat(&self) -> CMat {
        let n = self.dim();
        CMat::from_fn(n, n, |i, j| C64::new(self.0[i][j][0], self.0[i][j][1]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Gibbs { h_site: Matrix, beta: f64 },
    Custom { rho: Matrix },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormConfig {
    Standard,
    DoubleCommutator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingConfig {
    Onsite { lambda: f64 },
    Geometric { lambda: f64, q: f64 },
    /// `J(0), J(1), …`; negative offsets are conjugates.
    Custom { values: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipatorConfig {
    pub form: FormConfig,
    pub kraus: Vec<Matrix>,
    pub d: Matrix,
    pub coupling: CouplingConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathConfig {
    #[default]
    Auto,
    Factorized,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub times: Vec<f64>,
    /// Empty means the default list for the micro path.
    pub n_list: Vec<usize>,
    pub r: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub tol: f64,
    pub seed: u64,
    pub path: PathConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            times: vec![0.5, 1.0, 2.0],
            n_list: Vec::new(),
            r: None,
            a: None,
            b: None,
            tol: 1e-2,
            seed: 0,
            path: PathConfig::Auto,
        }
    }
}

impl From<PathConfig> for MicroPath {
    fn from(p: PathConfig) -> Self {
        match p {
            PathConfig::Auto => MicroPath::Auto,
            PathConfig::Factorized => MicroPath::Factorized,
            PathConfig::Dense => MicroPath::Dense,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub site_dim: usize,
    pub chi: Vec<Matrix>,
    pub state: StateConfig,
    pub hamiltonian: Matrix,
    pub dissipator: DissipatorConfig,
    #[serde(default)]
    pub run: RunConfig,
}

/// Load failure with the offending field and, when known, its position.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        write!(f, "field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// First line mentioning the top-level key of `field`.
fn locate(text: &str, field: &str) -> Option<usize> {
    let key = field.split(['.', '[']).next()?;
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

impl ModelConfig {
    /// Parse and validate; the model is built once to surface every
    /// dimension and physics check at load time.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ModelConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let (line, column) = (inner.line(), inner.column());
            let msg = inner.to_string();
            let suffix = format!(" at line {line} column {column}");
            ConfigError {
                line: Some(line),
                column: Some(column),
                field: path,
                message: msg.strip_suffix(&suffix).unwrap_or(&msg).to_string(),
            }
        })?;
        cfg.to_model().map_err(|mut e| {
            e.line = locate(text, &e.field);
            e
        })?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            column: None,
            field: "<file>".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn to_model(&self) -> Result<Model, ConfigError> {
        let err = |field: &str, message: String| ConfigError {
            line: None,
            column: None,
            field: field.to_string(),
            message,
        };
        let p = self.site_dim;
        if p == 0 {
            return Err(err("site_dim", "must be at least 1".into()));
        }
        let op = |field: &str, m: &Matrix| -> Result<SiteOperator, ConfigError> {
            if m.dim() != p {
                return Err(err(field, format!("expected {p}×{p}, got {0}×{0}", m.dim())));
            }
            SiteOperator::new(m.to_cmat()).map_err(|e| err(field, e.to_string()))
        };

        let state = match &self.state {
            StateConfig::Gibbs { h_site, beta } => {
                let h = op("state.gibbs.h_site", h_site)?;
                gibbs_single_site(&h, *beta).map_err(|e| err("state.gibbs", e.to_string()))?
            }
            StateConfig::Custom { rho } => ProductState::new(op("state.custom.rho", rho)?)
                .map_err(|e| err("state.custom.rho", e.to_string()))?,
        };
        if self.chi.is_empty() {
            return Err(err("chi", "at least one observable is required".into()));
        }
        let chi_ops = self
            .chi
            .iter()
            .enumerate()
            .map(|(i, m)| op(&format!("chi[{i}]"), m))
            .collect::<Result<Vec<_>, _>>()?;
        let chi = ObservableSet::bind(chi_ops, &state).map_err(|e| err("chi", e.to_string()))?;

        let h = op("hamiltonian", &self.hamiltonian)?;
        let dis = &self.dissipator;
        let kraus = dis
            .kraus
            .iter()
            .enumerate()
            .map(|(i, m)| op(&format!("dissipator.kraus[{i}]"), m))
            .collect::<Result<Vec<_>, _>>()?;
        if dis.d.dim() != kraus.len() {
            return Err(err(
                "dissipator.d",
                format!("expected {0}×{0} to match the Kraus list, got {1}×{1}", kraus.len(), dis.d.dim()),
            ));
        }
        let coupling = match &dis.coupling {
            CouplingConfig::Onsite { lambda } => CouplingProfile::Onsite { lambda: *lambda },
            CouplingConfig::Geometric { lambda, q } => CouplingProfile::Geometric {
                lambda: *lambda,
                q: *q,
            },
            CouplingConfig::Custom { values } => CouplingProfile::Custom {
                values: values.iter().map(|v| C64::new(v[0], v[1])).collect(),
            },
        };
        let form = match dis.form {
            FormConfig::Standard => DissipatorForm::Standard,
            FormConfig::DoubleCommutator => DissipatorForm::DoubleCommutator,
        };
        let spec = LindbladSpec::new(h, kraus, dis.d.to_cmat(), coupling, form)
            .map_err(|e| err("dissipator", e.to_string()))?;
        let model = Model::new(self.name.clone(), spec, state, chi)
            .map_err(|e| err("site_dim", e.to_string()))?;

        let d = model.dim();
        for (name, v) in [("run.r", &self.run.r), ("run.a", &self.run.a), ("run.b", &self.run.b)] {
            if let Some(v) = v {
                if v.len() != d {
                    return Err(err(name, format!("expected {d} components, got {}", v.len())));
                }
            }
        }
        Ok(model)
    }
}
