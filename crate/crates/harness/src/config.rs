//! JSON experiment configuration. Functions are referenced by registered
//! names; nothing is parsed as an expression.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use relaxbl_core::models::{JinXinModel, ScalarFn};
use relaxbl_core::schemes::{AMode, SchemeKind, SwitchRule};

use crate::error::{HarnessError, Result};
use crate::examples::{example, Example, ProblemDef, ReferenceKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Upwind,
    Bap,
}

impl From<SchemeName> for SchemeKind {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Upwind => SchemeKind::Upwind,
            SchemeName::Bap => SchemeKind::Bap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AModeName {
    Derivative,
    Sign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchRuleName {
    Auto,
    SmoothEta,
    HardTauEps,
}

/// A Jin-Xin problem assembled from registered functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomJinXin {
    pub flux: String,
    pub domain: [f64; 2],
    pub epsilon: f64,
    #[serde(default = "one")]
    pub bu: f64,
    #[serde(default = "one")]
    pub bv: f64,
    #[serde(default = "zero_name")]
    pub bc_data: String,
    pub init_u: String,
    /// Defaults to `f(init_u)`.
    #[serde(default)]
    pub init_v: Option<String>,
}

fn one() -> f64 {
    1.0
}

fn zero_name() -> String {
    "zero".into()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub example: Option<String>,
    #[serde(default)]
    pub custom: Option<CustomJinXin>,
    #[serde(default)]
    pub scheme: Option<SchemeName>,
    #[serde(default)]
    pub nx: Option<Vec<usize>>,
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub p: Option<u32>,
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub reference: Option<ReferenceKind>,
    #[serde(default)]
    pub h_fine: Option<f64>,
    #[serde(default)]
    pub a_mode: Option<AModeName>,
    #[serde(default)]
    pub switch_rule: Option<SwitchRuleName>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            HarnessError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Merges the example defaults and checks the invariants.
    pub fn resolve(&self) -> Result<Resolved> {
        let mut ex = match (&self.example, &self.custom) {
            (Some(_), Some(_)) => return Err(HarnessError::Config("give either `example` or `custom`, not both".into())),
            (Some(id), None) => example(id, self.epsilon).map_err(|e| match e {
                HarnessError::Usage(m) => HarnessError::Config(m),
                other => other,
            })?,
            (None, Some(c)) => custom_example(c)?,
            (None, None) => return Err(HarnessError::Config("missing `example` (or `custom` problem)".into())),
        };
        if let Some(nx) = &self.nx {
            ex.nx = nx.clone();
        }
        if let Some(c) = self.cfl {
            ex.cfl = c;
        }
        if let Some(p) = self.p {
            ex.p = p;
        }
        if let Some(t) = self.t_final {
            ex.t_final = t;
        }
        if self.tau.is_some() {
            ex.tau = self.tau;
        }
        if self.h_fine.is_some() {
            ex.h_fine = self.h_fine;
        }
        if let Some(r) = self.reference {
            ex.reference = r;
        }
        if ex.nx.is_empty() {
            return Err(HarnessError::Config("nx: at least one resolution is required".into()));
        }
        if let Some(&bad) = ex.nx.iter().find(|&&n| n < 8) {
            return Err(HarnessError::Config(format!("nx: every resolution must be >= 8, got {bad}")));
        }
        if !(ex.t_final > 0.0) || !ex.t_final.is_finite() {
            return Err(HarnessError::Config(format!("t_final: must be positive, got {}", ex.t_final)));
        }
        if !(ex.cfl > 0.0 && ex.cfl <= 1.0) {
            return Err(HarnessError::Config(format!("cfl: must lie in (0, 1], got {}", ex.cfl)));
        }
        if ex.p < 2 {
            return Err(HarnessError::Config(format!("p: must be >= 2, got {}", ex.p)));
        }
        if let Some(t) = ex.tau {
            if !(t > 0.0) {
                return Err(HarnessError::Config(format!("tau: must be positive, got {t}")));
            }
        }
        if self.output_times.iter().any(|&t| !(t > 0.0 && t <= ex.t_final)) {
            return Err(HarnessError::Config("output_times: each time must lie in (0, t_final]".into()));
        }
        let mut scheme_config = ex.scheme_config();
        if let Some(a) = self.a_mode {
            scheme_config.a_mode = match a {
                AModeName::Derivative => AMode::Derivative,
                AModeName::Sign => AMode::Sign,
            };
        }
        if let Some(s) = self.switch_rule {
            scheme_config.switch_rule = match s {
                SwitchRuleName::Auto => SwitchRule::Auto,
                SwitchRuleName::SmoothEta => SwitchRule::SmoothEta,
                SwitchRuleName::HardTauEps => SwitchRule::HardTauEps,
            };
        }
        Ok(Resolved {
            scheme: self.scheme.unwrap_or(SchemeName::Bap).into(),
            scheme_config,
            output_times: self.output_times.clone(),
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            example: ex,
        })
    }
}

/// A configuration with every default filled in.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub example: Example,
    pub scheme: SchemeKind,
    pub scheme_config: relaxbl_core::schemes::SchemeConfig,
    pub output_times: Vec<f64>,
    pub out_dir: PathBuf,
}

/// Names usable in `custom` problems.
pub const FUNCTION_NAMES: [&str; 9] = [
    "zero",
    "sin",
    "neg_sin",
    "two_sin",
    "sin_pi",
    "sin_pi_cubed",
    "sin_2t",
    "example2_flux",
    "linear_flux:<a>",
];

pub fn named_function(name: &str) -> Result<ScalarFn> {
    use std::f64::consts::PI;
    let f: ScalarFn = match name {
        "zero" => Arc::new(|_| 0.0),
        "sin" => Arc::new(f64::sin),
        "neg_sin" => Arc::new(|x: f64| -x.sin()),
        "two_sin" => Arc::new(|x: f64| 2.0 * x.sin()),
        "sin_pi" => Arc::new(|x: f64| (PI * x).sin()),
        "sin_pi_cubed" => Arc::new(|x: f64| (PI * x).sin().powi(3)),
        "sin_2t" => Arc::new(|t: f64| (2.0 * t).sin()),
        other => return Err(HarnessError::Config(format!("unknown function name '{other}'"))),
    };
    Ok(f)
}

fn named_flux(name: &str) -> Result<(ScalarFn, ScalarFn)> {
    if name == "example2_flux" {
        return Ok((
            Arc::new(|u: f64| ((-u).exp() - 1.0) / 4.0),
            Arc::new(|u: f64| -(-u).exp() / 4.0),
        ));
    }
    if let Some(a) = name.strip_prefix("linear_flux:") {
        let a: f64 = a
            .parse()
            .map_err(|_| HarnessError::Config(format!("flux '{name}': slope is not a number")))?;
        return Ok((Arc::new(move |u| a * u), Arc::new(move |_| a)));
    }
    Err(HarnessError::Config(format!("unknown flux name '{name}'")))
}

fn custom_example(c: &CustomJinXin) -> Result<Example> {
    if !(c.domain[1] > c.domain[0]) {
        return Err(HarnessError::Config("custom.domain: right end must exceed left end".into()));
    }
    if !(c.epsilon > 0.0) {
        return Err(HarnessError::Config("custom.epsilon: must be positive".into()));
    }
    let (f, df) = named_flux(&c.flux)?;
    let init_u = named_function(&c.init_u)?;
    let init_v: ScalarFn = match &c.init_v {
        Some(n) => named_function(n)?,
        None => {
            let (f, u) = (f.clone(), init_u.clone());
            Arc::new(move |x| f(u(x)))
        }
    };
    let model = JinXinModel::new(f, df, c.epsilon)
        .with_boundary(c.bu, c.bv, named_function(&c.bc_data)?)
        .with_initial(init_u, init_v);
    model.validate()?;
    Ok(Example {
        id: "custom".into(),
        title: "custom Jin-Xin problem",
        summary: "",
        problem: ProblemDef::JinXin(model),
        domain: (c.domain[0], c.domain[1]),
        nx: vec![100],
        t_final: 0.5,
        cfl: 0.8,
        p: 2,
        tau: None,
        reference: ReferenceKind::AsymptoticLimit,
        h_fine: None,
        component_names: vec!["u".into(), "v".into()],
        closed_form: None,
    })
}
