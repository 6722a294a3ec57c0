use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use pdconv::{GridFunction, GridSpec, KernelId, QuadratureSpec, TestFunction, Time, WjVariant};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Rejected configuration; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("invalid value for {field}: {reason}")]
pub struct UsageError {
    pub field: &'static str,
    pub reason: String,
}

pub fn usage(field: &'static str, reason: impl Into<String>) -> anyhow::Error {
    UsageError {
        field,
        reason: reason.into(),
    }
    .into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Density,
    Moment,
    Symbol,
    Convolve,
    Identity,
    PdeCheck,
    Bounds,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Density => "density",
            CommandKind::Moment => "moment",
            CommandKind::Symbol => "symbol",
            CommandKind::Convolve => "convolve",
            CommandKind::Identity => "identity",
            CommandKind::PdeCheck => "pde-check",
            CommandKind::Bounds => "bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    #[value(alias = "mb")]
    MaxwellBoltzmann,
    #[value(alias = "picard-laplace")]
    Picard,
    Exponential,
    #[value(alias = "weierstrass", alias = "gw")]
    GaussWeierstrass,
    PicardJackson,
    WeierstrassJackson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    AsStated,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FName {
    Cos,
    Sin,
    Bump,
    AbsSin,
    Hat,
    Constant,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Duality,
    Semigroup,
    PicardCombination,
    WeierstrassCombination,
    WeierstrassDifferenceForm,
    Order,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    General,
    Mb,
    PicardOmega2,
    Exponential,
    PicardJackson,
    WeierstrassJackson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathName {
    Direct,
    Fft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Manufactured,
    Operator,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Every option is optional so that a `--config` file can supply it; flags
/// given on the command line win.
#[derive(Debug, Clone, Default, Parser, Serialize, Deserialize)]
#[command(name = "pdconv", version, about = "Verify convolution operators built from probability densities")]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    /// What to run.
    #[arg(value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,

    /// JSON file with any of the options below (kebab-case keys).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelName>,
    /// Jackson order.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Comma-separated t values.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    /// Second time for the semigroup check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Single evaluation point for `density`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Single frequency for `symbol`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<FName>,
    /// Frequency of cos/sin/abs-sin.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    /// Bump width or hat half-width.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Value of the constant function.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// `x,value` samples for `--f csv`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,

    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_tail: Option<f64>,
    /// Quadrature panels per side.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panels: Option<usize>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,

    /// Refinement levels for the order study.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<Check>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub which: Option<Which>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathName>,
    /// Jackson component k for `pde-check`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<u32>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,

    /// Directory for `<command>-<kernel>-<timestamp>` files instead of stdout.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Treat expected discrepancies as failures.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub strict: bool,
}

impl Options {
    /// Overlays these options on the `--config` file, if any.
    pub fn resolve(self) -> anyhow::Result<Options> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut base: Value = serde_json::from_str(&text)
            .map_err(|e| usage("--config", format!("{}: {e}", path.display())))?;
        let Value::Object(ref mut map) = base else {
            return Err(usage("--config", "expected a JSON object"));
        };
        if let Value::Object(flags) = serde_json::to_value(&self)? {
            map.extend(flags);
        }
        let mut merged: Options =
            serde_json::from_value(base).map_err(|e| usage("--config", e.to_string()))?;
        merged.config = Some(path);
        Ok(merged)
    }

    pub fn command(&self) -> anyhow::Result<CommandKind> {
        self.command
            .ok_or_else(|| usage("command", "missing; pass one positionally or in --config"))
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn kernel(&self) -> anyhow::Result<KernelId> {
        let name = self.kernel.ok_or_else(|| usage("--kernel", "required for this command"))?;
        self.kernel_from(name)
    }

    pub fn kernel_from(&self, name: KernelName) -> anyhow::Result<KernelId> {
        let n = || -> anyhow::Result<u32> {
            let n = self.n.unwrap_or(1);
            if n < 1 {
                return Err(usage("--n", "Jackson order must be >= 1"));
            }
            Ok(n)
        };
        Ok(match name {
            KernelName::MaxwellBoltzmann => KernelId::MaxwellBoltzmann,
            KernelName::Picard => KernelId::PicardLaplace,
            KernelName::Exponential => KernelId::Exponential,
            KernelName::GaussWeierstrass => KernelId::GaussWeierstrass,
            KernelName::PicardJackson => KernelId::PicardJackson { n: n()? },
            KernelName::WeierstrassJackson => KernelId::WeierstrassJackson {
                n: n()?,
                variant: self.wj_variant(),
            },
        })
    }

    pub fn wj_variant(&self) -> WjVariant {
        match self.variant {
            Some(Variant::Corrected) => WjVariant::Corrected,
            _ => WjVariant::AsStated,
        }
    }

    pub fn time(&self) -> anyhow::Result<Time> {
        let t = self.t.ok_or_else(|| usage("--t", "required for this command"))?;
        Time::new(t).map_err(|e| usage("--t", e.to_string()))
    }

    /// `--t-list`, falling back to `--t`, then to `default`.
    pub fn times(&self, default: &[f64]) -> anyhow::Result<Vec<f64>> {
        let ts = match (&self.t_list, self.t) {
            (Some(list), _) => list.clone(),
            (None, Some(t)) => vec![t],
            (None, None) => default.to_vec(),
        };
        if ts.is_empty() {
            return Err(usage("--t-list", "empty"));
        }
        for &t in &ts {
            Time::new(t).map_err(|e| usage("--t-list", e.to_string()))?;
        }
        Ok(ts)
    }

    pub fn quad(&self) -> anyhow::Result<QuadratureSpec> {
        let d = QuadratureSpec::default();
        let q = QuadratureSpec {
            eps_tail: self.eps_tail.unwrap_or(d.eps_tail),
            panels_per_side: self.panels.unwrap_or(d.panels_per_side),
            nodes_per_panel: self.nodes.unwrap_or(d.nodes_per_panel),
            ..d
        };
        q.validate().map_err(|e| usage("--eps-tail/--panels/--nodes", e.to_string()))?;
        Ok(q)
    }

    pub fn grid(&self, default: (f64, f64, usize)) -> anyhow::Result<GridSpec> {
        let g = GridSpec::new(
            self.x_min.unwrap_or(default.0),
            self.x_max.unwrap_or(default.1),
            self.points.unwrap_or(default.2),
        )
        .map_err(|e| usage("--x-min/--x-max/--points", e.to_string()))?;
        Ok(g)
    }

    pub fn grid_given(&self) -> bool {
        self.x_min.is_some() || self.x_max.is_some() || self.points.is_some()
    }

    pub fn test_function(&self) -> anyhow::Result<TestFunction> {
        let name = self.f.ok_or_else(|| usage("--f", "required for this command"))?;
        let a = self.a.unwrap_or(1.0);
        let center = self.center.unwrap_or(0.0);
        let f = match name {
            FName::Cos => TestFunction::cos(a),
            FName::Sin => TestFunction::sin(a),
            FName::AbsSin => TestFunction::AbsSin { a },
            FName::Bump => TestFunction::GaussianBump {
                center,
                width: self.width.unwrap_or(1.0),
            },
            FName::Hat => TestFunction::Hat {
                center,
                half_width: self.width.unwrap_or(1.0),
            },
            FName::Constant => TestFunction::constant(self.c.unwrap_or(1.0)),
            FName::Csv => {
                let path = self.csv.as_deref().ok_or_else(|| usage("--csv", "required with --f csv"))?;
                TestFunction::Samples {
                    grid: read_samples(path)?,
                }
            }
        };
        f.validate().map_err(|e| usage("--f", e.to_string()))?;
        Ok(f)
    }

    pub fn levels(&self) -> anyhow::Result<usize> {
        let levels = self.levels.unwrap_or(3);
        if levels < 2 {
            bail!(usage("--levels", "need at least 2 refinement levels"));
        }
        Ok(levels)
    }
}

fn read_samples(path: &Path) -> anyhow::Result<GridFunction> {
    GridFunction::read_csv(path).map_err(|e| usage("--csv", format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"command":"bounds","which":"mb","f":"sin","t":0.5,"t-list":[0.1]}"#).unwrap();
        let opts = Options::parse_from(["pdconv", "--config", path.to_str().unwrap(), "--t", "0.25"])
            .resolve()
            .unwrap();
        assert_eq!(opts.command, Some(CommandKind::Bounds));
        assert_eq!(opts.which, Some(Which::Mb));
        assert_eq!(opts.t, Some(0.25));
        assert_eq!(opts.t_list, Some(vec![0.1]));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"command":"density","kernal":"picard"}"#).unwrap();
        let err = Options::parse_from(["pdconv", "--config", path.to_str().unwrap()])
            .resolve()
            .unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn kernel_aliases() {
        let opts = Options::parse_from(["pdconv", "density", "--kernel", "mb"]);
        assert_eq!(opts.kernel().unwrap(), KernelId::MaxwellBoltzmann);
        let opts = Options::parse_from(["pdconv", "density", "--kernel", "weierstrass-jackson", "--n", "2", "--variant", "corrected"]);
        assert_eq!(
            opts.kernel().unwrap(),
            KernelId::WeierstrassJackson { n: 2, variant: WjVariant::Corrected }
        );
    }

    #[test]
    fn nonpositive_time_is_a_usage_error() {
        let opts = Options::parse_from(["pdconv", "density", "--t", "-1"]);
        let err = opts.time().unwrap_err();
        assert_eq!(err.downcast_ref::<UsageError>().unwrap().field, "--t");
    }
}
