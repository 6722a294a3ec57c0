//! Bounded, uniformly continuous input functions `f`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Cos { a: f64 },
    Sin { a: f64 },
    /// `exp(-((x - center)/width)²)`.
    GaussianBump { center: f64, width: f64 },
    /// `|sin(a·x)|`.
    AbsSin { a: f64 },
    /// `max(0, 1 - |x - center|/half_width)`.
    Hat { center: f64, half_width: f64 },
    Constant { c: f64 },
    /// Linear interpolation of samples, constant beyond the sampled range.
    Samples { grid: GridFunction },
    /// `Σ coef_i · f_i`.
    Combination { terms: Vec<(f64, TestFunction)> },
}

impl TestFunction {
    pub fn cos(a: f64) -> Self {
        TestFunction::Cos { a }
    }

    pub fn sin(a: f64) -> Self {
        TestFunction::Sin { a }
    }

    pub fn bump() -> Self {
        TestFunction::GaussianBump {
            center: 0.0,
            width: 1.0,
        }
    }

    pub fn abs_sin() -> Self {
        TestFunction::AbsSin { a: 1.0 }
    }

    pub fn hat() -> Self {
        TestFunction::Hat {
            center: 0.0,
            half_width: 1.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        TestFunction::Constant { c }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} must be finite")))
            }
        };
        match self {
            TestFunction::Cos { a } | TestFunction::Sin { a } => finite(*a, "frequency"),
            TestFunction::AbsSin { a } => {
                finite(*a, "frequency")?;
                if *a == 0.0 {
                    return Err(Error::InvalidInput("abs-sin frequency must be nonzero".into()));
                }
                Ok(())
            }
            TestFunction::GaussianBump { center, width } => {
                finite(*center, "center")?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidInput("bump width must be > 0".into()));
                }
                Ok(())
            }
            TestFunction::Hat { center, half_width } => {
                finite(*center, "center")?;
                if !(*half_width > 0.0 && half_width.is_finite()) {
                    return Err(Error::InvalidInput("hat half-width must be > 0".into()));
                }
                Ok(())
            }
            TestFunction::Constant { c } => finite(*c, "constant"),
            TestFunction::Samples { grid } => grid.validate(),
            TestFunction::Combination { terms } => {
                for (c, f) in terms {
                    finite(*c, "coefficient")?;
                    f.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Cos { a } => (a * x).cos(),
            TestFunction::Sin { a } => (a * x).sin(),
            TestFunction::GaussianBump { center, width } => {
                let z = (x - center) / width;
                (-z * z).exp()
            }
            TestFunction::AbsSin { a } => (a * x).sin().abs(),
            TestFunction::Hat { center, half_width } => {
                (1.0 - (x - center).abs() / half_width).max(0.0)
            }
            TestFunction::Constant { c } => *c,
            TestFunction::Samples { grid } => grid.interpolate(x),
            TestFunction::Combination { terms } => {
                terms.iter().map(|(c, f)| c * f.eval(x)).sum()
            }
        }
    }

    /// `sup |f|` (exact for the analytic descriptors).
    pub fn sup_abs(&self) -> f64 {
        match self {
            TestFunction::Cos { a } | TestFunction::Sin { a } => {
                if *a == 0.0 {
                    self.eval(0.0).abs()
                } else {
                    1.0
                }
            }
            TestFunction::GaussianBump { .. }
            | TestFunction::AbsSin { .. }
            | TestFunction::Hat { .. } => 1.0,
            TestFunction::Constant { c } => c.abs(),
            TestFunction::Samples { grid } => grid.sup_abs(),
            TestFunction::Combination { terms } => {
                terms.iter().map(|(c, f)| c.abs() * f.sup_abs()).sum()
            }
        }
    }

    /// Sorted points in `[lo, hi]` where `f` is not differentiable.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.push_breakpoints(lo, hi, &mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn push_breakpoints(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        match self {
            TestFunction::AbsSin { a } => {
                let step = PI / a.abs();
                let first = (lo / step).ceil() as i64;
                let last = (hi / step).floor() as i64;
                out.extend((first..=last).map(|j| j as f64 * step));
            }
            TestFunction::Hat { center, half_width } => {
                out.extend(
                    [center - half_width, *center, center + half_width]
                        .into_iter()
                        .filter(|&b| b >= lo && b <= hi),
                );
            }
            TestFunction::Samples { grid } => {
                let first = ((lo - grid.x_min) / grid.dx).ceil().max(0.0) as usize;
                let last = ((hi - grid.x_min) / grid.dx).floor();
                if last >= 0.0 {
                    let last = (last as usize).min(grid.len() - 1);
                    out.extend((first..=last).map(|i| grid.x(i)));
                }
            }
            TestFunction::Combination { terms } => {
                for (_, f) in terms {
                    f.push_breakpoints(lo, hi, out);
                }
            }
            _ => {}
        }
    }

    /// Largest |f(x) - f(y)| over the line.
    pub fn oscillation(&self) -> f64 {
        match self {
            TestFunction::Cos { a } | TestFunction::Sin { a } if *a != 0.0 => 2.0,
            TestFunction::Cos { .. } | TestFunction::Sin { .. } => 0.0,
            TestFunction::GaussianBump { .. }
            | TestFunction::AbsSin { .. }
            | TestFunction::Hat { .. } => 1.0,
            TestFunction::Constant { .. } => 0.0,
            TestFunction::Samples { grid } => {
                let max = grid.values.iter().copied().fold(f64::MIN, f64::max);
                let min = grid.values.iter().copied().fold(f64::MAX, f64::min);
                max - min
            }
            TestFunction::Combination { .. } => 2.0 * self.sup_abs(),
        }
    }

    /// Period of `f`, when it has one.
    pub fn period(&self) -> Option<f64> {
        match self {
            TestFunction::Cos { a } | TestFunction::Sin { a } if *a != 0.0 => {
                Some(2.0 * PI / a.abs())
            }
            TestFunction::AbsSin { a } => Some(PI / a.abs()),
            _ => None,
        }
    }

    /// Window of base points `x` that captures `sup_x |Δ_h^r f(x)|` for
    /// `0 ≤ h ≤ reach`.
    ///
    /// Periodic descriptors use one period; the bump uses ±6 widths (the
    /// function is below e^{-36} outside); the hat and sampled data use
    /// their support, widened by `reach` on the left.
    pub fn search_window(&self, reach: f64) -> (f64, f64) {
        if let Some(p) = self.period() {
            return (0.0, p);
        }
        match self {
            TestFunction::GaussianBump { center, width } => {
                (center - 6.0 * width - reach, center + 6.0 * width)
            }
            TestFunction::Hat { center, half_width } => {
                (center - half_width - reach, center + half_width)
            }
            TestFunction::Samples { grid } => (grid.x_min - reach, grid.x_max()),
            TestFunction::Combination { terms } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (_, f) in terms {
                    let (a, b) = f.search_window(reach);
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                if lo.is_finite() {
                    (lo, hi)
                } else {
                    (0.0, 1.0)
                }
            }
            _ => (0.0, 1.0),
        }
    }

    /// Kebab-case descriptor name.
    pub fn slug(&self) -> &'static str {
        match self {
            TestFunction::Cos { .. } => "cos",
            TestFunction::Sin { .. } => "sin",
            TestFunction::GaussianBump { .. } => "bump",
            TestFunction::AbsSin { .. } => "abs-sin",
            TestFunction::Hat { .. } => "hat",
            TestFunction::Constant { .. } => "constant",
            TestFunction::Samples { .. } => "csv",
            TestFunction::Combination { .. } => "combination",
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}
