//! Uniform 1-D grids and sampled functions.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equispaced nodes `x_min + i·dx`, `i = 0..n`, with `x_max` the last node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    /// Grid with the given spacing; `x_max` is rounded to a whole number of steps.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidInput(format!("dx must be > 0, got {dx}")));
        }
        let steps = ((x_max - x_min) / dx).round() as usize;
        Self::new(x_min, x_min + steps as f64 * dx, steps + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 nodes, got {}",
                self.n
            )));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::InvalidInput(format!(
                "grid range [{}, {}] is empty or not finite",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Annotations carried by a computed grid function.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub label: Option<String>,
    /// Estimated absolute error bound, when the producer can supply one.
    pub error_budget: Option<f64>,
    /// Nodes at each end whose values are affected by zero padding.
    pub contaminated: usize,
}

/// Real samples on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub x_min: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    #[serde(default)]
    pub meta: GridMeta,
}

impl GridFunction {
    pub fn new(x_min: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        let g = Self {
            x_min,
            dx,
            values,
            meta: GridMeta::default(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn sample<F: Fn(f64) -> f64>(grid: &GridSpec, f: F) -> Result<Self> {
        grid.validate()?;
        let values = (0..grid.n).map(|i| f(grid.node(i))).collect();
        Self::new(grid.x_min, grid.dx(), values)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() < 2 {
            return Err(Error::InvalidInput("grid function needs at least 2 values".into()));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::InvalidInput(format!("dx must be > 0, got {}", self.dx)));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("value at node {i} is not finite")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            x_min: self.x_min,
            x_max: self.x_max(),
            n: self.len(),
        }
    }

    /// Indices not flagged as boundary-contaminated.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let c = self.meta.contaminated.min(self.len() / 2);
        c..self.len() - c
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.meta.label = Some(label.into());
        self
    }

    /// Linear interpolation inside the range, constant continuation outside.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.len();
        let s = (x - self.x_min) / self.dx;
        if !(s > 0.0) {
            return self.values[0];
        }
        if s >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = s.floor() as usize;
        let frac = s - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise `a·self + b·other` on identical grids.
    pub fn axpby(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(GridFunction {
            x_min: self.x_min,
            dx: self.dx,
            values,
            meta: GridMeta {
                contaminated: self.meta.contaminated.max(other.meta.contaminated),
                ..GridMeta::default()
            },
        })
    }

    pub fn scale(mut self, a: f64) -> Self {
        for v in &mut self.values {
            *v *= a;
        }
        self
    }

    /// Max |self - other| over nodes `range`.
    pub fn max_abs_diff(&self, other: &GridFunction, range: std::ops::Range<usize>) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values[range.clone()]
            .iter()
            .zip(&other.values[range])
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        let same = self.len() == other.len()
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.dx
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx;
        if same {
            Ok(())
        } else {
            Err(Error::InvalidInput("grid functions live on different grids".into()))
        }
    }

    /// `x,value` table with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", fmt17(self.x(i)), fmt17(*v));
        }
        out
    }

    /// Parses an `x,value` table with strictly increasing, equispaced `x`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Csv("empty input".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["x", "value"] {
            return Err(Error::Csv(format!("expected header `x,value`, got `{header}`")));
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.map(str::trim)
                    .ok_or_else(|| Error::Csv(format!("row {}: missing column", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("row {}: {e}", lineno + 1)))
            };
            xs.push(parse(parts.next())?);
            vs.push(parse(parts.next())?);
            if parts.next().is_some() {
                return Err(Error::Csv(format!("row {}: too many columns", lineno + 1)));
            }
        }
        if xs.len() < 2 {
            return Err(Error::Csv("need at least 2 rows".into()));
        }
        let n = xs.len();
        let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        if !(dx > 0.0) {
            return Err(Error::Csv("x must be strictly increasing".into()));
        }
        for (i, w) in xs.windows(2).enumerate() {
            let step = w[1] - w[0];
            if step <= 0.0 {
                return Err(Error::Csv(format!("x not strictly increasing at row {}", i + 2)));
            }
            if (step - dx).abs() > 1e-9 * dx {
                return Err(Error::Csv(format!(
                    "x not equispaced at row {}: step {step} vs {dx}",
                    i + 2
                )));
            }
        }
        GridFunction::new(xs[0], dx, vs).map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spec_nodes() {
        let g = GridSpec::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
        assert!(GridSpec::new(1.0, 1.0, 4).is_err());
        let g = GridSpec::with_spacing(-2.0, 2.0, 0.25).unwrap();
        assert_eq!(g.n, 17);
        assert_eq!(g.dx(), 0.25);
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(GridFunction::new(0.0, 0.1, vec![1.0, f64::NAN]).is_err());
        assert!(GridFunction::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(GridFunction::new(0.0, 0.1, vec![1.0]).is_err());
    }

    #[test]
    fn interpolation_and_constant_extension() {
        let g = GridFunction::new(0.0, 1.0, vec![0.0, 2.0, 4.0]).unwrap();
        assert_eq!(g.interpolate(-5.0), 0.0);
        assert_eq!(g.interpolate(0.5), 1.0);
        assert_eq!(g.interpolate(1.75), 3.5);
        assert_eq!(g.interpolate(2.0), 4.0);
        assert_eq!(g.interpolate(10.0), 4.0);
    }

    #[test]
    fn csv_rejects_bad_tables() {
        assert!(GridFunction::from_csv("a,b\n0,1\n1,2\n").is_err());
        assert!(GridFunction::from_csv("x,value\n0,1\n").is_err());
        assert!(GridFunction::from_csv("x,value\n0,1\n1,2\n3,4\n").is_err());
        assert!(GridFunction::from_csv("x,value\n0,1\n1,x\n").is_err());
        assert!(GridFunction::from_csv("x,value\n1,1\n0,2\n").is_err());
        // spacing jitter within 1e-9 relative is accepted
        let ok = GridFunction::from_csv("x,value\n0,1\n0.5000000000001,2\n1,3\n").unwrap();
        assert_eq!(ok.len(), 3);
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let g = GridFunction::new(0.0, 0.1, vec![1.0 / 3.0, 2.0]).unwrap();
        let csv = g.to_csv();
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(row, "0.0000000000000000e0,3.3333333333333331e-1");
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(
            x0 in -100.0f64..100.0,
            dx in 1e-3f64..10.0,
            vals in proptest::collection::vec(-1e6f64..1e6, 2..50),
        ) {
            let g = GridFunction::new(x0, dx, vals).unwrap();
            let back = GridFunction::from_csv(&g.to_csv()).unwrap();
            prop_assert_eq!(&back.values, &g.values);
            prop_assert_eq!(back.x_min, g.x_min);
            prop_assert!((back.dx - g.dx).abs() <= 1e-12 * g.dx);
        }
    }
}
