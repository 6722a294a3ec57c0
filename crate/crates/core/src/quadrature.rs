//! Fixed-order composite Gauss-Legendre panel quadrature.
//!
//! Every integral in the crate is evaluated over a finite set of segments
//! (typically `[-R, 0]` and `[0, R]`), each cut into uniform panels. Panels
//! that contain a breakpoint of the integrand are split there, so that the
//! rule never straddles a kink.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings for truncated improper integrals over the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Kernel mass allowed outside the truncation window.
    pub eps_tail: f64,
    /// Uniform panels on each side of the origin.
    pub panels_per_side: usize,
    /// Gauss-Legendre order of each panel.
    pub nodes_per_panel: usize,
    /// Force a segment boundary at `v = 0` even for smooth kernels.
    pub split_at_zero: bool,
    /// Relative target for the panel-doubling estimate; `None` disables
    /// refinement and uses `panels_per_side` as given.
    pub refine_tol: Option<f64>,
    /// Maximum number of panel doublings before giving up.
    pub max_refinements: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            eps_tail: 1e-13,
            panels_per_side: 32,
            nodes_per_panel: 16,
            split_at_zero: false,
            refine_tol: Some(1e-12),
            max_refinements: 6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_tail > 0.0 && self.eps_tail < 1.0) {
            return Err(Error::InvalidInput(format!(
                "eps_tail must lie in (0, 1), got {}",
                self.eps_tail
            )));
        }
        if self.panels_per_side < 4 {
            return Err(Error::InvalidInput(format!(
                "panels_per_side must be at least 4, got {}",
                self.panels_per_side
            )));
        }
        if !(4..=64).contains(&self.nodes_per_panel) {
            return Err(Error::InvalidInput(format!(
                "nodes_per_panel must lie in [4, 64], got {}",
                self.nodes_per_panel
            )));
        }
        if let Some(tol) = self.refine_tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "refine_tol must be positive, got {tol}"
                )));
            }
        }
        Ok(())
    }

    /// Same spec with a fixed panel count and no refinement.
    pub fn fixed(self, panels_per_side: usize) -> Self {
        Self {
            panels_per_side,
            refine_tol: None,
            ..self
        }
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n`, seeded by the Tricomi estimate.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Pushes the mapped nodes and weights of `[a, b]` onto `out`.
    pub fn push_mapped(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            out.push((mid + half * x, half * w));
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// A segment `[a, b]` divided into `panels` uniform panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub panels: usize,
}

/// Flattens segments into `(node, weight)` pairs. `breakpoints` must be
/// sorted; panels containing one are split at it.
pub fn layout(rule: &GaussLegendre, segments: &[Segment], breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let total_panels: usize = segments.iter().map(|s| s.panels).sum();
    let mut out = Vec::with_capacity((total_panels + breakpoints.len()) * rule.order());
    for seg in segments {
        let width = (seg.b - seg.a) / seg.panels as f64;
        for p in 0..seg.panels {
            let lo = seg.a + p as f64 * width;
            let hi = if p + 1 == seg.panels {
                seg.b
            } else {
                seg.a + (p + 1) as f64 * width
            };
            let start = breakpoints.partition_point(|&b| b <= lo);
            let end = breakpoints.partition_point(|&b| b < hi);
            let mut left = lo;
            for &bp in &breakpoints[start..end] {
                if bp > left {
                    rule.push_mapped(left, bp, &mut out);
                    left = bp;
                }
            }
            rule.push_mapped(left, hi, &mut out);
        }
    }
    out
}

/// Composite rule applied to `g` over the layout.
pub fn composite<F: Fn(f64) -> f64>(
    g: F,
    rule: &GaussLegendre,
    segments: &[Segment],
    breakpoints: &[f64],
) -> f64 {
    layout(rule, segments, breakpoints)
        .into_iter()
        .map(|(v, w)| w * g(v))
        .sum()
}

/// Panel-doubling integration: returns `(value, estimate, panels)` where
/// `estimate = |Q(p) - Q(2p)|` at the accepted panel count `p`.
///
/// `split` lists the interior segment boundaries of `[lo, hi]`; each of the
/// resulting segments receives `spec.panels_per_side` panels.
pub fn integrate_refined<F: Fn(f64) -> f64>(
    g: F,
    lo: f64,
    hi: f64,
    split: &[f64],
    breakpoints: &[f64],
    spec: &QuadratureSpec,
    scale: f64,
) -> Result<(f64, f64, usize)> {
    spec.validate()?;
    let rule = GaussLegendre::new(spec.nodes_per_panel);
    let segments_for = |panels: usize| -> Vec<Segment> {
        let mut cuts = vec![lo];
        cuts.extend(split.iter().copied().filter(|&c| c > lo && c < hi));
        cuts.push(hi);
        cuts.windows(2)
            .map(|w| Segment {
                a: w[0],
                b: w[1],
                panels,
            })
            .collect()
    };
    let mut panels = spec.panels_per_side;
    let mut coarse = composite(&g, &rule, &segments_for(panels), breakpoints);
    let mut rounds = 0;
    loop {
        let fine = composite(&g, &rule, &segments_for(2 * panels), breakpoints);
        let estimate = (fine - coarse).abs();
        match spec.refine_tol {
            None => return Ok((coarse, estimate, panels)),
            Some(tol) => {
                let target = tol * scale.max(f64::MIN_POSITIVE);
                if estimate <= target {
                    return Ok((coarse, estimate, panels));
                }
                if rounds >= spec.max_refinements {
                    return Err(Error::QuadratureNonconvergence {
                        estimate,
                        tolerance: target,
                        rounds,
                    });
                }
            }
        }
        rounds += 1;
        panels *= 2;
        coarse = fine;
    }
}
