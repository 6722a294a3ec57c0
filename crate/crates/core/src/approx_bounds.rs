//! Moduli of smoothness and certification of the approximation inequalities
//! `|O_t f − f| ≤ const · ω_r(f; δ(t))`.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::convolve_direct;
use crate::error::{Error, Result};
use crate::grid::{fmt17, GridSpec};
use crate::kernels::{binomial, first_abs_moment, KernelId, MomentMethod, Time, WjVariant};
use crate::operators::{jackson_combination, JacksonKind};
use crate::quadrature::QuadratureSpec;
use crate::testfn::TestFunction;

/// Relative change below which a doubling of the search grid is accepted.
pub const MODULUS_RTOL: f64 = 0.01;
/// Maximum number of sample doublings.
pub const MODULUS_ROUNDS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusQuery {
    pub f: TestFunction,
    pub r: u32,
    pub delta: f64,
    /// Base-point window; defaults to `f.search_window(r·δ)`.
    pub x_range: Option<(f64, f64)>,
    /// Initial number of base-point intervals.
    pub x_samples: usize,
    /// Initial number of step intervals on `[0, δ]`.
    pub h_samples: usize,
}

impl ModulusQuery {
    pub fn new(f: TestFunction, r: u32, delta: f64) -> Self {
        Self {
            f,
            r,
            delta,
            x_range: None,
            x_samples: 512,
            h_samples: 64,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.r < 1 {
            return Err(Error::InvalidInput("modulus order r must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!("modulus step delta must be > 0, got {}", self.delta)));
        }
        if self.x_samples < 2 || self.h_samples < 1 {
            return Err(Error::InvalidInput("modulus needs at least 2 x-samples and 1 h-sample".into()));
        }
        self.f.validate()
    }
}

/// `Δ_h^r f(x) = Σ_j (−1)^{r−j} C(r,j) f(x + jh)`.
pub fn finite_difference(f: &TestFunction, r: u32, h: f64, x: f64) -> f64 {
    (0..=r)
        .map(|j| {
            let sign = if (r - j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(r, j) * f.eval(x + j as f64 * h)
        })
        .sum()
}

fn sampled_sup(f: &TestFunction, r: u32, delta: f64, (lo, hi): (f64, f64), nx: usize, nh: usize) -> f64 {
    let steps: Vec<f64> = (1..=nh).map(|j| delta * j as f64 / nh as f64).collect();
    let dx = (hi - lo) / nx as f64;
    (0..=nx)
        .into_par_iter()
        .map(|i| {
            let x = lo + i as f64 * dx;
            steps
                .iter()
                .fold(0.0f64, |m, &h| m.max(finite_difference(f, r, h, x).abs()))
        })
        .reduce(|| 0.0, f64::max)
}

/// Sampled `ω_r(f; δ)`: a lower estimate of the true sup, refined by
/// doubling both sample counts until the value moves by less than 1%.
pub fn modulus(q: &ModulusQuery) -> Result<f64> {
    q.validate()?;
    let window = q.x_range.unwrap_or_else(|| q.f.search_window(q.r as f64 * q.delta));
    let (mut nx, mut nh) = (q.x_samples, q.h_samples);
    let mut prev = sampled_sup(&q.f, q.r, q.delta, window, nx, nh);
    let mut change = f64::INFINITY;
    for _ in 0..MODULUS_ROUNDS {
        nx *= 2;
        nh *= 2;
        let next = sampled_sup(&q.f, q.r, q.delta, window, nx, nh);
        change = (next - prev).abs();
        if change <= MODULUS_RTOL * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::ModulusNonconvergence {
        rounds: MODULUS_ROUNDS,
        change,
    })
}

fn omega(f: &TestFunction, r: u32, delta: f64) -> Result<f64> {
    modulus(&ModulusQuery::new(f.clone(), r, delta))
}

/// The approximation inequalities that can be certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "kebab-case")]
pub enum BoundId {
    /// `2ω₁(f; φ(t))` with the closed-form first absolute moment `φ`.
    General { kernel: KernelId },
    /// `4ω₁(f; t)`.
    MaxwellBoltzmann,
    /// `C·ω₂(f; t)` for the Picard operator; ratio only.
    PicardOmega2,
    /// `2ω₁(f; 1/t)`.
    Exponential,
    /// `Σ_{k=1}^{n+1} k!·C(n+1,k)·ω_{n+1}(f; t)`.
    PicardJackson { n: u32 },
    /// `C_n·ω_{n+1}(f; √t)`; ratio only.
    WeierstrassJackson { n: u32, variant: WjVariant },
}

impl BoundId {
    pub fn kernel(&self) -> KernelId {
        match *self {
            BoundId::General { kernel } => kernel,
            BoundId::MaxwellBoltzmann => KernelId::MaxwellBoltzmann,
            BoundId::PicardOmega2 => KernelId::PicardLaplace,
            BoundId::Exponential => KernelId::Exponential,
            BoundId::PicardJackson { n } => KernelId::PicardJackson { n },
            BoundId::WeierstrassJackson { n, variant } => KernelId::WeierstrassJackson { n, variant },
        }
    }

    /// Bound with an explicit constant; the others report a ratio.
    pub fn is_constant_free(&self) -> bool {
        !matches!(self, BoundId::PicardOmega2 | BoundId::WeierstrassJackson { .. })
    }

    pub fn slug(&self) -> String {
        match self {
            BoundId::General { kernel } => format!("general-{}", kernel.slug()),
            BoundId::MaxwellBoltzmann => "mb".into(),
            BoundId::PicardOmega2 => "picard-omega2".into(),
            BoundId::Exponential => "exponential".into(),
            BoundId::PicardJackson { n } => format!("picard-jackson-n{n}"),
            BoundId::WeierstrassJackson { n, variant } => match variant {
                WjVariant::AsStated => format!("weierstrass-jackson-n{n}"),
                WjVariant::Corrected => format!("weierstrass-jackson-n{n}-corrected"),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel().validate()?;
        if let BoundId::General { kernel } = self {
            if kernel.is_jackson() {
                return Err(Error::UnsupportedAnalytic(format!(
                    "no closed-form first moment for {kernel}"
                )));
            }
        }
        Ok(())
    }

    /// `(r, δ)` of the modulus on the right-hand side.
    pub fn modulus_args(&self, t: Time) -> Result<(u32, f64)> {
        let tv = t.get();
        Ok(match *self {
            BoundId::General { kernel } => (1, first_abs_moment(kernel, t, MomentMethod::Analytic)?),
            BoundId::MaxwellBoltzmann => (1, tv),
            BoundId::PicardOmega2 => (2, tv),
            BoundId::Exponential => (1, 1.0 / tv),
            BoundId::PicardJackson { n } => (n + 1, tv),
            BoundId::WeierstrassJackson { n, .. } => (n + 1, tv.sqrt()),
        })
    }

    /// Multiplier of the modulus, when the constant is explicit.
    pub fn constant(&self) -> Option<f64> {
        match *self {
            BoundId::General { .. } | BoundId::Exponential => Some(2.0),
            BoundId::MaxwellBoltzmann => Some(4.0),
            BoundId::PicardJackson { n } => Some(picard_jackson_constant(n)),
            BoundId::PicardOmega2 | BoundId::WeierstrassJackson { .. } => None,
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.slug())
    }
}

/// `Σ_{k=1}^{n+1} k!·C(n+1,k)`.
pub fn picard_jackson_constant(n: u32) -> f64 {
    (1..=n + 1)
        .map(|k| (1..=k).map(f64::from).product::<f64>() * binomial(n + 1, k))
        .sum()
}

/// Right-hand side of a bound: `(value, modulus)`; `value` is `None` when
/// the constant is unspecified.
pub fn bound_rhs(which: BoundId, f: &TestFunction, t: Time) -> Result<(Option<f64>, f64)> {
    let (r, delta) = which.modulus_args(t)?;
    let w = omega(f, r, delta)?;
    Ok((which.constant().map(|c| c * w), w))
}

/// Sampling grid for sup-norm deviations: one period for periodic inputs,
/// the descriptor window widened by 4 units otherwise.
pub fn sup_grid(f: &TestFunction) -> GridSpec {
    const NODES: usize = 801;
    let (lo, hi) = match f.period() {
        Some(p) => (0.0, p),
        None => {
            let (lo, hi) = f.search_window(0.0);
            (lo - 4.0, hi + 4.0)
        }
    };
    GridSpec::new(lo, hi, NODES).expect("sup grid is valid")
}

/// `O_t f` on `grid` by the direct path; Jackson kernels via their combination.
pub fn operator_values(
    kernel: KernelId,
    t: Time,
    f: &TestFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let out = match kernel {
        KernelId::PicardJackson { n } => {
            jackson_combination(JacksonKind::Picard, n, t, f, grid, quad)?.total
        }
        KernelId::WeierstrassJackson { n, variant } => {
            jackson_combination(JacksonKind::Weierstrass(variant), n, t, f, grid, quad)?.total
        }
        k => convolve_direct(f, k, t, grid, quad)?,
    };
    Ok(out.values)
}

/// `max_node |O_t f − target_mass · f|` on [`sup_grid`].
pub fn sup_deviation(
    kernel: KernelId,
    t: Time,
    f: &TestFunction,
    quad: &QuadratureSpec,
    target_mass: f64,
) -> Result<f64> {
    let grid = sup_grid(f);
    let out = operator_values(kernel, t, f, &grid, quad)?;
    Ok(grid
        .nodes()
        .iter()
        .zip(&out)
        .fold(0.0f64, |m, (&x, v)| m.max((v - target_mass * f.eval(x)).abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub bound: String,
    pub f: String,
    pub t: f64,
    pub lhs: f64,
    /// Full right-hand side for constant-free bounds, the bare modulus otherwise.
    pub rhs: f64,
    pub ratio: f64,
    /// `None` for ratio-only bounds.
    pub pass: Option<bool>,
}

/// Evaluates `lhs = sup |O_t f − f|` and the bound at each `t`.
pub fn certify_bound(
    which: BoundId,
    f: &TestFunction,
    ts: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<BoundRow>> {
    which.validate()?;
    f.validate()?;
    ts.iter()
        .map(|&tv| {
            let t = Time::new(tv)?;
            let lhs = sup_deviation(which.kernel(), t, f, quad, 1.0)?;
            let (value, w) = bound_rhs(which, f, t)?;
            let rhs = value.unwrap_or(w);
            let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
            Ok(BoundRow {
                bound: which.slug(),
                f: f.slug().to_string(),
                t: tv,
                lhs,
                rhs,
                ratio,
                pass: value.map(|b| lhs <= b),
            })
        })
        .collect()
}

/// `bound,f,t,lhs,rhs,ratio,pass` with `n/a` for ratio-only rows.
pub fn bounds_to_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from("bound,f,t,lhs,rhs,ratio,pass\n");
    for r in rows {
        let pass = match r.pass {
            Some(p) => p.to_string(),
            None => "n/a".into(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.bound,
            r.f,
            fmt17(r.t),
            fmt17(r.lhs),
            fmt17(r.rhs),
            fmt17(r.ratio),
            pass
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_modulus_of_continuity() {
        // 2 sin(0.25), mpmath
        let w = modulus(&ModulusQuery::new(TestFunction::sin(1.0), 1, 0.5)).unwrap();
        assert!((w - 0.49480791850904586).abs() < 1e-4, "{w}");
    }

    #[test]
    fn cos_full_oscillation() {
        let w = modulus(&ModulusQuery::new(TestFunction::cos(1.0), 1, 2.0 * std::f64::consts::PI))
            .unwrap();
        assert!((w - 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_has_zero_moduli() {
        for r in 1..4 {
            assert_eq!(omega(&TestFunction::constant(3.0), r, 0.7).unwrap(), 0.0);
        }
    }

    #[test]
    fn second_difference_of_cos() {
        // sup |Δ_h² cos| = 4 sin²(h/2), largest at h = δ
        let d: f64 = 0.3;
        let w = omega(&TestFunction::cos(1.0), 2, d).unwrap();
        let exact = 4.0 * (d / 2.0).sin().powi(2);
        assert!((w - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(modulus(&ModulusQuery::new(TestFunction::cos(1.0), 0, 1.0)).is_err());
        assert!(matches!(
            modulus(&ModulusQuery::new(TestFunction::cos(1.0), 1, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn picard_jackson_constants() {
        assert_eq!(picard_jackson_constant(1), 2.0 + 2.0);
        assert_eq!(picard_jackson_constant(2), 3.0 + 6.0 + 6.0);
    }

    #[test]
    fn general_bound_needs_closed_form_moment() {
        let b = BoundId::General { kernel: KernelId::PicardJackson { n: 1 } };
        assert!(b.validate().is_err());
    }

    #[test]
    fn mb_bound_on_sin() {
        let rows = certify_bound(
            BoundId::MaxwellBoltzmann,
            &TestFunction::sin(1.0),
            &[0.5],
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(rows[0].pass, Some(true));
        assert!(rows[0].lhs > 0.0 && rows[0].lhs <= rows[0].rhs);
        let csv = bounds_to_csv(&rows);
        assert!(csv.starts_with("bound,f,t,lhs,rhs,ratio,pass\nmb,sin,5.0000000000000000e-1,"));
        assert!(csv.trim_end().ends_with(",true"));
    }
}
