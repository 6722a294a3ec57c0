//! Density kernels `d(t, x)` and their scalar characteristics.
//!
//! Four families are genuine probability densities (Maxwell-Boltzmann,
//! Laplace/Picard, exponential, Gauss-Weierstrass). The two Jackson-type
//! families are alternating binomial combinations of scaled Laplace or
//! Gaussian kernels; they are signed, and their total mass is the value of
//! the operator symbol at zero frequency.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_refined, QuadratureSpec};

/// Strictly positive scale/time parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Time(f64);

impl Time {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_finite() && t > 0.0 {
            Ok(Self(t))
        } else {
            Err(Error::Domain(format!("t must be finite and > 0, got {t}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `t ↦ c·t` for a positive factor.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        Self::new(self.0 * factor)
    }

    pub fn recip(self) -> Result<Self> {
        Self::new(1.0 / self.0)
    }
}

impl TryFrom<f64> for Time {
    type Error = Error;
    fn try_from(t: f64) -> Result<Self> {
        Self::new(t)
    }
}

impl From<Time> for f64 {
    fn from(t: Time) -> f64 {
        t.0
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which of the two printed Weierstrass-Jackson kernels to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WjVariant {
    /// `Σ (-1)^{k+1} C(n+1,k) (1/k) e^{-u²/(kt)} / √(πt)`.
    #[default]
    AsStated,
    /// `Σ (-1)^{k+1} C(n+1,k) (1/k) e^{-u²/(k²t)} / √(πt)`, the kernel of the
    /// difference form `-(1/√(πt)) ∫ Σ (-1)^k C(n+1,k) f(x+kv) e^{-v²/t} dv`.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelId {
    MaxwellBoltzmann,
    PicardLaplace,
    Exponential,
    GaussWeierstrass,
    PicardJackson { n: u32 },
    WeierstrassJackson { n: u32, variant: WjVariant },
}

/// One scaled base kernel inside a Jackson combination.
///
/// The Jackson kernel equals `Σ coef · weight · base(scale · t, ·)`, where
/// `base` is a unit-mass Laplace or Gauss-Weierstrass kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub k: u32,
    /// `(-1)^{k+1} C(n+1, k)`.
    pub coef: f64,
    pub weight: f64,
    pub base: KernelId,
    pub scale: f64,
}

impl KernelId {
    pub fn picard_jackson(n: u32) -> Result<Self> {
        let k = KernelId::PicardJackson { n };
        k.validate()?;
        Ok(k)
    }

    pub fn weierstrass_jackson(n: u32, variant: WjVariant) -> Result<Self> {
        let k = KernelId::WeierstrassJackson { n, variant };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelId::PicardJackson { n } | KernelId::WeierstrassJackson { n, .. } if n < 1 => {
                Err(Error::InvalidInput(format!(
                    "Jackson order n must be >= 1, got {n}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Short kebab-case name used in tables and file names.
    pub fn slug(&self) -> String {
        match *self {
            KernelId::MaxwellBoltzmann => "maxwell-boltzmann".into(),
            KernelId::PicardLaplace => "picard".into(),
            KernelId::Exponential => "exponential".into(),
            KernelId::GaussWeierstrass => "gauss-weierstrass".into(),
            KernelId::PicardJackson { n } => format!("picard-jackson-n{n}"),
            KernelId::WeierstrassJackson { n, variant } => match variant {
                WjVariant::AsStated => format!("weierstrass-jackson-n{n}"),
                WjVariant::Corrected => format!("weierstrass-jackson-n{n}-corrected"),
            },
        }
    }

    /// True for the four nonnegative, unit-mass densities.
    pub fn is_density(&self) -> bool {
        !self.is_jackson()
    }

    pub fn is_jackson(&self) -> bool {
        matches!(
            self,
            KernelId::PicardJackson { .. } | KernelId::WeierstrassJackson { .. }
        )
    }

    /// Kernels with a derivative jump at `x = 0`.
    pub fn has_kink(&self) -> bool {
        matches!(
            self,
            KernelId::PicardLaplace | KernelId::Exponential | KernelId::PicardJackson { .. }
        )
    }

    /// Jackson components; a single unit component for the plain families.
    pub fn components(&self) -> Vec<Component> {
        match *self {
            KernelId::PicardJackson { n } => (1..=n + 1)
                .map(|k| Component {
                    k,
                    coef: jackson_coef(n, k),
                    weight: 1.0,
                    base: KernelId::PicardLaplace,
                    scale: k as f64,
                })
                .collect(),
            KernelId::WeierstrassJackson { n, variant } => (1..=n + 1)
                .map(|k| {
                    let kf = k as f64;
                    let (weight, scale) = match variant {
                        WjVariant::AsStated => (1.0 / kf.sqrt(), kf),
                        WjVariant::Corrected => (1.0, kf * kf),
                    };
                    Component {
                        k,
                        coef: jackson_coef(n, k),
                        weight,
                        base: KernelId::GaussWeierstrass,
                        scale,
                    }
                })
                .collect(),
            base => vec![Component {
                k: 1,
                coef: 1.0,
                weight: 1.0,
                base,
                scale: 1.0,
            }],
        }
    }

    /// Total signed mass `s₀ = ∫ d(t, x) dx` (independent of t).
    pub fn total_mass(&self) -> f64 {
        match self {
            KernelId::WeierstrassJackson {
                variant: WjVariant::AsStated,
                ..
            } => self.components().iter().map(|c| c.coef * c.weight).sum(),
            _ => 1.0,
        }
    }

    /// `∫ |d(t, x)| dx` upper bound: `Σ |coef|·weight`.
    pub fn abs_mass_bound(&self) -> f64 {
        self.components()
            .iter()
            .map(|c| c.coef.abs() * c.weight)
            .sum()
    }

    /// Characteristic width used by grid resolution rules.
    pub fn length_scale(&self, t: Time) -> f64 {
        let t = t.get();
        match self {
            KernelId::MaxwellBoltzmann | KernelId::PicardLaplace | KernelId::PicardJackson { .. } => t,
            KernelId::Exponential => 1.0 / t,
            KernelId::GaussWeierstrass | KernelId::WeierstrassJackson { .. } => (0.5 * t).sqrt(),
        }
    }

    /// `d'(0⁻) - d'(0⁺)`; zero for kernels smooth at the origin.
    pub fn derivative_jump_at_zero(&self, t: Time) -> f64 {
        let t = t.get();
        match *self {
            // d = e^{-|x|/s}/(2s): d'(0∓) = ±1/(2s²)
            KernelId::PicardLaplace => 1.0 / (t * t),
            KernelId::Exponential => t * t,
            KernelId::PicardJackson { n } => (1..=n + 1)
                .map(|k| {
                    let s = k as f64 * t;
                    jackson_coef(n, k) / (s * s)
                })
                .sum(),
            _ => 0.0,
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.slug())
    }
}

/// Binomial coefficient as an exact f64 for the small arguments used here.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// `(-1)^{k+1} C(n+1, k)`.
pub fn jackson_coef(n: u32, k: u32) -> f64 {
    let c = binomial(n + 1, k);
    if k % 2 == 1 {
        c
    } else {
        -c
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `d(t, x)` for every family, written out term by term.
pub fn eval_density(kernel: KernelId, t: Time, x: f64) -> f64 {
    let t = t.get();
    match kernel {
        KernelId::MaxwellBoltzmann => {
            INV_SQRT_2PI * x * x * (-x * x / (2.0 * t * t)).exp() / (t * t * t)
        }
        KernelId::PicardLaplace => (-x.abs() / t).exp() / (2.0 * t),
        KernelId::Exponential => t * (-t * x.abs()).exp() / 2.0,
        KernelId::GaussWeierstrass => (-x * x / t).exp() / (PI * t).sqrt(),
        KernelId::PicardJackson { n } => (1..=n + 1)
            .map(|k| {
                let kf = k as f64;
                jackson_coef(n, k) * (1.0 / kf) * (-x.abs() / (kf * t)).exp() / (2.0 * t)
            })
            .sum(),
        KernelId::WeierstrassJackson { n, variant } => (1..=n + 1)
            .map(|k| {
                let kf = k as f64;
                let spread = match variant {
                    WjVariant::AsStated => kf * t,
                    WjVariant::Corrected => kf * kf * t,
                };
                jackson_coef(n, k) * (1.0 / kf) * (-x * x / spread).exp() / (PI * t).sqrt()
            })
            .sum(),
    }
}

/// Upper bound on `∫_{|x|>r} |d(t, x)| dx`, in closed form per family.
pub fn tail_mass(kernel: KernelId, t: Time, r: f64) -> f64 {
    let r = r.max(0.0);
    match kernel {
        KernelId::MaxwellBoltzmann => {
            // two-sided tail of x²φ(x/t)/t³: erfc(z/√2) + √(2/π) z e^{-z²/2}
            let z = r / t.get();
            libm::erfc(z / SQRT_2) + (2.0 / PI).sqrt() * z * (-0.5 * z * z).exp()
        }
        KernelId::PicardLaplace => (-r / t.get()).exp(),
        KernelId::Exponential => (-r * t.get()).exp(),
        KernelId::GaussWeierstrass => libm::erfc(r / t.get().sqrt()),
        KernelId::PicardJackson { .. } | KernelId::WeierstrassJackson { .. } => kernel
            .components()
            .iter()
            .map(|c| {
                let st = Time(t.get() * c.scale);
                c.coef.abs() * c.weight * tail_mass(c.base, st, r)
            })
            .sum(),
    }
}

/// Smallest doubling of a closed-form radius `R` with `tail_mass < eps`.
///
/// Closed-form starting points, with `M = Σ|coef|·weight` and `s` the widest
/// component scale:
/// - Laplace-type (`e^{-|x|/s}/(2s)`): `R = s·ln(2M/eps)`, so the tail is `eps/2`.
/// - Gaussian-type (`e^{-x²/s}/√(πs)`): `R = √(s·ln(2M/eps))`, from `erfc(z) ≤ e^{-z²}`.
/// - Maxwell-Boltzmann: `R = 1.5·t·√(ln(2/eps))`.
pub fn truncation_radius(kernel: KernelId, t: Time, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {eps}")));
    }
    kernel.validate()?;
    let log_term = |m: f64| (2.0 * m / eps).ln().max(LN_2);
    let m = kernel.abs_mass_bound();
    let max_scale = kernel
        .components()
        .iter()
        .map(|c| c.scale)
        .fold(0.0_f64, f64::max)
        * t.get();
    let mut r = match kernel {
        KernelId::MaxwellBoltzmann => 1.5 * t.get() * log_term(1.0).sqrt(),
        KernelId::PicardLaplace | KernelId::PicardJackson { .. } => max_scale * log_term(m),
        KernelId::Exponential => log_term(1.0) / t.get(),
        KernelId::GaussWeierstrass | KernelId::WeierstrassJackson { .. } => {
            (max_scale * log_term(m)).sqrt()
        }
    };
    while tail_mass(kernel, t, r) >= eps {
        r *= 2.0;
    }
    Ok(r)
}

/// `|∫ d(t, x) dx - s₀|` by truncated panel quadrature.
pub fn normalization_deficit(kernel: KernelId, t: Time, quad: &QuadratureSpec) -> Result<f64> {
    kernel.validate()?;
    let r = truncation_radius(kernel, t, quad.eps_tail)?;
    let (mass, _, _) = integrate_refined(
        |v| eval_density(kernel, t, v),
        -r,
        r,
        &[0.0],
        &[],
        quad,
        kernel.abs_mass_bound(),
    )?;
    Ok((mass - kernel.total_mass()).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    Analytic,
    Quadrature,
}

/// First absolute moment `φ(t) = ∫ |v| d(t, v) dv`.
///
/// For the signed Jackson kernels only the quadrature method is offered and
/// the result is the signed moment `∫ |v| d(t, v) dv`.
pub fn first_abs_moment(kernel: KernelId, t: Time, method: MomentMethod) -> Result<f64> {
    kernel.validate()?;
    match method {
        MomentMethod::Analytic => {
            let tv = t.get();
            match kernel {
                KernelId::MaxwellBoltzmann => Ok(2.0 * SQRT_2 / PI.sqrt() * tv),
                KernelId::PicardLaplace => Ok(tv),
                KernelId::Exponential => Ok(1.0 / tv),
                KernelId::GaussWeierstrass => Ok((tv / PI).sqrt()),
                other => Err(Error::UnsupportedAnalytic(other.slug())),
            }
        }
        MomentMethod::Quadrature => {
            let quad = QuadratureSpec {
                eps_tail: 1e-15,
                ..QuadratureSpec::default()
            };
            // |v| d(t,v) has a heavier tail than d; widen the window accordingly.
            let r = 2.0 * truncation_radius(kernel, t, quad.eps_tail)?;
            let scale = kernel.abs_mass_bound() * kernel.length_scale(t).max(r / 40.0);
            let (m, _, _) = integrate_refined(
                |v| v.abs() * eval_density(kernel, t, v),
                -r,
                r,
                &[0.0],
                &[],
                &quad,
                scale,
            )?;
            Ok(m)
        }
    }
}
