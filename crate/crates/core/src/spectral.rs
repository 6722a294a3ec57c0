//! Operator symbols `m(ξ, t)` and the Fourier-side form of each PDE.
//!
//! Fourier transform convention: `F g(ξ) = (2π)^{-1/2} ∫ g(x) e^{-iξx} dx`,
//! inverse with `e^{+iξx}` and the same constant. With it, convolution by
//! `d(t, ·)` multiplies `f̂` by `m(ξ, t) = √(2π)·F⁻¹(d(t, ·))(ξ)`, so that
//! `m(0, t)` is the total mass of the kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernels::{eval_density, truncation_radius, Component, KernelId, Time, WjVariant};

/// Symbol of a single unit-mass base kernel at scale `s`.
fn base_symbol(base: KernelId, s: f64, xi: f64) -> f64 {
    let x2 = xi * xi;
    match base {
        KernelId::MaxwellBoltzmann => {
            let q = s * s * x2;
            (-0.5 * q).exp() * (1.0 - q)
        }
        KernelId::PicardLaplace => 1.0 / (1.0 + s * s * x2),
        KernelId::Exponential => s * s / (s * s + x2),
        KernelId::GaussWeierstrass => (-s * x2 / 4.0).exp(),
        _ => unreachable!("Jackson kernels are not base kernels"),
    }
}

/// `∂/∂s` of [`base_symbol`].
fn base_symbol_ds(base: KernelId, s: f64, xi: f64) -> f64 {
    let x2 = xi * xi;
    match base {
        KernelId::MaxwellBoltzmann => {
            let q = s * s * x2;
            s * x2 * (q - 3.0) * (-0.5 * q).exp()
        }
        KernelId::PicardLaplace => {
            let den = 1.0 + s * s * x2;
            -2.0 * s * x2 / (den * den)
        }
        KernelId::Exponential => {
            let den = s * s + x2;
            2.0 * s * x2 / (den * den)
        }
        KernelId::GaussWeierstrass => -(x2 / 4.0) * (-s * x2 / 4.0).exp(),
        _ => unreachable!("Jackson kernels are not base kernels"),
    }
}

/// Symbol of one Jackson component, `weight · m_base(scale·t, ξ)`.
pub fn component_symbol(c: &Component, t: Time, xi: f64) -> f64 {
    c.weight * base_symbol(c.base, c.scale * t.get(), xi)
}

/// `∂/∂t` of [`component_symbol`].
pub fn component_symbol_dt(c: &Component, t: Time, xi: f64) -> f64 {
    c.weight * c.scale * base_symbol_ds(c.base, c.scale * t.get(), xi)
}

/// `m(ξ, t)` in closed form.
pub fn symbol(kernel: KernelId, t: Time, xi: f64) -> f64 {
    kernel
        .components()
        .iter()
        .map(|c| c.coef * component_symbol(c, t, xi))
        .sum()
}

/// `∂m/∂t` from the hand-differentiated closed forms.
pub fn symbol_dt(kernel: KernelId, t: Time, xi: f64) -> f64 {
    kernel
        .components()
        .iter()
        .map(|c| c.coef * component_symbol_dt(c, t, xi))
        .sum()
}

/// Fourier-side residual of the PDE satisfied by component `c` of `kernel`.
///
/// Each relation is the transform of the PDE with `∂²/∂x² ↦ -ξ²`:
/// - Maxwell-Boltzmann: `m_t - t²ξ² m_t + 3tξ² m - t³ξ⁴ m`
/// - Picard (scale `s = k t`): `m_t (1 + s²ξ²) + 2 k s ξ² m`
/// - exponential: `m_t (1 + ξ²/t²) - (2ξ²/t³) m`
/// - Gauss-Weierstrass (scale `s = λ t`): `m_t + (λ/4) ξ² m`
pub fn component_pde_residual(kernel: KernelId, c: &Component, t: Time, xi: f64) -> f64 {
    let tv = t.get();
    let x2 = xi * xi;
    let m = component_symbol(c, t, xi);
    let mt = component_symbol_dt(c, t, xi);
    let r = match c.base {
        KernelId::MaxwellBoltzmann => {
            mt + tv * tv * (-x2 * mt) - 3.0 * tv * (-x2 * m) - tv * tv * tv * (x2 * x2 * m)
        }
        KernelId::PicardLaplace => {
            let k2 = c.scale * c.scale;
            mt * (1.0 + k2 * tv * tv * x2) + 2.0 * k2 * tv * x2 * m
        }
        KernelId::Exponential => mt * (1.0 + x2 / (tv * tv)) - (2.0 * x2 / (tv * tv * tv)) * m,
        KernelId::GaussWeierstrass => mt + (c.scale / 4.0) * x2 * m,
        _ => unreachable!("{kernel}: components are base kernels"),
    };
    r.abs()
}

/// Largest component residual of the Fourier-side PDE relation.
pub fn symbol_pde_residual(kernel: KernelId, t: Time, xi: f64) -> f64 {
    kernel
        .components()
        .iter()
        .map(|c| component_pde_residual(kernel, c, t, xi))
        .fold(0.0, f64::max)
}

/// Sampling of `[-L, L)` used by [`discrete_symbol_mismatch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolGrid {
    pub half_width: f64,
    pub points: usize,
}

/// Compares a DFT estimate of `∫ d(t, x) e^{-iξx} dx` with `m(ξ, t)`.
///
/// The kernel is sampled at `x_j = -L + j·dx`, `dx = 2L/N`, and the estimate
/// at `ξ_k = 2πk/(N dx)` is `dx·(-1)^k·DFT_k`. The returned value is the
/// largest modulus of the difference over `|ξ| ≤ ξ_Nyquist/4`.
pub fn discrete_symbol_mismatch(kernel: KernelId, t: Time, grid: SymbolGrid) -> Result<f64> {
    kernel.validate()?;
    let SymbolGrid { half_width: l, points: n } = grid;
    if n < 64 {
        return Err(Error::Resolution(format!("need at least 64 points, got {n}")));
    }
    let r = truncation_radius(kernel, t, 1e-12)?;
    if l < r {
        return Err(Error::Resolution(format!(
            "half-width {l} is below the truncation radius {r}"
        )));
    }
    let dx = 2.0 * l / n as f64;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(eval_density(kernel, t, -l + j as f64 * dx), 0.0))
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);

    let kmax = n / 8;
    let mut worst: f64 = 0.0;
    for k in -(kmax as i64)..=(kmax as i64) {
        let idx = k.rem_euclid(n as i64) as usize;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let est = buf[idx] * (dx * sign);
        let xi = 2.0 * PI * k as f64 / (n as f64 * dx);
        let diff = (est - Complex64::new(symbol(kernel, t, xi), 0.0)).norm();
        worst = worst.max(diff);
    }
    Ok(worst)
}

/// Weierstrass-Jackson symbol of the difference form,
/// `Σ (-1)^{k+1} C(n+1,k) e^{-k²tξ²/4}`.
pub fn weierstrass_difference_symbol(n: u32, t: Time, xi: f64) -> f64 {
    symbol(
        KernelId::WeierstrassJackson {
            n,
            variant: WjVariant::Corrected,
        },
        t,
        xi,
    )
}
