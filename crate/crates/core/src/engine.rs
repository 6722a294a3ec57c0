//! Two independent evaluations of `∫ f(x - v) d(t, v) dv` on a uniform grid.
//!
//! The direct path integrates each output node with composite
//! Gauss-Legendre panels over `[-R, R]`. The FFT path samples `f` and the
//! kernel on the same spacing and forms the discrete linear convolution;
//! it only sees `f` on the sampled range, so nodes within one truncation
//! radius of either end are flagged as contaminated.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridMeta, GridSpec};
use crate::kernels::{eval_density, truncation_radius, KernelId, Time};
use crate::quadrature::{layout, GaussLegendre, QuadratureSpec, Segment};
use crate::testfn::TestFunction;

/// Tail mass left outside the sampled kernel support on the FFT path.
pub const FFT_TAIL_EPS: f64 = 1e-14;

/// Minimum number of grid steps per kernel length scale on the FFT path.
pub const STEPS_PER_SCALE: f64 = 4.0;

/// Integration layout of the direct path for one kernel and `t`.
#[derive(Debug, Clone)]
pub struct DirectLayout {
    pub radius: f64,
    split: bool,
    rule: GaussLegendre,
}

impl DirectLayout {
    pub fn new(kernel: KernelId, t: Time, quad: &QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        kernel.validate()?;
        Ok(Self {
            radius: truncation_radius(kernel, t, quad.eps_tail)?,
            split: quad.split_at_zero || kernel.has_kink(),
            rule: GaussLegendre::new(quad.nodes_per_panel),
        })
    }

    pub fn segments(&self, panels_per_side: usize) -> Vec<Segment> {
        let r = self.radius;
        if self.split {
            vec![
                Segment { a: -r, b: 0.0, panels: panels_per_side },
                Segment { a: 0.0, b: r, panels: panels_per_side },
            ]
        } else {
            vec![Segment { a: -r, b: r, panels: 2 * panels_per_side }]
        }
    }

    /// `(v, w)` pairs for output node `x`, split at the kinks of `f(x - ·)`.
    pub fn nodes_for(&self, f: &TestFunction, x: f64, panels_per_side: usize) -> Vec<(f64, f64)> {
        let r = self.radius;
        let mut bps: Vec<f64> = f
            .breakpoints(x - r, x + r)
            .into_iter()
            .map(|b| x - b)
            .filter(|&v| v > -r && v < r)
            .collect();
        bps.sort_by(f64::total_cmp);
        layout(&self.rule, &self.segments(panels_per_side), &bps)
    }
}

/// Evaluates `∫_{-R}^{R} f(x - v) d(t, v) dv` at one node.
fn direct_node(
    f: &TestFunction,
    kernel: KernelId,
    t: Time,
    lay: &DirectLayout,
    cached: Option<&[(f64, f64)]>,
    x: f64,
    panels: usize,
) -> f64 {
    match cached {
        Some(wd) => wd.iter().map(|&(v, wd)| wd * f.eval(x - v)).sum(),
        None => lay
            .nodes_for(f, x, panels)
            .into_iter()
            .map(|(v, w)| w * eval_density(kernel, t, v) * f.eval(x - v))
            .sum(),
    }
}

/// Direct-path convolution on `out_grid`.
///
/// The panel count starts at `quad.panels_per_side` and is doubled while the
/// difference between `p` and `2p` panels at a handful of probe nodes
/// exceeds `refine_tol · sup|f| · Σ|coef|`. The accepted count is then used
/// for every node, so the per-node summation order is fixed. The reported
/// error budget is `eps_tail·sup|f|·Σ|coef| + probe estimate`.
pub fn convolve_direct(
    f: &TestFunction,
    kernel: KernelId,
    t: Time,
    out_grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<GridFunction> {
    f.validate()?;
    out_grid.validate()?;
    let lay = DirectLayout::new(kernel, t, quad)?;
    let nodes = out_grid.nodes();
    let smooth_f = f.breakpoints(nodes[0] - lay.radius, nodes[nodes.len() - 1] + lay.radius).is_empty();

    let weighted = |panels: usize| -> Vec<(f64, f64)> {
        layout(&lay.rule, &lay.segments(panels), &[])
            .into_iter()
            .map(|(v, w)| (v, w * eval_density(kernel, t, v)))
            .collect()
    };

    let n = nodes.len();
    let mut probes = vec![0, n / 4, n / 2, (3 * n) / 4, n - 1];
    probes.dedup();
    let scale = f.sup_abs() * kernel.abs_mass_bound();

    let mut panels = quad.panels_per_side;
    let mut rounds = 0;
    let mut cache = smooth_f.then(|| weighted(panels));
    let estimate = loop {
        let fine_cache = smooth_f.then(|| weighted(2 * panels));
        let est = probes
            .iter()
            .map(|&i| {
                let x = nodes[i];
                let c = direct_node(f, kernel, t, &lay, cache.as_deref(), x, panels);
                let d = direct_node(f, kernel, t, &lay, fine_cache.as_deref(), x, 2 * panels);
                (c - d).abs()
            })
            .fold(0.0, f64::max);
        match quad.refine_tol {
            None => break est,
            Some(tol) if est <= tol * scale.max(f64::MIN_POSITIVE) => break est,
            Some(tol) => {
                if rounds >= quad.max_refinements {
                    return Err(Error::QuadratureNonconvergence {
                        estimate: est,
                        tolerance: tol * scale,
                        rounds,
                    });
                }
            }
        }
        rounds += 1;
        panels *= 2;
        cache = fine_cache;
    };

    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&x| direct_node(f, kernel, t, &lay, cache.as_deref(), x, panels))
        .collect();
    let mut out = GridFunction::new(out_grid.x_min, out_grid.dx(), values)?;
    out.meta = GridMeta {
        label: Some(format!("direct:{kernel}:t={t}")),
        error_budget: Some(quad.eps_tail * scale + estimate),
        contaminated: 0,
    };
    Ok(out)
}

/// Checks the FFT-path resolution rule `dx ≤ scale/4` and returns the
/// kernel half-width in nodes.
pub fn fft_half_width(kernel: KernelId, t: Time, dx: f64, n: usize) -> Result<usize> {
    kernel.validate()?;
    let scale = kernel.length_scale(t);
    if dx > scale / STEPS_PER_SCALE {
        return Err(Error::Resolution(format!(
            "dx = {dx} does not resolve {kernel} at t = {t}: need dx <= {}",
            scale / STEPS_PER_SCALE
        )));
    }
    let r = truncation_radius(kernel, t, FFT_TAIL_EPS)?;
    let span = (n - 1) as f64 * dx;
    if span <= 2.0 * r {
        return Err(Error::Resolution(format!(
            "grid span {span} must exceed twice the truncation radius {r}"
        )));
    }
    Ok((r / dx).ceil() as usize)
}

/// FFT-path convolution of sampled `f`.
///
/// Kernel samples `d(t, j·dx)`, `|j| ≤ M`, are weighted by `dx` (trapezoid
/// rule). For kernels with a derivative jump `J` at the origin the centre
/// weight carries the endpoint correction `-dx²·J/12`, which removes the
/// leading `O(dx²)` error the kink would otherwise introduce.
pub fn convolve_fft(f_samples: &GridFunction, kernel: KernelId, t: Time) -> Result<GridFunction> {
    f_samples.validate()?;
    let dx = f_samples.dx;
    let nf = f_samples.len();
    let m = fft_half_width(kernel, t, dx, nf)?;

    let nk = 2 * m + 1;
    let mut taps: Vec<f64> = (0..nk)
        .map(|j| eval_density(kernel, t, (j as f64 - m as f64) * dx) * dx)
        .collect();
    taps[m] -= dx * dx * kernel.derivative_jump_at_zero(t) / 12.0;

    let full = linear_convolution(&f_samples.values, &taps);
    let values = full[m..m + nf].to_vec();
    let mut out = GridFunction::new(f_samples.x_min, dx, values)?;
    out.meta = GridMeta {
        label: Some(format!("fft:{kernel}:t={t}")),
        error_budget: None,
        contaminated: m.min(nf / 2),
    };
    Ok(out)
}

/// Zero-padded FFT linear convolution; output length `a.len() + b.len() - 1`.
pub fn linear_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(size, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(size, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let norm = 1.0 / size as f64;
    fa.into_iter().take(out_len).map(|z| z.re * norm).collect()
}

/// Max |direct − fft| over the FFT path's uncontaminated nodes of `grid`.
pub fn path_agreement(
    f: &TestFunction,
    kernel: KernelId,
    t: Time,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let direct = convolve_direct(f, kernel, t, grid, quad)?;
    let samples = GridFunction::sample(grid, |x| f.eval(x))?;
    let fft = convolve_fft(&samples, kernel, t)?;
    let interior = fft.interior();
    if interior.is_empty() {
        return Err(Error::Resolution("no uncontaminated nodes".into()));
    }
    direct.max_abs_diff(&fft, interior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::WjVariant;
    use crate::spectral::symbol;

    fn tt(t: f64) -> Time {
        Time::new(t).unwrap()
    }

    #[test]
    fn linear_convolution_matches_naive() {
        let a = [1.0, 2.0, -1.0, 0.5];
        let b = [0.25, -3.0, 2.0];
        let got = linear_convolution(&a, &b);
        let mut want = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                want[i + j] += x * y;
            }
        }
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_is_preserved_by_unit_mass_kernels() {
        let grid = GridSpec::new(-3.0, 3.0, 25).unwrap();
        let quad = QuadratureSpec::default();
        for k in [
            KernelId::MaxwellBoltzmann,
            KernelId::PicardLaplace,
            KernelId::Exponential,
            KernelId::GaussWeierstrass,
            KernelId::PicardJackson { n: 2 },
            KernelId::WeierstrassJackson { n: 2, variant: WjVariant::Corrected },
        ] {
            let out = convolve_direct(&TestFunction::constant(5.0), k, tt(0.7), &grid, &quad).unwrap();
            for v in &out.values {
                assert!((v - 5.0).abs() < 1e-10, "{k}: {v}");
            }
        }
    }

    #[test]
    fn picard_on_cos_is_half_cos() {
        let grid = GridSpec::new(-4.0, 4.0, 33).unwrap();
        let out = convolve_direct(
            &TestFunction::cos(1.0),
            KernelId::PicardLaplace,
            tt(1.0),
            &grid,
            &QuadratureSpec::default(),
        )
        .unwrap();
        for (i, v) in out.values.iter().enumerate() {
            assert!((v - 0.5 * out.x(i).cos()).abs() < 1e-8);
        }
        assert!(out.meta.error_budget.unwrap() < 1e-10);
    }

    #[test]
    fn maxwell_boltzmann_annihilates_cos_at_unit_scale() {
        let grid = GridSpec::new(-4.0, 4.0, 33).unwrap();
        let out = convolve_direct(
            &TestFunction::cos(1.0),
            KernelId::MaxwellBoltzmann,
            tt(1.0),
            &grid,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(out.sup_abs() < 1e-8);
    }

    #[test]
    fn fft_gauss_weierstrass_on_cos() {
        let grid = GridSpec::new(-80.0, 80.0, 2561).unwrap();
        let samples = GridFunction::sample(&grid, f64::cos).unwrap();
        let out = convolve_fft(&samples, KernelId::GaussWeierstrass, tt(1.0)).unwrap();
        let r = out.interior();
        assert!(r.len() > 1000);
        let m = (-0.25f64).exp();
        assert!((m - 0.778_800_783_071_404_9).abs() < 1e-15);
        for i in r {
            assert!((out.values[i] - m * out.x(i).cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn fft_of_zero_is_zero() {
        let g = GridFunction::new(-40.0, 0.05, vec![0.0; 1601]).unwrap();
        let out = convolve_fft(&g, KernelId::PicardLaplace, tt(1.0)).unwrap();
        assert!(out.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fft_resolution_errors() {
        let g = GridFunction::new(-20.0, 0.5, vec![1.0; 81]).unwrap();
        let err = convolve_fft(&g, KernelId::PicardLaplace, tt(1.0)).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
        let narrow = GridFunction::new(-1.0, 0.01, vec![1.0; 201]).unwrap();
        let err = convolve_fft(&narrow, KernelId::PicardLaplace, tt(1.0)).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
    }

    #[test]
    fn direct_and_fft_agree_on_smooth_data() {
        let grid = GridSpec::new(-40.0, 40.0, 3201).unwrap();
        let gap = path_agreement(
            &TestFunction::cos(1.0),
            KernelId::GaussWeierstrass,
            tt(1.0),
            &grid,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(gap < 1e-6, "{gap}");
    }

    #[test]
    fn eigenfunction_ratio() {
        let grid = GridSpec::new(-3.0, 3.0, 61).unwrap();
        let quad = QuadratureSpec { eps_tail: 1e-12, ..QuadratureSpec::default() };
        let k = KernelId::Exponential;
        let t = tt(0.5);
        let a = 2.0;
        let out = convolve_direct(&TestFunction::cos(a), k, t, &grid, &quad).unwrap();
        let m = symbol(k, t, a);
        for (i, v) in out.values.iter().enumerate() {
            let c = (a * out.x(i)).cos();
            if c.abs() > 0.5 {
                assert!(((v / c) - m).abs() < 1e-6 * m.abs());
            }
        }
    }

    #[test]
    fn fixed_panels_without_refinement() {
        let grid = GridSpec::new(-1.0, 1.0, 5).unwrap();
        let quad = QuadratureSpec::default().fixed(4);
        let out = convolve_direct(&TestFunction::bump(), KernelId::GaussWeierstrass, tt(0.5), &grid, &quad)
            .unwrap();
        assert!(out.meta.error_budget.unwrap() > 0.0);
    }
}
