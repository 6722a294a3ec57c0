//! The named operators `S_t, P_t, E_t, W_t, P_{n,t}, W_{n,t}` and the
//! structural identities among them.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{convolve_direct, convolve_fft};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridMeta, GridSpec};
use crate::kernels::{binomial, jackson_coef, truncation_radius, KernelId, Time, WjVariant};
use crate::quadrature::{integrate_refined, QuadratureSpec};
use crate::testfn::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPath {
    #[default]
    Direct,
    Fft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorRequest {
    pub kernel: KernelId,
    pub t: Time,
    pub f: TestFunction,
    pub grid: GridSpec,
    pub quad: QuadratureSpec,
    pub path: EvalPath,
}

impl OperatorRequest {
    pub fn direct(kernel: KernelId, t: Time, f: TestFunction, grid: GridSpec) -> Self {
        Self {
            kernel,
            t,
            f,
            grid,
            quad: QuadratureSpec::default(),
            path: EvalPath::Direct,
        }
    }
}

/// `O_t(f)` on the requested grid.
pub fn apply(req: &OperatorRequest) -> Result<GridFunction> {
    match req.path {
        EvalPath::Direct => convolve_direct(&req.f, req.kernel, req.t, &req.grid, &req.quad),
        EvalPath::Fft => {
            req.f.validate()?;
            let samples = GridFunction::sample(&req.grid, |x| req.f.eval(x))?;
            convolve_fft(&samples, req.kernel, req.t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacksonKind {
    Picard,
    Weierstrass(WjVariant),
}

impl JacksonKind {
    pub fn kernel(self, n: u32) -> KernelId {
        match self {
            JacksonKind::Picard => KernelId::PicardJackson { n },
            JacksonKind::Weierstrass(variant) => KernelId::WeierstrassJackson { n, variant },
        }
    }
}

/// `Σ (-1)^{k+1} C(n+1,k) u_k` together with every `u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacksonCombination {
    pub total: GridFunction,
    /// `components[k-1] = u_k`.
    pub components: Vec<GridFunction>,
}

/// Component `u_k` of a Jackson combination: `P_{kt}(f)` for Picard,
/// `(1/√k) W_{kt}(f)` for Weierstrass as stated, `W_{k²t}(f)` for the
/// difference-form variant.
pub fn jackson_component(
    kind: JacksonKind,
    k: u32,
    t: Time,
    f: &TestFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<GridFunction> {
    let kf = k as f64;
    let (base, scale, weight) = match kind {
        JacksonKind::Picard => (KernelId::PicardLaplace, kf, 1.0),
        JacksonKind::Weierstrass(WjVariant::AsStated) => (KernelId::GaussWeierstrass, kf, 1.0 / kf.sqrt()),
        JacksonKind::Weierstrass(WjVariant::Corrected) => (KernelId::GaussWeierstrass, kf * kf, 1.0),
    };
    let u = convolve_direct(f, base, t.scaled(scale)?, grid, quad)?;
    Ok(if weight == 1.0 { u } else { u.scale(weight) })
}

pub fn jackson_combination(
    kind: JacksonKind,
    n: u32,
    t: Time,
    f: &TestFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<JacksonCombination> {
    kind.kernel(n).validate()?;
    let components = (1..=n + 1)
        .map(|k| jackson_component(kind, k, t, f, grid, quad))
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; grid.n];
    for (k, u) in (1..=n + 1).zip(&components) {
        let c = jackson_coef(n, k);
        for (acc, v) in values.iter_mut().zip(&u.values) {
            *acc += c * v;
        }
    }
    let total = GridFunction::new(grid.x_min, grid.dx(), values)?
        .with_label(format!("combination:{}", kind.kernel(n)));
    Ok(JacksonCombination { total, components })
}

/// The difference form
/// `-(1/N_t) ∫ Σ_{k=1}^{n+1} (-1)^k C(n+1,k) f(x + k v) K_t(v) dv`
/// with `K_t = e^{-|v|/t}, N_t = 2t` (Picard) or `K_t = e^{-v²/t}, N_t = √(πt)`
/// (Weierstrass), integrated directly in `v`.
pub fn difference_form(
    kind: JacksonKind,
    n: u32,
    t: Time,
    f: &TestFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<GridFunction> {
    kind.kernel(n).validate()?;
    f.validate()?;
    grid.validate()?;
    let tv = t.get();
    let (base, split): (KernelId, &[f64]) = match kind {
        JacksonKind::Picard => (KernelId::PicardLaplace, &[0.0]),
        JacksonKind::Weierstrass(_) => (KernelId::GaussWeierstrass, &[]),
    };
    let weight = move |v: f64| match kind {
        JacksonKind::Picard => (-v.abs() / tv).exp() / (2.0 * tv),
        JacksonKind::Weierstrass(_) => (-v * v / tv).exp() / (PI * tv).sqrt(),
    };
    let r = truncation_radius(base, t, quad.eps_tail)?;
    let signed: Vec<(f64, f64)> = (1..=n + 1)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            (k as f64, sign * binomial(n + 1, k))
        })
        .collect();
    let scale = f.sup_abs() * (2f64.powi(n as i32 + 1) - 1.0);

    let values = grid
        .nodes()
        .par_iter()
        .map(|&x| {
            let mut bps: Vec<f64> = signed
                .iter()
                .flat_map(|&(k, _)| {
                    f.breakpoints(x - k * r, x + k * r)
                        .into_iter()
                        .map(move |b| (b - x) / k)
                })
                .filter(|&v| v > -r && v < r)
                .collect();
            bps.sort_by(f64::total_cmp);
            bps.dedup();
            let integrand = |v: f64| {
                let s: f64 = signed.iter().map(|&(k, c)| c * f.eval(x + k * v)).sum();
                -s * weight(v)
            };
            integrate_refined(integrand, -r, r, split, &bps, quad, scale).map(|(q, _, _)| q)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut out = GridFunction::new(grid.x_min, grid.dx(), values)?;
    out.meta = GridMeta {
        label: Some(format!("difference-form:{}", kind.kernel(n))),
        ..GridMeta::default()
    };
    Ok(out)
}

/// Node-wise gaps between the three printed representations of a Jackson
/// operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityGaps {
    /// Kernel form vs. the alternating combination of `u_k`.
    pub kernel_vs_combination: f64,
    /// Difference form vs. kernel form.
    pub difference_vs_kernel: f64,
    /// Difference form vs. the combination.
    pub difference_vs_combination: f64,
}

pub fn combination_identity_gap(
    kind: JacksonKind,
    n: u32,
    t: Time,
    f: &TestFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<IdentityGaps> {
    let kernel_form = convolve_direct(f, kind.kernel(n), t, grid, quad)?;
    let combo = jackson_combination(kind, n, t, f, grid, quad)?;
    let diff = difference_form(kind, n, t, f, grid, quad)?;
    let all = 0..grid.n;
    Ok(IdentityGaps {
        kernel_vs_combination: kernel_form.max_abs_diff(&combo.total, all.clone())?,
        difference_vs_kernel: diff.max_abs_diff(&kernel_form, all.clone())?,
        difference_vs_combination: diff.max_abs_diff(&combo.total, all)?,
    })
}

/// `max |E_t(f) - P_{1/t}(f)|` on the direct path with one quadrature spec.
pub fn duality_gap(t: Time, f: &TestFunction, grid: &GridSpec, quad: &QuadratureSpec) -> Result<f64> {
    let e = convolve_direct(f, KernelId::Exponential, t, grid, quad)?;
    let p = convolve_direct(f, KernelId::PicardLaplace, t.recip()?, grid, quad)?;
    e.max_abs_diff(&p, 0..grid.n)
}

/// `max |W_t(W_s(f)) - W_{t+s}(f)|` on the FFT path, excluding the bands
/// touched by zero padding in either evaluation.
pub fn semigroup_gap(t: Time, s: Time, f: &TestFunction, grid: &GridSpec) -> Result<f64> {
    f.validate()?;
    let samples = GridFunction::sample(grid, |x| f.eval(x))?;
    let ws = convolve_fft(&samples, KernelId::GaussWeierstrass, s)?;
    let wts = convolve_fft(&ws, KernelId::GaussWeierstrass, t)?;
    let direct = convolve_fft(&samples, KernelId::GaussWeierstrass, Time::new(t.get() + s.get())?)?;
    let band = (ws.meta.contaminated + wts.meta.contaminated).max(direct.meta.contaminated);
    if 2 * band >= grid.n {
        return Err(Error::Resolution(format!(
            "grid of {} nodes has no node outside the {band}-node contaminated bands",
            grid.n
        )));
    }
    wts.max_abs_diff(&direct, band..grid.n - band)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tt(t: f64) -> Time {
        Time::new(t).unwrap()
    }

    #[test]
    fn picard_jackson_n1_coefficients() {
        let grid = GridSpec::new(-2.0, 2.0, 21).unwrap();
        let quad = QuadratureSpec::default();
        let f = TestFunction::bump();
        let combo = jackson_combination(JacksonKind::Picard, 1, tt(0.5), &f, &grid, &quad).unwrap();
        let p1 = convolve_direct(&f, KernelId::PicardLaplace, tt(0.5), &grid, &quad).unwrap();
        let p2 = convolve_direct(&f, KernelId::PicardLaplace, tt(1.0), &grid, &quad).unwrap();
        let expect = p1.axpby(2.0, &p2, -1.0).unwrap();
        assert!(combo.total.max_abs_diff(&expect, 0..21).unwrap() < 1e-15);
        assert_eq!(combo.components.len(), 2);
    }

    #[test]
    fn picard_jackson_on_cos() {
        let grid = GridSpec::new(-3.0, 3.0, 31).unwrap();
        let combo = jackson_combination(
            JacksonKind::Picard,
            1,
            tt(1.0),
            &TestFunction::cos(1.0),
            &grid,
            &QuadratureSpec::default(),
        )
        .unwrap();
        for (i, v) in combo.total.values.iter().enumerate() {
            assert!((v - 0.8 * combo.total.x(i).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn picard_jackson_preserves_constants() {
        let grid = GridSpec::new(-1.0, 1.0, 11).unwrap();
        for n in 1..=3 {
            let combo = jackson_combination(
                JacksonKind::Picard,
                n,
                tt(0.3),
                &TestFunction::constant(1.0),
                &grid,
                &QuadratureSpec::default(),
            )
            .unwrap();
            assert!(combo.total.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn duality_examples() {
        let grid = GridSpec::new(-3.0, 3.0, 25).unwrap();
        let quad = QuadratureSpec::default();
        assert!(duality_gap(tt(2.0), &TestFunction::bump(), &grid, &quad).unwrap() < 1e-10);
        assert!(duality_gap(tt(1.0), &TestFunction::abs_sin(), &grid, &quad).unwrap() < 1e-10);
        assert!(duality_gap(tt(0.1), &TestFunction::cos(1.0), &grid, &quad).unwrap() < 1e-9);
    }

    #[test]
    fn semigroup_examples() {
        let grid = GridSpec::new(-30.0, 30.0, 2401).unwrap();
        let g = semigroup_gap(tt(0.5), tt(0.5), &TestFunction::bump(), &grid).unwrap();
        assert!(g < 1e-6, "{g}");
        let g = semigroup_gap(tt(0.5), tt(1.0), &TestFunction::constant(2.0), &grid).unwrap();
        assert!(g < 1e-10, "{g}");
    }

    #[test]
    fn fft_path_through_apply() {
        let grid = GridSpec::new(-40.0, 40.0, 1601).unwrap();
        let req = OperatorRequest {
            path: EvalPath::Fft,
            ..OperatorRequest::direct(KernelId::PicardLaplace, tt(1.0), TestFunction::sin(1.0), grid)
        };
        let out = apply(&req).unwrap();
        assert!(out.meta.contaminated > 0);
        for i in out.interior() {
            assert!((out.values[i] - 0.5 * out.x(i).sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn weierstrass_identity_gaps() {
        let grid = GridSpec::new(-2.0, 2.0, 9).unwrap();
        let gaps = combination_identity_gap(
            JacksonKind::Weierstrass(WjVariant::AsStated),
            1,
            tt(1.0),
            &TestFunction::cos(1.0),
            &grid,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(gaps.kernel_vs_combination < 1e-8);
        assert!((gaps.difference_vs_kernel - 0.061_002_501_308_911_08).abs() < 1e-6);
    }
}
