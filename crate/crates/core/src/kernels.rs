//! Smoothing kernels: compactly supported bumps and the square Fejér kernel.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{restrict_to_coarse, FineSpectrum, FourierPlan, GridSpec, SpatialGrid, SpectralVector};
use crate::scalar::Real;

/// Minimum number of fine grid points inside the bump support.
pub const MIN_SUPPORT_POINTS: usize = 16;

/// Relative tolerance on the matched minimum coefficient.
pub const MATCH_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec<T> {
    /// `C ε⁻² exp(-1/(1 - |x/ε|²))` on the disk of radius `ε`.
    Bump { epsilon: T },
    /// Square Fejér kernel whose order follows the coarse grid.
    Fejer,
}

impl<T: Real> KernelSpec<T> {
    /// Coefficients `q̂(j)` on the coarse grid of `grid`.
    pub fn coefficients(&self, grid: &GridSpec) -> Result<SpectralVector<T>> {
        match *self {
            KernelSpec::Bump { epsilon } => bump_coefficients(epsilon, grid),
            KernelSpec::Fejer => Ok(fejer_coefficients(grid.coarse)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            KernelSpec::Bump { epsilon } => format!("bump(epsilon={epsilon})"),
            KernelSpec::Fejer => "fejer".to_string(),
        }
    }
}

/// One-dimensional Fejér weight `max(0, 1 - |j|/(n/2 + 1))`.
pub fn fejer_weight<T: Real>(n: usize, j: i64) -> T {
    let w = T::one() - T::from_i64_lossy(j.abs()) / T::from_usize_lossy(n / 2 + 1);
    w.max(T::zero())
}

/// `q̂(j) = (1 - |j1|/(n/2+1)) (1 - |j2|/(n/2+1))` on the coarse grid.
pub fn fejer_coefficients<T: Real>(n: usize) -> SpectralVector<T> {
    let mut v = SpectralVector::zeros(n);
    let coeffs: Vec<Complex<T>> = v
        .iter()
        .map(|(j, _)| Complex::new(fejer_weight::<T>(n, j.j1) * fejer_weight::<T>(n, j.j2), T::zero()))
        .collect();
    v.coeffs_mut().copy_from_slice(&coeffs);
    v
}

/// Bump samples on the fine grid, scaled so that their Riemann sum is
/// exactly one. The distance to the origin is measured from the
/// representative of each point in `[-1/2, 1/2)²`.
pub fn bump_samples<T: Real>(epsilon: T, fine: usize) -> Result<Vec<T>> {
    if !(epsilon > T::zero() && epsilon < T::lit(0.5)) {
        return Err(Error::InvalidParameter(format!("bump radius must lie in (0, 1/2), got {epsilon}")));
    }
    let step = T::one() / T::from_usize_lossy(fine);
    let rep = |a: usize| {
        if 2 * a >= fine {
            T::from_i64_lossy(a as i64 - fine as i64) * step
        } else {
            T::from_usize_lossy(a) * step
        }
    };
    let mut values = Vec::with_capacity(fine * fine);
    let mut interior = 0usize;
    for a in 0..fine {
        let x1 = rep(a) / epsilon;
        for b in 0..fine {
            let x2 = rep(b) / epsilon;
            let r2 = x1 * x1 + x2 * x2;
            if r2 < T::one() {
                interior += 1;
                values.push((-(T::one() - r2).recip()).exp());
            } else {
                values.push(T::zero());
            }
        }
    }
    if interior < MIN_SUPPORT_POINTS {
        return Err(Error::UnderResolved {
            epsilon: epsilon.to_f64().unwrap_or(f64::NAN),
            interior,
            required: MIN_SUPPORT_POINTS,
        });
    }
    let mass = crate::grid::riemann_sum(&values);
    values.iter_mut().for_each(|v| *v = *v / mass);
    Ok(values)
}

fn bump_coefficients_with<T: Real>(plan: &FourierPlan<T>, epsilon: T, n: usize) -> Result<SpectralVector<T>> {
    let samples = bump_samples(epsilon, plan.fine())?;
    let spectrum = plan.forward(&SpatialGrid::from_real(plan.fine(), &samples)?)?;
    let mut v = restrict_to_coarse(&spectrum, n)?;
    // even real kernel: the transform is real, the zero mode is the mass
    for c in v.coeffs_mut() {
        c.im = T::zero();
    }
    v.set(crate::grid::FreqIndex::ZERO, Complex::new(T::one(), T::zero()))?;
    Ok(v)
}

/// Coarse Fourier coefficients of the discretely normalised bump.
pub fn bump_coefficients<T: Real>(epsilon: T, grid: &GridSpec) -> Result<SpectralVector<T>> {
    bump_coefficients_with(&FourierPlan::new(grid.fine)?, epsilon, grid.coarse)
}

fn min_abs<T: Real>(v: &SpectralVector<T>) -> T {
    v.coeffs().iter().map(|c| c.norm()).fold(T::infinity(), T::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonMatch<T> {
    pub epsilon: T,
    /// `min_j |q̂_ε(j)|` at the returned radius.
    pub achieved_min: T,
    /// `min_j q̂_n(j) = (n/2 + 1)⁻²`.
    pub target_min: T,
    pub relative_residual: T,
}

/// Bump radius whose smallest coarse coefficient (in modulus) equals the
/// smallest coarse Fejér coefficient.
///
/// The smallest coefficient falls steeply while the bump is narrow, then
/// oscillates once zeros of its transform start to sweep across lattice
/// points. A pre-scan over `[8/N, 1/4]` finds the first sign change of
/// `min − target` and bisection refines that bracket.
pub fn match_epsilon<T: Real>(grid: &GridSpec) -> Result<EpsilonMatch<T>> {
    let n = grid.coarse;
    let plan = FourierPlan::new(grid.fine)?;
    let target = {
        let w = fejer_weight::<T>(n, (n / 2) as i64);
        w * w
    };
    let lo = T::lit(8.0) / T::from_usize_lossy(grid.fine);
    let hi = T::lit(0.25);
    let excess = |eps: T| -> Result<T> { Ok(min_abs(&bump_coefficients_with(&plan, eps, n)?) - target) };

    const SCAN: usize = 256;
    let no_root = || Error::NoRoot {
        lo: lo.to_f64().unwrap_or(f64::NAN),
        hi: hi.to_f64().unwrap_or(f64::NAN),
    };
    let (mut prev, mut f_prev) = (lo, excess(lo)?);
    let mut bracket = None;
    for i in 1..=SCAN {
        let eps = lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(SCAN);
        let f = excess(eps)?;
        if (f <= T::zero()) != (f_prev <= T::zero()) {
            bracket = Some((prev, f_prev, eps));
            break;
        }
        (prev, f_prev) = (eps, f);
    }
    let (mut a, f_a, mut b) = bracket.ok_or_else(no_root)?;
    let rising = f_a <= T::zero();
    let tol = T::lit(MATCH_TOLERANCE);
    let mut best = (b, excess(b)?);
    for _ in 0..60 {
        let mid = (a + b) / T::lit(2.0);
        let f = excess(mid)?;
        if f.abs() < best.1.abs() {
            best = (mid, f);
        }
        if (f / target).abs() < tol * T::lit(1e-3) || b - a < T::lit(1e-12) {
            break;
        }
        if (f > T::zero()) != rising {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (epsilon, f) = best;
    Ok(EpsilonMatch {
        epsilon,
        achieved_min: f + target,
        target_min: target,
        relative_residual: (f / target).abs(),
    })
}

/// Full fine-range Fejér coefficients of order `n` (zero beyond `|j| > n/2`).
pub fn fejer_fine_spectrum<T: Real>(n: usize, fine: usize) -> FineSpectrum<T> {
    FineSpectrum::from_fn(fine, |j| {
        Complex::new(fejer_weight::<T>(n, j.j1) * fejer_weight::<T>(n, j.j2), T::zero())
    })
}

/// Spatial samples of the kernel on the fine grid of `grid`.
pub fn kernel_samples<T: Real>(kernel: &KernelSpec<T>, grid: &GridSpec) -> Result<Vec<T>> {
    match *kernel {
        KernelSpec::Bump { epsilon } => bump_samples(epsilon, grid.fine),
        KernelSpec::Fejer => {
            let plan = FourierPlan::new(grid.fine)?;
            Ok(plan.evaluate_fine(&fejer_fine_spectrum(grid.coarse, grid.fine))?.real_parts())
        }
    }
}

/// Discrete mass of the kernel outside the ball `B_η(0)`.
pub fn summability_check<T: Real>(kernel: &KernelSpec<T>, eta: T, grid: &GridSpec) -> Result<T> {
    if !(eta > T::zero() && eta < T::lit(0.5)) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1/2), got {eta}")));
    }
    let samples = kernel_samples(kernel, grid)?;
    let fine = grid.fine;
    let step = T::one() / T::from_usize_lossy(fine);
    let rep = |a: usize| {
        if 2 * a >= fine {
            T::from_i64_lossy(a as i64 - fine as i64) * step
        } else {
            T::from_usize_lossy(a) * step
        }
    };
    let eta2 = eta * eta;
    let mut outside = T::zero();
    for a in 0..fine {
        let x1 = rep(a);
        for b in 0..fine {
            let x2 = rep(b);
            if x1 * x1 + x2 * x2 >= eta2 {
                outside = outside + samples[a * fine + b];
            }
        }
    }
    Ok(outside / T::from_usize_lossy(fine * fine))
}
