//! Coarse/fine grid conventions and the discrete Fourier machinery.
//!
//! Frequencies on an axis of order `n` run over `-n/2+1, ..., n/2` (the
//! positive Nyquist frequency is kept, the negative one dropped). A
//! [`SpectralVector`] stores its `n²` coefficients row-major over
//! `(j1, j2)`, each axis ascending; operator matrices use the same order.
//!
//! Forward transforms carry the `1/N²` factor, so a coefficient directly
//! approximates `⟨f, f_j⟩ = ∫ f · conj(f_j) dLeb` with `f_j(x) = e^{2πi j·x}`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coarse order `n` (operator size `n² × n²`) and fine order `N`
/// (collocation grid `N × N`), both powers of two with `N >= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub coarse: usize,
    pub fine: usize,
}

impl GridSpec {
    pub fn new(coarse: usize, fine: usize) -> Result<Self> {
        if coarse < 2 || !coarse.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("coarse order {coarse} is not a power of two >= 2")));
        }
        if !fine.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("fine order {fine} is not a power of two")));
        }
        if fine < coarse {
            return Err(Error::InvalidGrid(format!("fine order {fine} is below coarse order {coarse}")));
        }
        Ok(Self { coarse, fine })
    }

    /// Number of coarse modes, `n²`.
    pub fn modes(&self) -> usize {
        self.coarse * self.coarse
    }
}

/// A frequency pair `(j1, j2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreqIndex {
    pub j1: i64,
    pub j2: i64,
}

impl FreqIndex {
    pub const ZERO: FreqIndex = FreqIndex { j1: 0, j2: 0 };

    pub fn new(j1: i64, j2: i64) -> Self {
        Self { j1, j2 }
    }

    pub fn neg(self) -> Self {
        Self::new(-self.j1, -self.j2)
    }
}

/// Frequencies of one axis of order `n`, ascending.
pub fn axis_freqs(n: usize) -> impl Iterator<Item = i64> + Clone {
    let half = (n / 2) as i64;
    (-half + 1)..=half
}

#[inline]
pub fn in_range(n: usize, j: i64) -> bool {
    let half = (n / 2) as i64;
    j > -half && j <= half
}

/// Linear position of `j` in the coarse order, or `None` if not representable.
#[inline]
pub fn coarse_index(n: usize, j: FreqIndex) -> Option<usize> {
    if in_range(n, j.j1) && in_range(n, j.j2) {
        let off = (n / 2) as i64 - 1;
        Some(((j.j1 + off) as usize) * n + (j.j2 + off) as usize)
    } else {
        None
    }
}

#[inline]
pub fn coarse_freq(n: usize, idx: usize) -> FreqIndex {
    let off = (n / 2) as i64 - 1;
    FreqIndex::new((idx / n) as i64 - off, (idx % n) as i64 - off)
}

/// Position of frequency `j` in an unshifted FFT buffer of length `len`.
#[inline]
pub fn fft_slot(len: usize, j: i64) -> usize {
    j.rem_euclid(len as i64) as usize
}

/// Centered frequency held by slot `s` of an unshifted buffer of length `len`.
#[inline]
pub fn slot_freq(len: usize, s: usize) -> i64 {
    if s <= len / 2 {
        s as i64
    } else {
        s as i64 - len as i64
    }
}

/// Complex samples on the `N × N` grid; entry `(a, b)` sits at `(a/N, b/N)`
/// and is stored at `a * N + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid<T> {
    fine: usize,
    samples: Vec<Complex<T>>,
}

impl<T: Real> SpatialGrid<T> {
    pub fn new(fine: usize, samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != fine * fine {
            return Err(Error::DimensionMismatch {
                expected: fine * fine,
                actual: samples.len(),
            });
        }
        Ok(Self { fine, samples })
    }

    pub fn from_real(fine: usize, values: &[T]) -> Result<Self> {
        Self::new(fine, values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub fn from_fn(fine: usize, f: impl Fn([T; 2]) -> Complex<T>) -> Self {
        let step = T::one() / T::from_usize_lossy(fine);
        let mut samples = Vec::with_capacity(fine * fine);
        for a in 0..fine {
            for b in 0..fine {
                samples.push(f([T::from_usize_lossy(a) * step, T::from_usize_lossy(b) * step]));
            }
        }
        Self { fine, samples }
    }

    pub fn fine(&self) -> usize {
        self.fine
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn get(&self, a: usize, b: usize) -> Complex<T> {
        self.samples[a * self.fine + b]
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.samples.iter().map(|c| c.re).collect()
    }

    pub fn max_abs_imag(&self) -> T {
        self.samples.iter().map(|c| c.im.abs()).fold(T::zero(), T::max)
    }
}

/// All `N²` coefficients of a forward transform, kept in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct FineSpectrum<T> {
    fine: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> FineSpectrum<T> {
    pub fn fine(&self) -> usize {
        self.fine
    }

    /// Coefficient at `j`, for `j` in the fine centered range (or any
    /// integer pair, read modulo `N`).
    pub fn get(&self, j: FreqIndex) -> Complex<T> {
        self.data[fft_slot(self.fine, j.j1) * self.fine + fft_slot(self.fine, j.j2)]
    }

    /// `(j, c(j))` over the fine centered range.
    pub fn iter(&self) -> impl Iterator<Item = (FreqIndex, Complex<T>)> + '_ {
        let n = self.fine;
        self.data.iter().enumerate().map(move |(i, &c)| {
            (FreqIndex::new(slot_freq(n, i / n), slot_freq(n, i % n)), c)
        })
    }

    /// Builds a fine spectrum from a closure on centered frequencies.
    pub fn from_fn(fine: usize, f: impl Fn(FreqIndex) -> Complex<T>) -> Self {
        let data = (0..fine * fine)
            .map(|i| f(FreqIndex::new(slot_freq(fine, i / fine), slot_freq(fine, i % fine))))
            .collect();
        Self { fine, data }
    }
}

/// Fourier coefficients on the coarse grid of order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector<T> {
    n: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralVector<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: coeffs.len(),
            });
        }
        Ok(Self { n, coeffs })
    }

    /// Unit vector at `j`.
    pub fn unit(n: usize, j: FreqIndex) -> Result<Self> {
        let idx = coarse_index(n, j)
            .ok_or_else(|| Error::InvalidParameter(format!("{j:?} is outside the coarse range of order {n}")))?;
        let mut v = Self::zeros(n);
        v.coeffs[idx] = Complex::new(T::one(), T::zero());
        Ok(v)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient at `j`; zero outside the coarse range.
    pub fn get(&self, j: FreqIndex) -> Complex<T> {
        coarse_index(self.n, j)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set(&mut self, j: FreqIndex, value: Complex<T>) -> Result<()> {
        let idx = coarse_index(self.n, j)
            .ok_or_else(|| Error::InvalidParameter(format!("{j:?} is outside the coarse range")))?;
        self.coeffs[idx] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (FreqIndex, Complex<T>)> + '_ {
        let n = self.n;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (coarse_freq(n, i), c))
    }

    pub fn norm(&self) -> T {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Largest `|c(-j) - conj c(j)|` over pairs with both ends representable;
    /// zero for a vector describing a real function.
    pub fn conjugate_asymmetry(&self) -> T {
        self.iter()
            .filter_map(|(j, c)| coarse_index(self.n, j.neg()).map(|k| (self.coeffs[k] - c.conj()).norm()))
            .fold(T::zero(), T::max)
    }
}

/// Cached FFT plans for one fine order.
#[derive(Clone)]
pub struct FourierPlan<T: Real> {
    fine: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for FourierPlan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPlan").field("fine", &self.fine).finish()
    }
}

impl<T: Real> FourierPlan<T> {
    pub fn new(fine: usize) -> Result<Self> {
        if !fine.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("fine order {fine} is not a power of two")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            fine,
            forward: planner.plan_fft_forward(fine),
            inverse: planner.plan_fft_inverse(fine),
        })
    }

    pub fn fine(&self) -> usize {
        self.fine
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.fine * self.fine {
            return Err(Error::DimensionMismatch {
                expected: self.fine * self.fine,
                actual: len,
            });
        }
        Ok(())
    }

    /// Unnormalised 2-D transform in place (rows, then columns).
    fn transform_2d(&self, fft: &Arc<dyn Fft<T>>, buf: &mut [Complex<T>]) {
        let n = self.fine;
        let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(buf, &mut scratch);
        let mut col = vec![Complex::default(); n];
        for b in 0..n {
            for a in 0..n {
                col[a] = buf[a * n + b];
            }
            fft.process_with_scratch(&mut col, &mut scratch);
            for a in 0..n {
                buf[a * n + b] = col[a];
            }
        }
    }

    pub fn forward(&self, grid: &SpatialGrid<T>) -> Result<FineSpectrum<T>> {
        self.check(grid.samples.len())?;
        let mut data = grid.samples.clone();
        self.transform_2d(&self.forward, &mut data);
        let scale = T::one() / T::from_usize_lossy(self.fine * self.fine);
        data.iter_mut().for_each(|c| *c = *c * scale);
        Ok(FineSpectrum { fine: self.fine, data })
    }

    /// Normalised forward coefficients `c(f1, f2)` for every pair drawn from
    /// `freqs`, written row-major into `out` (`out.len() == freqs.len()²`).
    /// Destroys `buf`. Only the columns that are needed get a second pass.
    pub fn forward_block(&self, buf: &mut [Complex<T>], freqs: &[i64], out: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>) {
        let n = self.fine;
        let m = freqs.len();
        debug_assert_eq!(buf.len(), n * n);
        debug_assert_eq!(out.len(), m * m);
        let need = self.forward.get_inplace_scratch_len();
        if scratch.len() < need + n {
            scratch.resize(need + n, Complex::default());
        }
        let (fft_scratch, col) = scratch.split_at_mut(need);
        let col = &mut col[..n];
        self.forward.process_with_scratch(buf, fft_scratch);
        let scale = T::one() / T::from_usize_lossy(n * n);
        for (c2, &f2) in freqs.iter().enumerate() {
            let s2 = fft_slot(n, f2);
            for a in 0..n {
                col[a] = buf[a * n + s2];
            }
            self.forward.process_with_scratch(col, fft_scratch);
            for (c1, &f1) in freqs.iter().enumerate() {
                out[c1 * m + c2] = col[fft_slot(n, f1)] * scale;
            }
        }
    }

    /// `samples[a, b] = Σ_j v(j) e^{2πi j·(a/N, b/N)}` for a coarse vector.
    pub fn evaluate(&self, v: &SpectralVector<T>) -> Result<SpatialGrid<T>> {
        let n = self.fine;
        if v.order() > n {
            return Err(Error::InvalidGrid(format!(
                "cannot evaluate order {} coefficients on a fine grid of order {n}",
                v.order()
            )));
        }
        let mut data = vec![Complex::default(); n * n];
        for (j, c) in v.iter() {
            data[fft_slot(n, j.j1) * n + fft_slot(n, j.j2)] = c;
        }
        self.transform_2d(&self.inverse, &mut data);
        Ok(SpatialGrid { fine: n, samples: data })
    }

    /// Inverse of a full fine spectrum, without the `1/N²` factor removed,
    /// i.e. the trigonometric sum itself.
    pub fn evaluate_fine(&self, s: &FineSpectrum<T>) -> Result<SpatialGrid<T>> {
        self.check(s.data.len())?;
        let mut data = s.data.clone();
        self.transform_2d(&self.inverse, &mut data);
        Ok(SpatialGrid { fine: self.fine, samples: data })
    }
}

pub fn forward_transform<T: Real>(grid: &SpatialGrid<T>) -> Result<FineSpectrum<T>> {
    FourierPlan::new(grid.fine)?.forward(grid)
}

/// Keeps the entries whose frequencies lie in the coarse range of order `n`.
pub fn restrict_to_coarse<T: Real>(spectrum: &FineSpectrum<T>, n: usize) -> Result<SpectralVector<T>> {
    if n > spectrum.fine || n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "coarse order {n} incompatible with fine order {}",
            spectrum.fine
        )));
    }
    let coeffs = (0..n * n).map(|i| spectrum.get(coarse_freq(n, i))).collect();
    Ok(SpectralVector { n, coeffs })
}

pub fn evaluate_on_fine<T: Real>(v: &SpectralVector<T>, fine: usize) -> Result<SpatialGrid<T>> {
    FourierPlan::new(fine)?.evaluate(v)
}

/// `(1/N²) Σ samples`, the Riemann sum of the grid function.
pub fn riemann_integral<T: Real>(grid: &SpatialGrid<T>) -> Complex<T> {
    let sum = grid
        .samples
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b);
    sum / T::from_usize_lossy(grid.samples.len())
}

/// Riemann sum of a real grid function given as a plain slice.
pub fn riemann_sum<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(values.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    type C = Complex<f64>;

    fn mode(fine: usize, j1: i64, j2: i64) -> SpatialGrid<f64> {
        SpatialGrid::from_fn(fine, |x| C::from_polar(1.0, TAU * (j1 as f64 * x[0] + j2 as f64 * x[1])))
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(32, 512).is_ok());
        assert!(GridSpec::new(32, 16).is_err());
        assert!(GridSpec::new(24, 512).is_err());
        assert!(GridSpec::new(32, 500).is_err());
    }

    #[test]
    fn coarse_order_is_row_major_ascending() {
        let n = 4;
        assert_eq!(coarse_freq(n, 0), FreqIndex::new(-1, -1));
        assert_eq!(coarse_freq(n, 1), FreqIndex::new(-1, 0));
        assert_eq!(coarse_freq(n, n * n - 1), FreqIndex::new(2, 2));
        for i in 0..n * n {
            assert_eq!(coarse_index(n, coarse_freq(n, i)), Some(i));
        }
        assert_eq!(coarse_index(n, FreqIndex::new(-2, 0)), None);
        assert_eq!(coarse_index(n, FreqIndex::new(2, 0)).is_some(), true);
    }

    #[test]
    fn constant_transforms_to_zero_mode() {
        let g = SpatialGrid::from_fn(16, |_| C::new(1.0, 0.0));
        let s = forward_transform(&g).unwrap();
        for (j, c) in s.iter() {
            let expect = if j == FreqIndex::ZERO { 1.0 } else { 0.0 };
            assert!((c - C::new(expect, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pure_mode_and_cosine() {
        for fine in [2usize, 8, 32] {
            let s = forward_transform(&mode(fine, 1, 0)).unwrap();
            for (j, c) in s.iter() {
                let expect = if j == FreqIndex::new(1, 0) { 1.0 } else { 0.0 };
                assert!((c - C::new(expect, 0.0)).norm() < 1e-14, "N={fine} {j:?} {c}");
            }
        }
        let g = SpatialGrid::from_fn(16, |x: [f64; 2]| C::new((2.0 * TAU * x[0]).cos(), 0.0));
        let s = forward_transform(&g).unwrap();
        assert!((s.get(FreqIndex::new(2, 0)) - C::new(0.5, 0.0)).norm() < 1e-15);
        assert!((s.get(FreqIndex::new(-2, 0)) - C::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn restriction_truncates_asymmetrically() {
        let fine = 32;
        let n = 8;
        let s = FineSpectrum::from_fn(fine, |j| {
            if j == FreqIndex::ZERO || j == FreqIndex::new(16, 0) || j == FreqIndex::new(4, 0) || j == FreqIndex::new(-4, 0) {
                C::new(1.0, 0.0)
            } else {
                C::default()
            }
        });
        let v = restrict_to_coarse(&s, n).unwrap();
        assert_eq!(v.get(FreqIndex::ZERO), C::new(1.0, 0.0));
        assert_eq!(v.get(FreqIndex::new(4, 0)), C::new(1.0, 0.0));
        // -n/2 is not a coarse frequency; (N/2, 0) is beyond the coarse range
        assert_eq!(v.coeffs().iter().filter(|c| c.norm() > 0.0).count(), 2);
    }

    #[test]
    fn evaluate_examples() {
        let mut v = SpectralVector::<f64>::zeros(8);
        v.set(FreqIndex::ZERO, C::new(1.0, 0.0)).unwrap();
        let g = evaluate_on_fine(&v, 32).unwrap();
        assert!(g.samples().iter().all(|c| (c - C::new(1.0, 0.0)).norm() < 1e-14));

        let mut v = SpectralVector::<f64>::zeros(8);
        v.set(FreqIndex::new(2, 0), C::new(0.5, 0.0)).unwrap();
        v.set(FreqIndex::new(-2, 0), C::new(0.5, 0.0)).unwrap();
        let g = evaluate_on_fine(&v, 32).unwrap();
        for a in 0..32 {
            for b in 0..32 {
                let expect = (2.0 * TAU * a as f64 / 32.0).cos();
                assert!((g.get(a, b) - C::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn riemann_examples() {
        let one = SpatialGrid::from_fn(16, |_| C::new(1.0, 0.0));
        assert!((riemann_integral(&one) - C::new(1.0, 0.0)).norm() < 1e-15);
        let cos = SpatialGrid::from_fn(16, |x: [f64; 2]| C::new((TAU * x[0]).cos(), 0.0));
        assert!(riemann_integral(&cos).norm() < 1e-15);
        let g = crate::torus::Observable::<f64>::cos_sin();
        let sq: Vec<f64> = g.sample(64).iter().map(|v| v * v).collect();
        assert!((riemann_sum(&sq) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn forward_block_matches_full_transform() {
        let fine = 32;
        let plan = FourierPlan::<f64>::new(fine).unwrap();
        let g = SpatialGrid::from_fn(fine, |x: [f64; 2]| {
            C::new((TAU * x[0]).sin() * (3.0 * TAU * x[1]).cos() + x[0] * x[1], (x[0] - x[1]).exp())
        });
        let full = plan.forward(&g).unwrap();
        let freqs: Vec<i64> = vec![-4, -1, 0, 3, 16];
        let mut out = vec![C::default(); freqs.len() * freqs.len()];
        let mut buf = g.samples().to_vec();
        plan.forward_block(&mut buf, &freqs, &mut out, &mut Vec::new());
        for (i, &f1) in freqs.iter().enumerate() {
            for (k, &f2) in freqs.iter().enumerate() {
                assert!((out[i * freqs.len() + k] - full.get(FreqIndex::new(f1, f2))).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn single_precision_transform() {
        let g = SpatialGrid::<f32>::from_fn(8, |x| Complex::new((2.0 * std::f32::consts::TAU * x[1]).cos(), 0.0));
        let s = forward_transform(&g).unwrap();
        assert!((s.get(FreqIndex::new(0, 2)).re - 0.5).abs() < 1e-6);
    }

    fn spectral_vector(n: usize) -> impl Strategy<Value = SpectralVector<f64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
            .prop_map(move |v| SpectralVector::from_coeffs(n, v.into_iter().map(|(a, b)| C::new(a, b)).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn band_limited_round_trip(v in spectral_vector(8)) {
            let g = evaluate_on_fine(&v, 16).unwrap();
            let back = restrict_to_coarse(&forward_transform(&g).unwrap(), 8).unwrap();
            for (a, b) in back.coeffs().iter().zip(v.coeffs()) {
                prop_assert!((a - b).norm() < 1e-13);
            }
        }

        #[test]
        fn parseval_on_fine_grid(vals in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 16 * 16)) {
            let g = SpatialGrid::new(16, vals.into_iter().map(|(a, b)| C::new(a, b)).collect()).unwrap();
            let energy: f64 = g.samples().iter().map(|c| c.norm_sqr()).sum::<f64>() / 256.0;
            let spec: f64 = forward_transform(&g).unwrap().iter().map(|(_, c)| c.norm_sqr()).sum();
            prop_assert!((energy - spec).abs() <= 1e-12 * energy.max(1e-300));
        }

        #[test]
        fn transform_is_linear(
            u in proptest::collection::vec(-1.0f64..1.0, 64),
            w in proptest::collection::vec(-1.0f64..1.0, 64),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let gu = SpatialGrid::from_real(8, &u).unwrap();
            let gw = SpatialGrid::from_real(8, &w).unwrap();
            let mix: Vec<f64> = u.iter().zip(&w).map(|(a, b)| alpha * a + beta * b).collect();
            let gm = SpatialGrid::from_real(8, &mix).unwrap();
            let (fu, fw, fm) = (forward_transform(&gu).unwrap(), forward_transform(&gw).unwrap(), forward_transform(&gm).unwrap());
            for ((j, m), (_, a)) in fm.iter().zip(fu.iter()) {
                let expect = a * alpha + fw.get(j) * beta;
                prop_assert!((m - expect).norm() < 1e-13);
            }
        }
    }
}
