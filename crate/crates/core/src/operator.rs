//! Dense Fourier-basis matrices of the smoothed, twisted transfer operator.
//!
//! Row `j`, column `k` holds `q̂(j) · F(y ↦ e^{-2πi j·T(y)} e^{z g(y)})(-k)`,
//! where `F` is the normalised fine-grid transform. Rows and columns follow
//! the coarse [`SpectralVector`] order.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{axis_freqs, coarse_index, FourierPlan, FreqIndex, GridSpec, SpectralVector};
use crate::kernels::KernelSpec;
use crate::torus::{MapModel, Observable, ToralMap};

type C64 = Complex<f64>;

/// Largest coarse order assembled without an explicit override.
pub const MAX_ORDER: usize = 128;

/// `exp` overflows past roughly `e^709`; refuse twists that get close.
pub const EXP_GUARD: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorMeta {
    pub map: String,
    pub kernel: String,
    pub z: [f64; 2],
    pub grid: GridSpec,
}

/// An `n² × n²` complex matrix stored row-major.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    n: usize,
    entries: Vec<C64>,
    meta: OperatorMeta,
}

impl OperatorMatrix {
    pub fn from_entries(n: usize, entries: Vec<C64>, meta: OperatorMeta) -> Result<Self> {
        let dim = n * n;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(Self { n, entries, meta })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Side length `n²` of the matrix.
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn meta(&self) -> &OperatorMeta {
        &self.meta
    }

    pub fn z(&self) -> C64 {
        C64::new(self.meta.z[0], self.meta.z[1])
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[C64] {
        let d = self.dim();
        &self.entries[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn at(&self, i: usize, k: usize) -> C64 {
        self.entries[i * self.dim() + k]
    }

    /// Entry for output frequency `j` and input frequency `k`, if both are
    /// representable.
    pub fn get(&self, j: FreqIndex, k: FreqIndex) -> Option<C64> {
        Some(self.at(coarse_index(self.n, j)?, coarse_index(self.n, k)?))
    }

    pub fn to_faer(&self) -> faer::Mat<C64> {
        let d = self.dim();
        faer::Mat::from_fn(d, d, |i, k| self.entries[i * d + k])
    }

    /// `M v` on raw coefficient slices in the coarse order.
    pub fn apply_slice(&self, v: &[C64], out: &mut [C64]) {
        let d = self.dim();
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let row = &self.entries[i * d..(i + 1) * d];
            *o = row.iter().zip(v).fold(C64::default(), |acc, (a, b)| acc + a * b);
        });
    }
}

/// `M v` in the fixed coarse order.
pub fn apply(m: &OperatorMatrix, v: &SpectralVector<f64>) -> Result<SpectralVector<f64>> {
    if v.order() != m.order() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            actual: v.coeffs().len(),
        });
    }
    let mut out = vec![C64::default(); m.dim()];
    m.apply_slice(v.coeffs(), &mut out);
    SpectralVector::from_coeffs(m.order(), out)
}

/// Fine-grid caches shared by every twist of one (map, kernel, observable)
/// triple: the reduced image coordinates, their unit phases and the
/// observable samples.
pub struct Assembler {
    grid: GridSpec,
    plan: FourierPlan<f64>,
    image: [Vec<f64>; 2],
    step2: Vec<C64>,
    g: Vec<f64>,
    g_max: f64,
    kernel: SpectralVector<f64>,
    map_label: String,
    kernel_label: String,
}

impl std::fmt::Debug for Assembler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Assembler")
            .field("grid", &self.grid)
            .field("map", &self.map_label)
            .field("kernel", &self.kernel_label)
            .finish()
    }
}

impl Assembler {
    pub fn new(map: &MapModel<f64>, kernel: &KernelSpec<f64>, g: &Observable<f64>, grid: &GridSpec) -> Result<Self> {
        Self::with_limit(map, kernel, g, grid, MAX_ORDER)
    }

    /// As [`Assembler::new`] with a custom memory guard on the coarse order.
    pub fn with_limit(
        map: &MapModel<f64>,
        kernel: &KernelSpec<f64>,
        g: &Observable<f64>,
        grid: &GridSpec,
        max_order: usize,
    ) -> Result<Self> {
        let q = kernel.coefficients(grid)?;
        Self::from_parts(map, q, kernel.label(), g.sample(grid.fine), grid, max_order)
    }

    /// Builds the caches from explicit kernel coefficients and observable
    /// samples (row-major on the fine grid).
    pub fn from_parts(
        map: &dyn ToralMap<f64>,
        kernel: SpectralVector<f64>,
        kernel_label: String,
        g_samples: Vec<f64>,
        grid: &GridSpec,
        max_order: usize,
    ) -> Result<Self> {
        let (n, fine) = (grid.coarse, grid.fine);
        if n > max_order {
            return Err(Error::MemoryGuard { n, max: max_order });
        }
        if fine < 2 * n {
            return Err(Error::InvalidGrid(format!(
                "fine order {fine} must be at least twice the coarse order {n}"
            )));
        }
        if kernel.order() != n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: kernel.coeffs().len(),
            });
        }
        if g_samples.len() != fine * fine {
            return Err(Error::DimensionMismatch {
                expected: fine * fine,
                actual: g_samples.len(),
            });
        }
        let h = 1.0 / fine as f64;
        let mut t1 = Vec::with_capacity(fine * fine);
        let mut t2 = Vec::with_capacity(fine * fine);
        for a in 0..fine {
            for b in 0..fine {
                let [y1, y2] = map.lift([a as f64 * h, b as f64 * h]);
                t1.push(y1 - y1.floor());
                t2.push(y2 - y2.floor());
            }
        }
        let tau = std::f64::consts::TAU;
        let step2 = t2.iter().map(|&y| C64::from_polar(1.0, -tau * y)).collect();
        let g_max = g_samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            grid: *grid,
            plan: FourierPlan::new(fine)?,
            image: [t1, t2],
            step2,
            g: g_samples,
            g_max,
            kernel,
            map_label: String::new(),
            kernel_label,
        })
    }

    pub fn labelled(mut self, map_label: impl Into<String>) -> Self {
        self.map_label = map_label.into();
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn observable_samples(&self) -> &[f64] {
        &self.g
    }

    pub fn kernel_coefficients(&self) -> &SpectralVector<f64> {
        &self.kernel
    }

    /// Replaces the observable samples, e.g. by a centred version.
    pub fn set_observable(&mut self, g: Vec<f64>) -> Result<()> {
        if g.len() != self.g.len() {
            return Err(Error::DimensionMismatch {
                expected: self.g.len(),
                actual: g.len(),
            });
        }
        self.g_max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.g = g;
        Ok(())
    }

    pub fn assemble(&self, z: C64) -> Result<OperatorMatrix> {
        let guard = z.re.abs() * self.g_max;
        if guard > EXP_GUARD {
            return Err(Error::Overflow(guard));
        }
        let (n, fine) = (self.grid.coarse, self.grid.fine);
        let dim = n * n;
        let weight: Vec<C64> = self.g.iter().map(|&g| (z * g).exp()).collect();
        let freqs: Vec<i64> = axis_freqs(n).map(|k| -k).collect();
        let j_first = axis_freqs(n).next().unwrap_or(0);
        let tau = std::f64::consts::TAU;

        let mut entries = vec![C64::default(); dim * dim];
        entries
            .par_chunks_mut(n * dim)
            .zip(axis_freqs(n).collect::<Vec<_>>())
            .for_each(|(block, j1)| {
                let mut cur: Vec<C64> = weight
                    .iter()
                    .zip(&self.image[0])
                    .zip(&self.image[1])
                    .map(|((w, &y1), &y2)| {
                        w * C64::from_polar(1.0, -tau * (j1 as f64 * y1 + j_first as f64 * y2))
                    })
                    .collect();
                let mut buf = vec![C64::default(); fine * fine];
                let mut scratch = Vec::new();
                for (r, row) in block.chunks_mut(dim).enumerate() {
                    let j2 = j_first + r as i64;
                    for ((b, c), s) in buf.iter_mut().zip(cur.iter_mut()).zip(&self.step2) {
                        *b = *c;
                        *c *= s;
                    }
                    self.plan.forward_block(&mut buf, &freqs, row, &mut scratch);
                    let q = self.kernel.get(FreqIndex::new(j1, j2));
                    row.iter_mut().for_each(|e| *e *= q);
                }
            });

        OperatorMatrix::from_entries(
            n,
            entries,
            OperatorMeta {
                map: self.map_label.clone(),
                kernel: self.kernel_label.clone(),
                z: [z.re, z.im],
                grid: self.grid,
            },
        )
    }
}

/// One-shot assembly of the twisted operator.
pub fn assemble(
    map: &MapModel<f64>,
    kernel: &KernelSpec<f64>,
    g: &Observable<f64>,
    z: C64,
    grid: &GridSpec,
) -> Result<OperatorMatrix> {
    Assembler::new(map, kernel, g, grid)?.labelled(map.label()).assemble(z)
}
