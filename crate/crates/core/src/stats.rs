//! Leading eigendata, SRB densities, CLT variances and large-deviation rate
//! functions computed from assembled operators.

use std::cell::RefCell;
use std::collections::HashMap;

use faer::linalg::solvers::Solve;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{coarse_index, riemann_sum, FourierPlan, FreqIndex, GridSpec, SpatialGrid, SpectralVector};
use crate::kernels::KernelSpec;
use crate::operator::{Assembler, OperatorMatrix};
use crate::torus::{MapModel, Observable};

type C64 = Complex<f64>;

/// Coarse orders up to this use the dense eigensolver.
pub const DENSE_MAX_ORDER: usize = 32;
pub const POWER_MAX_ITERATIONS: usize = 10_000;
pub const POWER_TOLERANCE: f64 = 1e-12;
/// Condition estimates above this make the variance solve fail.
pub const CONDITION_LIMIT: f64 = 1e14;
pub const DEFAULT_Z_BRACKET: [f64; 2] = [-4.0, 4.0];
pub const GOLDEN_TOLERANCE: f64 = 1e-6;
pub const BOUNDARY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenMethod {
    Dense,
    Power,
}

#[derive(Debug, Clone)]
pub struct EigenData {
    pub lambda: C64,
    pub right_vector: SpectralVector<f64>,
    /// `‖M v − λ v‖ / ‖v‖`.
    pub residual: f64,
    pub method: EigenMethod,
    pub iterations: usize,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn matvec(dim: usize, a: &[C64], v: &[C64], out: &mut [C64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i * dim..(i + 1) * dim]
            .iter()
            .zip(v)
            .fold(C64::default(), |acc, (x, y)| acc + x * y);
    }
}

fn residual_of(apply: &dyn Fn(&[C64], &mut [C64]), lambda: C64, v: &[C64]) -> f64 {
    let mut mv = vec![C64::default(); v.len()];
    apply(v, &mut mv);
    let r: f64 = mv.iter().zip(v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum();
    r.sqrt() / norm(v)
}

/// Scales `v` so that entry `zero` is 1, or to unit norm when that entry
/// vanishes.
fn normalise(v: &mut [C64], zero: usize) {
    let nv = norm(v);
    let pivot = v[zero];
    if pivot.norm() > 1e-14 * nv {
        v.iter_mut().for_each(|c| *c /= pivot);
    } else if nv > 0.0 {
        v.iter_mut().for_each(|c| *c /= nv);
    }
}

/// Orders eigenvalues by modulus, then real part, then imaginary part.
fn dominates(a: C64, b: C64) -> bool {
    let (ma, mb) = (a.norm(), b.norm());
    let tie = 1e-12 * ma.max(mb);
    if (ma - mb).abs() > tie {
        return ma > mb;
    }
    if a.re != b.re {
        return a.re > b.re;
    }
    a.im > b.im
}

/// Leading eigenpair of a dense row-major `dim × dim` matrix.
pub fn dense_leading(dim: usize, a: &[C64], zero: usize) -> Result<(C64, Vec<C64>, f64)> {
    if a.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            actual: a.len(),
        });
    }
    let m = faer::Mat::<C64>::from_fn(dim, dim, |i, k| a[i * dim + k]);
    let eig = m.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = eig.S().column_vector();
    let mut best = 0;
    for i in 1..dim {
        if dominates(s[i], s[best]) {
            best = i;
        }
    }
    let lambda = s[best];
    let u = eig.U();
    let mut v: Vec<C64> = (0..dim).map(|i| u[(i, best)]).collect();
    normalise(&mut v, zero);
    let res = residual_of(&|x, out| matvec(dim, a, x, out), lambda, &v);
    Ok((lambda, v, res))
}

/// Power iteration with a Rayleigh-quotient eigenvalue estimate.
pub fn power_leading(
    dim: usize,
    apply: &dyn Fn(&[C64], &mut [C64]),
    start: &[C64],
    zero: usize,
) -> Result<(C64, Vec<C64>, f64, usize)> {
    let mut v = start.to_vec();
    let nv = norm(&v);
    if nv == 0.0 || v.len() != dim {
        return Err(Error::InvalidParameter("power iteration needs a nonzero start vector".into()));
    }
    v.iter_mut().for_each(|c| *c /= nv);
    let mut w = vec![C64::default(); dim];
    let mut lambda = C64::default();
    let mut residual = f64::INFINITY;
    for it in 1..=POWER_MAX_ITERATIONS {
        apply(&v, &mut w);
        let rq = v.iter().zip(&w).fold(C64::default(), |acc, (a, b)| acc + a.conj() * b);
        residual = w.iter().zip(&v).map(|(b, a)| (b - rq * a).norm_sqr()).sum::<f64>().sqrt();
        let change = (rq - lambda).norm();
        lambda = rq;
        if change <= POWER_TOLERANCE * lambda.norm() && residual <= 1e-11 * lambda.norm().max(1e-300) {
            normalise(&mut v, zero);
            let res = residual_of(apply, lambda, &v);
            return Ok((lambda, v, res, it));
        }
        let nw = norm(&w);
        if nw == 0.0 {
            return Err(Error::Eigen("iterate collapsed to zero".into()));
        }
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / nw;
        }
    }
    Err(Error::NotConverged {
        iterations: POWER_MAX_ITERATIONS,
        residual,
    })
}

fn zero_slot(n: usize) -> usize {
    coarse_index(n, FreqIndex::ZERO).unwrap_or(0)
}

/// Leading eigenpair, dense for `n <= DENSE_MAX_ORDER` and power iteration
/// above.
pub fn leading_eigenpair(m: &OperatorMatrix) -> Result<EigenData> {
    let method = if m.order() <= DENSE_MAX_ORDER {
        EigenMethod::Dense
    } else {
        EigenMethod::Power
    };
    leading_eigenpair_with(m, method, None)
}

/// Leading eigenpair with an explicit method; `start` seeds power iteration
/// (default `e_(0,0)`).
pub fn leading_eigenpair_with(m: &OperatorMatrix, method: EigenMethod, start: Option<&[C64]>) -> Result<EigenData> {
    let (n, dim) = (m.order(), m.dim());
    let zero = zero_slot(n);
    let (lambda, v, residual, iterations) = match method {
        EigenMethod::Dense => {
            let (l, v, r) = dense_leading(dim, m.entries(), zero)?;
            (l, v, r, 1)
        }
        EigenMethod::Power => {
            let mut e0 = vec![C64::default(); dim];
            e0[zero] = C64::new(1.0, 0.0);
            let start = start.filter(|s| s.len() == dim && norm(s) > 0.0).unwrap_or(&e0);
            power_leading(dim, &|x, out| m.apply_slice(x, out), start, zero)?
        }
    };
    Ok(EigenData {
        lambda,
        right_vector: SpectralVector::from_coeffs(n, v)?,
        residual,
        method,
        iterations,
    })
}

/// Real density on the fine grid together with the eigendata behind it.
#[derive(Debug, Clone)]
pub struct Density {
    pub fine: usize,
    pub values: Vec<f64>,
    /// Largest imaginary part thrown away when taking real parts.
    pub max_abs_imag: f64,
    pub eigen: EigenData,
}

impl Density {
    pub fn mass(&self) -> f64 {
        riemann_sum(&self.values)
    }
}

fn density_from(eigen: EigenData, grid: &GridSpec) -> Result<Density> {
    let plan = FourierPlan::new(grid.fine)?;
    let spatial = plan.evaluate(&eigen.right_vector)?;
    Ok(Density {
        fine: grid.fine,
        max_abs_imag: spatial.max_abs_imag(),
        values: spatial.real_parts(),
        eigen,
    })
}

/// Leading right eigenvector of `M0` with unit mass, on the fine grid.
pub fn srb_density(m0: &OperatorMatrix, grid: &GridSpec) -> Result<Density> {
    density_from(leading_eigenpair(m0)?, grid)
}

/// `g − A` on the fine grid with `A = ∫ g v`.
pub fn center_samples(g: &[f64], density: &[f64]) -> (Vec<f64>, f64) {
    let weighted: Vec<f64> = g.iter().zip(density).map(|(a, b)| a * b).collect();
    let shift = riemann_sum(&weighted);
    (g.iter().map(|v| v - shift).collect(), shift)
}

/// Centres `g` against the SRB estimate of `M0`.
pub fn centered_observable(g: &Observable<f64>, m0: &OperatorMatrix, grid: &GridSpec) -> Result<(Vec<f64>, f64)> {
    let density = srb_density(m0, grid)?;
    Ok(center_samples(&g.sample(grid.fine), &density.values))
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceResult {
    pub sigma2: f64,
    pub mean_shift: f64,
    pub solve_residual: f64,
    pub condition_estimate: f64,
    pub lambda: [f64; 2],
    pub eigen_residual: f64,
    pub max_density_imag: f64,
    pub n: usize,
    pub fine: usize,
    pub kernel: String,
}

/// Coarse coefficients of real fine-grid samples.
fn coarse_coefficients(plan: &FourierPlan<f64>, n: usize, samples: &[f64]) -> Result<SpectralVector<f64>> {
    let spectrum = plan.forward(&SpatialGrid::from_real(plan.fine(), samples)?)?;
    crate::grid::restrict_to_coarse(&spectrum, n)
}

/// Variance from an already assembled `M0`.
///
/// Solves `(Id − M0) w = M0 (g_c v)` on the mean-zero subspace by replacing
/// the `(0,0)` row of `Id − M0` with the unit row and zeroing the matching
/// right-hand side, then integrates `g_c² v + 2 g_c w` on the fine grid.
pub fn variance_from_operator(m0: &OperatorMatrix, g: &Observable<f64>, grid: &GridSpec) -> Result<VarianceResult> {
    let (n, dim) = (m0.order(), m0.dim());
    let plan = FourierPlan::new(grid.fine)?;
    let density = srb_density(m0, grid)?;
    let (gc, shift) = center_samples(&g.sample(grid.fine), &density.values);

    let gv: Vec<f64> = gc.iter().zip(&density.values).map(|(a, b)| a * b).collect();
    let gv_hat = coarse_coefficients(&plan, n, &gv)?;
    let mut b = vec![C64::default(); dim];
    m0.apply_slice(gv_hat.coeffs(), &mut b);
    let zero = zero_slot(n);
    b[zero] = C64::default();

    let e = m0.entries();
    let a = faer::Mat::<C64>::from_fn(dim, dim, |i, k| {
        if i == zero {
            if k == zero {
                C64::new(1.0, 0.0)
            } else {
                C64::default()
            }
        } else {
            let id = if i == k { 1.0 } else { 0.0 };
            C64::new(id, 0.0) - e[i * dim + k]
        }
    });
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let (mut umax, mut umin) = (0.0f64, f64::INFINITY);
    for i in 0..dim {
        let d = u[(i, i)].norm();
        umax = umax.max(d);
        umin = umin.min(d);
    }
    let condition = if umin > 0.0 { umax / umin } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::Singular { condition });
    }
    let rhs = faer::Mat::<C64>::from_fn(dim, 1, |i, _| b[i]);
    let sol = lu.solve(&rhs);
    let w: Vec<C64> = (0..dim).map(|i| sol[(i, 0)]).collect();
    drop(a);

    let mut mw = vec![C64::default(); dim];
    m0.apply_slice(&w, &mut mw);
    let solve_residual = (0..dim)
        .filter(|&i| i != zero)
        .map(|i| (w[i] - mw[i] - b[i]).norm_sqr())
        .sum::<f64>()
        .sqrt();

    let w_spatial = plan.evaluate(&SpectralVector::from_coeffs(n, w)?)?.real_parts();
    let integrand: Vec<f64> = gc
        .iter()
        .zip(&density.values)
        .zip(&w_spatial)
        .map(|((g, v), w)| g * g * v + 2.0 * g * w)
        .collect();
    let sigma2 = riemann_sum(&integrand);
    if sigma2 < -1e-8 {
        return Err(Error::Domain(format!("negative variance {sigma2}")));
    }
    Ok(VarianceResult {
        sigma2,
        mean_shift: shift,
        solve_residual,
        condition_estimate: condition,
        lambda: [density.eigen.lambda.re, density.eigen.lambda.im],
        eigen_residual: density.eigen.residual,
        max_density_imag: density.max_abs_imag,
        n,
        fine: grid.fine,
        kernel: m0.meta().kernel.clone(),
    })
}

/// CLT variance of `g` for the smoothed operator of `map`.
pub fn variance(map: &MapModel<f64>, kernel: &KernelSpec<f64>, g: &Observable<f64>, grid: &GridSpec) -> Result<VarianceResult> {
    let m0 = Assembler::new(map, kernel, g, grid)?
        .labelled(map.label())
        .assemble(C64::default())?;
    variance_from_operator(&m0, g, grid)
}

/// `λ(z)` for real twists of one (map, kernel, observable) triple, with `g`
/// centred once against the untwisted SRB estimate. Values are memoised
/// and power iteration is warm-started from the last eigenvector.
pub struct TwistedSpectrum {
    assembler: Assembler,
    mean_shift: f64,
    method: EigenMethod,
    cache: RefCell<HashMap<u64, C64>>,
    last_vector: RefCell<Option<Vec<C64>>>,
}

impl std::fmt::Debug for TwistedSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwistedSpectrum")
            .field("assembler", &self.assembler)
            .field("mean_shift", &self.mean_shift)
            .field("method", &self.method)
            .finish()
    }
}

impl TwistedSpectrum {
    pub fn new(map: &MapModel<f64>, kernel: &KernelSpec<f64>, g: &Observable<f64>, grid: &GridSpec) -> Result<Self> {
        let mut assembler = Assembler::new(map, kernel, g, grid)?.labelled(map.label());
        let m0 = assembler.assemble(C64::default())?;
        let density = srb_density(&m0, grid)?;
        let (gc, shift) = center_samples(assembler.observable_samples(), &density.values);
        assembler.set_observable(gc)?;
        let method = if grid.coarse <= DENSE_MAX_ORDER {
            EigenMethod::Dense
        } else {
            EigenMethod::Power
        };
        Ok(Self {
            assembler,
            mean_shift: shift,
            method,
            cache: RefCell::new(HashMap::new()),
            last_vector: RefCell::new(None),
        })
    }

    pub fn mean_shift(&self) -> f64 {
        self.mean_shift
    }

    pub fn with_method(mut self, method: EigenMethod) -> Self {
        self.method = method;
        self
    }

    pub fn lambda(&self, z: f64) -> Result<C64> {
        if let Some(l) = self.cache.borrow().get(&z.to_bits()) {
            return Ok(*l);
        }
        let m = self.assembler.assemble(C64::new(z, 0.0))?;
        let start = self.last_vector.borrow().clone();
        let eig = leading_eigenpair_with(&m, self.method, start.as_deref())?;
        *self.last_vector.borrow_mut() = Some(eig.right_vector.coeffs().to_vec());
        self.cache.borrow_mut().insert(z.to_bits(), eig.lambda);
        Ok(eig.lambda)
    }

    /// `Λ(z) = ln|λ(z)|`.
    pub fn log_lambda(&self, z: f64) -> Result<f64> {
        Ok(self.lambda(z)?.norm().ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaPoint {
    pub z: f64,
    pub lambda: [f64; 2],
}

/// Leading eigenvalue of the twisted operator at each real `z`.
pub fn lambda_curve(
    map: &MapModel<f64>,
    kernel: &KernelSpec<f64>,
    g: &Observable<f64>,
    grid: &GridSpec,
    z_values: &[f64],
) -> Result<Vec<LambdaPoint>> {
    let spec = TwistedSpectrum::new(map, kernel, g, grid)?;
    z_values
        .iter()
        .map(|&z| {
            let l = spec.lambda(z)?;
            Ok(LambdaPoint { z, lambda: [l.re, l.im] })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub s: f64,
    pub z_star: f64,
    pub r: f64,
    pub iterations: usize,
    pub at_bracket_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// `Λ''(0)` by central difference, the quadratic scale of `r` near 0.
    pub sigma2_used_for_centering: f64,
    pub mean_shift: f64,
    /// Bracket in force after any expansion.
    pub z_bracket: [f64; 2],
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

struct Maximum {
    z: f64,
    value: f64,
    evaluations: usize,
}

/// Golden-section maximisation of a unimodal `f` on `[lo, hi]`, after
/// walking outwards from `start` to localise the peak.
fn maximise(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64, start: f64) -> Result<Maximum> {
    let mut evaluations = 0;
    let mut eval = |z: f64| {
        evaluations += 1;
        f(z)
    };
    let start = start.clamp(lo, hi);
    let f0 = eval(start)?;
    let h0 = 0.05;
    // direction of ascent
    let right = (start + h0).min(hi);
    let left = (start - h0).max(lo);
    let fr = if right > start { eval(right)? } else { f64::NEG_INFINITY };
    let (mut a, mut b);
    if fr > f0 {
        let (mut prev, mut cur, mut fcur, mut h) = (start, right, fr, h0);
        loop {
            if cur >= hi {
                a = prev;
                b = hi;
                break;
            }
            h *= 2.0;
            let next = (cur + h).min(hi);
            let fnext = eval(next)?;
            if fnext < fcur {
                a = prev;
                b = next;
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
    } else {
        let fl = if left < start { eval(left)? } else { f64::NEG_INFINITY };
        if fl <= f0 {
            a = left;
            b = right;
        } else {
            let (mut prev, mut cur, mut fcur, mut h) = (start, left, fl, h0);
            loop {
                if cur <= lo {
                    a = lo;
                    b = prev;
                    break;
                }
                h *= 2.0;
                let next = (cur - h).max(lo);
                let fnext = eval(next)?;
                if fnext < fcur {
                    a = next;
                    b = prev;
                    break;
                }
                prev = cur;
                cur = next;
                fcur = fnext;
            }
        }
    }

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > GOLDEN_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    // the endpoints may beat the interior when the peak sits on the bracket
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for edge in [lo, hi] {
        if (best.0 - edge).abs() < 10.0 * GOLDEN_TOLERANCE {
            let fe = eval(edge)?;
            if fe > best.1 {
                best = (edge, fe);
            }
        }
    }
    Ok(Maximum {
        z: best.0,
        value: best.1,
        evaluations,
    })
}

/// Legendre transform `r(s) = sup_z (s z − Λ(z))` over a bracket, one row
/// per `s`, each search starting from the previous optimiser.
pub fn rate_function_from(spec: &TwistedSpectrum, s_values: &[f64], z_bracket: [f64; 2]) -> Result<RateTable> {
    let [mut lo, mut hi] = z_bracket;
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::InvalidParameter(format!("z bracket [{lo}, {hi}] must contain 0")));
    }
    if s_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("s values must be sorted ascending".into()));
    }
    let h = 1e-3;
    let l0 = spec.log_lambda(0.0)?;
    let sigma2 = (spec.log_lambda(h)? - 2.0 * l0 + spec.log_lambda(-h)?) / (h * h);

    let mut expanded = false;
    let mut rows = Vec::with_capacity(s_values.len());
    let mut warm = 0.0;
    for &s in s_values {
        let phi = |z: f64| -> Result<f64> { Ok(s * z - spec.log_lambda(z)?) };
        let mut best = maximise(&phi, lo, hi, warm)?;
        let mut iterations = best.evaluations;
        let on_edge = |z: f64, lo: f64, hi: f64| (z - lo).abs() < BOUNDARY_TOLERANCE || (z - hi).abs() < BOUNDARY_TOLERANCE;
        if on_edge(best.z, lo, hi) && !expanded {
            expanded = true;
            lo *= 2.0;
            hi *= 2.0;
            best = maximise(&phi, lo, hi, best.z)?;
            iterations += best.evaluations;
        }
        warm = best.z;
        rows.push(RateRow {
            s,
            z_star: best.z,
            r: best.value,
            iterations,
            at_bracket_boundary: on_edge(best.z, lo, hi),
        });
    }
    Ok(RateTable {
        rows,
        sigma2_used_for_centering: sigma2,
        mean_shift: spec.mean_shift(),
        z_bracket: [lo, hi],
    })
}

pub fn rate_function(
    map: &MapModel<f64>,
    kernel: &KernelSpec<f64>,
    g: &Observable<f64>,
    grid: &GridSpec,
    s_values: &[f64],
    z_bracket: [f64; 2],
) -> Result<RateTable> {
    let spec = TwistedSpectrum::new(map, kernel, g, grid)?;
    rate_function_from(&spec, s_values, z_bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{assemble, OperatorMeta};
    use crate::torus::CatForm;

    fn meta(n: usize) -> OperatorMeta {
        OperatorMeta {
            map: "test".into(),
            kernel: "none".into(),
            z: [0.0, 0.0],
            grid: GridSpec { coarse: n, fine: n },
        }
    }

    #[test]
    fn diagonal_test_matrix() {
        let a = [C64::new(2.0, 0.0), C64::default(), C64::default(), C64::new(1.0, 0.0)];
        let (l, v, r) = dense_leading(2, &a, 0).unwrap();
        assert_eq!(l, C64::new(2.0, 0.0));
        assert_eq!(r, 0.0);
        assert_eq!(v[1], C64::default());
        let (l, _, r, _) = power_leading(2, &|x, out| matvec(2, &a, x, out), &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)], 0).unwrap();
        assert!((l - C64::new(2.0, 0.0)).norm() < 1e-12 && r < 1e-10, "{l} {r}");
    }

    #[test]
    fn tie_break_prefers_real_part() {
        assert!(dominates(C64::new(1.0, 0.0), C64::new(-1.0, 0.0)));
        assert!(dominates(C64::new(0.0, 1.0), C64::new(0.0, -1.0)));
        assert!(!dominates(C64::new(0.5, 0.0), C64::new(0.0, 0.6)));
    }

    #[test]
    fn cat_map_has_lebesgue_srb() {
        let grid = GridSpec::new(8, 32).unwrap();
        let m = assemble(&MapModel::cat(), &KernelSpec::Fejer, &Observable::cos_sin(), C64::default(), &grid).unwrap();
        let d = srb_density(&m, &grid).unwrap();
        assert!((d.eigen.lambda - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(d.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let (_, shift) = centered_observable(&Observable::cos_sin(), &m, &grid).unwrap();
        assert!(shift.abs() < 1e-12);
        let (gc, shift) = centered_observable(&Observable::constant(3.0), &m, &grid).unwrap();
        assert!((shift - 3.0).abs() < 1e-12 && gc.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dense_and_power_agree() {
        let grid = GridSpec::new(8, 32).unwrap();
        let map = MapModel::perturbed_cat(0.01, CatForm::Numerics);
        let m = assemble(&map, &KernelSpec::Fejer, &Observable::cos_sin(), C64::new(0.4, 0.0), &grid).unwrap();
        let d = leading_eigenpair_with(&m, EigenMethod::Dense, None).unwrap();
        let p = leading_eigenpair_with(&m, EigenMethod::Power, None).unwrap();
        assert!((d.lambda - p.lambda).norm() < 1e-10);
        assert!(d.residual < 1e-8 && p.residual < 1e-8);
        let diff: f64 = d.right_vector.coeffs().iter().zip(p.right_vector.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8);
    }

    #[test]
    fn linear_map_variance_is_one() {
        let grid = GridSpec::new(16, 64).unwrap();
        let v = variance(&MapModel::cat(), &KernelSpec::Fejer, &Observable::cos_sin(), &grid).unwrap();
        assert!((v.sigma2 - 1.0).abs() < 1e-8, "{v:?}");
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let f = |z: f64| -> Result<f64> { Ok(-(z - 1.3).powi(2)) };
        let m = maximise(&f, -4.0, 4.0, 0.0).unwrap();
        assert!((m.z - 1.3).abs() < 1e-6);
        let m = maximise(&f, -4.0, 1.0, -3.0).unwrap();
        assert!((m.z - 1.0).abs() < 1e-9);
        let g = |z: f64| -> Result<f64> { Ok(-(z + 2.0).powi(2)) };
        let m = maximise(&g, -4.0, 4.0, 3.9).unwrap();
        assert!((m.z + 2.0).abs() < 1e-6);
    }

    #[test]
    fn operator_dimension_checks() {
        assert!(OperatorMatrix::from_entries(2, vec![C64::default(); 15], meta(2)).is_err());
        let m = OperatorMatrix::from_entries(2, vec![C64::default(); 16], meta(2)).unwrap();
        assert_eq!(m.dim(), 4);
    }
}
