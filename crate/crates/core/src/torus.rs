//! Points of the 2-torus, the map family and observables.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{wrap_unit, Real};

/// A point of `R^2 / Z^2`, coordinates kept in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint<T> {
    x1: T,
    x2: T,
}

impl<T: Real> TorusPoint<T> {
    pub fn new(x1: T, x2: T) -> Self {
        Self {
            x1: wrap_unit(x1),
            x2: wrap_unit(x2),
        }
    }

    #[inline]
    pub fn x1(&self) -> T {
        self.x1
    }

    #[inline]
    pub fn x2(&self) -> T {
        self.x2
    }

    #[inline]
    pub fn coords(&self) -> [T; 2] {
        [self.x1, self.x2]
    }

    /// Representative of the point in `[-1/2, 1/2)^2`.
    pub fn centered(&self) -> [T; 2] {
        let half = T::lit(0.5);
        let c = |v: T| if v >= half { v - T::one() } else { v };
        [c(self.x1), c(self.x2)]
    }
}

/// Something that maps the torus to itself and can be differentiated.
pub trait ToralMap<T: Real>: Send + Sync {
    /// The map on the universal cover, without reduction mod 1.
    fn lift(&self, x: [T; 2]) -> [T; 2];

    /// `DT` at `x`, row `i` holding the partials of component `i`.
    fn jacobian(&self, x: [T; 2]) -> [[T; 2]; 2];

    fn apply(&self, p: TorusPoint<T>) -> TorusPoint<T> {
        let [y1, y2] = self.lift(p.coords());
        TorusPoint::new(y1, y2)
    }
}

/// Which of the two published amplitudes the cosine term of the perturbed
/// cat map carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatForm {
    /// `(2x1 + x2 + 2δ cos 2πx1, x1 + x2 + δ sin(4πx2 + 1))`, used for the
    /// numerical experiments.
    Numerics,
    /// `(2x1 + x2 + δ cos 2πx1, x1 + x2 + δ sin(4πx2 + 1))`, the form the
    /// hyperbolicity certificate is stated for.
    Certificate,
}

impl CatForm {
    fn cosine_amplitude<T: Real>(self, delta: T) -> T {
        match self {
            CatForm::Numerics => delta + delta,
            CatForm::Certificate => delta,
        }
    }
}

/// The map family.
#[derive(Debug, Clone, PartialEq)]
pub enum MapModel<T> {
    /// `x ↦ A x mod 1` for an integer matrix with `|det A| = 1`.
    LinearToral { matrix: [[i64; 2]; 2] },
    /// Arnold's cat map plus a smooth perturbation of size `delta`.
    PerturbedCat { delta: T, form: CatForm },
    /// Rigid rotation `x ↦ x + shift`. Not hyperbolic; used to test the
    /// box discretisation.
    Translation { shift: [T; 2] },
}

pub const CAT_MATRIX: [[i64; 2]; 2] = [[2, 1], [1, 1]];

impl<T: Real> MapModel<T> {
    pub fn linear(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det.abs() != 1 {
            return Err(Error::InvalidParameter(format!(
                "linear toral map needs |det A| = 1, got det = {det}"
            )));
        }
        Ok(MapModel::LinearToral { matrix })
    }

    pub fn cat() -> Self {
        MapModel::LinearToral { matrix: CAT_MATRIX }
    }

    pub fn identity() -> Self {
        MapModel::LinearToral {
            matrix: [[1, 0], [0, 1]],
        }
    }

    pub fn perturbed_cat(delta: T, form: CatForm) -> Self {
        MapModel::PerturbedCat { delta, form }
    }

    /// Short identifier used in output metadata.
    pub fn label(&self) -> String {
        match self {
            MapModel::LinearToral { matrix } => format!(
                "linear[[{},{}],[{},{}]]",
                matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]
            ),
            MapModel::PerturbedCat { delta, form } => {
                let f = match form {
                    CatForm::Numerics => "numerics",
                    CatForm::Certificate => "certificate",
                };
                format!("perturbed-cat(delta={delta},form={f})")
            }
            MapModel::Translation { shift } => format!("translation({},{})", shift[0], shift[1]),
        }
    }
}

impl<T: Real> ToralMap<T> for MapModel<T> {
    fn lift(&self, x: [T; 2]) -> [T; 2] {
        match self {
            MapModel::LinearToral { matrix } => {
                let a = |i: usize, j: usize| T::from_i64_lossy(matrix[i][j]);
                [
                    a(0, 0) * x[0] + a(0, 1) * x[1],
                    a(1, 0) * x[0] + a(1, 1) * x[1],
                ]
            }
            MapModel::PerturbedCat { delta, form } => {
                let tau = T::two_pi();
                let amp = form.cosine_amplitude(*delta);
                let two = T::lit(2.0);
                [
                    two * x[0] + x[1] + amp * (tau * x[0]).cos(),
                    x[0] + x[1] + *delta * (two * tau * x[1] + T::one()).sin(),
                ]
            }
            MapModel::Translation { shift } => [x[0] + shift[0], x[1] + shift[1]],
        }
    }

    fn jacobian(&self, x: [T; 2]) -> [[T; 2]; 2] {
        match self {
            MapModel::LinearToral { matrix } => {
                let a = |i: usize, j: usize| T::from_i64_lossy(matrix[i][j]);
                [[a(0, 0), a(0, 1)], [a(1, 0), a(1, 1)]]
            }
            MapModel::PerturbedCat { delta, form } => {
                let tau = T::two_pi();
                let amp = form.cosine_amplitude(*delta);
                let two = T::lit(2.0);
                [
                    [two - amp * tau * (tau * x[0]).sin(), T::one()],
                    [
                        T::one(),
                        T::one() + *delta * two * tau * (two * tau * x[1] + T::one()).cos(),
                    ],
                ]
            }
            MapModel::Translation { .. } => [[T::one(), T::zero()], [T::zero(), T::one()]],
        }
    }
}

pub fn eval_map<T: Real, M: ToralMap<T> + ?Sized>(map: &M, p: TorusPoint<T>) -> TorusPoint<T> {
    map.apply(p)
}

/// Frequency pair `(j1, j2)` of the mode `exp(2πi j·x)`.
pub type Mode = (i64, i64);

type PointFn<T> = dyn Fn([T; 2]) -> T + Send + Sync;

/// A real-valued function on the torus.
#[derive(Clone)]
pub enum Observable<T> {
    /// Finite Fourier sum `Σ c(j) exp(2πi j·x)` with `c(-j) = conj c(j)`.
    TrigPolynomial(BTreeMap<Mode, Complex<T>>),
    /// Arbitrary pointwise evaluation.
    Callable(Arc<PointFn<T>>),
}

impl<T: Real> fmt::Debug for Observable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::TrigPolynomial(modes) => f.debug_tuple("TrigPolynomial").field(modes).finish(),
            Observable::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

impl<T: Real> Observable<T> {
    /// Builds a trigonometric polynomial, rejecting amplitudes that break
    /// conjugate symmetry by more than `1e-12` relative to the largest one.
    pub fn trig(modes: BTreeMap<Mode, Complex<T>>) -> Result<Self> {
        let scale = modes
            .values()
            .map(|c| c.norm())
            .fold(T::zero(), T::max)
            .max(T::one());
        let tol = T::lit(1e-12) * scale;
        for (&(j1, j2), c) in &modes {
            let partner = modes.get(&(-j1, -j2)).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > tol {
                return Err(Error::InvalidParameter(format!(
                    "amplitude at ({j1},{j2}) has no conjugate partner"
                )));
            }
        }
        Ok(Observable::TrigPolynomial(modes))
    }

    pub fn callable<F>(f: F) -> Self
    where
        F: Fn([T; 2]) -> T + Send + Sync + 'static,
    {
        Observable::Callable(Arc::new(f))
    }

    pub fn constant(c: T) -> Self {
        Observable::TrigPolynomial(BTreeMap::from([((0, 0), Complex::new(c, T::zero()))]))
    }

    /// `cos(4πx1) + sin(2πx2)`, the observable of the reference experiments.
    pub fn cos_sin() -> Self {
        let half = T::lit(0.5);
        let zero = T::zero();
        Observable::TrigPolynomial(BTreeMap::from([
            ((2, 0), Complex::new(half, zero)),
            ((-2, 0), Complex::new(half, zero)),
            ((0, 1), Complex::new(zero, -half)),
            ((0, -1), Complex::new(zero, half)),
        ]))
    }

    pub fn eval(&self, p: TorusPoint<T>) -> T {
        self.eval_at(p.coords())
    }

    /// Evaluates at an unreduced coordinate pair.
    pub fn eval_at(&self, x: [T; 2]) -> T {
        match self {
            Observable::TrigPolynomial(modes) => {
                let tau = T::two_pi();
                modes
                    .iter()
                    .map(|(&(j1, j2), c)| {
                        let phase =
                            tau * (T::from_i64_lossy(j1) * x[0] + T::from_i64_lossy(j2) * x[1]);
                        c.re * phase.cos() - c.im * phase.sin()
                    })
                    .fold(T::zero(), |a, b| a + b)
            }
            Observable::Callable(f) => f(x),
        }
    }

    /// Values at `(a/N, b/N)`, row-major in `a`.
    pub fn sample(&self, fine: usize) -> Vec<T> {
        let step = T::one() / T::from_usize_lossy(fine);
        let mut out = Vec::with_capacity(fine * fine);
        for a in 0..fine {
            let x1 = T::from_usize_lossy(a) * step;
            for b in 0..fine {
                out.push(self.eval_at([x1, T::from_usize_lossy(b) * step]));
            }
        }
        out
    }

    pub fn label(&self) -> String {
        match self {
            Observable::TrigPolynomial(modes) => {
                let parts: Vec<String> = modes
                    .iter()
                    .map(|((j1, j2), c)| format!("({j1},{j2}):{}{:+}i", c.re, c.im))
                    .collect();
                format!("trig[{}]", parts.join(","))
            }
            Observable::Callable(_) => "callable".to_string(),
        }
    }
}

pub fn eval_observable<T: Real>(g: &Observable<T>, p: TorusPoint<T>) -> T {
    g.eval(p)
}
