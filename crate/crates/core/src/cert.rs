//! Closed-form hyperbolicity certificate for the perturbed cat map
//! `T_δ(x) = (2x1 + x2, x1 + x2) + δ (cos 2πx1, sin(4πx2 + 1))`.
//!
//! Every check works from the worst-case derivative perturbation
//! `δ' = 4πδ`, which bounds both diagonal entries of `DT_δ - DT_0` for
//! either cosine amplitude, so the same report applies to both map forms.
//! Plain floating point throughout; margins are reported so the caller can
//! see the distance to failure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `(3 - √5)/2`, the contracting eigenvalue of the cat matrix.
pub fn stable_eigenvalue<T: Real>() -> T {
    (T::lit(3.0) - T::lit(5.0).sqrt()) / T::lit(2.0)
}

/// Worst-case size of the derivative perturbation, `4πδ`.
pub fn derivative_perturbation<T: Real>(delta: T) -> T {
    T::lit(2.0) * T::two_pi() * delta
}

/// Cone parameters shared by the preservation and contraction checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeParams<T> {
    pub alpha: T,
    pub lambda_s: T,
    pub delta_prime: T,
}

impl<T: Real> ConeParams<T> {
    pub fn new(delta: T, alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "cone aperture must lie in (0, 1), got {alpha}"
            )));
        }
        if delta < T::zero() {
            return Err(Error::InvalidParameter(format!("delta must be >= 0, got {delta}")));
        }
        Ok(Self {
            alpha,
            lambda_s: stable_eigenvalue(),
            delta_prime: derivative_perturbation(delta),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffeoCheck<T> {
    pub pass: bool,
    pub s_value: T,
}

/// Quantitative inverse-function bound
/// `s = 8πδ √(6 + (1 + 4πδ cos 1)²) / (1 - 8πδ)`; the lift is invertible
/// when `s < 1`. Returns `s = +∞` once `8πδ >= 1`.
pub fn diffeo_margin<T: Real>(delta: T) -> DiffeoCheck<T> {
    let eight_pi_delta = T::lit(4.0) * T::two_pi() * delta;
    if eight_pi_delta >= T::one() {
        return DiffeoCheck {
            pass: false,
            s_value: T::infinity(),
        };
    }
    let inner = T::one() + derivative_perturbation(delta) * T::one().cos();
    let s = eight_pi_delta * (T::lit(6.0) + inner * inner).sqrt() / (T::one() - eight_pi_delta);
    DiffeoCheck {
        pass: s < T::one(),
        s_value: s,
    }
}

/// Largest δ for which both the stable and the unstable cone of aperture
/// `alpha` are mapped into themselves: `α(1/λ - λ) / (4π(α + 1)²)`.
pub fn cone_preservation_max_delta<T: Real>(alpha: T) -> T {
    let lam = stable_eigenvalue::<T>();
    let one_plus = alpha + T::one();
    alpha * (lam.recip() - lam) / (T::lit(2.0) * T::two_pi() * one_plus * one_plus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `DT` on the stable cone.
    Forward,
    /// `DT^{-1}` on the unstable cone.
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionCheck<T> {
    pub pass: bool,
    pub worst_poly_value: T,
}

/// `|M(1, β)|² - D(1 + β²)` for `M = [[λ + a, b], [c, λ⁻¹ + d]]`, where `D`
/// is 1 for the forward map and the determinant lower bound for the inverse.
fn contraction_poly<T: Real>(beta: T, lam: T, unit: T, [a, b, c, d]: [T; 4]) -> T {
    let li = lam.recip() + d;
    let la = lam + a;
    let two = T::lit(2.0);
    beta * beta * (b * b + li * li - unit) + two * beta * (la * b + c * li) + (la * la + c * c - unit)
}

/// Lower bound `1 - (5/2)δ' - δ'²/2` on `det DT_δ`.
fn determinant_lower_bound<T: Real>(dp: T) -> T {
    T::one() - T::lit(2.5) * dp - dp * dp / T::lit(2.0)
}

/// Worst value over the admissible perturbations of the contraction
/// quadratic at the cone edges `β = ±α`.
///
/// `a, b, c, d` range independently over `[-δ', δ']`. The quadratic is
/// convex in each of them, so its maximum sits on the `2⁴` corners; the
/// per-variable critical points are evaluated as well since they are cheap.
pub fn contraction_check<T: Real>(delta: T, alpha: T, direction: Direction) -> ContractionCheck<T> {
    let lam = stable_eigenvalue::<T>();
    let dp = derivative_perturbation(delta);
    let unit = match direction {
        Direction::Forward => T::one(),
        Direction::Inverse => determinant_lower_bound(dp),
    };
    let mut worst = T::neg_infinity();
    for beta in [alpha, -alpha] {
        for corner in 0..16u32 {
            let mut v = [T::zero(); 4];
            for (i, slot) in v.iter_mut().enumerate() {
                *slot = if corner >> i & 1 == 1 { dp } else { -dp };
            }
            worst = worst.max(contraction_poly(beta, lam, unit, v));
            // critical point of each coordinate with the others on the corner
            let crit = [
                -lam - beta * v[1],
                -(lam + v[0]) / beta,
                -beta * (lam.recip() + v[3]),
                -lam.recip() - v[2] / beta,
            ];
            for (i, &x) in crit.iter().enumerate() {
                if x.is_finite() && x.abs() <= dp {
                    let mut w = v;
                    w[i] = x;
                    worst = worst.max(contraction_poly(beta, lam, unit, w));
                }
            }
        }
    }
    // the quadratic opens upwards, so the edge values are its maxima on [-α, α]
    let convex = lam.recip() >= T::one() + dp;
    ContractionCheck {
        pass: convex && worst < T::zero(),
        worst_poly_value: worst,
    }
}

/// `β(α) = √2 α (3α + √(2 + 3α²)) √(1 + α√(2 + 3α²))`, the defect in the
/// equivalence between the adapted norm and the Euclidean one.
pub fn beta_alpha<T: Real>(alpha: T) -> T {
    let root = (T::lit(2.0) + T::lit(3.0) * alpha * alpha).sqrt();
    T::lit(2.0).sqrt() * alpha * (T::lit(3.0) * alpha + root) * (T::one() + alpha * root).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TranslateBound<T> {
    pub pass: bool,
    pub product_bound: T,
}

/// Upper bound on `C_{τ,0} Θ_{T,0}`; the translate condition holds when it
/// is below one.
pub fn translate_bound_product<T: Real>(alpha: T) -> Result<TranslateBound<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let a2 = alpha * alpha;
    let base = (T::one() - a2) * (T::one() - a2);
    let beta = beta_alpha(alpha);
    if base <= beta {
        return Err(Error::Domain(format!(
            "norm equivalence degenerates at alpha = {alpha}: (1-α²)² = {base} <= β(α) = {beta}"
        )));
    }
    let equivalence = (base + beta) / (base - beta);
    let projection =
        (T::lit(4.0) * alpha * (T::one() - a2) * (T::one() + a2).sqrt() + a2 * (T::one() + a2)) / base;
    let product = equivalence * projection;
    Ok(TranslateBound {
        pass: product < T::one(),
        product_bound: product,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeCheck<T> {
    pub pass: bool,
    pub max_delta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport<T> {
    pub delta: T,
    pub alpha: T,
    pub diffeo: DiffeoCheck<T>,
    pub cone_preservation: ConeCheck<T>,
    pub forward_contraction: ContractionCheck<T>,
    pub inverse_contraction: ContractionCheck<T>,
    pub translate_bound: TranslateBound<T>,
    pub overall: bool,
}

fn finite_or_max<T: Real>(v: T) -> T {
    if v.is_finite() {
        v
    } else if v.is_nan() || v > T::zero() {
        T::max_value()
    } else {
        T::min_value()
    }
}

/// Runs every check for the map `T_δ` with cone aperture `alpha`.
///
/// Domain failures of individual checks (an out-of-range `alpha`, a
/// degenerate norm equivalence) show up as failed checks whose margin is the
/// largest finite value rather than as an error.
pub fn certify<T: Real>(delta: T, alpha: T) -> CertificateReport<T> {
    let diffeo = diffeo_margin(delta);
    let diffeo = DiffeoCheck {
        pass: diffeo.pass && delta >= T::zero(),
        s_value: finite_or_max(diffeo.s_value),
    };
    let aperture_ok = alpha > T::zero() && alpha < T::one();
    let max_delta = cone_preservation_max_delta(alpha);
    let cone_preservation = ConeCheck {
        pass: aperture_ok && delta <= max_delta,
        max_delta: finite_or_max(max_delta),
    };
    let contraction = |dir| {
        let c = contraction_check(delta, alpha, dir);
        ContractionCheck {
            pass: c.pass && aperture_ok,
            worst_poly_value: finite_or_max(c.worst_poly_value),
        }
    };
    let forward_contraction = contraction(Direction::Forward);
    let inverse_contraction = contraction(Direction::Inverse);
    let translate_bound = translate_bound_product(alpha)
        .map(|t| TranslateBound {
            pass: t.pass,
            product_bound: finite_or_max(t.product_bound),
        })
        .unwrap_or(TranslateBound {
            pass: false,
            product_bound: T::max_value(),
        });
    let overall = diffeo.pass
        && cone_preservation.pass
        && forward_contraction.pass
        && inverse_contraction.pass
        && translate_bound.pass;
    CertificateReport {
        delta,
        alpha,
        diffeo,
        cone_preservation,
        forward_contraction,
        inverse_contraction,
        translate_bound,
        overall,
    }
}

/// Bisection for the boundary of a predicate that holds at `lo` and fails
/// at `hi`; returns the midpoint of the final bracket.
pub fn bisect_boundary<T: Real>(mut lo: T, mut hi: T, tol: T, holds: impl Fn(T) -> bool) -> Result<T> {
    if !holds(lo) || holds(hi) {
        return Err(Error::NoRoot {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    // the iteration cap stops at the scalar's resolution when `tol` is finer
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Largest δ (to `1e-9`) for which [`certify`] passes at aperture `alpha`.
pub fn certified_delta_threshold<T: Real>(alpha: T) -> Result<T> {
    bisect_boundary(T::zero(), T::lit(0.1), T::lit(1e-9), |d| certify(d, alpha).overall)
}

/// Largest δ for which the contraction check in `direction` passes.
pub fn contraction_threshold<T: Real>(alpha: T, direction: Direction) -> Result<T> {
    bisect_boundary(T::zero(), T::lit(0.5), T::lit(1e-9), |d| {
        contraction_check(d, alpha, direction).pass
    })
}

/// Aperture at which the translate-bound product reaches one.
pub fn translate_alpha_threshold<T: Real>() -> Result<T> {
    bisect_boundary(T::lit(1e-6), T::lit(0.3), T::lit(1e-10), |a| {
        translate_bound_product(a).map(|t| t.pass).unwrap_or(false)
    })
}
