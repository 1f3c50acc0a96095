//! Ulam's box discretisation of the transfer operator, used as a baseline.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::torus::{Observable, ToralMap};

pub const MAX_ITERATIONS: usize = 100_000;
const SRB_TOLERANCE: f64 = 1e-14;

/// Row-stochastic `m² × m²` transition matrix in compressed-row form.
/// Box `(a, b)` covers `[a/m, (a+1)/m) × [b/m, (b+1)/m)` and has index
/// `a * m + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamMatrix {
    m: usize,
    samples_per_box: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl UlamMatrix {
    pub fn boxes_per_side(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m * self.m
    }

    pub fn samples_per_box(&self) -> usize {
        self.samples_per_box
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(P u)_i = Σ_j P_ij u_j`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = self.row(i).map(|(j, p)| p * u[j]).sum();
        });
    }

    /// `(Pᵀ u)_j = Σ_i u_i P_ij`.
    pub fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &ui) in u.iter().enumerate() {
            for (j, p) in self.row(i) {
                out[j] += ui * p;
            }
        }
    }
}

fn lattice_side(k: usize) -> Option<usize> {
    let s = (k as f64).sqrt().round() as usize;
    (s > 0 && s * s == k).then_some(s)
}

/// Coordinates of the `k` sample points of box `(a, b)`.
fn box_samples(m: usize, side: usize, a: usize, b: usize) -> impl Iterator<Item = [f64; 2]> {
    let scale = (m * side) as f64;
    (0..side).flat_map(move |p| {
        (0..side).map(move |q| {
            [
                ((a * side + p) as f64 + 0.5) / scale,
                ((b * side + q) as f64 + 0.5) / scale,
            ]
        })
    })
}

fn check_params(m: usize, k: usize) -> Result<usize> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("box count {m} is not a power of two")));
    }
    lattice_side(k).ok_or_else(|| Error::InvalidParameter(format!("samples per box {k} is not a perfect square")))
}

/// Transition matrix from a deterministic `√k × √k` sub-lattice per box.
pub fn build_ulam(map: &dyn ToralMap<f64>, m: usize, k: usize) -> Result<UlamMatrix> {
    let side = check_params(m, k)?;
    let rows: Vec<Vec<(usize, f64)>> = (0..m * m)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (i / m, i % m);
            let mut targets: Vec<usize> = box_samples(m, side, a, b)
                .map(|x| {
                    let [y1, y2] = map.lift(x);
                    let cell = |y: f64| (((y - y.floor()) * m as f64) as usize).min(m - 1);
                    cell(y1) * m + cell(y2)
                })
                .collect();
            targets.sort_unstable();
            let mut row: Vec<(usize, f64)> = Vec::new();
            let mut idx = 0;
            while idx < targets.len() {
                let j = targets[idx];
                let run = targets[idx..].iter().take_while(|&&t| t == j).count();
                row.push((j, run as f64 / k as f64));
                idx += run;
            }
            row
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(m * m + 1);
    row_ptr.push(0);
    let mut cols = Vec::new();
    let mut values = Vec::new();
    for row in rows {
        for (j, v) in row {
            cols.push(j);
            values.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(UlamMatrix {
        m,
        samples_per_box: k,
        row_ptr,
        cols,
        values,
    })
}

/// Invariant density per box (mean 1) from power iteration on `Pᵀ`.
pub fn ulam_srb(p: &UlamMatrix) -> Result<Vec<f64>> {
    let dim = p.dim();
    let mut u = vec![1.0 / dim as f64; dim];
    let mut next = vec![0.0; dim];
    let mut change = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        p.apply_transpose(&u, &mut next);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        change = u.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut u, &mut next);
        if change < SRB_TOLERANCE {
            return Ok(u.into_iter().map(|v| v * dim as f64).collect());
        }
    }
    Err(Error::NotConverged {
        iterations: MAX_ITERATIONS,
        residual: change,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UlamVariance {
    pub sigma2: f64,
    pub mean_shift: f64,
    pub iterations: usize,
    pub residual: f64,
    pub boxes: usize,
    pub samples_per_box: usize,
}

/// Box averages of `g` over the same sub-lattice the matrix uses.
pub fn box_averages(g: &Observable<f64>, m: usize, k: usize) -> Result<Vec<f64>> {
    let side = check_params(m, k)?;
    Ok((0..m * m)
        .into_par_iter()
        .map(|i| box_samples(m, side, i / m, i % m).map(|x| g.eval_at(x)).sum::<f64>() / k as f64)
        .collect())
}

/// Green–Kubo variance in the box basis.
///
/// With `μ_i` the invariant box masses and `g_c` the `μ`-centred box
/// averages, `w = Σ_{t≥1} Pᵗ g_c` solves `(Id − P) w = P g_c` on the
/// `μ`-mean-zero subspace. The series is summed with the constant mode
/// projected out after every step, and
/// `σ² = Σ μ_i g_c,i² + 2 Σ μ_i g_c,i w_i`.
pub fn ulam_variance_from(p: &UlamMatrix, g_boxes: &[f64]) -> Result<UlamVariance> {
    let dim = p.dim();
    if g_boxes.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: g_boxes.len(),
        });
    }
    let density = ulam_srb(p)?;
    let mu: Vec<f64> = density.iter().map(|d| d / dim as f64).collect();
    let shift: f64 = mu.iter().zip(g_boxes).map(|(m, g)| m * g).sum();
    let gc: Vec<f64> = g_boxes.iter().map(|g| g - shift).collect();
    let scale = gc.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut term = gc.clone();
    let mut next = vec![0.0; dim];
    let mut w = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        p.apply(&term, &mut next);
        let drift: f64 = mu.iter().zip(&next).map(|(m, v)| m * v).sum();
        next.iter_mut().for_each(|v| *v -= drift);
        std::mem::swap(&mut term, &mut next);
        w.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
        residual = term.iter().map(|v| v.abs()).fold(0.0, f64::max) / scale;
        if residual < 1e-15 {
            break;
        }
    }
    if residual >= 1e-15 {
        return Err(Error::NotConverged { iterations, residual });
    }
    let sigma2 = mu
        .iter()
        .zip(&gc)
        .zip(&w)
        .map(|((m, g), w)| m * g * (g + 2.0 * w))
        .sum();
    Ok(UlamVariance {
        sigma2,
        mean_shift: shift,
        iterations,
        residual,
        boxes: p.boxes_per_side(),
        samples_per_box: p.samples_per_box(),
    })
}

pub fn ulam_variance(map: &dyn ToralMap<f64>, m: usize, k: usize, g: &Observable<f64>) -> Result<UlamVariance> {
    let p = build_ulam(map, m, k)?;
    ulam_variance_from(&p, &box_averages(g, m, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::MapModel;

    #[test]
    fn identity_gives_identity_matrix() {
        let p = build_ulam(&MapModel::<f64>::identity(), 8, 9).unwrap();
        for i in 0..64 {
            assert_eq!(p.row(i).collect::<Vec<_>>(), vec![(i, 1.0)]);
        }
        assert!(ulam_srb(&p).unwrap().iter().all(|&d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cat_rows_sum_to_one() {
        let p = build_ulam(&MapModel::<f64>::cat(), 2, 4).unwrap();
        for i in 0..4 {
            assert_eq!(p.row(i).map(|(_, v)| v).sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn translation_by_one_box_is_a_shift() {
        let m = 8;
        let map = MapModel::Translation { shift: [1.0 / m as f64, 0.0] };
        let p = build_ulam(&map, m, 16).unwrap();
        for a in 0..m {
            for b in 0..m {
                let i = a * m + b;
                assert_eq!(p.row(i).collect::<Vec<_>>(), vec![(((a + 1) % m) * m + b, 1.0)]);
            }
        }
    }

    #[test]
    fn cat_map_density_is_uniform() {
        let p = build_ulam(&MapModel::<f64>::cat(), 16, 16).unwrap();
        let d = ulam_srb(&p).unwrap();
        assert!(d.iter().all(|&v| (v - 1.0).abs() < 1e-8));
    }

    #[test]
    fn bad_parameters() {
        assert!(build_ulam(&MapModel::<f64>::cat(), 6, 4).is_err());
        assert!(build_ulam(&MapModel::<f64>::cat(), 8, 5).is_err());
    }

    #[test]
    fn lattice_points_stay_inside_their_box() {
        for (idx, x) in box_samples(4, 3, 2, 1).enumerate() {
            assert!(x[0] > 0.5 && x[0] < 0.75, "{idx}");
            assert!(x[1] > 0.25 && x[1] < 0.5, "{idx}");
        }
    }
}
