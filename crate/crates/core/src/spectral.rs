//! Spectral norms of reweighted sparse symmetric matrices by Lanczos, PSD
//! margins, exact trace powers at small scale, and the walk-counting bounds
//! they are compared against.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::combinatorics::{binomial_big, pow, rational_int, sqrt_upper};
use crate::error::{Error, Result};
use crate::generate::rng_from_seed;

/// Sparse symmetric `A` with a diagonal weight `Gamma`; the operator applied is
/// `Gamma^{-1/2} A Gamma^{-1/2}`. Rows with zero weight must be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOperator {
    dim: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    scale: Vec<f64>,
}

impl WeightedOperator {
    /// `entries` lists each unordered pair once (`i <= j`); repeated pairs add.
    pub fn new(dim: usize, entries: &[(usize, usize, f64)], gamma: &[f64]) -> Result<Self> {
        if gamma.len() != dim {
            return Err(Error::Shape(format!(
                "Gamma has {} entries for dimension {dim}",
                gamma.len()
            )));
        }
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
        for &(i, j, w) in entries {
            if i >= dim || j >= dim {
                return Err(Error::Shape(format!("entry ({i}, {j}) outside dimension {dim}")));
            }
            rows[i].push((j as u32, w));
            if i != j {
                rows[j].push((i as u32, w));
            }
        }
        let mut scale = Vec::with_capacity(dim);
        for (i, &g) in gamma.iter().enumerate() {
            if g > 0.0 {
                scale.push(1.0 / g.sqrt());
            } else if rows[i].is_empty() {
                scale.push(0.0);
            } else {
                return Err(Error::Precondition(format!(
                    "Gamma[{i}] = {g} is not positive on a nonempty row"
                )));
            }
        }
        let mut offsets = vec![0usize];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, w) in row {
                cols.push(c);
                vals.push(w);
            }
            offsets.push(cols.len());
        }
        Ok(WeightedOperator { dim, offsets, cols, vals, scale })
    }

    /// Unweighted symmetric matrix (`Gamma = I`).
    pub fn plain(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(dim, entries, &vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `y = Gamma^{-1/2} A Gamma^{-1/2} x`. Rows are independent, so the
    /// result does not depend on the thread count.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut acc = 0.0;
            for p in self.offsets[i]..self.offsets[i + 1] {
                let j = self.cols[p] as usize;
                acc += self.vals[p] * self.scale[j] * x[j];
            }
            *yi = self.scale[i] * acc;
        });
    }

    /// Dense copy of the weighted operator, for cross-checks.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for p in self.offsets[i]..self.offsets[i + 1] {
                let j = self.cols[p] as usize;
                m[(i, j)] += self.vals[p] * self.scale[i] * self.scale[j];
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Relative tolerance on the extremal Ritz residuals.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-9,
            max_iter: 400,
            seed: 0,
        }
    }
}

/// Extremal eigenvalue estimates with explicitly recomputed residuals
/// `||M y - theta y||` for unit Ritz vectors `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOutcome {
    pub theta_max: f64,
    pub residual_max: f64,
    pub theta_min: f64,
    pub residual_min: f64,
    pub iterations: usize,
    /// The Krylov space became invariant, so the Ritz values are eigenvalues.
    pub exhausted: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let j = alpha.len();
    let mut t = DMatrix::zeros(j, j);
    for i in 0..j {
        t[(i, i)] = alpha[i];
        if i + 1 < j {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t)
}

fn extremal_indices(values: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[lo] {
            lo = i;
        }
        if v > values[hi] {
            hi = i;
        }
    }
    (hi, lo)
}

/// Symmetric Lanczos with full reorthogonalization for both ends of the
/// spectrum of a `dim x dim` operator.
pub fn lanczos(
    dim: usize,
    matvec: impl Fn(&[f64], &mut [f64]),
    opts: LanczosOptions,
) -> Result<LanczosOutcome> {
    if dim == 0 {
        return Ok(LanczosOutcome {
            theta_max: 0.0,
            residual_max: 0.0,
            theta_min: 0.0,
            residual_min: 0.0,
            iterations: 0,
            exhausted: true,
        });
    }
    let mut rng = rng_from_seed(opts.seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let max_iter = opts.max_iter.min(dim).max(1);
    let min_iter = dim.min(20);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut exhausted = false;
    let mut scale = 0.0f64;

    loop {
        let j = basis.len() - 1;
        matvec(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        scale = scale.max(a.abs()).max(b);
        let steps = alpha.len();
        if b <= 1e-13 * scale.max(1e-300) || steps >= dim {
            exhausted = true;
        }
        let check = exhausted || steps >= max_iter || (steps >= min_iter && steps % 5 == 0);
        if check {
            let eig = tridiagonal_eigen(&alpha, &beta);
            let (hi, lo) = extremal_indices(eig.eigenvalues.as_slice());
            let last = steps - 1;
            let est = |idx: usize| (b * eig.eigenvectors[(last, idx)]).abs();
            let th = eig.eigenvalues[hi].abs().max(eig.eigenvalues[lo].abs());
            let converged = exhausted
                || (est(hi) <= opts.tol * th.max(1e-300) && est(lo) <= opts.tol * th.max(1e-300));
            if converged || steps >= max_iter {
                let ritz = |idx: usize| -> (f64, f64) {
                    let theta = eig.eigenvalues[idx];
                    let mut y = vec![0.0; dim];
                    for (i, q) in basis.iter().enumerate() {
                        let c = eig.eigenvectors[(i, idx)];
                        y.iter_mut().zip(q).for_each(|(x, z)| *x += c * z);
                    }
                    let ny = norm(&y);
                    y.iter_mut().for_each(|x| *x /= ny);
                    let mut my = vec![0.0; dim];
                    matvec(&y, &mut my);
                    let res = my
                        .iter()
                        .zip(&y)
                        .map(|(a, b)| (a - theta * b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    (theta, res)
                };
                let (theta_max, residual_max) = ritz(hi);
                let (theta_min, residual_min) = ritz(lo);
                if !converged {
                    let (theta, residual) = if theta_max.abs() >= theta_min.abs() {
                        (theta_max, residual_max)
                    } else {
                        (theta_min, residual_min)
                    };
                    return Err(Error::NotConverged {
                        iterations: steps,
                        ritz_value: theta,
                        residual,
                    });
                }
                return Ok(LanczosOutcome {
                    theta_max,
                    residual_max,
                    theta_min,
                    residual_min,
                    iterations: steps,
                    exhausted,
                });
            }
        }
        if exhausted {
            unreachable!("exhausted runs always return above");
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNorm {
    /// Largest `|theta|` over the two ends of the spectrum.
    pub lambda: f64,
    /// Absolute residual of the Ritz pair attaining `lambda`.
    pub residual: f64,
    /// `residual / lambda` (0 when `lambda = 0`).
    pub relative_residual: f64,
    /// `lambda + residual + roundoff floor`, the value certificates use.
    pub lambda_cert: f64,
    pub iterations: usize,
}

/// Margin added to `lambda + residual` to absorb floating-point error in the
/// matrix-vector products.
pub fn roundoff_floor(lambda: f64) -> f64 {
    1e-10 * lambda.max(1.0)
}

/// `||Gamma^{-1/2} A Gamma^{-1/2}||_2`.
pub fn spectral_norm_reweighted(op: &WeightedOperator, opts: LanczosOptions) -> Result<SpectralNorm> {
    let out = lanczos(op.dim(), |x, y| op.apply(x, y), opts)?;
    let (lambda, residual) = if out.theta_max.abs() >= out.theta_min.abs() {
        (out.theta_max.abs(), out.residual_max)
    } else {
        (out.theta_min.abs(), out.residual_min)
    };
    // the other end may be within its residual of lambda
    let other = if out.theta_max.abs() >= out.theta_min.abs() {
        out.theta_min.abs() + out.residual_min
    } else {
        out.theta_max.abs() + out.residual_max
    };
    let upper = (lambda + residual).max(other);
    Ok(SpectralNorm {
        lambda,
        residual,
        relative_residual: if lambda > 0.0 { residual / lambda } else { 0.0 },
        lambda_cert: upper + roundoff_floor(lambda),
        iterations: out.iterations,
    })
}

/// Smallest eigenvalue of a symmetric matrix (negative means not PSD).
pub fn psd_margin(op: &WeightedOperator, opts: LanczosOptions) -> Result<f64> {
    Ok(lanczos(op.dim(), |x, y| op.apply(x, y), opts)?.theta_min)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(op: &WeightedOperator, opts: LanczosOptions) -> Result<f64> {
    Ok(lanczos(op.dim(), |x, y| op.apply(x, y), opts)?.theta_max)
}

/// Sparse square rational matrix by rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, BigRational)>>,
}

impl RationalMatrix {
    pub fn zeros(dim: usize) -> Self {
        RationalMatrix { dim, rows: vec![Vec::new(); dim] }
    }

    /// `Gamma^{-1} A` from the unordered adjacency list of `A` (each pair once).
    pub fn gamma_inverse_times(dim: usize, pairs: &[(usize, usize, i64)], gamma: &[BigRational]) -> Result<Self> {
        let mut m = Self::zeros(dim);
        for &(i, j, w) in pairs {
            let w = rational_int(w);
            for (a, b) in [(i, j), (j, i)] {
                if gamma[a].is_zero() {
                    return Err(Error::Precondition(format!("Gamma[{a}] = 0 on a nonempty row")));
                }
                m.rows[a].push((b, &w / &gamma[a]));
                if i == j {
                    break;
                }
            }
        }
        Ok(m)
    }
}

pub const TRACE_DIM_LIMIT: usize = 2000;
pub const TRACE_POWER_LIMIT: usize = 12;

/// `tr(M^l)` exactly. The matrix is scaled by the lcm `L` of its denominators
/// to an integer matrix `W`, and `tr(M^l) = tr(W^l) / L^l`.
pub fn exact_trace_power(m: &RationalMatrix, ell: usize) -> Result<BigRational> {
    if m.dim > TRACE_DIM_LIMIT || ell > TRACE_POWER_LIMIT {
        return Err(Error::Capacity(format!(
            "exact trace needs dim <= {TRACE_DIM_LIMIT} and l <= {TRACE_POWER_LIMIT}, got {} and {ell}",
            m.dim
        )));
    }
    if ell == 0 {
        return Ok(rational_int(m.dim as i64));
    }
    let mut l = BigInt::one();
    for row in &m.rows {
        for (_, q) in row {
            l = l.lcm(q.denom());
        }
    }
    let w: Vec<Vec<(usize, BigInt)>> = m
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|(j, q)| (*j, q.numer() * (&l / q.denom())))
                .collect()
        })
        .collect();
    // row vector e_i^T W^l, read off at column i
    let total: BigInt = (0..m.dim)
        .into_par_iter()
        .map(|i| {
            let mut cur: Vec<(usize, BigInt)> = vec![(i, BigInt::one())];
            let mut acc = vec![BigInt::zero(); m.dim];
            let mut touched = Vec::new();
            for _ in 0..ell {
                for (a, x) in &cur {
                    for (b, y) in &w[*a] {
                        if acc[*b].is_zero() {
                            touched.push(*b);
                        }
                        acc[*b] += x * y;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                cur = touched
                    .drain(..)
                    .filter_map(|b| {
                        let v = std::mem::take(&mut acc[b]);
                        (!v.is_zero()).then_some((b, v))
                    })
                    .collect();
            }
            cur.into_iter()
                .find(|(b, _)| *b == i)
                .map(|(_, v)| v)
                .unwrap_or_default()
        })
        .sum();
    Ok(BigRational::new(total, num_traits::pow(l, ell)))
}

/// Inputs of the walk-counting bound. `base` is `n` for even graphs and `2n`
/// for colored ones; `eta = None` selects the even form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceBoundParams {
    pub base: u64,
    pub r: u64,
    pub ell: u32,
    pub d: BigRational,
    pub eta: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceBound {
    /// `2^l base^r (c l / d)^{l/2}` with `c = 1` (even) or `c = 2 eta`.
    pub displayed: BigRational,
    /// The same with `base^r` replaced by `C(base, r)`.
    pub tight: BigRational,
}

/// Evaluates the bound exactly for even `l`, and as a rational upper bound
/// (rounded square root) for odd `l`.
pub fn trace_bound_rhs(p: &TraceBoundParams) -> Result<TraceBound> {
    if p.d <= BigRational::zero() {
        return Err(Error::Precondition("average degree must be positive".into()));
    }
    let c = match p.eta {
        None => BigInt::one(),
        Some(eta) => BigInt::from(2 * eta),
    };
    let ratio = BigRational::from_integer(c * BigInt::from(p.ell)) / &p.d;
    let half = pow(&ratio, (p.ell / 2) as i32);
    let walk = if p.ell.is_multiple_of(2) { half } else { half * sqrt_upper(&ratio) };
    let two_l = rational_int(num_traits::pow(BigInt::from(2), p.ell as usize));
    let base_r = rational_int(num_traits::pow(BigInt::from(p.base), p.r as usize));
    let binom = rational_int(binomial_big(p.base, p.r));
    Ok(TraceBound {
        displayed: &two_l * base_r * &walk,
        tight: two_l * binom * walk,
    })
}

/// `l = 2 ceil(r log2 n)`, computed exactly as twice the least `c` with `2^c >= n^r`.
pub fn theorem_ell(n: u64, r: u64) -> u32 {
    let target = num_traits::pow(BigInt::from(n), r as usize);
    let mut c = 0u32;
    let mut p = BigInt::one();
    while p < target {
        p *= 2;
        c += 1;
    }
    2 * c
}

/// Dense symmetric eigenvalues, ascending; for cross-checks only.
pub fn dense_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}
