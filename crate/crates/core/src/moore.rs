//! Non-backtracking walk matrices of graphs and Moore-type girth bounds.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::combinatorics::rational_int;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::oracle::graph_girth;
use crate::spectral::dense_eigenvalues;

pub const NB_DIM_LIMIT: usize = 500;
pub const DIRECT_DIM_LIMIT: usize = 12;
pub const DIRECT_LENGTH_LIMIT: usize = 6;
pub const DENSE_EIGEN_LIMIT: usize = 2000;

/// Dense square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub dim: usize,
    pub data: Vec<i128>,
}

impl IntMatrix {
    pub fn zeros(dim: usize) -> Self {
        IntMatrix { dim, data: vec![0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> i128 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        let n = self.dim;
        let rows: Option<Vec<Vec<i128>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0i128; n];
                for l in 0..n {
                    let a = self.data[i * n + l];
                    if a == 0 {
                        continue;
                    }
                    for (j, slot) in row.iter_mut().enumerate() {
                        *slot = slot.checked_add(a.checked_mul(other.data[l * n + j])?)?;
                    }
                }
                Some(row)
            })
            .collect();
        let rows = rows.ok_or_else(|| Error::Capacity("integer overflow in walk counts".into()))?;
        Ok(IntMatrix { dim: n, data: rows.concat() })
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j) as f64)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt()
    }
}

fn require_graph(g: &Hypergraph) -> Result<()> {
    if g.k() != 2 {
        return Err(Error::Arity(format!("needs a graph (k = 2), got k = {}", g.k())));
    }
    Ok(())
}

fn adjacency(g: &Hypergraph) -> IntMatrix {
    let n = g.n() as usize;
    let mut a = IntMatrix::zeros(n);
    for e in g.edges() {
        let (u, v) = (e[0] as usize, e[1] as usize);
        a.data[u * n + v] += 1;
        a.data[v * n + u] += 1;
    }
    a
}

/// `A^(0), ..., A^(s_max)`, where `A^(s)_{uv}` counts non-backtracking walks
/// of length `s` from `u` to `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NbSequence {
    pub degrees: Vec<i128>,
    pub matrices: Vec<IntMatrix>,
}

impl NbSequence {
    pub fn get(&self, s: usize) -> &IntMatrix {
        &self.matrices[s]
    }

    pub fn s_max(&self) -> usize {
        self.matrices.len() - 1
    }
}

/// Via `A^(2) = A^2 - D` and `A^(s) = A^(s-1) A - A^(s-2) (D - I)`.
pub fn nb_matrices(g: &Hypergraph, s_max: usize) -> Result<NbSequence> {
    require_graph(g)?;
    let n = g.n() as usize;
    if n > NB_DIM_LIMIT {
        return Err(Error::Capacity(format!("n = {n} exceeds the dense limit {NB_DIM_LIMIT}")));
    }
    let a = adjacency(g);
    let degrees: Vec<i128> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).sum()).collect();
    let mut mats = vec![IntMatrix::identity(n)];
    if s_max >= 1 {
        mats.push(a.clone());
    }
    for s in 2..=s_max {
        let mut next = mats[s - 1].mul(&a)?;
        let prev = &mats[s - 2];
        // column j of A^(s-2) scaled by deg(j) - 1, or by deg(j) when s = 2
        let shift = if s == 2 { 0 } else { 1 };
        for (idx, slot) in next.data.iter_mut().enumerate() {
            let sub = prev.data[idx]
                .checked_mul(degrees[idx % n] - shift)
                .ok_or_else(|| Error::Capacity("integer overflow in walk counts".into()))?;
            *slot -= sub;
        }
        mats.push(next);
    }
    Ok(NbSequence { degrees, matrices: mats })
}

/// Counts non-backtracking walks by depth-first enumeration over edge ids.
pub fn nb_direct_count(g: &Hypergraph, s: usize) -> Result<IntMatrix> {
    require_graph(g)?;
    let n = g.n() as usize;
    if n > DIRECT_DIM_LIMIT || s > DIRECT_LENGTH_LIMIT {
        return Err(Error::Capacity(format!(
            "direct enumeration limited to n <= {DIRECT_DIM_LIMIT}, s <= {DIRECT_LENGTH_LIMIT}"
        )));
    }
    let mut inc: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, e) in g.edges().iter().enumerate() {
        inc[e[0] as usize].push((e[1] as usize, id));
        inc[e[1] as usize].push((e[0] as usize, id));
    }
    fn walk(inc: &[Vec<(usize, usize)>], v: usize, last: Option<usize>, left: usize, out: &mut [i128]) {
        if left == 0 {
            out[v] += 1;
            return;
        }
        for &(w, id) in &inc[v] {
            if Some(id) != last {
                walk(inc, w, Some(id), left - 1, out);
            }
        }
    }
    let mut m = IntMatrix::zeros(n);
    for u in 0..n {
        walk(&inc, u, None, s, &mut m.data[u * n..(u + 1) * n]);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MooreCertificate {
    pub pass: bool,
    /// Smallest eigenvalue of `n^{2/l} I + n^{-2/l} (D - I) - A`.
    pub margin: f64,
}

pub const PSD_TOLERANCE: f64 = 1e-9;

/// PSD test of `n^{2/l} I + n^{-2/l} (D - I) - A`, which holds whenever the
/// girth exceeds `l`; failure therefore certifies a cycle of length `<= l`.
pub fn ihara_moore_certificate(g: &Hypergraph, ell: usize) -> Result<MooreCertificate> {
    require_graph(g)?;
    if ell == 0 || ell % 2 == 1 {
        return Err(Error::Parameter(format!("l = {ell} must be even and positive")));
    }
    let n = g.n() as usize;
    if n > DENSE_EIGEN_LIMIT {
        return Err(Error::Capacity(format!("n = {n} exceeds the dense eigen limit")));
    }
    if n == 0 {
        return Ok(MooreCertificate { pass: true, margin: 0.0 });
    }
    let a = adjacency(g);
    let up = (n as f64).powf(2.0 / ell as f64);
    let down = 1.0 / up;
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let deg: i128 = (0..n).map(|j| a.get(i, j)).sum();
        for j in 0..n {
            h[(i, j)] = -(a.get(i, j) as f64);
        }
        h[(i, i)] += up + down * (deg as f64 - 1.0);
    }
    let margin = dense_eigenvalues(h)[0];
    Ok(MooreCertificate { pass: margin >= -PSD_TOLERANCE, margin })
}

/// Largest `j` with `base^j <= n`, for a rational `base > 1`.
fn floor_log(base: &BigRational, n: u64) -> u64 {
    let target = rational_int(BigInt::from(n));
    let mut j = 0u64;
    let mut p = base.clone();
    while p <= target {
        p *= base;
        j += 1;
    }
    j
}

/// Smallest `j` with `base^j >= n`, for a rational `base > 1`.
fn ceil_log(base: &BigRational, n: u64) -> u64 {
    let target = rational_int(BigInt::from(n));
    let mut j = 0u64;
    let mut p = BigRational::one();
    while p < target {
        p *= base;
        j += 1;
    }
    j
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MooreAudit {
    pub n: u32,
    pub m: usize,
    pub d: BigRational,
    pub girth: Option<usize>,
    /// `2(floor(log_{d-1} n) + 1)`, defined for `d > 2`.
    pub exact_bound: Option<u64>,
    /// `2 ceil(log_{d/16} n)`, defined for `d > 16`.
    pub weak_bound: Option<u64>,
}

impl MooreAudit {
    fn holds(&self, bound: Option<u64>) -> bool {
        match bound {
            None => true,
            Some(b) => self.girth.is_some_and(|g| g as u64 <= b),
        }
    }

    pub fn exact_ok(&self) -> bool {
        self.holds(self.exact_bound)
    }

    pub fn weak_ok(&self) -> bool {
        self.holds(self.weak_bound)
    }
}

pub fn moore_bound_audit(g: &Hypergraph) -> Result<MooreAudit> {
    require_graph(g)?;
    let n = g.n();
    let girth = graph_girth(g)?;
    let d = if n == 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(2 * g.m()), BigInt::from(n))
    };
    let two = rational_int(2);
    let sixteen = rational_int(16);
    let exact_bound = (d > two).then(|| 2 * (floor_log(&(&d - BigRational::one()), n as u64) + 1));
    let weak_bound = (d > sixteen).then(|| 2 * ceil_log(&(&d / &sixteen), n as u64));
    Ok(MooreAudit { n, m: g.m(), d, girth, exact_bound, weak_bound })
}

/// `tr(A^(s)) <= sqrt(n) ||A^(k)||_2^q ||A^(r)||_F` with `s = q k + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientRemainder {
    pub s: usize,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl QuotientRemainder {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-9) + 1e-9
    }
}

fn spectral_norm_dense(m: &IntMatrix) -> f64 {
    dense_eigenvalues(m.to_f64())
        .into_iter()
        .fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn quotient_remainder_check(seq: &NbSequence, s: usize, k: usize) -> Result<QuotientRemainder> {
    if k == 0 || s > seq.s_max() || k > seq.s_max() {
        return Err(Error::Parameter(format!("need 1 <= k and s, k <= {}", seq.s_max())));
    }
    let (q, r) = (s / k, s % k);
    let n = seq.degrees.len() as f64;
    let lhs = seq.get(s).trace() as f64;
    let rhs = n.sqrt() * spectral_norm_dense(seq.get(k)).powi(q as i32) * seq.get(r).frobenius();
    Ok(QuotientRemainder { s, k, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{complete, cycle, heawood, path, petersen, random_graph};

    #[test]
    fn second_matrix_is_a_squared_minus_d() {
        let g = random_graph(9, 16, 4).unwrap();
        let seq = nb_matrices(&g, 2).unwrap();
        let a = seq.get(1);
        let a2 = a.mul(a).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let d = if i == j { seq.degrees[i] } else { 0 };
                assert_eq!(seq.get(2).get(i, j), a2.get(i, j) - d);
            }
        }
    }

    #[test]
    fn four_cycle_antipodes() {
        let seq = nb_matrices(&cycle(4), 2).unwrap();
        let a2 = seq.get(2);
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i + 2) % 4 == j { 2 } else { 0 };
                assert_eq!(a2.get(i, j), want);
            }
        }
        assert_eq!(nb_direct_count(&cycle(4), 2).unwrap(), *a2);
    }

    #[test]
    fn tree_counts_paths() {
        // on a path, NB walks of length s are the paths with endpoints s apart
        let seq = nb_matrices(&path(7), 4).unwrap();
        for s in 0..=4 {
            for i in 0..7 {
                for j in 0..7 {
                    let want = i128::from((i as i64 - j as i64).unsigned_abs() as usize == s);
                    assert_eq!(seq.get(s).get(i, j), want);
                }
            }
        }
    }

    #[test]
    fn direct_count_matches_recurrence() {
        for seed in 0..5 {
            let g = random_graph(10, 18, seed).unwrap();
            let seq = nb_matrices(&g, 6).unwrap();
            for s in 0..=6 {
                assert_eq!(nb_direct_count(&g, s).unwrap(), *seq.get(s), "seed {seed} s {s}");
            }
        }
        assert_eq!(nb_direct_count(&petersen(), 4).unwrap().trace(), 0);
        assert_eq!(nb_direct_count(&petersen(), 1).unwrap(), adjacency(&petersen()));
    }

    #[test]
    fn ihara_moore_on_high_girth_graphs() {
        let c6 = ihara_moore_certificate(&cycle(6), 4).unwrap();
        assert!(c6.pass);
        // the cycle's spectrum gives the margin in closed form
        let want = 6f64.sqrt() + 1.0 / 6f64.sqrt() - 2.0;
        assert!((c6.margin - want).abs() < 1e-9);
        assert!(ihara_moore_certificate(&petersen(), 4).unwrap().pass);
        assert!(ihara_moore_certificate(&heawood(), 4).unwrap().pass);
        for ell in [2, 4, 6, 8] {
            assert!(ihara_moore_certificate(&path(9), ell).unwrap().pass);
        }
        assert!(ihara_moore_certificate(&cycle(5), 3).is_err());
    }

    #[test]
    fn high_girth_entries_are_zero_or_one() {
        let g = heawood(); // girth 6
        let seq = nb_matrices(&g, 2).unwrap();
        for s in 0..=2 {
            assert!(seq.get(s).data.iter().all(|&x| x == 0 || x == 1));
        }
    }

    #[test]
    fn moore_audit_examples() {
        let k10 = moore_bound_audit(&complete(10)).unwrap();
        assert_eq!(k10.exact_bound, Some(4));
        assert_eq!(k10.girth, Some(3));
        assert!(k10.exact_ok());
        let p = moore_bound_audit(&petersen()).unwrap();
        assert_eq!(p.exact_bound, Some(8));
        assert_eq!(p.girth, Some(5));
        assert!(p.exact_ok() && p.weak_bound.is_none());
        let c = moore_bound_audit(&cycle(8)).unwrap();
        assert_eq!(c.exact_bound, None);
        assert!(c.exact_ok());
    }

    #[test]
    fn quotient_remainder_on_petersen() {
        let seq = nb_matrices(&petersen(), 6).unwrap();
        for s in 1..=6 {
            for k in 1..=s {
                assert!(quotient_remainder_check(&seq, s, k).unwrap().holds());
            }
        }
    }
}
