//! Binomial coefficients, colexicographic ranking of subsets, and the exact
//! rational helpers shared by the certificate arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `C(n, k)` as a `u128`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        let g2 = acc.gcd(&den);
        acc = (acc / g2).checked_mul(num)? / (den / g2);
    }
    Some(acc)
}

pub fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Rank of a strictly increasing subset in colexicographic order:
/// `sum_i C(s_i, i + 1)`.
pub fn colex_rank(subset: &[u32]) -> u128 {
    subset
        .iter()
        .enumerate()
        .map(|(i, &s)| binomial(s as u64, i as u64 + 1).expect("rank overflow"))
        .sum()
}

/// Inverse of [`colex_rank`] for subsets of size `k`.
pub fn colex_unrank(mut rank: u128, k: usize) -> Vec<u32> {
    let mut out = vec![0u32; k];
    for i in (0..k).rev() {
        // largest s with C(s, i+1) <= rank
        let mut s = i as u64;
        while binomial(s + 1, i as u64 + 1).expect("unrank overflow") <= rank {
            s += 1;
        }
        rank -= binomial(s, i as u64 + 1).unwrap();
        out[i] = s as u32;
    }
    out
}

/// All size-`k` subsets of `items`, in lexicographic order of positions.
pub fn combinations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let n = items.len();
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Visits all size-`k` subsets of `0..n` in colexicographic order, i.e. in
/// increasing [`colex_rank`].
pub fn for_each_colex_subset(n: u32, k: usize, mut f: impl FnMut(&[u32])) {
    if k as u32 > n {
        return;
    }
    let mut cur: Vec<u32> = (0..k as u32).collect();
    loop {
        f(&cur);
        // smallest i whose element can move up without hitting its successor
        let Some(i) = (0..k).find(|&i| {
            let limit = if i + 1 < k { cur[i + 1] } else { n };
            cur[i] + 1 < limit
        }) else {
            return;
        };
        cur[i] += 1;
        for (j, slot) in cur.iter_mut().enumerate().take(i) {
            *slot = j as u32;
        }
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Exact conversion of a finite `f64`.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("non-finite float in exact arithmetic")
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn pow(q: &BigRational, e: i32) -> BigRational {
    num_traits::pow::Pow::pow(q, e)
}

/// Smallest integer `c` with `c >= q`.
pub fn ceil(q: &BigRational) -> BigInt {
    q.ceil().to_integer()
}

/// Smallest non-negative integer `c` with `c^2 >= q`.
pub fn ceil_sqrt(q: &BigRational) -> BigInt {
    if !q.is_positive() {
        return BigInt::zero();
    }
    // start from the integer square root of the ceiling, then step
    let c0 = ceil(q);
    let mut c = c0.sqrt();
    let qq = q.clone();
    while rational_int(&c * &c) < qq {
        c += 1;
    }
    while c > BigInt::zero() && rational_int((&c - 1) * (&c - 1)) >= qq {
        c -= 1;
    }
    c
}

/// `ceil(base^(twice_exp / 2))` for a positive rational base.
pub fn ceil_pow_half(base: &BigRational, twice_exp: i32) -> BigInt {
    let p = pow(base, twice_exp);
    ceil_sqrt(&p)
}

/// A rational `s` with `s >= sqrt(q)` and `s` within a few ulps of it.
pub fn sqrt_upper(q: &BigRational) -> BigRational {
    if !q.is_positive() {
        return BigRational::zero();
    }
    let approx = to_f64(q).sqrt();
    let mut s = if approx.is_finite() && approx > 0.0 {
        rational_from_f64(approx)
    } else {
        // out of f64 range: fall back to an integer bound
        rational_int(ceil_sqrt(q))
    };
    let bump = BigRational::one() + rational(1, 1 << 40);
    while &s * &s < *q {
        s *= &bump;
    }
    s
}

/// `|x|` for rationals.
pub fn abs(q: &BigRational) -> BigRational {
    q.abs()
}

/// Renders a rational as `p/q` (or `p` when integral).
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(BigRational::new(p, q))
            }
        }
        None => {
            if let Ok(p) = s.parse::<BigInt>() {
                return Some(BigRational::from_integer(p));
            }
            // decimal literal, exact
            let (int, frac) = s.split_once('.')?;
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
            let num: BigInt = digits.parse().ok()?;
            let den = num_traits::pow::pow(BigInt::from(10), frac.len());
            let q = BigRational::new(num, den);
            Some(if neg { -q } else { q })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), Some(15));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(24, 3), Some(2024));
        assert_eq!(binomial_big(60, 30).to_string(), "118264581564861424");
        assert_eq!(binomial(60, 30), Some(118264581564861424));
    }

    #[test]
    fn colex_roundtrip_and_order() {
        let mut seen = Vec::new();
        for_each_colex_subset(7, 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 35);
        for (i, s) in seen.iter().enumerate() {
            assert_eq!(colex_rank(s), i as u128);
            assert_eq!(&colex_unrank(i as u128, 3), s);
        }
    }

    #[test]
    fn colex_edge_sizes() {
        let mut count = 0;
        for_each_colex_subset(4, 0, |s| {
            assert!(s.is_empty());
            count += 1;
        });
        assert_eq!(count, 1);
        let mut all = Vec::new();
        for_each_colex_subset(3, 3, |s| all.push(s.to_vec()));
        assert_eq!(all, vec![vec![0, 1, 2]]);
        let mut none = 0;
        for_each_colex_subset(2, 3, |_| none += 1);
        assert_eq!(none, 0);
    }

    #[test]
    fn combinations_lexicographic() {
        let c = combinations(&[1, 2, 3, 4], 2);
        assert_eq!(
            c,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        assert_eq!(combinations(&[1, 2], 0), vec![Vec::<i32>::new()]);
        assert!(combinations(&[1, 2], 3).is_empty());
        assert_eq!(combinations(&[5, 6, 7], 3), vec![vec![5, 6, 7]]);
    }

    #[test]
    fn ceil_sqrt_exact() {
        assert_eq!(ceil_sqrt(&rational(16, 1)), BigInt::from(4));
        assert_eq!(ceil_sqrt(&rational(17, 1)), BigInt::from(5));
        assert_eq!(ceil_sqrt(&rational(1, 4)), BigInt::from(1));
        assert_eq!(ceil_sqrt(&rational(0, 1)), BigInt::from(0));
        // (16/4)^(-1/2) = 1/2 -> 1 ; (16/4)^(1/2) = 2
        assert_eq!(ceil_pow_half(&rational(4, 1), -1), BigInt::from(1));
        assert_eq!(ceil_pow_half(&rational(4, 1), 1), BigInt::from(2));
        assert_eq!(ceil_pow_half(&rational(6, 1), 1), BigInt::from(3));
    }

    #[test]
    fn sqrt_upper_is_upper() {
        for (p, q) in [(2, 1), (1, 3), (10_000_001, 7), (1, 1_000_000_007)] {
            let x = rational(p, q);
            let s = sqrt_upper(&x);
            assert!(&s * &s >= x);
            assert!((to_f64(&s) - (p as f64 / q as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn rational_text() {
        assert_eq!(format_rational(&rational(6, 15)), "2/5");
        assert_eq!(format_rational(&rational(4, 2)), "2");
        assert_eq!(parse_rational("2/5"), Some(rational(2, 5)));
        assert_eq!(parse_rational("0.25"), Some(rational(1, 4)));
        assert_eq!(parse_rational("-3"), Some(rational(-3, 1)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
