use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::exact::{factorial, factorial_q, q, ExactValue, Rational};
use crate::ratfun::{mean_is_finite, MultiIndex3, RatCombo};
use crate::Error;

fn fq(n: i64) -> Rational {
    assert!(n >= 0, "negative factorial argument");
    factorial_q(n as u32)
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Mean of the monomial `lambda^alpha` over a `d`-simplex: `d! alpha! / (d + |alpha|)!`.
pub fn integral_mean_poly(alpha: &[u32]) -> ExactValue {
    let d = alpha.len() as u32 - 1;
    let total: u32 = alpha.iter().sum();
    let num = alpha.iter().fold(factorial(d), |acc, &a| acc * factorial(a));
    let den = factorial(d + total);
    ExactValue::rational(Rational::new(num.into(), den.into()))
}

/// Mean of `lambda^alpha / (1 - lambda_2)^beta2`.
pub fn integral_mean_beta2(alpha: MultiIndex3, beta2: u32) -> Result<ExactValue, Error> {
    let [a0, a1, a2] = alpha.0.map(i64::from);
    let b2 = beta2 as i64;
    if !mean_is_finite(alpha, MultiIndex3::new(0, 0, beta2)) {
        return Err(Error::IndexNotFinite);
    }
    let s = a0 + a1 + a2;
    let v = int(2) * fq(a0) * fq(a1) * fq(a2) / fq(s - b2 + 2) * fq(a0 + a1 + 1 - b2)
        / fq(a0 + a1 + 1);
    Ok(ExactValue::rational(v))
}

/// Mean of `lambda_1^a1 lambda_2^a2 / ((1 - lambda_1)^b1 (1 - lambda_2)^b2)`.
pub fn compute_j(a1: u32, a2: u32, b1: u32, b2: u32) -> ExactValue {
    if (a1 + b1).max(a2 + b2) > a1 + a2 + 1 {
        return ExactValue::Infinite;
    }
    let (a1, a2, b1, b2) = if b1 > b2 { (a2, a1, b2, b1) } else { (a1, a2, b1, b2) };
    let (a1i, a2i, b1i, b2i) = (a1 as i64, a2 as i64, b1 as i64, b2 as i64);
    if b1 == 0 {
        let v = int(2) / int(a1i + 1) * fq(a2i) * fq(a1i - b2i + 1) / fq(a1i + a2i - b2i + 2);
        return ExactValue::rational(v);
    }
    if b1 == 1 && b2 == 1 {
        let mut r = Rational::zero();
        for i in 1..=a2i {
            r -= q(2, i * i);
        }
        for j in 1..=a1i {
            r -= int(2) / int(j) * fq(a2i) * fq(j - 1) / fq(a2i + j);
        }
        return ExactValue::new(r, q(1, 3));
    }
    if b1 == 1 {
        let prev = compute_j(a1, a2, 1, b2 - 1);
        let c = q(b2i - a2i - 2, b2i - 1);
        let extra = int(2) / int(b2i - 1) * fq(a1i - b2i + 1) * fq(a2i) / fq(a1i - b2i + a2i + 2);
        return &(&prev * &c) + &ExactValue::rational(extra);
    }
    let prev = compute_j(a1, a2, b1 - 1, b2);
    let c = q(b1i - a1i - 2, b1i - 1);
    let extra = int(2) / int(b1i - 1) * fq(a2i - b1i + 1) * fq(a1i - b2i + 1)
        / fq(a2i - b1i + a1i - b2i + 3);
    &(&prev * &c) + &ExactValue::rational(extra)
}

type Key = (MultiIndex3, MultiIndex3);

/// Permute the coordinate pairs `(alpha_i, beta_i)` into ascending `(beta_i, alpha_i)` order.
/// The mean is invariant under this permutation.
fn canonical(alpha: MultiIndex3, beta: MultiIndex3) -> Key {
    let mut pairs = [0, 1, 2].map(|i| (beta[i], alpha[i]));
    pairs.sort_unstable();
    (
        MultiIndex3(pairs.map(|p| p.1)),
        MultiIndex3(pairs.map(|p| p.0)),
    )
}

/// Hit and miss counters of an [`IntegralCache`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub entries: usize,
}

/// Memo table for [`integral_mean`], keyed on the canonical index pair.
#[derive(Debug, Default)]
pub struct IntegralCache {
    table: HashMap<Key, ExactValue>,
    hits: u64,
    misses: u64,
}

impl IntegralCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats { hits: self.hits, misses: self.misses, entries: self.table.len() }
    }
}

/// Mean of `lambda^alpha / (1 - lambda)^beta` over a triangle.
pub fn integral_mean(alpha: MultiIndex3, beta: MultiIndex3, cache: &mut IntegralCache) -> ExactValue {
    if !mean_is_finite(alpha, beta) {
        return ExactValue::Infinite;
    }
    let key = canonical(alpha, beta);
    if let Some(v) = cache.table.get(&key) {
        cache.hits += 1;
        return v.clone();
    }
    cache.misses += 1;
    let v = reduce(key.0, key.1, cache);
    cache.table.insert(key, v.clone());
    v
}

/// [`integral_mean`] without sharing a cache between calls.
pub fn integral_mean_uncached(alpha: MultiIndex3, beta: MultiIndex3) -> ExactValue {
    integral_mean(alpha, beta, &mut IntegralCache::new())
}

fn half_sum(values: impl IntoIterator<Item = ExactValue>) -> ExactValue {
    let total = values.into_iter().fold(ExactValue::zero(), |a, b| &a + &b);
    &total * &q(1, 2)
}

/// One reduction step on a finite index pair with `beta0 <= beta1 <= beta2`.
fn reduce(a: MultiIndex3, b: MultiIndex3, cache: &mut IntegralCache) -> ExactValue {
    let s = a.sum();
    if b[0] == 0 && b[1] == 0 {
        return integral_mean_beta2(a, b[2]).expect("finite index");
    }
    let mut rec = |al: MultiIndex3, be: MultiIndex3| integral_mean(al, be, cache);
    let dec = |m: MultiIndex3, j: usize| m.minus_unit(j).expect("positive entry");
    if b[0] >= 1 {
        return half_sum((0..3).map(|j| rec(a, dec(b, j))).collect::<Vec<_>>());
    }
    if a[0] == 0 {
        return compute_j(a[1], a[2], b[1], b[2]);
    }
    let a_less = dec(a, 0);
    if a[1] + b[1] < s + 1 {
        let x = rec(a_less, dec(b, 2));
        let y = rec(a_less.plus_unit(1), b);
        return &x - &y;
    }
    if a[2] + b[2] < s + 1 {
        let x = rec(a_less, dec(b, 1));
        let y = rec(a_less.plus_unit(2), b);
        return &x - &y;
    }
    let mut parts = Vec::with_capacity(4);
    for j in 1..3 {
        parts.push(rec(a, dec(b, j)));
        parts.push(rec(a_less.plus_unit(j), dec(b, j)));
    }
    let last = rec(a_less.plus_unit(1).plus_unit(2), b);
    &half_sum(parts) - &last
}

/// Mean of a linear combination. Fails if any single term has an infinite mean.
pub fn integral_mean_combo(f: &RatCombo, cache: &mut IntegralCache) -> Result<ExactValue, Error> {
    let mut acc = ExactValue::zero();
    for t in f.terms() {
        let v = integral_mean(t.alpha, t.beta, cache);
        if !v.is_finite() {
            return Err(Error::InfiniteTerm { alpha: t.alpha, beta: t.beta });
        }
        acc = &acc + &(&v * &t.coeff);
    }
    Ok(acc)
}
