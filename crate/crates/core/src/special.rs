//! Factorials, Laguerre and Meixner polynomials.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive};

const LN_FACT_TABLE: usize = 2048;

fn ln_fact_table() -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

pub fn ln_factorial(n: usize) -> f64 {
    let t = ln_fact_table();
    if n < t.len() {
        return t[n];
    }
    let mut acc = t[t.len() - 1];
    for k in t.len()..=n {
        acc += (k as f64).ln();
    }
    acc
}

/// `sqrt(n! / m!)` through log-factorials.
pub fn sqrt_factorial_ratio(n: usize, m: usize) -> f64 {
    (0.5 * (ln_factorial(n) - ln_factorial(m))).exp()
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Binomial coefficient as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Associated Laguerre polynomial `L_m^{(k)}(x)` by upward recurrence.
pub fn laguerre(m: usize, k: usize, x: f64) -> f64 {
    *laguerre_all(m, k, x).last().unwrap()
}

/// `[L_0^{(k)}(x), ..., L_m^{(k)}(x)]`.
pub fn laguerre_all(m: usize, k: usize, x: f64) -> Vec<f64> {
    let k = k as f64;
    let mut out = Vec::with_capacity(m + 1);
    out.push(1.0);
    if m == 0 {
        return out;
    }
    out.push(k + 1.0 - x);
    for j in 1..m {
        let jf = j as f64;
        let next = ((2.0 * jf + k + 1.0 - x) * out[j] - (jf + k) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Power-series coefficients of `L_m^{(k)}(s x)` in `x`.
pub fn laguerre_coefficients(m: usize, k: usize, s: f64) -> Vec<f64> {
    (0..=m)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(m + k, m - j) * (j as f64 * s.ln() - ln_factorial(j)).exp()
        })
        .collect()
}

/// `ln |n|` for a big integer, `-inf` at zero.
fn ln_abs_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `mbar = p / q` exactly, with `q` a power of two.
fn dyadic(mbar: f64) -> (BigInt, BigInt) {
    let bits = mbar.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    while mant % 2 == 0 && e < 0 {
        mant /= 2;
        e += 1;
    }
    if e >= 0 {
        (BigInt::from(mant) << e as usize, BigInt::one())
    } else {
        (BigInt::from(mant), BigInt::one() << (-e) as usize)
    }
}

/// Meixner polynomials `M_n(x; k+1, c) = 2F1(-n, -x; k+1; -1/mbar)`,
/// `c = mbar/(mbar+1)`, for `n = 0..=n_max` at an integer point `x`, as
/// `(sign, ln|M_n|)` pairs (sign 0 for an exact zero).
///
/// The hypergeometric sums cancel badly and neither direction of the
/// floating-point recurrence in `n` is stable across the turning point near
/// `x c/(1-c)`. Writing `mbar = p/q` exactly, `N_n = p^n (k+1)_n M_n` is an
/// integer obeying
/// `N_{n+1} = (n(p+q) + (n+k+1)p - qx) N_n - n(p+q)p(n+k) N_{n-1}`,
/// which is run forward in exact arithmetic.
pub fn meixner_ln(n_max: usize, x: usize, k: usize, mbar: f64) -> Vec<(f64, f64)> {
    assert!(mbar > 0.0 && mbar.is_finite(), "meixner needs 0 < mbar < inf, got {mbar}");
    if x == 0 {
        return vec![(1.0, 0.0); n_max + 1];
    }
    let (p, q) = dyadic(mbar);
    let beta = k + 1;
    let ln_p = ln_abs_big(&p);
    let pq = &p + &q;
    let qx = &q * BigInt::from(x);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut prev = BigInt::one();
    let mut cur = &p * BigInt::from(beta) - &qx;
    let emit = |n: usize, v: &BigInt| -> (f64, f64) {
        let sign = match v.sign() {
            Sign::Minus => -1.0,
            Sign::NoSign => 0.0,
            Sign::Plus => 1.0,
        };
        let ln_poch = ln_factorial(beta + n - 1) - ln_factorial(beta - 1);
        (sign, ln_abs_big(v) - n as f64 * ln_p - ln_poch)
    };
    out.push((1.0, 0.0));
    if n_max == 0 {
        return out;
    }
    out.push(emit(1, &cur));
    for n in 1..n_max {
        let a = BigInt::from(n) * &pq + BigInt::from(n + beta) * &p - &qx;
        let b = BigInt::from(n) * &pq * &p * BigInt::from(n - 1 + beta);
        let next = a * &cur - b * &prev;
        prev = std::mem::replace(&mut cur, next);
        out.push(emit(n + 1, &cur));
    }
    out
}
