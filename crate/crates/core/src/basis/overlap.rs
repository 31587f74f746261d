//! Overlaps between neighbouring photon blocks and the path-sum expansion.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::coupling_beta;
use crate::params::SystemParams;
use crate::special::ln_factorial;

/// How the indices `i_+-` in the closed form are read. Both readings use
/// `i_+- = |s(k) +- s(k')| / 2`; they differ in the sign assigned to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexPlusReading {
    /// `s(0) = +1`, so `i_+ = 1, i_- = 0` when `k k' >= 0` and the reverse
    /// otherwise. This is the reading the numerical traces confirm.
    SignProduct,
    /// `s(0) = 0`, giving `i_+ = i_- = 1/2` when exactly one index vanishes.
    HalfSum,
}

fn ln_inv_factorial(n: i64) -> Option<f64> {
    if n < 0 {
        None
    } else {
        Some(-ln_factorial(n as usize))
    }
}

/// The closed form exactly as printed, before the sign convention fix:
/// `m'! |beta|^{2(m'-m)+|k'|-|k|} (mbar+1)^{m-m'} e^{i phi (k'-k)}
///  / (m! (m'-m-|k| i_-)! (m'-m+|k'|-|k| i_+)!)`, `phi = arg(-beta)`.
pub fn overlap_coeff_literal(kp: i64, mp: usize, k: i64, m: usize, params: &SystemParams, reading: IndexPlusReading) -> C64 {
    let beta = coupling_beta(params);
    let (ka, kpa) = (k.unsigned_abs() as i64, kp.unsigned_abs() as i64);
    let (ip, im) = match reading {
        IndexPlusReading::SignProduct => {
            let s = |x: i64| if x < 0 { -1 } else { 1 };
            if s(k) == s(kp) {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            }
        }
        IndexPlusReading::HalfSum => {
            let (a, b) = (k.signum() as f64, kp.signum() as f64);
            ((a + b).abs() / 2.0, (a - b).abs() / 2.0)
        }
    };
    let dm = mp as i64 - m as i64;
    let f1 = dm as f64 - ka as f64 * im;
    let f2 = dm as f64 + kpa as f64 - ka as f64 * ip;
    // Half-integer arguments only arise in the HalfSum reading;
    // they are treated through the gamma function.
    let ln_inv = |x: f64| -> Option<f64> {
        if x.fract() == 0.0 {
            ln_inv_factorial(x as i64)
        } else if x < -0.5 {
            None
        } else {
            Some(-ln_gamma_half(x + 1.0))
        }
    };
    let (Some(a), Some(b)) = (ln_inv(f1), ln_inv(f2)) else {
        return C64::new(0.0, 0.0);
    };
    let power = 2.0 * dm as f64 + kpa as f64 - ka as f64;
    if beta.norm() == 0.0 {
        return if power == 0.0 && a == 0.0 && b == 0.0 && mp == m { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let ln_mag = ln_factorial(mp) - ln_factorial(m) + a + b + power * beta.norm().ln() - dm as f64 * params.mbar.ln_1p();
    let phi = (-beta).arg();
    C64::from_polar(ln_mag.exp(), phi * (kp - k) as f64)
}

/// `ln Gamma(x)` for positive half-integers.
fn ln_gamma_half(x: f64) -> f64 {
    // Gamma(1/2) = sqrt(pi), Gamma(x + 1) = x Gamma(x)
    let mut v = 0.5 * std::f64::consts::PI.ln();
    let mut y = 0.5;
    while y + 0.5 < x {
        v += y.ln();
        y += 1.0;
    }
    v
}

/// `c^{l,k,m}_{k',m'} = Tr{mu_check^{(l,n-1) dag}_{k',m'} mu_hat^{(l,n)}_{k,m}}`, which does
/// not depend on `n`.
///
/// This is the literal closed form times `(-1)^{(m'-m)+(k'-k)}` and the phase
/// `e^{l(beta^2 - beta^{*2})/2}`. The sign is what numerical traces give: the
/// printed form omits the `(-1)^{m'-m}` of its own Laguerre expansion, and
/// `(-1)^{k'-k}` appears because the block-to-block transform displaces by
/// `-beta`.
pub fn overlap_coeff(l: i64, kp: i64, mp: usize, k: i64, m: usize, params: &SystemParams) -> C64 {
    let lit = overlap_coeff_literal(kp, mp, k, m, params, IndexPlusReading::SignProduct);
    if lit == C64::new(0.0, 0.0) {
        return lit;
    }
    let beta = coupling_beta(params);
    let parity = (mp as i64 - m as i64) + (kp - k);
    let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let phase = (l as f64 * (beta * beta - beta.conj() * beta.conj()) / 2.0).exp();
    sign * lit * phase
}

/// Bounds on the intermediate `(k_r, m_r)` of the path sums, relative to
/// the target label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathBounds {
    pub k_extra: usize,
    pub m_extra: usize,
}

impl Default for PathBounds {
    fn default() -> Self {
        PathBounds { k_extra: 6, m_extra: 6 }
    }
}

/// `sum_{j=n}^{n'} prod_{s=n+1}^{j} 1/(lam_n - lam_s) prod_{s=j}^{n'-1} 1/(lam_{n'} - lam_s)`
/// for the tuple `lams = [lam_n, ..., lam_{n'}]`. Returns the sum and the
/// largest term magnitude.
pub fn cross_trace_sum(lams: &[C64]) -> (C64, f64) {
    let len = lams.len();
    assert!(len >= 2);
    let (first, last) = (lams[0], lams[len - 1]);
    let mut sum = C64::new(0.0, 0.0);
    let mut biggest = 0.0f64;
    for j in 0..len {
        let mut t = C64::new(1.0, 0.0);
        for s in 1..=j {
            t /= first - lams[s];
        }
        for s in j..len - 1 {
            t /= last - lams[s];
        }
        biggest = biggest.max(t.norm());
        sum += t;
    }
    (sum, biggest)
}

/// The same sum multiplied through by its common denominator:
/// `sum_j prod_{s=j+1}^{n'} (lam_n - lam_s) prod_{s=n}^{j-1} (lam_{n'} - lam_s)`.
pub fn cross_trace_numerator(lams: &[C64]) -> (C64, f64) {
    let len = lams.len();
    assert!(len >= 2);
    let (first, last) = (lams[0], lams[len - 1]);
    let mut sum = C64::new(0.0, 0.0);
    let mut biggest = 0.0f64;
    for j in 0..len {
        let mut t = C64::new(1.0, 0.0);
        for s in j + 1..len {
            t *= first - lams[s];
        }
        for s in 0..j {
            t *= last - lams[s];
        }
        biggest = biggest.max(t.norm());
        sum += t;
    }
    (sum, biggest)
}
