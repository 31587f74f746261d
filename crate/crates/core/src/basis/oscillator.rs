//! Eigenvectors of the thermally damped oscillator.
//!
//! For `k >= 0` the right eigenvector is
//! `(mbar+1)^{-(k+1)} b^dag^k {L_m^{(k)}(x/(mbar+1)) e^{-x/(mbar+1)}}_n`
//! and the left one `m!/(m+k)! {L_m^{(k)}(x/(mbar+1))}_a b^dag^k`, with
//! `x = b^dag b`. Both only populate the `k`-th subdiagonal. Their entries
//! are Meixner polynomials in the column index, which is what
//! [`OscillatorFamily`] evaluates; expanding the ordered functions as power
//! series ([`oscillator_eigvec_series`]) cancels catastrophically once `m`
//! or the dimension grows past about twenty.

use num_complex::Complex64 as C64;

use super::Side;
use crate::fock::{self, FockOperator, Ordering};
use crate::linalg::{self, ZERO};
use crate::special::{laguerre_coefficients, ln_binomial, ln_factorial, meixner_ln};

/// Right and left eigenvectors for one `|k|` and all `m <= m_max`.
#[derive(Clone, Debug)]
pub struct OscillatorFamily {
    pub k_abs: usize,
    pub mbar: f64,
    pub dim: usize,
    pub right: Vec<FockOperator>,
    pub left: Vec<FockOperator>,
}

impl OscillatorFamily {
    pub fn new(k_abs: usize, m_max: usize, mbar: f64, dim: usize) -> Self {
        let k = k_abs;
        let mut right = vec![linalg::zeros(dim, dim); m_max + 1];
        let mut left = vec![linalg::zeros(dim, dim); m_max + 1];
        for x in 0..dim.saturating_sub(k) {
            let lad = 0.5 * (ln_factorial(x + k) - ln_factorial(x));
            if mbar == 0.0 {
                for m in 0..=m_max {
                    if x <= m {
                        let sign = if x % 2 == 0 { 1.0 } else { -1.0 };
                        let v = sign * (lad + ln_binomial(m + k, m - x)).exp();
                        right[m][(x + k, x)] = C64::from(v);
                    }
                    if x >= m {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        let v = sign * (lad + ln_factorial(x) - ln_factorial(x - m) - ln_factorial(m + k)).exp();
                        left[m][(x + k, x)] = C64::from(v);
                    }
                }
                continue;
            }
            let c = mbar / (mbar + 1.0);
            let lnc = c.ln();
            let ln_mb1 = mbar.ln_1p();
            for (m, &(s, lp)) in meixner_ln(m_max, x, k, mbar).iter().enumerate() {
                if s == 0.0 {
                    continue;
                }
                let r = lad + ln_binomial(m + k, m) + x as f64 * lnc - (k + 1) as f64 * ln_mb1 + lp;
                let l = lad + m as f64 * lnc - ln_factorial(k) + lp;
                right[m][(x + k, x)] = C64::from(s * r.exp());
                left[m][(x + k, x)] = C64::from(s * l.exp());
            }
        }
        OscillatorFamily { k_abs, mbar, dim, right, left }
    }

    pub fn m_max(&self) -> usize {
        self.right.len() - 1
    }

    /// The eigenvector for signed `k` (negative `k` by conjugate transpose).
    pub fn get(&self, k: i64, m: usize, side: Side) -> FockOperator {
        assert_eq!(k.unsigned_abs() as usize, self.k_abs);
        let op = match side {
            Side::Right => &self.right[m],
            Side::Left => &self.left[m],
        };
        if k < 0 {
            linalg::adjoint(op)
        } else {
            op.clone()
        }
    }
}

/// `mu_hat_{k,m}` or `mu_check_{k,m}` on `dim` levels.
pub fn oscillator_eigvec(k: i64, m: usize, mbar: f64, side: Side, dim: usize) -> FockOperator {
    OscillatorFamily::new(k.unsigned_abs() as usize, m, mbar, dim).get(k, m, side)
}

/// The same eigenvectors evaluated literally: ordered power series of the
/// number operator, with the exponential expanded to order `dim + 5`.
/// Only trustworthy for small `m` and `dim`.
pub fn oscillator_eigvec_series(k: i64, m: usize, mbar: f64, side: Side, dim: usize) -> FockOperator {
    let ka = k.unsigned_abs() as usize;
    let s = 1.0 / (mbar + 1.0);
    let lag = laguerre_coefficients(m, ka, s);
    let w = dim + ka;
    let bd = fock::creation(w).expect("dim >= 1");
    let mut raise = linalg::identity(w);
    for _ in 0..ka {
        raise = linalg::matmul(&bd, &raise);
    }
    let op = match side {
        Side::Right => {
            let order = dim + 5;
            let mut expo = vec![0.0f64; order + 1];
            for (i, e) in expo.iter_mut().enumerate() {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                *e = sign * s.powi(i as i32) / ln_factorial(i).exp();
            }
            let mut g = vec![ZERO; order + 1];
            for (i, a) in lag.iter().enumerate() {
                for (j, e) in expo.iter().enumerate() {
                    if i + j <= order {
                        g[i + j] += C64::from(a * e);
                    }
                }
            }
            let ordered = fock::ordered_number_function(&g, Ordering::Normal, w);
            linalg::scale(&linalg::matmul(&raise, &ordered), C64::from(s.powi(ka as i32 + 1)))
        }
        Side::Left => {
            let g: Vec<C64> = lag.iter().map(|&a| C64::from(a)).collect();
            let ordered = fock::ordered_number_function(&g, Ordering::Antinormal, w);
            let norm = (ln_factorial(m) - ln_factorial(m + ka)).exp();
            linalg::scale(&linalg::matmul(&ordered, &raise), C64::from(norm))
        }
    };
    let op = op.submatrix(0, 0, dim, dim).to_owned();
    if k < 0 {
        linalg::adjoint(&op)
    } else {
        op
    }
}
