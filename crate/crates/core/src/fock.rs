//! Operators on a truncated bosonic Fock space.
//!
//! A [`FockOperator`] is a dense `dim x dim` matrix in the number basis; its
//! dimension is the matrix size.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::special::ln_factorial;

pub type FockOperator = CMat;

pub const DEFAULT_BUFFER: usize = 20;

/// Annihilation operator, `<p|b|q> = sqrt(q) delta_{p,q-1}`.
pub fn ladder(dim: usize) -> Result<FockOperator> {
    if dim == 0 {
        return Err(Error::InvalidParameter("Fock dimension must be at least 1".into()));
    }
    Ok(Mat::from_fn(dim, dim, |p, q| if q == p + 1 { C64::from((q as f64).sqrt()) } else { ZERO }))
}

pub fn creation(dim: usize) -> Result<FockOperator> {
    Ok(linalg::adjoint(&ladder(dim)?))
}

pub fn number(dim: usize) -> FockOperator {
    Mat::from_fn(dim, dim, |p, q| if p == q { C64::from(p as f64) } else { ZERO })
}

pub fn diagonal(values: &[C64]) -> FockOperator {
    let n = values.len();
    Mat::from_fn(n, n, |p, q| if p == q { values[p] } else { ZERO })
}

/// `D(alpha) = exp(alpha b^dag - alpha^* b)` exponentiated on `dim + buffer`
/// levels and cut back to the leading `dim x dim` block.
pub fn displacement(alpha: C64, dim: usize, buffer: usize) -> Result<FockOperator> {
    if dim == 0 {
        return Err(Error::InvalidParameter("Fock dimension must be at least 1".into()));
    }
    if alpha == ZERO {
        return Ok(linalg::identity(dim));
    }
    let w = dim + buffer;
    let b = ladder(w)?;
    let gen = Mat::from_fn(w, w, |i, j| alpha * b[(j, i)].conj() - alpha.conj() * b[(i, j)]);
    let e = linalg::expm(&gen);
    Ok(e.submatrix(0, 0, dim, dim).to_owned())
}

/// `exp(eta b)`: the series stops at order `dim - 1` because `b` is nilpotent.
pub fn exp_lowering(eta: C64, dim: usize) -> FockOperator {
    // <p| e^{eta b} |q> = eta^{q-p}/(q-p)! * sqrt(q!/p!)
    Mat::from_fn(dim, dim, |p, q| {
        if q < p {
            return ZERO;
        }
        let r = q - p;
        if r == 0 {
            return ONE;
        }
        if eta == ZERO {
            return ZERO;
        }
        let mag = (r as f64 * eta.norm().ln() - ln_factorial(r) + 0.5 * (ln_factorial(q) - ln_factorial(p))).exp();
        C64::from_polar(mag, r as f64 * eta.arg())
    })
}

/// `exp(eta b^dag)`.
pub fn exp_raising(eta: C64, dim: usize) -> FockOperator {
    let low = exp_lowering(eta.conj(), dim);
    linalg::adjoint(&low)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    Normal,
    Antinormal,
}

/// `{g(b^dag b)}` with `(b^dag b)^i` replaced by `b^dag^i b^i` (normal) or
/// `b^i b^dag^i` (antinormal), for `g(x) = sum_i coeffs[i] x^i`.
pub fn ordered_number_function(coeffs: &[C64], ordering: Ordering, dim: usize) -> FockOperator {
    let diag: Vec<C64> = (0..dim)
        .map(|q| {
            let mut s = ZERO;
            for (i, &g) in coeffs.iter().enumerate() {
                if g == ZERO {
                    continue;
                }
                let ratio = match ordering {
                    Ordering::Normal => {
                        if i > q {
                            continue;
                        }
                        (ln_factorial(q) - ln_factorial(q - i)).exp()
                    }
                    Ordering::Antinormal => (ln_factorial(q + i) - ln_factorial(q)).exp(),
                };
                s += g * ratio;
            }
            s
        })
        .collect();
    diagonal(&diag)
}

/// Thermal state with occupation `mbar`, truncated (not renormalised).
pub fn thermal(mbar: f64, dim: usize) -> FockOperator {
    let c = mbar / (mbar + 1.0);
    let diag: Vec<C64> = (0..dim).map(|q| C64::from(c.powi(q as i32) / (mbar + 1.0))).collect();
    diagonal(&diag)
}

/// `|p><q|` on `dim` levels.
pub fn projector(p: usize, q: usize, dim: usize) -> FockOperator {
    let mut m = linalg::zeros(dim, dim);
    m[(p, q)] = ONE;
    m
}

/// Coherent state `|alpha><alpha|` truncated to `dim` levels.
pub fn coherent(alpha: C64, dim: usize) -> FockOperator {
    let amp: Vec<C64> = (0..dim)
        .map(|q| {
            if alpha == ZERO {
                return if q == 0 { ONE } else { ZERO };
            }
            let mag = (-0.5 * alpha.norm_sqr() + q as f64 * alpha.norm().ln() - 0.5 * ln_factorial(q)).exp();
            C64::from_polar(mag, q as f64 * alpha.arg())
        })
        .collect();
    Mat::from_fn(dim, dim, |p, q| amp[p] * amp[q].conj())
}
