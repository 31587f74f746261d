use super::{displacement_params, DisplacementParams, OscillatorFamily, Side};
use crate::error::{Error, Result};
use crate::fock::{self, FockOperator};
use crate::linalg::{self, CMat, ZERO};
use crate::params::SystemParams;

/// The similarity transforms taking damped-oscillator eigenvectors to
/// eigenvectors of `M^{(l,n)}`:
/// right `D^dag(alpha) e^{-eta b} mu e^{eta b} D(beta_ln)`,
/// left `D^dag(alpha) e^{-eta b^dag} mu e^{eta b^dag} D(beta_ln)`.
///
/// The transforms act on `nm + buffer` levels and the result is cut back to
/// `nm`; only the rows and columns that survive the cut are kept.
#[derive(Clone, Debug)]
pub struct MechanicalFrame {
    pub l: i64,
    pub n: usize,
    pub nm: usize,
    pub work: usize,
    pub disp: DisplacementParams,
    identity: bool,
    right_pre: CMat,
    right_post: CMat,
    left_pre: CMat,
    left_post: CMat,
}

impl MechanicalFrame {
    pub fn new(params: &SystemParams, l: i64, n: usize, nm: usize, buffer: usize) -> Result<Self> {
        if l < 0 {
            return Err(Error::InvalidParameter(format!("mechanical frame needs l >= 0, got {l}")));
        }
        let disp = displacement_params(l, n, params);
        let identity = disp.alpha_ln == ZERO && disp.beta_ln == ZERO && disp.eta_l == ZERO;
        let work = if identity { nm } else { nm + buffer };
        let (right_pre, right_post, left_pre, left_post) = if identity {
            let e = linalg::zeros(0, 0);
            (e.clone(), e.clone(), e.clone(), e)
        } else {
            let d_alpha_dag = linalg::adjoint(&fock::displacement(disp.alpha_ln, work, buffer)?);
            let d_beta = fock::displacement(disp.beta_ln, work, buffer)?;
            let low_m = fock::exp_lowering(-disp.eta_l, work);
            let low_p = fock::exp_lowering(disp.eta_l, work);
            let up_m = fock::exp_raising(-disp.eta_l, work);
            let up_p = fock::exp_raising(disp.eta_l, work);
            let rows = |a: &CMat| a.submatrix(0, 0, nm, work).to_owned();
            let cols = |a: &CMat| a.submatrix(0, 0, work, nm).to_owned();
            (
                rows(&linalg::matmul(&d_alpha_dag, &low_m)),
                cols(&linalg::matmul(&low_p, &d_beta)),
                rows(&linalg::matmul(&d_alpha_dag, &up_m)),
                cols(&linalg::matmul(&up_p, &d_beta)),
            )
        };
        Ok(MechanicalFrame { l, n, nm, work, disp, identity, right_pre, right_post, left_pre, left_post })
    }

    /// Applies the transform to an oscillator eigenvector given on `work` levels.
    pub fn transform(&self, mu: &FockOperator, side: Side) -> FockOperator {
        assert_eq!(mu.nrows(), self.work);
        if self.identity {
            return mu.clone();
        }
        let (pre, post) = match side {
            Side::Right => (&self.right_pre, &self.right_post),
            Side::Left => (&self.left_pre, &self.left_post),
        };
        linalg::matmul(&linalg::matmul(pre, mu), post)
    }

    pub fn eigvec(&self, family: &OscillatorFamily, k: i64, m: usize, side: Side) -> FockOperator {
        assert_eq!(family.dim, self.work);
        self.transform(&family.get(k, m, side), side)
    }
}

/// Displaced eigenvector of `M^{(l,n)}` (right) or its adjoint (left), for `l >= 0`.
pub fn mechanical_eigvec(
    l: i64,
    n: usize,
    k: i64,
    m: usize,
    side: Side,
    params: &SystemParams,
    nm: usize,
    buffer: usize,
) -> Result<FockOperator> {
    let frame = MechanicalFrame::new(params, l, n, nm, buffer)?;
    let family = OscillatorFamily::new(k.unsigned_abs() as usize, m, params.mbar, frame.work);
    Ok(frame.eigvec(&family, k, m, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{eigenvalue, oscillator_eigvec};
    use crate::linalg::{axpy, frobenius, hs_inner, ONE};
    use crate::superop::build_m_ln;

    #[test]
    fn trivial_frame_is_oscillator() {
        let p = SystemParams::desk();
        for side in [Side::Right, Side::Left] {
            let a = mechanical_eigvec(0, 0, 2, 1, side, &p, 14, 20).unwrap();
            let b = oscillator_eigvec(2, 1, p.mbar, side, 14);
            assert_eq!(a, b);
        }
    }

    // Nm = 14 plus a 20-level buffer: at 14 levels alone the thermal tail
    // (1/3)^14 already limits residuals to about 1e-6.
    const NM_BUFFERED: usize = 34;

    #[test]
    fn residuals_weak_desk() {
        let p = SystemParams::desk();
        let nm = NM_BUFFERED;
        for (l, n) in [(0i64, 1usize), (1, 0), (1, 1), (2, 1)] {
            let m_ln = build_m_ln(&p, l, n, nm, false).unwrap();
            for k in -2i64..=2 {
                for m in 0..=2 {
                    let lam = eigenvalue(l, n, k, m, &p);
                    let v = mechanical_eigvec(l, n, k, m, Side::Right, &p, nm, 20).unwrap();
                    let r = frobenius(&axpy(&m_ln.apply(&v), -lam, &v)) / frobenius(&v);
                    assert!(r < 1e-7, "l={l} n={n} k={k} m={m}: {r:e}");
                }
            }
        }
    }

    #[test]
    fn biorthonormal_weak_desk() {
        let p = SystemParams::desk();
        let nm = NM_BUFFERED;
        for (l, n) in [(0i64, 2usize), (1, 1), (2, 0)] {
            for k in -2i64..=2 {
                for m in 0..=2 {
                    let left = mechanical_eigvec(l, n, k, m, Side::Left, &p, nm, 20).unwrap();
                    for kp in -2i64..=2 {
                        for mp in 0..=2 {
                            let right = mechanical_eigvec(l, n, kp, mp, Side::Right, &p, nm, 20).unwrap();
                            let g = hs_inner(&left, &right);
                            let want = if (k, m) == (kp, mp) { ONE } else { ZERO };
                            assert!((g - want).norm() < 1e-7, "l={l} n={n} ({k},{m})x({kp},{mp}): {g}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn negative_l_rejected() {
        assert!(MechanicalFrame::new(&SystemParams::desk(), -1, 0, 5, 5).is_err());
    }
}
