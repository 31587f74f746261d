//! The analytic damping basis of the optomechanical Liouvillian.

mod element;
mod mechanical;
mod oscillator;
mod overlap;

pub use element::{conjugate_element, left_eigvec, right_eigvec, BasisElement, DampingBasis, DEGENERACY_REL};
pub use mechanical::{mechanical_eigvec, MechanicalFrame};
pub use oscillator::{oscillator_eigvec, oscillator_eigvec_series, OscillatorFamily};
pub use overlap::{cross_trace_numerator, cross_trace_sum, overlap_coeff, overlap_coeff_literal, IndexPlusReading, PathBounds};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::params::{SystemParams, Variant};
pub use crate::superop::lambda_c;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

/// Index quadruple of one damping-basis element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EigenLabel {
    pub l: i64,
    pub n: usize,
    pub k: i64,
    pub m: usize,
    pub side: Side,
}

impl EigenLabel {
    pub fn right(l: i64, n: usize, k: i64, m: usize) -> Self {
        EigenLabel { l, n, k, m, side: Side::Right }
    }

    pub fn left(l: i64, n: usize, k: i64, m: usize) -> Self {
        EigenLabel { l, n, k, m, side: Side::Left }
    }

    /// The `(-l, n, -k, m)` partner.
    pub fn conjugate(self) -> Self {
        EigenLabel { l: -self.l, k: -self.k, ..self }
    }

    pub fn with_side(self, side: Side) -> Self {
        EigenLabel { side, ..self }
    }

    pub fn indices(&self) -> (i64, usize, i64, usize) {
        (self.l, self.n, self.k, self.m)
    }
}

impl std::fmt::Display for EigenLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(l={}, n={}, k={}, m={})", self.l, self.n, self.k, self.m)
    }
}

/// Parameters of the asymmetric displacement that reduces `M^{(l,n)}` to a
/// damped oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementParams {
    pub beta: C64,
    pub alpha_ln: C64,
    pub beta_ln: C64,
    pub eta_l: C64,
}

/// `lambda_M^{(k,m)} = -i k nu - (m + |k|/2) gamma`.
pub fn lambda_m(k: i64, m: usize, params: &SystemParams) -> C64 {
    C64::new(-(m as f64 + k.unsigned_abs() as f64 / 2.0) * params.gamma, -(k as f64) * params.nu)
}

/// `chi / |nu - i gamma/2|^2`, the finite form of `|beta|^2 / chi`.
fn beta_sq_over_chi(params: &SystemParams) -> f64 {
    params.chi / (params.nu * params.nu + params.gamma * params.gamma / 4.0)
}

pub fn coupling_beta(params: &SystemParams) -> C64 {
    match params.variant {
        Variant::Weak => C64::from(params.chi) / C64::new(params.nu, -params.gamma / 2.0),
        Variant::Dsme => C64::from(params.chi / params.nu),
    }
}

pub fn displacement_params(l: i64, n: usize, params: &SystemParams) -> DisplacementParams {
    let beta = coupling_beta(params);
    let lf = l as f64;
    let nf = n as f64;
    match params.variant {
        Variant::Weak => {
            let q = beta_sq_over_chi(params);
            let alpha_ln = -(nf + lf) * beta - C64::new(0.0, lf * q * params.gamma * params.mbar);
            let beta_ln = alpha_ln + lf * beta.conj();
            let eta_l = C64::new(0.0, lf * q * params.gamma * (2.0 * params.mbar + 1.0));
            DisplacementParams { beta, alpha_ln, beta_ln, eta_l }
        }
        Variant::Dsme => DisplacementParams { beta, alpha_ln: -(nf + lf) * beta, beta_ln: -nf * beta, eta_l: C64::new(0.0, 0.0) },
    }
}

/// Interaction correction `epsilon_{l,n}` to the block eigenvalues.
pub fn epsilon(l: i64, n: usize, params: &SystemParams) -> C64 {
    if l == 0 {
        return C64::new(0.0, 0.0);
    }
    let lf = l as f64;
    let la = l.unsigned_abs() as f64;
    let osc = (2.0 * n as f64 + la) * params.nu;
    match params.variant {
        Variant::Weak => {
            let b2 = coupling_beta(params).norm_sqr();
            lf * b2 * C64::new(-lf * params.gamma * (params.mbar + 0.5), osc)
        }
        Variant::Dsme => {
            let b2 = (params.chi / params.nu).powi(2);
            lf * b2 * C64::new(-4.0 * lf * params.gamma * params.inverse_log_occupation(), osc)
        }
    }
}

/// `lambda_C^{(l,n)} + epsilon_{l,n}`, the block offset shared by all `(k, m)`.
pub fn block_offset(l: i64, n: usize, params: &SystemParams) -> C64 {
    lambda_c(l, n, params) + epsilon(l, n, params)
}

/// `lambda^{(l,n)}_{k,m}`; negative `l` is the conjugate of the `(-l, -k)` value.
pub fn eigenvalue(l: i64, n: usize, k: i64, m: usize, params: &SystemParams) -> C64 {
    if l < 0 {
        return eigenvalue(-l, n, -k, m, params).conj();
    }
    lambda_m(k, m, params) + block_offset(l, n, params)
}

pub fn label_eigenvalue(label: &EigenLabel, params: &SystemParams) -> C64 {
    eigenvalue(label.l, label.n, label.k, label.m, params)
}

/// All right labels with `|l| <= l_max`, `n <= n_max`, `|k| <= k_max`, `m <= m_max`.
pub fn label_box(l_max: usize, n_max: usize, k_max: usize, m_max: usize) -> Vec<EigenLabel> {
    let (lm, km) = (l_max as i64, k_max as i64);
    let mut out = Vec::new();
    for l in -lm..=lm {
        for n in 0..=n_max {
            for k in -km..=km {
                for m in 0..=m_max {
                    out.push(EigenLabel::right(l, n, k, m));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn cavity_eigenvalues() {
        let p = SystemParams::desk();
        assert_eq!(lambda_c(0, 0, &p), C64::new(0.0, 0.0));
        assert_eq!(lambda_c(1, 0, &p), C64::new(-p.kappa / 2.0, -p.omega));
        assert!(close(lambda_c(0, 2, &p), C64::new(-0.6, 0.0), 1e-15));
    }

    #[test]
    fn mechanical_eigenvalues() {
        let p = SystemParams::desk();
        assert_eq!(lambda_m(0, 0, &p), C64::new(0.0, 0.0));
        assert_eq!(lambda_m(1, 0, &p), C64::new(-p.gamma / 2.0, -p.nu));
        assert!(close(lambda_m(-2, 1, &p), C64::new(-0.04, 2.0), 1e-15));
    }

    #[test]
    fn displacement_parameters() {
        let p = SystemParams::desk();
        for n in 0..4 {
            let d = displacement_params(0, n, &p);
            assert_eq!(d.eta_l, C64::new(0.0, 0.0));
            assert_eq!(d.alpha_ln, d.beta_ln);
            assert!(close(d.alpha_ln, -(n as f64) * d.beta, 1e-16));
        }
        let d = displacement_params(2, 1, &p);
        assert!(close(d.beta, C64::from(0.05) / C64::new(1.0, -0.01), 1e-16));
        assert!(close(d.beta_ln - d.alpha_ln, 2.0 * d.beta.conj(), 1e-16));
        let q = SystemParams::desk_dsme();
        let d = displacement_params(1, 0, &q);
        assert_eq!(d.alpha_ln, C64::from(-0.5));
        assert_eq!(d.beta_ln, C64::from(0.0));
        assert_eq!(d.eta_l, C64::from(0.0));
        let d = displacement_params(3, 2, &q);
        assert!(close(d.beta_ln - d.alpha_ln, 3.0 * d.beta, 1e-15));
        assert_eq!(d.beta.im, 0.0);
    }

    #[test]
    fn zero_coupling_limit_is_finite() {
        let p = SystemParams { chi: 0.0, ..SystemParams::desk() };
        let d = displacement_params(2, 3, &p);
        assert_eq!(d.alpha_ln, C64::new(0.0, 0.0));
        assert_eq!(d.eta_l, C64::new(0.0, 0.0));
        assert_eq!(epsilon(2, 3, &p), C64::new(0.0, 0.0));
    }

    #[test]
    fn epsilon_values() {
        let p = SystemParams::desk();
        for n in 0..5 {
            assert_eq!(epsilon(0, n, &p), C64::new(0.0, 0.0));
            assert_eq!(epsilon(0, n, &SystemParams::desk_dsme()), C64::new(0.0, 0.0));
        }
        let b2 = coupling_beta(&p).norm_sqr();
        assert!(close(epsilon(1, 0, &p), b2 * C64::new(-p.gamma * (p.mbar + 0.5), p.nu), 1e-18));
        // |beta|^2 = 0.0025/1.0001 here
        let want = 0.0025 / 1.0001 * C64::new(-0.02, 3.0);
        assert!(close(epsilon(1, 1, &p), want, 1e-16));
        let hot = SystemParams { mbar: 3.0, ..p };
        assert_eq!(epsilon(2, 1, &hot).im, epsilon(2, 1, &p).im);
        let cold = SystemParams { mbar: 0.0, ..SystemParams::desk_dsme() };
        assert_eq!(epsilon(1, 1, &cold).re, 0.0);
    }

    #[test]
    fn eigenvalue_examples() {
        let p = SystemParams::desk();
        assert_eq!(eigenvalue(0, 0, 0, 0, &p), C64::new(0.0, 0.0));
        assert!(close(eigenvalue(0, 1, 0, 0, &p), C64::from(-p.kappa), 1e-16));
    }

    #[test]
    fn label_box_counts() {
        assert_eq!(label_box(2, 2, 2, 2).len(), 225);
        assert_eq!(label_box(0, 0, 0, 0).len(), 1);
    }

    proptest! {
        #[test]
        fn conjugation_is_exact(l in -4i64..=4, n in 0usize..5, k in -5i64..=5, m in 0usize..6, dsme in any::<bool>()) {
            let p = if dsme { SystemParams::desk_dsme() } else { SystemParams::desk() };
            let a = eigenvalue(l, n, k, m, &p);
            let b = eigenvalue(-l, n, -k, m, &p);
            // exact IEEE equality; only the sign of a zero imaginary part may differ
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert!(a.im == -b.im);
        }

        #[test]
        fn additivity(l in -4i64..=4, n in 0usize..5, k in -5i64..=5, m in 0usize..6) {
            let p = SystemParams::desk();
            let d = eigenvalue(l, n, k, m, &p) - eigenvalue(l, n, 0, 0, &p);
            let want = lambda_m(k, m, &p);
            prop_assert!((d - want).norm() <= 4.0 * f64::EPSILON * eigenvalue(l, n, k, m, &p).norm());
        }
    }
}
