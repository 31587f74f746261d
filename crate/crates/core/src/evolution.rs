//! Expansion of a state in the damping basis and its analytic propagation.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisElement, DampingBasis, EigenLabel};
use crate::error::{Error, Result};
use crate::fock;
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::par::Execution;
use crate::params::SystemParams;
use crate::superop::joint_ladders;

/// Reconstruction error at `t = 0` above which a decomposition warns.
pub const RECONSTRUCTION_WARN: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct SpectralTerm {
    pub label: EigenLabel,
    pub eigenvalue: C64,
    pub coefficient: C64,
    pub element: Arc<BasisElement>,
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub terms: Vec<SpectralTerm>,
    pub nc: usize,
    pub nm: usize,
    pub params: SystemParams,
    /// Trace-norm distance between the `t = 0` reconstruction and the input.
    pub reconstruction_error: f64,
}

/// Labels with `n + |l| <= Nc - 2` and `m + |k| <= m_cut`.
pub fn default_label_set(nc: usize, m_cut: usize) -> Vec<EigenLabel> {
    let mut out = Vec::new();
    if nc < 2 {
        return out;
    }
    let top = (nc - 2) as i64;
    for l in -top..=top {
        for n in 0..=(top - l.abs()) as usize {
            for k in -(m_cut as i64)..=m_cut as i64 {
                for m in 0..=(m_cut - k.unsigned_abs() as usize) {
                    out.push(EigenLabel::right(l, n, k, m));
                }
            }
        }
    }
    out
}

/// Highest `j` with a nonzero cavity block of `rho` at coherence `l`, per `l`.
fn photon_support(rho: &CMat, nc: usize, nm: usize) -> Vec<(i64, usize)> {
    let mut out: Vec<(i64, usize)> = Vec::new();
    for r in 0..nc {
        for c in 0..nc {
            let mut nz = false;
            'scan: for q in 0..nm {
                for p in 0..nm {
                    if rho[(r * nm + p, c * nm + q)] != ZERO {
                        nz = true;
                        break 'scan;
                    }
                }
            }
            if !nz {
                continue;
            }
            let l = r as i64 - c as i64;
            let j = r.min(c);
            match out.iter_mut().find(|(ll, _)| *ll == l) {
                Some(e) => e.1 = e.1.max(j),
                None => out.push((l, j)),
            }
        }
    }
    out
}

/// Coefficients `Tr{rho_check^dag rho0}` over `labels` and the matching right elements.
///
/// Left elements are only built up to the photon support of `rho0`, and
/// labels whose coherence or photon block lies outside that support are
/// skipped since their coefficient vanishes identically.
pub fn decompose(basis: &DampingBasis, rho0: &CMat, labels: &[EigenLabel]) -> Result<SpectralDecomposition> {
    let (nc, nm) = (basis.nc, basis.nm);
    if rho0.nrows() != nc * nm || rho0.ncols() != nc * nm {
        return Err(Error::InvalidParameter(format!("state is {}x{}, expected {}x{}", rho0.nrows(), rho0.ncols(), nc * nm, nc * nm)));
    }
    let support = photon_support(rho0, nc, nm);
    let active: Vec<(EigenLabel, usize)> = labels
        .iter()
        .filter_map(|lab| {
            let (_, j_max) = support.iter().find(|(l, _)| *l == lab.l)?;
            (lab.n <= *j_max).then_some((*lab, *j_max))
        })
        .collect();

    let coefs = basis.exec.map(&active, |(lab, j_max)| -> Result<Option<(EigenLabel, C64)>> {
        let left = basis.left_element_upto(lab, *j_max)?;
        let c = left.inner_state(rho0, nc);
        Ok((c != ZERO).then_some((*lab, c)))
    });
    let mut nonzero = Vec::new();
    for c in coefs {
        if let Some(x) = c? {
            nonzero.push(x);
        }
    }
    let rights = basis.exec.map(&nonzero, |(lab, _)| basis.right_element(lab));
    let mut terms = Vec::with_capacity(nonzero.len());
    for ((lab, c), r) in nonzero.into_iter().zip(rights) {
        let e = r?;
        terms.push(SpectralTerm { label: lab, eigenvalue: e.eigenvalue, coefficient: c, element: Arc::new(e) });
    }
    let mut d = SpectralDecomposition { terms, nc, nm, params: basis.params, reconstruction_error: 0.0 };
    let rec = d.evolve(0.0);
    d.reconstruction_error = linalg::trace_norm(&linalg::axpy(&rec, -ONE, rho0))?;
    if d.reconstruction_error > RECONSTRUCTION_WARN {
        log::warn!(
            "reconstruction error {:.2e} at t = 0: label set too small or state too close to the truncation edge",
            d.reconstruction_error
        );
    }
    Ok(d)
}

impl SpectralDecomposition {
    /// `rho(t) = sum_i c_i e^{lambda_i t} rho_hat_i`.
    pub fn evolve(&self, t: f64) -> CMat {
        let d = self.nc * self.nm;
        let mut out = linalg::zeros(d, d);
        for term in &self.terms {
            let w = term.coefficient * (term.eigenvalue * t).exp();
            term.element.accumulate(w, &mut out, self.nc);
        }
        out
    }

    pub fn evolve_many(&self, times: &[f64], exec: Execution) -> Vec<CMat> {
        exec.map(times, |&t| self.evolve(t))
    }

    pub fn coefficient(&self, label: &EigenLabel) -> C64 {
        self.terms.iter().find(|t| t.label.indices() == label.indices()).map(|t| t.coefficient).unwrap_or(ZERO)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    PhotonNumber,
    PhononNumber,
    MechQuadrature,
    Purity,
    Trace,
}

impl Observable {
    pub const ALL: [Observable; 5] =
        [Observable::PhotonNumber, Observable::PhononNumber, Observable::MechQuadrature, Observable::Purity, Observable::Trace];

    pub fn name(self) -> &'static str {
        match self {
            Observable::PhotonNumber => "photon_number",
            Observable::PhononNumber => "phonon_number",
            Observable::MechQuadrature => "mech_quadrature",
            Observable::Purity => "purity",
            Observable::Trace => "trace",
        }
    }
}

/// `Tr{rho O}` for each requested observable (`Tr{rho^2}` for purity).
pub fn observables(rho: &CMat, nc: usize, nm: usize, which: &[Observable]) -> Result<Vec<(Observable, C64)>> {
    let (a, b) = joint_ladders(nc, nm)?;
    let expect = |op: &CMat| linalg::hs_inner(&linalg::adjoint(op), rho);
    Ok(which
        .iter()
        .map(|&o| {
            let v = match o {
                Observable::PhotonNumber => expect(&linalg::matmul(&linalg::adjoint(&a), &a)),
                Observable::PhononNumber => expect(&linalg::matmul(&linalg::adjoint(&b), &b)),
                Observable::MechQuadrature => expect(&linalg::axpy(&b, ONE, &linalg::adjoint(&b))),
                Observable::Purity => linalg::hs_inner(&linalg::adjoint(rho), rho),
                Observable::Trace => linalg::trace(rho),
            };
            (o, v)
        })
        .collect())
}

/// Initial states for evolution runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    /// `|n><n| (x) |q><q|`.
    Fock { n: usize, q: usize },
    /// Cavity coherent state with a thermal mechanical state.
    CoherentThermal { alpha_re: f64, alpha_im: f64, mbar: f64 },
    /// Cavity Fock state with a thermal mechanical state.
    FockThermal { n: usize, mbar: f64 },
    /// Cavity coherent state with a mechanical Fock state.
    CoherentFock { alpha_re: f64, alpha_im: f64, q: usize },
    /// `|0><0| (x)` thermal state at the bath occupation.
    Steady,
}

impl InitialState {
    pub fn to_operator(&self, nc: usize, nm: usize, params: &SystemParams) -> Result<CMat> {
        let check = |what: &str, v: usize, dim: usize| {
            if v >= dim {
                Err(Error::InvalidParameter(format!("{what} = {v} does not fit in {dim} levels")))
            } else {
                Ok(())
            }
        };
        let (cav, mech) = match *self {
            InitialState::Fock { n, q } => {
                check("n", n, nc)?;
                check("q", q, nm)?;
                (fock::projector(n, n, nc), fock::projector(q, q, nm))
            }
            InitialState::CoherentThermal { alpha_re, alpha_im, mbar } => {
                (fock::coherent(C64::new(alpha_re, alpha_im), nc), fock::thermal(mbar, nm))
            }
            InitialState::FockThermal { n, mbar } => {
                check("n", n, nc)?;
                (fock::projector(n, n, nc), fock::thermal(mbar, nm))
            }
            InitialState::CoherentFock { alpha_re, alpha_im, q } => {
                check("q", q, nm)?;
                (fock::coherent(C64::new(alpha_re, alpha_im), nc), fock::projector(q, q, nm))
            }
            InitialState::Steady => (fock::projector(0, 0, nc), fock::thermal(params.mbar, nm)),
        };
        Ok(linalg::kron(&cav, &mech))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_labels_keep_clear_of_edges() {
        let labs = default_label_set(4, 3);
        assert!(labs.iter().all(|l| l.n + l.l.unsigned_abs() as usize <= 2));
        assert!(labs.iter().all(|l| l.m + l.k.unsigned_abs() as usize <= 3));
        assert!(labs.contains(&EigenLabel::right(0, 0, 0, 0)));
        assert!(labs.contains(&EigenLabel::right(-2, 0, 3, 0)));
        assert!(default_label_set(1, 3).is_empty());
    }

    #[test]
    fn steady_state_decomposes_to_one_term() {
        let p = SystemParams::desk();
        // left vectors grow like q^m, so keep the thermal tail far below the edge
        let basis = DampingBasis::new(p, 3, 60).unwrap();
        let rho = InitialState::Steady.to_operator(3, 60, &p).unwrap();
        let d = decompose(&basis, &rho, &default_label_set(3, 6)).unwrap();
        let big: Vec<_> = d.terms.iter().filter(|t| t.coefficient.norm() > 1e-10).collect();
        assert_eq!(big.len(), 1);
        assert_eq!(big[0].label.indices(), (0, 0, 0, 0));
        assert!((big[0].coefficient - ONE).norm() < 1e-10);
    }

    #[test]
    fn one_phonon_state_uses_only_mechanical_labels() {
        let p = SystemParams::desk();
        let basis = DampingBasis::new(p, 3, 50).unwrap();
        let rho = InitialState::Fock { n: 0, q: 1 }.to_operator(3, 50, &p).unwrap();
        let d = decompose(&basis, &rho, &default_label_set(3, 45)).unwrap();
        assert!(d.terms.iter().all(|t| t.label.l == 0 && t.label.n == 0));
        assert!(d.reconstruction_error < 1e-8, "{:e}", d.reconstruction_error);
    }

    #[test]
    fn observables_of_steady_state() {
        let p = SystemParams::desk();
        let rho = InitialState::Steady.to_operator(2, 40, &p).unwrap();
        let o = observables(&rho, 2, 40, &Observable::ALL).unwrap();
        let get = |w: Observable| o.iter().find(|(x, _)| *x == w).unwrap().1;
        assert!(get(Observable::PhotonNumber).norm() < 1e-15);
        assert!((get(Observable::PhononNumber).re - p.mbar).abs() < 1e-8);
        assert!(get(Observable::MechQuadrature).norm() < 1e-15);
        assert!((get(Observable::Trace).re - 1.0).abs() < 1e-12);
        let purity = get(Observable::Purity).re;
        assert!((purity - 1.0 / (2.0 * p.mbar + 1.0)).abs() < 1e-10);
    }

    #[test]
    fn photon_number_decays_exponentially() {
        let p = SystemParams::desk();
        let (nc, nm) = (3, 24);
        let basis = DampingBasis::new(p, nc, nm).unwrap();
        let rho = InitialState::FockThermal { n: 1, mbar: p.mbar }.to_operator(nc, nm, &p).unwrap();
        let d = decompose(&basis, &rho, &default_label_set(nc, 8)).unwrap();
        for t in [0.0, 1.0, 10.0, 50.0] {
            let r = d.evolve(t);
            let o = observables(&r, nc, nm, &[Observable::PhotonNumber, Observable::Trace]).unwrap();
            assert!((o[0].1.re - (-p.kappa * t).exp()).abs() < 1e-6, "t={t}: {}", o[0].1);
            assert!((o[1].1 - ONE).norm() < 1e-8);
        }
    }

    #[test]
    fn random_cavity_states_are_reconstructed() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let p = SystemParams::desk();
        let (nc, nm) = (3, 26);
        let basis = DampingBasis::new(p, nc, nm).unwrap();
        let labels = default_label_set(nc, 12);
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..3 {
            // G G^dag on the two photon levels below the edge
            let mut g = linalg::zeros(nc, nc);
            for i in 0..nc - 1 {
                for j in 0..nc - 1 {
                    g[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
            }
            let mut cav = linalg::matmul(&g, &linalg::adjoint(&g));
            let tr = linalg::trace(&cav);
            for i in 0..nc {
                for j in 0..nc {
                    cav[(i, j)] /= tr;
                }
            }
            let rho = linalg::kron(&cav, &fock::thermal(p.mbar, nm));
            let d = decompose(&basis, &rho, &labels).unwrap();
            assert!(d.reconstruction_error < 1e-5, "{:e}", d.reconstruction_error);
        }
    }

    #[test]
    fn initial_state_validation() {
        let p = SystemParams::desk();
        assert!(InitialState::Fock { n: 3, q: 0 }.to_operator(3, 5, &p).is_err());
        let r = InitialState::CoherentThermal { alpha_re: 0.3, alpha_im: 0.1, mbar: 0.5 }.to_operator(10, 30, &p).unwrap();
        assert!((linalg::trace(&r).re - 1.0).abs() < 1e-10);
    }
}
