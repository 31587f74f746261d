use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;

use super::{block_offset, label_eigenvalue};
use super::{eigenvalue, lambda_m, overlap_coeff, EigenLabel, MechanicalFrame, OscillatorFamily, PathBounds, Side};
use crate::error::{Error, Result};
use crate::fock::{FockOperator, DEFAULT_BUFFER};
use crate::linalg::{self, BandedLu, CMat, Csr, ONE, ZERO};
use crate::par::Execution;
use crate::params::SystemParams;
use crate::special::ln_factorial;
use crate::superop::build_m_ln;

/// Relative gap (in units of `max(gamma, kappa)`) below which a resolvent is
/// treated as hitting a spectral point of its block.
pub const DEGENERACY_REL: f64 = 1e-8;

/// Largest relative size of the component of a right-hand side along a
/// colliding mode that can still be projected out.
const COUPLING_TOL: f64 = 1e-9;

/// Shift (in units of `max(gamma, kappa)`) applied to a resolvent that sits
/// on a colliding mode.
const SHIFT_REL: f64 = 1e-12;

/// Distance (in units of `max(gamma, kappa)`) within which the truncated
/// block must have an eigenvalue for a collision to count.
const MODE_RESOLVED: f64 = 1e-6;

/// Smallest `|<w, u>|` between unit left and right vectors of a colliding
/// mode; below it the block is treated as defective.
const NONDEFECTIVE: f64 = 1e-8;

/// One damping-basis element, `sum_j |row_j><col_j| (x) blocks_j`.
///
/// For `l >= 0` block `j` sits at cavity element `|j+l><j|`; for `l < 0` at
/// `|j><j+|l||`.
#[derive(Clone, Debug)]
pub struct BasisElement {
    pub label: EigenLabel,
    pub eigenvalue: C64,
    pub blocks: Vec<(usize, FockOperator)>,
}

impl BasisElement {
    pub fn cavity_indices(&self, j: usize) -> (usize, usize) {
        let l = self.label.l;
        if l >= 0 {
            (j + l as usize, j)
        } else {
            (j, j + l.unsigned_abs() as usize)
        }
    }

    pub fn block(&self, j: usize) -> Option<&FockOperator> {
        self.blocks.iter().find(|(jj, _)| *jj == j).map(|(_, b)| b)
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|(_, b)| linalg::frobenius(b).powi(2)).sum::<f64>().sqrt()
    }

    pub fn nm(&self) -> usize {
        self.blocks.first().map(|(_, b)| b.nrows()).unwrap_or(0)
    }

    /// The element as an operator on `nc * nm` joint levels.
    pub fn to_joint(&self, nc: usize) -> CMat {
        let nm = self.nm();
        let mut out = linalg::zeros(nc * nm, nc * nm);
        for (j, b) in &self.blocks {
            let (r, c) = self.cavity_indices(*j);
            if r >= nc || c >= nc {
                continue;
            }
            for q in 0..nm {
                for p in 0..nm {
                    out[(r * nm + p, c * nm + q)] = b[(p, q)];
                }
            }
        }
        out
    }

    /// `Tr{self^dag other}` computed block by block.
    pub fn inner(&self, other: &BasisElement) -> C64 {
        if self.label.l != other.label.l {
            return ZERO;
        }
        let mut s = ZERO;
        for (j, b) in &self.blocks {
            if let Some(o) = other.block(*j) {
                s += linalg::hs_inner(b, o);
            }
        }
        s
    }

    /// `Tr{self^dag rho}` for a joint operator `rho` on `nc * nm` levels.
    pub fn inner_state(&self, rho: &CMat, nc: usize) -> C64 {
        let nm = self.nm();
        assert_eq!(rho.nrows(), nc * nm);
        let mut s = ZERO;
        for (j, b) in &self.blocks {
            let (r, c) = self.cavity_indices(*j);
            if r >= nc || c >= nc {
                continue;
            }
            for q in 0..nm {
                for p in 0..nm {
                    s += b[(p, q)].conj() * rho[(r * nm + p, c * nm + q)];
                }
            }
        }
        s
    }

    /// Adds `coef * self` into a joint operator.
    pub fn accumulate(&self, coef: C64, out: &mut CMat, nc: usize) {
        let nm = self.nm();
        for (j, b) in &self.blocks {
            let (r, c) = self.cavity_indices(*j);
            if r >= nc || c >= nc {
                continue;
            }
            for q in 0..nm {
                for p in 0..nm {
                    out[(r * nm + p, c * nm + q)] += coef * b[(p, q)];
                }
            }
        }
    }
}

/// The `(-l, n, -k, m)` element obtained by Hermitian conjugation.
pub fn conjugate_element(elem: &BasisElement) -> BasisElement {
    BasisElement {
        label: elem.label.conjugate(),
        eigenvalue: elem.eigenvalue.conj(),
        blocks: elem.blocks.iter().map(|(j, b)| (*j, linalg::adjoint(b))).collect(),
    }
}

/// Builds damping-basis elements for fixed parameters and truncation, caching
/// the displacement frames and oscillator eigenvectors they share.
pub struct DampingBasis {
    pub params: SystemParams,
    pub nc: usize,
    pub nm: usize,
    pub buffer: usize,
    pub exec: Execution,
    frames: Mutex<HashMap<(i64, usize), Arc<MechanicalFrame>>>,
    families: Mutex<HashMap<(usize, usize), Arc<OscillatorFamily>>>,
}

impl std::fmt::Debug for DampingBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DampingBasis")
            .field("params", &self.params)
            .field("nc", &self.nc)
            .field("nm", &self.nm)
            .field("buffer", &self.buffer)
            .finish()
    }
}

fn sqrt_ratio(n: usize, l: usize, j: usize) -> f64 {
    // sqrt(n!(n+l)! / (j!(j+l)!))
    (0.5 * (ln_factorial(n) + ln_factorial(n + l) - ln_factorial(j) - ln_factorial(j + l))).exp()
}

impl DampingBasis {
    pub fn new(params: SystemParams, nc: usize, nm: usize) -> Result<Self> {
        Self::with_buffer(params, nc, nm, DEFAULT_BUFFER)
    }

    pub fn with_buffer(params: SystemParams, nc: usize, nm: usize, buffer: usize) -> Result<Self> {
        params.validate()?;
        if nc == 0 || nm == 0 {
            return Err(Error::InvalidParameter(format!("dimensions must be >= 1, got Nc={nc}, Nm={nm}")));
        }
        Ok(DampingBasis {
            params,
            nc,
            nm,
            buffer,
            exec: Execution::default(),
            frames: Mutex::new(HashMap::new()),
            families: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn frame(&self, l: i64, n: usize) -> Result<Arc<MechanicalFrame>> {
        if let Some(f) = self.frames.lock().unwrap().get(&(l, n)) {
            return Ok(f.clone());
        }
        let f = Arc::new(MechanicalFrame::new(&self.params, l, n, self.nm, self.buffer)?);
        self.frames.lock().unwrap().entry((l, n)).or_insert_with(|| f.clone());
        Ok(f)
    }

    fn family(&self, k_abs: usize, m: usize, dim: usize) -> Arc<OscillatorFamily> {
        if let Some(f) = self.families.lock().unwrap().get(&(k_abs, dim)) {
            if f.m_max() >= m {
                return f.clone();
            }
        }
        let old = self.families.lock().unwrap().get(&(k_abs, dim)).map(|f| f.m_max()).unwrap_or(0);
        let m_max = m.max(2 * old).max(8);
        let f = Arc::new(OscillatorFamily::new(k_abs, m_max, self.params.mbar, dim));
        let mut g = self.families.lock().unwrap();
        let slot = g.entry((k_abs, dim)).or_insert_with(|| f.clone());
        if slot.m_max() < f.m_max() {
            *slot = f.clone();
        }
        f
    }

    /// `mu_hat^{(l,n)}_{k,m}` or `mu_check^{(l,n)}_{k,m}` on `nm` levels, `l >= 0`.
    pub fn mechanical(&self, l: i64, n: usize, k: i64, m: usize, side: Side) -> Result<FockOperator> {
        let frame = self.frame(l, n)?;
        let fam = self.family(k.unsigned_abs() as usize, m, frame.work);
        Ok(frame.eigvec(&fam, k, m, side))
    }

    fn check_label(&self, label: &EigenLabel) -> Result<()> {
        let top = label.n + label.l.unsigned_abs() as usize;
        if top >= self.nc {
            return Err(Error::Truncation(format!("{label} needs photon level {top} but Nc = {}", self.nc)));
        }
        Ok(())
    }

    fn collision_scale(&self) -> f64 {
        let s = self.params.gamma.max(self.params.kappa);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Spectral points of `M^{(l,j)}` within the degeneracy threshold of `lam`.
    fn collisions(&self, lam: C64, l: i64, j: usize) -> Vec<(i64, usize, f64)> {
        let thr = DEGENERACY_REL * self.collision_scale();
        let base = block_offset(l, j, &self.params);
        let kmax = self.nm as i64 - 1;
        let mut out = Vec::new();
        for k in -kmax..=kmax {
            for m in 0..self.nm {
                let gap = (lam - lambda_m(k, m, &self.params) - base).norm();
                if gap < thr {
                    out.push((k, m, gap));
                }
            }
        }
        out
    }

    /// Solves `(lam - M^{(l,j)}) x = rhs`, or `(lam^* - M^{(l,j) dag}) x = rhs`
    /// when `adjoint`, by banded LU.
    ///
    /// If `lam` coincides with a spectral point of the block, the colliding
    /// mode is projected out of the right-hand side and the solution, provided
    /// the right-hand side has no significant weight on it; otherwise the
    /// solve is reported as degenerate. The mode is taken from the truncated
    /// block itself (inverse iteration seeded with the analytic vectors), so
    /// the weight test is not polluted by truncation of the analytic left
    /// vector, which grows polynomially.
    pub fn resolvent(&self, label: &EigenLabel, lam: C64, l: i64, j: usize, rhs: &CMat, adjoint: bool) -> Result<CMat> {
        let nm = self.nm;
        let m = build_m_ln(&self.params, l, j, nm, false)?;
        let collisions = self.collisions(lam, l, j);
        let factor = |shift: C64| {
            let a = Csr::identity(nm * nm).scaled(lam + shift).add(-ONE, &m.mat);
            BandedLu::factor_with_bands(&a, nm + 1, nm + 1)
        };
        if collisions.is_empty() {
            return Self::plain_solve(label, &factor(ZERO)?, rhs, adjoint, l, j, nm);
        }
        // a tiny shift keeps the factorisation regular on an exact collision;
        // the colliding direction is projected out afterwards
        let lu = factor(C64::new(SHIFT_REL, SHIFT_REL) * self.collision_scale())?;

        let mut modes = Vec::new();
        for (kc, mc, gap) in collisions {
            let seed_r = linalg::vec(&self.mechanical(l, j, kc, mc, Side::Right)?);
            let seed_l = linalg::vec(&self.mechanical(l, j, kc, mc, Side::Left)?);
            let iterate = |mut v: Vec<C64>, adj: bool| {
                for _ in 0..3 {
                    if adj {
                        lu.solve_adjoint(&mut v);
                    } else {
                        lu.solve(&mut v);
                    }
                    let nv = linalg::vec_norm(&v);
                    v.iter_mut().for_each(|z| *z /= nv);
                }
                linalg::unvec(&v, nm)
            };
            let right = iterate(seed_r, false);
            let left = iterate(seed_l, true);
            let rl = linalg::hs_inner(&left, &right);
            // Near the truncation edge the analytic mode may not be a spectral
            // point of the truncated block at all; then there is nothing to avoid.
            let truncated_lam = linalg::hs_inner(&left, &m.apply(&right)) / rl;
            if !((truncated_lam - lam).norm() < MODE_RESOLVED * self.collision_scale()) {
                log::debug!(
                    "{label}: mode (l={l}, n={j}, k={kc}, m={mc}) is not resolved on {nm} levels (nearest truncated eigenvalue {truncated_lam:.6e})"
                );
                continue;
            }
            let (u, w) = if adjoint { (left, right) } else { (right, left) };
            let uw = linalg::hs_inner(&w, &u);
            // norm of the oblique projection of rhs onto the mode, relative to rhs
            let coupling =
                linalg::hs_inner(&w, rhs).norm() * linalg::frobenius(&u) / (uw.norm() * linalg::frobenius(rhs)).max(f64::MIN_POSITIVE);
            if !(coupling <= COUPLING_TOL) || uw.norm() < NONDEFECTIVE {
                return Err(Error::Degenerate {
                    label: label.to_string(),
                    colliding: format!("(l={l}, n={j}, k={kc}, m={mc})"),
                    gap,
                    coupling,
                });
            }
            log::debug!("{label}: deflating colliding mode (l={l}, n={j}, k={kc}, m={mc}), gap {gap:.2e}, coupling {coupling:.2e}");
            modes.push((u, w, uw));
        }
        if modes.is_empty() {
            return Self::plain_solve(label, &factor(ZERO)?, rhs, adjoint, l, j, nm);
        }
        let project = |x: &mut CMat| {
            for (u, w, uw) in &modes {
                let s = linalg::hs_inner(w, x) / uw;
                linalg::add_in_place(x, -s, u);
            }
        };

        let mut b = rhs.clone();
        project(&mut b);
        let mut v = linalg::vec(&b);
        if adjoint {
            lu.solve_adjoint(&mut v);
        } else {
            lu.solve(&mut v);
        }
        let mut x = linalg::unvec(&v, nm);
        project(&mut x);
        Ok(x)
    }

    fn plain_solve(label: &EigenLabel, lu: &BandedLu, rhs: &CMat, adjoint: bool, l: i64, j: usize, nm: usize) -> Result<CMat> {
        let mut v = linalg::vec(rhs);
        if adjoint {
            lu.solve_adjoint(&mut v);
        } else {
            lu.solve(&mut v);
        }
        if lu.min_pivot() < 1e-13 {
            log::warn!("{label}: resolvent at block (l={l}, j={j}) is nearly singular (pivot {:.1e})", lu.min_pivot());
        }
        Ok(linalg::unvec(&v, nm))
    }

    /// Right element built by the jump recursion, blocks `j = 0..=n`.
    pub fn right_element(&self, label: &EigenLabel) -> Result<BasisElement> {
        self.right_element_at(label, label_eigenvalue(label, &self.params))
    }

    /// The jump recursion run at a caller-chosen `lam` instead of the
    /// analytic eigenvalue. Off the spectrum the result is not an eigenvector;
    /// this is what negative controls use.
    pub fn right_element_at(&self, label: &EigenLabel, lam: C64) -> Result<BasisElement> {
        let label = label.with_side(Side::Right);
        if label.l < 0 {
            return Ok(conjugate_element(&self.right_element_at(&label.conjugate(), lam.conj())?));
        }
        self.check_label(&label)?;
        let (l, n, k, m) = label.indices();
        let mut blocks = Vec::with_capacity(n + 1);
        let mut cur = self.mechanical(l, n, k, m, Side::Right)?;
        blocks.push((n, cur.clone()));
        let lu = l as usize;
        for j in (1..=n).rev() {
            let f = self.params.kappa * ((j * (j + lu)) as f64).sqrt();
            let rhs = linalg::scale(&cur, C64::from(f));
            cur = self.resolvent(&label, lam, l, j - 1, &rhs, false)?;
            blocks.push((j - 1, cur.clone()));
        }
        blocks.reverse();
        Ok(BasisElement { label, eigenvalue: lam, blocks })
    }

    /// Highest photon block a left element can carry.
    pub fn left_top(&self, l: i64) -> usize {
        self.nc - 1 - l.unsigned_abs() as usize
    }

    /// Left element with blocks `j = n..=min(j_max, Nc-1-|l|)`.
    pub fn left_element_upto(&self, label: &EigenLabel, j_max: usize) -> Result<BasisElement> {
        let label = label.with_side(Side::Left);
        if label.l < 0 {
            return Ok(conjugate_element(&self.left_element_upto(&label.conjugate(), j_max)?));
        }
        self.check_label(&label)?;
        let (l, n, k, m) = label.indices();
        let lam = eigenvalue(l, n, k, m, &self.params);
        let top = self.left_top(l).min(j_max);
        let mut cur = self.mechanical(l, n, k, m, Side::Left)?;
        let mut blocks = vec![(n, cur.clone())];
        let lu = l as usize;
        for j in n + 1..=top {
            let f = self.params.kappa * ((j * (j + lu)) as f64).sqrt();
            let rhs = linalg::scale(&cur, C64::from(f));
            cur = self.resolvent(&label, lam, l, j, &rhs, true)?;
            blocks.push((j, cur.clone()));
        }
        Ok(BasisElement { label, eigenvalue: lam, blocks })
    }

    pub fn left_element(&self, label: &EigenLabel) -> Result<BasisElement> {
        self.left_element_upto(label, usize::MAX)
    }

    pub fn element(&self, label: &EigenLabel) -> Result<BasisElement> {
        match label.side {
            Side::Right => self.right_element(label),
            Side::Left => self.left_element(label),
        }
    }

    /// Builds many elements, in parallel when enabled.
    pub fn elements(&self, labels: &[EigenLabel]) -> Vec<Result<BasisElement>> {
        self.exec.map(labels, |lab| self.element(lab))
    }

    fn path_box(&self, k: i64, m: usize, bounds: PathBounds) -> Vec<(i64, usize)> {
        let kmax = k.abs() + bounds.k_extra as i64;
        let mut out = Vec::new();
        for kk in -kmax..=kmax {
            for mm in 0..=m + bounds.m_extra {
                out.push((kk, mm));
            }
        }
        out
    }

    fn path_denominator(&self, label: &EigenLabel, gap: C64) -> Option<C64> {
        if gap.norm() < DEGENERACY_REL * self.collision_scale() {
            log::warn!("{label}: path sum skips a resonant intermediate (gap {:.1e})", gap.norm());
            None
        } else {
            Some(gap)
        }
    }

    fn warn_if_not_decayed(&self, label: &EigenLabel, idx: &[(i64, usize)], v: &[C64], k: i64, m: usize, bounds: PathBounds) {
        let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let kmax = k.abs() + bounds.k_extra as i64;
        let edge = idx
            .iter()
            .zip(v)
            .filter(|((kk, mm), _)| kk.abs() == kmax || *mm == m + bounds.m_extra)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        if big > 0.0 && edge > 1e-10 * big {
            log::warn!("{label}: path-sum coefficients at the index bound are {:.1e} of the largest", edge / big);
        }
    }

    /// Right element from the expansion over index paths with closed-form overlaps.
    pub fn right_element_pathsum(&self, label: &EigenLabel, bounds: PathBounds) -> Result<BasisElement> {
        let label = label.with_side(Side::Right);
        if label.l < 0 {
            return Ok(conjugate_element(&self.right_element_pathsum(&label.conjugate(), bounds)?));
        }
        self.check_label(&label)?;
        let (l, n, k, m) = label.indices();
        let p = &self.params;
        let lam = eigenvalue(l, n, k, m, p);
        let idx = self.path_box(k, m, bounds);
        let c: Vec<Vec<C64>> =
            idx.iter().map(|&(ka, ma)| idx.iter().map(|&(kb, mb)| overlap_coeff(l, ka, ma, kb, mb, p)).collect()).collect();
        let mut v: Vec<C64> = idx.iter().map(|&x| if x == (k, m) { ONE } else { ZERO }).collect();
        let mut blocks = vec![(n, self.mechanical(l, n, k, m, Side::Right)?)];
        for s in (0..n).rev() {
            let mut next = vec![ZERO; idx.len()];
            for (a, &(ka, ma)) in idx.iter().enumerate() {
                let Some(den) = self.path_denominator(&label, lam - eigenvalue(l, s, ka, ma, p)) else { continue };
                let acc: C64 = c[a].iter().zip(&v).map(|(x, y)| x * y).sum();
                next[a] = p.kappa * acc / den;
            }
            v = next;
            self.warn_if_not_decayed(&label, &idx, &v, k, m, bounds);
            let mut blk = linalg::zeros(self.nm, self.nm);
            for (a, &(ka, ma)) in idx.iter().enumerate() {
                if v[a] != ZERO {
                    linalg::add_in_place(&mut blk, v[a], &self.mechanical(l, s, ka, ma, Side::Right)?);
                }
            }
            let f = sqrt_ratio(n, l as usize, s);
            blocks.push((s, linalg::scale(&blk, C64::from(f))));
        }
        blocks.reverse();
        Ok(BasisElement { label, eigenvalue: lam, blocks })
    }

    /// Left element from the path expansion, blocks `j = n..=min(j_max, Nc-1-|l|)`.
    pub fn left_element_pathsum(&self, label: &EigenLabel, bounds: PathBounds, j_max: usize) -> Result<BasisElement> {
        let label = label.with_side(Side::Left);
        if label.l < 0 {
            return Ok(conjugate_element(&self.left_element_pathsum(&label.conjugate(), bounds, j_max)?));
        }
        self.check_label(&label)?;
        let (l, n, k, m) = label.indices();
        let p = &self.params;
        let lam = eigenvalue(l, n, k, m, p);
        let idx = self.path_box(k, m, bounds);
        // ct[b][a] = conj(c^{l,b}_{a})
        let ct: Vec<Vec<C64>> =
            idx.iter().map(|&(kb, mb)| idx.iter().map(|&(ka, ma)| overlap_coeff(l, ka, ma, kb, mb, p).conj()).collect()).collect();
        let mut w: Vec<C64> = idx.iter().map(|&x| if x == (k, m) { ONE } else { ZERO }).collect();
        let mut blocks = vec![(n, self.mechanical(l, n, k, m, Side::Left)?)];
        for s in n + 1..=self.left_top(l).min(j_max) {
            let mut next = vec![ZERO; idx.len()];
            for (b, &(kb, mb)) in idx.iter().enumerate() {
                let Some(den) = self.path_denominator(&label, (lam - eigenvalue(l, s, kb, mb, p)).conj()) else { continue };
                let acc: C64 = ct[b].iter().zip(&w).map(|(x, y)| x * y).sum();
                next[b] = p.kappa * acc / den;
            }
            w = next;
            self.warn_if_not_decayed(&label, &idx, &w, k, m, bounds);
            let mut blk = linalg::zeros(self.nm, self.nm);
            for (b, &(kb, mb)) in idx.iter().enumerate() {
                if w[b] != ZERO {
                    linalg::add_in_place(&mut blk, w[b], &self.mechanical(l, s, kb, mb, Side::Left)?);
                }
            }
            let f = sqrt_ratio(s, l as usize, n);
            blocks.push((s, linalg::scale(&blk, C64::from(f))));
        }
        Ok(BasisElement { label, eigenvalue: lam, blocks })
    }
}

pub fn right_eigvec(label: &EigenLabel, params: &SystemParams, nc: usize, nm: usize) -> Result<BasisElement> {
    DampingBasis::new(*params, nc, nm)?.right_element(label)
}

pub fn left_eigvec(label: &EigenLabel, params: &SystemParams, nc: usize, nm: usize) -> Result<BasisElement> {
    DampingBasis::new(*params, nc, nm)?.left_element(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock;
    use crate::linalg::{axpy, frobenius};
    use crate::superop::{build_liouvillian, Part};

    fn right_residual(basis: &DampingBasis, e: &BasisElement) -> f64 {
        let l = build_liouvillian(&basis.params, basis.nc, basis.nm, Part::Full).unwrap();
        let rho = e.to_joint(basis.nc);
        frobenius(&axpy(&l.apply(&rho), -e.eigenvalue, &rho)) / frobenius(&rho)
    }

    #[test]
    fn steady_state_element() {
        let p = SystemParams::desk();
        let basis = DampingBasis::new(p, 3, 30).unwrap();
        let e = basis.right_element(&EigenLabel::right(0, 0, 0, 0)).unwrap();
        assert_eq!(e.blocks.len(), 1);
        assert!(right_residual(&basis, &e) < 1e-10);
        let want = linalg::kron(&fock::projector(0, 0, 3), &fock::thermal(p.mbar, 30));
        assert!(linalg::max_abs(&axpy(&e.to_joint(3), -ONE, &want)) < 1e-15);
        let left = basis.left_element(&EigenLabel::left(0, 0, 0, 0)).unwrap();
        assert_eq!(left.blocks.len(), 3);
        for (_, b) in &left.blocks {
            assert!(linalg::max_abs(&axpy(b, -ONE, &linalg::identity(30))) < 1e-12);
        }
    }

    #[test]
    fn two_block_right_element() {
        let basis = DampingBasis::new(SystemParams::desk(), 3, 14).unwrap();
        let e = basis.right_element(&EigenLabel::right(0, 1, 0, 0)).unwrap();
        assert_eq!(e.blocks.len(), 2);
        let r = right_residual(&basis, &e);
        assert!(r < 1e-7, "residual {r:e}");
    }

    #[test]
    fn conjugate_element_properties() {
        let basis = DampingBasis::new(SystemParams::desk(), 4, 30).unwrap();
        let e = basis.right_element(&EigenLabel::right(1, 1, -1, 1)).unwrap();
        let c = conjugate_element(&e);
        assert_eq!(c.label, EigenLabel::right(-1, 1, 1, 1));
        assert_eq!(c.eigenvalue, e.eigenvalue.conj());
        let direct = basis.right_element(&EigenLabel::right(-1, 1, 1, 1)).unwrap();
        assert!(linalg::max_abs(&axpy(&direct.to_joint(4), -ONE, &c.to_joint(4))) == 0.0);
        let (r1, r2) = (right_residual(&basis, &e), right_residual(&basis, &c));
        assert!((r1 - r2).abs() <= 1e-12 + 1e-6 * r1, "{r1:e} vs {r2:e}");
        let ss = basis.right_element(&EigenLabel::right(0, 0, 0, 0)).unwrap();
        let cs = conjugate_element(&ss);
        assert!(linalg::max_abs(&axpy(&cs.to_joint(4), -ONE, &ss.to_joint(4))) == 0.0);
    }

    #[test]
    fn truncation_is_checked() {
        let basis = DampingBasis::new(SystemParams::desk(), 3, 10).unwrap();
        assert!(matches!(basis.right_element(&EigenLabel::right(2, 1, 0, 0)), Err(Error::Truncation(_))));
    }

    #[test]
    fn pathsum_matches_resolvent_for_one_jump() {
        let basis = DampingBasis::new(SystemParams::desk(), 4, 40).unwrap();
        for lab in [EigenLabel::right(0, 1, 0, 0), EigenLabel::right(1, 1, -1, 2), EigenLabel::right(2, 1, 2, 1)] {
            let a = basis.right_element(&lab).unwrap();
            let b = basis.right_element_pathsum(&lab, PathBounds::default()).unwrap();
            let d = axpy(&a.to_joint(4), -ONE, &b.to_joint(4));
            assert!(frobenius(&d) < 1e-6 * a.norm(), "{lab}: {:e}", frobenius(&d) / a.norm());
        }
    }

    #[test]
    fn exact_degeneracy_is_reported() {
        // kappa = 2 gamma puts lambda^{(0,1)}_{0,0} on top of lambda^{(0,0)}_{0,2};
        // a strong coupling makes that collision matter.
        let p = SystemParams { kappa: 0.04, chi: 0.6, ..SystemParams::desk() };
        let basis = DampingBasis::new(p, 3, 30).unwrap();
        let r = basis.right_element(&EigenLabel::right(0, 1, 0, 0));
        assert!(matches!(r, Err(Error::Degenerate { .. })), "{r:?}");
    }
}
