//! Brute-force checks: dense spectra, residuals, Gram matrices and direct
//! time evolution of the truncated Liouvillian.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisElement, DampingBasis, EigenLabel, Side};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::par::Execution;
use crate::superop::SuperOp;

/// Largest dense eigenproblem `brute_spectrum` will attempt by default.
pub const DEFAULT_CAP: usize = 4096;

/// How the full Liouvillian is split before dense diagonalisation. Both
/// reductions are exact and are verified against the sparsity pattern.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// One dense problem of size `(Nc Nm)^2`.
    Full,
    /// One problem per photon coherence `l = r - c`; sectors never couple.
    #[default]
    PhotonSectors,
    /// One problem per photon block `(l, j)`; within a sector the generator
    /// is block triangular because jumps only lower `j`.
    PhotonBlocks,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    pub reduction: Reduction,
    pub cap: usize,
    pub exec: Execution,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { reduction: Reduction::default(), cap: DEFAULT_CAP, exec: Execution::default() }
    }
}

/// `(l, j)` of a vectorised joint index.
fn photon_coords(idx: usize, nc: usize, nm: usize) -> (i64, usize) {
    let d = nc * nm;
    let (row, col) = (idx % d, idx / d);
    let (r, c) = (row / nm, col / nm);
    (r as i64 - c as i64, r.min(c))
}

/// Index groups of the requested reduction, keyed by `(l, j)` (`j = 0` for
/// whole sectors), after checking that the generator respects them.
fn reduction_groups(l: &SuperOp, nc: usize, nm: usize, reduction: Reduction) -> Result<BTreeMap<(i64, usize), Vec<usize>>> {
    let d = nc * nm;
    if l.dim != d {
        return Err(Error::InvalidParameter(format!("superoperator acts on {} levels, expected {nc} x {nm}", l.dim)));
    }
    let n = d * d;
    let mut map: BTreeMap<(i64, usize), Vec<usize>> = BTreeMap::new();
    match reduction {
        Reduction::Full => {
            map.insert((0, 0), (0..n).collect());
        }
        Reduction::PhotonSectors | Reduction::PhotonBlocks => {
            let by_block = reduction == Reduction::PhotonBlocks;
            for (i, j, v) in l.mat.triplets() {
                if v == ZERO {
                    continue;
                }
                let (li, ji) = photon_coords(i, nc, nm);
                let (lj, jj) = photon_coords(j, nc, nm);
                if li != lj || (by_block && ji > jj) {
                    return Err(Error::InvalidParameter(format!(
                        "generator couples photon blocks (l={lj}, j={jj}) -> (l={li}, j={ji}); the {reduction:?} reduction does not apply"
                    )));
                }
            }
            for idx in 0..n {
                let (lc, j) = photon_coords(idx, nc, nm);
                map.entry((lc, if by_block { j } else { 0 })).or_default().push(idx);
            }
        }
    }
    Ok(map)
}

fn diagonalise(l: &SuperOp, groups: &[Vec<usize>], opts: &SpectrumOptions) -> Result<Vec<C64>> {
    if let Some(big) = groups.iter().map(|g| g.len()).max() {
        if big > opts.cap {
            return Err(Error::InvalidParameter(format!(
                "dense eigenproblem of size {big} exceeds the cap of {}; use a reduction or raise the cap",
                opts.cap
            )));
        }
    }
    let parts = opts.exec.map(groups, |g| linalg::eigenvalues(&l.mat.principal_dense(g)));
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Eigenvalues of the truncated Liouvillian `l` on `nc x nm` joint levels.
pub fn brute_spectrum(l: &SuperOp, nc: usize, nm: usize, opts: &SpectrumOptions) -> Result<Vec<C64>> {
    let groups: Vec<Vec<usize>> = reduction_groups(l, nc, nm, opts.reduction)?.into_values().collect();
    diagonalise(l, &groups, opts)
}

/// Eigenvalues of the diagonal photon blocks `(l, j)` listed in `blocks` only.
/// Because the generator is block triangular these are exactly the
/// eigenvalues the full spectrum assigns to those blocks. Blocks outside the
/// truncation are ignored.
pub fn brute_block_spectrum(l: &SuperOp, nc: usize, nm: usize, blocks: &[(i64, usize)], opts: &SpectrumOptions) -> Result<Vec<C64>> {
    let mut map = reduction_groups(l, nc, nm, Reduction::PhotonBlocks)?;
    let groups: Vec<Vec<usize>> = blocks.iter().filter_map(|b| map.remove(b)).collect();
    diagonalise(l, &groups, opts)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchEntry {
    pub label: EigenLabel,
    pub analytic: C64,
    pub numeric: Option<C64>,
    pub delta: f64,
    pub within: bool,
    /// Another unused numerical eigenvalue was within `1e-12` of the same distance.
    pub tie: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub tolerance: f64,
    pub entries: Vec<MatchEntry>,
    pub unmatched_numeric: usize,
}

impl SpectrumReport {
    pub fn max_delta(&self) -> f64 {
        self.entries.iter().map(|e| e.delta).fold(0.0, f64::max)
    }

    pub fn all_within(&self) -> bool {
        self.entries.iter().all(|e| e.within)
    }

    pub fn failures(&self) -> impl Iterator<Item = &MatchEntry> {
        self.entries.iter().filter(|e| !e.within)
    }
}

/// Greedy injective matching: all (analytic, numeric) candidate pairs are
/// visited in order of distance and accepted when both sides are still free.
pub fn match_spectrum(analytic: &[(EigenLabel, C64)], numeric: &[C64], tol: f64) -> SpectrumReport {
    const CANDIDATES: usize = 24;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (a, &(_, lam)) in analytic.iter().enumerate() {
        let mut near: Vec<(f64, usize)> = numeric.iter().enumerate().map(|(i, z)| ((z - lam).norm(), i)).collect();
        let keep = CANDIDATES.min(near.len());
        if keep > 0 {
            near.select_nth_unstable_by(keep - 1, |x, y| x.0.total_cmp(&y.0));
        }
        pairs.extend(near[..keep].iter().map(|&(dist, i)| (dist, a, i)));
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used = vec![false; numeric.len()];
    let mut chosen: Vec<Option<(usize, f64)>> = vec![None; analytic.len()];
    for &(dist, a, i) in &pairs {
        if chosen[a].is_none() && !used[i] {
            chosen[a] = Some((i, dist));
            used[i] = true;
        }
    }
    // anything still unmatched falls back to the nearest free value
    for (a, slot) in chosen.iter_mut().enumerate() {
        if slot.is_none() {
            let lam = analytic[a].1;
            if let Some((i, dist)) =
                numeric.iter().enumerate().filter(|(i, _)| !used[*i]).map(|(i, z)| (i, (z - lam).norm())).min_by(|x, y| x.1.total_cmp(&y.1))
            {
                *slot = Some((i, dist));
                used[i] = true;
            }
        }
    }
    let entries = analytic
        .iter()
        .zip(&chosen)
        .map(|(&(label, lam), c)| match *c {
            Some((i, dist)) => {
                let tie = numeric.iter().enumerate().any(|(o, z)| o != i && !used[o] && ((z - lam).norm() - dist).abs() < 1e-12);
                MatchEntry { label, analytic: lam, numeric: Some(numeric[i]), delta: dist, within: dist <= tol, tie }
            }
            None => MatchEntry { label, analytic: lam, numeric: None, delta: f64::INFINITY, within: false, tie: false },
        })
        .collect();
    SpectrumReport { tolerance: tol, entries, unmatched_numeric: used.iter().filter(|u| !**u).count() }
}

/// Relative residual `||L x - lam x|| / ||x||` of a right element, or
/// `||L^dag x - lam^* x|| / ||x||` of a left one. For left elements only the
/// photon blocks the element carries are inspected, so a left element cut
/// below the top block is judged on what it contains.
pub fn residual(l: &SuperOp, elem: &BasisElement, nc: usize) -> f64 {
    let x = elem.to_joint(nc);
    let norm = linalg::frobenius(&x);
    match elem.label.side {
        Side::Right => linalg::frobenius(&linalg::axpy(&l.apply(&x), -elem.eigenvalue, &x)) / norm,
        Side::Left => {
            let r = linalg::axpy(&l.adjoint().apply(&x), -elem.eigenvalue.conj(), &x);
            let nm = elem.nm();
            let mut acc = 0.0;
            for (j, _) in &elem.blocks {
                let (row, col) = elem.cavity_indices(*j);
                let blk = r.submatrix(row * nm, col * nm, nm, nm);
                for q in 0..nm {
                    for p in 0..nm {
                        acc += blk[(p, q)].norm_sqr();
                    }
                }
            }
            acc.sqrt() / norm
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramReport {
    pub size: usize,
    pub max_deviation: f64,
    pub worst: Option<(EigenLabel, EigenLabel, C64)>,
}

/// `G_ij = Tr{rho_check_i^dag rho_hat_j}` over `labels`, compared with the identity.
pub fn gram_audit(basis: &DampingBasis, labels: &[EigenLabel]) -> Result<GramReport> {
    let rights: Vec<BasisElement> = basis.exec.map(labels, |lab| basis.right_element(lab)).into_iter().collect::<Result<_>>()?;
    let lefts: Vec<BasisElement> = basis.exec.map(labels, |lab| basis.left_element(lab)).into_iter().collect::<Result<_>>()?;
    let rows = basis.exec.map_range(labels.len(), |i| {
        let mut worst = (0.0f64, 0usize, ZERO);
        for (j, r) in rights.iter().enumerate() {
            let g = lefts[i].inner(r);
            let want = if i == j { ONE } else { ZERO };
            let dev = (g - want).norm();
            if dev > worst.0 || (j == 0 && dev >= worst.0) {
                worst = (dev, j, g);
            }
        }
        worst
    });
    let mut rep = GramReport { size: labels.len(), max_deviation: 0.0, worst: None };
    for (i, (dev, j, g)) in rows.into_iter().enumerate() {
        if rep.worst.is_none() || dev > rep.max_deviation {
            rep.max_deviation = dev;
            rep.worst = Some((labels[i].with_side(Side::Left), labels[j].with_side(Side::Right), g));
        }
    }
    Ok(rep)
}

/// Integration method for [`direct_evolve`].
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectMethod {
    /// `exp(L t)` by scaling and squaring for each requested time.
    #[default]
    Expm,
    /// Dormand-Prince 5(4) with error control.
    Adaptive { rtol: f64, atol: f64 },
}

/// Indices reachable from the support of `v` under repeated action of `l`.
pub fn reachable_subspace(l: &SuperOp, v: &[C64]) -> Vec<usize> {
    // column j of L lists the indices j feeds into, i.e. row j of L^T
    let t = l.mat.adjoint();
    let n = v.len();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, z) in v.iter().enumerate() {
        if *z != ZERO {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(j) = queue.pop_front() {
        for (i, _) in t.row(j) {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

/// `exp(L t) rho0` for each `t`, restricted to the subspace reachable from `rho0`.
pub fn direct_evolve(l: &SuperOp, rho0: &CMat, times: &[f64], method: DirectMethod) -> Result<Vec<CMat>> {
    let d = l.dim;
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::InvalidParameter(format!("state is {}x{}, superoperator acts on {d} levels", rho0.nrows(), rho0.ncols())));
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::InvalidParameter(format!("evolution times must be finite and non-negative, got {t}")));
    }
    let v0 = linalg::vec(rho0);
    let idx = reachable_subspace(l, &v0);
    let x0: Vec<C64> = idx.iter().map(|&i| v0[i]).collect();
    let expand = |x: &[C64]| {
        let mut full = vec![ZERO; d * d];
        for (&i, &z) in idx.iter().zip(x) {
            full[i] = z;
        }
        linalg::unvec(&full, d)
    };
    match method {
        DirectMethod::Expm => {
            let ls = l.mat.principal_dense(&idx);
            let col = faer::Mat::from_fn(x0.len(), 1, |i, _| x0[i]);
            Ok(times
                .iter()
                .map(|&t| {
                    let e = linalg::expm(&linalg::scale(&ls, C64::from(t)));
                    let y = linalg::matmul(&e, &col);
                    expand(&(0..x0.len()).map(|i| y[(i, 0)]).collect::<Vec<_>>())
                })
                .collect())
        }
        DirectMethod::Adaptive { rtol, atol } => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(Error::InvalidParameter("adaptive tolerances must be positive".into()));
            }
            let ls = l.mat.principal(&idx);
            let mut order: Vec<usize> = (0..times.len()).collect();
            order.sort_by(|a, b| times[*a].total_cmp(&times[*b]));
            let mut out = vec![linalg::zeros(0, 0); times.len()];
            let mut y = x0;
            let mut t = 0.0;
            let mut h = 1e-3;
            for k in order {
                y = dopri(&ls, y, t, times[k], &mut h, rtol, atol)?;
                t = times[k];
                out[k] = expand(&y);
            }
            Ok(out)
        }
    }
}

fn dopri(a: &linalg::Csr, mut y: Vec<C64>, t0: f64, t1: f64, h: &mut f64, rtol: f64, atol: f64) -> Result<Vec<C64>> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    // fifth-order weights are the last row of A; these are the differences to fourth order
    const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
    let n = y.len();
    let mut t = t0;
    let mut k: Vec<Vec<C64>> = vec![vec![ZERO; n]; 7];
    k[0] = a.matvec(&y);
    while t < t1 {
        let step = h.min(t1 - t);
        if step < 1e-14 * t1.abs().max(1.0) {
            return Err(Error::Numerical(format!("adaptive step size underflow at t = {t}")));
        }
        let mut stage = vec![ZERO; n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (r, kr) in k.iter().enumerate().take(s) {
                    if A[s][r] != 0.0 {
                        acc += kr[i] * (step * A[s][r]);
                    }
                }
                stage[i] = acc;
            }
            k[s] = a.matvec(&stage);
        }
        // stage now holds the fifth-order solution (FSAL)
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = ZERO;
            for (r, kr) in k.iter().enumerate() {
                if E[r] != 0.0 {
                    e += kr[i] * (step * E[r]);
                }
            }
            let sc = atol + rtol * y[i].norm().max(stage[i].norm());
            err = err.max(e.norm() / sc);
        }
        if err <= 1.0 {
            t += step;
            y = stage;
            k[0] = k[6].clone();
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        *h = step * fac;
    }
    Ok(y)
}
