//! Vectorised superoperators.
//!
//! Operators are column-stacked: `vec(|i><j|)` sits at index `j * d + i`, so
//! `vec(A rho B) = (B^T (x) A) vec(rho)`. Joint operators are ordered
//! cavity (x) mechanics. Superoperators are stored sparse; see
//! [`SuperOp::to_dense`] for the dense form.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockOperator};
use crate::linalg::{self, CMat, Csr, I, ONE, ZERO};
use crate::params::{SystemParams, Variant};

#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    /// Hilbert-space dimension `d`; the matrix is `d^2 x d^2`.
    pub dim: usize,
    pub mat: Csr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Full,
    M,
    J,
}

type Triplets = Vec<(usize, usize, C64)>;

/// Triplets of `coef * vec(A rho B)` on a `d`-dimensional space.
fn sandwich(coef: C64, a: &CMat, b: &CMat, out: &mut Triplets) {
    let d = a.nrows();
    let nz_a: Vec<(usize, usize, C64)> = nonzeros(a);
    let nz_b: Vec<(usize, usize, C64)> = nonzeros(b);
    // (B^T (x) A)[(bj*d + ai), (bi*d + aj)] = B[bi, bj] A[ai, aj]
    for &(bi, bj, bv) in &nz_b {
        for &(ai, aj, av) in &nz_a {
            out.push((bj * d + ai, bi * d + aj, coef * av * bv));
        }
    }
}

fn nonzeros(a: &CMat) -> Vec<(usize, usize, C64)> {
    let mut v = Vec::new();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if a[(i, j)] != ZERO {
                v.push((i, j, a[(i, j)]));
            }
        }
    }
    v
}

fn commutator_terms(coef: C64, x: &CMat, out: &mut Triplets) {
    let id = linalg::identity(x.nrows());
    sandwich(coef, x, &id, out);
    sandwich(-coef, &id, x, out);
}

/// `rate * D[X]`, or its adjoint, with D[X] rho = 2 X rho X^dag - X^dag X rho - rho X^dag X.
fn dissipator_terms(rate: f64, x: &CMat, adjoint: bool, out: &mut Triplets) {
    if rate == 0.0 {
        return;
    }
    let xd = linalg::adjoint(x);
    let xdx = linalg::matmul(&xd, x);
    let id = linalg::identity(x.nrows());
    let r = C64::from(rate);
    if adjoint {
        sandwich(2.0 * r, &xd, x, out);
    } else {
        sandwich(2.0 * r, x, &xd, out);
    }
    sandwich(-r, &xdx, &id, out);
    sandwich(-r, &id, &xdx, out);
}

/// `rate * D[X]` with distinct operators acting from the left and right of a
/// block: 2 Xl mu Xr^dag - Xl^dag Xl mu - mu Xr^dag Xr.
fn split_dissipator_terms(rate: f64, xl: &CMat, xr: &CMat, out: &mut Triplets) {
    if rate == 0.0 {
        return;
    }
    let r = C64::from(rate);
    let id = linalg::identity(xl.nrows());
    sandwich(2.0 * r, xl, &linalg::adjoint(xr), out);
    sandwich(-r, &linalg::matmul(&linalg::adjoint(xl), xl), &id, out);
    sandwich(-r, &id, &linalg::matmul(&linalg::adjoint(xr), xr), out);
}

impl SuperOp {
    fn from_triplets(dim: usize, t: Triplets) -> Self {
        SuperOp { dim, mat: Csr::from_triplets(dim * dim, dim * dim, t) }
    }

    pub fn apply(&self, rho: &FockOperator) -> FockOperator {
        assert_eq!(rho.nrows(), self.dim);
        linalg::unvec(&self.mat.matvec(&linalg::vec(rho)), self.dim)
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        self.mat.matvec(v)
    }

    pub fn to_dense(&self) -> CMat {
        self.mat.to_dense()
    }

    pub fn adjoint(&self) -> SuperOp {
        SuperOp { dim: self.dim, mat: self.mat.adjoint() }
    }

    pub fn add(&self, s: C64, other: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, other.dim);
        SuperOp { dim: self.dim, mat: self.mat.add(s, &other.mat) }
    }

    /// The superoperator restricted to the photon block `|r><c|` of a joint
    /// space with `nc` cavity and `nm` mechanical levels, on the mechanical
    /// vectorised space.
    pub fn photon_block(&self, nc: usize, nm: usize, r: usize, c: usize) -> SuperOp {
        assert_eq!(self.dim, nc * nm);
        let d = self.dim;
        let idx: Vec<usize> = (0..nm * nm)
            .map(|v| {
                let (p, q) = (v % nm, v / nm);
                (c * nm + q) * d + (r * nm + p)
            })
            .collect();
        SuperOp { dim: nm, mat: self.mat.principal(&idx) }
    }
}

/// `X rho - rho X`.
pub fn commutator_superop(x: &FockOperator) -> SuperOp {
    let mut t = Vec::new();
    commutator_terms(ONE, x, &mut t);
    SuperOp::from_triplets(x.nrows(), t)
}

/// `D[X]`, or `D^dag[X] rho = 2 X^dag rho X - X^dag X rho - rho X^dag X`.
pub fn dissipator(x: &FockOperator, adjoint: bool) -> SuperOp {
    let mut t = Vec::new();
    dissipator_terms(1.0, x, adjoint, &mut t);
    SuperOp::from_triplets(x.nrows(), t)
}

/// Joint ladder operators `(a, b)` on `nc * nm` levels.
pub fn joint_ladders(nc: usize, nm: usize) -> Result<(CMat, CMat)> {
    let a = linalg::kron(&fock::ladder(nc)?, &linalg::identity(nm));
    let b = linalg::kron(&linalg::identity(nc), &fock::ladder(nm)?);
    Ok((a, b))
}

/// `H = omega a^dag a + nu b^dag b - chi a^dag a (b + b^dag)`.
pub fn build_hamiltonian(params: &SystemParams, nc: usize, nm: usize) -> Result<FockOperator> {
    let (a, b) = joint_ladders(nc, nm)?;
    let n_a = linalg::matmul(&linalg::adjoint(&a), &a);
    let n_b = linalg::matmul(&linalg::adjoint(&b), &b);
    let x = linalg::axpy(&b, ONE, &linalg::adjoint(&b));
    let mut h = linalg::scale(&n_a, C64::from(params.omega));
    linalg::add_in_place(&mut h, C64::from(params.nu), &n_b);
    linalg::add_in_place(&mut h, C64::from(-params.chi), &linalg::matmul(&n_a, &x));
    Ok(h)
}

fn check_dims(nc: usize, nm: usize) -> Result<()> {
    if nc == 0 || nm == 0 {
        return Err(Error::InvalidParameter(format!("dimensions must be >= 1, got Nc={nc}, Nm={nm}")));
    }
    Ok(())
}

/// Triplets of the photon-number-conserving part `M` and of `J = kappa a rho a^dag`.
fn liouvillian_triplets(params: &SystemParams, nc: usize, nm: usize) -> Result<(Triplets, Triplets)> {
    params.validate()?;
    check_dims(nc, nm)?;
    let (a, b) = joint_ladders(nc, nm)?;
    let id = linalg::identity(nc * nm);
    let ad = linalg::adjoint(&a);
    let n_a = linalg::matmul(&ad, &a);
    let h = build_hamiltonian(params, nc, nm)?;

    let mut m = Vec::new();
    commutator_terms(-I, &h, &mut m);
    // (kappa/2) D[a] without its jump term.
    let half_k = C64::from(params.kappa / 2.0);
    sandwich(-half_k, &n_a, &id, &mut m);
    sandwich(-half_k, &id, &n_a, &mut m);
    let jump_op = match params.variant {
        Variant::Weak => b.clone(),
        Variant::Dsme => {
            dissipator_terms(params.dsme_dephasing(), &n_a, false, &mut m);
            linalg::axpy(&b, C64::from(-params.chi / params.nu), &n_a)
        }
    };
    dissipator_terms(params.gamma * (params.mbar + 1.0) / 2.0, &jump_op, false, &mut m);
    dissipator_terms(params.gamma * params.mbar / 2.0, &linalg::adjoint(&jump_op), false, &mut m);

    let mut j = Vec::new();
    if params.kappa != 0.0 {
        sandwich(C64::from(params.kappa), &a, &ad, &mut j);
    }
    Ok((m, j))
}

/// The Liouvillian, its number-conserving part `M = L - J`, or `J` alone.
pub fn build_liouvillian(params: &SystemParams, nc: usize, nm: usize, part: Part) -> Result<SuperOp> {
    let (m, j) = liouvillian_triplets(params, nc, nm)?;
    let d = nc * nm;
    Ok(match part {
        Part::M => SuperOp::from_triplets(d, m),
        Part::J => SuperOp::from_triplets(d, j),
        Part::Full => {
            let mut t = m;
            t.extend(j);
            SuperOp::from_triplets(d, t)
        }
    })
}

/// `lambda_C^{(l,n)} = -i l omega - (n + |l|/2) kappa`.
pub fn lambda_c(l: i64, n: usize, params: &SystemParams) -> C64 {
    C64::new(-(n as f64 + l.unsigned_abs() as f64 / 2.0) * params.kappa, -(l as f64) * params.omega)
}

/// The mechanical superoperator `M^{(l,n)}` (or its adjoint) governing the
/// photon block `|n+l><n|`, for `l >= 0`.
pub fn build_m_ln(params: &SystemParams, l: i64, n: usize, nm: usize, adjoint: bool) -> Result<SuperOp> {
    params.validate()?;
    check_dims(1, nm)?;
    if l < 0 {
        return Err(Error::InvalidParameter(format!("build_m_ln needs l >= 0, got {l}")));
    }
    let b = fock::ladder(nm)?;
    let bd = linalg::adjoint(&b);
    let x = linalg::axpy(&b, ONE, &bd);
    let id = linalg::identity(nm);
    let lf = l as f64;
    let nf = n as f64;

    let mut t = Vec::new();
    commutator_terms(C64::new(0.0, -params.nu), &fock::number(nm), &mut t);
    commutator_terms(C64::new(0.0, nf * params.chi), &x, &mut t);
    sandwich(C64::new(0.0, lf * params.chi), &x, &id, &mut t);
    let gp = params.gamma * (params.mbar + 1.0) / 2.0;
    let gm = params.gamma * params.mbar / 2.0;
    let mut shift = lambda_c(l, n, params);
    match params.variant {
        Variant::Weak => {
            dissipator_terms(gp, &b, false, &mut t);
            dissipator_terms(gm, &bd, false, &mut t);
        }
        Variant::Dsme => {
            let s = params.chi / params.nu;
            let bl = linalg::axpy(&b, C64::from(-s * (nf + lf)), &id);
            let br = linalg::axpy(&b, C64::from(-s * nf), &id);
            split_dissipator_terms(gp, &bl, &br, &mut t);
            split_dissipator_terms(gm, &linalg::adjoint(&bl), &linalg::adjoint(&br), &mut t);
            shift -= C64::from(params.dsme_dephasing() * lf * lf);
        }
    }
    if shift != ZERO {
        sandwich(shift, &id, &id, &mut t);
    }
    let op = SuperOp::from_triplets(nm, t);
    Ok(if adjoint { op.adjoint() } else { op })
}
