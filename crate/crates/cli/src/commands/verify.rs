use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use optomech::basis::{cross_trace_numerator, cross_trace_sum, eigenvalue, label_box, label_eigenvalue};
use optomech::linalg::{self, ONE};
use optomech::oracle::{self, brute_block_spectrum, brute_spectrum, match_spectrum, SpectrumOptions};
use optomech::superop::{build_liouvillian, Part};
use optomech::{DampingBasis, EigenLabel, Execution, SystemParams, C64};

use crate::config::{Check, RunConfig, SpectrumBlocks};
use crate::output::{num, CsvRow, Document};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub check: &'static str,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub count: usize,
    pub worst: String,
}

impl CsvRow for Row {
    fn header() -> Vec<String> {
        ["check", "passed", "max_error", "tolerance", "count", "worst"].map(String::from).to_vec()
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.check.to_string(),
            self.passed.to_string(),
            num(self.max_error),
            num(self.tolerance),
            self.count.to_string(),
            self.worst.clone(),
        ]
    }
}

fn row(check: &'static str, max_error: f64, tolerance: f64, count: usize, worst: String) -> Row {
    Row { check, passed: max_error <= tolerance, max_error, tolerance, count, worst }
}

/// Largest value and where it occurred; NaN counts as the worst and ties
/// keep the first occurrence.
fn worst_of(it: impl Iterator<Item = (f64, String)>) -> (f64, String) {
    it.fold(None, |acc: Option<(f64, String)>, (v, at)| match acc {
        Some(a) if !(v > a.0 || v.is_nan()) || a.0.is_nan() => Some(a),
        _ => Some((v, at)),
    })
    .unwrap_or((0.0, String::new()))
}

pub fn run(cfg: &RunConfig, exec: Execution) -> Result<Document<Row>, CliError> {
    let p = cfg.params;
    let (nc, nm) = (cfg.nc, cfg.nm);
    let r = cfg.labels;
    let labels = label_box(r.l_max, r.n_max, r.k_max, r.m_max);
    let tol = cfg.tolerances;
    let basis = DampingBasis::with_buffer(p, nc, nm, cfg.buffer)?.with_execution(exec);
    let l = build_liouvillian(&p, nc, nm, Part::Full)?;
    let mut doc = Document::new("verify");

    let on = |c: Check| cfg.checks.contains(&c);

    // brute-force spectrum
    if on(Check::Spectrum) {
        let opts = SpectrumOptions { reduction: cfg.reduction, cap: cfg.spectrum_cap, exec };
        let numeric = match cfg.spectrum_blocks {
            SpectrumBlocks::All => brute_spectrum(&l, nc, nm, &opts)?,
            SpectrumBlocks::Labels => {
                let mut blocks: Vec<(i64, usize)> = labels.iter().map(|lab| (lab.l, lab.n)).collect();
                blocks.sort_unstable();
                blocks.dedup();
                brute_block_spectrum(&l, nc, nm, &blocks, &opts)?
            }
        };
        let analytic: Vec<(EigenLabel, C64)> = labels.iter().map(|lab| (*lab, label_eigenvalue(lab, &p))).collect();
        let rep = match_spectrum(&analytic, &numeric, tol.spectrum);
        let (worst, at) = worst_of(rep.entries.iter().map(|e| (e.delta, e.label.to_string())));
        doc.rows.push(row("spectrum", worst, tol.spectrum, rep.entries.len(), at));
    }

    if on(Check::Residual) {
        // Residuals of right elements. Left elements grow polynomially in the
        // phonon number, so on a truncated space their residual is set by the
        // mechanical cutoff; they are checked through the Gram audit instead.
        let elems = basis.elements(&labels);
        let mut res = Vec::with_capacity(labels.len());
        for e in elems {
            let e = e?;
            res.push((oracle::residual(&l, &e, nc), e.label.to_string()));
        }
        let (worst, at) = worst_of(res.into_iter());
        doc.rows.push(row("residual", worst, tol.residual, labels.len(), at));
    }

    if on(Check::Gram) {
        // biorthonormality
        let gram = oracle::gram_audit(&basis, &labels)?;
        let at = gram.worst.map(|(a, b, _)| format!("<{a}|{b}>")).unwrap_or_default();
        doc.rows.push(row("gram", gram.max_deviation, tol.gram, gram.size * gram.size, at));
    }

    if on(Check::CrossTrace) {
        // cross-trace sums, by direct evaluation and through the numerator form
        let mut rng = StdRng::seed_from_u64(cfg.seed);
        let mut direct = Vec::new();
        let mut via_numerator = Vec::new();
        for i in 0..cfg.cross_trace_samples {
            let lams = admissible_tuple(&mut rng, &p, cfg)?;
            direct.push((cross_trace_sum(&lams).0.norm(), format!("sample {i}")));
            let len = lams.len();
            let (first, last) = (lams[0], lams[len - 1]);
            let den: C64 = (1..len).map(|s| first - lams[s]).product::<C64>() * (0..len - 1).map(|s| last - lams[s]).product::<C64>();
            via_numerator.push(((cross_trace_numerator(&lams).0 / den).norm(), format!("sample {i}")));
        }
        let (worst, at) = worst_of(direct.into_iter());
        doc.rows.push(row("cross_trace", worst, tol.cross_trace, cfg.cross_trace_samples, at));
        let (worst, at) = worst_of(via_numerator.into_iter());
        doc.rows.push(row("cross_trace_numerator", worst, tol.cross_trace, cfg.cross_trace_samples, at));
    }

    if on(Check::PathSum) {
        // path sums against the recursion
        let diffs = exec.map(&labels, |lab| -> Result<(f64, String), CliError> {
            let a = basis.right_element(lab)?.to_joint(nc);
            let b = basis.right_element_pathsum(lab, cfg.path_bounds)?.to_joint(nc);
            Ok((linalg::frobenius(&linalg::axpy(&a, -ONE, &b)) / linalg::frobenius(&a), lab.to_string()))
        });
        let diffs: Vec<(f64, String)> = diffs.into_iter().collect::<Result<_, _>>()?;
        let (worst, at) = worst_of(diffs.into_iter());
        doc.rows.push(row("path_sum", worst, tol.path_sum, labels.len(), at));
    }

    doc.meta("passed", doc.rows.iter().all(|r| r.passed));
    doc.meta("variant", p.variant);
    doc.meta("nc", nc);
    doc.meta("nm", nm);
    doc.meta("buffer", cfg.buffer);
    doc.meta("seed", cfg.seed);
    doc.meta("labels", r);
    Ok(doc)
}

/// Eigenvalues `lam^{(l,n)}, ..., lam^{(l,n')}` of consecutive photon blocks
/// with entries pairwise at least `gamma` apart (or `1e-3 kappa` if larger).
fn admissible_tuple(rng: &mut StdRng, p: &SystemParams, cfg: &RunConfig) -> Result<Vec<C64>, CliError> {
    let r = cfg.labels;
    let sep = p.gamma.max(1e-3 * p.kappa);
    for _ in 0..10_000 {
        let l = rng.random_range(-(r.l_max as i64)..=r.l_max as i64);
        let n = rng.random_range(0..=r.n_max);
        let len = rng.random_range(2usize..=4);
        let lams: Vec<C64> = (0..len)
            .map(|s| {
                let k = rng.random_range(-(r.k_max as i64)..=r.k_max as i64);
                eigenvalue(l, n + s, k, rng.random_range(0..=r.m_max), p)
            })
            .collect();
        if (0..len).all(|a| (a + 1..len).all(|b| (lams[a] - lams[b]).norm() >= sep)) {
            return Ok(lams);
        }
    }
    Err(CliError::Check("no admissible cross-trace tuple found: eigenvalues too crowded for the label ranges".into()))
}
