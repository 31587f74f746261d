use std::time::Instant;

use serde::Serialize;

use optomech::evolution::{decompose, default_label_set};
use optomech::linalg::{self, CMat};
use optomech::oracle::{self, DirectMethod};
use optomech::superop::{build_liouvillian, Part};
use optomech::{DampingBasis, Execution};

use crate::config::RunConfig;
use crate::output::{num, CsvRow, Document};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub nc: usize,
    pub nm: usize,
    pub method: &'static str,
    pub setup_ms: f64,
    pub per_time_point_ms: f64,
    /// Largest trace distance to the matrix-exponential result.
    pub max_error: f64,
}

impl CsvRow for Row {
    fn header() -> Vec<String> {
        ["nc", "nm", "method", "setup_ms", "per_time_point_ms", "max_error"].map(String::from).to_vec()
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.nc.to_string(),
            self.nm.to_string(),
            self.method.to_string(),
            num(self.setup_ms),
            num(self.per_time_point_ms),
            num(self.max_error),
        ]
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn max_distance(a: &[CMat], b: &[CMat]) -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        worst = worst.max(linalg::trace_distance(x, y)?);
    }
    Ok(worst)
}

/// Each time point is evolved on its own, so per-point costs are not
/// shared between points.
pub fn run(cfg: &RunConfig, exec: Execution) -> Result<Document<Row>, CliError> {
    let b = &cfg.bench;
    RunConfig::validate_times(&b.times)?;
    if b.dims.is_empty() {
        return Err(CliError::Usage("bench.dims must list at least one (nc, nm) pair".into()));
    }
    let p = cfg.params;
    let adaptive = DirectMethod::Adaptive { rtol: b.adaptive_rtol, atol: b.adaptive_atol };
    let mut doc = Document::new("bench");
    for &(nc, nm) in &b.dims {
        if nc < 1 || nm < 1 {
            return Err(CliError::Usage(format!("bench dimensions must be >= 1, got ({nc}, {nm})")));
        }
        let rho0 = cfg.evolve.initial.to_operator(nc, nm, &p)?;

        let start = Instant::now();
        let l = build_liouvillian(&p, nc, nm, Part::Full)?;
        let build_ms = ms(start);
        let reach = oracle::reachable_subspace(&l, &linalg::vec(&rho0)).len();
        if reach > cfg.spectrum_cap {
            return Err(CliError::Usage(format!("({nc}, {nm}): reachable subspace of {reach} exceeds spectrum_cap {}", cfg.spectrum_cap)));
        }

        let start = Instant::now();
        let mut baseline = Vec::with_capacity(b.times.len());
        for t in &b.times {
            baseline.extend(oracle::direct_evolve(&l, &rho0, &[*t], DirectMethod::Expm)?);
        }
        let expm_ms = ms(start) / b.times.len() as f64;

        let start = Instant::now();
        let basis = DampingBasis::with_buffer(p, nc, nm, cfg.buffer)?.with_execution(exec);
        let d = decompose(&basis, &rho0, &default_label_set(nc, cfg.evolve.m_cut))?;
        let spectral_setup = ms(start);
        let start = Instant::now();
        let spectral: Vec<CMat> = b.times.iter().map(|t| d.evolve(*t)).collect();
        let spectral_ms = ms(start) / b.times.len() as f64;

        let start = Instant::now();
        let mut stepped = Vec::with_capacity(b.times.len());
        for t in &b.times {
            stepped.extend(oracle::direct_evolve(&l, &rho0, &[*t], adaptive)?);
        }
        let adaptive_ms = ms(start) / b.times.len() as f64;

        doc.rows.push(Row {
            nc,
            nm,
            method: "spectral",
            setup_ms: spectral_setup,
            per_time_point_ms: spectral_ms,
            max_error: max_distance(&spectral, &baseline)?,
        });
        doc.rows.push(Row { nc, nm, method: "expm", setup_ms: build_ms, per_time_point_ms: expm_ms, max_error: 0.0 });
        doc.rows.push(Row {
            nc,
            nm,
            method: "adaptive",
            setup_ms: build_ms,
            per_time_point_ms: adaptive_ms,
            max_error: max_distance(&stepped, &baseline)?,
        });
    }
    doc.meta("variant", p.variant);
    doc.meta("times", &b.times);
    doc.meta("initial", cfg.evolve.initial);
    doc.meta("m_cut", cfg.evolve.m_cut);
    doc.meta("adaptive", adaptive);
    Ok(doc)
}
