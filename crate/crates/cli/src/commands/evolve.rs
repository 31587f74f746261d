use serde::Serialize;

use optomech::evolution::{decompose, default_label_set, observables, Observable, RECONSTRUCTION_WARN};
use optomech::linalg::{self, CMat};
use optomech::oracle;
use optomech::superop::{build_liouvillian, Part};
use optomech::{DampingBasis, Execution};

use crate::config::{EvolveMethod, RunConfig};
use crate::output::{cx_cells, num, opt_num, pair, CsvRow, Cx, Document};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub method: EvolveMethod,
    pub t: f64,
    pub photon_number: Cx,
    pub phonon_number: Cx,
    pub mech_quadrature: Cx,
    pub purity: Cx,
    pub trace: Cx,
    /// Spectral against direct, when both ran.
    pub trace_distance: Option<f64>,
}

impl CsvRow for Row {
    fn header() -> Vec<String> {
        let mut h = vec!["method".to_string(), "t".to_string()];
        for o in Observable::ALL {
            h.extend(pair(o.name()));
        }
        h.push("trace_distance".into());
        h
    }

    fn record(&self) -> Vec<String> {
        let method = match self.method {
            EvolveMethod::Spectral => "spectral",
            EvolveMethod::Direct => "direct",
        };
        let mut r = vec![method.to_string(), num(self.t)];
        for z in [self.photon_number, self.phonon_number, self.mech_quadrature, self.purity, self.trace] {
            r.extend(cx_cells(z));
        }
        r.push(opt_num(self.trace_distance));
        r
    }
}

fn row(method: EvolveMethod, t: f64, rho: &CMat, nc: usize, nm: usize, td: Option<f64>) -> Result<Row, CliError> {
    let v = observables(rho, nc, nm, &Observable::ALL)?;
    let get = |o: Observable| -> Cx { v.iter().find(|(x, _)| *x == o).map(|(_, z)| (*z).into()).expect("all observables") };
    Ok(Row {
        method,
        t,
        photon_number: get(Observable::PhotonNumber),
        phonon_number: get(Observable::PhononNumber),
        mech_quadrature: get(Observable::MechQuadrature),
        purity: get(Observable::Purity),
        trace: get(Observable::Trace),
        trace_distance: td,
    })
}

pub fn run(cfg: &RunConfig, exec: Execution) -> Result<Document<Row>, CliError> {
    let e = &cfg.evolve;
    RunConfig::validate_times(&e.times)?;
    if e.methods.is_empty() {
        return Err(CliError::Usage("evolve.methods must name at least one of spectral, direct".into()));
    }
    let (nc, nm, p) = (cfg.nc, cfg.nm, cfg.params);
    let rho0 = e.initial.to_operator(nc, nm, &p)?;
    let mut doc = Document::new("evolve");
    let mut warnings: Vec<String> = Vec::new();

    let spectral = if e.methods.contains(&EvolveMethod::Spectral) {
        let basis = DampingBasis::with_buffer(p, nc, nm, cfg.buffer)?.with_execution(exec);
        let d = decompose(&basis, &rho0, &default_label_set(nc, e.m_cut))?;
        doc.meta("spectral_terms", d.terms.len());
        doc.meta("reconstruction_error", d.reconstruction_error);
        if d.reconstruction_error > RECONSTRUCTION_WARN {
            warnings.push(format!(
                "spectral reconstruction error {:.2e} at t = 0 exceeds {RECONSTRUCTION_WARN:.0e}; raise m_cut or Nm",
                d.reconstruction_error
            ));
        }
        Some(d.evolve_many(&e.times, exec))
    } else {
        None
    };
    let direct = if e.methods.contains(&EvolveMethod::Direct) {
        let l = build_liouvillian(&p, nc, nm, Part::Full)?;
        Some(oracle::direct_evolve(&l, &rho0, &e.times, e.direct)?)
    } else {
        None
    };

    let distances: Option<Vec<f64>> = match (&spectral, &direct) {
        (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| linalg::trace_distance(x, y)).collect::<Result<_, _>>()?),
        _ => None,
    };
    if let Some(ds) = &distances {
        let worst = ds.iter().cloned().fold(0.0, f64::max);
        doc.meta("max_trace_distance", worst);
        if worst > cfg.tolerances.evolution {
            warnings.push(format!("spectral and direct evolutions differ by trace distance {worst:.2e}"));
        }
    }
    for (method, states) in [(EvolveMethod::Spectral, &spectral), (EvolveMethod::Direct, &direct)] {
        if let Some(states) = states {
            for (i, (t, rho)) in e.times.iter().zip(states).enumerate() {
                doc.rows.push(row(method, *t, rho, nc, nm, distances.as_ref().map(|d| d[i]))?);
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    doc.meta("variant", p.variant);
    doc.meta("nc", nc);
    doc.meta("nm", nm);
    doc.meta("initial", e.initial);
    doc.meta("direct_method", e.direct);
    doc.meta("warnings", warnings);
    Ok(doc)
}
