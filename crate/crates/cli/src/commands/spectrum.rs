use serde::Serialize;

use optomech::basis::{eigenvalue, label_box};

use crate::config::RunConfig;
use crate::output::{cx_cells, pair, CsvRow, Cx, Document};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub l: i64,
    pub n: usize,
    pub k: i64,
    pub m: usize,
    pub lambda: Cx,
}

impl CsvRow for Row {
    fn header() -> Vec<String> {
        let mut h: Vec<String> = ["l", "n", "k", "m"].map(String::from).to_vec();
        h.extend(pair("lambda"));
        h
    }

    fn record(&self) -> Vec<String> {
        let mut r = vec![self.l.to_string(), self.n.to_string(), self.k.to_string(), self.m.to_string()];
        r.extend(cx_cells(self.lambda));
        r
    }
}

/// Analytic eigenvalues over the configured label ranges.
pub fn run(cfg: &RunConfig) -> Result<Document<Row>, CliError> {
    let r = cfg.labels;
    let mut doc = Document::new("spectrum");
    doc.meta("variant", cfg.params.variant);
    doc.meta("params", cfg.params);
    doc.meta("labels", r);
    doc.rows = label_box(r.l_max, r.n_max, r.k_max, r.m_max)
        .into_iter()
        .map(|lab| Row { l: lab.l, n: lab.n, k: lab.k, m: lab.m, lambda: eigenvalue(lab.l, lab.n, lab.k, lab.m, &cfg.params).into() })
        .collect();
    Ok(doc)
}
