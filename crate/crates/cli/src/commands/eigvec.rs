use serde::Serialize;

use optomech::oracle;
use optomech::superop::{build_liouvillian, Part};
use optomech::{DampingBasis, Execution};

use crate::config::RunConfig;
use crate::output::{cx_cells, pair, CsvRow, Cx, Document};
use crate::CliError;

/// One mechanical matrix entry `<p| block |q>` of the element at cavity
/// element `|cavity_row><cavity_col|`.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub j: usize,
    pub cavity_row: usize,
    pub cavity_col: usize,
    pub p: usize,
    pub q: usize,
    pub value: Cx,
}

impl CsvRow for Row {
    fn header() -> Vec<String> {
        let mut h: Vec<String> = ["j", "cavity_row", "cavity_col", "p", "q"].map(String::from).to_vec();
        h.extend(pair("value"));
        h
    }

    fn record(&self) -> Vec<String> {
        let mut r = [self.j, self.cavity_row, self.cavity_col, self.p, self.q].map(|x| x.to_string()).to_vec();
        r.extend(cx_cells(self.value));
        r
    }
}

pub fn run(cfg: &RunConfig, exec: Execution) -> Result<Document<Row>, CliError> {
    let label = cfg.eigvec.eigen_label();
    let basis = DampingBasis::with_buffer(cfg.params, cfg.nc, cfg.nm, cfg.buffer)?.with_execution(exec);
    let elem = basis.element(&label)?;
    let l = build_liouvillian(&cfg.params, cfg.nc, cfg.nm, Part::Full)?;
    let mut doc = Document::new("eigvec");
    doc.meta("variant", cfg.params.variant);
    doc.meta("nc", cfg.nc);
    doc.meta("nm", cfg.nm);
    doc.meta("label", cfg.eigvec.label);
    doc.meta("side", label.side);
    doc.meta("eigenvalue", Cx::from(elem.eigenvalue));
    doc.meta("residual", oracle::residual(&l, &elem, cfg.nc));
    for (j, blk) in &elem.blocks {
        let (cavity_row, cavity_col) = elem.cavity_indices(*j);
        for q in 0..blk.ncols() {
            for p in 0..blk.nrows() {
                doc.rows.push(Row { j: *j, cavity_row, cavity_col, p, q, value: blk[(p, q)].into() });
            }
        }
    }
    Ok(doc)
}
