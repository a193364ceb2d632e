//! CSV formats: one row per sweep cell, and per-step time series.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use dilemma_core::learning::{ActionKind, ActionSet};
use dilemma_core::metrics::MetricsRecord;

use crate::error::OutputError;
use crate::runner::SweepRow;

pub const RESULTS_HEADER: [&str; 17] = [
    "action_set",
    "L",
    "rho",
    "b",
    "p_d",
    "alpha",
    "gamma",
    "epsilon",
    "n_mcs",
    "replicas",
    "f_C_mean",
    "f_C_stderr",
    "C_mean",
    "D_mean",
    "M_mean",
    "B_mean",
    "P_mean",
];

pub const SERIES_HEADER: [&str; 12] = [
    "mcs", "f_C", "C", "D", "M", "B", "P", "corr_C", "corr_D", "corr_M", "corr_B", "corr_P",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn results_record(row: &SweepRow) -> Vec<String> {
    let c = &row.config;
    let mut rec = vec![
        c.action_set.name().to_string(),
        c.side.to_string(),
        c.rho.to_string(),
        c.b.to_string(),
        c.p_d.to_string(),
        c.alpha.to_string(),
        c.gamma.to_string(),
        c.epsilon.to_string(),
        c.n_mcs.to_string(),
        row.stats.replicas().to_string(),
        row.stats.coop_mean.to_string(),
        row.stats.coop_stderr.to_string(),
    ];
    for a in ActionKind::ALL {
        rec.push(opt(c
            .action_set
            .contains(a)
            .then(|| row.stats.action_means[a])));
    }
    rec
}

pub fn write_results<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for row in rows {
        w.write_record(results_record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_results(path: &Path, rows: &[SweepRow]) -> Result<(), OutputError> {
    let file = File::create(path).map_err(|e| OutputError::io(path, e))?;
    write_results(file, rows).map_err(|source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// One parsed row of a results file.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub action_set: ActionSet,
    pub side: usize,
    pub rho: f64,
    pub b: f64,
    pub p_d: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub n_mcs: u64,
    pub replicas: usize,
    pub coop_mean: f64,
    pub coop_stderr: f64,
    /// Indexed in `ActionKind::ALL` order; `None` for actions outside the set.
    pub action_means: [Option<f64>; 5],
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRecord>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(format!("unexpected header {:?}", header));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let field = |k: usize| -> Result<&str, String> {
            rec.get(k)
                .ok_or_else(|| format!("line {line}: missing column {}", RESULTS_HEADER[k]))
        };
        fn num<T: std::str::FromStr>(s: &str, line: usize, name: &str) -> Result<T, String> {
            s.parse()
                .map_err(|_| format!("line {line}: bad {name} {s:?}"))
        }
        let mut action_means = [None; 5];
        for (j, slot) in action_means.iter_mut().enumerate() {
            let s = field(12 + j)?;
            if !s.is_empty() {
                *slot = Some(num(s, line, RESULTS_HEADER[12 + j])?);
            }
        }
        rows.push(ResultRecord {
            action_set: field(0)?.parse().map_err(|e| format!("line {line}: {e}"))?,
            side: num(field(1)?, line, "L")?,
            rho: num(field(2)?, line, "rho")?,
            b: num(field(3)?, line, "b")?,
            p_d: num(field(4)?, line, "p_d")?,
            alpha: num(field(5)?, line, "alpha")?,
            gamma: num(field(6)?, line, "gamma")?,
            epsilon: num(field(7)?, line, "epsilon")?,
            n_mcs: num(field(8)?, line, "n_mcs")?,
            replicas: num(field(9)?, line, "replicas")?,
            coop_mean: num(field(10)?, line, "f_C_mean")?,
            coop_stderr: num(field(11)?, line, "f_C_stderr")?,
            action_means,
        });
    }
    Ok(rows)
}

pub fn write_series<W: Write>(out: W, set: ActionSet, series: &[MetricsRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for m in series {
        let mut rec = vec![m.mcs.to_string(), m.coop_fraction.to_string()];
        for a in ActionKind::ALL {
            rec.push(opt(set.contains(a).then(|| m.action_fractions[a])));
        }
        for a in ActionKind::ALL {
            rec.push(opt(m.correlations[a]));
        }
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_series(
    path: &Path,
    set: ActionSet,
    series: &[MetricsRecord],
) -> Result<(), OutputError> {
    let file = File::create(path).map_err(|e| OutputError::io(path, e))?;
    write_series(file, set, series).map_err(|source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    })
}
