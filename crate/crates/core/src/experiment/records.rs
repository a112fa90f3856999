//! CSV output of sweeps and reading it back.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::montecarlo::SweepResult;

/// Column order of every sweep CSV.
pub const CSV_COLUMNS: [&str; 11] =
    ["scenario", "kernel", "M", "snr_db", "sigma2", "perr_mc", "ci_low", "ci_high", "perr_ub", "n_trials", "seed"];

fn sci<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:e}"))
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub scenario: String,
    pub kernel: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(serialize_with = "sci")]
    pub snr_db: f64,
    #[serde(serialize_with = "sci")]
    pub sigma2: f64,
    #[serde(serialize_with = "sci")]
    pub perr_mc: f64,
    #[serde(serialize_with = "sci")]
    pub ci_low: f64,
    #[serde(serialize_with = "sci")]
    pub ci_high: f64,
    #[serde(serialize_with = "sci")]
    pub perr_ub: f64,
    pub n_trials: u64,
    pub seed: u64,
}

pub fn sweep_records(sweep: &SweepResult) -> Vec<CsvRecord> {
    sweep
        .records
        .iter()
        .map(|r| CsvRecord {
            scenario: sweep.scenario.clone(),
            kernel: sweep.kernel.label().to_owned(),
            m: sweep.m,
            snr_db: r.snr_db,
            sigma2: r.sigma2,
            perr_mc: r.estimate.p_err,
            ci_low: r.estimate.ci_low,
            ci_high: r.estimate.ci_high,
            perr_ub: r.union_bound,
            n_trials: r.estimate.n_trials,
            seed: r.estimate.seed,
        })
        .collect()
}

/// Writes the header and one row per record.
pub fn write_csv<W: Write>(out: W, records: &[CsvRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sweep CSV, checking the header against [`CSV_COLUMNS`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        return Err(invalid(format!("unexpected CSV header {header:?}, expected {CSV_COLUMNS:?}")));
    }
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<CsvRecord>, _>>()?;
    if rows.is_empty() {
        return Err(invalid("CSV has no data rows"));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(snr: f64) -> CsvRecord {
        CsvRecord {
            scenario: "s".into(),
            kernel: "random".into(),
            m: 3,
            snr_db: snr,
            sigma2: 10f64.powf(-snr / 10.0),
            perr_mc: 0.1234567890123,
            ci_low: 0.1,
            ci_high: 0.15,
            perr_ub: 0.2,
            n_trials: 1000,
            seed: 4,
        }
    }

    #[test]
    fn round_trip_and_format() {
        let rows = vec![row(0.0), row(2.0)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let first = lines.next().unwrap();
        assert!(first.starts_with("s,random,3,0e0,1e0,1.234567890123e-1,1e-1,1.5e-1,2e-1,1000,4"), "{first}");
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn rejects_wrong_header_and_empty() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
        let header = CSV_COLUMNS.join(",") + "\n";
        assert!(read_csv(header.as_bytes()).is_err());
    }
}
