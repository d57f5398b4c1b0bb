//! CSV reading and writing.
//!
//! Dataset contract: a header row with required columns `time` (positive
//! real) and `event` (0/1); every other numeric column is a covariate, except
//! the reserved latent-truth columns written by the simulator, which are
//! ignored on input so its output round-trips as an ordinary dataset.

use std::path::Path;

use anyhow::Context;
use survcp_core::synth::SyntheticSample;
use survcp_core::SurvivalDataset;

use crate::DataError;

/// Columns never treated as covariates.
pub const RESERVED_COLUMNS: [&str; 3] = ["true_time", "censor_time", "id"];

/// Reads a survival dataset; returns the dataset and the covariate column
/// names in column order.
pub fn read_survival_csv(path: &Path) -> anyhow::Result<(SurvivalDataset, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| DataError(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| DataError(format!("{}: bad header: {e}", path.display())))?
        .clone();
    let names: Vec<String> = headers.iter().map(str::to_owned).collect();

    let col = |name: &str| -> Result<usize, DataError> {
        names
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError(format!("{}: missing required column `{name}`", path.display())))
    };
    let time_col = col("time")?;
    let event_col = col("event")?;
    let covariate_cols: Vec<usize> = (0..names.len())
        .filter(|&j| j != time_col && j != event_col && !RESERVED_COLUMNS.contains(&names[j].as_str()))
        .collect();
    let covariate_names: Vec<String> =
        covariate_cols.iter().map(|&j| names[j].clone()).collect();

    let mut time = Vec::new();
    let mut event = Vec::new();
    let mut covariates = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| DataError(format!("{}: row {}: {e}", path.display(), row_idx + 2)))?;
        let parse = |j: usize| -> Result<f64, DataError> {
            let raw = record.get(j).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| {
                DataError(format!(
                    "{}: row {}, column `{}`: cannot parse {raw:?} as a number",
                    path.display(),
                    row_idx + 2,
                    names[j]
                ))
            })
        };
        let t = parse(time_col)?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(DataError(format!(
                "{}: row {}: non-positive time {t}",
                path.display(),
                row_idx + 2
            ))
            .into());
        }
        let e = parse(event_col)?;
        if e != 0.0 && e != 1.0 {
            return Err(DataError(format!(
                "{}: row {}: event must be 0 or 1, got {e}",
                path.display(),
                row_idx + 2
            ))
            .into());
        }
        time.push(t);
        event.push(e == 1.0);
        for &j in &covariate_cols {
            covariates.push(parse(j)?);
        }
    }
    if time.is_empty() {
        return Err(DataError(format!("{}: no data rows", path.display())).into());
    }
    let d = covariate_cols.len();
    let dataset = SurvivalDataset::new(covariates, d, time, event)
        .map_err(|e| DataError(format!("{}: {e}", path.display())))?;
    Ok((dataset, covariate_names))
}

/// Writes a synthetic sample including the latent truth columns (ignored on
/// read-back).
pub fn write_synthetic_csv(sample: &SyntheticSample, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["x1", "x2", "time", "event", "true_time", "censor_time"])?;
    let data = &sample.dataset;
    for i in 0..data.n() {
        let x = data.row(i);
        w.write_record([
            format!("{}", x[0]),
            format!("{}", x[1]),
            format!("{}", data.time()[i]),
            if data.event()[i] { "1".into() } else { "0".into() },
            format!("{}", sample.true_time[i]),
            format!("{}", sample.censor_time[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Formats an upper bound for CSV output; infinite uppers print as `inf`.
pub fn format_upper(upper: f64) -> String {
    if upper.is_infinite() {
        "inf".into()
    } else {
        format!("{upper}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use survcp_core::rng::Seed;
    use survcp_core::synth::generate;

    #[test]
    fn synthetic_round_trip_ignores_truth_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synth.csv");
        let sample = generate(50, 40.0, Seed::new(5)).unwrap();
        write_synthetic_csv(&sample, &path).unwrap();
        let (data, names) = read_survival_csv(&path).unwrap();
        assert_eq!(names, vec!["x1", "x2"]);
        assert_eq!(data.n(), 50);
        assert_eq!(data.d(), 2);
        for i in 0..50 {
            assert_eq!(data.time()[i], sample.dataset.time()[i]);
            assert_eq!(data.event()[i], sample.dataset.event()[i]);
            assert_eq!(data.row(i), sample.dataset.row(i));
        }
    }

    #[test]
    fn missing_event_column_named_in_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,x\n1.0,0.5\n").unwrap();
        let err = read_survival_csv(&path).unwrap_err();
        assert!(err.to_string().contains("`event`"), "{err}");
    }

    #[test]
    fn non_binary_event_rejected_with_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,event\n1.0,1\n2.0,2\n").unwrap();
        let err = read_survival_csv(&path).unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
    }

    #[test]
    fn non_positive_time_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,event\n0.0,1\n").unwrap();
        assert!(read_survival_csv(&path).is_err());
    }

    #[test]
    fn infinite_upper_formats_as_inf() {
        assert_eq!(format_upper(f64::INFINITY), "inf");
        assert_eq!(format_upper(2.5), "2.5");
    }
}
