//! CSV and markdown tables with fixed float formatting.

use std::io::{Read, Write};

use xtdg_core::study::{ConvergenceRow, ProbeSeries, Sample};

use crate::CliError;

pub const CONVERGENCE_HEADER: [&str; 10] = [
    "level",
    "h_x",
    "h_t",
    "dofs",
    "err_v",
    "rate_v",
    "err_sigma",
    "rate_sigma",
    "err_dg",
    "rate_dg",
];
pub const SNAPSHOT_HEADER: [&str; 5] = ["x1", "x2", "v", "sigma1", "sigma2"];
pub const PROBE_HEADER: [&str; 3] = ["t", "v_c", "u_c"];

/// Twelve significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// `x` rounded to what [`fmt_f64`] writes.
pub fn round_f64(x: f64) -> f64 {
    fmt_f64(x).parse().unwrap_or(x)
}

fn write_table<W: Write>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| CliError::Csv(e.to_string()))?;
    Ok(())
}

fn read_table<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(CliError::Csv(format!(
            "expected header {}, found {}",
            header.join(","),
            got.join(",")
        )));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(CliError::Csv(format!(
                    "row has {} fields, expected {}",
                    rec.len(),
                    header.len()
                )));
            }
            Ok(rec)
        })
        .collect()
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T, CliError> {
    rec[i]
        .parse()
        .map_err(|_| CliError::Csv(format!("invalid {name} `{}`", &rec[i])))
}

fn opt_field(rec: &csv::StringRecord, i: usize, name: &str) -> Result<Option<f64>, CliError> {
    if rec[i].is_empty() {
        Ok(None)
    } else {
        field(rec, i, name).map(Some)
    }
}

pub fn write_convergence<W: Write>(out: W, rows: &[ConvergenceRow]) -> Result<(), CliError> {
    write_table(
        out,
        &CONVERGENCE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.level.to_string(),
                fmt_f64(r.h_x),
                fmt_f64(r.h_t),
                r.dofs.to_string(),
                fmt_f64(r.error_v),
                fmt_opt(r.rate_v),
                fmt_f64(r.error_sigma),
                fmt_opt(r.rate_sigma),
                fmt_opt(r.error_dg),
                fmt_opt(r.rate_dg),
            ]
        }),
    )
}

pub fn read_convergence<R: Read>(input: R) -> Result<Vec<ConvergenceRow>, CliError> {
    read_table(input, &CONVERGENCE_HEADER)?
        .iter()
        .map(|r| {
            Ok(ConvergenceRow {
                level: field(r, 0, "level")?,
                h_x: field(r, 1, "h_x")?,
                h_t: field(r, 2, "h_t")?,
                dofs: field(r, 3, "dofs")?,
                error_v: field(r, 4, "err_v")?,
                rate_v: opt_field(r, 5, "rate_v")?,
                error_sigma: field(r, 6, "err_sigma")?,
                rate_sigma: opt_field(r, 7, "rate_sigma")?,
                error_dg: opt_field(r, 8, "err_dg")?,
                rate_dg: opt_field(r, 9, "rate_dg")?,
            })
        })
        .collect()
}

pub fn write_snapshot<W: Write>(out: W, samples: &[Sample]) -> Result<(), CliError> {
    write_table(
        out,
        &SNAPSHOT_HEADER,
        samples
            .iter()
            .map(|s| [s.x1, s.x2, s.v, s.sigma1, s.sigma2].map(fmt_f64).to_vec()),
    )
}

pub fn read_snapshot<R: Read>(input: R) -> Result<Vec<Sample>, CliError> {
    read_table(input, &SNAPSHOT_HEADER)?
        .iter()
        .map(|r| {
            Ok(Sample {
                x1: field(r, 0, "x1")?,
                x2: field(r, 1, "x2")?,
                v: field(r, 2, "v")?,
                sigma1: field(r, 3, "sigma1")?,
                sigma2: field(r, 4, "sigma2")?,
            })
        })
        .collect()
}

pub fn write_probe<W: Write>(out: W, series: &ProbeSeries) -> Result<(), CliError> {
    write_table(
        out,
        &PROBE_HEADER,
        (0..series.t.len()).map(|i| {
            [series.t[i], series.v_c[i], series.u_c[i]]
                .map(fmt_f64)
                .to_vec()
        }),
    )
}

/// Reads `(t, v_C, u_C)` rows.
pub fn read_probe<R: Read>(input: R) -> Result<Vec<[f64; 3]>, CliError> {
    read_table(input, &PROBE_HEADER)?
        .iter()
        .map(|r| Ok([field(r, 0, "t")?, field(r, 1, "v_c")?, field(r, 2, "u_c")?]))
        .collect()
}

/// Convergence table as markdown, errors and rates to three digits.
pub fn convergence_markdown(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from(
        "| level | h_x | h_t | dofs | err v | rate | err sigma | rate | err DG | rate |\n",
    );
    s.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    let e = |x: Option<f64>| x.map(|x| format!("{x:.4e}")).unwrap_or_default();
    let r = |x: Option<f64>| x.map(|x| format!("{x:.2}")).unwrap_or_default();
    for row in rows {
        s.push_str(&format!(
            "| {} | {:.4} | {:.4} | {} | {} | {} | {} | {} | {} | {} |\n",
            row.level,
            row.h_x,
            row.h_t,
            row.dofs,
            e(Some(row.error_v)),
            r(row.rate_v),
            e(Some(row.error_sigma)),
            r(row.rate_sigma),
            e(row.error_dg),
            r(row.rate_dg),
        ));
    }
    s
}
