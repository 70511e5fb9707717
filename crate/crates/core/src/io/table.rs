use super::IoError;
use crate::limit::LimitTrajectory;
use crate::ssa::{EnsembleSummary, SimTrace};
use std::io::{Read, Write};

/// A numeric CSV table with a header row.
///
/// Cells are written with the shortest representation that parses back to
/// the same `f64`, so reading and rewriting a table is byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn write<W: Write>(&self, out: W) -> Result<(), IoError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        let mut buf = Vec::with_capacity(self.header.len());
        for row in &self.rows {
            buf.clear();
            buf.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut v = Vec::new();
        self.write(&mut v).expect("writing to memory");
        String::from_utf8(v).expect("ascii output")
    }

    pub fn read<R: Read>(input: R) -> Result<Table, IoError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|cell| {
                    cell.parse::<f64>()
                        .map_err(|_| IoError::Table(format!("row {}: not a number: {cell:?}", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Limit exponents sampled at `times`: `t_logk,beta_0,…,beta_L`.
    pub fn from_trajectory(traj: &LimitTrajectory, times: &[f64]) -> Result<Table, IoError> {
        let width = traj.num_traits() + 1;
        let mut header = vec!["t_logk".to_owned()];
        header.extend((0..width).map(|l| format!("beta_{l}")));
        let rows = times
            .iter()
            .map(|&t| {
                let beta = traj.beta_at(t).map_err(|e| IoError::Table(e.to_string()))?;
                Ok(std::iter::once(t).chain(beta).collect())
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(Table { header, rows })
    }

    /// One replica: `t_logk,N_0,…,N_L,beta_0,…,beta_L`.
    pub fn from_trace(trace: &SimTrace) -> Table {
        let width = trace.counts_at.first().map_or(0, Vec::len);
        let mut header = vec!["t_logk".to_owned()];
        header.extend((0..width).map(|l| format!("N_{l}")));
        header.extend((0..width).map(|l| format!("beta_{l}")));
        let rows = trace
            .grid
            .iter()
            .zip(trace.counts_at.iter().zip(&trace.exponents_at))
            .map(|(&t, (c, b))| {
                std::iter::once(t)
                    .chain(c.iter().map(|&x| x as f64))
                    .chain(b.iter().copied())
                    .collect()
            })
            .collect();
        Table { header, rows }
    }

    /// Replica summary: `t_logk`, then median, lower and upper quartile of each exponent.
    pub fn from_summary(summary: &EnsembleSummary) -> Table {
        let width = summary.median.first().map_or(0, Vec::len);
        let mut header = vec!["t_logk".to_owned()];
        for tag in ["median", "q25", "q75"] {
            header.extend((0..width).map(|l| format!("{tag}_beta_{l}")));
        }
        let rows = summary
            .grid
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                std::iter::once(t)
                    .chain(summary.median[i].iter().copied())
                    .chain(summary.q25[i].iter().copied())
                    .chain(summary.q75[i].iter().copied())
                    .collect()
            })
            .collect();
        Table { header, rows }
    }

    /// Grid and exponent matrix from any table with `t_logk` and either
    /// `beta_ℓ` or `median_beta_ℓ` columns.
    pub fn exponent_series(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>), IoError> {
        let t = self.column("t_logk").ok_or_else(|| IoError::Table("no t_logk column".into()))?;
        let mut cols = Vec::new();
        for prefix in ["beta_", "median_beta_"] {
            cols = (0..)
                .map_while(|l| self.column(&format!("{prefix}{l}")))
                .collect::<Vec<_>>();
            if !cols.is_empty() {
                break;
            }
        }
        if cols.is_empty() {
            return Err(IoError::Table("no exponent columns".into()));
        }
        let grid = self.rows.iter().map(|r| r[t]).collect();
        let beta = self.rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
        Ok((grid, beta))
    }
}
