//! Comparison tables of upper bounds between the decomposition method and
//! the baseline.

use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `100 · (ub_ph − ub_ba) / ub_ba`; negative when the decomposition wins.
pub fn gap_percent(ub_ph: f64, ub_ba: f64) -> f64 {
    100.0 * (ub_ph - ub_ba) / ub_ba
}

/// One system's pair of upper bounds as read from a CSV file with the
/// header `system,ub_ba,ub_ph`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UbPair {
    pub system: String,
    pub ub_ba: f64,
    pub ub_ph: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub system: String,
    pub ub_ba: f64,
    pub ub_ph: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTable {
    pub rows: Vec<GapRow>,
    pub mean_ub_ba: f64,
    pub mean_ub_ph: f64,
    /// Mean of the per-system gaps.
    pub mean_gap: f64,
}

pub fn read_pairs_csv(reader: impl Read) -> Result<Vec<UbPair>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<UbPair>().enumerate() {
        let pair = rec.map_err(|e| Error::CaseFormat { line: i + 2, message: e.to_string() })?;
        if !(pair.ub_ba.is_finite() && pair.ub_ba != 0.0 && pair.ub_ph.is_finite()) {
            return Err(Error::InvalidArgument(format!("unusable bounds for system {}", pair.system)));
        }
        out.push(pair);
    }
    Ok(out)
}

pub fn gap_table(pairs: &[UbPair]) -> Result<GapTable> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no systems to report".into()));
    }
    let rows: Vec<GapRow> = pairs
        .iter()
        .map(|p| GapRow {
            system: p.system.clone(),
            ub_ba: p.ub_ba,
            ub_ph: p.ub_ph,
            gap: gap_percent(p.ub_ph, p.ub_ba),
        })
        .collect();
    let n = rows.len() as f64;
    Ok(GapTable {
        mean_ub_ba: rows.iter().map(|r| r.ub_ba).sum::<f64>() / n,
        mean_ub_ph: rows.iter().map(|r| r.ub_ph).sum::<f64>() / n,
        mean_gap: rows.iter().map(|r| r.gap).sum::<f64>() / n,
        rows,
    })
}

impl GapTable {
    /// Fixed-width text with a trailing average row.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.system.len()).max().unwrap_or(0).max(7);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>14}  {:>14}  {:>8}", "System", "BA", "PH UB", "Gap (%)");
        for r in &self.rows {
            let _ = writeln!(out, "{:<width$}  {:>14.2}  {:>14.2}  {:>8.2}", r.system, r.ub_ba, r.ub_ph, r.gap);
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>14.2}  {:>14.2}  {:>8.2}",
            "Average", self.mean_ub_ba, self.mean_ub_ph, self.mean_gap
        );
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        w.write_record(["system", "ub_ba", "ub_ph", "gap"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([r.system.clone(), fmt2(r.ub_ba), fmt2(r.ub_ph), fmt2(r.gap)]).map_err(io)?;
        }
        w.write_record(["average".to_string(), fmt2(self.mean_ub_ba), fmt2(self.mean_ub_ph), fmt2(self.mean_gap)])
            .map_err(io)?;
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_sign_and_mean() {
        assert!((gap_percent(90.0, 100.0) + 10.0).abs() < 1e-12);
        let pairs = [
            UbPair { system: "a".into(), ub_ba: 100.0, ub_ph: 90.0 },
            UbPair { system: "b".into(), ub_ba: 200.0, ub_ph: 200.0 },
        ];
        let t = gap_table(&pairs).unwrap();
        assert!((t.mean_gap + 5.0).abs() < 1e-12);
        assert_eq!(t.mean_ub_ba, 150.0);
        assert!(t.to_text().contains("Average"));
        assert!(t.to_csv().unwrap().starts_with("system,ub_ba,ub_ph,gap\na,100.00,90.00,-10.00\n"));
    }

    #[test]
    fn csv_errors_name_the_row() {
        let text = "system,ub_ba,ub_ph\nx,1,2\ny,oops,3\n";
        assert!(matches!(read_pairs_csv(text.as_bytes()), Err(Error::CaseFormat { line: 3, .. })));
        assert!(gap_table(&[]).is_err());
    }
}
