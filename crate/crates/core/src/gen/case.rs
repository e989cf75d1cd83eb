//! Reader for the matrix-sectioned grid case text format
//! (`mpc.bus = [ ... ];` and friends).

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BaseBus {
    /// Bus number as written in the file.
    pub number: i64,
    /// Active demand in MW (may be negative).
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseBranch {
    /// Index into [`BaseCase::buses`].
    pub from: usize,
    pub to: usize,
    pub reactance: f64,
    /// Long-term rating in MW; 0 means unlimited in the source format.
    pub rating: f64,
    pub in_service: bool,
    /// 1-based line of the source row.
    pub source_line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseGenerator {
    pub bus: usize,
    pub pmin: f64,
    pub pmax: f64,
    /// Linear cost coefficient per MWh.
    pub cost: f64,
    pub in_service: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BaseCase {
    pub name: String,
    pub buses: Vec<BaseBus>,
    pub branches: Vec<BaseBranch>,
    pub generators: Vec<BaseGenerator>,
    /// Non-fatal issues met while reading.
    pub warnings: Vec<String>,
}

impl BaseCase {
    pub fn active_generators(&self) -> impl Iterator<Item = (usize, &BaseGenerator)> {
        self.generators.iter().enumerate().filter(|(_, g)| g.in_service)
    }

    pub fn total_capacity(&self) -> f64 {
        self.active_generators().map(|(_, g)| g.pmax.max(0.0)).sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.buses.iter().map(|b| b.demand.max(0.0)).sum()
    }
}

struct Row {
    line: usize,
    values: Vec<f64>,
}

fn parse_number(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().map_err(|_| Error::CaseFormat { line, message: format!("not a number: {tok:?}") }),
    }
}

type Matrices = BTreeMap<String, Vec<Row>>;

/// Splits the text into named matrices.
fn matrices(text: &str) -> Result<(Option<String>, Matrices)> {
    let mut out = Matrices::new();
    let mut name = None;
    let mut open: Option<(String, usize)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut line = raw.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if open.is_none() {
            if let Some(rest) = line.strip_prefix("function") {
                if let Some(eq) = rest.find('=') {
                    name = Some(rest[eq + 1..].trim().trim_end_matches(';').to_string());
                }
                continue;
            }
            let Some(rest) = line.strip_prefix("mpc.") else { continue };
            let Some(eq) = rest.find('=') else { continue };
            let key = rest[..eq].trim().to_string();
            let value = rest[eq + 1..].trim();
            let Some(body) = value.strip_prefix('[') else { continue };
            if out.contains_key(&key) {
                return Err(Error::CaseFormat { line: line_no, message: format!("section {key} repeated") });
            }
            out.insert(key.clone(), Vec::new());
            open = Some((key, line_no));
            line = body;
        }
        let (key, _) = open.clone().expect("inside a matrix");
        let (content, closes) = match line.find(']') {
            Some(pos) => (&line[..pos], true),
            None => (line, false),
        };
        // Rows end at ';' or at the end of a line.
        for seg in content.split(';') {
            let mut values = Vec::new();
            for tok in seg.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                values.push(parse_number(tok, line_no)?);
            }
            if !values.is_empty() {
                out.get_mut(&key).expect("section exists").push(Row { line: line_no, values });
            }
        }
        if closes {
            open = None;
        }
    }
    if let Some((key, line)) = open {
        return Err(Error::CaseFormat { line, message: format!("section {key} is never closed") });
    }
    Ok((name, out))
}

fn section<'a>(m: &'a BTreeMap<String, Vec<Row>>, key: &str) -> Result<&'a [Row]> {
    m.get(key)
        .map(|v| v.as_slice())
        .ok_or_else(|| Error::CaseFormat { line: 0, message: format!("missing mandatory section mpc.{key}") })
}

fn need(row: &Row, cols: usize, what: &str) -> Result<()> {
    if row.values.len() < cols {
        return Err(Error::CaseFormat {
            line: row.line,
            message: format!("{what} row has {} columns, expected at least {cols}", row.values.len()),
        });
    }
    Ok(())
}

/// Reads a grid case. Mandatory sections: `bus`, `gen`, `branch`, `gencost`.
pub fn parse_case(text: &str) -> Result<BaseCase> {
    let (name, m) = matrices(text)?;
    let mut case = BaseCase { name: name.unwrap_or_else(|| "case".to_string()), ..Default::default() };

    let mut index = BTreeMap::new();
    for row in section(&m, "bus")? {
        need(row, 3, "bus")?;
        let number = row.values[0] as i64;
        if index.insert(number, case.buses.len()).is_some() {
            return Err(Error::CaseFormat { line: row.line, message: format!("bus {number} defined twice") });
        }
        case.buses.push(BaseBus { number, demand: row.values[2] });
    }
    let bus_of = |v: f64, row: &Row| -> Result<usize> {
        index
            .get(&(v as i64))
            .copied()
            .ok_or_else(|| Error::CaseFormat { line: row.line, message: format!("unknown bus {v}") })
    };

    let gens = section(&m, "gen")?;
    for row in gens {
        need(row, 9, "gen")?;
        let v = &row.values;
        case.generators.push(BaseGenerator {
            bus: bus_of(v[0], row)?,
            pmax: v[8],
            pmin: v.get(9).copied().unwrap_or(0.0),
            cost: 0.0,
            in_service: v[7] > 0.0,
        });
    }

    let costs = section(&m, "gencost")?;
    if costs.len() < gens.len() {
        return Err(Error::CaseFormat {
            line: costs.last().map_or(0, |r| r.line),
            message: format!("gencost has {} rows for {} generators", costs.len(), gens.len()),
        });
    }
    for (g, row) in costs.iter().take(gens.len()).enumerate() {
        need(row, 4, "gencost")?;
        let v = &row.values;
        let n = v[3] as usize;
        need(row, 4 + if v[0] as i64 == 1 { 2 * n.max(1) } else { n }, "gencost")?;
        let coeffs = &v[4..];
        let cost = match v[0] as i64 {
            2 => match n {
                0 | 1 => 0.0,
                _ => {
                    if coeffs[..n - 2].iter().any(|&c| c != 0.0) {
                        case.warnings.push(format!(
                            "line {}: generator {g} has higher-order cost terms; only the linear coefficient is kept",
                            row.line
                        ));
                    }
                    coeffs[n - 2]
                }
            },
            1 => {
                // Piecewise linear: average slope over the breakpoints.
                case.warnings
                    .push(format!("line {}: generator {g} has a piecewise cost; its average slope is used", row.line));
                let last = 2 * n.max(1) - 2;
                let (p0, c0, p1, c1) = (coeffs[0], coeffs[1], coeffs[last], coeffs[last + 1]);
                if n < 2 {
                    0.0
                } else if p1 > p0 {
                    (c1 - c0) / (p1 - p0)
                } else {
                    0.0
                }
            }
            other => return Err(Error::CaseFormat { line: row.line, message: format!("unknown cost model {other}") }),
        };
        case.generators[g].cost = cost;
    }

    for row in section(&m, "branch")? {
        need(row, 6, "branch")?;
        let v = &row.values;
        let rating = v[5];
        if rating == 0.0 {
            case.warnings.push(format!("line {}: branch with rating 0 (unlimited)", row.line));
        }
        case.branches.push(BaseBranch {
            from: bus_of(v[0], row)?,
            to: bus_of(v[1], row)?,
            reactance: v[3],
            rating,
            in_service: v.get(10).is_none_or(|&s| s > 0.0),
            source_line: row.line,
        });
    }
    for w in &case.warnings {
        log::warn!("{w}");
    }
    Ok(case)
}
