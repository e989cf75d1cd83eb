use std::fmt::Write;

use super::LinearProgram;

/// Renders `lp` in CPLEX LP text format, naming variables `x<i>` and rows
/// `r<i>`. Ranged rows become two constraints (`r<i>_lo`, `r<i>_hi`).
/// Intended for inspecting models with external tools.
pub fn write_lp_format(lp: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut any = false;
    for (j, &c) in lp.objective().iter().enumerate() {
        if c != 0.0 {
            push_term(&mut out, c, j);
            any = true;
        }
    }
    if !any {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows().iter().enumerate() {
        let mut lhs = String::new();
        for &(v, a) in &row.coeffs {
            push_term(&mut lhs, a, v);
        }
        if lhs.is_empty() {
            lhs.push_str(" 0 x0");
        }
        if row.lo == row.hi {
            let _ = writeln!(out, " r{i}:{lhs} = {}", row.lo);
            continue;
        }
        if row.lo.is_finite() {
            let _ = writeln!(out, " r{i}_lo:{lhs} >= {}", row.lo);
        }
        if row.hi.is_finite() {
            let _ = writeln!(out, " r{i}_hi:{lhs} <= {}", row.hi);
        }
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let (lo, hi) = lp.var_bounds(j);
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " x{j} free");
            }
            (true, true) if lo == hi => {
                let _ = writeln!(out, " x{j} = {lo}");
            }
            (true, true) => {
                let _ = writeln!(out, " {lo} <= x{j} <= {hi}");
            }
            (true, false) => {
                let _ = writeln!(out, " x{j} >= {lo}");
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= x{j} <= {hi}");
            }
        }
    }
    out.push_str("End\n");
    out
}

fn push_term(out: &mut String, coeff: f64, var: usize) {
    if coeff < 0.0 {
        let _ = write!(out, " - {} x{var}", -coeff);
    } else {
        let _ = write!(out, " + {coeff} x{var}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_sections() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 5.0, 2.0).unwrap();
        let y = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, -1.0).unwrap();
        lp.add_row(&[(x, 1.0), (y, -1.0)], 1.0, 1.0).unwrap();
        lp.add_row(&[(x, 1.0)], 0.5, 4.0).unwrap();
        let text = write_lp_format(&lp);
        assert!(text.starts_with("Minimize\n obj: + 2 x0 - 1 x1\n"));
        assert!(text.contains(" r0: + 1 x0 - 1 x1 = 1\n"));
        assert!(text.contains(" r1_lo: + 1 x0 >= 0.5\n"));
        assert!(text.contains(" r1_hi: + 1 x0 <= 4\n"));
        assert!(text.contains(" x1 free\n"));
        assert!(text.ends_with("End\n"));
    }
}
