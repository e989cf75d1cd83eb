//! Command-line front end. Every mode produces a JSON report that echoes
//! the resolved configuration; wall-clock timings go to a separate sidecar
//! so that reports are reproducible byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::beam::{beam_search, BeamParams};
use crate::destroy_repair::{destroy_and_repair, DrParams};
use crate::error::{Error, Result};
use crate::gen::{adapt_deterministic, build_stochastic, parse_case, synthetic_profiles, ProfileSet, RenewableOptions};
use crate::hedging::{integrated_solve, run_baseline, run_ph, PhParams, PhResult, SolveParams};
use crate::instance::{load_instance_file, serialize_instance, to_canonical_json, Instance, Plan, ScenarioId};
use crate::mip::{build_extensive_mip, check_mip_feasible, solve_bnb, BnbOptions, DEFAULT_ANGLE_BOUND};
use crate::report::{gap_table, read_pairs_csv, UbPair};
use crate::scenario_lp::{OperatingPoint, ScenarioLpModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Build an instance from a grid case (and optional profile file).
    Gen,
    /// Solve the dispatch LP of a fixed plan.
    SolveLp,
    /// Exact branch-and-bound on the extensive form.
    Bnb,
    /// Destroy-and-repair on one scenario.
    Dr,
    /// Beam search on one scenario.
    Bs,
    /// Destroy-and-repair, beam search and branch-and-bound on one scenario.
    Solve,
    /// Progressive hedging.
    Ph,
    /// One-pass baseline decomposition.
    Baseline,
    /// Gap table from pairs of upper bounds.
    Report,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "tepkit", version, about = "Stochastic transmission expansion planning toolkit")]
pub struct Args {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Instance file (canonical JSON).
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Grid case text file for `gen`.
    #[arg(long)]
    pub case: Option<PathBuf>,
    /// Scenario profile file for `gen`.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// With `gen`: write a synthetic profile file of this many hours instead.
    #[arg(long)]
    pub write_profiles: Option<usize>,
    /// Slack penalty (default: largest generator capacity times cost).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 15)]
    pub itdr: usize,
    #[arg(long, default_value_t = 15)]
    pub itbs: usize,
    #[arg(long, default_value_t = 0.005)]
    pub eta: f64,
    #[arg(long, default_value_t = 2)]
    pub omega: usize,
    #[arg(long = "beam-n", default_value_t = 3)]
    pub beam_n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.25)]
    pub beta: f64,
    /// Seconds per subproblem (`solve`, `ph`, `baseline`) or per run (`dr`, `bs`).
    #[arg(long)]
    pub tl: Option<f64>,
    /// Overall seconds (`ph`, `baseline`, `bnb`).
    #[arg(long)]
    pub limit: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path (stdout when absent). For `gen`, the instance path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append a one-row summary to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Plan as `all`, `none` or comma-separated candidate ids.
    #[arg(long)]
    pub plan: Option<String>,
    #[arg(long)]
    pub scenario: Option<usize>,
    /// Iteration cap for `ph`.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Branch-and-bound node cap.
    #[arg(long = "node-limit")]
    pub node_limit: Option<usize>,
    #[arg(long = "angle-bound", default_value_t = DEFAULT_ANGLE_BOUND)]
    pub angle_bound: f64,
    /// CSV of `system,ub_ba,ub_ph` for `report`.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Report of a `ph` run for `report`.
    #[arg(long)]
    pub ph: Option<PathBuf>,
    /// Report of a `baseline` run for `report`.
    #[arg(long)]
    pub ba: Option<PathBuf>,
    /// System name for `report` with `--ph`/`--ba`.
    #[arg(long)]
    pub system: Option<String>,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Value,
    pub timings: Value,
    /// One CSV summary row (header, values).
    pub summary: Option<(Vec<String>, Vec<String>)>,
    /// Human-readable lines for stderr.
    pub message: String,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::CaseFormat { .. }
        | Error::InvalidArgument(_)
        | Error::UnknownCandidate(_)
        | Error::UnknownScenario(_) => 3,
        Error::Infeasible(_) | Error::InfeasibleStart(_) => 4,
        Error::Io(_) => 5,
        Error::LpStatus(_) | Error::Lp(_) => 1,
    }
}

fn seconds(v: Option<f64>, name: &str, allow_zero: bool) -> Result<Option<Duration>> {
    match v {
        None => Ok(None),
        Some(s) if s.is_finite() && (s > 0.0 || (allow_zero && s == 0.0)) => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => Err(Error::InvalidArgument(format!(
            "--{name} must be {}, got {s}",
            if allow_zero { "nonnegative" } else { "positive" }
        ))),
    }
}

pub fn parse_plan(text: &str, inst: &Instance) -> Result<Plan> {
    let t = text.trim().trim_start_matches('{').trim_end_matches('}').trim();
    let plan = match t {
        "all" => inst.all_candidates_plan(),
        "" | "none" => Plan::empty(),
        _ => t
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad plan entry {s:?}"))))
            .collect::<Result<Plan>>()?,
    };
    inst.check_plan(&plan)?;
    Ok(plan)
}

impl Args {
    fn instance(&self) -> Result<Instance> {
        let path = self.instance.as_ref().ok_or_else(|| Error::InvalidArgument("--instance is required".into()))?;
        load_instance_file(path)
    }

    fn plan_or_all(&self, inst: &Instance) -> Result<Plan> {
        match &self.plan {
            Some(p) => parse_plan(p, inst),
            None => Ok(inst.all_candidates_plan()),
        }
    }

    fn scenario_or_first(&self, inst: &Instance) -> Result<ScenarioId> {
        let s = self.scenario.unwrap_or(0);
        inst.scenario(s)?;
        Ok(s)
    }

    fn beam_params(&self) -> Result<BeamParams> {
        let p = BeamParams {
            iterations: self.itbs,
            eta: self.eta,
            omega: self.omega,
            width: self.beam_n,
            gamma: self.gamma,
            seed: self.seed,
            time_limit: None,
        };
        p.validate()?;
        Ok(p)
    }

    fn solve_params(&self) -> Result<SolveParams> {
        if self.itdr == 0 {
            return Err(Error::InvalidArgument("--itdr must be positive".into()));
        }
        Ok(SolveParams {
            lambda: self.lambda,
            dr_iterations: self.itdr,
            beam: self.beam_params()?,
            angle_bound: self.angle_bound,
            time_limit: seconds(self.tl, "tl", false)?,
            bnb_node_limit: self.node_limit,
        })
    }

    fn ph_params(&self) -> Result<PhParams> {
        if self.workers == 0 {
            return Err(Error::InvalidArgument("--workers must be positive".into()));
        }
        Ok(PhParams {
            solve: self.solve_params()?,
            beta: self.beta,
            alpha: self.alpha,
            workers: self.workers,
            seed: self.seed,
            time_limit: seconds(self.limit, "limit", true)?,
            max_iterations: self.max_iter,
        })
    }

    /// Resolved configuration, echoed in every report.
    fn echo(&self, inst: Option<&Instance>) -> Value {
        let lambda = match (self.lambda, inst) {
            (Some(l), _) => Some(l),
            (None, Some(i)) => Some(i.default_penalty()),
            (None, None) => None,
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        json!({
            "mode": self.mode,
            "instance": path(&self.instance),
            "case": path(&self.case),
            "profiles": path(&self.profiles),
            "lambda": lambda,
            "itdr": self.itdr,
            "itbs": self.itbs,
            "eta": self.eta,
            "omega": self.omega,
            "beam_n": self.beam_n,
            "gamma": self.gamma,
            "beta": self.beta,
            "tl": self.tl,
            "limit": self.limit,
            "alpha": self.alpha,
            "workers": self.workers,
            "seed": self.seed,
            "plan": self.plan,
            "scenario": self.scenario,
            "max_iter": self.max_iter,
            "node_limit": self.node_limit,
            "angle_bound": self.angle_bound,
        })
    }
}

fn instance_summary(inst: &Instance) -> Value {
    json!({
        "name": inst.name,
        "buses": inst.buses.len(),
        "generators": inst.generators.len(),
        "existing_lines": inst.existing_lines().count(),
        "candidates": inst.num_candidates(),
        "scenarios": inst.scenarios.len(),
    })
}

fn point_json(inst: &Instance, op: &OperatingPoint) -> Value {
    let lines: Vec<Value> = op
        .flow
        .iter()
        .map(|(k, f)| json!({"line": k, "flow": f, "slack": op.slack.get(k).copied().unwrap_or(0.0)}))
        .collect();
    json!({
        "scenario": op.scenario,
        "objective": op.objective,
        "generation_cost": op.generation_cost(inst),
        "violation": op.violation(),
        "kcl_residual": op.kcl_residual(inst),
        "lines": lines,
        "generation": op.generation,
        "theta": op.theta,
    })
}

fn row(system: &str, mode: Mode, ub: f64, opt: Option<f64>, secs: f64) -> (Vec<String>, Vec<String>) {
    let header = ["system", "mode", "ub", "opt_percent", "seconds"].map(String::from).to_vec();
    let mode = serde_json::to_value(mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let values = vec![
        system.to_string(),
        mode,
        format!("{ub:.6}"),
        opt.map(|g| format!("{g:.4}")).unwrap_or_default(),
        format!("{secs:.3}"),
    ];
    (header, values)
}

/// Executes one mode.
pub fn execute(args: &Args) -> Result<RunOutput> {
    let clock = Instant::now();
    match args.mode {
        Mode::Gen => mode_gen(args, &clock),
        Mode::Report => mode_report(args),
        mode => {
            let inst = args.instance()?;
            let (result, ub, opt, message) = match mode {
                Mode::SolveLp => mode_solve_lp(args, &inst)?,
                Mode::Bnb => mode_bnb(args, &inst)?,
                Mode::Dr => mode_dr(args, &inst)?,
                Mode::Bs => mode_bs(args, &inst)?,
                Mode::Solve => mode_solve(args, &inst)?,
                Mode::Ph | Mode::Baseline => mode_ph(args, &inst)?,
                Mode::Gen | Mode::Report => unreachable!("handled above"),
            };
            let secs = clock.elapsed().as_secs_f64();
            let mut timings = json!({ "wall_seconds": secs });
            if let Some(t) = result.get("iteration_seconds") {
                timings["iteration_seconds"] = t.clone();
            }
            let mut result = result;
            if let Some(obj) = result.as_object_mut() {
                obj.remove("iteration_seconds");
            }
            let report = json!({
                "config": args.echo(Some(&inst)),
                "instance": instance_summary(&inst),
                "result": result,
            });
            Ok(RunOutput { report, timings, summary: Some(row(&inst.name, mode, ub, opt, secs)), message })
        }
    }
}

type ModeResult = (Value, f64, Option<f64>, String);

fn mode_solve_lp(args: &Args, inst: &Instance) -> Result<ModeResult> {
    let plan = args.plan_or_all(inst)?;
    let lambda = args.lambda.unwrap_or_else(|| inst.default_penalty());
    let scenarios: Vec<ScenarioId> = match args.scenario {
        Some(s) => {
            inst.scenario(s)?;
            vec![s]
        }
        None => (0..inst.scenarios.len()).collect(),
    };
    let investment = inst.plan_investment_cost(&plan)?;
    let mut points = Vec::new();
    let mut expected = investment;
    let mut penalized = investment;
    for &s in &scenarios {
        let mut model = ScenarioLpModel::new(inst, s, lambda)?;
        model.set_built_set(&plan)?;
        let op = model.solve()?;
        let p = inst.scenarios[s].probability;
        expected += p * op.generation_cost(inst);
        penalized += p * op.objective;
        points.push(point_json(inst, &op));
    }
    let result = json!({
        "plan": plan,
        "investment_cost": investment,
        "expected_cost": expected,
        "penalized_cost": penalized,
        "scenarios": points,
    });
    let msg = format!("plan {plan}: penalized cost {penalized:.6}");
    Ok((result, penalized, None, msg))
}

fn mode_bnb(args: &Args, inst: &Instance) -> Result<ModeResult> {
    let scenarios: Vec<ScenarioId> = match args.scenario {
        Some(s) => vec![s],
        None => (0..inst.scenarios.len()).collect(),
    };
    let model = build_extensive_mip(inst, &scenarios, args.angle_bound)?;
    let warm = args.plan.as_deref().map(|p| parse_plan(p, inst)).transpose()?;
    let opts = BnbOptions { time_limit: seconds(args.limit, "limit", true)?, node_limit: args.node_limit };
    let res = solve_bnb(inst, &model, warm.as_ref(), &opts)?;
    let gens: Vec<f64> = res.points.iter().map(|op| op.generation_cost(inst)).collect();
    let opt = if res.gap.is_finite() { Some(100.0 * res.gap) } else { None };
    let result = json!({
        "status": res.status,
        "plan": res.incumbent,
        "upper_bound": res.upper_bound,
        "lower_bound": res.lower_bound,
        "opt_percent": opt,
        "nodes": res.node_count,
        "angle_bound": model.angle_bound(),
        "scenario_generation_cost": gens,
    });
    let msg =
        format!("branch-and-bound {:?}: upper bound {:.6}, {} nodes", res.status, res.upper_bound, res.node_count);
    Ok((result, res.upper_bound, opt, msg))
}

fn mode_dr(args: &Args, inst: &Instance) -> Result<ModeResult> {
    let s = args.scenario_or_first(inst)?;
    let lambda = args.lambda.unwrap_or_else(|| inst.default_penalty());
    let mut model = ScenarioLpModel::new(inst, s, lambda)?;
    let start = args.plan_or_all(inst)?;
    let params = DrParams { iterations: args.itdr, time_limit: seconds(args.tl, "tl", false)? };
    let out = destroy_and_repair(&mut model, &start, &params)?;
    let result = json!({
        "scenario": s,
        "plan": out.inserted,
        "removed": out.removed,
        "cost": out.cost,
        "rt_sequence": out.rt_sequence(),
        "trace": out.trace,
    });
    let msg = format!("destroy-and-repair: {} lines kept, cost {:.6}", out.inserted.len(), out.cost);
    Ok((result, out.cost, None, msg))
}

fn mode_bs(args: &Args, inst: &Instance) -> Result<ModeResult> {
    let s = args.scenario_or_first(inst)?;
    let lambda = args.lambda.unwrap_or_else(|| inst.default_penalty());
    let mut model = ScenarioLpModel::new(inst, s, lambda)?;
    let start = args.plan_or_all(inst)?;
    let params = BeamParams { time_limit: seconds(args.tl, "tl", false)?, ..args.beam_params()? };
    let out = beam_search(&mut model, &start, &params)?;
    let result = json!({
        "scenario": s,
        "plan": out.plan,
        "cost": out.cost,
        "levels": out.levels,
        "tree": out.tree,
    });
    let msg = format!("beam search: {} lines, cost {:.6}, {} nodes", out.plan.len(), out.cost, out.tree.len());
    Ok((result, out.cost, None, msg))
}

fn mode_solve(args: &Args, inst: &Instance) -> Result<ModeResult> {
    let s = args.scenario_or_first(inst)?;
    let warm = args.plan_or_all(inst)?;
    let out = integrated_solve(inst, s, &warm, &args.solve_params()?, None)?;
    let result = json!({
        "scenario": s,
        "plan": out.plan,
        "cost": out.cost,
        "stages": out.stages,
        "point": point_json(inst, &out.op),
    });
    let msg = format!("integrated solve: {} lines, cost {:.6}", out.plan.len(), out.cost);
    Ok((result, out.cost, None, msg))
}

fn mode_ph(args: &Args, inst: &Instance) -> Result<ModeResult> {
    let params = args.ph_params()?;
    let res: PhResult = if args.mode == Mode::Ph { run_ph(inst, &params)? } else { run_baseline(inst, &params)? };
    let feasible = res.assessment.feasible()
        && check_mip_feasible(inst, &(0..inst.scenarios.len()).collect::<Vec<_>>(), &res.plan)?.all_feasible();
    let secs: Vec<f64> = res.iterations.iter().map(|i| i.elapsed.as_secs_f64()).collect();
    let result = json!({
        "plan": res.plan,
        "penalized_cost": res.penalized_cost,
        "assessment": res.assessment,
        "feasible": feasible,
        "iterations": res.iterations,
        "iteration_seconds": secs,
    });
    let msg = format!(
        "{}: {} iterations, {} lines, penalized cost {:.6}",
        if args.mode == Mode::Ph { "progressive hedging" } else { "baseline" },
        res.iterations.len(),
        res.plan.len(),
        res.penalized_cost
    );
    Ok((result, res.penalized_cost, None, msg))
}

fn read_text(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn mode_gen(args: &Args, clock: &Instant) -> Result<RunOutput> {
    if let Some(hours) = args.write_profiles {
        if hours == 0 {
            return Err(Error::InvalidArgument("--write-profiles needs a positive hour count".into()));
        }
        let set = ProfileSet {
            label: format!("synthetic {hours}-hour profile set; not derived from measured data"),
            renewables: RenewableOptions {
                solar_share: 0.15,
                wind_share: 0.15,
                solar_avg_cap: None,
                wind_avg_cap: None,
            },
            profiles: synthetic_profiles(hours),
        };
        let value = serde_json::to_value(&set).expect("profile sets serialize");
        return Ok(RunOutput {
            report: value,
            timings: json!({ "wall_seconds": clock.elapsed().as_secs_f64() }),
            summary: None,
            message: format!("{hours} synthetic profiles"),
        });
    }
    let case_path = args.case.as_ref().ok_or_else(|| Error::InvalidArgument("--case is required for gen".into()))?;
    let base = parse_case(&read_text(case_path)?)?;
    let inst = match &args.profiles {
        None => adapt_deterministic(&base)?,
        Some(p) => {
            let text = read_text(p)?;
            let set: ProfileSet = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            build_stochastic(&base, &set.profiles, &set.renewables)?
        }
    };
    let screen =
        check_mip_feasible(&inst, &(0..inst.scenarios.len()).collect::<Vec<_>>(), &inst.all_candidates_plan())?;
    let message = format!(
        "generated {}: {} buses, {} candidates, {} scenarios; all-candidates plan {}",
        inst.name,
        inst.buses.len(),
        inst.num_candidates(),
        inst.scenarios.len(),
        if screen.all_feasible() { "feasible" } else { "INFEASIBLE in some scenario" }
    );
    let report: Value = serde_json::from_str(&serialize_instance(&inst)).expect("canonical instance text is JSON");
    Ok(RunOutput {
        report,
        timings: json!({ "wall_seconds": clock.elapsed().as_secs_f64() }),
        summary: None,
        message: format!("{message}; {} reader warning(s)", base.warnings.len()),
    })
}

fn penalized_from_report(path: &Path) -> Result<f64> {
    let v: Value = serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    v.pointer("/result/penalized_cost")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no result.penalized_cost", path.display())))
}

fn mode_report(args: &Args) -> Result<RunOutput> {
    let pairs = match (&args.pairs, &args.ph, &args.ba) {
        (Some(p), None, None) => read_pairs_csv(fs::File::open(p)?)?,
        (None, Some(ph), Some(ba)) => vec![UbPair {
            system: args.system.clone().unwrap_or_else(|| "system".into()),
            ub_ba: penalized_from_report(ba)?,
            ub_ph: penalized_from_report(ph)?,
        }],
        _ => return Err(Error::InvalidArgument("report needs either --pairs or both --ph and --ba".into())),
    };
    let table = gap_table(&pairs)?;
    let report = json!({
        "config": args.echo(None),
        "table": table,
    });
    let summary = {
        let csv = table.to_csv()?;
        let mut lines = csv.lines().map(|l| l.split(',').map(String::from).collect::<Vec<_>>());
        let header = lines.next().unwrap_or_default();
        let last = lines.next_back().unwrap_or_default();
        Some((header, last))
    };
    Ok(RunOutput { report, timings: json!({}), summary, message: table.to_text() })
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    out.with_file_name(name)
}

fn append_csv(path: &Path, header: &[String], values: &[String]) -> Result<()> {
    let exists = path.exists() && fs::metadata(path)?.len() > 0;
    let file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
    if !exists {
        w.write_record(header).map_err(io)?;
    }
    w.write_record(values).map_err(io)?;
    w.flush()?;
    Ok(())
}

/// Runs the CLI; returns the process exit code.
pub fn run(args: &Args) -> i32 {
    match run_inner(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_inner(args: &Args) -> Result<()> {
    let out = execute(args)?;
    let text = to_canonical_json(&out.report);
    match &args.out {
        Some(path) => {
            fs::write(path, &text)?;
            if args.mode != Mode::Gen || args.write_profiles.is_none() {
                fs::write(sidecar(path, ".timings.json"), to_canonical_json(&out.timings))?;
            }
            if matches!(args.mode, Mode::Ph | Mode::Baseline) {
                write_iteration_log(&sidecar(path, ".iterations.jsonl"), &out)?;
            }
        }
        None => print!("{text}"),
    }
    if let (Some(path), Some((header, values))) = (&args.csv, &out.summary) {
        append_csv(path, header, values)?;
    }
    eprintln!("{}", out.message.trim_end());
    Ok(())
}

/// One JSON object per iteration, with its wall time.
fn write_iteration_log(path: &Path, out: &RunOutput) -> Result<()> {
    let empty = Vec::new();
    let iterations = out.report.pointer("/result/iterations").and_then(Value::as_array).unwrap_or(&empty);
    let secs = out.timings.get("iteration_seconds").and_then(Value::as_array).unwrap_or(&empty);
    let mut text = String::new();
    for (i, it) in iterations.iter().enumerate() {
        let mut rec = it.clone();
        if let Some(obj) = rec.as_object_mut() {
            obj.remove("scenario_plans");
            obj.insert("wall_seconds".into(), secs.get(i).cloned().unwrap_or(Value::Null));
        }
        text.push_str(&serde_json::to_string(&rec).expect("log records serialize"));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn plan_syntax() {
        let t2 = fixtures::t2();
        assert_eq!(parse_plan("all", &t2).unwrap(), Plan::from_ids([1]));
        assert_eq!(parse_plan("none", &t2).unwrap(), Plan::empty());
        assert_eq!(parse_plan("{1}", &t2).unwrap(), Plan::from_ids([1]));
        assert!(matches!(parse_plan("0", &t2), Err(Error::UnknownCandidate(0))));
        assert!(parse_plan("x", &t2).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidArgument(String::new())), 3);
        assert_eq!(exit_code(&Error::Infeasible(String::new())), 4);
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar(Path::new("/tmp/r.json"), ".timings.json"), PathBuf::from("/tmp/r.json.timings.json"));
    }
}
