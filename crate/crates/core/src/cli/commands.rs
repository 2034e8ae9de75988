use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::ant::{self, TorusRegion};
use crate::error::{Error, Result};
use crate::experiment::{self, AntConfig};
use crate::format::sig9;
use crate::joint::{estimate_e, expected_draws};
use crate::needle::{Board, Tally};
use crate::sequential::{self, StopRule};
use crate::stats::EstimateSummary;
use crate::streams::{split, StreamSpec};

use super::output::{CommandOutput, EstimateEntry, Report, Table};
use super::{
    length_ratio, AntArgs, BoardArgs, Cli, Command, ConvergeArgs, JointArgs, LazzariniArgs,
    NeedleArgs,
};

/// Runs the parsed command and renders its output in the requested format.
pub fn execute(cli: &Cli) -> Result<String> {
    let out = match &cli.command {
        Command::Needle(a) => cmd_needle(a)?,
        Command::Joint(a) => cmd_joint(a)?,
        Command::Lazzarini(a) => cmd_lazzarini(a)?,
        Command::Ant(a) => cmd_ant(a)?,
        Command::Converge(a) => cmd_converge(a)?,
    };
    Ok(out.render(cli.command.common().format))
}

fn config_value<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments are plain data")
}

fn board(args: &BoardArgs) -> Result<Board> {
    Board::with_dims(args.spacing.value, args.length.value)
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidConfiguration(format!(
            "--{name} must be at least 1"
        )));
    }
    Ok(())
}

fn report(
    command: &str,
    config: Value,
    estimates: Vec<EstimateEntry>,
    derived: Map<String, Value>,
) -> Report {
    Report {
        command: command.into(),
        config,
        estimates,
        derived,
    }
}

fn opt_f64(v: Option<f64>) -> Value {
    v.map(Value::from).unwrap_or(Value::Null)
}

pub fn cmd_needle(args: &NeedleArgs) -> Result<CommandOutput> {
    let board = board(&args.board)?;
    check_positive("throws", args.throws)?;
    let tally =
        experiment::run_needle(&board, args.common.seed.0, args.common.workers, args.throws)?;
    let pi = board.estimate_pi(tally)?;

    let mut derived = Map::new();
    derived.insert("m".into(), tally.m.into());
    derived.insert(
        "crossing_probability".into(),
        board.crossing_probability().into(),
    );
    Ok(CommandOutput {
        report: report(
            "needle",
            config_value(args),
            vec![EstimateEntry::new("pi", &pi)],
            derived,
        ),
        table: None,
    })
}

pub fn cmd_joint(args: &JointArgs) -> Result<CommandOutput> {
    let board = board(&args.board)?;
    check_positive("throws", args.throws)?;
    let target = expected_draws(args.threshold)?;
    let out = experiment::run_joint(
        &board,
        args.threshold,
        args.common.seed.0,
        args.common.workers,
        args.throws,
    )?;
    let pi = board.estimate_pi(out.tally)?;
    let e = estimate_e(&out.runs)?;

    let e_name = if args.threshold == 1.0 {
        "e".to_string()
    } else {
        format!("e^{}", sig9(args.threshold))
    };
    let mut derived = Map::new();
    derived.insert("m".into(), out.tally.m.into());
    derived.insert("runs".into(), out.runs.completed_runs().into());
    derived.insert("correlation".into(), opt_f64(out.co.correlation()));
    derived.insert("discarded_draws".into(), out.open_draws.into());
    derived.insert("e_target".into(), target.into());
    Ok(CommandOutput {
        report: report(
            "joint",
            config_value(args),
            vec![
                EstimateEntry::new("pi", &pi),
                EstimateEntry::new(e_name, &e),
            ],
            derived,
        ),
        table: None,
    })
}

pub fn cmd_lazzarini(args: &LazzariniArgs) -> Result<CommandOutput> {
    if let Some(ex) = &args.exact {
        return lazzarini_exact(args, ex);
    }
    let board = Board::with_dims(args.spacing.value, args.length.value)?;
    let window = StopRule::TargetWindow {
        target: args.target,
        tolerance: args.tolerance,
        n_min: args.n_min,
        n_max: args.n_max,
    };
    let fixed = StopRule::FixedN {
        n_stop: args.n_stop,
    };
    match args.compare {
        Some(k) => lazzarini_compare(args, &board, fixed, window, k),
        None => {
            let rule = if args.target_window { window } else { fixed };
            lazzarini_trace(args, &board, rule)
        }
    }
}

fn lazzarini_exact(args: &LazzariniArgs, ex: &[u64]) -> Result<CommandOutput> {
    let [l_num, l_den, n, m] = ex[..] else {
        return Err(Error::InvalidConfiguration(
            "--exact takes L_NUM L_DEN N M".into(),
        ));
    };
    let r = sequential::exact_estimate_rational(l_num, l_den, n, m)?;
    let decimal = r.decimal(8);
    let mut derived = Map::new();
    derived.insert("exact".into(), r.to_string().into());
    derived.insert("decimal".into(), decimal.clone().into());
    derived.insert("float".into(), r.to_f64().into());
    let mut table = Table::new(vec!["numerator", "denominator", "decimal"]);
    table.push(vec![
        r.numerator.to_string(),
        r.denominator.to_string(),
        decimal,
    ]);
    Ok(CommandOutput {
        report: report("lazzarini", config_value(args), vec![], derived),
        table: Some(table),
    })
}

fn lazzarini_trace(args: &LazzariniArgs, board: &Board, rule: StopRule) -> Result<CommandOutput> {
    let spec = StreamSpec::new(args.common.seed.0, 0);
    let trace = sequential::run_sequential(&mut spec.open(), board, rule, args.stride)?;
    let ratio = length_ratio(&args.length, &args.spacing);
    let exact = |n: u64, m: u64| {
        ratio.and_then(|(ln, ld)| sequential::exact_estimate_rational(ln, ld, n, m).ok())
    };

    let last = *trace.last();
    let estimates = board
        .estimate_pi(Tally::new(last.n, last.m)?)
        .map(|s| vec![EstimateEntry::new("pi", &s)])
        .unwrap_or_default();
    let mut derived = Map::new();
    derived.insert("m".into(), last.m.into());
    derived.insert("stop_n".into(), trace.stop_n.into());
    derived.insert("stop_reason".into(), trace.stop_reason.to_string().into());
    derived.insert(
        "sign_crossings".into(),
        sequential::sign_crossings(&trace.records, args.target).into(),
    );
    derived.insert(
        "exact".into(),
        exact(last.n, last.m)
            .map(|r| Value::from(r.to_string()))
            .unwrap_or(Value::Null),
    );

    let mut table = Table::new(vec![
        "n",
        "m",
        "estimate_num",
        "estimate_den",
        "estimate_float",
    ]);
    for r in &trace.records {
        let (num, den) = exact(r.n, r.m)
            .map(|q| (q.numerator.to_string(), q.denominator.to_string()))
            .unwrap_or_default();
        table.push(vec![
            r.n.to_string(),
            r.m.to_string(),
            num,
            den,
            r.estimate.map(sig9).unwrap_or_default(),
        ]);
    }
    Ok(CommandOutput {
        report: report("lazzarini", config_value(args), estimates, derived),
        table: Some(table),
    })
}

fn lazzarini_compare(
    args: &LazzariniArgs,
    board: &Board,
    fixed: StopRule,
    window: StopRule,
    seeds: usize,
) -> Result<CommandOutput> {
    let streams = split(args.common.seed.0, seeds)?;
    let rep = experiment::pool(args.common.workers)?
        .install(|| sequential::cheat_report(&streams, fixed, window, board))?;

    let mut derived = Map::new();
    derived.insert("seeds".into(), seeds.into());
    derived.insert("hits".into(), rep.hits.into());
    derived.insert("hit_rate".into(), rep.hit_rate.into());
    derived.insert("median_fixed_error".into(), opt_f64(rep.median_fixed_error));
    derived.insert("median_hit_error".into(), opt_f64(rep.median_hit_error));
    derived.insert("median_error_ratio".into(), opt_f64(rep.median_error_ratio));
    derived.insert(
        "max_hit_error".into(),
        opt_f64(rep.hit_errors().reduce(f64::max)),
    );

    let mut table = Table::new(vec![
        "stream",
        "fixed_error",
        "cheat_error",
        "cheat_stop_n",
        "cheat_reason",
    ]);
    for o in &rep.outcomes {
        table.push(vec![
            o.stream.stream_index.to_string(),
            o.fixed_error.map(sig9).unwrap_or_default(),
            o.cheat_error.map(sig9).unwrap_or_default(),
            o.cheat_stop_n.to_string(),
            o.cheat_reason.to_string(),
        ]);
    }
    Ok(CommandOutput {
        report: report("lazzarini", config_value(args), vec![], derived),
        table: Some(table),
    })
}

pub fn cmd_ant(args: &AntArgs) -> Result<CommandOutput> {
    let region = TorusRegion::new(args.side)?;
    if args.count_a == 0 || args.count_b == 0 || args.reps == 0 {
        return Err(Error::InvalidConfiguration(
            "--count-a, --count-b and --reps must be at least 1".into(),
        ));
    }
    let config = AntConfig {
        region,
        count_a: args.count_a,
        count_b: args.count_b,
        seg_len: args.seg_len,
    };
    let out = experiment::run_ant(&config, args.common.seed.0, args.reps, args.common.workers)?;

    if let Some(path) = &args.scatter_csv {
        let (a, b) = config.scatter_pair(StreamSpec::new(args.common.seed.0, 0))?;
        let file = File::create(path).map_err(|e| {
            Error::InvalidConfiguration(format!("cannot write {}: {e}", path.display()))
        })?;
        ant::write_scatter_csv(BufWriter::new(file), &a, &b).map_err(|e| {
            Error::InvalidConfiguration(format!("cannot write {}: {e}", path.display()))
        })?;
    }

    let (s, l) = (config.total_a(), config.total_b());
    let mut estimates = Vec::new();
    if let Ok(area) = out.areas.summary() {
        estimates.push(EstimateEntry::new("area", &area));
    }
    let counts = out.counts.summary();
    if let Ok(counts) = &counts {
        estimates.push(EstimateEntry::new("intersections", counts));
        // 2SL/(pi * mean N), with the delta-method error of 1/mean N
        if counts.point > 0.0 {
            let pooled = 2.0 * s * l / (PI * counts.point);
            let se = pooled * counts.stderr / counts.point;
            estimates.push(EstimateEntry::new(
                "area_pooled",
                &EstimateSummary::new(pooled, se, counts.n_effective),
            ));
        }
    }
    if estimates.is_empty() {
        return Err(Error::InsufficientData(
            "need at least 2 repetitions with intersections".into(),
        ));
    }

    let zero = out.reps.iter().filter(|r| r.area.is_none()).count();
    let mut derived = Map::new();
    derived.insert("total_length_a".into(), s.into());
    derived.insert("total_length_b".into(), l.into());
    derived.insert(
        "expected_intersections".into(),
        ant::expected_intersections(s, l, &region).into(),
    );
    derived.insert("true_area".into(), region.area().into());
    derived.insert("reps_without_intersections".into(), zero.into());

    let mut table = Table::new(vec!["rep", "N", "area_estimate"]);
    for r in &out.reps {
        table.push(vec![
            r.rep.to_string(),
            r.intersections.to_string(),
            r.area.map(sig9).unwrap_or_default(),
        ]);
    }
    Ok(CommandOutput {
        report: report("ant", config_value(args), estimates, derived),
        table: Some(table),
    })
}

pub fn cmd_converge(args: &ConvergeArgs) -> Result<CommandOutput> {
    let board = board(&args.board)?;
    let table = experiment::converge(
        &board,
        args.common.seed.0,
        args.seeds,
        &args.ns,
        args.common.workers,
    )?;
    let mut derived = Map::new();
    derived.insert("slope".into(), table.slope.into());
    derived.insert(
        "rows".into(),
        serde_json::to_value(&table.rows).expect("rows are plain data"),
    );
    let mut csv = Table::new(vec!["n", "rms_error"]);
    for r in &table.rows {
        csv.push(vec![r.n.to_string(), sig9(r.rms_error)]);
    }
    Ok(CommandOutput {
        report: report("converge", config_value(args), vec![], derived),
        table: Some(csv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Cli;
    use clap::Parser;

    fn run(args: &[&str]) -> Result<String> {
        let mut full = vec!["buffon"];
        full.extend_from_slice(args);
        execute(&Cli::try_parse_from(full).unwrap())
    }

    #[test]
    fn exact_lazzarini_prints_fraction_and_decimal() {
        let out = run(&["lazzarini", "--exact", "5", "6", "3408", "1808"]).unwrap();
        assert!(out.contains("355/113"), "{out}");
        assert!(out.contains("3.14159292"), "{out}");
        let csv = run(&[
            "lazzarini",
            "--exact",
            "5",
            "6",
            "3408",
            "1808",
            "--format",
            "csv",
        ])
        .unwrap();
        assert_eq!(csv, "numerator,denominator,decimal\n355,113,3.14159292\n");
    }

    #[test]
    fn long_needle_is_a_config_error() {
        let err = run(&["needle", "--length", "2", "--spacing", "1"]).unwrap_err();
        assert_eq!(crate::cli::exit_code(&err), 1);
        assert!(err.to_string().contains("short-needle"));
    }

    #[test]
    fn joint_with_three_throws_is_degenerate() {
        let err = run(&["joint", "--throws", "3"]).unwrap_err();
        assert_eq!(crate::cli::exit_code(&err), 2);
    }

    #[test]
    fn trace_csv_has_exact_columns() {
        let csv = run(&[
            "lazzarini",
            "--n-stop",
            "20",
            "--stride",
            "5",
            "--format",
            "csv",
            "--seed",
            "3",
        ])
        .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,m,estimate_num,estimate_den,estimate_float");
        assert_eq!(lines.len(), 5);
        for line in &lines[1..] {
            let cols: Vec<&str> = line.split(',').collect();
            let (n, m): (u64, u64) = (cols[0].parse().unwrap(), cols[1].parse().unwrap());
            if m > 0 {
                let r = sequential::exact_estimate_rational(5, 6, n, m).unwrap();
                assert_eq!(cols[2], r.numerator.to_string());
                assert_eq!(cols[3], r.denominator.to_string());
                assert_eq!(cols[4], sig9(5.0 * n as f64 / (3.0 * m as f64)));
            } else {
                assert_eq!(&cols[2..], ["", "", ""]);
            }
        }
    }

    #[test]
    fn ant_csv_schema() {
        let csv = run(&[
            "ant",
            "--count-a",
            "20",
            "--count-b",
            "20",
            "--reps",
            "4",
            "--format",
            "csv",
        ])
        .unwrap();
        assert!(csv.starts_with("rep,N,area_estimate\n0,"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn converge_reports_slope() {
        let out = run(&["converge", "--ns", "100,1000,10000", "--seeds", "20"]).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["derived"]["slope"].as_f64().unwrap() < 0.0);
        assert_eq!(v["derived"]["rows"].as_array().unwrap().len(), 3);
    }
}
