use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde_json::{json, Value};

use cbn_observe::graph::DependencyGraph;
use cbn_observe::observability::{decompose, verdict};
use cbn_observe::observer::{build_observer, reconstruct_initial_state, simulate, OutputTrace};
use cbn_observe::oracle::{oracle_check, state_bits};
use cbn_observe::random::{
    default_grid, run_experiment, write_per_trial_csv, write_summary_csv, ErConfig,
};
use cbn_observe::{
    enumerate_solution_space, reduce_cbcn, reduce_dbn, reduce_general_outputs, serialize_cbn,
    solve_minimal,
};

use crate::{
    name_list, names, read_cbn, read_document, read_text, var_name, CliError, Command,
    ExperimentArgs, Outcome, ReduceArgs, EXIT_NEGATIVE, EXIT_OK,
};

pub(crate) fn dispatch(cli: crate::Cli) -> Result<Outcome, CliError> {
    let json = cli.json;
    match cli.command {
        Command::Check { file } => check(&file, json),
        Command::Solve { file, all } => solve(&file, all, json),
        Command::Observe { file, trace } => observe(&file, &trace, json),
        Command::Simulate { file, x0, steps } => simulate_cmd(&file, &x0, steps, json),
        Command::Reduce(args) => reduce(args, json),
        Command::Experiment(args) => experiment(args, json),
        Command::Oracle { file, max_n } => oracle(&file, max_n, json),
    }
}

fn render(json: bool, value: Value, text: String) -> String {
    if json {
        format!("{value}\n")
    } else {
        text
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cycles_json(cycles: &[Vec<usize>]) -> Vec<Vec<String>> {
    cycles.iter().map(|c| names(c)).collect()
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn check(file: &Path, json: bool) -> Result<Outcome, CliError> {
    let cbn = read_cbn(file)?;
    let g = DependencyGraph::new(&cbn);
    let v = verdict(&g);
    let cover = decompose(&g).ok();
    let constants = cbn.constant_variables();

    let mut text = String::new();
    writeln!(text, "observable: {}", yes_no(v.observable)).unwrap();
    writeln!(text, "O1 violations: {}", name_list(&v.o1_violations)).unwrap();
    if v.o2_violations.is_empty() {
        writeln!(text, "O2 cycles: (none)").unwrap();
    } else {
        for c in &v.o2_violations {
            writeln!(text, "O2 cycle: {}", name_list(c)).unwrap();
        }
    }
    if let Some(cover) = &cover {
        for p in &cover.paths {
            writeln!(text, "path: {}", name_list(&p.nodes)).unwrap();
        }
    }
    if !constants.is_empty() {
        writeln!(
            text,
            "note: constant variables {}; a negative verdict may be conservative",
            name_list(&constants)
        )
        .unwrap();
    }
    let value = json!({
        "observable": v.observable,
        "o1_violations": names(&v.o1_violations),
        "o2_cycles": cycles_json(&v.o2_violations),
        "decomposition": cover.map(|c| c.paths.iter().map(|p| names(&p.nodes)).collect::<Vec<_>>()),
        "constant_variables": names(&constants),
    });
    let code = if v.observable { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome::ok(code, render(json, value, text)))
}

fn solve(file: &Path, all: bool, json: bool) -> Result<Outcome, CliError> {
    let cbn = read_cbn(file)?;
    let sol = solve_minimal(&cbn);
    let mut text = format!("add: {}\n", name_list(&sol.chosen));
    let mut value = json!({
        "add": names(&sol.chosen),
        "size": sol.size(),
        "representative": sol.representative_rule.to_string(),
    });
    if all {
        let space = enumerate_solution_space(&sol);
        let count = space.count();
        writeln!(text, "fixed: {}", name_list(&space.fixed)).unwrap();
        for (i, c) in space.choices.iter().enumerate() {
            writeln!(text, "cycle {}: {}", i + 1, name_list(c)).unwrap();
        }
        writeln!(text, "solutions: {count}").unwrap();
        value["fixed"] = json!(names(&space.fixed));
        value["cycles"] = json!(cycles_json(&space.choices));
        value["solution_count"] = match u64::try_from(count) {
            Ok(c) => json!(c),
            Err(_) => json!(count.to_string()),
        };
    }
    Ok(Outcome::ok(EXIT_OK, render(json, value, text)))
}

fn observe(file: &Path, trace: &Path, json: bool) -> Result<Outcome, CliError> {
    let cbn = read_cbn(file)?;
    let plan = build_observer(&cbn)?;
    let trace = OutputTrace::read_csv(read_text(trace)?.as_bytes())?;
    let x0 = reconstruct_initial_state(&plan, &trace)?;

    let mut text = format!(
        "x(0): {}\n",
        x0.iter()
            .map(|&b| if b { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(" ")
    );
    let mut sources = Vec::new();
    for (v, s) in plan.sources.iter().enumerate() {
        writeln!(text, "{} = y{}(k={})", var_name(v), s.output + 1, s.offset).unwrap();
        sources.push(json!({ "variable": var_name(v), "output": format!("y{}", s.output + 1), "k": s.offset }));
    }
    let value = json!({
        "x0": x0.iter().map(|&b| u8::from(b)).collect::<Vec<_>>(),
        "horizon": plan.horizon,
        "sources": sources,
    });
    Ok(Outcome::ok(EXIT_OK, render(json, value, text)))
}

fn simulate_cmd(
    file: &Path,
    x0: &str,
    steps: Option<usize>,
    json: bool,
) -> Result<Outcome, CliError> {
    let cbn = read_cbn(file)?;
    let bits: Vec<bool> = x0
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CliError::Usage(format!(
                "--x0 must be a 0/1 string, found {other:?}"
            ))),
        })
        .collect::<Result<_, _>>()?;
    let steps = match steps {
        Some(s) => s,
        None => build_observer(&cbn)
            .map(|p| p.horizon)
            .unwrap_or(cbn.n().max(1)),
    };
    let traj = simulate(&cbn, &bits, steps)?;
    let mut csv = Vec::new();
    traj.trace.write_csv(&mut csv)?;
    let text = String::from_utf8(csv).expect("CSV is ASCII");
    let value = json!({
        "steps": steps,
        "states": traj.states.iter().map(|s| bit_string(s)).collect::<Vec<_>>(),
        "outputs": traj.trace.outputs.iter().map(|&o| format!("y{}", o + 1)).collect::<Vec<_>>(),
        "trace": traj.trace.values.iter().map(|s| bit_string(s)).collect::<Vec<_>>(),
    });
    Ok(Outcome::ok(EXIT_OK, render(json, value, text)))
}

fn reduce(args: ReduceArgs, json: bool) -> Result<Outcome, CliError> {
    let doc = read_document(&args.file)?;
    let mismatch = |error| CliError::Parse {
        path: args.file.clone(),
        error,
    };
    let (mode, reduced) = if args.mode.dbn {
        ("dbn", reduce_dbn(&doc.to_dbn().map_err(mismatch)?))
    } else if args.mode.cbcn {
        ("cbcn", reduce_cbcn(&doc.to_cbcn().map_err(mismatch)?))
    } else {
        (
            "aug-outputs",
            reduce_general_outputs(&doc.to_general_output().map_err(mismatch)?),
        )
    };
    let network = serialize_cbn(&reduced.cbn);
    let value =
        json!({ "mode": mode, "note": reduced.note, "n": reduced.cbn.n(), "network": network });
    let text = match &args.out {
        Some(path) => {
            std::fs::write(path, &network).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            format!("wrote {} ({} variables)\n", path.display(), reduced.cbn.n())
        }
        None => network,
    };
    Ok(Outcome::ok(EXIT_OK, render(json, value, text)))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })
}

fn experiment(args: ExperimentArgs, json: bool) -> Result<Outcome, CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let grid = args
        .p_grid
        .unwrap_or_else(|| default_grid(args.n, args.grid_points));
    let first = grid.first().copied().unwrap_or(0.0);
    let mut cfg = ErConfig::new(args.n, first, args.seed, args.trials)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    cfg.self_loops_allowed = !args.no_self_loops;
    let records = run_experiment(&cfg, &grid).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut summary = Vec::new();
    write_summary_csv(&records, &mut summary)?;
    let summary = String::from_utf8(summary).expect("CSV is ASCII");
    if let Some(path) = &args.per_trial {
        write_per_trial_csv(&records, create(path)?)?;
    }

    let best = records
        .iter()
        .min_by(|a, b| a.mean_s.total_cmp(&b.mean_s))
        .expect("grid is non-empty");
    let line = format!("minimum mean_s {:.4} at p = {}\n", best.mean_s, best.p);

    let value = json!({
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
        "min_p": best.p,
        "min_mean_s": best.mean_s,
        "records": records.iter().map(|r| json!({
            "p": r.p,
            "mean_s": r.mean_s,
            "std_s": r.std_s,
            "lower_bound": r.lower_bound,
            "upper_bound": r.upper_bound,
        })).collect::<Vec<_>>(),
    });
    match &args.out {
        Some(path) => {
            std::fs::write(path, &summary).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(Outcome::ok(EXIT_OK, render(json, value, line)))
        }
        None if json => Ok(Outcome::ok(EXIT_OK, render(true, value, String::new()))),
        None => Ok(Outcome {
            code: EXIT_OK,
            stdout: summary,
            stderr: line,
        }),
    }
}

fn oracle(file: &Path, max_n: usize, json: bool) -> Result<Outcome, CliError> {
    let cbn = read_cbn(file)?;
    let v = oracle_check(&cbn, max_n)?;
    let n = cbn.n();
    let mut text = format!("observable: {}\n", yes_no(v.observable));
    let witness = v.witness.map(|(a, b)| {
        let (a, b) = (state_bits(a, n), state_bits(b, n));
        writeln!(
            text,
            "indistinguishable: {} {}",
            bit_string(&a),
            bit_string(&b)
        )
        .unwrap();
        json!([bit_string(&a), bit_string(&b)])
    });
    let value = json!({ "observable": v.observable, "witness": witness });
    let code = if v.observable { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome::ok(code, render(json, value, text)))
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;

    use crate::{run, Outcome};
    use cbn_observe::{parse_cbn, reduce_cbcn, Cbcn};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use serde_json::Value;

    fn fixture(name: &str) -> String {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures")
            .join(name)
            .to_string_lossy()
            .into_owned()
    }

    fn cbnobs(args: &[&str]) -> Outcome {
        run(std::iter::once("cbnobs").chain(args.iter().copied()))
    }

    fn json(args: &[&str]) -> (i32, Value) {
        let mut full = vec!["--json"];
        full.extend_from_slice(args);
        let out = cbnobs(&full);
        let text = if out.stdout.is_empty() {
            &out.stderr
        } else {
            &out.stdout
        };
        (out.code, serde_json::from_str(text).unwrap())
    }

    #[test]
    fn check_reports_o1_violator() {
        let out = cbnobs(&["check", &fixture("loop3.cbn")]);
        assert_eq!(out.code, 1);
        assert!(out.stdout.contains("O1 violations: x3"), "{}", out.stdout);
        let (code, v) = json(&["check", &fixture("loop3.cbn")]);
        assert_eq!(code, 1);
        assert_eq!(v["o1_violations"], serde_json::json!(["x3"]));
        assert_eq!(v["decomposition"], Value::Null);
    }

    #[test]
    fn check_two_paths_lists_paths() {
        let (code, v) = json(&["check", &fixture("two_paths.cbn")]);
        assert_eq!(code, 0);
        assert_eq!(
            v["decomposition"],
            serde_json::json!([["x4", "x3", "x1"], ["x5", "x2"]])
        );
    }

    #[test]
    fn malformed_file_exits_2_with_location() {
        let out = cbnobs(&["check", &fixture("malformed.cbn")]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("malformed.cbn:2:10"), "{}", out.stderr);
        assert_eq!(cbnobs(&["check", "/nonexistent.cbn"]).code, 2);
    }

    #[test]
    fn solve_two_cycles() {
        let out = cbnobs(&["solve", &fixture("two_cycles.cbn")]);
        assert_eq!(out.stdout, "add: x2 x4\n");
        let (_, v) = json(&["solve", "--all", &fixture("two_cycles.cbn")]);
        assert_eq!(v["fixed"], serde_json::json!([]));
        assert_eq!(
            v["cycles"],
            serde_json::json!([["x2", "x3"], ["x4", "x5", "x6"]])
        );
        assert_eq!(v["solution_count"], 6);
        assert_eq!(
            cbnobs(&["solve", &fixture("two_paths.cbn")]).stdout,
            "add: (none)\n"
        );
    }

    #[test]
    fn solving_then_checking_exits_zero() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in 0..40 {
            let n = rng.random_range(2..=9);
            let mut text = String::new();
            for v in 1..=n {
                let args: Vec<String> = (1..=n)
                    .filter(|_| rng.random_bool(0.25))
                    .map(|a| format!("x{a}"))
                    .collect();
                let rhs = if args.is_empty() {
                    "true".to_string()
                } else {
                    args.join(" ")
                };
                text.push_str(&format!("x{v} <- {rhs}\n"));
            }
            let path = dir.path().join(format!("r{i}.cbn"));
            std::fs::write(&path, &text).unwrap();
            let (_, v) = json(&["solve", path.to_str().unwrap()]);
            let add: Vec<&str> = v["add"]
                .as_array()
                .unwrap()
                .iter()
                .map(|s| s.as_str().unwrap())
                .collect();
            if !add.is_empty() {
                text.push_str(&format!("observe {}\n", add.join(" ")));
            }
            std::fs::write(&path, &text).unwrap();
            assert_eq!(cbnobs(&["check", path.to_str().unwrap()]).code, 0, "{text}");
        }
    }

    #[test]
    fn observe_round_trip_and_errors() {
        let out = cbnobs(&[
            "observe",
            &fixture("two_paths.cbn"),
            &fixture("two_paths_trace.csv"),
        ]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.starts_with("x(0): 1 0 1 1 0\n"));
        assert!(out.stdout.contains("x4 = y1(k=2)"));

        let dir = tempfile::tempdir().unwrap();
        let short = dir.path().join("short.csv");
        std::fs::write(&short, "k,y1,y2\n0,1,0\n1,1,0\n").unwrap();
        let out = cbnobs(&[
            "observe",
            &fixture("two_paths.cbn"),
            short.to_str().unwrap(),
        ]);
        assert_eq!(out.code, 1);
        assert!(out.stderr.contains("needs 3"), "{}", out.stderr);

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "k,y1,y2\n0,1,0\n1,1,0\n2,1,1\n").unwrap();
        let out = cbnobs(&["observe", &fixture("two_paths.cbn"), bad.to_str().unwrap()]);
        assert_eq!(out.code, 1);
        assert!(out.stderr.contains("inconsistent"), "{}", out.stderr);

        let out = cbnobs(&[
            "observe",
            &fixture("two_cycles.cbn"),
            short.to_str().unwrap(),
        ]);
        assert_eq!(out.code, 1);
        assert!(out.stderr.contains("not observable"));
    }

    #[test]
    fn simulate_feeds_observe() {
        let dir = tempfile::tempdir().unwrap();
        let trace = dir.path().join("t.csv");
        for x0 in ["00000", "11111", "01001", "10110"] {
            let out = cbnobs(&["simulate", &fixture("two_paths.cbn"), "--x0", x0]);
            std::fs::write(&trace, out.stdout).unwrap();
            let (code, v) = json(&[
                "observe",
                &fixture("two_paths.cbn"),
                trace.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
            let got: String = v["x0"]
                .as_array()
                .unwrap()
                .iter()
                .map(|b| b.to_string())
                .collect();
            assert_eq!(got, x0);
        }
    }

    #[test]
    fn reduce_modes() {
        let out = cbnobs(&["reduce", "--dbn", &fixture("dbn.cbn")]);
        assert_eq!(out.code, 0);
        assert_eq!(
            parse_cbn(&out.stdout).unwrap(),
            parse_cbn(&std::fs::read_to_string(fixture("loop3.cbn")).unwrap()).unwrap()
        );

        let out = cbnobs(&["reduce", "--cbcn", &fixture("cbcn.cbn")]);
        let reduced = parse_cbn(&out.stdout).unwrap();
        assert!(reduced.args(2).is_empty());
        let direct = reduce_cbcn(&Cbcn::new(reduced.clone(), 0, vec![]).unwrap()).cbn;
        assert_eq!(direct, reduced);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("aug.cbn");
        let out = cbnobs(&[
            "reduce",
            "--aug-outputs",
            &fixture("aug_outputs.cbn"),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.code, 0);
        let reduced = parse_cbn(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(reduced.n(), 5);
        assert_eq!(reduced.observed(), vec![3, 4]);

        assert_eq!(
            cbnobs(&["reduce", "--dbn", "--cbcn", &fixture("dbn.cbn")]).code,
            2
        );
        assert_eq!(cbnobs(&["reduce", &fixture("dbn.cbn")]).code, 2);
        assert_eq!(cbnobs(&["reduce", "--cbcn", &fixture("dbn.cbn")]).code, 2);
        // Plain commands refuse non-canonical input.
        assert_eq!(cbnobs(&["check", &fixture("dbn.cbn")]).code, 2);
    }

    #[test]
    fn oracle_command() {
        let (code, v) = json(&["oracle", &fixture("two_cycles.cbn")]);
        assert_eq!(code, 1);
        assert_eq!(v["observable"], false);
        assert_eq!(v["witness"].as_array().unwrap().len(), 2);
        assert_eq!(cbnobs(&["oracle", &fixture("self_gate.cbn")]).code, 0);
        let out = cbnobs(&["oracle", &fixture("n13.cbn")]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("13"));
    }

    #[test]
    fn experiment_usage_and_determinism() {
        assert_eq!(
            cbnobs(&["experiment", "--n", "100", "--trials", "0"]).code,
            2
        );
        assert_eq!(
            cbnobs(&["experiment", "--n", "100", "--p-grid", "1.5"]).code,
            2
        );
        assert_eq!(
            cbnobs(&["experiment", "--n", "100", "--p-grid", "abc"]).code,
            2
        );

        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let long = dir.path().join("long.csv");
        let args = |out: &str| {
            vec![
                "experiment",
                "--n",
                "200",
                "--trials",
                "10",
                "--seed",
                "3",
                "--p-grid",
                "0.001,0.005,0.02",
                "--out",
            ]
            .into_iter()
            .map(String::from)
            .chain([out.to_string()])
            .collect::<Vec<_>>()
        };
        let run_a = run(std::iter::once("cbnobs".to_string()).chain(args(a.to_str().unwrap())));
        assert_eq!(run_a.code, 0);
        assert!(run_a.stdout.starts_with("minimum mean_s"));
        let mut with_long = args(b.to_str().unwrap());
        with_long.extend([
            "--per-trial".to_string(),
            long.to_str().unwrap().to_string(),
        ]);
        assert_eq!(
            run(std::iter::once("cbnobs".to_string()).chain(with_long)).code,
            0
        );
        let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        assert_eq!(a, b);
        assert!(String::from_utf8(a)
            .unwrap()
            .starts_with("n,p,trials,mean_s,std_s,lower_bound,upper_bound\n"));
        let long = std::fs::read_to_string(long).unwrap();
        assert!(long.starts_with("n,p,trial,k\n"));
        assert_eq!(long.lines().count(), 31);
    }
}
