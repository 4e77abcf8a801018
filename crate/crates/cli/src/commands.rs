use std::collections::HashMap;
use std::path::Path;

use ergodic_core::contraction::{self, MarkovianMatrix};
use ergodic_core::ergodicity::{self, Status};
use ergodic_core::formats::{self, DiagramFile, WordTable};
use ergodic_core::measures::{edge_probabilities, g_measure_residual, solve_state};
use ergodic_core::sft::{self, Graph, WordFunction};
use ergodic_core::spectral;
use ergodic_core::{CylinderFunction, FinitePath, StateOptions, StateSequence, WeightedSystem};
use ndarray::Array2;
use serde_json::{json, Map, Value};

use crate::report::{float, floats, InputDigest, RunReport, Trace};
use crate::{Command, Failure, StateArgs, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_OK};

/// Largest number of paths listed by `measure --level`.
const LISTED_PATH_CAP: usize = 4096;

type Outcome = Result<(RunReport, i32), Failure>;

struct Input {
    digest: InputDigest,
    text: String,
    name: String,
}

fn read(path: &Path) -> Result<Input, Failure> {
    let name = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| Failure(format!("{name}: {e}")))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Failure(format!("{name}: not UTF-8 ({e})")))?;
    Ok(Input { digest: InputDigest::new(&name, &bytes), text, name })
}

/// Attaches the file name to a library error.
fn in_file<T>(input: &Input, r: ergodic_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure(format!("{}: {e}", input.name)))
}

fn fail<T>(r: ergodic_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure(e.to_string()))
}

fn load_system(input: &Input) -> Result<WeightedSystem, Failure> {
    let file: DiagramFile = in_file(input, formats::load_diagram(&input.text))?;
    in_file(input, file.to_system())
}

fn parse_word(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<usize>().map_err(|_| Failure(format!("{s:?} is not a comma-separated edge list"))))
        .collect()
}

fn matrix_json(a: &Array2<f64>) -> Value {
    Value::Array(a.rows().into_iter().map(|r| floats(&r.to_vec())).collect())
}

fn report(command: &str, inputs: Vec<&Input>, payload: Value, operations: Vec<&'static str>, traces: Vec<Trace>) -> RunReport {
    RunReport {
        command: command.to_string(),
        inputs: inputs.into_iter().map(|i| i.digest.clone()).collect(),
        payload,
        operations,
        traces,
        wall_time: 0.0,
    }
}

pub(crate) fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Validate { diagram } => validate(diagram),
        Command::Telescope { diagram, cuts } => telescope(diagram, cuts),
        Command::CheckUnique { diagram, base, horizon, tol, declare_divergent, bruteforce } => {
            check_unique(diagram, *base, *horizon, *tol, *declare_divergent, *bruteforce)
        }
        Command::State { diagram, state } => state_cmd(diagram, state),
        Command::Measure { diagram, state, paths, level, function } => {
            measure(diagram, state, paths, *level, function.as_deref())
        }
        Command::Pf { matrix, tol, max_iter } => pf(matrix, *tol, *max_iter),
        Command::Ruelle { graph, potential, tol, max_iter, words, function, horizon } => {
            ruelle(graph, potential, *tol, *max_iter, words, function.as_deref(), *horizon)
        }
        Command::Expect { diagram, function, horizon } => expect(diagram, function, *horizon),
    }
}

fn validate(path: &Path) -> Outcome {
    let input = read(path)?;
    let file = in_file(&input, formats::load_diagram(&input.text))?;
    let d = in_file(&input, file.to_diagram())?;
    let r = d.validate();
    let valid = r.is_empty();
    let payload = json!({
        "valid": valid,
        "violations": r.violations.iter().map(|v| {
            let mut obj = serde_json::to_value(v).expect("violation serializes");
            obj["message"] = Value::String(v.to_string());
            obj
        }).collect::<Vec<_>>(),
        "levels": d.level_count(),
        "vertex_counts": (0..=d.level_count()).map(|n| d.vertex_count(n)).collect::<Vec<_>>(),
        "edge_counts": d.all_edges().iter().map(Vec::len).collect::<Vec<_>>(),
    });
    let code = if valid { EXIT_OK } else { EXIT_INVALID };
    Ok((report("validate", vec![&input], payload, vec!["validate"], vec![]), code))
}

fn telescope(path: &Path, cuts: &[usize]) -> Outcome {
    let input = read(path)?;
    let system = load_system(&input)?;
    let t = fail(system.telescope(cuts))?;
    let file = DiagramFile::from_system(&t);
    let payload = json!({
        "cuts": cuts,
        "diagram": serde_json::to_value(&file).expect("diagram serializes"),
        "transition_matrices": t.transition_matrices().iter().map(matrix_json).collect::<Vec<_>>(),
    });
    let ops = vec!["telescope", "enumerate_paths", "transition_matrices"];
    Ok((report("telescope", vec![&input], payload, ops, vec![]), EXIT_OK))
}

fn check_unique(path: &Path, base: usize, horizon: Option<usize>, tol: f64, declared: bool, bruteforce: bool) -> Outcome {
    let input = read(path)?;
    let system = load_system(&input)?;
    let horizon = horizon.unwrap_or(system.level_count());
    let variation = fail(ergodicity::check_variation_condition(&system, base, horizon, tol))?;
    let series = fail(ergodicity::check_series_condition(&system, horizon, declared))?;
    let bound = fail(ergodicity::contraction_product_bound(&system, base, horizon))?;
    let terms = fail(ergodicity::series_terms(&system, horizon))?;

    let mut epsilons = Vec::new();
    let mut brute = Vec::new();
    for n in base + 1..=horizon {
        let b = fail(MarkovianMatrix::new(fail(system.markovianize(n))?.clone()))?;
        epsilons.push(contraction::contraction_epsilon(&b));
        if bruteforce {
            brute.push(fail(contraction::contraction_epsilon_bruteforce(&b))?);
        }
    }

    let status = if variation.status == Status::UniqueAtTolerance {
        Status::UniqueAtTolerance
    } else {
        series.status
    };
    let mut payload = json!({
        "status": status,
        "variation": {
            "status": variation.status,
            "base": base,
            "horizon": horizon,
            "tolerance": float(tol),
            "final_value": float(variation.final_value()),
        },
        "series": {
            "status": series.status,
            "declared_divergent": declared,
            "stationary": system.is_stationary(),
            "partial_sum": float(series.final_value()),
            "ratio_bounds": floats(&terms),
        },
        "contraction_epsilon": floats(&epsilons),
    });
    let mut ops = vec![
        "transition_matrices",
        "scaled_path_sums",
        "markovianize",
        "variation",
        "check_variation_condition",
        "ratio_bound",
        "check_series_condition",
        "contraction_epsilon",
    ];
    if bruteforce {
        let agree = brute.iter().zip(&epsilons).all(|(a, b)| a == b);
        payload["contraction_epsilon_bruteforce"] = floats(&brute);
        payload["bruteforce_agrees"] = Value::Bool(agree);
        ops.push("contraction_epsilon_bruteforce");
    }
    let traces = vec![
        Trace::new("variation", variation.trace.iter().map(|p| (p.n, p.value))),
        Trace::new("contraction_bound", (base..=horizon).zip(bound)),
        Trace::new("series", series.trace.iter().map(|p| (p.n, p.value))),
    ];
    let code = if status == Status::Inconclusive { EXIT_INCONCLUSIVE } else { EXIT_OK };
    Ok((report("check-unique", vec![&input], payload, ops, traces), code))
}

fn state_options(system: &WeightedSystem, args: &StateArgs) -> StateOptions {
    let mut opts = StateOptions::new(
        args.seed_depth
            .unwrap_or(system.level_count().saturating_sub(args.probe_delta)),
    );
    opts.probe_delta = args.probe_delta;
    opts.check_level = args.check_level;
    opts.tol = args.tol;
    opts
}

fn state_payload(system: &WeightedSystem, opts: &StateOptions, state: &StateSequence) -> Result<Value, Failure> {
    let levels = (0..=opts.check_level)
        .map(|n| {
            Ok(json!({
                "n": n,
                "rho": floats(&state.rho(n)),
                "mass": floats(&fail(state.level_masses(system, n))?),
            }))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(json!({
        "converged": state.converged,
        "convergence_estimate": float(state.convergence_estimate),
        "seed_depth": opts.seed_depth,
        "probe_delta": opts.probe_delta,
        "check_level": opts.check_level,
        "tolerance": float(opts.tol),
        "equation_residual": float(state.equation_residual(system)),
        "levels": levels,
    }))
}

fn state_cmd(path: &Path, args: &StateArgs) -> Outcome {
    let input = read(path)?;
    let system = load_system(&input)?;
    let opts = state_options(&system, args);
    let state = fail(solve_state(&system, &opts))?;
    let payload = state_payload(&system, &opts, &state)?;
    let code = if state.converged { EXIT_OK } else { EXIT_INCONCLUSIVE };
    Ok((report("state", vec![&input], payload, vec!["solve_state", "scaled_path_sums"], vec![]), code))
}

fn measure(path: &Path, args: &StateArgs, paths: &[String], level: Option<usize>, function: Option<&Path>) -> Outcome {
    let input = read(path)?;
    let system = load_system(&input)?;
    let d = system.diagram();
    let opts = state_options(&system, args);
    let state = fail(solve_state(&system, &opts))?;
    let m = fail(edge_probabilities(&system, &state))?;
    let mut ops = vec!["solve_state", "scaled_path_sums", "edge_probabilities"];
    let mut inputs = vec![&input];

    let mut payload = state_payload(&system, &opts, &state)?;
    payload["initial"] = floats(m.initial());

    let parsed = paths
        .iter()
        .map(|p| fail(FinitePath::from_root(d, parse_word(p)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    if parsed.iter().any(|p| p.len() > m.horizon()) {
        return Err(Failure(format!("paths must not be longer than the seed depth {}", m.horizon())));
    }
    if !parsed.is_empty() {
        let rows = parsed
            .iter()
            .map(|p| {
                let local = p
                    .steps()
                    .map(|(n, e)| system.local_potential(n, e).map(float))
                    .collect::<ergodic_core::Result<Vec<_>>>();
                Ok(json!({
                    "path": formats::format_key(&p.edges),
                    "mass": float(fail(m.cylinder_mass(p))?),
                    "normalized_potential": float(fail(system.normalized_potential(p))?),
                    "local_potentials": fail(local)?,
                }))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        payload["paths"] = Value::Array(rows);
        let mut pairs = Vec::new();
        for (i, x) in parsed.iter().enumerate() {
            for y in &parsed[i + 1..] {
                if x.len() == y.len() && x.end_vertex(d) == y.end_vertex(d) {
                    pairs.push(json!({
                        "x": formats::format_key(&x.edges),
                        "y": formats::format_key(&y.edges),
                        "cocycle_value": float(fail(system.cocycle_value(x, y))?),
                        "mass_ratio": float(fail(m.cylinder_mass(x))? / fail(m.cylinder_mass(y))?),
                    }));
                }
            }
        }
        payload["cocycles"] = Value::Array(pairs);
        ops.extend(["cylinder_mass", "normalized_potential", "local_potential", "cocycle_value"]);
    }

    if let Some(n) = level {
        if n > m.horizon() {
            return Err(Failure(format!("level {n} beyond seed depth {}", m.horizon())));
        }
        let all = fail(d.paths_between(0, n, LISTED_PATH_CAP))?;
        let rows = all
            .iter()
            .map(|p| Ok(json!({"path": formats::format_key(&p.edges), "mass": float(fail(m.cylinder_mass(p))?)})))
            .collect::<Result<Vec<_>, Failure>>()?;
        payload["level"] = json!({
            "n": n,
            "masses": floats(&fail(m.level_masses(n))?),
            "cylinders": rows,
        });
        ops.extend(["enumerate_paths", "cylinder_mass"]);
    }

    let mut traces = Vec::new();
    let fn_input;
    if let Some(fpath) = function {
        fn_input = read(fpath)?;
        let table: WordTable = in_file(&fn_input, formats::load_word_table(&fn_input.text))?;
        let f = in_file(&fn_input, table.to_cylinder_function(d))?;
        let residuals = (f.depth()..=m.horizon())
            .map(|n| Ok((n, fail(g_measure_residual(&m, &system, &f, n))?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        payload["integral"] = float(fail(m.integrate(&f))?);
        traces.push(Trace::new("g_measure_residual", residuals));
        ops.extend(["g_measure_residual", "expectation", "local_potential", "markovianize"]);
        inputs.push(&fn_input);
    }

    let code = if state.converged { EXIT_OK } else { EXIT_INCONCLUSIVE };
    Ok((report("measure", inputs, payload, ops, traces), code))
}

fn pf(path: &Path, tol: f64, max_iter: usize) -> Outcome {
    let input = read(path)?;
    let a = in_file(&input, formats::load_matrix(&input.text))?;
    let exponent = in_file(&input, spectral::primitivity_exponent(&a))?;
    if exponent.is_none() {
        return Err(Failure(format!("{}: matrix is not primitive", input.name)));
    }
    let r = in_file(&input, spectral::perron(&a, tol, max_iter))?;
    let payload = json!({
        "lambda": float(r.lambda),
        "left_vector": floats(&r.left_vector),
        "residual": float(r.residual),
        "iterations": r.iterations,
        "exponent": r.exponent,
        "contraction_bound": float(r.contraction_bound),
        "converged": r.converged,
        "tolerance": float(tol),
    });
    let code = if r.converged { EXIT_OK } else { EXIT_INCONCLUSIVE };
    Ok((report("pf", vec![&input], payload, vec!["primitivity_exponent", "perron", "ratio_bound"], vec![]), code))
}

fn word_function(input: &Input, graph: &Graph) -> Result<WordFunction, Failure> {
    let table: WordTable = in_file(input, formats::load_word_table(&input.text))?;
    let map: HashMap<Vec<usize>, f64> = in_file(input, table.to_map())?;
    let words = graph.admissible_words(table.depth);
    if let Some(bad) = map.keys().find(|w| w.len() != table.depth || !graph.is_admissible(w)) {
        return Err(Failure(format!("{}: key {bad:?} is not an admissible {}-word", input.name, table.depth)));
    }
    let values = words
        .iter()
        .map(|w| {
            map.get(w)
                .copied()
                .ok_or_else(|| Failure(format!("{}: no value for word {:?}", input.name, formats::format_key(w))))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(WordFunction { depth: table.depth, values })
}

fn ruelle(
    graph_path: &Path,
    potential_path: &Path,
    tol: f64,
    max_iter: usize,
    words: &[String],
    function: Option<&Path>,
    horizon: usize,
) -> Outcome {
    let graph_input = read(graph_path)?;
    let pot_input = read(potential_path)?;
    let graph = in_file(&graph_input, formats::load_graph(&graph_input.text))?;
    let table: WordTable = in_file(&pot_input, formats::load_word_table(&pot_input.text))?;
    let system = in_file(&pot_input, table.to_potential(graph.clone()))?;
    let l = fail(sft::build_ruelle_matrix(&system))?;
    let cert = fail(sft::walters_check_locally_constant(&system))?;
    let e = fail(sft::eigen_measure(&system, tol, max_iter))?;
    let mut ops = vec!["build_ruelle_matrix", "walters_check_locally_constant", "primitivity_exponent", "eigen_measure", "perron"];
    let mut inputs = vec![&graph_input, &pot_input];

    let mu: Map<String, Value> = e.words.iter().zip(&e.mu).map(|(w, x)| (formats::format_key(w), float(*x))).collect();
    let mut payload = json!({
        "depth": system.depth(),
        "word_count": l.words.len(),
        "lambda": float(e.lambda),
        "lambda_from_mass": float(e.lambda_from_mass),
        "residual": float(e.residual),
        "iterations": e.iterations,
        "converged": e.converged,
        "tolerance": float(tol),
        "mu": Value::Object(mu),
        "walters": serde_json::to_value(&cert).expect("certificate serializes"),
    });
    if !words.is_empty() {
        let rows = words
            .iter()
            .map(|w| {
                let word = parse_word(w)?;
                Ok(json!({
                    "word": formats::format_key(&word),
                    "mass": float(fail(sft::extend_cylinder_measure(&system, &e, &word))?),
                }))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        payload["cylinders"] = Value::Array(rows);
        ops.push("extend_cylinder_measure");
    }

    let mut traces = Vec::new();
    let fn_input;
    if let Some(fpath) = function {
        fn_input = read(fpath)?;
        let f = word_function(&fn_input, &graph)?;
        if horizon < f.depth {
            return Err(Failure(format!("horizon {horizon} is below the function depth {}", f.depth)));
        }
        let mut points = Vec::new();
        let mut last = None;
        for n in f.depth..=horizon {
            let en = fail(sft::stationary_expectation(&system, &f, n))?;
            points.push((n, fail(contraction::variation(&en.values))?));
            last = Some(en);
        }
        let last = last.expect("at least one step");
        let lifted = graph.admissible_words(last.depth);
        let values: Map<String, Value> = lifted.iter().zip(&last.values).map(|(w, x)| (formats::format_key(w), float(*x))).collect();
        payload["expectation"] = json!({"n": horizon, "depth": last.depth, "values": Value::Object(values)});
        traces.push(Trace::new("expectation_variation", points));
        ops.extend(["stationary_expectation", "variation"]);
        inputs.push(&fn_input);
    }

    let code = if e.converged { EXIT_OK } else { EXIT_INCONCLUSIVE };
    Ok((report("ruelle", inputs, payload, ops, traces), code))
}

fn expect(path: &Path, function: &Path, horizon: Option<usize>) -> Outcome {
    let input = read(path)?;
    let fn_input = read(function)?;
    let system = load_system(&input)?;
    let table: WordTable = in_file(&fn_input, formats::load_word_table(&fn_input.text))?;
    let f: CylinderFunction = in_file(&fn_input, table.to_cylinder_function(system.diagram()))?;
    let horizon = horizon.unwrap_or(system.level_count());
    let values = fail(system.expectation(&f, horizon))?;
    let decay = fail(ergodicity::variation_decay(&system, &f, f.depth(), horizon))?;
    let payload = json!({
        "depth": f.depth(),
        "horizon": horizon,
        "expectation": floats(&values),
        "final_variation": float(*decay.last().expect("nonempty")),
    });
    let trace = Trace::new("variation", (f.depth()..=horizon).zip(decay));
    let ops = vec!["expectation", "local_potential", "markovianize", "variation_decay", "variation"];
    Ok((report("expect", vec![&input, &fn_input], payload, ops, vec![trace]), EXIT_OK))
}
