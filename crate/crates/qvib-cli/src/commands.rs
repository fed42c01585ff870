//! Command implementations.

use crate::config::RunConfig;
use crate::{Cli, Command};
use anyhow::{anyhow, bail, Context, Result};
use qvib::cost::{mc_blocks, qpe_cost, LookupMode, PrecisionBudget, QpeEstimate};
use qvib::decomp::{decompose_hamiltonian, DecompOptions};
use qvib::grouping::{
    build_conflict_graph, exact_coloring, greedy_largest_first, naive_grouping,
    weighted_grouping, GroupingAlgorithm, GroupingPlan, DEFAULT_EXACT_NODE_LIMIT,
};
use qvib::lcu::Representation;
use qvib::oracle::{assemble_full, energy_error_report, DEFAULT_DIMENSION_CAP};
use qvib::sop::{
    generate_coupled_oscillator, generate_low_rank_model, generate_random_model, read_sop,
    validate, write_sop, CouplingSpec, SopHamiltonian,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn input_descriptor(path: &Path) -> Result<Value> {
    Ok(json!({ "path": path.display().to_string(), "sha256": sha256_hex(path)? }))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn parse_representation(s: &str) -> Result<Representation> {
    match s {
        "quadratic" => Ok(Representation::Quadratic),
        "triangular" => Ok(Representation::Triangular),
        "diagonal" => Ok(Representation::Diagonal),
        other => bail!("unknown representation {other:?} (quadratic|triangular|diagonal)"),
    }
}

fn parse_algorithm(s: &str) -> Result<GroupingAlgorithm> {
    match s {
        "naive" => Ok(GroupingAlgorithm::Naive),
        "greedy" => Ok(GroupingAlgorithm::Greedy),
        "exact" => Ok(GroupingAlgorithm::Exact),
        other => bail!("unknown grouping algorithm {other:?} (naive|greedy|exact)"),
    }
}

fn parse_lookup(s: &str) -> Result<LookupMode> {
    match s {
        "standard" => Ok(LookupMode::Standard),
        "selectswap" => Ok(LookupMode::SelectSwap),
        other => bail!("unknown lookup mode {other:?} (standard|selectswap)"),
    }
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| anyhow!("bad number {x:?}: {e}")))
        .collect()
}

fn required_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref().ok_or_else(|| anyhow!("--out is required for this command"))
}

fn read_validated(path: &Path) -> Result<SopHamiltonian> {
    let h = read_sop(path).with_context(|| format!("reading {}", path.display()))?;
    let violations = validate(&h);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        bail!("input fails validation:\n  {}", lines.join("\n  "));
    }
    Ok(h)
}

fn emit(cli_json: bool, summary: &Value, human: &str) {
    if cli_json {
        println!("{summary}");
    } else {
        eprintln!("{human}");
    }
}

fn stamp_field(stamp: bool) -> Value {
    if stamp {
        let unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        json!(unix)
    } else {
        Value::Null
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    match &cli.command {
        Command::Gen { modes, modals, preset, order, terms, amplitude, frequencies } => {
            cmd_gen(&cli, &cfg, *modes, *modals, preset, *order, *terms, *amplitude, frequencies)
        }
        Command::Decompose { input, eps_t, eps_lr, no_tucker, report } => {
            if let Some(x) = eps_t {
                cfg.eps_t = *x;
            }
            if let Some(x) = eps_lr {
                cfg.eps_lr = *x;
            }
            cmd_decompose(&cli, &cfg, input, *no_tucker, report.as_deref())
        }
        Command::Group { input, algorithm, weighted, representation, epsilon } => {
            if let Some(a) = algorithm {
                cfg.grouping = parse_algorithm(a)?;
            }
            if let Some(w) = weighted {
                cfg.weighted = *w;
            }
            if let Some(r) = representation {
                cfg.representation = parse_representation(r)?;
            }
            if let Some(e) = epsilon {
                cfg.epsilon = *e;
            }
            cfg.validate()?;
            cmd_group(&cli, &cfg, input)
        }
        Command::Estimate {
            input,
            grouping,
            all_reps,
            representation,
            epsilon,
            c_lcu,
            lookup,
            lookup_a,
            lambda_c,
            lambda_u,
            seconds_per_toffoli,
        } => {
            if let Some(r) = representation {
                cfg.representation = parse_representation(r)?;
            }
            if let Some(e) = epsilon {
                cfg.epsilon = *e;
            }
            if let Some(c) = c_lcu {
                cfg.c_lcu = *c;
            }
            if let Some(l) = lookup {
                cfg.lookup = parse_lookup(l)?;
            }
            if let Some(a) = lookup_a {
                cfg.lookup_a = *a;
            }
            if let Some(l) = lambda_c {
                cfg.lambda_c = *l;
            }
            if let Some(l) = lambda_u {
                cfg.lambda_u = *l;
            }
            if let Some(s) = seconds_per_toffoli {
                cfg.seconds_per_toffoli = *s;
            }
            cfg.validate()?;
            cmd_estimate(&cli, &cfg, input, grouping.as_deref(), *all_reps)
        }
        Command::Verify { input, eps_lr_list, eps_t, representation, epsilon, csv, eigenvalues } => {
            if let Some(x) = eps_t {
                cfg.eps_t = *x;
            }
            if let Some(r) = representation {
                cfg.representation = parse_representation(r)?;
            }
            if let Some(e) = epsilon {
                cfg.epsilon = *e;
            }
            cfg.validate()?;
            let thresholds = parse_f64_list(eps_lr_list)?;
            cmd_verify(&cli, &cfg, input, &thresholds, csv.as_deref(), eigenvalues.as_deref())
        }
        Command::Report { inputs, csv } => cmd_report(&cli, inputs, csv.as_deref()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    cli: &Cli,
    cfg: &RunConfig,
    modes: usize,
    modals: usize,
    preset: &str,
    order: usize,
    terms: usize,
    amplitude: f64,
    frequencies: &Option<String>,
) -> Result<ExitCode> {
    let out = required_out(&cli.out)?;
    if !(2..=3).contains(&order) {
        bail!("--order must be 2 or 3");
    }
    let freqs = match frequencies {
        Some(list) => {
            let f = parse_f64_list(list)?;
            if f.len() != modes {
                bail!("expected {modes} frequencies, got {}", f.len());
            }
            f
        }
        None => (0..modes).map(|i| 1.0 + 0.1 * i as f64).collect(),
    };
    let tuples: Vec<Vec<usize>> = match order {
        2 => (0..modes.saturating_sub(1)).map(|i| vec![i, i + 1]).collect(),
        _ => (0..modes.saturating_sub(2)).map(|i| vec![i, i + 1, i + 2]).collect(),
    };

    let h = match preset {
        "uncoupled" => {
            generate_coupled_oscillator(modes, &freqs, &CouplingSpec::new(), modals, cfg.seed)?
        }
        "bilinear" => {
            let mut couplings = CouplingSpec::new();
            for i in 0..modes.saturating_sub(1) {
                couplings
                    .insert(vec![i, i + 1], BTreeMap::from([(vec![1, 1], amplitude)]));
            }
            generate_coupled_oscillator(modes, &freqs, &couplings, modals, cfg.seed)?
        }
        "random" => generate_random_model(modes, modals, &tuples, terms, amplitude, cfg.seed)?,
        "lowrank" => {
            let weights =
                [amplitude, amplitude * 4e-3, amplitude * 4e-5, amplitude * 4e-7];
            generate_low_rank_model(modes, modals, &tuples, &weights, cfg.seed)?
        }
        other => bail!("unknown preset {other:?} (uncoupled|bilinear|random|lowrank)"),
    };

    write_sop(&h, out)?;
    let summary = json!({
        "command": "gen",
        "out": out.display().to_string(),
        "preset": preset,
        "n_modes": h.modes.len(),
        "n_couplings": h.couplings.len(),
        "n_terms": h.term_count(),
        "seed": cfg.seed,
    });
    emit(cli.json, &summary, &format!("wrote {} ({} terms)", out.display(), h.term_count()));
    Ok(ExitCode::SUCCESS)
}

fn cmd_decompose(
    cli: &Cli,
    cfg: &RunConfig,
    input: &Path,
    no_tucker: bool,
    report_path: Option<&Path>,
) -> Result<ExitCode> {
    let out = required_out(&cli.out)?;
    let h = read_validated(input)?;
    let opts = DecompOptions {
        eps_t: cfg.eps_t,
        eps_lr: cfg.eps_lr,
        max_sweeps: 200,
        use_tucker: !no_tucker,
        seed: cfg.seed,
    };
    let (dec, report) = decompose_hamiltonian(&h, &opts)?;
    write_sop(&dec, out)?;

    let report_value = json!({
        "version": "decomp-v1",
        "config": serde_json::to_value(cfg)?,
        "input": input_descriptor(input)?,
        "generated_at_unix_s": stamp_field(cli.stamp),
        "report": serde_json::to_value(&report)?,
    });
    if let Some(p) = report_path {
        write_json(p, &report_value)?;
    }
    let summary = json!({
        "command": "decompose",
        "out": out.display().to_string(),
        "terms_before": report.terms_before,
        "terms_after": report.terms_after,
        "epsilon_tensor": report.epsilon_tensor,
        "converged": report.converged,
    });
    emit(
        cli.json,
        &summary,
        &format!(
            "decomposed {} -> {} terms (eps_tensor {:.3e})",
            report.terms_before, report.terms_after, report.epsilon_tensor
        ),
    );
    Ok(ExitCode::SUCCESS)
}

fn block_costs(h: &SopHamiltonian, cfg: &RunConfig) -> Result<BTreeMap<String, u64>> {
    let params = cfg.qpe_params(cfg.representation)?;
    let alpha = qvib::cost::alpha_total(h, params.representation)?;
    let n_rot = qvib::cost::total_rotation_count(h);
    let budget = PrecisionBudget::new(params.epsilon, params.c_lcu, alpha, n_rot)?;
    let blocks = mc_blocks(h, params.representation, &budget, &params.lookup)?;
    Ok(blocks.into_iter().map(|b| (b.id(), b.toffoli)).collect())
}

fn cmd_group(cli: &Cli, cfg: &RunConfig, input: &Path) -> Result<ExitCode> {
    let out = required_out(&cli.out)?;
    let h = read_validated(input)?;
    let costs = block_costs(&h, cfg)?;
    let graph = build_conflict_graph(&h, &costs)?;
    let plan = if cfg.weighted {
        weighted_grouping(&graph, cfg.grouping, DEFAULT_EXACT_NODE_LIMIT)?
    } else {
        match cfg.grouping {
            GroupingAlgorithm::Naive => naive_grouping(&graph),
            GroupingAlgorithm::Greedy => greedy_largest_first(&graph),
            GroupingAlgorithm::Exact => exact_coloring(&graph, DEFAULT_EXACT_NODE_LIMIT)?,
        }
    };
    qvib::grouping::verify_plan(&graph, &plan)?;

    let value = json!({
        "version": "groups-v1",
        "config": serde_json::to_value(cfg)?,
        "input": input_descriptor(input)?,
        "generated_at_unix_s": stamp_field(cli.stamp),
        "algorithm": plan.algorithm,
        "weighted": plan.weighted,
        "groups": plan.groups,
        "depth_cost": plan.depth_cost,
        "optimal": plan.optimal,
    });
    write_json(out, &value)?;
    let summary = json!({
        "command": "group",
        "out": out.display().to_string(),
        "n_groups": plan.group_count(),
        "depth_cost": plan.depth_cost,
    });
    emit(
        cli.json,
        &summary,
        &format!("{} groups, depth cost {}", plan.group_count(), plan.depth_cost),
    );
    Ok(ExitCode::SUCCESS)
}

fn load_plan(path: &Path) -> Result<GroupingPlan> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text)?;
    if v["version"] != "groups-v1" {
        bail!("{} is not a groups-v1 file", path.display());
    }
    Ok(GroupingPlan {
        algorithm: serde_json::from_value(v["algorithm"].clone())?,
        weighted: v["weighted"].as_bool().unwrap_or(false),
        groups: serde_json::from_value(v["groups"].clone())?,
        depth_cost: v["depth_cost"].as_u64().unwrap_or(0),
        optimal: v["optimal"].as_bool().unwrap_or(false),
    })
}

fn cmd_estimate(
    cli: &Cli,
    cfg: &RunConfig,
    input: &Path,
    grouping: Option<&Path>,
    all_reps: bool,
) -> Result<ExitCode> {
    let out = required_out(&cli.out)?;
    let h = read_validated(input)?;
    let plan = grouping.map(load_plan).transpose()?;

    let reps: Vec<Representation> =
        if all_reps { Representation::ALL.to_vec() } else { vec![cfg.representation] };
    let mut estimates = serde_json::Map::new();
    for rep in reps {
        let params = cfg.qpe_params(rep)?;
        let est: QpeEstimate = qpe_cost(&h, &params, plan.as_ref())?;
        estimates.insert(rep.to_string(), serde_json::to_value(&est)?);
    }

    let value = json!({
        "version": "cost-v1",
        "config": serde_json::to_value(cfg)?,
        "input": input_descriptor(input)?,
        "input_metadata": h.metadata,
        "grouping": match grouping {
            Some(p) => input_descriptor(p)?,
            None => Value::Null,
        },
        "generated_at_unix_s": stamp_field(cli.stamp),
        "estimates": Value::Object(estimates.clone()),
    });
    write_json(out, &value)?;

    let primary = &estimates[&cfg.representation.to_string()];
    let summary = json!({
        "command": "estimate",
        "out": out.display().to_string(),
        "representation": cfg.representation,
        "toffoli": primary["estimate"]["toffoli"],
        "total_qubits": primary["total_qubits"],
        "n_walk": primary["n_walk"],
        "runtime_seconds": primary["runtime_seconds"],
    });
    emit(
        cli.json,
        &summary,
        &format!(
            "{}: {} Toffoli, {} qubits, runtime {:.3e} s",
            cfg.representation,
            primary["estimate"]["toffoli"],
            primary["total_qubits"],
            primary["runtime_seconds"].as_f64().unwrap_or(0.0)
        ),
    );
    Ok(ExitCode::SUCCESS)
}

const VERIFY_CSV_HEADER: &str =
    "threshold,n_terms,alpha,toffoli,qubits,n_walk,runtime_s,eps_tensor,delta_e,weyl_bound,converged,weyl_ok";

fn cmd_verify(
    cli: &Cli,
    cfg: &RunConfig,
    input: &Path,
    thresholds: &[f64],
    csv_path: Option<&Path>,
    eigenvalue_path: Option<&Path>,
) -> Result<ExitCode> {
    let out = required_out(&cli.out)?;
    let h = read_validated(input)?;
    let full = assemble_full(&h, DEFAULT_DIMENSION_CAP)?;
    if let Some(p) = eigenvalue_path {
        let mut csv = String::from("index,energy\n");
        for (i, e) in qvib::oracle::eigenvalues(&full)?.iter().enumerate() {
            csv.push_str(&format!("{i},{e}\n"));
        }
        std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
    }
    let n_mc = h.couplings.len() as f64;

    let mut rows = Vec::new();
    let mut csv = String::from(VERIFY_CSV_HEADER);
    csv.push('\n');
    let mut all_ok = true;
    for &eps_lr in thresholds {
        let opts = DecompOptions {
            eps_t: cfg.eps_t,
            eps_lr,
            max_sweeps: 200,
            use_tucker: true,
            seed: cfg.seed,
        };
        let (dec, report) = decompose_hamiltonian(&h, &opts)?;
        let per_mc_ok = report.per_mc.iter().all(|r| r.frobenius_error <= eps_lr);
        let sum_ok = report.epsilon_tensor <= n_mc * eps_lr;

        let full_dec = assemble_full(&dec, DEFAULT_DIMENSION_CAP)?;
        let er = energy_error_report(&full, &full_dec)?;

        let params = cfg.qpe_params(cfg.representation)?;
        let est = qpe_cost(&dec, &params, None)?;
        let quad = qpe_cost(
            &dec,
            &cfg.qpe_params(Representation::Quadratic)?,
            None,
        )?;
        let tri = qpe_cost(&dec, &cfg.qpe_params(Representation::Triangular)?, None)?;
        let alpha_identity = tri.alpha_total == quad.alpha_total;

        let ok = per_mc_ok && sum_ok && er.within_bound && alpha_identity;
        all_ok &= ok;
        rows.push(json!({
            "threshold": eps_lr,
            "n_terms": dec.term_count(),
            "alpha": est.alpha_total,
            "toffoli": est.estimate.toffoli,
            "qubits": est.total_qubits,
            "n_walk": est.n_walk,
            "runtime_s": est.runtime_seconds,
            "eps_tensor": report.epsilon_tensor,
            "delta_e": er.delta_e,
            "weyl_bound": er.weyl_bound,
            "e_original": er.e_original,
            "e_decomposed": er.e_decomposed,
            "checks": {
                "per_mc_within_threshold": per_mc_ok,
                "eps_tensor_within_sum_bound": sum_ok,
                "delta_e_within_weyl_bound": er.within_bound,
                "alpha_triangular_equals_quadratic": alpha_identity,
            },
        }));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            eps_lr,
            dec.term_count(),
            est.alpha_total,
            est.estimate.toffoli,
            est.total_qubits,
            est.n_walk,
            est.runtime_seconds,
            report.epsilon_tensor,
            er.delta_e,
            er.weyl_bound,
            report.converged,
            er.within_bound,
        ));
    }

    let value = json!({
        "version": "verify-v1",
        "config": serde_json::to_value(cfg)?,
        "input": input_descriptor(input)?,
        "generated_at_unix_s": stamp_field(cli.stamp),
        "rows": rows,
        "all_checks_passed": all_ok,
    });
    write_json(out, &value)?;
    if let Some(p) = csv_path {
        std::fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?;
    }
    let summary = json!({
        "command": "verify",
        "out": out.display().to_string(),
        "thresholds": thresholds,
        "all_checks_passed": all_ok,
    });
    emit(
        cli.json,
        &summary,
        &format!("verify: all checks passed = {all_ok} ({} thresholds)", thresholds.len()),
    );
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_report(cli: &Cli, inputs: &[PathBuf], csv_path: Option<&Path>) -> Result<ExitCode> {
    let out = required_out(&cli.out)?;
    if inputs.is_empty() {
        bail!("--inputs requires at least one file");
    }
    let mut runs = Vec::new();
    let mut csv = String::from("threshold,n_terms,alpha,toffoli,qubits,n_walk,runtime_s\n");
    for path in inputs {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let v: Value = serde_json::from_str(&text)?;
        let version = v["version"].as_str().unwrap_or("unknown").to_string();
        match version.as_str() {
            "cost-v1" => {
                // prefer the threshold recorded by the decomposition that
                // produced the input model
                let threshold = v["input_metadata"]["eps_lr"]
                    .as_str()
                    .and_then(|s| s.parse::<f64>().ok())
                    .map(Value::from)
                    .unwrap_or_else(|| v["config"]["eps_lr"].clone());
                if let Some(map) = v["estimates"].as_object() {
                    for est in map.values() {
                        let n_terms: u64 = est["per_mc"]
                            .as_array()
                            .map(|rows| {
                                rows.iter().map(|r| r["n_terms"].as_u64().unwrap_or(0)).sum()
                            })
                            .unwrap_or(0);
                        csv.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            threshold,
                            n_terms,
                            est["alpha_total"],
                            est["estimate"]["toffoli"],
                            est["total_qubits"],
                            est["n_walk"],
                            est["runtime_seconds"],
                        ));
                    }
                }
            }
            "verify-v1" => {
                if let Some(rows) = v["rows"].as_array() {
                    for r in rows {
                        csv.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            r["threshold"],
                            r["n_terms"],
                            r["alpha"],
                            r["toffoli"],
                            r["qubits"],
                            r["n_walk"],
                            r["runtime_s"],
                        ));
                    }
                }
            }
            _ => {}
        }
        runs.push(json!({
            "path": path.display().to_string(),
            "sha256": sha256_hex(path)?,
            "version": version,
            "content": v,
        }));
    }

    let value = json!({
        "version": "summary-v1",
        "generated_at_unix_s": stamp_field(cli.stamp),
        "runs": runs,
    });
    write_json(out, &value)?;
    if let Some(p) = csv_path {
        std::fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?;
    }
    let summary = json!({
        "command": "report",
        "out": out.display().to_string(),
        "n_runs": inputs.len(),
    });
    emit(cli.json, &summary, &format!("merged {} runs into {}", inputs.len(), out.display()));
    Ok(ExitCode::SUCCESS)
}
