// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::Path;

use qdock::docking::{build_binding_graph, load_molecule, BindingConfig, InteractionTable};
use qdock::graph::{brute_force_mwis, complement, max_weight_clique, mis_size, read_graph, GraphFile, VertexSubset};
use qdock::mlqaa::{
    compare_with_vqaa, evaluate_mape, generate_dataset, label_dataset, mlqaa_run, predict_params, prepare,
    read_dataset, train_models, train_test_split, write_dataset, DatasetRecord, ModelSet, Target,
};
use qdock::optimize::{
    prefix_outcome, qaa_sweep, search_space, vqaa_in, write_sweep_csv, Evaluator, OptimizerKind, RunSettings,
    VqaaConfig,
};
use qdock::register::{layout, omega_bounds, read_register, Embedding, RegisterFile};
use qdock::{Error, Result};
use serde_json::{json, Value};

use crate::config::RunConfig;

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.out)?;
    Ok(&cfg.out)
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `v` with the digest and seed merged into its top-level object.
fn stamped(cfg: &RunConfig, v: impl serde::Serialize) -> Result<Value> {
    let mut v = serde_json::to_value(v)?;
    if let (Some(obj), Value::Object(meta)) = (v.as_object_mut(), cfg.meta()) {
        obj.extend(meta);
    }
    Ok(v)
}

fn csv_header(cfg: &RunConfig) -> String {
    format!("# config_digest={} seed={}\n", cfg.digest(), cfg.seed)
}

fn settings(cfg: &RunConfig) -> RunSettings {
    RunSettings {
        shots: cfg.shots,
        dt: cfg.dt,
        seed: cfg.seed,
        score: cfg.score(),
    }
}

fn vqaa_config(cfg: &RunConfig, rounds: usize) -> VqaaConfig {
    VqaaConfig {
        family: cfg.family,
        optimizer: cfg.optimizer,
        rounds,
        restarts: cfg.restarts,
        confirm_factor: cfg.confirm_factor,
        ..VqaaConfig::default()
    }
}

fn bitstrings(sets: &[VertexSubset]) -> Vec<String> {
    sets.iter().map(|s| s.to_bitstring()).collect()
}

pub fn oracle(cfg: &RunConfig, graph: &Path) -> Result<()> {
    let g = read_graph(graph)?;
    let mwis = brute_force_mwis(&g)?;
    let cliques = max_weight_clique(&complement(&g))?;
    let agree = bitstrings(&mwis) == bitstrings(&cliques);
    let weight = mwis.first().map_or(0.0, |s| s.weight(&g));
    for s in &mwis {
        println!("{}  weight {}  [{}]", s.to_bitstring(), weight, s.member_ids(&g).join(", "));
    }
    println!("complement clique check: {}", if agree { "ok" } else { "MISMATCH" });
    let report = json!({
        "graph": graph.display().to_string(),
        "mwis": bitstrings(&mwis),
        "mwis_weight": weight,
        "mis_size": mis_size(&g)?,
        "complement_cliques": bitstrings(&cliques),
        "complement_check": agree,
    });
    write_json(&out_dir(cfg)?.join("oracle.json"), &stamped(cfg, report)?)?;
    if agree {
        Ok(())
    } else {
        Err(Error::InvalidGraph("oracle and complement clique disagree".into()))
    }
}

pub fn dock(cfg: &RunConfig, ligand: &Path, receptor: &Path, table: Option<&Path>) -> Result<()> {
    let lig = load_molecule(ligand)?;
    let rec = load_molecule(receptor)?;
    let table = match table {
        Some(p) => InteractionTable::load(p)?,
        None => InteractionTable::default(),
    };
    let bg = build_binding_graph(
        &lig,
        &rec,
        &table,
        &BindingConfig {
            tau: cfg.tau,
            ..BindingConfig::default()
        },
    )?;
    if bg.graph.is_empty() {
        log::warn!("no attracting feature pairs: the binding graph is empty");
    }
    let dir = out_dir(cfg)?;
    let mut binding = GraphFile::from_graph(&bg.graph);
    binding.meta = Some(stamped(cfg, json!({ "contacts": bg.contacts, "tau": cfg.tau }))?);
    write_json(&dir.join("binding_graph.json"), &binding)?;
    let conj = complement(&bg.graph);
    let mut complement_file = GraphFile::from_graph(&conj);
    complement_file.meta = Some(stamped(cfg, json!({ "contacts": bg.contacts, "complement_of": "binding_graph.json" }))?);
    write_json(&dir.join("complement_graph.json"), &complement_file)?;
    println!(
        "binding graph: {} vertices, {} edges; complement: {} edges",
        bg.graph.len(),
        bg.graph.edge_count(),
        conj.edge_count()
    );
    Ok(())
}

pub fn embed(cfg: &RunConfig, graph: &Path) -> Result<()> {
    let g = read_graph(graph)?;
    let emb = layout(&g, &cfg.device, cfg.spacing, cfg.seed)?;
    let band = omega_bounds(&emb, &cfg.device)?;
    if band.min >= cfg.device.delta_abs_max {
        log::warn!(
            "closest non-edge pair interacts at {:.2} rad/us, above the detuning limit {}; \
             the maximum independent set may not be the ground state, consider a larger spacing",
            band.min,
            cfg.device.delta_abs_max
        );
    }
    let mut file = RegisterFile::from_embedding(&emb, &cfg.device);
    file.meta = Some(cfg.meta());
    write_json(&out_dir(cfg)?.join("register.json"), &file)?;
    println!(
        "{} atoms ({} ancillas, {} links); omega band [{:.4}, {:.4}] rad/us; blockade radius {:.3} um",
        emb.register.len(),
        emb.register.ancilla_count(),
        emb.link_map.len(),
        band.min,
        band.max,
        emb.blockade_radius
    );
    Ok(())
}

fn load_trials(path: &Path) -> Result<Vec<qdock::optimize::Trial>> {
    if path.exists() {
        qdock::optimize::vqaa::read_log(path)
    } else {
        Ok(Vec::new())
    }
}

pub fn vqaa(cfg: &RunConfig, register: &Path, resume: bool) -> Result<()> {
    let emb = read_register(register)?;
    let vcfg = vqaa_config(cfg, cfg.rounds);
    let space = cfg.apply_search(search_space(&emb, &cfg.device, &vcfg)?)?;
    let dir = out_dir(cfg)?;
    let log_path = dir.join("trials.jsonl");
    let previous = if resume { load_trials(&log_path)? } else { Vec::new() };
    let out = vqaa_in(&emb, &cfg.device, &vcfg, &settings(cfg), &previous, space.clone())?;
    qdock::optimize::vqaa::write_log(&log_path, &out.log, &cfg.meta())?;
    let params: BTreeMap<&str, f64> = space.names().iter().copied().zip(out.best.params.iter().copied()).collect();
    let best = json!({
        "family": vcfg.family,
        "optimizer": vcfg.optimizer,
        "round": out.best.round,
        "params": params,
        "score": out.best.score,
        "confirmed_score": out.confirmed.score,
        "normalized_score": out.normalized_score,
        "second_pass": out.second_pass,
        "low_confidence": out.low_confidence,
        "trials": out.log.len(),
    });
    write_json(&dir.join("best.json"), &stamped(cfg, best)?)?;
    write_json(
        &dir.join("histogram.json"),
        &stamped(cfg, json!({ "histogram": out.confirmed_histogram, "ranked": out.confirmed_histogram.top(20) }))?,
    )?;
    println!(
        "best round {} score {:.4} (confirmed {:.4}, normalized {:.4}) over {} trials",
        out.best.round,
        out.best.score,
        out.confirmed.score,
        out.normalized_score,
        out.log.len()
    );
    for (bits, count) in out.confirmed_histogram.top(3) {
        println!("  {bits} {count}");
    }
    Ok(())
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("`{t}` is not a number")))
        })
        .collect()
}

pub fn sweep(cfg: &RunConfig, register: &Path, omegas: &str, deltas: &str, times: &str) -> Result<()> {
    let emb = read_register(register)?;
    let cells = qaa_sweep(
        &emb,
        &cfg.device,
        cfg.family,
        &parse_list(omegas)?,
        &parse_list(deltas)?,
        &parse_list(times)?,
        &settings(cfg),
    )?;
    let mut buf = csv_header(cfg).into_bytes();
    write_sweep_csv(&mut buf, &cells)?;
    std::fs::write(out_dir(cfg)?.join("sweep.csv"), buf)?;
    let feasible = cells.iter().filter(|c| !c.success_prob.is_nan()).count();
    println!("{} cells, {} feasible", cells.len(), feasible);
    Ok(())
}

pub fn dataset(cfg: &RunConfig) -> Result<()> {
    let regs = generate_dataset(&cfg.device)?;
    let (records, excluded) = label_dataset(&regs, &cfg.device, cfg.dataset_rounds, &settings(cfg))?;
    write_dataset(&out_dir(cfg)?.join("dataset.jsonl"), &records, &cfg.meta())?;
    println!(
        "{} registers labelled with {} rounds, {} excluded",
        records.len(),
        cfg.dataset_rounds,
        excluded
    );
    Ok(())
}

pub fn benchmark(cfg: &RunConfig) -> Result<()> {
    let regs = generate_dataset(&cfg.device)?;
    let mut rounds = cfg.benchmark_rounds.clone();
    rounds.sort_unstable();
    rounds.dedup();
    let max_rounds = *rounds.last().expect("validated non-empty");
    let mut rows = csv_header(cfg);
    rows.push_str("graph,shape,nodes,spacing,rounds,normalized_score\n");
    let mut by_nodes: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let mut by_spacing: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for (i, reg) in regs.iter().enumerate() {
        let emb = reg.embedding(&cfg.device)?;
        let s = RunSettings {
            seed: qdock::rng::derive_seed(cfg.seed, "benchmark", i as u64),
            ..settings(cfg)
        };
        let scores = benchmark_register(cfg, &emb, &s, &rounds, max_rounds)?;
        for (&r, &score) in rounds.iter().zip(&scores) {
            rows.push_str(&format!(
                "{},{},{},{},{},{}\n",
                reg.id(),
                reg.shape.kind.name(),
                reg.register.len(),
                reg.shape.spacing,
                r,
                score
            ));
            by_nodes.entry((reg.register.len(), r)).or_default().push(score);
            by_spacing.entry((format!("{}", reg.shape.spacing), r)).or_default().push(score);
        }
        log::info!("benchmark {}/{} {}", i + 1, regs.len(), reg.id());
    }
    let dir = out_dir(cfg)?;
    std::fs::write(dir.join("benchmark.csv"), rows)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut nodes = csv_header(cfg) + "nodes,rounds,mean_normalized_score,graphs\n";
    for ((n, r), v) in &by_nodes {
        nodes.push_str(&format!("{n},{r},{},{}\n", mean(v), v.len()));
    }
    std::fs::write(dir.join("benchmark_by_nodes.csv"), nodes)?;
    let mut spacing = csv_header(cfg) + "spacing,rounds,mean_normalized_score,graphs\n";
    for ((s, r), v) in &by_spacing {
        spacing.push_str(&format!("{s},{r},{},{}\n", mean(v), v.len()));
    }
    std::fs::write(dir.join("benchmark_by_spacing.csv"), spacing)?;
    for &r in &rounds {
        let all: Vec<f64> = by_nodes
            .iter()
            .filter(|((_, rr), _)| *rr == r)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        println!("rounds {r:>4}: mean normalized score {:.4}", mean(&all));
    }
    Ok(())
}

/// Confirmed normalized score after each budget in `rounds`. TPE budgets are
/// prefixes of one run; Nelder-Mead runs once per budget.
fn benchmark_register(
    cfg: &RunConfig,
    emb: &Embedding,
    s: &RunSettings,
    rounds: &[usize],
    max_rounds: usize,
) -> Result<Vec<f64>> {
    match cfg.optimizer {
        OptimizerKind::Tpe => {
            let vcfg = VqaaConfig {
                second_pass: false,
                ..vqaa_config(cfg, max_rounds)
            };
            let space = cfg.apply_search(search_space(emb, &cfg.device, &vcfg)?)?;
            let out = vqaa_in(emb, &cfg.device, &vcfg, s, &[], space.clone())?;
            let eval = Evaluator::new(emb, &cfg.device, space, *s)?;
            rounds
                .iter()
                .map(|&r| {
                    let (_, b) = prefix_outcome(&eval, &out.log, r, cfg.confirm_factor)?;
                    qdock::optimize::normalize(b.score, &emb.origin)
                })
                .collect()
        }
        OptimizerKind::NelderMead => rounds
            .iter()
            .map(|&r| {
                let vcfg = vqaa_config(cfg, r);
                let space = cfg.apply_search(search_space(emb, &cfg.device, &vcfg)?)?;
                Ok(vqaa_in(emb, &cfg.device, &vcfg, s, &[], space)?.normalized_score)
            })
            .collect(),
    }
}

fn split(cfg: &RunConfig, records: Vec<DatasetRecord>) -> (Vec<DatasetRecord>, Vec<DatasetRecord>) {
    let (train, test) = train_test_split(records.len(), cfg.seed);
    let pick = |ix: &[usize]| ix.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    (pick(&train), pick(&test))
}

pub fn train(cfg: &RunConfig, dataset: &Path, models_dir: Option<&Path>) -> Result<()> {
    let (train, test) = split(cfg, read_dataset(dataset)?);
    let train_p = prepare(&train, &cfg.device)?;
    let test_p = prepare(&test, &cfg.device)?;
    let (mut models, reports) = train_models(&train_p, &cfg.train_config())?;
    for m in &mut models.models {
        m.meta = Some(cfg.meta());
    }
    let dir = out_dir(cfg)?;
    let models_dir = models_dir.map_or_else(|| dir.join("models"), Path::to_path_buf);
    models.write_dir(&models_dir)?;
    let held = evaluate_mape(&models, &test_p, &cfg.device)?;
    let fit = evaluate_mape(&models, &train_p, &cfg.device)?;
    let mut table = BTreeMap::new();
    for ((t, h), (_, f)) in held.iter().zip(&fit) {
        println!("{:>7}: held-out MAPE {:6.1}%  train MAPE {:6.1}%", t.name(), h.percent, f.percent);
        table.insert(t.name(), json!({ "held_out": h, "train": f }));
    }
    let curves: BTreeMap<&str, _> = Target::ALL
        .iter()
        .zip(&reports)
        .map(|(t, r)| (t.name(), json!({ "best_epoch": r.best_epoch, "history": r.history })))
        .collect();
    let report = json!({
        "mape": table,
        "train_ids": train.iter().map(|r| &r.id).collect::<Vec<_>>(),
        "held_out_ids": test.iter().map(|r| &r.id).collect::<Vec<_>>(),
        "training": curves,
    });
    write_json(&dir.join("mape.json"), &stamped(cfg, report)?)?;
    Ok(())
}

pub fn predict(cfg: &RunConfig, models_dir: &Path, register: &Path) -> Result<()> {
    let models = ModelSet::read_dir(models_dir)?;
    let emb = read_register(register)?;
    let p = predict_params(&models, &emb, &cfg.device)?;
    let run = mlqaa_run(&models, &emb, &cfg.device, &settings(cfg))?;
    write_json(
        &out_dir(cfg)?.join("prediction.json"),
        &stamped(cfg, json!({ "params": p, "score": run.score, "normalized_score": run.normalized_score }))?,
    )?;
    println!(
        "omega {:.4} delta0 {:.4} deltaf {:.4} t_rise {:.1} t_fall {:.1}; normalized score {:.4}",
        p.omega, p.delta0, p.deltaf, p.t_rise, p.t_fall, run.normalized_score
    );
    Ok(())
}

pub fn mlqaa_eval(cfg: &RunConfig, models_dir: &Path, dataset: &Path) -> Result<()> {
    let models = ModelSet::read_dir(models_dir)?;
    let (_, test) = split(cfg, read_dataset(dataset)?);
    let rows = compare_with_vqaa(&models, &test, &cfg.device, &settings(cfg), cfg.baseline_rounds)?;
    let mut csv = csv_header(cfg);
    csv.push_str(&format!(
        "graph,nodes,mlqaa_normalized_score,vqaa{}_normalized_score\n",
        cfg.baseline_rounds
    ));
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.id, r.nodes, r.mlqaa.normalized_score, r.vqaa_normalized_score
        ));
    }
    let dir = out_dir(cfg)?;
    std::fs::write(dir.join("mlqaa_eval.csv"), csv)?;
    let n = rows.len().max(1) as f64;
    let ml = rows.iter().map(|r| r.mlqaa.normalized_score).sum::<f64>() / n;
    let vq = rows.iter().map(|r| r.vqaa_normalized_score).sum::<f64>() / n;
    write_json(
        &dir.join("mlqaa_eval.json"),
        &stamped(
            cfg,
            json!({ "graphs": rows.len(), "mlqaa_mean": ml, "vqaa_mean": vq, "vqaa_rounds": cfg.baseline_rounds, "rows": rows }),
        )?,
    )?;
    println!(
        "{} held-out graphs: MLQAA mean {:.4}, VQAA-{} mean {:.4}",
        rows.len(),
        ml,
        cfg.baseline_rounds,
        vq
    );
    Ok(())
}

