use std::path::{Path, PathBuf};

use bws_core::algebra::Pseudopolynomial;
use bws_core::chebyshev::{sample_function, scalar_bws_rate};
use bws_core::converse::{converse_experiment, ConverseVerdict};
use bws_core::demos::{closure_failure_demo, counterexample_rates};
use bws_core::extremal::{continuity_probe, siciak_phi};
use bws_core::forward::{forward_rate_experiment_with_tol, sample_coefficients};
use bws_core::sets::{delta_k, Multigraph};
use bws_core::Complex;
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};
use crate::output::{Cell, Table};
use crate::CliError;

/// Everything one command produces before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    pub rates: Table,
    pub plot: Table,
    pub invariants: Vec<(String, bool)>,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.invariants.iter().all(|(_, ok)| *ok)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn plot_table() -> Table {
    Table::new(["series", "x", "log10_value"])
}

/// Runs the configured command. Relative input paths resolve against `base_dir`.
pub fn execute(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match cfg.command {
        Command::Forward => forward(cfg),
        Command::Converse => converse(cfg, base_dir),
        Command::ScalarBws => scalar(cfg),
        Command::Counterexample => counterexample(cfg),
        Command::ClosureDemo => closure(cfg),
        Command::Extremal => extremal(cfg),
    }
}

fn forward(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let k = cfg.require_k()?.sample()?;
    let f = cfg.f.as_ref().expect("validated");
    let ds = cfg.degrees()?;
    info!("forward: {} samples, degrees {:?}", k.len(), ds);
    let e = forward_rate_experiment_with_tol(f, &k, &ds, cfg.tolerances.root)?;

    let n = e.n;
    let mut rates = Table::new(
        ["d", "delta", "graph_dh"]
            .into_iter()
            .map(String::from)
            .chain((1..=n).map(|j| format!("coeff_err_{j}")))
            .chain(["hoelder_ratio", "deg_bound", "flagged"].map(String::from)),
    );
    let mut plot = plot_table();
    for r in &e.records {
        let mut row: Vec<Cell> = vec![r.d.into(), r.delta.into(), r.graph_dh.into()];
        row.extend(r.coeff_errors.iter().map(|&x| Cell::from(x)));
        row.extend([r.hoelder_worst_ratio.into(), r.deg_bound.into(), r.flagged.into()]);
        rates.push(row);
        plot.push_log("delta", r.d, r.delta);
        plot.push_log("graph_dh", r.d, r.graph_dh);
        for (j, &c) in r.coeff_errors.iter().enumerate() {
            plot.push_log(&format!("coeff_{}", j + 1), r.d, c);
        }
    }
    let inv = &e.invariants;
    let mut invariants = vec![
        ("deg_bound".to_string(), inv.deg_bound),
        ("graph_below_delta".to_string(), inv.graph_below_delta),
        ("hoelder".to_string(), inv.hoelder),
    ];
    // an inconclusive fit has no rate to compare, which is not a violation
    invariants.extend(inv.rate_chain.map(|b| ("rate_chain".to_string(), b)));
    invariants.extend(inv.graph_rate.map(|b| ("graph_rate".to_string(), b)));
    Ok(Outcome {
        result: to_value(&e),
        rates,
        plot,
        invariants,
    })
}

fn load_multigraph(base: &Path, p: &Path) -> Result<Multigraph, CliError> {
    let path: PathBuf = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        field: format!("inputs ({})", path.display()),
        message: e.to_string(),
    })
}

fn converse(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Outcome, CliError> {
    // with a known pseudopolynomial the coefficients can also be checked against the truth
    let (y, w, n, delta, truth): (Multigraph, Vec<(u32, Multigraph)>, usize, Vec<f64>, Option<(Pseudopolynomial, _)>) =
        match &cfg.inputs {
            Some(inputs) => {
                let y = load_multigraph(base_dir, &inputs.y)?;
                let w = inputs
                    .w
                    .iter()
                    .map(|df| Ok((df.d, load_multigraph(base_dir, &df.path)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                let delta = w
                    .iter()
                    .map(|(_, wd)| delta_k(&y, wd).map(|r| r.delta))
                    .collect::<Result<Vec<_>, _>>()?;
                (y, w, cfg.n.expect("validated"), delta, None)
            }
            None => {
                let k = cfg.require_k()?.sample()?;
                let f = cfg.f.as_ref().expect("validated");
                let ds = cfg.degrees()?;
                let e = forward_rate_experiment_with_tol(f, &k, &ds, cfg.tolerances.root)?;
                let delta = e.records.iter().map(|r| r.delta).collect();
                let w = e.d_range.iter().copied().zip(e.v_k).collect();
                (e.x_k, w, f.degree(), delta, Some((f.clone(), k)))
            }
        };
    if let Some(expected) = cfg.n {
        if expected != n {
            return Err(CliError::Config {
                field: "n".into(),
                message: format!("{expected} does not match the fiber degree {n}"),
            });
        }
    }
    let r = converse_experiment(&y, &w, n, &delta, cfg.x0)?;

    let mut rates = Table::new(
        ["d", "delta", "matching_radius"]
            .into_iter()
            .map(String::from)
            .chain((1..=n).map(|j| format!("coeff_err_{j}")))
            .chain(["lemma_ok".to_string()]),
    );
    let mut plot = plot_table();
    for rec in &r.records {
        let mut row: Vec<Cell> = vec![rec.d.into(), rec.delta.into(), rec.matching_radius.into()];
        row.extend(rec.coeff_sup_errors.iter().map(|&x| Cell::from(x)));
        row.push(rec.lemma_ok.into());
        rates.push(row);
        plot.push_log("delta", rec.d, rec.delta);
        for (j, &c) in rec.coeff_sup_errors.iter().enumerate() {
            plot.push_log(&format!("coeff_{}", j + 1), rec.d, c);
        }
    }
    let mut result = to_value(&r);
    if let Some((f, k)) = truth {
        let exact = sample_coefficients(&f, &k)?;
        let errors: Vec<f64> = exact
            .iter()
            .zip(&r.reconstructed_samples)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            .collect();
        result["truth_errors"] = json!(errors);
    }
    let invariants = vec![
        (
            "holomorphic_witness".to_string(),
            r.verdict == ConverseVerdict::HolomorphicWitness,
        ),
        ("lemma_bound".to_string(), r.records.iter().all(|x| x.lemma_ok)),
        ("coeff_rate_envelope".to_string(), r.coeff_rate_envelope),
    ];
    Ok(Outcome {
        result,
        rates,
        plot,
        invariants,
    })
}

fn scalar(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let k = cfg.require_k()?.sample()?;
    let g = cfg.g.as_ref().expect("validated");
    let values = sample_function(&k, g)?;
    let rate = scalar_bws_rate(&k, &values, &cfg.degrees()?)?;
    let mut rates = Table::new(["d", "error"]);
    let mut plot = plot_table();
    for &(d, err) in &rate.errors {
        rates.push(vec![d.into(), err.into()]);
        plot.push_log("error", d, err);
    }
    let invariants = cfg
        .expect
        .map(|v| ("expected_verdict".to_string(), rate.fit.verdict == v))
        .into_iter()
        .collect();
    Ok(Outcome {
        result: to_value(&rate),
        rates,
        plot,
        invariants,
    })
}

fn counterexample(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let t = counterexample_rates(cfg.k_max.expect("validated"), cfg.mesh_value()?)?;
    let mut rates = Table::new(["k", "sup_norm", "sampled_sup", "graph_dh", "c_est", "c_target"]);
    let mut plot = plot_table();
    for r in &t.rows {
        rates.push(vec![
            r.k.into(),
            r.sup_norm.into(),
            r.sampled_sup.into(),
            r.graph_dh.into(),
            r.c_est.into(),
            r.c_target.into(),
        ]);
        plot.push_log("sup_norm", r.k, r.sup_norm);
        plot.push_log("graph_dh", r.k, r.graph_dh);
        plot.push_log("c_est", r.k, r.c_est);
    }
    let probe: Vec<_> = t.rows.iter().filter(|r| r.k >= 3).collect();
    let c_grows = probe.len() < 2 || probe.last().unwrap().c_est > probe[0].c_est;
    let invariants = vec![
        ("sup_norm_exact".to_string(), t.rows.iter().all(|r| r.sup_exact)),
        ("graph_dh_bound".to_string(), t.rows.iter().all(|r| r.dh_bound)),
        ("graph_dh_geometric".to_string(), t.fit_graph.is_geometric()),
        ("sup_norm_not_geometric".to_string(), !t.fit_sup.is_geometric()),
        ("c_est_grows".to_string(), c_grows),
    ];
    let mut result = to_value(&t);
    result["probe_matches_target"] = json!(t.rows.iter().map(|r| (r.k, r.probe_matches())).collect::<Vec<_>>());
    Ok(Outcome {
        result,
        rates,
        plot,
        invariants,
    })
}

fn closure(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let nu = cfg.nu.as_ref().expect("validated");
    let ambient = cfg.ambient.as_ref().expect("validated");
    let r = closure_failure_demo(nu, ambient, cfg.mesh_value()?, cfg.tolerances.kuratowski)?;
    let mut rates = Table::new(["nu", "lower_gap", "witness_gap"]);
    for ((&nu, &lo), &wg) in r.nu.iter().zip(&r.kuratowski.lower_gaps).zip(&r.kuratowski.witness_gaps) {
        rates.push(vec![nu.into(), lo.into(), wg.into()]);
    }
    let mut plot = plot_table();
    for (&h, &c) in r.heights.iter().zip(&r.limit_fiber_counts) {
        plot.push_log("limit_fiber_count", h, c as f64);
    }
    let invariants = vec![
        ("cond1".to_string(), r.kuratowski.cond1),
        ("cond2".to_string(), r.kuratowski.cond2),
        ("fibers_grow".to_string(), r.fibers_grow),
    ];
    Ok(Outcome {
        result: to_value(&r),
        rates,
        plot,
        invariants,
    })
}

fn extremal(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let spec = cfg.require_k()?;
    let k = spec.sample()?;
    let on_k = k
        .points()
        .iter()
        .map(|p| siciak_phi(&spec.shape, p).map(|v| (v - 1.0).abs()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let m = spec.shape.dim();
    let mut rates = Table::new(
        ["index".to_string()]
            .into_iter()
            .chain((0..m).flat_map(|i| [format!("re_{i}"), format!("im_{i}")]))
            .chain(["phi".to_string()]),
    );
    let mut plot = plot_table();
    let mut values = Vec::new();
    for (i, p) in cfg.points.iter().flatten().enumerate() {
        let z: Vec<Complex> = p.iter().map(|&[re, im]| Complex::new(re, im)).collect();
        let phi = siciak_phi(&spec.shape, &z).map_err(|e| CliError::Config {
            field: format!("points[{i}]"),
            message: e.to_string(),
        })?;
        let mut row: Vec<Cell> = vec![i.into()];
        row.extend(p.iter().flat_map(|&[re, im]| [Cell::from(re), Cell::from(im)]));
        row.push(phi.into());
        rates.push(row);
        plot.push_log("phi", i, phi);
        values.push(phi);
    }
    let modulus = continuity_probe(&spec.shape, &k, 4.0 * k.mesh().max(f64::MIN_POSITIVE))?;
    let invariants = vec![
        ("phi_one_on_k".to_string(), on_k <= 1e-10),
        ("phi_at_least_one".to_string(), values.iter().all(|&v| v >= 1.0)),
    ];
    Ok(Outcome {
        result: json!({
            "shape": spec.shape,
            "max_deviation_on_k": on_k,
            "values": values,
            "continuity_modulus": modulus,
        }),
        rates,
        plot,
        invariants,
    })
}
