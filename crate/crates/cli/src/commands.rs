//! Implementations of the four subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use ensconv_core::bootstrap::{
    bootstrap_replicates, centered_quantiles, extrapolate_sigma, min_trees_for_tolerance,
    sigma_from_iqr, sigma_hat, BootstrapConfig,
};
use ensconv_core::ensemble::{
    classwise_error_rate, error_rate_holdout, error_rate_oob, ErrorMode,
};
use ensconv_core::firstorder::{
    clt_variance_binary, err_infinity, exact_err_prefix_curve_binary, exact_err_t_binary,
    ground_truth_errors, ground_truth_sigma, ground_truth_sigma_curve, normality_diagnostics,
    FirstOrderEnsemble, FirstOrderModel,
};
use ensconv_core::formats;
use ensconv_core::rng;
use ensconv_core::trainer::{predict_array, train_ensemble, Dataset, TreeParams};
use ensconv_core::Label;
use rand::Rng;

use crate::manifest::{sha256_hex, RunManifest};
use crate::{CliError, EstimateArgs, ExtrapolateArgs, Mode, SimulateArgs, SimulateCommand, TrainArgs};

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let json = formats::to_json_17sig(value).map_err(CliError::from)?;
    write_file(path, &(json + "\n"))
}

/// `report.json` -> `report.manifest.json`; extensionless paths gain the
/// suffix directly.
fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ExtrapolationTarget {
    t: usize,
    sigma: f64,
}

#[derive(Serialize)]
struct ExtrapolationSection {
    t0: usize,
    targets: Vec<ExtrapolationTarget>,
}

#[derive(Serialize)]
struct EstimateReport {
    t: usize,
    m: usize,
    k: u32,
    mode: String,
    #[serde(rename = "B")]
    b: usize,
    seed: u64,
    sigma_hat: f64,
    sigma_iqr: Option<f64>,
    replicates: Vec<f64>,
    centered_quantiles: serde_json::Map<String, serde_json::Value>,
    err_hat: f64,
    three_sigma: f64,
    extrapolation: ExtrapolationSection,
}

pub fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let array = formats::parse_prediction_array(&read_file(&args.predictions)?)?;
    let truth = formats::parse_truth(&read_file(&args.truth)?)?;
    let mode = match args.mode {
        Mode::Holdout => ErrorMode::Holdout,
        Mode::Oob => ErrorMode::Oob,
    };
    let mask = match (&args.mask, mode) {
        (None, ErrorMode::Oob) => {
            return Err(CliError::usage("--mode oob requires --mask"));
        }
        (Some(path), _) => Some(formats::parse_mask(&read_file(path)?)?),
        (None, ErrorMode::Holdout) => None,
    };

    let probs: Vec<f64> = args
        .quantiles
        .iter()
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("invalid quantile probability `{tok}`")))
        })
        .collect::<Result<_, _>>()?;

    let mut config = BootstrapConfig::new(args.b, args.seed, mode);
    config.target_class = args.class.map(Label);
    let replicates = bootstrap_replicates(&array, &truth, mask.as_ref(), &config)?;
    let sigma = sigma_hat(&replicates)?;
    let sigma_iqr = if args.b >= 4 {
        Some(sigma_from_iqr(&replicates)?)
    } else {
        None
    };

    let err_hat = match args.class {
        Some(c) => classwise_error_rate(&array, &truth, Label(c), mode, mask.as_ref())?,
        None => match mode {
            ErrorMode::Holdout => error_rate_holdout(&array, &truth)?,
            ErrorMode::Oob => error_rate_oob(&array, &truth, mask.as_ref().unwrap())?,
        },
    };

    let q_values = centered_quantiles(&replicates, &probs)?;
    let mut q_map = serde_json::Map::new();
    for (tok, v) in args.quantiles.iter().zip(q_values) {
        q_map.insert(tok.trim().to_string(), json!(v));
    }

    let mut targets = Vec::with_capacity(args.targets.len());
    for &t in &args.targets {
        targets.push(ExtrapolationTarget {
            t,
            sigma: extrapolate_sigma(sigma, array.t(), t)?,
        });
    }

    let report = EstimateReport {
        t: array.t(),
        m: array.m(),
        k: array.k(),
        mode: match mode {
            ErrorMode::Holdout => "holdout".into(),
            ErrorMode::Oob => "oob".into(),
        },
        b: args.b,
        seed: args.seed,
        sigma_hat: sigma,
        sigma_iqr,
        replicates,
        centered_quantiles: q_map,
        err_hat,
        three_sigma: 3.0 * sigma,
        extrapolation: ExtrapolationSection {
            t0: array.t(),
            targets,
        },
    };
    write_json(&args.out, &report)?;

    let mut manifest = RunManifest::new(
        "estimate",
        Some(args.seed),
        json!({
            "predictions": args.predictions.display().to_string(),
            "truth": args.truth.display().to_string(),
            "mask": args.mask.as_ref().map(|p| p.display().to_string()),
            "mode": report.mode,
            "B": args.b,
            "class": args.class,
            "quantiles": args.quantiles,
            "targets": args.targets,
            "out": args.out.display().to_string(),
        }),
    );
    manifest.add_input(&args.predictions)?;
    manifest.add_input(&args.truth)?;
    if let Some(path) = &args.mask {
        manifest.add_input(path)?;
    }
    manifest.write(&manifest_path(&args.out))
}

// ---------------------------------------------------------------------------
// extrapolate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ExtrapolateReport {
    sigma0: f64,
    t0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_trees: Option<u64>,
}

pub fn extrapolate(args: &ExtrapolateArgs) -> Result<(), CliError> {
    let mut report = ExtrapolateReport {
        sigma0: args.sigma0,
        t0: args.t0,
        t: None,
        sigma: None,
        eps: None,
        min_trees: None,
    };
    match (args.t, args.eps) {
        (None, None) => {
            return Err(CliError::usage("provide --t (target size) or --eps (tolerance)"));
        }
        (Some(t), None) => {
            report.t = Some(t);
            report.sigma = Some(extrapolate_sigma(args.sigma0, args.t0, t)?);
        }
        (None, Some(eps)) => {
            report.eps = Some(eps);
            report.min_trees = Some(min_trees_for_tolerance(args.sigma0, args.t0, eps)?);
        }
        (Some(_), Some(_)) => {
            return Err(CliError::usage("--t and --eps are mutually exclusive"));
        }
    }
    match &args.out {
        Some(out) => {
            write_json(out, &report)?;
            let manifest = RunManifest::new(
                "extrapolate",
                None,
                json!({
                    "sigma0": args.sigma0,
                    "t0": args.t0,
                    "t": args.t,
                    "eps": args.eps,
                    "out": out.display().to_string(),
                }),
            );
            manifest.write(&manifest_path(out))
        }
        None => {
            let json = formats::to_json_17sig(&report).map_err(CliError::from)?;
            println!("{json}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

fn dataset_points(data: &Dataset) -> Vec<Vec<f64>> {
    (0..data.n()).map(|i| data.row(i).to_vec()).collect()
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&args.holdout_frac) {
        return Err(CliError::usage(format!(
            "--holdout-frac must lie in [0, 1), got {}",
            args.holdout_frac
        )));
    }
    let data = formats::parse_dataset_csv(&read_file(&args.data)?)?;
    let (train_set, holdout_set) = if args.holdout_frac > 0.0 {
        let (tr, ho) = data.split_holdout(args.holdout_frac)?;
        (tr, Some(ho))
    } else {
        (data, None)
    };

    let params = TreeParams {
        max_depth: args.depth,
        min_leaf: 1,
        mtry: args.mtry,
    };
    let (ensemble, mask) = train_ensemble(&train_set, args.trees, &params, args.seed)?;

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let out = |name: &str| args.out_dir.join(name);

    let oob_array = predict_array(&ensemble, &dataset_points(&train_set))?;
    write_file(&out("oob_predictions.txt"), &formats::write_prediction_array(&oob_array))?;
    write_file(&out("oob_mask.txt"), &formats::write_mask(&mask))?;
    write_file(&out("oob_truth.txt"), &formats::write_truth(&train_set.truth()))?;

    if let Some(holdout) = &holdout_set {
        let ho_array = predict_array(&ensemble, &dataset_points(holdout))?;
        write_file(
            &out("holdout_predictions.txt"),
            &formats::write_prediction_array(&ho_array),
        )?;
        write_file(&out("holdout_truth.txt"), &formats::write_truth(&holdout.truth()))?;
    }

    let bag_hashes: Vec<String> = ensemble
        .bags
        .iter()
        .map(|bag| {
            let text: Vec<String> = bag.iter().map(|i| i.to_string()).collect();
            sha256_hex(text.join(" ").as_bytes())
        })
        .collect();
    let resolved_mtry = args
        .mtry
        .unwrap_or_else(|| (train_set.p() as f64).sqrt().ceil() as usize);
    write_json(
        &out("metadata.json"),
        &json!({
            "seed": args.seed,
            "trees": args.trees,
            "depth": args.depth,
            "mtry": resolved_mtry,
            "k": train_set.k(),
            "p": train_set.p(),
            "n_train": train_set.n(),
            "n_holdout": holdout_set.as_ref().map_or(0, |h| h.n()),
            "bag_sha256": bag_hashes,
        }),
    )?;

    let mut manifest = RunManifest::new(
        "train",
        Some(args.seed),
        json!({
            "data": args.data.display().to_string(),
            "trees": args.trees,
            "depth": args.depth,
            "mtry": args.mtry,
            "holdout_frac": args.holdout_frac,
            "out_dir": args.out_dir.display().to_string(),
        }),
    );
    manifest.add_input(&args.data)?;
    manifest.write(&out("manifest.json"))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn float_cell(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    write_file(path, &text)
}

fn check_runs_and_t(t: usize, n_runs: usize) -> Result<(), CliError> {
    if t == 0 {
        return Err(CliError::usage("--t must be >= 1"));
    }
    if n_runs < 2 {
        return Err(CliError::usage("--n-runs must be >= 2"));
    }
    Ok(())
}

fn simulate_paths(
    model: &FirstOrderModel,
    out_dir: &Path,
    seed: u64,
    t: usize,
    n_runs: usize,
) -> Result<serde_json::Value, CliError> {
    check_runs_and_t(t, n_runs)?;
    let mut rows = Vec::with_capacity(t * n_runs);
    let mut final_errs = Vec::with_capacity(n_runs);
    for run in 0..n_runs {
        let mut rng = rng::substream(seed, run as u64);
        let ensemble = FirstOrderEnsemble::sample(t, &mut rng)?;
        let curve = exact_err_prefix_curve_binary(model, &ensemble)?;
        final_errs.push(curve[t - 1]);
        for (s, err) in curve.iter().enumerate() {
            rows.push(format!("{run},{},{}", s + 1, float_cell(*err)));
        }
    }
    write_csv(&out_dir.join("paths.csv"), "run,t,err_t", &rows)?;
    Ok(json!({
        "t": t,
        "n_runs": n_runs,
        "err_infinity": err_infinity(model)?,
        "sigma_at_t": sigma_hat(&final_errs)?,
    }))
}

fn simulate_sigma(
    model: &FirstOrderModel,
    out_dir: &Path,
    seed: u64,
    t: usize,
    n_runs: usize,
    equal_run_seeds: bool,
) -> Result<serde_json::Value, CliError> {
    check_runs_and_t(t, n_runs)?;
    let curve = if equal_run_seeds {
        // every run reuses the substream of (seed, 0): the runs coincide and
        // the spread collapses to zero at every size
        let mut rng = rng::substream(seed, 0);
        let ensemble = FirstOrderEnsemble::sample(t, &mut rng)?;
        let path = exact_err_prefix_curve_binary(model, &ensemble)?;
        let paths = vec![path; n_runs];
        (0..t)
            .map(|s| {
                let vals: Vec<f64> = paths.iter().map(|c| c[s]).collect();
                sigma_hat(&vals).expect("n_runs >= 2")
            })
            .collect::<Vec<f64>>()
    } else {
        ground_truth_sigma_curve(model, t, n_runs, seed)?
    };
    let rows: Vec<String> = curve
        .iter()
        .enumerate()
        .map(|(s, sig)| format!("{},{}", s + 1, float_cell(*sig)))
        .collect();
    write_csv(&out_dir.join("sigma_curve.csv"), "t,sigma", &rows)?;
    Ok(json!({
        "t": t,
        "n_runs": n_runs,
        "equal_run_seeds": equal_run_seeds,
        "err_infinity": err_infinity(model)?,
        "sigma_curve": curve,
    }))
}

fn simulate_clt(
    model: &FirstOrderModel,
    out_dir: &Path,
    seed: u64,
    t: usize,
    n_runs: usize,
) -> Result<serde_json::Value, CliError> {
    check_runs_and_t(t, n_runs)?;
    let errs = ground_truth_errors(model, t, n_runs, seed)?;
    let err_inf = err_infinity(model)?;
    let values: Vec<f64> = errs
        .iter()
        .map(|e| (t as f64).sqrt() * (e - err_inf))
        .collect();
    let rows: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(run, v)| format!("{run},{}", float_cell(*v)))
        .collect();
    write_csv(&out_dir.join("clt_values.csv"), "run,scaled_fluctuation", &rows)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let sample_var =
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    let d = normality_diagnostics(&values)?;
    Ok(json!({
        "t": t,
        "n_runs": n_runs,
        "err_infinity": err_inf,
        "asymptotic_variance": clt_variance_binary(model)?,
        "sample_variance": sample_var,
        "diagnostics": {
            "ks_stat": d.ks_stat,
            "skewness": d.skewness,
            "excess_kurtosis": d.excess_kurtosis,
        },
    }))
}

fn simulate_bootstrap_check(
    model: &FirstOrderModel,
    out_dir: &Path,
    seed: u64,
    t: usize,
    n_runs: usize,
    b: usize,
) -> Result<serde_json::Value, CliError> {
    check_runs_and_t(t, n_runs)?;
    if b < 2 {
        return Err(CliError::usage("--B must be >= 2"));
    }
    let mut sigmas = Vec::with_capacity(n_runs);
    for run in 0..n_runs {
        let mut rng = rng::substream(seed, run as u64);
        let draws: Vec<f64> = (0..t).map(|_| rng.random::<f64>()).collect();
        let mut reps = Vec::with_capacity(b);
        for _ in 0..b {
            let resampled: Vec<f64> = (0..t).map(|_| draws[rng.random_range(0..t)]).collect();
            let ensemble = FirstOrderEnsemble::new(resampled)?;
            reps.push(exact_err_t_binary(model, &ensemble)?);
        }
        sigmas.push(sigma_hat(&reps)?);
    }
    let rows: Vec<String> = sigmas
        .iter()
        .enumerate()
        .map(|(run, s)| format!("{run},{}", float_cell(*s)))
        .collect();
    write_csv(&out_dir.join("bootstrap_sigmas.csv"), "run,sigma_hat", &rows)?;
    let mean_sigma = sigmas.iter().sum::<f64>() / sigmas.len() as f64;
    // same seed as the runs: truth run r re-derives the substream of
    // (seed, r), so it sees the identical base ensembles and differs only by
    // skipping the resampling noise
    let truth = ground_truth_sigma(model, t, n_runs, seed)?;
    Ok(json!({
        "t": t,
        "n_runs": n_runs,
        "B": b,
        "mean_bootstrap_sigma": mean_sigma,
        "ground_truth_sigma": truth,
        "relative_error": if truth > 0.0 { (mean_sigma - truth).abs() / truth } else { f64::NAN },
    }))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let model = formats::parse_model_spec(&read_file(&args.model)?)?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", args.out_dir.display())))?;

    let (name, params, summary) = match &args.what {
        SimulateCommand::Paths { t, n_runs } => (
            "paths",
            json!({"t": t, "n_runs": n_runs}),
            simulate_paths(&model, &args.out_dir, args.seed, *t, *n_runs)?,
        ),
        SimulateCommand::Sigma { t, n_runs, equal_run_seeds } => (
            "sigma",
            json!({"t": t, "n_runs": n_runs, "equal_run_seeds": equal_run_seeds}),
            simulate_sigma(&model, &args.out_dir, args.seed, *t, *n_runs, *equal_run_seeds)?,
        ),
        SimulateCommand::Clt { t, n_runs } => (
            "clt",
            json!({"t": t, "n_runs": n_runs}),
            simulate_clt(&model, &args.out_dir, args.seed, *t, *n_runs)?,
        ),
        SimulateCommand::BootstrapCheck { t, n_runs, b } => (
            "bootstrap-check",
            json!({"t": t, "n_runs": n_runs, "B": b}),
            simulate_bootstrap_check(&model, &args.out_dir, args.seed, *t, *n_runs, *b)?,
        ),
    };
    write_json(&args.out_dir.join("summary.json"), &summary)?;

    let mut manifest = RunManifest::new(
        &format!("simulate {name}"),
        Some(args.seed),
        json!({
            "model": args.model.display().to_string(),
            "out_dir": args.out_dir.display().to_string(),
            "subcommand": params,
        }),
    );
    manifest.add_input(&args.model)?;
    manifest.write(&args.out_dir.join("manifest.json"))
}
