//! Single-shot subcommands: simulate, train, augment, fit, screen, report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crashgan_core::cgan::{synthesize, train_cgan_with, CganModel, TrainConfig};
use crashgan_core::data::Dataset;
use crashgan_core::evaluate::report::{cells_from_rows, rows_from_csv};
use crashgan_core::evaluate::{ExperimentReport, HotspotRanking};
use crashgan_core::simulate::{gen_dataset, gen_experiment_suite, SimConfig};
use crashgan_core::spf::{
    coefficient_significance, eb_estimate_with, fit_spf, EbWeighting, Formula, SpfModel,
};
use crashgan_core::{Error, Result};

use crate::config::Config;
use crate::{AugmentArgs, FitArgs, ReportArgs, ScreenArgs, SimulateArgs, TrainArgs};

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("not a number: {t:?}")))
        })
        .collect()
}

pub fn parse_name_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

/// Flag wins over config file wins over default.
fn resolve<T: std::str::FromStr + Clone>(
    flag: Option<T>,
    cfg: &Config,
    section: &str,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(cfg.get_parsed::<T>(section, key)?.unwrap_or(default))
}

pub fn write_manifest(
    dir: &Path,
    command: &str,
    resolved: &[(String, String)],
    files: &[String],
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "crashgan manifest");
    let _ = writeln!(out, "command: {command}");
    let epoch = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = writeln!(out, "created_unix: {epoch}");
    let _ = writeln!(out, "[resolved]");
    for (k, v) in resolved {
        let _ = writeln!(out, "{k} = {v}");
    }
    let _ = writeln!(out, "[files]");
    for f in files {
        let _ = writeln!(out, "{f}");
    }
    std::fs::write(dir.join("manifest.txt"), out)?;
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = load_config(&args.config)?;
    let dispersion = resolve(args.dispersion, &cfg, "simulate", "dispersion", 0.5)?;
    let size = resolve(args.size, &cfg, "simulate", "size", 100)?;
    let replications = resolve(args.replications, &cfg, "simulate", "replications", 1)?;
    let seed = resolve(args.seed, &cfg, "simulate", "seed", 0)?;
    let beta0 = resolve(args.beta0, &cfg, "simulate", "beta0", 0.5)?;
    let coefficients = match args
        .coefficients
        .as_deref()
        .or_else(|| cfg.get("simulate", "coefficients"))
    {
        Some(list) => parse_f64_list(list)?,
        None => vec![0.5, -0.5, 1.0, -1.0],
    };
    let config = SimConfig {
        beta0,
        coefficients,
        dispersion,
        sample_size: size,
        seed,
    };
    std::fs::create_dir_all(&args.out)?;
    let mut files = Vec::new();
    if args.suite {
        let suite = gen_experiment_suite(&config, replications, replications)?;
        suite.cgan_train.data.write_csv(&args.out.join("cgan_train.csv"))?;
        files.push("cgan_train.csv".to_string());
        for (i, d) in suite.ns_test.iter().enumerate() {
            let name = format!("ns_test_{i:03}.csv");
            d.data.write_csv(&args.out.join(&name))?;
            files.push(name);
        }
        for (i, d) in suite.prediction_test.iter().enumerate() {
            let name = format!("pred_test_{i:03}.csv");
            d.data.write_csv(&args.out.join(&name))?;
            files.push(name);
        }
    } else {
        for i in 0..replications {
            let mut one = config.clone();
            one.seed = crashgan_core::rng::derive_seed(seed, "dataset", i as u64);
            let sim = gen_dataset(&one)?;
            let name = format!("dataset_{i:03}.csv");
            sim.data.write_csv(&args.out.join(&name))?;
            files.push(name);
        }
    }
    let resolved = vec![
        ("dispersion".into(), format!("{dispersion}")),
        ("size".into(), format!("{size}")),
        ("replications".into(), format!("{replications}")),
        ("seed".into(), format!("{seed}")),
        ("beta0".into(), format!("{beta0}")),
        ("coefficients".into(), format!("{:?}", config.coefficients)),
        ("suite".into(), format!("{}", args.suite)),
    ];
    write_manifest(&args.out, "simulate", &resolved, &files)?;
    println!("wrote {} dataset file(s) to {}", files.len(), args.out.display());
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let cfg = load_config(&args.config)?;
    let train_config = TrainConfig {
        epochs: resolve(args.epochs, &cfg, "train", "epochs", 5000)?,
        batch_size: resolve(args.batch_size, &cfg, "train", "batch_size", 100)?,
        lr_g: resolve(args.lr_g, &cfg, "train", "lr_g", 0.001)?,
        lr_d: resolve(args.lr_d, &cfg, "train", "lr_d", 0.001)?,
        decay_g: resolve(args.decay_g, &cfg, "train", "decay_g", 0.001)?,
        decay_d: resolve(args.decay_d, &cfg, "train", "decay_d", 0.0)?,
        seed: resolve(args.seed, &cfg, "train", "seed", 0)?,
    };
    let data = Dataset::read_csv(&args.data)?;
    let log_names: Vec<String> = match args
        .log_features
        .as_deref()
        .or_else(|| cfg.get("train", "log_features"))
    {
        Some(list) => parse_name_list(list),
        None => Vec::new(),
    };
    for name in &log_names {
        if data.column_index(name).is_none() {
            return Err(Error::InvalidParameter(format!(
                "log feature {name:?} not in dataset"
            )));
        }
    }
    let log_flags: Vec<bool> = data
        .feature_names
        .iter()
        .map(|n| log_names.iter().any(|l| l == n))
        .collect();
    let model = train_cgan_with(&data, &train_config, &log_flags)?;
    std::fs::write(&args.out, model.to_text())?;
    let loss_path = args
        .loss_out
        .unwrap_or_else(|| args.out.with_extension("losses.csv"));
    let mut losses = String::from("epoch,loss_d,loss_g\n");
    for (i, e) in model.history.iter().enumerate() {
        let _ = writeln!(losses, "{i},{},{}", e.loss_d, e.loss_g);
    }
    std::fs::write(&loss_path, losses)?;
    println!(
        "trained {} epochs on {} rows; model at {}",
        train_config.epochs,
        data.len(),
        args.out.display()
    );
    println!(
        "resolved: epochs={} batch_size={} lr_g={} lr_d={} decay_g={} decay_d={} seed={} log_features={:?}",
        train_config.epochs,
        train_config.batch_size,
        train_config.lr_g,
        train_config.lr_d,
        train_config.decay_g,
        train_config.decay_d,
        train_config.seed,
        log_names
    );
    Ok(())
}

pub fn augment(args: AugmentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.model)?;
    let model = CganModel::from_text(&text)?;
    let synth = synthesize(&model, args.n, args.seed)?;
    synth.write_csv(&args.out)?;
    println!("wrote {} synthetic row(s) to {}", synth.len(), args.out.display());
    Ok(())
}

pub fn formula_from_flags(
    data: &Dataset,
    features: &Option<String>,
    log: &Option<String>,
) -> Result<Formula> {
    let names: Vec<String> = match features {
        Some(list) => parse_name_list(list),
        None => data.feature_names.clone(),
    };
    for name in &names {
        if data.column_index(name).is_none() {
            return Err(Error::InvalidParameter(format!(
                "feature {name:?} not in dataset"
            )));
        }
    }
    let log_names: Vec<String> = match log {
        Some(list) => parse_name_list(list),
        None => Vec::new(),
    };
    let flags: Vec<bool> = names
        .iter()
        .map(|n| log_names.iter().any(|l| l == n))
        .collect();
    Formula::new(names, flags)
}

pub fn fit(args: FitArgs) -> Result<()> {
    let data = Dataset::read_csv(&args.data)?;
    let formula = formula_from_flags(&data, &args.features, &args.log)?;
    let model = fit_spf(&data, &formula)?;
    std::fs::write(&args.out, model.to_text())?;
    print_coefficient_table(&model);
    Ok(())
}

pub fn print_coefficient_table(model: &SpfModel) {
    println!("{:<20} {:>12} {:>12} {:>9} {:>9}", "term", "estimate", "std_error", "z", "p");
    for test in coefficient_significance(model) {
        let z = test.z_value.map_or("-".into(), |z| format!("{z:.3}"));
        let p = test.p_value.map_or("-".into(), |p| format!("{p:.4}"));
        println!(
            "{:<20} {:>12.5} {:>12.5} {:>9} {:>9}",
            test.name, test.estimate, test.std_error, z, p
        );
    }
    println!("dispersion (aux-OLS): {:.5}", model.dispersion);
}

pub fn screen(args: ScreenArgs) -> Result<()> {
    let data = Dataset::read_csv(&args.data)?;
    let weighting = EbWeighting::from_name(&args.weighting)?;
    let model = match &args.model {
        Some(path) => SpfModel::from_text(&std::fs::read_to_string(path)?)?,
        None => fit_spf(&data, &formula_from_flags(&data, &args.features, &args.log)?)?,
    };
    if let Some(top) = args.top {
        if top == 0 || top > data.len() {
            return Err(Error::InvalidParameter(format!(
                "--top {top} invalid for {} sites",
                data.len()
            )));
        }
    }
    let mu = model.predict_dataset(&data)?;
    let estimates: Vec<_> = mu
        .iter()
        .zip(&data.counts)
        .map(|(&m, &y)| eb_estimate_with(m, y, model.dispersion, weighting))
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = estimates.iter().map(|e| e.eb).collect();
    let ranking = HotspotRanking::from_scores(&scores);
    let keep = args.top.unwrap_or(data.len());
    let mut out = String::from("rank,site,mu,count,weight,eb\n");
    for (rank, &site) in ranking.top(keep).iter().enumerate() {
        let e = &estimates[site];
        let _ = writeln!(
            out,
            "{},{site},{},{},{},{}",
            rank + 1,
            e.mu,
            e.observed,
            e.weight,
            e.eb
        );
    }
    std::fs::write(&args.out, out)?;
    println!(
        "screened {} site(s) with {} weighting; wrote {}",
        data.len(),
        weighting.name(),
        args.out.display()
    );
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let rows = rows_from_csv(&std::fs::read_to_string(&args.rows)?)?;
    if rows.is_empty() {
        return Err(Error::EmptyInput("no replication rows".into()));
    }
    let cells = cells_from_rows(&rows);
    std::fs::create_dir_all(&args.out)?;
    let reports = group_cells_into_reports(cells, "prediction-weighted");
    let refs: Vec<&ExperimentReport> = reports.iter().collect();
    std::fs::write(
        args.out.join("summary.json"),
        crashgan_core::evaluate::report::summary_json(&refs),
    )?;
    std::fs::write(
        args.out.join("plots.csv"),
        crashgan_core::evaluate::report::plot_csv(&refs),
    )?;
    println!("re-aggregated {} row(s) into {}", rows.len(), args.out.display());
    Ok(())
}

/// Groups flat cells by dispersion into per-run reports. Fields that are
/// not recoverable from rows alone (sample size, generator means) are
/// left at their unknown markers.
pub fn group_cells_into_reports(
    cells: Vec<crashgan_core::evaluate::ExperimentCell>,
    weighting: &str,
) -> Vec<ExperimentReport> {
    let mut dispersions: Vec<f64> = cells.iter().map(|c| c.dispersion).collect();
    dispersions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dispersions.dedup();
    dispersions
        .into_iter()
        .map(|d| {
            let mine: Vec<_> = cells.iter().filter(|c| c.dispersion == d).cloned().collect();
            let replications = mine
                .first()
                .map_or(0, |c| c.base.per_replication.len() + c.failed_replications);
            ExperimentReport {
                dispersion: d,
                sample_size: 0,
                replications,
                cells: mine,
                eb_weighting: weighting.to_string(),
                expected_count_mean: f64::NAN,
                intercept_count_mean: f64::NAN,
                mape_target: "true-lambda".to_string(),
            }
        })
        .collect()
}
