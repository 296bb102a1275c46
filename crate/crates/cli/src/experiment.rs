//! The `experiment` subcommand: the full Base-vs-Augmented matrix over
//! dispersions and synthetic sizes, written incrementally so interrupted
//! runs resume by replication index.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crashgan_core::cgan::{train_cgan, CganModel, TrainConfig};
use crashgan_core::evaluate::report::{
    cells_from_rows, plot_csv, rows_from_csv, rows_to_csv, summary_json, Arm, ReplicationRow,
    REPLICATION_CSV_HEADER,
};
use crashgan_core::evaluate::{replicate, ExperimentOptions, ExperimentReport, ReplicationOutcome};
use crashgan_core::simulate::{expected_count_mean, gen_experiment_suite, SimConfig};
use crashgan_core::spf::EbWeighting;
use crashgan_core::{Error, Result};

use crate::commands::{parse_f64_list, write_manifest};
use crate::config::Config;
use crate::ExperimentArgs;

#[derive(Debug, Clone)]
struct Plan {
    dispersions: Vec<f64>,
    synthetic_sizes: Vec<usize>,
    replications: usize,
    sample_size: usize,
    beta0: f64,
    coefficients: Vec<f64>,
    train: TrainConfig,
    ks: Vec<usize>,
    seed: u64,
    workers: usize,
}

fn resolve_plan(args: &ExperimentArgs) -> Result<Plan> {
    let cfg = match (&args.preset, &args.config) {
        (Some(name), None) => {
            if name != "paper-sim" {
                return Err(Error::InvalidParameter(format!(
                    "unknown preset {name:?}; available: paper-sim"
                )));
            }
            Config::default()
        }
        (None, Some(path)) => Config::load(path)?,
        (None, None) | (Some(_), Some(_)) => {
            return Err(Error::InvalidParameter(
                "pass exactly one of --preset or --config".into(),
            ))
        }
    };
    let sec = "experiment";
    let dispersions = match cfg.get(sec, "dispersions") {
        Some(list) => parse_f64_list(list)?,
        None => vec![0.5, 1.5],
    };
    let synthetic_sizes = match cfg.get(sec, "synthetic_sizes") {
        Some(list) => parse_f64_list(list)?.into_iter().map(|v| v as usize).collect(),
        None => vec![200, 500, 1000],
    };
    let coefficients = match cfg.get(sec, "coefficients") {
        Some(list) => parse_f64_list(list)?,
        None => vec![0.5, -0.5, 1.0, -1.0],
    };
    let mut replications = cfg.get_parsed(sec, "replications")?.unwrap_or(1000usize);
    if let Some(scale) = args.scale {
        if scale <= 0.0 {
            return Err(Error::InvalidParameter("--scale must be > 0".into()));
        }
        replications = ((replications as f64 * scale).ceil() as usize).max(1);
    }
    let mut dispersions = dispersions;
    if let Some(d) = args.dispersion {
        if !dispersions.contains(&d) {
            dispersions.push(d);
        }
        dispersions.retain(|&x| x == d);
    }
    let seed = args.seed.or(cfg.get_parsed(sec, "seed")?).unwrap_or(42);
    let workers = match args.workers {
        Some(w) => w,
        None => std::env::var("CRASHGAN_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
            .or(cfg.get_parsed(sec, "workers")?)
            .unwrap_or(1),
    };
    let train = TrainConfig {
        epochs: args
            .epochs
            .or(cfg.get_parsed(sec, "epochs")?)
            .unwrap_or(5000),
        batch_size: cfg.get_parsed(sec, "batch_size")?.unwrap_or(100),
        lr_g: cfg.get_parsed(sec, "lr_g")?.unwrap_or(0.001),
        lr_d: cfg.get_parsed(sec, "lr_d")?.unwrap_or(0.001),
        decay_g: cfg.get_parsed(sec, "decay_g")?.unwrap_or(0.001),
        decay_d: cfg.get_parsed(sec, "decay_d")?.unwrap_or(0.0),
        seed: cfg.get_parsed(sec, "train_seed")?.unwrap_or(seed),
    };
    Ok(Plan {
        dispersions,
        synthetic_sizes,
        replications,
        sample_size: cfg.get_parsed(sec, "sample_size")?.unwrap_or(100),
        beta0: cfg.get_parsed(sec, "beta0")?.unwrap_or(0.5),
        coefficients,
        train,
        ks: vec![5, 10, 15, 20],
        seed,
        workers: workers.max(1),
    })
}

fn plan_lines(plan: &Plan) -> Vec<(String, String)> {
    vec![
        ("dispersions".into(), format!("{:?}", plan.dispersions)),
        ("synthetic_sizes".into(), format!("{:?}", plan.synthetic_sizes)),
        ("replications".into(), format!("{}", plan.replications)),
        ("sample_size".into(), format!("{}", plan.sample_size)),
        ("beta0".into(), format!("{}", plan.beta0)),
        ("coefficients".into(), format!("{:?}", plan.coefficients)),
        ("epochs".into(), format!("{}", plan.train.epochs)),
        ("batch_size".into(), format!("{}", plan.train.batch_size)),
        ("lr_g".into(), format!("{}", plan.train.lr_g)),
        ("lr_d".into(), format!("{}", plan.train.lr_d)),
        ("decay_g".into(), format!("{}", plan.train.decay_g)),
        ("decay_d".into(), format!("{}", plan.train.decay_d)),
        ("ks".into(), format!("{:?}", plan.ks)),
        ("seed".into(), format!("{}", plan.seed)),
        ("workers".into(), format!("{}", plan.workers)),
        ("eb_weighting".into(), EbWeighting::default().name().into()),
    ]
}

pub fn run(args: ExperimentArgs) -> Result<()> {
    let plan = resolve_plan(&args)?;
    if args.dry_run {
        println!("experiment plan (dry run, nothing written):");
        for (k, v) in plan_lines(&plan) {
            println!("  {k} = {v}");
        }
        let cells = plan.dispersions.len() * plan.synthetic_sizes.len();
        println!(
            "  -> {} replication(s) x {cells} cell(s), output under {}",
            plan.replications,
            args.out.display()
        );
        return Ok(());
    }
    std::fs::create_dir_all(&args.out)?;
    let rows_path = args.out.join("report.csv");
    let mut existing: Vec<ReplicationRow> = if args.resume && rows_path.exists() {
        rows_from_csv(&std::fs::read_to_string(&rows_path)?)?
    } else {
        Vec::new()
    };

    let mut failed_total = 0usize;
    let mut reports: Vec<ExperimentReport> = Vec::new();
    for &dispersion in &plan.dispersions {
        let config = SimConfig {
            beta0: plan.beta0,
            coefficients: plan.coefficients.clone(),
            dispersion,
            sample_size: plan.sample_size,
            seed: crashgan_core::rng::derive_seed(plan.seed, "experiment-suite", dispersion.to_bits()),
        };
        let suite = gen_experiment_suite(&config, plan.replications, plan.replications)?;
        let cgan = load_or_train_cgan(&args.out, dispersion, &suite.cgan_train.data, &plan, args.resume)?;
        let options = ExperimentOptions {
            synthetic_sizes: plan.synthetic_sizes.clone(),
            ks: plan.ks.clone(),
            eb_weighting: EbWeighting::default(),
            seed: plan.seed,
            workers: plan.workers,
        };

        let done: HashSet<usize> = existing
            .iter()
            .filter(|r| r.dispersion == dispersion)
            .map(|r| r.replication)
            .collect();
        let pending: Vec<usize> = (0..plan.replications).filter(|r| !done.contains(r)).collect();

        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&rows_path)?;
        if !args.resume || existing.is_empty() {
            // Fresh run: truncate and write the header once, before the
            // first dispersion appends rows.
            if reports.is_empty() && done.is_empty() && existing.is_empty() {
                drop(file);
                std::fs::write(&rows_path, format!("{REPLICATION_CSV_HEADER}\n"))?;
                file = std::fs::OpenOptions::new().append(true).open(&rows_path)?;
            }
        }

        let failed = run_replications(
            &suite, &cgan, &options, &pending, dispersion, &mut file, &mut existing,
        )?;
        failed_total += failed;

        let cells: Vec<_> = cells_from_rows(&existing)
            .into_iter()
            .filter(|c| c.dispersion == dispersion)
            .map(|mut c| {
                c.failed_replications = failed;
                c
            })
            .collect();
        reports.push(ExperimentReport {
            dispersion,
            sample_size: plan.sample_size,
            replications: plan.replications,
            cells,
            eb_weighting: options.eb_weighting.name().to_string(),
            expected_count_mean: expected_count_mean(&config),
            intercept_count_mean: plan.beta0.exp(),
            mape_target: "true-lambda".to_string(),
        });
    }

    let refs: Vec<&ExperimentReport> = reports.iter().collect();
    std::fs::write(args.out.join("summary.json"), summary_json(&refs))?;
    std::fs::write(args.out.join("plots.csv"), plot_csv(&refs))?;
    let mut resolved = plan_lines(&plan);
    resolved.push(("failed_replications".into(), format!("{failed_total}")));
    write_manifest(
        &args.out,
        "experiment",
        &resolved,
        &["report.csv".into(), "summary.json".into(), "plots.csv".into()],
    )?;
    println!(
        "experiment complete: {} dispersion(s), {} replication(s), {} failed; bundle at {}",
        plan.dispersions.len(),
        plan.replications,
        failed_total,
        args.out.display()
    );
    Ok(())
}

/// Runs pending replications (in index order, chunked across workers),
/// appending rows to the CSV as each replication completes.
fn run_replications(
    suite: &crashgan_core::simulate::ExperimentSuite,
    cgan: &CganModel,
    options: &ExperimentOptions,
    pending: &[usize],
    dispersion: f64,
    file: &mut std::fs::File,
    existing: &mut Vec<ReplicationRow>,
) -> Result<usize> {
    let mut failed = 0usize;
    for chunk in pending.chunks(options.workers.max(1)) {
        let outcomes: Vec<(usize, Result<ReplicationOutcome>)> = if options.workers <= 1 {
            chunk
                .iter()
                .map(|&r| (r, replicate(r, &suite.ns_test[r], &suite.prediction_test[r], cgan, options)))
                .collect()
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&r| {
                        scope.spawn(move || {
                            (
                                r,
                                replicate(r, &suite.ns_test[r], &suite.prediction_test[r], cgan, options),
                            )
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            })
        };
        for (r, outcome) in outcomes {
            match outcome {
                Err(e) => {
                    eprintln!("replication {r} (dispersion {dispersion}) failed: {e}");
                    failed += 1;
                }
                Ok(out) => {
                    let mut block = String::new();
                    let mut push = |size: usize, arm: Arm, metrics| {
                        let row = ReplicationRow {
                            dispersion,
                            synthetic_size: size,
                            replication: r,
                            arm,
                            metrics,
                        };
                        let csv = rows_to_csv(std::slice::from_ref(&row));
                        let _ = write!(block, "{}", csv.lines().nth(1).unwrap());
                        block.push('\n');
                        existing.push(row);
                    };
                    for (i, &size) in options.synthetic_sizes.iter().enumerate() {
                        push(size, Arm::Base, out.base);
                        push(size, Arm::Augmented, out.augmented[i]);
                    }
                    file.write_all(block.as_bytes())?;
                    file.flush()?;
                }
            }
        }
    }
    Ok(failed)
}

/// Trains the per-dispersion CGAN, or reuses the cached model file when
/// resuming. The loss history lands next to the model.
fn load_or_train_cgan(
    out: &Path,
    dispersion: f64,
    train_data: &crashgan_core::Dataset,
    plan: &Plan,
    resume: bool,
) -> Result<CganModel> {
    let model_path = out.join(format!("cgan_d{dispersion}.model"));
    if resume && model_path.exists() {
        return CganModel::from_text(&std::fs::read_to_string(&model_path)?);
    }
    let model = train_cgan(train_data, &plan.train)?;
    std::fs::write(&model_path, model.to_text())?;
    let mut losses = String::from("epoch,loss_d,loss_g\n");
    for (i, e) in model.history.iter().enumerate() {
        let _ = writeln!(losses, "{i},{},{}", e.loss_d, e.loss_g);
    }
    std::fs::write(out.join(format!("cgan_d{dispersion}_losses.csv")), losses)?;
    Ok(model)
}
