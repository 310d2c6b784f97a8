//! Command implementations behind the clap surface.

use crate::anybackend::{AnyBackend, AnyModel};
use crate::args::{
    BackendArg, BackendOpts, Command, EvalArgs, ModeArg, RankArgs, SelectArgs, SimulateArgs,
    SynthGenArgs,
};
use crate::error::CliError;
use crate::external::{ExternalBackend, ExternalModel};
use crate::manifest::{write_manifest, CaseDoc, ManifestDoc, PoolManifest};
use crate::maskfile::{self, atomic_write};
use crate::pgm::write_pgm;
use crate::report;
use eigenrank_core::{
    dice, evaluate_model, generate_dataset, rank_failures_fixed, run_conjecture_simulation,
    run_failure_elimination, run_selection, von_neumann_entropy, DiceMatrix, GroundTruthSource,
    ScoreConfig, SimulationConfig, SyntheticModel, PSD_TOLERANCE,
};
use std::path::{Path, PathBuf};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Dice { a, b } => cmd_dice(&a, &b),
        Command::Matrix { metric, masks } => cmd_matrix(metric.into(), &masks),
        Command::Select(args) => cmd_select(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::SynthGen(args) => cmd_synth_gen(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    atomic_write(path, text.as_bytes()).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn build_backend<'m>(
    manifest: &'m PoolManifest,
    opts: &BackendOpts,
) -> Result<AnyBackend<'m>, CliError> {
    match opts.backend {
        BackendArg::Synthetic => Ok(AnyBackend::Synthetic(manifest.synthetic_backend()?)),
        BackendArg::External => {
            let work_dir = opts.work_dir.clone().unwrap_or_else(|| {
                std::env::temp_dir().join(format!("eigenrank-work-{}", std::process::id()))
            });
            let backend = ExternalBackend::new(
                manifest,
                opts.train_cmd.as_deref().expect("required by clap"),
                opts.predict_cmd.as_deref().expect("required by clap"),
                work_dir,
            )?;
            Ok(AnyBackend::External(backend))
        }
    }
}

fn parse_model(opts: &BackendOpts, spec: &str) -> Result<AnyModel, CliError> {
    match opts.backend {
        BackendArg::Synthetic => {
            let (theta_part, seed_part) = match spec.split_once(':') {
                Some((t, s)) => (t, Some(s)),
                None => (spec, None),
            };
            let theta: f64 = theta_part.parse().map_err(|_| CliError::BadModelSpec {
                backend: "synthetic",
                value: spec.to_string(),
                detail: "expected `theta` or `theta:jitter_seed` with theta in [0, 1]",
            })?;
            if !(0.0..=1.0).contains(&theta) {
                return Err(CliError::BadModelSpec {
                    backend: "synthetic",
                    value: spec.to_string(),
                    detail: "theta must lie in [0, 1]",
                });
            }
            let jitter_seed: u64 = match seed_part {
                None => 0,
                Some(s) => s.parse().map_err(|_| CliError::BadModelSpec {
                    backend: "synthetic",
                    value: spec.to_string(),
                    detail: "jitter seed must be an unsigned integer",
                })?,
            };
            Ok(AnyModel::Synthetic(SyntheticModel { theta, jitter_seed }))
        }
        BackendArg::External => Ok(AnyModel::External(ExternalModel::at(PathBuf::from(spec)))),
    }
}

fn cmd_dice(a: &Path, b: &Path) -> Result<(), CliError> {
    let mask_a = maskfile::read_mask(a)?;
    let mask_b = maskfile::read_mask(b)?;
    println!("{}", report::fmt_float(dice(&mask_a, &mask_b)?));
    Ok(())
}

fn cmd_matrix(metric: eigenrank_core::OverlapMetric, paths: &[PathBuf]) -> Result<(), CliError> {
    let masks: Vec<_> = paths
        .iter()
        .map(|p| maskfile::read_mask(p))
        .collect::<Result<_, _>>()?;
    let matrix = DiceMatrix::from_masks(&masks, metric)?;
    let eigenvalues = matrix.eigenvalues()?;
    let psd = eigenvalues[eigenvalues.len() - 1] >= -PSD_TOLERANCE;

    println!("order = {}", matrix.order());
    println!("metric = {}", metric.name());
    println!("matrix =");
    for p in 0..matrix.order() {
        let row: Vec<String> = (0..matrix.order())
            .map(|q| report::fmt_float(matrix.entry(p, q)))
            .collect();
        println!("  {}", row.join(" "));
    }
    let spectrum: Vec<String> = eigenvalues.iter().map(|&l| report::fmt_float(l)).collect();
    println!("eigenvalues = {}", spectrum.join(" "));
    println!("lambda-max = {}", report::fmt_float(eigenvalues[0]));
    if psd {
        println!(
            "entropy-raw = {}",
            report::fmt_float(von_neumann_entropy(&eigenvalues, false)?)
        );
        println!(
            "entropy-normalized = {}",
            report::fmt_float(von_neumann_entropy(&eigenvalues, true)?)
        );
    } else {
        println!("entropy-raw = undefined (matrix is not positive semidefinite)");
        println!("entropy-normalized = undefined (matrix is not positive semidefinite)");
    }
    println!("psd = {psd}");
    Ok(())
}

fn cmd_select(args: SelectArgs) -> Result<(), CliError> {
    let manifest = PoolManifest::load(&args.manifest)?;
    let pool = manifest.pool();
    let backend = build_backend(&manifest, &args.backend)?;
    let config = ScoreConfig {
        metric: args.metric.into(),
        mode: args.score.into(),
    };
    let selection = run_selection(&pool, args.k, args.iterations, &backend, args.seed, config)?;
    let text = report::render_selection(&selection, backend.name(), pool.len());
    write_text(&args.out, &text)?;
    println!(
        "selected {} cases; report written to {}",
        selection.selection.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_rank(args: RankArgs) -> Result<(), CliError> {
    let manifest = PoolManifest::load(&args.manifest)?;
    let pool = manifest.pool();
    let backend = build_backend(&manifest, &args.backend)?;
    let config = ScoreConfig {
        metric: args.metric.into(),
        mode: args.score.into(),
    };
    match args.mode {
        ModeArg::Fixed => {
            let models: Vec<AnyModel> = args
                .models
                .iter()
                .map(|spec| parse_model(&args.backend, spec))
                .collect::<Result<_, _>>()?;
            let ranking = rank_failures_fixed(&backend, &models, &pool, config)?;
            let text = report::render_ranking(
                &ranking,
                backend.name(),
                config.metric.name(),
                config.mode.name(),
                models.len(),
            );
            write_text(&args.out, &text)?;
            println!(
                "ranked {} cases; report written to {}",
                ranking.len(),
                args.out.display()
            );
        }
        ModeArg::Iterative => {
            let probe_spec = args.probe.as_deref().expect("required by clap");
            let probe = parse_model(&args.backend, probe_spec)?;
            let truth = manifest.truth_source();
            let truth_ref: Option<&dyn GroundTruthSource> = if manifest.has_truth_for_all() {
                Some(&truth)
            } else {
                None
            };
            let failure = run_failure_elimination(
                &pool,
                args.k.expect("required by clap"),
                args.iterations.expect("required by clap"),
                &backend,
                &probe,
                truth_ref,
                args.seed.expect("required by clap"),
                config,
            )?;
            let text = report::render_failure(
                &failure,
                backend.name(),
                config.metric.name(),
                config.mode.name(),
                probe_spec,
                pool.len(),
            );
            write_text(&args.out, &text)?;
            println!(
                "eliminated {} cases over {} iterations; report written to {}",
                failure.rows.last().map_or(0, |r| r.eliminated_count),
                failure.iterations,
                args.out.display()
            );
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let config = SimulationConfig {
        t_values: args.t_values,
        epsilon: args.epsilon,
        trials: args.trials,
        seed: args.seed,
    };
    let table = run_conjecture_simulation(&config)?;
    let csv = report::render_sim_csv(&table);
    match &args.out {
        Some(path) => {
            write_text(path, &csv)?;
            println!("simulation table written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_synth_gen(args: SynthGenArgs) -> Result<(), CliError> {
    let cases = generate_dataset(args.n, args.width, args.height, args.seed)?;
    let masks_dir = args.out_dir.join("masks");
    let images_dir = args.out_dir.join("images");
    for dir in [&masks_dir, &images_dir] {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.clone(),
            source,
        })?;
    }

    let mut docs = Vec::with_capacity(cases.len());
    for case in &cases {
        let mask_rel = format!("masks/{}.emsk", case.id);
        let image_rel = format!("images/{}.pgm", case.id);
        maskfile::write_mask(&case.truth, &args.out_dir.join(&mask_rel))?;
        let image_path = args.out_dir.join(&image_rel);
        write_pgm(&case.image, &image_path).map_err(|source| CliError::Write {
            path: image_path,
            source,
        })?;
        docs.push(CaseDoc {
            id: case.id.as_str().to_string(),
            image: Some(image_rel),
            truth: Some(mask_rel),
            difficulty: Some(case.difficulty),
        });
    }
    let manifest_path = args.out_dir.join("manifest.toml");
    write_manifest(
        &manifest_path,
        &ManifestDoc {
            seed: Some(args.seed),
            cases: docs,
        },
    )?;
    println!(
        "generated {} cases under {}",
        cases.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let manifest = PoolManifest::load(&args.manifest)?;
    let pool = manifest.pool();
    let backend = build_backend(&manifest, &args.backend)?;
    let model = parse_model(&args.backend, &args.model)?;
    let truth = manifest.truth_source();
    let eval = evaluate_model(&backend, &model, pool.cases(), &truth)?;
    let text = report::render_eval(&eval, backend.name(), &args.model);
    write_text(&args.out, &text)?;
    println!(
        "evaluated {} cases; report written to {}",
        eval.stats.count,
        args.out.display()
    );
    Ok(())
}
