use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anam_core::archive::{HistoryDigest, ModelArchive};
use anam_core::data::synthetic::TERM_NAMES;
use anam_core::data::{load_csv, preprocess, simulate, split, write_csv, Dataset, PreprocessOptions, Schema, SplitSpec};
use anam_core::eval::{fit_glm, GlmOptions, MetricsReport};
use anam_core::fsutil::write_atomic;
use anam_core::pipeline::{evaluate_glm, evaluate_model, finalize_dispersion};
use anam_core::selection::{fine_tune, select_main, select_pairs, Keep, SelectionReport};
use anam_core::{AnamError, Result};
use serde::{Deserialize, Serialize};

use crate::config::{apply_seed, RunConfig};
use crate::svg;
use crate::{Cli, Command, FitData};

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate { n, phi, bias, seed, out } => {
            if let Some(n) = n {
                cfg.synthetic.n = n;
            }
            if let Some(phi) = phi {
                cfg.synthetic.dispersion = phi;
            }
            if let Some(b) = bias {
                cfg.synthetic.bias = b;
            }
            apply_seed(&mut cfg, seed);
            cfg.validate()?;
            run_simulate(&cfg, &out)
        }
        Command::Preprocess {
            data,
            schema,
            standardize,
            one_hot,
            iqr_filter,
            seed,
            out,
        } => {
            cfg.preprocess.standardize |= standardize;
            cfg.preprocess.one_hot |= one_hot;
            cfg.preprocess.iqr_filter |= iqr_filter;
            let ds = load(&data, schema.as_deref())?;
            run_preprocess(&cfg, &ds, seed.unwrap_or(0), &out)
        }
        Command::SelectMain {
            data,
            hyper,
            seed,
            jobs,
            out,
        } => {
            hyper.apply(&mut cfg)?;
            apply_seed(&mut cfg, seed);
            if let Some(j) = jobs {
                cfg.selection.jobs = j;
            }
            cfg.validate()?;
            let (train, val) = load_fit(&data)?;
            let report = select_main(&train, &val, cfg.distribution, &cfg.selection)?;
            create_dir(&out)?;
            report.write(&out)?;
            for (name, score) in &report.main_scores {
                println!("{name:<12} {score:.6e}");
            }
            Ok(())
        }
        Command::SelectPairs {
            data,
            hyper,
            mains,
            selection,
            seed,
            jobs,
            out,
        } => {
            hyper.apply(&mut cfg)?;
            apply_seed(&mut cfg, seed);
            if let Some(j) = jobs {
                cfg.selection.jobs = j;
            }
            cfg.validate()?;
            let mains = match selection {
                Some(path) => mains_from_report(&read_report(&path)?, cfg.selection.k1),
                None => mains,
            };
            let (train, val) = load_fit(&data)?;
            let report = select_pairs(&train, &val, &mains, cfg.distribution, &cfg.selection)?;
            create_dir(&out)?;
            report.write(&out)?;
            if let Some(b) = report.baseline_val_nll {
                println!("baseline validation NLL {b:.6}");
            }
            for d in &report.pair_deltas {
                println!("{:<12} {:+.6}", format!("{}:{}", d.first, d.second), d.delta);
            }
            Ok(())
        }
        Command::Train {
            data,
            hyper,
            mains,
            pairs,
            selection,
            seed,
            out,
        } => {
            hyper.apply(&mut cfg)?;
            apply_seed(&mut cfg, seed);
            cfg.validate()?;
            let (train, val) = load_fit(&data)?;
            let (mains, pairs) = match selection {
                Some(path) => terms_from_report(&read_report(&path)?, &cfg),
                None => {
                    let mains = if mains.is_empty() {
                        train.features().iter().map(|f| f.name.clone()).collect()
                    } else {
                        mains
                    };
                    (mains, parse_pairs(&pairs)?)
                }
            };
            run_train(&cfg, &train, &val, &mains, &pairs, &out)
        }
        Command::Evaluate {
            model,
            data,
            glm_train,
            ridge,
            out,
        } => {
            let archive = ModelArchive::load(&model)?;
            let test = load_csv(&data, &archive.schema)?;
            let mut csv = format!("{}\n", MetricsReport::CSV_HEADER);
            let anam = evaluate_model(&archive.model, &test)?;
            writeln!(csv, "{}", anam.csv_row("anam")).expect("string write");
            if let Some(path) = glm_train {
                let train = load_csv(&path, &archive.schema)?;
                let opts = GlmOptions {
                    ridge,
                    ..GlmOptions::default()
                };
                let glm = fit_glm(&train, archive.model.distribution(), opts)?;
                let report = evaluate_glm(&glm, &train, &test)?;
                writeln!(csv, "{}", report.csv_row("glm")).expect("string write");
            }
            print!("{csv}");
            match out {
                Some(path) => write_atomic(&path, csv.as_bytes()),
                None => Ok(()),
            }
        }
        Command::Predict { model, data, out } => {
            let archive = ModelArchive::load(&model)?;
            let ds = load_csv(&data, &archive.schema)?;
            let preds = archive.model.predict_batch(&ds)?;
            let mut csv = String::from("mu,eta");
            for label in archive.model.term_labels() {
                csv.push(',');
                csv.push_str(&label);
            }
            csv.push('\n');
            for i in 0..ds.n() {
                write!(csv, "{},{}", preds.mu[i], preds.eta[i]).expect("string write");
                for c in &preds.contributions {
                    write!(csv, ",{}", c[i]).expect("string write");
                }
                csv.push('\n');
            }
            write_atomic(&out, csv.as_bytes())
        }
        Command::ExportShapes {
            model,
            resolution,
            pair_resolution,
            out,
        } => {
            let archive = ModelArchive::load(&model)?;
            run_export(&archive, resolution, pair_resolution, &out)
        }
        Command::Plot { shapes, out } => run_plot(&shapes, &out),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AnamError::io(dir, e))
}

fn schema_path(data: &Path, explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => data.parent().unwrap_or(Path::new(".")).join("schema.json"),
    }
}

fn load(data: &Path, schema: Option<&Path>) -> Result<Dataset> {
    let schema = Schema::from_json_file(&schema_path(data, schema))?;
    load_csv(data, &schema)
}

fn load_fit(data: &FitData) -> Result<(Dataset, Dataset)> {
    Ok((
        load(&data.train, data.schema.as_deref())?,
        load(&data.val, data.schema.as_deref())?,
    ))
}

fn read_report(path: &Path) -> Result<SelectionReport> {
    let text = std::fs::read_to_string(path).map_err(|e| AnamError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn mains_from_report(report: &SelectionReport, keep: Keep) -> Vec<String> {
    if !report.chosen_mains.is_empty() {
        return report.chosen_mains.clone();
    }
    let ranked = report.main_scores.iter().map(|(n, _)| n.clone());
    match keep {
        Keep::Top(k) => ranked.take(k).collect(),
        Keep::Manual => ranked.collect(),
    }
}

fn terms_from_report(report: &SelectionReport, cfg: &RunConfig) -> (Vec<String>, Vec<(String, String)>) {
    let mains = mains_from_report(report, cfg.selection.k1);
    let pairs = if !report.chosen_pairs.is_empty() {
        report.chosen_pairs.clone()
    } else {
        let ranked = report.pair_deltas.iter().map(|d| (d.first.clone(), d.second.clone()));
        match cfg.selection.k2 {
            Keep::Top(k) => ranked.take(k).collect(),
            Keep::Manual => Vec::new(),
        }
    };
    (mains, pairs)
}

fn parse_pairs(items: &[String]) -> Result<Vec<(String, String)>> {
    items
        .iter()
        .map(|p| {
            p.split_once(':')
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .ok_or_else(|| AnamError::InvalidArgument(format!("pair '{p}' is not of the form A:B")))
        })
        .collect()
}

fn run_simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    create_dir(out)?;
    let (ds, truth) = simulate(&cfg.synthetic)?;
    write_csv(&ds, &out.join("data.csv"))?;
    write_atomic(&out.join("schema.json"), ds.schema().to_json()?.as_bytes())?;
    let mut csv = String::from("mu");
    for name in TERM_NAMES {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for (mu, terms) in truth.mu.iter().zip(&truth.terms) {
        write!(csv, "{mu}").expect("string write");
        for t in terms {
            write!(csv, ",{t}").expect("string write");
        }
        csv.push('\n');
    }
    write_atomic(&out.join("truth.csv"), csv.as_bytes())?;
    println!("wrote {} rows to {}", ds.n(), out.display());
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct PreprocessRecord {
    filter: Option<anam_core::data::PreprocessReport>,
    transform: anam_core::data::PreprocessReport,
    split: [usize; 3],
}

fn run_preprocess(cfg: &RunConfig, ds: &Dataset, seed: u64, out: &Path) -> Result<()> {
    let opts = cfg.preprocess;
    let (filtered, filter) = if opts.iqr_filter {
        let only_filter = PreprocessOptions {
            iqr_filter: true,
            ..PreprocessOptions::default()
        };
        let (d, r) = preprocess(ds, only_filter)?;
        (d, Some(r))
    } else {
        (ds.clone(), None)
    };
    let [a, b, c] = cfg.split;
    let (train, val, test) = split(&filtered, &SplitSpec::new(a, b, c, seed)?)?;
    let transform_opts = PreprocessOptions {
        iqr_filter: false,
        ..opts
    };
    let (train, transform) = preprocess(&train, transform_opts)?;
    let val = transform.apply(&val)?;
    let test = transform.apply(&test)?;
    create_dir(out)?;
    write_csv(&train, &out.join("train.csv"))?;
    write_csv(&val, &out.join("val.csv"))?;
    write_csv(&test, &out.join("test.csv"))?;
    write_atomic(&out.join("schema.json"), train.schema().to_json()?.as_bytes())?;
    let record = PreprocessRecord {
        filter,
        transform,
        split: [train.n(), val.n(), test.n()],
    };
    write_atomic(
        &out.join("preprocess.json"),
        serde_json::to_string_pretty(&record)?.as_bytes(),
    )?;
    println!(
        "removed {} rows; split {} / {} / {}",
        record.filter.as_ref().map_or(0, |r| r.removed_rows),
        train.n(),
        val.n(),
        test.n()
    );
    Ok(())
}

fn run_train(
    cfg: &RunConfig,
    train: &Dataset,
    val: &Dataset,
    mains: &[String],
    pairs: &[(String, String)],
    out: &Path,
) -> Result<()> {
    let mut fitted = fine_tune(train, val, mains, pairs, &cfg.architecture, cfg.distribution, &cfg.train)?;
    finalize_dispersion(&mut fitted.model, train)?;
    let digest = HistoryDigest::new(&fitted.history, fitted.best_epoch);
    let archive = ModelArchive::new(train.schema(), fitted.model, Some(cfg.train.clone()), digest);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    archive.save(out)?;
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    fitted.history.write_csv(&out.with_file_name(format!("{stem}.history.csv")))?;
    println!(
        "{} epochs ({:?}); best epoch {} with validation NLL {:.6}",
        fitted.history.len(),
        fitted.stop_reason,
        fitted.best_epoch,
        fitted.history.best_val_nll().unwrap_or(f64::NAN)
    );
    Ok(())
}

/// One entry of the `shapes.json` index written next to the grids.
#[derive(Debug, Serialize, Deserialize)]
struct ShapeEntry {
    term: String,
    file: String,
    inputs: Vec<String>,
}

fn run_export(archive: &ModelArchive, resolution: usize, pair_resolution: usize, out: &Path) -> Result<()> {
    create_dir(out)?;
    let mut index = Vec::new();
    for term in archive.model.terms() {
        let label = term.label();
        let res = if term.arity() == 2 { pair_resolution } else { resolution };
        let grid = archive.model.export_shape_grid(&label, res)?;
        let file = format!("shape_{}.csv", label.replace(':', "_"));
        grid.write_csv(&out.join(&file))?;
        index.push(ShapeEntry {
            term: label.clone(),
            file,
            inputs: term.spec().kind.features().iter().map(|s| s.to_string()).collect(),
        });
    }
    write_atomic(&out.join("shapes.json"), serde_json::to_string_pretty(&index)?.as_bytes())
}

fn run_plot(shapes: &Path, out: &Path) -> Result<()> {
    let index_path = shapes.join("shapes.json");
    let text = std::fs::read_to_string(&index_path).map_err(|e| AnamError::io(&index_path, e))?;
    let index: Vec<ShapeEntry> = serde_json::from_str(&text)?;
    create_dir(out)?;
    for entry in &index {
        let path = shapes.join(&entry.file);
        let text = std::fs::read_to_string(&path).map_err(|e| AnamError::io(&path, e))?;
        let mut rows: Vec<Vec<&str>> = Vec::new();
        for line in text.lines().skip(1).filter(|l| !l.is_empty()) {
            rows.push(line.split(',').collect());
        }
        let bad = || AnamError::SchemaMismatch(format!("{} is not a shape grid", path.display()));
        let values = rows
            .iter()
            .map(|r| r.last().and_then(|v| v.parse::<f64>().ok()).ok_or_else(bad))
            .collect::<Result<Vec<f64>>>()?;
        let svg = match entry.inputs.as_slice() {
            [x] => {
                let xs: Vec<String> = rows.iter().map(|r| r[0].to_string()).collect();
                svg::line_chart(&entry.term, x, &xs, &values)
            }
            [a, b] => {
                let mut first: Vec<String> = Vec::new();
                let mut second: Vec<String> = Vec::new();
                for r in &rows {
                    if r.len() != 3 {
                        return Err(bad());
                    }
                    if first.last().map(String::as_str) != Some(r[0]) {
                        first.push(r[0].to_string());
                    }
                    if first.len() == 1 {
                        second.push(r[1].to_string());
                    }
                }
                if first.len() * second.len() != values.len() {
                    return Err(bad());
                }
                svg::heatmap(&entry.term, [a, b], &first, &second, &values)
            }
            _ => return Err(bad()),
        };
        let name = entry.file.trim_end_matches(".csv");
        write_atomic(&out.join(format!("{name}.svg")), svg.as_bytes())?;
    }
    println!("wrote {} charts to {}", index.len(), out.display());
    Ok(())
}
