//! Experiment orchestration: seeded run batches, CSV artifacts, and the
//! comparison/conformance commands behind the command-line interface.
//!
//! `cmd_run` writes two files into the output directory: `manifest.json`,
//! the fully resolved experiment spec (itself loadable as a config, so a
//! manifest reproduces its own outputs), and `runs.csv` with one row per
//! (dataset, variant, run, generation). All numeric output carries 17
//! significant digits so round-trips are exact, and rows are ordered by the
//! job key regardless of how many worker threads executed the runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{fmt_f64, load_dataset, Dataset};
use crate::engine::{run, EvolutionConfig, Variant};
use crate::stats::{significance_matrix, summarize};

/// Numeric evolution parameters shared by every variant of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionParams {
    pub population_size: usize,
    pub generations: u32,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub ms: f64,
    pub max_depth: usize,
    pub ridge_lambda: f64,
    pub hybrid_cutoff: u32,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        let c = EvolutionConfig::default();
        Self {
            population_size: c.population_size,
            generations: c.generations,
            tournament_size: c.tournament_size,
            p_crossover: c.p_crossover,
            p_mutation: c.p_mutation,
            ms: c.ms,
            max_depth: c.max_depth,
            ridge_lambda: c.ridge_lambda,
            hybrid_cutoff: c.hybrid_cutoff,
        }
    }
}

impl EvolutionParams {
    pub fn to_config(&self, variant: Variant) -> EvolutionConfig {
        EvolutionConfig {
            population_size: self.population_size,
            generations: self.generations,
            tournament_size: self.tournament_size,
            p_crossover: self.p_crossover,
            p_mutation: self.p_mutation,
            ms: self.ms,
            max_depth: self.max_depth,
            ridge_lambda: self.ridge_lambda,
            hybrid_cutoff: self.hybrid_cutoff,
            variant,
        }
    }
}

/// A full experiment: datasets, variants, run count, base seed, output
/// directory, and the evolution parameters. Run `r` of every
/// (dataset, variant) pair uses seed `seed + r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub datasets: Vec<PathBuf>,
    pub variants: Vec<Variant>,
    #[serde(default = "default_runs")]
    pub runs: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub evolution: EvolutionParams,
}

fn default_runs() -> u32 {
    100
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

/// Loads a config file: JSON when the extension is `.json` (so a written
/// manifest re-runs as-is), TOML otherwise. Unknown keys are errors.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let spec: ExperimentSpec = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)
            .with_context(|| format!("invalid JSON config {}", path.display()))?
    } else {
        toml::from_str(&text)
            .with_context(|| format!("invalid TOML config {}", path.display()))?
    };
    Ok(spec)
}

fn validate_spec(spec: &ExperimentSpec) -> Result<()> {
    ensure!(spec.runs >= 1, "run count must be at least 1");
    ensure!(!spec.datasets.is_empty(), "at least one dataset is required");
    ensure!(!spec.variants.is_empty(), "at least one variant is required");
    for variant in &spec.variants {
        let config = spec.evolution.to_config(*variant);
        config
            .validate()
            .with_context(|| format!("evolution parameters rejected for {variant}"))?;
    }
    Ok(())
}

/// Executes the full run batch and writes `manifest.json` and `runs.csv`
/// into the output directory. `threads = 0` picks a worker count
/// automatically; any thread count produces byte-identical output.
pub fn cmd_run(spec: &ExperimentSpec, threads: usize) -> Result<()> {
    validate_spec(spec)?;

    let datasets: Vec<Dataset> = spec
        .datasets
        .iter()
        .map(|p| load_dataset(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<_>>()?;

    fs::create_dir_all(&spec.out)
        .with_context(|| format!("cannot create output directory {}", spec.out.display()))?;
    let manifest = serde_json::to_string_pretty(spec).context("serializing manifest")?;
    fs::write(spec.out.join("manifest.json"), manifest + "\n")
        .with_context(|| format!("writing manifest into {}", spec.out.display()))?;

    // jobs in output order: dataset, then variant, then run
    let jobs: Vec<(usize, Variant, u32)> = datasets
        .iter()
        .enumerate()
        .flat_map(|(d, _)| {
            spec.variants
                .iter()
                .flat_map(move |&v| (0..spec.runs).map(move |r| (d, v, r)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    let logs = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, variant, r)| {
                let config = spec.evolution.to_config(variant);
                run(&config, &datasets[d], spec.seed + u64::from(r))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut csv = String::from("dataset,variant,run,generation,train_rmse,test_rmse,ls_prob\n");
    for (&(d, variant, r), log) in jobs.iter().zip(&logs) {
        for rec in &log.records {
            let ls = rec.ls_probability.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                datasets[d].name(),
                variant.tag(),
                r,
                rec.generation,
                fmt_f64(rec.train_rmse),
                fmt_f64(rec.test_rmse),
                ls
            );
        }
    }
    fs::write(spec.out.join("runs.csv"), csv)
        .with_context(|| format!("writing runs.csv into {}", spec.out.display()))?;
    Ok(())
}

/// dataset -> variant position -> run -> (last generation seen, its test RMSE)
type FinalFitness = BTreeMap<String, BTreeMap<usize, BTreeMap<u32, (u32, f64)>>>;

/// Final-generation test RMSE per (dataset, variant, run), read back from a
/// `runs.csv`.
fn read_final_fitness(path: &Path) -> Result<FinalFitness> {
    let file = fs::File::open(path)
        .with_context(|| format!("cannot open run log {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut grouped: FinalFitness = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.with_context(|| format!("runs.csv row {row}"))?;
        ensure!(record.len() == 7, "runs.csv row {row}: expected 7 fields");
        let dataset = record[0].to_string();
        let variant: Variant = record[1]
            .parse()
            .map_err(|e: String| anyhow::anyhow!("runs.csv row {row}: {e}"))?;
        let variant_order = Variant::ALL
            .iter()
            .position(|v| *v == variant)
            .expect("parsed variants are canonical");
        let run_idx: u32 = record[2]
            .parse()
            .with_context(|| format!("runs.csv row {row}: run index"))?;
        let generation: u32 = record[3]
            .parse()
            .with_context(|| format!("runs.csv row {row}: generation"))?;
        let test_rmse: f64 = record[5]
            .parse()
            .with_context(|| format!("runs.csv row {row}: test_rmse"))?;
        let slot = grouped
            .entry(dataset)
            .or_default()
            .entry(variant_order)
            .or_default()
            .entry(run_idx)
            .or_insert((generation, test_rmse));
        if generation >= slot.0 {
            *slot = (generation, test_rmse);
        }
    }
    Ok(grouped)
}

/// Compares final-generation test fitness across variants per dataset and
/// writes `matrix_<dataset>.csv` (Bonferroni-adjusted one-tailed p-values)
/// and `summary_<dataset>.csv` (five-number summaries plus outliers).
/// Significant dominances at `alpha` are printed to stdout.
pub fn cmd_compare(dir: &Path, alpha: f64) -> Result<()> {
    let grouped = read_final_fitness(&dir.join("runs.csv"))?;
    let mut compared_any = false;

    for (dataset, by_variant) in &grouped {
        if by_variant.len() < 2 {
            eprintln!("skipping {dataset}: fewer than 2 variants in the log");
            continue;
        }
        compared_any = true;
        let labels: Vec<String> = by_variant
            .keys()
            .map(|&order| Variant::ALL[order].tag().to_string())
            .collect();
        let samples: Vec<Vec<f64>> = by_variant
            .values()
            .map(|by_run| by_run.values().map(|&(_, rmse)| rmse).collect())
            .collect();

        let matrix = significance_matrix(&labels, &samples)?;
        let mut matrix_csv = String::from("variant");
        for label in &matrix.labels {
            let _ = write!(matrix_csv, ",{label}");
        }
        matrix_csv.push('\n');
        for (i, label) in matrix.labels.iter().enumerate() {
            let _ = write!(matrix_csv, "{label}");
            for j in 0..matrix.labels.len() {
                match matrix.p_values[i][j] {
                    Some(p) => {
                        let _ = write!(matrix_csv, ",{}", fmt_f64(p));
                    }
                    None => matrix_csv.push(','),
                }
            }
            matrix_csv.push('\n');
        }
        let matrix_path = dir.join(format!("matrix_{dataset}.csv"));
        fs::write(&matrix_path, matrix_csv)
            .with_context(|| format!("writing {}", matrix_path.display()))?;

        let mut summary_csv = String::from("variant,count,min,q1,median,q3,max,outliers\n");
        for (label, sample) in matrix.labels.iter().zip(&samples) {
            let s = summarize(sample)?;
            let outliers = s
                .outliers
                .iter()
                .map(|&v| fmt_f64(v))
                .collect::<Vec<_>>()
                .join(";");
            let _ = writeln!(
                summary_csv,
                "{label},{},{},{},{},{},{},{outliers}",
                s.count,
                fmt_f64(s.min),
                fmt_f64(s.q1),
                fmt_f64(s.median),
                fmt_f64(s.q3),
                fmt_f64(s.max)
            );
        }
        let summary_path = dir.join(format!("summary_{dataset}.csv"));
        fs::write(&summary_path, summary_csv)
            .with_context(|| format!("writing {}", summary_path.display()))?;

        for (i, row_label) in matrix.labels.iter().enumerate() {
            for (j, col_label) in matrix.labels.iter().enumerate() {
                if let Some(p) = matrix.p_values[i][j] {
                    if p <= alpha {
                        println!(
                            "{dataset}: {row_label} better than {col_label} (adjusted p = {p:.3e}, alpha = {alpha})"
                        );
                    }
                }
            }
        }
    }

    if !compared_any {
        bail!("no dataset in the log has at least 2 variants to compare");
    }
    Ok(())
}

fn load_expected_table(path: &Path) -> Result<BTreeMap<String, (usize, usize)>> {
    let file = fs::File::open(path)
        .with_context(|| format!("cannot open expected table {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut table = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.with_context(|| format!("expected table row {row}"))?;
        ensure!(
            record.len() == 3,
            "expected table row {row}: need name,variables,instances"
        );
        let vars: usize = record[1]
            .trim()
            .parse()
            .with_context(|| format!("expected table row {row}: variables"))?;
        let instances: usize = record[2]
            .trim()
            .parse()
            .with_context(|| format!("expected table row {row}: instances"))?;
        table.insert(record[0].trim().to_string(), (vars, instances));
    }
    Ok(table)
}

/// Prints per-dataset name, variable count, and instance count, flagging
/// mismatches against an optional `name,variables,instances` table.
/// Mismatches are reported, not fatal; unreadable or malformed files are.
pub fn cmd_datasets(paths: &[PathBuf], expect: Option<&Path>) -> Result<()> {
    let expected = expect.map(load_expected_table).transpose()?;
    for path in paths {
        let ds = load_dataset(path).with_context(|| format!("loading {}", path.display()))?;
        let mut line = format!(
            "{}: {} variables, {} instances",
            ds.name(),
            ds.num_vars(),
            ds.len()
        );
        if let Some(table) = &expected {
            match table.get(ds.name()) {
                Some(&(vars, instances)) if vars == ds.num_vars() && instances == ds.len() => {
                    line.push_str(" [ok]");
                }
                Some(&(vars, instances)) => {
                    let _ = write!(
                        line,
                        " [MISMATCH: expected {vars} variables, {instances} instances]"
                    );
                }
                None => line.push_str(" [no expectation]"),
            }
        }
        println!("{line}");
    }
    Ok(())
}
