//! `qipf`: data generation, mode decomposition, uncertainty pipelines and
//! plotting from the command line.

mod svg;

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, ArgGroup, Args, Parser, Subcommand};

use qipf_core::eval::{self, LabeledSeries};
use qipf_core::experiment::{self, DataSpec, ExperimentRecipe, FittedModel, Pipeline, PipelineOutput};
use qipf_core::kernelfield::{ipf, Bandwidth, SampleSet};
use qipf_core::qipf::{self, ModeConfig, ModeMatrix};
use qipf_core::uq::UncertaintyReport;

use svg::{Band, Chart, Series};

const OUT_DIR_ENV: &str = "QIPF_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "qipf-out";

#[derive(Debug, Parser)]
#[command(
    name = "qipf",
    version,
    about = "Kernel mode decomposition and single-pass uncertainty experiments"
)]
struct Cli {
    /// Report failures as JSON objects on stderr.
    #[arg(long, global = true)]
    json: bool,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Decompose a sample set into uncertainty modes.
    Decompose(DecomposeArgs),
    /// Train the network described by a recipe.
    Train(RecipeArgs),
    /// Run the cross-QIPF and MC-dropout estimators of a recipe.
    Uq(UqArgs),
    /// Compute calibration or ROC metrics for a recipe.
    Evaluate(RecipeArgs),
    /// Render a mode-matrix CSV or report JSONL as SVG.
    Plot(PlotArgs),
    /// Run a recipe's pipeline end to end and write all outputs.
    Run(RecipeArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Output CSV [default: <out dir>/<kind>.csv].
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Sum of unit sines, z-normalized.
    Sine {
        #[arg(long, value_delimiter = ',', required = true)]
        freqs: Vec<f64>,
        #[arg(long)]
        fs: f64,
        #[arg(long)]
        n: usize,
    },
    /// One component of the Lorenz system, z-normalized.
    Lorenz {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        component: usize,
    },
    /// `y = x sin x` on uniform inputs.
    Xsinx {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Two-region noisy sine regression set.
    Twosine {
        #[arg(long, default_value_t = 40)]
        n_left: usize,
        #[arg(long, default_value_t = 10)]
        n_right: usize,
        #[arg(long, default_value_t = 0.03)]
        noise_sd: f64,
        #[arg(long)]
        seed: u64,
    },
    /// The two-sine function on one uniform interval.
    TwosineUniform {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 0.03)]
        noise_sd: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Gaussian blobs with class-index targets.
    Blobs {
        #[arg(long)]
        n_per_class: usize,
        /// Class centers as `x,y;x,y;...`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_centers)]
        centers: Centers,
        #[arg(long)]
        std: f64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Clone)]
struct Centers(Vec<Vec<f64>>);

fn parse_centers(s: &str) -> std::result::Result<Centers, String> {
    s.split(';')
        .map(|c| {
            c.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| format!("bad coordinate {v:?}: {e}"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Centers)
}

fn parse_grid_arg(s: &str) -> std::result::Result<(f64, f64, f64), String> {
    experiment::parse_grid(s).map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("domain").required(true).args(["grid", "timeseries"])))]
struct DecomposeArgs {
    /// CSV whose last column holds the samples.
    data: PathBuf,
    /// Kernel width.
    #[arg(long, value_parser = parse_positive)]
    sigma: f64,
    /// Number of modes K.
    #[arg(long)]
    modes: usize,
    /// Evaluation grid `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid_arg)]
    grid: Option<(f64, f64, f64)>,
    /// Evaluate each sample in the field of the samples before it.
    #[arg(long)]
    timeseries: bool,
    /// Samples used before the first time-series evaluation.
    #[arg(long, default_value_t = 10, requires = "timeseries")]
    warmup: usize,
    /// Z-normalize the samples first.
    #[arg(long)]
    znorm: bool,
    #[arg(long, default_value_t = qipf::DEFAULT_PSI_FLOOR, value_parser = parse_positive)]
    psi_floor: f64,
    /// Also write `modes.svg`.
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecipeArgs {
    /// Recipe file (TOML).
    #[arg(long)]
    recipe: PathBuf,
    /// Overrides the recipe's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct UqArgs {
    #[command(flatten)]
    recipe: RecipeArgs,
    /// Directory written by `train`; the model is trained afresh if absent.
    #[arg(long)]
    model_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Mode-matrix or other headered CSV, or an uncertainty report (.jsonl).
    input: PathBuf,
    /// SVG to write.
    #[arg(short, long)]
    out: PathBuf,
    /// CSV whose series are drawn dashed on the same axes.
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[arg(long, default_value = "")]
    title: String,
}

fn main() -> ExitCode {
    let json = std::env::args().any(|a| a == "--json");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if json {
                report_json("usage", 2, &e.to_string());
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("QIPF_LOG")
        .init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.json {
                report_json("runtime", 1, &format!("{e:#}"));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}

fn report_json(kind: &str, code: u8, message: &str) {
    let obj = serde_json::json!({ "error": { "kind": kind, "code": code, "message": message.trim_end() } });
    eprintln!("{obj}");
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Decompose(a) => decompose(a),
        Command::Train(a) => train(a),
        Command::Uq(a) => uq(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Plot(a) => plot(a),
        Command::Run(a) => run_pipeline(a),
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT_DIR), PathBuf::from)
}

struct LoadedRecipe {
    recipe: ExperimentRecipe,
    base: PathBuf,
    out_dir: PathBuf,
}

fn load_recipe(args: &RecipeArgs) -> Result<LoadedRecipe> {
    let recipe =
        ExperimentRecipe::load(&args.recipe).with_context(|| format!("loading recipe {}", args.recipe.display()))?;
    let base = args
        .recipe
        .parent()
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let out_dir = match (&args.out_dir, &recipe.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) if d.is_absolute() => d.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => default_out_dir(),
    };
    Ok(LoadedRecipe { recipe, base, out_dir })
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let (name, spec) = match args.kind {
        GenKind::Sine { freqs, fs, n } => ("sine", DataSpec::Sine { freqs, fs, n }),
        GenKind::Lorenz { n, dt, component } => ("lorenz", DataSpec::Lorenz { n, dt, component }),
        GenKind::Xsinx { n, lo, hi, seed } => ("xsinx", DataSpec::Xsinx { n, lo, hi, seed }),
        GenKind::Twosine {
            n_left,
            n_right,
            noise_sd,
            seed,
        } => (
            "twosine",
            DataSpec::Twosine {
                n_left,
                n_right,
                noise_sd,
                seed,
            },
        ),
        GenKind::TwosineUniform {
            n,
            lo,
            hi,
            noise_sd,
            seed,
        } => (
            "twosine-uniform",
            DataSpec::TwosineUniform {
                n,
                lo,
                hi,
                noise_sd,
                seed,
            },
        ),
        GenKind::Blobs {
            n_per_class,
            centers,
            std,
            seed,
        } => (
            "blobs",
            DataSpec::Blobs {
                n_per_class,
                centers: centers.0,
                std,
                seed,
            },
        ),
    };
    let data = spec.labeled(Path::new("."))?;
    let out = args
        .out
        .unwrap_or_else(|| default_out_dir().join(format!("{name}.csv")));
    write_csv_file(&out, &data)?;
    println!("{} rows -> {}", data.len(), out.display());
    Ok(())
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))?;
    }
    Ok(())
}

fn write_csv_file(path: &Path, data: &LabeledSeries) -> Result<()> {
    create_parent(path)?;
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(f);
    data.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn decompose(args: DecomposeArgs) -> Result<()> {
    let spec = DataSpec::Csv {
        path: args.data.clone(),
    };
    let mut samples = spec
        .series(Path::new("."))
        .with_context(|| format!("reading {}", args.data.display()))?;
    if args.znorm {
        samples = eval::znormalize(&samples)?;
    }
    let sigma = Bandwidth::new(args.sigma)?;
    let cfg = ModeConfig::with_floor(args.modes, sigma, args.psi_floor)?;
    let out_dir = args.out_dir.unwrap_or_else(default_out_dir);
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let (matrix, ipf_curve) = if let Some((lo, hi, step)) = args.grid {
        let centers = SampleSet::from_scalars(&samples)?;
        let grid = qipf::grid(lo, hi, step)?;
        let m = qipf::qipf_modes(&centers, &cfg, &grid)?;
        let curve = grid
            .iter()
            .map(|x| ipf(&centers, sigma, x))
            .collect::<qipf_core::Result<Vec<_>>>()?;
        (m, Some(curve))
    } else {
        (qipf::timeseries_qipf(&samples, &cfg, args.warmup)?, None)
    };
    log::info!(
        "{} points x {} modes, near-node points: {}",
        matrix.num_points(),
        matrix.num_modes(),
        matrix.near_node.iter().filter(|n| **n).count()
    );

    let mut files = Vec::new();
    let csv_path = out_dir.join("modes.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&csv_path)?);
    matrix.write_csv(&mut w)?;
    w.flush()?;
    files.push(csv_path);
    let json_path = out_dir.join("modes.json");
    fs::write(&json_path, matrix.to_json()? + "\n")?;
    files.push(json_path);
    if let Some(curve) = &ipf_curve {
        let p = out_dir.join("ipf.csv");
        let mut text = String::from("x,ipf\n");
        for (x, v) in matrix.eval_points.as_flat().iter().zip(curve) {
            text.push_str(&format!("{x},{v}\n"));
        }
        fs::write(&p, text)?;
        files.push(p);
    }
    if args.plot {
        let p = out_dir.join("modes.svg");
        fs::write(&p, mode_chart(&matrix, ipf_curve.as_deref(), "").render())?;
        files.push(p);
    }
    let hist = qipf::dominance_histogram(&matrix);
    println!(
        "{} points x {} modes; dominance {:?}",
        matrix.num_points(),
        matrix.num_modes(),
        hist
    );
    print_files(&files);
    Ok(())
}

/// Min-max normalized modes over the evaluation points (or time indices),
/// with the IPF dashed when given.
fn mode_chart(m: &ModeMatrix, ipf_curve: Option<&[f64]>, title: &str) -> Chart {
    let x: Vec<f64> = match m.time_offset {
        Some(t0) => (0..m.num_points()).map(|i| (t0 + i) as f64).collect(),
        None => m.eval_points.iter().map(|p| p[0]).collect(),
    };
    let mut series: Vec<Series> = m
        .values
        .iter()
        .enumerate()
        .map(|(k, row)| Series {
            label: format!("v{}", k + 1),
            x: x.clone(),
            y: svg::min_max(row),
            dashed: false,
        })
        .collect();
    if let Some(c) = ipf_curve {
        series.push(Series {
            label: "ipf".into(),
            x,
            y: svg::min_max(c),
            dashed: true,
        });
    }
    Chart {
        title: title.to_string(),
        series,
        bands: Vec::new(),
    }
}

fn train(args: RecipeArgs) -> Result<()> {
    let r = load_recipe(&args)?;
    let fitted = experiment::fit(&r.recipe, &r.base)?;
    let files = fitted.save(&r.out_dir)?;
    if let Some(l) = fitted.loss_history.last() {
        println!("final loss {l:.6} after {} epochs", fitted.loss_history.len());
    }
    print_files(&files);
    Ok(())
}

fn uq_output(r: &LoadedRecipe, model_dir: Option<&Path>) -> Result<PipelineOutput> {
    let fitted = match model_dir {
        Some(d) => FittedModel::load(d).with_context(|| format!("loading model from {}", d.display()))?,
        None => experiment::fit(&r.recipe, &r.base)?,
    };
    let test = experiment::test_set(&r.recipe, &r.base)?;
    Ok(match r.recipe.pipeline {
        Pipeline::RegressionUq => {
            PipelineOutput::RegressionUq(Box::new(experiment::regression_uq_with(&r.recipe, test, fitted)?))
        }
        Pipeline::ClassificationUq => {
            PipelineOutput::ClassificationUq(Box::new(experiment::classification_uq_with(&r.recipe, test, fitted)?))
        }
        other => bail!("uq needs a regression-uq or classification-uq recipe, got {other:?}"),
    })
}

fn uq(args: UqArgs) -> Result<()> {
    let r = load_recipe(&args.recipe)?;
    let out = uq_output(&r, args.model_dir.as_deref())?;
    let files = out.write(&r.out_dir)?;
    match &out {
        PipelineOutput::RegressionUq(res) => println!("{} test points", res.qipf.entries.len()),
        PipelineOutput::ClassificationUq(res) => println!("{} test points", res.qipf.entries.len()),
        _ => {}
    }
    print_files(&files);
    Ok(())
}

fn evaluate(args: RecipeArgs) -> Result<()> {
    let r = load_recipe(&args)?;
    let stdout = std::io::stdout();
    match r.recipe.pipeline {
        Pipeline::CalibrationTable => {
            let res = experiment::calibration_table(&r.recipe, &r.base)?;
            res.write_table(stdout.lock())?;
            let files = PipelineOutput::CalibrationTable(res).write(&r.out_dir)?;
            print_files(&files);
        }
        Pipeline::RegressionUq => {
            let res = experiment::regression_uq(&r.recipe, &r.base)?;
            let q = eval::calibration_rmse(&res.qipf.uncertainties(), &res.abs_errors)?;
            let mc = res
                .mc
                .as_ref()
                .map(|m| eval::calibration_rmse(&m.uncertainties(), &res.abs_errors))
                .transpose()?;
            let data = r.recipe.data.labeled(&r.base)?;
            println!("dataset,N,Q,mc_dropout,qipf");
            println!(
                "{},{},{},{},{q:.3}",
                data.name,
                data.len(),
                data.input_dim(),
                mc.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
            );
        }
        Pipeline::ClassificationUq => {
            let res = experiment::classification_uq(&r.recipe, &r.base)?;
            println!("method,auc");
            println!("mc_dropout,{:.3}", res.roc_mc.auc);
            println!("qipf,{:.3}", res.roc_qipf.auc);
        }
        other => bail!("evaluate has no metrics for the {other:?} pipeline"),
    }
    Ok(())
}

fn run_pipeline(args: RecipeArgs) -> Result<()> {
    let r = load_recipe(&args)?;
    let out = experiment::run_recipe(&r.recipe, &r.base)?;
    match &out {
        PipelineOutput::GridStudy(results) => {
            for g in results {
                println!(
                    "sigma {}: dominant mode {} at x=0, {} in the tails; minima spearman {:.3}",
                    g.sigma, g.dominant_at_zero, g.tail_dominant, g.minima_spearman
                );
            }
        }
        PipelineOutput::Dominance(d) => {
            println!("dominance {:?}; entropy {:.3}", d.histogram, d.entropy);
        }
        PipelineOutput::RegressionUq(res) => println!("{} test points", res.qipf.entries.len()),
        PipelineOutput::ClassificationUq(res) => {
            println!("auc qipf {:.3}, mc_dropout {:.3}", res.roc_qipf.auc, res.roc_mc.auc)
        }
        PipelineOutput::CalibrationTable(res) => res.write_table(std::io::stdout().lock())?,
    }
    let files = out.write(&r.out_dir)?;
    if let PipelineOutput::GridStudy(results) = &out {
        for g in results {
            let p = r.out_dir.join(format!("modes_sigma{}.svg", g.sigma));
            let title = format!("sigma = {}", g.sigma);
            fs::write(&p, mode_chart(&g.matrix, Some(&g.ipf), &title).render())?;
            println!("wrote {}", p.display());
        }
    }
    print_files(&files);
    Ok(())
}

/// Headered numeric CSV: first column is the x axis, the rest are series.
struct Table {
    headers: Vec<String>,
    columns: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> Result<Table> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut r = csv::Reader::from_reader(BufReader::new(f));
    let headers: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.len() < 2 || headers.iter().all(|h| h.is_empty()) {
        bail!("{}: need a header and at least two columns", path.display());
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != headers.len() {
            bail!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                line + 2,
                rec.len(),
                headers.len()
            );
        }
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v: f64 = field
                .trim()
                .parse()
                .with_context(|| format!("{}: row {}: bad number {field:?}", path.display(), line + 2))?;
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(Table { headers, columns })
}

fn is_mode_column(h: &str) -> bool {
    h.len() > 1 && h.starts_with('v') && h[1..].chars().all(|c| c.is_ascii_digit())
}

fn table_series(t: &Table, dashed: bool, normalize: bool) -> Vec<Series> {
    t.headers[1..]
        .iter()
        .zip(&t.columns[1..])
        .map(|(h, c)| Series {
            label: h.clone(),
            x: t.columns[0].clone(),
            y: if normalize { svg::min_max(c) } else { c.clone() },
            dashed: dashed || h == "ipf",
        })
        .collect()
}

fn plot(args: PlotArgs) -> Result<()> {
    let meta = fs::metadata(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    if meta.len() == 0 {
        bail!("{}: empty file", args.input.display());
    }
    let is_report = args.input.extension().is_some_and(|e| e == "jsonl");
    let mut chart = if is_report {
        let f = fs::File::open(&args.input)?;
        let entries = UncertaintyReport::read_jsonl(BufReader::new(f))
            .with_context(|| format!("parsing {}", args.input.display()))?;
        if entries.is_empty() {
            bail!("{}: no report entries", args.input.display());
        }
        let x: Vec<f64> = entries.iter().map(|e| e.index as f64).collect();
        let y: Vec<f64> = entries.iter().map(|e| e.prediction[0]).collect();
        let u: Vec<f64> = entries.iter().map(|e| e.uncertainty).collect();
        Chart {
            title: String::new(),
            bands: vec![Band {
                x: x.clone(),
                lo: y.iter().zip(&u).map(|(a, b)| a - b).collect(),
                hi: y.iter().zip(&u).map(|(a, b)| a + b).collect(),
            }],
            series: vec![Series {
                label: "prediction".into(),
                x,
                y,
                dashed: false,
            }],
        }
    } else {
        let t = read_table(&args.input)?;
        let modes = t.headers[1..].iter().any(|h| is_mode_column(h));
        Chart {
            title: String::new(),
            series: table_series(&t, false, modes),
            bands: Vec::new(),
        }
    };
    if let Some(o) = &args.overlay {
        let normalize = chart.series.iter().any(|s| is_mode_column(&s.label));
        chart.series.extend(table_series(&read_table(o)?, true, normalize));
    }
    chart.title = args.title;
    create_parent(&args.out)?;
    fs::write(&args.out, chart.render()).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn grid_and_timeseries_are_exclusive() {
        let base = ["qipf", "decompose", "d.csv", "--sigma", "1", "--modes", "3"];
        let both: Vec<&str> = base
            .iter()
            .copied()
            .chain(["--grid", "-1:1:0.5", "--timeseries"])
            .collect();
        assert!(Cli::try_parse_from(both).is_err());
        assert!(Cli::try_parse_from(base).is_err());
        let grid: Vec<&str> = base.iter().copied().chain(["--grid", "-1:1:0.5"]).collect();
        assert!(Cli::try_parse_from(grid).is_ok());
    }

    #[test]
    fn non_positive_step_is_rejected() {
        let args = [
            "qipf",
            "decompose",
            "d.csv",
            "--sigma",
            "1",
            "--modes",
            "3",
            "--grid",
            "0:1:0",
        ];
        assert!(Cli::try_parse_from(args).is_err());
    }

    #[test]
    fn centers_parse() {
        let c = parse_centers("0,0;3,-1.5").unwrap();
        assert_eq!(c.0, vec![vec![0.0, 0.0], vec![3.0, -1.5]]);
        assert!(parse_centers("0,a").is_err());
    }

    #[test]
    fn mode_columns() {
        assert!(is_mode_column("v1") && is_mode_column("v10"));
        assert!(!is_mode_column("v") && !is_mode_column("value") && !is_mode_column("x"));
    }
}
