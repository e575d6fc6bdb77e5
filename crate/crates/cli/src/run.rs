use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gafzeros::densities::{closed_form, gaf_density_l, real_atom_r, sym_density_s, Family, HorizontalDensityPrediction, Which};
use gafzeros::intensity::IntensityField;
use gafzeros::sampler::Sampler;
use gafzeros::spectral::{KernelEvaluator, SpectralMeasure, StripSpec};
use gafzeros::stats::{
    compare, convergence_table, randomness_report, run_ensemble, tail_survival, weak_convergence_surrogate, Bins,
    EnsembleConfig, TailConfig,
};
use gafzeros::zeros::{locate_zeros, Rect, ZeroOptions};
use gafzeros::Kind;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};
use crate::svg::{line_plot, Curve};
use crate::verify;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The JSON document every run writes next to its tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub version: String,
    pub digest: String,
    pub config: ExperimentConfig,
    pub result: Value,
}

pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// False when a verification check failed.
    pub passed: bool,
}

struct Artifacts {
    dir: PathBuf,
    digest: String,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        let mut s = format!("# gafzeros {VERSION} config {}\n{header}\n", self.digest);
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        self.write(name, &s)
    }

    fn svg(&mut self, name: &str, svg: &str) -> Result<()> {
        let tagged = svg.replacen('\n', &format!("\n<!-- gafzeros {VERSION} config {} -->\n", self.digest), 1);
        self.write(name, &tagged)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// One row of a density table; `None` where a quantity is undefined.
pub struct DensityRow {
    pub y: f64,
    pub l: Option<f64>,
    pub l_closed: Option<f64>,
    pub s: Option<f64>,
    pub s_closed: Option<f64>,
}

pub fn density_rows(measure: &SpectralMeasure, family: Option<Family>, ys: &[f64], which: Option<Which>) -> Vec<DensityRow> {
    let want = |w: Which| which.is_none() || which == Some(w);
    ys.iter()
        .map(|&y| DensityRow {
            y,
            l: want(Which::L).then(|| gaf_density_l(measure, y).ok()).flatten(),
            l_closed: want(Which::L).then(|| family.and_then(|f| closed_form(f, Which::L, y).ok())).flatten(),
            s: want(Which::S).then(|| sym_density_s(measure, y).ok()).flatten(),
            s_closed: want(Which::S).then(|| family.and_then(|f| closed_form(f, Which::S, y).ok())).flatten(),
        })
        .collect()
}

const DENSITY_HEADER: &str = "y,L,L_closed_form,S,S_closed_form";

fn density_csv_rows(rows: &[DensityRow]) -> Vec<String> {
    rows.iter().map(|r| format!("{},{},{},{},{}", r.y, opt(r.l), opt(r.l_closed), opt(r.s), opt(r.s_closed))).collect()
}

/// Execute a configuration, writing its artifacts to `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    config.validate()?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let digest = config.digest();
    let mut art = Artifacts { dir: out.to_path_buf(), digest: digest.clone(), files: Vec::new() };
    let measure = config.measure.build()?;
    let mut passed = true;
    let result = match config.command {
        Command::Density => density(config, &measure, &mut art)?,
        Command::Intensity => intensity(config, &measure, &mut art)?,
        Command::Sample => sample(config, &measure, &mut art)?,
        Command::Zeros => zeros(config, &measure, &mut art)?,
        Command::Measure => ensemble_measure(config, &measure, &mut art)?,
        Command::Randomness => randomness(config, &measure, &mut art)?,
        Command::Tail => tail(config, &measure, &mut art)?,
        Command::Figure1 => figure1(config, &mut art)?,
        Command::Verify => {
            let report = verify::run(config, &measure)?;
            passed = report.passed;
            let rows: Vec<String> =
                report.checks.iter().map(|c| format!("{},{},{},{}", c.name, c.passed, c.value, c.threshold)).collect();
            art.csv("verify.csv", "check,passed,value,threshold", &rows)?;
            serde_json::to_value(&report)?
        }
    };
    let doc = RunResult { version: VERSION.to_string(), digest, config: config.clone(), result };
    art.write(&format!("{}.json", config.command.name()), &serde_json::to_string_pretty(&doc)?)?;
    Ok(Outcome { files: art.files, passed })
}

/// Re-run the configuration embedded in a result file.
pub fn replay(result_path: &Path, out: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(result_path).with_context(|| format!("reading {}", result_path.display()))?;
    let doc: RunResult = serde_json::from_str(&text).context("parsing result file")?;
    if doc.version != VERSION {
        bail!("result was written by gafzeros {} but this is {VERSION}", doc.version);
    }
    let digest = doc.config.digest();
    if digest != doc.digest {
        bail!("config digest mismatch: file says {}, config hashes to {digest}", doc.digest);
    }
    run(&doc.config, out)
}

fn density(config: &ExperimentConfig, measure: &SpectralMeasure, art: &mut Artifacts) -> Result<Value> {
    let ys = linspace(config.band[0], config.band[1], config.points);
    let rows = density_rows(measure, config.measure.family(), &ys, config.which);
    art.csv("density.csv", DENSITY_HEADER, &density_csv_rows(&rows))?;
    Ok(json!({
        "points": rows.len(),
        "real_atom_R": real_atom_r(measure).ok(),
        "half_atom": config.measure.family().map(|f| f.half_atom()),
    }))
}

/// Kernel evaluator on the band widened by the Laplacian stencil.
fn stencil_kernel<'a>(config: &ExperimentConfig, measure: &'a SpectralMeasure) -> Result<KernelEvaluator<'a>> {
    let pad = 2.0 * config.step;
    let strip = StripSpec::for_measure(measure, config.band[0] - pad, config.band[1] + pad)
        .context("intensity stencil leaves the strip; narrow the band")?;
    Ok(KernelEvaluator::new(measure, strip)?)
}

fn intensity(config: &ExperimentConfig, measure: &SpectralMeasure, art: &mut Artifacts) -> Result<Value> {
    let kernel = stencil_kernel(config, measure)?;
    let field = IntensityField::new(config.kind, &kernel).with_step(config.step);
    let xs = linspace(config.x_range[0], config.x_range[1], config.nx);
    let ys = linspace(config.band[0], config.band[1], config.ny);
    let grid = field.grid(&xs, &ys)?;
    let predicted = |y: f64| match config.kind {
        Kind::Gaf => gaf_density_l(measure, y).ok(),
        Kind::Symmetric => sym_density_s(measure, y).ok(),
    };
    let rows: Vec<String> = grid.iter().map(|s| format!("{},{},{},{}", s.x, s.y, s.value, opt(predicted(s.y)))).collect();
    art.csv("intensity.csv", "x,y,intensity,horizontal_density", &rows)?;
    Ok(json!({ "points": grid.len() }))
}

fn sampler(config: &ExperimentConfig, measure: &SpectralMeasure) -> Result<Sampler> {
    let height = config.band[0].abs().max(config.band[1].abs());
    Ok(Sampler::new(measure, config.kind, config.n_modes, height)?)
}

fn sample(config: &ExperimentConfig, measure: &SpectralMeasure, art: &mut Artifacts) -> Result<Value> {
    let f = sampler(config, measure)?.sample(config.seed, config.trial);
    let rows: Vec<String> = f.modes().iter().map(|m| format!("{},{},{}", m.lambda, m.coeff.re, m.coeff.im)).collect();
    art.csv("sample.csv", "lambda,coeff_re,coeff_im", &rows)?;
    Ok(json!({ "kind": f.kind, "seed": f.seed, "trial": f.trial, "modes": f.len() }))
}

fn zeros(config: &ExperimentConfig, measure: &SpectralMeasure, art: &mut Artifacts) -> Result<Value> {
    let f = sampler(config, measure)?.sample(config.seed, config.trial);
    let rect = Rect::new(config.x_range[0], config.x_range[1], config.band[0], config.band[1])?;
    let set = locate_zeros(&f, &rect, &ZeroOptions::default())?;
    let rows: Vec<String> = set
        .zeros
        .iter()
        .map(|z| format!("{},{},{},{},{}", z.z.re, z.z.im, z.residual, z.is_real, z.multiplicity))
        .collect();
    art.csv("zeros.csv", "x,y,residual,is_real,multiplicity", &rows)?;
    Ok(json!({
        "certified_count": set.certified_count,
        "real": set.zeros.iter().filter(|z| z.is_real).count(),
        "clusters": set.clusters().count(),
    }))
}

fn ensemble_config(config: &ExperimentConfig, measure: &SpectralMeasure) -> Result<EnsembleConfig> {
    Ok(EnsembleConfig {
        measure: measure.clone(),
        kind: config.kind,
        t_list: config.t_list.clone(),
        trials: config.trials,
        seed: config.seed,
        n_modes: config.n_modes,
        bins: Bins::uniform(config.band[0], config.band[1], config.bins)?,
    })
}

fn ensemble_measure(config: &ExperimentConfig, measure: &SpectralMeasure, art: &mut Artifacts) -> Result<Value> {
    let run = run_ensemble(&ensemble_config(config, measure)?)?;
    let prediction = HorizontalDensityPrediction::new(measure, config.kind).ok();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for k in 0..config.t_list.len() {
        let s = run.summary(k)?;
        let predicted = match &prediction {
            Some(p) => Some(gafzeros::stats::predicted_masses(p, &s.edges)?),
            None => None,
        };
        for b in 0..s.mean.len() {
            let p = predicted.as_ref().map(|v| v[b]);
            rows.push(format!("{},bin,{},{},{},{},{}", s.t, s.edges[b], s.edges[b + 1], s.mean[b], s.variance[b], opt(p)));
        }
        if config.kind == Kind::Symmetric {
            let p = prediction.as_ref().map(|p| p.atom_at_zero);
            rows.push(format!("{},real-atom,0,0,{},{},{}", s.t, s.real_mean, s.real_variance, opt(p)));
        }
        summaries.push(s);
    }
    art.csv("measure.csv", "t,part,lo,hi,mean,variance,predicted", &rows)?;
    let last = summaries.last().expect("t_list is not empty");
    let comparison = match &prediction {
        Some(p) => Some(compare(last, p)?),
        None => None,
    };
    let surrogate = if config.t_list.len() >= 2 { Some(weak_convergence_surrogate(&run)?) } else { None };
    Ok(json!({
        "summaries": summaries,
        "comparison": comparison,
        "convergence_diagnostic": convergence_table(&run).diagnostic,
        "weak_convergence_surrogate": surrogate,
    }))
}

fn randomness(config: &ExperimentConfig, measure: &SpectralMeasure, art: &mut Artifacts) -> Result<Value> {
    if config.t_list.len() < 2 {
        bail!("randomness needs at least two window lengths in t_list");
    }
    let run = run_ensemble(&ensemble_config(config, measure)?)?;
    let report = randomness_report(&run, 0, config.t_list.len() - 1)?;
    let rows: Vec<String> = (0..report.variance_long.len())
        .map(|b| format!("{b},{},{},{}", report.variance_short[b], report.variance_long[b], report.noise_long[b]))
        .collect();
    art.csv("randomness.csv", "cell,variance_short,variance_long,noise_long", &rows)?;
    Ok(serde_json::to_value(report)?)
}

fn tail(config: &ExperimentConfig, measure: &SpectralMeasure, art: &mut Artifacts) -> Result<Value> {
    let report = tail_survival(&TailConfig {
        measure: measure.clone(),
        kind: config.kind,
        rect: Rect::new(config.x_range[0], config.x_range[1], config.band[0], config.band[1])?,
        trials: config.trials,
        seed: config.seed,
        n_modes: config.n_modes,
    })?;
    let rows: Vec<String> = report
        .survival
        .iter()
        .enumerate()
        .map(|(k, p)| format!("{k},{},{p},{}", report.histogram[k], p.ln()))
        .collect();
    art.csv("tail.csv", "lambda,trials_with_exactly_lambda,survival,log_survival", &rows)?;
    Ok(serde_json::to_value(report)?)
}

/// The three worked families and the height range each is drawn over.
pub fn figure1_panels(points: usize) -> Vec<(Family, Vec<f64>)> {
    vec![
        (Family::PaleyWiener { a: 1.0 }, linspace(-1.0, 1.0, points)),
        (Family::FockBargmann { a: 1.0 }, linspace(-1.0, 1.0, points)),
        (Family::Sech, linspace(-0.24, 0.24, points)),
    ]
}

fn figure1(config: &ExperimentConfig, art: &mut Artifacts) -> Result<Value> {
    let mut panels = Vec::new();
    for (family, ys) in figure1_panels(config.points) {
        let rows = density_rows(&family.measure(), Some(family), &ys, None);
        let l: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.l.map(|v| (r.y, v))).collect();
        let s: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.s.map(|v| (r.y, v))).collect();
        let name = family.name();
        let svg = line_plot(
            name,
            "y",
            &[
                Curve { label: "GAF L(y)", color: "#1f4e9c", points: &l },
                Curve { label: "symmetric S(y)", color: "#c0392b", points: &s },
            ],
        );
        art.svg(&format!("figure1_{name}.svg"), &svg)?;
        art.csv(&format!("figure1_{name}.csv"), DENSITY_HEADER, &density_csv_rows(&rows))?;
        panels.push(json!({ "family": name, "points": rows.len(), "atom": family.atom() }));
    }
    Ok(json!({ "panels": panels }))
}
