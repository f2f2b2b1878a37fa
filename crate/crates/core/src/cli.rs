//! Command-line front end: one JSON config per run, flag overrides for the
//! seed, thread count and output directory, and `<command>.csv` plus
//! `manifest.json` as outputs.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::contrast::{hadamard_gap_upper_bound, local_ima_contrast_detailed, offdiag_coherence};
use crate::distributions::{FactorialDistribution, RadialLaw, UnivariateLaw};
use crate::error::{Error, Result};
use crate::experiments::{
    concentration_sweep, estimate_global_contrast, genericity_experiment, reparam_invariance_check,
    spurious_gap_experiment, write_csv, write_manifest, GapRow, GenericityConfig, GenericityRow,
    Manifest, ReparamReport, SpuriousConfig, SweepConfig, SweepRow,
};
use crate::linalg::{DenseMatrix, RANK_TOL};
use crate::mixing::{MapDescriptor, MonotoneTransform};
use crate::seeding::mix_seed;

pub const SEED_ENV: &str = "IMA_LAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Contrast,
    Sweep,
    Genericity,
    Spurious,
    Reparam,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Contrast => "contrast",
            Command::Sweep => "sweep",
            Command::Genericity => "genericity",
            Command::Spurious => "spurious",
            Command::Reparam => "reparam",
        }
    }
}

fn default_threads() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Command-specific parameters; omitted keys take their defaults.
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            params: empty_object(),
            master_seed: 0,
            threads: default_threads(),
            output_dir: default_output_dir(),
        }
    }

    /// Parses a config file. A `manifest.json` from an earlier run is
    /// accepted too and replays that run.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let is_manifest = value.get("wall_time_seconds").is_some();
        if is_manifest {
            let m: Manifest =
                serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
            return Self::from_manifest(&m);
        }
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        let command = serde_json::from_value(Value::String(m.command.clone()))
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            command,
            params: m.params.clone(),
            master_seed: m.master_seed,
            threads: m.threads,
            output_dir: PathBuf::from(&m.output_dir),
        })
    }

    /// Checks the schema and every parameter without running anything.
    pub fn validate(&self) -> Result<Params> {
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Params::parse(self.command, &self.params)
    }
}

/// `contrast`: either a single matrix, or a map descriptor with sources.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContrastParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<DenseMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<FactorialDistribution>,
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_n() -> usize {
    10_000
}

impl ContrastParams {
    fn validate(&self) -> Result<()> {
        match (&self.matrix, &self.map) {
            (Some(_), None) if self.sources.is_none() => Ok(()),
            (Some(_), None) => Err(Error::Config("`sources` applies to `map` only".into())),
            (None, Some(map)) => {
                let sources = self
                    .sources
                    .as_ref()
                    .ok_or_else(|| Error::Config("`map` needs `sources`".into()))?;
                if sources.dim() != map.dims().0 {
                    return Err(Error::Config(format!(
                        "sources have dimension {}, the map expects {}",
                        sources.dim(),
                        map.dims().0
                    )));
                }
                if self.n < crate::experiments::MIN_SAMPLES {
                    return Err(Error::Config(format!(
                        "n must be at least {}",
                        crate::experiments::MIN_SAMPLES
                    )));
                }
                Ok(())
            }
            _ => Err(Error::Config(
                "give exactly one of `matrix` and `map`".into(),
            )),
        }
    }
}

/// `reparam`: the map, its sources, and the reparametrization `P ∘ h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReparamParams {
    #[serde(default = "ReparamParams::default_map")]
    pub map: MapDescriptor,
    #[serde(default = "ReparamParams::default_sources")]
    pub sources: FactorialDistribution,
    /// `P e_j = e_{perm[j]}`.
    #[serde(default = "ReparamParams::default_perm")]
    pub perm: Vec<usize>,
    /// Component transforms of `h`.
    #[serde(default = "ReparamParams::default_transforms")]
    pub transforms: Vec<MonotoneTransform>,
    #[serde(default = "default_n")]
    pub n: usize,
}

impl ReparamParams {
    fn default_map() -> MapDescriptor {
        MapDescriptor::Linear {
            m: 5,
            d: 2,
            radial: RadialLaw::default(),
            orthonormal: false,
            seed: None,
        }
    }
    fn default_sources() -> FactorialDistribution {
        FactorialDistribution::iid(UnivariateLaw::standard_laplace(), 2).expect("two components")
    }
    fn default_perm() -> Vec<usize> {
        vec![1, 0]
    }
    fn default_transforms() -> Vec<MonotoneTransform> {
        vec![
            MonotoneTransform::Affine {
                scale: 2.0,
                shift: 1.0,
            },
            MonotoneTransform::Cube,
        ]
    }

    fn validate(&self) -> Result<()> {
        let d = self.map.dims().0;
        if self.sources.dim() != d || self.perm.len() != d || self.transforms.len() != d {
            return Err(Error::Config(format!(
                "sources, perm and transforms must all have the map's latent dimension {d}"
            )));
        }
        if self.n < crate::experiments::MIN_SAMPLES {
            return Err(Error::Config(format!(
                "n must be at least {}",
                crate::experiments::MIN_SAMPLES
            )));
        }
        crate::linalg::permutation_matrix(&self.perm).map_err(|e| Error::Config(e.to_string()))?;
        for t in &self.transforms {
            t.validate()?;
        }
        Ok(())
    }
}

impl Default for ReparamParams {
    fn default() -> Self {
        Self {
            map: Self::default_map(),
            sources: Self::default_sources(),
            perm: Self::default_perm(),
            transforms: Self::default_transforms(),
            n: default_n(),
        }
    }
}

/// Typed, validated parameters of one command.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Contrast(ContrastParams),
    Sweep(SweepConfig),
    Genericity(GenericityConfig),
    Spurious(SpuriousConfig),
    Reparam(ReparamParams),
}

fn typed<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))
}

impl Params {
    pub fn parse(command: Command, v: &Value) -> Result<Self> {
        Ok(match command {
            Command::Contrast => {
                let p: ContrastParams = typed(v)?;
                p.validate()?;
                Params::Contrast(p)
            }
            Command::Sweep => {
                let p: SweepConfig = typed(v)?;
                p.validate()?;
                Params::Sweep(p)
            }
            Command::Genericity => {
                let p: GenericityConfig = typed(v)?;
                p.validate()?;
                Params::Genericity(p)
            }
            Command::Spurious => {
                let p: SpuriousConfig = typed(v)?;
                p.validate()?;
                Params::Spurious(p)
            }
            Command::Reparam => {
                let p: ReparamParams = typed(v)?;
                p.validate()?;
                Params::Reparam(p)
            }
        })
    }

    /// Parameters with every default filled in.
    pub fn to_json(&self) -> Value {
        let v = match self {
            Params::Contrast(p) => serde_json::to_value(p),
            Params::Sweep(p) => serde_json::to_value(p),
            Params::Genericity(p) => serde_json::to_value(p),
            Params::Spurious(p) => serde_json::to_value(p),
            Params::Reparam(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }
}

/// One row of `contrast.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastRow {
    /// `matrix` or `map`.
    pub input: String,
    pub d: usize,
    pub m: usize,
    pub contrast: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub clamp_count: u64,
    pub cdf_clamps: u64,
    pub rejected: usize,
    /// Matrix input only.
    pub coherence: Option<f64>,
    /// Matrix input only, when `(d − 1)·coherence < 1`.
    pub hadamard_bound: Option<f64>,
}

fn contrast_rows(p: &ContrastParams, seed: u64) -> Result<Vec<ContrastRow>> {
    if let Some(j) = &p.matrix {
        let e = local_ima_contrast_detailed(j, RANK_TOL)?;
        let coherence = offdiag_coherence(j)?;
        let bound = hadamard_gap_upper_bound(j.cols(), coherence)
            .ok()
            .map(|b| b.value());
        return Ok(vec![ContrastRow {
            input: "matrix".into(),
            d: j.cols(),
            m: j.rows(),
            contrast: e.contrast.value(),
            stderr: 0.0,
            n_samples: 1,
            clamp_count: e.clamped as u64,
            cdf_clamps: 0,
            rejected: 0,
            coherence: Some(coherence),
            hadamard_bound: bound,
        }]);
    }
    let desc = p.map.as_ref().expect("validated");
    let sources = p.sources.as_ref().expect("validated");
    let map = desc.build(mix_seed(seed, 0))?;
    let e = estimate_global_contrast(map.as_ref(), sources, p.n, mix_seed(seed, 1))?;
    Ok(vec![ContrastRow {
        input: "map".into(),
        d: map.latent_dim(),
        m: map.observed_dim(),
        contrast: e.mean,
        stderr: e.stderr,
        n_samples: e.n_samples,
        clamp_count: e.clamp_count,
        cdf_clamps: e.cdf_clamps,
        rejected: e.rejected,
        coherence: None,
        hadamard_bound: None,
    }])
}

/// Files written by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    /// One-line summary for the terminal.
    pub summary: String,
}

enum Rows {
    Contrast(Vec<ContrastRow>),
    Sweep(Vec<SweepRow>),
    Genericity(Vec<GenericityRow>),
    Spurious(Vec<GapRow>),
    Reparam(Vec<ReparamReport>),
}

impl Rows {
    fn write(&self, path: &Path) -> Result<()> {
        match self {
            Rows::Contrast(r) => write_csv(path, r),
            Rows::Sweep(r) => write_csv(path, r),
            Rows::Genericity(r) => write_csv(path, r),
            Rows::Spurious(r) => write_csv(path, r),
            Rows::Reparam(r) => write_csv(path, r),
        }
    }
}

fn compute(params: &Params, seed: u64) -> Result<(Rows, String)> {
    Ok(match params {
        Params::Contrast(p) => {
            let rows = contrast_rows(p, seed)?;
            let s = format!(
                "contrast = {} (stderr {})",
                rows[0].contrast, rows[0].stderr
            );
            (Rows::Contrast(rows), s)
        }
        Params::Sweep(p) => {
            let rows = concentration_sweep(p, seed)?;
            let s = format!("{} sweep rows", rows.len());
            (Rows::Sweep(rows), s)
        }
        Params::Genericity(p) => {
            let rows = genericity_experiment(p, seed)?;
            let s = format!("{} genericity rows", rows.len());
            (Rows::Genericity(rows), s)
        }
        Params::Spurious(p) => {
            let rep = spurious_gap_experiment(p, seed)?;
            let s = format!("spurious gap {}", if rep.pass { "PASS" } else { "FAIL" });
            (Rows::Spurious(rep.rows), s)
        }
        Params::Reparam(p) => {
            let map = p.map.build(mix_seed(seed, 0))?;
            let rep = reparam_invariance_check(
                map,
                &p.sources,
                &p.perm,
                &p.transforms,
                p.n,
                mix_seed(seed, 1),
            )?;
            let s = format!(
                "difference {} vs combined stderr {} ({})",
                rep.difference,
                rep.combined_stderr,
                if rep.pass { "PASS" } else { "FAIL" }
            );
            (Rows::Reparam(vec![rep]), s)
        }
    })
}

/// Validates, runs the experiment on a pool of `threads` workers, and writes
/// `<command>.csv` and `manifest.json`. Nothing is written on failure.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let params = cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let start = Instant::now();
    let (rows, summary) = pool.install(|| compute(&params, cfg.master_seed))?;

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", cfg.command.name()));
    rows.write(&csv)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command.name().into(),
        master_seed: cfg.master_seed,
        threads: cfg.threads,
        output_dir: dir.to_string_lossy().into_owned(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        params: params.to_json(),
    };
    let manifest_path = dir.join("manifest.json");
    write_manifest(&manifest_path, &manifest)?;
    Ok(RunOutput {
        csv,
        manifest: manifest_path,
        summary,
    })
}

/// Exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Structured error report written to standard error.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    })
    .to_string()
}

fn defaults_help(params: Value) -> String {
    format!(
        "Parameters (the `params` object of the config file) and their defaults:\n{}",
        serde_json::to_string_pretty(&params).expect("json")
    )
}

fn contrast_help() -> String {
    format!(
        "{}\n\nGive either `matrix` (rows of an m×d matrix) or `map` (a map \
         descriptor with a `family` tag) together with `sources`.",
        defaults_help(
            serde_json::json!({"matrix": null, "map": null, "sources": null, "n": default_n()})
        )
    )
}

#[derive(Debug, Args)]
struct RunFlags {
    /// JSON run config; omitted parameters take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file and IMA_LAB_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [default: 1].
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory [default: out].
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Contrast of one matrix, or Monte Carlo global contrast of a map.
    #[command(after_help = contrast_help())]
    Contrast(RunFlags),
    /// Success fraction of random linear maps versus observed dimension.
    #[command(after_help = defaults_help(serde_json::to_value(SweepConfig::default()).unwrap()))]
    Sweep(RunFlags),
    /// Success fraction of sampled smoothed grid maps versus observed dimension.
    #[command(after_help = defaults_help(serde_json::to_value(GenericityConfig::default()).unwrap()))]
    Genericity(RunFlags),
    /// Contrast gap between a conformal map and its spurious solutions.
    #[command(after_help = defaults_help(serde_json::to_value(SpuriousConfig::default()).unwrap()))]
    Spurious(RunFlags),
    /// Paired contrast estimates before and after a permutation and element-wise reparametrization.
    #[command(after_help = defaults_help(serde_json::to_value(ReparamParams::default()).unwrap()))]
    Reparam(RunFlags),
}

#[derive(Debug, Parser)]
#[command(name = "ima-lab", version, about = "IMA contrast experiments")]
struct Cli {
    #[command(subcommand)]
    sub: Sub,
}

fn resolve(sub: Sub, env_seed: Option<String>) -> Result<RunConfig> {
    let (command, flags) = match sub {
        Sub::Contrast(f) => (Command::Contrast, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Genericity(f) => (Command::Genericity, f),
        Sub::Spurious(f) => (Command::Spurious, f),
        Sub::Reparam(f) => (Command::Reparam, f),
    };
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let cfg = RunConfig::from_json(&text)?;
            if cfg.command != command {
                return Err(Error::Config(format!(
                    "config is for `{}`, not `{}`",
                    cfg.command.name(),
                    command.name()
                )));
            }
            cfg
        }
        None => RunConfig::new(command),
    };
    match (flags.seed, env_seed) {
        (Some(s), _) => cfg.master_seed = s,
        (None, Some(s)) => {
            cfg.master_seed = s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV} is not a 64-bit integer: {s}")))?
        }
        (None, None) => {}
    }
    if let Some(t) = flags.threads {
        cfg.threads = t;
    }
    if let Some(d) = flags.output_dir {
        cfg.output_dir = d;
    }
    Ok(cfg)
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = resolve(cli.sub, std::env::var(SEED_ENV).ok()).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(out) => {
            println!("{}", out.summary);
            println!("wrote {} and {}", out.csv.display(), out.manifest.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
