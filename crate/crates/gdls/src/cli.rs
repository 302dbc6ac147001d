//! Command-line front end.
//!
//! Every parameter resolves through layered `key = value` sets: the
//! command's natural defaults, then `--preset`, then `--config`, then flags.
//! The merged set is echoed into the header of every output file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gdls_core::model::{
    add_noise, synthesize, ComplexAmplitudes, FrequencyVector, TomoGeometry, C64, SPEED_OF_LIGHT,
};
use gdls_core::solvers::{gdls, omp};

use crate::bench::{self, ExperimentGrid, PhaseMode, Scenario, SeriesResult, SolverSettings};
use crate::error::{Error, Result};
use crate::io::{self, KeyValues, Provenance};
use crate::tomosar::{self, BuildingSpec, CellGrid, Method, Sparsity};

#[derive(Debug, Parser)]
#[command(name = "gdls", version, about = "Gridless single-snapshot line-spectrum estimation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Four-source line spectrum, N = 16, 20 dB, 1024-point grid.
    Table1,
    /// Ku-band 8-baseline stack over a 50 m building, 25 dB.
    Table3,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Flat `key = value` file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, env = "GDLS_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// OMP dictionary size M.
    #[arg(long, global = true)]
    pub grid_size: Option<usize>,
    /// Number of sources L.
    #[arg(long, global = true)]
    pub sparsity: Option<usize>,
    /// SNR in dB; `inf` for noiseless.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Initial gradient step (default 0.1 / N).
    #[arg(long, global = true)]
    pub step_init: Option<f64>,
    #[arg(long, global = true)]
    pub step_min: Option<f64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate frequencies and amplitudes of one snapshot.
    Estimate(EstimateArgs),
    /// Monte-Carlo experiment sweeps written as CSV.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Simulated layover scene, stack inversion and scoring.
    #[command(subcommand)]
    Tomosar(TomoCommand),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Snapshot text file (`re,im` per line); without it the configured
    /// scenario is synthesized and corrupted at `snr_db`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub frequencies: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Zero,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Omp,
    Gdls,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Matched MSE of OMP and GDLS against SNR, with the CRB.
    MseSnr {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        snr_list: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Two-source success rate against separation.
    Resolution {
        #[arg(long, value_delimiter = ',')]
        separations: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Success rate against the spread of amplitude magnitudes.
    Amplitude {
        #[arg(long, value_delimiter = ',')]
        stds: Option<Vec<f64>>,
        #[arg(long)]
        amplitude_mean: Option<f64>,
        #[arg(long, value_enum)]
        phase: Option<PhaseArg>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Wall-clock scaling with the number of samples.
    Runtime {
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TomoCommand {
    /// Writes scene truth and the per-cell stack.
    Simulate {
        #[arg(long)]
        height_m: Option<f64>,
        #[arg(long)]
        width_m: Option<f64>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        /// Synthesize without noise.
        #[arg(long)]
        noiseless: bool,
    },
    /// Inverts a stack into a point cloud.
    Invert {
        /// Stack file (default `<out-dir>/stack.bin`).
        #[arg(long)]
        stack: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "gdls")]
        method: MethodArg,
        /// Scene truth supplying per-cell sparsity when `--sparsity` is
        /// absent (default `<out-dir>/scene.csv`).
        #[arg(long)]
        scene: Option<PathBuf>,
    },
    /// RMSE of a point cloud against scene truth.
    Score {
        /// Point cloud CSV (default `<out-dir>/cloud_gdls.csv`).
        #[arg(long)]
        cloud: Option<PathBuf>,
        /// Scene truth CSV (default `<out-dir>/scene.csv`).
        #[arg(long)]
        scene: Option<PathBuf>,
    },
}

const KNOWN_KEYS: &[&str] = &[
    "samples",
    "frequencies",
    "amplitudes",
    "phases_rad",
    "snr_db",
    "seed",
    "threads",
    "grid_size",
    "sparsity",
    "step_init",
    "step_min",
    "step_decay",
    "max_iters",
    "trials",
    "snr_list",
    "separations",
    "stds",
    "amplitude_mean",
    "phase_mode",
    "epsilon",
    "sizes",
    "frequency_hz",
    "baseline_spacing_m",
    "num_baselines",
    "range_m",
    "incident_angle_deg",
    "building_height_m",
    "building_width_m",
    "building_length_m",
    "rows",
    "cols",
];

fn layer(pairs: &[(&str, &str)]) -> KeyValues {
    let mut kv = KeyValues::default();
    for (k, v) in pairs {
        kv.set(k, *v);
    }
    kv
}

fn solver_defaults() -> Vec<(&'static str, &'static str)> {
    vec![
        ("grid_size", "1024"),
        ("step_init", "auto"),
        ("step_min", "1e-9"),
        ("step_decay", "0.5"),
        ("max_iters", "5000"),
        ("seed", "1"),
    ]
}

fn preset_layer(p: Preset) -> KeyValues {
    let mut pairs = match p {
        Preset::Table1 => vec![
            ("samples", "16"),
            ("frequencies", "0.35,0.1,0.67,0.92"),
            ("amplitudes", "12,8,10,11"),
            ("snr_db", "20"),
        ],
        Preset::Table3 => vec![
            ("frequency_hz", "14.25e9"),
            ("baseline_spacing_m", "0.084"),
            ("num_baselines", "8"),
            ("range_m", "500"),
            ("incident_angle_deg", "45"),
            ("snr_db", "25"),
            ("building_height_m", "50"),
            ("building_width_m", "60"),
            ("building_length_m", "20"),
            ("rows", "50"),
            ("cols", "20"),
        ],
    };
    pairs.extend(solver_defaults());
    layer(&pairs)
}

/// Keys that only shape a simulated scene. Inversion and scoring read the
/// geometry from their input files, so these are left out of their headers.
const SCENE_KEYS: [&str; 11] = [
    "frequency_hz",
    "baseline_spacing_m",
    "num_baselines",
    "range_m",
    "incident_angle_deg",
    "snr_db",
    "building_height_m",
    "building_width_m",
    "building_length_m",
    "rows",
    "cols",
];

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn overlay(base: &mut KeyValues, top: &KeyValues) {
    for (k, v) in top.entries() {
        base.set(k, v.clone());
    }
}

/// Natural defaults of a command: preset set plus sweep-specific keys.
fn natural_layer(cmd: &Command) -> KeyValues {
    let mut kv = match cmd {
        Command::Tomosar(_) => preset_layer(Preset::Table3),
        _ => preset_layer(Preset::Table1),
    };
    if let Command::Bench(b) = cmd {
        match b {
            BenchCommand::MseSnr { .. } => {
                kv.set("snr_list", join(&(0..=8).map(|k| 5 * k).collect::<Vec<_>>()));
                kv.set("trials", "200");
            }
            BenchCommand::Resolution { .. } => {
                kv.set("separations", join(&(2..=20).map(|k| k as f64 / 200.0).collect::<Vec<_>>()));
                kv.set("trials", "200");
                kv.set("epsilon", "0.01");
            }
            BenchCommand::Amplitude { .. } => {
                kv.set("stds", "0,1,2,3,4,5,6");
                kv.set("amplitude_mean", "10");
                kv.set("phase_mode", "random");
                kv.set("trials", "200");
                kv.set("epsilon", "0.005");
            }
            BenchCommand::Runtime { .. } => {
                kv.set("sizes", "16,32,64,128,256");
                kv.set("trials", "50");
            }
        }
    }
    kv
}

/// Flags explicitly given on the command line, as key = value pairs.
fn flag_layer(cli: &Cli) -> KeyValues {
    let g = &cli.global;
    let mut kv = KeyValues::default();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.set(k, v);
        }
    };
    put("seed", g.seed.map(|v| v.to_string()));
    put("grid_size", g.grid_size.map(|v| v.to_string()));
    put("sparsity", g.sparsity.map(|v| v.to_string()));
    put("snr_db", g.snr_db.map(|v| v.to_string()));
    put("step_init", g.step_init.map(|v| v.to_string()));
    put("step_min", g.step_min.map(|v| v.to_string()));
    put("max_iters", g.max_iters.map(|v| v.to_string()));
    match &cli.command {
        Command::Estimate(a) => {
            put("samples", a.samples.map(|v| v.to_string()));
            put("frequencies", a.frequencies.as_deref().map(join));
            put("amplitudes", a.amplitudes.as_deref().map(join));
        }
        Command::Bench(b) => match b {
            BenchCommand::MseSnr { snr_list, trials } => {
                put("snr_list", snr_list.as_deref().map(join));
                put("trials", trials.map(|v| v.to_string()));
            }
            BenchCommand::Resolution {
                separations,
                trials,
                epsilon,
            } => {
                put("separations", separations.as_deref().map(join));
                put("trials", trials.map(|v| v.to_string()));
                put("epsilon", epsilon.map(|v| v.to_string()));
            }
            BenchCommand::Amplitude {
                stds,
                amplitude_mean,
                phase,
                trials,
                epsilon,
            } => {
                put("stds", stds.as_deref().map(join));
                put("amplitude_mean", amplitude_mean.map(|v| v.to_string()));
                put(
                    "phase_mode",
                    phase.map(|p| if p == PhaseArg::Zero { "zero" } else { "random" }.to_string()),
                );
                put("trials", trials.map(|v| v.to_string()));
                put("epsilon", epsilon.map(|v| v.to_string()));
            }
            BenchCommand::Runtime { sizes, trials } => {
                put("sizes", sizes.as_deref().map(join));
                put("trials", trials.map(|v| v.to_string()));
            }
        },
        Command::Tomosar(TomoCommand::Simulate {
            height_m,
            width_m,
            rows,
            cols,
            noiseless,
        }) => {
            put("building_height_m", height_m.map(|v| v.to_string()));
            put("building_width_m", width_m.map(|v| v.to_string()));
            put("rows", rows.map(|v| v.to_string()));
            put("cols", cols.map(|v| v.to_string()));
            if *noiseless {
                put("snr_db", Some("inf".into()));
            }
        }
        Command::Tomosar(_) => {}
    }
    kv
}

/// Effective configuration of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub values: KeyValues,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    source: String,
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let mut values = natural_layer(&cli.command);
        if let Some(p) = cli.global.preset {
            overlay(&mut values, &preset_layer(p));
        }
        let mut source = "defaults".to_string();
        if let Some(path) = &cli.global.config {
            let name = path.display().to_string();
            let file = KeyValues::parse(&io::read_text(path)?, &name)?;
            if let Some((k, _)) = file.entries().iter().find(|(k, _)| !KNOWN_KEYS.contains(&k.as_str())) {
                return Err(Error::Config(format!("{name}: unknown key `{k}`")));
            }
            overlay(&mut values, &file);
            source = name;
        }
        overlay(&mut values, &flag_layer(cli));
        let threads = match cli.global.threads {
            Some(t) => Some(t),
            None => values.parse_opt("threads", &source)?,
        };
        if threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let seed = values.require("seed", &source)?;
        let mut echoed = KeyValues::default();
        for (k, v) in values.entries() {
            if k != "threads" && k != "seed" {
                echoed.set(k, v.clone());
            }
        }
        Ok(Self {
            values: echoed,
            seed,
            threads,
            out_dir: cli.global.out_dir.clone(),
            source,
        })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.values.require(key, &self.source)
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.values
            .parse_list(key, &self.source)?
            .ok_or_else(|| Error::Config(format!("{}: missing `{key}`", self.source)))
    }

    fn provenance(&self, command: &str) -> Provenance {
        Provenance {
            command: command.to_string(),
            seed: self.seed,
            config: self.values.clone(),
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn snr_db(&self) -> Result<f64> {
        let v: f64 = self.get("snr_db")?;
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::Config("snr_db must be a number or inf".into()));
        }
        Ok(v)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let freqs: Vec<f64> = self.list("frequencies")?;
        let mags: Vec<f64> = self.list("amplitudes")?;
        if freqs.len() != mags.len() {
            return Err(Error::Config(format!(
                "{} frequencies but {} amplitudes",
                freqs.len(),
                mags.len()
            )));
        }
        let amps = match self.values.parse_list::<f64>("phases_rad", &self.source)? {
            None => ComplexAmplitudes::from_real(&mags),
            Some(ph) if ph.len() == mags.len() => {
                ComplexAmplitudes::new(mags.iter().zip(&ph).map(|(&m, &p)| C64::from_polar(m, p)).collect())
            }
            Some(_) => return Err(Error::Config("phases_rad must match amplitudes in length".into())),
        };
        Ok(Scenario {
            frequencies: FrequencyVector::new(freqs)?,
            amplitudes: amps,
            samples: self.get("samples")?,
            snr_db: self.snr_db()?,
        })
    }

    pub fn solver(&self) -> Result<SolverSettings> {
        let initial_step = match self.values.get("step_init") {
            Some("auto") | None => None,
            Some(_) => Some(self.get("step_init")?),
        };
        Ok(SolverSettings {
            grid_size: self.get("grid_size")?,
            initial_step,
            step_decay: self.get("step_decay")?,
            min_step: self.get("step_min")?,
            max_iterations: self.get("max_iters")?,
        })
    }

    fn sparsity(&self) -> Result<Option<usize>> {
        self.values.parse_opt("sparsity", &self.source)
    }

    pub fn geometry(&self) -> Result<TomoGeometry> {
        let hz: f64 = self.get("frequency_hz")?;
        if hz.is_nan() || hz <= 0.0 {
            return Err(Error::Config("frequency_hz must be positive".into()));
        }
        let deg: f64 = self.get("incident_angle_deg")?;
        Ok(TomoGeometry::new(
            SPEED_OF_LIGHT / hz,
            self.get("baseline_spacing_m")?,
            self.get("range_m")?,
            self.get("num_baselines")?,
            deg.to_radians(),
        )?)
    }

    pub fn building(&self) -> Result<BuildingSpec> {
        Ok(BuildingSpec {
            height_m: self.get("building_height_m")?,
            width_m: self.get("building_width_m")?,
            azimuth_start_m: 0.0,
            length_m: self.get("building_length_m")?,
        })
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::resolve(cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Estimate(a) => cmd_estimate(&cfg, a),
        Command::Bench(b) => cmd_bench(&cfg, b),
        Command::Tomosar(t) => cmd_tomosar(&cfg, t),
    })
}

fn cmd_estimate(cfg: &RunConfig, args: &EstimateArgs) -> Result<()> {
    let (y, input_label, default_l) = match &args.input {
        Some(path) => {
            let y = io::read_snapshot(path)?;
            let label = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            (y, label, None)
        }
        None => {
            let s = cfg.scenario()?;
            let x = synthesize(&s.frequencies, &s.amplitudes, s.samples)?;
            (add_noise(&x, s.snr_db, cfg.seed)?, "synthesized".to_string(), Some(s.sparsity()))
        }
    };
    let l = match (cfg.sparsity()?, default_l) {
        (Some(l), _) => l,
        (None, Some(l)) => l,
        (None, None) => cfg.list::<f64>("frequencies")?.len(),
    };
    let solver = cfg.solver()?;
    let init = omp(&y, &solver.omp_config(l))?;
    let mut gcfg = solver.gdls_config(y.len(), l);
    gcfg.record_trajectory = true;
    let result = gdls(&y, &init.frequencies, &gcfg)?;

    let mut prov = cfg.provenance("estimate");
    prov.config.set("input", input_label);
    prov.config.set("estimate_sparsity", l.to_string());
    io::write_estimate(&cfg.out("estimate.csv"), &result, &prov)?;
    io::write_trajectory(
        &cfg.out("estimate_trajectory.csv"),
        result.trajectory.as_deref().unwrap_or(&[]),
        &prov,
    )?;
    for (f, c) in result.frequencies.as_slice().iter().zip(result.amplitudes.as_slice()) {
        println!("{f:.12} {:.6} {:.6}", c.re, c.im);
    }
    Ok(())
}

fn write_series(cfg: &RunConfig, name: &str, command: &str, series: &SeriesResult) -> Result<PathBuf> {
    let path = cfg.out(name);
    let prov = cfg.provenance(command);
    io::write_file(&path, |w| {
        prov.write_header(w, "#")?;
        bench::write_series_csv(series, &[], w)
    })?;
    Ok(path)
}

fn cmd_bench(cfg: &RunConfig, b: &BenchCommand) -> Result<()> {
    let base = cfg.scenario()?;
    let trials: usize = cfg.get("trials")?;
    let make = |variable: &str, values: Vec<f64>| {
        let mut g = ExperimentGrid::new(variable, values, trials, base.clone(), cfg.seed);
        g.solver = cfg.solver()?;
        Ok::<_, Error>(g)
    };
    let path = match b {
        BenchCommand::MseSnr { .. } => {
            let g = make("snr_db", cfg.list("snr_list")?)?;
            write_series(cfg, "mse_snr.csv", "bench mse-snr", &bench::mse_vs_snr(&g)?)?
        }
        BenchCommand::Resolution { .. } => {
            let mut g = make("separation", cfg.list("separations")?)?;
            g.success_threshold = cfg.get("epsilon")?;
            write_series(cfg, "resolution.csv", "bench resolution", &bench::resolution_sweep(&g)?)?
        }
        BenchCommand::Amplitude { .. } => {
            let mut g = make("amplitude_std", cfg.list("stds")?)?;
            g.success_threshold = cfg.get("epsilon")?;
            let phase = match cfg.values.get("phase_mode") {
                Some("zero") => PhaseMode::Zero,
                Some("random") => PhaseMode::Random,
                other => return Err(Error::Config(format!("phase_mode must be zero or random, got {other:?}"))),
            };
            let series = bench::amplitude_sweep(&g, cfg.get("amplitude_mean")?, phase)?;
            write_series(cfg, &format!("amplitude_{}.csv", phase.name()), "bench amplitude", &series)?
        }
        BenchCommand::Runtime { .. } => {
            let sizes: Vec<usize> = cfg.list("sizes")?;
            let g = make("samples", sizes.iter().map(|&n| n as f64).collect())?;
            write_series(cfg, "runtime.csv", "bench runtime", &bench::runtime_sweep(&g)?)?
        }
    };
    println!("{}", path.display());
    Ok(())
}

fn tomo_snr(cfg: &RunConfig) -> Result<Option<f64>> {
    let v = cfg.snr_db()?;
    Ok(if v == f64::INFINITY { None } else { Some(v) })
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}

fn cmd_tomosar(cfg: &RunConfig, t: &TomoCommand) -> Result<()> {
    match t {
        TomoCommand::Simulate { .. } => {
            let geometry = cfg.geometry()?;
            let building = cfg.building()?;
            let grid = CellGrid::covering(&building, &geometry, cfg.get("rows")?, cfg.get("cols")?);
            let (scene, stack) = tomosar::simulate_scene(&geometry, &building, &grid, tomo_snr(cfg)?, cfg.seed)?;
            let prov = cfg.provenance("tomosar simulate");
            io::write_scene(&cfg.out("scene.csv"), &scene, &prov)?;
            io::write_stack(&cfg.out("stack.bin"), &stack, &prov)?;
            println!(
                "{} cells, {} in layover, ambiguity span {:.4} m",
                grid.len(),
                scene.layover_cells(),
                geometry.ambiguity_span()
            );
        }
        TomoCommand::Invert { stack, method, scene } => {
            let stack_path = stack.clone().unwrap_or_else(|| cfg.out("stack.bin"));
            let data = io::read_stack(&stack_path)?;
            let mut prov = cfg.provenance("tomosar invert");
            SCENE_KEYS.iter().for_each(|k| prov.config.remove(k));
            let sparsity = match cfg.sparsity()? {
                Some(l) => Sparsity::Uniform(l),
                None => {
                    let scene_path = scene.clone().unwrap_or_else(|| cfg.out("scene.csv"));
                    let truth = io::read_scene(&scene_path)?;
                    if truth.grid.len() != data.grid.len() {
                        return Err(Error::Config(format!(
                            "{}: scene raster does not match the stack",
                            scene_path.display()
                        )));
                    }
                    prov.config.set("sparsity_source", file_label(&scene_path));
                    Sparsity::PerCell(truth.sparsity())
                }
            };
            let method = match method {
                MethodArg::Omp => Method::Omp,
                MethodArg::Gdls => Method::Gdls,
            };
            prov.config.set("input", file_label(&stack_path));
            prov.config.set("method", method.name());
            let start = Instant::now();
            let (cloud, report) = tomosar::invert_stack(&data, method, &sparsity, &cfg.solver()?)?;
            let wall = start.elapsed().as_secs_f64();
            let name = method.name();
            io::write_point_cloud(&cfg.out(&format!("cloud_{name}.csv")), &cloud, &prov)?;
            io::write_ply(&cfg.out(&format!("cloud_{name}.ply")), &cloud, &prov)?;
            io::write_file(&cfg.out(&format!("invert_{name}_report.txt")), |w| {
                prov.write_header(w, "#")?;
                writeln!(w, "cells = {}", report.cells)?;
                writeln!(w, "points = {}", cloud.points.len())?;
                writeln!(w, "dropped_cells = {}", report.dropped.len())?;
                for d in &report.dropped {
                    writeln!(w, "dropped = {},{}: {}", d.row, d.col, d.reason)?;
                }
                Ok(())
            })?;
            io::write_file(&cfg.out(&format!("invert_{name}_timing.txt")), |w| {
                prov.write_header(w, "#")?;
                writeln!(w, "wall_seconds = {wall}")
            })?;
            println!(
                "{} points, {} dropped cells, {wall:.3} s",
                cloud.points.len(),
                report.dropped.len()
            );
        }
        TomoCommand::Score { cloud, scene } => {
            let cloud_path = cloud.clone().unwrap_or_else(|| cfg.out("cloud_gdls.csv"));
            let scene_path = scene.clone().unwrap_or_else(|| cfg.out("scene.csv"));
            let est = io::read_point_cloud(&cloud_path)?;
            let truth = io::read_scene(&scene_path)?;
            let score = tomosar::score_cloud(&est, &truth)?;
            let mut prov = cfg.provenance("tomosar score");
            prov.config = KeyValues::default();
            prov.config.set("cloud", file_label(&cloud_path));
            prov.config.set("scene", file_label(&scene_path));
            let stem = cloud_path
                .file_stem()
                .map_or_else(|| "cloud".to_string(), |s| s.to_string_lossy().into_owned());
            io::write_file(&cfg.out(&format!("{stem}_score.txt")), |w| {
                prov.write_header(w, "#")?;
                writeln!(w, "rmse_m = {}", bench::format_float(score.rmse_m))?;
                writeln!(w, "matched_pairs = {}", score.matched_pairs)?;
                writeln!(w, "dropped_cells = {}", score.dropped_cells)?;
                writeln!(w, "fraction_within_1mm = {}", bench::format_float(score.fraction_within(1e-3)))
            })?;
            println!("rmse_m = {:.6}", score.rmse_m);
        }
    }
    Ok(())
}
