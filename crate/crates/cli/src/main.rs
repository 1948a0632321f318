use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasilines::potential_file::PotentialFile;
use quasilines::presets::Preset;
use quasilines::topology::ClassifyBudget;
use quasilines_cli::config::{
    CensusStage, ClassifyStage, LevelsetStage, ScanStage, SimulateStage, BUNDLED,
};
use quasilines_cli::{
    exit, render, run, CliError, PlotKind, PlotSpec, RunConfig, RunManifest, RunOptions,
    StageConfig,
};

#[derive(Parser)]
#[command(
    name = "quasilines",
    version,
    about = "Level lines, stability zones and dynamics of quasiperiodic potentials"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = quasilines_cli::THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Preset name (regular-100, regular-111, chaotic) or a potential TOML file.
    #[arg(long, short)]
    potential: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Run directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Ignore a previous manifest in the run directory.
    #[arg(long)]
    fresh: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run config (TOML), a previous run's manifest.json, or `bundled:<name>`.
    Run {
        config: String,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        fresh: bool,
    },
    /// Potential value and gradient at points.
    Eval {
        #[arg(long, short)]
        potential: String,
        /// Point as `x,y`; repeatable.
        #[arg(long = "at", value_parser = parse_pair, required = true)]
        at: Vec<[f64; 2]>,
    },
    /// Level lines and sublevel region at one level.
    Levelset {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 4.0)]
        window_periods: f64,
        #[arg(long, default_value_t = quasilines::levelset::DEFAULT_CELLS_PER_PERIOD)]
        cells_per_period: usize,
    },
    /// Open-line interval, zone label and verdict.
    Classify {
        #[command(flatten)]
        common: Common,
        /// TOML file of budget overrides.
        #[arg(long)]
        budget: Option<PathBuf>,
    },
    /// Zone map over embedding directions of the symmetric three-wave family.
    ScanSphere {
        #[arg(long, default_value_t = 3)]
        level: u32,
        /// `scan`, `full`, or a TOML file of budget overrides.
        #[arg(long, default_value = "scan")]
        budget: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
        /// Extra direction `nx,ny,nz`; repeatable.
        #[arg(long, value_parser = parse_triple)]
        extra: Vec<[f64; 3]>,
        #[arg(long, default_value_t = 8)]
        chunk: usize,
        #[arg(long)]
        fresh: bool,
    },
    /// Microcanonical ensemble with per-trajectory regime verdicts.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        particles: usize,
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
        #[arg(long, default_value_t = 10)]
        stride: usize,
        #[arg(long, default_value_t = quasilines::dynamics::DT_COEFFICIENT)]
        dt_coefficient: f64,
        #[arg(long, default_value_t = 10.0)]
        window_periods: f64,
        /// Zone direction `lx,ly` for anisotropic diffusion constants.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        reference: Option<[f64; 2]>,
        #[arg(long, default_value_t = 1)]
        save_trajectories: usize,
    },
    /// Histogram of ballistic directions.
    Census {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        particles: usize,
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
    },
    /// SVG from an emitted data file.
    Render {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 600.0)]
        width: f64,
        #[arg(long, default_value_t = 600.0)]
        height: f64,
        /// `x_min,x_max,y_min,y_max`.
        #[arg(long, value_parser = parse_quad, allow_hyphen_values = true)]
        viewport: Option<[f64; 4]>,
    },
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|_| format!("expected {N} comma-separated numbers"))
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    parse_floats(s)
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    parse_floats(s)
}

fn parse_quad(s: &str) -> Result<[f64; 4], String> {
    parse_floats(s)
}

fn potential_source(s: &str) -> Result<PotentialFile, CliError> {
    if Preset::from_name(s).is_some() {
        return Ok(PotentialFile {
            preset: Some(s.to_string()),
            ..Default::default()
        });
    }
    PotentialFile::read(Path::new(s)).map_err(|e| CliError::ConfigInvalid {
        field: "potential".into(),
        message: e.to_string(),
    })
}

fn single_stage(
    common: &Common,
    stage: StageConfig,
) -> Result<(RunConfig, PathBuf, bool), CliError> {
    let cfg = RunConfig {
        schema_version: quasilines_cli::SCHEMA_VERSION,
        seed: common.seed,
        potential: potential_source(&common.potential)?,
        stages: vec![stage],
    };
    Ok((cfg, common.out.clone(), common.fresh))
}

fn load_config(src: &str) -> Result<RunConfig, CliError> {
    if let Some(name) = src.strip_prefix("bundled:") {
        return RunConfig::bundled(name).ok_or_else(|| CliError::ConfigInvalid {
            field: "config".into(),
            message: format!(
                "no bundled config `{name}`; available: {}",
                BUNDLED.iter().map(|b| b.0).collect::<Vec<_>>().join(", ")
            ),
        });
    }
    let path = Path::new(src);
    if !path.is_file() {
        return Err(CliError::ConfigInvalid {
            field: "config".into(),
            message: format!("{src}: no such file"),
        });
    }
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(RunManifest::read(path)?.config);
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigInvalid {
        field: "config".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    RunConfig::parse(&text)
}

fn load_budget(src: &str) -> Result<ClassifyBudget, CliError> {
    match src {
        "scan" => Ok(ClassifyBudget::scan()),
        "full" => Ok(ClassifyBudget::default()),
        path => {
            let path = Path::new(path);
            let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigInvalid {
                field: "budget".into(),
                message: format!("{}: {e}", path.display()),
            })?;
            toml::from_str(&text).map_err(|e| CliError::ConfigInvalid {
                field: "budget".into(),
                message: e.message().to_string(),
            })
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (cfg, out, fresh) = match cli.command {
        Command::Run { config, out, fresh } => (load_config(&config)?, out, fresh),
        Command::Eval { potential, at } => {
            let p = potential_source(&potential)?
                .build()
                .map_err(|e| CliError::ConfigInvalid {
                    field: "potential".into(),
                    message: e.to_string(),
                })?;
            println!("x,y,V,dVdx,dVdy");
            for r in at {
                let (v, g) = p.value_and_gradient(r);
                println!("{},{},{},{},{}", r[0], r[1], v, g[0], g[1]);
            }
            return Ok(exit::SUCCESS);
        }
        Command::Levelset {
            common,
            eps,
            window_periods,
            cells_per_period,
        } => single_stage(
            &common,
            StageConfig::Levelset(LevelsetStage {
                eps,
                window_periods,
                cells_per_period,
            }),
        )?,
        Command::Classify { common, budget } => {
            let budget = budget
                .map(|b| load_budget(&b.to_string_lossy()))
                .transpose()?
                .unwrap_or_default();
            single_stage(&common, StageConfig::Classify(ClassifyStage { budget }))?
        }
        Command::ScanSphere {
            level,
            budget,
            seed,
            out,
            extra,
            chunk,
            fresh,
        } => {
            let cfg = RunConfig {
                schema_version: quasilines_cli::SCHEMA_VERSION,
                seed,
                // Scans build their own potentials; this entry only satisfies the schema.
                potential: PotentialFile {
                    preset: Some("regular-100".into()),
                    ..Default::default()
                },
                stages: vec![StageConfig::ScanSphere(ScanStage {
                    level,
                    budget: load_budget(&budget)?,
                    extra,
                    chunk,
                })],
            };
            (cfg, out, fresh)
        }
        Command::Simulate {
            common,
            eps,
            particles,
            steps,
            stride,
            dt_coefficient,
            window_periods,
            reference,
            save_trajectories,
        } => single_stage(
            &common,
            StageConfig::Simulate(SimulateStage {
                eps,
                particles,
                steps,
                stride,
                window_periods,
                dt_coefficient,
                mass: 1.0,
                reference_direction: reference,
                save_trajectories,
            }),
        )?,
        Command::Census {
            common,
            eps,
            particles,
            steps,
        } => {
            let d = quasilines::dynamics::CensusOptions::default();
            single_stage(
                &common,
                StageConfig::Census(CensusStage {
                    eps,
                    particles,
                    steps,
                    stride: d.sample_stride,
                    window_periods: d.window_periods,
                    dt_coefficient: d.dt_coefficient,
                    mass: d.mass,
                }),
            )?
        }
        Command::Render {
            kind,
            data,
            out,
            width,
            height,
            viewport,
        } => {
            let svg = render(
                &PlotSpec {
                    kind,
                    width,
                    height,
                    viewport,
                },
                &data,
            )?;
            quasilines_cli::io::write_atomic(&out, svg.as_bytes())?;
            return Ok(exit::SUCCESS);
        }
    };
    let outcome = run(&cfg, &out, RunOptions { fresh })?;
    for s in &outcome.manifest.stages {
        let reused = if outcome.reused.contains(&s.index) {
            " (reused)"
        } else {
            ""
        };
        println!(
            "stage {} {}: {:?}{reused} {}",
            s.index,
            s.kind,
            s.status,
            s.message.as_deref().unwrap_or("")
        );
    }
    println!("run directory: {}", outcome.dir.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(exit::CONFIG as u8);
        }
    }
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
