use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use helixqd::landscape::{asymptotic_ratio, bifurcation_ratios, find_extrema};
use helixqd::runner::{self, output, ExperimentConfig, SweepSpec};
use helixqd::spectral::{DEFAULT_ORDER, DEFAULT_POINTS};
use helixqd::{Error, HelixParams, RegularizedPotential, Result};

#[derive(Parser)]
#[command(
    name = "helixqd",
    version,
    about = "Quantum dynamics of two like charges on a helix"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Helix {
    /// Pitch.
    #[arg(long)]
    h: f64,
    /// Radius.
    #[arg(long = "R", alias = "r")]
    r: f64,
    /// Particle mass.
    #[arg(long = "M", alias = "mass", default_value_t = 1.0)]
    mass: f64,
}

impl Helix {
    fn params(&self) -> Result<HelixParams> {
        HelixParams::new(self.h, self.r, self.mass)
    }
}

#[derive(Args)]
struct Source {
    /// TOML experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset (see `helixqd preset`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory [default: $HELIXQD_OUT/<name>].
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Source {
    /// Loaded config plus a name for the default output directory.
    fn load(&self) -> Result<(ExperimentConfig, String)> {
        let (mut config, name) = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                let name = path
                    .file_stem()
                    .map_or("run".into(), |s| s.to_string_lossy().into_owned());
                (runner::parse_config(&text)?, name)
            }
            (None, Some(p)) => (runner::preset(p)?, p.clone()),
            (None, None) => {
                return Err(Error::Config(
                    "need --config <path> or --preset <name>".into(),
                ))
            }
        };
        if let Some(out) = &self.out {
            config.output.directory = Some(out.clone());
        }
        Ok((config, name))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print V(s) and its regularized form on a uniform grid as CSV.
    Potential {
        #[command(flatten)]
        helix: Helix,
        #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
        s_min: f64,
        #[arg(long, default_value_t = 400.0)]
        s_max: f64,
        #[arg(long, default_value_t = 901)]
        n_points: usize,
        #[arg(long, default_value_t = helixqd::potential::DEFAULT_S_CUT)]
        s_cut: f64,
    },
    /// Print minima and maxima as CSV.
    Extrema {
        #[command(flatten)]
        helix: Helix,
    },
    /// Print the ratios h/R at which wells appear.
    Bifurcations {
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Print bound-state counts per well and one well's spectrum as CSV.
    Spectrum {
        #[command(flatten)]
        helix: Helix,
        /// 1-based well index, innermost = 1.
        #[arg(long, default_value_t = 1)]
        well: usize,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        n_points: usize,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
    /// Run a full experiment from a config file or preset.
    Propagate {
        #[command(flatten)]
        source: Source,
    },
    /// List presets, print one as TOML, or run it with --run.
    Preset {
        name: Option<String>,
        #[arg(long, requires = "name")]
        run: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one experiment per parameter value, concurrently.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// helix.ratio, helix.R, helix.h, mass, wavepacket.s0 or wavepacket.p0.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Extrema and wells only.
        #[arg(long)]
        landscape_only: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |e: std::io::Error| Error::Io {
        path: "<stdout>".into(),
        source: e,
    };
    match cli.command {
        Command::Potential {
            helix,
            s_min,
            s_max,
            n_points,
            s_cut,
        } => {
            let params = helix.params()?;
            let reg = RegularizedPotential::helical(params, s_cut)?;
            let grid = helixqd::tdse::make_grid(s_min, s_max, n_points)?;
            writeln!(out, "s,V,V_reg").map_err(io)?;
            for s in grid.coords() {
                let v = params.potential(s).unwrap_or(f64::INFINITY);
                writeln!(
                    out,
                    "{},{},{}",
                    output::fmt(s),
                    output::fmt(v),
                    output::fmt(reg.value(s))
                )
                .map_err(io)?;
            }
        }
        Command::Extrema { helix } => {
            let extrema = find_extrema(&helix.params()?, f64::INFINITY);
            output::write_extrema(&mut out, &extrema).map_err(io)?;
        }
        Command::Bifurcations { n } => {
            writeln!(out, "wells,ratio,asymptotic").map_err(io)?;
            for (m, r) in bifurcation_ratios(n).into_iter().enumerate() {
                let approx = asymptotic_ratio(2 * m + 1);
                writeln!(out, "{},{},{}", m + 1, output::fmt(r), output::fmt(approx))
                    .map_err(io)?;
            }
        }
        Command::Spectrum {
            helix,
            well,
            n_points,
            order,
        } => {
            let params = helix.params()?;
            let spectra = helixqd::spectral::spectra_per_well(&params, n_points, order)?;
            let counts: Vec<String> = spectra.iter().map(|s| s.bound_count.to_string()).collect();
            eprintln!("bound states per well: [{}]", counts.join(", "));
            let spectrum = spectra.get(well.wrapping_sub(1)).ok_or_else(|| {
                Error::Config(format!("--well {well} but only {} wells", spectra.len()))
            })?;
            output::write_spectrum(&mut out, spectrum).map_err(io)?;
        }
        Command::Propagate { source } => {
            let (mut config, name) = source.load()?;
            config.output.directory = Some(runner::output_dir(&config, &name));
            report(&runner::run_experiment(&config)?);
        }
        Command::Preset { name: None, .. } => {
            for p in runner::list_presets() {
                writeln!(out, "{:<6} {}", p.name, p.caption).map_err(io)?;
            }
        }
        Command::Preset {
            name: Some(name),
            run,
            out: dir,
        } => {
            let mut config = runner::preset(&name)?;
            if run {
                config.output.directory =
                    Some(dir.unwrap_or_else(|| runner::default_output_root().join(&name)));
                report(&runner::run_experiment(&config)?);
            } else {
                write!(out, "{}", runner::to_toml(&config)?).map_err(io)?;
            }
        }
        Command::Sweep {
            source,
            param,
            values,
            landscape_only,
            jobs,
        } => {
            let (base, name) = source.load()?;
            let root = source
                .out
                .clone()
                .unwrap_or_else(|| runner::default_output_root().join(format!("{name}-sweep")));
            let spec = SweepSpec {
                parameter: param.parse()?,
                values,
                landscape_only,
            };
            let outcomes = runner::sweep(&base, &spec, &root, jobs)?;
            for o in &outcomes {
                match &o.result {
                    Ok(m) => writeln!(
                        out,
                        "{} = {}: {} wells",
                        spec.parameter.name(),
                        o.value,
                        m.well_count()
                    ),
                    Err(e) => writeln!(out, "{} = {}: failed: {e}", spec.parameter.name(), o.value),
                }
                .map_err(io)?;
            }
            eprintln!("index written to {}", root.join("index.csv").display());
        }
    }
    Ok(())
}

fn report(manifest: &runner::RunManifest) {
    eprintln!(
        "{} wells; output in {} ({:.1} s)",
        manifest.well_count(),
        manifest.output_directory.display(),
        manifest.wall_clock_seconds
    );
    if let Some(p) = &manifest.propagation {
        eprintln!(
            "norm drift {:.2e}, relative energy drift {:.2e}",
            p.norm_drift, p.relative_energy_drift
        );
        if let Some(t) = p.contaminated_at {
            eprintln!("warning: packet reached the grid edge at t = {t}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream closed early, e.g. `| head`
        Err(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
