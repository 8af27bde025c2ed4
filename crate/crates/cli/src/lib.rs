//! Command-line front end for the STAR-RIS NOMA uplink simulator.

pub mod config;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use starnoma_core::experiments::Accumulator;
use starnoma_core::{derive_geometry, recipe, run_sweep, xi_factor, SceneConfig, Side, SweepSpec};
use thiserror::Error;

pub use config::{load_config, parse_config, Config, ConfigError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid run request: {0}")]
    Usage(String),
    #[error(transparent)]
    Spec(starnoma_core::Error),
    #[error("sweep failed: {0}")]
    Runtime(starnoma_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for failures at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Spec(_) => 2,
            CliError::Runtime(_) | CliError::Io { .. } => 3,
        }
    }
}

fn io_error(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// What to run and where to put it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub config: Option<PathBuf>,
    pub recipe: Option<String>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl RunManifest {
    fn load(&self) -> Result<Config, CliError> {
        Ok(match &self.config {
            Some(path) => load_config(path)?,
            None => Config::default(),
        })
    }

    /// The fully resolved sweeps: recipe presets adjusted by the config file,
    /// or the inline sweep the config file defines, then CLI overrides.
    pub fn resolve(&self) -> Result<Vec<SweepSpec>, CliError> {
        let config = self.load()?;
        let mut specs = match (&self.recipe, config.defines_sweep()) {
            (Some(_), true) => {
                return Err(CliError::Usage(
                    "give either --recipe or a config that sets `axis`, not both".into(),
                ))
            }
            (Some(name), false) => {
                let mut specs = recipe(name).map_err(CliError::Spec)?.series;
                for spec in &mut specs {
                    config.apply(spec);
                }
                specs
            }
            (None, true) => vec![config.sweep()],
            (None, false) => {
                return Err(CliError::Usage(
                    "nothing to run: pass --recipe NAME or a config that sets `axis` and `axis_values`".into(),
                ))
            }
        };
        for spec in &mut specs {
            if let Some(seed) = self.seed {
                spec.seed = seed;
            }
            if let Some(trials) = self.trials {
                spec.trials = trials;
            }
            spec.validate().map_err(CliError::Spec)?;
        }
        Ok(specs)
    }
}

/// Runs every resolved series, writing `<name>.csv` and `<name>.meta` into
/// the output directory and a deviation summary to `log`.
pub fn run(manifest: &RunManifest, log: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let specs = manifest.resolve()?;
    fs::create_dir_all(&manifest.out).map_err(io_error(format!("creating {}", manifest.out.display())))?;
    let mut written = Vec::with_capacity(specs.len());
    let mut lines = Vec::with_capacity(specs.len());
    for spec in &specs {
        let rows = run_sweep(spec).map_err(CliError::Runtime)?;
        output::write_series(&manifest.out, spec, &rows)
            .map_err(io_error(format!("writing series {}", spec.name)))?;
        written.push(manifest.out.join(format!("{}.csv", spec.name)));
        let mut stderr = Accumulator::default();
        rows.iter().for_each(|r| stderr.push(r.mc_stderr));
        lines.push((spec.name.clone(), rows.len(), output::max_relative_deviation(&rows), stderr.mean()));
    }
    let width = lines.iter().map(|l| l.0.len()).max().unwrap_or(6).max(6);
    let report = |log: &mut dyn Write| -> std::io::Result<()> {
        writeln!(log, "{:<width$}  {:>5}  {:>14}  {:>14}", "series", "rows", "max_rel_dev", "mean_stderr")?;
        for (name, n, dev, se) in &lines {
            let dev = dev.map_or_else(|| "-".to_string(), |d| format!("{d:.3e}"));
            writeln!(log, "{name:<width$}  {n:>5}  {dev:>14}  {se:>14.3e}")?;
        }
        Ok(())
    };
    report(log).map_err(io_error("writing summary"))?;
    Ok(written)
}

/// Dry run: prints the derived geometry of every resolved scene.
pub fn validate(manifest: &RunManifest, log: &mut dyn Write) -> Result<(), CliError> {
    let scenes: Vec<(String, SceneConfig)> = if manifest.recipe.is_some() || manifest.load()?.defines_sweep() {
        manifest.resolve()?.into_iter().map(|s| (s.name, s.scene)).collect()
    } else {
        vec![("scene".to_string(), manifest.load()?.scene())]
    };
    for (name, scene) in &scenes {
        describe(name, scene, log)?;
    }
    Ok(())
}

fn describe(name: &str, scene: &SceneConfig, log: &mut dyn Write) -> Result<(), CliError> {
    let geom = derive_geometry(scene).map_err(CliError::Spec)?;
    let db = |x: f64| 10.0 * x.log10();
    let deg = f64::to_degrees;
    let mut text = format!(
        "[{name}]\n  d_a = {:.3} m  path loss {:.2} dB\n",
        geom.d_a,
        db(geom.rho_a)
    );
    for side in Side::BOTH {
        let a = geom.angles(side);
        text += &format!(
            "  {}: N = {}  d = {:.3} m  path loss {:.2} dB  arrival ({:.2}°, {:.2}°)  departure ({:.2}°, {:.2}°)\n",
            side.label(),
            scene.n_elements(side),
            geom.distance(side),
            db(geom.path_loss(side)),
            deg(a.arrival.0),
            deg(a.arrival.1),
            deg(a.departure.0),
            deg(a.departure.1),
        );
    }
    text += &format!(
        "  phase noise {:?} σ² = {}  ξ = {:.6}\n",
        scene.phase_noise.kind(),
        scene.phase_noise.power(),
        xi_factor(&scene.phase_noise)
    );
    log.write_all(text.as_bytes()).map_err(io_error("writing report"))
}
