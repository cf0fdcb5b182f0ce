//! Command-line front end for synthgeom: property suites, reports and SVG
//! figures, all configured by a JSON scene spec.

pub mod export;
pub mod render;
pub mod report;
pub mod spec;
pub mod suites;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::spec::{Format, RenderTarget, SceneSpec, SpecError, Suite};

/// Default output directory when neither `--out` nor the spec names a path.
pub const OUT_DIR_ENV: &str = "SYNTHGEOM_OUT_DIR";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "synthgeom", version, about = "Checks and draws constructions in straight planes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Flags {
    /// Scene spec (JSON); flags below override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub depth: Option<u32>,
    /// Number of random cases.
    #[arg(long)]
    pub cases: Option<u64>,
    /// Output file; defaults to `$SYNTHGEOM_OUT_DIR/<name>.<ext>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Desargues verdicts on perspective and non-perspective triangle pairs.
    Desargues(Flags),
    /// Harmonic conjugates under changes of the auxiliary points.
    Harmonic(Flags),
    /// Harmonic net against the projective map of the dyadic grid.
    Net(Flags),
    /// Collinearity of psi images.
    Psi(Flags),
    /// Ratio contract, injectivity and surjectivity of the Pasch map.
    Phi(Flags),
    /// Triangle inequality, additivity and symmetry of a Hilbert metric.
    Hilbert(Flags),
    /// Pasch's axiom on random triangles and probe lines.
    Pasch(Flags),
    /// Search for a non-Desarguesian configuration in a Moulton plane.
    Moulton(Flags),
    /// Draw a figure as SVG.
    Render {
        #[arg(value_enum)]
        target: Option<RenderTarget>,
        #[command(flatten)]
        flags: Flags,
    },
}

impl Command {
    fn parts(&self) -> (Suite, &Flags, Option<RenderTarget>) {
        match self {
            Command::Desargues(f) => (Suite::Desargues, f, None),
            Command::Harmonic(f) => (Suite::Harmonic, f, None),
            Command::Net(f) => (Suite::Net, f, None),
            Command::Psi(f) => (Suite::Psi, f, None),
            Command::Phi(f) => (Suite::Phi, f, None),
            Command::Hilbert(f) => (Suite::Hilbert, f, None),
            Command::Pasch(f) => (Suite::Pasch, f, None),
            Command::Moulton(f) => (Suite::Moulton, f, None),
            Command::Render { target, flags } => (Suite::Render, flags, *target),
        }
    }
}

/// The spec a command line describes, with flags applied and validated.
pub fn resolve_spec(cmd: &Command) -> Result<SceneSpec, SpecError> {
    let (suite, flags, target) = cmd.parts();
    let mut spec = match &flags.spec {
        Some(path) => SceneSpec::load(path)?,
        None => SceneSpec::new(suite),
    };
    if spec.suite != suite {
        return Err(SpecError::Invalid(format!("spec is for {}, not {}", spec.suite.name(), suite.name())));
    }
    spec.target = target.or(spec.target);
    spec.seed = flags.seed.or(spec.seed);
    spec.depth = flags.depth.or(spec.depth);
    spec.cases = flags.cases.or(spec.cases);
    spec.output = flags.out.clone().or(spec.output);
    spec.format = flags.format.or(spec.format);
    spec.validate()?;
    Ok(spec)
}

pub fn output_path(spec: &SceneSpec) -> PathBuf {
    if let Some(p) = &spec.output {
        return p.clone();
    }
    let stem = match (spec.suite, spec.target) {
        (Suite::Render, Some(t)) => t.name().to_string(),
        (s, _) => s.name().to_string(),
    };
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{stem}.{}", spec.format().extension()))
}

fn write(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}

/// Runs one command; the return value is the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let spec = match resolve_spec(&cli.command) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("invalid spec: {e}");
            return EXIT_INVALID;
        }
    };
    let path = output_path(&spec);
    if spec.suite == Suite::Render {
        return match render::render(&spec) {
            Ok(svg) => match write(&path, &svg) {
                Ok(()) => {
                    println!("render: wrote {}", path.display());
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("cannot write {}: {e}", path.display());
                    EXIT_FAILED
                }
            },
            Err(e @ render::RenderError::NothingToRender(_)) => {
                eprintln!("{e}");
                EXIT_INVALID
            }
            Err(e) => {
                eprintln!("render failed: {e}");
                EXIT_FAILED
            }
        };
    }
    let out = match suites::run_suite(&spec) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("invalid spec: {e}");
            return EXIT_INVALID;
        }
    };
    let text = match spec.format() {
        Format::Csv => out.report.to_csv(),
        _ => out.report.to_json(),
    };
    for (p, body) in std::iter::once((path.clone(), text)).chain(out.artifacts) {
        if let Err(e) = write(&p, &body) {
            eprintln!("cannot write {}: {e}", p.display());
            return EXIT_FAILED;
        }
    }
    println!("{} -> {}", out.report.summary(), path.display());
    if out.report.ok() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
