//! `planar`: classify equilibria, simulate trajectories, draw phase portraits
//! and run the verification suites.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use planar_core::{
    eigen, empirical_run, report_json, run_suite, spectral_classify, EmpiricalThresholds,
    IntegratorConfig, Mat2, PlanarSystem, RegularityClass, Sampling, Suite, SystemConfig,
};

pub mod portrait;

#[derive(Debug, Parser)]
#[command(
    name = "planar",
    version,
    about = "Equilibrium analysis for planar ODEs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the equilibrium at the origin
    Classify {
        #[command(flatten)]
        system: SystemArgs,
        /// Also integrate a trajectory and classify it from the angle
        #[arg(long)]
        empirical: bool,
        /// `c1` or `holder:<alpha>`; defaults to the system's own class
        #[arg(long, value_parser = parse_regularity)]
        regularity: Option<RegularityClass>,
        #[command(flatten)]
        start: StartArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Integrate one trajectory in log-polar coordinates and write CSV
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        start: StartArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
        /// Output file, `-` for stdout
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Draw streamlines seeded on a ring as SVG
    Portrait {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        out: PathBuf,
        /// Ring radius [default: 1, or 0.5 for the counterexample]
        #[arg(long)]
        ring: Option<f64>,
        #[arg(long, default_value_t = 12)]
        seeds: usize,
        /// Time horizon of each streamline, forward and backward
        #[arg(long, default_value_t = 20.0)]
        t_max: f64,
    },
    /// Run a verification suite and write the JSON report
    Verify {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        /// Output file, `-` for stdout
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    /// Linear system with the matrix from --matrix
    Linear,
    /// [[-1,0],[eps,-1]] with the log-rotation remainder
    #[value(alias = "example")]
    Counterexample,
    /// lambda*I with a HolderPolar remainder
    #[value(alias = "holder_family")]
    HolderFamily,
    /// [[lambda,0],[-lambda,lambda]] with a HolderPolar remainder
    #[value(alias = "jordan_holder_family")]
    JordanHolderFamily,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct SystemSource {
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// JSON system description
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    #[command(flatten)]
    pub source: SystemSource,
    /// Row-major a11,a12,a21,a22
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub matrix: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
    pub wavenumber: i32,
}

impl SystemArgs {
    pub fn build(&self) -> anyhow::Result<PlanarSystem> {
        if let Some(path) = &self.source.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            return Ok(SystemConfig::from_json(&text)?.build()?);
        }
        let builtin = self.source.builtin.expect("clap enforces one source");
        if builtin != Builtin::Linear && self.matrix.is_some() {
            bail!("--matrix only applies to --builtin linear");
        }
        Ok(match builtin {
            Builtin::Linear => {
                let m = self
                    .matrix
                    .as_ref()
                    .context("--builtin linear needs --matrix a11,a12,a21,a22")?;
                if m.len() != 4 {
                    bail!("--matrix takes 4 comma-separated entries, got {}", m.len());
                }
                PlanarSystem::linear(Mat2::new(m[0], m[1], m[2], m[3]))?
            }
            Builtin::Counterexample => PlanarSystem::counterexample(self.epsilon)?,
            Builtin::HolderFamily => PlanarSystem::holder_family(
                self.lambda,
                self.alpha,
                self.amplitude,
                self.wavenumber,
                false,
            )?,
            Builtin::JordanHolderFamily => PlanarSystem::holder_family(
                self.lambda,
                self.alpha,
                self.amplitude,
                self.wavenumber,
                true,
            )?,
        })
    }

    fn is_counterexample(&self) -> bool {
        self.source.builtin == Some(Builtin::Counterexample)
    }
}

#[derive(Debug, Args)]
pub struct StartArgs {
    /// Initial radius, at most 0.5
    #[arg(long, default_value_t = 0.01)]
    pub r0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta0: f64,
}

#[derive(Debug, Args)]
pub struct IntegratorArgs {
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho_floor: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// `auto`, `uniform:<stride>` or `log:<per_decade>`
    #[arg(long, value_parser = parse_sampling)]
    pub sampling: Option<Sampling>,
}

impl IntegratorArgs {
    pub fn config(&self) -> IntegratorConfig {
        let d = IntegratorConfig::default();
        IntegratorConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            t_max: self.t_max.unwrap_or(d.t_max),
            rho_floor: self.rho_floor.unwrap_or(d.rho_floor),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            sampling: self.sampling.unwrap_or(d.sampling),
        }
    }
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Turns at or above which a run counts as a focus
    #[arg(long)]
    pub turns_threshold: Option<f64>,
    /// Tail variation of theta (radians) below which a run counts as a node
    #[arg(long)]
    pub tail_threshold: Option<f64>,
    #[arg(long)]
    pub tail_window: Option<f64>,
}

impl ThresholdArgs {
    pub fn thresholds(&self) -> EmpiricalThresholds {
        let d = EmpiricalThresholds::default();
        EmpiricalThresholds {
            turns: self.turns_threshold.unwrap_or(d.turns),
            tail: self.tail_threshold.unwrap_or(d.tail),
            tail_window_fraction: self.tail_window.unwrap_or(d.tail_window_fraction),
        }
    }
}

fn parse_sampling(s: &str) -> Result<Sampling, String> {
    let bad = || format!("expected auto, uniform:<stride> or log:<per_decade>, got {s:?}");
    match s.split_once(':') {
        None if s == "auto" => Ok(Sampling::Auto),
        Some(("uniform", v)) => {
            let stride: f64 = v.parse().map_err(|_| bad())?;
            Ok(Sampling::Uniform { stride })
        }
        Some(("log", v)) => {
            let per_decade: u32 = v.parse().map_err(|_| bad())?;
            Ok(Sampling::LogSpaced { per_decade })
        }
        _ => Err(bad()),
    }
}

fn parse_regularity(s: &str) -> Result<RegularityClass, String> {
    if s == "c1" {
        return Ok(RegularityClass::C1);
    }
    let alpha = s
        .strip_prefix("holder:")
        .and_then(|a| a.parse::<f64>().ok())
        .ok_or_else(|| format!("expected c1 or holder:<alpha>, got {s:?}"))?;
    RegularityClass::c1_alpha(alpha).map_err(|e| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: planar_core::Error| e.to_string())
}

/// Process exit status.
pub mod exit {
    pub const OK: i32 = 0;
    pub const BOUND_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
}

/// Parse `argv` (program name first) and execute. Returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::USAGE
        }
    }
}

fn open_out(path: &Path) -> anyhow::Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn execute(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Classify {
            system,
            empirical,
            regularity,
            start,
            integrator,
            thresholds,
        } => {
            let sys = system.build()?;
            let reg = match regularity.or_else(|| RegularityClass::of_system(&sys)) {
                Some(r) => r,
                None => bail!("cannot infer the regularity class; pass --regularity"),
            };
            let spectral = spectral_classify(&eigen(sys.jacobian()), reg);
            let reason = spectral.reason.map(|r| r.to_string()).unwrap_or_default();
            println!("{spectral}, spectral: {reason}");
            if empirical {
                let cfg = integrator.config();
                match empirical_run(
                    &sys,
                    start.r0.ln(),
                    start.theta0,
                    &cfg,
                    &thresholds.thresholds(),
                ) {
                    Ok(run) => {
                        let turns = run.trajectory.winding(0.0).abs();
                        println!(
                            "{}, empirical: {:.3} turns, tail variation {:.3e} rad by t = {}",
                            run.classification,
                            turns,
                            run.tail_variation,
                            run.trajectory.t_end()
                        );
                    }
                    Err(planar_core::Error::SpectrumMismatch(_)) => {
                        println!("empirical: not applicable (no common sign of the real parts)");
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(exit::OK)
        }
        Command::Simulate {
            system,
            start,
            integrator,
            out,
        } => {
            let sys = system.build()?;
            let traj =
                planar_core::integrate(&sys, start.r0.ln(), start.theta0, &integrator.config())?;
            let mut w = open_out(&out)?;
            traj.write_csv(&mut w)?;
            w.flush()?;
            eprintln!(
                "{} samples to t = {} ({:?})",
                traj.samples.len(),
                traj.t_end(),
                traj.terminal_event
            );
            Ok(exit::OK)
        }
        Command::Portrait {
            system,
            out,
            ring,
            seeds,
            t_max,
        } => {
            let sys = system.build()?;
            let ring = ring.unwrap_or(if system.is_counterexample() { 0.5 } else { 1.0 });
            let opts = portrait::PortraitOptions {
                ring,
                seeds,
                t_max,
                // the log-rotation remainder is singular on the unit circle
                outer_limit: system.is_counterexample().then_some(0.99),
            };
            let svg = portrait::render(&sys, &opts)?;
            let mut w = open_out(&out)?;
            w.write_all(svg.as_bytes())?;
            w.flush()?;
            Ok(exit::OK)
        }
        Command::Verify { suite, out, seed } => {
            let reports = run_suite(suite, seed);
            let mut w = open_out(&out)?;
            w.write_all(report_json(&reports).as_bytes())?;
            w.flush()?;
            let failed = reports.iter().filter(|r| !r.holds).count();
            for r in &reports {
                eprintln!(
                    "{} {} (worst margin {:.3e})",
                    if r.holds { "ok  " } else { "FAIL" },
                    r.name,
                    r.worst_margin
                );
            }
            eprintln!("{} checks, {failed} failed", reports.len());
            Ok(if failed == 0 {
                exit::OK
            } else {
                exit::BOUND_FAILED
            })
        }
    }
}
