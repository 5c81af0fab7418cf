use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cartesian-lens", version, about = "Cartesian ovals, perfect lenses and their numerical certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the oval d1 + n d2 = c with its outward normals.
    Sample(SampleArgs),
    /// Integrate the refraction ODE and report drift of the conserved quantity.
    Ode(OdeArgs),
    /// Trace a ray fan and report how well it focuses.
    Trace(TraceArgs),
    /// Emit a limiting conic.
    Conic(ConicArgs),
    /// Revolve the oval and evaluate the rotational-symmetry certificates.
    Revolve(RevolveArgs),
    /// Run every acceptance criterion and print a table.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct OvalFlags {
    /// Distance between the foci (0,0) and (b,0).
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    /// Refractive index ratio.
    #[arg(long, allow_negative_numbers = true)]
    pub n: f64,
    /// Optical path constant.
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub oval: OvalFlags,
    #[arg(long, default_value_t = 256)]
    pub count: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct OdeArgs {
    #[command(flatten)]
    pub oval: OvalFlags,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Exit with status 1 when the drift of Q exceeds this.
    #[arg(long, default_value_t = 1e-8)]
    pub max_drift: f64,
    /// Integrate this much arc length instead of one full loop.
    #[arg(long, allow_negative_numbers = true)]
    pub arc_span: Option<f64>,
    /// Use the source-at-infinity equation x + n l2 = c.
    #[arg(long)]
    pub infinite: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub n: f64,
    /// Required unless --parallel.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub rays: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = -std::f64::consts::PI)]
    pub psi_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = std::f64::consts::PI)]
    pub psi_max: f64,
    /// Bump the interface by eps cos(5 psi + phase).
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    /// Picks the bump's phase; 0 means no phase shift.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trace a beam parallel to the axis onto the infinite-source conic.
    #[arg(long, conflicts_with_all = ["c", "perturb"])]
    pub parallel: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConicMode {
    /// Beam from x = -inf focused at (b, 0), curve through the origin.
    Infinite,
    /// d1 + d2 = c or |d1 - d2| = c; --n gives the sign.
    Unity,
    /// Both foci at infinity: the line x = 0.
    BothInfinite,
}

#[derive(Debug, Clone, Args)]
pub struct ConicArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, value_enum, default_value_t = ConicMode::Infinite)]
    pub mode: ConicMode,
    /// Points emitted for csv and svg output.
    #[arg(long, default_value_t = 256)]
    pub count: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct RevolveArgs {
    #[command(flatten)]
    pub oval: OvalFlags,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scale the radius by 1 + eps cos(3 theta).
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Include wall-clock values in the table.
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub output: Output,
}
