use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spiral_core::reeb::TransportRule;

#[derive(Parser, Debug)]
#[command(
    name = "srspiral",
    version,
    about = "Sub-Riemannian geodesic flow experiments on contact 3-manifolds"
)]
pub struct Cli {
    /// Plain-text `key = value` file; keys are flag names, command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the contact/Reeb identities and the lift bracket conventions at random points.
    Validate(ValidateArgs),
    /// Integrate one unit-speed geodesic and write its trajectory.
    Geodesic(GeodesicArgs),
    /// Find the Reeb orbit through a point and transport the (X, Y) frame along it.
    ReebOrbit(ReebOrbitArgs),
    /// Parallel-transport monodromy around closed Reeb orbits.
    Monodromy(MonodromyArgs),
    /// Spiral prediction errors over a list of h₀ and their convergence slopes.
    SpiralScan(SpiralScanArgs),
    /// Drift of Ĵ over a list of h₀.
    AdiabaticScan(AdiabaticScanArgs),
    /// Shoot closed geodesics near the predicted lengths T_{j,k}.
    Spectrum(SpectrumArgs),
    /// Homogeneous polynomials in (u, v), given as coefficient lists `c0,c1,...,ck`.
    Polyalg(PolyalgArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Transport {
    NormalForm,
    StrainFree,
}

impl From<Transport> for TransportRule {
    fn from(t: Transport) -> Self {
        match t {
            Transport::NormalForm => TransportRule::NormalForm,
            Transport::StrainFree => TransportRule::StrainFree,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dopri5,
    Midpoint,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// heisenberg, heisenberg-quotient or s3
    #[arg(long, default_value = "heisenberg")]
    pub model: String,
    /// Reeb period of heisenberg-quotient
    #[arg(long = "T0", default_value_t = std::f64::consts::TAU)]
    pub t0: f64,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Start point in chart coordinates
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1,
        default_value = "0.2,-0.1,0.3"
    )]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub chart: u8,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// CSV destination (standard output when absent)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON summary destination (it is always printed as well)
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
    /// SVG plot destination
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Largest acceptable residual
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    /// JSON report destination
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub point: PointArgs,
    /// Initial covector in chart components (rescaled to g* = 1)
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1,
        conflicts_with = "lifts"
    )]
    pub p: Option<Vec<f64>>,
    /// Initial covector as (h_X, h_Y, h_Z) (rescaled to g* = 1)
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1,
        default_value = "1,0,1"
    )]
    pub lifts: Vec<f64>,
    /// Final time
    #[arg(long = "T", default_value_t = 20.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Dopri5)]
    pub method: MethodArg,
    /// Step of the implicit midpoint rule
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ReebOrbitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub point: PointArgs,
    /// Longest period searched for
    #[arg(long = "tau-max", default_value_t = 20.0)]
    pub tau_max: f64,
    /// Reeb time to transport for when the orbit has no period
    #[arg(long, default_value_t = 10.0)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = Transport::NormalForm)]
    pub transport: Transport,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct MonodromyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Take the points along the Reeb orbit through --q instead of at random
    #[arg(long = "along-fiber")]
    pub along_fiber: bool,
    #[arg(long, default_value_t = 1)]
    pub loops: u32,
    #[arg(long = "tau-max", default_value_t = 20.0)]
    pub tau_max: f64,
    #[arg(long, value_enum, default_value_t = Transport::NormalForm)]
    pub transport: Transport,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SpiralScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "10,20,40,80")]
    pub h0: Vec<f64>,
    /// Horizon factor: errors are taken over t ≤ c·h₀
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Angle of the initial velocity against X
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.4)]
    pub angle: f64,
    #[arg(long, value_enum, default_value_t = Transport::NormalForm)]
    pub transport: Transport,
    #[arg(long, default_value_t = spiral_core::spiral::SCAN_TOL)]
    pub tol: f64,
    /// Skip the tolerance-sensitivity rerun that estimates integrator noise
    #[arg(long = "no-noise")]
    pub no_noise: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct AdiabaticScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "10,20,40,80")]
    pub h0: Vec<f64>,
    /// Horizon factor: each run lasts c/Ĵ(0)
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub angle: f64,
    #[arg(long, default_value_t = spiral_core::spiral::SCAN_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Point on the Reeb orbit to spiral around
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1,
        default_value = "0,0,0"
    )]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub chart: u8,
    #[arg(long, default_value_t = 1)]
    pub jmin: u32,
    #[arg(long, default_value_t = 1)]
    pub jmax: u32,
    #[arg(long, default_value_t = 3)]
    pub kmin: u32,
    #[arg(long, default_value_t = 10)]
    pub kmax: u32,
    /// Position of the seed on its circle
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phase: f64,
    #[arg(long = "tau-max", default_value_t = 20.0)]
    pub tau_max: f64,
    #[arg(long, value_enum, default_value_t = Transport::NormalForm)]
    pub transport: Transport,
    /// Closure residual accepted by the shooting method
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 50)]
    pub max_iter: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PolyalgArgs {
    #[command(subcommand)]
    pub op: PolyOp,
}

#[derive(Args, Debug)]
pub struct PolyMode {
    /// Floating-point coefficients instead of exact rationals
    #[arg(long)]
    pub float: bool,
}

#[derive(Subcommand, Debug)]
pub enum PolyOp {
    /// Poisson bracket {P, Q}
    Bracket {
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        #[command(flatten)]
        mode: PolyMode,
    },
    /// A(P) = u ∂_v P − v ∂_u P
    Aop {
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[command(flatten)]
        mode: PolyMode,
    },
    /// P = P⁰ + c·I^{k/2} with P⁰ of zero circle average
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[command(flatten)]
        mode: PolyMode,
    },
    /// Q with A(Q) = P and zero circle average
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[command(flatten)]
        mode: PolyMode,
    },
}
