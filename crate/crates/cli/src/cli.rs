use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "q8",
    version,
    about = "Quaternion-group oscillator networks and their heteroclinic cycles"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file of flag values; flags on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The permutation group and its printed element list.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// The sixteen-cell coupled system.
    Network {
        #[command(subcommand)]
        cmd: NetworkCmd,
    },
    /// Branches of the Hopf normal form.
    Hopf {
        #[command(subcommand)]
        cmd: HopfCmd,
    },
    /// Fixed-point catalog and the reduced phase field.
    Torus {
        #[command(subcommand)]
        cmd: TorusCmd,
    },
    /// Equilibria and connections of the three-dimensional phase system.
    Reduced {
        #[command(subcommand)]
        cmd: ReducedCmd,
    },
    /// Stability class and indices of the heteroclinic cycle.
    Classify(ClassifyArgs),
    /// Classifies every point of a (u, q) grid and emits CSV.
    Sweep(SweepArgs),
    /// Every inconsistency the audits find in the printed data.
    Discrepancies,
}

#[derive(Subcommand, Debug)]
pub enum GroupCmd {
    /// Checks the presentation and audits the printed element list.
    Verify,
}

#[derive(Subcommand, Debug)]
pub enum NetworkCmd {
    /// Integrates the coupled system and emits the trajectory.
    Simulate(SimulateArgs),
    /// Compares the derived wiring with the printed equations.
    Audit,
}

#[derive(Subcommand, Debug)]
pub enum HopfCmd {
    /// Criticality and stability of the three primary branches.
    Classify(HopfArgs),
    /// Isotropy subgroups of the primary branches in both group pictures.
    Isotropy,
}

#[derive(Subcommand, Debug)]
pub enum TorusCmd {
    /// Verifies every row of the printed fixed-point catalog.
    Catalog,
    /// Evaluates the reduced vector field at a point.
    Field(FieldArgs),
}

#[derive(Subcommand, Debug)]
pub enum ReducedCmd {
    /// Jacobians at the four tabulated equilibria.
    Eigs(ParamArgs),
    /// Shoots along the unstable axes of each cycle node.
    Connect(ConnectArgs),
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub u: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    /// Internal dynamics: zero, identity, decay, bistable, phase[:omega,a].
    #[arg(long, default_value = "bistable")]
    pub f: String,
    /// Coupling along a-edges: zero, diffusive[:k], sine[:k], mixed.
    #[arg(long, default_value = "diffusive")]
    pub g: String,
    /// Coupling along b-edges.
    #[arg(long, default_value = "mixed")]
    pub h: String,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Initial state: a file of sixteen numbers, or random:<seed>.
    #[arg(long, default_value = "random:0")]
    pub x0: String,
    /// Number of evenly spaced output times, including both ends.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HopfArgs {
    /// Complex coefficients as re,im (or a single real).
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub an: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub d: String,
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    pub alambda: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormArg {
    #[value(alias = "eq11")]
    Expanded,
    #[value(alias = "eq13")]
    Factored,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FieldArgs {
    /// Point as t1,t2,t3.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = FormArg::Factored)]
    pub form: FormArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ShootArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 500.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub integrator_tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConnectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub shoot: ShootArgs,
    /// Also write every shot's trajectory as CSV to this file.
    #[arg(long)]
    pub arcs_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Basin probe as r,n,seed.
    #[arg(long)]
    pub probe: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub shoot: ShootArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    /// start:end:n
    #[arg(long, allow_hyphen_values = true)]
    pub u_range: String,
    #[arg(long, allow_hyphen_values = true)]
    pub q_range: String,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
    /// Skip the connection shooter; leaves rho_km and connected empty.
    #[arg(long)]
    pub no_shoot: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub shoot: ShootArgs,
}
