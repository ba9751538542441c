use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use dnlw::{make_params, Params, Reaction, ReactionKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Kind {
    #[value(name = "C")]
    C,
    #[value(name = "Cprime")]
    Cprime,
}

impl From<Kind> for ReactionKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::C => ReactionKind::TypeC,
            Kind::Cprime => ReactionKind::TypeCPrime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Model {
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "C")]
    pub kind: Kind,
    #[arg(long, default_value_t = 0.3)]
    pub a: f64,
}

impl Model {
    pub fn params(&self) -> dnlw::Result<Params> {
        make_params(self.m, self.p)
    }

    pub fn reaction(&self) -> dnlw::Result<Reaction> {
        dnlw::cubic_reaction(self.kind.into(), self.a)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GridArgs {
    /// Half-length of the domain
    #[arg(long = "L", default_value_t = 150.0)]
    pub length: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dx: f64,
    #[arg(long = "t-end", default_value_t = 200.0)]
    pub t_end: f64,
    /// Radial dimension; without it the solution is taken even on a line
    #[arg(long = "N")]
    pub dim: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum WaveKind {
    Critical,
    Cs,
    ZeroToA,
    AToZero,
    AToOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Datum {
    Bump,
    Reacting,
    NotReacting,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Critical speed and the critical profile
    Cstar {
        #[command(flatten)]
        #[serde(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Phase-plane trajectory leaving the saddle at speed c
    Trajectory {
        #[command(flatten)]
        #[serde(flatten)]
        model: Model,
        #[arg(long)]
        c: f64,
        /// Smallest X reached; 0 runs to the axis
        #[arg(long = "x-min", default_value_t = 1e-8)]
        x_min: f64,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
    },
    /// Roots of c Z - |Z|^p = f_mp(X) on a grid of X
    Isocline {
        #[command(flatten)]
        #[serde(flatten)]
        model: Model,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// Critical or special wave profile
    Profile {
        #[command(flatten)]
        #[serde(flatten)]
        model: Model,
        #[arg(long, value_enum, default_value = "critical")]
        wave: WaveKind,
        /// Speed; defaults depend on the wave
        #[arg(long)]
        c: Option<f64>,
        /// Peak offset for change-sign waves
        #[arg(long)]
        delta: Option<f64>,
        /// Distance of the 0-to-a peak below 1
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Value taken at ξ = 0 by the critical profile
        #[arg(long)]
        anchor: Option<f64>,
        #[arg(long)]
        resample: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Direct simulation from a chosen datum
    Simulate {
        #[command(flatten)]
        #[serde(flatten)]
        model: Model,
        #[command(flatten)]
        #[serde(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value = "bump")]
        datum: Datum,
        /// Half-width of the bump datum
        #[arg(long, default_value_t = 10.0)]
        width: f64,
        /// Speed of the reacting datum as a fraction of c*
        #[arg(long = "c-frac", default_value_t = 0.5)]
        c_frac: f64,
        /// Plateau radius of the reacting datum
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.5)]
        level: f64,
        #[arg(long = "sample-dt", default_value_t = 1.0)]
        sample_dt: f64,
    },
    /// Not-reacting and reacting data side by side
    Threshold {
        #[command(flatten)]
        #[serde(flatten)]
        model: Model,
        #[command(flatten)]
        #[serde(flatten)]
        grid: GridArgs,
        /// Radius of the inner set checked for invasion
        #[arg(long, default_value_t = 20.0)]
        inner: f64,
    },
    /// Monostable run settling on the intermediate state
    Saturate {
        #[command(flatten)]
        #[serde(flatten)]
        model: Model,
        #[command(flatten)]
        #[serde(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 10.0)]
        width: f64,
    },
    /// Self-similar solution check under grid refinement
    Barenblatt {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        p: f64,
        #[arg(long = "N", default_value_t = 1)]
        dim: u32,
        /// Coarsest spacing; each level halves it
        #[arg(long, default_value_t = 0.04)]
        dx: f64,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long = "L", default_value_t = 20.0)]
        length: f64,
        /// Profile constant
        #[arg(long = "c", default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        t0: f64,
        #[arg(long, default_value_t = 2.0)]
        t1: f64,
    },
    /// Critical speeds over a set of (m, p)
    Sweep {
        /// Explicit cells as "m,p;m,p;..."
        #[arg(long)]
        points: Option<String>,
        /// Walk the line m(p-1) = LINE instead
        #[arg(long)]
        line: Option<f64>,
        #[arg(long = "m-min", default_value_t = 1.0)]
        m_min: f64,
        #[arg(long = "m-max", default_value_t = 1.3)]
        m_max: f64,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, value_enum, default_value = "C")]
        kind: Kind,
        #[arg(long, default_value_t = 0.3)]
        a: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Relative jump between neighbours that gets flagged
        #[arg(long, default_value_t = 0.05)]
        jump: f64,
        /// Worker threads; 0 uses all cores
        #[arg(long, default_value_t = 0)]
        #[serde(skip)]
        jobs: usize,
    },
    /// Runs a saved resolved_config.json again
    #[serde(skip)]
    Replay { config: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Cstar { .. } => "cstar",
            Command::Trajectory { .. } => "trajectory",
            Command::Isocline { .. } => "isocline",
            Command::Profile { .. } => "profile",
            Command::Simulate { .. } => "simulate",
            Command::Threshold { .. } => "threshold",
            Command::Saturate { .. } => "saturate",
            Command::Barenblatt { .. } => "barenblatt",
            Command::Sweep { .. } => "sweep",
            Command::Replay { .. } => "replay",
        }
    }
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: String,
    pub out: PathBuf,
    #[serde(flatten)]
    pub command: Command,
}
