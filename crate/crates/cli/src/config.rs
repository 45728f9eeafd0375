//! Command-line arguments. The parsed structure doubles as the experiment config that is
//! embedded in every JSON output.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heterochaos::dyck::Side;
use heterochaos::stats::mme::{MmeTag, MmeVariant};
use heterochaos::{MapParams, Rational};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "heterochaos", version, about = "Heterochaos baker maps and the Dyck shift")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalArgs {
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// The resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub global: GlobalArgs,
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Exact orbit of a rational point.
    Orbit(OrbitArgs),
    /// Markov diagram levels and edge census.
    Diagram(DiagramArgs),
    /// Dyck monoid reduction.
    Dyck {
        #[command(subcommand)]
        action: DyckAction,
    },
    /// Exact stopping-time tails with optional Monte Carlo comparison.
    Tail(TailArgs),
    /// Young tower floor masses.
    Tower {
        #[command(subcommand)]
        action: TowerAction,
    },
    /// Correlation series and decay fit.
    Correlate(CorrelateArgs),
    /// k-point correlation.
    Kmix(KmixArgs),
    /// Central limit diagnostic for the central Jacobian.
    Clt(CltArgs),
    /// Measures of maximal entropy of the Dyck shift.
    Mme {
        #[command(subcommand)]
        action: MmeAction,
    },
    /// Block and conditional entropy from exact cylinder measures.
    Entropy(EntropyArgs),
    /// Aggregate the checks recorded in JSON artifacts.
    Report(ReportArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapArgs {
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// a as "p/q".
    #[arg(long)]
    pub a: Rational,
    /// b as "p/q"; selects the three-dimensional map f_{a,b}.
    #[arg(long)]
    pub b: Option<Rational>,
}

impl MapArgs {
    pub fn params(&self) -> heterochaos::Result<MapParams> {
        MapParams::new(self.m, self.a.clone(), self.b.clone())
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// f_a, or f_{a,b} when --b is given.
    F,
    /// g_a = f_{a, 1/m − a}.
    G,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyArgs {
    #[arg(long = "map", value_enum, default_value_t = MapKind::G)]
    pub kind: MapKind,
    #[command(flatten)]
    pub map: MapArgs,
}

impl FamilyArgs {
    pub fn params(&self) -> heterochaos::Result<MapParams> {
        match self.kind {
            MapKind::F => self.map.params(),
            MapKind::G => MapParams::g(self.map.m, self.map.a.clone()),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaFormula {
    Standard,
    /// The β-branch read literally as printed; it does not preserve Lebesgue.
    Literal,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// x,y or x,y,z as rationals.
    #[arg(long, value_delimiter = ',', required = true)]
    pub point: Vec<Rational>,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Also compare pullback measures on this many seeded random rectangles (and blocks).
    #[arg(long, default_value_t = 0)]
    pub check_measure: usize,
    #[arg(long, value_enum, default_value_t = BetaFormula::Standard, hide = true)]
    pub beta_formula: BetaFormula,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long)]
    pub check_census: bool,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DyckAction {
    /// Reduced form and admissibility.
    Reduce(WordArgs),
    /// Reduced form, admissibility and the height profile.
    Check(WordArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordArgs {
    /// Comma-separated symbols such as a1,b2.
    #[arg(long)]
    pub word: String,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 20)]
    pub nmax: usize,
    /// Include the exact rational tail values.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
    /// Orbit length after which a Monte Carlo sample counts as exceeding the cap.
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerAction {
    /// Floor masses, normalizer and truncation error.
    Stats(TowerArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 60)]
    pub floor_cap: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Two observables: φ then ψ.
    #[arg(long = "obs", num_args = 1, required = true)]
    pub obs: Vec<String>,
    #[arg(long, default_value_t = 25)]
    pub nmax: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Lag window of the decay fit, "lo..hi"; defaults to 0..nmax.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmixArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long = "obs", num_args = 1, required = true)]
    pub obs: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub lags: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagArg {
    Alpha,
    Beta,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    One,
    Two,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantArgs {
    #[arg(long, value_enum, default_value_t = TagArg::Beta)]
    pub variant: TagArg,
    #[arg(long, value_enum, default_value_t = SideArg::One)]
    pub side: SideArg,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
}

impl VariantArgs {
    pub fn variant(&self) -> MmeVariant {
        let tag = match self.variant {
            TagArg::Alpha => MmeTag::Alpha,
            TagArg::Beta => MmeTag::Beta,
        };
        let side = match self.side {
            SideArg::One => Side::One,
            SideArg::Two => Side::Two,
        };
        MmeVariant::new(tag, side)
    }
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MmeAction {
    /// Words sampled from the measure.
    Sample {
        #[command(flatten)]
        variant: VariantArgs,
        #[arg(long, default_value_t = 20)]
        length: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Exact measure of a cylinder.
    Cylinder {
        #[command(flatten)]
        variant: VariantArgs,
        #[arg(long)]
        word: String,
    },
    /// Block and conditional entropies H_0 … H_nmax.
    Entropy {
        #[command(flatten)]
        variant: VariantArgs,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        #[arg(long, default_value_t = heterochaos::stats::mme::DEFAULT_ENUMERATION_BUDGET)]
        budget: usize,
    },
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub variant: VariantArgs,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = heterochaos::stats::mme::DEFAULT_ENUMERATION_BUDGET)]
    pub budget: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportArgs {
    /// JSON artifacts written by earlier runs.
    #[arg(required = true)]
    pub artifacts: Vec<PathBuf>,
}
