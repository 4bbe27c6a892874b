//! Command-line surface. Domain-shaped values (big integers, rationals, set
//! presets, rate functions) arrive as strings and are parsed by the command
//! implementations so that malformed values always map to the usage exit
//! code with a diagnostic naming the violated invariant.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "rank1",
    version,
    about = "Rank-one cutting-and-stacking constructions: build schedules, verify properties, and bracket exact correlations",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Construct a schedule and write its JSON interchange form.
    Build(BuildArgs),
    /// Run property verifiers and emit one report per property per stage.
    Verify(VerifyArgs),
    /// Bracket a single correlation mu(T^m A ∩ B).
    Correlate(CorrelateArgs),
    /// Sweep correlations over a shift range (CSV rows ordered by m).
    Sweep(SweepArgs),
    /// Joining coefficients a_j^k of the off-diagonal joining carried by T^l.
    Coeffs(CoeffsArgs),
}

#[derive(Args)]
pub struct BuildArgs {
    /// Spacer family: explicit, algebraic, sidon, or decay.
    #[arg(long)]
    pub family: String,
    /// Initial tower height h1 (the first tower has h1 + 1 levels).
    /// Defaults: 1 for algebraic/sidon, 2 for decay; required for explicit.
    #[arg(long)]
    pub h1: Option<u64>,
    /// Explicit family: one flag per cutting stage, comma-separated spacers.
    #[arg(long = "spacers", value_name = "S1,S2,...")]
    pub spacers: Vec<String>,
    /// Algebraic family: comma-separated primes, one cutting stage per prime.
    #[arg(long, value_name = "P1,P2,...")]
    pub primes: Option<String>,
    /// Algebraic family: bulk spacer height H; "r" reuses each stage's prime.
    #[arg(long, default_value = "r", value_name = "H")]
    pub bulk: String,
    /// Algebraic family: spacer placed on the final column.
    #[arg(long, default_value = "0", value_name = "S")]
    pub s_last: String,
    /// Sidon family: comma-separated cut counts, one cutting stage per entry.
    #[arg(long, value_name = "R1,R2,...")]
    pub cuts: Option<String>,
    /// Sidon family: geometric growth factor of the spacer chain.
    #[arg(long, default_value_t = 2)]
    pub growth: u64,
    /// Decay family: rate function psi (lnln, ln, or sqrt).
    #[arg(long)]
    pub psi: Option<String>,
    /// Decay family: target rate constant hint as p/q.
    #[arg(long, default_value = "1/1", value_name = "P/Q")]
    pub c_hint: String,
    /// Decay family: number of cutting stages to construct.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Decay family: largest cut count the per-stage search may use.
    #[arg(long, default_value_t = 10_000)]
    pub r_cap: u64,
    /// Write the schedule JSON here instead of stdout. Derived heights (and,
    /// for decay, the certified threshold comparisons) are echoed to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; build emits json only.
    #[arg(long, default_value = "json")]
    pub format: String,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Path to a schedule JSON file.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Comma-separated properties (ornstein, injectivity, sidon, decay,
    /// lemma) or "all" for every property applicable to the schedule family.
    #[arg(long)]
    pub props: String,
    /// Stages to verify: "all" or comma-separated stage numbers.
    #[arg(long, default_value = "all")]
    pub stages: String,
    /// Shift budget per stage for the single-column sweep; strata no wider
    /// than the budget are swept exhaustively, wider ones are sampled.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Random decay samples drawn per stratum (on top of the column-offset
    /// differences, which are always included).
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    /// Randomized lemma-decomposition trials per stage.
    #[arg(long, default_value_t = 20)]
    pub trials: u64,
    /// Rate function for the decay property (defaults to the schedule's own
    /// decay metadata; required for other families).
    #[arg(long)]
    pub psi: Option<String>,
    /// Decay constant as p/q; defaults to the certified stage-1 constant.
    #[arg(long, value_name = "P/Q")]
    pub constant: Option<String>,
    /// Set the decay property tracks, as a preset (see --help of correlate).
    #[arg(long, default_value = "E:1")]
    pub set_a: String,
    /// Seed for randomized trials; identical seeds give identical output.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Position cap for tower expansions (default RANK1_CAP or built-in).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Write the report JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; verify emits json only.
    #[arg(long, default_value = "json")]
    pub format: String,
}

#[derive(Args)]
pub struct CorrelateArgs {
    /// Path to a schedule JSON file.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Set A as a preset: E:j (base of tower j), U:j (all of tower j), or
    /// L:j:i[,i...] (listed levels of tower j; L:j:i is the level T^i E_j).
    #[arg(long)]
    pub set_a: String,
    /// Set B, same grammar as --set-a.
    #[arg(long)]
    pub set_b: String,
    /// The shift m (any integer, decimal string).
    #[arg(long, allow_hyphen_values = true)]
    pub m: String,
    /// Largest acceptable bracket width before the result counts as
    /// indeterminate (exit 2).
    #[arg(long, default_value = "0", value_name = "P/Q")]
    pub tolerance: String,
    /// Position cap for tower expansions (default RANK1_CAP or built-in).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: json (default) or csv.
    #[arg(long, default_value = "json")]
    pub format: String,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Path to a schedule JSON file.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Set A preset (grammar: E:j, U:j, L:j:i[,i...]).
    #[arg(long)]
    pub set_a: String,
    /// Set B preset.
    #[arg(long)]
    pub set_b: String,
    /// First shift of the sweep (inclusive, decimal string).
    #[arg(long, allow_hyphen_values = true)]
    pub m_from: String,
    /// Last shift of the sweep (inclusive, decimal string).
    #[arg(long, allow_hyphen_values = true)]
    pub m_to: String,
    /// Step between consecutive shifts.
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    /// Largest acceptable bracket width before a row counts as indeterminate.
    #[arg(long, default_value = "0", value_name = "P/Q")]
    pub tolerance: String,
    /// Append a companion bound column: "sidon" for mu(A)/r_j by stratum, or
    /// "decay[:P/Q]" for the certified C*psi(m)/sqrt(m) rate (decay
    /// schedules; C defaults to the certified stage-1 constant). Rows whose
    /// certified upper bound exceeds the bound fail (exit 1).
    #[arg(long)]
    pub bound: Option<String>,
    /// Accepted for config uniformity; sweeps are deterministic and ignore it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Position cap for tower expansions (default RANK1_CAP or built-in).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Write rows here instead of stdout; on a mid-sweep error the rows
    /// computed so far are still written.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: csv (default) or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Args)]
pub struct CoeffsArgs {
    /// Path to a schedule JSON file.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Stage j whose base sets the coefficients describe.
    #[arg(long)]
    pub stage: usize,
    /// The joining shift l (any integer, decimal string).
    #[arg(long, allow_hyphen_values = true)]
    pub shift: String,
    /// Position cap for tower expansions (default RANK1_CAP or built-in).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Write the coefficients here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: json (default, includes mass bounds) or csv (entries).
    #[arg(long, default_value = "json")]
    pub format: String,
}
