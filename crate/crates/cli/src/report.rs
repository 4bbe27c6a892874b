//! Exit-code policy, error plumbing, and output helpers shared by the
//! subcommands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::Signed;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INDETERMINATE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;

/// Environment variable overriding the default position cap.
pub const CAP_ENV: &str = "RANK1_CAP";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed values, or parameters violating an invariant.
    Usage(String),
    /// The computation hit a resource or precision limit and the answer is
    /// genuinely undecided (maps to the indeterminate exit code).
    Undecidable(String),
    /// Filesystem or serialization failure.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Undecidable(_) => EXIT_INDETERMINATE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Undecidable(msg) => write!(f, "indeterminate: {msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<rankone::Error> for CliError {
    fn from(e: rankone::Error) -> Self {
        match &e {
            rankone::Error::PositionCapExceeded { .. }
            | rankone::Error::ToleranceUnreachable { .. }
            | rankone::Error::Inconclusive { .. } => CliError::Undecidable(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(format!("serialization failed: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Position cap precedence: explicit flag, then `RANK1_CAP`, then built-in.
pub fn resolve_cap(flag: Option<usize>) -> CliResult<usize> {
    if let Some(cap) = flag {
        if cap == 0 {
            return Err(CliError::Usage("--cap must be positive".into()));
        }
        return Ok(cap);
    }
    match std::env::var(CAP_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|c| *c > 0)
            .ok_or_else(|| {
                CliError::Usage(format!("{CAP_ENV} must be a positive integer, got `{raw}`"))
            }),
        Err(_) => Ok(rankone::DEFAULT_POSITION_CAP),
    }
}

pub fn load_schedule(path: &Path) -> CliResult<rankone::ConstructionSchedule> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::Usage(format!("invalid schedule {}: {e}", path.display())))
}

/// Write to `--out` when given, stdout otherwise.
pub fn write_output(out: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn to_pretty_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn parse_tolerance(raw: &str) -> CliResult<BigRational> {
    let t = rankone::exact::parse_ratio(raw)
        .map_err(|e| CliError::Usage(format!("bad --tolerance: {e}")))?;
    if t.is_negative() {
        return Err(CliError::Usage(format!(
            "tolerance must be non-negative, got {raw}"
        )));
    }
    Ok(t)
}

/// Fold per-item verdict levels into the process exit code: any fail wins,
/// then any indeterminate, otherwise pass.
pub fn fold_exit(levels: impl IntoIterator<Item = u8>) -> u8 {
    let mut code = EXIT_PASS;
    for level in levels {
        if level == EXIT_FAIL {
            return EXIT_FAIL;
        }
        if level == EXIT_INDETERMINATE {
            code = EXIT_INDETERMINATE;
        }
    }
    code
}
