//! `rank1 sweep` — correlation series over a shift range, ordered by m.
//! Rows computed before a mid-sweep error are still written (partial
//! output). With `--bound`, each row is checked against the active bound:
//! a certified violation exits 1, an unresolved comparison exits 2.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde_json::Value;

use rankone::certfn::cert_le_scaled_rate;
use rankone::exact::{format_ratio, parse_int, parse_ratio};
use rankone::{
    correlation_bracket, suggest_decay_constant, ConstructionSchedule, CorrelationResult, LevelSet,
    ScheduleMeta, SlowFn,
};

use crate::args::SweepArgs;
use crate::report::{
    fold_exit, load_schedule, parse_tolerance, resolve_cap, to_pretty_json, write_output, CliError,
    CliResult, EXIT_FAIL, EXIT_INDETERMINATE, EXIT_PASS,
};
use crate::sets::parse_set;

enum Bound {
    /// mu(A)/r_j for the stratum h_j < |m| <= h_{j+1}.
    Sidon { mu_a: BigRational },
    /// C * psi(|m|) / sqrt(|m|), compared through certified enclosures.
    Decay { c: BigRational, psi: SlowFn },
}

pub fn run(args: SweepArgs) -> CliResult<u8> {
    let schedule = load_schedule(&args.schedule)?;
    let cap = resolve_cap(args.cap)?;
    let tolerance = parse_tolerance(&args.tolerance)?;
    let a = parse_set(&schedule, &args.set_a, cap)?;
    let b = parse_set(&schedule, &args.set_b, cap)?;
    let m_from = parse_int(&args.m_from)?;
    let m_to = parse_int(&args.m_to)?;
    if args.stride == 0 {
        return Err(CliError::Usage("--stride must be positive".into()));
    }
    if m_from > m_to {
        return Err(CliError::Usage(format!(
            "empty shift range: --m-from {m_from} exceeds --m-to {m_to}"
        )));
    }
    let bound = parse_bound(&args, &schedule, &a)?;

    let mut rows: Vec<(CorrelationResult, Option<String>)> = Vec::new();
    let mut levels: Vec<u8> = Vec::new();
    let mut row_error: Option<CliError> = None;
    let mut m = m_from;
    while m <= m_to {
        let row = match correlation_bracket(&schedule, &a, &b, &m, cap) {
            Ok(row) => row,
            Err(e) => {
                row_error = Some(e.into());
                break;
            }
        };
        levels.push(if row.gap() <= tolerance {
            EXIT_PASS
        } else {
            EXIT_INDETERMINATE
        });
        let cell = match &bound {
            None => None,
            Some(bound) => {
                let (cell, bound_level) = check_bound(bound, &schedule, &row)?;
                levels.push(bound_level);
                cell
            }
        };
        rows.push((row, cell));
        m += args.stride;
    }

    let content = render(&rows, bound.is_some(), &args.format)?;
    write_output(&args.out, &content)?;

    let fold = fold_exit(levels);
    if let Some(err) = row_error {
        if fold == EXIT_FAIL {
            // A certified bound violation outranks the later error.
            eprintln!("rank1: {err}");
            return Ok(EXIT_FAIL);
        }
        return Err(err);
    }
    Ok(fold)
}

fn parse_bound(
    args: &SweepArgs,
    schedule: &ConstructionSchedule,
    a: &LevelSet,
) -> CliResult<Option<Bound>> {
    let Some(raw) = args.bound.as_deref() else {
        return Ok(None);
    };
    let bound = match raw.split_once(':') {
        None if raw == "sidon" => Bound::Sidon {
            mu_a: a.measure(schedule)?,
        },
        _ if raw == "decay" || raw.starts_with("decay:") => {
            let ScheduleMeta::Decay { rate, .. } = schedule.meta() else {
                return Err(CliError::Usage(
                    "--bound decay requires a decay-family schedule".into(),
                ));
            };
            let c = match raw.split_once(':') {
                Some((_, c)) => parse_ratio(c)?,
                None => suggest_decay_constant(schedule, *rate, &a.measure(schedule)?)?,
            };
            if !c.is_positive() {
                return Err(CliError::Usage(format!(
                    "decay bound constant must be positive, got {}",
                    format_ratio(&c)
                )));
            }
            Bound::Decay { c, psi: *rate }
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown bound `{raw}` (expected sidon or decay[:P/Q])"
            )));
        }
    };
    Ok(Some(bound))
}

/// Bound cell text (when the bound is defined at this shift) and the row's
/// verdict level against it.
fn check_bound(
    bound: &Bound,
    schedule: &ConstructionSchedule,
    row: &CorrelationResult,
) -> CliResult<(Option<String>, u8)> {
    let mag = row.m.abs();
    match bound {
        Bound::Sidon { mu_a } => {
            let heights = schedule.heights();
            for j in 1..=schedule.num_stages() {
                if mag > heights[j - 1] && mag <= heights[j] {
                    let b = mu_a / BigRational::from(BigInt::from(schedule.stage(j)?.r()));
                    let level = if row.upper <= b {
                        EXIT_PASS
                    } else if row.lower > b {
                        EXIT_FAIL
                    } else {
                        EXIT_INDETERMINATE
                    };
                    return Ok((Some(format_ratio(&b)), level));
                }
            }
            // |m| <= h_1 or beyond the last tower: no stratum, no bound.
            Ok((None, EXIT_PASS))
        }
        Bound::Decay { c, psi } => {
            if mag < BigInt::from(psi.min_arg().max(1)) {
                return Ok((None, EXIT_PASS));
            }
            let cell = c * psi.over_sqrt(&mag, 128)?.lo;
            let level = match cert_le_scaled_rate(&row.upper, c, *psi, &mag)? {
                Some(true) => EXIT_PASS,
                _ => match cert_le_scaled_rate(&row.lower, c, *psi, &mag)? {
                    Some(false) => EXIT_FAIL,
                    _ => EXIT_INDETERMINATE,
                },
            };
            Ok((Some(format_ratio(&cell)), level))
        }
    }
}

fn render(
    rows: &[(CorrelationResult, Option<String>)],
    with_bound: bool,
    format: &str,
) -> CliResult<String> {
    match format {
        "csv" => {
            let mut out = String::from(if with_bound {
                "m,lower,upper,stage_used,bound\n"
            } else {
                "m,lower,upper,stage_used\n"
            });
            for (row, cell) in rows {
                out.push_str(&format!(
                    "{},{},{},{}",
                    row.m,
                    format_ratio(&row.lower),
                    format_ratio(&row.upper),
                    row.stage_used
                ));
                if with_bound {
                    out.push(',');
                    if let Some(cell) = cell {
                        out.push_str(cell);
                    }
                }
                out.push('\n');
            }
            Ok(out)
        }
        "json" => {
            let mut values = Vec::with_capacity(rows.len());
            for (row, cell) in rows {
                let mut value = serde_json::to_value(row)?;
                if with_bound {
                    value["bound"] = match cell {
                        Some(cell) => Value::String(cell.clone()),
                        None => Value::Null,
                    };
                }
                values.push(value);
            }
            to_pretty_json(&values)
        }
        other => Err(CliError::Usage(format!(
            "unknown format `{other}` (expected csv or json)"
        ))),
    }
}
