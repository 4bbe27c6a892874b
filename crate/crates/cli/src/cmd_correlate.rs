//! `rank1 correlate` — bracket one correlation mu(T^m A ∩ B). Exits 0 when
//! the bracket is within tolerance, 2 when it stays wider (indeterminate).

use rankone::correlation_bracket;
use rankone::exact::{format_ratio, parse_int};

use crate::args::CorrelateArgs;
use crate::report::{
    load_schedule, parse_tolerance, resolve_cap, to_pretty_json, write_output, CliError, CliResult,
    EXIT_INDETERMINATE, EXIT_PASS,
};
use crate::sets::parse_set;

pub fn run(args: CorrelateArgs) -> CliResult<u8> {
    let schedule = load_schedule(&args.schedule)?;
    let cap = resolve_cap(args.cap)?;
    let tolerance = parse_tolerance(&args.tolerance)?;
    let a = parse_set(&schedule, &args.set_a, cap)?;
    let b = parse_set(&schedule, &args.set_b, cap)?;
    let m = parse_int(&args.m)?;

    let row = correlation_bracket(&schedule, &a, &b, &m, cap)?;
    let content = match args.format.as_str() {
        "json" => to_pretty_json(&row)?,
        "csv" => format!(
            "m,lower,upper,stage_used\n{},{},{},{}\n",
            row.m,
            format_ratio(&row.lower),
            format_ratio(&row.upper),
            row.stage_used
        ),
        other => {
            return Err(CliError::Usage(format!(
                "unknown format `{other}` (expected json or csv)"
            )));
        }
    };
    write_output(&args.out, &content)?;
    Ok(if row.gap() <= tolerance {
        EXIT_PASS
    } else {
        EXIT_INDETERMINATE
    })
}
