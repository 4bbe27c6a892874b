//! `rank1 coeffs` — joining coefficients a_j^k for the off-diagonal joining
//! carried by T^l. Exits 0 when every bracket collapsed, 2 otherwise.

use rankone::exact::{format_ratio, parse_int};
use rankone::joining_coefficients;

use crate::args::CoeffsArgs;
use crate::report::{
    load_schedule, resolve_cap, to_pretty_json, write_output, CliError, CliResult,
    EXIT_INDETERMINATE, EXIT_PASS,
};

pub fn run(args: CoeffsArgs) -> CliResult<u8> {
    let schedule = load_schedule(&args.schedule)?;
    let cap = resolve_cap(args.cap)?;
    let l = parse_int(&args.shift)?;

    let coeffs = joining_coefficients(&schedule, args.stage, &l, cap)?;
    let content = match args.format.as_str() {
        "json" => to_pretty_json(&coeffs)?,
        "csv" => {
            let mut out = String::from("k,lower,upper\n");
            for entry in &coeffs.entries {
                out.push_str(&format!(
                    "{},{},{}\n",
                    entry.k,
                    format_ratio(&entry.lower),
                    format_ratio(&entry.upper)
                ));
            }
            out
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown format `{other}` (expected json or csv)"
            )));
        }
    };
    write_output(&args.out, &content)?;
    Ok(
        if coeffs.is_exact() && coeffs.mass_lower == coeffs.mass_upper {
            EXIT_PASS
        } else {
            EXIT_INDETERMINATE
        },
    )
}
