//! `rank1 build` — construct a schedule from family parameters, write the
//! JSON interchange form, and echo the derived heights (plus, for decay
//! schedules, the certified per-stage threshold comparisons) to stderr.

use num_bigint::BigInt;
use serde::Serialize;

use rankone::certfn::cert_ge_sqrt;
use rankone::exact::{parse_int, parse_ratio};
use rankone::{
    algebraic_schedule, decay_rate_schedule, find_primitive_root, sidon_growth_schedule,
    AlgebraicStageParams, ConstructionSchedule, ScheduleMeta, SlowFn, StageSpec,
};

use crate::args::BuildArgs;
use crate::report::{to_pretty_json, write_output, CliError, CliResult, EXIT_PASS};

#[derive(Serialize)]
struct StageThreshold {
    stage: usize,
    r: u64,
    comparison: String,
    certified: bool,
}

#[derive(Serialize)]
struct BuildEcho {
    heights: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    stage_thresholds: Vec<StageThreshold>,
}

pub fn run(args: BuildArgs) -> CliResult<u8> {
    if args.format != "json" {
        return Err(CliError::Usage(format!(
            "build emits json only, not `{}`",
            args.format
        )));
    }
    let schedule = construct(&args)?;

    let echo = BuildEcho {
        heights: schedule.heights().iter().map(BigInt::to_string).collect(),
        stage_thresholds: thresholds(&schedule)?,
    };
    eprint!("{}", to_pretty_json(&echo)?);

    write_output(&args.out, &to_pretty_json(&schedule)?)?;
    Ok(EXIT_PASS)
}

fn construct(args: &BuildArgs) -> CliResult<ConstructionSchedule> {
    let schedule = match args.family.as_str() {
        "explicit" => {
            let h1 = args
                .h1
                .ok_or_else(|| CliError::Usage("explicit family requires --h1".into()))?;
            if args.spacers.is_empty() {
                return Err(CliError::Usage(
                    "explicit family requires at least one --spacers list".into(),
                ));
            }
            let stages = args
                .spacers
                .iter()
                .map(|raw| Ok(StageSpec::new(parse_int_list(raw)?)?))
                .collect::<CliResult<Vec<_>>>()?;
            ConstructionSchedule::explicit(h1, stages)?
        }
        "algebraic" => {
            let raw = args
                .primes
                .as_deref()
                .ok_or_else(|| CliError::Usage("algebraic family requires --primes".into()))?;
            let primes = parse_u64_list(raw)?;
            let last_spacer = parse_int(&args.s_last)?;
            let params = primes
                .iter()
                .map(|&p| {
                    let base_spacer = match args.bulk.as_str() {
                        "r" => BigInt::from(p),
                        other => parse_int(other)?,
                    };
                    Ok(AlgebraicStageParams {
                        r: p,
                        q: find_primitive_root(p)?,
                        base_spacer,
                        last_spacer: last_spacer.clone(),
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            algebraic_schedule(args.h1.unwrap_or(1), params)?
        }
        "sidon" => {
            let raw = args
                .cuts
                .as_deref()
                .ok_or_else(|| CliError::Usage("sidon family requires --cuts".into()))?;
            sidon_growth_schedule(args.h1.unwrap_or(1), &parse_u64_list(raw)?, args.growth)?
        }
        "decay" => {
            let psi = parse_psi(
                args.psi
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("decay family requires --psi".into()))?,
            )?;
            let stages = args
                .stages
                .ok_or_else(|| CliError::Usage("decay family requires --stages".into()))?;
            decay_rate_schedule(
                args.h1.unwrap_or(2),
                psi,
                parse_ratio(&args.c_hint)?,
                stages,
                args.r_cap,
            )?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown family `{other}` (expected explicit, algebraic, sidon, or decay)"
            )));
        }
    };
    Ok(schedule)
}

/// Re-derive the per-stage growth-threshold certificates for decay schedules:
/// stage j was sized so that psi(h_{j+1}) >= sqrt(h_j) holds certifiably.
fn thresholds(schedule: &ConstructionSchedule) -> CliResult<Vec<StageThreshold>> {
    let ScheduleMeta::Decay { rate, .. } = schedule.meta() else {
        return Ok(Vec::new());
    };
    let mut rows = Vec::new();
    for j in 1..=schedule.num_stages() {
        let h = schedule.height(j)?;
        let h_next = schedule.height(j + 1)?;
        rows.push(StageThreshold {
            stage: j,
            r: schedule.stage(j)?.r(),
            comparison: format!("{rate}({h_next}) >= sqrt({h})"),
            certified: cert_ge_sqrt(*rate, h_next, h)?,
        });
    }
    Ok(rows)
}

fn parse_psi(raw: &str) -> CliResult<SlowFn> {
    raw.parse::<SlowFn>()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_int_list(raw: &str) -> CliResult<Vec<BigInt>> {
    raw.split(',')
        .map(|t| Ok(parse_int(t)?))
        .collect::<CliResult<Vec<_>>>()
}

fn parse_u64_list(raw: &str) -> CliResult<Vec<u64>> {
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("`{t}` is not a positive integer")))
        })
        .collect()
}
