//! `rank1 verify` — run property verifications and emit a JSON array of
//! reports, ordered by (property, stage). Exit code folds the verdicts:
//! any fail -> 1, else any indeterminate -> 2, else 0.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, RandBigInt};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rankone::exact::parse_ratio;
use rankone::{
    column_offsets, suggest_decay_constant, verify_decay, verify_injectivity,
    verify_lemma_decomposition, verify_ornstein, verify_sidon, ConstructionSchedule, LevelSet,
    ScheduleMeta, SlowFn, Verdict, VerificationReport, SIDON_PAIR_CAP,
};

use crate::args::VerifyArgs;
use crate::report::{
    fold_exit, load_schedule, resolve_cap, to_pretty_json, write_output, CliError, CliResult,
    EXIT_FAIL, EXIT_INDETERMINATE, EXIT_PASS,
};
use crate::sets::parse_set;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Prop {
    Ornstein,
    Injectivity,
    Sidon,
    Decay,
    Lemma,
}

impl Prop {
    fn parse(token: &str) -> CliResult<Self> {
        Ok(match token {
            "ornstein" => Prop::Ornstein,
            "injectivity" => Prop::Injectivity,
            "sidon" => Prop::Sidon,
            "decay" => Prop::Decay,
            "lemma" => Prop::Lemma,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown property `{other}` (expected ornstein, injectivity, sidon, decay, lemma, or all)"
                )));
            }
        })
    }
}

pub fn run(args: VerifyArgs) -> CliResult<u8> {
    if args.format != "json" {
        return Err(CliError::Usage(format!(
            "verify only supports --format json, got `{}`",
            args.format
        )));
    }
    let schedule = load_schedule(&args.schedule)?;
    let cap = resolve_cap(args.cap)?;
    let stages = parse_stage_filter(&args.stages, schedule.num_stages())?;
    let (props, auto) = parse_props(&args.props, schedule.meta())?;

    let mut reports: Vec<VerificationReport> = Vec::new();
    for prop in props {
        match prop {
            Prop::Ornstein => {
                for &j in &stages {
                    reports.push(verify_ornstein(&schedule, j)?);
                }
            }
            Prop::Injectivity => {
                for &j in &stages {
                    reports.push(verify_injectivity(&schedule, j)?);
                }
            }
            Prop::Sidon => {
                for &j in &stages {
                    if auto {
                        let r = schedule.stage(j)?.r() as u128;
                        if r * (r - 1) / 2 > SIDON_PAIR_CAP {
                            eprintln!(
                                "rank1: skipping sidon at stage {j}: {r} columns exceed the pair cap"
                            );
                            continue;
                        }
                    }
                    reports.push(verify_sidon(&schedule, j, args.budget, args.seed)?);
                }
            }
            Prop::Decay => reports.push(run_decay(&schedule, &args, cap)?),
            Prop::Lemma => {
                for &j in &stages {
                    reports.push(run_lemma(&schedule, j, &args, cap)?);
                }
            }
        }
    }

    let content = to_pretty_json(&reports)?;
    write_output(&args.out, &content)?;
    Ok(fold_exit(reports.iter().map(|r| match r.verdict {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    })))
}

/// Expand `--props`: `all` maps to the properties the schedule's family
/// actually claims (algebraic schedules spread correlations through spacer
/// deviations, not Sidon differences, so sidon stays opt-in there); the
/// returned flag records that auto mode is active (pair-cap-oversized sidon
/// stages are then skipped instead of erroring).
fn parse_props(raw: &str, meta: &ScheduleMeta) -> CliResult<(Vec<Prop>, bool)> {
    if raw == "all" {
        let props = match meta {
            ScheduleMeta::Algebraic { .. } => {
                vec![Prop::Ornstein, Prop::Injectivity, Prop::Lemma]
            }
            ScheduleMeta::Decay { .. } => vec![Prop::Sidon, Prop::Decay, Prop::Lemma],
            ScheduleMeta::Explicit | ScheduleMeta::Sidon { .. } => vec![Prop::Sidon, Prop::Lemma],
        };
        return Ok((props, true));
    }
    let mut props = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(CliError::Usage(
                "--props must name at least one property (or `all`)".into(),
            ));
        }
        let prop = Prop::parse(token)?;
        if !props.contains(&prop) {
            props.push(prop);
        }
    }
    if props.is_empty() {
        return Err(CliError::Usage(
            "--props must name at least one property (or `all`)".into(),
        ));
    }
    Ok((props, false))
}

fn parse_stage_filter(raw: &str, num_stages: usize) -> CliResult<Vec<usize>> {
    if raw == "all" {
        return Ok((1..=num_stages).collect());
    }
    let mut stages = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        let j: usize = token.parse().map_err(|_| {
            CliError::Usage(format!(
                "invalid stage `{token}` (expected 1..={num_stages})"
            ))
        })?;
        if j == 0 || j > num_stages {
            return Err(CliError::Usage(format!(
                "stage {j} out of range 1..={num_stages}"
            )));
        }
        if !stages.contains(&j) {
            stages.push(j);
        }
    }
    stages.sort_unstable();
    Ok(stages)
}

/// Decay check: every sampled shift `m` must satisfy the certified bound
/// `corr(m) <= C * psi(m) / sqrt(m)`. Samples are all column-offset
/// differences of the base tower's stage plus `--samples` seeded draws from
/// each fully-resolvable stratum `(h_j, h_{j+1}]`.
fn run_decay(
    schedule: &ConstructionSchedule,
    args: &VerifyArgs,
    cap: usize,
) -> CliResult<VerificationReport> {
    let a = parse_set(schedule, &args.set_a, cap)?;
    let psi = match (&args.psi, schedule.meta()) {
        (Some(raw), _) => raw
            .parse::<SlowFn>()
            .map_err(|e| CliError::Usage(e.to_string()))?,
        (None, ScheduleMeta::Decay { rate, .. }) => *rate,
        (None, _) => {
            return Err(CliError::Usage(
                "--psi is required for decay checks on non-decay schedules".into(),
            ));
        }
    };
    let mu = a.measure(schedule)?;
    let c = match &args.constant {
        Some(raw) => parse_ratio(raw)?,
        None => suggest_decay_constant(schedule, psi, &mu)?,
    };
    let samples = decay_samples(schedule, a.tower(), args.samples, args.seed, cap)?;
    Ok(verify_decay(schedule, &a, psi, &c, &samples, cap)?)
}

fn decay_samples(
    schedule: &ConstructionSchedule,
    tower: usize,
    per_stratum: u64,
    seed: u64,
    cap: usize,
) -> CliResult<Vec<BigInt>> {
    let last = schedule.num_stages();
    if tower + 1 > last {
        return Err(CliError::Usage(format!(
            "decay sampling needs a stage above tower {tower}'s stratum; \
             this schedule has {last} stage(s)"
        )));
    }
    let offs = column_offsets(schedule, tower)?;
    let r = offs.r();
    let pairs = r as u128 * (r as u128 - 1) / 2;
    if pairs > 2_000_000 {
        return Err(CliError::Usage(format!(
            "stage {tower} has {r} columns ({pairs} offset pairs); pick a base \
             tower with fewer columns"
        )));
    }
    let mut set: BTreeSet<BigInt> = BTreeSet::new();
    for c1 in 1..=r {
        for c2 in c1 + 1..=r {
            set.insert(offs.offset(c2) - offs.offset(c1));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: u128 = 1;
    // Random shifts per stratum (h_j, h_{j+1}], restricted to strata whose
    // correlations stay within the position cap.
    for j in tower..=last - 1 {
        positions = positions.saturating_mul(schedule.stage(j)?.r() as u128);
        if positions > cap as u128 {
            break;
        }
        let lo = schedule.height(j)? + 1;
        let hi = schedule.height(j + 1)? + 1;
        if lo >= hi {
            continue;
        }
        for _ in 0..per_stratum {
            set.insert(rng.gen_bigint_range(&lo, &hi));
        }
    }
    Ok(set.into_iter().collect())
}

/// Lemma check at one stage: `--trials` random triples (A, B, l) with small
/// level sets and |l| within reach; the per-trial reports merge into one.
fn run_lemma(
    schedule: &ConstructionSchedule,
    j: usize,
    args: &VerifyArgs,
    cap: usize,
) -> CliResult<VerificationReport> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(args.seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let h = schedule.height(j)?.clone();
    let reach = schedule.height(schedule.num_towers())? - &h;
    let span = (&h + BigInt::from(10)).min(reach);

    let mut merged = VerificationReport {
        property: "lemma".into(),
        stage_range: vec![j],
        verdict: Verdict::Pass,
        witnesses: Vec::new(),
        stats: BTreeMap::new(),
    };
    for _ in 0..args.trials {
        let a = random_set(&mut rng, schedule, j, &h)?;
        let b = random_set(&mut rng, schedule, j, &h)?;
        let l = rng.gen_bigint_range(&(-&span), &(&span + 1));
        let rep = verify_lemma_decomposition(schedule, j, &l, &a, &b, cap)?;
        merged.verdict = merged.verdict.and(rep.verdict);
        merged.witnesses.extend(rep.witnesses);
        for (key, v) in rep.stats {
            *merged.stats.entry(key).or_insert(0) += v;
        }
    }
    merged.stats.insert("trials".into(), args.trials);
    Ok(merged)
}

fn random_set(
    rng: &mut ChaCha8Rng,
    schedule: &ConstructionSchedule,
    j: usize,
    h: &BigInt,
) -> CliResult<LevelSet> {
    let max_levels = (h + 1u32).to_u64().unwrap_or(4).min(4);
    let count = rng.gen_range(1..=max_levels) as usize;
    let hi = h + 1u32;
    let mut levels: BTreeSet<BigInt> = BTreeSet::new();
    let mut attempts = 0;
    while levels.len() < count && attempts < 64 {
        levels.insert(rng.gen_bigint_range(&BigInt::zero(), &hi));
        attempts += 1;
    }
    Ok(LevelSet::new(schedule, j, levels.into_iter().collect())?)
}
