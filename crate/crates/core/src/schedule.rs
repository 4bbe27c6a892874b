//! Construction schedules: the per-stage cut counts and spacer vectors that
//! define a rank-one cutting-and-stacking transformation, together with the
//! generators for the supported spacer families.
//!
//! Indexing convention used throughout the crate: tower `j` (1-based) has
//! `h_j + 1` levels `0..=h_j`; cutting stage `j` cuts tower `j` into `r_j`
//! columns and puts `s_j(i)` spacers on top of column `i`, producing tower
//! `j+1` with `h_{j+1} + 1 = (h_j + 1) r_j + sum_i s_j(i)`. The base of tower
//! `j` has measure `1 / prod_{l<j} r_l`, so the space has infinite total
//! measure whenever spacer mass keeps being added.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::certfn::{cert_ge_sqrt, SlowFn};
use crate::error::{Error, Result};
use crate::exact::{int_str, int_vec_str, ratio_str};

/// One cutting stage: `r` columns, one spacer count per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSpec {
    r: u64,
    spacers: Vec<BigInt>,
}

impl StageSpec {
    /// The cut count is the spacer vector's length.
    pub fn new(spacers: Vec<BigInt>) -> Result<Self> {
        if spacers.len() < 2 {
            return Err(Error::InvalidParam(format!(
                "a stage needs at least 2 columns, got {}",
                spacers.len()
            )));
        }
        if let Some(bad) = spacers.iter().find(|s| s.is_negative()) {
            return Err(Error::InvalidParam(format!("negative spacer count {bad}")));
        }
        Ok(StageSpec {
            r: spacers.len() as u64,
            spacers,
        })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn spacers(&self) -> &[BigInt] {
        &self.spacers
    }

    pub fn spacer(&self, column: u64) -> &BigInt {
        &self.spacers[(column - 1) as usize]
    }

    /// Total spacer mass added by this stage.
    pub fn spacer_sum(&self) -> BigInt {
        self.spacers.iter().sum()
    }

    /// Replace one column's spacer count; used to build corrupted variants
    /// when testing that the verifiers actually detect violations.
    pub fn with_spacer(&self, column: u64, value: BigInt) -> Result<Self> {
        let mut spacers = self.spacers.clone();
        spacers[(column - 1) as usize] = value;
        StageSpec::new(spacers)
    }
}

/// Parameters of one algebraic stage: a prime cut count `r`, a primitive
/// root `q` mod `r`, the bulk spacer height, and the final column's spacer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraicStageParams {
    pub r: u64,
    pub q: u64,
    #[serde(with = "int_str")]
    pub base_spacer: BigInt,
    #[serde(with = "int_str")]
    pub last_spacer: BigInt,
}

/// Which generator produced the schedule, with enough parameters to
/// reproduce it. Verifiers that need per-stage algebraic data read it here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum ScheduleMeta {
    Explicit,
    Algebraic {
        stages: Vec<AlgebraicStageParams>,
    },
    Sidon {
        growth_factor: u64,
    },
    Decay {
        rate: SlowFn,
        #[serde(with = "ratio_str")]
        c_hint: BigRational,
        growth_factor: u64,
        r_cap: u64,
    },
}

/// A complete construction schedule with derived tower heights.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionSchedule {
    h1: u64,
    stages: Vec<StageSpec>,
    heights: Vec<BigInt>,
    meta: ScheduleMeta,
}

impl ConstructionSchedule {
    pub fn new(h1: u64, stages: Vec<StageSpec>, meta: ScheduleMeta) -> Result<Self> {
        if let ScheduleMeta::Algebraic { stages: params } = &meta {
            if params.len() != stages.len() {
                return Err(Error::InvalidParam(format!(
                    "algebraic metadata covers {} stages but the schedule has {}",
                    params.len(),
                    stages.len()
                )));
            }
            for (idx, (p, s)) in params.iter().zip(&stages).enumerate() {
                if p.r != s.r() {
                    return Err(Error::InvalidParam(format!(
                        "stage {}: algebraic metadata says r={} but the stage has r={}",
                        idx + 1,
                        p.r,
                        s.r()
                    )));
                }
            }
        }
        let heights = derive_heights(h1, &stages);
        Ok(ConstructionSchedule {
            h1,
            stages,
            heights,
            meta,
        })
    }

    pub fn explicit(h1: u64, stages: Vec<StageSpec>) -> Result<Self> {
        Self::new(h1, stages, ScheduleMeta::Explicit)
    }

    pub fn h1(&self) -> u64 {
        self.h1
    }

    pub fn meta(&self) -> &ScheduleMeta {
        &self.meta
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    /// Towers are indexed `1..=num_towers`; the last one has no cutting
    /// stage above it.
    pub fn num_towers(&self) -> usize {
        self.stages.len() + 1
    }

    pub fn stage(&self, j: usize) -> Result<&StageSpec> {
        if j == 0 || j > self.stages.len() {
            return Err(Error::StageOutOfRange {
                stage: j,
                max: self.stages.len(),
            });
        }
        Ok(&self.stages[j - 1])
    }

    pub fn stages(&self) -> &[StageSpec] {
        &self.stages
    }

    /// Height `h_j` of tower `j`.
    pub fn height(&self, tower: usize) -> Result<&BigInt> {
        if tower == 0 || tower > self.num_towers() {
            return Err(Error::TowerOutOfRange {
                tower,
                max: self.num_towers(),
            });
        }
        Ok(&self.heights[tower - 1])
    }

    pub fn heights(&self) -> &[BigInt] {
        &self.heights
    }

    /// Measure of one level of tower `j`: `1 / prod_{l<j} r_l`.
    pub fn level_measure(&self, tower: usize) -> Result<BigRational> {
        if tower == 0 || tower > self.num_towers() {
            return Err(Error::TowerOutOfRange {
                tower,
                max: self.num_towers(),
            });
        }
        let mut denom = BigInt::one();
        for stage in &self.stages[..tower - 1] {
            denom *= BigInt::from(stage.r());
        }
        Ok(BigRational::new(BigInt::one(), denom))
    }

    /// Total measure of tower `j`, `(h_j + 1) * level_measure(j)`.
    pub fn tower_measure(&self, tower: usize) -> Result<BigRational> {
        let levels = self.height(tower)? + 1;
        Ok(BigRational::from_integer(levels) * self.level_measure(tower)?)
    }

    /// Smallest tower whose height reaches `min_height`, if any.
    pub fn tower_reaching(&self, min_height: &BigInt) -> Option<usize> {
        self.heights
            .iter()
            .position(|h| h >= min_height)
            .map(|idx| idx + 1)
    }

    /// Deviation of a consecutive spacer sum from the bulk:
    /// `S_j(i, n) = sum_{k=1..n} s_j(i+k) - n * base_spacer`, computed from
    /// the actual spacer vector (not from any closed form), so corrupted
    /// spacers change the result. Defined for algebraic stages only, for
    /// `1 <= i`, `1 <= n`, `i + n <= r_j - 1`.
    pub fn deviation_sum(&self, j: usize, i: u64, n: u64) -> Result<BigInt> {
        let params = self.algebraic_params(j)?;
        let stage = self.stage(j)?;
        if i < 1 || n < 1 || i + n > stage.r() - 1 {
            return Err(Error::InvalidParam(format!(
                "deviation window i={i}, n={n} outside 1 <= i, 1 <= n, i+n <= {}",
                stage.r() - 1
            )));
        }
        let mut sum = BigInt::zero();
        for k in 1..=n {
            sum += stage.spacer(i + k);
        }
        Ok(sum - &params.base_spacer * BigInt::from(n))
    }

    pub fn algebraic_params(&self, j: usize) -> Result<&AlgebraicStageParams> {
        match &self.meta {
            ScheduleMeta::Algebraic { stages } if j >= 1 && j <= stages.len() => Ok(&stages[j - 1]),
            _ => Err(Error::NotAlgebraic { stage: j }),
        }
    }

    /// Same schedule with one stage swapped out (heights re-derived); the
    /// metadata is kept so property verifiers still run on the mutant.
    pub fn with_stage(&self, j: usize, stage: StageSpec) -> Result<Self> {
        self.stage(j)?;
        let mut stages = self.stages.clone();
        stages[j - 1] = stage;
        let heights = derive_heights(self.h1, &stages);
        Ok(ConstructionSchedule {
            h1: self.h1,
            stages,
            heights,
            meta: self.meta.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `h_{j+1} = (h_j + 1) r_j + sum_i s_j(i) - 1`, exactly; returns all tower
/// heights `h_1..h_{J+1}`.
pub fn derive_heights(h1: u64, stages: &[StageSpec]) -> Vec<BigInt> {
    let mut heights = Vec::with_capacity(stages.len() + 1);
    heights.push(BigInt::from(h1));
    for stage in stages {
        let h = heights.last().unwrap();
        let next = (h + 1u32) * stage.r() + stage.spacer_sum() - 1u32;
        heights.push(next);
    }
    heights
}

/// Smallest prime factor if composite.
fn smallest_factor(p: u64) -> Option<u64> {
    if p.is_multiple_of(2) && p != 2 {
        return Some(2);
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return Some(d);
        }
        d += 2;
    }
    None
}

fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    // modulus < 2^31 keeps every product below 2^62.
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut factors = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            factors.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

/// Smallest primitive root mod a prime `p <= 2^31`. A candidate `q` is a
/// generator iff `q^((p-1)/f) != 1` for every prime factor `f` of `p - 1`.
pub fn find_primitive_root(p: u64) -> Result<u64> {
    if p > 1 << 31 {
        return Err(Error::PrimeTooLarge { p });
    }
    if p < 2 {
        return Err(Error::InvalidParam(format!("{p} is not prime")));
    }
    if let Some(factor) = smallest_factor(p) {
        return Err(Error::NotPrime { p, factor });
    }
    if p == 2 {
        return Ok(1);
    }
    let factors = distinct_prime_factors(p - 1);
    for q in 2..p {
        if factors.iter().all(|f| mod_pow(q, (p - 1) / f, p) != 1) {
            return Ok(q);
        }
    }
    unreachable!("every prime has a primitive root below itself")
}

/// Spacer vector of one algebraic stage: with `rep(x)` the representative of
/// `x` in `1..r-1`, column `i < r` gets `base_spacer + rep(q^i) - rep(q^(i+1))`
/// and the last column gets `last_spacer`. The choice of a primitive root
/// makes consecutive-sum fluctuations around the bulk height stay below `r`
/// and pairwise distinct, which the verifiers check from the spacers
/// themselves.
pub fn algebraic_spacers(params: &AlgebraicStageParams) -> Result<StageSpec> {
    let r = params.r;
    if r > 1 << 31 {
        return Err(Error::PrimeTooLarge { p: r });
    }
    if let Some(factor) = smallest_factor(r) {
        return Err(Error::NotPrime { p: r, factor });
    }
    if params.q == 0 || params.q >= r {
        return Err(Error::InvalidParam(format!(
            "generator {} out of range for modulus {r}",
            params.q
        )));
    }
    if r > 2 {
        let factors = distinct_prime_factors(r - 1);
        if !factors
            .iter()
            .all(|f| mod_pow(params.q, (r - 1) / f, r) != 1)
        {
            return Err(Error::InvalidParam(format!(
                "{} is not a primitive root mod {r}",
                params.q
            )));
        }
    }
    if params.base_spacer < BigInt::from(r) {
        return Err(Error::InvalidParam(format!(
            "bulk spacer height {} below the cut count {r}",
            params.base_spacer
        )));
    }
    if params.last_spacer.is_negative() {
        return Err(Error::InvalidParam("negative last spacer".into()));
    }

    let mut spacers = Vec::with_capacity(r as usize);
    let mut rep = params.q % r; // rep(q^1)
    for _ in 1..r {
        let next = rep * params.q % r; // rep(q^(i+1))
        spacers.push(&params.base_spacer + BigInt::from(rep) - BigInt::from(next));
        rep = next;
    }
    spacers.push(params.last_spacer.clone());
    StageSpec::new(spacers)
}

/// Whole algebraic schedule from per-stage parameters.
pub fn algebraic_schedule(
    h1: u64,
    params: Vec<AlgebraicStageParams>,
) -> Result<ConstructionSchedule> {
    let stages = params
        .iter()
        .map(algebraic_spacers)
        .collect::<Result<Vec<_>>>()?;
    ConstructionSchedule::new(h1, stages, ScheduleMeta::Algebraic { stages: params })
}

/// Sidon-type schedule: each stage's spacers follow the minimal domination
/// chain `s(1) = g (h_j + 1)`, `s(i+1) = g (s(i) + h_j + 1)`, which keeps all
/// pairwise column-offset differences far apart (the single-column property
/// checked by `verify::verify_sidon`).
pub fn sidon_growth_schedule(
    h1: u64,
    cuts: &[u64],
    growth_factor: u64,
) -> Result<ConstructionSchedule> {
    if growth_factor < 2 {
        return Err(Error::InvalidParam(format!(
            "growth factor must be at least 2, got {growth_factor}"
        )));
    }
    if cuts.is_empty() {
        return Err(Error::InvalidParam("no cutting stages requested".into()));
    }
    let mut stages = Vec::with_capacity(cuts.len());
    let mut h = BigInt::from(h1);
    for &r in cuts {
        if r < 2 {
            return Err(Error::InvalidParam(format!("cut count {r} below 2")));
        }
        let stage = sidon_stage(&h, r, growth_factor);
        h = (&h + 1u32) * stage.r() + stage.spacer_sum() - 1u32;
        stages.push(stage);
    }
    ConstructionSchedule::new(h1, stages, ScheduleMeta::Sidon { growth_factor })
}

fn sidon_stage(h: &BigInt, r: u64, growth_factor: u64) -> StageSpec {
    let base = h + 1u32;
    let mut spacers = Vec::with_capacity(r as usize);
    let mut s = &base * growth_factor;
    spacers.push(s.clone());
    for _ in 1..r {
        s = (&s + &base) * growth_factor;
        spacers.push(s.clone());
    }
    StageSpec::new(spacers).expect("chain spacers are positive")
}

/// Height that a growth-2 chain stage over height `h` reaches with `r` cuts:
/// `h' + 1 = (h + 1)(2^(r+2) - r - 4)`. Closed form so the cut-count search
/// does not materialize spacer vectors.
fn chain_height_after(h: &BigInt, r: u64) -> BigInt {
    let base = h + 1u32;
    let factor = (BigInt::one() << (r + 2)) - r - 4u32;
    base * factor - 1u32
}

/// Decay-rate schedule: per stage, the smallest `r_j >= 2` whose chain-built
/// next height `h_{j+1}` certifies `rate(h_{j+1}) >= sqrt(h_j)` under directed
/// rounding. The certified threshold makes the per-stage correlation bound
/// `1/r_j` compatible with a `C * rate(m) / sqrt(m)` envelope.
pub fn decay_rate_schedule(
    h1: u64,
    rate: SlowFn,
    c_hint: BigRational,
    max_stages: usize,
    r_cap: u64,
) -> Result<ConstructionSchedule> {
    if h1 < 2 {
        return Err(Error::InvalidParam(format!(
            "decay schedules need h1 >= 2 so ln ln stays defined, got {h1}"
        )));
    }
    if !c_hint.is_positive() {
        return Err(Error::InvalidParam(
            "rate constant hint must be positive".into(),
        ));
    }
    if max_stages == 0 {
        return Err(Error::InvalidParam("no cutting stages requested".into()));
    }
    if r_cap < 2 {
        return Err(Error::InvalidParam(format!(
            "cut-count cap {r_cap} below 2"
        )));
    }

    let growth_factor = 2;
    let mut stages = Vec::with_capacity(max_stages);
    let mut h = BigInt::from(h1);
    for stage_idx in 1..=max_stages {
        let certifies =
            |r: u64| -> Result<bool> { cert_ge_sqrt(rate, &chain_height_after(&h, r), &h) };
        // The chain height is strictly increasing in r, so the certified
        // predicate is monotone: double to bracket, then bisect.
        let r = if certifies(2)? {
            2
        } else {
            let mut lo = 2u64; // certified false
            let mut hi = 4u64;
            loop {
                if hi >= r_cap {
                    if certifies(r_cap)? {
                        hi = r_cap;
                        break;
                    }
                    return Err(Error::DecayCapExceeded {
                        stage: stage_idx,
                        cap: r_cap,
                        attained: chain_height_after(&h, r_cap),
                    });
                }
                if certifies(hi)? {
                    break;
                }
                lo = hi;
                hi = (hi * 2).min(r_cap);
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if certifies(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let stage = sidon_stage(&h, r, growth_factor);
        let next = (&h + 1u32) * stage.r() + stage.spacer_sum() - 1u32;
        debug_assert_eq!(next, chain_height_after(&h, r));
        h = next;
        stages.push(stage);
    }
    ConstructionSchedule::new(
        h1,
        stages,
        ScheduleMeta::Decay {
            rate,
            c_hint,
            growth_factor,
            r_cap,
        },
    )
}

// ---------------------------------------------------------------------------
// Wire format: heights are derived, never serialized.

#[derive(Serialize, Deserialize)]
struct RawStage {
    r: u64,
    #[serde(with = "int_vec_str")]
    spacers: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule {
    h1: u64,
    stages: Vec<RawStage>,
    meta: ScheduleMeta,
}

impl Serialize for ConstructionSchedule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawSchedule {
            h1: self.h1,
            stages: self
                .stages
                .iter()
                .map(|st| RawStage {
                    r: st.r(),
                    spacers: st.spacers().to_vec(),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstructionSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSchedule::deserialize(d)?;
        let mut stages = Vec::with_capacity(raw.stages.len());
        for (idx, st) in raw.stages.into_iter().enumerate() {
            let declared = st.r;
            let stage = StageSpec::new(st.spacers).map_err(serde::de::Error::custom)?;
            if stage.r() != declared {
                return Err(serde::de::Error::custom(format!(
                    "stage {}: r={} but {} spacers given",
                    idx + 1,
                    declared,
                    stage.r()
                )));
            }
            stages.push(stage);
        }
        ConstructionSchedule::new(raw.h1, stages, raw.meta).map_err(serde::de::Error::custom)
    }
}
