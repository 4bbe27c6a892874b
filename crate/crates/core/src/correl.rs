//! Exact correlation engine: two-sided brackets for `μ(T^m A ∩ B)` on level
//! sets, correlation series over shift ranges, and the averaging-operator
//! norm estimate.
//!
//! A correlation is computed by resolving the shift exactly (see
//! [`crate::tower`]); intersections of the resolved parts with `B` give a
//! certified lower bound, and the still-unresolved mass gives the width of
//! the bracket. The bracket always contains the true value, and is a point
//! exactly when the shift resolved completely.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int_str, ratio_str};
use crate::schedule::ConstructionSchedule;
use crate::tower::{intersect_count, shift_resolve, LevelSet};

/// Two-sided bracket for `μ(T^m A ∩ B)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationResult {
    /// The requested shift.
    #[serde(with = "int_str")]
    pub m: BigInt,
    /// Certified lower bound (mass of exactly resolved intersections).
    #[serde(with = "ratio_str")]
    pub lower: BigRational,
    /// Certified upper bound: lower plus unresolved mass, clamped by
    /// `min(μ(A), μ(B))`.
    #[serde(with = "ratio_str")]
    pub upper: BigRational,
    /// Deepest tower consulted while resolving.
    pub stage_used: usize,
}

impl CorrelationResult {
    /// Width of the bracket.
    pub fn gap(&self) -> BigRational {
        &self.upper - &self.lower
    }

    pub fn is_exact(&self) -> bool {
        self.upper == self.lower
    }
}

/// Best-effort bracket for `μ(T^m A ∩ B)`, deepening through every stage the
/// schedule has. Negative shifts use `μ(T^m A ∩ B) = μ(T^{-m} B ∩ A)`, so the
/// walk always follows an upward shift and the unresolved mass shrinks by
/// the cut count per stage.
pub fn correlation_bracket(
    schedule: &ConstructionSchedule,
    a: &LevelSet,
    b: &LevelSet,
    m: &BigInt,
    cap: usize,
) -> Result<CorrelationResult> {
    let (sa, sb, shift) = if m.is_negative() {
        (b, a, -m)
    } else {
        (a, b, m.clone())
    };
    if sa.is_empty() || sb.is_empty() {
        return Ok(CorrelationResult {
            m: m.clone(),
            lower: BigRational::zero(),
            upper: BigRational::zero(),
            stage_used: sa.tower().max(sb.tower()),
        });
    }
    let mu_a = sa.measure(schedule)?;
    let mu_b = sb.measure(schedule)?;
    let res = shift_resolve(schedule, sa, &shift, cap)?;
    let mut lower = BigRational::zero();
    let mut b_cur = sb.clone();
    for part in &res.stages {
        let t = part.tower.max(b_cur.tower());
        if b_cur.tower() < t {
            b_cur = b_cur.expand_to(schedule, t, cap)?;
        }
        let count = if part.tower < t {
            let up = LevelSet::from_sorted_unchecked(part.tower, part.positions.clone())
                .expand_to(schedule, t, cap)?;
            intersect_count(up.levels(), b_cur.levels())
        } else {
            intersect_count(&part.positions, b_cur.levels())
        };
        if count > 0 {
            lower += schedule.level_measure(t)? * BigInt::from(count);
        }
    }
    let unresolved = res.unresolved_mass(schedule)?;
    let upper = (&lower + unresolved).min(mu_a).min(mu_b);
    debug_assert!(lower <= upper);
    Ok(CorrelationResult {
        m: m.clone(),
        lower,
        upper,
        stage_used: res.final_tower.max(b_cur.tower()),
    })
}

/// Like [`correlation_bracket`], but an error if the bracket stays wider
/// than `tolerance` after the deepest stage.
pub fn correlation(
    schedule: &ConstructionSchedule,
    a: &LevelSet,
    b: &LevelSet,
    m: &BigInt,
    tolerance: &BigRational,
    cap: usize,
) -> Result<CorrelationResult> {
    if tolerance.is_negative() {
        return Err(Error::InvalidParam("negative tolerance".into()));
    }
    let best = correlation_bracket(schedule, a, b, m, cap)?;
    if best.gap() > *tolerance {
        return Err(Error::ToleranceUnreachable {
            tolerance: tolerance.clone(),
            best: Box::new(best),
        });
    }
    Ok(best)
}

/// Correlation brackets for `m = m_from, m_from + stride, ..` up to `m_to`.
pub fn correlation_series(
    schedule: &ConstructionSchedule,
    a: &LevelSet,
    b: &LevelSet,
    m_from: &BigInt,
    m_to: &BigInt,
    stride: u64,
    cap: usize,
) -> Result<Vec<CorrelationResult>> {
    if stride == 0 {
        return Err(Error::InvalidParam("stride must be positive".into()));
    }
    if m_from > m_to {
        return Err(Error::InvalidParam(format!(
            "empty shift range {m_from}..{m_to}"
        )));
    }
    let mut rows = Vec::new();
    let mut m = m_from.clone();
    while m <= *m_to {
        rows.push(correlation_bracket(schedule, a, b, &m, cap)?);
        m += stride;
    }
    Ok(rows)
}

/// Memoized self-correlations `μ(T^d A ∩ A)`; by measure preservation the
/// value only depends on `|d|`, so results are cached per magnitude. The
/// `m` field of returned results carries `|d|`.
pub(crate) struct SelfCorrelations<'a> {
    schedule: &'a ConstructionSchedule,
    set: &'a LevelSet,
    cap: usize,
    cache: BTreeMap<BigInt, CorrelationResult>,
}

impl<'a> SelfCorrelations<'a> {
    pub fn new(schedule: &'a ConstructionSchedule, set: &'a LevelSet, cap: usize) -> Self {
        SelfCorrelations {
            schedule,
            set,
            cap,
            cache: BTreeMap::new(),
        }
    }

    pub fn get(&mut self, d: &BigInt) -> Result<CorrelationResult> {
        let key = d.abs();
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let result = correlation_bracket(self.schedule, self.set, self.set, &key, self.cap)?;
        self.cache.insert(key, result.clone());
        Ok(result)
    }
}

/// Norm estimate for the averaging operator
/// `P(j, n) = (1/(r_j - n - 1)) Σ_i T^(S_j(i, n))` applied to the indicator
/// of `A`, together with the window majorant it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingEstimate {
    /// Cutting stage the deviations `S_j(i, n)` come from.
    pub j: usize,
    /// Window length `n`.
    pub n: u64,
    /// Certified upper bound for `‖P(j, n) χ_A‖²`.
    #[serde(with = "ratio_str")]
    pub value: BigRational,
    /// Certified lower bound for the same quantity.
    #[serde(with = "ratio_str")]
    pub value_lower: BigRational,
    /// Certified lower bound for the majorant
    /// `(1/(εr_j))² ‖Σ_{s=-r_j..r_j} T^s χ_A‖²` with `ε = 1 - n/r_j`;
    /// comparing `value <= bound` is therefore conservative.
    #[serde(with = "ratio_str")]
    pub bound: BigRational,
}

/// Exact-bracket evaluation of `‖P(j, n) χ_A‖²` by bilinearity:
/// `(1/(r-n-1))² Σ_{i,i'} μ(T^(S_i - S_{i'}) A ∩ A)`, plus the window
/// majorant `(1/(r-n))² Σ_{|d| <= 2r} (2r+1-|d|) μ(T^d A ∩ A)`.
pub fn averaging_norm(
    schedule: &ConstructionSchedule,
    j: usize,
    n: u64,
    a: &LevelSet,
    cap: usize,
) -> Result<AveragingEstimate> {
    let r = schedule.stage(j)?.r();
    if n < 1 || n > r - 2 {
        return Err(Error::InvalidParam(format!(
            "window n={n} outside 1..={} for r={r}",
            r - 2
        )));
    }
    let w = r - 1 - n;
    let devs = (1..=w)
        .map(|i| schedule.deviation_sum(j, i, n))
        .collect::<Result<Vec<_>>>()?;

    let mut corr = SelfCorrelations::new(schedule, a, cap);
    let mut value_lower = BigRational::zero();
    let mut value_upper = BigRational::zero();
    for si in &devs {
        for sj in &devs {
            let c = corr.get(&(si - sj))?;
            value_lower += c.lower;
            value_upper += c.upper;
        }
    }
    let wsq = BigRational::from_integer(BigInt::from(w) * BigInt::from(w));
    value_lower /= &wsq;
    value_upper /= &wsq;

    let mut bound = BigRational::zero();
    for d in 0..=2 * r {
        let c = corr.get(&BigInt::from(d))?;
        let mut weight = BigInt::from(2 * r + 1 - d);
        if d > 0 {
            weight *= 2;
        }
        bound += c.lower * weight;
    }
    let eps_r = BigInt::from(r - n);
    bound /= BigRational::from_integer(&eps_r * &eps_r);

    Ok(AveragingEstimate {
        j,
        n,
        value: value_upper,
        value_lower,
        bound,
    })
}
