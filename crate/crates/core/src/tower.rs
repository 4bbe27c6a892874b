//! Tower geometry: level sets, column offsets, expansion of a level set
//! into deeper towers, and exact resolution of shifted level sets.
//!
//! Tower `j+1` is assembled by stacking the `r_j` columns of tower `j` with
//! spacers between them, so column `c` of tower `j` occupies the levels
//! `o_j(c) .. o_j(c) + h_j` of tower `j+1`, where `o_j(1) = 0` and
//! `o_j(c+1) = o_j(c) + h_j + 1 + s_j(c)`. Within one tower the shift acts
//! as `level += 1` until the top level, where the image is only visible one
//! tower deeper. Everything here is exact integer/rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::schedule::ConstructionSchedule;

/// Default bound on how many positions an expansion may materialize.
pub const DEFAULT_POSITION_CAP: usize = 10_000_000;

/// A finite union of levels of one tower, kept sorted and deduplicated.
/// All cylinder sets handled by the crate are of this form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSet {
    tower: usize,
    levels: Vec<BigInt>,
}

impl LevelSet {
    pub fn new(
        schedule: &ConstructionSchedule,
        tower: usize,
        mut levels: Vec<BigInt>,
    ) -> Result<Self> {
        let height = schedule.height(tower)?.clone();
        for level in &levels {
            if level.is_negative() || *level > height {
                return Err(Error::LevelOutOfRange {
                    tower,
                    level: level.clone(),
                    height,
                });
            }
        }
        levels.sort_unstable();
        levels.dedup();
        Ok(LevelSet { tower, levels })
    }

    /// The base (level 0) of tower `j`.
    pub fn base(schedule: &ConstructionSchedule, tower: usize) -> Result<Self> {
        Self::new(schedule, tower, vec![BigInt::zero()])
    }

    /// One level of tower `j`.
    pub fn single(schedule: &ConstructionSchedule, tower: usize, level: BigInt) -> Result<Self> {
        Self::new(schedule, tower, vec![level])
    }

    /// All `h_j + 1` levels of tower `j`; refused when that exceeds `cap`.
    pub fn full_tower(schedule: &ConstructionSchedule, tower: usize, cap: usize) -> Result<Self> {
        let height = schedule.height(tower)?;
        let needed = (height + 1u32).try_into().unwrap_or(u128::MAX);
        if needed > cap as u128 {
            return Err(Error::PositionCapExceeded { needed, cap });
        }
        let mut levels = Vec::with_capacity(needed as usize);
        let mut l = BigInt::zero();
        while &l <= height {
            levels.push(l.clone());
            l += 1u32;
        }
        Ok(LevelSet { tower, levels })
    }

    /// Wrap positions already known to be sorted, deduplicated and in range.
    pub(crate) fn from_sorted_unchecked(tower: usize, levels: Vec<BigInt>) -> Self {
        debug_assert!(levels.windows(2).all(|w| w[0] < w[1]));
        LevelSet { tower, levels }
    }

    pub fn tower(&self) -> usize {
        self.tower
    }

    pub fn levels(&self) -> &[BigInt] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Exact measure: `len * level_measure(tower)`.
    pub fn measure(&self, schedule: &ConstructionSchedule) -> Result<BigRational> {
        Ok(schedule.level_measure(self.tower)? * BigInt::from(self.levels.len()))
    }

    /// The same point set written as levels of tower `target >= self.tower`:
    /// each level of tower `j` splits into one level per column of stage `j`.
    pub fn expand_to(
        &self,
        schedule: &ConstructionSchedule,
        target: usize,
        cap: usize,
    ) -> Result<Self> {
        if target < self.tower {
            return Err(Error::InvalidParam(format!(
                "cannot expand from tower {} down to tower {target}",
                self.tower
            )));
        }
        schedule.height(target)?;
        let mut levels = self.levels.clone();
        for j in self.tower..target {
            levels = expand_positions(schedule, j, &levels, cap)?;
        }
        Ok(LevelSet {
            tower: target,
            levels,
        })
    }
}

/// Start positions `o_j(c)` of the columns of tower `j` inside tower `j+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnOffsets {
    stage: usize,
    offsets: Vec<BigInt>,
}

impl ColumnOffsets {
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn r(&self) -> u64 {
        self.offsets.len() as u64
    }

    /// Offset of column `c` (1-based).
    pub fn offset(&self, column: u64) -> &BigInt {
        &self.offsets[(column - 1) as usize]
    }

    pub fn offsets(&self) -> &[BigInt] {
        &self.offsets
    }
}

/// Column offsets of cutting stage `j`: `o(1) = 0`,
/// `o(c+1) = o(c) + h_j + 1 + s_j(c)`; the top of the last column plus its
/// spacers lands exactly on `h_{j+1}`.
pub fn column_offsets(schedule: &ConstructionSchedule, stage: usize) -> Result<ColumnOffsets> {
    let spec = schedule.stage(stage)?;
    let h = schedule.height(stage)?;
    let mut offsets = Vec::with_capacity(spec.r() as usize);
    let mut o = BigInt::zero();
    for c in 1..=spec.r() {
        offsets.push(o.clone());
        o += h + 1u32 + spec.spacer(c);
    }
    debug_assert_eq!(
        offsets.last().unwrap() + h + spec.spacer(spec.r()),
        *schedule.height(stage + 1).unwrap()
    );
    Ok(ColumnOffsets { stage, offsets })
}

/// Positions of one level of tower `j` inside tower `j+1`: one copy per
/// column, at `o_j(c) + level`.
pub fn expand_level(
    schedule: &ConstructionSchedule,
    tower: usize,
    level: &BigInt,
) -> Result<LevelSet> {
    let set = LevelSet::single(schedule, tower, level.clone())?;
    set.expand_to(schedule, tower + 1, DEFAULT_POSITION_CAP)
}

fn expand_positions(
    schedule: &ConstructionSchedule,
    stage: usize,
    positions: &[BigInt],
    cap: usize,
) -> Result<Vec<BigInt>> {
    let offsets = column_offsets(schedule, stage)?;
    let needed = positions.len() as u128 * offsets.r() as u128;
    if needed > cap as u128 {
        return Err(Error::PositionCapExceeded { needed, cap });
    }
    // Column blocks are disjoint and increasing, so iterating columns in
    // order keeps the output sorted.
    let mut out = Vec::with_capacity(needed as usize);
    for o in offsets.offsets() {
        for x in positions {
            out.push(o + x);
        }
    }
    Ok(out)
}

/// Number of common elements of two sorted, deduplicated position lists.
pub(crate) fn intersect_count(a: &[BigInt], b: &[BigInt]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Image positions of a shift, grouped by the tower in which they became
/// exact. Produced by [`shift_resolve`]; the parts are disjoint as point
/// sets, and `pending` holds the *pre-image* positions (expressed in
/// `final_tower`) whose image is still invisible at the deepest tower used.
#[derive(Debug, Clone)]
pub(crate) struct ShiftResolution {
    pub stages: Vec<StageResolved>,
    pub pending: Vec<BigInt>,
    pub final_tower: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct StageResolved {
    pub tower: usize,
    pub positions: Vec<BigInt>,
}

impl ShiftResolution {
    pub fn unresolved_mass(&self, schedule: &ConstructionSchedule) -> Result<BigRational> {
        Ok(schedule.level_measure(self.final_tower)? * BigInt::from(self.pending.len()))
    }
}

/// Resolve `T^m` on a level set exactly, walking towers until either every
/// position has an exact image or the schedule runs out of stages. A
/// position `x` of tower `S` resolves when `0 <= x + m <= h_S`; otherwise
/// its image leaves the tower and the position is re-expressed one tower
/// deeper. For `|m| <= h_S` only the extremal column can fail again, so the
/// pending count never grows and its mass shrinks by the cut count each
/// stage.
pub(crate) fn shift_resolve(
    schedule: &ConstructionSchedule,
    set: &LevelSet,
    m: &BigInt,
    cap: usize,
) -> Result<ShiftResolution> {
    let mut tower = set.tower();
    schedule.height(tower)?;
    let mut pending = set.levels().to_vec();
    let mut stages = Vec::new();
    loop {
        let h = schedule.height(tower)?;
        let mut still = Vec::new();
        let mut resolved = Vec::new();
        for x in &pending {
            let y = x + m;
            if !y.is_negative() && y <= *h {
                resolved.push(y);
            } else {
                still.push(x.clone());
            }
        }
        if !resolved.is_empty() {
            stages.push(StageResolved {
                tower,
                positions: resolved,
            });
        }
        pending = still;
        if pending.is_empty() || tower == schedule.num_towers() {
            break;
        }
        pending = expand_positions(schedule, tower, &pending, cap)?;
        tower += 1;
    }
    let resolution = ShiftResolution {
        stages,
        pending,
        final_tower: tower,
    };
    debug_assert!(shift_mass_conserved(schedule, set, &resolution));
    Ok(resolution)
}

fn shift_mass_conserved(
    schedule: &ConstructionSchedule,
    set: &LevelSet,
    res: &ShiftResolution,
) -> bool {
    let mut total = BigRational::zero();
    for part in &res.stages {
        total += schedule.level_measure(part.tower).unwrap() * BigInt::from(part.positions.len());
    }
    total += res.unresolved_mass(schedule).unwrap();
    total == set.measure(schedule).unwrap()
}

/// Outcome of applying `T^m` to a level set, with every exactly-resolved
/// image re-expressed in the deepest tower the resolver visited.
#[derive(Debug, Clone)]
pub struct ShiftResult {
    /// Requested shift.
    pub m: BigInt,
    /// Tower in which both parts below are expressed.
    pub tower: usize,
    /// Levels whose pre-image under `T^m` lies in the input set; exact.
    pub resolved: LevelSet,
    /// Input positions whose image is not visible by the last tower.
    pub unresolved: LevelSet,
    /// Exact measure of `resolved`.
    pub resolved_mass: BigRational,
    /// Exact measure of `unresolved`; `resolved_mass + unresolved_mass`
    /// equals the measure of the input set.
    pub unresolved_mass: BigRational,
}

/// Apply `T^m` to a level set. Images that became exact in an earlier tower
/// are re-expanded so the result lives in a single tower.
pub fn shift_levels(
    schedule: &ConstructionSchedule,
    set: &LevelSet,
    m: &BigInt,
    cap: usize,
) -> Result<ShiftResult> {
    let res = shift_resolve(schedule, set, m, cap)?;
    let mut positions: Vec<BigInt> = Vec::new();
    for part in &res.stages {
        let expanded = LevelSet::from_sorted_unchecked(part.tower, part.positions.clone())
            .expand_to(schedule, res.final_tower, cap)?;
        positions.extend_from_slice(expanded.levels());
    }
    positions.sort_unstable();
    let resolved = LevelSet::from_sorted_unchecked(res.final_tower, positions);
    let unresolved = LevelSet::from_sorted_unchecked(res.final_tower, res.pending.clone());
    let resolved_mass = resolved.measure(schedule)?;
    let unresolved_mass = unresolved.measure(schedule)?;
    Ok(ShiftResult {
        m: m.clone(),
        tower: res.final_tower,
        resolved,
        unresolved,
        resolved_mass,
        unresolved_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use crate::schedule::{sidon_growth_schedule, ConstructionSchedule, StageSpec};

    fn stage(spacers: &[i64]) -> StageSpec {
        StageSpec::new(spacers.iter().map(|&s| int(s)).collect()).unwrap()
    }

    fn sched(h1: u64, stages: &[&[i64]]) -> ConstructionSchedule {
        ConstructionSchedule::explicit(h1, stages.iter().map(|s| stage(s)).collect()).unwrap()
    }

    #[test]
    fn offsets_hand_checked() {
        let s = sched(0, &[&[1, 0]]);
        assert_eq!(column_offsets(&s, 1).unwrap().offsets(), &[int(0), int(2)]);
        let s = sched(0, &[&[0, 0]]);
        assert_eq!(column_offsets(&s, 1).unwrap().offsets(), &[int(0), int(1)]);
        let s = sched(3, &[&[1, 2]]);
        assert_eq!(column_offsets(&s, 1).unwrap().offsets(), &[int(0), int(5)]);
    }

    #[test]
    fn expansion_hand_checked() {
        let s = sched(3, &[&[1, 2]]);
        assert_eq!(
            expand_level(&s, 1, &int(0)).unwrap().levels(),
            &[int(0), int(5)]
        );
        assert_eq!(
            expand_level(&s, 1, &int(3)).unwrap().levels(),
            &[int(3), int(8)]
        );
        // The whole tower expands to everything except the spacer levels 4,
        // 9 and 10 of tower 2.
        let full = LevelSet::full_tower(&s, 1, 100).unwrap();
        let up = full.expand_to(&s, 2, 100).unwrap();
        let expect: Vec<_> = [0, 1, 2, 3, 5, 6, 7, 8].map(int).into();
        assert_eq!(up.levels(), &expect[..]);
        assert_eq!(up.measure(&s).unwrap(), full.measure(&s).unwrap());
    }

    #[test]
    fn expansion_respects_cap() {
        let s = sched(3, &[&[1, 2]]);
        let full = LevelSet::full_tower(&s, 1, 100).unwrap();
        match full.expand_to(&s, 2, 7) {
            Err(Error::PositionCapExceeded { needed: 8, cap: 7 }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn level_set_validation() {
        let s = sched(3, &[&[1, 2]]);
        assert!(LevelSet::single(&s, 1, int(4)).is_err());
        assert!(LevelSet::single(&s, 1, int(-1)).is_err());
        assert!(LevelSet::single(&s, 3, int(0)).is_err());
        let set = LevelSet::new(&s, 1, vec![int(2), int(0), int(2)]).unwrap();
        assert_eq!(set.levels(), &[int(0), int(2)]);
        assert_eq!(set.measure(&s).unwrap(), ratio(2, 1));
    }

    #[test]
    fn shift_splits_at_the_top_hand_checked() {
        // h1 = 0, one stage with no spacers: tower 2 is levels {0, 1} and
        // T(base of tower 1) resolves only on the first column.
        let s = sched(0, &[&[0, 0]]);
        let base = LevelSet::base(&s, 1).unwrap();
        let r = shift_levels(&s, &base, &int(1), 100).unwrap();
        assert_eq!(r.tower, 2);
        assert_eq!(r.resolved.levels(), &[int(1)]);
        assert_eq!(r.unresolved.levels(), &[int(1)]);
        assert_eq!(r.resolved_mass, ratio(1, 2));
        assert_eq!(r.unresolved_mass, ratio(1, 2));
    }

    #[test]
    fn shift_zero_resolves_in_place() {
        let s = sched(3, &[&[1, 2]]);
        let set = LevelSet::new(&s, 1, vec![int(1), int(3)]).unwrap();
        let r = shift_levels(&s, &set, &int(0), 100).unwrap();
        assert_eq!(r.tower, 1);
        assert_eq!(r.resolved, set);
        assert!(r.unresolved.is_empty());
    }

    #[test]
    fn negative_shift_mirrors_at_the_bottom() {
        // Sidon stage over h=19: offsets of stage 2 are (0, 60); the level
        // below the second copy of the base is the spacer level 59.
        let s = sidon_growth_schedule(1, &[2, 2], 2).unwrap();
        assert_eq!(s.heights(), &[int(1), int(19), int(199)]);
        let base2 = LevelSet::base(&s, 2).unwrap();
        let r = shift_levels(&s, &base2, &int(-1), 1000).unwrap();
        assert_eq!(r.tower, 3);
        assert_eq!(r.resolved.levels(), &[int(59)]);
        assert_eq!(r.unresolved.levels(), &[int(0)]);
        assert_eq!(r.unresolved_mass, ratio(1, 4));
    }

    #[test]
    fn chain_spacers_resolve_upward_in_one_extra_stage() {
        // With the last-column spacer >= h_j an upward shift cannot overflow
        // twice, so any 0 <= m <= h_j resolves completely one tower deeper.
        let s = sidon_growth_schedule(1, &[2, 2], 2).unwrap();
        let set = LevelSet::new(&s, 2, vec![int(0), int(5), int(19)]).unwrap();
        for m in [1i64, 5, 19] {
            let r = shift_levels(&s, &set, &int(m), 1000).unwrap();
            assert!(r.unresolved.is_empty(), "m={m} left pending positions");
            assert_eq!(r.resolved_mass, set.measure(&s).unwrap());
        }
        // Downward shifts are different: nothing is ever stacked below the
        // first column, so the bottom part stays pending at every depth,
        // with mass shrinking by the cut count per stage.
        let r = shift_levels(&s, &set, &int(-7), 1000).unwrap();
        assert_eq!(r.tower, 3);
        assert_eq!(r.unresolved.levels(), &[int(0), int(5)]);
        assert_eq!(r.unresolved_mass, ratio(1, 2));
    }

    #[test]
    fn unresolved_mass_shrinks_with_depth() {
        // Explicit three-stage schedule with heights 1, 4, 17, 37 and level
        // measures 1, 1/2, 1/6, 1/12. Shifting the top level by 4 resolves
        // 5/6 in tower 3 and 1/12 in tower 4, with one position (the top of
        // the last column) still pending at the last tower.
        let s = sched(1, &[&[0, 1], &[2, 0, 1], &[1, 1]]);
        assert_eq!(s.heights(), &[int(1), int(4), int(17), int(37)]);
        let top = LevelSet::single(&s, 1, int(1)).unwrap();
        let r = shift_levels(&s, &top, &int(4), 10_000).unwrap();
        assert_eq!(r.tower, 4);
        assert_eq!(r.resolved.len(), 11);
        assert_eq!(r.unresolved.levels(), &[int(34)]);
        assert_eq!(r.unresolved_mass, ratio(1, 12));
        assert_eq!(
            r.resolved_mass + r.unresolved_mass,
            top.measure(&s).unwrap()
        );
    }

    #[test]
    fn oversized_shift_stays_unresolved() {
        let s = sched(0, &[&[0, 0]]);
        let base = LevelSet::base(&s, 1).unwrap();
        let r = shift_levels(&s, &base, &int(50), 100).unwrap();
        assert!(r.resolved.is_empty());
        assert_eq!(r.unresolved_mass, ratio(1, 1));
    }

    #[test]
    fn intersect_count_merges() {
        let a: Vec<_> = [1, 3, 5, 9].map(int).into();
        let b: Vec<_> = [0, 3, 4, 5, 10].map(int).into();
        assert_eq!(intersect_count(&a, &b), 2);
        assert_eq!(intersect_count(&a, &[]), 0);
    }
}
