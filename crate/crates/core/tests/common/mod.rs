//! Independent interval-simulation oracle used to cross-check the symbolic
//! engine, plus small shared builders for the integration tests.
//!
//! The oracle realizes the construction literally: every level of every tower
//! is an explicit subinterval of the half-line, built by cutting intervals
//! into equal parts and allocating fresh intervals for spacers from a bump
//! allocator. The transformation is the piecewise translation sending the
//! final tower's level `i` interval onto its level `i + 1` interval. Nothing
//! here uses the engine's column-offset arithmetic, expansion, or shift
//! resolution, so agreement between the two sides is meaningful evidence.
//!
//! All coordinates are scaled by the product of every cut count, which makes
//! every endpoint an integer and gives the final tower's levels width exactly
//! one: a "cell" below is one unit-width interval of the final tower.

#![allow(dead_code)] // each integration-test target compiles its own copy

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rankone::{ConstructionSchedule, LevelSet, StageSpec};

pub struct IntervalOracle {
    /// Product of every cut count; one cell has measure `1 / scale`.
    scale: BigInt,
    /// `starts[j - 1][l]` = left endpoint of level `l` of tower `j`.
    starts: Vec<Vec<BigInt>>,
    /// Scaled width of one level of tower `j`, at index `j - 1`.
    widths: Vec<BigInt>,
    /// `coord_to_level[t]` = final-tower level whose interval is `[t, t+1)`.
    coord_to_level: Vec<usize>,
}

impl IntervalOracle {
    /// Materialize every tower of the schedule; refuses when the final tower
    /// has more than `cell_cap` levels.
    pub fn build(schedule: &ConstructionSchedule, cell_cap: usize) -> Result<Self, String> {
        let final_height = schedule.heights().last().expect("at least one tower");
        let cells = (final_height + 1u32)
            .to_usize()
            .filter(|&n| n <= cell_cap)
            .ok_or_else(|| {
                format!(
                    "final tower needs {} cells, cap {cell_cap}",
                    final_height + 1u32
                )
            })?;

        let scale: BigInt = schedule
            .stages()
            .iter()
            .map(|s| BigInt::from(s.r()))
            .product();
        let mut width = scale.clone();
        let mut levels: Vec<BigInt> = (0..=schedule.h1()).map(|i| i * &width).collect();
        let mut next_free = BigInt::from(schedule.h1() + 1) * &width;
        let mut starts = vec![levels.clone()];
        let mut widths = vec![width.clone()];

        for stage in schedule.stages() {
            let part_width = &width / stage.r();
            let mut stacked = Vec::new();
            for c in 1..=stage.r() {
                let cut_shift = &part_width * (c - 1);
                for level in &levels {
                    stacked.push(level + &cut_shift);
                }
                let spacer_levels = stage
                    .spacer(c)
                    .to_usize()
                    .expect("spacer count bounded by the cell cap");
                for _ in 0..spacer_levels {
                    stacked.push(next_free.clone());
                    next_free += &part_width;
                }
            }
            width = part_width;
            levels = stacked;
            starts.push(levels.clone());
            widths.push(width.clone());
        }

        // The final tower must tile the used part of the line exactly: levels
        // have width one and their left endpoints hit 0..cells once each.
        assert_eq!(
            levels.len(),
            cells,
            "level count disagrees with the derived height"
        );
        let mut coord_to_level = vec![usize::MAX; cells];
        for (level, start) in levels.iter().enumerate() {
            let t = start.to_usize().expect("endpoint inside the used range");
            assert!(t < cells, "endpoint {t} beyond the used range");
            assert_eq!(
                coord_to_level[t],
                usize::MAX,
                "two levels share coordinate {t}"
            );
            coord_to_level[t] = level;
        }
        Ok(IntervalOracle {
            scale,
            starts,
            widths,
            coord_to_level,
        })
    }

    pub fn cells(&self) -> usize {
        self.coord_to_level.len()
    }

    /// The point set of a level set, as disjoint `(start, width)` intervals.
    pub fn realize(&self, set: &LevelSet) -> Vec<(BigInt, BigInt)> {
        let width = &self.widths[set.tower() - 1];
        let tower = &self.starts[set.tower() - 1];
        let mut out: Vec<(BigInt, BigInt)> = set
            .levels()
            .iter()
            .map(|l| {
                let idx = l
                    .to_usize()
                    .expect("level index fits in the materialized tower");
                (tower[idx].clone(), width.clone())
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Final-tower level indices whose intervals compose the set, sorted.
    pub fn final_cells(&self, set: &LevelSet) -> Vec<usize> {
        let mut cells = Vec::new();
        for (start, width) in self.realize(set) {
            let a = start.to_usize().expect("interval inside the used range");
            let w = width.to_usize().expect("width bounded by the cell count");
            for t in a..a + w {
                cells.push(self.coord_to_level[t]);
            }
        }
        cells.sort_unstable();
        cells.dedup();
        cells
    }

    pub fn measure(&self, set: &LevelSet) -> BigRational {
        let width = &self.widths[set.tower() - 1];
        BigRational::new(width * set.len(), self.scale.clone())
    }

    fn cell_mass(&self, count: usize) -> BigRational {
        BigRational::new(BigInt::from(count), self.scale.clone())
    }

    /// Image of the set under `T^m`, as final-tower levels: the translation
    /// moves level `i` to level `i + m` when that stays inside the tower.
    /// Returns the sorted resolved image cells and the pending cell count.
    pub fn image_cells(&self, set: &LevelSet, m: &BigInt) -> (Vec<usize>, usize) {
        let cells = self.cells();
        let mut image = Vec::new();
        let mut pending = 0usize;
        for i in self.final_cells(set) {
            let y = BigInt::from(i) + m;
            match y.to_usize().filter(|&y| y < cells) {
                Some(y) => image.push(y),
                None => pending += 1,
            }
        }
        image.sort_unstable();
        (image, pending)
    }

    /// Resolved and pending mass of `T^m` applied to the set, without the
    /// direction swap: this mirrors the semantics of `shift_levels`.
    pub fn shift_masses(&self, set: &LevelSet, m: &BigInt) -> (BigRational, BigRational) {
        let (image, pending) = self.image_cells(set, m);
        (self.cell_mass(image.len()), self.cell_mass(pending))
    }

    /// Bracket for `μ(T^m A ∩ B)`. Downward shifts leave the whole bottom
    /// column pending forever, so the tight bracket follows the upward
    /// direction via `μ(T^m A ∩ B) = μ(T^{-m} B ∩ A)`; the engine does the
    /// same, which makes exact equality the right test.
    pub fn correlation(
        &self,
        a: &LevelSet,
        b: &LevelSet,
        m: &BigInt,
    ) -> (BigRational, BigRational) {
        if m.is_negative() {
            return self.correlation(b, a, &-m);
        }
        let (image, pending) = self.image_cells(a, m);
        let cells_b = self.final_cells(b);
        let hits = image
            .iter()
            .filter(|y| cells_b.binary_search(y).is_ok())
            .count();
        let lower = self.cell_mass(hits);
        let upper = (&lower + self.cell_mass(pending))
            .min(self.measure(a))
            .min(self.measure(b));
        (lower, upper)
    }
}

/// Engine-vs-oracle comparison of one correlation query, with context on
/// mismatch.
pub fn assert_bracket_matches(
    schedule: &ConstructionSchedule,
    oracle: &IntervalOracle,
    a: &LevelSet,
    b: &LevelSet,
    m: &BigInt,
) {
    let engine = rankone::correlation_bracket(schedule, a, b, m, usize::MAX)
        .expect("engine correlation failed");
    let (lower, upper) = oracle.correlation(a, b, m);
    assert_eq!(
        (&engine.lower, &engine.upper),
        (&lower, &upper),
        "bracket mismatch at m={m}, A={:?}@{}, B={:?}@{}",
        a.levels(),
        a.tower(),
        b.levels(),
        b.tower(),
    );
}

pub fn stage(spacers: &[i64]) -> StageSpec {
    StageSpec::new(spacers.iter().map(|&s| BigInt::from(s)).collect()).unwrap()
}

pub fn explicit(h1: u64, stages: &[&[i64]]) -> ConstructionSchedule {
    ConstructionSchedule::explicit(h1, stages.iter().map(|s| stage(s)).collect()).unwrap()
}

/// Deterministic pseudo-random subset of `0..=h`, never empty unless `h`
/// overflows the requested maximum size to zero.
pub fn random_levels(rng: &mut impl rand::Rng, h: u64, max_len: usize) -> Vec<BigInt> {
    let len = rng.gen_range(1..=max_len.max(1));
    let mut levels: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=h)).collect();
    levels.sort_unstable();
    levels.dedup();
    levels.into_iter().map(BigInt::from).collect()
}

/// Exact value of `μ(A)` that both sides must agree on; used as a smoke test
/// for the realization itself.
pub fn assert_measure_matches(
    schedule: &ConstructionSchedule,
    oracle: &IntervalOracle,
    set: &LevelSet,
) {
    assert_eq!(
        set.measure(schedule).unwrap(),
        oracle.measure(set),
        "measure mismatch for {:?}@{}",
        set.levels(),
        set.tower(),
    );
}
