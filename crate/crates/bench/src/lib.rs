//! Shared fixtures for the criterion benches: representative schedules of
//! each family, sized so a single iteration stays in the millisecond range.

use rankone::{
    algebraic_schedule, sidon_growth_schedule, AlgebraicStageParams, ConstructionSchedule,
};

/// Two algebraic stages over moderate primes; tower 3 has ~4e5 levels.
pub fn algebraic_fixture() -> ConstructionSchedule {
    let stages = [(53, 2), (101, 2)]
        .into_iter()
        .map(|(r, q)| AlgebraicStageParams {
            r,
            q,
            base_spacer: r.into(),
            last_spacer: 0.into(),
        })
        .collect();
    algebraic_schedule(1, stages).expect("fixture schedule")
}

/// Three Sidon-growth stages; offsets spread quickly, correlations stay
/// sparse.
pub fn sidon_fixture() -> ConstructionSchedule {
    sidon_growth_schedule(1, &[5, 6, 7], 2).expect("fixture schedule")
}
