//! Preset grammar for cylinder sets:
//!
//! * `E:j`          — the base level of tower `j`
//! * `U:j`          — every level of tower `j`
//! * `L:j:i[,i...]` — the listed levels of tower `j` (`L:j:i` is `T^i E_j`)

use rankone::exact::parse_int;
use rankone::{ConstructionSchedule, LevelSet};

use crate::report::{CliError, CliResult};

pub fn parse_set(schedule: &ConstructionSchedule, spec: &str, cap: usize) -> CliResult<LevelSet> {
    let bad = |detail: String| {
        CliError::Usage(format!(
            "bad set `{spec}`: {detail} (expected E:j, U:j, or L:j:i[,i...])"
        ))
    };
    let mut parts = spec.splitn(3, ':');
    let kind = parts.next().unwrap_or("");
    let tower = parts
        .next()
        .ok_or_else(|| bad("missing tower number".into()))?;
    let tower: usize = tower
        .parse()
        .map_err(|_| bad(format!("`{tower}` is not a tower number")))?;
    let rest = parts.next();
    let set = match (kind, rest) {
        ("E", None) => LevelSet::base(schedule, tower)?,
        ("U", None) => LevelSet::full_tower(schedule, tower, cap)?,
        ("L", Some(levels)) => {
            let levels = levels
                .split(',')
                .map(|t| parse_int(t).map_err(|e| bad(e.to_string())))
                .collect::<CliResult<Vec<_>>>()?;
            if levels.is_empty() {
                return Err(bad("no levels listed".into()));
            }
            LevelSet::new(schedule, tower, levels)?
        }
        ("E" | "U", Some(_)) => return Err(bad("trailing components".into())),
        ("L", None) => return Err(bad("missing level list".into())),
        _ => return Err(bad(format!("unknown preset kind `{kind}`"))),
    };
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rankone::StageSpec;

    fn schedule() -> ConstructionSchedule {
        let stage = StageSpec::new(vec![1.into(), 2.into(), 0.into()]).unwrap();
        ConstructionSchedule::explicit(2, vec![stage]).unwrap()
    }

    #[test]
    fn presets_parse() {
        let s = schedule();
        assert_eq!(parse_set(&s, "E:1", 100).unwrap().levels().len(), 1);
        assert_eq!(parse_set(&s, "U:1", 100).unwrap().levels().len(), 3);
        let l = parse_set(&s, "L:2:0,5,3", 100).unwrap();
        assert_eq!(l.levels().len(), 3);
        assert_eq!(l.tower(), 2);
    }

    #[test]
    fn malformed_specs_are_usage_errors() {
        let s = schedule();
        for spec in ["", "E", "E:x", "Q:1", "L:1", "L:1:", "E:1:9", "U:9"] {
            let err = parse_set(&s, spec, 100).unwrap_err();
            assert_eq!(err.exit_code(), crate::report::EXIT_USAGE, "spec {spec}");
        }
    }
}
