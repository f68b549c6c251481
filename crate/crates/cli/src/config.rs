//! TOML scenario and study files.
//!
//! A scenario file either names a builtin scenario with `base = "test2"` or
//! spells out the network with `[[arcs]]`, `[[junctions]]` and `[[initial]]`
//! tables. Top-level `horizon`, `snapshots`, `output_times` and a
//! `[numerics]` table override the base. Study files add a `[study]` table.

use std::collections::BTreeMap;
use std::path::Path;

use beltflow::analytic::InitialProfile;
use beltflow::experiments::{
    builtin_scenario, uniform_times, Scenario, DEFAULT_SNAPSHOTS, REFERENCE_NUMERICS,
};
use beltflow::flux::cfl_max_timestep;
use beltflow::network::{ArcId, BeltArc, JunctionSpec, Network};
use beltflow::solver::Numerics;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    /// Builtin scenario to start from.
    pub base: Option<String>,
    pub horizon: Option<f64>,
    pub snapshots: Option<usize>,
    pub output_times: Option<Vec<f64>>,
    pub numerics: Option<NumericsTable>,
    #[serde(default)]
    pub arcs: Vec<BeltArc>,
    #[serde(default)]
    pub junctions: Vec<JunctionSpec>,
    #[serde(default)]
    pub initial: Vec<InitialEntry>,
    pub study: Option<StudyTable>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsTable {
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct InitialEntry {
    pub arc: ArcId,
    #[serde(flatten)]
    pub profile: InitialProfile,
}

/// Refinement study over a scenario.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StudyTable {
    /// `(dx, dt)` rows at the scenario's smoothing width.
    Steps { rows: Vec<(f64, f64)> },
    /// Smoothing widths at fixed `dx`, `dt`.
    Smoothing { deltas: Vec<f64>, dx: f64, dt: f64 },
}

/// Command-line overrides applied after the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub delta: Option<f64>,
    pub horizon: Option<f64>,
    pub snapshots: Option<usize>,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

pub fn parse_file_text(text: &str) -> Result<ScenarioFile, CliError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        CliError::Parse {
            line,
            column,
            message: e.message().trim().replace('\n', " "),
        }
    })
}

/// Parses a scenario file and resolves it into a checked scenario.
pub fn parse_config(text: &str) -> Result<Scenario, CliError> {
    resolve(&parse_file_text(text)?, &Overrides::default())
}

pub fn read_file(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_file_text(&text)
}

/// Builds the scenario, applies overrides and checks profile bounds and
/// the time-step restriction.
pub fn resolve(file: &ScenarioFile, overrides: &Overrides) -> Result<Scenario, CliError> {
    let mut scenario = match &file.base {
        Some(name) => {
            if !file.arcs.is_empty() || !file.junctions.is_empty() {
                return Err(CliError::Config(
                    "a file with `base` cannot also define arcs or junctions".into(),
                ));
            }
            let mut s = builtin_scenario(name).map_err(|e| CliError::Config(e.to_string()))?;
            for entry in &file.initial {
                if !s.network.arcs.contains_key(&entry.arc) {
                    return Err(CliError::Config(format!(
                        "initial profile for unknown arc {}",
                        entry.arc
                    )));
                }
                s.profiles.insert(entry.arc.clone(), entry.profile.clone());
            }
            s
        }
        None => inline_scenario(file)?,
    };
    if let Some(name) = &file.name {
        scenario.name = name.clone();
    }

    let table = file.numerics.clone().unwrap_or_default();
    let n = &mut scenario.numerics;
    n.dx = overrides.dx.or(table.dx).unwrap_or(n.dx);
    n.dt = overrides.dt.or(table.dt).unwrap_or(n.dt);
    n.delta = overrides.delta.or(table.delta).unwrap_or(n.delta);

    let horizon = overrides
        .horizon
        .or(file.horizon)
        .unwrap_or(scenario.horizon);
    let snapshots = overrides.snapshots.or(file.snapshots);
    scenario.horizon = horizon;
    scenario.output_times = match (&file.output_times, snapshots) {
        (Some(times), None) => times.clone(),
        (_, Some(n)) => uniform_times(horizon, n),
        (None, None)
            if file.horizon.is_some() || overrides.horizon.is_some() || file.base.is_none() =>
        {
            uniform_times(horizon, DEFAULT_SNAPSHOTS)
        }
        (None, None) => scenario.output_times.clone(),
    };
    if let Some(t) = scenario
        .output_times
        .iter()
        .find(|&&t| !(0.0..=horizon).contains(&t))
    {
        return Err(CliError::Config(format!(
            "output time {t} outside [0, {horizon}]"
        )));
    }

    check(&scenario)?;
    Ok(scenario)
}

fn inline_scenario(file: &ScenarioFile) -> Result<Scenario, CliError> {
    if file.arcs.is_empty() {
        return Err(CliError::Config(
            "no arcs defined and no `base` scenario given".into(),
        ));
    }
    let network = Network::new(file.arcs.iter().cloned(), file.junctions.clone());
    let mut profiles = BTreeMap::new();
    for entry in &file.initial {
        if !network.arcs.contains_key(&entry.arc) {
            return Err(CliError::Config(format!(
                "initial profile for unknown arc {}",
                entry.arc
            )));
        }
        if profiles
            .insert(entry.arc.clone(), entry.profile.clone())
            .is_some()
        {
            return Err(CliError::Config(format!(
                "arc {} has two initial profiles",
                entry.arc
            )));
        }
    }
    // arcs without an entry start empty
    for id in network.arcs.keys() {
        profiles.entry(id.clone()).or_insert(InitialProfile::Zero);
    }
    let horizon = file
        .horizon
        .ok_or_else(|| CliError::Config("missing `horizon`".into()))?;
    Ok(Scenario {
        name: file.name.clone().unwrap_or_else(|| "custom".into()),
        network,
        profiles,
        horizon,
        numerics: REFERENCE_NUMERICS,
        output_times: Vec::new(),
    })
}

/// Network validation, profile bounds and the time-step bound.
pub fn check(s: &Scenario) -> Result<(), CliError> {
    let report = s.network.validate();
    if !report.is_empty() {
        return Err(CliError::Config(report.to_string().replace('\n', "; ")));
    }
    let Numerics { dx, dt, delta } = s.numerics;
    for (name, v) in [
        ("dx", dx),
        ("dt", dt),
        ("delta", delta),
        ("horizon", s.horizon),
    ] {
        if !(v.is_finite() && (v > 0.0 || (name == "horizon" && v == 0.0))) {
            return Err(CliError::Config(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    for arc in s.network.arcs.values() {
        let p = &s.profiles[&arc.id];
        let (min, max) = (p.min_on(arc.domain), p.max_on(arc.domain));
        if min < 0.0 || max > arc.capacity {
            return Err(CliError::ProfileBounds {
                arc: arc.id.clone(),
                min,
                max,
                capacity: arc.capacity,
            });
        }
    }
    let max = cfl_max_timestep(&s.network, delta, dx);
    if dt > max * (1.0 + 1e-12) {
        return Err(CliError::Cfl { dt, max });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_and_column() {
        let text = "a = 1\nbc = [\n  x";
        assert_eq!(line_col(text, 0), (1, 1));
        assert_eq!(line_col(text, 6), (2, 1));
        assert_eq!(line_col(text, 15), (3, 3));
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_config("horizon = 1.0\n[numerics]\ndx = = 2\n").unwrap_err();
        match err {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (3, 6)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn base_with_overrides() {
        let s =
            parse_config("base = \"test2\"\nhorizon = 0.5\nsnapshots = 3\n[numerics]\ndx = 0.01\n")
                .unwrap();
        assert_eq!(s.horizon, 0.5);
        assert_eq!(s.output_times, vec![0.0, 0.25, 0.5]);
        assert_eq!(s.numerics.dx, 0.01);
        assert_eq!(s.numerics.dt, REFERENCE_NUMERICS.dt);
    }

    #[test]
    fn base_keeps_its_outputs() {
        assert_eq!(
            parse_config("base = \"test1\"").unwrap(),
            builtin_scenario("test1").unwrap()
        );
    }

    #[test]
    fn unknown_keys_are_refused() {
        assert!(matches!(
            parse_config("base = \"test1\"\nhorizn = 2"),
            Err(CliError::Parse { .. })
        ));
    }

    #[test]
    fn study_tables() {
        let f =
            parse_file_text("base = \"test2\"\n[study]\nkind = \"steps\"\nrows = [[0.1, 2e-4]]\n")
                .unwrap();
        assert_eq!(
            f.study,
            Some(StudyTable::Steps {
                rows: vec![(0.1, 2e-4)]
            })
        );
        let f = parse_file_text("base = \"test2\"\n[study]\nkind = \"smoothing\"\ndeltas = [0.05]\ndx = 5e-3\ndt = 2e-6\n").unwrap();
        assert!(matches!(f.study, Some(StudyTable::Smoothing { .. })));
    }
}
