//! Belt network topology: arcs, typed junctions and structural validation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a belt arc.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcId(pub String);

impl ArcId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ArcId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// Spatial extent `(lo, hi)` of an arc in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// A single conveyor segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeltArc {
    pub id: ArcId,
    pub domain: Interval,
    /// Transport speed `a > 0`.
    pub velocity: f64,
    /// Maximal density `ρmax > 0`.
    pub capacity: f64,
}

impl BeltArc {
    pub fn new(id: impl Into<ArcId>, domain: Interval, velocity: f64, capacity: f64) -> Self {
        Self {
            id: id.into(),
            domain,
            velocity,
            capacity,
        }
    }

    /// Maximal free-flow flux `a·ρmax`.
    pub fn max_flux(&self) -> f64 {
        self.velocity * self.capacity
    }
}

impl From<String> for ArcId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JunctionKind {
    Source,
    Sink,
    OneToOne,
    DivergePassive,
    DivergeActive,
    Merge,
}

impl JunctionKind {
    /// Required `(incoming, outgoing)` arc counts.
    pub fn arity(self) -> (usize, usize) {
        match self {
            JunctionKind::Source => (0, 1),
            JunctionKind::Sink => (1, 0),
            JunctionKind::OneToOne => (1, 1),
            JunctionKind::DivergePassive | JunctionKind::DivergeActive => (1, 2),
            JunctionKind::Merge => (2, 1),
        }
    }

    pub fn is_diverge(self) -> bool {
        matches!(
            self,
            JunctionKind::DivergePassive | JunctionKind::DivergeActive
        )
    }

    pub fn is_interior(self) -> bool {
        !matches!(self, JunctionKind::Source | JunctionKind::Sink)
    }
}

impl fmt::Display for JunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JunctionKind::Source => "source",
            JunctionKind::Sink => "sink",
            JunctionKind::OneToOne => "one_to_one",
            JunctionKind::DivergePassive => "diverge_passive",
            JunctionKind::DivergeActive => "diverge_active",
            JunctionKind::Merge => "merge",
        };
        f.write_str(s)
    }
}

/// Prescribed inflow rate (units/second) at a source junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Inflow {
    Constant {
        value: f64,
    },
    /// Piecewise-linear in time, held constant outside the sampled range.
    Table {
        points: Vec<(f64, f64)>,
    },
}

impl Default for Inflow {
    fn default() -> Self {
        Inflow::Constant { value: 0.0 }
    }
}

impl Inflow {
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Inflow::Constant { value } => *value,
            Inflow::Table { points } => interpolate(points, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Inflow::Constant { value } => *value == 0.0,
            Inflow::Table { points } => points.iter().all(|&(_, v)| v == 0.0),
        }
    }
}

/// Linear interpolation through sorted `(x, y)` samples, constant extension.
pub(crate) fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    match points {
        [] => 0.0,
        [(_, y)] => *y,
        _ => {
            let first = points[0];
            let last = points[points.len() - 1];
            if x <= first.0 {
                return first.1;
            }
            if x >= last.0 {
                return last.1;
            }
            let k = points.partition_point(|&(px, _)| px <= x);
            let (x0, y0) = points[k - 1];
            let (x1, y1) = points[k];
            if x1 == x0 {
                return y1;
            }
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

/// A typed vertex of the belt graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionSpec {
    pub id: String,
    pub kind: JunctionKind,
    #[serde(default)]
    pub in_arcs: Vec<ArcId>,
    #[serde(default)]
    pub out_arcs: Vec<ArcId>,
    /// Distribution parameter of diverging junctions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Merging parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Source inflow; absent means identically zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflow: Option<Inflow>,
}

impl JunctionSpec {
    fn bare(
        id: impl Into<String>,
        kind: JunctionKind,
        in_arcs: Vec<ArcId>,
        out_arcs: Vec<ArcId>,
    ) -> Self {
        Self {
            id: id.into(),
            kind,
            in_arcs,
            out_arcs,
            mu: None,
            q: None,
            inflow: None,
        }
    }

    pub fn source(id: impl Into<String>, out: impl Into<ArcId>) -> Self {
        Self::bare(id, JunctionKind::Source, vec![], vec![out.into()])
    }

    pub fn source_with_inflow(
        id: impl Into<String>,
        out: impl Into<ArcId>,
        inflow: Inflow,
    ) -> Self {
        Self {
            inflow: Some(inflow),
            ..Self::source(id, out)
        }
    }

    pub fn sink(id: impl Into<String>, inc: impl Into<ArcId>) -> Self {
        Self::bare(id, JunctionKind::Sink, vec![inc.into()], vec![])
    }

    pub fn one_to_one(id: impl Into<String>, inc: impl Into<ArcId>, out: impl Into<ArcId>) -> Self {
        Self::bare(
            id,
            JunctionKind::OneToOne,
            vec![inc.into()],
            vec![out.into()],
        )
    }

    pub fn diverge(
        id: impl Into<String>,
        active: bool,
        inc: impl Into<ArcId>,
        outs: [ArcId; 2],
        mu: f64,
    ) -> Self {
        let kind = if active {
            JunctionKind::DivergeActive
        } else {
            JunctionKind::DivergePassive
        };
        Self {
            mu: Some(mu),
            ..Self::bare(id, kind, vec![inc.into()], outs.to_vec())
        }
    }

    pub fn merge(id: impl Into<String>, ins: [ArcId; 2], out: impl Into<ArcId>, q: f64) -> Self {
        Self {
            q: Some(q),
            ..Self::bare(id, JunctionKind::Merge, ins.to_vec(), vec![out.into()])
        }
    }

    pub fn inflow_rate(&self, t: f64) -> f64 {
        self.inflow.as_ref().map_or(0.0, |f| f.rate(t))
    }
}

/// Directed graph of belt arcs joined by junctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub arcs: BTreeMap<ArcId, BeltArc>,
    pub junctions: Vec<JunctionSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Violation,
    Note,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub severity: Severity,
    /// Where the problem is, e.g. `junction "J"` or `arc "2"`.
    pub locus: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.locus, self.message)
    }
}

/// Result of [`Network::validate`]. Violations make a network unusable,
/// notes are informational.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Issue>,
    pub notes: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, locus: String, message: impl Into<String>) {
        self.violations.push(Issue {
            severity: Severity::Violation,
            locus,
            message: message.into(),
        });
    }

    fn note(&mut self, locus: String, message: impl Into<String>) {
        self.notes.push(Issue {
            severity: Severity::Note,
            locus,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let all: Vec<String> = self.violations.iter().map(|i| i.to_string()).collect();
        f.write_str(&all.join("; "))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error("{kind:?} topology expects {expected} {what}, got {got}")]
    ParameterCount {
        kind: Topology,
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0:?} topology requires parameter {1}")]
    MissingParameter(Topology, &'static str),
}

const ENDPOINT_TOL: f64 = 1e-12;

impl Network {
    pub fn new(arcs: impl IntoIterator<Item = BeltArc>, junctions: Vec<JunctionSpec>) -> Self {
        Self {
            arcs: arcs.into_iter().map(|a| (a.id.clone(), a)).collect(),
            junctions,
        }
    }

    /// Builds the network and rejects it if [`Network::validate`] reports violations.
    pub fn validated(
        arcs: impl IntoIterator<Item = BeltArc>,
        junctions: Vec<JunctionSpec>,
    ) -> Result<Self, NetworkError> {
        let net = Self::new(arcs, junctions);
        let report = net.validate();
        if report.is_empty() {
            Ok(net)
        } else {
            Err(NetworkError::Invalid(report))
        }
    }

    pub fn arc(&self, id: &ArcId) -> Option<&BeltArc> {
        self.arcs.get(id)
    }

    /// Junctions with both incoming and outgoing arcs.
    pub fn interior_junctions(&self) -> impl Iterator<Item = &JunctionSpec> {
        self.junctions.iter().filter(|j| j.kind.is_interior())
    }

    /// Largest number of incoming arcs at any junction.
    pub fn max_in_degree(&self) -> usize {
        self.junctions
            .iter()
            .map(|j| j.in_arcs.len())
            .max()
            .unwrap_or(0)
    }

    /// Junction feeding arc `id` (the one listing it as outgoing).
    pub fn upstream_junction(&self, id: &ArcId) -> Option<&JunctionSpec> {
        self.junctions.iter().find(|j| j.out_arcs.contains(id))
    }

    pub fn downstream_junction(&self, id: &ArcId) -> Option<&JunctionSpec> {
        self.junctions.iter().find(|j| j.in_arcs.contains(id))
    }

    /// Collects every structural violation.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        for (key, arc) in &self.arcs {
            let locus = format!("arc \"{key}\"");
            if *key != arc.id {
                report.violation(
                    locus.clone(),
                    format!("map key differs from arc id \"{}\"", arc.id),
                );
            }
            if !(arc.velocity > 0.0 && arc.velocity.is_finite()) {
                report.violation(
                    locus.clone(),
                    format!("velocity must be positive, got {}", arc.velocity),
                );
            }
            if !(arc.capacity > 0.0 && arc.capacity.is_finite()) {
                report.violation(
                    locus.clone(),
                    format!("capacity must be positive, got {}", arc.capacity),
                );
            }
            if arc.domain.lo.partial_cmp(&arc.domain.hi) != Some(std::cmp::Ordering::Less)
                || !arc.domain.lo.is_finite()
                || !arc.domain.hi.is_finite()
            {
                report.violation(
                    locus.clone(),
                    format!("empty domain ({}, {})", arc.domain.lo, arc.domain.hi),
                );
            }
        }

        let mut upstream_count: BTreeMap<&ArcId, usize> = BTreeMap::new();
        let mut downstream_count: BTreeMap<&ArcId, usize> = BTreeMap::new();

        for j in &self.junctions {
            let locus = format!("junction \"{}\"", j.id);
            let (n_in, n_out) = j.kind.arity();
            if j.in_arcs.len() != n_in || j.out_arcs.len() != n_out {
                report.violation(
                    locus.clone(),
                    format!(
                        "{} junction needs {} incoming / {} outgoing arcs, has {} / {}",
                        j.kind,
                        n_in,
                        n_out,
                        j.in_arcs.len(),
                        j.out_arcs.len()
                    ),
                );
            }
            for id in j.in_arcs.iter().chain(&j.out_arcs) {
                if !self.arcs.contains_key(id) {
                    report.violation(locus.clone(), format!("unresolved arc id \"{id}\""));
                }
            }
            for id in &j.in_arcs {
                *downstream_count.entry(id).or_default() += 1;
            }
            for id in &j.out_arcs {
                *upstream_count.entry(id).or_default() += 1;
            }

            match (j.kind.is_diverge(), j.mu) {
                (true, None) => report.violation(locus.clone(), "mu missing on diverge junction"),
                (true, Some(mu)) => {
                    if !(0.0..=1.0).contains(&mu) {
                        report.violation(locus.clone(), format!("mu out of [0,1]: {mu}"));
                    } else if j.kind == JunctionKind::DivergePassive && (mu == 0.0 || mu == 1.0) {
                        report.note(
                            locus.clone(),
                            "mu at 0 or 1 reduces the passive diverge to a one-to-one junction",
                        );
                    }
                }
                (false, Some(_)) => {
                    report.violation(locus.clone(), "mu only applies to diverge junctions")
                }
                (false, None) => {}
            }
            match (j.kind == JunctionKind::Merge, j.q) {
                (true, None) => report.violation(locus.clone(), "q missing on merge junction"),
                (true, Some(q)) if !(0.0..=1.0).contains(&q) => {
                    report.violation(locus.clone(), format!("q out of [0,1]: {q}"))
                }
                (false, Some(_)) => {
                    report.violation(locus.clone(), "q only applies to merge junctions")
                }
                _ => {}
            }
            if j.inflow.is_some() && j.kind != JunctionKind::Source {
                report.violation(locus.clone(), "inflow only applies to source junctions");
            }
            if let Some(Inflow::Table { points }) = &j.inflow {
                if points.windows(2).any(|w| w[1].0 < w[0].0) {
                    report.violation(locus.clone(), "inflow table times must be sorted");
                }
            }
            if let Some(f) = &j.inflow {
                let negative = match f {
                    Inflow::Constant { value } => *value < 0.0,
                    Inflow::Table { points } => points.iter().any(|&(_, v)| v < 0.0),
                };
                if negative {
                    report.violation(locus.clone(), "inflow must be nonnegative");
                }
            }

            // All attached arc ends must meet at one point.
            let mut ends = j
                .in_arcs
                .iter()
                .filter_map(|id| self.arcs.get(id).map(|a| a.domain.hi))
                .chain(
                    j.out_arcs
                        .iter()
                        .filter_map(|id| self.arcs.get(id).map(|a| a.domain.lo)),
                );
            if let Some(first) = ends.next() {
                if ends.any(|x| (x - first).abs() > ENDPOINT_TOL * first.abs().max(1.0)) {
                    report.violation(locus.clone(), "attached arc endpoints do not coincide");
                }
            }
        }

        for id in self.arcs.keys() {
            let locus = format!("arc \"{id}\"");
            match upstream_count.get(id).copied().unwrap_or(0) {
                1 => {}
                n => report.violation(
                    locus.clone(),
                    format!("upstream end attached to {n} junctions, expected 1"),
                ),
            }
            match downstream_count.get(id).copied().unwrap_or(0) {
                1 => {}
                n => report.violation(
                    locus,
                    format!("downstream end attached to {n} junctions, expected 1"),
                ),
            }
        }

        if self.max_in_degree() > 2 {
            report.violation(
                "network".into(),
                "a junction has more than two incoming arcs",
            );
        }

        report
    }
}

/// The canonical single-junction layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    OneToOne,
    DivergePassive,
    DivergeActive,
    Merge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyParams {
    pub velocities: Vec<f64>,
    pub capacities: Vec<f64>,
    pub mu: Option<f64>,
    pub q: Option<f64>,
    /// Arc length; the junction sits at `x = 0`.
    pub length: f64,
}

impl TopologyParams {
    pub fn new(velocities: &[f64], capacities: &[f64]) -> Self {
        Self {
            velocities: velocities.to_vec(),
            capacities: capacities.to_vec(),
            mu: None,
            q: None,
            length: PI,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }
}

/// Builds a standard network: incoming arcs on `(-L, 0)`, outgoing arcs on
/// `(0, L)`, arcs named `"1"`, `"2"`, `"3"` with incoming arcs numbered first.
pub fn standard_topology(kind: Topology, params: &TopologyParams) -> Result<Network, NetworkError> {
    let n_arcs = match kind {
        Topology::OneToOne => 2,
        _ => 3,
    };
    for (what, got) in [
        ("velocities", params.velocities.len()),
        ("capacities", params.capacities.len()),
    ] {
        if got != n_arcs {
            return Err(NetworkError::ParameterCount {
                kind,
                what,
                expected: n_arcs,
                got,
            });
        }
    }
    let n_in = if kind == Topology::Merge { 2 } else { 1 };
    let l = params.length;
    let arcs: Vec<BeltArc> = (0..n_arcs)
        .map(|i| {
            let domain = if i < n_in {
                Interval::new(-l, 0.0)
            } else {
                Interval::new(0.0, l)
            };
            BeltArc::new(
                format!("{}", i + 1),
                domain,
                params.velocities[i],
                params.capacities[i],
            )
        })
        .collect();
    let id = |i: usize| ArcId(format!("{}", i + 1));

    let mut junctions: Vec<JunctionSpec> = (0..n_in)
        .map(|i| JunctionSpec::source(format!("in{}", i + 1), id(i)))
        .collect();
    let centre = match kind {
        Topology::OneToOne => JunctionSpec::one_to_one("J", id(0), id(1)),
        Topology::DivergePassive | Topology::DivergeActive => {
            let mu = params
                .mu
                .ok_or(NetworkError::MissingParameter(kind, "mu"))?;
            JunctionSpec::diverge(
                "J",
                kind == Topology::DivergeActive,
                id(0),
                [id(1), id(2)],
                mu,
            )
        }
        Topology::Merge => {
            let q = params.q.ok_or(NetworkError::MissingParameter(kind, "q"))?;
            JunctionSpec::merge("J", [id(0), id(1)], id(2), q)
        }
    };
    junctions.push(centre);
    junctions.extend((n_in..n_arcs).map(|i| JunctionSpec::sink(format!("out{}", i + 1), id(i))));
    Ok(Network::new(arcs, junctions))
}
