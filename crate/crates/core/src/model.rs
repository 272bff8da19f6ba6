//! Central fiber combinatorics: components, nodes, marks and their validation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Q = Rational64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ComponentId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MarkId(pub usize);

/// A point of a component at which marks sit; marks sharing a point form a merge group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PointId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModelParams {
    pub m: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub id: ComponentId,
    pub name: String,
    pub genus: u32,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: EdgeId,
    pub name: String,
    pub ends: (ComponentId, ComponentId),
}

impl Edge {
    pub fn other(&self, c: ComponentId) -> ComponentId {
        if self.ends.0 == c {
            self.ends.1
        } else {
            self.ends.0
        }
    }

    pub fn touches(&self, c: ComponentId) -> bool {
        self.ends.0 == c || self.ends.1 == c
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkedPoint {
    pub id: MarkId,
    pub name: String,
    pub host: ComponentId,
    pub coefficient: u32,
    pub point: PointId,
}

/// A recorded modification of a model. The same records drive measure transport.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum Event {
    /// `component` (a genus-0 curve meeting the rest in one node `edge`) is collapsed to
    /// the point `point` of `onto`.
    CollapseLeaf {
        component: ComponentId,
        edge: EdgeId,
        onto: ComponentId,
        point: PointId,
    },
    /// The node `parent` between `ends.0` and `ends.1` is replaced by the curve
    /// `exceptional` and the edges `first` (ends.0 to exceptional) and `second`
    /// (exceptional to ends.1); `split` is the position of the exceptional curve on `parent`
    /// measured from `ends.0`.
    MergeEdge {
        parent: EdgeId,
        ends: (ComponentId, ComponentId),
        exceptional: ComponentId,
        first: EdgeId,
        second: EdgeId,
        split: Q,
        parent_length: Q,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Contraction,
    BlowupSmoothPoint,
    BlowupNode,
}

/// One entry of a model's history. `event` is phrased from the modified model towards its
/// predecessor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub operation: Operation,
    pub event: Event,
}

/// Identifies the model a measure lives on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ModelKey(pub String);

impl fmt::Display for ModelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualGraphModel {
    params: ModelParams,
    components: BTreeMap<ComponentId, Component>,
    edges: BTreeMap<EdgeId, Edge>,
    marks: BTreeMap<MarkId, MarkedPoint>,
    provenance: Vec<Provenance>,
    #[serde(skip)]
    next_component: usize,
    #[serde(skip)]
    next_edge: usize,
    #[serde(skip)]
    next_mark: usize,
    #[serde(skip)]
    next_point: usize,
}

impl DualGraphModel {
    pub fn new(m: u32) -> Self {
        DualGraphModel {
            params: ModelParams { m },
            components: BTreeMap::new(),
            edges: BTreeMap::new(),
            marks: BTreeMap::new(),
            provenance: Vec::new(),
            next_component: 0,
            next_edge: 0,
            next_mark: 0,
            next_point: 0,
        }
    }

    pub fn m(&self) -> u32 {
        self.params.m
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn add_component(&mut self, name: impl Into<String>, genus: u32, multiplicity: u32) -> ComponentId {
        let id = ComponentId(self.next_component);
        self.next_component += 1;
        self.components.insert(
            id,
            Component { id, name: name.into(), genus, multiplicity },
        );
        id
    }

    /// Adds a node between `a` and `b`. Loops are accepted here and reported by [`validate`].
    pub fn add_edge(&mut self, name: Option<String>, a: ComponentId, b: ComponentId) -> Result<EdgeId> {
        self.require_component(a)?;
        self.require_component(b)?;
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        let name = name.unwrap_or_else(|| self.fresh_name("e", id.0));
        self.edges.insert(id, Edge { id, name, ends: (a, b) });
        Ok(id)
    }

    /// Adds a mark at its own new point of `host`.
    pub fn add_mark(&mut self, name: impl Into<String>, host: ComponentId, coefficient: u32) -> Result<MarkId> {
        let point = self.fresh_point();
        self.add_mark_at(name, host, coefficient, point)
    }

    /// Adds a mark at an existing point, joining that point's merge group.
    pub fn add_mark_at(
        &mut self,
        name: impl Into<String>,
        host: ComponentId,
        coefficient: u32,
        point: PointId,
    ) -> Result<MarkId> {
        self.require_component(host)?;
        let id = MarkId(self.next_mark);
        self.next_mark += 1;
        self.marks.insert(
            id,
            MarkedPoint { id, name: name.into(), host, coefficient, point },
        );
        Ok(id)
    }

    pub fn fresh_point(&mut self) -> PointId {
        let p = PointId(self.next_point);
        self.next_point += 1;
        p
    }

    pub(crate) fn fresh_name(&self, prefix: &str, start: usize) -> String {
        let taken: BTreeSet<&str> = self
            .components
            .values()
            .map(|c| c.name.as_str())
            .chain(self.edges.values().map(|e| e.name.as_str()))
            .chain(self.marks.values().map(|k| k.name.as_str()))
            .collect();
        let mut n = start;
        loop {
            let candidate = format!("{prefix}{n}");
            if !taken.contains(candidate.as_str()) {
                return candidate;
            }
            n += 1;
        }
    }

    pub(crate) fn next_component_index(&self) -> usize {
        self.next_component
    }

    pub(crate) fn next_edge_index(&self) -> usize {
        self.next_edge
    }

    pub(crate) fn remove_component(&mut self, c: ComponentId) {
        self.components.remove(&c);
    }

    pub(crate) fn remove_edge(&mut self, e: EdgeId) {
        self.edges.remove(&e);
    }

    pub(crate) fn mark_mut(&mut self, k: MarkId) -> &mut MarkedPoint {
        self.marks.get_mut(&k).expect("mark exists")
    }

    pub(crate) fn remove_mark(&mut self, k: MarkId) {
        self.marks.remove(&k);
    }

    pub(crate) fn record(&mut self, operation: Operation, event: Event) {
        self.provenance.push(Provenance { operation, event });
    }

    pub fn require_component(&self, c: ComponentId) -> Result<&Component> {
        self.components.get(&c).ok_or_else(|| Error::Unknown {
            kind: "component",
            name: format!("#{}", c.0),
        })
    }

    pub fn require_edge(&self, e: EdgeId) -> Result<&Edge> {
        self.edges.get(&e).ok_or_else(|| Error::Unknown {
            kind: "edge",
            name: format!("#{}", e.0),
        })
    }

    pub fn component(&self, c: ComponentId) -> Option<&Component> {
        self.components.get(&c)
    }

    pub fn edge(&self, e: EdgeId) -> Option<&Edge> {
        self.edges.get(&e)
    }

    pub fn mark(&self, k: MarkId) -> Option<&MarkedPoint> {
        self.marks.get(&k)
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.components.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn marks(&self) -> impl Iterator<Item = &MarkedPoint> {
        self.marks.values()
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn component_by_name(&self, name: &str) -> Option<ComponentId> {
        self.components.values().find(|c| c.name == name).map(|c| c.id)
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edges.values().find(|e| e.name == name).map(|e| e.id)
    }

    pub fn mark_by_name(&self, name: &str) -> Option<MarkId> {
        self.marks.values().find(|k| k.name == name).map(|k| k.id)
    }

    pub fn component_name(&self, c: ComponentId) -> String {
        self.components.get(&c).map(|x| x.name.clone()).unwrap_or_else(|| format!("#{}", c.0))
    }

    pub fn edge_name(&self, e: EdgeId) -> String {
        self.edges.get(&e).map(|x| x.name.clone()).unwrap_or_else(|| format!("#{}", e.0))
    }

    pub fn key(&self) -> ModelKey {
        let cs: Vec<String> = self.components.keys().map(|c| c.0.to_string()).collect();
        let es: Vec<String> = self.edges.keys().map(|e| e.0.to_string()).collect();
        ModelKey(format!("c[{}]e[{}]", cs.join(","), es.join(",")))
    }

    /// Number of edge endpoints at `c`.
    pub fn valency(&self, c: ComponentId) -> u32 {
        self.edges
            .values()
            .map(|e| (e.ends.0 == c) as u32 + (e.ends.1 == c) as u32)
            .sum()
    }

    pub fn incident_edges(&self, c: ComponentId) -> Vec<EdgeId> {
        self.edges.values().filter(|e| e.touches(c)).map(|e| e.id).collect()
    }

    /// Sum of coefficients of the marks hosted on `c`.
    pub fn mark_degree(&self, c: ComponentId) -> u32 {
        self.marks.values().filter(|k| k.host == c).map(|k| k.coefficient).sum()
    }

    pub fn marks_on(&self, c: ComponentId) -> Vec<&MarkedPoint> {
        self.marks.values().filter(|k| k.host == c).collect()
    }

    /// Merge groups on `c`: marks sharing a point, keyed by that point.
    pub fn mark_groups(&self, c: ComponentId) -> BTreeMap<PointId, Vec<&MarkedPoint>> {
        let mut groups: BTreeMap<PointId, Vec<&MarkedPoint>> = BTreeMap::new();
        for k in self.marks.values().filter(|k| k.host == c) {
            groups.entry(k.point).or_default().push(k);
        }
        groups
    }

    pub fn edge_length(&self, e: EdgeId) -> Result<Q> {
        let edge = self.require_edge(e)?;
        let a = self.require_component(edge.ends.0)?.multiplicity as i64;
        let b = self.require_component(edge.ends.1)?.multiplicity as i64;
        if a == 0 || b == 0 {
            return Err(Error::Precondition(format!("edge {} meets a multiplicity-0 component", edge.name)));
        }
        Ok(Q::new(1, a * b))
    }

    pub fn total_length(&self) -> Result<Q> {
        self.edges.keys().try_fold(Q::from_integer(0), |acc, &e| Ok(acc + self.edge_length(e)?))
    }

    pub fn is_semistable(&self) -> bool {
        self.components.values().all(|c| c.multiplicity == 1)
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.components.keys().next() else {
            return false;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for e in self.edges.values().filter(|e| e.touches(c)) {
                let o = e.other(c);
                if self.components.contains_key(&o) && seen.insert(o) {
                    queue.push_back(o);
                }
            }
        }
        seen.len() == self.components.len()
    }

    /// Essential unless genus 0, valency 2 and no marks.
    pub fn is_inessential(&self, c: ComponentId) -> bool {
        self.components.get(&c).is_some_and(|x| x.genus == 0)
            && self.valency(c) == 2
            && self.mark_degree(c) == 0
    }

    pub fn bundle(&self, c: ComponentId) -> Result<BundleDescriptor> {
        let comp = self.require_component(c)?;
        let mut coefficients: Vec<u32> = self.marks_on(c).iter().map(|k| k.coefficient).collect();
        coefficients.sort_unstable();
        Ok(BundleDescriptor::new(c, self.m(), comp.genus, self.valency(c), coefficients))
    }
}

/// Σ genus + #edges − #components + 1.
pub fn arithmetic_genus(model: &DualGraphModel) -> Result<i64> {
    if !model.is_connected() {
        let mut report = ValidationReport::default();
        report.error("disconnected", "model is disconnected or empty");
        return Err(Error::Validation(report));
    }
    let genera: i64 = model.components().map(|c| c.genus as i64).sum();
    Ok(genera + model.edge_count() as i64 - model.component_count() as i64 + 1)
}

pub fn total_mark_degree(model: &DualGraphModel) -> u64 {
    model.marks().map(|k| k.coefficient as u64).sum()
}

/// The line bundle mK + (m−1)·(node points) + B̄|_E on one component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BundleDescriptor {
    pub component: ComponentId,
    pub m: u32,
    pub genus: u32,
    pub valency: u32,
    pub node_pole_order: u32,
    pub mark_coefficients: Vec<u32>,
    pub degree: i64,
}

impl BundleDescriptor {
    pub fn new(component: ComponentId, m: u32, genus: u32, valency: u32, mark_coefficients: Vec<u32>) -> Self {
        let mark_degree: i64 = mark_coefficients.iter().map(|&b| b as i64).sum();
        let degree = m as i64 * (2 * genus as i64 - 2) + (m as i64 - 1) * valency as i64 + mark_degree;
        BundleDescriptor {
            component,
            m,
            genus,
            valency,
            node_pole_order: m.saturating_sub(1),
            mark_coefficients,
            degree,
        }
    }

    pub fn mark_degree(&self) -> u32 {
        self.mark_coefficients.iter().sum()
    }

    pub fn h0(&self) -> Result<u64> {
        crate::limits::h0(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Essentiality {
    Essential,
    Inessential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SectionType {
    #[serde(rename = "type-I")]
    TypeI,
    #[serde(rename = "type-II")]
    TypeII,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentClass {
    pub component: ComponentId,
    pub essentiality: Essentiality,
    pub section_type: SectionType,
    pub h0: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn error(&mut self, code: &str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            code: code.into(),
            message: message.into(),
        });
    }

    pub fn warning(&mut self, code: &str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            code: code.into(),
            message: message.into(),
        });
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn is_empty(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// Turns a report with errors into an `Err`, keeping warnings otherwise.
    pub fn into_result(self) -> Result<ValidationReport> {
        if self.has_errors() {
            Err(Error::Validation(self))
        } else {
            Ok(self)
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .diagnostics
            .iter()
            .map(|d| {
                let sev = match d.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                format!("{sev}[{}]: {}", d.code, d.message)
            })
            .collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks every structural constraint on a model. Never fails; problems are reported.
pub fn validate(model: &DualGraphModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let m = model.m();
    if m < 2 {
        report.error("m-below-2", format!("m below 2 (m = {m})"));
    }
    if model.component_count() == 0 {
        report.error("empty", "model has no components");
        return report;
    }
    for c in model.components() {
        if c.multiplicity == 0 {
            report.error("multiplicity", format!("component {} has multiplicity 0", c.name));
        }
    }
    for k in model.marks() {
        if model.component(k.host).is_none() {
            report.error("unknown-host", format!("mark {} sits on an unknown component", k.name));
        }
        if k.coefficient < 1 || k.coefficient + 1 > m {
            report.error(
                "coefficient-range",
                format!("mark {} has coefficient {} outside [1, {}]", k.name, k.coefficient, m.saturating_sub(1)),
            );
        }
    }
    for e in model.edges() {
        if e.ends.0 == e.ends.1 {
            report.error("loop", format!("loop forbidden: edge {} joins {} to itself", e.name, model.component_name(e.ends.0)));
        }
    }
    if !model.is_connected() {
        report.error("disconnected", "model is disconnected");
    } else {
        let g = arithmetic_genus(model).expect("connected");
        let marks = model.marks().count();
        let degree = total_mark_degree(model);
        if g == 1 && marks == 0 {
            report.error("excluded-family", "excluded family: arithmetic genus 1 with no marks");
        }
        if g == 0 {
            if degree < 2 * m as u64 {
                report.error(
                    "genus0-degree",
                    format!("arithmetic genus 0 needs total mark degree at least {} (found {degree})", 2 * m),
                );
            }
            if marks < 3 {
                report.error("genus0-marks", format!("arithmetic genus 0 needs at least 3 marks (found {marks})"));
            }
        }
        if model.components().all(|c| model.is_inessential(c.id)) {
            report.error("all-inessential", "every component is inessential");
        }
    }
    for c in model.components() {
        for (_, group) in model.mark_groups(c.id) {
            if group.len() > 1 {
                let sum: u32 = group.iter().map(|k| k.coefficient).sum();
                if sum >= m {
                    let names: Vec<&str> = group.iter().map(|k| k.name.as_str()).collect();
                    report.warning(
                        "merged-coefficient",
                        format!(
                            "marks {} coincide on {} with total coefficient {sum} >= m",
                            names.join(","),
                            c.name
                        ),
                    );
                }
            }
        }
    }
    report
}

/// Color used by the isomorphism test: genus, multiplicity and the sorted merge groups.
fn color(model: &DualGraphModel, c: ComponentId) -> (u32, u32, Vec<Vec<u32>>) {
    let comp = model.component(c).expect("component");
    let mut groups: Vec<Vec<u32>> = model
        .mark_groups(c)
        .into_values()
        .map(|g| {
            let mut v: Vec<u32> = g.iter().map(|k| k.coefficient).collect();
            v.sort_unstable();
            v
        })
        .collect();
    groups.sort();
    (comp.genus, comp.multiplicity, groups)
}

/// Isomorphism of models as marked multigraphs, ignoring names and ids.
pub fn is_isomorphic(a: &DualGraphModel, b: &DualGraphModel) -> bool {
    if a.m() != b.m() || a.component_count() != b.component_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let av: Vec<ComponentId> = a.components().map(|c| c.id).collect();
    let bv: Vec<ComponentId> = b.components().map(|c| c.id).collect();
    let acol: Vec<_> = av.iter().map(|&c| (color(a, c), a.valency(c))).collect();
    let bcol: Vec<_> = bv.iter().map(|&c| (color(b, c), b.valency(c))).collect();
    let mut sa = acol.clone();
    let mut sb = bcol.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return false;
    }
    let count = |model: &DualGraphModel, verts: &[ComponentId]| {
        let n = verts.len();
        let index: BTreeMap<ComponentId, usize> = verts.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut adj = vec![vec![0usize; n]; n];
        for e in model.edges() {
            let (i, j) = (index[&e.ends.0], index[&e.ends.1]);
            adj[i][j] += 1;
            if i != j {
                adj[j][i] += 1;
            }
        }
        adj
    };
    let aadj = count(a, &av);
    let badj = count(b, &bv);
    let n = av.len();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn extend(
        i: usize,
        n: usize,
        map: &mut [usize],
        used: &mut [bool],
        acol: &[((u32, u32, Vec<Vec<u32>>), u32)],
        bcol: &[((u32, u32, Vec<Vec<u32>>), u32)],
        aadj: &[Vec<usize>],
        badj: &[Vec<usize>],
    ) -> bool {
        if i == n {
            return true;
        }
        for j in 0..n {
            if used[j] || acol[i] != bcol[j] || aadj[i][i] != badj[j][j] {
                continue;
            }
            if (0..i).any(|k| aadj[i][k] != badj[j][map[k]]) {
                continue;
            }
            map[i] = j;
            used[j] = true;
            if extend(i + 1, n, map, used, acol, bcol, aadj, badj) {
                return true;
            }
            used[j] = false;
        }
        false
    }

    extend(0, n, &mut map, &mut used, &acol, &bcol, &aadj, &badj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dumbbell(m: u32) -> DualGraphModel {
        let mut g = DualGraphModel::new(m);
        let a = g.add_component("E1", 1, 1);
        let b = g.add_component("E2", 1, 1);
        g.add_edge(None, a, b).unwrap();
        g
    }

    #[test]
    fn genus_examples() {
        assert_eq!(arithmetic_genus(&dumbbell(2)).unwrap(), 2);
        let mut single = DualGraphModel::new(2);
        single.add_component("E", 2, 1);
        assert_eq!(arithmetic_genus(&single).unwrap(), 2);
        let mut cycle = DualGraphModel::new(2);
        let v: Vec<_> = (0..4).map(|i| cycle.add_component(format!("V{i}"), 0, 1)).collect();
        for i in 0..4 {
            cycle.add_edge(None, v[i], v[(i + 1) % 4]).unwrap();
        }
        assert_eq!(arithmetic_genus(&cycle).unwrap(), 1);
    }

    #[test]
    fn disconnected_genus_is_an_error() {
        let mut g = DualGraphModel::new(2);
        g.add_component("A", 1, 1);
        g.add_component("B", 1, 1);
        assert!(matches!(arithmetic_genus(&g), Err(Error::Validation(_))));
    }

    #[test]
    fn mark_degrees() {
        let mut g = DualGraphModel::new(4);
        let a = g.add_component("A", 2, 1);
        assert_eq!(total_mark_degree(&g), 0);
        g.add_mark("P", a, 3).unwrap();
        g.add_mark("Q", a, 2).unwrap();
        assert_eq!(total_mark_degree(&g), 5);
        let mut h = DualGraphModel::new(2);
        let b = h.add_component("B", 0, 1);
        for i in 0..3 {
            h.add_mark(format!("P{i}"), b, 1).unwrap();
        }
        assert_eq!(total_mark_degree(&h), 3);
    }

    #[test]
    fn validation_examples() {
        let mut low = DualGraphModel::new(1);
        low.add_component("E", 2, 1);
        let r = validate(&low);
        assert!(r.errors().any(|d| d.message.contains("m below 2")));

        let mut elliptic = DualGraphModel::new(2);
        elliptic.add_component("E", 1, 1);
        let r = validate(&elliptic);
        assert!(r.errors().any(|d| d.message.contains("excluded family")));

        assert!(validate(&dumbbell(2)).is_empty());
    }

    #[test]
    fn validation_catches_loops_and_ranges() {
        let mut g = DualGraphModel::new(3);
        let a = g.add_component("A", 2, 1);
        g.add_edge(None, a, a).unwrap();
        g.add_mark("P", a, 3).unwrap();
        let r = validate(&g);
        assert!(r.errors().any(|d| d.code == "loop"));
        assert!(r.errors().any(|d| d.code == "coefficient-range"));
    }

    #[test]
    fn genus_zero_needs_enough_marks() {
        let mut g = DualGraphModel::new(2);
        let a = g.add_component("A", 0, 1);
        g.add_mark("P", a, 1).unwrap();
        g.add_mark("Q", a, 1).unwrap();
        let r = validate(&g);
        assert!(r.errors().any(|d| d.code == "genus0-degree"));
        assert!(r.errors().any(|d| d.code == "genus0-marks"));
    }

    #[test]
    fn merged_group_warning() {
        let mut g = DualGraphModel::new(3);
        let a = g.add_component("A", 2, 1);
        let p = g.fresh_point();
        g.add_mark_at("P", a, 2, p).unwrap();
        g.add_mark_at("Q", a, 1, p).unwrap();
        let r = validate(&g);
        assert!(!r.has_errors());
        assert_eq!(r.warnings().count(), 1);
    }

    #[test]
    fn edge_lengths_from_multiplicities() {
        let mut g = DualGraphModel::new(2);
        let a = g.add_component("A", 1, 2);
        let b = g.add_component("B", 1, 3);
        let c = g.add_component("C", 1, 1);
        let e = g.add_edge(None, a, b).unwrap();
        let f = g.add_edge(None, b, c).unwrap();
        assert_eq!(g.edge_length(e).unwrap(), Q::new(1, 6));
        assert_eq!(g.edge_length(f).unwrap(), Q::new(1, 3));
    }

    #[test]
    fn bundle_degree() {
        let mut g = DualGraphModel::new(4);
        let a = g.add_component("A", 1, 1);
        let b = g.add_component("B", 2, 1);
        g.add_edge(None, a, b).unwrap();
        g.add_mark("P", a, 2).unwrap();
        let bundle = g.bundle(a).unwrap();
        assert_eq!(bundle.degree, 3 + 2);
        assert_eq!(bundle.node_pole_order, 3);
    }

    #[test]
    fn isomorphism_ignores_names_and_order() {
        let mut g = DualGraphModel::new(2);
        let a = g.add_component("A", 1, 1);
        let b = g.add_component("B", 0, 1);
        let c = g.add_component("C", 2, 1);
        g.add_edge(None, a, b).unwrap();
        g.add_edge(None, b, c).unwrap();
        g.add_edge(None, b, c).unwrap();
        let mut h = DualGraphModel::new(2);
        let z = h.add_component("Z", 2, 1);
        let y = h.add_component("Y", 0, 1);
        let x = h.add_component("X", 1, 1);
        h.add_edge(None, y, z).unwrap();
        h.add_edge(None, z, y).unwrap();
        h.add_edge(None, x, y).unwrap();
        assert!(is_isomorphic(&g, &h));
        let mut k = h.clone();
        k.add_mark("P", x, 1).unwrap();
        assert!(!is_isomorphic(&g, &k));
    }
}
