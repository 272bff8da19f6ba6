//! Contractions, blowups, stable dual graphs and transport of measures between models.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{CcMeasure, Location, Mass, VertexMeasure};
use crate::model::{
    validate, ComponentClass, ComponentId, DualGraphModel, EdgeId, Essentiality, Event, ModelKey, Operation,
    PointId, SectionType, Q,
};

/// How a higher model maps onto a lower one, stored as the ordered list of elementary
/// collapses taking `source` to `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominationMap {
    pub source: ModelKey,
    pub target: ModelKey,
    pub events: Vec<Event>,
}

/// Where a stratum of the source model ends up in the target model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "fate", rename_all = "kebab-case")]
pub enum Fate {
    Kept,
    Collapsed { to: Location },
    Merged { into: EdgeId },
}

impl DominationMap {
    pub fn identity(model: &DualGraphModel) -> Self {
        DominationMap { source: model.key(), target: model.key(), events: Vec::new() }
    }

    /// `self` goes from A to B and `next` from B to C; the result goes from A to C.
    pub fn then(&self, next: &DominationMap) -> Result<DominationMap> {
        if self.target != next.source {
            return Err(Error::ModelMismatch { expected: self.target.0.clone(), found: next.source.0.clone() });
        }
        let mut events = self.events.clone();
        events.extend(next.events.iter().cloned());
        Ok(DominationMap { source: self.source.clone(), target: next.target.clone(), events })
    }

    pub fn component_fate(&self, c: ComponentId) -> Fate {
        let mut current: Option<Location> = None;
        for ev in &self.events {
            match (ev, &current) {
                (Event::CollapseLeaf { component, onto, point, .. }, None) if *component == c => {
                    current = Some(Location::Point { component: *onto, point: *point });
                }
                (Event::MergeEdge { parent, exceptional, split, .. }, None) if *exceptional == c => {
                    current = Some(Location::Edge { edge: *parent, position: *split });
                }
                (_, Some(loc)) => current = Some(transport_location(loc, ev)),
                _ => {}
            }
        }
        match current {
            None => Fate::Kept,
            Some(to) => Fate::Collapsed { to },
        }
    }

    pub fn edge_fate(&self, e: EdgeId) -> Fate {
        let mut edge = e;
        let mut merged = false;
        for ev in &self.events {
            match ev {
                Event::CollapseLeaf { edge: gone, onto, point, .. } if *gone == edge => {
                    let mut loc = Location::Point { component: *onto, point: *point };
                    let rest = self.events.iter().skip_while(|x| *x != ev).skip(1);
                    for later in rest {
                        loc = transport_location(&loc, later);
                    }
                    return Fate::Collapsed { to: loc };
                }
                Event::MergeEdge { parent, first, second, .. } if *first == edge || *second == edge => {
                    edge = *parent;
                    merged = true;
                }
                _ => {}
            }
        }
        if merged {
            Fate::Merged { into: edge }
        } else {
            Fate::Kept
        }
    }
}

/// Image of a location under one collapse event.
fn transport_location(loc: &Location, ev: &Event) -> Location {
    match (ev, loc) {
        (Event::CollapseLeaf { component, onto, point, .. }, Location::Point { component: c, .. }) if c == component => {
            Location::Point { component: *onto, point: *point }
        }
        (Event::CollapseLeaf { edge, onto, point, .. }, Location::Edge { edge: e, .. }) if e == edge => {
            Location::Point { component: *onto, point: *point }
        }
        (Event::MergeEdge { parent, exceptional, split, .. }, Location::Point { component, .. })
            if component == exceptional =>
        {
            Location::Edge { edge: *parent, position: *split }
        }
        (Event::MergeEdge { parent, first, .. }, Location::Edge { edge, position }) if edge == first => {
            Location::Edge { edge: *parent, position: *position }
        }
        (Event::MergeEdge { parent, second, split, .. }, Location::Edge { edge, position }) if edge == second => {
            Location::Edge { edge: *parent, position: *split + *position }
        }
        _ => loc.clone(),
    }
}

fn is_contractible_leaf(model: &DualGraphModel, c: ComponentId) -> bool {
    model.component(c).is_some_and(|x| x.genus == 0 && x.multiplicity == 1)
        && model.valency(c) == 1
        && model.mark_degree(c) < model.m()
}

/// Genus-0, valency-1 components of degree below m, in id order.
pub fn contractible_leaves(model: &DualGraphModel) -> Vec<ComponentId> {
    model.components().map(|c| c.id).filter(|&c| is_contractible_leaf(model, c)).collect()
}

fn collapse_in_place(model: &mut DualGraphModel, c: ComponentId) -> Event {
    let edge = model.incident_edges(c)[0];
    let onto = model.edge(edge).expect("edge").other(c);
    let point = model.fresh_point();
    let moving: Vec<_> = model.marks_on(c).iter().map(|k| k.id).collect();
    for k in moving {
        let mark = model.mark_mut(k);
        mark.host = onto;
        mark.point = point;
    }
    model.remove_edge(edge);
    model.remove_component(c);
    let event = Event::CollapseLeaf { component: c, edge, onto, point };
    model.record(Operation::Contraction, event.clone());
    event
}

/// Contracts one admissible leaf (genus 0, valency 1, multiplicity 1, mark degree < m).
pub fn contract_leaf(model: &DualGraphModel, c: ComponentId) -> Result<(DualGraphModel, DominationMap)> {
    model.require_component(c)?;
    if !is_contractible_leaf(model, c) {
        return Err(Error::Precondition(format!(
            "component {} is not a contractible genus-0 leaf",
            model.component_name(c)
        )));
    }
    let mut out = model.clone();
    let event = collapse_in_place(&mut out, c);
    let map = DominationMap { source: model.key(), target: out.key(), events: vec![event] };
    Ok((out, map))
}

/// Repeatedly contracts genus-0 leaves of mark degree below m, lowest id first.
pub fn minimal_snc_model(model: &DualGraphModel) -> Result<(DualGraphModel, DominationMap)> {
    if !model.is_semistable() {
        return Err(Error::Precondition("model is not semistable (some multiplicity exceeds 1)".into()));
    }
    validate(model).into_result()?;
    let mut out = model.clone();
    let mut events = Vec::new();
    while let Some(&c) = contractible_leaves(&out).first() {
        events.push(collapse_in_place(&mut out, c));
    }
    if out.component_count() == 1 {
        let only = out.components().next().expect("one component");
        if only.genus == 0 && out.mark_degree(only.id) < 2 * out.m() {
            return Err(Error::Precondition(format!(
                "contraction leaves a single rational component of mark degree {} < 2m",
                out.mark_degree(only.id)
            )));
        }
    }
    let map = DominationMap { source: model.key(), target: out.key(), events };
    Ok((out, map))
}

/// A model is minimal when it is semistable, valid and has no contractible leaf.
pub fn is_minimal(model: &DualGraphModel) -> bool {
    model.is_semistable() && !validate(model).has_errors() && contractible_leaves(model).is_empty()
}

pub(crate) fn require_minimal(model: &DualGraphModel) -> Result<()> {
    validate(model).into_result()?;
    if !model.is_semistable() {
        return Err(Error::Precondition(
            "model is not semistable; compute on the minimal model and use lift_measure".into(),
        ));
    }
    if let Some(&c) = contractible_leaves(model).first() {
        return Err(Error::Precondition(format!(
            "model is not minimal (component {} is a contractible leaf); compute on minimal_snc_model and use lift_measure",
            model.component_name(c)
        )));
    }
    Ok(())
}

pub fn classify(model: &DualGraphModel) -> Result<Vec<ComponentClass>> {
    validate(model).into_result()?;
    model
        .components()
        .map(|c| {
            let h0 = model.bundle(c.id)?.h0()?;
            Ok(ComponentClass {
                component: c.id,
                essentiality: if model.is_inessential(c.id) {
                    Essentiality::Inessential
                } else {
                    Essentiality::Essential
                },
                section_type: if h0 > 0 { SectionType::TypeI } else { SectionType::TypeII },
                h0,
            })
        })
        .collect()
}

/// Blows up a smooth point of `component`. With `center`, the marks at that point move to
/// the exceptional curve.
pub fn blowup_smooth_point(
    model: &DualGraphModel,
    component: ComponentId,
    center: Option<PointId>,
) -> Result<(DualGraphModel, DominationMap)> {
    let a = model.require_component(component)?.multiplicity;
    if let Some(p) = center {
        if !model.marks_on(component).iter().any(|k| k.point == p) {
            return Err(Error::Unknown { kind: "mark point", name: format!("#{} on {}", p.0, model.component_name(component)) });
        }
    }
    let mut out = model.clone();
    let name = out.fresh_name("X", out.next_component_index());
    let x = out.add_component(name, 0, a);
    let edge = out.add_edge(None, component, x)?;
    let point = match center {
        Some(p) => {
            let q = out.fresh_point();
            let moving: Vec<_> = out.marks_on(component).iter().filter(|k| k.point == p).map(|k| k.id).collect();
            for k in moving {
                let mark = out.mark_mut(k);
                mark.host = x;
                mark.point = q;
            }
            p
        }
        None => out.fresh_point(),
    };
    let event = Event::CollapseLeaf { component: x, edge, onto: component, point };
    out.record(Operation::BlowupSmoothPoint, event.clone());
    let map = DominationMap { source: out.key(), target: model.key(), events: vec![event] };
    Ok((out, map))
}

/// Blows up the node `edge`, inserting an exceptional curve of multiplicity a + b.
pub fn blowup_node(model: &DualGraphModel, edge: EdgeId) -> Result<(DualGraphModel, DominationMap)> {
    let parent = model.require_edge(edge)?.clone();
    let (ca, cb) = parent.ends;
    let a = model.require_component(ca)?.multiplicity as i64;
    let b = model.require_component(cb)?.multiplicity as i64;
    let parent_length = model.edge_length(edge)?;
    let mut out = model.clone();
    out.remove_edge(edge);
    let name = out.fresh_name("X", out.next_component_index());
    let x = out.add_component(name, 0, (a + b) as u32);
    let first_name = out.fresh_name("e", out.next_edge_index());
    let first = out.add_edge(Some(first_name), ca, x)?;
    let second_name = out.fresh_name("e", out.next_edge_index());
    let second = out.add_edge(Some(second_name), x, cb)?;
    let event = Event::MergeEdge {
        parent: edge,
        ends: (ca, cb),
        exceptional: x,
        first,
        second,
        split: Q::new(1, a * (a + b)),
        parent_length,
    };
    out.record(Operation::BlowupNode, event.clone());
    let map = DominationMap { source: out.key(), target: model.key(), events: vec![event] };
    Ok((out, map))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StableVertex {
    pub component: ComponentId,
    pub genus: u32,
    pub valency: u32,
    pub mark_degree: u32,
}

/// A maximal inessential chain, possibly closed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StableEdge {
    pub ends: (ComponentId, ComponentId),
    pub model_edges: Vec<EdgeId>,
    pub interior: Vec<ComponentId>,
    pub length: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StableDualGraph {
    pub vertices: Vec<StableVertex>,
    pub edges: Vec<StableEdge>,
}

impl StableDualGraph {
    /// A stable curve given abstractly: vertex genera and nodes as pairs of vertex indices
    /// (a pair with equal entries is a self-node). Vertex `i` gets component id `i`.
    pub fn from_nodes(genera: &[u32], nodes: &[(usize, usize)]) -> Result<Self> {
        let n = genera.len();
        if let Some(&(a, b)) = nodes.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(Error::InvalidInput(format!("node ({a}, {b}) refers to a missing vertex")));
        }
        let vertices = genera
            .iter()
            .enumerate()
            .map(|(i, &g)| StableVertex {
                component: ComponentId(i),
                genus: g,
                valency: nodes.iter().map(|&(a, b)| (a == i) as u32 + (b == i) as u32).sum(),
                mark_degree: 0,
            })
            .collect();
        let edges = nodes
            .iter()
            .map(|&(a, b)| StableEdge {
                ends: (ComponentId(a), ComponentId(b)),
                model_edges: Vec::new(),
                interior: Vec::new(),
                length: Q::from_integer(1),
            })
            .collect();
        Ok(StableDualGraph { vertices, edges })
    }

    pub fn total_length(&self) -> Q {
        self.edges.iter().fold(Q::zero(), |acc, e| acc + e.length)
    }

    pub fn genus(&self) -> i64 {
        let g: i64 = self.vertices.iter().map(|v| v.genus as i64).sum();
        g + self.edges.len() as i64 - self.vertices.len() as i64 + 1
    }
}

/// Forgets inessential vertices, merging each maximal inessential chain into one edge.
pub fn stable_dual_graph(model: &DualGraphModel) -> Result<StableDualGraph> {
    let essential: Vec<ComponentId> =
        model.components().map(|c| c.id).filter(|&c| !model.is_inessential(c)).collect();
    if essential.is_empty() {
        return Err(Error::Precondition("every component is inessential".into()));
    }
    let mut used: BTreeSet<EdgeId> = BTreeSet::new();
    let mut edges = Vec::new();
    for &v in &essential {
        for start in model.incident_edges(v) {
            if used.contains(&start) {
                continue;
            }
            let mut chain = vec![start];
            let mut interior = Vec::new();
            let mut length = model.edge_length(start)?;
            used.insert(start);
            let mut prev_edge = start;
            let mut at = model.edge(start).expect("edge").other(v);
            while model.is_inessential(at) {
                let next = model
                    .incident_edges(at)
                    .into_iter()
                    .find(|&e| e != prev_edge)
                    .ok_or_else(|| Error::Internal("inessential vertex without a second edge".into()))?;
                interior.push(at);
                chain.push(next);
                used.insert(next);
                length += model.edge_length(next)?;
                prev_edge = next;
                at = model.edge(next).expect("edge").other(at);
            }
            edges.push(StableEdge { ends: (v, at), model_edges: chain, interior, length });
        }
    }
    if used.len() != model.edge_count() {
        return Err(Error::Precondition("a cycle of inessential components is not attached to any essential one".into()));
    }
    let vertices = essential
        .iter()
        .map(|&c| StableVertex {
            component: c,
            genus: model.component(c).expect("component").genus,
            valency: model.valency(c),
            mark_degree: model.mark_degree(c),
        })
        .collect();
    Ok(StableDualGraph { vertices, edges })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricVertex {
    pub component: ComponentId,
    pub genus: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricEdge {
    pub edge: EdgeId,
    pub ends: (ComponentId, ComponentId),
    pub length: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricGraph {
    pub model: ModelKey,
    pub vertices: Vec<MetricVertex>,
    pub edges: Vec<MetricEdge>,
    pub essential_skeleton: bool,
}

pub fn metric_graph(model: &DualGraphModel) -> Result<MetricGraph> {
    Ok(MetricGraph {
        model: model.key(),
        vertices: model.components().map(|c| MetricVertex { component: c.id, genus: c.genus }).collect(),
        edges: model
            .edges()
            .map(|e| Ok(MetricEdge { edge: e.id, ends: e.ends, length: model.edge_length(e.id)? }))
            .collect::<Result<_>>()?,
        essential_skeleton: false,
    })
}

/// The dual graph of the minimal model, which is the essential skeleton.
pub fn essential_skeleton(model: &DualGraphModel) -> Result<(MetricGraph, DualGraphModel)> {
    let (minimal, _) = minimal_snc_model(model)?;
    let mut graph = metric_graph(&minimal)?;
    graph.essential_skeleton = true;
    Ok((graph, minimal))
}

fn check_source(measure: &CcMeasure, key: &ModelKey) -> Result<()> {
    if &measure.model != key {
        return Err(Error::ModelMismatch { expected: key.0.clone(), found: measure.model.0.clone() });
    }
    Ok(())
}

/// Pushes a measure on the map's source model down to its target.
pub fn pushforward_measure(measure: &CcMeasure, map: &DominationMap) -> Result<CcMeasure> {
    check_source(measure, &map.source)?;
    let mut out = measure.clone();
    for ev in &map.events {
        let atoms = std::mem::take(&mut out.atoms);
        for (loc, mass) in atoms {
            out.add_atom(transport_location(&loc, ev), mass);
        }
        match ev {
            Event::CollapseLeaf { component, edge, onto, point } => {
                let at = Location::Point { component: *onto, point: *point };
                if let Some(vm) = out.vertices.remove(component) {
                    out.add_atom(at.clone(), vm.mass());
                }
                if let Some(q) = out.edges.remove(edge) {
                    out.add_atom(at, Mass::Exact(q));
                }
            }
            Event::MergeEdge { parent, exceptional, first, second, split, .. } => {
                let a = out.edges.remove(first).unwrap_or_else(Q::zero);
                let b = out.edges.remove(second).unwrap_or_else(Q::zero);
                out.edges.insert(*parent, a + b);
                if let Some(vm) = out.vertices.remove(exceptional) {
                    out.add_atom(Location::Edge { edge: *parent, position: *split }, vm.mass());
                }
            }
        }
    }
    out.model = map.target.clone();
    Ok(out)
}

/// The unique measure on the map's source that pushes forward to `measure`.
pub fn lift_measure(measure: &CcMeasure, map: &DominationMap) -> Result<CcMeasure> {
    check_source(measure, &map.target)?;
    let mut out = measure.clone();
    for ev in map.events.iter().rev() {
        match ev {
            Event::CollapseLeaf { component, edge, onto, point } => {
                let at = Location::Point { component: *onto, point: *point };
                if let Some(mass) = out.atoms.get(&at) {
                    if !mass.is_zero() {
                        return Err(Error::LiftUndefined(format!("point #{} of component #{}", point.0, onto.0)));
                    }
                }
                out.vertices.insert(*component, VertexMeasure::Zero);
                out.edges.insert(*edge, Q::zero());
            }
            Event::MergeEdge { parent, exceptional, first, second, split, parent_length, .. } => {
                let total = out.edges.remove(parent).unwrap_or_else(Q::zero);
                let to_first = total * *split / *parent_length;
                out.edges.insert(*first, to_first);
                out.edges.insert(*second, total - to_first);
                out.vertices.insert(*exceptional, VertexMeasure::Zero);
                let atoms = std::mem::take(&mut out.atoms);
                for (loc, mass) in atoms {
                    let moved = match loc {
                        Location::Edge { edge, position } if edge == *parent => {
                            if position < *split {
                                Location::Edge { edge: *first, position }
                            } else if position > *split {
                                Location::Edge { edge: *second, position: position - *split }
                            } else {
                                return Err(Error::LiftUndefined(format!(
                                    "position {position} of edge #{}",
                                    parent.0
                                )));
                            }
                        }
                        other => other,
                    };
                    out.add_atom(moved, mass);
                }
            }
        }
    }
    out.model = map.source.clone();
    Ok(out)
}
