//! JSON and DOT renderings. Items are keyed by name, rationals are `{num, den}` and
//! unknown masses are the string `"unknown"`.

use std::fmt::Write;

use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::limits::{DimensionSummary, StableCurveMeasure};
use crate::measure::{CcMeasure, FiberMeasure, HybMeasure, Location, Mass, MeasureKind, Support, VertexMeasure};
use crate::model::{
    BundleDescriptor, ComponentClass, ComponentId, DualGraphModel, EdgeId, Event, ValidationReport, Q,
};
use crate::reduction::{DominationMap, MetricGraph, StableDualGraph};

/// Looks names up in a list of models, falling back to `#id`.
pub struct Names<'a>(pub Vec<&'a DualGraphModel>);

impl Names<'_> {
    pub fn component(&self, c: ComponentId) -> String {
        self.0
            .iter()
            .find_map(|m| m.component(c).map(|x| x.name.clone()))
            .unwrap_or_else(|| format!("#{}", c.0))
    }

    pub fn edge(&self, e: EdgeId) -> String {
        self.0
            .iter()
            .find_map(|m| m.edge(e).map(|x| x.name.clone()))
            .unwrap_or_else(|| format!("#{}", e.0))
    }
}

pub fn rational(q: Q) -> Value {
    json!({ "num": *q.numer(), "den": *q.denom() })
}

pub fn mass(m: &Mass) -> Value {
    match m {
        Mass::Exact(q) => rational(*q),
        Mass::Unknown => Value::from("unknown"),
        Mass::Estimate { value, error } => json!({ "estimate": value, "error": error }),
    }
}

fn kind(k: MeasureKind) -> &'static str {
    match k {
        MeasureKind::Ns => "ns",
        MeasureKind::Pb => "pb",
    }
}

fn support(s: Support) -> &'static str {
    match s {
        Support::EssentialSkeleton => "essential-skeleton",
        Support::Unverified => "unverified",
    }
}

/// Serializes with sorted keys and a trailing newline.
pub fn to_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn bundle(b: &BundleDescriptor) -> Value {
    json!({
        "m": b.m,
        "genus": b.genus,
        "valency": b.valency,
        "node_pole_order": b.node_pole_order,
        "mark_coefficients": b.mark_coefficients,
        "degree": b.degree,
        "h0": b.h0().ok(),
    })
}

pub fn model(model: &DualGraphModel) -> Value {
    let vertices: Vec<Value> = model
        .components()
        .map(|c| {
            json!({
                "name": c.name,
                "genus": c.genus,
                "mult": c.multiplicity,
                "valency": model.valency(c.id),
                "mark_degree": model.mark_degree(c.id),
            })
        })
        .collect();
    let edges: Vec<Value> = model
        .edges()
        .map(|e| {
            json!({
                "name": e.name,
                "ends": [model.component_name(e.ends.0), model.component_name(e.ends.1)],
                "length": model.edge_length(e.id).ok().map(rational),
            })
        })
        .collect();
    let marks: Vec<Value> = model
        .marks()
        .map(|k| json!({ "name": k.name, "on": model.component_name(k.host), "coeff": k.coefficient, "point": k.point.0 }))
        .collect();
    json!({ "m": model.m(), "vertices": vertices, "edges": edges, "marks": marks })
}

pub fn validation(report: &ValidationReport) -> Value {
    json!({
        "status": if report.has_errors() { "invalid" } else { "ok" },
        "diagnostics": report.diagnostics,
    })
}

/// A failure rendered as a document, so every command writes JSON.
pub fn error(err: &Error) -> Value {
    let (kind, diagnostics) = match err {
        Error::Validation(r) => ("validation", serde_json::to_value(&r.diagnostics).expect("serializable")),
        Error::Parse(p) => ("parse", serde_json::to_value(&p.0).expect("serializable")),
        Error::Precondition(_) => ("precondition", Value::Array(vec![])),
        Error::Unknown { .. } => ("unknown-item", Value::Array(vec![])),
        Error::ModelMismatch { .. } => ("model-mismatch", Value::Array(vec![])),
        Error::LiftUndefined(_) => ("lift-undefined", Value::Array(vec![])),
        Error::InvalidInput(_) => ("invalid-input", Value::Array(vec![])),
        Error::Internal(_) => ("internal", Value::Array(vec![])),
        Error::NonConvergence(n) => ("non-convergence", json!([n])),
    };
    json!({
        "status": "error",
        "kind": kind,
        "exit_code": err.exit_code(),
        "message": err.to_string(),
        "diagnostics": diagnostics,
    })
}

pub fn event(e: &Event, names: &Names) -> Value {
    match e {
        Event::CollapseLeaf { component, edge, onto, point } => json!({
            "event": "collapse-leaf",
            "component": names.component(*component),
            "edge": names.edge(*edge),
            "onto": names.component(*onto),
            "point": point.0,
        }),
        Event::MergeEdge { parent, ends, exceptional, first, second, split, parent_length } => json!({
            "event": "merge-edge",
            "parent": names.edge(*parent),
            "ends": [names.component(ends.0), names.component(ends.1)],
            "exceptional": names.component(*exceptional),
            "first": names.edge(*first),
            "second": names.edge(*second),
            "split": rational(*split),
            "parent_length": rational(*parent_length),
        }),
    }
}

pub fn domination(map: &DominationMap, names: &Names) -> Value {
    json!({
        "source": map.source.0,
        "target": map.target.0,
        "events": map.events.iter().map(|e| event(e, names)).collect::<Vec<_>>(),
    })
}

pub fn classes(classes: &[ComponentClass], model: &DualGraphModel) -> Value {
    let mut out = Map::new();
    for c in classes {
        out.insert(
            model.component_name(c.component),
            json!({
                "essentiality": c.essentiality,
                "section_type": c.section_type,
                "h0": c.h0,
            }),
        );
    }
    Value::Object(out)
}

pub fn stable_graph(graph: &StableDualGraph, names: &Names) -> Value {
    json!({
        "genus": graph.genus(),
        "total_length": rational(graph.total_length()),
        "vertices": graph.vertices.iter().map(|v| json!({
            "name": names.component(v.component),
            "genus": v.genus,
            "valency": v.valency,
            "mark_degree": v.mark_degree,
        })).collect::<Vec<_>>(),
        "edges": graph.edges.iter().map(|e| json!({
            "ends": [names.component(e.ends.0), names.component(e.ends.1)],
            "model_edges": e.model_edges.iter().map(|&x| names.edge(x)).collect::<Vec<_>>(),
            "interior": e.interior.iter().map(|&x| names.component(x)).collect::<Vec<_>>(),
            "length": rational(e.length),
        })).collect::<Vec<_>>(),
    })
}

pub fn metric_graph(graph: &MetricGraph, names: &Names) -> Value {
    json!({
        "model": graph.model.0,
        "essential_skeleton": graph.essential_skeleton,
        "vertices": graph.vertices.iter().map(|v| json!({
            "name": names.component(v.component),
            "genus": v.genus,
        })).collect::<Vec<_>>(),
        "edges": graph.edges.iter().map(|e| json!({
            "name": names.edge(e.edge),
            "ends": [names.component(e.ends.0), names.component(e.ends.1)],
            "length": rational(e.length),
        })).collect::<Vec<_>>(),
    })
}

fn vertex_measure(v: &VertexMeasure) -> Value {
    match v {
        VertexMeasure::Ns { bundle: b, mass: m } => json!({ "kind": "ns", "bundle": bundle(b), "mass": mass(m) }),
        VertexMeasure::Pb { bundle: b, mass: m } => json!({ "kind": "pb", "bundle": bundle(b), "mass": rational(*m) }),
        VertexMeasure::Zero => json!({ "kind": "zero", "mass": rational(Q::from_integer(0)) }),
    }
}

fn location(l: &Location, names: &Names) -> Value {
    match l {
        Location::Point { component, point } => json!({ "component": names.component(*component), "point": point.0 }),
        Location::Edge { edge, position } => json!({ "edge": names.edge(*edge), "position": rational(*position) }),
    }
}

pub fn cc_measure(m: &CcMeasure, names: &Names) -> Value {
    let mut vertices = Map::new();
    for (c, v) in &m.vertices {
        vertices.insert(names.component(*c), vertex_measure(v));
    }
    let mut edges = Map::new();
    for (e, q) in &m.edges {
        edges.insert(names.edge(*e), rational(*q));
    }
    let atoms: Vec<Value> = m
        .atoms
        .iter()
        .map(|(l, x)| json!({ "at": location(l, names), "mass": mass(x) }))
        .collect();
    json!({
        "space": "curve-complex",
        "kind": kind(m.kind),
        "model": m.model.0,
        "vertices": vertices,
        "edges": edges,
        "atoms": atoms,
        "total": mass(&m.total_mass()),
    })
}

pub fn hyb_measure(m: &HybMeasure, names: &Names) -> Value {
    let mut vertices = Map::new();
    for (c, x) in &m.vertices {
        vertices.insert(names.component(*c), mass(x));
    }
    let mut edges = Map::new();
    for (e, q) in &m.edges {
        edges.insert(names.edge(*e), rational(*q));
    }
    let atoms: Vec<Value> = m
        .edge_atoms
        .iter()
        .map(|((e, p), x)| json!({ "edge": names.edge(*e), "position": rational(*p), "mass": mass(x) }))
        .collect();
    json!({
        "space": "metric-graph",
        "kind": m.kind.map(kind),
        "model": m.model.0,
        "vertices": vertices,
        "edges": edges,
        "edge_atoms": atoms,
        "support": support(m.support),
        "total": mass(&m.total_mass()),
    })
}

pub fn fiber_measure(m: &FiberMeasure, names: &Names) -> Value {
    let mut components = Map::new();
    for (c, v) in &m.components {
        components.insert(names.component(*c), vertex_measure(v));
    }
    let mut nodes = Map::new();
    for (e, x) in &m.node_atoms {
        nodes.insert(names.edge(*e), mass(x));
    }
    let points: Vec<Value> = m
        .point_atoms
        .iter()
        .map(|(l, x)| json!({ "at": location(l, names), "mass": mass(x) }))
        .collect();
    json!({
        "space": "central-fiber",
        "kind": kind(m.kind),
        "model": m.model.0,
        "components": components,
        "node_atoms": nodes,
        "point_atoms": points,
        "total": mass(&m.total_mass()),
    })
}

pub fn stable_curve_measure(m: &StableCurveMeasure, graph: &StableDualGraph, names: &Names) -> Value {
    let mut components = Map::new();
    for (c, v) in &m.components {
        components.insert(names.component(*c), vertex_measure(v));
    }
    let nodes: Vec<Value> = graph
        .edges
        .iter()
        .zip(&m.node_atoms)
        .map(|(e, q)| {
            json!({
                "ends": [names.component(e.ends.0), names.component(e.ends.1)],
                "model_edges": e.model_edges.iter().map(|&x| names.edge(x)).collect::<Vec<_>>(),
                "mass": rational(*q),
            })
        })
        .collect();
    json!({ "m": m.m, "components": components, "node_atoms": nodes })
}

pub fn dimensions(d: &DimensionSummary, model: &DualGraphModel) -> Value {
    let mut h0 = Map::new();
    for (c, h) in &d.h0 {
        h0.insert(model.component_name(*c), Value::from(*h));
    }
    json!({
        "total": d.total,
        "stable_edges": d.stable_edges,
        "h0": h0,
        "h0_sum": d.h0.values().sum::<u64>(),
    })
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering of a model; with a measure, edges and vertices also show masses.
pub fn dot(model: &DualGraphModel, measure: Option<&CcMeasure>) -> String {
    let mut out = String::from("graph model {\n  node [shape=circle];\n");
    for c in model.components() {
        let h0 = model
            .bundle(c.id)
            .ok()
            .and_then(|b| b.h0().ok())
            .map_or_else(|| "?".to_string(), |h| h.to_string());
        let mut label = format!("{}\\ng={}, val={}, h⁰={}", c.name, c.genus, model.valency(c.id), h0);
        if c.multiplicity != 1 {
            let _ = write!(label, ", mult={}", c.multiplicity);
        }
        if let Some(v) = measure.and_then(|m| m.vertices.get(&c.id)) {
            let _ = write!(label, "\\nmass={}", mass_label(&v.mass()));
        }
        let style = if model.is_inessential(c.id) { ", style=dashed" } else { "" };
        let _ = writeln!(out, "  \"{}\" [label=\"{}\"{}];", escape(&c.name), escape_label(&label), style);
    }
    for e in model.edges() {
        let len = model.edge_length(e.id).map_or_else(|_| "?".to_string(), |q| q.to_string());
        let mut label = format!("len={len}");
        if let Some(q) = measure.and_then(|m| m.edges.get(&e.id)) {
            let _ = write!(label, ", mass={q}");
        }
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [label=\"{}\"];",
            escape(&model.component_name(e.ends.0)),
            escape(&model.component_name(e.ends.1)),
            label
        );
    }
    out.push_str("}\n");
    out
}

fn escape_label(s: &str) -> String {
    s.replace('"', "\\\"")
}

fn mass_label(m: &Mass) -> String {
    match m {
        Mass::Exact(q) => q.to_string(),
        Mass::Unknown => "unknown".into(),
        Mass::Estimate { value, error } => format!("{value:.4}±{error:.1e}"),
    }
}
