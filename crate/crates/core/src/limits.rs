//! Closed-form limit measures, dimension counts and the large-m limits.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::local::genus0::{ns_mass_genus0, Genus0Options};
use crate::measure::{CcMeasure, FiberMeasure, HybMeasure, Location, Mass, MeasureKind, Support, VertexMeasure};
use crate::model::{
    arithmetic_genus, total_mark_degree, BundleDescriptor, ComponentId, DualGraphModel, EdgeId, Q,
};
use crate::reduction::{is_minimal, minimal_snc_model, require_minimal, stable_dual_graph, StableDualGraph};

/// Dimension of the space of sections of a component bundle.
pub fn h0(bundle: &BundleDescriptor) -> Result<u64> {
    if bundle.m < 2 {
        return Err(Error::Precondition(format!("m = {} is below 2", bundle.m)));
    }
    let d = bundle.degree;
    match bundle.genus {
        0 => Ok((d + 1).max(0) as u64),
        1 => {
            if d == 0 {
                Err(Error::Precondition("excluded component shape: genus 1 with trivial bundle".into()))
            } else {
                Ok(d.max(0) as u64)
            }
        }
        g => Ok((d - g as i64 + 1).max(0) as u64),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionSummary {
    /// (2m−1)(g−1) + deg B.
    pub total: i64,
    /// Edges of the stable dual graph.
    pub stable_edges: usize,
    pub h0: BTreeMap<ComponentId, u64>,
}

pub fn dimension_summary(model: &DualGraphModel) -> Result<DimensionSummary> {
    require_minimal(model)?;
    let m = model.m() as i64;
    let g = arithmetic_genus(model)?;
    let total = (2 * m - 1) * (g - 1) + total_mark_degree(model) as i64;
    let stable_edges = stable_dual_graph(model)?.edges.len();
    let h0s = model
        .components()
        .map(|c| Ok((c.id, model.bundle(c.id)?.h0()?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let sum: u64 = h0s.values().sum();
    if total != stable_edges as i64 + sum as i64 {
        return Err(Error::Internal(format!(
            "dimension identity violated: {total} != {stable_edges} + {sum}"
        )));
    }
    Ok(DimensionSummary { total, stable_edges, h0: h0s })
}

/// Lebesgue mass of every model edge: its length over the length of its chain.
fn edge_masses(model: &DualGraphModel) -> Result<BTreeMap<EdgeId, Q>> {
    let graph = stable_dual_graph(model)?;
    let mut out = BTreeMap::new();
    for chain in &graph.edges {
        for &e in &chain.model_edges {
            out.insert(e, model.edge_length(e)? / chain.length);
        }
    }
    Ok(out)
}

/// Special points of a genus-0 component when there are exactly three, each with
/// coefficient below m: then the component is rigid and its NS mass is determined.
fn rigid_special_points(model: &DualGraphModel, c: ComponentId) -> Option<Vec<u32>> {
    let m = model.m();
    if model.component(c)?.genus != 0 {
        return None;
    }
    let mut coefficients: Vec<u32> = vec![m - 1; model.valency(c) as usize];
    for group in model.mark_groups(c).values() {
        coefficients.push(group.iter().map(|k| k.coefficient).sum());
    }
    (coefficients.len() == 3 && coefficients.iter().all(|&a| a < m)).then_some(coefficients)
}

/// Limit NS measure on the minimal model. Component masses are unknown unless
/// `estimate` is given, in which case rigid genus-0 components get a numeric estimate.
pub fn ns_limit_measure(model: &DualGraphModel, estimate: Option<&Genus0Options>) -> Result<CcMeasure> {
    require_minimal(model)?;
    let mut vertices = BTreeMap::new();
    for c in model.components() {
        let bundle = model.bundle(c.id)?;
        let vm = if bundle.h0()? == 0 {
            VertexMeasure::Zero
        } else {
            let mass = match (estimate, rigid_special_points(model, c.id)) {
                (Some(opts), Some(coefficients)) => {
                    let spots = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
                    let points: Vec<(Complex64, u32)> = spots.into_iter().zip(coefficients).collect();
                    let r = ns_mass_genus0(&points, model.m(), opts)?;
                    Mass::Estimate { value: r.mass, error: r.error }
                }
                _ => Mass::Unknown,
            };
            VertexMeasure::Ns { bundle, mass }
        };
        vertices.insert(c.id, vm);
    }
    Ok(CcMeasure {
        kind: MeasureKind::Ns,
        model: model.key(),
        vertices,
        edges: edge_masses(model)?,
        atoms: BTreeMap::new(),
    })
}

/// Limit pluri-Bergman measure on the minimal model.
pub fn pb_limit_measure(model: &DualGraphModel) -> Result<CcMeasure> {
    let summary = dimension_summary(model)?;
    let mut vertices = BTreeMap::new();
    for c in model.components() {
        let bundle = model.bundle(c.id)?;
        let h = summary.h0[&c.id];
        let vm = if h == 0 {
            VertexMeasure::Zero
        } else {
            VertexMeasure::Pb { bundle, mass: Q::from_integer(h as i64) }
        };
        vertices.insert(c.id, vm);
    }
    let measure = CcMeasure {
        kind: MeasureKind::Pb,
        model: model.key(),
        vertices,
        edges: edge_masses(model)?,
        atoms: BTreeMap::new(),
    };
    let expected = Mass::Exact(Q::from_integer(summary.total));
    if measure.total_mass() != expected {
        return Err(Error::Internal(format!(
            "pluri-Bergman total {:?} differs from {}",
            measure.total_mass(),
            summary.total
        )));
    }
    Ok(measure)
}

fn require_model(measure_key: &crate::model::ModelKey, model: &DualGraphModel) -> Result<()> {
    if measure_key != &model.key() {
        return Err(Error::ModelMismatch { expected: model.key().0, found: measure_key.0.clone() });
    }
    Ok(())
}

/// Retraction to the dual graph: component masses and their point atoms become vertex
/// atoms; edge masses and edge atoms stay on the edges.
pub fn pushforward_to_hyb(measure: &CcMeasure, model: &DualGraphModel) -> Result<HybMeasure> {
    require_model(&measure.model, model)?;
    let mut vertices: BTreeMap<ComponentId, Mass> =
        measure.vertices.iter().map(|(&c, vm)| (c, vm.mass())).collect();
    let mut edge_atoms: BTreeMap<(EdgeId, Q), Mass> = BTreeMap::new();
    for (loc, mass) in &measure.atoms {
        match loc {
            Location::Point { component, .. } => {
                let entry = vertices.entry(*component).or_insert_with(Mass::zero);
                *entry = entry.clone() + mass.clone();
            }
            Location::Edge { edge, position } => {
                let entry = edge_atoms.entry((*edge, *position)).or_insert_with(Mass::zero);
                *entry = entry.clone() + mass.clone();
            }
        }
    }
    Ok(HybMeasure {
        kind: Some(measure.kind),
        model: measure.model.clone(),
        vertices,
        edges: measure.edges.clone(),
        edge_atoms,
        support: if is_minimal(model) { Support::EssentialSkeleton } else { Support::Unverified },
    })
}

/// Collapse of every edge to its node.
pub fn pushforward_to_fiber(measure: &CcMeasure) -> FiberMeasure {
    let mut node_atoms: BTreeMap<EdgeId, Mass> =
        measure.edges.iter().map(|(&e, &q)| (e, Mass::Exact(q))).collect();
    let mut point_atoms = BTreeMap::new();
    for (loc, mass) in &measure.atoms {
        match loc {
            Location::Edge { edge, .. } => {
                let entry = node_atoms.entry(*edge).or_insert_with(Mass::zero);
                *entry = entry.clone() + mass.clone();
            }
            Location::Point { .. } => {
                point_atoms.insert(loc.clone(), mass.clone());
            }
        }
    }
    FiberMeasure {
        kind: measure.kind,
        model: measure.model.clone(),
        components: measure.vertices.clone(),
        node_atoms,
        point_atoms,
    }
}

/// Large-m limit with B fixed: atoms 2g(v)−2+val(v) on the minimal semistable model of X.
pub fn mu_infinity_fixed_b(model: &DualGraphModel) -> Result<HybMeasure> {
    let g = arithmetic_genus(model)?;
    if g < 2 {
        return Err(Error::Precondition(format!("arithmetic genus {g} is below 2")));
    }
    let mut stripped = model.clone();
    let marks: Vec<_> = stripped.marks().map(|k| k.id).collect();
    for k in marks {
        stripped.remove_mark(k);
    }
    let (reduced, _) = minimal_snc_model(&stripped)?;
    let vertices: BTreeMap<ComponentId, Mass> = reduced
        .components()
        .map(|c| {
            let atom = 2 * c.genus as i64 - 2 + reduced.valency(c.id) as i64;
            (c.id, Mass::Exact(Q::from_integer(atom)))
        })
        .collect();
    let out = HybMeasure {
        kind: None,
        model: reduced.key(),
        vertices,
        edges: BTreeMap::new(),
        edge_atoms: BTreeMap::new(),
        support: Support::EssentialSkeleton,
    };
    if out.total_mass() != Mass::Exact(Q::from_integer(2 * g - 2)) {
        return Err(Error::Internal(format!("large-m total {:?} differs from {}", out.total_mass(), 2 * g - 2)));
    }
    Ok(out)
}

/// Large-m limit with B/m fixed: atoms 2g(v)−2+val(v)+deg(B̄|_v)/m.
pub fn mu_infinity_fixed_qb(model: &DualGraphModel) -> Result<HybMeasure> {
    require_minimal(model)?;
    let m = model.m() as i64;
    let g = arithmetic_genus(model)?;
    let volume = Q::from_integer(2 * g - 2) + Q::new(total_mark_degree(model) as i64, m);
    if volume <= Q::zero() {
        return Err(Error::Precondition(format!("normalized volume {volume} is not positive")));
    }
    let vertices: BTreeMap<ComponentId, Mass> = model
        .components()
        .map(|c| {
            let atom = Q::from_integer(2 * c.genus as i64 - 2 + model.valency(c.id) as i64)
                + Q::new(model.mark_degree(c.id) as i64, m);
            (c.id, Mass::Exact(atom))
        })
        .collect();
    let out = HybMeasure {
        kind: None,
        model: model.key(),
        vertices,
        edges: BTreeMap::new(),
        edge_atoms: BTreeMap::new(),
        support: Support::EssentialSkeleton,
    };
    if out.total_mass() != Mass::Exact(volume) {
        return Err(Error::Internal(format!("large-m total {:?} differs from {volume}", out.total_mass())));
    }
    Ok(out)
}

/// NS measure of a stable curve: a unit atom at each node and the NS measure of each
/// component's bundle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableCurveMeasure {
    pub m: u32,
    pub components: BTreeMap<ComponentId, VertexMeasure>,
    /// One entry per stable edge, in the order of the graph's edge list.
    pub node_atoms: Vec<Q>,
}

pub fn stable_curve_ns_measure(graph: &StableDualGraph, m: u32) -> Result<StableCurveMeasure> {
    if m < 2 {
        return Err(Error::Precondition(format!("m below 2 (m = {m})")));
    }
    if graph.vertices.is_empty() {
        return Err(Error::Precondition("stable graph has no vertices".into()));
    }
    let mut components = BTreeMap::new();
    for v in &graph.vertices {
        if v.mark_degree != 0 {
            return Err(Error::Precondition(format!("vertex #{} carries marks", v.component.0)));
        }
        if 2 * v.genus as i64 - 2 + v.valency as i64 <= 0 {
            return Err(Error::Precondition(format!(
                "graph is not stable at vertex #{} (genus {}, valency {})",
                v.component.0, v.genus, v.valency
            )));
        }
        let bundle = BundleDescriptor::new(v.component, m, v.genus, v.valency, Vec::new());
        let vm = if bundle.h0()? == 0 {
            VertexMeasure::Zero
        } else {
            VertexMeasure::Ns { bundle, mass: Mass::Unknown }
        };
        components.insert(v.component, vm);
    }
    Ok(StableCurveMeasure { m, components, node_atoms: vec![Q::from_integer(1); graph.edges.len()] })
}

/// Sums the node atoms of a fiber measure over each chain of a stable graph.
pub fn chain_masses(fiber: &FiberMeasure, graph: &StableDualGraph) -> Vec<Mass> {
    graph
        .edges
        .iter()
        .map(|c| {
            c.model_edges
                .iter()
                .fold(Mass::zero(), |acc, e| acc + fiber.node_atoms.get(e).cloned().unwrap_or_else(Mass::zero))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DualGraphModel;

    fn bundle(m: u32, genus: u32, valency: u32, marks: Vec<u32>) -> BundleDescriptor {
        BundleDescriptor::new(ComponentId(0), m, genus, valency, marks)
    }

    #[test]
    fn h0_examples() {
        assert_eq!(bundle(3, 0, 2, vec![]).degree, -2);
        assert_eq!(h0(&bundle(3, 0, 2, vec![])).unwrap(), 0);
        assert_eq!(h0(&bundle(2, 1, 1, vec![])).unwrap(), 1);
        assert_eq!(h0(&bundle(2, 2, 0, vec![])).unwrap(), 3);
        assert_eq!(h0(&bundle(2, 0, 3, vec![])).unwrap(), 0);
        assert!(h0(&bundle(2, 1, 0, vec![])).is_err());
    }

    fn dumbbell() -> DualGraphModel {
        let mut g = DualGraphModel::new(2);
        let a = g.add_component("E1", 1, 1);
        let b = g.add_component("E2", 1, 1);
        g.add_edge(None, a, b).unwrap();
        g
    }

    fn elliptic_chain() -> DualGraphModel {
        let mut g = DualGraphModel::new(2);
        let a = g.add_component("E1", 1, 1);
        let f = g.add_component("F", 0, 1);
        let b = g.add_component("E2", 1, 1);
        g.add_edge(None, a, f).unwrap();
        g.add_edge(None, f, b).unwrap();
        g
    }

    #[test]
    fn dimension_examples() {
        let s = dimension_summary(&dumbbell()).unwrap();
        assert_eq!((s.total, s.stable_edges), (3, 1));
        assert_eq!(s.h0.values().copied().collect::<Vec<_>>(), vec![1, 1]);

        let s = dimension_summary(&elliptic_chain()).unwrap();
        assert_eq!((s.total, s.stable_edges), (3, 1));
        assert_eq!(s.h0.values().copied().collect::<Vec<_>>(), vec![1, 0, 1]);

        let mut single = DualGraphModel::new(3);
        single.add_component("E", 2, 1);
        let s = dimension_summary(&single).unwrap();
        assert_eq!((s.total, s.stable_edges), (5, 0));
        assert_eq!(s.h0.values().copied().collect::<Vec<_>>(), vec![5]);
    }

    #[test]
    fn ns_measure_examples() {
        let mu = ns_limit_measure(&elliptic_chain(), None).unwrap();
        assert!(mu.edges.values().all(|&q| q == Q::new(1, 2)));
        assert_eq!(mu.vertices[&ComponentId(1)], VertexMeasure::Zero);
        assert_eq!(mu.vertices[&ComponentId(0)].mass(), Mass::Unknown);
        let mu = ns_limit_measure(&dumbbell(), None).unwrap();
        assert_eq!(mu.edges.values().copied().collect::<Vec<_>>(), vec![Q::from_integer(1)]);
    }

    #[test]
    fn ns_measure_rejects_non_minimal() {
        let mut g = dumbbell();
        let a = ComponentId(0);
        let leaf = g.add_component("L", 0, 1);
        g.add_edge(None, a, leaf).unwrap();
        assert!(matches!(ns_limit_measure(&g, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn pb_measure_examples() {
        let mu = pb_limit_measure(&dumbbell()).unwrap();
        assert_eq!(mu.total_mass(), Mass::Exact(Q::from_integer(3)));
        assert_eq!(mu.vertices[&ComponentId(0)].mass(), Mass::Exact(Q::from_integer(1)));

        let mu = pb_limit_measure(&elliptic_chain()).unwrap();
        let masses: Vec<_> = mu.vertices.values().map(|v| v.mass()).collect();
        assert_eq!(
            masses,
            vec![Mass::Exact(Q::from_integer(1)), Mass::zero(), Mass::Exact(Q::from_integer(1))]
        );
        assert_eq!(mu.total_mass(), Mass::Exact(Q::from_integer(3)));

        let mut single = DualGraphModel::new(2);
        single.add_component("E", 2, 1);
        let mu = pb_limit_measure(&single).unwrap();
        assert_eq!(mu.total_mass(), Mass::Exact(Q::from_integer(3)));
        assert!(mu.edges.is_empty());
    }

    #[test]
    fn hyb_and_fiber_pushforwards() {
        let g = dumbbell();
        let hyb = pushforward_to_hyb(&pb_limit_measure(&g).unwrap(), &g).unwrap();
        assert_eq!(hyb.support, Support::EssentialSkeleton);
        assert!(hyb.vertices.values().all(|m| *m == Mass::Exact(Q::from_integer(1))));
        let ns = pushforward_to_hyb(&ns_limit_measure(&elliptic_chain(), None).unwrap(), &elliptic_chain()).unwrap();
        assert_eq!(ns.vertices[&ComponentId(0)], Mass::Unknown);
        assert_eq!(ns.vertices[&ComponentId(1)], Mass::zero());

        let chain = elliptic_chain();
        let pb = pb_limit_measure(&chain).unwrap();
        let fiber = pushforward_to_fiber(&pb);
        assert!(fiber.node_atoms.values().all(|m| *m == Mass::Exact(Q::new(1, 2))));
        assert_eq!(fiber.total_mass(), pb.total_mass());
        assert_eq!(fiber.components[&ComponentId(1)], VertexMeasure::Zero);
    }

    #[test]
    fn fixed_b_limit_examples() {
        let hyb = mu_infinity_fixed_b(&dumbbell()).unwrap();
        assert_eq!(hyb.vertices.values().cloned().collect::<Vec<_>>(), vec![Mass::Exact(Q::from_integer(1)); 2]);
        let mut single = DualGraphModel::new(2);
        single.add_component("E", 3, 1);
        let hyb = mu_infinity_fixed_b(&single).unwrap();
        assert_eq!(hyb.total_mass(), Mass::Exact(Q::from_integer(4)));

        // genus-2 vertex, chain through an inessential vertex to a genus-0 vertex closed by a
        // double edge to a genus-1 vertex: g = (2 + 0 + 0 + 1) + (4 − 4 + 1) = 4.
        let mut g = DualGraphModel::new(2);
        let a = g.add_component("A", 2, 1);
        let f = g.add_component("F", 0, 1);
        let c = g.add_component("C", 0, 1);
        let e = g.add_component("E", 1, 1);
        g.add_edge(None, a, f).unwrap();
        g.add_edge(None, f, c).unwrap();
        g.add_edge(None, c, e).unwrap();
        g.add_edge(None, c, e).unwrap();
        let hyb = mu_infinity_fixed_b(&g).unwrap();
        assert_eq!(hyb.vertices[&a], Mass::Exact(Q::from_integer(3)));
        assert_eq!(hyb.vertices[&f], Mass::zero());
        assert_eq!(hyb.vertices[&c], Mass::Exact(Q::from_integer(1)));
        assert_eq!(hyb.total_mass(), Mass::Exact(Q::from_integer(6)));
    }

    #[test]
    fn fixed_b_limit_needs_genus_two() {
        let mut g = DualGraphModel::new(2);
        let a = g.add_component("E", 1, 1);
        g.add_mark("P", a, 1).unwrap();
        assert!(matches!(mu_infinity_fixed_b(&g), Err(Error::Precondition(_))));
    }

    #[test]
    fn fixed_qb_limit_examples() {
        let mut g = DualGraphModel::new(4);
        let a = g.add_component("A", 2, 1);
        let e = g.add_component("E", 1, 1);
        let leaf = g.add_component("L", 0, 1);
        let f = g.add_component("F", 0, 1);
        g.add_edge(None, a, e).unwrap();
        g.add_edge(None, a, f).unwrap();
        g.add_edge(None, f, leaf).unwrap();
        g.add_mark("P", e, 2).unwrap();
        g.add_mark("Q", leaf, 3).unwrap();
        g.add_mark("R", leaf, 1).unwrap();
        let hyb = mu_infinity_fixed_qb(&g).unwrap();
        assert_eq!(hyb.vertices[&e], Mass::Exact(Q::new(3, 2)));
        assert_eq!(hyb.vertices[&leaf], Mass::zero());
        assert_eq!(hyb.vertices[&f], Mass::zero());
        assert_eq!(hyb.total_mass(), Mass::Exact(Q::from_integer(4) + Q::new(6, 4)));
    }

    #[test]
    fn stable_curve_examples() {
        let dumbbell = StableDualGraph::from_nodes(&[1, 1], &[(0, 1)]).unwrap();
        let mu = stable_curve_ns_measure(&dumbbell, 2).unwrap();
        assert_eq!(mu.node_atoms, vec![Q::from_integer(1)]);
        let nodal = StableDualGraph::from_nodes(&[1], &[(0, 0)]).unwrap();
        assert_eq!(nodal.genus(), 2);
        let mu = stable_curve_ns_measure(&nodal, 3).unwrap();
        assert_eq!(mu.node_atoms, vec![Q::from_integer(1)]);
        let unstable = StableDualGraph::from_nodes(&[0, 2], &[(0, 1)]).unwrap();
        assert!(stable_curve_ns_measure(&unstable, 2).is_err());
    }

    #[test]
    fn chains_collapse_to_unit_atoms() {
        let chain = elliptic_chain();
        let graph = stable_dual_graph(&chain).unwrap();
        let fiber = pushforward_to_fiber(&ns_limit_measure(&chain, None).unwrap());
        assert_eq!(chain_masses(&fiber, &graph), vec![Mass::Exact(Q::from_integer(1))]);
        let direct = stable_curve_ns_measure(&graph, 2).unwrap();
        assert_eq!(direct.node_atoms, vec![Q::from_integer(1)]);
    }
}
