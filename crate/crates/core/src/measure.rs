//! Measures on metrized curve complexes, skeleta and central fibers.

use std::collections::BTreeMap;
use std::ops::Add;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::model::{BundleDescriptor, ComponentId, EdgeId, ModelKey, PointId, Q};

/// Total mass of a piece of a measure. `Unknown` is never treated as zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Mass {
    Exact(Q),
    Unknown,
    Estimate { value: f64, error: f64 },
}

impl Mass {
    pub fn zero() -> Self {
        Mass::Exact(Q::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Mass::Exact(q) if q.is_zero())
    }

    pub fn exact(&self) -> Option<Q> {
        match self {
            Mass::Exact(q) => Some(*q),
            _ => None,
        }
    }

    pub fn approx(&self) -> Option<f64> {
        match self {
            Mass::Exact(q) => q.to_f64(),
            Mass::Estimate { value, .. } => Some(*value),
            Mass::Unknown => None,
        }
    }
}

impl Add for Mass {
    type Output = Mass;

    fn add(self, rhs: Mass) -> Mass {
        match (self, rhs) {
            (Mass::Unknown, _) | (_, Mass::Unknown) => Mass::Unknown,
            (Mass::Exact(a), Mass::Exact(b)) => Mass::Exact(a + b),
            (Mass::Exact(a), Mass::Estimate { value, error })
            | (Mass::Estimate { value, error }, Mass::Exact(a)) => Mass::Estimate {
                value: value + a.to_f64().unwrap_or(f64::NAN),
                error,
            },
            (Mass::Estimate { value: v1, error: e1 }, Mass::Estimate { value: v2, error: e2 }) => {
                Mass::Estimate { value: v1 + v2, error: e1 + e2 }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Ns,
    Pb,
}

/// What a measure does on one component.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VertexMeasure {
    Ns { bundle: BundleDescriptor, mass: Mass },
    Pb { bundle: BundleDescriptor, mass: Q },
    Zero,
}

impl VertexMeasure {
    pub fn mass(&self) -> Mass {
        match self {
            VertexMeasure::Ns { mass, .. } => mass.clone(),
            VertexMeasure::Pb { mass, .. } => Mass::Exact(*mass),
            VertexMeasure::Zero => Mass::zero(),
        }
    }
}

/// A point of a metrized curve complex that can carry an atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "at", rename_all = "lowercase")]
pub enum Location {
    /// A point of a component.
    Point { component: ComponentId, point: PointId },
    /// A point of an edge, `position` measured from the edge's first end.
    Edge { edge: EdgeId, position: Q },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CcMeasure {
    pub kind: MeasureKind,
    pub model: ModelKey,
    pub vertices: BTreeMap<ComponentId, VertexMeasure>,
    pub edges: BTreeMap<EdgeId, Q>,
    pub atoms: BTreeMap<Location, Mass>,
}

impl CcMeasure {
    pub fn total_mass(&self) -> Mass {
        let v = self.vertices.values().fold(Mass::zero(), |acc, x| acc + x.mass());
        let e = self.edges.values().fold(Q::zero(), |acc, x| acc + x);
        let a = self.atoms.values().fold(Mass::zero(), |acc, x| acc + x.clone());
        v + Mass::Exact(e) + a
    }

    pub(crate) fn add_atom(&mut self, at: Location, mass: Mass) {
        if mass.is_zero() {
            return;
        }
        let entry = self.atoms.entry(at).or_insert_with(Mass::zero);
        *entry = entry.clone() + mass;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    /// All mass lies on the essential skeleton.
    EssentialSkeleton,
    /// The underlying model is not the minimal one; no skeleton claim is made.
    Unverified,
}

/// Vertex atoms plus Lebesgue mass on edges of a metric graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HybMeasure {
    pub kind: Option<MeasureKind>,
    pub model: ModelKey,
    pub vertices: BTreeMap<ComponentId, Mass>,
    pub edges: BTreeMap<EdgeId, Q>,
    pub edge_atoms: BTreeMap<(EdgeId, Q), Mass>,
    pub support: Support,
}

impl HybMeasure {
    pub fn total_mass(&self) -> Mass {
        let v = self.vertices.values().fold(Mass::zero(), |acc, x| acc + x.clone());
        let e = self.edges.values().fold(Q::zero(), |acc, x| acc + x);
        let a = self.edge_atoms.values().fold(Mass::zero(), |acc, x| acc + x.clone());
        v + Mass::Exact(e) + a
    }
}

/// A measure on the central fiber: component measures plus atoms at nodes and points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberMeasure {
    pub kind: MeasureKind,
    pub model: ModelKey,
    pub components: BTreeMap<ComponentId, VertexMeasure>,
    pub node_atoms: BTreeMap<EdgeId, Mass>,
    pub point_atoms: BTreeMap<Location, Mass>,
}

impl FiberMeasure {
    pub fn total_mass(&self) -> Mass {
        let v = self.components.values().fold(Mass::zero(), |acc, x| acc + x.mass());
        let n = self.node_atoms.values().fold(Mass::zero(), |acc, x| acc + x.clone());
        let a = self.point_atoms.values().fold(Mass::zero(), |acc, x| acc + x.clone());
        v + n + a
    }
}
