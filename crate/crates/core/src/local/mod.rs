//! Numerics on node charts {zw = t} and on the Riemann sphere.

pub mod chart;
pub mod experiments;
pub mod genus0;
pub mod laurent;
pub mod optimizer;
pub mod quadrature;

pub use chart::{neck_region, ns_density, pairing_matrix, pb_density, pseudonorm, ChartSystem, NsDensity, PairingMatrix};
pub use laurent::{ChartPoint, LaurentFamily, Side};
pub use optimizer::OptimizerSpec;
pub use quadrature::{integrate_halfannulus, QuadratureSpec};
