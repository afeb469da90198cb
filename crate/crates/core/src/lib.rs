//! Numerical checks of the Green-function characterization of the round
//! sphere: discrete Green functions on closed surfaces, the pointwise
//! rigidity identities, the radial-graph ODE/PDE experiments, moving-plane
//! reflections and the Kelvin-transform curvature correspondence.

pub mod geometry;
pub mod greensolve;
pub mod radial;
pub mod rigidity;
pub mod kelvin;
