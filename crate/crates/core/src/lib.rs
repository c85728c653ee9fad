//! Numerics for the spatial isosceles three-body problem at fixed negative
//! energy: energy-surface geometry, the Euler orbit and its stability, brake
//! orbits, return maps on the disk bounded by the Euler orbit, the large
//! mass-ratio limit and the convexity threshold.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::too_many_arguments,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

pub mod brake;
pub mod convexity;
pub mod dynamics;
pub mod error;
pub mod euler;
pub mod limitsys;
pub mod ode;
pub mod paramspace;
pub mod roots;
pub mod section;
pub mod sp2index;
pub mod verify;

pub use brake::BrakeOrbit;
pub use dynamics::{Model, State};
pub use error::{Error, Result};
pub use euler::StabilityClass;
pub use paramspace::{PhysicalParams, ReducedParams};
pub use section::{OrbitRecord, OrbitType, SectionPoint};
pub use sp2index::Mat2;
