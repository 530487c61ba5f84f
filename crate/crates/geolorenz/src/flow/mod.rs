//! The 3D flow: vector field, integrator, and section events.

mod integrate;
mod lorenz;
mod section;

pub use integrate::{
    integrate, integrate_sampled, DenseSegment, Dopri5, IntegratorConfig, OdeSystem, Trajectory,
};
pub use lorenz::{lorenz_jacobian, lorenz_vector_field, LorenzParams, OriginSpectrum, State3};
pub use section::{next_section_crossing, section_events, CrossingDirection, SectionConfig, SectionEvent};
