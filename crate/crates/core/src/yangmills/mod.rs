//! Volume-preserving reduction: the `EPAutVol` dual pair, Yang-Mills
//! chromomorphisms and the fluid equations on the torus.

pub mod observable;
pub mod state;
pub mod flow;
pub mod fluid;
pub mod reconstruct;

pub use observable::{point_omega, reduced_poisson, retract_point, rho, rho_inverse, trivialized_hvf, CanonicalPoint, Observable, ObservableTerm, Partials, PhasePoint, PointTangent, SigmaFactor};
pub use state::{chromo_generator, chromo_generators, d_jr_vol, omega_bar, jl_vol, jr_vol, vol_act_right, vol_generator_right, vol_right_generators, volume_deviation, VolState};
pub use flow::{base_point_residual, chromo_noether, cocycle_b, cocycle_identity_residual, path_integral, CocycleChart, FlowChain, HamiltonianFlow, NoetherReport, QuadratureOptions};
pub use fluid::{epautvol_rhs, TorusGrid, VolTendency};
pub use reconstruct::{reconstruct_vol, vol_level_set_residual};
