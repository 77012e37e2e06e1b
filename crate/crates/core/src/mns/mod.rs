//! Toy-resolution pseudo-spectral solver for the 3D modified Navier-Stokes
//! system `u_t - Delta u + u . grad u_i^{alpha-1} + grad Pi = 0`, `div u = 0`.
//!
//! For non-integer `alpha` the power is the signed one,
//! `sign(v) |v|^{alpha-1}`. It keeps `u_i d_j s(u_i)` an exact derivative, so
//! the cancellation in the energy balance survives.

mod field;
mod quantities;
mod serrin;
mod solver;

pub use field::{
    analyze3, check_side, padded_side, sample3, wavevector, Fft3, PressureField3D, VelocityField3D,
    BOX_LENGTH,
};
pub use quantities::{
    mns_quantities, mns_quantity, mns_scaling_transform, MnsCylinder, MnsQuantityId,
    MnsQuantityReport, MNS_OVERSAMPLE,
};
pub use serrin::{check_ladder, lq_norm, serrin_monitor, serrin_p_for, SerrinReport};
pub use solver::{
    cfl_number, mns_cancellation, mns_nonlinearity, mns_run, pressure, pressure_from_nonlinearity,
    MnsConfig, MnsHistory, MnsInitial, MnsRunError, MnsTrace, MnsWorkspace, MNS_SIDES,
};
