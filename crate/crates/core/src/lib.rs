//! Pseudo-spectral simulation and parabolic-cylinder diagnostics for the
//! generalized surface growth equation
//!
//! ```text
//! h_t + h_xxxx + d_xx |h_x|^alpha = f        on the periodic torus
//! ```
//!
//! together with a small 3D modified Navier-Stokes companion. The crate is
//! `no_std` and only needs `alloc`; file formats, configuration and the
//! command line live in `sgmlab`.

#![no_std]

extern crate alloc;

pub mod cylinder;
pub mod dimension;
mod error;
pub mod fft;
pub mod inequality;
pub mod mns;
pub mod quad;
pub mod rng;
pub mod sgm;
pub mod spectral;
pub mod testfn;

pub use error::{Error, Result};
pub use spectral::{GridSpec1D, PadFactor, SobolevIndex, SpectralField1D, SpectralWorkspace};
