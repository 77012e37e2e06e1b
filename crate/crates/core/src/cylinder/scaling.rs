//! The scaling symmetry `h -> lambda^{(alpha-2)/(1-alpha)} h(lambda x, lambda^4 t)`.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{config_err, Result};
use crate::sgm::{EnergyTrace, SpaceTimeHistory};
use crate::spectral::{index_of_mode, mode_of_index, GridSpec1D, SpectralField1D};

/// Largest grid a rescaled history may occupy.
pub const MAX_SCALED_MODES: usize = 1 << 16;

/// Prefactor `lambda^{(alpha-2)/(1-alpha)}` of the rescaled height.
pub fn height_factor(lambda: f64, alpha: f64) -> f64 {
    lambda.powf((alpha - 2.0) / (1.0 - alpha))
}

/// Prefactor `lambda^{(2-3 alpha)/(1-alpha)}` of the rescaled forcing.
pub fn forcing_factor(lambda: f64, alpha: f64) -> f64 {
    lambda.powf((2.0 - 3.0 * alpha) / (1.0 - alpha))
}

/// Rescaled history on the same torus.
///
/// `h(lambda x)` stays periodic on the original domain only for integer
/// `lambda`, and it needs `lambda n` modes: mode `k` moves to `lambda k`.
/// Powers of two keep the refined grid a power of two, so `lambda` must be
/// one. Times are divided by `lambda^4`.
pub fn scaling_transform(hist: &SpaceTimeHistory, lambda: f64) -> Result<SpaceTimeHistory> {
    if !(lambda >= 1.0 && lambda.is_finite())
        || lambda.fract() != 0.0
        || !(lambda as u64).is_power_of_two()
    {
        return Err(config_err!(
            "lambda = {lambda} must be a power of two to stay on a periodic grid"
        ));
    }
    let l = lambda as usize;
    let grid = *hist.grid();
    let n_new = grid.n * l;
    if n_new > MAX_SCALED_MODES {
        return Err(config_err!(
            "rescaling by {lambda} needs {n_new} modes, more than {MAX_SCALED_MODES}"
        ));
    }
    let new_grid = GridSpec1D::new(n_new, grid.length, grid.pad)?;
    let alpha = hist.alpha();
    let amp = height_factor(lambda, alpha);
    let l4 = lambda * lambda * lambda * lambda;

    let mut snaps = Vec::with_capacity(hist.len());
    for s in hist.snapshots() {
        let mut c = alloc::vec![num_complex::Complex64::new(0.0, 0.0); n_new];
        for (j, v) in s.coeffs().iter().enumerate() {
            let k = mode_of_index(j, grid.n) * l as i64;
            if j == grid.n / 2 {
                // the Nyquist pair +-n/2 maps to +-l n/2, split evenly
                let half = v * (0.5 * amp);
                let kp = (grid.n / 2 * l) as i64;
                c[index_of_mode(kp, n_new).unwrap_or(n_new / 2)] += half;
                c[index_of_mode(-kp, n_new).expect("in range")] += half;
                continue;
            }
            let idx = index_of_mode(k, n_new).expect("refined grid holds every scaled mode");
            c[idx] = v * amp;
        }
        snaps.push(SpectralField1D::from_coeffs(new_grid, c)?);
    }
    let times = hist.times().iter().map(|t| t / l4).collect();
    let forcing = hist
        .forcing()
        .rescaled(l as u32, forcing_factor(lambda, alpha), grid.length);

    let famp = forcing_factor(lambda, alpha);
    // integrals over whole periods of h(lambda x) equal those of h
    let trace = hist.trace().map(|tr| EnergyTrace {
        t0: tr.t0 / l4,
        dt: tr.dt / l4,
        l2_sq: tr.l2_sq.iter().map(|v| v * amp * amp).collect(),
        hxx_sq: tr.hxx_sq.iter().map(|v| v * amp * amp * l4).collect(),
        forcing_work: tr.forcing_work.iter().map(|v| v * amp * famp).collect(),
    });
    Ok(
        SpaceTimeHistory::new(new_grid, alpha, times, snaps, forcing, hist.origin())?
            .with_trace(trace),
    )
}
