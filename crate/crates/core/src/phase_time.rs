//! Wigner phase delay time from any reflection-amplitude provider.
//!
//! The delay time is the energy derivative of the reflection phase,
//! `tau = d Arg(R) / dE` (with `hbar = 1`). The phase comes out of `atan2`
//! only modulo `2 pi`, so it is unwrapped across the differentiation stencil
//! before the central difference is taken.

use num_complex::Complex64;

use crate::error::RingError;
use crate::ring::RingSpec;

/// Maximum number of automatic step halvings before giving up on an
/// undersampled phase.
pub const MAX_STEP_HALVINGS: u32 = 8;

/// Default differentiation step for incident energy `energy`.
pub fn default_step(energy: f64) -> f64 {
    1e-5 * energy
}

/// Delay time plus differentiation metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTimeResult {
    /// Central-difference delay time at `step` (units of inverse energy).
    pub tau: f64,
    /// Energy step actually used (after any automatic halvings).
    pub step: f64,
    /// Richardson estimate of the truncation error of `tau`, from comparing
    /// the `step` and `step/2` differences.
    pub error_estimate: f64,
}

/// Principal argument of `z` in `(-pi, pi]`.
pub fn principal_phase(z: Complex64) -> Result<f64, RingError> {
    let magnitude = z.norm();
    if magnitude < 1e-300 {
        return Err(RingError::ZeroAmplitude { magnitude });
    }
    let arg = z.arg();
    // atan2 can return -pi for arguments on the negative real axis
    // approached from below; fold that onto the +pi branch edge.
    Ok(if arg <= -std::f64::consts::PI {
        arg + 2.0 * std::f64::consts::PI
    } else {
        arg
    })
}

/// Unwrap a sequence of principal phases into a continuous one: the first
/// element is kept and each successive difference is shifted by a multiple
/// of `2 pi` into `(-pi, pi]`.
pub fn unwrap_phases(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let Some(&first) = phases.first() else {
        return out;
    };
    out.push(first);
    for window in phases.windows(2) {
        let mut delta = window[1] - window[0];
        while delta > std::f64::consts::PI {
            delta -= 2.0 * std::f64::consts::PI;
        }
        while delta <= -std::f64::consts::PI {
            delta += 2.0 * std::f64::consts::PI;
        }
        let prev = *out.last().unwrap();
        out.push(prev + delta);
    }
    out
}

/// Delay time at `spec.energy` by unwrapped central differencing of the
/// provider's reflection phase.
///
/// The stencil holds five energies `E - h, E - h/2, E, E + h/2, E + h`; the
/// coarse and fine central differences give the reported value (at `h`) and
/// the Richardson error estimate. When the unwrapped phase changes by more
/// than `pi/2` across the stencil the step is halved automatically, up to
/// [`MAX_STEP_HALVINGS`] times, before failing with `StepTooLarge`.
pub fn phase_time<F>(spec: &RingSpec, step: f64, provider: F) -> Result<PhaseTimeResult, RingError>
where
    F: Fn(&RingSpec) -> Result<Complex64, RingError>,
{
    if !step.is_finite() || step <= 0.0 {
        return Err(RingError::InvalidSpec(format!(
            "differentiation step must be positive and finite (got {step})"
        )));
    }
    spec.validate()?;

    let mut h = step;
    let mut halvings = 0;
    loop {
        if spec.energy - h <= 0.0 {
            return Err(RingError::InvalidSpec(format!(
                "stencil leaves the domain: E - h = {} <= 0",
                spec.energy - h
            )));
        }
        let offsets = [-h, -0.5 * h, 0.0, 0.5 * h, h];
        let mut phases = [0.0; 5];
        for (slot, offset) in phases.iter_mut().zip(offsets) {
            let mut probe = *spec;
            probe.energy = spec.energy + offset;
            *slot = principal_phase(provider(&probe)?)?;
        }
        let unwrapped = unwrap_phases(&phases);
        let delta = (unwrapped[4] - unwrapped[0]).abs();
        if delta > std::f64::consts::FRAC_PI_2 {
            if halvings >= MAX_STEP_HALVINGS {
                return Err(RingError::StepTooLarge {
                    step: h,
                    delta,
                    halvings,
                });
            }
            halvings += 1;
            h *= 0.5;
            continue;
        }
        let tau_coarse = (unwrapped[4] - unwrapped[0]) / (2.0 * h);
        let tau_fine = (unwrapped[3] - unwrapped[1]) / h;
        return Ok(PhaseTimeResult {
            tau: tau_coarse,
            step: h,
            error_estimate: (tau_fine - tau_coarse).abs() / 3.0,
        });
    }
}
