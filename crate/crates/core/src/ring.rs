//! Domain types and wavevector computation for the ring-plus-lead system.
//!
//! Units are fixed once and for all: `hbar = 1`, `2m = 1`. Energies are then
//! plain numbers, lengths carry units of inverse wavevector and delay times
//! units of inverse energy. The lead wavevector of an incident particle of
//! energy `E` is `k = sqrt(E)`; inside a barrier of strength `V` the
//! wavevector becomes `sqrt(E - V)`, which is purely imaginary in the
//! tunneling regime `E < V`.

use num_complex::Complex64;

use crate::error::RingError;

/// Default tolerance below which `|E - V|` counts as critical incidence.
///
/// At `E = V` the wavevector vanishes and the plane-wave region basis
/// degenerates into a linear wavefunction, which the solver does not model.
pub const DEFAULT_CRITICAL_TOLERANCE: f64 = 1e-9;

/// Full physical configuration of the ring: incident energy, the two
/// rectangular barriers, the zero-potential well between them, and the
/// per-segment Aharonov-Bohm phases.
///
/// Geometry, walking the loop from the lead junction: barrier 1 of strength
/// `v1` and length `lb1`, then the well of width `well`, then barrier 3 of
/// strength `v3` and length `lb3`, closing back on the junction. The ring
/// circumference is `lb1 + well + lb3`. Each segment `i` contributes a flux
/// phase `alpha_i`; only the sum is gauge invariant and observable, and it
/// equals `2 pi phi / phi_0` for a threading flux `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSpec {
    /// Incident energy, must be positive.
    pub energy: f64,
    /// Strength of barrier 1 (first segment after the junction).
    pub v1: f64,
    /// Strength of barrier 3 (last segment before closing the loop).
    pub v3: f64,
    /// Length of barrier 1.
    pub lb1: f64,
    /// Length of barrier 3.
    pub lb3: f64,
    /// Width of the zero-potential well between the barriers.
    pub well: f64,
    /// Flux phase picked up along barrier 1 (radians, clockwise positive).
    pub alpha1: f64,
    /// Flux phase picked up along the well.
    pub alpha2: f64,
    /// Flux phase picked up along barrier 3.
    pub alpha3: f64,
}

impl RingSpec {
    /// Ring with a single barrier of strength `v1` covering the entire
    /// circumference `length`, threaded by total flux phase `alpha`.
    pub fn single_barrier(energy: f64, v1: f64, length: f64, alpha: f64) -> Self {
        RingSpec {
            energy,
            v1,
            v3: v1,
            lb1: length,
            lb3: 0.0,
            well: 0.0,
            alpha1: alpha,
            alpha2: 0.0,
            alpha3: 0.0,
        }
    }

    /// Total circumference `lb1 + well + lb3`.
    pub fn circumference(&self) -> f64 {
        self.lb1 + self.well + self.lb3
    }

    /// Total flux phase `alpha1 + alpha2 + alpha3 = 2 pi phi / phi_0`.
    pub fn total_flux_phase(&self) -> f64 {
        total_flux_phase(self.alpha1, self.alpha2, self.alpha3)
    }

    /// Check the domain invariants with the default critical tolerance.
    pub fn validate(&self) -> Result<(), RingError> {
        self.validate_with_tolerance(DEFAULT_CRITICAL_TOLERANCE)
    }

    /// Check the domain invariants, flagging critical incidence whenever
    /// the energy sits within `tolerance` of a barrier strength.
    pub fn validate_with_tolerance(&self, tolerance: f64) -> Result<(), RingError> {
        let fields = [
            ("energy", self.energy),
            ("v1", self.v1),
            ("v3", self.v3),
            ("lb1", self.lb1),
            ("lb3", self.lb3),
            ("well", self.well),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("alpha3", self.alpha3),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(RingError::InvalidSpec(format!("{name} is not finite")));
            }
        }
        if self.energy <= 0.0 {
            return Err(RingError::InvalidSpec(format!(
                "energy must be positive (got {})",
                self.energy
            )));
        }
        if self.v1 < 0.0 || self.v3 < 0.0 {
            return Err(RingError::InvalidSpec(format!(
                "barrier strengths must be non-negative (got v1 = {}, v3 = {})",
                self.v1, self.v3
            )));
        }
        if self.lb1 < 0.0 || self.lb3 < 0.0 || self.well < 0.0 {
            return Err(RingError::InvalidSpec(format!(
                "segment lengths must be non-negative (got lb1 = {}, lb3 = {}, well = {})",
                self.lb1, self.lb3, self.well
            )));
        }
        if self.circumference() <= 0.0 {
            return Err(RingError::InvalidSpec(
                "circumference lb1 + well + lb3 must be positive".into(),
            ));
        }
        // The well is at zero potential, so only the barriers can be critical.
        wavevector_with_tolerance(self.energy, self.v1, tolerance)?;
        wavevector_with_tolerance(self.energy, self.v3, tolerance)?;
        Ok(())
    }
}

/// Per-region wavevector: `sqrt(E - V)` on the branch that is real positive
/// for a propagating region (`E > V`) and positive imaginary for an
/// evanescent one (`E < V`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWavevector {
    value: Complex64,
}

impl ComplexWavevector {
    /// The wavevector as a complex number.
    pub fn value(&self) -> Complex64 {
        self.value
    }

    /// True when the region propagates (`E > V`, real wavevector).
    pub fn is_propagating(&self) -> bool {
        self.value.im == 0.0
    }

    /// True when the region is classically forbidden (`E < V`).
    pub fn is_evanescent(&self) -> bool {
        self.value.im > 0.0
    }
}

/// Wavevector for a region of potential `potential` at incident energy
/// `energy`, using the default critical tolerance.
pub fn wavevector(energy: f64, potential: f64) -> Result<ComplexWavevector, RingError> {
    wavevector_with_tolerance(energy, potential, DEFAULT_CRITICAL_TOLERANCE)
}

/// As [`wavevector`] with an explicit critical tolerance.
pub fn wavevector_with_tolerance(
    energy: f64,
    potential: f64,
    tolerance: f64,
) -> Result<ComplexWavevector, RingError> {
    if energy <= 0.0 || !energy.is_finite() || !potential.is_finite() {
        return Err(RingError::InvalidSpec(format!(
            "wavevector needs finite inputs and positive energy (E = {energy}, V = {potential})"
        )));
    }
    let gap = (energy - potential).abs();
    if gap <= tolerance {
        return Err(RingError::DegenerateWavevector {
            energy,
            potential,
            gap,
            tolerance,
        });
    }
    Ok(ComplexWavevector {
        value: raw_wavevector(energy, potential),
    })
}

/// `sqrt(E - V)` on the physical branch, with no degeneracy check. Used
/// internally where the inputs were already validated.
pub(crate) fn raw_wavevector(energy: f64, potential: f64) -> Complex64 {
    if energy >= potential {
        Complex64::new((energy - potential).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (potential - energy).sqrt())
    }
}

/// Total flux phase around the loop, `alpha1 + alpha2 + alpha3`.
pub fn total_flux_phase(alpha1: f64, alpha2: f64, alpha3: f64) -> f64 {
    alpha1 + alpha2 + alpha3
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn free_particle_wavevector_is_real() {
        let q = wavevector(1.0, 0.0).unwrap();
        assert!(q.is_propagating());
        assert_abs_diff_eq!(q.value().re, 1.0, epsilon = 1e-15);
        assert_eq!(q.value().im, 0.0);
    }

    #[test]
    fn tunneling_wavevector_is_positive_imaginary() {
        let q = wavevector(1.0, 5.0).unwrap();
        assert!(q.is_evanescent());
        assert_eq!(q.value().re, 0.0);
        assert_abs_diff_eq!(q.value().im, 2.0, epsilon = 1e-15);

        let q = wavevector(1.0, 1.25).unwrap();
        assert_abs_diff_eq!(q.value().im, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn critical_incidence_is_rejected() {
        let err = wavevector(1.0, 1.0).unwrap_err();
        assert!(matches!(err, RingError::DegenerateWavevector { .. }));
        let err = wavevector(1.0, 1.0 + 1e-10).unwrap_err();
        assert!(matches!(err, RingError::DegenerateWavevector { .. }));
        // Just outside the default tolerance is fine.
        assert!(wavevector(1.0, 1.0 + 1e-8).is_ok());
    }

    #[test]
    fn wavevector_is_continuous_on_each_side_of_criticality() {
        // Approaching E = V from either side (outside the tolerance), small
        // potential changes give small wavevector changes.
        let below = wavevector(1.0, 0.9).unwrap().value();
        let below_shifted = wavevector(1.0, 0.9 + 1e-9).unwrap().value();
        assert!((below - below_shifted).norm() < 1e-7);

        let above = wavevector(1.0, 1.1).unwrap().value();
        let above_shifted = wavevector(1.0, 1.1 + 1e-9).unwrap().value();
        assert!((above - above_shifted).norm() < 1e-7);
    }

    #[test]
    fn flux_phase_sums() {
        assert_eq!(total_flux_phase(0.0, 0.0, 0.0), 0.0);
        assert_eq!(
            total_flux_phase(std::f64::consts::PI, 0.0, 0.0),
            std::f64::consts::PI
        );
        assert_eq!(total_flux_phase(1.0, 2.0, 3.0), 6.0);
    }

    #[test]
    fn spec_validation_catches_bad_geometry() {
        let good = RingSpec::single_barrier(1.0, 5.0, 10.0, 0.0);
        assert!(good.validate().is_ok());

        let mut bad = good;
        bad.energy = 0.0;
        assert!(matches!(bad.validate(), Err(RingError::InvalidSpec(_))));

        let mut bad = good;
        bad.lb1 = 0.0; // circumference collapses to zero
        assert!(matches!(bad.validate(), Err(RingError::InvalidSpec(_))));

        let mut bad = good;
        bad.lb3 = -1.0;
        assert!(matches!(bad.validate(), Err(RingError::InvalidSpec(_))));

        let mut bad = good;
        bad.v1 = 1.0; // critical incidence at E = V1
        assert!(matches!(
            bad.validate(),
            Err(RingError::DegenerateWavevector { .. })
        ));
    }

    #[test]
    fn single_barrier_helper_covers_whole_ring() {
        let spec = RingSpec::single_barrier(1.0, 5.0, 12.0, 0.3);
        assert_eq!(spec.circumference(), 12.0);
        assert_eq!(spec.lb1, 12.0);
        assert_eq!(spec.lb3, 0.0);
        assert_eq!(spec.well, 0.0);
        assert_eq!(spec.v3, spec.v1);
        assert_eq!(spec.total_flux_phase(), 0.3);
    }
}
