use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum RingError {
    /// The incident energy sits on (or too close to) the top of a barrier,
    /// where the wavevector vanishes and the plane-wave basis breaks down.
    #[error(
        "degenerate wavevector: |E - V| = {gap:e} <= tolerance {tolerance:e} (E = {energy}, V = {potential})"
    )]
    DegenerateWavevector {
        energy: f64,
        potential: f64,
        gap: f64,
        tolerance: f64,
    },

    /// A ring configuration violates the domain invariants (non-positive
    /// energy, negative lengths, zero circumference, non-finite input, ...).
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// The junction matching matrix produced a pivot below the singularity
    /// threshold; the geometry is degenerate.
    #[error("singular boundary system: pivot magnitude {pivot:e} below {threshold:e}")]
    SingularSystem { pivot: f64, threshold: f64 },

    /// Wavefunction evaluation outside the coordinate range of a region.
    #[error("coordinate {x} outside {region} extent [0, {extent}]")]
    OutOfRange {
        region: &'static str,
        x: f64,
        extent: f64,
    },

    /// Argument of a complex number too small in magnitude to carry a phase.
    #[error("zero amplitude: |z| = {magnitude:e} below 1e-300")]
    ZeroAmplitude { magnitude: f64 },

    /// The phase changes by more than pi/2 across the differentiation
    /// stencil even after the automatic step halvings.
    #[error(
        "phase undersampled: change {delta} rad across stencil exceeds pi/2 at step {step:e} after {halvings} halvings"
    )]
    StepTooLarge {
        step: f64,
        delta: f64,
        halvings: u32,
    },

    /// Closed-form expressions for the single-barrier ring hold in the
    /// tunneling regime only.
    #[error("closed form requires tunneling regime V1 > E > 0 (got E = {energy}, V1 = {v1})")]
    InvalidRegime { energy: f64, v1: f64 },

    /// A numerically solved reflection amplitude drifted off the unit
    /// circle; signals a solver failure rather than physics.
    #[error("unitarity loss: | |R| - 1 | = {deviation:e}")]
    UnitarityLoss { deviation: f64 },

    /// Failure at one row of a parameter sweep, tagged with the offending
    /// parameter value.
    #[error("at {parameter} = {value}: {source}")]
    AtParameter {
        parameter: &'static str,
        value: f64,
        #[source]
        source: Box<RingError>,
    },
}

impl RingError {
    /// Wrap an error with the sweep parameter that triggered it.
    pub(crate) fn at(self, parameter: &'static str, value: f64) -> Self {
        RingError::AtParameter {
            parameter,
            value,
            source: Box::new(self),
        }
    }

    /// True for errors that indicate a numerical failure while evaluating a
    /// valid-looking request (as opposed to invalid arguments).
    pub fn is_numerical(&self) -> bool {
        match self {
            RingError::DegenerateWavevector { .. }
            | RingError::SingularSystem { .. }
            | RingError::ZeroAmplitude { .. }
            | RingError::StepTooLarge { .. }
            | RingError::UnitarityLoss { .. }
            | RingError::OutOfRange { .. } => true,
            RingError::AtParameter { source, .. } => source.is_numerical(),
            RingError::InvalidSpec(_) | RingError::InvalidRegime { .. } => false,
        }
    }
}
