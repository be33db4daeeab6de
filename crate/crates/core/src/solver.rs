//! Assembly and solution of the 7x7 complex junction matching system.
//!
//! Three branches meet at the lead junction: the semi-infinite wire and the
//! two ends of the ring. Two more nodes sit inside the ring, between barrier
//! 1 and the well and between the well and barrier 3. At every node the
//! wavefunction is continuous and the outward derivatives sum to zero
//! (Griffith conditions); the flux enters as phase factors `exp(+i alpha_i)`
//! on the clockwise-moving amplitude at the far end of segment `i` and
//! `exp(-i alpha_i)` on the counter-moving amplitude at its near end.
//!
//! Region wavefunctions, with `s` the outward lead coordinate and `x` the
//! clockwise coordinate in each segment (`q` the segment wavevector):
//!
//! ```text
//! lead      psi(s) = exp(-i k s) + R exp(+i k s)
//! segment   psi(x) = A exp(+i q x) + B exp(-i q x)
//! ```
//!
//! For an evanescent segment (`q = i kappa`) the `A` term decays and the `B`
//! term grows along `x`. To keep every matrix entry bounded for arbitrarily
//! opaque barriers the system is assembled in an end-referenced basis
//! `b = B exp(-i q l)` (the value of the counter-moving wave at the far end
//! of its segment): the only exponentials that appear are
//! `u = exp(i q l)`, with `|u| <= 1` always. That one basis choice handles
//! both `kappa l = 60` and `kappa l = 10^6` with no overflow and no special
//! cases; the conventional amplitudes are recovered as `B = b u`, which
//! underflows to an exact 0 when the segment is opaque beyond double range.
//!
//! Unknown ordering is fixed as `(R, A1, B1, A2, B2, A3, B3)` and the
//! equation ordering is value/value/current at the lead junction, then
//! value/current at each ring node, so the assembled matrix is reproducible
//! bit for bit.

use num_complex::Complex64;

use crate::error::RingError;
use crate::ring::{raw_wavevector, RingSpec};

/// Pivot magnitude below which the matching matrix counts as singular.
pub const SINGULAR_PIVOT_THRESHOLD: f64 = 1e-14;

const N: usize = 7;

/// Fixed ordering of the unknowns in [`BoundarySystem`].
pub const UNKNOWN_ORDER: [&str; N] = ["R", "A1", "B1", "A2", "B2", "A3", "B3"];

/// One ring segment as seen by the matching conditions.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    /// Complex wavevector.
    pub q: Complex64,
    /// Segment length.
    pub len: f64,
    /// Flux phase across the segment.
    pub alpha: f64,
    /// Propagation factor across the segment, `exp(i q len)`, `|u| <= 1`.
    pub u: Complex64,
}

impl Segment {
    fn new(q: Complex64, len: f64, alpha: f64) -> Self {
        Segment {
            q,
            len,
            alpha,
            u: (Complex64::i() * q * len).exp(),
        }
    }
}

/// The assembled 7x7 complex linear system for one [`RingSpec`].
#[derive(Debug, Clone)]
pub struct BoundarySystem {
    /// Matrix in row-major order; unknowns ordered as [`UNKNOWN_ORDER`]
    /// (the `B` slots hold the end-referenced amplitudes, see module docs).
    pub matrix: [[Complex64; N]; N],
    /// Right-hand side.
    pub rhs: [Complex64; N],
    /// Barrier 1, well, barrier 3.
    pub(crate) segments: [Segment; 3],
}

/// The seven amplitudes solving the matching conditions, in the
/// conventional region basis `psi = A exp(iqx) + B exp(-iqx)`.
///
/// `r` is the reflection amplitude in the lead; with a single lead and a
/// real potential it lies on the unit circle. The end-referenced amplitudes
/// used internally are kept alongside so that wavefunction evaluation stays
/// stable deep inside opaque barriers, where the conventional `B` values
/// underflow.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringSolution {
    pub r: Complex64,
    pub a1: Complex64,
    pub b1: Complex64,
    pub a2: Complex64,
    pub b2: Complex64,
    pub a3: Complex64,
    pub b3: Complex64,
    pub(crate) beta: [Complex64; 3],
}

/// Regions of the composite system, in the order the loop is walked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// The semi-infinite wire, parameterised outward from the junction.
    Lead,
    /// Barrier 1, coordinate range `[0, lb1]`.
    Barrier1,
    /// The zero-potential well, coordinate range `[0, well]`.
    Well,
    /// Barrier 3, coordinate range `[0, lb3]`.
    Barrier3,
}

impl Region {
    fn name(self) -> &'static str {
        match self {
            Region::Lead => "lead",
            Region::Barrier1 => "barrier 1",
            Region::Well => "well",
            Region::Barrier3 => "barrier 3",
        }
    }
}

fn segments_of(spec: &RingSpec) -> [Segment; 3] {
    [
        Segment::new(raw_wavevector(spec.energy, spec.v1), spec.lb1, spec.alpha1),
        Segment::new(raw_wavevector(spec.energy, 0.0), spec.well, spec.alpha2),
        Segment::new(raw_wavevector(spec.energy, spec.v3), spec.lb3, spec.alpha3),
    ]
}

/// Assemble the junction matching system for a validated spec.
pub fn assemble(spec: &RingSpec) -> Result<BoundarySystem, RingError> {
    spec.validate()?;
    let k = spec.energy.sqrt();
    let kc = Complex64::new(k, 0.0);
    let segs = segments_of(spec);
    let [s1, s2, s3] = segs;

    let e1p = Complex64::from_polar(1.0, s1.alpha);
    let e1m = e1p.conj();
    let e2p = Complex64::from_polar(1.0, s2.alpha);
    let e2m = e2p.conj();
    let e3p = Complex64::from_polar(1.0, s3.alpha);
    let e3m = e3p.conj();

    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);

    // Unknowns x = (R, A1, b1, A2, b2, A3, b3).
    let matrix = [
        // Value match at the lead junction, lead against segment 1 start:
        //   (1 + R) = A1 + b1 u1 e^{-i a1}
        [one, -one, -s1.u * e1m, z, z, z, z],
        // Value match at the lead junction, lead against segment 3 end:
        //   (1 + R) = A3 u3 e^{+i a3} + b3
        [one, z, z, z, z, -s3.u * e3p, -one],
        // Outward derivatives at the lead junction sum to zero (divided by i):
        //   k(R - 1) + q1(A1 - b1 u1 e^{-i a1}) - q3(A3 u3 e^{+i a3} - b3) = 0
        [kc, s1.q, -s1.q * s1.u * e1m, z, z, -s3.q * s3.u * e3p, s3.q],
        // Value match where barrier 1 meets the well:
        //   A1 u1 e^{+i a1} + b1 = A2 + b2 u2 e^{-i a2}
        [z, s1.u * e1p, one, -one, -s2.u * e2m, z, z],
        // Outward derivatives there (divided by i):
        //   -q1(A1 u1 e^{+i a1} - b1) + q2(A2 - b2 u2 e^{-i a2}) = 0
        [z, -s1.q * s1.u * e1p, s1.q, s2.q, -s2.q * s2.u * e2m, z, z],
        // Value match where the well meets barrier 3:
        //   A2 u2 e^{+i a2} + b2 = A3 + b3 u3 e^{-i a3}
        [z, z, z, s2.u * e2p, one, -one, -s3.u * e3m],
        // Outward derivatives there (divided by i):
        //   -q2(A2 u2 e^{+i a2} - b2) + q3(A3 - b3 u3 e^{-i a3}) = 0
        [z, z, z, -s2.q * s2.u * e2p, s2.q, s3.q, -s3.q * s3.u * e3m],
    ];
    let rhs = [-one, -one, kc, z, z, z, z];

    Ok(BoundarySystem {
        matrix,
        rhs,
        segments: segs,
    })
}

/// LU factors of a 7x7 system with partial pivoting.
struct LuFactors {
    lu: [[Complex64; N]; N],
    perm: [usize; N],
    min_pivot: f64,
}

// Index loops keep the pivoting arithmetic readable.
#[allow(clippy::needless_range_loop)]
impl LuFactors {
    fn factor(matrix: &[[Complex64; N]; N]) -> Result<Self, RingError> {
        let mut lu = *matrix;
        let mut perm = [0usize; N];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        let mut min_pivot = f64::INFINITY;
        for col in 0..N {
            let mut pivot_row = col;
            let mut pivot_mag = lu[col][col].norm();
            for row in col + 1..N {
                let mag = lu[row][col].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = row;
                }
            }
            if pivot_mag < SINGULAR_PIVOT_THRESHOLD {
                return Err(RingError::SingularSystem {
                    pivot: pivot_mag,
                    threshold: SINGULAR_PIVOT_THRESHOLD,
                });
            }
            min_pivot = min_pivot.min(pivot_mag);
            lu.swap(col, pivot_row);
            perm.swap(col, pivot_row);
            let inv = lu[col][col].inv();
            for row in col + 1..N {
                let factor = lu[row][col] * inv;
                lu[row][col] = factor;
                for j in col + 1..N {
                    let sub = factor * lu[col][j];
                    lu[row][j] -= sub;
                }
            }
        }
        Ok(LuFactors {
            lu,
            perm,
            min_pivot,
        })
    }

    fn solve(&self, rhs: &[Complex64; N]) -> [Complex64; N] {
        let mut x = [Complex64::new(0.0, 0.0); N];
        // Forward substitution on the permuted right-hand side.
        for i in 0..N {
            let mut sum = rhs[self.perm[i]];
            for j in 0..i {
                sum -= self.lu[i][j] * x[j];
            }
            x[i] = sum;
        }
        // Back substitution.
        for i in (0..N).rev() {
            let mut sum = x[i];
            for j in i + 1..N {
                sum -= self.lu[i][j] * x[j];
            }
            x[i] = sum / self.lu[i][i];
        }
        x
    }
}

impl BoundarySystem {
    /// 1-norm condition number estimate, `||A||_1 * ||A^-1||_1`, with the
    /// inverse built column by column from the LU factors.
    pub fn condition_estimate(&self) -> Result<f64, RingError> {
        let factors = LuFactors::factor(&self.matrix)?;
        let norm_a = one_norm(&self.matrix);
        let mut norm_inv: f64 = 0.0;
        for col in 0..N {
            let mut e = [Complex64::new(0.0, 0.0); N];
            e[col] = Complex64::new(1.0, 0.0);
            let x = factors.solve(&e);
            let col_sum: f64 = x.iter().map(|v| v.norm()).sum();
            norm_inv = norm_inv.max(col_sum);
        }
        Ok(norm_a * norm_inv)
    }

    /// Smallest pivot magnitude met during factorization.
    pub fn min_pivot(&self) -> Result<f64, RingError> {
        Ok(LuFactors::factor(&self.matrix)?.min_pivot)
    }
}

fn one_norm(matrix: &[[Complex64; N]; N]) -> f64 {
    (0..N)
        .map(|col| (0..N).map(|row| matrix[row][col].norm()).sum())
        .fold(0.0, f64::max)
}

/// Solve the matching system exactly (up to floating error).
pub fn solve(system: &BoundarySystem) -> Result<ScatteringSolution, RingError> {
    let factors = LuFactors::factor(&system.matrix)?;
    let x = factors.solve(&system.rhs);
    let [s1, s2, s3] = system.segments;
    Ok(ScatteringSolution {
        r: x[0],
        a1: x[1],
        b1: x[2] * s1.u,
        a2: x[3],
        b2: x[4] * s2.u,
        a3: x[5],
        b3: x[6] * s3.u,
        beta: [x[2], x[4], x[6]],
    })
}

/// Reflection amplitude for a spec: assemble and solve in one call.
pub fn reflection(spec: &RingSpec) -> Result<Complex64, RingError> {
    Ok(solve(&assemble(spec)?)?.r)
}

/// Value and outward derivative (divided by `i q`) of segment `i` at its
/// near end (`x = 0`, as seen from the node there).
fn segment_start(seg: &Segment, a: Complex64, beta: Complex64) -> (Complex64, Complex64) {
    let em = Complex64::from_polar(1.0, -seg.alpha);
    let value = a + beta * seg.u * em;
    let derivative = Complex64::i() * seg.q * (a - beta * seg.u * em);
    (value, derivative)
}

/// Value and outward derivative of segment `i` at its far end (`x = len`).
fn segment_end(seg: &Segment, a: Complex64, beta: Complex64) -> (Complex64, Complex64) {
    let ep = Complex64::from_polar(1.0, seg.alpha);
    let value = a * seg.u * ep + beta;
    let derivative = -Complex64::i() * seg.q * (a * seg.u * ep - beta);
    (value, derivative)
}

/// Maximum absolute violation of the seven matching conditions, evaluated
/// directly from the region wavefunctions rather than from the assembled
/// matrix.
pub fn residual(solution: &ScatteringSolution, spec: &RingSpec) -> f64 {
    let k = spec.energy.sqrt();
    let segs = segments_of(spec);
    let [s1, s2, s3] = segs;
    let [beta1, beta2, beta3] = solution.beta;

    let lead_value = Complex64::new(1.0, 0.0) + solution.r;
    let lead_derivative = Complex64::i() * k * (solution.r - Complex64::new(1.0, 0.0));

    let (v1s, d1s) = segment_start(&s1, solution.a1, beta1);
    let (v1e, d1e) = segment_end(&s1, solution.a1, beta1);
    let (v2s, d2s) = segment_start(&s2, solution.a2, beta2);
    let (v2e, d2e) = segment_end(&s2, solution.a2, beta2);
    let (v3s, d3s) = segment_start(&s3, solution.a3, beta3);
    let (v3e, d3e) = segment_end(&s3, solution.a3, beta3);

    let violations = [
        (lead_value - v1s).norm(),
        (lead_value - v3e).norm(),
        (lead_derivative + d1s + d3e).norm(),
        (v1e - v2s).norm(),
        (d1e + d2s).norm(),
        (v2e - v3s).norm(),
        (d2e + d3s).norm(),
    ];
    violations.into_iter().fold(0.0, f64::max)
}

/// Evaluate the wavefunction of one region at local coordinate `x`.
///
/// Ring segments return the flux-dressed wavefunction in the gauge where the
/// vector potential is uniform along each segment, so the returned values
/// are continuous across the nodes; at zero flux this is the plain
/// `A exp(iqx) + B exp(-iqx)` form. The lead accepts any `x >= 0`, measured
/// outward from the junction.
pub fn evaluate_wavefunction(
    solution: &ScatteringSolution,
    spec: &RingSpec,
    region: Region,
    x: f64,
) -> Result<Complex64, RingError> {
    if region == Region::Lead {
        if x < 0.0 || !x.is_finite() {
            return Err(RingError::OutOfRange {
                region: region.name(),
                x,
                extent: f64::INFINITY,
            });
        }
        let k = spec.energy.sqrt();
        let phase = Complex64::i() * k * x;
        return Ok((-phase).exp() + solution.r * phase.exp());
    }

    let segs = segments_of(spec);
    let (seg, a, beta) = match region {
        Region::Barrier1 => (segs[0], solution.a1, solution.beta[0]),
        Region::Well => (segs[1], solution.a2, solution.beta[1]),
        Region::Barrier3 => (segs[2], solution.a3, solution.beta[2]),
        Region::Lead => unreachable!(),
    };
    if x < 0.0 || x > seg.len || !x.is_finite() {
        return Err(RingError::OutOfRange {
            region: region.name(),
            x,
            extent: seg.len,
        });
    }
    // Fraction of the segment flux phase accumulated at x.
    let fraction = if seg.len > 0.0 { x / seg.len } else { 0.0 };
    let forward =
        a * (Complex64::i() * seg.q * x).exp() * Complex64::from_polar(1.0, seg.alpha * fraction);
    let backward = beta
        * (Complex64::i() * seg.q * (seg.len - x)).exp()
        * Complex64::from_polar(1.0, -seg.alpha * (1.0 - fraction));
    Ok(forward + backward)
}
