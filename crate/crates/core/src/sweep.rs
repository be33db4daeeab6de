//! Parameter sweeps over the ring, resonance detection, and CSV emission.
//!
//! Every sweep evaluates rows independently (in parallel, collected in
//! parameter order), then unwraps the reflection phase along the sweep axis.
//! Emitted rows carry `(parameter, tau, |R|^2, unwrapped Arg R)`; with a
//! single lead the reflectance must stay within 1e-10 of unity, and a row
//! that drifts further is reported as a numerical failure rather than
//! silently written out.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::RingError;
use crate::phase_time::{default_step, phase_time, principal_phase, unwrap_phases};
use crate::ring::RingSpec;
use crate::solver::{assemble, reflection, residual, solve};

/// One sweep sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Value of the swept parameter.
    pub parameter: f64,
    /// Delay time at this point.
    pub tau: f64,
    /// Reflectance `|R|^2`.
    pub reflectance: f64,
    /// Reflection phase, unwrapped along the sweep.
    pub phase: f64,
}

/// Ordered sweep results for one swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    /// Name of the swept parameter (`"L"`, `"phi"`, `"lb1"`, `"w"`).
    pub parameter_name: String,
    /// Rows in strictly increasing parameter order.
    pub rows: Vec<SweepRow>,
}

impl SweepSeries {
    /// Delay-time column.
    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|row| row.tau)
    }

    /// `(max - min) / (max + min)` of the delay-time column.
    pub fn visibility(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for tau in self.taus() {
            lo = lo.min(tau);
            hi = hi.max(tau);
        }
        (hi - lo) / (hi + lo)
    }
}

/// A detected resonance in a well-width scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePeak {
    /// Well width at the peak sample.
    pub location: f64,
    /// Delay time at the peak sample.
    pub height: f64,
    /// Full width at half maximum above the series baseline, from half-max
    /// crossing interpolation.
    pub fwhm: f64,
}

/// Full diagnostic at a single parameter point.
#[derive(Debug, Clone, Copy)]
pub struct PointResult {
    /// Reflection amplitude.
    pub r: Complex64,
    /// Delay time (default differentiation step unless overridden).
    pub tau: f64,
    /// Matching-condition residual of the solution.
    pub residual: f64,
}

fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, RingError> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(RingError::InvalidSpec("sweep bounds must be finite".into()));
    }
    if steps < 2 {
        return Err(RingError::InvalidSpec(format!(
            "a sweep needs at least 2 steps (got {steps})"
        )));
    }
    if from >= to {
        return Err(RingError::InvalidSpec(format!(
            "sweep bounds must satisfy from < to (got {from} >= {to})"
        )));
    }
    let span = to - from;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                to
            } else {
                from + span * (i as f64) / ((steps - 1) as f64)
            }
        })
        .collect())
}

/// Evaluate `(R, tau)` for one spec.
fn eval_point(spec: &RingSpec, step: Option<f64>) -> Result<(Complex64, f64), RingError> {
    let h = step.unwrap_or_else(|| default_step(spec.energy));
    let result = phase_time(spec, h, reflection)?;
    let r = reflection(spec)?;
    Ok((r, result.tau))
}

fn eval_rows(
    parameter: &'static str,
    values: &[f64],
    build: impl Fn(f64) -> RingSpec + Sync,
    step: Option<f64>,
    parallel: bool,
) -> Result<Vec<(f64, Complex64, f64)>, RingError> {
    let eval_one = |&value: &f64| -> Result<(f64, Complex64, f64), RingError> {
        let spec = build(value);
        let (r, tau) = eval_point(&spec, step).map_err(|e| e.at(parameter, value))?;
        let deviation = (r.norm() - 1.0).abs();
        if deviation >= 1e-10 {
            return Err(RingError::UnitarityLoss { deviation }.at(parameter, value));
        }
        Ok((value, r, tau))
    };
    if parallel {
        values.par_iter().map(eval_one).collect()
    } else {
        values.iter().map(eval_one).collect()
    }
}

fn finalize(parameter_name: &str, raw: Vec<(f64, Complex64, f64)>) -> SweepSeries {
    let phases: Vec<f64> = raw
        .iter()
        .map(|(_, r, _)| principal_phase(*r).expect("unit-modulus amplitude"))
        .collect();
    let unwrapped = unwrap_phases(&phases);
    let rows = raw
        .into_iter()
        .zip(unwrapped)
        .map(|((parameter, r, tau), phase)| SweepRow {
            parameter,
            tau,
            reflectance: r.norm_sqr(),
            phase,
        })
        .collect();
    SweepSeries {
        parameter_name: parameter_name.to_string(),
        rows,
    }
}

/// Delay time versus circumference for a single-barrier ring (`lb3` and the
/// well must be zero in `base`; `lb1` is swept as the full circumference).
pub fn scan_length(
    base: &RingSpec,
    l_from: f64,
    l_to: f64,
    steps: usize,
) -> Result<SweepSeries, RingError> {
    scan_length_impl(base, l_from, l_to, steps, None, true)
}

/// As [`scan_length`] with an explicit differentiation step.
pub fn scan_length_with_step(
    base: &RingSpec,
    l_from: f64,
    l_to: f64,
    steps: usize,
    step: Option<f64>,
) -> Result<SweepSeries, RingError> {
    scan_length_impl(base, l_from, l_to, steps, step, true)
}

pub(crate) fn scan_length_impl(
    base: &RingSpec,
    l_from: f64,
    l_to: f64,
    steps: usize,
    step: Option<f64>,
    parallel: bool,
) -> Result<SweepSeries, RingError> {
    if base.lb3 != 0.0 || base.well != 0.0 {
        return Err(RingError::InvalidSpec(
            "length scans take a single-barrier configuration (lb3 = well = 0)".into(),
        ));
    }
    let values = grid(l_from, l_to, steps)?;
    if values[0] <= 0.0 {
        return Err(RingError::InvalidSpec(
            "circumference sweep must start above zero".into(),
        ));
    }
    let raw = eval_rows(
        "L",
        &values,
        |l| RingSpec { lb1: l, ..*base },
        step,
        parallel,
    )?;
    Ok(finalize("L", raw))
}

/// Delay time versus flux, in units of the flux quantum. The whole loop
/// phase `2 pi phi` is placed on segment 1; by gauge invariance the split
/// does not matter.
pub fn scan_flux(
    base: &RingSpec,
    phi_from: f64,
    phi_to: f64,
    steps: usize,
) -> Result<(SweepSeries, f64), RingError> {
    scan_flux_impl(base, phi_from, phi_to, steps, None, true)
}

/// As [`scan_flux`] with an explicit differentiation step.
pub fn scan_flux_with_step(
    base: &RingSpec,
    phi_from: f64,
    phi_to: f64,
    steps: usize,
    step: Option<f64>,
) -> Result<(SweepSeries, f64), RingError> {
    scan_flux_impl(base, phi_from, phi_to, steps, step, true)
}

pub(crate) fn scan_flux_impl(
    base: &RingSpec,
    phi_from: f64,
    phi_to: f64,
    steps: usize,
    step: Option<f64>,
    parallel: bool,
) -> Result<(SweepSeries, f64), RingError> {
    let values = grid(phi_from, phi_to, steps)?;
    let raw = eval_rows(
        "phi",
        &values,
        |phi| RingSpec {
            alpha1: 2.0 * std::f64::consts::PI * phi,
            alpha2: 0.0,
            alpha3: 0.0,
            ..*base
        },
        step,
        parallel,
    )?;
    let series = finalize("phi", raw);
    let visibility = series.visibility();
    Ok((series, visibility))
}

/// Delay time versus the length of barrier 1 in a two-barrier ring with
/// fixed `lb3` and well width; the tail of the series estimates the
/// saturated delay.
pub fn scan_well(
    base: &RingSpec,
    lb1_from: f64,
    lb1_to: f64,
    steps: usize,
) -> Result<SweepSeries, RingError> {
    scan_well_impl(base, lb1_from, lb1_to, steps, None, true)
}

/// As [`scan_well`] with an explicit differentiation step.
pub fn scan_well_with_step(
    base: &RingSpec,
    lb1_from: f64,
    lb1_to: f64,
    steps: usize,
    step: Option<f64>,
) -> Result<SweepSeries, RingError> {
    scan_well_impl(base, lb1_from, lb1_to, steps, step, true)
}

pub(crate) fn scan_well_impl(
    base: &RingSpec,
    lb1_from: f64,
    lb1_to: f64,
    steps: usize,
    step: Option<f64>,
    parallel: bool,
) -> Result<SweepSeries, RingError> {
    if base.v3 <= 0.0 || base.lb3 <= 0.0 {
        return Err(RingError::InvalidSpec(
            "barrier-length scans take a two-barrier configuration (v3 > 0, lb3 > 0)".into(),
        ));
    }
    let values = grid(lb1_from, lb1_to, steps)?;
    if values[0] < 0.0 {
        return Err(RingError::InvalidSpec(
            "barrier length cannot be negative".into(),
        ));
    }
    let raw = eval_rows(
        "lb1",
        &values,
        |lb1| RingSpec { lb1, ..*base },
        step,
        parallel,
    )?;
    Ok(finalize("lb1", raw))
}

/// Saturated delay time versus well width, plus detected resonance peaks.
/// An empty peak list is a valid result, not an error.
pub fn scan_resonance(
    base: &RingSpec,
    w_from: f64,
    w_to: f64,
    steps: usize,
) -> Result<(SweepSeries, Vec<ResonancePeak>), RingError> {
    scan_resonance_impl(base, w_from, w_to, steps, None, true)
}

/// As [`scan_resonance`] with an explicit differentiation step.
pub fn scan_resonance_with_step(
    base: &RingSpec,
    w_from: f64,
    w_to: f64,
    steps: usize,
    step: Option<f64>,
) -> Result<(SweepSeries, Vec<ResonancePeak>), RingError> {
    scan_resonance_impl(base, w_from, w_to, steps, step, true)
}

pub(crate) fn scan_resonance_impl(
    base: &RingSpec,
    w_from: f64,
    w_to: f64,
    steps: usize,
    step: Option<f64>,
    parallel: bool,
) -> Result<(SweepSeries, Vec<ResonancePeak>), RingError> {
    if base.v1 <= 0.0 || base.v3 <= 0.0 || base.lb1 <= 0.0 || base.lb3 <= 0.0 {
        return Err(RingError::InvalidSpec(
            "resonance scans take a two-barrier configuration (v1, v3, lb1, lb3 > 0)".into(),
        ));
    }
    let values = grid(w_from, w_to, steps)?;
    if values[0] < 0.0 {
        return Err(RingError::InvalidSpec(
            "well width cannot be negative".into(),
        ));
    }
    let raw = eval_rows(
        "w",
        &values,
        |well| RingSpec { well, ..*base },
        step,
        parallel,
    )?;
    let series = finalize("w", raw);
    let peaks = find_peaks(&series);
    Ok((series, peaks))
}

/// Full diagnostic at one parameter point.
pub fn point(spec: &RingSpec) -> Result<PointResult, RingError> {
    point_with_step(spec, None)
}

/// As [`point`] with an explicit differentiation step.
pub fn point_with_step(spec: &RingSpec, step: Option<f64>) -> Result<PointResult, RingError> {
    let solution = solve(&assemble(spec)?)?;
    let h = step.unwrap_or_else(|| default_step(spec.energy));
    let tau = phase_time(spec, h, reflection)?.tau;
    Ok(PointResult {
        r: solution.r,
        tau,
        residual: residual(&solution, spec),
    })
}

/// Index-based quartile of a sorted slice.
fn quartile(sorted: &[f64], num: usize, den: usize) -> f64 {
    sorted[(sorted.len() * num / den).min(sorted.len() - 1)]
}

/// Detect resonance peaks in a sweep: strict local maxima of the delay time
/// exceeding the series median by three interquartile ranges, with the FWHM
/// read off by interpolating the half-maximum crossings on either side
/// (the peaks are Lorentzian, but no shape fit is needed for the width).
/// A peak whose half-maximum crossings are not bracketed by the scan window
/// is dropped.
pub fn find_peaks(series: &SweepSeries) -> Vec<ResonancePeak> {
    let n = series.rows.len();
    if n < 3 {
        return Vec::new();
    }
    let taus: Vec<f64> = series.taus().collect();
    let mut sorted = taus.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite delay times"));
    let baseline = quartile(&sorted, 1, 2);
    let iqr = quartile(&sorted, 3, 4) - quartile(&sorted, 1, 4);
    let threshold = baseline + 3.0 * iqr;

    let x = |i: usize| series.rows[i].parameter;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(taus[i] > taus[i - 1] && taus[i] > taus[i + 1] && taus[i] > threshold) {
            continue;
        }
        let half = 0.5 * (taus[i] + baseline);

        let mut left = None;
        for j in (0..i).rev() {
            if taus[j] <= half {
                let frac = (half - taus[j]) / (taus[j + 1] - taus[j]);
                left = Some(x(j) + frac * (x(j + 1) - x(j)));
                break;
            }
        }
        let mut right = None;
        for j in i + 1..n {
            if taus[j] <= half {
                let frac = (half - taus[j - 1]) / (taus[j] - taus[j - 1]);
                right = Some(x(j - 1) + frac * (x(j) - x(j - 1)));
                break;
            }
        }
        if let (Some(l), Some(r)) = (left, right) {
            if r > l {
                peaks.push(ResonancePeak {
                    location: x(i),
                    height: taus[i],
                    fwhm: r - l,
                });
            }
        }
    }
    peaks
}

/// Write a series as CSV: `#`-prefixed metadata lines, the fixed header
/// `# param,tau,reflectance,phase`, then one row per sample with every float
/// printed as the shortest round-trip decimal in scientific notation. The
/// output is byte-deterministic for identical inputs.
pub fn write_csv<W: Write>(
    out: &mut W,
    series: &SweepSeries,
    meta: &[(&str, String)],
) -> io::Result<()> {
    for (key, value) in meta {
        writeln!(out, "# {key} = {value}")?;
    }
    writeln!(out, "# param,tau,reflectance,phase")?;
    for row in &series.rows {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e}",
            row.parameter, row.tau, row.reflectance, row.phase
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::tau_saturated;
    use approx::assert_abs_diff_eq;

    fn two_barrier_base(well: f64) -> RingSpec {
        RingSpec {
            energy: 1.0,
            v1: 2.0,
            v3: 2.0,
            lb1: 3.0,
            lb3: 5.0,
            well,
            alpha1: 0.0,
            alpha2: 0.0,
            alpha3: 0.0,
        }
    }

    #[test]
    fn grid_preconditions() {
        assert!(grid(0.0, 1.0, 1).is_err());
        assert!(grid(1.0, 1.0, 10).is_err());
        assert!(grid(2.0, 1.0, 10).is_err());
        let g = grid(1.0, 3.0, 5).unwrap();
        assert_eq!(g, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn length_scan_saturates_to_the_closed_reference() {
        let base = RingSpec::single_barrier(1.0, 5.0, 1.0, 0.0);
        let series = scan_length(&base, 1.0, 30.0, 120).unwrap();
        let last = series.rows.last().unwrap();
        assert!((last.tau - 5.0 / 17.0).abs() < 1e-3);
        for row in &series.rows {
            assert!((row.reflectance - 1.0).abs() < 1e-10);
        }

        let weak = RingSpec::single_barrier(1.0, 1.25, 1.0, 0.0);
        let series = scan_length(&weak, 1.0, 60.0, 120).unwrap();
        assert!((series.rows.last().unwrap().tau - 2.5).abs() < 1e-3);
    }

    #[test]
    fn length_scan_requires_single_barrier_configuration() {
        let base = two_barrier_base(2.0);
        assert!(matches!(
            scan_length(&base, 1.0, 10.0, 10),
            Err(RingError::InvalidSpec(_))
        ));
    }

    #[test]
    fn flux_scan_is_periodic_and_loses_visibility_with_length() {
        let l6 = RingSpec::single_barrier(1.0, 5.0, 6.0, 0.0);
        let (series, vis6) = scan_flux(&l6, 0.0, 2.0, 81).unwrap();
        // Period one in phi: compare i against i + 40 (shift of exactly 1).
        for i in 0..40 {
            assert_abs_diff_eq!(series.rows[i].tau, series.rows[i + 40].tau, epsilon = 1e-8);
        }
        let l9 = RingSpec::single_barrier(1.0, 5.0, 9.0, 0.0);
        let (_, vis9) = scan_flux(&l9, 0.0, 1.0, 41).unwrap();
        assert!(vis9 < vis6, "visibility must shrink with length");
    }

    #[test]
    fn barrier_scan_with_zero_well_matches_the_single_barrier_ring() {
        let base = two_barrier_base(0.0);
        let series = scan_well(&base, 1.0, 6.0, 11).unwrap();
        let single = RingSpec::single_barrier(1.0, 2.0, 1.0, 0.0);
        let reference = scan_length(&single, 6.0, 11.0, 11).unwrap();
        for (a, b) in series.rows.iter().zip(&reference.rows) {
            assert_abs_diff_eq!(a.parameter + 5.0, b.parameter, epsilon = 1e-12);
            assert_abs_diff_eq!(a.tau, b.tau, epsilon = 1e-9);
        }
    }

    #[test]
    fn barrier_scan_requires_two_barriers() {
        let single = RingSpec::single_barrier(1.0, 5.0, 3.0, 0.0);
        assert!(matches!(
            scan_well(&single, 1.0, 5.0, 10),
            Err(RingError::InvalidSpec(_))
        ));
    }

    #[test]
    fn well_saturation_is_independent_of_well_width() {
        let mut saturated = Vec::new();
        for well in [0.0, 1.0, 5.0, 10.0] {
            let series = scan_well(&two_barrier_base(well), 10.0, 20.0, 21).unwrap();
            saturated.push(series.rows.last().unwrap().tau);
        }
        let reference = tau_saturated(1.0, 2.0).unwrap();
        for tau in &saturated {
            assert!(
                (tau - reference).abs() / reference < 0.01,
                "saturation {tau} drifted from {reference}"
            );
        }
    }

    #[test]
    fn resonance_scan_finds_a_peak_with_positive_width() {
        let base = two_barrier_base(0.0);
        let (series, peaks) = scan_resonance(&base, 1.4, 1.75, 351).unwrap();
        assert!(!peaks.is_empty(), "expected a resonance near w = 1.57");
        let peak = &peaks[0];
        assert!((peak.location - 1.57).abs() < 0.02);
        assert!(peak.fwhm > 0.0);
        let sorted_taus = {
            let mut t: Vec<f64> = series.taus().collect();
            t.sort_by(|a, b| a.partial_cmp(b).unwrap());
            t
        };
        let baseline = sorted_taus[sorted_taus.len() / 2];
        assert!(peak.height > baseline);
    }

    #[test]
    fn off_resonance_window_yields_no_peaks() {
        let base = two_barrier_base(0.0);
        let (_, peaks) = scan_resonance(&base, 2.4, 3.4, 101).unwrap();
        assert!(
            peaks.is_empty(),
            "flat window should hold no peaks: {peaks:?}"
        );
    }

    #[test]
    fn point_reports_the_saturated_delay_and_a_tiny_residual() {
        let spec = RingSpec::single_barrier(1.0, 5.0, 30.0, 0.0);
        let result = point(&spec).unwrap();
        assert!((result.r.norm() - 1.0).abs() < 1e-12);
        assert!((result.tau - 5.0 / 17.0).abs() < 1e-5);
        assert!(result.residual < 1e-10);
    }

    #[test]
    fn point_rejects_critical_incidence() {
        let spec = RingSpec::single_barrier(1.0, 1.0, 5.0, 0.0);
        assert!(matches!(
            point(&spec),
            Err(RingError::DegenerateWavevector { .. })
        ));
    }

    #[test]
    fn point_on_a_clean_ring_is_unitary() {
        let spec = RingSpec {
            energy: 1.0,
            v1: 0.0,
            v3: 0.0,
            lb1: 5.0,
            lb3: 0.0,
            well: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            alpha3: 0.0,
        };
        let result = point(&spec).unwrap();
        assert!((result.r.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn clean_ring_resonance_is_reported_as_singular() {
        // At k L = 2 pi n the clean ring holds a bound state degenerate with
        // the lead continuum; the matching matrix is genuinely singular there.
        let spec = RingSpec {
            energy: 1.0,
            v1: 0.0,
            v3: 0.0,
            lb1: 2.0 * std::f64::consts::PI,
            lb3: 0.0,
            well: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            alpha3: 0.0,
        };
        assert!(matches!(
            point(&spec),
            Err(RingError::SingularSystem { .. })
        ));
    }

    #[test]
    fn sweep_errors_carry_the_offending_parameter() {
        // The sweep crosses E = V1 exactly at L... no: make a row invalid by
        // sweeping the circumference across zero is rejected upfront, so use
        // a flux scan whose spec has critical incidence instead.
        let bad = RingSpec::single_barrier(1.0, 1.0, 5.0, 0.0);
        let err = scan_flux(&bad, 0.0, 1.0, 5).unwrap_err();
        match err {
            RingError::AtParameter {
                parameter, source, ..
            } => {
                assert_eq!(parameter, "phi");
                assert!(matches!(*source, RingError::DegenerateWavevector { .. }));
            }
            other => panic!("expected AtParameter, got {other:?}"),
        }
    }

    #[test]
    fn serial_and_parallel_rows_agree_bitwise() {
        let base = RingSpec::single_barrier(1.0, 5.0, 1.0, 0.0);
        let par = scan_length_impl(&base, 1.0, 20.0, 64, None, true).unwrap();
        let ser = scan_length_impl(&base, 1.0, 20.0, 64, None, false).unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn csv_bytes_are_deterministic() {
        let base = RingSpec::single_barrier(1.0, 5.0, 1.0, 0.0);
        let series = scan_length(&base, 1.0, 10.0, 12).unwrap();
        let meta = [
            ("command", "scan-length".to_string()),
            ("energy", format!("{:e}", 1.0)),
        ];
        let mut first = Vec::new();
        write_csv(&mut first, &series, &meta).unwrap();
        let series_again = scan_length(&base, 1.0, 10.0, 12).unwrap();
        let mut second = Vec::new();
        write_csv(&mut second, &series_again, &meta).unwrap();
        assert_eq!(first, second);

        let text = String::from_utf8(first).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# command = scan-length"));
        assert_eq!(lines.next(), Some("# energy = 1e0"));
        assert_eq!(lines.next(), Some("# param,tau,reflectance,phase"));
        assert_eq!(text.lines().count(), 3 + 12);
        let first_row = text.lines().nth(3).unwrap();
        assert!(first_row.starts_with("1e0,"));
    }
}
