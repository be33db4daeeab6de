//! Property suites for the solver and its analytic references.

use abring::analytic::{reflection_closed_form, SingleBarrierSpec};
use abring::phase_time::{phase_time, unwrap_phases};
use abring::ring::{total_flux_phase, wavevector, RingSpec};
use abring::solver::{assemble, reflection, residual, solve};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn valid_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..10.0, 0.0f64..10.0).prop_filter("critical incidence", |(e, v)| (e - v).abs() > 1e-6)
}

prop_compose! {
    fn arb_spec()(
        (energy, v1) in valid_pair(),
        v3 in 0.0f64..10.0,
        lb1 in 0.0f64..30.0,
        lb3 in 0.0f64..30.0,
        well in 0.0f64..30.0,
        alpha1 in 0.0f64..(2.0 * PI),
        alpha2 in 0.0f64..(2.0 * PI),
        alpha3 in 0.0f64..(2.0 * PI),
    ) -> RingSpec {
        RingSpec { energy, v1, v3, lb1, lb3, well, alpha1, alpha2, alpha3 }
    }
}

fn usable(spec: &RingSpec) -> bool {
    (spec.energy - spec.v3).abs() > 1e-6 && spec.circumference() > 1e-2
}

prop_compose! {
    fn arb_single_barrier()(
        energy in 0.2f64..6.0,
        gap in 0.05f64..8.0,
        length in 0.01f64..12.0,
        alpha in 0.0f64..(2.0 * PI),
    ) -> (RingSpec, SingleBarrierSpec) {
        let v1 = energy + gap;
        (
            RingSpec::single_barrier(energy, v1, length, alpha),
            SingleBarrierSpec::new(energy, v1, length, alpha).unwrap(),
        )
    }
}

proptest! {
    #[test]
    fn wavevector_squares_back_to_the_energy_gap(
        (energy, potential) in valid_pair()
    ) {
        let q = wavevector(energy, potential).unwrap().value();
        let gap = energy - potential;
        let square = q * q;
        let tolerance = 4.0 * gap.abs().max(f64::MIN_POSITIVE) * f64::EPSILON;
        prop_assert!((square.re - gap).abs() <= tolerance);
        prop_assert!(square.im == 0.0);
    }

    #[test]
    fn flux_phase_is_permutation_invariant(
        a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0
    ) {
        // Permutations reassociate the sum, so allow a few ulps.
        let reference = total_flux_phase(a, b, c);
        let tolerance = 4.0 * f64::EPSILON * (a.abs() + b.abs() + c.abs()).max(f64::MIN_POSITIVE);
        prop_assert!((total_flux_phase(b, c, a) - reference).abs() <= tolerance);
        prop_assert!((total_flux_phase(c, a, b) - reference).abs() <= tolerance);
        prop_assert!((total_flux_phase(b, a, c) - reference).abs() <= tolerance);
    }

    #[test]
    fn reflection_is_unitary_with_tiny_residual(spec in arb_spec()) {
        prop_assume!(usable(&spec));
        let solution = solve(&assemble(&spec).unwrap()).unwrap();
        prop_assert!((solution.r.norm() - 1.0).abs() < 1e-10);
        prop_assert!(residual(&solution, &spec) < 1e-10);
    }

    #[test]
    fn reflection_depends_on_flux_only_through_the_sum(
        spec in arb_spec(),
        split1 in 0.0f64..1.0,
        split2 in 0.0f64..1.0,
    ) {
        prop_assume!(usable(&spec));
        let total = spec.total_flux_phase();
        let reference = reflection(&spec).unwrap();
        let first = total * split1;
        let second = (total - first) * split2;
        let repartitioned = RingSpec {
            alpha1: first,
            alpha2: second,
            alpha3: total - first - second,
            ..spec
        };
        let r = reflection(&repartitioned).unwrap();
        prop_assert!((r - reference).norm() < 1e-12);
    }

    #[test]
    fn reflection_is_flux_periodic(spec in arb_spec()) {
        prop_assume!(usable(&spec));
        let reference = reflection(&spec).unwrap();
        let shifted = RingSpec { alpha1: spec.alpha1 + 2.0 * PI, ..spec };
        let r = reflection(&shifted).unwrap();
        prop_assert!((r - reference).norm() < 1e-12);
    }

    #[test]
    fn single_barrier_reflection_is_even_in_flux(
        (ring, _) in arb_single_barrier()
    ) {
        let plus = reflection(&ring).unwrap();
        let minus = reflection(&RingSpec { alpha1: -ring.alpha1, ..ring }).unwrap();
        prop_assert!((plus - minus).norm() < 1e-12);
    }

    #[test]
    fn solver_matches_the_closed_form(
        (ring, single) in arb_single_barrier()
    ) {
        let numeric = reflection(&ring).unwrap();
        let closed = reflection_closed_form(&single);
        prop_assert!(
            (numeric - closed).norm() < 1e-8,
            "mismatch {:e} at {:?}",
            (numeric - closed).norm(),
            single
        );
    }

    #[test]
    fn halving_the_step_lands_within_the_richardson_estimate(
        (ring, single) in arb_single_barrier(),
        step_exponent in -4.0f64..-2.0,
    ) {
        prop_assume!(single.length > 0.1);
        let provider = |probe: &RingSpec| {
            let s = SingleBarrierSpec::new(probe.energy, probe.v1, probe.circumference(), probe.alpha1)?;
            Ok(reflection_closed_form(&s))
        };
        let h = ring.energy * 10f64.powf(step_exponent);
        let coarse = phase_time(&ring, h, provider).unwrap();
        let fine = phase_time(&ring, h / 2.0, provider).unwrap();
        // Only meaningful when no automatic halving kicked in.
        prop_assume!(coarse.step == h && fine.step == h / 2.0);
        prop_assert!(
            (fine.tau - coarse.tau).abs() <= 4.0 * coarse.error_estimate + 1e-10,
            "fine {} coarse {} estimate {}",
            fine.tau,
            coarse.tau,
            coarse.error_estimate
        );
    }

    #[test]
    fn unwrapped_phases_are_continuous(
        phases in prop::collection::vec(-PI..PI, 1..40)
    ) {
        let unwrapped = unwrap_phases(&phases);
        prop_assert_eq!(unwrapped.len(), phases.len());
        prop_assert_eq!(unwrapped[0], phases[0]);
        for pair in unwrapped.windows(2) {
            let delta = pair[1] - pair[0];
            prop_assert!(delta > -PI - 1e-12 && delta <= PI + 1e-12);
        }
        // Each output differs from its input by an exact multiple of 2 pi.
        for (raw, cooked) in phases.iter().zip(&unwrapped) {
            let turns = (cooked - raw) / (2.0 * PI);
            prop_assert!((turns - turns.round()).abs() < 1e-9);
        }
    }
}

#[test]
fn reflection_handles_mixed_propagating_and_evanescent_segments() {
    // Propagating well between opaque barriers, nonzero flux.
    let spec = RingSpec {
        energy: 1.0,
        v1: 2.0,
        v3: 2.0,
        lb1: 8.0,
        lb3: 5.0,
        well: 4.4,
        alpha1: 0.3,
        alpha2: 1.9,
        alpha3: 0.2,
    };
    let solution = solve(&assemble(&spec).unwrap()).unwrap();
    assert!((solution.r.norm() - 1.0).abs() < 1e-12);
    assert!(residual(&solution, &spec) < 1e-12);
    let _ = Complex64::new(0.0, 0.0);
}
