mod common;

use leo_handover::channel::{self, ChannelConfig, LinkSample};
use leo_handover::geometry::{self, GroundPosition, SatelliteState};
use leo_handover::handover::{self, AssociationState};
use leo_handover::streams::{seeded_stream, Purpose};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn sample(rss: f64, distance: f64, elevation: f64) -> LinkSample {
    LinkSample { distance, elevation, pl_total: 0.0, rss, sinr: 0.0 }
}

#[test]
fn mobility_containment_and_speed_bounds() {
    assert_eq!(common::mobility_violations(100, 10_000), 0);
}

#[test]
fn placement_is_uniform_over_disc() {
    let (stats, critical) = common::placement_ks(100_000);
    for d in stats {
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }
}

#[test]
fn shadow_fading_spread_matches_sigma() {
    let n = 100_000;
    for (purpose, sigma) in [(Purpose::ShadowLos, 3.5), (Purpose::ShadowNlos, 15.5)] {
        let mut rng = seeded_stream(3, 1, 7, purpose);
        let xs: Vec<f64> = (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((std / sigma - 1.0).abs() < 0.02, "{std} vs {sigma}");
    }
}

proptest! {
    #[test]
    fn sinr_invariant_to_common_db_shift(
        serving in -150.0f64..-50.0,
        interferers in proptest::collection::vec(-150.0f64..-50.0, 0..4),
        noise in -140.0f64..-100.0,
        shift in -50.0f64..50.0,
    ) {
        let base = channel::sinr(serving, &interferers, noise).unwrap();
        let moved: Vec<f64> = interferers.iter().map(|i| i + shift).collect();
        let shifted = channel::sinr(serving + shift, &moved, noise + shift).unwrap();
        prop_assert!((base - shifted).abs() < 1e-9);
    }

    #[test]
    fn ttt_counter_resets_and_fires_on_full_run(
        conditions in proptest::collection::vec(any::<bool>(), 1..200),
        ttt_steps in 1u32..=10,
        margin in 0.0f64..5.0,
    ) {
        let (dt, ttt) = (10u32, 10 * ttt_steps);
        let mut state = AssociationState::new(0, 2);
        let mut run = 0u32;
        for cond in conditions {
            let neighbour = if cond { -100.0 + margin + 0.5 } else { -100.0 + margin };
            let samples = [sample(-100.0, 0.0, 0.0), sample(neighbour, 0.0, 0.0)];
            let fired = handover::evaluate_measurement(&mut state, &samples, margin, ttt, dt);
            run = if cond { run + 1 } else { 0 };
            prop_assert_eq!(state.ttt_elapsed[1], run * dt);
            prop_assert_eq!(fired.is_some(), run >= ttt_steps);
            if fired.is_some() {
                state.apply_handover(1, 0.0);
                prop_assert!(state.ttt_elapsed.iter().all(|&e| e == 0));
                state = AssociationState::new(0, 2);
                run = 0;
            }
        }
    }

    #[test]
    fn larger_offsets_trigger_less(
        d in proptest::collection::vec(600e3f64..700e3, 3),
        el in proptest::collection::vec(10.0f64..90.0, 3),
        serving in 0usize..3,
        lo in 0.0f64..10.0,
        extra in 0.0f64..10.0,
    ) {
        let samples: Vec<LinkSample> = (0..3).map(|i| sample(0.0, d[i], el[i])).collect();
        let state = AssociationState::new(serving, 3);
        let hi = lo + extra;
        if handover::evaluate_distance(&state, &samples, hi * 1000.0).is_some() {
            prop_assert!(handover::evaluate_distance(&state, &samples, lo * 1000.0).is_some());
        }
        if handover::evaluate_elevation(&state, &samples, hi).is_some() {
            prop_assert!(handover::evaluate_elevation(&state, &samples, lo).is_some());
        }
    }

    #[test]
    fn elevation_and_slant_monotone_in_ground_distance(a in 0.0f64..2.0e6, b in 0.0f64..2.0e6) {
        let (near, far) = if a <= b { (a, b) } else { (b, a) };
        let sat = |x| SatelliteState { along_track: x, altitude: 600e3, speed: 0.0 };
        let ue = GroundPosition::ORIGIN;
        prop_assert!(geometry::elevation_angle(ue, &sat(near)) >= geometry::elevation_angle(ue, &sat(far)));
        prop_assert!(geometry::slant_distance(ue, &sat(near)) <= geometry::slant_distance(ue, &sat(far)) * (1.0 + 1e-12));
    }

    #[test]
    fn path_loss_grows_with_distance_in_a_row(el in 10.0f64..90.0, d1 in 600e3f64..2.0e6, d2 in 600e3f64..2.0e6) {
        let cfg = ChannelConfig::default();
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let pl = |d| channel::total_path_loss(d, el, 0.0, 0.0, &cfg).unwrap();
        prop_assert!(pl(near) <= pl(far));
    }
}
