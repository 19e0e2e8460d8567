mod common;

use common::*;
use optomech_core::gaussian::{random_physical, rotate_local, symplectic_eigenvalues, RotationAngles};
use optomech_core::protocol::MechState;
use proptest::prelude::*;

fn ok(check: Check) {
    if let Err(e) = check {
        panic!("{e}");
    }
}

#[test]
fn symplectic_spectrum_is_rotation_invariant() {
    ok(symplectic_invariance(1000, 1));
}

#[test]
fn measures_are_local_unitary_invariant() {
    ok(local_unitary_invariance(1000, 2));
}

#[test]
fn negativity_agrees_with_ppt() {
    ok(ppt_consistency(1000, 3));
}

#[test]
fn discord_is_nonnegative() {
    ok(discord_nonnegative(1000, 4));
}

#[test]
fn vanishing_discord_only_for_products() {
    ok(zero_discord_means_product(1000, 5));
}

#[test]
fn tmsv_discord_identity() {
    ok(pure_state_identity());
}

#[test]
fn infimum_matches_brute_force_grid() {
    ok(brute_force_agreement(1000, 6));
}

#[test]
fn infimum_matches_closed_form() {
    ok(closed_form_agreement(1000, 7));
}

#[test]
fn matrix_files_round_trip() {
    ok(io_round_trip(1000, 8));
}

#[test]
fn drift_entries_follow_definition() {
    ok(drift_fidelity(100, 9));
}

#[test]
fn diffusion_is_psd() {
    ok(diffusion_psd(100, 10));
}

#[test]
fn stable_drift_has_physical_steady_state() {
    ok(hurwitz_implies_steady_state(100, 11));
}

#[test]
fn self_consistent_field_is_consistent() {
    ok(self_consistency(100, 12));
}

#[test]
fn trajectories_stay_physical() {
    ok(trajectory_physicality(20, 13));
}

#[test]
fn integrator_is_fifth_order() {
    ok(integrator_order());
}

#[test]
fn homogeneous_flow_is_linear() {
    ok(homogeneous_linearity(10, 14));
}

#[test]
fn steady_state_is_independent_of_initial_state() {
    ok(steady_state_independence(20, 15));
}

#[test]
fn discord_survives_demon_rotations() {
    ok(discord_rotation_invariance(200, 16));
}

#[test]
fn thermal_pair_creates_no_cross_entanglement_alone() {
    let scn = scenario(12.0, 1.0, false, 0.4).with_mech_init(MechState::Thermal(None), false);
    ok(block_diagonal_no_creation(&scn));
}

#[test]
fn demon_sampling_is_deterministic() {
    ok(determinism(4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_keeps_symplectic_spectrum(seed in any::<u64>(), n in 1usize..5, theta in prop::collection::vec(0.0..6.3f64, 4)) {
        let v = random_physical(&mut rng(seed), n);
        let rot = rotate_local(&v, &RotationAngles::new(theta[..n].to_vec()).unwrap()).unwrap();
        let a = symplectic_eigenvalues(&v).unwrap();
        let b = symplectic_eigenvalues(&rot).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-10 * x.max(1.0));
        }
    }

    #[test]
    fn random_states_satisfy_closed_form(seed in any::<u64>()) {
        let v = random_physical(&mut rng(seed), 2);
        let s = symplectic_eigenvalues(&v).unwrap();
        let (lo, hi) = optomech_core::gaussian::two_mode_spectrum_closed_form(&v).unwrap();
        prop_assert!((s.max() - hi).abs() <= 1e-7 * hi);
        prop_assert!((s.min() - lo).abs() <= 1e-7 * hi);
    }

    #[test]
    fn random_states_round_trip(seed in any::<u64>()) {
        prop_assert!(io_round_trip(1, seed).is_ok());
    }
}
