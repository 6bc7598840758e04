//! Attack scenarios against the signing defense.

use mavkit_core::gcs::RuleId;
use mavkit_core::threat::{
    full_grid, run_scenario, score_matrix, Attack, AttackScenario, MissionResult, ReplayFrame,
    Target,
};
use mavkit_core::transport::SimLinkConfig;

const ACTIVE: [Attack; 3] = [Attack::Replay, Attack::Tamper, Attack::InjectCommand];

fn lossless(attack: Attack, signing: bool, seed: u64) -> AttackScenario {
    AttackScenario {
        link: SimLinkConfig::lossless(seed),
        ..AttackScenario::new(attack, signing, seed)
    }
}

#[test]
fn signing_accepts_no_attacker_frames_over_20_seeds() {
    for seed in 1..=20 {
        for attack in ACTIVE {
            let r = run_scenario(&lossless(attack, true, seed)).unwrap();
            assert!(
                r.frames_injected > 0,
                "{attack} seed {seed} injected nothing"
            );
            assert_eq!(r.frames_accepted_by_victim, 0, "{attack} seed {seed}");
            assert_eq!(
                r.mission_outcome,
                MissionResult::Completed,
                "{attack} seed {seed}"
            );
            assert_eq!(r.waypoints_reached, vec![1, 2, 3, 4]);
        }
    }
}

#[test]
fn without_signing_every_run_is_diverted() {
    for seed in 1..=20 {
        for attack in ACTIVE {
            let r = run_scenario(&lossless(attack, false, seed)).unwrap();
            assert!(r.frames_accepted_by_victim > 0, "{attack} seed {seed}");
            // Flying into the ground is the most complete diversion.
            assert!(
                matches!(
                    r.mission_outcome,
                    MissionResult::Diverted | MissionResult::Crashed
                ),
                "{attack} seed {seed}: {}",
                r.mission_outcome
            );
            assert!(!r.defended);
        }
    }
}

#[test]
fn replayed_arm_is_flagged_once() {
    let sc = AttackScenario {
        replay_frame: ReplayFrame::Arm,
        ..lossless(Attack::Replay, true, 1)
    };
    let r = run_scenario(&sc).unwrap();
    assert_eq!(r.frames_accepted_by_victim, 0);
    assert_eq!(
        r.count_alerts(RuleId::TimestampAnomaly),
        r.frames_injected as usize
    );
    assert_eq!(r.frames_injected, 1);
}

#[test]
fn eavesdropping_reads_everything_either_way() {
    for signing in [false, true] {
        let r = run_scenario(&AttackScenario::new(Attack::Eavesdrop, signing, 2)).unwrap();
        assert_eq!(r.decoded_fraction, Some(1.0));
        assert_eq!(r.frames_injected, 0);
        assert_eq!(r.mission_outcome, MissionResult::Completed);
        assert!(!r.defended && r.matches_expectation);
    }
}

#[test]
fn spoofed_positions_are_rejected_by_a_signing_gcs() {
    let off = run_scenario(&AttackScenario::new(Attack::SpoofPosition, false, 3)).unwrap();
    let on = run_scenario(&AttackScenario::new(Attack::SpoofPosition, true, 3)).unwrap();
    assert_eq!(off.target, Target::Gcs);
    assert!(off.frames_accepted_by_victim > 0);
    assert_eq!(on.frames_accepted_by_victim, 0);
    // The last forged frame may still be in flight when the run ends.
    let flagged = on.count_alerts(RuleId::TimestampAnomaly) as u64;
    assert!(flagged + 1 >= on.frames_injected && flagged <= on.frames_injected);
}

#[test]
fn flood_is_not_stopped_by_signing() {
    for signing in [false, true] {
        let r = run_scenario(&AttackScenario::new(Attack::Flood, signing, 4)).unwrap();
        assert!(!r.defended, "signing {signing}: {}", r.mission_outcome);
        assert!(r.count_alerts(RuleId::FloodRate) >= 1);
    }
}

#[test]
fn accepted_never_exceeds_injected() {
    for sc in full_grid(5) {
        let r = run_scenario(&sc).unwrap();
        assert!(
            r.frames_accepted_by_victim <= r.frames_injected,
            "{}",
            sc.attack
        );
    }
}

#[test]
fn runs_are_deterministic() {
    let sc = AttackScenario::new(Attack::Tamper, false, 9);
    let a = run_scenario(&sc).unwrap();
    let b = run_scenario(&sc).unwrap();
    assert_eq!(a, b);
}

#[test]
fn matrix_at_seed_1_matches_the_table() {
    // Independent restatement of which cells signing should defend.
    let expected = |a: Attack, signing: bool| match a {
        Attack::Eavesdrop | Attack::Flood => false,
        Attack::Replay | Attack::Tamper | Attack::InjectCommand | Attack::SpoofPosition => signing,
    };
    let m = score_matrix(&full_grid(1)).unwrap();
    assert_eq!(m.cells.len(), 12);
    for c in &m.cells {
        assert_eq!(
            c.defended,
            expected(c.attack, c.signing),
            "{} signing={}",
            c.attack,
            c.signing
        );
    }
    assert!(m.all_match());
    assert!(m.render_text().ends_with("matrix: PASS\n"));
}

#[test]
fn scenario_files_drive_runs() {
    let text = "attack = replay\nsigning = on\nseed = 11\n# zero loss\ndrop = 0\nduration = 150\n";
    let sc = AttackScenario::parse(text).unwrap();
    assert_eq!(
        (sc.attack, sc.signing, sc.seed, sc.target),
        (Attack::Replay, true, 11, Target::Vehicle)
    );
    let r = run_scenario(&sc).unwrap();
    assert!(r.matches_expectation);
    assert!(AttackScenario::parse("attack = replay\ntarget = gcs\n").is_err());
    assert!(AttackScenario::parse("attack = replay\nbogus = 1\n").is_err());
}
