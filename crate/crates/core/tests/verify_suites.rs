use chordflow::verify::{calibrate_orientation, run_suite, Status, SUITE_NAMES};
use chordflow::Error;

#[test]
fn every_golden_suite_passes() {
    for name in SUITE_NAMES {
        let report = run_suite(name).unwrap();
        let failed: Vec<_> = report.checks.iter().filter(|c| c.status == Status::Fail).collect();
        assert!(failed.is_empty(), "{name}: {failed:#?}");
        assert!(!report.checks.is_empty());
    }
}

#[test]
fn strip_calibration_passes() {
    let c = calibrate_orientation();
    assert_eq!(c.status, Status::Pass, "{c:?}");
}

#[test]
fn unknown_suite_lists_valid_names() {
    match run_suite("torus") {
        Err(Error::InvalidParams(msg)) => {
            assert!(msg.contains("unknown suite 'torus'"));
            assert!(msg.contains("all, flat, strip"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn skipped_checks_carry_a_reason() {
    let report = run_suite("sphere").unwrap();
    let skipped: Vec<_> = report.checks.iter().filter(|c| c.status == Status::Skipped).collect();
    assert!(!skipped.is_empty());
    for c in skipped {
        assert!(c.note.is_some() && c.max_residual.is_none(), "{c:?}");
    }
}
