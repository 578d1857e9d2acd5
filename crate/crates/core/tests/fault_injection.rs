use hypercone_core::acceptance::{run_criterion, FaultInjection};

#[test]
fn flipped_discriminant_sign_fails_gr2_only() {
    let faults = FaultInjection {
        flip_discriminant_sign: true,
    };
    assert!(!run_criterion("GR-2", 7, faults).unwrap().passed);
    assert!(run_criterion("GR-1", 7, faults).unwrap().passed);
    assert!(
        run_criterion("GR-2", 7, FaultInjection::default())
            .unwrap()
            .passed
    );
}
