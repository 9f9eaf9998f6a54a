use kdac::commands::timing::time_activations;
use kdac::{list_registry, ActivationKind};

#[test]
fn kdac_costs_more_than_relu_and_all_are_listed() {
    let rows = time_activations(&list_registry(), 10_000_000);
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.median_ns > 0.0 && r.p95_ns >= r.median_ns));
    let ns = |tag: &str| rows.iter().find(|r| r.activation.tag() == tag).unwrap().median_ns;
    assert!(ns("kdac") > ns("relu"), "{rows:?}");
}

// Consecutive-run agreement depends on the host keeping a steady clock; on
// shared single-core machines whole runs can slow down together.
#[test]
#[ignore = "wall-clock stability; run with --ignored on a quiet machine"]
fn consecutive_runs_agree_within_20_percent() {
    let kinds = [ActivationKind::Relu, ActivationKind::default_for("kdac").unwrap()];
    let first = time_activations(&kinds, 10_000_000);
    let second = time_activations(&kinds, 10_000_000);
    for (a, b) in first.iter().zip(&second) {
        let spread = (a.median_ns - b.median_ns).abs() / a.median_ns.min(b.median_ns);
        assert!(
            spread < 0.2,
            "{} medians {} and {}",
            a.activation.tag(),
            a.median_ns,
            b.median_ns
        );
    }
}
