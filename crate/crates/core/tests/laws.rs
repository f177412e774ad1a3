use bayeslens::laws::{run_law, CaseGen, InstanceMix, Law, Mutation};
use bayeslens::Error;

fn gen(instance_mix: InstanceMix, cases: usize) -> CaseGen {
    CaseGen {
        instance_mix,
        cases,
        ..CaseGen::default()
    }
}

#[test]
fn equal_generators_give_equal_reports() {
    let g = gen(InstanceMix::Both, 20);
    for law in ["bayes-joint", "S-functorial", "copy-inverse"] {
        assert_eq!(run_law(law, &g, None).unwrap(), run_law(law, &g, None).unwrap());
    }
}

#[test]
fn catalogue_names_round_trip() {
    assert_eq!(Law::ALL.len(), 16);
    for law in Law::ALL {
        assert_eq!(law.name().parse::<Law>().unwrap(), *law);
    }
}

#[test]
fn unknown_laws_are_rejected() {
    let err = run_law("no-such-law", &CaseGen::default(), None).unwrap_err();
    assert!(matches!(err, Error::UnknownLaw(name) if name == "no-such-law"));
}

#[test]
fn skipped_symmetrisation_is_caught() {
    let g = CaseGen {
        mutation: Some(Mutation::SkipSymmetrization),
        ..gen(InstanceMix::Gaussian, 50)
    };
    let report = run_law("bayes-joint", &g, None).unwrap();
    assert!(!report.passed);
    assert!(report.max_residual > report.instances[0].tolerance);
    let shrunk = report.instances[0].shrunk.as_ref().expect("a shrunk case");
    assert!(shrunk.max_dim <= g.max_dim);
    // The untouched harness passes on the same stream.
    assert!(run_law("bayes-joint", &gen(InstanceMix::Gaussian, 50), None).unwrap().passed);
}

#[test]
fn failures_track_residuals() {
    // A zero tolerance forces floating-point laws to report failures.
    let report = run_law("bayes-joint", &gen(InstanceMix::Gaussian, 10), Some(0.0)).unwrap();
    for seg in &report.instances {
        assert_eq!(seg.failures.is_empty(), seg.max_residual <= seg.tolerance);
    }
    assert_eq!(report.passed, report.failures.is_empty());
}

#[test]
fn sparse_inverse_uniqueness() {
    let g = CaseGen {
        sparsity: 0.5,
        ..gen(InstanceMix::Finite, 200)
    };
    let report = run_law("inverse-uniqueness", &g, None).unwrap();
    assert!(report.passed && report.max_residual <= 1e-9, "{report:?}");
}

#[test]
fn gaussian_bayes_joint_within_tolerance() {
    let report = run_law("bayes-joint", &gen(InstanceMix::Gaussian, 100), None).unwrap();
    assert!(report.passed && report.max_residual <= 1e-8, "{report:?}");
}

#[test]
fn comonoid_laws_are_exact() {
    let report = run_law("comonoid", &gen(InstanceMix::Both, 50), None).unwrap();
    assert!(report.passed);
    assert_eq!(report.max_residual, 0.0);
}
