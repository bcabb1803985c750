use rsg_core::verify::{run_suite, Suite};

fn assert_suite(s: Suite) {
    let r = run_suite(s, 7).unwrap();
    for c in &r.checks {
        assert!(c.cases > 0, "{} ran no cases", c.name);
        assert!(c.passed(), "{}: {} of {} failed, e.g. {:?}", c.name, c.failures, c.cases, c.counterexamples);
    }
}

#[test]
fn prox_suite_passes() {
    assert_suite(Suite::Prox);
}

#[test]
fn lemmas_suite_passes() {
    assert_suite(Suite::Lemmas);
}

#[test]
fn oracle_suite_passes() {
    assert_suite(Suite::Oracle);
}

#[test]
fn zoo_suite_passes() {
    assert_suite(Suite::Zoo);
}
