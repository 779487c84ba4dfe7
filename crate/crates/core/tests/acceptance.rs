//! Acceptance battery: one test per headline criterion, each printing its
//! pass/fail line. Bounds are the pinned defaults (stages 8, category
//! fragment |U| ≤ 3 with depths ≤ 4, index sets ≤ 3, every poset ≤ 5 points).

use guarded_lab::suite::{self, Check, SuiteConfig};

fn gate(check: Check) {
    println!("{check}");
    assert!(check.pass, "{check}");
}

#[test]
fn criterion_01_loeb_soundness() {
    gate(suite::loeb_soundness());
}

#[test]
fn criterion_02_loeb_necessity() {
    gate(suite::loeb_necessity());
}

#[test]
fn criterion_03_fixpoint_uniqueness() {
    gate(suite::fixpoint_uniqueness(&SuiteConfig::default()));
}

#[test]
fn criterion_04_stream_programs() {
    gate(suite::stream_programs(&SuiteConfig::default()));
}

#[test]
fn criterion_05_force_iso() {
    gate(suite::force_iso(&SuiteConfig::default()));
}

#[test]
fn criterion_06_clock_irrelevance() {
    gate(suite::clock_irrelevance(&SuiteConfig::default()));
}

#[test]
fn criterion_07_classifying_correspondence() {
    gate(suite::classifying_correspondence());
}

#[test]
fn criterion_08_bag_universal_property() {
    gate(suite::bag_universal_property(&SuiteConfig::default()));
}

#[test]
fn criterion_09_clock_categories() {
    gate(suite::clock_category_structure());
}

#[test]
fn criterion_10_plump_ordering() {
    gate(suite::plump_ordering());
}

#[test]
fn criterion_11_global_adequacy() {
    gate(suite::global_adequacy());
}

#[test]
fn suite_runner_agrees_with_individual_checks() {
    let checks = suite::run_suite(&SuiteConfig::default());
    assert_eq!(checks.len(), 11);
    for c in &checks {
        println!("{c}");
    }
    assert!(checks.iter().all(|c| c.pass));
    let names: Vec<&str> = checks.iter().map(|c| c.name).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted, "reports are merged deterministically by name");
}
