use std::path::{Path, PathBuf};

use putforge_core::config::Settings;
use putforge_core::fixtures::verify_fixture;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn verify(name: &str, parallel_rows: bool) {
    let ws = tempfile::tempdir().unwrap();
    let outcome = verify_fixture(
        &fixture(name),
        Settings {
            workspace: Some(ws.path().to_path_buf()),
            parallel_rows: Some(parallel_rows),
            ..Settings::default()
        },
    )
    .unwrap();
    assert!(outcome.passed(), "{name}: {:#?}", outcome.mismatches);
}

#[test]
fn radio_form_matches_ground_truth() {
    verify("radio_form", false);
}

#[test]
fn codec_matches_ground_truth() {
    verify("codec", false);
}

#[test]
fn text_bag_matches_ground_truth() {
    verify("text_bag", false);
}

#[test]
fn sideeffect_matches_ground_truth() {
    verify("sideeffect", false);
}

#[test]
fn fixtures_hold_under_parallel_rows() {
    for name in ["radio_form", "codec", "text_bag", "sideeffect"] {
        verify(name, true);
    }
}

#[test]
fn every_category_and_the_ill_formed_filter_are_witnessed() {
    let mut seen = std::collections::BTreeSet::new();
    let mut excluded = 0;
    for name in ["radio_form", "codec", "text_bag", "sideeffect"] {
        let truth = putforge_core::fixtures::GroundTruth::load(&fixture(name)).unwrap();
        seen.extend(truth.puts.values().map(|p| p.category));
        excluded += truth.excluded.len();
    }
    assert_eq!(seen.len(), 4);
    assert!(excluded > 0);
}
