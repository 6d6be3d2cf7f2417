use std::collections::BTreeMap;
use std::fs;

use mns_core::aog::InterpretationKind;
use mns_core::generator::fig1_problem;
use mns_core::render::RenderSpec;
use mns_core::solver::Mode;
use mns_harness::bench::{cmd_solve, RunConfig};
use mns_harness::dataset::{self, cmd_gen, generate_all, write_dataset, DatasetError, GenConfig, GenFilters};
use mns_harness::stats::{cmd_stats, GroupBy};

fn cfg(count: usize, seed: u64) -> GenConfig {
    GenConfig { count, seed, filters: GenFilters::default(), render: RenderSpec::default(), png: false }
}

#[test]
fn empty_build_has_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ds");
    assert!(cmd_gen(&cfg(0, 5), &out).unwrap().is_empty());
    assert_eq!(fs::read_to_string(out.join("manifest.jsonl")).unwrap(), "");
    assert!(dataset::load(&out).unwrap().problems.is_empty());
}

#[test]
fn builds_are_balanced_over_cells() {
    let problems = generate_all(&cfg(6_000, 100)).unwrap();
    let mut cells: BTreeMap<(String, InterpretationKind), usize> = BTreeMap::new();
    for p in &problems {
        *cells.entry((p.spec.problem_type.name().to_string(), p.spec.algebra.interpretation.kind())).or_default() += 1;
    }
    assert_eq!(cells.len(), 6);
    assert!(cells.values().all(|&c| c == 1_000), "{cells:?}");
}

#[test]
fn failed_build_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ds");
    let mut c = cfg(10, 0);
    c.filters.integer_count = Some(1);
    assert!(matches!(cmd_gen(&c, &out), Err(DatasetError::Generate { .. })));
    assert!(!out.exists());
    assert!(!dir.path().join("ds.partial").exists());
}

#[test]
fn missing_and_corrupt_datasets() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(dataset::load(&dir.path().join("nope")), Err(DatasetError::MissingDataset(_))));
    let out = dir.path().join("ds");
    let manifest = cmd_gen(&cfg(5, 9), &out).unwrap();
    fs::write(out.join(&manifest[2].path), "{}").unwrap();
    let data = dataset::load(&out).unwrap();
    assert_eq!(data.problems.len(), 4);
    assert_eq!(data.corrupt.len(), 1);
}

#[test]
fn fig1_fixture_is_solved_correctly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1");
    write_dataset(&[fig1_problem()], &RenderSpec::default(), true, &out).unwrap();
    assert!(out.join("panels/fig1_panel2.png").is_file());
    let data = dataset::load(&out).unwrap();
    let records = cmd_solve(&data.problems, &RunConfig::new(vec![Mode::Pure, Mode::Context], vec![100]).unwrap());
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.correct && r.answer == Some(59)));
}

#[test]
fn accuracy_grows_with_budget() {
    let problems = generate_all(&cfg(600, 1)).unwrap();
    let records = cmd_solve(&problems, &RunConfig::new(vec![Mode::Pure, Mode::Context], vec![10, 100]).unwrap());
    assert_eq!(records.len(), 600 * 4);
    let table = cmd_stats(&records, GroupBy::Budget).unwrap();
    for mode in ["pure", "context"] {
        let a10 = table.cell(mode, "10").unwrap().accuracy().unwrap();
        let a100 = table.cell(mode, "100").unwrap().accuracy().unwrap();
        assert!(a10 <= a100, "{mode}: {a10} > {a100}");
    }
}

#[test]
fn budgets_must_ascend() {
    assert!(RunConfig::new(vec![Mode::Pure], vec![100, 10]).is_err());
    assert!(RunConfig::new(vec![Mode::Pure], vec![0]).is_err());
    assert!(RunConfig::new(vec![Mode::Pure], vec![]).is_err());
    assert!(RunConfig::new(vec![], vec![1]).is_err());
}

#[test]
fn end_to_end_csv_is_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("ds");
        cmd_gen(&cfg(120, 77), &out).unwrap();
        let data = dataset::load(&out).unwrap();
        let records = cmd_solve(&data.problems, &RunConfig::new(vec![Mode::Pure, Mode::Context], vec![50]).unwrap());
        cmd_stats(&records, GroupBy::Cell).unwrap().to_csv()
    };
    assert_eq!(run(), run());
}
