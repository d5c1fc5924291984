mod common;

use std::fs;
use std::path::Path;

use groupchoice::dataset::{
    generate_synthetic, ingest, ranks_to_ratings, sparsify, square_ratings, write_csvs, DatasetError,
    SyntheticSchemeSpec,
};
use groupchoice::{Group, RatingMatrix};

fn write(dir: &Path, ratings: &str, groups: &str, choices: &str) {
    fs::write(dir.join("ratings.csv"), ratings).unwrap();
    fs::write(dir.join("groups.csv"), groups).unwrap();
    fs::write(dir.join("choices.csv"), choices).unwrap();
}

fn load(dir: &Path) -> Result<groupchoice::Dataset, DatasetError> {
    ingest(dir.join("ratings.csv"), dir.join("groups.csv"), dir.join("choices.csv"))
}

const RATINGS: &str = "user_id,option_id,rating\na,1,5\na,2,7\nb,1,3\nb,2,9\n";
const GROUPS: &str = "group_id,user_id\ng1,a\ng1,b\n";
const CHOICES: &str = "group_id,option_id\ng1,2\n";

#[test]
fn ingests_a_small_dataset() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), RATINGS, GROUPS, CHOICES);
    let ds = load(dir.path()).unwrap();
    assert_eq!(ds.n_options(), 2);
    assert_eq!(ds.choices(), &[1]);
    assert_eq!(ds.ratings().get(1, 1), Some(9.0));
    assert_eq!(ds.user_ids(), &["a".to_string(), "b".to_string()]);
}

#[test]
fn out_of_range_rating_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "user_id,option_id,rating\na,1,5\na,2,11\nb,1,3\nb,2,9\n",
        GROUPS,
        CHOICES,
    );
    match load(dir.path()) {
        Err(DatasetError::Range { line, value, .. }) => {
            assert_eq!(line, 3);
            assert_eq!(value, 11.0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn malformed_inputs_are_rejected() {
    let cases = [
        ("user_id,option_id,score\na,1,5\n", GROUPS, CHOICES),
        ("user_id,option_id,rating\na,1,x\nb,1,3\n", GROUPS, CHOICES),
        ("user_id,option_id,rating\na,1,5\na,1,6\nb,1,3\n", GROUPS, CHOICES),
        (RATINGS, GROUPS, "group_id,option_id\ng2,1\n"),
        (RATINGS, GROUPS, "group_id,option_id\ng1,3\n"),
        (RATINGS, GROUPS, "group_id,option_id\ng1,1\ng1,2\n"),
        (RATINGS, "group_id,user_id\ng1,a\ng1,c\n", CHOICES),
        (RATINGS, "group_id,user_id\ng1,a\n", CHOICES),
    ];
    for (i, (r, g, c)) in cases.into_iter().enumerate() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), r, g, c);
        assert!(load(dir.path()).is_err(), "case {i} was accepted");
    }
}

#[test]
fn missing_choice_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), RATINGS, GROUPS, "group_id,option_id\n");
    assert!(matches!(load(dir.path()), Err(DatasetError::MissingChoice(g)) if g == "g1"));
}

#[test]
fn csv_round_trip() {
    let ds = generate_synthetic(
        &SyntheticSchemeSpec {
            seed: 2,
            ..Default::default()
        },
        30,
        10,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_csvs(&ds, dir.path()).unwrap();
    let back = load(dir.path()).unwrap();
    assert_eq!(back.choices(), ds.choices());
    assert_eq!(back.groups(), ds.groups());
    for u in 0..ds.ratings().n_users() {
        for o in 0..10 {
            let (a, b) = (ds.ratings().get(u, o).unwrap(), back.ratings().get(u, o).unwrap());
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn rank_lists_become_ratings() {
    let m = ranks_to_ratings(&[vec![8usize, 1, 3], vec![]], 10).unwrap();
    assert_eq!(m.get(0, 8), Some(10.0));
    assert_eq!(m.get(0, 1), Some(9.0));
    assert_eq!(m.get(0, 3), Some(8.0));
    assert_eq!(m.get(0, 0), None);
    assert_eq!(m.n_known(), 3);
    assert!(ranks_to_ratings(&[vec![1usize, 1]], 10).is_err());
    assert!(ranks_to_ratings(&[vec![10usize]], 10).is_err());
}

#[test]
fn squaring_ratings() {
    let (m, _) = common::table2();
    let sq = square_ratings(&m);
    assert_eq!(sq.get(0, 8), Some(100.0));
    assert_eq!(sq.get(2, 0), Some(1.0));
}

fn synthetic_matrix() -> (RatingMatrix, Vec<Group>) {
    let ds = generate_synthetic(
        &SyntheticSchemeSpec {
            seed: 31,
            ..Default::default()
        },
        79,
        10,
    )
    .unwrap();
    (ds.ratings().clone(), ds.groups().to_vec())
}

#[test]
fn sparsify_without_removal_is_identity() {
    let (m, groups) = synthetic_matrix();
    let out = sparsify(&m, &groups, 0.0, 4).unwrap();
    assert_eq!(out.matrix, m);
    assert_eq!(out.achieved_sparsity(), 0.0);
}

#[test]
fn sparsify_keeps_a_rater_per_option_and_stays_below_nominal() {
    let (m, groups) = synthetic_matrix();
    let mut total = 0.0;
    for seed in 0..50 {
        let out = sparsify(&m, &groups, 0.3, seed).unwrap();
        assert_eq!(out, sparsify(&m, &groups, 0.3, seed).unwrap());
        for g in &groups {
            for o in 0..10 {
                assert!(g.members().iter().any(|&u| out.matrix.get(u, o).is_some()));
            }
        }
        total += out.achieved_sparsity();
    }
    let mean = total / 50.0;
    assert!(mean < 0.3 && mean > 0.2, "mean achieved sparsity {mean}");
}

#[test]
fn full_removal_leaves_one_rater_per_option() {
    let (m, groups) = synthetic_matrix();
    let out = sparsify(&m, &groups, 1.0, 0).unwrap();
    assert_eq!(out.matrix.n_known(), groups.len() * 10);
    assert!(sparsify(&m, &groups, 1.5, 0).is_err());
}
