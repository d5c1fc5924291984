#![allow(dead_code)]

use groupchoice::{Group, RatingMatrix};

pub const TABLE2: [[f64; 10]; 4] = [
    [6.0, 9.0, 4.0, 8.0, 5.0, 2.0, 7.0, 1.0, 10.0, 3.0],
    [7.0, 6.0, 4.0, 1.0, 2.0, 10.0, 3.0, 8.0, 9.0, 5.0],
    [1.0, 10.0, 3.0, 5.0, 9.0, 6.0, 8.0, 7.0, 2.0, 4.0],
    [6.0, 8.0, 3.0, 9.0, 1.0, 5.0, 7.0, 2.0, 10.0, 4.0],
];

pub fn table2() -> (RatingMatrix, Group) {
    let m = RatingMatrix::dense(&TABLE2).unwrap();
    let g = Group::new("g", vec![0, 1, 2, 3]).unwrap();
    (m, g)
}

pub fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (i, (a, b)) in got.iter().zip(want).enumerate() {
        assert!(
            (a - b).abs() <= tol,
            "entry {i}: got {a}, want {b} (tol {tol})\n got {got:?}"
        );
    }
}
