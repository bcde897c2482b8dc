//! Brute-force shell oracles shared by the integration and acceptance tests.

use thetacert::lattice::rational::to_i64;
use thetacert::lattice::Lattice;

fn integer_gram(lattice: &Lattice) -> Vec<Vec<i64>> {
    lattice
        .gram()
        .iter()
        .map(|row| {
            row.iter()
                .map(|q| to_i64(q).expect("integral Gram"))
                .collect()
        })
        .collect()
}

fn inverse_diagonal(gram: &[Vec<i64>]) -> Vec<f64> {
    let n = gram.len();
    let mut a: Vec<Vec<f64>> = gram
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<f64> = row.iter().map(|&v| v as f64).collect();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        a[col].iter_mut().for_each(|v| *v /= p);
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                let src = a[col].clone();
                a[row].iter_mut().zip(&src).for_each(|(v, s)| *v -= f * s);
            }
        }
    }
    (0..n).map(|i| a[i][n + i]).collect()
}

/// Counts by visiting every coefficient vector in the box
/// `|x_i| <= sqrt(M (G^{-1})_ii)`, which contains the whole ellipsoid.
pub fn coefficient_box_counts(lattice: &Lattice, max_norm: u64) -> Vec<u64> {
    let gram = integer_gram(lattice);
    let n = gram.len();
    let bounds: Vec<i64> = inverse_diagonal(&gram)
        .iter()
        .map(|d| (max_norm as f64 * d + 1e-9).sqrt().floor() as i64)
        .collect();
    let mut counts = vec![0u64; max_norm as usize + 1];
    let mut x: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        let mut norm = 0i64;
        for i in 0..n {
            for j in 0..n {
                norm += x[i] * gram[i][j] * x[j];
            }
        }
        if norm <= max_norm as i64 {
            counts[norm as usize] += 1;
        }
        let mut k = 0;
        loop {
            if k == n {
                return counts;
            }
            if x[k] < bounds[k] {
                x[k] += 1;
                break;
            }
            x[k] = -bounds[k];
            k += 1;
        }
    }
}

/// Counts for E8 from its ambient description: vectors of `Z^8` with even
/// coordinate sum together with vectors of `(Z + 1/2)^8` with even sum.
/// Coordinates are doubled so all arithmetic stays integral.
pub fn e8_ambient_counts(max_norm: u64) -> Vec<u64> {
    let limit = 4 * max_norm as i64;
    let mut counts = vec![0u64; max_norm as usize + 1];
    for parity in [0i64, 1] {
        let values: Vec<i64> = (-7i64..=7).filter(|v| v.rem_euclid(2) == parity).collect();
        let mut idx = [0usize; 8];
        loop {
            let y: Vec<i64> = idx.iter().map(|&i| values[i]).collect();
            let norm4: i64 = y.iter().map(|v| v * v).sum();
            let sum2: i64 = y.iter().sum();
            if norm4 <= limit && norm4 % 4 == 0 && sum2.rem_euclid(4) == 0 {
                counts[(norm4 / 4) as usize] += 1;
            }
            let mut k = 0;
            loop {
                if k == 8 {
                    break;
                }
                idx[k] += 1;
                if idx[k] < values.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == 8 {
                break;
            }
        }
    }
    counts
}
