//! Small exact linear algebra over `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;
pub type RationalMatrix = Vec<Vec<Rational>>;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn identity(n: usize) -> RationalMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { int(1) } else { int(0) })
                .collect()
        })
        .collect()
}

/// `rows * rows^T`: the Gram matrix of a row-basis.
pub fn gram_of_rows(basis: &RationalMatrix) -> RationalMatrix {
    let n = basis.len();
    let mut gram = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let dot = basis[i]
                .iter()
                .zip(&basis[j])
                .fold(Rational::zero(), |acc, (a, b)| acc + a * b);
            gram[j][i] = dot.clone();
            gram[i][j] = dot;
        }
    }
    gram
}

pub fn determinant(m: &RationalMatrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &p;
            for (entry, pivot_entry) in row.iter_mut().zip(pivot_row).skip(col) {
                *entry -= &factor * pivot_entry;
            }
        }
    }
    det
}

pub fn inverse(m: &RationalMatrix) -> Option<RationalMatrix> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let p = a[col][col].clone();
        for c in 0..n {
            a[col][c] /= &p;
            inv[col][c] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let da = &factor * &a[col][c];
                a[r][c] -= da;
                let di = &factor * &inv[col][c];
                inv[r][c] -= di;
            }
        }
    }
    Some(inv)
}

/// `G = U^T D U` with `U` unit upper triangular, so that
/// `x^T G x = sum_i d_i (x_i + sum_{j>i} U_ij x_j)^2`.
///
/// Returns `None` if `G` is not positive definite.
pub fn ldl(gram: &RationalMatrix) -> Option<(Vec<Rational>, RationalMatrix)> {
    let n = gram.len();
    let mut d = vec![Rational::zero(); n];
    let mut u = identity(n);
    for i in 0..n {
        let mut di = gram[i][i].clone();
        for k in 0..i {
            di -= &d[k] * &u[k][i] * &u[k][i];
        }
        if !di.is_positive() {
            return None;
        }
        for j in i + 1..n {
            let mut v = gram[i][j].clone();
            for k in 0..i {
                v -= &d[k] * &u[k][i] * &u[k][j];
            }
            u[i][j] = v / &di;
        }
        d[i] = di;
    }
    Some((d, u))
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

pub fn to_i64(q: &Rational) -> Option<i64> {
    if is_integer(q) {
        q.numer().to_i64()
    } else {
        None
    }
}

pub fn lcm_of_denominators<'a>(entries: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    entries
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Floor of the square root of a nonnegative rational, exactly.
pub fn floor_sqrt(q: &Rational) -> BigInt {
    if !q.is_positive() {
        return BigInt::zero();
    }
    // floor(sqrt(p/r)) = floor(sqrt(floor(p * r)) / r) is not exact in general;
    // use floor(sqrt(p/r)) = isqrt(floor(p/r)) which is exact since
    // floor(sqrt(x)) = floor(sqrt(floor(x))) for x >= 0.
    q.floor().to_integer().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_inverse_agree() {
        let m = vec![
            vec![int(4), int(-2), int(1)],
            vec![int(-2), int(2), int(0)],
            vec![int(1), int(0), rat(5, 2)],
        ];
        let det = determinant(&m);
        let inv = inverse(&m).unwrap();
        assert_eq!(determinant(&inv) * det, int(1));
    }

    #[test]
    fn ldl_reconstructs_gram() {
        let g = vec![
            vec![int(2), int(-1), int(0)],
            vec![int(-1), int(2), int(-1)],
            vec![int(0), int(-1), int(2)],
        ];
        let (d, u) = ldl(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = Rational::zero();
                for k in 0..3 {
                    s += &u[k][i] * &d[k] * &u[k][j];
                }
                assert_eq!(s, g[i][j]);
            }
        }
        let singular = vec![vec![int(1), int(1)], vec![int(1), int(1)]];
        assert!(ldl(&singular).is_none());
    }

    #[test]
    fn floor_sqrt_is_exact() {
        assert_eq!(floor_sqrt(&rat(17, 4)), BigInt::from(2));
        assert_eq!(floor_sqrt(&int(9)), BigInt::from(3));
        assert_eq!(floor_sqrt(&rat(35, 4)), BigInt::from(2));
    }
}
