/// Lexicographically smallest `(a, b, c, d)` with `a >= b >= c >= d >= 0`
/// and `a^2 + b^2 + c^2 + d^2 = m`.
///
/// Every non-negative integer has such a representation, so this always
/// returns `Some` for inputs whose square root fits an `i64`.
pub fn four_squares(m: u64) -> Option<[u64; 4]> {
    let isqrt = |v: u64| -> u64 {
        let mut r = (v as f64).sqrt() as u64;
        while r * r > v {
            r -= 1;
        }
        while (r + 1) * (r + 1) <= v {
            r += 1;
        }
        r
    };
    // With a >= b >= c >= d, a^2 >= m/4; scan a upwards for the lexicographic minimum.
    let a_min = {
        let r = isqrt(m / 4);
        if 4 * r * r >= m {
            r
        } else {
            r + 1
        }
    };
    for a in a_min..=isqrt(m) {
        let rest_a = m - a * a;
        for b in 0..=a.min(isqrt(rest_a)) {
            let rest_b = rest_a - b * b;
            if 2 * b * b < rest_b {
                continue;
            }
            for c in 0..=b.min(isqrt(rest_b)) {
                let rest_c = rest_b - c * c;
                if c * c < rest_c {
                    continue;
                }
                let d = isqrt(rest_c);
                if d * d == rest_c && d <= c {
                    return Some([a, b, c, d]);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_values() {
        assert_eq!(four_squares(0), Some([0, 0, 0, 0]));
        assert_eq!(four_squares(1), Some([1, 0, 0, 0]));
        assert_eq!(four_squares(7), Some([2, 1, 1, 1]));
        assert_eq!(four_squares(4), Some([1, 1, 1, 1]));
        assert_eq!(four_squares(25), Some([4, 2, 2, 1]));
    }

    proptest! {
        #[test]
        fn representation_is_valid(m in 0u64..200_000) {
            let [a, b, c, d] = four_squares(m).unwrap();
            prop_assert_eq!(a * a + b * b + c * c + d * d, m);
            prop_assert!(a >= b && b >= c && c >= d);
        }
    }
}
