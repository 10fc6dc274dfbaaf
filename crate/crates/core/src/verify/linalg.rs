//! Exact rank over the rationals via fraction-free (Bareiss) elimination.

use num::{BigInt, Integer, One, Zero};

use crate::coeff::Coef;

/// Rank of a matrix given as rational rows. Each row is scaled by the lcm
/// of its denominators (rank-preserving), then eliminated fraction-free
/// over the integers.
pub fn rank_of_rational_rows(rows: &[Vec<Coef>]) -> usize {
    let int_rows: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            row.iter().map(|c| c.numer() * (&lcm / c.denom())).collect()
        })
        .collect();
    bareiss_rank(int_rows)
}

/// One-step Bareiss elimination with column pivoting. Every division is by
/// the previous pivot and is exact by Sylvester's determinant identity.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0usize;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot_row) = (rank..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot_row);
        for i in rank + 1..rows {
            for j in col + 1..cols {
                let num = &m[rank][col] * &m[i][j] - &m[i][col] * &m[rank][j];
                let (quot, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "fraction-free division must be exact");
                m[i][j] = quot;
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::coef_frac;

    fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
    }

    #[test]
    fn small_ranks() {
        assert_eq!(bareiss_rank(int_matrix(&[&[1, 0], &[0, 1]])), 2);
        assert_eq!(bareiss_rank(int_matrix(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(bareiss_rank(int_matrix(&[&[0, 0], &[0, 0]])), 0);
        // rank 2 with a zero leading column
        assert_eq!(bareiss_rank(int_matrix(&[&[0, 1, 2], &[0, 2, 5], &[0, 3, 7]])), 2);
        // wide matrix
        assert_eq!(bareiss_rank(int_matrix(&[&[2, 3, 5, 7], &[4, 6, 10, 15]])), 2);
    }

    #[test]
    fn rational_rows() {
        let rows = vec![
            vec![coef_frac(1, 2), coef_frac(1, 3)],
            vec![coef_frac(3, 2), coef_frac(1, 1)],
        ];
        // second row is 3 times the first
        assert_eq!(rank_of_rational_rows(&rows), 1);
        let rows = vec![
            vec![coef_frac(1, 2), coef_frac(1, 3)],
            vec![coef_frac(3, 2), coef_frac(2, 1)],
        ];
        assert_eq!(rank_of_rational_rows(&rows), 2);
    }
}
