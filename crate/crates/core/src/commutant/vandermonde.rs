//! Row-sum bound for the inverse of `M_ij = 2^{-ij}`, checked in exact
//! rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_VANDERMONDE_K: usize = 16;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VandermondeRow {
    /// Row index `i`, 1-based.
    pub i: usize,
    pub row_sum: f64,
    pub bound: f64,
    pub ratio: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VandermondeReport {
    pub k: usize,
    pub rows: Vec<VandermondeRow>,
    pub max_ratio: f64,
    pub all_satisfied: bool,
}

/// `M_ij = 2^{-ij}` for `i, j = 1..k`.
pub fn vandermonde_matrix(k: usize) -> Vec<Vec<BigRational>> {
    (1..=k)
        .map(|i| {
            (1..=k)
                .map(|j| BigRational::new(BigInt::one(), BigInt::one() << (i * j)))
                .collect()
        })
        .collect()
}

/// Exact inverse by Gauss–Jordan elimination.
pub fn invert_exact(m: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let k = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    for col in 0..k {
        let p = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::invalid("matrix is singular"))?;
        a.swap(col, p);
        inv.swap(col, p);
        let piv = a[col][col].clone();
        for j in 0..k {
            a[col][j] = &a[col][j] / &piv;
            inv[col][j] = &inv[col][j] / &piv;
        }
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..k {
                    let (ta, ti) = (&f * &a[col][j], &f * &inv[col][j]);
                    a[r][j] -= ta;
                    inv[r][j] -= ti;
                }
            }
        }
    }
    Ok(inv)
}

/// Checks `Σ_j |(M⁻¹)_ij| ≤ 30·2^{ki - i(i-1)/2}` for every row.
pub fn vandermonde_bound_check(k: usize) -> Result<VandermondeReport> {
    if k == 0 || k > MAX_VANDERMONDE_K {
        return Err(Error::invalid(format!(
            "vandermonde check supports k in 1..={MAX_VANDERMONDE_K}, got {k}"
        )));
    }
    let inv = invert_exact(&vandermonde_matrix(k))?;
    let mut rows = Vec::with_capacity(k);
    for (r, row) in inv.iter().enumerate() {
        let i = r + 1;
        let sum: BigRational = row.iter().map(|x| x.abs()).sum();
        let bound = BigRational::from_integer(BigInt::from(30) << (k * i - i * (i - 1) / 2));
        let satisfied = sum <= bound;
        let ratio = (&sum / &bound).to_f64().unwrap_or(f64::INFINITY);
        rows.push(VandermondeRow {
            i,
            row_sum: sum.to_f64().unwrap_or(f64::INFINITY),
            bound: bound.to_f64().unwrap_or(f64::INFINITY),
            ratio,
            satisfied,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let all_satisfied = rows.iter().all(|r| r.satisfied);
    Ok(VandermondeReport {
        k,
        rows,
        max_ratio,
        all_satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let r = vandermonde_bound_check(1).unwrap();
        assert_eq!(r.rows[0].row_sum, 2.0);
        assert_eq!(r.rows[0].bound, 60.0);
        assert!(r.all_satisfied);
    }

    #[test]
    fn inverse_is_exact() {
        for k in [2, 5, 9] {
            let m = vandermonde_matrix(k);
            let inv = invert_exact(&m).unwrap();
            for i in 0..k {
                for j in 0..k {
                    let s: BigRational = (0..k).map(|l| &m[i][l] * &inv[l][j]).sum();
                    let expect = if i == j { BigRational::one() } else { BigRational::zero() };
                    assert_eq!(s, expect);
                }
            }
        }
    }

    /// Closed form for the inverse of `M_ij = x_i^j` with nodes
    /// `x_j = 2^{-j}`: the row sums of `|M⁻¹|` equal
    /// `Σ_j e_{k-j}(x without x_i) / |x_i Π_{m≠i}(x_m − x_i)|`.
    #[test]
    fn row_sums_match_closed_form() {
        for k in 1..=8 {
            let x: Vec<BigRational> = (1..=k)
                .map(|j| BigRational::new(BigInt::one(), BigInt::one() << j))
                .collect();
            let inv = invert_exact(&vandermonde_matrix(k)).unwrap();
            // M = [x_i^j] is symmetric, so column i of M⁻¹ corresponds to node x_i.
            for i in 0..k {
                let others: Vec<&BigRational> = (0..k).filter(|&m| m != i).map(|m| &x[m]).collect();
                // elementary symmetric polynomials of the other nodes
                let mut e = vec![BigRational::zero(); k];
                e[0] = BigRational::one();
                for (cnt, xm) in others.iter().enumerate() {
                    for r in (1..=cnt + 1).rev() {
                        let add = &e[r - 1] * *xm;
                        e[r] += add;
                    }
                }
                let denom: BigRational = others.iter().fold(x[i].clone(), |acc, xm| acc * (*xm - &x[i]).abs());
                let expect: BigRational = e.iter().sum::<BigRational>() / denom;
                let got: BigRational = (0..k).map(|j| inv[i][j].abs()).sum();
                assert_eq!(got, expect, "k={k}, i={i}");
            }
        }
    }

    #[test]
    fn k4_satisfies_bounds() {
        let r = vandermonde_bound_check(4).unwrap();
        assert!(r.all_satisfied);
        assert!(r.max_ratio <= 1.0);
        assert!(vandermonde_bound_check(17).is_err());
    }
}
