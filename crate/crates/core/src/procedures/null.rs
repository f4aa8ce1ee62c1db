//! From null-set covers to a budget family: `a_(m,n) = max_(j≥m) |I^j_n|`
//! and `g_n(2^(−(m+2))) = a_(m,n)`.
//!
//! Only rows `j < R` are stored. Row `j` sums below `2^(−(j+1))`, so rows
//! `j ≥ R` are shorter than `2^(−(R+1))`; a finite maximum at least that
//! large is the true one.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeral::Numeral;

/// `rows[m][n] = |I^m_n|`, base 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullCoverInput {
    pub rows: Vec<Vec<Numeral>>,
}

fn pow2(e: i64) -> Numeral {
    Numeral::from_power(2, e).expect("base 2")
}

impl NullCoverInput {
    pub fn new(rows: Vec<Vec<Numeral>>) -> Result<Self> {
        for (m, row) in rows.iter().enumerate() {
            let mut sum = Numeral::zero(2)?;
            for (n, x) in row.iter().enumerate() {
                if x.base() != 2 {
                    return Err(Error::BaseMismatch(2, x.base()));
                }
                if !x.is_positive() {
                    return Err(Error::InvalidParameter(format!("|I^{m}_{n}| must be positive")));
                }
                if n > 0 && x > &row[n - 1] {
                    return Err(Error::Precondition(format!("row {m} increases at column {n}")));
                }
                sum = &sum + x;
            }
            if sum >= pow2(m as i64 + 1) {
                return Err(Error::Precondition(format!("row {m} sums to at least 2^(−{})", m + 1)));
            }
        }
        Ok(NullCoverInput { rows })
    }

    /// `|I^m_n| = 2^(−(m+3)−n)`.
    pub fn parametric(rows: usize, cols: usize) -> Self {
        let rows = (0..rows).map(|m| (0..cols).map(|n| pow2((m + 3 + n) as i64)).collect()).collect();
        NullCoverInput::new(rows).expect("geometric rows are valid")
    }

    /// `|I^m_n| = 2^(−(m+2+e_n))` with a random increasing `e`, with enough
    /// rows for the table of `rows × cols`.
    pub fn random(seed: u64, rows: usize, cols: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = rows + 3 * cols + 2;
        let rows = (0..total)
            .map(|m| {
                let mut e = rng.gen_range(0..2i64);
                (0..cols)
                    .map(|_| {
                        let x = pow2(m as i64 + 2 + e);
                        e += rng.gen_range(1..=3);
                        x
                    })
                    .collect()
            })
            .collect();
        NullCoverInput::new(rows).expect("increasing exponents keep row sums below the bound")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySample {
    pub m: usize,
    pub n: usize,
    /// `x = 2^(−(m+2))`.
    pub x: Numeral,
    pub value: Numeral,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullChecks {
    /// `Σ_n a_(m,n) < 2^(−m)` on every row.
    pub summable: bool,
    /// `a_(j,n) < 2^(−(j+1))`.
    pub vanishing: bool,
    /// `a_(m+1,n) ≤ a_(m,n)`.
    pub decreasing_in_m: bool,
    /// `|I^m_n| ≤ a_(m,n)`.
    pub dominates: bool,
    /// `a_(m,n+1) ≤ a_(m,n)`.
    pub chain: bool,
}

impl NullChecks {
    pub fn all(&self) -> bool {
        self.summable && self.vanishing && self.decreasing_in_m && self.dominates && self.chain
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullFamilyReport {
    pub table: Vec<Vec<Numeral>>,
    /// Row where each maximum is attained.
    pub argmax: Vec<Vec<usize>>,
    pub checks: NullChecks,
    pub samples: Vec<FamilySample>,
}

/// The `rows × cols` table of `a_(m,n)`.
pub fn null_to_family(inp: &NullCoverInput, rows: usize, cols: usize) -> Result<NullFamilyReport> {
    let r = inp.rows.len();
    if rows > r {
        return Err(Error::InvalidParameter(format!("{rows} table rows from {r} input rows")));
    }
    if let Some(m) = inp.rows.iter().position(|row| row.len() < cols) {
        return Err(Error::InvalidParameter(format!("row {m} has fewer than {cols} columns")));
    }
    let floor = pow2(r as i64 + 1);
    let mut table = vec![Vec::with_capacity(cols); rows];
    let mut argmax = vec![Vec::with_capacity(cols); rows];
    for n in 0..cols {
        // suffix maxima from the last stored row up
        let mut best: Option<(usize, &Numeral)> = None;
        let mut col = vec![None; rows];
        for j in (0..r).rev() {
            let x = &inp.rows[j][n];
            if best.is_none_or(|(_, b)| x > b) {
                best = Some((j, x));
            }
            if j < rows {
                col[j] = best;
            }
        }
        for (m, c) in col.into_iter().enumerate() {
            let (j, x) = c.expect("rows ≤ r");
            if x < &floor {
                return Err(Error::HorizonExceeded(format!(
                    "a_({m},{n}) = max over {r} rows is below 2^(−{}); later rows could exceed it",
                    r + 1
                )));
            }
            table[m].push(x.clone());
            argmax[m].push(j);
        }
    }

    let summable = table.iter().enumerate().all(|(m, row)| {
        let s = row.iter().fold(Numeral::zero(2).expect("base 2"), |acc, x| &acc + x);
        s < pow2(m as i64)
    });
    let vanishing = table.iter().enumerate().all(|(m, row)| row.iter().all(|x| x < &pow2(m as i64 + 1)));
    let decreasing_in_m = table.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b <= a));
    let dominates = table.iter().enumerate().all(|(m, row)| row.iter().zip(&inp.rows[m]).all(|(a, x)| x <= a));
    let chain = table.iter().all(|row| row.windows(2).all(|w| w[1] <= w[0]));
    let samples = table
        .iter()
        .enumerate()
        .flat_map(|(m, row)| {
            row.iter().enumerate().map(move |(n, v)| FamilySample {
                m,
                n,
                x: Numeral::from_power(2, BigInt::from(m + 2)).expect("base 2"),
                value: v.clone(),
            })
        })
        .collect();
    Ok(NullFamilyReport {
        table,
        argmax,
        checks: NullChecks { summable, vanishing, decreasing_in_m, dominates, chain },
        samples,
    })
}
