//! Exact arithmetic and linear algebra over prime fields.
//!
//! Elements are plain `u64` values kept in canonical form `0..q`; `-1` is stored
//! as `q - 1`. Every matrix carries its field so operations never mix moduli.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A canonical element of some `F_q`.
pub type FieldElement = u64;

/// A row or column vector of canonical field elements.
pub type FieldVector = Vec<FieldElement>;

/// The prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    /// Largest accepted modulus; keeps products inside `u64` before reduction.
    pub const MAX_MODULUS: u64 = u32::MAX as u64;

    pub fn new(q: u64) -> Result<Self> {
        if q > Self::MAX_MODULUS || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Self { q })
    }

    pub fn binary() -> Self {
        Self { q: 2 }
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.q
    }

    /// Reduces an arbitrary signed integer into canonical form.
    pub fn element(self, value: i64) -> FieldElement {
        value.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn contains(self, value: u64) -> bool {
        value < self.q
    }

    #[inline]
    pub fn add(self, a: FieldElement, b: FieldElement) -> FieldElement {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(self, a: FieldElement, b: FieldElement) -> FieldElement {
        (a + self.q - b) % self.q
    }

    #[inline]
    pub fn neg(self, a: FieldElement) -> FieldElement {
        (self.q - a) % self.q
    }

    #[inline]
    pub fn mul(self, a: FieldElement, b: FieldElement) -> FieldElement {
        (a * b) % self.q
    }

    /// Multiplicative inverse by Fermat's little theorem. Panics on zero.
    pub fn inv(self, a: FieldElement) -> FieldElement {
        assert!(a != 0, "zero has no inverse in F_{}", self.q);
        self.pow(a, self.q - 2)
    }

    pub fn pow(self, mut base: FieldElement, mut exp: u64) -> FieldElement {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Iterates `0, 1, ..., q-1`.
    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        0..self.q
    }

    pub fn dot(self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.q
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= q {
        if q.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

/// A dense `rows x cols` matrix over a prime field, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl FieldMatrix {
    pub fn new(
        field: PrimeField,
        rows: usize,
        cols: usize,
        data: Vec<FieldElement>,
    ) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(&value) = data.iter().find(|&&v| !field.contains(v)) {
            return Err(Error::NonCanonical {
                value,
                q: field.modulus(),
            });
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    /// Builds a matrix from rows of signed integers, reducing each entry mod `q`.
    pub fn from_signed_rows(field: PrimeField, cols: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend(row.iter().map(|&v| field.element(v)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_rows(field: PrimeField, cols: usize, rows: &[FieldVector]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(field, rows.len(), cols, data)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> FieldVector {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_vectors(&self) -> Vec<FieldVector> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// The submatrix made of the listed rows, in the listed order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &r in indices {
            data.extend_from_slice(self.row(r));
        }
        Self {
            field: self.field,
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Appends a row; used to build counterexamples and augmented systems.
    pub fn with_row(&self, row: &[FieldElement]) -> Result<Self> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(row);
        Self::new(self.field, self.rows + 1, self.cols, data)
    }

    /// Computes `M v`.
    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<FieldVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.field.dot(self.row(r), v))
            .collect())
    }

    /// Computes `u M` (a combination of rows with coefficients `u`).
    pub fn combine_rows(&self, u: &[FieldElement]) -> Result<FieldVector> {
        if u.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: u.len(),
            });
        }
        let f = self.field;
        let mut out = vec![0; self.cols];
        for (r, &coef) in u.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            for (acc, &x) in out.iter_mut().zip(self.row(r)) {
                *acc = f.add(*acc, f.mul(coef, x));
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Self {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn rank(&self) -> usize {
        self.reduce(false).pivots.len()
    }

    /// Finds `lambda` with `sum_j lambda_j * row_j = target`, or `None` if `target`
    /// is outside the row space.
    pub fn solve_combination(&self, target: &[FieldElement]) -> Result<Option<FieldVector>> {
        if target.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: target.len(),
            });
        }
        let f = self.field;
        let red = self.reduce(true);
        let transform = red.transform.expect("transform tracked");
        let mut residual = target.to_vec();
        let mut lambda = vec![0; self.rows];
        for (i, &pc) in red.pivots.iter().enumerate() {
            let coef = residual[pc];
            if coef == 0 {
                continue;
            }
            for (x, &y) in residual.iter_mut().zip(&red.rref[i]) {
                *x = f.sub(*x, f.mul(coef, y));
            }
            for (l, &t) in lambda.iter_mut().zip(&transform[i]) {
                *l = f.add(*l, f.mul(coef, t));
            }
        }
        if residual.iter().any(|&x| x != 0) {
            return Ok(None);
        }
        debug_assert_eq!(self.combine_rows(&lambda).unwrap(), target);
        Ok(Some(lambda))
    }

    /// A basis of the right kernel `{v : M v = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<FieldVector> {
        let f = self.field;
        let red = self.reduce(false);
        let mut is_pivot = vec![false; self.cols];
        for &pc in &red.pivots {
            is_pivot[pc] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![0; self.cols];
                v[free] = 1;
                for (i, &pc) in red.pivots.iter().enumerate() {
                    v[pc] = f.neg(red.rref[i][free]);
                }
                v
            })
            .collect()
    }

    /// Reduced row echelon form by Gauss-Jordan elimination, taking the first
    /// row with a nonzero entry as pivot for each column. With `track`, also
    /// records the row operations so that `transform[i] * M = rref[i]`.
    fn reduce(&self, track: bool) -> Reduction {
        let f = self.field;
        let mut rows = self.row_vectors();
        let mut transform: Option<Vec<FieldVector>> = track.then(|| {
            (0..self.rows)
                .map(|r| {
                    let mut e = vec![0; self.rows];
                    e[r] = 1;
                    e
                })
                .collect()
        });
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(found) = (next..self.rows).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(next, found);
            if let Some(t) = transform.as_mut() {
                t.swap(next, found);
            }
            let inv = f.inv(rows[next][col]);
            scale(f, &mut rows[next], inv);
            if let Some(t) = transform.as_mut() {
                scale(f, &mut t[next], inv);
            }
            for r in 0..self.rows {
                if r == next || rows[r][col] == 0 {
                    continue;
                }
                let factor = rows[r][col];
                let pivot_row = rows[next].clone();
                axpy(f, &mut rows[r], factor, &pivot_row);
                if let Some(t) = transform.as_mut() {
                    let pivot_t = t[next].clone();
                    axpy(f, &mut t[r], factor, &pivot_t);
                }
            }
            pivots.push(col);
            next += 1;
        }
        rows.truncate(pivots.len());
        if let Some(t) = transform.as_mut() {
            t.truncate(pivots.len());
        }
        Reduction {
            rref: rows,
            pivots,
            transform,
        }
    }
}

struct Reduction {
    rref: Vec<FieldVector>,
    pivots: Vec<usize>,
    transform: Option<Vec<FieldVector>>,
}

fn scale(f: PrimeField, row: &mut [FieldElement], by: FieldElement) {
    for x in row {
        *x = f.mul(*x, by);
    }
}

/// `row -= factor * pivot`
fn axpy(f: PrimeField, row: &mut [FieldElement], factor: FieldElement, pivot: &[FieldElement]) {
    for (x, &p) in row.iter_mut().zip(pivot) {
        *x = f.sub(*x, f.mul(factor, p));
    }
}

/// Rank of an arbitrary list of equal-length vectors.
pub fn rank_of(field: PrimeField, cols: usize, vectors: &[FieldVector]) -> usize {
    FieldMatrix::from_rows(field, cols, vectors)
        .map(|m| m.rank())
        .unwrap_or(0)
}

/// Text form: a `d e q` header line followed by `d` lines of `e` canonical values.
impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.rows, self.cols, self.field.modulus())?;
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for FieldMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::MatrixFormat("missing header".into()))?;
        let nums = parse_numbers(header)?;
        let [rows, cols, q] = nums[..] else {
            return Err(Error::MatrixFormat(format!(
                "header must be `d e q`, got `{header}`"
            )));
        };
        let field = PrimeField::new(q)?;
        let (rows, cols) = (rows as usize, cols as usize);
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::MatrixFormat(format!("missing row {}", r + 1)))?;
            let values = parse_numbers(line)?;
            if values.len() != cols {
                return Err(Error::MatrixFormat(format!(
                    "row {} has {} entries, expected {cols}",
                    r + 1,
                    values.len()
                )));
            }
            data.extend(values);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::MatrixFormat(format!("trailing line `{extra}`")));
        }
        Self::new(field, rows, cols, data)
    }
}

fn parse_numbers(line: &str) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| Error::MatrixFormat(format!("`{t}` is not a nonnegative integer")))
        })
        .collect()
}
