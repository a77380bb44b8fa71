//! Exact rational arithmetic: scalars, dense matrices, Gaussian elimination,
//! the M-matrix inverse test, phase-1 simplex feasibility and dyadic rounding.
//!
//! Nothing in here touches floating point. Every other module builds on these
//! primitives, so the certified pipeline never loses information except in the
//! explicit [`round_down_dyadic`] step.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Dense vector of rationals.
pub type RatVector = Vec<Rational>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MathError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^k` for any signed exponent.
pub fn pow2(k: i64) -> Rational {
    let p = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Parses `"a/b"`, an integer, or a finite decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<Rational, MathError> {
    let s = text.trim();
    let bad = || MathError::ParseRational(text.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{whole_digits}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let value = Rational::new(digits, scale);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Renders `num/den`, omitting the denominator when it is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering truncated towards zero after `digits` fractional digits.
pub fn format_decimal(r: &Rational, digits: usize) -> String {
    let negative = r.is_negative();
    let a = r.abs();
    let scale = num_traits::pow(BigInt::from(10u32), digits);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (whole, frac) = scaled.div_rem(&scale);
    let mut out = String::new();
    if negative && !scaled.is_zero() {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if digits > 0 {
        let f = frac.to_string();
        out.push('.');
        out.push_str(&"0".repeat(digits - f.len()));
        out.push_str(&f);
    }
    out
}

/// Smallest integer `k` with `x <= 2^k`. Requires `x > 0`.
pub fn ceil_log2(x: &Rational) -> i64 {
    assert!(x.is_positive(), "ceil_log2 of a nonpositive number");
    let n = x.numer().bits() as i64;
    let d = x.denom().bits() as i64;
    // 2^(n-1-d) < x < 2^(n-d+1), so the answer is one of a few candidates.
    let mut k = n - d - 1;
    while &pow2(k) < x {
        k += 1;
    }
    while k > i64::MIN && &pow2(k - 1) >= x {
        k -= 1;
    }
    k
}

/// Number of bits in the binary representation of `|n|`, with `bitlen(0) = 1`.
pub fn bitlen(n: &BigInt) -> u64 {
    n.bits().max(1)
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<RatVector, MathError> {
        if v.len() != self.cols {
            return Err(MathError::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix, MathError> {
        if self.cols != other.rows {
            return Err(MathError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `I - self`, for square matrices.
    pub fn identity_minus(&self) -> RatMatrix {
        assert!(self.is_square());
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x = -x.clone();
        }
        for i in 0..self.rows {
            out[(i, i)] += Rational::one();
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> Rational {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(Rational::zero(), |acc, x| acc + x.abs()))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Restriction to the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> RatMatrix {
        let mut out = RatMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = self[(i, j)].clone();
            }
        }
        out
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Solves `A x = b` exactly by Gaussian elimination.
pub fn solve_linear(a: &RatMatrix, b: &[Rational]) -> Result<RatVector, MathError> {
    if !a.is_square() || a.rows != b.len() {
        return Err(MathError::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    let n = a.rows;
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i].clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(MathError::SingularMatrix)?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for x in m[col][col..].iter_mut() {
            *x *= &inv;
        }
        let (above, rest) = m.split_at_mut(col + 1);
        let prow = &above[col];
        for row in rest.iter_mut() {
            let factor = row[col].clone();
            if factor.is_zero() {
                continue;
            }
            for j in col..=n {
                if !prow[j].is_zero() {
                    row[j] -= &factor * &prow[j];
                }
            }
        }
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut v = m[i][n].clone();
        for j in i + 1..n {
            if !m[i][j].is_zero() {
                v -= &m[i][j] * &x[j];
            }
        }
        x[i] = v;
    }
    Ok(x)
}

/// Outcome of [`inverse_if_nonneg`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InverseCheck {
    /// `(I - M)^{-1}`, which exists and is entrywise nonnegative, so `rho(M) < 1`.
    Inverse(RatMatrix),
    SingularOrNegative,
}

impl InverseCheck {
    pub fn is_inverse(&self) -> bool {
        matches!(self, InverseCheck::Inverse(_))
    }
}

/// For square `M >= 0`, returns `(I - M)^{-1}` when it exists and is nonnegative.
///
/// For nonnegative `M` this happens exactly when the spectral radius of `M`
/// is below one, so this is an exact decision procedure for `rho(M) < 1`.
pub fn inverse_if_nonneg(m: &RatMatrix) -> InverseCheck {
    assert!(m.is_square(), "inverse_if_nonneg needs a square matrix");
    let n = m.rows;
    let lhs = m.identity_minus();
    let mut aug: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = lhs.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !aug[r][col].is_zero()) else {
            return InverseCheck::SingularOrNegative;
        };
        aug.swap(col, pivot);
        let inv = aug[col][col].recip();
        for x in aug[col].iter_mut() {
            *x *= &inv;
        }
        let prow = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for j in 0..2 * n {
                if !prow[j].is_zero() {
                    row[j] -= &factor * &prow[j];
                }
            }
        }
    }
    let inv = RatMatrix::from_rows(aug.into_iter().map(|row| row[n..].to_vec()).collect());
    if inv.is_nonnegative() {
        InverseCheck::Inverse(inv)
    } else {
        InverseCheck::SingularOrNegative
    }
}

/// Decides exactly whether some `u >= 0` satisfies `A u = b`.
///
/// Phase-1 simplex over the rationals with Bland's rule, so it always terminates.
pub fn nonneg_solution_exists(a: &RatMatrix, b: &[Rational]) -> bool {
    assert_eq!(a.rows, b.len(), "nonneg_solution_exists: dimension mismatch");
    let m = a.rows;
    let n = a.cols;
    let width = n + m;
    // Tableau rows: original columns, artificial columns, right-hand side.
    let mut t: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let flip = b[i].is_negative();
            let mut row: Vec<Rational> =
                a.row(i).iter().map(|x| if flip { -x } else { x.clone() }).collect();
            row.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row.push(if flip { -b[i].clone() } else { b[i].clone() });
            row
        })
        .collect();
    let cost = |j: usize| if j >= n { Rational::one() } else { Rational::zero() };
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let entering = (0..width).find(|&j| {
            let reduced = (0..m).fold(cost(j), |acc, i| acc - cost(basis[i]) * &t[i][j]);
            reduced.is_negative()
        });
        let Some(q) = entering else { break };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !t[i][q].is_positive() {
                continue;
            }
            let ratio = &t[i][width] / &t[i][q];
            let better = match &leave {
                None => true,
                Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // The phase-1 objective is bounded below by zero, so a leaving row always exists.
        let (p, _) = leave.expect("phase-1 simplex cannot be unbounded");
        let inv = t[p][q].recip();
        for x in t[p].iter_mut() {
            *x *= &inv;
        }
        let prow = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == p || row[q].is_zero() {
                continue;
            }
            let factor = row[q].clone();
            for j in 0..=width {
                if !prow[j].is_zero() {
                    row[j] -= &factor * &prow[j];
                }
            }
        }
        basis[p] = q;
    }
    (0..m).all(|i| basis[i] < n || t[i][width].is_zero())
}

/// Nonnegative vector whose entries are `mantissa / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicVector {
    bits: u32,
    mantissas: Vec<BigUint>,
}

impl DyadicVector {
    pub fn zeros(len: usize, bits: u32) -> Self {
        DyadicVector { bits, mantissas: vec![BigUint::zero(); len] }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.mantissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissas.is_empty()
    }

    pub fn mantissa(&self, i: usize) -> &BigUint {
        &self.mantissas[i]
    }

    pub fn value(&self, i: usize) -> Rational {
        Rational::new(
            BigInt::from_biguint(Sign::Plus, self.mantissas[i].clone()),
            BigInt::one() << self.bits,
        )
    }

    pub fn to_rationals(&self) -> RatVector {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// Exact decimal expansion of entry `i` (dyadic rationals always terminate).
    pub fn decimal(&self, i: usize) -> String {
        dyadic_decimal(&self.mantissas[i], self.bits)
    }
}

impl Serialize for DyadicVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let values: Vec<String> = (0..self.len()).map(|i| self.decimal(i)).collect();
        let mut st = serializer.serialize_struct("DyadicVector", 2)?;
        st.serialize_field("bits", &self.bits)?;
        st.serialize_field("values", &values)?;
        st.end()
    }
}

fn dyadic_decimal(m: &BigUint, bits: u32) -> String {
    if bits == 0 || m.is_zero() {
        return m.to_string();
    }
    // m / 2^k = m * 5^k / 10^k
    let digits = (m * num_traits::pow(BigUint::from(5u32), bits as usize)).to_string();
    let k = bits as usize;
    let (whole, frac) = if digits.len() > k {
        let (w, f) = digits.split_at(digits.len() - k);
        (w.to_string(), f.to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat(k - digits.len()), digits))
    };
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        whole
    } else {
        format!("{whole}.{frac}")
    }
}

/// Floors `max(v_i, 0)` to a multiple of `2^-bits` in every coordinate.
pub fn round_down_dyadic(v: &[Rational], bits: u32) -> DyadicVector {
    let mantissas = v
        .iter()
        .map(|x| {
            if !x.is_positive() {
                return BigUint::zero();
            }
            let scaled = (x.numer() << bits).div_floor(x.denom());
            scaled.to_biguint().expect("floor of a positive value is nonnegative")
        })
        .collect();
    DyadicVector { bits, mantissas }
}
