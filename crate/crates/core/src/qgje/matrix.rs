use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

pub type Rational = BigRational;

/// Exact conversion of a finite float to a rational (every finite `f64` is a
/// dyadic rational).
pub fn rational_from_f64(v: f64) -> Result<Rational> {
    BigRational::from_float(v)
        .ok_or_else(|| Error::InvalidInput(format!("non-finite value {v} cannot be made exact")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact accumulator for sums of products of floats.
///
/// Every finite `f64` is `m * 2^e` with integer `m`, so a sum of products is
/// an integer over a power of two. Terms are aligned to the smallest exponent
/// seen so far and added as big integers; the single gcd reduction happens in
/// [`DyadicSum::to_rational`].
#[derive(Debug, Clone, Default)]
pub struct DyadicSum {
    acc: BigInt,
    exp: i64,
}

impl DyadicSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the product of `factors`, all of which must be finite.
    pub fn add_product(&mut self, factors: &[f64]) {
        let mut mantissa = BigInt::one();
        let mut exp: i64 = 0;
        for &f in factors {
            debug_assert!(f.is_finite());
            if f == 0.0 {
                return;
            }
            let (m, e, sign) = num_traits::Float::integer_decode(f);
            mantissa *= BigInt::from(m) * i64::from(sign);
            exp += i64::from(e);
        }
        if self.acc.is_zero() {
            self.acc = mantissa;
            self.exp = exp;
        } else if exp >= self.exp {
            self.acc += mantissa << ((exp - self.exp) as usize);
        } else {
            self.acc = (std::mem::take(&mut self.acc) << ((self.exp - exp) as usize)) + mantissa;
            self.exp = exp;
        }
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.acc << (self.exp as usize))
        } else {
            Rational::new(self.acc.clone(), BigInt::one() << ((-self.exp) as usize))
        }
    }
}

/// Exact `X^T W X` for a row-major `n x q` float design and optional weights.
pub fn weighted_gram(
    n: usize,
    q: usize,
    design: &[f64],
    weights: Option<&[f64]>,
) -> Result<Matrix> {
    check_floats(n, q, design, weights)?;
    let mut out = Matrix::zeros(q, q);
    for j in 0..q {
        for k in j..q {
            let mut sum = DyadicSum::new();
            for i in 0..n {
                let (a, b) = (design[i * q + j], design[i * q + k]);
                match weights {
                    Some(w) => sum.add_product(&[a, w[i], b]),
                    None => sum.add_product(&[a, b]),
                }
            }
            let v = sum.to_rational();
            out.set(k, j, v.clone());
            out.set(j, k, v);
        }
    }
    Ok(out)
}

/// Exact `X^T W y`.
pub fn weighted_cross(
    n: usize,
    q: usize,
    design: &[f64],
    weights: Option<&[f64]>,
    y: &[f64],
) -> Result<Vec<Rational>> {
    check_floats(n, q, design, weights)?;
    if y.len() != n || y.iter().any(|v| !v.is_finite()) {
        return invalid("response must have one finite value per row");
    }
    Ok((0..q)
        .map(|j| {
            let mut sum = DyadicSum::new();
            for i in 0..n {
                match weights {
                    Some(w) => sum.add_product(&[design[i * q + j], w[i], y[i]]),
                    None => sum.add_product(&[design[i * q + j], y[i]]),
                }
            }
            sum.to_rational()
        })
        .collect())
}

fn check_floats(n: usize, q: usize, design: &[f64], weights: Option<&[f64]>) -> Result<()> {
    if design.len() != n * q {
        return invalid(format!(
            "design has {} entries, expected {}",
            design.len(),
            n * q
        ));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return invalid(format!("{} weights for {n} rows", w.len()));
        }
    }
    if design
        .iter()
        .chain(weights.unwrap_or(&[]))
        .any(|v| !v.is_finite())
    {
        return invalid("non-finite value in design or weights");
    }
    Ok(())
}

/// Parses `"3"`, `"-7/2"`, `"0.125"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("cannot parse {text:?} as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let power = BigRational::from_integer(num_traits::pow(
        BigInt::from(10),
        scale.unsigned_abs() as usize,
    ));
    if scale >= 0 {
        value *= power;
    } else {
        value /= power;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Dense row-major matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            ));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("ragged rows");
        }
        let n = rows.len();
        Self::new(n, cols, rows.into_iter().flatten().collect())
    }

    /// Integer matrix; panics on ragged input. Intended for literals.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&v| Rational::from_integer(v.into()))
                        .collect()
                })
                .collect(),
        )
        .expect("rectangular literal")
    }

    /// Exact conversion of a row-major float matrix.
    pub fn from_f64(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        let entries = values
            .iter()
            .map(|&v| rational_from_f64(v))
            .collect::<Result<_>>()?;
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.entries[r * other.cols + c] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return invalid(format!(
                "vector of length {} does not match {} columns",
                v.len(),
                self.cols
            ));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Appends `column` on the right.
    pub fn augment(&self, column: &[Rational]) -> Result<Matrix> {
        if column.len() != self.rows {
            return invalid(format!(
                "column of length {} does not match {} rows",
                column.len(),
                self.rows
            ));
        }
        let mut entries = Vec::with_capacity(self.rows * (self.cols + 1));
        for (r, extra) in column.iter().enumerate() {
            entries.extend_from_slice(self.row(r));
            entries.push(extra.clone());
        }
        Matrix::new(self.rows, self.cols + 1, entries)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut entries = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            entries.extend(cols.iter().map(|&c| self.get(r, c).clone()));
        }
        Matrix {
            rows: self.rows,
            cols: cols.len(),
            entries,
        }
    }

    pub fn top_rows(&self, count: usize) -> Matrix {
        Matrix {
            rows: count,
            cols: self.cols,
            entries: self.entries[..count * self.cols].to_vec(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational_to_f64).collect()
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .sum()
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub(crate) fn scale_row(&mut self, r: usize, factor: &Rational) {
        for v in &mut self.entries[r * self.cols..(r + 1) * self.cols] {
            *v *= factor;
        }
    }

    /// row[target] -= factor * row[source]
    pub(crate) fn sub_scaled_row(&mut self, target: usize, source: usize, factor: &Rational) {
        for c in 0..self.cols {
            let s = &self.entries[source * self.cols + c];
            if s.is_zero() {
                continue;
            }
            let delta = factor * s;
            self.entries[target * self.cols + c] -= delta;
        }
    }

    pub fn max_abs(&self) -> Rational {
        self.entries
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("matrix shapes must agree")
    }
}

impl fmt::Display for Matrix {
    /// One row per line, entries separated by commas.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(","))?;
        }
        Ok(())
    }
}
