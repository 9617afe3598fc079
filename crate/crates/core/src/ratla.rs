//! Exact dense linear algebra over the rationals.
//!
//! Model dimensions are tiny (tens of coordinates), so everything here is
//! dense and every routine is plain Gauss–Jordan elimination over
//! arbitrary-precision rationals. Subspaces are stored by a canonical basis
//! (the nonzero rows of the reduced row echelon form of any spanning set),
//! which makes structural equality the same as mathematical equality.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Coefficient field.
pub type Rational = BigRational;

/// A column vector.
pub type Vector = Vec<Rational>;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero_vec(n: usize) -> Vector {
    vec![Rational::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vector {
    let mut v = zero_vec(n);
    v[i] = Rational::one();
    v
}

pub fn ivec(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| q(x)).collect()
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn add_vec(a: &[Rational], b: &[Rational]) -> Vector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Rational], b: &[Rational]) -> Vector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(c: &Rational, v: &[Rational]) -> Vector {
    v.iter().map(|x| c * x).collect()
}

/// `acc += c * v`, skipping the work when `c` is zero.
pub fn axpy(acc: &mut [Rational], c: &Rational, v: &[Rational]) {
    if c.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += c * x;
        }
    }
}

pub fn concat_vec(a: &[Rational], b: &[Rational]) -> Vector {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vector>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged row");
            data.extend(row);
        }
        Matrix { rows: r, cols, data }
    }

    /// Integer convenience constructor, mostly for tests and fixtures.
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Matrix { rows, cols, data: entries.iter().map(|&x| q(x)).collect() }
    }

    pub fn from_cols(cols: &[Vector], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|c| self.col(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Matrix::zeros(self.rows, other.cols);
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
        out
    }

    pub fn apply(&self, v: &[Rational]) -> Vector {
        assert_eq!(self.cols, v.len(), "shape mismatch in matrix-vector product");
        let mut out = zero_vec(self.rows);
        for (k, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = &self[(i, k)];
                if !a.is_zero() {
                    *o += a * x;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut m = Matrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..other.cols {
                m[(r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        m
    }

    /// `[self; other]`
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Copy `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                self[(r0 + r, c0 + c)] = block[(r, c)].clone();
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = self[(r0 + r, c0 + c)].clone();
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    pub fn kernel(&self) -> Subspace {
        kernel(self)
    }

    pub fn image(&self) -> Subspace {
        image(self)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(Matrix::zeros(0, 0));
        }
        let (r, pivots) = rref(&self.hstack(&Matrix::identity(n)));
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.block(0, n, n, n))
    }
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
            continue;
        };
        if p != row {
            for c in 0..a.cols {
                a.data.swap(p * a.cols + c, row * a.cols + c);
            }
        }
        let inv = a[(row, col)].recip();
        for c in col..a.cols {
            if !a[(row, c)].is_zero() {
                a[(row, c)] = &a[(row, c)] * &inv;
            }
        }
        let pivot_row: Vector = a.row(row)[col..].to_vec();
        for r in 0..a.rows {
            if r == row || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for (k, pv) in pivot_row.iter().enumerate() {
                if !pv.is_zero() {
                    let idx = r * a.cols + col + k;
                    a.data[idx] -= &f * pv;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Null space of `m` as a subspace of the domain.
pub fn kernel(m: &Matrix) -> Subspace {
    let (r, pivots) = rref(m);
    let n = m.cols;
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = zero_vec(n);
        v[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r[(i, free)].clone();
        }
        basis.push(v);
    }
    Subspace::span(n, &basis)
}

/// Column span of `m`.
pub fn image(m: &Matrix) -> Subspace {
    Subspace::span(m.rows, &m.columns())
}

/// A solution of `m · x = target`, or `None` when `target ∉ im m`.
///
/// The returned solution sets every free variable to zero, so it depends
/// linearly on `target`.
pub fn solve_preimage(m: &Matrix, target: &[Rational]) -> Option<Vector> {
    assert_eq!(target.len(), m.rows, "target length must equal row count");
    let aug = m.hstack(&Matrix::from_cols(&[target.to_vec()], m.rows));
    let (r, pivots) = rref(&aug);
    if pivots.last() == Some(&m.cols) {
        return None;
    }
    let mut x = zero_vec(m.cols);
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[(i, m.cols)].clone();
    }
    Some(x)
}

/// A linear subspace of `Q^n`, stored by its canonical echelon basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    // Nonzero rows of an RREF; basis[i][pivots[i]] == 1 and every other basis
    // vector vanishes at that coordinate.
    basis: Vec<Vector>,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in Q^{}", self.dim(), self.ambient_dim)?;
        for b in &self.basis {
            write!(f, ", [")?;
            for (i, x) in b.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, ")")
    }
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace { ambient_dim: n, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        Subspace { ambient_dim: n, basis: (0..n).map(|i| unit_vec(n, i)).collect(), pivots: (0..n).collect() }
    }

    pub fn span(n: usize, vectors: &[Vector]) -> Self {
        if vectors.is_empty() {
            return Self::zero(n);
        }
        let m = Matrix::from_rows(vectors.to_vec(), n);
        let (r, pivots) = rref(&m);
        let basis = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Subspace { ambient_dim: n, basis, pivots }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient_dim
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Basis vectors as the columns of an `ambient_dim × dim` matrix.
    pub fn basis_matrix(&self) -> Matrix {
        Matrix::from_cols(&self.basis, self.ambient_dim)
    }

    /// Coordinates of `v` in the canonical basis, or `None` if `v ∉ self`.
    pub fn coords(&self, v: &[Rational]) -> Option<Vector> {
        assert_eq!(v.len(), self.ambient_dim, "vector length mismatch");
        let c: Vector = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let mut residual = v.to_vec();
        for (ci, b) in c.iter().zip(&self.basis) {
            axpy(&mut residual, &-ci.clone(), b);
        }
        is_zero_vec(&residual).then_some(c)
    }

    /// The vector with coordinates `c` in the canonical basis.
    pub fn from_coords(&self, c: &[Rational]) -> Vector {
        assert_eq!(c.len(), self.dim());
        let mut v = zero_vec(self.ambient_dim);
        for (ci, b) in c.iter().zip(&self.basis) {
            axpy(&mut v, ci, b);
        }
        v
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        self.ambient_dim == other.ambient_dim && other.basis.iter().all(|b| self.contains(b))
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::AmbientMismatch { left: self.ambient_dim, right: other.ambient_dim });
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if other.is_zero() || self.is_full() {
            return Ok(self.clone());
        }
        if self.is_zero() || other.is_full() {
            return Ok(other.clone());
        }
        let mut vs = self.basis.clone();
        vs.extend(other.basis.iter().cloned());
        Ok(Subspace::span(self.ambient_dim, &vs))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_full() {
            return Ok(self.clone());
        }
        if other.is_zero() || self.is_full() {
            return Ok(other.clone());
        }
        // {v : ann(self)·v = 0 and ann(other)·v = 0}
        let a = self.annihilator_matrix();
        let b = other.annihilator_matrix();
        Ok(kernel(&a.vstack(&b)))
    }

    /// Rows spanning the annihilator `{y : y·v = 0 ∀ v ∈ self}`.
    pub fn annihilator_matrix(&self) -> Matrix {
        if self.is_zero() {
            return Matrix::identity(self.ambient_dim);
        }
        let b = Matrix::from_rows(self.basis.clone(), self.ambient_dim);
        let ann = kernel(&b);
        Matrix::from_rows(ann.basis.clone(), self.ambient_dim)
    }

    /// `{x : m·x ∈ self}`, a subspace of the domain of `m`.
    pub fn preimage(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.rows, self.ambient_dim, "preimage: codomain mismatch");
        if self.is_full() {
            return Subspace::full(m.cols);
        }
        kernel(&self.annihilator_matrix().mul(m))
    }

    /// `m(self)`, a subspace of the codomain of `m`.
    pub fn image_under(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.cols, self.ambient_dim, "image_under: domain mismatch");
        let vs: Vec<Vector> = self.basis.iter().map(|b| m.apply(b)).collect();
        Subspace::span(m.rows, &vs)
    }

    /// Embed into a direct sum: `self ⊕ 0` (when `before == 0`) or `0 ⊕ self`.
    pub fn embed(&self, before: usize, after: usize) -> Subspace {
        let n = before + self.ambient_dim + after;
        let vs: Vec<Vector> = self
            .basis
            .iter()
            .map(|b| {
                let mut v = zero_vec(n);
                v[before..before + self.ambient_dim].clone_from_slice(b);
                v
            })
            .collect();
        Subspace::span(n, &vs)
    }

    /// External direct sum `self ⊕ other` in `Q^{n+m}`.
    pub fn direct_sum(&self, other: &Subspace) -> Subspace {
        let a = self.embed(0, other.ambient_dim);
        let b = other.embed(self.ambient_dim, 0);
        a.sum(&b).expect("same ambient by construction")
    }
}

/// The quotient `numerator / denominator` with an explicit complement and a
/// projection defined on the whole ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientSpace {
    numerator: Subspace,
    denominator: Subspace,
    complement: Vec<Vector>,
    projection: Matrix,
}

/// `v / w` with the canonical complement: the echelon basis vectors of `v`
/// that are independent modulo `w`, taken greedily in order.
pub fn quotient(v: &Subspace, w: &Subspace) -> Result<QuotientSpace> {
    if !v.contains_subspace(w) {
        return Err(Error::NotASubspace("denominator is not contained in numerator".into()));
    }
    let mut acc = w.clone();
    let mut complement = Vec::new();
    for b in v.basis() {
        if complement.len() + w.dim() == v.dim() {
            break;
        }
        if !acc.contains(b) {
            acc = acc.sum(&Subspace::span(v.ambient_dim, std::slice::from_ref(b)))?;
            complement.push(b.clone());
        }
    }
    QuotientSpace::with_complement(v.clone(), w.clone(), complement)
}

impl QuotientSpace {
    /// Build the quotient using caller-chosen representatives of a basis.
    pub fn with_complement(numerator: Subspace, denominator: Subspace, complement: Vec<Vector>) -> Result<Self> {
        let n = numerator.ambient_dim();
        if !numerator.contains_subspace(&denominator) {
            return Err(Error::NotASubspace("denominator is not contained in numerator".into()));
        }
        if complement.len() + denominator.dim() != numerator.dim() {
            return Err(Error::NotASubspace(format!(
                "complement has {} vectors, quotient dimension is {}",
                complement.len(),
                numerator.dim() - denominator.dim()
            )));
        }
        for c in &complement {
            if !numerator.contains(c) {
                return Err(Error::NotASubspace("representative outside numerator".into()));
            }
        }
        // Basis of Q^n: [denominator | complement | completing unit vectors].
        let mut cols: Vec<Vector> = denominator.basis().to_vec();
        cols.extend(complement.iter().cloned());
        let mut span = Subspace::span(n, &cols);
        if span.dim() != cols.len() {
            return Err(Error::NotASubspace("representatives are dependent modulo the denominator".into()));
        }
        for i in 0..n {
            if span.dim() == n {
                break;
            }
            let e = unit_vec(n, i);
            if !span.contains(&e) {
                cols.push(e.clone());
                span = span.sum(&Subspace::span(n, &[e]))?;
            }
        }
        let change = Matrix::from_cols(&cols, n);
        let inv = change.inverse().ok_or_else(|| Error::Internal("completed basis not invertible".into()))?;
        let k = complement.len();
        let projection = inv.block(denominator.dim(), 0, k, n);
        Ok(QuotientSpace { numerator, denominator, complement, projection })
    }

    pub fn dim(&self) -> usize {
        self.complement.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.numerator.ambient_dim()
    }

    pub fn numerator(&self) -> &Subspace {
        &self.numerator
    }

    pub fn denominator(&self) -> &Subspace {
        &self.denominator
    }

    pub fn complement(&self) -> &[Vector] {
        &self.complement
    }

    /// `dim × ambient_dim`, full row rank; restricted to the numerator its
    /// kernel is the denominator.
    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    /// Class of `v` in quotient coordinates. Only meaningful for `v` in the
    /// numerator; see [`QuotientSpace::class_of`] for the checked variant.
    pub fn project(&self, v: &[Rational]) -> Vector {
        self.projection.apply(v)
    }

    pub fn class_of(&self, v: &[Rational]) -> Option<Vector> {
        self.numerator.contains(v).then(|| self.project(v))
    }

    /// Representative of the class with coordinates `c`.
    pub fn lift(&self, c: &[Rational]) -> Vector {
        assert_eq!(c.len(), self.dim());
        let mut v = zero_vec(self.ambient_dim());
        for (ci, b) in c.iter().zip(&self.complement) {
            axpy(&mut v, ci, b);
        }
        v
    }
}

/// Render a rational as `p/q` (or `p` when integral).
pub fn fmt_rational(x: &Rational) -> String {
    x.to_string()
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    t.parse::<Rational>().map_err(|_| Error::Parse(format!("not a rational number: `{s}`")))
}

/// Sign `(-1)^k` as a rational.
pub fn sign(k: i64) -> Rational {
    if k.rem_euclid(2) == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

pub fn is_negative(x: &Rational) -> bool {
    x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rref_identity_zero_and_rank_one() {
        let (r, p) = rref(&Matrix::identity(2));
        assert_eq!(r, Matrix::identity(2));
        assert_eq!(p, vec![0, 1]);

        let (r, p) = rref(&Matrix::zeros(3, 2));
        assert!(r.is_zero());
        assert!(p.is_empty());

        let (r, p) = rref(&Matrix::from_i64(2, 2, &[1, 2, 2, 4]));
        assert_eq!(r, Matrix::from_i64(2, 2, &[1, 2, 0, 0]));
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel(&Matrix::identity(3)).is_zero());
        assert!(kernel(&Matrix::zeros(3, 3)).is_full());
        let k = kernel(&Matrix::from_i64(1, 2, &[1, 1]));
        assert_eq!(k, Subspace::span(2, &[ivec(&[1, -1])]));
    }

    #[test]
    fn image_examples() {
        assert!(image(&Matrix::identity(2)).is_full());
        assert!(image(&Matrix::zeros(2, 3)).is_zero());
        assert_eq!(image(&Matrix::from_i64(2, 1, &[1, 2])), Subspace::span(2, &[ivec(&[1, 2])]));
    }

    #[test]
    fn sum_and_intersection() {
        let a = Subspace::span(3, &[ivec(&[1, 0, 0]), ivec(&[0, 1, 0])]);
        let b = Subspace::span(3, &[ivec(&[1, 0, 0]), ivec(&[0, 0, 1])]);
        assert!(a.sum(&b).unwrap().is_full());
        assert_eq!(a.intersect(&b).unwrap(), Subspace::span(3, &[ivec(&[1, 0, 0])]));
        assert_eq!(a.sum(&a).unwrap(), a);
        assert_eq!(a.intersect(&a).unwrap(), a);
        assert_eq!(Subspace::zero(3).sum(&a).unwrap(), a);
        assert!(matches!(a.sum(&Subspace::zero(2)), Err(Error::AmbientMismatch { .. })));
    }

    #[test]
    fn quotient_examples() {
        let v = Subspace::span(3, &[ivec(&[1, 0, 0]), ivec(&[0, 1, 0])]);
        assert_eq!(quotient(&v, &v).unwrap().dim(), 0);

        let x_axis = Subspace::span(2, &[ivec(&[1, 0])]);
        let qs = quotient(&Subspace::full(2), &x_axis).unwrap();
        assert_eq!(qs.dim(), 1);
        assert!(is_zero_vec(&qs.project(&ivec(&[5, 0]))));

        let w = Subspace::span(3, &[ivec(&[1, 1, 0])]);
        let qs = quotient(&v, &w).unwrap();
        assert_eq!(qs.dim(), 1);
        assert_eq!(qs.projection().rank(), 1);
        assert!(is_zero_vec(&qs.project(&ivec(&[2, 2, 0]))));

        let bad = Subspace::span(3, &[ivec(&[0, 0, 1])]);
        assert!(matches!(quotient(&v, &bad), Err(Error::NotASubspace(_))));
    }

    #[test]
    fn solve_examples() {
        let v = ivec(&[3, -1]);
        assert_eq!(solve_preimage(&Matrix::identity(2), &v), Some(v));
        assert_eq!(solve_preimage(&Matrix::zeros(2, 2), &ivec(&[1, 0])), None);
        assert_eq!(solve_preimage(&Matrix::from_i64(2, 1, &[1, 2]), &ivec(&[2, 4])), Some(ivec(&[2])));
    }

    #[test]
    fn preimage_and_coordinates() {
        let m = Matrix::from_i64(2, 2, &[1, 1, 0, 0]);
        let w = Subspace::zero(2);
        assert_eq!(w.preimage(&m), Subspace::span(2, &[ivec(&[1, -1])]));
        let s = Subspace::span(3, &[ivec(&[1, 2, 0]), ivec(&[0, 1, 1])]);
        let v = ivec(&[2, 7, 3]);
        let c = s.coords(&v).unwrap();
        assert_eq!(s.from_coords(&c), v);
        assert!(s.coords(&ivec(&[0, 0, 1])).is_none());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational("-3/6").unwrap(), frac(-1, 2));
        assert_eq!(fmt_rational(&frac(4, 2)), "2");
        assert!(parse_rational("x").is_err());
    }

    fn small_matrix() -> impl Strategy<Value = Matrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..4, r * c).prop_map(move |xs| Matrix::from_i64(r, c, &xs))
        })
    }

    fn subspace_pair() -> impl Strategy<Value = (Subspace, Subspace)> {
        (1usize..5).prop_flat_map(|n| {
            let vecs = proptest::collection::vec(proptest::collection::vec(-2i64..3, n), 0..4);
            (vecs.clone(), vecs).prop_map(move |(a, b)| {
                let a: Vec<Vector> = a.iter().map(|v| ivec(v)).collect();
                let b: Vec<Vector> = b.iter().map(|v| ivec(v)).collect();
                (Subspace::span(n, &a), Subspace::span(n, &b))
            })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in small_matrix()) {
            prop_assert_eq!(m.rank() + kernel(&m).dim(), m.cols());
            for k in kernel(&m).basis() {
                prop_assert!(is_zero_vec(&m.apply(k)));
            }
        }

        #[test]
        fn grassmann_identity((a, b) in subspace_pair()) {
            let s = a.sum(&b).unwrap();
            let i = a.intersect(&b).unwrap();
            prop_assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
            prop_assert!(a.contains_subspace(&i) && b.contains_subspace(&i));
        }

        #[test]
        fn canonical_basis_is_spanning_set_independent((a, _b) in subspace_pair()) {
            // Re-spanning from a shuffled, rescaled basis lands on identical bits.
            let mut vs: Vec<Vector> = a.basis().iter().rev().map(|v| scale_vec(&q(3), v)).collect();
            if vs.len() > 1 {
                let extra = add_vec(&vs[0], &vs[1]);
                vs.push(extra);
            }
            prop_assert_eq!(Subspace::span(a.ambient_dim(), &vs), a);
        }

        #[test]
        fn quotient_projection_kills_denominator((a, b) in subspace_pair()) {
            let w = a.intersect(&b).unwrap();
            let qs = quotient(&a, &w).unwrap();
            prop_assert_eq!(qs.dim(), a.dim() - w.dim());
            for x in w.basis() {
                prop_assert!(is_zero_vec(&qs.project(x)));
            }
            for i in 0..qs.dim() {
                let e = unit_vec(qs.dim(), i);
                prop_assert_eq!(qs.project(&qs.lift(&e)), e);
            }
        }
    }
}
