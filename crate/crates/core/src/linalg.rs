//! Dense exact linear algebra over a [`FieldCtx`].

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::gfq::{Embedding, FieldCtx, FieldElem};

/// Default cap on the number of subspaces a single enumeration may yield.
pub const DEFAULT_SUBSPACE_CAP: u64 = 10_000_000;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldCtx,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix<{:?}>{}x{}[", self.field, self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<u32> = self.row(r).iter().map(|x| x.index()).collect();
            write!(f, "{row:?}")?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = FieldElem;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &FieldElem {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut FieldElem {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Result of Gauss-Jordan elimination.
#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn new(field: FieldCtx, rows: usize, cols: usize, data: Vec<FieldElem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| x.index() >= field.order()) {
            return Err(Error::InvalidInput(format!("matrix entry out of range for {field:?}")));
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds from integer-encoded entries, row-major.
    pub fn from_indices(field: &FieldCtx, rows: usize, cols: usize, data: &[u64]) -> Result<Self> {
        let data = data
            .iter()
            .map(|&x| field.elem(x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field.clone(), rows, cols, data)
    }

    pub fn from_rows(field: &FieldCtx, rows: &[Vec<FieldElem>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(field.clone(), rows.len(), cols, rows.concat())
    }

    pub fn zeros(field: &FieldCtx, rows: usize, cols: usize) -> Self {
        Self {
            field: field.clone(),
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &FieldCtx, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = FieldElem::ONE;
        }
        m
    }

    pub fn diagonal(field: &FieldCtx, diag: &[FieldElem]) -> Self {
        let mut m = Self::zeros(field, diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// The matrix unit E_{ij}.
    pub fn unit(field: &FieldCtx, rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        m[(i, j)] = FieldElem::ONE;
        m
    }

    #[inline]
    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[FieldElem] {
        &self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Integer encodings of the entries, row-major.
    pub fn indices(&self) -> Vec<u64> {
        self.data.iter().map(|x| x.index() as u64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    fn check_same_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::InvalidInput(format!(
                "field mismatch: {:?} vs {:?}",
                self.field, other.field
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] = f.mul_add(out[(r, c)], a, other[(k, c)]);
                }
            }
        }
        Ok(out)
    }

    /// `M·v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[FieldElem]) -> Result<Vec<FieldElem>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(FieldElem::ZERO, |acc, (&a, &b)| f.mul_add(acc, a, b))
            })
            .collect())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.shape() != other.shape() {
            return Err(Error::Dimension("matrix shapes differ".into()));
        }
        let f = &self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    pub fn scale(&self, s: FieldElem) -> Matrix {
        let f = &self.field;
        Matrix {
            data: self.data.iter().map(|&a| f.mul(s, a)).collect(),
            ..self.clone()
        }
    }

    /// `Σ coeffs[i]·mats[i]`; all matrices share shape and field.
    pub fn linear_combination(mats: &[Matrix], coeffs: &[FieldElem]) -> Result<Matrix> {
        let first = mats
            .first()
            .ok_or_else(|| Error::InvalidInput("empty matrix list".into()))?;
        if mats.len() != coeffs.len() {
            return Err(Error::Dimension("coefficient count differs from matrix count".into()));
        }
        let f = first.field();
        let mut out = Matrix::zeros(f, first.rows, first.cols);
        for (m, &c) in mats.iter().zip(coeffs) {
            if m.shape() != first.shape() {
                return Err(Error::Dimension("matrix shapes differ".into()));
            }
            first.check_same_field(m)?;
            if c.is_zero() {
                continue;
            }
            for (o, &a) in out.data.iter_mut().zip(&m.data) {
                *o = f.mul_add(*o, c, a);
            }
        }
        Ok(out)
    }

    /// Entry-wise image under a field embedding.
    pub fn embed(&self, emb: &Embedding) -> Matrix {
        Matrix {
            field: emb.target().clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| emb.apply(x)).collect(),
        }
    }

    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::Dimension("vstack needs equal column counts".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.rows != other.rows {
            return Err(Error::Dimension("hstack needs equal row counts".into()));
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + other.cols));
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    /// Gauss-Jordan elimination. Pivots are chosen leftmost column first,
    /// then topmost nonzero row.
    pub fn rref(&self) -> Rref {
        let f = &self.field;
        let mut m = self.clone();
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if pr != r {
                for k in 0..cols {
                    m.data.swap(pr * cols + k, r * cols + k);
                }
            }
            let inv = f.inv(m[(r, c)]).expect("pivot is nonzero");
            for k in c..cols {
                m[(r, k)] = f.mul(m[(r, k)], inv);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m[(i, c)];
                if factor.is_zero() {
                    continue;
                }
                let neg = f.neg(factor);
                for k in c..cols {
                    let v = m[(r, k)];
                    m[(i, k)] = f.mul_add(m[(i, k)], neg, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref {
            reduced: m,
            rank: r,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        if self.field.order() == 2 {
            return self.rank_gf2_packed();
        }
        self.rank_generic()
    }

    /// Forward elimination only.
    pub(crate) fn rank_generic(&self) -> usize {
        let f = &self.field;
        let cols = self.cols;
        let mut m = self.data.clone();
        let mut r = 0;
        for c in 0..cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !m[i * cols + c].is_zero()) else {
                continue;
            };
            if pr != r {
                for k in c..cols {
                    m.swap(pr * cols + k, r * cols + k);
                }
            }
            let inv = f.inv(m[r * cols + c]).expect("pivot is nonzero");
            for i in r + 1..self.rows {
                let factor = m[i * cols + c];
                if factor.is_zero() {
                    continue;
                }
                let t = f.neg(f.mul(factor, inv));
                for k in c..cols {
                    let v = m[r * cols + k];
                    m[i * cols + k] = f.mul_add(m[i * cols + k], t, v);
                }
            }
            r += 1;
        }
        r
    }

    /// Rank over 𝔽_2 with rows packed into 64-bit words.
    pub(crate) fn rank_gf2_packed(&self) -> usize {
        let words = self.cols.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = (0..self.rows)
            .map(|r| {
                let mut packed = vec![0u64; words];
                for (c, x) in self.row(r).iter().enumerate() {
                    if !x.is_zero() {
                        packed[c / 64] |= 1 << (c % 64);
                    }
                }
                packed
            })
            .collect();
        let mut rank = 0;
        for c in 0..self.cols {
            let (w, bit) = (c / 64, 1u64 << (c % 64));
            let Some(pr) = (rank..rows.len()).find(|&i| rows[i][w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, pr);
            let pivot = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                if row[w] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    /// Right kernel `{v : M·v = 0}` in 𝔽^cols.
    pub fn kernel(&self) -> Subspace {
        let rref = self.rref();
        let f = &self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !rref.pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(f, free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            basis[(i, fc)] = FieldElem::ONE;
            for (j, &pc) in rref.pivots.iter().enumerate() {
                basis[(i, pc)] = f.neg(rref.reduced[(j, fc)]);
            }
        }
        Subspace::span(&basis)
    }

    /// Left kernel `{u : uᵀ·M = 0}` in 𝔽^rows.
    pub fn left_kernel(&self) -> Subspace {
        self.transpose().kernel()
    }

    /// Column space in 𝔽^rows.
    pub fn image(&self) -> Subspace {
        self.transpose().row_space()
    }

    pub fn row_space(&self) -> Subspace {
        Subspace::span(self)
    }
}

/// A subspace of 𝔽^n stored as the reduced row echelon basis of its span,
/// so equal subspaces compare equal entry by entry.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in {}: {:?})", self.dim(), self.ambient, self.basis)
    }
}

impl Subspace {
    /// Span of the rows of `vectors`.
    pub fn span(vectors: &Matrix) -> Subspace {
        let rref = vectors.rref();
        let cols = vectors.cols;
        let basis = Matrix {
            field: vectors.field.clone(),
            rows: rref.rank,
            cols,
            data: rref.reduced.data[..rref.rank * cols].to_vec(),
        };
        Subspace {
            ambient: cols,
            basis,
        }
    }

    pub fn from_vectors(field: &FieldCtx, ambient: usize, vectors: &[Vec<FieldElem>]) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(Error::Dimension("vector length differs from ambient dimension".into()));
        }
        let m = Matrix::new(field.clone(), vectors.len(), ambient, vectors.concat())?;
        Ok(Self::span(&m))
    }

    pub fn full(field: &FieldCtx, n: usize) -> Subspace {
        Subspace {
            ambient: n,
            basis: Matrix::identity(field, n),
        }
    }

    pub fn zero(field: &FieldCtx, n: usize) -> Subspace {
        Subspace {
            ambient: n,
            basis: Matrix::zeros(field, 0, n),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    #[inline]
    pub fn codim(&self) -> usize {
        self.ambient - self.basis.rows
    }

    #[inline]
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Canonical basis, one vector per row.
    #[inline]
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn field(&self) -> &FieldCtx {
        &self.basis.field
    }

    fn pivots(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|r| {
                self.basis
                    .row(r)
                    .iter()
                    .position(|x| !x.is_zero())
                    .expect("basis rows are nonzero")
            })
            .collect()
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        let f = self.field();
        let mut w = v.to_vec();
        for (r, pc) in self.pivots().into_iter().enumerate() {
            let t = w[pc];
            if t.is_zero() {
                continue;
            }
            let neg = f.neg(t);
            for (x, &b) in w.iter_mut().zip(self.basis.row(r)) {
                *x = f.mul_add(*x, neg, b);
            }
        }
        w.iter().all(|x| x.is_zero())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient
            && (0..self.dim()).all(|r| other.contains(self.basis.row(r)))
    }

    pub fn embed(&self, emb: &Embedding) -> Subspace {
        Subspace {
            ambient: self.ambient,
            basis: self.basis.embed(emb),
        }
    }
}

/// Gaussian binomial coefficient `[n choose k]_q`, or `None` on overflow.
pub fn gaussian_binomial(q: u64, n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let q = q as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        let num = q.checked_pow((n - i) as u32)? - 1;
        let den = q.checked_pow((i + 1) as u32)? - 1;
        acc = acc.checked_mul(num)? / den;
    }
    Some(acc)
}

/// Enumerates every `k`-dimensional subspace of 𝔽_q^n exactly once.
///
/// Pivot sets are visited in lexicographic order; within a pivot set the free
/// entries (row-major) count upward with the last free entry fastest.
pub fn subspaces_iter(field: &FieldCtx, n: usize, k: usize, cap: u64) -> Result<SubspaceIter> {
    if k > n {
        return Err(Error::InvalidInput(format!("subspace dimension {k} exceeds ambient {n}")));
    }
    let count = gaussian_binomial(field.order() as u64, n, k);
    match count {
        Some(c) if c <= cap as u128 => {}
        _ => {
            return Err(Error::CapExceeded {
                what: "subspace enumeration",
                needed: count.unwrap_or(u128::MAX),
                cap: cap as u128,
            })
        }
    }
    let mut it = SubspaceIter {
        field: field.clone(),
        n,
        k,
        pivots: (0..k).collect(),
        free: Vec::new(),
        counter: Vec::new(),
        done: false,
    };
    it.reset_free();
    Ok(it)
}

/// Subspaces of codimension `c` in 𝔽_q^n.
pub fn subspaces_of_codim(field: &FieldCtx, n: usize, c: usize, cap: u64) -> Result<SubspaceIter> {
    if c > n {
        return Err(Error::InvalidInput(format!("codimension {c} exceeds ambient {n}")));
    }
    subspaces_iter(field, n, n - c, cap)
}

pub struct SubspaceIter {
    field: FieldCtx,
    n: usize,
    k: usize,
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
    counter: Vec<u32>,
    done: bool,
}

impl SubspaceIter {
    fn reset_free(&mut self) {
        self.free.clear();
        for (r, &p) in self.pivots.iter().enumerate() {
            for c in p + 1..self.n {
                if !self.pivots.contains(&c) {
                    self.free.push((r, c));
                }
            }
        }
        self.counter = vec![0; self.free.len()];
    }

    fn advance_pivots(&mut self) -> bool {
        let (n, k) = (self.n, self.k);
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.pivots[i] < n - k + i {
                self.pivots[i] += 1;
                for j in i + 1..k {
                    self.pivots[j] = self.pivots[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for SubspaceIter {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        if self.done {
            return None;
        }
        let mut basis = Matrix::zeros(&self.field, self.k, self.n);
        for (r, &p) in self.pivots.iter().enumerate() {
            basis[(r, p)] = FieldElem::ONE;
        }
        for (&(r, c), &v) in self.free.iter().zip(&self.counter) {
            basis[(r, c)] = FieldElem(v);
        }
        let out = Subspace {
            ambient: self.n,
            basis,
        };

        let q = self.field.order();
        let mut i = self.counter.len();
        let mut carried = true;
        while i > 0 && carried {
            i -= 1;
            self.counter[i] += 1;
            if self.counter[i] == q {
                self.counter[i] = 0;
            } else {
                carried = false;
            }
        }
        if carried {
            if self.advance_pivots() {
                self.reset_free();
            } else {
                self.done = true;
            }
        }
        Some(out)
    }
}

/// `basis(W₁)·M·basis(W₂)ᵀ`, the Gram matrix of the bilinear form `M`
/// restricted to `W₁ × W₂`.
pub fn restrict_bilinear(m: &Matrix, w1: &Subspace, w2: &Subspace) -> Result<Matrix> {
    if w1.ambient() != m.rows() || w2.ambient() != m.cols() {
        return Err(Error::Dimension("subspaces do not match the bilinear form".into()));
    }
    w1.basis().mul(m)?.mul(&w2.basis().transpose())
}
